//! Generate one scene of each kind, render it and compare the ring's depth
//! readings with the travelability oracle.

use pdot360::geometry::SphericalAngle;
use pdot360::synth::{depth_at, generate_scene, ground_truth_pdot, render_depth_panorama, SceneKind};
use rand::SeedableRng;

fn main() -> pdot360::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    std::fs::create_dir_all("target/example_synth")?;
    for kind in SceneKind::ALL {
        let scene = generate_scene(kind, &mut rng)?;
        let (depth, shaded) = render_depth_panorama(&scene.map, &scene.pose, 1024)?;
        shaded.save_png(format!("target/example_synth/{}.png", kind.as_str()))?;
        let yaws: Vec<String> = scene.gt_pdot_yaws.iter().map(|y| format!("{:.0}", y.to_degrees())).collect();
        println!(
            "{:<8} walls {:>2}  intersection {:<5}  PDoTs [{}]{}",
            kind.as_str(),
            scene.map.walls.len(),
            scene.gt_is_intersection,
            yaws.join(", "),
            if scene.omnidirectional { " (omnidirectional)" } else { "" }
        );
        for k in 0..8 {
            let yaw = (k as f64 * 45.0).to_radians();
            let d = depth_at(&scene.map, &scene.pose, SphericalAngle::new(yaw, 0.0)?);
            let open = ground_truth_pdot(&scene.map, &scene.pose, yaw, 0.4, 6.0);
            print!("  {:>3}: {:>5.1} m{}", k * 45, d, if open { "*" } else { " " });
        }
        println!();
        assert_eq!(depth.width(), 1024);
    }
    println!("(* = travelable for a 0.4 m disc over 6 m)");
    Ok(())
}
