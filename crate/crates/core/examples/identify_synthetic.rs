//! Identify intersections on freshly rendered depth panoramas with the
//! depth-threshold classifier, and show the per-view decisions.

use pdot360::classifier::DepthHeuristic;
use pdot360::pipeline::identify_frame;
use pdot360::sampler::ViewRing;
use pdot360::synth::{generate_scene, render_depth_panorama, SceneKind};
use rand::SeedableRng;

fn main() -> pdot360::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let ring = ViewRing::new(0.0, 8, 45.0, 224)?;
    let clf = DepthHeuristic::default();
    for kind in SceneKind::ALL {
        for i in 0..3 {
            let scene = generate_scene(kind, &mut rng)?;
            let (depth, _) = render_depth_panorama(&scene.map, &scene.pose, 1024)?;
            let id = format!("{}_{i}", kind.as_str());
            let v = identify_frame(&depth, &id, &ring, &clf, 3, 0.5)?;
            let marks: String = v.decisions.iter().map(|&d| if d { '#' } else { '.' }).collect();
            println!(
                "{id:<11} [{marks}] {} PDoTs -> {:<16} (truth: {})",
                v.pdot_count,
                if v.is_intersection { "intersection" } else { "not intersection" },
                scene.gt_is_intersection
            );
        }
    }
    Ok(())
}
