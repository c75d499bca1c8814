//! Accuracy of the depth pipeline with 4, 8, 16 and 32 views per ring
//! (fov 90, 45, 22.5 and 11.25 deg) on the same synthetic scenes.

use pdot360::classifier::DepthHeuristic;
use pdot360::pipeline::identify_frame;
use pdot360::sampler::ViewRing;
use pdot360::synth::{generate_scene, render_depth_panorama, SceneKind};
use rand::SeedableRng;

fn main() -> pdot360::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut panoramas = Vec::new();
    for i in 0..120 {
        let scene = generate_scene(SceneKind::ALL[i % 6], &mut rng)?;
        let (depth, _) = render_depth_panorama(&scene.map, &scene.pose, 1024)?;
        panoramas.push((depth, scene.gt_is_intersection));
    }
    let clf = DepthHeuristic::default();
    for n in [4usize, 8, 16, 32] {
        let ring = ViewRing::new(0.0, n, 360.0 / n as f64, 112)?;
        let correct = panoramas
            .iter()
            .map(|(erp, truth)| identify_frame(erp, "f", &ring, &clf, 3, 0.5).map(|v| v.is_intersection == *truth))
            .collect::<pdot360::Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&ok| ok)
            .count();
        println!(
            "{n:>2} views ({:>5.2} deg): accuracy {:.3}",
            360.0 / n as f64,
            correct as f64 / panoramas.len() as f64
        );
    }
    Ok(())
}
