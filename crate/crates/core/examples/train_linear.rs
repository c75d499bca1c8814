//! Train the logistic-regression PDoT classifier on shaded synthetic crops
//! labeled by the travelability oracle, then use it for identification.

use pdot360::classifier::{train_linear_classifier, LinearModel, PdotClassifier, TrainConfig};
use pdot360::pipeline::identify_frame;
use pdot360::sampler::{crop_ring, ViewRing};
use pdot360::synth::{generate_scene, ground_truth_pdot, render_depth_panorama, SceneKind};
use rand::{Rng, SeedableRng};

const SIZE: usize = 64;

fn main() -> pdot360::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut examples = Vec::new();
    for i in 0..120 {
        let scene = generate_scene(SceneKind::ALL[i % 6], &mut rng)?;
        let (_, shaded) = render_depth_panorama(&scene.map, &scene.pose, 512)?;
        let ring = ViewRing::new(rng.gen_range(-3.1..3.1), 8, 45.0, SIZE)?;
        for crop in crop_ring(&shaded, &ring, "train")? {
            let open = ground_truth_pdot(&scene.map, &scene.pose, crop.view.center_yaw, 0.4, 6.0);
            examples.push((crop, open));
        }
    }
    let cfg = TrainConfig {
        epochs: 400,
        ..TrainConfig::default()
    };
    let (model, report) = train_linear_classifier(&examples, &cfg)?;
    println!(
        "{} crops, final loss {:.4}, train accuracy {:.3}",
        examples.len(),
        report.epoch_losses.last().copied().unwrap_or(f64::NAN),
        report.train_accuracy
    );
    std::fs::create_dir_all("target")?;
    model.save("target/linear_model.txt")?;
    let model = LinearModel::load("target/linear_model.txt")?;

    let ring = ViewRing::new(0.0, 8, 45.0, SIZE)?;
    let (mut correct, mut total) = (0, 0);
    for i in 0..60 {
        let scene = generate_scene(SceneKind::ALL[i % 6], &mut rng)?;
        let (_, shaded) = render_depth_panorama(&scene.map, &scene.pose, 512)?;
        let v = identify_frame(&shaded, "test", &ring, &model as &dyn PdotClassifier, 3, 0.5)?;
        correct += usize::from(v.is_intersection == scene.gt_is_intersection);
        total += 1;
    }
    println!("held-out frame accuracy {:.3} ({correct}/{total})", correct as f64 / total as f64);
    Ok(())
}
