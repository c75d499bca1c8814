//! Soft intersection labels for a toy 30 fps video with key frames at 300 and 900.

use pdot360::dataset::{build_direct_dataset, FrameAnnotation, PdotSet};
use rand::SeedableRng;

fn main() -> pdot360::Result<()> {
    let anns: Vec<FrameAnnotation> = (0..=1200u64)
        .map(|i| FrameAnnotation {
            frame_id: format!("walk_{i:05}"),
            video_id: "walk".into(),
            frame_index: i,
            fps: 30.0,
            is_key_intersection: i == 300 || i == 900,
            pdots: PdotSet::Yaws(Vec::new()),
        })
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let frames = build_direct_dataset(&anns, 10, 0.2, &mut rng)?;
    for f in frames.iter().filter(|f| f.label > 0.0) {
        println!("{} d = {:.2} s label {:.3}", f.frame_id, f.distance_sec.unwrap_or(f64::NAN), f.label);
    }
    let zeros = frames.iter().filter(|f| f.label == 0.0).count();
    println!("{} frames kept, {zeros} of them zero-labeled", frames.len());
    Ok(())
}
