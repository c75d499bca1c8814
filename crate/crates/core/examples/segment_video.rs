//! Split a simulated walk at its intersections: noisy per-frame verdicts
//! are smoothed, then each intersection run becomes one split point.

use pdot360::segment::{smooth_bools, split_points, split_segments, DEFAULT_MIN_RUN};
use rand::{Rng, SeedableRng};

fn main() -> pdot360::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    // 600 frames with junctions around frames 150 and 420, plus 3% flips
    let truth: Vec<bool> = (0..600).map(|i| (140..160).contains(&i) || (410..432).contains(&i)).collect();
    let noisy: Vec<bool> = truth.iter().map(|&t| t ^ rng.gen_bool(0.03)).collect();
    let smoothed = smooth_bools(&noisy, DEFAULT_MIN_RUN)?;
    println!("raw flips: {}", noisy.iter().zip(&truth).filter(|(a, b)| a != b).count());
    println!("split points: {:?}", split_points(&smoothed));
    for s in split_segments("walk", &smoothed) {
        println!("  frames {:>3}..={:<3} bounded by {:?}", s.start_frame, s.end_frame, s.bounded_by);
    }
    Ok(())
}
