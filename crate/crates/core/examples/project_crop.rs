//! Crop the eight-view ring from a panorama and save each view.
//!
//! `cargo run --example project_crop -- [panorama.png] [out_dir]`
//! Without arguments a synthetic T-junction is rendered first.

use std::path::PathBuf;

use pdot360::raster::EquirectImage;
use pdot360::sampler::{crop_ring, ViewRing};
use pdot360::synth::{generate_scene, render_depth_panorama, SceneKind};
use rand::SeedableRng;

fn main() -> pdot360::Result<()> {
    let mut args = std::env::args().skip(1);
    let erp = match args.next() {
        Some(p) => EquirectImage::load(p)?,
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
            let scene = generate_scene(SceneKind::T, &mut rng)?;
            render_depth_panorama(&scene.map, &scene.pose, 1024)?.1
        }
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example_crops".into()));
    std::fs::create_dir_all(&out)?;
    let ring = ViewRing::new(0.0, 8, 45.0, 224)?;
    for (k, crop) in crop_ring(&erp, &ring, "example")?.iter().enumerate() {
        let path = out.join(format!("view_{k}.png"));
        crop.raster.save_png(&path)?;
        println!("yaw {:>7.1} deg -> {}", crop.view.center_yaw.to_degrees(), path.display());
    }
    Ok(())
}
