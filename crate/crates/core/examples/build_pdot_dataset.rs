//! Plan PDoT training crops for a handful of annotated frames: jittered
//! positives, bisector negatives and random-region top-ups.

use pdot360::dataset::{plan_pdot_dataset, CropLabel, CropParams, FrameAnnotation, PdotSet};

fn frame(id: &str, key: bool, pdots: PdotSet) -> FrameAnnotation {
    FrameAnnotation {
        frame_id: id.into(),
        video_id: "demo".into(),
        frame_index: 0,
        fps: 30.0,
        is_key_intersection: key,
        pdots,
    }
}

fn deg(v: &[f64]) -> PdotSet {
    PdotSet::Yaws(v.iter().map(|d| d.to_radians()).collect())
}

fn main() {
    let frames = vec![
        frame("x_junction", true, deg(&[0.0, 90.0, 180.0, 270.0])),
        frame("y_junction", true, deg(&[0.0, 40.0, 200.0])),
        frame("straight", false, deg(&[0.0, 180.0])),
        frame("plaza", true, PdotSet::Omnidirectional),
    ];
    let plan = plan_pdot_dataset(&frames, &CropParams::default(), 42);
    for c in &plan.crops {
        println!(
            "{:<11} {:>7.1} deg  {:?} ({:?})",
            c.frame_id,
            c.yaw.to_degrees(),
            c.label,
            c.origin
        );
    }
    println!(
        "positives {}, negatives {}, shortfall {}",
        plan.count(CropLabel::Positive),
        plan.count(CropLabel::Negative),
        plan.shortfall
    );
}
