//! Coordinate conventions shared by every other module.
//!
//! Equirectangular (ERP) frames map pixel columns linearly to yaw and rows
//! linearly to pitch. Yaw 0 is the center column and grows to the right;
//! pitch 0 is the horizon and grows upward. Unit directions are expressed in
//! a right-handed camera frame with `y` up, `z` forward (yaw 0) and `x` to
//! the right (yaw +pi/2).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PITCH_SLACK: f64 = 1e-12;
const POLE_EPS: f64 = 1e-12;

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let mut r = (yaw + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    if r >= PI {
        r -= TAU;
    }
    r
}

/// Counter-clockwise (increasing yaw) angular distance from `from` to `to`, in `[0, 2pi)`.
pub fn yaw_gap(from: f64, to: f64) -> f64 {
    let g = (to - from).rem_euclid(TAU);
    if g >= TAU {
        0.0
    } else {
        g
    }
}

/// Minimal separation of two yaws on the circle, in `[0, pi]`.
pub fn inner_yaw_angle(a: f64, b: f64) -> f64 {
    let d = yaw_gap(a, b);
    d.min(TAU - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalAngle {
    yaw: f64,
    pitch: f64,
}

impl SphericalAngle {
    pub fn new(yaw: f64, pitch: f64) -> Result<Self> {
        if !yaw.is_finite() {
            return Err(Error::NonFinite("yaw"));
        }
        if !pitch.is_finite() {
            return Err(Error::NonFinite("pitch"));
        }
        if pitch.abs() > FRAC_PI_2 + PITCH_SLACK {
            return Err(Error::PitchOutOfRange(pitch));
        }
        Ok(Self {
            yaw: normalize_yaw(yaw),
            pitch: pitch.clamp(-FRAC_PI_2, FRAC_PI_2),
        })
    }

    pub fn from_degrees(yaw_deg: f64, pitch_deg: f64) -> Result<Self> {
        Self::new(yaw_deg.to_radians(), pitch_deg.to_radians())
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Shifts yaw by `delta`, keeping it normalized.
    pub fn rotated(&self, delta: f64) -> Self {
        Self {
            yaw: normalize_yaw(self.yaw + delta),
            pitch: self.pitch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitDirection {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitDirection {
    /// Normalizes `(x, y, z)`; fails for zero-length or non-finite vectors.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        let n = (x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroDirection);
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

pub fn angle_to_direction(a: SphericalAngle) -> UnitDirection {
    let (sy, cy) = a.yaw.sin_cos();
    let (sp, cp) = a.pitch.sin_cos();
    UnitDirection {
        x: cp * sy,
        y: sp,
        z: cp * cy,
    }
}

/// Inverse of [`angle_to_direction`]. Yaw is reported as 0 at the poles.
pub fn direction_to_angle(d: UnitDirection) -> SphericalAngle {
    let horiz = d.x.hypot(d.z);
    let pitch = d.y.atan2(horiz).clamp(-FRAC_PI_2, FRAC_PI_2);
    let yaw = if horiz <= POLE_EPS {
        0.0
    } else {
        normalize_yaw(d.x.atan2(d.z))
    };
    SphericalAngle { yaw, pitch }
}

/// Continuous ERP pixel coordinates to a spherical angle. Columns wrap.
pub fn pixel_to_angle(u: f64, v: f64, width: usize, height: usize) -> Result<SphericalAngle> {
    if !u.is_finite() {
        return Err(Error::NonFinite("u"));
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("v"));
    }
    let (w, h) = (width as f64, height as f64);
    let yaw = (u / w - 0.5) * TAU;
    let pitch = (0.5 - v / h) * PI;
    SphericalAngle::new(yaw, pitch)
}

/// Spherical angle to continuous ERP pixel coordinates, with `u` in `[0, width)`.
pub fn angle_to_pixel(a: SphericalAngle, width: usize, height: usize) -> (f64, f64) {
    let (w, h) = (width as f64, height as f64);
    let mut u = ((a.yaw / TAU) + 0.5) * w;
    u = u.rem_euclid(w);
    if u >= w {
        u = 0.0;
    }
    let v = (0.5 - a.pitch / PI) * h;
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn center_pixel_is_forward_horizon() {
        let a = pixel_to_angle(1024.0, 512.0, 2048, 1024).unwrap();
        assert_eq!(a.yaw(), 0.0);
        assert_eq!(a.pitch(), 0.0);
        let a = pixel_to_angle(0.75 * 2048.0, 512.0, 2048, 1024).unwrap();
        assert!((a.yaw() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn angle_to_pixel_edges() {
        let (u, v) = angle_to_pixel(SphericalAngle::new(0.0, 0.0).unwrap(), 2048, 1024);
        assert_eq!((u, v), (1024.0, 512.0));
        let (u, v) = angle_to_pixel(SphericalAngle::new(-PI, 0.0).unwrap(), 2048, 1024);
        assert_eq!((u, v), (0.0, 512.0));
        // +pi normalizes onto the same left edge
        let (u, _) = angle_to_pixel(SphericalAngle::new(PI, 0.0).unwrap(), 2048, 1024);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn angle_to_pixel_quarter_turn_up() {
        // u = (1/8 + 1/2) * 2048 = 1280, v = (1/2 - 1/4) * 1024 = 256
        let (u, v) = angle_to_pixel(SphericalAngle::new(PI / 4.0, PI / 4.0).unwrap(), 2048, 1024);
        assert!((u - 1280.0).abs() < 1e-9);
        assert!((v - 256.0).abs() < 1e-9);
    }

    #[test]
    fn basis_directions() {
        let d = angle_to_direction(SphericalAngle::new(0.0, 0.0).unwrap());
        assert_eq!(d.as_array(), [0.0, 0.0, 1.0]);
        let d = angle_to_direction(SphericalAngle::new(FRAC_PI_2, 0.0).unwrap());
        assert!((d.x() - 1.0).abs() < 1e-15 && d.y().abs() < 1e-15 && d.z().abs() < 1e-15);
    }

    #[test]
    fn pole_yaw_is_canonical() {
        let up = UnitDirection::new(0.0, 1.0, 0.0).unwrap();
        let a = direction_to_angle(up);
        assert_eq!(a.yaw(), 0.0);
        assert_eq!(a.pitch(), FRAC_PI_2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            SphericalAngle::new(0.0, 2.0),
            Err(Error::PitchOutOfRange(_))
        ));
        assert!(matches!(
            pixel_to_angle(f64::NAN, 0.0, 32, 16),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            UnitDirection::new(0.0, 0.0, 0.0),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn inner_angle_examples() {
        assert!((inner_yaw_angle(0.0, deg(90.0)) - deg(90.0)).abs() < 1e-12);
        assert!((inner_yaw_angle(deg(170.0), deg(-170.0)) - deg(20.0)).abs() < 1e-12);
        let y = inner_yaw_angle(0.0, deg(40.0));
        assert!((y - deg(40.0)).abs() < 1e-12);
        assert!(y < deg(45.0));
    }

    #[test]
    fn yaw_wraps_after_rotation() {
        let a = SphericalAngle::new(deg(170.0), 0.0).unwrap().rotated(deg(20.0));
        assert!((a.yaw() - deg(-170.0)).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(2000))]

            #[test]
            fn pixel_round_trip(u in 0.0f64..2048.0, v in 0.0f64..=1024.0) {
                let a = pixel_to_angle(u, v, 2048, 1024).unwrap();
                let (u2, v2) = angle_to_pixel(a, 2048, 1024);
                let du = (u - u2).abs().min(2048.0 - (u - u2).abs());
                prop_assert!(du < 1e-6);
                prop_assert!((v - v2).abs() < 1e-6);
            }

            #[test]
            fn direction_round_trip(yaw in -PI..PI, pitch in -1.57..1.57f64) {
                let a = SphericalAngle::new(yaw, pitch).unwrap();
                let b = direction_to_angle(angle_to_direction(a));
                prop_assert!(inner_yaw_angle(a.yaw(), b.yaw()) < 1e-9);
                prop_assert!((a.pitch() - b.pitch()).abs() < 1e-9);
            }

            #[test]
            fn direction_is_unit(yaw in -10.0f64..10.0, pitch in -FRAC_PI_2..FRAC_PI_2) {
                let d = angle_to_direction(SphericalAngle::new(yaw, pitch).unwrap());
                let n = (d.x() * d.x() + d.y() * d.y() + d.z() * d.z()).sqrt();
                prop_assert!((n - 1.0).abs() < 1e-9);
            }

            #[test]
            fn inner_angle_properties(a in -20.0f64..20.0, b in -20.0f64..20.0) {
                let d = inner_yaw_angle(a, b);
                prop_assert!((0.0..=PI).contains(&d));
                prop_assert!((d - inner_yaw_angle(b, a)).abs() < 1e-12);
                prop_assert!((d - inner_yaw_angle(a + TAU, b)).abs() < 1e-9);
                prop_assert!((d - inner_yaw_angle(a, b - TAU)).abs() < 1e-9);
            }

            #[test]
            fn normalized_yaw_in_range(y in -1e4f64..1e4) {
                let n = normalize_yaw(y);
                prop_assert!((-PI..PI).contains(&n));
            }
        }
    }
}
