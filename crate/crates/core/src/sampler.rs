//! Gnomonic (rectilinear) crops from equirectangular frames and the
//! horizon view ring they are taken on.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_to_pixel, direction_to_angle, normalize_yaw, UnitDirection};
use crate::raster::{EquirectImage, Raster};

pub const DEFAULT_FOV_DEG: f64 = 45.0;
pub const DEFAULT_OUT_SIZE: usize = 224;
pub const DEFAULT_VIEWS: usize = 8;
pub const SUPPORTED_VIEW_COUNTS: [usize; 4] = [4, 8, 16, 32];

/// A square perspective view centered on `(center_yaw, center_pitch)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub center_yaw: f64,
    pub center_pitch: f64,
    pub fov_deg: f64,
    pub out_size: usize,
}

impl ViewSpec {
    pub fn new(center_yaw: f64, center_pitch: f64, fov_deg: f64, out_size: usize) -> Result<Self> {
        let v = Self {
            center_yaw: normalize_yaw(center_yaw),
            center_pitch,
            fov_deg,
            out_size,
        };
        v.validate()?;
        Ok(v)
    }

    /// Horizon view with the default 45 degree field of view and 224 px output.
    pub fn horizon(center_yaw: f64) -> Self {
        Self {
            center_yaw: normalize_yaw(center_yaw),
            center_pitch: 0.0,
            fov_deg: DEFAULT_FOV_DEG,
            out_size: DEFAULT_OUT_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center_yaw.is_finite() || !self.center_pitch.is_finite() || !self.fov_deg.is_finite() {
            return Err(Error::InvalidView("non-finite view parameter".into()));
        }
        if self.center_pitch.abs() > FRAC_PI_2 {
            return Err(Error::InvalidView(format!(
                "center pitch {} outside [-pi/2, pi/2]",
                self.center_pitch
            )));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidView(format!("fov {} deg not in (0, 180)", self.fov_deg)));
        }
        if self.out_size < 8 {
            return Err(Error::InvalidView(format!("out_size {} < 8", self.out_size)));
        }
        Ok(())
    }

    pub fn half_width_tan(&self) -> f64 {
        (self.fov_deg.to_radians() / 2.0).tan()
    }

    /// Viewing ray through the center of output pixel `(i, j)`, in the ERP frame.
    pub fn ray(&self, i: usize, j: usize) -> UnitDirection {
        let s = self.out_size as f64;
        let t = self.half_width_tan();
        let x = (2.0 * (i as f64 + 0.5) / s - 1.0) * t;
        let y = (1.0 - 2.0 * (j as f64 + 0.5) / s) * t;
        self.rotate(x, y, 1.0)
    }

    fn rotate(&self, x: f64, y: f64, z: f64) -> UnitDirection {
        let n = (x * x + y * y + z * z).sqrt();
        let (x, y, z) = (x / n, y / n, z / n);
        // pitch about +x: positive pitch lifts the forward axis toward +y
        let (sp, cp) = self.center_pitch.sin_cos();
        let (y1, z1) = (y * cp + z * sp, -y * sp + z * cp);
        // yaw about +y: positive yaw turns forward toward +x
        let (sy, cy) = self.center_yaw.sin_cos();
        let (x2, z2) = (x * cy + z1 * sy, -x * sy + z1 * cy);
        UnitDirection::new(x2, y1, z2).expect("rotation of a unit vector")
    }
}

/// A sampled perspective view.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveCrop {
    pub view: ViewSpec,
    pub raster: Raster,
    pub source_frame_id: String,
}

/// `n` views equally spaced in yaw around the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRing {
    pub views: Vec<ViewSpec>,
    pub start_yaw: f64,
    pub n: usize,
    /// True when `fov * n != 360`, i.e. neighbouring views overlap or leave gaps.
    pub overlapping: bool,
}

impl ViewRing {
    /// Ring whose views exactly tile the horizon (`fov_deg * n == 360`).
    pub fn new(start_yaw: f64, n: usize, fov_deg: f64, out_size: usize) -> Result<Self> {
        let ring = Self::with_overlap(start_yaw, n, fov_deg, out_size)?;
        if ring.overlapping {
            return Err(Error::InvalidView(format!(
                "{n} views of {fov_deg} deg do not tile 360 deg"
            )));
        }
        Ok(ring)
    }

    /// Like [`ViewRing::new`] but accepts any fov, flagging rings that do not tile.
    pub fn with_overlap(start_yaw: f64, n: usize, fov_deg: f64, out_size: usize) -> Result<Self> {
        if !SUPPORTED_VIEW_COUNTS.contains(&n) {
            return Err(Error::InvalidView(format!(
                "view count {n} not in {SUPPORTED_VIEW_COUNTS:?}"
            )));
        }
        if !start_yaw.is_finite() {
            return Err(Error::InvalidView("non-finite start yaw".into()));
        }
        let step = TAU / n as f64;
        let views = (0..n)
            .map(|k| ViewSpec::new(start_yaw + k as f64 * step, 0.0, fov_deg, out_size))
            .collect::<Result<Vec<_>>>()?;
        let overlapping = (fov_deg * n as f64 - 360.0).abs() > 1e-9;
        Ok(Self {
            views,
            start_yaw: normalize_yaw(start_yaw),
            n,
            overlapping,
        })
    }

    /// Default eight-view ring at a random start direction.
    pub fn random_start<R: Rng + ?Sized>(rng: &mut R, n: usize, fov_deg: f64, out_size: usize) -> Result<Self> {
        let start = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        Self::new(start, n, fov_deg, out_size)
    }

    pub fn yaws(&self) -> Vec<f64> {
        self.views.iter().map(|v| v.center_yaw).collect()
    }
}

/// Bilinear ERP lookup at continuous pixel coordinates (pixel centers at `+0.5`).
/// Columns wrap across the yaw seam; rows clamp at the poles.
pub fn sample_bilinear(erp: &EquirectImage, u: f64, v: f64, out: &mut [f32]) {
    let r = erp.raster();
    let (w, h) = (r.width(), r.height());
    let x = u - 0.5;
    let y = v - 0.5;
    let x0f = x.floor();
    let y0f = y.floor();
    let fx = (x - x0f) as f32;
    let fy = (y - y0f) as f32;
    let x0 = (x0f as i64).rem_euclid(w as i64) as usize;
    let x1 = (x0 + 1) % w;
    let y0 = (y0f as i64).clamp(0, h as i64 - 1) as usize;
    let y1 = (y0f as i64 + 1).clamp(0, h as i64 - 1) as usize;
    let (p00, p10, p01, p11) = (r.pixel(x0, y0), r.pixel(x1, y0), r.pixel(x0, y1), r.pixel(x1, y1));
    for c in 0..r.channels() {
        let top = p00[c] + (p10[c] - p00[c]) * fx;
        let bottom = p01[c] + (p11[c] - p01[c]) * fx;
        out[c] = top + (bottom - top) * fy;
    }
}

pub fn crop_nfov(erp: &EquirectImage, view: &ViewSpec, frame_id: &str) -> Result<PerspectiveCrop> {
    view.validate()?;
    let s = view.out_size;
    let ch = erp.channels();
    let (w, h) = (erp.width(), erp.height());
    let mut data = vec![0.0f32; s * s * ch];
    for j in 0..s {
        for i in 0..s {
            let a = direction_to_angle(view.ray(i, j));
            let (u, v) = angle_to_pixel(a, w, h);
            let o = (j * s + i) * ch;
            sample_bilinear(erp, u, v, &mut data[o..o + ch]);
        }
    }
    Ok(PerspectiveCrop {
        view: *view,
        raster: Raster::new(s, s, ch, erp.encoding(), data)?,
        source_frame_id: frame_id.to_owned(),
    })
}

/// Crops every view of `ring`; views are sampled in parallel.
pub fn crop_ring(erp: &EquirectImage, ring: &ViewRing, frame_id: &str) -> Result<Vec<PerspectiveCrop>> {
    ring.views
        .par_iter()
        .map(|v| crop_nfov(erp, v, frame_id))
        .collect()
}
