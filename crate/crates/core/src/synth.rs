//! Procedural road scenes with exact ground truth.
//!
//! The world is planar: walls are vertical slabs of uniform height standing on
//! a flat ground plane, with uniform sky above. Road junctions are built from
//! a list of arms around the observer, which keeps both the panorama renderer
//! and the travelability oracles analytically checkable.
//!
//! World coordinates are `(x, z)` in meters. A world azimuth `a` points along
//! `(sin a, cos a)`, matching the camera convention, and the pose heading is
//! the world azimuth that appears at ERP yaw 0.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_yaw, pixel_to_angle, yaw_gap, SphericalAngle};
use crate::raster::{Encoding, EquirectImage, Raster};

/// Depth reported for rays that escape the scene (sky, open corridor ends).
pub const FAR_CAP_M: f64 = 100.0;
pub const DEFAULT_WALL_HEIGHT: f64 = 3.0;
pub const DEFAULT_EYE_HEIGHT: f64 = 1.6;
/// Radius of the disc swept by the travelability test.
pub const DEFAULT_PDOT_RADIUS: f64 = 0.4;
/// Distance the disc must travel unobstructed.
pub const DEFAULT_PDOT_DISTANCE: f64 = 6.0;
pub const MIN_PANORAMA_WIDTH: usize = 256;
const MIN_WALL_LEN: f64 = 0.01;
const BRUTE_STEP: f64 = 0.01;
const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn from_azimuth(a: f64) -> Self {
        Self::new(a.sin(), a.cos())
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.z + o.z)
    }

    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.z - o.z)
    }

    fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.z * k)
    }

    fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.z * o.z
    }

    fn cross(self, o: Self) -> f64 {
        self.x * o.z - self.z * o.x
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.z)
    }

    /// Rotates so that local azimuth `a` becomes world azimuth `a + delta`.
    fn rotate(self, delta: f64) -> Self {
        let (s, c) = delta.sin_cos();
        Self::new(self.x * c + self.z * s, -self.x * s + self.z * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub a: Vec2,
    pub b: Vec2,
}

impl Wall {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.b.sub(self.a).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadMap {
    pub walls: Vec<Wall>,
    pub wall_height: f64,
    pub bounds: Bounds,
}

impl RoadMap {
    pub fn new(walls: Vec<Wall>, wall_height: f64) -> Result<Self> {
        if !(wall_height.is_finite() && wall_height > 0.0) {
            return Err(Error::Scene(format!("wall height {wall_height}")));
        }
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for w in &walls {
            for p in [w.a, w.b] {
                if !(p.x.is_finite() && p.z.is_finite()) {
                    return Err(Error::Scene("non-finite wall coordinate".into()));
                }
                min = Vec2::new(min.x.min(p.x), min.z.min(p.z));
                max = Vec2::new(max.x.max(p.x), max.z.max(p.z));
            }
            if w.length() <= MIN_WALL_LEN {
                return Err(Error::Scene(format!("degenerate wall {w:?}")));
            }
        }
        if walls.is_empty() {
            min = Vec2::new(0.0, 0.0);
            max = min;
        }
        Ok(Self {
            walls,
            wall_height,
            bounds: Bounds { min, max },
        })
    }

    /// Rotates every wall about `pivot` so that azimuths increase by `delta`.
    pub fn rotated_about(&self, pivot: Vec2, delta: f64) -> Self {
        let walls = self
            .walls
            .iter()
            .map(|w| {
                Wall::new(
                    w.a.sub(pivot).rotate(delta).add(pivot),
                    w.b.sub(pivot).rotate(delta).add(pivot),
                )
            })
            .collect();
        Self::new(walls, self.wall_height).expect("rotation preserves validity")
    }

    /// Distance to the first wall along a horizontal ray, if any.
    pub fn ray_cast(&self, origin: Vec2, azimuth: f64) -> Option<f64> {
        let d = Vec2::from_azimuth(azimuth);
        self.walls
            .iter()
            .filter_map(|w| ray_segment(origin, d, w))
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Distance from `p` to the nearest wall.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.walls
            .iter()
            .map(|w| point_segment_distance(p, w.a, w.b))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec2,
    pub eye_height: f64,
    /// World azimuth shown at ERP yaw 0.
    pub heading: f64,
}

impl CameraPose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            eye_height: DEFAULT_EYE_HEIGHT,
            heading: normalize_yaw(heading),
        }
    }

    pub fn world_azimuth(&self, yaw: f64) -> f64 {
        self.heading + yaw
    }

    /// Fails unless the pose is at least `radius` from every wall and below wall height.
    pub fn check_free(&self, map: &RoadMap, radius: f64) -> Result<()> {
        let c = map.clearance(self.position);
        if c < radius || c <= 0.0 {
            return Err(Error::PoseBlocked(format!(
                "clearance {c:.3} m < {radius} m"
            )));
        }
        if !(self.eye_height > 0.0 && self.eye_height < map.wall_height) {
            return Err(Error::PoseBlocked(format!(
                "eye height {} outside (0, {})",
                self.eye_height, map.wall_height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Corridor,
    Turn,
    T,
    Y,
    X,
    Omni,
}

impl SceneKind {
    pub const ALL: [SceneKind; 6] = [
        SceneKind::Corridor,
        SceneKind::Turn,
        SceneKind::T,
        SceneKind::Y,
        SceneKind::X,
        SceneKind::Omni,
    ];

    pub fn is_intersection(self) -> bool {
        !matches!(self, SceneKind::Corridor | SceneKind::Turn)
    }

    /// Arm directions in degrees relative to the observer's yaw 0, before jitter.
    pub fn canonical_arms_deg(self) -> &'static [f64] {
        match self {
            SceneKind::Corridor => &[0.0, 180.0],
            SceneKind::Turn => &[0.0, 90.0],
            SceneKind::T => &[90.0, 180.0, 270.0],
            SceneKind::Y => &[45.0, 180.0, 315.0],
            SceneKind::X => &[0.0, 90.0, 180.0, 270.0],
            SceneKind::Omni => &[],
        }
    }

    /// Whether arm azimuths are randomly perturbed. Corridors stay straight
    /// and turns stay square.
    pub fn jittered(self) -> bool {
        matches!(self, SceneKind::T | SceneKind::Y | SceneKind::X)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SceneKind::Corridor => "corridor",
            SceneKind::Turn => "turn",
            SceneKind::T => "t",
            SceneKind::Y => "y",
            SceneKind::X => "x",
            SceneKind::Omni => "omni",
        }
    }
}

impl std::str::FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SceneKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Scene(format!("unknown scene kind {s:?}")))
    }
}

/// One road leaving the junction, in the observer's frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    /// Yaw of the arm axis, radians.
    pub azimuth: f64,
    pub width: f64,
    /// Extent of the arm's walls from the junction center.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub width_range: (f64, f64),
    pub length_range: (f64, f64),
    pub jitter_deg: f64,
    /// Side of the open square used for omnidirectional scenes.
    pub omni_side_range: (f64, f64),
    pub wall_height: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width_range: (3.0, 8.0),
            length_range: (10.0, 30.0),
            jitter_deg: 10.0,
            omni_side_range: (20.0, 30.0),
            wall_height: DEFAULT_WALL_HEIGHT,
        }
    }
}

impl SceneParams {
    /// Default ranges with arm jitter disabled.
    pub fn canonical() -> Self {
        Self {
            jitter_deg: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSample {
    pub map: RoadMap,
    pub pose: CameraPose,
    pub kind: SceneKind,
    /// PDoT yaws relative to the pose heading (ERP yaw), sorted. Empty for omni scenes.
    pub gt_pdot_yaws: Vec<f64>,
    pub omnidirectional: bool,
    pub gt_is_intersection: bool,
}

impl SceneSample {
    pub fn from_arms(kind: SceneKind, arms: &[Arm], pose: CameraPose, wall_height: f64) -> Result<Self> {
        let local = junction_walls(arms);
        let walls = local
            .into_iter()
            .map(|w| {
                Wall::new(
                    w.a.rotate(pose.heading).add(pose.position),
                    w.b.rotate(pose.heading).add(pose.position),
                )
            })
            .collect();
        let map = RoadMap::new(walls, wall_height)?;
        let mut yaws: Vec<f64> = arms.iter().map(|a| normalize_yaw(a.azimuth)).collect();
        yaws.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            map,
            pose,
            kind,
            gt_is_intersection: yaws.len() >= 3,
            gt_pdot_yaws: yaws,
            omnidirectional: false,
        })
    }

    pub fn omni(side: f64, pose: CameraPose, wall_height: f64) -> Result<Self> {
        let h = side / 2.0;
        let corners = [
            Vec2::new(-h, -h),
            Vec2::new(h, -h),
            Vec2::new(h, h),
            Vec2::new(-h, h),
        ];
        let walls = (0..4)
            .map(|i| {
                Wall::new(
                    corners[i].rotate(pose.heading).add(pose.position),
                    corners[(i + 1) % 4].rotate(pose.heading).add(pose.position),
                )
            })
            .collect();
        Ok(Self {
            map: RoadMap::new(walls, wall_height)?,
            pose,
            kind: SceneKind::Omni,
            gt_pdot_yaws: Vec::new(),
            omnidirectional: true,
            gt_is_intersection: true,
        })
    }

    /// Turns the whole scene (walls and heading) by `delta` about the observer.
    pub fn rotated(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.map = self.map.rotated_about(self.pose.position, delta);
        out.pose.heading = normalize_yaw(self.pose.heading + delta);
        out
    }

    pub fn gt_pdot_count(&self) -> usize {
        self.gt_pdot_yaws.len()
    }
}

/// Walls of a junction whose arms meet at the origin.
///
/// For each pair of angularly adjacent arms the facing walls are extended to
/// their common corner. Pairs that are nearly opposite (gap within 25 deg of
/// a half turn) have no usable corner; their walls start abeam the origin and
/// are joined by a short bridge.
pub fn junction_walls(arms: &[Arm]) -> Vec<Wall> {
    const NEAR_STRAIGHT: f64 = 25.0 * PI / 180.0;
    let n = arms.len();
    if n == 0 {
        return Vec::new();
    }
    let mut arms: Vec<Arm> = arms.to_vec();
    arms.sort_by(|a, b| yaw_gap(0.0, a.azimuth).total_cmp(&yaw_gap(0.0, b.azimuth)));

    // start parameter of each arm's wall on the + (toward next arm) and - sides
    let mut plus_start = vec![0.0; n];
    let mut minus_start = vec![0.0; n];
    let mut bridges = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (ai, aj) = (&arms[i], &arms[j]);
        let gap = if n == 1 { TAU } else { yaw_gap(ai.azimuth, aj.azimuth) };
        let di = Vec2::from_azimuth(ai.azimuth);
        let dj = Vec2::from_azimuth(aj.azimuth);
        let ni = side_normal(ai.azimuth);
        let nj = side_normal(aj.azimuth);
        let oi = ni.scale(ai.width / 2.0);
        let oj = nj.scale(-aj.width / 2.0);
        if n == 1 || (gap - PI).abs() < NEAR_STRAIGHT {
            plus_start[i] = 0.0;
            minus_start[j] = 0.0;
            let (p, q) = (oi, oj);
            if p.sub(q).norm() > MIN_WALL_LEN {
                bridges.push(Wall::new(p, q));
            }
            continue;
        }
        // s_i * di + oi = s_j * dj + oj
        let rhs = oj.sub(oi);
        let det = di.cross(dj.scale(-1.0));
        let si = rhs.cross(dj.scale(-1.0)) / det;
        let sj = di.cross(rhs) / det;
        plus_start[i] = si;
        minus_start[j] = sj;
    }

    let mut walls = Vec::new();
    for (i, a) in arms.iter().enumerate() {
        let d = Vec2::from_azimuth(a.azimuth);
        let n = side_normal(a.azimuth);
        for (start, sign) in [(plus_start[i], 1.0), (minus_start[i], -1.0)] {
            if start < a.length - MIN_WALL_LEN {
                let off = n.scale(sign * a.width / 2.0);
                walls.push(Wall::new(d.scale(start).add(off), d.scale(a.length).add(off)));
            }
        }
    }
    walls.extend(bridges);
    walls
}

/// Unit vector perpendicular to the arm, pointing toward increasing azimuth.
fn side_normal(azimuth: f64) -> Vec2 {
    let (s, c) = azimuth.sin_cos();
    Vec2::new(c, -s)
}

pub fn generate_scene<R: Rng + ?Sized>(kind: SceneKind, rng: &mut R) -> Result<SceneSample> {
    generate_scene_with(kind, &SceneParams::default(), rng)
}

pub fn generate_scene_with<R: Rng + ?Sized>(
    kind: SceneKind,
    params: &SceneParams,
    rng: &mut R,
) -> Result<SceneSample> {
    for _ in 0..MAX_ATTEMPTS {
        let heading = rng.gen_range(-PI..PI);
        let position = Vec2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let pose = CameraPose::new(position, heading);
        let scene = if kind == SceneKind::Omni {
            let side = sample_range(rng, params.omni_side_range);
            SceneSample::omni(side, pose, params.wall_height)?
        } else {
            let arms: Vec<Arm> = kind
                .canonical_arms_deg()
                .iter()
                .map(|&deg| {
                    let jitter = if kind.jittered() && params.jitter_deg > 0.0 {
                        rng.gen_range(-params.jitter_deg..=params.jitter_deg)
                    } else {
                        0.0
                    };
                    Arm {
                        azimuth: normalize_yaw((deg + jitter).to_radians()),
                        width: sample_range(rng, params.width_range),
                        length: sample_range(rng, params.length_range),
                    }
                })
                .collect();
            SceneSample::from_arms(kind, &arms, pose, params.wall_height)?
        };
        if scene.pose.check_free(&scene.map, DEFAULT_PDOT_RADIUS).is_err() {
            continue;
        }
        let arms_open = scene.gt_pdot_yaws.iter().all(|&y| {
            ground_truth_pdot(&scene.map, &scene.pose, y, DEFAULT_PDOT_RADIUS, DEFAULT_PDOT_DISTANCE)
        });
        if arms_open {
            return Ok(scene);
        }
    }
    Err(Error::RngExhausted(MAX_ATTEMPTS))
}

fn sample_range<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// What a viewing ray hits first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Wall(f64),
    Ground(f64),
    Sky,
}

impl Surface {
    pub fn depth(self) -> f64 {
        match self {
            Surface::Wall(d) | Surface::Ground(d) => d.min(FAR_CAP_M),
            Surface::Sky => FAR_CAP_M,
        }
    }
}

/// Resolves a pitch given the horizontal distance `horizontal` to the first wall.
///
/// Walls share one height, so a ray that clears the first wall clears every
/// wall behind it.
fn surface_at(horizontal: Option<f64>, pitch: f64, eye: f64, wall_height: f64) -> Surface {
    let (sp, cp) = pitch.sin_cos();
    if pitch < 0.0 {
        let ground = eye / -sp;
        let ground_h = ground * cp;
        match horizontal {
            Some(t) if t <= ground_h => Surface::Wall(t / cp),
            _ => Surface::Ground(ground),
        }
    } else {
        match horizontal {
            Some(t) if pitch == 0.0 || t * sp / cp <= wall_height - eye => Surface::Wall(t / cp),
            _ => Surface::Sky,
        }
    }
}

/// Slant depth from the eye along an ERP direction, capped at [`FAR_CAP_M`].
pub fn depth_at(map: &RoadMap, pose: &CameraPose, angle: SphericalAngle) -> f64 {
    let t = map.ray_cast(pose.position, pose.world_azimuth(angle.yaw()));
    surface_at(t, angle.pitch(), pose.eye_height, map.wall_height).depth()
}

/// Renders the depth panorama (meters) and a shaded grayscale panorama.
pub fn render_depth_panorama(
    map: &RoadMap,
    pose: &CameraPose,
    width: usize,
) -> Result<(EquirectImage, EquirectImage)> {
    if width < MIN_PANORAMA_WIDTH || !width.is_multiple_of(2) {
        return Err(Error::Scene(format!(
            "panorama width {width} must be even and >= {MIN_PANORAMA_WIDTH}"
        )));
    }
    pose.check_free(map, 0.0)?;
    let height = width / 2;
    let horizontal: Vec<Option<f64>> = (0..width)
        .map(|x| {
            let a = pixel_to_angle(x as f64 + 0.5, height as f64 / 2.0, width, height)
                .expect("finite pixel");
            map.ray_cast(pose.position, pose.world_azimuth(a.yaw()))
        })
        .collect();
    let mut depth = Vec::with_capacity(width * height);
    let mut shade = Vec::with_capacity(width * height);
    for y in 0..height {
        let pitch = (0.5 - (y as f64 + 0.5) / height as f64) * PI;
        for t in &horizontal {
            let s = surface_at(*t, pitch, pose.eye_height, map.wall_height);
            let d = s.depth();
            depth.push(d as f32);
            shade.push(tone_map(s) as f32);
        }
    }
    let depth = EquirectImage::new(Raster::new(width, height, 1, Encoding::DepthMeters, depth)?)?;
    let shade = EquirectImage::new(Raster::new(width, height, 1, Encoding::Intensity, shade)?)?;
    Ok((depth, shade))
}

/// Brightness on the 0..=255 scale; walls and ground darken monotonically with depth.
fn tone_map(s: Surface) -> f64 {
    match s {
        Surface::Wall(d) => 50.0 + 180.0 * (-d.min(FAR_CAP_M) / 25.0).exp(),
        Surface::Ground(d) => 20.0 + 100.0 * (-d.min(FAR_CAP_M) / 25.0).exp(),
        Surface::Sky => 240.0,
    }
}

/// True when a disc of radius `radius` can slide `distance` meters from the
/// pose along ERP yaw `yaw` without touching a wall (swept-capsule test).
pub fn ground_truth_pdot(map: &RoadMap, pose: &CameraPose, yaw: f64, radius: f64, distance: f64) -> bool {
    if distance <= 0.0 {
        return true;
    }
    let start = pose.position;
    let end = start.add(Vec2::from_azimuth(pose.world_azimuth(yaw)).scale(distance));
    map.walls
        .iter()
        .all(|w| segment_segment_distance(start, end, w.a, w.b) > radius)
}

/// Step-by-step version of [`ground_truth_pdot`]: moves the disc in 1 cm
/// increments and checks the disc against every wall at each stop, plus
/// whether the step itself jumped across a wall.
pub fn oracle_pdot_bruteforce(map: &RoadMap, pose: &CameraPose, yaw: f64, radius: f64, distance: f64) -> bool {
    if distance <= 0.0 {
        return true;
    }
    let (dx, dz) = {
        let a = pose.world_azimuth(yaw);
        (a.sin(), a.cos())
    };
    let steps = (distance / BRUTE_STEP).ceil() as usize;
    let at = |k: usize| {
        let s = (k as f64 * BRUTE_STEP).min(distance);
        (pose.position.x + dx * s, pose.position.z + dz * s)
    };
    let mut prev = at(0);
    for k in 0..=steps {
        let p = at(k);
        for w in &map.walls {
            // nearest point on the wall by clamped projection
            let (ex, ez) = (w.b.x - w.a.x, w.b.z - w.a.z);
            let len2 = ex * ex + ez * ez;
            let u = (((p.0 - w.a.x) * ex + (p.1 - w.a.z) * ez) / len2).clamp(0.0, 1.0);
            let (qx, qz) = (w.a.x + u * ex, w.a.z + u * ez);
            if (p.0 - qx).hypot(p.1 - qz) <= radius {
                return false;
            }
            if k > 0 && straddles(prev, p, w) {
                return false;
            }
        }
        prev = p;
    }
    true
}

fn straddles(p: (f64, f64), q: (f64, f64), w: &Wall) -> bool {
    let side = |ax: f64, az: f64, bx: f64, bz: f64, cx: f64, cz: f64| (bx - ax) * (cz - az) - (bz - az) * (cx - ax);
    let s1 = side(w.a.x, w.a.z, w.b.x, w.b.z, p.0, p.1);
    let s2 = side(w.a.x, w.a.z, w.b.x, w.b.z, q.0, q.1);
    let s3 = side(p.0, p.1, q.0, q.1, w.a.x, w.a.z);
    let s4 = side(p.0, p.1, q.0, q.1, w.b.x, w.b.z);
    s1 * s2 <= 0.0 && s3 * s4 <= 0.0 && (s1 != 0.0 || s2 != 0.0)
}

fn ray_segment(o: Vec2, d: Vec2, w: &Wall) -> Option<f64> {
    let e = w.b.sub(w.a);
    let denom = d.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = w.a.sub(o);
    let t = ao.cross(e) / denom;
    let s = ao.cross(d) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b.sub(a);
    let len2 = e.dot(e);
    let u = if len2 > 0.0 { (p.sub(a).dot(e) / len2).clamp(0.0, 1.0) } else { 0.0 };
    p.sub(a.add(e.scale(u))).norm()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Vec2, b: Vec2, c: Vec2, d: f64| {
        d == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.z >= a.z.min(b.z) && c.z <= a.z.max(b.z)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

pub(crate) fn segment_segment_distance(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

/// Yaws (relative to heading) of a ring's views that pass [`ground_truth_pdot`].
pub fn ring_ground_truth(scene: &SceneSample, yaws: &[f64]) -> Vec<bool> {
    yaws.iter()
        .map(|&y| ground_truth_pdot(&scene.map, &scene.pose, y, DEFAULT_PDOT_RADIUS, DEFAULT_PDOT_DISTANCE))
        .collect()
}
