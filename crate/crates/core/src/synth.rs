//! Ray-cast RGB-D renderer of a furrow scene with exact ground truth.
//!
//! The ground is the plane `Y = 0`. Points with `X > X_edge(Z)` belong to the
//! furrow, whose floor lies at `Y = -trench_depth` behind a vertical wall along
//! the edge curve `X_edge(Z) = α·Z² + β·Z + γ`. Depth is the Euclidean length
//! of the camera ray (range), not the Z coordinate.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::image::{DepthMap, EdgeMask, RgbImage, INVALID_DEPTH};
use crate::{math, rng};

const SKY: [u8; 3] = [170, 190, 210];
const NOISE_STREAM: u64 = 0x006e_6f69_7365;
const DROPOUT_STREAM: u64 = 0x6472_6f70;
/// Ray-march step when searching for a soil pile, meters along the ray.
const PILE_STEP: f64 = 0.004;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SceneSpec {
    /// Quadratic coefficient of the edge curve, 1/m.
    pub edge_alpha: f64,
    pub edge_beta: f64,
    /// Lateral edge offset at the camera, meters.
    pub edge_gamma: f64,
    pub trench_depth: f64,
    pub albedo_left: u8,
    pub albedo_right: u8,
    /// Ranges beyond this are reported invalid, meters.
    pub max_range: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            edge_alpha: 0.0,
            edge_beta: 0.0,
            edge_gamma: 0.2,
            trench_depth: 0.2,
            albedo_left: 70,
            albedo_right: 170,
            max_range: 10.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.trench_depth >= 0.0) {
            return Err(Error::InvalidParameter("trench depth must be nonnegative"));
        }
        if !(self.max_range > 0.0 && self.max_range <= 10.0) {
            return Err(Error::InvalidParameter("max range must lie in (0, 10] m"));
        }
        Ok(())
    }

    #[inline]
    pub fn edge_x(&self, z: f64) -> f64 {
        (self.edge_alpha * z + self.edge_beta) * z + self.edge_gamma
    }

    /// Scene with a mildly curved edge drawn from `seed`:
    /// α ∈ [-0.01, 0.01], β ∈ [-0.05, 0.05], γ ∈ [0.05, 0.30] m,
    /// trench depth ∈ [0.1, 0.3] m.
    pub fn random(seed: u64) -> Self {
        let mut r = rng::seeded(seed ^ 0x5ce7_e5ee_d000_0000);
        Self {
            edge_alpha: r.random_range(-0.01..=0.01),
            edge_beta: r.random_range(-0.05..=0.05),
            edge_gamma: r.random_range(0.05..=0.30),
            trench_depth: r.random_range(0.1..=0.3),
            albedo_left: r.random_range(50..=90),
            albedo_right: r.random_range(150..=200),
            max_range: 10.0,
        }
    }
}

/// Paraboloid soil mound, heights in meters above the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SoilPile {
    pub center_x: f64,
    pub center_z: f64,
    pub radius: f64,
    pub height: f64,
}

impl SoilPile {
    #[inline]
    fn surface(&self, x: f64, z: f64) -> f64 {
        let (dx, dz) = (x - self.center_x, z - self.center_z);
        let d2 = (dx * dx + dz * dz) / (self.radius * self.radius);
        if d2 >= 1.0 {
            f64::NEG_INFINITY
        } else {
            self.height * (1.0 - d2)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct CorruptionSpec {
    /// Range noise standard deviation per squared meter of range.
    pub noise_sigma_coeff: f64,
    pub dropout_blob_count: usize,
    /// Pixels.
    pub dropout_blob_radius: f64,
    pub occlusion_pile: Option<SoilPile>,
    pub rng_seed: u64,
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma_coeff >= 0.0 && self.dropout_blob_radius >= 0.0) {
            return Err(Error::InvalidParameter("corruption magnitudes must be nonnegative"));
        }
        if let Some(p) = self.occlusion_pile {
            if !(p.radius > 0.0 && p.height >= 0.0) {
                return Err(Error::InvalidParameter(
                    "pile radius must be positive and height nonnegative",
                ));
            }
        }
        Ok(())
    }

    /// Number of blobs of `radius` pixels whose random union covers about
    /// `fraction` of a `width x height` frame.
    pub fn blobs_for_coverage(fraction: f64, radius: f64, width: usize, height: usize) -> usize {
        if !(fraction > 0.0 && radius > 0.0) {
            return 0;
        }
        let area = core::f64::consts::PI * radius * radius;
        let n = -libm::log(1.0 - fraction.min(0.999)) * (width * height) as f64 / area;
        libm::ceil(n) as usize
    }
}

/// Rendered frame plus the analytic edge position per image row.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub depth: DepthMap,
    pub ground_truth: EdgeMask,
    pub rgb: RgbImage,
    /// Continuous column of the edge in each row where it is visible in range.
    pub edge_columns: Vec<Option<f64>>,
}

/// Continuous image column where the edge crosses row `v`, if the crossing is
/// on the ground, in frame, and within `max_range`.
pub fn edge_column_at_row(camera: &CameraModel, scene: &SceneSpec, v: f64) -> Option<f64> {
    let (_, z) = camera.pixel_to_ground(camera.cx, v).ok()?;
    let x = scene.edge_x(z);
    let range = math::sqrt(x * x + camera.mount_height * camera.mount_height + z * z);
    if range > scene.max_range {
        return None;
    }
    let (u, _) = camera.ground_to_pixel(x, z).ok()?;
    let w = camera.image_width as f64;
    (u >= -0.5 && u < w - 0.5).then_some(u)
}

#[derive(Clone, Copy, PartialEq)]
enum Surface {
    Ground,
    Floor,
    Wall,
    Pile,
}

/// First surface hit along the ray `origin + t·d`.
fn trace(camera: &CameraModel, scene: &SceneSpec, pile: Option<&SoilPile>, d: [f64; 3]) -> Option<(f64, Surface)> {
    if !(d[1] < -1e-12) {
        return None;
    }
    let h = camera.mount_height;
    let at = |t: f64| (t * d[0], h + t * d[1], t * d[2]);
    let t0 = h / -d[1];
    let (x0, _, z0) = at(t0);
    let terrain = if x0 <= scene.edge_x(z0) {
        (t0, Surface::Ground)
    } else {
        let t1 = (h + scene.trench_depth) / -d[1];
        let (x1, _, z1) = at(t1);
        if x1 > scene.edge_x(z1) {
            (t1, Surface::Floor)
        } else {
            // crossed the wall between the two planes
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (xm, _, zm) = at(mid);
                if xm > scene.edge_x(zm) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (hi, Surface::Wall)
        }
    };
    let Some(pile) = pile else { return Some(terrain) };
    if pile.height <= 0.0 {
        return Some(terrain);
    }
    let t_top = ((h - pile.height) / -d[1]).max(0.0);
    let norm = math::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    let dt = PILE_STEP / norm;
    let above = |t: f64| {
        let (x, y, z) = at(t);
        y > pile.surface(x, z)
    };
    let mut t = t_top;
    while t < terrain.0 {
        let next = (t + dt).min(terrain.0);
        if !above(next) {
            let (mut lo, mut hi) = (t, next);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if above(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some((hi, Surface::Pile));
        }
        t = next;
    }
    Some(terrain)
}

#[inline]
fn soil(albedo: u8, shade: f64) -> [u8; 3] {
    let a = f64::from(albedo) * shade;
    [
        math::round(a) as u8,
        math::round(a * 0.85) as u8,
        math::round(a * 0.7) as u8,
    ]
}

/// Renders depth, ground-truth mask and RGB for the scene, then applies the
/// corruption. Output is a pure function of the inputs.
pub fn render(camera: &CameraModel, scene: &SceneSpec, corruption: &CorruptionSpec) -> Result<RenderedScene> {
    camera.validate()?;
    scene.validate()?;
    corruption.validate()?;
    if !camera.sees_ground() {
        return Err(Error::DegenerateCamera);
    }
    let (w, h) = (camera.image_width, camera.image_height);
    let pile = corruption.occlusion_pile.as_ref();
    let mut depth = vec![INVALID_DEPTH; w * h];
    let mut rgb = vec![SKY; w * h];
    for v in 0..h {
        for u in 0..w {
            let d = camera.ray_direction(u as f64, v as f64);
            let Some((t, surface)) = trace(camera, scene, pile, d) else {
                continue;
            };
            let range = t * math::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            let i = v * w + u;
            if range <= scene.max_range {
                depth[i] = range as f32;
            }
            rgb[i] = match surface {
                Surface::Ground | Surface::Pile => soil(scene.albedo_left, 1.0),
                Surface::Floor => soil(scene.albedo_right, 1.0),
                Surface::Wall => soil(scene.albedo_right, 0.8),
            };
        }
    }

    let edge_columns: Vec<Option<f64>> = (0..h).map(|v| edge_column_at_row(camera, scene, v as f64)).collect();
    let mut truth = vec![false; w * h];
    for (v, col) in edge_columns.iter().enumerate() {
        if let Some(u) = col {
            let x = (math::round(*u) as usize).min(w - 1);
            truth[v * w + x] = true;
        }
    }

    if corruption.noise_sigma_coeff > 0.0 {
        for (i, px) in depth.iter_mut().enumerate() {
            if *px > INVALID_DEPTH {
                let r = f64::from(*px);
                let noisy = r + corruption.noise_sigma_coeff
                    * r
                    * r
                    * rng::hash_normal(corruption.rng_seed, NOISE_STREAM, i as u64);
                *px = (noisy.max(1e-3)) as f32;
            }
        }
    }
    if corruption.dropout_blob_count > 0 && corruption.dropout_blob_radius > 0.0 {
        let mut r = rng::seeded(corruption.rng_seed ^ DROPOUT_STREAM);
        let rad = corruption.dropout_blob_radius;
        for _ in 0..corruption.dropout_blob_count {
            let cx: f64 = r.random_range(0.0..w as f64);
            let cy: f64 = r.random_range(0.0..h as f64);
            let y_lo = (cy - rad).max(0.0) as usize;
            let y_hi = (libm::ceil(cy + rad) as usize).min(h - 1);
            let x_lo = (cx - rad).max(0.0) as usize;
            let x_hi = (libm::ceil(cx + rad) as usize).min(w - 1);
            for y in y_lo..=y_hi {
                for x in x_lo..=x_hi {
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    if dx * dx + dy * dy <= rad * rad {
                        depth[y * w + x] = INVALID_DEPTH;
                    }
                }
            }
        }
    }

    Ok(RenderedScene {
        depth: DepthMap::new(w, h, depth)?,
        ground_truth: EdgeMask::new(w, h, truth)?,
        rgb: RgbImage::new(w, h, rgb)?,
        edge_columns,
    })
}
