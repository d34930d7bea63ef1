//! Seeded synthetic point clouds.
//!
//! | kind               | dim | latent `(u, v)`              | point                                   |
//! |--------------------|-----|------------------------------|-----------------------------------------|
//! | `random2d`         | 2   | uniform on `[0, 1]^2`        | `(u, v)`                                |
//! | `swiss_roll`       | 3   | `t in [3pi/2, 9pi/2]`, `h in [0, 21]` | `(t cos t, h, t sin t)`        |
//! | `punctured_sphere` | 3   | `z in [-1, 0.8]`, `phi in [0, 2pi)` | unit sphere without the cap `z > 0.8` |
//! | `gaussian`         | 3   | first two coordinates        | isotropic standard normal               |
//! | `corner_planes`    | 3   | `u in [-1, 1]`, `v in [0, 1]`| `(u, v, 0)` for `u <= 0`, else folded by 45 degrees |
//! | `twin_peaks`       | 3   | uniform on `[-1, 1]^2`       | `(u, v, sin(pi u) tanh(3 v))`           |
//!
//! Optional isotropic Gaussian noise of standard deviation `noise` is added
//! after the latent map.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::similarity::PointSet;

/// Upper edge of the punctured sphere.
pub const SPHERE_CAP_Z: f64 = 0.8;
/// Dihedral fold angle of the corner planes.
pub const CORNER_ANGLE: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DatasetKind {
    Random2d,
    SwissRoll,
    PuncturedSphere,
    Gaussian,
    CornerPlanes,
    TwinPeaks,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 6] = [
        DatasetKind::Random2d,
        DatasetKind::SwissRoll,
        DatasetKind::PuncturedSphere,
        DatasetKind::Gaussian,
        DatasetKind::CornerPlanes,
        DatasetKind::TwinPeaks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Random2d => "random2d",
            DatasetKind::SwissRoll => "swiss_roll",
            DatasetKind::PuncturedSphere => "punctured_sphere",
            DatasetKind::Gaussian => "gaussian",
            DatasetKind::CornerPlanes => "corner_planes",
            DatasetKind::TwinPeaks => "twin_peaks",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            DatasetKind::Random2d => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = |c: char| if c == '-' { '_' } else { c.to_ascii_lowercase() };
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.name().chars().eq(s.chars().map(norm)))
            .ok_or(Error::UnknownKind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: DatasetKind,
    pub n: usize,
    pub seed: u64,
    pub noise: f64,
}

impl GenSpec {
    pub fn new(kind: DatasetKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            noise: 0.0,
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<PointSet> {
    generate_with_latents(spec).map(|(points, _)| points)
}

/// Generates the points together with the latent coordinates they were
/// mapped from (see the module table).
pub fn generate_with_latents(spec: &GenSpec) -> Result<(PointSet, Vec<[f64; 2]>)> {
    if spec.n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(invalid("noise", "must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.kind.dim();
    let mut coords = Vec::with_capacity(spec.n * dim);
    let mut latents = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (latent, p) = sample(spec.kind, &mut rng);
        latents.push(latent);
        coords.extend_from_slice(&p[..dim]);
    }
    if spec.noise > 0.0 {
        for c in coords.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c += spec.noise * z;
        }
    }
    Ok((PointSet::from_flat(dim, coords)?, latents))
}

fn sample(kind: DatasetKind, rng: &mut ChaCha8Rng) -> ([f64; 2], [f64; 3]) {
    match kind {
        DatasetKind::Random2d => {
            let (u, v) = (rng.random::<f64>(), rng.random::<f64>());
            ([u, v], [u, v, 0.0])
        }
        DatasetKind::SwissRoll => {
            let t = rng.random_range(1.5 * PI..=4.5 * PI);
            let h = rng.random_range(0.0..=21.0);
            ([t, h], [t * libm::cos(t), h, t * libm::sin(t)])
        }
        DatasetKind::PuncturedSphere => {
            // Uniform z gives uniform area on the sphere.
            let z = rng.random_range(-1.0..=SPHERE_CAP_Z);
            let phi = rng.random_range(0.0..2.0 * PI);
            let r = libm::sqrt(1.0 - z * z);
            ([z, phi], [r * libm::cos(phi), r * libm::sin(phi), z])
        }
        DatasetKind::Gaussian => {
            let p: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            ([p[0], p[1]], p)
        }
        DatasetKind::CornerPlanes => {
            let u = rng.random_range(-1.0..=1.0);
            let v = rng.random_range(0.0..=1.0);
            let p = if u <= 0.0 {
                [u, v, 0.0]
            } else {
                [u * libm::cos(CORNER_ANGLE), v, u * libm::sin(CORNER_ANGLE)]
            };
            ([u, v], p)
        }
        DatasetKind::TwinPeaks => {
            let u = rng.random_range(-1.0..=1.0);
            let v = rng.random_range(-1.0..=1.0);
            ([u, v], [u, v, libm::sin(PI * u) * libm::tanh(3.0 * v)])
        }
    }
}
