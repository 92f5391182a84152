//! Uniform linear arrays, spatial signatures, DFT sparsifying bases and
//! synthesis of k-path channels in both dense and angular form.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{complex_normal, vec_col_major, CMatrix, CVector};

/// Antenna geometry at both ends of the link. Spacings are normalized by the
/// carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    /// Carrier wavelength in meters.
    pub lambda_c: f64,
}

impl ArrayConfig {
    pub fn new(n_t: usize, n_r: usize, delta_t: f64, delta_r: f64, lambda_c: f64) -> Result<Self> {
        let cfg = ArrayConfig {
            n_t,
            n_r,
            delta_t,
            delta_r,
            lambda_c,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Half-wavelength arrays at a 1 cm carrier.
    pub fn half_wavelength(n_t: usize, n_r: usize) -> Result<Self> {
        Self::new(n_t, n_r, 0.5, 0.5, 0.01)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::InvalidConfig(
                "antenna counts must be positive".into(),
            ));
        }
        for (name, v) in [
            ("delta_t", self.delta_t),
            ("delta_r", self.delta_r),
            ("lambda_c", self.lambda_c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Normalized transmit array length `n_t * delta_t`.
    pub fn l_t(&self) -> f64 {
        self.n_t as f64 * self.delta_t
    }

    pub fn l_r(&self) -> f64 {
        self.n_r as f64 * self.delta_r
    }

    pub fn u_t(&self) -> CMatrix {
        dft_basis(self.n_t, self.delta_t)
    }

    pub fn u_r(&self) -> CMatrix {
        dft_basis(self.n_r, self.delta_r)
    }
}

/// Unit-norm steering vector: entry `l` is `exp(-j 2π l Δ Ω) / √n`.
pub fn spatial_signature(n: usize, delta: f64, omega: f64) -> CVector {
    let scale = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |l, _| {
        Complex64::from_polar(scale, -2.0 * PI * l as f64 * delta * omega)
    })
}

/// DFT basis whose column `p` is the spatial signature at `Ω = p / L`, `L = nΔ`.
///
/// The spacing cancels (`Δ·p/L = p/n`), so the phase is computed from the
/// integer product `l·p mod n` to keep it exact for large `n`.
pub fn dft_basis(n: usize, _delta: f64) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |l, p| {
        let turns = ((l * p) % n) as f64 / n as f64;
        Complex64::from_polar(scale, -2.0 * PI * turns)
    })
}

/// Angular cosine of a physical angle in radians.
pub fn angle_to_cosine(radians: f64) -> f64 {
    radians.cos()
}

/// Position on the angular grid: `Ω = (index + offset) / L`.
///
/// `offset == 0` is an on-grid angle; anything else leaves the exact-sparsity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAngle {
    pub index: usize,
    #[serde(default)]
    pub offset: f64,
}

impl GridAngle {
    pub fn on_grid(index: usize) -> Self {
        GridAngle { index, offset: 0.0 }
    }

    pub fn off_grid(index: usize, offset: f64) -> Self {
        GridAngle { index, offset }
    }

    /// Snaps an angular cosine onto the grid of an `n`-element array with spacing `delta`.
    /// The phase `ΔΩ` is periodic with period 1, so the grid coordinate wraps mod `n`.
    pub fn from_cosine(omega: f64, n: usize, delta: f64) -> Self {
        let x = (omega * n as f64 * delta).rem_euclid(n as f64);
        let index = (x.floor() as usize).min(n - 1);
        GridAngle {
            index,
            offset: x - index as f64,
        }
    }

    pub fn omega(&self, length: f64) -> f64 {
        (self.index as f64 + self.offset) / length
    }

    pub fn is_on_grid(&self) -> bool {
        self.offset == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Complex path gain (dimensionless).
    pub alpha: Complex64,
    pub angle_t: GridAngle,
    pub angle_r: GridAngle,
    /// Path length in meters.
    pub rho: f64,
}

impl Path {
    /// `α·√(n_t n_r)·exp(-j 2π ρ / λ_c)`.
    pub fn baseband_gain(&self, config: &ArrayConfig) -> Complex64 {
        let amplitude = ((config.n_t * config.n_r) as f64).sqrt();
        let phase = -2.0 * PI * self.rho / config.lambda_c;
        self.alpha * amplitude * Complex64::from_polar(1.0, phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub config: ArrayConfig,
    pub paths: Vec<Path>,
    /// Path loss μ.
    pub path_loss_mu: f64,
}

impl PathSet {
    pub fn new(config: ArrayConfig, paths: Vec<Path>, path_loss_mu: f64) -> Result<Self> {
        let set = PathSet {
            config,
            paths,
            path_loss_mu,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn k(&self) -> usize {
        self.paths.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let cfg = &self.config;
        if self.k() > cfg.n_t.min(cfg.n_r) {
            return Err(Error::InvalidConfig(format!(
                "k = {} exceeds min(n_t, n_r) = {}",
                self.k(),
                cfg.n_t.min(cfg.n_r)
            )));
        }
        if !(self.path_loss_mu.is_finite() && self.path_loss_mu > 0.0) {
            return Err(Error::InvalidConfig("path loss must be positive".into()));
        }
        for (i, p) in self.paths.iter().enumerate() {
            if !(p.alpha.re.is_finite() && p.alpha.im.is_finite()) {
                return Err(Error::InvalidConfig(format!("path {i}: gain not finite")));
            }
            if !(p.rho.is_finite() && p.rho >= 0.0) {
                return Err(Error::InvalidConfig(format!("path {i}: rho must be >= 0")));
            }
            for (angle, n) in [(p.angle_t, cfg.n_t), (p.angle_r, cfg.n_r)] {
                if angle.index >= n || !(0.0..1.0).contains(&angle.offset) {
                    return Err(Error::InvalidConfig(format!(
                        "path {i}: grid angle {angle:?} outside [0, {n})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether `n_t, n_r >= k^(1+ε)`. Reported, never enforced.
    pub fn in_sparsity_regime(&self, epsilon: f64) -> bool {
        let need = (self.k() as f64).powf(1.0 + epsilon);
        self.config.n_t as f64 >= need && self.config.n_r as f64 >= need
    }

    /// `k` paths on distinct grid cells with CN(0,1) gains and path lengths
    /// uniform in `[0, 100 λ_c)`.
    pub fn random_on_grid(
        config: ArrayConfig,
        k: usize,
        path_loss_mu: f64,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if k > config.n_t.min(config.n_r) {
            return Err(Error::InvalidConfig(format!(
                "k = {k} exceeds min(n_t, n_r)"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = HashSet::new();
        let mut paths = Vec::with_capacity(k);
        while paths.len() < k {
            let g_t = rng.random_range(0..config.n_t);
            let g_r = rng.random_range(0..config.n_r);
            if !used.insert((g_r, g_t)) {
                continue;
            }
            paths.push(Path {
                alpha: complex_normal(&mut rng, 1.0),
                angle_t: GridAngle::on_grid(g_t),
                angle_r: GridAngle::on_grid(g_r),
                rho: rng.random_range(0.0..100.0) * config.lambda_c,
            });
        }
        PathSet::new(config, paths, path_loss_mu)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Every path must sit on a distinct grid cell, so the angular channel is exactly k-sparse.
    #[default]
    Strict,
    OffGrid,
}

/// Dense channel `Q` with its angular form `Q^a = U_rᴴ Q U_t` and the
/// column-stacked `vec(Q^a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    #[serde(with = "json::complex_matrix")]
    pub q: CMatrix,
    #[serde(with = "json::complex_matrix")]
    pub q_angular: CMatrix,
    #[serde(with = "json::complex_vector")]
    pub q_angular_vec: CVector,
}

impl ChannelPair {
    pub fn from_dense(q: CMatrix, config: &ArrayConfig) -> Result<Self> {
        let q_angular = angular_transform(&q, config)?;
        let q_angular_vec = vec_col_major(&q_angular);
        Ok(ChannelPair {
            q,
            q_angular,
            q_angular_vec,
        })
    }
}

pub fn synthesize_channel(path_set: &PathSet, mode: GridMode) -> Result<ChannelPair> {
    path_set.validate()?;
    let cfg = &path_set.config;
    if mode == GridMode::Strict {
        let mut cells = HashSet::new();
        for (index, p) in path_set.paths.iter().enumerate() {
            if !(p.angle_t.is_on_grid() && p.angle_r.is_on_grid()) {
                return Err(Error::OffGridPath { index });
            }
            if !cells.insert((p.angle_r.index, p.angle_t.index)) {
                return Err(Error::DuplicateGridPoint {
                    g_r: p.angle_r.index,
                    g_t: p.angle_t.index,
                });
            }
        }
    }

    let mut q = CMatrix::zeros(cfg.n_r, cfg.n_t);
    for p in &path_set.paths {
        let gain = p.baseband_gain(cfg) / path_set.path_loss_mu;
        let e_r = spatial_signature(cfg.n_r, cfg.delta_r, p.angle_r.omega(cfg.l_r()));
        let e_t = spatial_signature(cfg.n_t, cfg.delta_t, p.angle_t.omega(cfg.l_t()));
        q += (e_r * e_t.adjoint()) * gain;
    }
    ChannelPair::from_dense(q, cfg)
}

/// `U_rᴴ q U_t`.
pub fn angular_transform(q: &CMatrix, config: &ArrayConfig) -> Result<CMatrix> {
    check_channel_shape(q, config)?;
    Ok(config.u_r().adjoint() * q * config.u_t())
}

/// `U_r q_a U_tᴴ`, the inverse of [`angular_transform`].
pub fn inverse_angular_transform(q_angular: &CMatrix, config: &ArrayConfig) -> Result<CMatrix> {
    check_channel_shape(q_angular, config)?;
    Ok(config.u_r() * q_angular * config.u_t().adjoint())
}

fn check_channel_shape(q: &CMatrix, config: &ArrayConfig) -> Result<()> {
    if q.shape() != (config.n_r, config.n_t) {
        return Err(Error::dims("channel", (config.n_r, config.n_t), q.shape()));
    }
    Ok(())
}
