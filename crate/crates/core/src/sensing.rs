//! Precoder/combiner banks, noisy measurements `Y = Wᴴ Q F + N`, and the
//! vectorized compressed-sensing system `y_v = (M_t ⊗ M_r) q^a_v + n_v`.

use std::ops::Mul;

use nalgebra::{DMatrix, Scalar};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array_channel::{ArrayConfig, ChannelPair};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{complex_gaussian, max_abs, vec_col_major, CMatrix, CVector, IDENTITY_TOL};

/// Precoder bank `F` (`n_t x m_t`, columns `f_j`) and combiner bank `W`
/// (`n_r x m_r`, columns `w_i`). The pilot symbol is fixed to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingDesign {
    #[serde(rename = "F", with = "json::complex_matrix")]
    pub f: CMatrix,
    #[serde(rename = "W", with = "json::complex_matrix")]
    pub w: CMatrix,
}

impl SensingDesign {
    pub fn new(f: CMatrix, w: CMatrix) -> Result<Self> {
        if f.ncols() == 0 || w.ncols() == 0 || f.nrows() == 0 || w.nrows() == 0 {
            return Err(Error::InvalidConfig(
                "design banks must be non-empty".into(),
            ));
        }
        Ok(SensingDesign { f, w })
    }

    pub fn n_t(&self) -> usize {
        self.f.nrows()
    }

    pub fn n_r(&self) -> usize {
        self.w.nrows()
    }

    pub fn m_t(&self) -> usize {
        self.f.ncols()
    }

    pub fn m_r(&self) -> usize {
        self.w.ncols()
    }

    /// Total number of measurements `m_t * m_r`.
    pub fn m(&self) -> usize {
        self.m_t() * self.m_r()
    }

    /// `M_t = (Fᴴ U_t)*`, size `m_t x n_t`.
    pub fn m_t_matrix(&self, u_t: &CMatrix) -> CMatrix {
        (self.f.adjoint() * u_t).map(|z| z.conj())
    }

    /// `M_r = Wᴴ U_r`, size `m_r x n_r`.
    pub fn m_r_matrix(&self, u_r: &CMatrix) -> CMatrix {
        self.w.adjoint() * u_r
    }

    fn check_against(&self, config: &ArrayConfig) -> Result<()> {
        if self.n_t() != config.n_t || self.n_r() != config.n_r {
            return Err(Error::dims(
                "design antenna counts (n_t, n_r)",
                (config.n_t, config.n_r),
                (self.n_t(), self.n_r()),
            ));
        }
        Ok(())
    }
}

/// Complex Gaussian design: `F ~ CN(0, 1/m_t)`, `W ~ CN(0, 1/m_r)`, so columns of
/// `M_t ⊗ M_r` have unit expected norm. Deterministic in `seed` (ChaCha8; `F`
/// is drawn first, both column-major).
pub fn gaussian_design(
    n_t: usize,
    n_r: usize,
    m_t: usize,
    m_r: usize,
    seed: u64,
) -> Result<SensingDesign> {
    if n_t == 0 || n_r == 0 || m_t == 0 || m_r == 0 {
        return Err(Error::InvalidConfig(
            "gaussian design dimensions must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = complex_gaussian(&mut rng, n_t, m_t, 1.0 / m_t as f64);
    let w = complex_gaussian(&mut rng, n_r, m_r, 1.0 / m_r as f64);
    SensingDesign::new(f, w)
}

/// Post-combining measurement noise: i.i.d. circular complex Gaussian entries
/// with `E|n|^2 = sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec {
            sigma: 0.0,
            seed: 0,
        }
    }

    /// The `rows x cols` noise realization. Depends only on `(seed, shape)`.
    pub fn realize(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::OutOfRange {
                name: "sigma",
                value: self.sigma,
                reason: "noise std must be finite and >= 0",
            });
        }
        if self.sigma == 0.0 {
            return Ok(CMatrix::zeros(rows, cols));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(complex_gaussian(
            &mut rng,
            rows,
            cols,
            self.sigma * self.sigma,
        ))
    }
}

/// `Y = Wᴴ Q F + N`, an `m_r x m_t` matrix.
pub fn measure(q: &CMatrix, design: &SensingDesign, noise: &NoiseSpec) -> Result<CMatrix> {
    if q.shape() != (design.n_r(), design.n_t()) {
        return Err(Error::dims(
            "channel vs design",
            (design.n_r(), design.n_t()),
            q.shape(),
        ));
    }
    let n = noise.realize(design.m_r(), design.m_t())?;
    Ok(design.w.adjoint() * q * &design.f + n)
}

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: Scalar + Copy + Zero + Mul<Output = T>,
{
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::from_element(ra * rb, ca * cb, T::zero());
    for ja in 0..ca {
        for ia in 0..ra {
            let s = a[(ia, ja)];
            for jb in 0..cb {
                for ib in 0..rb {
                    out[(ia * rb + ib, ja * cb + jb)] = s * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Permutation matrices `(P_ρ, P_c)` with `B ⊗ A = P_ρ (A ⊗ B) P_c` for
/// `A: m_a x n_a`, `B: m_b x n_b`.
pub fn commutation_permutations<T>(
    a_shape: (usize, usize),
    b_shape: (usize, usize),
) -> (DMatrix<T>, DMatrix<T>)
where
    T: Scalar + Zero + One,
{
    let (ma, na) = a_shape;
    let (mb, nb) = b_shape;
    let mut p_rho = DMatrix::from_element(ma * mb, ma * mb, T::zero());
    for ia in 0..ma {
        for ib in 0..mb {
            // row ia*mb+ib of A⊗B becomes row ib*ma+ia of B⊗A
            p_rho[(ib * ma + ia, ia * mb + ib)] = T::one();
        }
    }
    let mut p_c = DMatrix::from_element(na * nb, na * nb, T::zero());
    for ja in 0..na {
        for jb in 0..nb {
            p_c[(ja * nb + jb, jb * na + ja)] = T::one();
        }
    }
    (p_rho, p_c)
}

/// The vectorized system for one channel, design and noise draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizedSystem {
    #[serde(rename = "M_t", with = "json::complex_matrix")]
    pub m_t: CMatrix,
    #[serde(rename = "M_r", with = "json::complex_matrix")]
    pub m_r: CMatrix,
    #[serde(rename = "G_v", with = "json::complex_matrix")]
    pub g_v: CMatrix,
    #[serde(with = "json::complex_vector")]
    pub y_v: CVector,
    #[serde(with = "json::complex_vector")]
    pub n_v: CVector,
}

/// Builds `M_t`, `M_r`, `G_v = M_t ⊗ M_r`, `y_v = vec(Y)` and `n_v = vec(N)`,
/// then checks `y_v - n_v = G_v q^a_v` against the independently measured `Y`.
pub fn vectorize_system(
    pair: &ChannelPair,
    design: &SensingDesign,
    config: &ArrayConfig,
    noise: &NoiseSpec,
) -> Result<VectorizedSystem> {
    config.validate()?;
    design.check_against(config)?;
    if pair.q.shape() != (config.n_r, config.n_t) {
        return Err(Error::dims(
            "channel",
            (config.n_r, config.n_t),
            pair.q.shape(),
        ));
    }
    let m_t = design.m_t_matrix(&config.u_t());
    let m_r = design.m_r_matrix(&config.u_r());
    let g_v = kron(&m_t, &m_r);

    let y = measure(&pair.q, design, noise)?;
    let n = noise.realize(design.m_r(), design.m_t())?;
    let y_v = vec_col_major(&y);
    let n_v = vec_col_major(&n);

    let predicted = &g_v * &pair.q_angular_vec;
    let defect = (&y_v - &n_v - &predicted)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let scale = max_abs(&y).max(1.0);
    if defect > IDENTITY_TOL * scale {
        return Err(Error::ConsistencyCheckFailed(format!(
            "vec(Wᴴ Q F) differs from G_v q^a_v by {defect:e}"
        )));
    }
    Ok(VectorizedSystem {
        m_t,
        m_r,
        g_v,
        y_v,
        n_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_channel::{synthesize_channel, GridMode, PathSet};
    use crate::linalg::{c, max_abs_diff, unitarity_defect};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::Rng;

    fn naive_entry(
        q: &CMatrix,
        w: &CMatrix,
        f: &CMatrix,
        i: usize,
        j: usize,
    ) -> num_complex::Complex64 {
        let mut acc = c(0.0, 0.0);
        for a in 0..q.nrows() {
            for b in 0..q.ncols() {
                acc += w[(a, i)].conj() * q[(a, b)] * f[(b, j)];
            }
        }
        acc
    }

    #[test]
    fn zero_channel_noiseless_is_zero() {
        let d = gaussian_design(3, 4, 2, 2, 1).unwrap();
        let y = measure(&CMatrix::zeros(4, 3), &d, &NoiseSpec::noiseless()).unwrap();
        assert_eq!(y.shape(), (2, 2));
        assert_eq!(max_abs(&y), 0.0);
    }

    #[test]
    fn scalar_link_passes_channel_through() {
        let one = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let d = SensingDesign::new(one.clone(), one).unwrap();
        let q = CMatrix::from_element(1, 1, c(0.3, -2.0));
        let y = measure(&q, &d, &NoiseSpec::noiseless()).unwrap();
        assert_eq!(y[(0, 0)], c(0.3, -2.0));
    }

    #[test]
    fn measurement_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = complex_gaussian(&mut rng, 4, 4, 1.0);
        let d = gaussian_design(4, 4, 3, 2, 5).unwrap();
        let y = measure(&q, &d, &NoiseSpec::noiseless()).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((y[(i, j)] - naive_entry(&q, &d.w, &d.f, i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn measure_rejects_bad_shapes() {
        let d = gaussian_design(3, 4, 2, 2, 1).unwrap();
        assert!(matches!(
            measure(&CMatrix::zeros(3, 4), &d, &NoiseSpec::noiseless()),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = NoiseSpec {
            sigma: -1.0,
            seed: 0,
        };
        assert!(measure(&CMatrix::zeros(4, 3), &d, &bad).is_err());
    }

    #[test]
    fn noise_is_reproducible_and_scaled() {
        let spec = NoiseSpec {
            sigma: 0.5,
            seed: 77,
        };
        let a = spec.realize(40, 50).unwrap();
        assert_eq!(a, spec.realize(40, 50).unwrap());
        let power = a.iter().map(|z| z.norm_sqr()).sum::<f64>() / a.len() as f64;
        assert!((power - 0.25).abs() < 0.03, "power {power}");
        assert_ne!(
            a,
            NoiseSpec {
                sigma: 0.5,
                seed: 78
            }
            .realize(40, 50)
            .unwrap()
        );
    }

    #[test]
    fn kron_small_cases() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let b = DMatrix::from_row_slice(2, 1, &[3.0, 4.0]);
        assert_eq!(
            kron(&a, &b),
            DMatrix::from_row_slice(2, 2, &[3.0, 6.0, 4.0, 8.0])
        );
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = complex_gaussian(&mut rng, 3, 3, 1.0);
            let b = complex_gaussian(&mut rng, 3, 3, 1.0);
            let x = complex_gaussian(&mut rng, 3, 1, 1.0);
            let y = complex_gaussian(&mut rng, 3, 1, 1.0);
            let lhs = kron(&a, &b) * kron(&x, &y);
            let rhs = kron(&(&a * &x), &(&b * &y));
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn commutation_permutations_swap_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (ma, na, mb, nb) = (
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(1..5),
            );
            let a = complex_gaussian(&mut rng, ma, na, 1.0);
            let b = complex_gaussian(&mut rng, mb, nb, 1.0);
            let (p_rho, p_c) =
                commutation_permutations::<num_complex::Complex64>(a.shape(), b.shape());
            let swapped = &p_rho * kron(&a, &b) * &p_c;
            // exact: permutation products only move entries
            assert_eq!(swapped, kron(&b, &a));
            for p in [&p_rho, &p_c] {
                for r in 0..p.nrows() {
                    assert_eq!(p.row(r).iter().filter(|z| z.re == 1.0).count(), 1);
                }
            }
        }
    }

    #[test]
    fn unitary_design_reshuffles_angular_channel() {
        let cfg = ArrayConfig::half_wavelength(2, 2).unwrap();
        let d = SensingDesign::new(cfg.u_t(), cfg.u_r()).unwrap();
        let set = PathSet::random_on_grid(cfg, 2, 1.0, 4).unwrap();
        let pair = synthesize_channel(&set, GridMode::Strict).unwrap();
        let sys = vectorize_system(&pair, &d, &cfg, &NoiseSpec::noiseless()).unwrap();
        assert!(unitarity_defect(&sys.m_t) < 1e-12);
        assert!(unitarity_defect(&sys.m_r) < 1e-12);
        // F = U_t, W = U_r gives M_t = I* = I and M_r = I, so y_v = q^a_v
        for (y, q) in sys.y_v.iter().zip(pair.q_angular_vec.iter()) {
            assert!((y - q).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_channel_measures_only_noise() {
        let cfg = ArrayConfig::half_wavelength(3, 2).unwrap();
        let pair = ChannelPair::from_dense(CMatrix::zeros(2, 3), &cfg).unwrap();
        let d = gaussian_design(3, 2, 2, 2, 3).unwrap();
        let noise = NoiseSpec {
            sigma: 0.1,
            seed: 12,
        };
        let sys = vectorize_system(&pair, &d, &cfg, &noise).unwrap();
        assert_eq!(sys.y_v, sys.n_v);
        assert!(sys.n_v.norm() > 0.0);
    }

    #[test]
    fn vectorize_checks_dimensions() {
        let cfg = ArrayConfig::half_wavelength(3, 2).unwrap();
        let pair = ChannelPair::from_dense(CMatrix::zeros(2, 3), &cfg).unwrap();
        let d = gaussian_design(2, 3, 2, 2, 3).unwrap();
        assert!(matches!(
            vectorize_system(&pair, &d, &cfg, &NoiseSpec::noiseless()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_design_determinism_and_rank() {
        let a = gaussian_design(5, 4, 5, 3, 42).unwrap();
        assert_eq!(a, gaussian_design(5, 4, 5, 3, 42).unwrap());
        assert_ne!(a, gaussian_design(5, 4, 5, 3, 43).unwrap());
        let s = a.f.singular_values();
        assert!(s.min() > 1e-8 * s.max(), "square F should be full rank");
        assert!(gaussian_design(0, 1, 1, 1, 0).is_err());
    }

    #[test]
    fn gaussian_design_entries_center_on_zero() {
        // 10^4 draws from the F bank of a 100x100 design
        let d = gaussian_design(100, 1, 100, 1, 7).unwrap();
        let mean = d.f.iter().sum::<num_complex::Complex64>() / d.f.len() as f64;
        let scaled = mean * (d.m_t() as f64).sqrt();
        assert!(scaled.norm() < 0.05, "scaled mean {scaled}");
    }

    #[test]
    fn unitary_kron_unitary() {
        for nt in 1..=8 {
            for nr in 1..=8 {
                let u = kron(&dft_t(nt).transpose(), &dft_t(nr).adjoint());
                assert!(unitarity_defect(&u) < 1e-10);
            }
        }
    }

    fn dft_t(n: usize) -> CMatrix {
        crate::array_channel::dft_basis(n, 0.5)
    }

    proptest! {
        #[test]
        fn vectorization_identity(
            nt in 1usize..=6, nr in 1usize..=6, mt in 1usize..=6, mr in 1usize..=6, seed in any::<u64>()
        ) {
            let cfg = ArrayConfig::half_wavelength(nt, nr).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = complex_gaussian(&mut rng, nr, nt, 1.0);
            let pair = ChannelPair::from_dense(q.clone(), &cfg).unwrap();
            let d = gaussian_design(nt, nr, mt, mr, seed ^ 0xabc).unwrap();
            let sys = vectorize_system(&pair, &d, &cfg, &NoiseSpec::noiseless()).unwrap();
            let direct = vec_col_major(&(d.w.adjoint() * &q * &d.f));
            let via_kron: DVector<_> = &sys.g_v * &pair.q_angular_vec;
            let diff = (&direct - &via_kron).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-10);
            prop_assert_eq!(sys.g_v.shape(), (mt * mr, nt * nr));
        }
    }
}
