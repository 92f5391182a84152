//! Small-scale sparse recovery: an exhaustive `ℓ0` search that acts as the
//! uniqueness oracle, orthogonal matching pursuit as the greedy baseline, and
//! a synthesize → measure → recover loop.

use serde::{Deserialize, Serialize};

use crate::array_channel::{synthesize_channel, GridMode, PathSet};
use crate::enumeration::{count_subsets, map_reduce, Budget};
use crate::error::{Error, Result};
use crate::linalg::{select_columns, CMatrix, CVector};
use crate::sensing::{vectorize_system, NoiseSpec, SensingDesign};

/// Relative singular-value cutoff for the per-support least squares.
pub const LS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    L0Exhaustive,
    Omp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    #[serde(with = "crate::json::complex_vector")]
    pub estimate: CVector,
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// Set only when a ground truth was supplied.
    pub exact: Option<bool>,
    pub algorithm: Algorithm,
}

impl RecoveryResult {
    /// Marks the result exact when the support matches and every coefficient
    /// is within `tol · max(1, ‖truth‖_∞)`.
    pub fn compare(mut self, truth: &CVector, tol: f64) -> Self {
        let scale = truth.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let same_support = self.support == support_of(truth, tol);
        let close = self.estimate.len() == truth.len()
            && (&self.estimate - truth)
                .iter()
                .all(|z| z.norm() <= tol * scale);
        self.exact = Some(same_support && close);
        self
    }
}

/// Indices whose magnitude exceeds `tol · max_i |x_i|`.
pub fn support_of(x: &CVector, tol: f64) -> Vec<usize> {
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Vec::new();
    }
    (0..x.len()).filter(|&i| x[i].norm() > tol * peak).collect()
}

fn check_dims(g: &CMatrix, y: &CVector) -> Result<()> {
    if y.len() != g.nrows() {
        return Err(Error::dims(
            "measurement vector",
            (g.nrows(), 1),
            (y.len(), 1),
        ));
    }
    Ok(())
}

/// Least squares restricted to `support`; returns the coefficients and the residual norm.
fn restricted_ls(g: &CMatrix, y: &CVector, support: &[usize]) -> (CVector, f64) {
    if support.is_empty() {
        return (CVector::zeros(0), y.norm());
    }
    let a = select_columns(g, support);
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let x = if top == 0.0 {
        CVector::zeros(support.len())
    } else {
        svd.solve(y, LS_TOL * top).expect("u and v were computed")
    };
    let r = (y - &a * &x).norm();
    (x, r)
}

fn scatter(n: usize, support: &[usize], coeffs: &CVector) -> CVector {
    let mut x = CVector::zeros(n);
    for (&j, &c) in support.iter().zip(coeffs.iter()) {
        x[j] = c;
    }
    x
}

#[derive(Clone)]
struct Candidate {
    residual: f64,
    support: Vec<usize>,
    coeffs: CVector,
}

struct Scan {
    best: Candidate,
    /// First two exact fits in lexicographic order.
    fits: Vec<Candidate>,
}

/// Exhaustive search over supports of increasing size `<= k`.
///
/// Stops at the smallest size admitting an exact fit (residual within
/// `1e-9 · max(1, ‖y‖)`). Two different exact fits of that size mean the
/// planted vector is not identifiable, i.e. `spark(G) <= 2k`, and raise
/// [`Error::AmbiguousSolution`]. When no support fits exactly (noisy data),
/// the minimum-residual support of size `min(k, n)` is returned.
pub fn l0_exhaustive(
    g: &CMatrix,
    y: &CVector,
    k: usize,
    budget: &Budget,
) -> Result<RecoveryResult> {
    check_dims(g, y)?;
    let n = g.ncols();
    let k = k.min(n);
    budget.check(count_subsets(n, 0..=k))?;
    let fit_tol = 1e-9 * y.norm().max(1.0);

    let zero = |residual| RecoveryResult {
        estimate: CVector::zeros(n),
        support: Vec::new(),
        residual_norm: residual,
        exact: None,
        algorithm: Algorithm::L0Exhaustive,
    };
    if y.norm() <= fit_tol || k == 0 {
        return Ok(zero(y.norm()));
    }

    let mut last = None;
    for size in 1..=k {
        let scan = map_reduce(
            n,
            size,
            |s| {
                let (coeffs, residual) = restricted_ls(g, y, s);
                let cand = Candidate {
                    residual,
                    support: s.to_vec(),
                    coeffs,
                };
                let fits = if residual <= fit_tol {
                    vec![cand.clone()]
                } else {
                    Vec::new()
                };
                Scan { best: cand, fits }
            },
            |a, b| {
                let best = if b.best.residual < a.best.residual {
                    b.best
                } else {
                    a.best
                };
                let mut fits = a.fits;
                fits.extend(b.fits);
                fits.truncate(2);
                Scan { best, fits }
            },
        )
        .expect("size <= n gives at least one support");

        match scan.fits.len() {
            0 => last = Some(scan.best),
            1 => {
                let c = &scan.fits[0];
                return Ok(RecoveryResult {
                    estimate: scatter(n, &c.support, &c.coeffs),
                    support: c.support.clone(),
                    residual_norm: c.residual,
                    exact: None,
                    algorithm: Algorithm::L0Exhaustive,
                });
            }
            _ => {
                return Err(Error::AmbiguousSolution {
                    first: scan.fits[0].support.clone(),
                    second: scan.fits[1].support.clone(),
                })
            }
        }
    }
    let c = last.expect("k >= 1");
    Ok(RecoveryResult {
        estimate: scatter(n, &c.support, &c.coeffs),
        support: c.support,
        residual_norm: c.residual,
        exact: None,
        algorithm: Algorithm::L0Exhaustive,
    })
}

/// Orthogonal matching pursuit with at most `k` atoms.
///
/// Atoms are chosen by largest normalized correlation `|g_jᴴ r| / ‖g_j‖`, ties to
/// the lowest index. Stops early once `‖r‖ <= tol`.
pub fn omp(g: &CMatrix, y: &CVector, k: usize, tol: f64) -> Result<RecoveryResult> {
    check_dims(g, y)?;
    let (m, n) = g.shape();
    if k > m.min(n) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            reason: "OMP needs k <= min(rows, cols)",
        });
    }
    let norms: Vec<f64> = g.column_iter().map(|c| c.norm()).collect();
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut coeffs = CVector::zeros(0);
    let mut residual = y.clone();

    while support.len() < k && residual.norm() > tol {
        let mut pick: Option<(usize, f64)> = None;
        for (j, &nj) in norms.iter().enumerate() {
            if nj == 0.0 || support.contains(&j) {
                continue;
            }
            let corr = g.column(j).dotc(&residual).norm() / nj;
            if pick.is_none_or(|(_, best)| corr > best) {
                pick = Some((j, corr));
            }
        }
        let Some((j, corr)) = pick else { break };
        if corr == 0.0 {
            break;
        }
        support.push(j);
        support.sort_unstable();
        let (x, _) = restricted_ls(g, y, &support);
        residual = y - select_columns(g, &support) * &x;
        coeffs = x;
    }

    Ok(RecoveryResult {
        estimate: scatter(n, &support, &coeffs),
        residual_norm: residual.norm(),
        support,
        exact: None,
        algorithm: Algorithm::Omp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndReport {
    /// `‖q̂ − q‖² / ‖q‖²`, with `0/0 = 0`.
    pub nmse: f64,
    pub support_match: bool,
    pub true_support: Vec<usize>,
    pub recovery: RecoveryResult,
}

/// `‖est − truth‖² / ‖truth‖²`; the zero channel recovered as zero gives 0.
pub fn nmse(estimate: &CVector, truth: &CVector) -> f64 {
    let err = (estimate - truth).norm_squared();
    let energy = truth.norm_squared();
    if energy == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / energy
    }
}

/// Tolerance used to decide support membership and exactness end to end.
pub const SUPPORT_TOL: f64 = 1e-9;

pub fn end_to_end(
    paths: &PathSet,
    mode: GridMode,
    design: &SensingDesign,
    noise: &NoiseSpec,
    algorithm: Algorithm,
    budget: &Budget,
) -> Result<EndToEndReport> {
    let pair = synthesize_channel(paths, mode)?;
    let sys = vectorize_system(&pair, design, &paths.config, noise)?;
    let k = paths.k();
    let result = match algorithm {
        Algorithm::L0Exhaustive => l0_exhaustive(&sys.g_v, &sys.y_v, k, budget)?,
        Algorithm::Omp => {
            let k = k.min(sys.g_v.nrows()).min(sys.g_v.ncols());
            omp(&sys.g_v, &sys.y_v, k, 1e-9 * sys.y_v.norm().max(1.0))?
        }
    };
    let truth = &pair.q_angular_vec;
    let true_support = support_of(truth, SUPPORT_TOL);
    let result = result.compare(truth, SUPPORT_TOL.sqrt());
    Ok(EndToEndReport {
        nmse: nmse(&result.estimate, truth),
        support_match: result.support == true_support,
        true_support,
        recovery: result,
    })
}
