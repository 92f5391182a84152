//! Exhaustive spark and restricted-isometry oracles, and numerical checks of
//! the structural facts about Kronecker-product sensing matrices.
//!
//! Both oracles enumerate column subsets exhaustively and refuse (with
//! [`Error::ExhaustiveLimitExceeded`]) rather than silently sample when the
//! enumeration would exceed the [`Budget`].
//!
//! Rank decisions use one rule everywhere: a column set is dependent when
//! `σ_min <= tol · σ_max` of its submatrix (or it has more columns than rows).
//! The RIP oracle applies the same rule per support, so `spark > 2k` and
//! `δ_2k < 1` agree exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array_channel::{dft_basis, ArrayConfig};
use crate::enumeration::{binomial, count_subsets, find_first, try_map_reduce, Budget};
use crate::error::{Error, Result};
use crate::linalg::{
    complex_gaussian, haar_unitary, select_columns, to_complex, unitarity_defect, CMatrix, RMatrix,
    IDENTITY_TOL,
};
use crate::sensing::{commutation_permutations, kron};

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Slack allowed when comparing RIP constants computed along different routes.
pub const LEMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkReport {
    /// Exact spark when `complete`; `n + 1` means every column set is independent.
    /// When the search was cut short this is the lower bound `searched_up_to + 1`.
    pub spark: usize,
    /// First minimal dependent column set in lexicographic order (empty if none found).
    pub witness: Vec<usize>,
    pub tolerance: f64,
    pub n_columns: usize,
    pub searched_up_to: usize,
    pub complete: bool,
}

impl SparkReport {
    pub fn is_full(&self) -> bool {
        self.complete && self.spark == self.n_columns + 1
    }

    /// `spark > k`. Valid for partial searches too, as long as `k <= searched_up_to`.
    pub fn exceeds(&self, k: usize) -> bool {
        self.spark > k
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            reason: "rank tolerance must be positive",
        })
    }
}

/// Singular values of `g[:, support]`, sorted descending, zero-padded to `support.len()`.
fn support_singular_values(g: &CMatrix, support: &[usize]) -> Vec<f64> {
    let mut s: Vec<f64> = if g.nrows() == 0 {
        Vec::new()
    } else {
        select_columns(g, support)
            .singular_values()
            .iter()
            .copied()
            .collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s.resize(support.len(), 0.0);
    s
}

fn is_dependent(g: &CMatrix, support: &[usize], tol: f64) -> bool {
    if support.len() > g.nrows() {
        return true;
    }
    let s = support_singular_values(g, support);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    hi == 0.0 || lo <= tol * hi
}

/// Spark by exhaustive search over column subsets of increasing size.
pub fn spark(g: &CMatrix, tol: f64, budget: &Budget) -> Result<SparkReport> {
    spark_bounded(g, usize::MAX, tol, budget)
}

/// Spark search restricted to subsets of size `<= max_size`.
///
/// Any `m + 1` columns of an `m`-row matrix are dependent, so the search never
/// goes past `min(m + 1, n)` regardless of `max_size`.
pub fn spark_bounded(
    g: &CMatrix,
    max_size: usize,
    tol: f64,
    budget: &Budget,
) -> Result<SparkReport> {
    check_tol(tol)?;
    let (m, n) = g.shape();
    let natural = (m + 1).min(n);
    let limit = natural.min(max_size);
    budget.check(count_subsets(n, 1..=limit))?;

    for size in 1..=limit {
        if let Some(witness) = find_first(n, size, |s| is_dependent(g, s, tol)) {
            return Ok(SparkReport {
                spark: size,
                witness,
                tolerance: tol,
                n_columns: n,
                searched_up_to: size,
                complete: true,
            });
        }
    }
    let complete = limit == natural;
    Ok(SparkReport {
        spark: if complete { n + 1 } else { limit + 1 },
        witness: Vec::new(),
        tolerance: tol,
        n_columns: n,
        searched_up_to: limit,
        complete,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub order_k: usize,
    /// Symmetric RIP constant of the optimally scaled matrix `scale · G`.
    pub delta: f64,
    /// `α` with `α² = 2 / (λ_max + λ_min)`.
    pub scale: f64,
    /// Extreme Gramian eigenvalues over all supports of size `<= k`, unscaled.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `max(λ_max - 1, 1 - λ_min)`: the constant of `G` as given.
    pub delta_raw: f64,
    /// Support attaining `λ_min`.
    pub extremal_support: Vec<usize>,
    /// Support attaining `λ_max`.
    pub max_support: Vec<usize>,
    pub rank_tolerance: f64,
}

impl RipReport {
    pub fn satisfies_rip(&self) -> bool {
        self.delta < 1.0
    }
}

struct Extremes {
    lo: f64,
    lo_support: Vec<usize>,
    hi: f64,
    hi_support: Vec<usize>,
}

fn merge(a: Extremes, b: Extremes) -> Extremes {
    let (lo, lo_support) = if b.lo < a.lo {
        (b.lo, b.lo_support)
    } else {
        (a.lo, a.lo_support)
    };
    let (hi, hi_support) = if b.hi > a.hi {
        (b.hi, b.hi_support)
    } else {
        (a.hi, a.hi_support)
    };
    Extremes {
        lo,
        lo_support,
        hi,
        hi_support,
    }
}

pub fn rip_constant(g: &CMatrix, k: usize, budget: &Budget) -> Result<RipReport> {
    rip_constant_with_tol(g, k, DEFAULT_RANK_TOL, budget)
}

/// Exhaustive k-RIP constant with symmetric rescaling.
///
/// Only supports of size exactly `min(k, n)` are visited: by eigenvalue
/// interlacing every smaller support's Gramian spectrum lies inside that of
/// any superset.
pub fn rip_constant_with_tol(
    g: &CMatrix,
    k: usize,
    tol: f64,
    budget: &Budget,
) -> Result<RipReport> {
    check_tol(tol)?;
    if k == 0 {
        return Err(Error::OutOfRange {
            name: "k",
            value: 0.0,
            reason: "RIP order must be positive",
        });
    }
    let n = g.ncols();
    if n == 0 {
        return Err(Error::DegenerateMatrix);
    }
    let size = k.min(n);
    budget.check(binomial(n, size))?;

    let ext = try_map_reduce(
        n,
        size,
        |s| {
            let sv = support_singular_values(g, s);
            let (top, bottom) = (sv[0], sv[sv.len() - 1]);
            let lo = if top == 0.0 || bottom <= tol * top {
                0.0
            } else {
                bottom * bottom
            };
            Ok(Extremes {
                lo,
                lo_support: s.to_vec(),
                hi: top * top,
                hi_support: s.to_vec(),
            })
        },
        merge,
    )?
    .expect("at least one support");

    if ext.hi == 0.0 {
        return Err(Error::DegenerateMatrix);
    }
    let (lo, hi) = (ext.lo, ext.hi);
    Ok(RipReport {
        order_k: k,
        delta: (hi - lo) / (hi + lo),
        scale: (2.0 / (hi + lo)).sqrt(),
        lambda_min: lo,
        lambda_max: hi,
        delta_raw: (hi - 1.0).max(1.0 - lo),
        extremal_support: ext.lo_support,
        max_support: ext.hi_support,
        rank_tolerance: tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerRipReport {
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_ab: f64,
    /// `δ(A⊗B) >= max(δ_A, δ_B)` on the symmetric (scaled) constants.
    pub holds: bool,
    pub delta_raw_a: f64,
    pub delta_raw_b: f64,
    pub delta_raw_ab: f64,
    /// The same inequality on the as-given constants; not scale invariant.
    pub holds_raw: bool,
}

pub fn verify_kronecker_rip(
    a: &CMatrix,
    b: &CMatrix,
    k: usize,
    budget: &Budget,
) -> Result<KroneckerRipReport> {
    let ra = rip_constant(a, k, budget)?;
    let rb = rip_constant(b, k, budget)?;
    let rab = rip_constant(&kron(a, b), k, budget)?;
    Ok(KroneckerRipReport {
        delta_a: ra.delta,
        delta_b: rb.delta,
        delta_ab: rab.delta,
        holds: rab.delta >= ra.delta.max(rb.delta) - LEMMA_TOL,
        delta_raw_a: ra.delta_raw,
        delta_raw_b: rb.delta_raw,
        delta_raw_ab: rab.delta_raw,
        holds_raw: rab.delta_raw >= ra.delta_raw.max(rb.delta_raw) - LEMMA_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSymmetryReport {
    pub delta_ab: f64,
    pub delta_ba: f64,
    pub equal: bool,
    /// `B⊗A == P_ρ (A⊗B) P_c` entrywise for the explicit commutation permutations.
    pub permutation_verified: bool,
}

pub fn verify_kronecker_symmetry(
    a: &CMatrix,
    b: &CMatrix,
    k: usize,
    budget: &Budget,
) -> Result<KroneckerSymmetryReport> {
    let ab = kron(a, b);
    let ba = kron(b, a);
    let (p_rho, p_c) = commutation_permutations(a.shape(), b.shape());
    let permutation_verified = &p_rho * &ab * &p_c == ba;
    let delta_ab = rip_constant(&ab, k, budget)?.delta;
    let delta_ba = rip_constant(&ba, k, budget)?.delta;
    Ok(KroneckerSymmetryReport {
        delta_ab,
        delta_ba,
        equal: (delta_ab - delta_ba).abs() < LEMMA_TOL,
        permutation_verified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSparkReport {
    pub k: usize,
    pub spark_a: SparkReport,
    pub spark_b: SparkReport,
    /// Searched up to size `k + 1` only.
    pub spark_ab: SparkReport,
    pub premise: bool,
    /// `premise ⇒ spark(A⊗B) > k`.
    pub holds: bool,
}

fn factor_spark(g: &CMatrix, k: usize, tol: f64, budget: &Budget) -> Result<SparkReport> {
    match spark(g, tol, budget) {
        Err(Error::ExhaustiveLimitExceeded { .. }) => spark_bounded(g, k, tol, budget),
        other => other,
    }
}

pub fn verify_kronecker_spark(
    a: &CMatrix,
    b: &CMatrix,
    k: usize,
    tol: f64,
    budget: &Budget,
) -> Result<KroneckerSparkReport> {
    let spark_a = factor_spark(a, k, tol, budget)?;
    let spark_b = factor_spark(b, k, tol, budget)?;
    let spark_ab = spark_bounded(&kron(a, b), k + 1, tol, budget)?;
    let premise = spark_a.exceeds(k) && spark_b.exceeds(k);
    let holds = !premise || spark_ab.exceeds(k);
    Ok(KroneckerSparkReport {
        k,
        spark_a,
        spark_b,
        spark_ab,
        premise,
        holds,
    })
}

/// `‖UᴴU − I‖_max < 1e-10`.
pub fn verify_unitary(u: &CMatrix) -> Result<bool> {
    if !u.is_square() {
        return Err(Error::NonSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    Ok(unitarity_defect(u) < IDENTITY_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkRipConsistency {
    pub k: usize,
    pub spark: SparkReport,
    pub delta_2k: f64,
    /// Every support of size `<= 2k` is independent exactly when `δ_2k < 1`;
    /// with fewer than `2k` columns that means `spark > n`.
    pub consistent: bool,
}

/// Cross-checks the spark and RIP oracles on one matrix.
pub fn spark_rip_consistency(
    g: &CMatrix,
    k: usize,
    budget: &Budget,
) -> Result<SparkRipConsistency> {
    let spark = spark_bounded(g, 2 * k, DEFAULT_RANK_TOL, budget)?;
    let delta_2k = rip_constant(g, 2 * k, budget)?.delta;
    let consistent = spark.exceeds((2 * k).min(g.ncols())) == (delta_2k < 1.0);
    Ok(SparkRipConsistency {
        k,
        spark,
        delta_2k,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rotation {
    Identity,
    Dft,
    Haar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationExperiment {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub rotation: Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub delta_plain: Vec<f64>,
    pub delta_rotated: Vec<f64>,
    pub mean_plain: f64,
    pub mean_rotated: f64,
    pub std_plain: f64,
    pub std_rotated: f64,
    /// Mann-Whitney U of the plain sample.
    pub rank_sum_u: f64,
    /// Normal approximation of `U` (no tie correction).
    pub rank_sum_z: f64,
}

/// Samples Gaussian `G` (`CN(0, 1/m)` entries) and a unitary `V`, and records
/// `δ_k(G)` against `δ_k(GV)`. Evidence only; nothing is asserted.
pub fn rotation_invariance_experiment(
    exp: &RotationExperiment,
    budget: &Budget,
) -> Result<RotationReport> {
    if exp.m == 0 || exp.n == 0 || exp.trials == 0 {
        return Err(Error::InvalidConfig(
            "rotation experiment needs positive m, n, trials".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let mut plain = Vec::with_capacity(exp.trials);
    let mut rotated = Vec::with_capacity(exp.trials);
    for _ in 0..exp.trials {
        let g = complex_gaussian(&mut rng, exp.m, exp.n, 1.0 / exp.m as f64);
        let v = match exp.rotation {
            Rotation::Identity => CMatrix::identity(exp.n, exp.n),
            Rotation::Dft => dft_basis(exp.n, 0.5),
            Rotation::Haar => haar_unitary(&mut rng, exp.n),
        };
        plain.push(rip_constant(&g, exp.k, budget)?.delta);
        rotated.push(rip_constant(&(&g * v), exp.k, budget)?.delta);
    }
    let (mean_plain, std_plain) = mean_std(&plain);
    let (mean_rotated, std_rotated) = mean_std(&rotated);
    let (rank_sum_u, rank_sum_z) = mann_whitney(&plain, &rotated);
    Ok(RotationReport {
        delta_plain: plain,
        delta_rotated: rotated,
        mean_plain,
        mean_rotated,
        std_plain,
        std_rotated,
        rank_sum_u,
        rank_sum_z,
    })
}

/// Uniform random 0/1 matrix with `spark >= min_spark`, by rejection.
pub fn sample_binary_with_spark<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    min_spark: usize,
    budget: &Budget,
) -> Result<CMatrix> {
    if min_spark > rows + 1 {
        return Err(Error::InvalidConfig(format!(
            "a {rows}-row matrix cannot have spark {min_spark}"
        )));
    }
    for _ in 0..100_000 {
        let m = to_complex(&RMatrix::from_fn(rows, cols, |_, _| {
            rng.random_range(0..2u8) as f64
        }));
        if spark_bounded(&m, min_spark.saturating_sub(1), DEFAULT_RANK_TOL, budget)?
            .exceeds(min_spark - 1)
        {
            return Ok(m);
        }
    }
    Err(Error::InvalidConfig(
        "rejection sampling did not find a matrix".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaritySuite {
    pub checked: usize,
    pub passed: usize,
    pub max_defect: f64,
}

/// `U_t`, `U_r` and `U_tᵀ ⊗ U_rᴴ` for all `n_t, n_r <= max_n` and each spacing.
pub fn unitarity_suite(max_n: usize, spacings: &[f64]) -> Result<UnitaritySuite> {
    let mut suite = UnitaritySuite {
        checked: 0,
        passed: 0,
        max_defect: 0.0,
    };
    for &d in spacings {
        for n_t in 1..=max_n {
            for n_r in 1..=max_n {
                let cfg = ArrayConfig::new(n_t, n_r, d, d, 1.0)?;
                let (u_t, u_r) = (cfg.u_t(), cfg.u_r());
                for u in [kron(&u_t.transpose(), &u_r.adjoint()), u_t, u_r] {
                    let defect = unitarity_defect(&u);
                    suite.checked += 1;
                    suite.passed += (defect < IDENTITY_TOL) as usize;
                    suite.max_defect = suite.max_defect.max(defect);
                }
            }
        }
    }
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBatchReport {
    pub trials: usize,
    pub seed: u64,
    pub k: usize,
    pub rip_holds: usize,
    pub rip_holds_raw: usize,
    pub symmetry_equal: usize,
    pub permutation_verified: usize,
    /// Binary 3×6 pairs of spark 3, checked for every order in `1..=k`.
    pub spark_checks: usize,
    pub spark_premise: usize,
    pub spark_holds: usize,
    pub unitarity: UnitaritySuite,
    /// Human-readable description of every failed check.
    pub failures: Vec<String>,
}

impl LemmaBatchReport {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Randomized check of the Kronecker RIP, symmetry and spark lemmas plus the
/// unitarity suite. Gaussian pairs are 3×4 with unit-variance entries.
pub fn kronecker_lemma_batch(
    trials: usize,
    seed: u64,
    k: usize,
    budget: &Budget,
) -> Result<LemmaBatchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LemmaBatchReport {
        trials,
        seed,
        k,
        rip_holds: 0,
        rip_holds_raw: 0,
        symmetry_equal: 0,
        permutation_verified: 0,
        spark_checks: 0,
        spark_premise: 0,
        spark_holds: 0,
        unitarity: unitarity_suite(8, &[0.25, 0.5, 1.0])?,
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let a = complex_gaussian(&mut rng, 3, 4, 1.0);
        let b = complex_gaussian(&mut rng, 3, 4, 1.0);
        let r = verify_kronecker_rip(&a, &b, k, budget)?;
        rep.rip_holds += r.holds as usize;
        rep.rip_holds_raw += r.holds_raw as usize;
        if !r.holds {
            rep.failures.push(format!("trial {trial}: RIP lemma {r:?}"));
        }
        let s = verify_kronecker_symmetry(&a, &b, k, budget)?;
        rep.symmetry_equal += s.equal as usize;
        rep.permutation_verified += s.permutation_verified as usize;
        if !(s.equal && s.permutation_verified) {
            rep.failures.push(format!("trial {trial}: symmetry {s:?}"));
        }

        let a = sample_binary_with_spark(&mut rng, 3, 6, 3, budget)?;
        let b = sample_binary_with_spark(&mut rng, 3, 6, 3, budget)?;
        for order in 1..=k {
            let r = verify_kronecker_spark(&a, &b, order, DEFAULT_RANK_TOL, budget)?;
            rep.spark_checks += 1;
            rep.spark_premise += r.premise as usize;
            rep.spark_holds += r.holds as usize;
            if !r.holds {
                rep.failures
                    .push(format!("trial {trial}: spark lemma at k = {order}"));
            }
        }
    }
    if rep.unitarity.passed != rep.unitarity.checked {
        rep.failures.push(format!("unitarity: {:?}", rep.unitarity));
    }
    Ok(rep)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn mann_whitney(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1..=j+1 share their average
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_a += pooled[i..=j].iter().filter(|p| p.1).count() as f64 * avg;
        i = j + 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let u = rank_sum_a - na * (na + 1.0) / 2.0;
    let mean = na * nb / 2.0;
    let sd = (na * nb * (na + nb + 1.0) / 12.0).sqrt();
    (u, if sd > 0.0 { (u - mean) / sd } else { 0.0 })
}
