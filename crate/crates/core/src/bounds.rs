//! Closed-form measurement bounds, the exact binomial-sum count `m̲`, and the
//! grid generators behind the bound-comparison plots and the ratio audit.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::code_matrices::bch_for_length;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Base2 => "base2",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "base2" | "2" | "log2" => Ok(LogBase::Base2),
            other => Err(Error::InvalidConfig(format!("unknown log base {other:?}"))),
        }
    }
}

fn out_of_range(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value,
        reason,
    }
}

/// `0.18 / log(sqrt((1 + δ)/(1 − δ)) + 1)`.
pub fn c_delta(delta: f64, base: LogBase) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(out_of_range("delta", delta, "must lie in (0, 1)"));
    }
    Ok(0.18 / base.log(((1.0 + delta) / (1.0 - delta)).sqrt() + 1.0))
}

/// `c_δ · k · log(n / k)`.
pub fn rip_lower_single(n: usize, k: usize, delta: f64, base: LogBase) -> Result<f64> {
    if k == 0 || k > n {
        return Err(out_of_range("k", k as f64, "need 1 <= k <= n"));
    }
    Ok(c_delta(delta, base)? * k as f64 * base.log(n as f64 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
    pub delta: f64,
    /// Sparsity-regime exponent: the analysis assumes `n_t, n_r >= k^(1+ε)`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub log_base: LogBase,
}

fn default_epsilon() -> f64 {
    1.0
}

impl BoundInputs {
    pub fn new(n_t: usize, n_r: usize, k: usize, delta: f64) -> Self {
        BoundInputs {
            n_t,
            n_r,
            k,
            delta,
            epsilon: default_epsilon(),
            log_base: LogBase::Natural,
        }
    }

    pub fn in_sparsity_regime(&self) -> bool {
        let need = (self.k as f64).powf(1.0 + self.epsilon);
        self.n_t as f64 >= need && self.n_r as f64 >= need
    }
}

/// Bound for an unstructured `n_t n_r`-column matrix at order `2k`:
/// `c_δ · 2k · log(n_t n_r / 2k)`.
pub fn loose_mimo_lower(inp: &BoundInputs) -> Result<f64> {
    let two_k = 2 * inp.k;
    if inp.k == 0 || two_k > inp.n_t * inp.n_r {
        return Err(out_of_range("k", inp.k as f64, "need 1 <= 2k <= n_t n_r"));
    }
    let base = inp.log_base;
    let c = c_delta(inp.delta, base)?;
    Ok(c * two_k as f64 * base.log((inp.n_t * inp.n_r) as f64 / two_k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightBound {
    /// `4 c_δ² k² log(n_t / 2k) log(n_r / 2k)`.
    pub value: f64,
    /// Unscaled shape `k² log(n_t / k) log(n_r / k)`.
    pub shape: f64,
}

/// Bound for Kronecker-structured sensing matrices.
pub fn tight_mimo_lower(inp: &BoundInputs) -> Result<TightBound> {
    let two_k = 2 * inp.k;
    if inp.k == 0 || two_k > inp.n_t.min(inp.n_r) {
        return Err(out_of_range(
            "k",
            inp.k as f64,
            "need 1 <= 2k <= min(n_t, n_r)",
        ));
    }
    let base = inp.log_base;
    let c = c_delta(inp.delta, base)?;
    let k = inp.k as f64;
    let (nt, nr) = (inp.n_t as f64, inp.n_r as f64);
    Ok(TightBound {
        value: 4.0 * c * c * k * k * base.log(nt / (2.0 * k)) * base.log(nr / (2.0 * k)),
        shape: k * k * base.log(nt / k) * base.log(nr / k),
    })
}

/// `Σ_{i=0}^{k} C(n, i)`, exact.
pub fn binomial_sum(n: usize, k: usize) -> BigUint {
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for i in 0..k.min(n) {
        term = term * BigUint::from(n - i) / BigUint::from(i + 1);
        sum += &term;
    }
    sum
}

/// `⌈log2 s⌉` for `s >= 1`.
pub fn ceil_log2(s: &BigUint) -> u64 {
    (s - BigUint::one()).bits()
}

/// `⌈log2 Σ_{i<=k} C(n_r, i)⌉ · ⌈log2 Σ_{i<=k} C(n_t, i)⌉`.
pub fn m_underbar(n_t: usize, n_r: usize, k: usize) -> Result<u64> {
    if k > n_t.min(n_r) {
        return Err(out_of_range("k", k as f64, "need k <= min(n_t, n_r)"));
    }
    Ok(ceil_log2(&binomial_sum(n_r, k)) * ceil_log2(&binomial_sum(n_t, k)))
}

fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite below 2^1000").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialBoundsReport {
    pub n: usize,
    pub k: usize,
    /// `(n/k)^k`.
    pub lower: f64,
    /// `C(n, k)` (rounded for display; comparisons are exact).
    pub value: f64,
    /// `(ne/k)^k`.
    pub upper: f64,
    /// `Σ_{i<=k} C(n, i)`, rounded for display.
    pub sum: f64,
    pub standard_bounds_hold: bool,
    /// `C(n, k) <= Σ <= (k + 1) C(n, k)`.
    pub sandwich_holds: bool,
    pub holds: bool,
}

pub fn binomial_bounds_check(n: usize, k: usize) -> Result<BinomialBoundsReport> {
    if k == 0 || 2 * k > n {
        return Err(out_of_range("k", k as f64, "need 1 <= k < (n + 1)/2"));
    }
    let c = binomial(n, k);
    let s = binomial_sum(n, k);
    // (n/k)^k <= C  <=>  n^k <= C k^k, exactly
    let lower_ok = BigUint::from(n).pow(k as u32) <= &c * BigUint::from(k).pow(k as u32);
    // C <= (ne/k)^k compared in the log domain, e being irrational
    let upper_log = k as f64 * ((n as f64).ln() + 1.0 - (k as f64).ln());
    let upper_ok = big_ln(&c) <= upper_log;
    let sandwich = c <= s && s <= &c * BigUint::from(k + 1);
    let kf = k as f64;
    Ok(BinomialBoundsReport {
        n,
        k,
        lower: (n as f64 / kf).powf(kf),
        value: c.to_f64().unwrap_or(f64::INFINITY),
        upper: upper_log.exp(),
        sum: s.to_f64().unwrap_or(f64::INFINITY),
        standard_bounds_hold: lower_ok && upper_ok,
        sandwich_holds: sandwich,
        holds: lower_ok && upper_ok && sandwich,
    })
}

/// A one-parameter sweep with `n_t = n_r = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Sweep {
    FixedK { k: usize, grid: Vec<usize> },
    FixedN { n: usize, grid: Vec<usize> },
}

impl Sweep {
    /// `n = k, k + 1, ..., n_max`.
    pub fn fixed_k(k: usize, n_max: usize) -> Self {
        Sweep::FixedK {
            k,
            grid: (k..=n_max).collect(),
        }
    }

    /// `k = 1, ..., k_max`.
    pub fn fixed_n(n: usize, k_max: usize) -> Self {
        Sweep::FixedN {
            n,
            grid: (1..=k_max).collect(),
        }
    }

    /// `(x, n, k)` per grid point.
    pub fn points(&self) -> Vec<(usize, usize, usize)> {
        match self {
            Sweep::FixedK { k, grid } => grid.iter().map(|&n| (n, n, *k)).collect(),
            Sweep::FixedN { n, grid } => grid.iter().map(|&k| (k, *n, k)).collect(),
        }
    }
}

/// `k · log(n² / k)`.
pub fn f_loose(n: usize, k: usize, base: LogBase) -> f64 {
    k as f64 * base.log((n * n) as f64 / k as f64)
}

/// `k² · log(n / k)²`.
pub fn f_tight(n: usize, k: usize, base: LogBase) -> f64 {
    let l = base.log(n as f64 / k as f64);
    (k * k) as f64 * l * l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub x: usize,
    pub f_loose: f64,
    pub f_tight: f64,
}

pub fn fig1_data(sweep: &Sweep, base: LogBase) -> Result<Vec<Fig1Row>> {
    sweep
        .points()
        .into_iter()
        .map(|(x, n, k)| {
            if k == 0 || k > n {
                return Err(out_of_range(
                    "k",
                    k as f64,
                    "need 1 <= k <= n at every grid point",
                ));
            }
            Ok(Fig1Row {
                x,
                f_loose: f_loose(n, k, base),
                f_tight: f_tight(n, k, base),
            })
        })
        .collect()
}

pub fn fig1_csv(rows: &[Fig1Row], base: LogBase) -> String {
    let mut out = String::from("x,f_loose,f_tight,log_base\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.x,
            r.f_loose,
            r.f_tight,
            base.name()
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
    pub m_underbar: u64,
    pub m_bch: usize,
    /// `k² log(n_t/k) log(n_r/k)`.
    pub reference: f64,
    pub ratio_underbar: f64,
    pub ratio_bch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTable {
    pub log_base: LogBase,
    pub rows: Vec<AuditRow>,
    /// `[min, max]` of each ratio column over the grid.
    pub ratio_underbar_range: [f64; 2],
    pub ratio_bch_range: [f64; 2],
}

impl AuditTable {
    /// `max / min` of the `m̲` ratios.
    pub fn underbar_spread(&self) -> f64 {
        self.ratio_underbar_range[1] / self.ratio_underbar_range[0]
    }

    pub fn bch_spread(&self) -> f64 {
        self.ratio_bch_range[1] / self.ratio_bch_range[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_t,n_r,k,m_underbar,m_bch,ref,ratio_underbar,ratio_bch\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.n_t,
                r.n_r,
                r.k,
                r.m_underbar,
                r.m_bch,
                r.reference,
                r.ratio_underbar,
                r.ratio_bch
            ));
        }
        out
    }
}

fn range(xs: impl Iterator<Item = f64>) -> [f64; 2] {
    xs.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], x| {
        [lo.min(x), hi.max(x)]
    })
}

/// `m̲` and the BCH-achieved count against the Kronecker-structure shape.
/// The ratio ranges are reported, not judged.
pub fn asymptotic_ratio_audit(sweep: &Sweep, base: LogBase) -> Result<AuditTable> {
    let mut rows = Vec::new();
    for (_, n, k) in sweep.points() {
        let m_u = m_underbar(n, n, k)?;
        let bch = bch_for_length(n, k)?;
        let m_bch = bch.parity_rows * bch.parity_rows;
        let l = base.log(n as f64 / k as f64);
        let reference = (k * k) as f64 * l * l;
        rows.push(AuditRow {
            n_t: n,
            n_r: n,
            k,
            m_underbar: m_u,
            m_bch,
            reference,
            ratio_underbar: m_u as f64 / reference,
            ratio_bch: m_bch as f64 / reference,
        });
    }
    Ok(AuditTable {
        log_base: base,
        ratio_underbar_range: range(rows.iter().map(|r| r.ratio_underbar)),
        ratio_bch_range: range(rows.iter().map(|r| r.ratio_bch)),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub log_base: LogBase,
    pub c_delta: f64,
    pub rip_lower_single_t: f64,
    pub rip_lower_single_r: f64,
    pub loose_mimo_lower: f64,
    pub loose_mimo_lower_ceil: u64,
    /// Absent when `2k > min(n_t, n_r)`.
    pub tight_mimo_lower: Option<TightBound>,
    pub tight_mimo_lower_ceil: Option<u64>,
    pub m_underbar: u64,
    /// Absent when no BCH design of the needed length exists.
    pub bch_m_t: Option<usize>,
    pub bch_m_r: Option<usize>,
    pub bch_m: Option<usize>,
    pub in_sparsity_regime: bool,
}

pub fn bound_report(inp: &BoundInputs) -> Result<BoundReport> {
    let base = inp.log_base;
    let loose = loose_mimo_lower(inp)?;
    let tight = tight_mimo_lower(inp).ok();
    let bch_t = bch_for_length(inp.n_t, inp.k).ok().map(|d| d.parity_rows);
    let bch_r = bch_for_length(inp.n_r, inp.k).ok().map(|d| d.parity_rows);
    Ok(BoundReport {
        inputs: *inp,
        log_base: base,
        c_delta: c_delta(inp.delta, base)?,
        rip_lower_single_t: rip_lower_single(inp.n_t, inp.k, inp.delta, base)?,
        rip_lower_single_r: rip_lower_single(inp.n_r, inp.k, inp.delta, base)?,
        loose_mimo_lower: loose,
        loose_mimo_lower_ceil: loose.max(0.0).ceil() as u64,
        tight_mimo_lower_ceil: tight.map(|t| t.value.max(0.0).ceil() as u64),
        tight_mimo_lower: tight,
        m_underbar: m_underbar(inp.n_t, inp.n_r, inp.k)?,
        bch_m_t: bch_t,
        bch_m_r: bch_r,
        bch_m: bch_t.zip(bch_r).map(|(a, b)| a * b),
        in_sparsity_regime: inp.in_sparsity_regime(),
    })
}
