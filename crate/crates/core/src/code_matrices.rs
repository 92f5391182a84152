//! Binary BCH parity-check matrices used as real-valued sensing matrices.
//!
//! `H` is the systematic parity-check matrix of the cyclic code generated by
//! `g(x)`: column `j` holds the coefficients of `x^j mod g(x)` (row `i` is the
//! coefficient of `x^i`). The first `deg g` columns are therefore the identity
//! and are the parity positions; the remaining columns are information
//! positions. Shortening drops the highest-index information positions, i.e.
//! keeps the first `n'` columns.

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumeration::{count_subsets, Budget};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::sensing::kron;

/// Primitive polynomials, bit `i` = coefficient of `x^i`, indexed by `t - 3`.
const PRIMITIVE_POLYS: [u32; 14] = [
    0b1011,        // x^3 + x + 1
    0b1_0011,      // x^4 + x + 1
    0b10_0101,     // x^5 + x^2 + 1
    0b100_0011,    // x^6 + x + 1
    0b1000_1001,   // x^7 + x^3 + 1
    0b1_0001_1101, // x^8 + x^4 + x^3 + x^2 + 1
    0x211,         // x^9 + x^4 + 1
    0x409,         // x^10 + x^3 + 1
    0x805,         // x^11 + x^2 + 1
    0x1053,        // x^12 + x^6 + x^4 + x + 1
    0x201B,        // x^13 + x^4 + x^3 + x + 1
    0x4443,        // x^14 + x^10 + x^6 + x + 1
    0x8003,        // x^15 + x + 1
    0x1100B,       // x^16 + x^12 + x^3 + x + 1
];

/// GF(2^t) arithmetic through log/antilog tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext {
    pub t: u32,
    pub primitive_poly: u32,
    /// `antilog[i] = α^i` for `0 <= i < 2^t - 1`.
    pub antilog: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    pub log: Vec<u32>,
}

pub fn build_field(t: u32) -> Result<FieldContext> {
    if !(3..=16).contains(&t) {
        return Err(Error::UnsupportedDegree(t));
    }
    let poly = PRIMITIVE_POLYS[(t - 3) as usize];
    let order = (1usize << t) - 1;
    let mut antilog = Vec::with_capacity(order);
    let mut log = vec![0u32; order + 1];
    let mut x = 1u32;
    for i in 0..order {
        antilog.push(x);
        log[x as usize] = i as u32;
        x <<= 1;
        if x >> t != 0 {
            x ^= poly;
        }
    }
    debug_assert_eq!(x, 1);
    Ok(FieldContext {
        t,
        primitive_poly: poly,
        antilog,
        log,
    })
}

impl FieldContext {
    /// `2^t - 1`.
    pub fn order(&self) -> usize {
        self.antilog.len()
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = (self.log[a as usize] + self.log[b as usize]) as usize % self.order();
        self.antilog[s]
    }

    /// `α^e` for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> u32 {
        self.antilog[e.rem_euclid(self.order() as i64) as usize]
    }

    /// Smallest `e > 0` with `x^e = 1`, by repeated multiplication (not via the log table).
    pub fn multiplicative_order(&self, x: u32) -> Option<usize> {
        if x == 0 {
            return None;
        }
        let mut acc = x;
        for e in 1..=self.order() {
            if acc == 1 {
                return Some(e);
            }
            acc = self.mul(acc, x);
        }
        None
    }

    /// Cyclotomic coset of `i` modulo `2^t - 1`, sorted.
    pub fn cyclotomic_coset(&self, i: usize) -> Vec<usize> {
        let n = self.order();
        let mut coset = vec![i % n];
        let mut j = (2 * i) % n;
        while j != i % n {
            coset.push(j);
            j = (2 * j) % n;
        }
        coset.sort_unstable();
        coset
    }

    /// Minimal polynomial of `α^i` over GF(2), coefficients low to high.
    pub fn minimal_polynomial(&self, i: usize) -> Vec<u8> {
        // product of (x + α^c) over the coset, computed in GF(2^t)
        let mut poly: Vec<u32> = vec![1];
        for c in self.cyclotomic_coset(i) {
            let root = self.antilog[c];
            let mut next = vec![0u32; poly.len() + 1];
            for (d, &a) in poly.iter().enumerate() {
                next[d + 1] ^= a;
                next[d] ^= self.mul(a, root);
            }
            poly = next;
        }
        poly.into_iter()
            .map(|a| {
                debug_assert!(a <= 1, "minimal polynomial has a non-binary coefficient");
                a as u8
            })
            .collect()
    }
}

fn gf2_poly_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 1 {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BchDesign {
    pub t: u32,
    /// Block length `2^t - 1` of the unshortened code.
    pub n: usize,
    pub k: usize,
    pub d_min_design: usize,
    pub parity_rows: usize,
    pub shortened_to: Option<usize>,
    /// Generator polynomial, coefficients low to high.
    pub generator: Vec<u8>,
    #[serde(rename = "H", with = "crate::json::real_matrix")]
    pub h: RMatrix,
}

impl BchDesign {
    /// Current number of columns.
    pub fn columns(&self) -> usize {
        self.shortened_to.unwrap_or(self.n)
    }
}

/// Narrow-sense binary BCH code with designed distance `2k + 1`.
pub fn bch_parity_check(t: u32, k: usize) -> Result<BchDesign> {
    let field = build_field(t)?;
    if k == 0 || k >= 1usize << (t - 1) {
        return Err(Error::InvalidK { t, k });
    }
    let n = field.order();

    let mut seen = vec![false; n];
    let mut g: Vec<u8> = vec![1];
    for i in (1..2 * k).step_by(2) {
        if seen[i % n] {
            continue;
        }
        for c in field.cyclotomic_coset(i) {
            seen[c] = true;
        }
        g = gf2_poly_mul(&g, &field.minimal_polynomial(i));
    }
    let deg = g.len() - 1;

    // column j = x^j mod g
    let mut h = RMatrix::zeros(deg, n);
    let mut r = vec![0u8; deg];
    r[0] = 1;
    for j in 0..n {
        for (i, &bit) in r.iter().enumerate() {
            h[(i, j)] = bit as f64;
        }
        let carry = r[deg - 1];
        r.rotate_right(1);
        r[0] = 0;
        if carry == 1 {
            for (i, bit) in r.iter_mut().enumerate() {
                *bit ^= g[i];
            }
        }
    }

    Ok(BchDesign {
        t,
        n,
        k,
        d_min_design: 2 * k + 1,
        parity_rows: deg,
        shortened_to: None,
        generator: g,
        h,
    })
}

/// Removes information positions until `n_target` columns remain.
pub fn shorten(design: &BchDesign, n_target: usize) -> Result<BchDesign> {
    let current = design.columns();
    if n_target < design.parity_rows || n_target >= current {
        return Err(Error::TargetTooSmall {
            target: n_target,
            min: design.parity_rows,
            max: current.saturating_sub(1),
        });
    }
    Ok(BchDesign {
        shortened_to: Some(n_target),
        h: design.h.columns(0, n_target).into_owned(),
        ..design.clone()
    })
}

/// Code of length exactly `n`: the smallest `t` with `2^t - 1 >= n`, shortened
/// when `n` is not a full block length.
pub fn bch_for_length(n: usize, k: usize) -> Result<BchDesign> {
    let t = (3..=16u32)
        .find(|&t| (1usize << t) > n)
        .ok_or(Error::UnsupportedDegree(17))?;
    let design = bch_parity_check(t, k)?;
    if design.n == n {
        Ok(design)
    } else {
        shorten(&design, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSensing {
    pub k: usize,
    pub m_t: usize,
    pub m_r: usize,
    pub m: usize,
    #[serde(rename = "H_t", with = "crate::json::real_matrix")]
    pub h_t: RMatrix,
    #[serde(rename = "H_r", with = "crate::json::real_matrix")]
    pub h_r: RMatrix,
    #[serde(rename = "H_v", with = "crate::json::real_matrix")]
    pub h_v: RMatrix,
}

/// `H_v = H_t ⊗ H_r` for two designs serving the same sparsity.
pub fn sensing_from_codes(design_t: &BchDesign, design_r: &BchDesign) -> Result<CodeSensing> {
    if design_t.k != design_r.k {
        return Err(Error::SparsityMismatch {
            k_t: design_t.k,
            k_r: design_r.k,
        });
    }
    let h_v = kron(&design_t.h, &design_r.h);
    Ok(CodeSensing {
        k: design_t.k,
        m_t: design_t.parity_rows,
        m_r: design_r.parity_rows,
        m: h_v.nrows(),
        h_t: design_t.h.clone(),
        h_r: design_r.h.clone(),
        h_v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gf2IndependenceReport {
    /// Every set of `order` columns was required to be independent.
    pub order: usize,
    pub independent: bool,
    /// `true` when all weight-`<= order/2` patterns were compared; otherwise a
    /// seeded random audit of `order`-subsets was run.
    pub exhaustive: bool,
    pub checked: u128,
    /// A dependent column set, when one was found.
    pub witness: Option<Vec<usize>>,
}

type Bits = Vec<u64>;

fn column_bits(h: &RMatrix) -> Vec<Bits> {
    let words = h.nrows().div_ceil(64).max(1);
    (0..h.ncols())
        .map(|j| {
            let mut b = vec![0u64; words];
            for i in 0..h.nrows() {
                if h[(i, j)] != 0.0 {
                    b[i / 64] |= 1 << (i % 64);
                }
            }
            b
        })
        .collect()
}

fn xor_into(acc: &mut Bits, other: &Bits) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

fn gf2_rank(mut vecs: Vec<Bits>) -> usize {
    let mut rank = 0;
    let bits = vecs.first().map_or(0, |v| v.len() * 64);
    for bit in 0..bits {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..vecs.len()).find(|&r| vecs[r][w] & mask != 0) else {
            continue;
        };
        vecs.swap(rank, p);
        let pivot = vecs[rank].clone();
        for (r, v) in vecs.iter_mut().enumerate() {
            if r != rank && v[w] & mask != 0 {
                xor_into(v, &pivot);
            }
        }
        rank += 1;
    }
    rank
}

/// Checks that every `2k` columns of the binary matrix `h` are independent over GF(2).
///
/// Exhaustively this is "all syndromes of error patterns of weight `<= k` are
/// distinct": two patterns with equal syndromes add up to a dependent set of
/// at most `2k` columns, and any such set splits into two such patterns.
pub fn gf2_independence(
    h: &RMatrix,
    k: usize,
    budget: &Budget,
    audit_seed: u64,
) -> Gf2IndependenceReport {
    let n = h.ncols();
    let order = 2 * k;
    let cols = column_bits(h);
    let patterns = count_subsets(n, 0..=k.min(n));

    if budget.check(patterns).is_ok() {
        let mut seen: HashMap<Bits, Vec<usize>> = HashMap::new();
        for w in 0..=k.min(n) {
            for pattern in (0..n).combinations(w) {
                let mut s = vec![0u64; cols.first().map_or(1, |c| c.len())];
                for &j in &pattern {
                    xor_into(&mut s, &cols[j]);
                }
                if let Some(prev) = seen.get(&s) {
                    // symmetric difference of the two patterns is a dependent set
                    let witness: Vec<usize> = prev
                        .iter()
                        .copied()
                        .filter(|j| !pattern.contains(j))
                        .chain(pattern.iter().copied().filter(|j| !prev.contains(j)))
                        .sorted()
                        .collect();
                    return Gf2IndependenceReport {
                        order,
                        independent: false,
                        exhaustive: true,
                        checked: seen.len() as u128 + 1,
                        witness: Some(witness),
                    };
                }
                seen.insert(s, pattern);
            }
        }
        return Gf2IndependenceReport {
            order,
            independent: true,
            exhaustive: true,
            checked: patterns,
            witness: None,
        };
    }

    let size = order.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(audit_seed);
    let trials = budget.max_evaluations.min(100_000);
    for _ in 0..trials {
        let mut subset = sample(&mut rng, n, size).into_vec();
        subset.sort_unstable();
        let vecs = subset.iter().map(|&j| cols[j].clone()).collect();
        if gf2_rank(vecs) < size {
            return Gf2IndependenceReport {
                order,
                independent: false,
                exhaustive: false,
                checked: trials as u128,
                witness: Some(subset),
            };
        }
    }
    Gf2IndependenceReport {
        order,
        independent: true,
        exhaustive: false,
        checked: trials as u128,
        witness: None,
    }
}
