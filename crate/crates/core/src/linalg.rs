//! Dense complex matrix aliases and the handful of helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Tolerance used for every max-abs identity check in the crate.
pub const IDENTITY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Column-stacking vectorization. nalgebra stores column-major, so this is a copy.
pub fn vec_col_major(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec_col_major(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "unvec length mismatch");
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `max |(UᴴU - I)_{ij}|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    let eye = CMatrix::identity(gram.nrows(), gram.ncols());
    max_abs_diff(&gram, &eye)
}

/// One circular complex Gaussian draw with `E|z|^2 = variance`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `rows x cols` matrix of i.i.d. CN(0, variance) entries, filled column-major.
pub fn complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        *z = complex_normal(rng, variance);
    }
    m
}

/// Columns of `g` at `support`, in order.
pub fn select_columns(g: &CMatrix, support: &[usize]) -> CMatrix {
    CMatrix::from_fn(g.nrows(), support.len(), |i, j| g[(i, support[j])])
}

/// Haar-distributed unitary from the QR of a complex Gaussian matrix, with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = complex_gaussian(rng, n, n, 1.0);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
