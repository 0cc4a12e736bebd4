//! Dense complex matrix helpers shared by the symbol builders and the eigensolver.
//!
//! Block symbols are at most a few dozen rows, so everything here is plain
//! dense arithmetic on [`nalgebra::DMatrix`].

use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Small dense complex matrix carrying a block symbol.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Stable hash of the bit patterns of `a`, used to tag numerical failures.
pub fn matrix_hash(a: &ComplexMatrix) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (a.nrows(), a.ncols()).hash(&mut h);
    for z in a.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// `a^k` by repeated multiplication (k is a sweep count, so tiny).
pub fn matrix_power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = identity(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Solve `a x = b`, failing when `a` is singular to working precision.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    let x = a.clone().lu().solve(b)?;
    is_finite(&x).then_some(x)
}

/// Block-diagonal matrix from square blocks of equal size.
pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let q: usize = blocks.iter().map(|b| b.nrows()).sum();
    let r: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(q, r);
    let (mut i0, mut j0) = (0, 0);
    for b in blocks {
        out.view_mut((i0, j0), (b.nrows(), b.ncols())).copy_from(b);
        i0 += b.nrows();
        j0 += b.ncols();
    }
    out
}

/// Stack blocks vertically (a block column).
pub fn vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut i0 = 0;
    for b in blocks {
        out.view_mut((i0, 0), (b.nrows(), cols)).copy_from(b);
        i0 += b.nrows();
    }
    out
}

/// Stack blocks horizontally (a block row).
pub fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut j0 = 0;
    for b in blocks {
        out.view_mut((0, j0), (rows, b.ncols())).copy_from(b);
        j0 += b.ncols();
    }
    out
}

/// LU factorization with partial pivoting that never fails: exactly zero
/// pivots are replaced by `tiny`. Meant for inverse iteration, where the
/// matrix is singular by construction.
pub(crate) struct PerturbedLu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl PerturbedLu {
    pub(crate) fn new(mut a: ComplexMatrix, tiny: f64) -> Self {
        let n = a.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if piv != k {
                a.swap_rows(k, piv);
                perm.swap(k, piv);
            }
            if a[(k, k)].norm() <= tiny {
                a[(k, k)] = re(tiny);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                a[(i, k)] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let t = a[(k, j)];
                        a[(i, j)] -= f * t;
                    }
                }
            }
        }
        Self { lu: a, perm }
    }

    pub(crate) fn solve(&self, b: &ComplexVector) -> ComplexVector {
        let n = self.lu.nrows();
        let mut x = ComplexVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

pub(crate) fn check_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "{what}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(Error::NumericalFailure {
            what: format!("{what}: non-finite input"),
            matrix_hash: matrix_hash(a),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_helpers_place_blocks() {
        let a = ComplexMatrix::from_element(1, 1, re(2.0));
        let b = ComplexMatrix::from_element(2, 2, re(3.0));
        let d = block_diag(&[a.clone(), b.clone()]);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d[(0, 0)], re(2.0));
        assert_eq!(d[(0, 1)], re(0.0));
        assert_eq!(d[(2, 2)], re(3.0));
        let v = vstack(&[ComplexMatrix::from_element(1, 2, re(1.0)), b.clone()]);
        assert_eq!(v.shape(), (3, 2));
        let h = hstack(&[ComplexMatrix::from_element(2, 1, re(1.0)), b]);
        assert_eq!(h.shape(), (2, 3));
    }

    #[test]
    fn perturbed_lu_solves_regular_systems() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[re(0.0), re(2.0), c(1.0, 1.0), re(1.0)]);
        let b = ComplexVector::from_vec(vec![re(2.0), c(2.0, 1.0)]);
        let x = PerturbedLu::new(a.clone(), 1e-300).solve(&b);
        assert!((&a * x - b).norm() < 1e-14);
    }
}
