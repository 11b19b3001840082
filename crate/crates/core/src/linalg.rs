//! Dense kernels used by the reservoir and the ridge readout.
//!
//! Every reduction goes through [`dot`], whose summation order is fixed, so a
//! given product is bit-identical no matter how rows are scheduled.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

const LANES: usize = 8;

/// Inner product with eight interleaved partial sums folded in a fixed order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn row<'a>(m: &'a ArrayView2<'_, f64>, i: usize) -> &'a [f64] {
    m.row(i).to_slice().expect("row-major contiguous matrix")
}

/// `out[i] = dot(m[i, :], v)` for a row-major matrix.
pub fn matvec_into(m: ArrayView2<'_, f64>, v: &[f64], out: &mut [f64]) {
    assert_eq!(m.ncols(), v.len(), "matvec: column/vector mismatch");
    assert_eq!(m.nrows(), out.len(), "matvec: row/output mismatch");
    if m.nrows() * m.ncols() >= 1 << 16 {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| *o = dot(row(&m, i), v));
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(row(&m, i), v);
        }
    }
}

pub fn matvec(m: ArrayView2<'_, f64>, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    matvec_into(m, v, &mut out);
    out
}

/// `out[j][i] = dot(m[i, :], vs[j])`, bit-identical to calling [`matvec`] on
/// each vector but reading `m` once per block of vectors.
pub fn matvec_many(m: ArrayView2<'_, f64>, vs: &[&[f64]]) -> Vec<Vec<f64>> {
    const BLOCK: usize = 8;
    let rows = m.nrows();
    let mut out: Vec<Vec<f64>> = vs.iter().map(|_| vec![0.0; rows]).collect();
    for (vblock, oblock) in vs.chunks(BLOCK).zip(out.chunks_mut(BLOCK)) {
        for v in vblock {
            assert_eq!(v.len(), m.ncols(), "matvec_many: column/vector mismatch");
        }
        let cols: Vec<Vec<f64>> = (0..rows)
            .into_par_iter()
            .map(|i| {
                let r = row(&m, i);
                vblock.iter().map(|v| dot(r, v)).collect()
            })
            .collect();
        for (i, c) in cols.into_iter().enumerate() {
            for (j, val) in c.into_iter().enumerate() {
                oblock[j][i] = val;
            }
        }
    }
    out
}

/// `X X^T` for an `N x T` matrix, symmetric by construction.
pub fn gram(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let x = x.as_standard_layout();
    let n = x.nrows();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        let ri = x.row(i);
        let ri = ri.as_slice().expect("standard layout");
        for j in 0..=i {
            let rj = x.row(j);
            let v = dot(ri, rj.as_slice().expect("standard layout"));
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    g
}

/// Lower Cholesky factor `L` with `A = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive-definite matrix. A pivot below
    /// `n * eps * max(diag)` is reported as [`Error::SingularSystem`].
    pub fn factor(a: ArrayView2<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "cholesky needs a square matrix, got {:?}",
                a.dim()
            )));
        }
        let max_diag = a.diag().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let tol = (n.max(1) as f64) * f64::EPSILON * max_diag;
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let lj = l.row(j).to_vec();
            let pivot = a[[j, j]] - dot(&lj[..j], &lj[..j]);
            if !pivot.is_finite() || pivot <= tol {
                return Err(Error::SingularSystem { row: j, pivot });
            }
            let djj = pivot.sqrt();
            l[[j, j]] = djj;
            for i in j + 1..n {
                let li = l.row(i);
                let li = li.as_slice().expect("standard layout");
                let s = a[[i, j]] - dot(&li[..j], &lj[..j]);
                l[[i, j]] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.l
    }

    /// Solves `A z = b` in place by forward then back substitution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n, "cholesky solve: rhs length");
        let l = &self.l;
        for i in 0..n {
            let li = l.row(i);
            let li = li.as_slice().expect("standard layout");
            let s = b[i] - dot(&li[..i], &b[..i]);
            b[i] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[[k, i]] * b[k];
            }
            b[i] = s / l[[i, i]];
        }
    }

    /// Solves `A Z = B` column by column for an `n x m` right-hand side.
    pub fn solve_matrix(&self, b: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = b.to_owned();
        for mut col in z.axis_iter_mut(Axis(1)) {
            let mut tmp = col.to_vec();
            self.solve_in_place(&mut tmp);
            for (dst, v) in col.iter_mut().zip(tmp) {
                *dst = v;
            }
        }
        z
    }
}

/// Largest eigenvalue modulus from a dense real Schur decomposition.
pub fn spectral_radius(w: ArrayView2<'_, f64>) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| w[[i, j]]);
    m.complex_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Power estimate of the spectral radius through Gelfand's formula,
/// `rho = lim ||W^m||^(1/m)`, with `m = 2^squarings` reached by repeated
/// squaring. Each square is renormalised and its log-scale tracked, so large
/// or small radii neither overflow nor underflow.
pub fn spectral_radius_power(w: ArrayView2<'_, f64>, squarings: u32) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return 0.0;
    }
    let frob = |a: &Array2<f64>| a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut a = w.to_owned();
    let s0 = frob(&a);
    if s0 == 0.0 {
        return 0.0;
    }
    a /= s0;
    // log ||W^m|| = log_scale + log ||a||, with m doubling every round.
    let mut log_scale = s0.ln();
    let mut m = 1.0f64;
    for _ in 0..squarings {
        a = a.dot(&a);
        log_scale *= 2.0;
        m *= 2.0;
        let s = frob(&a);
        if s == 0.0 {
            return 0.0;
        }
        a /= s;
        log_scale += s.ln();
    }
    (log_scale / m).exp()
}
