//! Cyclic Jacobi eigensolver for small Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot with a diagonal
//! unitary, then applies the ordinary real Jacobi rotation. The sweep stops
//! when the off-diagonal Frobenius norm falls below `OFF_DIAG_TOL · ‖M‖_F`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::Operator;

pub const OFF_DIAG_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;
/// Hermiticity tolerance for eigensolver input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Eigenvalues ascending; `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl EigenDecomposition {
    /// `Σ λₖ vₖ vₖ†`.
    pub fn reconstruct(&self) -> Operator {
        let n = self.values.len();
        self.values
            .iter()
            .zip(&self.vectors)
            .fold(Operator::zeros(n), |acc, (&l, v)| {
                &acc + &Operator::outer(v, v).scale(C64::new(l, 0.0))
            })
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &Operator) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n > MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: MAX_DIM,
            found: n,
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation });
    }

    let mut a = m.clone();
    // exact Hermitian symmetrization of the input
    for i in 0..n {
        a.set(i, i, C64::new(a.get(i, i).re, 0.0));
        for j in i + 1..n {
            let z = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, z);
            a.set(j, i, z.conj());
        }
    }
    let mut v = Operator::identity(n);
    let scale = a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= OFF_DIAG_TOL * scale {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| (a.get(k, k).re, (0..n).map(|i| v.get(i, k)).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix, each verified to satisfy
/// `‖Mv − λv‖ ≤ tol · ‖M‖_F`.
pub fn hermitian_eigenvalues(m: &Operator, tol: f64) -> Result<Vec<f64>> {
    let eig = hermitian_eigen(m)?;
    let bound = tol * m.frobenius_norm();
    for (&l, vec) in eig.values.iter().zip(&eig.vectors) {
        let mv = m.mul_vec(vec);
        let residual = mv
            .iter()
            .zip(vec)
            .map(|(a, b)| (a - b * l).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > bound {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_norm: residual,
            });
        }
    }
    Ok(eig.values)
}

fn off_diagonal_norm(a: &Operator) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut Operator, v: &mut Operator, p: usize, q: usize) {
    let z = a.get(p, q);
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let phase = z / r;
    let theta = (a.get(q, q).re - a.get(p, p).re) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a.get(k, p), a.get(k, q));
        a.set(k, p, akp * g_pp + akq * g_qp);
        a.set(k, q, akp * g_pq + akq * g_qq);
        let (vkp, vkq) = (v.get(k, p), v.get(k, q));
        v.set(k, p, vkp * g_pp + vkq * g_qp);
        v.set(k, q, vkp * g_pq + vkq * g_qq);
    }
    for k in 0..n {
        let (apk, aqk) = (a.get(p, k), a.get(q, k));
        a.set(p, k, g_pp.conj() * apk + g_qp.conj() * aqk);
        a.set(q, k, g_pq.conj() * apk + g_qq.conj() * aqk);
    }
    a.set(p, q, C64::new(0.0, 0.0));
    a.set(q, p, C64::new(0.0, 0.0));
    a.set(p, p, C64::new(a.get(p, p).re, 0.0));
    a.set(q, q, C64::new(a.get(q, q).re, 0.0));
}
