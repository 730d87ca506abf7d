//! Variable-coefficient five-point operator on the interior nodes of a
//! Dirichlet grid, plus the linear solvers used on it.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::grid::Domain2D;
use crate::{Error, Result};

/// Discrete `−∇·(κ∇u) + r·u` on interior nodes with `u = 0` on the boundary.
/// Face coefficients are arithmetic means of the adjacent nodal `κ`, already
/// divided by `h²`.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    nxi: usize,
    nyi: usize,
    /// x-faces: `(nxi + 1) × nyi`, face `i` sits between interior columns
    /// `i − 1` and `i`.
    fx: Vec<f64>,
    /// y-faces: `nxi × (nyi + 1)`.
    fy: Vec<f64>,
    diag: Vec<f64>,
}

impl DirichletOperator {
    /// `kappa` and `reaction` are nodal values over the full grid.
    pub fn new(domain: &Domain2D, kappa: &[f64], reaction: Option<&[f64]>) -> Self {
        let (nx, ny) = (domain.nx, domain.ny);
        let (nxi, nyi) = (nx - 2, ny - 2);
        let (ihx2, ihy2) = (1.0 / domain.hx().powi(2), 1.0 / domain.hy().powi(2));

        let mut fx = vec![0.0; (nxi + 1) * nyi];
        for jj in 0..nyi {
            let j = jj + 1;
            for f in 0..=nxi {
                let a = kappa[domain.index(f, j)];
                let b = kappa[domain.index(f + 1, j)];
                fx[jj * (nxi + 1) + f] = 0.5 * (a + b) * ihx2;
            }
        }
        let mut fy = vec![0.0; nxi * (nyi + 1)];
        for f in 0..=nyi {
            for ii in 0..nxi {
                let i = ii + 1;
                let a = kappa[domain.index(i, f)];
                let b = kappa[domain.index(i, f + 1)];
                fy[f * nxi + ii] = 0.5 * (a + b) * ihy2;
            }
        }
        let mut diag = vec![0.0; nxi * nyi];
        for jj in 0..nyi {
            for ii in 0..nxi {
                let mut d = fx[jj * (nxi + 1) + ii]
                    + fx[jj * (nxi + 1) + ii + 1]
                    + fy[jj * nxi + ii]
                    + fy[(jj + 1) * nxi + ii];
                if let Some(r) = reaction {
                    d += r[domain.index(ii + 1, jj + 1)];
                }
                diag[jj * nxi + ii] = d;
            }
        }
        DirichletOperator {
            nxi,
            nyi,
            fx,
            fy,
            diag,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.nxi * self.nyi
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `out = A·u` over interior unknowns.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (nxi, nyi) = (self.nxi, self.nyi);
        for jj in 0..nyi {
            let row = jj * nxi;
            let frow = jj * (nxi + 1);
            for ii in 0..nxi {
                let p = row + ii;
                let mut acc = self.diag[p] * u[p];
                if ii > 0 {
                    acc -= self.fx[frow + ii] * u[p - 1];
                }
                if ii + 1 < nxi {
                    acc -= self.fx[frow + ii + 1] * u[p + 1];
                }
                if jj > 0 {
                    acc -= self.fy[row + ii] * u[p - nxi];
                }
                if jj + 1 < nyi {
                    acc -= self.fy[row + nxi + ii] * u[p + nxi];
                }
                out[p] = acc;
            }
        }
    }

    /// The same operator laid out over the full node grid, for repeated
    /// application in time stepping.
    pub(crate) fn padded(&self) -> PaddedOperator {
        let (nxi, nyi) = (self.nxi, self.nyi);
        let nx = nxi + 2;
        let len = nx * (nyi + 2);
        let mut op = PaddedOperator {
            nx,
            ny: nyi + 2,
            diag: vec![0.0; len],
            west: vec![0.0; len],
            east: vec![0.0; len],
            south: vec![0.0; len],
            north: vec![0.0; len],
        };
        for jj in 0..nyi {
            for ii in 0..nxi {
                let p = jj * nxi + ii;
                let q = (jj + 1) * nx + ii + 1;
                op.diag[q] = self.diag[p];
                op.west[q] = self.fx[jj * (nxi + 1) + ii];
                op.east[q] = self.fx[jj * (nxi + 1) + ii + 1];
                op.south[q] = self.fy[jj * nxi + ii];
                op.north[q] = self.fy[(jj + 1) * nxi + ii];
            }
        }
        op
    }

    /// Off-diagonal couplings of unknown `p` as `(neighbour, value)`.
    fn couplings(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (nxi, nyi) = (self.nxi, self.nyi);
        let (ii, jj) = (p % nxi, p / nxi);
        let frow = jj * (nxi + 1);
        [
            (ii > 0).then(|| (p - 1, -self.fx[frow + ii])),
            (ii + 1 < nxi).then(|| (p + 1, -self.fx[frow + ii + 1])),
            (jj > 0).then(|| (p - nxi, -self.fy[jj * nxi + ii])),
            (jj + 1 < nyi).then(|| (p + nxi, -self.fy[(jj + 1) * nxi + ii])),
        ]
        .into_iter()
        .flatten()
    }

    /// True when every face coefficient and diagonal entry is positive, which
    /// makes the operator symmetric positive definite.
    pub fn is_positive(&self) -> bool {
        self.fx.iter().chain(&self.fy).all(|&c| c > 0.0) && self.diag.iter().all(|&d| d > 0.0)
    }

    /// Solves `A·u = b`: preconditioned conjugate gradient when the operator
    /// is positive, banded LU otherwise.
    pub fn solve(&self, b: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
        if self.is_positive() {
            conjugate_gradient(self, b, tol, max_iters)
        } else {
            let x = self.solve_banded(b)?;
            let mut r = vec![0.0; b.len()];
            self.apply(&x, &mut r);
            let res = relative_residual(&r, b);
            if res.is_finite() && res <= tol.max(1e-8) {
                Ok(x)
            } else {
                Err(Error::SolverFailure {
                    iterations: 0,
                    residual: res,
                })
            }
        }
    }

    /// Gaussian elimination with partial pivoting in band storage.
    fn solve_banded(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.unknowns();
        let kl = self.nxi;
        // Pivoting can push fill up to kl extra super-diagonals.
        let ku = 2 * kl;
        let width = kl + ku + 1;
        // Row p stores columns p − kl ..= p + ku at offset col − p + kl.
        let mut band = vec![0.0; n * width];
        for p in 0..n {
            band[p * width + kl] = self.diag[p];
            for (q, v) in self.couplings(p) {
                band[p * width + q + kl - p] = v;
            }
        }
        let mut rhs = b.to_vec();
        let at = |p: usize, q: usize| p * width + q + kl - p;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = band[at(k, k)].abs();
            for p in k + 1..=last {
                let v = band[at(p, k)].abs();
                if v > best {
                    best = v;
                    piv = p;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolverFailure {
                    iterations: k,
                    residual: f64::INFINITY,
                });
            }
            let col_end = (k + ku).min(n - 1);
            if piv != k {
                for q in k..=col_end {
                    band.swap(at(k, q), at(piv, q));
                }
                rhs.swap(k, piv);
            }
            let pivot = band[at(k, k)];
            for p in k + 1..=last {
                let m = band[at(p, k)] / pivot;
                if m == 0.0 {
                    continue;
                }
                band[at(p, k)] = 0.0;
                for q in k + 1..=col_end {
                    band[at(p, q)] -= m * band[at(k, q)];
                }
                rhs[p] -= m * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let col_end = (k + ku).min(n - 1);
            let mut acc = rhs[k];
            for q in k + 1..=col_end {
                acc -= band[at(k, q)] * x[q];
            }
            x[k] = acc / band[at(k, k)];
        }
        Ok(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(ax: &[f64], b: &[f64]) -> f64 {
    let num: f64 = ax.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    let den = dot(b, b);
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Jacobi-preconditioned conjugate gradient; converged when
/// `‖b − A·x‖ ≤ tol·‖b‖`.
pub fn conjugate_gradient(
    op: &DirichletOperator,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    let n = op.unknowns();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = tol * b_norm;
    let mut res = b_norm;
    for it in 0..max_iters {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: res / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        iterations: max_iters,
        residual: res / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn operator(
        n: usize,
        kappa: impl Fn(f64, f64) -> f64,
        r: f64,
    ) -> (Domain2D, DirichletOperator) {
        let d = Domain2D::square(0.0, 1.0, n).unwrap();
        let k: Vec<f64> = d.nodes().map(|(x, y)| kappa(x, y)).collect();
        let rr = vec![r; d.node_count()];
        (d, DirichletOperator::new(&d, &k, Some(&rr)))
    }

    #[test]
    fn operator_is_symmetric() {
        let (_, op) = operator(7, |x, y| 1.0 + x * y, 0.3);
        let n = op.unknowns();
        let mut col_i = vec![0.0; n];
        let mut col_j = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                op.apply(&e, &mut col_i);
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                op.apply(&e, &mut col_j);
                assert!((col_i[j] - col_j[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cg_and_banded_lu_agree() {
        let (_, op) = operator(12, |x, y| 2.0 + (3.0 * x).sin() * y, 0.5);
        let b: Vec<f64> = (0..op.unknowns())
            .map(|i| ((i * 7) % 5) as f64 - 2.0)
            .collect();
        let x_cg = conjugate_gradient(&op, &b, 1e-13, 1000).unwrap();
        let x_lu = op.solve_banded(&b).unwrap();
        for (a, b) in x_cg.iter().zip(&x_lu) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn indefinite_operator_uses_direct_solve() {
        let (_, op) = operator(10, |x, _| if x < 0.5 { 1.0 } else { -0.7 }, 0.0);
        assert!(!op.is_positive());
        let b = vec![1.0; op.unknowns()];
        let x = op.solve(&b, 1e-10, 10).unwrap();
        let mut ax = vec![0.0; b.len()];
        op.apply(&x, &mut ax);
        assert!(relative_residual(&ax, &b) < 1e-10);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let (_, op) = operator(30, |_, _| 1.0, 0.0);
        let b = vec![1.0; op.unknowns()];
        match conjugate_gradient(&op, &b, 1e-12, 3) {
            Err(Error::SolverFailure {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}

/// [`DirichletOperator`] over all nodes; boundary rows are zero, so vectors
/// that vanish on the boundary stay that way.
#[derive(Debug, Clone)]
pub(crate) struct PaddedOperator {
    nx: usize,
    ny: usize,
    diag: Vec<f64>,
    west: Vec<f64>,
    east: Vec<f64>,
    south: Vec<f64>,
    north: Vec<f64>,
}

impl PaddedOperator {
    /// `out = A·u` on interior nodes; boundary entries of `out` are left
    /// untouched and those of `u` must be zero.
    pub(crate) fn apply(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        assert!(u.len() == nx * self.ny && out.len() == u.len());
        for j in 1..self.ny - 1 {
            let r = j * nx;
            let (lo, hi) = (r + 1, r + nx - 1);
            let c = &u[lo..hi];
            let w = &u[lo - 1..hi - 1];
            let e = &u[lo + 1..hi + 1];
            let s = &u[lo - nx..hi - nx];
            let n = &u[lo + nx..hi + nx];
            let rows = out[lo..hi]
                .iter_mut()
                .zip(&self.diag[lo..hi])
                .zip(&self.west[lo..hi])
                .zip(&self.east[lo..hi])
                .zip(&self.south[lo..hi])
                .zip(&self.north[lo..hi]);
            for (k, (((((o, d), cw), ce), cs), cn)) in rows.enumerate() {
                *o = d * c[k] - cw * w[k] - ce * e[k] - cs * s[k] - cn * n[k];
            }
        }
    }
}
