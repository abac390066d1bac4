//! Complex linear solvers for the implicit Crank–Nicolson step.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thomas factorization of a constant tridiagonal matrix, reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    sub: Vec<Complex64>,
    /// Inverse of the eliminated diagonal.
    inv_pivot: Vec<Complex64>,
    /// Eliminated super-diagonal, `c'_i`.
    sup_prime: Vec<Complex64>,
}

impl Tridiagonal {
    /// `sub[i]` couples row `i` to `i - 1` (`sub[0]` unused), `sup[i]` couples
    /// row `i` to `i + 1` (last entry unused).
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        assert!(
            sub.len() == n && sup.len() == n,
            "tridiagonal bands must have equal length"
        );
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let mut sup_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * prev
            };
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::SolverNotConverged {
                    iterations: i,
                    residual: f64::INFINITY,
                });
            }
            inv_pivot[i] = pivot.inv();
            prev = sup[i] * inv_pivot[i];
            sup_prime[i] = prev;
        }
        Ok(Self {
            sub: sub.to_vec(),
            inv_pivot,
            sup_prime,
        })
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.inv_pivot.len());
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            let v = rhs[i] - self.sub[i] * rhs[i - 1];
            rhs[i] = v * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let v = rhs[i] - self.sup_prime[i] * rhs[i + 1];
            rhs[i] = v;
        }
    }
}

/// Unconjugated bilinear form `xᵀy`.
fn dot_u(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterativeSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
        }
    }
}

/// Conjugate orthogonal conjugate gradient for complex symmetric `A`
/// (`Aᵀ = A`, not Hermitian). `x` holds the initial guess on entry.
/// Returns the iteration count.
pub fn cocg(
    apply: impl Fn(&[Complex64], &mut [Complex64]),
    b: &[Complex64],
    x: &mut [Complex64],
    settings: IterativeSettings,
) -> Result<usize> {
    let n = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(0);
    }
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    apply(x, &mut q);
    let mut r: Vec<Complex64> = b.iter().zip(&q).map(|(bi, qi)| bi - qi).collect();
    let mut p = r.clone();
    let mut rho = dot_u(&r, &r);
    let mut residual = norm2(&r) / b_norm;
    for iteration in 0..settings.max_iterations {
        if residual <= settings.tolerance {
            return Ok(iteration);
        }
        apply(&p, &mut q);
        let pq = dot_u(&p, &q);
        if pq.norm() == 0.0 {
            break;
        }
        let alpha = rho / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        residual = norm2(&r) / b_norm;
        let rho_next = dot_u(&r, &r);
        let beta = rho_next / rho;
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if residual <= settings.tolerance {
        return Ok(settings.max_iterations);
    }
    Err(Error::SolverNotConverged {
        iterations: settings.max_iterations,
        residual,
    })
}
