//! Preconditioned conjugate gradients with a Lanczos condition-number
//! estimate assembled from the CG scalars.

use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, dot, norm2, LinalgError};
use crate::math;

/// Result of a PCG run. The eigenvalue estimates refer to the
/// preconditioned operator `M A` and come from the Lanczos tridiagonal
/// built out of the CG coefficients.
#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||r_k||_2 / ||r_0||_2` after each iteration (unpreconditioned).
    pub residual_history: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
}

/// Runs PCG on `A x = b` where `apply_a` realizes `y = A x` and `apply_m`
/// applies the preconditioner (an approximation of the inverse of `A`).
///
/// Terminates when the unpreconditioned residual satisfies
/// `||r_k|| <= rel_tol * ||r_0||`. Hitting `max_iter` yields a
/// non-converged outcome carrying the partial data; an indefinite
/// direction (`p'Ap <= 0`) is an error.
pub fn pcg(
    apply_a: &dyn Fn(&[f64], &mut [f64]),
    apply_m: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome, LinalgError> {
    let n = b.len();
    if x0.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    apply_a(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0_norm = norm2(&r);
    let mut history = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    if r0_norm == 0.0 || n == 0 {
        return Ok(PcgOutcome {
            x,
            iterations: 0,
            converged: true,
            residual_history: history,
            lambda_min: 1.0,
            lambda_max: 1.0,
            kappa: 1.0,
        });
    }

    apply_m(&r, &mut z);
    p.copy_from_slice(&z);
    let mut rho = dot(&r, &z);
    let mut converged = false;
    let mut iterations = 0;
    // operator scale estimate over the directions seen so far; used to tell
    // roundoff-level stagnation (search direction collapsed into a null
    // space of a singular but consistent system) from real indefiniteness
    let mut op_scale: f64 = 0.0;

    for _ in 0..max_iter {
        apply_a(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(LinalgError::IndefiniteOperator(pap));
        }
        if pap <= 0.0 {
            let pp = dot(&p, &p);
            let stagnated = pp == 0.0
                || (op_scale > 0.0 && math::abs(pap) <= 1e-12 * pp * op_scale);
            if stagnated {
                break;
            }
            return Err(LinalgError::IndefiniteOperator(pap));
        }
        op_scale = f64::max(op_scale, norm2(&ap) / norm2(&p));
        let alpha = rho / pap;
        alphas.push(alpha);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        iterations += 1;
        let rel = norm2(&r) / r0_norm;
        history.push(rel);
        if rel <= rel_tol {
            converged = true;
            break;
        }
        apply_m(&r, &mut z);
        let rho_next = dot(&r, &z);
        if rho_next <= 0.0 || !rho_next.is_finite() {
            // residual fell into the preconditioner's null space
            break;
        }
        let beta = rho_next / rho;
        betas.push(beta);
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rho = rho_next;
    }

    let (lambda_min, lambda_max) = if alphas.is_empty() {
        (1.0, 1.0)
    } else {
        lanczos_extremes(&alphas, &betas)?
    };
    Ok(PcgOutcome {
        x,
        iterations,
        converged,
        residual_history: history,
        lambda_min,
        lambda_max,
        kappa: lambda_max / lambda_min,
    })
}

/// Builds the Lanczos tridiagonal from the CG scalars and returns its
/// extreme eigenvalues.
fn lanczos_extremes(alphas: &[f64], betas: &[f64]) -> Result<(f64, f64), LinalgError> {
    let m = alphas.len();
    if m == 0 {
        return Err(LinalgError::Empty);
    }
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for j in 0..m {
        diag[j] = 1.0 / alphas[j];
        if j > 0 {
            diag[j] += betas[j - 1] / alphas[j - 1];
        }
        if j + 1 < m {
            off[j] = math::sqrt(betas[j]) / alphas[j];
        }
    }
    tridiag_eigs(&diag, &off)
}

/// Extreme eigenvalues of a symmetric tridiagonal matrix via bisection on
/// the Sturm sequence, to an absolute tolerance of 1e-12.
pub fn tridiag_eigs(diag: &[f64], off: &[f64]) -> Result<(f64, f64), LinalgError> {
    let n = diag.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    debug_assert_eq!(off.len(), n - 1);
    if n == 1 {
        return Ok((diag[0], diag[0]));
    }

    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += math::abs(off[i - 1]);
        }
        if i + 1 < n {
            radius += math::abs(off[i]);
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }

    // number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { 1e-300 } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };

    let bisect = |want_at_least: usize| -> f64 {
        let mut a = lo - 1e-12;
        let mut b = hi + 1e-12;
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                // interval is down to a few ulps; 1e-12 is unreachable here
                break;
            }
            if count_below(mid) >= want_at_least {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };

    let min = bisect(1);
    let max = bisect(n);
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_apply(d: &'static [f64]) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = d[i] * x[i];
            }
        }
    }

    fn identity(x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    #[test]
    fn identity_converges_immediately() {
        let apply = diag_apply(&[1.0, 1.0, 1.0]);
        let out = pcg(&apply, &identity, &[1.0, -2.0, 0.5], &[0.0; 3], 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.kappa - 1.0).abs() < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn two_eigenvalues_two_steps() {
        let apply = diag_apply(&[1.0, 4.0]);
        let out = pcg(&apply, &identity, &[1.0, 1.0], &[0.0; 2], 1e-12, 10).unwrap();
        assert!(out.iterations <= 2);
        assert!((out.kappa - 4.0).abs() < 1e-8, "kappa {}", out.kappa);
        assert!((out.x[0] - 1.0).abs() < 1e-12);
        assert!((out.x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn indefinite_reported() {
        let apply = diag_apply(&[1.0, -1.0]);
        let res = pcg(&apply, &identity, &[1.0, 1.0], &[0.0; 2], 1e-12, 10);
        assert!(matches!(res, Err(LinalgError::IndefiniteOperator(_))));
    }

    #[test]
    fn non_convergence_keeps_partial_data() {
        let apply = diag_apply(&[1.0, 100.0, 10000.0]);
        let out = pcg(&apply, &identity, &[1.0, 1.0, 1.0], &[0.0; 3], 1e-30, 2).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.residual_history.len(), 2);
    }

    #[test]
    fn tridiag_single_entry() {
        assert_eq!(tridiag_eigs(&[3.0], &[]).unwrap(), (3.0, 3.0));
        assert!(matches!(tridiag_eigs(&[], &[]), Err(LinalgError::Empty)));
    }

    #[test]
    fn tridiag_two_by_two() {
        let (lo, hi) = tridiag_eigs(&[2.0, 2.0], &[1.0]).unwrap();
        assert!((lo - 1.0).abs() < 1e-10);
        assert!((hi - 3.0).abs() < 1e-10);
    }

    #[test]
    fn toeplitz_spectrum() {
        // tridiag(-1, 2, -1) of size 20: eigenvalues 2 - 2 cos(k pi / 21)
        let n = 20;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let (lo, hi) = tridiag_eigs(&diag, &off).unwrap();
        let pi = core::f64::consts::PI;
        let want_lo = 2.0 - 2.0 * (pi / 21.0).cos();
        let want_hi = 2.0 - 2.0 * (20.0 * pi / 21.0).cos();
        assert!((lo - want_lo).abs() < 1e-10);
        assert!((hi - want_hi).abs() < 1e-10);
    }
}
