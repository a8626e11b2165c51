//! Prüfer-phase shooting, independent of the finite-difference path.
//!
//! With `u = r sin θ`, `u' = s·r cos θ` the phase obeys
//! `θ' = s cos²θ + (λ − V)/s · sin²θ`, `θ(a) = 0`. The phase is increasing in
//! `λ`, and `λ` is the `j`-th Dirichlet eigenvalue exactly when
//! `θ(b) = (j + 1)π`, so each eigenvalue is bisected on that condition.

use std::f64::consts::PI;

use super::ProblemSpec;
use crate::error::{GapError, Result};

/// Integrator tolerance for the reported eigenvalues.
const FINE_TOL: f64 = 1e-12;
/// A looser pass whose disagreement with the fine pass is the error estimate.
const COARSE_TOL: f64 = 1e-10;
const LAMBDA_REL_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub eigenvalues: Vec<f64>,
    pub error_estimates: Vec<f64>,
}

pub fn shooting_oracle(spec: &ProblemSpec, k: usize) -> Result<ShootingResult> {
    spec.validate()?;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut error_estimates = Vec::with_capacity(k);
    for j in 0..k {
        let fine = eigenvalue(spec, j, FINE_TOL)?;
        let coarse = eigenvalue(spec, j, COARSE_TOL)?;
        eigenvalues.push(fine);
        error_estimates.push((fine - coarse).abs() + 4.0 * LAMBDA_REL_TOL * fine.abs());
    }
    Ok(ShootingResult {
        eigenvalues,
        error_estimates,
    })
}

/// Phase `θ(b)` for trial eigenvalue `lambda`.
pub fn terminal_phase(spec: &ProblemSpec, lambda: f64, tol: f64) -> Result<f64> {
    let (a, b) = spec.interval();
    let len = b - a;
    let scale = lambda.max((PI / len).powi(2)).sqrt();
    let mut edges = vec![a];
    edges.extend(spec.breakpoints());
    edges.push(b);
    let mut theta = 0.0;
    for w in edges.windows(2) {
        // The potential is sampled strictly inside the segment so a jump at
        // an endpoint is seen from the correct side.
        let nudge = 1e-10 * (w[1] - w[0]);
        let (lo, hi) = (w[0] + nudge, w[1] - nudge);
        let rhs = |x: f64, theta: f64| {
            let (s, c) = theta.sin_cos();
            scale * c * c + (lambda - spec.potential_at(x.clamp(lo, hi))) / scale * s * s
        };
        theta = dopri5(&rhs, w[0], w[1], theta, tol)?;
    }
    Ok(theta)
}

fn eigenvalue(spec: &ProblemSpec, j: usize, tol: f64) -> Result<f64> {
    let (a, b) = spec.interval();
    let free = ((j + 1) as f64 * PI / (b - a)).powi(2);
    // Min-max against the free problem: free ≤ λ_j ≤ free + sup V.
    let mut lo = 0.999 * free;
    let mut hi = 1.001 * (free + spec.potential_sup()) + f64::MIN_POSITIVE;
    let target = (j + 1) as f64 * PI;
    let f_lo = terminal_phase(spec, lo, tol)? - target;
    let f_hi = terminal_phase(spec, hi, tol)? - target;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(GapError::Bracket {
            lo,
            hi,
            reason: format!("terminal phase does not cross {}π", j + 1),
        });
    }
    for _ in 0..200 {
        if hi - lo <= LAMBDA_REL_TOL * hi.abs() {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if terminal_phase(spec, mid, tol)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(GapError::Convergence {
        what: "shooting bisection",
        iterations: 200,
    })
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of a scalar ODE from `x0` to `x1`.
fn dopri5(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, tol: f64) -> Result<f64> {
    let span = x1 - x0;
    let mut x = x0;
    let mut y = y0;
    let mut h = span / 64.0;
    let h_max = span / 8.0;
    let mut k = [0.0; 7];
    k[0] = f(x, y);
    for _ in 0..MAX_STEPS {
        if x >= x1 {
            return Ok(y);
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let incr: f64 = (0..s).map(|i| A[s][i] * k[i]).sum();
            k[s] = f(x + C[s] * h, y + h * incr);
        }
        let y_new = y + h * (0..7).map(|i| B[i] * k[i]).sum::<f64>();
        let err = h * (0..7).map(|i| E[i] * k[i]).sum::<f64>();
        let scale = tol * (1.0 + y.abs().max(y_new.abs()));
        let ratio = err.abs() / scale;
        if ratio <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            // First-same-as-last: stage 7 is f at the new point.
            k[0] = k[6];
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(h_max);
        if h <= span * 1e-15 {
            return Err(GapError::Convergence {
                what: "Prüfer integration (step underflow)",
                iterations: 0,
            });
        }
    }
    Err(GapError::Convergence {
        what: "Prüfer integration",
        iterations: MAX_STEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    #[test]
    fn integrator_solves_exponential() {
        let y = dopri5(&|_, y| -2.0 * y, 0.0, 1.0, 1.0, 1e-12).unwrap();
        assert!((y - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn free_interval() {
        let r = shooting_oracle(&ProblemSpec::physical(Potential::Zero, PI), 2).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-8);
        assert!((r.eigenvalues[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn phase_counts_eigenvalues() {
        let spec = ProblemSpec::physical(Potential::step(1.0, 1.0), 6.0);
        let r = shooting_oracle(&spec, 3).unwrap();
        for (j, &lambda) in r.eigenvalues.iter().enumerate() {
            let below = terminal_phase(&spec, lambda * (1.0 - 1e-6), 1e-12).unwrap();
            let above = terminal_phase(&spec, lambda * (1.0 + 1e-6), 1e-12).unwrap();
            let target = (j + 1) as f64 * PI;
            assert!(below < target && above > target);
        }
    }
}
