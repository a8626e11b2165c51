//! Closed-form eigenvalue conditions for the symmetric step in the scaled
//! frame, and the point-interaction comparator on the unit interval.
//!
//! Scaled step: `w_L = v0·L²` on `|x| ≤ b/L` inside (−1/2, 1/2). Outside the
//! barrier an eigenfunction is `sin(ω y)` with `y` measured from the wall,
//! `y ∈ (0, l1)`, `l1 = 1/2 − b/L`; inside it is `a sinh(M z) + c cosh(M z)`
//! with `z ∈ (0, l2)`, `l2 = b/L`, `M = √(v0 L² − ω²)`. C¹ matching at the
//! barrier edge fixes `a = (ω/M) cos(ω l1)`, `c = sin(ω l1)`. The even ground
//! state needs a zero derivative at the centre, the odd first excited state
//! a zero value:
//!
//! ```text
//! branch 0:  tan(ω l1) = −(ω/M) · coth(M l2)
//! branch 1:  tan(ω l1) = −(ω/M) · tanh(M l2)
//! ```
//!
//! Both have their root with `ω l1 ∈ (π/2, π)` once `v0 L² > (π/l1)²`.

use std::f64::consts::PI;

use crate::error::{GapError, Result};
use crate::roots::bisect;

/// Relative bracket width at which the matching roots are accepted.
pub const OMEGA_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Even ground state.
    Ground,
    /// Odd first excited state.
    Excited,
}

impl Branch {
    pub fn index(self) -> usize {
        match self {
            Branch::Ground => 0,
            Branch::Excited => 1,
        }
    }
}

/// Solved matching conditions for both branches.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMatchingState {
    pub v0: f64,
    pub b: f64,
    pub length: f64,
    pub l1: f64,
    pub l2: f64,
    pub omega: [f64; 2],
    pub decay: [f64; 2],
    pub sinh_coef: [f64; 2],
    pub cosh_coef: [f64; 2],
}

impl StepMatchingState {
    pub fn solve(v0: f64, b: f64, length: f64) -> Result<Self> {
        let omega = [
            step_omega(v0, b, length, Branch::Ground)?,
            step_omega(v0, b, length, Branch::Excited)?,
        ];
        let l1 = 0.5 - b / length;
        let l2 = b / length;
        let decay = omega.map(|w| (v0 * length * length - w * w).sqrt());
        let sinh_coef = [0, 1].map(|j| omega[j] / decay[j] * (omega[j] * l1).cos());
        let cosh_coef = omega.map(|w| (w * l1).sin());
        Ok(Self {
            v0,
            b,
            length,
            l1,
            l2,
            omega,
            decay,
            sinh_coef,
            cosh_coef,
        })
    }

    /// Residual of the tangent form of the branch's matching equation.
    pub fn residual(&self, branch: Branch) -> f64 {
        let j = branch.index();
        tangent_residual(self.omega[j], self.v0, self.length, self.l1, self.l2, branch)
    }

    /// `λ₁ − λ₀ = (ω₁ − ω₀)(ω₁ + ω₀)` of the scaled operator.
    pub fn gap(&self) -> f64 {
        (self.omega[1] - self.omega[0]) * (self.omega[1] + self.omega[0])
    }

    /// Scaled-frame eigenfunction `j`, unnormalised, at `x ∈ (−1/2, 1/2)`.
    pub fn eigenfunction(&self, branch: Branch, x: f64) -> f64 {
        let j = branch.index();
        let parity = match branch {
            Branch::Ground => 1.0,
            Branch::Excited => {
                if x < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        // Work on the left half and reflect.
        let y = 0.5 - x.abs();
        if y <= self.l1 {
            parity * (self.omega[j] * y).sin()
        } else {
            let z = y - self.l1;
            let m = self.decay[j];
            parity * (self.sinh_coef[j] * (m * z).sinh() + self.cosh_coef[j] * (m * z).cosh())
        }
    }
}

fn tangent_residual(omega: f64, v0: f64, length: f64, l1: f64, l2: f64, branch: Branch) -> f64 {
    let m = (v0 * length * length - omega * omega).sqrt();
    let hyper = match branch {
        Branch::Ground => 1.0 / (m * l2).tanh(),
        Branch::Excited => (m * l2).tanh(),
    };
    (omega * l1).tan() + omega / m * hyper
}

/// Root `ω_j` of the branch's matching equation with `ω l1 ∈ (π/2, π)`.
pub fn step_omega(v0: f64, b: f64, length: f64, branch: Branch) -> Result<f64> {
    if !(v0 > 0.0 && b > 0.0 && length > 0.0) {
        return Err(GapError::Invalid(format!(
            "step needs v0, b, L > 0 (got {v0}, {b}, {length})"
        )));
    }
    let l1 = 0.5 - b / length;
    let l2 = b / length;
    let lo = 0.5 * PI / l1;
    let hi = PI / l1;
    if l1 <= 0.0 || v0 * length * length <= hi * hi {
        return Err(GapError::Bracket {
            lo,
            hi,
            reason: format!("L = {length} too small: need b < L/2 and v0·L² > (π/l1)²"),
        });
    }
    let barrier = v0 * length * length;
    // C¹ matching divided by cosh(M l2): continuous across the whole
    // bracket, positive at ω l1 = π/2 and negative at ω l1 = π.
    let matching = |omega: f64| {
        let m = (barrier - omega * omega).sqrt();
        let t = (m * l2).tanh();
        let (s, c) = (omega * l1).sin_cos();
        match branch {
            Branch::Ground => omega * c + m * s * t,
            Branch::Excited => omega * c * t + m * s,
        }
    };
    bisect(matching, lo, hi, OMEGA_REL_TOL)
}

/// Scaled gap with both wavenumbers: `(λ₁ − λ₀, ω₀, ω₁)`.
pub fn step_gap_scaled(v0: f64, b: f64, length: f64) -> Result<(f64, f64, f64)> {
    let state = StepMatchingState::solve(v0, b, length)?;
    Ok((state.gap(), state.omega[0], state.omega[1]))
}

/// Physical gap `Γ_v(L) = L⁻²·(λ₁ − λ₀)`.
pub fn step_gap_physical(v0: f64, b: f64, length: f64) -> Result<f64> {
    Ok(step_gap_scaled(v0, b, length)?.0 / (length * length))
}

/// Dirichlet Laplacian on (−1/2, 1/2) with a point interaction of strength
/// `strength` at 0, i.e. `u'(0⁺) − u'(0⁻) = strength·u(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaComparator {
    pub strength: f64,
    /// Ground-state wavenumber, `λ₀ = k0²`.
    pub k0: f64,
    pub gap: f64,
}

/// Odd states vanish at 0 and do not feel the interaction, so `λ₁ = 4π²`.
/// The even ground state `sin(k(x + 1/2))` on the left half has
/// `−2k cos(k/2) = strength·sin(k/2)`, i.e. `tan(k/2) = −2k/strength`,
/// with `k ∈ (π, 2π)`.
pub fn delta_gap(strength: f64) -> Result<DeltaComparator> {
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(GapError::Invalid(format!(
            "strength must be non-negative, got {strength}"
        )));
    }
    let two_pi = 2.0 * PI;
    let k0 = if strength == 0.0 {
        PI
    } else {
        bisect(
            |k| 2.0 * k * (0.5 * k).cos() + strength * (0.5 * k).sin(),
            PI,
            two_pi,
            0.0,
        )?
    };
    Ok(DeltaComparator {
        strength,
        k0,
        gap: (two_pi - k0) * (two_pi + k0),
    })
}

/// Residual of `tan(k/2) + 2k/strength` at the returned root.
pub fn delta_residual(d: &DeltaComparator) -> f64 {
    (0.5 * d.k0).tan() + 2.0 * d.k0 / d.strength
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_solve_the_tangent_form() {
        for &(v0, b, length) in &[(1.0, 1.0, 10.0), (1.0, 1.0, 1e4), (4.0, 0.5, 37.0), (0.3, 2.0, 200.0)] {
            let s = StepMatchingState::solve(v0, b, length).unwrap();
            assert!(s.omega[0] < s.omega[1]);
            for branch in [Branch::Ground, Branch::Excited] {
                assert!(s.residual(branch).abs() <= 1e-10, "{v0} {b} {length} {branch:?}");
            }
        }
    }

    #[test]
    fn hard_wall_limit() {
        // π/l1 − ω_j → (2π/(√v0 L))·h_j(√v0 b)/l1 with h = coth (ground), tanh (excited).
        let (v0, b, length) = (1.0, 1.0, 1e4);
        let s = StepMatchingState::solve(v0, b, length).unwrap();
        let hard = PI / s.l1;
        let kappa = v0.sqrt() * b;
        let predicted = [1.0 / kappa.tanh(), kappa.tanh()].map(|h| 2.0 * PI / (v0.sqrt() * length) * h / s.l1);
        for (omega, expected) in s.omega.iter().zip(predicted) {
            let shift = hard - omega;
            assert!(shift > 0.0 && shift <= 20.0 / length);
            assert!((shift - expected).abs() <= 1e-3 * expected, "{shift} vs {}", expected);
        }
    }

    #[test]
    fn barrier_decay_length_converges() {
        let (v0, b) = (2.0, 0.7);
        let s = StepMatchingState::solve(v0, b, 1e4).unwrap();
        let limit = v0.sqrt() * b;
        for m in s.decay {
            assert!((m * s.l2 - limit).abs() <= 1e-2 * limit);
        }
    }

    #[test]
    fn eigenfunction_is_c1_at_the_barrier() {
        let s = StepMatchingState::solve(1.0, 1.0, 20.0).unwrap();
        let edge = -0.5 + s.l1;
        let d = 1e-7;
        for branch in [Branch::Ground, Branch::Excited] {
            let left = s.eigenfunction(branch, edge - d);
            let right = s.eigenfunction(branch, edge + d);
            assert!((left - right).abs() < 1e-5);
            let dl = (s.eigenfunction(branch, edge - d) - s.eigenfunction(branch, edge - 2.0 * d)) / d;
            let dr = (s.eigenfunction(branch, edge + 2.0 * d) - s.eigenfunction(branch, edge + d)) / d;
            assert!((dl - dr).abs() < 1e-3 * dl.abs().max(1.0));
        }
        assert!(s.eigenfunction(Branch::Excited, 0.0).abs() < 1e-9);
    }

    #[test]
    fn too_short_interval_has_no_bracket() {
        assert!(matches!(
            step_omega(1.0, 1.0, 2.5, Branch::Ground),
            Err(GapError::Bracket { .. })
        ));
        assert!(matches!(
            step_omega(1.0, 1.0, 1.5, Branch::Excited),
            Err(GapError::Bracket { .. })
        ));
    }

    #[test]
    fn gap_is_positive_and_decays() {
        let mut previous = f64::INFINITY;
        for length in [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0] {
            let g = step_gap_physical(1.0, 1.0, length).unwrap();
            assert!(g > 0.0 && g < previous);
            previous = g;
        }
    }

    #[test]
    fn free_delta_gap() {
        let d = delta_gap(0.0).unwrap();
        assert!((d.gap - 3.0 * PI * PI).abs() <= 1e-12 * 3.0 * PI * PI);
    }

    #[test]
    fn delta_root_residual() {
        for strength in [0.5, 10.0, 100.0, 1e4, 1e7] {
            let d = delta_gap(strength).unwrap();
            assert!(d.k0 > PI && d.k0 < 2.0 * PI);
            assert!(delta_residual(&d).abs() < 1e-10, "{strength}");
        }
    }

    #[test]
    fn delta_gap_monotone_and_rescaled_increasing() {
        let strengths = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4];
        let gaps: Vec<f64> = strengths.iter().map(|&s| delta_gap(s).unwrap().gap).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        let scaled: Vec<f64> = strengths.iter().zip(&gaps).map(|(s, g)| s * g).collect();
        assert!(scaled.windows(2).all(|w| w[1] > w[0]));
        assert!(scaled.iter().all(|&v| v < 32.0 * PI * PI));
    }
}
