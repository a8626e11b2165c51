//! The density difference `ψ = |φ₁|² − |φ₀|²` and the Hellmann–Feynman rate
//! `dΓ/dt = ∫ v·ψ` of the gap along the coupling path `t·v`.

use crate::eigensolver::{
    fd_eigenpairs, lowest_eigenvalues_fd, sample_potential, spectral_gap, trapezoid, Grid, ProblemSpec,
};
use crate::error::{GapError, Result};

/// Coupling step of the finite-difference derivative oracle.
pub const FD_STEP: f64 = 1e-3;

/// `ψ` on the interior nodes of the solver's fine grid.
#[derive(Debug, Clone)]
pub struct DensityDifference {
    pub grid: Grid,
    pub psi: Vec<f64>,
    /// Innermost sign change of `ψ` on `x ≥ 0`, if there is one.
    pub x0: Option<f64>,
}

impl DensityDifference {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, self.psi.iter().copied())
    }

    /// Sign changes of `ψ` between adjacent nodes with `x > 0`.
    pub fn positive_axis_crossings(&self) -> usize {
        let signs: Vec<f64> = self
            .grid
            .nodes()
            .zip(&self.psi)
            .filter(|(x, v)| *x > 0.0 && **v != 0.0)
            .map(|(_, v)| v.signum())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// `max |ψ(x) − ψ(−x)|` over mirrored node pairs.
    pub fn asymmetry(&self) -> f64 {
        let n = self.psi.len();
        (0..n / 2)
            .map(|i| (self.psi[i] - self.psi[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

pub fn psi_l(spec: &ProblemSpec, resolution: f64) -> Result<DensityDifference> {
    let r = lowest_eigenvalues_fd(spec, 2, resolution)?;
    let psi: Vec<f64> = r.eigenfunctions[1]
        .iter()
        .zip(&r.eigenfunctions[0])
        .map(|(a, b)| a * a - b * b)
        .collect();
    let x0 = innermost_crossing(&r.grid, &psi);
    Ok(DensityDifference { grid: r.grid, psi, x0 })
}

/// First sign change of `values` moving outward from the centre along the
/// positive axis, located by linear interpolation. A node that is exactly
/// zero between values of opposite sign is returned as is.
fn innermost_crossing(grid: &Grid, values: &[f64]) -> Option<f64> {
    let centre = 0.5 * (grid.a + grid.b);
    let start = (0..grid.n).find(|&i| grid.node(i) >= centre)?;
    let mut last: Option<(f64, f64)> = None;
    for i in start..grid.n {
        let (x, v) = (grid.node(i), values[i]);
        if v == 0.0 {
            let next = values.get(i + 1).copied().unwrap_or(0.0);
            if last.is_some_and(|(_, lv)| lv * next < 0.0) {
                return Some(x);
            }
            continue;
        }
        if let Some((lx, lv)) = last {
            if lv * v < 0.0 {
                return Some(lx + (x - lx) * lv / (lv - v));
            }
        }
        last = Some((x, v));
    }
    None
}

/// `dΓ/dt` at the spec's coupling by trapezoid quadrature of `v·ψ`, where
/// `v` is the uncoupled potential in the spec's frame.
///
/// On a fixed grid the quadrature is the exact derivative of the discrete
/// gap, so the coarse and fine quadratures are combined with the same
/// Richardson weights as the eigenvalues themselves.
pub fn gap_derivative(spec: &ProblemSpec, resolution: f64) -> Result<f64> {
    spec.validate()?;
    let coarse = Grid::for_spec(spec, resolution)?;
    let fine = coarse.refined();
    let on = |grid: &Grid| -> Result<f64> {
        let (_, u) = fd_eigenpairs(spec, grid, 2)?;
        let psi: Vec<f64> = u[1].iter().zip(&u[0]).map(|(a, b)| a * a - b * b).collect();
        let d = DensityDifference {
            grid: *grid,
            psi,
            x0: None,
        };
        Ok(weighted_integral(spec, &d, 0.0))
    };
    Ok((4.0 * on(&fine)? - on(&coarse)?) / 3.0)
}

/// `∫ (v − c)·ψ` on the density's grid.
pub fn weighted_integral(spec: &ProblemSpec, d: &DensityDifference, c: f64) -> f64 {
    let unit = spec.clone().with_coupling(1.0);
    let v = sample_potential(&unit, &d.grid);
    trapezoid(&d.grid, v.iter().zip(&d.psi).map(|(v, p)| (v - c) * p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfRow {
    pub t: f64,
    pub gap: f64,
    pub hf_deriv: f64,
    pub fd_deriv: f64,
}

/// Gap and both derivative estimates along `t·v`. The finite difference is
/// centred with step [`FD_STEP`], or the one-sided second-order formula when
/// `t` is too close to zero for the backward point to exist.
pub fn t_sweep(spec: &ProblemSpec, t_grid: &[f64], resolution: f64) -> Result<Vec<HfRow>> {
    if t_grid.is_empty() {
        return Err(GapError::Invalid("t-grid is empty".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GapError::Invalid(
            "t-grid must be strictly increasing and non-negative".into(),
        ));
    }
    let gap_at = |t: f64| spectral_gap(&spec.clone().with_coupling(t), resolution).map(|g| g.gap);
    t_grid
        .iter()
        .map(|&t| {
            let coupled = spec.clone().with_coupling(t);
            let gap = gap_at(t)?;
            let hf_deriv = gap_derivative(&coupled, resolution)?;
            let h = FD_STEP;
            let fd_deriv = if t >= h {
                (gap_at(t + h)? - gap_at(t - h)?) / (2.0 * h)
            } else {
                (-3.0 * gap + 4.0 * gap_at(t + h)? - gap_at(t + 2.0 * h)?) / (2.0 * h)
            };
            Ok(HfRow {
                t,
                gap,
                hf_deriv,
                fd_deriv,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use std::f64::consts::PI;

    #[test]
    fn free_density_matches_closed_form() {
        let d = psi_l(&ProblemSpec::physical(Potential::Zero, 1.0), 40.0).unwrap();
        for (x, p) in d.grid.nodes().zip(&d.psi) {
            let s1 = (2.0 * PI * (x + 0.5)).sin();
            let s0 = (PI * (x + 0.5)).sin();
            assert!((p - (2.0 * s1 * s1 - 2.0 * s0 * s0)).abs() < 1e-6);
        }
        // 2sin²(2πu) = 2sin²(πu) at u = 1/3, i.e. x = 1/6.
        assert!((d.x0.unwrap() - 1.0 / 6.0).abs() < 1e-3);
    }

    #[test]
    fn mean_zero_and_symmetric() {
        let d = psi_l(&ProblemSpec::physical(Potential::bump(2.0, 1.0), 10.0), 40.0).unwrap();
        assert!(d.integral().abs() < 1e-8);
        assert!(d.asymmetry() < 1e-8);
    }

    #[test]
    fn bump_density_is_negative_inside_the_crossing() {
        let d = psi_l(&ProblemSpec::physical(Potential::bump(1.0, 1.0), 10.0), 40.0).unwrap();
        let x0 = d.x0.unwrap();
        let tol = 1e-10;
        for (x, p) in d.grid.nodes().zip(&d.psi) {
            if x.abs() < x0 - d.grid.spacing() {
                assert!(*p <= tol, "psi({x}) = {p}");
            } else if x.abs() > x0 + d.grid.spacing() {
                assert!(*p >= -tol, "psi({x}) = {p}");
            }
        }
        assert_eq!(d.positive_axis_crossings(), 1);
    }

    #[test]
    fn zero_potential_has_zero_rate() {
        let r = gap_derivative(&ProblemSpec::physical(Potential::Zero, 5.0), 40.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn constant_shift_does_not_change_rate() {
        let spec = ProblemSpec::physical(Potential::step(1.0, 1.0), 10.0);
        let d = psi_l(&spec, 40.0).unwrap();
        let base = weighted_integral(&spec, &d, 0.0);
        for c in [-3.0, 0.7, 10.0] {
            assert!((weighted_integral(&spec, &d, c) - base).abs() < 1e-8 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn crossing_detection() {
        let grid = Grid::new(-2.0, 2.0, 3);
        // Nodes −1, 0, 1.
        assert_eq!(innermost_crossing(&grid, &[1.0, -1.0, 1.0]), Some(0.5));
        assert_eq!(innermost_crossing(&grid, &[1.0, -1.0, -2.0]), None);
        // Nodes −2..2; an exact zero between opposite signs resolves to its node.
        let grid = Grid::new(-3.0, 3.0, 5);
        assert_eq!(innermost_crossing(&grid, &[0.0, 0.0, -1.0, 0.0, 1.0]), Some(1.0));
        assert_eq!(innermost_crossing(&grid, &[0.0, 0.0, -1.0, 0.0, -1.0]), None);
    }

    #[test]
    fn t_grid_validation() {
        let spec = ProblemSpec::physical(Potential::Zero, 5.0);
        assert!(t_sweep(&spec, &[], 40.0).is_err());
        assert!(t_sweep(&spec, &[1.0, 0.5], 40.0).is_err());
        assert!(t_sweep(&spec, &[-1.0], 40.0).is_err());
    }
}
