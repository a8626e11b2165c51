//! The finite-difference Schrödinger matrix `−Δ_h + V`: Sturm-sequence
//! bisection for its lowest eigenvalues and inverse iteration for their
//! eigenvectors.

use crate::error::{GapError, Result};

const MAX_BISECTION_STEPS: usize = 256;
const MAX_INVERSE_STEPS: usize = 16;

/// Bisection for the `k` lowest eigenvalues given an eigenvalue counter and
/// an enclosure `[lo, hi]` of the spectrum.
fn bisect_lowest(count: impl Fn(f64) -> usize, lo: f64, hi: f64, k: usize, rel_tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(k);
    let mut lo_start = lo;
    for index in 0..k {
        let (mut lo, mut hi) = (lo_start, hi);
        let mut converged = false;
        for _ in 0..MAX_BISECTION_STEPS {
            if hi - lo <= rel_tol * lo.abs().max(hi.abs()) {
                converged = true;
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                // Adjacent doubles; nothing left to split.
                converged = true;
                break;
            }
            if count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged {
            return Err(GapError::Convergence {
                what: "Sturm bisection",
                iterations: MAX_BISECTION_STEPS,
            });
        }
        out.push(0.5 * (lo + hi));
        lo_start = lo;
    }
    Ok(out)
}

/// `−Δ_h + V`: diagonal `2/h² + V_i`, off-diagonal `−1/h²`.
///
/// The Sturm count runs on `p_i = h²·pivot_i − 1`, which obeys
/// `p_i = p_{i−1}/(1 + p_{i−1}) + h²V_i − h²λ` with `p_{−1} = ∞`. No O(1/h²)
/// quantities are ever subtracted, so eigenvalues far below `‖T‖` keep
/// their relative accuracy on fine grids.
#[derive(Debug, Clone)]
pub struct SchrodingerMatrix {
    spacing: f64,
    /// `h²·V_i`.
    scaled_potential: Vec<f64>,
}

impl SchrodingerMatrix {
    pub fn new(spacing: f64, potential: &[f64]) -> Self {
        assert!(!potential.is_empty() && spacing > 0.0);
        let h2 = spacing * spacing;
        Self {
            spacing,
            scaled_potential: potential.iter().map(|v| h2 * v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.scaled_potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled_potential.is_empty()
    }

    pub fn sturm_count(&self, lambda: f64) -> usize {
        let mu = self.spacing * self.spacing * lambda;
        let guard = f64::EPSILON * f64::EPSILON;
        let mut count = 0;
        let mut ratio = 1.0; // p/(1 + p) with p = ∞
        for &w in &self.scaled_potential {
            let mut p = ratio + (w - mu);
            let mut pivot = 1.0 + p;
            if pivot <= guard {
                count += 1;
                if pivot > -guard {
                    pivot = -guard;
                    p = pivot - 1.0;
                }
            }
            ratio = p / pivot;
        }
        count
    }

    pub fn lowest_eigenvalues(&self, k: usize, rel_tol: f64) -> Result<Vec<f64>> {
        assert!(k <= self.len());
        let h2 = self.spacing * self.spacing;
        let (min_w, max_w) = self
            .scaled_potential
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
                (lo.min(w), hi.max(w))
            });
        bisect_lowest(|x| self.sturm_count(x), min_w / h2, (max_w + 4.0) / h2, k, rel_tol)
    }

    /// `h²(T − σ) = L·D·Lᵀ` without pivoting, in the same `p = h²·pivot − 1`
    /// variables as the Sturm count. Returns the pivots `1 + p_i`; pivots that
    /// vanish to working precision are replaced by a tiny value of the same
    /// sign so the solve amplifies the eigenvector at `σ`.
    fn shifted_pivots(&self, shift: f64) -> Vec<f64> {
        let mu = self.spacing * self.spacing * shift;
        let guard = f64::EPSILON * f64::EPSILON;
        let mut pivots = Vec::with_capacity(self.len());
        let mut ratio = 1.0;
        for &w in &self.scaled_potential {
            let mut p = ratio + (w - mu);
            let mut pivot = 1.0 + p;
            if pivot.abs() < guard {
                pivot = if pivot < 0.0 { -guard } else { guard };
                p = pivot - 1.0;
            }
            pivots.push(pivot);
            ratio = p / pivot;
        }
        pivots
    }

    /// Solves `h²(T − σ)·y = x` in place given [`Self::shifted_pivots`].
    /// The unit lower factor has subdiagonal `−1/pivot_{i−1}`.
    fn solve_shifted(pivots: &[f64], x: &mut [f64]) {
        let n = x.len();
        for i in 1..n {
            x[i] += x[i - 1] / pivots[i - 1];
        }
        for (xi, d) in x.iter_mut().zip(pivots) {
            *xi /= d;
        }
        for i in (0..n - 1).rev() {
            x[i] += x[i + 1] / pivots[i];
        }
    }

    /// Eigenvector for the eigenvalue closest to `shift`, unit Euclidean norm.
    pub fn inverse_iteration(&self, shift: f64) -> Result<Vec<f64>> {
        let pivots = self.shifted_pivots(shift);
        let n = self.len();
        // Deterministic start vector with generic overlap on every eigenvector.
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
                0.5 + (t - t.floor())
            })
            .collect();
        normalize(&mut x);
        // Rounding keeps the iterates moving by O(ε√n) once converged.
        let tol = 1e-11 * (n as f64).sqrt();
        let mut previous_change = f64::INFINITY;
        for step in 0..MAX_INVERSE_STEPS {
            let mut y = x.clone();
            Self::solve_shifted(&pivots, &mut y);
            normalize(&mut y);
            let dot: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
            let change = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            x = y;
            let stalled = step >= 2 && change < 1e-6 && change > 0.5 * previous_change;
            if change < tol || stalled {
                return Ok(x);
            }
            previous_change = change;
        }
        Err(GapError::Convergence {
            what: "inverse iteration",
            iterations: MAX_INVERSE_STEPS,
        })
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Free Laplacian on n interior nodes of (0, 1).
    fn laplacian(n: usize) -> SchrodingerMatrix {
        SchrodingerMatrix::new(1.0 / (n + 1) as f64, &vec![0.0; n])
    }

    fn exact_laplacian_eigenvalue(n: usize, j: usize) -> f64 {
        let h = 1.0 / (n + 1) as f64;
        let s = ((j + 1) as f64 * PI * h / 2.0).sin();
        4.0 / (h * h) * s * s
    }

    /// `(T − σ)·x` for the matrix with spacing `h` and potential `v`.
    fn apply_shifted(h: f64, v: &[f64], shift: f64, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                (2.0 * x[i] - left - right) / (h * h) + (v[i] - shift) * x[i]
            })
            .collect()
    }

    #[test]
    fn sturm_count_brackets_known_spectrum() {
        let t = laplacian(50);
        let e0 = exact_laplacian_eigenvalue(50, 0);
        let e1 = exact_laplacian_eigenvalue(50, 1);
        assert_eq!(t.sturm_count(0.5 * e0), 0);
        assert_eq!(t.sturm_count(0.5 * (e0 + e1)), 1);
        assert_eq!(t.sturm_count(1e9), 50);
    }

    #[test]
    fn sturm_count_at_an_exact_eigenvalue() {
        // Spacing 1: eigenvalues 2 − √2, 2, 2 + √2; λ = 2 makes a pivot vanish.
        let t = SchrodingerMatrix::new(1.0, &[0.0; 3]);
        assert_eq!(t.sturm_count(2.0 - 1e-12), 1);
        assert_eq!(t.sturm_count(2.0 + 1e-12), 2);
    }

    #[test]
    fn bisection_matches_closed_form() {
        let n = 200;
        let t = laplacian(n);
        let ev = t.lowest_eigenvalues(5, 1e-13).unwrap();
        for (j, &v) in ev.iter().enumerate() {
            let exact = exact_laplacian_eigenvalue(n, j);
            assert!((v - exact).abs() <= 1e-12 * exact, "j={j}: {v} vs {exact}");
        }
    }

    #[test]
    fn small_matrix_spectrum() {
        let t = SchrodingerMatrix::new(1.0, &[0.0; 3]);
        let ev = t.lowest_eigenvalues(3, 1e-14).unwrap();
        let s2 = 2f64.sqrt();
        for (v, e) in ev.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((v - e).abs() < 1e-13);
        }
    }

    #[test]
    fn potential_shifts_spectrum() {
        let n = 100;
        let h = 1.0 / (n + 1) as f64;
        let t = SchrodingerMatrix::new(h, &vec![3.5; n]);
        let ev = t.lowest_eigenvalues(2, 1e-14).unwrap();
        for (j, v) in ev.iter().enumerate() {
            let exact = exact_laplacian_eigenvalue(n, j) + 3.5;
            assert!((v - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn inverse_iteration_recovers_sines() {
        let n = 100;
        let t = laplacian(n);
        for j in 0..3 {
            let lambda = t.lowest_eigenvalues(j + 1, 1e-14).unwrap()[j];
            let v = t.inverse_iteration(lambda).unwrap();
            let mut exact: Vec<f64> = (1..=n)
                .map(|i| ((j + 1) as f64 * PI * i as f64 / (n + 1) as f64).sin())
                .collect();
            normalize(&mut exact);
            let sign = if v[0] * exact[0] < 0.0 { -1.0 } else { 1.0 };
            let err = v
                .iter()
                .zip(&exact)
                .map(|(a, b)| (sign * a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "j={j}: {err}");
        }
    }

    #[test]
    fn shifted_solve_with_negative_pivots() {
        let v = [0.0, 40.0, 3.0, 0.5, 12.0, 1.0];
        let h = 0.3;
        let t = SchrodingerMatrix::new(h, &v);
        // Between eigenvalues, so some pivots are negative.
        let shift = 30.0;
        let pivots = t.shifted_pivots(shift);
        assert!(pivots.iter().any(|&d| d < 0.0));
        let rhs = [1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let mut x = rhs;
        SchrodingerMatrix::solve_shifted(&pivots, &mut x);
        let back = apply_shifted(h, &v, shift, &x);
        for (b, r) in back.iter().zip(rhs) {
            assert!((b * h * h - r).abs() < 1e-12, "{b} vs {r}");
        }
    }

    #[test]
    fn eigenvector_residual_for_near_degenerate_pair() {
        // A high barrier splits the box into two nearly decoupled wells.
        let n = 401;
        let h = 1.0 / (n + 1) as f64;
        let v: Vec<f64> = (1..=n)
            .map(|i| if (i as f64 * h - 0.5).abs() < 0.05 { 4000.0 } else { 0.0 })
            .collect();
        let t = SchrodingerMatrix::new(h, &v);
        let ev = t.lowest_eigenvalues(2, 1e-14).unwrap();
        assert!(ev[1] - ev[0] < 1e-3 * ev[0]);
        for &lambda in &ev {
            let x = t.inverse_iteration(lambda).unwrap();
            let r = apply_shifted(h, &v, lambda, &x);
            let res = r.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(res < 1e-9 * lambda, "residual {res}");
        }
    }
}
