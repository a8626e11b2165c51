//! Lowest Dirichlet eigenpairs of `−d²/dx² + t·v` on a finite interval.
//!
//! The physical frame works on (−L/2, L/2) with `t·v`; the scaled frame on
//! (−1/2, 1/2) with `t·w_L`, `w_L(x) = L² v(Lx)`. The two are unitarily
//! equivalent: physical eigenvalues are `L⁻²` times the scaled ones.
//!
//! Eigenvalues come from second-order central differences, bisected on the
//! Sturm sequence and Richardson-extrapolated from grids `h` and `h/2`.
//! [`shooting`] is an independent Prüfer-phase oracle for the same problem.

pub mod shooting;
pub mod tridiag;

use crate::error::{GapError, Result};
use crate::potential::Potential;

pub use shooting::{shooting_oracle, ShootingResult};
pub use tridiag::SchrodingerMatrix;

/// Relative width at which Sturm bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-13;
/// Grid nodes required across the potential's narrowest feature.
pub const MIN_FEATURE_NODES: usize = 32;
/// Smallest admissible number of interior nodes.
pub const MIN_INTERIOR_NODES: usize = 16;
pub const MAX_EIGENVALUES: usize = 8;
/// Relative rounding allowance per grid node in the Sturm recurrence, set
/// well above the largest drift observed against exact discrete eigenvalues.
const ROUNDING_PER_NODE: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Physical,
    Scaled,
}

impl std::str::FromStr for Frame {
    type Err = GapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Frame::Physical),
            "scaled" => Ok(Frame::Scaled),
            other => Err(GapError::Invalid(format!("unknown frame '{other}'"))),
        }
    }
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Frame::Physical => "physical",
            Frame::Scaled => "scaled",
        })
    }
}

/// One Dirichlet problem: potential, interval length, frame and coupling `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub potential: Potential,
    pub length: f64,
    pub frame: Frame,
    pub coupling: f64,
}

impl ProblemSpec {
    pub fn new(potential: Potential, length: f64, frame: Frame) -> Self {
        Self {
            potential,
            length,
            frame,
            coupling: 1.0,
        }
    }

    pub fn physical(potential: Potential, length: f64) -> Self {
        Self::new(potential, length, Frame::Physical)
    }

    pub fn scaled(potential: Potential, length: f64) -> Self {
        Self::new(potential, length, Frame::Scaled)
    }

    pub fn with_coupling(mut self, t: f64) -> Self {
        self.coupling = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(GapError::Invalid(format!(
                "length must be positive, got {}",
                self.length
            )));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(GapError::Invalid(format!(
                "coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    /// Endpoints of the interval the operator lives on.
    pub fn interval(&self) -> (f64, f64) {
        match self.frame {
            Frame::Physical => (-0.5 * self.length, 0.5 * self.length),
            Frame::Scaled => (-0.5, 0.5),
        }
    }

    /// Coordinate of the physical point `x` in this frame.
    fn to_frame(&self, x: f64) -> f64 {
        match self.frame {
            Frame::Physical => x,
            Frame::Scaled => x / self.length,
        }
    }

    /// Potential seen by the operator in this frame, including the coupling.
    pub fn potential_at(&self, x: f64) -> f64 {
        self.coupling
            * match self.frame {
                Frame::Physical => self.potential.eval(x),
                Frame::Scaled => self.potential.scaled_eval(self.length, x),
            }
    }

    /// Jump locations inside the open interval, in frame coordinates.
    pub fn jumps(&self) -> Vec<f64> {
        self.inside(self.potential.jumps())
    }

    /// Jumps and kinks inside the open interval, in frame coordinates.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all = self.potential.jumps();
        all.extend(self.potential.kinks());
        all.sort_by(f64::total_cmp);
        all.dedup();
        self.inside(all)
    }

    fn inside(&self, xs: Vec<f64>) -> Vec<f64> {
        let (a, b) = self.interval();
        xs.into_iter()
            .map(|x| self.to_frame(x))
            .filter(|&x| x > a && x < b)
            .collect()
    }

    /// Bound on the frame potential, used to bracket eigenvalues.
    pub fn potential_sup(&self) -> f64 {
        let sup = match &self.potential {
            Potential::Zero => 0.0,
            Potential::Step { v0, .. } | Potential::SymmetricBump { v0, .. } => *v0,
            Potential::InverseSquareTail => 1.0,
            Potential::PowerLawDecay { amplitude, .. } => *amplitude,
            Potential::PiecewiseConstant(pc) => pc.segments().iter().map(|s| s.value).fold(0.0, f64::max),
        };
        let scale = match self.frame {
            Frame::Physical => 1.0,
            Frame::Scaled => self.length * self.length,
        };
        self.coupling * scale * sup
    }

    /// Smallest grid resolution that resolves the narrowest feature with
    /// [`MIN_FEATURE_NODES`] nodes, with a small margin for rounding the
    /// cell count. Zero when the potential has no feature.
    pub fn min_resolution(&self) -> f64 {
        self.feature_width()
            .map_or(0.0, |w| 1.1 * (MIN_FEATURE_NODES + 1) as f64 / w)
    }

    /// Narrowest potential feature as seen on this frame's interval.
    fn feature_width(&self) -> Option<f64> {
        let (a, b) = self.interval();
        self.potential.feature_width().map(|w| self.to_frame(w).min(b - a))
    }
}

/// Uniform grid with `n` interior nodes on `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        assert!(a < b && n >= 1);
        Self { a, b, n }
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// Interior node `i`, `0 ≤ i < n`.
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Same interval, half the spacing.
    pub fn refined(&self) -> Self {
        Self::new(self.a, self.b, 2 * self.n + 1)
    }

    /// Uniform grid with at least `resolution` points per unit length that puts
    /// nodes on every jump and kink of the potential whenever a cell count in
    /// `[m, 2m]` allows it, and otherwise as close to them as that range allows.
    pub fn for_spec(spec: &ProblemSpec, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GapError::Invalid(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        let (a, b) = spec.interval();
        let min_cells = ((resolution * (b - a)).ceil() as usize).max(MIN_INTERIOR_NODES + 1);
        let cells = aligned_cell_count(a, b, &spec.breakpoints(), min_cells);
        let grid = Self::new(a, b, cells - 1);
        if let Some(width) = spec.feature_width() {
            let nodes = (width / grid.spacing()).floor() as usize;
            if nodes < MIN_FEATURE_NODES {
                return Err(GapError::Resolution {
                    nodes,
                    feature: width,
                    required: MIN_FEATURE_NODES,
                });
            }
        }
        Ok(grid)
    }
}

/// Cell count in `[min_cells, 2·min_cells]` that puts every breakpoint on a
/// node, or failing that the one whose worst breakpoint lies closest to a
/// node. Refinement keeps the breakpoints' offsets small, which keeps the
/// coarse and fine error expansions alike.
fn aligned_cell_count(a: f64, b: f64, breakpoints: &[f64], min_cells: usize) -> usize {
    if breakpoints.is_empty() {
        return min_cells;
    }
    let fractions: Vec<f64> = breakpoints.iter().map(|p| (p - a) / (b - a)).collect();
    let defect = |m: usize| {
        fractions
            .iter()
            .map(|f| {
                let pos = f * m as f64;
                (pos - pos.round()).abs() / pos.max(1.0)
            })
            .fold(0.0, f64::max)
    };
    let mut best = (min_cells, f64::INFINITY);
    for m in min_cells..=2 * min_cells {
        let d = defect(m);
        if d <= 1e-9 {
            return m;
        }
        if d < best.1 {
            best = (m, d);
        }
    }
    best.0
}

/// Potential values on the grid nodes. A node whose cell contains a jump gets
/// the length-weighted mean of the pieces of its cell, so a node sitting on a
/// jump carries the mean of the one-sided limits.
pub fn sample_potential(spec: &ProblemSpec, grid: &Grid) -> Vec<f64> {
    let jumps = spec.jumps();
    let half = 0.5 * grid.spacing();
    grid.nodes()
        .map(|x| {
            let (lo, hi) = (x - half, x + half);
            let inside: Vec<f64> = jumps.iter().copied().filter(|&p| p > lo && p < hi).collect();
            if inside.is_empty() {
                return spec.potential_at(x);
            }
            let mut edges = Vec::with_capacity(inside.len() + 2);
            edges.push(lo);
            edges.extend(inside);
            edges.push(hi);
            edges
                .windows(2)
                .map(|w| (w[1] - w[0]) * spec.potential_at(0.5 * (w[0] + w[1])))
                .sum::<f64>()
                / (hi - lo)
        })
        .collect()
}

/// Central-difference matrix: diagonal `2/h² + V_i`, off-diagonal `−1/h²`.
pub fn discretize(spec: &ProblemSpec, grid: &Grid) -> SchrodingerMatrix {
    SchrodingerMatrix::new(grid.spacing(), &sample_potential(spec, grid))
}

/// Raw (unextrapolated) finite-difference eigenvalues on one grid.
pub fn fd_eigenvalues(spec: &ProblemSpec, grid: &Grid, k: usize) -> Result<Vec<f64>> {
    discretize(spec, grid).lowest_eigenvalues(k, BISECTION_REL_TOL)
}

/// Lowest eigenpairs with error estimates and sampled eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Richardson-extrapolated eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub error_estimates: Vec<f64>,
    /// Eigenfunctions on the fine grid's interior nodes, unit L² norm.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// The fine grid the eigenfunctions live on.
    pub grid: Grid,
    /// Eigenvalues of the fine-grid matrix itself.
    pub fine_eigenvalues: Vec<f64>,
    /// Eigenvalues of the coarse-grid matrix.
    pub coarse_eigenvalues: Vec<f64>,
}

impl SpectrumResult {
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    /// Richardson estimate applied to the gap itself. The discretisation
    /// errors of the two eigenvalues are strongly correlated, so this is far
    /// tighter than the sum of their individual estimates when the gap is small.
    pub fn gap_error(&self) -> f64 {
        let (f, c) = (&self.fine_eigenvalues, &self.coarse_eigenvalues);
        let discretisation = ((f[1] - f[0]) - (c[1] - c[0])).abs() / 3.0;
        discretisation + rounding_allowance(self.grid.n, f[0]) + rounding_allowance(self.grid.n, f[1])
    }
}

/// Trapezoid integral of node samples on a Dirichlet grid (zero at both ends).
pub fn trapezoid(grid: &Grid, values: impl IntoIterator<Item = f64>) -> f64 {
    grid.spacing() * values.into_iter().sum::<f64>()
}

/// Raw finite-difference eigenpairs on one grid. Eigenvectors are scaled to
/// unit trapezoid norm with their first non-zero entry positive.
pub fn fd_eigenpairs(spec: &ProblemSpec, grid: &Grid, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let matrix = discretize(spec, grid);
    let values = matrix.lowest_eigenvalues(k, BISECTION_REL_TOL)?;
    let vectors = values
        .iter()
        .map(|&shift| {
            let mut v = matrix.inverse_iteration(shift)?;
            let norm = trapezoid(grid, v.iter().map(|x| x * x)).sqrt();
            let sign = v.iter().find(|x| **x != 0.0).map_or(1.0, |x| x.signum());
            v.iter_mut().for_each(|x| *x *= sign / norm);
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((values, vectors))
}

pub fn lowest_eigenvalues_fd(spec: &ProblemSpec, k: usize, resolution: f64) -> Result<SpectrumResult> {
    spec.validate()?;
    if !(1..=MAX_EIGENVALUES).contains(&k) {
        return Err(GapError::Invalid(format!(
            "k must be in 1..={MAX_EIGENVALUES}, got {k}"
        )));
    }
    let coarse = Grid::for_spec(spec, resolution)?;
    let fine = coarse.refined();

    let coarse_ev = fd_eigenvalues(spec, &coarse, k)?;
    let (fine_ev, eigenfunctions) = fd_eigenpairs(spec, &fine, k)?;

    let mut eigenvalues = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for (c, f) in coarse_ev.iter().zip(&fine_ev) {
        eigenvalues.push((4.0 * f - c) / 3.0);
        errors.push((f - c).abs() / 3.0 + rounding_allowance(fine.n, *f));
    }

    Ok(SpectrumResult {
        eigenvalues,
        error_estimates: errors,
        eigenfunctions,
        grid: fine,
        fine_eigenvalues: fine_ev,
        coarse_eigenvalues: coarse_ev,
    })
}

fn rounding_allowance(nodes: usize, eigenvalue: f64) -> f64 {
    (ROUNDING_PER_NODE * nodes as f64 + BISECTION_REL_TOL) * eigenvalue.abs()
}

/// `ε₁ − ε₀` (or `λ₁ − λ₀` in the scaled frame) with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub gap: f64,
    pub error: f64,
    pub eps0: f64,
    pub eps1: f64,
}

/// Spectral gap. When the gap is within ten error estimates of zero the
/// problem is re-solved once at double resolution before giving up.
pub fn spectral_gap(spec: &ProblemSpec, resolution: f64) -> Result<Gap> {
    let attempt = |res: f64| -> Result<Gap> {
        let r = lowest_eigenvalues_fd(spec, 2, res)?;
        Ok(Gap {
            gap: r.gap(),
            error: r.gap_error(),
            eps0: r.eigenvalues[0],
            eps1: r.eigenvalues[1],
        })
    };
    let resolved = |g: &Gap| g.gap > 0.0 && g.error <= 0.1 * g.gap;
    let first = attempt(resolution)?;
    if resolved(&first) {
        return Ok(first);
    }
    let second = attempt(2.0 * resolution)?;
    if resolved(&second) {
        Ok(second)
    } else {
        Err(GapError::Precision {
            gap: second.gap,
            error: second.error,
        })
    }
}

/// Linear interpolation of eigenfunction `index` at frame coordinate `x`,
/// with the Dirichlet zeros at both ends.
pub fn eigenfunction_at(result: &SpectrumResult, index: usize, x: f64) -> f64 {
    let grid = &result.grid;
    let values = &result.eigenfunctions[index];
    let pos = (x - grid.a) / grid.spacing();
    if !(pos > 0.0 && pos < (grid.n + 1) as f64) {
        return 0.0;
    }
    let cell = pos.floor() as usize;
    let frac = pos - cell as f64;
    // Node `i` of the grid is entry `i − 1`; nodes 0 and n+1 are the walls.
    let at = |i: usize| if i == 0 || i > grid.n { 0.0 } else { values[i - 1] };
    (1.0 - frac) * at(cell) + frac * at(cell + 1)
}

/// Strict sign changes between adjacent nodes of eigenfunction `index`.
pub fn eigenfunction_nodes(result: &SpectrumResult, index: usize) -> usize {
    result.eigenfunctions[index]
        .windows(2)
        .filter(|w| (w[0] > 0.0 && w[1] < 0.0) || (w[0] < 0.0 && w[1] > 0.0))
        .count()
}
