//! Non-negative potentials on the real line and their hypothesis classes.
//!
//! Every family is evaluated exactly. The scaled potential `w_L(x) = L² v(Lx)`
//! is what the operator on the fixed interval (−1/2, 1/2) sees.

use std::fmt;

use crate::error::{GapError, Result};

/// One constant piece `[left, right] ↦ value` of a [`PiecewiseConstant`] potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    pub value: f64,
}

/// Finitely many sorted, disjoint constant pieces. Zero outside the pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    segments: Vec<Segment>,
}

impl PiecewiseConstant {
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(GapError::Invalid(
                "piecewise potential needs at least one segment".into(),
            ));
        }
        for s in &segments {
            if !(s.left.is_finite() && s.right.is_finite() && s.value.is_finite()) {
                return Err(GapError::Invalid(format!("non-finite segment {s:?}")));
            }
            if s.left >= s.right {
                return Err(GapError::Invalid(format!("empty segment [{}, {}]", s.left, s.right)));
            }
            if s.value < 0.0 {
                return Err(GapError::Invalid(format!("negative segment value {}", s.value)));
            }
        }
        segments.sort_by(|a, b| a.left.total_cmp(&b.left));
        for pair in segments.windows(2) {
            if pair[1].left < pair[0].right {
                return Err(GapError::Invalid(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    pair[0].left, pair[0].right, pair[1].left, pair[1].right
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn eval(&self, x: f64) -> f64 {
        // Closed segments; where two pieces touch, the left piece wins.
        self.segments
            .iter()
            .find(|s| s.left <= x && x <= s.right)
            .map_or(0.0, |s| s.value)
    }

    fn is_symmetric(&self) -> bool {
        let tol = 1e-12;
        self.segments.iter().all(|s| {
            self.segments.iter().any(|m| {
                (m.left + s.right).abs() <= tol
                    && (m.right + s.left).abs() <= tol
                    && (m.value - s.value).abs() <= tol * s.value.max(1.0)
            })
        })
    }

    /// Values on the positive half-axis, outward, including the zero gaps.
    fn is_nonincreasing_on_positive_axis(&self) -> bool {
        let mut probes: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.left, s.right])
            .filter(|&x| x > 0.0)
            .collect();
        probes.push(0.0);
        probes.sort_by(f64::total_cmp);
        probes.dedup();
        let mut previous = f64::INFINITY;
        for pair in probes.windows(2) {
            let v = self.eval(0.5 * (pair[0] + pair[1]));
            if v > previous {
                return false;
            }
            previous = v;
        }
        // Beyond the last breakpoint the potential is zero.
        true
    }
}

/// The admissible potential families.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `v0` on `[−b, b]`, zero elsewhere.
    Step {
        v0: f64,
        b: f64,
    },
    /// `1/x²` for `x ≥ 1`, zero elsewhere.
    InverseSquareTail,
    /// `C/(1+|x|)^α`.
    PowerLawDecay {
        amplitude: f64,
        alpha: f64,
    },
    /// `v0·exp(−x²/s²)`.
    SymmetricBump {
        v0: f64,
        s: f64,
    },
    PiecewiseConstant(PiecewiseConstant),
}

/// Which hypotheses of the gap bounds a potential provably satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialClass {
    pub compact_support: bool,
    /// Smallest closed-form `C` with `v(x) ≤ C/x²`.
    pub short_range_c: Option<f64>,
    /// Exponent `α` with `v(x) ≤ C/|x|^α`; `+∞` for super-polynomial decay.
    /// Left empty for compactly supported potentials.
    pub decay_alpha: Option<f64>,
    /// Symmetric, non-decreasing on (−∞, 0), non-increasing on (0, ∞).
    pub symmetric_single_well: bool,
}

impl PotentialClass {
    /// Compact support or decay strictly faster than `|x|⁻²`.
    pub fn decays_faster_than_inverse_square(&self) -> bool {
        self.compact_support || self.decay_alpha.is_some_and(|a| a > 2.0)
    }
}

impl Potential {
    pub fn step(v0: f64, b: f64) -> Self {
        Potential::Step { v0, b }
    }

    pub fn power_law(amplitude: f64, alpha: f64) -> Self {
        Potential::PowerLawDecay { amplitude, alpha }
    }

    pub fn bump(v0: f64, s: f64) -> Self {
        Potential::SymmetricBump { v0, s }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(GapError::Invalid(format!("{what} in {self}")))
            }
        };
        match *self {
            Potential::Zero | Potential::InverseSquareTail | Potential::PiecewiseConstant(_) => Ok(()),
            Potential::Step { v0, b } => {
                check(
                    v0.is_finite() && v0 >= 0.0,
                    "step height must be finite and non-negative",
                )?;
                check(b.is_finite() && b > 0.0, "step half-width must be positive")
            }
            Potential::PowerLawDecay { amplitude, alpha } => {
                check(
                    amplitude.is_finite() && amplitude >= 0.0,
                    "amplitude must be non-negative",
                )?;
                check(alpha.is_finite() && alpha > 0.0, "decay exponent must be positive")
            }
            Potential::SymmetricBump { v0, s } => {
                check(v0.is_finite() && v0 >= 0.0, "bump height must be non-negative")?;
                check(s.is_finite() && s > 0.0, "bump width must be positive")
            }
        }
    }

    /// Pointwise value `v(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Step { v0, b } => {
                if (-b..=*b).contains(&x) {
                    *v0
                } else {
                    0.0
                }
            }
            Potential::InverseSquareTail => {
                if x >= 1.0 {
                    1.0 / (x * x)
                } else {
                    0.0
                }
            }
            Potential::PowerLawDecay { amplitude, alpha } => amplitude / (1.0 + x.abs()).powf(*alpha),
            Potential::SymmetricBump { v0, s } => v0 * (-(x / s).powi(2)).exp(),
            Potential::PiecewiseConstant(pc) => pc.eval(x),
        }
    }

    /// `w_L(x) = L² v(Lx)`.
    pub fn scaled_eval(&self, length: f64, x: f64) -> f64 {
        length * length * self.eval(length * x)
    }

    /// Jump discontinuities, sorted.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Potential::Step { v0, b } if *v0 > 0.0 => vec![-b, *b],
            Potential::InverseSquareTail => vec![1.0],
            Potential::PiecewiseConstant(pc) => {
                let mut xs: Vec<f64> = pc
                    .segments
                    .iter()
                    .filter(|s| s.value > 0.0)
                    .flat_map(|s| [s.left, s.right])
                    .collect();
                xs.sort_by(f64::total_cmp);
                xs.dedup();
                xs
            }
            _ => Vec::new(),
        }
    }

    /// Points where `v` is continuous but not differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Potential::PowerLawDecay { amplitude, .. } if *amplitude > 0.0 => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// Width of the narrowest structure a grid has to resolve, if any.
    pub fn feature_width(&self) -> Option<f64> {
        match self {
            Potential::Zero => None,
            Potential::Step { v0, b } => (*v0 > 0.0).then_some(2.0 * b),
            Potential::InverseSquareTail => Some(1.0),
            Potential::PowerLawDecay { amplitude, .. } => (*amplitude > 0.0).then_some(2.0),
            Potential::SymmetricBump { v0, s } => (*v0 > 0.0).then_some(2.0 * s),
            Potential::PiecewiseConstant(pc) => pc
                .segments
                .iter()
                .filter(|s| s.value > 0.0)
                .map(|s| s.right - s.left)
                .min_by(f64::total_cmp),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Step { v0, .. } | Potential::SymmetricBump { v0, .. } => *v0 == 0.0,
            Potential::PowerLawDecay { amplitude, .. } => *amplitude == 0.0,
            Potential::InverseSquareTail => false,
            Potential::PiecewiseConstant(pc) => pc.segments.iter().all(|s| s.value == 0.0),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Potential::InverseSquareTail => false,
            Potential::PiecewiseConstant(pc) => pc.is_symmetric(),
            _ => true,
        }
    }

    pub fn classify(&self) -> PotentialClass {
        match self {
            Potential::Zero => PotentialClass {
                compact_support: true,
                short_range_c: Some(0.0),
                decay_alpha: None,
                symmetric_single_well: true,
            },
            Potential::Step { v0, b } => PotentialClass {
                compact_support: true,
                short_range_c: Some(v0 * b * b),
                decay_alpha: None,
                symmetric_single_well: true,
            },
            Potential::InverseSquareTail => PotentialClass {
                compact_support: false,
                short_range_c: Some(1.0),
                decay_alpha: Some(2.0),
                symmetric_single_well: false,
            },
            Potential::PowerLawDecay { amplitude, alpha } => PotentialClass {
                compact_support: *amplitude == 0.0,
                short_range_c: power_law_short_range_constant(*amplitude, *alpha),
                decay_alpha: Some(*alpha),
                symmetric_single_well: true,
            },
            Potential::SymmetricBump { v0, s } => PotentialClass {
                compact_support: *v0 == 0.0,
                // sup x²·v0·exp(−x²/s²) is attained at x = s.
                short_range_c: Some(v0 * s * s * (-1.0f64).exp()),
                decay_alpha: Some(f64::INFINITY),
                symmetric_single_well: true,
            },
            Potential::PiecewiseConstant(pc) => PotentialClass {
                compact_support: true,
                short_range_c: Some(
                    pc.segments
                        .iter()
                        .map(|s| s.value * s.left.abs().max(s.right.abs()).powi(2))
                        .fold(0.0, f64::max),
                ),
                decay_alpha: None,
                symmetric_single_well: pc.is_symmetric() && pc.is_nonincreasing_on_positive_axis(),
            },
        }
    }
}

/// `sup_x x²·C/(1+|x|)^α`: maximised at `x = 2/(α−2)` for `α > 2`, the limit `C` for `α = 2`.
fn power_law_short_range_constant(amplitude: f64, alpha: f64) -> Option<f64> {
    if alpha > 2.0 {
        let x = 2.0 / (alpha - 2.0);
        Some(amplitude * x * x / (1.0 + x).powf(alpha))
    } else if alpha == 2.0 {
        Some(amplitude)
    } else {
        None
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "zero"),
            Potential::Step { v0, b } => write!(f, "step(v0={v0}, b={b})"),
            Potential::InverseSquareTail => write!(f, "inverse-square-tail"),
            Potential::PowerLawDecay { amplitude, alpha } => {
                write!(f, "power-law(C={amplitude}, alpha={alpha})")
            }
            Potential::SymmetricBump { v0, s } => write!(f, "bump(v0={v0}, s={s})"),
            Potential::PiecewiseConstant(pc) => {
                write!(f, "piecewise[")?;
                for (i, s) in pc.segments.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}..{}:{}", s.left, s.right, s.value)?;
                }
                write!(f, "]")
            }
        }
    }
}
