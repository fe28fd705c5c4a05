//! Free spin measures on `[0, 1]`.
//!
//! Every hardcore model in this crate is parameterized by a finite Borel
//! measure on the unit interval, stored as a list of atoms plus a list of
//! exponential density pieces `s * lambda^x` on closed subintervals. The
//! four families used throughout are:
//!
//! * two-state: `delta_0 + lambda * delta_1`;
//! * multi-state with `M + 1` levels: `sum_i lambda^i delta_{i/M}`;
//! * continuous: density `lambda^x` on `[0, 1]`;
//! * epsilon-interpolated: density `lambda^x / (2 eps)` on
//!   `[0, eps] ∪ [1 - eps, 1]`.
//!
//! As `eps -> 0` the interpolated measure converges weakly to
//! `(delta_0 + lambda * delta_1) / 2`, a rescaling of the two-state measure.
//! Gibbs measures do not see the scale, so nothing depends on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family tag used for reporting and CLI parsing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum MeasureKind {
    TwoState,
    MultiState(u32),
    Continuous,
    EpsInterpolated(f64),
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::TwoState => write!(f, "two-state"),
            MeasureKind::MultiState(m) => write!(f, "multi:{m}"),
            MeasureKind::Continuous => write!(f, "continuous"),
            MeasureKind::EpsInterpolated(e) => write!(f, "eps:{e}"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown measure `{s}`"));
        match s {
            "two-state" => Ok(MeasureKind::TwoState),
            "continuous" => Ok(MeasureKind::Continuous),
            _ => {
                if let Some(m) = s.strip_prefix("multi:") {
                    m.parse().map(MeasureKind::MultiState).map_err(|_| bad())
                } else if let Some(e) = s.strip_prefix("eps:") {
                    e.parse().map(MeasureKind::EpsInterpolated).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Density `scale * rate^x` on the closed interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub start: f64,
    pub end: f64,
    pub scale: f64,
    pub rate: f64,
}

impl DensityPiece {
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.rate.powf(x)
    }

    /// Closed-form integral of the density over `[a, b] ∩ [start, end]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(self.start);
        let hi = b.min(self.end);
        if hi <= lo {
            return 0.0;
        }
        let ln_rate = self.rate.ln();
        if ln_rate == 0.0 {
            self.scale * (hi - lo)
        } else {
            self.scale * self.rate.powf(lo) * ((hi - lo) * ln_rate).exp_m1() / ln_rate
        }
    }

    /// Inverse of `x -> integral(start, x)` for `0 <= t <= integral(start, end)`.
    fn invert(&self, t: f64) -> f64 {
        let ln_rate = self.rate.ln();
        let x = if ln_rate == 0.0 {
            self.start + t / self.scale
        } else {
            let base = self.scale * self.rate.powf(self.start);
            self.start + (t * ln_rate / base).ln_1p() / ln_rate
        };
        x.clamp(self.start, self.end)
    }

    fn contains(&self, x: f64) -> bool {
        self.start <= x && x <= self.end
    }
}

/// A finite measure on `[0, 1]` made of atoms and exponential density pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinMeasure {
    kind: MeasureKind,
    lambda: f64,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
}

impl SpinMeasure {
    pub fn new(kind: MeasureKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "activity must be positive, got {lambda}"
            )));
        }
        let (atoms, pieces) = match kind {
            MeasureKind::TwoState => (
                vec![
                    Atom { location: 0.0, weight: 1.0 },
                    Atom { location: 1.0, weight: lambda },
                ],
                vec![],
            ),
            MeasureKind::MultiState(m) => {
                if m < 1 {
                    return Err(Error::InvalidParameter(
                        "multi-state measure needs M >= 1".into(),
                    ));
                }
                let atoms = (0..=m)
                    .map(|i| Atom {
                        location: if i == m { 1.0 } else { i as f64 / m as f64 },
                        weight: lambda.powi(i as i32),
                    })
                    .collect();
                (atoms, vec![])
            }
            MeasureKind::Continuous => (
                vec![],
                vec![DensityPiece { start: 0.0, end: 1.0, scale: 1.0, rate: lambda }],
            ),
            MeasureKind::EpsInterpolated(eps) => {
                if !(eps > 0.0 && eps < 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "eps must lie in (0, 1/2), got {eps}"
                    )));
                }
                let scale = 0.5 / eps;
                (
                    vec![],
                    vec![
                        DensityPiece { start: 0.0, end: eps, scale, rate: lambda },
                        DensityPiece { start: 1.0 - eps, end: 1.0, scale, rate: lambda },
                    ],
                )
            }
        };
        Ok(Self { kind, lambda, atoms, pieces })
    }

    pub fn continuous(lambda: f64) -> Result<Self> {
        Self::new(MeasureKind::Continuous, lambda)
    }

    pub fn two_state(lambda: f64) -> Result<Self> {
        Self::new(MeasureKind::TwoState, lambda)
    }

    pub fn multi_state(levels: u32, lambda: f64) -> Result<Self> {
        Self::new(MeasureKind::MultiState(levels), lambda)
    }

    pub fn eps_interpolated(eps: f64, lambda: f64) -> Result<Self> {
        Self::new(MeasureKind::EpsInterpolated(eps), lambda)
    }

    /// The measure multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.atoms.iter_mut().for_each(|a| a.weight *= c);
        out.pieces.iter_mut().for_each(|p| p.scale *= c);
        Ok(out)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn has_density(&self) -> bool {
        !self.pieces.is_empty()
    }

    /// Common scale `s` of all density pieces, when the measure is a pure
    /// density of the form `s * lambda^x` on its support.
    pub fn density_scale(&self) -> Option<f64> {
        if self.has_atoms() {
            return None;
        }
        let s = self.pieces.first()?.scale;
        self.pieces.iter().all(|p| p.scale == s).then_some(s)
    }

    /// Atom locations and density-piece endpoints inside `(0, 1)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.location)
            .chain(self.pieces.iter().flat_map(|p| [p.start, p.end]))
            .filter(|&x| x > 0.0 && x < 1.0)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Density at `x`, zero off the support. Closed pieces, so at a piece
    /// endpoint the value is the in-piece limit.
    pub fn density(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.contains(x))
            .map_or(0.0, |p| p.eval(x))
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(0.0, 1.0, true, true)
    }

    /// Mass of the interval between `a` and `b`; endpoint atoms are counted
    /// only when the matching flag is set.
    pub fn mass(&self, a: f64, b: f64, include_a: bool, include_b: bool) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|at| {
                let x = at.location;
                (a < x && x < b) || (include_a && x == a) || (include_b && x == b)
            })
            .map(|at| at.weight)
            .sum();
        let density: f64 = self.pieces.iter().map(|p| p.integral(a, b)).sum();
        atoms + density
    }

    /// Draw from the measure restricted to `[0, cap]` by inversion of the
    /// uniform variate `u` in `[0, 1)`. Components are visited left to right.
    pub fn sample_below(&self, cap: f64, u: f64) -> f64 {
        if let ([], [p]) = (self.atoms.as_slice(), self.pieces.as_slice()) {
            if p.start == 0.0 {
                return p.invert(u * p.integral(0.0, cap)).min(cap);
            }
        }
        let total = self.mass(0.0, cap, true, true);
        let mut t = u * total;
        let mut events: Vec<(f64, Option<&DensityPiece>, f64)> = self
            .atoms
            .iter()
            .filter(|a| a.location <= cap)
            .map(|a| (a.location, None, a.weight))
            .chain(
                self.pieces
                    .iter()
                    .filter(|p| p.start < cap)
                    .map(|p| (p.start, Some(p), p.integral(p.start, cap))),
            )
            .collect();
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut last = 0.0;
        for (loc, piece, w) in events {
            if w <= 0.0 {
                continue;
            }
            last = match piece {
                Some(p) => p.invert(t.min(w)).min(cap),
                None => loc,
            };
            if t < w {
                return last;
            }
            t -= w;
        }
        last
    }
}
