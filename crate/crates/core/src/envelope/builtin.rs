//! Closed-form Lagrangians shipped with the library.

use std::fmt;
use std::str::FromStr;

use super::{EnvelopeError, Minorant, Vector};

/// Grid nodes meant to sit on a well (`|ξ| = 1`) may land this far inside
/// it after rounding; `f` there is below `1e-23`.
const WELL_ROUNDING: f64 = 1e-12;

/// A named Lagrangian with an exact evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `(t² − 1)²` on the line.
    DoubleWell1d,
    /// `t²` on the line.
    Quadratic1d,
    /// `n²` at integers, `+∞` elsewhere.
    LatticeQuadratic1d,
    /// `(|ξ|² − 1)²` in the plane.
    RadialDoubleWell2d,
    /// `g(|η|)` with `g(t) = |t² − 1|` for `t ≠ 1` and `g(1) = 1`, in the plane.
    Example23Exact,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::DoubleWell1d,
        Builtin::Quadratic1d,
        Builtin::LatticeQuadratic1d,
        Builtin::RadialDoubleWell2d,
        Builtin::Example23Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::DoubleWell1d => "double_well_1d",
            Builtin::Quadratic1d => "quadratic_1d",
            Builtin::LatticeQuadratic1d => "lattice_quadratic_1d",
            Builtin::RadialDoubleWell2d => "radial_double_well_2d",
            Builtin::Example23Exact => "example_2_3_exact",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Builtin::DoubleWell1d | Builtin::Quadratic1d | Builtin::LatticeQuadratic1d => 1,
            Builtin::RadialDoubleWell2d | Builtin::Example23Exact => 2,
        }
    }

    /// Sampling box and resolution used when a config does not override them.
    pub fn default_grid(self) -> (Vec<(f64, f64)>, Vec<usize>) {
        match self {
            Builtin::DoubleWell1d => (vec![(-2.0, 2.0)], vec![401]),
            Builtin::Quadratic1d => (vec![(-2.0, 2.0)], vec![41]),
            Builtin::LatticeQuadratic1d => (vec![(-3.0, 3.0)], vec![61]),
            Builtin::RadialDoubleWell2d | Builtin::Example23Exact => {
                (vec![(-4.0, 4.0), (-4.0, 4.0)], vec![41, 41])
            }
        }
    }

    pub fn minorant(self) -> Minorant {
        // (t²−1)² − (t² − 2) = t⁴ − 3t² + 3 > 0, and |t² − 1| ≥ t² − 1.
        match self {
            Builtin::DoubleWell1d | Builtin::RadialDoubleWell2d => Minorant::quadratic(1.0, -2.0),
            Builtin::Quadratic1d | Builtin::LatticeQuadratic1d => Minorant::quadratic(1.0, 0.0),
            Builtin::Example23Exact => Minorant::quadratic(1.0, -1.0),
        }
    }

    fn radius(x: Vector) -> f64 {
        x[0].hypot(x[1])
    }

    /// Exact value of the Lagrangian (`+∞` allowed).
    pub fn eval(self, x: Vector) -> f64 {
        match self {
            Builtin::DoubleWell1d => {
                let t = x[0];
                (t * t - 1.0).powi(2)
            }
            Builtin::Quadratic1d => x[0] * x[0],
            Builtin::LatticeQuadratic1d => {
                let t = x[0];
                if t == t.round() {
                    t * t
                } else {
                    f64::INFINITY
                }
            }
            Builtin::RadialDoubleWell2d => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                (r2 - 1.0).powi(2)
            }
            Builtin::Example23Exact => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 == 1.0 {
                    1.0
                } else {
                    (r2 - 1.0).abs()
                }
            }
        }
    }

    /// Exact lower semicontinuous convex envelope.
    pub fn exact_envelope(self, x: Vector) -> f64 {
        match self {
            Builtin::DoubleWell1d => {
                if x[0].abs() <= 1.0 {
                    0.0
                } else {
                    self.eval(x)
                }
            }
            Builtin::Quadratic1d => self.eval(x),
            Builtin::LatticeQuadratic1d => {
                let n = x[0].floor();
                (2.0 * n + 1.0) * x[0] - n * (n + 1.0)
            }
            Builtin::RadialDoubleWell2d => {
                if Self::radius(x) <= 1.0 {
                    0.0
                } else {
                    self.eval(x)
                }
            }
            Builtin::Example23Exact => (x[0] * x[0] + x[1] * x[1] - 1.0).max(0.0),
        }
    }

    /// Closed-form contact predicate `f(ξ) = f**(ξ)`.
    pub fn exact_contact(self, x: Vector) -> bool {
        match self {
            Builtin::DoubleWell1d => x[0].abs() >= 1.0 - WELL_ROUNDING,
            Builtin::Quadratic1d => true,
            Builtin::LatticeQuadratic1d => x[0] == x[0].round(),
            Builtin::RadialDoubleWell2d => Self::radius(x) >= 1.0 - WELL_ROUNDING,
            Builtin::Example23Exact => Self::radius(x) > 1.0,
        }
    }

    /// Closed-form reason why no Carathéodory decomposition with contact
    /// points exists at `x`, when the builtin is known to have one.
    pub fn witness_obstruction(self, x: Vector) -> Option<String> {
        match self {
            Builtin::Example23Exact if Self::radius(x) <= 1.0 => Some(format!(
                "flat face {{f** = 0}} = closed unit ball contains ({}, {}) but its contact set is \
                 empty: f(η) > 0 = f**(η) for every η with |η| <= 1",
                x[0], x[1]
            )),
            _ => None,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = EnvelopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| EnvelopeError::InvalidSamples(format!("unknown builtin Lagrangian `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("nope".parse::<Builtin>().is_err());
    }

    #[test]
    fn exact_envelopes_stay_below() {
        for b in Builtin::ALL {
            let (bounds, _) = b.default_grid();
            for i in 0..=200 {
                let t = bounds[0].0 + (bounds[0].1 - bounds[0].0) * i as f64 / 200.0;
                let x = if b.dim() == 1 { [t, 0.0] } else { [t, 0.3 * t] };
                assert!(b.exact_envelope(x) <= b.eval(x) + 1e-12, "{b} at {t}");
            }
        }
    }

    #[test]
    fn example_2_3_is_positive_everywhere() {
        let b = Builtin::Example23Exact;
        assert_eq!(b.eval([1.0, 0.0]), 1.0);
        assert!(b.eval([0.6, 0.8]) > 0.0);
        assert!(b.witness_obstruction([0.0, 0.0]).is_some());
        assert!(b.witness_obstruction([2.0, 0.0]).is_none());
    }
}
