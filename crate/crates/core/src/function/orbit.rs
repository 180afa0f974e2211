use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::EntireMap;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: u32 = 100;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e10;

/// Iteration cap `N` and escape radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterParams {
    pub max_steps: u32,
    pub escape_radius: f64,
}

impl Default for IterParams {
    fn default() -> Self {
        IterParams {
            max_steps: DEFAULT_MAX_STEPS,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

impl IterParams {
    pub fn new(max_steps: u32, escape_radius: f64) -> Result<Self> {
        let p = IterParams {
            max_steps,
            escape_radius,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::invalid("iteration cap must be >= 1"));
        }
        if !(self.escape_radius > 1.0 && self.escape_radius.is_finite()) {
            return Err(Error::invalid("escape radius must be a finite number > 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// `|z| > R` at `step`. `overflow` marks a non-finite iterate.
    Escaped { step: u32, modulus: f64, overflow: bool },
    Bounded { last: Complex64 },
    /// The starting point was not finite.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitVerdict {
    pub outcome: Outcome,
    pub steps_used: u32,
}

impl OrbitVerdict {
    pub fn escaped(&self) -> bool {
        matches!(self.outcome, Outcome::Escaped { .. })
    }
}

/// Iterates `z ← map(z)` at most `N` times, stopping at the first `|z| > R`
/// or non-finite iterate.
pub fn iterate(map: &EntireMap, z0: Complex64, params: IterParams) -> OrbitVerdict {
    if !z0.is_finite() {
        return OrbitVerdict {
            outcome: Outcome::Indeterminate,
            steps_used: 0,
        };
    }
    let r2 = params.escape_radius * params.escape_radius;
    let mut z = z0;
    for step in 1..=params.max_steps {
        z = map.eval(z);
        if !z.is_finite() {
            return OrbitVerdict {
                outcome: Outcome::Escaped {
                    step,
                    modulus: f64::INFINITY,
                    overflow: true,
                },
                steps_used: step,
            };
        }
        let m2 = z.norm_sqr();
        if m2 > r2 {
            // norm_sqr can overflow even when both parts are finite
            let overflow = !m2.is_finite();
            return OrbitVerdict {
                outcome: Outcome::Escaped {
                    step,
                    modulus: z.norm(),
                    overflow,
                },
                steps_used: step,
            };
        }
    }
    OrbitVerdict {
        outcome: Outcome::Bounded { last: z },
        steps_used: params.max_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32) -> IterParams {
        IterParams::new(n, 1e10).unwrap()
    }

    #[test]
    fn exp_escapes_from_one() {
        // real orbit 1, e, e^e ≈ 15.15, e^15.15 ≈ 3.8e6, then ≈ e^(3.8e6) overflows
        let v = iterate(&EntireMap::exp(), Complex64::new(1.0, 0.0), p(50));
        match v.outcome {
            Outcome::Escaped { step, overflow, .. } => {
                assert_eq!(step, 4);
                assert!(overflow);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sin_fixes_zero() {
        let v = iterate(&EntireMap::sin(), Complex64::new(0.0, 0.0), p(50));
        assert_eq!(
            v.outcome,
            Outcome::Bounded {
                last: Complex64::new(0.0, 0.0)
            }
        );
        assert_eq!(v.steps_used, 50);
    }

    #[test]
    fn gaussian_family_converges_to_attracting_point() {
        // f'(0) = e, so 0 repels; the positive root of z² + 3z − 2 attracts.
        let attractor = (17f64.sqrt() - 3.0) / 2.0;
        let v = iterate(&EntireMap::gaussian_family(), Complex64::new(0.1, 0.0), p(200));
        match v.outcome {
            Outcome::Bounded { last } => assert!((last - attractor).norm() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn escape_step_stable_in_cap() {
        let z0 = Complex64::new(0.3, 0.2);
        let base = iterate(&EntireMap::exp(), z0, p(100));
        let Outcome::Escaped { step, .. } = base.outcome else {
            panic!("expected escape");
        };
        for n in step..step + 20 {
            assert_eq!(iterate(&EntireMap::exp(), z0, p(n)), base);
        }
    }

    #[test]
    fn params_validated() {
        assert!(IterParams::new(0, 10.0).is_err());
        assert!(IterParams::new(5, 1.0).is_err());
        assert!(IterParams::new(5, f64::NAN).is_err());
    }

    #[test]
    fn nonfinite_start() {
        let v = iterate(&EntireMap::sin(), Complex64::new(f64::NAN, 0.0), p(5));
        assert_eq!(v.outcome, Outcome::Indeterminate);
    }
}
