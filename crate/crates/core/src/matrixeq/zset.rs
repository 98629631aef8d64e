//! The spectral region Z(c, c~) governing which real eigenvalues an operator
//! may carry while still admitting admissible initial data, together with the
//! parameter region D(c, c~).

use std::fmt;

use crate::{Error, Result};

/// Union of closed intervals; infinite endpoints encode rays.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn all() -> Self {
        IntervalSet {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| x >= lo - tol && x <= hi + tol)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_end = |x: f64| -> String {
            if x == f64::NEG_INFINITY {
                "-inf".into()
            } else if x == f64::INFINITY {
                "inf".into()
            } else {
                format!("{x}")
            }
        };
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| format!("[{}, {}]", fmt_end(lo), fmt_end(hi)))
            .collect();
        write!(f, "{}", parts.join(" U "))
    }
}

/// D(c, c~) = R^2 minus the strip { c~ < 0 and c in [c~, 0] }.
pub fn in_d(c: f64, c_tilde: f64) -> bool {
    !(c_tilde < 0.0 && c >= c_tilde && c <= 0.0)
}

/// The subset Z(c, c~) of admissible real eigenvalues, by case analysis on
/// the signs of c and c~ with kappa = (c~ - c)/c~.
///
/// Outside D(c, c~), and at the origin, admissible data exists without any
/// spectral constraint; the full real line is returned for those inputs.
/// The pair c~ = 0 < c has no listed case and is rejected.
pub fn z_interval(c: f64, c_tilde: f64) -> Result<IntervalSet> {
    if (c, c_tilde) == (0.0, 0.0) || !in_d(c, c_tilde) {
        return Ok(IntervalSet::all());
    }
    if c_tilde == 0.0 {
        if c > 0.0 {
            return Err(Error::UnlistedCase { c });
        }
        // c < 0 = c~
        return Ok(IntervalSet {
            intervals: vec![(0.0, f64::INFINITY)],
        });
    }
    let kappa = (c_tilde - c) / c_tilde;
    let set = if c_tilde > 0.0 {
        if c >= c_tilde {
            IntervalSet {
                intervals: vec![(kappa, 1.0)],
            }
        } else if c >= 0.0 {
            IntervalSet {
                intervals: vec![(0.0, 1.0)],
            }
        } else {
            IntervalSet {
                intervals: vec![(0.0, kappa)],
            }
        }
    } else {
        // c~ < 0 and (c, c~) in D, so either c < c~ or c > 0
        if c < c_tilde {
            IntervalSet {
                intervals: vec![(f64::NEG_INFINITY, kappa), (0.0, f64::INFINITY)],
            }
        } else {
            IntervalSet {
                intervals: vec![(f64::NEG_INFINITY, 1.0), (kappa, f64::INFINITY)],
            }
        }
    };
    Ok(set)
}
