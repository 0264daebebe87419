//! The six tunable pipeline parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UmbraError};

/// Detection kernel size, fusion median window, DBSCAN radius, mean-shift
/// bandwidth, gradient decay ratio and bilateral range sigma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamVector {
    pub h1: usize,
    pub h2: usize,
    pub h3: f64,
    pub h4: f64,
    pub h5: f64,
    pub h6: f64,
}

impl Default for ParamVector {
    fn default() -> Self {
        Self {
            h1: 14,
            h2: 10,
            h3: 0.1124,
            h4: 0.0333,
            h5: 8.5195,
            h6: 0.2228,
        }
    }
}

/// Search bounds for the learner, inclusive.
pub const H1_BOUNDS: (usize, usize) = (3, 31);
pub const H2_BOUNDS: (usize, usize) = (3, 31);
pub const H3_BOUNDS: (f64, f64) = (0.01, 1.0);
pub const H4_BOUNDS: (f64, f64) = (0.005, 0.5);
pub const H5_BOUNDS: (f64, f64) = (1.5, 20.0);
pub const H6_BOUNDS: (f64, f64) = (0.01, 1.0);

impl ParamVector {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(UmbraError::InvalidParameter(what.to_string()));
        if self.h1 < 3 {
            return bad("h1 must be an integer >= 3");
        }
        if self.h2 < 3 {
            return bad("h2 must be an integer >= 3");
        }
        for (name, v) in [("h3", self.h3), ("h4", self.h4), ("h6", self.h6)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(&format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.h5 > 1.0) || !self.h5.is_finite() {
            return bad(&format!("h5 must exceed 1, got {}", self.h5));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ParamVector = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("parameter vectors always serialize")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Whether every gene lies inside the learner's bounds.
    pub fn in_bounds(&self) -> bool {
        let int = |v: usize, b: (usize, usize)| (b.0..=b.1).contains(&v);
        let real = |v: f64, b: (f64, f64)| (b.0..=b.1).contains(&v);
        int(self.h1, H1_BOUNDS)
            && int(self.h2, H2_BOUNDS)
            && real(self.h3, H3_BOUNDS)
            && real(self.h4, H4_BOUNDS)
            && real(self.h5, H5_BOUNDS)
            && real(self.h6, H6_BOUNDS)
    }
}
