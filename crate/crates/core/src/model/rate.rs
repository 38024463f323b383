use std::fmt;

use serde::Serialize;

/// Hours per FIT denominator: one FIT is one failure per 10⁹ hours.
pub const FIT_SCALE: f64 = 1e9;

/// Unit a rate magnitude was written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    PerHour,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    #[default]
    Failure,
    Repair,
}

/// A constant transition or occurrence intensity.
///
/// The magnitude is kept in the unit it was written in, so a rate entered as
/// FIT converts back to exactly the same FIT figure. [`Rate::value`] is the
/// canonical per-hour view used by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    magnitude: f64,
    unit: RateUnit,
    kind: RateKind,
}

impl Rate {
    pub const ZERO: Rate = Rate {
        magnitude: 0.0,
        unit: RateUnit::PerHour,
        kind: RateKind::Failure,
    };

    pub fn per_hour(value: f64) -> Self {
        Rate {
            magnitude: value,
            unit: RateUnit::PerHour,
            kind: RateKind::Failure,
        }
    }

    pub fn from_fit(fit: f64) -> Self {
        Rate {
            magnitude: fit,
            unit: RateUnit::Fit,
            kind: RateKind::Failure,
        }
    }

    pub fn new(magnitude: f64, unit: RateUnit, kind: RateKind) -> Self {
        Rate {
            magnitude,
            unit,
            kind,
        }
    }

    pub fn repair(self) -> Self {
        self.with_kind(RateKind::Repair)
    }

    pub fn with_kind(mut self, kind: RateKind) -> Self {
        self.kind = kind;
        self
    }

    /// Per-hour intensity.
    pub fn value(&self) -> f64 {
        match self.unit {
            RateUnit::PerHour => self.magnitude,
            RateUnit::Fit => self.magnitude / FIT_SCALE,
        }
    }

    pub fn to_fit(&self) -> f64 {
        match self.unit {
            RateUnit::PerHour => self.magnitude * FIT_SCALE,
            RateUnit::Fit => self.magnitude,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn unit(&self) -> RateUnit {
        self.unit
    }

    pub fn kind(&self) -> RateKind {
        self.kind
    }

    pub fn is_valid(&self) -> bool {
        self.magnitude.is_finite() && self.magnitude >= 0.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            RateUnit::PerHour => write!(f, "{:e} /h", self.magnitude),
            RateUnit::Fit => write!(f, "{} FIT", self.magnitude),
        }
    }
}
