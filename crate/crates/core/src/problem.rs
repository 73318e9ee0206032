use std::fmt;

use crate::error::{Error, Result};

/// Separate source and relay power budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndividualBudgets {
    pub source: f64,
    pub relay: f64,
}

impl IndividualBudgets {
    pub fn new(source: f64, relay: f64) -> Result<Self> {
        let b = Self { source, relay };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source.is_finite() && self.source >= 0.0 && self.relay.is_finite() && self.relay >= 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "budgets must be finite and >= 0 (source {}, relay {})",
                self.source, self.relay
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerConstraint {
    /// One budget shared by source (both slots) and relay.
    Total(f64),
    Individual(IndividualBudgets),
}

impl PowerConstraint {
    pub fn validate(&self) -> Result<()> {
        match self {
            PowerConstraint::Total(p) if p.is_finite() && *p >= 0.0 => Ok(()),
            PowerConstraint::Total(p) => Err(Error::Config(format!("total power {p} must be finite and >= 0"))),
            PowerConstraint::Individual(b) => b.validate(),
        }
    }
}

impl fmt::Display for PowerConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerConstraint::Total(p) => write!(f, "total(P={p})"),
            PowerConstraint::Individual(b) => write!(f, "individual(PS={}, PR={})", b.source, b.relay),
        }
    }
}

pub(crate) fn check_power(p: f64) -> Result<()> {
    PowerConstraint::Total(p).validate()
}
