//! Compensated accumulation for long orbit sums.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Which accumulator long sums use. `PARASHEAR_PRECISION=extended` selects
/// double-double accumulation; anything else (or unset) selects compensated
/// 64-bit summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Compensated64,
    Extended,
}

pub const PRECISION_ENV: &str = "PARASHEAR_PRECISION";

impl Precision {
    pub fn from_env() -> Self {
        match std::env::var(PRECISION_ENV) {
            Ok(v) => Self::parse(&v).unwrap_or_default(),
            Err(_) => Self::default(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "64" | "f64" | "compensated" | "compensated64" => Some(Self::Compensated64),
            "extended" | "dd" | "80" | "128" => Some(Self::Extended),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accumulator {
    Compensated(NeumaierSum),
    Extended(Dd),
}

impl Accumulator {
    pub fn new(p: Precision) -> Self {
        match p {
            Precision::Compensated64 => Self::Compensated(NeumaierSum::new()),
            Precision::Extended => Self::Extended(Dd::ZERO),
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self {
            Self::Compensated(s) => s.add(x),
            Self::Extended(d) => *d = *d + x,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Compensated(s) => s.value(),
            Self::Extended(d) => d.to_f64(),
        }
    }
}
