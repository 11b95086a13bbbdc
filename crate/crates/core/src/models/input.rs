use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// `amplitude * cos(omega * t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl CosineTerm {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).cos()
    }
}

/// Finite cosine sum plus a constant offset, with a common period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicInput {
    offset: f64,
    terms: Vec<CosineTerm>,
    period: f64,
}

impl PeriodicInput {
    /// Every frequency must be an integer multiple of `2 pi / period`
    /// (relative tolerance 1e-9).
    pub fn new(offset: f64, terms: Vec<CosineTerm>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "input period must be positive and finite, got {period}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter("input offset must be finite".into()));
        }
        for term in &terms {
            if !(term.amplitude.is_finite() && term.omega.is_finite() && term.phase.is_finite()) {
                return Err(Error::InvalidParameter("input terms must be finite".into()));
            }
            if term.omega < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "input frequency must be nonnegative, got {}",
                    term.omega
                )));
            }
            let k = term.omega * period / TAU;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "frequency {} is not a harmonic of period {period} (k = {k})",
                    term.omega
                )));
            }
        }
        Ok(Self {
            offset,
            terms,
            period,
        })
    }

    pub fn constant(offset: f64, period: f64) -> Result<Self> {
        Self::new(offset, Vec::new(), period)
    }

    /// `offset + amplitude * sin(2 pi t / period)`.
    pub fn sinusoid(offset: f64, amplitude: f64, period: f64) -> Result<Self> {
        let omega = TAU / period;
        Self::new(
            offset,
            vec![CosineTerm {
                amplitude,
                omega,
                phase: -FRAC_PI_2,
            }],
            period,
        )
    }

    /// `offset + amplitude * cos(omega t)`, period `2 pi / omega`.
    pub fn cosine(offset: f64, amplitude: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        Self::new(
            offset,
            vec![CosineTerm {
                amplitude,
                omega,
                phase: 0.0,
            }],
            TAU / omega,
        )
    }

    /// `offset + amplitude * sin(omega t)`, period `2 pi / omega`.
    pub fn sine(offset: f64, amplitude: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        Self::sinusoid(offset, amplitude, TAU / omega)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> &[CosineTerm] {
        &self.terms
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.terms.iter().map(|c| c.eval(t)).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|c| c.omega == 0.0 || c.amplitude == 0.0)
    }

    /// Exact average over one period: the offset plus any zero-frequency terms.
    pub fn mean(&self) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .filter(|c| c.omega == 0.0)
                .map(|c| c.amplitude * c.phase.cos())
                .sum::<f64>()
    }

    /// Same signal shifted down by `about`.
    pub fn deviation(&self, about: f64) -> Self {
        Self {
            offset: self.offset - about,
            terms: self.terms.clone(),
            period: self.period,
        }
    }

    /// Sum of the oscillating amplitudes.
    fn swing(&self) -> f64 {
        self.terms
            .iter()
            .filter(|c| c.omega > 0.0)
            .map(|c| c.amplitude.abs())
            .sum()
    }

    /// Lower bound on `u(t)`; exact for a single harmonic.
    pub fn floor(&self) -> f64 {
        self.mean() - self.swing()
    }

    /// Upper bound on `u(t)`; exact for a single harmonic.
    pub fn ceiling(&self) -> f64 {
        self.mean() + self.swing()
    }

    /// Upper bound on `|u(t)|`.
    pub fn sup_abs(&self) -> f64 {
        self.floor().abs().max(self.ceiling().abs())
    }
}
