use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{LtiSystem, Matrix};
use crate::norms::NormSpec;

use super::{ContractionCertificate, DynSystem, Linearization, PeriodicInput, StateBox};

/// `x' = -x + 1 + sin(2 pi t / T)` on `[0, 2]`.
#[derive(Clone, Debug)]
pub struct ScalarForced {
    input: PeriodicInput,
    bx: StateBox,
}

impl ScalarForced {
    pub fn new(period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self {
            input: PeriodicInput::sinusoid(1.0, 1.0, period)?,
            bx: StateBox::new(vec![0.0], vec![2.0])?,
        })
    }

    /// Closed-form entrained orbit.
    pub fn orbit(&self, t: f64) -> f64 {
        gamma_ex33(self.input.period(), t)
    }
}

/// Entrained orbit of `x' = -x + 1 + sin(2 pi t / T)`.
pub fn gamma_ex33(period: f64, t: f64) -> f64 {
    let w = TAU * t / period;
    let t2 = period * period;
    1.0 + (t2 * w.sin() - 2.0 * PI * period * w.cos()) / (4.0 * PI * PI + t2)
}

impl DynSystem for ScalarForced {
    fn name(&self) -> &str {
        "ex33"
    }

    fn dim(&self) -> usize {
        1
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![("period".into(), self.input.period())]
    }

    fn input(&self) -> &PeriodicInput {
        &self.input
    }

    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]) {
        out[0] = -x[0] + v;
    }

    fn rhs_jacobian(&self, _x: &[f64], _v: f64) -> Matrix {
        Matrix::from_diagonal(&[-1.0])
    }

    fn state_box(&self) -> &StateBox {
        &self.bx
    }

    fn certificate_norm(&self) -> NormSpec {
        NormSpec::l1()
    }

    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        Ok(Some(ContractionCertificate::analytic(
            NormSpec::l1(),
            1.0,
            "mu(J) = -1",
        )))
    }

    fn averaging_point(&self) -> Option<Vec<f64>> {
        Some(vec![self.input.mean()])
    }

    /// The trivial approximant `y' = -y`, whose periodic orbit is zero.
    fn linearization(&self) -> Option<Linearization> {
        let lti = LtiSystem::new(
            Matrix::from_diagonal(&[-1.0]),
            Matrix::zeros(1, 1),
            Some(vec![0.0]),
        )
        .ok()?;
        Some(Linearization {
            lti,
            input_offset: 0.0,
        })
    }

    fn mismatch_is_multiaffine(&self) -> bool {
        true
    }

    fn jacobian_is_constant(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_orbit_values() {
        assert!((gamma_ex33(TAU, 0.0) - 0.5).abs() < 1e-15);
        let big = 1e6;
        assert!((gamma_ex33(big, big / 4.0) - 2.0).abs() < 1e-4);
    }

    #[test]
    fn closed_form_solves_the_ode() {
        let sys = ScalarForced::new(3.0).unwrap();
        for k in 0..40 {
            let t = 0.1 * k as f64;
            let h = 1e-5;
            let deriv = (sys.orbit(t + h) - sys.orbit(t - h)) / (2.0 * h);
            let f = sys.field_vec(t, &[sys.orbit(t)])[0];
            assert!((deriv - f).abs() < 1e-8, "t={t}: {deriv} vs {f}");
        }
    }

    #[test]
    fn field_and_jacobian() {
        let sys = ScalarForced::new(TAU).unwrap();
        assert_eq!(sys.field_vec(0.0, &[1.0]), vec![0.0]);
        assert_eq!(sys.jacobian(1.3, &[0.2])[(0, 0)], -1.0);
    }
}
