use crate::error::{Error, Result};
use crate::linalg::{LtiSystem, Matrix};
use crate::norms::{NormKind, NormSpec};

use super::{ContractionCertificate, DynSystem, Linearization, PeriodicInput, StateBox};

/// `x1' = -x1 + x2^2`, `x2' = -x2 + a sin(omega t)`.
///
/// The box is `[0, a^2] x [-a, a]`: the second side is invariant because
/// `|u| <= a`, and then `x1' <= -x1 + a^2` keeps `x1 <= a^2`.
#[derive(Clone, Debug)]
pub struct QuadraticCascade {
    amplitude: f64,
    omega: f64,
    scale: f64,
    input: PeriodicInput,
    bx: StateBox,
}

impl QuadraticCascade {
    /// `scale` is the weight `c` of the norm `|z1| + c |z2|`.
    pub fn new(amplitude: f64, omega: f64, scale: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "norm weight c must be positive, got {scale}"
            )));
        }
        let a = amplitude;
        Ok(Self {
            amplitude,
            omega,
            scale,
            input: PeriodicInput::sine(0.0, a, omega)?,
            bx: StateBox::new(vec![0.0, -a], vec![a * a, a])?,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Closed-form entrained orbit of the cascade.
pub fn orbit_ex52(amplitude: f64, omega: f64, t: f64) -> [f64; 2] {
    let lag = omega.atan();
    let g2 = amplitude / (1.0 + omega * omega).sqrt() * (omega * t - lag).sin();
    // x1' = -x1 + K (1 - cos(theta)), theta = 2 (omega t - lag)
    let k = amplitude * amplitude / (2.0 * (1.0 + omega * omega));
    let theta = 2.0 * (omega * t - lag);
    let g1 = k * (1.0 - (theta.cos() + 2.0 * omega * theta.sin()) / (1.0 + 4.0 * omega * omega));
    [g1, g2]
}

/// `max_t |gamma_1(t)|`.
pub fn max_gamma1_ex52(amplitude: f64, omega: f64) -> f64 {
    let r = (4.0 * omega * omega + 1.0).sqrt();
    amplitude * amplitude * (1.0 + r) / (2.0 * (1.0 + omega * omega) * r)
}

impl DynSystem for QuadraticCascade {
    fn name(&self) -> &str {
        "ex52"
    }

    fn dim(&self) -> usize {
        2
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("a".into(), self.amplitude),
            ("omega".into(), self.omega),
            ("c".into(), self.scale),
        ]
    }

    fn input(&self) -> &PeriodicInput {
        &self.input
    }

    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]) {
        out[0] = -x[0] + x[1] * x[1];
        out[1] = -x[1] + v;
    }

    fn rhs_jacobian(&self, x: &[f64], _v: f64) -> Matrix {
        let mut j = Matrix::from_diagonal(&[-1.0, -1.0]);
        j[(0, 1)] = 2.0 * x[1];
        j
    }

    fn state_box(&self) -> &StateBox {
        &self.bx
    }

    fn certificate_norm(&self) -> NormSpec {
        NormSpec::diagonal(NormKind::L1, vec![1.0, self.scale])
            .expect("positive weights give a valid norm")
    }

    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        let eta = 1.0 - 2.0 * self.amplitude / self.scale;
        if eta > 0.0 {
            Ok(Some(ContractionCertificate::analytic(
                self.certificate_norm(),
                eta,
                "1 - 2a/c",
            )))
        } else {
            Err(Error::CertificationRefused(format!(
                "norm weight c = {} must exceed 2a = {}",
                self.scale,
                2.0 * self.amplitude
            )))
        }
    }

    fn averaging_point(&self) -> Option<Vec<f64>> {
        let m = self.input.mean();
        Some(vec![m * m, m])
    }

    fn linearization(&self) -> Option<Linearization> {
        let mut b = Matrix::zeros(2, 1);
        b[(1, 0)] = 1.0;
        let lti = LtiSystem::new(Matrix::from_diagonal(&[-1.0, -1.0]), b, None).ok()?;
        Some(Linearization {
            lti,
            input_offset: self.input.mean(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_peak() {
        let want = (1.0 + 5f64.sqrt()) / (4.0 * 5f64.sqrt());
        assert!((max_gamma1_ex52(1.0, 1.0) - want).abs() < 1e-15);
        let peak = (0..20000)
            .map(|k| orbit_ex52(1.0, 1.0, std::f64::consts::TAU * k as f64 / 20000.0)[0].abs())
            .fold(0.0, f64::max);
        assert!((peak - want).abs() < 1e-7);
    }

    #[test]
    fn closed_form_solves_the_ode() {
        let sys = QuadraticCascade::new(0.8, 2.5, 1e6).unwrap();
        for k in 0..30 {
            let t = 0.05 * k as f64;
            let h = 1e-5;
            let p = orbit_ex52(0.8, 2.5, t + h);
            let m = orbit_ex52(0.8, 2.5, t - h);
            let f = sys.field_vec(t, &orbit_ex52(0.8, 2.5, t));
            for i in 0..2 {
                assert!(((p[i] - m[i]) / (2.0 * h) - f[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn certificate_needs_large_weight() {
        let sys = QuadraticCascade::new(1.0, 1.0, 1e6).unwrap();
        let cert = sys.analytic_certificate().unwrap().unwrap();
        assert!((cert.eta - (1.0 - 2e-6)).abs() < 1e-15);
        assert!(QuadraticCascade::new(1.0, 1.0, 1.5)
            .unwrap()
            .analytic_certificate()
            .is_err());
    }
}
