use crate::error::{Error, Result};
use crate::linalg::{LtiSystem, Matrix};
use crate::norms::NormSpec;

use super::{ContractionCertificate, DynSystem, Linearization, PeriodicInput, StateBox};

/// Ribosome flow model with `n` sites and a time-varying initiation rate.
///
/// `rates` holds the transition rates `lambda_1..lambda_n`; the input plays
/// the role of `lambda_0`.
#[derive(Clone, Debug)]
pub struct Rfm {
    rates: Vec<f64>,
    input: PeriodicInput,
    bx: StateBox,
}

impl Rfm {
    pub fn new(rates: Vec<f64>, input: PeriodicInput) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidParameter("RFM needs at least one site".into()));
        }
        if let Some((i, r)) = rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r > 0.0 && r.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "rate lambda{} must be positive, got {r}",
                i + 1
            )));
        }
        if !(input.offset() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initiation rate lambda0 must be positive, got {}",
                input.offset()
            )));
        }
        let n = rates.len();
        Ok(Self {
            rates,
            input,
            bx: StateBox::unit(n),
        })
    }

    pub fn sites(&self) -> usize {
        self.rates.len()
    }

    /// `lambda_1..lambda_n`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Output rate `lambda_n x_n`.
    pub fn production_rate(&self, x: &[f64]) -> f64 {
        self.rates[self.rates.len() - 1] * x[x.len() - 1]
    }

    /// Equilibrium under the constant initiation rate equal to the input mean.
    fn equilibrium(&self) -> Option<Vec<f64>> {
        let l0 = self.input.mean();
        if !(l0 > 0.0) {
            return None;
        }
        match self.rates.as_slice() {
            [l1] => Some(vec![l0 / (l0 + l1)]),
            [l1, l2] => rfm2_equilibrium(l0, *l1, *l2).ok().map(|e| e.to_vec()),
            _ => None,
        }
    }

    /// Flux `g_k` into site `k+1` (`k = 0..n`), with `g_0 = v (1 - x_1)`.
    fn flux(&self, x: &[f64], v: f64, k: usize) -> f64 {
        let n = self.rates.len();
        if k == 0 {
            v * (1.0 - x[0])
        } else if k == n {
            self.rates[n - 1] * x[n - 1]
        } else {
            self.rates[k - 1] * x[k - 1] * (1.0 - x[k])
        }
    }
}

/// Closed-form equilibrium of the two-site RFM with constant rates.
pub fn rfm2_equilibrium(lambda0: f64, lambda1: f64, lambda2: f64) -> Result<[f64; 2]> {
    for (name, r) in [("lambda0", lambda0), ("lambda1", lambda1), ("lambda2", lambda2)] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {r}"
            )));
        }
    }
    // steady flux R solves lambda1 R^2 - s R + lambda0 lambda1 lambda2 = 0; take the small root
    let s = lambda0 * lambda1 + lambda1 * lambda2 + lambda0 * lambda2;
    let disc = s * s - 4.0 * lambda0 * lambda1 * lambda1 * lambda2;
    let flux = 2.0 * lambda0 * lambda1 * lambda2 / (s + disc.sqrt());
    Ok([1.0 - flux / lambda0, flux / lambda2])
}

impl DynSystem for Rfm {
    fn name(&self) -> &str {
        if self.rates.len() == 2 {
            "rfm2"
        } else {
            "rfm"
        }
    }

    fn dim(&self) -> usize {
        self.rates.len()
    }

    fn params(&self) -> Vec<(String, f64)> {
        let mut p = vec![
            ("n".to_string(), self.rates.len() as f64),
            ("lam0".to_string(), self.input.offset()),
        ];
        for (i, r) in self.rates.iter().enumerate() {
            p.push((format!("lam{}", i + 1), *r));
        }
        p.push(("amp".into(), self.input.ceiling() - self.input.mean()));
        p.push(("period".into(), self.input.period()));
        p
    }

    fn input(&self) -> &PeriodicInput {
        &self.input
    }

    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]) {
        let n = self.rates.len();
        let mut inflow = self.flux(x, v, 0);
        for i in 0..n {
            let outflow = self.flux(x, v, i + 1);
            out[i] = inflow - outflow;
            inflow = outflow;
        }
    }

    fn rhs_jacobian(&self, x: &[f64], v: f64) -> Matrix {
        let n = self.rates.len();
        let mut j = Matrix::zeros(n, n);
        // d g_k / dx, then J[i] = d g_i - d g_{i+1}
        let mut grad = |k: usize, sign: f64, row: usize| {
            if k == 0 {
                j[(row, 0)] += sign * -v;
            } else if k == n {
                j[(row, n - 1)] += sign * self.rates[n - 1];
            } else {
                let l = self.rates[k - 1];
                j[(row, k - 1)] += sign * l * (1.0 - x[k]);
                j[(row, k)] += sign * -l * x[k - 1];
            }
        };
        for i in 0..n {
            grad(i, 1.0, i);
            grad(i + 1, -1.0, i);
        }
        j
    }

    fn state_box(&self) -> &StateBox {
        &self.bx
    }

    fn certificate_norm(&self) -> NormSpec {
        NormSpec::l1()
    }

    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        let floor = self.input.floor();
        match self.rates.as_slice() {
            [l1] => {
                let eta = floor + l1;
                if eta > 0.0 {
                    Ok(Some(ContractionCertificate::analytic(
                        NormSpec::l1(),
                        eta,
                        "min_t lambda0(t) + lambda1",
                    )))
                } else {
                    Err(Error::CertificationRefused(format!(
                        "min_t lambda0(t) + lambda1 = {eta} is not positive"
                    )))
                }
            }
            [_, l2] => {
                if floor > 0.0 {
                    Ok(Some(ContractionCertificate::analytic(
                        NormSpec::l1(),
                        floor.min(*l2),
                        "min{min_t lambda0(t), lambda2}",
                    )))
                } else {
                    Err(Error::CertificationRefused(format!(
                        "the analytic rate needs min_t lambda0(t) > 0, i.e. lambda0 above the input amplitude (got minimum {floor})"
                    )))
                }
            }
            _ => Ok(None),
        }
    }

    fn certification_refusal(&self) -> Option<String> {
        (self.rates.len() > 2).then(|| {
            format!(
                "the {}-site RFM is not contractive in l1 on the whole unit cube (only n <= 2 is certified)",
                self.rates.len()
            )
        })
    }

    fn averaging_point(&self) -> Option<Vec<f64>> {
        self.equilibrium()
    }

    fn linearization(&self) -> Option<Linearization> {
        let e = self.equilibrium()?;
        let v_bar = self.input.mean();
        let a = self.rhs_jacobian(&e, v_bar);
        let mut b = Matrix::zeros(self.dim(), 1);
        b[(0, 0)] = 1.0 - e[0];
        let lti = LtiSystem::new(a, b, Some(e)).ok()?;
        Some(Linearization {
            lti,
            input_offset: v_bar,
        })
    }

    fn mismatch_is_multiaffine(&self) -> bool {
        true
    }
}
