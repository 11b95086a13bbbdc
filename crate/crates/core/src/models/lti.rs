use crate::error::{Error, Result};
use crate::linalg::{lu_solve, lyapunov_scaling, LtiSystem, LyapunovScaling, Matrix};
use crate::norms::{NormKind, NormSpec};
use crate::sim::LtiOrbit;

use super::{ContractionCertificate, DynSystem, Linearization, PeriodicInput, StateBox};

/// `x' = A (x - e) + b u(t)` with a single scalar input.
///
/// Contraction is certified in the l2 norm scaled by the Lyapunov factor
/// `P`. The box covers the forced orbit and the averaged point with a
/// margin of one span (at least one unit) per side.
#[derive(Clone, Debug)]
pub struct LtiModel {
    lti: LtiSystem,
    input: PeriodicInput,
    scaling: LyapunovScaling,
    norm: NormSpec,
    bx: StateBox,
}

impl LtiModel {
    pub fn new(lti: LtiSystem, input: PeriodicInput) -> Result<Self> {
        if lti.inputs() != 1 {
            return Err(Error::InvalidParameter(format!(
                "B must have exactly one column for a scalar input, got {}",
                lti.inputs()
            )));
        }
        if !(lti.a().is_finite() && lti.b().is_finite()) {
            return Err(Error::InvalidParameter("A and B must be finite".into()));
        }
        let scaling = lyapunov_scaling(lti.a())?;
        let norm = NormSpec::scaled(NormKind::L2, scaling.p.clone())?;
        let orbit = LtiOrbit::new(&lti, &input)?;
        let caps = orbit.deviation_caps();
        let center = orbit.center();
        let z = averaged_point(&lti, input.mean())?;
        let mut lower: Vec<f64> = center.iter().zip(&caps).map(|(c, r)| c - r).collect();
        let mut upper: Vec<f64> = center.iter().zip(&caps).map(|(c, r)| c + r).collect();
        for i in 0..lower.len() {
            lower[i] = lower[i].min(z[i]);
            upper[i] = upper[i].max(z[i]);
        }
        let hull = StateBox::new(lower, upper)?;
        let pad: Vec<f64> = (0..hull.dim()).map(|i| hull.span(i).max(1.0)).collect();
        let bx = hull.inflate(&pad)?;
        Ok(Self {
            lti,
            input,
            scaling,
            norm,
            bx,
        })
    }

    pub fn lti(&self) -> &LtiSystem {
        &self.lti
    }

    pub fn scaling(&self) -> &LyapunovScaling {
        &self.scaling
    }
}

/// Equilibrium under the constant input `u_bar`: `z = e - A^{-1} b u_bar`.
fn averaged_point(lti: &LtiSystem, u_bar: f64) -> Result<Vec<f64>> {
    let bu: Vec<f64> = lti.b().column(0).iter().map(|b| b * u_bar).collect();
    let shift = lu_solve(lti.a(), &bu)?;
    Ok(lti
        .offset()
        .iter()
        .zip(&shift)
        .map(|(e, s)| e - s)
        .collect())
}

impl DynSystem for LtiModel {
    fn name(&self) -> &str {
        "lti"
    }

    fn dim(&self) -> usize {
        self.lti.dim()
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("n".into(), self.lti.dim() as f64),
            ("input_mean".into(), self.input.mean()),
            ("period".into(), self.input.period()),
        ]
    }

    fn input(&self) -> &PeriodicInput {
        &self.input
    }

    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]) {
        let f = self.lti.field(x, &[v]);
        out.copy_from_slice(&f);
    }

    fn rhs_jacobian(&self, _x: &[f64], _v: f64) -> Matrix {
        self.lti.a().clone()
    }

    fn state_box(&self) -> &StateBox {
        &self.bx
    }

    fn certificate_norm(&self) -> NormSpec {
        self.norm.clone()
    }

    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        Ok(Some(ContractionCertificate::analytic(
            self.norm.clone(),
            self.scaling.eta,
            "Lyapunov scaling, eta = 0.9 x spectral margin",
        )))
    }

    fn averaging_point(&self) -> Option<Vec<f64>> {
        averaged_point(&self.lti, self.input.mean()).ok()
    }

    fn linearization(&self) -> Option<Linearization> {
        Some(Linearization {
            lti: self.lti.clone(),
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
