use crate::error::{Error, Result};
use crate::linalg::LtiSystem;
use crate::models::DynSystem;
use crate::sim::{LtiOrbit, PeriodicOrbit, BOX_SLACK};

/// Periodic orbit of an approximating system.
#[derive(Clone, Debug)]
pub enum KappaSource {
    Constant(Vec<f64>),
    Lti(LtiOrbit),
}

impl KappaSource {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            KappaSource::Constant(z) => z.clone(),
            KappaSource::Lti(orbit) => orbit.eval(t),
        }
    }

    pub fn sample(&self, period: f64, n: usize) -> Result<PeriodicOrbit> {
        let h = period / n as f64;
        PeriodicOrbit::new(period, (0..n).map(|k| self.eval(h * k as f64)).collect())
    }
}

/// Vector field `G` of an approximating system.
#[derive(Clone, Debug)]
pub enum ApproxField {
    /// `y' = 0`.
    Zero,
    /// `y' = A (y - e) + B (u(t) - input_offset)`.
    Lti { lti: LtiSystem, input_offset: f64 },
}

impl ApproxField {
    pub fn eval(&self, y: &[f64], u: f64) -> Vec<f64> {
        match self {
            ApproxField::Zero => vec![0.0; y.len()],
            ApproxField::Lti { lti, input_offset } => lti.field(y, &[u - input_offset]),
        }
    }
}

/// Data for maximizing `|H(z, w)|` with `|z_r| <= caps_z[r]`, `|w| <= cap_w`,
/// where `H(z, w) = F(e + z, v_bar + w) - A z - B w`.
#[derive(Clone, Debug)]
pub struct BoxProgram {
    pub caps_z: Vec<f64>,
    pub cap_w: f64,
    pub multiaffine: bool,
    pub lti: LtiSystem,
    pub input_offset: f64,
}

impl BoxProgram {
    pub fn mismatch(&self, sys: &dyn DynSystem, z: &[f64], w: f64) -> Vec<f64> {
        let x: Vec<f64> = self.lti.offset().iter().zip(z).map(|(e, d)| e + d).collect();
        let mut f = vec![0.0; x.len()];
        sys.rhs(&x, self.input_offset + w, &mut f);
        let az = self.lti.a().mul_vec(z);
        let bw = self.lti.b().mul_vec(&[w]);
        f.iter()
            .zip(&az)
            .zip(&bw)
            .map(|((f, a), b)| f - a - b)
            .collect()
    }
}

/// An approximating system built for a given model.
#[derive(Clone, Debug)]
pub struct ApproxSystem {
    pub label: String,
    pub kappa: KappaSource,
    pub field: ApproxField,
    pub program: Option<BoxProgram>,
}

pub trait Approximant: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn build(&self, sys: &dyn DynSystem) -> Result<ApproxSystem>;
}

/// Constant orbit at a point `z` (the averaged-input equilibrium unless
/// overridden); its field is identically zero.
#[derive(Clone, Debug, Default)]
pub struct Averaged {
    pub point: Option<Vec<f64>>,
}

impl Approximant for Averaged {
    fn name(&self) -> &'static str {
        "averaged"
    }

    fn summary(&self) -> &'static str {
        "constant orbit at the equilibrium of the input-averaged system"
    }

    fn build(&self, sys: &dyn DynSystem) -> Result<ApproxSystem> {
        let z = match &self.point {
            Some(z) => z.clone(),
            None => sys.averaging_point().ok_or_else(|| {
                Error::Unsupported(format!(
                    "model {} has no closed-form averaged equilibrium",
                    sys.name()
                ))
            })?,
        };
        if z.len() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                got: z.len(),
            });
        }
        if !sys.state_box().contains(&z, BOX_SLACK) {
            return Err(Error::OutsideBox(z));
        }
        Ok(ApproxSystem {
            label: self.name().into(),
            kappa: KappaSource::Constant(z),
            field: ApproxField::Zero,
            program: None,
        })
    }
}

/// LTI system from the model's linearization, with its closed-form orbit.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linearized;

impl Approximant for Linearized {
    fn name(&self) -> &'static str {
        "linearized"
    }

    fn summary(&self) -> &'static str {
        "linearization about the averaged operating point, closed-form LTI orbit"
    }

    fn build(&self, sys: &dyn DynSystem) -> Result<ApproxSystem> {
        let lin = sys.linearization().ok_or_else(|| {
            Error::Unsupported(format!("model {} has no linearization", sys.name()))
        })?;
        let deviation = sys.input().deviation(lin.input_offset);
        let orbit = LtiOrbit::new(&lin.lti, &deviation)?;
        // |kappa - e| <= |center - e| + oscillation amplitude
        let caps_z = orbit
            .deviation_caps()
            .iter()
            .zip(orbit.center())
            .zip(lin.lti.offset())
            .map(|((cap, c), e)| cap + (c - e).abs())
            .collect();
        let program = BoxProgram {
            caps_z,
            cap_w: deviation.sup_abs(),
            multiaffine: sys.mismatch_is_multiaffine(),
            lti: lin.lti.clone(),
            input_offset: lin.input_offset,
        };
        Ok(ApproxSystem {
            label: self.name().into(),
            kappa: KappaSource::Lti(orbit),
            field: ApproxField::Lti {
                lti: lin.lti,
                input_offset: lin.input_offset,
            },
            program: Some(program),
        })
    }
}
