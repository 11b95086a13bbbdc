use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{LtiSystem, Matrix};
use crate::norms::{NormKind, NormSpec};
use crate::sim::{self, LtiOrbit, OrbitOptions};

use super::{ContractionCertificate, DynSystem, Linearization, PeriodicInput, StateBox};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TranscriptionalParams {
    pub delta: f64,
    pub k1: f64,
    pub k2: f64,
    pub e_total: f64,
}

impl TranscriptionalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("k1", self.k1),
            ("k2", self.k2),
            ("et", self.e_total),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn binding(&self) -> f64 {
        self.k2 * self.e_total
    }

    /// `min{k1 (1 - d), delta + k2 eT (1 - 1/d)}`.
    pub fn nominal_rate(&self, d: f64) -> f64 {
        let left = self.k1 * (1.0 - d);
        let right = self.delta + self.binding() * (1.0 - 1.0 / d);
        left.min(right)
    }

    /// Worst weighted column sum over the box, using that each column sum is
    /// convex piecewise linear in a single coordinate, so corners suffice.
    fn worst_column_sum(&self, d: f64, bx: &StateBox) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &x2 in &[bx.lower()[1], bx.upper()[1]] {
            let free = self.e_total - x2;
            worst = worst.max(-self.delta - self.k2 * free + (self.k2 * free).abs() / d);
        }
        for &x1 in &[bx.lower()[0], bx.upper()[0]] {
            let coupling = self.k1 + self.k2 * x1;
            worst = worst.max(-coupling + coupling.abs() * d);
        }
        worst
    }
}

/// Maximize `min{k1 (1 - d), delta + k2 eT (1 - 1/d)}` over the admissible
/// window `(k2 eT / (k2 eT + delta), 1)`.
pub fn optimize_scaling_d(p: &TranscriptionalParams) -> Result<(f64, f64)> {
    p.validate()?;
    let lo = p.binding() / (p.binding() + p.delta);
    let hi = 1.0;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(
            "empty admissible window for the scaling d".into(),
        ));
    }
    // branches cross where k1 d^2 + (delta + k2 eT - k1) d - k2 eT = 0
    let b = p.delta + p.binding() - p.k1;
    let root = 2.0 * p.binding() / (b + (b * b + 4.0 * p.k1 * p.binding()).sqrt());
    let d = if root.is_finite() && root > lo && root < hi {
        root
    } else {
        golden_max(|d| p.nominal_rate(d), lo, hi, 1e-14)
    };
    Ok((d, p.nominal_rate(d)))
}

/// Best `d` for the weighted l1 norm `|d z1| + |z2|` on an arbitrary box.
/// The returned rate may be nonpositive when no `d` certifies contraction.
pub fn optimize_scaling_d_on_box(p: &TranscriptionalParams, bx: &StateBox) -> Result<(f64, f64)> {
    p.validate()?;
    if bx.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: bx.dim(),
        });
    }
    // the worst column sum is quasi-convex in log d
    let s = golden_max(
        |s| -p.worst_column_sum(s.exp(), bx),
        (1e-6f64).ln(),
        (1e6f64).ln(),
        1e-12,
    );
    let d = s.exp();
    Ok((d, -p.worst_column_sum(d, bx)))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Controls the box search used when the input can go negative.
#[derive(Clone, Debug)]
pub struct EmpiricalBoxOptions {
    /// Each side is widened by this fraction of its span.
    pub pad_fraction: f64,
    pub steps_per_period: usize,
    pub max_periods: usize,
    pub tol: f64,
}

impl Default for EmpiricalBoxOptions {
    fn default() -> Self {
        Self {
            pad_fraction: 0.1,
            steps_per_period: sim::DEFAULT_STEPS_PER_PERIOD,
            max_periods: 5000,
            tol: sim::DEFAULT_ORBIT_TOL,
        }
    }
}

/// Driven transcription factor binding to a conserved promoter pool.
#[derive(Clone, Debug)]
pub struct Transcriptional {
    params: TranscriptionalParams,
    input: PeriodicInput,
    bx: StateBox,
    d: f64,
    eta: f64,
    nominal: (f64, f64),
    empirical: bool,
    seed: Option<Vec<f64>>,
}

impl Transcriptional {
    /// Nominal model on `[0, (c + k1 eT)/delta] x [0, eT]`; needs `u >= 0`.
    pub fn new(params: TranscriptionalParams, input: PeriodicInput) -> Result<Self> {
        params.validate()?;
        let floor = input.floor();
        if floor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "input floor {floor} is negative; the nominal invariant box needs u >= 0"
            )));
        }
        let c = input.ceiling();
        let bx = StateBox::new(
            vec![0.0, 0.0],
            vec![(c + params.k1 * params.e_total) / params.delta, params.e_total],
        )?;
        let (d, eta) = optimize_scaling_d(&params)?;
        Ok(Self {
            params,
            input,
            bx,
            d,
            eta,
            nominal: (d, eta),
            empirical: false,
            seed: None,
        })
    }

    /// Nominal model when the input is nonnegative, otherwise a model on the
    /// padded hull of the simulated and linearized orbits.
    pub fn auto(
        params: TranscriptionalParams,
        input: PeriodicInput,
        opts: &EmpiricalBoxOptions,
    ) -> Result<Self> {
        if input.floor() >= 0.0 {
            Self::new(params, input)
        } else {
            Self::empirical(params, input, opts)
        }
    }

    /// Model on the padded bounding box of the entrained orbit and of the
    /// linearized orbit, with `d` re-optimized on that box. The box is not
    /// proven invariant, so the certificate is marked heuristic.
    pub fn empirical(
        params: TranscriptionalParams,
        input: PeriodicInput,
        opts: &EmpiricalBoxOptions,
    ) -> Result<Self> {
        params.validate()?;
        let nominal = optimize_scaling_d(&params)?;
        let reach = 10.0 * (input.sup_abs() + params.k1 * params.e_total) / params.delta;
        let side2 = reach.max(10.0 * params.e_total);
        let pilot = Self {
            params,
            input: input.clone(),
            bx: StateBox::new(vec![-reach, -side2], vec![reach, side2])?,
            d: nominal.0,
            eta: nominal.1,
            nominal,
            empirical: true,
            seed: None,
        };

        let lin = pilot
            .linearization()
            .ok_or_else(|| Error::Unsupported("linearization unavailable".into()))?;
        let kappa = LtiOrbit::new(&lin.lti, &input.deviation(lin.input_offset))?
            .sample(opts.steps_per_period)?;
        let norm = NormSpec::diagonal(NormKind::L1, vec![nominal.0, 1.0])?;
        let start = pilot.averaging_point().unwrap_or_else(|| vec![0.0, 0.0]);
        let orbit_opts = OrbitOptions {
            tol: opts.tol,
            steps_per_period: opts.steps_per_period,
            ..OrbitOptions::default()
        };
        let gamma =
            sim::periodic_orbit_uncertified(&pilot, &norm, &start, &orbit_opts, opts.max_periods)
                .map_err(|e| match e {
                    Error::Escape { t, x } => Error::CertificationRefused(format!(
                        "simulated orbit diverged (t = {t}, x = {x:?}); no empirical box"
                    )),
                    Error::OrbitNotConverged { iterations, last_step } => {
                        Error::CertificationRefused(format!(
                            "simulated orbit did not settle in {iterations} periods \
                             (last step {last_step}); no empirical box"
                        ))
                    }
                    other => other,
                })?;

        let hull = StateBox::hull(
            gamma
                .samples()
                .iter()
                .chain(kappa.samples())
                .map(|x| x.as_slice()),
        )?;
        let pad: Vec<f64> = (0..2)
            .map(|i| opts.pad_fraction * hull.span(i).max(1e-3))
            .collect();
        let bx = hull.inflate(&pad)?;
        let (d, eta) = optimize_scaling_d_on_box(&params, &bx)?;
        if !(eta > 0.0) {
            return Err(Error::NotContractive {
                worst: -eta,
                t: 0.0,
                x: bx.lower().to_vec(),
            });
        }
        Ok(Self {
            params,
            input,
            bx,
            d,
            eta,
            nominal,
            empirical: true,
            seed: Some(gamma.sample(0).to_vec()),
        })
    }

    pub fn params_struct(&self) -> &TranscriptionalParams {
        &self.params
    }

    /// Scaling `d` of the certificate norm.
    pub fn scaling(&self) -> f64 {
        self.d
    }

    /// `(d*, eta*)` of the nominal box, whether or not it applies.
    pub fn nominal_scaling(&self) -> (f64, f64) {
        self.nominal
    }

    pub fn is_empirical(&self) -> bool {
        self.empirical
    }
}

impl DynSystem for Transcriptional {
    fn name(&self) -> &str {
        "transmod"
    }

    fn dim(&self) -> usize {
        2
    }

    fn params(&self) -> Vec<(String, f64)> {
        let p = &self.params;
        let omega = self
            .input
            .terms()
            .iter()
            .find(|c| c.omega > 0.0)
            .map_or(0.0, |c| c.omega);
        vec![
            ("delta".into(), p.delta),
            ("k1".into(), p.k1),
            ("k2".into(), p.k2),
            ("et".into(), p.e_total),
            ("offset".into(), self.input.mean()),
            ("amp".into(), self.input.ceiling() - self.input.mean()),
            ("omega".into(), omega),
            ("d".into(), self.d),
            ("d_nominal".into(), self.nominal.0),
            ("eta_nominal".into(), self.nominal.1),
        ]
    }

    fn input(&self) -> &PeriodicInput {
        &self.input
    }

    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]) {
        let p = &self.params;
        let binding = p.k2 * (p.e_total - x[1]) * x[0];
        let release = p.k1 * x[1];
        out[0] = v - p.delta * x[0] + release - binding;
        out[1] = -release + binding;
    }

    fn rhs_jacobian(&self, x: &[f64], _v: f64) -> Matrix {
        let p = &self.params;
        let free = p.k2 * (p.e_total - x[1]);
        let coupling = p.k1 + p.k2 * x[0];
        Matrix::from_rows(&[vec![-p.delta - free, coupling], vec![free, -coupling]])
            .expect("2x2 rows")
    }

    fn state_box(&self) -> &StateBox {
        &self.bx
    }

    fn certificate_norm(&self) -> NormSpec {
        NormSpec::diagonal(NormKind::L1, vec![self.d, 1.0]).expect("d is positive")
    }

    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        let mut cert = if self.empirical {
            ContractionCertificate::analytic(
                self.certificate_norm(),
                self.eta,
                "corner column sums on the simulated hull",
            )
        } else {
            ContractionCertificate::analytic(
                self.certificate_norm(),
                self.eta,
                "min{k1(1-d), delta + k2 eT (1 - 1/d)}",
            )
        };
        cert.heuristic = self.empirical;
        Ok(Some(cert))
    }

    fn orbit_seed(&self) -> Option<Vec<f64>> {
        self.seed.clone()
    }

    fn averaging_point(&self) -> Option<Vec<f64>> {
        let p = &self.params;
        let z1 = self.input.mean() / p.delta;
        let denom = p.k1 + p.k2 * z1;
        if denom <= 0.0 {
            return None;
        }
        Some(vec![z1, p.k2 * p.e_total * z1 / denom])
    }

    /// Linearization at the unforced equilibrium `x = 0, u = 0`.
    fn linearization(&self) -> Option<Linearization> {
        let p = &self.params;
        let a = Matrix::from_rows(&[
            vec![-p.delta - p.binding(), p.k1],
            vec![p.binding(), -p.k1],
        ])
        .ok()?;
        let mut b = Matrix::zeros(2, 1);
        b[(0, 0)] = 1.0;
        let lti = LtiSystem::new(a, b, None).ok()?;
        Some(Linearization {
            lti,
            input_offset: 0.0,
        })
    }

    fn mismatch_is_multiaffine(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: TranscriptionalParams = TranscriptionalParams {
        delta: 1.0,
        k1: 1.0,
        k2: 5.0,
        e_total: 2.0,
    };

    #[test]
    fn optimal_scaling_matches_quadratic_root() {
        let (d, eta) = optimize_scaling_d(&REFERENCE).unwrap();
        let root = (-10.0 + 140f64.sqrt()) / 2.0;
        assert!((d - root).abs() < 1e-14);
        assert!((eta - (1.0 - root)).abs() < 1e-14);
        assert!((eta - REFERENCE.nominal_rate(d)).abs() < 1e-12);
        assert!(d > 10.0 / 11.0 && d < 1.0);
    }

    #[test]
    fn weak_binding_limit() {
        let p = TranscriptionalParams {
            k2: 1e-9,
            ..REFERENCE
        };
        let (d, eta) = optimize_scaling_d(&p).unwrap();
        // the crossing sits near d = sqrt(k2 eT), so eta -> delta
        assert!((d - (2e-9f64).sqrt()).abs() < 1e-7);
        assert!((eta - 1.0).abs() < 1e-4);
    }

    #[test]
    fn box_search_agrees_with_nominal_on_nominal_box() {
        let sys = Transcriptional::new(REFERENCE, PeriodicInput::cosine(1.0, 1.0, 1.0).unwrap()).unwrap();
        let (d, eta) = optimize_scaling_d_on_box(&REFERENCE, sys.state_box()).unwrap();
        let (d0, eta0) = optimize_scaling_d(&REFERENCE).unwrap();
        assert!((eta - eta0).abs() < 1e-9, "{eta} vs {eta0}");
        assert!((d - d0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_on_the_saturated_face() {
        let sys = Transcriptional::new(REFERENCE, PeriodicInput::constant(1.0, 1.0).unwrap()).unwrap();
        let j = sys.jacobian(0.0, &[0.3, 2.0]);
        assert_eq!(j[(0, 0)], -1.0);
        let z = sys.averaging_point().unwrap();
        assert!(sys.field_vec(0.0, &z).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn negative_input_needs_empirical_box() {
        let u = PeriodicInput::cosine(0.0, 1.0, 5.0).unwrap();
        assert!(Transcriptional::new(REFERENCE, u.clone()).is_err());
        let sys = Transcriptional::empirical(REFERENCE, u, &EmpiricalBoxOptions::default()).unwrap();
        let cert = sys.analytic_certificate().unwrap().unwrap();
        assert!(cert.heuristic);
        assert!(cert.eta > 0.0);
        assert!(sys.state_box().lower()[0] < 0.0);
    }
}
