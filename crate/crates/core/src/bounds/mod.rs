//! Bounds on the distance between the entrained orbit `gamma` and the orbit
//! `kappa` of an approximating system, driven by the mismatch
//! `|F(s, kappa(s)) - G(s, kappa(s))|`.

mod approx;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{certify, CertifyOptions, ContractionCertificate, DynSystem};
use crate::norms::NormSpec;
use crate::output::format_number;
use crate::sim::{self, orbit_distance_curve, OrbitOptions, StepOptions, BOX_SLACK};

pub use approx::{
    ApproxField, ApproxSystem, Approximant, Averaged, BoxProgram, KappaSource, Linearized,
};

pub const DEFAULT_VALIDITY_SLACK: f64 = 1e-4;
pub const QUADRATURE_REL_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_REFINEMENTS: usize = 4;

/// `|f - g|` sampled at `k T / N`, `k = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MismatchSignal {
    period: f64,
    values: Vec<f64>,
}

impl MismatchSignal {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive, got {period}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "mismatch needs at least two samples".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "mismatch samples must be finite and nonnegative, got {v}"
            )));
        }
        Ok(Self { period, values })
    }

    /// Samples `f` on `panels + 1` points of `[0, T]`.
    pub fn from_fn(period: f64, panels: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period / panels as f64;
        Self::new(period, (0..=panels).map(|k| f(h * k as f64)).collect())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn panels(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.period / self.panels() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Weights of the panel rule `c+ = decay c + w0 v_k + w1 v_{k+1}` for
/// piecewise-linear `v` and the exact exponential kernel.
fn panel_weights(eta: f64, h: f64) -> (f64, f64, f64) {
    let x = eta * h;
    let decay = (-x).exp();
    if x < 0.1 {
        let (mut w0, mut w1) = (0.0, 0.0);
        let mut term = 1.0; // (-x)^k / k!
        for k in 0..30 {
            let kf = k as f64;
            w0 += term / (kf + 2.0);
            w1 += term / ((kf + 1.0) * (kf + 2.0));
            term *= -x / (kf + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        (decay, h * w0, h * w1)
    } else {
        let w0 = (1.0 - decay * (1.0 + x)) / (eta * eta * h);
        let w1 = -(-x).exp_m1() / eta - w0;
        (decay, w0, w1)
    }
}

/// Running values `c(k h) = int_0^{k h} e^{-eta (k h - s)} v(s) ds`, with `v`
/// linear between samples.
pub fn weighted_quadrature_curve(values: &[f64], h: f64, eta: f64) -> Result<Vec<f64>> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "quadrature rate must be nonnegative, got {eta}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let (decay, w0, w1) = panel_weights(eta, h);
    let mut out = Vec::with_capacity(values.len());
    let mut c = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        c = decay * c + w0 * pair[0] + w1 * pair[1];
        out.push(c);
    }
    Ok(out)
}

/// `int_0^alpha e^{-eta (alpha - s)} v(s) ds` on a uniform grid over `[0, alpha]`.
pub fn weighted_quadrature(values: &[f64], h: f64, eta: f64) -> Result<f64> {
    Ok(*weighted_quadrature_curve(values, h, eta)?
        .last()
        .unwrap_or(&0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Weighted integral of a function, doubling the panel count from `panels`
/// until successive values agree to 1e-6 relative (at most 2^20 panels).
pub fn weighted_quadrature_fn(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    eta: f64,
    panels: usize,
) -> Result<QuadratureEstimate> {
    if alpha == 0.0 {
        return Ok(QuadratureEstimate {
            value: 0.0,
            panels: 0,
            converged: true,
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "upper limit must be nonnegative, got {alpha}"
        )));
    }
    let mut n = panels.max(1);
    let sample = |n: usize| -> Vec<f64> {
        let h = alpha / n as f64;
        (0..=n).map(|k| f(h * k as f64)).collect()
    };
    let mut prev = weighted_quadrature(&sample(n), alpha / n as f64, eta)?;
    while n < 1 << 20 {
        n *= 2;
        let next = weighted_quadrature(&sample(n), alpha / n as f64, eta)?;
        if (next - prev).abs() <= QUADRATURE_REL_TOL * next.abs() {
            return Ok(QuadratureEstimate {
                value: next,
                panels: n,
                converged: true,
            });
        }
        prev = next;
    }
    Ok(QuadratureEstimate {
        value: prev,
        panels: n,
        converged: false,
    })
}

/// Periodic bound `e^{-eta tau} c(T) / (1 - e^{-eta T}) + c(tau)` on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub c_period: f64,
    /// Values at `tau_k = k T / N`, `k = 0..N`.
    pub values: Vec<f64>,
}

pub fn periodic_bound_curve(mismatch: &MismatchSignal, eta: f64) -> Result<BoundCurve> {
    periodic_bound_curve_on(mismatch, eta, 1)
}

/// As [`periodic_bound_curve`], reporting every `stride`-th sample.
fn periodic_bound_curve_on(mismatch: &MismatchSignal, eta: f64, stride: usize) -> Result<BoundCurve> {
    if !(eta > 0.0) {
        return Err(Error::NonPositiveRate(eta));
    }
    let h = mismatch.step();
    let c = weighted_quadrature_curve(mismatch.values(), h, eta)?;
    let c_period = c[c.len() - 1];
    let lead = c_period / -(-eta * mismatch.period()).exp_m1();
    let values = (0..mismatch.panels())
        .step_by(stride)
        .map(|k| (-eta * h * k as f64).exp() * lead + c[k])
        .collect();
    Ok(BoundCurve { c_period, values })
}

/// `max_t |f - g| / eta`.
pub fn max_form_bound(mismatch: &MismatchSignal, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::NonPositiveRate(eta));
    }
    Ok(mismatch.max() / eta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxBound {
    pub value: f64,
    /// True when obtained by vertex enumeration of a multiaffine mismatch.
    pub exact: bool,
}

const GRID_BUDGET: usize = 200_000;
const LINE_POINTS: usize = 129;

/// `max |H(z, w)| / eta` over `|z_r| <= caps_z[r]`, `|w| <= cap_w`. Exact by
/// vertex enumeration when `H` is multiaffine; otherwise a grid search
/// refined by coordinate ascent, reported as inexact.
pub fn box_program_bound(
    h: &dyn Fn(&[f64], f64) -> Vec<f64>,
    caps_z: &[f64],
    cap_w: f64,
    multiaffine: bool,
    eta: f64,
    norm: &NormSpec,
) -> Result<BoxBound> {
    if !(eta > 0.0) {
        return Err(Error::NonPositiveRate(eta));
    }
    if caps_z.iter().chain([&cap_w]).any(|c| !(*c >= 0.0 && c.is_finite())) {
        return Err(Error::InvalidParameter(
            "box caps must be finite and nonnegative".into(),
        ));
    }
    let n = caps_z.len();
    let mut caps = caps_z.to_vec();
    caps.push(cap_w);
    let objective = |p: &[f64]| -> Result<f64> { norm.norm(&h(&p[..n], p[n])) };

    let per_axis = if multiaffine {
        2
    } else {
        let dims = caps.iter().filter(|c| **c > 0.0).count().max(1) as f64;
        let g = (GRID_BUDGET as f64).powf(1.0 / dims).floor() as usize;
        (g.clamp(3, 65) / 2) * 2 + 1
    };
    let axes: Vec<Vec<f64>> = caps
        .iter()
        .map(|&c| {
            if c == 0.0 {
                vec![0.0]
            } else {
                (0..per_axis)
                    .map(|k| -c + 2.0 * c * k as f64 / (per_axis - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_point = vec![0.0; n + 1];
    for p in crate::models::tensor_product(&axes) {
        let v = objective(&p)?;
        if v > best {
            best = v;
            best_point = p;
        }
    }
    if multiaffine {
        return Ok(BoxBound {
            value: best / eta,
            exact: true,
        });
    }

    for _ in 0..50 {
        let before = best;
        for i in 0..=n {
            let c = caps[i];
            if c == 0.0 {
                continue;
            }
            let centre = best_point[i];
            let width = 2.0 * c / (per_axis - 1) as f64;
            for k in 0..LINE_POINTS {
                let s = (centre - width + 2.0 * width * k as f64 / (LINE_POINTS - 1) as f64)
                    .clamp(-c, c);
                let mut p = best_point.clone();
                p[i] = s;
                let v = objective(&p)?;
                if v > best {
                    best = v;
                    best_point = p;
                }
            }
        }
        if best <= before * (1.0 + 1e-15) {
            break;
        }
    }
    Ok(BoxBound {
        value: best / eta,
        exact: false,
    })
}

/// Box program of an approximant for a given model and certificate.
pub fn approximant_box_bound(
    sys: &dyn DynSystem,
    program: &BoxProgram,
    cert: &ContractionCertificate,
) -> Result<BoxBound> {
    box_program_bound(
        &|z, w| program.mismatch(sys, z, w),
        &program.caps_z,
        program.cap_w,
        program.multiaffine,
        cert.eta,
        &cert.norm,
    )
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub orbit: OrbitOptions,
    /// Relative slack of the validity check.
    pub validity_slack: f64,
    /// Maximum number of mismatch-grid doublings.
    pub max_refinements: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            orbit: OrbitOptions::default(),
            validity_slack: DEFAULT_VALIDITY_SLACK,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

/// Comparison of `gamma` and `kappa` against the periodic bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub model: String,
    pub approximant: String,
    pub params: Vec<Param>,
    pub norm: NormSpec,
    pub eta: f64,
    pub certificate: String,
    pub heuristic: bool,
    pub period: f64,
    pub grid: usize,
    /// Mismatch grid is `refinement` times finer than the output grid.
    pub refinement: usize,
    pub c_period: f64,
    pub constant_bound: f64,
    pub box_bound: Option<BoxBound>,
    pub max_measured: f64,
    pub max_curve: f64,
    pub max_ratio: f64,
    pub valid: bool,
    pub closure_defect: f64,
    pub iterations: usize,
    pub taus: Vec<f64>,
    pub measured: Vec<f64>,
    pub curve: Vec<f64>,
}

impl BoundReport {
    /// CSV with columns `tau,measured,bound_curve,constant_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,measured,bound_curve,constant_bound\n");
        let constant = format_number(self.constant_bound);
        for k in 0..self.taus.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_number(self.taus[k]),
                format_number(self.measured[k]),
                format_number(self.curve[k]),
                constant
            ));
        }
        out
    }
}

/// Absolute allowance for the period-map stopping error `tol / (1 - e^{-eta T})`.
fn orbit_error_allowance(tol: f64, eta: f64, period: f64) -> f64 {
    10.0 * tol / -(-eta * period).exp_m1()
}

/// Compute `gamma`, `kappa`, the measured distance, and the periodic and
/// constant bounds for one approximating system.
pub fn compare(
    sys: &dyn DynSystem,
    approx: &ApproxSystem,
    cert: &ContractionCertificate,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if !(cert.eta > 0.0) {
        return Err(Error::NonPositiveRate(cert.eta));
    }
    let period = sys.period();
    let n = opts.orbit.steps_per_period;
    let kappa = approx.kappa.sample(period, n)?;
    for k in 0..n {
        if !sys.state_box().contains(kappa.sample(k), BOX_SLACK) {
            return Err(Error::KappaOutsideBox {
                t: kappa.time(k),
                x: kappa.sample(k).to_vec(),
            });
        }
    }

    let start = sys
        .orbit_seed()
        .filter(|x| sys.state_box().contains(x, 0.0))
        .unwrap_or_else(|| sys.state_box().clamp(kappa.sample(0)));
    let gamma = sim::periodic_orbit(sys, cert, &start, &opts.orbit)?;
    let measured = orbit_distance_curve(&gamma, &kappa, &cert.norm)?;

    let norm = &cert.norm;
    let mismatch_at = |s: f64| -> Result<f64> {
        let y = approx.kappa.eval(s);
        let u = sys.input().eval(s);
        let mut f = vec![0.0; y.len()];
        sys.rhs(&y, u, &mut f);
        let g = approx.field.eval(&y, u);
        norm.distance(&f, &g)
    };
    let sample = |panels: usize| -> Result<MismatchSignal> {
        let h = period / panels as f64;
        let values = (0..=panels)
            .map(|k| mismatch_at(h * k as f64))
            .collect::<Result<Vec<_>>>()?;
        MismatchSignal::new(period, values)
    };

    let mut refinement = 1;
    let mut signal = sample(n)?;
    let mut curve = periodic_bound_curve_on(&signal, cert.eta, 1)?;
    for _ in 0..opts.max_refinements {
        let finer = sample(n * refinement * 2)?;
        let next = periodic_bound_curve_on(&finer, cert.eta, refinement * 2)?;
        let change = (next.c_period - curve.c_period).abs();
        refinement *= 2;
        signal = finer;
        curve = next;
        if change <= QUADRATURE_REL_TOL * curve.c_period.abs() {
            break;
        }
    }
    let constant_bound = max_form_bound(&signal, cert.eta)?;

    let allowance = orbit_error_allowance(opts.orbit.tol, cert.eta, period);
    let mut max_ratio: f64 = 0.0;
    let mut valid = true;
    for (m, b) in measured.iter().zip(&curve.values) {
        if *b > 0.0 {
            max_ratio = max_ratio.max(m / b);
        } else if *m > 0.0 && *m > allowance {
            max_ratio = f64::INFINITY;
        }
        if *m > b * (1.0 + opts.validity_slack) + allowance {
            valid = false;
        }
    }

    let box_bound = match &approx.program {
        Some(program) => Some(approximant_box_bound(sys, program, cert)?),
        None => None,
    };

    Ok(BoundReport {
        model: sys.name().to_string(),
        approximant: approx.label.clone(),
        params: sys
            .params()
            .into_iter()
            .map(|(name, value)| Param { name, value })
            .collect(),
        norm: cert.norm.clone(),
        eta: cert.eta,
        certificate: cert.describe(),
        heuristic: cert.heuristic || box_bound.is_some_and(|b| !b.exact),
        period,
        grid: n,
        refinement,
        c_period: curve.c_period,
        constant_bound,
        box_bound,
        max_measured: measured.iter().copied().fold(0.0, f64::max),
        max_curve: curve.values.iter().copied().fold(0.0, f64::max),
        max_ratio,
        valid,
        closure_defect: gamma.closure_defect(),
        iterations: gamma.iterations(),
        taus: (0..n).map(|k| gamma.time(k)).collect(),
        measured,
        curve: curve.values,
    })
}

/// Bound against the constant orbit at `z`.
pub fn averaged_input_bound(
    sys: &dyn DynSystem,
    z: &[f64],
    cert: &ContractionCertificate,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let approx = Averaged {
        point: Some(z.to_vec()),
    }
    .build(sys)?;
    compare(sys, &approx, cert, opts)
}

/// Bound against the orbit of the model's linearization.
pub fn linearized_bound(
    sys: &dyn DynSystem,
    cert: &ContractionCertificate,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let approx = Linearized.build(sys)?;
    compare(sys, &approx, cert, opts)
}

/// Transient from `x(0) = z` against `int_0^t e^{-eta (t - s)} |F(z, u(s))| ds`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransientReport {
    pub times: Vec<f64>,
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
}

pub fn averaged_transient(
    sys: &dyn DynSystem,
    z: &[f64],
    cert: &ContractionCertificate,
    t_end: f64,
    steps: &StepOptions,
) -> Result<TransientReport> {
    if !(cert.eta > 0.0) {
        return Err(Error::NonPositiveRate(cert.eta));
    }
    let traj = sim::integrate_with(sys, z, 0.0, t_end, steps)?;
    let measured = traj
        .states
        .iter()
        .map(|x| cert.norm.distance(x, z))
        .collect::<Result<Vec<_>>>()?;
    let mismatch = |s: f64| -> Result<f64> { cert.norm.norm(&sys.field_vec(s, z)) };
    let panels = traj.len() - 1;
    let mut stride = 1;
    let mut bound = Vec::new();
    let mut last = f64::NAN;
    for _ in 0..=DEFAULT_MAX_REFINEMENTS {
        let fine = panels * stride;
        let h = t_end / fine as f64;
        let values = (0..=fine)
            .map(|k| mismatch(h * k as f64))
            .collect::<Result<Vec<_>>>()?;
        let c = weighted_quadrature_curve(&values, h, cert.eta)?;
        let end = c[fine];
        bound = c.into_iter().step_by(stride).collect();
        if (end - last).abs() <= QUADRATURE_REL_TOL * end.abs() {
            break;
        }
        last = end;
        stride *= 2;
    }
    Ok(TransientReport {
        times: (0..traj.len()).map(|k| traj.time(k)).collect(),
        measured,
        bound,
    })
}

/// One frequency of a low-pass sweep; failures keep NaN values and a message.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub measured_max: f64,
    pub bound_max: f64,
    pub eta: f64,
    pub error: Option<String>,
}

pub type SystemFactory<'a> = dyn Fn(f64) -> Result<Box<dyn DynSystem>> + Sync + 'a;

/// For each frequency: build, certify, and compare; the bound column is the
/// box program when available and the max-form bound otherwise.
pub fn lowpass_sweep(
    factory: &SystemFactory<'_>,
    omegas: &[f64],
    approximant: &dyn Approximant,
    opts: &BoundOptions,
) -> Vec<SweepRow> {
    omegas
        .par_iter()
        .map(|&omega| {
            let run = || -> Result<(f64, f64, f64)> {
                let sys = factory(omega)?;
                let cert = certify(sys.as_ref(), &CertifyOptions::default())?;
                let approx = approximant.build(sys.as_ref())?;
                let report = compare(sys.as_ref(), &approx, &cert, opts)?;
                let bound = report
                    .box_bound
                    .map_or(report.constant_bound, |b| b.value);
                Ok((report.max_measured, bound, report.eta))
            };
            match run() {
                Ok((measured_max, bound_max, eta)) => SweepRow {
                    omega,
                    measured_max,
                    bound_max,
                    eta,
                    error: None,
                },
                Err(e) => SweepRow {
                    omega,
                    measured_max: f64::NAN,
                    bound_max: f64::NAN,
                    eta: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Least-squares slope of `ln value` against `ln omega` over the top decade.
pub fn fit_loglog_slope(omegas: &[f64], values: &[f64]) -> Option<f64> {
    let top = omegas
        .iter()
        .zip(values)
        .filter(|(w, v)| v.is_finite() && **v > 0.0 && **w > 0.0)
        .map(|(w, _)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = omegas
        .iter()
        .zip(values)
        .filter(|(w, v)| v.is_finite() && **v > 0.0 && **w > 0.0 && **w >= top / 10.0 * (1.0 - 1e-12))
        .map(|(w, v)| (w.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_weights_are_continuous_across_the_series_switch() {
        let (eta, h) = (2.0, 0.0499);
        let x: f64 = eta * h;
        let (_, w0, w1) = panel_weights(eta, h);
        let c0 = (1.0 - (-x).exp() * (1.0 + x)) / (eta * eta * h);
        let c1 = (1.0 - (-x).exp()) / eta - c0;
        assert!((w0 - c0).abs() < 1e-13 * h && (w1 - c1).abs() < 1e-13 * h);
        let (d, w0, w1) = panel_weights(0.0, 0.5);
        assert_eq!((d, w0, w1), (1.0, 0.25, 0.25));
    }

    #[test]
    fn constant_integrand() {
        let values = vec![1.0; 20001];
        let c = weighted_quadrature(&values, 0.001, 1.0).unwrap();
        assert!((c - (1.0 - (-20f64).exp())).abs() < 1e-12);
        assert_eq!(weighted_quadrature(&[0.0; 10], 0.1, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn periodic_curve_is_dominated_by_max_form() {
        let sig = MismatchSignal::from_fn(2.0, 512, |s| (3.0 * s).sin().abs() + 0.1).unwrap();
        let curve = periodic_bound_curve(&sig, 0.7).unwrap();
        let cst = max_form_bound(&sig, 0.7).unwrap();
        assert!(curve.values.iter().all(|v| *v <= cst * (1.0 + 1e-9)));
        assert!(periodic_bound_curve(&sig, 0.0).is_err());
        let zero = MismatchSignal::from_fn(2.0, 16, |_| 0.0).unwrap();
        assert!(periodic_bound_curve(&zero, 1.0).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn box_program_zero_caps_and_vertices() {
        let h = |z: &[f64], w: f64| vec![z[0] * z[1] - z[0] * w, -z[0] * z[1]];
        let zero = box_program_bound(&h, &[0.0, 0.0], 0.0, true, 1.0, &NormSpec::l1()).unwrap();
        assert_eq!(zero.value, 0.0);
        let b = box_program_bound(&h, &[1.0, 2.0], 3.0, true, 2.0, &NormSpec::l1()).unwrap();
        assert!(b.exact);
        assert!((b.value - (2.0 * 2.0 + 3.0) / 2.0).abs() < 1e-15);
        let sq = |z: &[f64], _w: f64| vec![z[1] * z[1], 0.0];
        let q = box_program_bound(&sq, &[0.0, 0.5], 1.0, false, 1.0, &NormSpec::l1()).unwrap();
        assert!(!q.exact);
        assert!((q.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn slope_fit() {
        let w: Vec<f64> = (0..20).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
        let v: Vec<f64> = w.iter().map(|x| 3.0 / (x * x)).collect();
        assert!((fit_loglog_slope(&w, &v).unwrap() + 2.0).abs() < 1e-12);
    }
}
