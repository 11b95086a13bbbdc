//! Fixed-step RK4 integration, entrained-orbit extraction by iterating the
//! period map, and closed-form periodic orbits of LTI systems.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{frequency_response, LtiSystem};
use crate::models::{ContractionCertificate, DynSystem, PeriodicInput};
use crate::norms::NormSpec;

pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;
pub const MIN_STEPS_PER_PERIOD: usize = 64;
pub const DEFAULT_ORBIT_TOL: f64 = 1e-9;
/// Longest RK4 substep; output grids stay at `steps_per_period` samples.
pub const DEFAULT_MAX_STEP: f64 = 0.02;
/// Relative box slack tolerated before a trajectory counts as escaped.
pub const BOX_SLACK: f64 = 1e-7;

/// Samples `x(t0 + k h)`, `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub h: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.h * k as f64
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step(&mut self, sys: &dyn DynSystem, t: f64, x: &mut [f64], h: f64) {
        let n = x.len();
        sys.field(t, x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        sys.field(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        sys.field(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        sys.field(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn check_inside(sys: &dyn DynSystem, t: f64, x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) && sys.state_box().contains(x, BOX_SLACK) {
        Ok(())
    } else {
        Err(Error::Escape { t, x: x.to_vec() })
    }
}

fn check_start(sys: &dyn DynSystem, x0: &[f64]) -> Result<()> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    if !sys.state_box().contains(x0, BOX_SLACK) {
        return Err(Error::OutsideBox(x0.to_vec()));
    }
    Ok(())
}

fn substeps(grid_step: f64, max_step: f64) -> usize {
    if max_step > 0.0 && grid_step > max_step {
        (grid_step / max_step).ceil() as usize
    } else {
        1
    }
}

/// Integration grid: `steps_per_period` output samples per period, each
/// interval split into RK4 substeps no longer than `max_step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub steps_per_period: usize,
    pub max_step: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

impl StepOptions {
    fn validate(&self) -> Result<()> {
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::InvalidParameter(format!(
                "steps_per_period must be at least {MIN_STEPS_PER_PERIOD}, got {}",
                self.steps_per_period
            )));
        }
        Ok(())
    }
}

/// RK4 from `t0` to `t1` with the default substep cap.
pub fn integrate(
    sys: &dyn DynSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    steps_per_period: usize,
) -> Result<Trajectory> {
    integrate_with(
        sys,
        x0,
        t0,
        t1,
        &StepOptions {
            steps_per_period,
            ..StepOptions::default()
        },
    )
}

pub fn integrate_with(
    sys: &dyn DynSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &StepOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    check_start(sys, x0)?;
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "end time {t1} must exceed start time {t0}"
        )));
    }
    let nominal = sys.period() / opts.steps_per_period as f64;
    let count = (((t1 - t0) / nominal) - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / count as f64;
    let sub = substeps(h, opts.max_step);
    let hs = h / sub as f64;
    let mut rk = Rk4::new(x0.len());
    let mut x = x0.to_vec();
    let mut states = Vec::with_capacity(count + 1);
    states.push(x.clone());
    for k in 0..count {
        let base = t0 + h * k as f64;
        for s in 0..sub {
            let t = base + hs * s as f64;
            rk.step(sys, t, &mut x, hs);
            check_inside(sys, t + hs, &x)?;
        }
        states.push(x.clone());
    }
    Ok(Trajectory { t0, h, states })
}

/// One period `T` sampled on a uniform grid of `N` points, `gamma(k T / N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    period: f64,
    samples: Vec<Vec<f64>>,
    closure_defect: f64,
    iterations: usize,
}

impl PeriodicOrbit {
    pub fn new(period: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "orbit period must be positive, got {period}"
            )));
        }
        let n = samples
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("orbit needs at least one sample".into()))?;
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(Self {
            period,
            samples,
            closure_defect: 0.0,
            iterations: 0,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid_len(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn step(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step() * k as f64
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k % self.samples.len()]
    }

    /// `|x(T) - x(0)|` at the last period-map iteration.
    pub fn closure_defect(&self) -> f64 {
        self.closure_defect
    }

    /// Number of period-map iterations performed.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Periodic linear interpolation; grid times return the stored sample.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.samples.len();
        let s = (t / self.period).rem_euclid(1.0) * n as f64;
        let k = (s.floor() as usize).min(n - 1);
        let frac = s - k as f64;
        let a = &self.samples[k];
        if frac == 0.0 {
            return a.clone();
        }
        let b = &self.samples[(k + 1) % n];
        a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect()
    }

    /// Resample onto `n` grid points.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.samples.len() {
            return Ok(self.clone());
        }
        let h = self.period / n as f64;
        let mut out = Self::new(self.period, (0..n).map(|k| self.eval(h * k as f64)).collect())?;
        out.closure_defect = self.closure_defect;
        out.iterations = self.iterations;
        Ok(out)
    }

    /// `(min, max)` of component `i` over the samples.
    pub fn component_range(&self, i: usize) -> (f64, f64) {
        self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s[i]), hi.max(s[i]))
        })
    }
}

/// Period-map settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    pub tol: f64,
    pub steps_per_period: usize,
    pub max_step: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_ORBIT_TOL,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

impl OrbitOptions {
    fn step_options(&self) -> StepOptions {
        StepOptions {
            steps_per_period: self.steps_per_period,
            max_step: self.max_step,
        }
    }
}

fn advance_period(
    sys: &dyn DynSystem,
    x: &mut [f64],
    opts: &StepOptions,
    rk: &mut Rk4,
    mut record: Option<&mut Vec<Vec<f64>>>,
) -> Result<()> {
    let n = opts.steps_per_period;
    let h = sys.period() / n as f64;
    let sub = substeps(h, opts.max_step);
    let hs = h / sub as f64;
    for k in 0..n {
        if let Some(rec) = record.as_deref_mut() {
            rec.push(x.to_vec());
        }
        let base = h * k as f64;
        for s in 0..sub {
            let t = base + hs * s as f64;
            rk.step(sys, t, x, hs);
            check_inside(sys, t + hs, x)?;
        }
    }
    Ok(())
}

fn iterate_period_map(
    sys: &dyn DynSystem,
    norm: &NormSpec,
    x0: &[f64],
    opts: &OrbitOptions,
    max_periods: usize,
) -> Result<PeriodicOrbit> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "orbit tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let steps = opts.step_options();
    steps.validate()?;
    check_start(sys, x0)?;
    let mut rk = Rk4::new(x0.len());
    let mut x = x0.to_vec();
    let mut last_step = f64::INFINITY;
    for k in 1..=max_periods {
        let mut samples = Vec::with_capacity(opts.steps_per_period);
        let mut y = x.clone();
        advance_period(sys, &mut y, &steps, &mut rk, Some(&mut samples))?;
        last_step = norm.distance(&y, &x)?;
        x = y;
        if last_step < opts.tol {
            let mut orbit = PeriodicOrbit::new(sys.period(), samples)?;
            orbit.closure_defect = last_step;
            orbit.iterations = k;
            return Ok(orbit);
        }
    }
    Err(Error::OrbitNotConverged {
        iterations: max_periods,
        last_step,
    })
}

/// Iteration cap `ceil(ln(diam / tol) / (eta T)) + 10`.
pub fn period_cap(sys: &dyn DynSystem, cert: &ContractionCertificate, tol: f64) -> Result<usize> {
    let diam = sys.state_box().diameter_bound(&cert.norm)?.max(tol);
    let periods = ((diam / tol).ln() / (cert.eta * sys.period())).ceil();
    Ok(periods.max(0.0) as usize + 10)
}

/// Entrained orbit by iterating `x -> x(T; x)` until successive period-start
/// states differ by less than `opts.tol` in the certificate norm.
pub fn periodic_orbit(
    sys: &dyn DynSystem,
    cert: &ContractionCertificate,
    x0: &[f64],
    opts: &OrbitOptions,
) -> Result<PeriodicOrbit> {
    if !(cert.eta > 0.0) {
        return Err(Error::NonPositiveRate(cert.eta));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "orbit tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let cap = period_cap(sys, cert, opts.tol)?;
    iterate_period_map(sys, &cert.norm, x0, opts, cap)
}

/// Same iteration without a certificate; convergence is not guaranteed, so
/// the caller supplies the norm and the cap.
pub fn periodic_orbit_uncertified(
    sys: &dyn DynSystem,
    norm: &NormSpec,
    x0: &[f64],
    opts: &OrbitOptions,
    max_periods: usize,
) -> Result<PeriodicOrbit> {
    iterate_period_map(sys, norm, x0, opts, max_periods)
}

#[derive(Clone, Debug)]
struct Harmonic {
    omega: f64,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

/// Steady-state response of a Hurwitz LTI system to a cosine-sum input:
/// `e + g(0) u_bar + sum_i a_i |g(j w_i)| cos(w_i t + phi_i + arg g(j w_i))`.
#[derive(Clone, Debug)]
pub struct LtiOrbit {
    period: f64,
    center: Vec<f64>,
    harmonics: Vec<Harmonic>,
}

impl LtiOrbit {
    pub fn new(sys: &LtiSystem, input: &PeriodicInput) -> Result<Self> {
        sys.ensure_hurwitz()?;
        if sys.inputs() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: sys.inputs(),
            });
        }
        let dc = frequency_response(sys, 0.0)?.entries();
        let level = input.mean();
        let center = sys
            .offset()
            .iter()
            .zip(&dc)
            .map(|(e, g)| e + g.re * level)
            .collect();
        let mut harmonics = Vec::new();
        for term in input.terms() {
            if term.omega == 0.0 || term.amplitude == 0.0 {
                continue;
            }
            let g: Vec<Complex64> = frequency_response(sys, term.omega)?.entries();
            harmonics.push(Harmonic {
                omega: term.omega,
                amplitude: g.iter().map(|z| term.amplitude * z.norm()).collect(),
                phase: g.iter().map(|z| term.phase + z.arg()).collect(),
            });
        }
        Ok(Self {
            period: input.period(),
            center,
            harmonics,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Mean of the orbit.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Upper bound on `max_t |kappa_r(t) - center_r|`; exact for one harmonic.
    pub fn deviation_caps(&self) -> Vec<f64> {
        let mut caps = vec![0.0; self.center.len()];
        for h in &self.harmonics {
            for (c, a) in caps.iter_mut().zip(&h.amplitude) {
                *c += a.abs();
            }
        }
        caps
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = self.center.clone();
        for h in &self.harmonics {
            for r in 0..out.len() {
                out[r] += h.amplitude[r] * (h.omega * t + h.phase[r]).cos();
            }
        }
        out
    }

    pub fn sample(&self, n: usize) -> Result<PeriodicOrbit> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid must be nonempty".into()));
        }
        let h = self.period / n as f64;
        PeriodicOrbit::new(self.period, (0..n).map(|k| self.eval(h * k as f64)).collect())
    }
}

/// Closed-form periodic orbit of a Hurwitz LTI system sampled on `n` points.
pub fn lti_periodic_orbit(sys: &LtiSystem, input: &PeriodicInput, n: usize) -> Result<PeriodicOrbit> {
    LtiOrbit::new(sys, input)?.sample(n)
}

/// `tau -> |gamma(tau) - kappa(tau)|` on the finer of the two grids.
pub fn orbit_distance_curve(
    gamma: &PeriodicOrbit,
    kappa: &PeriodicOrbit,
    norm: &NormSpec,
) -> Result<Vec<f64>> {
    let (tg, tk) = (gamma.period(), kappa.period());
    if (tg - tk).abs() > 1e-9 * tg.abs().max(tk.abs()) {
        return Err(Error::PeriodMismatch(tg, tk));
    }
    let n = gamma.grid_len().max(kappa.grid_len());
    let h = tg / n as f64;
    (0..n)
        .map(|k| {
            let t = h * k as f64;
            let a = if gamma.grid_len() == n {
                gamma.sample(k).to_vec()
            } else {
                gamma.eval(t)
            };
            let b = if kappa.grid_len() == n {
                kappa.sample(k).to_vec()
            } else {
                kappa.eval(t)
            };
            norm.distance(&a, &b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, TAU};

    use super::*;
    use crate::linalg::Matrix;
    use crate::models::{certify, gamma_ex33, CertifyOptions, LtiModel, ScalarForced};

    fn decay() -> LtiModel {
        let lti = LtiSystem::new(
            Matrix::from_diagonal(&[-1.0]),
            Matrix::zeros(1, 1),
            None,
        )
        .unwrap();
        LtiModel::new(lti, PeriodicInput::constant(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn exponential_decay() {
        let sys = decay();
        let traj = integrate(&sys, &[1.0], 0.0, 1.0, 4096).unwrap();
        assert_eq!(traj.len(), 4097);
        assert!((traj.final_state()[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn ex33_converges_to_closed_form() {
        let sys = ScalarForced::new(TAU).unwrap();
        let traj = integrate(&sys, &[0.5], 0.0, 20.0 * TAU, 4096).unwrap();
        assert!((traj.final_state()[0] - gamma_ex33(TAU, 20.0 * TAU)).abs() < 1e-6);

        let cert = certify(&sys, &CertifyOptions::default()).unwrap();
        let orbit = periodic_orbit(&sys, &cert, &[1.0], &OrbitOptions::default()).unwrap();
        assert!(orbit.closure_defect() < 1e-9);
        for k in (0..orbit.grid_len()).step_by(64) {
            let want = gamma_ex33(TAU, orbit.time(k));
            assert!((orbit.sample(k)[0] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn unforced_orbit_is_the_equilibrium() {
        let sys = decay();
        let cert = certify(&sys, &CertifyOptions::default()).unwrap();
        let orbit = periodic_orbit(&sys, &cert, &[0.5], &OrbitOptions::default()).unwrap();
        assert!(orbit.samples().iter().all(|s| s[0].abs() < 1e-9));
    }

    #[test]
    fn first_order_lag_response() {
        let lti = LtiSystem::new(
            Matrix::from_diagonal(&[-1.0]),
            Matrix::from_diagonal(&[1.0]),
            None,
        )
        .unwrap();
        let u = PeriodicInput::cosine(0.0, 1.0, 1.0).unwrap();
        let orbit = LtiOrbit::new(&lti, &u).unwrap();
        assert!((orbit.deviation_caps()[0] - 0.5f64.sqrt()).abs() < 1e-15);
        let t = 0.3;
        let want = 0.5f64.sqrt() * (t - FRAC_PI_4).cos();
        assert!((orbit.eval(t)[0] - want).abs() < 1e-15);
        let zero = LtiOrbit::new(&lti, &PeriodicInput::constant(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(zero.eval(0.7), vec![0.0]);
    }

    #[test]
    fn interpolation_is_exact_on_grid() {
        let orbit = PeriodicOrbit::new(2.0, vec![vec![0.0], vec![1.0], vec![4.0], vec![9.0]]).unwrap();
        assert_eq!(orbit.eval(1.0), vec![4.0]);
        assert_eq!(orbit.eval(0.25), vec![0.5]);
        assert_eq!(orbit.eval(1.75), vec![4.5]);
        assert_eq!(orbit.eval(-0.5), vec![9.0]);
        let other = PeriodicOrbit::new(3.0, vec![vec![0.0]]).unwrap();
        assert!(orbit_distance_curve(&orbit, &other, &NormSpec::l1()).is_err());
        let d = orbit_distance_curve(&orbit, &orbit, &NormSpec::l1()).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
    }
}
