//! Periodically forced systems `x' = F(x, u(t))` on an invariant box, plus
//! contraction certificates and invariance checks.

mod ex52;
mod input;
mod lti;
mod rfm;
mod scalar;
mod transcriptional;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{LtiSystem, Matrix};
use crate::norms::NormSpec;

pub use ex52::{max_gamma1_ex52, orbit_ex52, QuadraticCascade};
pub use input::{CosineTerm, PeriodicInput};
pub use lti::LtiModel;
pub use rfm::{rfm2_equilibrium, Rfm};
pub use scalar::{gamma_ex33, ScalarForced};
pub use transcriptional::{
    optimize_scaling_d, optimize_scaling_d_on_box, EmpiricalBoxOptions, Transcriptional,
    TranscriptionalParams,
};

/// Axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl StateBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) || l > u {
                return Err(Error::InvalidParameter(format!(
                    "box side {i} is not a finite interval: [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    /// Smallest box containing all points.
    pub fn hull<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut it = points.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidParameter("hull of an empty point set".into()))?;
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for p in it {
            if p.len() != lower.len() {
                return Err(Error::DimensionMismatch {
                    expected: lower.len(),
                    got: p.len(),
                });
            }
            for i in 0..p.len() {
                lower[i] = lower[i].min(p[i]);
                upper[i] = upper[i].max(p[i]);
            }
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn span(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn max_span(&self) -> f64 {
        (0..self.dim()).map(|i| self.span(i)).fold(0.0, f64::max)
    }

    /// Membership with a per-side tolerance of `slack * max(1, span)`.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| {
                let tol = slack * self.span(i).max(1.0);
                v >= self.lower[i] - tol && v <= self.upper[i] + tol
            })
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(self.lower[i], self.upper[i]))
            .collect()
    }

    /// Widen every side by `pad[i]`.
    pub fn inflate(&self, pad: &[f64]) -> Result<Self> {
        if pad.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: pad.len(),
            });
        }
        Self::new(
            self.lower.iter().zip(pad).map(|(l, p)| l - p).collect(),
            self.upper.iter().zip(pad).map(|(u, p)| u + p).collect(),
        )
    }

    /// Upper bound on the diameter in `norm`, via the triangle inequality
    /// over the coordinate directions.
    pub fn diameter_bound(&self, norm: &NormSpec) -> Result<f64> {
        let n = self.dim();
        let mut total = 0.0;
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = self.span(i);
            total += norm.norm(&e)?;
            e[i] = 0.0;
        }
        Ok(total)
    }

    /// Evenly spaced values along side `i` (a single value on a degenerate side).
    pub fn axis_points(&self, i: usize, per_axis: usize) -> Vec<f64> {
        if self.span(i) == 0.0 || per_axis < 2 {
            return vec![self.lower[i]];
        }
        (0..per_axis)
            .map(|k| {
                if k + 1 == per_axis {
                    self.upper[i]
                } else {
                    self.lower[i] + self.span(i) * k as f64 / (per_axis - 1) as f64
                }
            })
            .collect()
    }

    /// Tensor grid of `per_axis` points per side, endpoints included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| self.axis_points(i, per_axis))
            .collect();
        tensor_product(&axes)
    }

    /// All `2^n` corners.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                if self.span(i) == 0.0 {
                    vec![self.lower[i]]
                } else {
                    vec![self.lower[i], self.upper[i]]
                }
            })
            .collect();
        tensor_product(&axes)
    }
}

pub(crate) fn tensor_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// LTI approximant `G(y, t) = A (y - e) + B (u(t) - input_offset)`.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub lti: LtiSystem,
    pub input_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertificateKind {
    Analytic {
        formula: String,
    },
    Sampled {
        grid_per_axis: usize,
        time_samples: usize,
        worst_measure: f64,
        worst_t: f64,
        worst_x: Vec<f64>,
        analytic_eta: Option<f64>,
    },
}

/// `mu(J(t, x)) <= -eta` on the box, in `norm`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionCertificate {
    pub norm: NormSpec,
    pub eta: f64,
    pub kind: CertificateKind,
    /// Set when the box or norm came from a numerical search rather than a proof.
    pub heuristic: bool,
}

impl ContractionCertificate {
    pub fn analytic(norm: NormSpec, eta: f64, formula: impl Into<String>) -> Self {
        Self {
            norm,
            eta,
            kind: CertificateKind::Analytic {
                formula: formula.into(),
            },
            heuristic: false,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.kind, CertificateKind::Analytic { .. })
    }

    pub fn describe(&self) -> String {
        let base = match &self.kind {
            CertificateKind::Analytic { formula } => format!("analytic ({formula})"),
            CertificateKind::Sampled {
                grid_per_axis,
                time_samples,
                ..
            } => format!("sampled ({grid_per_axis}/axis, {time_samples} times)"),
        };
        if self.heuristic {
            format!("{base}, heuristic")
        } else {
            base
        }
    }
}

/// A periodically forced system with a known invariant box.
pub trait DynSystem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn params(&self) -> Vec<(String, f64)>;

    fn input(&self) -> &PeriodicInput;

    /// `F(x, v)` with the input value `v` frozen.
    fn rhs(&self, x: &[f64], v: f64, out: &mut [f64]);

    /// `dF/dx (x, v)`.
    fn rhs_jacobian(&self, x: &[f64], v: f64) -> Matrix;

    fn state_box(&self) -> &StateBox;

    /// Norm in which contraction is claimed.
    fn certificate_norm(&self) -> NormSpec;

    /// `Ok(None)` when no closed form is known; `Err` when one is known but
    /// its hypotheses fail for these parameters.
    fn analytic_certificate(&self) -> Result<Option<ContractionCertificate>> {
        Ok(None)
    }

    /// Reason to refuse any certificate for this instance.
    fn certification_refusal(&self) -> Option<String> {
        None
    }

    /// Equilibrium of the system driven by the input mean.
    fn averaging_point(&self) -> Option<Vec<f64>> {
        None
    }

    fn linearization(&self) -> Option<Linearization> {
        None
    }

    /// True when `F` is affine in each state coordinate and in the input
    /// separately, so box maxima of the linearization mismatch sit at corners.
    fn mismatch_is_multiaffine(&self) -> bool {
        false
    }

    /// A point known to lie near the entrained orbit, used to start the
    /// period map instead of the approximant's orbit.
    fn orbit_seed(&self) -> Option<Vec<f64>> {
        None
    }

    /// True when the Jacobian depends on neither state nor time.
    fn jacobian_is_constant(&self) -> bool {
        false
    }

    fn period(&self) -> f64 {
        self.input().period()
    }

    fn field(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.rhs(x, self.input().eval(t), out)
    }

    fn field_vec(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.field(t, x, &mut out);
        out
    }

    fn jacobian(&self, t: f64, x: &[f64]) -> Matrix {
        self.rhs_jacobian(x, self.input().eval(t))
    }
}

pub const DEFAULT_GRID_PER_AXIS: usize = 16;
pub const DEFAULT_TIME_SAMPLES: usize = 64;
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub grid_per_axis: usize,
    pub time_samples: usize,
    /// Certify in this norm instead of the model's own.
    pub norm: Option<NormSpec>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_per_axis: DEFAULT_GRID_PER_AXIS,
            time_samples: DEFAULT_TIME_SAMPLES,
            norm: None,
        }
    }
}

fn sample_times(sys: &dyn DynSystem, time_samples: usize) -> Vec<f64> {
    if sys.input().is_constant() || time_samples <= 1 {
        return vec![0.0];
    }
    let period = sys.period();
    (0..time_samples)
        .map(|j| period * j as f64 / time_samples as f64)
        .collect()
}

/// Evaluate the measure of the Jacobian over a grid of the box and a grid of
/// one period; the certificate rate is minus the worst value.
pub fn check_contraction(
    sys: &dyn DynSystem,
    norm: &NormSpec,
    grid_per_axis: usize,
    time_samples: usize,
) -> Result<ContractionCertificate> {
    if let Some(reason) = sys.certification_refusal() {
        return Err(Error::CertificationRefused(reason));
    }
    if grid_per_axis < 2 || time_samples < 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 grid points per axis and 1 time sample, got {grid_per_axis} and {time_samples}"
        )));
    }
    let (points, times) = if sys.jacobian_is_constant() {
        (vec![sys.state_box().lower().to_vec()], vec![0.0])
    } else {
        (
            sys.state_box().grid(grid_per_axis),
            sample_times(sys, time_samples),
        )
    };

    let n_times = times.len();
    let worst = (0..points.len() * n_times)
        .into_par_iter()
        .map(|idx| {
            let x = &points[idx / n_times];
            let t = times[idx % n_times];
            norm.measure(&sys.jacobian(t, x))
                .map(|m| (m.value(), idx))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                // deterministic: larger value wins, ties go to the smaller index
                Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                })
            },
        )?;
    let (worst_value, idx) = worst;
    let worst_x = points[idx / n_times].clone();
    let worst_t = times[idx % n_times];
    if !(worst_value < 0.0) {
        return Err(Error::NotContractive {
            worst: worst_value,
            t: worst_t,
            x: worst_x,
        });
    }
    let eta = -worst_value;

    let analytic_eta = match sys.analytic_certificate() {
        Ok(Some(a)) if a.norm == *norm => {
            if eta < a.eta - CROSS_CHECK_TOL {
                return Err(Error::CertificateMismatch {
                    analytic: a.eta,
                    sampled: eta,
                });
            }
            Some(a.eta)
        }
        _ => None,
    };

    Ok(ContractionCertificate {
        norm: norm.clone(),
        eta,
        kind: CertificateKind::Sampled {
            grid_per_axis,
            time_samples: n_times,
            worst_measure: worst_value,
            worst_t,
            worst_x,
            analytic_eta,
        },
        heuristic: false,
    })
}

/// Certificate used by the bound pipeline: the analytic one when the model
/// has it (after a sampled cross-check), the sampled one otherwise.
pub fn certify(sys: &dyn DynSystem, opts: &CertifyOptions) -> Result<ContractionCertificate> {
    if let Some(reason) = sys.certification_refusal() {
        return Err(Error::CertificationRefused(reason));
    }
    let own = sys.certificate_norm();
    let norm = opts.norm.clone().unwrap_or_else(|| own.clone());
    if norm == own {
        if let Some(analytic) = sys.analytic_certificate()? {
            check_contraction(sys, &norm, opts.grid_per_axis, opts.time_samples)?;
            return Ok(analytic);
        }
    }
    check_contraction(sys, &norm, opts.grid_per_axis, opts.time_samples)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceWitness {
    pub t: f64,
    pub x: Vec<f64>,
    pub component: usize,
    pub upper_face: bool,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub holds: bool,
    pub faces_checked: usize,
    pub points_checked: usize,
    pub witness: Option<InvarianceWitness>,
}

const FACE_SIGN_TOL: f64 = 1e-12;

/// Check that the field points into the box on every face, on a grid of
/// `samples` points per free coordinate and per period.
pub fn check_invariance(sys: &dyn DynSystem, samples: usize) -> Result<InvarianceReport> {
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "invariance check needs at least 2 samples per axis".into(),
        ));
    }
    let bx = sys.state_box();
    let n = bx.dim();
    let times = sample_times(sys, samples);
    let mut faces_checked = 0;
    let mut points_checked = 0;
    let mut out = vec![0.0; n];
    for i in 0..n {
        for upper_face in [false, true] {
            if bx.span(i) == 0.0 && upper_face {
                continue;
            }
            faces_checked += 1;
            let face_value = if upper_face { bx.upper()[i] } else { bx.lower()[i] };
            let axes: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    if j == i {
                        vec![face_value]
                    } else {
                        bx.axis_points(j, samples)
                    }
                })
                .collect();
            for x in tensor_product(&axes) {
                for &t in &times {
                    points_checked += 1;
                    sys.field(t, &x, &mut out);
                    let outward = if upper_face { out[i] } else { -out[i] };
                    if outward > FACE_SIGN_TOL {
                        return Ok(InvarianceReport {
                            holds: false,
                            faces_checked,
                            points_checked,
                            witness: Some(InvarianceWitness {
                                t,
                                x,
                                component: i,
                                upper_face,
                                value: out[i],
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(InvarianceReport {
        holds: true,
        faces_checked,
        points_checked,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_vertices() {
        let b = StateBox::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.grid(3).len(), 9);
        assert_eq!(b.vertices().len(), 4);
        assert_eq!(b.axis_points(1, 3), vec![-1.0, 0.0, 1.0]);
        let flat = StateBox::new(vec![0.0, 2.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(flat.vertices().len(), 2);
    }

    #[test]
    fn containment_and_hull() {
        let pts = [vec![0.0, 1.0], vec![2.0, -1.0], vec![1.0, 0.5]];
        let b = StateBox::hull(pts.iter().map(|p| p.as_slice())).unwrap();
        assert_eq!(b.lower(), &[0.0, -1.0]);
        assert_eq!(b.upper(), &[2.0, 1.0]);
        assert!(b.contains(&[2.0 + 1e-9, 0.0], 1e-7));
        assert!(!b.contains(&[2.1, 0.0], 1e-7));
        assert!(StateBox::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn diameter_bound_matches_l1_exactly() {
        let b = StateBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(b.diameter_bound(&NormSpec::l1()).unwrap(), 3.0);
    }
}
