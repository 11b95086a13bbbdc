//! Vector norms, diagonal or general scalings of them, and the matrix
//! measures (logarithmic norms) they induce.
//!
//! Only the closed forms are evaluated:
//!
//! * `l1`:   max over columns of `a_jj + sum_{i != j} |a_ij|`
//! * `linf`: the same over rows
//! * `l2`:   largest eigenvalue of `(A + A') / 2`
//!
//! A scaling `D` turns `|z|` into `|D z|` and `mu(A)` into `mu(D A D^{-1})`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{max_symmetric_eigenvalue, Lu, Matrix};

/// Tolerance for subadditivity / homogeneity checks.
pub const MEASURE_PROPERTY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(NormKind::L1),
            "l2" | "2" => Ok(NormKind::L2),
            "linf" | "inf" | "max" => Ok(NormKind::Linf),
            other => Err(Error::InvalidParameter(format!("unknown norm '{other}'"))),
        }
    }

    fn apply(self, z: &[f64]) -> f64 {
        match self {
            NormKind::L1 => z.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => z.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Linf => z.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    fn measure_unscaled(self, a: &Matrix) -> Result<f64> {
        let n = a.nrows();
        match self {
            NormKind::L1 => Ok((0..n)
                .map(|j| {
                    a[(j, j)]
                        + (0..n)
                            .filter(|&i| i != j)
                            .map(|i| a[(i, j)].abs())
                            .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)),
            NormKind::Linf => Ok((0..n)
                .map(|i| {
                    a[(i, i)]
                        + (0..n)
                            .filter(|&j| j != i)
                            .map(|j| a[(i, j)].abs())
                            .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)),
            NormKind::L2 => max_symmetric_eigenvalue(a),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Scaling {
    Identity,
    Diagonal(Vec<f64>),
    General { d: Matrix, d_inv: Matrix },
}

/// A base norm, optionally composed with an invertible scaling matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSpec {
    kind: NormKind,
    scaling: Scaling,
}

impl NormSpec {
    pub fn new(kind: NormKind) -> Self {
        Self {
            kind,
            scaling: Scaling::Identity,
        }
    }

    pub fn l1() -> Self {
        Self::new(NormKind::L1)
    }

    pub fn l2() -> Self {
        Self::new(NormKind::L2)
    }

    pub fn linf() -> Self {
        Self::new(NormKind::Linf)
    }

    pub fn diagonal(kind: NormKind, diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|&d| d == 0.0 || !d.is_finite()) {
            return Err(Error::Singular {
                column: diag.iter().position(|&d| d == 0.0 || !d.is_finite()).unwrap_or(0),
                pivot: 0.0,
            });
        }
        Ok(Self {
            kind,
            scaling: Scaling::Diagonal(diag),
        })
    }

    /// General invertible scaling; diagonal matrices take the fast path.
    pub fn scaled(kind: NormKind, d: Matrix) -> Result<Self> {
        d.ensure_square()?;
        if d.is_diagonal() {
            return Self::diagonal(kind, d.diagonal());
        }
        let lu = Lu::new(&d)?;
        let d_inv = lu.inverse()?;
        Ok(Self {
            kind,
            scaling: Scaling::General { d, d_inv },
        })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    /// Dimension the scaling is tied to; `None` for unscaled norms.
    pub fn dim(&self) -> Option<usize> {
        match &self.scaling {
            Scaling::Identity => None,
            Scaling::Diagonal(d) => Some(d.len()),
            Scaling::General { d, .. } => Some(d.nrows()),
        }
    }

    pub fn scaling_matrix(&self, n: usize) -> Matrix {
        match &self.scaling {
            Scaling::Identity => Matrix::identity(n),
            Scaling::Diagonal(d) => Matrix::from_diagonal(d),
            Scaling::General { d, .. } => d.clone(),
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch {
                expected: d,
                got: n,
            }),
            _ => Ok(()),
        }
    }

    /// `D z`.
    pub fn apply_scaling(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z.len())?;
        Ok(match &self.scaling {
            Scaling::Identity => z.to_vec(),
            Scaling::Diagonal(d) => z.iter().zip(d).map(|(x, s)| x * s).collect(),
            Scaling::General { d, .. } => d.mul_vec(z),
        })
    }

    pub fn norm(&self, z: &[f64]) -> Result<f64> {
        if let Scaling::Identity = self.scaling {
            return Ok(self.kind.apply(z));
        }
        Ok(self.kind.apply(&self.apply_scaling(z)?))
    }

    /// Norm of `a - b`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// `D A D^{-1}`.
    pub fn similarity(&self, a: &Matrix) -> Result<Matrix> {
        let n = a.ensure_square()?;
        self.check_dim(n)?;
        Ok(match &self.scaling {
            Scaling::Identity => a.clone(),
            Scaling::Diagonal(d) => {
                let mut m = a.clone();
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] *= d[i] / d[j];
                    }
                }
                m
            }
            Scaling::General { d, d_inv } => &(d * a) * d_inv,
        })
    }

    pub fn measure(&self, a: &Matrix) -> Result<MeasureValue> {
        let m = self.similarity(a)?;
        if m.nrows() == 0 {
            return Ok(MeasureValue(0.0));
        }
        let v = self.kind.measure_unscaled(&m)?;
        // mu(0) = 0 exactly, whatever rounding the eigen path does
        Ok(MeasureValue(if m.max_abs() == 0.0 { 0.0 } else { v }))
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scaling {
            Scaling::Identity => write!(f, "{}", self.kind.name()),
            Scaling::Diagonal(d) => {
                write!(f, "{}[diag(", self.kind.name())?;
                for (i, x) in d.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")]")
            }
            Scaling::General { d, .. } => {
                write!(f, "{}[", self.kind.name())?;
                for i in 0..d.nrows() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    for (j, x) in d.row(i).iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{x}")?;
                    }
                }
                write!(f, "]")
            }
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A matrix measure value (units of 1/time for a Jacobian).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct MeasureValue(f64);

impl MeasureValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn vector_norm(spec: &NormSpec, z: &[f64]) -> Result<f64> {
    spec.norm(z)
}

pub fn matrix_measure(spec: &NormSpec, a: &Matrix) -> Result<MeasureValue> {
    spec.measure(a)
}

/// Subadditivity of `mu` on `(a, b)` plus homogeneity of `mu` on `a` for a
/// fixed set of nonnegative multipliers.
pub fn measure_subadditivity_check(spec: &NormSpec, a: &Matrix, b: &Matrix) -> Result<bool> {
    let n = a.ensure_square()?;
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.nrows(),
        });
    }
    let ma = spec.measure(a)?.value();
    let mb = spec.measure(b)?.value();
    let mab = spec.measure(&(a + b))?.value();
    let scale = 1.0 + ma.abs() + mb.abs();
    if mab > ma + mb + MEASURE_PROPERTY_TOL * scale {
        return Ok(false);
    }
    for c in [0.0, 0.25, 1.0, 3.5, 10.0] {
        let mca = spec.measure(&a.scale(c))?.value();
        if (mca - c * ma).abs() > MEASURE_PROPERTY_TOL * (1.0 + (c * ma).abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn vector_norm_examples() {
        assert_eq!(vector_norm(&NormSpec::l1(), &[1.0, -2.0]).unwrap(), 3.0);
        let s = NormSpec::diagonal(NormKind::L2, vec![2.0, 1.0]).unwrap();
        assert_eq!(s.norm(&[1.0, 0.0]).unwrap(), 2.0);
        let s = NormSpec::diagonal(NormKind::L1, vec![0.9161, 1.0]).unwrap();
        assert!((s.norm(&[1.0, 1.0]).unwrap() - 1.9161).abs() < 1e-15);
        assert_eq!(NormSpec::linf().norm(&[0.5, -3.0, 2.0]).unwrap(), 3.0);
    }

    #[test]
    fn norm_dimension_mismatch() {
        let s = NormSpec::diagonal(NormKind::L1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(s.norm(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn measure_examples() {
        let a = m(&[&[-2.0, 1.0], &[0.5, -3.0]]);
        assert!((matrix_measure(&NormSpec::l1(), &a).unwrap().value() + 1.5).abs() < 1e-15);
        // rows: -2 + 1 = -1, -3 + 0.5 = -2.5
        assert!((NormSpec::linf().measure(&a).unwrap().value() + 1.0).abs() < 1e-15);
        let d = Matrix::from_diagonal(&[-1.0, -2.0]);
        assert!((NormSpec::l2().measure(&d).unwrap().value() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn measure_of_zero_is_zero() {
        for spec in [NormSpec::l1(), NormSpec::l2(), NormSpec::linf()] {
            assert_eq!(spec.measure(&Matrix::zeros(3, 3)).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn measure_errors() {
        let rect = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(NormSpec::l1().measure(&rect), Err(Error::NotSquare { .. })));
        let singular = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            NormSpec::scaled(NormKind::L2, singular),
            Err(Error::Singular { .. })
        ));
        assert!(NormSpec::diagonal(NormKind::L1, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn transcriptional_jacobian_scaled_l1() {
        // k1 = 1, k2 = 5, delta = 1, eT = 2, worst corner x = (0, 0)
        let d = 0.9161;
        let s = NormSpec::diagonal(NormKind::L1, vec![d, 1.0]).unwrap();
        let expected_eta = (1.0 * (1.0 - d)).min(1.0 + 10.0 * (1.0 - 1.0 / d));
        for &(x1, x2) in &[(0.0, 0.0), (0.3, 1.0), (1.0, 2.0), (2.5, 0.5)] {
            let j = m(&[
                &[-1.0 - 5.0 * (2.0 - x2), 1.0 + 5.0 * x1],
                &[5.0 * (2.0 - x2), -1.0 - 5.0 * x1],
            ]);
            let mu = s.measure(&j).unwrap().value();
            assert!(mu <= -expected_eta + 1e-12, "mu {mu} at ({x1},{x2})");
            assert!(mu <= -0.0839 + 1e-4);
        }
    }

    #[test]
    fn subadditivity_examples() {
        let i = Matrix::identity(2);
        let mi = i.scale(-1.0);
        assert!(measure_subadditivity_check(&NormSpec::l1(), &i, &mi).unwrap());
        let a = m(&[&[0.3, -2.0], &[1.7, 4.0]]);
        assert_eq!(NormSpec::l1().measure(&a.scale(0.0)).unwrap().value(), 0.0);
    }

    #[test]
    fn general_scaling_display() {
        let d = m(&[&[1.0, 0.5], &[0.0, 2.0]]);
        let s = NormSpec::scaled(NormKind::L2, d).unwrap();
        assert_eq!(s.to_string(), "l2[1,0.5;0,2]");
        assert_eq!(NormSpec::l1().to_string(), "l1");
    }
}
