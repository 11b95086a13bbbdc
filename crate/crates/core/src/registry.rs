//! Name-keyed registries of catalog models and approximants.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::bounds::{Approximant, Averaged, Linearized};
use crate::error::{Error, Result};
use crate::models::{
    DynSystem, EmpiricalBoxOptions, PeriodicInput, QuadraticCascade, Rfm, ScalarForced,
    Transcriptional, TranscriptionalParams,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub help: &'static str,
}

const fn param(name: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        help,
    }
}

pub type ParamValues = BTreeMap<String, f64>;

/// Builds a catalog model from named parameters.
pub trait ModelFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn params(&self) -> Vec<ParamSpec>;

    /// Keys accepted beyond the declared parameters.
    fn accepts_extra(&self, _key: &str) -> bool {
        false
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>>;

    /// Parameter swept by frequency sweeps, when the model has one.
    fn frequency_param(&self) -> Option<&'static str> {
        None
    }
}

fn get(values: &ParamValues, key: &str) -> f64 {
    values.get(key).copied().unwrap_or(f64::NAN)
}

fn positive_integer(values: &ParamValues, key: &str) -> Result<usize> {
    let v = get(values, key);
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidParameter(format!(
            "{key} must be a positive integer, got {v}"
        )))
    }
}

struct Ex33Factory;

impl ModelFactory for Ex33Factory {
    fn name(&self) -> &'static str {
        "ex33"
    }

    fn summary(&self) -> &'static str {
        "scalar x' = -x + 1 + sin(2 pi t / T) on [0, 2]"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![param("period", TAU, "forcing period T")]
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>> {
        Ok(Box::new(ScalarForced::new(get(values, "period"))?))
    }
}

struct Rfm2Factory;

impl ModelFactory for Rfm2Factory {
    fn name(&self) -> &'static str {
        "rfm2"
    }

    fn summary(&self) -> &'static str {
        "two-site ribosome flow model with initiation rate lam0 + amp sin(2 pi t / T)"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![
            param("lam0", 4.0, "mean initiation rate"),
            param("lam1", 0.5, "transition rate between the sites"),
            param("lam2", 4.0, "exit rate"),
            param("amp", 1.0, "initiation-rate oscillation amplitude"),
            param("period", 2.0, "forcing period T"),
        ]
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>> {
        let input = PeriodicInput::sinusoid(
            get(values, "lam0"),
            get(values, "amp"),
            get(values, "period"),
        )?;
        Ok(Box::new(Rfm::new(
            vec![get(values, "lam1"), get(values, "lam2")],
            input,
        )?))
    }
}

struct RfmFactory;

impl RfmFactory {
    fn is_rate_key(key: &str) -> bool {
        key.strip_prefix("lam")
            .is_some_and(|k| !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()) && k != "0")
    }
}

impl ModelFactory for RfmFactory {
    fn name(&self) -> &'static str {
        "rfm"
    }

    fn summary(&self) -> &'static str {
        "n-site ribosome flow model; lamK overrides the rate of site K (certification only for n <= 2)"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![
            param("n", 5.0, "number of sites"),
            param("lam0", 4.0, "mean initiation rate"),
            param("rate", 1.0, "default transition rate lam1..lamn"),
            param("amp", 1.0, "initiation-rate oscillation amplitude"),
            param("period", 2.0, "forcing period T"),
        ]
    }

    fn accepts_extra(&self, key: &str) -> bool {
        Self::is_rate_key(key)
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>> {
        let n = positive_integer(values, "n")?;
        let mut rates = vec![get(values, "rate"); n];
        for (key, v) in values {
            if Self::is_rate_key(key) {
                let k: usize = key[3..].parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad rate key {key}"))
                })?;
                if k > n {
                    return Err(Error::InvalidParameter(format!(
                        "{key} refers to a site beyond n = {n}"
                    )));
                }
                rates[k - 1] = *v;
            }
        }
        let input = PeriodicInput::sinusoid(
            get(values, "lam0"),
            get(values, "amp"),
            get(values, "period"),
        )?;
        Ok(Box::new(Rfm::new(rates, input)?))
    }
}

struct TransmodFactory;

impl ModelFactory for TransmodFactory {
    fn name(&self) -> &'static str {
        "transmod"
    }

    fn summary(&self) -> &'static str {
        "transcriptional module driven by offset + amp cos(omega t); negative inputs use a simulated box"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![
            param("delta", 1.0, "degradation rate of the transcription factor"),
            param("k1", 1.0, "dissociation rate"),
            param("k2", 5.0, "binding rate"),
            param("et", 2.0, "total promoter concentration"),
            param("omega", 1.0, "forcing frequency"),
            param("amp", 1.0, "input amplitude"),
            param("offset", 0.0, "input offset"),
        ]
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>> {
        let params = TranscriptionalParams {
            delta: get(values, "delta"),
            k1: get(values, "k1"),
            k2: get(values, "k2"),
            e_total: get(values, "et"),
        };
        let input = PeriodicInput::cosine(
            get(values, "offset"),
            get(values, "amp"),
            get(values, "omega"),
        )?;
        Ok(Box::new(Transcriptional::auto(
            params,
            input,
            &EmpiricalBoxOptions::default(),
        )?))
    }

    fn frequency_param(&self) -> Option<&'static str> {
        Some("omega")
    }
}

struct Ex52Factory;

impl ModelFactory for Ex52Factory {
    fn name(&self) -> &'static str {
        "ex52"
    }

    fn summary(&self) -> &'static str {
        "cascade x1' = -x1 + x2^2, x2' = -x2 + a sin(omega t), norm |z1| + c |z2|"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![
            param("a", 1.0, "input amplitude"),
            param("omega", 1.0, "forcing frequency"),
            param("c", 1e6, "weight of x2 in the certificate norm"),
        ]
    }

    fn build(&self, values: &ParamValues) -> Result<Box<dyn DynSystem>> {
        Ok(Box::new(QuadraticCascade::new(
            get(values, "a"),
            get(values, "omega"),
            get(values, "c"),
        )?))
    }

    fn frequency_param(&self) -> Option<&'static str> {
        Some("omega")
    }
}

pub struct ModelRegistry {
    factories: BTreeMap<&'static str, Box<dyn ModelFactory>>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Ex33Factory));
        r.register(Box::new(Rfm2Factory));
        r.register(Box::new(RfmFactory));
        r.register(Box::new(TransmodFactory));
        r.register(Box::new(Ex52Factory));
        r
    }

    pub fn register(&mut self, factory: Box<dyn ModelFactory>) {
        self.factories.insert(factory.name(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelFactory> {
        self.factories
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown model '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }

    /// Defaults merged with `overrides`; unknown keys are rejected.
    pub fn resolve(&self, name: &str, overrides: &ParamValues) -> Result<ParamValues> {
        let factory = self.get(name)?;
        let specs = factory.params();
        let mut values: ParamValues = specs
            .iter()
            .map(|p| (p.name.to_string(), p.default))
            .collect();
        for (key, v) in overrides {
            if !(specs.iter().any(|p| p.name == key) || factory.accepts_extra(key)) {
                return Err(Error::InvalidParameter(format!(
                    "unknown parameter '{key}' for model {name} (accepted: {})",
                    specs.iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "parameter {key} must be finite"
                )));
            }
            values.insert(key.clone(), *v);
        }
        Ok(values)
    }

    pub fn build(&self, name: &str, overrides: &ParamValues) -> Result<Box<dyn DynSystem>> {
        let values = self.resolve(name, overrides)?;
        self.get(name)?.build(&values)
    }
}

pub struct ApproximantRegistry {
    entries: BTreeMap<&'static str, Box<dyn Approximant>>,
}

impl Default for ApproximantRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl ApproximantRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Averaged::default()));
        r.register(Box::new(Linearized));
        r
    }

    pub fn register(&mut self, approx: Box<dyn Approximant>) {
        self.entries.insert(approx.name(), approx);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// `lti` is accepted as an alias of `linearized`.
    pub fn get(&self, name: &str) -> Result<&dyn Approximant> {
        let key = if name == "lti" { "linearized" } else { name };
        self.entries
            .get(key)
            .map(|a| a.as_ref())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown approximant '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }
}
