use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{Example, ExampleError, GeometricExample, LogConcaveExample};
use crate::chain::{GaussianIncrement, GaussianTarget, Increment, LaplaceIncrement, Target};

/// Builds an [`Example`] from a JSON parameter object.
pub trait ExampleFactory: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, params: &serde_json::Value) -> Result<Box<dyn Example>, ExampleError>;
}

fn parse<T: DeserializeOwned>(name: &str, params: &serde_json::Value) -> Result<T, ExampleError> {
    T::deserialize(params).map_err(|e| ExampleError::BadParameters { name: name.to_string(), message: e.to_string() })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometricParams {
    rho: f64,
    #[serde(rename = "A")]
    a: f64,
}

struct GeometricFactory;

impl ExampleFactory for GeometricFactory {
    fn name(&self) -> &'static str {
        "geometric"
    }

    fn build(&self, params: &serde_json::Value) -> Result<Box<dyn Example>, ExampleError> {
        let p: GeometricParams = parse(self.name(), params)?;
        Ok(Box::new(GeometricExample::new(p.rho, p.a)?))
    }
}

#[derive(Deserialize, Clone, Copy, Default)]
#[serde(rename_all = "snake_case")]
enum IncrementKind {
    #[default]
    Laplace,
    Gaussian,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogConcaveParams {
    #[serde(default)]
    x_star: Option<f64>,
    #[serde(default = "one")]
    target_scale: f64,
    #[serde(default)]
    increment: IncrementKind,
    #[serde(default = "one")]
    increment_scale: f64,
}

struct LogConcaveFactory;

impl ExampleFactory for LogConcaveFactory {
    fn name(&self) -> &'static str {
        "logconcave"
    }

    fn build(&self, params: &serde_json::Value) -> Result<Box<dyn Example>, ExampleError> {
        let p: LogConcaveParams = parse(self.name(), params)?;
        let x_star = p.x_star.ok_or_else(|| ExampleError::BadParameters { name: self.name().into(), message: "missing field `x_star`".into() })?;
        let (target, inc) = logconcave_components(params)?;
        Ok(Box::new(LogConcaveExample::new(target, inc, x_star)?))
    }
}

/// Target and increment of a `logconcave` parameter object; `x_star` may be
/// absent, which is what an `x*` scan needs.
pub fn logconcave_components(params: &serde_json::Value) -> Result<(Arc<dyn Target>, Arc<dyn Increment>), ExampleError> {
    let p: LogConcaveParams = parse("logconcave", params)?;
    if !(p.target_scale > 0.0 && p.increment_scale > 0.0) {
        return Err(ExampleError::BadParameters { name: "logconcave".into(), message: "scales must be positive".into() });
    }
    let inc: Arc<dyn Increment> = match p.increment {
        IncrementKind::Laplace => Arc::new(LaplaceIncrement { scale: p.increment_scale }),
        IncrementKind::Gaussian => Arc::new(GaussianIncrement { scale: p.increment_scale }),
    };
    Ok((Arc::new(GaussianTarget { scale: p.target_scale }), inc))
}

pub struct ExampleRegistry {
    factories: BTreeMap<&'static str, Box<dyn ExampleFactory>>,
}

impl ExampleRegistry {
    pub fn with_defaults() -> Self {
        let mut reg = ExampleRegistry { factories: BTreeMap::new() };
        reg.register(Box::new(GeometricFactory));
        reg.register(Box::new(LogConcaveFactory));
        reg
    }

    pub fn register(&mut self, f: Box<dyn ExampleFactory>) {
        self.factories.insert(f.name(), f);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, name: &str, params: &serde_json::Value) -> Result<Box<dyn Example>, ExampleError> {
        self.factories.get(name).ok_or_else(|| ExampleError::UnknownExample(name.to_string()))?.build(params)
    }
}
