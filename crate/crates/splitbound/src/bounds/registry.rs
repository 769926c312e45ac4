use std::collections::BTreeMap;

use super::families as f;
use super::{BoundError, TailBoundCurve};

/// Named numeric parameters handed to a [`BoundFamily`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundInputs {
    family: String,
    values: BTreeMap<String, f64>,
}

impl BoundInputs {
    pub fn new(values: BTreeMap<String, f64>) -> Self {
        BoundInputs { family: String::new(), values }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn get(&self, name: &str) -> Result<f64, BoundError> {
        self.values
            .get(name)
            .copied()
            .ok_or_else(|| BoundError::MissingParameter { family: self.family.clone(), name: name.to_string() })
    }

    pub fn get_or(&self, name: &str, default: f64) -> f64 {
        self.values.get(name).copied().unwrap_or(default)
    }

    fn count(&self, name: &str) -> Result<u64, BoundError> {
        let v = self.get(name)?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(BoundError::InvalidParameter(format!("{name} = {v} must be a non-negative integer")))
        }
    }

    fn empirical(&self) -> Result<f::EmpiricalInputs, BoundError> {
        Ok(f::EmpiricalInputs {
            a: self.get("a")?,
            b: self.get("b")?,
            c: self.get("c")?,
            d: self.get("d")?,
            e: self.get("e")?,
            sigma2: self.get("sigma2")?,
            pi_theta: self.get("pi_theta")?,
            pi_f: self.get("pi_F")?,
            n: self.get("n")?,
            alpha: self.get("alpha")?,
            eps: self.get("eps")?,
        })
    }
}

/// A tail bound selectable by name.
pub trait BoundFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn required(&self) -> &'static [&'static str];
    fn build(&self, inputs: &BoundInputs) -> Result<TailBoundCurve, BoundError>;
}

type Builder = fn(&BoundInputs) -> Result<TailBoundCurve, BoundError>;

struct FnFamily {
    name: &'static str,
    summary: &'static str,
    required: &'static [&'static str],
    build: Builder,
}

impl BoundFamily for FnFamily {
    fn name(&self) -> &'static str {
        self.name
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn required(&self) -> &'static [&'static str] {
        self.required
    }

    fn build(&self, inputs: &BoundInputs) -> Result<TailBoundCurve, BoundError> {
        let mut tagged = inputs.clone();
        tagged.family = self.name.to_string();
        for name in self.required {
            tagged.get(name)?;
        }
        (self.build)(&tagged)
    }
}

pub struct BoundRegistry {
    families: BTreeMap<&'static str, Box<dyn BoundFamily>>,
}

impl BoundRegistry {
    pub fn empty() -> Self {
        BoundRegistry { families: BTreeMap::new() }
    }

    pub fn register(&mut self, family: Box<dyn BoundFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn BoundFamily, BoundError> {
        self.families.get(name).map(|b| b.as_ref()).ok_or_else(|| BoundError::UnknownFamily(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn build(&self, name: &str, inputs: &BoundInputs) -> Result<TailBoundCurve, BoundError> {
        self.get(name)?.build(inputs)
    }

    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        for fam in defaults() {
            reg.register(Box::new(fam));
        }
        reg
    }
}

fn defaults() -> Vec<FnFamily> {
    vec![
        FnFamily {
            name: "bernstein_psi1",
            summary: "independent centred summands with bounded psi_1 norm",
            required: &["c", "n"],
            build: |p| f::bernstein_psi1(p.get("c")?, p.get("n")?),
        },
        FnFamily {
            name: "independent_onedep",
            summary: "maximal partial sums of a one-dependent block sequence",
            required: &["c", "sigma2", "n", "m", "alpha"],
            build: |p| f::independent_onedep(p.get("c")?, p.get("sigma2")?, p.count("n")?, p.count("m")?, p.get("alpha")?),
        },
        FnFamily {
            name: "independent_stopped",
            summary: "independent blocks summed up to a stopping time",
            required: &["c", "sigma2", "n", "alpha", "eps", "a_center", "psi1_excess", "p"],
            build: |p| {
                f::independent_stopped(
                    p.get("c")?,
                    p.get("sigma2")?,
                    p.get("n")?,
                    p.get("alpha")?,
                    p.get("eps")?,
                    p.get("a_center")?,
                    p.get("psi1_excess")?,
                    p.get("p")?,
                )
            },
        },
        FnFamily {
            name: "klein_rio",
            summary: "bounded empirical process, deviation above E S",
            required: &["sigma2", "n", "M", "ES"],
            build: |p| f::klein_rio(p.get("sigma2")?, p.get("n")?, p.get("M")?, p.get("ES")?),
        },
        FnFamily {
            name: "klein_rio_eps",
            summary: "bounded empirical process, deviation above (1+eps) E S",
            required: &["sigma2", "n", "M", "eps"],
            build: |p| f::klein_rio_eps(p.get("sigma2")?, p.get("n")?, p.get("M")?, p.get("eps")?),
        },
        FnFamily {
            name: "truncated_empirical",
            summary: "i.i.d. empirical process with a psi_alpha envelope",
            required: &["c", "sigma2", "n", "alpha", "eps"],
            build: |p| f::truncated_empirical(p.get("c")?, p.get("sigma2")?, p.get("n")?, p.get("alpha")?, p.get("eps")?),
        },
        FnFamily {
            name: "general_markov",
            summary: "split chain with m-step minorization; argument t bounds P(|S| > 3t)",
            required: &["a", "b", "c", "sigma2", "pi_theta", "n", "m", "alpha"],
            build: |p| {
                f::general_markov(
                    p.get("a")?,
                    p.get("b")?,
                    p.get("c")?,
                    p.get("sigma2")?,
                    p.get("pi_theta")?,
                    p.count("n")?,
                    p.count("m")?,
                    p.get("alpha")?,
                )
            },
        },
        FnFamily {
            name: "geometric",
            summary: "strongly aperiodic geometrically ergodic chain, single parameter eta",
            required: &["a", "b", "c", "d", "sigma2", "pi_theta", "n", "alpha", "eta"],
            build: |p| {
                f::geometric(
                    p.get("a")?,
                    p.get("b")?,
                    p.get("c")?,
                    p.get("d")?,
                    p.get("sigma2")?,
                    p.get("pi_theta")?,
                    p.get("n")?,
                    p.get("alpha")?,
                    p.get("eta")?,
                )
            },
        },
        FnFamily {
            name: "geometric_pq",
            summary: "strongly aperiodic geometrically ergodic chain, parameters q and eps",
            required: &["a", "b", "c", "d", "sigma2", "pi_theta", "n", "alpha", "q", "eps"],
            build: |p| {
                f::geometric_pq(
                    p.get("a")?,
                    p.get("b")?,
                    p.get("c")?,
                    p.get("d")?,
                    p.get("sigma2")?,
                    p.get("pi_theta")?,
                    p.get("n")?,
                    p.get("alpha")?,
                    p.get("q")?,
                    p.get("eps")?,
                )
            },
        },
        FnFamily {
            name: "empirical_process",
            summary: "supremum over a class with envelope F, deviation above (1+7 eps) E Z",
            required: &["a", "b", "c", "d", "e", "sigma2", "pi_theta", "pi_F", "n", "alpha", "eps"],
            build: |p| f::empirical_process(&p.empirical()?),
        },
        FnFamily {
            name: "hilbert_lln",
            summary: "normalised Hilbert-valued averages",
            required: &["a", "b", "c", "d", "e", "sigma2", "pi_theta", "pi_F", "n", "alpha", "eps"],
            build: |p| f::hilbert_lln(&p.empirical()?),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_name() {
        let reg = BoundRegistry::with_defaults();
        assert_eq!(reg.names().count(), 11);
        let inputs = BoundInputs::default().with("c", 2.0).with("n", 100.0);
        let curve = reg.build("bernstein_psi1", &inputs).unwrap();
        assert_eq!(curve.family, "bernstein_psi1");
        assert!(matches!(reg.get("nope"), Err(BoundError::UnknownFamily(_))));
    }

    #[test]
    fn missing_parameter_names_family() {
        let reg = BoundRegistry::with_defaults();
        let err = reg.build("geometric", &BoundInputs::default().with("a", 1.0)).unwrap_err();
        assert_eq!(err, BoundError::MissingParameter { family: "geometric".into(), name: "b".into() });
    }

    #[test]
    fn integer_parameters_are_checked() {
        let reg = BoundRegistry::with_defaults();
        let inputs = BoundInputs::default()
            .with("c", 1.0)
            .with("sigma2", 1.0)
            .with("n", 10.5)
            .with("m", 1.0)
            .with("alpha", 1.0);
        assert!(matches!(reg.build("independent_onedep", &inputs), Err(BoundError::InvalidParameter(_))));
    }

    #[test]
    fn every_family_builds_from_a_full_map() {
        let reg = BoundRegistry::with_defaults();
        let mut inputs = BoundInputs::default();
        for (k, v) in [
            ("a", 3.0), ("b", 4.0), ("c", 2.0), ("d", 5.0), ("e", 6.0), ("sigma2", 1.5), ("pi_theta", 0.4),
            ("pi_F", 1.0), ("n", 1024.0), ("m", 1.0), ("alpha", 0.5), ("eps", 0.25), ("eta", 0.5), ("q", 1.2),
            ("p", 2.0), ("a_center", 400.0), ("psi1_excess", 10.0), ("M", 1.0), ("ES", 3.0),
        ] {
            inputs = inputs.with(k, v);
        }
        for name in reg.names().collect::<Vec<_>>() {
            let fam = reg.get(name).unwrap();
            assert!(!fam.summary().is_empty());
            let curve = fam.build(&inputs).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(curve.evaluate(1e6) <= 1.0);
        }
    }
}
