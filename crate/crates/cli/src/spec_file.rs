//! The JSON problem specification.

use std::fmt;
use std::path::Path;

use optrec::problem::{Kappa, ModelType, NoiseModel, NoiseNorm, ProblemSpec, Quantity};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::CliError;

/// A real number, or `+∞` written as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extended(pub f64);

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtendedVisitor;

        impl Visitor<'_> for ExtendedVisitor {
            type Value = Extended;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Extended, E> {
                Ok(Extended(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Extended, E> {
                Ok(Extended(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Extended, E> {
                Ok(Extended(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Extended, E> {
                match v {
                    "inf" => Ok(Extended(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(ExtendedVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum QuantityFile {
    Point { x0: f64 },
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    pub p: Extended,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub model: Model,
    pub n: usize,
    pub epsilon: f64,
    pub kappa: Extended,
    pub points: Vec<f64>,
    pub quantity: QuantityFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseFile>,
    /// Truncation level of the moment relaxation.
    #[serde(rename = "N", alias = "truncation", default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Nominal size of the grid for the upper bound.
    #[serde(rename = "K", alias = "grid_size", default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Deserializes JSON, naming the offending key path on failure.
pub fn parse_json<T: de::DeserializeOwned>(text: &str, origin: &Path) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Spec(format!("{}: at `{}`: {}", origin.display(), e.path(), e.inner())))?;
    de.end().map_err(|e| CliError::Spec(format!("{}: {e}", origin.display())))?;
    Ok(value)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let spec: SpecFile = parse_json(&read_text(path)?, path)?;
        spec.problem()?;
        Ok(spec)
    }

    /// The validated problem instance.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let model = match self.model {
            Model::Type1 => ModelType::Type1,
            Model::Type2 => ModelType::Type2,
        };
        let kappa = match self.kappa.0 {
            k if k == f64::INFINITY => Kappa::Infinite,
            k => Kappa::Finite(k),
        };
        let quantity = match self.quantity {
            QuantityFile::Point { x0 } => Quantity::PointEvaluation(x0),
            QuantityFile::Integral => Quantity::NormalizedIntegral,
        };
        let mut spec = ProblemSpec::new(model, self.n, self.epsilon, kappa, self.points.clone(), quantity)?;
        if let Some(noise) = self.noise {
            let p = match noise.p.0 {
                p if p == 1.0 => NoiseNorm::One,
                p if p == 2.0 => NoiseNorm::Two,
                p if p == f64::INFINITY => NoiseNorm::Infinity,
                p => return Err(CliError::Spec(format!("invalid argument `noise.p`: {p} is not one of 1, 2, \"inf\""))),
            };
            spec = spec.with_noise(NoiseModel { p, eta: noise.eta })?;
        }
        if self.truncation == Some(0) {
            return Err(CliError::Spec("invalid argument `N`: must be positive".into()));
        }
        if self.grid_size == Some(0) {
            return Err(CliError::Spec("invalid argument `K`: must be positive".into()));
        }
        if let Some(tol) = self.tolerance {
            check_tolerance(tol)?;
        }
        Ok(spec)
    }
}

pub fn check_tolerance(tol: f64) -> Result<(), CliError> {
    if (1e-12..=1e-2).contains(&tol) {
        Ok(())
    } else {
        Err(CliError::Spec(format!("invalid argument `tolerance`: {tol} is outside [1e-12, 1e-2]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SpecFile, CliError> {
        parse_json(text, Path::new("spec.json"))
    }

    const BASE: &str = r#"{"model":"type2","n":2,"epsilon":0.1,"kappa":"inf","points":[-1,1],"quantity":{"kind":"point","x0":0}}"#;

    #[test]
    fn infinite_kappa_uses_the_string_sentinel() {
        let s = parse(BASE).unwrap();
        assert_eq!(s.kappa, Extended(f64::INFINITY));
        assert_eq!(s.problem().unwrap().kappa, Kappa::Infinite);
        assert!(crate::output::to_json(&s).contains(r#""kappa": "inf""#));
    }

    #[test]
    fn aliases_and_noise_are_accepted() {
        let text = BASE.replace('}', "").replace(r#""kind":"point","x0":0"#, r#""kind":"integral""#);
        let text = format!(r#"{text}}}, "truncation": 12, "grid_size": 40, "noise": {{"p": "inf", "eta": 0.01}}}}"#);
        let s = parse(&text).unwrap();
        assert_eq!((s.truncation, s.grid_size), (Some(12), Some(40)));
        assert_eq!(s.problem().unwrap().noise.unwrap().p, NoiseNorm::Infinity);
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |t: &str| parse(t).and_then(|s| s.problem().map(|_| ())).unwrap_err().to_string();
        assert!(msg(&BASE.replace(r#""kind":"point","x0":0"#, r#""kind":"point","x0":0,"y":1"#)).contains("quantity"));
        assert!(msg(&BASE.replace(r#""n":2"#, r#""n":-2"#)).contains("`n`"));
        assert!(msg(&BASE.replace("[-1,1]", "[1,1]")).contains("points"));
        assert!(msg(&BASE.replace(r#""model":"type2""#, r#""model":"type3""#)).contains("model"));
        assert!(msg(&BASE.replace(r#""n":2,"#, "")).contains("missing field `n`"));
        assert!(msg(&format!("{BASE} x")).contains("trailing"));
    }
}
