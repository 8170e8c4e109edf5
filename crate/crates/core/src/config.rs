//! JSON configuration: `{"F1": {...}, "F2": {...}, "ctilde": {...}, "diagonal": {...}}`.
//!
//! ```json
//! {
//!   "F1": {"type": "power", "alpha": 2},
//!   "F2": {"type": "uniform", "a": 0, "b": 1},
//!   "ctilde": {"type": "bertino"},
//!   "diagonal": {"type": "power", "exponent": 3}
//! }
//! ```
//!
//! Empirical marginals read one or more numbers per line from a file whose
//! path is relative to the config file. Lines starting with `#` are skipped.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::copula::{archimedean_copula, bertino, Copula, DiagonalSection, Gumbel};
use crate::distcore::{Cdf, OrderedMarginalPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "F1")]
    pub f1: CdfSpec,
    #[serde(rename = "F2")]
    pub f2: CdfSpec,
    #[serde(default)]
    pub ctilde: Option<CopulaSpec>,
    #[serde(default)]
    pub diagonal: Option<DiagonalSpec>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CdfSpec {
    Uniform { a: f64, b: f64 },
    Power { alpha: f64 },
    Normal { mu: f64, sigma: f64 },
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Discrete { atoms: Vec<f64>, masses: Vec<f64> },
    Empirical {
        #[serde(default)]
        file: Option<PathBuf>,
        #[serde(default)]
        sample: Option<Vec<f64>>,
    },
    Mixture { w: f64, a: Box<CdfSpec>, b: Box<CdfSpec> },
    SqrtCompanion { base: Box<CdfSpec> },
}

/// The copula `C̃` evaluated at `G`. Diagonal-based families default to the
/// diagonal `δ_G` forced by the marginals.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaSpec {
    Bertino {
        #[serde(default)]
        diagonal: Option<DiagonalSpec>,
    },
    DiagonalUpper {
        #[serde(default)]
        diagonal: Option<DiagonalSpec>,
    },
    FhUpper,
    FhLower,
    Independence,
    Gumbel { theta: f64 },
    Mixture { w: f64, a: Box<CopulaSpec>, b: Box<CopulaSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagonalSpec {
    Comonotone,
    Power { exponent: f64 },
    Gumbel { theta: f64 },
    FrechetLower,
    Table { t: Vec<f64>, delta: Vec<f64> },
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::Io(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    /// Parse `json`, resolving empirical file paths against `base_dir`.
    pub fn from_json(json: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: Config = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    /// Build both marginals. Bad parameters are configuration errors.
    pub fn marginals(&self) -> Result<(Cdf, Cdf)> {
        Ok((self.f1.build(&self.base_dir)?, self.f2.build(&self.base_dir)?))
    }

    /// Build the ordered pair; a dominance failure is reported as such.
    pub fn pair(&self) -> Result<OrderedMarginalPair> {
        let (f1, f2) = self.marginals()?;
        OrderedMarginalPair::new(f1, f2)
    }
}

impl CdfSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Cdf> {
        let cdf = match self {
            CdfSpec::Uniform { a, b } => Cdf::uniform(*a, *b),
            CdfSpec::Power { alpha } => Cdf::power(*alpha),
            CdfSpec::Normal { mu, sigma } => Cdf::normal(*mu, *sigma),
            CdfSpec::TruncatedNormal { mu, sigma, lo, hi } => Cdf::truncated_normal(*mu, *sigma, *lo, *hi),
            CdfSpec::Exponential { rate } => Cdf::exponential(*rate),
            CdfSpec::Discrete { atoms, masses } => Cdf::discrete(atoms.clone(), masses.clone()),
            CdfSpec::Empirical { file, sample } => {
                let values = match (file, sample) {
                    (Some(f), None) => read_sample(&base_dir.join(f))?,
                    (None, Some(s)) => s.clone(),
                    _ => return Err(Error::Config("empirical needs exactly one of \"file\" or \"sample\"".into())),
                };
                Cdf::empirical(values)
            }
            CdfSpec::Mixture { w, a, b } => Cdf::mixture(*w, a.build(base_dir)?, b.build(base_dir)?),
            CdfSpec::SqrtCompanion { base } => Ok(Cdf::sqrt_companion(base.build(base_dir)?)),
        };
        cdf.map_err(config_err)
    }
}

fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| {
                Error::Config(format!("{}:{}: not a number: {tok:?}", path.display(), lineno + 1))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

impl CopulaSpec {
    pub fn build(&self, pair: &OrderedMarginalPair) -> Result<Copula> {
        let diag = |d: &Option<DiagonalSpec>| match d {
            Some(spec) => spec.build(),
            None => Ok(DiagonalSection::from_pair(pair)),
        };
        match self {
            CopulaSpec::Bertino { diagonal } => Ok(bertino(diag(diagonal)?)),
            CopulaSpec::DiagonalUpper { diagonal } => Ok(Copula::DiagonalUpper(diag(diagonal)?)),
            CopulaSpec::FhUpper => Ok(Copula::FhUpper),
            CopulaSpec::FhLower => Ok(Copula::FhLower),
            CopulaSpec::Independence => Ok(Copula::Independence),
            CopulaSpec::Gumbel { theta } => {
                let g = Gumbel::new(*theta).map_err(config_err)?;
                Ok(archimedean_copula(Arc::new(g)))
            }
            CopulaSpec::Mixture { w, a, b } => Copula::mixture(*w, a.build(pair)?, b.build(pair)?).map_err(config_err),
        }
    }
}

impl DiagonalSpec {
    /// The function as written, without checking that it is a diagonal
    /// section.
    pub fn raw(&self) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        Ok(match self.clone() {
            DiagonalSpec::Comonotone => Arc::new(|t: f64| t),
            DiagonalSpec::Power { exponent } => Arc::new(move |t: f64| t.powf(exponent)),
            DiagonalSpec::Gumbel { theta } => {
                let k = Gumbel::new(theta).map_err(config_err)?.diagonal_exponent();
                Arc::new(move |t: f64| t.powf(k))
            }
            DiagonalSpec::FrechetLower => Arc::new(|t: f64| (2.0 * t - 1.0).max(0.0)),
            DiagonalSpec::Table { t, delta } => {
                if t.len() < 2 || t.len() != delta.len() || t.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("diagonal table needs increasing t and a delta column of equal length".into()));
                }
                Arc::new(move |x: f64| {
                    let k = t.partition_point(|&s| s <= x).clamp(1, t.len() - 1);
                    let w = (x - t[k - 1]) / (t[k] - t[k - 1]);
                    delta[k - 1] + w * (delta[k] - delta[k - 1])
                })
            }
        })
    }

    /// A validated diagonal section.
    pub fn build(&self) -> Result<DiagonalSection> {
        let d = match self.clone() {
            DiagonalSpec::Comonotone => Ok(DiagonalSection::comonotone()),
            DiagonalSpec::Power { exponent } => DiagonalSection::power(exponent),
            DiagonalSpec::Gumbel { theta } => DiagonalSection::gumbel(theta),
            DiagonalSpec::FrechetLower => Ok(DiagonalSection::frechet_lower()),
            DiagonalSpec::Table { t, delta } => DiagonalSection::table(t, delta),
        };
        d.map_err(config_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_config() {
        let cfg = Config::from_json(
            r#"{"F1": {"type": "power", "alpha": 2}, "F2": {"type": "uniform", "a": 0, "b": 1},
                "ctilde": {"type": "bertino"}, "diagonal": {"type": "power", "exponent": 3}}"#,
            ".",
        )
        .unwrap();
        let pair = cfg.pair().unwrap();
        assert!((pair.f1().eval(0.5) - 0.25).abs() < 1e-15);
        assert!(cfg.ctilde.unwrap().build(&pair).is_ok());
        assert!(cfg.diagonal.as_ref().unwrap().build().is_err());
        assert_eq!(cfg.diagonal.unwrap().raw().unwrap()(0.5), 0.125);
    }

    #[test]
    fn unknown_fields_and_types_rejected() {
        let bad = [
            r#"{"F1": {"type": "cauchy"}, "F2": {"type": "uniform", "a": 0, "b": 1}}"#,
            r#"{"F1": {"type": "power", "alpha": 2, "beta": 1}, "F2": {"type": "uniform", "a": 0, "b": 1}}"#,
            r#"{"F1": {"type": "power", "alpha": 2}}"#,
            r#"{"F1": {"type": "uniform", "a": 1, "b": 0}, "F2": {"type": "uniform", "a": 0, "b": 1}}"#,
        ];
        for json in bad {
            let err = Config::from_json(json, ".").and_then(|c| c.marginals().map(|_| ())).unwrap_err();
            assert_eq!(err.name(), "config", "{json}");
        }
    }

    #[test]
    fn empirical_file_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x.txt"), "# sample\n0.1\n0.2, 0.4\n\n0.4\n").unwrap();
        let cfg_path = dir.path().join("cfg.json");
        std::fs::write(
            &cfg_path,
            r#"{"F1": {"type": "empirical", "file": "x.txt"}, "F2": {"type": "empirical", "sample": [0, 0.1]}}"#,
        )
        .unwrap();
        let cfg = Config::from_path(&cfg_path).unwrap();
        let (f1, _) = cfg.marginals().unwrap();
        assert_eq!(f1.eval(0.2), 0.5);
        assert_eq!(f1.eval(0.4), 1.0);
    }

    #[test]
    fn dominance_failure_is_not_a_config_error() {
        let cfg = Config::from_json(
            r#"{"F1": {"type": "uniform", "a": 0, "b": 1}, "F2": {"type": "uniform", "a": 1, "b": 2}}"#,
            ".",
        )
        .unwrap();
        assert_eq!(cfg.pair().unwrap_err().name(), "not-stochastically-ordered");
    }
}
