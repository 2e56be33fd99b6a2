//! Run summary schema. Non-finite numbers serialize as the strings `"NaN"`, `"inf"`, `"-inf"`.

use escape_core::propagation::DecayFit;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::ExperimentConfig;

/// An `f64` that survives a JSON round trip even when non-finite.
#[derive(Clone, Copy, Debug, Default)]
pub struct Num(pub f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits() || (self.0.is_nan() && other.0.is_nan())
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("NaN"),
            v if v > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "NaN" => Ok(Num(f64::NAN)),
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub slope: Num,
    pub intercept: Num,
    pub rms: Num,
    pub used: Vec<bool>,
}

impl From<&DecayFit> for FitRecord {
    fn from(f: &DecayFit) -> Self {
        Self { slope: Num(f.slope), intercept: Num(f.intercept), rms: Num(f.rms), used: f.used.clone() }
    }
}

/// One curve of an experiment; becomes a block of rows in the experiment's CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub x: Vec<Num>,
    pub y: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub label: String,
    pub fit: Option<FitRecord>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub id: String,
    pub series: Vec<Series>,
    pub fits: Vec<NamedFit>,
}

/// One row of the report table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub experiment: String,
    /// Which statement the check tests.
    pub reference: String,
    pub measured: Num,
    pub required: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub interval: (Num, Num),
    pub theta: Num,
    pub grid_sup: Num,
    pub oracle_sup: Num,
    pub true_sup: Num,
    pub compression_min_eig: Option<Num>,
    pub subspace_dim: Option<usize>,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub certificate: Option<CertificateRecord>,
    pub experiments: Vec<Experiment>,
    pub checks: Vec<Check>,
    pub failure: Option<StageFailure>,
    pub passed: bool,
}

/// Wall time per stage, kept out of the summary so that reruns are byte-identical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn experiment(&self, id: &str) -> Option<&Experiment> {
        self.experiments.iter().find(|e| e.id == id)
    }

    pub fn check(&self, experiment: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.experiment == experiment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn num_round_trips(bits in any::<u64>()) {
            let v = Num(f64::from_bits(bits));
            let back: Num = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }
    }

    #[test]
    fn special_values() {
        for (v, s) in [(f64::NAN, "\"NaN\""), (f64::INFINITY, "\"inf\""), (f64::NEG_INFINITY, "\"-inf\"")] {
            assert_eq!(serde_json::to_string(&Num(v)).unwrap(), s);
        }
        assert!(serde_json::from_str::<Num>("\"x\"").is_err());
    }
}
