//! Catalog spec strings: `kind[:sub]:key=value:...` with keys in a fixed
//! order, so `Display` of a parsed spec is its canonical form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FracError, Result};
use crate::model::{ScalarField, SetRegion, VectorPotential};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Ball { radius: f64, center: Option<Vec<f64>> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Zero,
    Gaussian { width: f64 },
    Bump { radius: f64 },
    PlaneWave { frequency: Vec<f64>, width: f64 },
    Indicator(RegionSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(Vec<f64>),
    Rotational { strength: f64 },
    Oscillatory { amplitude: f64, frequency: f64 },
}

fn err(msg: impl Into<String>) -> FracError {
    FracError::Config(msg.into())
}

fn number(text: &str, key: &str) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| err(format!("`{key}` expects a number, got `{text}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(format!("`{key}` must be finite")))
    }
}

fn vector(text: &str, key: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| number(t, key)).collect()
}

/// Walks `key=value` segments in their canonical order.
struct Keys<'a> {
    spec: &'a str,
    parts: Vec<(&'a str, &'a str)>,
    pos: usize,
}

impl<'a> Keys<'a> {
    fn new(spec: &'a str, segments: &[&'a str]) -> Result<Self> {
        let parts = segments
            .iter()
            .map(|s| s.split_once('=').ok_or_else(|| err(format!("`{spec}`: expected key=value, got `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Keys { spec, parts, pos: 0 })
    }

    fn optional(&mut self, key: &str) -> Option<&'a str> {
        match self.parts.get(self.pos) {
            Some((k, v)) if *k == key => {
                self.pos += 1;
                Some(v)
            }
            _ => None,
        }
    }

    fn required(&mut self, key: &str) -> Result<&'a str> {
        self.optional(key).ok_or_else(|| err(format!("`{}`: missing or misplaced key `{key}`", self.spec)))
    }

    fn finish(self) -> Result<()> {
        match self.parts.get(self.pos) {
            None => Ok(()),
            Some((k, _)) => Err(err(format!("`{}`: unexpected key `{k}`", self.spec))),
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for FieldSpec {
    type Err = FracError;

    fn from_str(spec: &str) -> Result<Self> {
        let segs: Vec<&str> = spec.trim().split(':').collect();
        let out = match segs[0] {
            "zero" => {
                Keys::new(spec, &segs[1..])?.finish()?;
                FieldSpec::Zero
            }
            "gaussian" => {
                let mut k = Keys::new(spec, &segs[1..])?;
                let width = number(k.required("w")?, "w")?;
                k.finish()?;
                FieldSpec::Gaussian { width }
            }
            "bump" => {
                let mut k = Keys::new(spec, &segs[1..])?;
                let radius = number(k.required("r")?, "r")?;
                k.finish()?;
                FieldSpec::Bump { radius }
            }
            "planewave" => {
                let mut k = Keys::new(spec, &segs[1..])?;
                let frequency = vector(k.required("k")?, "k")?;
                let width = number(k.required("w")?, "w")?;
                k.finish()?;
                FieldSpec::PlaneWave { frequency, width }
            }
            "indicator" => {
                let shape = segs.get(1).copied().unwrap_or("");
                let mut k = Keys::new(spec, segs.get(2..).unwrap_or(&[]))?;
                let region = match shape {
                    "ball" => {
                        let radius = number(k.required("r")?, "r")?;
                        let center = k.optional("c").map(|c| vector(c, "c")).transpose()?;
                        RegionSpec::Ball { radius, center }
                    }
                    "box" => {
                        let lower = vector(k.required("lo")?, "lo")?;
                        let upper = vector(k.required("hi")?, "hi")?;
                        RegionSpec::Box { lower, upper }
                    }
                    other => return Err(err(format!("`{spec}`: unknown region `{other}` (ball, box)"))),
                };
                k.finish()?;
                FieldSpec::Indicator(region)
            }
            other => return Err(err(format!("unknown field `{other}` (zero, gaussian, bump, planewave, indicator)"))),
        };
        Ok(out)
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Ball { radius, center: None } => write!(f, "ball:r={radius}"),
            RegionSpec::Ball { radius, center: Some(c) } => write!(f, "ball:r={radius}:c={}", join(c)),
            RegionSpec::Box { lower, upper } => write!(f, "box:lo={}:hi={}", join(lower), join(upper)),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Zero => write!(f, "zero"),
            FieldSpec::Gaussian { width } => write!(f, "gaussian:w={width}"),
            FieldSpec::Bump { radius } => write!(f, "bump:r={radius}"),
            FieldSpec::PlaneWave { frequency, width } => write!(f, "planewave:k={}:w={width}", join(frequency)),
            FieldSpec::Indicator(r) => write!(f, "indicator:{r}"),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = FracError;

    fn from_str(spec: &str) -> Result<Self> {
        let trimmed = spec.trim();
        let body = trimmed.strip_prefix("potential:").unwrap_or(trimmed);
        let segs: Vec<&str> = body.split(':').collect();
        let mut k = Keys::new(spec, &segs[1..])?;
        let out = match segs[0] {
            "zero" => PotentialSpec::Zero,
            "constant" => PotentialSpec::Constant(vector(k.required("a")?, "a")?),
            "rotational" => PotentialSpec::Rotational { strength: number(k.required("b")?, "b")? },
            "oscillatory" => {
                let amplitude = number(k.required("amp")?, "amp")?;
                let frequency = number(k.required("freq")?, "freq")?;
                PotentialSpec::Oscillatory { amplitude, frequency }
            }
            other => return Err(err(format!("unknown potential `{other}` (zero, constant, rotational, oscillatory)"))),
        };
        k.finish()?;
        Ok(out)
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Zero => write!(f, "potential:zero"),
            PotentialSpec::Constant(a) => write!(f, "potential:constant:a={}", join(a)),
            PotentialSpec::Rotational { strength } => write!(f, "potential:rotational:b={strength}"),
            PotentialSpec::Oscillatory { amplitude, frequency } => {
                write!(f, "potential:oscillatory:amp={amplitude}:freq={frequency}")
            }
        }
    }
}

impl RegionSpec {
    pub fn build(&self, n: usize) -> Result<SetRegion> {
        let region = match self {
            RegionSpec::Ball { radius, center } => {
                SetRegion::ball(center.clone().unwrap_or_else(|| vec![0.0; n]), *radius)?
            }
            RegionSpec::Box { lower, upper } => SetRegion::cube(lower.clone(), upper.clone())?,
        };
        crate::error::check_dim(n, region.dimension())?;
        Ok(region)
    }
}

impl FieldSpec {
    pub fn build(&self, n: usize) -> Result<ScalarField> {
        let field = match self {
            FieldSpec::Zero => ScalarField::zero(n),
            FieldSpec::Gaussian { width } => ScalarField::gaussian(n, *width)?,
            FieldSpec::Bump { radius } => ScalarField::bump(n, *radius)?,
            FieldSpec::PlaneWave { frequency, width } => ScalarField::plane_wave(frequency.clone(), *width)?,
            FieldSpec::Indicator(r) => ScalarField::indicator(r.build(n)?),
        };
        crate::error::check_dim(n, field.dimension())?;
        Ok(field)
    }

    pub fn region(&self) -> Option<&RegionSpec> {
        match self {
            FieldSpec::Indicator(r) => Some(r),
            _ => None,
        }
    }
}

impl PotentialSpec {
    pub fn build(&self, n: usize) -> Result<VectorPotential> {
        let a = match self {
            PotentialSpec::Zero => VectorPotential::zero(n),
            PotentialSpec::Constant(a) => VectorPotential::constant(a.clone())?,
            PotentialSpec::Rotational { strength } => VectorPotential::rotational(n, *strength)?,
            PotentialSpec::Oscillatory { amplitude, frequency } => {
                VectorPotential::oscillatory(n, *amplitude, *frequency)?
            }
        };
        crate::error::check_dim(n, a.dimension())?;
        Ok(a)
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(FieldSpec);
string_serde!(PotentialSpec);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_examples() {
        for text in [
            "zero",
            "gaussian:w=1",
            "bump:r=0.5",
            "planewave:k=1,-2:w=1.5",
            "indicator:ball:r=1",
            "indicator:ball:r=2:c=0,1",
            "indicator:box:lo=-0.5:hi=0.5",
        ] {
            let f: FieldSpec = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        for text in [
            "potential:zero",
            "potential:constant:a=1,0",
            "potential:rotational:b=2",
            "potential:oscillatory:amp=1:freq=1",
        ] {
            let p: PotentialSpec = text.parse().unwrap();
            assert_eq!(p.to_string(), text);
        }
        let short: PotentialSpec = "rotational:b=2.0".parse().unwrap();
        assert_eq!(short.to_string(), "potential:rotational:b=2");
    }

    #[test]
    fn malformed_specs_are_rejected() {
        for text in ["gauss:w=1", "gaussian", "gaussian:r=1", "gaussian:w=1:r=2", "indicator:cone:r=1", "gaussian:w=x"]
        {
            assert!(text.parse::<FieldSpec>().is_err(), "{text}");
        }
        for text in ["potential:oscillatory:freq=1:amp=1", "potential:constant", "potential:spiral"] {
            assert!(text.parse::<PotentialSpec>().is_err(), "{text}");
        }
    }

    #[test]
    fn build_checks_dimension() {
        let f: FieldSpec = "indicator:box:lo=0,0:hi=1,1".parse().unwrap();
        assert!(f.build(2).is_ok());
        assert!(f.build(3).is_err());
        let p: PotentialSpec = "potential:constant:a=1".parse().unwrap();
        assert!(p.build(2).is_err());
    }

    proptest! {
        #[test]
        fn field_round_trip(w in 1e-3f64..1e3, k in proptest::collection::vec(-50.0f64..50.0, 1..4)) {
            for spec in [FieldSpec::Gaussian { width: w }, FieldSpec::PlaneWave { frequency: k.clone(), width: w }] {
                let text = spec.to_string();
                let back: FieldSpec = text.parse().unwrap();
                prop_assert_eq!(&back, &spec);
                prop_assert_eq!(back.to_string(), text);
            }
        }

        #[test]
        fn potential_round_trip(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            for spec in [
                PotentialSpec::Constant(vec![a, b]),
                PotentialSpec::Oscillatory { amplitude: a, frequency: b },
            ] {
                let back: PotentialSpec = spec.to_string().parse().unwrap();
                prop_assert_eq!(back, spec);
            }
        }
    }
}
