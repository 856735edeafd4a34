//! Finite prefixes of the real-valued sequences the statistics operate on.
//!
//! Four families: Kronecker `{k·α}`, van der Corput radical inverse,
//! i.i.d. uniform, and the Gaussian σ-schedule sampler, plus termwise
//! translation by a shift vector. Every generator is a pure function of
//! its spec: identical `(spec, n)` produce bitwise-identical prefixes, and
//! the length-n output is a prefix of the length-m output for m ≥ n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{kernel, GaussianSchedule};
use crate::rng::CounterRng;

/// Stream id for generator coordinate draws; replicas get fresh seeds via
/// [`crate::rng::derive_seed`] instead of fresh streams.
pub(crate) const VALUE_STREAM: u64 = 0;

/// A finite prefix `(x_1, ..., x_N)` of a real sequence. All values are
/// finite; construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequencePrefix {
    values: Vec<f64>,
}

impl SequencePrefix {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(SequencePrefix { values })
    }

    /// Construct from values already known to be finite.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        SequencePrefix { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Termwise translation `(h_k)` applied to a prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ShiftVector {
    /// `h_k = c` for every index.
    Constant { c: f64 },
    /// `h_k = values[k-1]` while in range, 0 beyond the stored length.
    Explicit { values: Vec<f64> },
    /// `h_k = slope * k`.
    Linear { slope: f64 },
}

impl ShiftVector {
    pub fn validate(&self) -> Result<()> {
        match self {
            ShiftVector::Constant { c } if !c.is_finite() => {
                Err(Error::invalid("shift.c", format!("must be finite, got {c}")))
            }
            ShiftVector::Linear { slope } if !slope.is_finite() => Err(Error::invalid(
                "shift.slope",
                format!("must be finite, got {slope}"),
            )),
            ShiftVector::Explicit { values } => {
                match values.iter().position(|v| !v.is_finite()) {
                    Some(i) => Err(Error::invalid(
                        "shift.values",
                        format!("entry {i} is not finite"),
                    )),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// `h_k` for a 1-based index.
    pub fn eval(&self, k: u32) -> f64 {
        match self {
            ShiftVector::Constant { c } => *c,
            ShiftVector::Explicit { values } => {
                values.get(k as usize - 1).copied().unwrap_or(0.0)
            }
            ShiftVector::Linear { slope } => slope * k as f64,
        }
    }

    pub fn negated(&self) -> ShiftVector {
        match self {
            ShiftVector::Constant { c } => ShiftVector::Constant { c: -c },
            ShiftVector::Explicit { values } => ShiftVector::Explicit {
                values: values.iter().map(|v| -v).collect(),
            },
            ShiftVector::Linear { slope } => ShiftVector::Linear { slope: -slope },
        }
    }

    /// The all-zero shift.
    pub fn zero() -> ShiftVector {
        ShiftVector::Constant { c: 0.0 }
    }
}

/// Declarative description of how a prefix is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `{k·alpha}` evaluated in double precision as `k·alpha − floor(k·alpha)`;
    /// the accumulated error is at most `N` ulp, negligible at desk scale
    /// (`N ≤ 10^7`).
    Kronecker { alpha: f64 },
    VanDerCorput { base: u32 },
    IidUniform { a: f64, b: f64 },
    GaussianSchedule { schedule: GaussianSchedule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub shift: Option<ShiftVector>,
    /// Ignored by the deterministic kinds.
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, shift: Option<ShiftVector>, seed: u64) -> Result<Self> {
        let spec = GeneratorSpec { kind, shift, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            GeneratorKind::Kronecker { alpha } if !alpha.is_finite() => {
                return Err(Error::invalid(
                    "alpha",
                    format!("must be finite, got {alpha}"),
                ));
            }
            GeneratorKind::VanDerCorput { base } if *base < 2 => {
                return Err(Error::invalid("base", format!("must be >= 2, got {base}")));
            }
            GeneratorKind::IidUniform { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::invalid("a", "interval endpoints must be finite"));
                }
                if a >= b {
                    return Err(Error::invalid("a", format!("requires a < b, got [{a}, {b})")));
                }
            }
            GeneratorKind::GaussianSchedule { schedule } => schedule.validate()?,
            _ => {}
        }
        if let Some(shift) = &self.shift {
            shift.validate()?;
        }
        Ok(())
    }
}

/// Fractional part mapped into `[0, 1)`, with the rounding-to-1 guard.
pub(crate) fn fract_unit(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Radical inverse of `k` in the given base, the k-th van der Corput point.
fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut scale = 1.0 / base as f64;
    let mut result = 0.0;
    while k > 0 {
        result += (k % b) as f64 * scale;
        k /= b;
        scale /= base as f64;
    }
    result
}

// Largest f64 strictly below a finite nonzero x.
fn step_below(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else if x < 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        -f64::from_bits(1) // largest value below 0.0
    }
}

/// One coordinate of a σ-schedule Gaussian sample, via the inverse CDF so
/// that the same kernel backs sampling and mass computation. Indices past
/// `n_max` reuse `σ_{n_max}`.
pub(crate) fn gaussian_coordinate(schedule: &GaussianSchedule, rng: &CounterRng, k: u32) -> f64 {
    let u = rng.open_unit_at(k as u64);
    schedule.sigma_clamped(k) * kernel::std_normal_quantile(u)
}

/// Produce exactly `n` values of the sequence described by `spec`.
pub fn generate(spec: &GeneratorSpec, n: u32) -> Result<SequencePrefix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let values: Vec<f64> = match &spec.kind {
        GeneratorKind::Kronecker { alpha } => {
            (1..=n).map(|k| fract_unit(k as f64 * alpha)).collect()
        }
        GeneratorKind::VanDerCorput { base } => {
            (1..=n).map(|k| radical_inverse(k as u64, *base)).collect()
        }
        GeneratorKind::IidUniform { a, b } => {
            let rng = CounterRng::new(spec.seed, VALUE_STREAM);
            let width = b - a;
            (1..=n)
                .map(|k| {
                    let v = a + width * rng.unit_at(k as u64);
                    // half-open contract: rounding may not touch b
                    if v >= *b {
                        step_below(*b)
                    } else {
                        v
                    }
                })
                .collect()
        }
        GeneratorKind::GaussianSchedule { schedule } => {
            let rng = CounterRng::new(spec.seed, VALUE_STREAM);
            (1..=n)
                .map(|k| gaussian_coordinate(schedule, &rng, k))
                .collect()
        }
    };
    let prefix = SequencePrefix::new(values)?;
    match &spec.shift {
        Some(shift) => apply_shift(&prefix, shift),
        None => Ok(prefix),
    }
}

/// Draw one point of the σ-schedule product measure: coordinate `k` is an
/// independent `normal(0, σ_k)` draw, deterministic per `(schedule, n, seed)`.
pub fn sample_gaussian_prefix(
    schedule: &GaussianSchedule,
    n: u32,
    seed: u64,
) -> Result<SequencePrefix> {
    schedule.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let rng = CounterRng::new(seed, VALUE_STREAM);
    SequencePrefix::new(
        (1..=n)
            .map(|k| gaussian_coordinate(schedule, &rng, k))
            .collect(),
    )
}

/// Translate a prefix termwise: `output_k = input_k + h_k`.
pub fn apply_shift(prefix: &SequencePrefix, shift: &ShiftVector) -> Result<SequencePrefix> {
    shift.validate()?;
    SequencePrefix::new(
        prefix
            .values()
            .iter()
            .enumerate()
            .map(|(i, x)| x + shift.eval(i as u32 + 1))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vdc(base: u32) -> GeneratorSpec {
        GeneratorSpec {
            kind: GeneratorKind::VanDerCorput { base },
            shift: None,
            seed: 0,
        }
    }

    #[test]
    fn van_der_corput_base2_first_three() {
        let p = generate(&vdc(2), 3).unwrap();
        assert_eq!(p.values(), &[0.5, 0.25, 0.75]);
    }

    #[test]
    fn kronecker_sqrt2_third_value() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::Kronecker {
                alpha: 2f64.sqrt(),
            },
            shift: None,
            seed: 0,
        };
        let p = generate(&spec, 3).unwrap();
        // {3*sqrt(2)} = 0.242640687... (3*sqrt(2) - 4, to 9 digits)
        assert!((p.values()[2] - 0.242640687).abs() < 1e-9);
    }

    #[test]
    fn iid_uniform_is_deterministic_and_in_range() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::IidUniform { a: 0.0, b: 1.0 },
            shift: None,
            seed: 42,
        };
        let p1 = generate(&spec, 100).unwrap();
        let p2 = generate(&spec, 100).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.values().iter().all(|&v| (0.0..1.0).contains(&v)));

        let spec2 = GeneratorSpec {
            kind: GeneratorKind::IidUniform { a: -3.0, b: -1.5 },
            shift: None,
            seed: 7,
        };
        let q = generate(&spec2, 500).unwrap();
        assert!(q.values().iter().all(|&v| (-3.0..-1.5).contains(&v)));
    }

    #[test]
    fn prefix_extension_coherence() {
        let specs = [
            vdc(3),
            GeneratorSpec {
                kind: GeneratorKind::Kronecker { alpha: 0.7548 },
                shift: None,
                seed: 0,
            },
            GeneratorSpec {
                kind: GeneratorKind::IidUniform { a: 0.0, b: 1.0 },
                shift: None,
                seed: 11,
            },
            GeneratorSpec {
                kind: GeneratorKind::GaussianSchedule {
                    schedule: GaussianSchedule::new(1.0, 50).unwrap(),
                },
                shift: None,
                seed: 11,
            },
        ];
        for spec in &specs {
            let short = generate(spec, 20).unwrap();
            let long = generate(spec, 35).unwrap();
            assert_eq!(short.values(), &long.values()[..20]);
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let err = generate(&vdc(1), 3).unwrap_err();
        assert!(err.to_string().contains("base"));
        let spec = GeneratorSpec {
            kind: GeneratorKind::IidUniform { a: 2.0, b: 2.0 },
            shift: None,
            seed: 0,
        };
        let err = generate(&spec, 3).unwrap_err();
        assert!(err.to_string().contains('a'));
        assert!(generate(&vdc(2), 0).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = SequencePrefix::new(vec![0.1, 0.2]).unwrap();
        let same = apply_shift(&p, &ShiftVector::Constant { c: 0.0 }).unwrap();
        assert_eq!(same.values(), &[0.1, 0.2]);
        let up = apply_shift(&p, &ShiftVector::Constant { c: 1.5 }).unwrap();
        assert_eq!(up.values(), &[1.6, 1.7]);

        let zeros = SequencePrefix::new(vec![0.0, 0.0, 0.0]).unwrap();
        let lin = apply_shift(&zeros, &ShiftVector::Linear { slope: 0.5 }).unwrap();
        assert_eq!(lin.values(), &[0.5, 1.0, 1.5]);
    }

    #[test]
    fn explicit_shift_zero_pads() {
        let p = SequencePrefix::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let shifted = apply_shift(
            &p,
            &ShiftVector::Explicit {
                values: vec![0.25, -0.25],
            },
        )
        .unwrap();
        assert_eq!(shifted.values(), &[1.25, 0.75, 1.0, 1.0]);
    }

    #[test]
    fn sample_gaussian_prefix_contracts() {
        let schedule = GaussianSchedule::new(1.0, 60).unwrap();
        let a = sample_gaussian_prefix(&schedule, 10, 5).unwrap();
        let b = sample_gaussian_prefix(&schedule, 10, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|v| v.is_finite()));
        // degenerate sigma rejected at schedule construction
        assert!(GaussianSchedule::new(0.0, 60).is_err());
    }

    #[test]
    fn prefix_rejects_non_finite() {
        assert!(SequencePrefix::new(vec![0.0, f64::NAN]).is_err());
        assert!(SequencePrefix::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::VanDerCorput { base: 2 },
            shift: Some(ShiftVector::Constant { c: 0.5 }),
            seed: 9,
        };
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["kind"], "van_der_corput");
        assert_eq!(json["params"]["base"], 2);
        assert_eq!(json["shift"]["rule"], "constant");
        assert_eq!(json["seed"], 9);
        let back: GeneratorSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);

        let plain = GeneratorSpec {
            kind: GeneratorKind::Kronecker { alpha: 1.5 },
            shift: None,
            seed: 0,
        };
        let json = serde_json::to_value(&plain).unwrap();
        assert!(json["shift"].is_null());
    }
}
