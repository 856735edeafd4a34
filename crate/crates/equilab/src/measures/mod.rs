//! Gaussian transverse-measure computations.
//!
//! The product measure under study constrains one coordinate at a time:
//! coordinate `n` is a centered Gaussian with standard deviation
//! `σ_n = c·2^n`, and a cylinder event fixes coordinate `n` to an interval
//! while leaving all others free. With `c` above `1/√(2π)` the mass of the
//! (possibly shifted) unit interval at index `n` stays below `2^{-n}`, so
//! the event masses are summable uniformly over translations and the
//! Borel–Cantelli argument applies. This module computes those masses,
//! their partial sums and geometric envelopes, and a Monte Carlo estimate
//! of how often sampled sequences hit at least one event in a range.

pub mod kernel;

pub use kernel::{erf, erfc, normal_cdf, normal_quantile};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{self, ShiftVector, VALUE_STREAM};
use crate::rng::{derive_seed, CounterRng};

/// `1/sqrt(2*pi)`, the infimum of admissible schedule scales.
pub const MIN_SCHEDULE_SCALE: f64 = 0.3989422804014327;

/// The σ-schedule `σ_n = c·2^n` for `1 ≤ n ≤ n_max`.
///
/// `c` must exceed `1/√(2π)` so that `σ_n > 2^n/√(2π)`, which is exactly
/// what makes the unit-interval masses decay below `2^{-n}`. `n_max` is
/// capped at 1000 to keep every `σ_n` finite in double precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSchedule {
    pub c: f64,
    pub n_max: u32,
}

impl GaussianSchedule {
    pub const DEFAULT_N_MAX: u32 = 200;
    pub const MAX_N_MAX: u32 = 1000;

    pub fn new(c: f64, n_max: u32) -> Result<Self> {
        let schedule = GaussianSchedule { c, n_max };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= MIN_SCHEDULE_SCALE {
            return Err(Error::invalid(
                "c",
                format!(
                    "schedule scale must be a finite real > 1/sqrt(2*pi) ~ {MIN_SCHEDULE_SCALE:.4}, got {}",
                    self.c
                ),
            ));
        }
        if self.n_max == 0 || self.n_max > Self::MAX_N_MAX {
            return Err(Error::invalid(
                "n_max",
                format!("must lie in 1..={}, got {}", Self::MAX_N_MAX, self.n_max),
            ));
        }
        if !(self.c * f64::exp2(self.n_max as f64)).is_finite() {
            return Err(Error::invalid(
                "n_max",
                format!("sigma overflows at n_max = {}", self.n_max),
            ));
        }
        Ok(())
    }

    /// `σ_n` for a materialized index `1 ≤ n ≤ n_max`.
    pub fn sigma(&self, n: u32) -> Result<f64> {
        if n == 0 || n > self.n_max {
            return Err(Error::IndexOutOfSchedule {
                index: n,
                n_max: self.n_max,
            });
        }
        Ok(self.c * f64::exp2(n as f64))
    }

    /// `σ_n` with indices beyond `n_max` clamped to `σ_{n_max}`; this is the
    /// sampler's convention for prefixes longer than the schedule.
    pub fn sigma_clamped(&self, n: u32) -> f64 {
        self.c * f64::exp2(n.clamp(1, self.n_max) as f64)
    }
}

/// The event "coordinate `n` lies in `[lo + shift, hi + shift]`, all other
/// coordinates free".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderEvent {
    pub n: u32,
    pub lo: f64,
    pub hi: f64,
    pub shift: f64,
}

impl CylinderEvent {
    pub fn new(n: u32, lo: f64, hi: f64, shift: f64) -> Result<Self> {
        let event = CylinderEvent { n, lo, hi, shift };
        event.validate()?;
        Ok(event)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "event index must be at least 1"));
        }
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid("lo", "interval endpoints must be finite"));
        }
        if self.lo >= self.hi {
            return Err(Error::invalid(
                "lo",
                format!("requires lo < hi, got [{}, {}]", self.lo, self.hi),
            ));
        }
        if !self.shift.is_finite() {
            return Err(Error::invalid("shift", "must be finite"));
        }
        Ok(())
    }

    /// The constrained coordinate's effective interval.
    pub fn effective(&self) -> (f64, f64) {
        (self.lo + self.shift, self.hi + self.shift)
    }
}

/// Mass of a cylinder event under the schedule's product measure:
/// `Φ((hi+h)/σ_n) − Φ((lo+h)/σ_n)`.
pub fn gaussian_mass(event: &CylinderEvent, schedule: &GaussianSchedule) -> Result<f64> {
    schedule.validate()?;
    event.validate()?;
    let sigma = schedule.sigma(event.n)?;
    let (lo, hi) = event.effective();
    Ok(kernel::std_interval_mass(lo / sigma, hi / sigma))
}

/// Both the shifted and the centered (shift = 0) mass of an event.
///
/// For intervals symmetric about zero the first entry never exceeds the
/// second: a centered interval maximizes mass under a symmetric unimodal
/// law.
pub fn shift_monotonicity_check(
    event: &CylinderEvent,
    schedule: &GaussianSchedule,
) -> Result<(f64, f64)> {
    let shifted = gaussian_mass(event, schedule)?;
    let centered = gaussian_mass(
        &CylinderEvent {
            shift: 0.0,
            ..*event
        },
        schedule,
    )?;
    Ok((shifted, centered))
}

fn validate_interval(interval: (f64, f64)) -> Result<()> {
    let (lo, hi) = interval;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("lo", "interval endpoints must be finite"));
    }
    if lo >= hi {
        return Err(Error::invalid(
            "lo",
            format!("requires lo < hi, got [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

fn validate_range(schedule: &GaussianSchedule, n_from: u32, n_to: u32) -> Result<()> {
    if n_from == 0 {
        return Err(Error::invalid("n_from", "must be at least 1"));
    }
    if n_from > n_to {
        return Err(Error::invalid(
            "n_from",
            format!("requires n_from <= n_to, got {n_from} > {n_to}"),
        ));
    }
    if n_to > schedule.n_max {
        return Err(Error::IndexOutOfSchedule {
            index: n_to,
            n_max: schedule.n_max,
        });
    }
    Ok(())
}

/// `Σ_{n=n_from}^{n_to} 2^{-n}`, the geometric envelope of the mass sums.
pub fn envelope_sum(n_from: u32, n_to: u32) -> f64 {
    if n_from > n_to {
        return 0.0;
    }
    f64::exp2(1.0 - n_from as f64) - f64::exp2(-(n_to as f64))
}

/// Partial sum of shifted cylinder-event masses over an index range.
///
/// For the unit interval `[-1/2, 1/2]` and any shift the result is bounded
/// by the geometric envelope [`envelope_sum`].
pub fn borel_cantelli_sum(
    schedule: &GaussianSchedule,
    shift: &ShiftVector,
    interval: (f64, f64),
    n_from: u32,
    n_to: u32,
) -> Result<f64> {
    schedule.validate()?;
    shift.validate()?;
    validate_interval(interval)?;
    validate_range(schedule, n_from, n_to)?;
    let mut sum = 0.0;
    for n in n_from..=n_to {
        let event = CylinderEvent {
            n,
            lo: interval.0,
            hi: interval.1,
            shift: shift.eval(n),
        };
        let sigma = schedule.sigma(n)?;
        let (lo, hi) = event.effective();
        sum += kernel::std_interval_mass(lo / sigma, hi / sigma);
    }
    Ok(sum)
}

/// Result of [`limsup_hit_estimate`]: the empirical fraction of sampled
/// sequences hitting at least one event in the range, always reported next
/// to its analytic union bound and geometric envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimsupEstimate {
    pub n_from: u32,
    pub n_to: u32,
    pub replicas: u32,
    pub fraction: f64,
    pub union_bound: f64,
    pub envelope: f64,
}

/// Largest index `k` in `[n_from, n_to]` where the replica's sampled
/// coordinate lands in the shifted interval, if any. Coordinates are
/// keyed by `(replica_seed, k)`, so estimates over different ranges see
/// consistent samples.
pub(crate) fn replica_last_hit(
    schedule: &GaussianSchedule,
    shift: &ShiftVector,
    interval: (f64, f64),
    n_from: u32,
    n_to: u32,
    replica_seed: u64,
) -> Option<u32> {
    let rng = CounterRng::new(replica_seed, VALUE_STREAM);
    let mut last = None;
    for k in n_from..=n_to {
        let x = generators::gaussian_coordinate(schedule, &rng, k);
        let h = shift.eval(k);
        if x >= interval.0 + h && x <= interval.1 + h {
            last = Some(k);
        }
    }
    last
}

/// Monte Carlo estimate of the probability that a sampled sequence hits
/// ANY event with index in `[n_from, n_to]` — the finite shadow of the
/// limsup event. An empty range (`n_from > n_to`) yields fraction 0.
///
/// Replicas use derived per-replica seeds and may be evaluated on any
/// number of worker threads; the result is identical either way.
pub fn limsup_hit_estimate(
    schedule: &GaussianSchedule,
    shift: &ShiftVector,
    interval: (f64, f64),
    n_from: u32,
    n_to: u32,
    replicas: u32,
    seed: u64,
) -> Result<LimsupEstimate> {
    schedule.validate()?;
    shift.validate()?;
    validate_interval(interval)?;
    if replicas == 0 {
        return Err(Error::invalid("replicas", "must be at least 1"));
    }
    if n_from > n_to {
        return Ok(LimsupEstimate {
            n_from,
            n_to,
            replicas,
            fraction: 0.0,
            union_bound: 0.0,
            envelope: 0.0,
        });
    }
    if n_from == 0 {
        return Err(Error::invalid("n_from", "must be at least 1"));
    }
    if n_to > schedule.n_max {
        return Err(Error::IndexOutOfSchedule {
            index: n_to,
            n_max: schedule.n_max,
        });
    }
    let hits = (0..replicas)
        .into_par_iter()
        .filter(|&r| {
            replica_last_hit(
                schedule,
                shift,
                interval,
                n_from,
                n_to,
                derive_seed(seed, r as u64),
            )
            .is_some()
        })
        .count();
    Ok(LimsupEstimate {
        n_from,
        n_to,
        replicas,
        fraction: hits as f64 / replicas as f64,
        union_bound: borel_cantelli_sum(schedule, shift, interval, n_from, n_to)?,
        envelope: envelope_sum(n_from, n_to),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: (f64, f64) = (-0.5, 0.5);

    #[test]
    fn schedule_validation() {
        assert!(GaussianSchedule::new(1.0, 200).is_ok());
        // at or below 1/sqrt(2*pi) is rejected (degenerate sigma included)
        assert!(GaussianSchedule::new(MIN_SCHEDULE_SCALE, 10).is_err());
        assert!(GaussianSchedule::new(0.0, 10).is_err());
        assert!(GaussianSchedule::new(1.0, 0).is_err());
        assert!(GaussianSchedule::new(1.0, 1001).is_err());
        assert!(GaussianSchedule::new(f64::INFINITY, 10).is_err());
    }

    #[test]
    fn sigma_is_strictly_increasing_and_clamped() {
        let s = GaussianSchedule::new(1.5, 40).unwrap();
        for n in 1..40 {
            assert!(s.sigma(n).unwrap() < s.sigma(n + 1).unwrap());
        }
        assert!(s.sigma(0).is_err());
        assert!(s.sigma(41).is_err());
        assert_eq!(s.sigma_clamped(41), s.sigma(40).unwrap());
        assert_eq!(s.sigma_clamped(7), s.sigma(7).unwrap());
    }

    #[test]
    fn mass_examples() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        // degenerate interval is rejected at event construction
        assert!(CylinderEvent::new(1, 0.3, 0.3, 0.0).is_err());

        // c = 1, n = 1, h = 0: 2*Phi(0.25) - 1, from the 40-digit oracle
        let e = CylinderEvent::new(1, -0.5, 0.5, 0.0).unwrap();
        let m = gaussian_mass(&e, &s).unwrap();
        assert!((m - 0.19741265136584746).abs() < 1e-14);
        assert!(m <= 0.5);

        // boundary scale sigma = 2/sqrt(2*pi): mass ~ 0.4692, still <= 1/2
        let boundary = 2.0 * kernel::normal_cdf(0.5, 2.0 / (2.0 * std::f64::consts::PI).sqrt())
            .unwrap()
            - 1.0;
        assert!((boundary - 0.46911594893005937).abs() < 1e-14);
        assert!(boundary <= 0.5);
    }

    #[test]
    fn mass_index_must_be_in_schedule() {
        let s = GaussianSchedule::new(1.0, 10).unwrap();
        let e = CylinderEvent::new(11, -0.5, 0.5, 0.0).unwrap();
        assert!(matches!(
            gaussian_mass(&e, &s),
            Err(Error::IndexOutOfSchedule { .. })
        ));
    }

    #[test]
    fn shift_monotonicity() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        let centered = CylinderEvent::new(3, -0.5, 0.5, 0.0).unwrap();
        let (a, b) = shift_monotonicity_check(&centered, &s).unwrap();
        assert_eq!(a, b);

        let far = CylinderEvent::new(3, -0.5, 0.5, 10.0 * s.sigma(3).unwrap()).unwrap();
        let (a, b) = shift_monotonicity_check(&far, &s).unwrap();
        assert!(a < 1e-6 * b);

        for h in [-1000.0, -5.0, 0.0, 5.0, 1000.0] {
            let e = CylinderEvent::new(4, -0.5, 0.5, h).unwrap();
            let (shifted, centered) = shift_monotonicity_check(&e, &s).unwrap();
            assert!(shifted <= centered + 1e-14);
        }
    }

    #[test]
    fn envelope_is_geometric() {
        assert_eq!(envelope_sum(1, 10), 1023.0 / 1024.0);
        assert_eq!(envelope_sum(5, 4), 0.0);
        assert_eq!(envelope_sum(3, 3), 0.125);
    }

    #[test]
    fn borel_cantelli_sum_examples() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        let zero = ShiftVector::zero();

        // single-term sum equals the mass at that index
        let e = CylinderEvent::new(7, -0.5, 0.5, 0.0).unwrap();
        let single = borel_cantelli_sum(&s, &zero, UNIT, 7, 7).unwrap();
        assert_eq!(single, gaussian_mass(&e, &s).unwrap());

        // c = 1 over 1..50 stays below 1 (40-digit oracle: 0.396587586747...)
        let total = borel_cantelli_sum(&s, &zero, UNIT, 1, 50).unwrap();
        assert!((total - 0.39658758674748185).abs() < 1e-13);
        assert!(total < 1.0);

        // range violations
        assert!(borel_cantelli_sum(&s, &zero, UNIT, 5, 3).is_err());
        assert!(borel_cantelli_sum(&s, &zero, UNIT, 0, 3).is_err());
        assert!(borel_cantelli_sum(&s, &zero, UNIT, 1, 61).is_err());
        assert!(borel_cantelli_sum(&s, &zero, (0.5, -0.5), 1, 5).is_err());
    }

    #[test]
    fn monotone_convergence_of_partial_sums() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        let zero = ShiftVector::zero();
        let mut prev = 0.0;
        for n in 1..=60 {
            let sum = borel_cantelli_sum(&s, &zero, UNIT, 1, n).unwrap();
            assert!(sum >= prev);
            assert!(sum <= 1.0);
            prev = sum;
        }
    }

    #[test]
    fn limsup_empty_range_and_validation() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        let zero = ShiftVector::zero();
        let est = limsup_hit_estimate(&s, &zero, UNIT, 9, 3, 100, 1).unwrap();
        assert_eq!(est.fraction, 0.0);
        assert_eq!(est.union_bound, 0.0);

        assert!(limsup_hit_estimate(&s, &zero, (f64::NEG_INFINITY, 0.5), 1, 5, 10, 1).is_err());
        assert!(limsup_hit_estimate(&s, &zero, UNIT, 1, 5, 0, 1).is_err());
    }

    #[test]
    fn limsup_fraction_respects_union_bound() {
        let s = GaussianSchedule::new(1.0, 60).unwrap();
        let zero = ShiftVector::zero();
        let est = limsup_hit_estimate(&s, &zero, UNIT, 5, 50, 10_000, 2024).unwrap();
        assert!((est.envelope - 0.0625).abs() < 1e-12);
        let slack = 3.0 * (est.union_bound / 10_000.0).sqrt();
        assert!(est.fraction <= est.union_bound + slack);
    }
}
