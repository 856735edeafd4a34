//! Equidistribution statistics for finite prefixes.
//!
//! A sequence is uniformly distributed in `[a, b]` when every subinterval
//! `[c, d]` eventually receives its proportional share `(d-c)/(b-a)` of
//! points. For a finite prefix that limit statement becomes a family of
//! finite, checkable quantities: interval hit ratios, the star discrepancy
//! `D*_N` (the worst anchored-interval deviation), Weyl averages of
//! continuous test functions against their exact integrals, and the
//! natural density of the index set escaping an interval.
//!
//! Interval membership is counted with closed endpoints throughout; the
//! boundary has measure zero so the convention cannot affect limits, but
//! finite-N results need one fixed rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{fract_unit, SequencePrefix};

/// One interval hit-ratio sample: how many of the first `n` points fall in
/// `[c, d]`, against the proportional target `(d-c)/(b-a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRatio {
    pub c: f64,
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub count: u64,
    pub n: u64,
    pub empirical: f64,
    pub target: f64,
}

/// Thresholded equidistribution diagnostic. Not a hypothesis test: the
/// threshold is an engineering convention, carried in the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Consistent => write!(f, "consistent"),
            Verdict::Inconsistent => write!(f, "inconsistent"),
        }
    }
}

/// Full evidence for one prefix: discrepancy, grid ratio table, Weyl
/// residuals over the default function bank, and the thresholded verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    pub n: u64,
    pub star_discrepancy: f64,
    pub ratio_table: Vec<IntervalRatio>,
    pub weyl_residuals: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub threshold: f64,
    /// Fraction of values outside `[a, b]`, from [`index_set_density`].
    pub outside_fraction: f64,
}

impl EquidistReport {
    /// One CSV row per ratio-table entry plus a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("c,d,a,b,count,n,empirical,target\n");
        for r in &self.ratio_table {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.c, r.d, r.a, r.b, r.count, r.n, r.empirical, r.target
            ));
        }
        out.push('\n');
        out.push_str("n,star_discrepancy,outside_fraction,verdict,threshold\n");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            self.n, self.star_discrepancy, self.outside_fraction, self.verdict, self.threshold
        ));
        out
    }
}

/// Density evidence for the index set `J = {k : x_k ∉ [lo, hi]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDensityEstimate {
    pub description: String,
    /// `counts[n-1] = #(J ∩ [1, n])`.
    pub counts: Vec<u64>,
    pub final_estimate: f64,
}

impl IndexDensityEstimate {
    /// Running density `#(J ∩ [1, n]) / n` for `1 ≤ n ≤ N`.
    pub fn density_at(&self, n: usize) -> Option<f64> {
        if n == 0 || n > self.counts.len() {
            return None;
        }
        Some(self.counts[n - 1] as f64 / n as f64)
    }
}

// ---------------------------------------------------------------------------
// test functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum TestForm {
    Monomial { power: u32 },
    TrigCos { h: u32 },
    TrigSin { h: u32 },
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

/// A continuous test function on `[0, 1]` with its exact integral, used by
/// [`weyl_average`]. Monomials and trigonometric forms carry analytic
/// integrals; piecewise-linear forms are integrated by composite Simpson
/// with 2^12 panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    id: String,
    #[serde(flatten)]
    form: TestForm,
    exact_integral: f64,
}

const SIMPSON_PANELS: u32 = 1 << 12;
const TWO_PI: f64 = std::f64::consts::TAU;

fn simpson_unit(f: impl Fn(f64) -> f64, panels: u32) -> f64 {
    debug_assert!(panels.is_multiple_of(2));
    let h = 1.0 / panels as f64;
    let mut sum = f(0.0) + f(1.0);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0
}

impl TestFunction {
    pub fn monomial(power: u32) -> TestFunction {
        TestFunction {
            id: format!("pow{power}"),
            form: TestForm::Monomial { power },
            exact_integral: 1.0 / (power as f64 + 1.0),
        }
    }

    pub fn trig_cos(h: u32) -> Result<TestFunction> {
        if h == 0 {
            return Err(Error::invalid("h", "frequency must be at least 1"));
        }
        Ok(TestFunction {
            id: format!("cos{h}"),
            form: TestForm::TrigCos { h },
            exact_integral: 0.0,
        })
    }

    pub fn trig_sin(h: u32) -> Result<TestFunction> {
        if h == 0 {
            return Err(Error::invalid("h", "frequency must be at least 1"));
        }
        Ok(TestFunction {
            id: format!("sin{h}"),
            form: TestForm::TrigSin { h },
            exact_integral: 0.0,
        })
    }

    pub fn piecewise_linear(id: impl Into<String>, knots: Vec<(f64, f64)>) -> Result<TestFunction> {
        if knots.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("knots", "knots must be finite"));
        }
        if knots.first().unwrap().0 != 0.0 || knots.last().unwrap().0 != 1.0 {
            return Err(Error::invalid("knots", "first x must be 0 and last x must be 1"));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("knots", "x coordinates must be strictly increasing"));
        }
        let form = TestForm::PiecewiseLinear { knots };
        let exact_integral = simpson_unit(|x| eval_form(&form, x), SIMPSON_PANELS);
        Ok(TestFunction {
            id: id.into(),
            form,
            exact_integral,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn exact_integral(&self) -> f64 {
        self.exact_integral
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_form(&self.form, x)
    }

    /// The default 11-function bank: monomials of degree 0..=4 and the
    /// first three cosine and sine frequencies.
    pub fn default_bank() -> Vec<TestFunction> {
        let mut bank: Vec<TestFunction> = (0..=4).map(TestFunction::monomial).collect();
        for h in 1..=3 {
            bank.push(TestFunction::trig_cos(h).expect("h >= 1"));
            bank.push(TestFunction::trig_sin(h).expect("h >= 1"));
        }
        bank
    }

    /// Resolve bank ids like `pow2`, `cos1`, `sin3` against the default
    /// bank's naming scheme.
    pub fn bank_from_ids(ids: &[String]) -> Result<Vec<TestFunction>> {
        let valid: Vec<String> = TestFunction::default_bank()
            .iter()
            .map(|f| f.id.clone())
            .collect();
        ids.iter()
            .map(|id| {
                let parse = |prefix: &str| -> Option<u32> {
                    id.strip_prefix(prefix).and_then(|s| s.parse().ok())
                };
                if let Some(p) = parse("pow") {
                    return Ok(TestFunction::monomial(p));
                }
                if let Some(h) = parse("cos") {
                    if h >= 1 {
                        return TestFunction::trig_cos(h);
                    }
                }
                if let Some(h) = parse("sin") {
                    if h >= 1 {
                        return TestFunction::trig_sin(h);
                    }
                }
                Err(Error::UnknownTestFunction {
                    id: id.clone(),
                    valid: valid.clone(),
                })
            })
            .collect()
    }
}

fn eval_form(form: &TestForm, x: f64) -> f64 {
    match form {
        TestForm::Monomial { power } => x.powi(*power as i32),
        TestForm::TrigCos { h } => (TWO_PI * *h as f64 * x).cos(),
        TestForm::TrigSin { h } => (TWO_PI * *h as f64 * x).sin(),
        TestForm::PiecewiseLinear { knots } => {
            if x <= knots[0].0 {
                return knots[0].1;
            }
            if x >= knots[knots.len() - 1].0 {
                return knots[knots.len() - 1].1;
            }
            let idx = knots.partition_point(|(kx, _)| *kx <= x);
            let (x0, y0) = knots[idx - 1];
            let (x1, y1) = knots[idx];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

/// Fractional parts `{x_k} = x_k - floor(x_k)`, mapped into `[0, 1)`.
pub fn fractional_parts(prefix: &SequencePrefix) -> SequencePrefix {
    SequencePrefix::from_finite(prefix.values().iter().map(|&x| fract_unit(x)).collect())
}

/// Centered fractional parts `{x_k} - 1/2`, mapped into `[-1/2, 1/2)`.
pub fn center_shift(prefix: &SequencePrefix) -> SequencePrefix {
    SequencePrefix::from_finite(
        prefix
            .values()
            .iter()
            .map(|&x| fract_unit(x) - 0.5)
            .collect(),
    )
}

/// Count how many prefix values land in the closed interval `[c, d]` and
/// compare against the proportional target `(d-c)/(b-a)`.
pub fn interval_ratio(
    prefix: &SequencePrefix,
    c: f64,
    d: f64,
    a: f64,
    b: f64,
) -> Result<IntervalRatio> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix {
            op: "interval_ratio",
        });
    }
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !v.is_finite() {
            return Err(Error::invalid("c", format!("{name} must be finite, got {v}")));
        }
    }
    if !(a <= c && c < d && d <= b) {
        return Err(Error::invalid(
            "c",
            format!("requires a <= c < d <= b, got a={a}, c={c}, d={d}, b={b}"),
        ));
    }
    let n = prefix.len() as u64;
    let count = prefix
        .values()
        .iter()
        .filter(|&&x| x >= c && x <= d)
        .count() as u64;
    Ok(IntervalRatio {
        c,
        d,
        a,
        b,
        count,
        n,
        empirical: count as f64 / n as f64,
        target: (d - c) / (b - a),
    })
}

// Exact sorted-points formula on values in [0, 1]; `values` is consumed as
// scratch. D*_N = 1/(2N) + max_i |x_(i) - (2i-1)/(2N)|.
pub(crate) fn star_discrepancy_unit(mut values: Vec<f64>) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite values are totally ordered"));
    let n = values.len() as f64;
    let mut max_dev: f64 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let center = (2.0 * i as f64 + 1.0) / (2.0 * n);
        max_dev = max_dev.max((x - center).abs());
    }
    1.0 / (2.0 * n) + max_dev
}

/// Star discrepancy `D*_N` of a prefix with all values in `[0, 1)`.
pub fn star_discrepancy(prefix: &SequencePrefix) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix {
            op: "star_discrepancy",
        });
    }
    for (index, &value) in prefix.values().iter().enumerate() {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::OutOfUnitInterval { index, value });
        }
    }
    Ok(star_discrepancy_unit(prefix.values().to_vec()))
}

/// Prefix average of `f({x_n})` and its residual against the exact
/// integral of `f` over `[0, 1]`.
pub fn weyl_average(prefix: &SequencePrefix, f: &TestFunction) -> Result<(f64, f64)> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix { op: "weyl_average" });
    }
    let sum: f64 = prefix.values().iter().map(|&x| f.eval(fract_unit(x))).sum();
    let average = sum / prefix.len() as f64;
    Ok((average, (average - f.exact_integral).abs()))
}

/// Running counts and natural-density estimate of the index set
/// `J = {k : x_k ∉ [lo, hi]}`.
pub fn index_set_density(
    prefix: &SequencePrefix,
    interval: (f64, f64),
) -> Result<IndexDensityEstimate> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix {
            op: "index_set_density",
        });
    }
    let (lo, hi) = interval;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::invalid(
            "lo",
            format!("requires finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let mut counts = Vec::with_capacity(prefix.len());
    let mut running = 0u64;
    for &x in prefix.values() {
        if !(x >= lo && x <= hi) {
            running += 1;
        }
        counts.push(running);
    }
    let final_estimate = running as f64 / prefix.len() as f64;
    Ok(IndexDensityEstimate {
        description: format!("k : x_k outside [{lo}, {hi}]"),
        counts,
        final_estimate,
    })
}

/// Default verdict threshold for a length-N prefix: `2/sqrt(N) + 0.01`,
/// clamped to `[0.01, 0.5]`. Matches the Monte Carlo error scale of
/// i.i.d. uniform sequences.
pub fn default_threshold(n: usize) -> f64 {
    (2.0 / (n as f64).sqrt() + 0.01).clamp(0.01, 0.5)
}

pub(crate) struct UdSummary {
    pub star_discrepancy: f64,
    pub outside_fraction: f64,
    pub verdict: Verdict,
}

// Scalar core of ud_verdict: rescale to the unit interval, measure the
// discrepancy of the inside values, and apply the verdict rule. Values
// outside [a, b] count against the verdict through their fraction, not an
// error.
pub(crate) fn ud_summary(
    prefix: &SequencePrefix,
    a: f64,
    b: f64,
    threshold: f64,
) -> Result<UdSummary> {
    if prefix.is_empty() {
        return Err(Error::EmptyPrefix { op: "ud_verdict" });
    }
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::invalid(
            "a",
            format!("requires finite a < b, got [{a}, {b}]"),
        ));
    }
    if threshold <= 0.0 || !threshold.is_finite() {
        return Err(Error::invalid(
            "threshold",
            format!("must be a positive real, got {threshold}"),
        ));
    }
    let width = b - a;
    let inside: Vec<f64> = prefix
        .values()
        .iter()
        .filter(|&&x| x >= a && x <= b)
        .map(|&x| ((x - a) / width).min(1.0))
        .collect();
    let outside_fraction = 1.0 - inside.len() as f64 / prefix.len() as f64;
    let star = if inside.is_empty() {
        1.0
    } else {
        star_discrepancy_unit(inside)
    };
    let verdict = if star < threshold && outside_fraction <= threshold {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(UdSummary {
        star_discrepancy: star,
        outside_fraction,
        verdict,
    })
}

/// Thresholded uniform-distribution diagnostic over `[a, b]`.
///
/// The prefix is affinely rescaled to the unit interval; the verdict is
/// `consistent` iff the star discrepancy stays below the threshold and the
/// fraction of values escaping `[a, b]` does not exceed it. The report
/// carries a grid of interval ratios and Weyl residuals over the default
/// function bank (computed on the rescaled inside values) as evidence.
pub fn ud_verdict(
    prefix: &SequencePrefix,
    a: f64,
    b: f64,
    grid: u32,
    threshold: f64,
) -> Result<EquidistReport> {
    if grid < 2 {
        return Err(Error::invalid("grid", format!("must be at least 2, got {grid}")));
    }
    let summary = ud_summary(prefix, a, b, threshold)?;

    let width = b - a;
    let step = width / grid as f64;
    let mut ratio_table = Vec::with_capacity(grid as usize);
    for j in 0..grid {
        let c = a + j as f64 * step;
        let d = if j + 1 == grid { b } else { a + (j + 1) as f64 * step };
        ratio_table.push(interval_ratio(prefix, c, d, a, b)?);
    }

    let inside = SequencePrefix::from_finite(
        prefix
            .values()
            .iter()
            .filter(|&&x| x >= a && x <= b)
            .map(|&x| ((x - a) / width).min(1.0))
            .collect(),
    );
    let mut weyl_residuals = BTreeMap::new();
    if !inside.is_empty() {
        for f in TestFunction::default_bank() {
            let (_, residual) = weyl_average(&inside, &f)?;
            weyl_residuals.insert(f.id().to_string(), residual);
        }
    }

    Ok(EquidistReport {
        n: prefix.len() as u64,
        star_discrepancy: summary.star_discrepancy,
        ratio_table,
        weyl_residuals,
        verdict: summary.verdict,
        threshold,
        outside_fraction: summary.outside_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefix(values: &[f64]) -> SequencePrefix {
        SequencePrefix::new(values.to_vec()).unwrap()
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(fractional_parts(&prefix(&[2.0])).values(), &[0.0]);
        assert_eq!(fractional_parts(&prefix(&[-0.25])).values(), &[0.75]);
        assert_eq!(
            fractional_parts(&prefix(&[1.5, -1.5, 0.5])).values(),
            &[0.5, 0.5, 0.5]
        );
    }

    #[test]
    fn fractional_parts_idempotent_exactly() {
        let p = prefix(&[13.77, -2.125, 0.9999999, 1e9 + 0.25, -1e-12]);
        let once = fractional_parts(&p);
        let twice = fractional_parts(&once);
        assert_eq!(once, twice);
        assert!(once.values().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn center_shift_examples() {
        assert_eq!(center_shift(&prefix(&[0.75])).values(), &[0.25]);
        assert_eq!(center_shift(&prefix(&[0.0])).values(), &[-0.5]);
        let p = prefix(&[3.2, -0.7, 11.0]);
        for &v in center_shift(&p).values() {
            assert!((-0.5..0.5).contains(&v));
        }
    }

    #[test]
    fn interval_ratio_examples() {
        let r = interval_ratio(&prefix(&[0.1, 0.2, 0.3]), 0.0, 0.25, 0.0, 1.0).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.empirical - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.target, 0.25);

        // target depends only on interval geometry
        let r = interval_ratio(&prefix(&[0.0]), 0.0, 0.25, -0.5, 0.5).unwrap();
        assert_eq!(r.target, 0.25);

        // centered grid: exactly half the points in [0, 1/2] for even N
        let n = 10;
        let grid: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        let r = interval_ratio(&prefix(&grid), 0.0, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(r.empirical, 0.5);

        assert!(interval_ratio(&prefix(&[0.5]), 0.3, 0.2, 0.0, 1.0).is_err());
        assert!(interval_ratio(&prefix(&[]), 0.0, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn closed_interval_counts_endpoints_inward() {
        let r = interval_ratio(&prefix(&[0.25, 0.75]), 0.25, 0.75, 0.0, 1.0).unwrap();
        assert_eq!(r.count, 2);
    }

    #[test]
    fn star_discrepancy_examples() {
        assert_eq!(star_discrepancy(&prefix(&[0.5])).unwrap(), 0.5);
        assert_eq!(star_discrepancy(&prefix(&[0.25, 0.75])).unwrap(), 0.25);
        // van der Corput base 2, N = 4 (value confirmed by the brute-force
        // oracle in the integration suite)
        let vdc4 = prefix(&[0.5, 0.25, 0.75, 0.125]);
        assert!((star_discrepancy(&vdc4).unwrap() - 0.25).abs() < 1e-15);

        let err = star_discrepancy(&prefix(&[0.5, 1.25])).unwrap_err();
        assert!(err.to_string().contains("fractional_parts"));
        assert!(star_discrepancy(&prefix(&[])).is_err());
    }

    #[test]
    fn star_discrepancy_bounds() {
        for values in [&[0.0][..], &[0.1, 0.9], &[0.3, 0.3, 0.3, 0.3]] {
            let d = star_discrepancy(&prefix(values)).unwrap();
            let n = values.len() as f64;
            assert!(d >= 1.0 / (2.0 * n) - 1e-15);
            assert!(d <= 1.0);
        }
    }

    #[test]
    fn weyl_average_examples() {
        let p = prefix(&[0.93, 0.12, 0.48]);
        let (avg, res) = weyl_average(&p, &TestFunction::monomial(0)).unwrap();
        assert_eq!(avg, 1.0);
        assert_eq!(res, 0.0);

        let n = 8;
        let grid: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        let (avg, res) = weyl_average(&prefix(&grid), &TestFunction::monomial(1)).unwrap();
        assert_eq!(avg, 0.5);
        assert_eq!(res, 0.0);

        // fractional parts applied internally
        let (avg_shifted, _) = weyl_average(
            &prefix(&[1.93, -0.88, 5.48]),
            &TestFunction::monomial(2),
        )
        .unwrap();
        let (avg_plain, _) = weyl_average(&p, &TestFunction::monomial(2)).unwrap();
        assert!((avg_shifted - avg_plain).abs() < 1e-12);
    }

    #[test]
    fn test_function_bank() {
        let bank = TestFunction::default_bank();
        assert_eq!(bank.len(), 11);
        assert_eq!(bank[0].id(), "pow0");
        assert_eq!(bank[1].exact_integral(), 0.5);
        assert!(TestFunction::trig_cos(0).is_err());

        let ids: Vec<String> = ["pow2", "sin3"].iter().map(|s| s.to_string()).collect();
        let picked = TestFunction::bank_from_ids(&ids).unwrap();
        assert_eq!(picked.len(), 2);
        let bad: Vec<String> = vec!["nope".into()];
        assert!(matches!(
            TestFunction::bank_from_ids(&bad),
            Err(Error::UnknownTestFunction { .. })
        ));
    }

    #[test]
    fn piecewise_linear_integral_is_simpson_of_trapezoid() {
        // tent function: integral 1/2
        let tent =
            TestFunction::piecewise_linear("tent", vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)])
                .unwrap();
        assert!((tent.exact_integral() - 0.5).abs() < 1e-9);
        assert_eq!(tent.eval(0.25), 0.5);

        assert!(TestFunction::piecewise_linear("bad", vec![(0.1, 0.0), (1.0, 0.0)]).is_err());
        assert!(TestFunction::piecewise_linear("bad", vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn index_density_examples() {
        let all_in = prefix(&[0.0, 0.1, -0.2]);
        let d = index_set_density(&all_in, (-0.5, 0.5)).unwrap();
        assert_eq!(d.final_estimate, 0.0);

        let all_out = prefix(&[2.0, -2.0, 9.0]);
        let d = index_set_density(&all_out, (-0.5, 0.5)).unwrap();
        assert_eq!(d.final_estimate, 1.0);

        // x_k = k at perfect squares, else 0; N = 10^4 leaves J = squares
        let n = 10_000usize;
        let mut values = vec![0.0; n];
        let mut k = 1usize;
        while k * k <= n {
            values[k * k - 1] = (k * k) as f64;
            k += 1;
        }
        let d = index_set_density(&prefix(&values), (-0.5, 0.5)).unwrap();
        assert_eq!(d.final_estimate, 100.0 / 10_000.0);
        assert_eq!(d.counts[n - 1], 100);
        assert_eq!(d.density_at(n), Some(0.01));

        assert!(index_set_density(&all_in, (0.5, -0.5)).is_err());
    }

    #[test]
    fn counts_are_monotone_and_bounded() {
        let p = prefix(&[5.0, 0.0, 5.0, 5.0, 0.1]);
        let d = index_set_density(&p, (-1.0, 1.0)).unwrap();
        for (i, w) in d.counts.windows(2).enumerate() {
            assert!(w[0] <= w[1]);
            assert!(w[1] <= (i + 2) as u64);
        }
    }

    #[test]
    fn ud_verdict_examples() {
        // constant sequence: point mass fails any threshold <= 0.7
        let constant = prefix(&[0.3; 64]);
        let report = ud_verdict(&constant, 0.0, 1.0, 10, 0.5).unwrap();
        assert_eq!(report.verdict, Verdict::Inconsistent);

        // single point: D*_1 >= 1/2
        let single = prefix(&[0.4]);
        let report = ud_verdict(&single, 0.0, 1.0, 2, 0.49).unwrap();
        assert_eq!(report.verdict, Verdict::Inconsistent);

        // evidence shape
        let report = ud_verdict(&prefix(&[0.1, 0.6, 0.9]), 0.0, 1.0, 4, 0.9).unwrap();
        assert_eq!(report.ratio_table.len(), 4);
        assert_eq!(report.n, 3);
        assert_eq!(report.weyl_residuals.len(), 11);
        assert_eq!(report.outside_fraction, 0.0);

        assert!(ud_verdict(&prefix(&[0.5]), 0.0, 1.0, 1, 0.5).is_err());
        assert!(ud_verdict(&prefix(&[0.5]), 0.0, 1.0, 10, 0.0).is_err());
        assert!(ud_verdict(&prefix(&[]), 0.0, 1.0, 10, 0.5).is_err());
    }

    #[test]
    fn ud_verdict_counts_outside_values_against_the_verdict() {
        // half the mass far outside [0, 1]: inconsistent no matter how
        // uniform the inside part looks
        let mut values: Vec<f64> = (1..=32).map(|i| (2 * i - 1) as f64 / 64.0).collect();
        values.extend(std::iter::repeat_n(7.5, 32));
        let report = ud_verdict(&prefix(&values), 0.0, 1.0, 8, 0.25).unwrap();
        assert_eq!(report.outside_fraction, 0.5);
        assert_eq!(report.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn default_threshold_clamps() {
        assert_eq!(default_threshold(16), 0.5);
        assert!((default_threshold(10_000) - 0.03).abs() < 1e-12);
        let huge = default_threshold(usize::MAX);
        assert!((0.01..0.0101).contains(&huge));
    }
}
