//! Weight sequences for unilateral/bilateral shift operators and the
//! associated partial-product sequence, kept in log domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index set of the shift: natural numbers or all integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Unilateral,
    Bilateral,
}

/// Whether the sequence has finitely or infinitely many zero weights.
///
/// Classification branches on this, so structures that cannot certify
/// their zero pattern must say so.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPattern {
    NoZeros,
    FinitelyMany,
    InfinitelyMany,
    Undeclared,
}

/// Closed-form weight families used by the example registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FormulaKind {
    /// Unilateral: first weight `a`, all later weights 1.
    SingleBump { a: f64 },
    /// Unilateral: segment k holds k^2 indices, the first k of them
    /// carry weight 2, the rest weight 1.
    Ridge,
    /// Unilateral: weight 2 everywhere except at n = k_i - 1 where the
    /// weight is 2^(-i*k_i), with k_1 = 1 and k_{i+1} = (i+1)*k_i + 1.
    GapCollapse,
    /// Unilateral: weight 0 at perfect squares, 1 elsewhere.
    SquareZeros,
    /// Bilateral almost-periodic weights exp(phi(n+1) - phi(n)) with
    /// phi(x) = |x| * sin(ln ln ln(|x| + e^3)) / ln(|x| + e).
    OscillatoryDrift,
}

impl FormulaKind {
    pub fn side(&self) -> Side {
        match self {
            FormulaKind::OscillatoryDrift => Side::Bilateral,
            _ => Side::Unilateral,
        }
    }

    fn zero_pattern(&self) -> ZeroPattern {
        match self {
            FormulaKind::SquareZeros => ZeroPattern::InfinitelyMany,
            _ => ZeroPattern::NoZeros,
        }
    }
}

/// How the weights are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Structure {
    /// A finite list starting at `start` (0 for unilateral), a constant
    /// `tail` weight outside the listed window on both ends.
    Explicit {
        #[serde(default)]
        start: i64,
        values: Vec<f64>,
        tail: f64,
    },
    /// `period[n mod k]` for every index n (mathematical modulus).
    Periodic { period: Vec<f64> },
    /// Unilateral: a finite prefix, then periodic.
    EventuallyPeriodic { prefix: Vec<f64>, period: Vec<f64> },
    /// Bilateral: one period for n >= 0, another for n < 0.
    PiecewisePeriodic {
        minus_period: Vec<f64>,
        plus_period: Vec<f64>,
    },
    /// Named closed form.
    Formula(FormulaKind),
}

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: i64, value: f64 },
    #[error("negative-side horizon {nminus} on a unilateral sequence")]
    HorizonMismatch { nminus: usize },
    #[error("unknown construction id `{0}`")]
    UnknownConstruction(String),
    #[error("empty period or value list")]
    EmptyData,
    #[error("structure `{structure}` is not valid for {side:?} sequences")]
    SideMismatch { structure: String, side: Side },
}

const E3: f64 = 20.085_536_923_187_668; // e^3

/// phi for the oscillatory-drift weights. The growth envelope
/// |x|/ln(|x|+e) times a glacially oscillating sine; its increments
/// tend to 0, so the weights tend to 1.
pub fn drift_phi(x: f64) -> f64 {
    let ax = x.abs();
    ax * ((ax + E3).ln().ln().ln()).sin() / (ax + std::f64::consts::E).ln()
}

/// k_i index sequence of the gap-collapse weights: 1, 3, 10, 41, 206, ...
pub fn gap_indices(limit: i64) -> Vec<(i64, i64)> {
    // returns (i, k_i) with k_i <= limit + 1
    let mut out = Vec::new();
    let mut k: i64 = 1;
    let mut i: i64 = 1;
    while k <= limit + 1 {
        out.push((i, k));
        k = (i + 1) * k + 1;
        i += 1;
    }
    out
}

/// Start index of ridge segment k (k >= 1): sum of j^2 for j < k.
fn ridge_segment_start(k: i64) -> i64 {
    (k - 1) * k * (2 * k - 1) / 6
}

/// A weight sequence: side, generator structure, and a declared bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub side: Side,
    pub structure: Structure,
    /// Declared upper bound sup_n w_n. Verified over the horizon by
    /// `build_beta`, which also reports the observed maximum.
    pub bound: f64,
    /// Registry id when the sequence came from a named construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl WeightSequence {
    pub fn new(side: Side, structure: Structure, bound: f64) -> Result<Self, WeightError> {
        let w = WeightSequence {
            side,
            structure,
            bound,
            label: None,
        };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<(), WeightError> {
        let check = |vals: &[f64]| -> Result<(), WeightError> {
            if vals.is_empty() {
                return Err(WeightError::EmptyData);
            }
            for (i, &v) in vals.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(WeightError::NegativeWeight {
                        index: i as i64,
                        value: v,
                    });
                }
            }
            Ok(())
        };
        match &self.structure {
            Structure::Explicit { values, tail, .. } => {
                check(values)?;
                check(std::slice::from_ref(tail))?;
            }
            Structure::Periodic { period } => check(period)?,
            Structure::EventuallyPeriodic { prefix, period } => {
                if self.side != Side::Unilateral {
                    return Err(WeightError::SideMismatch {
                        structure: "eventually_periodic".into(),
                        side: self.side,
                    });
                }
                if !prefix.is_empty() {
                    check(prefix)?;
                }
                check(period)?;
            }
            Structure::PiecewisePeriodic {
                minus_period,
                plus_period,
            } => {
                if self.side != Side::Bilateral {
                    return Err(WeightError::SideMismatch {
                        structure: "piecewise_periodic".into(),
                        side: self.side,
                    });
                }
                check(minus_period)?;
                check(plus_period)?;
            }
            Structure::Formula(kind) => {
                if kind.side() != self.side {
                    return Err(WeightError::SideMismatch {
                        structure: format!("{kind:?}"),
                        side: self.side,
                    });
                }
            }
        }
        Ok(())
    }

    /// Natural log of the weight at index `n`; -inf for a zero weight.
    ///
    /// The log is the primary representation: the gap-collapse weights
    /// reach 2^(-60620) inside a 10^4 horizon, far below f64 range.
    pub fn log_weight(&self, n: i64) -> f64 {
        assert!(
            self.side == Side::Bilateral || n >= 0,
            "negative index {n} on a unilateral weight sequence"
        );
        match &self.structure {
            Structure::Explicit {
                start,
                values,
                tail,
            } => {
                let off = n - start;
                if off >= 0 && (off as usize) < values.len() {
                    values[off as usize].ln()
                } else {
                    tail.ln()
                }
            }
            Structure::Periodic { period } => {
                let k = period.len() as i64;
                period[n.rem_euclid(k) as usize].ln()
            }
            Structure::EventuallyPeriodic { prefix, period } => {
                let p = prefix.len() as i64;
                if n < p {
                    prefix[n as usize].ln()
                } else {
                    let k = period.len() as i64;
                    period[((n - p).rem_euclid(k)) as usize].ln()
                }
            }
            Structure::PiecewisePeriodic {
                minus_period,
                plus_period,
            } => {
                if n >= 0 {
                    let k = plus_period.len() as i64;
                    plus_period[(n % k) as usize].ln()
                } else {
                    let k = minus_period.len() as i64;
                    minus_period[n.rem_euclid(k) as usize].ln()
                }
            }
            Structure::Formula(kind) => match kind {
                FormulaKind::SingleBump { a } => {
                    if n == 0 {
                        a.ln()
                    } else {
                        0.0
                    }
                }
                FormulaKind::Ridge => {
                    // locate the segment containing n
                    let mut k = 1i64;
                    while ridge_segment_start(k + 1) <= n {
                        k += 1;
                    }
                    let pos = n - ridge_segment_start(k);
                    if pos < k {
                        std::f64::consts::LN_2
                    } else {
                        0.0
                    }
                }
                FormulaKind::GapCollapse => {
                    for (i, ki) in gap_indices(n + 1) {
                        if ki - 1 == n {
                            return -((i * ki) as f64) * std::f64::consts::LN_2;
                        }
                    }
                    std::f64::consts::LN_2
                }
                FormulaKind::SquareZeros => {
                    let r = (n as f64).sqrt().round() as i64;
                    if r * r == n {
                        f64::NEG_INFINITY
                    } else {
                        0.0
                    }
                }
                FormulaKind::OscillatoryDrift => drift_phi((n + 1) as f64) - drift_phi(n as f64),
            },
        }
    }

    /// The weight itself; may underflow to 0 for extreme formulas, use
    /// `log_weight` for arithmetic.
    pub fn weight(&self, n: i64) -> f64 {
        self.log_weight(n).exp()
    }

    /// Zero pattern certified by the structure.
    pub fn zero_pattern(&self) -> ZeroPattern {
        let count_zeros = |vals: &[f64]| vals.iter().filter(|&&v| v == 0.0).count();
        match &self.structure {
            Structure::Explicit { values, tail, .. } => {
                if *tail == 0.0 {
                    ZeroPattern::InfinitelyMany
                } else if count_zeros(values) > 0 {
                    ZeroPattern::FinitelyMany
                } else {
                    ZeroPattern::NoZeros
                }
            }
            Structure::Periodic { period } => {
                if count_zeros(period) > 0 {
                    ZeroPattern::InfinitelyMany
                } else {
                    ZeroPattern::NoZeros
                }
            }
            Structure::EventuallyPeriodic { prefix, period } => {
                if count_zeros(period) > 0 {
                    ZeroPattern::InfinitelyMany
                } else if count_zeros(prefix) > 0 {
                    ZeroPattern::FinitelyMany
                } else {
                    ZeroPattern::NoZeros
                }
            }
            Structure::PiecewisePeriodic {
                minus_period,
                plus_period,
            } => {
                if count_zeros(minus_period) + count_zeros(plus_period) > 0 {
                    ZeroPattern::InfinitelyMany
                } else {
                    ZeroPattern::NoZeros
                }
            }
            Structure::Formula(kind) => kind.zero_pattern(),
        }
    }

    /// True when the structure alone certifies all weights positive and
    /// bounded away from zero (periodic families with positive entries).
    pub fn structurally_invertible(&self) -> bool {
        if self.side != Side::Bilateral {
            return false;
        }
        match &self.structure {
            Structure::Periodic { period } => period.iter().all(|&v| v > 0.0),
            Structure::PiecewisePeriodic {
                minus_period,
                plus_period,
            } => {
                minus_period.iter().all(|&v| v > 0.0) && plus_period.iter().all(|&v| v > 0.0)
            }
            Structure::Explicit { values, tail, .. } => {
                *tail > 0.0 && values.iter().all(|&v| v > 0.0)
            }
            _ => false,
        }
    }
}

/// Named constructions exposed by the registry. `params` is consulted
/// only where the construction is parametric.
pub fn named_weight(id: &str, params: &[(String, f64)]) -> Result<WeightSequence, WeightError> {
    let get = |key: &str, default: f64| {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or(default)
    };
    let mut w = match id {
        "s_a" => {
            let a = get("a", 2.0);
            WeightSequence::new(
                Side::Unilateral,
                Structure::Formula(FormulaKind::SingleBump { a }),
                a.max(1.0),
            )?
        }
        "periodic" => {
            // period entries arrive as p0, p1, ... ; default (2, 1)
            let mut period: Vec<f64> = Vec::new();
            let mut i = 0;
            loop {
                let key = format!("p{i}");
                match params.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => period.push(*v),
                    None => break,
                }
                i += 1;
            }
            if period.is_empty() {
                period = vec![2.0, 1.0];
            }
            let bound = period.iter().cloned().fold(0.0, f64::max);
            WeightSequence::new(Side::Unilateral, Structure::Periodic { period }, bound)?
        }
        "hyponormal_step" => WeightSequence::new(
            Side::Bilateral,
            Structure::PiecewisePeriodic {
                minus_period: vec![1.0],
                plus_period: vec![2.0],
            },
            2.0,
        )?,
        "reciprocal_step" => WeightSequence::new(
            Side::Bilateral,
            Structure::PiecewisePeriodic {
                minus_period: vec![2.0],
                plus_period: vec![0.5],
            },
            2.0,
        )?,
        "atzmon" => WeightSequence::new(
            Side::Bilateral,
            Structure::Formula(FormulaKind::OscillatoryDrift),
            1.5,
        )?,
        "ridge" => WeightSequence::new(
            Side::Unilateral,
            Structure::Formula(FormulaKind::Ridge),
            2.0,
        )?,
        "ki_gap" => WeightSequence::new(
            Side::Unilateral,
            Structure::Formula(FormulaKind::GapCollapse),
            2.0,
        )?,
        "square_zeros" => WeightSequence::new(
            Side::Unilateral,
            Structure::Formula(FormulaKind::SquareZeros),
            1.0,
        )?,
        other => return Err(WeightError::UnknownConstruction(other.to_string())),
    };
    w.label = Some(id.to_string());
    Ok(w)
}

/// Log-domain cache of the partial products beta_n over a horizon.
///
/// beta_0 = 1; beta_n = w_0 ... w_{n-1} for n > 0; and on the bilateral
/// negative side beta_n = 1/(w_n ... w_{-1}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCache {
    pub side: Side,
    pub nminus: usize,
    pub nplus: usize,
    /// log beta_n for n in [-nminus, nplus]; slot (n + nminus).
    logbeta: Vec<f64>,
    /// log w_n for n in [-nminus, nplus - 1] (the weights actually used).
    logw: Vec<f64>,
    /// Indices with w_n = 0, sorted.
    pub zero_indices: Vec<i64>,
    /// Largest weight seen over the horizon.
    pub observed_max: f64,
    /// Smallest weight seen over the horizon.
    pub observed_min: f64,
    /// Whether the declared bound held over the horizon.
    pub bound_respected: bool,
}

impl BetaCache {
    pub fn logbeta(&self, n: i64) -> f64 {
        let idx = n + self.nminus as i64;
        assert!(
            idx >= 0 && (idx as usize) < self.logbeta.len(),
            "index {n} outside beta horizon [{}, {}]",
            -(self.nminus as i64),
            self.nplus
        );
        self.logbeta[idx as usize]
    }

    pub fn beta(&self, n: i64) -> f64 {
        self.logbeta(n).exp()
    }

    pub fn log_weight(&self, n: i64) -> f64 {
        let idx = n + self.nminus as i64;
        assert!(
            idx >= 0 && (idx as usize) < self.logw.len(),
            "weight index {n} outside horizon"
        );
        self.logw[idx as usize]
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= -(self.nminus as i64) && n <= self.nplus as i64
    }
}

/// Accumulate log beta over the horizon, sequentially outward from 0 so
/// the result is bit-reproducible and agrees with any smaller horizon.
pub fn build_beta(
    w: &WeightSequence,
    horizon: (usize, usize),
) -> Result<BetaCache, WeightError> {
    let (nminus, nplus) = horizon;
    if w.side == Side::Unilateral && nminus > 0 {
        return Err(WeightError::HorizonMismatch { nminus });
    }
    let total = nminus + nplus + 1;
    let mut logbeta = vec![0.0f64; total];
    let mut logw = vec![0.0f64; total.max(1) - 1 + 1];
    logw.truncate(total.saturating_sub(1) + if nminus + nplus > 0 { 1 } else { 0 });
    // weights needed: indices -nminus .. nplus-1
    let mut logw_vec = vec![0.0f64; nminus + nplus];
    let mut zero_indices = Vec::new();
    let mut observed_max = f64::NEG_INFINITY;
    let mut observed_min = f64::INFINITY;

    let mut record = |n: i64, lw: f64| -> Result<(), WeightError> {
        if lw.is_nan() {
            return Err(WeightError::NegativeWeight {
                index: n,
                value: f64::NAN,
            });
        }
        let wv = lw.exp();
        if wv > observed_max {
            observed_max = wv;
        }
        if wv < observed_min {
            observed_min = wv;
        }
        if lw == f64::NEG_INFINITY {
            zero_indices.push(n);
        }
        Ok(())
    };

    // positive direction: logbeta(n+1) = logbeta(n) + log w_n
    let mut acc = 0.0f64;
    for n in 0..nplus as i64 {
        let lw = w.log_weight(n);
        record(n, lw)?;
        logw_vec[(n + nminus as i64) as usize] = lw;
        acc += lw;
        logbeta[(n + 1 + nminus as i64) as usize] = acc;
    }
    // negative direction: logbeta(n) = logbeta(n+1) - log w_n, n < 0.
    // A zero weight below 0 makes beta_n infinite there.
    let mut acc = 0.0f64;
    for n in (-(nminus as i64)..0).rev() {
        let lw = w.log_weight(n);
        record(n, lw)?;
        logw_vec[(n + nminus as i64) as usize] = lw;
        acc -= lw;
        logbeta[(n + nminus as i64) as usize] = acc;
    }
    zero_indices.sort_unstable();

    if nminus + nplus == 0 {
        observed_max = 0.0;
        observed_min = 0.0;
    }

    Ok(BetaCache {
        side: w.side,
        nminus,
        nplus,
        logbeta,
        logw: logw_vec,
        zero_indices,
        observed_max,
        observed_min,
        bound_respected: observed_max <= w.bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(c: f64, side: Side) -> WeightSequence {
        WeightSequence::new(side, Structure::Periodic { period: vec![c] }, c).unwrap()
    }

    #[test]
    fn constant_one_beta() {
        let w = constant(1.0, Side::Unilateral);
        let b = build_beta(&w, (0, 5)).unwrap();
        for n in 0..=5 {
            assert_eq!(b.logbeta(n), 0.0);
        }
    }

    #[test]
    fn periodic_two_one_beta() {
        let w = WeightSequence::new(
            Side::Unilateral,
            Structure::Periodic {
                period: vec![2.0, 1.0],
            },
            2.0,
        )
        .unwrap();
        let b = build_beta(&w, (0, 4)).unwrap();
        let expect = [1.0, 2.0, 2.0, 4.0, 4.0];
        for (n, e) in expect.iter().enumerate() {
            assert!((b.beta(n as i64) - e).abs() < 1e-12, "beta_{n}");
        }
    }

    #[test]
    fn bilateral_step_beta() {
        // w_n = 2 for n >= 0, 1 for n < 0
        let w = named_weight("hyponormal_step", &[]).unwrap();
        let b = build_beta(&w, (3, 3)).unwrap();
        let expect = [1.0, 1.0, 1.0, 1.0, 2.0, 4.0, 8.0];
        for (i, e) in expect.iter().enumerate() {
            let n = i as i64 - 3;
            assert!((b.beta(n) - e).abs() < 1e-12, "beta_{n} = {}", b.beta(n));
        }
    }

    #[test]
    fn unilateral_rejects_negative_horizon() {
        let w = constant(1.0, Side::Unilateral);
        assert_eq!(
            build_beta(&w, (2, 4)).unwrap_err(),
            WeightError::HorizonMismatch { nminus: 2 }
        );
    }

    #[test]
    fn negative_weight_rejected() {
        let err = WeightSequence::new(
            Side::Unilateral,
            Structure::Periodic {
                period: vec![1.0, -0.5],
            },
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::NegativeWeight { .. }));
    }

    #[test]
    fn square_zero_indices() {
        let w = named_weight("square_zeros", &[]).unwrap();
        let b = build_beta(&w, (0, 20)).unwrap();
        assert_eq!(b.zero_indices, vec![0, 1, 4, 9, 16]);
        assert_eq!(b.logbeta(2), f64::NEG_INFINITY);
        assert_eq!(w.zero_pattern(), ZeroPattern::InfinitelyMany);
    }

    #[test]
    fn gap_collapse_beta_checkpoints() {
        // beta_{k_i - 1} = 1 and beta_{k_i} = 2^{-i k_i}
        let w = named_weight("ki_gap", &[]).unwrap();
        let b = build_beta(&w, (0, 300)).unwrap();
        for (i, ki) in gap_indices(299) {
            if ki <= 300 {
                assert!(
                    b.logbeta(ki - 1).abs() < 1e-9,
                    "log beta at k_{i}-1 = {}",
                    b.logbeta(ki - 1)
                );
                let expect = -((i * ki) as f64) * std::f64::consts::LN_2;
                assert!((b.logbeta(ki) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ridge_first_segments() {
        let w = named_weight("ridge", &[]).unwrap();
        // C_1 = {0}: w=2; C_2 = {1..4}: 2,2,1,1; C_3 = {5..13}: 2,2,2,1*6
        let expect = [
            2.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0,
        ];
        for (n, e) in expect.iter().enumerate() {
            assert!((w.weight(n as i64) - e).abs() < 1e-12, "weight at {n}");
        }
    }

    #[test]
    fn single_bump_weights() {
        let w = named_weight("s_a", &[("a".into(), 2.0)]).unwrap();
        assert_eq!(w.weight(0), 2.0);
        assert_eq!(w.weight(1), 1.0);
        assert_eq!(w.weight(100), 1.0);
    }

    #[test]
    fn drift_weights_bounded_near_one() {
        let w = named_weight("atzmon", &[]).unwrap();
        let b = build_beta(&w, (5000, 5000)).unwrap();
        assert!(b.bound_respected, "observed max {}", b.observed_max);
        assert!(b.observed_min > 0.4, "observed min {}", b.observed_min);
        assert!(b.observed_max < 1.5, "observed max {}", b.observed_max);
        // increments shrink (like 1/ln n): far-out weights drift to 1
        assert!((w.weight(4999) - 1.0).abs() < 0.1);
        assert!((w.weight(-4999) - 1.0).abs() < 0.1);
    }

    #[test]
    fn rebuild_agrees_on_shared_range() {
        let w = named_weight("ridge", &[]).unwrap();
        let small = build_beta(&w, (0, 100)).unwrap();
        let large = build_beta(&w, (0, 1000)).unwrap();
        for n in 0..=100 {
            assert_eq!(small.logbeta(n), large.logbeta(n));
        }
    }

    #[test]
    fn periodic_geometric_mean_checkpoints() {
        let period: Vec<f64> = vec![3.0, 0.5, 1.25];
        let g: f64 = period.iter().map(|p| p.ln()).sum::<f64>() / 3.0;
        let w = WeightSequence::new(
            Side::Unilateral,
            Structure::Periodic {
                period: period.clone(),
            },
            3.0,
        )
        .unwrap();
        let b = build_beta(&w, (0, 3000)).unwrap();
        for m in 1..1000 {
            let n = 3 * m;
            let err = (b.logbeta(n as i64) - n as f64 * g).abs();
            assert!(err <= 1e-9 * n as f64 + 1e-12, "m={m} err={err}");
        }
    }
}
