//! Spectral radius estimators: liminf/limsup of beta_n^(1/n), the
//! sup/inf-ratio limits, the numerical radius via a tridiagonal
//! eigenproblem, and the assembled per-operator radii report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weights::{build_beta, BetaCache, Side, Structure, WeightError, WeightSequence};

/// Why a radius value is exact rather than a finite-horizon estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactReason {
    PeriodicGeometricMean,
    Constant,
    QuasiNilpotentStructural,
    RegistryAnnotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exactness {
    Exact { reason: ExactReason },
    Estimated,
}

/// Convergence bookkeeping attached to every estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Horizon (largest index) the estimator consumed.
    pub horizon: usize,
    /// max - min of the running estimates over the final 10% of the
    /// horizon; 0 for exact values.
    pub spread: f64,
    /// Whether the running estimates were monotone over that window.
    pub monotone: bool,
}

impl Diagnostic {
    pub fn exact(horizon: usize) -> Self {
        Diagnostic {
            horizon,
            spread: 0.0,
            monotone: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub exactness: Exactness,
    pub diagnostic: Diagnostic,
}

impl RadiusEstimate {
    pub fn exact(value: f64, reason: ExactReason, horizon: usize) -> Self {
        RadiusEstimate {
            value,
            exactness: Exactness::Exact { reason },
            diagnostic: Diagnostic::exact(horizon),
        }
    }

    pub fn estimated(value: f64, diagnostic: Diagnostic) -> Self {
        RadiusEstimate {
            value,
            exactness: Exactness::Estimated,
            diagnostic,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.exactness, Exactness::Exact { .. })
    }

    /// Spread used by equality predicates; exact values contribute 0.
    pub fn effective_spread(&self) -> f64 {
        if self.is_exact() {
            0.0
        } else {
            self.diagnostic.spread
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSign {
    Plus,
    Minus,
}

#[derive(Debug, Error, PartialEq)]
pub enum RadiiError {
    #[error("horizon {have} too small on the requested side; need at least {need}")]
    InsufficientHorizon { need: usize, have: usize },
    #[error("truncation size {0} too small for the eigenvalue routine")]
    TruncationTooSmall(usize),
    #[error("numerical radius did not converge: last doubling moved by {increment:e} (tol {tol:e})")]
    NonConvergence { increment: f64, tol: f64 },
    #[error("structure is not periodic or eventually periodic")]
    NotPeriodic,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Three-valued comparison of two radius estimates under the shared
/// tolerance rule. Estimates with large diagnostic spread refuse to
/// decide rather than fire a spurious inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityResult {
    Equal,
    Unequal,
    Undecidable,
}

/// Relative tolerance for radius-equality predicates.
pub fn equality_tolerance(a: &RadiusEstimate, b: &RadiusEstimate) -> f64 {
    let scale = a.value.abs().max(b.value.abs()).max(1.0);
    let combined = a.effective_spread() + b.effective_spread();
    (3.0 * combined / scale).max(1e-6)
}

/// Compare two radius estimates: Equal within tau, Undecidable within
/// 2*tau, else Unequal. tau scales with the combined diagnostic spread
/// so noisy estimates degrade to Undecidable instead of Unequal.
pub fn radius_eq(a: &RadiusEstimate, b: &RadiusEstimate) -> EqualityResult {
    let scale = a.value.abs().max(b.value.abs()).max(1.0);
    let tau = equality_tolerance(a, b);
    let diff = (a.value - b.value).abs();
    if diff <= tau * scale {
        EqualityResult::Equal
    } else if diff <= 2.0 * tau * scale {
        EqualityResult::Undecidable
    } else {
        EqualityResult::Unequal
    }
}

/// Compare a radius estimate against an exact constant.
pub fn radius_eq_const(a: &RadiusEstimate, c: f64) -> EqualityResult {
    let b = RadiusEstimate::exact(c, ExactReason::Constant, a.diagnostic.horizon);
    radius_eq(a, &b)
}

fn window_stats(estimates: &[(usize, f64)]) -> Diagnostic {
    // estimates: (n, running value); window = final 10% by position
    let horizon = estimates.last().map(|&(n, _)| n).unwrap_or(0);
    let from = estimates.len().saturating_sub((estimates.len() / 10).max(2));
    let window = &estimates[from..];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut monotone_up = true;
    let mut monotone_down = true;
    let mut prev = f64::NAN;
    for &(_, v) in window {
        lo = lo.min(v);
        hi = hi.max(v);
        if !prev.is_nan() {
            if v < prev {
                monotone_up = false;
            }
            if v > prev {
                monotone_down = false;
            }
        }
        prev = v;
    }
    let spread = if window.is_empty() { 0.0 } else { hi - lo };
    Diagnostic {
        horizon,
        spread,
        monotone: monotone_up || monotone_down,
    }
}

/// liminf/limsup estimates of beta_n^(1/n) on the requested side.
///
/// The sequence examined is s_n = exp(logbeta(n)/n) on the plus side
/// and s_n = exp(-logbeta(-n)/n) on the minus side; the estimators are
/// the min/max of s_n over the tail window n in [ceil(h/2), h].
pub fn estimate_r2_r3(
    beta: &BetaCache,
    side_sign: SideSign,
) -> Result<(RadiusEstimate, RadiusEstimate), RadiiError> {
    let h = match side_sign {
        SideSign::Plus => beta.nplus,
        SideSign::Minus => beta.nminus,
    };
    if h < 64 {
        return Err(RadiiError::InsufficientHorizon { need: 64, have: h });
    }

    // Infinitely many zero weights force beta_n = 0 eventually on the
    // plus side; the tail window then sits entirely at -inf and both
    // limits are structurally 0.
    let sn = |n: usize| -> f64 {
        let lb = match side_sign {
            SideSign::Plus => beta.logbeta(n as i64),
            SideSign::Minus => -beta.logbeta(-(n as i64)),
        };
        (lb / n as f64).exp()
    };

    let start = h.div_ceil(2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut run_lo: Vec<(usize, f64)> = Vec::with_capacity(h - start + 1);
    let mut run_hi: Vec<(usize, f64)> = Vec::with_capacity(h - start + 1);
    for n in start..=h {
        let s = sn(n);
        lo = lo.min(s);
        hi = hi.max(s);
        run_lo.push((n, lo));
        run_hi.push((n, hi));
    }

    if hi == 0.0 {
        // every window sample was 0: structurally quasi-nilpotent side
        let e = RadiusEstimate::exact(0.0, ExactReason::QuasiNilpotentStructural, h);
        return Ok((e, e));
    }

    let r2 = RadiusEstimate::estimated(lo, window_stats(&run_lo));
    let r3 = RadiusEstimate::estimated(hi, window_stats(&run_hi));
    Ok((r2, r3))
}

/// Fekete-style estimates of the sup-ratio and inf-ratio limits on one
/// side.
///
/// For each n <= n_max: g(n) = sup_{k <= k_max} (logbeta(n+k) -
/// logbeta(k))/n and h(n) the matching inf. The returned values are
/// exp(min_n g(n)) — a valid upper bound on the limit, by
/// submultiplicativity of the power norms — and exp(max_n h(n)), a
/// valid lower bound. The minus side uses the mirrored ratios
/// beta(-k)/beta(-n-k).
pub fn estimate_r_r1(
    beta: &BetaCache,
    side_sign: SideSign,
    n_max: usize,
    k_max: usize,
) -> Result<(RadiusEstimate, RadiusEstimate), RadiiError> {
    let h = match side_sign {
        SideSign::Plus => beta.nplus,
        SideSign::Minus => beta.nminus,
    };
    if n_max == 0 || n_max + k_max > h {
        return Err(RadiiError::InsufficientHorizon {
            need: n_max + k_max,
            have: h,
        });
    }

    // The ratio beta_{n+k}/beta_k (and its minus-side mirror
    // beta_{-k}/beta_{-n-k}) is the product of n consecutive weights,
    // so both sides reduce to sliding-window products over the
    // direction-ordered weights u_0, u_1, ... . Working on the weights
    // directly keeps zero weights well-defined: a zero in the window
    // makes the product 0 instead of producing -inf minus -inf.
    let total = n_max + k_max;
    let u: Vec<f64> = (0..total)
        .map(|j| match side_sign {
            SideSign::Plus => beta.log_weight(j as i64),
            SideSign::Minus => beta.log_weight(-(j as i64) - 1),
        })
        .collect();

    let mut best_g = f64::INFINITY; // running min over n of g(n)
    let mut best_h = f64::NEG_INFINITY; // running max over n of h(n)
    let mut run_g: Vec<(usize, f64)> = Vec::with_capacity(n_max);
    let mut run_h: Vec<(usize, f64)> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        // slide a window of length n through u, tracking the zero count
        // and the log-sum of the nonzero entries
        let mut zeros = 0usize;
        let mut sum = 0.0f64;
        for &v in &u[..n] {
            if v == f64::NEG_INFINITY {
                zeros += 1;
            } else {
                sum += v;
            }
        }
        let mut sup = f64::NEG_INFINITY;
        let mut inf = f64::INFINITY;
        let eval = |zeros: usize, sum: f64, sup: &mut f64, inf: &mut f64| {
            let v = if zeros > 0 { f64::NEG_INFINITY } else { sum };
            *sup = sup.max(v);
            *inf = inf.min(v);
        };
        eval(zeros, sum, &mut sup, &mut inf);
        for k in 1..=k_max {
            let out = u[k - 1];
            let inn = u[k + n - 1];
            if out == f64::NEG_INFINITY {
                zeros -= 1;
            } else {
                sum -= out;
            }
            if inn == f64::NEG_INFINITY {
                zeros += 1;
            } else {
                sum += inn;
            }
            eval(zeros, sum, &mut sup, &mut inf);
        }
        best_g = best_g.min(sup / n as f64);
        best_h = best_h.max(inf / n as f64);
        run_g.push((n, best_g.exp()));
        run_h.push((n, best_h.exp()));
    }

    let r = RadiusEstimate::estimated(best_g.exp(), window_stats(&run_g));
    let r1 = RadiusEstimate::estimated(best_h.exp(), window_stats(&run_h));
    Ok((r, r1))
}

/// Running liminf/limsup estimates of beta_n^(1/n) over the tail
/// window, for convergence plots: rows (n, running min, running max).
pub fn trace_r2_r3(beta: &BetaCache, side_sign: SideSign) -> Result<Vec<(usize, f64, f64)>, RadiiError> {
    let h = match side_sign {
        SideSign::Plus => beta.nplus,
        SideSign::Minus => beta.nminus,
    };
    if h < 64 {
        return Err(RadiiError::InsufficientHorizon { need: 64, have: h });
    }
    let start = h.div_ceil(2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut rows = Vec::with_capacity(h - start + 1);
    for n in start..=h {
        let lb = match side_sign {
            SideSign::Plus => beta.logbeta(n as i64),
            SideSign::Minus => -beta.logbeta(-(n as i64)),
        };
        let s = (lb / n as f64).exp();
        lo = lo.min(s);
        hi = hi.max(s);
        rows.push((n, lo, hi));
    }
    Ok(rows)
}

/// Running sup-ratio/inf-ratio estimates for convergence plots: rows
/// (n, running r bound, running r1 bound).
pub fn trace_r_r1(
    beta: &BetaCache,
    side_sign: SideSign,
    n_max: usize,
    k_max: usize,
) -> Result<Vec<(usize, f64, f64)>, RadiiError> {
    let h = match side_sign {
        SideSign::Plus => beta.nplus,
        SideSign::Minus => beta.nminus,
    };
    if n_max == 0 || n_max + k_max > h {
        return Err(RadiiError::InsufficientHorizon {
            need: n_max + k_max,
            have: h,
        });
    }
    let total = n_max + k_max;
    let u: Vec<f64> = (0..total)
        .map(|j| match side_sign {
            SideSign::Plus => beta.log_weight(j as i64),
            SideSign::Minus => beta.log_weight(-(j as i64) - 1),
        })
        .collect();
    let mut best_g = f64::INFINITY;
    let mut best_h = f64::NEG_INFINITY;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut zeros = 0usize;
        let mut sum = 0.0f64;
        for &v in &u[..n] {
            if v == f64::NEG_INFINITY {
                zeros += 1;
            } else {
                sum += v;
            }
        }
        let mut sup = if zeros > 0 { f64::NEG_INFINITY } else { sum };
        let mut inf = sup;
        for k in 1..=k_max {
            let out = u[k - 1];
            let inn = u[k + n - 1];
            if out == f64::NEG_INFINITY {
                zeros -= 1;
            } else {
                sum -= out;
            }
            if inn == f64::NEG_INFINITY {
                zeros += 1;
            } else {
                sum += inn;
            }
            let v = if zeros > 0 { f64::NEG_INFINITY } else { sum };
            sup = sup.max(v);
            inf = inf.min(v);
        }
        best_g = best_g.min(sup / n as f64);
        best_h = best_h.max(inf / n as f64);
        rows.push((n, best_g.exp(), best_h.exp()));
    }
    Ok(rows)
}

fn geometric_mean(period: &[f64]) -> f64 {
    let s: f64 = period.iter().map(|p| p.ln()).sum();
    (s / period.len() as f64).exp()
}

/// Exact radii for (eventually) periodic structures: all four limits on
/// a side equal the geometric mean of the (tail) period; a finite
/// prefix affects none of them.
pub struct PeriodicRadii {
    pub plus: Option<f64>,
    pub minus: Option<f64>,
}

pub fn exact_periodic_means(w: &WeightSequence) -> Result<PeriodicRadii, RadiiError> {
    match &w.structure {
        Structure::Periodic { period } => {
            let g = geometric_mean(period);
            Ok(match w.side {
                Side::Unilateral => PeriodicRadii {
                    plus: Some(g),
                    minus: None,
                },
                Side::Bilateral => PeriodicRadii {
                    plus: Some(g),
                    minus: Some(g),
                },
            })
        }
        Structure::EventuallyPeriodic { period, .. } => Ok(PeriodicRadii {
            plus: Some(geometric_mean(period)),
            minus: None,
        }),
        Structure::PiecewisePeriodic {
            minus_period,
            plus_period,
        } => Ok(PeriodicRadii {
            plus: Some(geometric_mean(plus_period)),
            minus: Some(geometric_mean(minus_period)),
        }),
        _ => Err(RadiiError::NotPeriodic),
    }
}

/// Exact radii report for a periodic (or piecewise/eventually periodic)
/// sequence. m, w, norm and q still come from the generic machinery.
pub fn exact_periodic_radii(
    w: &WeightSequence,
    horizon: (usize, usize),
) -> Result<RadiiReport, RadiiError> {
    exact_periodic_means(w)?; // reject non-periodic up front
    compute_radii(w, &RadiiOptions::new(horizon))
}

// ---------------------------------------------------------------------------
// Symmetric tridiagonal largest eigenvalue via Sturm bisection
// ---------------------------------------------------------------------------

/// Number of eigenvalues of the zero-diagonal symmetric tridiagonal
/// matrix with off-diagonals `off` that are strictly less than `x`,
/// counted by the signs of the LDL^T pivots.
fn sturm_count(off: &[f64], x: f64) -> usize {
    let n = off.len() + 1;
    let mut count = 0usize;
    let mut d = -x; // pivot for the 1x1 leading block
    if d < 0.0 {
        count += 1;
    }
    for &b in off {
        // pivot guard: a vanishing pivot is nudged to preserve the count
        let safe = if d.abs() < 1e-300 {
            1e-300_f64.copysign(if d == 0.0 { -1.0 } else { d })
        } else {
            d
        };
        d = -x - b * b / safe;
        if d < 0.0 {
            count += 1;
        }
    }
    debug_assert!(count <= n);
    count
}

/// Largest eigenvalue of the zero-diagonal symmetric tridiagonal matrix
/// with the given off-diagonal entries, to absolute accuracy `tol`.
pub fn tridiagonal_max_eigenvalue(off: &[f64], tol: f64) -> f64 {
    let n = off.len() + 1;
    // Gershgorin bound: |lambda| <= 2 * max |b_i|
    let bmax = off.iter().fold(0.0f64, |m, &b| m.max(b.abs()));
    if bmax == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64; // eigenvalues are symmetric about 0; max >= 0
    let mut hi = 2.0 * bmax;
    // max eigenvalue is the unique x with count(<x) = n-1 .. n boundary
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sturm_count(off, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Numerical radius w(S) of the truncated shift: the largest eigenvalue
/// of the real part, a zero-diagonal tridiagonal matrix with
/// off-diagonals w_i/2. Monotone nondecreasing in `trunc`, so the value
/// is a certified lower bound on w(S); the diagnostic spread records
/// the increment over the last doubling.
pub fn numerical_radius(
    w: &WeightSequence,
    trunc: usize,
    tol: f64,
) -> Result<RadiusEstimate, RadiiError> {
    if trunc < 2 {
        return Err(RadiiError::TruncationTooSmall(trunc));
    }
    let offdiags = |m: usize| -> Vec<f64> {
        match w.side {
            Side::Unilateral => (0..m - 1).map(|i| 0.5 * w.weight(i as i64)).collect(),
            Side::Bilateral => {
                let half = (m / 2) as i64;
                (-half..half).map(|i| 0.5 * w.weight(i)).collect()
            }
        }
    };
    let value = tridiagonal_max_eigenvalue(&offdiags(trunc), tol);
    let prev = tridiagonal_max_eigenvalue(&offdiags((trunc / 2).max(2)), tol);
    let increment = (value - prev).max(0.0);
    if increment > 100.0 * tol {
        return Err(RadiiError::NonConvergence { increment, tol });
    }
    Ok(RadiusEstimate::estimated(
        value,
        Diagnostic {
            horizon: trunc,
            spread: increment,
            monotone: true,
        },
    ))
}

/// inf_k beta_{n+k}/beta_k over the horizon window: the exact lower
/// bound m(S^n) of the truncated operator. The window restriction makes
/// this an upper bound on the true m(S^n).
pub fn lower_bound_m(beta: &BetaCache, n: usize) -> Result<f64, RadiiError> {
    if n < 1 || n > beta.nplus + beta.nminus {
        return Err(RadiiError::InsufficientHorizon {
            need: n.max(1),
            have: beta.nplus + beta.nminus,
        });
    }
    // beta_{k+n}/beta_k is the product of the n weights starting at k;
    // slide the window so zero weights yield 0 instead of -inf - -inf
    let lo = -(beta.nminus as i64);
    let hi = beta.nplus as i64 - n as i64;
    let mut zeros = 0usize;
    let mut sum = 0.0f64;
    for j in lo..lo + n as i64 {
        let v = beta.log_weight(j);
        if v == f64::NEG_INFINITY {
            zeros += 1;
        } else {
            sum += v;
        }
    }
    let mut inf = if zeros > 0 { f64::NEG_INFINITY } else { sum };
    for k in lo + 1..=hi {
        let out = beta.log_weight(k - 1);
        let inn = beta.log_weight(k + n as i64 - 1);
        if out == f64::NEG_INFINITY {
            zeros -= 1;
        } else {
            sum -= out;
        }
        if inn == f64::NEG_INFINITY {
            zeros += 1;
        } else {
            sum += inn;
        }
        let v = if zeros > 0 { f64::NEG_INFINITY } else { sum };
        inf = inf.min(v);
    }
    Ok(inf.exp())
}

// ---------------------------------------------------------------------------
// Assembled report
// ---------------------------------------------------------------------------

/// How invertibility of a bilateral shift was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invertibility {
    NotApplicable,
    StructurallyInvertible,
    PresumedInvertible,
    NotInvertible,
}

impl Invertibility {
    pub fn is_invertible(self) -> bool {
        matches!(
            self,
            Invertibility::StructurallyInvertible | Invertibility::PresumedInvertible
        )
    }
}

/// Radii for one side of a bilateral shift (or the only side of a
/// unilateral one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideRadii {
    pub r1: RadiusEstimate,
    pub r2: RadiusEstimate,
    pub r3: RadiusEstimate,
    pub r: RadiusEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiReport {
    pub side: Side,
    pub m: RadiusEstimate,
    pub w: RadiusEstimate,
    pub norm: RadiusEstimate,
    pub plus: SideRadii,
    /// Present only for bilateral shifts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minus: Option<SideRadii>,
    /// Combined r1 = min over sides, r = max over sides.
    pub r1: RadiusEstimate,
    pub r: RadiusEstimate,
    /// Minimum modulus of the spectrum; 0 when not invertible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<RadiusEstimate>,
    pub invertibility: Invertibility,
    pub chain_ok: bool,
}

/// Estimator configuration for `compute_radii`.
#[derive(Debug, Clone, Copy)]
pub struct RadiiOptions {
    pub horizon: (usize, usize),
    pub n_max: usize,
    pub k_max: usize,
    pub w_trunc: usize,
    pub w_tol: f64,
}

impl RadiiOptions {
    pub fn new(horizon: (usize, usize)) -> Self {
        let h = horizon.0.max(horizon.1);
        let n_max = 64.min(h / 4).max(1);
        RadiiOptions {
            horizon,
            n_max,
            k_max: h.saturating_sub(n_max),
            w_trunc: (2 * h).clamp(64, 4000),
            // truncation increments decay like 1/trunc^2; the
            // convergence check compares against 100*tol, so the
            // default accepts the polynomial-rate cases and reports
            // the actual increment in the diagnostic spread
            w_tol: 1e-4,
        }
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        let h = self.horizon.0.max(self.horizon.1);
        self.k_max = h.saturating_sub(n_max);
        self
    }
}

fn side_radii(
    beta: &BetaCache,
    sign: SideSign,
    opts: &RadiiOptions,
    exact_mean: Option<f64>,
) -> Result<SideRadii, RadiiError> {
    let h = match sign {
        SideSign::Plus => beta.nplus,
        SideSign::Minus => beta.nminus,
    };
    if let Some(g) = exact_mean {
        let e = |v| RadiusEstimate::exact(v, ExactReason::PeriodicGeometricMean, h);
        return Ok(SideRadii {
            r1: e(g),
            r2: e(g),
            r3: e(g),
            r: e(g),
        });
    }
    let (r2, r3) = estimate_r2_r3(beta, sign)?;
    let n_max = opts.n_max.min(h / 2).max(1);
    let k_max = opts.k_max.min(h - n_max);
    let (r, r1) = estimate_r_r1(beta, sign, n_max, k_max)?;
    Ok(SideRadii { r1, r2, r3, r })
}

fn combine_min(a: &RadiusEstimate, b: &RadiusEstimate) -> RadiusEstimate {
    let pick = if a.value <= b.value { a } else { b };
    *pick
}

fn combine_max(a: &RadiusEstimate, b: &RadiusEstimate) -> RadiusEstimate {
    let pick = if a.value >= b.value { a } else { b };
    *pick
}

/// Reciprocal weight sequence of an invertible bilateral shift, shifted
/// so that the inverse is again a bilateral weighted shift. Radii of
/// the inverse come from running the same estimators on it.
fn reciprocal_sequence(w: &WeightSequence) -> Option<WeightSequence> {
    let recip = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| 1.0 / x).collect() };
    let structure = match &w.structure {
        Structure::Periodic { period } => Structure::Periodic {
            period: recip(period),
        },
        Structure::PiecewisePeriodic {
            minus_period,
            plus_period,
        } => Structure::PiecewisePeriodic {
            // the inverse swaps the roles of the two half-axes
            minus_period: recip(plus_period),
            plus_period: recip(minus_period),
        },
        Structure::Explicit {
            start,
            values,
            tail,
        } => Structure::Explicit {
            start: -(start + values.len() as i64),
            values: {
                let mut v = recip(values);
                v.reverse();
                v
            },
            tail: 1.0 / tail,
        },
        _ => return None,
    };
    let bound = match &structure {
        Structure::Periodic { period } => period.iter().cloned().fold(0.0, f64::max),
        Structure::PiecewisePeriodic {
            minus_period,
            plus_period,
        } => minus_period
            .iter()
            .chain(plus_period.iter())
            .cloned()
            .fold(0.0, f64::max),
        Structure::Explicit { values, tail, .. } => {
            values.iter().cloned().fold(*tail, f64::max)
        }
        _ => unreachable!(),
    };
    WeightSequence::new(Side::Bilateral, structure, bound).ok()
}

/// q(S) = min modulus over the spectrum: 0 when not invertible, else
/// 1/r(S^-1) via the estimators applied to the reciprocal sequence.
fn compute_q(
    w: &WeightSequence,
    invertibility: Invertibility,
    opts: &RadiiOptions,
) -> Result<RadiusEstimate, RadiiError> {
    let h = opts.horizon.0.max(opts.horizon.1);
    if !invertibility.is_invertible() {
        return Ok(RadiusEstimate::exact(
            0.0,
            ExactReason::QuasiNilpotentStructural,
            h,
        ));
    }
    let Some(inv) = reciprocal_sequence(w) else {
        return Ok(RadiusEstimate::estimated(
            0.0,
            Diagnostic {
                horizon: 0,
                spread: f64::INFINITY,
                monotone: false,
            },
        ));
    };
    // exact route when the reciprocal is periodic
    if let Ok(means) = exact_periodic_means(&inv) {
        let g_plus = means.plus.unwrap();
        let g_minus = means.minus.unwrap_or(g_plus);
        let r_inv = g_plus.max(g_minus);
        return Ok(RadiusEstimate::exact(
            1.0 / r_inv,
            ExactReason::PeriodicGeometricMean,
            h,
        ));
    }
    let beta_inv = build_beta(&inv, opts.horizon)?;
    let plus = side_radii(&beta_inv, SideSign::Plus, opts, None)?;
    let minus = side_radii(&beta_inv, SideSign::Minus, opts, None)?;
    let r_inv = combine_max(&plus.r, &minus.r);
    Ok(RadiusEstimate::estimated(
        1.0 / r_inv.value,
        Diagnostic {
            horizon: r_inv.diagnostic.horizon,
            spread: r_inv.diagnostic.spread / (r_inv.value * r_inv.value).max(1e-300),
            monotone: r_inv.diagnostic.monotone,
        },
    ))
}

fn chain_slack(report: &RadiiReport) -> f64 {
    // base machine slack widened by the operands' own uncertainty
    let spreads = [
        report.m.effective_spread(),
        report.r1.effective_spread(),
        report.plus.r2.effective_spread(),
        report.plus.r3.effective_spread(),
        report.r.effective_spread(),
        report.w.effective_spread(),
    ];
    1e-9 + 3.0 * spreads.iter().sum::<f64>()
}

/// Full radii computation for a weight sequence.
pub fn compute_radii(w: &WeightSequence, opts: &RadiiOptions) -> Result<RadiiReport, RadiiError> {
    let horizon = match w.side {
        Side::Unilateral => (0, opts.horizon.0.max(opts.horizon.1)),
        Side::Bilateral => opts.horizon,
    };
    let beta = build_beta(w, horizon)?;
    let means = exact_periodic_means(w).ok();
    let (mean_plus, mean_minus) = match &means {
        Some(m) => (m.plus, m.minus),
        None => (None, None),
    };

    let plus = side_radii(&beta, SideSign::Plus, opts, mean_plus)?;
    let (minus, r1, r) = match w.side {
        Side::Unilateral => (None, plus.r1, plus.r),
        Side::Bilateral => {
            let ms = side_radii(&beta, SideSign::Minus, opts, mean_minus)?;
            let r1 = combine_min(&plus.r1, &ms.r1);
            let r = combine_max(&plus.r, &ms.r);
            (Some(ms), r1, r)
        }
    };

    // m(S): exact over the truncation window
    let m_val = lower_bound_m(&beta, 1)?;
    let m = RadiusEstimate::estimated(
        m_val,
        Diagnostic {
            horizon: horizon.0.max(horizon.1),
            spread: 0.0,
            monotone: true,
        },
    );

    // a truncation boundary that lands inside a structural feature can
    // leave a large last-doubling increment; doubling the truncation
    // resolves it for anything with a settled tail
    let w_est = {
        let mut trunc = opts.w_trunc;
        loop {
            match numerical_radius(w, trunc, opts.w_tol) {
                Ok(est) => break est,
                Err(RadiiError::NonConvergence { .. }) if trunc < 16_000 => trunc *= 2,
                Err(e) => return Err(e),
            }
        }
    };
    let norm = RadiusEstimate::estimated(
        beta.observed_max,
        Diagnostic {
            horizon: horizon.0.max(horizon.1),
            spread: 0.0,
            monotone: true,
        },
    );

    let invertibility = match w.side {
        Side::Unilateral => Invertibility::NotApplicable,
        Side::Bilateral => {
            if w.structurally_invertible() {
                Invertibility::StructurallyInvertible
            } else if !beta.zero_indices.is_empty() || beta.observed_min == 0.0 {
                Invertibility::NotInvertible
            } else if beta.observed_min > 0.0 && r1.value > 1e-9 {
                Invertibility::PresumedInvertible
            } else {
                Invertibility::NotInvertible
            }
        }
    };

    let q = match w.side {
        Side::Unilateral => None,
        Side::Bilateral => Some(compute_q(w, invertibility, opts)?),
    };

    let mut report = RadiiReport {
        side: w.side,
        m,
        w: w_est,
        norm,
        plus,
        minus,
        r1,
        r,
        q,
        invertibility,
        chain_ok: false,
    };
    report.chain_ok = verify_chain(&report);
    Ok(report)
}

/// Verify the ordering invariants on the computed values, with slack
/// widened by the estimates' own diagnostics.
pub fn verify_chain(report: &RadiiReport) -> bool {
    let s = chain_slack(report);
    let le = |a: f64, b: f64| a <= b + s * a.abs().max(b.abs()).max(1.0);
    let side_ok = |sr: &SideRadii| {
        le(sr.r1.value, sr.r2.value) && le(sr.r2.value, sr.r3.value) && le(sr.r3.value, sr.r.value)
    };
    let mut ok = side_ok(&report.plus);
    if let Some(ms) = &report.minus {
        ok &= side_ok(ms);
        ok &= le(
            report.r1.value,
            report.plus.r1.value.min(ms.r1.value) + 1e-12,
        );
        ok &= le(report.plus.r.value.max(ms.r.value), report.r.value + 1e-12);
    }
    ok &= le(report.m.value, report.r1.value);
    // w is computed on a truncation and is a lower bound on the true
    // numerical radius, so r <= w can fail by the truncation deficit;
    // allow the last-doubling increment as extra slack.
    let w_slack = s + 3.0 * report.w.diagnostic.spread + 2e-3 * report.w.value.max(1.0);
    ok &= report.r.value <= report.w.value + w_slack * report.r.value.max(1.0);
    ok &= le(report.w.value, report.norm.value);
    if let Some(q) = &report.q {
        ok &= le(q.value, report.r.value);
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{named_weight, Side, Structure, WeightSequence};

    fn beta_of(w: &WeightSequence, h: (usize, usize)) -> BetaCache {
        build_beta(w, h).unwrap()
    }

    fn constant(c: f64) -> WeightSequence {
        WeightSequence::new(Side::Unilateral, Structure::Periodic { period: vec![c] }, c).unwrap()
    }

    #[test]
    fn r2_r3_constant_one() {
        let b = beta_of(&constant(1.0), (0, 200));
        let (r2, r3) = estimate_r2_r3(&b, SideSign::Plus).unwrap();
        assert!((r2.value - 1.0).abs() < 1e-12);
        assert!((r3.value - 1.0).abs() < 1e-12);
        assert_eq!(r2.diagnostic.spread, 0.0);
    }

    #[test]
    fn r2_r3_periodic_two_one() {
        let w = named_weight("periodic", &[("p0".into(), 2.0), ("p1".into(), 1.0)]).unwrap();
        let b = beta_of(&w, (0, 2000));
        let (r2, r3) = estimate_r2_r3(&b, SideSign::Plus).unwrap();
        let root2 = std::f64::consts::SQRT_2;
        assert!((r2.value - root2).abs() < 1e-3, "r2 = {}", r2.value);
        assert!((r3.value - root2).abs() < 1e-3, "r3 = {}", r3.value);
    }

    #[test]
    fn r2_r3_gap_collapse() {
        let w = named_weight("ki_gap", &[]).unwrap();
        let b = beta_of(&w, (0, 10_000));
        let (r2, r3) = estimate_r2_r3(&b, SideSign::Plus).unwrap();
        assert!(r2.value <= 0.02, "r2 = {}", r2.value);
        assert!(r3.value >= 0.999, "r3 = {}", r3.value);
    }

    #[test]
    fn r2_r3_square_zeros_structural() {
        let w = named_weight("square_zeros", &[]).unwrap();
        let b = beta_of(&w, (0, 500));
        let (r2, r3) = estimate_r2_r3(&b, SideSign::Plus).unwrap();
        assert_eq!(r2.value, 0.0);
        assert_eq!(r3.value, 0.0);
        assert!(r2.is_exact());
        assert!(r3.is_exact());
    }

    #[test]
    fn r_r1_constant() {
        let b = beta_of(&constant(1.5), (0, 512));
        let (r, r1) = estimate_r_r1(&b, SideSign::Plus, 32, 400).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!((r1.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn r_r1_ridge() {
        let w = named_weight("ridge", &[]).unwrap();
        let b = beta_of(&w, (0, 10_000));
        let (r, r1) = estimate_r_r1(&b, SideSign::Plus, 20, 9_980).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "r = {}", r.value);
        assert!(r1.value <= 1.05, "r1 = {}", r1.value);
        assert!(r1.value >= 1.0 - 1e-9, "r1 = {}", r1.value);
    }

    #[test]
    fn r_r1_single_bump() {
        let w = named_weight("s_a", &[("a".into(), 2.0)]).unwrap();
        let b = beta_of(&w, (0, 1024));
        let (r, r1) = estimate_r_r1(&b, SideSign::Plus, 64, 900).unwrap();
        assert!((r.value - 1.0).abs() < 2e-2, "r = {}", r.value);
        assert!((r1.value - 1.0).abs() < 2e-2, "r1 = {}", r1.value);
    }

    #[test]
    fn r_bound_monotone_in_n_max() {
        let w = named_weight("ridge", &[]).unwrap();
        let b = beta_of(&w, (0, 2000));
        let (r_small, r1_small) = estimate_r_r1(&b, SideSign::Plus, 5, 1900).unwrap();
        let (r_large, r1_large) = estimate_r_r1(&b, SideSign::Plus, 40, 1900).unwrap();
        assert!(r_large.value <= r_small.value + 1e-12);
        assert!(r1_large.value >= r1_small.value - 1e-12);
    }

    #[test]
    fn exact_periodic_root_two() {
        let w = named_weight("periodic", &[("p0".into(), 2.0), ("p1".into(), 1.0)]).unwrap();
        let report = exact_periodic_radii(&w, (0, 256)).unwrap();
        let root2 = std::f64::consts::SQRT_2;
        for e in [
            report.plus.r1,
            report.plus.r2,
            report.plus.r3,
            report.plus.r,
        ] {
            assert!((e.value - root2).abs() < 1e-12);
            assert!(e.is_exact());
        }
    }

    #[test]
    fn exact_periodic_bilateral_step() {
        let w = named_weight("hyponormal_step", &[]).unwrap();
        let report = exact_periodic_radii(&w, (256, 256)).unwrap();
        assert!((report.plus.r.value - 2.0).abs() < 1e-12);
        let ms = report.minus.as_ref().unwrap();
        assert!((ms.r.value - 1.0).abs() < 1e-12);
        assert!((report.r1.value - 1.0).abs() < 1e-12);
        assert!((report.r.value - 2.0).abs() < 1e-12);
        assert!((report.q.unwrap().value - 1.0).abs() < 1e-12);
        assert!(report.chain_ok);
    }

    #[test]
    fn numerical_radius_constant_one() {
        // truncated value is cos(pi/(trunc+1)), approaching w = 1
        let w = constant(1.0);
        let est = numerical_radius(&w, 2000, 1e-7).unwrap();
        let expect = (std::f64::consts::PI / 2001.0).cos();
        assert!((est.value - expect).abs() < 1e-7, "w = {}", est.value);
        assert!(est.value < 1.0);
    }

    #[test]
    fn numerical_radius_single_bump() {
        // closed form a^2/(2 sqrt(a^2-1)) for a > sqrt(2)
        let w = named_weight("s_a", &[("a".into(), 2.0)]).unwrap();
        let est = numerical_radius(&w, 10_000, 1e-8).unwrap();
        let expect = 2.0 / 3.0f64.sqrt();
        assert!((est.value - expect).abs() < 1e-4, "w = {}", est.value);
    }

    #[test]
    fn numerical_radius_single_bump_small_a() {
        let w = named_weight("s_a", &[("a".into(), 1.2)]).unwrap();
        let est = numerical_radius(&w, 10_000, 1e-8).unwrap();
        assert!((est.value - 1.0).abs() < 1e-4, "w = {}", est.value);
    }

    #[test]
    fn numerical_radius_monotone_in_trunc() {
        let w = named_weight("ridge", &[]).unwrap();
        let a = tridiagonal_max_eigenvalue(
            &(0..499).map(|i| 0.5 * w.weight(i)).collect::<Vec<_>>(),
            1e-10,
        );
        let b = tridiagonal_max_eigenvalue(
            &(0..999).map(|i| 0.5 * w.weight(i)).collect::<Vec<_>>(),
            1e-10,
        );
        assert!(b >= a - 1e-9);
    }

    #[test]
    fn lower_bound_m_values() {
        let b = beta_of(&constant(0.7), (0, 300));
        for n in [1usize, 2, 5] {
            let m = lower_bound_m(&b, n).unwrap();
            assert!((m - 0.7f64.powi(n as i32)).abs() < 1e-12);
        }
        let w = named_weight("s_a", &[("a".into(), 2.0)]).unwrap();
        let b = beta_of(&w, (0, 300));
        assert!((lower_bound_m(&b, 1).unwrap() - 1.0).abs() < 1e-12);
        let w = named_weight("ridge", &[]).unwrap();
        let b = beta_of(&w, (0, 10_000));
        assert!((lower_bound_m(&b, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_report_chain_constant() {
        let report = compute_radii(&constant(1.0), &RadiiOptions::new((0, 512))).unwrap();
        assert!(report.chain_ok);
        assert!((report.r.value - 1.0).abs() < 1e-9);
        assert!((report.m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_report_reciprocal_step() {
        let w = named_weight("reciprocal_step", &[]).unwrap();
        let report = compute_radii(&w, &RadiiOptions::new((512, 512))).unwrap();
        assert!(report.chain_ok);
        let ms = report.minus.as_ref().unwrap();
        // r3+ = 1/2, r2- = 2: the SVEP-failure configuration
        assert!((report.plus.r3.value - 0.5).abs() < 1e-9);
        assert!((ms.r2.value - 2.0).abs() < 1e-9);
        assert!(report.invertibility.is_invertible());
        assert!((report.q.unwrap().value - 0.5).abs() < 1e-9);
        assert!((report.r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn equality_predicate_behaviour() {
        let h = 100;
        let a = RadiusEstimate::exact(1.0, ExactReason::Constant, h);
        let b = RadiusEstimate::exact(1.0, ExactReason::Constant, h);
        assert_eq!(radius_eq(&a, &b), EqualityResult::Equal);
        let c = RadiusEstimate::exact(2.0, ExactReason::Constant, h);
        assert_eq!(radius_eq(&a, &c), EqualityResult::Unequal);
        // noisy estimates widen into Undecidable rather than Unequal
        let noisy = RadiusEstimate::estimated(
            1.05,
            Diagnostic {
                horizon: h,
                spread: 0.02,
                monotone: false,
            },
        );
        assert_ne!(radius_eq(&a, &noisy), EqualityResult::Unequal);
    }

    #[test]
    fn sturm_bisection_known_eigenvalue() {
        // uniform off-diagonal b: eigenvalues 2b cos(k pi/(n+1))
        let n = 50;
        let b = 0.5f64;
        let off = vec![b; n - 1];
        let got = tridiagonal_max_eigenvalue(&off, 1e-12);
        let expect = 2.0 * b * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((got - expect).abs() < 1e-10, "got {got}, expect {expect}");
    }

    #[test]
    fn insufficient_horizon_errors() {
        let b = beta_of(&constant(1.0), (0, 32));
        assert!(matches!(
            estimate_r2_r3(&b, SideSign::Plus),
            Err(RadiiError::InsufficientHorizon { .. })
        ));
        assert!(matches!(
            estimate_r_r1(&b, SideSign::Plus, 20, 20),
            Err(RadiiError::InsufficientHorizon { .. })
        ));
    }
}
