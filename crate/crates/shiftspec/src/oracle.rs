//! Independent truncation-based numerical checks: power norms,
//! eigenvector and adjoint-kernel residuals, the local-resolvent
//! coefficient recurrence, contour-quadrature reconstruction, and a
//! seeded random harness for the radius-chain invariants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::VectorSpec;
use crate::radii::{compute_radii, RadiiOptions};
use crate::weights::{build_beta, BetaCache, Side, Structure, WeightSequence};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("horizon too small: need {need}, have {have}")]
    InsufficientHorizon { need: usize, have: usize },
    #[error("series diverged: squared partial sums exceeded 1e12 at term {at}")]
    SeriesDiverged { at: i64 },
    #[error("lambda must be nonzero")]
    LambdaZero,
    #[error("operation requires a bilateral sequence")]
    NotBilateral,
    #[error("operation requires a unilateral sequence")]
    NotUnilateral,
    #[error("contour radius {radius} is not outside the r3 estimate {r3}")]
    RadiusInsideSpectrum { radius: f64, r3: f64 },
    #[error("vector must be finitely supported")]
    NotFinitelySupported,
    #[error("nodes must be a power of two >= 64, got {0}")]
    BadNodeCount(usize),
    #[error(transparent)]
    Weight(#[from] crate::weights::WeightError),
    #[error("radii computation failed: {0}")]
    Radii(String),
}

// ---------------------------------------------------------------------------
// Power norms
// ---------------------------------------------------------------------------

/// log ||S^n x|| for n = 0..=n_max, plus the running estimates
/// ||S^n x||^(1/n) whose limsup estimates the local spectral radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerNorms {
    pub log_norms: Vec<f64>,
    pub root_estimates: Vec<f64>,
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + s.ln()
}

/// Support of x clipped to the indices the cache can serve for powers
/// up to n_max.
fn support_within(beta: &BetaCache, x: &VectorSpec, n_max: usize) -> Result<Vec<i64>, OracleError> {
    let lo = -(beta.nminus as i64);
    let hi = beta.nplus as i64 - n_max as i64;
    match x {
        VectorSpec::Explicit { start, coeffs } => {
            let end = start + coeffs.len() as i64 - 1;
            if *start < lo || end > hi {
                return Err(OracleError::InsufficientHorizon {
                    need: (end + n_max as i64).unsigned_abs() as usize,
                    have: beta.nplus,
                });
            }
            Ok((*start..=end).filter(|&n| x.coeff(n) != 0.0).collect())
        }
        VectorSpec::GeometricDecay { .. } => {
            if hi < lo {
                return Err(OracleError::InsufficientHorizon {
                    need: n_max,
                    have: beta.nplus,
                });
            }
            Ok((lo..=hi).collect())
        }
    }
}

/// Exact (up to rounding) norms of S^n x via the diagonal action:
/// ||S^n x||^2 = sum_k |a_k|^2 (beta_{n+k}/beta_k)^2.
pub fn power_norms(beta: &BetaCache, x: &VectorSpec, n_max: usize) -> Result<PowerNorms, OracleError> {
    let support = support_within(beta, x, n_max)?;
    let mut log_norms = Vec::with_capacity(n_max + 1);
    let mut root_estimates = Vec::with_capacity(n_max + 1);
    let mut terms = Vec::with_capacity(support.len());
    for n in 0..=n_max {
        terms.clear();
        for &k in &support {
            let a = x.coeff(k);
            let lb_k = beta.logbeta(k);
            let lb_nk = beta.logbeta(k + n as i64);
            if lb_k == f64::NEG_INFINITY {
                continue; // basis direction already annihilated
            }
            terms.push(2.0 * (a.abs().ln() + lb_nk - lb_k));
        }
        let log_norm = 0.5 * log_sum_exp(&terms);
        log_norms.push(log_norm);
        root_estimates.push(if n == 0 {
            f64::NAN
        } else {
            (log_norm / n as f64).exp()
        });
    }
    Ok(PowerNorms {
        log_norms,
        root_estimates,
    })
}

// ---------------------------------------------------------------------------
// Eigenvector / adjoint-kernel residuals
// ---------------------------------------------------------------------------

const DIVERGENCE_LOG_THRESHOLD: f64 = 27.631_021_115_928_547; // ln(1e12)

/// Relative residual ||(S - lambda) f_N|| / ||f_N|| of the truncated
/// formal eigenvector f(lambda) = sum_n (beta_n / lambda^n) e_n of a
/// bilateral shift. Interior terms cancel exactly, so the residual is
/// the two boundary terms alone.
pub fn eigenvector_residual(
    beta: &BetaCache,
    lambda: Complex64,
    trunc: usize,
) -> Result<f64, OracleError> {
    if beta.side != Side::Bilateral {
        return Err(OracleError::NotBilateral);
    }
    if lambda.norm() == 0.0 {
        return Err(OracleError::LambdaZero);
    }
    if trunc > beta.nplus.min(beta.nminus).saturating_sub(1) {
        return Err(OracleError::InsufficientHorizon {
            need: trunc + 1,
            have: beta.nplus.min(beta.nminus),
        });
    }
    let log_l = lambda.norm().ln();
    let n = trunc as i64;
    // squared coefficient magnitudes, watched for divergence
    let mut terms = Vec::with_capacity(2 * trunc + 1);
    let mut running = f64::NEG_INFINITY;
    for m in -n..=n {
        let t = 2.0 * (beta.logbeta(m) - m as f64 * log_l);
        terms.push(t);
        running = log_sum_exp(&[running, t]);
        if running > DIVERGENCE_LOG_THRESHOLD {
            return Err(OracleError::SeriesDiverged { at: m });
        }
    }
    let log_norm2 = log_sum_exp(&terms);
    // boundary terms of (S - lambda) f: beta_{N+1}/lambda^N at the top,
    // beta_{-N} lambda^{1-N}... i.e. beta_{-N} lambda^{-N+1} at the bottom
    let top = 2.0 * (beta.logbeta(n + 1) - n as f64 * log_l);
    let bottom = 2.0 * (beta.logbeta(-n) + (1 - n) as f64 * log_l);
    let log_res2 = log_sum_exp(&[top, bottom]);
    Ok((0.5 * (log_res2 - log_norm2)).exp())
}

/// Relative residual of the truncated adjoint-kernel series
/// k(lambda) = sum_n (lambda^n / beta_n) e_n, which the adjoint kills:
/// (S - lambda)* k(conj lambda) = 0.
pub fn adjoint_kernel_residual(
    beta: &BetaCache,
    lambda: Complex64,
    trunc: usize,
) -> Result<f64, OracleError> {
    let l = lambda.norm();
    let n = trunc as i64;
    match beta.side {
        Side::Unilateral => {
            if trunc + 1 > beta.nplus {
                return Err(OracleError::InsufficientHorizon {
                    need: trunc + 1,
                    have: beta.nplus,
                });
            }
            if l == 0.0 {
                return Ok(0.0); // k(0) = e_0 exactly
            }
            let log_l = l.ln();
            let mut terms = Vec::with_capacity(trunc + 1);
            let mut running = f64::NEG_INFINITY;
            for m in 0..=n {
                let t = 2.0 * (m as f64 * log_l - beta.logbeta(m));
                terms.push(t);
                running = log_sum_exp(&[running, t]);
                if running > DIVERGENCE_LOG_THRESHOLD {
                    return Err(OracleError::SeriesDiverged { at: m });
                }
            }
            let log_norm2 = log_sum_exp(&terms);
            // single boundary term lambda^{N+1}/beta_N
            let log_res2 = 2.0 * ((n + 1) as f64 * log_l - beta.logbeta(n));
            Ok((0.5 * (log_res2 - log_norm2)).exp())
        }
        Side::Bilateral => {
            if lambda.norm() == 0.0 {
                return Err(OracleError::LambdaZero);
            }
            if trunc + 1 > beta.nplus.min(beta.nminus) {
                return Err(OracleError::InsufficientHorizon {
                    need: trunc + 1,
                    have: beta.nplus.min(beta.nminus),
                });
            }
            let log_l = l.ln();
            let mut terms = Vec::with_capacity(2 * trunc + 1);
            let mut running = f64::NEG_INFINITY;
            for m in -n..=n {
                let t = 2.0 * (m as f64 * log_l - beta.logbeta(m));
                terms.push(t);
                running = log_sum_exp(&[running, t]);
                if running > DIVERGENCE_LOG_THRESHOLD {
                    return Err(OracleError::SeriesDiverged { at: m });
                }
            }
            let log_norm2 = log_sum_exp(&terms);
            let top = 2.0 * ((n + 1) as f64 * log_l - beta.logbeta(n));
            let bottom = 2.0 * (-(n as f64) * log_l - beta.logbeta(-n - 1));
            let log_res2 = log_sum_exp(&[top, bottom]);
            Ok((0.5 * (log_res2 - log_norm2)).exp())
        }
    }
}

// ---------------------------------------------------------------------------
// Local-resolvent recurrence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InLocalResolvent,
    InLocalSpectrum,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub lambda: (f64, f64),
    pub decision: Membership,
    /// max and min of log10 |A_n| over the tail window (last 20%).
    pub tail_log10_max: f64,
    pub tail_log10_min: f64,
}

/// Decide whether lambda lies in the local resolvent set of x by the
/// coefficient recurrence: the candidate analytic solution of
/// (S - lambda) f = x has coefficients with the closed form
/// A_n(lambda) = -(beta_n / lambda^(n+1)) B_n(lambda), where
/// B_n = sum_{j <= n} (a_j / beta_j) lambda^j.
///
/// |A_n| -> 0 fast enough means the solution exists near lambda
/// (InLocalResolvent); |A_n| bounded below or growing on a tail window
/// means it cannot (InLocalSpectrum). Boundary points are expected to
/// come back Inconclusive. The evidence ratio between the two calls is
/// 10^3.
pub fn resolvent_recurrence(
    beta: &BetaCache,
    x: &VectorSpec,
    lambda: Complex64,
    n_max: usize,
) -> Result<MembershipVerdict, OracleError> {
    if lambda.norm() == 0.0 {
        return Err(OracleError::LambdaZero);
    }
    let VectorSpec::Explicit { start, coeffs } = x else {
        return Err(OracleError::NotFinitelySupported);
    };
    let first = *start;
    let last = first + coeffs.len() as i64 - 1;
    if last + n_max as i64 > beta.nplus as i64 || first < -(beta.nminus as i64) {
        return Err(OracleError::InsufficientHorizon {
            need: n_max,
            have: beta.nplus,
        });
    }
    let log_l = lambda.norm().ln();
    let phase = lambda / lambda.norm();

    // B_n accumulated in scaled form: value = b * exp(log_scale)
    let mut b = Complex64::new(0.0, 0.0);
    let mut log_scale = 0.0f64;
    let mut log_abs_a: Vec<f64> = Vec::with_capacity(n_max + 1);
    let base = first.max(-(beta.nminus as i64));
    let mut n = base;
    let n_end = base + n_max as i64;
    while n <= n_end {
        let a_n = x.coeff(n);
        if a_n != 0.0 {
            // term (a_n / beta_n) lambda^n in the same scaled form
            let log_term = a_n.abs().ln() - beta.logbeta(n) + n as f64 * log_l;
            let term_phase = phase.powi(n as i32) * a_n.signum();
            let delta = log_term - log_scale;
            if delta > 0.0 {
                b = b * (-delta).exp() + term_phase;
                log_scale = log_term;
            } else {
                b += term_phase * delta.exp();
            }
            // renormalize to keep |b| near 1
            if b.norm() > 1e100 || (b.norm() > 0.0 && b.norm() < 1e-100) {
                log_scale += b.norm().ln();
                b /= b.norm();
            }
        }
        // log |A_n| = logbeta(n) - (n+1) log|lambda| + log|B_n|
        let log_b = if b.norm() == 0.0 {
            f64::NEG_INFINITY
        } else {
            log_scale + b.norm().ln()
        };
        log_abs_a.push(beta.logbeta(n) - (n + 1) as f64 * log_l + log_b);
        n += 1;
    }

    let tail_from = log_abs_a.len() - (log_abs_a.len() / 5).max(1);
    let tail = &log_abs_a[tail_from..];
    let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let evidence = 1000.0f64.ln();

    let decision = if tail_max <= -evidence {
        Membership::InLocalResolvent
    } else if tail_min >= evidence {
        Membership::InLocalSpectrum
    } else {
        Membership::Inconclusive
    };
    let l10 = std::f64::consts::LN_10;
    Ok(MembershipVerdict {
        lambda: (lambda.re, lambda.im),
        decision,
        tail_log10_max: tail_max / l10,
        tail_log10_min: tail_min / l10,
    })
}

// ---------------------------------------------------------------------------
// Contour reconstruction
// ---------------------------------------------------------------------------

/// A concrete vector produced by the quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedVector {
    pub start: i64,
    pub values: Vec<(f64, f64)>,
}

/// Reconstruct a finitely supported x through the local functional
/// calculus on a circle of the given radius enclosing the local
/// spectrum: x = (-1/2 pi i) * contour integral of f(lambda)
/// e0-resolvent(lambda), evaluated by the trapezoidal rule, which is an
/// exact discrete Fourier sum for the polynomial f(lambda) =
/// sum (a_n / beta_n) lambda^n. Returns the vector and its l2 distance
/// to x.
pub fn contour_reconstruct(
    beta: &BetaCache,
    x: &VectorSpec,
    radius: f64,
    nodes: usize,
) -> Result<(TruncatedVector, f64), OracleError> {
    let VectorSpec::Explicit { start, coeffs } = x else {
        return Err(OracleError::NotFinitelySupported);
    };
    if beta.side != Side::Unilateral {
        return Err(OracleError::NotUnilateral);
    }
    if nodes < 64 || !nodes.is_power_of_two() {
        return Err(OracleError::BadNodeCount(nodes));
    }
    let (r3, _) = crate::radii::estimate_r2_r3(beta, crate::radii::SideSign::Plus)
        .map(|(r2, r3)| (r3, r2))
        .map_err(|e| OracleError::Radii(e.to_string()))?;
    if radius <= r3.value {
        return Err(OracleError::RadiusInsideSpectrum {
            radius,
            r3: r3.value,
        });
    }

    let top = (*start + coeffs.len() as i64 - 1).max(0) as usize;
    let out_len = (top + 8).min(beta.nplus);
    let mut values = vec![Complex64::new(0.0, 0.0); out_len + 1];
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let lambda = Complex64::from_polar(radius, theta);
        // f(lambda) = sum_k (a_k / beta_k) lambda^k
        let mut f = Complex64::new(0.0, 0.0);
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let k = start + i as i64;
            let c = a / beta.beta(k);
            f += c * lambda.powi(k as i32);
        }
        // node weight for the contour: (2 pi i / M) lambda; combined
        // with the -1/(2 pi i) prefactor and the -beta_n lambda^{-n-1}
        // coefficient of the e0-resolvent this leaves
        // (beta_n / M) f(lambda) lambda^{-n}
        for (n, slot) in values.iter_mut().enumerate() {
            *slot += f * lambda.powi(-(n as i32)) * beta.beta(n as i64) / nodes as f64;
        }
    }

    let mut dist2 = 0.0f64;
    for (n, v) in values.iter().enumerate() {
        let target = x.coeff(n as i64);
        dist2 += (v - Complex64::new(target, 0.0)).norm_sqr();
    }
    Ok((
        TruncatedVector {
            start: 0,
            values: values.iter().map(|v| (v.re, v.im)).collect(),
        },
        dist2.sqrt(),
    ))
}

// ---------------------------------------------------------------------------
// Random chain harness
// ---------------------------------------------------------------------------

/// xorshift64* generator (shifts 12/25/27, multiplier
/// 0x2545F4914F6CDD1D); each sample derives its own state from the base
/// seed with a splitmix-style golden-ratio increment so the harness is
/// deterministic regardless of schedule.
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn for_sample(seed: u64, sample: u64) -> Self {
        let mut state = seed
            .wrapping_add(sample.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .max(1);
        // warm up to decorrelate nearby seeds
        for _ in 0..4 {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            state = state.wrapping_mul(0x2545_F491_4F6C_DD1D).max(1);
        }
        XorShift64Star { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state ^= self.state >> 12;
        self.state ^= self.state << 25;
        self.state ^= self.state >> 27;
        self.state.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform weight on [0.1, 3].
    pub fn next_weight(&mut self) -> f64 {
        0.1 + 2.9 * self.next_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheckReport {
    pub passes: usize,
    pub failures: usize,
    /// Worst (most negative) slack margin seen across all inequality
    /// checks, in relative units.
    pub worst_margin: f64,
    /// Sample indices that failed, for reproduction.
    pub failed_samples: Vec<u64>,
}

/// Sample `count` random weight sequences (weights i.i.d. uniform on
/// [0.1, 3]), run the radii pipeline on each, and assert the ordering
/// chain plus the cross-oracle agreements:
/// - lower_bound_m at several powers stays below the r estimate;
/// - the power-norm estimate of the local radius of e_0 agrees with r3
///   within the combined diagnostics.
pub fn random_chain_check(
    seed: u64,
    count: usize,
    horizon: usize,
    side: Side,
) -> ChainCheckReport {
    let mut passes = 0usize;
    let mut failures = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut failed_samples = Vec::new();

    for sample in 0..count as u64 {
        let mut rng = XorShift64Star::for_sample(seed, sample);
        let (nminus, nplus) = match side {
            Side::Unilateral => (0usize, horizon),
            Side::Bilateral => (horizon, horizon),
        };
        let total = nminus + nplus;
        let values: Vec<f64> = (0..total).map(|_| rng.next_weight()).collect();
        let tail = rng.next_weight();
        let w = WeightSequence::new(
            side,
            Structure::Explicit {
                start: -(nminus as i64),
                values,
                tail,
            },
            3.0,
        )
        .expect("random weights are valid");

        let mut ok = true;
        let mut margin = f64::INFINITY;
        match compute_radii(&w, &RadiiOptions::new((nminus, nplus))) {
            Ok(report) => {
                ok &= report.chain_ok;
                if side == Side::Bilateral {
                    let ms = report.minus.as_ref().unwrap();
                    // combination identities on the same cache
                    let d1 = (report.r1.value - report.plus.r1.value.min(ms.r1.value)).abs();
                    let d2 = (report.r.value - report.plus.r.value.max(ms.r.value)).abs();
                    ok &= d1 <= 1e-12 && d2 <= 1e-12;
                }
                let beta = build_beta(&w, (nminus, nplus)).expect("valid horizon");
                // lower_bound_m at higher powers vs the r upper bound
                for n in [1usize, 4, 8] {
                    if let Ok(mn) = crate::radii::lower_bound_m(&beta, n) {
                        let mn_root = mn.powf(1.0 / n as f64);
                        let slack = 1e-9 + 3.0 * report.r.effective_spread();
                        let m = report.r.value * (1.0 + slack) - mn_root;
                        margin = margin.min(m / report.r.value.max(1.0));
                        ok &= m >= 0.0;
                    }
                }
                // local radius of e_0 vs r3: ||S^n e_0|| = beta_n, so
                // the tail-window limsup through the power-norm oracle
                // must reproduce the r3 estimator to rounding accuracy
                let x = VectorSpec::basis_vector(0);
                if let Ok(norms) = power_norms(&beta, &x, nplus) {
                    let est = norms
                        .root_estimates
                        .iter()
                        .skip(nplus.div_ceil(2))
                        .cloned()
                        .fold(0.0f64, f64::max);
                    let r3 = &report.plus.r3;
                    let tol = 1e-9;
                    let rel = (est - r3.value).abs() / r3.value.max(1.0);
                    margin = margin.min(tol - rel);
                    ok &= rel <= tol;
                }
            }
            Err(_) => ok = false,
        }
        if ok {
            passes += 1;
        } else {
            failures += 1;
            failed_samples.push(sample);
        }
        worst_margin = worst_margin.min(margin);
    }

    ChainCheckReport {
        passes,
        failures,
        worst_margin,
        failed_samples,
    }
}
