//! Spectral regions, four-valued property verdicts, and local-spectrum
//! reports derived from a radii report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radii::{
    radius_eq, radius_eq_const, EqualityResult, ExactReason, RadiiReport, RadiusEstimate,
};
use crate::weights::{BetaCache, Side, WeightSequence, ZeroPattern};

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// Rotationally symmetric subset of the plane. The representation is
/// canonical: construct through `annulus`/`disc`/`circle` so that
/// degenerate annuli collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralRegion {
    Empty,
    Circle {
        rho: f64,
    },
    Disc {
        rho: f64,
        closed_out: bool,
    },
    Annulus {
        rho_in: f64,
        rho_out: f64,
        closed_in: bool,
        closed_out: bool,
    },
    UnionOfTwoCircles {
        rho1: f64,
        rho2: f64,
    },
}

impl SpectralRegion {
    pub fn circle(rho: f64) -> Self {
        if rho == 0.0 {
            // the circle of radius 0 is the single point 0
            SpectralRegion::Disc {
                rho: 0.0,
                closed_out: true,
            }
        } else {
            SpectralRegion::Circle { rho }
        }
    }

    pub fn disc(rho: f64) -> Self {
        SpectralRegion::Disc {
            rho,
            closed_out: true,
        }
    }

    /// Canonicalizing annulus constructor: empty when the bounds cross
    /// or an open edge pinches, circle when they coincide closed, disc
    /// when the inner radius is 0 with a closed inner edge.
    pub fn annulus(rho_in: f64, rho_out: f64, closed_in: bool, closed_out: bool) -> Self {
        if rho_out < rho_in || (rho_in == rho_out && !(closed_in && closed_out)) {
            return SpectralRegion::Empty;
        }
        if rho_in == rho_out {
            return SpectralRegion::circle(rho_in);
        }
        if rho_in == 0.0 && closed_in {
            return SpectralRegion::Disc {
                rho: rho_out,
                closed_out,
            };
        }
        SpectralRegion::Annulus {
            rho_in,
            rho_out,
            closed_in,
            closed_out,
        }
    }

    pub fn two_circles(rho1: f64, rho2: f64) -> Self {
        if rho1 == rho2 {
            return SpectralRegion::circle(rho1);
        }
        let (a, b) = if rho1 <= rho2 { (rho1, rho2) } else { (rho2, rho1) };
        if a == 0.0 {
            // {0} union a circle stays a two-component region
            return SpectralRegion::UnionOfTwoCircles { rho1: a, rho2: b };
        }
        SpectralRegion::UnionOfTwoCircles { rho1: a, rho2: b }
    }

    /// Largest modulus contained in the region, for cross-checks.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            SpectralRegion::Empty => 0.0,
            SpectralRegion::Circle { rho } => rho,
            SpectralRegion::Disc { rho, .. } => rho,
            SpectralRegion::Annulus { rho_out, .. } => rho_out,
            SpectralRegion::UnionOfTwoCircles { rho2, .. } => rho2,
        }
    }
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
    NotApplicable,
}

/// A classification outcome: the status, the rule that fired with the
/// numeric comparison it evaluated, and an optional caveat when the
/// rule is only necessary or only sufficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

impl Verdict {
    fn new(status: Status, basis: impl Into<String>) -> Self {
        Verdict {
            status,
            basis: basis.into(),
            caveat: None,
        }
    }

    fn with_caveat(mut self, caveat: impl Into<String>) -> Self {
        self.caveat = Some(caveat.into());
        self
    }
}

fn cmp_str(name: &str, a: &RadiusEstimate, b: &RadiusEstimate, res: EqualityResult) -> String {
    format!("{name}: {:.6} vs {:.6} -> {res:?}", a.value, b.value)
}

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// Coefficient specification for a vector x = sum a_n e_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VectorSpec {
    /// Finitely many coefficients, the first at index `start`.
    Explicit { start: i64, coeffs: Vec<f64> },
    /// a_n = rho^|n| over all indices within horizon.
    GeometricDecay { rho: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("vector is identically zero")]
    ZeroVector,
    #[error("unilateral vector has coefficients at negative indices")]
    NegativeSupport,
    #[error(
        "local spectra undefined without the single-valued extension property \
         (r2_minus = {r2_minus} > r3_plus = {r3_plus})"
    )]
    SvepViolated { r2_minus: f64, r3_plus: f64 },
    #[error("zero pattern of the weight structure is undeclared")]
    ZeroPatternUndeclared,
}

impl VectorSpec {
    pub fn validate(&self, side: Side) -> Result<(), ClassifyError> {
        match self {
            VectorSpec::Explicit { start, coeffs } => {
                if coeffs.iter().all(|&c| c == 0.0) {
                    return Err(ClassifyError::ZeroVector);
                }
                if side == Side::Unilateral && *start < 0 {
                    return Err(ClassifyError::NegativeSupport);
                }
                Ok(())
            }
            VectorSpec::GeometricDecay { rho } => {
                if *rho <= 0.0 {
                    return Err(ClassifyError::ZeroVector);
                }
                Ok(())
            }
        }
    }

    /// Coefficient at index n (0 outside the declared support).
    pub fn coeff(&self, n: i64) -> f64 {
        match self {
            VectorSpec::Explicit { start, coeffs } => {
                let off = n - start;
                if off >= 0 && (off as usize) < coeffs.len() {
                    coeffs[off as usize]
                } else {
                    0.0
                }
            }
            VectorSpec::GeometricDecay { rho } => rho.powi(n.unsigned_abs() as i32),
        }
    }

    pub fn finitely_supported(&self) -> bool {
        matches!(self, VectorSpec::Explicit { .. })
    }

    pub fn basis_vector(n: i64) -> Self {
        VectorSpec::Explicit {
            start: n,
            coeffs: vec![1.0],
        }
    }
}

// ---------------------------------------------------------------------------
// Spectrum regions
// ---------------------------------------------------------------------------

/// Spectrum of the shift: the closed disc of radius r (unilateral) or
/// the closed annulus between the minimum spectral modulus q and r
/// (bilateral).
pub fn spectrum(report: &RadiiReport) -> SpectralRegion {
    match report.side {
        Side::Unilateral => SpectralRegion::disc(report.r.value),
        Side::Bilateral => {
            let q = report.q.map(|q| q.value).unwrap_or(0.0);
            SpectralRegion::annulus(q, report.r.value, true, true)
        }
    }
}

/// Approximate point spectrum. The exact case formulas apply when the
/// relevant radius equalities hold; otherwise the general containment
/// annulus is returned with a precision caveat.
pub fn approximate_point_spectrum(report: &RadiiReport) -> (Vec<SpectralRegion>, Option<String>) {
    match report.side {
        Side::Unilateral => {
            if radius_eq(&report.r1, &report.r) == EqualityResult::Equal {
                (vec![SpectralRegion::circle(report.r.value)], None)
            } else {
                (
                    vec![SpectralRegion::annulus(
                        report.r1.value,
                        report.r.value,
                        true,
                        true,
                    )],
                    Some("r1 < r: exact circle formula unavailable; containment annulus shown".into()),
                )
            }
        }
        Side::Bilateral => {
            if report.invertibility.is_invertible() {
                let q = report.q.map(|q| q.value).unwrap_or(0.0);
                (
                    vec![SpectralRegion::two_circles(q, report.r.value)],
                    None,
                )
            } else {
                let r_minus = report
                    .minus
                    .as_ref()
                    .map(|m| m.r.value)
                    .unwrap_or(0.0);
                (
                    vec![
                        SpectralRegion::disc(r_minus),
                        SpectralRegion::circle(report.r.value),
                    ],
                    None,
                )
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Property classifications
// ---------------------------------------------------------------------------

/// Single-valued extension property for S and its adjoint, plus the
/// open annulus where SVEP fails for S (every point there carries a
/// nonzero analytic eigenvector field).
pub fn svep(report: &RadiiReport) -> (Verdict, Verdict, SpectralRegion) {
    match report.side {
        Side::Unilateral => {
            let s = Verdict::new(Status::Holds, "unilateral: point spectrum is empty");
            let adj = if radius_eq_const(&report.plus.r2, 0.0) == EqualityResult::Equal {
                Verdict::new(
                    Status::Holds,
                    format!("adjoint-svep: r2 = 0 ({:.6})", report.plus.r2.value),
                )
            } else {
                Verdict::new(
                    Status::Fails,
                    format!("adjoint-svep: r2 = {:.6} > 0", report.plus.r2.value),
                )
            };
            (s, adj, SpectralRegion::Empty)
        }
        Side::Bilateral => {
            let minus = report.minus.as_ref().expect("bilateral report has a minus side");
            let (r2m, r3p) = (&minus.r2, &report.plus.r3);
            let (r2p, r3m) = (&report.plus.r2, &minus.r3);
            let s = verdict_le(r2m, r3p, "svep: r2_minus <= r3_plus");
            let adj = verdict_le(r2p, r3m, "adjoint-svep: r2_plus <= r3_minus");
            let failure = if s.status == Status::Fails {
                SpectralRegion::annulus(r3p.value, r2m.value, false, false)
            } else {
                SpectralRegion::Empty
            };
            (s, adj, failure)
        }
    }
}

/// Mirror of the SVEP failure region, but for the adjoint: the open
/// annulus r3_minus < |lambda| < r2_plus.
pub fn svep_adjoint_failure_region(report: &RadiiReport) -> SpectralRegion {
    match (&report.minus, report.side) {
        (Some(minus), Side::Bilateral) => SpectralRegion::annulus(
            minus.r3.value,
            report.plus.r2.value,
            false,
            false,
        ),
        _ => SpectralRegion::Empty,
    }
}

fn verdict_le(a: &RadiusEstimate, b: &RadiusEstimate, tag: &str) -> Verdict {
    // a <= b (within tolerance) decides Holds/Fails; noisy -> Unknown
    let tol = crate::radii::equality_tolerance(a, b);
    let scale = a.value.abs().max(b.value.abs()).max(1.0);
    if a.value <= b.value + tol * scale {
        Verdict::new(
            Status::Holds,
            format!("{tag}: {:.6} <= {:.6}", a.value, b.value),
        )
    } else if a.value <= b.value + 2.0 * tol * scale {
        Verdict::new(
            Status::Unknown,
            format!("{tag}: {:.6} vs {:.6} within noise", a.value, b.value),
        )
    } else {
        Verdict::new(
            Status::Fails,
            format!("{tag}: {:.6} > {:.6}", a.value, b.value),
        )
    }
}

fn is_periodic_structure(w: &WeightSequence) -> bool {
    crate::radii::exact_periodic_means(w).is_ok()
}

fn quasi_nilpotent(report: &RadiiReport) -> bool {
    radius_eq_const(&report.r, 0.0) == EqualityResult::Equal
}

/// Dunford's condition (C).
pub fn dunford_c(report: &RadiiReport, w: &WeightSequence) -> Verdict {
    let conjecture_caveat =
        "the converse of the necessary radius condition is an open question; \
         satisfied necessary conditions alone do not upgrade Unknown to Holds";
    match report.side {
        Side::Unilateral => {
            // necessary: r = r3
            match radius_eq(&report.r, &report.plus.r3) {
                EqualityResult::Unequal => Verdict::new(
                    Status::Fails,
                    cmp_str(
                        "dunford-necessary: r = r3",
                        &report.r,
                        &report.plus.r3,
                        EqualityResult::Unequal,
                    ),
                ),
                res => {
                    // sufficient routes
                    if quasi_nilpotent(report) {
                        return Verdict::new(
                            Status::Holds,
                            format!("quasi-nilpotent: r = {:.6}", report.r.value),
                        );
                    }
                    let (beta, _) = bishop_beta(report, w);
                    if beta.status == Status::Holds {
                        return Verdict::new(
                            Status::Holds,
                            format!("implied by bishop-beta ({})", beta.basis),
                        );
                    }
                    Verdict::new(
                        Status::Unknown,
                        cmp_str("dunford-necessary: r = r3", &report.r, &report.plus.r3, res),
                    )
                    .with_caveat(conjecture_caveat)
                }
            }
        }
        Side::Bilateral => {
            let minus = report.minus.as_ref().expect("bilateral report");
            // necessary: non-invertible -> r1 = r2_minus = 0;
            //            invertible -> r1 = 1/r(inverse) = r2_minus
            let nec = if report.invertibility.is_invertible() {
                let q = report.q.expect("bilateral report has q");
                let a = radius_eq(&report.r1, &q);
                let b = radius_eq(&report.r1, &minus.r2);
                let c = radius_eq(&report.plus.r3, &report.r);
                (a, b, c)
            } else {
                let zero = RadiusEstimate::exact(0.0, ExactReason::Constant, 0);
                let a = radius_eq(&report.r1, &zero);
                let b = radius_eq(&minus.r2, &zero);
                let c = radius_eq(&report.plus.r3, &report.r);
                (a, b, c)
            };
            let basis = format!(
                "dunford-necessary: r1 = {:.6}, r2_minus = {:.6}, r3_plus = {:.6}, r = {:.6}, q = {:.6}",
                report.r1.value,
                minus.r2.value,
                report.plus.r3.value,
                report.r.value,
                report.q.map(|q| q.value).unwrap_or(0.0),
            );
            if nec.0 == EqualityResult::Unequal
                || nec.1 == EqualityResult::Unequal
                || nec.2 == EqualityResult::Unequal
            {
                return Verdict::new(Status::Fails, basis);
            }
            if quasi_nilpotent(report) {
                return Verdict::new(
                    Status::Holds,
                    format!("quasi-nilpotent: r = {:.6}", report.r.value),
                );
            }
            let (beta, _) = bishop_beta(report, w);
            if beta.status == Status::Holds {
                return Verdict::new(
                    Status::Holds,
                    format!("implied by bishop-beta ({})", beta.basis),
                );
            }
            Verdict::new(Status::Unknown, basis).with_caveat(conjecture_caveat)
        }
    }
}

/// Bishop's property (beta), plus the candidate region for the essential
/// failure set sigma_beta when the radius pattern pins it down.
pub fn bishop_beta(report: &RadiiReport, w: &WeightSequence) -> (Verdict, SpectralRegion) {
    let sigma_beta_candidate = || -> SpectralRegion {
        match report.side {
            Side::Unilateral => SpectralRegion::circle(report.r.value),
            Side::Bilateral => {
                if report.invertibility.is_invertible() {
                    let q = report.q.map(|q| q.value).unwrap_or(0.0);
                    SpectralRegion::two_circles(q, report.r.value)
                } else {
                    SpectralRegion::circle(report.r.value)
                }
            }
        }
    };

    // sufficient routes shared by both sides
    let sufficient = || -> Option<Verdict> {
        if is_periodic_structure(w) {
            return Some(Verdict::new(
                Status::Holds,
                "periodic weights: hyponormal after rotation-invariance reduction",
            ));
        }
        match radius_eq(&report.m, &report.w) {
            EqualityResult::Equal => Some(Verdict::new(
                Status::Holds,
                cmp_str("m = w", &report.m, &report.w, EqualityResult::Equal),
            )),
            _ => None,
        }
    };

    match report.side {
        Side::Unilateral => {
            // necessary: r1 = r
            match radius_eq(&report.r1, &report.r) {
                EqualityResult::Unequal => (
                    Verdict::new(
                        Status::Fails,
                        cmp_str(
                            "bishop-necessary: r1 = r",
                            &report.r1,
                            &report.r,
                            EqualityResult::Unequal,
                        ),
                    ),
                    sigma_beta_candidate(),
                ),
                res => {
                    if let Some(v) = sufficient() {
                        return (v, SpectralRegion::Empty);
                    }
                    (
                        Verdict::new(
                            Status::Unknown,
                            cmp_str("bishop-necessary: r1 = r", &report.r1, &report.r, res),
                        ),
                        sigma_beta_candidate(),
                    )
                }
            }
        }
        Side::Bilateral => {
            let minus = report.minus.as_ref().expect("bilateral report");
            // necessary: each side's four radii collapse
            // (non-invertible: r1 = r2_minus = 0 and r3_plus = r;
            //  invertible: r1 = q = r2_minus and r3_plus = r)
            let plus_collapse = radius_eq(&report.plus.r3, &report.r);
            let minus_collapse = if report.invertibility.is_invertible() {
                let q = report.q.expect("bilateral q");
                radius_eq(&report.r1, &q).min_with(radius_eq(&report.r1, &minus.r2))
            } else {
                let zero = RadiusEstimate::exact(0.0, ExactReason::Constant, 0);
                radius_eq(&report.r1, &zero).min_with(radius_eq(&minus.r2, &zero))
            };
            let basis = format!(
                "bishop-necessary: r1 = {:.6}, r2_minus = {:.6}, r3_plus = {:.6}, r = {:.6}",
                report.r1.value, minus.r2.value, report.plus.r3.value, report.r.value
            );
            if plus_collapse == EqualityResult::Unequal
                || minus_collapse == EqualityResult::Unequal
            {
                return (Verdict::new(Status::Fails, basis), sigma_beta_candidate());
            }
            if let Some(v) = sufficient() {
                return (v, SpectralRegion::Empty);
            }
            (
                Verdict::new(Status::Unknown, basis),
                sigma_beta_candidate(),
            )
        }
    }
}

trait EqMin {
    fn min_with(self, other: EqualityResult) -> EqualityResult;
}

impl EqMin for EqualityResult {
    /// Combine two predicate results pessimistically: any Unequal wins,
    /// else any Undecidable, else Equal.
    fn min_with(self, other: EqualityResult) -> EqualityResult {
        use EqualityResult::*;
        match (self, other) {
            (Unequal, _) | (_, Unequal) => Unequal,
            (Undecidable, _) | (_, Undecidable) => Undecidable,
            _ => Equal,
        }
    }
}

/// Decomposability.
pub fn decomposable(report: &RadiiReport, w: &WeightSequence) -> Verdict {
    match report.side {
        Side::Unilateral => {
            if quasi_nilpotent(report) {
                Verdict::new(
                    Status::Holds,
                    format!("quasi-nilpotent: r = {:.6}", report.r.value),
                )
            } else {
                Verdict::new(
                    Status::Fails,
                    format!(
                        "unilateral decomposable iff quasi-nilpotent; r = {:.6} > 0",
                        report.r.value
                    ),
                )
            }
        }
        Side::Bilateral => {
            if quasi_nilpotent(report) {
                return Verdict::new(
                    Status::Holds,
                    format!("quasi-nilpotent: r = {:.6}", report.r.value),
                );
            }
            // necessary: quasi-nilpotent, or invertible with circle
            // spectrum (q = r)
            let circle_spectrum = report.invertibility.is_invertible()
                && report
                    .q
                    .map(|q| radius_eq(&q, &report.r) != EqualityResult::Unequal)
                    .unwrap_or(false);
            if !circle_spectrum {
                return Verdict::new(
                    Status::Fails,
                    format!(
                        "decomposable-necessary: quasi-nilpotent or circle spectrum; \
                         q = {:.6}, r = {:.6}",
                        report.q.map(|q| q.value).unwrap_or(0.0),
                        report.r.value
                    ),
                );
            }
            if is_periodic_structure(w) {
                return Verdict::new(Status::Holds, "periodic weights");
            }
            if radius_eq(&report.m, &report.w) == EqualityResult::Equal {
                return Verdict::new(
                    Status::Holds,
                    cmp_str("m = w", &report.m, &report.w, EqualityResult::Equal),
                );
            }
            Verdict::new(
                Status::Unknown,
                format!(
                    "circle spectrum (q = {:.6} = r = {:.6}) but no sufficient condition met",
                    report.q.map(|q| q.value).unwrap_or(0.0),
                    report.r.value
                ),
            )
        }
    }
}

/// Property (Q) verdict plus the density flag for the quasi-nilpotent
/// part H0(S) (dense iff r3 = 0).
pub fn property_q(report: &RadiiReport, w: &WeightSequence) -> Result<(Verdict, bool), ClassifyError> {
    if report.side != Side::Unilateral {
        return Ok((
            Verdict::new(
                Status::NotApplicable,
                "property-q classification implemented for unilateral shifts",
            ),
            false,
        ));
    }
    let r3_pos = radius_eq_const(&report.plus.r3, 0.0) == EqualityResult::Unequal;
    let h0_dense = !r3_pos;
    let qn = quasi_nilpotent(report);
    let verdict = match w.zero_pattern() {
        ZeroPattern::Undeclared => return Err(ClassifyError::ZeroPatternUndeclared),
        ZeroPattern::NoZeros | ZeroPattern::FinitelyMany => {
            // finitely many zeros reduce to the injective tail summand,
            // whose radii equal the full operator's; same test applies
            if r3_pos {
                Verdict::new(
                    Status::Holds,
                    format!("property-q: r3 = {:.6} > 0", report.plus.r3.value),
                )
            } else if qn {
                Verdict::new(
                    Status::Holds,
                    format!("property-q: quasi-nilpotent, r = {:.6}", report.r.value),
                )
            } else {
                Verdict::new(
                    Status::Fails,
                    format!(
                        "property-q: r3 = {:.6} = 0 but r = {:.6} > 0",
                        report.plus.r3.value, report.r.value
                    ),
                )
            }
        }
        ZeroPattern::InfinitelyMany => {
            if qn {
                Verdict::new(
                    Status::Holds,
                    format!(
                        "property-q (infinitely many zero weights): quasi-nilpotent, r = {:.6}",
                        report.r.value
                    ),
                )
            } else {
                Verdict::new(
                    Status::Fails,
                    format!(
                        "property-q (infinitely many zero weights): requires quasi-nilpotent, \
                         r = {:.6} > 0",
                        report.r.value
                    ),
                )
            }
        }
    };
    Ok((verdict, h0_dense))
}

/// Property (Q) for the adjoint: holds iff S is quasi-nilpotent.
pub fn property_q_adjoint(report: &RadiiReport) -> Verdict {
    if quasi_nilpotent(report) {
        Verdict::new(
            Status::Holds,
            format!("adjoint property-q: quasi-nilpotent, r = {:.6}", report.r.value),
        )
    } else {
        Verdict::new(
            Status::Fails,
            format!("adjoint property-q: requires quasi-nilpotent, r = {:.6} > 0", report.r.value),
        )
    }
}

// ---------------------------------------------------------------------------
// Local spectra
// ---------------------------------------------------------------------------

/// Exact region, or a certified subset when only containment is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "precision", rename_all = "snake_case")]
pub enum RegionKnowledge {
    Exact { region: SpectralRegion },
    LowerBoundRegion { region: SpectralRegion },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSpectrumReport {
    pub region: RegionKnowledge,
    /// Vector-dependent convergence radius R(x) (unilateral) or the
    /// pair (R_minus, R_plus) for bilateral shifts. Infinite for
    /// finitely supported vectors where applicable.
    pub r_omega_plus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_omega_minus: Option<f64>,
    /// Local spectral radius limsup ||S^n x||^(1/n), estimated from the
    /// power-norm oracle over the horizon.
    pub r_local: RadiusEstimate,
    /// Which rule produced the region.
    pub case: String,
}

/// Tail-window liminf of |beta_n / a_n|^(1/n) over the support of x on
/// the plus side; infinity when x has finite support.
fn r_omega_plus(beta: &BetaCache, x: &VectorSpec) -> f64 {
    if x.finitely_supported() {
        return f64::INFINITY;
    }
    let h = beta.nplus;
    let start = h.div_ceil(2);
    let mut lo = f64::INFINITY;
    for n in start..=h {
        let a = x.coeff(n as i64);
        if a == 0.0 {
            continue;
        }
        let v = ((beta.logbeta(n as i64) - a.abs().ln()) / n as f64).exp();
        lo = lo.min(v);
    }
    lo
}

/// Tail-window limsup of |a_{-n} / beta_{-n}|^(1/n); 0 for finitely
/// supported vectors.
fn r_omega_minus(beta: &BetaCache, x: &VectorSpec) -> f64 {
    if x.finitely_supported() {
        let finite = match x {
            VectorSpec::Explicit { start, .. } => *start >= 0,
            _ => false,
        };
        if finite {
            return 0.0;
        }
    }
    let h = beta.nminus;
    let start = h.div_ceil(2);
    let mut hi = 0.0f64;
    for n in start..=h {
        let a = x.coeff(-(n as i64));
        if a == 0.0 {
            continue;
        }
        let v = ((a.abs().ln() - beta.logbeta(-(n as i64))) / n as f64).exp();
        hi = hi.max(v);
    }
    hi
}

/// Local spectral radius estimate from power norms.
fn local_radius(beta: &BetaCache, x: &VectorSpec) -> RadiusEstimate {
    let n_max = (beta.nplus / 2).max(1);
    let norms = crate::oracle::power_norms(beta, x, n_max)
        .expect("horizon admits power norms for the local radius");
    let mut hi = 0.0f64;
    let mut run: Vec<(usize, f64)> = Vec::new();
    let from = n_max.div_ceil(2);
    for (n, log_norm) in norms.log_norms.iter().enumerate().skip(from) {
        if n == 0 {
            continue;
        }
        let v = (log_norm / n as f64).exp();
        hi = hi.max(v);
        run.push((n, hi));
    }
    let mut lo_w = f64::INFINITY;
    let mut hi_w = f64::NEG_INFINITY;
    let wfrom = run.len().saturating_sub((run.len() / 10).max(2));
    for &(_, v) in &run[wfrom..] {
        lo_w = lo_w.min(v);
        hi_w = hi_w.max(v);
    }
    RadiusEstimate::estimated(
        hi,
        crate::radii::Diagnostic {
            horizon: n_max,
            spread: if run.is_empty() { 0.0 } else { hi_w - lo_w },
            monotone: true,
        },
    )
}

/// Local spectrum of a vector.
pub fn local_spectrum(
    report: &RadiiReport,
    beta: &BetaCache,
    x: &VectorSpec,
) -> Result<LocalSpectrumReport, ClassifyError> {
    x.validate(report.side)?;
    let r_local = local_radius(beta, x);
    match report.side {
        Side::Unilateral => {
            let r3 = report.plus.r3.value;
            let romega = r_omega_plus(beta, x);
            let (region, case) = if romega > r3 {
                (
                    RegionKnowledge::Exact {
                        region: SpectralRegion::disc(r3),
                    },
                    "exact-branch: R(x) > r3 gives the closed disc of radius r3".to_string(),
                )
            } else {
                (
                    RegionKnowledge::LowerBoundRegion {
                        region: SpectralRegion::disc(romega),
                    },
                    "containment-branch: closed disc of radius R(x) is contained in the local spectrum"
                        .to_string(),
                )
            };
            Ok(LocalSpectrumReport {
                region,
                r_omega_plus: romega,
                r_omega_minus: None,
                r_local,
                case,
            })
        }
        Side::Bilateral => {
            let minus = report.minus.as_ref().expect("bilateral report");
            let (r2m, r3p) = (minus.r2.value, report.plus.r3.value);
            // local spectra are only well-behaved under SVEP
            let tol = crate::radii::equality_tolerance(&minus.r2, &report.plus.r3);
            let scale = r2m.max(r3p).max(1.0);
            if r2m > r3p + 2.0 * tol * scale {
                return Err(ClassifyError::SvepViolated {
                    r2_minus: r2m,
                    r3_plus: r3p,
                });
            }
            let romega_p = r_omega_plus(beta, x);
            let romega_m = r_omega_minus(beta, x);
            let (region, case) = if romega_m < r2m && r3p < romega_p {
                (
                    RegionKnowledge::Exact {
                        region: SpectralRegion::annulus(r2m, r3p, true, true),
                    },
                    "exact-branch: R_minus(x) < r2_minus and r3_plus < R_plus(x) give the closed annulus"
                        .to_string(),
                )
            } else {
                (
                    RegionKnowledge::LowerBoundRegion {
                        region: SpectralRegion::annulus(romega_m, romega_p, true, true),
                    },
                    "containment-branch: the annulus [R_minus(x), R_plus(x)] is contained in the local spectrum"
                        .to_string(),
                )
            };
            Ok(LocalSpectrumReport {
                region,
                r_omega_plus: romega_p,
                r_omega_minus: Some(romega_m),
                r_local,
                case,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Assembled classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub svep: Verdict,
    pub svep_adjoint: Verdict,
    pub svep_failure_region: SpectralRegion,
    pub svep_adjoint_failure_region: SpectralRegion,
    pub dunford_c: Verdict,
    pub bishop_beta: Verdict,
    pub sigma_beta_candidate: SpectralRegion,
    pub decomposable: Verdict,
    pub property_q: Verdict,
    pub property_q_adjoint: Verdict,
    /// Whether the quasi-nilpotent part H0(S) is dense (unilateral).
    pub h0_dense: bool,
}

pub fn classify_all(
    report: &RadiiReport,
    w: &WeightSequence,
) -> Result<ClassificationReport, ClassifyError> {
    let (svep_s, svep_adj, failure) = svep(report);
    let (beta_v, sigma_beta) = bishop_beta(report, w);
    let (q_v, h0_dense) = property_q(report, w)?;
    Ok(ClassificationReport {
        svep: svep_s,
        svep_adjoint: svep_adj,
        svep_failure_region: failure,
        svep_adjoint_failure_region: svep_adjoint_failure_region(report),
        dunford_c: dunford_c(report, w),
        bishop_beta: beta_v,
        sigma_beta_candidate: sigma_beta,
        decomposable: decomposable(report, w),
        property_q: q_v,
        property_q_adjoint: property_q_adjoint(report),
        h0_dense,
    })
}
