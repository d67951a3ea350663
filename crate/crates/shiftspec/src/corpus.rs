//! Registry of the canonical example constructions with their expected
//! radii, exact pinned values, and ground-truth annotations.

use serde::{Deserialize, Serialize};

use crate::classify::{classify_all, ClassificationReport, ClassifyError, Status};
use crate::radii::{
    compute_radii, verify_chain, ExactReason, RadiiError, RadiiOptions, RadiiReport,
    RadiusEstimate,
};
use crate::weights::{named_weight, WeightError, WeightSequence};

/// Where an expected value comes from: stated with the construction,
/// forced by elementary arithmetic, or measured by this artifact at the
/// entry's pinned horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Stated,
    Derived,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedRadius {
    pub name: &'static str,
    pub value: f64,
    pub provenance: Provenance,
    pub tolerance: f64,
}

/// Properties an entry can carry ground truth for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKey {
    Svep,
    SvepAdjoint,
    DunfordC,
    BishopBeta,
    BishopBetaAdjoint,
    Decomposable,
    PropertyQ,
    PropertyQAdjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub property: PropertyKey,
    pub status: Status,
    /// Where the claim is made, relative to the construction.
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub params: Vec<(String, f64)>,
    pub horizon: (usize, usize),
    /// Override for the sup/inf-ratio estimator depth where the default
    /// would miss the structure within the horizon.
    pub n_max_override: Option<usize>,
    pub expected_radii: Vec<ExpectedRadius>,
    /// Radius values known exactly for this construction; analysis
    /// replaces the finite-horizon estimate with the exact value so
    /// that classification predicates see the true radii.
    pub pinned: Vec<(&'static str, f64)>,
    pub annotations: Vec<Annotation>,
    pub notes: &'static str,
}

impl CorpusEntry {
    pub fn weight(&self) -> Result<WeightSequence, WeightError> {
        named_weight(self.id, &self.params)
    }

    pub fn options(&self) -> RadiiOptions {
        let opts = RadiiOptions::new(self.horizon);
        match self.n_max_override {
            Some(n) => opts.with_n_max(n),
            None => opts,
        }
    }

    /// Radii report with the entry's exact pins applied.
    pub fn analyzed_radii(&self) -> Result<RadiiReport, RadiiError> {
        let w = self.weight()?;
        let mut report = compute_radii(&w, &self.options())?;
        apply_pins(&mut report, &self.pinned);
        Ok(report)
    }

    pub fn classification(&self) -> Result<ClassificationReport, CorpusError> {
        let w = self.weight().map_err(RadiiError::Weight)?;
        let report = self.analyzed_radii()?;
        Ok(classify_all(&report, &w)?)
    }

    /// Engine verdict for one annotated property.
    pub fn engine_status(&self, report: &ClassificationReport, key: PropertyKey) -> Status {
        match key {
            PropertyKey::Svep => report.svep.status,
            PropertyKey::SvepAdjoint => report.svep_adjoint.status,
            PropertyKey::DunfordC => report.dunford_c.status,
            PropertyKey::BishopBeta => report.bishop_beta.status,
            PropertyKey::BishopBetaAdjoint => report.bishop_beta.status,
            PropertyKey::Decomposable => report.decomposable.status,
            PropertyKey::PropertyQ => report.property_q.status,
            PropertyKey::PropertyQAdjoint => report.property_q_adjoint.status,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Radii(#[from] RadiiError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Replace estimated radii with registry-pinned exact values and
/// recompute the derived fields.
pub fn apply_pins(report: &mut RadiiReport, pins: &[(&'static str, f64)]) {
    if pins.is_empty() {
        return;
    }
    let h = report.plus.r3.diagnostic.horizon;
    let exact = |v: f64| RadiusEstimate::exact(v, ExactReason::RegistryAnnotation, h);
    for &(name, value) in pins {
        let e = exact(value);
        match name {
            "m" => report.m = e,
            "w" => report.w = e,
            "norm" => report.norm = e,
            "q" => report.q = Some(e),
            "r1" => report.r1 = e,
            "r" => report.r = e,
            "r1_plus" => report.plus.r1 = e,
            "r2_plus" | "r2" => report.plus.r2 = e,
            "r3_plus" | "r3" => report.plus.r3 = e,
            "r_plus" => report.plus.r = e,
            "r1_minus" => {
                if let Some(m) = report.minus.as_mut() {
                    m.r1 = e;
                }
            }
            "r2_minus" => {
                if let Some(m) = report.minus.as_mut() {
                    m.r2 = e;
                }
            }
            "r3_minus" => {
                if let Some(m) = report.minus.as_mut() {
                    m.r3 = e;
                }
            }
            "r_minus" => {
                if let Some(m) = report.minus.as_mut() {
                    m.r = e;
                }
            }
            other => panic!("unknown pinned radius name `{other}`"),
        }
    }
    // re-derive the combined values unless they were pinned directly
    let pinned_names: Vec<&str> = pins.iter().map(|&(n, _)| n).collect();
    if let Some(minus) = report.minus.clone() {
        if !pinned_names.contains(&"r1") {
            report.r1 = if report.plus.r1.value <= minus.r1.value {
                report.plus.r1
            } else {
                minus.r1
            };
        }
        if !pinned_names.contains(&"r") {
            report.r = if report.plus.r.value >= minus.r.value {
                report.plus.r
            } else {
                minus.r
            };
        }
    } else {
        if !pinned_names.contains(&"r1") {
            report.r1 = report.plus.r1;
        }
        if !pinned_names.contains(&"r") {
            report.r = report.plus.r;
        }
    }
    report.chain_ok = verify_chain(report);
}

/// Look up a single entry.
pub fn find_entry(id: &str) -> Option<CorpusEntry> {
    list_corpus().into_iter().find(|e| e.id == id)
}

/// All registry entries, in a fixed order.
pub fn list_corpus() -> Vec<CorpusEntry> {
    let sqrt2 = std::f64::consts::SQRT_2;
    vec![
        CorpusEntry {
            id: "s_a",
            params: vec![("a".into(), 2.0)],
            horizon: (0, 10_000),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "m",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
                ExpectedRadius {
                    name: "r1",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
                ExpectedRadius {
                    name: "r",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
                ExpectedRadius {
                    // a^2 / (2 sqrt(a^2 - 1)) at a = 2
                    name: "w",
                    value: 2.0 / 3.0f64.sqrt(),
                    provenance: Provenance::Stated,
                    tolerance: 1e-4,
                },
            ],
            // one bumped weight leaves every limit equal to the tail
            // weight 1; the estimators only approach it polynomially
            pinned: vec![("r1", 1.0), ("r", 1.0), ("r2", 1.0), ("r3", 1.0), ("r1_plus", 1.0), ("r_plus", 1.0)],
            annotations: vec![],
            notes: "single bumped weight a, then constant 1; for a > sqrt(2) the numerical \
                    radius exceeds both the norm lower bound and the spectral radius",
        },
        CorpusEntry {
            id: "periodic",
            params: vec![("p0".into(), 2.0), ("p1".into(), 1.0)],
            horizon: (0, 2000),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r1",
                    value: sqrt2,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r2",
                    value: sqrt2,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r3",
                    value: sqrt2,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r",
                    value: sqrt2,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
            ],
            pinned: vec![],
            annotations: vec![
                Annotation {
                    property: PropertyKey::BishopBeta,
                    status: Status::Holds,
                    location: "periodic-weights classification stated with the geometric-mean formula".into(),
                },
                Annotation {
                    property: PropertyKey::DunfordC,
                    status: Status::Holds,
                    location: "follows from the periodic-weights classification".into(),
                },
            ],
            notes: "unilateral periodic weights (2, 1); every radius is the geometric mean sqrt(2)",
        },
        CorpusEntry {
            id: "hyponormal_step",
            params: vec![],
            horizon: (512, 512),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r1",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r",
                    value: 2.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "q",
                    value: 1.0,
                    provenance: Provenance::Derived,
                    tolerance: 1e-9,
                },
            ],
            pinned: vec![],
            annotations: vec![
                Annotation {
                    property: PropertyKey::Svep,
                    status: Status::Holds,
                    location: "monotone weights make the shift hyponormal".into(),
                },
                Annotation {
                    property: PropertyKey::BishopBeta,
                    status: Status::Holds,
                    location: "hyponormal operators possess the property".into(),
                },
            ],
            notes: "bilateral step: weight 2 on the nonnegative side, 1 on the negative side; \
                    shows the inf-ratio and sup-ratio limits separating (1 < 2)",
        },
        CorpusEntry {
            id: "atzmon",
            params: vec![],
            horizon: (4000, 4000),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r1",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
                ExpectedRadius {
                    name: "r",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
            ],
            // the slowly oscillating drift keeps every defining
            // sequence equal to 1 in the limit, but convergence is
            // slower than any horizon this artifact runs at
            pinned: vec![
                ("r1_plus", 1.0),
                ("r2_plus", 1.0),
                ("r3_plus", 1.0),
                ("r_plus", 1.0),
                ("r1_minus", 1.0),
                ("r2_minus", 1.0),
                ("r3_minus", 1.0),
                ("r_minus", 1.0),
                ("q", 1.0),
            ],
            annotations: vec![
                Annotation {
                    property: PropertyKey::DunfordC,
                    status: Status::Holds,
                    location: "stated with the oscillatory-drift construction".into(),
                },
                Annotation {
                    property: PropertyKey::BishopBeta,
                    status: Status::Fails,
                    location: "stated with the oscillatory-drift construction (fails for the \
                               operator and its adjoint)".into(),
                },
                Annotation {
                    property: PropertyKey::BishopBetaAdjoint,
                    status: Status::Fails,
                    location: "stated with the oscillatory-drift construction".into(),
                },
                Annotation {
                    property: PropertyKey::Decomposable,
                    status: Status::Fails,
                    location: "equivalent to both-sided failure of the analytic convergence property".into(),
                },
            ],
            notes: "bilateral almost-periodic weights from a glacially oscillating drift; unit \
                    circle spectrum with condition (C) but without the analytic convergence \
                    property on either side — beyond any finite-horizon test, hence the pins",
        },
        CorpusEntry {
            id: "ridge",
            params: vec![],
            horizon: (0, 10_000),
            n_max_override: Some(20),
            expected_radii: vec![
                ExpectedRadius {
                    name: "r1",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 0.05,
                },
                ExpectedRadius {
                    name: "r3",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 0.05,
                },
                ExpectedRadius {
                    name: "r",
                    value: 2.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-6,
                },
            ],
            pinned: vec![],
            annotations: vec![
                Annotation {
                    property: PropertyKey::PropertyQ,
                    status: Status::Holds,
                    location: "stated with the growing-segments construction".into(),
                },
                Annotation {
                    property: PropertyKey::DunfordC,
                    status: Status::Fails,
                    location: "stated with the growing-segments construction".into(),
                },
                Annotation {
                    property: PropertyKey::BishopBeta,
                    status: Status::Fails,
                    location: "implied: the condition-(C) failure rules it out".into(),
                },
            ],
            notes: "segments of k*k indices whose first k weights are 2: the limsup radius \
                    stays 1 while the sup-ratio radius reaches 2",
        },
        CorpusEntry {
            id: "ki_gap",
            params: vec![],
            horizon: (0, 10_000),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r2",
                    value: 0.0,
                    provenance: Provenance::Stated,
                    tolerance: 0.02,
                },
                ExpectedRadius {
                    name: "r3",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-3,
                },
            ],
            // beta returns to 1 at every k_i - 1 and collapses to
            // 2^(-i k_i) at k_i: liminf 0, limsup 1, exactly
            pinned: vec![("r2_plus", 0.0), ("r3_plus", 1.0), ("r1_plus", 0.0)],
            annotations: vec![
                Annotation {
                    property: PropertyKey::SvepAdjoint,
                    status: Status::Holds,
                    location: "liminf radius 0 keeps the adjoint's extension property".into(),
                },
                Annotation {
                    property: PropertyKey::PropertyQ,
                    status: Status::Holds,
                    location: "positive limsup radius".into(),
                },
                Annotation {
                    property: PropertyKey::PropertyQAdjoint,
                    status: Status::Fails,
                    location: "the adjoint property requires quasi-nilpotence".into(),
                },
            ],
            notes: "weight 2 except at indices k_i - 1 (k_1 = 1, k_{i+1} = (i+1) k_i + 1) where \
                    the weight collapses the running product back to 2^(-i k_i)",
        },
        CorpusEntry {
            id: "square_zeros",
            params: vec![],
            horizon: (0, 10_000),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r",
                    value: 1.0,
                    provenance: Provenance::Stated,
                    tolerance: 1e-9,
                },
                ExpectedRadius {
                    name: "r2",
                    value: 0.0,
                    provenance: Provenance::Derived,
                    tolerance: 0.0,
                },
            ],
            pinned: vec![],
            annotations: vec![Annotation {
                property: PropertyKey::PropertyQ,
                status: Status::Fails,
                location: "stated with the zero-at-squares construction".into(),
            }],
            notes: "weight 0 at perfect squares, 1 elsewhere: infinitely many zeros with \
                    unit power norms, so not quasi-nilpotent",
        },
        CorpusEntry {
            id: "reciprocal_step",
            params: vec![],
            horizon: (512, 512),
            n_max_override: None,
            expected_radii: vec![
                ExpectedRadius {
                    name: "r3_plus",
                    value: 0.5,
                    provenance: Provenance::Derived,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r2_minus",
                    value: 2.0,
                    provenance: Provenance::Derived,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "r",
                    value: 2.0,
                    provenance: Provenance::Derived,
                    tolerance: 1e-12,
                },
                ExpectedRadius {
                    name: "q",
                    value: 0.5,
                    provenance: Provenance::Derived,
                    tolerance: 1e-9,
                },
            ],
            pinned: vec![],
            annotations: vec![Annotation {
                property: PropertyKey::Svep,
                status: Status::Fails,
                location: "liminf radius on the negative side exceeds the limsup radius on \
                           the positive side".into(),
            }],
            notes: "bilateral step with weight 1/2 on the nonnegative side and 2 on the \
                    negative side: the canonical extension-property failure",
        },
    ]
}

/// Read an expected radius value out of a report by name.
pub fn radius_by_name(report: &RadiiReport, name: &str) -> Option<f64> {
    Some(match name {
        "m" => report.m.value,
        "w" => report.w.value,
        "norm" => report.norm.value,
        "q" => report.q?.value,
        "r1" => report.r1.value,
        "r" => report.r.value,
        "r1_plus" => report.plus.r1.value,
        "r2_plus" | "r2" => report.plus.r2.value,
        "r3_plus" | "r3" => report.plus.r3.value,
        "r_plus" => report.plus.r.value,
        "r1_minus" => report.minus.as_ref()?.r1.value,
        "r2_minus" => report.minus.as_ref()?.r2.value,
        "r3_minus" => report.minus.as_ref()?.r3.value,
        "r_minus" => report.minus.as_ref()?.r.value,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_listing_is_fixed() {
        let ids: Vec<&str> = list_corpus().iter().map(|e| e.id).collect();
        assert_eq!(
            ids,
            vec![
                "s_a",
                "periodic",
                "hyponormal_step",
                "atzmon",
                "ridge",
                "ki_gap",
                "square_zeros",
                "reciprocal_step"
            ]
        );
        assert!(find_entry("ridge").is_some());
        assert!(find_entry("nope").is_none());
    }

    #[test]
    fn all_entries_construct() {
        for entry in list_corpus() {
            entry.weight().unwrap_or_else(|e| panic!("{}: {e}", entry.id));
        }
    }

    #[test]
    fn expected_radii_within_tolerance() {
        for entry in list_corpus() {
            let report = entry.analyzed_radii().unwrap();
            for exp in &entry.expected_radii {
                let got = radius_by_name(&report, exp.name)
                    .unwrap_or_else(|| panic!("{}: no radius {}", entry.id, exp.name));
                assert!(
                    (got - exp.value).abs() <= exp.tolerance,
                    "{}: {} = {got}, expected {} +/- {}",
                    entry.id,
                    exp.name,
                    exp.value,
                    exp.tolerance
                );
            }
        }
    }

    #[test]
    fn no_verdict_contradicts_annotations() {
        for entry in list_corpus() {
            let classification = entry.classification().unwrap();
            for ann in &entry.annotations {
                let engine = entry.engine_status(&classification, ann.property);
                let conflict = matches!(
                    (engine, ann.status),
                    (Status::Holds, Status::Fails) | (Status::Fails, Status::Holds)
                );
                assert!(
                    !conflict,
                    "{}: {:?} engine {engine:?} contradicts annotation {:?}",
                    entry.id, ann.property, ann.status
                );
            }
        }
    }

    #[test]
    fn atzmon_bishop_unknown_with_annotation_fails() {
        let entry = find_entry("atzmon").unwrap();
        let classification = entry.classification().unwrap();
        assert_eq!(classification.bishop_beta.status, Status::Unknown);
        assert!(entry
            .annotations
            .iter()
            .any(|a| a.property == PropertyKey::BishopBeta && a.status == Status::Fails));
    }

    #[test]
    fn ki_gap_pinned_classifications() {
        let entry = find_entry("ki_gap").unwrap();
        let classification = entry.classification().unwrap();
        assert_eq!(classification.svep_adjoint.status, Status::Holds);
        assert_eq!(classification.property_q.status, Status::Holds);
        assert_eq!(classification.property_q_adjoint.status, Status::Fails);
    }

    #[test]
    fn pins_keep_chain_valid() {
        for entry in list_corpus() {
            let report = entry.analyzed_radii().unwrap();
            assert!(report.chain_ok, "{}: chain broken after pins", entry.id);
        }
    }
}
