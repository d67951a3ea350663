//! Machine-readable analysis reports, SVG region plots, and CSV
//! convergence traces.

use serde::{Deserialize, Serialize};

use crate::classify::{ClassificationReport, LocalSpectrumReport, SpectralRegion};
use crate::corpus::Annotation;
use crate::radii::{trace_r2_r3, trace_r_r1, RadiiError, RadiiReport, SideSign};
use crate::weights::{build_beta, Side, WeightSequence};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk weight specification: the sequence plus a schema marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpecFile {
    pub schema: u32,
    #[serde(flatten)]
    pub weight: WeightSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    pub weight: WeightSequence,
    pub horizon: (usize, usize),
    pub n_max: usize,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub spectrum: SpectralRegion,
    pub approximate_point_spectrum: Vec<SpectralRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximate_point_spectrum_caveat: Option<String>,
    pub svep_failure: SpectralRegion,
    pub svep_adjoint_failure: SpectralRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub radii_ms: u64,
    pub classify_ms: u64,
    pub oracle_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub tool_version: String,
    pub input: InputEcho,
    pub radii: RadiiReport,
    pub regions: Regions,
    pub classification: ClassificationReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_spectra: Vec<LocalSpectrumReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_checks: Vec<OracleCheck>,
    pub timings: Timings,
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

fn region_label(region: &SpectralRegion) -> String {
    match region {
        SpectralRegion::Empty => "empty".to_string(),
        SpectralRegion::Circle { rho } => format!("circle r={rho:.4}"),
        SpectralRegion::Disc { rho, .. } => format!("disc r={rho:.4}"),
        SpectralRegion::Annulus {
            rho_in, rho_out, ..
        } => format!("annulus [{rho_in:.4}, {rho_out:.4}]"),
        SpectralRegion::UnionOfTwoCircles { rho1, rho2 } => {
            format!("circles r={rho1:.4}, r={rho2:.4}")
        }
    }
}

/// Hand-emitted SVG: one panel per named region, each drawn as
/// concentric circles/annuli on a shared scale.
pub fn render_regions_svg(named: &[(&str, &SpectralRegion)]) -> String {
    let panel = 240.0f64;
    let pad = 20.0f64;
    let max_rho = named
        .iter()
        .map(|(_, r)| r.outer_radius())
        .fold(1.0f64, f64::max);
    let scale = (panel / 2.0 - pad) / max_rho;
    let width = panel * named.len() as f64;
    let height = panel + 40.0;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, (name, region)) in named.iter().enumerate() {
        let cx = panel * i as f64 + panel / 2.0;
        let cy = panel / 2.0 + 10.0;
        // reference axes
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{cy:.1}\" x2=\"{:.1}\" y2=\"{cy:.1}\" stroke=\"#ddd\"/>\n",
            cx - panel / 2.0 + 4.0,
            cx + panel / 2.0 - 4.0
        ));
        out.push_str(&format!(
            "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
            cy - panel / 2.0 + 4.0,
            cy + panel / 2.0 - 4.0
        ));
        match region {
            SpectralRegion::Empty => {}
            SpectralRegion::Circle { rho } => {
                out.push_str(&format!(
                    "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{:.2}\" fill=\"none\" \
                     stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
                    rho * scale
                ));
            }
            SpectralRegion::Disc { rho, .. } => {
                out.push_str(&format!(
                    "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{:.2}\" fill=\"#1f77b4\" \
                     fill-opacity=\"0.3\" stroke=\"#1f77b4\"/>\n",
                    rho * scale
                ));
            }
            SpectralRegion::Annulus {
                rho_in, rho_out, ..
            } => {
                // even-odd fill of two circles leaves the annulus shaded
                out.push_str(&format!(
                    "<path d=\"M {cx:.1} {:.2} A {ro:.2} {ro:.2} 0 1 0 {cx:.1} {:.2} A {ro:.2} \
                     {ro:.2} 0 1 0 {cx:.1} {:.2} Z M {cx:.1} {:.2} A {ri:.2} {ri:.2} 0 1 1 \
                     {cx:.1} {:.2} A {ri:.2} {ri:.2} 0 1 1 {cx:.1} {:.2} Z\" fill=\"#1f77b4\" \
                     fill-opacity=\"0.3\" fill-rule=\"evenodd\" stroke=\"#1f77b4\"/>\n",
                    cy - rho_out * scale,
                    cy + rho_out * scale,
                    cy - rho_out * scale,
                    cy - rho_in * scale,
                    cy + rho_in * scale,
                    cy - rho_in * scale,
                    ro = rho_out * scale,
                    ri = rho_in * scale,
                ));
            }
            SpectralRegion::UnionOfTwoCircles { rho1, rho2 } => {
                for rho in [rho1, rho2] {
                    if *rho == 0.0 {
                        out.push_str(&format!(
                            "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"2\" fill=\"#1f77b4\"/>\n"
                        ));
                    } else {
                        out.push_str(&format!(
                            "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{:.2}\" fill=\"none\" \
                             stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
                            rho * scale
                        ));
                    }
                }
            }
        }
        out.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" \
             font-size=\"11\">{name}: {}</text>\n",
            panel + 26.0,
            region_label(region)
        ));
    }
    out.push_str("</svg>\n");
    out
}

// ---------------------------------------------------------------------------
// CSV traces
// ---------------------------------------------------------------------------

/// Recompute the radius-estimate convergence traces for a report's
/// input and render them as CSV with columns (series, n, estimate).
/// The traces are derived data, so the report itself stays small.
pub fn convergence_traces_csv(report: &AnalysisReport) -> Result<String, RadiiError> {
    let w = &report.input.weight;
    let horizon = match w.side {
        Side::Unilateral => (0, report.input.horizon.0.max(report.input.horizon.1)),
        Side::Bilateral => report.input.horizon,
    };
    let beta = build_beta(w, horizon)?;
    let mut out = String::from("series,n,estimate\n");
    let mut emit_side = |sign: SideSign, suffix: &str| -> Result<(), RadiiError> {
        let h = match sign {
            SideSign::Plus => beta.nplus,
            SideSign::Minus => beta.nminus,
        };
        if h < 64 {
            return Ok(());
        }
        for (n, lo, hi) in trace_r2_r3(&beta, sign)? {
            out.push_str(&format!("r2{suffix},{n},{lo}\n"));
            out.push_str(&format!("r3{suffix},{n},{hi}\n"));
        }
        let n_max = report.input.n_max.min(h / 2).max(1);
        let k_max = report.input.k_max.min(h - n_max);
        for (n, g, hh) in trace_r_r1(&beta, sign, n_max, k_max)? {
            out.push_str(&format!("r{suffix},{n},{g}\n"));
            out.push_str(&format!("r1{suffix},{n},{hh}\n"));
        }
        Ok(())
    };
    match w.side {
        Side::Unilateral => emit_side(SideSign::Plus, "")?,
        Side::Bilateral => {
            emit_side(SideSign::Plus, "_plus")?;
            emit_side(SideSign::Minus, "_minus")?;
        }
    }
    Ok(out)
}

/// Region panels for an analysis report.
pub fn report_svg(report: &AnalysisReport) -> String {
    let mut named: Vec<(&str, &SpectralRegion)> =
        vec![("spectrum", &report.regions.spectrum)];
    for r in &report.regions.approximate_point_spectrum {
        named.push(("approx point spectrum", r));
    }
    if report.regions.svep_failure != SpectralRegion::Empty {
        named.push(("svep failure", &report.regions.svep_failure));
    }
    if report.regions.svep_adjoint_failure != SpectralRegion::Empty {
        named.push(("adjoint svep failure", &report.regions.svep_adjoint_failure));
    }
    render_regions_svg(&named)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_all, approximate_point_spectrum, spectrum, svep, svep_adjoint_failure_region};
    use crate::radii::{compute_radii, RadiiOptions};
    use crate::weights::named_weight;

    fn sample_report(id: &str, horizon: (usize, usize)) -> AnalysisReport {
        let w = named_weight(id, &[]).unwrap();
        let opts = RadiiOptions::new(horizon);
        let radii = compute_radii(&w, &opts).unwrap();
        let classification = classify_all(&radii, &w).unwrap();
        let (aps, caveat) = approximate_point_spectrum(&radii);
        let (_, _, failure) = svep(&radii);
        AnalysisReport {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input: InputEcho {
                corpus_id: Some(id.to_string()),
                weight: w,
                horizon,
                n_max: opts.n_max,
                k_max: opts.k_max,
            },
            regions: Regions {
                spectrum: spectrum(&radii),
                approximate_point_spectrum: aps,
                approximate_point_spectrum_caveat: caveat,
                svep_failure: failure,
                svep_adjoint_failure: svep_adjoint_failure_region(&radii),
            },
            radii,
            classification,
            annotations: vec![],
            local_spectra: vec![],
            oracle_checks: vec![],
            timings: Timings::default(),
        }
    }

    #[test]
    fn json_round_trip() {
        let report = sample_report("hyponormal_step", (256, 256));
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn json_deterministic_except_timings() {
        let mut a = sample_report("reciprocal_step", (256, 256));
        let mut b = sample_report("reciprocal_step", (256, 256));
        a.timings.radii_ms = 1;
        b.timings.radii_ms = 99;
        a.timings = Timings::default();
        b.timings = Timings::default();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn weight_spec_file_round_trip() {
        let w = named_weight("periodic", &[("p0".into(), 2.0), ("p1".into(), 1.0)]).unwrap();
        let f = WeightSpecFile {
            schema: SCHEMA_VERSION,
            weight: w,
        };
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"schema\":1"));
        assert!(json.contains("\"type\":\"periodic\""));
        let back: WeightSpecFile = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn svg_contains_regions() {
        let report = sample_report("hyponormal_step", (256, 256));
        let svg = report_svg(&report);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("annulus"));
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn traces_csv_has_all_series() {
        let report = sample_report("hyponormal_step", (256, 256));
        let csv = convergence_traces_csv(&report).unwrap();
        for series in ["r2_plus", "r3_plus", "r_plus", "r1_plus", "r2_minus", "r1_minus"] {
            assert!(csv.contains(series), "missing {series}");
        }
        let unilateral = sample_report("ridge", (0, 512));
        let csv = convergence_traces_csv(&unilateral).unwrap();
        assert!(csv.lines().next().unwrap() == "series,n,estimate");
        assert!(csv.contains("\nr2,"));
    }
}
