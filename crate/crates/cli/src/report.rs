//! JSON payloads for the analysis verbs. These mirror the library's report
//! types with vertex labels shifted to 1-based, matching every other piece
//! of external IO.

use serde::{Deserialize, Serialize};
use volta_core::concentration::ConcentrationStats;
use volta_core::properness::{PropertyCheck, StructuralChecks, Verdict, Witness};
use volta_core::walk::{MixingApplicability, MixingReport};

pub fn to_json_file(value: &impl Serialize) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    /// Weighted boundary mean: the value interior potentials concentrate on
    /// in the proper regime.
    pub predicted_constant: f64,
    pub interior_count: usize,
    pub interior_mean: f64,
    pub max_dev: f64,
    pub mean_dev: f64,
    pub std_dev: f64,
    pub bins: usize,
    pub histogram: Vec<usize>,
}

impl StatsReport {
    pub fn from_stats(s: &ConcentrationStats) -> Self {
        StatsReport {
            predicted_constant: s.v_bar_c,
            interior_count: s.interior_count,
            interior_mean: s.interior_mean,
            max_dev: s.max_dev,
            mean_dev: s.mean_dev,
            std_dev: s.std_dev,
            bins: s.histogram.len(),
            histogram: s.histogram.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingJson {
    pub t0: usize,
    pub steps: usize,
    pub samples: usize,
    /// 1-based start vertex.
    pub start: usize,
    pub applicability: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
    pub escape_prob: f64,
}

pub fn applicability_label(a: MixingApplicability) -> &'static str {
    match a {
        MixingApplicability::Applicable => "applicable",
        MixingApplicability::ResidualEmpty => "residual-empty",
        MixingApplicability::ResidualDisconnected => "residual-disconnected",
        MixingApplicability::ResidualBipartite => "residual-bipartite",
    }
}

impl MixingJson {
    pub fn from_report(r: &MixingReport) -> Self {
        MixingJson {
            t0: r.t0,
            steps: r.steps,
            samples: r.samples,
            start: r.start + 1,
            applicability: applicability_label(r.applicability).to_string(),
            tv_distance: r.tv_distance,
            escape_prob: r.escape_prob,
        }
    }
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::SampledHolds => "sampled-holds",
        Verdict::Fails => "fails",
        Verdict::Inapplicable => "inapplicable",
    }
}

fn one_based(vs: &[usize]) -> Vec<usize> {
    vs.iter().map(|&v| v + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl CheckJson {
    pub fn from_check(c: &PropertyCheck) -> Self {
        let witness = c.witness.as_ref().map(|w| match w {
            Witness::Disconnected { components } => serde_json::json!({
                "kind": "disconnected",
                "components": components,
            }),
            Witness::CloseCycles { first, second, distance } => serde_json::json!({
                "kind": "close-cycles",
                "first": one_based(first),
                "second": one_based(second),
                "distance": distance,
            }),
            Witness::MissingCycleLength { length } => serde_json::json!({
                "kind": "missing-cycle-length",
                "length": length,
            }),
            Witness::LowExpansion { subset, ratio, bound } => serde_json::json!({
                "kind": "low-expansion",
                "subset": one_based(subset),
                "ratio": ratio,
                "bound": bound,
            }),
            Witness::DegreeOutOfBand { vertex, degree, low, high } => serde_json::json!({
                "kind": "degree-out-of-band",
                "vertex": vertex + 1,
                "degree": degree,
                "low": low,
                "high": high,
            }),
        });
        CheckJson { verdict: verdict_label(c.verdict).to_string(), witness }
    }
}

/// Full audit payload for the `check` verb and the optional audit stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub connected: CheckJson,
    pub cycle_separation: CheckJson,
    pub odd_cycles: CheckJson,
    pub short_cycle_cap: usize,
    pub required_separation: usize,
    pub expansion: CheckJson,
    pub expansion_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_band: Option<CheckJson>,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
}

impl CheckReport {
    pub fn new(
        structure: &StructuralChecks,
        expansion: &PropertyCheck,
        expansion_bound: f64,
        degree_band: Option<&PropertyCheck>,
        delta: f64,
        coefficient: Option<f64>,
    ) -> Self {
        CheckReport {
            connected: CheckJson::from_check(&structure.connected),
            cycle_separation: CheckJson::from_check(&structure.cycle_separation),
            odd_cycles: CheckJson::from_check(&structure.odd_cycles),
            short_cycle_cap: structure.short_cycle_cap,
            required_separation: structure.required_separation,
            expansion: CheckJson::from_check(expansion),
            expansion_bound,
            degree_band: degree_band.map(CheckJson::from_check),
            delta,
            coefficient,
        }
    }

    /// Check-name to verdict pairs, for the manifest summary.
    pub fn verdicts(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("connected".to_string(), self.connected.verdict.clone()),
            ("cycle-separation".to_string(), self.cycle_separation.verdict.clone()),
            ("odd-cycles".to_string(), self.odd_cycles.verdict.clone()),
            ("expansion".to_string(), self.expansion.verdict.clone()),
        ];
        if let Some(db) = &self.degree_band {
            out.push(("degree-band".to_string(), db.verdict.clone()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_labels_are_one_based() {
        let check = PropertyCheck {
            verdict: Verdict::Fails,
            witness: Some(Witness::LowExpansion { subset: vec![0, 4], ratio: 0.1, bound: 1.0 / 6.0 }),
        };
        let json = CheckJson::from_check(&check);
        assert_eq!(json.verdict, "fails");
        let w = json.witness.unwrap();
        assert_eq!(w["subset"], serde_json::json!([1, 5]));
    }

    #[test]
    fn stats_report_mirrors_the_library_struct() {
        let stats = ConcentrationStats {
            v_bar_c: 0.75,
            max_dev: 0.1,
            mean_dev: 0.05,
            std_dev: 0.04,
            histogram: vec![0, 3, 5],
            interior_count: 8,
            interior_mean: 0.74,
        };
        let report = StatsReport::from_stats(&stats);
        assert_eq!(report.predicted_constant, 0.75);
        assert_eq!(report.bins, 3);
        let text = to_json_file(&report).unwrap();
        assert!(text.ends_with('\n'));
        let back: StatsReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn verdict_labels_cover_all_variants() {
        assert_eq!(verdict_label(Verdict::Holds), "holds");
        assert_eq!(verdict_label(Verdict::SampledHolds), "sampled-holds");
        assert_eq!(verdict_label(Verdict::Fails), "fails");
        assert_eq!(verdict_label(Verdict::Inapplicable), "inapplicable");
    }
}
