//! Visualise stage: derive chart specs from the tables of cited sources.
//!
//! Purely local: profiles each table, selects a chart kind, and emits the
//! spec. Chart names are `<source_id>-t<N>` (1-based table index). A table
//! that cannot be charted becomes a warning, never a stage failure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::core::{ParsedDocument, ReportArtifact, SourceId};
use crate::provenance::first_citation_order;
use crate::viz::{ChartLabels, ChartSpec, emit_chart_spec, profile_dataset, select_chart};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedChart {
    pub name: String,
    pub spec: ChartSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChartBundle {
    pub charts: Vec<NamedChart>,
    pub warnings: Vec<String>,
}

/// Emits one chart per table of every cited source, in first-citation order,
/// attaching each chart ref to the first section citing that source.
pub fn run_visualiser(
    draft: &mut ReportArtifact,
    docs: &BTreeMap<SourceId, ParsedDocument>,
) -> ChartBundle {
    let mut bundle = ChartBundle::default();
    for source_id in first_citation_order(draft) {
        let Some(doc) = docs.get(&source_id) else {
            continue;
        };
        for (i, table) in doc.tables.iter().enumerate() {
            let name = format!("{source_id}-t{}", i + 1);
            let labels = ChartLabels {
                title: format!("{} (table {})", doc.title, i + 1),
                source_table: name.clone(),
            };
            let spec = profile_dataset(table)
                .map(|profile| select_chart(&profile))
                .and_then(|kind| emit_chart_spec(kind, table, &[], &labels));
            match spec {
                Ok(spec) => {
                    let target = draft
                        .sections
                        .iter()
                        .position(|s| s.claims.iter().any(|c| c.sources.contains(&source_id)))
                        .unwrap_or(0);
                    if let Some(section) = draft.sections.get_mut(target) {
                        section.chart_refs.push(name.clone());
                    }
                    bundle.charts.push(NamedChart { name, spec });
                }
                Err(e) => bundle.warnings.push(format!("skipping chart {name}: {e}")),
            }
        }
    }
    bundle
}
