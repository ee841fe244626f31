//! Chart-type selection and renderer-agnostic chart-spec emission.
//!
//! A dataset is profiled from its typed cells, a chart kind is picked by
//! a first-match rule table, and a versioned spec document is emitted.
//! Specs carry data and labels only; no plotting toolkit is chosen here.
//! Emission never alters cell values: numbers pass through as the same
//! IEEE doubles the table holds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Cell, Table};
use crate::semantic::RelationTriple;

/// Schema version stamped into every emitted spec document.
pub const CHART_SPEC_VERSION: u32 = 1;

/// Bars stay legible up to this many categories; beyond it the rule
/// table falls through to a plain table rendering.
pub const BAR_CARDINALITY_CAP: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum VizError {
    #[error("table has no rows or no headers")]
    EmptyTable,
    #[error("{kind} chart cannot be built from this input: {detail}")]
    PayloadMismatch { kind: ChartKind, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub kind: ColumnKind,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub row_count: usize,
    pub columns: Vec<ColumnProfile>,
    pub has_time_axis: bool,
    pub relation_triples: bool,
}

impl DatasetProfile {
    /// Mark that relation triples accompany this dataset. The table alone
    /// cannot know; the caller supplies extraction results.
    pub fn with_relation_triples(mut self, present: bool) -> Self {
        self.relation_triples = present;
        self
    }
}

/// Column kind is decided by the typed cells alone: all dates makes a
/// temporal column, all numbers a numeric one, anything mixed (or any
/// text) is categorical. Cardinality counts distinct rendered values.
pub fn profile_dataset(table: &Table) -> Result<DatasetProfile, VizError> {
    if table.headers.is_empty() || table.rows.is_empty() {
        return Err(VizError::EmptyTable);
    }
    let mut columns = Vec::with_capacity(table.headers.len());
    for (index, name) in table.headers.iter().enumerate() {
        let cells: Vec<&Cell> = table.rows.iter().map(|r| &r[index]).collect();
        let kind = if cells.iter().all(|c| matches!(c, Cell::Date(_))) {
            ColumnKind::Temporal
        } else if cells.iter().all(|c| matches!(c, Cell::Number(_))) {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        };
        let distinct: std::collections::BTreeSet<String> =
            cells.iter().map(|c| c.display_text()).collect();
        columns.push(ColumnProfile {
            name: name.clone(),
            kind,
            cardinality: distinct.len(),
        });
    }
    let has_time_axis = columns.iter().any(|c| c.kind == ColumnKind::Temporal);
    Ok(DatasetProfile {
        row_count: table.rows.len(),
        columns,
        has_time_axis,
        relation_triples: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Line,
    Bar,
    Heatmap,
    Network,
    Table,
}

impl std::fmt::Display for ChartKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChartKind::Line => "line",
            ChartKind::Bar => "bar",
            ChartKind::Heatmap => "heatmap",
            ChartKind::Network => "network",
            ChartKind::Table => "table",
        })
    }
}

/// First-match rule table. Total: every profile selects something.
pub fn select_chart(profile: &DatasetProfile) -> ChartKind {
    let numeric = profile
        .columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .count();
    let categoricals: Vec<&ColumnProfile> = profile
        .columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Categorical)
        .collect();
    if profile.relation_triples {
        return ChartKind::Network;
    }
    if profile.has_time_axis && numeric >= 1 {
        return ChartKind::Line;
    }
    if categoricals.len() == 1 && numeric >= 1 && categoricals[0].cardinality <= BAR_CARDINALITY_CAP
    {
        return ChartKind::Bar;
    }
    if categoricals.len() == 2 && numeric >= 1 {
        return ChartKind::Heatmap;
    }
    ChartKind::Table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<String>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub label: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "payload_kind")]
pub enum ChartPayload {
    /// Line and bar charts: one series per numeric column.
    Series { series: Vec<Series> },
    /// Heatmaps: values[i][j] belongs to (y_categories[i], x_categories[j]).
    Matrix {
        x_categories: Vec<String>,
        y_categories: Vec<String>,
        values: Vec<Vec<f64>>,
    },
    /// Network graphs: nodes in first-appearance order, one edge per triple.
    Graph { nodes: Vec<String>, edges: Vec<Edge> },
    /// Fallback: the table itself, cells rendered to text.
    Rows {
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub version: u32,
    pub kind: ChartKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Which registered table this was drawn from, e.g. "src-1c9a.../table 1".
    pub source_table: String,
    pub payload: ChartPayload,
}

impl ChartSpec {
    /// Kind-specific payload must be present and internally consistent.
    pub fn validate(&self) -> Result<(), VizError> {
        let mismatch = |detail: &str| VizError::PayloadMismatch {
            kind: self.kind,
            detail: detail.to_owned(),
        };
        match (&self.kind, &self.payload) {
            (ChartKind::Line | ChartKind::Bar, ChartPayload::Series { series }) => {
                if series.is_empty() {
                    return Err(mismatch("at least one series required"));
                }
                for s in series {
                    if s.x.len() != s.y.len() {
                        return Err(mismatch("series x and y lengths differ"));
                    }
                }
                Ok(())
            }
            (ChartKind::Heatmap, ChartPayload::Matrix { x_categories, y_categories, values }) => {
                if values.len() != y_categories.len()
                    || values.iter().any(|row| row.len() != x_categories.len())
                {
                    return Err(mismatch("matrix shape differs from category axes"));
                }
                Ok(())
            }
            (ChartKind::Network, ChartPayload::Graph { nodes, edges }) => {
                for e in edges {
                    if !nodes.contains(&e.source) || !nodes.contains(&e.target) {
                        return Err(mismatch("edge endpoint missing from node list"));
                    }
                }
                Ok(())
            }
            (ChartKind::Table, ChartPayload::Rows { headers, rows }) => {
                if rows.iter().any(|r| r.len() != headers.len()) {
                    return Err(mismatch("row width differs from header count"));
                }
                Ok(())
            }
            _ => Err(mismatch("payload does not match chart kind")),
        }
    }
}

/// Presentation inputs the table cannot supply.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChartLabels {
    pub title: String,
    pub source_table: String,
}

fn column_values(table: &Table, index: usize) -> Vec<String> {
    table.rows.iter().map(|r| r[index].display_text()).collect()
}

fn first_of_kind(profile: &DatasetProfile, kind: ColumnKind) -> Option<usize> {
    profile.columns.iter().position(|c| c.kind == kind)
}

/// Build the spec document for a previously selected kind. Network charts
/// read the relation triples; every other kind reads the table. The
/// profile must describe `table` (pass the one `select_chart` saw).
pub fn emit_chart_spec(
    kind: ChartKind,
    table: &Table,
    triples: &[RelationTriple],
    labels: &ChartLabels,
) -> Result<ChartSpec, VizError> {
    let profile = profile_dataset(table)?;
    let mismatch = |detail: &str| VizError::PayloadMismatch {
        kind,
        detail: detail.to_owned(),
    };
    let numeric_columns: Vec<usize> = profile
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Numeric)
        .map(|(i, _)| i)
        .collect();
    let series_over = |x_index: usize| -> Vec<Series> {
        let x = column_values(table, x_index);
        numeric_columns
            .iter()
            .map(|&col| Series {
                name: table.headers[col].clone(),
                x: x.clone(),
                y: table
                    .rows
                    .iter()
                    .map(|r| r[col].as_number().expect("numeric column"))
                    .collect(),
            })
            .collect()
    };
    let (x_label, y_label, payload) = match kind {
        ChartKind::Line => {
            let x_index = first_of_kind(&profile, ColumnKind::Temporal)
                .ok_or_else(|| mismatch("no temporal column"))?;
            if numeric_columns.is_empty() {
                return Err(mismatch("no numeric column"));
            }
            (
                table.headers[x_index].clone(),
                table.headers[numeric_columns[0]].clone(),
                ChartPayload::Series { series: series_over(x_index) },
            )
        }
        ChartKind::Bar => {
            let x_index = first_of_kind(&profile, ColumnKind::Categorical)
                .ok_or_else(|| mismatch("no categorical column"))?;
            if numeric_columns.is_empty() {
                return Err(mismatch("no numeric column"));
            }
            (
                table.headers[x_index].clone(),
                table.headers[numeric_columns[0]].clone(),
                ChartPayload::Series { series: series_over(x_index) },
            )
        }
        ChartKind::Heatmap => {
            let cats: Vec<usize> = profile
                .columns
                .iter()
                .enumerate()
                .filter(|(_, c)| c.kind == ColumnKind::Categorical)
                .map(|(i, _)| i)
                .collect();
            if cats.len() < 2 {
                return Err(mismatch("two categorical columns required"));
            }
            let value_col = *numeric_columns
                .first()
                .ok_or_else(|| mismatch("no numeric column"))?;
            let (y_col, x_col) = (cats[0], cats[1]);
            let mut y_categories: Vec<String> = Vec::new();
            let mut x_categories: Vec<String> = Vec::new();
            for row in &table.rows {
                let y = row[y_col].display_text();
                let x = row[x_col].display_text();
                if !y_categories.contains(&y) {
                    y_categories.push(y);
                }
                if !x_categories.contains(&x) {
                    x_categories.push(x);
                }
            }
            // Unobserved pairs render as 0; later duplicates overwrite.
            let mut values = vec![vec![0.0; x_categories.len()]; y_categories.len()];
            for row in &table.rows {
                let yi = y_categories
                    .iter()
                    .position(|v| *v == row[y_col].display_text())
                    .expect("collected above");
                let xi = x_categories
                    .iter()
                    .position(|v| *v == row[x_col].display_text())
                    .expect("collected above");
                values[yi][xi] = row[value_col].as_number().expect("numeric column");
            }
            (
                table.headers[x_col].clone(),
                table.headers[y_col].clone(),
                ChartPayload::Matrix { x_categories, y_categories, values },
            )
        }
        ChartKind::Network => {
            if triples.is_empty() {
                return Err(mismatch("no relation triples supplied"));
            }
            let mut nodes: Vec<String> = Vec::new();
            let mut edges = Vec::new();
            for t in triples {
                for endpoint in [&t.subject.normalized, &t.object.normalized] {
                    if !nodes.contains(endpoint) {
                        nodes.push(endpoint.clone());
                    }
                }
                edges.push(Edge {
                    source: t.subject.normalized.clone(),
                    target: t.object.normalized.clone(),
                    label: t.predicate.clone(),
                    weight: t.confidence,
                });
            }
            (
                String::new(),
                String::new(),
                ChartPayload::Graph { nodes, edges },
            )
        }
        ChartKind::Table => (
            String::new(),
            String::new(),
            ChartPayload::Rows {
                headers: table.headers.clone(),
                rows: table
                    .rows
                    .iter()
                    .map(|r| r.iter().map(Cell::display_text).collect())
                    .collect(),
            },
        ),
    };
    let spec = ChartSpec {
        version: CHART_SPEC_VERSION,
        kind,
        title: labels.title.clone(),
        x_label,
        y_label,
        source_table: labels.source_table.clone(),
        payload,
    };
    spec.validate()?;
    Ok(spec)
}
