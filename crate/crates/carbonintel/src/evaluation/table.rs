//! Score tables: CSV ingest/emit, aggregation, and consistency auditing.
//!
//! A table holds integer criterion scores per (topic, label) row plus the
//! row's *stated* total as transcribed, which may disagree with the
//! criterion sum. Stated values are never used in aggregation; they exist
//! so `validate_table` can audit a transcription instead of rejecting it.
//! Published column averages ride along as `AVERAGE` rows and are stored
//! in exact tenths so audits compare without float drift.

use std::collections::BTreeMap;

use crate::evaluation::rubric::{CRITERION_COUNT, CRITERION_MAX, Rubric, TOTAL_MAX};
use crate::evaluation::score::ScoreRecord;
use crate::evaluation::EvalError;

pub const SCORE_CSV_HEADER: &str =
    "topic,report,source_coverage,data_accuracy,citation_quality,report_coherence,total";

/// Topic marker for a stated-averages row.
pub const AVERAGE_TOPIC: &str = "AVERAGE";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRow {
    pub topic: String,
    pub label: String,
    pub scores: [u8; CRITERION_COUNT],
    /// Total as transcribed; only `validate_table` reads it.
    pub stated_total: u16,
}

/// Column averages as published, in tenths (92.4 is stored as 924).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatedAverages {
    pub label: String,
    pub criteria_tenths: [i64; CRITERION_COUNT],
    pub total_tenths: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    pub stated_averages: Vec<StatedAverages>,
}

/// Parses "92.4" or "92" into exact tenths. At most one decimal digit.
fn parse_tenths(text: &str) -> Result<i64, String> {
    let t = text.trim();
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, "0"),
    };
    if int_part.is_empty()
        || frac_part.len() != 1
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(format!(
            "stated average {t:?} must be a non-negative number with at most one decimal place"
        ));
    }
    let int: i64 = int_part
        .parse()
        .map_err(|_| format!("stated average {t:?} out of range"))?;
    let frac: i64 = frac_part.parse().expect("single digit");
    Ok(int * 10 + frac)
}

fn fmt_tenths(tenths: i64) -> String {
    let sign = if tenths < 0 { "-" } else { "" };
    let abs = tenths.abs();
    format!("{sign}{}.{}", abs / 10, abs % 10)
}

impl ScoreTable {
    /// Column names are fixed by `SCORE_CSV_HEADER`. Rows whose topic is
    /// `AVERAGE` carry stated column averages; all others carry integer
    /// criterion scores.
    pub fn from_csv(text: &str) -> Result<Self, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| EvalError::Table(format!("unreadable header: {e}")))?
            .clone();
        let expected: Vec<&str> = SCORE_CSV_HEADER.split(',').collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(EvalError::Table(format!(
                "header must be {SCORE_CSV_HEADER:?}, found {:?}",
                got.join(",")
            )));
        }
        let mut table = ScoreTable::default();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record =
                record.map_err(|e| EvalError::Table(format!("line {line}: {e}")))?;
            if record.len() != expected.len() {
                return Err(EvalError::Table(format!(
                    "line {line}: expected {} fields, found {}",
                    expected.len(),
                    record.len()
                )));
            }
            let topic = record[0].trim().to_owned();
            let label = record[1].trim().to_owned();
            if label.is_empty() {
                return Err(EvalError::Table(format!("line {line}: empty report label")));
            }
            if topic == AVERAGE_TOPIC {
                let mut criteria_tenths = [0i64; CRITERION_COUNT];
                for (c, slot) in criteria_tenths.iter_mut().enumerate() {
                    *slot = parse_tenths(&record[2 + c])
                        .map_err(|e| EvalError::Table(format!("line {line}: {e}")))?;
                }
                let total_tenths = parse_tenths(&record[6])
                    .map_err(|e| EvalError::Table(format!("line {line}: {e}")))?;
                table.stated_averages.push(StatedAverages {
                    label,
                    criteria_tenths,
                    total_tenths,
                });
                continue;
            }
            if topic.is_empty() {
                return Err(EvalError::Table(format!("line {line}: empty topic")));
            }
            let mut scores = [0u8; CRITERION_COUNT];
            for (c, slot) in scores.iter_mut().enumerate() {
                let raw = record[2 + c].trim();
                let value: i64 = raw.parse().map_err(|_| {
                    EvalError::Table(format!("line {line}: score {raw:?} is not an integer"))
                })?;
                if !(0..=CRITERION_MAX as i64).contains(&value) {
                    return Err(EvalError::Table(format!(
                        "line {line}: score {value} outside 0..={CRITERION_MAX}"
                    )));
                }
                *slot = value as u8;
            }
            let raw_total = record[6].trim();
            let stated: i64 = raw_total.parse().map_err(|_| {
                EvalError::Table(format!(
                    "line {line}: stated total {raw_total:?} is not an integer"
                ))
            })?;
            if !(0..=TOTAL_MAX as i64).contains(&stated) {
                return Err(EvalError::Table(format!(
                    "line {line}: stated total {stated} outside 0..={TOTAL_MAX}"
                )));
            }
            table.rows.push(ScoreRow {
                topic,
                label,
                scores,
                stated_total: stated as u16,
            });
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer
            .write_record(SCORE_CSV_HEADER.split(','))
            .expect("writing to memory");
        for row in &self.rows {
            let mut record = vec![row.topic.clone(), row.label.clone()];
            record.extend(row.scores.iter().map(|s| s.to_string()));
            record.push(row.stated_total.to_string());
            writer.write_record(&record).expect("writing to memory");
        }
        for avg in &self.stated_averages {
            let mut record = vec![AVERAGE_TOPIC.to_owned(), avg.label.clone()];
            record.extend(avg.criteria_tenths.iter().map(|t| fmt_tenths(*t)));
            record.push(fmt_tenths(avg.total_tenths));
            writer.write_record(&record).expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("writing to memory"))
            .expect("csv output is UTF-8")
    }

    /// Builds rows from persona score records: one row per record, topic
    /// shared, stated total = recomputed total (nothing to audit).
    pub fn from_records(topic: &str, records: &[ScoreRecord]) -> Self {
        let rows = records
            .iter()
            .map(|r| ScoreRow {
                topic: format!("{topic} [{persona}]", persona = r.persona),
                label: r.label.clone(),
                scores: r.scores,
                stated_total: r.total as u16,
            })
            .collect();
        ScoreTable {
            rows,
            stated_averages: Vec::new(),
        }
    }
}

/// Per-label means, rounded half-up to one decimal for display. Exact
/// integer sums drive every computation; floats appear only at the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMeans {
    pub label: String,
    pub rows: usize,
    pub criterion_means: [f64; CRITERION_COUNT],
    /// Mean of recomputed row totals (criterion sums).
    pub recomputed_total_mean: f64,
    /// Mean of the stated totals column, reported so published summary
    /// rows can be reproduced; aggregation itself never consumes it.
    pub stated_total_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanDifference {
    /// (minuend, subtrahend) labels in first-appearance order.
    pub labels: (String, String),
    pub criterion: [f64; CRITERION_COUNT],
    pub recomputed_total: f64,
    pub stated_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// Labels in order of first appearance in the table.
    pub per_label: Vec<LabelMeans>,
    /// Present only when the table holds exactly two labels.
    pub difference: Option<MeanDifference>,
}

/// sum/count rounded half-up to one decimal; ties go toward positive
/// infinity. Exact in integers until the final division by ten.
fn round_tenths(sum: i128, count: i128) -> f64 {
    debug_assert!(count > 0);
    let scaled = sum * 10;
    let mut q = scaled.div_euclid(count);
    let r = scaled.rem_euclid(count);
    if 2 * r >= count {
        q += 1;
    }
    q as f64 / 10.0
}

/// Difference of two exact means, rounded half-up to one decimal.
fn diff_tenths(sum_a: i128, count_a: i128, sum_b: i128, count_b: i128) -> f64 {
    round_tenths(sum_a * count_b - sum_b * count_a, count_a * count_b)
}

#[derive(Default, Clone, Copy)]
struct LabelSums {
    criteria: [i64; CRITERION_COUNT],
    recomputed_total: i64,
    stated_total: i64,
    count: i64,
}

fn sums_by_label(table: &ScoreTable) -> Vec<(String, LabelSums)> {
    let mut order: Vec<String> = Vec::new();
    let mut sums: BTreeMap<String, LabelSums> = BTreeMap::new();
    for row in &table.rows {
        if !sums.contains_key(&row.label) {
            order.push(row.label.clone());
        }
        let entry = sums.entry(row.label.clone()).or_default();
        for (i, s) in row.scores.iter().enumerate() {
            entry.criteria[i] += *s as i64;
        }
        entry.recomputed_total += row.scores.iter().map(|s| *s as i64).sum::<i64>();
        entry.stated_total += row.stated_total as i64;
        entry.count += 1;
    }
    order
        .into_iter()
        .map(|label| {
            let s = sums[&label];
            (label, s)
        })
        .collect()
}

/// Means per label over all topics, plus the first-minus-second
/// difference when exactly two labels are present.
pub fn aggregate(table: &ScoreTable) -> Result<Aggregate, EvalError> {
    if table.rows.is_empty() {
        return Err(EvalError::Table("cannot aggregate an empty table".into()));
    }
    let sums = sums_by_label(table);
    let per_label: Vec<LabelMeans> = sums
        .iter()
        .map(|(label, s)| LabelMeans {
            label: label.clone(),
            rows: s.count as usize,
            criterion_means: std::array::from_fn(|i| {
                round_tenths(s.criteria[i] as i128, s.count as i128)
            }),
            recomputed_total_mean: round_tenths(s.recomputed_total as i128, s.count as i128),
            stated_total_mean: round_tenths(s.stated_total as i128, s.count as i128),
        })
        .collect();
    let difference = match &sums[..] {
        [(label_a, a), (label_b, b)] => Some(MeanDifference {
            labels: (label_a.clone(), label_b.clone()),
            criterion: std::array::from_fn(|i| {
                diff_tenths(
                    a.criteria[i] as i128,
                    a.count as i128,
                    b.criteria[i] as i128,
                    b.count as i128,
                )
            }),
            recomputed_total: diff_tenths(
                a.recomputed_total as i128,
                a.count as i128,
                b.recomputed_total as i128,
                b.count as i128,
            ),
            stated_total: diff_tenths(
                a.stated_total as i128,
                a.count as i128,
                b.stated_total as i128,
                b.count as i128,
            ),
        }),
        _ => None,
    };
    Ok(Aggregate {
        per_label,
        difference,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inconsistency {
    /// Criterion scores do not sum to the transcribed total.
    RowSum {
        topic: String,
        label: String,
        criterion_sum: u16,
        stated_total: u16,
    },
    /// A stated column average differs from the recomputed mean by more
    /// than 0.05.
    ColumnAverage {
        label: String,
        column: String,
        stated_tenths: i64,
        recomputed_tenths: i64,
    },
}

impl std::fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inconsistency::RowSum {
                topic,
                label,
                criterion_sum,
                stated_total,
            } => write!(
                f,
                "row {topic:?} / {label}: criterion sum {criterion_sum} differs from stated \
                 total {stated_total}"
            ),
            Inconsistency::ColumnAverage {
                label,
                column,
                stated_tenths,
                recomputed_tenths,
            } => write!(
                f,
                "column {column} / {label}: stated average {} differs from recomputed {}",
                fmt_tenths(*stated_tenths),
                fmt_tenths(*recomputed_tenths)
            ),
        }
    }
}

/// `|stated/10 - sum/count| > 0.05`, carried out in integers.
fn average_disagrees(stated_tenths: i64, sum: i64, count: i64) -> bool {
    2 * (stated_tenths * count - 10 * sum).abs() > count
}

/// Flags every row whose criterion scores do not sum to its stated total
/// and every stated column average off the recomputed mean by more than
/// 0.05. Stated averages with no matching data rows cannot be recomputed
/// and are flagged against a recomputed value of zero.
pub fn validate_table(table: &ScoreTable) -> Vec<Inconsistency> {
    let mut flags = Vec::new();
    for row in &table.rows {
        let sum: u16 = row.scores.iter().map(|s| *s as u16).sum();
        if sum != row.stated_total {
            flags.push(Inconsistency::RowSum {
                topic: row.topic.clone(),
                label: row.label.clone(),
                criterion_sum: sum,
                stated_total: row.stated_total,
            });
        }
    }
    let sums: BTreeMap<String, LabelSums> = sums_by_label(table).into_iter().collect();
    let names = Rubric::standard().names();
    for stated in &table.stated_averages {
        let Some(s) = sums.get(&stated.label) else {
            for (i, name) in names.iter().enumerate() {
                flags.push(Inconsistency::ColumnAverage {
                    label: stated.label.clone(),
                    column: (*name).to_owned(),
                    stated_tenths: stated.criteria_tenths[i],
                    recomputed_tenths: 0,
                });
            }
            flags.push(Inconsistency::ColumnAverage {
                label: stated.label.clone(),
                column: "Total".to_owned(),
                stated_tenths: stated.total_tenths,
                recomputed_tenths: 0,
            });
            continue;
        };
        for (i, name) in names.iter().enumerate() {
            if average_disagrees(stated.criteria_tenths[i], s.criteria[i], s.count) {
                flags.push(Inconsistency::ColumnAverage {
                    label: stated.label.clone(),
                    column: (*name).to_owned(),
                    stated_tenths: stated.criteria_tenths[i],
                    recomputed_tenths: (round_tenths(s.criteria[i] as i128, s.count as i128)
                        * 10.0)
                        .round() as i64,
                });
            }
        }
        if average_disagrees(stated.total_tenths, s.stated_total, s.count) {
            flags.push(Inconsistency::ColumnAverage {
                label: stated.label.clone(),
                column: "Total".to_owned(),
                stated_tenths: stated.total_tenths,
                recomputed_tenths: (round_tenths(s.stated_total as i128, s.count as i128) * 10.0)
                    .round() as i64,
            });
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = include_str!("../../../../data/table1.csv");

    fn table1() -> ScoreTable {
        ScoreTable::from_csv(TABLE1).unwrap()
    }

    #[test]
    fn transcription_parses_to_twenty_rows_and_two_average_rows() {
        let t = table1();
        assert_eq!(t.rows.len(), 20);
        assert_eq!(t.stated_averages.len(), 2);
        assert_eq!(t.rows[0].scores, [23, 22, 23, 23]);
        assert_eq!(t.rows[0].stated_total, 91);
    }

    #[test]
    fn aggregate_reproduces_the_published_total_means() {
        let agg = aggregate(&table1()).unwrap();
        assert_eq!(agg.per_label.len(), 2);
        let r1 = &agg.per_label[0];
        let r2 = &agg.per_label[1];
        assert_eq!(r1.label, "Report 1");
        assert_eq!(r1.stated_total_mean, 92.4);
        assert_eq!(r2.stated_total_mean, 66.8);
        let diff = agg.difference.as_ref().unwrap();
        assert_eq!(diff.stated_total, 25.6);
    }

    #[test]
    fn recomputed_totals_differ_from_the_published_ones() {
        // The transcription itself is internally inconsistent: criterion
        // sums give different totals than the stated column.
        let agg = aggregate(&table1()).unwrap();
        assert_eq!(agg.per_label[0].recomputed_total_mean, 92.2);
        assert_eq!(agg.per_label[1].recomputed_total_mean, 66.1);
        assert_eq!(agg.difference.as_ref().unwrap().recomputed_total, 26.1);
    }

    #[test]
    fn criterion_means_match_hand_recomputation() {
        let agg = aggregate(&table1()).unwrap();
        assert_eq!(agg.per_label[0].criterion_means, [22.7, 22.4, 23.5, 23.6]);
        assert_eq!(agg.per_label[1].criterion_means, [16.5, 17.9, 14.5, 17.2]);
    }

    #[test]
    fn audit_flags_exactly_the_inconsistent_rows_and_columns() {
        let flags = validate_table(&table1());
        let row_flags: Vec<(String, String, u16, u16)> = flags
            .iter()
            .filter_map(|f| match f {
                Inconsistency::RowSum {
                    topic,
                    label,
                    criterion_sum,
                    stated_total,
                } => Some((topic.clone(), label.clone(), *criterion_sum, *stated_total)),
                _ => None,
            })
            .collect();
        assert_eq!(row_flags.len(), 4, "{row_flags:?}");
        assert!(row_flags.iter().any(|(t, l, sum, stated)| t.starts_with("World Bank")
            && l == "Report 1"
            && *sum == 90
            && *stated == 89));
        assert!(row_flags.iter().any(|(t, l, sum, stated)| t.starts_with("Watershed")
            && l == "Report 1"
            && *sum == 92
            && *stated == 96));
        assert!(row_flags.iter().any(|(t, l, sum, stated)| t.starts_with("South Korea")
            && l == "Report 1"
            && *sum == 95
            && *stated == 94));
        assert!(row_flags.iter().any(|(t, l, sum, stated)| t.starts_with("Japan")
            && l == "Report 2"
            && *sum == 61
            && *stated == 68));

        let column_flags: Vec<(String, String)> = flags
            .iter()
            .filter_map(|f| match f {
                Inconsistency::ColumnAverage { label, column, .. } => {
                    Some((label.clone(), column.clone()))
                }
                _ => None,
            })
            .collect();
        let expected = [
            ("Report 1", "Source Coverage"),
            ("Report 1", "Data Accuracy"),
            ("Report 1", "Citation Quality"),
            ("Report 1", "Report Coherence"),
            ("Report 2", "Data Accuracy"),
            ("Report 2", "Citation Quality"),
        ];
        assert_eq!(column_flags.len(), expected.len(), "{column_flags:?}");
        for (label, column) in expected {
            assert!(
                column_flags.contains(&(label.to_owned(), column.to_owned())),
                "missing flag {label}/{column}"
            );
        }
        // The stated total averages and two criterion averages agree.
        assert!(!column_flags.contains(&("Report 1".into(), "Total".into())));
        assert!(!column_flags.contains(&("Report 2".into(), "Total".into())));
        assert!(!column_flags.contains(&("Report 2".into(), "Source Coverage".into())));
        assert!(!column_flags.contains(&("Report 2".into(), "Report Coherence".into())));
    }

    #[test]
    fn consistent_single_row_is_clean() {
        let table = ScoreTable {
            rows: vec![ScoreRow {
                topic: "Brazil emissions cap".into(),
                label: "Report 1".into(),
                scores: [23, 22, 23, 23],
                stated_total: 91,
            }],
            stated_averages: Vec::new(),
        };
        assert!(validate_table(&table).is_empty());
        let agg = aggregate(&table).unwrap();
        assert_eq!(agg.per_label[0].criterion_means, [23.0, 22.0, 23.0, 23.0]);
        assert_eq!(agg.per_label[0].recomputed_total_mean, 91.0);
        assert!(agg.difference.is_none(), "one label, no difference");
    }

    #[test]
    fn empty_table_audits_clean_but_does_not_aggregate() {
        let table = ScoreTable::default();
        assert!(validate_table(&table).is_empty());
        assert!(aggregate(&table).is_err());
    }

    #[test]
    fn two_rows_for_one_label_average_per_criterion() {
        let row = |scores: [u8; 4], total: u16| ScoreRow {
            topic: "t".into(),
            label: "Report 1".into(),
            scores,
            stated_total: total,
        };
        let table = ScoreTable {
            rows: vec![row([20, 20, 20, 20], 80), row([10, 10, 10, 10], 40)],
            stated_averages: Vec::new(),
        };
        let agg = aggregate(&table).unwrap();
        assert_eq!(agg.per_label[0].criterion_means, [15.0, 15.0, 15.0, 15.0]);
        assert_eq!(agg.per_label[0].recomputed_total_mean, 60.0);
    }

    #[test]
    fn aggregate_is_invariant_under_row_permutation_and_duplication() {
        let base = table1();
        let agg = aggregate(&base).unwrap();

        let mut reversed = base.clone();
        reversed.rows.reverse();
        assert_eq!(aggregate(&reversed).unwrap(), agg);

        let mut doubled = base.clone();
        doubled.rows.extend(base.rows.clone());
        let doubled_agg = aggregate(&doubled).unwrap();
        for (a, b) in agg.per_label.iter().zip(&doubled_agg.per_label) {
            assert_eq!(a.criterion_means, b.criterion_means);
            assert_eq!(a.recomputed_total_mean, b.recomputed_total_mean);
            assert_eq!(a.stated_total_mean, b.stated_total_mean);
            assert_eq!(b.rows, a.rows * 2);
        }
    }

    #[test]
    fn rounding_is_half_up_at_one_decimal() {
        assert_eq!(round_tenths(1, 20), 0.1, "0.05 rounds up");
        assert_eq!(round_tenths(-1, 20), 0.0, "-0.05 rounds toward positive");
        assert_eq!(round_tenths(224, 10), 22.4);
        assert_eq!(round_tenths(1, 3), 0.3);
        assert_eq!(round_tenths(2, 3), 0.7, "0.666 rounds to 0.7");
        assert_eq!(diff_tenths(924, 10, 668, 10), 25.6);
    }

    #[test]
    fn csv_round_trips() {
        let t = table1();
        let emitted = t.to_csv();
        let reparsed = ScoreTable::from_csv(&emitted).unwrap();
        assert_eq!(reparsed, t);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let bad = format!("{SCORE_CSV_HEADER}\nBrazil,Report 1,23,22,23,ninety,91\n");
        let err = ScoreTable::from_csv(&bad).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let out_of_range = format!("{SCORE_CSV_HEADER}\nBrazil,Report 1,26,22,23,23,94\n");
        let err = ScoreTable::from_csv(&out_of_range).unwrap_err();
        assert!(err.to_string().contains("outside 0..=25"), "{err}");
        let bad_header = "a,b,c\nx,y,z\n";
        let err = ScoreTable::from_csv(bad_header).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn from_records_tags_topics_with_persona_names() {
        let records = vec![
            ScoreRecord {
                persona: "Economist".into(),
                label: "Report A".into(),
                scores: [20, 21, 22, 23],
                total: 86,
            },
            ScoreRecord {
                persona: "Economist".into(),
                label: "Report B".into(),
                scores: [10, 11, 12, 13],
                total: 46,
            },
        ];
        let table = ScoreTable::from_records("carbon prices", &records);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].topic, "carbon prices [Economist]");
        assert!(validate_table(&table).is_empty());
        let agg = aggregate(&table).unwrap();
        assert_eq!(
            agg.difference.as_ref().unwrap().labels,
            ("Report A".to_owned(), "Report B".to_owned())
        );
        assert_eq!(agg.difference.as_ref().unwrap().recomputed_total, 40.0);
    }
}
