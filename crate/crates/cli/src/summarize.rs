//! Group-by summaries of sweep CSVs: median and interquartile range of
//! the excess risk and normalized KL columns, as a plot-ready CSV.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::io::Write;

use crate::format_float;

const VALUE_COLUMNS: [&str; 2] = ["excess_risk_rel", "kl_normalized"];

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug)]
pub struct SummaryTable {
    pub keys: Vec<String>,
    /// Sorted rows: key values, count, then (median, iqr) per value column.
    pub rows: Vec<(Vec<String>, usize, Vec<(f64, f64)>)>,
}

impl SummaryTable {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header: Vec<String> = self.keys.clone();
        header.push("count".into());
        for col in VALUE_COLUMNS {
            header.push(format!("{col}_median"));
            header.push(format!("{col}_iqr"));
        }
        writeln!(w, "{}", header.join(","))?;
        for (key_vals, count, stats) in &self.rows {
            let mut fields = key_vals.clone();
            fields.push(count.to_string());
            for &(med, iqr) in stats {
                fields.push(format_float(med));
                fields.push(format_float(iqr));
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Sort key that orders numerically when the string parses as a number.
fn sort_key(vals: &[String]) -> Vec<(u8, f64, String)> {
    vals.iter()
        .map(|v| match v.parse::<f64>() {
            Ok(x) => (0u8, x, String::new()),
            Err(_) => (1u8, 0.0, v.clone()),
        })
        .collect()
}

pub fn summarize(csv_text: &str, by: &[String]) -> Result<SummaryTable> {
    if by.is_empty() {
        bail!("at least one group key is required");
    }
    let mut lines = csv_text.lines();
    let header = lines.next().context("empty CSV")?;
    let columns: Vec<&str> = header.split(',').collect();
    let col_index = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .with_context(|| format!("schema mismatch: missing column '{name}'"))
    };
    let key_idx: Vec<usize> = by.iter().map(|k| col_index(k)).collect::<Result<_>>()?;
    let val_idx: Vec<usize> = VALUE_COLUMNS.iter().map(|c| col_index(c)).collect::<Result<_>>()?;

    let mut groups: BTreeMap<Vec<String>, Vec<Vec<f64>>> = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            bail!("row {} has {} fields, header has {}", lineno + 2, fields.len(), columns.len());
        }
        let key: Vec<String> = key_idx.iter().map(|&i| fields[i].to_string()).collect();
        let entry = groups.entry(key).or_insert_with(|| vec![Vec::new(); VALUE_COLUMNS.len()]);
        for (slot, &i) in entry.iter_mut().zip(&val_idx) {
            let v: f64 = fields[i]
                .parse()
                .with_context(|| format!("row {}: bad float '{}'", lineno + 2, fields[i]))?;
            slot.push(v);
        }
    }

    let mut rows = Vec::new();
    for (key, value_sets) in groups {
        let mut stats = Vec::new();
        let mut count = 0usize;
        let mut empty = false;
        for mut vals in value_sets {
            vals.retain(|v| v.is_finite());
            if vals.is_empty() {
                empty = true;
                break;
            }
            vals.sort_by(f64::total_cmp);
            count = vals.len();
            let med = quantile(&vals, 0.5);
            let iqr = quantile(&vals, 0.75) - quantile(&vals, 0.25);
            stats.push((med, iqr));
        }
        if empty {
            eprintln!("warning: group {key:?} has no finite values; row omitted");
            continue;
        }
        rows.push((key, count, stats));
    }
    rows.sort_by(|a, b| sort_key(&a.0).partial_cmp(&sort_key(&b.0)).expect("total order"));
    Ok(SummaryTable { keys: by.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "\
beta,n,excess_risk_rel,kl_normalized
3,100,1,10
3,100,2,20
3,100,3,30
3,400,0.5,5
";

    #[test]
    fn median_of_three() {
        let t = summarize(CSV, &["beta".into(), "n".into()]).unwrap();
        assert_eq!(t.rows.len(), 2);
        let (key, count, stats) = &t.rows[0];
        assert_eq!(key, &vec!["3".to_string(), "100".to_string()]);
        assert_eq!(*count, 3);
        assert_eq!(stats[0].0, 2.0);
        assert_eq!(stats[1].0, 20.0);
    }

    #[test]
    fn numeric_sorting_of_groups() {
        let csv = "n,excess_risk_rel,kl_normalized\n400,1,1\n50,1,1\n100,1,1\n";
        let t = summarize(csv, &["n".into()]).unwrap();
        let ns: Vec<&str> = t.rows.iter().map(|r| r.0[0].as_str()).collect();
        assert_eq!(ns, vec!["50", "100", "400"]);
    }

    #[test]
    fn missing_column_named_in_error() {
        let err = summarize("a,b\n1,2\n", &["a".into()]).unwrap_err();
        assert!(err.to_string().contains("excess_risk_rel"));
    }

    #[test]
    fn all_nan_group_is_omitted() {
        let csv = "n,excess_risk_rel,kl_normalized\n100,NaN,NaN\n200,1,2\n";
        let t = summarize(csv, &["n".into()]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].0, vec!["200".to_string()]);
    }

    #[test]
    fn row_order_does_not_change_medians() {
        let forward = summarize(CSV, &["n".into()]).unwrap();
        let mut lines: Vec<&str> = CSV.trim_end().lines().collect();
        let (head, body) = lines.split_at_mut(1);
        body.reverse();
        let reversed = format!("{}\n{}\n", head[0], body.join("\n"));
        let backward = summarize(&reversed, &["n".into()]).unwrap();
        for (a, b) in forward.rows.iter().zip(&backward.rows) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.2, b.2);
        }
    }
}
