use std::collections::BTreeMap;

use anyhow::anyhow;
use bloomhead::head_analysis::{Experiment, HeadId, Observations};
use bloomhead::stats;

use super::load_one;
use crate::report::{flag, num, Report, Table};
use crate::{Common, Failure};

type Key = (String, HeadId, Experiment, String, String);

fn keyed(obs: &Observations, which: &str) -> Result<BTreeMap<Key, f64>, Failure> {
    let mut out = BTreeMap::new();
    for r in &obs.records {
        let key = (r.model.clone(), r.head_id(), r.experiment, r.condition.clone(), r.sentence_id.clone());
        if out.insert(key, r.value).is_some() {
            return Err(anyhow!(
                "{which}: duplicate record for {} {} {} `{}`",
                r.head_id(),
                r.experiment,
                r.condition,
                r.sentence_id
            )
            .into());
        }
    }
    Ok(out)
}

/// Records are matched on (model, head, experiment, condition, sentence id);
/// unmatched records are counted and warned about, not fatal.
pub fn compare_dumps(c: &Common, tolerance: f64, worst: usize) -> Result<Report, Failure> {
    let [a_path, b_path] = c.input.as_slice() else {
        return Err(Failure::Usage(format!("compare-dumps needs exactly two --input files, got {}", c.input.len())));
    };
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Failure::Usage(format!("tolerance must be a finite non-negative number, got {tolerance}")));
    }
    let a = keyed(&load_one(a_path)?, "first input")?;
    let b = keyed(&load_one(b_path)?, "second input")?;

    let mut diffs: Vec<(&Key, f64, f64, f64)> =
        a.iter().filter_map(|(k, &va)| b.get(k).map(|&vb| (k, va, vb, (va - vb).abs()))).collect();
    let only_a = a.len() - diffs.len();
    let only_b = b.len() - diffs.len();
    if diffs.is_empty() {
        return Err(anyhow!("the two inputs share no records").into());
    }
    let max = diffs.iter().map(|d| d.3).fold(0.0, f64::max);
    let pass = max <= tolerance;

    let mut report = Report::new("compare-dumps");
    let mut t = Table::new("summary", &["metric", "value"]);
    for (k, v) in [
        ("records_a", a.len().to_string()),
        ("records_b", b.len().to_string()),
        ("compared", diffs.len().to_string()),
        ("only_a", only_a.to_string()),
        ("only_b", only_b.to_string()),
        ("max_abs_diff", format!("{max:.3e}")),
        ("tolerance", format!("{tolerance:.3e}")),
        ("pass", flag(pass)),
    ] {
        t.push(vec![k.into(), v]);
    }
    report.tables.push(t);

    type Pair = (Vec<f64>, Vec<f64>);
    let mut groups: BTreeMap<(HeadId, Experiment, &str), Pair> = BTreeMap::new();
    for (k, va, vb, _) in &diffs {
        let g = groups.entry((k.1, k.2, k.3.as_str())).or_default();
        g.0.push(*va);
        g.1.push(*vb);
    }
    let mut t = Table::new("means", &["head", "experiment", "condition", "n", "mean_a", "mean_b", "abs_diff"]);
    for ((h, e, cond), (xs, ys)) in &groups {
        let (ma, mb) = (stats::mean(xs), stats::mean(ys));
        t.push(vec![
            h.to_string(),
            e.to_string(),
            (*cond).to_string(),
            xs.len().to_string(),
            num(ma),
            num(mb),
            format!("{:.3e}", (ma - mb).abs()),
        ]);
    }
    report.tables.push(t);

    diffs.sort_by(|x, y| y.3.total_cmp(&x.3).then_with(|| x.0.cmp(y.0)));
    let mut t = Table::new("worst", &["head", "experiment", "condition", "sentence_id", "a", "b", "abs_diff"]);
    for (k, va, vb, d) in diffs.iter().take(worst) {
        t.push(vec![
            k.1.to_string(),
            k.2.to_string(),
            k.3.clone(),
            k.4.clone(),
            format!("{va:.7}"),
            format!("{vb:.7}"),
            format!("{d:.3e}"),
        ]);
    }
    report.tables.push(t);

    if only_a + only_b > 0 {
        report.warn(format!("{only_a} record(s) only in the first input, {only_b} only in the second"));
    }
    if !pass {
        let (k, _, _, d) = diffs[0];
        report.failure = Some(format!(
            "max difference {d:.3e} exceeds tolerance {tolerance:.3e} (worst: {} {} {} `{}`)",
            k.1, k.2, k.3, k.4
        ));
    }
    Ok(report)
}
