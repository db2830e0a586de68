use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use bloomhead::head_analysis::{
    ablation_deltas, capacity_fp_table, classify_heads, duplicate_only_heads, duplicate_token_ranking,
    generalization_index, group_tests, independence_analysis, load_ablation_records, naturalistic_metrics, probe_set,
    resolution_profiles, sequence_length_control, signature_metrics, taxonomy_scores, taxonomy_summary,
    threshold_sweep, AblationRecord, CapacityTable, HeadId, SignatureOptions, TaxonomyOptions, SWEEP_THRESHOLDS,
};
use bloomhead::model_fit::{compare_models_aic, fit_bloom_curve};
use bloomhead::stats;
use bloomhead::Error;

use super::{derive_bloom, load_inputs, rejection_error, require_inputs};
use crate::report::{flag, join, num, opt, pval, Report, Table};
use crate::{Common, Failure};

pub fn signature(c: &Common, group: &[HeadId]) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let opts = SignatureOptions { resamples: c.resamples as usize, seed: c.seed, ..SignatureOptions::default() };
    let metrics = signature_metrics(&obs, &opts)?;
    let classes = classify_heads(&metrics);
    let by_head: BTreeMap<HeadId, _> = metrics.iter().map(|m| (m.head, m)).collect();

    let mut report = Report::new("signature");
    let mut t = Table::new(
        "heads",
        &[
            "head",
            "rank",
            "hit_n",
            "baseline_n",
            "hit_mean",
            "baseline_mean",
            "selectivity",
            "sel_ci_low",
            "sel_ci_high",
            "misses",
            "miss_rate",
            "fp_ratio",
            "hit_vs_baseline_p",
            "miss_p",
            "strong_bloom",
            "failed",
        ],
    );
    for cl in &classes {
        let m = by_head[&cl.head];
        let ci = m.selectivity_ci.as_ref();
        t.push(vec![
            m.head.to_string(),
            cl.rank.to_string(),
            m.n_hit.to_string(),
            m.n_baseline.to_string(),
            num(m.hit_mean),
            num(m.baseline_mean),
            num(m.selectivity),
            opt(ci.map(|c| c.low)),
            opt(ci.map(|c| c.high)),
            m.misses.to_string(),
            num(m.miss_rate),
            opt(m.fp_ratio),
            pval(m.hit_vs_baseline.p_value, m.hit_vs_baseline.capped),
            pval(m.miss_test.p_value, m.miss_test.capped),
            flag(cl.strong_bloom),
            cl.failed.join("+"),
        ]);
        if m.selectivity_infinite {
            report.warn(format!("{}: zero baseline attention, selectivity infinite", m.head));
        }
    }
    report.tables.push(t);

    let group: Vec<HeadId> = if group.is_empty() {
        classes.iter().filter(|c| c.strong_bloom).map(|c| c.head).collect()
    } else {
        group.to_vec()
    };
    if group.is_empty() {
        report.warn("no head passes the classification rule; group tests skipped");
        return Ok(report);
    }
    let g = group_tests(&metrics, &group, c.resamples as usize, c.seed)?;
    let mut t = Table::new("group", &["metric", "value"]);
    let rows = [
        ("group", join(&g.group)),
        ("group_mean_selectivity", num(g.group_mean_selectivity)),
        ("population_mean_selectivity", num(g.population_mean_selectivity)),
        ("permutation_p", pval(g.permutation.p_value, g.permutation.capped)),
        ("permutation_resamples", c.resamples.to_string()),
        ("hit_cohens_d", num(g.hit_effect.d)),
        ("alpha_per_head", pval(g.alpha_per_head, false)),
        ("significant", join(&g.significant)),
    ];
    for (k, v) in rows {
        t.push(vec![k.into(), v]);
    }
    report.tables.push(t);
    for h in group.iter().filter(|h| !g.significant.contains(h)) {
        report.warn(format!("{h}: hit > baseline not significant at the corrected alpha"));
    }
    Ok(report)
}

pub fn taxonomy(c: &Common, bloom: &[HeadId], induction: f64, previous: f64) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let mut report = Report::new("taxonomy");
    let bloom = if bloom.is_empty() { derive_bloom(&obs, c, &mut report)? } else { bloom.to_vec() };
    let opts =
        TaxonomyOptions { induction_threshold: induction, previous_threshold: previous, ..TaxonomyOptions::default() };
    let scores = taxonomy_scores(&obs, &opts)?;
    let summary = taxonomy_summary(&scores, &bloom, &opts);

    let mut t = Table::new("scores", &["head", "induction", "previous", "trials", "is_induction", "is_previous"]);
    for s in &scores {
        t.push(vec![
            s.head.to_string(),
            num(s.induction),
            num(s.previous),
            s.trials.to_string(),
            flag(s.is_induction),
            flag(s.is_previous),
        ]);
    }
    report.tables.push(t);
    let mut t = Table::new("categories", &["category", "count", "heads"]);
    for (name, heads) in
        [("bloom", &summary.bloom), ("induction", &summary.induction), ("previous-token", &summary.previous)]
    {
        t.push(vec![name.into(), heads.len().to_string(), join(heads)]);
    }
    report.tables.push(t);
    let mut t = Table::new("overlap", &["a", "b", "shared", "heads"]);
    for (a, b, shared) in &summary.overlaps {
        t.push(vec![a.clone(), b.clone(), shared.len().to_string(), join(shared)]);
    }
    report.tables.push(t);
    if !summary.zero_overlap {
        report.warn("categories overlap");
    }
    report.extend_warnings(summary.warnings);
    Ok(report)
}

fn capacity_cells(table: &CapacityTable) -> Table {
    let mut t = Table::new("cells", &["head", "n_unique", "fired", "probes", "fp_rate"]);
    for (h, cells) in &table.cells {
        for cell in cells {
            t.push(vec![
                h.to_string(),
                cell.n_unique.to_string(),
                cell.fired.to_string(),
                cell.probes.to_string(),
                num(cell.fp_rate()),
            ]);
        }
    }
    t
}

/// Bloom fit and model comparison for each curve. Curves too short for a
/// fit are reported as a warning.
fn fit_tables(curves: &[(String, Vec<(f64, f64)>)], report: &mut Report) -> Result<(), Failure> {
    let mut fits = Table::new("bloom_fit", &["curve", "points", "m", "k", "rss", "r_squared", "non_identifiable"]);
    let mut models =
        Table::new("models", &["curve", "model", "params", "rss", "r_squared", "aic", "bic", "delta_aic", "best"]);
    for (label, xy) in curves {
        if xy.len() < 3 {
            report.warn(format!("{label}: {} points, too few for a bloom fit", xy.len()));
            continue;
        }
        let f = fit_bloom_curve(xy).with_context(|| format!("fitting {label}"))?;
        fits.push(vec![
            label.clone(),
            xy.len().to_string(),
            num(f.m),
            num(f.k),
            num(f.rss),
            opt(f.r_squared),
            flag(f.non_identifiable),
        ]);
        if f.non_identifiable {
            report.warn(format!(
                "{label}: flat FP curve; bloom parameters are not identifiable (constant firing suggests prefix attention)"
            ));
        }
        if xy.len() < 4 {
            report.warn(format!("{label}: {} points, too few for model comparison", xy.len()));
            continue;
        }
        let cmp = compare_models_aic(xy).with_context(|| format!("comparing models for {label}"))?;
        let best_aic = cmp.scores[0].aic;
        for s in &cmp.scores {
            let params: Vec<String> =
                s.model.param_names().iter().zip(&s.params).map(|(n, v)| format!("{n}={}", num(*v))).collect();
            models.push(vec![
                label.clone(),
                s.model.to_string(),
                params.join(" "),
                num(s.rss),
                opt(s.r_squared),
                num(s.aic),
                num(s.bic),
                num(s.aic - best_aic),
                flag(s.model == cmp.best),
            ]);
        }
        report.extend_warnings(cmp.warnings.iter().map(|w| format!("{label}: {w}")));
    }
    report.tables.push(fits);
    report.tables.push(models);
    Ok(())
}

pub fn capacity(c: &Common, fit: bool) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let table = capacity_fp_table(&obs, c.fp_threshold)?;
    let mut report = Report::new("capacity");
    report.tables.push(capacity_cells(&table));
    report.extend_warnings(table.warnings.iter().cloned());
    for (h, loads) in &table.missing {
        report.warn(format!("{h}: no records at load(s) {}", join(loads)));
    }

    let mut t = Table::new("prefix_attention", &["head", "prefix_attention"]);
    for h in table.cells.keys() {
        t.push(vec![h.to_string(), flag(table.prefix_attention(*h))]);
    }
    report.tables.push(t);
    for h in table.prefix_attention_heads() {
        report.warn(format!("{h}: fires on nearly every probe at every load (prefix attention, not capacity-limited)"));
    }

    match sequence_length_control(&obs, c.fp_threshold) {
        Ok(series) => {
            let mut t = Table::new("length_control", &["head", "length", "fired", "probes", "fp_rate"]);
            let mut s = Table::new("length_summary", &["head", "range", "length_sensitive"]);
            for ls in &series {
                for &(len, fired, probes) in &ls.points {
                    t.push(vec![
                        ls.head.to_string(),
                        len.to_string(),
                        fired.to_string(),
                        probes.to_string(),
                        num(fired as f64 / probes as f64),
                    ]);
                }
                s.push(vec![ls.head.to_string(), num(ls.range), flag(ls.length_sensitive)]);
            }
            report.tables.push(t);
            report.tables.push(s);
        }
        Err(Error::MissingData(_)) => report.warn("no sequence-length control records"),
        Err(e) => return Err(e.into()),
    }

    let mut sweep = Table::new("threshold_sweep", &["threshold", "head", "n_unique", "fp_rate"]);
    for t in SWEEP_THRESHOLDS {
        let at = capacity_fp_table(&obs, t)?;
        for (h, cells) in &at.cells {
            for cell in cells {
                sweep.push(vec![num(t), h.to_string(), cell.n_unique.to_string(), num(cell.fp_rate())]);
            }
        }
    }
    report.tables.push(sweep);

    if fit {
        let curves: Vec<(String, Vec<(f64, f64)>)> =
            table.cells.keys().filter_map(|h| table.curve(*h).map(|cv| (h.to_string(), cv.xy()))).collect();
        fit_tables(&curves, &mut report)?;
    }
    Ok(report)
}

type LabelledPoints = (String, Vec<(f64, f64)>);

/// `(label, points)` from a CSV with `n_unique` and `fp_rate` columns and an
/// optional `head` column.
fn csv_curves(path: &Path) -> Result<Vec<LabelledPoints>, Failure> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers().with_context(|| format!("reading {}", path.display()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(xi), Some(yi)) = (col("n_unique"), col("fp_rate")) else {
        return Err(anyhow!("{}: CSV needs `n_unique` and `fp_rate` columns", path.display()).into());
    };
    let hi = col("head");
    let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let parse = |j: usize| -> Result<f64, Failure> {
            rec.get(j)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| anyhow!("{}: row {}: column {} is not a number", path.display(), i + 2, j + 1).into())
        };
        let label = hi.and_then(|j| rec.get(j)).unwrap_or("curve").to_string();
        curves.entry(label).or_default().push((parse(xi)?, parse(yi)?));
    }
    if curves.is_empty() {
        return Err(anyhow!("{}: no rows", path.display()).into());
    }
    Ok(curves.into_iter().collect())
}

pub fn fit(c: &Common, only: &[String]) -> Result<Report, Failure> {
    require_inputs(c)?;
    let mut curves = Vec::new();
    let mut jsonl = Vec::new();
    for p in &c.input {
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            curves.extend(csv_curves(p)?);
        } else {
            jsonl.push(p.clone());
        }
    }
    if !jsonl.is_empty() {
        let sub = Common { input: jsonl, ..c.clone() };
        let table = capacity_fp_table(&load_inputs(&sub)?, c.fp_threshold)?;
        curves.extend(table.cells.keys().filter_map(|h| table.curve(*h).map(|cv| (h.to_string(), cv.xy()))));
    }
    if !only.is_empty() {
        curves.retain(|(label, _)| only.contains(label));
        if curves.is_empty() {
            return Err(anyhow!("none of the requested curves ({}) are present", only.join(", ")).into());
        }
    }
    let mut report = Report::new("fit");
    fit_tables(&curves, &mut report)?;
    Ok(report)
}

pub fn independence(c: &Common, heads: &[HeadId]) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let set = probe_set(&obs, heads)?;
    let verdicts = set.verdicts(c.fp_threshold);
    let r = independence_analysis(&set.heads, &verdicts)?;
    let mut report = Report::new("independence");

    let mut t = Table::new("summary", &["metric", "value"]);
    t.push(vec!["heads".into(), join(&r.heads)]);
    t.push(vec!["probes".into(), r.probes.to_string()]);
    t.push(vec!["threshold".into(), num(r.threshold)]);
    t.push(vec!["mean_phi".into(), opt(r.mean_phi)]);
    t.push(vec!["combined_rate".into(), num(r.combined.combined_rate)]);
    t.push(vec!["predicted_rate".into(), num(r.combined.predicted_rate)]);
    for (h, rate) in r.heads.iter().zip(&r.combined.per_filter_rates) {
        t.push(vec![format!("rate_{h}"), num(*rate)]);
    }
    report.tables.push(t);

    let mut t = Table::new("pairs", &["a", "b", "n11", "n10", "n01", "n00", "phi"]);
    for p in &r.pairs {
        t.push(vec![
            p.a.to_string(),
            p.b.to_string(),
            p.table.n11.to_string(),
            p.table.n10.to_string(),
            p.table.n01.to_string(),
            p.table.n00.to_string(),
            opt(p.phi),
        ]);
    }
    report.tables.push(t);

    let mut t = Table::new("histogram", &["heads_fired", "probes", "fraction"]);
    for (j, (count, frac)) in r.histogram.iter().zip(r.histogram_fractions()).enumerate() {
        t.push(vec![j.to_string(), count.to_string(), num(frac)]);
    }
    report.tables.push(t);

    let mut t = Table::new("cascade", &["heads", "observed", "predicted"]);
    for &(k, obs_rate, pred) in &r.cascade {
        t.push(vec![k.to_string(), num(obs_rate), num(pred)]);
    }
    report.tables.push(t);

    let mut t = Table::new("threshold_sweep", &["threshold", "mean_phi", "combined_rate", "none_fired", "all_fired"]);
    for row in threshold_sweep(&set, &SWEEP_THRESHOLDS)? {
        t.push(vec![
            num(row.threshold),
            opt(row.mean_phi),
            num(row.combined_rate),
            num(row.none_fired),
            num(row.all_fired),
        ]);
    }
    report.tables.push(t);
    report.extend_warnings(r.warnings);
    Ok(report)
}

pub fn resolution(c: &Common) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let profiles = resolution_profiles(&obs, c.fp_threshold)?;
    let mut report = Report::new("resolution");
    let mut t = Table::new("levels", &["head", "level", "probes", "mean_attention", "normalized", "fired", "fp_rate"]);
    let mut f = Table::new(
        "profile",
        &[
            "head",
            "midpoint",
            "slope",
            "rss",
            "zero_fp_from",
            "bandwidth_rank",
            "fp_violations",
            "attention_violations",
        ],
    );
    for p in &profiles {
        for l in p.levels.iter().chain(&p.extras) {
            t.push(vec![
                p.head.to_string(),
                l.label.clone(),
                l.probes.to_string(),
                num(l.mean_attention),
                num(l.normalized),
                l.fired.to_string(),
                num(l.fp_rate),
            ]);
        }
        f.push(vec![
            p.head.to_string(),
            opt(p.fit.midpoint),
            num(p.fit.slope),
            num(p.fit.rss),
            opt(p.zero_fp_from),
            p.bandwidth_rank.map(|r| r.to_string()).unwrap_or_default(),
            p.fp_violations.len().to_string(),
            p.attention_violations.len().to_string(),
        ]);
        for (hi, lo) in &p.fp_violations {
            report.warn(format!("{}: FP rate rises from cosine {hi} to {lo}", p.head));
        }
        if p.fit.midpoint.is_none() {
            report.warn(format!("{}: flat FP profile, no sigmoid midpoint", p.head));
        }
    }
    report.tables.push(t);
    report.tables.push(f);

    let mut sweep = Table::new("threshold_sweep", &["threshold", "head", "level", "fp_rate"]);
    for th in SWEEP_THRESHOLDS {
        for p in resolution_profiles(&obs, th)? {
            for l in p.levels.iter().chain(&p.extras) {
                sweep.push(vec![num(th), p.head.to_string(), l.label.clone(), num(l.fp_rate)]);
            }
        }
    }
    report.tables.push(sweep);
    Ok(report)
}

pub fn naturalistic(c: &Common, controls: &[HeadId]) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let metrics = naturalistic_metrics(&obs)?;
    let mut report = Report::new("naturalistic");
    let mut t = Table::new(
        "heads",
        &[
            "head",
            "repeat_pairs",
            "nonrepeated",
            "repeated_mean",
            "nonrepeated_mean",
            "selectivity",
            "misses",
            "miss_rate",
        ],
    );
    for m in &metrics {
        t.push(vec![
            m.head.to_string(),
            m.repeat_pairs.to_string(),
            m.nonrepeated.to_string(),
            num(m.repeated_mean),
            num(m.nonrepeated_mean),
            num(m.selectivity),
            m.misses.to_string(),
            num(m.miss_rate),
        ]);
        if m.selectivity_infinite {
            report.warn(format!("{}: zero non-repeated attention, selectivity infinite", m.head));
        }
    }
    report.tables.push(t);
    if !controls.is_empty() {
        if let Some(h) = controls.iter().find(|h| !metrics.iter().any(|m| m.head == **h)) {
            return Err(anyhow!("control head {h} has no naturalistic records").into());
        }
        let mut t = Table::new("groups", &["group", "heads", "mean_selectivity"]);
        for (name, is_ctrl) in [("candidates", false), ("controls", true)] {
            let sel: Vec<&_> = metrics.iter().filter(|m| controls.contains(&m.head) == is_ctrl).collect();
            let heads: Vec<HeadId> = sel.iter().map(|m| m.head).collect();
            let xs: Vec<f64> = sel.iter().map(|m| m.selectivity).collect();
            t.push(vec![name.into(), join(&heads), if xs.is_empty() { String::new() } else { num(stats::mean(&xs)) }]);
        }
        report.tables.push(t);
    }
    Ok(report)
}

pub fn ablation(c: &Common, level: f64) -> Result<Report, Failure> {
    require_inputs(c)?;
    let mut records: Vec<AblationRecord> = Vec::new();
    let mut header = None;
    for p in &c.input {
        let f = load_ablation_records(p).with_context(|| format!("loading {}", p.display()))?;
        if !f.rejected.is_empty() {
            return Err(rejection_error(p, &f.rejected).into());
        }
        if f.records.is_empty() {
            return Err(anyhow!("{}: no records", p.display()).into());
        }
        match (&header, f.header) {
            (None, h) => header = h,
            (Some(a), Some(b)) if *a != b => {
                return Err(anyhow!("{}: header differs from the first input", p.display()).into())
            }
            _ => {}
        }
        records.extend(f.records);
    }
    let r = ablation_deltas(&records, level, c.resamples as usize, c.seed)?;
    let mut report = Report::new("ablation");
    let mut t = Table::new(
        "deltas",
        &[
            "method",
            "set",
            "heads",
            "repeat_n",
            "norepeat_n",
            "repeat",
            "repeat_low",
            "repeat_high",
            "norepeat",
            "norepeat_low",
            "norepeat_high",
            "interaction",
            "interaction_low",
            "interaction_high",
        ],
    );
    for d in &r.deltas {
        t.push(vec![
            d.method.label().into(),
            d.set.clone(),
            join(&d.heads),
            d.repeat_sentences.to_string(),
            d.norepeat_sentences.to_string(),
            num(d.repeat.estimate),
            num(d.repeat.low),
            num(d.repeat.high),
            num(d.norepeat.estimate),
            num(d.norepeat.low),
            num(d.norepeat.high),
            num(d.interaction.estimate),
            num(d.interaction.low),
            num(d.interaction.high),
        ]);
    }
    report.tables.push(t);
    let mut t = Table::new(
        "families",
        &[
            "method",
            "family",
            "draws",
            "repeat_mean",
            "repeat_sd",
            "norepeat_mean",
            "norepeat_sd",
            "interaction_mean",
            "interaction_sd",
        ],
    );
    for f in &r.families {
        t.push(vec![
            f.method.label().into(),
            f.family.clone(),
            f.draws.to_string(),
            num(f.repeat_mean),
            num(f.repeat_sd),
            num(f.norepeat_mean),
            num(f.norepeat_sd),
            num(f.interaction_mean),
            num(f.interaction_sd),
        ]);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn duplicate(c: &Common, bloom: &[HeadId], top: usize) -> Result<Report, Failure> {
    let obs = load_inputs(c)?;
    let mut report = Report::new("duplicate");
    let bloom = if bloom.is_empty() { derive_bloom(&obs, c, &mut report)? } else { bloom.to_vec() };
    let ranking = duplicate_token_ranking(&obs)?;
    let comparison = duplicate_only_heads(&ranking, &bloom, top);

    let mut t = Table::new("ranking", &["rank", "head", "score", "bloom"]);
    for r in &ranking {
        t.push(vec![r.rank.to_string(), r.head.to_string(), num(r.score), flag(bloom.contains(&r.head))]);
    }
    report.tables.push(t);

    if comparison.is_empty() {
        report.warn(format!("no duplicate-only heads in the top {top}; generalization contrast skipped"));
        return Ok(report);
    }
    let g = generalization_index(&obs, &bloom, &comparison)?;
    let mut t = Table::new("generalization", &["head", "group", "name_mean", "nonname_mean", "index"]);
    for h in &g.heads {
        let group = if bloom.contains(&h.head) {
            "bloom"
        } else if comparison.contains(&h.head) {
            "duplicate-only"
        } else {
            continue;
        };
        t.push(vec![h.head.to_string(), group.into(), num(h.name_mean), num(h.nonname_mean), opt(h.index)]);
    }
    report.tables.push(t);
    let mut t = Table::new("summary", &["metric", "value"]);
    for (k, v) in [
        ("bloom_heads", join(&g.bloom)),
        ("duplicate_only_heads", join(&g.comparison)),
        ("bloom_index", num(g.bloom_index)),
        ("duplicate_only_index", num(g.comparison_index)),
        ("relative_gain", num(g.relative_gain)),
        ("bloom_nonname", num(g.bloom_nonname)),
        ("duplicate_only_nonname", num(g.comparison_nonname)),
        ("nonname_ratio", num(g.nonname_ratio)),
    ] {
        t.push(vec![k.into(), v]);
    }
    report.tables.push(t);
    report.extend_warnings(g.warnings);
    Ok(report)
}
