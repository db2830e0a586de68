mod compare;
mod experiments;
mod simulate;

use std::path::Path;

use anyhow::{anyhow, Context};
use bloomhead::head_analysis::{
    capacity_fp_table, classify_heads, load_observations, signature_metrics, Experiment, HeadId, Observations,
    Rejection, SignatureOptions,
};

use crate::report::Report;
use crate::{Cli, Command, Common, Failure};

pub fn execute(cli: &Cli) -> Result<Report, Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Signature { group } => experiments::signature(c, group),
        Command::Taxonomy { bloom, induction_threshold, previous_threshold } => {
            experiments::taxonomy(c, bloom, *induction_threshold, *previous_threshold)
        }
        Command::Capacity { fit } => experiments::capacity(c, *fit),
        Command::Fit { head } => experiments::fit(c, head),
        Command::Independence { heads } => experiments::independence(c, heads),
        Command::Resolution => experiments::resolution(c),
        Command::Naturalistic { controls } => experiments::naturalistic(c, controls),
        Command::Ablation { level } => experiments::ablation(c, *level),
        Command::Duplicate { bloom, top } => experiments::duplicate(c, bloom, *top),
        Command::SimulateFilter(args) => simulate::simulate_filter(c, args),
        Command::CompareDumps { tolerance, worst } => compare::compare_dumps(c, *tolerance, *worst),
    }
}

pub(crate) fn require_inputs(common: &Common) -> Result<(), Failure> {
    if common.input.is_empty() {
        return Err(Failure::Usage("--input is required".into()));
    }
    Ok(())
}

pub(crate) fn rejection_error(path: &Path, rejected: &[Rejection]) -> anyhow::Error {
    let shown: Vec<String> = rejected.iter().take(5).map(|r| format!("  line {}: {}", r.line, r.reason)).collect();
    let more = if rejected.len() > 5 { format!("\n  ... {} more", rejected.len() - 5) } else { String::new() };
    anyhow!("{}: {} invalid record(s)\n{}{more}", path.display(), rejected.len(), shown.join("\n"))
}

pub(crate) fn load_one(path: &Path) -> Result<Observations, Failure> {
    let obs = load_observations(path).with_context(|| format!("loading {}", path.display()))?;
    if !obs.report.rejected.is_empty() {
        return Err(rejection_error(path, &obs.report.rejected).into());
    }
    if obs.is_empty() {
        return Err(anyhow!("{}: no records", path.display()).into());
    }
    Ok(obs)
}

/// All `--input` files merged. Any rejected line fails the run.
pub(crate) fn load_inputs(common: &Common) -> Result<Observations, Failure> {
    require_inputs(common)?;
    let mut acc: Option<Observations> = None;
    for path in &common.input {
        let obs = load_one(path)?;
        acc = Some(match acc {
            None => obs,
            Some(a) => a.merge(obs).with_context(|| format!("merging {}", path.display()))?,
        });
    }
    Ok(acc.expect("at least one input"))
}

/// Strong-bloom heads from signature records, minus prefix-attention heads
/// when capacity records are present.
pub(crate) fn derive_bloom(obs: &Observations, common: &Common, report: &mut Report) -> Result<Vec<HeadId>, Failure> {
    if obs.heads(Experiment::Signature).is_empty() {
        return Err(anyhow!("no bloom heads given: pass --bloom or include signature records").into());
    }
    // classification needs only means and counts, so skip the intervals
    let opts = SignatureOptions { resamples: 1, seed: common.seed, ..SignatureOptions::default() };
    let metrics = signature_metrics(obs, &opts)?;
    let mut bloom: Vec<HeadId> =
        classify_heads(&metrics).into_iter().filter(|c| c.strong_bloom).map(|c| c.head).collect();
    if !obs.heads(Experiment::Capacity).is_empty() {
        let table = capacity_fp_table(obs, common.fp_threshold)?;
        let prefix = table.prefix_attention_heads();
        for h in bloom.iter().filter(|h| prefix.contains(h)) {
            report.warn(format!("{h} passes the signature rule but fires at every load; treated as prefix attention"));
        }
        bloom.retain(|h| !prefix.contains(h));
    }
    bloom.sort();
    Ok(bloom)
}
