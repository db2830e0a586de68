//! Analyses over exported attention records.
//!
//! Input is line-delimited JSON: a header line naming the schema version and
//! model grid, then one [`AttentionObservation`] (or [`AblationRecord`]) per
//! line. Each submodule turns a loaded collection into one analysis.

mod ablation;
mod capacity;
mod duplicate;
mod independence;
mod io;
mod naturalistic;
mod resolution;
mod signature;
mod taxonomy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ablation::{
    ablation_deltas, load_ablation_records, parse_ablation_records, AblationDelta, AblationFile, AblationMethod,
    AblationRecord, AblationReport, FamilySummary,
};
pub use capacity::{
    capacity_fp_table, sequence_length_control, CapacityCell, CapacityTable, LengthSeries, LENGTH_SENSITIVITY_RANGE,
    PREFIX_ATTENTION_FLOOR,
};
pub use duplicate::{
    duplicate_only_heads, duplicate_token_ranking, generalization_index, DuplicateRank, GeneralizationReport,
    HeadGeneralization, NAME, NONNAME,
};
pub use independence::{
    independence_analysis, probe_set, threshold_sweep, IndependenceReport, PairPhi, ProbeSet, ProbeVerdict, SweepRow,
    INDEPENDENCE_CONDITION, SWEEP_THRESHOLDS,
};
pub use io::{
    load_observations, parse_observations, AttentionObservation, Header, LoadReport, Observations, Rejection,
    SCHEMA_VERSION,
};
pub use naturalistic::{naturalistic_metrics, NaturalisticMetrics, NONREPEATED, REPEATED};
pub use resolution::{resolution_profiles, LevelPoint, ResolutionProfile, SigmoidFit, EXACT_LEVEL};
pub use signature::{
    classify_heads, group_tests, signature_metrics, Classification, GroupTests, HeadMetrics, SignatureOptions,
    HIT_FLOOR, MISS_NULL_RATE, MISS_RATE_CEILING, MISS_THRESHOLD, SELECTIVITY_FLOOR,
};
pub use taxonomy::{
    taxonomy_scores, taxonomy_summary, TaxonomyOptions, TaxonomyScore, TaxonomySummary, INDUCTION_CONDITION,
    PREVIOUS_CONDITION,
};

/// Default binary false-positive threshold on attention.
pub const FP_THRESHOLD: f64 = 0.1;

/// `(layer, head)` coordinate, displayed and serialized as `L{layer}H{head}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeadId {
    pub layer: u32,
    pub head: u32,
}

impl HeadId {
    pub const fn new(layer: u32, head: u32) -> Self {
        Self { layer, head }
    }
}

impl fmt::Display for HeadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}H{}", self.layer, self.head)
    }
}

impl FromStr for HeadId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("head id `{s}` is not of the form L<layer>H<head>"));
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let (layer, head) = rest.split_once('H').ok_or_else(bad)?;
        Ok(Self { layer: layer.parse().map_err(|_| bad())?, head: head.parse().map_err(|_| bad())? })
    }
}

impl Serialize for HeadId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HeadId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Signature,
    Capacity,
    Resolution,
    Naturalistic,
    Taxonomy,
    Duplicate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Signature,
        Experiment::Capacity,
        Experiment::Resolution,
        Experiment::Naturalistic,
        Experiment::Taxonomy,
        Experiment::Duplicate,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Experiment::Signature => "signature",
            Experiment::Capacity => "capacity",
            Experiment::Resolution => "resolution",
            Experiment::Naturalistic => "naturalistic",
            Experiment::Taxonomy => "taxonomy",
            Experiment::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
