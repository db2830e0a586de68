//! Acceptance run over the checked-in fixtures.
//!
//! Prints one `PASS`/`FAIL` line per criterion, then fails the test for any
//! criterion not in [`KNOWN_RED`]. Every tolerance is pinned as a constant
//! next to the check that uses it.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bloomhead::ds_filters::{
    collision_probability, fp_vs_distance_profile, BandPreset, DsFilterConfig, Hyperplanes, ResolutionBand,
};
use bloomhead::filters::{empirical_fp_rate, theoretical_fp, FilterParams};
use bloomhead::head_analysis::{
    ablation_deltas, capacity_fp_table, classify_heads, group_tests, independence_analysis, load_ablation_records,
    load_observations, probe_set, signature_metrics, AblationMethod, HeadId, SignatureOptions, FP_THRESHOLD,
};
use bloomhead::model_fit::fit_bloom_curve;
use bloomhead::rng;
use bloomhead::stats::{binomial_tail, bootstrap_ci, mann_whitney_exact, phi_coefficient, Alternative, TwoByTwo};
use rand::RngCore;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Criteria expected to print FAIL. The classical-filter grid compares
/// against the closed-form approximation, which is biased at m=16; the
/// exact-occupancy oracle below is what the implementation must match.
const KNOWN_RED: &[&str] = &["classical filter monte carlo"];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn h(s: &str) -> HeadId {
    s.parse().unwrap()
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn timed(name: &'static str, limit: Duration, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    let detail = if in_time {
        format!("{detail}; {:.2}s", took.as_secs_f64())
    } else {
        format!("{detail}; {:.2}s exceeds {:.0}s", took.as_secs_f64(), limit.as_secs_f64())
    };
    Outcome { name, pass: ok && in_time, detail }
}

fn closed_form_evaluation() -> Outcome {
    timed("closed-form fp evaluation", Duration::from_secs(1), || {
        let at = |n| theoretical_fp(&FilterParams::new(5.0, 0.86, n).unwrap()).unwrap();
        let (a, b) = (at(5.0), at(20.0));
        let ok = (0.607..=0.647).contains(&a) && (0.952..=0.992).contains(&b);
        (ok, format!("n=5 -> {a:.4} in [0.607, 0.647], n=20 -> {b:.4} in [0.952, 0.992]"))
    })
}

fn capacity_fit() -> Outcome {
    timed("capacity fit", Duration::from_secs(5), || {
        let obs = load_observations(fixture("capacity.jsonl")).unwrap();
        let table = capacity_fp_table(&obs, FP_THRESHOLD).unwrap();
        let xy = |head| table.curve(h(head)).unwrap().xy();
        let l1h11 = fit_bloom_curve(&xy("L1H11")).unwrap();
        let l3h0 = fit_bloom_curve(&xy("L3H0")).unwrap();
        let r2 = l1h11.r_squared.unwrap_or(f64::NAN);
        let ok =
            (4.0..=6.0).contains(&l1h11.m) && (0.66..=1.06).contains(&l1h11.k) && r2 >= 0.99 && l3h0.non_identifiable;
        (
            ok,
            format!(
                "L1H11 m={:.3} in [4, 6], k={:.3} in [0.66, 1.06], R2={r2:.5} >= 0.99; L3H0 non-identifiable={}",
                l1h11.m, l1h11.k, l3h0.non_identifiable
            ),
        )
    })
}

/// Exact false-positive rate of the double-hashing filter under ideal hash
/// values: an element occupies `{g1 + i*g2 mod m : i < k}` for independent
/// uniform `g1, g2`. By translation symmetry the probe can be taken at
/// `g1 = 0`; inclusion-exclusion over subsets of its positions then gives
/// `P(all covered) = sum_T (-1)^|T| q(T)^n` with `q(T)` the chance that one
/// element avoids `T`.
fn exact_double_hashing_fp(m: usize, k: usize, n: u64) -> f64 {
    let positions = |g1: usize, g2: usize| -> Vec<usize> {
        let mut p: Vec<usize> = (0..k).map(|i| (g1 + i * g2) % m).collect();
        p.sort_unstable();
        p.dedup();
        p
    };
    let avoid = |t: &[usize]| -> f64 {
        let mut count = 0u64;
        for g1 in 0..m {
            for g2 in 0..m {
                if (0..k).all(|i| !t.contains(&((g1 + i * g2) % m))) {
                    count += 1;
                }
            }
        }
        count as f64 / (m * m) as f64
    };
    let mut total = 0.0;
    for g2 in 0..m {
        let s = positions(0, g2);
        let mut p = 0.0;
        for mask in 0u32..(1 << s.len()) {
            let t: Vec<usize> = (0..s.len()).filter(|&i| mask & (1 << i) != 0).map(|i| s[i]).collect();
            let sign = if t.len().is_multiple_of(2) { 1.0 } else { -1.0 };
            p += sign * avoid(&t).powf(n as f64);
        }
        total += p;
    }
    total / m as f64
}

const MC_PROBES: u64 = 10_000;
const MC_SE_GATE: f64 = 4.0;

fn classical_monte_carlo() -> (Outcome, f64) {
    let mut worst_exact = 0.0f64;
    let outcome = timed("classical filter monte carlo", Duration::from_secs(30), || {
        let mut failures = Vec::new();
        let mut cells = 0;
        for m in [16usize, 64, 256] {
            for k in [1u32, 2, 3] {
                for n in [m / 8, m / 4, m / 2, m, 2 * m] {
                    let n = n as u64;
                    let seed = rng::derive_seed(42, (m as u64) << 32 | u64::from(k) << 24 | n);
                    let est = empirical_fp_rate(m, k, n, MC_PROBES, seed).unwrap();
                    let closed = theoretical_fp(&FilterParams::new(m as f64, f64::from(k), n as f64).unwrap()).unwrap();
                    // SE from the reference rate so cells near 0 or 1 are not
                    // judged against a zero empirical SE
                    let se = |p: f64| (p * (1.0 - p) / MC_PROBES as f64).sqrt().max(1e-12);
                    let z = (est.rate - closed) / se(closed);
                    cells += 1;
                    if z.abs() > MC_SE_GATE {
                        failures.push(format!("m={m},k={k},n={n}: {:.4} vs {closed:.4} ({z:+.1} SE)", est.rate));
                    }
                    if m <= 64 {
                        let exact = exact_double_hashing_fp(m, k as usize, n);
                        worst_exact = worst_exact.max(((est.rate - exact) / se(exact)).abs());
                    }
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("{cells} cells within {MC_SE_GATE} SE of the closed form")
        } else {
            format!(
                "{} of {cells} cells beyond {MC_SE_GATE} SE of the closed form: {}",
                failures.len(),
                failures.join("; ")
            )
        };
        (failures.is_empty(), detail)
    });
    (outcome, worst_exact)
}

const HYPERPLANES: usize = 10_000;
const LSH_SE_GATE: f64 = 4.0;
const PROFILE_SLACK_SE: f64 = 3.0;

fn lsh_collision_law() -> Outcome {
    timed("lsh collision law", Duration::from_secs(30), || {
        let dim = 64;
        let mut r = rng::seeded(42);
        let planes = Hyperplanes::random(dim, HYPERPLANES, &mut r).unwrap();
        let mut notes = Vec::new();
        let mut ok = true;
        for (label, theta) in [("pi/6", PI / 6.0), ("pi/4", PI / 4.0), ("pi/2", PI / 2.0), ("3pi/4", 3.0 * PI / 4.0)] {
            let a: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let b = bloomhead::ds_filters::probe_at_cosine(&a, theta.cos(), &mut r).unwrap();
            let p = collision_probability(theta.cos());
            let got = planes.agreement(&a, &b);
            let z = (got - p) / (p * (1.0 - p) / HYPERPLANES as f64).sqrt();
            ok &= z.abs() <= LSH_SE_GATE;
            notes.push(format!("{label}: {got:.4} vs {p:.4} ({z:+.2} SE)"));
        }
        let levels = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0];
        let mut rises = 0;
        for (i, preset) in BandPreset::ALL.into_iter().enumerate() {
            let band = ResolutionBand::preset(preset);
            let config: DsFilterConfig = band.config(dim);
            let profile = fp_vs_distance_profile(config, 1, &levels, 2_000, rng::derive_seed(42, i as u64)).unwrap();
            for w in profile.windows(2) {
                let slack = PROFILE_SLACK_SE * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
                if w[1].fp_rate > w[0].fp_rate + slack {
                    rises += 1;
                }
            }
        }
        ok &= rises == 0;
        notes.push(format!("profile rises beyond {PROFILE_SLACK_SE} SE: {rises}"));
        (ok, notes.join(", "))
    })
}

/// Brute-force one-sided U tail: relabel every subset of the pooled sample
/// and count pairwise wins directly.
fn enumerate_u_tail(x: &[f64], y: &[f64]) -> f64 {
    let u = |xs: &[f64], ys: &[f64]| -> f64 {
        let mut s = 0.0;
        for a in xs {
            for b in ys {
                s += if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                };
            }
        }
        s
    };
    let observed = u(x, y);
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != x.len() {
            continue;
        }
        let pick = |inside: bool| -> Vec<f64> {
            (0..n).filter(|&i| (mask & (1 << i) != 0) == inside).map(|i| pooled[i]).collect()
        };
        let (xs, ys) = (pick(true), pick(false));
        total += 1;
        if u(&xs, &ys) >= observed {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

const CALIBRATION_TRIALS: usize = 500;

fn statistics_oracles() -> Outcome {
    timed("statistics oracles", Duration::from_secs(60), || {
        // every sample over a 3-letter alphabet (ties included) with both
        // groups non-empty and at most 8 values in total
        let mut checked = 0u64;
        let mut mismatches = 0u64;
        for total in 2..=8usize {
            for nx in 1..total {
                let ny = total - nx;
                for code in 0..3u32.pow(total as u32) {
                    let mut c = code;
                    let vals: Vec<f64> = (0..total)
                        .map(|_| {
                            let v = f64::from(c % 3);
                            c /= 3;
                            v
                        })
                        .collect();
                    let (x, y) = vals.split_at(nx);
                    debug_assert_eq!(y.len(), ny);
                    let lib = mann_whitney_exact(x, y, Alternative::Greater).p_value;
                    checked += 1;
                    if lib != enumerate_u_tail(x, y) {
                        mismatches += 1;
                    }
                }
            }
        }
        let binom = binomial_tail(0, 238, 0.05, Alternative::Less).unwrap().p_value;
        let binom_ok = ((binom - 4.97e-6) / 4.97e-6).abs() <= 0.01;
        let phi = phi_coefficient(&TwoByTwo { n11: 3, n10: 1, n01: 1, n00: 3 }).unwrap();

        let normal = Normal::new(10.0, 2.0).unwrap();
        let mut covered = 0;
        for trial in 0..CALIBRATION_TRIALS {
            let mut r = rng::substream(42, trial as u64);
            let xs: Vec<f64> = (0..40).map(|_| normal.sample(&mut r)).collect();
            let ci = bootstrap_ci(&xs, 0.95, 2_000, r.next_u64()).unwrap();
            if ci.contains(10.0) {
                covered += 1;
            }
        }
        let coverage = f64::from(covered) / CALIBRATION_TRIALS as f64;
        let ok = mismatches == 0 && binom_ok && phi == 0.5 && (0.93..=0.97).contains(&coverage);
        (
            ok,
            format!(
                "Mann-Whitney exact vs enumeration: {mismatches} mismatches in {checked}; \
                 binomial(0, 238, 0.05) = {binom:.4e}; phi = {phi}; bootstrap coverage {coverage:.3}"
            ),
        )
    })
}

const CANDIDATES: [&str; 4] = ["L0H1", "L0H5", "L1H11", "L3H0"];

fn signature_pipeline() -> Outcome {
    timed("signature pipeline", Duration::from_secs(60), || {
        let obs = load_observations(fixture("signature.jsonl")).unwrap();
        let metrics = signature_metrics(&obs, &SignatureOptions::default()).unwrap();
        let ranked = classify_heads(&metrics);
        let top: BTreeSet<HeadId> = ranked.iter().take(4).map(|c| c.head).collect();
        let expected: BTreeSet<HeadId> = CANDIDATES.iter().map(|s| h(s)).collect();
        let mut ok = top == expected;
        let mut notes =
            vec![format!("top four = {}", top.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))];
        for (head, published) in CANDIDATES.iter().zip([146.0, 74.0, 53.0, 51.0]) {
            let s = metrics.iter().find(|m| m.head == h(head)).unwrap().selectivity;
            ok &= ((s - published) / published).abs() <= 0.10;
            notes.push(format!("{head} {s:.1} vs {published}"));
        }
        let group: Vec<HeadId> = CANDIDATES.iter().map(|s| h(s)).collect();
        let g = group_tests(&metrics, &group, 10_000, 42).unwrap();
        ok &= g.permutation.p_value < 1e-4 && (g.hit_effect.d - 12.3).abs() <= 0.5;
        notes.push(format!("permutation p = {:.3e}, d = {:.3}", g.permutation.p_value, g.hit_effect.d));
        (ok, notes.join(", "))
    })
}

fn independence() -> Outcome {
    timed("independence", Duration::from_secs(60), || {
        let obs = load_observations(fixture("independence.jsonl")).unwrap();
        let heads: Vec<HeadId> = CANDIDATES.iter().map(|s| h(s)).collect();
        let set = probe_set(&obs, &heads).unwrap();
        let r = independence_analysis(&heads, &set.verdicts(FP_THRESHOLD)).unwrap();
        let phi = r.mean_phi.unwrap();
        let combined_fired = r.histogram[heads.len()];
        let none = r.histogram[0];
        let some = r.probes - none - combined_fired;
        let pct = |c: usize| (1000.0 * c as f64 / r.probes as f64).round() / 10.0;
        let ok = (phi - 0.13).abs() <= 0.02
            && r.probes == 600
            && r.combined.combined_rate == 1.0 / 600.0
            && (pct(none), pct(some), pct(combined_fired)) == (19.7, 80.2, 0.2);
        (
            ok,
            format!(
                "mean phi {phi:.4}, AND rate {}/{} = {:.5}, histogram {}% / {}% / {}%",
                combined_fired,
                r.probes,
                r.combined.combined_rate,
                pct(none),
                pct(some),
                pct(combined_fired)
            ),
        )
    })
}

fn ablation() -> Outcome {
    timed("ablation", Duration::from_secs(60), || {
        let file = load_ablation_records(fixture("ablation.jsonl")).unwrap();
        let report = ablation_deltas(&file.records, 0.95, 10_000, 42).unwrap();
        let identity = report.deltas.iter().all(|d| d.interaction.estimate == d.repeat.estimate - d.norepeat.estimate);
        let find = |method| report.find(method, "bloom").map(|d| d.interaction.estimate).unwrap();
        let (zero, mean) = (find(AblationMethod::Zero), find(AblationMethod::Mean));
        let ok = identity && (zero - 14.6).abs() <= 0.1 && (mean + 3.7).abs() <= 0.1;
        (
            ok,
            format!(
                "identity holds for all {} sets: {identity}; zero {zero:+.3} pp, mean {mean:+.3} pp",
                report.deltas.len()
            ),
        )
    })
}

fn cli_csv(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bloomhead").chain(args.iter().copied()).map(String::from);
    let code = bloomhead_cli::run(argv, &mut out, &mut err);
    (code, out)
}

fn determinism() -> Outcome {
    timed("determinism", Duration::from_secs(300), || {
        let f = |n: &str| fixture(n).to_string_lossy().into_owned();
        let (sig, tax, cap, ind, res, nat, abl, dup, cpu, mps) = (
            f("signature.jsonl"),
            f("taxonomy.jsonl"),
            f("capacity.jsonl"),
            f("independence.jsonl"),
            f("resolution.jsonl"),
            f("naturalistic.jsonl"),
            f("ablation.jsonl"),
            f("duplicate.jsonl"),
            f("parity_cpu.jsonl"),
            f("parity_mps.jsonl"),
        );
        let runs: Vec<Vec<&str>> = vec![
            vec!["signature", "--input", &sig, "--resamples", "2000"],
            vec!["taxonomy", "--input", &tax, &sig, &cap, "--resamples", "200"],
            vec!["capacity", "--fit", "--input", &cap],
            vec!["fit", "--input", &cap],
            vec!["independence", "--input", &ind],
            vec!["resolution", "--input", &res],
            vec!["naturalistic", "--input", &nat, "--controls", "L0H3,L0H7,L1H2,L3H5"],
            vec!["ablation", "--input", &abl, "--resamples", "2000"],
            vec!["duplicate", "--input", &dup, "--bloom", "L0H1,L0H5,L1H11"],
            vec!["simulate-filter", "--m", "64", "--k", "3", "--probes", "2000"],
            vec!["simulate-filter", "--dsbf", "--probes", "300"],
            vec!["compare-dumps", "--input", &cpu, &mps],
        ];
        let mut bad = Vec::new();
        for args in &runs {
            let mut full = args.clone();
            full.extend(["--format", "csv", "--seed", "7"]);
            let (c1, a) = cli_csv(&full);
            let (c2, b) = cli_csv(&full);
            if c1 != 0 || c2 != 0 || a != b || a.is_empty() {
                bad.push(format!("{} (exit {c1}/{c2}, identical {})", args[0], a == b));
            }
        }
        let detail = if bad.is_empty() {
            format!("{} runs byte-identical on rerun", runs.len())
        } else {
            format!("differs or failed: {}", bad.join(", "))
        };
        (bad.is_empty(), detail)
    })
}

/// The exact-oracle check that has to hold for the grid to count as an
/// approximation gap rather than an implementation bug.
const EXACT_SE_GATE: f64 = 4.0;

fn main() {
    let (mc, worst_exact) = classical_monte_carlo();
    let outcomes = vec![
        closed_form_evaluation(),
        capacity_fit(),
        mc,
        lsh_collision_law(),
        statistics_oracles(),
        signature_pipeline(),
        independence(),
        ablation(),
        determinism(),
    ];
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    println!(
        "{} classical filter vs exact double-hashing oracle (m <= 64): worst {worst_exact:.2} SE, gate {EXACT_SE_GATE}",
        if worst_exact <= EXACT_SE_GATE { "PASS" } else { "FAIL" }
    );
    assert!(worst_exact <= EXACT_SE_GATE, "empirical filter disagrees with its exact oracle");
    let unexpected: Vec<&str> =
        outcomes.iter().filter(|o| !o.pass && !KNOWN_RED.contains(&o.name)).map(|o| o.name).collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
