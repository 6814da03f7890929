//! Acceptance checks, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line before asserting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use cascade_scope::cascade::{build_cascades, snapshot_by_size, snapshot_by_time, Adoption, Cascade, Observation, Snapshot};
use cascade_scope::community::{louvain, louvain_with_trace, Partition};
use cascade_scope::features::{
    avg_time_to_adoption, communities_of, extract_table, gini_impurity, overlap, FeatureContext, FeatureGroupRegistry, FeatureSettings, FeatureTable,
};
use cascade_scope::graph::{build_graph, read_log, Interner, NodeId, SocialGraph, TimeWindow};
use cascade_scope::ml::{
    cross_validate, logistic_objective, logistic_smooth_gradient, randomized_logistic_weights, smote_with_parents, stratified_folds, threshold_sweep,
    train_forest, ExperimentConfig, ForestConfig, Metrics, RandomizedLogisticConfig, SweepMode,
};
use cascade_scope::seed;
use cascade_scope::stats::ks_two_sample;
use cascade_scope::synth::{generate_network, simulate_cascades, to_repost_log, SynthConfig};
use rand::seq::SliceRandom;
use rand::Rng;

const LAMBDA: f64 = 30.0;

/// Written straight to stdout so the line survives the test harness's capture.
fn report(criterion: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    emit(&format!("[{tag}] criterion {criterion} ({name}): {detail}"));
}

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

// ---------------------------------------------------------------------------
// random snapshot fixtures

struct World {
    g: SocialGraph,
    p: Partition,
    cascade: Cascade,
}

/// Random digraph of at most 100 nodes, random partition and a random
/// cascade over it. Adoption times are distinct integers so exposure ages
/// regularly land exactly on the λ boundary.
fn random_world(rng: &mut impl Rng) -> World {
    let n = rng.random_range(2..=100usize);
    let mut names = Interner::new();
    for i in 0..n {
        names.intern(&format!("v{i:03}"));
    }
    let density = rng.random_range(0.01..0.2);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                edges.push((NodeId(a as u32), NodeId(b as u32)));
            }
        }
    }
    let g = SocialGraph::from_edges(names, edges);
    let k = rng.random_range(1..=8u32);
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let p = Partition::from_labels(&labels, "random");

    let size = rng.random_range(1..=n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut t = 0.0;
    let mut adoptions: Vec<Adoption> = Vec::with_capacity(size);
    for (i, &v) in order[..size].iter().enumerate() {
        if i > 0 {
            t += f64::from(rng.random_range(1..=20u32));
        }
        let source = (i > 0).then(|| adoptions[rng.random_range(0..i)].node);
        adoptions.push(Adoption { node: NodeId(v as u32), time: t, source });
    }
    World {
        g,
        p,
        cascade: Cascade {
            root_message_id: "c".into(),
            adoptions,
        },
    }
}

fn random_snapshot(w: &World, rng: &mut impl Rng) -> Snapshot {
    if rng.random_bool(0.5) {
        let m = rng.random_range(1..=w.cascade.final_size());
        snapshot_by_size(&w.cascade, &w.g, m, LAMBDA).unwrap()
    } else {
        let end = w.cascade.adoptions.last().unwrap().time;
        let t = f64::from(rng.random_range(0..=(end as u32 + 60)));
        snapshot_by_time(&w.cascade, &w.g, t, LAMBDA).unwrap()
    }
}

fn naive_label(p: &Partition, v: NodeId) -> u32 {
    p.assignment()[v.index()].0
}

fn naive_counts(set: &[NodeId], p: &Partition) -> Vec<(u32, usize)> {
    let mut labels: Vec<u32> = set.iter().map(|&v| naive_label(p, v)).collect();
    labels.sort_unstable();
    let mut out: Vec<(u32, usize)> = Vec::new();
    for l in labels {
        match out.last_mut() {
            Some((c, k)) if *c == l => *k += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

fn naive_gini(set: &[NodeId], p: &Partition) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for (_, k) in naive_counts(set, p) {
        let share = k as f64 / set.len() as f64;
        sum += share * share;
    }
    1.0 - sum
}

fn naive_overlap(a: &[NodeId], b: &[NodeId], p: &Partition) -> usize {
    let la: BTreeSet<u32> = a.iter().map(|&v| naive_label(p, v)).collect();
    let lb: BTreeSet<u32> = b.iter().map(|&v| naive_label(p, v)).collect();
    la.iter().filter(|c| lb.contains(c)).count()
}

/// Exposed users and their exposure ages by scanning every adopter pair.
fn naive_exposure(s: &Snapshot, g: &SocialGraph) -> HashMap<NodeId, f64> {
    let at = s.observed_at();
    let adopters: HashSet<NodeId> = s.adopters.iter().map(|a| a.node).collect();
    let mut out = HashMap::new();
    for v in g.nodes() {
        if adopters.contains(&v) {
            continue;
        }
        let earliest = s
            .adopters
            .iter()
            .filter(|a| g.has_edge(a.node, v))
            .map(|a| a.time)
            .fold(f64::INFINITY, f64::min);
        if earliest.is_finite() {
            out.insert(v, at - earliest);
        }
    }
    out
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = seed::rng(1, &[]);
    let mut mismatches = Vec::new();
    for i in 0..1000 {
        let w = random_world(&mut rng);
        let s = random_snapshot(&w, &mut rng);
        let u = s.adopter_ids();
        let sets = [&u, &s.recently_exposed, &s.past_exposed];
        for set in sets {
            let profile = communities_of(set, &w.p).unwrap();
            let got: Vec<(u32, usize)> = profile.counts.iter().map(|(c, &k)| (c.0, k)).collect();
            if got != naive_counts(set, &w.p) {
                mismatches.push(format!("snapshot {i}: communities_of"));
            }
            if (gini_impurity(set, &w.p).unwrap() - naive_gini(set, &w.p)).abs() > 1e-12 {
                mismatches.push(format!("snapshot {i}: gini"));
            }
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            if overlap(sets[a], sets[b], &w.p).unwrap() != naive_overlap(sets[a], sets[b], &w.p) {
                mismatches.push(format!("snapshot {i}: overlap {a}-{b}"));
            }
        }
        if let Observation::Size { m, .. } = s.observation {
            let naive = s.adopters.iter().map(|a| a.time).sum::<f64>() / m as f64;
            if (avg_time_to_adoption(&s).unwrap() - naive).abs() > 1e-12 {
                mismatches.push(format!("snapshot {i}: avg time"));
            }
        }
        for (v, age) in naive_exposure(&s, &w.g) {
            if (s.t_expose(v).unwrap() - age).abs() > 1e-12 {
                mismatches.push(format!("snapshot {i}: t_expose of {v}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = mismatches.is_empty() && elapsed < 60.0;
    report(1, "oracle equivalence", ok, &format!("1000 snapshots, {} mismatches, {elapsed:.1}s", mismatches.len()));
    assert!(mismatches.is_empty(), "{:?}", &mismatches[..mismatches.len().min(10)]);
    assert!(elapsed < 60.0);
}

#[test]
fn criterion_2_snapshot_invariants() {
    let start = Instant::now();
    let mut rng = seed::rng(2, &[]);
    let mut failures = Vec::new();
    let mut boundary_hits = 0usize;
    for i in 0..10_000 {
        let w = random_world(&mut rng);
        let s = random_snapshot(&w, &mut rng);
        let adopters: HashSet<NodeId> = s.adopter_ids().into_iter().collect();
        let exposed = naive_exposure(&s, &w.g);

        let f: HashSet<NodeId> = s.recently_exposed.iter().copied().collect();
        let n: HashSet<NodeId> = s.past_exposed.iter().copied().collect();
        if !f.is_disjoint(&n) {
            failures.push(format!("{i}: F and N intersect"));
        }
        let union: HashSet<NodeId> = f.union(&n).copied().collect();
        let expected: HashSet<NodeId> = exposed.keys().copied().collect();
        if union != expected {
            failures.push(format!("{i}: F ∪ N differs from the exposed set"));
        }
        if union.iter().any(|v| adopters.contains(v)) {
            failures.push(format!("{i}: adopter among exposed"));
        }
        for (v, age) in &exposed {
            if *age == LAMBDA {
                boundary_hits += 1;
            }
            if (*age <= LAMBDA) != f.contains(v) {
                failures.push(format!("{i}: {v} with age {age} on the wrong side of λ"));
            }
        }

        // the size snapshot at m equals the time snapshot at t(m)
        let m = rng.random_range(1..=w.cascade.final_size());
        let by_size = snapshot_by_size(&w.cascade, &w.g, m, LAMBDA).unwrap();
        let t_m = w.cascade.adoptions[m - 1].time;
        let by_time = snapshot_by_time(&w.cascade, &w.g, t_m, LAMBDA).unwrap();
        if by_size.adopter_ids() != by_time.adopter_ids()
            || by_size.recently_exposed != by_time.recently_exposed
            || by_size.past_exposed != by_time.past_exposed
            || by_size.observed_at() != by_time.observed_at()
        {
            failures.push(format!("{i}: size/time snapshots disagree at m = {m}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && elapsed < 120.0 && boundary_hits > 0;
    report(
        2,
        "snapshot invariants",
        ok,
        &format!("10000 snapshots, {} violations, {boundary_hits} exposures exactly at λ, {elapsed:.1}s", failures.len()),
    );
    assert!(failures.is_empty(), "{:?}", &failures[..failures.len().min(10)]);
    assert!(boundary_hits > 0, "the λ boundary was never exercised");
    assert!(elapsed < 120.0);
}

fn brute_force_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |xs: &[f64], x: f64| xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64;
    a.iter().chain(b).map(|&x| (ecdf(a, x) - ecdf(b, x)).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_3_ks_correctness() {
    let mut rng = seed::rng(3, &[]);
    let mut bad = 0;
    for _ in 0..500 {
        let n1 = rng.random_range(1..=50);
        let n2 = rng.random_range(1..=50);
        // a coarse grid produces plenty of ties
        let a: Vec<f64> = (0..n1).map(|_| f64::from(rng.random_range(0..20u32)) * 0.5).collect();
        let b: Vec<f64> = (0..n2).map(|_| f64::from(rng.random_range(0..25u32)) * 0.5).collect();
        if ks_two_sample(&a, &b).unwrap().statistic != brute_force_ks(&a, &b) {
            bad += 1;
        }
    }
    let same: Vec<f64> = (0..40).map(|_| rng.random_range(-5.0..5.0)).collect();
    let d_same = ks_two_sample(&same, &same).unwrap().statistic;
    let low: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0)).collect();
    let high: Vec<f64> = (0..17).map(|_| rng.random_range(2.0..3.0)).collect();
    let d_disjoint = ks_two_sample(&low, &high).unwrap().statistic;
    let ok = bad == 0 && d_same == 0.0 && d_disjoint == 1.0;
    report(3, "KS correctness", ok, &format!("500 pairs, {bad} mismatches, D(identical) = {d_same}, D(disjoint) = {d_disjoint}"));
    assert_eq!(bad, 0);
    assert_eq!(d_same, 0.0);
    assert_eq!(d_disjoint, 1.0);
}

/// Fraction of node pairs whose co-membership agrees between two labelings.
fn pair_agreement(a: &Partition, b: &Partition) -> f64 {
    let (la, lb) = (a.assignment(), b.assignment());
    let n = la.len();
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (la[i] == la[j]) == (lb[i] == lb[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

#[test]
fn criterion_4_louvain_recovers_planted_partition() {
    let mut worst = 1.0f64;
    let mut monotone = true;
    for s in 0..10u64 {
        let cfg = SynthConfig {
            n_nodes: 500,
            n_communities: 10,
            p_intra: 0.3,
            p_inter: 0.005,
            n_cascades: 0,
            seed: 100 + s,
            ..SynthConfig::default()
        };
        let (g, truth) = generate_network(&cfg).unwrap();
        let out = louvain_with_trace(&g, s, 32);
        monotone &= out.pass_modularity.windows(2).all(|w| w[1] >= w[0]);
        worst = worst.min(pair_agreement(&out.partition, &truth));
    }
    let ok = worst >= 0.95 && monotone;
    report(4, "Louvain on planted SBM", ok, &format!("worst pair agreement {worst:.4} over 10 seeds, per-pass modularity non-decreasing: {monotone}"));
    assert!(worst >= 0.95);
    assert!(monotone);
}

fn sample(id: usize, features: Vec<f64>, final_size: usize) -> cascade_scope::features::LabeledSample {
    cascade_scope::features::LabeledSample {
        cascade_id: format!("c{id}"),
        features,
        final_size,
    }
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn criterion_5_ml_machinery() {
    let mut rng = seed::rng(5, &[]);
    let mut notes = Vec::new();

    // SMOTE: every synthetic point lies on the segment between its parents
    let minority: Vec<Vec<f64>> = (0..40).map(|_| (0..6).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
    let points = smote_with_parents(&minority, 5, 500, 11).unwrap();
    let off_segment = points
        .iter()
        .filter(|p| {
            let (a, b) = (&minority[p.base], &minority[p.neighbor]);
            !(0.0..=1.0).contains(&p.u)
                || p.features.iter().zip(a.iter().zip(b)).any(|(&x, (&lo, &hi))| {
                    (x - (lo + p.u * (hi - lo))).abs() > 1e-9 || x < lo.min(hi) || x > lo.max(hi)
                })
        })
        .count();
    notes.push(format!("{off_segment} SMOTE points off-segment"));

    // stratified folds: viral counts per fold differ by at most one
    let mut fold_spread = 0usize;
    for trial in 0..50u64 {
        let n = rng.random_range(20..300);
        let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.15)).collect();
        let folds = 10;
        if labels.iter().filter(|&&l| l).count() < folds {
            continue;
        }
        let assign = stratified_folds(&labels, folds, trial).unwrap();
        let mut pos = vec![0usize; folds];
        for (i, &f) in assign.iter().enumerate() {
            if labels[i] {
                pos[f] += 1;
            }
        }
        fold_spread = fold_spread.max(pos.iter().max().unwrap() - pos.iter().min().unwrap());
    }
    notes.push(format!("max fold viral spread {fold_spread}"));

    // forest determinism
    let x: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] + 0.3 * r[1] > 0.7).collect();
    let fc = ForestConfig { n_trees: 20, ..ForestConfig::default() };
    let json = |seed| {
        let mut buf = Vec::new();
        train_forest(&x, &y, &fc, seed).unwrap().save_json(&mut buf).unwrap();
        buf
    };
    let deterministic = json(9) == json(9) && json(9) != json(10);
    notes.push(format!("forest deterministic: {deterministic}"));

    // a feature that equals the label gives perfect precision and recall
    let th = 500;
    let oracle: Vec<_> = (0..400)
        .map(|i| {
            let size = if i % 8 == 0 { rng.random_range(500..3000) } else { rng.random_range(50..500) };
            let noise: f64 = rng.random_range(0.0..1.0);
            sample(i, vec![f64::from(u8::from(size >= th)), noise], size)
        })
        .collect();
    let cv = ExperimentConfig {
        th_train: th,
        th_test: th,
        folds: 5,
        repeats: 2,
        forest: ForestConfig { n_trees: 25, ..ForestConfig::default() },
        seed: 3,
        ..ExperimentConfig::default()
    };
    let m = cross_validate(&oracle, &cv).unwrap();
    let oracle_ok = m.precision == 1.0 && m.recall == 1.0;
    notes.push(format!("oracle P {} R {}", m.precision, m.recall));

    // permutation baseline: shuffled labels leave precision at the base rate
    let informative: Vec<_> = (0..300)
        .map(|i| {
            let viral = i % 4 == 0;
            let size = if viral { 800 } else { 100 };
            let signal = if viral { 1.0 } else { 0.0 } + rng.random_range(-0.6..0.6);
            sample(i, vec![signal, rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)], size)
        })
        .collect();
    let base_rate = informative.iter().filter(|s| s.is_viral(th)).count() as f64 / informative.len() as f64;
    let mut precisions = Vec::new();
    for shuffle in 0..20u64 {
        let mut sizes: Vec<usize> = informative.iter().map(|s| s.final_size).collect();
        sizes.shuffle(&mut seed::rng(55, &[shuffle]));
        let permuted: Vec<_> = informative.iter().zip(sizes).map(|(s, size)| sample(0, s.features.clone(), size)).collect();
        let cfg = ExperimentConfig { repeats: 1, seed: shuffle, ..cv.clone() };
        let m = cross_validate(&permuted, &cfg).unwrap();
        precisions.push(m.precision);
    }
    let (mean, sd) = mean_and_sd(&precisions);
    // two-sided 95% t interval, 19 degrees of freedom
    let half = 2.093 * sd / (precisions.len() as f64).sqrt();
    let in_ci = (mean - half..=mean + half).contains(&base_rate);
    notes.push(format!("permuted precision {mean:.3} ± {half:.3} vs base rate {base_rate:.3}"));

    // L1-logistic smooth-part gradient against central differences
    let lx: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let ly: Vec<bool> = lx.iter().map(|r| r[0] - r[2] + rng.random_range(-1.0..1.0) > 0.0).collect();
    let w = vec![0.3, -0.7, 0.2, 1.1];
    let b = -0.4;
    let (grad, grad_b) = logistic_smooth_gradient(&lx, &ly, &w, b);
    let h = 1e-6;
    let mut worst_rel = 0.0f64;
    for j in 0..=w.len() {
        let bump = |d: f64| {
            let mut w2 = w.clone();
            let mut b2 = b;
            if j < w.len() {
                w2[j] += d;
            } else {
                b2 += d;
            }
            logistic_objective(&lx, &ly, &w2, b2, 0.0)
        };
        let numeric = (bump(h) - bump(-h)) / (2.0 * h);
        let analytic = if j < w.len() { grad[j] } else { grad_b };
        worst_rel = worst_rel.max((numeric - analytic).abs() / analytic.abs().max(1e-12));
    }
    notes.push(format!("gradient rel err {worst_rel:.2e}"));

    let ok = off_segment == 0 && fold_spread <= 1 && deterministic && oracle_ok && in_ci && worst_rel <= 1e-4;
    report(5, "ML machinery", ok, &notes.join(", "));
    assert_eq!(off_segment, 0);
    assert!(fold_spread <= 1);
    assert!(deterministic);
    assert!(oracle_ok);
    assert!(in_ci, "base rate {base_rate} outside {mean} ± {half}");
    assert!(worst_rel <= 1e-4);
}

// ---------------------------------------------------------------------------
// default synthetic corpus

/// Observation size and virality threshold used on the synthetic corpus.
const CORPUS_M: usize = 300;
const CORPUS_TH: usize = 1000;
const SWEEP_LIST: [usize; 5] = [600, 800, 1000, 1200, 1400];

struct Corpus {
    a_m: FeatureTable,
    d_m: FeatureTable,
    cascades: usize,
}

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let cfg = SynthConfig::default();
        let (g, truth) = generate_network(&cfg).unwrap();
        let simulated = simulate_cascades(&g, &truth, &cfg).unwrap();
        let log = to_repost_log(&g, &simulated);
        drop(simulated);
        let graph = build_graph(&log, cfg.graph_window());
        let window = cfg.cascade_window();
        let mut names = graph.names().clone();
        let set = build_cascades(log.iter().filter(|e| window.contains(e.timestamp)), &mut names);
        drop(log);
        let partition = louvain(&graph, cfg.seed, 32);
        let ctx = FeatureContext::new(&graph, &partition, LAMBDA);
        let settings = FeatureSettings {
            m_list: vec![CORPUS_M / 2, CORPUS_M],
            baseline_m: CORPUS_M,
            ..FeatureSettings::default()
        };
        let registry = FeatureGroupRegistry::with_builtins();
        let table = |name: &str| extract_table(registry.create(name, &settings).unwrap().as_ref(), &set.cascades, &ctx).unwrap().0;
        Corpus {
            a_m: table("A_m"),
            d_m: table("D_m"),
            cascades: set.cascades.len(),
        }
    })
}

fn corpus_experiment() -> ExperimentConfig {
    ExperimentConfig {
        th_train: CORPUS_TH,
        th_test: CORPUS_TH,
        seed: SynthConfig::default().seed,
        ..ExperimentConfig::default()
    }
}

#[test]
fn criterion_6_diversity_beats_baseline() {
    let start = Instant::now();
    let c = corpus();
    let cfg = corpus_experiment();
    let a: Metrics = cross_validate(&c.a_m.samples, &cfg).unwrap();
    let d: Metrics = cross_validate(&c.d_m.samples, &cfg).unwrap();
    let viral = c.a_m.viral_count(CORPUS_TH);
    let gap = a.f1 - d.f1;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = gap >= 0.10 && viral >= 100 && elapsed < 600.0;
    report(
        6,
        "A beats D",
        ok,
        &format!(
            "{} cascades, {} eligible at m = {CORPUS_M}, {viral} viral at TH = {CORPUS_TH}; F1 A_m {:.3} vs D_m {:.3} (gap {gap:.3}) over {} repeats, {elapsed:.0}s",
            c.cascades,
            c.a_m.len(),
            a.f1,
            d.f1,
            a.repeats
        ),
    );
    assert!(viral >= 100);
    assert!(gap >= 0.10, "F1 gap {gap}");
    assert!(elapsed < 600.0);
}

#[test]
fn criterion_7_threshold_sweep_trend() {
    let c = corpus();
    let sweep = threshold_sweep(&c.a_m.samples, &corpus_experiment(), &SWEEP_LIST, SweepMode::TrainOnly).unwrap();
    let lo = &sweep.points.first().unwrap().metrics;
    let hi = &sweep.points.last().unwrap().metrics;
    let recall_ok = hi.recall <= lo.recall;
    let precision_ok = hi.precision >= lo.precision;
    let size_ok = match (lo.avg_final_size_correct_viral, hi.avg_final_size_correct_viral) {
        (Some(l), Some(h)) => h > l,
        _ => false,
    };
    let fmt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.0}"));
    let ok = recall_ok && precision_ok && size_ok;
    report(
        7,
        "threshold sweep",
        ok,
        &format!(
            "TH_tr {} -> {}: recall {:.3} -> {:.3}, precision {:.3} -> {:.3}, correct-viral mean size {} -> {}",
            SWEEP_LIST[0],
            SWEEP_LIST[SWEEP_LIST.len() - 1],
            lo.recall,
            hi.recall,
            lo.precision,
            hi.precision,
            fmt(lo.avg_final_size_correct_viral),
            fmt(hi.avg_final_size_correct_viral)
        ),
    );
    assert!(recall_ok);
    assert!(precision_ok);
    assert!(size_ok);
}

#[test]
fn criterion_8_feature_weights() {
    let mut rng = seed::rng(8, &[]);
    let columns: Vec<String> = ["overlap_U_F", "overlap_U_N", "overlap_F_N", "noise_1", "noise_2", "noise_3", "noise_4"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let n = 600;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..columns.len()).map(|_| f64::from(rng.random_range(0..20u32))).collect();
        let score = 0.35 * (row[0] - 9.5) + 0.3 * (row[1] - 9.5) + 0.3 * (row[2] - 9.5);
        let p = 1.0 / (1.0 + (-score).exp());
        y.push(rng.random_bool(p));
        x.push(row);
    }
    let cfg = RandomizedLogisticConfig { seed: 8, ..RandomizedLogisticConfig::default() };
    let w = randomized_logistic_weights(&columns, &x, &y, &cfg).unwrap();
    let planted_min = columns[..3].iter().map(|c| w.get(c).unwrap()).fold(1.0, f64::min);
    let noise_max = columns[3..].iter().map(|c| w.get(c).unwrap()).fold(0.0, f64::max);
    let ok = planted_min >= 0.5 && noise_max <= 0.2;
    report(8, "feature weights", ok, &format!("min overlap weight {planted_min:.2}, max noise weight {noise_max:.2}"));
    assert!(planted_min >= 0.5);
    assert!(noise_max <= 0.2);
}

/// Runs only when `CASCADE_SCOPE_WEIBO` points at the Weibo repost log in
/// canonical format. `CASCADE_SCOPE_WEIBO_GRAPH_WINDOW` and
/// `CASCADE_SCOPE_WEIBO_CASCADE_WINDOW` (`start,end` unix seconds) select the
/// historical and cascade windows; both default to the whole log.
#[test]
fn criterion_9_dataset_mode() {
    let Ok(path) = std::env::var("CASCADE_SCOPE_WEIBO") else {
        emit("[SKIP] criterion 9 (dataset mode): CASCADE_SCOPE_WEIBO not set");
        return;
    };
    let window = |var: &str| -> TimeWindow {
        std::env::var(var).map_or(TimeWindow::ALL, |v| {
            let (a, b) = v.split_once(',').expect("window must be `start,end`");
            TimeWindow::new(a.trim().parse().unwrap(), b.trim().parse().unwrap())
        })
    };
    let file = std::fs::File::open(&path).unwrap();
    let log = read_log(std::io::BufReader::new(file), &path, false).unwrap().events;
    let graph = build_graph(&log, window("CASCADE_SCOPE_WEIBO_GRAPH_WINDOW"));
    let cw = window("CASCADE_SCOPE_WEIBO_CASCADE_WINDOW");
    let mut names = graph.names().clone();
    let set = build_cascades(log.iter().filter(|e| cw.contains(e.timestamp)), &mut names);
    drop(log);
    let partition = louvain(&graph, 0, 32);
    let ctx = FeatureContext::new(&graph, &partition, LAMBDA);
    let settings = FeatureSettings::default();
    let group = FeatureGroupRegistry::with_builtins().create("A_m", &settings).unwrap();
    let (table, _) = extract_table(group.as_ref(), &set.cascades, &ctx).unwrap();
    let viral_share = table.viral_count(500) as f64 / table.len() as f64;
    let metrics = cross_validate(&table.samples, &ExperimentConfig::default()).unwrap();

    let counts_ok = graph.node_count() == 17_996_803 && graph.edge_count() == 52_472_547;
    let eligible_ok = table.len() == 13_285 && (viral_share * 1000.0).round() == 15.0;
    let metrics_ok = (metrics.precision - 0.69).abs() <= 0.10 && (metrics.recall - 0.52).abs() <= 0.10;
    let ok = counts_ok && eligible_ok && metrics_ok;
    report(
        9,
        "dataset mode",
        ok,
        &format!(
            "{} nodes, {} edges, {} eligible at m = 50 ({:.1}% viral), P {:.3} R {:.3}",
            graph.node_count(),
            graph.edge_count(),
            table.len(),
            100.0 * viral_share,
            metrics.precision,
            metrics.recall
        ),
    );
    assert!(counts_ok);
    assert!(eligible_ok);
    assert!(metrics_ok);
}
