use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use cascade_scope::cascade::{build_cascades, read_cascades, write_cascades, Cascade};
use cascade_scope::community::{load_partition, modularity, DetectorOptions, DetectorRegistry, Partition};
use cascade_scope::features::{extract_table, FeatureContext, FeatureGroupRegistry, FeatureTable};
use cascade_scope::graph::{build_graph, network_stats, read_log, write_log, NodalFeatureTable, RepostEvent, SocialGraph};
use cascade_scope::ml::{cross_validate, fit_with_smote, randomized_logistic_weights, threshold_sweep};
use cascade_scope::stats::{box_summary, measurement_study, StudyConfig};
use cascade_scope::synth::{generate_network, simulate_cascades, to_repost_log};
use cascade_scope::seed;
use log::{info, warn};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::manifest::{open, Stage};

const PAGERANK_DAMPING: f64 = 0.85;
const PAGERANK_TOL: f64 = 1e-10;

fn log_path(stage: &mut Stage<'_>, cfg: &PipelineConfig) -> Result<PathBuf> {
    match &cfg.paths.log {
        Some(p) => stage.input(p.clone(), "paths.log"),
        None => stage.artifact("synth", "repost_log.tsv"),
    }
}

fn read_events(stage: &mut Stage<'_>, cfg: &PipelineConfig) -> Result<Vec<RepostEvent>> {
    let path = log_path(stage, cfg)?;
    let readout = read_log(open(&path)?, &path.display().to_string(), cfg.strict)?;
    if !readout.skipped.is_empty() {
        warn!("{}: skipped {} malformed lines (first at line {})", path.display(), readout.skipped.len(), readout.skipped[0].line);
    }
    Ok(readout.events)
}

fn load_graph(stage: &mut Stage<'_>) -> Result<SocialGraph> {
    let nodes = stage.open("ingest", "nodes.tsv")?;
    let edges = stage.open("ingest", "edges.tsv")?;
    Ok(SocialGraph::read(nodes, edges, "ingest")?)
}

fn load_partition_artifact(stage: &mut Stage<'_>, g: &SocialGraph) -> Result<Partition> {
    let path = stage.artifact("communities", "partition.tsv")?;
    Ok(load_partition(&path, g)?)
}

fn load_cascades(stage: &mut Stage<'_>, g: &SocialGraph) -> Result<Vec<Cascade>> {
    let path = stage.artifact("cascades", "cascades.tsv")?;
    let mut names = g.names().clone();
    Ok(read_cascades(open(&path)?, &path.display().to_string(), &mut names)?)
}

fn load_table(stage: &mut Stage<'_>, group: &str) -> Result<FeatureTable> {
    let file = format!("{group}.csv");
    let r = stage.open("featurize", &file)?;
    Ok(FeatureTable::read_csv(r, group)?)
}

pub fn synth(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("synth", cfg)?;
    let (g, truth) = generate_network(&cfg.synth)?;
    let cascades = simulate_cascades(&g, &truth, &cfg.synth)?;
    let events = to_repost_log(&g, &cascades);
    let mut w = stage.create("repost_log.tsv")?;
    write_log(&mut w, &events)?;
    w.flush()?;
    let mut w = stage.create("truth_partition.tsv")?;
    truth.write(&g, &mut w)?;
    w.flush()?;
    info!("synthetic network: {} nodes, {} edges, {} cascades", g.node_count(), g.edge_count(), cascades.len());
    stage.write_json(
        "summary.json",
        &json!({
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "communities": truth.community_count(),
            "cascades": cascades.len(),
            "graph_window": cfg.synth.graph_window(),
            "cascade_window": cfg.synth.cascade_window(),
        }),
    )?;
    stage.finish()
}

pub fn ingest(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("ingest", cfg)?;
    let events = read_events(&mut stage, cfg)?;
    let g = build_graph(&events, cfg.graph_window);
    let mut w = stage.create("nodes.tsv")?;
    g.write_nodes(&mut w)?;
    w.flush()?;
    let mut w = stage.create("edges.tsv")?;
    g.write_edges(&mut w)?;
    w.flush()?;
    let stats = network_stats(&g);
    info!("graph: {} nodes, {} edges", stats.node_count, stats.edge_count);
    stage.write_json("network_stats.json", &stats)?;
    stage.finish()
}

pub fn communities(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("communities", cfg)?;
    let g = load_graph(&mut stage)?;
    let opts = DetectorOptions {
        max_passes: cfg.community.max_passes,
        max_iters: cfg.community.max_iters,
        partition_path: cfg.paths.partition.clone(),
    };
    if cfg.community.method == "file" {
        if let Some(p) = &cfg.paths.partition {
            stage.input(p.clone(), "paths.partition")?;
        }
    }
    let detector = DetectorRegistry::with_builtins().create(&cfg.community.method, &opts)?;
    let p = detector.detect(&g, seed::derive(cfg.seed, &[seed::hash_str("communities")]))?;
    let q = modularity(&g, &p);
    info!("{}: {} communities, modularity {q:.4}", detector.name(), p.community_count());
    let mut w = stage.create("partition.tsv")?;
    p.write(&g, &mut w)?;
    w.flush()?;
    let mut sizes = p.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    stage.write_json(
        "summary.json",
        &json!({
            "method": detector.name(),
            "communities": p.community_count(),
            "modularity": q,
            "largest_sizes": &sizes[..sizes.len().min(20)],
        }),
    )?;
    stage.finish()
}

pub fn cascades(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("cascades", cfg)?;
    let g = load_graph(&mut stage)?;
    let events = read_events(&mut stage, cfg)?;
    let in_window: Vec<&RepostEvent> = events.iter().filter(|e| cfg.cascade_window.contains(e.timestamp)).collect();
    let mut names = g.names().clone();
    let set = build_cascades(in_window, &mut names);
    if !set.orphans.is_empty() {
        warn!("{} reposts have no root post in the window", set.orphans.len());
    }
    let mut w = stage.create("cascades.tsv")?;
    write_cascades(&mut w, &set.cascades, &names)?;
    w.flush()?;
    let sizes: Vec<f64> = set.cascades.iter().map(|c| c.final_size() as f64).collect();
    let size_summary = if sizes.is_empty() { None } else { Some(box_summary(&sizes)?) };
    stage.write_json(
        "summary.json",
        &json!({
            "cascades": set.cascades.len(),
            "orphan_reposts": set.orphans.len(),
            "dropped_early": set.dropped_early,
            "reattributed": set.reattributed,
            "final_size": size_summary,
            "viral_at_th_test": set.cascades.iter().filter(|c| c.final_size() >= cfg.th_test).count(),
        }),
    )?;
    stage.finish()
}

pub fn featurize(cfg: &PipelineConfig, only: Option<&str>) -> Result<()> {
    let mut stage = Stage::begin("featurize", cfg)?;
    let g = load_graph(&mut stage)?;
    let p = load_partition_artifact(&mut stage, &g)?;
    let cascades = load_cascades(&mut stage, &g)?;
    let groups: Vec<String> = match only {
        Some(gname) => vec![gname.to_string()],
        None => cfg.groups.clone(),
    };
    let registry = FeatureGroupRegistry::with_builtins();
    let nodal = groups.iter().any(|n| n.starts_with("C_")).then(|| NodalFeatureTable::compute(&g, PAGERANK_DAMPING, PAGERANK_TOL));
    let mut ctx = FeatureContext::new(&g, &p, cfg.lambda_minutes);
    if let Some(t) = &nodal {
        ctx = ctx.with_nodal(t);
    }
    let mut summary = BTreeMap::new();
    for name in &groups {
        let group = registry.create(name, &cfg.features)?;
        let (table, skipped) = extract_table(group.as_ref(), &cascades, &ctx)?;
        info!("{name}: {} eligible cascades ({} viral at {}), {skipped} not eligible", table.len(), table.viral_count(cfg.th_test), cfg.th_test);
        let mut w = stage.create(&format!("{name}.csv"))?;
        table.write_csv(&mut w)?;
        w.flush()?;
        summary.insert(
            name.clone(),
            json!({
                "samples": table.len(),
                "not_eligible": skipped,
                "viral_at_th_test": table.viral_count(cfg.th_test),
                "columns": table.columns,
            }),
        );
    }
    stage.write_json("summary.json", &summary)?;
    stage.finish()
}

pub fn study(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("study", cfg)?;
    let g = load_graph(&mut stage)?;
    let p = load_partition_artifact(&mut stage, &g)?;
    let cascades = load_cascades(&mut stage, &g)?;
    let study_cfg = StudyConfig {
        m_list: cfg.study.m_list.clone(),
        t_list: cfg.study.t_list.clone(),
        threshold: cfg.th_test,
        lambda: cfg.lambda_minutes,
        min_adopters: cfg.features.min_adopters,
        alpha: cfg.study.alpha,
    };
    let report = measurement_study(&cascades, &g, &p, &study_cfg)?;
    report.write_boxes_csv(stage.create("boxes.csv")?)?;
    report.write_ks_csv(stage.create("ks.csv")?)?;
    report.write_stages_csv(stage.create("stages.csv")?)?;
    stage.write_json(
        "summary.json",
        &json!({
            "ks_tests": report.ks.len(),
            "significant": report.ks.iter().filter(|k| k.significant).count(),
            "warnings": report.warnings,
        }),
    )?;
    stage.finish()
}

pub fn train(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("train", cfg)?;
    let table = load_table(&mut stage, &cfg.group)?;
    let metrics = cross_validate(&table.samples, &cfg.ml).with_context(|| format!("cross-validating group {}", cfg.group))?;
    info!(
        "{}: precision {:.3} recall {:.3} F1 {:.3} (TH_tr {}, TH_ts {})",
        cfg.group, metrics.precision, metrics.recall, metrics.f1, cfg.th_train, cfg.th_test
    );
    stage.write_json(
        "metrics.json",
        &json!({
            "group": cfg.group,
            "th_train": cfg.th_train,
            "th_test": cfg.th_test,
            "samples": table.len(),
            "viral": table.viral_count(cfg.th_test),
            "metrics": metrics,
        }),
    )?;
    metrics.write_csv(stage.create("metrics.csv")?, cfg.th_train, cfg.th_test)?;

    let x: Vec<Vec<f64>> = table.samples.iter().map(|s| s.features.clone()).collect();
    let y: Vec<bool> = table.samples.iter().map(|s| s.is_viral(cfg.th_train)).collect();
    let model = fit_with_smote(&x, &y, &cfg.ml, seed::derive(cfg.seed, &[seed::hash_str("final-model")]))?;
    let mut w = stage.create("model.json")?;
    model.save_json(&mut w)?;
    w.flush()?;
    let weights = randomized_logistic_weights(&table.columns, &x, &y, &cfg.weights)?;
    stage.write_json("feature_weights.json", &weights)?;
    stage.finish()
}

pub fn sweep(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("sweep", cfg)?;
    let table = load_table(&mut stage, &cfg.group)?;
    let report = threshold_sweep(&table.samples, &cfg.ml, &cfg.sweep.th_train_list, cfg.sweep.mode)?;
    for p in &report.points {
        info!("TH_tr {}: precision {:.3} recall {:.3}", p.th_train, p.metrics.precision, p.metrics.recall);
    }
    stage.write_json("sweep.json", &json!({ "group": cfg.group, "report": report }))?;
    report.write_csv(stage.create("sweep.csv")?)?;
    stage.finish()
}

pub fn stats(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = Stage::begin("stats", cfg)?;
    let g = load_graph(&mut stage)?;
    let net = network_stats(&g);
    let nodal = NodalFeatureTable::compute(&g, PAGERANK_DAMPING, PAGERANK_TOL);
    let max_core = g.nodes().filter_map(|v| nodal.get(v)).map(|f| f.k_shell).max().unwrap_or(0);
    stage.write_json(
        "properties.json",
        &json!({
            "network": net,
            "max_k_shell": max_core,
        }),
    )?;
    stage.finish()
}
