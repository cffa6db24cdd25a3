use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use clap::Args;
use proofslice::cti::CtiConfig;
use proofslice::graph::{
    check_graph_validity, do_ind_proof_slice, from_json, to_dot, to_json, to_report, GraphFile, InferenceConfig,
    InferenceError, Outcome, ReachMode, ReachSummary,
};
use proofslice::model::Model;
use proofslice::reach::{self, ExploreMode, Provenance, Reachable, StateSet};
use proofslice::slicing::slice as var_slice;
use proofslice::synth::{table::TableError, SynthError};
use serde_json::json;

use crate::inputs::{self, Inputs};
use crate::manifest::RunManifest;
use crate::{CtiArgs, ExploreArgs, Failure, ModeArg, EXIT_INVALID, EXIT_PARTIAL, EXIT_RESOURCE};

pub struct Context {
    pub cache_dir: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

impl Context {
    fn run_manifest(&self, command: &str) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join("runs").join(format!("{command}.json")))
    }
}

#[derive(Args, Debug)]
pub struct ReachArgs {
    /// Specification (.gap).
    pub spec: PathBuf,
    /// Instance (.inst).
    pub instance: PathBuf,
    #[command(flatten)]
    pub explore: ExploreArgs,
    /// Seed for sampled exploration.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the size of the projection onto these variables
    /// (comma-separated; repeatable).
    #[arg(long)]
    pub project: Vec<String>,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    pub spec: PathBuf,
    pub instance: PathBuf,
    /// Predicate grammar (.grm).
    pub grammar: PathBuf,
    /// Safety lemma to prove (default: the first lemma of the spec).
    #[arg(long)]
    pub safety: Option<String>,
    /// Directory for the graph file, DOT rendering and report.
    #[arg(long, short, default_value = "proofslice-out")]
    pub out: PathBuf,
    /// Candidates sampled per round.
    #[arg(long, default_value_t = 80_000)]
    pub ninvs: usize,
    /// Literals per candidate clause (default: the grammar's bound).
    #[arg(long)]
    pub maxliterals: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_rounds: usize,
    /// Seconds per local inference task.
    #[arg(long, default_value_t = 600)]
    pub node_timeout: u64,
    /// Seconds for the whole inference.
    #[arg(long, default_value_t = 14_400)]
    pub global_timeout: u64,
    /// States enumerated when comparing a new lemma with existing ones.
    #[arg(long, default_value_t = 1 << 22)]
    pub equivalence_limit: u64,
    #[command(flatten)]
    pub cti: CtiArgs,
    #[command(flatten)]
    pub explore: ExploreArgs,
}

#[derive(Args, Debug)]
pub struct SliceArgs {
    pub spec: PathBuf,
    /// Lemmas to slice (default: all).
    #[arg(long)]
    pub lemma: Vec<String>,
    /// Also report the size of the grammar slice.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// An instance, needed only to type-check the grammar.
    #[arg(long, requires = "grammar")]
    pub instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub spec: PathBuf,
    pub instance: PathBuf,
    /// Graph file written by `infer`.
    pub graph: PathBuf,
    /// Check even if the graph was built from a different spec or instance.
    #[arg(long)]
    pub allow_hash_mismatch: bool,
    /// Write per-node verdicts as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub cti: CtiArgs,
}

#[derive(Args, Debug)]
pub struct ExportDotArgs {
    pub spec: PathBuf,
    pub instance: PathBuf,
    pub graph: PathBuf,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub allow_hash_mismatch: bool,
}

fn explore_mode(a: &ExploreArgs, seed: u64) -> ExploreMode {
    match a.mode {
        ModeArg::Exhaustive => ExploreMode::Exhaustive { max_states: a.max_states },
        ModeArg::Sampled => ExploreMode::Sampled { budget: a.budget, seed },
    }
}

fn record_model(m: &mut RunManifest, inputs: &Inputs) {
    m.inputs(&inputs.files);
    m.spec_hash = Some(hex::encode(reach::spec_hash(&inputs.model)));
    m.instance_hash = Some(hex::encode(reach::instance_hash(&inputs.model)));
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::Exhaustive => "exhaustive",
        Provenance::Sampled { .. } => "sampled",
        Provenance::Truncated { .. } => "truncated",
    }
}

fn var_set(model: &Model, list: &str) -> Result<BTreeSet<usize>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| model.sys.var_index(n).ok_or_else(|| Failure::Input(anyhow!("unknown variable `{n}`"))))
        .collect()
}

pub fn reach(ctx: &Context, a: &ReachArgs, m: &mut RunManifest) -> Result<u8, Failure> {
    m.default_path = ctx.run_manifest("reach");
    let inputs = inputs::load(&a.spec, &a.instance)?;
    record_model(m, &inputs);
    let mode = explore_mode(&a.explore, a.seed);
    m.seed = Some(a.seed);
    m.config = json!({ "mode": format!("{mode:?}") });
    let model = &inputs.model;
    let (set, path, cached) = inputs::reachable(model, mode, ctx.cache_dir.as_deref())?;
    println!("reachable states: {}", set.len());
    println!("provenance: {}", provenance_name(set.provenance));
    let r = Reachable::new(set);
    let mut projections = serde_json::Map::new();
    for list in &a.project {
        let vars = var_set(model, list)?;
        let n = r.project(&vars).len();
        let label = model.sys.var_names(&vars).join(",");
        println!("projection {{{label}}}: {n}");
        projections.insert(label, json!(n));
    }
    if let Some(p) = &path {
        println!("cache: {}", p.display());
        m.artifacts.push(p.clone());
    }
    m.outcome = json!({
        "states": r.len(),
        "provenance": r.provenance(),
        "from_cache": cached,
        "projections": projections,
    });
    Ok(0)
}

fn inference_config(a: &InferArgs) -> InferenceConfig {
    InferenceConfig {
        n_invs: a.ninvs,
        n_ctis: a.cti.nctis,
        max_literals: a.maxliterals,
        max_rounds: a.max_rounds,
        seed: a.cti.seed,
        workers: None,
        node_timeout_secs: a.node_timeout,
        global_timeout_secs: a.global_timeout,
        cti_mode: a.cti.cti_mode.into(),
        cti_exhaustive_limit: a.cti.cti_exhaustive_limit,
        cti_samples: a.cti.cti_samples,
        equivalence_limit: a.equivalence_limit,
        reach: match a.explore.mode {
            ModeArg::Exhaustive => ReachMode::Exhaustive { max_states: a.explore.max_states },
            ModeArg::Sampled => ReachMode::Sampled { budget: a.explore.budget, seed: a.cti.seed },
        },
        ..InferenceConfig::default()
    }
}

fn write_artifact(path: &Path, text: &str, m: &mut RunManifest) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Input)?;
    m.artifacts.push(path.to_path_buf());
    Ok(())
}

fn inference_failure(e: InferenceError) -> Failure {
    match e {
        InferenceError::Synth(SynthError::Table(TableError::TooLarge(..))) => Failure::Resource(e.into()),
        e => Failure::Input(e.into()),
    }
}

pub fn infer(ctx: &Context, a: &InferArgs, m: &mut RunManifest) -> Result<u8, Failure> {
    m.default_path = Some(a.out.join("manifest.json"));
    let mut inputs = inputs::load(&a.spec, &a.instance)?;
    let grammar = inputs::load_grammar(&mut inputs, &a.grammar)?;
    record_model(m, &inputs);
    let model = &inputs.model;
    let safety = inputs::lemma(model, a.safety.as_deref())?;
    let cfg = inference_config(a);
    m.seed = Some(cfg.seed);
    m.config = serde_json::to_value(&cfg).map_err(|e| Failure::Input(e.into()))?;
    fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))
        .map_err(Failure::Input)?;

    // With no time at all there is nothing to explore for.
    let reach = if cfg.global_timeout_secs == 0 {
        let n = model.sys.vars.len();
        Reachable::new(StateSet::from_encodings((0..n).collect(), n, Vec::new(), Provenance::Exhaustive))
    } else {
        let (set, _, _) = inputs::reachable(model, explore_mode(&a.explore, cfg.seed), ctx.cache_dir.as_deref())?;
        tracing::info!(states = set.len(), provenance = provenance_name(set.provenance), "reachable states");
        Reachable::new(set)
    };
    let graph = do_ind_proof_slice(model, &reach, &safety, &grammar, &cfg).map_err(inference_failure)?;

    let summary = ReachSummary { states: reach.len() as u64, provenance: reach.provenance() };
    let stem = safety.name.clone();
    let graph_path = a.out.join(format!("{stem}.graph.json"));
    let dot_path = a.out.join(format!("{stem}.dot"));
    let report_path = a.out.join(format!("{stem}.report.txt"));
    write_artifact(&graph_path, &to_json(&graph, model, Some(&cfg), Some(summary)), m)?;
    write_artifact(&dot_path, &to_dot(&graph, model, Some(summary.states)), m)?;
    let report = to_report(&graph, model);
    write_artifact(&report_path, &report, m)?;

    let outcome = graph.outcome();
    let failed: Vec<String> = graph
        .failed
        .iter()
        .map(|&(l, act)| format!("{}/{}", graph.lemmas[l].lemma.name, model.sys.actions[act].name))
        .collect();
    m.outcome = json!({
        "outcome": outcome,
        "lemmas": graph.lemmas.len(),
        "edges": graph.edges.len(),
        "failed": failed,
        "reachable_states": reach.len(),
    });
    println!("outcome: {}", serde_json::to_value(outcome).unwrap_or_default().as_str().unwrap_or(""));
    println!("lemmas: {}", graph.lemmas.len());
    for f in &failed {
        println!("failed: {f}");
    }
    println!("graph: {}", graph_path.display());
    println!("dot: {}", dot_path.display());
    println!("report: {}", report_path.display());
    Ok(match outcome {
        Outcome::Valid => 0,
        Outcome::Partial => EXIT_PARTIAL,
        Outcome::TimedOut => EXIT_RESOURCE,
    })
}

pub fn slice(ctx: &Context, a: &SliceArgs, m: &mut RunManifest) -> Result<u8, Failure> {
    m.default_path = ctx.run_manifest("slice");
    let text = fs::read_to_string(&a.spec)
        .with_context(|| format!("cannot read {}", a.spec.display()))
        .map_err(Failure::Input)?;
    let sys = proofslice::parser::parse_spec(&text).map_err(|e| {
        let e = e.in_file(&a.spec.display().to_string());
        let lines: Vec<String> = e.diagnostics.iter().map(ToString::to_string).collect();
        Failure::Input(anyhow!("{}", lines.join("\n")))
    })?;
    let grammar = match (&a.grammar, &a.instance) {
        (Some(g), Some(i)) => {
            let mut inputs = inputs::load(&a.spec, i)?;
            let g = inputs::load_grammar(&mut inputs, g)?;
            m.inputs(&inputs.files);
            Some(g)
        }
        (Some(g), None) => {
            let gt = fs::read_to_string(g)
                .with_context(|| format!("cannot read {}", g.display()))
                .map_err(Failure::Input)?;
            Some(proofslice::parser::parse_grammar(&gt, &sys).map_err(|e| {
                let lines: Vec<String> = e.diagnostics.iter().map(ToString::to_string).collect();
                Failure::Input(anyhow!("{}", lines.join("\n")))
            })?)
        }
        _ => None,
    };
    let lemmas: Vec<_> = if a.lemma.is_empty() {
        sys.lemmas.iter().collect()
    } else {
        a.lemma
            .iter()
            .map(|n| sys.lemma(n).ok_or_else(|| Failure::Input(anyhow!("no lemma named `{n}`"))))
            .collect::<Result<_, _>>()?
    };
    let total = sys.vars.len();
    let mut rows = Vec::new();
    let header = if grammar.is_some() { "lemma\taction\tslice\tsize\tpreds" } else { "lemma\taction\tslice\tsize" };
    println!("{header}");
    for l in lemmas {
        for act in &sys.actions {
            let s = var_slice(l, act);
            let names = sys.var_names(&s.vars);
            let mut line = format!("{}\t{}\t{{{}}}\t{}/{}", l.name, act.name, names.join(", "), s.len(), total);
            let preds = grammar.as_ref().map(|g| (g.slice(&s.vars).preds.len(), g.preds.len()));
            if let Some((p, all)) = preds {
                line.push_str(&format!("\t{p}/{all}"));
            }
            println!("{line}");
            rows.push(json!({ "lemma": l.name, "action": act.name, "slice": names, "preds": preds.map(|p| p.0) }));
        }
    }
    m.outcome = json!({ "rows": rows });
    Ok(0)
}

/// Loads a graph file, refusing one built for another spec or instance
/// unless told otherwise.
fn load_graph(
    inputs: &mut Inputs,
    path: &Path,
    allow_mismatch: bool,
) -> Result<(proofslice::graph::ProofGraph, GraphFile), Failure> {
    let text = inputs::read_file(inputs, path)?;
    let model = &inputs.model;
    let spec = hex::encode(reach::spec_hash(model));
    let inst = hex::encode(reach::instance_hash(model));
    // Compare hashes before rebuilding, since formulas of a foreign spec may
    // not even parse.
    let header: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed graph file", path.display()))
        .map_err(Failure::Input)?;
    let same = header.get("spec_hash").and_then(|v| v.as_str()) == Some(spec.as_str())
        && header.get("instance_hash").and_then(|v| v.as_str()) == Some(inst.as_str());
    if !same {
        if !allow_mismatch {
            return Err(Failure::Input(anyhow!(
                "{}: hash mismatch, the graph was built from a different specification or instance \
                 (pass --allow-hash-mismatch to check it anyway)",
                path.display()
            )));
        }
        tracing::warn!("graph hashes do not match the given specification and instance");
    }
    from_json(&text, model).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
}

pub fn check(ctx: &Context, a: &CheckArgs, m: &mut RunManifest) -> Result<u8, Failure> {
    m.default_path = ctx.run_manifest("check");
    let mut inputs = inputs::load(&a.spec, &a.instance)?;
    let (graph, _) = load_graph(&mut inputs, &a.graph, a.allow_hash_mismatch)?;
    record_model(m, &inputs);
    let model = &inputs.model;
    let cfg = CtiConfig {
        max_ctis: a.cti.nctis,
        mode: a.cti.cti_mode.into(),
        exhaustive_limit: a.cti.cti_exhaustive_limit as u128,
        samples: a.cti.cti_samples,
        seed: a.cti.seed,
    };
    m.seed = Some(cfg.seed);
    m.config = serde_json::to_value(&cfg).map_err(|e| Failure::Input(e.into()))?;
    let report = check_graph_validity(&graph, model, &cfg).map_err(|e| Failure::Input(e.into()))?;
    for n in &report.nodes {
        let verdict = if n.valid { "ok  " } else { "FAIL" };
        let support = if n.support.is_empty() { String::new() } else { format!(" support {}", n.support.join(", ")) };
        println!("{verdict} {} / {} ({}){support}", n.lemma, n.action, n.checked);
        if let Some(ex) = &n.example {
            for line in ex.lines() {
                println!("       {line}");
            }
        }
    }
    for l in &report.initiation_failures {
        println!("FAIL {l}: violated by an initial state");
    }
    let valid = report.valid;
    println!("verdict: {}", if valid { "valid" } else { "invalid" });
    if let Some(p) = &a.report {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Input(e.into()))? + "\n";
        write_artifact(p, &text, m)?;
        println!("report: {}", p.display());
    }
    let invalid: Vec<String> = report.invalid_nodes().map(|n| format!("{}/{}", n.lemma, n.action)).collect();
    m.outcome = json!({
        "valid": valid,
        "invalid_nodes": invalid,
        "initiation_failures": report.initiation_failures,
    });
    Ok(if valid { 0 } else { EXIT_INVALID })
}

pub fn export_dot(ctx: &Context, a: &ExportDotArgs, m: &mut RunManifest) -> Result<u8, Failure> {
    m.default_path = ctx.run_manifest("export-dot");
    let mut inputs = inputs::load(&a.spec, &a.instance)?;
    let (graph, file) = load_graph(&mut inputs, &a.graph, a.allow_hash_mismatch)?;
    record_model(m, &inputs);
    let dot = to_dot(&graph, &inputs.model, file.reachable.map(|r| r.states));
    match &a.out {
        Some(p) => {
            write_artifact(p, &dot, m)?;
            println!("dot: {}", p.display());
        }
        None => print!("{dot}"),
    }
    m.outcome = json!({ "lemmas": graph.lemmas.len() });
    Ok(0)
}
