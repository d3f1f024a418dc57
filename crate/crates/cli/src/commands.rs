use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use lexloop_core::domain::{
    parse_examples, write_examples, ComparisonExample, FeedbackConstraint, DEFAULT_ENUMERATION_LIMIT,
};
use lexloop_core::learn::{evaluate, learn as learn_model, EvalStats, LearnConfig};
use lexloop_core::metric::{
    agglomerate, cut, distance_matrix, plot_document, to_svg, DendrogramDocument, DistanceMatrix,
};
use lexloop_core::model::{deserialize_model, serialize_model, serialize_tree, to_graph_description};
use lexloop_core::synth::{complete_examples, sample_examples, sample_tree};
use lexloop_core::{parse_domain, Dendrogram64, Domain, LpForest, LpTree, Model};
use lexloop_service::{http, ServiceConfig, SessionService};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{CliError, ClusterArgs, DistanceArgs, EvalArgs, GenArgs, LearnArgs, RenderArgs, ServeArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    let r = if text.ends_with('\n') {
        out.write_all(text.as_bytes())
    } else {
        writeln!(out, "{text}")
    };
    r.map_err(|e| CliError::Io(format!("output: {e}")))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn load_domain(path: &Path) -> Result<Domain, CliError> {
    parse_domain(&read(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_examples(path: &Path, domain: &Domain) -> Result<Vec<ComparisonExample>, CliError> {
    parse_examples(&read(path)?, domain).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, domain: &Domain) -> Result<Model, CliError> {
    deserialize_model(&read(path)?, domain).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn stats_json(stats: &EvalStats) -> Value {
    json!({
        "total": stats.total,
        "agreed": stats.agreed,
        "disagreed": stats.disagreed,
        "undecided": stats.undecided,
        "accuracy": stats.accuracy::<f64>(),
        "training_accuracy": stats.training_accuracy::<f64>(),
    })
}

pub fn learn(args: &LearnArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let domain = load_domain(&args.domain)?;
    let examples = load_examples(&args.examples, &domain)?;
    let constraints: Vec<FeedbackConstraint> = match &args.constraints {
        Some(p) => {
            serde_json::from_str(&read(p)?).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
        None => Vec::new(),
    };
    let config = LearnConfig {
        kind: args.kind.into(),
        forest_size: args.forest_size,
        sample_fraction: args.sample_fraction,
        seed: args.seed,
        max_depth: args.max_depth,
        constraints,
        exact_orders: args.exact_orders,
    };
    let result = learn_model(&examples, &domain, &config)?;
    let mut summary = stats_json(&result.stats);
    summary["trees"] = json!(result.model.trees().len());
    summary["constraints"] = serde_json::to_value(&result.constraints).expect("report serializes");
    let document = serialize_model(&result.model, &domain);
    match &args.output {
        Some(path) => {
            write_file(path, &document)?;
            emit(out, &pretty(&summary))
        }
        None => {
            emit(out, &document)?;
            emit(err, &pretty(&summary))
        }
    }
}

pub fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let domain = load_domain(&args.domain)?;
    let model = load_model(&args.model, &domain)?;
    let examples = load_examples(&args.examples, &domain)?;
    emit(out, &pretty(&stats_json(&evaluate(&model, &examples))))
}

/// Every tree in the given files with a display label each.
fn collect_trees(paths: &[std::path::PathBuf], domain: &Domain) -> Result<(Vec<LpTree>, Vec<String>), CliError> {
    let mut trees = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let stem = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        match load_model(path, domain)? {
            Model::Tree(t) => {
                trees.push(t);
                labels.push(stem);
            }
            Model::Forest(f) => {
                for (i, t) in f.into_trees().into_iter().enumerate() {
                    trees.push(t);
                    labels.push(format!("{stem}#{i}"));
                }
            }
        }
    }
    Ok((trees, labels))
}

fn matrix_for(paths: &[std::path::PathBuf], domain: &Domain) -> Result<(DistanceMatrix, Vec<String>), CliError> {
    let (trees, labels) = collect_trees(paths, domain)?;
    let forest = LpForest::new(trees)?;
    Ok((distance_matrix(&forest, domain)?, labels))
}

fn table(matrix: &DistanceMatrix, labels: &[String]) -> String {
    let rows = matrix.rows();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(u128::to_string).collect()).collect();
    let label_w = labels.iter().map(String::len).max().unwrap_or(0);
    let col_w = cells
        .iter()
        .flatten()
        .map(String::len)
        .chain(labels.iter().map(String::len))
        .max()
        .unwrap_or(1);
    let mut s = format!("{:label_w$}", "");
    for l in labels {
        s.push_str(&format!("  {l:>col_w$}"));
    }
    s.push('\n');
    for (l, row) in labels.iter().zip(&cells) {
        s.push_str(&format!("{l:label_w$}"));
        for c in row {
            s.push_str(&format!("  {c:>col_w$}"));
        }
        s.push('\n');
    }
    s
}

pub fn distance(args: &DistanceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let domain = load_domain(&args.domain)?;
    let (matrix, labels) = matrix_for(&args.models, &domain)?;
    if args.json {
        emit(out, &pretty(&json!({ "labels": labels, "distances": matrix.rows() })))
    } else {
        emit(out, &table(&matrix, &labels))
    }
}

fn dendrogram_for(matrix: &DistanceMatrix, linkage: crate::LinkageArg) -> Dendrogram64 {
    agglomerate::<f64>(matrix, linkage.into())
}

pub fn cluster(args: &ClusterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let domain = load_domain(&args.domain)?;
    let (matrix, labels) = matrix_for(&args.models, &domain)?;
    let dendrogram = dendrogram_for(&matrix, args.linkage);
    let threshold = args.threshold.unwrap_or_else(|| dendrogram.median_height());
    let clustering = cut(&dendrogram, &matrix, threshold);
    let doc = json!({
        "dendrogram": DendrogramDocument::new(&dendrogram, &labels),
        "threshold": threshold,
        "buckets": clustering.buckets,
        "representatives": clustering.representatives,
        "representative_labels": clustering.representatives.iter().map(|&r| &labels[r]).collect::<Vec<_>>(),
        "distances": matrix.rows(),
    });
    emit(out, &pretty(&doc))
}

pub fn gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.noise) {
        return Err(CliError::Validation(format!(
            "noise must be in [0, 1], got {}",
            args.noise
        )));
    }
    let domain = load_domain(&args.domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let tree = sample_tree(args.hidden_kind.into(), &domain, &mut rng);
    let examples = if args.complete {
        complete_examples(&tree, &domain, DEFAULT_ENUMERATION_LIMIT)?
    } else {
        sample_examples(&tree, &domain, args.num_examples, args.noise, &mut rng)
    };
    let text = write_examples(&examples, &domain);
    if let Some(path) = &args.model_out {
        write_file(path, &serialize_tree(&tree, &domain))?;
    }
    match &args.examples_out {
        Some(path) => write_file(path, &text),
        None => emit(out, &text),
    }
}

pub fn render(args: &RenderArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let domain = load_domain(&args.domain)?;
    if args.plot {
        let (matrix, labels) = matrix_for(std::slice::from_ref(&args.model), &domain)?;
        let dendrogram = dendrogram_for(&matrix, args.linkage);
        let doc = DendrogramDocument::new(&dendrogram, &labels);
        let text = if args.svg {
            to_svg(&doc, args.threshold)
        } else {
            serde_json::to_string_pretty(&plot_document(&doc, args.threshold)).expect("plot serializes")
        };
        return emit(out, &text);
    }
    let model = load_model(&args.model, &domain)?;
    let trees = model.trees();
    let selected: Vec<&LpTree> = match args.tree {
        Some(i) => vec![trees
            .get(i)
            .ok_or_else(|| CliError::Validation(format!("tree {i} out of range, model has {}", trees.len())))?],
        None => trees.iter().collect(),
    };
    for tree in selected {
        emit(out, &to_graph_description(tree, &domain, args.depth))?;
    }
    Ok(())
}

pub fn serve(args: &ServeArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let mut config = ServiceConfig::new(&args.data_dir);
    config.default_seed = args.seed;
    config.graph_depth = args.graph_depth;
    let service = Arc::new(SessionService::open(config).map_err(|e| CliError::Io(e.to_string()))?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.listen)
            .await
            .map_err(|e| CliError::Io(format!("{}: {e}", args.listen)))?;
        let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
        emit(err, &format!("listening on http://{addr}{}", http::API_PREFIX))?;
        http::serve(service, listener, http::shutdown_signal())
            .await
            .map_err(|e| CliError::Io(e.to_string()))
    })
}
