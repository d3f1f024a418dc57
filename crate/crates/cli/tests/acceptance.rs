//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_DEFECTS` are expected to fail because their
//! stated figures are arithmetically impossible; they are still run and
//! reported, but do not fail the process.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lexloop_core::domain::{validate_alternative, write_examples, FeedbackConstraint};
use lexloop_core::learn::{check_constraints, learn, tree_satisfies, LearnConfig, LearnError};
use lexloop_core::metric::{
    agglomerate, cut, distance_matrix, representative_of, tau, tau_bruteforce, total_order_of, DendrogramDocument,
    DistanceMatrix, Linkage,
};
use lexloop_core::model::{collapse, deserialize_model, expand, induced_order, serialize_model, LocalOrder, Ranking};
use lexloop_core::synth::{complete_examples, random_constraints, random_domain, sample_examples, sample_tree};
use lexloop_core::{
    compare, enumerate_alternatives, parse_domain, trace, Alternative, ComparisonOutcome, Domain, Exact,
    ExactDendrogram, LpForest, LpTree, TreeKind,
};
use lexloop_service::http::router;
use lexloop_service::{QueryDoc, ServiceConfig, SessionService};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const KINDS: [TreeKind; 3] = [TreeKind::Uiup, TreeKind::Uicp, TreeKind::Cicp];
const KNOWN_DEFECTS: [&str; 1] = ["fig1-reproduction"];

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load_domain(name: &str) -> Domain {
    parse_domain(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

fn alt(domain: &Domain, pairs: &[(&str, &str)]) -> Alternative {
    validate_alternative(domain, pairs.iter().copied()).unwrap()
}

fn fig1_reproduction() -> Outcome {
    let d = load_domain("car.json");
    let t = deserialize_model(&std::fs::read_to_string(data("fig1_tree.json")).unwrap(), &d)
        .map_err(|e| e.to_string())?
        .trees()[0]
        .clone();
    let honda = alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]);
    let ford = alt(&d, &[("B", "s"), ("M", "f"), ("P", "l"), ("T", "a")]);
    ensure!(
        trace(&t, &honda) == 3,
        "trace(Honda sedan) = {}, expected 3",
        trace(&t, &honda)
    );
    ensure!(
        trace(&t, &ford) == 4,
        "trace(Ford sedan) = {}, expected 4",
        trace(&t, &ford)
    );
    ensure!(
        compare(&t, &honda, &ford) == ComparisonOutcome::FirstPreferred,
        "Honda sedan not preferred"
    );
    let sizes: Vec<usize> = induced_order(&t, &d, 100)
        .map_err(|e| e.to_string())?
        .iter()
        .map(Vec::len)
        .collect();
    ensure!(
        sizes == [6, 6, 6, 6, 6, 12],
        "class sizes {sizes:?} (sum {}) differ from the stated [6, 6, 6, 6, 6, 12] (sum 42) over a {}-alternative domain",
        sizes.iter().sum::<usize>(),
        d.size()
    );
    Ok(())
}

fn semantics_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for kind in KINDS {
        for n in 0..200 {
            let d = random_domain(3, 3, &mut rng);
            let t = sample_tree(kind, &d, &mut rng);
            let classes = induced_order(&t, &d, 100).map_err(|e| e.to_string())?;
            let class_of = |a: &Alternative| classes.iter().position(|c| c.contains(a)).unwrap();
            let alts = enumerate_alternatives(&d, 100).unwrap();
            for a in &alts {
                for b in &alts {
                    let expected = match class_of(a).cmp(&class_of(b)) {
                        std::cmp::Ordering::Less => ComparisonOutcome::FirstPreferred,
                        std::cmp::Ordering::Greater => ComparisonOutcome::SecondPreferred,
                        std::cmp::Ordering::Equal => ComparisonOutcome::Equivalent,
                    };
                    ensure!(
                        compare(&t, a, b) == expected,
                        "{kind:?} tree {n}: compare disagrees with induced order"
                    );
                }
            }
            let e = expand(&t).map_err(|e| e.to_string())?;
            ensure!(
                alts.iter().all(|a| trace(&e, a) == trace(&t, a)),
                "{kind:?} tree {n}: expand changed a trace"
            );
            ensure!(
                induced_order(&collapse(&e), &d, 100).unwrap() == classes,
                "{kind:?} tree {n}: collapse(expand) changed the preorder"
            );
        }
    }
    Ok(())
}

fn reversed(t: &LpTree) -> LpTree {
    let LpTree::Uiup(body) = t else {
        unreachable!("uiup expected")
    };
    LpTree::Uiup(
        body.iter()
            .map(|o| LocalOrder {
                attribute: o.attribute,
                ranking: o.ranking.reversed(),
            })
            .collect(),
    )
}

fn tau_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = 0;
    while pairs < 1008 {
        let d = random_domain(4, 3, &mut rng);
        if d.size() > 81 {
            continue;
        }
        for k1 in KINDS {
            for k2 in KINDS {
                let t1 = sample_tree(k1, &d, &mut rng);
                let t2 = sample_tree(k2, &d, &mut rng);
                let fast = tau(&t1, &t2, &d).map_err(|e| e.to_string())?;
                let slow = tau_bruteforce(&t1, &t2, &d, 100).map_err(|e| e.to_string())?;
                ensure!(fast == slow, "{k1:?}/{k2:?}: tau {fast} != brute force {slow}");
                pairs += 1;
            }
        }
    }
    for n in 0..500 {
        let d = random_domain(3, 3, &mut rng);
        let t: Vec<LpTree> = (0..3)
            .map(|_| sample_tree(*KINDS.choose(&mut rng).unwrap(), &d, &mut rng))
            .collect();
        let mut dist = [[0u128; 3]; 3];
        for (i, row) in dist.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = tau(&t[i], &t[j], &d).map_err(|e| e.to_string())?;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                ensure!(dist[i][j] == dist[j][i], "triple {n}: asymmetric");
                let same = total_order_of(&t[i], &d, 100).unwrap() == total_order_of(&t[j], &d, 100).unwrap();
                ensure!(
                    (dist[i][j] == 0) == same,
                    "triple {n}: identity of indiscernibles fails"
                );
                for k in 0..3 {
                    ensure!(
                        dist[i][k] <= dist[i][j] + dist[j][k],
                        "triple {n}: triangle inequality fails"
                    );
                }
            }
        }
    }
    for n in 0..50 {
        let d = random_domain(4, 3, &mut rng);
        let t = sample_tree(TreeKind::Uiup, &d, &mut rng);
        let size = d.size() as u128;
        let got = tau(&t, &reversed(&t), &d).map_err(|e| e.to_string())?;
        ensure!(got == size * (size - 1) / 2, "reversal {n}: {got} != N(N-1)/2");
    }
    Ok(())
}

fn distance_fixture() -> Outcome {
    let d = load_domain("two_by_two.json");
    let model = deserialize_model(
        &std::fs::read_to_string(data("distance_fixture_forest.json")).unwrap(),
        &d,
    )
    .map_err(|e| e.to_string())?;
    let t = model.trees();
    let pairs = [(0, 1, 1u128), (0, 2, 4), (1, 2, 3)];
    for (i, j, want) in pairs {
        let got = tau(&t[i], &t[j], &d).map_err(|e| e.to_string())?;
        ensure!(got == want, "tau(T{}, T{}) = {got}, expected {want}", i + 1, j + 1);
    }
    let m = distance_matrix(&LpForest::new(t.to_vec()).unwrap(), &d).map_err(|e| e.to_string())?;
    let heights = |linkage| {
        let den: ExactDendrogram = agglomerate(&m, linkage);
        den.merges.iter().map(|x| x.height).collect::<Vec<_>>()
    };
    ensure!(
        heights(Linkage::Single) == [Exact::from(1), Exact::from(3)],
        "single linkage {:?}",
        heights(Linkage::Single)
    );
    ensure!(
        heights(Linkage::Average) == [Exact::from(1), Exact::new(7, 2)],
        "average linkage {:?}",
        heights(Linkage::Average)
    );
    ensure!(representative_of(&[0, 1, 2], &m) == 1, "medoid is not T2");
    Ok(())
}

fn learner_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for n in 0..100 {
        let d = random_domain(3, 3, &mut rng);
        let hidden = sample_tree(TreeKind::Uiup, &d, &mut rng);
        let examples = complete_examples(&hidden, &d, 100).map_err(|e| e.to_string())?;
        let result = learn(&examples, &d, &LearnConfig::new(TreeKind::Uiup)).map_err(|e| e.to_string())?;
        ensure!(
            result.training_accuracy::<Exact>() == Exact::from(1),
            "hidden tree {n}: accuracy below 1"
        );
        let learned = &result.model.trees()[0];
        ensure!(
            induced_order(learned, &d, 100).unwrap() == induced_order(&hidden, &d, 100).unwrap(),
            "hidden tree {n}: preorder differs"
        );
    }
    Ok(())
}

/// An importance cycle over two or more attributes, or a reversed local
/// order pair on one attribute.
fn cyclic_constraints(d: &Domain, rng: &mut ChaCha8Rng) -> Vec<FeedbackConstraint> {
    if d.len() >= 2 && rng.gen_bool(0.6) {
        let mut attrs: Vec<usize> = (0..d.len()).collect();
        attrs.shuffle(rng);
        attrs.truncate(rng.gen_range(2..=d.len()));
        let name = |a: usize| d.attribute_name(a);
        (0..attrs.len())
            .map(|i| FeedbackConstraint::importance(name(attrs[i]), name(attrs[(i + 1) % attrs.len()])))
            .collect()
    } else {
        let a = rng.gen_range(0..d.len());
        let (x, y) = (d.value_name(a, 0), d.value_name(a, 1));
        let name = d.attribute_name(a);
        vec![
            FeedbackConstraint::local_order(name, x, y),
            FeedbackConstraint::local_order(name, y, x),
        ]
    }
}

fn hard_constraints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut learned = 0;
    let mut round = 0;
    while learned < 200 {
        round += 1;
        let d = random_domain(3, 3, &mut rng);
        let hidden = sample_tree(TreeKind::Cicp, &d, &mut rng);
        let examples = sample_examples(&hidden, &d, 20, 0.1, &mut rng);
        let constraints = random_constraints(&d, 5, &mut rng);
        let kind = KINDS[round % 3];
        let config = LearnConfig {
            kind,
            forest_size: if round % 2 == 0 { 5 } else { 1 },
            constraints: constraints.clone(),
            seed: round as u64,
            ..LearnConfig::default()
        };
        let feasible = check_constraints(&constraints, &d).unwrap().is_feasible();
        match learn(&examples, &d, &config) {
            Ok(result) => {
                ensure!(feasible, "round {round}: learned under an infeasible set");
                for tree in result.model.trees() {
                    for c in &constraints {
                        ensure!(
                            tree_satisfies(tree, &c.resolve(&d).unwrap(), &d),
                            "round {round}: {c:?} violated"
                        );
                    }
                }
                learned += 1;
            }
            // Chain kinds can be stricter than the general check.
            Err(LearnError::Infeasible(_)) if kind != TreeKind::Cicp => {}
            Err(LearnError::Infeasible(_)) => ensure!(!feasible, "round {round}: feasible CICP set rejected"),
            Err(e) => return Err(format!("round {round}: {e}")),
        }
    }
    for n in 0..100 {
        let d = random_domain(4, 3, &mut rng);
        let constraints = cyclic_constraints(&d, &mut rng);
        ensure!(
            !check_constraints(&constraints, &d).unwrap().is_feasible(),
            "cyclic set {n} reported feasible"
        );
        for kind in KINDS {
            let config = LearnConfig {
                constraints: constraints.clone(),
                ..LearnConfig::new(kind)
            };
            ensure!(
                matches!(learn(&[], &d, &config), Err(LearnError::Infeasible(_))),
                "cyclic set {n} not rejected for {kind:?}"
            );
        }
    }
    Ok(())
}

async fn call(app: &Router, method: Method, path: &str, body: Option<Value>) -> Result<(StatusCode, Value), String> {
    let request = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .map_err(|e| e.to_string())?;
    let response = app.clone().oneshot(request).await.map_err(|e| e.to_string())?;
    let status = response.status();
    let bytes = response
        .into_body()
        .collect()
        .await
        .map_err(|e| e.to_string())?
        .to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).map_err(|e| e.to_string())?
    };
    Ok((status, value))
}

/// The scripted user prefers attributes in reverse declaration order and,
/// within each, the last declared value.
fn scripted_user(d: &Domain) -> LpTree {
    LpTree::Uiup(
        (0..d.len())
            .rev()
            .map(|a| LocalOrder {
                attribute: a,
                ranking: Ranking::new((0..d.value_count(a) as u8).rev().collect()),
            })
            .collect(),
    )
}

async fn end_to_end_loop() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let open = || {
        SessionService::open(ServiceConfig::new(dir.path()))
            .map(Arc::new)
            .map_err(|e| e.to_string())
    };
    let app = router(open()?);
    let domain_text = std::fs::read_to_string(data("car_evaluation.json")).unwrap();
    let d = parse_domain(&domain_text).unwrap();
    let domain: Value = serde_json::from_str(&domain_text).unwrap();
    let (status, created) = call(
        &app,
        Method::POST,
        "/v1/sessions",
        Some(json!({ "domain": domain, "seed": 7 })),
    )
    .await?;
    ensure!(status == StatusCode::CREATED, "create returned {status}: {created}");
    let base = format!("/v1/sessions/{}", created["id"].as_str().unwrap());

    let user = scripted_user(&d);
    for _ in 0..15 {
        let (status, q) = call(&app, Method::GET, &format!("{base}/query"), None).await?;
        ensure!(status == StatusCode::OK, "query returned {status}: {q}");
        let query: QueryDoc = serde_json::from_value(q.clone()).map_err(|e| e.to_string())?;
        let side = |doc: &lexloop_service::AltDoc| {
            validate_alternative(&d, doc.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap()
        };
        let choice = match compare(&user, &side(&query.first), &side(&query.second)) {
            ComparisonOutcome::FirstPreferred => "first",
            ComparisonOutcome::SecondPreferred => "second",
            ComparisonOutcome::Equivalent => "skip",
        };
        let body = json!({ "first": q["first"], "second": q["second"], "choice": choice });
        let (status, ack) = call(&app, Method::POST, &format!("{base}/answers"), Some(body)).await?;
        ensure!(status == StatusCode::OK, "answer returned {status}: {ack}");
    }

    let learn_body = json!({ "config": { "kind": "uiup", "forest_size": 13, "seed": 3 } });
    let (status, first) = call(&app, Method::POST, &format!("{base}/learn"), Some(learn_body.clone())).await?;
    ensure!(status == StatusCode::OK, "learn returned {status}: {first}");

    let feedback: Vec<FeedbackConstraint> =
        serde_json::from_str(&std::fs::read_to_string(data("car_feedback.json")).unwrap()).unwrap();
    let (status, report) = call(
        &app,
        Method::POST,
        &format!("{base}/feedback"),
        Some(json!({ "constraints": feedback })),
    )
    .await?;
    ensure!(
        status == StatusCode::OK && report["feasible"] == true,
        "feedback returned {status}: {report}"
    );

    let (status, payload) = call(&app, Method::POST, &format!("{base}/learn"), Some(learn_body)).await?;
    ensure!(status == StatusCode::OK, "relearn returned {status}: {payload}");
    ensure!(payload["version"] == 2, "expected model version 2");
    let model = deserialize_model(&payload["model"].to_string(), &d).map_err(|e| e.to_string())?;
    ensure!(model.trees().len() == 13, "forest has {} members", model.trees().len());
    for tree in model.trees() {
        for c in &feedback {
            ensure!(
                tree_satisfies(tree, &c.resolve(&d).unwrap(), &d),
                "final model violates {c:?}"
            );
        }
    }
    ensure!(
        payload["constraints"]["violated"].as_array().is_some_and(Vec::is_empty),
        "payload reports violations"
    );
    let merges = payload["dendrogram"]["merges"].as_array().map_or(0, Vec::len);
    ensure!(merges == 12, "dendrogram has {merges} merges");
    let reps = payload["clustering"]["representatives"].as_array().map_or(0, Vec::len);
    ensure!(reps >= 1, "no representatives");
    ensure!(
        payload["graphs"].as_array().map_or(0, Vec::len) == reps,
        "one graph per representative expected"
    );

    let (_, view_before) = call(&app, Method::GET, &base, None).await?;
    let (_, model_before) = call(&app, Method::GET, &format!("{base}/models/latest"), None).await?;
    drop(app);
    let app = router(open()?);
    let (status, view_after) = call(&app, Method::GET, &base, None).await?;
    ensure!(status == StatusCode::OK, "session lost on restart");
    let (_, model_after) = call(&app, Method::GET, &format!("{base}/models/latest"), None).await?;
    ensure!(view_before == view_after, "session view changed across restart");
    ensure!(model_before == model_after, "latest model changed across restart");
    Ok(())
}

fn end_to_end() -> Outcome {
    tokio::runtime::Runtime::new()
        .map_err(|e| e.to_string())?
        .block_on(end_to_end_loop())
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_lexloop"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        o.status.success(),
        "lexloop {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    Ok(o.stdout)
}

fn determinism() -> Outcome {
    let d = load_domain("car.json");
    let run = || -> Result<(String, String, String), String> {
        let mut r = ChaCha8Rng::seed_from_u64(99);
        let hidden = sample_tree(TreeKind::Cicp, &d, &mut r);
        let examples = sample_examples(&hidden, &d, 60, 0.1, &mut r);
        let config = LearnConfig {
            forest_size: 13,
            sample_fraction: 0.8,
            seed: 17,
            ..LearnConfig::new(TreeKind::Uicp)
        };
        let model = learn(&examples, &d, &config).map_err(|e| e.to_string())?.model;
        let forest = LpForest::new(model.trees().to_vec()).unwrap();
        let m: DistanceMatrix = distance_matrix(&forest, &d).map_err(|e| e.to_string())?;
        let den = agglomerate::<f64>(&m, Linkage::Average);
        let c = cut(&den, &m, den.median_height());
        let doc = DendrogramDocument::new(&den, &[]).to_json();
        Ok((
            write_examples(&examples, &d),
            serialize_model(&model, &d),
            format!("{doc}{:?}{:?}", c.buckets, c.representatives),
        ))
    };
    ensure!(run()? == run()?, "in-process learn/gen/cluster differ between runs");

    let car = data("car.json").to_string_lossy().into_owned();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        // Cluster labels come from file names, so each run gets the same ones.
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
        let ex = path("examples.txt");
        let forest = path("forest.json");
        let gen = cli(&[
            "gen",
            "--domain",
            &car,
            "--hidden-kind",
            "cicp",
            "--seed",
            "4",
            "--num-examples",
            "80",
            "--noise",
            "0.1",
        ])?;
        std::fs::write(&ex, &gen).map_err(|e| e.to_string())?;
        cli(&[
            "learn",
            "--domain",
            &car,
            "--examples",
            &ex,
            "--kind",
            "cicp",
            "--forest-size",
            "13",
            "--seed",
            "6",
            "-o",
            &forest,
        ])?;
        let model = std::fs::read(&forest).map_err(|e| e.to_string())?;
        let clusters = cli(&["cluster", "--domain", &car, &forest])?;
        outputs.push((gen, model, clusters));
    }
    ensure!(outputs[0] == outputs[1], "CLI gen/learn/cluster differ between runs");
    Ok(())
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "fig1-reproduction",
            budget: Duration::from_secs(1),
            check: fig1_reproduction,
        },
        Criterion {
            name: "semantics-suite",
            budget: Duration::from_secs(60),
            check: semantics_suite,
        },
        Criterion {
            name: "tau-oracle-equivalence",
            budget: Duration::from_secs(120),
            check: tau_oracle,
        },
        Criterion {
            name: "derived-distance-fixture",
            budget: Duration::from_secs(10),
            check: distance_fixture,
        },
        Criterion {
            name: "learner-recovery",
            budget: Duration::from_secs(120),
            check: learner_recovery,
        },
        Criterion {
            name: "hard-constraint-guarantee",
            budget: Duration::from_secs(120),
            check: hard_constraints,
        },
        Criterion {
            name: "end-to-end-loop",
            budget: Duration::from_secs(60),
            check: end_to_end,
        },
        Criterion {
            name: "determinism",
            budget: Duration::from_secs(120),
            check: determinism,
        },
    ];
    let mut unexpected = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed > c.budget {
                Err(format!("took {elapsed:.2?}, budget {:?}", c.budget))
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => println!("PASS {} ({elapsed:.2?})", c.name),
            Err(reason) => {
                let known = KNOWN_DEFECTS.contains(&c.name);
                println!(
                    "FAIL {} ({elapsed:.2?}): {reason}{}",
                    c.name,
                    if known { " [known defect]" } else { "" }
                );
                if !known {
                    unexpected.push(c.name);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
