//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semframe::cluster::{agglomerate, pairwise_distances, Linkage, Metric};
use semframe::corpus::{PredicateSpan, Sentence, SlotSpan, Token};
use semframe::embeddings::{
    compose, compute_idf, context_vector, span_vector, EmbeddingStore, Weighting,
};
use semframe::eval::{bcubed_f1, evaluate, purity_f1};
use semframe::features::{boolean_feature, inbound_dependency_vector, DepLabelIndex};
use semframe::labeling::Labeling;
use semframe::logreg::{loss_and_gradient, train_rows, TrainConfig};
use semframe::pipeline::baseline_123;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// 1. HAC against a from-scratch reference

/// Cluster-to-cluster distance recomputed from the raw points every time.
fn reference_linkage(
    points: &[Vec<f64>],
    metric: Metric,
    linkage: Linkage,
    a: &[usize],
    b: &[usize],
) -> f64 {
    let pair = |i: usize, j: usize| metric.distance(&points[i], &points[j]);
    match linkage {
        Linkage::Single => a
            .iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| pair(i, j))
            .fold(f64::INFINITY, f64::min),
        Linkage::Complete => a
            .iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| pair(i, j))
            .fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => {
            let total: f64 = a
                .iter()
                .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                .map(|(i, j)| pair(i, j))
                .sum();
            total / (a.len() * b.len()) as f64
        }
        Linkage::Ward => {
            let centroid = |c: &[usize]| -> Vec<f64> {
                let d = points[0].len();
                let mut m = vec![0.0; d];
                for &i in c {
                    for (mj, x) in m.iter_mut().zip(&points[i]) {
                        *mj += x;
                    }
                }
                m.iter().map(|v| v / c.len() as f64).collect()
            };
            let (ca, cb) = (centroid(a), centroid(b));
            let sq: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y).powi(2)).sum();
            let (na, nb) = (a.len() as f64, b.len() as f64);
            (2.0 * na * nb / (na + nb) * sq).sqrt()
        }
    }
}

/// Naive agglomeration: scan every cluster pair at every step.
fn reference_partition(points: &[Vec<f64>], metric: Metric, linkage: Linkage, k: usize) -> Vec<usize> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX, 0, 0);
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let d = reference_linkage(points, metric, linkage, &clusters[x], &clusters[y]);
                let sx = clusters[x][0];
                let sy = clusters[y][0];
                let key = (d, sx.min(sy), sx.max(sy));
                if key < (best.0, best.1, best.2) {
                    best = (key.0, key.1, key.2, x, y);
                }
            }
        }
        let (x, y) = (best.3, best.4);
        let moved = clusters.remove(y);
        clusters[x].extend(moved);
        clusters[x].sort_unstable();
    }
    let mut assignment = vec![0; points.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            assignment[i] = c;
        }
    }
    canonical(&assignment)
}

/// Relabels by order of first appearance so equal partitions compare equal.
fn canonical<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Vec<usize> {
    let mut seen = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(l.clone()).or_insert(next)
        })
        .collect()
}

fn distinct_distances(points: &[Vec<f64>], metric: Metric) -> bool {
    let mut ds: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            ds.push(metric.distance(&points[i], &points[j]));
        }
    }
    ds.sort_by(f64::total_cmp);
    ds.windows(2).all(|w| w[1] - w[0] > 1e-9)
}

fn criterion_hac() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0;
    let mut rejected = 0;
    for case in 0..500 {
        let linkage = Linkage::ALL[case % 4];
        let metric = Metric::ALL[(case / 4) % 3];
        let n = rng.gen_range(1..=12);
        let d = rng.gen_range(if metric == Metric::Cosine { 2 } else { 1 }..=4);
        let points = loop {
            let p: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            if distinct_distances(&p, metric) {
                break p;
            }
        };
        let k = rng.gen_range(1..=n);
        let dist = pairwise_distances(&points, metric).map_err(|e| e.to_string())?;
        let result = agglomerate(&dist, linkage, k);
        if linkage == Linkage::Ward && metric != Metric::Euclidean {
            check(
                result.as_ref().is_err_and(|e| e.to_string().contains("ward requires euclidean")),
                || format!("case {case}: ward with {metric} was accepted"),
            )?;
            rejected += 1;
            continue;
        }
        let (_, clustering) = result.map_err(|e| format!("case {case}: {e}"))?;
        let got = canonical(&clustering.assignment);
        let want = reference_partition(&points, metric, linkage, k);
        check(got == want, || {
            format!("case {case} ({linkage}/{metric}, n={n}, k={k}): got {got:?}, reference {want:?}")
        })?;
        compared += 1;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{compared} partitions identical, {rejected} ward/non-euclidean rejected, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 2. Clustering scores against direct set intersections

fn groups(labels: &[usize]) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        out.entry(l).or_default().insert(i);
    }
    out
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn brute_purity(pred: &[usize], gold: &[usize]) -> (f64, f64, f64) {
    let n = pred.len() as f64;
    let (pc, gc) = (groups(pred), groups(gold));
    let cover = |a: &BTreeMap<usize, BTreeSet<usize>>, b: &BTreeMap<usize, BTreeSet<usize>>| {
        a.values()
            .map(|x| b.values().map(|y| x.intersection(y).count()).max().unwrap_or(0))
            .sum::<usize>() as f64
            / n
    };
    let p = cover(&pc, &gc);
    let ip = cover(&gc, &pc);
    (p, ip, f1(p, ip))
}

fn brute_bcubed(pred: &[usize], gold: &[usize]) -> (f64, f64, f64) {
    let n = pred.len();
    let (pc, gc) = (groups(pred), groups(gold));
    let mut p = 0.0;
    let mut r = 0.0;
    for i in 0..n {
        let c = &pc[&pred[i]];
        let g = &gc[&gold[i]];
        let both = c.intersection(g).count() as f64;
        p += both / c.len() as f64;
        r += both / g.len() as f64;
    }
    let (p, r) = (p / n as f64, r / n as f64);
    (p, r, f1(p, r))
}

fn criterion_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let close = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12 && (a.2 - b.2).abs() <= 1e-12
    };
    for case in 0..1000 {
        let n = rng.gen_range(1..=20);
        let kp = rng.gen_range(1..=n);
        let kg = rng.gen_range(1..=n);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kp)).collect();
        let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kg)).collect();
        let pu = purity_f1(&pred, &gold).map_err(|e| e.to_string())?;
        let bc = bcubed_f1(&pred, &gold).map_err(|e| e.to_string())?;
        let (bpu, bbc) = (brute_purity(&pred, &gold), brute_bcubed(&pred, &gold));
        check(close(pu, bpu), || format!("case {case}: purity {pu:?} vs {bpu:?}"))?;
        check(close(bc, bbc), || format!("case {case}: b-cubed {bc:?} vs {bbc:?}"))?;
    }

    let pred = Labeling::from_pairs([("a", "x"), ("b", "x"), ("c", "y")]);
    let gold = Labeling::from_pairs([("a", "1"), ("b", "2"), ("c", "2")]);
    let r = evaluate(&pred, &gold).map_err(|e| e.to_string())?;
    let six = [
        r.purity,
        r.inverse_purity,
        r.purity_f1,
        r.bcubed_precision,
        r.bcubed_recall,
        r.bcubed_f1,
    ];
    check(six.iter().all(|&v| v == 2.0 / 3.0), || {
        format!("worked example gave {six:?}")
    })?;
    Ok("1000 random labelings within 1e-12; worked example exactly 2/3 (x6)".into())
}

// ---------------------------------------------------------------------------
// 3. Dependency and position features

const DEPRELS: &[&str] = &["nsubj", "obj", "obl", "det", "amod", "nmod", "case", "advmod"];

/// A random well-formed sentence: a random tree over shuffled tokens, one
/// predicate token and disjoint contiguous slots around it.
fn random_sentence(rng: &mut ChaCha8Rng, id: &str) -> Sentence {
    let n = rng.gen_range(2..=10);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n + 1];
    for (pos, &tok) in order.iter().enumerate().skip(1) {
        heads[tok] = order[rng.gen_range(0..pos)];
    }
    let tokens = (1..=n)
        .map(|i| Token {
            index: i,
            surface: format!("w{i}"),
            lemma: format!("w{i}"),
            upos: "X".into(),
            head: heads[i],
            deprel: if heads[i] == 0 {
                "root".into()
            } else {
                DEPRELS[rng.gen_range(0..DEPRELS.len())].into()
            },
        })
        .collect();
    let predicate = rng.gen_range(1..=n);
    let mut slots = Vec::new();
    let mut i = 1;
    while i <= n {
        let len = rng.gen_range(1..=2);
        let span: Vec<usize> = (i..(i + len).min(n + 1)).collect();
        if !span.contains(&predicate) && rng.gen_bool(0.6) {
            slots.push(SlotSpan {
                slot_id: format!("a{}", slots.len()),
                token_indices: span.clone(),
                gold_role: None,
            });
        }
        i += span.len();
    }
    Sentence::new(
        id.into(),
        tokens,
        PredicateSpan { token_indices: vec![predicate], gold_frame: None },
        slots,
    )
    .expect("generated sentence is valid")
    .value
}

fn criterion_features() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus: Vec<Sentence> = (0..300)
        .map(|i| random_sentence(&mut rng, &format!("r{i}")))
        .collect();
    let index = DepLabelIndex::build(corpus.iter());
    let mut vectors = 0;
    for s in &corpus {
        for slot in &s.slots {
            let v = inbound_dependency_vector(s, slot, &index).map_err(|e| e.to_string())?;
            check(v.iter().all(|&x| x == 0.0 || x == -1.0), || {
                format!("{}#{}: inbound vector {v:?}", s.id, slot.slot_id)
            })?;
            let expected: BTreeSet<&str> = slot
                .token_indices
                .iter()
                .map(|&t| s.tokens[t - 1].deprel.as_str())
                .collect();
            let marked: BTreeSet<&str> = index
                .labels()
                .iter()
                .zip(&v)
                .filter(|(_, &x)| x == -1.0)
                .map(|(l, _)| l.as_str())
                .collect();
            check(marked == expected, || {
                format!("{}#{}: marked {marked:?}, expected {expected:?}", s.id, slot.slot_id)
            })?;
            vectors += 1;
        }
    }

    for pv in 1..=10 {
        for pt in 1..=10 {
            let want = if pv < pt { 0 } else { 1 };
            check(boolean_feature(pv, pt) == want, || {
                format!("boolean_feature({pv}, {pt}) != {want}")
            })?;
        }
    }

    let ordinals = baseline_123(&corpus);
    for s in &corpus {
        let got: Vec<&str> = s
            .slots
            .iter()
            .map(|slot| ordinals.label(&s.slot_instance(slot)).unwrap_or("?"))
            .collect();
        let want: Vec<String> = (1..=s.slots.len()).map(|i| i.to_string()).collect();
        check(got == want, || format!("{}: ordinals {got:?}", s.id))?;
    }
    Ok(format!(
        "{vectors} inbound vectors in {{-1,0}}; 100-point boolean grid; ordinals 1..k in {} sentences",
        corpus.len()
    ))
}

// ---------------------------------------------------------------------------
// 4. Embedding composition

fn plain_sentence(id: &str, words: &[&str]) -> Sentence {
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, w)| Token {
            index: i + 1,
            surface: w.to_string(),
            lemma: w.to_string(),
            upos: "X".into(),
            head: if i == 0 { 0 } else { 1 },
            deprel: if i == 0 { "root".into() } else { "dep".into() },
        })
        .collect();
    Sentence::new(
        id.into(),
        tokens,
        PredicateSpan { token_indices: vec![1], gold_frame: None },
        vec![],
    )
    .expect("valid sentence")
    .value
}

fn criterion_embeddings() -> Outcome {
    let mut store = EmbeddingStore::new(2, false).map_err(|e| e.to_string())?;
    store.insert("a", vec![1.0, 0.0]).map_err(|e| e.to_string())?;
    store.insert("b", vec![0.0, 1.0]).map_err(|e| e.to_string())?;
    let corpus = vec![plain_sentence("d1", &["a", "b"]), plain_sentence("d2", &["a", "c"])];
    let idf = compute_idf(&corpus).map_err(|e| e.to_string())?;
    let c = context_vector(&corpus[0], &store, &idf, Weighting::Tfidf);
    // Direct sum: weights (ln(2/2), ln(2/1)) over vectors a, b.
    let w = [0.0_f64, 2.0_f64.ln()];
    let oracle = [
        (w[0] * 1.0 + w[1] * 0.0) / (w[0] + w[1]),
        (w[0] * 0.0 + w[1] * 1.0) / (w[0] + w[1]),
    ];
    check(
        c.len() == 2 && (c[0] - oracle[0]).abs() <= 1e-12 && (c[1] - oracle[1]).abs() <= 1e-12,
        || format!("context vector {c:?}, expected {oracle:?}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut big = EmbeddingStore::new(3, false).map_err(|e| e.to_string())?;
    let vocab: Vec<String> = (0..20).map(|i| format!("v{i}")).collect();
    for word in &vocab {
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        big.insert(word, v).map_err(|e| e.to_string())?;
    }
    for _ in 0..200 {
        let len = rng.gen_range(1..=6);
        let words: Vec<String> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    format!("oov{}", rng.gen_range(0..5))
                } else {
                    vocab[rng.gen_range(0..vocab.len())].clone()
                }
            })
            .collect();
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let got = span_vector(&big, &refs);
        let mut want = [0.0; 3];
        for wd in &words {
            if big.contains(wd) {
                for (acc, x) in want.iter_mut().zip(big.lookup(wd)) {
                    *acc += x;
                }
            }
        }
        let want: Vec<f64> = want.iter().map(|x| x / words.len() as f64).collect();
        check(
            got.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-12),
            || format!("span {words:?}: {got:?} vs {want:?}"),
        )?;
    }

    let mut normalized = 0;
    for case in 0..500 {
        let blocks: Vec<Vec<f64>> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let d = rng.gen_range(1..=5);
                if rng.gen_bool(0.1) {
                    vec![0.0; d]
                } else {
                    (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect()
                }
            })
            .collect();
        let names: Vec<String> = (0..blocks.len()).map(|i| format!("b{i}")).collect();
        let parts: Vec<(&str, &[f64])> = names
            .iter()
            .zip(&blocks)
            .map(|(n, b)| (n.as_str(), b.as_slice()))
            .collect();
        let v = compose(&parts, true);
        let norm = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        if blocks.iter().flatten().all(|&x| x == 0.0) {
            check(norm == 0.0, || format!("case {case}: zero vector became {norm}"))?;
        } else {
            check((norm - 1.0).abs() <= 1e-9, || format!("case {case}: norm {norm}"))?;
            normalized += 1;
        }
    }
    Ok(format!(
        "tf-idf example = {c:?}; 200 OOV spans match; {normalized} composed vectors unit-norm"
    ))
}

// ---------------------------------------------------------------------------
// 5. Logistic regression

fn criterion_logreg() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, d, c) = (12, 4, 3);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    let weights: Vec<Vec<f64>> = (0..c)
        .map(|_| (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let l2 = 0.3;
    let (_, grad) = loss_and_gradient(&weights, &rows, &targets, l2);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for ci in 0..c {
        for j in 0..=d {
            let mut plus = weights.clone();
            plus[ci][j] += h;
            let mut minus = weights.clone();
            minus[ci][j] -= h;
            let numeric = (loss_and_gradient(&plus, &rows, &targets, l2).0
                - loss_and_gradient(&minus, &rows, &targets, l2).0)
                / (2.0 * h);
            let analytic = grad[ci][j];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    check(worst <= 1e-5, || format!("max relative gradient error {worst:e}"))?;

    let classes = vec!["neg".to_string(), "pos".to_string()];
    let sep_rows = vec![vec![1.0, 0.5], vec![-1.0, -0.5]];
    let sep_targets = vec![1, 0];
    let cfg = TrainConfig::default();
    let report = train_rows(&sep_rows, &sep_targets, classes.clone(), &cfg).map_err(|e| e.to_string())?;
    let epochs = report.losses.len() - 1;
    let correct = sep_rows
        .iter()
        .zip(&sep_targets)
        .filter(|(x, &y)| semframe::logreg::argmax(&report.model.logits(x)) == y)
        .count();
    check(correct == 2 && epochs <= 500, || {
        format!("separable problem: {correct}/2 correct after {epochs} epochs")
    })?;

    let again = train_rows(&rows, &targets, classes_n(c), &cfg).map_err(|e| e.to_string())?;
    let once = train_rows(&rows, &targets, classes_n(c), &cfg).map_err(|e| e.to_string())?;
    let bits = |m: &semframe::logreg::LogRegModel| -> Vec<u64> {
        m.weights.iter().flatten().map(|w| w.to_bits()).collect()
    };
    check(bits(&again.model) == bits(&once.model), || "two runs differ".into())?;
    Ok(format!(
        "max gradient rel. error {worst:.1e}; separable pair 2/2 in {epochs} epochs; bit-identical reruns"
    ))
}

fn classes_n(c: usize) -> Vec<String> {
    (0..c).map(|i| format!("c{i}")).collect()
}

// ---------------------------------------------------------------------------
// 6-8. Command-line runs on the bundled synthetic corpus

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic")
}

fn semframe(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_semframe"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "semframe {}: {}\n{}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn same_file(produced: &Path, golden: &Path) -> Result<(), String> {
    let (a, b) = (read(produced)?, read(golden)?);
    check(a == b, || {
        format!("{} differs from {}", produced.display(), golden.display())
    })
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn criterion_golden(tmp: &Path) -> Outcome {
    let data = data_dir();
    let golden = data.join("golden");
    let corpus = data.join("corpus.jsonl");
    let start = Instant::now();
    let frames = tmp.join("frames.tsv");
    let roles = tmp.join("roles.tsv");
    let b1 = tmp.join("b1.tsv");
    semframe(&[
        "induce-frames", "--corpus", p(&corpus), "--config", p(&data.join("frames.toml")),
        "--k", "2", "--out", p(&frames),
    ])?;
    semframe(&[
        "induce-roles", "--corpus", p(&corpus), "--config", p(&data.join("roles.toml")),
        "--k", "2", "--out", p(&roles),
    ])?;
    semframe(&[
        "merge", "--frames", p(&frames), "--roles", p(&roles), "--corpus", p(&corpus),
        "--out", p(&b1),
    ])?;
    let mut scores = Vec::new();
    for (pred, gold, name) in [
        (&frames, "gold_frames.tsv", "scores_frames.json"),
        (&roles, "gold_roles.tsv", "scores_roles.json"),
        (&b1, "gold_slots.tsv", "scores_b1.json"),
    ] {
        let out = tmp.join(name);
        let stdout = semframe(&[
            "evaluate", "--pred", p(pred), "--gold", p(&data.join(gold)), "--out", p(&out),
        ])?;
        same_file(&out, &golden.join(name))?;
        check(stdout == read(&out)?, || format!("{name}: stdout differs from --out"))?;
        let v: serde_json::Value = serde_json::from_str(&stdout).map_err(|e| e.to_string())?;
        let (pu, b3) = (v["purity_f1"].as_f64(), v["bcubed_f1"].as_f64());
        check(pu == Some(1.0) && b3 == Some(1.0), || {
            format!("{name}: purity_f1 {pu:?}, bcubed_f1 {b3:?}")
        })?;
        scores.push(name);
    }
    for (produced, name) in [(&frames, "frames.tsv"), (&roles, "roles.tsv"), (&b1, "b1.tsv")] {
        same_file(produced, &golden.join(name))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "frames/roles/b1 and {} score files byte-identical, all F1 = 1.0, {:.2}s",
        scores.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_merge(tmp: &Path) -> Outcome {
    let data = data_dir();
    let corpus = data.join("corpus.jsonl");
    let frames = data.join("golden/frames.tsv");
    let empty = tmp.join("empty_roles.tsv");
    std::fs::write(&empty, "").map_err(|e| e.to_string())?;
    let merged_path = tmp.join("b1_ukn.tsv");
    semframe(&[
        "merge", "--frames", p(&frames), "--roles", p(&empty), "--corpus", p(&corpus),
        "--out", p(&merged_path),
    ])?;
    let merged = Labeling::from_tsv(&read(&merged_path)?).map_err(|e| e.to_string())?;
    let frames = Labeling::from_tsv(&read(&frames)?).map_err(|e| e.to_string())?;
    let gold = Labeling::from_tsv(&read(&data.join("gold_frames.tsv"))?).map_err(|e| e.to_string())?;
    check(!merged.is_empty(), || "merge produced no labels".into())?;
    check(merged.iter().all(|(_, l)| l.ends_with(".UKN")), || {
        "a slot label does not end in .UKN".into()
    })?;

    let mut recovered: BTreeMap<String, String> = BTreeMap::new();
    for (id, label) in merged.iter() {
        let (sentence, _) = id.split_once('#').ok_or_else(|| format!("bad slot id {id}"))?;
        let prefix = label.rsplit_once('.').map(|(f, _)| f).unwrap_or(label);
        if let Some(prev) = recovered.insert(sentence.into(), prefix.into()) {
            check(prev == prefix, || format!("{sentence}: slot frames disagree"))?;
        }
    }
    let recovered = Labeling::from_pairs(recovered);
    let original_pairs: Vec<(&str, &str)> = frames
        .iter()
        .filter(|(id, _)| recovered.contains(id))
        .collect();
    check(
        recovered.iter().all(|(id, l)| frames.get(id) == Some(l)),
        || "frame prefix differs from the frame labeling".into(),
    )?;
    let restrict = |l: &Labeling| {
        Labeling::from_pairs(l.iter().filter(|(id, _)| recovered.contains(id)))
    };
    let before = evaluate(&Labeling::from_pairs(original_pairs), &restrict(&gold))
        .map_err(|e| e.to_string())?;
    let after = evaluate(&recovered, &restrict(&gold)).map_err(|e| e.to_string())?;
    check(before == after, || format!("purity changed: {before:?} -> {after:?}"))?;
    Ok(format!(
        "{} slots all .UKN; frame-prefix purity_f1 {} unchanged",
        merged.len(),
        after.purity_f1
    ))
}

fn criterion_baselines(tmp: &Path) -> Outcome {
    let data = data_dir();
    let corpus = data.join("corpus.jsonl");
    let mut summary = Vec::new();
    for (kind, expected) in [
        ("per-verb", "baseline_per_verb.tsv"),
        ("per-dep-role", "baseline_per_dep_role.tsv"),
    ] {
        let out = tmp.join(expected);
        semframe(&["baseline", "--kind", kind, "--corpus", p(&corpus), "--out", p(&out)])?;
        same_file(&out, &data.join("golden").join(expected))?;
        let clusters: BTreeSet<String> = Labeling::from_tsv(&read(&out)?)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, l)| l.to_string())
            .collect();
        summary.push(format!("{kind}: {} clusters", clusters.len()));
    }
    check(summary == ["per-verb: 8 clusters", "per-dep-role: 2 clusters"], || {
        format!("unexpected cluster counts {summary:?}")
    })?;
    Ok(format!("{} (match expected labelings)", summary.join(", ")))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("HAC oracle equivalence", Box::new(criterion_hac)),
        ("metric oracle equivalence", Box::new(criterion_metrics)),
        ("feature conformance", Box::new(criterion_features)),
        ("embedding composition", Box::new(criterion_embeddings)),
        ("logistic regression", Box::new(criterion_logreg)),
        ("end-to-end golden run", Box::new(|| criterion_golden(tmp.path()))),
        ("merge semantics", Box::new(|| criterion_merge(tmp.path()))),
        ("baseline reproduction", Box::new(|| criterion_baselines(tmp.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
