//! Acceptance suite. Each test exercises one exit criterion end to end and
//! prints a single [PASS]/[FAIL] line (run with `--nocapture` to see them).

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kahncheck::event_structure::{config_poset, EventStructure};
use kahncheck::gen::{random_monotone_endomap, random_pointed_poset};
use kahncheck::model::{
    check_model_axioms, check_model_axioms_with, restriction_map_between, Bounds, ChannelDecl,
    ModelInstance,
};
use kahncheck::network::{
    computes_check, gkp_check, node_contexts, prefix_bound_check, process_computing, Process,
    SpaceCache,
};
use kahncheck::poset::{
    check_incremental_domain, check_incremental_morphism, covering_sequence_poset, jung_chain,
    lfp_iterate,
};
use kahncheck::stream::{dmerge_word, StreamChannel};
use kahncheck::trace::{
    covseq_to_linear, enumerate_traces, linear_to_covseq, pomset_of_trace, trace_leq,
    trace_of_pomset, Trace, TraceKind,
};
use kahncheck_cli::checks::{run_checks, CheckId, CheckOptions};
use kahncheck_cli::document::{load, Loaded, TraceDoc};
use kahncheck_cli::input_info;

const FIXTURES: [&str; 12] = [
    "copy_chain3.json",
    "disjoint_consts.json",
    "dmerge_const.json",
    "dmerge_pomset_small.json",
    "feedback_nondet.json",
    "feedback_prepend.json",
    "feedback_prepend_pomset.json",
    "identity_depth1.json",
    "nondet_const.json",
    "pipeline_copy.json",
    "pipeline_negate_pomset.json",
    "raw_conflict_table.json",
];

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load_fixture(name: &str) -> Loaded {
    load(&fixture_path(name), None).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn criterion(name: &str, f: impl FnOnce() -> Result<String, String>) {
    match f() {
        Ok(detail) => println!("[PASS] {name}: {detail}"),
        Err(reason) => {
            println!("[FAIL] {name}: {reason}");
            panic!("acceptance criterion {name} failed: {reason}");
        }
    }
}

/// Deterministic feedback network at depth 3: the composed behaviour set and
/// the fixpoint set are both exactly {000}, within one second.
#[test]
fn gkp_deterministic_feedback_prepend() {
    criterion("gkp-deterministic", || {
        let start = Instant::now();
        let loaded = load_fixture("feedback_prepend.json");
        let mut cache = SpaceCache::new(&loaded.model);
        let report =
            gkp_check(&loaded.network, &loaded.model, &mut cache).map_err(|e| e.to_string())?;
        let space = cache
            .get(&loaded.network.full_sort())
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let values: Vec<&str> = report
            .value_set
            .iter()
            .map(|&v| space.value_label(v))
            .collect();
        let fixpoints: Vec<&str> = report
            .kahn
            .fixpoint_set
            .iter()
            .map(|&v| space.value_label(v))
            .collect();
        if values != vec!["s=000"] || fixpoints != vec!["s=000"] {
            return Err(format!("values {values:?}, fixpoints {fixpoints:?}"));
        }
        if report.value_set != report.kahn.fixpoint_set {
            return Err("sets differ".into());
        }
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("took {elapsed:?}, budget 1 s"));
        }
        Ok(format!("value set {{000}} = fixpoint set in {elapsed:?}"))
    });
}

/// Non-deterministic merge of two constants under all oracles of length ≤ 4:
/// exact set equality within 60 s, and oracle 0101 merges "ab"/"cd" to
/// "acbd".
#[test]
fn gkp_nondeterministic_dmerge() {
    criterion("gkp-nondeterministic", || {
        if dmerge_word("ab", "cd", "0101", 4) != "acbd" {
            return Err("oracle 0101 does not merge ab/cd to acbd".into());
        }
        let start = Instant::now();
        let loaded = load_fixture("dmerge_const.json");
        let mut cache = SpaceCache::new(&loaded.model);
        let report =
            gkp_check(&loaded.network, &loaded.model, &mut cache).map_err(|e| e.to_string())?;
        let space = cache
            .get(&loaded.network.full_sort())
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        if !report.safety.passed() || !report.liveness.passed() {
            return Err("an inclusion failed".into());
        }
        if report.value_set != report.kahn.fixpoint_set {
            return Err("sets differ".into());
        }
        // The selection using oracle 0101 fixes the fully merged word.
        let merge_node = loaded
            .network
            .nodes
            .iter()
            .position(|n| n.name == "merge")
            .expect("merge node");
        let oracle_fn = loaded.network.nodes[merge_node]
            .function_names
            .iter()
            .position(|n| n == "dmerge(x,y;0101)")
            .expect("oracle 0101 compiled");
        let sel = report
            .kahn
            .selections
            .iter()
            .position(|s| s[merge_node] == oracle_fn)
            .expect("selection exists");
        let fix = report.kahn.fixpoints[sel];
        let label = space.value_label(fix);
        if !label.contains("m=acbd") {
            return Err(format!("oracle 0101 fixpoint is {label}"));
        }
        // Independent oracle for the whole value set: every merged word is a
        // shuffle of a prefix of "ab" with a prefix of "cd", enumerated
        // directly, without going through the merge function.
        let mut expected: BTreeSet<String> = BTreeSet::new();
        for i in 0..=2usize {
            for j in 0..=2usize {
                shuffles(&"ab"[..i], &"cd"[..j], String::new(), &mut expected);
            }
        }
        let mut got: BTreeSet<String> = BTreeSet::new();
        for &v in &report.value_set {
            let mut per: BTreeMap<String, String> =
                space.values.per_channel_display(v).into_iter().collect();
            if per["x"] != "ab" || per["y"] != "cd" {
                return Err(format!(
                    "inputs not fully produced in {}",
                    space.value_label(v)
                ));
            }
            let m = per.remove("m").expect("merged channel present");
            got.insert(if m == "ε" { String::new() } else { m });
        }
        if got != expected {
            return Err(format!(
                "merged words {got:?} differ from the {} expected shuffles",
                expected.len()
            ));
        }
        if elapsed >= Duration::from_secs(60) {
            return Err(format!("took {elapsed:?}, budget 60 s"));
        }
        Ok(format!(
            "{} merged values = {} fixpoints = all prefix shuffles, oracle 0101 ↦ acbd, in {elapsed:?}",
            report.value_set.len(),
            report.kahn.fixpoint_set.len()
        ))
    });
}

fn shuffles(left: &str, right: &str, acc: String, out: &mut BTreeSet<String>) {
    if left.is_empty() && right.is_empty() {
        out.insert(acc);
        return;
    }
    if let Some(c) = left.chars().next() {
        shuffles(&left[1..], right, format!("{acc}{c}"), out);
    }
    if let Some(c) = right.chars().next() {
        shuffles(left, &right[1..], format!("{acc}{c}"), out);
    }
}

/// Traces over stream products and labelled pomsets are mutually inverse
/// monotone bijections on every sort with ≤ 2 channels, alphabets ≤ 2
/// symbols and depth ≤ 2.
#[test]
fn pomset_trace_bijection_grid() {
    criterion("pomset-iso-grid", || {
        let mut total = 0usize;
        let mut combos = 0usize;
        let alphabets = ["0", "01"];
        let depths = [0usize, 1, 2];
        let mut channel_shapes = Vec::new();
        for a in alphabets {
            for d in depths {
                channel_shapes.push((a, d));
            }
        }
        let mut sorts: Vec<Vec<(&str, &str, usize)>> = Vec::new();
        for &(a, d) in &channel_shapes {
            sorts.push(vec![("p", a, d)]);
            for &(a2, d2) in &channel_shapes {
                sorts.push(vec![("p", a, d), ("q", a2, d2)]);
            }
        }
        for decl in sorts {
            let model = ModelInstance::new(
                decl.iter().map(|(n, a, d)| {
                    (
                        n.to_string(),
                        ChannelDecl::Stream(StreamChannel::new(a.chars().collect(), *d).unwrap()),
                    )
                }),
                TraceKind::Pomset,
                Bounds::default(),
            )
            .map_err(|e| e.to_string())?;
            let sort: BTreeSet<String> = decl.iter().map(|(n, _, _)| n.to_string()).collect();
            let space = model.space(&sort).map_err(|e| e.to_string())?;
            let alphabet_map: BTreeMap<String, (BTreeSet<char>, usize)> = decl
                .iter()
                .map(|(n, a, d)| (n.to_string(), (a.chars().collect(), *d)))
                .collect();
            let traces = enumerate_traces(
                &space.product.es,
                TraceKind::Pomset,
                space.product.es.len(),
                1_000_000,
            )
            .map_err(|e| e.to_string())?;
            let mut pomsets = Vec::with_capacity(traces.len());
            for t in &traces {
                let p = pomset_of_trace(t, &space.product).map_err(|e| e.to_string())?;
                let back = trace_of_pomset(&p, &alphabet_map, &space.product)
                    .map_err(|e| e.to_string())?;
                if &back != t {
                    return Err(format!("round trip differs at {}", t.display()));
                }
                pomsets.push(p);
            }
            let distinct: BTreeSet<String> = pomsets.iter().map(|p| format!("{p:?}")).collect();
            if distinct.len() != traces.len() {
                return Err(format!("not injective on {decl:?}"));
            }
            for i in 0..traces.len() {
                for j in 0..traces.len() {
                    if trace_leq(&traces[i], &traces[j]) != pomsets[i].leq(&pomsets[j]) {
                        return Err(format!(
                            "order disagrees at {} vs {}",
                            traces[i].display(),
                            traces[j].display()
                        ));
                    }
                }
            }
            total += traces.len();
            combos += 1;
        }
        Ok(format!(
            "{total} compact traces across {combos} sorts, zero exceptions"
        ))
    });
}

fn all_three_event_structures() -> Vec<Arc<EventStructure>> {
    use kahncheck::trace::partial_orders_extending;
    let mut out = Vec::new();
    // Structures with 0..=2 events and every forbidden choice.
    out.push(Arc::new(EventStructure::validate(vec![], [], []).unwrap()));
    out.push(Arc::new(
        EventStructure::validate(vec!["a".into()], [], []).unwrap(),
    ));
    for forbidden in [vec![], vec![BTreeSet::from([0usize, 1])]] {
        for causality in [vec![], vec![(0usize, 1usize)]] {
            if let Ok(es) = EventStructure::validate(
                vec!["a".into(), "b".into()],
                causality.clone(),
                forbidden.clone(),
            ) {
                out.push(Arc::new(es));
            }
        }
    }
    // All causal orders on three labelled events, with every family of
    // forbidden pairs and optionally the full triple.
    let pairs = [
        BTreeSet::from([0usize, 1usize]),
        BTreeSet::from([0, 2]),
        BTreeSet::from([1, 2]),
    ];
    for order in partial_orders_extending(3, &[]) {
        for mask in 0..(1usize << pairs.len()) {
            let mut forbidden: Vec<BTreeSet<usize>> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, f)| f.clone())
                .collect();
            if let Ok(es) = EventStructure::validate(
                vec!["a".into(), "b".into(), "c".into()],
                order.clone(),
                forbidden.clone(),
            ) {
                out.push(Arc::new(es));
            }
            if mask == 0 {
                forbidden.push(BTreeSet::from([0, 1, 2]));
                if let Ok(es) = EventStructure::validate(
                    vec!["a".into(), "b".into(), "c".into()],
                    order.clone(),
                    forbidden,
                ) {
                    out.push(Arc::new(es));
                }
            }
        }
    }
    out
}

fn random_event_structure(rng: &mut ChaCha8Rng, events: usize) -> Option<Arc<EventStructure>> {
    let labels: Vec<String> = (0..events).map(|i| format!("e{i}")).collect();
    let mut causality = Vec::new();
    for i in 0..events {
        for j in i + 1..events {
            if rng.gen_ratio(1, 3) {
                causality.push((i, j));
            }
        }
    }
    let mut forbidden = Vec::new();
    for i in 0..events {
        for j in i + 1..events {
            if rng.gen_ratio(1, 4) {
                forbidden.push(BTreeSet::from([i, j]));
            }
        }
    }
    EventStructure::validate(labels, causality, forbidden)
        .ok()
        .map(Arc::new)
}

/// Linear traces and covering sequences of the configuration domain are
/// order-isomorphic for every event structure with at most 5 events:
/// exhaustively for ≤ 3 events, and on 100 seeded 4–5-event structures.
#[test]
fn linear_covseq_isomorphism_family() {
    criterion("covseq-iso-family", || {
        let mut structures = all_three_event_structures();
        let exhaustive = structures.len();
        let mut rng = ChaCha8Rng::seed_from_u64(1009);
        let mut sampled = 0;
        while sampled < 100 {
            let n = rng.gen_range(4..=5);
            if let Some(es) = random_event_structure(&mut rng, n) {
                structures.push(es);
                sampled += 1;
            }
        }
        let mut traces_total = 0usize;
        for es in &structures {
            let cp = config_poset(es, 100_000).map_err(|e| e.to_string())?;
            let lin = enumerate_traces(es, TraceKind::Linear, es.len(), 1_000_000)
                .map_err(|e| e.to_string())?;
            let (_, seqs) = covering_sequence_poset(&cp.poset).map_err(|e| e.to_string())?;
            if lin.len() != seqs.len() {
                return Err(format!(
                    "{} linear traces vs {} covering sequences",
                    lin.len(),
                    seqs.len()
                ));
            }
            let mut images = BTreeSet::new();
            for t in &lin {
                let seq = linear_to_covseq(t, &cp).map_err(|e| e.to_string())?;
                let back = covseq_to_linear(&seq, &cp).map_err(|e| e.to_string())?;
                if &back != t {
                    return Err(format!("round trip differs at {}", t.display()));
                }
                images.insert(seq.steps().to_vec());
            }
            if images.len() != lin.len() {
                return Err("sequence map is not injective".into());
            }
            for a in &lin {
                for b in &lin {
                    let sa = linear_to_covseq(a, &cp).unwrap();
                    let sb = linear_to_covseq(b, &cp).unwrap();
                    if trace_leq(a, b) != sa.is_prefix_of(&sb) {
                        return Err(format!(
                            "order disagrees at {} vs {}",
                            a.display(),
                            b.display()
                        ));
                    }
                }
            }
            traces_total += lin.len();
        }
        Ok(format!(
            "{} structures ({exhaustive} exhaustive ≤3 events, 100 random 4–5), {traces_total} traces, zero exceptions",
            structures.len()
        ))
    });
}

/// Every restriction map between materialized trace domains, over every
/// subsort pair of every test family, weakly preserves and lifts relative
/// covers.
#[test]
fn incrementality_of_restriction_maps() {
    criterion("incrementality", || {
        let mut maps_checked = 0usize;

        let subsort_pairs = |chs: &[&str]| {
            let mut sorts: Vec<BTreeSet<String>> = Vec::new();
            for mask in 0..(1usize << chs.len()) {
                sorts.push(
                    chs.iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, c)| c.to_string())
                        .collect(),
                );
            }
            let mut pairs = Vec::new();
            for s in &sorts {
                for t in &sorts {
                    if t.is_subset(s) {
                        pairs.push((s.clone(), t.clone()));
                    }
                }
            }
            pairs
        };

        // Stream family and raw family, in both trace flavours.
        for kind in [TraceKind::Linear, TraceKind::Pomset] {
            let stream_family = ModelInstance::new(
                [
                    (
                        "a".to_string(),
                        ChannelDecl::Stream(StreamChannel::new(vec!['0', '1'], 2).unwrap()),
                    ),
                    (
                        "b".to_string(),
                        ChannelDecl::Stream(StreamChannel::new(vec!['x'], 2).unwrap()),
                    ),
                ],
                kind,
                Bounds::default(),
            )
            .map_err(|e| e.to_string())?;
            let conflict = Arc::new(
                EventStructure::validate(
                    vec!["p".into(), "q".into()],
                    [],
                    [BTreeSet::from([0, 1])],
                )
                .unwrap(),
            );
            let chain = Arc::new(
                EventStructure::validate(vec!["u".into(), "v".into()], [(0, 1)], []).unwrap(),
            );
            let raw_family = ModelInstance::new(
                [
                    ("c".to_string(), ChannelDecl::Raw(conflict)),
                    ("d".to_string(), ChannelDecl::Raw(chain)),
                ],
                kind,
                Bounds::default(),
            )
            .map_err(|e| e.to_string())?;
            for (model, chs) in [(&stream_family, ["a", "b"]), (&raw_family, ["c", "d"])] {
                for (s, t) in subsort_pairs(&chs) {
                    let s_space = model.space(&s).map_err(|e| e.to_string())?;
                    let t_space = model.space(&t).map_err(|e| e.to_string())?;
                    let (s_dom, t_dom, rho) = restriction_map_between(model, &s_space, &t_space)
                        .map_err(|e| e.to_string())?;
                    if !check_incremental_domain(&s_dom.poset).passed()
                        || !check_incremental_domain(&t_dom.poset).passed()
                    {
                        return Err("trace domain not incremental".into());
                    }
                    let v = check_incremental_morphism(&rho).map_err(|e| e.to_string())?;
                    if !v.passed() {
                        return Err(format!("{kind:?} {s:?}→{t:?}: {v:?}"));
                    }
                    maps_checked += 1;
                }
            }
        }

        // Every fixture document, through the CLI driver.
        for name in FIXTURES {
            let loaded = load_fixture(name);
            let input = input_info(&fixture_path(name)).map_err(|e| e.to_string())?;
            let report = run_checks(
                &loaded,
                &[CheckId::Incremental],
                CheckOptions::default(),
                input,
            );
            if report.checks[0].verdict != "pass" {
                return Err(format!("{name}: {}", report.checks[0].details));
            }
        }
        Ok(format!(
            "{maps_checked} family restriction maps + 12 fixture documents, all incremental"
        ))
    });
}

/// 100 seeded random monotone endomaps on random pointed posets of ≤ 8
/// elements: the approximation chain starts at bottom, each link sits below
/// the image of the previous one, and the last link is the least fixpoint.
#[test]
fn approximation_chain_conditions_randomized() {
    criterion("jung-chains", || {
        let mut rng = ChaCha8Rng::seed_from_u64(271828);
        for case in 0..100 {
            let p = Arc::new(random_pointed_poset(&mut rng, 8));
            let f = random_monotone_endomap(&mut rng, &p);
            let chain = jung_chain(&f).map_err(|e| e.to_string())?;
            if chain.links()[0] != p.bottom() {
                return Err(format!("case {case}: chain does not start at bottom"));
            }
            for w in chain.links().windows(2) {
                if !p.leq(w[1], f.apply(w[0])) {
                    return Err(format!("case {case}: link above image of predecessor"));
                }
            }
            if chain.last() != lfp_iterate(&f).map_err(|e| e.to_string())? {
                return Err(format!("case {case}: chain does not reach the fixpoint"));
            }
        }
        Ok("100 random endomaps on posets of ≤ 8 elements, conditions 1–3 hold".into())
    });
}

/// For every node of every fixture network: along every computing trace and
/// every prefix of it, observed output stays below the witnessing function
/// of the observed input.
#[test]
fn prefix_bound_across_fixture_suite() {
    criterion("lemma1-prefix-bound", || {
        let mut traces_total = 0usize;
        for name in FIXTURES {
            let loaded = load_fixture(name);
            let mut cache = SpaceCache::new(&loaded.model);
            let ctxs = node_contexts(&loaded.network, &mut cache).map_err(|e| e.to_string())?;
            for (node, ctx) in loaded.network.nodes.iter().zip(&ctxs) {
                let p = process_computing(&loaded.model, node, ctx).map_err(|e| e.to_string())?;
                let v = prefix_bound_check(&loaded.model, node, ctx, &p);
                if !v.passed() {
                    return Err(format!("{name}/{}: {v:?}", node.name));
                }
                traces_total += p.len();
            }
        }
        Ok(format!(
            "bound holds for every prefix of {traces_total} computing traces, zero exceptions"
        ))
    });
}

/// Safety and liveness hold across the whole fixture suite; a failure anywhere
/// aborts with a replayable witness.
#[test]
fn safety_and_liveness_across_fixture_suite() {
    criterion("safety-liveness-suite", || {
        for name in FIXTURES {
            let loaded = load_fixture(name);
            let mut cache = SpaceCache::new(&loaded.model);
            let report =
                gkp_check(&loaded.network, &loaded.model, &mut cache).map_err(|e| e.to_string())?;
            if !report.safety.passed() || !report.liveness.passed() {
                let witness = match (report.safety.witness(), report.liveness.witness()) {
                    (Some(kahncheck::network::GkpWitness::UnspecifiedValue { trace, .. }), _) => {
                        serde_json::to_string(&TraceDoc::of_trace(trace)).unwrap()
                    }
                    (_, Some(w)) => format!("{w:?}"),
                    _ => "missing witness".into(),
                };
                return Err(format!("{name}: witness {witness}"));
            }
        }
        Ok(format!(
            "safety ⊆ and liveness ⊇ hold on all {} fixture networks",
            FIXTURES.len()
        ))
    });
}

/// Model axioms pass on every fixture, and the three mutation controls
/// (corrupted restriction, injected inconsistent trace, dropped maximal
/// trace) are each detected.
#[test]
fn model_axioms_and_mutation_controls() {
    criterion("model-axioms", || {
        for name in FIXTURES {
            let loaded = load_fixture(name);
            let input = input_info(&fixture_path(name)).map_err(|e| e.to_string())?;
            let report = run_checks(&loaded, &[CheckId::Axioms], CheckOptions::default(), input);
            if report.checks[0].verdict != "pass" {
                return Err(format!("{name}: axioms {}", report.checks[0].verdict));
            }
        }

        // Control 1: restriction that drops order pairs is caught.
        let loaded = load_fixture("pipeline_copy.json");
        let sorts: Vec<BTreeSet<String>> = vec![
            ["a".to_string()].into(),
            ["a".to_string(), "b".to_string()].into(),
        ];
        let clean = check_model_axioms(&loaded.model, &sorts).map_err(|e| e.to_string())?;
        if !clean.passed() {
            return Err("axioms fail before mutation".into());
        }
        let corrupted = check_model_axioms_with(&loaded.model, &sorts, &|t, src, dst| {
            let r = src.restrict(t, dst);
            Trace::from_parts(dst.product.es.clone(), r.carrier().to_vec(), Vec::new())
        })
        .map_err(|e| e.to_string())?;
        if corrupted.passed() {
            return Err("corrupted restriction was not detected".into());
        }

        // Controls 2 and 3: computes-set mutations.
        let loaded = load_fixture("identity_depth1.json");
        let mut cache = SpaceCache::new(&loaded.model);
        let ctxs = node_contexts(&loaded.network, &mut cache).map_err(|e| e.to_string())?;
        let copy_idx = loaded
            .network
            .nodes
            .iter()
            .position(|n| n.name == "copy")
            .expect("copy node");
        let node = &loaded.network.nodes[copy_idx];
        let ctx = &ctxs[copy_idx];
        let p = process_computing(&loaded.model, node, ctx).map_err(|e| e.to_string())?;

        let es = ctx.space.product.es.clone();
        let a = es.index_of("a:1").expect("event a:1");
        let b = es.index_of("b:1").expect("event b:1");
        let inconsistent = Trace::linear(es.clone(), &[b, a]).map_err(|e| e.to_string())?;
        let mut injected = p.traces.clone();
        injected.push(inconsistent);
        let v = computes_check(
            &loaded.model,
            node,
            ctx,
            &Process::new(ctx.space.sort.clone(), injected),
        )
        .map_err(|e| e.to_string())?;
        if v.passed() {
            return Err("injected inconsistent trace was not detected".into());
        }

        let maximal = p
            .traces
            .iter()
            .max_by_key(|t| t.len())
            .expect("non-empty process")
            .clone();
        let dropped: Vec<Trace> = p
            .traces
            .iter()
            .filter(|t| **t != maximal)
            .cloned()
            .collect();
        let v = computes_check(
            &loaded.model,
            node,
            ctx,
            &Process::new(ctx.space.sort.clone(), dropped),
        )
        .map_err(|e| e.to_string())?;
        if v.passed() {
            return Err("dropped maximal trace was not detected".into());
        }

        Ok(format!(
            "axioms pass on {} fixtures; all three mutation controls detected",
            FIXTURES.len()
        ))
    });
}

fn report_without_timing(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).expect("json report");
    if let Some(checks) = v.get_mut("checks").and_then(|c| c.as_array_mut()) {
        for c in checks {
            c["timing_ms"] = serde_json::json!(0);
        }
    }
    v
}

/// Two runs of the CLI over every fixture produce byte-identical JSON
/// reports once the timing fields are zeroed.
#[test]
fn reports_are_deterministic() {
    criterion("determinism", || {
        for name in FIXTURES {
            // The heaviest check is skipped on the big merge instance to keep
            // the double run quick; the selection is identical across runs.
            let checks = if name == "dmerge_const.json" {
                "axioms,incremental,stream-iso,pomset-iso,covseq-iso,computes,gkp,safety,liveness,expressive,jung,lemma1"
            } else {
                "axioms,incremental,stream-iso,pomset-iso,covseq-iso,computes,gkp,safety,liveness,expressive,jung,lemma1,global-char"
            };
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_kahncheck"))
                    .arg("check")
                    .arg(fixture_path(name))
                    .args(["--format", "json", "--checks", checks, "--seed", "7"])
                    .output()
                    .expect("binary runs")
            };
            let first = run();
            let second = run();
            if first.status.code() != Some(0) {
                return Err(format!(
                    "{name}: exit {:?}\n{}",
                    first.status.code(),
                    String::from_utf8_lossy(&first.stderr)
                ));
            }
            let a = report_without_timing(&first.stdout);
            let b = report_without_timing(&second.stdout);
            let a_bytes = serde_json::to_vec(&a).unwrap();
            let b_bytes = serde_json::to_vec(&b).unwrap();
            if a_bytes != b_bytes {
                return Err(format!("{name}: reports differ between runs"));
            }
        }
        Ok(format!(
            "byte-identical reports (timing excluded) across {} fixtures",
            FIXTURES.len()
        ))
    });
}
