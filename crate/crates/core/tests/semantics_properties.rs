//! Cross-module laws: restriction maps are incremental morphisms, the
//! observation square commutes, linear traces are covering sequences, and
//! traces over stream products are labelled pomsets.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use kahncheck::event_structure::EventStructure;
use kahncheck::model::{
    check_model_axioms, restriction_map_between, Bounds, ChannelDecl, ModelInstance,
};
use kahncheck::poset::{check_incremental_domain, check_incremental_morphism};
use kahncheck::stream::StreamChannel;
use kahncheck::trace::{
    covseq_to_linear, enumerate_traces, linear_to_covseq, pomset_of_trace, trace_leq,
    trace_of_pomset, TraceKind,
};
use kahncheck::Verdict;

fn stream_model(channels: &[(&str, &str, usize)], kind: TraceKind) -> ModelInstance {
    ModelInstance::new(
        channels.iter().map(|(name, alphabet, depth)| {
            (
                name.to_string(),
                ChannelDecl::Stream(
                    StreamChannel::new(alphabet.chars().collect(), *depth).unwrap(),
                ),
            )
        }),
        kind,
        Bounds::default(),
    )
    .unwrap()
}

fn subsort_pairs(channels: &[&str]) -> Vec<(BTreeSet<String>, BTreeSet<String>)> {
    let all: Vec<String> = channels.iter().map(|s| s.to_string()).collect();
    let mut sorts: Vec<BTreeSet<String>> = Vec::new();
    for mask in 0..(1usize << all.len()) {
        sorts.push(
            all.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| c.clone())
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
}

/// Every restriction map between materialized trace domains weakly preserves
/// and lifts relative covers, in both trace flavours.
#[test]
fn restriction_maps_are_incremental_morphisms() {
    for kind in [TraceKind::Linear, TraceKind::Pomset] {
        let model = stream_model(&[("a", "01", 2), ("b", "x", 2)], kind);
        for (s, t) in subsort_pairs(&["a", "b"]) {
            let s_space = model.space(&s).unwrap();
            let t_space = model.space(&t).unwrap();
            let (s_dom, t_dom, rho) = restriction_map_between(&model, &s_space, &t_space).unwrap();
            assert!(check_incremental_domain(&s_dom.poset).passed());
            assert!(check_incremental_domain(&t_dom.poset).passed());
            let verdict = check_incremental_morphism(&rho).unwrap();
            assert!(verdict.passed(), "{kind:?} {s:?} → {t:?}: {verdict:?}");
        }
    }
}

#[test]
fn restriction_maps_on_raw_channels_are_incremental() {
    let conflict = Arc::new(
        EventStructure::validate(vec!["a".into(), "b".into()], [], [BTreeSet::from([0, 1])])
            .unwrap(),
    );
    let chain =
        Arc::new(EventStructure::validate(vec!["x".into(), "y".into()], [(0, 1)], []).unwrap());
    for kind in [TraceKind::Linear, TraceKind::Pomset] {
        let model = ModelInstance::new(
            [
                ("c".to_string(), ChannelDecl::Raw(conflict.clone())),
                ("d".to_string(), ChannelDecl::Raw(chain.clone())),
            ],
            kind,
            Bounds::default(),
        )
        .unwrap();
        for (s, t) in subsort_pairs(&["c", "d"]) {
            let s_space = model.space(&s).unwrap();
            let t_space = model.space(&t).unwrap();
            let (_, _, rho) = restriction_map_between(&model, &s_space, &t_space).unwrap();
            assert!(check_incremental_morphism(&rho).unwrap().passed());
        }
    }
}

#[test]
fn model_axioms_hold_on_stream_and_raw_families() {
    let sorts = |chs: &[&str]| -> Vec<BTreeSet<String>> {
        let mut out = Vec::new();
        for mask in 0..(1usize << chs.len()) {
            out.push(
                chs.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, c)| c.to_string())
                    .collect(),
            );
        }
        out
    };
    for kind in [TraceKind::Linear, TraceKind::Pomset] {
        let model = stream_model(&[("a", "01", 2), ("b", "x", 1)], kind);
        let report = check_model_axioms(&model, &sorts(&["a", "b"])).unwrap();
        assert!(report.passed(), "{kind:?}: {:?}", report.first_failure());
    }
}

/// Linear traces over any small event structure are order-isomorphic to the
/// covering sequences of its configuration poset.
#[test]
fn linear_traces_are_covering_sequences() {
    use kahncheck::event_structure::ConfigPoset;
    use kahncheck::poset::{covering_sequence_poset, Elem};

    let structures: Vec<Arc<EventStructure>> = vec![
        Arc::new(EventStructure::validate(vec![], [], []).unwrap()),
        Arc::new(
            EventStructure::validate(vec!["a".into(), "b".into()], [], [BTreeSet::from([0, 1])])
                .unwrap(),
        ),
        Arc::new(EventStructure::validate(vec!["a".into(), "b".into()], [(0, 1)], []).unwrap()),
        Arc::new(
            EventStructure::validate(
                vec!["a".into(), "b".into(), "c".into()],
                [(0, 2)],
                [BTreeSet::from([1, 2])],
            )
            .unwrap(),
        ),
    ];
    for es in structures {
        let cp = ConfigPoset::enumerate(es.clone(), 1000).unwrap();
        let traces = enumerate_traces(&es, TraceKind::Linear, es.len(), 100_000).unwrap();
        let (cposet, seqs) = covering_sequence_poset(&cp.poset).unwrap();
        assert_eq!(traces.len(), seqs.len());

        // Forward map is a bijection onto the sequences.
        let mut images = BTreeSet::new();
        for t in &traces {
            let seq = linear_to_covseq(t, &cp).unwrap();
            assert!(images.insert(seq.clone()));
            // Mutually inverse.
            let back = covseq_to_linear(&seq, &cp).unwrap();
            assert_eq!(&back, t);
        }
        assert_eq!(images.len(), seqs.len());

        // Order-preserving in both directions (prefix order on sequences).
        for a in &traces {
            for b in &traces {
                let sa = linear_to_covseq(a, &cp).unwrap();
                let sb = linear_to_covseq(b, &cp).unwrap();
                let ia = cposet.index_of(&seq_label(&cp.poset, &sa)).unwrap();
                let ib = cposet.index_of(&seq_label(&cp.poset, &sb)).unwrap();
                assert_eq!(trace_leq(a, b), cposet.leq(ia, ib));
                let _ = Elem(0);
            }
        }
    }
}

fn seq_label(base: &kahncheck::FinitePointedPoset, seq: &kahncheck::CoveringSequence) -> String {
    seq.steps()
        .iter()
        .map(|&e| base.label(e))
        .collect::<Vec<_>>()
        .join(" < ")
}

/// Traces over stream products and labelled pomsets are mutually inverse
/// monotone bijections on a grid of small sorts.
#[test]
fn stream_traces_are_labelled_pomsets() {
    for (a1, d1, a2, d2) in [("0", 1, "01", 1), ("01", 2, "x", 1), ("01", 2, "01", 2)] {
        let model = stream_model(&[("p", a1, d1), ("q", a2, d2)], TraceKind::Pomset);
        let sort: BTreeSet<String> = ["p".to_string(), "q".to_string()].into();
        let space = model.space(&sort).unwrap();
        let alphabets: BTreeMap<String, (BTreeSet<char>, usize)> = [
            ("p".to_string(), (a1.chars().collect(), d1)),
            ("q".to_string(), (a2.chars().collect(), d2)),
        ]
        .into();
        let traces = enumerate_traces(
            &space.product.es,
            TraceKind::Pomset,
            space.product.es.len(),
            1_000_000,
        )
        .unwrap();
        let mut images = BTreeSet::new();
        for t in &traces {
            let p = pomset_of_trace(t, &space.product).unwrap();
            let back = trace_of_pomset(&p, &alphabets, &space.product).unwrap();
            assert_eq!(&back, t, "round trip at {}", t.display());
            images.insert(format!("{p:?}"));
        }
        assert_eq!(images.len(), traces.len(), "injective on compacts");
        for a in &traces {
            for b in &traces {
                let pa = pomset_of_trace(a, &space.product).unwrap();
                let pb = pomset_of_trace(b, &space.product).unwrap();
                assert_eq!(trace_leq(a, b), pa.leq(&pb));
            }
        }
    }
}

#[test]
fn incremental_morphism_failures_are_reported() {
    // A non-example: collapsing a two-step chain poset onto a shorter one
    // must fail the lifting clause somewhere.
    use kahncheck::poset::{FinitePointedPoset, MonotoneMap};
    let three = Arc::new(
        FinitePointedPoset::validate_labeled(
            &["0", "1", "2"],
            &[
                ("0", "0"),
                ("1", "1"),
                ("2", "2"),
                ("0", "1"),
                ("1", "2"),
                ("0", "2"),
            ],
        )
        .unwrap(),
    );
    // Map the chain 0<1<2 onto 0<2 of itself: 0,1 ↦ 0 and 2 ↦ 2. The image
    // poset step 0≺... is fine, but covers below f(2)=2 include (0,1),(1,2)
    // and (0,1) has no preimage cover mapping onto it.
    let table = vec![
        three.index_of("0").unwrap(),
        three.index_of("0").unwrap(),
        three.index_of("2").unwrap(),
    ];
    let f = MonotoneMap::new(three.clone(), three.clone(), table).unwrap();
    let verdict = check_incremental_morphism(&f).unwrap();
    assert!(matches!(verdict, Verdict::Fail { .. }));
}
