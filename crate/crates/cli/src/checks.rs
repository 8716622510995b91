//! Check drivers: each selected check id runs against the loaded document
//! and contributes one report entry with a verdict, details, warnings and a
//! replayable counterexample on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use kahncheck::event_structure::config_poset;
use kahncheck::model::{
    check_model_axioms, restriction_map_between, sort_name, ChannelKind, ModelError, SortSpace,
};
use kahncheck::network::{
    build_kahn, check_causally_expressive, computes_check, gkp_check,
    global_characterization_check, node_contexts, prefix_bound_check, process_computing, GkpReport,
    GkpWitness, KahnSemantics, NetworkError, NodeCtx, Process, SpaceCache,
};
use kahncheck::poset::{
    check_incremental_domain, check_incremental_morphism, covering_sequence_poset, jung_chain,
    lfp_iterate, PosetError,
};
use kahncheck::stream::check_stream_iso;
use kahncheck::trace::{
    enumerate_traces, linear_to_covseq, pomset_of_trace, trace_leq, trace_of_pomset, Trace,
    TraceError, TraceKind,
};
use kahncheck::verdict::Verdict;

use crate::document::{Loaded, TraceDoc};
use crate::report::{CheckEntry, CheckReport, InputInfo, ToolInfo, REPORT_FORMAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckId {
    Axioms,
    Incremental,
    StreamIso,
    PomsetIso,
    CovseqIso,
    Computes,
    Gkp,
    Safety,
    Liveness,
    Expressive,
    Jung,
    Lemma1,
    GlobalChar,
}

impl CheckId {
    pub const ALL: [CheckId; 13] = [
        CheckId::Axioms,
        CheckId::Incremental,
        CheckId::StreamIso,
        CheckId::PomsetIso,
        CheckId::CovseqIso,
        CheckId::Computes,
        CheckId::Gkp,
        CheckId::Safety,
        CheckId::Liveness,
        CheckId::Expressive,
        CheckId::Jung,
        CheckId::Lemma1,
        CheckId::GlobalChar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Axioms => "axioms",
            CheckId::Incremental => "incremental",
            CheckId::StreamIso => "stream-iso",
            CheckId::PomsetIso => "pomset-iso",
            CheckId::CovseqIso => "covseq-iso",
            CheckId::Computes => "computes",
            CheckId::Gkp => "gkp",
            CheckId::Safety => "safety",
            CheckId::Liveness => "liveness",
            CheckId::Expressive => "expressive",
            CheckId::Jung => "jung",
            CheckId::Lemma1 => "lemma1",
            CheckId::GlobalChar => "global-char",
        }
    }

    pub fn parse(s: &str) -> Result<CheckId, String> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown check {s:?}; available: {}",
                    CheckId::ALL
                        .iter()
                        .map(|c| c.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
    }

    pub fn parse_list(s: &str) -> Result<Vec<CheckId>, String> {
        s.split(',')
            .map(|part| CheckId::parse(part.trim()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub sample: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            sample: 200,
            seed: 0,
        }
    }
}

struct Outcome {
    verdict: &'static str,
    details: String,
    warnings: Vec<String>,
    counterexample: Option<serde_json::Value>,
}

impl Outcome {
    fn pass(details: impl Into<String>) -> Outcome {
        Outcome {
            verdict: "pass",
            details: details.into(),
            warnings: Vec::new(),
            counterexample: None,
        }
    }

    fn fail(details: impl Into<String>, counterexample: Option<serde_json::Value>) -> Outcome {
        Outcome {
            verdict: "fail",
            details: details.into(),
            warnings: Vec::new(),
            counterexample,
        }
    }

    fn vacuous(details: impl Into<String>) -> Outcome {
        Outcome {
            verdict: "vacuous",
            details: details.into(),
            warnings: Vec::new(),
            counterexample: None,
        }
    }

    fn warn(mut self, w: impl Into<String>) -> Outcome {
        self.warnings.push(w.into());
        self
    }
}

/// A bound was hit: the check cannot run exhaustively and reports vacuous.
fn bound_outcome(context: &str, err: &NetworkError) -> Outcome {
    Outcome::vacuous(format!("skipped: {context}")).warn(format!("bound reached: {err}"))
}

fn is_bound_error(err: &NetworkError) -> bool {
    matches!(
        err,
        NetworkError::TooManySelections(_)
            | NetworkError::TooManyChains(_)
            | NetworkError::Trace(TraceError::TraceBudgetExceeded(_))
            | NetworkError::Trace(TraceError::BoundExceeded { .. })
            | NetworkError::Model(ModelError::Es(
                kahncheck::event_structure::EsError::TooManyConfigs(_, _)
            ))
            | NetworkError::Poset(PosetError::BudgetExceeded(_))
    )
}

fn value_json(space: &SortSpace, idx: usize) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = space
        .values
        .per_channel_display(idx)
        .into_iter()
        .map(|(ch, v)| (ch, serde_json::Value::String(v)))
        .collect();
    serde_json::Value::Object(map)
}

fn trace_json(t: &Trace) -> serde_json::Value {
    serde_json::to_value(TraceDoc::of_trace(t)).expect("trace serializes")
}

pub struct Runner<'a> {
    loaded: &'a Loaded,
    cache: SpaceCache<'a>,
    opts: CheckOptions,
    feasible: Option<(Vec<BTreeSet<String>>, Vec<String>)>,
    gkp: Option<Result<GkpReport, NetworkError>>,
    kahn: Option<Result<KahnSemantics, NetworkError>>,
    contexts: Option<Result<Vec<NodeCtx>, NetworkError>>,
}

impl<'a> Runner<'a> {
    pub fn new(loaded: &'a Loaded, opts: CheckOptions) -> Runner<'a> {
        Runner {
            loaded,
            cache: SpaceCache::new(&loaded.model),
            opts,
            feasible: None,
            gkp: None,
            kahn: None,
            contexts: None,
        }
    }

    /// Sorts whose trace domains can be materialized within bounds, plus a
    /// warning for anything skipped.
    fn feasible_sorts(&mut self) -> (Vec<BTreeSet<String>>, Vec<String>) {
        if let Some(v) = &self.feasible {
            return v.clone();
        }
        let model = &self.loaded.model;
        let full: Vec<String> = self.loaded.network.full_sort().into_iter().collect();
        let mut candidates: Vec<BTreeSet<String>> = Vec::new();
        if full.len() <= 6 {
            for mask in 0..(1usize << full.len()) {
                candidates.push(
                    full.iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, c)| c.clone())
                        .collect(),
                );
            }
        } else {
            candidates.push(BTreeSet::new());
            for c in &full {
                candidates.push([c.clone()].into());
            }
            candidates.push(full.iter().cloned().collect());
        }
        let mut kept = Vec::new();
        let mut skipped = Vec::new();
        for sort in candidates {
            let events: usize = sort.iter().map(|c| model.channels[c].es.len()).sum();
            if events > model.bounds.max_events_per_sort {
                skipped.push(sort_name(&sort.iter().cloned().collect::<Vec<_>>()));
                continue;
            }
            match self.cache.get(&sort) {
                Ok(space) => match model.trace_domain(&space) {
                    Ok(_) => kept.push(sort),
                    Err(_) => skipped.push(sort_name(&sort.iter().cloned().collect::<Vec<_>>())),
                },
                Err(_) => skipped.push(sort_name(&sort.iter().cloned().collect::<Vec<_>>())),
            }
        }
        let warnings = if skipped.is_empty() {
            Vec::new()
        } else {
            vec![format!(
                "sorts beyond enumeration bounds skipped: {}",
                skipped.join(", ")
            )]
        };
        let out = (kept, warnings);
        self.feasible = Some(out.clone());
        out
    }

    fn contexts(&mut self) -> Result<Vec<NodeCtx>, NetworkError> {
        if self.contexts.is_none() {
            let r = node_contexts(&self.loaded.network, &mut self.cache);
            self.contexts = Some(r);
        }
        self.contexts.as_ref().unwrap().clone()
    }

    fn gkp_report(&mut self) -> &Result<GkpReport, NetworkError> {
        if self.gkp.is_none() {
            let r = gkp_check(&self.loaded.network, &self.loaded.model, &mut self.cache);
            self.gkp = Some(r);
        }
        self.gkp.as_ref().unwrap()
    }

    fn kahn_semantics(&mut self) -> Result<KahnSemantics, NetworkError> {
        if let Some(Ok(report)) = &self.gkp {
            return Ok(report.kahn.clone());
        }
        if self.kahn.is_none() {
            let r = (|| {
                let space = self.cache.get(&self.loaded.network.full_sort())?;
                let ctxs = self.contexts()?;
                build_kahn(&self.loaded.network, &space, &ctxs)
            })();
            self.kahn = Some(r);
        }
        self.kahn.as_ref().unwrap().clone()
    }

    fn run(&mut self, id: CheckId) -> Outcome {
        match id {
            CheckId::Axioms => self.run_axioms(),
            CheckId::Incremental => self.run_incremental(),
            CheckId::StreamIso => self.run_stream_iso(),
            CheckId::PomsetIso => self.run_pomset_iso(),
            CheckId::CovseqIso => self.run_covseq_iso(),
            CheckId::Computes => self.run_computes(),
            CheckId::Gkp => self.run_gkp(),
            CheckId::Safety => self.run_safety(),
            CheckId::Liveness => self.run_liveness(),
            CheckId::Expressive => self.run_expressive(),
            CheckId::Jung => self.run_jung(),
            CheckId::Lemma1 => self.run_lemma1(),
            CheckId::GlobalChar => self.run_global_char(),
        }
    }

    fn run_axioms(&mut self) -> Outcome {
        let (sorts, warnings) = self.feasible_sorts();
        if sorts.is_empty() {
            return Outcome::vacuous("no sorts within bounds")
                .warn(warnings.first().cloned().unwrap_or_default());
        }
        match check_model_axioms(&self.loaded.model, &sorts) {
            Err(e) => Outcome::fail(format!("axiom check aborted: {e}"), None),
            Ok(report) => match report.first_failure() {
                None => {
                    let mut o = Outcome::pass(format!(
                        "{} laws verified across {} sorts",
                        report.laws.len(),
                        sorts.len()
                    ));
                    o.warnings = warnings;
                    o
                }
                Some((law, verdict)) => {
                    let witness = match verdict {
                        Verdict::Fail { witness } => witness.clone(),
                        _ => String::new(),
                    };
                    Outcome::fail(
                        format!("law {law} fails"),
                        Some(json!({ "law": law, "witness": witness })),
                    )
                }
            },
        }
    }

    fn run_incremental(&mut self) -> Outcome {
        let (sorts, warnings) = self.feasible_sorts();
        let mut pairs = 0usize;
        for s in &sorts {
            for t in &sorts {
                if !t.is_subset(s) {
                    continue;
                }
                let s_space = match self.cache.get(s) {
                    Ok(x) => x,
                    Err(e) => return Outcome::fail(format!("space failed: {e}"), None),
                };
                let t_space = match self.cache.get(t) {
                    Ok(x) => x,
                    Err(e) => return Outcome::fail(format!("space failed: {e}"), None),
                };
                let (s_dom, t_dom, rho) =
                    match restriction_map_between(&self.loaded.model, &s_space, &t_space) {
                        Ok(x) => x,
                        Err(e) => return Outcome::fail(format!("restriction failed: {e}"), None),
                    };
                if let Verdict::Fail { witness } = check_incremental_domain(&s_dom.poset) {
                    return Outcome::fail(
                        "trace domain is not incremental",
                        Some(json!({
                            "sort": sort_name(&s_space.sort),
                            "gap": [s_dom.poset.label(witness.0), s_dom.poset.label(witness.1)],
                        })),
                    );
                }
                match check_incremental_morphism(&rho) {
                    Err(e) => return Outcome::fail(format!("morphism check aborted: {e}"), None),
                    Ok(Verdict::Fail { witness }) => {
                        return Outcome::fail(
                            format!(
                                "restriction {}→{} is not an incremental morphism",
                                sort_name(&s_space.sort),
                                sort_name(&t_space.sort)
                            ),
                            Some(json!({ "witness": format!("{witness:?}") })),
                        )
                    }
                    Ok(_) => {}
                }
                let _ = &t_dom;
                pairs += 1;
            }
        }
        let mut o = Outcome::pass(format!("{pairs} restriction maps lift and preserve covers"));
        o.warnings = warnings;
        o
    }

    fn run_stream_iso(&mut self) -> Outcome {
        let model = &self.loaded.model;
        let mut checked = 0usize;
        for (name, cm) in &model.channels {
            if let ChannelKind::Stream(sc) = &cm.kind {
                match check_stream_iso(sc, model.bounds.max_values_per_sort) {
                    Err(e) => return Outcome::fail(format!("channel {name}: {e}"), None),
                    Ok(Verdict::Fail { witness }) => {
                        return Outcome::fail(
                            format!("channel {name}: configurations ≇ words"),
                            Some(json!({ "channel": name, "witness": witness })),
                        )
                    }
                    Ok(_) => checked += 1,
                }
            }
        }
        if checked == 0 {
            Outcome::vacuous("no stream channels")
        } else {
            Outcome::pass(format!(
                "{checked} stream channels isomorphic to their configuration domains"
            ))
        }
    }

    fn alphabets(&self) -> BTreeMap<String, (BTreeSet<char>, usize)> {
        self.loaded
            .model
            .channels
            .iter()
            .filter_map(|(name, cm)| match &cm.kind {
                ChannelKind::Stream(sc) => Some((
                    name.clone(),
                    (sc.alphabet.iter().copied().collect(), sc.depth),
                )),
                ChannelKind::Raw => None,
            })
            .collect()
    }

    fn run_pomset_iso(&mut self) -> Outcome {
        let (sorts, warnings) = self.feasible_sorts();
        let alphabets = self.alphabets();
        let model = &self.loaded.model;
        let mut traces_checked = 0usize;
        let mut sorts_checked = 0usize;
        for sort in &sorts {
            if !sort.iter().all(|c| alphabets.contains_key(c)) {
                continue;
            }
            let space = match self.cache.get(sort) {
                Ok(x) => x,
                Err(e) => return Outcome::fail(format!("space failed: {e}"), None),
            };
            let traces = match enumerate_traces(
                &space.product.es,
                TraceKind::Pomset,
                space.product.es.len(),
                model.bounds.max_domain_traces,
            ) {
                Ok(x) => x,
                Err(e) => return bound_outcome("pomset enumeration", &e.into()),
            };
            let mut images = BTreeSet::new();
            for t in &traces {
                let p = match pomset_of_trace(t, &space.product) {
                    Ok(p) => p,
                    Err(e) => return Outcome::fail(format!("{e}"), Some(trace_json(t))),
                };
                let back = match trace_of_pomset(&p, &alphabets, &space.product) {
                    Ok(b) => b,
                    Err(e) => return Outcome::fail(format!("{e}"), Some(trace_json(t))),
                };
                if &back != t {
                    return Outcome::fail("round trip differs", Some(trace_json(t)));
                }
                images.insert(format!("{p:?}"));
            }
            if images.len() != traces.len() {
                return Outcome::fail(
                    format!("pomset map not injective on {}", sort_name(&space.sort)),
                    None,
                );
            }
            for a in &traces {
                for b in &traces {
                    let pa = pomset_of_trace(a, &space.product).expect("checked above");
                    let pb = pomset_of_trace(b, &space.product).expect("checked above");
                    if trace_leq(a, b) != pa.leq(&pb) {
                        return Outcome::fail(
                            "pomset order disagrees with trace order",
                            Some(json!({ "a": trace_json(a), "b": trace_json(b) })),
                        );
                    }
                }
            }
            traces_checked += traces.len();
            sorts_checked += 1;
        }
        if sorts_checked == 0 {
            return Outcome::vacuous("no all-stream sorts within bounds");
        }
        let mut o = Outcome::pass(format!(
            "{traces_checked} traces across {sorts_checked} sorts in monotone bijection with pomsets"
        ));
        o.warnings = warnings;
        o
    }

    fn run_covseq_iso(&mut self) -> Outcome {
        let (sorts, warnings) = self.feasible_sorts();
        let model = &self.loaded.model;
        let mut traces_checked = 0usize;
        for sort in &sorts {
            let space = match self.cache.get(sort) {
                Ok(x) => x,
                Err(e) => return Outcome::fail(format!("space failed: {e}"), None),
            };
            let lin = match enumerate_traces(
                &space.product.es,
                TraceKind::Linear,
                space.product.es.len(),
                model.bounds.max_domain_traces,
            ) {
                Ok(x) => x,
                Err(e) => return bound_outcome("linear enumeration", &e.into()),
            };
            let cp = match config_poset(&space.product.es, model.bounds.max_values_per_sort) {
                Ok(x) => x,
                Err(e) => {
                    return bound_outcome("configuration poset", &NetworkError::Model(e.into()))
                }
            };
            let (_, seqs) = match covering_sequence_poset(&cp.poset) {
                Ok(x) => x,
                Err(e) => return bound_outcome("covering sequences", &e.into()),
            };
            if lin.len() != seqs.len() {
                return Outcome::fail(
                    format!(
                        "{} linear traces vs {} covering sequences on {}",
                        lin.len(),
                        seqs.len(),
                        sort_name(&space.sort)
                    ),
                    None,
                );
            }
            let mut images = BTreeSet::new();
            for t in &lin {
                let seq = match linear_to_covseq(t, &cp) {
                    Ok(s) => s,
                    Err(e) => return Outcome::fail(format!("{e}"), Some(trace_json(t))),
                };
                match kahncheck::trace::covseq_to_linear(&seq, &cp) {
                    Ok(back) if &back == t => {}
                    _ => return Outcome::fail("round trip differs", Some(trace_json(t))),
                }
                images.insert(seq.steps().to_vec());
            }
            if images.len() != lin.len() {
                return Outcome::fail("sequence map not injective", None);
            }
            for a in &lin {
                for b in &lin {
                    let sa = linear_to_covseq(a, &cp).expect("checked");
                    let sb = linear_to_covseq(b, &cp).expect("checked");
                    if trace_leq(a, b) != sa.is_prefix_of(&sb) {
                        return Outcome::fail(
                            "prefix order disagrees with trace order",
                            Some(json!({ "a": trace_json(a), "b": trace_json(b) })),
                        );
                    }
                }
            }
            traces_checked += lin.len();
        }
        let mut o = Outcome::pass(format!(
            "{traces_checked} linear traces across {} sorts isomorphic to covering sequences",
            sorts.len()
        ));
        o.warnings = warnings;
        o
    }

    fn run_computes(&mut self) -> Outcome {
        let ctxs = match self.contexts() {
            Ok(x) => x,
            Err(e) if is_bound_error(&e) => return bound_outcome("node spaces", &e),
            Err(e) => return Outcome::fail(format!("{e}"), None),
        };
        let model = &self.loaded.model;
        let mut details = Vec::new();
        let mut warnings = Vec::new();
        for (node, ctx) in self.loaded.network.nodes.iter().zip(&ctxs) {
            let p = match process_computing(model, node, ctx) {
                Ok(p) => p,
                Err(e) if is_bound_error(&e) => return bound_outcome("process enumeration", &e),
                Err(e) => return Outcome::fail(format!("{e}"), None),
            };
            if p.is_empty() {
                warnings.push(format!("node {} computes the empty process", node.name));
            }
            if let Some(claim_docs) = self.loaded.claims.get(&node.name) {
                let mut claimed = Vec::new();
                for td in claim_docs {
                    match td.resolve(&ctx.space) {
                        Ok(t) => claimed.push(t),
                        Err(e) => {
                            return Outcome::fail(
                                format!("node {}: {e}", node.name),
                                Some(serde_json::to_value(td).expect("serializes")),
                            )
                        }
                    }
                }
                let claimed = Process::new(ctx.space.sort.clone(), claimed);
                match computes_check(model, node, ctx, &claimed) {
                    Err(e) => return Outcome::fail(format!("{e}"), None),
                    Ok(Verdict::Fail { witness }) => {
                        return Outcome::fail(
                            format!(
                                "node {}: claimed process differs from the computed one",
                                node.name
                            ),
                            Some(trace_json(&witness)),
                        )
                    }
                    Ok(_) => details.push(format!(
                        "{}: {} traces (claim verified)",
                        node.name,
                        p.len()
                    )),
                }
            } else {
                // Independent re-check of every member through the down-set
                // evaluator.
                for t in &p.traces {
                    if kahncheck::network::membership_witnesses(model, node, ctx, t) == 0 {
                        return Outcome::fail(
                            format!("node {}: member fails independent re-check", node.name),
                            Some(trace_json(t)),
                        );
                    }
                }
                details.push(format!("{}: {} traces", node.name, p.len()));
            }
        }
        let mut o = Outcome::pass(details.join("; "));
        o.warnings = warnings;
        o
    }

    fn gkp_sets(&mut self) -> Result<(Arc<SortSpace>, GkpReport), Outcome> {
        let full = self.loaded.network.full_sort();
        let space = match self.cache.get(&full) {
            Ok(s) => s,
            Err(e) => {
                let err = NetworkError::Model(e);
                return Err(if is_bound_error(&err) {
                    bound_outcome("full-sort value poset", &err)
                } else {
                    Outcome::fail(format!("{err}"), None)
                });
            }
        };
        match self.gkp_report() {
            Ok(r) => Ok((space, r.clone())),
            Err(e) => Err(if is_bound_error(e) {
                bound_outcome("network semantics", e)
            } else {
                Outcome::fail(format!("{e}"), None)
            }),
        }
    }

    fn saturation_warnings(space: &SortSpace, report: &GkpReport) -> Vec<String> {
        if report.saturated_fixpoints.is_empty() {
            return Vec::new();
        }
        let names: Vec<&str> = report
            .saturated_fixpoints
            .iter()
            .take(8)
            .map(|&v| space.value_label(v))
            .collect();
        vec![format!(
            "saturated fixpoints touch the depth bound ({}{}): the truncated statement is checked, not the unbounded one",
            names.join(", "),
            if report.saturated_fixpoints.len() > 8 { ", …" } else { "" }
        )]
    }

    fn describe_value_set(space: &SortSpace, set: &BTreeSet<usize>) -> String {
        if set.len() <= 6 {
            let names: Vec<&str> = set.iter().map(|&v| space.value_label(v)).collect();
            format!("{{{}}}", names.join(", "))
        } else {
            format!("{} values", set.len())
        }
    }

    fn run_gkp(&mut self) -> Outcome {
        let (space, report) = match self.gkp_sets() {
            Ok(x) => x,
            Err(o) => return o,
        };
        let mut o = if report.passed() {
            Outcome::pass(format!(
                "behaviour values = fixpoint values = {}",
                Self::describe_value_set(&space, &report.value_set)
            ))
        } else {
            self.inclusion_failure(&space, &report)
        };
        o.warnings
            .extend(Self::saturation_warnings(&space, &report));
        o
    }

    fn inclusion_failure(&self, space: &SortSpace, report: &GkpReport) -> Outcome {
        let witness = report
            .safety
            .witness()
            .or(report.liveness.witness())
            .expect("failed report has a witness");
        match witness {
            GkpWitness::UnspecifiedValue { value, trace } => Outcome::fail(
                format!(
                    "behaviour realizes {} which is no fixpoint",
                    space.value_label(*value)
                ),
                Some(json!({
                    "kind": "unspecified-value",
                    "value": value_json(space, *value),
                    "trace": trace_json(trace),
                })),
            ),
            GkpWitness::UnrealizedFixpoint { value, selection } => Outcome::fail(
                format!(
                    "fixpoint {} realized by no behaviour",
                    space.value_label(*value)
                ),
                Some(json!({
                    "kind": "unrealized-fixpoint",
                    "value": value_json(space, *value),
                    "selection": report.kahn.describe_selection(&self.loaded.network, *selection),
                })),
            ),
        }
    }

    fn run_safety(&mut self) -> Outcome {
        let (space, report) = match self.gkp_sets() {
            Ok(x) => x,
            Err(o) => return o,
        };
        let mut o = match &report.safety {
            Verdict::Fail { .. } => self.inclusion_failure(&space, &report),
            _ => Outcome::pass(format!(
                "every behaviour value is a fixpoint ({} values)",
                report.value_set.len()
            )),
        };
        o.warnings
            .extend(Self::saturation_warnings(&space, &report));
        o
    }

    fn run_liveness(&mut self) -> Outcome {
        let (space, report) = match self.gkp_sets() {
            Ok(x) => x,
            Err(o) => return o,
        };
        let mut o = match &report.liveness {
            Verdict::Fail { .. } => self.inclusion_failure(&space, &report),
            _ => Outcome::pass(format!(
                "every fixpoint is realized ({} fixpoints)",
                report.kahn.fixpoint_set.len()
            )),
        };
        o.warnings
            .extend(Self::saturation_warnings(&space, &report));
        o
    }

    fn run_expressive(&mut self) -> Outcome {
        let (sorts, mut warnings) = self.feasible_sorts();
        let mut checked = 0usize;
        for sort in &sorts {
            let space = match self.cache.get(sort) {
                Ok(x) => x,
                Err(e) => return Outcome::fail(format!("space failed: {e}"), None),
            };
            if space.values.len() > 2048 {
                warnings.push(format!(
                    "sort {} skipped: {} values exceed the causal-chain budget",
                    sort_name(&space.sort),
                    space.values.len()
                ));
                continue;
            }
            match check_causally_expressive(&space, self.opts.sample, self.opts.seed) {
                Err(e) if is_bound_error(&e) => {
                    warnings.push(format!("sort {} skipped: {e}", sort_name(&space.sort)));
                }
                Err(e) => return Outcome::fail(format!("{e}"), None),
                Ok(Verdict::Fail { witness }) => {
                    return Outcome::fail(
                        format!("sort {} is not causally expressive", sort_name(&space.sort)),
                        Some(json!({ "witness": witness })),
                    )
                }
                Ok(_) => checked += 1,
            }
        }
        if checked == 0 {
            return Outcome::vacuous("no sorts within causal-chain bounds");
        }
        let mut o = Outcome::pass(format!(
            "causal witnesses found for all chains on {checked} sorts (sample {}, seed {})",
            self.opts.sample, self.opts.seed
        ));
        o.warnings = warnings;
        o
    }

    fn run_jung(&mut self) -> Outcome {
        let kahn = match self.kahn_semantics() {
            Ok(k) => k,
            Err(e) if is_bound_error(&e) => return bound_outcome("selection endomaps", &e),
            Err(e) => return Outcome::fail(format!("{e}"), None),
        };
        for (s, g) in kahn.endomaps.iter().enumerate() {
            let chain = match jung_chain(g) {
                Ok(c) => c,
                Err(e) => return Outcome::fail(format!("{e}"), None),
            };
            let p = g.domain();
            let ok = chain.links()[0] == p.bottom()
                && chain.links().windows(2).all(|w| p.leq(w[1], g.apply(w[0])))
                && chain.last() == lfp_iterate(g).expect("endomap");
            if !ok {
                return Outcome::fail(
                    format!(
                        "approximation chain conditions fail for selection {}",
                        kahn.describe_selection(&self.loaded.network, s)
                    ),
                    None,
                );
            }
        }
        Outcome::pass(format!(
            "approximation chains verified for {} selections",
            kahn.endomaps.len()
        ))
    }

    fn run_lemma1(&mut self) -> Outcome {
        let ctxs = match self.contexts() {
            Ok(x) => x,
            Err(e) if is_bound_error(&e) => return bound_outcome("node spaces", &e),
            Err(e) => return Outcome::fail(format!("{e}"), None),
        };
        let model = &self.loaded.model;
        let mut total = 0usize;
        for (node, ctx) in self.loaded.network.nodes.iter().zip(&ctxs) {
            let p = match process_computing(model, node, ctx) {
                Ok(p) => p,
                Err(e) if is_bound_error(&e) => return bound_outcome("process enumeration", &e),
                Err(e) => return Outcome::fail(format!("{e}"), None),
            };
            match prefix_bound_check(model, node, ctx, &p) {
                Verdict::Fail { witness } => {
                    return Outcome::fail(
                        format!("node {}: prefix bound violated", node.name),
                        Some(json!({ "witness": witness })),
                    )
                }
                _ => total += p.len(),
            }
        }
        Outcome::pass(format!(
            "prefix bound holds along all {} computing traces",
            total
        ))
    }

    fn run_global_char(&mut self) -> Outcome {
        let (_, report) = match self.gkp_sets() {
            Ok(x) => x,
            Err(o) => return o,
        };
        match global_characterization_check(
            &self.loaded.network,
            &self.loaded.model,
            &mut self.cache,
            &report,
        ) {
            Err(e) if is_bound_error(&e) => bound_outcome("trace enumeration", &e),
            Err(e) => Outcome::fail(format!("{e}"), None),
            Ok(Verdict::Fail { witness }) => Outcome::fail(
                "membership disagrees with the value-level characterization",
                Some(trace_json(&witness)),
            ),
            Ok(_) => Outcome::pass(
                "membership coincides with the value-level characterization".to_string(),
            ),
        }
    }
}

/// Run the selected checks in declared order and assemble the report.
pub fn run_checks(
    loaded: &Loaded,
    selection: &[CheckId],
    opts: CheckOptions,
    input: InputInfo,
) -> CheckReport {
    let mut runner = Runner::new(loaded, opts);
    let mut entries = Vec::new();
    for &id in selection {
        let start = Instant::now();
        let outcome = runner.run(id);
        entries.push(CheckEntry {
            id: id.name().to_string(),
            verdict: outcome.verdict.to_string(),
            details: outcome.details,
            warnings: outcome.warnings,
            counterexample: outcome.counterexample,
            timing_ms: start.elapsed().as_millis() as u64,
        });
    }
    let overall = if entries.iter().all(|e| e.verdict != "fail") {
        "pass"
    } else {
        "fail"
    };
    CheckReport {
        format: REPORT_FORMAT.to_string(),
        tool: ToolInfo {
            name: "kahncheck".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        input,
        document: loaded.doc.name.clone(),
        model: loaded.doc.model.as_str().to_string(),
        checks: entries,
        overall: overall.to_string(),
    }
}
