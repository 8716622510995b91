//! Processes, non-deterministic functional networks, and the generalized
//! Kahn principle checker.
//!
//! A process is a sorted set of traces. A node computes a set of functions F
//! when membership of a trace is equivalent to: some f ∈ F matches the
//! trace's overall input/output values, and every atomic step of the trace
//! emits no more output than f justifies from the input available before the
//! step. Network composition intersects restrictions; the Kahn semantics
//! takes least fixpoints of the per-selection channel endomaps; the checker
//! compares the two value sets exactly, reporting safety (every behaviour is
//! a specified value) and liveness (every specified value is realized)
//! separately, with replayable witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bitrel::BitRel;
use crate::event_structure::Config;
use crate::model::{ModelError, ModelInstance, SortSpace};
use crate::poset::{
    chain_causality, covering_sequences_for, lfp_iterate, refine_chain, CompactChain, Elem,
    FinitePointedPoset, MonotoneMap, PosetError,
};
use crate::trace::{
    enumerate_traces, trace_leq, walk_linear_traces, LinearVisitor, Trace, TraceError, TraceKind,
};
use crate::verdict::Verdict;

pub const MAX_FUNCTIONS_PER_NODE: usize = 128;
pub const MAX_SELECTIONS: usize = 100_000;
pub const MAX_CAUSAL_CHAINS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("channel {channel} has {count} producers, expected exactly one")]
    ProducerConditionViolated { channel: String, count: usize },
    #[error("duplicate node name {0:?}")]
    DuplicateNode(String),
    #[error("node {0} has an empty function set")]
    EmptyFunctionSet(String),
    #[error("node {0} has {1} functions, limit is {MAX_FUNCTIONS_PER_NODE}")]
    TooManyFunctions(String, usize),
    #[error("{0} function selections exceed the limit of {MAX_SELECTIONS}")]
    TooManySelections(usize),
    #[error("causal chain enumeration exceeded {0}")]
    TooManyChains(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// One node of a network: an input/output channel split and a finite,
/// non-empty set of monotone functions from input values to output values.
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub name: String,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub functions: Vec<MonotoneMap>,
    pub function_names: Vec<String>,
}

impl NodeSpec {
    pub fn sort(&self) -> BTreeSet<String> {
        self.inputs.union(&self.outputs).cloned().collect()
    }
}

/// A family of nodes subject to the single-producer condition: every channel
/// anywhere in the network is the output of exactly one node, so input
/// channels are fed by explicit (possibly set-valued) constant nodes.
#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<NodeSpec>,
}

impl Network {
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Network, NetworkError> {
        let mut names = BTreeSet::new();
        for node in &nodes {
            if !names.insert(node.name.clone()) {
                return Err(NetworkError::DuplicateNode(node.name.clone()));
            }
            if node.functions.is_empty() {
                return Err(NetworkError::EmptyFunctionSet(node.name.clone()));
            }
            if node.functions.len() > MAX_FUNCTIONS_PER_NODE {
                return Err(NetworkError::TooManyFunctions(
                    node.name.clone(),
                    node.functions.len(),
                ));
            }
        }
        let mut channels: BTreeSet<String> = BTreeSet::new();
        for node in &nodes {
            channels.extend(node.sort());
        }
        for ch in &channels {
            let count = nodes.iter().filter(|n| n.outputs.contains(ch)).count();
            if count != 1 {
                return Err(NetworkError::ProducerConditionViolated {
                    channel: ch.clone(),
                    count,
                });
            }
        }
        Ok(Network { nodes })
    }

    pub fn full_sort(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for n in &self.nodes {
            s.extend(n.sort());
        }
        s
    }

    pub fn producer_of(&self, channel: &str) -> usize {
        self.nodes
            .iter()
            .position(|n| n.outputs.contains(channel))
            .expect("producer condition was validated")
    }
}

/// Shared, pointer-identical sort spaces: traces restricted into a cached
/// space compare by pointer against process members, and every check on the
/// same sort sees the same enumeration.
pub struct SpaceCache<'m> {
    model: &'m ModelInstance,
    map: BTreeMap<Vec<String>, Arc<SortSpace>>,
}

impl<'m> SpaceCache<'m> {
    pub fn new(model: &'m ModelInstance) -> Self {
        SpaceCache {
            model,
            map: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &'m ModelInstance {
        self.model
    }

    pub fn get(&mut self, sort: &BTreeSet<String>) -> Result<Arc<SortSpace>, ModelError> {
        let key: Vec<String> = sort.iter().cloned().collect();
        if let Some(s) = self.map.get(&key) {
            return Ok(s.clone());
        }
        let space = Arc::new(self.model.space(sort)?);
        self.map.insert(key, space.clone());
        Ok(space)
    }
}

/// Per-node spaces: the node's own sort and its input/output subsorts.
#[derive(Clone)]
pub struct NodeCtx {
    pub space: Arc<SortSpace>,
    pub inputs: Arc<SortSpace>,
    pub outputs: Arc<SortSpace>,
}

pub fn node_contexts(
    network: &Network,
    cache: &mut SpaceCache<'_>,
) -> Result<Vec<NodeCtx>, NetworkError> {
    let mut out = Vec::with_capacity(network.nodes.len());
    for node in &network.nodes {
        let ctx = NodeCtx {
            space: cache.get(&node.sort())?,
            inputs: cache.get(&node.inputs)?,
            outputs: cache.get(&node.outputs)?,
        };
        for f in &node.functions {
            if f.domain().len() != ctx.inputs.values.len()
                || f.codomain().len() != ctx.outputs.values.len()
            {
                return Err(NetworkError::Model(ModelError::TypeMismatch(format!(
                    "node {}: function tabulated over the wrong value posets",
                    node.name
                ))));
            }
        }
        out.push(ctx);
    }
    Ok(out)
}

/// A process: a sort and a set of traces over it.
#[derive(Debug, Clone)]
pub struct Process {
    pub sort: Vec<String>,
    pub traces: Vec<Trace>,
    index: HashSet<Trace>,
}

impl Process {
    pub fn new(sort: Vec<String>, mut traces: Vec<Trace>) -> Process {
        traces.sort();
        traces.dedup();
        let index = traces.iter().cloned().collect();
        Process {
            sort,
            traces,
            index,
        }
    }

    pub fn contains(&self, t: &Trace) -> bool {
        self.index.contains(t)
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

/// Evaluates a node's functions against traces walked over `walk`: keeps the
/// running input/output value indices and the set of functions still
/// consistent with every atomic step seen so far.
struct NodeEval<'a> {
    vo_poset: &'a FinitePointedPoset,
    tables: Vec<&'a [Elem]>,
    /// Per walked-channel position: stride into the input value index.
    in_stride: Vec<Option<usize>>,
    /// Per walked-channel position: stride into the output value index.
    out_stride: Vec<Option<usize>>,
}

impl<'a> NodeEval<'a> {
    fn new(node: &'a NodeSpec, ctx: &'a NodeCtx, walk: &SortSpace) -> NodeEval<'a> {
        let mut in_stride = vec![None; walk.sort.len()];
        for (pos, ch) in ctx.inputs.sort.iter().enumerate() {
            let wp = walk.sort.iter().position(|c| c == ch).expect("subsort");
            in_stride[wp] = Some(ctx.inputs.values.stride(pos));
        }
        let mut out_stride = vec![None; walk.sort.len()];
        for (pos, ch) in ctx.outputs.sort.iter().enumerate() {
            let wp = walk.sort.iter().position(|c| c == ch).expect("subsort");
            out_stride[wp] = Some(ctx.outputs.values.stride(pos));
        }
        NodeEval {
            vo_poset: &ctx.outputs.values.poset,
            tables: node.functions.iter().map(|f| f.table()).collect(),
            in_stride,
            out_stride,
        }
    }

    fn full_mask(&self) -> u128 {
        if self.tables.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.tables.len()) - 1
        }
    }

    #[inline]
    fn vo_leq(&self, a: usize, b: usize) -> bool {
        self.vo_poset.leq(Elem(a), Elem(b))
    }

    /// Functions whose overall equation matches at (idx_i, idx_o).
    fn clause_one(&self, mask: u128, idx_i: usize, idx_o: usize) -> u128 {
        let mut out = 0u128;
        let mut m = mask;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.tables[k][idx_i].0 == idx_o {
                out |= 1 << k;
            }
        }
        out
    }

    /// Drop the functions violating the step bound: output after the step
    /// must stay below the function applied to the input before it.
    fn clause_two_step(&self, mask: u128, idx_i_before: usize, idx_o_after: usize) -> u128 {
        let mut out = mask;
        let mut m = mask;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            m &= m - 1;
            if !self.vo_leq(idx_o_after, self.tables[k][idx_i_before].0) {
                out &= !(1 << k);
            }
        }
        out
    }
}

struct ComputeWalker<'a> {
    space: &'a SortSpace,
    eval: NodeEval<'a>,
    coords: Vec<usize>,
    idx_i: usize,
    idx_o: usize,
    alive: u128,
    stack: Vec<(usize, usize, usize, usize, u128)>,
    out: Vec<Trace>,
}

impl LinearVisitor for ComputeWalker<'_> {
    fn push(&mut self, e: usize) {
        let c = self.space.product.channel_of[e];
        let old = self.coords[c];
        let next = self
            .space
            .extend_coord(c, old, self.space.product.base_of[e]);
        self.stack
            .push((c, old, self.idx_i, self.idx_o, self.alive));
        self.coords[c] = next;
        if let Some(s) = self.eval.in_stride[c] {
            self.idx_i += (next - old) * s;
        }
        if let Some(s) = self.eval.out_stride[c] {
            self.idx_o += (next - old) * s;
        }
        let before_i = self.stack.last().expect("pushed").2;
        self.alive = self.eval.clause_two_step(self.alive, before_i, self.idx_o);
    }

    fn pop(&mut self, _e: usize) {
        let (c, old, idx_i, idx_o, alive) = self.stack.pop().expect("balanced walk");
        self.coords[c] = old;
        self.idx_i = idx_i;
        self.idx_o = idx_o;
        self.alive = alive;
    }

    fn at_node(&mut self, seq: &[usize]) {
        if self.eval.clause_one(self.alive, self.idx_i, self.idx_o) != 0 {
            self.out
                .push(Trace::linear_unchecked(self.space.product.es.clone(), seq));
        }
    }

    fn prune(&self) -> bool {
        self.alive == 0
    }
}

/// Membership mask for one pomset trace: which functions witness it.
fn pomset_witnesses(t: &Trace, space: &SortSpace, eval: &NodeEval<'_>) -> u128 {
    let mut alive = eval.full_mask();
    let down_sets = t.order_down_sets();
    let mut values: HashMap<Vec<usize>, (usize, usize, Vec<usize>)> = HashMap::new();
    for d in &down_sets {
        let (idx_i, idx_o, coords) = indices_of_events(d, space, eval);
        values.insert(d.clone(), (idx_i, idx_o, coords));
    }
    for d in &down_sets {
        let (idx_i_before, _, coords) = &values[d];
        for &e in t.carrier() {
            if d.contains(&e) {
                continue;
            }
            let enabled = t.carrier().iter().all(|&f| !t.lt(f, e) || d.contains(&f));
            if !enabled {
                continue;
            }
            let c = space.product.channel_of[e];
            let next = space.extend_coord(c, coords[c], space.product.base_of[e]);
            let mut idx_o_after = values[d].1;
            if let Some(s) = eval.out_stride[c] {
                idx_o_after += (next - coords[c]) * s;
            }
            alive = eval.clause_two_step(alive, *idx_i_before, idx_o_after);
            if alive == 0 {
                return 0;
            }
        }
    }
    let full: Vec<usize> = t.carrier().to_vec();
    let (idx_i, idx_o, _) = &values[&full];
    eval.clause_one(alive, *idx_i, *idx_o)
}

fn indices_of_events(
    events: &[usize],
    space: &SortSpace,
    eval: &NodeEval<'_>,
) -> (usize, usize, Vec<usize>) {
    let mut per_channel: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); space.sort.len()];
    for &e in events {
        per_channel[space.product.channel_of[e]].insert(space.product.base_of[e]);
    }
    let mut idx_i = 0;
    let mut idx_o = 0;
    let mut coords = Vec::with_capacity(space.sort.len());
    for (c, events) in per_channel.into_iter().enumerate() {
        let coord = space.values.parts[c]
            .index_of(&Config(events))
            .expect("slices of configurations are configurations");
        coords.push(coord);
        if let Some(s) = eval.in_stride[c] {
            idx_i += coord * s;
        }
        if let Some(s) = eval.out_stride[c] {
            idx_o += coord * s;
        }
    }
    (idx_i, idx_o, coords)
}

/// The set of all traces over the node's sort that compute its function set:
/// clause one matches the overall values, clause two bounds every step.
pub fn process_computing(
    model: &ModelInstance,
    node: &NodeSpec,
    ctx: &NodeCtx,
) -> Result<Process, NetworkError> {
    let space = &ctx.space;
    let traces = match model.kind {
        TraceKind::Linear => {
            let eval = NodeEval::new(node, ctx, space);
            let alive = eval.full_mask();
            let mut walker = ComputeWalker {
                space,
                eval,
                coords: vec![0; space.sort.len()],
                idx_i: 0,
                idx_o: 0,
                alive,
                stack: Vec::new(),
                out: Vec::new(),
            };
            walk_linear_traces(
                &space.product.es,
                space.product.es.len(),
                model.bounds.max_enum_traces,
                &mut walker,
            )?;
            walker.out
        }
        TraceKind::Pomset => {
            let eval = NodeEval::new(node, ctx, space);
            let all = enumerate_traces(
                &space.product.es,
                TraceKind::Pomset,
                space.product.es.len(),
                model.bounds.max_enum_traces,
            )?;
            all.into_iter()
                .filter(|t| pomset_witnesses(t, space, &eval) != 0)
                .collect()
        }
    };
    Ok(Process::new(space.sort.clone(), traces))
}

/// Which functions witness membership of `t` in the node's process.
pub fn membership_witnesses(
    model: &ModelInstance,
    node: &NodeSpec,
    ctx: &NodeCtx,
    t: &Trace,
) -> u128 {
    let eval = NodeEval::new(node, ctx, &ctx.space);
    match model.kind {
        TraceKind::Pomset => pomset_witnesses(t, &ctx.space, &eval),
        TraceKind::Linear => {
            if !t.is_linear() {
                return 0;
            }
            pomset_witnesses(t, &ctx.space, &eval)
        }
    }
}

/// Compare a claimed process against the computed one.
pub fn computes_check(
    model: &ModelInstance,
    node: &NodeSpec,
    ctx: &NodeCtx,
    claimed: &Process,
) -> Result<Verdict<Trace>, NetworkError> {
    let actual = process_computing(model, node, ctx)?;
    for t in &claimed.traces {
        if !actual.contains(t) {
            return Ok(Verdict::Fail { witness: t.clone() });
        }
    }
    for t in &actual.traces {
        if !claimed.contains(t) {
            return Ok(Verdict::Fail { witness: t.clone() });
        }
    }
    Ok(Verdict::Pass)
}

/// Network composition: the traces over the union sort whose restriction to
/// every part lies in that part's process.
pub fn compose(
    model: &ModelInstance,
    space: &Arc<SortSpace>,
    parts: &[(&Process, &Arc<SortSpace>)],
) -> Result<Process, NetworkError> {
    let member = |t: &Trace| -> bool {
        parts.iter().all(|(p, sub)| {
            if sub.sort == space.sort {
                p.contains(t)
            } else {
                p.contains(&space.restrict(t, sub))
            }
        })
    };
    // When one part spans the whole sort, composition filters its process.
    if let Some((spanning, _)) = parts.iter().find(|(_, sub)| sub.sort == space.sort) {
        let traces: Vec<Trace> = spanning
            .traces
            .iter()
            .filter(|t| member(t))
            .cloned()
            .collect();
        return Ok(Process::new(space.sort.clone(), traces));
    }
    let all = enumerate_traces(
        &space.product.es,
        model.kind,
        space.product.es.len(),
        model.bounds.max_enum_traces,
    )?;
    let traces: Vec<Trace> = all.into_iter().filter(|t| member(t)).collect();
    Ok(Process::new(space.sort.clone(), traces))
}

/// The generalized Kahn semantics: one endomap per selection of one function
/// per node, each assembling exactly one component per channel, with its
/// least fixpoint.
#[derive(Debug, Clone)]
pub struct KahnSemantics {
    /// Function index per node, lexicographic in node order.
    pub selections: Vec<Vec<usize>>,
    pub endomaps: Vec<MonotoneMap>,
    pub fixpoints: Vec<usize>,
    pub fixpoint_set: BTreeSet<usize>,
}

impl KahnSemantics {
    pub fn describe_selection(&self, network: &Network, s: usize) -> String {
        self.selections[s]
            .iter()
            .zip(&network.nodes)
            .map(|(&fi, node)| format!("{}:{}", node.name, node.function_names[fi]))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn build_kahn(
    network: &Network,
    space: &Arc<SortSpace>,
    ctxs: &[NodeCtx],
) -> Result<KahnSemantics, NetworkError> {
    let mut count: usize = 1;
    for node in &network.nodes {
        count = count.saturating_mul(node.functions.len());
        if count > MAX_SELECTIONS {
            return Err(NetworkError::TooManySelections(count));
        }
    }
    let mut selections: Vec<Vec<usize>> = vec![Vec::new()];
    for node in &network.nodes {
        let mut next = Vec::with_capacity(selections.len() * node.functions.len());
        for sel in &selections {
            for fi in 0..node.functions.len() {
                let mut s = sel.clone();
                s.push(fi);
                next.push(s);
            }
        }
        selections = next;
    }

    // Per node: strides to read the node's input value off full coordinates.
    let in_proj: Vec<Vec<(usize, usize)>> = ctxs
        .iter()
        .map(|ctx| {
            ctx.inputs
                .sort
                .iter()
                .enumerate()
                .map(|(pos, ch)| {
                    let full = space.sort.iter().position(|c| c == ch).expect("subsort");
                    (full, ctx.inputs.values.stride(pos))
                })
                .collect()
        })
        .collect();
    // Per full channel: producing node and coordinate extraction from the
    // producer's output value.
    let per_channel: Vec<(usize, usize, usize)> = space
        .sort
        .iter()
        .map(|ch| {
            let j = network.producer_of(ch);
            let pos = ctxs[j]
                .outputs
                .sort
                .iter()
                .position(|c| c == ch)
                .expect("producer outputs the channel");
            let stride = ctxs[j].outputs.values.stride(pos);
            let len = ctxs[j].outputs.values.parts[pos].len();
            (j, stride, len)
        })
        .collect();

    let n_values = space.values.len();
    let mut endomaps = Vec::with_capacity(selections.len());
    let mut fixpoints = Vec::with_capacity(selections.len());
    for sel in &selections {
        let mut table = Vec::with_capacity(n_values);
        for v in 0..n_values {
            let coords = space.values.coords(v);
            let outs: Vec<usize> = network
                .nodes
                .iter()
                .enumerate()
                .map(|(j, node)| {
                    let idx_in: usize = in_proj[j]
                        .iter()
                        .map(|&(full, stride)| coords[full] * stride)
                        .sum();
                    node.functions[sel[j]].table()[idx_in].0
                })
                .collect();
            let mut g_coords = Vec::with_capacity(space.sort.len());
            for (full_pos, &(j, stride, len)) in per_channel.iter().enumerate() {
                let _ = full_pos;
                g_coords.push((outs[j] / stride) % len);
            }
            table.push(Elem(space.values.index(&g_coords)));
        }
        let g = MonotoneMap::new(
            space.values.poset.clone(),
            space.values.poset.clone(),
            table,
        )?;
        let fix = lfp_iterate(&g)?;
        endomaps.push(g);
        fixpoints.push(fix.0);
    }
    let fixpoint_set: BTreeSet<usize> = fixpoints.iter().copied().collect();
    Ok(KahnSemantics {
        selections,
        endomaps,
        fixpoints,
        fixpoint_set,
    })
}

#[derive(Debug, Clone)]
pub enum GkpWitness {
    /// A composed behaviour whose value is not any selection's fixpoint.
    UnspecifiedValue { value: usize, trace: Trace },
    /// A fixpoint value no composed behaviour realizes.
    UnrealizedFixpoint { value: usize, selection: usize },
}

/// Everything the principle check produces: the composed process, the Kahn
/// semantics, the two value sets and the two inclusion verdicts.
#[derive(Debug, Clone)]
pub struct GkpReport {
    pub process: Process,
    pub processes: Vec<Process>,
    pub kahn: KahnSemantics,
    pub value_set: BTreeSet<usize>,
    /// Canonical witness trace per realized value.
    pub value_witness: BTreeMap<usize, Trace>,
    pub safety: Verdict<GkpWitness>,
    pub liveness: Verdict<GkpWitness>,
    pub saturated_fixpoints: Vec<usize>,
}

impl GkpReport {
    pub fn passed(&self) -> bool {
        self.safety.passed() && self.liveness.passed()
    }

    pub fn is_saturated(&self) -> bool {
        !self.saturated_fixpoints.is_empty()
    }
}

pub fn gkp_check(
    network: &Network,
    model: &ModelInstance,
    cache: &mut SpaceCache<'_>,
) -> Result<GkpReport, NetworkError> {
    let space = cache.get(&network.full_sort())?;
    let ctxs = node_contexts(network, cache)?;
    let mut processes = Vec::with_capacity(network.nodes.len());
    for (node, ctx) in network.nodes.iter().zip(&ctxs) {
        processes.push(process_computing(model, node, ctx)?);
    }
    let parts: Vec<(&Process, &Arc<SortSpace>)> = processes
        .iter()
        .zip(&ctxs)
        .map(|(p, ctx)| (p, &ctx.space))
        .collect();
    let process = compose(model, &space, &parts)?;
    let kahn = build_kahn(network, &space, &ctxs)?;

    let mut value_set = BTreeSet::new();
    let mut value_witness: BTreeMap<usize, Trace> = BTreeMap::new();
    for t in &process.traces {
        let v = space.mu(t);
        value_set.insert(v);
        value_witness.entry(v).or_insert_with(|| t.clone());
    }

    let safety = match value_set.iter().find(|v| !kahn.fixpoint_set.contains(v)) {
        None => Verdict::Pass,
        Some(&v) => Verdict::Fail {
            witness: GkpWitness::UnspecifiedValue {
                value: v,
                trace: value_witness[&v].clone(),
            },
        },
    };
    let liveness = match kahn.fixpoint_set.iter().find(|v| !value_set.contains(v)) {
        None => Verdict::Pass,
        Some(&v) => {
            let selection = kahn
                .fixpoints
                .iter()
                .position(|&f| f == v)
                .expect("fixpoint came from a selection");
            Verdict::Fail {
                witness: GkpWitness::UnrealizedFixpoint {
                    value: v,
                    selection,
                },
            }
        }
    };
    let saturated_fixpoints: Vec<usize> = kahn
        .fixpoint_set
        .iter()
        .copied()
        .filter(|&v| space.values.is_saturated(v))
        .collect();
    Ok(GkpReport {
        process,
        processes,
        kahn,
        value_set,
        value_witness,
        safety,
        liveness,
        saturated_fixpoints,
    })
}

/// The per-node bound underlying safety: along every trace of a computing
/// process, each prefix's observed output stays below the witnessing
/// function applied to the prefix's observed input.
pub fn prefix_bound_check(
    model: &ModelInstance,
    node: &NodeSpec,
    ctx: &NodeCtx,
    process: &Process,
) -> Verdict<String> {
    let eval = NodeEval::new(node, ctx, &ctx.space);
    for t in &process.traces {
        let witnesses = membership_witnesses(model, node, ctx, t);
        if witnesses == 0 {
            return Verdict::Fail {
                witness: format!("{} is not a computing trace", t.display()),
            };
        }
        for d in t.order_down_sets() {
            let (idx_i, idx_o, _) = indices_of_events(&d, &ctx.space, &eval);
            let mut m = witnesses;
            while m != 0 {
                let k = m.trailing_zeros() as usize;
                m &= m - 1;
                if !eval.vo_leq(idx_o, eval.tables[k][idx_i].0) {
                    return Verdict::Fail {
                        witness: format!(
                            "prefix {:?} of {} emits more than {} justifies",
                            d,
                            t.display(),
                            node.function_names[k]
                        ),
                    };
                }
            }
        }
    }
    Verdict::Pass
}

struct GlobalCharWalker<'a> {
    space: &'a SortSpace,
    endomaps: &'a [MonotoneMap],
    process: &'a Process,
    coords: Vec<usize>,
    value: usize,
    alive: u128,
    stack: Vec<(usize, usize, usize, u128)>,
    mismatch: Option<Trace>,
}

impl GlobalCharWalker<'_> {
    fn full_mask(&self) -> u128 {
        if self.endomaps.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.endomaps.len()) - 1
        }
    }
}

impl LinearVisitor for GlobalCharWalker<'_> {
    fn push(&mut self, e: usize) {
        let c = self.space.product.channel_of[e];
        let old = self.coords[c];
        let next = self
            .space
            .extend_coord(c, old, self.space.product.base_of[e]);
        self.stack.push((c, old, self.value, self.alive));
        self.coords[c] = next;
        let stride = self.space.values.stride(c);
        let before = self.value;
        self.value += (next - old) * stride;
        let mut m = self.alive;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            m &= m - 1;
            let g_before = self.endomaps[k].apply(Elem(before)).0;
            if !self.space.values.leq(self.value, g_before) {
                self.alive &= !(1 << k);
            }
        }
    }

    fn pop(&mut self, _e: usize) {
        let (c, old, value, alive) = self.stack.pop().expect("balanced walk");
        self.coords[c] = old;
        self.value = value;
        self.alive = alive;
    }

    fn at_node(&mut self, seq: &[usize]) {
        if self.mismatch.is_some() {
            return;
        }
        let mut rhs = false;
        let mut m = self.alive;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.endomaps[k].apply(Elem(self.value)).0 == self.value {
                rhs = true;
                break;
            }
        }
        let t = Trace::linear_unchecked(self.space.product.es.clone(), seq);
        let lhs = self.process.contains(&t);
        if lhs != rhs {
            self.mismatch = Some(t);
        }
    }
}

/// Membership in the composed process coincides with the value-level
/// characterization: some selection fixes the trace's value and bounds every
/// atomic step.
pub fn global_characterization_check(
    network: &Network,
    model: &ModelInstance,
    cache: &mut SpaceCache<'_>,
    report: &GkpReport,
) -> Result<Verdict<Trace>, NetworkError> {
    let space = cache.get(&network.full_sort())?;
    match model.kind {
        TraceKind::Linear => {
            let alive = if report.kahn.endomaps.len() == 128 {
                u128::MAX
            } else {
                (1u128 << report.kahn.endomaps.len()) - 1
            };
            let mut walker = GlobalCharWalker {
                space: &space,
                endomaps: &report.kahn.endomaps,
                process: &report.process,
                coords: vec![0; space.sort.len()],
                value: 0,
                alive,
                stack: Vec::new(),
                mismatch: None,
            };
            debug_assert_eq!(alive, walker.full_mask());
            walk_linear_traces(
                &space.product.es,
                space.product.es.len(),
                model.bounds.max_enum_traces,
                &mut walker,
            )?;
            Ok(match walker.mismatch {
                None => Verdict::Pass,
                Some(t) => Verdict::Fail { witness: t },
            })
        }
        TraceKind::Pomset => {
            let all = enumerate_traces(
                &space.product.es,
                TraceKind::Pomset,
                space.product.es.len(),
                model.bounds.max_enum_traces,
            )?;
            for t in all {
                let lhs = report.process.contains(&t);
                let mu = space.mu(&t);
                let rhs = (0..report.kahn.endomaps.len()).any(|k| {
                    let g = &report.kahn.endomaps[k];
                    if g.apply(Elem(mu)).0 != mu {
                        return false;
                    }
                    // Every relative cover below t must respect the bound.
                    t.order_down_sets().iter().all(|d| {
                        let sub = t.subtrace(d);
                        let before = space.mu(&sub);
                        t.carrier().iter().all(|&e| {
                            if d.contains(&e) {
                                return true;
                            }
                            let enabled =
                                t.carrier().iter().all(|&f| !t.lt(f, e) || d.contains(&f));
                            if !enabled {
                                return true;
                            }
                            let mut with = d.to_vec();
                            with.push(e);
                            let after = space.mu(&t.subtrace(&with));
                            space.values.leq(after, g.apply(Elem(before)).0)
                        })
                    })
                });
                if lhs != rhs {
                    return Ok(Verdict::Fail { witness: t });
                }
            }
            Ok(Verdict::Pass)
        }
    }
}

/// The causal constraints a trace puts on the compact values below its
/// evaluation: b precedes c when every covering sequence of the trace
/// realizes b strictly earlier.
#[derive(Debug, Clone)]
pub struct TraceCausality {
    pub trace: Trace,
    pub pairs: BTreeSet<(usize, usize)>,
}

pub fn trace_causality(t: &Trace, space: &SortSpace) -> Result<TraceCausality, NetworkError> {
    // The subtraces of t, as their own pointed poset.
    let subs: Vec<Trace> = {
        let mut v: Vec<Trace> = t
            .order_down_sets()
            .into_iter()
            .map(|d| t.subtrace(&d))
            .collect();
        v.sort();
        v
    };
    let labels: Vec<String> = subs.iter().map(|s| s.display()).collect();
    let mut rel = BitRel::new(subs.len());
    for (i, a) in subs.iter().enumerate() {
        for (j, b) in subs.iter().enumerate() {
            if trace_leq(a, b) {
                rel.set(i, j);
            }
        }
    }
    let poset = FinitePointedPoset::from_bitrel(labels, rel)?;
    let top = Elem(
        subs.iter()
            .position(|s| s == t)
            .expect("t is its own largest subtrace"),
    );
    let seqs = covering_sequences_for(&poset, top)?;

    let d = space.mu(t);
    let below: Vec<usize> = (0..space.values.len())
        .filter(|&v| space.values.leq(v, d))
        .collect();
    let mut pairs: Option<BTreeSet<(usize, usize)>> = None;
    for seq in &seqs {
        let values: Vec<usize> = seq.steps().iter().map(|&e| space.mu(&subs[e.0])).collect();
        let norm = |b: usize| -> usize {
            values
                .iter()
                .position(|&v| space.values.leq(b, v))
                .expect("the last step evaluates to d")
        };
        let mut cur = BTreeSet::new();
        for &b in &below {
            for &c in &below {
                if norm(b) < norm(c) {
                    cur.insert((b, c));
                }
            }
        }
        pairs = Some(match pairs {
            None => cur,
            Some(prev) => prev.intersection(&cur).copied().collect(),
        });
    }
    Ok(TraceCausality {
        trace: t.clone(),
        pairs: pairs.unwrap_or_default(),
    })
}

/// Build a linear trace realizing the chain's target whose causal order
/// refines the chain's: refine the chain into a covering sequence of values
/// and read off the added events.
pub fn causal_witness(chain: &CompactChain, space: &SortSpace) -> Result<Trace, NetworkError> {
    let seq = refine_chain(chain, &space.values.poset)?;
    let mut events = Vec::new();
    for w in seq.steps().windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let ca = space.values.coords(a);
        let cb = space.values.coords(b);
        let c = (0..ca.len())
            .find(|&c| ca[c] != cb[c])
            .expect("covers change exactly one coordinate");
        let before = space.values.parts[c].config(ca[c]);
        let after = space.values.parts[c].config(cb[c]);
        let mut diff = after.0.difference(&before.0);
        let base = *diff.next().expect("configuration covers add one event");
        debug_assert!(diff.next().is_none());
        let e = space
            .product
            .event_of(c, base)
            .expect("base event exists in the product");
        events.push(e);
    }
    Ok(Trace::linear_unchecked(space.product.es.clone(), &events))
}

/// Exhaustively (or by deterministic sample) check that every bottom-rooted
/// strictly ascending chain of values has a trace realizing its target whose
/// causality refines the chain's.
pub fn check_causally_expressive(
    space: &SortSpace,
    sample_size: usize,
    seed: u64,
) -> Result<Verdict<String>, NetworkError> {
    let values = &space.values;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 0..values.len() {
        let mut chains: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![values.bottom()];
        enumerate_chains(values, d, &mut stack, &mut chains)?;
        let selected: Vec<usize> = if chains.len() > sample_size {
            let mut idx: Vec<usize> = index_sample(&mut rng, chains.len(), sample_size)
                .into_iter()
                .collect();
            idx.sort_unstable();
            idx
        } else {
            (0..chains.len()).collect()
        };
        for i in selected {
            let links: Vec<Elem> = chains[i].iter().map(|&v| Elem(v)).collect();
            let chain = CompactChain::new(&values.poset, links)?;
            let witness = causal_witness(&chain, space)?;
            if space.mu(&witness) != d {
                return Ok(Verdict::Fail {
                    witness: format!(
                        "witness {} realizes {} instead of {}",
                        witness.display(),
                        space.value_label(space.mu(&witness)),
                        space.value_label(d)
                    ),
                });
            }
            let want = chain_causality(&chain, &values.poset, Elem(d))?;
            let got = trace_causality(&witness, space)?;
            let want_pairs: BTreeSet<(usize, usize)> =
                want.pairs.iter().map(|&(a, b)| (a.0, b.0)).collect();
            if !want_pairs.is_subset(&got.pairs) {
                return Ok(Verdict::Fail {
                    witness: format!(
                        "witness {} does not refine the chain causality at {}",
                        witness.display(),
                        space.value_label(d)
                    ),
                });
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Strictly ascending chains from bottom to `d`. Every prefix that reaches
/// `d` is recorded; intermediate stops are extensions of shorter chains.
fn enumerate_chains(
    values: &crate::event_structure::ValuePoset,
    d: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) -> Result<(), NetworkError> {
    let cur = *stack.last().expect("non-empty");
    if cur == d {
        if out.len() >= MAX_CAUSAL_CHAINS {
            return Err(NetworkError::TooManyChains(MAX_CAUSAL_CHAINS));
        }
        out.push(stack.clone());
        return Ok(());
    }
    for next in 0..values.len() {
        if next != cur && values.leq(cur, next) && values.leq(next, d) {
            stack.push(next);
            enumerate_chains(values, d, stack, out)?;
            stack.pop();
        }
    }
    Ok(())
}
