//! Traces over event structures: a configuration (the data produced so far)
//! together with a causal partial order extending the enabling order (how it
//! was produced). Linear traces are those whose causal order is total; they
//! correspond to covering sequences of configurations, while general traces
//! over stream products correspond to labelled pomsets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::bitrel::BitRel;
use crate::event_structure::{Config, ConfigPoset, EsError, EventStructure, ProductEs};
use crate::poset::{CoveringSequence, FinitePointedPoset, PosetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceKind {
    Pomset,
    Linear,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::Pomset => "pomset",
            TraceKind::Linear => "linear",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("carrier is not a configuration: {0}")]
    NotAConfiguration(String),
    #[error("order is not a partial order: {0}")]
    OrderNotPartial(String),
    #[error("causality not respected: {earlier} ≤ {later} is missing from the trace order")]
    CausalityNotRespected { earlier: String, later: String },
    #[error("trace order is not total")]
    NotLinear,
    #[error("event structure has {events} events, bound is {bound}")]
    BoundExceeded { events: usize, bound: usize },
    #[error("trace enumeration exceeded budget of {0}")]
    TraceBudgetExceeded(u64),
    #[error("channel {channel}: symbol {datum:?} is not in the alphabet")]
    AlphabetMismatch { channel: String, datum: char },
    #[error("channel {channel}: word {word:?} exceeds the stream depth")]
    DepthExceeded { channel: String, word: String },
    #[error("points on channel {0} are not linearly ordered")]
    ChannelNotLinear(String),
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error(transparent)]
    Es(#[from] EsError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A trace: configuration plus causal order. The order is stored as the set
/// of strict pairs, transitively closed at construction.
#[derive(Debug, Clone)]
pub struct Trace {
    es: Arc<EventStructure>,
    carrier: Vec<usize>,
    strict: Vec<(usize, usize)>,
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.es, &other.es) || *self.es == *other.es)
            && self.carrier == other.carrier
            && self.strict == other.strict
    }
}

impl Eq for Trace {}

impl Hash for Trace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.carrier.hash(state);
        self.strict.hash(state);
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.carrier.len(), &self.carrier, &self.strict).cmp(&(
            other.carrier.len(),
            &other.carrier,
            &other.strict,
        ))
    }
}

impl Trace {
    pub fn bottom(es: Arc<EventStructure>) -> Trace {
        Trace {
            es,
            carrier: Vec::new(),
            strict: Vec::new(),
        }
    }

    /// Validate carrier and order. `order` is taken as a generating set of
    /// pairs and closed transitively.
    pub fn validate(
        es: Arc<EventStructure>,
        carrier: BTreeSet<usize>,
        order: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Trace, TraceError> {
        let cfg = Config(carrier.clone());
        es.validate_config(&cfg)
            .map_err(|e| TraceError::NotAConfiguration(e.to_string()))?;

        let ids: Vec<usize> = carrier.iter().copied().collect();
        let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let n = ids.len();
        let mut rel = BitRel::new(n);
        for (a, b) in order {
            if a == b {
                continue;
            }
            let (&la, &lb) = match (local.get(&a), local.get(&b)) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    return Err(TraceError::OrderNotPartial(format!(
                        "pair ({a}, {b}) mentions events outside the carrier"
                    )))
                }
            };
            rel.set(la, lb);
        }
        rel.reflexive_transitive_close();
        for i in 0..n {
            for j in rel.iter_row(i) {
                if i != j && rel.get(j, i) {
                    return Err(TraceError::OrderNotPartial(format!(
                        "cycle through {} and {}",
                        es.label(ids[i]),
                        es.label(ids[j])
                    )));
                }
            }
        }
        // Enabling order within the carrier must be contained in the trace order.
        for (i, &e) in ids.iter().enumerate() {
            for (j, &f) in ids.iter().enumerate() {
                if i != j && es.causally_leq(e, f) && !rel.get(i, j) {
                    return Err(TraceError::CausalityNotRespected {
                        earlier: es.label(e).to_string(),
                        later: es.label(f).to_string(),
                    });
                }
            }
        }
        let mut strict = Vec::new();
        for i in 0..n {
            for j in rel.iter_row(i) {
                if i != j {
                    strict.push((ids[i], ids[j]));
                }
            }
        }
        strict.sort_unstable();
        Ok(Trace {
            es,
            carrier: ids,
            strict,
        })
    }

    /// A linear trace from an event sequence; the order is the sequence order.
    pub fn linear(es: Arc<EventStructure>, seq: &[usize]) -> Result<Trace, TraceError> {
        let carrier: BTreeSet<usize> = seq.iter().copied().collect();
        if carrier.len() != seq.len() {
            return Err(TraceError::OrderNotPartial(
                "sequence repeats an event".to_string(),
            ));
        }
        let order: Vec<(usize, usize)> = seq.windows(2).map(|w| (w[0], w[1])).collect();
        let t = Trace::validate(es, carrier, order)?;
        debug_assert!(t.is_linear());
        Ok(t)
    }

    pub(crate) fn linear_unchecked(es: Arc<EventStructure>, seq: &[usize]) -> Trace {
        let mut strict = Vec::with_capacity(seq.len() * (seq.len().saturating_sub(1)) / 2);
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                strict.push((seq[i], seq[j]));
            }
        }
        strict.sort_unstable();
        let mut carrier = seq.to_vec();
        carrier.sort_unstable();
        Trace {
            es,
            carrier,
            strict,
        }
    }

    /// Assemble a trace from sorted parts without validation. Besides the
    /// enumeration fast paths this is the escape hatch negative controls use
    /// to build deliberately broken traces.
    pub fn from_parts(
        es: Arc<EventStructure>,
        carrier: Vec<usize>,
        strict: Vec<(usize, usize)>,
    ) -> Trace {
        debug_assert!(carrier.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(strict.windows(2).all(|w| w[0] < w[1]));
        Trace {
            es,
            carrier,
            strict,
        }
    }

    pub fn es(&self) -> &Arc<EventStructure> {
        &self.es
    }

    pub fn carrier(&self) -> &[usize] {
        &self.carrier
    }

    pub fn carrier_config(&self) -> Config {
        Config(self.carrier.iter().copied().collect())
    }

    pub fn strict_pairs(&self) -> &[(usize, usize)] {
        &self.strict
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.strict.binary_search(&(a, b)).is_ok()
    }

    pub fn leq_t(&self, a: usize, b: usize) -> bool {
        a == b || self.lt(a, b)
    }

    pub fn is_linear(&self) -> bool {
        let n = self.carrier.len();
        self.strict.len() == n * n.saturating_sub(1) / 2
    }

    /// Events in causal-order positions; only meaningful for linear traces.
    pub fn linearization(&self) -> Result<Vec<usize>, TraceError> {
        if !self.is_linear() {
            return Err(TraceError::NotLinear);
        }
        let mut seq = self.carrier.clone();
        seq.sort_by_key(|&e| self.strict.iter().filter(|&&(_, b)| b == e).count());
        Ok(seq)
    }

    pub fn display(&self) -> String {
        let mut s = String::from("[");
        for (i, &e) in self.carrier.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(self.es.label(e));
        }
        if !self.strict.is_empty() {
            s.push('|');
            for (i, &(a, b)) in self.strict.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(self.es.label(a));
                s.push('<');
                s.push_str(self.es.label(b));
            }
        }
        s.push(']');
        s
    }

    /// Down-sets of the trace order, as sorted event vectors, in canonical
    /// order. These are exactly the carriers of the subtraces.
    pub fn order_down_sets(&self) -> Vec<Vec<usize>> {
        let n = self.carrier.len();
        // Process events in a linear extension of the trace order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| {
            self.carrier
                .iter()
                .filter(|&&f| self.lt(f, self.carrier[i]))
                .count()
        });
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        self.down_set_dfs(&order, 0, &mut cur, &mut out);
        out.iter_mut().for_each(|s| s.sort_unstable());
        out.sort_by_key(|s| (s.len(), s.clone()));
        out
    }

    fn down_set_dfs(
        &self,
        order: &[usize],
        pos: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == order.len() {
            out.push(cur.clone());
            return;
        }
        let e = self.carrier[order[pos]];
        self.down_set_dfs(order, pos + 1, cur, out);
        let ok = self
            .carrier
            .iter()
            .all(|&f| !self.lt(f, e) || cur.contains(&f));
        if ok {
            cur.push(e);
            self.down_set_dfs(order, pos + 1, cur, out);
            cur.pop();
        }
    }

    /// The subtrace on a down-set of the trace order.
    pub fn subtrace(&self, events: &[usize]) -> Trace {
        let set: BTreeSet<usize> = events.iter().copied().collect();
        let carrier: Vec<usize> = set.iter().copied().collect();
        let strict: Vec<(usize, usize)> = self
            .strict
            .iter()
            .filter(|(a, b)| set.contains(a) && set.contains(b))
            .copied()
            .collect();
        Trace {
            es: self.es.clone(),
            carrier,
            strict,
        }
    }
}

/// t ⊑ u: carrier included, order induced, and the carrier is down-closed in
/// the larger order.
pub fn trace_leq(t: &Trace, u: &Trace) -> bool {
    debug_assert!(Arc::ptr_eq(t.es(), u.es()) || *t.es == *u.es);
    let t_set: BTreeSet<usize> = t.carrier.iter().copied().collect();
    if !t.carrier.iter().all(|e| u.carrier.contains(e)) {
        return false;
    }
    let induced: Vec<(usize, usize)> = u
        .strict
        .iter()
        .filter(|(a, b)| t_set.contains(a) && t_set.contains(b))
        .copied()
        .collect();
    if induced != t.strict {
        return false;
    }
    u.strict
        .iter()
        .all(|(a, b)| !t_set.contains(b) || t_set.contains(a))
}

/// Forget causality: the underlying configuration.
pub fn eval_trace(t: &Trace) -> Config {
    t.carrier_config()
}

/// t↾X: restrict to the causal down-closure of X inside the trace.
pub fn trace_restrict_to(t: &Trace, x: &BTreeSet<usize>) -> Trace {
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    for &e in &t.carrier {
        if x.contains(&e) || x.iter().any(|&g| t.lt(e, g)) {
            keep.insert(e);
        }
    }
    let carrier: Vec<usize> = keep.iter().copied().collect();
    let strict: Vec<(usize, usize)> = t
        .strict
        .iter()
        .filter(|(a, b)| keep.contains(a) && keep.contains(b))
        .copied()
        .collect();
    Trace {
        es: t.es.clone(),
        carrier,
        strict,
    }
}

/// Delete the events outside the target subsort, keeping the induced order.
pub fn restrict_trace(t: &Trace, src: &ProductEs, dst: &ProductEs) -> Trace {
    let map = src.event_map_to(dst);
    let carrier: Vec<usize> = {
        let mut v: Vec<usize> = t.carrier.iter().filter_map(|&e| map[e]).collect();
        v.sort_unstable();
        v
    };
    let mut strict: Vec<(usize, usize)> = t
        .strict
        .iter()
        .filter_map(|&(a, b)| match (map[a], map[b]) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        })
        .collect();
    strict.sort_unstable();
    Trace {
        es: dst.es.clone(),
        carrier,
        strict,
    }
}

/// A linear trace corresponds to the covering sequence of its growing
/// prefixes in the configuration poset.
pub fn linear_to_covseq(t: &Trace, cp: &ConfigPoset) -> Result<CoveringSequence, TraceError> {
    let seq = t.linearization()?;
    let mut steps = Vec::with_capacity(seq.len() + 1);
    let mut cur = Config::empty();
    steps.push(
        cp.elem_of(&cur)
            .expect("empty configuration is in every configuration poset"),
    );
    for e in seq {
        cur.0.insert(e);
        let elem = cp
            .elem_of(&cur)
            .ok_or_else(|| TraceError::NotAConfiguration(cp.es.config_label(&cur)))?;
        steps.push(elem);
    }
    Ok(CoveringSequence::new(&cp.poset, steps)?)
}

/// Inverse passage: read the added event off each covering step.
pub fn covseq_to_linear(seq: &CoveringSequence, cp: &ConfigPoset) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    for w in seq.steps().windows(2) {
        let a = cp.config(w[0].0);
        let b = cp.config(w[1].0);
        let mut diff = b.0.difference(&a.0);
        let e = *diff.next().expect("covers add exactly one event");
        debug_assert!(diff.next().is_none());
        events.push(e);
    }
    Ok(Trace::linear_unchecked(cp.es.clone(), &events))
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Visitor for the depth-first walk over all linear traces. `at_node` fires
/// once per trace, in lexicographic order of event sequences; `push`/`pop`
/// bracket each extension so visitors can maintain incremental state.
pub trait LinearVisitor {
    fn push(&mut self, _event: usize) {}
    fn pop(&mut self, _event: usize) {}
    fn at_node(&mut self, seq: &[usize]);
    /// Consulted after `push`: when true, the subtree below the freshly
    /// extended path is skipped (including its `at_node`).
    fn prune(&self) -> bool {
        false
    }
}

struct WalkState<'a> {
    es: &'a EventStructure,
    in_x: Vec<bool>,
    /// Count of strict causal predecessors already present.
    sat: Vec<usize>,
    preds: Vec<usize>,
    /// Per forbidden set, how many members are absent.
    missing: Vec<usize>,
    /// Per event, how many forbidden sets would be completed by adding it.
    blocked: Vec<usize>,
    /// Events whose causal predecessors are all present.
    ready: BTreeSet<usize>,
    seq: Vec<usize>,
    visited: u64,
    budget: u64,
    max_events: usize,
}

impl<'a> WalkState<'a> {
    fn new(es: &'a EventStructure, max_events: usize, budget: u64) -> Self {
        let n = es.len();
        let preds: Vec<usize> = (0..n)
            .map(|e| es.predecessors(e).filter(|&p| p != e).count())
            .collect();
        let ready: BTreeSet<usize> = (0..n).filter(|&e| preds[e] == 0).collect();
        let missing: Vec<usize> = es.forbidden_sets().iter().map(|f| f.len()).collect();
        WalkState {
            es,
            in_x: vec![false; n],
            sat: vec![0; n],
            preds,
            missing,
            blocked: vec![0; n],
            ready,
            seq: Vec::new(),
            visited: 0,
            budget,
            max_events,
        }
    }

    fn apply(&mut self, e: usize, add: bool) {
        if add {
            self.in_x[e] = true;
            self.ready.remove(&e);
            self.seq.push(e);
        }
        let succs: Vec<usize> = self.es.successors(e).filter(|&f| f != e).collect();
        for f in succs {
            if add {
                self.sat[f] += 1;
                if self.sat[f] == self.preds[f] && !self.in_x[f] {
                    self.ready.insert(f);
                }
            } else {
                if self.sat[f] == self.preds[f] {
                    self.ready.remove(&f);
                }
                self.sat[f] -= 1;
            }
        }
        let fis: Vec<usize> = self.es.forbidden_containing(e).to_vec();
        for fi in fis {
            if add {
                self.missing[fi] -= 1;
                if self.missing[fi] == 1 {
                    let g = self.lone_absent(fi);
                    self.blocked[g] += 1;
                }
            } else {
                if self.missing[fi] == 1 {
                    let g = self.lone_absent(fi);
                    self.blocked[g] -= 1;
                }
                self.missing[fi] += 1;
            }
        }
        if !add {
            self.seq.pop();
            self.in_x[e] = false;
            self.ready.insert(e);
        }
    }

    fn lone_absent(&self, fi: usize) -> usize {
        *self.es.forbidden_sets()[fi]
            .iter()
            .find(|&&x| !self.in_x[x])
            .expect("exactly one member absent")
    }

    fn walk(&mut self, v: &mut impl LinearVisitor) -> Result<(), TraceError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(TraceError::TraceBudgetExceeded(self.budget));
        }
        v.at_node(&self.seq);
        if self.seq.len() >= self.max_events {
            return Ok(());
        }
        let candidates: Vec<usize> = self
            .ready
            .iter()
            .copied()
            .filter(|&e| self.blocked[e] == 0)
            .collect();
        for e in candidates {
            self.apply(e, true);
            v.push(e);
            if !v.prune() {
                self.walk(v)?;
            }
            v.pop(e);
            self.apply(e, false);
        }
        Ok(())
    }
}

/// Walk every linear trace of `es` with at most `max_events` events.
/// Returns the number of traces visited.
pub fn walk_linear_traces(
    es: &EventStructure,
    max_events: usize,
    budget: u64,
    v: &mut impl LinearVisitor,
) -> Result<u64, TraceError> {
    let mut st = WalkState::new(es, max_events, budget);
    st.walk(v)?;
    Ok(st.visited)
}

struct CollectLinear {
    es: Arc<EventStructure>,
    out: Vec<Trace>,
}

impl LinearVisitor for CollectLinear {
    fn at_node(&mut self, seq: &[usize]) {
        self.out.push(Trace::linear_unchecked(self.es.clone(), seq));
    }
}

/// All closed strict partial orders on `0..n` extending `base` (itself closed
/// and strict). Elements are introduced one at a time; at each step the new
/// element picks a down-set and an up-set among the previous ones, which
/// determines the extension uniquely, so no relation is produced twice.
pub fn partial_orders_extending(n: usize, base: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= 16, "pomset enumeration is for desk-scale carriers");
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut base_below = vec![0u32; n];
    let mut base_above = vec![0u32; n];
    for &(a, b) in base {
        base_below[b] |= 1 << a;
        base_above[a] |= 1 << b;
    }
    let mut below = vec![0u32; n];
    let mut above = vec![0u32; n];
    let mut out = Vec::new();
    extend_orders(
        n,
        1,
        &base_below,
        &base_above,
        &mut below,
        &mut above,
        &mut out,
    );
    out.sort();
    out
}

fn extend_orders(
    n: usize,
    k: usize,
    base_below: &[u32],
    base_above: &[u32],
    below: &mut [u32],
    above: &mut [u32],
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if k == n {
        let mut pairs = Vec::new();
        for (b, mask) in below.iter().enumerate() {
            let mut m = *mask;
            while m != 0 {
                let a = m.trailing_zeros() as usize;
                m &= m - 1;
                pairs.push((a, b));
            }
        }
        pairs.sort_unstable();
        out.push(pairs);
        return;
    }
    let prev_mask: u32 = (1 << k) - 1;
    let forced_down = base_below[k] & prev_mask;
    let forced_up = base_above[k] & prev_mask;
    for down in subsets_of(prev_mask) {
        if down & forced_down != forced_down {
            continue;
        }
        // Down-set must be closed downwards.
        if !mask_bits(down).all(|j| below[j] & !down == 0) {
            continue;
        }
        let mut up_candidates = 0u32;
        for l in mask_bits(prev_mask & !down) {
            // Everything below the new element must already sit below l.
            if down & !below[l] == 0 {
                up_candidates |= 1 << l;
            }
        }
        if forced_up & !up_candidates != 0 {
            continue;
        }
        for up in subsets_of(up_candidates) {
            if up & forced_up != forced_up {
                continue;
            }
            // Up-set must be closed upwards.
            if !mask_bits(up).all(|l| above[l] & prev_mask & !up == 0) {
                continue;
            }
            below[k] = down;
            above[k] = up;
            for j in mask_bits(down) {
                above[j] |= 1 << k;
            }
            for l in mask_bits(up) {
                below[l] |= 1 << k;
            }
            extend_orders(n, k + 1, base_below, base_above, below, above, out);
            for j in mask_bits(down) {
                above[j] &= !(1 << k);
            }
            for l in mask_bits(up) {
                below[l] &= !(1 << k);
            }
            below[k] = 0;
            above[k] = 0;
        }
    }
}

fn subsets_of(mask: u32) -> impl Iterator<Item = u32> {
    let mut cur = 0u32;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let res = cur;
        if cur == mask {
            done = true;
        } else {
            cur = cur.wrapping_sub(mask) & mask;
        }
        Some(res)
    })
}

fn mask_bits(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// All traces of the given kind with carriers of at most `event_bound`
/// events.
pub fn enumerate_traces(
    es: &Arc<EventStructure>,
    kind: TraceKind,
    event_bound: usize,
    budget: u64,
) -> Result<Vec<Trace>, TraceError> {
    match kind {
        TraceKind::Linear => {
            let mut col = CollectLinear {
                es: es.clone(),
                out: Vec::new(),
            };
            walk_linear_traces(es, event_bound, budget, &mut col)?;
            let mut traces = col.out;
            traces.sort();
            traces.dedup();
            Ok(traces)
        }
        TraceKind::Pomset => {
            let configs = es.configurations(budget.min(usize::MAX as u64) as usize)?;
            let mut traces = Vec::new();
            for cfg in configs {
                if cfg.len() > event_bound {
                    continue;
                }
                let ids: Vec<usize> = cfg.0.iter().copied().collect();
                let mut base = Vec::new();
                for (i, &e) in ids.iter().enumerate() {
                    for (j, &f) in ids.iter().enumerate() {
                        if i != j && es.causally_leq(e, f) {
                            base.push((i, j));
                        }
                    }
                }
                for order in partial_orders_extending(ids.len(), &base) {
                    let strict: Vec<(usize, usize)> = {
                        let mut v: Vec<(usize, usize)> =
                            order.iter().map(|&(a, b)| (ids[a], ids[b])).collect();
                        v.sort_unstable();
                        v
                    };
                    traces.push(Trace::from_parts(es.clone(), ids.clone(), strict));
                    if traces.len() as u64 > budget {
                        return Err(TraceError::TraceBudgetExceeded(budget));
                    }
                }
            }
            traces.sort();
            Ok(traces)
        }
    }
}

/// A materialized trace domain: every trace of the kind within the event
/// bound, ordered by the trace order. Covers add one causally maximal event.
#[derive(Debug, Clone)]
pub struct TraceDomain {
    pub es: Arc<EventStructure>,
    pub kind: TraceKind,
    pub traces: Vec<Trace>,
    pub poset: Arc<FinitePointedPoset>,
    index: HashMap<Trace, usize>,
}

impl TraceDomain {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn trace(&self, i: usize) -> &Trace {
        &self.traces[i]
    }

    pub fn index_of(&self, t: &Trace) -> Option<usize> {
        self.index.get(t).copied()
    }
}

pub fn build_trace_domain(
    es: &Arc<EventStructure>,
    kind: TraceKind,
    event_bound: usize,
    max_events: usize,
    budget: u64,
) -> Result<TraceDomain, TraceError> {
    if es.len() > max_events {
        return Err(TraceError::BoundExceeded {
            events: es.len(),
            bound: max_events,
        });
    }
    let traces = enumerate_traces(es, kind, event_bound, budget)?;
    let labels: Vec<String> = traces.iter().map(|t| t.display()).collect();
    let m = traces.len();
    let mut rel = BitRel::new(m);
    for (i, a) in traces.iter().enumerate() {
        for (j, b) in traces.iter().enumerate() {
            if trace_leq(a, b) {
                rel.set(i, j);
            }
        }
    }
    let poset = Arc::new(FinitePointedPoset::from_bitrel(labels, rel)?);
    let index: HashMap<Trace, usize> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(TraceDomain {
        es: es.clone(),
        kind,
        traces,
        poset,
        index,
    })
}

// ---------------------------------------------------------------------------
// Labelled pomsets
// ---------------------------------------------------------------------------

/// An isomorphism type of finite labelled partial orders whose points carry
/// (channel, datum) labels and whose per-channel point sets are linearly
/// ordered. Stored in canonical form: points are sorted by (channel,
/// per-channel position), so structural equality decides isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelledPomset {
    labels: Vec<(String, char)>,
    strict: Vec<(usize, usize)>,
}

impl LabelledPomset {
    pub fn empty() -> Self {
        LabelledPomset {
            labels: Vec::new(),
            strict: Vec::new(),
        }
    }

    /// Validate and canonicalize an arbitrary presentation.
    pub fn new(
        points: Vec<(String, char)>,
        order: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TraceError> {
        let n = points.len();
        let mut rel = BitRel::new(n);
        for (a, b) in order {
            if a >= n || b >= n {
                return Err(TraceError::OrderNotPartial(format!(
                    "pair ({a}, {b}) out of range"
                )));
            }
            if a != b {
                rel.set(a, b);
            }
        }
        rel.reflexive_transitive_close();
        for i in 0..n {
            for j in rel.iter_row(i) {
                if i != j && rel.get(j, i) {
                    return Err(TraceError::OrderNotPartial(format!(
                        "cycle through points {i} and {j}"
                    )));
                }
            }
        }
        // Per-channel linearity, and per-channel rank for the canonical form.
        let mut rank: Vec<(String, usize)> = Vec::with_capacity(n);
        for (i, (ch, _)) in points.iter().enumerate() {
            let mut r = 0;
            for (j, (ch2, _)) in points.iter().enumerate() {
                if i != j && ch == ch2 {
                    if rel.get(j, i) {
                        r += 1;
                    } else if !rel.get(i, j) {
                        return Err(TraceError::ChannelNotLinear(ch.clone()));
                    }
                }
            }
            rank.push((ch.clone(), r));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| rank[a].cmp(&rank[b]));
        let position: HashMap<usize, usize> = perm
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let labels: Vec<(String, char)> = perm.iter().map(|&i| points[i].clone()).collect();
        let mut strict = Vec::new();
        for i in 0..n {
            for j in rel.iter_row(i) {
                if i != j {
                    strict.push((position[&i], position[&j]));
                }
            }
        }
        strict.sort_unstable();
        Ok(LabelledPomset { labels, strict })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[(String, char)] {
        &self.labels
    }

    pub fn strict_pairs(&self) -> &[(usize, usize)] {
        &self.strict
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.strict.binary_search(&(a, b)).is_ok()
    }

    fn channel_count(&self, ch: &str) -> usize {
        self.labels.iter().filter(|(c, _)| c == ch).count()
    }

    fn point_of(&self, ch: &str, rank: usize) -> Option<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| c == ch)
            .map(|(i, _)| i)
            .nth(rank)
    }

    /// Prefix order on isomorphism types: the smaller pomset embeds as a
    /// down-closed, per-channel-initial segment with matching labels and
    /// induced order.
    pub fn leq(&self, other: &LabelledPomset) -> bool {
        let channels: BTreeSet<&String> = self.labels.iter().map(|(c, _)| c).collect();
        for ch in &channels {
            if self.channel_count(ch) > other.channel_count(ch) {
                return false;
            }
        }
        // Map each of our points to the same (channel, rank) point of other.
        let mut map = vec![0usize; self.len()];
        let mut ranks: BTreeMap<&String, usize> = BTreeMap::new();
        for (i, (ch, d)) in self.labels.iter().enumerate() {
            let r = ranks.entry(ch).or_insert(0);
            let j = other.point_of(ch, *r).expect("count checked above");
            if other.labels[j].1 != *d {
                return false;
            }
            map[i] = j;
            *r += 1;
        }
        let image: HashSet<usize> = map.iter().copied().collect();
        // Induced order must agree.
        for a in 0..self.len() {
            for b in 0..self.len() {
                if a != b && self.lt(a, b) != other.lt(map[a], map[b]) {
                    return false;
                }
            }
        }
        // Down-closure in the larger pomset.
        for &(a, b) in &other.strict {
            if image.contains(&b) && !image.contains(&a) {
                return false;
            }
        }
        true
    }
}

/// Read a trace over a stream product as a labelled pomset: each event's
/// label is the word it completes, so its datum is the final symbol.
pub fn pomset_of_trace(t: &Trace, product: &ProductEs) -> Result<LabelledPomset, TraceError> {
    let mut points = Vec::with_capacity(t.len());
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for (i, &e) in t.carrier().iter().enumerate() {
        let ch = product.channels[product.channel_of[e]].clone();
        let label = product.es.label(e);
        let word = &label[ch.len() + 1..];
        let datum = word
            .chars()
            .last()
            .expect("events complete non-empty words");
        points.push((ch, datum));
        pos.insert(e, i);
    }
    let order: Vec<(usize, usize)> = t
        .strict_pairs()
        .iter()
        .map(|&(a, b)| (pos[&a], pos[&b]))
        .collect();
    LabelledPomset::new(points, order)
}

/// Rebuild the trace from a labelled pomset: each point is relabelled with
/// the word spelled by its per-channel predecessors, which is injective, so
/// the points become events of the stream product.
pub fn trace_of_pomset(
    p: &LabelledPomset,
    alphabets: &BTreeMap<String, (BTreeSet<char>, usize)>,
    product: &ProductEs,
) -> Result<Trace, TraceError> {
    let mut event_of_point = vec![0usize; p.len()];
    let mut words: BTreeMap<&str, String> = BTreeMap::new();
    for (i, (ch, d)) in p.labels().iter().enumerate() {
        let (alphabet, depth) = alphabets
            .get(ch)
            .ok_or_else(|| TraceError::UnknownChannel(ch.clone()))?;
        if !alphabet.contains(d) {
            return Err(TraceError::AlphabetMismatch {
                channel: ch.clone(),
                datum: *d,
            });
        }
        let w = words.entry(ch.as_str()).or_default();
        w.push(*d);
        if w.len() > *depth {
            return Err(TraceError::DepthExceeded {
                channel: ch.clone(),
                word: w.clone(),
            });
        }
        let label = format!("{ch}:{w}");
        let e = product
            .es
            .index_of(&label)
            .unwrap_or_else(|| panic!("stream product must contain event {label}"));
        event_of_point[i] = e;
    }
    let carrier: BTreeSet<usize> = event_of_point.iter().copied().collect();
    let order: Vec<(usize, usize)> = p
        .strict_pairs()
        .iter()
        .map(|&(a, b)| (event_of_point[a], event_of_point[b]))
        .collect();
    Trace::validate(product.es.clone(), carrier, order)
}
