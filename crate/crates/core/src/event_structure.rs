//! Prime event structures, their configuration domains, and the product
//! (disjoint-union) construction with projections.
//!
//! Consistency is stored as the family of *minimal forbidden* finite subsets:
//! a set is consistent iff it contains no forbidden set. Subset-closure of
//! consistency and `{e} ∈ Con` hold by representation (forbidden sets have at
//! least two members); the remaining axiom, that consistent sets have
//! consistent down-closures, is validated, not assumed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::bitrel::BitRel;
use crate::poset::{Elem, FinitePointedPoset, PosetError};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsAxiom {
    CausalityPartialOrder,
    SingletonsConsistent,
    DownClosureConsistent,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EsError {
    #[error("event-structure axiom {axiom:?} violated: {witness}")]
    AxiomViolation { axiom: EsAxiom, witness: String },
    #[error("duplicate event label {0:?}")]
    DuplicateEvent(String),
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("invalid channel name {0:?} (must be non-empty, without ':')")]
    BadChannelName(String),
    #[error("{0} events exceed the enumeration bound of {1}")]
    TooManyEvents(usize, usize),
    #[error("{0} configurations exceed the enumeration bound of {1}")]
    TooManyConfigs(usize, usize),
    #[error("not a configuration: {0}")]
    NotAConfiguration(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A set of events of one event structure, stored as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Config(pub BTreeSet<usize>);

impl Config {
    pub fn empty() -> Self {
        Config(BTreeSet::new())
    }

    pub fn from_events(events: impl IntoIterator<Item = usize>) -> Self {
        Config(events.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.contains(&e)
    }

    pub fn is_subset(&self, other: &Config) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Canonical ordering key: (size, sorted index vector).
    fn sort_key(&self) -> (usize, Vec<usize>) {
        (self.0.len(), self.0.iter().copied().collect())
    }
}

/// A prime event structure: events, a causal enabling order, and minimal
/// forbidden sets encoding the consistency predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStructure {
    labels: Vec<String>,
    /// Reflexive-transitive causality; row e is the up-set of e.
    leq: BitRel,
    /// Transpose; row e is ↓e.
    geq: BitRel,
    /// Minimal forbidden sets, each sorted, canonically ordered.
    forbidden: Vec<Vec<usize>>,
    /// For each event, indices into `forbidden` of the sets containing it.
    forbidden_of: Vec<Vec<usize>>,
}

/// Exhaustive validation of the down-closure axiom enumerates subsets; above
/// this many events it falls back to the pairwise-conflict argument or fails.
pub const AXIOM4_EXHAUSTIVE_MAX: usize = 16;

impl EventStructure {
    /// Validate an event structure. `causality` is taken as a generating set
    /// and closed reflexively-transitively; forbidden sets are normalized to
    /// their minimal members.
    pub fn validate(
        labels: Vec<String>,
        causality: impl IntoIterator<Item = (usize, usize)>,
        forbidden: impl IntoIterator<Item = BTreeSet<usize>>,
    ) -> Result<EventStructure, EsError> {
        let n = labels.len();
        {
            let mut seen = BTreeSet::new();
            for l in &labels {
                if !seen.insert(l) {
                    return Err(EsError::DuplicateEvent(l.clone()));
                }
            }
        }
        let mut leq = BitRel::new(n);
        for (x, y) in causality {
            if x >= n || y >= n {
                return Err(EsError::UnknownEvent(format!("index {}", x.max(y))));
            }
            leq.set(x, y);
        }
        leq.reflexive_transitive_close();
        for x in 0..n {
            for y in leq.iter_row(x) {
                if x != y && leq.get(y, x) {
                    return Err(EsError::AxiomViolation {
                        axiom: EsAxiom::CausalityPartialOrder,
                        witness: format!("cycle through {} and {}", labels[x], labels[y]),
                    });
                }
            }
        }

        let mut sets: Vec<Vec<usize>> = Vec::new();
        for f in forbidden {
            for &e in &f {
                if e >= n {
                    return Err(EsError::UnknownEvent(format!("index {e}")));
                }
            }
            if f.len() < 2 {
                return Err(EsError::AxiomViolation {
                    axiom: EsAxiom::SingletonsConsistent,
                    witness: format!(
                        "forbidden set {:?} has fewer than two events",
                        f.iter().map(|&e| &labels[e]).collect::<Vec<_>>()
                    ),
                });
            }
            sets.push(f.into_iter().collect());
        }
        // Keep only minimal sets; duplicates collapse too.
        sets.sort_by_key(|s| (s.len(), s.clone()));
        let mut minimal: Vec<Vec<usize>> = Vec::new();
        for s in sets {
            let redundant = minimal
                .iter()
                .any(|m| m.iter().all(|e| s.binary_search(e).is_ok()));
            if !redundant {
                minimal.push(s);
            }
        }

        let es = Self::assemble(labels, leq, minimal);
        es.check_down_closure_axiom()?;
        Ok(es)
    }

    fn assemble(labels: Vec<String>, leq: BitRel, forbidden: Vec<Vec<usize>>) -> EventStructure {
        let n = labels.len();
        let mut forbidden_of = vec![Vec::new(); n];
        for (i, f) in forbidden.iter().enumerate() {
            for &e in f {
                forbidden_of[e].push(i);
            }
        }
        let geq = leq.transpose();
        EventStructure {
            labels,
            leq,
            geq,
            forbidden,
            forbidden_of,
        }
    }

    /// Constructor for structures whose axioms hold by construction (stream
    /// and product structures). Validated exhaustively at small scale in
    /// tests and by debug assertions.
    pub(crate) fn from_parts_trusted(
        labels: Vec<String>,
        leq: BitRel,
        forbidden: Vec<Vec<usize>>,
    ) -> EventStructure {
        let es = Self::assemble(labels, leq, forbidden);
        debug_assert!(
            es.len() > AXIOM4_EXHAUSTIVE_MAX || es.check_down_closure_axiom().is_ok(),
            "trusted construction broke the down-closure axiom"
        );
        es
    }

    /// A consistent ⇒ ↓A consistent. Exhaustive for small structures; for
    /// larger ones with pairwise forbidden sets only, equivalent to upward
    /// conflict heredity, which is checked directly.
    fn check_down_closure_axiom(&self) -> Result<(), EsError> {
        let n = self.len();
        if n <= AXIOM4_EXHAUSTIVE_MAX {
            for mask in 0u64..(1u64 << n) {
                let set: Vec<usize> = (0..n).filter(|&e| mask & (1 << e) != 0).collect();
                if !self.set_consistent(&set) {
                    continue;
                }
                let closure = self.down_closure_vec(&set);
                if !self.set_consistent(&closure) {
                    return Err(EsError::AxiomViolation {
                        axiom: EsAxiom::DownClosureConsistent,
                        witness: format!(
                            "{:?} is consistent but its down-closure {:?} is not",
                            set.iter().map(|&e| &self.labels[e]).collect::<Vec<_>>(),
                            closure.iter().map(|&e| &self.labels[e]).collect::<Vec<_>>()
                        ),
                    });
                }
            }
            return Ok(());
        }
        if self.forbidden.iter().all(|f| f.len() == 2) {
            // {a,b} forbidden must be inherited by every {a',b'} above it.
            for f in &self.forbidden {
                let (a, b) = (f[0], f[1]);
                for a1 in self.leq.iter_row(a) {
                    for b1 in self.leq.iter_row(b) {
                        if a1 == b1 {
                            return Err(EsError::AxiomViolation {
                                axiom: EsAxiom::DownClosureConsistent,
                                witness: format!(
                                    "{} and {} conflict below {}",
                                    self.labels[a], self.labels[b], self.labels[a1]
                                ),
                            });
                        }
                        if !self.pair_forbidden(a1, b1) {
                            return Err(EsError::AxiomViolation {
                                axiom: EsAxiom::DownClosureConsistent,
                                witness: format!(
                                    "conflict {}#{} not inherited at {}#{}",
                                    self.labels[a],
                                    self.labels[b],
                                    self.labels[a1],
                                    self.labels[b1]
                                ),
                            });
                        }
                    }
                }
            }
            return Ok(());
        }
        Err(EsError::TooManyEvents(n, AXIOM4_EXHAUSTIVE_MAX))
    }

    fn pair_forbidden(&self, a: usize, b: usize) -> bool {
        self.forbidden_of[a]
            .iter()
            .any(|&i| self.forbidden[i] == [a.min(b), a.max(b)])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, e: usize) -> &str {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn causally_leq(&self, x: usize, y: usize) -> bool {
        self.leq.get(x, y)
    }

    pub fn predecessors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.geq.iter_row(e)
    }

    pub fn successors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.leq.iter_row(e)
    }

    pub fn forbidden_sets(&self) -> &[Vec<usize>] {
        &self.forbidden
    }

    pub fn forbidden_containing(&self, e: usize) -> &[usize] {
        &self.forbidden_of[e]
    }

    pub fn set_consistent(&self, events: &[usize]) -> bool {
        let set: HashSet<usize> = events.iter().copied().collect();
        let mut seen = HashSet::new();
        for &e in events {
            for &fi in &self.forbidden_of[e] {
                if seen.insert(fi) && self.forbidden[fi].iter().all(|x| set.contains(x)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn down_closure_vec(&self, events: &[usize]) -> Vec<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        for &e in events {
            out.extend(self.geq.iter_row(e));
        }
        out.into_iter().collect()
    }

    pub fn is_down_closed(&self, cfg: &Config) -> bool {
        cfg.0
            .iter()
            .all(|&e| self.geq.iter_row(e).all(|p| cfg.contains(p)))
    }

    /// Down-closed and consistent.
    pub fn validate_config(&self, cfg: &Config) -> Result<(), EsError> {
        for &e in &cfg.0 {
            if e >= self.len() {
                return Err(EsError::UnknownEvent(format!("index {e}")));
            }
            if let Some(p) = self.geq.iter_row(e).find(|p| !cfg.contains(*p)) {
                return Err(EsError::NotAConfiguration(format!(
                    "{} requires {}",
                    self.labels[e], self.labels[p]
                )));
            }
        }
        let as_vec: Vec<usize> = cfg.0.iter().copied().collect();
        if !self.set_consistent(&as_vec) {
            let f = self
                .forbidden
                .iter()
                .find(|f| f.iter().all(|e| cfg.contains(*e)))
                .expect("inconsistent set contains a forbidden set");
            return Err(EsError::NotAConfiguration(format!(
                "contains forbidden set {:?}",
                f.iter().map(|&e| &self.labels[e]).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    /// Events that can extend `cfg` by one step: not present, causally
    /// enabled, and consistent with everything present.
    pub fn enabled_events(&self, cfg: &Config) -> Vec<usize> {
        (0..self.len())
            .filter(|&e| {
                !cfg.contains(e)
                    && self.geq.iter_row(e).all(|p| p == e || cfg.contains(p))
                    && self.forbidden_of[e].iter().all(|&fi| {
                        !self.forbidden[fi]
                            .iter()
                            .all(|&x| x == e || cfg.contains(x))
                    })
            })
            .collect()
    }

    /// All configurations, grown breadth-first from the empty set. The cost
    /// is proportional to the number of configurations, not to 2^events.
    pub fn configurations(&self, max_configs: usize) -> Result<Vec<Config>, EsError> {
        let mut seen: HashSet<Config> = HashSet::new();
        let mut queue: Vec<Config> = vec![Config::empty()];
        seen.insert(Config::empty());
        let mut head = 0;
        while head < queue.len() {
            let cfg = queue[head].clone();
            head += 1;
            for e in self.enabled_events(&cfg) {
                let mut next = cfg.clone();
                next.0.insert(e);
                if seen.insert(next.clone()) {
                    if seen.len() > max_configs {
                        return Err(EsError::TooManyConfigs(seen.len(), max_configs));
                    }
                    queue.push(next);
                }
            }
        }
        queue.sort_by_key(|c| c.sort_key());
        Ok(queue)
    }

    pub fn config_label(&self, cfg: &Config) -> String {
        let mut s = String::from("{");
        for (i, &e) in cfg.0.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&self.labels[e]);
        }
        s.push('}');
        s
    }
}

/// The configuration domain of an event structure: all configurations ordered
/// by inclusion, with the one-step extension table used by trace walkers.
#[derive(Debug, Clone)]
pub struct ConfigPoset {
    pub es: Arc<EventStructure>,
    pub configs: Vec<Config>,
    pub poset: Arc<FinitePointedPoset>,
    index: HashMap<Config, usize>,
    /// For each configuration, the covers above it as (added event, target).
    pub extensions: Vec<Vec<(usize, usize)>>,
}

impl ConfigPoset {
    pub fn build(es: Arc<EventStructure>, configs: Vec<Config>) -> Result<ConfigPoset, EsError> {
        let m = configs.len();
        let labels: Vec<String> = configs.iter().map(|c| es.config_label(c)).collect();
        let mut rel = BitRel::new(m);
        for (i, a) in configs.iter().enumerate() {
            for (j, b) in configs.iter().enumerate() {
                if a.is_subset(b) {
                    rel.set(i, j);
                }
            }
        }
        let poset = Arc::new(FinitePointedPoset::from_bitrel(labels, rel)?);
        let index: HashMap<Config, usize> = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let mut extensions = vec![Vec::new(); m];
        for (i, cfg) in configs.iter().enumerate() {
            for e in es.enabled_events(cfg) {
                let mut next = cfg.clone();
                next.0.insert(e);
                if let Some(&j) = index.get(&next) {
                    extensions[i].push((e, j));
                }
            }
        }
        Ok(ConfigPoset {
            es,
            configs,
            poset,
            index,
            extensions,
        })
    }

    pub fn enumerate(es: Arc<EventStructure>, max_configs: usize) -> Result<ConfigPoset, EsError> {
        let configs = es.configurations(max_configs)?;
        Self::build(es, configs)
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn elem_of(&self, cfg: &Config) -> Option<Elem> {
        self.index.get(cfg).map(|&i| Elem(i))
    }

    pub fn index_of(&self, cfg: &Config) -> Option<usize> {
        self.index.get(cfg).copied()
    }

    pub fn config(&self, i: usize) -> &Config {
        &self.configs[i]
    }

    pub fn bottom_index(&self) -> usize {
        self.poset.bottom().0
    }

    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        self.poset.leq(Elem(a), Elem(b))
    }

    pub fn is_maximal_idx(&self, a: usize) -> bool {
        self.poset.is_maximal(Elem(a))
    }
}

/// All configurations of `es`, enumerated and returned in canonical order.
pub fn configurations(es: &EventStructure, max_configs: usize) -> Result<Vec<Config>, EsError> {
    es.configurations(max_configs)
}

/// The configuration poset of `es`. Covers add exactly one event.
pub fn config_poset(es: &Arc<EventStructure>, max_configs: usize) -> Result<ConfigPoset, EsError> {
    ConfigPoset::enumerate(es.clone(), max_configs)
}

/// A named family of event structures, one per channel.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    pub channels: BTreeMap<String, Arc<EventStructure>>,
}

impl ChannelFamily {
    pub fn new(
        channels: impl IntoIterator<Item = (String, Arc<EventStructure>)>,
    ) -> Result<Self, EsError> {
        let mut map = BTreeMap::new();
        for (name, es) in channels {
            if name.is_empty() || name.contains(':') {
                return Err(EsError::BadChannelName(name));
            }
            map.insert(name, es);
        }
        Ok(ChannelFamily { channels: map })
    }

    pub fn get(&self, name: &str) -> Result<&Arc<EventStructure>, EsError> {
        self.channels
            .get(name)
            .ok_or_else(|| EsError::UnknownChannel(name.to_string()))
    }
}

/// Disjoint-union product of the event structures of a sort. Events are
/// channel-tagged, causality stays within channels, and a set is forbidden
/// iff some per-channel slice is forbidden.
#[derive(Debug, Clone)]
pub struct ProductEs {
    pub es: Arc<EventStructure>,
    /// Channel names of the sort, sorted.
    pub channels: Vec<String>,
    /// Event index → position in `channels`.
    pub channel_of: Vec<usize>,
    /// Event index → event index in the channel's own structure.
    pub base_of: Vec<usize>,
    index: HashMap<(usize, usize), usize>,
}

impl ProductEs {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn event_of(&self, channel_pos: usize, base: usize) -> Option<usize> {
        self.index.get(&(channel_pos, base)).copied()
    }

    pub fn channel_pos(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    /// Event translation table into the product of a subsort.
    pub fn event_map_to(&self, sub: &ProductEs) -> Vec<Option<usize>> {
        (0..self.es.len())
            .map(|e| {
                let ch = &self.channels[self.channel_of[e]];
                sub.channel_pos(ch)
                    .and_then(|pos| sub.event_of(pos, self.base_of[e]))
            })
            .collect()
    }
}

/// Build the product event structure of the named channels. Tagged events are
/// ordered lexicographically by (channel name, event label).
pub fn product_es(family: &ChannelFamily, sort: &BTreeSet<String>) -> Result<ProductEs, EsError> {
    let mut tagged: Vec<(String, String, usize, usize)> = Vec::new(); // (channel, label, chan pos, base)
    let channels: Vec<String> = sort.iter().cloned().collect();
    for (pos, name) in channels.iter().enumerate() {
        let es = family.get(name)?;
        for b in 0..es.len() {
            tagged.push((name.clone(), es.label(b).to_string(), pos, b));
        }
    }
    tagged.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));

    let n = tagged.len();
    let labels: Vec<String> = tagged
        .iter()
        .map(|(ch, l, _, _)| format!("{ch}:{l}"))
        .collect();
    let channel_of: Vec<usize> = tagged.iter().map(|t| t.2).collect();
    let base_of: Vec<usize> = tagged.iter().map(|t| t.3).collect();
    let index: HashMap<(usize, usize), usize> = tagged
        .iter()
        .enumerate()
        .map(|(i, t)| ((t.2, t.3), i))
        .collect();

    let mut leq = BitRel::new(n);
    for i in 0..n {
        let es = family.get(&channels[channel_of[i]])?;
        for j in 0..n {
            if channel_of[i] == channel_of[j] && es.causally_leq(base_of[i], base_of[j]) {
                leq.set(i, j);
            }
        }
    }
    let mut forbidden: Vec<Vec<usize>> = Vec::new();
    for (pos, name) in channels.iter().enumerate() {
        let es = family.get(name)?;
        for f in es.forbidden_sets() {
            let mut tagged_set: Vec<usize> = f.iter().map(|&b| index[&(pos, b)]).collect();
            tagged_set.sort_unstable();
            forbidden.push(tagged_set);
        }
    }
    forbidden.sort_by_key(|s| (s.len(), s.clone()));

    let es = Arc::new(EventStructure::from_parts_trusted(labels, leq, forbidden));
    Ok(ProductEs {
        es,
        channels,
        channel_of,
        base_of,
        index,
    })
}

/// Keep only the events of the target subsort.
pub fn project_config(src: &ProductEs, x: &Config, dst: &ProductEs) -> Config {
    let map = src.event_map_to(dst);
    Config(x.0.iter().filter_map(|&e| map[e]).collect())
}

/// The value poset of a sort: the product of the per-channel configuration
/// posets in mixed-radix layout, materialized as a validated pointed poset.
#[derive(Debug, Clone)]
pub struct ValuePoset {
    pub channels: Vec<String>,
    pub parts: Vec<Arc<ConfigPoset>>,
    /// Display label of each per-channel configuration (a word for stream
    /// channels, a set for raw ones).
    pub display: Vec<Vec<String>>,
    pub poset: Arc<FinitePointedPoset>,
    strides: Vec<usize>,
}

impl ValuePoset {
    pub fn build(
        channels: Vec<String>,
        parts: Vec<Arc<ConfigPoset>>,
        display: Vec<Vec<String>>,
        max_size: usize,
    ) -> Result<ValuePoset, EsError> {
        assert_eq!(channels.len(), parts.len());
        let mut size: usize = 1;
        for p in &parts {
            size = size.saturating_mul(p.len());
        }
        if size > max_size {
            return Err(EsError::TooManyConfigs(size, max_size));
        }
        // Mixed radix, last channel fastest.
        let k = parts.len();
        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * parts[i + 1].len();
        }

        let mut labels = Vec::with_capacity(size);
        for idx in 0..size {
            labels.push(Self::label_of(&channels, &display, &strides, &parts, idx));
        }

        // leq rows: intersection over channels of the per-coordinate up-masks.
        let words = size.div_ceil(64).max(1);
        let mut upmask: Vec<Vec<Vec<u64>>> = Vec::with_capacity(k);
        for (ci, part) in parts.iter().enumerate() {
            let mut per_cfg = vec![vec![0u64; words]; part.len()];
            for idx in 0..size {
                let coord = (idx / strides[ci]) % part.len();
                // idx is above every value whose ci-coordinate is ⊑ coord.
                for (c, mask) in per_cfg.iter_mut().enumerate() {
                    if part.leq_idx(c, coord) {
                        mask[idx / 64] |= 1u64 << (idx % 64);
                    }
                }
            }
            upmask.push(per_cfg);
        }
        let mut rel = BitRel::new(size);
        let mut buf = vec![0u64; words];
        for idx in 0..size {
            for w in buf.iter_mut() {
                *w = !0u64;
            }
            for (ci, part) in parts.iter().enumerate() {
                let coord = (idx / strides[ci]) % part.len();
                for (w, m) in buf.iter_mut().zip(&upmask[ci][coord]) {
                    *w &= m;
                }
            }
            let row = rel.row_mut(idx);
            row.copy_from_slice(&buf);
            // Mask off bits beyond the element count.
            if !size.is_multiple_of(64) {
                let last = row.len() - 1;
                row[last] &= (1u64 << (size % 64)) - 1;
            }
        }
        let poset = Arc::new(FinitePointedPoset::from_bitrel(labels, rel)?);
        debug_assert_eq!(poset.bottom().0, 0, "empty configs sort first");
        Ok(ValuePoset {
            channels,
            parts,
            display,
            poset,
            strides,
        })
    }

    fn label_of(
        channels: &[String],
        display: &[Vec<String>],
        strides: &[usize],
        parts: &[Arc<ConfigPoset>],
        idx: usize,
    ) -> String {
        if channels.is_empty() {
            return "∅".to_string();
        }
        let mut out = String::new();
        for (ci, ch) in channels.iter().enumerate() {
            if ci > 0 {
                out.push(';');
            }
            let coord = (idx / strides[ci]) % parts[ci].len();
            out.push_str(ch);
            out.push('=');
            out.push_str(&display[ci][coord]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn stride(&self, channel_pos: usize) -> usize {
        self.strides[channel_pos]
    }

    pub fn coord(&self, idx: usize, channel_pos: usize) -> usize {
        (idx / self.strides[channel_pos]) % self.parts[channel_pos].len()
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        (0..self.parts.len()).map(|c| self.coord(idx, c)).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.poset.leq(Elem(a), Elem(b))
    }

    pub fn label(&self, idx: usize) -> &str {
        self.poset.label(Elem(idx))
    }

    /// Positions of `sub.channels` inside `self.channels`.
    pub fn channel_positions(&self, sub: &ValuePoset) -> Vec<usize> {
        sub.channels
            .iter()
            .map(|c| {
                self.channels
                    .iter()
                    .position(|x| x == c)
                    .expect("subsort channels are a subset")
            })
            .collect()
    }

    /// Project a value onto a subsort's value poset.
    pub fn project(&self, idx: usize, sub: &ValuePoset) -> usize {
        let pos = self.channel_positions(sub);
        let coords: Vec<usize> = pos.iter().map(|&p| self.coord(idx, p)).collect();
        sub.index(&coords)
    }

    /// A value is saturated when some coordinate is maximal in its truncated
    /// configuration poset, so the finite model cannot grow it further.
    pub fn is_saturated(&self, idx: usize) -> bool {
        (0..self.parts.len()).any(|c| self.parts[c].is_maximal_idx(self.coord(idx, c)))
    }

    pub fn per_channel_display(&self, idx: usize) -> Vec<(String, String)> {
        (0..self.parts.len())
            .map(|c| {
                (
                    self.channels[c].clone(),
                    self.display[c][self.coord(idx, c)].clone(),
                )
            })
            .collect()
    }
}

/// Check that configurations of the product structure correspond one-to-one,
/// and order-compatibly, with tuples of per-channel configurations under the
/// projection maps.
pub fn check_product_iso(
    family: &ChannelFamily,
    sort: &BTreeSet<String>,
    max_configs: usize,
) -> Result<Verdict<String>, EsError> {
    let product = product_es(family, sort)?;
    let whole = ConfigPoset::enumerate(product.es.clone(), max_configs)?;

    let mut parts = Vec::new();
    for name in sort {
        let es = family.get(name)?;
        parts.push(ConfigPoset::enumerate(es.clone(), max_configs)?);
    }

    // Map each product configuration to its tuple of per-channel slices.
    let mut tuple_of = Vec::with_capacity(whole.len());
    for cfg in &whole.configs {
        let mut tuple = Vec::with_capacity(parts.len());
        for (pos, part) in parts.iter().enumerate() {
            let slice = Config(
                cfg.0
                    .iter()
                    .filter(|&&e| product.channel_of[e] == pos)
                    .map(|&e| product.base_of[e])
                    .collect(),
            );
            match part.index_of(&slice) {
                Some(i) => tuple.push(i),
                None => {
                    return Ok(Verdict::Fail {
                        witness: format!(
                            "projection of {} onto {} is not a configuration",
                            product.es.config_label(cfg),
                            product.channels[pos]
                        ),
                    })
                }
            }
        }
        tuple_of.push(tuple);
    }

    // Bijectivity: counts match and tuples are pairwise distinct.
    let expected: usize = parts.iter().map(|p| p.len()).product();
    if whole.len() != expected {
        return Ok(Verdict::Fail {
            witness: format!(
                "{} product configurations vs {} tuples",
                whole.len(),
                expected
            ),
        });
    }
    let distinct: HashSet<&Vec<usize>> = tuple_of.iter().collect();
    if distinct.len() != whole.len() {
        return Ok(Verdict::Fail {
            witness: "projection tuple map is not injective".to_string(),
        });
    }

    // Order-isomorphism, both directions.
    for i in 0..whole.len() {
        for j in 0..whole.len() {
            let lhs = whole.leq_idx(i, j);
            let rhs = tuple_of[i]
                .iter()
                .zip(&tuple_of[j])
                .enumerate()
                .all(|(c, (a, b))| parts[c].leq_idx(*a, *b));
            if lhs != rhs {
                return Ok(Verdict::Fail {
                    witness: format!(
                        "order disagrees at {} vs {}",
                        whole.es.config_label(whole.config(i)),
                        whole.es.config_label(whole.config(j))
                    ),
                });
            }
        }
    }
    Ok(Verdict::Pass)
}
