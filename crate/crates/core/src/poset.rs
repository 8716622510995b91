//! Finite pointed posets and the order-theoretic machinery built on them:
//! covering relations, covering sequences, least fixpoints of monotone
//! endomaps, fixpoint approximation chains, incrementality checks and
//! chain-induced causality.
//!
//! Every element of a finite poset is compact, so these structures stand in
//! for algebraic cpos at desk scale: joins of directed sets, covering paths
//! and fixpoint iterations are all decided by enumeration.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::bitrel::BitRel;
use crate::verdict::Verdict;

/// Index of an element in a [`FinitePointedPoset`]. The index order is the
/// canonical tie-break order: constructors insert elements deterministically
/// and every operation that must pick among incomparable candidates picks the
/// least index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderAxiom {
    Reflexivity,
    Transitivity,
    Antisymmetry,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("not a partial order: {axiom:?} fails at ({x}, {y})")]
    NotAPartialOrder {
        axiom: OrderAxiom,
        x: String,
        y: String,
    },
    #[error("no least element")]
    NoLeastElement,
    #[error("poset has no elements")]
    Empty,
    #[error("duplicate element label {0:?}")]
    DuplicateElement(String),
    #[error("relation mentions element {0}, out of range")]
    ElementOutOfRange(usize),
    #[error("unknown element label {0:?}")]
    UnknownElement(String),
    #[error("map is not an endomap")]
    NotEndomap,
    #[error("map is not total: no image for {0}")]
    NotTotal(String),
    #[error("map not monotone: {x} ⊑ {y} but images are unordered")]
    NotMonotone { x: String, y: String },
    #[error("map not strict: bottom is not sent to bottom")]
    NotStrict,
    #[error("sequence is empty")]
    EmptySequence,
    #[error("covering sequence invalid at step {index}: {reason}")]
    BadCoveringSequence { index: usize, reason: String },
    #[error("chain not ascending at index {0}")]
    ChainNotAscending(usize),
    #[error("no covering path from {from} to {to}")]
    NotIncremental { from: String, to: String },
    #[error("element {child} does not lie below {parent}")]
    NotBelow { child: String, parent: String },
    #[error("enumeration exceeded budget of {0}")]
    BudgetExceeded(usize),
}

/// A finite partial order with a least element. All elements are compact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePointedPoset {
    labels: Vec<String>,
    /// `leq.get(x, y)` ⇔ x ⊑ y; row x is the up-set of x.
    leq: BitRel,
    /// Transpose of `leq`; row x is the down-set of x.
    geq: BitRel,
    bottom: Elem,
}

impl FinitePointedPoset {
    /// Validate an explicit relation. `leq` must already be reflexive,
    /// transitive and antisymmetric; nothing is closed implicitly.
    pub fn validate(
        labels: Vec<String>,
        leq: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PosetError> {
        let n = labels.len();
        let mut rel = BitRel::new(n);
        for (x, y) in leq {
            if x >= n {
                return Err(PosetError::ElementOutOfRange(x));
            }
            if y >= n {
                return Err(PosetError::ElementOutOfRange(y));
            }
            rel.set(x, y);
        }
        Self::from_bitrel(labels, rel)
    }

    /// Label-based convenience constructor for hand-written instances.
    pub fn validate_labeled(labels: &[&str], leq: &[(&str, &str)]) -> Result<Self, PosetError> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let idx = |l: &str| -> Result<usize, PosetError> {
            owned
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| PosetError::UnknownElement(l.to_string()))
        };
        let mut pairs = Vec::with_capacity(leq.len());
        for (x, y) in leq {
            pairs.push((idx(x)?, idx(y)?));
        }
        Self::validate(owned, pairs)
    }

    /// Build from a computed relation, checking the partial-order axioms and
    /// locating the least element.
    pub fn from_bitrel(labels: Vec<String>, leq: BitRel) -> Result<Self, PosetError> {
        let n = labels.len();
        if n == 0 {
            return Err(PosetError::Empty);
        }
        assert_eq!(leq.len(), n, "relation size must match element count");
        {
            let mut seen = BTreeSet::new();
            for l in &labels {
                if !seen.insert(l) {
                    return Err(PosetError::DuplicateElement(l.clone()));
                }
            }
        }
        if let Some(x) = (0..n).find(|&x| !leq.get(x, x)) {
            return Err(PosetError::NotAPartialOrder {
                axiom: OrderAxiom::Reflexivity,
                x: labels[x].clone(),
                y: labels[x].clone(),
            });
        }
        for x in 0..n {
            for y in leq.iter_row(x) {
                if x != y && leq.get(y, x) {
                    return Err(PosetError::NotAPartialOrder {
                        axiom: OrderAxiom::Antisymmetry,
                        x: labels[x].clone(),
                        y: labels[y].clone(),
                    });
                }
                // x ⊑ y forces row(y) ⊆ row(x).
                if !leq.row_subset(y, x) {
                    let z = leq.row_diff_first(y, x).expect("nonempty difference");
                    return Err(PosetError::NotAPartialOrder {
                        axiom: OrderAxiom::Transitivity,
                        x: labels[x].clone(),
                        y: labels[z].clone(),
                    });
                }
            }
        }
        let full = n;
        let bottom = (0..n)
            .find(|&x| leq.row_count(x) == full)
            .ok_or(PosetError::NoLeastElement)?;
        let geq = leq.transpose();
        Ok(FinitePointedPoset {
            labels,
            leq,
            geq,
            bottom: Elem(bottom),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a validated poset always has a bottom element
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.len()).map(Elem)
    }

    pub fn label(&self, e: Elem) -> &str {
        &self.labels[e.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<Elem> {
        self.labels.iter().position(|l| l == label).map(Elem)
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    #[inline]
    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.leq.get(x.0, y.0)
    }

    #[inline]
    pub fn lt(&self, x: Elem, y: Elem) -> bool {
        x != y && self.leq(x, y)
    }

    /// Elements above `x`, ascending.
    pub fn up_set(&self, x: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.leq.iter_row(x.0).map(Elem)
    }

    /// Elements below `x` (the compact approximations K(x)), ascending.
    pub fn down_set(&self, x: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.geq.iter_row(x.0).map(Elem)
    }

    pub fn down_count(&self, x: Elem) -> usize {
        self.geq.row_count(x.0)
    }

    pub fn is_maximal(&self, x: Elem) -> bool {
        self.leq.row_count(x.0) == 1
    }

    /// x ≺ y: x strictly below y with nothing strictly between. One atomic
    /// computation step.
    pub fn is_cover(&self, x: Elem, y: Elem) -> bool {
        if !self.lt(x, y) {
            return false;
        }
        // Nothing in up(x) ∩ down(y) besides x and y themselves.
        let up = self.leq.row(x.0);
        let down = self.geq.row(y.0);
        for (w, (a, b)) in up.iter().zip(down).enumerate() {
            let mut both = a & b;
            if w == x.0 / 64 {
                both &= !(1u64 << (x.0 % 64));
            }
            if w == y.0 / 64 {
                both &= !(1u64 << (y.0 % 64));
            }
            if both != 0 {
                return false;
            }
        }
        true
    }

    /// All covering pairs, in canonical order.
    pub fn covers(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for x in self.elements() {
            for y in self.up_set(x) {
                if self.is_cover(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Covering pairs whose members both lie below `d`: atomic steps at some
    /// finite stage in the computation of `d`.
    pub fn relative_covers(&self, d: Elem) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for x in self.down_set(d) {
            for y in self.down_set(d) {
                if self.is_cover(x, y) {
                    out.push((x, y));
                }
            }
        }
        out.sort();
        out
    }

    /// Least element of `{z | x ≺ z ⊑ target}` in canonical order, used to
    /// extend covering paths deterministically.
    fn least_cover_towards(&self, x: Elem, target: Elem) -> Option<Elem> {
        // Minimal elements of the interval (x, target] are exactly the covers
        // of x inside it.
        let interval: Vec<usize> = self
            .leq
            .iter_row(x.0)
            .filter(|&z| z != x.0 && self.leq.get(z, target.0))
            .collect();
        'cand: for &z in &interval {
            for &w in &interval {
                if w != z && self.leq.get(w, z) {
                    continue 'cand;
                }
            }
            return Some(Elem(z));
        }
        None
    }
}

/// A total, monotone map between finite pointed posets, tabulated pointwise.
/// On finite posets monotone and continuous coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneMap {
    domain: Arc<FinitePointedPoset>,
    codomain: Arc<FinitePointedPoset>,
    table: Vec<Elem>,
}

impl MonotoneMap {
    pub fn new(
        domain: Arc<FinitePointedPoset>,
        codomain: Arc<FinitePointedPoset>,
        table: Vec<Elem>,
    ) -> Result<Self, PosetError> {
        if table.len() != domain.len() {
            let missing = table.len().min(domain.len());
            return Err(PosetError::NotTotal(
                domain.labels.get(missing).cloned().unwrap_or_default(),
            ));
        }
        for (x, y) in table.iter().enumerate() {
            if y.0 >= codomain.len() {
                return Err(PosetError::ElementOutOfRange(y.0));
            }
            let _ = x;
        }
        for x in domain.elements() {
            for y in domain.up_set(x) {
                if !codomain.leq(table[x.0], table[y.0]) {
                    return Err(PosetError::NotMonotone {
                        x: domain.label(x).to_string(),
                        y: domain.label(y).to_string(),
                    });
                }
            }
        }
        Ok(MonotoneMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn identity(poset: Arc<FinitePointedPoset>) -> Self {
        let table = poset.elements().collect();
        MonotoneMap {
            domain: poset.clone(),
            codomain: poset,
            table,
        }
    }

    pub fn constant(
        domain: Arc<FinitePointedPoset>,
        codomain: Arc<FinitePointedPoset>,
        value: Elem,
    ) -> Self {
        let table = vec![value; domain.len()];
        MonotoneMap {
            domain,
            codomain,
            table,
        }
    }

    pub fn domain(&self) -> &Arc<FinitePointedPoset> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FinitePointedPoset> {
        &self.codomain
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.table[x.0]
    }

    pub fn is_endo(&self) -> bool {
        Arc::ptr_eq(&self.domain, &self.codomain) || *self.domain == *self.codomain
    }

    pub fn is_strict(&self) -> bool {
        self.table[self.domain.bottom().0] == self.codomain.bottom()
    }

    pub fn compose(&self, after: &MonotoneMap) -> Result<MonotoneMap, PosetError> {
        if *self.codomain != *after.domain {
            return Err(PosetError::NotEndomap);
        }
        let table = self.table.iter().map(|&y| after.apply(y)).collect();
        Ok(MonotoneMap {
            domain: self.domain.clone(),
            codomain: after.codomain.clone(),
            table,
        })
    }
}

/// Least fixpoint of a monotone endomap: the first repeated Kleene iterate
/// from bottom. Termination is guaranteed because the iterates ascend in a
/// finite poset.
pub fn lfp_iterate(f: &MonotoneMap) -> Result<Elem, PosetError> {
    if !f.is_endo() {
        return Err(PosetError::NotEndomap);
    }
    let mut x = f.domain.bottom();
    loop {
        let y = f.apply(x);
        if y == x {
            return Ok(x);
        }
        x = y;
    }
}

/// An ascending chain of (compact) elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactChain {
    links: Vec<Elem>,
}

impl CompactChain {
    pub fn new(poset: &FinitePointedPoset, links: Vec<Elem>) -> Result<Self, PosetError> {
        if links.is_empty() {
            return Err(PosetError::EmptySequence);
        }
        for (i, pair) in links.windows(2).enumerate() {
            if !poset.leq(pair[0], pair[1]) {
                return Err(PosetError::ChainNotAscending(i));
            }
        }
        Ok(CompactChain { links })
    }

    pub fn links(&self) -> &[Elem] {
        &self.links
    }

    pub fn last(&self) -> Elem {
        *self.links.last().expect("chains are non-empty")
    }
}

/// Fixpoint approximation chain for a monotone endomap: starts at bottom,
/// each link lies below the image of the previous one, and the join (here:
/// the last link) is the least fixpoint. The Kleene iterates satisfy all
/// three conditions on a finite poset.
pub fn jung_chain(f: &MonotoneMap) -> Result<CompactChain, PosetError> {
    if !f.is_endo() {
        return Err(PosetError::NotEndomap);
    }
    let mut links = vec![f.domain.bottom()];
    loop {
        let last = *links.last().expect("non-empty");
        let next = f.apply(last);
        if next == last {
            break;
        }
        links.push(next);
    }
    Ok(CompactChain { links })
}

/// A bottom-rooted sequence of consecutive covering steps: a step-by-step
/// computation history.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoveringSequence {
    steps: Vec<Elem>,
}

impl CoveringSequence {
    pub fn new(poset: &FinitePointedPoset, steps: Vec<Elem>) -> Result<Self, PosetError> {
        if steps.is_empty() {
            return Err(PosetError::EmptySequence);
        }
        if steps[0] != poset.bottom() {
            return Err(PosetError::BadCoveringSequence {
                index: 0,
                reason: format!(
                    "must start at bottom {}, found {}",
                    poset.label(poset.bottom()),
                    poset.label(steps[0])
                ),
            });
        }
        for (i, pair) in steps.windows(2).enumerate() {
            if !poset.is_cover(pair[0], pair[1]) {
                return Err(PosetError::BadCoveringSequence {
                    index: i + 1,
                    reason: format!(
                        "{} does not cover {}",
                        poset.label(pair[1]),
                        poset.label(pair[0])
                    ),
                });
            }
        }
        Ok(CoveringSequence { steps })
    }

    pub fn steps(&self) -> &[Elem] {
        &self.steps
    }

    pub fn last(&self) -> Elem {
        *self.steps.last().expect("sequences are non-empty")
    }

    pub fn is_prefix_of(&self, other: &CoveringSequence) -> bool {
        other.steps.len() >= self.steps.len() && other.steps[..self.steps.len()] == self.steps[..]
    }
}

/// Refine an ascending chain into a covering sequence that visits every chain
/// link in order. Gaps are filled with the least admissible cover at each
/// step, so the output is reproducible across runs.
pub fn refine_chain(
    chain: &CompactChain,
    poset: &FinitePointedPoset,
) -> Result<CoveringSequence, PosetError> {
    let mut steps = vec![poset.bottom()];
    for &link in chain.links() {
        loop {
            let cur = *steps.last().expect("non-empty");
            if cur == link {
                break;
            }
            let next =
                poset
                    .least_cover_towards(cur, link)
                    .ok_or_else(|| PosetError::NotIncremental {
                        from: poset.label(cur).to_string(),
                        to: poset.label(link).to_string(),
                    })?;
            steps.push(next);
        }
    }
    let seq = CoveringSequence { steps };
    debug_assert!(CoveringSequence::new(poset, seq.steps.clone()).is_ok());
    Ok(seq)
}

/// Check that every pair b ⊑ c is connected by a covering path. Finite posets
/// always satisfy this; the check is kept so that model instances declare and
/// test the property through one interface.
pub fn check_incremental_domain(poset: &FinitePointedPoset) -> Verdict<(Elem, Elem)> {
    let covers = poset.covers();
    for c in poset.elements() {
        // Reverse reachability from c along covering edges inside ↓c.
        let mut reached = vec![false; poset.len()];
        reached[c.0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for &(x, y) in &covers {
                if reached[y.0] && !reached[x.0] && poset.leq(x, c) {
                    reached[x.0] = true;
                    changed = true;
                }
            }
        }
        for b in poset.down_set(c) {
            if !reached[b.0] {
                return Verdict::Fail { witness: (b, c) };
            }
        }
    }
    Verdict::Pass
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismFailure {
    /// A relative cover (b, c) below d whose image neither collapses nor
    /// stays a cover.
    WeakPreservation { b: Elem, c: Elem, d: Elem },
    /// A relative cover (b', c') below f(d) with no preimage cover below d.
    Lifting { b: Elem, c: Elem, d: Elem },
}

/// Check that a strict map weakly preserves and lifts relative covers.
pub fn check_incremental_morphism(f: &MonotoneMap) -> Result<Verdict<MorphismFailure>, PosetError> {
    if !f.is_strict() {
        return Err(PosetError::NotStrict);
    }
    let dom = f.domain();
    let cod = f.codomain();
    for d in dom.elements() {
        for (b, c) in dom.relative_covers(d) {
            let fb = f.apply(b);
            let fc = f.apply(c);
            if fb != fc && !cod.is_cover(fb, fc) {
                return Ok(Verdict::Fail {
                    witness: MorphismFailure::WeakPreservation { b, c, d },
                });
            }
        }
        let fd = f.apply(d);
        for (b1, c1) in cod.relative_covers(fd) {
            let lifted = dom
                .relative_covers(d)
                .into_iter()
                .any(|(b, c)| f.apply(b) == b1 && f.apply(c) == c1);
            if !lifted {
                return Ok(Verdict::Fail {
                    witness: MorphismFailure::Lifting { b: b1, c: c1, d },
                });
            }
        }
    }
    Ok(Verdict::Pass)
}

pub const COVSEQ_BUDGET: usize = 1_000_000;

/// All covering sequences whose last element is `d`, in canonical order.
pub fn covering_sequences_for(
    poset: &FinitePointedPoset,
    d: Elem,
) -> Result<Vec<CoveringSequence>, PosetError> {
    let mut out = Vec::new();
    let mut stack = vec![poset.bottom()];
    covseq_dfs(poset, d, &mut stack, &mut out)?;
    Ok(out)
}

fn covseq_dfs(
    poset: &FinitePointedPoset,
    d: Elem,
    stack: &mut Vec<Elem>,
    out: &mut Vec<CoveringSequence>,
) -> Result<(), PosetError> {
    let cur = *stack.last().expect("non-empty");
    if cur == d {
        if out.len() >= COVSEQ_BUDGET {
            return Err(PosetError::BudgetExceeded(COVSEQ_BUDGET));
        }
        out.push(CoveringSequence {
            steps: stack.clone(),
        });
        return Ok(());
    }
    for z in poset.up_set(cur) {
        if z != cur && poset.leq(z, d) && poset.is_cover(cur, z) {
            stack.push(z);
            covseq_dfs(poset, d, stack, out)?;
            stack.pop();
        }
    }
    Ok(())
}

/// The causality a chain imposes on the compact approximations of its last
/// link: b precedes c when b is first covered strictly earlier in the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCausality {
    /// For each b ⊑ d, the least chain index k with b ⊑ links\[k\].
    pub norms: Vec<(Elem, usize)>,
    /// Strict precedence pairs (b, c) with norm(b) < norm(c).
    pub pairs: BTreeSet<(Elem, Elem)>,
}

pub fn chain_causality(
    chain: &CompactChain,
    poset: &FinitePointedPoset,
    d: Elem,
) -> Result<ChainCausality, PosetError> {
    if chain.last() != d {
        return Err(PosetError::NotBelow {
            child: poset.label(chain.last()).to_string(),
            parent: poset.label(d).to_string(),
        });
    }
    let mut norms = Vec::new();
    for b in poset.down_set(d) {
        let k = chain
            .links()
            .iter()
            .position(|&l| poset.leq(b, l))
            .expect("last link is d, so every b ⊑ d has a norm");
        norms.push((b, k));
    }
    let mut pairs = BTreeSet::new();
    for &(b, nb) in &norms {
        for &(c, nc) in &norms {
            if nb < nc {
                pairs.insert((b, c));
            }
        }
    }
    Ok(ChainCausality { norms, pairs })
}

/// The poset of all covering sequences over `poset`, prefix-ordered, together
/// with the sequences themselves in element order.
pub fn covering_sequence_poset(
    poset: &FinitePointedPoset,
) -> Result<(FinitePointedPoset, Vec<CoveringSequence>), PosetError> {
    let mut seqs: Vec<CoveringSequence> = Vec::new();
    let mut frontier = vec![CoveringSequence {
        steps: vec![poset.bottom()],
    }];
    while let Some(seq) = frontier.pop() {
        if seqs.len() + frontier.len() >= COVSEQ_BUDGET {
            return Err(PosetError::BudgetExceeded(COVSEQ_BUDGET));
        }
        let cur = seq.last();
        for z in poset.up_set(cur) {
            if z != cur && poset.is_cover(cur, z) {
                let mut steps = seq.steps.clone();
                steps.push(z);
                frontier.push(CoveringSequence { steps });
            }
        }
        seqs.push(seq);
    }
    seqs.sort();
    let labels: Vec<String> = seqs
        .iter()
        .map(|s| {
            s.steps
                .iter()
                .map(|&e| poset.label(e))
                .collect::<Vec<_>>()
                .join(" < ")
        })
        .collect();
    let mut rel = BitRel::new(seqs.len());
    for (i, a) in seqs.iter().enumerate() {
        for (j, b) in seqs.iter().enumerate() {
            if a.is_prefix_of(b) {
                rel.set(i, j);
            }
        }
    }
    let p = FinitePointedPoset::from_bitrel(labels, rel)?;
    Ok((p, seqs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> FinitePointedPoset {
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
        .unwrap()
    }

    /// Independent construction of the prefix poset on binary words of
    /// length ≤ n: enumerate the words, compare by prefix.
    fn binary_prefix_poset(n: usize) -> FinitePointedPoset {
        let mut words = vec![String::new()];
        for len in 1..=n {
            let prev: Vec<String> = words
                .iter()
                .filter(|w| w.len() == len - 1)
                .cloned()
                .collect();
            for w in prev {
                words.push(format!("{w}0"));
                words.push(format!("{w}1"));
            }
        }
        words.sort_by_key(|w| (w.len(), w.clone()));
        let labels: Vec<String> = words
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "ε".to_string()
                } else {
                    w.clone()
                }
            })
            .collect();
        let mut rel = BitRel::new(words.len());
        for (i, a) in words.iter().enumerate() {
            for (j, b) in words.iter().enumerate() {
                if b.starts_with(a.as_str()) {
                    rel.set(i, j);
                }
            }
        }
        FinitePointedPoset::from_bitrel(labels, rel).unwrap()
    }

    #[test]
    fn validate_total_order() {
        let p = chain3();
        assert_eq!(p.label(p.bottom()), "0");
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn validate_rejects_antisymmetry_violation() {
        let err = FinitePointedPoset::validate_labeled(
            &["a", "b"],
            &[("a", "a"), ("b", "b"), ("a", "b"), ("b", "a")],
        )
        .unwrap_err();
        match err {
            PosetError::NotAPartialOrder {
                axiom: OrderAxiom::Antisymmetry,
                x,
                y,
            } => {
                assert_eq!((x.as_str(), y.as_str()), ("a", "b"));
            }
            other => panic!("expected antisymmetry failure, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_missing_reflexivity() {
        let err = FinitePointedPoset::validate_labeled(&["a", "b"], &[("a", "b"), ("b", "b")])
            .unwrap_err();
        assert!(matches!(
            err,
            PosetError::NotAPartialOrder {
                axiom: OrderAxiom::Reflexivity,
                ..
            }
        ));
    }

    #[test]
    fn validate_rejects_missing_transitivity() {
        let err = FinitePointedPoset::validate_labeled(
            &["a", "b", "c"],
            &[("a", "a"), ("b", "b"), ("c", "c"), ("a", "b"), ("b", "c")],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PosetError::NotAPartialOrder {
                axiom: OrderAxiom::Transitivity,
                ..
            }
        ));
    }

    #[test]
    fn validate_requires_least_element() {
        let err = FinitePointedPoset::validate_labeled(&["a", "b"], &[("a", "a"), ("b", "b")])
            .unwrap_err();
        assert_eq!(err, PosetError::NoLeastElement);
    }

    #[test]
    fn binary_prefix_poset_shape() {
        // Oracle: enumerate all prefixes of {0,1}^{≤2} independently.
        let p = binary_prefix_poset(2);
        assert_eq!(p.len(), 7);
        assert_eq!(p.label(p.bottom()), "ε");
    }

    #[test]
    fn covers_of_chain_and_singleton() {
        let p = chain3();
        let covers: Vec<(String, String)> = p
            .covers()
            .iter()
            .map(|&(x, y)| (p.label(x).to_string(), p.label(y).to_string()))
            .collect();
        assert_eq!(
            covers,
            vec![("0".into(), "1".into()), ("1".into(), "2".into())]
        );

        let one = FinitePointedPoset::validate_labeled(&["x"], &[("x", "x")]).unwrap();
        assert!(one.covers().is_empty());
    }

    #[test]
    fn covers_of_prefix_poset_match_betweenness_oracle() {
        let p = binary_prefix_poset(2);
        // Oracle: exhaustive betweenness check, no use of is_cover.
        let mut expected = BTreeSet::new();
        for x in p.elements() {
            for y in p.elements() {
                if p.lt(x, y)
                    && !p
                        .elements()
                        .any(|z| z != x && z != y && p.leq(x, z) && p.leq(z, y))
                {
                    expected.insert((p.label(x).to_string(), p.label(y).to_string()));
                }
            }
        }
        let frozen: BTreeSet<(String, String)> = [
            ("ε", "0"),
            ("ε", "1"),
            ("0", "00"),
            ("0", "01"),
            ("1", "10"),
            ("1", "11"),
        ]
        .iter()
        .map(|&(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(expected, frozen);
        let got: BTreeSet<(String, String)> = p
            .covers()
            .into_iter()
            .map(|(x, y)| (p.label(x).to_string(), p.label(y).to_string()))
            .collect();
        assert_eq!(got, frozen);
    }

    #[test]
    fn relative_covers_below_element() {
        let p = binary_prefix_poset(2);
        let d = p.index_of("01").unwrap();
        let got: Vec<(String, String)> = p
            .relative_covers(d)
            .into_iter()
            .map(|(x, y)| (p.label(x).to_string(), p.label(y).to_string()))
            .collect();
        assert_eq!(
            got,
            vec![("ε".into(), "0".into()), ("0".into(), "01".into())]
        );
        assert!(p.relative_covers(p.bottom()).is_empty());

        let c = chain3();
        let top = c.index_of("2").unwrap();
        assert_eq!(c.relative_covers(top).len(), 2);
    }

    fn prepend0_map(p: &Arc<FinitePointedPoset>, max_len: usize) -> MonotoneMap {
        let table: Vec<Elem> = p
            .elements()
            .map(|e| {
                let w = if p.label(e) == "ε" {
                    String::new()
                } else {
                    p.label(e).to_string()
                };
                let mut out = format!("0{w}");
                out.truncate(max_len);
                let l = if out.is_empty() {
                    "ε".to_string()
                } else {
                    out
                };
                p.index_of(&l).unwrap()
            })
            .collect();
        MonotoneMap::new(p.clone(), p.clone(), table).unwrap()
    }

    #[test]
    fn lfp_of_prepend_zero() {
        let p = Arc::new(binary_prefix_poset(3));
        let f = prepend0_map(&p, 3);
        // Oracle: iterate by hand: ε, 0, 00, 000, 000.
        let lfp = lfp_iterate(&f).unwrap();
        assert_eq!(p.label(lfp), "000");
    }

    #[test]
    fn lfp_of_identity_and_constant() {
        let p = Arc::new(chain3());
        let id = MonotoneMap::identity(p.clone());
        assert_eq!(lfp_iterate(&id).unwrap(), p.bottom());
        let c = p.index_of("2").unwrap();
        let k = MonotoneMap::constant(p.clone(), p.clone(), c);
        assert_eq!(lfp_iterate(&k).unwrap(), c);
    }

    #[test]
    fn lfp_is_least_prefixpoint() {
        let p = Arc::new(binary_prefix_poset(2));
        let f = prepend0_map(&p, 2);
        let lfp = lfp_iterate(&f).unwrap();
        assert_eq!(f.apply(lfp), lfp);
        for x in p.elements() {
            if p.leq(f.apply(x), x) {
                assert!(p.leq(lfp, x));
            }
        }
    }

    #[test]
    fn jung_chain_examples() {
        let p = Arc::new(binary_prefix_poset(3));
        let f = prepend0_map(&p, 3);
        let chain = jung_chain(&f).unwrap();
        let labels: Vec<&str> = chain.links().iter().map(|&e| p.label(e)).collect();
        assert_eq!(labels, vec!["ε", "0", "00", "000"]);

        let q = Arc::new(chain3());
        let id = MonotoneMap::identity(q.clone());
        assert_eq!(jung_chain(&id).unwrap().links().len(), 1);

        let top = q.index_of("2").unwrap();
        let k = MonotoneMap::constant(q.clone(), q.clone(), top);
        let ch = jung_chain(&k).unwrap();
        let labels: Vec<&str> = ch.links().iter().map(|&e| q.label(e)).collect();
        assert_eq!(labels, vec!["0", "2"]);
        // The three chain conditions, checked directly.
        assert_eq!(ch.links()[0], q.bottom());
        for w in ch.links().windows(2) {
            assert!(q.leq(w[1], k.apply(w[0])));
        }
        assert_eq!(ch.last(), lfp_iterate(&k).unwrap());
    }

    #[test]
    fn refine_chain_fills_gaps_deterministically() {
        let p = binary_prefix_poset(2);
        let target = p.index_of("01").unwrap();
        let chain = CompactChain::new(&p, vec![p.bottom(), target]).unwrap();
        let seq = refine_chain(&chain, &p).unwrap();
        let labels: Vec<&str> = seq.steps().iter().map(|&e| p.label(e)).collect();
        assert_eq!(labels, vec!["ε", "0", "01"]);

        let trivial = CompactChain::new(&p, vec![p.bottom()]).unwrap();
        assert_eq!(refine_chain(&trivial, &p).unwrap().steps().len(), 1);
    }

    #[test]
    fn refine_chain_keeps_chain_causality() {
        let p = binary_prefix_poset(2);
        let d = p.index_of("11").unwrap();
        let chain = CompactChain::new(&p, vec![p.bottom(), d]).unwrap();
        let seq = refine_chain(&chain, &p).unwrap();
        let refined = CompactChain::new(&p, seq.steps().to_vec()).unwrap();
        let before = chain_causality(&chain, &p, d).unwrap();
        let after = chain_causality(&refined, &p, d).unwrap();
        assert!(after.pairs.is_superset(&before.pairs));
    }

    #[test]
    fn incremental_domain_check_passes_on_finite_posets() {
        assert!(check_incremental_domain(&chain3()).passed());
        assert!(check_incremental_domain(&binary_prefix_poset(2)).passed());
        let diamond = FinitePointedPoset::validate_labeled(
            &["b", "x", "y", "t"],
            &[
                ("b", "b"),
                ("x", "x"),
                ("y", "y"),
                ("t", "t"),
                ("b", "x"),
                ("b", "y"),
                ("b", "t"),
                ("x", "t"),
                ("y", "t"),
            ],
        )
        .unwrap();
        assert!(check_incremental_domain(&diamond).passed());
    }

    #[test]
    fn incremental_morphism_identity_and_constant_bottom() {
        let p = Arc::new(binary_prefix_poset(2));
        let id = MonotoneMap::identity(p.clone());
        assert!(check_incremental_morphism(&id).unwrap().passed());

        let cb = MonotoneMap::constant(p.clone(), p.clone(), p.bottom());
        assert!(check_incremental_morphism(&cb).unwrap().passed());
    }

    #[test]
    fn incremental_morphism_rejects_non_strict() {
        let p = Arc::new(chain3());
        let top = p.index_of("2").unwrap();
        let k = MonotoneMap::constant(p.clone(), p.clone(), top);
        assert_eq!(
            check_incremental_morphism(&k).unwrap_err(),
            PosetError::NotStrict
        );
    }

    #[test]
    fn covering_sequences_for_examples() {
        let p = binary_prefix_poset(2);
        let d = p.index_of("00").unwrap();
        let seqs = covering_sequences_for(&p, d).unwrap();
        assert_eq!(seqs.len(), 1);
        let labels: Vec<&str> = seqs[0].steps().iter().map(|&e| p.label(e)).collect();
        assert_eq!(labels, vec!["ε", "0", "00"]);

        let at_bottom = covering_sequences_for(&p, p.bottom()).unwrap();
        assert_eq!(at_bottom.len(), 1);
        assert_eq!(at_bottom[0].steps(), &[p.bottom()]);
    }

    #[test]
    fn covering_sequences_two_linearizations() {
        // Configuration-poset shape of two unordered consistent events.
        let p = FinitePointedPoset::validate_labeled(
            &["{}", "{a}", "{b}", "{a,b}"],
            &[
                ("{}", "{}"),
                ("{a}", "{a}"),
                ("{b}", "{b}"),
                ("{a,b}", "{a,b}"),
                ("{}", "{a}"),
                ("{}", "{b}"),
                ("{}", "{a,b}"),
                ("{a}", "{a,b}"),
                ("{b}", "{a,b}"),
            ],
        )
        .unwrap();
        let top = p.index_of("{a,b}").unwrap();
        let seqs = covering_sequences_for(&p, top).unwrap();
        let got: Vec<Vec<&str>> = seqs
            .iter()
            .map(|s| s.steps().iter().map(|&e| p.label(e)).collect())
            .collect();
        assert_eq!(
            got,
            vec![vec!["{}", "{a}", "{a,b}"], vec!["{}", "{b}", "{a,b}"]]
        );
    }

    #[test]
    fn chain_causality_norms() {
        let p = binary_prefix_poset(2);
        let b0 = p.bottom();
        let w0 = p.index_of("0").unwrap();
        let w00 = p.index_of("00").unwrap();
        let chain = CompactChain::new(&p, vec![b0, w0, w00]).unwrap();
        let cc = chain_causality(&chain, &p, w00).unwrap();
        assert!(cc.pairs.contains(&(b0, w0)));
        assert!(cc.pairs.contains(&(w0, w00)));
        assert!(!cc.pairs.contains(&(w00, w0)));

        let two = CompactChain::new(&p, vec![b0, w00]).unwrap();
        let cc2 = chain_causality(&two, &p, w00).unwrap();
        for (b, c) in cc2.pairs {
            assert_eq!(b, b0);
            assert_ne!(c, b0);
        }
    }

    #[test]
    fn covering_sequence_rejects_jumps() {
        let p = binary_prefix_poset(2);
        let err = CoveringSequence::new(&p, vec![p.bottom(), p.index_of("00").unwrap()]);
        assert!(matches!(
            err,
            Err(PosetError::BadCoveringSequence { index: 1, .. })
        ));
    }

    #[test]
    fn monotone_map_rejects_non_monotone_table() {
        let p = Arc::new(chain3());
        // Swap images of 0 and 2.
        let table = vec![
            p.index_of("2").unwrap(),
            p.index_of("1").unwrap(),
            p.index_of("0").unwrap(),
        ];
        let err = MonotoneMap::new(p.clone(), p.clone(), table).unwrap_err();
        assert!(matches!(err, PosetError::NotMonotone { .. }));
    }
}
