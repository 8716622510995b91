//! Truncated stream value domains, the stream event structure, and the
//! word-level semantics of node functions: constants, prepends, elementwise
//! maps, explicit tables and the oracle-driven deterministic merge.
//!
//! A stream channel carries words over a finite alphabet, cut off at a fixed
//! depth. Its event structure has one event per non-empty word (producing
//! that word's final symbol); causality is the prefix order and two events
//! conflict exactly when their words are incomparable, so configurations are
//! words again.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::bitrel::BitRel;
use crate::event_structure::{Config, ConfigPoset, EsError, EventStructure};
use crate::poset::{FinitePointedPoset, PosetError};
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("alphabet symbols must be alphanumeric, got {0:?}")]
    BadSymbol(char),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(char),
    #[error("word {word:?} uses symbols outside the alphabet of channel {channel}")]
    WordOutsideAlphabet { channel: String, word: String },
    #[error("word {word:?} is longer than depth {depth} on channel {channel}")]
    WordTooLong {
        channel: String,
        word: String,
        depth: usize,
    },
    #[error("oracle {0:?} must be a binary word")]
    BadOracle(String),
    #[error("deterministic merge requires an oracle")]
    OracleRequired,
    #[error(transparent)]
    Es(#[from] EsError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A truncated stream domain: words over `alphabet` of length at most
/// `depth`, prefix-ordered, with the empty word at the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamChannel {
    pub alphabet: Vec<char>,
    pub depth: usize,
}

pub const EMPTY_WORD_LABEL: &str = "ε";

pub fn word_label(w: &str) -> String {
    if w.is_empty() {
        EMPTY_WORD_LABEL.to_string()
    } else {
        w.to_string()
    }
}

impl StreamChannel {
    pub fn new(alphabet: Vec<char>, depth: usize) -> Result<Self, StreamError> {
        let mut seen = BTreeSet::new();
        for &c in &alphabet {
            if !c.is_ascii_alphanumeric() {
                return Err(StreamError::BadSymbol(c));
            }
            if !seen.insert(c) {
                return Err(StreamError::DuplicateSymbol(c));
            }
        }
        let mut alphabet = alphabet;
        alphabet.sort_unstable();
        Ok(StreamChannel { alphabet, depth })
    }

    /// All words of length ≤ depth, shortest first, then lexicographic.
    pub fn words(&self) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for w in &frontier {
                for &c in &self.alphabet {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn check_word(&self, channel: &str, w: &str) -> Result<(), StreamError> {
        if w.chars().any(|c| !self.alphabet.contains(&c)) {
            return Err(StreamError::WordOutsideAlphabet {
                channel: channel.to_string(),
                word: w.to_string(),
            });
        }
        if w.len() > self.depth {
            return Err(StreamError::WordTooLong {
                channel: channel.to_string(),
                word: w.to_string(),
                depth: self.depth,
            });
        }
        Ok(())
    }

    pub fn truncate(&self, w: &str) -> String {
        w.chars().take(self.depth).collect()
    }
}

/// The prefix poset of all words of length ≤ depth.
pub fn stream_poset(channel: &StreamChannel) -> Result<FinitePointedPoset, PosetError> {
    let words = channel.words();
    let labels: Vec<String> = words.iter().map(|w| word_label(w)).collect();
    let mut rel = BitRel::new(words.len());
    for (i, a) in words.iter().enumerate() {
        for (j, b) in words.iter().enumerate() {
            if b.starts_with(a.as_str()) {
                rel.set(i, j);
            }
        }
    }
    FinitePointedPoset::from_bitrel(labels, rel)
}

/// The stream event structure: events are the non-empty words (an event is
/// the production of its last symbol after its prefix), causality is the
/// prefix order, and incomparable words conflict pairwise.
pub fn stream_es(channel: &StreamChannel) -> Arc<EventStructure> {
    let words: Vec<String> = channel
        .words()
        .into_iter()
        .filter(|w| !w.is_empty())
        .collect();
    let n = words.len();
    let mut leq = BitRel::new(n);
    let mut forbidden: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if words[j].starts_with(words[i].as_str()) {
                leq.set(i, j);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !words[j].starts_with(words[i].as_str()) && !words[i].starts_with(words[j].as_str())
            {
                forbidden.push(vec![i, j]);
            }
        }
    }
    forbidden.sort_by_key(|s| (s.len(), s.clone()));
    Arc::new(EventStructure::from_parts_trusted(words, leq, forbidden))
}

/// Longest word of a stream configuration (its events are the prefixes of
/// that word).
pub fn word_of_config(es: &EventStructure, cfg: &Config) -> String {
    cfg.0
        .iter()
        .map(|&e| es.label(e).to_string())
        .max_by_key(|w| w.len())
        .unwrap_or_default()
}

/// Configuration of the stream event structure for a word: all of its
/// non-empty prefixes.
pub fn config_of_word(es: &EventStructure, w: &str) -> Config {
    let mut events = BTreeSet::new();
    for i in 1..=w.len() {
        let p = &w[..i];
        let e = es
            .index_of(p)
            .unwrap_or_else(|| panic!("stream structure must contain prefix {p}"));
        events.insert(e);
    }
    Config(events)
}

/// Check that configurations of the stream event structure are order-
/// isomorphic to the truncated word domain via the longest-word map.
pub fn check_stream_iso(
    channel: &StreamChannel,
    max_configs: usize,
) -> Result<Verdict<String>, StreamError> {
    let es = stream_es(channel);
    let cp = ConfigPoset::enumerate(es.clone(), max_configs)?;
    let poset = stream_poset(channel)?;
    if cp.len() != poset.len() {
        return Ok(Verdict::Fail {
            witness: format!("{} configurations vs {} words", cp.len(), poset.len()),
        });
    }
    let mut word_idx = Vec::with_capacity(cp.len());
    for cfg in &cp.configs {
        let w = word_of_config(&es, cfg);
        match poset.index_of(&word_label(&w)) {
            Some(e) => word_idx.push(e),
            None => {
                return Ok(Verdict::Fail {
                    witness: format!("configuration maps to unknown word {w:?}"),
                })
            }
        }
    }
    let distinct: BTreeSet<_> = word_idx.iter().collect();
    if distinct.len() != cp.len() {
        return Ok(Verdict::Fail {
            witness: "longest-word map is not injective".to_string(),
        });
    }
    for i in 0..cp.len() {
        for j in 0..cp.len() {
            if cp.leq_idx(i, j) != poset.leq(word_idx[i], word_idx[j]) {
                return Ok(Verdict::Fail {
                    witness: format!(
                        "order disagrees at {} vs {}",
                        cp.poset.label(crate::poset::Elem(i)),
                        cp.poset.label(crate::poset::Elem(j))
                    ),
                });
            }
        }
    }
    Ok(Verdict::Pass)
}

/// A value literal in a node-function description: a word for stream
/// channels or an explicit event set for raw event-structure channels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValueLit {
    Word(String),
    Events(Vec<String>),
}

/// Description of one node function, interpreted over the truncated value
/// domains of a node's input and output sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamFunctionSpec {
    /// No inputs consulted; emit fixed values on the outputs.
    Const { values: BTreeMap<String, ValueLit> },
    /// One stream input, one stream output: emit `word`, then copy.
    Prepend { word: String },
    /// One stream input, one stream output: map symbols pointwise.
    MapSymbols { table: BTreeMap<char, char> },
    /// Two stream inputs merged into one output under an oracle: each oracle
    /// bit selects the side whose next symbol is emitted, halting when the
    /// oracle or the selected input is exhausted.
    Dmerge {
        left: String,
        right: String,
        oracle: Option<String>,
    },
    /// Explicit graph from input-value tuples to output-value tuples.
    Table {
        entries: Vec<(BTreeMap<String, ValueLit>, BTreeMap<String, ValueLit>)>,
        default: Option<BTreeMap<String, ValueLit>>,
    },
}

impl StreamFunctionSpec {
    pub fn describe(&self) -> String {
        match self {
            StreamFunctionSpec::Const { values } => {
                let parts: Vec<String> = values
                    .iter()
                    .map(|(ch, v)| format!("{ch}={}", describe_lit(v)))
                    .collect();
                format!("const({})", parts.join(","))
            }
            StreamFunctionSpec::Prepend { word } => format!("prepend({word})"),
            StreamFunctionSpec::MapSymbols { table } => {
                let parts: Vec<String> = table.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                format!("map({})", parts.join(","))
            }
            StreamFunctionSpec::Dmerge {
                left,
                right,
                oracle,
            } => format!(
                "dmerge({left},{right};{})",
                oracle
                    .as_deref()
                    .map(word_label)
                    .unwrap_or_else(|| "?".to_string())
            ),
            StreamFunctionSpec::Table { entries, .. } => {
                format!("table({} entries)", entries.len())
            }
        }
    }
}

fn describe_lit(v: &ValueLit) -> String {
    match v {
        ValueLit::Word(w) => word_label(w),
        ValueLit::Events(es) => format!("{{{}}}", es.join(",")),
    }
}

/// The two defining equations of the deterministic merge, applied left to
/// right: bit 0 emits the next left symbol, bit 1 the next right symbol.
/// Output halts when the oracle or the selected input runs out, and is
/// truncated at `max_len`.
pub fn dmerge_word(left: &str, right: &str, oracle: &str, max_len: usize) -> String {
    let mut out = String::new();
    let mut l = left.chars();
    let mut r = right.chars();
    for bit in oracle.chars() {
        if out.len() >= max_len {
            break;
        }
        let next = match bit {
            '0' => l.next(),
            '1' => r.next(),
            _ => panic!("oracle must be a binary word, got {bit:?}"),
        };
        match next {
            Some(c) => out.push(c),
            None => break,
        }
    }
    out
}

pub fn validate_oracle(oracle: &str) -> Result<(), StreamError> {
    if oracle.chars().all(|c| c == '0' || c == '1') {
        Ok(())
    } else {
        Err(StreamError::BadOracle(oracle.to_string()))
    }
}

/// A finite, non-empty set of oracle words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSet {
    pub oracles: Vec<String>,
}

impl OracleSet {
    pub fn new(oracles: Vec<String>) -> Result<Self, StreamError> {
        if oracles.is_empty() {
            return Err(StreamError::OracleRequired);
        }
        for o in &oracles {
            validate_oracle(o)?;
        }
        let mut oracles = oracles;
        oracles.sort_by_key(|o| (o.len(), o.clone()));
        oracles.dedup();
        Ok(OracleSet { oracles })
    }

    /// All binary words of length ≤ depth, shortest first.
    pub fn all_up_to(depth: usize) -> OracleSet {
        let binary = StreamChannel::new(vec!['0', '1'], depth).expect("binary alphabet is valid");
        OracleSet {
            oracles: binary.words(),
        }
    }

    /// The finite stand-in for fair oracles: words mentioning both symbols.
    pub fn both_symbols(&self) -> OracleSet {
        OracleSet {
            oracles: self
                .oracles
                .iter()
                .filter(|o| o.contains('0') && o.contains('1'))
                .cloned()
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.oracles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oracles.is_empty()
    }
}
