//! The network description file: a single versioned JSON document declaring
//! channels (streams or raw event structures), nodes with their function
//! sets, the trace flavour, and optional bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kahncheck::event_structure::EventStructure;
use kahncheck::model::{Bounds, ChannelDecl, ModelInstance, SortSpace};
use kahncheck::network::{Network, NodeSpec, SpaceCache};
use kahncheck::poset::MonotoneMap;
use kahncheck::stream::{OracleSet, StreamChannel, StreamFunctionSpec, ValueLit};
use kahncheck::trace::{Trace, TraceKind};

pub const DOCUMENT_FORMAT: &str = "kahncheck-net-1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{reference}: {reason}")]
    Semantic { reference: String, reason: String },
}

impl DocError {
    fn semantic(reference: impl Into<String>, reason: impl ToString) -> DocError {
        DocError::Semantic {
            reference: reference.into(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelKindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsDoc>,
    pub channels: Vec<ChannelDoc>,
    pub nodes: Vec<NodeDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindDoc {
    Linear,
    Pomset,
}

impl ModelKindDoc {
    pub fn kind(self) -> TraceKind {
        match self {
            ModelKindDoc::Linear => TraceKind::Linear,
            ModelKindDoc::Pomset => TraceKind::Pomset,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKindDoc::Linear => "linear",
            ModelKindDoc::Pomset => "pomset",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events_per_sort: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_domain_traces: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_values_per_sort: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_enum_traces: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub name: String,
    #[serde(flatten)]
    pub kind: ChannelKindDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKindDoc {
    Stream(StreamDoc),
    Events(EventsDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamDoc {
    pub alphabet: Vec<String>,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventsDoc {
    pub events: Vec<String>,
    #[serde(default)]
    pub causality: Vec<(String, String)>,
    #[serde(default)]
    pub forbidden: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub functions: Vec<FunctionDoc>,
    /// Optional claimed process extension: when present, the `computes`
    /// check compares it against the computed process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_traces: Option<Vec<TraceDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionDoc {
    Const {
        values: BTreeMap<String, LitDoc>,
    },
    Prepend {
        word: String,
    },
    Map {
        table: BTreeMap<String, String>,
    },
    Dmerge {
        left: String,
        right: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle: Option<String>,
    },
    /// Shorthand for one merge function per oracle of length up to
    /// `max_len`, optionally restricted to oracles mentioning both symbols.
    DmergeOracles {
        left: String,
        right: String,
        max_len: usize,
        #[serde(default)]
        both_symbols_only: bool,
    },
    Table {
        entries: Vec<TableEntryDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<BTreeMap<String, LitDoc>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LitDoc {
    Word(String),
    Events(Vec<String>),
}

impl LitDoc {
    fn to_value(&self) -> ValueLit {
        match self {
            LitDoc::Word(w) => ValueLit::Word(w.clone()),
            LitDoc::Events(es) => ValueLit::Events(es.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntryDoc {
    #[serde(rename = "in")]
    pub input: BTreeMap<String, LitDoc>,
    #[serde(rename = "out")]
    pub output: BTreeMap<String, LitDoc>,
}

/// A trace serialized with canonical event names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDoc {
    pub carrier: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
}

impl TraceDoc {
    pub fn of_trace(t: &Trace) -> TraceDoc {
        TraceDoc {
            carrier: t
                .carrier()
                .iter()
                .map(|&e| t.es().label(e).to_string())
                .collect(),
            order: t
                .strict_pairs()
                .iter()
                .map(|&(a, b)| (t.es().label(a).to_string(), t.es().label(b).to_string()))
                .collect(),
        }
    }

    pub fn resolve(&self, space: &SortSpace) -> Result<Trace, DocError> {
        let es = &space.product.es;
        let mut carrier = BTreeSet::new();
        for name in &self.carrier {
            let e = es.index_of(name).ok_or_else(|| {
                DocError::semantic(format!("trace event {name:?}"), "unknown event")
            })?;
            carrier.insert(e);
        }
        let mut order = Vec::new();
        for (a, b) in &self.order {
            let ia = es
                .index_of(a)
                .ok_or_else(|| DocError::semantic(format!("trace event {a:?}"), "unknown event"))?;
            let ib = es
                .index_of(b)
                .ok_or_else(|| DocError::semantic(format!("trace event {b:?}"), "unknown event"))?;
            order.push((ia, ib));
        }
        Trace::validate(es.clone(), carrier, order)
            .map_err(|e| DocError::semantic("claimed trace", e))
    }
}

/// Parse a document from disk. Syntax errors carry line and column.
pub fn parse_document(path: &Path) -> Result<NetworkDocument, DocError> {
    let text = std::fs::read_to_string(path).map_err(|e| DocError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let doc: NetworkDocument = serde_json::from_str(&text).map_err(|e| DocError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format != DOCUMENT_FORMAT {
        return Err(DocError::semantic(
            "format",
            format!("expected {DOCUMENT_FORMAT:?}, found {:?}", doc.format),
        ));
    }
    Ok(doc)
}

/// A loaded document: the validated model and network, plus any claimed
/// process extensions by node name.
pub struct Loaded {
    pub doc: NetworkDocument,
    pub model: ModelInstance,
    pub network: Network,
    pub claims: BTreeMap<String, Vec<TraceDoc>>,
}

fn parse_symbol(reference: &str, s: &str) -> Result<char, DocError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(DocError::semantic(
            reference,
            format!("alphabet symbols are single characters, got {s:?}"),
        )),
    }
}

/// Validate and compile a parsed document into a model and network.
pub fn build(doc: NetworkDocument, depth_override: Option<usize>) -> Result<Loaded, DocError> {
    let mut bounds = Bounds::default();
    if let Some(b) = &doc.bounds {
        if let Some(v) = b.max_events_per_sort {
            bounds.max_events_per_sort = v;
        }
        if let Some(v) = b.max_domain_traces {
            bounds.max_domain_traces = v;
        }
        if let Some(v) = b.max_values_per_sort {
            bounds.max_values_per_sort = v;
        }
        if let Some(v) = b.max_enum_traces {
            bounds.max_enum_traces = v;
        }
    }

    let mut decls: Vec<(String, ChannelDecl)> = Vec::new();
    let mut seen = BTreeSet::new();
    for ch in &doc.channels {
        let reference = format!("channel {}", ch.name);
        if !seen.insert(ch.name.clone()) {
            return Err(DocError::semantic(&reference, "duplicate channel name"));
        }
        let decl = match &ch.kind {
            ChannelKindDoc::Stream(s) => {
                let mut alphabet = Vec::new();
                for sym in &s.alphabet {
                    alphabet.push(parse_symbol(&reference, sym)?);
                }
                let depth = depth_override.unwrap_or(s.depth);
                ChannelDecl::Stream(
                    StreamChannel::new(alphabet, depth)
                        .map_err(|e| DocError::semantic(&reference, e))?,
                )
            }
            ChannelKindDoc::Events(ev) => {
                for e in &ev.events {
                    let clean = !e.is_empty()
                        && e.chars()
                            .all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c));
                    if !clean {
                        return Err(DocError::semantic(
                            &reference,
                            format!("event name {e:?} must be alphanumeric (plus _ . -)"),
                        ));
                    }
                }
                let index = |name: &str| -> Result<usize, DocError> {
                    ev.events.iter().position(|e| e == name).ok_or_else(|| {
                        DocError::semantic(&reference, format!("unknown event {name:?}"))
                    })
                };
                let mut causality = Vec::new();
                for (a, b) in &ev.causality {
                    causality.push((index(a)?, index(b)?));
                }
                let mut forbidden = Vec::new();
                for f in &ev.forbidden {
                    let mut set = BTreeSet::new();
                    for name in f {
                        set.insert(index(name)?);
                    }
                    forbidden.push(set);
                }
                let es = EventStructure::validate(ev.events.clone(), causality, forbidden)
                    .map_err(|e| DocError::semantic(&reference, e))?;
                ChannelDecl::Raw(Arc::new(es))
            }
        };
        decls.push((ch.name.clone(), decl));
    }

    let model = ModelInstance::new(decls, doc.model.kind(), bounds)
        .map_err(|e| DocError::semantic("channels", e))?;

    let mut cache = SpaceCache::new(&model);
    let mut nodes = Vec::new();
    let mut claims = BTreeMap::new();
    for node in &doc.nodes {
        let reference = format!("node {}", node.name);
        let inputs: BTreeSet<String> = node.inputs.iter().cloned().collect();
        let outputs: BTreeSet<String> = node.outputs.iter().cloned().collect();
        for ch in inputs.iter().chain(&outputs) {
            if !doc.channels.iter().any(|c| &c.name == ch) {
                return Err(DocError::semantic(
                    &reference,
                    format!("unknown channel {ch:?}"),
                ));
            }
        }
        let in_space = cache
            .get(&inputs)
            .map_err(|e| DocError::semantic(&reference, e))?;
        let out_space = cache
            .get(&outputs)
            .map_err(|e| DocError::semantic(&reference, e))?;

        let mut specs: Vec<StreamFunctionSpec> = Vec::new();
        for (k, f) in node.functions.iter().enumerate() {
            let fref = format!("{reference} function {k}");
            match f {
                FunctionDoc::Const { values } => specs.push(StreamFunctionSpec::Const {
                    values: values
                        .iter()
                        .map(|(c, v)| (c.clone(), v.to_value()))
                        .collect(),
                }),
                FunctionDoc::Prepend { word } => {
                    specs.push(StreamFunctionSpec::Prepend { word: word.clone() })
                }
                FunctionDoc::Map { table } => {
                    let mut t = BTreeMap::new();
                    for (a, b) in table {
                        t.insert(parse_symbol(&fref, a)?, parse_symbol(&fref, b)?);
                    }
                    specs.push(StreamFunctionSpec::MapSymbols { table: t });
                }
                FunctionDoc::Dmerge {
                    left,
                    right,
                    oracle,
                } => specs.push(StreamFunctionSpec::Dmerge {
                    left: left.clone(),
                    right: right.clone(),
                    oracle: oracle.clone(),
                }),
                FunctionDoc::DmergeOracles {
                    left,
                    right,
                    max_len,
                    both_symbols_only,
                } => {
                    let mut oracles = OracleSet::all_up_to(*max_len);
                    if *both_symbols_only {
                        oracles = oracles.both_symbols();
                    }
                    if oracles.is_empty() {
                        return Err(DocError::semantic(&fref, "empty oracle family"));
                    }
                    for o in oracles.oracles {
                        specs.push(StreamFunctionSpec::Dmerge {
                            left: left.clone(),
                            right: right.clone(),
                            oracle: Some(o),
                        });
                    }
                }
                FunctionDoc::Table { entries, default } => {
                    specs.push(StreamFunctionSpec::Table {
                        entries: entries
                            .iter()
                            .map(|e| {
                                (
                                    e.input
                                        .iter()
                                        .map(|(c, v)| (c.clone(), v.to_value()))
                                        .collect(),
                                    e.output
                                        .iter()
                                        .map(|(c, v)| (c.clone(), v.to_value()))
                                        .collect(),
                                )
                            })
                            .collect(),
                        default: default
                            .as_ref()
                            .map(|d| d.iter().map(|(c, v)| (c.clone(), v.to_value())).collect()),
                    });
                }
            }
        }
        if specs.is_empty() {
            return Err(DocError::semantic(&reference, "empty function set"));
        }

        let mut functions: Vec<MonotoneMap> = Vec::new();
        for (k, spec) in specs.iter().enumerate() {
            let f = model
                .compile_function(spec, &in_space, &out_space)
                .map_err(|e| DocError::semantic(format!("{reference} function {k}"), e))?;
            functions.push(f);
        }
        let function_names = specs.iter().map(|s| s.describe()).collect();
        if let Some(claimed) = &node.claimed_traces {
            claims.insert(node.name.clone(), claimed.clone());
        }
        nodes.push(NodeSpec {
            name: node.name.clone(),
            inputs,
            outputs,
            functions,
            function_names,
        });
    }

    let network = Network::new(nodes).map_err(|e| DocError::semantic("network", e))?;
    Ok(Loaded {
        doc,
        model,
        network,
        claims,
    })
}

/// Parse and build in one step.
pub fn load(path: &Path, depth_override: Option<usize>) -> Result<Loaded, DocError> {
    let doc = parse_document(path)?;
    build(doc, depth_override)
}
