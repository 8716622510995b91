//! Model instances: a family of channels (truncated streams or raw event
//! structures), a trace flavour, and enumeration bounds. For each sort the
//! instance materializes the product event structure and the value poset
//! (the product of the per-channel configuration posets), and the axioms
//! tying traces, restriction, evaluation and values together are checked
//! exhaustively on desk-scale sorts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::event_structure::{
    check_product_iso, product_es, ChannelFamily, Config, ConfigPoset, EsError, EventStructure,
    ProductEs, ValuePoset,
};
use crate::poset::{Elem, MonotoneMap, PosetError};
use crate::stream::{
    config_of_word, dmerge_word, stream_es, validate_oracle, word_label, word_of_config,
    StreamChannel, StreamError, StreamFunctionSpec, ValueLit,
};
use crate::trace::{
    build_trace_domain, restrict_trace, trace_leq, Trace, TraceDomain, TraceError, TraceKind,
};
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("function is ill-typed: {0}")]
    TypeMismatch(String),
    #[error("table is not monotone: {x} ⊑ {y} but the outputs are unordered")]
    NonMonotoneTable { x: String, y: String },
    #[error("table is incomplete: no output for {0}")]
    IncompleteTable(String),
    #[error("table maps {0} twice")]
    DuplicateTableEntry(String),
    #[error(transparent)]
    Es(#[from] EsError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// What a channel carries.
#[derive(Debug, Clone)]
pub enum ChannelKind {
    Stream(StreamChannel),
    Raw,
}

/// A channel with its event structure and enumerated configuration poset.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub name: String,
    pub kind: ChannelKind,
    pub es: Arc<EventStructure>,
    pub configs: Arc<ConfigPoset>,
    /// Per-configuration display value: the word for stream channels, the
    /// event set for raw ones.
    pub display: Vec<String>,
}

impl ChannelModel {
    pub fn value_display(&self, cfg_idx: usize) -> &str {
        &self.display[cfg_idx]
    }
}

/// Enumeration bounds. Materialized trace domains are only built when the
/// sort's event count and trace count stay within them; the streaming trace
/// walk and the value poset have their own budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Sorts with more product events than this are not materialized as
    /// trace domains.
    pub max_events_per_sort: usize,
    /// Cap on the size of a materialized trace domain.
    pub max_domain_traces: u64,
    /// Cap on the size of a sort's value poset.
    pub max_values_per_sort: usize,
    /// Cap on the number of traces visited by streaming enumeration.
    pub max_enum_traces: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_events_per_sort: 12,
            max_domain_traces: 20_000,
            max_values_per_sort: 200_000,
            max_enum_traces: 20_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ChannelDecl {
    Stream(StreamChannel),
    Raw(Arc<EventStructure>),
}

/// A model instance: channels, trace flavour, bounds.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub channels: BTreeMap<String, ChannelModel>,
    pub kind: TraceKind,
    pub bounds: Bounds,
}

impl ModelInstance {
    pub fn new(
        channels: impl IntoIterator<Item = (String, ChannelDecl)>,
        kind: TraceKind,
        bounds: Bounds,
    ) -> Result<ModelInstance, ModelError> {
        let mut out = BTreeMap::new();
        for (name, decl) in channels {
            if name.is_empty() || name.contains(':') {
                return Err(ModelError::Es(EsError::BadChannelName(name)));
            }
            let model = match decl {
                ChannelDecl::Stream(sc) => {
                    let es = stream_es(&sc);
                    let configs = Arc::new(ConfigPoset::enumerate(
                        es.clone(),
                        bounds.max_values_per_sort,
                    )?);
                    let display: Vec<String> = configs
                        .configs
                        .iter()
                        .map(|c| word_label(&word_of_config(&es, c)))
                        .collect();
                    ChannelModel {
                        name: name.clone(),
                        kind: ChannelKind::Stream(sc),
                        es,
                        configs,
                        display,
                    }
                }
                ChannelDecl::Raw(es) => {
                    let configs = Arc::new(ConfigPoset::enumerate(
                        es.clone(),
                        bounds.max_values_per_sort,
                    )?);
                    let display: Vec<String> =
                        configs.configs.iter().map(|c| es.config_label(c)).collect();
                    ChannelModel {
                        name: name.clone(),
                        kind: ChannelKind::Raw,
                        es,
                        configs,
                        display,
                    }
                }
            };
            out.insert(name, model);
        }
        Ok(ModelInstance {
            channels: out,
            kind,
            bounds,
        })
    }

    pub fn channel(&self, name: &str) -> Result<&ChannelModel, ModelError> {
        self.channels
            .get(name)
            .ok_or_else(|| ModelError::UnknownChannel(name.to_string()))
    }

    pub fn family(&self) -> ChannelFamily {
        ChannelFamily::new(self.channels.iter().map(|(n, c)| (n.clone(), c.es.clone())))
            .expect("channel names were validated at construction")
    }

    pub fn all_channels(&self) -> BTreeSet<String> {
        self.channels.keys().cloned().collect()
    }

    /// Materialize the product structure and value poset of a sort.
    pub fn space(&self, sort: &BTreeSet<String>) -> Result<SortSpace, ModelError> {
        for name in sort {
            self.channel(name)?;
        }
        let family = self.family();
        let product = product_es(&family, sort)?;
        let mut parts = Vec::new();
        let mut display = Vec::new();
        for name in &product.channels {
            let cm = self.channel(name)?;
            parts.push(cm.configs.clone());
            display.push(cm.display.clone());
        }
        let values = ValuePoset::build(
            product.channels.clone(),
            parts,
            display,
            self.bounds.max_values_per_sort,
        )?;
        let mut extend = Vec::new();
        for part in &values.parts {
            let mut m: HashMap<(usize, usize), usize> = HashMap::new();
            for (cfg, exts) in part.extensions.iter().enumerate() {
                for &(event, next) in exts {
                    m.insert((cfg, event), next);
                }
            }
            extend.push(m);
        }
        Ok(SortSpace {
            sort: product.channels.clone(),
            product,
            values,
            extend,
        })
    }

    /// Materialize the trace domain of a sort, subject to the bounds.
    pub fn trace_domain(&self, space: &SortSpace) -> Result<TraceDomain, ModelError> {
        Ok(build_trace_domain(
            &space.product.es,
            self.kind,
            space.product.es.len(),
            self.bounds.max_events_per_sort,
            self.bounds.max_domain_traces,
        )?)
    }

    /// Tabulate a function description as a monotone map between the value
    /// posets of the input and output sorts.
    pub fn compile_function(
        &self,
        spec: &StreamFunctionSpec,
        inputs: &SortSpace,
        outputs: &SortSpace,
    ) -> Result<MonotoneMap, ModelError> {
        self.check_spec_typing(spec, inputs, outputs)?;
        let vi = &inputs.values;
        let vo = &outputs.values;
        let mut table = Vec::with_capacity(vi.len());
        let explicit = self.resolve_table(spec, inputs, outputs)?;
        for idx in 0..vi.len() {
            let out_idx = match spec {
                StreamFunctionSpec::Table { .. } => match &explicit {
                    Some((map, default)) => match map.get(&idx) {
                        Some(&o) => o,
                        None => default.ok_or_else(|| {
                            ModelError::IncompleteTable(vi.label(idx).to_string())
                        })?,
                    },
                    None => unreachable!("explicit table resolved above"),
                },
                _ => self.eval_builtin(spec, inputs, outputs, idx)?,
            };
            table.push(Elem(out_idx));
        }
        MonotoneMap::new(vo_domain(vi), vo_domain(vo), table).map_err(|e| match e {
            PosetError::NotMonotone { x, y } => {
                if matches!(spec, StreamFunctionSpec::Table { .. }) {
                    ModelError::NonMonotoneTable { x, y }
                } else {
                    ModelError::Poset(PosetError::NotMonotone { x, y })
                }
            }
            other => ModelError::Poset(other),
        })
    }

    fn check_spec_typing(
        &self,
        spec: &StreamFunctionSpec,
        inputs: &SortSpace,
        outputs: &SortSpace,
    ) -> Result<(), ModelError> {
        let stream_of = |name: &str| -> Result<&StreamChannel, ModelError> {
            match &self.channel(name)?.kind {
                ChannelKind::Stream(sc) => Ok(sc),
                ChannelKind::Raw => Err(ModelError::TypeMismatch(format!(
                    "channel {name} is not a stream channel"
                ))),
            }
        };
        match spec {
            StreamFunctionSpec::Const { values } => {
                for ch in &outputs.sort {
                    let v = values.get(ch).ok_or_else(|| {
                        ModelError::TypeMismatch(format!("const omits output channel {ch}"))
                    })?;
                    self.check_value_lit(ch, v)?;
                }
                for ch in values.keys() {
                    if !outputs.sort.contains(ch) {
                        return Err(ModelError::TypeMismatch(format!(
                            "const writes to {ch}, which is not an output"
                        )));
                    }
                }
                Ok(())
            }
            StreamFunctionSpec::Prepend { word } => {
                let (i, o) = single_in_out(inputs, outputs)?;
                let si = stream_of(&i)?;
                let so = stream_of(&o)?;
                for c in word.chars().chain(si.alphabet.iter().copied()) {
                    if !so.alphabet.contains(&c) {
                        return Err(ModelError::TypeMismatch(format!(
                            "symbol {c:?} is outside the alphabet of {o}"
                        )));
                    }
                }
                Ok(())
            }
            StreamFunctionSpec::MapSymbols { table } => {
                let (i, o) = single_in_out(inputs, outputs)?;
                let si = stream_of(&i)?;
                let so = stream_of(&o)?;
                for &c in &si.alphabet {
                    let img = table.get(&c).ok_or_else(|| {
                        ModelError::TypeMismatch(format!("map has no image for symbol {c:?}"))
                    })?;
                    if !so.alphabet.contains(img) {
                        return Err(ModelError::TypeMismatch(format!(
                            "symbol {img:?} is outside the alphabet of {o}"
                        )));
                    }
                }
                Ok(())
            }
            StreamFunctionSpec::Dmerge {
                left,
                right,
                oracle,
            } => {
                let expected: BTreeSet<String> = [left.clone(), right.clone()].into();
                let got: BTreeSet<String> = inputs.sort.iter().cloned().collect();
                if left == right || expected != got {
                    return Err(ModelError::TypeMismatch(format!(
                        "merge inputs must be exactly {{{left}, {right}}}"
                    )));
                }
                if outputs.sort.len() != 1 {
                    return Err(ModelError::TypeMismatch(
                        "merge writes exactly one output channel".to_string(),
                    ));
                }
                let so = stream_of(&outputs.sort[0])?;
                for side in [left, right] {
                    let sc = stream_of(side)?;
                    for &c in &sc.alphabet {
                        if !so.alphabet.contains(&c) {
                            return Err(ModelError::TypeMismatch(format!(
                                "symbol {c:?} of {side} is outside the merged alphabet"
                            )));
                        }
                    }
                }
                match oracle {
                    None => Err(ModelError::Stream(StreamError::OracleRequired)),
                    Some(o) => {
                        validate_oracle(o)?;
                        Ok(())
                    }
                }
            }
            StreamFunctionSpec::Table { entries, default } => {
                for (ins, outs) in entries {
                    self.check_tuple(ins, &inputs.sort)?;
                    self.check_tuple(outs, &outputs.sort)?;
                }
                if let Some(d) = default {
                    self.check_tuple(d, &outputs.sort)?;
                }
                Ok(())
            }
        }
    }

    fn check_tuple(
        &self,
        tuple: &BTreeMap<String, ValueLit>,
        sort: &[String],
    ) -> Result<(), ModelError> {
        for ch in sort {
            let v = tuple
                .get(ch)
                .ok_or_else(|| ModelError::TypeMismatch(format!("tuple omits channel {ch}")))?;
            self.check_value_lit(ch, v)?;
        }
        for ch in tuple.keys() {
            if !sort.contains(ch) {
                return Err(ModelError::TypeMismatch(format!(
                    "tuple mentions {ch}, which is not in the sort"
                )));
            }
        }
        Ok(())
    }

    fn check_value_lit(&self, channel: &str, v: &ValueLit) -> Result<(), ModelError> {
        let cm = self.channel(channel)?;
        match (&cm.kind, v) {
            (ChannelKind::Stream(sc), ValueLit::Word(w)) => {
                sc.check_word(channel, w)?;
                Ok(())
            }
            (ChannelKind::Raw, ValueLit::Events(events)) => {
                let mut cfg = BTreeSet::new();
                for l in events {
                    let e = cm
                        .es
                        .index_of(l)
                        .ok_or_else(|| ModelError::Es(EsError::UnknownEvent(l.clone())))?;
                    cfg.insert(e);
                }
                cm.es.validate_config(&Config(cfg))?;
                Ok(())
            }
            (ChannelKind::Stream(_), ValueLit::Events(_)) => Err(ModelError::TypeMismatch(
                format!("channel {channel} carries words, not event sets"),
            )),
            (ChannelKind::Raw, ValueLit::Word(_)) => Err(ModelError::TypeMismatch(format!(
                "channel {channel} carries event sets, not words"
            ))),
        }
    }

    /// Per-channel value of a value-poset element, as a literal.
    pub fn value_lit(&self, space: &SortSpace, idx: usize, channel_pos: usize) -> ValueLit {
        let cm = &self.channels[&space.sort[channel_pos]];
        let coord = space.values.coord(idx, channel_pos);
        match &cm.kind {
            ChannelKind::Stream(_) => {
                ValueLit::Word(word_of_config(&cm.es, cm.configs.config(coord)))
            }
            ChannelKind::Raw => ValueLit::Events(
                cm.configs
                    .config(coord)
                    .0
                    .iter()
                    .map(|&e| cm.es.label(e).to_string())
                    .collect(),
            ),
        }
    }

    fn lit_to_coord(&self, channel: &str, v: &ValueLit) -> Result<usize, ModelError> {
        let cm = self.channel(channel)?;
        let cfg = match (&cm.kind, v) {
            (ChannelKind::Stream(_), ValueLit::Word(w)) => config_of_word(&cm.es, w),
            (ChannelKind::Raw, ValueLit::Events(events)) => {
                let mut c = BTreeSet::new();
                for l in events {
                    let e = cm
                        .es
                        .index_of(l)
                        .ok_or_else(|| ModelError::Es(EsError::UnknownEvent(l.clone())))?;
                    c.insert(e);
                }
                Config(c)
            }
            _ => unreachable!("typing checked before resolution"),
        };
        cm.configs
            .index_of(&cfg)
            .ok_or_else(|| ModelError::TypeMismatch(format!("invalid value on {channel}")))
    }

    fn tuple_to_index(
        &self,
        tuple: &BTreeMap<String, ValueLit>,
        space: &SortSpace,
    ) -> Result<usize, ModelError> {
        let mut coords = Vec::with_capacity(space.sort.len());
        for ch in &space.sort {
            coords.push(self.lit_to_coord(ch, &tuple[ch])?);
        }
        Ok(space.values.index(&coords))
    }

    fn resolve_table(
        &self,
        spec: &StreamFunctionSpec,
        inputs: &SortSpace,
        outputs: &SortSpace,
    ) -> Result<Option<ResolvedTable>, ModelError> {
        if let StreamFunctionSpec::Table { entries, default } = spec {
            let mut map = HashMap::new();
            for (ins, outs) in entries {
                let i = self.tuple_to_index(ins, inputs)?;
                let o = self.tuple_to_index(outs, outputs)?;
                if map.insert(i, o).is_some() {
                    return Err(ModelError::DuplicateTableEntry(
                        inputs.values.label(i).to_string(),
                    ));
                }
            }
            let d = match default {
                Some(t) => Some(self.tuple_to_index(t, outputs)?),
                None => None,
            };
            Ok(Some((map, d)))
        } else {
            Ok(None)
        }
    }

    fn eval_builtin(
        &self,
        spec: &StreamFunctionSpec,
        inputs: &SortSpace,
        outputs: &SortSpace,
        idx: usize,
    ) -> Result<usize, ModelError> {
        match spec {
            StreamFunctionSpec::Const { values } => self.tuple_to_index(values, outputs),
            StreamFunctionSpec::Prepend { word } => {
                let w = self.input_word(inputs, idx, 0);
                let out_ch = &outputs.sort[0];
                let sc = match &self.channel(out_ch)?.kind {
                    ChannelKind::Stream(sc) => sc,
                    ChannelKind::Raw => unreachable!("typing checked"),
                };
                let full = sc.truncate(&format!("{word}{w}"));
                self.lit_to_coord(out_ch, &ValueLit::Word(full))
                    .map(|c| outputs.values.index(&[c]))
            }
            StreamFunctionSpec::MapSymbols { table } => {
                let w = self.input_word(inputs, idx, 0);
                let out_ch = &outputs.sort[0];
                let sc = match &self.channel(out_ch)?.kind {
                    ChannelKind::Stream(sc) => sc,
                    ChannelKind::Raw => unreachable!("typing checked"),
                };
                let mapped: String = w.chars().map(|c| table[&c]).collect();
                let full = sc.truncate(&mapped);
                self.lit_to_coord(out_ch, &ValueLit::Word(full))
                    .map(|c| outputs.values.index(&[c]))
            }
            StreamFunctionSpec::Dmerge {
                left,
                right,
                oracle,
            } => {
                let lpos = inputs.sort.iter().position(|c| c == left).expect("typed");
                let rpos = inputs.sort.iter().position(|c| c == right).expect("typed");
                let lw = self.input_word(inputs, idx, lpos);
                let rw = self.input_word(inputs, idx, rpos);
                let out_ch = &outputs.sort[0];
                let sc = match &self.channel(out_ch)?.kind {
                    ChannelKind::Stream(sc) => sc,
                    ChannelKind::Raw => unreachable!("typing checked"),
                };
                let o = oracle.as_deref().expect("typing checked");
                let merged = dmerge_word(&lw, &rw, o, sc.depth);
                self.lit_to_coord(out_ch, &ValueLit::Word(merged))
                    .map(|c| outputs.values.index(&[c]))
            }
            StreamFunctionSpec::Table { .. } => unreachable!("handled by resolve_table"),
        }
    }

    fn input_word(&self, inputs: &SortSpace, idx: usize, pos: usize) -> String {
        let cm = &self.channels[&inputs.sort[pos]];
        let coord = inputs.values.coord(idx, pos);
        word_of_config(&cm.es, cm.configs.config(coord))
    }
}

/// Tabulated explicit graph: input index → output index, plus a default.
type ResolvedTable = (HashMap<usize, usize>, Option<usize>);

fn single_in_out(inputs: &SortSpace, outputs: &SortSpace) -> Result<(String, String), ModelError> {
    if inputs.sort.len() != 1 || outputs.sort.len() != 1 {
        return Err(ModelError::TypeMismatch(
            "function requires exactly one input and one output channel".to_string(),
        ));
    }
    Ok((inputs.sort[0].clone(), outputs.sort[0].clone()))
}

fn vo_domain(v: &ValuePoset) -> Arc<crate::poset::FinitePointedPoset> {
    v.poset.clone()
}

/// Everything a sort needs: the product event structure and the value poset,
/// plus the per-channel extension tables used by incremental trace walkers.
#[derive(Debug, Clone)]
pub struct SortSpace {
    pub sort: Vec<String>,
    pub product: ProductEs,
    pub values: ValuePoset,
    /// Per channel position: (config index, base event) → extended config.
    extend: Vec<HashMap<(usize, usize), usize>>,
}

impl SortSpace {
    pub fn sort_set(&self) -> BTreeSet<String> {
        self.sort.iter().cloned().collect()
    }

    pub fn is_subsort_of(&self, other: &SortSpace) -> bool {
        self.sort.iter().all(|c| other.sort.contains(c))
    }

    pub fn extend_coord(&self, channel_pos: usize, cfg: usize, base_event: usize) -> usize {
        self.extend[channel_pos][&(cfg, base_event)]
    }

    /// Value of a configuration of the product structure.
    pub fn value_of_config(&self, cfg: &Config) -> usize {
        let mut per_channel: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.sort.len()];
        for &e in &cfg.0 {
            per_channel[self.product.channel_of[e]].insert(self.product.base_of[e]);
        }
        let coords: Vec<usize> = per_channel
            .into_iter()
            .enumerate()
            .map(|(pos, events)| {
                self.values.parts[pos]
                    .index_of(&Config(events))
                    .expect("slices of configurations are configurations")
            })
            .collect();
        self.values.index(&coords)
    }

    /// Evaluation map: the value of a trace is its carrier.
    pub fn mu(&self, t: &Trace) -> usize {
        self.value_of_config(&t.carrier_config())
    }

    /// Restriction map into a subsort.
    pub fn restrict(&self, t: &Trace, sub: &SortSpace) -> Trace {
        restrict_trace(t, &self.product, &sub.product)
    }

    pub fn project_value(&self, idx: usize, sub: &SortSpace) -> usize {
        self.values.project(idx, &sub.values)
    }

    pub fn bottom_trace(&self) -> Trace {
        Trace::bottom(self.product.es.clone())
    }

    pub fn value_label(&self, idx: usize) -> &str {
        self.values.label(idx)
    }
}

/// Tabulate the restriction map between two materialized trace domains as a
/// monotone map, for the relative-cover checks.
pub fn restriction_map_between(
    model: &ModelInstance,
    s_space: &SortSpace,
    t_space: &SortSpace,
) -> Result<(TraceDomain, TraceDomain, MonotoneMap), ModelError> {
    let s_dom = model.trace_domain(s_space)?;
    let t_dom = model.trace_domain(t_space)?;
    let table: Vec<Elem> = s_dom
        .traces
        .iter()
        .map(|t| {
            let r = s_space.restrict(t, t_space);
            Elem(
                t_dom
                    .index_of(&r)
                    .expect("restrictions of traces are traces of the subsort"),
            )
        })
        .collect();
    let map = MonotoneMap::new(s_dom.poset.clone(), t_dom.poset.clone(), table)?;
    Ok((s_dom, t_dom, map))
}

/// Compute an observation both ways (evaluate after restricting, and
/// project the full evaluation), assert they agree, and return it.
pub fn observe(t: &Trace, src: &SortSpace, dst: &SortSpace) -> usize {
    let via_restrict = dst.mu(&src.restrict(t, dst));
    let via_project = src.project_value(src.mu(t), dst);
    assert_eq!(
        via_restrict, via_project,
        "evaluation must commute with restriction"
    );
    via_restrict
}

/// Result of checking the model axioms on a list of sorts.
#[derive(Debug, Clone)]
pub struct ModelAxiomsReport {
    /// (law name, verdict with textual witness).
    pub laws: Vec<(String, Verdict<String>)>,
}

impl ModelAxiomsReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(|(_, v)| v.passed())
    }

    pub fn first_failure(&self) -> Option<&(String, Verdict<String>)> {
        self.laws.iter().find(|(_, v)| !v.passed())
    }
}

type RestrictionFn<'a> = &'a dyn Fn(&Trace, &SortSpace, &SortSpace) -> Trace;

/// Exhaustively check restriction functoriality, evaluation naturality,
/// strictness, the product characterization of values, and the trace-domain
/// cover law on the listed sorts.
pub fn check_model_axioms(
    model: &ModelInstance,
    sorts: &[BTreeSet<String>],
) -> Result<ModelAxiomsReport, ModelError> {
    check_model_axioms_with(model, sorts, &|t, src, dst| src.restrict(t, dst))
}

/// Same checks with a replaceable restriction map, so negative controls can
/// verify that a corrupted restriction is caught.
pub fn check_model_axioms_with(
    model: &ModelInstance,
    sorts: &[BTreeSet<String>],
    restrict: RestrictionFn<'_>,
) -> Result<ModelAxiomsReport, ModelError> {
    let mut laws: Vec<(String, Verdict<String>)> = Vec::new();
    let mut spaces = Vec::new();
    let mut domains = Vec::new();
    for sort in sorts {
        let space = model.space(sort)?;
        let dom = model.trace_domain(&space)?;
        spaces.push(space);
        domains.push(dom);
    }

    for (si, space) in spaces.iter().enumerate() {
        let name = sort_name(&space.sort);
        let dom = &domains[si];

        // Identity restriction.
        let id_ok = dom.traces.iter().all(|t| &restrict(t, space, space) == t);
        laws.push((
            format!("restriction-identity@{name}"),
            if id_ok {
                Verdict::Pass
            } else {
                Verdict::Fail {
                    witness: "restriction to the same sort is not the identity".into(),
                }
            },
        ));

        // Evaluation is strict.
        let mu_bot = space.mu(&space.bottom_trace());
        laws.push((
            format!("evaluation-strict@{name}"),
            if mu_bot == space.values.bottom() {
                Verdict::Pass
            } else {
                Verdict::Fail {
                    witness: format!("empty trace evaluates to {}", space.value_label(mu_bot)),
                }
            },
        ));

        // Evaluation is monotone.
        let mut mu_mono = Verdict::Pass;
        'outer: for a in &dom.traces {
            for b in &dom.traces {
                if trace_leq(a, b) && !space.values.leq(space.mu(a), space.mu(b)) {
                    mu_mono = Verdict::Fail {
                        witness: format!(
                            "{} ⊑ {} but values are unordered",
                            a.display(),
                            b.display()
                        ),
                    };
                    break 'outer;
                }
            }
        }
        laws.push((format!("evaluation-monotone@{name}"), mu_mono));

        // Values are the product of the per-channel configuration domains.
        let iso = check_product_iso(
            &model.family(),
            &space.sort_set(),
            model.bounds.max_values_per_sort,
        )?;
        laws.push((format!("value-product-iso@{name}"), iso));

        // Cover law of the trace domain: covers add one maximal event.
        let mut cover_law = Verdict::Pass;
        'cover: for i in 0..dom.len() {
            for j in 0..dom.len() {
                let t = dom.trace(i);
                let u = dom.trace(j);
                let is_cover = dom.poset.is_cover(Elem(i), Elem(j));
                let diff: Vec<usize> = u
                    .carrier()
                    .iter()
                    .filter(|e| !t.carrier().contains(e))
                    .copied()
                    .collect();
                let law = trace_leq(t, u)
                    && diff.len() == 1
                    && u.carrier().iter().all(|&f| !u.lt(diff[0], f));
                if is_cover != law {
                    cover_law = Verdict::Fail {
                        witness: format!("cover law fails at {} ≺ {}", t.display(), u.display()),
                    };
                    break 'cover;
                }
            }
        }
        laws.push((format!("trace-cover-law@{name}"), cover_law));

        if model.kind == TraceKind::Linear {
            let total = dom.traces.iter().all(|t| t.is_linear());
            laws.push((
                format!("linear-totality@{name}"),
                if total {
                    Verdict::Pass
                } else {
                    Verdict::Fail {
                        witness: "non-total order in the linear domain".into(),
                    }
                },
            ));
        }
    }

    // Pairs: restriction validity, strictness, monotonicity, naturality.
    for (si, s_space) in spaces.iter().enumerate() {
        for t_space in spaces.iter() {
            if !t_space.is_subsort_of(s_space) || s_space.sort == t_space.sort {
                continue;
            }
            let pair = format!("{}→{}", sort_name(&s_space.sort), sort_name(&t_space.sort));
            let dom = &domains[si];

            let mut validity = Verdict::Pass;
            let mut naturality = Verdict::Pass;
            for t in &dom.traces {
                let r = restrict(t, s_space, t_space);
                let revalidated = Trace::validate(
                    t_space.product.es.clone(),
                    r.carrier().iter().copied().collect(),
                    r.strict_pairs().iter().copied(),
                );
                match revalidated {
                    Ok(rv) if rv == r => {}
                    Ok(_) => {
                        validity = Verdict::Fail {
                            witness: format!(
                                "restriction of {} is not transitively closed",
                                t.display()
                            ),
                        };
                        break;
                    }
                    Err(e) => {
                        validity = Verdict::Fail {
                            witness: format!("restriction of {} invalid: {e}", t.display()),
                        };
                        break;
                    }
                }
                let lhs = t_space.mu(&r);
                let rhs = s_space.project_value(s_space.mu(t), t_space);
                if lhs != rhs {
                    naturality = Verdict::Fail {
                        witness: format!(
                            "observation of {} differs: {} vs {}",
                            t.display(),
                            t_space.value_label(lhs),
                            t_space.value_label(rhs)
                        ),
                    };
                }
            }
            laws.push((format!("restriction-valid@{pair}"), validity));

            let strict_ok = restrict(&s_space.bottom_trace(), s_space, t_space).is_empty();
            laws.push((
                format!("restriction-strict@{pair}"),
                if strict_ok {
                    Verdict::Pass
                } else {
                    Verdict::Fail {
                        witness: "restriction of the empty trace is non-empty".into(),
                    }
                },
            ));

            let mut mono = Verdict::Pass;
            'mono: for a in &dom.traces {
                for b in &dom.traces {
                    if trace_leq(a, b) {
                        let ra = restrict(a, s_space, t_space);
                        let rb = restrict(b, s_space, t_space);
                        if !trace_leq(&ra, &rb) {
                            mono = Verdict::Fail {
                                witness: format!(
                                    "{} ⊑ {} but restrictions are unordered",
                                    a.display(),
                                    b.display()
                                ),
                            };
                            break 'mono;
                        }
                    }
                }
            }
            laws.push((format!("restriction-monotone@{pair}"), mono));
            laws.push((format!("evaluation-natural@{pair}"), naturality));
        }
    }

    // Triples: functoriality.
    for (si, s_space) in spaces.iter().enumerate() {
        for t_space in spaces.iter() {
            for u_space in spaces.iter() {
                if !(u_space.is_subsort_of(t_space) && t_space.is_subsort_of(s_space)) {
                    continue;
                }
                if s_space.sort == t_space.sort || t_space.sort == u_space.sort {
                    continue;
                }
                let triple = format!(
                    "{}→{}→{}",
                    sort_name(&s_space.sort),
                    sort_name(&t_space.sort),
                    sort_name(&u_space.sort)
                );
                let dom = &domains[si];
                let mut fun = Verdict::Pass;
                for t in &dom.traces {
                    let two_step = restrict(&restrict(t, s_space, t_space), t_space, u_space);
                    let direct = restrict(t, s_space, u_space);
                    if two_step != direct {
                        fun = Verdict::Fail {
                            witness: format!("functoriality fails at {}", t.display()),
                        };
                        break;
                    }
                }
                laws.push((format!("restriction-functorial@{triple}"), fun));
            }
        }
    }

    Ok(ModelAxiomsReport { laws })
}

pub fn sort_name(sort: &[String]) -> String {
    if sort.is_empty() {
        "{}".to_string()
    } else {
        format!("{{{}}}", sort.join(","))
    }
}
