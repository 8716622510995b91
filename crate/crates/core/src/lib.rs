//! Finite-model verification for abstract asynchronous dataflow networks.
//!
//! The crate builds desk-scale models of trace and value domains over prime
//! event structures, composes non-deterministic functional networks, computes
//! the generalized Kahn fixpoint semantics, and mechanically checks the
//! generalized Kahn principle, safety (every behaviour computes a specified
//! value) and liveness (every specified value is realized), together with
//! the order-theoretic facts it rests on: covering structure, incrementality
//! of restriction maps, causal expressiveness, and the isomorphisms between
//! linear traces, covering sequences and labelled pomsets.
//!
//! Everything is finite and enumerated: cpos are finite pointed posets whose
//! elements are all compact, stream domains are truncated at a configurable
//! depth, and each theorem-shaped check is an exhaustive comparison of two
//! independently computed sides.

pub mod bitrel;
pub mod event_structure;
pub mod gen;
pub mod model;
pub mod network;
pub mod poset;
pub mod stream;
pub mod trace;
pub mod verdict;

pub use event_structure::{
    ChannelFamily, Config, ConfigPoset, EventStructure, ProductEs, ValuePoset,
};
pub use poset::{
    CompactChain, CoveringSequence, Elem, FinitePointedPoset, MonotoneMap, PosetError,
};
pub use trace::{LabelledPomset, Trace, TraceDomain, TraceKind};
pub use verdict::Verdict;
