//! Outcome of a mechanical check: pass, vacuous pass (the property could not
//! be exercised and is recorded as such), or fail with a witness.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Pass,
    Vacuous { note: String },
    Fail { witness: W },
}

impl<W> Verdict<W> {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail { .. })
    }

    pub fn is_vacuous(&self) -> bool {
        matches!(self, Verdict::Vacuous { .. })
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fail { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn map_witness<V>(self, f: impl FnOnce(W) -> V) -> Verdict<V> {
        match self {
            Verdict::Pass => Verdict::Pass,
            Verdict::Vacuous { note } => Verdict::Vacuous { note },
            Verdict::Fail { witness } => Verdict::Fail {
                witness: f(witness),
            },
        }
    }
}
