use crate::{BddError, Result, VarId};

/// A variable in a given phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: VarId,
    pub phase: bool,
}

impl Literal {
    pub fn new(var: VarId, phase: bool) -> Self {
        Self { var, phase }
    }

    pub fn pos(var: VarId) -> Self {
        Self::new(var, true)
    }

    pub fn neg(var: VarId) -> Self {
        Self::new(var, false)
    }
}

/// Conjunction of literals over distinct variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cube {
    lits: Vec<Literal>,
}

impl Cube {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a cube; repeated literals collapse, opposite phases are rejected.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_by_key(|l| (l.var, l.phase));
        lits.dedup();
        if let Some(w) = lits.windows(2).find(|w| w[0].var == w[1].var) {
            return Err(BddError::ConflictingCube(w[0].var.0));
        }
        Ok(Self { lits })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }
}
