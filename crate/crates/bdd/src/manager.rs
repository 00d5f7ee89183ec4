use std::collections::hash_map::Entry;

use rustc_hash::FxHashMap;

use crate::cache::ComputedTable;
use crate::{BddError, Result};

/// Default cap on live internal nodes (2^26).
pub const DEFAULT_NODE_BUDGET: usize = 1 << 26;

pub(crate) const TERMINAL_VAR: u32 = u32::MAX;
pub(crate) const FREE_VAR: u32 = u32::MAX - 1;

/// Minimum live-node count before automatic collection kicks in.
const MIN_GC_THRESHOLD: usize = 1 << 18;

/// Handle to a node of a [`Bdd`] forest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BddRef(pub(crate) u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    #[inline]
    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    /// Raw slot index, stable until the node is reclaimed.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }
}

/// Identity of a Boolean variable.
///
/// Identities are stable across reordering; the variable's position in the
/// order is its level, see [`Bdd::level_of`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Node {
    pub(crate) var: u32,
    pub(crate) low: BddRef,
    pub(crate) high: BddRef,
}

/// Read-only view of an internal node.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NodeView {
    pub var: VarId,
    pub low: BddRef,
    pub high: BddRef,
}

/// Counters surfaced to callers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BddStats {
    pub live_nodes: usize,
    pub peak_nodes: usize,
    pub cache_lookups: u64,
    pub cache_hits: u64,
    pub gc_runs: usize,
    pub reorders: usize,
}

impl BddStats {
    pub fn cache_hit_rate(&self) -> f64 {
        if self.cache_lookups == 0 {
            0.0
        } else {
            self.cache_hits as f64 / self.cache_lookups as f64
        }
    }
}

/// BDD manager: node store, unique tables, operation cache and variable order.
#[derive(Clone)]
pub struct Bdd {
    pub(crate) nodes: Vec<Node>,
    free: Vec<u32>,
    /// One unique table per variable, keyed on `(low, high)`.
    pub(crate) unique: Vec<FxHashMap<(BddRef, BddRef), BddRef>>,
    pub(crate) var_level: Vec<u32>,
    pub(crate) level_var: Vec<u32>,
    pub(crate) cache: ComputedTable,
    budget: usize,
    pub(crate) live: usize,
    peak: usize,
    gc_threshold: usize,
    gc_runs: usize,
    pub(crate) reorders: usize,
}

impl Default for Bdd {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for Bdd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bdd")
            .field("vars", &self.num_vars())
            .field("live", &self.live)
            .field("budget", &self.budget)
            .finish()
    }
}

impl Bdd {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        let terminal = |_| Node {
            var: TERMINAL_VAR,
            low: BddRef::FALSE,
            high: BddRef::FALSE,
        };
        Self {
            nodes: (0..2).map(terminal).collect(),
            free: Vec::new(),
            unique: Vec::new(),
            var_level: Vec::new(),
            level_var: Vec::new(),
            cache: ComputedTable::new(),
            budget,
            live: 0,
            peak: 0,
            gc_threshold: MIN_GC_THRESHOLD,
            gc_runs: 0,
            reorders: 0,
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn set_budget(&mut self, budget: usize) {
        self.budget = budget;
    }

    /// Registers a fresh variable at the bottom of the current order.
    pub fn new_var(&mut self) -> VarId {
        let id = self.unique.len() as u32;
        self.unique.push(FxHashMap::default());
        self.var_level.push(id);
        self.level_var.push(id);
        VarId(id)
    }

    pub fn num_vars(&self) -> usize {
        self.unique.len()
    }

    /// Current position of `v` in the order (0 is the root level).
    pub fn level_of(&self, v: VarId) -> usize {
        self.var_level[v.index()] as usize
    }

    pub fn var_at_level(&self, level: usize) -> VarId {
        VarId(self.level_var[level])
    }

    /// Variables from top to bottom.
    pub fn order(&self) -> Vec<VarId> {
        self.level_var.iter().map(|&v| VarId(v)).collect()
    }

    /// Level of the node's variable; terminals sit below every variable.
    #[inline]
    pub fn level(&self, f: BddRef) -> u32 {
        let var = self.nodes[f.0 as usize].var;
        if var == TERMINAL_VAR {
            u32::MAX
        } else {
            self.var_level[var as usize]
        }
    }

    #[inline]
    pub(crate) fn node_raw(&self, f: BddRef) -> Node {
        self.nodes[f.0 as usize]
    }

    /// Decomposes an internal node; `None` for the terminals.
    pub fn node(&self, f: BddRef) -> Option<NodeView> {
        if f.is_const() {
            return None;
        }
        let n = self.nodes[f.0 as usize];
        Some(NodeView {
            var: VarId(n.var),
            low: n.low,
            high: n.high,
        })
    }

    pub(crate) fn check_var(&self, v: VarId) -> Result<()> {
        if v.index() < self.unique.len() {
            Ok(())
        } else {
            Err(BddError::UnknownVar(v.0))
        }
    }

    /// The projection function of `v`.
    pub fn mk_var(&mut self, v: VarId) -> Result<BddRef> {
        self.literal(v, true)
    }

    /// `v` if `phase`, otherwise `¬v`.
    pub fn literal(&mut self, v: VarId, phase: bool) -> Result<BddRef> {
        self.check_var(v)?;
        if phase {
            self.mk(v.0, BddRef::FALSE, BddRef::TRUE)
        } else {
            self.mk(v.0, BddRef::TRUE, BddRef::FALSE)
        }
    }

    /// Finds or creates the node `(var, low, high)`, applying the reduction rule.
    pub(crate) fn mk(&mut self, var: u32, low: BddRef, high: BddRef) -> Result<BddRef> {
        if low == high {
            return Ok(low);
        }
        debug_assert!(self.level(low) > self.var_level[var as usize]);
        debug_assert!(self.level(high) > self.var_level[var as usize]);
        let node = Node { var, low, high };
        match self.unique[var as usize].entry((low, high)) {
            Entry::Occupied(e) => Ok(*e.get()),
            Entry::Vacant(e) => {
                if self.live >= self.budget {
                    return Err(BddError::NodeBudget {
                        budget: self.budget,
                    });
                }
                let id = match self.free.pop() {
                    Some(i) => {
                        self.nodes[i as usize] = node;
                        i
                    }
                    None => {
                        self.nodes.push(node);
                        (self.nodes.len() - 1) as u32
                    }
                };
                e.insert(BddRef(id));
                self.live += 1;
                self.peak = self.peak.max(self.live);
                self.cache.grow_for(self.live);
                Ok(BddRef(id))
            }
        }
    }

    /// Allocation path used by level swaps: never fails, the budget is
    /// checked once the reordering pass is over.
    pub(crate) fn mk_unchecked(&mut self, var: u32, low: BddRef, high: BddRef) -> (BddRef, bool) {
        if low == high {
            return (low, false);
        }
        if let Some(&r) = self.unique[var as usize].get(&(low, high)) {
            return (r, false);
        }
        let node = Node { var, low, high };
        let id = match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.unique[var as usize].insert((low, high), BddRef(id));
        self.live += 1;
        self.peak = self.peak.max(self.live);
        (BddRef(id), true)
    }

    /// Removes a node from its unique table and returns its slot to the free list.
    pub(crate) fn release(&mut self, f: BddRef) {
        let n = self.nodes[f.0 as usize];
        self.unique[n.var as usize].remove(&(n.low, n.high));
        self.nodes[f.0 as usize].var = FREE_VAR;
        self.free.push(f.0);
        self.live -= 1;
    }

    /// Reclaims every node not reachable from `roots`; returns the number reclaimed.
    ///
    /// Handles outside `roots` become invalid.
    pub fn gc(&mut self, roots: &[BddRef]) -> usize {
        let mut marked = vec![false; self.nodes.len()];
        let mut stack: Vec<BddRef> = roots.iter().copied().filter(|r| !r.is_const()).collect();
        while let Some(f) = stack.pop() {
            let i = f.0 as usize;
            if marked[i] {
                continue;
            }
            marked[i] = true;
            let n = self.nodes[i];
            if !n.low.is_const() {
                stack.push(n.low);
            }
            if !n.high.is_const() {
                stack.push(n.high);
            }
        }
        let mut reclaimed = 0;
        for (i, &is_marked) in marked.iter().enumerate().skip(2) {
            let var = self.nodes[i].var;
            if var != FREE_VAR && !is_marked {
                self.release(BddRef(i as u32));
                reclaimed += 1;
            }
        }
        self.cache.clear();
        self.gc_runs += 1;
        self.gc_threshold = (2 * self.live).max(MIN_GC_THRESHOLD);
        reclaimed
    }

    /// Collects when live nodes have doubled since the previous collection
    /// or are close to the budget.
    pub fn collect_if_needed(&mut self, roots: &[BddRef]) -> usize {
        if self.live >= self.gc_threshold || self.live >= self.budget - self.budget / 8 {
            self.gc(roots)
        } else {
            0
        }
    }

    /// Number of distinct internal nodes reachable from `roots`.
    pub fn node_count(&self, roots: &[BddRef]) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack: Vec<BddRef> = roots.iter().copied().filter(|r| !r.is_const()).collect();
        while let Some(f) = stack.pop() {
            if !seen.insert(f) {
                continue;
            }
            let n = self.nodes[f.0 as usize];
            for c in [n.low, n.high] {
                if !c.is_const() {
                    stack.push(c);
                }
            }
        }
        seen.len()
    }

    pub fn live_nodes(&self) -> usize {
        self.live
    }

    pub fn stats(&self) -> BddStats {
        BddStats {
            live_nodes: self.live,
            peak_nodes: self.peak,
            cache_lookups: self.cache.lookups,
            cache_hits: self.cache.hits,
            gc_runs: self.gc_runs,
            reorders: self.reorders,
        }
    }

    pub fn cache_hit_rate(&self) -> f64 {
        self.cache.hit_rate()
    }

    /// Verifies the reduced/ordered/unique invariants over every live node.
    ///
    /// Intended for tests; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut count = 0;
        let mut seen = rustc_hash::FxHashSet::default();
        for (i, n) in self.nodes.iter().enumerate().skip(2) {
            if n.var == FREE_VAR {
                continue;
            }
            count += 1;
            if n.low == n.high {
                return Err(format!("node {i} has identical children"));
            }
            let lvl = self.var_level[n.var as usize];
            if self.level(n.low) <= lvl || self.level(n.high) <= lvl {
                return Err(format!("node {i} is out of order"));
            }
            if !seen.insert((n.var, n.low, n.high)) {
                return Err(format!("node {i} duplicates another node"));
            }
            if self.unique[n.var as usize].get(&(n.low, n.high)) != Some(&BddRef(i as u32)) {
                return Err(format!("node {i} missing from its unique table"));
            }
        }
        let tabled: usize = self.unique.iter().map(|t| t.len()).sum();
        if tabled != count || count != self.live {
            return Err(format!(
                "node accounting mismatch: {count} nodes, {tabled} tabled, {} live",
                self.live
            ));
        }
        Ok(())
    }
}
