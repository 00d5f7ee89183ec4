//! Variable reordering by in-place adjacent level swaps.
//!
//! A swap rewrites the nodes of the upper level so that every node keeps its
//! slot and the function it denotes. Handles held by callers therefore stay
//! valid across reordering, provided they were passed as roots.

use crate::manager::{Bdd, BddRef, VarId, FREE_VAR};
use crate::{BddError, Result};

/// Sifting stops moving a variable in one direction once the forest grows
/// past this factor of the best size seen.
const MAX_GROWTH: f64 = 1.2;
/// Only the largest levels are sifted.
const MAX_SIFT_VARS: usize = 1000;

/// Reference counts over node slots (parents plus external roots).
struct RefCounts(Vec<u32>);

impl RefCounts {
    fn ensure(&mut self, len: usize) {
        if self.0.len() < len {
            self.0.resize(len, 0);
        }
    }
}

impl Bdd {
    fn ref_counts(&self, roots: &[BddRef]) -> RefCounts {
        let mut refs = vec![0u32; self.nodes.len()];
        for n in self.nodes.iter().skip(2) {
            if n.var == FREE_VAR {
                continue;
            }
            refs[n.low.0 as usize] += 1;
            refs[n.high.0 as usize] += 1;
        }
        for r in roots {
            refs[r.0 as usize] += 1;
        }
        RefCounts(refs)
    }

    fn inc_ref(&self, refs: &mut RefCounts, f: BddRef) {
        if !f.is_const() {
            refs.0[f.0 as usize] += 1;
        }
    }

    fn dec_ref(&mut self, refs: &mut RefCounts, f: BddRef) {
        if f.is_const() {
            return;
        }
        let c = &mut refs.0[f.0 as usize];
        if *c > 1 {
            *c -= 1;
            return;
        }
        let mut stack = vec![f];
        while let Some(f) = stack.pop() {
            if f.is_const() {
                continue;
            }
            let c = &mut refs.0[f.0 as usize];
            *c -= 1;
            if *c == 0 {
                let n = self.node_raw(f);
                self.release(f);
                stack.push(n.low);
                stack.push(n.high);
            }
        }
    }

    /// Exchanges the variables at `level` and `level + 1`.
    fn swap_adjacent(&mut self, level: usize, refs: &mut RefCounts) {
        let x = self.level_var[level];
        let y = self.level_var[level + 1];
        // nodes of x without a y child stay; the rest move to y, with their
        // cofactors taken during the scan
        let mut moving = Vec::new();
        let nodes = &self.nodes;
        self.unique[x as usize].retain(|&(low, high), &mut f| {
            let l = nodes[low.0 as usize];
            let h = nodes[high.0 as usize];
            let (low_y, high_y) = (l.var == y, h.var == y);
            if !low_y && !high_y {
                return true;
            }
            let (f00, f01) = if low_y { (l.low, l.high) } else { (low, low) };
            let (f10, f11) = if high_y {
                (h.low, h.high)
            } else {
                (high, high)
            };
            moving.push((f, low, high, [f00, f01, f10, f11]));
            false
        });
        self.unique[y as usize].reserve(moving.len());
        for (f, low, high, [f00, f01, f10, f11]) in moving {
            let a = self.mk_swap(x, f00, f10, refs);
            let b = self.mk_swap(x, f01, f11, refs);
            self.inc_ref(refs, a);
            self.inc_ref(refs, b);
            let slot = &mut self.nodes[f.0 as usize];
            slot.var = y;
            slot.low = a;
            slot.high = b;
            self.unique[y as usize].insert((a, b), f);
            self.dec_ref(refs, low);
            self.dec_ref(refs, high);
        }
        self.level_var.swap(level, level + 1);
        self.var_level[x as usize] = (level + 1) as u32;
        self.var_level[y as usize] = level as u32;
    }

    fn mk_swap(&mut self, var: u32, low: BddRef, high: BddRef, refs: &mut RefCounts) -> BddRef {
        let (r, fresh) = self.mk_unchecked(var, low, high);
        if fresh {
            refs.ensure(self.nodes.len());
            refs.0[r.0 as usize] = 0;
            self.inc_ref(refs, low);
            self.inc_ref(refs, high);
        }
        r
    }

    fn finish_reorder(&mut self) -> Result<()> {
        self.cache.clear();
        self.reorders += 1;
        if self.live > self.budget() {
            return Err(BddError::NodeBudget {
                budget: self.budget(),
            });
        }
        Ok(())
    }

    /// Installs `order` (top to bottom, a permutation of all variables).
    ///
    /// Nodes unreachable from `roots` are reclaimed first; every root keeps
    /// its handle and its function.
    pub fn set_order(&mut self, order: &[VarId], roots: &[BddRef]) -> Result<()> {
        let nvars = self.num_vars();
        if order.len() != nvars {
            return Err(BddError::InvalidOrder(format!(
                "expected {nvars} variables, got {}",
                order.len()
            )));
        }
        let mut seen = vec![false; nvars];
        for v in order {
            self.check_var(*v)?;
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(BddError::InvalidOrder(format!("variable {} repeated", v.0)));
            }
        }
        if order
            .iter()
            .enumerate()
            .all(|(l, v)| self.level_of(*v) == l)
        {
            return Ok(());
        }
        self.gc(roots);
        let mut refs = self.ref_counts(roots);
        for (target, v) in order.iter().enumerate() {
            let mut lvl = self.level_of(*v);
            while lvl > target {
                self.swap_adjacent(lvl - 1, &mut refs);
                lvl -= 1;
            }
        }
        self.finish_reorder()
    }

    /// Rudell-style sifting: each variable in turn is moved through every
    /// level and left where the forest reachable from `roots` was smallest.
    ///
    /// Returns the live node count afterwards.
    pub fn sift_reorder(&mut self, roots: &[BddRef]) -> Result<usize> {
        self.gc(roots);
        let nvars = self.num_vars();
        if nvars < 2 {
            return Ok(self.live);
        }
        let mut refs = self.ref_counts(roots);
        let mut vars: Vec<u32> = (0..nvars as u32).collect();
        vars.sort_by_key(|&v| std::cmp::Reverse(self.unique[v as usize].len()));
        vars.truncate(MAX_SIFT_VARS);
        for v in vars {
            self.sift_var(v, &mut refs);
        }
        self.finish_reorder()?;
        Ok(self.live)
    }

    fn sift_var(&mut self, v: u32, refs: &mut RefCounts) {
        let bottom = self.num_vars() - 1;
        let mut best_size = self.live;
        let mut best_level = self.var_level[v as usize] as usize;
        let limit = |best: usize| (best as f64 * MAX_GROWTH) as usize;

        let start = best_level;
        let down_first = start >= bottom / 2;
        let mut lvl = start;
        let mut pass = |bdd: &mut Bdd, lvl: &mut usize, down: bool| loop {
            if down {
                if *lvl >= bottom {
                    break;
                }
                bdd.swap_adjacent(*lvl, refs);
                *lvl += 1;
            } else {
                if *lvl == 0 {
                    break;
                }
                bdd.swap_adjacent(*lvl - 1, refs);
                *lvl -= 1;
            }
            if bdd.live < best_size {
                best_size = bdd.live;
                best_level = *lvl;
            }
            if bdd.live > limit(best_size) {
                break;
            }
        };
        pass(self, &mut lvl, down_first);
        pass(self, &mut lvl, !down_first);
        while lvl < best_level {
            self.swap_adjacent(lvl, refs);
            lvl += 1;
        }
        while lvl > best_level {
            self.swap_adjacent(lvl - 1, refs);
            lvl -= 1;
        }
    }
}
