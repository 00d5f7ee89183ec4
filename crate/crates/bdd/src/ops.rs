use crate::manager::{Bdd, BddRef, VarId};
use crate::{with_stack, BddError, Cube, Result};

const OP_AND: u32 = 0;
const OP_OR: u32 = 1;
const OP_XOR: u32 = 2;
const OP_NOT: u32 = 3;
const OP_ITE: u32 = 4;
const OP_COFACTOR: u32 = 5;

/// Binary connectives supported by [`Bdd::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Xor,
}

impl BoolOp {
    fn code(self) -> u32 {
        match self {
            BoolOp::And => OP_AND,
            BoolOp::Or => OP_OR,
            BoolOp::Xor => OP_XOR,
        }
    }
}

impl Bdd {
    /// Children of `f` with respect to the variable at `level`.
    #[inline]
    fn branches(&self, f: BddRef, level: u32) -> (BddRef, BddRef) {
        if self.level(f) == level {
            let n = self.node_raw(f);
            (n.low, n.high)
        } else {
            (f, f)
        }
    }

    pub fn apply(&mut self, op: BoolOp, f: BddRef, g: BddRef) -> Result<BddRef> {
        with_stack(|| self.apply_rec(op, f, g))
    }

    pub fn and(&mut self, f: BddRef, g: BddRef) -> Result<BddRef> {
        self.apply(BoolOp::And, f, g)
    }

    pub fn or(&mut self, f: BddRef, g: BddRef) -> Result<BddRef> {
        self.apply(BoolOp::Or, f, g)
    }

    pub fn xor(&mut self, f: BddRef, g: BddRef) -> Result<BddRef> {
        self.apply(BoolOp::Xor, f, g)
    }

    fn apply_rec(&mut self, op: BoolOp, f: BddRef, g: BddRef) -> Result<BddRef> {
        const F: BddRef = BddRef::FALSE;
        const T: BddRef = BddRef::TRUE;
        match op {
            BoolOp::And => {
                if f == F || g == F {
                    return Ok(F);
                }
                if f == T || f == g {
                    return Ok(g);
                }
                if g == T {
                    return Ok(f);
                }
            }
            BoolOp::Or => {
                if f == T || g == T {
                    return Ok(T);
                }
                if f == F || f == g {
                    return Ok(g);
                }
                if g == F {
                    return Ok(f);
                }
            }
            BoolOp::Xor => {
                if f == g {
                    return Ok(F);
                }
                if f == F {
                    return Ok(g);
                }
                if g == F {
                    return Ok(f);
                }
                if f == T {
                    return self.not_rec(g);
                }
                if g == T {
                    return self.not_rec(f);
                }
            }
        }
        // all three connectives commute
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        if let Some(r) = self.cache.get(op.code(), f, g, BddRef::FALSE) {
            return Ok(r);
        }
        let level = self.level(f).min(self.level(g));
        let var = self.level_var[level as usize];
        let (f0, f1) = self.branches(f, level);
        let (g0, g1) = self.branches(g, level);
        let lo = with_stack(|| self.apply_rec(op, f0, g0))?;
        let hi = with_stack(|| self.apply_rec(op, f1, g1))?;
        let r = self.mk(var, lo, hi)?;
        self.cache.put(op.code(), f, g, BddRef::FALSE, r);
        Ok(r)
    }

    pub fn not(&mut self, f: BddRef) -> Result<BddRef> {
        with_stack(|| self.not_rec(f))
    }

    fn not_rec(&mut self, f: BddRef) -> Result<BddRef> {
        if f == BddRef::FALSE {
            return Ok(BddRef::TRUE);
        }
        if f == BddRef::TRUE {
            return Ok(BddRef::FALSE);
        }
        if let Some(r) = self.cache.get(OP_NOT, f, BddRef::FALSE, BddRef::FALSE) {
            return Ok(r);
        }
        let n = self.node_raw(f);
        let lo = with_stack(|| self.not_rec(n.low))?;
        let hi = with_stack(|| self.not_rec(n.high))?;
        let r = self.mk(n.var, lo, hi)?;
        self.cache.put(OP_NOT, f, BddRef::FALSE, BddRef::FALSE, r);
        Ok(r)
    }

    /// If-then-else: `(f ∧ g) ∨ (¬f ∧ h)`.
    pub fn ite(&mut self, f: BddRef, g: BddRef, h: BddRef) -> Result<BddRef> {
        with_stack(|| self.ite_rec(f, g, h))
    }

    fn ite_rec(&mut self, f: BddRef, g: BddRef, h: BddRef) -> Result<BddRef> {
        const F: BddRef = BddRef::FALSE;
        const T: BddRef = BddRef::TRUE;
        if f == T || g == h {
            return Ok(g);
        }
        if f == F {
            return Ok(h);
        }
        if g == T && h == F {
            return Ok(f);
        }
        if g == F && h == T {
            return self.not_rec(f);
        }
        // reduce to binary operations where possible so their cache is shared
        if h == F {
            return self.apply_rec(BoolOp::And, f, g);
        }
        if g == T {
            return self.apply_rec(BoolOp::Or, f, h);
        }
        if let Some(r) = self.cache.get(OP_ITE, f, g, h) {
            return Ok(r);
        }
        let level = self.level(f).min(self.level(g)).min(self.level(h));
        let var = self.level_var[level as usize];
        let (f0, f1) = self.branches(f, level);
        let (g0, g1) = self.branches(g, level);
        let (h0, h1) = self.branches(h, level);
        let lo = with_stack(|| self.ite_rec(f0, g0, h0))?;
        let hi = with_stack(|| self.ite_rec(f1, g1, h1))?;
        let r = self.mk(var, lo, hi)?;
        self.cache.put(OP_ITE, f, g, h, r);
        Ok(r)
    }

    /// Conjunction of the cube's literals.
    pub fn cube(&mut self, cube: &Cube) -> Result<BddRef> {
        for lit in cube.literals() {
            self.check_var(lit.var)?;
        }
        let mut lits: Vec<_> = cube.literals().to_vec();
        lits.sort_by_key(|l| std::cmp::Reverse(self.level_of(l.var)));
        let mut acc = BddRef::TRUE;
        for lit in lits {
            acc = if lit.phase {
                self.mk(lit.var.0, BddRef::FALSE, acc)?
            } else {
                self.mk(lit.var.0, acc, BddRef::FALSE)?
            };
        }
        Ok(acc)
    }

    /// Cofactor of `f` with respect to a cube.
    pub fn cofactor(&mut self, f: BddRef, cube: &Cube) -> Result<BddRef> {
        let c = self.cube(cube)?;
        self.cofactor_by(f, c)
    }

    /// Cofactor of `f` with respect to a cube given in BDD form (as built by
    /// [`Bdd::cube`]). Non-cube arguments give unspecified results.
    pub fn cofactor_by(&mut self, f: BddRef, cube: BddRef) -> Result<BddRef> {
        with_stack(|| self.cofactor_rec(f, cube))
    }

    fn cofactor_rec(&mut self, f: BddRef, cube: BddRef) -> Result<BddRef> {
        if f.is_const() || cube.is_const() {
            return Ok(f);
        }
        if let Some(r) = self.cache.get(OP_COFACTOR, f, cube, BddRef::FALSE) {
            return Ok(r);
        }
        let lf = self.level(f);
        let lc = self.level(cube);
        let c = self.node_raw(cube);
        let (phase, rest) = if c.low == BddRef::FALSE {
            (true, c.high)
        } else {
            (false, c.low)
        };
        let r = if lc < lf {
            with_stack(|| self.cofactor_rec(f, rest))?
        } else if lc == lf {
            let n = self.node_raw(f);
            let child = if phase { n.high } else { n.low };
            with_stack(|| self.cofactor_rec(child, rest))?
        } else {
            let n = self.node_raw(f);
            let lo = with_stack(|| self.cofactor_rec(n.low, cube))?;
            let hi = with_stack(|| self.cofactor_rec(n.high, cube))?;
            self.mk(n.var, lo, hi)?
        };
        self.cache.put(OP_COFACTOR, f, cube, BddRef::FALSE, r);
        Ok(r)
    }

    /// Evaluates `f` under an assignment indexed by variable identity.
    pub fn eval(&self, f: BddRef, assignment: &[bool]) -> Result<bool> {
        let mut cur = f;
        while !cur.is_const() {
            let n = self.node_raw(cur);
            let bit = *assignment
                .get(n.var as usize)
                .ok_or(BddError::IncompleteAssignment(n.var))?;
            cur = if bit { n.high } else { n.low };
        }
        Ok(cur == BddRef::TRUE)
    }

    /// Evaluates `f` with variable values supplied by a closure.
    pub fn eval_with(&self, f: BddRef, mut value: impl FnMut(VarId) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_const() {
            let n = self.node_raw(cur);
            cur = if value(VarId(n.var)) { n.high } else { n.low };
        }
        cur == BddRef::TRUE
    }
}
