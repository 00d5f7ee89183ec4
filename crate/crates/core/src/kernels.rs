//! Gate application by Boolean formulas over the slice BDDs.
//!
//! Every kernel reads the pre-gate slices and produces a complete new set;
//! nothing is committed until all four families are computed and free of
//! overflow. On overflow the state is widened and the gate recomputed.

use std::time::Instant;

use qsim_bdd::{Bdd, BddError, BddRef, Cube, Literal, VarId};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::state::{Family, SlicedState};
use crate::{Result, SimError};

type Slices = [Vec<BddRef>; 4];

/// Bit-sliced two's-complement addition `A + B + C0`.
///
/// Returns the `r` sum slices and the signed-overflow predicate
/// `C^r ⊕ C^{r-1}`.
pub fn ripple_add(
    bdd: &mut Bdd,
    a: &[BddRef],
    b: &[BddRef],
    c0: BddRef,
) -> qsim_bdd::Result<(Vec<BddRef>, BddRef)> {
    assert_eq!(a.len(), b.len(), "operand widths differ");
    let mut carry = c0;
    let mut prev = c0;
    let mut sums = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let xy = bdd.xor(x, y)?;
        sums.push(bdd.xor(xy, carry)?);
        // Car(x, y, c) = xy ∨ (x ∨ y)c, written as ite(x ⊕ y, c, x)
        let next = bdd.ite(xy, carry, x)?;
        prev = carry;
        carry = next;
    }
    let overflow = bdd.xor(carry, prev)?;
    Ok((sums, overflow))
}

/// Per-gate record returned by [`apply_circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateStats {
    pub index: usize,
    pub live_nodes: usize,
    pub r: usize,
    pub k: i64,
}

/// Context shared by the formulas of one gate application.
struct Kernel<'a> {
    bdd: &'a mut Bdd,
    old: &'a Slices,
    /// Literal BDD of the (first) target.
    t: BddRef,
    /// `F|¬t` and `F|t` cubes for the first target.
    neg_t: BddRef,
    pos_t: BddRef,
}

impl Kernel<'_> {
    fn not(&mut self, f: BddRef) -> qsim_bdd::Result<BddRef> {
        self.bdd.not(f)
    }

    fn ite(&mut self, f: BddRef, g: BddRef, h: BddRef) -> qsim_bdd::Result<BddRef> {
        self.bdd.ite(f, g, h)
    }

    /// `t·F|¬t ∨ ¬t·F|t`: the value at the index with the target flipped.
    fn swap(&mut self, f: BddRef) -> qsim_bdd::Result<BddRef> {
        let f0 = self.bdd.cofactor_by(f, self.neg_t)?;
        let f1 = self.bdd.cofactor_by(f, self.pos_t)?;
        self.bdd.ite(self.t, f0, f1)
    }

    /// Applies `op` slice-wise.
    fn map(
        &mut self,
        fam: &[BddRef],
        mut op: impl FnMut(&mut Self, BddRef) -> qsim_bdd::Result<BddRef>,
    ) -> qsim_bdd::Result<Vec<BddRef>> {
        fam.iter().map(|&f| op(self, f)).collect()
    }

    /// `G + 0 + C0`; `None` on overflow.
    fn add_carry(&mut self, g: &[BddRef], c0: BddRef) -> qsim_bdd::Result<Option<Vec<BddRef>>> {
        let zero = vec![BddRef::FALSE; g.len()];
        self.add(g, &zero, c0)
    }

    fn add(
        &mut self,
        g: &[BddRef],
        d: &[BddRef],
        c0: BddRef,
    ) -> qsim_bdd::Result<Option<Vec<BddRef>>> {
        let (sums, overflow) = ripple_add(self.bdd, g, d, c0)?;
        Ok((overflow == BddRef::FALSE).then_some(sums))
    }

    /// `ite(m, ¬F, F) + m`: negation of the integer wherever `m` holds.
    fn negate_where(&mut self, fam: &[BddRef], m: BddRef) -> qsim_bdd::Result<Option<Vec<BddRef>>> {
        let g = self.map(fam, |k, f| k.bdd.xor(f, m))?;
        self.add_carry(&g, m)
    }

    /// Runs a family-independent kernel on every family that is not
    /// identically zero.
    fn per_family(
        &mut self,
        mut f: impl FnMut(&mut Self, &[BddRef]) -> qsim_bdd::Result<Option<Vec<BddRef>>>,
    ) -> qsim_bdd::Result<Option<Slices>> {
        let old = self.old;
        let mut out: Slices = Default::default();
        for fam in Family::ALL {
            let src = &old[fam.index()];
            out[fam.index()] = if is_zero(src) {
                src.clone()
            } else {
                match f(self, src)? {
                    Some(v) => v,
                    None => return Ok(None),
                }
            };
        }
        Ok(Some(out))
    }

    /// Value at `t` selected from `on` and elsewhere from `off`.
    fn select(&mut self, on: &[BddRef], off: &[BddRef]) -> qsim_bdd::Result<Vec<BddRef>> {
        on.iter()
            .zip(off)
            .map(|(&x, &y)| self.ite(self.t, x, y))
            .collect()
    }
}

fn is_zero(fam: &[BddRef]) -> bool {
    fam.iter().all(|&f| f == BddRef::FALSE)
}

/// Cube of positive literals.
fn positive_cube(bdd: &mut Bdd, vars: impl IntoIterator<Item = VarId>) -> qsim_bdd::Result<BddRef> {
    let cube = Cube::new(vars.into_iter().map(Literal::pos))?;
    bdd.cube(&cube)
}

/// Computes the post-gate slices, or `None` if some family overflows.
fn compute(state: &mut SlicedState, gate: &Gate) -> qsim_bdd::Result<Option<Slices>> {
    let var = |q: usize| VarId(q as u32);
    let old = state.slices.clone();
    let bdd = &mut state.bdd;
    let t0 = var(gate.targets[0]);
    let t = bdd.mk_var(t0)?;
    let neg_t = bdd.literal(t0, false)?;
    let mut k = Kernel {
        t,
        neg_t,
        pos_t: t,
        bdd,
        old: &old,
    };
    let controls = gate.controls.iter().map(|&c| var(c));

    match gate.kind {
        GateKind::X | GateKind::Cnot | GateKind::Toffoli => {
            let qc = positive_cube(k.bdd, controls)?;
            let qc_neg_t = k.bdd.and(qc, neg_t)?;
            let qc_pos_t = k.bdd.and(qc, t)?;
            k.per_family(|k, src| {
                k.map(src, |k, f| {
                    if f.is_const() {
                        return Ok(f);
                    }
                    let f0 = k.bdd.cofactor_by(f, qc_neg_t)?;
                    let f1 = k.bdd.cofactor_by(f, qc_pos_t)?;
                    let flipped = k.ite(k.t, f0, f1)?;
                    k.ite(qc, flipped, f)
                })
                .map(Some)
            })
        }
        GateKind::Fredkin => {
            let u0 = var(gate.targets[1]);
            let u = k.bdd.mk_var(u0)?;
            let neg_u = k.bdd.literal(u0, false)?;
            let qc = positive_cube(k.bdd, controls)?;
            // cubes Qc·¬t·u and Qc·t·¬u
            let qc_neg_t = k.bdd.and(qc, neg_t)?;
            let c01 = k.bdd.and(qc_neg_t, u)?;
            let qc_pos_t = k.bdd.and(qc, t)?;
            let c10 = k.bdd.and(qc_pos_t, neg_u)?;
            let t_and_not_u = k.bdd.and(t, neg_u)?;
            let u_and_not_t = k.bdd.and(u, neg_t)?;
            k.per_family(|k, src| {
                k.map(src, |k, f| {
                    if f.is_const() {
                        return Ok(f);
                    }
                    // t=1,u=0 reads F at t=0,u=1 and vice versa
                    let from01 = k.bdd.cofactor_by(f, c01)?;
                    let from10 = k.bdd.cofactor_by(f, c10)?;
                    let inner = k.ite(u_and_not_t, from10, f)?;
                    let swapped = k.ite(t_and_not_u, from01, inner)?;
                    k.ite(qc, swapped, f)
                })
                .map(Some)
            })
        }
        GateKind::Z | GateKind::Cz => {
            let m = if gate.kind == GateKind::Cz {
                let c = k.bdd.mk_var(var(gate.controls[0]))?;
                k.bdd.and(c, t)?
            } else {
                t
            };
            k.per_family(|k, src| k.negate_where(src, m))
        }
        GateKind::H => k.per_family(|k, src| {
            // G = F|¬t, D = ite(t, ¬F|t, F|t), C0 = t
            let g = k.map(src, |k, f| k.bdd.cofactor_by(f, k.neg_t))?;
            let f1 = k.map(src, |k, f| k.bdd.cofactor_by(f, k.pos_t))?;
            let d = k.map(&f1, |k, f| {
                let nf = k.not(f)?;
                k.ite(k.t, nf, f)
            })?;
            k.add(&g, &d, k.t)
        }),
        GateKind::Ry90 => k.per_family(|k, src| {
            // G = F|¬t, D = ite(t, F|t, ¬F|t), C0 = ¬t
            let g = k.map(src, |k, f| k.bdd.cofactor_by(f, k.neg_t))?;
            let f1 = k.map(src, |k, f| k.bdd.cofactor_by(f, k.pos_t))?;
            let d = k.map(&f1, |k, f| {
                let nf = k.not(f)?;
                k.ite(k.t, f, nf)
            })?;
            k.add(&g, &d, k.neg_t)
        }),
        GateKind::S => {
            // (a, b, c, d) → (c, d, −a, −b) where t
            let [a, b, c, d] = &old;
            let a2 = k.select(c, a)?;
            let b2 = k.select(d, b)?;
            let c2 = negate_into(&mut k, a, c)?;
            let d2 = negate_into(&mut k, b, d)?;
            Ok(collect4(Some(a2), Some(b2), c2, d2))
        }
        GateKind::T => {
            // (a, b, c, d) → (b, c, d, −a) where t
            let [a, b, c, d] = &old;
            let a2 = k.select(b, a)?;
            let b2 = k.select(c, b)?;
            let c2 = k.select(d, c)?;
            let d2 = negate_into(&mut k, a, d)?;
            Ok(collect4(Some(a2), Some(b2), Some(c2), d2))
        }
        GateKind::Y => {
            // new(t=1) = i·old(t=0), new(t=0) = −i·old(t=1);
            // i·(a, b, c, d) = (c, d, −a, −b)
            let [a, b, c, d] = &old;
            let neg_t = k.neg_t;
            let t = k.t;
            let part = |k: &mut Kernel<'_>, src: &[BddRef], negate_on: BddRef| {
                let g = k.map(src, |k, f| k.swap(f))?;
                let dd = k.map(&g, |k, f| k.bdd.xor(f, negate_on))?;
                k.add_carry(&dd, negate_on)
            };
            let a2 = part(&mut k, c, neg_t)?;
            let b2 = part(&mut k, d, neg_t)?;
            let c2 = part(&mut k, a, t)?;
            let d2 = part(&mut k, b, t)?;
            Ok(collect4(a2, b2, c2, d2))
        }
        GateKind::Rx90 => {
            // new = F − i·swap(F); −i·(a, b, c, d) = (−c, −d, a, b)
            let [a, b, c, d] = &old;
            let part = |k: &mut Kernel<'_>, base: &[BddRef], other: &[BddRef], subtract: bool| {
                let sw = k.map(other, |k, f| k.swap(f))?;
                if subtract {
                    let neg = k.map(&sw, |k, f| k.not(f))?;
                    k.add(base, &neg, BddRef::TRUE)
                } else {
                    k.add(base, &sw, BddRef::FALSE)
                }
            };
            let a2 = part(&mut k, a, c, true)?;
            let b2 = part(&mut k, b, d, true)?;
            let c2 = part(&mut k, c, a, false)?;
            let d2 = part(&mut k, d, b, false)?;
            Ok(collect4(a2, b2, c2, d2))
        }
    }
}

/// `ite(t, −src, dst)`: `G = ite(t, ¬src, dst)` plus carry-in `t`.
fn negate_into(
    k: &mut Kernel<'_>,
    src: &[BddRef],
    dst: &[BddRef],
) -> qsim_bdd::Result<Option<Vec<BddRef>>> {
    let g = src
        .iter()
        .zip(dst)
        .map(|(&s, &d)| {
            let ns = k.not(s)?;
            k.ite(k.t, ns, d)
        })
        .collect::<qsim_bdd::Result<Vec<_>>>()?;
    let t = k.t;
    k.add_carry(&g, t)
}

fn collect4(
    a: Option<Vec<BddRef>>,
    b: Option<Vec<BddRef>>,
    c: Option<Vec<BddRef>>,
    d: Option<Vec<BddRef>>,
) -> Option<Slices> {
    Some([a?, b?, c?, d?])
}

/// Applies one gate, widening the slices on overflow.
pub fn apply_gate(state: &mut SlicedState, gate: &Gate) -> Result<()> {
    gate.validate(state.n)
        .map_err(|source| SimError::InvalidGate { index: 0, source })?;
    apply_validated(state, gate)
}

fn apply_validated(state: &mut SlicedState, gate: &Gate) -> Result<()> {
    // checked before the gate so a finished circuit is never sifted
    if state.config.reorder {
        maybe_reorder(state)?;
    }
    let mut collected = false;
    loop {
        match compute(state, gate) {
            Ok(Some(slices)) => {
                state.slices = slices;
                break;
            }
            Ok(None) => {
                let r = state.r;
                state.grow_slices(2 * r);
            }
            Err(BddError::NodeBudget { .. }) if !collected => {
                // discard this attempt's intermediates and retry once
                let roots = state.roots();
                state.bdd.gc(&roots);
                collected = true;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if gate.kind.increments_k() {
        state.k += 1;
    }
    let roots = state.roots();
    state.bdd.collect_if_needed(&roots);
    Ok(())
}

/// Live nodes below which reordering is not worth its cost.
pub(crate) const REORDER_MIN_NODES: usize = 8192;

fn maybe_reorder(state: &mut SlicedState) -> Result<()> {
    if state.bdd.live_nodes() < state.next_reorder_at {
        return Ok(());
    }
    // garbage from the gate itself does not count as growth
    let roots = state.roots();
    state.bdd.gc(&roots);
    if state.bdd.live_nodes() < state.next_reorder_at {
        return Ok(());
    }
    let after = state.bdd.sift_reorder(&roots)?;
    state.next_reorder_at = 2 * after.max(REORDER_MIN_NODES / 2);
    Ok(())
}

/// Applies every gate in order.
pub fn apply_circuit(state: &mut SlicedState, circuit: &Circuit) -> Result<Vec<GateStats>> {
    apply_circuit_until(state, circuit, None)
}

/// Like [`apply_circuit`] but stops with [`SimError::Timeout`] once
/// `deadline` has passed.
pub fn apply_circuit_until(
    state: &mut SlicedState,
    circuit: &Circuit,
    deadline: Option<Instant>,
) -> Result<Vec<GateStats>> {
    if circuit.n != state.n {
        return Err(SimError::QubitCountMismatch {
            circuit: circuit.n,
            state: state.n,
        });
    }
    for (index, gate) in circuit.gates.iter().enumerate() {
        gate.validate(state.n)
            .map_err(|source| SimError::InvalidGate { index, source })?;
    }
    let mut stats = Vec::with_capacity(circuit.gates.len());
    for (index, gate) in circuit.gates.iter().enumerate() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SimError::Timeout { gates_done: index });
        }
        apply_validated(state, gate)?;
        stats.push(GateStats {
            index,
            live_nodes: state.bdd.live_nodes(),
            r: state.r,
            k: state.k,
        });
    }
    Ok(stats)
}
