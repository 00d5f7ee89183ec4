//! Measurement through a single hyperfunction BDD.
//!
//! The `4r` slices are merged into one function over the qubit variables and
//! fresh encoding variables `x0, x1, x2, ...`:
//!
//! ```text
//! F = x0·x1·F→a ∨ x0·¬x1·F→b ∨ ¬x0·x1·F→c ∨ ¬x0·¬x1·F→d,   F→f = ⋁ g_i·F^{f i}
//! ```
//!
//! where `g_i` is the binary code of `i` over `x2, x3, ...` (`x2` least
//! significant). Qubit variables sit above the encoding variables and the
//! measured qubits above the rest, so every node at the first encoding level
//! denotes one amplitude tuple. Probabilities are accumulated bottom-up over
//! the qubit levels as integer pairs `(u, v)` denoting `(u + v√2) / 2^k`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use qsim_bdd::{Bdd, BddRef, Cube, Literal, VarId};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplitude::{from_twos_complement, AlgebraicAmplitude};
use crate::circuit::format_bitstring;
use crate::exact::ExactProb;
use crate::par::{self, Execution};
use crate::state::{Family, SlicedState};
use crate::{Result, SimError};

/// Shots drawn from one RNG stream.
const SHOT_CHUNK: u64 = 1024;

/// Probability numerators `(u, v)`; the denominator `2^k` is implicit.
type Weight = (BigInt, BigInt);

/// Selector phases of `(x0, x1)` for each family.
pub fn selector(f: Family) -> (bool, bool) {
    match f {
        Family::A => (true, true),
        Family::B => (true, false),
        Family::C => (false, true),
        Family::D => (false, false),
    }
}

/// Number of `g_i` code bits for width `r`, i.e. `⌈log₂ r⌉`.
pub fn code_bits(r: usize) -> usize {
    r.next_power_of_two().trailing_zeros() as usize
}

/// Outcome of one sequential measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredQubit {
    pub qubit: usize,
    pub outcome: bool,
    /// Probability of `outcome` given the earlier outcomes.
    pub probability: ExactProb,
}

/// Progress of a sequence of collapses.
///
/// The collapsed state is the sub-diagram at `node` seen from level
/// `depth`; the losing branches are implicitly redirected to constant 0.
#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub entries: Vec<MeasuredQubit>,
    /// Normalization factor, the product of `1/p` over the entries.
    pub s2: ExactProb,
    node: BddRef,
    depth: usize,
}

impl MeasurementRecord {
    pub fn outcomes(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.outcome).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Threshold {
    Always0,
    Always1,
    /// Outcome 0 iff the 128-bit draw is below this value.
    Below(u128),
}

impl Threshold {
    fn from_p0(p0: &ExactProb) -> Self {
        let t = p0.ceil_scaled(128);
        if t >= BigInt::from(1) << 128 {
            Threshold::Always0
        } else if t <= BigInt::zero() {
            Threshold::Always1
        } else {
            Threshold::Below(t.to_u128().expect("below 2^128"))
        }
    }

    fn draw<R: RngCore + ?Sized>(self, rng: &mut R) -> bool {
        match self {
            Threshold::Always0 => false,
            Threshold::Always1 => true,
            Threshold::Below(t) => {
                let x = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
                x >= t
            }
        }
    }
}

/// The merged measurement BDD with cached node probabilities.
pub struct Hyperfunction<'a> {
    state: &'a SlicedState,
    root: BddRef,
    measured: Vec<usize>,
    weights: HashMap<BddRef, Weight>,
}

impl<'a> Hyperfunction<'a> {
    /// Merges the slices, placing `measured` (in the given order) on top.
    ///
    /// Measurement is terminal: the state's variable order changes, and no
    /// gates should be applied afterwards.
    pub fn build(state: &'a mut SlicedState, measured: &[usize]) -> Result<Self> {
        let n = state.n;
        let mut seen = vec![false; n];
        for &q in measured {
            if q >= n {
                return Err(SimError::MeasuredOutOfRange(q));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(SimError::DuplicateMeasured(q));
            }
        }
        let needed = 2 + code_bits(state.r);
        while state.enc_vars.len() < needed {
            let v = state.bdd.new_var();
            state.enc_vars.push(v);
        }
        let order: Vec<VarId> = measured
            .iter()
            .copied()
            .chain((0..n).filter(|&q| !seen[q]))
            .map(|q| VarId(q as u32))
            .chain(state.enc_vars.iter().copied())
            .collect();
        let roots = state.roots();
        state.bdd.set_order(&order, &roots)?;
        let root = build_root(state)?;

        let state: &'a SlicedState = state;
        let mut h = Self {
            state,
            root,
            measured: measured.to_vec(),
            weights: HashMap::new(),
        };
        h.weigh(root);
        Ok(h)
    }

    pub fn root(&self) -> BddRef {
        self.root
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn encoding_vars(&self) -> &[VarId] {
        &self.state.enc_vars[..2 + code_bits(self.state.r)]
    }

    pub fn bdd(&self) -> &Bdd {
        &self.state.bdd
    }

    /// Level of a node, with the encoding levels and terminals folded to `n`.
    fn qlevel(&self, f: BddRef) -> usize {
        (self.bdd().level(f) as usize).min(self.state.n)
    }

    /// Amplitude tuple denoted by a node at or below the encoding levels.
    pub fn leaf_amplitude(&self, f: BddRef) -> AlgebraicAmplitude {
        let st = self.state;
        let r = st.r;
        let enc = &st.enc_vars;
        let mut ints = Family::ALL.iter().map(|&fam| {
            let (x0, x1) = selector(fam);
            let bits = (0..r).map(|i| {
                self.bdd().eval_with(f, |v| {
                    let j = enc.iter().position(|&e| e == v).expect("encoding variable");
                    match j {
                        0 => x0,
                        1 => x1,
                        _ => i >> (j - 2) & 1 == 1,
                    }
                })
            });
            from_twos_complement(bits, r)
        });
        let mut next = || ints.next().expect("four families");
        let (a, b, c, d) = (next(), next(), next(), next());
        AlgebraicAmplitude::new(a, b, c, d, st.k)
    }

    /// Fills the weight cache below `f`.
    fn weigh(&mut self, f: BddRef) {
        if f == BddRef::FALSE || self.weights.contains_key(&f) {
            return;
        }
        let w = if self.qlevel(f) == self.state.n {
            self.leaf_amplitude(f).abs2_numerators()
        } else {
            let node = self.bdd().node(f).expect("internal node");
            qsim_bdd::with_stack(|| self.weigh(node.low));
            qsim_bdd::with_stack(|| self.weigh(node.high));
            let l = self.qlevel(f);
            let (u0, v0) = self.contrib(node.low, l + 1);
            let (u1, v1) = self.contrib(node.high, l + 1);
            (u0 + u1, v0 + v1)
        };
        self.weights.insert(f, w);
    }

    /// Weight of `f` seen from `depth`: each skipped qubit level doubles it.
    fn contrib(&self, f: BddRef, depth: usize) -> Weight {
        if f == BddRef::FALSE {
            return (BigInt::zero(), BigInt::zero());
        }
        let (u, v) = &self.weights[&f];
        let shift = self.qlevel(f) - depth;
        (u << shift, v << shift)
    }

    fn to_prob(&self, w: Weight) -> ExactProb {
        let p = ExactProb::from_scaled(w.0, w.1, self.state.k);
        if self.state.s2.is_one() {
            p
        } else {
            &p * &self.state.s2
        }
    }

    /// Unnormalized probability mass of the sub-diagram at `f`, taken over
    /// the qubit levels from `f`'s own level down; `None` if `f` is not
    /// reachable from the root.
    pub fn node_probability(&self, f: BddRef) -> Option<ExactProb> {
        if f == BddRef::FALSE {
            return Some(ExactProb::zero());
        }
        let w = self.weights.get(&f)?;
        Some(ExactProb::from_scaled(
            w.0.clone(),
            w.1.clone(),
            self.state.k,
        ))
    }

    /// Total probability; exactly 1 for any state produced by gates.
    pub fn root_probability(&self) -> ExactProb {
        self.to_prob(self.contrib(self.root, 0))
    }

    pub fn start(&self) -> MeasurementRecord {
        MeasurementRecord {
            entries: Vec::new(),
            s2: self.state.s2.clone(),
            node: self.root,
            depth: 0,
        }
    }

    fn branches(&self, f: BddRef, depth: usize) -> (BddRef, BddRef) {
        if self.qlevel(f) == depth {
            let node = self.bdd().node(f).expect("internal node");
            (node.low, node.high)
        } else {
            (f, f)
        }
    }

    /// Measures the next qubit of the measured sequence, collapsing onto the
    /// outcome. `forced` fixes the outcome instead of drawing it.
    pub fn measure_next<R: RngCore + ?Sized>(
        &self,
        rec: &mut MeasurementRecord,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<bool> {
        let depth = rec.depth;
        let qubit = *self.measured.get(depth).ok_or(SimError::NoQubitsLeft)?;
        let (lo, hi) = self.branches(rec.node, depth);
        let c0 = ExactProb::from_scaled_pair(self.contrib(lo, depth + 1), self.state.k);
        let c1 = ExactProb::from_scaled_pair(self.contrib(hi, depth + 1), self.state.k);
        let p0 = &rec.s2 * &c0;
        let p1 = &rec.s2 * &c1;
        let outcome = match forced {
            Some(o) => o,
            None => Threshold::from_p0(&p0).draw(rng),
        };
        let (p, next) = if outcome { (p1, hi) } else { (p0, lo) };
        if p.is_zero() {
            return Err(SimError::ImpossibleOutcome { qubit, outcome });
        }
        rec.s2 = &rec.s2 / &p;
        rec.entries.push(MeasuredQubit {
            qubit,
            outcome,
            probability: p,
        });
        rec.node = next;
        rec.depth = depth + 1;
        Ok(outcome)
    }

    /// Exact probability of a joint outcome on a prefix of the measured
    /// sequence, in one descent without collapsing.
    pub fn joint_probability(&self, outcome: &[bool]) -> Result<ExactProb> {
        if outcome.len() > self.measured.len() {
            return Err(SimError::BitLength {
                expected: self.measured.len(),
                got: outcome.len(),
            });
        }
        let mut f = self.root;
        for (depth, &bit) in outcome.iter().enumerate() {
            let (lo, hi) = self.branches(f, depth);
            f = if bit { hi } else { lo };
            if f == BddRef::FALSE {
                return Ok(ExactProb::zero());
            }
        }
        Ok(self.to_prob(self.contrib(f, outcome.len())))
    }

    /// Every outcome of the measured sequence with nonzero probability, in
    /// ascending order. Fails once more than `limit` outcomes are found.
    pub fn outcome_distribution(&self, limit: usize) -> Result<Vec<(Vec<bool>, ExactProb)>> {
        let mut out = Vec::new();
        let mut bits = Vec::new();
        self.collect_outcomes(self.root, &mut bits, limit, &mut out)?;
        Ok(out)
    }

    fn collect_outcomes(
        &self,
        f: BddRef,
        bits: &mut Vec<bool>,
        limit: usize,
        out: &mut Vec<(Vec<bool>, ExactProb)>,
    ) -> Result<()> {
        if f == BddRef::FALSE {
            return Ok(());
        }
        let depth = bits.len();
        if depth == self.measured.len() {
            if out.len() == limit {
                return Err(SimError::TooManyOutcomes { limit });
            }
            out.push((bits.clone(), self.to_prob(self.contrib(f, depth))));
            return Ok(());
        }
        let (lo, hi) = self.branches(f, depth);
        for (bit, child) in [(false, lo), (true, hi)] {
            bits.push(bit);
            qsim_bdd::with_stack(|| self.collect_outcomes(child, bits, limit, out))?;
            bits.pop();
        }
        Ok(())
    }

    /// Outcome-0 threshold at a frontier position.
    fn threshold(&self, f: BddRef, depth: usize) -> Threshold {
        let (lo, hi) = self.branches(f, depth);
        let (u0, v0) = self.contrib(lo, depth + 1);
        let (u1, v1) = self.contrib(hi, depth + 1);
        let total = ExactProb::from_scaled(&u0 + u1, &v0 + v1, 0);
        let p0 = &ExactProb::from_scaled(u0, v0, 0) / &total;
        Threshold::from_p0(&p0)
    }

    /// Histogram of `shots` full measurement sequences keyed by the outcome
    /// string (measured order). Deterministic for a given seed regardless
    /// of `exec`.
    pub fn sample(&self, shots: u64, seed: u64, exec: Execution) -> BTreeMap<String, u64> {
        let chunks = shots.div_ceil(SHOT_CHUNK) as usize;
        let parts = par::map_range(chunks, exec, |chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = (shots - chunk as u64 * SHOT_CHUNK).min(SHOT_CHUNK);
            let mut cache: HashMap<(BddRef, usize), Threshold> = HashMap::new();
            let mut hist: BTreeMap<String, u64> = BTreeMap::new();
            let mut bits = Vec::with_capacity(self.measured.len());
            for _ in 0..count {
                bits.clear();
                let mut f = self.root;
                for depth in 0..self.measured.len() {
                    let t = *cache
                        .entry((f, depth))
                        .or_insert_with(|| self.threshold(f, depth));
                    let bit = t.draw(&mut rng);
                    let (lo, hi) = self.branches(f, depth);
                    f = if bit { hi } else { lo };
                    bits.push(bit);
                }
                *hist.entry(format_bitstring(&bits)).or_default() += 1;
            }
            hist
        });
        let mut total = BTreeMap::new();
        for part in parts {
            for (key, count) in part {
                *total.entry(key).or_default() += count;
            }
        }
        total
    }
}

/// `F = ⋁ selector(f)·g_i·F^{f i}` over the nonzero slices.
fn build_root(state: &mut SlicedState) -> Result<BddRef> {
    let m = code_bits(state.r);
    let enc = state.enc_vars.clone();
    let mut acc = BddRef::FALSE;
    for fam in Family::ALL {
        let (x0, x1) = selector(fam);
        for i in 0..state.r {
            let slice = state.slices[fam.index()][i];
            if slice == BddRef::FALSE {
                continue;
            }
            let lits = [Literal::new(enc[0], x0), Literal::new(enc[1], x1)]
                .into_iter()
                .chain((0..m).map(|j| Literal::new(enc[2 + j], i >> j & 1 == 1)));
            let code = state.bdd.cube(&Cube::new(lits)?)?;
            let term = state.bdd.and(slice, code)?;
            acc = state.bdd.or(acc, term)?;
        }
    }
    Ok(acc)
}

impl ExactProb {
    fn from_scaled_pair(w: Weight, k: i64) -> Self {
        ExactProb::from_scaled(w.0, w.1, k)
    }
}
