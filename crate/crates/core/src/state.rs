//! Bit-sliced state: four two's-complement integer vectors stored as one
//! BDD per bit over the qubit variables.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use qsim_bdd::{Bdd, BddRef, Cube, Literal, VarId, DEFAULT_NODE_BUDGET};
use rustc_hash::FxHashMap;

use crate::amplitude::{from_twos_complement, AlgebraicAmplitude};
use crate::exact::ExactProb;
use crate::par::{self, Execution};
use crate::{Result, SimError};

/// Simulation knobs shared by the state, kernels and measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    /// Initial slice width in bits; values below 2 are raised to 2.
    pub r_init: usize,
    pub node_budget: usize,
    /// Sift the variable order when the live node count has doubled.
    pub reorder: bool,
    /// Largest `n` accepted by [`SlicedState::decode_all`].
    pub enum_limit: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            r_init: 32,
            node_budget: DEFAULT_NODE_BUDGET,
            reorder: false,
            enum_limit: 16,
        }
    }
}

/// One of the four integer vectors of the amplitude tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A, Family::B, Family::C, Family::D];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// `4r` slice BDDs plus the shared exponent `k` and normalization `s²`.
///
/// Slice `i` of a family holds bit `i` of that family's integer at every
/// basis index; slice `r-1` is the sign.
#[derive(Clone, Debug)]
pub struct SlicedState {
    pub(crate) bdd: Bdd,
    pub(crate) n: usize,
    pub(crate) r: usize,
    pub(crate) k: i64,
    pub(crate) slices: [Vec<BddRef>; 4],
    pub(crate) s2: ExactProb,
    pub(crate) config: SimConfig,
    /// Encoding variables for the hyperfunction, created on demand.
    pub(crate) enc_vars: Vec<VarId>,
    pub(crate) growth_events: usize,
    /// Live node count that triggers the next sift.
    pub(crate) next_reorder_at: usize,
}

/// Subtrees smaller than this many remaining levels are enumerated inline.
const SPLIT_LEVELS: usize = 8;

impl SlicedState {
    /// The basis state `|bits⟩`, qubit 0 first.
    pub fn init_basis_state(n: usize, bits: &[bool], config: SimConfig) -> Result<Self> {
        if n == 0 {
            return Err(SimError::NoQubits);
        }
        if bits.len() != n {
            return Err(SimError::BitLength {
                expected: n,
                got: bits.len(),
            });
        }
        // one bit cannot hold +1 in two's complement
        let r = config.r_init.max(2);
        let mut bdd = Bdd::with_budget(config.node_budget);
        for _ in 0..n {
            bdd.new_var();
        }
        let cube = Cube::new(
            bits.iter()
                .enumerate()
                .map(|(q, &b)| Literal::new(VarId(q as u32), b)),
        )?;
        let d0 = bdd.cube(&cube)?;
        let mut slices: [Vec<BddRef>; 4] = std::array::from_fn(|_| vec![BddRef::FALSE; r]);
        slices[Family::D.index()][0] = d0;
        Ok(Self {
            bdd,
            n,
            r,
            k: 0,
            slices,
            s2: ExactProb::one(),
            config,
            enc_vars: Vec::new(),
            growth_events: 0,
            next_reorder_at: crate::kernels::REORDER_MIN_NODES,
        })
    }

    /// The all-zero basis state.
    pub fn zero_state(n: usize, config: SimConfig) -> Result<Self> {
        Self::init_basis_state(n, &vec![false; n], config)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn s2(&self) -> &ExactProb {
        &self.s2
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn growth_events(&self) -> usize {
        self.growth_events
    }

    pub fn bdd(&self) -> &Bdd {
        &self.bdd
    }

    /// Direct engine access, e.g. for fault injection in tests.
    pub fn bdd_mut(&mut self) -> &mut Bdd {
        &mut self.bdd
    }

    pub fn qubit_var(&self, q: usize) -> VarId {
        debug_assert!(q < self.n);
        VarId(q as u32)
    }

    pub fn slices(&self, f: Family) -> &[BddRef] {
        &self.slices[f.index()]
    }

    pub fn slice(&self, f: Family, i: usize) -> BddRef {
        self.slices[f.index()][i]
    }

    /// Overwrites one slice; the caller is responsible for keeping the
    /// state meaningful.
    pub fn set_slice(&mut self, f: Family, i: usize, g: BddRef) {
        self.slices[f.index()][i] = g;
    }

    /// Every slice, family-major.
    pub fn roots(&self) -> Vec<BddRef> {
        self.slices.iter().flatten().copied().collect()
    }

    /// Internal nodes reachable from the slices.
    pub fn slice_nodes(&self) -> usize {
        self.bdd.node_count(&self.roots())
    }

    /// Sign-extends every family to `new_r` bits.
    pub fn grow_slices(&mut self, new_r: usize) {
        assert!(
            new_r > self.r,
            "grow_slices must widen ({} -> {new_r})",
            self.r
        );
        for fam in self.slices.iter_mut() {
            let sign = fam[self.r - 1];
            fam.resize(new_r, sign);
        }
        self.r = new_r;
        self.growth_events += 1;
    }

    fn check_bits(&self, bits: &[bool]) -> Result<()> {
        if bits.len() == self.n {
            Ok(())
        } else {
            Err(SimError::BitLength {
                expected: self.n,
                got: bits.len(),
            })
        }
    }

    /// Amplitude at a basis index given as bits, qubit 0 first.
    pub fn decode_amplitude(&self, bits: &[bool]) -> Result<AlgebraicAmplitude> {
        self.check_bits(bits)?;
        let value = |v: VarId| bits.get(v.index()).copied().unwrap_or(false);
        let ints: Vec<BigInt> = self
            .slices
            .iter()
            .map(|fam| {
                from_twos_complement(fam.iter().map(|&s| self.bdd.eval_with(s, value)), self.r)
            })
            .collect();
        let [a, b, c, d]: [BigInt; 4] = ints.try_into().expect("four families");
        Ok(AlgebraicAmplitude::new(a, b, c, d, self.k))
    }

    fn amplitude_from_leaves(&self, leaves: &[BddRef]) -> AlgebraicAmplitude {
        let mut fams = leaves
            .chunks(self.r)
            .map(|fam| from_twos_complement(fam.iter().map(|&s| s == BddRef::TRUE), self.r));
        let mut next = || fams.next().expect("four families");
        let (a, b, c, d) = (next(), next(), next(), next());
        AlgebraicAmplitude::new(a, b, c, d, self.k)
    }

    /// Qubit variables in current level order.
    fn qubit_levels(&self) -> Vec<usize> {
        self.bdd
            .order()
            .into_iter()
            .map(|v| v.index())
            .filter(|&q| q < self.n)
            .collect()
    }

    /// Depth-first enumeration of basis indices whose amplitude is nonzero,
    /// descending the slices level by level and pruning all-zero subtrees.
    fn enumerate_nonzero(
        &self,
        levels: &[usize],
        depth: usize,
        bits: &mut Vec<bool>,
        refs: &[BddRef],
        out: &mut Vec<(Vec<bool>, AlgebraicAmplitude)>,
    ) {
        if refs.iter().all(|&f| f == BddRef::FALSE) {
            return;
        }
        if depth == levels.len() {
            let amp = self.amplitude_from_leaves(refs);
            let mut ordered = vec![false; self.n];
            for (&q, &b) in levels.iter().zip(bits.iter()) {
                ordered[q] = b;
            }
            out.push((ordered, amp));
            return;
        }
        let var = levels[depth] as u32;
        for bit in [false, true] {
            let next: Vec<BddRef> = refs
                .iter()
                .map(|&f| match self.bdd.node(f) {
                    Some(node) if node.var.0 == var => {
                        if bit {
                            node.high
                        } else {
                            node.low
                        }
                    }
                    _ => f,
                })
                .collect();
            bits.push(bit);
            qsim_bdd::with_stack(|| self.enumerate_nonzero(levels, depth + 1, bits, &next, out));
            bits.pop();
        }
    }

    /// Nonzero amplitudes in ascending index order (qubit 0 is the most
    /// significant bit).
    pub fn nonzero_amplitudes(&self, exec: Execution) -> Vec<(Vec<bool>, AlgebraicAmplitude)> {
        let levels = self.qubit_levels();
        let roots = self.roots();
        // split the top levels into independent subtrees
        let split = levels.len().saturating_sub(SPLIT_LEVELS).min(SPLIT_LEVELS);
        let mut tasks = vec![(Vec::new(), roots)];
        for &q in &levels[..split] {
            let var = q as u32;
            let mut next_tasks = Vec::with_capacity(tasks.len() * 2);
            for (bits, refs) in tasks {
                if refs.iter().all(|&f| f == BddRef::FALSE) {
                    continue;
                }
                for bit in [false, true] {
                    let child: Vec<BddRef> = refs
                        .iter()
                        .map(|&f| match self.bdd.node(f) {
                            Some(node) if node.var.0 == var => {
                                if bit {
                                    node.high
                                } else {
                                    node.low
                                }
                            }
                            _ => f,
                        })
                        .collect();
                    let mut b: Vec<bool> = bits.clone();
                    b.push(bit);
                    next_tasks.push((b, child));
                }
            }
            tasks = next_tasks;
        }
        let parts = par::map_slice(&tasks, exec, |(prefix, refs)| {
            let mut bits = prefix.clone();
            let mut out = Vec::new();
            self.enumerate_nonzero(&levels, split, &mut bits, refs, &mut out);
            out
        });
        let mut all: Vec<_> = parts.into_iter().flatten().collect();
        all.sort_by(|x, y| x.0.cmp(&y.0));
        all
    }

    /// Every amplitude, indexed with qubit 0 as the most significant bit.
    pub fn decode_all(&self) -> Result<Vec<AlgebraicAmplitude>> {
        self.decode_all_with(Execution::default())
    }

    pub fn decode_all_with(&self, exec: Execution) -> Result<Vec<AlgebraicAmplitude>> {
        let limit = self.config.enum_limit;
        if self.n > limit {
            return Err(SimError::EnumerationLimit { n: self.n, limit });
        }
        let mut amps = vec![AlgebraicAmplitude::zero(self.k); 1 << self.n];
        for (bits, amp) in self.nonzero_amplitudes(exec) {
            amps[bits_to_index(&bits)] = amp;
        }
        Ok(amps)
    }

    /// `(Σu, Σv)` over the `|α|²` numerators of all amplitudes; a normalized
    /// state has `Σu = 2^k` and `Σv = 0`.
    pub fn norm_numerators(&self) -> (BigInt, BigInt) {
        let mut su = BigInt::from(0);
        let mut sv = BigInt::from(0);
        for (_, amp) in self.nonzero_amplitudes(Execution::default()) {
            let (u, v) = amp.abs2_numerators();
            su += u;
            sv += v;
        }
        (su, sv)
    }

    /// Same as [`norm_numerators`](Self::norm_numerators), computed from the
    /// slices without visiting amplitudes.
    ///
    /// With `v_f(x) = Σ_i w_i·F^{f i}(x)` (two's-complement weights), every
    /// sum `Σ_x v_f(x)·v_g(x)` expands into weighted model counts of
    /// `F^{f i} ∧ F^{g j}`. Equal slices, such as sign extensions, are merged
    /// first, so the work grows with the number of distinct slices.
    pub fn norm_numerators_symbolic(&self) -> (BigInt, BigInt) {
        let weights: Vec<Vec<(BddRef, BigInt)>> = Family::ALL
            .iter()
            .map(|&f| merged_weights(self.slices(f)))
            .collect();
        // counts fit a u128 up to 127 variables
        let mut small =
            (self.bdd.num_vars() < 128).then(|| PairCounter::<u128>::new(&self.bdd, self.n));
        let mut big = PairCounter::<BigUint>::new(&self.bdd, self.n);
        let mut dot = |x: usize, y: usize| {
            let mut acc = BigInt::zero();
            for (g, cg) in &weights[x] {
                for (h, ch) in &weights[y] {
                    let count = match &mut small {
                        Some(counter) => BigInt::from(counter.count(*g, *h)),
                        None => BigInt::from(big.count(*g, *h)),
                    };
                    acc += cg * ch * count;
                }
            }
            acc
        };
        let (a, b, c, d) = (0, 1, 2, 3);
        let u = dot(a, a) + dot(b, b) + dot(c, c) + dot(d, d);
        let v = dot(a, b) + dot(b, c) + dot(c, d) - dot(a, d);
        (u, v)
    }

    /// `Σ|α|²`, exactly 1 for a normalized state.
    pub fn total_probability(&self) -> ExactProb {
        let (u, v) = self.norm_numerators_symbolic();
        ExactProb::from_scaled(u, v, self.k)
    }
}

/// Distinct nonconstant-false slices of one integer vector with their summed
/// two's-complement weights; zero weights are dropped.
fn merged_weights(slices: &[BddRef]) -> Vec<(BddRef, BigInt)> {
    let r = slices.len();
    let mut merged: Vec<(BddRef, BigInt)> = Vec::new();
    for (i, &g) in slices.iter().enumerate() {
        if g == BddRef::FALSE {
            continue;
        }
        let w = if i + 1 == r {
            -(BigInt::one() << i)
        } else {
            BigInt::one() << i
        };
        match merged.iter_mut().find(|(h, _)| *h == g) {
            Some((_, acc)) => *acc += w,
            None => merged.push((g, w)),
        }
    }
    merged.retain(|(_, w)| !w.is_zero());
    merged
}

/// Model counts of `f ∧ g` over the qubit variables, memoized across pairs.
struct PairCounter<'a, C> {
    bdd: &'a Bdd,
    nvars: u32,
    n: usize,
    memo: FxHashMap<(BddRef, BddRef), C>,
}

impl<'a, C> PairCounter<'a, C>
where
    C: Clone + Zero + One + std::ops::Shl<usize, Output = C> + std::ops::Shr<usize, Output = C>,
{
    fn new(bdd: &'a Bdd, n: usize) -> Self {
        Self {
            bdd,
            nvars: bdd.num_vars() as u32,
            n,
            memo: FxHashMap::default(),
        }
    }

    fn level(&self, f: BddRef, g: BddRef) -> u32 {
        self.bdd.level(f).min(self.bdd.level(g)).min(self.nvars)
    }

    /// Models over the qubit variables. Slices never depend on the other
    /// variables, which only multiply the raw count by a power of two.
    fn count(&mut self, f: BddRef, g: BddRef) -> C {
        let top = self.level(f, g);
        let raw = self.count_below(f, g) << top as usize;
        raw >> (self.nvars as usize - self.n)
    }

    /// Models over the variables at levels `level(f, g)..nvars`.
    fn count_below(&mut self, f: BddRef, g: BddRef) -> C {
        if f == BddRef::FALSE || g == BddRef::FALSE {
            return C::zero();
        }
        if f == BddRef::TRUE && g == BddRef::TRUE {
            return C::one();
        }
        let key = if f <= g { (f, g) } else { (g, f) };
        if let Some(c) = self.memo.get(&key) {
            return c.clone();
        }
        let top = self.level(f, g);
        let split = |x: BddRef| match self.bdd.node(x) {
            Some(node) if self.bdd.level(x) == top => (node.low, node.high),
            _ => (x, x),
        };
        let (f0, f1) = split(f);
        let (g0, g1) = split(g);
        let mut total = C::zero();
        for (x, y) in [(f0, g0), (f1, g1)] {
            let skipped = self.level(x, y) - top - 1;
            let c = qsim_bdd::with_stack(|| self.count_below(x, y));
            total = total + (c << skipped as usize);
        }
        self.memo.insert(key, total.clone());
        total
    }
}

/// Index with bit 0 as the most significant position.
pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Inverse of [`bits_to_index`] for an `n`-qubit register.
pub fn index_to_bits(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| index >> (n - 1 - q) & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            r_init: 2,
            ..SimConfig::default()
        }
    }

    #[test]
    fn basis_state_slices() {
        let s = SlicedState::init_basis_state(2, &[false, false], SimConfig::default()).unwrap();
        assert_eq!(s.r(), 32);
        assert_eq!(s.k(), 0);
        assert!(s.s2().is_one());
        let d0 = s.slice(Family::D, 0);
        let bdd = s.bdd();
        for idx in 0..4 {
            let bits = index_to_bits(idx, 2);
            assert_eq!(bdd.eval(d0, &bits).unwrap(), idx == 0);
        }
        let zeros = s
            .roots()
            .into_iter()
            .filter(|&f| f == BddRef::FALSE)
            .count();
        assert_eq!(zeros, 4 * 32 - 1);

        let one = SlicedState::init_basis_state(1, &[true], SimConfig::default()).unwrap();
        let mut bdd = one.bdd().clone();
        assert_eq!(one.slice(Family::D, 0), bdd.mk_var(VarId(0)).unwrap());
    }

    #[test]
    fn zero_qubits_rejected() {
        assert_eq!(
            SlicedState::init_basis_state(0, &[], SimConfig::default()).unwrap_err(),
            SimError::NoQubits
        );
        assert!(SlicedState::init_basis_state(2, &[true], SimConfig::default()).is_err());
    }

    #[test]
    fn decode_basis_state() {
        let s = SlicedState::init_basis_state(3, &[false, true, false], small()).unwrap();
        let all = s.decode_all().unwrap();
        for (i, amp) in all.iter().enumerate() {
            let expected = if i == 0b010 {
                AlgebraicAmplitude::from_ints(0, 0, 0, 1, 0)
            } else {
                AlgebraicAmplitude::zero(0)
            };
            assert_eq!(*amp, expected, "index {i}");
            assert_eq!(s.decode_amplitude(&index_to_bits(i, 3)).unwrap(), expected);
        }
    }

    #[test]
    fn grow_preserves_negative_integers() {
        let mut s = SlicedState::zero_state(1, small()).unwrap();
        // −1 at every index: bits 11
        s.set_slice(Family::A, 0, BddRef::TRUE);
        s.set_slice(Family::A, 1, BddRef::TRUE);
        let before = s.decode_all().unwrap();
        assert_eq!(before[0].a, BigInt::from(-1));
        s.grow_slices(4);
        assert_eq!(s.r(), 4);
        assert_eq!(s.growth_events(), 1);
        assert!(s.slices(Family::A).iter().all(|&f| f == BddRef::TRUE));
        assert!(s.slices(Family::B).iter().all(|&f| f == BddRef::FALSE));
        assert_eq!(s.decode_all().unwrap(), before);
    }

    #[test]
    fn enumeration_limit() {
        let s = SlicedState::zero_state(
            5,
            SimConfig {
                enum_limit: 4,
                ..SimConfig::default()
            },
        )
        .unwrap();
        assert_eq!(
            s.decode_all().unwrap_err(),
            SimError::EnumerationLimit { n: 5, limit: 4 }
        );
        assert_eq!(s.nonzero_amplitudes(Execution::Sequential).len(), 1);
    }

    #[test]
    fn nonzero_order_is_ascending() {
        let mut s = SlicedState::zero_state(12, small()).unwrap();
        s.set_slice(Family::D, 0, BddRef::TRUE);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let nz = s.nonzero_amplitudes(exec);
            assert_eq!(nz.len(), 1 << 12);
            for (i, (bits, _)) in nz.iter().enumerate() {
                assert_eq!(bits_to_index(bits), i);
            }
        }
    }

    #[test]
    fn index_helpers() {
        assert_eq!(bits_to_index(&[true, false, false]), 4);
        assert_eq!(index_to_bits(4, 3), vec![true, false, false]);
        for i in 0..32 {
            assert_eq!(bits_to_index(&index_to_bits(i, 5)), i);
        }
    }
}
