use crate::BddRef;

const EMPTY: u32 = u32::MAX;
const MIN_BITS: u32 = 16;
const MAX_BITS: u32 = 22;

#[derive(Clone, Copy)]
struct Entry {
    op: u32,
    f: u32,
    g: u32,
    h: u32,
    res: u32,
}

const VACANT: Entry = Entry {
    op: EMPTY,
    f: 0,
    g: 0,
    h: 0,
    res: 0,
};

/// Lossy direct-mapped computed table keyed on `(op, f, g, h)`.
///
/// A colliding insert overwrites the previous entry. The table grows with the
/// number of live nodes and is cleared whenever it is resized, collected or
/// reordered, since node slots may be reused afterwards.
#[derive(Clone)]
pub(crate) struct ComputedTable {
    entries: Vec<Entry>,
    mask: usize,
    pub(crate) lookups: u64,
    pub(crate) hits: u64,
}

impl ComputedTable {
    pub(crate) fn new() -> Self {
        let len = 1usize << MIN_BITS;
        Self {
            entries: vec![VACANT; len],
            mask: len - 1,
            lookups: 0,
            hits: 0,
        }
    }

    #[inline]
    fn slot(&self, op: u32, f: u32, g: u32, h: u32) -> usize {
        let mut x = (op as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        x ^= (f as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
        x = x.rotate_left(29) ^ (g as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
        x = x.rotate_left(23) ^ (h as u64).wrapping_mul(0x85EB_CA77_C2B2_AE63);
        x ^= x >> 31;
        (x as usize) & self.mask
    }

    #[inline]
    pub(crate) fn get(&mut self, op: u32, f: BddRef, g: BddRef, h: BddRef) -> Option<BddRef> {
        self.lookups += 1;
        let e = &self.entries[self.slot(op, f.0, g.0, h.0)];
        if e.op == op && e.f == f.0 && e.g == g.0 && e.h == h.0 {
            self.hits += 1;
            Some(BddRef(e.res))
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn put(&mut self, op: u32, f: BddRef, g: BddRef, h: BddRef, res: BddRef) {
        let slot = self.slot(op, f.0, g.0, h.0);
        self.entries[slot] = Entry {
            op,
            f: f.0,
            g: g.0,
            h: h.0,
            res: res.0,
        };
    }

    pub(crate) fn clear(&mut self) {
        self.entries.fill(VACANT);
    }

    /// Doubles the table (dropping its contents) once live nodes outgrow it.
    pub(crate) fn grow_for(&mut self, live: usize) {
        if live > self.entries.len() && self.entries.len() < (1usize << MAX_BITS) {
            let len = self.entries.len() * 2;
            self.entries = vec![VACANT; len];
            self.mask = len - 1;
        }
    }

    pub(crate) fn hit_rate(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.hits as f64 / self.lookups as f64
        }
    }
}
