//! Per-thread operation counters used by the benchmark harness.

use std::cell::Cell;

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounters {
    pub source_exponentiations: u64,
    pub target_exponentiations: u64,
    pub pairings: u64,
    pub multiplications: u64,
}

impl OpCounters {
    pub fn exponentiations(&self) -> u64 {
        self.source_exponentiations + self.target_exponentiations
    }

    fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            source_exponentiations: self.source_exponentiations - earlier.source_exponentiations,
            target_exponentiations: self.target_exponentiations - earlier.target_exponentiations,
            pairings: self.pairings - earlier.pairings,
            multiplications: self.multiplications - earlier.multiplications,
        }
    }
}

thread_local! {
    static COUNTERS: Cell<OpCounters> = Cell::new(OpCounters::default());
}

#[derive(Clone, Copy)]
pub(crate) enum Op {
    SourceExp,
    TargetExp,
    Pairing(u64),
    Mul,
}

pub(crate) fn record(op: Op) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        match op {
            Op::SourceExp => v.source_exponentiations += 1,
            Op::TargetExp => v.target_exponentiations += 1,
            Op::Pairing(n) => v.pairings += n,
            Op::Mul => v.multiplications += 1,
        }
        c.set(v);
    });
}

/// Runs `f` and returns the operations it performed on this thread.
///
/// Scopes nest: an inner measurement does not disturb the outer one.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounters) {
    let before = COUNTERS.with(Cell::get);
    let out = f();
    let after = COUNTERS.with(Cell::get);
    (out, after.since(&before))
}
