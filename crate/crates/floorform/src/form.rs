//! The floor form itself: evaluation, representation search, counting,
//! range scanning, and squarefree reduction.

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::arith::squarefree_part;
use crate::{Error, Result, TOOL_VERSION};

/// The triple `(a, b, c)` defining `⌊x²/a⌋ + ⌊y²/b⌋ + ⌊z²/c⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloorForm {
    a: u64,
    b: u64,
    c: u64,
}

impl FloorForm {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::NotPositive("form divisor"));
        }
        Ok(FloorForm { a, b, c })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn divisors(&self) -> [u64; 3] {
        [self.a, self.b, self.c]
    }

    /// `true` when `a = b = c`.
    pub fn is_equal_divisor(&self) -> bool {
        self.a == self.b && self.b == self.c
    }
}

impl std::fmt::Display for FloorForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

impl Serialize for FloorForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        for d in self.divisors() {
            seq.serialize_element(&d)?;
        }
        seq.end()
    }
}

/// An integer triple witnessing `eval_form(form, x, y, z) = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Representation {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        for v in [self.x, self.y, self.z] {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

/// Persisted result of an n-range scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub form: FloorForm,
    pub n_lo: u64,
    pub n_hi: u64,
    pub exceptions: Vec<u64>,
    pub wall_time_ms: u64,
    pub tool_version: String,
}

/// `⌊x²/a⌋ + ⌊y²/b⌋ + ⌊z²/c⌋`, exactly.
pub fn eval_form(form: FloorForm, x: i64, y: i64, z: i64) -> u64 {
    let sq = |v: i64| (v as i128) * (v as i128);
    let total = sq(x) / form.a as i128 + sq(y) / form.b as i128 + sq(z) / form.c as i128;
    total as u64
}

/// Sorted distinct values `⌊x²/d⌋ ≤ n_hi` with the smallest `x ≥ 0`
/// attaining each, and the number of integers (both signs) attaining each.
struct ValueTable {
    values: Vec<u64>,
    min_x: Vec<u64>,
    count: Vec<u64>,
}

impl ValueTable {
    fn build(d: u64, n_hi: u64) -> Self {
        let mut values: Vec<u64> = Vec::new();
        let mut min_x: Vec<u64> = Vec::new();
        let mut count: Vec<u64> = Vec::new();
        let mut x = 0u64;
        loop {
            let v_wide = (x as u128) * (x as u128) / (d as u128);
            if v_wide > n_hi as u128 {
                break;
            }
            let v = v_wide as u64;
            if values.last() == Some(&v) {
                *count.last_mut().unwrap() += 2;
            } else {
                values.push(v);
                min_x.push(x);
                count.push(if x == 0 { 1 } else { 2 });
            }
            x += 1;
        }
        ValueTable {
            values,
            min_x,
            count,
        }
    }

    fn lookup(&self, v: u64) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }
}

struct SearchTables {
    ta: ValueTable,
    tb: ValueTable,
    tc: ValueTable,
}

impl SearchTables {
    fn build(form: FloorForm, n_hi: u64) -> Self {
        SearchTables {
            ta: ValueTable::build(form.a, n_hi),
            tb: ValueTable::build(form.b, n_hi),
            tc: ValueTable::build(form.c, n_hi),
        }
    }

    /// Lexicographically smallest nonnegative witness for `n`, if any.
    fn search(&self, n: u64) -> Option<Representation> {
        for (ia, &va) in self.ta.values.iter().enumerate() {
            if va > n {
                break;
            }
            for (ib, &vb) in self.tb.values.iter().enumerate() {
                if va + vb > n {
                    break;
                }
                if let Some(ic) = self.tc.lookup(n - va - vb) {
                    return Some(Representation {
                        x: self.ta.min_x[ia] as i64,
                        y: self.tb.min_x[ib] as i64,
                        z: self.tc.min_x[ic] as i64,
                    });
                }
            }
        }
        None
    }

    fn count(&self, n: u64) -> u64 {
        let mut total = 0u64;
        for (ia, &va) in self.ta.values.iter().enumerate() {
            if va > n {
                break;
            }
            for (ib, &vb) in self.tb.values.iter().enumerate() {
                if va + vb > n {
                    break;
                }
                if let Some(ic) = self.tc.lookup(n - va - vb) {
                    total += self.ta.count[ia] * self.tb.count[ib] * self.tc.count[ic];
                }
            }
        }
        total
    }
}

/// A witness with `eval_form = n`, or `None` when no representation exists.
///
/// The form is even in each variable, so nonnegative representatives are
/// exhaustive; the witness returned is the lexicographically smallest
/// nonnegative one.
pub fn search_representation(form: FloorForm, n: u64) -> Option<Representation> {
    SearchTables::build(form, n).search(n)
}

/// Exact number of integer triples `(x, y, z) ∈ ℤ³` with `eval_form = n`;
/// `(±x, ±y, ±z)` count separately.
pub fn representation_count(form: FloorForm, n: u64) -> u64 {
    SearchTables::build(form, n).count(n)
}

/// Scan `[n_lo, n_hi]` and report every `n` with no representation.
///
/// The range is processed in parallel chunks; the result is independent of
/// the worker count.
pub fn scan_range(form: FloorForm, n_lo: u64, n_hi: u64) -> ScanReport {
    assert!(n_lo <= n_hi, "empty scan range");
    let start = std::time::Instant::now();
    let tables = SearchTables::build(form, n_hi);
    let exceptions: Vec<u64> = (n_lo..=n_hi)
        .into_par_iter()
        .filter(|&n| tables.search(n).is_none())
        .collect();
    ScanReport {
        form,
        n_lo,
        n_hi,
        exceptions,
        wall_time_ms: start.elapsed().as_millis() as u64,
        tool_version: TOOL_VERSION.to_string(),
    }
}

/// `(𝔰(a), 𝔰(b), 𝔰(c))` together with the multipliers `(t_a, t_b, t_c)`,
/// so that substituting `x → t_a·x` turns a representation by the reduced
/// form into one by the original.
pub fn squarefree_reduce(form: FloorForm) -> (FloorForm, (u64, u64, u64)) {
    let (sa, ta) = squarefree_part(form.a).unwrap();
    let (sb, tb) = squarefree_part(form.b).unwrap();
    let (sc, tc) = squarefree_part(form.c).unwrap();
    (
        FloorForm {
            a: sa,
            b: sb,
            c: sc,
        },
        (ta, tb, tc),
    )
}
