//! Local (p-adic) solubility: square tests, Hensel-stable residue search for
//! shifted quadratics, Hilbert symbols, and anisotropy detection for diagonal
//! ternary forms.
//!
//! The central operation is [`shifted_quadratic_solvable`], which decides
//! whether `Σ (A_i x_i² + B_i x_i) ≡ target (mod p^M)` has a Hensel-stable
//! solution: one where some coordinate derivative `2·A_i·x_i + B_i` has
//! p-adic order small enough that the quadratic Hensel lemma lifts the
//! residue solution to a true p-adic solution.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::arith::{inv_mod, is_prime, legendre_symbol};
use crate::{Error, Result};

/// A place of the rationals: a finite prime or the archimedean place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Infinity,
}

/// One congruence `Σ_i (A_i x_i² + B_i x_i) ≡ target (mod p^precision)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalProblem {
    pub p: u64,
    /// Pairs `(A_i, B_i)`.
    pub terms: Vec<(i64, i64)>,
    pub target: i64,
    /// Working exponent `M`; the modulus is `p^M`.
    pub precision: u32,
}

/// How a local verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedFormLemma,
    UnimodularSplit,
    ResidueSearch,
}

/// Outcome of a local solubility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalStatus {
    pub prime: u64,
    pub solvable: bool,
    pub method: SolveMethod,
    pub precision_used: u32,
}

/// `ord_p(4p)`: 3 for p = 2, otherwise 1.
fn ord_4p(p: u64) -> u32 {
    if p == 2 {
        3
    } else {
        1
    }
}

/// Default working exponent `M = 2·ord_p(4p) + 6`.
pub fn default_precision(p: u64) -> u32 {
    2 * ord_4p(p) + 6
}

/// Stability margin: a solution is accepted when some coordinate derivative
/// has order at most `(M − ord_p(4p))/2 − 1`.
fn stability_margin(p: u64, precision: u32) -> u32 {
    (precision - ord_4p(p)) / 2 - 1
}

fn ord_p_i128(p: u64, n: i128, cap: u32) -> u32 {
    if n == 0 {
        return cap;
    }
    let p = p as i128;
    let mut m = n.abs();
    let mut k = 0;
    while k < cap && m % p == 0 {
        m /= p;
        k += 1;
    }
    k
}

impl LocalProblem {
    /// Minimum admissible precision for these coefficients:
    /// `ord_p(4p) + max_i ord_p(A_i, B_i over nonzero values) + 2`.
    pub fn floor_precision(p: u64, terms: &[(i64, i64)]) -> u32 {
        let max_ord = terms
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|&c| c != 0)
            .map(|c| ord_p_i128(p, c as i128, 64))
            .max()
            .unwrap_or(0);
        ord_4p(p) + max_ord + 2
    }

    /// Problem with the default precision, raised to the floor when the
    /// coefficients demand it.
    pub fn new(p: u64, terms: Vec<(i64, i64)>, target: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let precision = default_precision(p).max(Self::floor_precision(p, &terms));
        Ok(LocalProblem {
            p,
            terms,
            target,
            precision,
        })
    }

    /// Same, with an explicit precision (validated by the solver).
    pub fn with_precision(p: u64, terms: Vec<(i64, i64)>, target: i64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(LocalProblem {
            p,
            terms,
            target,
            precision,
        })
    }
}

/// `true` iff `u` is a square unit in the p-adic integers.
///
/// For odd `p` this is the quadratic residue test; for `p = 2` it is
/// `u ≡ 1 (mod 8)`.
pub fn unit_square_test(p: u64, u: i64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if u.rem_euclid(p as i64) == 0 {
        return Err(Error::NotAUnit { value: u, p });
    }
    if p == 2 {
        Ok(u.rem_euclid(8) == 1)
    } else {
        Ok(legendre_symbol(u, p)? == 1)
    }
}

/// `true` iff `n = p^{2k}·u` with `u` a square unit.
pub fn zp_square_test(p: u64, n: i64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::ZeroArgument("n"));
    }
    let mut m = n;
    let mut k = 0u32;
    while m.rem_euclid(p as i64) == 0 {
        m /= p as i64;
        k += 1;
    }
    if k % 2 == 1 {
        return Ok(false);
    }
    unit_square_test(p, m)
}

/// Closed-form containment verdict for `p^k·eps·x² + eta·x` at odd `p`
/// (surjective), and for `2^k·eps·x² + 2·eta·x` at `p = 2`:
/// `4·Z_2` is contained for `k = 1`, `2·Z_2` for `k ≥ 2`.
///
/// Returns the containment verdict for `n`, not full membership.
pub fn lemma_local(p: u64, k: u32, eps: i64, eta: i64, n: i64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::NotPositive("k"));
    }
    for unit in [eps, eta] {
        if unit.rem_euclid(p as i64) == 0 {
            return Err(Error::NotAUnit { value: unit, p });
        }
    }
    if p != 2 {
        return Ok(true);
    }
    if k == 1 {
        Ok(n.rem_euclid(4) == 0)
    } else {
        Ok(n.rem_euclid(2) == 0)
    }
}

/// Decide `Σ (A_i x_i² + B_i x_i) ≡ target (mod p^M)` with Hensel stability.
pub fn shifted_quadratic_solvable(problem: &LocalProblem) -> Result<LocalStatus> {
    let p = problem.p;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let floor = LocalProblem::floor_precision(p, &problem.terms);
    if problem.precision < floor {
        return Err(Error::PrecisionTooLow {
            needed: floor,
            got: problem.precision,
        });
    }
    let m = problem.precision;
    let margin = stability_margin(p, m);

    let (solvable, method) = if p == 2 {
        solve_dyadic(&problem.terms, problem.target, m, margin)?
    } else {
        solve_odd(p, &problem.terms, problem.target, m, margin)?
    };
    Ok(LocalStatus {
        prime: p,
        solvable,
        method,
        precision_used: m,
    })
}

fn ord2_i64(n: i64, cap: u32) -> u32 {
    if n == 0 {
        cap
    } else {
        (n.unsigned_abs().trailing_zeros()).min(cap)
    }
}

/// Fast paths at p = 2: a single term of the exact containment shape covers
/// the target with the remaining coordinates set to zero. The containment
/// witnesses carry derivative order exactly 1, so they certify stability
/// only when the margin allows it.
fn dyadic_lemma_fast_path(terms: &[(i64, i64)], target: i64, margin: u32) -> bool {
    margin >= 1
        && terms.iter().any(|&(a, b)| {
            if a == 0 || b == 0 {
                return false;
            }
            let (ka, kb) = (ord2_i64(a, 64), ord2_i64(b, 64));
            (ka == 1 && kb == 1 && target.rem_euclid(4) == 0)
                || (ka >= 2 && kb == 1 && target.rem_euclid(2) == 0)
        })
}

/// Fixed-size bitset over `n` bits, `n` a power of two.
#[derive(Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
    nbits: u32,
}

impl Bits {
    fn new(nbits: u32) -> Self {
        let words = vec![0u64; nbits.div_ceil(64) as usize];
        Bits { words, nbits }
    }

    fn set(&mut self, i: u32) {
        self.words[(i / 64) as usize] |= 1u64 << (i % 64);
    }

    fn get(&self, i: u32) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// `self |= src rotated left by k` (rotation modulo `nbits`).
    fn or_rotated(&mut self, src: &Bits, k: u32) {
        let n = self.nbits;
        let k = k % n;
        if n <= 64 {
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let w = src.words[0];
            let rot = if k == 0 {
                w
            } else {
                ((w << k) | (w >> (n - k))) & mask
            };
            self.words[0] |= rot;
            return;
        }
        let nw = self.words.len();
        let word_shift = (k / 64) as usize;
        let bit_shift = k % 64;
        for i in 0..nw {
            let src_hi = src.words[(i + nw - word_shift) % nw];
            let rot = if bit_shift == 0 {
                src_hi
            } else {
                let src_lo = src.words[(i + nw - word_shift - 1) % nw];
                (src_hi << bit_shift) | (src_lo >> (64 - bit_shift))
            };
            self.words[i] |= rot;
        }
    }

    fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(wi as u32 * 64 + b)
            })
        })
    }
}

/// Sums reachable with at least one stable coordinate, mod 2^M. Cached per
/// term list: verification sweeps re-solve the same terms for thousands of
/// targets.
type DyadicKey = (u32, Vec<(i64, i64)>);
static DYADIC_CACHE: Lazy<Mutex<HashMap<DyadicKey, Arc<Bits>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn dyadic_reach(terms: &[(i64, i64)], m: u32, margin: u32) -> Result<Arc<Bits>> {
    if m > 22 {
        return Err(Error::SearchCapExceeded(1u128 << m));
    }
    let key = (m, terms.to_vec());
    {
        let cache = DYADIC_CACHE.lock().unwrap();
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
    }

    let nbits = 1u32 << m;
    let modulus = nbits as i128;
    let mut any = Bits::new(nbits);
    let mut stable = Bits::new(nbits);
    any.set(0);

    for &(a, b) in terms {
        // The term value and (capped) derivative order mod 2^M are periodic
        // in x with period 2^(M − e), e = min valuation of the coefficients.
        let e = ord2_i64(a, m).min(ord2_i64(b, m));
        let period = 1u32 << (m - e.min(m));
        let (a, b) = (a as i128, b as i128);
        let mut stable_vals = Bits::new(nbits);
        let mut all_vals = Bits::new(nbits);
        for x in 0..period as i128 {
            let v = (a * x * x + b * x).rem_euclid(modulus) as u32;
            let d = 2 * a * x + b;
            let dord = ord_p_i128(2, d, m);
            all_vals.set(v);
            if dord <= margin {
                stable_vals.set(v);
            }
        }
        let mut new_any = Bits::new(nbits);
        let mut new_stable = Bits::new(nbits);
        for v in all_vals.iter_ones() {
            new_any.or_rotated(&any, v);
            new_stable.or_rotated(&stable, v);
        }
        for v in stable_vals.iter_ones() {
            new_stable.or_rotated(&any, v);
        }
        any = new_any;
        stable = new_stable;
    }

    let _ = any;
    let entry = Arc::new(stable);
    let mut cache = DYADIC_CACHE.lock().unwrap();
    if cache.len() > 8192 {
        cache.clear();
    }
    cache.insert(key, entry.clone());
    Ok(entry)
}

fn solve_dyadic(terms: &[(i64, i64)], target: i64, m: u32, margin: u32) -> Result<(bool, SolveMethod)> {
    if dyadic_lemma_fast_path(terms, target, margin) {
        return Ok((true, SolveMethod::ClosedFormLemma));
    }
    let reach = dyadic_reach(terms, m, margin)?;
    let t = (target as i128).rem_euclid(1i128 << m) as u32;
    Ok((reach.get(t), SolveMethod::ResidueSearch))
}

/// Order of a residue class `w mod p^mm`: the minimum order over
/// representatives, with `mm` as the sentinel for the zero class.
fn class_ord(p: u64, mm: u32, w: i128) -> u32 {
    let q = (p as i128).pow(mm);
    let w = w.rem_euclid(q);
    if w == 0 {
        mm
    } else {
        ord_p_i128(p, w, mm)
    }
}

/// Minimal witness order for `A·u² ≡ w (mod p^mm)` at odd p with `A` a unit,
/// or `None` when the class is unattainable.
fn unary_attainable(p: u64, mm: u32, a: i128, w: i128) -> Option<u32> {
    let s = class_ord(p, mm, w);
    if s == mm {
        // Only deep witnesses: u ≡ 0 mod p^ceil(mm/2).
        return Some(mm.div_ceil(2));
    }
    if s % 2 == 1 {
        return None;
    }
    let q = (p as i128).pow(mm);
    let w0 = w.rem_euclid(q) / (p as i128).pow(s);
    let cls = (w0 * a).rem_euclid(p as i128) as i64;
    (legendre_symbol(cls, p).unwrap() == 1).then_some(s / 2)
}

/// Minimal witness order (min coordinate valuation) for
/// `A₁·u² + A₂·v² ≡ w (mod p^mm)` at odd p with unit `A_i`,
/// or `None` when unattainable.
fn binary_attainable(p: u64, mm: u32, a1: i128, a2: i128, w: i128) -> Option<u32> {
    let disc = (-(a1 * a2)).rem_euclid(p as i128) as i64;
    if legendre_symbol(disc, p).unwrap() == 1 {
        // Isotropic: splits a hyperbolic plane, every class has a primitive
        // witness.
        return Some(0);
    }
    // Anisotropic: value order is twice the witness order, and every unit
    // class is attained (p+1 solutions mod p, lifted by Hensel).
    let s = class_ord(p, mm, w);
    if s == mm {
        return Some(mm.div_ceil(2));
    }
    if s % 2 == 1 {
        return None;
    }
    Some(s / 2)
}

const ODD_ENUM_CAP: u128 = 1 << 26;

fn solve_odd(p: u64, terms: &[(i64, i64)], target: i64, m: u32, margin: u32) -> Result<(bool, SolveMethod)> {
    let pi = p as i128;
    let unit_a = |a: i64| a != 0 && a.rem_euclid(p as i64) != 0;

    // Lemma fast path: p^k·ε·x² + η·x with η a unit represents everything.
    if terms
        .iter()
        .any(|&(a, b)| a != 0 && a.rem_euclid(p as i64) == 0 && b.rem_euclid(p as i64) != 0)
    {
        return Ok((true, SolveMethod::ClosedFormLemma));
    }
    // Unimodular diagonal part of rank >= 3 represents every p-adic integer.
    if terms.iter().filter(|&&(a, _)| unit_a(a)).count() >= 3 {
        return Ok((true, SolveMethod::UnimodularSplit));
    }

    // Peel common factors of p from all coefficients and the target. Each
    // peel lowers the working exponent by one and raises every original
    // derivative order by one.
    let mut terms: Vec<(i128, i128)> = terms
        .iter()
        .filter(|&&(a, b)| !(a == 0 && b == 0))
        .map(|&(a, b)| (a as i128, b as i128))
        .collect();
    let mut t = target as i128;
    let mut mm = m;
    let mut peels = 0u32;

    if terms.is_empty() {
        // No coordinates: no derivative can certify stability.
        return Ok((false, SolveMethod::ResidueSearch));
    }
    while terms.iter().all(|&(a, b)| a % pi == 0 && b % pi == 0) {
        if t.rem_euclid(pi) != 0 {
            // Every attainable value is divisible by p; the target is not.
            return Ok((false, SolveMethod::ResidueSearch));
        }
        for term in &mut terms {
            term.0 /= pi;
            term.1 /= pi;
        }
        t = t.div_euclid(pi);
        mm -= 1;
        peels += 1;
        if peels > margin {
            // Every derivative now carries order > margin.
            return Ok((false, SolveMethod::ResidueSearch));
        }
    }

    // Re-check the closed forms on the peeled problem.
    if terms
        .iter()
        .any(|&(a, b)| a != 0 && a % pi == 0 && b % pi != 0)
    {
        return Ok((true, SolveMethod::ClosedFormLemma));
    }
    if terms.iter().filter(|&&(a, _)| a != 0 && a % pi != 0).count() >= 3 {
        return Ok((true, SolveMethod::UnimodularSplit));
    }

    let q = pi.pow(mm);
    let margin_eff = margin - peels;

    // Unit-quadratic terms complete the square exactly: the image is
    // {A·u² + c} with u free and witness order ord(u). The rest are
    // enumerated over one period each.
    let mut units: Vec<(i128, i128)> = Vec::new(); // (A mod q, c = -B²/(4A) mod q)
    let mut deep: Vec<(i128, i128, u128)> = Vec::new(); // (A, B, period)
    let mut deep_total: u128 = 1;
    for &(a, b) in &terms {
        if a != 0 && a % pi != 0 {
            let inv4a = inv_mod((4 * a).rem_euclid(q) as u64, q as u64).unwrap() as i128;
            let c = (-(b * b).rem_euclid(q) * inv4a).rem_euclid(q);
            units.push((a.rem_euclid(q), c));
        } else {
            let e = ord_p_i128(p, a, mm).min(ord_p_i128(p, b, mm));
            let period = (pi as u128).pow(mm - e.min(mm));
            deep_total = deep_total.saturating_mul(period);
            deep.push((a, b, period));
        }
    }
    if deep_total > ODD_ENUM_CAP {
        return Err(Error::SearchCapExceeded(deep_total));
    }

    let unit_shift: i128 = units.iter().map(|&(_, c)| c).sum::<i128>().rem_euclid(q);

    // Mixed-radix enumeration over the deep-term periods.
    let mut counter = vec![0u128; deep.len()];
    loop {
        let mut sum_d: i128 = 0;
        let mut dmin = u32::MAX;
        for (i, &(a, b, _)) in deep.iter().enumerate() {
            let x = counter[i] as i128;
            sum_d = (sum_d + a * x * x + b * x).rem_euclid(q);
            dmin = dmin.min(ord_p_i128(p, 2 * a * x + b, mm));
        }
        let rem = (t - sum_d - unit_shift).rem_euclid(q);
        let witness = match units.len() {
            0 => (rem == 0).then_some(u32::MAX),
            1 => unary_attainable(p, mm, units[0].0, rem),
            2 => binary_attainable(p, mm, units[0].0, units[1].0, rem),
            _ => unreachable!("three or more unit terms take the unimodular path"),
        };
        if let Some(word) = witness {
            let stable = (word != u32::MAX && word <= margin_eff)
                || (dmin != u32::MAX && dmin <= margin_eff);
            if stable {
                return Ok((true, SolveMethod::ResidueSearch));
            }
        }
        // Advance the counter.
        let mut i = 0;
        loop {
            if i == deep.len() {
                return Ok((false, SolveMethod::ResidueSearch));
            }
            counter[i] += 1;
            if counter[i] < deep[i].2 {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

/// Standard Hilbert symbol `(a, b)_v`: +1 iff `z² = a·x² + b·y²` has a
/// nontrivial solution over the completion at `v`.
///
/// `a, b` must be nonzero, and a finite place must be prime.
pub fn hilbert_symbol(a: i64, b: i64, place: Place) -> i8 {
    assert!(a != 0 && b != 0, "hilbert symbol needs nonzero arguments");
    match place {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(p) => {
            debug_assert!(is_prime(p), "{p} is not prime");
            let (alpha, u) = split_ord(p, a);
            let (beta, v) = split_ord(p, b);
            if p == 2 {
                let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
                let omega = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
                let exp = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
                if exp % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                let mut sign = 1i8;
                if alpha % 2 == 1 && beta % 2 == 1 && (p - 1) / 2 % 2 == 1 {
                    sign = -sign;
                }
                if beta % 2 == 1 {
                    sign *= legendre_symbol(u, p).unwrap();
                }
                if alpha % 2 == 1 {
                    sign *= legendre_symbol(v, p).unwrap();
                }
                sign
            }
        }
    }
}

fn split_ord(p: u64, n: i64) -> (u32, i64) {
    let mut m = n;
    let mut k = 0;
    while m.rem_euclid(p as i64) == 0 {
        m /= p as i64;
        k += 1;
    }
    (k, m)
}

/// `true` iff `d1·x² + d2·y² + d3·z² = 0` has only the trivial p-adic
/// solution.
pub fn ternary_anisotropic(p: u64, d1: i64, d2: i64, d3: i64) -> bool {
    assert!(d1 != 0 && d2 != 0 && d3 != 0);
    // Scaling by -d3 turns the form into <-d1·d3, -d2·d3, -1> up to squares;
    // that form is isotropic exactly when the Hilbert symbol is +1.
    hilbert_symbol(-d1 * d3, -d2 * d3, Place::Finite(p)) == -1
}
