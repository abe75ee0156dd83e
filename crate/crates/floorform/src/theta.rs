//! Congruence theta machinery at the level of q-expansion coefficients:
//! shifted-lattice theta coefficients, unary theta coefficients, and the
//! square-class obstruction sets that govern the unary part.
//!
//! Coefficients are indexed on the l-value scale directly
//! (`coefficient[n] = #{x : Q(x + v) = n}`), not the rescaled analytic
//! exponent.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::{is_squarefree, isqrt, prime_factors, square_class_test};
use crate::coset::{delta_of, l_value, CosetDescriptor, ResidueTriple};
use crate::form::FloorForm;
use crate::planner::{escape_representation, plan_residues_abc, plan_residues_m};
use crate::{Error, Result};

/// Integer q-expansion coefficients indexed `0..=n_max`.
///
/// Coset theta coefficients are counts and therefore nonnegative; unary
/// theta coefficients are signed sums over `r` and may be negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaSeries {
    pub n_max: u64,
    pub coefficients: Vec<i64>,
}

/// `coefficient[n] = #{x ∈ L : Q(x + v) = n}` for `n ≤ n_max`, by
/// exhaustive enumeration within the positive-definite bound.
pub fn coset_theta_coefficients(coset: &CosetDescriptor, n_max: u64) -> ThetaSeries {
    let mut coefficients = vec![0i64; n_max as usize + 1];
    let (q, d, r) = coset.integral_view();

    let coord_range = |i: usize| -> (i64, i64) {
        let xmax = isqrt(n_max / q[i]) as i64;
        (
            (-xmax - r[i] as i64).div_euclid(d[i] as i64),
            (xmax - r[i] as i64).div_euclid(d[i] as i64),
        )
    };

    let (lo1, hi1) = coord_range(0);
    let (lo2, hi2) = coord_range(1);
    let (lo3, hi3) = coord_range(2);
    for x1 in lo1..=hi1 {
        let t1 = coset.rescaled_coordinate(0, x1);
        let v1 = q[0] as i128 * (t1 as i128) * (t1 as i128);
        if v1 > n_max as i128 {
            continue;
        }
        for x2 in lo2..=hi2 {
            let t2 = coset.rescaled_coordinate(1, x2);
            let v2 = v1 + q[1] as i128 * (t2 as i128) * (t2 as i128);
            if v2 > n_max as i128 {
                continue;
            }
            for x3 in lo3..=hi3 {
                let t3 = coset.rescaled_coordinate(2, x3);
                let v3 = v2 + q[2] as i128 * (t3 as i128) * (t3 as i128);
                if v3 <= n_max as i128 {
                    coefficients[v3 as usize] += 1;
                }
            }
        }
    }
    ThetaSeries {
        n_max,
        coefficients,
    }
}

/// Unary theta coefficients: `coefficient[e] = Σ r` over integers
/// `r ≡ h (mod N/t)` with `t·r² = e`.
pub fn unary_theta_coefficients(level: u64, t: u64, h: u64, n_max: u64) -> Result<ThetaSeries> {
    if t == 0 || level % t != 0 {
        return Err(Error::NotADivisor { t, n: level });
    }
    if !is_squarefree(t) {
        return Err(Error::NotSquarefree(t));
    }
    let step = (level / t) as i64;
    let mut coefficients = vec![0i64; n_max as usize + 1];
    let rmax = isqrt(n_max / t) as i64;
    let mut r = (h as i64).rem_euclid(step);
    // Walk the residue class downward past -rmax, then collect upward.
    while r > -rmax {
        r -= step;
    }
    while r <= rmax {
        let e = t as i64 * r * r;
        if e <= n_max as i64 {
            coefficients[e as usize] += r;
        }
        r += step;
    }
    Ok(ThetaSeries {
        n_max,
        coefficients,
    })
}

/// Squarefree divisors of `n`, ascending.
fn squarefree_divisors(n: u64) -> Vec<u64> {
    let primes = prime_factors(n);
    let mut divisors = vec![1u64];
    for p in primes {
        for i in 0..divisors.len() {
            divisors.push(divisors[i] * p);
        }
    }
    divisors.sort_unstable();
    divisors
}

/// The squarefree `t ∣ 2^δ·abc` (or `2^δ·m`) with `l(n) = t·r²`; exactly
/// the square classes where a unary theta can cancel against the l-value.
pub fn obstruction_sets(form: FloorForm, n: u64, residues: &ResidueTriple) -> BTreeSet<u64> {
    let l = l_value(form, n, residues);
    let base = if form.is_equal_divisor() {
        form.a()
    } else {
        form.a() * form.b() * form.c()
    } << delta_of(form);
    squarefree_divisors(base)
        .into_iter()
        .filter(|&t| square_class_test(l, t).unwrap())
        .collect()
}

/// Which planner drives an obstruction scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    MForm,
    AbcForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionEntry {
    pub n: u64,
    pub ts: Vec<u64>,
    pub escape_applied: bool,
}

/// All `n` in a scanned range whose planned l-value hits a square class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub form: FloorForm,
    pub n_lo: u64,
    pub n_hi: u64,
    pub mode: PlannerMode,
    pub entries: Vec<ObstructionEntry>,
}

/// Run the planner over `[n_lo, n_hi]` and record every nonempty
/// obstruction set, together with whether the direct escape representation
/// resolves it.
pub fn obstruction_scan(
    form: FloorForm,
    n_lo: u64,
    n_hi: u64,
    mode: PlannerMode,
) -> Result<ObstructionReport> {
    if mode == PlannerMode::MForm && !form.is_equal_divisor() {
        return Err(Error::HypothesisViolation(
            "m-form scan requires a = b = c".to_string(),
        ));
    }
    let mut entries = Vec::new();
    for n in n_lo..=n_hi {
        let plan = match mode {
            PlannerMode::MForm => plan_residues_m(form.a(), n)?,
            PlannerMode::AbcForm => {
                plan_residues_abc(form.a(), form.b(), form.c(), n)?
            }
        };
        let ts = obstruction_sets(plan.form, n, &plan.residues);
        if !ts.is_empty() {
            let escape_applied = plan.escape
                && escape_representation(plan.form.a(), n, &plan)
                    .ok()
                    .flatten()
                    .is_some();
            entries.push(ObstructionEntry {
                n,
                ts: ts.into_iter().collect(),
                escape_applied,
            });
        }
    }
    Ok(ObstructionReport {
        form,
        n_lo,
        n_hi,
        mode,
        entries,
    })
}
