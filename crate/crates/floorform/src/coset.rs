//! The shifted-lattice-coset correspondence: residues, l-values, explicit
//! coset descriptors, and the bridge between floor-form representations and
//! coset representations.
//!
//! A representation `n = ⌊x²/a⌋ + ⌊y²/b⌋ + ⌊z²/c⌋` pins residues
//! `α = x mod a` (etc.) and turns into the exact identity
//! `bc·x² + ca·y² + ab·z² = l(n)`, a representation of the l-value by a
//! diagonal form on a congruence class — equivalently by a shifted lattice
//! coset `L + v`.

use serde::Serialize;

use crate::arith::{exact_sqrt, gcd, isqrt};
use crate::form::{eval_form, FloorForm, Representation};
use crate::{Error, Result};

/// Residues `(α, β, γ)` with the induced `(a₀, b₀, c₀)`:
/// `a₀ ≡ α² (mod a)`, `0 ≤ a₀ < a`, and likewise for the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResidueTriple {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub a0: u64,
    pub b0: u64,
    pub c0: u64,
}

impl ResidueTriple {
    pub fn new(form: FloorForm, alpha: i64, beta: i64, gamma: i64) -> Self {
        ResidueTriple {
            alpha,
            beta,
            gamma,
            a0: residue_square(alpha, form.a()),
            b0: residue_square(beta, form.b()),
            c0: residue_square(gamma, form.c()),
        }
    }

    /// The two residue lifts per coordinate that describe the same
    /// half-integral coset: replacing `α` by `α + a` leaves every l-value
    /// and every odd-place local verdict unchanged.
    pub fn replacement_lifts(&self, form: FloorForm) -> [[i64; 2]; 3] {
        [
            [self.alpha, self.alpha + form.a() as i64],
            [self.beta, self.beta + form.b() as i64],
            [self.gamma, self.gamma + form.c() as i64],
        ]
    }
}

/// Which normalization a descriptor carries; the two l-value conventions
/// differ by a factor `m²` and must not be mixed by consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CosetConvention {
    /// `a = b = c = m`: lattice `4^δ·m²·<1,1,1>`, `N = 2^δ·m`, `h = (α,β,γ)`.
    MSpecialized,
    /// General triple: lattice `4^δ·abc·<a,b,c>`, `N = 2^δ·abc`,
    /// `h = (bcα, caβ, abγ)`.
    AbcScaled,
    /// A bare positive diagonal form with zero shift (oracle use).
    PlainDiagonal,
}

/// A shifted lattice coset in explicit diagonal form.
///
/// The quadratic map is evaluated through the integral view
/// `Q(x + v) = Σ q_i·(d_i·x_i + r_i)²` with `q_i = gram_i / d_i²`; the
/// construction guarantees `q_i` is an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDescriptor {
    pub convention: CosetConvention,
    pub delta: u32,
    pub gram_diagonal: [u64; 3],
    /// Shift `v` as three reduced fractions `shift_num[i] / shift_den[i]`.
    pub shift_num: [i64; 3],
    pub shift_den: [u64; 3],
    /// Theta level `N`.
    pub level: u64,
    /// Diagonal of the theta matrix `A`.
    pub a_diagonal: [u64; 3],
    /// Congruence vector `h` with `A·h ≡ 0 (mod N)`.
    pub h: [i64; 3],
    q: [u64; 3],
    d: [u64; 3],
    r: [u64; 3],
}

/// `δ = 1` when `gcd(a, b, c)` is odd, else 0.
pub fn delta_of(form: FloorForm) -> u32 {
    let g = gcd(gcd(form.a(), form.b()), form.c());
    if g % 2 == 1 {
        1
    } else {
        0
    }
}

/// The unique `a₀ ∈ [0, a)` with `a₀ ≡ α² (mod a)`.
pub fn residue_square(alpha: i64, a: u64) -> u64 {
    let a = a as i128;
    ((alpha as i128 * alpha as i128).rem_euclid(a)) as u64
}

/// The l-value whose coset representability is equivalent to floor-form
/// representability of `n`: `abc·n + bc·a₀ + ca·b₀ + ab·c₀`, specialised to
/// `m·n + a₀ + b₀ + c₀` when `a = b = c = m`.
pub fn l_value(form: FloorForm, n: u64, residues: &ResidueTriple) -> u64 {
    let [a, b, c] = form.divisors();
    if form.is_equal_divisor() {
        a * n + residues.a0 + residues.b0 + residues.c0
    } else {
        a * b * c * n + b * c * residues.a0 + c * a * residues.b0 + a * b * residues.c0
    }
}

/// Localized target `l*(n) = n + (a₀−α²)/a + (b₀−β²)/b + (c₀−γ²)/c`; the
/// definition of the induced residues makes every division exact. `l` is
/// represented by the half-integral coset over `Z_p` exactly when `l*` is
/// represented by `Σ (d·x² + 2δ·x)`.
pub fn localized_l_target(form: FloorForm, n: u64, residues: &ResidueTriple) -> i64 {
    let [a, b, c] = form.divisors();
    let mut t = n as i128;
    for (d, d0, delta) in [
        (a, residues.a0, residues.alpha),
        (b, residues.b0, residues.beta),
        (c, residues.c0, residues.gamma),
    ] {
        let num = d0 as i128 - (delta as i128) * (delta as i128);
        debug_assert_eq!(num.rem_euclid(d as i128), 0);
        t += num / d as i128;
    }
    t as i64
}

/// Descriptor of the coset attached to `(form, residues)`.
pub fn build_coset(form: FloorForm, residues: &ResidueTriple) -> CosetDescriptor {
    let [a, b, c] = form.divisors();
    let delta = delta_of(form);
    let pow2 = 1u64 << delta;
    let pow4 = pow2 * pow2;
    let res = [residues.alpha, residues.beta, residues.gamma];
    if form.is_equal_divisor() {
        let m = a;
        let d = pow2 * m;
        CosetDescriptor {
            convention: CosetConvention::MSpecialized,
            delta,
            gram_diagonal: [pow4 * m * m; 3],
            shift_num: res,
            shift_den: [d; 3],
            level: d,
            a_diagonal: [d; 3],
            h: res,
            q: [1; 3],
            d: [d; 3],
            r: res.map(|v| v.rem_euclid(d as i64) as u64),
        }
    } else {
        let abc = a * b * c;
        let d = [pow2 * a, pow2 * b, pow2 * c];
        CosetDescriptor {
            convention: CosetConvention::AbcScaled,
            delta,
            gram_diagonal: [pow4 * abc * a, pow4 * abc * b, pow4 * abc * c],
            shift_num: res,
            shift_den: d,
            level: pow2 * abc,
            a_diagonal: d,
            h: [
                (b * c) as i64 * residues.alpha,
                (c * a) as i64 * residues.beta,
                (a * b) as i64 * residues.gamma,
            ],
            q: [b * c, c * a, a * b],
            d,
            r: [
                residues.alpha.rem_euclid(d[0] as i64) as u64,
                residues.beta.rem_euclid(d[1] as i64) as u64,
                residues.gamma.rem_euclid(d[2] as i64) as u64,
            ],
        }
    }
}

impl CosetDescriptor {
    /// A bare positive-definite diagonal form `<d1, d2, d3>` with zero
    /// shift; used as the three-square and regular-form oracles.
    pub fn plain_diagonal(diag: [u64; 3]) -> Self {
        assert!(diag.iter().all(|&d| d > 0));
        CosetDescriptor {
            convention: CosetConvention::PlainDiagonal,
            delta: 0,
            gram_diagonal: diag,
            shift_num: [0; 3],
            shift_den: [1; 3],
            level: 1,
            a_diagonal: diag,
            h: [0; 3],
            q: diag,
            d: [1; 3],
            r: [0; 3],
        }
    }

    /// `Q(x + v)` at the integral lattice point `x`.
    pub fn shifted_value(&self, x: [i64; 3]) -> u64 {
        let mut total = 0i128;
        for (i, &xi) in x.iter().enumerate() {
            let t = self.d[i] as i128 * xi as i128 + self.r[i] as i128;
            total += self.q[i] as i128 * t * t;
        }
        total as u64
    }

    /// The rescaled coordinate `X_i = d_i·x_i + r_i` of a lattice point.
    pub fn rescaled_coordinate(&self, i: usize, xi: i64) -> i64 {
        self.d[i] as i64 * xi + self.r[i] as i64
    }

    pub fn integral_view(&self) -> ([u64; 3], [u64; 3], [u64; 3]) {
        (self.q, self.d, self.r)
    }

    /// Coordinate bound that makes the search over `Q(x+v) = l` exhaustive.
    pub fn default_search_bound(&self, l: u64) -> u64 {
        let gmin = *self.gram_diagonal.iter().min().unwrap();
        isqrt(l / gmin) + 2
    }
}

/// Residues and l-value induced by a floor-form witness; the identity
/// `bc·x² + ca·y² + ab·z² = l` (or `x² + y² + z² = l` in the specialised
/// convention) is checked exactly.
pub fn floor_to_coset(
    form: FloorForm,
    n: u64,
    witness: &Representation,
) -> Result<(ResidueTriple, u64)> {
    if eval_form(form, witness.x, witness.y, witness.z) != n {
        return Err(Error::InvalidWitness);
    }
    let [a, b, c] = form.divisors();
    let residues = ResidueTriple::new(
        form,
        witness.x.rem_euclid(a as i64),
        witness.y.rem_euclid(b as i64),
        witness.z.rem_euclid(c as i64),
    );
    let l = l_value(form, n, &residues);
    let (sx, sy, sz) = (
        witness.x as i128 * witness.x as i128,
        witness.y as i128 * witness.y as i128,
        witness.z as i128 * witness.z as i128,
    );
    let quad = if form.is_equal_divisor() {
        sx + sy + sz
    } else {
        (b * c) as i128 * sx + (c * a) as i128 * sy + (a * b) as i128 * sz
    };
    debug_assert_eq!(quad, l as i128, "coset identity must hold for valid witnesses");
    Ok((residues, l))
}

/// An integral lattice point `x` with `Q(x + v) = l` and every coordinate
/// bounded by `search_bound`, or `None`.
pub fn coset_represents_global(
    coset: &CosetDescriptor,
    l: u64,
    search_bound: u64,
) -> Option<[i64; 3]> {
    assert!(search_bound >= 1, "search bound must be positive");
    let bound = search_bound as i64;
    let (q, d, r) = (coset.q, coset.d, coset.r);

    let coord_range = |i: usize| -> (i64, i64) {
        // q_i·X² ≤ l with X = d_i·x + r_i.
        let xmax = isqrt(l / q[i]) as i64;
        let lo = (-xmax - r[i] as i64).div_euclid(d[i] as i64);
        let hi = (xmax - r[i] as i64).div_euclid(d[i] as i64);
        (lo.max(-bound), hi.min(bound))
    };

    let (lo1, hi1) = coord_range(0);
    let (lo2, hi2) = coord_range(1);
    for x1 in lo1..=hi1 {
        let t1 = coset.rescaled_coordinate(0, x1);
        let v1 = q[0] as i128 * t1 as i128 * t1 as i128;
        if v1 > l as i128 {
            continue;
        }
        for x2 in lo2..=hi2 {
            let t2 = coset.rescaled_coordinate(1, x2);
            let v2 = q[1] as i128 * t2 as i128 * t2 as i128;
            if v1 + v2 > l as i128 {
                continue;
            }
            let rem = l as i128 - v1 - v2;
            if rem % q[2] as i128 != 0 {
                continue;
            }
            let square = (rem / q[2] as i128) as u64;
            let Some(x3_abs) = exact_sqrt(square) else {
                continue;
            };
            let candidates = if x3_abs == 0 {
                [0i64, 0]
            } else {
                [x3_abs as i64, -(x3_abs as i64)]
            };
            for (k, &t3) in candidates.iter().enumerate() {
                if k == 1 && candidates[0] == candidates[1] {
                    break;
                }
                let num = t3 - r[2] as i64;
                if num.rem_euclid(d[2] as i64) != 0 {
                    continue;
                }
                let x3 = num.div_euclid(d[2] as i64);
                if x3.abs() <= bound {
                    return Some([x1, x2, x3]);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::search_representation;
    use proptest::prelude::*;

    fn form(a: u64, b: u64, c: u64) -> FloorForm {
        FloorForm::new(a, b, c).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_of(form(5, 7, 9)), 1);
        assert_eq!(delta_of(form(10, 10, 10)), 0);
        assert_eq!(delta_of(form(6, 10, 14)), 0);
        assert_eq!(delta_of(form(1, 1, 1)), 1);
    }

    #[test]
    fn residue_square_examples() {
        assert_eq!(residue_square(7, 10), 9);
        assert_eq!(residue_square(5, 10), 5);
        assert_eq!(residue_square(2, 5), 4);
        assert_eq!(residue_square(-3, 7), 2);
    }

    #[test]
    fn l_value_examples() {
        let f = form(10, 10, 10);
        let mut r = ResidueTriple::new(f, 1, 0, 0);
        assert_eq!((r.a0, r.b0, r.c0), (1, 0, 0));
        assert_eq!(l_value(f, 4, &r), 41);

        r = ResidueTriple::new(f, 1, 0, 4);
        assert_eq!((r.a0, r.b0, r.c0), (1, 0, 6));
        assert_eq!(l_value(f, 1, &r), 17);

        let f = form(6, 5, 7);
        let r = ResidueTriple::new(f, 1, 1, 1);
        assert_eq!(l_value(f, 0, &r), 107);
        assert_eq!(107 % 4, 3);
    }

    #[test]
    fn build_coset_examples() {
        let f = form(5, 7, 9);
        let coset = build_coset(f, &ResidueTriple::new(f, 1, 1, 1));
        assert_eq!(coset.delta, 1);
        assert_eq!(coset.level, 630);
        assert_eq!(coset.a_diagonal, [10, 14, 18]);
        assert_eq!(coset.h, [63, 45, 35]);
        assert_eq!(coset.convention, CosetConvention::AbcScaled);

        let f = form(10, 10, 10);
        let coset = build_coset(f, &ResidueTriple::new(f, 3, 1, 2));
        assert_eq!(coset.delta, 0);
        assert_eq!(coset.level, 10);
        assert_eq!(coset.a_diagonal, [10, 10, 10]);
        assert_eq!(coset.h, [3, 1, 2]);
        assert_eq!(coset.convention, CosetConvention::MSpecialized);
    }

    #[test]
    fn theta_admissibility_holds() {
        // A·h ≡ 0 (mod N) componentwise.
        for (f, res) in [
            (form(5, 7, 9), (1, 1, 1)),
            (form(10, 10, 10), (3, 7, 2)),
            (form(6, 5, 7), (1, 4, 2)),
        ] {
            let coset = build_coset(f, &ResidueTriple::new(f, res.0, res.1, res.2));
            for i in 0..3 {
                assert_eq!(
                    (coset.a_diagonal[i] as i64 * coset.h[i]).rem_euclid(coset.level as i64),
                    0
                );
            }
        }
    }

    #[test]
    fn floor_to_coset_examples() {
        let f = form(3, 3, 3);
        let w = Representation { x: 2, y: 2, z: 0 };
        let (res, l) = floor_to_coset(f, 2, &w).unwrap();
        assert_eq!((res.alpha, res.beta, res.gamma), (2, 2, 0));
        assert_eq!((res.a0, res.b0, res.c0), (1, 1, 0));
        assert_eq!(l, 8);

        let f = form(1, 1, 1);
        let (_, l) = floor_to_coset(f, 3, &Representation { x: 1, y: 1, z: 1 }).unwrap();
        assert_eq!(l, 3);

        let f = form(5, 7, 9);
        let (res, l) = floor_to_coset(f, 1, &Representation { x: 3, y: 0, z: 0 }).unwrap();
        assert_eq!(res.alpha, 3);
        assert_eq!(res.a0, 4);
        assert_eq!(l, 567);
        assert_eq!(63 * 9, 567);

        assert_eq!(
            floor_to_coset(f, 2, &Representation { x: 3, y: 0, z: 0 }),
            Err(Error::InvalidWitness)
        );
    }

    #[test]
    fn replacement_lifts_preserve_the_l_value() {
        // The two lifts per coordinate describe the same half-integral
        // coset: the induced residues, and hence l, are unchanged.
        let f = form(5, 7, 9);
        let res = ResidueTriple::new(f, 2, 3, 4);
        let lifts = res.replacement_lifts(f);
        for (i, &[raw, replaced]) in lifts.iter().enumerate() {
            let d = f.divisors()[i];
            assert_eq!(residue_square(raw, d), residue_square(replaced, d));
        }
        for n in 0..5 {
            let shifted = ResidueTriple::new(f, lifts[0][1], lifts[1][1], lifts[2][1]);
            assert_eq!(l_value(f, n, &res), l_value(f, n, &shifted));
        }
    }

    #[test]
    fn plain_diagonal_oracles() {
        let unit = CosetDescriptor::plain_diagonal([1, 1, 1]);
        assert_eq!(coset_represents_global(&unit, 7, 10), None);
        assert!(coset_represents_global(&unit, 6, 10).is_some());

        let dickson = CosetDescriptor::plain_diagonal([2, 3, 3]);
        assert_eq!(coset_represents_global(&dickson, 1, 10), None);
        assert!(coset_represents_global(&dickson, 2, 10).is_some());
    }

    #[test]
    fn coset_round_trip_small() {
        let f = form(3, 3, 3);
        let w = search_representation(f, 2).unwrap();
        let (res, l) = floor_to_coset(f, 2, &w).unwrap();
        let coset = build_coset(f, &res);
        let bound = coset.default_search_bound(l);
        let witness = coset_represents_global(&coset, l, bound).expect("coset witness");
        assert_eq!(coset.shifted_value(witness), l);
    }

    proptest! {
        #[test]
        fn admissibility_random(
            a in 1u64..40, b in 1u64..40, c in 1u64..40,
            alpha in -60i64..60, beta in -60i64..60, gamma in -60i64..60,
        ) {
            let f = FloorForm::new(a, b, c).unwrap();
            let coset = build_coset(f, &ResidueTriple::new(f, alpha, beta, gamma));
            for i in 0..3 {
                prop_assert_eq!(
                    (coset.a_diagonal[i] as i64 * coset.h[i]).rem_euclid(coset.level as i64),
                    0
                );
            }
            // The integral view reproduces the gram diagonal.
            let (q, d, _) = coset.integral_view();
            for i in 0..3 {
                prop_assert_eq!(q[i] * d[i] * d[i], coset.gram_diagonal[i]);
            }
        }

        #[test]
        fn shifted_values_consistent(
            a in 1u64..12, b in 1u64..12, c in 1u64..12,
            alpha in 0i64..12, beta in 0i64..12, gamma in 0i64..12,
            x in -4i64..4, y in -4i64..4, z in -4i64..4,
        ) {
            let f = FloorForm::new(a, b, c).unwrap();
            let res = ResidueTriple::new(f, alpha, beta, gamma);
            let coset = build_coset(f, &res);
            let v = coset.shifted_value([x, y, z]);
            // Recompute from the public fields: gram and shift.
            let mut total = 0i128;
            for (i, &coord) in [x, y, z].iter().enumerate() {
                let num = coset.shift_den[i] as i128 * coord as i128
                    + coset.shift_num[i].rem_euclid(coset.shift_den[i] as i64) as i128;
                // gram·(x + num/den)² = gram/den²·(den·x + num)²
                let g = coset.gram_diagonal[i] as i128;
                let den2 = (coset.shift_den[i] as i128).pow(2);
                prop_assert_eq!(g % den2, 0);
                total += g / den2 * num * num;
            }
            prop_assert_eq!(v as i128, total);
        }
    }
}
