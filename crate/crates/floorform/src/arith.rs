//! Base exact-integer number theory used by every other module.
//!
//! Everything here works on machine integers with 128-bit intermediates;
//! overflow checks are enabled in all build profiles, so no operation can
//! silently wrap.

use crate::{Error, Result};

/// Floor of the square root, by Newton iteration with a final exactness
/// check against the neighbouring candidates.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64 + 1;
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    // Newton can land one off either way near perfect squares.
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// `Some(r)` with `r² = n` when `n` is a perfect square, else `None`.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    // Squares are 0, 1, 4, 9 mod 16; cheap rejection before the iteration.
    if ![0, 1, 4, 9].contains(&(n % 16)) {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Squarefree decomposition: `(s, t)` with `a = s·t²` and `s` squarefree.
///
/// Trial division; every input in scope is small.
pub fn squarefree_part(a: u64) -> Result<(u64, u64)> {
    if a == 0 {
        return Err(Error::NotPositive("a"));
    }
    let mut rest = a;
    let mut s = 1u64;
    let mut t = 1u64;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            let mut e = 0u32;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            if e % 2 == 1 {
                s *= d;
            }
            t *= d.pow(e / 2);
        }
        d += 1;
    }
    // Whatever is left is a prime to the first power.
    s *= rest;
    Ok((s, t))
}

/// `true` iff no prime square divides `t`.
pub fn is_squarefree(t: u64) -> bool {
    match squarefree_part(t) {
        Ok((_, mult)) => mult == 1,
        Err(_) => false,
    }
}

/// Exponent of `p` in `n` (`n ≠ 0`).
pub fn p_adic_ord(p: u64, n: i64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::ZeroArgument("n"));
    }
    let mut m = n.unsigned_abs();
    let mut k = 0u32;
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    Ok(k)
}

/// `true` iff `t ∣ n` and `n/t` is a perfect square; `t` must be squarefree.
pub fn square_class_test(n: u64, t: u64) -> Result<bool> {
    if t == 0 || !is_squarefree(t) {
        return Err(Error::NotSquarefree(t));
    }
    Ok(n % t == 0 && exact_sqrt(n / t).is_some())
}

/// Quadratic residue symbol `(a/p)` for an odd prime `p`, via Euler's
/// criterion.
pub fn legendre_symbol(a: i64, p: u64) -> Result<i8> {
    if p == 2 {
        return Err(Error::OddPrimeRequired(2));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return Ok(0);
    }
    let e = pow_mod(a, (p - 1) / 2, p);
    Ok(if e == 1 { 1 } else { -1 })
}

/// `(base^exp) mod m`, with 128-bit intermediates.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    debug_assert!(m > 0);
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    let mut base = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `(a·b) mod m` without overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Deterministic Miller-Rabin for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    // This base set is deterministic for all u64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Extended Euclid: the inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r.abs() != 1 {
        return None;
    }
    Some((old_s * old_r.signum()).rem_euclid(m as i128) as u64)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Distinct prime factors of `n`, ascending; empty for `n ≤ 1`.
pub fn prime_factors(n: u64) -> Vec<u64> {
    let mut rest = n;
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            out.push(d);
            while rest % d == 0 {
                rest /= d;
            }
        }
        d += 1;
    }
    if rest > 1 {
        out.push(rest);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn squarefree_part_basics() {
        assert_eq!(squarefree_part(12).unwrap(), (3, 2));
        assert_eq!(squarefree_part(1).unwrap(), (1, 1));
        assert_eq!(squarefree_part(50).unwrap(), (2, 5));
        assert_eq!(squarefree_part(0), Err(Error::NotPositive("a")));
    }

    #[test]
    fn squarefree_part_matches_trial_division_oracle() {
        // Oracle: s has no square divisor, checked by direct trial division.
        for a in 1..=10_000u64 {
            let (s, t) = squarefree_part(a).unwrap();
            assert_eq!(s * t * t, a);
            let mut d = 2;
            while d * d <= s {
                assert_ne!(s % (d * d), 0, "square divisor {d}^2 of s={s} (a={a})");
                d += 1;
            }
        }
    }

    #[test]
    fn p_adic_ord_basics() {
        assert_eq!(p_adic_ord(2, 40).unwrap(), 3);
        assert_eq!(p_adic_ord(3, 5).unwrap(), 0);
        assert_eq!(p_adic_ord(5, 250).unwrap(), 3);
        assert_eq!(p_adic_ord(5, 0), Err(Error::ZeroArgument("n")));
    }

    #[test]
    fn exact_sqrt_basics() {
        assert_eq!(exact_sqrt(0), Some(0));
        assert_eq!(exact_sqrt(8597), None); // 8597 = 5 mod 8, squares are 0,1,4
        assert_eq!(exact_sqrt(1296), Some(36));
    }

    #[test]
    fn exact_sqrt_exhaustive_small() {
        for n in 0..=10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "isqrt({n})");
            assert_eq!(exact_sqrt(n).is_some(), r * r == n);
        }
    }

    #[test]
    fn square_class_basics() {
        assert!(square_class_test(18, 2).unwrap());
        assert!(square_class_test(9, 1).unwrap());
        // 13 = 5*2+3: 3 does not even divide it.
        assert!(!square_class_test(13, 3).unwrap());
        assert!(square_class_test(10, 4).is_err());
    }

    #[test]
    fn legendre_basics() {
        assert_eq!(legendre_symbol(2, 3).unwrap(), -1);
        assert_eq!(legendre_symbol(4, 5).unwrap(), 1);
        assert_eq!(legendre_symbol(2, 7).unwrap(), 1); // 3² = 9 ≡ 2
        assert!(legendre_symbol(1, 2).is_err());
    }

    #[test]
    fn legendre_is_euler_criterion_on_small_primes() {
        for p in [3u64, 5, 7, 11, 13] {
            for a in 0..p as i64 {
                let sym = legendre_symbol(a, p).unwrap();
                let e = pow_mod(a as u64, (p - 1) / 2, p);
                let expected = if e == 0 {
                    0
                } else if e == 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(sym, expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn primality_spot_checks() {
        let primes = [2u64, 3, 5, 7, 11, 104729, 2_147_483_647];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for n in [0u64, 1, 4, 9, 561, 104730] {
            assert!(!is_prime(n), "{n}");
        }
    }

    #[test]
    fn inverse_mod() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        for m in 2..50u64 {
            for a in 1..m {
                if gcd(a, m) == 1 {
                    let inv = inv_mod(a, m).unwrap();
                    assert_eq!(a * inv % m, 1, "a={a} m={m}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn squarefree_reconstruction(a in 1u64..1_000_000) {
            let (s, t) = squarefree_part(a).unwrap();
            prop_assert_eq!(s * t * t, a);
            prop_assert!(is_squarefree(s));
        }

        #[test]
        fn isqrt_bounds(n in 0u64..u64::MAX / 4) {
            let r = isqrt(n);
            prop_assert!(r as u128 * r as u128 <= n as u128);
            prop_assert!((r as u128 + 1) * (r as u128 + 1) > n as u128);
        }
    }
}
