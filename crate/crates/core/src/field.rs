//! Arithmetic mod an odd prime: primality, the quadratic character, and
//! precomputed root-of-unity tables shared by every sum in the crate.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("p = {0} exceeds the table budget of {1}")]
    BudgetExceeded(u64, u64),
}

/// Largest `p` for which `FieldContext::new` will allocate tables.
/// The two tables cost 17 bytes per residue, so this caps memory near 170 MB.
pub const DEFAULT_TABLE_BUDGET: u64 = 10_000_000;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin over a witness set that is exact for all u64.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if m == q {
            return true;
        }
        if m % q == 0 {
            return false;
        }
    }
    let trailing = (m - 1).trailing_zeros();
    let odd_part = (m - 1) >> trailing;
    // Exact for every 64-bit integer (Sinclair's base set would also do).
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, odd_part, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..trailing {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime >= n (n <= 2^63 in practice; panics on overflow).
pub fn next_prime_at_least(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n % 2 == 0 {
        n += 1;
    }
    while !is_prime(n) {
        n = n.checked_add(2).expect("prime search overflowed u64");
    }
    n
}

/// Legendre symbol (k/p) in {-1, 0, +1} by Euler's criterion.
pub fn legendre_symbol(k: u64, p: u64) -> Result<i8, FieldError> {
    if p < 3 || !is_prime(p) {
        return Err(FieldError::NotOddPrime(p));
    }
    let k = k % p;
    if k == 0 {
        return Ok(0);
    }
    let e = pow_mod(k, (p - 1) / 2, p);
    Ok(if e == 1 { 1 } else { -1 })
}

/// Tables for a fixed odd prime: the quadratic character chi (chi[0] = 0) and
/// the roots roots[k] = e^{-2 pi i k / p}.
///
/// Immutable after construction; all methods are read-only, so a context can
/// be shared freely across threads.
#[derive(Debug)]
pub struct FieldContext {
    p: u64,
    chi: Vec<i8>,
    roots: Vec<Complex64>,
}

impl FieldContext {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        Self::with_budget(p, DEFAULT_TABLE_BUDGET)
    }

    pub fn with_budget(p: u64, budget: u64) -> Result<Self, FieldError> {
        if p < 3 || !is_prime(p) {
            return Err(FieldError::NotOddPrime(p));
        }
        if p > budget {
            return Err(FieldError::BudgetExceeded(p, budget));
        }
        let n = p as usize;
        let mut chi = vec![-1i8; n];
        chi[0] = 0;
        for k in 1..=(p - 1) / 2 {
            chi[mul_mod(k, k, p) as usize] = 1;
        }
        // Each root from its own angle; repeated multiplication would drift.
        let step = -2.0 * PI / p as f64;
        let roots = (0..n)
            .map(|k| Complex64::from_polar(1.0, step * k as f64))
            .collect();
        Ok(FieldContext { p, chi, roots })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// chi at a residue already reduced to [0, p).
    #[inline]
    pub fn chi_at(&self, k: u64) -> i8 {
        self.chi[k as usize]
    }

    /// chi at an arbitrary signed integer.
    #[inline]
    pub fn chi(&self, x: i64) -> i8 {
        self.chi[x.rem_euclid(self.p as i64) as usize]
    }

    #[inline]
    pub fn chi_table(&self) -> &[i8] {
        &self.chi
    }

    /// e^{-2 pi i k / p} for k in [0, p).
    #[inline]
    pub fn root(&self, k: u64) -> Complex64 {
        self.roots[k as usize]
    }

    /// e^{-2 pi i a b / p} with the product reduced exactly.
    #[inline]
    pub fn root_prod(&self, a: u64, b: u64) -> Complex64 {
        self.roots[((a as u128 * b as u128) % self.p as u128) as usize]
    }

    /// G = sum_k chi[k] e^{+2 pi i k / p}.
    pub fn gauss_sum(&self) -> Complex64 {
        let mut acc = crate::linalg::KahanComplex::new();
        for k in 1..self.p {
            let c = self.chi[k as usize] as f64;
            acc.add(self.roots[k as usize].conj() * c);
        }
        acc.value()
    }

    /// The unimodular constant eps_p = G / sqrt(p): 1 for p = 1 mod 4,
    /// i for p = 3 mod 4.
    pub fn gauss_epsilon(&self) -> Complex64 {
        self.gauss_sum() / (self.p as f64).sqrt()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(m: u64) -> bool {
        if m < 2 {
            return false;
        }
        let mut d = 2u64;
        while d * d <= m {
            if m % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    fn primes_upto(n: u64) -> Vec<u64> {
        (2..=n).filter(|&m| trial_division(m)).collect()
    }

    /// Quadratic-residue oracle by enumerating all squares mod p.
    fn legendre_by_enumeration(k: u64, p: u64) -> i8 {
        if k % p == 0 {
            return 0;
        }
        for x in 1..p {
            if mul_mod(x, x, p) == k % p {
                return 1;
            }
        }
        -1
    }

    #[test]
    fn is_prime_examples() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        // 561 = 3 * 11 * 17 is a Carmichael number.
        assert!(!trial_division(561));
        assert!(!is_prime(561));
        assert!(trial_division(7919));
        assert!(is_prime(7919));
    }

    #[test]
    fn is_prime_matches_trial_division_to_20000() {
        for m in 0..20_000u64 {
            assert_eq!(is_prime(m), trial_division(m), "m = {m}");
        }
    }

    #[test]
    fn next_prime_works() {
        assert_eq!(next_prime_at_least(0), 2);
        assert_eq!(next_prime_at_least(14), 17);
        assert_eq!(next_prime_at_least(17), 17);
    }

    #[test]
    fn legendre_symbol_examples() {
        assert_eq!(legendre_symbol(0, 7).unwrap(), 0);
        // Squares mod 7 enumerate to {1, 2, 4}.
        assert_eq!(legendre_by_enumeration(2, 7), 1);
        assert_eq!(legendre_symbol(2, 7).unwrap(), 1);
        assert_eq!(legendre_by_enumeration(3, 7), -1);
        assert_eq!(legendre_symbol(3, 7).unwrap(), -1);
        assert_eq!(legendre_symbol(1, 101).unwrap(), 1);
        assert_eq!(legendre_symbol(4, 10), Err(FieldError::NotOddPrime(10)));
    }

    #[test]
    fn legendre_symbol_exhaustive_vs_enumeration() {
        for p in primes_upto(199).into_iter().filter(|&p| p > 2) {
            for k in 0..p {
                assert_eq!(
                    legendre_symbol(k, p).unwrap(),
                    legendre_by_enumeration(k, p),
                    "k = {k}, p = {p}"
                );
            }
        }
    }

    #[test]
    fn build_context_small_tables() {
        let ctx = FieldContext::new(3).unwrap();
        assert_eq!(ctx.chi_table(), &[0, 1, -1]);
        let ctx = FieldContext::new(5).unwrap();
        assert_eq!(ctx.chi_table(), &[0, 1, -1, -1, 1]);
    }

    #[test]
    fn build_context_rejects_bad_moduli() {
        assert_eq!(FieldContext::new(9).unwrap_err(), FieldError::NotOddPrime(9));
        assert_eq!(FieldContext::new(2).unwrap_err(), FieldError::NotOddPrime(2));
        assert_eq!(
            FieldContext::with_budget(101, 50).unwrap_err(),
            FieldError::BudgetExceeded(101, 50)
        );
    }

    #[test]
    fn context_invariants() {
        for p in primes_upto(199).into_iter().filter(|&p| p > 2) {
            let ctx = FieldContext::new(p).unwrap();
            let sum: i64 = ctx.chi_table().iter().map(|&c| c as i64).sum();
            assert_eq!(sum, 0, "chi does not balance at p = {p}");
            let plus = ctx.chi_table().iter().filter(|&&c| c == 1).count() as u64;
            assert_eq!(plus, (p - 1) / 2);
            // Multiplicativity over all nonzero pairs.
            for a in 1..p {
                for b in 1..p {
                    let ab = mul_mod(a, b, p);
                    assert_eq!(
                        ctx.chi_at(ab),
                        ctx.chi_at(a) * ctx.chi_at(b),
                        "a = {a}, b = {b}, p = {p}"
                    );
                }
            }
            for k in 0..p {
                assert!((ctx.root(k).norm() - 1.0).abs() <= 1e-12);
            }
            assert_eq!(ctx.root(0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn gauss_sum_small_closed_forms() {
        // p = 5: direct 5-term summation gives sqrt(5).
        let ctx = FieldContext::new(5).unwrap();
        let g = ctx.gauss_sum();
        assert!((g.re - 5f64.sqrt()).abs() < 1e-12 && g.im.abs() < 1e-12, "{g}");
        assert!((ctx.gauss_epsilon() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // p = 7: direct 7-term summation gives i sqrt(7).
        let ctx = FieldContext::new(7).unwrap();
        let g = ctx.gauss_sum();
        assert!((g.im - 7f64.sqrt()).abs() < 1e-12 && g.re.abs() < 1e-12, "{g}");
        assert!((ctx.gauss_epsilon() - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn gauss_sum_magnitude_sweep() {
        for p in primes_upto(10_000).into_iter().filter(|&p| p > 2) {
            let ctx = FieldContext::new(p).unwrap();
            assert!(
                (ctx.gauss_sum().norm() - (p as f64).sqrt()).abs() < 1e-9,
                "|G| != sqrt(p) at p = {p}"
            );
        }
    }
}
