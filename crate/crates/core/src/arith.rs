//! Elementary number theory: Kronecker symbols, factorization, class numbers.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Kronecker symbol (a/n) for n != 0.
pub fn kronecker(a: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return Err(Error::InvalidArgument("kronecker symbol with n = 0".into()));
    }
    Ok(kronecker_wide(a as i128, n as i128))
}

fn kronecker_wide(a: i128, n: i128) -> i8 {
    let mut sign = 1i8;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= v;
        let r = a.rem_euclid(8);
        if v % 2 == 1 && (r == 3 || r == 5) {
            sign = -sign;
        }
    }
    sign * jacobi(a.rem_euclid(n), n)
}

/// Jacobi symbol for odd positive n and 0 <= a < n.
fn jacobi(mut a: i128, mut n: i128) -> i8 {
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Prime factorization as (prime, exponent) pairs with strictly increasing primes.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p <= TRIAL_LIMIT && p.saturating_mul(p) <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        let mut rest = Vec::new();
        split_large(m, &mut rest);
        rest.sort_unstable();
        for q in rest {
            match out.last_mut() {
                Some((last, e)) if *last == q => *e += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    Ok(out)
}

pub fn radical(n: u64) -> Result<u64> {
    Ok(factorize(n)?.iter().map(|&(p, _)| p).product())
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.iter().all(|&(_, e)| e == 1))
}

/// Moebius function.
pub fn moebius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let abs = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => is_squarefree(abs).unwrap_or(false),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs()).unwrap_or(false)
        }
        _ => false,
    }
}

/// Class number of a negative fundamental discriminant, by counting reduced forms.
pub fn class_number(disc: i64) -> Result<u64> {
    if disc >= 0 || !is_fundamental_discriminant(disc) {
        return Err(Error::NotFundamental(disc));
    }
    let d = disc as i128;
    let mut h = 0u64;
    let mut a: i128 = 1;
    while 3 * a * a <= -d {
        for b in -a..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if b < 0 && (-b == a || a == c) {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

/// An imaginary quadratic field, recorded by its discriminant and class number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadField {
    pub disc: i64,
    pub class_number: u64,
}

impl QuadField {
    pub fn new(disc: i64) -> Result<Self> {
        let class_number = class_number(disc)?;
        Ok(QuadField { disc, class_number })
    }

    pub fn abs_disc(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    /// For D_K = -p with p prime and p = 3 mod 4, returns p.
    pub fn ramified_prime(&self) -> Option<u64> {
        let p = self.abs_disc();
        (p % 4 == 3 && is_prime(p)).then_some(p)
    }
}

pub fn splitting_type(field: &QuadField, p: u64) -> Result<SplittingType> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p = i64::try_from(p).map_err(|_| Error::Overflow("splitting_type"))?;
    Ok(match kronecker(field.disc, p)? {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-3, 7).unwrap(), 1);
        for p in [3i64, 7, 11, 19, 23, 43] {
            assert_eq!(kronecker(-1, p).unwrap(), -1);
        }
        assert_eq!(kronecker(12345, 1).unwrap(), 1);
        assert!(kronecker(5, 0).is_err());
        assert_eq!(kronecker(-19, 2).unwrap(), -1);
        assert_eq!(kronecker(-7, 2).unwrap(), 1);
        assert_eq!(kronecker(-3, -1).unwrap(), -1);
    }

    #[test]
    fn kronecker_matches_squares() {
        for p in (3..100u64).filter(|&p| is_prime(p)) {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 1..p {
                let expected = if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(kronecker(a as i64, p as i64).unwrap(), expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for n in 1..=50i64 {
            for a in -50..=50i64 {
                for b in -50..=50i64 {
                    let lhs = kronecker(a * b, n).unwrap();
                    let rhs = kronecker(a, n).unwrap() * kronecker(b, n).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().is_empty());
        assert_eq!(factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(361).unwrap(), vec![(19, 2)]);
        let big = 1_000_003u64 * 1_000_033;
        assert_eq!(factorize(big).unwrap(), vec![(1_000_003, 1), (1_000_033, 1)]);
        assert_eq!(factorize(u64::MAX).unwrap().iter().map(|&(p, e)| p.pow(e)).product::<u64>(), u64::MAX);
    }

    #[test]
    fn factorize_round_trip() {
        for n in 1..=100_000u64 {
            let f = factorize(n).unwrap();
            assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        }
    }

    #[test]
    fn radical_and_squarefree() {
        assert_eq!(radical(1).unwrap(), 1);
        assert_eq!(radical(49).unwrap(), 7);
        assert!(is_squarefree(30).unwrap());
        assert!(!is_squarefree(12).unwrap());
        for n in 1..2000 {
            assert_eq!(is_squarefree(n).unwrap(), radical(n).unwrap() == n);
        }
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number(-7).unwrap(), 1);
        assert_eq!(class_number(-4).unwrap(), 1);
        assert_eq!(class_number(-23).unwrap(), 3);
        assert_eq!(class_number(-163).unwrap(), 1);
        assert_eq!(class_number(-20).unwrap(), 2);
        assert!(class_number(-12).is_err());
        assert!(class_number(5).is_err());
    }

    #[test]
    fn class_number_odd_for_prime_discriminants() {
        for p in (3..1000u64).filter(|&p| p % 4 == 3 && is_prime(p)) {
            assert_eq!(class_number(-(p as i64)).unwrap() % 2, 1, "p={p}");
        }
    }

    #[test]
    fn splitting() {
        let k = QuadField::new(-19).unwrap();
        assert_eq!(splitting_type(&k, 19).unwrap(), SplittingType::Ramified);
        assert_eq!(splitting_type(&k, 5).unwrap(), SplittingType::Split);
        assert_eq!(splitting_type(&k, 2).unwrap(), SplittingType::Inert);
        assert!(splitting_type(&k, 9).is_err());
    }
}
