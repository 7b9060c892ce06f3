//! The five invariants (I1..I5) of a level-structure representation.

use crate::arith::{factorize, is_prime, kronecker};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul};

pub type Q = BigRational;

pub const MAX_EXPONENT: u32 = 64;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_big(n: BigInt) -> Q {
    Q::from_integer(n)
}

/// Renders a rational as `n` or `n/d`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `n` or `n/d`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// (dim sigma, dim sigma^U, Tr sigma(S3), Tr sigma(S4), dim sigma^G).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeInvariants {
    pub i1: Q,
    pub i2: Q,
    pub i3: Q,
    pub i4: Q,
    pub i5: Q,
}

impl TypeInvariants {
    pub fn new(i1: Q, i2: Q, i3: Q, i4: Q, i5: Q) -> Self {
        TypeInvariants { i1, i2, i3, i4, i5 }
    }

    pub fn from_ints(v: [i64; 5]) -> Self {
        let [a, b, c, d, e] = v;
        Self::new(q(a), q(b), q(c), q(d), q(e))
    }

    pub fn one() -> Self {
        Self::from_ints([1; 5])
    }

    pub fn zero() -> Self {
        Self::from_ints([0; 5])
    }

    pub fn components(&self) -> [&Q; 5] {
        [&self.i1, &self.i2, &self.i3, &self.i4, &self.i5]
    }

    pub fn from_components(c: [Q; 5]) -> Self {
        let [i1, i2, i3, i4, i5] = c;
        Self::new(i1, i2, i3, i4, i5)
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::from_components(self.components().map(|x| x * s))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let a = self.components();
        let b = other.components();
        Self::from_components([0, 1, 2, 3, 4].map(|i| a[i] - b[i]))
    }
}

impl Add for &TypeInvariants {
    type Output = TypeInvariants;
    fn add(self, rhs: Self) -> TypeInvariants {
        combine_sum(self, rhs)
    }
}

impl Mul for &TypeInvariants {
    type Output = TypeInvariants;
    fn mul(self, rhs: Self) -> TypeInvariants {
        let a = self.components();
        let b = rhs.components();
        TypeInvariants::from_components([0, 1, 2, 3, 4].map(|i| a[i] * b[i]))
    }
}

impl fmt::Display for TypeInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.components().map(fmt_q);
        write!(f, "({}, {}, {}, {}, {})", c[0], c[1], c[2], c[3], c[4])
    }
}

fn check_prime_exp(p: u64, e: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e > MAX_EXPONENT {
        return Err(Error::ExponentTooLarge(e));
    }
    Ok(())
}

fn pow(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

fn legendre_m3(p: u64) -> i64 {
    kronecker(-3, p as i64).expect("p is nonzero") as i64
}

fn legendre_m1(p: u64) -> i64 {
    kronecker(-1, p as i64).expect("p is nonzero") as i64
}

/// Number of cusps-type count lambda(e, 0, p).
pub fn lambda_cond(e: u32, p: u64) -> Result<BigInt> {
    check_prime_exp(p, e)?;
    Ok(if e == 0 {
        BigInt::one()
    } else if e % 2 == 1 {
        2 * pow(p, e / 2)
    } else {
        let n = e / 2;
        pow(p, n) + pow(p, n - 1)
    })
}

/// Invariants of the representation defining S_k(Gamma_0(p^e)).
pub fn sigma_prime_power(p: u64, e: u32) -> Result<TypeInvariants> {
    check_prime_exp(p, e)?;
    if e == 0 {
        return Ok(TypeInvariants::one());
    }
    let i1 = pow(p, e - 1) * (p + 1);
    let i2 = lambda_cond(e, p)?;
    let i3 = if p == 3 {
        if e == 1 { 1 } else { 0 }
    } else {
        1 + legendre_m3(p)
    };
    let i4 = if p == 2 {
        if e == 1 { 1 } else { 0 }
    } else {
        1 + legendre_m1(p)
    };
    Ok(TypeInvariants::new(q_big(i1), q_big(i2), q(i3), q(i4), q(1)))
}

/// Invariants of the representation defining the new subspace at level p^e.
pub fn sigma_prime_power_new(p: u64, e: u32) -> Result<TypeInvariants> {
    check_prime_exp(p, e)?;
    if e == 0 {
        return Ok(TypeInvariants::one());
    }
    let i1 = match e {
        1 => BigInt::from(p - 1),
        2 => BigInt::from(p) * p - p - 1,
        _ => pow(p, e - 3) * (p - 1) * (p - 1) * (p + 1),
    };
    let i2 = if e % 2 == 1 {
        BigInt::zero()
    } else if e == 2 {
        BigInt::from(p) - 2
    } else {
        pow(p, e / 2 - 2) * (p - 1) * (p - 1)
    };
    let i3 = match (p, e) {
        (3, 1) | (3, 2) => -1,
        (3, 3) => 1,
        (3, _) => 0,
        (_, 1) => legendre_m3(p) - 1,
        (_, 2) => -legendre_m3(p),
        _ => 0,
    };
    let i4 = match (p, e) {
        (2, 1) | (2, 2) => -1,
        (2, 3) => 1,
        (2, _) => 0,
        (_, 1) => legendre_m1(p) - 1,
        (_, 2) => -legendre_m1(p),
        _ => 0,
    };
    let i5 = if e == 1 { -1 } else { 0 };
    Ok(TypeInvariants::new(q_big(i1), q_big(i2), q(i3), q(i4), q(i5)))
}

/// Checks the new-part lists against the old-part recursion; a test oracle.
pub fn verify_new_recursion(p: u64, e: u32) -> Result<bool> {
    let at = |j: i64| -> Result<TypeInvariants> {
        if j < 0 {
            Ok(TypeInvariants::zero())
        } else {
            sigma_prime_power(p, j as u32)
        }
    };
    let e_i = e as i64;
    let two = q(2);
    let rhs = combine_sum(&at(e_i)?.sub(&at(e_i - 1)?.scale(&two)), &at(e_i - 2)?);
    Ok(sigma_prime_power_new(p, e)? == rhs)
}

pub fn combine_product(parts: &[TypeInvariants]) -> TypeInvariants {
    parts.iter().fold(TypeInvariants::one(), |acc, x| &acc * x)
}

pub fn combine_sum(a: &TypeInvariants, b: &TypeInvariants) -> TypeInvariants {
    let x = a.components();
    let y = b.components();
    TypeInvariants::from_components([0, 1, 2, 3, 4].map(|i| x[i] + y[i]))
}

pub fn gamma0_invariants(n: u64) -> Result<TypeInvariants> {
    let parts = factorize(n)?
        .into_iter()
        .map(|(p, e)| sigma_prime_power(p, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_product(&parts))
}

pub fn gamma0_new_invariants(n: u64) -> Result<TypeInvariants> {
    let parts = factorize(n)?
        .into_iter()
        .map(|(p, e)| sigma_prime_power_new(p, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_product(&parts))
}
