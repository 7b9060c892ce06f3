//! Independent classical dimension formulas used for cross-checks and fitting.
//!
//! Trivial character: genus and elliptic-point form with floor terms.
//! Quadratic character: Cohen-Oesterle closed form with brute-force root sums.

use super::{to_dimension, WeightSpec};
use crate::arith::{factorize, is_fundamental_discriminant, is_prime, kronecker};
use crate::error::{Error, Result};
use crate::invariants::{q, q_big, q_frac, Q};
use num_bigint::BigInt;
use num_integer::Integer;

/// A quadratic Dirichlet character given by the Kronecker symbol of a fundamental
/// discriminant; `disc == 1` is the trivial character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticCharacter {
    disc: i64,
}

impl QuadraticCharacter {
    pub fn trivial() -> Self {
        QuadraticCharacter { disc: 1 }
    }

    pub fn from_discriminant(disc: i64) -> Result<Self> {
        if disc == 1 {
            return Ok(Self::trivial());
        }
        if !is_fundamental_discriminant(disc) {
            return Err(Error::UnsupportedCharacter(format!("{disc} is not a fundamental discriminant")));
        }
        Ok(QuadraticCharacter { disc })
    }

    /// omega_d: conductor is the product of the primes p with p || d.
    pub fn omega(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedCharacter("omega_0".into()));
        }
        let f: u64 = factorize(d)?
            .into_iter()
            .filter(|&(_, e)| e == 1)
            .map(|(p, _)| p)
            .product();
        if f == 1 {
            return Ok(Self::trivial());
        }
        if f % 2 == 0 {
            return Err(Error::UnsupportedCharacter(format!(
                "omega_{d} has even conductor {f}; only odd conductors are supported"
            )));
        }
        let f = i64::try_from(f).map_err(|_| Error::Overflow("omega"))?;
        Self::from_discriminant(if f % 4 == 1 { f } else { -f })
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn is_trivial(&self) -> bool {
        self.disc == 1
    }

    pub fn is_odd(&self) -> bool {
        self.disc < 0
    }

    pub fn value(&self, x: u64) -> i64 {
        if self.is_trivial() {
            return 1;
        }
        if x == 0 {
            return 0;
        }
        kronecker(self.disc, x as i64).expect("x is nonzero") as i64
    }
}

fn count_roots(n: u64, chi: &QuadraticCharacter, poly: impl Fn(u128) -> u128) -> i64 {
    let m = n as u128;
    (0..n).filter(|&x| poly(x as u128) % m == 0).map(|x| chi.value(x)).sum()
}

/// Weight-independent data of S_k(Gamma_0(N), chi).
#[derive(Debug, Clone)]
pub struct OracleSpace {
    pub n: u64,
    pub chi: QuadraticCharacter,
    /// Index of Gamma_0(N) in SL_2(Z).
    pub psi: BigInt,
    /// Product of the local lambda factors (cusp count for trivial chi).
    pub lambda: BigInt,
    /// Sum of chi over roots of x^2 + x + 1 mod N.
    pub s3: i64,
    /// Sum of chi over roots of x^2 + 1 mod N.
    pub s4: i64,
    cusps: BigInt,
}

impl OracleSpace {
    pub fn new(n: u64, chi: QuadraticCharacter) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("level 0".into()));
        }
        if n % chi.conductor() != 0 {
            return Err(Error::UnsupportedCharacter(format!(
                "conductor {} does not divide level {n}",
                chi.conductor()
            )));
        }
        let fac = factorize(n)?;
        let mut psi = BigInt::from(n);
        let mut lambda = BigInt::from(1);
        for &(p, r) in &fac {
            psi = psi / p * (p + 1);
            let s = if chi.conductor() % p == 0 { 1 } else { 0 };
            let pb = BigInt::from(p);
            let local = if 2 * s <= r {
                if r % 2 == 0 {
                    pb.pow(r / 2) + pb.pow(r / 2 - 1)
                } else {
                    2 * pb.pow((r - 1) / 2)
                }
            } else {
                2 * pb.pow(r - s)
            };
            lambda *= local;
        }
        let s3 = count_roots(n, &chi, |x| x * x + x + 1);
        let s4 = count_roots(n, &chi, |x| x * x + 1);
        let mut cusps = BigInt::from(0);
        for d in (1..=n).filter(|d| n % d == 0) {
            cusps += euler_phi(d.gcd(&(n / d)));
        }
        Ok(OracleSpace { n, chi, psi, lambda, s3, s4, cusps })
    }

    pub fn dim(&self, k: WeightSpec) -> Result<BigInt> {
        let kk = k.k();
        let chi_even = !self.chi.is_odd();
        if chi_even != k.is_even() {
            return Ok(BigInt::from(0));
        }
        if self.chi.is_trivial() {
            return to_dimension(self.genus_form(kk));
        }
        let g3 = match kk % 3 {
            0 => q_frac(1, 3),
            1 => q(0),
            _ => q_frac(-1, 3),
        };
        let g4 = match kk % 4 {
            0 => q_frac(1, 4),
            2 => q_frac(-1, 4),
            _ => q(0),
        };
        let v = q_frac(kk as i64 - 1, 12) * q_big(self.psi.clone())
            - q_frac(1, 2) * q_big(self.lambda.clone())
            + g3 * q(self.s3)
            + g4 * q(self.s4);
        to_dimension(v)
    }

    fn genus_form(&self, k: u32) -> Q {
        let nu2 = q(self.s4);
        let nu3 = q(self.s3);
        let c = q_big(self.cusps.clone());
        let genus = q(1) + q_big(self.psi.clone()) / q(12) - &nu2 / q(4) - &nu3 / q(3) - &c / q(2);
        if k == 2 {
            return genus;
        }
        let k = k as i64;
        q(k - 1) * (genus - q(1)) + q(k / 2 - 1) * c + nu2 * q(k / 4) + nu3 * q(k / 3)
    }
}

fn euler_phi(n: u64) -> u64 {
    let mut r = n;
    for (p, _) in factorize(n).expect("n >= 1") {
        r = r / p * (p - 1);
    }
    r
}

/// dim S_k(Gamma_0(N), omega_d), computed independently of the invariant calculus.
pub fn oracle_dim_gamma0_chi(n: u64, d: u64, k: WeightSpec) -> Result<BigInt> {
    OracleSpace::new(n, QuadraticCharacter::omega(d)?)?.dim(k)
}

/// dim S_k(Gamma_1(p)) for a prime p >= 5 and even k, from the genus of X_1(p).
pub fn oracle_dim_gamma1_prime(p: u64, k: WeightSpec) -> Result<BigInt> {
    if p < 5 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!("Gamma_1 oracle needs a prime p >= 5, got {p}")));
    }
    if !k.is_even() {
        return Err(Error::InvalidArgument("Gamma_1 oracle handles even weight only".into()));
    }
    let p = p as i64;
    let kk = k.k() as i64;
    let cusps = q(p - 1);
    let genus = q(1) + q_frac(p * p - 1, 24) - &cusps / q(2);
    let mut v = q(kk - 1) * (genus - q(1)) + q(kk / 2 - 1) * cusps;
    if kk == 2 {
        v += q(1);
    }
    to_dimension(v)
}
