//! Counts of CM newforms that base-change to Eisenstein series.

use crate::arith::{factorize, is_squarefree, radical, splitting_type, QuadField, SplittingType};
use crate::error::{Error, Hypothesis, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmLocalInput {
    pub p: u64,
    pub t: u32,
    pub splitting: SplittingType,
}

/// Local count CM(p^t).
pub fn cm_local_count(input: CmLocalInput) -> BigInt {
    use SplittingType::*;
    let CmLocalInput { p, t, splitting } = input;
    let pb = BigInt::from(p);
    match (t, splitting) {
        (0, _) => BigInt::one(),
        (1, Ramified) => BigInt::one(),
        (1, _) => BigInt::zero(),
        (2, Ramified) => BigInt::one(),
        (2, Split) => pb - 2,
        (2, Inert) => pb,
        (t, _) if t % 2 == 1 => BigInt::zero(),
        (t, Split) => pb.pow(t / 2) * (p - 1) * (p - 1),
        (t, Inert) => pb.pow(t / 2) * (BigInt::from(p) * p - 1),
        // t >= 3 at a ramified prime cannot occur for a fundamental discriminant.
        (_, Ramified) => BigInt::zero(),
    }
}

fn check_coprime(field: &QuadField, n: u64) -> Result<()> {
    if n.gcd(&field.abs_disc()) != 1 {
        return Err(Error::PreconditionViolated(Hypothesis::CoprimeToDisc { n, disc: field.disc }));
    }
    Ok(())
}

/// dim of the CM_K subspace of the d-sc newspace of level Nd and character omega_d.
///
/// A CM form by K has level divisible by |D_K|, so the count vanishes unless
/// rad(D_K) divides Nd; otherwise it is the product of the local counts.
pub fn dim_cm_correction(field: &QuadField, n: u64, d: u64) -> Result<BigInt> {
    check_coprime(field, n)?;
    let nd = n.checked_mul(d).ok_or(Error::Overflow("N*d"))?;
    if nd % radical(field.abs_disc())? != 0 {
        return Ok(BigInt::zero());
    }
    let mut total = BigInt::one();
    for (p, t) in factorize(nd)? {
        let splitting = splitting_type(field, p)?;
        total *= cm_local_count(CmLocalInput { p, t, splitting });
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

/// True when some factor is p = 2 with t >= 1, where the local table is applied
/// without a separate derivation.
pub fn cm_correction_unverified(n: u64, d: u64) -> bool {
    n.checked_mul(d).is_some_and(|nd| nd % 2 == 0)
}

/// Compares the product formula with the two-case square-free display.
pub fn verify_squarefree_specialization(field: &QuadField, n: u64, d: u64) -> Result<bool> {
    if !is_squarefree(n)? {
        return Err(Error::PreconditionViolated(Hypothesis::SquarefreeLevel { n }));
    }
    let expected = if n == 1 && d % radical(field.abs_disc())? == 0 { 1 } else { 0 };
    Ok(dim_cm_correction(field, n, d)? == BigInt::from(expected))
}
