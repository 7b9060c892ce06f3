//! Trace-form dimension formula and classical Gamma_0(N) dimensions.

pub mod oracle;

use crate::error::{Error, Result};
use crate::invariants::{gamma0_invariants, gamma0_new_invariants, q, q_frac, TypeInvariants, Q};
use num_bigint::BigInt;
use num_traits::Signed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightSpec(u32);

impl WeightSpec {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidWeight(k));
        }
        Ok(WeightSpec(k))
    }

    pub fn k(self) -> u32 {
        self.0
    }

    pub fn is_even(self) -> bool {
        self.0 % 2 == 0
    }
}

/// The constants epsilon_k (period 3) and mu_k (period 4) of the trace form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipticConstants {
    pub eps: [Q; 3],
    pub mu: [Q; 4],
}

impl EllipticConstants {
    /// Frozen values, reproduced by `derive::fit_elliptic_constants`.
    /// The odd-residue mu values multiply traces that vanish identically and are fixed at 0.
    pub fn standard() -> Self {
        EllipticConstants {
            eps: [q_frac(1, 3), q(0), q_frac(-1, 3)],
            mu: [q_frac(1, 4), q(0), q_frac(-1, 4), q(0)],
        }
    }

    pub fn eps(&self, k: u32) -> &Q {
        &self.eps[(k % 3) as usize]
    }

    pub fn mu(&self, k: u32) -> &Q {
        &self.mu[(k % 4) as usize]
    }
}

/// Exact value of the trace form, without integrality checks.
pub fn trace_form_with(inv: &TypeInvariants, k: WeightSpec, c: &EllipticConstants) -> Q {
    let kk = k.k();
    let mut v = q_frac(kk as i64 - 1, 12) * &inv.i1 - q_frac(1, 2) * &inv.i2
        + c.eps(kk) * &inv.i3
        + c.mu(kk) * &inv.i4;
    if kk == 2 {
        v += &inv.i5;
    }
    v
}

pub fn trace_form(inv: &TypeInvariants, k: WeightSpec) -> Q {
    trace_form_with(inv, k, &EllipticConstants::standard())
}

/// Converts an exact value to a dimension, rejecting fractions and negatives.
pub fn to_dimension(v: Q) -> Result<BigInt> {
    if !v.is_integer() {
        return Err(Error::FormulaNonIntegral(v));
    }
    if v.is_negative() {
        return Err(Error::FormulaNegative(v));
    }
    Ok(v.to_integer())
}

pub fn dim_from_invariants(inv: &TypeInvariants, k: WeightSpec) -> Result<BigInt> {
    to_dimension(trace_form(inv, k))
}

/// dim S_k(Gamma_0(N)); zero for odd k.
pub fn dim_cusp_gamma0(n: u64, k: WeightSpec) -> Result<BigInt> {
    if !k.is_even() {
        return Ok(BigInt::from(0));
    }
    dim_from_invariants(&gamma0_invariants(n)?, k)
}

/// dim S_k^new(Gamma_0(N)); zero for odd k.
pub fn dim_new_gamma0(n: u64, k: WeightSpec) -> Result<BigInt> {
    if !k.is_even() {
        return Ok(BigInt::from(0));
    }
    dim_from_invariants(&gamma0_new_invariants(n)?, k)
}
