//! Suspension degrees of K(n)-local spectra.
//!
//! Degrees live in the profinite group lim_N Z/2p^N(p^n−1). An element is
//! stored as its residues at levels 1..=N_max.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::is_prime;

pub const DEFAULT_LEVELS: u32 = 12;

/// How many consecutive equal terms count as stabilized.
const WINDOW: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelResidue {
    pub level: u32,
    #[serde(serialize_with = "as_decimal")]
    pub modulus: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub value: BigUint,
    /// First index k from which the defining sequence is constant mod this level.
    pub stabilized_at: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuspensionDegree {
    pub p: u64,
    pub n: u32,
    pub residues: Vec<LevelResidue>,
}

fn as_decimal<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_str_radix(10))
}

fn check(p: u64, n: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::OutOfRange("height must be at least 1".into()));
    }
    Ok(())
}

/// 2p^N(p^n−1).
pub fn level_modulus(p: u64, n: u32, level: u32) -> BigUint {
    let p = BigUint::from(p);
    BigUint::from(2u32) * p.pow(level) * (p.pow(n) - 1u32)
}

/// The k-th term 2p^{nk}(p^n−1)/(p−1) + n² − n, exactly.
pub fn alpha_term(p: u64, n: u32, k: u32) -> BigUint {
    let pb = BigUint::from(p);
    let geometric = (pb.pow(n) - 1u32) / (pb - 1u32);
    BigUint::from(2u32) * BigUint::from(p).pow(n * k) * geometric + BigUint::from(n * n - n)
}

impl SuspensionDegree {
    pub fn levels(&self) -> u32 {
        self.residues.len() as u32
    }

    pub fn residue(&self, level: u32) -> Option<&LevelResidue> {
        self.residues.get(level.checked_sub(1)? as usize)
    }

    /// r_N ≡ r_M mod 2p^M(p^n−1) for all M ≤ N.
    pub fn is_compatible(&self) -> bool {
        self.residues.iter().enumerate().all(|(i, hi)| {
            self.residues[..i]
                .iter()
                .all(|lo| (&hi.value % &lo.modulus) == lo.value)
        })
    }

    /// Whether an integer represents this element at every level it determines.
    pub fn agrees_with(&self, x: &BigUint) -> Vec<(u32, bool)> {
        self.residues
            .iter()
            .map(|r| (r.level, (x % &r.modulus) == r.value))
            .collect()
    }
}

/// α as residues at levels 1..=levels, each found by running the defining
/// sequence until it is constant for several steps.
pub fn alpha(p: u64, n: u32, levels: u32) -> Result<SuspensionDegree> {
    check(p, n)?;
    if levels == 0 {
        return Err(Error::OutOfRange("need at least one level".into()));
    }
    let mut residues = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let modulus = level_modulus(p, n, level);
        let limit = level + 8 * WINDOW;
        let mut start = 0;
        let mut prev = alpha_term(p, n, 0) % &modulus;
        let mut found = None;
        for k in 1..=limit {
            let cur = alpha_term(p, n, k) % &modulus;
            if cur != prev {
                start = k;
                prev = cur;
            } else if k - start + 1 >= WINDOW {
                found = Some(LevelResidue {
                    level,
                    modulus: modulus.clone(),
                    value: prev.clone(),
                    stabilized_at: start,
                });
                break;
            }
        }
        match found {
            Some(r) => residues.push(r),
            None => {
                return Err(Error::Degenerate(format!(
                    "alpha sequence does not stabilize at level {level} within {limit} terms"
                )))
            }
        }
    }
    Ok(SuspensionDegree { p, n, residues })
}

/// 2p^{nM}(p^n−1)/(p−1) + n² − n.
pub fn dualizing_degree(p: u64, n: u32, m: u32) -> Result<BigUint> {
    check(p, n)?;
    Ok(alpha_term(p, n, m))
}

/// Levels N at which the dualizing degree for M must match α: those with
/// 2p^N(p^n−1) dividing 2p^{nM}(p^n−1), i.e. N ≤ nM.
pub fn consistent_levels(n: u32, m: u32, levels: u32) -> std::ops::RangeInclusive<u32> {
    1..=(n * m).min(levels)
}

/// Level residues of the dualizing degree that disagree with α.
pub fn dualizing_mismatches(alpha: &SuspensionDegree, m: u32) -> Result<Vec<u32>> {
    let d = dualizing_degree(alpha.p, alpha.n, m)?;
    let mut bad = vec![];
    for level in consistent_levels(alpha.n, m, alpha.levels()) {
        let r = alpha.residue(level).expect("level in range");
        if (&d % &r.modulus) != r.value {
            bad.push(level);
        }
    }
    Ok(bad)
}

/// Gradings on the Morava module of the sphere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Grading {
    pub n: u32,
    pub u: i64,
    pub u_i: i64,
    /// Suspensions −n² and −n² − n relating the dualizing objects.
    pub shifts: [i64; 2],
}

impl Grading {
    pub fn degree_of_u_power(&self, k: i64) -> i64 {
        self.u * k
    }

    /// Degree of u^k · Π u_i^{e_i}.
    pub fn degree(&self, k: i64, exps: &[u32]) -> i64 {
        self.degree_of_u_power(k) + exps.iter().map(|&e| self.u_i * e as i64).sum::<i64>()
    }
}

pub fn sphere_grading(n: u32) -> Result<Grading> {
    if n == 0 {
        return Err(Error::OutOfRange("height must be at least 1".into()));
    }
    let sq = (n * n) as i64;
    Ok(Grading {
        n,
        u: -2,
        u_i: 0,
        shifts: [-sq, -sq - n as i64],
    })
}
