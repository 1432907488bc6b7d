//! Endomorphisms of the Honda formal group F_0 over F_{p^n} as power series.
//!
//! F_0 is the fibre at u = 0: its logarithm is Σ_k x^{p^{nk}} / p^k. A
//! Teichmüller w acts as x ↦ w̄x and Π acts as x ↦ x^p. Composition of series
//! realizes multiplication in O_D in the same order: T_1 T_2 ↦ T_1 ∘ T_2.

use std::sync::Arc;

use super::dense::{self, Uni};
use super::endo::EndoElement;
use super::{specialize, DeformationPoint};
use crate::error::Result;
use crate::exec::Exec;
use crate::padic::{RingSpec, WittElement};

/// F_0 reduced mod p up to total degree `cap`, with the ring mod p.
pub struct Honda {
    pub residue: Arc<RingSpec>,
    pub law: dense::Bi,
    group: super::SpecializedGroup,
    pub cap: usize,
}

impl Honda {
    pub fn new(ring: &RingSpec, cap: usize, exec: Exec) -> Result<Self> {
        let residue = Arc::new(ring.with_precision(1)?);
        let group = specialize(&residue, &DeformationPoint::zero(ring.degree()), cap, exec)?;
        let law = group.law_dense();
        Ok(Honda {
            residue,
            law,
            group,
            cap,
        })
    }

    /// [a]_{F_0} mod p for a ∈ W, via ℓ^{-1}(a·ℓ(x)) at u = 0.
    pub fn multiply(&self, a: &WittElement, exec: Exec) -> Result<Uni> {
        let s = self.group.multiply(a, exec)?;
        Ok(s.iter().map(|c| self.residue.reduce_from(c)).collect())
    }

    /// F_0(f, g).
    pub fn sum(&self, f: &Uni, g: &Uni) -> Uni {
        dense::bi_apply(&self.residue, &self.law, f, g, self.cap)
    }

    /// f(x^{p^i}).
    pub fn frobenius_twist(&self, f: &Uni, i: usize) -> Uni {
        let q = (self.residue.p() as usize).pow(i as u32);
        let mut out = dense::uni_zero(self.cap);
        for (d, c) in f.iter().enumerate() {
            if d * q <= self.cap {
                out[d * q] = *c;
            }
        }
        out
    }

    /// T(x) as the F_0-sum of [a_i]_{F_0}(x^{p^i}).
    pub fn endo_series(&self, t: &EndoElement, exec: Exec) -> Result<Uni> {
        let mut acc = dense::uni_zero(self.cap);
        for (i, a) in t.a.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ai = self.multiply(a, exec)?;
            let term = self.frobenius_twist(&ai, i);
            acc = self.sum(&acc, &term);
        }
        Ok(acc)
    }

    /// T(x) as the F_0-sum of w̄_k x^{p^k} over the Π-adic Teichmüller digits.
    pub fn endo_series_digits(&self, ring: &RingSpec, t: &EndoElement) -> Uni {
        let mut count = 0;
        while (ring.p() as usize).pow(count as u32) <= self.cap {
            count += 1;
        }
        let digits = t.teichmuller_digits(ring, count);
        let mut acc = dense::uni_zero(self.cap);
        for (k, w) in digits.iter().enumerate() {
            let r = self.residue.reduce_from(w);
            if r.is_zero() {
                continue;
            }
            let mut term = dense::uni_zero(self.cap);
            term[(ring.p() as usize).pow(k as u32)] = r;
            acc = self.sum(&acc, &term);
        }
        acc
    }

    pub fn compose(&self, f: &Uni, g: &Uni) -> Uni {
        dense::uni_compose(&self.residue, f, g, self.cap)
    }
}
