//! Sparse truncated power series in u_1, …, u_{n-1} and x over K.
//!
//! Monomials beyond the total u-degree cap or the x-degree cap are dropped on
//! construction and counted, so callers can tell when truncation happened.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{PadicValue, RingSpec, WittElement, MAX_DEGREE};

/// Exponents of u_1, …, u_{n_u} followed by the exponent of x.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    e: [u32; MAX_DEGREE],
}

impl Monomial {
    pub fn new(u: &[u32], x: u32) -> Self {
        assert!(u.len() < MAX_DEGREE);
        let mut e = [0; MAX_DEGREE];
        e[..u.len()].copy_from_slice(u);
        e[MAX_DEGREE - 1] = x;
        Monomial { e }
    }

    pub fn x_exp(&self) -> u32 {
        self.e[MAX_DEGREE - 1]
    }

    pub fn u_exp(&self, i: usize) -> u32 {
        self.e[i]
    }

    pub fn u_degree(&self) -> u32 {
        self.e[..MAX_DEGREE - 1].iter().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut e = [0; MAX_DEGREE];
        for (i, v) in e.iter_mut().enumerate() {
            *v = self.e[i] + other.e[i];
        }
        Monomial { e }
    }
}

#[derive(Debug)]
pub struct SeriesRing {
    ring: Arc<RingSpec>,
    n_u: usize,
    du: u32,
    dx: u32,
}

impl SeriesRing {
    pub fn new(ring: Arc<RingSpec>, n_u: usize, du: u32, dx: u32) -> Arc<Self> {
        assert!(n_u < MAX_DEGREE);
        Arc::new(SeriesRing { ring, n_u, du, dx })
    }

    pub fn coefficients(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn u_vars(&self) -> usize {
        self.n_u
    }

    pub fn u_cap(&self) -> u32 {
        self.du
    }

    pub fn x_cap(&self) -> u32 {
        self.dx
    }

    fn same(&self, other: &SeriesRing) -> bool {
        self.n_u == other.n_u
            && self.du == other.du
            && self.dx == other.dx
            && self.ring.p() == other.ring.p()
            && self.ring.degree() == other.ring.degree()
            && self.ring.precision() == other.ring.precision()
    }

    fn admits(&self, m: &Monomial) -> bool {
        m.u_degree() <= self.du && m.x_exp() <= self.dx
    }
}

#[derive(Clone)]
pub struct TruncatedSeries {
    ring: Arc<SeriesRing>,
    terms: BTreeMap<Monomial, PadicValue>,
    dropped: u64,
}

/// The value of a series at a point, with the valuation below which the
/// discarded monomials could still contribute.
#[derive(Clone, Copy, Debug)]
pub struct Evaluation {
    pub value: PadicValue,
    pub truncation_valuation: i64,
}

impl TruncatedSeries {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        TruncatedSeries {
            ring: ring.clone(),
            terms: BTreeMap::new(),
            dropped: 0,
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: PadicValue) -> Self {
        let mut s = Self::zero(ring);
        s.insert(Monomial::default(), c);
        s
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::constant(ring, ring.ring.k_one())
    }

    pub fn x(ring: &Arc<SeriesRing>) -> Self {
        Self::monomial(ring, Monomial::new(&[], 1), ring.ring.k_one())
    }

    pub fn u(ring: &Arc<SeriesRing>, i: usize) -> Self {
        assert!(i < ring.n_u, "u-variable index out of range");
        let mut e = vec![0; ring.n_u];
        e[i] = 1;
        Self::monomial(ring, Monomial::new(&e, 0), ring.ring.k_one())
    }

    pub fn monomial(ring: &Arc<SeriesRing>, m: Monomial, c: PadicValue) -> Self {
        let mut s = Self::zero(ring);
        s.insert(m, c);
        s
    }

    /// Builds a series in x alone from its coefficient list (index = degree).
    pub fn from_x_coeffs(ring: &Arc<SeriesRing>, coeffs: &[PadicValue]) -> Self {
        let mut s = Self::zero(ring);
        for (d, c) in coeffs.iter().enumerate() {
            s.insert(Monomial::new(&[], d as u32), *c);
        }
        s
    }

    fn insert(&mut self, m: Monomial, c: PadicValue) {
        if !self.ring.admits(&m) {
            self.dropped += 1;
            return;
        }
        let k = &self.ring.ring;
        let entry = match self.terms.remove(&m) {
            Some(old) => k.k_add(&old, &c),
            None => c,
        };
        if !entry.is_zero() {
            self.terms.insert(m, entry);
        }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &PadicValue)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials discarded by the caps while building this series.
    pub fn dropped_terms(&self) -> u64 {
        self.dropped
    }

    pub fn coeff(&self, m: &Monomial) -> Option<PadicValue> {
        self.terms.get(m).copied()
    }

    pub fn x_coeff(&self, d: u32) -> Option<PadicValue> {
        self.coeff(&Monomial::new(&[], d))
    }

    /// Lowest x-exponent among stored monomials.
    pub fn x_order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.x_exp()).min()
    }

    pub fn min_valuation(&self) -> Option<i64> {
        self.terms.values().map(|c| c.valuation()).min()
    }

    fn check(&self, other: &TruncatedSeries) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring.same(&other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(other)?;
        let mut s = self.clone();
        s.dropped += other.dropped;
        for (m, c) in &other.terms {
            s.insert(*m, *c);
        }
        Ok(s)
    }

    pub fn neg(&self) -> TruncatedSeries {
        let k = &self.ring.ring;
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            *c = k.k_neg(c);
        }
        s
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PadicValue) -> TruncatedSeries {
        let k = &self.ring.ring;
        let mut s = Self::zero(&self.ring);
        s.dropped = self.dropped;
        for (m, v) in &self.terms {
            s.insert(*m, k.k_mul(v, c));
        }
        s
    }

    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(other)?;
        let k = &self.ring.ring;
        let mut s = Self::zero(&self.ring);
        s.dropped = self.dropped + other.dropped;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                s.insert(ma.times(mb), k.k_mul(ca, cb));
            }
        }
        Ok(s)
    }

    pub fn pow(&self, e: u32) -> Result<TruncatedSeries> {
        let mut r = Self::one(&self.ring);
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    /// Substitutes x := g, where g has no x-free terms.
    pub fn compose(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(g)?;
        if g.terms.keys().any(|m| m.x_exp() == 0) {
            return Err(Error::ConstantTerm);
        }
        let max_x = self.terms.keys().map(|m| m.x_exp()).max().unwrap_or(0);
        let mut out = Self::zero(&self.ring);
        let mut gp = Self::one(&self.ring);
        for d in 0..=max_x {
            let mut part = Self::zero(&self.ring);
            for (m, c) in &self.terms {
                if m.x_exp() == d {
                    let mut mu = *m;
                    mu.e[MAX_DEGREE - 1] = 0;
                    part.insert(mu, *c);
                }
            }
            if !part.is_empty() {
                out = out.add(&part.mul(&gp)?)?;
            }
            if d < max_x {
                gp = gp.mul(g)?;
            }
        }
        Ok(out)
    }

    /// Compositional inverse in x. The linear coefficient must be a nonzero
    /// constant.
    pub fn reversion(&self) -> Result<TruncatedSeries> {
        if self.terms.keys().any(|m| m.x_exp() == 0) {
            return Err(Error::ConstantTerm);
        }
        let k = &self.ring.ring;
        let lin = Monomial::new(&[], 1);
        let c1 = match self.terms.get(&lin) {
            Some(c) => *c,
            None => return Err(Error::NotInvertible),
        };
        if self
            .terms
            .keys()
            .any(|m| m.x_exp() == 1 && m.u_degree() > 0)
        {
            return Err(Error::NotInvertible);
        }
        let c1_inv = k.k_inv(&c1).map_err(|_| Error::NotInvertible)?;
        let x = Self::x(&self.ring);
        let mut g = x.scale(&c1_inv);
        for _ in 1..self.ring.dx {
            let err = self.compose(&g)?.sub(&x)?;
            if err.is_empty() {
                break;
            }
            g = g.sub(&err.scale(&c1_inv))?;
        }
        g.dropped = 0;
        Ok(g)
    }

    /// Evaluates an x-free series at u = point. Terms past the u-degree cap
    /// are unknown, so the value is only good to the truncation valuation.
    pub fn evaluate(&self, point: &[WittElement]) -> Result<Evaluation> {
        self.evaluate_inner(point, true)
    }

    /// Evaluates an x-free series as the polynomial it is, with no truncation
    /// error.
    pub fn evaluate_polynomial(&self, point: &[WittElement]) -> Result<PadicValue> {
        self.evaluate_inner(point, false).map(|e| e.value)
    }

    fn evaluate_inner(&self, point: &[WittElement], truncated: bool) -> Result<Evaluation> {
        let k = &self.ring.ring;
        if point.len() != self.ring.n_u {
            return Err(Error::Degenerate(format!(
                "expected {} coordinates, got {}",
                self.ring.n_u,
                point.len()
            )));
        }
        if self.terms.keys().any(|m| m.x_exp() > 0) {
            return Err(Error::Degenerate("series depends on x".into()));
        }
        let mut vmin = i64::MAX;
        let coords: Vec<PadicValue> = point.iter().map(|a| k.k_from_witt(a)).collect();
        for c in &coords {
            let v = if c.is_zero() { k.precision() as i64 } else { c.valuation() };
            if v < 1 {
                return Err(Error::OutsideDisc(v));
            }
            vmin = vmin.min(v);
        }
        if coords.is_empty() {
            vmin = k.precision() as i64;
        }
        let powers: Vec<Vec<PadicValue>> = coords
            .iter()
            .map(|c| {
                let mut row = vec![k.k_one()];
                for _ in 0..self.ring.du {
                    let last = *row.last().unwrap();
                    row.push(k.k_mul(&last, c));
                }
                row
            })
            .collect();
        let mut value = k.k_zero();
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, row) in powers.iter().enumerate() {
                t = k.k_mul(&t, &row[m.u_exp(i) as usize]);
            }
            value = k.k_add(&value, &t);
        }
        let coeff_floor = self.min_valuation().unwrap_or(0).min(0);
        let bound = (self.ring.du as i64 + 1)
            .saturating_mul(vmin)
            .saturating_add(coeff_floor);
        let value = if self.ring.n_u == 0 || !truncated {
            value
        } else {
            k.k_with_abs(&value, bound)
        };
        Ok(Evaluation {
            value,
            truncation_valuation: if self.ring.n_u == 0 || !truncated { i64::MAX } else { bound },
        })
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = &self.ring.ring;
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = k.k_format(c);
                for i in 0..self.ring.n_u {
                    if m.u_exp(i) > 0 {
                        s += &format!("*u{}^{}", i + 1, m.u_exp(i));
                    }
                }
                if m.x_exp() > 0 {
                    s += &format!("*x^{}", m.x_exp());
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
