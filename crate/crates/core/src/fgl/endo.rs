//! The maximal order O_D = W⟨Π⟩ with Π^n = p and Π·w = σ(w)·Π.
//!
//! T = Σ_{i<n} a_i Π^i is stored by its coefficients a_i ∈ W.

use crate::error::{Error, Result};
use crate::kmat::KMatrix;
use crate::padic::{PadicValue, RingSpec, WittElement};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndoElement {
    pub a: Vec<WittElement>,
}

impl EndoElement {
    pub fn zero(n: usize) -> Self {
        EndoElement {
            a: vec![WittElement::ZERO; n],
        }
    }

    pub fn scalar(ring: &RingSpec, w: WittElement) -> Self {
        let mut t = Self::zero(ring.degree());
        t.a[0] = w;
        t
    }

    pub fn one(ring: &RingSpec) -> Self {
        Self::scalar(ring, ring.one())
    }

    pub fn from_int(ring: &RingSpec, k: i128) -> Self {
        Self::scalar(ring, ring.from_int(k))
    }

    pub fn pi(ring: &RingSpec) -> Self {
        let n = ring.degree();
        if n == 1 {
            return Self::from_int(ring, ring.p() as i128);
        }
        let mut t = Self::zero(n);
        t.a[1] = ring.one();
        t
    }

    pub fn teichmuller(ring: &RingSpec, residue: &[u64]) -> Self {
        Self::scalar(ring, ring.teichmuller(residue))
    }

    pub fn is_unit(&self, ring: &RingSpec) -> bool {
        ring.is_unit(&self.a[0])
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|c| c.is_zero())
    }

    /// Largest v with T ∈ p^v O_D.
    pub fn valuation(&self, ring: &RingSpec) -> u32 {
        self.a.iter().map(|c| ring.valuation(c)).min().unwrap_or(0)
    }

    /// Valuation with respect to Π.
    pub fn pi_valuation(&self, ring: &RingSpec) -> u64 {
        let n = ring.degree() as u64;
        self.a
            .iter()
            .enumerate()
            .map(|(i, c)| ring.valuation(c) as u64 * n + i as u64)
            .min()
            .unwrap_or(0)
    }

    pub fn reduce(&self, ring: &RingSpec) -> Self {
        EndoElement {
            a: self.a.iter().map(|c| ring.reduce_from(c)).collect(),
        }
    }

    /// Whether T lies in the center Z_p.
    pub fn is_central(&self, ring: &RingSpec) -> bool {
        self.a[1..].iter().all(|c| c.is_zero())
            && (1..ring.degree()).all(|i| self.a[0].coord(i) == 0)
    }

    pub fn random_unit<R: rand::Rng>(ring: &RingSpec, rng: &mut R) -> Self {
        loop {
            let a: Vec<WittElement> = (0..ring.degree()).map(|_| ring.random_element(rng)).collect();
            if ring.is_unit(&a[0]) {
                return EndoElement { a };
            }
        }
    }

    /// Π-adic Teichmüller digits: T = Σ_k [w_k] Π^k.
    pub fn teichmuller_digits(&self, ring: &RingSpec, count: usize) -> Vec<WittElement> {
        let n = ring.degree();
        let per = count / n + 1;
        let digits: Vec<Vec<WittElement>> = self.a.iter().map(|c| ring.teichmuller_digits(c, per)).collect();
        (0..count).map(|k| digits[k % n][k / n]).collect()
    }
}

pub fn add(ring: &RingSpec, s: &EndoElement, t: &EndoElement) -> EndoElement {
    EndoElement {
        a: s.a.iter().zip(&t.a).map(|(x, y)| ring.add(x, y)).collect(),
    }
}

pub fn sub(ring: &RingSpec, s: &EndoElement, t: &EndoElement) -> EndoElement {
    EndoElement {
        a: s.a.iter().zip(&t.a).map(|(x, y)| ring.sub(x, y)).collect(),
    }
}

pub fn neg(ring: &RingSpec, s: &EndoElement) -> EndoElement {
    EndoElement {
        a: s.a.iter().map(|x| ring.neg(x)).collect(),
    }
}

pub fn scale_int(ring: &RingSpec, s: &EndoElement, k: i128) -> EndoElement {
    EndoElement {
        a: s.a.iter().map(|x| ring.mul_int(x, k)).collect(),
    }
}

pub fn mul_p_pow(ring: &RingSpec, s: &EndoElement, e: u32) -> EndoElement {
    EndoElement {
        a: s.a.iter().map(|x| ring.mul_p_pow(x, e)).collect(),
    }
}

pub fn mul(ring: &RingSpec, s: &EndoElement, t: &EndoElement) -> EndoElement {
    let n = ring.degree();
    let mut out = EndoElement::zero(n);
    for (i, x) in s.a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in t.a.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let mut term = ring.mul(x, &ring.frobenius_pow(y, i as i64));
            let mut k = i + j;
            if k >= n {
                term = ring.mul_p_pow(&term, 1);
                k -= n;
            }
            out.a[k] = ring.add(&out.a[k], &term);
        }
    }
    out
}

pub fn bracket(ring: &RingSpec, s: &EndoElement, t: &EndoElement) -> EndoElement {
    sub(ring, &mul(ring, s, t), &mul(ring, t, s))
}

/// Inverse of a unit by Newton iteration x ← x(2 − t x).
pub fn inverse(ring: &RingSpec, t: &EndoElement) -> Result<EndoElement> {
    if !t.is_unit(ring) {
        return Err(Error::NotUnit);
    }
    let mut x = EndoElement::scalar(ring, ring.inv(&t.a[0])?);
    let two = EndoElement::from_int(ring, 2);
    let mut good = 1u64;
    let target = ring.precision() as u64 * ring.degree() as u64;
    while good < target {
        x = mul(ring, &x, &sub(ring, &two, &mul(ring, t, &x)));
        good *= 2;
    }
    Ok(x)
}

pub fn pow(ring: &RingSpec, t: &EndoElement, e: u64) -> EndoElement {
    let mut r = EndoElement::one(ring);
    for _ in 0..e {
        r = mul(ring, &r, t);
    }
    r
}

/// The regular representation on D = ⊕ Π^j K acting by left multiplication,
/// with coordinates x = Σ_j Π^j x_j.
pub fn matrix(ring: &RingSpec, t: &EndoElement) -> KMatrix {
    let n = ring.degree();
    let mut m = KMatrix::zeros(ring, n, n);
    for j in 0..n {
        for (i, a) in t.a.iter().enumerate() {
            let s = i + j;
            let mut v = ring.k_from_witt(&ring.frobenius_pow(a, -(s as i64)));
            if s >= n {
                v = ring.k_shift(&v, 1);
            }
            m.set(s % n, j, v);
        }
    }
    m
}

/// det(matrix(T)), computed exactly over W by cofactor expansion.
pub fn reduced_norm(ring: &RingSpec, t: &EndoElement) -> PadicValue {
    let n = ring.degree();
    let mut entries = vec![vec![WittElement::ZERO; n]; n];
    for j in 0..n {
        for (i, a) in t.a.iter().enumerate() {
            let s = i + j;
            let mut v = ring.frobenius_pow(a, -(s as i64));
            if s >= n {
                v = ring.mul_p_pow(&v, 1);
            }
            entries[s % n][j] = v;
        }
    }
    ring.k_from_witt(&det_w(ring, &entries))
}

fn det_w(ring: &RingSpec, m: &[Vec<WittElement>]) -> WittElement {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = WittElement::ZERO;
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<WittElement>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, x)| *x)
                    .collect()
            })
            .collect();
        let term = ring.mul(&m[0][c], &det_w(ring, &minor));
        total = if c % 2 == 0 {
            ring.add(&total, &term)
        } else {
            ring.sub(&total, &term)
        };
    }
    total
}

fn factorial_valuation(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = p;
    while q <= k {
        v += k / q;
        q *= p;
    }
    v
}

/// exp(γ) = Σ γ^k / k! for γ ∈ pO_D (p odd) or 4O_D (p = 2).
pub fn exp_d(ring: &RingSpec, gamma: &EndoElement) -> Result<EndoElement> {
    let p = ring.p();
    let v = gamma.valuation(ring) as u64;
    let need = if p == 2 { 2 } else { 1 };
    if gamma.is_zero() {
        return Ok(EndoElement::one(ring));
    }
    if v < need {
        return Err(Error::ExpConvergence(v as i64));
    }
    let prec = ring.precision() as u64;
    let mut terms = 1u64;
    while terms * v - factorial_valuation(terms, p) < prec {
        terms += 1;
    }
    let loss = factorial_valuation(terms, p);
    let work = ring.with_precision(ring.precision() + loss as u32)?;
    let g = gamma.reduce(&work);
    let mut sum = EndoElement::one(&work);
    let mut power = EndoElement::one(&work);
    let mut unit_fact = work.one();
    for k in 1..=terms {
        power = mul(&work, &power, &g);
        let mut kk = k;
        while kk % p == 0 {
            kk /= p;
        }
        unit_fact = work.mul_int(&unit_fact, kk as i128);
        let inv = work.inv(&unit_fact)?;
        let e = factorial_valuation(k, p) as u32;
        let term = EndoElement {
            a: power
                .a
                .iter()
                .map(|c| work.mul(&work.div_p_pow(c, e), &inv))
                .collect(),
        };
        sum = add(&work, &sum, &term);
    }
    Ok(sum.reduce(ring))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_ring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pi_relations() {
        let ring = make_ring(3, 3, 8).unwrap();
        let pi = EndoElement::pi(&ring);
        let p3 = pow(&ring, &pi, 3);
        assert_eq!(p3, EndoElement::from_int(&ring, 3));
        let w = EndoElement::scalar(&ring, ring.omega());
        let lhs = mul(&ring, &pi, &w);
        let rhs = mul(&ring, &EndoElement::scalar(&ring, ring.frobenius(&ring.omega())), &pi);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn matrix_of_pi() {
        let ring = make_ring(5, 2, 8).unwrap();
        let m = matrix(&ring, &EndoElement::pi(&ring));
        let k = |x: i128| ring.k_from_int(x);
        assert!(m.get(0, 0).is_zero());
        assert!(ring.k_sub(&m.get(0, 1), &k(5)).is_zero());
        assert!(ring.k_sub(&m.get(1, 0), &k(1)).is_zero());
        assert!(m.get(1, 1).is_zero());
        let det = reduced_norm(&ring, &EndoElement::pi(&ring));
        assert!(ring.k_sub(&det, &k(-5)).is_zero());
        assert_eq!(det.valuation(), 1);
        let central = matrix(&ring, &EndoElement::from_int(&ring, 5));
        let expect = KMatrix::identity(&ring, 2).scale(&ring, &k(5));
        let d = central.sub(&ring, &expect);
        assert!((0..4).all(|i| d.get(i / 2, i % 2).is_zero()));
    }

    #[test]
    fn norm_of_teichmuller_unit() {
        let ring = make_ring(3, 2, 8).unwrap();
        let t = ring.teichmuller(&[1, 1]);
        let nrd = reduced_norm(&ring, &EndoElement::scalar(&ring, t));
        let galois = ring.mul(&t, &ring.frobenius(&t));
        assert_eq!(ring.k_sub(&nrd, &ring.k_from_witt(&galois)).is_zero(), true);
        let tp = ring.pow(&t, 4);
        assert!(ring.k_sub(&nrd, &ring.k_from_witt(&tp)).is_zero());
        assert!(ring.k_is_rational(&nrd));
    }

    #[test]
    fn matrix_multiplicative_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, n) in &[(3u64, 2usize), (2, 3), (5, 2)] {
            let ring = make_ring(p, n, 10).unwrap();
            for _ in 0..10 {
                let s = EndoElement::random_unit(&ring, &mut rng);
                let t = EndoElement {
                    a: (0..n).map(|_| ring.random_element(&mut rng)).collect(),
                };
                let st = mul(&ring, &s, &t);
                let lhs = matrix(&ring, &st);
                let rhs = matrix(&ring, &s).mul(&ring, &matrix(&ring, &t));
                let d = lhs.sub(&ring, &rhs);
                for i in 0..n {
                    for j in 0..n {
                        assert!(d.get(i, j).valuation() >= 9);
                    }
                }
                let nrd = reduced_norm(&ring, &s);
                assert!(ring.k_is_rational(&nrd));
                let det = matrix(&ring, &s).det(&ring);
                assert!(ring.k_sub(&nrd, &det).valuation() >= 9);
            }
        }
    }

    #[test]
    fn inverse_of_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ring = make_ring(3, 2, 10).unwrap();
        let t = EndoElement::random_unit(&ring, &mut rng);
        let ti = inverse(&ring, &t).unwrap();
        assert_eq!(mul(&ring, &t, &ti), EndoElement::one(&ring));
        assert_eq!(mul(&ring, &ti, &t), EndoElement::one(&ring));
        assert!(inverse(&ring, &EndoElement::pi(&ring)).is_err());
    }

    #[test]
    fn exponential() {
        let ring = make_ring(5, 2, 10).unwrap();
        assert_eq!(exp_d(&ring, &EndoElement::zero(2)).unwrap(), EndoElement::one(&ring));
        // exp(5) in Z_5: Σ 5^{k−v(k!)} / (k!/5^{v(k!)}) over integers.
        let e = exp_d(&ring, &EndoElement::from_int(&ring, 5)).unwrap();
        let z5 = make_ring(5, 1, 10).unwrap();
        let m = 5u128.pow(10);
        let mut s: u128 = 0;
        for k in 0..40u64 {
            let v = factorial_valuation(k, 5);
            let mut unit: u128 = 1;
            for j in 1..=k {
                let mut jj = j as u128;
                while jj % 5 == 0 {
                    jj /= 5;
                }
                unit = unit * jj % m;
            }
            let shift = (k - v) as u32;
            if shift >= 10 {
                continue;
            }
            let inv = z5.inv(&z5.from_int(unit as i128)).unwrap().coord(0);
            s = (s + 5u128.pow(shift) * inv) % m;
        }
        assert_eq!(e.a[0].coord(0), s);
        let g = EndoElement::from_int(&ring, 25);
        let eg = exp_d(&ring, &g).unwrap();
        let egn = exp_d(&ring, &neg(&ring, &g)).unwrap();
        assert_eq!(mul(&ring, &eg, &egn), EndoElement::one(&ring));
        assert!(exp_d(&ring, &EndoElement::pi(&ring)).is_err());
    }

    #[test]
    fn exponential_first_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ring = make_ring(3, 2, 12).unwrap();
        let gamma = EndoElement {
            a: (0..2).map(|_| ring.random_element(&mut rng)).collect(),
        };
        for m in 1..5u32 {
            let g = mul_p_pow(&ring, &gamma, m);
            let e = exp_d(&ring, &g).unwrap();
            let lin = add(&ring, &EndoElement::one(&ring), &g);
            let d = sub(&ring, &e, &lin);
            assert!(d.valuation(&ring) >= 2 * m);
        }
    }
}
