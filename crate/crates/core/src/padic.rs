//! Arithmetic in W(F_{p^n}) modulo p^N and in its fraction field.
//!
//! Elements are coordinate vectors in the basis 1, ω, …, ω^{n-1}, where ω is
//! the Teichmüller lift of a root of the residue modulus. Since ω is
//! Teichmüller, its minimal polynomial has Z_p coefficients and Frobenius is
//! the linear map ω ↦ ω^p.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::modular::{is_prime, valuation_u128, Modulus, MAX_MODULUS_BITS};

pub const MAX_DEGREE: usize = 6;

/// Absolute precision assigned to exact constants such as `0`.
pub const EXACT: i64 = 1 << 40;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct WittElement {
    c: [u128; MAX_DEGREE],
}

impl WittElement {
    pub const ZERO: WittElement = WittElement { c: [0; MAX_DEGREE] };

    pub fn coord(&self, i: usize) -> u128 {
        self.c[i]
    }

    pub fn coords(&self, n: usize) -> &[u128] {
        &self.c[..n]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }
}

/// A p-adic number p^val · unit with `rel` digits of relative precision.
/// `rel == 0` means the value is zero to absolute precision `val`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PadicValue {
    val: i64,
    unit: WittElement,
    rel: u32,
}

impl PadicValue {
    pub fn zero_to(abs: i64) -> Self {
        PadicValue {
            val: abs,
            unit: WittElement::ZERO,
            rel: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    /// Valuation, or the absolute precision bound for a zero value.
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn relative_precision(&self) -> u32 {
        self.rel
    }

    pub fn absolute_precision(&self) -> i64 {
        self.val.saturating_add(self.rel as i64)
    }

    pub fn unit(&self) -> &WittElement {
        &self.unit
    }
}

#[derive(Debug)]
pub struct RingSpec {
    p: u64,
    n: usize,
    prec: u32,
    modulus: Modulus,
    pows: Vec<u128>,
    residue_modulus: Vec<u64>,
    min_poly: [u128; MAX_DEGREE],
    frob: [[u128; MAX_DEGREE]; MAX_DEGREE],
    teich_table: OnceLock<Vec<WittElement>>,
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W(F_{}^{}) mod {}^{}", self.p, self.n, self.p, self.prec)
    }
}

pub fn max_precision(p: u64) -> u32 {
    let mut e = 0;
    let mut v: u128 = 1;
    while let Some(w) = v.checked_mul(p as u128) {
        if w >= (1u128 << MAX_MODULUS_BITS) {
            break;
        }
        v = w;
        e += 1;
    }
    e
}

/// Largest precision whose modulus stays below 2^63, where multiplication
/// never leaves the single-word fast path.
pub fn fast_precision(p: u64) -> u32 {
    let mut e = 0;
    let mut v: u128 = 1;
    while v * (p as u128) < (1u128 << 63) {
        v *= p as u128;
        e += 1;
    }
    e
}

pub fn make_ring(p: u64, n: usize, prec: u32) -> Result<RingSpec> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::OutOfRange(format!(
            "degree {n} not in 1..={MAX_DEGREE}"
        )));
    }
    if prec == 0 || prec > max_precision(p) {
        return Err(Error::OutOfRange(format!(
            "precision {prec} not in 1..={}",
            max_precision(p)
        )));
    }
    let residue_modulus = least_irreducible(p, n);
    let mut pows = Vec::with_capacity(prec as usize + 1);
    let mut v: u128 = 1;
    for _ in 0..=prec {
        pows.push(v);
        v = v.saturating_mul(p as u128);
    }
    let modulus = Modulus::new(pows[prec as usize]);

    // ω as the limit of x^{p^{nk}} in Z/p^N[x]/(f̃).
    let mut f_lift = [0u128; MAX_DEGREE];
    for i in 0..n {
        f_lift[i] = residue_modulus[i] as u128;
    }
    let q = (p as u128).pow(n as u32);
    let x_elem = generator(&f_lift, n, &modulus);
    let mut omega = x_elem;
    for _ in 0..=prec {
        omega = poly_pow(&omega, q, &f_lift, n, &modulus);
    }
    let frob_in_a = |a: &[u128; MAX_DEGREE]| poly_pow(a, p as u128, &f_lift, n, &modulus);
    // g(X) = ∏ (X - ω^{p^i}), coefficients in A, expected constant.
    let mut g: Vec<[u128; MAX_DEGREE]> = vec![one_elem()];
    let mut root = omega;
    for _ in 0..n {
        let mut next = vec![[0u128; MAX_DEGREE]; g.len() + 1];
        for (k, coef) in g.iter().enumerate() {
            for j in 0..n {
                next[k + 1][j] = modulus.add(next[k + 1][j], coef[j]);
            }
            let prod = poly_mul(coef, &root, &f_lift, n, &modulus);
            for j in 0..n {
                next[k][j] = modulus.sub(next[k][j], prod[j]);
            }
        }
        g = next;
        root = frob_in_a(&root);
    }
    let mut min_poly = [0u128; MAX_DEGREE];
    for i in 0..n {
        if g[i][1..n].iter().any(|&c| c != 0) {
            return Err(Error::Degenerate(
                "minimal polynomial of the Teichmüller generator is not over Z_p".into(),
            ));
        }
        min_poly[i] = g[i][0];
    }
    let mut ring = RingSpec {
        p,
        n,
        prec,
        modulus,
        pows,
        residue_modulus,
        min_poly,
        frob: [[0; MAX_DEGREE]; MAX_DEGREE],
        teich_table: OnceLock::new(),
    };
    let x = WittElement {
        c: generator(&min_poly, n, &modulus),
    };
    let xp = ring.pow(&x, p as u128);
    let mut col = ring.one();
    for j in 0..n {
        for i in 0..n {
            ring.frob[i][j] = col.c[i];
        }
        col = ring.mul(&col, &xp);
    }
    Ok(ring)
}

fn one_elem() -> [u128; MAX_DEGREE] {
    let mut e = [0u128; MAX_DEGREE];
    e[0] = 1;
    e
}

/// The class of X in Z/m[X]/(X^n + Σ low_i X^i).
fn generator(low: &[u128; MAX_DEGREE], n: usize, m: &Modulus) -> [u128; MAX_DEGREE] {
    let mut e = [0u128; MAX_DEGREE];
    if n == 1 {
        e[0] = m.neg(m.reduce(low[0]));
    } else {
        e[1] = 1;
    }
    e
}

fn poly_mul(
    a: &[u128; MAX_DEGREE],
    b: &[u128; MAX_DEGREE],
    low: &[u128; MAX_DEGREE],
    n: usize,
    m: &Modulus,
) -> [u128; MAX_DEGREE] {
    let mut prod = [0u128; 2 * MAX_DEGREE];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..n {
            prod[i + j] = m.add(prod[i + j], m.mul(a[i], b[j]));
        }
    }
    for k in (n..2 * n - 1).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        for i in 0..n {
            prod[k - n + i] = m.sub(prod[k - n + i], m.mul(c, low[i]));
        }
    }
    let mut out = [0u128; MAX_DEGREE];
    out[..n].copy_from_slice(&prod[..n]);
    out
}

fn poly_pow(
    a: &[u128; MAX_DEGREE],
    mut e: u128,
    low: &[u128; MAX_DEGREE],
    n: usize,
    m: &Modulus,
) -> [u128; MAX_DEGREE] {
    let mut base = *a;
    let mut r = one_elem();
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mul(&r, &base, low, n, m);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base, low, n, m);
        }
    }
    r
}

mod fp {
    //! Dense polynomials over F_p, coefficients low to high.

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let df = f.len() - 1;
        let inv_lead = inv(f[df], p);
        while a.len() > df {
            let k = a.len() - 1;
            let c = a[k] * inv_lead % p;
            for i in 0..=df {
                let t = c * f[i] % p;
                a[k - df + i] = (a[k - df + i] + p - t) % p;
            }
            a = trim(a);
        }
        a
    }

    pub fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&prod, f, p)
    }

    pub fn powmod(a: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
        let mut base = rem(a, f, p);
        let mut r = rem(&[1], f, p);
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(&r, &base, f, p);
            }
            base = mulmod(&base, &base, f, p);
            e >>= 1;
        }
        r
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let len = a.len().max(b.len());
        let mut out = vec![0u64; len];
        for i in 0..len {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(out)
    }

    /// Rabin's test for a monic polynomial of degree n.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let n = f.len() - 1;
        let x = [0u64, 1];
        let q = |k: usize| (p as u128).pow(k as u32);
        let xq = powmod(&x, q(n), f, p);
        if xq != rem(&x, f, p) {
            return false;
        }
        for r in 2..=n {
            if n % r == 0 && (2..r).all(|d| r % d != 0) {
                let h = powmod(&x, q(n / r), f, p);
                let g = gcd(f, &sub(&h, &x, p), p);
                if g.len() != 1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Least monic irreducible polynomial of degree n over F_p, ordering
/// candidates by the integer Σ c_i p^i of their lower coefficients.
pub fn least_irreducible(p: u64, n: usize) -> Vec<u64> {
    let total = (p as u128).pow(n as u32);
    for k in 0..total {
        let mut f = vec![0u64; n + 1];
        let mut r = k;
        for c in f.iter_mut().take(n) {
            *c = (r % p as u128) as u64;
            r /= p as u128;
        }
        f[n] = 1;
        if fp::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

pub fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    fp::is_irreducible(f, p)
}

impl RingSpec {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// p^e for 0 ≤ e ≤ N.
    pub fn p_pow(&self, e: u32) -> u128 {
        self.pows[e as usize]
    }

    /// Residue field modulus, monic, coefficients low to high.
    pub fn residue_modulus(&self) -> &[u64] {
        &self.residue_modulus
    }

    /// Lower coefficients of the minimal polynomial of ω over Z_p.
    pub fn min_poly(&self) -> &[u128] {
        &self.min_poly[..self.n]
    }

    /// The same unramified ring at another precision.
    pub fn with_precision(&self, prec: u32) -> Result<RingSpec> {
        make_ring(self.p, self.n, prec)
    }

    pub fn zero(&self) -> WittElement {
        WittElement::ZERO
    }

    pub fn one(&self) -> WittElement {
        let mut e = WittElement::ZERO;
        e.c[0] = 1 % self.modulus.value();
        e
    }

    /// The Teichmüller generator ω.
    pub fn omega(&self) -> WittElement {
        WittElement {
            c: generator(&self.min_poly, self.n, &self.modulus),
        }
    }

    pub fn from_int(&self, a: i128) -> WittElement {
        let mut e = WittElement::ZERO;
        e.c[0] = self.modulus.from_i128(a);
        e
    }

    pub fn from_coords(&self, coords: &[u128]) -> WittElement {
        assert!(coords.len() <= self.n);
        let mut e = WittElement::ZERO;
        for (i, &c) in coords.iter().enumerate() {
            e.c[i] = self.modulus.reduce(c);
        }
        e
    }

    /// Coordinates reduced into this ring (from a ring of the same p, n).
    pub fn reduce_from(&self, a: &WittElement) -> WittElement {
        let mut e = *a;
        for i in 0..self.n {
            e.c[i] = self.modulus.reduce(e.c[i]);
        }
        e
    }

    /// Reduction mod p^e.
    pub fn truncate(&self, a: &WittElement, e: u32) -> WittElement {
        let e = e.min(self.prec);
        let m = self.pows[e as usize];
        let mut out = *a;
        for i in 0..self.n {
            out.c[i] %= m;
        }
        out
    }

    pub fn add(&self, a: &WittElement, b: &WittElement) -> WittElement {
        let mut e = WittElement::ZERO;
        for i in 0..self.n {
            e.c[i] = self.modulus.add(a.c[i], b.c[i]);
        }
        e
    }

    pub fn sub(&self, a: &WittElement, b: &WittElement) -> WittElement {
        let mut e = WittElement::ZERO;
        for i in 0..self.n {
            e.c[i] = self.modulus.sub(a.c[i], b.c[i]);
        }
        e
    }

    pub fn neg(&self, a: &WittElement) -> WittElement {
        let mut e = WittElement::ZERO;
        for i in 0..self.n {
            e.c[i] = self.modulus.neg(a.c[i]);
        }
        e
    }

    pub fn mul(&self, a: &WittElement, b: &WittElement) -> WittElement {
        if self.n == 1 {
            let mut e = WittElement::ZERO;
            e.c[0] = self.modulus.mul(a.c[0], b.c[0]);
            return e;
        }
        WittElement {
            c: poly_mul(&a.c, &b.c, &self.min_poly, self.n, &self.modulus),
        }
    }

    pub fn mul_int(&self, a: &WittElement, k: i128) -> WittElement {
        let k = self.modulus.from_i128(k);
        let mut e = WittElement::ZERO;
        for i in 0..self.n {
            e.c[i] = self.modulus.mul(a.c[i], k);
        }
        e
    }

    pub fn pow(&self, a: &WittElement, mut e: u128) -> WittElement {
        let mut base = *a;
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        r
    }

    /// Multiplication by p^e (zero once e ≥ N).
    pub fn mul_p_pow(&self, a: &WittElement, e: u32) -> WittElement {
        if e >= self.prec {
            return WittElement::ZERO;
        }
        let f = self.pows[e as usize];
        let mut out = WittElement::ZERO;
        for i in 0..self.n {
            out.c[i] = self.modulus.mul(a.c[i], f);
        }
        out
    }

    /// Exact division by p^e; the result is known mod p^{N-e}.
    pub fn div_p_pow(&self, a: &WittElement, e: u32) -> WittElement {
        let f = self.pows[e.min(self.prec) as usize];
        let mut out = WittElement::ZERO;
        for i in 0..self.n {
            debug_assert!(a.c[i] % f == 0);
            out.c[i] = a.c[i] / f;
        }
        out
    }

    pub fn valuation(&self, a: &WittElement) -> u32 {
        (0..self.n)
            .map(|i| valuation_u128(a.c[i], self.p, self.prec))
            .min()
            .unwrap_or(self.prec)
    }

    pub fn is_unit(&self, a: &WittElement) -> bool {
        (0..self.n).any(|i| a.c[i] % self.p as u128 != 0)
    }

    pub fn inv(&self, a: &WittElement) -> Result<WittElement> {
        if !self.is_unit(a) {
            return Err(Error::NotUnit);
        }
        let q = (self.p as u128).pow(self.n as u32);
        let mut b = self.pow(a, q - 2);
        let two = self.from_int(2);
        let mut good = 1u32;
        while good < self.prec {
            let ab = self.mul(a, &b);
            b = self.mul(&b, &self.sub(&two, &ab));
            good *= 2;
        }
        Ok(b)
    }

    pub fn frobenius(&self, a: &WittElement) -> WittElement {
        if self.n == 1 {
            return *a;
        }
        let mut out = WittElement::ZERO;
        for j in 0..self.n {
            if a.c[j] == 0 {
                continue;
            }
            for i in 0..self.n {
                out.c[i] = self
                    .modulus
                    .add(out.c[i], self.modulus.mul(self.frob[i][j], a.c[j]));
            }
        }
        out
    }

    /// σ^k for any integer k (σ has order n).
    pub fn frobenius_pow(&self, a: &WittElement, k: i64) -> WittElement {
        let k = k.rem_euclid(self.n as i64);
        let mut out = *a;
        for _ in 0..k {
            out = self.frobenius(&out);
        }
        out
    }

    /// Reduction mod p, as coordinates over F_p in the modulus basis.
    pub fn residue(&self, a: &WittElement) -> Vec<u64> {
        (0..self.n)
            .map(|i| (a.c[i] % self.p as u128) as u64)
            .collect()
    }

    pub fn residue_index(&self, a: &WittElement) -> usize {
        let mut k = 0usize;
        for i in (0..self.n).rev() {
            k = k * self.p as usize + (a.c[i] % self.p as u128) as usize;
        }
        k
    }

    fn residue_from_index(&self, mut k: usize) -> Vec<u64> {
        let mut r = vec![0u64; self.n];
        for c in r.iter_mut() {
            *c = (k % self.p as usize) as u64;
            k /= self.p as usize;
        }
        r
    }

    pub fn residue_field_size(&self) -> usize {
        (self.p as usize).pow(self.n as u32)
    }

    fn teichmuller_uncached(&self, residue: &[u64]) -> WittElement {
        let coords: Vec<u128> = residue.iter().map(|&r| (r % self.p) as u128).collect();
        let mut y = self.from_coords(&coords);
        let q = (self.p as u128).pow(self.n as u32);
        for _ in 0..self.prec {
            let next = self.pow(&y, q);
            if next == y {
                break;
            }
            y = next;
        }
        y
    }

    pub fn teichmuller(&self, residue: &[u64]) -> WittElement {
        assert_eq!(residue.len(), self.n, "residue has wrong length");
        if self.residue_field_size() <= 4096 {
            let table = self.teich_table.get_or_init(|| {
                (0..self.residue_field_size())
                    .map(|k| self.teichmuller_uncached(&self.residue_from_index(k)))
                    .collect()
            });
            let mut k = 0usize;
            for i in (0..self.n).rev() {
                k = k * self.p as usize + (residue[i] % self.p) as usize;
            }
            return table[k];
        }
        self.teichmuller_uncached(residue)
    }

    /// The Teichmüller representative of a mod p.
    pub fn teichmuller_of(&self, a: &WittElement) -> WittElement {
        self.teichmuller(&self.residue(a))
    }

    /// Digits d_k with a = Σ_{k<count} p^k [d_k], returned as Teichmüller
    /// representatives. Digit k is meaningful only for k < N.
    pub fn teichmuller_digits(&self, a: &WittElement, count: usize) -> Vec<WittElement> {
        let mut out = Vec::with_capacity(count);
        let mut cur = *a;
        for _ in 0..count.min(self.prec as usize) {
            let t = self.teichmuller_of(&cur);
            out.push(t);
            cur = self.div_p_pow(&self.sub(&cur, &t), 1);
        }
        while out.len() < count {
            out.push(WittElement::ZERO);
        }
        out
    }

    pub fn random_element<R: rand::Rng>(&self, rng: &mut R) -> WittElement {
        let mut e = WittElement::ZERO;
        for i in 0..self.n {
            e.c[i] = rng.gen_range(0..self.modulus.value());
        }
        e
    }

    // ---- fraction field ----

    pub fn k_zero(&self) -> PadicValue {
        PadicValue::zero_to(EXACT)
    }

    pub fn k_one(&self) -> PadicValue {
        self.k_from_witt(&self.one())
    }

    pub fn k_from_int(&self, a: i128) -> PadicValue {
        self.k_from_witt(&self.from_int(a))
    }

    /// p^e as an element of K, e ∈ Z.
    pub fn k_p_pow(&self, e: i64) -> PadicValue {
        PadicValue {
            val: e,
            unit: self.one(),
            rel: self.prec,
        }
    }

    /// Embeds a ∈ W, treating it as known to full precision N.
    pub fn k_from_witt(&self, a: &WittElement) -> PadicValue {
        self.k_from_witt_prec(a, self.prec as i64)
    }

    /// Embeds a ∈ W known modulo p^abs.
    pub fn k_from_witt_prec(&self, a: &WittElement, abs: i64) -> PadicValue {
        let abs = abs.min(self.prec as i64);
        if abs <= 0 {
            return PadicValue::zero_to(abs.max(0));
        }
        let a = self.truncate(a, abs as u32);
        let v = self.valuation(&a) as i64;
        if v >= abs {
            return PadicValue::zero_to(abs);
        }
        PadicValue {
            val: v,
            unit: self.div_p_pow(&a, v as u32),
            rel: (abs - v) as u32,
        }
    }

    /// The element p^val·unit of W when val ≥ 0, mod p^min(N, abs precision).
    pub fn k_to_witt(&self, x: &PadicValue) -> Option<WittElement> {
        if x.val < 0 && !x.is_zero() {
            return None;
        }
        if x.is_zero() {
            return if x.val >= 0 { Some(WittElement::ZERO) } else { None };
        }
        Some(self.mul_p_pow(&x.unit, x.val.min(self.prec as i64) as u32))
    }

    pub fn k_residue(&self, x: &PadicValue) -> Option<Vec<u64>> {
        self.k_to_witt(x).map(|w| self.residue(&w))
    }

    fn normalize(&self, val: i64, w: &WittElement, rel: u32) -> PadicValue {
        let w = self.truncate(w, rel);
        let v = self.valuation(&w).min(rel);
        if v >= rel {
            return PadicValue::zero_to(val.saturating_add(rel as i64));
        }
        PadicValue {
            val: val + v as i64,
            unit: self.div_p_pow(&w, v),
            rel: rel - v,
        }
    }

    pub fn k_add(&self, x: &PadicValue, y: &PadicValue) -> PadicValue {
        let abs = x.absolute_precision().min(y.absolute_precision());
        match (x.is_zero(), y.is_zero()) {
            (true, true) => PadicValue::zero_to(abs),
            (true, false) | (false, true) => {
                let z = if x.is_zero() { y } else { x };
                if z.val >= abs {
                    PadicValue::zero_to(abs)
                } else {
                    PadicValue {
                        val: z.val,
                        unit: self.truncate(&z.unit, (abs - z.val) as u32),
                        rel: (abs - z.val) as u32,
                    }
                }
            }
            (false, false) => {
                let v = x.val.min(y.val);
                if abs <= v {
                    return PadicValue::zero_to(abs);
                }
                let rel = (abs - v) as u32;
                let shift = |z: &PadicValue| {
                    let d = z.val - v;
                    if d >= rel as i64 {
                        WittElement::ZERO
                    } else {
                        self.mul_p_pow(&z.unit, d as u32)
                    }
                };
                let s = self.add(&shift(x), &shift(y));
                self.normalize(v, &s, rel)
            }
        }
    }

    pub fn k_neg(&self, x: &PadicValue) -> PadicValue {
        if x.is_zero() {
            return *x;
        }
        PadicValue {
            val: x.val,
            unit: self.truncate(&self.neg(&x.unit), x.rel),
            rel: x.rel,
        }
    }

    pub fn k_sub(&self, x: &PadicValue, y: &PadicValue) -> PadicValue {
        self.k_add(x, &self.k_neg(y))
    }

    pub fn k_mul(&self, x: &PadicValue, y: &PadicValue) -> PadicValue {
        if x.is_zero() || y.is_zero() {
            return PadicValue::zero_to(x.val.saturating_add(y.val).min(EXACT));
        }
        let rel = x.rel.min(y.rel);
        PadicValue {
            val: x.val.saturating_add(y.val),
            unit: self.truncate(&self.mul(&x.unit, &y.unit), rel),
            rel,
        }
    }

    pub fn k_mul_witt(&self, x: &PadicValue, a: &WittElement) -> PadicValue {
        self.k_mul(x, &self.k_from_witt(a))
    }

    pub fn k_inv(&self, x: &PadicValue) -> Result<PadicValue> {
        if x.is_zero() {
            return Err(Error::ZeroDivision);
        }
        let u = self.inv(&x.unit)?;
        Ok(PadicValue {
            val: -x.val,
            unit: self.truncate(&u, x.rel),
            rel: x.rel,
        })
    }

    pub fn k_div(&self, x: &PadicValue, y: &PadicValue) -> Result<PadicValue> {
        Ok(self.k_mul(x, &self.k_inv(y)?))
    }

    /// Multiplication by p^e, exact.
    pub fn k_shift(&self, x: &PadicValue, e: i64) -> PadicValue {
        PadicValue {
            val: x.val.saturating_add(e),
            ..*x
        }
    }

    pub fn k_pow(&self, x: &PadicValue, e: u128) -> PadicValue {
        if e == 0 {
            return self.k_one();
        }
        if x.is_zero() {
            let v = (x.val.max(0) as i128).saturating_mul(e as i128);
            return PadicValue::zero_to(v.min(EXACT as i128) as i64);
        }
        let v = (x.val as i128).saturating_mul(e.min(i64::MAX as u128) as i128);
        if v >= EXACT as i128 {
            return PadicValue::zero_to(EXACT);
        }
        PadicValue {
            val: v as i64,
            unit: self.truncate(&self.pow(&x.unit, e), x.rel),
            rel: x.rel,
        }
    }

    pub fn k_frobenius(&self, x: &PadicValue) -> PadicValue {
        if x.is_zero() {
            return *x;
        }
        PadicValue {
            val: x.val,
            unit: self.frobenius(&x.unit),
            rel: x.rel,
        }
    }

    pub fn k_frobenius_pow(&self, x: &PadicValue, k: i64) -> PadicValue {
        if x.is_zero() {
            return *x;
        }
        PadicValue {
            val: x.val,
            unit: self.frobenius_pow(&x.unit, k),
            rel: x.rel,
        }
    }

    /// Drops relative precision to at most `rel` digits.
    pub fn k_round(&self, x: &PadicValue, rel: u32) -> PadicValue {
        if x.is_zero() || x.rel <= rel {
            return *x;
        }
        PadicValue {
            val: x.val,
            unit: self.truncate(&x.unit, rel),
            rel,
        }
    }

    /// Caps the absolute precision at `abs`.
    pub fn k_with_abs(&self, x: &PadicValue, abs: i64) -> PadicValue {
        if x.is_zero() {
            return PadicValue::zero_to(x.val.min(abs));
        }
        if x.val >= abs {
            return PadicValue::zero_to(abs);
        }
        self.k_round(x, (abs - x.val) as u32)
    }

    /// Whether x is in Q_p up to its precision (higher coordinates vanish).
    pub fn k_is_rational(&self, x: &PadicValue) -> bool {
        x.is_zero() || (1..self.n).all(|i| x.unit.c[i] == 0)
    }

    /// Rational component as an integer p^val · u with u ∈ [0, p^rel).
    pub fn k_rational_parts(&self, x: &PadicValue) -> Option<(i64, u128)> {
        if x.is_zero() || !self.k_is_rational(x) {
            return None;
        }
        Some((x.val, x.unit.c[0]))
    }

    /// Human readable form.
    pub fn k_format(&self, x: &PadicValue) -> String {
        if x.is_zero() {
            return format!("O(p^{})", x.val);
        }
        let coords: Vec<String> = (0..self.n).map(|i| x.unit.c[i].to_string()).collect();
        format!(
            "p^{}*({}) + O(p^{})",
            x.val,
            coords.join(","),
            x.absolute_precision()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_irreducible_quadratics(p: u64) -> Vec<(u64, u64)> {
        // x^2 + b x + c irreducible iff it has no root in F_p.
        let mut out = vec![];
        for b in 0..p {
            for c in 0..p {
                if (0..p).all(|x| (x * x + b * x + c) % p != 0) {
                    out.push((b, c));
                }
            }
        }
        out
    }

    #[test]
    fn modulus_choices() {
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        let ring = make_ring(2, 2, 10).unwrap();
        assert_eq!(ring.residue_modulus(), &[1, 1, 1]);
        let irr = brute_irreducible_quadratics(3);
        let least = irr.iter().min_by_key(|(b, c)| b * 3 + c).unwrap();
        assert_eq!(least_irreducible(3, 2), vec![least.1, least.0, 1]);
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(least_irreducible(5, 1), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_ring(4, 1, 3).unwrap_err(), Error::NotPrime(4));
        assert!(make_ring(3, 0, 3).is_err());
        assert!(make_ring(3, 2, 0).is_err());
        assert!(make_ring(3, 2, 200).is_err());
    }

    #[test]
    fn inverse_mod_625() {
        let ring = make_ring(5, 1, 4).unwrap();
        let two = ring.from_int(2);
        assert_eq!(ring.inv(&two).unwrap().coord(0), 313);
        assert_eq!(ring.inv(&ring.one()).unwrap(), ring.one());
        assert_eq!(ring.inv(&ring.from_int(5)), Err(Error::NotUnit));
    }

    #[test]
    fn teichmuller_mod_625() {
        let ring = make_ring(5, 1, 4).unwrap();
        let t = ring.teichmuller(&[2]);
        assert_eq!(t.coord(0), 182);
        assert_eq!(ring.pow(&t, 5), t);
        assert_eq!(ring.teichmuller(&[0]), ring.zero());
        assert_eq!(ring.teichmuller(&[1]), ring.one());
    }

    #[test]
    fn omega_is_teichmuller() {
        for &(p, n, prec) in &[(2u64, 2usize, 10u32), (3, 2, 6), (5, 3, 8), (2, 4, 12)] {
            let ring = make_ring(p, n, prec).unwrap();
            let w = ring.omega();
            let q = (p as u128).pow(n as u32);
            assert_eq!(ring.pow(&w, q), w);
            let mut res = vec![0u64; n];
            res[1] = 1;
            assert_eq!(ring.teichmuller(&res), w);
        }
    }

    #[test]
    fn frobenius_on_omega_p2() {
        let ring = make_ring(2, 2, 4).unwrap();
        // ω̄^2 = ω̄ + 1 in F_4 with modulus x^2 + x + 1.
        let w = ring.omega();
        let expect = ring.teichmuller(&[1, 1]);
        assert_eq!(ring.frobenius(&w), expect);
    }

    #[test]
    fn frobenius_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(p, n) in &[(2u64, 2usize), (3, 2), (5, 2), (3, 3), (2, 3)] {
            let ring = make_ring(p, n, 9).unwrap();
            for _ in 0..10 {
                let a = ring.random_element(&mut rng);
                let b = ring.random_element(&mut rng);
                assert_eq!(ring.frobenius_pow(&a, n as i64), a);
                assert_eq!(
                    ring.frobenius(&ring.mul(&a, &b)),
                    ring.mul(&ring.frobenius(&a), &ring.frobenius(&b))
                );
                assert_eq!(
                    ring.frobenius(&ring.add(&a, &b)),
                    ring.add(&ring.frobenius(&a), &ring.frobenius(&b))
                );
                let r = ring.residue(&a);
                let t = ring.teichmuller(&r);
                assert_eq!(ring.frobenius(&t), ring.pow(&t, p as u128));
            }
            let z = ring.from_int(12345);
            assert_eq!(ring.frobenius(&z), z);
        }
    }

    #[test]
    fn teichmuller_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ring = make_ring(3, 3, 7).unwrap();
        for _ in 0..20 {
            let a = ring.random_element(&mut rng);
            let b = ring.random_element(&mut rng);
            let ta = ring.teichmuller_of(&a);
            let tb = ring.teichmuller_of(&b);
            let tab = ring.teichmuller_of(&ring.mul(&a, &b));
            assert_eq!(ring.mul(&ta, &tb), tab);
        }
    }

    #[test]
    fn digits_reassemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ring = make_ring(5, 2, 8).unwrap();
        let a = ring.random_element(&mut rng);
        let d = ring.teichmuller_digits(&a, 8);
        let mut s = ring.zero();
        for (k, t) in d.iter().enumerate() {
            s = ring.add(&s, &ring.mul_p_pow(t, k as u32));
        }
        assert_eq!(s, a);
    }

    #[test]
    fn valuation_cases() {
        let ring = make_ring(3, 2, 6).unwrap();
        assert_eq!(ring.valuation(&ring.zero()), 6);
        let u = ring.from_coords(&[2, 1]);
        assert_eq!(ring.valuation(&ring.mul_p_pow(&u, 3)), 3);
        let x = ring.k_mul(&ring.k_p_pow(2), &ring.k_from_witt(&u));
        assert_eq!(x.valuation(), 2);
    }

    #[test]
    fn field_arithmetic() {
        let ring = make_ring(5, 2, 10).unwrap();
        let third = ring.k_inv(&ring.k_from_int(3)).unwrap();
        let x = ring.k_mul(&third, &ring.k_p_pow(-2));
        let back = ring.k_mul(&x, &ring.k_from_int(75));
        assert_eq!(ring.k_sub(&back, &ring.k_one()).is_zero(), true);
        // precision: 1/p + O(p^0) style cancellation
        let a = ring.k_add(&ring.k_p_pow(-1), &ring.k_from_int(1));
        let b = ring.k_sub(&a, &ring.k_p_pow(-1));
        assert_eq!(b.valuation(), 0);
        assert!(ring.k_inv(&PadicValue::zero_to(3)).is_err());
    }
}
