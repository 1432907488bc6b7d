//! Dense truncated series over W mod p^N in one or two variables.
//!
//! Univariate series are coefficient vectors indexed by degree. Bivariate
//! series are lists of homogeneous parts: part d holds the coefficients of
//! x^i y^{d−i} for i = 0..=d, matching the layout of the group-law solver.

use crate::padic::{RingSpec, WittElement};

pub type Uni = Vec<WittElement>;
pub type Bi = Vec<Vec<WittElement>>;

pub fn uni_zero(cap: usize) -> Uni {
    vec![WittElement::ZERO; cap + 1]
}

pub fn uni_x(ring: &RingSpec, cap: usize) -> Uni {
    let mut v = uni_zero(cap);
    if cap >= 1 {
        v[1] = ring.one();
    }
    v
}

pub fn uni_mul(ring: &RingSpec, a: &Uni, b: &Uni, cap: usize) -> Uni {
    let mut out = uni_zero(cap);
    for (i, x) in a.iter().enumerate().take(cap + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(cap + 1 - i) {
            if !y.is_zero() {
                out[i + j] = ring.add(&out[i + j], &ring.mul(x, y));
            }
        }
    }
    out
}

/// f(g) for g without constant term.
pub fn uni_compose(ring: &RingSpec, f: &Uni, g: &Uni, cap: usize) -> Uni {
    assert!(g.first().map_or(true, |c| c.is_zero()));
    let mut out = uni_zero(cap);
    let mut gp = uni_zero(cap);
    gp[0] = ring.one();
    for (k, c) in f.iter().enumerate().take(cap + 1) {
        if !c.is_zero() {
            for d in 0..=cap {
                out[d] = ring.add(&out[d], &ring.mul(c, &gp[d]));
            }
        }
        if k < cap {
            gp = uni_mul(ring, &gp, g, cap);
        }
    }
    out
}

/// F(A(x), B(x)) for a bivariate F and univariate A, B without constant term.
pub fn bi_apply(ring: &RingSpec, f: &Bi, a: &Uni, b: &Uni, cap: usize) -> Uni {
    let fcap = f.len().saturating_sub(1);
    let mut b_pows: Vec<Uni> = Vec::with_capacity(fcap + 1);
    let mut cur = uni_zero(cap);
    cur[0] = ring.one();
    for _ in 0..=fcap {
        b_pows.push(cur.clone());
        cur = uni_mul(ring, &cur, b, cap);
    }
    let mut out = uni_zero(cap);
    let mut a_pow = uni_zero(cap);
    a_pow[0] = ring.one();
    for i in 0..=fcap {
        let mut inner = uni_zero(cap);
        for j in 0..=(fcap - i) {
            let c = &f[i + j][i];
            if c.is_zero() {
                continue;
            }
            for d in 0..=cap {
                inner[d] = ring.add(&inner[d], &ring.mul(c, &b_pows[j][d]));
            }
        }
        let term = uni_mul(ring, &a_pow, &inner, cap);
        for d in 0..=cap {
            out[d] = ring.add(&out[d], &term[d]);
        }
        a_pow = uni_mul(ring, &a_pow, a, cap);
    }
    out
}

pub fn bi_zero(cap: usize) -> Bi {
    (0..=cap).map(|d| vec![WittElement::ZERO; d + 1]).collect()
}

pub fn bi_mul(ring: &RingSpec, a: &Bi, b: &Bi, cap: usize) -> Bi {
    let mut out = bi_zero(cap);
    for (da, pa) in a.iter().enumerate().take(cap + 1) {
        for (db, pb) in b.iter().enumerate().take(cap + 1 - da) {
            for (i, x) in pa.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in pb.iter().enumerate() {
                    if !y.is_zero() {
                        let t = &mut out[da + db][i + j];
                        *t = ring.add(t, &ring.mul(x, y));
                    }
                }
            }
        }
    }
    out
}

/// φ(F(x, y)) for univariate φ and bivariate F without constant term.
pub fn uni_of_bi(ring: &RingSpec, phi: &Uni, f: &Bi, cap: usize) -> Bi {
    let mut out = bi_zero(cap);
    let mut fp = bi_zero(cap);
    fp[0][0] = ring.one();
    for (k, c) in phi.iter().enumerate().take(cap + 1) {
        if !c.is_zero() {
            for d in 0..=cap {
                for i in 0..=d {
                    let t = &mut out[d][i];
                    *t = ring.add(t, &ring.mul(c, &fp[d][i]));
                }
            }
        }
        if k < cap {
            fp = bi_mul(ring, &fp, f, cap);
        }
    }
    out
}

/// F(φ(x), φ(y)) for bivariate F and univariate φ without constant term.
pub fn bi_of_uni(ring: &RingSpec, f: &Bi, phi: &Uni, cap: usize) -> Bi {
    let fcap = f.len().saturating_sub(1);
    let mut pows: Vec<Uni> = Vec::with_capacity(fcap + 1);
    let mut cur = uni_zero(cap);
    cur[0] = ring.one();
    for _ in 0..=fcap {
        pows.push(cur.clone());
        cur = uni_mul(ring, &cur, phi, cap);
    }
    let mut out = bi_zero(cap);
    for (d, part) in f.iter().enumerate() {
        for (i, c) in part.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (xi, yj) = (&pows[i], &pows[d - i]);
            for (s, u) in xi.iter().enumerate() {
                if u.is_zero() {
                    continue;
                }
                let cu = ring.mul(c, u);
                for (t, v) in yj.iter().enumerate().take(cap + 1 - s.min(cap + 1)) {
                    if s + t > cap || v.is_zero() {
                        continue;
                    }
                    let slot = &mut out[s + t][s];
                    *slot = ring.add(slot, &ring.mul(&cu, v));
                }
            }
        }
    }
    out
}

/// Smallest valuation of a coefficient of a − b, capped at the ring precision.
pub fn bi_distance(ring: &RingSpec, a: &Bi, b: &Bi) -> u32 {
    let mut v = ring.precision();
    for (pa, pb) in a.iter().zip(b) {
        for (x, y) in pa.iter().zip(pb) {
            v = v.min(ring.valuation(&ring.sub(x, y)));
        }
    }
    v
}

pub fn uni_distance(ring: &RingSpec, a: &Uni, b: &Uni) -> u32 {
    let mut v = ring.precision();
    for (x, y) in a.iter().zip(b) {
        v = v.min(ring.valuation(&ring.sub(x, y)));
    }
    v
}
