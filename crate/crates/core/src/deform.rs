//! The action of O_D^× on deformation space and isogeny lifting.
//!
//! A homomorphism F_a → F_b of p-typical groups is φ = Σ^{F_b} t_k x^{p^k}
//! with t_k ∈ W, and it satisfies ℓ_b(φ(x)) = c·ℓ_a(x) for c = t_0. Comparing
//! coefficients of x^{p^k}:
//!
//!   c·ℓ_k(a) = Σ_{j=0}^{k} ℓ_{k−j}(b) t_j^{p^{k−j}}.
//!
//! φ lifts T exactly when t_k ≡ [w_k] mod p for the Π-adic Teichmüller digits
//! w_k of T. To lift an automorphism, t_0, …, t_{n−1} are the unknowns (b_k
//! for k < n is then forced by the k-th equation) and the later t_k are
//! derived; digit m of t_j is fixed by the congruence at k = nm + j.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fgl::dense::{self, Bi, Uni};
use crate::fgl::endo::EndoElement;
use crate::fgl::{logs_at, specialize, DeformationPoint};
use crate::padic::{PadicValue, RingSpec, WittElement};

/// Extra digits carried beyond the requested precision.
const SLACK: u32 = 3;

#[derive(Clone, Copy, Debug)]
pub struct LiftOptions {
    /// Target precision k of b and φ.
    pub precision: u32,
    /// Degree cap of the witness series; 0 skips building it.
    pub witness_cap: usize,
    /// Maximum number of digit levels; defaults to 4k.
    pub budget: Option<usize>,
}

impl LiftOptions {
    pub fn new(precision: u32) -> Self {
        LiftOptions {
            precision,
            witness_cap: 0,
            budget: None,
        }
    }

    pub fn with_witness(mut self, cap: usize) -> Self {
        self.witness_cap = cap;
        self
    }

    fn levels(&self) -> Result<usize> {
        let need = self.precision as usize + 1;
        let budget = self.budget.unwrap_or(4 * self.precision as usize);
        if need > budget {
            return Err(Error::Budget(format!(
                "{need} digit levels needed, budget is {budget}"
            )));
        }
        Ok(need)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    /// Leading digit read off from T.
    Fixed,
    /// Affine map over F_p recovered from n + 1 probes.
    Affine,
    /// Exhaustive search over the residue field.
    Search,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub level: usize,
    pub slot: usize,
    pub method: SolveMethod,
    pub probes: usize,
}

#[derive(Clone, Debug)]
pub struct LiftResult {
    pub target: DeformationPoint,
    /// Linear coefficient c = φ'(0).
    pub linear: WittElement,
    /// Cartier coordinates t_k of φ.
    pub cartier: Vec<WittElement>,
    pub iso: Option<Uni>,
    /// Valuation of φ∘F_a − F_b∘(φ × φ) on random curves, if checked.
    pub homomorphism_residual: Option<u32>,
    pub precision: u32,
    pub log: Vec<StageRecord>,
}

/// The equations c·ℓ_k(a) = Σ ℓ_{k−j}(b) t_j^{p^{k−j}} over a working ring.
struct Recursion<'a> {
    ring: &'a RingSpec,
    la: Vec<PadicValue>,
    /// Teichmüller digits of T.
    w: Vec<PadicValue>,
}

struct Solution {
    b: Vec<PadicValue>,
    t: Vec<PadicValue>,
}

#[derive(Debug, PartialEq)]
enum Defect {
    Residue(Vec<u64>),
    NonIntegral,
    Imprecise,
}

impl Defect {
    fn ok(&self) -> bool {
        matches!(self, Defect::Residue(r) if r.iter().all(|&x| x == 0))
    }
}

fn pow_table(ring: &RingSpec, table: &mut Vec<PadicValue>, e: usize) -> PadicValue {
    while table.len() <= e {
        let last = *table.last().unwrap();
        table.push(ring.k_pow(&last, ring.p() as u128));
    }
    table[e]
}

impl<'a> Recursion<'a> {
    fn new(ring: &'a RingSpec, t: &EndoElement, a: &DeformationPoint, count: usize) -> Self {
        let la = logs_at(ring, &a.reduce(ring), count);
        let w = t
            .teichmuller_digits(ring, count)
            .iter()
            .map(|d| ring.k_from_witt(d))
            .collect();
        Recursion { ring, la, w }
    }

    /// Solves for b_1..b_{n−1} and t_n..t_upto given t_0..t_{n−1}.
    fn unknown_target(&self, free: &[WittElement], upto: usize) -> Result<Solution> {
        let k = self.ring;
        let n = k.degree();
        let free: Vec<PadicValue> = free.iter().map(|x| k.k_from_witt(x)).collect();
        let c = free[0];
        let mut lb = vec![k.k_one()];
        let mut b: Vec<PadicValue> = vec![];
        let mut bpow: Vec<Vec<PadicValue>> = vec![];
        let mut tpow: Vec<Vec<PadicValue>> = vec![vec![c]];
        let mut t = vec![c];
        for idx in 1..=upto {
            let ltil = self.partial_log(&lb, &mut bpow, idx, idx < n);
            let mut rest = k.k_zero();
            for j in 1..idx {
                let tp = pow_table(k, &mut tpow[j], idx - j);
                rest = k.k_add(&rest, &k.k_mul(&lb[idx - j], &tp));
            }
            let cp = pow_table(k, &mut tpow[0], idx);
            let ca = k.k_mul(&c, &self.la[idx]);
            if idx < n {
                let tk = free[idx];
                let lbk = k.k_div(&k.k_sub(&k.k_sub(&ca, &rest), &tk), &cp)?;
                let bk = k.k_shift(&k.k_sub(&lbk, &ltil), 1);
                lb.push(lbk);
                b.push(bk);
                bpow.push(vec![bk]);
                tpow.push(vec![tk]);
                t.push(tk);
            } else {
                let tk = k.k_sub(&k.k_sub(&ca, &k.k_mul(&ltil, &cp)), &rest);
                lb.push(ltil);
                tpow.push(vec![tk]);
                t.push(tk);
            }
        }
        Ok(Solution { b, t })
    }

    /// Derives every t_k from c when b is known.
    fn known_target(&self, lb: &[PadicValue], c: &WittElement, upto: usize) -> Solution {
        let k = self.ring;
        let c = k.k_from_witt(c);
        let mut tpow: Vec<Vec<PadicValue>> = vec![vec![c]];
        let mut t = vec![c];
        for idx in 1..=upto {
            let mut s = k.k_mul(&c, &self.la[idx]);
            for j in 0..idx {
                let tp = pow_table(k, &mut tpow[j], idx - j);
                s = k.k_sub(&s, &k.k_mul(&lb[idx - j], &tp));
            }
            tpow.push(vec![s]);
            t.push(s);
        }
        Solution { b: vec![], t }
    }

    /// (1/p) Σ_i ℓ_{k−i}(b) b_i^{p^{k−i}}, leaving out b_k itself when k < n.
    fn partial_log(
        &self,
        lb: &[PadicValue],
        bpow: &mut [Vec<PadicValue>],
        idx: usize,
        skip_own: bool,
    ) -> PadicValue {
        let k = self.ring;
        let n = k.degree();
        let mut s = k.k_zero();
        for i in 1..=idx.min(n) {
            if skip_own && i == idx {
                continue;
            }
            let term = if i == n {
                lb[idx - n]
            } else {
                let bp = pow_table(k, &mut bpow[i - 1], idx - i);
                k.k_mul(&lb[idx - i], &bp)
            };
            s = k.k_add(&s, &term);
        }
        k.k_shift(&s, -1)
    }

    fn defect(&self, sol: &Solution, idx: usize) -> Defect {
        let k = self.ring;
        let r = k.k_sub(&sol.t[idx], &self.w[idx]);
        if r.is_zero() {
            return if r.valuation() >= 1 {
                Defect::Residue(vec![0; k.degree()])
            } else {
                Defect::Imprecise
            };
        }
        if r.valuation() < 0 {
            return Defect::NonIntegral;
        }
        if r.absolute_precision() < 1 {
            return Defect::Imprecise;
        }
        Defect::Residue(k.k_residue(&r).unwrap())
    }

    fn first_failure(&self, sol: &Solution, upto: usize) -> Option<usize> {
        (0..=upto).find(|&i| !self.defect(sol, i).ok())
    }
}

fn with_digit(ring: &RingSpec, base: &WittElement, level: usize, e: &[u64]) -> WittElement {
    let coords: Vec<u128> = e.iter().map(|&x| x as u128).collect();
    ring.add(base, &ring.mul_p_pow(&ring.from_coords(&coords), level as u32))
}

fn digit_of_index(p: u64, n: usize, mut idx: usize) -> Vec<u64> {
    let mut e = vec![0u64; n];
    for x in e.iter_mut() {
        *x = (idx % p as usize) as u64;
        idx /= p as usize;
    }
    e
}

/// Solves A x = y over F_p for square A; None if singular.
fn solve_mod_p(mut a: Vec<Vec<u64>>, mut y: Vec<u64>, p: u64) -> Option<Vec<u64>> {
    let n = y.len();
    let inv = |x: u64| crate::modular::Modulus::new(p as u128).pow(x as u128, p as u128 - 2) as u64;
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] % p != 0)?;
        a.swap(col, piv);
        y.swap(col, piv);
        let iv = inv(a[col][col]);
        for j in 0..n {
            a[col][j] = a[col][j] * iv % p;
        }
        y[col] = y[col] * iv % p;
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] = (a[r][j] + p * p - f * a[col][j] % p) % p;
                }
                y[r] = (y[r] + p * p - f * y[col] % p) % p;
            }
        }
    }
    Some(y)
}

/// Finds the digit e making `defect(e)` vanish: first by assuming the defect
/// is affine in e over F_p, then by search.
fn solve_digit<F>(p: u64, n: usize, mut defect: F) -> Result<(Vec<u64>, SolveMethod, usize)>
where
    F: FnMut(&[u64]) -> Result<Defect>,
{
    let zero = vec![0u64; n];
    let mut probes = 1;
    let d0 = defect(&zero)?;
    if d0.ok() {
        return Ok((zero, SolveMethod::Affine, probes));
    }
    if let Defect::Residue(r0) = &d0 {
        let mut cols = vec![];
        for i in 0..n {
            let mut e = zero.clone();
            e[i] = 1;
            probes += 1;
            match defect(&e)? {
                Defect::Residue(r) => cols.push(r),
                _ => break,
            }
        }
        if cols.len() == n {
            let a: Vec<Vec<u64>> = (0..n)
                .map(|row| (0..n).map(|c| (cols[c][row] + p - r0[row]) % p).collect())
                .collect();
            let y: Vec<u64> = r0.iter().map(|&x| (p - x) % p).collect();
            if let Some(e) = solve_mod_p(a, y, p) {
                probes += 1;
                if defect(&e)?.ok() {
                    return Ok((e, SolveMethod::Affine, probes));
                }
            }
        }
    }
    let size = (p as usize).pow(n as u32);
    for idx in 1..size {
        let e = digit_of_index(p, n, idx);
        probes += 1;
        if defect(&e)?.ok() {
            return Ok((e, SolveMethod::Search, probes));
        }
    }
    Err(Error::Degenerate("no digit closes the congruence".into()))
}

/// Lifts a unit T to an isomorphism φ: F_a → F_b, returning b = T·a.
pub fn lift_automorphism(
    ring: &RingSpec,
    t: &EndoElement,
    a: &DeformationPoint,
    opts: &LiftOptions,
) -> Result<LiftResult> {
    if !t.is_unit(ring) {
        return Err(Error::NotUnit);
    }
    let levels = opts.levels()?;
    let k = opts.precision;
    let work = ring.with_precision(k + SLACK)?;
    let n = work.degree();
    let p = work.p();
    let upto = n * levels - 1;
    let rec = Recursion::new(&work, &t.reduce(&work), a, upto + 1);
    let digits = t.teichmuller_digits(&work, n);
    let mut free: Vec<WittElement> = digits
        .iter()
        .map(|d| work.from_coords(&work.residue(d).iter().map(|&x| x as u128).collect::<Vec<_>>()))
        .collect();
    let mut log = vec![];
    for j in 0..n {
        log.push(StageRecord {
            level: 0,
            slot: j,
            method: SolveMethod::Fixed,
            probes: 0,
        });
    }
    for m in 1..levels {
        for j in 0..n {
            let idx = n * m + j;
            let base = free[j];
            let (e, method, probes) = solve_digit(p, n, |e| {
                let mut trial = free.clone();
                trial[j] = with_digit(&work, &base, m, e);
                let sol = rec.unknown_target(&trial, idx)?;
                Ok(rec.defect(&sol, idx))
            })?;
            free[j] = with_digit(&work, &base, m, &e);
            log.push(StageRecord {
                level: m,
                slot: j,
                method,
                probes,
            });
        }
    }
    let sol = rec.unknown_target(&free, upto)?;
    if let Some(i) = rec.first_failure(&sol, upto) {
        return Err(Error::Budget(format!("congruence at index {i} left open")));
    }
    let mut coords = vec![];
    for bk in &sol.b {
        let v = bk.valuation();
        if v < 1 {
            return Err(Error::OutsideDisc(v));
        }
        if bk.absolute_precision() < k as i64 {
            return Err(Error::Budget(format!(
                "target known to {} digits, {k} requested",
                bk.absolute_precision()
            )));
        }
        coords.push(ring.truncate(&ring.reduce_from(&work.k_to_witt(bk).unwrap()), k.min(ring.precision())));
    }
    let target = DeformationPoint { coords };
    let cartier = cartier_witt(&work, ring, &sol.t);
    let mut out = LiftResult {
        target,
        linear: ring.reduce_from(&free[0]),
        cartier,
        iso: None,
        homomorphism_residual: None,
        precision: k.min(ring.precision()),
        log,
    };
    if opts.witness_cap > 0 {
        let (iso, res) = witness(ring, a, &out.target, &out.cartier, out.precision, opts.witness_cap)?;
        out.iso = Some(iso);
        out.homomorphism_residual = Some(res);
    }
    Ok(out)
}

fn cartier_witt(work: &RingSpec, ring: &RingSpec, t: &[PadicValue]) -> Vec<WittElement> {
    t.iter()
        .map_while(|x| {
            if x.absolute_precision() < 1 {
                return None;
            }
            work.k_to_witt(x).map(|w| ring.reduce_from(&w))
        })
        .collect()
}

/// φ = Σ^{F_b} t_k x^{p^k} up to `cap`, and the homomorphism residual.
fn witness(
    ring: &RingSpec,
    a: &DeformationPoint,
    b: &DeformationPoint,
    t: &[WittElement],
    prec: u32,
    cap: usize,
) -> Result<(Uni, u32)> {
    let r = Arc::new(ring.with_precision(prec)?);
    let fa = specialize(&r, &a.reduce(&r), cap, Exec::Sequential)?.law_dense();
    let fb = specialize(&r, &b.reduce(&r), cap, Exec::Sequential)?.law_dense();
    let p = r.p() as usize;
    let mut phi = dense::uni_zero(cap);
    let mut q = 1usize;
    for tk in t {
        if q > cap {
            break;
        }
        let mut term = dense::uni_zero(cap);
        term[q] = r.reduce_from(tk);
        phi = dense::bi_apply(&r, &fb, &phi, &term, cap);
        q *= p;
    }
    if (q as u128) <= cap as u128 {
        return Err(Error::Budget("too few Cartier coordinates for the witness cap".into()));
    }
    let res = homomorphism_residual(&r, &fa, &fb, &phi, cap);
    Ok((phi, res))
}

/// min valuation of φ(F_a(x, y)) − F_b(φ(x), φ(y)) over y ∈ {x, random curves}.
pub fn homomorphism_residual(ring: &RingSpec, fa: &Bi, fb: &Bi, phi: &Uni, cap: usize) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut curves = vec![dense::uni_x(ring, cap)];
    for _ in 0..2 {
        let mut r = dense::uni_zero(cap);
        for c in r.iter_mut().skip(1) {
            *c = ring.random_element(&mut rng);
        }
        curves.push(r);
    }
    let x = dense::uni_x(ring, cap);
    let mut v = ring.precision();
    for y in &curves {
        let lhs = dense::uni_compose(ring, phi, &dense::bi_apply(ring, fa, &x, y, cap), cap);
        let py = dense::uni_compose(ring, phi, y, cap);
        let rhs = dense::bi_apply(ring, fb, phi, &py, cap);
        v = v.min(dense::uni_distance(ring, &lhs, &rhs));
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Liftable,
    Obstructed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsogenyReport {
    pub verdict: Verdict,
    /// Index k of the first congruence t_k ≡ [w_k] that cannot be met.
    pub obstruction: Option<usize>,
    /// Linear coefficient of the witness when liftable.
    #[serde(skip)]
    pub linear: Option<WittElement>,
    #[serde(skip)]
    pub witness: Option<Uni>,
    pub homomorphism_residual: Option<u32>,
    pub levels: usize,
}

/// Decides whether T deforms to an isogeny F_a → F_b mod p^k, solving for the
/// digits of c = φ'(0) one level at a time. At each level the digit that
/// pushes the first failing congruence furthest is kept; if two consecutive
/// levels leave a congruence fixed by earlier digits unmet, it is a genuine
/// obstruction. The coordinates of a and b are taken as exact, so they should
/// be known to at least k + 1 digits.
pub fn isogeny_check(
    ring: &RingSpec,
    t: &EndoElement,
    a: &DeformationPoint,
    b: &DeformationPoint,
    opts: &LiftOptions,
) -> Result<IsogenyReport> {
    if t.is_zero() {
        return Err(Error::Degenerate("T = 0".into()));
    }
    let k = opts.precision;
    let work = ring.with_precision(k + SLACK)?;
    let n = work.degree();
    let p = work.p();
    let need = k as usize;
    let budget = opts.budget.unwrap_or(4 * k as usize);
    let levels = need.min(budget);
    let upto = n * need - 1;
    let rec = Recursion::new(&work, &t.reduce(&work), a, upto + 1);
    let lb = logs_at(&work, &b.reduce(&work), upto + 1);
    let mut c = WittElement::ZERO;
    let mut stall = 0;
    let mut best_fail = 0;
    let size = (p as usize).pow(n as u32);
    for m in 0..levels {
        let mut best: Option<(usize, Vec<u64>)> = None;
        for idx in 0..size {
            let e = digit_of_index(p, n, idx);
            let trial = with_digit(&work, &c, m, &e);
            let sol = rec.known_target(&lb, &trial, upto);
            let fail = rec.first_failure(&sol, upto).unwrap_or(upto + 1);
            if best.as_ref().map_or(true, |(f, _)| fail > *f) {
                best = Some((fail, e));
            }
        }
        let (fail, e) = best.unwrap();
        c = with_digit(&work, &c, m, &e);
        best_fail = fail;
        if fail > upto {
            break;
        }
        if fail < n * (m + 1) {
            stall += 1;
            if stall >= 2 {
                return Ok(IsogenyReport {
                    verdict: Verdict::Obstructed,
                    obstruction: Some(fail),
                    linear: None,
                    witness: None,
                    homomorphism_residual: None,
                    levels: m + 1,
                });
            }
        } else {
            stall = 0;
        }
    }
    let sol = rec.known_target(&lb, &c, upto);
    if rec.first_failure(&sol, upto).is_some() || levels < need {
        return Ok(IsogenyReport {
            verdict: Verdict::Inconclusive,
            obstruction: None,
            linear: None,
            witness: None,
            homomorphism_residual: None,
            levels: levels.max(best_fail.min(levels)),
        });
    }
    let prec = k.min(ring.precision());
    let cartier = cartier_witt(&work, ring, &sol.t);
    let (witness, res) = if opts.witness_cap > 0 {
        let (w, r) = witness(ring, a, b, &cartier, prec, opts.witness_cap)?;
        (Some(w), Some(r))
    } else {
        (None, None)
    };
    Ok(IsogenyReport {
        verdict: Verdict::Liftable,
        obstruction: None,
        linear: Some(ring.reduce_from(&c)),
        witness,
        homomorphism_residual: res,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::endo;
    use crate::fgl::honda::Honda;
    use crate::padic::make_ring;

    fn rand_point(ring: &RingSpec, seed: u64) -> DeformationPoint {
        DeformationPoint::random(ring, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn identity_acts_trivially() {
        let ring = make_ring(3, 2, 10).unwrap();
        let a = rand_point(&ring, 1);
        let r = lift_automorphism(&ring, &EndoElement::one(&ring), &a, &LiftOptions::new(7).with_witness(9)).unwrap();
        let a7 = DeformationPoint {
            coords: a.coords.iter().map(|c| ring.truncate(c, 7)).collect(),
        };
        assert_eq!(r.target, a7);
        assert_eq!(r.linear, ring.truncate(&ring.one(), 10));
        let iso = r.iso.unwrap();
        assert_eq!(iso, dense::uni_x(&ring.with_precision(7).unwrap(), 9));
        assert_eq!(r.homomorphism_residual, Some(7));
    }

    #[test]
    fn central_units_fix_points() {
        let ring = make_ring(5, 2, 10).unwrap();
        let a = rand_point(&ring, 2);
        let t = EndoElement::from_int(&ring, 7);
        let r = lift_automorphism(&ring, &t, &a, &LiftOptions::new(6)).unwrap();
        for (x, y) in r.target.coords.iter().zip(&a.coords) {
            assert_eq!(*x, ring.truncate(y, 6));
        }
        assert_eq!(ring.truncate(&r.linear, 6), ring.truncate(&ring.from_int(7), 6));
    }

    #[test]
    fn rejects_non_units() {
        let ring = make_ring(3, 2, 10).unwrap();
        let a = DeformationPoint::zero(2);
        let p = EndoElement::from_int(&ring, 3);
        assert!(matches!(lift_automorphism(&ring, &p, &a, &LiftOptions::new(5)), Err(Error::NotUnit)));
        let mut short = LiftOptions::new(5);
        short.budget = Some(3);
        assert!(matches!(
            lift_automorphism(&ring, &EndoElement::one(&ring), &a, &short),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn teichmuller_fixes_origin() {
        let ring = make_ring(3, 2, 10).unwrap();
        let t = EndoElement::teichmuller(&ring, &[1, 1]);
        let r = lift_automorphism(&ring, &t, &DeformationPoint::zero(2), &LiftOptions::new(6).with_witness(10)).unwrap();
        assert!(r.target.coords.iter().all(|c| ring.truncate(c, 6).is_zero()));
        // On the canonical lift the Teichmüller unit acts by x ↦ [t]x.
        let iso = r.iso.unwrap();
        let r6 = ring.with_precision(6).unwrap();
        let mut expect = dense::uni_zero(10);
        expect[1] = r6.reduce_from(&t.a[0]);
        assert_eq!(iso, expect);
        assert_eq!(r.homomorphism_residual, Some(6));
    }

    #[test]
    fn action_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &(p, n) in &[(3u64, 2usize), (5, 2), (2, 3)] {
            let ring = make_ring(p, n, 10).unwrap();
            for _ in 0..3 {
                let a = DeformationPoint::random(&ring, &mut rng);
                let t1 = EndoElement::random_unit(&ring, &mut rng);
                let t2 = EndoElement::random_unit(&ring, &mut rng);
                let opts = LiftOptions::new(6);
                let b2 = lift_automorphism(&ring, &t2, &a, &opts).unwrap();
                let b12 = lift_automorphism(&ring, &t1, &b2.target, &opts).unwrap();
                let direct = lift_automorphism(&ring, &endo::mul(&ring, &t1, &t2), &a, &opts).unwrap();
                assert_eq!(b12.target, direct.target, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn witness_reduces_to_endomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ring = make_ring(3, 2, 10).unwrap();
        let honda = Honda::new(&ring, 12, Exec::Sequential).unwrap();
        for _ in 0..3 {
            let a = DeformationPoint::random(&ring, &mut rng);
            let t = EndoElement::random_unit(&ring, &mut rng);
            let r = lift_automorphism(&ring, &t, &a, &LiftOptions::new(5).with_witness(12)).unwrap();
            assert!(r.homomorphism_residual.unwrap() >= 5);
            let iso = r.iso.unwrap();
            let reduced: Uni = iso.iter().map(|c| honda.residue.reduce_from(c)).collect();
            assert_eq!(reduced, honda.endo_series(&t, Exec::Sequential).unwrap());
        }
    }

    #[test]
    fn isogeny_examples() {
        for &p in &[3u64, 5] {
            let ring = make_ring(p, 2, 10).unwrap();
            let a = rand_point(&ring, p);
            let opts = LiftOptions::new(5).with_witness(p as usize * p as usize);
            let pp = EndoElement::from_int(&ring, p as i128);
            let r = isogeny_check(&ring, &pp, &a, &a, &opts).unwrap();
            assert_eq!(r.verdict, Verdict::Liftable);
            assert!(r.homomorphism_residual.unwrap() >= 5);
            let t = EndoElement::from_int(&ring, 2);
            assert_eq!(isogeny_check(&ring, &t, &a, &a, &opts).unwrap().verdict, Verdict::Liftable);
            let z = DeformationPoint::zero(2);
            let pi = EndoElement::pi(&ring);
            let r = isogeny_check(&ring, &pi, &z, &z, &opts).unwrap();
            assert_eq!(r.verdict, Verdict::Obstructed);
            assert_eq!(r.obstruction, Some(1));
        }
    }

    #[test]
    fn isogeny_matches_lift() {
        let ring = make_ring(3, 2, 10).unwrap();
        let a = rand_point(&ring, 4);
        let t = EndoElement::random_unit(&ring, &mut ChaCha8Rng::seed_from_u64(5));
        let b = lift_automorphism(&ring, &t, &a, &LiftOptions::new(8)).unwrap().target;
        let r = isogeny_check(&ring, &t, &a, &b, &LiftOptions::new(5)).unwrap();
        assert_eq!(r.verdict, Verdict::Liftable);
        let other = DeformationPoint {
            coords: vec![ring.add(&b.coords[0], &ring.from_int(9))],
        };
        let r = isogeny_check(&ring, &t, &a, &other, &LiftOptions::new(5)).unwrap();
        assert_eq!(r.verdict, Verdict::Obstructed);
    }

    #[test]
    fn torus_acts_diagonally() {
        // [ζ]·(a_1, …, a_{n−1}) = (ζ^{1−p^i} a_i)_i.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &(p, n) in &[(3u64, 2usize), (2, 3), (5, 2)] {
            let ring = make_ring(p, n, 10).unwrap();
            let z = ring.teichmuller(&[1, 1].iter().copied().chain(std::iter::repeat(0)).take(n).collect::<Vec<_>>());
            let zi = ring.inv(&z).unwrap();
            let a = DeformationPoint::random(&ring, &mut rng);
            let r = lift_automorphism(&ring, &EndoElement::scalar(&ring, z), &a, &LiftOptions::new(7)).unwrap();
            for i in 1..n {
                let f = ring.mul(&z, &ring.pow(&zi, (p as u128).pow(i as u32)));
                let expect = ring.truncate(&ring.mul(&f, &a.coords[i - 1]), 7);
                assert_eq!(r.target.coords[i - 1], expect, "p={p} n={n} i={i}");
            }
        }
    }
}
