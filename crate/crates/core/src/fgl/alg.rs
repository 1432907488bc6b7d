//! Coefficient rings for the group-law solver.

use std::sync::Arc;

use super::engine::CoeffAlg;
use crate::modular::valuation_u128;
use crate::padic::{RingSpec, WittElement};

/// Polynomials in `vars` variables of total degree ≤ `du` over Z/p^prec,
/// stored densely. Products accumulate lazily in `u128`.
#[derive(Debug)]
pub struct UPolyAlg {
    p: u64,
    prec: u32,
    m: u64,
    vars: usize,
    du: u32,
    monos: Vec<Vec<u32>>,
    table: Vec<(u16, u16, u16)>,
    flush_every: u32,
}

impl UPolyAlg {
    pub fn new(p: u64, prec: u32, vars: usize, du: u32) -> Option<Self> {
        let m = (p as u128).checked_pow(prec)?;
        if m >= 1u128 << 63 {
            return None;
        }
        let mut monos = vec![];
        enumerate(vars, du, &mut vec![], &mut monos);
        monos.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
        let index = |e: &[u32]| monos.iter().position(|x| x == e);
        let mut table = vec![];
        let mut per_target = vec![0u32; monos.len()];
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if s.iter().sum::<u32>() <= du {
                    let k = index(&s).unwrap();
                    per_target[k] += 1;
                    table.push((i as u16, j as u16, k as u16));
                }
            }
        }
        let worst = *per_target.iter().max().unwrap_or(&1) as u128;
        let sq = ((m - 1) as u128) * ((m - 1) as u128);
        let block = sq.checked_mul(worst)?.checked_add(m)?;
        let flush_every = ((u128::MAX - m) / block).min(u32::MAX as u128) as u32;
        if flush_every == 0 {
            return None;
        }
        Some(UPolyAlg {
            p,
            prec,
            m: m as u64,
            vars,
            du,
            monos,
            table,
            flush_every,
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn u_cap(&self) -> u32 {
        self.du
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monos
    }

    pub fn monomial_index(&self, e: &[u32]) -> Option<usize> {
        self.monos.iter().position(|x| x == e)
    }

    /// The monomial u^e, or zero when it exceeds the cap.
    pub fn monomial(&self, e: &[u32]) -> Vec<u64> {
        let mut v = vec![0u64; self.monos.len()];
        if let Some(i) = self.monomial_index(e) {
            v[i] = 1;
        }
        v
    }

    pub fn from_int(&self, a: i128) -> Vec<u64> {
        let mut v = vec![0u64; self.monos.len()];
        v[0] = a.rem_euclid(self.m as i128) as u64;
        v
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }
}

fn enumerate(vars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() == vars {
        out.push(cur.clone());
        return;
    }
    for e in 0..=left {
        cur.push(e);
        enumerate(vars, left - e, cur, out);
        cur.pop();
    }
}

impl CoeffAlg for UPolyAlg {
    type E = Vec<u64>;
    type Acc = (Vec<u128>, u32);

    fn p(&self) -> u64 {
        self.p
    }

    fn prec(&self) -> u32 {
        self.prec
    }

    fn zero(&self) -> Vec<u64> {
        vec![0; self.monos.len()]
    }

    fn one(&self) -> Vec<u64> {
        self.from_int(1)
    }

    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.m {
                    s - self.m
                } else {
                    s
                }
            })
            .collect()
    }

    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| if x >= y { x - y } else { x + self.m - y })
            .collect()
    }

    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut acc = self.acc_new();
        self.acc_add_mul(&mut acc, a, b);
        self.acc_finish(acc)
    }

    fn mul_p_pow(&self, a: &Vec<u64>, e: u32) -> Vec<u64> {
        if e >= self.prec {
            return self.zero();
        }
        let f = (self.p as u128).pow(e);
        a.iter()
            .map(|&x| ((x as u128 * f) % self.m as u128) as u64)
            .collect()
    }

    fn div_p_pow(&self, a: &Vec<u64>, e: u32) -> Vec<u64> {
        let f = self.p.pow(e);
        a.iter().map(|&x| x / f).collect()
    }

    fn valuation(&self, a: &Vec<u64>) -> u32 {
        a.iter()
            .map(|&x| valuation_u128(x as u128, self.p, self.prec))
            .min()
            .unwrap_or(self.prec)
    }

    fn truncate(&self, a: &Vec<u64>, e: u32) -> Vec<u64> {
        let f = self.p.pow(e.min(self.prec));
        a.iter().map(|&x| x % f).collect()
    }

    fn acc_new(&self) -> (Vec<u128>, u32) {
        (vec![0u128; self.monos.len()], 0)
    }

    #[inline]
    fn acc_add_mul(&self, acc: &mut (Vec<u128>, u32), a: &Vec<u64>, b: &Vec<u64>) {
        let slots = &mut acc.0;
        if self.monos.len() == 1 {
            slots[0] += a[0] as u128 * b[0] as u128;
        } else {
            for &(i, j, k) in &self.table {
                let x = a[i as usize];
                if x != 0 {
                    slots[k as usize] += x as u128 * b[j as usize] as u128;
                }
            }
        }
        acc.1 += 1;
        if acc.1 >= self.flush_every {
            for s in slots.iter_mut() {
                *s %= self.m as u128;
            }
            acc.1 = 0;
        }
    }

    fn acc_finish(&self, acc: (Vec<u128>, u32)) -> Vec<u64> {
        acc.0
            .into_iter()
            .map(|s| (s % self.m as u128) as u64)
            .collect()
    }
}

/// W(F_{p^n}) modulo p^prec.
#[derive(Debug, Clone)]
pub struct WAlg {
    pub ring: Arc<RingSpec>,
}

impl CoeffAlg for WAlg {
    type E = WittElement;
    type Acc = WittElement;

    fn p(&self) -> u64 {
        self.ring.p()
    }

    fn prec(&self) -> u32 {
        self.ring.precision()
    }

    fn zero(&self) -> WittElement {
        WittElement::ZERO
    }

    fn one(&self) -> WittElement {
        self.ring.one()
    }

    fn is_zero(&self, a: &WittElement) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &WittElement, b: &WittElement) -> WittElement {
        self.ring.add(a, b)
    }

    fn sub(&self, a: &WittElement, b: &WittElement) -> WittElement {
        self.ring.sub(a, b)
    }

    fn mul(&self, a: &WittElement, b: &WittElement) -> WittElement {
        self.ring.mul(a, b)
    }

    fn mul_p_pow(&self, a: &WittElement, e: u32) -> WittElement {
        self.ring.mul_p_pow(a, e)
    }

    fn div_p_pow(&self, a: &WittElement, e: u32) -> WittElement {
        self.ring.div_p_pow(a, e)
    }

    fn valuation(&self, a: &WittElement) -> u32 {
        self.ring.valuation(a)
    }

    fn truncate(&self, a: &WittElement, e: u32) -> WittElement {
        self.ring.truncate(a, e)
    }

    fn acc_new(&self) -> WittElement {
        WittElement::ZERO
    }

    fn acc_add_mul(&self, acc: &mut WittElement, a: &WittElement, b: &WittElement) {
        *acc = self.ring.add(acc, &self.ring.mul(a, b));
    }

    fn acc_finish(&self, acc: WittElement) -> WittElement {
        acc
    }
}
