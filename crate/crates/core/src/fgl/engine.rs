//! Degree-by-degree solver for ℓ(F(x,y)) = ℓ(x) + ℓ(y) and ℓ(φ(x)) = c·ℓ(x).
//!
//! With ℓ = Σ_m L_m x^{p^m} / p^m and L_m integral, the degree-d part of the
//! unknown series is −S/p^E where
//!
//!   S = Σ_{m ≥ 1} p^{E−m} L_m [deg d] F^{p^m} − (right hand side)·p^E,
//!
//! and E is the largest m with p^m ≤ D. If F is known mod p^A then F^{p^m} is
//! known mod p^{A+m}, so working mod p^{A+E} gives every coefficient mod p^A.
//! S ≡ 0 mod p^E is exactly integrality of the new coefficient and is checked.
//!
//! The powers F^{p^m} are built online as products of earlier powers; at a
//! given degree every product only reads strictly lower degrees of its inputs,
//! so all products of one degree are independent.

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Coefficient ring of the series being solved for.
pub trait CoeffAlg: Sync {
    type E: Clone + Send + Sync + PartialEq + std::fmt::Debug;
    type Acc: Send;

    fn p(&self) -> u64;
    /// Exponent of the working modulus p^prec.
    fn prec(&self) -> u32;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul_p_pow(&self, a: &Self::E, e: u32) -> Self::E;
    fn div_p_pow(&self, a: &Self::E, e: u32) -> Self::E;
    /// Minimum p-adic valuation over all coordinates, capped at prec.
    fn valuation(&self, a: &Self::E) -> u32;
    /// Reduction modulo p^e.
    fn truncate(&self, a: &Self::E, e: u32) -> Self::E;

    fn acc_new(&self) -> Self::Acc;
    fn acc_add_mul(&self, acc: &mut Self::Acc, a: &Self::E, b: &Self::E);
    fn acc_finish(&self, acc: Self::Acc) -> Self::E;
}

#[derive(Clone, Debug)]
pub enum Target<E> {
    /// Bivariate F with ℓ(F) = ℓ(x) + ℓ(y).
    Sum,
    /// Univariate φ with ℓ(φ) = c·ℓ(x).
    Multiply(E),
}

/// Homogeneous parts indexed by degree. For a univariate series part d has
/// one entry; for a bivariate one part d lists the coefficients of
/// x^i y^{d−i} for i = 0..=d.
#[derive(Clone, Debug, PartialEq)]
pub struct Solved<E> {
    pub parts: Vec<Vec<E>>,
    pub bivariate: bool,
    pub precision: u32,
}

impl<E: Clone> Solved<E> {
    pub fn degree_cap(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    pub fn uni_coeff(&self, d: usize) -> &E {
        &self.parts[d][0]
    }

    pub fn bi_coeff(&self, i: usize, j: usize) -> &E {
        &self.parts[i + j][i]
    }
}

#[derive(Clone, Copy, Debug)]
enum Src {
    Base,
    Node(usize),
}

struct Node<E> {
    left: Src,
    right: Src,
    /// Power of the base series this node represents.
    exp: usize,
    parts: Vec<Vec<E>>,
}

/// Guard digits: the largest m with p^m ≤ d.
pub fn guard_digits(p: u64, d: usize) -> u32 {
    let mut m = 0;
    let mut q = p as u128;
    while q <= d as u128 {
        m += 1;
        q *= p as u128;
    }
    m
}

/// Solves for the unknown series up to total degree `cap`. The algebra must
/// work modulo p^{A+E} with E = guard_digits(p, cap); results are correct
/// modulo p^A and are returned reduced mod p^A.
///
/// `logs[m]` is the integral coefficient L_m = p^m ℓ_m for m = 0..=E.
pub fn solve<A: CoeffAlg>(
    alg: &A,
    logs: &[A::E],
    target: &Target<A::E>,
    cap: usize,
    exec: Exec,
) -> Result<Solved<A::E>> {
    let p = alg.p();
    let guard = guard_digits(p, cap);
    if alg.prec() <= guard {
        return Err(Error::Caps(format!(
            "working precision {} does not exceed guard {}",
            alg.prec(),
            guard
        )));
    }
    let out_prec = alg.prec() - guard;
    if logs.len() <= guard as usize {
        return Err(Error::Caps(format!(
            "{} log coefficients given, {} needed",
            logs.len(),
            guard + 1
        )));
    }
    let bivariate = matches!(target, Target::Sum);
    let class = if p == 2 { 1 } else { (p - 1) as usize };
    let part_len = |d: usize| if bivariate { d + 1 } else { 1 };

    // Power chain: node for X^p from X = Q_{m-1} by binary exponentiation.
    let mut nodes: Vec<Node<A::E>> = Vec::new();
    let mut q_nodes: Vec<Src> = vec![Src::Base];
    let bits: Vec<bool> = {
        let mut b = vec![];
        let mut e = p;
        while e > 0 {
            b.push(e & 1 == 1);
            e >>= 1;
        }
        b.reverse();
        b
    };
    for m in 1..=guard as usize {
        let x = q_nodes[m - 1];
        let x_exp = p.pow(m as u32 - 1) as usize;
        let mut cur = x;
        let mut cur_exp = x_exp;
        for &bit in &bits[1..] {
            nodes.push(Node {
                left: cur,
                right: cur,
                exp: 2 * cur_exp,
                parts: vec![],
            });
            cur = Src::Node(nodes.len() - 1);
            cur_exp *= 2;
            if bit {
                nodes.push(Node {
                    left: cur,
                    right: x,
                    exp: cur_exp + x_exp,
                    parts: vec![],
                });
                cur = Src::Node(nodes.len() - 1);
                cur_exp += x_exp;
            }
        }
        q_nodes.push(cur);
    }
    for node in nodes.iter_mut() {
        node.parts = vec![vec![]; cap + 1];
    }

    let mut base: Vec<Vec<A::E>> = vec![vec![]; cap + 1];
    base[0] = vec![alg.zero(); part_len(0)];
    if cap >= 1 {
        base[1] = match target {
            Target::Sum => vec![alg.one(), alg.one()],
            Target::Multiply(c) => vec![c.clone()],
        };
    }

    for d in 2..=cap {
        // Every node product at degree d reads degrees < d only.
        let computed: Vec<Option<Vec<A::E>>> = {
            let nodes_ref = &nodes;
            let base_ref = &base;
            exec.map_range(nodes.len(), |ix| {
                let node = &nodes_ref[ix];
                if d < node.exp || (d - node.exp) % class != 0 {
                    return None;
                }
                let get = |s: Src, k: usize| -> &[A::E] {
                    match s {
                        Src::Base => &base_ref[k],
                        Src::Node(j) => &nodes_ref[j].parts[k],
                    }
                };
                let lmin = src_exp(nodes_ref, node.left);
                let rmin = src_exp(nodes_ref, node.right);
                let mut acc: Vec<A::Acc> = (0..part_len(d)).map(|_| alg.acc_new()).collect();
                let mut i = lmin;
                while i + rmin <= d {
                    let j = d - i;
                    if (i - lmin) % class == 0 && (j - rmin) % class == 0 {
                        let a = get(node.left, i);
                        let b = get(node.right, j);
                        if !a.is_empty() && !b.is_empty() {
                            if bivariate {
                                for (s, x) in a.iter().enumerate() {
                                    if alg.is_zero(x) {
                                        continue;
                                    }
                                    for (t, y) in b.iter().enumerate() {
                                        alg.acc_add_mul(&mut acc[s + t], x, y);
                                    }
                                }
                            } else {
                                alg.acc_add_mul(&mut acc[0], &a[0], &b[0]);
                            }
                        }
                    }
                    i += 1;
                }
                Some(acc.into_iter().map(|a| alg.acc_finish(a)).collect())
            })
        };
        for (node, part) in nodes.iter_mut().zip(computed) {
            if let Some(v) = part {
                node.parts[d] = v;
            }
        }

        if (d - 1) % class != 0 {
            continue;
        }
        let len = part_len(d);
        let mut s: Vec<A::E> = vec![alg.zero(); len];
        // Right hand side at d = p^j.
        let mut pj = 1usize;
        let mut j = 0u32;
        while pj < d {
            pj *= p as usize;
            j += 1;
        }
        if pj == d {
            let scaled = alg.mul_p_pow(&logs[j as usize], guard - j);
            match target {
                Target::Sum => {
                    s[0] = alg.add(&s[0], &scaled);
                    s[d] = alg.add(&s[d], &scaled);
                }
                Target::Multiply(c) => {
                    s[0] = alg.add(&s[0], &alg.mul(c, &scaled));
                }
            }
        }
        for m in 1..=guard as usize {
            if p.pow(m as u32) as usize > d {
                break;
            }
            let Src::Node(ix) = q_nodes[m] else {
                unreachable!()
            };
            let part = &nodes[ix].parts[d];
            if part.is_empty() {
                continue;
            }
            let lm = alg.mul_p_pow(&logs[m], guard - m as u32);
            for (k, c) in part.iter().enumerate() {
                s[k] = alg.sub(&s[k], &alg.mul(&lm, c));
            }
        }
        let mut coeffs = Vec::with_capacity(len);
        for c in s.iter() {
            let v = alg.valuation(c);
            if v < guard {
                return Err(Error::Integrality {
                    degree: d,
                    valuation: v as i64 - guard as i64,
                });
            }
            coeffs.push(alg.div_p_pow(c, guard));
        }
        base[d] = coeffs;
    }

    let parts = base
        .into_iter()
        .enumerate()
        .map(|(d, part)| {
            if part.is_empty() {
                vec![alg.zero(); part_len(d)]
            } else {
                part.iter().map(|c| alg.truncate(c, out_prec)).collect()
            }
        })
        .collect();
    Ok(Solved {
        parts,
        bivariate,
        precision: out_prec,
    })
}

fn src_exp<E>(nodes: &[Node<E>], s: Src) -> usize {
    match s {
        Src::Base => 1,
        Src::Node(j) => nodes[j].exp,
    }
}
