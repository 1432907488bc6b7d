//! The universal deformation of the height-n Honda formal group.
//!
//! The logarithm is Σ_m ℓ_m x^{p^m} with ℓ_0 = 1 and
//! ℓ_m = (1/p) Σ_{i=1}^{min(m,n)} ℓ_{m−i} u_i^{p^{m−i}}, u_n := 1.
//! Group laws and multiplication series are produced by [`engine::solve`]
//! from the integral coefficients L_m = p^m ℓ_m.

pub mod alg;
pub mod dense;
pub mod endo;
pub mod engine;
pub mod honda;

use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::padic::{make_ring, PadicValue, RingSpec, WittElement};
use crate::series::{Monomial, SeriesRing, TruncatedSeries};
use alg::{UPolyAlg, WAlg};
use engine::{guard_digits, solve, CoeffAlg, Solved, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Total degree cap in u_1, …, u_{n−1}.
    pub du: u32,
    /// x-degree cap for one-variable series such as [p]_F.
    pub dx: u32,
    /// Total degree cap for the two-variable group law.
    pub dxy: u32,
}

impl Caps {
    /// D_u = 6, D_x = p^6 and a bivariate cap of min(p^6, max(81, 2p^n + 1)).
    pub fn default_for(p: u64, n: usize) -> Self {
        let p6 = (p as u32).pow(6);
        let dxy = p6.min(81.max(2 * (p as u32).pow(n as u32) + 1));
        Caps { du: 6, dx: p6, dxy }
    }
}

/// A point of the deformation space with coordinates in pW.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPoint {
    pub coords: Vec<WittElement>,
}

impl DeformationPoint {
    pub fn zero(n: usize) -> Self {
        DeformationPoint {
            coords: vec![WittElement::ZERO; n.saturating_sub(1)],
        }
    }

    pub fn new(ring: &RingSpec, coords: Vec<WittElement>) -> Result<Self> {
        if coords.len() + 1 != ring.degree() {
            return Err(Error::Degenerate(format!(
                "expected {} coordinates, got {}",
                ring.degree() - 1,
                coords.len()
            )));
        }
        for c in &coords {
            if ring.valuation(c) < 1 {
                return Err(Error::OutsideDisc(ring.valuation(c) as i64));
            }
        }
        Ok(DeformationPoint { coords })
    }

    pub fn reduce(&self, ring: &RingSpec) -> Self {
        DeformationPoint {
            coords: self.coords.iter().map(|c| ring.reduce_from(c)).collect(),
        }
    }

    pub fn random<R: rand::Rng>(ring: &RingSpec, rng: &mut R) -> Self {
        let coords = (1..ring.degree())
            .map(|_| ring.mul_p_pow(&ring.random_element(rng), 1))
            .collect();
        DeformationPoint { coords }
    }
}

/// Integral log coefficients L_m(a) = p^m ℓ_m(a) ∈ W for m = 0..count.
pub fn integral_logs_at(ring: &RingSpec, a: &DeformationPoint, count: usize) -> Vec<WittElement> {
    let n = ring.degree();
    let p = ring.p() as u128;
    let mut out: Vec<WittElement> = vec![ring.one()];
    // powers[i][k] = a_i^{p^k}
    let mut powers: Vec<Vec<WittElement>> = a.coords.iter().map(|c| vec![*c]).collect();
    for m in 1..count {
        let mut s = WittElement::ZERO;
        for i in 1..=m.min(n) {
            let e = m - i;
            let term = if i == n {
                out[e]
            } else {
                while powers[i - 1].len() <= e {
                    let last = *powers[i - 1].last().unwrap();
                    powers[i - 1].push(ring.pow(&last, p));
                }
                ring.mul(&out[e], &powers[i - 1][e])
            };
            s = ring.add(&s, &ring.mul_p_pow(&term, i as u32 - 1));
        }
        out.push(s);
    }
    out
}

/// ℓ_m(a) ∈ K for m = 0..count, by the log recursion evaluated at a.
pub fn logs_at(ring: &RingSpec, a: &DeformationPoint, count: usize) -> Vec<PadicValue> {
    let n = ring.degree();
    let p = ring.p() as u128;
    let coords: Vec<PadicValue> = a.coords.iter().map(|c| ring.k_from_witt(c)).collect();
    let mut powers: Vec<Vec<PadicValue>> = coords.iter().map(|c| vec![*c]).collect();
    let mut out = vec![ring.k_one()];
    for m in 1..count {
        let mut s = ring.k_zero();
        for i in 1..=m.min(n) {
            let e = m - i;
            let term = if i == n {
                out[e]
            } else {
                while powers[i - 1].len() <= e {
                    let last = *powers[i - 1].last().unwrap();
                    powers[i - 1].push(ring.k_pow(&last, p));
                }
                ring.k_mul(&out[e], &powers[i - 1][e])
            };
            s = ring.k_add(&s, &term);
        }
        out.push(ring.k_shift(&s, -1));
    }
    out
}

#[derive(Debug, Clone)]
pub struct UniversalDeformation {
    p: u64,
    n: usize,
    caps: Caps,
    precision: u32,
    field: Arc<RingSpec>,
    series_ring: Arc<SeriesRing>,
    logs: Vec<TruncatedSeries>,
    corruption: Option<(usize, i128)>,
}

/// The group law and [p]-series with their coefficient ring.
pub struct Computed {
    pub alg: UPolyAlg,
    pub series: Solved<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FglCheck {
    pub integral_group_law: bool,
    pub integral_p_series: bool,
    pub height_ok: bool,
    pub leading_degree: Option<usize>,
    pub first_violation: Option<String>,
    pub group_law_cap: u32,
    pub p_series_cap: u32,
}

impl FglCheck {
    pub fn passed(&self) -> bool {
        self.integral_group_law && self.integral_p_series && self.height_ok
    }
}

/// Builds ℓ_0, …, ℓ_{count−1} as series in u over K.
pub fn build_universal_log(
    p: u64,
    n: usize,
    count: usize,
    caps: Caps,
    precision: u32,
) -> Result<UniversalDeformation> {
    if count < n {
        return Err(Error::OutOfRange(format!(
            "need at least {n} log coefficients, got {count}"
        )));
    }
    let top = (p as u128).checked_pow(count as u32 - 1);
    if top.map_or(true, |t| t > caps.dx as u128) {
        return Err(Error::Caps(format!(
            "x-cap {} cannot hold x^{{p^{}}}",
            caps.dx,
            count - 1
        )));
    }
    let field = Arc::new(make_ring(p, n, precision)?);
    let series_ring = SeriesRing::new(field.clone(), n - 1, caps.du, caps.dx);
    let mut logs: Vec<TruncatedSeries> = vec![TruncatedSeries::one(&series_ring)];
    let inv_p = field.k_p_pow(-1);
    for m in 1..count {
        let mut s = TruncatedSeries::zero(&series_ring);
        for i in 1..=m.min(n) {
            let prev = &logs[m - i];
            let term = if i == n {
                prev.clone()
            } else {
                let mut e = vec![0u32; n - 1];
                let pe = (p as u128).pow((m - i) as u32);
                if pe > caps.du as u128 {
                    continue;
                }
                e[i - 1] = pe as u32;
                let u = TruncatedSeries::monomial(&series_ring, Monomial::new(&e, 0), field.k_one());
                prev.mul(&u)?
            };
            s = s.add(&term)?;
        }
        logs.push(s.scale(&inv_p));
    }
    Ok(UniversalDeformation {
        p,
        n,
        caps,
        precision,
        field,
        series_ring,
        logs,
        corruption: None,
    })
}

impl UniversalDeformation {
    /// Convenience constructor with as many log coefficients as the x-cap holds.
    pub fn new(p: u64, n: usize, caps: Caps, precision: u32) -> Result<Self> {
        let count = guard_digits(p, caps.dx as usize) as usize + 1;
        build_universal_log(p, n, count.max(n), caps, precision)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn field(&self) -> &Arc<RingSpec> {
        &self.field
    }

    pub fn series_ring(&self) -> &Arc<SeriesRing> {
        &self.series_ring
    }

    /// ℓ_m as a series in u over K.
    pub fn log(&self, m: usize) -> &TruncatedSeries {
        &self.logs[m]
    }

    pub fn log_count(&self) -> usize {
        self.logs.len()
    }

    /// Fault injection: replaces ℓ_m by ℓ_m + delta/p^m.
    pub fn corrupt_log(&mut self, m: usize, delta: i128) {
        let k = &self.field;
        let shift = TruncatedSeries::constant(
            &self.series_ring,
            k.k_mul(&k.k_from_int(delta), &k.k_p_pow(-(m as i64))),
        );
        self.logs[m] = self.logs[m].add(&shift).expect("same ring");
        self.corruption = Some((m, delta));
    }

    fn alg(&self, cap: u32) -> Result<UPolyAlg> {
        let guard = guard_digits(self.p, cap as usize);
        UPolyAlg::new(self.p, self.precision + guard, self.n - 1, self.caps.du).ok_or_else(|| {
            Error::OutOfRange(format!(
                "precision {} plus {} guard digits does not fit a machine word",
                self.precision, guard
            ))
        })
    }

    /// L_m = p^m ℓ_m as integral u-polynomials, from the integral recursion.
    pub fn integral_logs(&self, alg: &UPolyAlg, count: usize) -> Vec<Vec<u64>> {
        let n = self.n;
        let mut out: Vec<Vec<u64>> = vec![alg.one()];
        for m in 1..count {
            let mut s = alg.zero();
            for i in 1..=m.min(n) {
                let prev = &out[m - i];
                let term = if i == n {
                    prev.clone()
                } else {
                    let pe = (self.p as u128).pow((m - i) as u32);
                    if pe > self.caps.du as u128 {
                        continue;
                    }
                    let mut e = vec![0u32; n - 1];
                    e[i - 1] = pe as u32;
                    alg.mul(prev, &alg.monomial(&e))
                };
                s = alg.add(&s, &alg.mul_p_pow(&term, i as u32 - 1));
            }
            out.push(s);
        }
        if let Some((m, delta)) = self.corruption {
            if m < out.len() {
                out[m] = alg.add(&out[m], &alg.from_int(delta));
            }
        }
        out
    }

    pub fn group_law(&self, exec: Exec) -> Result<Computed> {
        let cap = self.caps.dxy;
        let alg = self.alg(cap)?;
        let logs = self.integral_logs(&alg, guard_digits(self.p, cap as usize) as usize + 1);
        let series = solve(&alg, &logs, &Target::Sum, cap as usize, exec)?;
        Ok(Computed { alg, series })
    }

    pub fn p_series(&self, exec: Exec) -> Result<Computed> {
        let cap = self.caps.dx;
        let alg = self.alg(cap)?;
        let logs = self.integral_logs(&alg, guard_digits(self.p, cap as usize) as usize + 1);
        let p = alg.from_int(self.p as i128);
        let series = solve(&alg, &logs, &Target::Multiply(p), cap as usize, exec)?;
        Ok(Computed { alg, series })
    }

    /// Integrality of F and [p]_F up to caps, and [p]_F ≡ unit·x^{p^n}
    /// modulo (p, u).
    pub fn check(&self, exec: Exec) -> Result<FglCheck> {
        let mut report = FglCheck {
            integral_group_law: true,
            integral_p_series: true,
            height_ok: false,
            leading_degree: None,
            first_violation: None,
            group_law_cap: self.caps.dxy,
            p_series_cap: self.caps.dx,
        };
        match self.group_law(exec) {
            Ok(_) => {}
            Err(e @ Error::Integrality { .. }) => {
                report.integral_group_law = false;
                report.first_violation = Some(format!("group law: {e}"));
            }
            Err(e) => return Err(e),
        }
        match self.p_series(exec) {
            Ok(c) => {
                let lead = height_leading_degree(&c);
                report.leading_degree = lead;
                report.height_ok = lead == Some((self.p as usize).pow(self.n as u32));
            }
            Err(e @ Error::Integrality { .. }) => {
                report.integral_p_series = false;
                if report.first_violation.is_none() {
                    report.first_violation = Some(format!("[p]-series: {e}"));
                }
            }
            Err(e) => return Err(e),
        }
        Ok(report)
    }

    /// SHA-256 over the integral log coefficients, for reproducibility
    /// manifests.
    pub fn digest(&self) -> Result<String> {
        let alg = self.alg(self.caps.dx)?;
        let logs = self.integral_logs(&alg, self.logs.len());
        let mut h = Sha256::new();
        h.update(format!("p={} n={} du={} dx={} dxy={} N={};", self.p, self.n, self.caps.du, self.caps.dx, self.caps.dxy, self.precision));
        let f = (self.p as u128).pow(self.precision);
        for l in logs {
            for c in l {
                h.update(((c as u128) % f).to_le_bytes());
            }
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Degree of the first coefficient of [p]_F that is nonzero modulo (p, u).
pub fn height_leading_degree(c: &Computed) -> Option<usize> {
    let p = c.alg.p();
    c.series
        .parts
        .iter()
        .enumerate()
        .find(|(_, part)| part[0][0] % p != 0)
        .map(|(d, _)| d)
}

/// The formal group F_a over W: group law, integral logs and working ring.
pub struct SpecializedGroup {
    pub point: DeformationPoint,
    /// Ring mod p^{prec + guard} the solver runs in.
    pub work: Arc<RingSpec>,
    /// Ring mod p^prec the results are valid in.
    pub ring: Arc<RingSpec>,
    pub logs: Vec<WittElement>,
    pub law: Solved<WittElement>,
    pub cap: usize,
}

/// Substitutes u = a. The log coefficients ℓ_m(a) are computed from the
/// recursion at a directly, so no u-truncation enters.
pub fn specialize(
    ring: &Arc<RingSpec>,
    a: &DeformationPoint,
    cap: usize,
    exec: Exec,
) -> Result<SpecializedGroup> {
    for c in &a.coords {
        if ring.valuation(c) < 1 {
            return Err(Error::OutsideDisc(ring.valuation(c) as i64));
        }
    }
    let guard = guard_digits(ring.p(), cap);
    let work = Arc::new(ring.with_precision(ring.precision() + guard)?);
    let pt = a.reduce(&work);
    let logs = integral_logs_at(&work, &pt, guard as usize + 1);
    let alg = WAlg { ring: work.clone() };
    let law = solve(&alg, &logs, &Target::Sum, cap, exec)?;
    Ok(SpecializedGroup {
        point: a.clone(),
        work,
        ring: ring.clone(),
        logs,
        law,
        cap,
    })
}

impl SpecializedGroup {
    /// [c]_{F_a}(x) for c ∈ W, up to the group's cap.
    pub fn multiply(&self, c: &WittElement, exec: Exec) -> Result<dense::Uni> {
        let alg = WAlg {
            ring: self.work.clone(),
        };
        let c = self.work.reduce_from(c);
        let s = solve(&alg, &self.logs, &Target::Multiply(c), self.cap, exec)?;
        Ok(s.parts.into_iter().map(|v| v[0]).collect())
    }

    /// Group law as a dense bivariate series, coefficients reduced into `ring`.
    pub fn law_dense(&self) -> dense::Bi {
        self.law
            .parts
            .iter()
            .map(|part| part.iter().map(|c| self.ring.reduce_from(c)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests;
