//! The period map Φ: X → P^{n−1} and the differentiated group action.
//!
//! Φ(a) is realized by ratio limits of the log coefficients at a:
//! x_j = lim_m ℓ_{mn+j}(a) / ℓ_{mn}(a). All comparisons between points of
//! P^{n−1} go through [`proj_residual`], which is invariant under rescaling.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::deform::{lift_automorphism, LiftOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fgl::endo::{self, EndoElement};
use crate::fgl::{logs_at, DeformationPoint};
use crate::kmat::KMatrix;
use crate::padic::{PadicValue, RingSpec, WittElement, EXACT};
use crate::series::TruncatedSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    /// Homogeneous coordinates with coords[chart] = 1.
    pub coords: Vec<PadicValue>,
    pub chart: usize,
    /// Absolute precision of the affine coordinates.
    pub precision: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    /// Valuation of the difference between successive normalized vectors.
    pub gains: Vec<i64>,
    pub steps: usize,
    pub converged: bool,
}

impl ConvergenceReport {
    /// Smallest increase between successive gains before they reach the
    /// precision floor; None if convergence took a single step.
    pub fn min_increment(&self, floor: i64) -> Option<i64> {
        self.gains
            .windows(2)
            .filter(|w| w[0] < floor)
            .map(|w| w[1] - w[0])
            .min()
    }
}

/// "[x_0 : … : x_{n−1}]", printing exact-looking coordinates as integers.
pub fn format_point(ring: &RingSpec, x: &ProjPoint) -> String {
    let parts: Vec<String> = x
        .coords
        .iter()
        .map(|c| match ring.k_rational_parts(c) {
            _ if c.is_zero() => "0".to_string(),
            Some((0, u)) => u.to_string(),
            Some((v, u)) if v > 0 => format!("{}^{v}*{u}", ring.p()),
            _ => ring.k_format(c),
        })
        .collect();
    format!("[{}]", parts.join(" : "))
}

/// Divides by the coordinate of least valuation, lowest index on ties.
pub fn normalize(ring: &RingSpec, v: &[PadicValue]) -> Result<(Vec<PadicValue>, usize)> {
    let chart = v
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .min_by_key(|(i, x)| (x.valuation(), *i))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("all homogeneous coordinates vanish".into()))?;
    let inv = ring.k_inv(&v[chart])?;
    let mut out: Vec<PadicValue> = v.iter().map(|x| ring.k_mul(x, &inv)).collect();
    out[chart] = ring.k_one();
    Ok((out, chart))
}

/// Projective distance: min over i < j of v(x_i y_j − x_j y_i) after scaling
/// both vectors to have a unit coordinate.
pub fn proj_residual(ring: &RingSpec, x: &[PadicValue], y: &[PadicValue]) -> Result<i64> {
    let (x, _) = normalize(ring, x)?;
    let (y, _) = normalize(ring, y)?;
    let mut v = EXACT;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = ring.k_sub(&ring.k_mul(&x[i], &y[j]), &ring.k_mul(&x[j], &y[i]));
            v = v.min(d.valuation());
        }
    }
    Ok(v)
}

/// Φ(a) to `digits` digits, iterating at most `m_max` steps.
pub fn period_point(
    ring: &RingSpec,
    a: &DeformationPoint,
    digits: u32,
    m_max: usize,
) -> Result<(ProjPoint, ConvergenceReport)> {
    let n = ring.degree();
    for c in &a.coords {
        if ring.valuation(c) < 1 {
            return Err(Error::OutsideDisc(ring.valuation(c) as i64));
        }
    }
    if n == 1 {
        return Ok((
            ProjPoint {
                coords: vec![ring.k_one()],
                chart: 0,
                precision: EXACT,
            },
            ConvergenceReport {
                gains: vec![],
                steps: 0,
                converged: true,
            },
        ));
    }
    let logs = logs_at(ring, a, n * (m_max + 1));
    let mut prev: Option<Vec<PadicValue>> = None;
    let mut gains = vec![];
    for m in 0..=m_max {
        let v = &logs[m * n..(m + 1) * n];
        let (x, chart) = normalize(ring, v)?;
        if let Some(pr) = &prev {
            let g = proj_residual(ring, pr, &x)?;
            gains.push(g);
            if g >= digits as i64 {
                let precision = x
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != chart)
                    .map(|(_, c)| c.absolute_precision())
                    .min()
                    .unwrap_or(EXACT)
                    .min(g);
                return Ok((
                    ProjPoint {
                        coords: x,
                        chart,
                        precision,
                    },
                    ConvergenceReport {
                        gains,
                        steps: m,
                        converged: true,
                    },
                ));
            }
        }
        prev = Some(x);
    }
    Err(Error::Budget(format!(
        "period ratios not stable to {digits} digits after {m_max} steps (last gains {:?})",
        gains.iter().rev().take(3).collect::<Vec<_>>()
    )))
}

/// Affine coordinates of x in a given chart.
fn affine(ring: &RingSpec, x: &[PadicValue], chart: usize) -> Result<Vec<PadicValue>> {
    let inv = ring.k_inv(&x[chart])?;
    Ok(x.iter()
        .enumerate()
        .filter(|(i, _)| *i != chart)
        .map(|(_, c)| ring.k_mul(c, &inv))
        .collect())
}

fn shifted(ring: &RingSpec, a: &DeformationPoint, j: usize, h: &WittElement, sign: bool) -> DeformationPoint {
    let mut b = a.clone();
    b.coords[j] = if sign {
        ring.add(&b.coords[j], h)
    } else {
        ring.sub(&b.coords[j], h)
    };
    b
}

/// Symmetric difference quotients at offset p^s, as a matrix with column j
/// the derivative along a_j.
fn symmetric_jacobian<F>(ring: &RingSpec, a: &DeformationPoint, s: u32, f: &F) -> Result<KMatrix>
where
    F: Fn(&DeformationPoint) -> Result<Vec<PadicValue>>,
{
    let d = a.coords.len();
    let h = ring.from_int(ring.p_pow(s) as i128);
    let two_h = ring.k_shift(&ring.k_from_int(2), s as i64);
    let mut cols = vec![];
    for j in 0..d {
        let plus = f(&shifted(ring, a, j, &h, true))?;
        let minus = f(&shifted(ring, a, j, &h, false))?;
        let col: Vec<PadicValue> = plus
            .iter()
            .zip(&minus)
            .map(|(x, y)| ring.k_div(&ring.k_sub(x, y), &two_h))
            .collect::<Result<_>>()?;
        cols.push(col);
    }
    Ok(KMatrix::from_columns(&cols))
}

fn matrix_gap(ring: &RingSpec, a: &KMatrix, b: &KMatrix) -> i64 {
    let d = a.sub(ring, b);
    let mut v = EXACT;
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            v = v.min(d.get(i, j).valuation());
        }
    }
    v
}

/// (p² J(s) − J(s+1)) / (p² − 1), cancelling the h² error term.
fn richardson(ring: &RingSpec, fine: &KMatrix, coarse: &KMatrix, order: u32) -> Result<KMatrix> {
    let q = ring.k_from_int((ring.p() as i128).pow(order));
    let denom = ring.k_inv(&ring.k_sub(&q, &ring.k_one()))?;
    Ok(coarse.scale(ring, &q).sub(ring, fine).scale(ring, &denom))
}

#[derive(Clone, Debug)]
pub struct Jacobian {
    pub matrix: KMatrix,
    pub det: PadicValue,
    pub chart: usize,
    /// v(J(p^s) − J(p^{s+1})) and v(J(p^{s+1}) − J(p^{s+2})).
    pub scale_gaps: (i64, i64),
    pub etale: bool,
}

/// dΦ at a in the affine chart of Φ(a), by symmetric differences at offsets
/// p^s, p^{s+1}, p^{s+2} with Richardson extrapolation on the first two.
pub fn jacobian_phi(ring: &RingSpec, a: &DeformationPoint, s: u32, digits: u32, m_max: usize) -> Result<Jacobian> {
    let n = ring.degree();
    if n == 1 {
        return Ok(Jacobian {
            matrix: KMatrix::identity(ring, 0),
            det: ring.k_one(),
            chart: 0,
            scale_gaps: (EXACT, EXACT),
            etale: true,
        });
    }
    if s == 0 {
        return Err(Error::OutOfRange("offset exponent must be at least 1".into()));
    }
    let (x, _) = period_point(ring, a, digits, m_max)?;
    let base_chart = x.chart;
    let mut last_err = None;
    let charts: Vec<usize> = std::iter::once(base_chart).chain((0..n).filter(|&c| c != base_chart)).collect();
    for chart in charts {
        if x.coords[chart].is_zero() {
            continue;
        }
        let f = |b: &DeformationPoint| -> Result<Vec<PadicValue>> {
            let (y, _) = period_point(ring, b, digits, m_max)?;
            affine(ring, &y.coords, chart)
        };
        let attempt = (|| -> Result<Jacobian> {
            let j0 = symmetric_jacobian(ring, a, s, &f)?;
            let j1 = symmetric_jacobian(ring, a, s + 1, &f)?;
            let j2 = symmetric_jacobian(ring, a, s + 2, &f)?;
            let matrix = richardson(ring, &j1, &j0, 2)?;
            let det = matrix.det(ring);
            Ok(Jacobian {
                etale: !det.is_zero(),
                det,
                matrix,
                chart,
                scale_gaps: (matrix_gap(ring, &j0, &j1), matrix_gap(ring, &j1, &j2)),
            })
        })();
        match attempt {
            Ok(j) => return Ok(j),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Degenerate("no usable chart".into())))
}

#[derive(Clone, Copy, Debug)]
pub struct PeriodOptions {
    pub digits: u32,
    pub m_max: usize,
    /// Precision of lifted points.
    pub lift_precision: u32,
}

impl PeriodOptions {
    pub fn for_ring(ring: &RingSpec) -> Self {
        PeriodOptions {
            digits: ring.precision().saturating_sub(2).max(1),
            m_max: 40,
            lift_precision: ring.precision(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquivarianceFit {
    /// M with M·Φ(a) = Φ(T·a) projectively.
    pub matrix: KMatrix,
    pub fit_residuals: Vec<i64>,
    pub holdout_residuals: Vec<i64>,
    /// v(I_k(M) − I_k(matrix(T)^{-1})) minimized over k, with the scale
    /// invariants I_k = e_k^n / e_n^k.
    pub charpoly_residual: i64,
}

/// Fits the projective action of T on period points from the first n + 1
/// samples and validates on the rest.
pub fn equivariance_fit(
    ring: &RingSpec,
    t: &EndoElement,
    samples: &[DeformationPoint],
    opts: &PeriodOptions,
    exec: Exec,
) -> Result<EquivarianceFit> {
    let n = ring.degree();
    if samples.len() < n + 2 {
        return Err(Error::Degenerate(format!(
            "{} samples given, at least {} needed",
            samples.len(),
            n + 2
        )));
    }
    let pairs: Vec<Result<(Vec<PadicValue>, Vec<PadicValue>)>> = exec.map(samples, |a| {
        let b = lift_automorphism(ring, t, a, &LiftOptions::new(opts.lift_precision))?.target;
        let (x, _) = period_point(ring, a, opts.digits, opts.m_max)?;
        let (y, _) = period_point(ring, &b, opts.digits, opts.m_max)?;
        Ok((x.coords, y.coords))
    });
    let pairs: Vec<(Vec<PadicValue>, Vec<PadicValue>)> = pairs.into_iter().collect::<Result<_>>()?;
    let matrix = fit_projective(ring, &pairs[..n + 1])?;
    let residual = |(x, y): &(Vec<PadicValue>, Vec<PadicValue>)| proj_residual(ring, &matrix.mul_vec(ring, x), y);
    let fit_residuals = pairs[..n + 1].iter().map(residual).collect::<Result<_>>()?;
    let holdout_residuals = pairs[n + 1..].iter().map(residual).collect::<Result<_>>()?;
    let reference = natural_action(ring, t)?;
    let charpoly_residual = charpoly_gap(ring, &matrix, &reference)?;
    Ok(EquivarianceFit {
        matrix,
        fit_residuals,
        holdout_residuals,
        charpoly_residual,
    })
}

/// The projective map sending x_i to y_i for n + 1 pairs in general position:
/// M = B·diag(β/α)·A^{-1} with A α = x_n, B β = y_n.
pub fn fit_projective(ring: &RingSpec, pairs: &[(Vec<PadicValue>, Vec<PadicValue>)]) -> Result<KMatrix> {
    let n = pairs.len() - 1;
    let xs: Vec<Vec<PadicValue>> = pairs[..n].iter().map(|p| p.0.clone()).collect();
    let ys: Vec<Vec<PadicValue>> = pairs[..n].iter().map(|p| p.1.clone()).collect();
    let a = KMatrix::from_columns(&xs);
    let b = KMatrix::from_columns(&ys);
    let alpha = a.solve(ring, &KMatrix::from_columns(&[pairs[n].0.clone()]))?;
    let beta = b.solve(ring, &KMatrix::from_columns(&[pairs[n].1.clone()]))?;
    let mut diag = KMatrix::zeros(ring, n, n);
    for i in 0..n {
        let al = alpha.get(i, 0);
        if al.is_zero() || beta.get(i, 0).is_zero() {
            return Err(Error::Degenerate("samples not in general position".into()));
        }
        diag.set(i, i, ring.k_div(&beta.get(i, 0), &al)?);
    }
    Ok(b.mul(ring, &diag).mul(ring, &a.inverse(ring)?))
}

pub fn charpoly_gap(ring: &RingSpec, m: &KMatrix, reference: &KMatrix) -> Result<i64> {
    let n = m.rows();
    let em = m.char_coeffs(ring);
    let er = reference.char_coeffs(ring);
    let inv = |e: &[PadicValue], k: usize| -> Result<PadicValue> {
        ring.k_div(&ring.k_pow(&e[k - 1], n as u128), &ring.k_pow(&e[n - 1], k as u128))
    };
    let mut v = EXACT;
    for k in 1..n {
        v = v.min(ring.k_sub(&inv(&em, k)?, &inv(&er, k)?).valuation());
    }
    Ok(v)
}

/// Evaluates f at a point, reducing coordinates into f's coefficient ring.
fn eval(f: &TruncatedSeries, a: &DeformationPoint) -> Result<PadicValue> {
    let ring = f.ring().coefficients();
    let a = a.reduce(ring);
    f.evaluate_polynomial(&a.coords)
}

fn act(ring: &RingSpec, g: &EndoElement, a: &DeformationPoint, prec: u32) -> Result<DeformationPoint> {
    Ok(lift_automorphism(ring, g, a, &LiftOptions::new(prec))?.target)
}

#[derive(Clone, Debug, Serialize)]
pub struct LieReport {
    /// Richardson estimate from the last two quotients.
    #[serde(skip)]
    pub value: PadicValue,
    #[serde(skip)]
    pub quotients: Vec<PadicValue>,
    /// v(q_{m+1} − q_m) along the range.
    pub diff_valuations: Vec<i64>,
    pub cauchy: bool,
}

/// D_γ f(a) = lim (f(exp(p^m γ)·a) − f(a)) / p^m over the given m-range.
pub fn lie_derivative(
    gamma: &EndoElement,
    f: &TruncatedSeries,
    a: &DeformationPoint,
    ms: RangeInclusive<u32>,
    opts: &PeriodOptions,
) -> Result<LieReport> {
    let ring = f.ring().coefficients().clone();
    let fa = eval(f, a)?;
    let mut quotients = vec![];
    for m in ms {
        let g = endo::exp_d(&ring, &endo::mul_p_pow(&ring, gamma, m))?;
        let b = act(&ring, &g, a, opts.lift_precision)?;
        let q = ring.k_shift(&ring.k_sub(&eval(f, &b)?, &fa), -(m as i64));
        quotients.push(q);
    }
    if quotients.len() < 2 {
        return Err(Error::OutOfRange("m-range needs at least two values".into()));
    }
    let diffs: Vec<PadicValue> = quotients.windows(2).map(|w| ring.k_sub(&w[1], &w[0])).collect();
    let diff_valuations: Vec<i64> = diffs.iter().map(|d| d.valuation()).collect();
    let cauchy = diffs
        .windows(2)
        .all(|w| w[1].is_zero() || (!w[0].is_zero() && w[1].valuation() > w[0].valuation()));
    let k = quotients.len();
    let p = ring.k_from_int(ring.p() as i128);
    let value = ring.k_div(
        &ring.k_sub(&ring.k_mul(&p, &quotients[k - 2]), &quotients[k - 1]),
        &ring.k_sub(&p, &ring.k_one()),
    )?;
    Ok(LieReport {
        value,
        quotients,
        diff_valuations,
        cauchy,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    #[serde(skip)]
    pub lhs: PadicValue,
    #[serde(skip)]
    pub rhs: PadicValue,
    pub residual: i64,
    /// Valuation of D_{[δ,γ]} f(a), so a vanishing bracket is visible.
    pub rhs_valuation: i64,
}

/// Compares [D_γ, D_δ] f(a), from the group commutator at h = p^s and p^{s+1},
/// with D_{[δ,γ]} f(a). For a left action γ ↦ D_γ reverses brackets.
pub fn bracket_check(
    gamma: &EndoElement,
    delta: &EndoElement,
    f: &TruncatedSeries,
    a: &DeformationPoint,
    s: u32,
    ms: RangeInclusive<u32>,
    opts: &PeriodOptions,
) -> Result<BracketReport> {
    let ring = f.ring().coefficients().clone();
    let second = |e: u32| -> Result<PadicValue> {
        let eg = endo::exp_d(&ring, &endo::mul_p_pow(&ring, gamma, e))?;
        let ed = endo::exp_d(&ring, &endo::mul_p_pow(&ring, delta, e))?;
        let dg = act(&ring, &endo::mul(&ring, &ed, &eg), a, opts.lift_precision)?;
        let gd = act(&ring, &endo::mul(&ring, &eg, &ed), a, opts.lift_precision)?;
        let diff = ring.k_sub(&eval(f, &dg)?, &eval(f, &gd)?);
        Ok(ring.k_shift(&diff, -2 * e as i64))
    };
    let l0 = second(s)?;
    let l1 = second(s + 1)?;
    let p = ring.k_from_int(ring.p() as i128);
    let lhs = ring.k_div(&ring.k_sub(&ring.k_mul(&p, &l0), &l1), &ring.k_sub(&p, &ring.k_one()))?;
    let br = endo::bracket(&ring, delta, gamma);
    let rhs = if br.is_zero() {
        ring.k_zero()
    } else {
        lie_derivative(&br, f, a, ms, opts)?.value
    };
    Ok(BracketReport {
        residual: ring.k_sub(&lhs, &rhs).valuation(),
        rhs_valuation: rhs.valuation(),
        lhs,
        rhs,
    })
}

/// Exponents (ε, δ) in r(T, a) = jac_X(T, a) · c_T(a)^{εn} · nrd(T)^δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Orientation {
    pub eps: i32,
    pub delta: i32,
}

#[derive(Clone, Debug)]
pub struct CocycleValue {
    pub r: PadicValue,
    pub jac: PadicValue,
    pub linear: PadicValue,
    pub nrd: PadicValue,
    pub target: DeformationPoint,
}

fn signed_pow(ring: &RingSpec, x: &PadicValue, e: i64) -> Result<PadicValue> {
    let y = ring.k_pow(x, e.unsigned_abs() as u128);
    if e < 0 {
        ring.k_inv(&y)
    } else {
        Ok(y)
    }
}

/// Determinant of the derivative of a ↦ T·a, by symmetric differences at
/// p^s and p^{s+1} with Richardson extrapolation.
pub fn action_jacobian(ring: &RingSpec, t: &EndoElement, a: &DeformationPoint, s: u32, prec: u32) -> Result<PadicValue> {
    if a.coords.is_empty() {
        return Ok(ring.k_one());
    }
    let f = |b: &DeformationPoint| -> Result<Vec<PadicValue>> {
        let image = act(ring, t, b, prec)?;
        Ok(image.coords.iter().map(|c| ring.k_from_witt_prec(c, prec as i64)).collect())
    };
    let j0 = symmetric_jacobian(ring, a, s, &f)?;
    let j1 = symmetric_jacobian(ring, a, s + 1, &f)?;
    Ok(richardson(ring, &j1, &j0, 2)?.det(ring))
}

pub fn cocycle_value(
    ring: &RingSpec,
    t: &EndoElement,
    a: &DeformationPoint,
    orientation: Orientation,
    s: u32,
    prec: u32,
) -> Result<CocycleValue> {
    let lift = lift_automorphism(ring, t, a, &LiftOptions::new(prec))?;
    let jac = action_jacobian(ring, t, a, s, prec)?;
    let linear = ring.k_from_witt_prec(&lift.linear, prec as i64);
    let nrd = endo::reduced_norm(ring, t);
    let n = ring.degree() as i64;
    let r = ring.k_mul(
        &ring.k_mul(&jac, &signed_pow(ring, &linear, orientation.eps as i64 * n)?),
        &signed_pow(ring, &nrd, orientation.delta as i64)?,
    );
    Ok(CocycleValue {
        r,
        jac,
        linear,
        nrd,
        target: lift.target,
    })
}

/// Fixes (ε, δ) on a central unit t, where jac_X = 1, c = t and nrd = t^n.
/// That forces ε = −δ; the sign ε = −1 is the one for ω, the dual of the Lie
/// algebra on which c acts.
pub fn calibrate_orientation(ring: &RingSpec, t: i128, s: u32, prec: u32) -> Result<Orientation> {
    let tt = EndoElement::from_int(ring, t);
    if !tt.is_central(ring) || !tt.is_unit(ring) {
        return Err(Error::Degenerate("calibration needs a central unit".into()));
    }
    let a = DeformationPoint::zero(ring.degree());
    let mut found = vec![];
    for &(eps, delta) in &[(-1, 1), (1, -1), (1, 1), (-1, -1)] {
        let o = Orientation { eps, delta };
        let v = cocycle_value(ring, &tt, &a, o, s, prec)?;
        if ring.k_sub(&v.r, &ring.k_one()).valuation() >= prec as i64 - s as i64 - 2 {
            found.push(o);
        }
    }
    found
        .into_iter()
        .find(|o| o.eps == -1)
        .ok_or_else(|| Error::Degenerate("no orientation trivializes central units".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    /// v(r(T₁T₂, a) − r(T₁, T₂·a)·r(T₂, a)).
    pub identity_residual: i64,
    /// v(r(T₁, a) − 1) when T₁ fixes a.
    pub fixed_residual: Option<i64>,
}

pub fn canonical_cocycle_check(
    ring: &RingSpec,
    t1: &EndoElement,
    t2: &EndoElement,
    a: &DeformationPoint,
    orientation: Orientation,
    s: u32,
    prec: u32,
) -> Result<CocycleReport> {
    let r2 = cocycle_value(ring, t2, a, orientation, s, prec)?;
    let r1b = cocycle_value(ring, t1, &r2.target, orientation, s, prec)?;
    let r12 = cocycle_value(ring, &endo::mul(ring, t1, t2), a, orientation, s, prec)?;
    let identity_residual = ring.k_sub(&r12.r, &ring.k_mul(&r1b.r, &r2.r)).valuation();
    let r1 = cocycle_value(ring, t1, a, orientation, s, prec)?;
    let fixed = r1
        .target
        .coords
        .iter()
        .zip(&a.coords)
        .all(|(x, y)| ring.truncate(x, prec) == ring.truncate(y, prec));
    Ok(CocycleReport {
        identity_residual,
        fixed_residual: fixed.then(|| ring.k_sub(&r1.r, &ring.k_one()).valuation()),
    })
}

/// The natural action on period coordinates, matrix(T)^{-1}. Fitted matrices
/// agree with it up to scalar and a fixed change of basis.
pub fn natural_action(ring: &RingSpec, t: &EndoElement) -> Result<KMatrix> {
    endo::matrix(ring, t).inverse(ring)
}

/// The period-side isogeny predicate Φ(b) = M·Φ(a), projectively, with its
/// residual valuation.
pub fn isogeny_predicate(
    ring: &RingSpec,
    m: &KMatrix,
    a: &DeformationPoint,
    b: &DeformationPoint,
    digits: u32,
    m_max: usize,
) -> Result<(bool, i64)> {
    let (x, _) = period_point(ring, a, digits, m_max)?;
    let (y, _) = period_point(ring, b, digits, m_max)?;
    let r = proj_residual(ring, &m.mul_vec(ring, &x.coords), &y.coords)?;
    Ok((r >= digits as i64, r))
}
