//! Verification suites. Each check turns a [`RunConfig`] into a
//! [`CheckRecord`]; all sampling is seeded from the config.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::chromatic;
use crate::config::{RunConfig, Suite};
use crate::deform::{isogeny_check, LiftOptions, Verdict as LiftVerdict};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fgl::endo::{self, EndoElement};
use crate::fgl::{DeformationPoint, UniversalDeformation};
use crate::padic::{make_ring, PadicValue, RingSpec, WittElement};
use crate::period::{
    bracket_check, calibrate_orientation, canonical_cocycle_check, equivariance_fit, isogeny_predicate,
    jacobian_phi, lie_derivative, natural_action, period_point, proj_residual, PeriodOptions,
};
use crate::report::{CheckRecord, Report, Verdict};
use crate::series::{SeriesRing, TruncatedSeries};

/// Residual valuation demanded of fitted matrices, cocycles and fixed points.
pub const RESIDUAL_TOL: i64 = 6;

/// Minimum number of points sampled for the étale check.
pub const ETALE_POINTS: usize = 20;

/// Points used for the derivation identities.
pub const DERIVATION_POINTS: usize = 5;

/// Random (T₁, T₂, a) triples in the cocycle check.
pub const COCYCLE_TRIPLES: usize = 10;

/// Extra digits carried while differentiating, beyond the configured precision.
pub const DERIVATION_GUARD: u32 = 10;

pub fn witt_json(ring: &RingSpec, w: &WittElement) -> Value {
    json!(w.coords(ring.degree()).iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

pub fn point_json(ring: &RingSpec, a: &DeformationPoint) -> Value {
    json!(a.coords.iter().map(|c| witt_json(ring, c)).collect::<Vec<_>>())
}

pub fn endo_json(ring: &RingSpec, t: &EndoElement) -> Value {
    json!(t.a.iter().map(|c| witt_json(ring, c)).collect::<Vec<_>>())
}

pub fn padic_json(ring: &RingSpec, x: &PadicValue) -> Value {
    if x.is_zero() {
        return json!({ "zero_to": x.valuation() });
    }
    json!({
        "val": x.valuation(),
        "unit": witt_json(ring, x.unit()),
        "rel": x.relative_precision(),
    })
}

/// Parses comma-separated integers as a point with coordinates in pZ_p ⊂ pW.
pub fn parse_point(ring: &RingSpec, text: &str) -> Result<DeformationPoint> {
    let n = ring.degree();
    let text = text.trim();
    if text == "0" || text.is_empty() {
        return Ok(DeformationPoint::zero(n));
    }
    let coords = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i128>()
                .map(|v| ring.from_int(v))
                .map_err(|_| Error::Config(format!("bad coordinate '{s}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    DeformationPoint::new(ring, coords)
}

fn rng(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn base_params(cfg: &RunConfig) -> Value {
    json!({ "p": cfg.p, "n": cfg.n, "precision": cfg.precision, "seed": cfg.seed })
}

fn with(mut v: Value, extra: Value) -> Value {
    if let (Some(a), Some(b)) = (v.as_object_mut(), extra.as_object()) {
        for (k, x) in b {
            a.insert(k.clone(), x.clone());
        }
    }
    v
}

fn error_verdict(e: &Error) -> Verdict {
    match e {
        Error::Integrality { .. } => Verdict::Fail,
        _ => Verdict::Inconclusive,
    }
}

fn timed(mut f: impl FnMut(&mut CheckRecord) -> Result<()>, mut rec: CheckRecord) -> CheckRecord {
    let start = Instant::now();
    if let Err(e) = f(&mut rec) {
        let inputs = rec.params.clone();
        rec.fail_with(error_verdict(&e), e.to_string(), inputs);
    }
    rec.runtime_ms = start.elapsed().as_millis() as u64;
    rec
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn sample_points(ring: &RingSpec, count: usize, rng: &mut ChaCha8Rng) -> Vec<DeformationPoint> {
    (0..count).map(|_| DeformationPoint::random(ring, rng)).collect()
}

/// Teichmüller lifts of the first `count` elements of F_{p^n}^× outside F_p.
pub fn torus_elements(ring: &RingSpec, count: usize) -> Vec<EndoElement> {
    let p = ring.p();
    let n = ring.degree();
    let mut out = vec![];
    let total = (p as usize).pow(n as u32);
    for idx in 0..total {
        let mut digits = vec![0u64; n];
        let mut r = idx;
        for d in digits.iter_mut() {
            *d = (r % p as usize) as u64;
            r /= p as usize;
        }
        if digits[1..].iter().all(|&d| d == 0) {
            continue;
        }
        out.push(EndoElement::teichmuller(ring, &digits));
        if out.len() == count {
            break;
        }
    }
    out
}

fn small_unit(p: u64) -> i128 {
    if p == 2 {
        3
    } else {
        2
    }
}

/// Integrality of F and [p]_F and the height of [p]_F mod (p, u).
pub fn fgl_check(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let params = with(
        base_params(cfg),
        json!({ "caps": cfg.caps(), "corrupt_log": cfg.corrupt_log }),
    );
    timed(
        |rec| {
            let mut ud = UniversalDeformation::new(cfg.p, cfg.n, cfg.caps(), cfg.precision)?;
            if let Some(k) = cfg.corrupt_log {
                if k == 0 || k >= ud.log_count() {
                    return Err(Error::Config(format!("corrupt_log must lie in 1..{}", ud.log_count())));
                }
                ud.corrupt_log(k, 1);
            }
            let r = ud.check(exec)?;
            let params = rec.params.clone();
            rec.case(pass_if(r.passed()), r.leading_degree.map_or(-1, |d| d as i64), || {
                json!({ "params": params, "first_violation": r.first_violation })
            });
            rec.detail = json!({ "check": r, "log_digest": ud.digest()? });
            Ok(())
        },
        CheckRecord::new("fgl_check", params),
    )
}

/// Ratio limits at random points of pW converge to the requested digits.
pub fn convergence_check(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let params = with(
        base_params(cfg),
        json!({ "digits": cfg.digits, "m_max": cfg.m_max, "samples": cfg.samples }),
    );
    timed(
        |rec| {
            let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
            let pts = sample_points(&ring, cfg.samples, &mut rng(cfg, 2));
            let out = exec.map(&pts, |a| period_point(&ring, a, cfg.digits, cfg.m_max));
            let mut steps = vec![];
            for (a, r) in pts.iter().zip(out) {
                let (x, rep) = r?;
                let gains_ok = rep.gains.first().map_or(true, |&g| g >= 1)
                    && rep.min_increment(cfg.digits as i64).map_or(true, |g| g >= 1);
                let ok = rep.converged && x.precision >= cfg.digits as i64 && gains_ok;
                rec.case(pass_if(ok), x.precision, || point_json(&ring, a));
                steps.push(rep.steps);
            }
            rec.detail = json!({ "steps": steps });
            Ok(())
        },
        CheckRecord::new("period_convergence", params),
    )
}

/// Fits T's projective action on period points and validates it on held-out
/// samples, for torus and random units.
pub fn equivariance_check(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let params = with(base_params(cfg), json!({ "digits": cfg.digits, "holdout": 3 }));
    timed(
        |rec| {
            if cfg.n == 1 {
                rec.detail = json!("height one: the period domain is a point");
                return Ok(());
            }
            let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
            let mut g = rng(cfg, 3);
            let mut units = torus_elements(&ring, 2);
            units.push(EndoElement::random_unit(&ring, &mut g));
            units.push(EndoElement::random_unit(&ring, &mut g));
            let pts = sample_points(&ring, cfg.n + 4, &mut g);
            let opts = PeriodOptions::for_ring(&ring);
            let mut detail = vec![];
            for t in &units {
                if t.is_central(&ring) {
                    continue;
                }
                let fit = equivariance_fit(&ring, t, &pts, &opts, exec)?;
                let hold = fit.holdout_residuals.iter().copied().min().unwrap_or(i64::MAX);
                let r = hold.min(fit.charpoly_residual);
                rec.case(pass_if(r >= RESIDUAL_TOL), r, || {
                    json!({ "t": endo_json(&ring, t), "points": pts.iter().map(|a| point_json(&ring, a)).collect::<Vec<_>>() })
                });
                detail.push(json!({
                    "t": endo_json(&ring, t),
                    "holdout": fit.holdout_residuals,
                    "charpoly": fit.charpoly_residual,
                }));
            }
            rec.detail = json!(detail);
            Ok(())
        },
        CheckRecord::new("equivariance", params),
    )
}

fn offset_exponent(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

/// The Jacobian of Φ is invertible at 0 and at random points.
pub fn etale_check(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let count = cfg.samples.max(ETALE_POINTS);
    let params = with(base_params(cfg), json!({ "digits": cfg.digits, "points": count }));
    timed(
        |rec| {
            let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
            let mut pts = vec![DeformationPoint::zero(cfg.n)];
            pts.extend(sample_points(&ring, count - 1, &mut rng(cfg, 4)));
            let s = offset_exponent(cfg.p);
            let out = exec.map(&pts, |a| jacobian_phi(&ring, a, s, cfg.digits, cfg.m_max));
            for (a, j) in pts.iter().zip(out) {
                let j = j?;
                rec.case(pass_if(j.etale), j.det.valuation(), || point_json(&ring, a));
            }
            Ok(())
        },
        CheckRecord::new("etale", params),
    )
}

/// Φ(0) is the base point [1 : 0 : …] and is fixed by fitted torus actions.
pub fn fixed_point_check(cfg: &RunConfig, exec: Exec) -> CheckRecord {
    let params = with(base_params(cfg), json!({ "digits": cfg.digits }));
    timed(
        |rec| {
            if cfg.n == 1 {
                rec.detail = json!("height one: the period domain is a point");
                return Ok(());
            }
            let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
            let zero = DeformationPoint::zero(cfg.n);
            let (x0, _) = period_point(&ring, &zero, cfg.digits, cfg.m_max)?;
            let off = x0.coords[1..].iter().map(|c| c.valuation()).min().unwrap_or(i64::MAX);
            let base = x0.chart == 0 && off >= cfg.digits as i64;
            rec.case(pass_if(base), off, || json!({ "point": "0" }));
            let pts = sample_points(&ring, cfg.n + 4, &mut rng(cfg, 5));
            let opts = PeriodOptions::for_ring(&ring);
            for t in torus_elements(&ring, 3) {
                let fit = equivariance_fit(&ring, &t, &pts, &opts, exec)?;
                let image = fit.matrix.mul_vec(&ring, &x0.coords);
                let r = proj_residual(&ring, &image, &x0.coords)?;
                rec.case(pass_if(r >= RESIDUAL_TOL), r, || json!({ "t": endo_json(&ring, &t) }));
            }
            rec.detail = json!({ "phi0": x0.coords.iter().map(|c| padic_json(&ring, c)).collect::<Vec<_>>() });
            Ok(())
        },
        CheckRecord::new("fixed_point", params),
    )
}

fn coordinate_series(ring: &Arc<RingSpec>) -> TruncatedSeries {
    let sr = SeriesRing::new(ring.clone(), ring.degree() - 1, 6, 1);
    TruncatedSeries::u(&sr, 0)
}

/// Lie derivatives along p·O_D: Cauchy difference quotients, the Leibniz
/// rule and the bracket relation, to precision − 2 digits.
pub fn derivation_check(cfg: &RunConfig, _exec: Exec) -> CheckRecord {
    let work = cfg.precision + DERIVATION_GUARD;
    let params = with(base_params(cfg), json!({ "working_precision": work, "points": DERIVATION_POINTS }));
    timed(
        |rec| {
            if cfg.n == 1 {
                rec.detail = json!("height one: no deformation parameters");
                return Ok(());
            }
            let ring = Arc::new(make_ring(cfg.p, cfg.n, work)?);
            let opts = PeriodOptions::for_ring(&ring);
            let tol = cfg.precision as i64 - 2;
            let f = coordinate_series(&ring);
            let f2 = f.mul(&f)?;
            let mut g = rng(cfg, 6);
            let mut diffs = vec![];
            for _ in 0..DERIVATION_POINTS {
                let a = DeformationPoint::random(&ring, &mut g);
                let gamma = endo::mul_p_pow(&ring, &EndoElement::random_unit(&ring, &mut g), 1);
                let delta = endo::mul_p_pow(&ring, &EndoElement::random_unit(&ring, &mut g), 1);
                let inputs = || {
                    json!({
                        "a": point_json(&ring, &a),
                        "gamma": endo_json(&ring, &gamma),
                        "delta": endo_json(&ring, &delta),
                    })
                };
                let d1 = lie_derivative(&gamma, &f, &a, 2..=6, &opts)?;
                let cauchy_floor = d1.diff_valuations.first().copied().unwrap_or(0);
                rec.case(pass_if(d1.cauchy), cauchy_floor, inputs);
                let d2 = lie_derivative(&gamma, &f2, &a, 2..=6, &opts)?;
                let two_a = ring.k_from_witt(&ring.mul_int(&a.coords[0], 2));
                let leibniz = ring.k_sub(&d2.value, &ring.k_mul(&two_a, &d1.value)).valuation();
                rec.case(pass_if(leibniz >= tol), leibniz, inputs);
                let br = bracket_check(&gamma, &delta, &f, &a, 3, 3..=7, &opts)?;
                rec.case(pass_if(br.residual >= tol), br.residual, inputs);
                diffs.push(d1.diff_valuations);
            }
            rec.detail = json!({ "difference_valuations": diffs });
            Ok(())
        },
        CheckRecord::new("derivation", params),
    )
}

/// The cocycle r(T, a), after calibration on a central unit: the cocycle
/// identity on random triples and r(T, 0) = 1 for torus elements.
pub fn canonical_check(cfg: &RunConfig, _exec: Exec) -> CheckRecord {
    let prec = cfg.precision;
    let params = with(base_params(cfg), json!({ "triples": COCYCLE_TRIPLES }));
    timed(
        |rec| {
            let ring = make_ring(cfg.p, cfg.n, prec + 2)?;
            let s = 2;
            let o = calibrate_orientation(&ring, small_unit(cfg.p), s, prec)?;
            let mut g = rng(cfg, 7);
            for _ in 0..COCYCLE_TRIPLES {
                let t1 = EndoElement::random_unit(&ring, &mut g);
                let t2 = EndoElement::random_unit(&ring, &mut g);
                let a = DeformationPoint::random(&ring, &mut g);
                let r = canonical_cocycle_check(&ring, &t1, &t2, &a, o, s, prec)?;
                rec.case(pass_if(r.identity_residual >= RESIDUAL_TOL), r.identity_residual, || {
                    json!({ "t1": endo_json(&ring, &t1), "t2": endo_json(&ring, &t2), "a": point_json(&ring, &a) })
                });
            }
            let zero = DeformationPoint::zero(cfg.n);
            let one = EndoElement::one(&ring);
            for t in torus_elements(&ring, 3) {
                let r = canonical_cocycle_check(&ring, &t, &one, &zero, o, s, prec)?;
                let v = r.fixed_residual.unwrap_or(-1);
                rec.case(pass_if(v >= RESIDUAL_TOL), v, || json!({ "t": endo_json(&ring, &t), "a": "0" }));
            }
            rec.detail = json!({ "orientation": o });
            Ok(())
        },
        CheckRecord::new("canonical", params),
    )
}

/// The lifting criterion against the period-side predicate on cases with
/// known answers.
pub fn isogeny_suite(cfg: &RunConfig, _exec: Exec) -> CheckRecord {
    let k = cfg.digits.min(cfg.precision.saturating_sub(3)).max(1);
    let params = with(base_params(cfg), json!({ "levels": k, "digits": cfg.digits }));
    timed(
        |rec| {
            let ring = make_ring(cfg.p, cfg.n, cfg.precision)?;
            let a = DeformationPoint::random(&ring, &mut rng(cfg, 8));
            let zero = DeformationPoint::zero(cfg.n);
            let mut cases = vec![
                ("p", EndoElement::from_int(&ring, cfg.p as i128), a.clone(), true),
                ("unit", EndoElement::from_int(&ring, small_unit(cfg.p)), a.clone(), true),
            ];
            if cfg.n > 1 {
                cases.push(("pi", EndoElement::pi(&ring), zero, false));
            }
            let opts = LiftOptions::new(k);
            let mut detail = vec![];
            for (name, t, pt, expected) in &cases {
                let lift = isogeny_check(&ring, t, pt, pt, &opts)?;
                let m = natural_action(&ring, t)?;
                let (period_side, r) = if cfg.n > 1 {
                    isogeny_predicate(&ring, &m, pt, pt, cfg.digits, cfg.m_max)?
                } else {
                    (true, i64::from(cfg.digits))
                };
                let verdict = match lift.verdict {
                    LiftVerdict::Inconclusive => Verdict::Inconclusive,
                    v => pass_if(((v == LiftVerdict::Liftable) == period_side) && period_side == *expected),
                };
                rec.case(verdict, r, || {
                    json!({ "case": name, "t": endo_json(&ring, t), "a": point_json(&ring, pt) })
                });
                detail.push(json!({ "case": name, "lift": lift, "period": period_side }));
            }
            rec.detail = json!(detail);
            Ok(())
        },
        CheckRecord::new("isogeny", params),
    )
}

/// α as a compatible inverse system and its agreement with dualizing degrees.
pub fn chromatic_check(cfg: &RunConfig, _exec: Exec) -> CheckRecord {
    let n = cfg.n as u32;
    let params = json!({ "p": cfg.p, "n": n, "levels": cfg.levels, "M": cfg.m });
    timed(
        |rec| {
            let a = chromatic::alpha(cfg.p, n, cfg.levels)?;
            let stab: Vec<i64> = a.residues.iter().map(|r| r.stabilized_at as i64).collect();
            rec.case(pass_if(a.is_compatible()), a.levels() as i64, || json!({ "alpha": a }));
            for m in 0..=cfg.m {
                let bad = chromatic::dualizing_mismatches(&a, m)?;
                rec.case(pass_if(bad.is_empty()), m as i64, || json!({ "M": m, "levels": bad }));
            }
            let degrees: Vec<String> = (0..=cfg.m)
                .map(|m| chromatic::dualizing_degree(cfg.p, n, m).map(|d| d.to_string()))
                .collect::<Result<_>>()?;
            rec.detail = json!({ "alpha": a, "stabilized_at": stab, "dualizing_degrees": degrees });
            Ok(())
        },
        CheckRecord::new("chromatic", params),
    )
}

pub fn run_suite(s: Suite, cfg: &RunConfig, exec: Exec) -> CheckRecord {
    match s {
        Suite::Fgl => fgl_check(cfg, exec),
        Suite::Convergence => convergence_check(cfg, exec),
        Suite::Equivariance => equivariance_check(cfg, exec),
        Suite::Etale => etale_check(cfg, exec),
        Suite::FixedPoint => fixed_point_check(cfg, exec),
        Suite::Derivation => derivation_check(cfg, exec),
        Suite::Canonical => canonical_check(cfg, exec),
        Suite::Isogeny => isogeny_suite(cfg, exec),
        Suite::Chromatic => chromatic_check(cfg, exec),
    }
}

/// Runs the selected suites in order. The report verdict is the worst one.
pub fn suite_all(cfg: &RunConfig, exec: Exec) -> Report {
    let mut report = Report::new(cfg.clone());
    for &s in &cfg.suites {
        report.records.push(run_suite(s, cfg, exec));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_elements_are_noncentral_units() {
        let ring = make_ring(3, 2, 8).unwrap();
        let ts = torus_elements(&ring, 3);
        assert_eq!(ts.len(), 3);
        for t in &ts {
            assert!(t.is_unit(&ring) && !t.is_central(&ring));
        }
        let ring = make_ring(2, 2, 8).unwrap();
        assert_eq!(torus_elements(&ring, 3).len(), 2);
    }

    #[test]
    fn points_parse() {
        let ring = make_ring(3, 3, 8).unwrap();
        assert_eq!(parse_point(&ring, "0").unwrap(), DeformationPoint::zero(3));
        let a = parse_point(&ring, "3, -9").unwrap();
        assert_eq!(a.coords[1], ring.from_int(-9));
        assert!(parse_point(&ring, "1,3").is_err());
        assert!(parse_point(&ring, "3").is_err());
        assert!(parse_point(&ring, "x,3").is_err());
    }

    #[test]
    fn errors_become_inconclusive() {
        let mut cfg = RunConfig::new(3, 2);
        cfg.corrupt_log = Some(99);
        let rec = fgl_check(&cfg, Exec::Sequential);
        assert_eq!(rec.verdict, Verdict::Inconclusive);
        assert!(rec.reproduce.is_some());
    }

    #[test]
    fn height_one_suites_are_trivial() {
        let mut cfg = RunConfig::new(5, 1);
        cfg.samples = 3;
        for s in [Suite::Equivariance, Suite::FixedPoint, Suite::Derivation, Suite::Isogeny, Suite::Chromatic] {
            assert_eq!(run_suite(s, &cfg, Exec::Sequential).verdict, Verdict::Pass, "{s:?}");
        }
    }
}
