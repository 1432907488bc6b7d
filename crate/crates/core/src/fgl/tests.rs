use super::dense::{self, Uni};
use super::endo::{self, EndoElement};
use super::honda::Honda;
use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_caps(dx: u32, dxy: u32) -> Caps {
    Caps { du: 6, dx, dxy }
}

#[test]
fn second_log_coefficient() {
    for &p in &[2u64, 3, 5] {
        let ud = build_universal_log(p, 2, 3, small_caps((p * p) as u32, 9), 12).unwrap();
        let k = ud.field();
        let l1 = ud.log(1);
        assert_eq!(l1.len(), 1);
        assert_eq!(l1.coeff(&Monomial::new(&[1], 0)), Some(k.k_p_pow(-1)));
        let l2 = ud.log(2);
        assert_eq!(l2.len(), 2);
        let top = Monomial::new(&[1 + p as u32], 0);
        if 1 + p as u32 <= 6 {
            assert_eq!(l2.coeff(&top), Some(k.k_p_pow(-2)));
        }
        assert_eq!(l2.coeff(&Monomial::new(&[0], 0)), Some(k.k_p_pow(-1)));
    }
}

#[test]
fn height_one_logs_are_geometric() {
    let ud = build_universal_log(3, 1, 4, small_caps(27, 9), 10).unwrap();
    for m in 0..4 {
        let l = ud.log(m);
        assert_eq!(l.len(), 1);
        assert_eq!(l.coeff(&Monomial::new(&[], 0)), Some(ud.field().k_p_pow(-(m as i64))));
    }
}

#[test]
fn rejects_short_log() {
    assert!(build_universal_log(3, 3, 2, small_caps(27, 9), 8).is_err());
    assert!(matches!(
        build_universal_log(3, 2, 5, small_caps(27, 9), 8),
        Err(Error::Caps(_))
    ));
}

#[test]
fn integral_logs_match_series_logs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(p, n) in &[(3u64, 2usize), (2, 3), (5, 2)] {
        let ud = build_universal_log(p, n, 4, Caps { du: 40, dx: (p as u32).pow(3), dxy: 9 }, 10).unwrap();
        let k = ud.field().clone();
        let a = DeformationPoint::random(&k, &mut rng);
        let direct = logs_at(&k, &a, 4);
        let integral = integral_logs_at(&k, &a, 4);
        for m in 0..4 {
            let ev = ud.log(m).evaluate(&a.coords).unwrap();
            let diff = k.k_sub(&ev.value, &direct[m]);
            assert!(diff.is_zero() || diff.valuation() >= ev.truncation_valuation.min(10 - m as i64 - 1));
            let scaled = k.k_shift(&direct[m], m as i64);
            assert!(k.k_sub(&scaled, &k.k_from_witt(&integral[m])).valuation() >= 10 - m as i64 - 1);
        }
    }
}

#[test]
fn integrality_and_height_small() {
    for &(p, n, dx, dxy) in &[(2u64, 2usize, 64u32, 20u32), (3, 2, 243, 19), (2, 3, 64, 17), (5, 1, 625, 11)] {
        let ud = UniversalDeformation::new(p, n, small_caps(dx, dxy), 6).unwrap();
        let r = ud.check(Exec::default()).unwrap();
        assert!(r.passed(), "p={p} n={n}: {r:?}");
        assert_eq!(r.leading_degree, Some((p as usize).pow(n as u32)));
    }
}

#[test]
fn group_law_unit_and_symmetry() {
    let ud = UniversalDeformation::new(3, 2, small_caps(27, 19), 6).unwrap();
    let c = ud.group_law(Exec::Sequential).unwrap();
    let alg = &c.alg;
    let s = &c.series;
    assert_eq!(s.bi_coeff(1, 0), &alg.one());
    assert_eq!(s.bi_coeff(0, 1), &alg.one());
    for d in 2..=19 {
        assert!(alg.is_zero(s.bi_coeff(d, 0)));
        for i in 0..=d {
            assert_eq!(s.bi_coeff(i, d - i), s.bi_coeff(d - i, i));
        }
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let ud = UniversalDeformation::new(3, 2, small_caps(81, 19), 6).unwrap();
    let a = ud.p_series(Exec::Sequential).unwrap();
    let b = ud.p_series(Exec::Parallel).unwrap();
    assert_eq!(a.series, b.series);
    let a = ud.group_law(Exec::Sequential).unwrap();
    let b = ud.group_law(Exec::Parallel).unwrap();
    assert_eq!(a.series, b.series);
}

#[test]
fn corrupted_log_is_not_integral() {
    let mut ud = UniversalDeformation::new(3, 2, small_caps(81, 19), 6).unwrap();
    ud.corrupt_log(2, 1);
    let r = ud.check(Exec::default()).unwrap();
    assert!(!r.passed());
    assert!(!r.integral_group_law);
    assert!(r.first_violation.is_some());
    assert!(matches!(ud.group_law(Exec::default()), Err(Error::Integrality { .. })));
}

#[test]
fn digest_is_stable() {
    let a = UniversalDeformation::new(3, 2, small_caps(27, 9), 6).unwrap();
    let b = UniversalDeformation::new(3, 2, small_caps(27, 9), 6).unwrap();
    assert_eq!(a.digest().unwrap(), b.digest().unwrap());
    let mut c = b.clone();
    c.corrupt_log(2, 1);
    assert_ne!(a.digest().unwrap(), c.digest().unwrap());
}

fn random_uni(ring: &RingSpec, cap: usize, rng: &mut ChaCha8Rng) -> Uni {
    let mut f = dense::uni_zero(cap);
    for c in f.iter_mut().skip(1) {
        *c = ring.random_element(rng);
    }
    f
}

#[test]
fn specialized_law_is_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ring = Arc::new(make_ring(3, 2, 6).unwrap());
    let a = DeformationPoint::random(&ring, &mut rng);
    let cap = 12;
    let g = specialize(&ring, &a, cap, Exec::default()).unwrap();
    let f = g.law_dense();
    let (x, y, z) = (
        random_uni(&ring, cap, &mut rng),
        random_uni(&ring, cap, &mut rng),
        random_uni(&ring, cap, &mut rng),
    );
    let left = dense::bi_apply(&ring, &f, &dense::bi_apply(&ring, &f, &x, &y, cap), &z, cap);
    let right = dense::bi_apply(&ring, &f, &x, &dense::bi_apply(&ring, &f, &y, &z, cap), cap);
    assert_eq!(dense::uni_distance(&ring, &left, &right), ring.precision());
}

#[test]
fn multiplication_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ring = Arc::new(make_ring(2, 2, 6).unwrap());
    let a = DeformationPoint::random(&ring, &mut rng);
    let cap = 10;
    let g = specialize(&ring, &a, cap, Exec::default()).unwrap();
    let f = g.law_dense();
    let c = ring.random_element(&mut rng);
    let phi: Uni = g.multiply(&c, Exec::default()).unwrap().iter().map(|v| ring.reduce_from(v)).collect();
    let lhs = dense::uni_of_bi(&ring, &phi, &f, cap);
    let rhs = dense::bi_of_uni(&ring, &f, &phi, cap);
    assert_eq!(dense::bi_distance(&ring, &lhs, &rhs), ring.precision());
    let two = g.multiply(&ring.from_int(2), Exec::default()).unwrap();
    let x = dense::uni_x(&ring, cap);
    let doubled = dense::bi_apply(&ring, &f, &x, &x, cap);
    let two: Uni = two.iter().map(|v| ring.reduce_from(v)).collect();
    assert_eq!(dense::uni_distance(&ring, &two, &doubled), ring.precision());
}

#[test]
fn specialize_rejects_units() {
    let ring = Arc::new(make_ring(3, 2, 6).unwrap());
    let a = DeformationPoint { coords: vec![ring.one()] };
    assert!(matches!(specialize(&ring, &a, 9, Exec::default()), Err(Error::OutsideDisc(0))));
    assert!(DeformationPoint::new(&ring, vec![ring.one()]).is_err());
}

fn x_power(ring: &RingSpec, cap: usize, d: usize) -> Uni {
    let mut f = dense::uni_zero(cap);
    f[d] = ring.one();
    f
}

#[test]
fn honda_endomorphisms() {
    for &(p, n) in &[(3u64, 2usize), (2, 3), (2, 2)] {
        let ring = make_ring(p, n, 6).unwrap();
        let cap = (p as usize).pow(n as u32 + 1);
        let h = Honda::new(&ring, cap, Exec::default()).unwrap();
        let r = &h.residue;
        let pi = EndoElement::pi(&ring);
        assert_eq!(h.endo_series(&pi, Exec::default()).unwrap(), x_power(r, cap, p as usize));
        let pn = endo::pow(&ring, &pi, n as u64);
        let xq = x_power(r, cap, (p as usize).pow(n as u32));
        assert_eq!(h.endo_series(&pn, Exec::default()).unwrap(), xq);
        let w = ring.omega();
        let mut lin = dense::uni_zero(cap);
        lin[1] = r.reduce_from(&w);
        let tw = EndoElement::scalar(&ring, w);
        assert_eq!(h.endo_series(&tw, Exec::default()).unwrap(), lin);
    }
}

#[test]
fn endo_series_respects_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for &(p, n, cap) in &[(3u64, 2usize, 27usize), (2, 2, 16)] {
        let ring = make_ring(p, n, 6).unwrap();
        let h = Honda::new(&ring, cap, Exec::default()).unwrap();
        for _ in 0..20 {
            let s = EndoElement {
                a: (0..n).map(|_| ring.random_element(&mut rng)).collect(),
            };
            let t = EndoElement::random_unit(&ring, &mut rng);
            let fs = h.endo_series(&s, Exec::default()).unwrap();
            let ft = h.endo_series(&t, Exec::default()).unwrap();
            let fst = h.endo_series(&endo::mul(&ring, &s, &t), Exec::default()).unwrap();
            assert_eq!(h.compose(&fs, &ft), fst);
            let sum = h.endo_series(&endo::add(&ring, &s, &t), Exec::default()).unwrap();
            assert_eq!(h.sum(&fs, &ft), sum);
            assert_eq!(h.endo_series_digits(&ring, &s), fs);
        }
    }
}
