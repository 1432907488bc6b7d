use lubin_tate::chromatic::{alpha, dualizing_degree, dualizing_mismatches};
use lubin_tate::config::{RunConfig, Suite};
use lubin_tate::deform::{lift_automorphism, LiftOptions};
use lubin_tate::fgl::endo::{self, EndoElement};
use lubin_tate::fgl::DeformationPoint;
use lubin_tate::kmat::KMatrix;
use lubin_tate::padic::{make_ring, RingSpec};
use lubin_tate::period::{period_point, proj_residual};
use lubin_tate::report::Verdict;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SHAPES: [(u64, usize); 5] = [(2, 2), (3, 2), (5, 2), (2, 3), (3, 3)];

fn shape() -> impl Strategy<Value = (u64, usize)> {
    prop::sample::select(SHAPES.to_vec())
}

fn close(ring: &RingSpec, a: &KMatrix, b: &KMatrix, digits: i64) -> bool {
    let d = a.sub(ring, b);
    (0..d.rows()).all(|i| (0..d.cols()).all(|j| d.get(i, j).valuation() >= digits))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_is_multiplicative((p, n) in shape(), seed in any::<u64>()) {
        let ring = make_ring(p, n, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = EndoElement { a: (0..n).map(|_| ring.random_element(&mut rng)).collect() };
        let t = EndoElement { a: (0..n).map(|_| ring.random_element(&mut rng)).collect() };
        let st = endo::matrix(&ring, &endo::mul(&ring, &s, &t));
        let prod = endo::matrix(&ring, &s).mul(&ring, &endo::matrix(&ring, &t));
        prop_assert!(close(&ring, &st, &prod, 10));
        let nst = endo::reduced_norm(&ring, &endo::mul(&ring, &s, &t));
        let nprod = ring.k_mul(&endo::reduced_norm(&ring, &s), &endo::reduced_norm(&ring, &t));
        prop_assert!(ring.k_sub(&nst, &nprod).valuation() >= 10);
    }

    #[test]
    fn order_is_associative((p, n) in shape(), seed in any::<u64>()) {
        let ring = make_ring(p, n, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || EndoElement { a: (0..n).map(|_| ring.random_element(&mut rng)).collect() };
        let (r, s, t) = (draw(), draw(), draw());
        let left = endo::mul(&ring, &endo::mul(&ring, &r, &s), &t);
        let right = endo::mul(&ring, &r, &endo::mul(&ring, &s, &t));
        prop_assert_eq!(left, right);
        let dist = endo::mul(&ring, &r, &endo::add(&ring, &s, &t));
        let split = endo::add(&ring, &endo::mul(&ring, &r, &s), &endo::mul(&ring, &r, &t));
        prop_assert_eq!(dist, split);
    }

    #[test]
    fn frobenius_and_teichmuller((p, n) in shape(), seed in any::<u64>()) {
        let ring = make_ring(p, n, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ring.random_element(&mut rng);
        let b = ring.random_element(&mut rng);
        prop_assert_eq!(ring.frobenius(&ring.mul(&a, &b)), ring.mul(&ring.frobenius(&a), &ring.frobenius(&b)));
        prop_assert_eq!(ring.frobenius_pow(&a, n as i64), a);
        let (ta, tb) = (ring.teichmuller_of(&a), ring.teichmuller_of(&b));
        prop_assert_eq!(ring.mul(&ta, &tb), ring.teichmuller_of(&ring.mul(&a, &b)));
        prop_assert_eq!(ring.frobenius(&ta), ring.pow(&ta, p as u128));
    }

    #[test]
    fn field_division_round_trips((p, n) in shape(), seed in any::<u64>(), shift in -5i64..5) {
        let ring = make_ring(p, n, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ring.k_shift(&ring.k_from_witt(&ring.random_element(&mut rng)), shift);
        let y = ring.k_from_witt(&ring.random_element(&mut rng));
        prop_assume!(!y.is_zero() && !x.is_zero());
        let q = ring.k_div(&x, &y).unwrap();
        let back = ring.k_mul(&q, &y);
        let rel = x.relative_precision().min(y.relative_precision()) as i64;
        prop_assert!(ring.k_sub(&back, &x).valuation() >= x.valuation() + rel);
    }

    #[test]
    fn alpha_is_an_inverse_system(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
        n in 1u32..=3,
        levels in 1u32..=8,
    ) {
        let a = alpha(p, n, levels).unwrap();
        prop_assert!(a.is_compatible());
        for m in 0..4 {
            prop_assert!(dualizing_mismatches(&a, m).unwrap().is_empty());
            let step = BigUint::from(2u32) * BigUint::from(p).pow(n * m) * (BigUint::from(p).pow(n) - 1u32);
            let diff = dualizing_degree(p, n, m + 1).unwrap() - dualizing_degree(p, n, m).unwrap();
            prop_assert_eq!(diff % step, BigUint::from(0u32));
        }
    }

    #[test]
    fn config_text_round_trips(
        (p, n) in shape(),
        seed in any::<u64>(),
        samples in 1usize..50,
        mask in 1u16..512,
    ) {
        let mut c = RunConfig::new(p, n);
        c.seed = seed;
        c.samples = samples;
        c.suites = Suite::ALL.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| *s).collect();
        prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn worst_verdict_is_order_free(v in prop::collection::vec(0u8..3, 0..6)) {
        let verdicts: Vec<Verdict> = v.iter().map(|x| [Verdict::Pass, Verdict::Inconclusive, Verdict::Fail][*x as usize]).collect();
        let mut rev = verdicts.clone();
        rev.reverse();
        prop_assert_eq!(Verdict::worst(verdicts.clone()), Verdict::worst(rev));
        prop_assert!(verdicts.iter().all(|x| *x <= Verdict::worst(verdicts.clone())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn action_composes(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let ring = make_ring(p, 2, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DeformationPoint::random(&ring, &mut rng);
        let s = EndoElement::random_unit(&ring, &mut rng);
        let t = EndoElement::random_unit(&ring, &mut rng);
        let opts = LiftOptions::new(6);
        let ta = lift_automorphism(&ring, &t, &a, &opts).unwrap().target;
        let s_ta = lift_automorphism(&ring, &s, &ta, &opts).unwrap().target;
        let st_a = lift_automorphism(&ring, &endo::mul(&ring, &s, &t), &a, &opts).unwrap().target;
        for (x, y) in s_ta.coords.iter().zip(&st_a.coords) {
            prop_assert_eq!(ring.truncate(x, 5), ring.truncate(y, 5));
        }
    }

    #[test]
    fn period_points_are_projective(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5])) {
        let ring = make_ring(p, 2, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DeformationPoint::random(&ring, &mut rng);
        let (x, rep) = period_point(&ring, &a, 8, 40).unwrap();
        prop_assert!(rep.converged);
        prop_assert_eq!(x.coords[x.chart], ring.k_one());
        let c = EndoElement::random_unit(&ring, &mut rng).a[0];
        let y: Vec<_> = x.coords.iter().map(|v| ring.k_mul_witt(v, &c)).collect();
        prop_assert!(proj_residual(&ring, &x.coords, &y).unwrap() >= 8);
    }
}
