//! Closed-form oracles for small instances.

use num_rational::BigRational;
use num_traits::One;
use qprop::algebra::{AlgebraShape, BlockElement, CMatrix, C64};
use qprop::metrics::{beta_bound_certificate, diameter_upper_bound, kantorovich_commutative_exact, kantorovich_lower_bound, EffrosShenFamily};
use qprop::random;
use qprop::seminorms::{lip, lip_cond_exp, quotient_seminorm, LipSpec, WeightSequence};
use qprop::states::TraceWeights;
use qprop::towers::{cf_expand, ContinuedFraction, Tower};
use rand::Rng;

fn det3(m: &CMatrix) -> C64 {
    let a = |r: usize, c: usize| m[(r, c)];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Largest root of the characteristic polynomial of a Hermitian matrix of
/// size at most 3.
fn largest_eigenvalue(h: &CMatrix) -> f64 {
    match h.dim() {
        1 => h[(0, 0)].re,
        2 => {
            let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
            let b = h[(0, 1)].norm_sqr();
            (a + d) / 2.0 + (((a - d) / 2.0).powi(2) + b).sqrt()
        }
        3 => {
            let off = h[(0, 1)].norm_sqr() + h[(0, 2)].norm_sqr() + h[(1, 2)].norm_sqr();
            let q = h.trace().re / 3.0;
            let p2 = (0..3).map(|i| (h[(i, i)].re - q).powi(2)).sum::<f64>() + 2.0 * off;
            if p2 == 0.0 {
                return q;
            }
            let p = (p2 / 6.0).sqrt();
            let b = h.sub(&CMatrix::identity(3).scale_re(q)).scale_re(1.0 / p);
            let r = (det3(&b).re / 2.0).clamp(-1.0, 1.0);
            q + 2.0 * p * (r.acos() / 3.0).cos()
        }
        n => panic!("oracle covers sizes up to 3, got {n}"),
    }
}

#[test]
fn op_norm_matches_characteristic_polynomial() {
    let mut rng = random::rng(1);
    for _ in 0..300 {
        let dims: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(1..=3)).collect();
        let shape = AlgebraShape::new(dims).unwrap();
        let x = BlockElement::random(&shape, &mut rng);
        let oracle = x.blocks().iter().map(|b| largest_eigenvalue(&b.gram()).max(0.0).sqrt()).fold(0.0, f64::max);
        assert!((x.op_norm() - oracle).abs() <= 1e-9, "{} vs {oracle}", x.op_norm());
    }
}

fn commutative_spec(points: usize, beta: BigRational) -> LipSpec {
    let tower = Tower::new(vec![AlgebraShape::scalars(), AlgebraShape::new(vec![1; points]).unwrap()], vec![vec![vec![1]; points]], "points")
        .unwrap();
    let w = TraceWeights::canonical(tower.top());
    LipSpec::cond_exp(tower, w, WeightSequence::new(vec![beta]).unwrap()).unwrap()
}

#[test]
fn uniform_three_points() {
    // L(x) = max_i |x_i − mean| / β(0).
    let half = BigRational::new(1.into(), 2.into());
    let spec = commutative_spec(3, half);
    let top = spec.tower().top().clone();
    let mut rng = random::rng(2);
    for _ in 0..100 {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mean = v.iter().sum::<f64>() / 3.0;
        let want = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / 0.5;
        let x = BlockElement::diagonal(&top, &v.iter().map(|&a| vec![a]).collect::<Vec<_>>()).unwrap();
        assert!((lip_cond_exp(&spec, &x).unwrap() - want).abs() <= 1e-12);
    }
    // Distinct point masses sit at distance 2β(0).
    let delta = |i: usize| TraceWeights::new(top.clone(), (0..3).map(|j| f64::from(u8::from(i == j))).collect()).unwrap();
    let d = kantorovich_commutative_exact(&spec, &delta(0), &delta(2)).unwrap();
    assert!((d - 1.0).abs() <= 1e-9);
    assert_eq!(diameter_upper_bound(&spec), 1.0);
}

#[test]
fn two_point_quotient_is_half_the_spread() {
    let tower = Tower::new(vec![AlgebraShape::scalars(), AlgebraShape::new(vec![1, 1]).unwrap()], vec![vec![vec![1], vec![1]]], "two-point").unwrap();
    let spec = LipSpec::quotient(tower, WeightSequence::new(vec![BigRational::one()]).unwrap()).unwrap();
    let top = spec.tower().top().clone();
    let mut rng = random::rng(3);
    for _ in 0..50 {
        let (a, b) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let x = BlockElement::diagonal(&top, &[vec![a], vec![b]]).unwrap();
        let q = quotient_seminorm(&spec, 0, &x).unwrap();
        let want = (a - b).abs() / 2.0;
        assert!(q.lower <= want + 1e-9 && q.value >= want - 1e-9 && q.value - want <= 1e-7, "{q:?} vs {want}");
    }
}

#[test]
fn hermitian_distance_to_scalars_in_m2() {
    // For Hermitian x in M_2: S_0(x) = L(x) = (λ_max − λ_min)/2 with β(0) = 1.
    let tower = Tower::uhf(&[2], 1).unwrap();
    let beta = WeightSequence::new(vec![BigRational::one()]).unwrap();
    let qs = LipSpec::quotient(tower.clone(), beta.clone()).unwrap();
    let cs = LipSpec::cond_exp(tower.clone(), TraceWeights::canonical(tower.top()), beta).unwrap();
    let mut rng = random::rng(4);
    for _ in 0..50 {
        let x = BlockElement::random_self_adjoint(tower.top(), &mut rng);
        let h = x.block(0);
        let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
        let spread = 2.0 * (((a - d) / 2.0).powi(2) + h[(0, 1)].norm_sqr()).sqrt();
        let q = quotient_seminorm(&qs, 0, &x).unwrap();
        assert!(q.lower <= spread / 2.0 + 1e-9 && q.value - spread / 2.0 <= 1e-7);
        assert!((lip(&cs, &x).unwrap().upper - spread / 2.0).abs() <= 1e-9);
    }
}

#[test]
fn kantorovich_two_point_lower_bound_reaches_two() {
    let spec = commutative_spec(2, BigRational::one());
    let top = spec.tower().top().clone();
    let d1 = TraceWeights::new(top.clone(), vec![1.0, 0.0]).unwrap();
    let d2 = TraceWeights::new(top, vec![0.0, 1.0]).unwrap();
    let est = kantorovich_lower_bound(&spec, &d1, &d2, 10, 5).unwrap();
    assert!(est.value <= 2.0 + 1e-9 && est.value >= 2.0 - 1e-6);
}

#[test]
fn continued_fraction_expansions() {
    let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
    assert_eq!(cf_expand(&r(1, 2), 10).unwrap().quotients(), &[0, 2]);
    assert_eq!(cf_expand(&r(2, 3), 10).unwrap().quotients(), &[0, 1, 2]);
    assert_eq!(cf_expand(&r(5, 8), 10).unwrap().quotients(), &[0, 1, 1, 1, 2]);
    assert_eq!(ContinuedFraction::new(vec![0, 1, 1, 1, 2]).unwrap().value(), r(5, 8));
}

#[test]
fn golden_tower_beta_and_chain_values() {
    let cf = ContinuedFraction::golden(40);
    let spec = EffrosShenFamily::spec(&cf, 3).unwrap();
    let cert = beta_bound_certificate(&spec, 2, 50, 6).unwrap();
    assert!(cert.verified);
    assert_eq!(cert.bound_exact.as_deref(), Some("1/5"));
    let fam = EffrosShenFamily::golden_perturbation(10, 40);
    let b = fam.chain_bound(3, 5, 20, 7).unwrap();
    assert_eq!(b.truncation_term.to_string(), "2/13");
    assert_eq!(b.bound, 2.0 / 13.0 + b.bridge.unwrap().bound);
}

#[test]
fn effros_shen_shapes_for_golden_prefix() {
    let t = Tower::effros_shen(&ContinuedFraction::parse("0,1,1,1").unwrap(), 3).unwrap();
    let dims: Vec<&[usize]> = t.levels().iter().map(|s| s.dims()).collect();
    assert_eq!(dims, vec![&[1][..], &[1, 1], &[2, 1], &[3, 2]]);
}
