//! Deterministic invariant suite behind `verify-suite`.
//!
//! Each section draws from its own substream of the run seed, so the
//! report depends only on the seed.

use crate::algebra::BlockElement;
use crate::error::Result;
use crate::metrics::{
    beta_bound_certificate, kantorovich_commutative_exact, kantorovich_lower_bound, relabel_tower, verify_quantum_isometry,
    EffrosShenFamily,
};
use crate::random::{self, SeededRng};
use crate::report::{Report, ResultLine};
use crate::seminorms::{lip_cond_exp, quasi_leibniz_check, quotient_seminorm, LipSpec, WeightSequence};
use crate::states::{effros_shen_trace, effros_shen_trace_rational, eval_trace, pullback_trace, CondExp, TraceWeights};
use crate::towers::{dimension_weight, golden_dominator, ContinuedFraction, Tower};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;

fn worst(report: &mut Report, name: &str, values: impl IntoIterator<Item = f64>, tol: f64, source: &str) {
    let w = values.into_iter().fold(0.0, f64::max);
    report.push(ResultLine::number(name, w, tol, source, w <= tol));
}

pub fn run(seed: u64) -> Result<Report> {
    let mut report = Report::new("verify-suite", seed);
    continued_fractions(&mut report, &mut random::substream(seed, 1))?;
    embeddings(&mut report, &mut random::substream(seed, 2))?;
    expectations(&mut report, &mut random::substream(seed, 3))?;
    trace_consistency(&mut report)?;
    commutative_oracle(&mut report, &mut random::substream(seed, 5))?;
    quasi_leibniz(&mut report, random::substream(seed, 6).random())?;
    sandwich(&mut report, &mut random::substream(seed, 7))?;
    beta_certificates(&mut report, random::substream(seed, 8).random())?;
    chain(&mut report, random::substream(seed, 9).random())?;
    isometry(&mut report, &mut random::substream(seed, 10))?;
    kantorovich(&mut report, &mut random::substream(seed, 11))?;
    Ok(report)
}

fn continued_fractions(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let q: Vec<BigInt> = ContinuedFraction::golden(8).convergents().into_iter().map(|(_, q)| q).collect();
    let fib: Vec<BigInt> = [1, 1, 2, 3, 5, 8, 13, 21, 34].into_iter().map(BigInt::from).collect();
    report.push(ResultLine { passed: q == fib, ..ResultLine::info("cf/golden-denominators", format!("{q:?}"), "q_n = a_n q_{n-1} + q_{n-2}") });
    let mut ok = true;
    for _ in 0..20 {
        let cf = ContinuedFraction::new(random::random_quotients(rng, 8, 9))?;
        ok &= cf.determinants().iter().all(|d| d.magnitude() == &num_bigint::BigUint::one());
    }
    report.push(ResultLine { passed: ok, ..ResultLine::info("cf/determinants", "20 sequences", "p_n q_{n-1} - p_{n-1} q_n = +-1") });
    let b = dimension_weight(&ContinuedFraction::golden(8), 3)?;
    let expected = BigRational::new(1.into(), 13.into());
    report.push(ResultLine {
        passed: b == expected && golden_dominator(3) == expected,
        ..ResultLine::info("cf/golden-beta-3", b.to_string(), "1/(q_3^2 + q_2^2)")
    });
    Ok(())
}

fn embeddings(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let mut ok = true;
    for _ in 0..10 {
        let cf = ContinuedFraction::new(random::random_quotients(rng, 9, 5))?;
        let t = Tower::effros_shen(&cf, 8)?;
        let conv = cf.convergents();
        for (n, s) in t.levels().iter().enumerate().skip(1) {
            let dims = [conv[n].1.to_usize(), conv[n - 1].1.to_usize()];
            ok &= dims == [Some(s.block(0)), Some(s.block(1))];
        }
        ok &= t.steps().iter().all(|e| e.is_unital() && e.is_injective());
    }
    report.push(ResultLine {
        passed: ok,
        ..ResultLine::info("effros-shen/steps", "10 sequences, depth 8", "shapes (q_n, q_{n-1}); steps unital and injective")
    });
    Ok(())
}

fn expectations(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let (mut idem, mut contr, mut trace, mut module, mut nest) = (vec![], vec![], vec![], vec![], vec![]);
    for _ in 0..4 {
        let tower = random::random_tower(rng, 4, 4);
        let n = tower.depth();
        let top = tower.top().clone();
        let w = random::random_faithful_weights(rng, &top);
        let exps: Vec<CondExp> = (0..=n).map(|m| CondExp::new(&tower, m, n, &w)).collect::<Result<_>>()?;
        for _ in 0..10 {
            let x = BlockElement::random(&top, rng);
            let m = rng.random_range(0..=n);
            let e = &exps[m];
            let ex = e.apply(&x)?;
            idem.push(e.apply(&ex)?.max_abs_diff(&ex)?);
            contr.push(ex.op_norm() - x.op_norm());
            trace.push((eval_trace(&w, &ex)? - eval_trace(&w, &x)?).norm());
            let level = tower.level(m)?.clone();
            let b = tower.embed(m, n, &BlockElement::random(&level, rng))?;
            let c = tower.embed(m, n, &BlockElement::random(&level, rng))?;
            module.push(e.apply(&b.mul(&x)?.mul(&c)?)?.max_abs_diff(&b.mul(&ex)?.mul(&c)?)?);
            let k = rng.random_range(0..=m);
            nest.push(exps[k].apply(&ex)?.max_abs_diff(&exps[k].apply(&x)?)?);
        }
    }
    worst(report, "cond-exp/idempotence", idem, 1e-9, "E(E x) = E x");
    worst(report, "cond-exp/contractivity", contr, 1e-9, "||E x|| <= ||x||");
    worst(report, "cond-exp/trace", trace, 1e-10, "tau(E x) = tau(x)");
    worst(report, "cond-exp/module", module, 1e-9, "E(b x c) = b E(x) c");
    worst(report, "cond-exp/nesting", nest, 1e-9, "E_k E_m = E_k for k <= m");
    Ok(())
}

fn trace_consistency(report: &mut Report) -> Result<()> {
    let golden = ContinuedFraction::golden(40);
    let short = ContinuedFraction::new(vec![0, 2, 1, 3, 1, 4])?;
    let weights = |cf: &ContinuedFraction, n: usize, exact: bool| -> Result<TraceWeights> {
        if n == 0 {
            return TraceWeights::new(crate::algebra::AlgebraShape::scalars(), vec![1.0]);
        }
        Ok(if exact { effros_shen_trace_rational(cf, n)? } else { effros_shen_trace(cf, n)? }.weights)
    };
    for (label, cf, exact) in [("golden", &golden, false), ("0,2,1,3,1,4", &short, true)] {
        let tower = Tower::effros_shen(cf, 5)?;
        let mut dev: f64 = 0.0;
        for n in 0..5 {
            let back = pullback_trace(&tower.steps()[n], &weights(cf, n + 1, exact)?)?;
            let here = weights(cf, n, exact)?;
            dev = dev.max(back.lambda().iter().zip(here.lambda()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        report.push(ResultLine::number(&format!("trace/pullback[{label}]"), dev, 1e-9, "restriction of level n+1 weights = level n weights", dev <= 1e-9));
    }
    let es = effros_shen_trace(&golden, 1)?;
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    let err = (es.t.to_f64().unwrap_or(f64::NAN) - theta).abs();
    let tol = es.half_width.to_f64().unwrap_or(0.0) + f64::EPSILON;
    report.push(ResultLine::number("trace/t(theta,1)", err, tol, "t(theta, 1) = theta within the enclosure", err <= tol));
    Ok(())
}

fn two_point_spec() -> Result<LipSpec> {
    let tower = Tower::new(
        vec![crate::algebra::AlgebraShape::scalars(), crate::algebra::AlgebraShape::new(vec![1, 1])?],
        vec![vec![vec![1], vec![1]]],
        "two-point",
    )?;
    let w = TraceWeights::new(tower.top().clone(), vec![0.5, 0.5])?;
    LipSpec::cond_exp(tower, w, WeightSequence::new(vec![BigRational::one()])?)
}

fn commutative_oracle(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let spec = two_point_spec()?;
    let top = spec.tower().top().clone();
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let x = BlockElement::diagonal(&top, &[vec![a], vec![b]])?;
        dev = dev.max((lip_cond_exp(&spec, &x)? - (a - b).abs() / 2.0).abs());
    }
    report.push(ResultLine::number("oracle/two-point-lip", dev, 1e-12, "L(x) = |x1 - x2| / 2", dev <= 1e-12));
    let d1 = TraceWeights::new(top.clone(), vec![1.0, 0.0])?;
    let d2 = TraceWeights::new(top, vec![0.0, 1.0])?;
    let k = kantorovich_commutative_exact(&spec, &d1, &d2)?;
    report.push(ResultLine::number("oracle/two-point-kantorovich", (k - 2.0).abs(), 1e-9, "mk(delta_1, delta_2) = 2", (k - 2.0).abs() <= 1e-9));
    Ok(())
}

fn random_specs(rng: &mut SeededRng) -> Result<(LipSpec, LipSpec)> {
    let tower = random::random_tower(rng, 3, 3);
    let w = random::random_faithful_weights(rng, tower.top());
    let beta = WeightSequence::inverse_dimension(&tower);
    Ok((LipSpec::cond_exp(tower.clone(), w, beta.clone())?, LipSpec::quotient(tower, beta)?))
}

fn quasi_leibniz(report: &mut Report, seed: u64) -> Result<()> {
    let mut rng = random::rng(seed);
    let (ce, qu) = random_specs(&mut rng)?;
    for (spec, c, name) in [(&ce, 2.0, "quasi-leibniz/cond-exp"), (&qu, 1.0, "quasi-leibniz/quotient")] {
        let r = quasi_leibniz_check(spec, c, 0.0, 20, seed, 1e-7)?;
        let source = format!("max L(a o b), L({{a,b}}) <= {c}(||a|| L(b) + ||b|| L(a)) on {} pairs", r.pairs);
        report.push(ResultLine::number(name, r.worst_margin, r.tolerance, &source, r.passed));
    }
    Ok(())
}

fn sandwich(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let tower = random::random_tower(rng, 3, 3);
    let spec = LipSpec::quotient(tower.clone(), WeightSequence::inverse_dimension(&tower))?;
    let n = tower.depth();
    let canonical = TraceWeights::canonical(tower.top());
    let (mut below, mut above, mut gaps, mut unconverged) = (vec![], vec![], vec![], 0usize);
    for _ in 0..20 {
        let x = BlockElement::random_self_adjoint(tower.top(), rng);
        let m = rng.random_range(0..n);
        let r = CondExp::new(&tower, m, n, &canonical)?.residual(&x)?.op_norm();
        let q = quotient_seminorm(&spec, m, &x)?;
        below.push(r / 2.0 - 1e-6 - q.lower);
        above.push(q.value - r - 1e-8);
        gaps.push(q.rel_gap);
        unconverged += usize::from(!q.converged);
    }
    worst(report, "sandwich/lower", below, 0.0, "||x - E_m x|| / 2 <= S_m(x)");
    worst(report, "sandwich/upper", above, 0.0, "S_m(x) <= ||x - E_m x||");
    worst(report, "sandwich/relative-gap", gaps, 1e-5, "quotient solver duality gap");
    report.push(ResultLine::info("sandwich/unconverged", unconverged, "quotient solver"));
    Ok(())
}

fn beta_certificates(report: &mut Report, seed: u64) -> Result<()> {
    let cf = ContinuedFraction::golden(40);
    let tower = Tower::effros_shen(&cf, 4)?;
    let spec = LipSpec::cond_exp(tower.clone(), effros_shen_trace(&cf, 4)?.weights, WeightSequence::inverse_dimension(&tower))?;
    for m in 1..=3 {
        let cert = beta_bound_certificate(&spec, m, 30, seed.wrapping_add(m as u64))?;
        report.push_certificate(&format!("beta-bound[m={m}]/"), &cert)?;
    }
    report.artifact = None;
    Ok(())
}

fn chain(report: &mut Report, seed: u64) -> Result<()> {
    let fam = EffrosShenFamily::golden_perturbation(8, 40);
    let b = fam.chain_bound(3, 4, 20, seed)?;
    let source = "2B(N) + rescaling bridge at level N";
    report.push(ResultLine::info("chain/fusing-index", b.fusing_index, "c_N"));
    report.push(ResultLine::info("chain/truncation-term", b.truncation_term.to_string(), "2B(N)"));
    if let Some(cert) = &b.bridge {
        report.push_certificate("chain/bridge/", cert)?;
    }
    report.push(ResultLine::number("chain/bound", b.bound, 0.0, source, b.bound.is_finite()));
    report.artifact = None;
    Ok(())
}

fn isometry(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let tower = random::random_tower(rng, 3, 3);
    let perms: Vec<Vec<usize>> = tower
        .levels()
        .iter()
        .map(|s| {
            let mut p: Vec<usize> = (0..s.num_blocks()).collect();
            for i in (1..p.len()).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            p
        })
        .collect();
    let (copy, map) = relabel_tower(&tower, &perms)?;
    let w = random::random_faithful_weights(rng, tower.top());
    let beta = WeightSequence::inverse_dimension(&tower);
    let spec_u = LipSpec::cond_exp(tower.clone(), w.clone(), beta.clone())?;
    let spec_v = LipSpec::cond_exp(copy.clone(), map.push_trace(&w, copy.top())?, beta.clone())?;
    let cert = verify_quantum_isometry(&map, &spec_u, &spec_v, 30, rng.random())?;
    report.push_certificate("isometry/", &cert)?;
    report.artifact = None;
    Ok(())
}

fn kantorovich(report: &mut Report, rng: &mut SeededRng) -> Result<()> {
    let (mut under, mut over) = (vec![], vec![]);
    for i in 0..5 {
        let tower = loop {
            let t = random::random_commutative_tower(rng, 6, 3);
            if t.top().num_blocks() >= 2 {
                break t;
            }
        };
        let top = tower.top().clone();
        let beta = WeightSequence::inverse_dimension(&tower);
        let spec = if i % 2 == 0 {
            LipSpec::cond_exp(tower.clone(), random::random_faithful_weights(rng, &top), beta)?
        } else {
            LipSpec::quotient(tower.clone(), beta)?
        };
        let (phi, psi) = (random::random_state(rng, &top), random::random_state(rng, &top));
        let exact = kantorovich_commutative_exact(&spec, &phi, &psi)?;
        let est = kantorovich_lower_bound(&spec, &phi, &psi, 50, rng.random())?;
        under.push(exact - est.value);
        over.push(est.value - exact);
    }
    worst(report, "kantorovich/under-shoot", under, 1e-4, "exact LP - lower bound");
    worst(report, "kantorovich/over-shoot", over, 1e-9, "lower bound - exact LP");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = run(7).unwrap();
        for r in &a.results {
            assert!(r.passed, "{r:?}");
        }
        assert!(a.verified);
        assert_eq!(a.to_json().unwrap(), run(7).unwrap().to_json().unwrap());
    }
}
