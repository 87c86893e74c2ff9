//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use newtonosc::bounds::{
    box_bound_check, box_bound_constant, constants_report, dyadic_bound_sum, gradient_ratio_table, max_over_median,
};
use newtonosc::fit::{decay_fit, expansion_fit};
use newtonosc::ladder::{
    arithmetic_progressions, exponent_ladder, leading_term, ExponentLadder, ExponentTerm, LadderParams, Witness,
};
use newtonosc::nondegeneracy::{
    check_k_nondegenerate, check_nondegenerate, face_polynomial, NondegeneracyParams, Status,
};
use newtonosc::polytope::in_hull_plus_orthant;
use newtonosc::quadrature::{geometric_grid, lambda_sweep, SweepResult};
use newtonosc::rational::{dot, from_exponents, q, qf, to_f64};
use newtonosc::{CutoffSpec, Multidegree, NewtonPolyhedron, Phase, Q};
use num_complex::Complex64;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.ok);
    let detail = parts
        .iter()
        .filter(|p| !ok || !p.detail.is_empty())
        .map(|p| format!("{}{}", if p.ok { "" } else { "FAILED " }, p.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { ok, detail }
}

fn normals(n: &NewtonPolyhedron) -> BTreeSet<Vec<Q>> {
    n.facet_normals().iter().cloned().collect()
}

fn exact_invariants() -> Outcome {
    let mut parts = Vec::new();
    let f3 = poly(&fig3());
    parts.push(check(
        normals(&f3) == [vec![qf(1, 5), qf(1, 4)]].into_iter().collect(),
        "fig3 W",
    ));
    parts.push(check(f3.newton_distance().ok() == Some(qf(20, 9)), "fig3 t = 20/9"));
    let lad = exponent_ladder(&f3, &LadderParams::new(qf(11, 20), 3, true)).unwrap();
    let head: Vec<(Q, usize)> = lad.terms.iter().take(3).map(|t| (t.p.clone(), t.d)).collect();
    parts.push(check(
        head == vec![(qf(9, 20), 1), (qf(1, 2), 1), (qf(11, 20), 1)],
        "fig3 ladder 9/20, 1/2, 11/20",
    ));
    let has = |k: usize, b: [u32; 2], n: u32| {
        lad.terms[k].witnesses.contains(&Witness {
            beta: Multidegree(b.to_vec()),
            n,
        })
    };
    parts.push(check(
        has(0, [0, 0], 0) && has(1, [4, 1], 1) && has(2, [3, 2], 1),
        "fig3 witnesses",
    ));
    parts.push(check(arithmetic_progressions(&f3)[0].1 == 20.into(), "fig3 q_w = 20"));

    let f2 = poly(&fig2());
    let w2: BTreeSet<Vec<Q>> = [vec![q(1), q(0)], vec![qf(1, 4), qf(1, 4)], vec![q(0), qf(1, 2)]]
        .into_iter()
        .collect();
    parts.push(check(normals(&f2) == w2, "fig2 W"));
    parts.push(check(
        f2.supporting_check(&[qf(1, 2), qf(1, 6)], &[q(1), q(3)]).unwrap(),
        "fig2 (1,3)·(1/2,1/6) = 1",
    ));
    parts.push(check(
        leading_term(&f2).unwrap() == (qf(1, 2), 2),
        "fig2 leading (1/2, 2)",
    ));

    let mono = (2..=6).all(|k| {
        let n = poly(&monomial(k));
        n.newton_distance().unwrap() == q(k as i64) && leading_term(&n).unwrap() == (qf(1, k as i64), 1)
    });
    parts.push(check(mono, "x^k t = k, leading (1/k, 1)"));
    all(parts)
}

fn random_support(rng: &mut ChaCha8Rng, d: usize) -> Vec<Multidegree> {
    let m = rng.gen_range(1..=8);
    (0..m)
        .map(|_| loop {
            let v: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=9)).collect();
            if v.iter().sum::<u32>() >= 2 {
                break Multidegree(v);
            }
        })
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<u32> {
    loop {
        let v: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=9)).collect();
        if v.iter().any(|&x| x > 0) {
            break v;
        }
    }
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    let mut equal_cases = 0;
    for d in 1..=3 {
        for _ in 0..500 {
            let sup = random_support(&mut rng, d);
            let n = NewtonPolyhedron::from_support(d, &sup).unwrap();
            let a = random_point(&mut rng, d);
            let b = random_point(&mut rng, d);
            let c = qf(rng.gen_range(1..=40), rng.gen_range(1..=40));
            let fa = n.floor_functional(&from_exponents(&a)).unwrap();
            let fb = n.floor_functional(&from_exponents(&b)).unwrap();
            let s: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let fs = n.floor_functional(&from_exponents(&s)).unwrap();
            let ca: Vec<Q> = from_exponents(&a).iter().map(|x| x * &c).collect();
            if n.floor_functional(&ca).unwrap().0 != &fa.0 * &c {
                failures.push(format!("(i) d={d}"));
            }
            if fs.0 < &fa.0 + &fb.0 {
                failures.push(format!("(ii) d={d}"));
            }
            if fs.0 == &fa.0 + &fb.0 {
                equal_cases += 1;
                let na: BTreeSet<usize> = fa.1.into_iter().collect();
                let nb: BTreeSet<usize> = fb.1.into_iter().collect();
                let ns: BTreeSet<usize> = fs.1.into_iter().collect();
                if ns != na.intersection(&nb).copied().collect() {
                    failures.push(format!("(iii) intersection d={d}"));
                }
                if na != nb && !(ns.len() < d.min(na.len()) || ns.len() < d.min(nb.len())) {
                    failures.push(format!("(iii) codimension d={d}"));
                }
            }
        }
    }

    let mut lp_checks = 0;
    for k in 0..200 {
        let d = 1 + k % 3;
        let sup = random_support(&mut rng, d);
        let n = NewtonPolyhedron::from_support(d, &sup).unwrap();
        let refs: Vec<&Multidegree> = sup.iter().collect();
        for _ in 0..10 {
            let xi: Vec<Q> = (0..d)
                .map(|_| qf(rng.gen_range(0..=40), rng.gen_range(1..=4)))
                .collect();
            lp_checks += 1;
            if n.contains(&xi) != in_hull_plus_orthant(&xi, &refs) {
                failures.push(format!("LP oracle at {xi:?}"));
            }
        }
    }

    let mut worst: f64 = 0.0;
    for k in 0..300 {
        let d = 2 + k % 2;
        let sup = random_support(&mut rng, d);
        let terms: Vec<(Multidegree, Q)> = sup
            .into_iter()
            .map(|a| (a, q(rng.gen_range(1..=5) * if rng.gen() { 1 } else { -1 })))
            .collect();
        let p = Phase::new(d, terms).unwrap();
        let n = NewtonPolyhedron::build(&p).unwrap();
        for face in n.compact_faces() {
            let fp = face_polynomial(&p, &n, face).unwrap().numeric();
            for &wi in &face.facets {
                let w = &n.facet_normals()[wi];
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let s: f64 = rng.gen_range(0.5..=2.0);
                let y: Vec<f64> = x.iter().zip(w).map(|(xi, wj)| s.powf(to_f64(wj)) * xi).collect();
                worst = worst.max((fp.eval(&y) - s * fp.eval(&x)).abs());
                if dot(&from_exponents(&face.vertices[0].0), w) != Q::one() {
                    failures.push("face off its facet".into());
                }
            }
        }
    }
    if worst >= 1e-10 {
        failures.push(format!("quasi-homogeneity error {worst:e}"));
    }
    check(
        failures.is_empty(),
        format!(
            "1500 floor instances ({equal_cases} additive), {lp_checks} LP queries, quasi-homogeneity max error {worst:.1e}{}",
            if failures.is_empty() { String::new() } else { format!(", failures {failures:?}") }
        ),
    )
}

fn nondegeneracy() -> Outcome {
    let params = NondegeneracyParams::default();
    let mut parts = Vec::new();
    let v = check_nondegenerate(&square_of_difference(), params).unwrap();
    let w = v.degenerate_face().and_then(|f| f.witness.clone());
    parts.push(check(
        v.status == Status::Degenerate && w.as_ref().is_some_and(|x| (x[0] - x[1]).abs() < 1e-6),
        format!("(x-y)^2 {:?} witness {:?}", v.status, w),
    ));
    for (name, p) in [
        ("x^2+y^2", sum_of_squares()),
        ("fig2", fig2()),
        ("fig3", fig3()),
        ("x^2y^2+x^5+y^5", mixed_quintic()),
    ] {
        let s = check_nondegenerate(&p, params).unwrap().status;
        parts.push(check(s == Status::Nondegenerate, ""));
        if s != Status::Nondegenerate {
            parts.push(check(false, format!("{name} {s:?}")));
        }
    }
    let k4 = check_k_nondegenerate(&mixed_quintic(), 4, params).unwrap();
    let k5 = check_k_nondegenerate(&mixed_quintic(), 5, params).unwrap();
    parts.push(check(
        k4.status == Status::Degenerate
            && k4.reason.as_deref() == Some("not convenient")
            && k5.status == Status::Nondegenerate,
        format!("k=4 {:?}, k=5 {:?}", k4.status, k5.status),
    ));
    all(parts)
}

fn numerical_decay() -> Outcome {
    let cut = CutoffSpec::default();
    let mut parts = Vec::new();
    let mut run = |name: &str, p: Phase, hi: f64, p0: f64, tol: f64, q0: u32| {
        let d = p.dimension();
        let outcome = lambda_sweep(&p, &cut, &Multidegree::zeros(d), 1e2, hi, 25, 1).and_then(|s| decay_fit(&s, d));
        match outcome {
            Ok(f) => parts.push(check(
                (f.p_hat - p0).abs() <= tol && f.q_hat == q0,
                format!("{name} p={:.4} q={}", f.p_hat, f.q_hat),
            )),
            Err(e) => parts.push(check(false, format!("{name}: {e}"))),
        }
    };
    for k in 2..=4 {
        run(&format!("x^{k}"), monomial(k), 1e6, 1.0 / k as f64, 0.02, 0);
    }
    run("x^2+y^2", sum_of_squares(), 1e5, 1.0, 0.05, 0);
    run("fig2", fig2(), 1e5, 0.5, 0.05, 1);
    all(parts)
}

fn bounds_lab() -> Outcome {
    let mut parts = Vec::new();
    let x2 = monomial(2);
    let r = constants_report(&x2, &poly(&x2), 64).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs() < 1e-9;
    parts.push(check(
        rel(r.a, 64.0) && rel(r.rho, 0.5) && rel(r.c(0), 2.0) && rel(r.c(1), 1.0 / 32.0) && rel(r.s(), 1.0 / 2048.0),
        format!("x^2 a={} rho={} C0={} C1={} s={}", r.a, r.rho, r.c(0), r.c(1), r.s()),
    ));

    let nondegenerate = [
        ("x^2", monomial(2)),
        ("x^3", monomial(3)),
        ("x^4", monomial(4)),
        ("x^2+y^2", sum_of_squares()),
        ("fig2", fig2()),
        ("fig3", fig3()),
        ("x^2y^2+x^5+y^5", mixed_quintic()),
    ];
    let mut lemma = Vec::new();
    for (name, p) in &nondegenerate {
        let t = gradient_ratio_table(p, &poly(p), 20, 64).unwrap();
        let (all_min, head_min) = (t.min_ratio(0..=20), t.min_ratio(0..=5));
        if !(all_min >= 0.5 * head_min && all_min > 0.0) {
            parts.push(check(false, format!("lemma1 {name} min {all_min:e} head {head_min:e}")));
        }
        lemma.push(format!("{name} {all_min:.3}"));
    }
    let diag = square_of_difference();
    let zero = gradient_ratio_table(&diag, &poly(&diag), 20, 64)
        .unwrap()
        .rows
        .iter()
        .all(|r| r.box_min == 0.0);
    parts.push(check(
        zero,
        format!("lemma1 min ratios [{}], (x-y)^2 identically zero", lemma.join(", ")),
    ));

    let lambdas = geometric_grid(1e2, 1e6, 17);
    let mut sums = Vec::new();
    for (name, p) in [("x^2+y^2", sum_of_squares()), ("fig2", fig2()), ("fig3", fig3())] {
        let n = poly(&p);
        let (f, logp) = newtonosc::bounds::theoretical_bound(&n, &Multidegree::zeros(2)).unwrap();
        let norm: Vec<f64> = lambdas
            .iter()
            .map(|&l| {
                dyadic_bound_sum(&n, &Multidegree::zeros(2), l, None).unwrap() * l.powf(to_f64(&f))
                    / l.ln().powi(logp as i32)
            })
            .collect();
        let m = max_over_median(&norm);
        sums.push(check(m <= 3.0, format!("{name} {m:.2}")));
    }
    let ok = sums.iter().all(|s| s.ok);
    parts.push(check(
        ok,
        format!(
            "bound sum max/median [{}]",
            sums.iter().map(|s| s.detail.clone()).collect::<Vec<_>>().join(", ")
        ),
    ));

    let mut boxes = Vec::new();
    for (name, p, hi, levels) in [("x^2", monomial(2), 1e6, 0..=10u32), ("fig3", fig3(), 1e4, 2..=10u32)] {
        let n = poly(&p);
        let z = Multidegree::zeros(p.dimension());
        let coarse = box_bound_check(&p, &n, &z, &geometric_grid(1e2, hi, 9), levels.clone(), 1, 1_000_000).unwrap();
        let fine = box_bound_check(&p, &n, &z, &geometric_grid(1e2, hi, 17), levels, 1, 1_000_000).unwrap();
        let (a, b) = (box_bound_constant(&coarse), box_bound_constant(&fine));
        let reliable = fine.iter().filter(|r| r.reliable).count();
        let stable = a > 0.0 && b.is_finite() && (b / a - 1.0).abs() <= 0.2;
        boxes.push(check(
            stable,
            format!("{name} C={a:.3}->{b:.3} ({reliable}/{} rows)", fine.len()),
        ));
    }
    let ok = boxes.iter().all(|s| s.ok);
    parts.push(check(
        ok,
        format!(
            "box J/B [{}]",
            boxes.iter().map(|s| s.detail.clone()).collect::<Vec<_>>().join(", ")
        ),
    ));
    all(parts)
}

fn expansion() -> Outcome {
    let mut parts = Vec::new();
    let ls = geometric_grid(1e2, 1e6, 41);
    let vs: Vec<Complex64> = ls
        .iter()
        .map(|&l| Complex64::new(2.0 * l.powf(-0.45) - 5.0 * l.powf(-0.5), 0.0))
        .collect();
    let synthetic = SweepResult::from_values(&ls, &vs);
    let ladder = ExponentLadder {
        terms: [(9, 20), (1, 2), (11, 20), (3, 5), (13, 20)]
            .iter()
            .map(|&(a, b)| ExponentTerm {
                p: qf(a, b),
                d: 1,
                witnesses: Vec::new(),
            })
            .collect(),
        p_max: qf(13, 20),
        n_max: 3,
        beta_bound: vec![5, 5],
        decomposition_filter: true,
    };
    match expansion_fit(&synthetic, &ladder, 2) {
        Ok(f) => {
            let e0 = (f.terms[0].coefficient() - 2.0).norm();
            let e1 = (f.terms[1].coefficient() + 5.0).norm();
            parts.push(check(
                e0 < 1e-6 && e1 < 1e-6 && f.residual_exponent >= 0.55,
                format!(
                    "synthetic errors {e0:.1e}, {e1:.1e}, residual exponent {}",
                    f.residual_exponent
                ),
            ));
        }
        Err(e) => parts.push(check(false, format!("synthetic: {e}"))),
    }

    let x2 = monomial(2);
    let n = poly(&x2);
    let lad = exponent_ladder(&n, &LadderParams::new(qf(3, 2), 2, false)).unwrap();
    let cut = CutoffSpec::default();
    let fit = lambda_sweep(&x2, &cut, &Multidegree::zeros(1), 1e2, 1e6, 25, 1).and_then(|s| expansion_fit(&s, &lad, 1));
    match fit {
        Ok(f) => {
            let reference = Complex64::from_polar(
                std::f64::consts::PI.sqrt() * cut.at_origin(1),
                std::f64::consts::FRAC_PI_4,
            );
            let rel = (f.terms[0].coefficient() - reference).norm() / reference.norm();
            parts.push(check(
                rel < 0.02 && f.residual_exponent >= 0.9,
                format!(
                    "x^2 coefficient error {:.2e}, residual exponent {:.3}",
                    rel, f.residual_exponent
                ),
            ));
        }
        Err(e) => parts.push(check(false, format!("x^2: {e}"))),
    }
    all(parts)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 6] = [
        ("1 exact invariants", exact_invariants, Duration::from_secs(1)),
        ("2 property suites", property_suites, Duration::from_secs(30)),
        ("3 nondegeneracy", nondegeneracy, Duration::from_secs(10)),
        ("4 numerical decay", numerical_decay, Duration::from_secs(600)),
        ("5 bounds lab", bounds_lab, Duration::from_secs(300)),
        ("6 expansion fit", expansion, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let ok = out.ok && took <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {name}: {} [{:.2}s, limit {}s] {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
