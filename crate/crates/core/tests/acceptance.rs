//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use synccorr::corrsets::{
    affine_preimage, embed_outcomes, expand, project_outcomes, remark_fixture, restrict, validate,
    Constraint, CorrelationTensor,
};
use synccorr::slices::{
    dominance_check, pair_bound_value, slice_local, slice_q3, Side, SliceClass, SliceQuery,
};
use synccorr::tracial::{
    improving_direction, orthogonality_to_pvm, random_projection_with, random_pvm, rotated_pairing,
    sample_dq, synthesize, BlockAlgebra, BlockOperator, DqSample, TracialModel, TracialState,
};
use synccorr::universal3::{
    build_rep, check_points, random_m2_points, realizing_model, verification_grid, verify_rep,
    RELATION_TOL,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn construction_grid() -> Verdict {
    let start = Instant::now();
    let grid: Vec<_> = verification_grid()
        .into_iter()
        .filter(|&(a, b)| build_rep(a, b).map(|r| r.has_m2).unwrap_or(false))
        .collect();
    let random = random_m2_points(100, 0);
    let points: Vec<_> = grid.iter().chain(&random).copied().collect();
    let checks = check_points(&points);
    let elapsed = start.elapsed();
    let failures = checks.iter().filter(|c| !(c.has_m2 && c.passes())).count();
    let doubles = checks.iter().filter(|c| c.double_root).count();
    let worst = checks
        .iter()
        .filter_map(|c| c.max_residual)
        .fold(0.0, f64::max);
    verdict(
        grid.len() >= 50 && failures == 0 && within(elapsed, Duration::from_secs(1)),
        format!(
            "{} grid + {} random points, {failures} failures, {doubles} double roots, max residual {worst:.2e}, {elapsed:?}",
            grid.len(),
            random.len()
        ),
    )
}

fn landmarks() -> Verdict {
    let r11 = build_rep(1.0, 1.0).unwrap();
    let r12 = build_rep(1.0, 2.0).unwrap();
    let m2 = r11.atoms[8];
    let mut err: f64 = 0.0;
    err = err
        .max((r11.t - 0.25).abs())
        .max((r11.z.unwrap() - 0.25).abs());
    for v in m2.offdiag {
        err = err.max((v - 0.125).abs());
    }
    err = err
        .max((r12.t - 0.375).abs())
        .max((r12.z.unwrap() - 1.0 / 16.0).abs());
    verdict(
        err <= 1e-14,
        format!(
            "(1,1): t={} z={} offdiag={:?}; (1,2): t={} z={}; max error {err:.1e}",
            r11.t,
            r11.z.unwrap(),
            m2.offdiag,
            r12.t,
            r12.z.unwrap()
        ),
    )
}

fn quantum_local_gap() -> Verdict {
    let start = Instant::now();
    let lq =
        slice_q3(&SliceQuery::new(vec![0.5; 3], vec![1.0; 3], SliceClass::Q, Side::Lower).unwrap())
            .unwrap();
    let ll = slice_local(
        &SliceQuery::new(vec![0.5; 3], vec![1.0; 3], SliceClass::Loc, Side::Lower).unwrap(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let gap = ll.value - lq.value;
    verdict(
        (lq.value - 0.375).abs() <= 1e-12
            && (ll.value - 0.5).abs() <= 1e-12
            && (gap - 0.125).abs() <= 1e-12
            && within(elapsed, Duration::from_millis(100)),
        format!(
            "l_q = {}, l_loc = {}, gap {gap}, {elapsed:?}",
            lq.value, ll.value
        ),
    )
}

fn oracle_dominance() -> Verdict {
    let start = Instant::now();
    let mut samples = sample_dq(3, 4, 100_000, 11).unwrap();
    let rep = build_rep(1.0, 1.0).unwrap();
    let mut pure = vec![0.0; 9];
    pure[8] = 1.0;
    samples.push(DqSample::from_model(&realizing_model(&rep, &pure).unwrap()));

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let queries: Vec<SliceQuery> = (0..200)
        .map(|_| {
            // sampled traces can overshoot [0, 1] by an ulp
            let y = samples[rng.random_range(0..samples.len())]
                .diag
                .iter()
                .map(|v| v.clamp(0.0, 1.0))
                .collect();
            let x = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let side = if rng.random_bool(0.5) {
                Side::Upper
            } else {
                Side::Lower
            };
            SliceQuery::new(y, x, SliceClass::Q, side).unwrap()
        })
        .collect();
    let report = dominance_check(&samples, &queries, 0.02, 1e-9).unwrap();

    let landmark = SliceQuery::new(vec![0.5; 3], vec![1.0; 3], SliceClass::Q, Side::Lower).unwrap();
    let near = |pool: &[DqSample]| {
        pool.iter()
            .filter(|s| s.diag.iter().all(|d| (d - 0.5).abs() <= 0.02))
            .map(|s| (s.upper.iter().sum::<f64>() - 0.375).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let closest = near(&samples);
    let closest_random = near(&samples[..samples.len() - 1]);
    let landmark_report = dominance_check(&samples, &[landmark], 0.02, 1e-9).unwrap();
    let elapsed = start.elapsed();
    verdict(
        report.is_clean()
            && landmark_report.is_clean()
            && closest <= 5e-3
            && within(elapsed, Duration::from_secs(60)),
        format!(
            "{} samples, {} queries, {} without data, {} violations, tightest {:.3e}; \
             closest to 3/8: {closest:.1e} (random samples alone {closest_random:.1e}), {elapsed:?}",
            samples.len(),
            queries.len(),
            report.no_data(),
            report.violations(),
            report.tightest().unwrap_or(f64::NAN),
        ),
    )
}

fn degenerate_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut all_flagged = true;
    for _ in 0..100 {
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=1.0)).collect();
        let zeros = rng.random_range(1..=3usize);
        let mut x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut idx = [0usize, 1, 2];
        for k in 0..zeros {
            let j = rng.random_range(k..3);
            idx.swap(k, j);
            x[idx[k]] = 0.0;
        }
        let side = if rng.random_bool(0.5) {
            Side::Upper
        } else {
            Side::Lower
        };
        let q = SliceQuery::new(y.clone(), x.clone(), SliceClass::Q, side).unwrap();
        let rq = slice_q3(&q).unwrap();
        let rl = slice_local(&SliceQuery {
            cls: SliceClass::Loc,
            ..q.clone()
        })
        .unwrap();
        let closed = pair_bound_value(&y, &x, side).unwrap();
        all_flagged &= rq.degenerate_path;
        worst = worst
            .max((rq.value - rl.value).abs())
            .max((rq.value - closed).abs());
    }
    verdict(
        worst <= 1e-12 && all_flagged,
        format!("100 queries, max |q − loc|, |q − closed form| = {worst:.1e}"),
    )
}

fn synthesized(n: usize, m: usize, seed: u64) -> CorrelationTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = rng.random_range(1..=2usize);
    let dims: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=4usize)).collect();
    let raw: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let algebra = BlockAlgebra::new(dims.clone()).unwrap();
    let trace = TracialState::new(raw.iter().map(|w| w / total).collect()).unwrap();
    let pvms = (0..n)
        .map(|_| {
            let per_block: Vec<Vec<BlockOperator>> = dims
                .iter()
                .map(|&d| random_pvm(d, m, rng.random()).unwrap())
                .collect();
            (0..m)
                .map(|i| {
                    BlockOperator::from_blocks(
                        per_block.iter().map(|b| b[i].blocks()[0].clone()).collect(),
                    )
                    .unwrap()
                })
                .collect()
        })
        .collect();
    synthesize(&TracialModel::new(algebra, trace, pvms).unwrap(), 1e-9).unwrap()
}

fn round_trips() -> Verdict {
    let mut worst_restrict: f64 = 0.0;
    let mut worst_project: f64 = 0.0;
    let mut failures = 0;
    for seed in 0..1000u64 {
        let n = 1 + (seed % 4) as usize;
        let m = 2 + (seed % 3 == 0) as usize;
        let t = synthesized(n, m, seed);
        if m == 2 {
            match restrict(&t, 1e-9).and_then(|r| expand(&r.matrix)) {
                Ok(back) => worst_restrict = worst_restrict.max(back.max_abs_diff(&t)),
                Err(_) => failures += 1,
            }
        }
        match embed_outcomes(&t, 1e-9).and_then(|p| project_outcomes(&p, n, m, 1e-9)) {
            Ok(proj) => match proj.in_face() {
                Some(back) => worst_project = worst_project.max(back.max_abs_diff(&t)),
                None => failures += 1,
            },
            Err(_) => failures += 1,
        }
    }
    verdict(
        failures == 0 && worst_restrict <= 1e-12 && worst_project <= 1e-12,
        format!("1000 correlations, {failures} failures, expand∘restrict {worst_restrict:.1e}, project∘embed {worst_project:.1e}"),
    )
}

fn perturbation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-4;
    let mut checked = 0;
    let mut worst_rel: f64 = 0.0;
    let mut min_derivative = f64::INFINITY;
    while checked < 100 {
        let blocks = rng.random_range(1..=2usize);
        let dims: Vec<usize> = (0..blocks).map(|_| rng.random_range(2..=4usize)).collect();
        let raw: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let trace = TracialState::new(raw.iter().map(|w| w / total).collect()).unwrap();
        let proj = |rng: &mut ChaCha8Rng| {
            BlockOperator::from_blocks(
                dims.iter()
                    .map(|&d| {
                        let rank = rng.random_range(1..d);
                        random_projection_with(d, rank, rng).unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        };
        let a = proj(&mut rng);
        let b = proj(&mut rng);
        if b.commutator(&a).op_norm() <= 1e-6 {
            continue;
        }
        let imp = improving_direction(&a, &b, &trace).unwrap();
        let fd = (rotated_pairing(&a, &b, &imp.h, &trace, h)
            - rotated_pairing(&a, &b, &imp.h, &trace, -h))
            / (2.0 * h);
        min_derivative = min_derivative.min(imp.derivative);
        worst_rel = worst_rel.max((fd - imp.derivative).abs() / imp.derivative.abs());
        checked += 1;
    }
    verdict(
        min_derivative > 0.0 && worst_rel <= 1e-6,
        format!(
            "100 pairs, min derivative {min_derivative:.3e}, max relative FD error {worst_rel:.1e}"
        ),
    )
}

fn orthogonality() -> Verdict {
    let mut worst_product: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut hypotheses_met = true;
    for seed in 0..100u64 {
        let d = 1 + (seed % 6) as usize;
        let m = 2 + (seed % 3) as usize;
        let pvm = random_pvm(d, m, seed).unwrap();
        let v = orthogonality_to_pvm(&pvm, &TracialState::uniform(1), 1e-9).unwrap();
        hypotheses_met &= v.orthogonality_hypothesis && v.normalization_hypothesis;
        worst_product = worst_product.max(v.max_product_norm);
        worst_sum = worst_sum.max(v.sum_residual);
    }
    verdict(
        hypotheses_met && worst_product <= 1e-6 && worst_sum <= 1e-6,
        format!("100 PVMs, max ‖P_iP_j‖ {worst_product:.1e}, max ‖ΣP_i − I‖ {worst_sum:.1e}"),
    )
}

fn remark_identity() -> Verdict {
    type Q = Ratio<i64>;
    let half = Q::new(1, 2);
    let fixture = |off: Q| -> Vec<Q> {
        let mut out = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        out.push(if x == y {
                            if i == j {
                                half
                            } else {
                                Q::from_integer(0)
                            }
                        } else {
                            off
                        });
                    }
                }
            }
        }
        out
    };
    let (p, q, s) = (
        fixture(Q::new(1, 4)),
        fixture(Q::new(1, 2)),
        fixture(Q::from_integer(0)),
    );
    let (pp, pq, ps) = (
        affine_preimage(2, 2, &p),
        affine_preimage(2, 2, &q),
        affine_preimage(2, 2, &s),
    );
    let identity = pp
        .iter()
        .zip(pq.iter().zip(&ps))
        .all(|(a, (b, c))| *a == half * b + half * c);
    let matches_float = [
        (&p, remark_fixture::p()),
        (&q, remark_fixture::q()),
        (&s, remark_fixture::s()),
    ]
    .iter()
    .all(|(exact, t)| {
        exact
            .iter()
            .zip(t.as_slice())
            .all(|(e, f)| *e.numer() as f64 / *e.denom() as f64 == *f)
    });
    let rq = validate(&remark_fixture::q(), 1e-9);
    let rs = validate(&remark_fixture::s(), 1e-9);
    let rp = validate(&remark_fixture::p(), 1e-9);
    let fail = |r: &synccorr::corrsets::ClassReport| {
        !r.is_synchronous_nonsignaling() && r.failed(Constraint::Normalization)
    };
    verdict(
        identity && matches_float && fail(&rq) && fail(&rs) && rp.is_synchronous_nonsignaling(),
        format!(
            "identity exact: {identity}; q fails {:?}; s fails {:?}",
            rq.failures.iter().map(|v| v.constraint).collect::<Vec<_>>(),
            rs.failures.iter().map(|v| v.constraint).collect::<Vec<_>>()
        ),
    )
}

fn dimension_identity() -> Verdict {
    let points: Vec<_> = verification_grid()
        .into_iter()
        .chain(random_m2_points(100, 1))
        .collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (a, b) in points {
        let rep = build_rep(a, b).unwrap();
        if let Ok(r) = verify_rep(&rep) {
            count += 1;
            worst = r
                .invariant_commutators
                .iter()
                .fold(worst, |acc, v| acc.max(*v));
        }
    }
    verdict(
        count > 0 && worst <= RELATION_TOL,
        format!("{count} reps, max ‖[H, P]‖ {worst:.1e}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        (
            "1 universal-algebra construction on grid and random points",
            construction_grid,
        ),
        ("2 landmark parameters", landmarks),
        (
            "3 quantum-local gap at y = (1/2, 1/2, 1/2)",
            quantum_local_gap,
        ),
        (
            "4 sampled points never beat the exact slices",
            oracle_dominance,
        ),
        (
            "5 degenerate directions agree with the local and closed-form values",
            degenerate_agreement,
        ),
        ("6 round trips of the correlation maps", round_trips),
        ("7 derivative along the improving rotation", perturbation),
        ("8 orthogonality forces a PVM", orthogonality),
        (
            "9 non-face fixture identity in exact arithmetic",
            remark_identity,
        ),
        (
            "10 the quadratic invariant commutes with A, B, C",
            dimension_identity,
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        println!(
            "{} criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
