//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rotpack::geometry::{tangency_candidates, Point, Tolerance};
use rotpack::harness::{
    generate_instance, reference_families, reference_family, run_batch, BatchOptions,
    InstanceFamily,
};
use rotpack::layout::verify_solution;
use rotpack::permutation::{default_block_count, permutation_space_size, PermutationScheme};
use rotpack::solver::{construct_layout, postoptimize, solve, Solution, SolverConfig};
use rotpack::{CircleSpec, ProblemInstance};

/// Fixed constant of the cubic bound on placement-candidate evaluations.
const COMPLEXITY_C: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn area_bound(inst: &ProblemInstance) -> f64 {
    inst.circles()
        .iter()
        .map(|c| c.radius * c.radius)
        .sum::<f64>()
        .sqrt()
}

fn batch_options(
    inst: &ProblemInstance,
    blocks: usize,
    runs: usize,
    parallelism: usize,
) -> BatchOptions {
    BatchOptions {
        runs,
        parallelism,
        allow_repeats: permutation_space_size(inst.len(), blocks) < runs.into(),
    }
}

fn ac1_feasibility() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for fam in reference_families() {
        let inst = generate_instance(&fam).unwrap();
        let b = default_block_count(inst.len());
        let scheme = PermutationScheme::new(inst.circles(), b, 1).unwrap();
        match run_batch(&inst, &scheme, batch_options(&inst, b, 100, 4), &cfg) {
            Ok(report) => {
                let rep = verify_solution(&inst, &report.best, 1e-6).unwrap();
                if !rep.is_feasible() {
                    failed.push(format!(
                        "{}: {} violations",
                        fam.name,
                        rep.violation_count()
                    ));
                }
                worst = worst.max(report.total_elapsed.as_secs_f64());
            }
            Err(e) => failed.push(format!("{}: {e}", fam.name)),
        }
    }
    outcome(
        failed.is_empty(),
        format!("11 families x 100 runs, slowest batch {worst:.2}s {failed:?}"),
    )
}

/// Solves 100 sampled orders on every reference family.
fn sweep() -> Vec<(ProblemInstance, Solution, Duration)> {
    let cfg = SolverConfig::default();
    let mut out = Vec::new();
    for fam in reference_families() {
        let inst = generate_instance(&fam).unwrap();
        let scheme = PermutationScheme::new(inst.circles(), 1, 77).unwrap();
        for order in scheme.sample(100, false).unwrap() {
            let t = Instant::now();
            let sol = solve(&inst, &order, &cfg).unwrap();
            out.push((inst.clone(), sol, t.elapsed()));
        }
    }
    out
}

fn ac2_zero_imbalance(all: &[(ProblemInstance, Solution, Duration)]) -> Outcome {
    let mut worst = 0.0f64;
    for (inst, sol, _) in all {
        worst = worst.max(sol.f2 / (inst.total_mass() * sol.radius));
    }
    outcome(
        worst <= 1e-9,
        format!("{} solutions, max f2/(M*R) = {worst:.2e}", all.len()),
    )
}

fn ac3_tangency() -> Outcome {
    let tol = Tolerance::default();
    let s3 = 3f64.sqrt();
    let o = Point::ORIGIN;
    let two = tangency_candidates(1.0, o, 1.0, Point::new(2.0, 0.0), 1.0, tol).unwrap();
    let pts = two.points();
    let analytic = two.count() == 2
        && pts
            .iter()
            .any(|p| (p.x - 1.0).abs() < 1e-12 && (p.y - s3).abs() < 1e-12)
        && pts
            .iter()
            .any(|p| (p.x - 1.0).abs() < 1e-12 && (p.y + s3).abs() < 1e-12);
    let one = tangency_candidates(1.0, o, 1.0, Point::new(4.0, 0.0), 1.0, tol).unwrap();
    let single = one.count() == 1
        && (one.points()[0].x - 2.0).abs() < 1e-12
        && one.points()[0].y.abs() < 1e-12;
    let none = tangency_candidates(1.0, o, 1.0, Point::new(5.0, 0.0), 1.0, tol)
        .unwrap()
        .is_empty();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut unsolved = 0;
    for _ in 0..1000 {
        let (rp, rq, rk): (f64, f64, f64) = (
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
        );
        let p = Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        // strictly inside the solvable band |a-b| < d < a+b
        let (a, b) = (rp + rk, rq + rk);
        let d = (a - b).abs() + rng.gen_range(0.05..0.95) * (a + b - (a - b).abs());
        let q = p + Point::new(angle.cos(), angle.sin()) * d;
        let cands = tangency_candidates(rk, p, rp, q, rq, tol).unwrap();
        if cands.count() != 2 {
            unsolved += 1;
            continue;
        }
        for &x in cands.points() {
            let ep = ((x - p).norm() - a).abs() / a;
            let eq = ((x - q).norm() - b).abs() / b;
            worst = worst.max(ep).max(eq);
        }
    }
    outcome(
        analytic && single && none && unsolved == 0 && worst <= 1e-9,
        format!("analytic={analytic} single={single} none={none}, 1000 random: max rel residual {worst:.2e}, misclassified {unsolved}"),
    )
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Counts orders of `0..n` that keep every segment's members in place, by
/// walking all n! orders.
fn brute_force_count(n: usize, b: usize) -> u64 {
    let l = n / b;
    let segment = |i: usize| if i < b * l { i / l } else { b };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0;
    // Heap's algorithm, iterative
    let mut c = vec![0usize; n];
    let ok = |p: &[usize]| p.iter().enumerate().all(|(i, &v)| segment(i) == segment(v));
    if ok(&perm) {
        count += 1;
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if ok(&perm) {
                count += 1;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count
}

fn ac4_permutation_count() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    for n in 1..=8usize {
        let circles: Vec<CircleSpec> = (1..=n as u32)
            .map(|i| CircleSpec::new(i, i as f64, 1.0))
            .collect();
        for b in 1..=n {
            cases += 1;
            let l = n / b;
            let law = factorial(l).pow(b as u32) * factorial(n - b * l);
            let brute = brute_force_count(n, b);
            let scheme = PermutationScheme::new(&circles, b, 0).unwrap();
            let enumerated: HashSet<Vec<u32>> = scheme.enumerate().collect();
            if brute != law || enumerated.len() as u64 != law || scheme.space_size() != law.into() {
                bad.push((n, b));
            }
        }
    }
    let seven = brute_force_count(7, 1);
    outcome(
        bad.is_empty() && seven == 5040,
        format!("{cases} (n, b) cases, n=7 b=1 gives {seven}, mismatches {bad:?}"),
    )
}

fn ac5_postopt_monotone() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut runs, mut moves, mut violations) = (0, 0, 0);
    while runs < 1000 {
        let n = rng.gen_range(6..=30);
        let fam = InstanceFamily::new("mono", n, [5.0, 24.0], [10.0, 99.0], rng.gen());
        let inst = generate_instance(&fam).unwrap();
        let scheme = PermutationScheme::new(inst.circles(), 1, rng.gen()).unwrap();
        for order in scheme.sample(10, false).unwrap() {
            runs += 1;
            let (layout, border) = construct_layout(&inst, &order, &cfg).unwrap();
            let (_, _, trace) = postoptimize(&layout, &border, &inst, &cfg).unwrap();
            let mut prev = trace.radius_before;
            for &r in &trace.committed {
                moves += 1;
                if prev - r <= cfg.postopt_delta * prev || r.is_nan() {
                    violations += 1;
                }
                prev = r;
            }
            if trace.radius_after() > trace.radius_before {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{runs} runs, {moves} committed moves, {violations} violations"),
    )
}

fn ac6_area_bound(all: &[(ProblemInstance, Solution, Duration)]) -> Outcome {
    let below = all
        .iter()
        .filter(|(inst, sol, _)| sol.radius < area_bound(inst))
        .count();
    let tight = all
        .iter()
        .map(|(inst, sol, _)| sol.radius / area_bound(inst))
        .fold(f64::INFINITY, f64::min);
    outcome(
        below == 0,
        format!("{} solutions, min R/sqrt(sum r^2) = {tight:.4}", all.len()),
    )
}

fn ac7_parallel_equivalence() -> Outcome {
    let cfg = SolverConfig::default();
    let mut same = true;
    for name in ["set1-7", "set2-30", "set2-55"] {
        let inst = generate_instance(&reference_family(name).unwrap()).unwrap();
        let b = default_block_count(inst.len());
        let scheme = PermutationScheme::new(inst.circles(), b, 8).unwrap();
        let serial = run_batch(&inst, &scheme, batch_options(&inst, b, 100, 1), &cfg).unwrap();
        let parallel = run_batch(&inst, &scheme, batch_options(&inst, b, 100, 6), &cfg).unwrap();
        same &= serial.same_result(&parallel);
    }
    outcome(same, "3 families, 100 runs, parallelism 1 vs 6")
}

fn ac8_runtime(all: &[(ProblemInstance, Solution, Duration)]) -> Outcome {
    let slowest_55 = all
        .iter()
        .filter(|(inst, _, _)| inst.len() == 55)
        .map(|(_, _, t)| *t)
        .max()
        .unwrap();
    let worst_ratio = all
        .iter()
        .filter(|(inst, _, _)| inst.len() >= 10)
        .map(|(inst, sol, _)| sol.stats.candidate_evaluations as f64 / (inst.len() as f64).powi(3))
        .fold(0.0f64, f64::max);
    outcome(
        slowest_55 <= Duration::from_secs(1) && worst_ratio <= COMPLEXITY_C,
        format!(
            "slowest n=55 solve {:.4}s, max evaluations/n^3 = {worst_ratio:.4} (c = {COMPLEXITY_C})",
            slowest_55.as_secs_f64()
        ),
    )
}

fn ac9_exhaustive_seven() -> Outcome {
    let cfg = SolverConfig::default();
    let inst = generate_instance(&reference_family("set1-7").unwrap()).unwrap();
    let scheme = PermutationScheme::new(inst.circles(), 1, 2024).unwrap();
    let mut bests = Vec::new();
    let mut balanced = true;
    for _ in 0..3 {
        let report = run_batch(&inst, &scheme, BatchOptions::new(5040, 4), &cfg).unwrap();
        balanced &= report.best.f2 <= 1e-9 * inst.total_mass() * report.best.radius;
        bests.push((report.best.f1, report.best.f2, report.best_run));
    }
    let identical = bests.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical && balanced,
        format!(
            "3 sweeps of 5040 orders, best f1 = {}, f2 = {:.2e}",
            bests[0].0, bests[0].1
        ),
    )
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |id: &str, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        all_pass &= o.pass;
        println!(
            "{id} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    let solutions = sweep();
    report("AC1", "feasibility oracle", &ac1_feasibility);
    report("AC2", "zero imbalance", &|| ac2_zero_imbalance(&solutions));
    report("AC3", "tangency kernel", &ac3_tangency);
    report("AC4", "permutation-count law", &ac4_permutation_count);
    report(
        "AC5",
        "postoptimization monotonicity",
        &ac5_postopt_monotone,
    );
    report("AC6", "area lower bound", &|| ac6_area_bound(&solutions));
    report("AC7", "parallel equivalence", &ac7_parallel_equivalence);
    report("AC8", "runtime budget", &|| ac8_runtime(&solutions));
    report("AC9", "exhaustive small-n protocol", &ac9_exhaustive_seven);
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
