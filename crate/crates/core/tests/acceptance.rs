//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::E;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polystab::cayley::{
    cayley_decay_run, cayley_norm_eval, cayley_power_weighted_norm, dr_ct_envelope_check, gn, gn_envelope, guo_zwart_inequality_check,
    liminf_bound_check, power_bounded_check, xi_from_r,
};
use polystab::lyapunov::{
    lyapunov_integral, lyapunov_limit_scan, lyapunov_solve_direct, plancherel_check, resolvent_energy,
};
use polystab::numerics::{gamma_tail_check, gautschi_bound_check, GridSpec, Verdict};
use polystab::operators::{
    apply_resolvent, frac_power, frac_power_weights, norm2, random, CMatrix, CVector, DiagonalOperator,
    MatrixOperator, OperatorHandle,
};
use polystab::perturbation::{perturbed_lyapunov_check, perturbed_rate_report, resolvent_factorization_check};
use polystab::semigroup::{
    moment_inequality_check, orbit_weighted_norm, semigroup_decay_run,
    semigroup_weighted_norm,
};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paper(n: usize) -> OperatorHandle {
    DiagonalOperator::paper_example(n).unwrap().into()
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn budget(ok: bool, elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (ok && s < limit_s, format!("{s:.2} s of {limit_s} s"))
}

fn c1_semigroup_rate() -> Outcome {
    let start = Instant::now();
    let op = paper(64);
    let run = semigroup_decay_run(&op, 1.0, &GridSpec::new(10.0, 1e4, 60)?)?;
    let at100 = semigroup_weighted_norm(&op, 100.0, 1.0)?;
    // oracle: explicit sup over k of e^{−t/k}/√(k⁻² + k²)
    let oracle = (1..=200_000)
        .map(|k| {
            let k = k as f64;
            (-100.0 / k).exp() / (k.powi(-2) + k * k).sqrt()
        })
        .fold(0.0, f64::max);
    let target = (-1.0f64).exp() / 100.0;
    let ok = within(run.fit.exponent, -1.0, 0.03)
        && (at100 / target - 1.0).abs() < 0.01
        && (at100 / oracle - 1.0).abs() < 1e-9
        && run.interior();
    let (ok, time) = budget(ok, start.elapsed(), 5.0);
    Ok((
        ok,
        format!(
            "exponent {:.4} (r² {:.5}), value(100) = {:.6e} vs e⁻¹/100 = {:.6e}, oracle {:.6e}; {time}",
            run.fit.exponent, run.fit.r_squared, at100, target, oracle
        ),
    ))
}

fn c2_cayley_rate() -> Outcome {
    let start = Instant::now();
    let op = paper(64);
    let run = cayley_decay_run(&op, 1.0, &GridSpec::new(1e3, 1e6, 40)?)?;
    let interior = run
        .samples
        .iter()
        .all(|s| s.interior && s.argmax.map_or(false, |k| k * 10 <= s.truncation));
    let ok = within(run.fit.exponent, -1.0 / 3.0, 0.03) && interior;
    let last = run.samples.last().unwrap();
    let (ok, time) = budget(ok, start.elapsed(), 60.0);
    Ok((
        ok,
        format!(
            "exponent {:.4} (r² {:.5}), interior {interior}, last argmax {:?} of N = {}; {time}",
            run.fit.exponent, run.fit.r_squared, last.argmax, last.truncation
        ),
    ))
}

fn c3_optimality() -> Outcome {
    let start = Instant::now();
    let op = paper(64);
    let mut ns: Vec<u64> = (1..=10_000).collect();
    ns.extend(GridSpec::new(1e4, 1e6, 2000)?.integer_values());
    ns.sort_unstable();
    ns.dedup();
    use rayon::prelude::*;
    let scaled = ns
        .par_iter()
        .map(|&n| cayley_norm_eval(&op, n, 3.0).map(|e| (n as f64 * e.value, e.interior)))
        .collect::<Result<Vec<_>, _>>()?;
    let max = scaled.iter().map(|s| s.0).fold(0.0, f64::max);
    let interior = scaled.iter().all(|s| s.1);
    let mut detail = format!("max n·‖A_dⁿA⁻³‖ = {max:.5} over {} n", ns.len());
    let mut ok = max.is_finite() && max >= 0.1 && interior;
    for m in [1u64, 3] {
        let scan = liminf_bound_check(&op, m, (30, 60))?;
        let pass = scan.min >= 0.9 * scan.bound && scan.interior;
        ok &= pass;
        detail.push_str(&format!("; m={m}: min {:.5e} vs 0.9e^(-2m) = {:.5e}", scan.min, 0.9 * scan.bound));
    }
    let (ok, time) = budget(ok, start.elapsed(), 60.0);
    Ok((ok, format!("{detail}; {time}")))
}

fn c4_log_free_bound() -> Outcome {
    let env = dr_ct_envelope_check(&paper(64), 1.0, &GridSpec::new(1e2, 1e6, 200)?)?;
    let series = &env.without_log.series;
    let last = series.last().unwrap().2;
    let decade = series.iter().rev().find(|s| s.0 * 10 <= series.last().unwrap().0).unwrap().2;
    let ok = env.without_log.stabilized && env.interior;
    Ok((
        ok,
        format!(
            "running sup of n·‖A_dⁿ(−A)⁻³‖: {decade:.6} at 1e5 → {last:.6} at 1e6 (change {:.3e}); log envelope sup {:.4}",
            (last - decade) / last,
            env.with_log.sup
        ),
    ))
}

fn c5_lyapunov_cross_validation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut worst_diff: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut all_psd = true;
    for trial in 0..50 {
        let n = 2 + (trial * 38) / 49;
        let op = random::random_stable_operator(n, 0.1, &mut rng);
        let xi = rng.random_range(0.05..1.0);
        let direct = lyapunov_solve_direct(&op, xi)?;
        let integral = lyapunov_integral(&op.clone().into(), xi, 1e-13)?;
        let d = direct.dense();
        worst_diff = worst_diff.max(norm2(&(integral.dense() - &d)) / norm2(&d));
        worst_res = worst_res.max(direct.residual).max(integral.residual);
        all_psd &= direct.is_hermitian_psd() && integral.is_hermitian_psd();
    }
    let ok = worst_diff <= 1e-8 && worst_res <= 1e-8 && all_psd;
    let (ok, time) = budget(ok, start.elapsed(), 60.0);
    Ok((
        ok,
        format!("worst relative gap {worst_diff:.2e}, worst residual {worst_res:.2e}, hermitian-PSD {all_psd}; {time}"),
    ))
}

fn c6_plancherel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst_diag: f64 = 0.0;
    let op = paper(40);
    for k in 0..40 {
        let mut e = CVector::zeros(40);
        e[k] = c(1.0, 0.0);
        for xi in [1e-3, 0.1, 1.0] {
            worst_diag = worst_diag.max(plancherel_check(&op, xi, &e)?.rel_err);
        }
    }
    for _ in 0..5 {
        let x = CVector::from_fn(40, |k, _| random::gaussian(&mut rng) / (k as f64 + 1.0));
        worst_diag = worst_diag.max(plancherel_check(&op, 0.05, &x)?.rel_err);
    }
    let mut worst_matrix: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let m: OperatorHandle = random::random_stable_operator(n, 0.1, &mut rng).into();
        let x = random::random_vector(n, &mut rng);
        let xi = rng.random_range(0.05..1.0);
        worst_matrix = worst_matrix.max(plancherel_check(&m, xi, &x)?.rel_err);
    }
    Ok((
        worst_diag <= 1e-5 && worst_matrix <= 1e-5,
        format!("worst rel-err diagonal {worst_diag:.2e}, matrix {worst_matrix:.2e}"),
    ))
}

fn c7_limit_scans() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let n = 400;
    let op = paper(n);
    let grid = GridSpec::new(1e-6, 0.1, 26)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for gamma in [0.25, 0.5] {
        let mut worst: f64 = 0.0;
        let mut monotone = true;
        let mut pass = true;
        for _ in 0..5 {
            let x = CVector::from_fn(n, |k, _| random::gaussian(&mut rng) / (k as f64 + 1.0));
            let scan = lyapunov_limit_scan(&op, 1.0, gamma, &x, &grid)?;
            worst = worst.max(scan.decay_factor());
            monotone &= scan.tail_monotone();
            pass &= scan.vanishing();
        }
        ok &= pass;
        detail.push(format!(
            "γ={gamma}: {} (worst last/first {worst:.3}, tail monotone {monotone})",
            if pass { "vanishing" } else { "NOT vanishing" }
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn c8_guo_zwart() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut holds = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=10);
        let op = random::random_stable_operator(n, rng.random_range(0.05..0.5), &mut rng);
        let bound = power_bounded_check(&op.clone().into(), 100_000)?;
        let r: f64 = rng.random_range(0.01..0.99);
        let q = lyapunov_solve_direct(&op, xi_from_r(r))?;
        let x = random::random_vector(n, &mut rng);
        let y = random::random_vector(n, &mut rng);
        let k = rng.random_range(0..=1000);
        let b = guo_zwart_inequality_check(&op, &x, &y, r, k, &q, bound.m)?;
        if b.holds && bound.certified {
            holds += 1;
        }
        worst_ratio = worst_ratio.max(b.lhs / b.rhs);
    }
    let scalar = MatrixOperator::new(CMatrix::from_element(1, 1, c(-1.0, 0.0)))?;
    let q = lyapunov_solve_direct(&scalar, 0.3)?;
    let one = CVector::from_element(1, c(1.0, 0.0));
    let b = guo_zwart_inequality_check(&scalar, &one, &one, 0.5, 0, &q, 1.0)?;
    let closed_rhs = (1.0 / 2.6 / (1.0 - 0.5f64.powi(4))).sqrt();
    let exact = (b.lhs - 0.5).abs() < 1e-14 && (b.rhs - closed_rhs).abs() < 1e-14 && b.holds;
    Ok((
        holds == 100 && exact,
        format!("{holds}/100 random trials (max lhs/rhs {worst_ratio:.3}); scalar lhs {:.6} ≤ rhs {:.6}", b.lhs, b.rhs),
    ))
}

fn c9_perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut lyap_holds = 0;
    let mut worst_min: f64 = f64::INFINITY;
    for trial in 0..100 {
        let op = random::random_stable_operator(10, 0.1, &mut rng);
        let kappa = 1.5 * norm2(&op.inverse()?).powi(2);
        let xi = if trial % 2 == 0 { 0.1 } else { 1.0 };
        let chk = perturbed_lyapunov_check(&op, xi, kappa)?;
        worst_min = worst_min.min(chk.min_eig);
        if chk.holds && !chk.kappa_too_small {
            lyap_holds += 1;
        }
    }
    let classes: Vec<OperatorHandle> = vec![
        DiagonalOperator::paper_example(10)?.fixed().into(),
        random::random_stable_operator(8, 0.1, &mut rng).into(),
        random::unitary_conjugate(&DiagonalOperator::paper_example(10)?, &mut rng)?.into(),
    ];
    let mut worst_fact: f64 = 0.0;
    for op in &classes {
        for _ in 0..20 {
            let omega = rng.random_range(-20.0..20.0);
            let x = random::random_vector(op.dim(), &mut rng);
            worst_fact = worst_fact.max(resolvent_factorization_check(op, omega, &x)?.rel_err);
        }
    }
    let rate = perturbed_rate_report(&paper(64), 1.0, 1.0, &GridSpec::new(10.0, 1e4, 60)?, 0.05)?;
    let ok = lyap_holds == 100
        && worst_fact <= 1e-8
        && within(rate.perturbed.fit.exponent, -1.0, 0.05)
        && rate.verdict == Verdict::Pass;
    Ok((
        ok,
        format!(
            "Lyapunov {lyap_holds}/100 (min eig {worst_min:.3e}); factorization worst {worst_fact:.2e}; perturbed exponent {:.4} vs guarantee {:.2} → {}",
            rate.perturbed.fit.exponent, rate.effective_exponent, rate.verdict
        ),
    ))
}

fn c10_normalization() -> Outcome {
    let op = paper(64);
    let tgrid = GridSpec::new(10.0, 1e4, 40)?;
    let ngrid = GridSpec::new(1e3, 1e6, 30)?;
    let base_t = semigroup_decay_run(&op, 1.0, &tgrid)?.fit.exponent;
    let base_n = cayley_decay_run(&op, 3.0, &ngrid)?.fit.exponent;
    let mut ok = true;
    let mut detail = Vec::new();
    for gamma in [0.25, 1.0 / 3.0, 0.5, 2.0] {
        let cont = semigroup_decay_run(&op, gamma, &tgrid)?;
        let disc = cayley_decay_run(&op, 3.0 * gamma, &ngrid)?;
        let dc = cont.fit.exponent - gamma * base_t;
        let dd = disc.fit.exponent - gamma * base_n;
        ok &= dc.abs() <= 0.05 && dd.abs() <= 0.05 && cont.interior() && disc.interior();
        detail.push(format!("γ={gamma:.3}: Δcont {dc:+.4}, Δdisc {dd:+.4}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let d50 = paper(50);
    let mut moment = 0;
    for _ in 0..1000 {
        let x = random::random_vector(50, &mut rng);
        let a = rng.random_range(1e-3..=2.0);
        let theta = rng.random_range(1e-3..1.0);
        if moment_inequality_check(&d50, &x, a, theta)?.holds {
            moment += 1;
        }
    }
    ok &= moment == 1000;
    detail.push(format!("moment inequality {moment}/1000"));
    Ok((ok, detail.join("; ")))
}

fn c11_scalar_identities() -> Outcome {
    let mut worst_gamma: f64 = 0.0;
    for i in 1..=9 {
        let g = 0.05 * i as f64;
        for xi in [0.1, 1.0, 10.0] {
            worst_gamma = worst_gamma.max(gamma_tail_check(g, xi)?.rel_err);
        }
    }
    let mut gautschi = 0;
    for i in 0..50 {
        let tau = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
        if gautschi_bound_check(tau)?.holds {
            gautschi += 1;
        }
    }
    let (_, g_large) = gn_envelope(1.0, 10_000)?;
    let limit_gap = (g_large / (2.0 / E) - 1.0).abs();
    let mut grid_ok = true;
    for (c2, n) in [(0.5, 3u64), (1.0, 10), (2.0, 100), (3.0, 1000)] {
        let (s_star, g_max) = gn_envelope(c2, n)?;
        let steps = 200_000;
        let (mut best_s, mut best) = (c2, 0.0);
        for i in 0..=steps {
            let s = c2 + (10.0 * s_star - c2) * i as f64 / steps as f64;
            let v = gn(c2, n, s);
            if v > best {
                best = v;
                best_s = s;
            }
        }
        let h = (10.0 * s_star - c2) / steps as f64;
        grid_ok &= (best_s - s_star).abs() <= 2.0 * h && (best - g_max).abs() <= 1e-8 * g_max;
    }
    let ok = worst_gamma <= 1e-6 && gautschi == 50 && limit_gap < 0.01 && grid_ok;
    Ok((
        ok,
        format!(
            "gamma tail worst {worst_gamma:.2e}; Gautschi {gautschi}/50; g_n(1e4)/(2/e) − 1 = {limit_gap:.2e}; grid maximizer match {grid_ok}"
        ),
    ))
}

fn c12_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    let diag_op = DiagonalOperator::paper_example(20)?.fixed();
    let m = random::unitary_conjugate(&diag_op, &mut rng)?;
    let d: OperatorHandle = diag_op.into();
    let mh: OperatorHandle = m.clone().into();
    let mut worst: f64 = 0.0;
    let mut note = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs() / scale);
    };
    for t in [0.0, 0.5, 5.0, 40.0] {
        for beta in [0.0, 0.5, 1.0, 3.0] {
            note(semigroup_weighted_norm(&d, t, beta)?, semigroup_weighted_norm(&mh, t, beta)?);
            let x = random::random_vector(20, &mut rng);
            // the matrix acts on U x where U maps diagonal coordinates
            let ux = to_matrix_coords(&m, &d, &x);
            note(orbit_weighted_norm(&d, t, beta, &x)?, orbit_weighted_norm(&mh, t, beta, &ux)?);
        }
    }
    for n in [0u64, 1, 10, 100, 1000] {
        for beta in [0.0, 1.0, 3.0] {
            note(cayley_power_weighted_norm(&d, n, beta)?, cayley_power_weighted_norm(&mh, n, beta)?);
        }
    }
    for _ in 0..10 {
        let x = random::random_vector(20, &mut rng);
        let ux = to_matrix_coords(&m, &d, &x);
        let z = c(rng.random_range(-1.0..1.0), rng.random_range(-25.0..25.0));
        note(
            apply_resolvent(&d, z, &x)?.norm(),
            apply_resolvent(&mh, z, &ux)?.norm(),
        );
        for xi in [0.05, 0.5] {
            let dq = polystab::lyapunov::lyapunov_quadratic_form(&d, xi, &x)?;
            let mq = lyapunov_solve_direct(&m, xi)?.quadratic_form(&ux)?;
            note(dq, mq);
        }
        let beta = rng.random_range(0.0..3.0);
        let wd: CVector = CVector::from_vec(frac_power_weights(&d, beta)).component_mul(&x);
        let wm = m.apply_function(|mu| frac_power(mu, beta)) * &ux;
        note(wd.norm(), wm.norm());
    }
    let energy_d = resolvent_energy(&d, 0.3, &CVector::from_element(20, c(1.0, 0.0)), 1e-12)?;
    let ones = to_matrix_coords(&m, &d, &CVector::from_element(20, c(1.0, 0.0)));
    let energy_m = resolvent_energy(&mh, 0.3, &ones, 1e-12)?;
    let energy_gap = (energy_d - energy_m).abs() / energy_d;
    Ok((
        worst <= 1e-10 && energy_gap <= 1e-10,
        format!("worst relative gap {worst:.2e} (resolvent energy {energy_gap:.2e})"),
    ))
}

/// Maps diagonal coordinates to the matrix's eigenbasis, pairing modes by
/// eigenvalue. Unit eigenvectors of a normal matrix differ from the
/// conjugating unitary only by phases, which no norm below sees.
fn to_matrix_coords(m: &MatrixOperator, d: &OperatorHandle, x: &CVector) -> CVector {
    let mut out = CVector::zeros(x.len());
    for (k, mu) in d.eigenvalues().iter().enumerate() {
        let j = m
            .eigenvalues()
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - mu).norm().total_cmp(&(b.1 - mu).norm()))
            .unwrap()
            .0;
        out += m.eigvecs().column(j) * x[k];
    }
    out
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "example semigroup rate", c1_semigroup_rate),
        (2, "example Cayley rate", c2_cayley_rate),
        (3, "example optimality", c3_optimality),
        (4, "normal-case log-free bound", c4_log_free_bound),
        (5, "Lyapunov cross-validation", c5_lyapunov_cross_validation),
        (6, "Plancherel bridge", c6_plancherel),
        (7, "limit scans", c7_limit_scans),
        (8, "Guo–Zwart inequality", c8_guo_zwart),
        (9, "perturbation suite", c9_perturbation),
        (10, "normalization suites", c10_normalization),
        (11, "scalar identities", c11_scalar_identities),
        (12, "oracle equivalence", c12_oracle_equivalence),
    ];
    let total = Instant::now();
    let mut failures = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] criterion {id:>2} {name}: {detail} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of 12 criteria passed in {:.1} s",
        12 - failures,
        total.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
