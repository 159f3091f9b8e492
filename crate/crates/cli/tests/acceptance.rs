//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line with its
//! measured value, threshold and wall time; the test fails if any criterion
//! does.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use martinet_lab::geometry::{
    detect_loops, rado_check, total_turning_closed, trace_loop_turning_quadrature, weighted_area_line, weighted_area_region, ClosedCurve,
};
use martinet_lab::levelset::{asymptotic_coefficient, asymptotic_report, calibrate_k_fit, log_grid};
use martinet_lab::verify::{
    brute_force_crossings, closed_loop, curvature_ratios, hamiltonian_drift, length_expansion_ratios, looping_traces, orientation, random_convex_polygon,
    random_star_polygon, random_walk, rectangle, shooting_round_trip, unit_square, CURVATURE_CASES,
};
use martinet_lab::{PlanePoint, StructureParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Criterion = fn(&mut Shared) -> martinet_lab::Result<Outcome>;

/// State shared between criteria: closed curves fed to the Radó check, and
/// the minimize reports reused by the branching criterion.
#[derive(Default)]
struct Shared {
    closed: Vec<ClosedCurve>,
    best_lengths: Option<(f64, f64)>,
}

fn b5() -> StructureParams {
    StructureParams::new(5).unwrap()
}

fn length_expansion(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let eps = [0.2, 0.1, 0.05, 0.02];
    let r = length_expansion_ratios(&eps)?;
    let limit = 0.78125;
    let dist: Vec<f64> = r.iter().map(|v| (v - limit).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let rel = dist[3] / limit;
    Ok(outcome(rel <= 0.01 && monotone, format!("rel error at ε=0.02 {rel:.3e} (≤ 1e-2), monotone {monotone}, ratios {r:?}")))
}

fn alpha_xi(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (b, expected) in [(5u32, 3.75), (7, 8.75)] {
        let p = StructureParams::new(b)?;
        let coef = asymptotic_coefficient(p);
        ok &= coef == expected;
        let mut worst = 0.0f64;
        let mut used = 0;
        for zeta in log_grid(1e-30, 1e-12, 10) {
            let r = asymptotic_report(p, 0.1, zeta)?;
            if r.xi < 1e-3 {
                worst = worst.max((r.ratio / coef - 1.0).abs());
                used += 1;
            }
        }
        ok &= used > 0 && worst <= 0.02;
        parts.push(format!("b={b}: limit {coef}, worst rel {worst:.3e} over {used} points"));
    }
    Ok(outcome(ok, format!("{} (≤ 2e-2)", parts.join("; "))))
}

fn k_fit_stability(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let cal = calibrate_k_fit(b5())?;
    let spread = cal.spread();
    Ok(outcome(
        spread <= 2.0,
        format!("max/min of deficit/ζ^(1−1/b) = {spread:.4} (≤ 2), K_fit {:.4}, range [{:.4}, {:.4}] over {} points", cal.k_fit, cal.min_scaled, cal.max_scaled, cal.points),
    ))
}

fn stokes(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let p = b5();
    let sq = unit_square();
    // 2/3 is not representable; allow a few ulps
    let line = (weighted_area_line(p, &sq) - 2.0 / 3.0).abs();
    let region = (weighted_area_region(p, &sq, 512)? - 2.0 / 3.0).abs();
    let (eps, alpha) = (0.1, 1e-5);
    let rect = rectangle(p, eps, alpha);
    let rel = (weighted_area_line(p, &rect).abs() / (4.0 * alpha.powi(3) * eps.powi(5)) - 1.0).abs();
    sh.closed.push(sq);
    sh.closed.push(rect);
    Ok(outcome(
        line <= 4.0 * f64::EPSILON && region <= 2e-3 && rel <= 0.1,
        format!("square line {line:.2e} (≤ 4 ulp), region@512 {region:.2e} (≤ 2e-3), rectangle rel {rel:.3e} (≤ 0.1)"),
    ))
}

fn rado(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let p = b5();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        sh.closed.push(random_convex_polygon(&mut rng));
        sh.closed.push(random_star_polygon(&mut rng));
    }
    let n = sh.closed.len();
    let failed = sh.closed.iter().filter(|c| !rado_check(p, c).ok).count();
    let worst = sh.closed.iter().map(|c| rado_check(p, c)).map(|r| r.lhs - r.rhs).fold(f64::NEG_INFINITY, f64::max);
    Ok(outcome(n >= 200 && failed == 0, format!("{failed} violations over {n} closed curves (need ≥ 200), worst lhs − rhs {worst:.3e}")))
}

fn hamiltonian(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let drift = hamiltonian_drift(20, 99, 1e-4)?;
    Ok(outcome(drift <= 1e-9, format!("max |H(t) − H(0)| {drift:.3e} (≤ 1e-9), 20 states")))
}

fn curvature(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x1, x2, th, lam) in &CURVATURE_CASES {
        let (r1, r2) = curvature_ratios(b5(), PlanePoint::new(x1, x2), th, lam, 1.0, 1e-2)?;
        lo = lo.min(r1.min(r2));
        hi = hi.max(r1.max(r2));
    }
    Ok(outcome((3.5..=4.5).contains(&lo) && (3.5..=4.5).contains(&hi), format!("ratios in [{lo:.4}, {hi:.4}] (within [3.5, 4.5]), 5 traces")))
}

fn gauss_bonnet(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let p = b5();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut poly_worst = 0.0f64;
    let mut sign_ok = true;
    for _ in 0..100 {
        let c = random_convex_polygon(&mut rng);
        let tt = total_turning_closed(&c)?;
        poly_worst = poly_worst.max((tt.abs() - 2.0 * PI).abs());
        sign_ok &= tt.signum() as i32 == orientation(&c);
    }
    let mut loop_worst = 0.0f64;
    let traces = looping_traces(20, 8, 1e-4)?;
    for tr in &traces {
        let lp = detect_loops(&tr.curve)?[0];
        let turn = trace_loop_turning_quadrature(p, tr, &lp)?;
        let closed = closed_loop(&tr.curve, &lp)?;
        loop_worst = loop_worst.max((turn.abs() - 2.0 * PI).abs());
        sign_ok &= turn.signum() as i32 == orientation(&closed);
        sh.closed.push(closed);
    }
    Ok(outcome(
        poly_worst <= 1e-6 && loop_worst <= 1e-4 && sign_ok,
        format!("convex {poly_worst:.2e} (≤ 1e-6), extremal loops {loop_worst:.2e} (≤ 1e-4) over {} loops, signs match {sign_ok}", traces.len()),
    ))
}

fn loop_oracle(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    let mut crossings = 0;
    for k in 1..=50 {
        let c = random_walk(&mut rng, 40 * k);
        let loops = detect_loops(&c)?;
        let mut fast: Vec<(usize, usize)> = loops.iter().map(|l| l.segments).collect();
        fast.sort_unstable();
        let slow: Vec<(usize, usize)> = brute_force_crossings(&c).iter().map(|&(i, j, _)| (i, j)).collect();
        crossings += slow.len();
        if fast != slow {
            mismatches += 1;
        }
        for lp in loops.iter().take(2) {
            if let Ok(closed) = closed_loop(&c, lp) {
                sh.closed.push(closed);
            }
        }
    }
    Ok(outcome(mismatches == 0, format!("{mismatches} mismatching curves of 50 (40..2000 segments, {crossings} crossings)")))
}

fn lab(args: &[&str], out: &Path) -> (i32, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_lab")).arg("--out").arg(out).args(args).status().expect("lab runs");
    let report = std::fs::read(out.join("result.json")).ok().and_then(|b| serde_json::from_slice(&b).ok()).unwrap_or(Value::Null);
    (status.code().unwrap_or(-1), report)
}

fn minimality(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let args = ["minimize", "--s", "0.005", "--eps", "0.1", "--nodes", "2000", "--seeds", "16"];
    let (code, rep) = lab(&args, &dir.path().join("plain"));
    let mut margs = args.to_vec();
    margs.push("--mirror");
    let (mcode, mrep) = lab(&margs, &dir.path().join("mirror"));
    let best = rep["best"]["length"].as_f64().unwrap_or(f64::NAN);
    let mbest = mrep["best"]["length"].as_f64().unwrap_or(f64::NAN);
    sh.best_lengths = Some((best, mbest));
    let worst_gap = rep["candidates"]
        .as_array()
        .map(|c| c.iter().filter(|c| c["feasible"] == true).filter_map(|c| c["gap"].as_f64()).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN);
    let starts = rep["budget"]["shooting_starts"].as_u64().unwrap_or(0);
    let ok = code == 0 && mcode == 0 && rep["beaten"] == false && worst_gap >= -1e-6 && starts == 400;
    Ok(outcome(
        ok,
        format!("exit {code} (mirrored {mcode}), min feasible gap {worst_gap:.3e} (≥ −1e-6), shooting starts {starts}, verdict {:?}", rep["verdict"].as_str().unwrap_or("")),
    ))
}

fn branching(sh: &mut Shared) -> martinet_lab::Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let (code, rep) = lab(&["branch", "--s", "0.005", "--eps", "0.1", "--nodes", "2000"], dir.path());
    let diff = rep["max_length_difference"].as_f64().unwrap_or(f64::NAN);
    let (best, mbest) = sh.best_lengths.unwrap_or((f64::NAN, f64::NAN));
    let best_diff = (best - mbest).abs();
    let agree = rep["gamma_branches_agree"] == true;
    Ok(outcome(
        code == 0 && diff <= 1e-12 && best_diff <= 1e-12 && agree,
        format!("best-length difference {best_diff:.2e}, per-init difference {diff:.2e} (≤ 1e-12), γ = γ̄ on t ≤ 0 {agree}, exit {code}"),
    ))
}

fn round_trip(_: &mut Shared) -> martinet_lab::Result<Outcome> {
    let mut worst = 0.0f64;
    let mut all_converged = true;
    for seed in 0..20 {
        let (err, conv) = shooting_round_trip(seed)?;
        worst = worst.max(err);
        all_converged &= conv;
    }
    Ok(outcome(worst <= 1e-8 && all_converged, format!("worst parameter error {worst:.2e} (≤ 1e-8), all converged {all_converged}, 20 seeds")))
}

#[test]
fn acceptance() {
    // Radó (5) runs after every curve producer so it sees all closed curves.
    let criteria: [(usize, &str, Criterion, Duration); 12] = [
        (1, "length expansion", length_expansion, Duration::from_secs(1)),
        (2, "α/ξ² asymptotics", alpha_xi, Duration::from_secs(1)),
        (3, "deficit bound K_fit stability", k_fit_stability, Duration::from_secs(10)),
        (4, "Stokes/area", stokes, Duration::from_secs(5)),
        (6, "Hamiltonian conservation", hamiltonian, Duration::from_secs(5)),
        (7, "curvature law", curvature, Duration::from_secs(5)),
        (8, "Gauss–Bonnet", gauss_bonnet, Duration::from_secs(5)),
        (9, "loop detection oracle", loop_oracle, Duration::from_secs(30)),
        (5, "Radó inequality", rado, Duration::from_secs(10)),
        (10, "minimality probe", minimality, Duration::from_secs(600)),
        (11, "branching symmetry", branching, Duration::from_secs(600)),
        (12, "shooting round trip", round_trip, Duration::from_secs(30)),
    ];
    let mut shared = Shared::default();
    let mut lines = Vec::new();
    for (id, name, run, limit) in criteria {
        let t0 = Instant::now();
        let res = run(&mut shared).unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let el = t0.elapsed();
        let passed = res.passed && el <= limit;
        let line = format!(
            "criterion {id:>2} {} {name}: {}; runtime {:.2}s (limit {}s)",
            if passed { "PASS" } else { "FAIL" },
            res.detail,
            el.as_secs_f64(),
            limit.as_secs()
        );
        println!("{line}");
        lines.push((id, passed, line));
    }
    lines.sort_by_key(|l| l.0);
    let failed: Vec<&str> = lines.iter().filter(|l| !l.1).map(|l| l.2.as_str()).collect();
    println!("acceptance: {}/12 passed", 12 - failed.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
