//! Exit-gate criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines appear in plain `cargo test` output.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use israte::conjugate::{biconjugate, legendre_conjugate, legendre_conjugate_brute, SampledFunction};
use israte::cumulant::{cgf_curves, rate_from_cgf, TruncationWindow};
use israte::spectrum::{estimate_rate_curve, NSchedule, ShrinkSchedule};
use israte::verify::{GammaSet, Tolerance, Verdict, Verifier};
use israte::{ExtReal, Gaussian, Interval, RateCurve, SourceSpec, UniformGrid};
use israte_cli::{cmd_report, ExperimentConfig, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn g(mu: f64) -> Gaussian {
    Gaussian::new(mu, 1.0).unwrap()
}

fn std_normal() -> SourceSpec {
    SourceSpec::gaussian(0.0, 1.0).unwrap()
}

fn mixed() -> SourceSpec {
    SourceSpec::mixed(g(-1.0), g(1.0), [0.5, 0.5]).unwrap()
}

fn interleaved() -> SourceSpec {
    SourceSpec::interleaved(g(-1.0), g(1.0)).unwrap()
}

fn schedule() -> ShrinkSchedule {
    ShrinkSchedule::new(1, 5, NSchedule::geometric(1000, 10_000, 12, 5).unwrap()).unwrap()
}

fn grid(lo: f64, hi: f64, step: f64) -> UniformGrid {
    UniformGrid::new(lo, hi, step).unwrap()
}

fn r_grid() -> UniformGrid {
    grid(-3.0, 3.0, 0.05)
}

fn curve(src: &SourceSpec) -> RateCurve {
    estimate_rate_curve(src, &r_grid(), &schedule()).unwrap()
}

/// Gaussian Cramér rate with unit variance.
fn cramer(mu: f64, r: f64) -> f64 {
    (r - mu).powi(2) / 2.0
}

fn pair_min(r: f64) -> f64 {
    cramer(-1.0, r).min(cramer(1.0, r))
}

fn pair_max(r: f64) -> f64 {
    cramer(-1.0, r).max(cramer(1.0, r))
}

fn dist(a: ExtReal, b: f64) -> f64 {
    a.finite().map_or(f64::INFINITY, |a| (a - b).abs())
}

fn edist(a: ExtReal, b: ExtReal) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).finite().map_or(f64::INFINITY, f64::abs)
    }
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_mixed_rate() -> Outcome {
    let c = curve(&mixed());
    let xs = c.grid.points();
    let err_lo = xs.iter().enumerate().map(|(j, &r)| dist(c.lower[j], pair_min(r))).fold(0.0, f64::max);
    let err_hi = xs.iter().enumerate().map(|(j, &r)| dist(c.upper[j], pair_min(r))).fold(0.0, f64::max);
    let gap = (0..c.len()).map(|j| edist(c.lower[j], c.upper[j])).fold(0.0, f64::max);
    require(
        err_lo <= 0.05 && err_hi <= 0.05 && gap <= 0.02,
        format!("max err lower {err_lo:.4}, upper {err_hi:.4} (<= 0.05); lower/upper gap {gap:.4} (<= 0.02)"),
    )
}

fn c2_interleaved_rate() -> Outcome {
    let c = curve(&interleaved());
    let (mut err_lo, mut err_hi) = (0.0f64, 0.0f64);
    for (j, r) in c.grid.points().into_iter().enumerate() {
        if (-2.0 - 1e-9..=2.0 + 1e-9).contains(&r) {
            err_lo = err_lo.max(dist(c.lower[j], pair_min(r)));
            err_hi = err_hi.max(dist(c.upper[j], pair_max(r)));
        }
    }
    let j = c.grid.nearest(1.0);
    let gap = (c.upper[j] - c.lower[j]).to_f64();
    require(
        err_lo <= 0.07 && err_hi <= 0.07 && gap >= 1.5,
        format!("max err lower {err_lo:.4}, upper {err_hi:.4} (<= 0.07); gap at R=1 {gap:.4} (>= 1.5)"),
    )
}

fn c3_mixed_cgf() -> Outcome {
    let c = cgf_curves(&mixed(), TruncationWindow::Full, &grid(-3.0, 3.0, 0.01), &schedule().n).unwrap();
    let mut err = 0.0f64;
    let mut gap = 0.0f64;
    for (j, t) in c.theta_grid.points().into_iter().enumerate() {
        let oracle = (-t + t * t / 2.0).max(t + t * t / 2.0);
        err = err.max(dist(c.lower[j], oracle)).max(dist(c.upper[j], oracle));
        gap = gap.max(edist(c.lower[j], c.upper[j]));
    }
    require(err <= 0.02 && gap <= 0.01, format!("max err {err:.5} (<= 0.02); lower/upper gap {gap:.5} (<= 0.01)"))
}

fn c4_convexification_gap() -> Outcome {
    let src = mixed();
    let c = curve(&src);
    let cgf = cgf_curves(&src, TruncationWindow::Full, &grid(-5.0, 5.0, 0.01), &schedule().n).unwrap();
    let rates = rate_from_cgf(&cgf, &r_grid()).unwrap();
    let j = c.grid.nearest(0.0);
    let gap = (c.lower[j] - rates.lower.values()[j]).to_f64();
    require((0.45..=0.55).contains(&gap), format!("H_lower(0) - I_lower(0) = {gap:.4} (in [0.45, 0.55])"))
}

fn c5_duality() -> Outcome {
    let sch = schedule();
    let w = TruncationWindow::interval(-3.0, 3.0).unwrap();
    let mut parts = vec![];
    let mut ok = true;
    for src in SourceSpec::bundled() {
        let c = curve(&src);
        let cgf = cgf_curves(&src, w, &grid(-2.0, 2.0, 0.01), &sch.n).unwrap();
        let conj =
            legendre_conjugate(&c.lower_function().restricted(|x| (-3.0..=3.0).contains(&x)), &cgf.theta_grid).unwrap();
        let gap = (0..cgf.theta_grid.len()).map(|j| edist(cgf.upper[j], conj.values()[j])).fold(0.0, f64::max);
        let rep = Verifier::new(&src, &sch, Tolerance::default()).unwrap().duality(w, &c, &cgf).unwrap();
        ok &= gap <= 0.05 && rep.verdict == Verdict::Holds;
        parts.push(format!("{} {gap:.4} {}", src.slug(), rep.verdict.as_str()));
    }
    require(ok, format!("max |phi_upper_M - conj(H_lower_M)| per source (<= 0.05): {}", parts.join(", ")))
}

/// Random sampled function: a minimum of shifted parabolas plus noise, with
/// optional infinite stretches.
fn random_function(rng: &mut ChaCha8Rng, grid: UniformGrid, infinite_pattern: bool) -> SampledFunction {
    let k = rng.random_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0), rng.random_range(-1.0..1.0)))
        .collect();
    let (cut_lo, cut_hi) = (rng.random_range(-3.0..-0.5), rng.random_range(0.5..3.0));
    SampledFunction::from_fn(grid, |x| {
        if infinite_pattern && (x < cut_lo || x > cut_hi) {
            return ExtReal::PosInf;
        }
        let v = bumps.iter().map(|(c, a, b)| a * (x - c).powi(2) / 2.0 + b).fold(f64::INFINITY, f64::min);
        ExtReal::from(v)
    })
    .map(|mut f| {
        for v in f.values.iter_mut() {
            if v.is_finite() {
                *v = *v + rng.random_range(0.0..0.05);
            }
        }
        f
    })
    .unwrap()
}

fn c6_reduction() -> Outcome {
    let sch = schedule();
    let mut worst = 0.0f64;
    let mut per = vec![];
    for src in [std_normal(), mixed(), interleaved()] {
        let c = curve(&src);
        let hull = biconjugate(&c.lower_function()).unwrap();
        let cgf = cgf_curves(&src, TruncationWindow::Full, &grid(-5.0, 5.0, 0.01), &sch.n).unwrap();
        let i_lo = rate_from_cgf(&cgf, &r_grid()).unwrap().lower;
        let err = (0..c.len()).map(|j| edist(hull.values[j], i_lo.values()[j])).fold(0.0, f64::max);
        worst = worst.max(err);
        per.push(format!("{} {err:.4}", src.slug()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut chain = 0.0f64;
    let theta = grid(-4.0, 4.0, 0.02);
    for k in 0..20 {
        let h = random_function(&mut rng, r_grid(), k % 4 == 3);
        let hull = biconjugate(&h).unwrap();
        // I from a cumulant function known only on a bounded theta range
        let phi = legendre_conjugate(&h, &theta).unwrap().function;
        let i = legendre_conjugate(&phi, &h.grid).unwrap().function;
        for j in 0..h.len() {
            chain = chain.max((hull.values[j] - h.values[j]).finite().unwrap_or(0.0));
            chain = chain.max((i.values[j] - hull.values[j]).finite().unwrap_or(0.0));
            if h.values[j].is_pos_inf() && !hull.values[j].is_pos_inf() {
                chain = f64::INFINITY;
            }
        }
    }
    require(
        worst <= 0.05 && chain <= 0.01,
        format!(
            "|hull(H_lower) - I_lower| per source (<= 0.05): {}; synthetic chain excess {chain:.2e} (<= 0.01)",
            per.join(", ")
        ),
    )
}

fn sandwich_suite(src: &SourceSpec, sch: &ShrinkSchedule) -> (usize, usize, usize) {
    let c = estimate_rate_curve(src, &r_grid(), sch).unwrap();
    let v = Verifier::new(src, sch, Tolerance::default()).unwrap();
    let suite = GammaSet::generate(2024, 20, -3.0, 3.0);
    let mut reports = vec![];
    for g in &suite {
        reports.push(v.sandwich_upper(g, &c).unwrap());
        reports.push(v.sandwich_lower(g, &c).unwrap());
    }
    reports.push(v.full_ldp(&suite, &c).unwrap());
    let count = |want: Verdict| reports.iter().filter(|r| r.verdict == want).count();
    (reports.len(), count(Verdict::Violated), count(Verdict::Inconclusive))
}

fn c7_sandwich() -> Outcome {
    let sch = schedule();
    let mut ok = true;
    let mut parts = vec![];
    for src in [std_normal(), mixed(), interleaved()] {
        let (n, violated, inconclusive) = sandwich_suite(&src, &sch);
        let mut part = format!("{} {n} reports, {violated} VIOLATED, {inconclusive} INCONCLUSIVE", src.slug());
        ok &= violated == 0 && inconclusive <= 2;
        if inconclusive > 0 {
            let start = Instant::now();
            let doubled = ShrinkSchedule { n: sch.n.scaled(2).unwrap(), ..sch.clone() };
            let (_, v2, i2) = sandwich_suite(&src, &doubled);
            ok &= v2 == 0 && i2 == 0 && start.elapsed().as_secs() <= 600;
            part += &format!(" -> doubled n_max: {v2} VIOLATED, {i2} INCONCLUSIVE");
        }
        parts.push(part);
    }
    require(ok, parts.join("; "))
}

fn c8_counterexample() -> Outcome {
    let src = SourceSpec::divergent();
    let sch = schedule();
    let v = Verifier::new(&src, &sch, Tolerance::default()).unwrap();
    let label = v.e_tightness().label();
    let whole = GammaSet::interval(Interval::closed(-1e10, 1e10).unwrap());
    let rep = v.full_ldp(&[whole], &curve(&src)).unwrap().expecting(israte::verify::Expectation::Violated);
    require(
        label == "NOT-E-TIGHT" && rep.verdict == Verdict::Violated && rep.meets_expectation(),
        format!("e_tightness {label}; full_ldp on [-1e10, 1e10] {} (expected VIOLATED)", rep.verdict.as_str()),
    )
}

fn c9_conjugation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatch = 0.0f64;
    for k in 0..100 {
        let step = [0.01, 0.05, 0.1][k % 3];
        let f = random_function(&mut rng, grid(-3.0, 3.0, step), k % 2 == 0);
        let mut f = f;
        if k % 10 == 5 {
            f.values.iter_mut().for_each(|v| *v = ExtReal::PosInf);
        }
        if k % 25 == 7 {
            let j = rng.random_range(0..f.len());
            f.values[j] = ExtReal::NegInf;
        }
        let theta = grid(rng.random_range(-6.0..-1.0), rng.random_range(1.0..6.0), 0.037);
        let fast = legendre_conjugate(&f, &theta).unwrap();
        let brute = legendre_conjugate_brute(&f, &theta).unwrap();
        for (a, b) in fast.values().iter().zip(brute.values()) {
            mismatch = mismatch.max(edist(*a, *b));
        }
    }
    let q = SampledFunction::from_fn(grid(-5.0, 5.0, 1e-3), |x| ExtReal::from(x * x / 2.0)).unwrap();
    let tq = grid(-3.0, 3.0, 0.01);
    let qc = legendre_conjugate(&q, &tq).unwrap();
    let self_conj = tq.points().iter().zip(qc.values()).map(|(t, v)| dist(*v, t * t / 2.0)).fold(0.0, f64::max);

    let f = random_function(&mut rng, grid(-3.0, 3.0, 0.05), false);
    let tf = grid(-4.0, 4.0, 0.05);
    let fc = legendre_conjugate(&f, &tf).unwrap();
    let mut fenchel = f64::NEG_INFINITY;
    for (x, fx) in f.points() {
        for (t, gt) in tf.points().into_iter().zip(fc.values()) {
            if let (Some(a), Some(b)) = (fx.finite(), gt.finite()) {
                fenchel = fenchel.max(t * x - a - b);
            }
        }
    }
    let hull = biconjugate(&f).unwrap();
    let hull2 = biconjugate(&hull).unwrap();
    let idem = hull.values.iter().zip(&hull2.values).map(|(a, b)| edist(*a, *b)).fold(0.0, f64::max);
    require(
        mismatch <= 1e-12 && self_conj <= 5e-4 && fenchel <= 1e-9 && idem <= 1e-9,
        format!(
            "fast vs brute {mismatch:.1e} (<= 1e-12); quadratic self-conjugacy {self_conj:.1e} (<= 5e-4); \
             Fenchel excess {fenchel:.1e} (<= 1e-9); hull idempotence {idem:.1e} (<= 1e-9)"
        ),
    )
}

fn c10_locality() -> Outcome {
    let src = std_normal();
    let sch = schedule();
    let v = Verifier::new(&src, &sch, Tolerance::default()).unwrap();
    let rep = v.locality(TruncationWindow::interval(0.55, 1.05).unwrap(), 0.8).unwrap();
    let (full, window) = (rep.quantities["I_full"], rep.quantities["I_window"]);
    let diff = edist(full, window);
    require(
        diff <= 0.03,
        format!("I_lower(0.8): full line {full:.4}, window [0.55, 1.05] {window:.4}, diff {diff:.4} (<= 0.03)"),
    )
}

fn c11_truncation_removal() -> Outcome {
    let src = std_normal();
    let sch = schedule();
    let tg = grid(-2.0, 2.0, 0.01);
    let full = cgf_curves(&src, TruncationWindow::Full, &tg, &sch.n).unwrap();
    let mut parts = vec![];
    let mut ok = true;
    for k in [8.0, 16.0, 32.0] {
        let t = cgf_curves(&src, TruncationWindow::symmetric(k).unwrap(), &tg, &sch.n).unwrap();
        let gap = (0..tg.len()).map(|j| edist(t.upper[j], full.upper[j])).fold(0.0, f64::max);
        ok &= gap <= 0.02;
        parts.push(format!("K={k}: {gap:.2e}"));
    }
    require(ok, format!("max |phi_upper_[-K,K] - phi_upper| on [-2, 2] (<= 0.02): {}", parts.join(", ")))
}

fn payloads(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json")) {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default().with_seed(12);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_report(&cfg, &RunOptions::new(&a)).unwrap();
    cmd_report(&cfg, &RunOptions::new(&b)).unwrap();
    let (pa, pb) = (payloads(&a), payloads(&b));
    let same = pa == pb && std::fs::read(a.join("summary.md")).unwrap() == std::fs::read(b.join("summary.md")).unwrap();
    require(same && !pa.is_empty(), format!("{} CSV/JSON payloads compared, identical: {same}", pa.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("mixed-source rate identity", c1_mixed_rate),
        ("nonstationary pair", c2_interleaved_rate),
        ("mixed-source cgf limit", c3_mixed_cgf),
        ("convexification gap", c4_convexification_gap),
        ("duality", c5_duality),
        ("reduction", c6_reduction),
        ("sandwich bounds", c7_sandwich),
        ("counterexample detection", c8_counterexample),
        ("conjugation engine", c9_conjugation),
        ("locality", c10_locality),
        ("truncation removal", c11_truncation_removal),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {:>2} {name}: {detail} [{:.1}s]", k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
