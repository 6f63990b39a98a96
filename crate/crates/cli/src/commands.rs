use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use israte::conjugate::{default_convexity_tol, is_closed_convex};
use israte::cumulant::{cgf_curves, rate_from_cgf, CgfCurves, TruncationWindow};
use israte::spectrum::{estimate_rate_curve_with, RateCurve};
use israte::verify::{Expectation, GammaSet, Verdict, VerificationReport, Verifier};
use israte::{Execution, ExtReal, Interval, SourceSpec};

use crate::config::ExperimentConfig;
use crate::plot::{Band, Plot, Series};

/// Where artifacts go and whether plots are drawn.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub plot: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunOptions { out: out.into(), plot: true }
    }
}

/// Reports produced by a verification run, in emission order.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub reports: Vec<VerificationReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub holds: usize,
    pub violated: usize,
    pub expected_violated: usize,
    pub missed_violation: usize,
    pub inconclusive: usize,
}

impl Outcome {
    pub fn tally(&self) -> Tally {
        tally(&self.reports)
    }

    /// 0 when every report meets its expectation; 1 otherwise, or when
    /// `strict` and something is inconclusive.
    pub fn exit_code(&self, strict: bool) -> i32 {
        let t = self.tally();
        if t.violated > 0 || t.missed_violation > 0 || (strict && t.inconclusive > 0) {
            1
        } else {
            0
        }
    }
}

fn tally(reports: &[VerificationReport]) -> Tally {
    let mut t = Tally::default();
    for r in reports {
        match (r.verdict, r.expected) {
            (Verdict::Holds, Expectation::Holds) => t.holds += 1,
            (Verdict::Violated, Expectation::Holds) => t.violated += 1,
            (Verdict::Violated, Expectation::Violated) => t.expected_violated += 1,
            (_, Expectation::Violated) => t.missed_violation += 1,
            (Verdict::Inconclusive, Expectation::Holds) => t.inconclusive += 1,
        }
    }
    t
}

/// One configured source and its output directory.
struct Target {
    source: SourceSpec,
    dir: PathBuf,
    slug: String,
}

/// A single source writes straight into the output root, several sources get
/// one subdirectory each, named by slug with a numeric suffix on repeats.
fn targets(cfg: &ExperimentConfig, out: &Path) -> Vec<Target> {
    let sources = cfg.sources();
    let single = sources.len() == 1;
    let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
    sources
        .into_iter()
        .map(|source| {
            let base = source.slug();
            let k = seen.entry(base).or_insert(0);
            *k += 1;
            let slug = if *k == 1 { base.to_string() } else { format!("{base}_{k}") };
            let dir = if single { out.to_path_buf() } else { out.join(&slug) };
            Target { source, dir, slug }
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_file(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn rate_curve(cfg: &ExperimentConfig, source: &SourceSpec) -> Result<RateCurve> {
    Ok(estimate_rate_curve_with(source, &cfg.r_grid, &cfg.schedule, cfg.backend, Execution::default())?)
}

fn full_curves(cfg: &ExperimentConfig, source: &SourceSpec) -> Result<CgfCurves> {
    Ok(cgf_curves(source, TruncationWindow::Full, &cfg.theta_grid, &cfg.schedule.n)?)
}

fn window_curves(cfg: &ExperimentConfig, source: &SourceSpec) -> Result<Vec<CgfCurves>> {
    let windows = cfg.windows.iter().filter(|w| **w != TruncationWindow::Full);
    windows.map(|w| Ok(cgf_curves(source, *w, &cfg.theta_grid, &cfg.schedule.n)?)).collect()
}

/// File stem for a window's cumulant curves.
pub fn window_stem(w: TruncationWindow) -> String {
    match w {
        TruncationWindow::Full => "cgf_curves".to_string(),
        TruncationWindow::Interval { m1, m2 } => format!("cgf_interval_{m1}_{m2}"),
        TruncationWindow::Symmetric { k } => format!("cgf_symmetric_{k}"),
    }
}

fn write_rate(cfg: &ExperimentConfig, t: &Target, opts: &RunOptions, curve: &RateCurve) -> Result<()> {
    curve.write_csv(csv_file(&t.dir.join("rate_curve.csv"))?)?;
    if opts.plot {
        write_file(&t.dir.join("rate_curve.svg"), &rate_plot(cfg, t, curve).to_svg())?;
    }
    Ok(())
}

fn rate_plot(cfg: &ExperimentConfig, t: &Target, curve: &RateCurve) -> Plot {
    let xs = cfg.r_grid.points();
    let zip = |v: &[ExtReal]| xs.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
    let band = |v: &[ExtReal], s: &[f64]| Band {
        color: "steelblue",
        points: xs.iter().zip(v.iter().zip(s)).map(|(&x, (&y, &s))| (x, y + (-s), y + s)).collect(),
    };
    let (lo, hi) = t.source.analytic_rate();
    let mut series = vec![
        Series { label: "H lower".into(), color: "steelblue", dashed: false, points: zip(&curve.lower) },
        Series { label: "H upper".into(), color: "firebrick", dashed: false, points: zip(&curve.upper) },
    ];
    series.push(Series {
        label: "oracle lower".into(),
        color: "black",
        dashed: true,
        points: xs.iter().map(|&x| (x, lo.eval(x))).collect(),
    });
    if hi != lo {
        series.push(Series {
            label: "oracle upper".into(),
            color: "dimgray",
            dashed: true,
            points: xs.iter().map(|&x| (x, hi.eval(x))).collect(),
        });
    }
    Plot {
        title: format!("information-spectrum rates: {}", t.slug),
        x_label: "R".into(),
        y_label: "rate".into(),
        series,
        bands: vec![band(&curve.lower, &curve.spread_lower), band(&curve.upper, &curve.spread_upper)],
        y_max: None,
    }
}

fn write_cgf(
    cfg: &ExperimentConfig,
    t: &Target,
    opts: &RunOptions,
    full: &CgfCurves,
    windows: &[CgfCurves],
) -> Result<()> {
    full.write_csv(csv_file(&t.dir.join("cgf_curves.csv"))?)?;
    for c in windows {
        c.write_csv(csv_file(&t.dir.join(format!("{}.csv", window_stem(c.window))))?)?;
    }
    // diverging cumulant functions leave nothing to conjugate
    if let Ok(rates) = rate_from_cgf(full, &cfg.r_grid) {
        rates.write_csv(csv_file(&t.dir.join("cge_rates.csv"))?)?;
    }
    if opts.plot {
        let xs = full.theta_grid.points();
        let zip = |v: &[ExtReal]| xs.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
        let mut series = vec![
            Series { label: "phi lower".into(), color: "steelblue", dashed: false, points: zip(&full.lower) },
            Series { label: "phi upper".into(), color: "firebrick", dashed: false, points: zip(&full.upper) },
        ];
        if let Some(o) = cgf_oracle(&t.source) {
            series.push(Series {
                label: "oracle".into(),
                color: "black",
                dashed: true,
                points: xs.iter().map(|&x| (x, ExtReal::from(o(x)))).collect(),
            });
        }
        let plot = Plot {
            title: format!("cumulant functions: {}", t.slug),
            x_label: "theta".into(),
            y_label: "phi".into(),
            series,
            bands: vec![],
            y_max: Some(20.0),
        };
        write_file(&t.dir.join("cgf_curves.svg"), &plot.to_svg())?;
    }
    Ok(())
}

/// Limit cumulant function of the Gaussian-family sources.
fn cgf_oracle(source: &SourceSpec) -> Option<Box<dyn Fn(f64) -> f64>> {
    match source {
        SourceSpec::GaussianIid(g) => {
            let g = *g;
            Some(Box::new(move |t| g.cgf(t)))
        }
        SourceSpec::Mixed { components, .. } => {
            let c = *components;
            Some(Box::new(move |t| c[0].cgf(t).max(c[1].cgf(t))))
        }
        _ => None,
    }
}

fn verify_source(
    cfg: &ExperimentConfig,
    source: &SourceSpec,
    curve: &RateCurve,
    full: &CgfCurves,
    windows: &[CgfCurves],
) -> Result<Vec<VerificationReport>> {
    let mut v = Verifier::new(source, &cfg.schedule, cfg.tolerances)?.with_k_schedule(cfg.k_schedule.clone())?;
    v.theta_grid = cfg.theta_grid;
    let suite = cfg.gamma_sets.sets();
    let mut out = vec![];
    for g in &suite {
        out.push(v.sandwich_upper(g, curve)?);
        out.push(v.sandwich_lower(g, curve)?);
    }
    out.push(v.full_ldp(&suite, curve)?);
    let (lo, hi) = (cfg.r_grid.lo, cfg.r_grid.point(cfg.r_grid.len() - 1));
    for c in windows.iter().filter(|c| c.window.region().lo >= lo && c.window.region().hi <= hi) {
        out.push(v.duality(c.window, curve, c)?);
    }
    out.push(v.reduction(curve, full)?);
    if let Some(l) = cfg.locality {
        let lower = curve.lower_function();
        let convex = is_closed_convex(&lower, default_convexity_tol(&lower))?.closed_convex;
        let window = TruncationWindow::interval(l.r0 - l.half_width, l.r0 + l.half_width)?;
        if convex && curve.lower.iter().any(|v| v.is_finite()) {
            out.push(v.locality(window, l.r0)?);
        }
    }
    if rate_from_cgf(full, &cfg.r_grid).is_ok() {
        for g in suite.iter().filter(|g| g.is_bounded() && !g.is_empty()) {
            out.push(v.cge_upper(g, full, Some(curve))?);
        }
    }
    if v.e_tightness().label() == "NOT-E-TIGHT" {
        // a huge compact set carries all the mass, yet every rate is infinite
        let whole = GammaSet::interval(Interval::closed(-1e10, 1e10)?);
        out.push(v.full_ldp(&[whole], curve)?.expecting(Expectation::Violated));
    }
    Ok(out)
}

fn write_reports(dir: &Path, reports: &[VerificationReport]) -> Result<()> {
    let json = serde_json::to_string_pretty(reports)? + "\n";
    write_file(&dir.join("reports.json"), &json)?;
    let text: String = reports.iter().map(|r| r.table() + "\n").collect();
    write_file(&dir.join("reports.txt"), &text)
}

fn summary(sections: &[(String, Vec<VerificationReport>)]) -> String {
    let all: Vec<VerificationReport> = sections.iter().flat_map(|s| s.1.iter().cloned()).collect();
    let t = tally(&all);
    let mut s = String::from("# Verification summary\n\n");
    let _ = writeln!(
        s,
        "{} reports: {} HOLDS, {} VIOLATED, {} expected VIOLATED, {} expected violations missed, {} INCONCLUSIVE\n",
        all.len(),
        t.holds,
        t.violated,
        t.expected_violated,
        t.missed_violation,
        t.inconclusive
    );
    for (slug, reports) in sections {
        let _ = writeln!(s, "## {slug}\n");
        if let Some(e) = reports.first().and_then(|r| r.preconditions.get("e_tightness")) {
            let _ = writeln!(s, "E-tightness: {e}");
        }
        if let Some(c) = reports.iter().find_map(|r| r.preconditions.get("c_tightness")) {
            let _ = writeln!(s, "C-tightness: {c}");
        }
        let _ = writeln!(s, "\n| theorem | set | verdict | expected |\n|---|---|---|---|");
        for r in reports {
            let mark = match (r.verdict, r.expected) {
                (Verdict::Violated, Expectation::Violated) => "VIOLATED (expected)",
                (_, Expectation::Violated) => "HOLDS (violation missed)",
                _ => "",
            };
            let verdict = if mark.is_empty() { r.verdict.as_str() } else { mark };
            let expected = match r.expected {
                Expectation::Holds => "HOLDS",
                Expectation::Violated => "VIOLATED",
            };
            let _ =
                writeln!(s, "| {} | {} | {} | {} |", r.theorem, r.gamma.as_deref().unwrap_or("-"), verdict, expected);
        }
        s.push('\n');
    }
    s
}

pub fn cmd_rate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<()> {
    for t in targets(cfg, &opts.out) {
        create_dir(&t.dir)?;
        let curve = rate_curve(cfg, &t.source)?;
        write_rate(cfg, &t, opts, &curve)?;
    }
    Ok(())
}

pub fn cmd_cgf(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<()> {
    for t in targets(cfg, &opts.out) {
        create_dir(&t.dir)?;
        let full = full_curves(cfg, &t.source)?;
        let windows = window_curves(cfg, &t.source)?;
        write_cgf(cfg, &t, opts, &full, &windows)?;
    }
    Ok(())
}

/// Runs every check per source, writing `reports.json` and `reports.txt` per
/// source and `summary.md` at the output root.
pub fn cmd_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    run(cfg, opts, false)
}

/// As [`cmd_verify`], also writing the rate and cumulant artifacts and one
/// bundled `report.json` at the output root.
pub fn cmd_report(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    run(cfg, opts, true)
}

fn run(cfg: &ExperimentConfig, opts: &RunOptions, bundle: bool) -> Result<Outcome> {
    create_dir(&opts.out)?;
    let mut sections = vec![];
    for t in targets(cfg, &opts.out) {
        create_dir(&t.dir)?;
        let curve = rate_curve(cfg, &t.source)?;
        let full = full_curves(cfg, &t.source)?;
        let windows = window_curves(cfg, &t.source)?;
        if bundle {
            write_rate(cfg, &t, opts, &curve)?;
            write_cgf(cfg, &t, opts, &full, &windows)?;
        }
        let reports = verify_source(cfg, &t.source, &curve, &full, &windows)?;
        write_reports(&t.dir, &reports)?;
        sections.push((t.slug, reports));
    }
    write_file(&opts.out.join("summary.md"), &summary(&sections))?;
    let reports: Vec<VerificationReport> = sections.into_iter().flat_map(|s| s.1).collect();
    if bundle {
        write_file(&opts.out.join("report.json"), &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    }
    Ok(Outcome { reports })
}
