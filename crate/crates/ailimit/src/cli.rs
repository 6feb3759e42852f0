//! The `ailimit` command line. Every subcommand that writes files also writes
//! `run.conf` (the fully resolved flags) and `manifest.json` next to them.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ailimit_core::ai_limit::{ai_state_from_symbols, default_max_iter, DEFAULT_AI_TOL};
use ailimit_core::continuation::{double_sequence, doubling_curve_alpha, terminal_epsilon, AiParams};
use ailimit_core::map::{classify_conic, conic_center, fixed_points_ai};
use ailimit_core::regions::{analytic_mask, analytic_ra, hausdorff_distance, DEFAULT_NUM_SEEDS};
use ailimit_core::scan::{
    close_returns, line_landmarks, orbit_x, period_window, symbols_from_orbit, AlphaRGrid, InitialCondition, ScanMap,
};
use ailimit_core::symbols::primitive_sequences;
use ailimit_core::{
    AIState, Branch, ContinuationConfig, Direction, MapParams, ParamGrid, ScanClass, ScanConfig, State3,
    SymbolSequence,
};

use crate::config::expand_config;
use crate::error::{AppError, Result};
use crate::formats::{self, fmt_f64, write_file, write_json};
use crate::heatmap::{render_mask, render_scan, write_ppm, Palette, PALETTE_V1_NAME};
use crate::manifest::{write_manifest, RunRecord};
use crate::par;

/// One axis of a lattice, `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Two axes, `lo:hi:n,lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Axis,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("axis {s:?} is not lo:hi:n"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
        let n = n.trim().parse::<usize>().map_err(|_| format!("{n:?} is not a point count"))?;
        Ok(Axis { lo: num(lo)?, hi: num(hi)?, n })
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (x, y) = s.split_once(',').ok_or_else(|| format!("grid {s:?} is not lo:hi:n,lo:hi:n"))?;
        Ok(GridSpec { x: x.parse()?, y: y.parse()? })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ax = |a: &Axis| format!("{}:{}:{}", fmt_f64(a.lo), fmt_f64(a.hi), a.n);
        write!(f, "{},{}", ax(&self.x), ax(&self.y))
    }
}

/// `x,y,z`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ic(pub State3);

impl FromStr for Ic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        match v[..] {
            [x, y, z] => Ok(Ic(State3::new(x, y, z))),
            _ => Err(format!("initial condition {s:?} is not x,y,z")),
        }
    }
}

impl fmt::Display for Ic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", fmt_f64(self.0.x), fmt_f64(self.0.y), fmt_f64(self.0.z))
    }
}

#[derive(Debug, Parser)]
#[command(name = "ailimit", version, about = "Anti-integrable limit computations for 3D quadratic maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conic class, center, fixed points and R_A membership at (r, c)
    Classify(ClassifyArgs),
    /// Contraction region mask over an (r, c) grid
    Regions(RegionsArgs),
    /// Hausdorff distance between two region CSVs on the same grid
    Hausdorff(HausdorffArgs),
    /// Attractor classification over an (alpha, r) grid
    Scan(ScanArgs),
    /// Pseudo-arclength continuation of periodic AI states
    Continue(ContinueArgs),
    /// Close returns -> symbols -> AI state -> continuation
    Pipeline(PipelineArgs),
    /// Repeated doubling of a symbol sequence
    Doubling(DoublingArgs),
    /// Fixed-point period-doubling curve roots in alpha
    DoublingCurve(DoublingCurveArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct RegionsArgs {
    /// rmin:rmax:nr,cmin:cmax:nc
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 1)]
    pub n_max: u16,
    /// fwd or bwd
    #[arg(long, default_value = "fwd")]
    pub direction: String,
    #[arg(long, default_value_t = DEFAULT_NUM_SEEDS)]
    pub seeds: usize,
    /// Closed-form R_A instead of the numerical R_n
    #[arg(long)]
    pub analytic: bool,
    #[arg(long, default_value = PALETTE_V1_NAME)]
    pub palette: String,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct HausdorffArgs {
    pub mask_a: PathBuf,
    pub mask_b: PathBuf,
    /// Keep only labels 1..=N of the first mask
    #[arg(long)]
    pub n_a: Option<u16>,
    /// Keep only labels 1..=N of the second mask
    #[arg(long)]
    pub n_b: Option<u16>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ScanArgs {
    /// amin:amax:na,rmin:rmax:nr
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 3.26724)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 5000)]
    pub transient: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub return_tol: f64,
    #[arg(long, default_value_t = 90)]
    pub period_max: usize,
    /// Explicit initial state x,y,z; otherwise the smaller fixed point offset by --dx
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Option<Ic>,
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub dx: f64,
    #[arg(long, default_value_t = 20_000)]
    pub lyap_steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub lyap_discard: usize,
    #[arg(long, default_value_t = 0.01)]
    pub chaos_threshold: f64,
    #[arg(long, default_value = PALETTE_V1_NAME)]
    pub palette: String,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContinuationOpts {
    /// Initial arclength step; 1e-2 below period 10, 1e-1 from there on
    #[arg(long)]
    pub ell0: Option<f64>,
    #[arg(long, default_value_t = 1e-15)]
    pub ell_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub jump_threshold: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub corrector_tol: f64,
    #[arg(long, default_value_t = 150)]
    pub max_corrector_iters: usize,
    #[arg(long, default_value_t = 3)]
    pub regrow_after: usize,
    /// Stop once epsilon reaches this value
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
}

impl ContinuationOpts {
    pub fn config(&self, period: usize) -> ContinuationConfig {
        let base = ContinuationConfig::for_period(period);
        ContinuationConfig {
            ell0: self.ell0.unwrap_or(base.ell0),
            ell_min: self.ell_min,
            jump_threshold: self.jump_threshold,
            corrector_tol: self.corrector_tol,
            max_corrector_iters: self.max_corrector_iters,
            regrow_after: self.regrow_after,
            eps_max: self.eps_max,
            max_steps: self.max_steps,
            ..base
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(self.ell_min) && pos(self.jump_threshold) && pos(self.corrector_tol)) || self.ell0.is_some_and(|x| !pos(x))
        {
            return Err(AppError::bad("continuation step sizes and tolerances must be positive"));
        }
        if self.max_corrector_iters == 0 || self.max_steps == 0 {
            return Err(AppError::bad("continuation iteration caps must be positive"));
        }
        Ok(())
    }

    fn resolved(&self, kv: &mut Vec<(String, String)>) {
        if let Some(x) = self.ell0 {
            push(kv, "ell0", fmt_f64(x));
        }
        push(kv, "ell-min", fmt_f64(self.ell_min));
        push(kv, "jump-threshold", fmt_f64(self.jump_threshold));
        push(kv, "corrector-tol", fmt_f64(self.corrector_tol));
        push(kv, "max-corrector-iters", self.max_corrector_iters);
        push(kv, "regrow-after", self.regrow_after);
        if let Some(x) = self.eps_max {
            push(kv, "eps-max", fmt_f64(x));
        }
        push(kv, "max-steps", self.max_steps);
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ContinueArgs {
    /// Periodic word over {-,+}; run-length sugar and (..)^k groups accepted
    #[arg(long, allow_hyphen_values = true, conflicts_with = "max_period")]
    pub symbols: Option<String>,
    /// Continue every primitive word up to this period instead
    #[arg(long)]
    pub max_period: Option<usize>,
    #[arg(long, default_value_t = -0.18, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub delta: f64,
    #[command(flatten)]
    pub cont: ContinuationOpts,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PipelineArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Ic,
    /// Close-return distance in the 3D state norm
    #[arg(long, default_value_t = 0.005)]
    pub threshold: f64,
    /// Orbit length searched for close returns
    #[arg(long, default_value_t = 1300)]
    pub return_steps: usize,
    /// How many return events to carry through continuation
    #[arg(long, default_value_t = 3)]
    pub events: usize,
    #[command(flatten)]
    pub cont: ContinuationOpts,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct DoublingArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub symbols: String,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct DoublingCurveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub delta: f64,
}

fn push(kv: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    kv.push((key.to_string(), value.to_string()));
}

fn say(out: &mut dyn Write, text: fmt::Arguments<'_>) -> Result<()> {
    match out.write_fmt(text).and_then(|_| out.write_all(b"\n")) {
        // a closed pipe downstream (e.g. `| head`) is not a failure of the run
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(AppError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

macro_rules! say {
    ($out:expr, $($t:tt)*) => { say($out, format_args!($($t)*)) };
}

/// Parses `argv` (program name first), runs the command and prints its report.
pub fn run(argv: Vec<String>, out: &mut dyn Write) -> Result<()> {
    let t0 = Instant::now();
    let argv = expand_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return say!(out, "{}", e.render().to_string().trim_end());
        }
        Err(e) => return Err(AppError::bad(e.render().to_string().trim_end())),
    };
    match &cli.command {
        Command::Classify(a) => cmd_classify(a, out),
        Command::Regions(a) => cmd_regions(a, out, t0),
        Command::Hausdorff(a) => cmd_hausdorff(a, out),
        Command::Scan(a) => cmd_scan(a, out, t0),
        Command::Continue(a) => cmd_continue(a, out, t0),
        Command::Pipeline(a) => cmd_pipeline(a, out, t0),
        Command::Doubling(a) => cmd_doubling(a, out),
        Command::DoublingCurve(a) => cmd_doubling_curve(a, out),
    }
}

fn finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AppError::bad(format!("{name} must be finite")))
    }
}

fn make_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn write_ppm_file(path: &Path, (w, h, px): (usize, usize, Vec<[u8; 3]>)) -> Result<()> {
    write_file(path, |out| write_ppm(out, w, h, &px))
}

pub fn classify_report(r: f64, c: f64) -> Result<String> {
    finite("r and c", &[r, c])?;
    let class = classify_conic(r, c);
    let fwd = analytic_ra(r, c, Direction::Forward);
    let bwd = analytic_ra(r, c, Direction::Backward);
    let member = match (fwd, bwd) {
        (true, true) => ", in R_A^+ and R_A^-",
        (true, false) => ", in R_A^+",
        (false, true) => ", in R_A^-",
        (false, false) => "",
    };
    let center = conic_center(r, c).map(fmt_f64).unwrap_or_else(|_| "undefined".into());
    let (xm, xp) = fixed_points_ai(r);
    let yes = |b: bool| if b { "yes" } else { "no" };
    Ok(format!(
        "{class}{member}\nclass: {class}\ncenter: {center}\nfixed points: {} {}\nR_A^+: {}\nR_A^-: {}",
        fmt_f64(xm),
        fmt_f64(xp),
        yes(fwd),
        yes(bwd)
    ))
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    say!(out, "{}", classify_report(a.r, a.c)?)
}

fn cmd_regions(a: &RegionsArgs, out: &mut dyn Write, t0: Instant) -> Result<()> {
    let g = a.grid;
    let grid = ParamGrid::new(g.x.lo, g.x.hi, g.x.n, g.y.lo, g.y.hi, g.y.n)?;
    let dir = formats::parse_direction(&a.direction)?;
    let palette = Palette::by_name(&a.palette)?;
    if a.seeds < 2 {
        return Err(AppError::bad("--seeds must be at least 2"));
    }
    let mask = if a.analytic {
        analytic_mask(&grid, dir)
    } else {
        par::with_threads(a.threads, || par::compute_rn(&grid, a.n_max, dir, a.seeds))??
    };

    make_out_dir(&a.out)?;
    write_file(&a.out.join("regions.csv"), |w| formats::write_regions_csv(w, &mask))?;
    let seeds = (!a.analytic).then_some(a.seeds);
    write_json(&a.out.join("regions.json"), &formats::regions_metadata(&mask, seeds))?;
    write_ppm_file(&a.out.join("regions.ppm"), render_mask(&mask, &palette))?;

    let mut kv = Vec::new();
    push(&mut kv, "grid", a.grid);
    if a.analytic {
        push(&mut kv, "analytic", true);
    } else {
        push(&mut kv, "n-max", a.n_max);
        push(&mut kv, "seeds", a.seeds);
    }
    push(&mut kv, "direction", dir.as_str());
    push(&mut kv, "palette", &palette.name);
    let artifacts = ["regions.csv", "regions.json", "regions.ppm"].map(String::from);
    write_manifest(
        &a.out,
        &RunRecord { command: "regions", config: &kv, artifacts: &artifacts, threads: a.threads, wall_time: t0.elapsed() },
    )?;
    say!(out, "members {} of {}", mask.count(), grid.len())
}

fn cmd_hausdorff(a: &HausdorffArgs, out: &mut dyn Write) -> Result<()> {
    let mut ma = formats::read_regions_file(&a.mask_a)?;
    let mut mb = formats::read_regions_file(&a.mask_b)?;
    if let Some(n) = a.n_a {
        ma = ma.restrict_to(n);
    }
    if let Some(n) = a.n_b {
        mb = mb.restrict_to(n);
    }
    let d = hausdorff_distance(&ma, &mb).map_err(|e| match e {
        ailimit_core::Error::EmptySet => AppError::bad("a mask has no member cells"),
        other => other.into(),
    })?;
    say!(out, "{}", fmt_f64(d))
}

fn cmd_scan(a: &ScanArgs, out: &mut dyn Write, t0: Instant) -> Result<()> {
    let g = a.grid;
    let grid = AlphaRGrid::new(g.x.lo, g.x.hi, g.x.n, g.y.lo, g.y.hi, g.y.n)?;
    finite("map coefficients", &[a.a, a.b, a.c, a.delta, a.dx])?;
    let palette = Palette::by_name(&a.palette)?;
    let map = ScanMap { a: a.a, b: a.b, c: a.c, delta: a.delta };
    let cfg = ScanConfig {
        transient: a.transient,
        kappa_max: a.kappa,
        return_tol: a.return_tol,
        period_max: a.period_max,
        ic: match a.ic {
            Some(Ic(s)) => InitialCondition::Explicit(s),
            None => InitialCondition::FixedPointOffset { dx: a.dx },
        },
        lyap_steps: a.lyap_steps,
        lyap_discard: a.lyap_discard,
        chaos_threshold: a.chaos_threshold,
    };
    let cells = par::with_threads(a.threads, || par::attractor_scan(&grid, &map, &cfg))??;
    let points: Vec<(f64, f64)> = (0..grid.len()).map(|i| grid.point(i)).collect();

    make_out_dir(&a.out)?;
    write_file(&a.out.join("scan.csv"), |w| formats::write_scan_csv(w, &points, &cells))?;
    write_json(&a.out.join("scan.json"), &scan_metadata(&grid, &cells))?;
    write_ppm_file(&a.out.join("scan.ppm"), render_scan(&cells, grid.n_alpha, grid.n_r, &palette))?;

    let mut kv = Vec::new();
    push(&mut kv, "grid", a.grid);
    push(&mut kv, "kappa", fmt_f64(a.kappa));
    for (k, v) in [("a", a.a), ("b", a.b), ("c", a.c), ("delta", a.delta)] {
        push(&mut kv, k, fmt_f64(v));
    }
    push(&mut kv, "transient", a.transient);
    push(&mut kv, "return-tol", fmt_f64(a.return_tol));
    push(&mut kv, "period-max", a.period_max);
    match a.ic {
        Some(ic) => push(&mut kv, "ic", ic),
        None => push(&mut kv, "dx", fmt_f64(a.dx)),
    }
    push(&mut kv, "lyap-steps", a.lyap_steps);
    push(&mut kv, "lyap-discard", a.lyap_discard);
    push(&mut kv, "chaos-threshold", fmt_f64(a.chaos_threshold));
    push(&mut kv, "palette", &palette.name);
    let artifacts = ["scan.csv", "scan.json", "scan.ppm"].map(String::from);
    write_manifest(
        &a.out,
        &RunRecord { command: "scan", config: &kv, artifacts: &artifacts, threads: a.threads, wall_time: t0.elapsed() },
    )?;
    let count = |pred: fn(&ScanClass) -> bool| cells.iter().filter(|c| pred(&c.class)).count();
    say!(
        out,
        "cells {}: diverged {}, periodic {}, regular {}, chaotic {}",
        cells.len(),
        count(|c| *c == ScanClass::Diverged),
        count(|c| matches!(c, ScanClass::Periodic(_))),
        count(|c| *c == ScanClass::Regular),
        count(|c| *c == ScanClass::Chaotic)
    )
}

/// Grid, class counts and, for a single `r`, the landmarks along the line.
fn scan_metadata(grid: &AlphaRGrid, cells: &[ailimit_core::ScanCell]) -> Value {
    let mut counts = serde_json::Map::new();
    for c in cells {
        let e = counts.entry(c.class.name().to_string()).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap_or(0) + 1);
    }
    let mut meta = json!({
        "schema_version": formats::SCHEMA_VERSION,
        "columns": formats::SCAN_HEADER,
        "grid": {
            "alpha_min": grid.alpha_min, "alpha_max": grid.alpha_max, "n_alpha": grid.n_alpha,
            "r_min": grid.r_min, "r_max": grid.r_max, "n_r": grid.n_r,
        },
        "counts": counts,
    });
    if grid.n_r == 1 {
        let alphas: Vec<f64> = (0..grid.n_alpha).map(|i| grid.alpha_at(i)).collect();
        let lm = line_landmarks(&alphas, cells);
        let mut periods: Vec<u32> = cells.iter().filter_map(|c| c.period).collect();
        periods.sort_unstable();
        periods.dedup();
        let windows: Vec<Value> = periods
            .iter()
            .filter_map(|&p| period_window(&alphas, cells, p).map(|(lo, hi)| json!({ "period": p, "alpha_min": lo, "alpha_max": hi })))
            .collect();
        meta["landmarks"] = json!({
            "bounded_onset": lm.bounded_onset,
            "cascade_entry": lm.cascade_entry,
            "period_windows": windows,
        });
    }
    meta
}

/// `+` and `-` are awkward in file names.
pub fn word_tag(seq: &SymbolSequence) -> String {
    seq.to_text().chars().map(|ch| if ch == '+' { 'p' } else { 'm' }).collect()
}

fn branch_summary(b: &Branch) -> String {
    let tps: Vec<String> = ailimit_core::continuation::detect_turning_points(b)
        .iter()
        .map(|&(e, a)| format!("eps={} alpha={}", fmt_f64(e), fmt_f64(a)))
        .collect();
    format!(
        "{} (period {}): {} after {} points, terminal eps {}, turning points [{}]",
        b.symbols,
        b.symbols.period(),
        b.termination.as_str(),
        b.points.len(),
        fmt_f64(terminal_epsilon(b)),
        tps.join("; ")
    )
}

fn write_branch_files(dir: &Path, stem: &str, b: &Branch, artifacts: &mut Vec<String>) -> Result<()> {
    let csv = format!("{stem}.csv");
    let meta = format!("{stem}.json");
    write_file(&dir.join(&csv), |w| formats::write_branch_csv(w, b))?;
    write_json(&dir.join(&meta), &formats::branch_metadata(b))?;
    artifacts.extend([csv, meta]);
    Ok(())
}

fn cmd_continue(a: &ContinueArgs, out: &mut dyn Write, t0: Instant) -> Result<()> {
    finite("r, c and delta", &[a.r, a.c, a.delta])?;
    a.cont.validate()?;
    let p = AiParams::reduced(a.r, a.c, a.delta);
    let words = match (&a.symbols, a.max_period) {
        (Some(s), None) => vec![SymbolSequence::parse(s)?],
        (None, Some(n)) if n >= 1 => primitive_sequences(n),
        _ => return Err(AppError::bad("give exactly one of --symbols or --max-period (>= 1)")),
    };
    let results = par::with_threads(a.threads, || par::continue_many(&words, &p, |n| a.cont.config(n)))?;
    let branches = results.into_iter().collect::<ailimit_core::Result<Vec<Branch>>>()?;

    make_out_dir(&a.out)?;
    let mut artifacts = Vec::new();
    if let [b] = &branches[..] {
        write_branch_files(&a.out, "branch", b, &mut artifacts)?;
    } else {
        for b in &branches {
            write_branch_files(&a.out, &format!("branch_{}", word_tag(&b.symbols)), b, &mut artifacts)?;
        }
    }
    write_file(&a.out.join("branches.csv"), |w| {
        writeln!(w, "symbols,period,termination,terminal_epsilon,max_epsilon,points")?;
        for b in &branches {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                b.symbols,
                b.symbols.period(),
                b.termination.as_str(),
                fmt_f64(terminal_epsilon(b)),
                fmt_f64(b.max_epsilon),
                b.points.len()
            )?;
        }
        Ok(())
    })?;
    artifacts.push("branches.csv".into());

    let mut kv = Vec::new();
    match (&a.symbols, a.max_period) {
        (Some(s), _) => push(&mut kv, "symbols", s),
        (_, Some(n)) => push(&mut kv, "max-period", n),
        _ => {}
    }
    for (k, v) in [("r", a.r), ("c", a.c), ("delta", a.delta)] {
        push(&mut kv, k, fmt_f64(v));
    }
    a.cont.resolved(&mut kv);
    write_manifest(
        &a.out,
        &RunRecord { command: "continue", config: &kv, artifacts: &artifacts, threads: a.threads, wall_time: t0.elapsed() },
    )?;
    for b in &branches {
        say!(out, "{}", branch_summary(b))?;
    }
    Ok(())
}

/// AI state with forward branch maps, or backward ones where the forward
/// maps are undefined.
pub fn ai_state_for(seq: &SymbolSequence, r: f64, c: f64) -> ailimit_core::Result<AIState> {
    let max_iter = default_max_iter(seq.period(), DEFAULT_AI_TOL);
    ai_state_from_symbols(seq, r, c, Direction::Forward, DEFAULT_AI_TOL, max_iter)
        .or_else(|_| ai_state_from_symbols(seq, r, c, Direction::Backward, DEFAULT_AI_TOL, max_iter))
}

/// One close-return event carried through every pipeline stage.
pub struct PipelineEvent {
    pub period: usize,
    pub distance: f64,
    pub ai: AIState,
    pub branch: Branch,
}

/// Close returns of the orbit of `ic`, and the first `n_events` of them
/// turned into symbol words, AI states and continued branches.
pub fn run_pipeline(
    alpha: f64,
    r: f64,
    c: f64,
    delta: f64,
    ic: State3,
    threshold: f64,
    max_steps: usize,
    n_events: usize,
    cfg_for: impl Fn(usize) -> ContinuationConfig + Sync,
) -> Result<(Vec<(usize, f64)>, Vec<PipelineEvent>)> {
    if !(alpha < 0.0) {
        return Err(AppError::bad("alpha must be negative"));
    }
    if !(threshold > 0.0) {
        return Err(AppError::bad("threshold must be positive"));
    }
    let p = MapParams::reduced(alpha, r * (-alpha).sqrt(), c, delta);
    let events = close_returns(ic, &p, threshold, max_steps)?;
    let chosen = &events[..events.len().min(n_events)];
    let longest = chosen.iter().map(|e| e.0).max().unwrap_or(0);
    let orbit = orbit_x(ic, &p, longest)?;
    let eps = 1.0 / (-alpha).sqrt();
    let mut words = Vec::new();
    let mut states = Vec::new();
    for &(period, _) in chosen {
        let seq = symbols_from_orbit(&orbit[..period], eps)?;
        states.push(ai_state_for(&seq, r, c)?);
        words.push(seq);
    }
    let ap = AiParams::reduced(r, c, delta);
    let branches = par::continue_many(&words, &ap, cfg_for);
    let mut out = Vec::new();
    for ((&(period, distance), ai), branch) in chosen.iter().zip(states).zip(branches) {
        out.push(PipelineEvent { period, distance, ai, branch: branch? });
    }
    Ok((events, out))
}

fn cmd_pipeline(a: &PipelineArgs, out: &mut dyn Write, t0: Instant) -> Result<()> {
    finite("alpha, r, c, delta and ic", &[a.alpha, a.r, a.c, a.delta, a.ic.0.x, a.ic.0.y, a.ic.0.z])?;
    a.cont.validate()?;
    let (events, done) = par::with_threads(a.threads, || {
        run_pipeline(a.alpha, a.r, a.c, a.delta, a.ic.0, a.threshold, a.return_steps, a.events, |n| a.cont.config(n))
    })??;

    make_out_dir(&a.out)?;
    let mut artifacts = vec!["close_returns.csv".to_string()];
    write_file(&a.out.join("close_returns.csv"), |w| formats::write_returns_csv(w, &events))?;
    let mut summary = Vec::new();
    for (k, ev) in done.iter().enumerate() {
        let stem = format!("event{k}_p{}", ev.period);
        let sym = format!("{stem}_symbols.txt");
        write_file(&a.out.join(&sym), |w| writeln!(w, "{}", ev.ai.symbols))?;
        let ai = format!("{stem}_ai_state.csv");
        write_file(&a.out.join(&ai), |w| formats::write_ai_state_csv(w, &ev.ai))?;
        artifacts.extend([sym, ai]);
        write_branch_files(&a.out, &format!("{stem}_branch"), &ev.branch, &mut artifacts)?;
        summary.push(json!({
            "event": k,
            "period": ev.period,
            "distance": ev.distance,
            "ai_direction": ev.ai.direction.as_str(),
            "ai_residual": ev.ai.residual,
            "termination": ev.branch.termination.as_str(),
            "terminal_epsilon": terminal_epsilon(&ev.branch),
            "max_epsilon": ev.branch.max_epsilon,
        }));
    }
    write_json(&a.out.join("pipeline.json"), &json!({ "schema_version": formats::SCHEMA_VERSION, "events": summary }))?;
    artifacts.push("pipeline.json".into());

    let mut kv = Vec::new();
    for (k, v) in [("alpha", a.alpha), ("r", a.r), ("c", a.c), ("delta", a.delta)] {
        push(&mut kv, k, fmt_f64(v));
    }
    push(&mut kv, "ic", a.ic);
    push(&mut kv, "threshold", fmt_f64(a.threshold));
    push(&mut kv, "return-steps", a.return_steps);
    push(&mut kv, "events", a.events);
    a.cont.resolved(&mut kv);
    write_manifest(
        &a.out,
        &RunRecord { command: "pipeline", config: &kv, artifacts: &artifacts, threads: a.threads, wall_time: t0.elapsed() },
    )?;
    say!(out, "close returns: {}", events.iter().map(|e| e.0.to_string()).collect::<Vec<_>>().join(" "))?;
    for (k, ev) in done.iter().enumerate() {
        say!(
            out,
            "event {k}: period {}, distance {}, {}, terminal eps {}",
            ev.period,
            fmt_f64(ev.distance),
            ev.branch.termination.as_str(),
            fmt_f64(terminal_epsilon(&ev.branch))
        )?;
    }
    Ok(())
}

/// `seq` followed by `count` successive doublings.
pub fn doubling_chain(seq: &SymbolSequence, count: usize) -> Vec<SymbolSequence> {
    let mut out = vec![seq.clone()];
    for _ in 0..count {
        let next = double_sequence(out.last().expect("chain starts nonempty"));
        out.push(next);
    }
    out
}

fn cmd_doubling(a: &DoublingArgs, out: &mut dyn Write) -> Result<()> {
    if a.count > 24 {
        return Err(AppError::bad("--count above 24 would exceed the maximum word length"));
    }
    for s in doubling_chain(&SymbolSequence::parse(&a.symbols)?, a.count) {
        say!(out, "{} {}", s.period(), s)?;
    }
    Ok(())
}

fn cmd_doubling_curve(a: &DoublingCurveArgs, out: &mut dyn Write) -> Result<()> {
    finite("r and delta", &[a.r, a.delta])?;
    let (lo, hi) = doubling_curve_alpha(a.r, a.delta)?;
    say!(out, "{}\n{}", fmt_f64(lo), fmt_f64(hi))
}
