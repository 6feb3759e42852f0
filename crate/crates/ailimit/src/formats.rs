//! CSV and JSON artifacts. Floats are written in Rust's shortest round-trip
//! form, so reading a file back reproduces the exact values.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use ailimit_core::continuation::{detect_turning_points, terminal_epsilon};
use ailimit_core::regions::MaskKind;
use ailimit_core::{AIState, Branch, Direction, ParamGrid, RegionMask, ScanCell, ScanClass};

use crate::error::{AppError, Result};

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

pub const REGIONS_HEADER: [&str; 4] = ["r", "c", "label", "direction"];
pub const SCAN_HEADER: [&str; 5] = ["alpha", "r", "class", "period", "lyapunov"];
pub const RETURNS_HEADER: [&str; 3] = ["event", "period", "distance"];
pub const AI_STATE_HEADER: [&str; 3] = ["t", "symbol", "xi"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e.to_string())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path).and_then(|mut f| f.read_to_string(&mut s)).map_err(|e| AppError::io(path, e))?;
    Ok(s)
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| AppError::bad(format!("{what}: not a number: {field:?}")))
}

// ---- regions ----

pub fn write_regions_csv(w: &mut dyn Write, mask: &RegionMask) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REGIONS_HEADER).map_err(csv_err)?;
    let dir = mask.direction.as_str();
    for (idx, &label) in mask.labels.iter().enumerate() {
        let (r, c) = mask.grid.point(idx);
        out.write_record([fmt_f64(r), fmt_f64(c), label.to_string(), dir.to_string()]).map_err(csv_err)?;
    }
    out.flush()
}

pub fn regions_metadata(mask: &RegionMask, num_seeds: Option<usize>) -> Value {
    let g = &mask.grid;
    let (kind, n_max) = match mask.kind {
        MaskKind::Numerical { n_max } => ("numerical", Some(n_max)),
        MaskKind::Analytic => ("analytic", None),
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "columns": REGIONS_HEADER,
        "kind": kind,
        "n_max": n_max,
        "num_seeds": num_seeds,
        "direction": mask.direction.as_str(),
        "grid": {
            "r_min": g.r_min, "r_max": g.r_max, "nr": g.nr,
            "c_min": g.c_min, "c_max": g.c_max, "nc": g.nc,
        },
        "members": mask.count(),
    })
}

pub fn parse_direction(s: &str) -> Result<Direction> {
    match s {
        "fwd" | "forward" => Ok(Direction::Forward),
        "bwd" | "backward" => Ok(Direction::Backward),
        _ => Err(AppError::bad(format!("direction must be fwd or bwd, got {s:?}"))),
    }
}

/// Reads a regions CSV back into a mask. The grid is recovered from the
/// distinct `r` and `c` values and every row is checked against it.
pub fn read_regions_csv(data: &str) -> Result<RegionMask> {
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::bad(e.to_string()))?.clone();
    if header.iter().ne(REGIONS_HEADER) {
        return Err(AppError::bad(format!("regions CSV header must be {}", REGIONS_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    let mut direction = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::bad(e.to_string()))?;
        let r = parse_f64(&rec[0], "r")?;
        let c = parse_f64(&rec[1], "c")?;
        let label: u16 = rec[2].trim().parse().map_err(|_| AppError::bad(format!("bad label {:?}", &rec[2])))?;
        let d = parse_direction(rec[3].trim())?;
        if direction.is_some_and(|x| x != d) {
            return Err(AppError::bad("mixed directions in one mask"));
        }
        direction = Some(d);
        rows.push((r, c, label));
    }
    let direction = direction.ok_or_else(|| AppError::bad("regions CSV has no rows"))?;
    let distinct = |pick: fn(&(f64, f64, u16)) -> f64| {
        let mut v: Vec<f64> = rows.iter().map(pick).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (rs, cs) = (distinct(|t| t.0), distinct(|t| t.1));
    let grid = ParamGrid::new(rs[0], rs[rs.len() - 1], rs.len(), cs[0], cs[cs.len() - 1], cs.len())?;
    if rows.len() != grid.len() {
        return Err(AppError::bad("regions CSV is not a full lattice"));
    }
    for (idx, &(r, c, _)) in rows.iter().enumerate() {
        if grid.point(idx) != (r, c) {
            return Err(AppError::bad(format!("regions CSV row {} is off the lattice", idx + 1)));
        }
    }
    let labels: Vec<u16> = rows.iter().map(|t| t.2).collect();
    let n_max = labels.iter().copied().max().unwrap_or(0).max(1);
    Ok(RegionMask::new(grid, labels, direction, MaskKind::Numerical { n_max })?)
}

pub fn read_regions_file(path: &Path) -> Result<RegionMask> {
    read_regions_csv(&read_to_string(path)?)
}

// ---- scan ----

pub fn write_scan_csv(w: &mut dyn Write, points: &[(f64, f64)], cells: &[ScanCell]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SCAN_HEADER).map_err(csv_err)?;
    for (&(alpha, r), cell) in points.iter().zip(cells) {
        out.write_record([
            fmt_f64(alpha),
            fmt_f64(r),
            cell.class.name().to_string(),
            cell.period.map(|p| p.to_string()).unwrap_or_default(),
            cell.lyapunov.map(fmt_f64).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

/// `(α, r, cell)` rows of a scan CSV.
pub fn read_scan_csv(data: &str) -> Result<Vec<(f64, f64, ScanCell)>> {
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::bad(e.to_string()))?.clone();
    if header.iter().ne(SCAN_HEADER) {
        return Err(AppError::bad(format!("scan CSV header must be {}", SCAN_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::bad(e.to_string()))?;
        let period = match rec[3].trim() {
            "" => None,
            p => Some(p.parse::<u32>().map_err(|_| AppError::bad(format!("bad period {p:?}")))?),
        };
        let class = match (rec[2].trim(), period) {
            ("diverged", _) => ScanClass::Diverged,
            ("periodic", Some(p)) => ScanClass::Periodic(p),
            ("regular", _) => ScanClass::Regular,
            ("chaotic", _) => ScanClass::Chaotic,
            (other, _) => return Err(AppError::bad(format!("bad class {other:?}"))),
        };
        let lyapunov = match rec[4].trim() {
            "" => None,
            l => Some(parse_f64(l, "lyapunov")?),
        };
        out.push((parse_f64(&rec[0], "alpha")?, parse_f64(&rec[1], "r")?, ScanCell { class, period, lyapunov }));
    }
    Ok(out)
}

// ---- branches ----

pub fn branch_header(period: usize) -> Vec<String> {
    let mut h: Vec<String> =
        ["k", "epsilon", "alpha", "residual", "step_len", "corrector_iters"].iter().map(|s| s.to_string()).collect();
    h.extend((0..period).map(|t| format!("xi_{t}")));
    h
}

pub fn write_branch_csv(w: &mut dyn Write, branch: &Branch) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(branch_header(branch.symbols.period())).map_err(csv_err)?;
    for (k, pt) in branch.points.iter().enumerate() {
        let mut rec = vec![
            k.to_string(),
            fmt_f64(pt.state.epsilon),
            fmt_f64(pt.state.alpha()),
            fmt_f64(pt.residual_norm),
            fmt_f64(pt.step_len),
            pt.corrector_iters.to_string(),
        ];
        rec.extend(pt.state.xi.iter().map(|&x| fmt_f64(x)));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
}

pub fn branch_metadata(branch: &Branch) -> Value {
    let p = &branch.params;
    let turning: Vec<Value> =
        detect_turning_points(branch).iter().map(|&(e, a)| json!({ "epsilon": e, "alpha": a })).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "symbols": branch.symbols.to_text(),
        "period": branch.symbols.period(),
        "params": { "a": p.a, "b": p.b, "c": p.c, "r": p.r, "delta": p.delta },
        "termination": branch.termination.as_str(),
        "points": branch.points.len(),
        "max_epsilon": branch.max_epsilon,
        "terminal_epsilon": terminal_epsilon(branch),
        "turning_points": turning,
        "jump_halvings": branch.jump_halvings,
        "failure_halvings": branch.failure_halvings,
    })
}

/// `(ε, ξ)` per row of a branch CSV.
pub fn read_branch_csv(data: &str) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::bad(e.to_string()))?.clone();
    let period = header.len().checked_sub(6).filter(|&n| n > 0).ok_or_else(|| AppError::bad("branch CSV has no xi columns"))?;
    if header.iter().ne(branch_header(period).iter().map(String::as_str)) {
        return Err(AppError::bad("unexpected branch CSV header"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::bad(e.to_string()))?;
        let xi = (6..6 + period).map(|i| parse_f64(&rec[i], "xi")).collect::<Result<Vec<_>>>()?;
        out.push((parse_f64(&rec[1], "epsilon")?, xi));
    }
    Ok(out)
}

// ---- pipeline stages ----

pub fn write_returns_csv(w: &mut dyn Write, events: &[(usize, f64)]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RETURNS_HEADER).map_err(csv_err)?;
    for (k, &(p, d)) in events.iter().enumerate() {
        out.write_record([k.to_string(), p.to_string(), fmt_f64(d)]).map_err(csv_err)?;
    }
    out.flush()
}

pub fn write_ai_state_csv(w: &mut dyn Write, ai: &AIState) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(AI_STATE_HEADER).map_err(csv_err)?;
    for (t, (&x, s)) in ai.xi.iter().zip(ai.symbols.symbols()).enumerate() {
        out.write_record([t.to_string(), s.as_char().to_string(), fmt_f64(x)]).map_err(csv_err)?;
    }
    out.flush()
}
