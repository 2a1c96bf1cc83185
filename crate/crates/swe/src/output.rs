//! CSV artifacts and error-norm bookkeeping.
//!
//! All numeric columns are decimal floats rendered with 17 significant
//! digits, enough to reconstruct the binary value exactly, so identical runs
//! produce bitwise-identical files. Norm conventions: `l1` is the nodal sum
//! of absolute values scaled by the computational cell size, `linf` the plain
//! nodal maximum; the duplicated end node of a periodic direction is skipped
//! by the caller. Every report states these conventions in its header.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17-significant-digit rendering that round-trips `f64` exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `l1` (cell-scaled) and `linf` (plain max) of a sequence of absolute
/// errors.
#[derive(Clone, Copy, Debug, Default)]
pub struct Norms {
    pub l1: f64,
    pub linf: f64,
}

pub fn norms(abs_errors: impl IntoIterator<Item = f64>, cell: f64) -> Norms {
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for e in abs_errors {
        sum += e;
        max = max.max(e);
    }
    Norms { l1: sum * cell, linf: max }
}

/// Observed order between a coarse and a fine error for halved spacing.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// One solution row: physical position, primitive variables, bottom and
/// surface.
pub struct SolutionRow {
    pub x1: f64,
    pub x2: f64,
    pub h: f64,
    pub v1: f64,
    pub v2: f64,
    pub b: f64,
}

pub fn render_solution_csv(rows: impl IntoIterator<Item = SolutionRow>) -> String {
    let mut out = String::from("x1,x2,h,v1,v2,b,h+b\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(r.x1),
            fmt17(r.x2),
            fmt17(r.h),
            fmt17(r.v1),
            fmt17(r.v2),
            fmt17(r.b),
            fmt17(r.h + r.b),
        )
        .unwrap();
    }
    out
}

pub fn render_energy_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("t,E\n");
    for &(t, e) in series {
        writeln!(out, "{},{}", fmt17(t), fmt17(e)).unwrap();
    }
    out
}

/// One mesh row: logical indices and physical position (`j` and `x2` are
/// zero in one dimension).
pub struct MeshRow {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
}

pub fn render_mesh_csv(rows: impl IntoIterator<Item = MeshRow>) -> String {
    let mut out = String::from("i,j,x1,x2\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.i, r.j, fmt17(r.x1), fmt17(r.x2)).unwrap();
    }
    out
}

/// One firing of the bottom-dissipation gate: when, where (interface
/// midpoint), along which axis.
pub struct GateRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub axis: u8,
}

pub fn render_gates_csv(rows: &[GateRow]) -> String {
    let mut out = String::from("t,x1,x2,axis\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt17(r.t), fmt17(r.x1), fmt17(r.x2), r.axis).unwrap();
    }
    out
}

/// Error norms of one run, one line per reported variable.
pub struct ErrorRow {
    /// Resolution label, e.g. `"100"` or `"40x40"`.
    pub resolution: String,
    /// `(variable name, norms)` in a fixed order shared by all rows.
    pub lines: Vec<(String, Norms)>,
}

/// Renders an error/convergence table. Orders appear from the second row on
/// and assume successive rows halve the spacing.
pub fn render_error_table(rows: &[ErrorRow]) -> String {
    let mut out = String::from(
        "# l1 = nodal sum of |error| scaled by the computational cell size\n\
         # linf = plain nodal max of |error|\n\
         # order = log2(coarse/fine) between successive rows\n\
         resolution,variable,l1,l1-order,linf,linf-order\n",
    );
    for (k, row) in rows.iter().enumerate() {
        for (v, (variable, n)) in row.lines.iter().enumerate() {
            let orders = if k > 0 {
                let prev = &rows[k - 1].lines[v].1;
                (
                    fmt17(observed_order(prev.l1, n.l1)),
                    fmt17(observed_order(prev.linf, n.linf)),
                )
            } else {
                (String::from(""), String::from(""))
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.resolution,
                variable,
                fmt17(n.l1),
                orders.0,
                fmt17(n.linf),
                orders.1,
            )
            .unwrap();
        }
    }
    out
}

/// Writes `content` under `dir`, creating the directory if needed.
pub fn write_artifact(dir: &Path, name: &str, content: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)
}

/// Parses a solution CSV back into rows. The trailing `h+b` column is
/// checked for presence but not stored; it is derived on render.
pub fn parse_solution_csv(text: &str) -> Result<Vec<SolutionRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("solution csv is empty")?;
    if header != "x1,x2,h,v1,v2,b,h+b" {
        return Err(format!("unexpected solution csv header `{header}`"));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cell = line.split(',').map(|c| {
            c.parse::<f64>()
                .map_err(|_| format!("line {}: `{c}` is not a number", k + 2))
        });
        let mut next = || cell.next().ok_or(format!("line {}: too few columns", k + 2))?;
        let row = SolutionRow {
            x1: next()?,
            x2: next()?,
            h: next()?,
            v1: next()?,
            v2: next()?,
            b: next()?,
        };
        next()?;
        if cell.next().is_some() {
            return Err(format!("line {}: too many columns", k + 2));
        }
        rows.push(row);
    }
    Ok(rows)
}
