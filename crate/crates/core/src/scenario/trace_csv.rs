//! Per-iterate CSV traces.
//!
//! Columns are `n, role, c1..cd, norm, gap_odd, gap_even, ar_residual`.
//! `gap_odd` is filled on odd rows, `gap_even` and `ar_residual` on even
//! rows, each only when the iterates it needs are in the file. Numbers are
//! written with 17 significant digits so they read back exactly.

use std::io;

use super::ScenarioError;
use crate::diagnostics::GapSeries;
use crate::iteration::{Role, Trace};
use crate::space::Point;

const TAIL_COLUMNS: [&str; 4] = ["norm", "gap_odd", "gap_even", "ar_residual"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> ScenarioError {
    let line = e.position().map_or(0, |p| p.line());
    ScenarioError::Csv {
        line,
        message: e.to_string(),
    }
}

pub fn write_trace<W: io::Write>(t: &Trace, out: W) -> Result<(), ScenarioError> {
    let dim = t.x0().dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string(), "role".to_string()];
    header.extend((1..=dim).map(|i| format!("c{i}")));
    header.extend(TAIL_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_error)?;

    let pts = t.stored();
    for (i, x) in pts.iter().enumerate() {
        let n = t.first_index() + i;
        let prev = i.checked_sub(1).map(|j| &pts[j]);
        let prev2 = i.checked_sub(2).map(|j| &pts[j]);
        let odd_row = n % 2 == 1;
        let gap_odd = prev.filter(|_| odd_row).map(|p| x.distance(p));
        let gap_even = prev.filter(|_| !odd_row).map(|p| x.distance(p));
        let ar = prev2.filter(|_| !odd_row).map(|p| x.distance(p));

        let mut record = vec![n.to_string(), Role::of_index(n).label().to_string()];
        record.extend(x.coords().iter().map(|&c| num(c)));
        record.push(num(x.norm()));
        for cell in [gap_odd, gap_even, ar] {
            record.push(cell.map(num).unwrap_or_default());
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush().map_err(|e| ScenarioError::Csv {
        line: 0,
        message: e.to_string(),
    })
}

/// Reads back `(first_index, iterates)` from a trace CSV.
pub fn read_iterates<R: io::Read>(input: R) -> Result<(usize, Vec<Point>), ScenarioError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    let bad = |line: u64, message: String| ScenarioError::Csv { line, message };
    let dim = header.len().saturating_sub(2 + TAIL_COLUMNS.len());
    let expected: Vec<String> = ["n", "role"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|i| format!("c{i}")))
        .chain(TAIL_COLUMNS.iter().map(|s| s.to_string()))
        .collect();
    if dim == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(
            1,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }

    let mut first = None;
    let mut points = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let n: usize = record[0]
            .parse()
            .map_err(|_| bad(line, format!("bad index `{}`", &record[0])))?;
        let start = *first.get_or_insert(n);
        if n != start + points.len() {
            return Err(bad(line, format!("index {n} breaks the contiguous run")));
        }
        if record[1] != *Role::of_index(n).label() {
            return Err(bad(
                line,
                format!("role `{}` does not match index {n}", &record[1]),
            ));
        }
        let coords = (2..2 + dim)
            .map(|j| {
                record[j]
                    .parse::<f64>()
                    .map_err(|_| bad(line, format!("bad number `{}`", &record[j])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        points.push(Point::new(coords).map_err(|e| bad(line, e.to_string()))?);
    }
    let first = first.ok_or_else(|| bad(1, "no iterates".into()))?;
    Ok((first, points))
}

pub fn read_gap_series<R: io::Read>(input: R) -> Result<GapSeries, ScenarioError> {
    let (first, points) = read_iterates(input)?;
    Ok(GapSeries::from_iterates(first, &points)?)
}
