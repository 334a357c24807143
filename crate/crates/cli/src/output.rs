//! CSV and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::experiment::ResultRow;
use crate::HarnessError;

pub const CSV_HEADER: [&str; 10] = [
    "beta",
    "fidelity_sbqs_vs_ground",
    "fidelity_exact_ite_vs_ground",
    "bures_sbqs_vs_exact_ite",
    "success_prob_formula",
    "success_prob_faithful",
    "success_prob_empirical",
    "energy_sbqs",
    "sim_distance_bound",
    "fidelity_bound_sm",
];

const RANK_COLUMN: &str = "ground_projector_rank";
const NOTE_COLUMN: &str = "note";

/// 12 significant digits, shortest form, exponent only outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Optional trailing columns appear only when some row needs them.
fn extra_columns(rows: &[ResultRow]) -> (bool, bool) {
    (rows.iter().any(|r| r.ground_projector_rank > 1), rows.iter().any(|r| r.note.is_some()))
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let (with_rank, with_note) = extra_columns(rows);
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_rank {
        header.push(RANK_COLUMN);
    }
    if with_note {
        header.push(NOTE_COLUMN);
    }
    writer.write_record(&header).map_err(|e| HarnessError::Io(e.to_string()))?;
    for r in rows {
        let mut record = vec![
            format_number(r.beta),
            cell(r.fidelity_sbqs_vs_ground),
            format_number(r.fidelity_exact_ite_vs_ground),
            cell(r.bures_sbqs_vs_exact_ite),
            cell(r.success_prob_formula),
            cell(r.success_prob_faithful),
            cell(r.success_prob_empirical),
            cell(r.energy_sbqs),
            format_number(r.sim_distance_bound),
            cell(r.fidelity_bound_sm),
        ];
        if with_rank {
            record.push(r.ground_projector_rank.to_string());
        }
        if with_note {
            record.push(r.note.clone().unwrap_or_default());
        }
        writer.write_record(&record).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Io("no rows to write".into()));
    }
    write_file(path, &csv_string(rows)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn parse_cell(s: &str) -> Result<Option<f64>, HarnessError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| HarnessError::Io(format!("bad number `{s}`: {e}")))
}

/// Inverse of [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| HarnessError::Io(e.to_string()))?.clone();
    let rank_at = header.iter().position(|h| h == RANK_COLUMN);
    let note_at = header.iter().position(|h| h == NOTE_COLUMN);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| HarnessError::Io(e.to_string()))?;
        let num = |i: usize| parse_cell(&record[i]);
        let required = |i: usize| -> Result<f64, HarnessError> {
            num(i)?.ok_or_else(|| HarnessError::Io(format!("missing `{}`", CSV_HEADER[i])))
        };
        rows.push(ResultRow {
            beta: required(0)?,
            fidelity_sbqs_vs_ground: num(1)?,
            fidelity_exact_ite_vs_ground: required(2)?,
            bures_sbqs_vs_exact_ite: num(3)?,
            success_prob_formula: num(4)?,
            success_prob_faithful: num(5)?,
            success_prob_empirical: num(6)?,
            energy_sbqs: num(7)?,
            sim_distance_bound: required(8)?,
            fidelity_bound_sm: num(9)?,
            ground_projector_rank: match rank_at {
                Some(i) => record[i].parse().map_err(|_| HarnessError::Io("bad rank".into()))?,
                None => 1,
            },
            note: note_at.map(|i| record[i].to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(rows)
}

/// Fidelity to the ground space against β for the protocol and the exact
/// evolution, as two polylines.
pub fn svg_string(rows: &[ResultRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 50.0;
    let b_min = rows.first().map_or(0.0, |r| r.beta);
    let b_max = rows.last().map_or(1.0, |r| r.beta);
    let span = if b_max > b_min { b_max - b_min } else { 1.0 };
    let x = |b: f64| LEFT + (b - b_min) / span * (W - LEFT - RIGHT);
    let y = |f: f64| TOP + (1.0 - f) * (H - TOP - BOTTOM);
    let points = |values: &mut dyn Iterator<Item = (f64, f64)>| {
        values.map(|(b, f)| format!("{:.2},{:.2}", x(b), y(f))).collect::<Vec<_>>().join(" ")
    };
    let exact = points(&mut rows.iter().map(|r| (r.beta, r.fidelity_exact_ite_vs_ground)));
    let sbqs = points(&mut rows.iter().filter_map(|r| r.fidelity_sbqs_vs_ground.map(|f| (r.beta, f))));

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#);
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12">"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{f}</text>"#, LEFT - 6.0, y(f) + 4.0);
    }
    for k in 0..=4 {
        let b = b_min + span * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, x(b), y1 + 18.0, format_number(b));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">beta</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">fidelity to ground space</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="green">exact</text>"#, x1 - 110.0, y1 - 30.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="red">protocol</text>"#, x1 - 110.0, y1 - 14.0);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<polyline fill="none" stroke="green" stroke-width="2" points="{exact}"/>"#);
    let _ = writeln!(s, r#"<polyline fill="none" stroke="red" stroke-width="1.5" stroke-dasharray="4 3" points="{sbqs}"/>"#);
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Io("no rows to plot".into()));
    }
    write_file(path, &svg_string(rows))
}
