//! Trace files: comma-separated, hand-editable.
//!
//! The header names the columns. Offline traces carry a `time` column
//! (seconds, decimal); online traces carry a `tick` column (system-clock
//! tick at which the row is offered). Every other column must name an input
//! stream; an empty cell means the stream carries no value in that event.
//!
//! ```text
//! time,velo,lat
//! 0.0,800,
//! 0.5,650,12
//! ```

use crate::analysis::AnalyzedSpec;
use crate::error::TraceError;
use crate::time::NS_PER_SEC;
use crate::value::{Value, ValueType};

pub type Row = (u64, Vec<Option<u64>>);

/// Timed trace for offline runs and the reference interpreter.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimedTrace {
    pub rows: Vec<Row>,
}

/// Offer schedule for online runs: (tick, payload) per row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TickTrace {
    pub rows: Vec<Row>,
}

pub fn parse_offline(src: &str, spec: &AnalyzedSpec) -> Result<TimedTrace, TraceError> {
    let (time_col, col_to_input) = parse_header(src, spec, "time")?;
    let mut rows = Vec::new();
    let mut last_ts: Option<u64> = None;
    for (idx, line) in src.lines().enumerate().skip(1) {
        let rowno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let ts_cell = cells.get(time_col).copied().unwrap_or("");
        let ts = parse_secs(ts_cell).map_err(|m| TraceError::new(rowno, m))?;
        if let Some(prev) = last_ts {
            if ts < prev {
                return Err(TraceError::new(
                    rowno,
                    format!("timestamps must be monotone ({ts_cell} goes backwards)"),
                ));
            }
        }
        last_ts = Some(ts);
        rows.push((ts, parse_payload(&cells, &col_to_input, spec, rowno)?));
    }
    Ok(TimedTrace { rows })
}

pub fn parse_online(src: &str, spec: &AnalyzedSpec) -> Result<TickTrace, TraceError> {
    let (tick_col, col_to_input) = parse_header(src, spec, "tick")?;
    let mut rows = Vec::new();
    let mut last_tick: Option<u64> = None;
    for (idx, line) in src.lines().enumerate().skip(1) {
        let rowno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let cell = cells.get(tick_col).copied().unwrap_or("");
        let tick: u64 = cell
            .parse()
            .map_err(|_| TraceError::new(rowno, format!("bad tick `{cell}`")))?;
        if let Some(prev) = last_tick {
            if tick < prev {
                return Err(TraceError::new(rowno, "ticks must be monotone".to_string()));
            }
        }
        last_tick = Some(tick);
        rows.push((tick, parse_payload(&cells, &col_to_input, spec, rowno)?));
    }
    Ok(TickTrace { rows })
}

fn parse_header(
    src: &str,
    spec: &AnalyzedSpec,
    clock_col: &str,
) -> Result<(usize, Vec<(usize, usize)>), TraceError> {
    let header = src
        .lines()
        .next()
        .ok_or_else(|| TraceError::new(1, "empty trace file".to_string()))?;
    let mut clock = None;
    let mut col_to_input = Vec::new();
    for (col, name) in header.split(',').map(str::trim).enumerate() {
        if name == clock_col {
            clock = Some(col);
            continue;
        }
        match spec.program.inputs.iter().position(|i| i.name == name) {
            Some(input) => col_to_input.push((col, input)),
            None => {
                return Err(TraceError::new(
                    1,
                    format!("unknown input column `{name}`"),
                ))
            }
        }
    }
    let clock = clock
        .ok_or_else(|| TraceError::new(1, format!("missing `{clock_col}` column")))?;
    Ok((clock, col_to_input))
}

fn parse_payload(
    cells: &[&str],
    col_to_input: &[(usize, usize)],
    spec: &AnalyzedSpec,
    rowno: usize,
) -> Result<Vec<Option<u64>>, TraceError> {
    let mut payload = vec![None; spec.num_inputs()];
    for (col, input) in col_to_input {
        let cell = cells.get(*col).copied().unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        let ty = spec.program.inputs[*input].ty;
        let raw = parse_value(cell, ty).map_err(|m| TraceError::new(rowno, m))?;
        payload[*input] = Some(raw);
    }
    Ok(payload)
}

fn parse_value(cell: &str, ty: ValueType) -> Result<u64, String> {
    match ty {
        ValueType::Bool => match cell {
            "true" | "1" => Ok(1),
            "false" | "0" => Ok(0),
            other => Err(format!("bad boolean `{other}`")),
        },
        _ => {
            let v: i128 = cell
                .parse()
                .map_err(|_| format!("bad integer `{cell}`"))?;
            Ok(Value::int(ty, v).raw())
        }
    }
}

/// Decimal seconds to nanoseconds, exact; at most nine fractional digits.
pub fn parse_secs(cell: &str) -> Result<u64, String> {
    let bad = || format!("bad timestamp `{cell}`");
    let (whole, frac) = match cell.split_once('.') {
        Some((w, f)) => (w, f),
        None => (cell, ""),
    };
    let whole: u64 = whole.parse().map_err(|_| bad())?;
    if frac.len() > 9 || frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut frac_ns = 0u64;
    if !frac.is_empty() {
        let scale = 10u64.pow(9 - frac.len() as u32);
        frac_ns = frac.parse::<u64>().map_err(|_| bad())? * scale;
    }
    whole
        .checked_mul(NS_PER_SEC as u64)
        .and_then(|w| w.checked_add(frac_ns))
        .ok_or_else(bad)
}

/// Renders an offline trace back to file form (used by generators and
/// examples). Values print per the input's type.
pub fn render_offline(trace: &TimedTrace, spec: &AnalyzedSpec) -> String {
    let mut out = String::from("time");
    for i in &spec.program.inputs {
        out.push(',');
        out.push_str(&i.name);
    }
    out.push('\n');
    for (ts, payload) in &trace.rows {
        out.push_str(&crate::time::format_secs(*ts));
        for (i, p) in payload.iter().enumerate() {
            out.push(',');
            if let Some(raw) = p {
                let v = Value::from_raw(spec.program.inputs[i].ty, *raw);
                match spec.program.inputs[i].ty {
                    ValueType::Bool => out.push_str(if v.as_bool() { "1" } else { "0" }),
                    _ => out.push_str(&v.as_i128().to_string()),
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::parser::parse;

    fn spec() -> AnalyzedSpec {
        analyze(
            &parse("input velo: Int32\ninput ok: Bool\noutput x := velo + 1").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn parses_rows_with_gaps_and_negatives() {
        let spec = spec();
        let t = parse_offline("time,velo,ok\n0.0,-5,1\n2.5,,0\n2.5,7,\n", &spec).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0].0, 0);
        assert_eq!(
            Value::from_raw(ValueType::Signed(32), t.rows[0].1[0].unwrap()).as_i128(),
            -5
        );
        assert_eq!(t.rows[1].0, 2_500_000_000);
        assert_eq!(t.rows[1].1[0], None);
        assert_eq!(t.rows[1].1[1], Some(0));
        assert_eq!(t.rows[2].1[1], None);
    }

    #[test]
    fn errors_carry_row_numbers() {
        let spec = spec();
        let err = parse_offline("time,velo\n0.0,1\nnope,2\n", &spec).unwrap_err();
        assert_eq!(err.row, 3);
        let err = parse_offline("time,velo\n5.0,1\n2.0,2\n", &spec).unwrap_err();
        assert_eq!(err.row, 3);
        let err = parse_offline("time,speed\n", &spec).unwrap_err();
        assert_eq!(err.row, 1);
        let err = parse_offline("velo\n", &spec).unwrap_err();
        assert!(err.msg.contains("time"));
    }

    #[test]
    fn round_trips_through_render() {
        let spec = spec();
        let src = "time,velo,ok\n0.0,-5,1\n2.5,,0\n";
        let t = parse_offline(src, &spec).unwrap();
        let rendered = render_offline(&t, &spec);
        assert_eq!(parse_offline(&rendered, &spec).unwrap(), t);
    }

    #[test]
    fn online_uses_ticks() {
        let spec = spec();
        let t = parse_online("tick,velo\n0,1\n250,2\n", &spec).unwrap();
        assert_eq!(t.rows[1].0, 250);
        assert!(parse_online("time,velo\n0.0,1\n", &spec).is_err());
    }
}
