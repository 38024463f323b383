//! Plain-text tables for analysis results.

use crate::model::FIT_SCALE;
use crate::qualitative::CutSetResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateDisplay {
    #[default]
    Fit,
    PerHour,
}

impl RateDisplay {
    pub fn header(self) -> &'static str {
        match self {
            RateDisplay::Fit => "Failure rate [FIT]",
            RateDisplay::PerHour => "Failure rate [1/h]",
        }
    }

    /// A per-hour rate in this unit.
    pub fn format(self, per_hour: f64) -> String {
        match self {
            RateDisplay::Fit => {
                let fit = per_hour * FIT_SCALE;
                if fit == 0.0 || fit >= 0.01 && fit < 1e9 {
                    format!("{fit:.2}")
                } else {
                    format!("{fit:.3e}")
                }
            }
            RateDisplay::PerHour => format!("{per_hour:.3e}"),
        }
    }
}

/// Hours, or `infinite` for a zero rate.
pub fn format_mtbf(mtbf: Option<f64>) -> String {
    mtbf.map_or_else(|| "infinite".to_string(), |m| format!("{m:.2e}"))
}

/// One top event: its cut sets and, when quantified, rate and MTBF.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEventRow {
    pub top: String,
    pub cut_sets: Vec<Vec<String>>,
    pub rate: Option<f64>,
    pub mtbf: Option<f64>,
}

fn braces(set: &[String]) -> String {
    format!("{{{}}}", set.join(", "))
}

/// Left-aligned columns separated by two spaces, with a dashed rule under
/// the header.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, cell) in cells.enumerate() {
            if i + 1 < cols {
                s.push_str(&format!("{cell:<w$}  ", w = width[i]));
            } else {
                s.push_str(cell);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    out.push_str(&line(&mut width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str)));
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

/// Top event, cut sets, failure rate and MTBF; one cut set per line.
pub fn top_event_table(rows: &[TopEventRow], unit: RateDisplay) -> String {
    let mut cells = Vec::new();
    for r in rows {
        let rate = r.rate.map_or_else(|| "-".to_string(), |v| unit.format(v));
        let mtbf = if r.rate.is_some() { format_mtbf(r.mtbf) } else { "-".to_string() };
        let mut sets = r.cut_sets.iter().map(|s| braces(s));
        let first = sets.next().unwrap_or_else(|| "(none)".to_string());
        cells.push(vec![r.top.clone(), first, rate, mtbf]);
        for s in sets {
            cells.push(vec![String::new(), s, String::new(), String::new()]);
        }
    }
    render_table(&["Top event", "Cut sets", unit.header(), "MTBF [h]"], &cells)
}

/// Size and members of each minimal cut set.
pub fn cut_set_table(result: &CutSetResult) -> String {
    let rows: Vec<Vec<String>> = result
        .cut_sets
        .iter()
        .map(|s| vec![s.len().to_string(), braces(s)])
        .collect();
    render_table(&["Order", "Cut set"], &rows)
}
