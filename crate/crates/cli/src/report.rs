//! Report documents shared by all commands, and their renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use qd_core::theoremkit::{Route, Status, TheoremReport};
use qd_core::{CohTable, Entry};

/// One result line: a table or a verdict for one object at one `(n, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub p: u32,
    pub object: String,
    #[serde(default)]
    pub h: Vec<Entry>,
    pub route: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_used: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl Row {
    fn key(&self) -> (usize, u32, String, String) {
        (self.n, self.p, self.object.clone(), self.route.clone())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub engine_version: String,
    pub rows: Vec<Row>,
    /// Full per-cell results of theorem verification.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<TheoremReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Oracle => "oracle",
        Route::Paper => "paper",
        Route::Both => "both",
    }
}

pub fn table_row(n: usize, p: u32, object: String, t: &CohTable, seconds: Option<f64>) -> Row {
    Row {
        n,
        p,
        object,
        h: t.h.clone(),
        route: "engine".into(),
        status: "ok".into(),
        bound_used: t.bound_used,
        seconds,
    }
}

/// Rows for one verification cell: one per route that ran.
pub fn cell_rows(r: &TheoremReport, timing: bool) -> Vec<Row> {
    let mut rows = vec![];
    if let Some(o) = &r.oracle {
        let ok = o.table.as_ref().is_some_and(CohTable::higher_vanish);
        rows.push(Row {
            n: r.n,
            p: r.p,
            object: "D_1".into(),
            h: o.table.as_ref().map(|t| t.h.clone()).unwrap_or_default(),
            route: route_name(Route::Oracle).into(),
            status: if o.bound_exhausted {
                "bound-exhausted".into()
            } else if ok {
                "pass".into()
            } else {
                "fail".into()
            },
            bound_used: o.table.as_ref().and_then(|t| t.bound_used),
            seconds: timing.then_some(o.seconds),
        });
    }
    if let Some(c) = &r.certificate {
        let status = match c.certificate.status {
            Status::Proved if c.replay.is_ok() => "proved",
            Status::Proved => "replay-failed",
            Status::Inconclusive => "inconclusive",
            Status::Contradicted => "contradicted",
        };
        rows.push(Row {
            n: r.n,
            p: r.p,
            object: "D_1".into(),
            h: vec![],
            route: route_name(Route::Paper).into(),
            status: status.into(),
            bound_used: None,
            seconds: timing.then_some(c.seconds),
        });
    }
    rows
}

/// Merges reports: rows and cells keyed by `(n, p, object, route)` and
/// `(n, p, route)`, sorted; identical duplicates collapse with a note,
/// conflicting ones keep the later entry with a note.
pub fn merge(reports: Vec<Report>) -> Report {
    let mut rows: BTreeMap<(usize, u32, String, String), Row> = BTreeMap::new();
    let mut cells: BTreeMap<(usize, u32, String), TheoremReport> = BTreeMap::new();
    let mut notes: Vec<String> = vec![];
    let mut version = String::new();
    for r in reports {
        if version.is_empty() {
            version = r.engine_version.clone();
        }
        notes.extend(r.notes);
        for row in r.rows {
            let key = row.key();
            let label = format!("n={} p={} {} ({})", row.n, row.p, row.object, row.route);
            match rows.insert(key, row.clone()) {
                Some(old) if old == row => notes.push(format!("duplicate row {label} merged")),
                Some(_) => notes.push(format!("conflicting rows for {label}; kept the later one")),
                None => {}
            }
        }
        for c in r.cells {
            cells.insert((c.n, c.p, route_name(c.route).into()), c);
        }
    }
    notes.sort();
    notes.dedup();
    Report {
        engine_version: version,
        rows: rows.into_values().collect(),
        cells: cells.into_values().collect(),
        notes,
    }
}

fn entry_text(e: &Entry) -> String {
    match (e.lo(), e.hi()) {
        (lo, Some(hi)) if lo == hi => lo.to_string(),
        (lo, Some(hi)) => format!("{lo}..{hi}"),
        (lo, None) => format!("{lo}.."),
    }
}

fn seconds_text(s: Option<f64>) -> String {
    s.map(|s| format!("{s:.3}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::from("n,p,object,h0,h1,h2,h3,h4,route,status,seconds\n");
    for r in &report.rows {
        let h: Vec<String> = (0..5).map(|i| r.h.get(i).map(entry_text).unwrap_or_default()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.p,
            csv_field(&r.object),
            h.join(","),
            r.route,
            r.status,
            seconds_text(r.seconds)
        );
    }
    out
}

pub fn to_text(report: &Report) -> String {
    let header = ["n", "p", "object", "h", "route", "status", "bound", "seconds"];
    let body: Vec<[String; 8]> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.n.to_string(),
                r.p.to_string(),
                r.object.clone(),
                format!("({})", r.h.iter().map(entry_text).collect::<Vec<_>>().join(", ")),
                r.route.clone(),
                r.status.clone(),
                r.bound_used.map(|b| b.to_string()).unwrap_or_default(),
                seconds_text(r.seconds),
            ]
        })
        .collect();
    let width = |k: usize| {
        body.iter()
            .map(|row| row[k].chars().count())
            .chain([header[k].len()])
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..8).map(width).collect();
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (k, c) in cells.iter().enumerate() {
            let pad = widths[k] - c.chars().count();
            s.push_str(c);
            if k + 1 < cells.len() {
                s.push_str(&" ".repeat(pad + 2));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in &body {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    let _ = writeln!(out, "engine: {}", report.engine_version);
    out
}

pub fn to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}
