//! Per-run summary rows and their CSV and text tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxflow::MaxflowResult;
use crate::model::SchedulingInstance;
use crate::rational::{format_rat, Rat};
use crate::totalflow::TotalflowResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Maxflow,
    Totalflow,
}

impl RunKind {
    fn as_str(self) -> &'static str {
        match self {
            RunKind::Maxflow => "maxflow",
            RunKind::Totalflow => "totalflow",
        }
    }
}

/// One run. For max flow, `base` is T*, `bound` the telescoped bound and
/// `measured` the schedule's max flow. For total flow, `base` is the
/// time-indexed LP optimum, `bound` the alpha bound and `measured` the
/// final alpha.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub id: usize,
    pub kind: RunKind,
    pub n: usize,
    pub m: usize,
    pub base: Rat,
    pub d_levels: Vec<Rat>,
    pub bound: Rat,
    pub measured: Rat,
    pub ok: bool,
}

impl SummaryRow {
    pub fn from_maxflow(id: usize, inst: &SchedulingInstance, r: &MaxflowResult) -> Self {
        let t = &r.trace;
        SummaryRow {
            id,
            kind: RunKind::Maxflow,
            n: inst.n(),
            m: inst.m,
            base: t.t_star.clone(),
            d_levels: t.levels.iter().map(|l| l.d.clone()).collect(),
            bound: t.bound.clone(),
            measured: t.max_flow.clone(),
            ok: t.max_flow <= t.bound,
        }
    }

    pub fn from_totalflow(id: usize, inst: &SchedulingInstance, r: &TotalflowResult) -> Self {
        let t = &r.trace;
        SummaryRow {
            id,
            kind: RunKind::Totalflow,
            n: inst.n(),
            m: inst.m,
            base: t.lp_cost.clone(),
            d_levels: t.levels.iter().map(|l| l.d.clone()).collect(),
            bound: t.alpha_bound.clone(),
            measured: t.alpha_final.clone(),
            ok: t.alpha_final <= t.alpha_bound && t.levels.iter().all(|l| l.alpha_out <= l.alpha_bound),
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.kind.as_str().to_string(),
            self.n.to_string(),
            self.m.to_string(),
            format_rat(&self.base),
            self.d_levels.iter().map(format_rat).collect::<Vec<_>>().join(";"),
            format_rat(&self.bound),
            format_rat(&self.measured),
            self.ok.to_string(),
        ]
    }
}

const HEADER: [&str; 9] = ["id", "kind", "n", "m", "base", "D_levels", "bound", "measured", "ok"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub csv: String,
    pub text: String,
    pub all_ok: bool,
}

/// Builds both tables. All rows must come from the same pipeline.
pub fn summarize(rows: &[SummaryRow]) -> Result<Summary> {
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.kind != first.kind) {
            return Err(Error::InvalidArgument("rows mix max-flow and total-flow runs".into()));
        }
    }
    let table: Vec<Vec<String>> = rows.iter().map(SummaryRow::cells).collect();
    let mut csv = HEADER.join(",");
    csv.push('\n');
    for cells in &table {
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for cells in &table {
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.len());
        }
    }
    let mut text = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", padded.join("  ").trim_end()).expect("write to string");
    };
    line(&mut text, &HEADER);
    for cells in &table {
        let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
        line(&mut text, &refs);
    }
    Ok(Summary {
        csv,
        text,
        all_ok: rows.iter().all(|r| r.ok),
    })
}
