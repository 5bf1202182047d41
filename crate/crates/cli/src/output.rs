//! Table, CSV and JSON renderings. Exact values are always `num/den`
//! strings; tables may add a decimal approximation.

use ambiprob::montecarlo::Agreement;
use ambiprob::scenarios::SweepRow;
use ambiprob::{approx, fraction, ExactReport, QueryPredicate, Rational, Statement, WorldConfig};
use serde_json::{json, Value};

use crate::Format;

pub struct ListRow {
    pub id: &'static str,
    pub answer: Rational,
    pub description: &'static str,
}

pub struct Report<'a> {
    /// Kind and name of what was evaluated.
    pub source: (&'static str, &'a str),
    pub cfg: &'a WorldConfig,
    pub report: &'a ExactReport,
}

pub struct McReport<'a> {
    pub target: &'a str,
    pub cfg: &'a WorldConfig,
    pub statement: &'a Statement,
    pub event: &'a QueryPredicate,
    pub shards: u64,
    pub agreement: &'a Agreement,
}

fn exact(value: &Rational, decimal: bool) -> String {
    if decimal {
        format!("{} (approx. {:.6})", fraction(value), approx(value))
    } else {
        fraction(value)
    }
}

fn world(cfg: &WorldConfig) -> String {
    format!(
        "{}-day week, {} children",
        cfg.week_length(),
        cfg.family_size()
    )
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

pub fn list(rows: &[ListRow], format: Format, decimal: bool) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                fraction(&r.answer),
                r.description.to_string(),
            ]
        })
        .collect();
    match format {
        Format::Table if decimal => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .zip(cells)
                .map(|(r, mut c)| {
                    c.insert(2, format!("{:.6}", approx(&r.answer)));
                    c
                })
                .collect();
            table(&["id", "answer", "approx.", "description"], &cells)
        }
        Format::Table => table(&["id", "answer", "description"], &cells),
        Format::Csv => csv(&["id", "answer", "description"], &cells),
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "id": r.id,
                        "answer": fraction(&r.answer),
                        "description": r.description,
                    })
                })
                .collect(),
        )),
    }
}

pub fn report(r: &Report<'_>, format: Format, decimal: bool) -> String {
    let rep = r.report;
    let statement = rep.statement.render(r.cfg);
    let event = rep.query.render(r.cfg);
    let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
    let cases: Vec<Vec<String>> = rep
        .case_table
        .iter()
        .map(|c| {
            vec![
                c.family.to_string(),
                fraction(&c.prior),
                fraction(&c.emission),
                yes_no(c.event),
            ]
        })
        .collect();
    match format {
        Format::Table => {
            let mut out = table(
                &[r.source.0, r.source.1],
                &[
                    vec!["world".into(), world(r.cfg)],
                    vec!["statement".into(), statement],
                    vec!["event".into(), event],
                ],
            );
            out.push('\n');
            out.push_str(&table(&["family", "prior", "emission", "event"], &cases));
            out.push('\n');
            out.push_str(&format!(
                "statement mass = {}\njoint mass = {}\nposterior = {}\n",
                exact(&rep.statement_mass, decimal),
                exact(&rep.joint_mass, decimal),
                exact(&rep.posterior, decimal),
            ));
            out
        }
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = cases
                .into_iter()
                .map(|mut c| {
                    c.insert(0, "case".into());
                    c.push(String::new());
                    c
                })
                .collect();
            for (kind, value) in [
                ("statement_mass", &rep.statement_mass),
                ("joint_mass", &rep.joint_mass),
                ("posterior", &rep.posterior),
            ] {
                let mut row = vec![kind.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push(fraction(value));
                rows.push(row);
            }
            csv(
                &["kind", "family", "prior", "emission", "event", "value"],
                &rows,
            )
        }
        Format::Json => json_text(&json!({
            r.source.0: r.source.1,
            "week_length": r.cfg.week_length(),
            "family_size": r.cfg.family_size(),
            "statement": statement,
            "event": event,
            "statement_mass": fraction(&rep.statement_mass),
            "joint_mass": fraction(&rep.joint_mass),
            "posterior": fraction(&rep.posterior),
            "case_table": rep.case_table.iter().map(|c| json!({
                "family": c.family.to_string(),
                "prior": fraction(&c.prior),
                "emission": fraction(&c.emission),
                "event": c.event,
            })).collect::<Vec<_>>(),
        })),
    }
}

pub fn mc(r: &McReport<'_>, format: Format) -> String {
    let a = r.agreement;
    let res = &a.result;
    let verdict = if a.pass { "PASS" } else { "FAIL" };
    let fields: Vec<(&str, String)> = vec![
        ("target", r.target.to_string()),
        ("statement", r.statement.render(r.cfg)),
        ("event", r.event.render(r.cfg)),
        ("seed", res.seed.to_string()),
        ("shards", r.shards.to_string()),
        ("trials", res.trials.to_string()),
        ("rejected_families", res.rejected_families.to_string()),
        ("rejected_runs", res.rejected_runs.to_string()),
        ("statement_matches", res.statement_matches.to_string()),
        ("hits", res.hits.to_string()),
        ("estimate", format!("{:.6}", res.estimate)),
        ("stderr", format!("{:.6}", res.stderr)),
        ("exact", fraction(&a.exact)),
        ("error", format!("{:.6}", a.error)),
        ("tolerance", format!("{:.6}", a.tolerance)),
        ("verdict", verdict.to_string()),
    ];
    match format {
        Format::Table => {
            let rows: Vec<Vec<String>> = fields
                .iter()
                .map(|(k, v)| {
                    let v = if *k == "exact" {
                        exact(&a.exact, true)
                    } else {
                        v.clone()
                    };
                    vec![k.replace('_', " "), v]
                })
                .collect();
            let mut out = table(&["world", &world(r.cfg)], &rows);
            out.push_str(&format!("{verdict}\n"));
            out
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            csv(&header, &[fields.iter().map(|(_, v)| v.clone()).collect()])
        }
        Format::Json => json_text(&json!({
            "target": r.target,
            "week_length": r.cfg.week_length(),
            "family_size": r.cfg.family_size(),
            "statement": r.statement.render(r.cfg),
            "event": r.event.render(r.cfg),
            "seed": res.seed,
            "shards": r.shards,
            "trials": res.trials,
            "rejected_families": res.rejected_families,
            "rejected_runs": res.rejected_runs,
            "statement_matches": res.statement_matches,
            "hits": res.hits,
            "estimate": res.estimate,
            "stderr": res.stderr,
            "exact": fraction(&a.exact),
            "error": a.error,
            "tolerance": a.tolerance,
            "verdict": verdict,
        })),
    }
}

pub fn sweep(rows: &[SweepRow<Rational>], format: Format, decimal: bool) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.week_length.to_string(),
                fraction(&r.posterior),
                fraction(&r.formula),
                if r.matches() { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    match format {
        Format::Table if decimal => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .zip(cells)
                .map(|(r, mut c)| {
                    c.insert(2, format!("{:.6}", approx(&r.posterior)));
                    c
                })
                .collect();
            table(&["d", "posterior", "approx.", "formula", "match"], &cells)
        }
        Format::Table => table(&["d", "posterior", "formula", "match"], &cells),
        Format::Csv => csv(&["week_length", "posterior", "formula", "match"], &cells),
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "week_length": r.week_length,
                        "posterior": fraction(&r.posterior),
                        "formula": fraction(&r.formula),
                        "match": r.matches(),
                    })
                })
                .collect(),
        )),
    }
}
