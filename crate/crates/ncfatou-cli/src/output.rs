use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use ncfatou::{WordBasis, C64};

use crate::config::Failure;

/// A CSV table written as `<name>.csv` with a `# ...` provenance line on top.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Pass/fail outcome of one numerical requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("<= {bound:e}"),
            pass: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!(">= {bound:e}"),
            pass: value >= bound,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "true".into(),
            pass: ok,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn moment_table(name: &str, basis: &WordBasis, values: &[C64]) -> Table {
    let mut t = Table::new(name, &["word", "re", "im"]);
    for (w, v) in basis.words().zip(values) {
        t.push(vec![w.to_string(), num(v.re), num(v.im)]);
    }
    t
}

fn write_table(dir: &Path, header: &str, t: &Table) -> Result<(), Failure> {
    let mut f = File::create(dir.join(format!("{}.csv", t.name)))?;
    writeln!(f, "# {header}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(&t.headers)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    for row in &t.rows {
        w.write_record(row).map_err(|e| Failure::Validation(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every table plus `summary.csv` and `checks.csv`.
pub fn write_outcome(dir: &Path, experiment: &str, seed: u64, out: &Outcome) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let header = format!("ncfatou {experiment} seed={seed}");
    for t in &out.tables {
        write_table(dir, &header, t)?;
    }
    let mut summary = Table::new("summary", &["key", "value"]);
    for (k, v) in &out.summary {
        summary.push(vec![k.clone(), v.clone()]);
    }
    write_table(dir, &header, &summary)?;
    let mut checks = Table::new("checks", &["check", "value", "bound", "pass"]);
    for c in &out.checks {
        checks.push(vec![c.name.clone(), num(c.value), c.bound.clone(), c.pass.to_string()]);
    }
    write_table(dir, &header, &checks)
}

pub fn render_summary(experiment: &str, dir: &Path, out: &Outcome) -> String {
    let mut s = format!("{experiment}: outputs in {}\n", dir.display());
    let width = out
        .summary
        .iter()
        .map(|(k, _)| k.len())
        .chain(out.checks.iter().map(|c| c.name.len()))
        .max();
    let width = width.unwrap_or(0);
    for (k, v) in &out.summary {
        s.push_str(&format!("  {k:<width$}  {v}\n"));
    }
    for c in &out.checks {
        let tag = if c.pass { "ok  " } else { "FAIL" };
        s.push_str(&format!(
            "  [{tag}] {:<width$}  {} ({})\n",
            c.name,
            num(c.value),
            c.bound
        ));
    }
    s
}
