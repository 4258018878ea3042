use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use diamond_core::distortion::DistortionReport;

use crate::output::{read, write_atomic};
use crate::ReportArgs;

struct Curve {
    name: String,
    /// `floor_k` by `k`.
    floors: BTreeMap<u32, f64>,
}

struct Row {
    k: u32,
    w: String,
    target: String,
    measured: f64,
    upper: String,
}

fn parse_curve(path: &Path, text: &str) -> Result<Curve> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("k,C_k,floor_k") {
        bail!(
            "{} is not a curve CSV (expected header k,C_k,floor_k)",
            path.display()
        );
    }
    let mut floors = BTreeMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let [k, _, floor] = cells[..] else {
            bail!("{}: bad curve row {line:?}", path.display());
        };
        floors.insert(
            k.parse()
                .with_context(|| format!("{}: bad k {k:?}", path.display()))?,
            floor
                .parse()
                .with_context(|| format!("{}: bad floor {floor:?}", path.display()))?,
        );
    }
    let name = path
        .file_stem()
        .map_or_else(|| "curve".into(), |s| s.to_string_lossy().into_owned());
    Ok(Curve { name, floors })
}

fn row_of(path: &Path, r: &DistortionReport) -> Result<Row> {
    let label = |key: &str| r.labels.get(key).cloned();
    let k = label("depth")
        .with_context(|| format!("{}: report has no depth label", path.display()))?
        .parse()
        .with_context(|| format!("{}: bad depth label", path.display()))?;
    Ok(Row {
        k,
        w: label("branching").unwrap_or_else(|| "-".into()),
        target: label("target").unwrap_or_else(|| "-".into()),
        measured: r.distortion,
        upper: label("upper_bound").unwrap_or_else(|| "-".into()),
    })
}

type Tables = BTreeMap<String, Vec<Row>>;

/// Tables keyed by norm, rows sorted by `(k, w, target)`.
fn collect(inputs: &[std::path::PathBuf]) -> Result<(Tables, Vec<Curve>)> {
    let mut tables = Tables::new();
    let mut curves = Vec::new();
    for path in inputs {
        let text = read(path)?;
        if text.trim_start().starts_with('{') {
            let r: DistortionReport = serde_json::from_str(&text)
                .with_context(|| format!("{} is not a distortion report", path.display()))?;
            tables
                .entry(r.norm.clone())
                .or_default()
                .push(row_of(path, &r)?);
        } else {
            curves.push(parse_curve(path, &text)?);
        }
    }
    for rows in tables.values_mut() {
        rows.sort_by(|a, b| (a.k, &a.w, &a.target).cmp(&(b.k, &b.w, &b.target)));
    }
    Ok((tables, curves))
}

/// Whether every `(target, w)` series is nondecreasing in `k`.
fn nondecreasing(rows: &[Row]) -> bool {
    let mut last: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    rows.iter().all(|r| {
        let prev = last.insert((&r.target, &r.w), r.measured);
        prev.is_none_or(|p| r.measured >= p)
    })
}

fn floor_cells(curves: &[Curve], k: u32) -> Vec<String> {
    if curves.is_empty() {
        return vec!["-".into()];
    }
    curves
        .iter()
        .map(|c| c.floors.get(&k).map_or("-".into(), |f| format!("{f:.6}")))
        .collect()
}

fn render(tables: &Tables, curves: &[Curve]) -> (String, String) {
    let floor_heads: Vec<String> = if curves.is_empty() {
        vec!["floor".into()]
    } else {
        curves
            .iter()
            .map(|c| format!("floor[{}]", c.name))
            .collect()
    };
    let mut md = String::from("# Distortion report\n");
    let mut csv = format!(
        "norm,k,w,target,measured,upper_bound,{}\n",
        floor_heads.join(",")
    );
    if tables.is_empty() {
        md.push_str("\nNo distortion reports given.\n");
    }
    for (norm, rows) in tables {
        let _ = writeln!(md, "\n## norm {norm}\n");
        let _ = writeln!(
            md,
            "| k | w | target | measured | upper bound | {} |",
            floor_heads.join(" | ")
        );
        let _ = writeln!(md, "|{}", "---|".repeat(5 + floor_heads.len()));
        for r in rows {
            let floors = floor_cells(curves, r.k);
            let _ = writeln!(
                md,
                "| {} | {} | {} | {:.6} | {} | {} |",
                r.k,
                r.w,
                r.target,
                r.measured,
                r.upper,
                floors.join(" | ")
            );
            let _ = writeln!(
                csv,
                "{norm},{},{},{},{},{},{}",
                r.k,
                r.w,
                r.target,
                r.measured,
                r.upper,
                floors.join(",")
            );
        }
        let _ = writeln!(
            md,
            "\nMeasured distortion nondecreasing in k: {}",
            if nondecreasing(rows) { "yes" } else { "no" }
        );
    }
    (md, csv)
}

pub fn run(a: ReportArgs) -> Result<()> {
    let (tables, curves) = collect(&a.inputs)?;
    let (md, csv) = render(&tables, &curves);
    write_atomic(&a.output, &md)?;
    if let Some(path) = &a.csv {
        write_atomic(path, &csv)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "tables": tables.len(),
            "rows": tables.values().map(Vec::len).sum::<usize>(),
            "curves": curves.len(),
        })
    );
    Ok(())
}
