use std::fmt;

use anyhow::{bail, Context, Result};
use serde_json::json;

use diamond_core::bounds::{self, compute_rho, lower_bound_curve};
use diamond_core::distortion::{evaluate, Norm, PairMeasure, VectorEmbedding};
use diamond_core::graphs::product::base_graph;
use diamond_core::graphs::{
    build_coded, build_recursive, check_isomorphism, coded_vertex_count, BundleGraph, BundleSpec,
    Family,
};
use diamond_core::linf_embed::{lp_parameter, psi_embedding};
use diamond_core::lp_transfer::{check_transfer, frechet_base, transfer, BaseEmbedding};
use diamond_core::metric::{bfs_all_pairs, closed_form_all_pairs};
use diamond_core::{exact, io, l1_embed};

use crate::output::{read, write_atomic};
use crate::{
    BoundsArgs, BuildArgs, Cli, Command, DistArgs, DistMethod, DistortArgs, EmbedArgs, L1Method,
    Lemma51Args, Mode, Target, VerifyIsoArgs,
};

pub const MAX_DEPTH: u32 = 6;
pub const MAX_BRANCHING: u32 = 6;
pub const MAX_TRANSFER_DEPTH: u32 = 3;
/// All-pairs outputs are refused above this many vertices.
pub const MAX_PAIR_VERTICES: usize = 4096;

/// A property that was checked and does not hold.
#[derive(Debug)]
pub struct CheckFailed {
    pub kind: &'static str,
    pub message: String,
}

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CheckFailed {}

fn check_failed(kind: &'static str, message: impl Into<String>) -> anyhow::Error {
    CheckFailed {
        kind,
        message: message.into(),
    }
    .into()
}

pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn diagnostic(&self) -> String {
        json!({
            "status": if self.code == 2 { "check_failed" } else { "invalid" },
            "exit": self.code,
            "kind": self.kind,
            "message": self.message,
        })
        .to_string()
    }
}

pub fn classify(e: &anyhow::Error) -> Failure {
    let message = format!("{e:#}");
    if let Some(c) = e.downcast_ref::<CheckFailed>() {
        return Failure {
            code: 2,
            kind: c.kind.to_string(),
            message,
        };
    }
    if let Some(c) = e
        .chain()
        .find_map(|c| c.downcast_ref::<diamond_core::Error>())
    {
        let code = match c {
            diamond_core::Error::NotIsomorphic(_) | diamond_core::Error::Overlap(_) => 2,
            _ => 1,
        };
        return Failure {
            code,
            kind: c.kind().to_string(),
            message,
        };
    }
    Failure {
        code: 1,
        kind: "invalid_input".into(),
        message,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot size the thread pool")?;
    }
    match cli.command {
        Command::Build(a) => build(a),
        Command::VerifyIso(a) => verify_iso(a),
        Command::Dist(a) => dist(a),
        Command::Embed(a) => embed(a),
        Command::Distort(a) => distort(a),
        Command::Bounds(a) => bounds_curve(a),
        Command::CheckLemma51(a) => barycenters(a),
        Command::Report(a) => crate::report::run(a),
    }
}

fn guard_shape(depth: u32, branching: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        bail!("depth {depth} exceeds the guard {MAX_DEPTH}");
    }
    if branching > MAX_BRANCHING {
        bail!("branching {branching} exceeds the guard {MAX_BRANCHING}");
    }
    Ok(())
}

fn guard_pairs(g: &BundleGraph) -> Result<()> {
    if g.len() > MAX_PAIR_VERTICES {
        bail!(
            "{} vertices exceed the all-pairs guard of {MAX_PAIR_VERTICES}",
            g.len()
        );
    }
    Ok(())
}

fn load_graph(path: &std::path::Path) -> Result<BundleGraph> {
    io::graph_from_json(&read(path)?)
        .with_context(|| format!("invalid graph in {}", path.display()))
}

fn summary(v: serde_json::Value) {
    println!("{v}");
}

fn build(a: BuildArgs) -> Result<()> {
    let spec = match a.family {
        Family::CustomBase => {
            let path = a
                .base
                .as_deref()
                .context("the custom-base family needs --base FILE")?;
            BundleSpec::custom(a.depth, load_graph(path)?)
        }
        f => BundleSpec::new(f, a.depth, a.branching),
    };
    guard_shape(spec.depth, spec.branching)?;
    spec.validate()?;
    let g = match a.mode {
        Mode::Coded => build_coded(&spec)?,
        Mode::Recursive => build_recursive(&spec)?,
    };
    write_atomic(&a.output, &io::graph_to_json(&g)?)?;
    summary(json!({
        "family": g.family().to_string(),
        "depth": g.depth(),
        "branching": g.branching(),
        "vertices": g.len(),
        "edges": g.edge_count(),
        "height": g.height(),
    }));
    Ok(())
}

fn verify_iso(a: VerifyIsoArgs) -> Result<()> {
    guard_shape(a.depth, a.branching)?;
    let spec = BundleSpec::diamond(a.depth, a.branching);
    let recursive = build_recursive(&spec)?;
    let coded = build_coded(&spec)?;
    if recursive.len() != coded.len() {
        return Err(check_failed(
            "vertex_count",
            format!(
                "recursive build has {} vertices, coded has {}",
                recursive.len(),
                coded.len()
            ),
        ));
    }
    let iso = check_isomorphism(&recursive, &coded)?;
    if let Some(path) = &a.output {
        let text = serde_json::to_string(&json!({
            "recursive_to_coded": iso.image,
            "by_recipe": iso.by_recipe,
        }))?;
        write_atomic(path, &text)?;
    }
    summary(json!({
        "isomorphic": true,
        "vertices": coded.len(),
        "edges": coded.edge_count(),
        "by_recipe": iso.by_recipe,
    }));
    Ok(())
}

fn dist(a: DistArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    guard_pairs(&g)?;
    let dm = match a.method {
        DistMethod::Bfs => bfs_all_pairs(&g)?,
        DistMethod::Closed => closed_form_all_pairs(&g)?,
    };
    write_atomic(&a.output, &io::distance_csv(&dm))?;
    summary(json!({"vertices": dm.len(), "method": format!("{:?}", a.method).to_lowercase()}));
    Ok(())
}

fn require_coded(g: &BundleGraph) -> Result<()> {
    if g.codes().is_none() {
        bail!("this target needs a coded diamond (build --mode coded)");
    }
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    require_coded(&g)?;
    match a.target {
        Target::C0 | Target::Lp => {
            let emb = psi_embedding(&g)?;
            let p = match (a.target, a.p, a.eps) {
                (Target::C0, _, _) => None,
                (_, Some(p), _) => Some(Norm::lp(p)?.exponent()),
                (_, None, Some(eps)) => Some(lp_parameter(g.depth(), eps)?),
                (_, None, None) => bail!("the lp target needs --p or --eps"),
            };
            write_atomic(&a.output, &io::embedding_to_json(&emb.vectors)?)?;
            summary(json!({
                "target": if p.is_some() { "lp" } else { "c0" },
                "vertices": emb.vectors.len(),
                "norm": p.map_or("sup".to_string(), |p| format!("p:{p}")),
                "max_support": emb.vectors.iter().map(|v| v.support()).max(),
            }));
        }
        Target::L1 => {
            guard_pairs(&g)?;
            let dm = bfs_all_pairs(&g)?;
            let codes = g.codes().expect("checked above");
            let k = g.depth();
            let table = diamond_core::distortion::PairwiseTable::try_build(g.len(), 1, |i, j| {
                let d = match a.l1_method {
                    L1Method::Closed => l1_embed::closed_form_distance(&codes[i], &codes[j], k),
                    L1Method::Atoms => l1_embed::l1_embedding_distance(k, &codes[i], &codes[j])?,
                };
                Ok(d.to_rational())
            })?;
            let csv = io::pair_table_csv(g.len(), 1, &dm, |i, j| table.pair_power(i, j));
            write_atomic(&a.output, &csv)?;
            summary(
                json!({"target": "l1", "vertices": g.len(), "pairs": g.len() * (g.len() - 1) / 2}),
            );
        }
        Target::Transfer => {
            let k = g.depth();
            if k == 0 || k > MAX_TRANSFER_DEPTH {
                bail!("transfer depth must be in 1..={MAX_TRANSFER_DEPTH}, got {k}");
            }
            let p = a.p.context("the transfer target needs --p")?;
            let base = if a.base == "frechet" {
                frechet_base(k)?
            } else {
                let norm: Norm = a.base_norm.parse()?;
                let path = std::path::Path::new(&a.base);
                let vectors = io::embedding_from_json(&read(path)?, coded_vertex_count(k, 2))?;
                BaseEmbedding::new(k, vectors, norm)?
            };
            let t = transfer(&base, p, g.branching())?;
            let table = t.pair_table()?;
            let dm = bfs_all_pairs(&g)?;
            let csv = io::pair_table_csv(t.len(), p, &dm, |i, j| table.pair_power(i, j));
            write_atomic(&a.output, &csv)?;
            let check = check_transfer(&t, &table, &dm)?;
            summary(json!({
                "target": "transfer",
                "vertices": t.len(),
                "p": p,
                "bits": t.bits,
                "base_constant": base.constant(),
                "lipschitz_violations": check.lipschitz_violations,
                "vertical_violations": check.vertical_violations,
                "pair_violations": check.pair_violations,
            }));
            if !check.passed() {
                return Err(check_failed(
                    "transfer_bounds",
                    format!("transfer inequalities fail: {check:?}"),
                ));
            }
        }
    }
    Ok(())
}

fn upper_bound_label(target: Target, exponent: u32, eps: Option<f64>) -> String {
    match target {
        Target::C0 => "3".into(),
        Target::L1 => "2".into(),
        Target::Lp => eps.map_or("3+eps".into(), |e| format!("{}", 3.0 + e)),
        Target::Transfer => format!("2^(1/{exponent})"),
    }
}

fn distort(a: DistortArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    guard_pairs(&g)?;
    let dm = bfs_all_pairs(&g)?;
    let text = read(&a.embedding)?;
    let levels = g.levels().to_vec();
    let vertical = move |i: usize, j: usize, d: u32| d == levels[i].abs_diff(levels[j]);
    let dm_ref = &dm;
    let classify = move |i: usize, j: usize| vertical(i, j, dm_ref.get(i, j));

    let (report, norm_label) = if text.trim_start().starts_with('{') {
        let norm: Norm = a.norm.parse()?;
        let vectors = io::embedding_from_json(&text, g.len())?;
        let map = VectorEmbedding::new(vectors, norm);
        (
            evaluate(&map, &dm, &norm.to_string(), Some(&classify))?,
            norm.to_string(),
        )
    } else {
        let (table, table_dm) = io::pair_table_from_csv(&text)?;
        if table_dm != dm {
            bail!(
                "graph distances in {} do not match the graph",
                a.embedding.display()
            );
        }
        let label = match (a.target, table.exponent()) {
            (Some(Target::L1), _) => "l1".to_string(),
            (Some(Target::Transfer), p) => format!("Lp(Y) p:{p}"),
            (_, 1) => "pairwise".to_string(),
            (_, p) => format!("pairwise p:{p}"),
        };
        (evaluate(&table, &dm, &label, Some(&classify))?, label)
    };

    let mut report = report
        .with_label("family", g.family())
        .with_label("depth", g.depth())
        .with_label("branching", g.branching());
    if let Some(t) = a.target {
        let upper = upper_bound_label(t, report.exponent, a.eps);
        report = report
            .with_label("target", format!("{t:?}").to_lowercase())
            .with_label("upper_bound", upper);
    }
    if let Some(eps) = a.eps {
        report = report.with_label("eps", eps);
    }
    write_atomic(&a.output, &serde_json::to_string_pretty(&report)?)?;
    summary(json!({
        "norm": norm_label,
        "distortion": report.distortion,
        "lipschitz": report.lipschitz,
        "colipschitz": report.colipschitz,
        "pairs": report.pairs,
    }));
    if let Some(bound) = &a.bound {
        let b = exact::parse(bound).with_context(|| format!("bad --bound {bound:?}"))?;
        if !report.distortion_at_most(&b) {
            return Err(check_failed(
                "distortion_bound",
                format!("distortion {} exceeds {bound}", report.distortion),
            ));
        }
    }
    Ok(())
}

fn bounds_curve(a: BoundsArgs) -> Result<()> {
    let rho = match a.rho.parse::<f64>() {
        Ok(r) => r,
        Err(_) => {
            let family: Family = a.rho.parse()?;
            let base = base_graph(&BundleSpec::new(family, 1, a.branching))?;
            compute_rho(&base)?.rho as f64
        }
    };
    let curve = lower_bound_curve(a.p, a.gamma, rho, a.kmax, a.c1)?;
    let mut csv = String::from("k,C_k,floor_k\n");
    for pt in &curve.points {
        csv.push_str(&format!("{},{},{}\n", pt.k, pt.c, pt.floor));
    }
    write_atomic(&a.output, &csv)?;
    let last = curve.points.last().expect("k_max >= 1");
    summary(
        json!({"p": a.p, "gamma": a.gamma, "rho": rho, "K": curve.k_const, "k": last.k, "C_k": last.c, "floor_k": last.floor}),
    );
    Ok(())
}

fn barycenters(a: Lemma51Args) -> Result<()> {
    let out = bounds::check_lemma51(a.dim, a.p, a.samples, a.seed)?;
    summary(serde_json::to_value(&out)?);
    if out.violations > 0 {
        return Err(check_failed(
            "barycenter_outside_mid",
            format!(
                "{} of {} draws lie in Bar but not in Mid",
                out.violations, out.samples
            ),
        ));
    }
    Ok(())
}
