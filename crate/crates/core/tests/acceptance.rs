//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! against its budget. Runs without the libtest harness so the lines are
//! always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::One;

use diamond_core::bounds::{
    check_lemma51, lower_bound_curve, restriction_subset, self_improve_restrict, DEFAULT_SEED,
};
use diamond_core::distortion::{evaluate, DistortionReport, Norm, PairMeasure, PairwiseTable};
use diamond_core::graphs::{
    build_coded, build_recursive, check_isomorphism, BundleGraph, BundleSpec,
};
use diamond_core::linf_embed::{lp_parameter, psi_embedding};
use diamond_core::lp_transfer::{check_transfer, frechet_base, transfer};
use diamond_core::metric::{bfs_all_pairs, closed_form_distance, is_vertical_pair, DistanceMatrix};
use diamond_core::{exact, l1_embed, Dyadic};

type Check = Result<String, String>;

/// Number, title, time budget in seconds, body.
type Criterion = (u32, &'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn coded(k: u32, w: u32) -> BundleGraph {
    build_coded(&BundleSpec::diamond(k, w)).expect("coded diamond")
}

fn vertical_classifier<'a>(
    g: &'a BundleGraph,
    dm: &'a DistanceMatrix,
) -> impl Fn(usize, usize) -> bool + Sync + 'a {
    let codes = g.codes().expect("coded");
    let k = g.depth();
    move |i, j| is_vertical_pair(&codes[i], &codes[j], dm.get(i, j) as u64, k)
}

/// `|V|` by the substitution recursion: every edge receives `w` new
/// vertices and turns into `2w` edges.
fn counting_oracle(k: u32, w: usize) -> usize {
    let (mut v, mut e) = (2usize, 1usize);
    for _ in 0..k {
        v += w * e;
        e *= 2 * w;
    }
    v
}

fn c1_construction() -> Check {
    let mut notes = Vec::new();
    for (k, w) in [(1, 3), (2, 3), (2, 2), (3, 2)] {
        let spec = BundleSpec::diamond(k, w);
        let rec = build_recursive(&spec).map_err(|e| e.to_string())?;
        let cod = build_coded(&spec).map_err(|e| e.to_string())?;
        let want = counting_oracle(k, w as usize);
        ensure(rec.len() == want && cod.len() == want, || {
            format!(
                "({k},{w}): {} recursive, {} coded, oracle {want}",
                rec.len(),
                cod.len()
            )
        })?;
        check_isomorphism(&rec, &cod).map_err(|e| format!("({k},{w}): {e}"))?;
        notes.push(format!("({k},{w})={want}"));
    }
    ensure(
        counting_oracle(2, 3) == 23 && counting_oracle(3, 2) == 44,
        || "oracle constants".into(),
    )?;
    Ok(format!("isomorphic, |V|: {}", notes.join(" ")))
}

fn c2_metric() -> Check {
    let mut pairs = 0usize;
    for k in 0..=3 {
        for w in 2..=3 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let codes = g.codes().unwrap();
            for (i, j) in dm.pairs() {
                let cf = closed_form_distance(&codes[i], &codes[j], k);
                ensure(cf == dm.get(i, j) as u64, || {
                    format!(
                        "k={k} w={w} {} {}: closed {cf}, bfs {}",
                        codes[i],
                        codes[j],
                        dm.get(i, j)
                    )
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs equal"))
}

fn c3_linf() -> Check {
    let three = exact::int(3);
    let mut worst = 0.0f64;
    for k in 1..=4 {
        for w in 2..=3 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let emb = psi_embedding(&g).map_err(|e| e.to_string())?;
            let vertical = vertical_classifier(&g, &dm);
            let r = evaluate(&emb, &dm, "sup", Some(&vertical)).map_err(|e| e.to_string())?;
            ensure(r.distortion_at_most(&three), || {
                format!("k={k} w={w}: distortion {}", r.distortion)
            })?;
            let v = r.vertical.as_ref().ok_or("no vertical pairs")?;
            ensure(
                v.max_power == BigRational::one() && v.min_power == BigRational::one(),
                || format!("k={k} w={w}: vertical ratios in [{}, {}]", v.min, v.max),
            )?;
            ensure(
                r.max_support.unwrap_or(usize::MAX) <= k as usize + 1,
                || format!("k={k} w={w}: support {:?}", r.max_support),
            )?;
            worst = worst.max(r.distortion);
        }
    }
    Ok(format!("max distortion {worst}"))
}

fn c4_lp_reading() -> Check {
    let eps = 0.6;
    let bound = BigRational::new(18.into(), 5.into());
    let mut notes = Vec::new();
    for k in 1..=3 {
        let p = lp_parameter(k, eps).map_err(|e| e.to_string())?;
        for w in 2..=3 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let emb = psi_embedding(&g)
                .map_err(|e| e.to_string())?
                .with_norm(Norm::Lp(p));
            let r = evaluate(&emb, &dm, "lp", None).map_err(|e| e.to_string())?;
            ensure(r.distortion_at_most(&bound), || {
                format!("k={k} w={w} p={p}: distortion {}", r.distortion)
            })?;
            notes.push(format!("k={k},w={w},p={p}:{:.4}", r.distortion));
        }
    }
    Ok(notes.join(" "))
}

fn c5_l1() -> Check {
    let mut pairs = 0usize;
    for k in 1..=3 {
        for w in 2..=3 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let codes = g.codes().unwrap();
            for c in codes {
                let m = l1_embed::build_s(c).map_err(|e| e.to_string())?.measure();
                ensure(m == c.r(), || format!("k={k} w={w}: P(S{c}) = {m}"))?;
            }
            for (i, j) in dm.pairs() {
                let (x, y) = (&codes[i], &codes[j]);
                let atoms = l1_embed::l1_embedding_distance(k, x, y).map_err(|e| e.to_string())?;
                let closed = l1_embed::closed_form_distance(x, y, k);
                ensure(atoms == closed, || {
                    format!("k={k} w={w} {x} {y}: atoms {atoms}, closed {closed}")
                })?;
                let d = Dyadic::from_int(dm.get(i, j) as i128);
                ensure(closed <= d && closed.double() >= d, || {
                    format!("k={k} w={w} {x} {y}: {closed} outside [d/2, d], d = {d}")
                })?;
                if is_vertical_pair(x, y, dm.get(i, j) as u64, k) {
                    ensure(closed == d, || {
                        format!("k={k} w={w} {x} {y}: vertical {closed} != {d}")
                    })?;
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs exact"))
}

fn transfer_table(
    k: u32,
    w: u32,
    p: u32,
) -> Result<(BundleGraph, DistanceMatrix, PairwiseTable, bool), String> {
    let base = frechet_base(k).map_err(|e| e.to_string())?;
    let t = transfer(&base, p, w).map_err(|e| e.to_string())?;
    let g = t.graph().map_err(|e| e.to_string())?;
    let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
    let table = t.pair_table().map_err(|e| e.to_string())?;
    let check = check_transfer(&t, &table, &dm).map_err(|e| e.to_string())?;
    if !check.passed() {
        return Err(format!("k={k} w={w} p={p}: {check:?}"));
    }
    Ok((g, dm, table, t.provenance_violation().is_none()))
}

fn c6_transfer() -> Check {
    let two = exact::int(2);
    let mut notes = Vec::new();
    for k in 1..=3 {
        for p in [1, 2] {
            let (_, dm, table, provenance) = transfer_table(k, 2, p)?;
            ensure(provenance, || {
                format!("k={k} p={p}: atom value at the wrong height")
            })?;
            let r = evaluate(&table, &dm, "transfer", None).map_err(|e| e.to_string())?;
            ensure(r.distortion_power_at_most(&two), || {
                format!("k={k} p={p}: distortion {}", r.distortion)
            })?;
            notes.push(format!("k={k},p={p}:{:.4}", r.distortion));
        }
    }
    Ok(notes.join(" "))
}

fn c7_barycenters() -> Check {
    let mut notes = Vec::new();
    for p in [1.5, 2.0, 4.0] {
        let out = check_lemma51(8, p, 10_000, DEFAULT_SEED).map_err(|e| e.to_string())?;
        ensure(out.violations == 0, || {
            format!("p={p}: {} violations", out.violations)
        })?;
        notes.push(format!("p={p}: 0/{} ({} in Bar)", out.samples, out.in_bar));
    }
    Ok(notes.join(", "))
}

/// Smallest `c >= prev` with `c - K c^(1-p) >= prev`, located by repeated
/// uniform grids rather than halving.
fn grid_oracle(p: f64, k_const: f64, prev: f64) -> f64 {
    let g = |c: f64| c - k_const * c.powf(1.0 - p);
    if g(prev) >= prev {
        return prev;
    }
    let step = k_const.max(1e-300);
    let mut c = prev;
    while g(c) < prev {
        c += step;
    }
    let (mut lo, mut hi) = (c - step, c);
    // Each pass shrinks the bracket a thousandfold; five reach 1e-15.
    for _ in 0..5 {
        let h = (hi - lo) / 1000.0;
        let i = (1..=1000)
            .find(|&i| g(lo + i as f64 * h) >= prev)
            .unwrap_or(1000);
        hi = lo + i as f64 * h;
        lo += (i - 1) as f64 * h;
    }
    hi
}

fn c8_curves() -> Check {
    let mut worst_rel = 0.0f64;
    for p in [2.0, 4.0] {
        for rho in [1.0, 2.0] {
            let curve = lower_bound_curve(p, 1.0, rho, 20, 1.0).map_err(|e| e.to_string())?;
            let pts = &curve.points;
            ensure(pts.len() == 20 && pts[0].c == 1.0, || "curve shape".into())?;
            let mut prev = 1.0;
            for (i, pt) in pts.iter().enumerate() {
                if i > 0 {
                    ensure(pt.c >= pts[i - 1].c, || {
                        format!("p={p} rho={rho}: decreases at k={}", pt.k)
                    })?;
                    let oracle = grid_oracle(p, curve.k_const, prev);
                    let rel = (pt.c - oracle).abs() / oracle;
                    worst_rel = worst_rel.max(rel);
                    ensure(rel <= 1e-9, || {
                        format!("p={p} rho={rho} k={}: {} vs grid {oracle}", pt.k, pt.c)
                    })?;
                    prev = oracle;
                }
                ensure(pt.c >= pt.floor * (1.0 - 1e-9), || {
                    format!(
                        "p={p} rho={rho} k={}: {} below floor {}",
                        pt.k, pt.c, pt.floor
                    )
                })?;
            }
        }
    }
    Ok(format!("bisection vs grid within {worst_rel:.1e}"))
}

fn restriction_ok<M: PairMeasure>(
    g: &BundleGraph,
    dm: &DistanceMatrix,
    map: &M,
    what: &str,
) -> Result<(), String> {
    let full = evaluate(map, dm, what, None).map_err(|e| e.to_string())?;
    let r = restriction_subset(g, dm).map_err(|e| e.to_string())?;
    let restricted = self_improve_restrict(map, &r);
    let part = evaluate(&restricted, &r.lower_metric, what, None).map_err(|e| e.to_string())?;
    ensure(part.distortion_power <= full.distortion_power, || {
        format!(
            "{what}: restriction {} > {}",
            part.distortion, full.distortion
        )
    })
}

fn c9_growth() -> Check {
    let p = lp_parameter(4, 0.6).map_err(|e| e.to_string())?;
    let mut series = Vec::new();
    let mut checked = 0;
    for w in 2..=3 {
        let mut last: Option<DistortionReport> = None;
        for k in 1..=4 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let emb = psi_embedding(&g).map_err(|e| e.to_string())?;
            let lp = emb.with_norm(Norm::Lp(p));
            let r = evaluate(&lp, &dm, "lp", None).map_err(|e| e.to_string())?;
            if let Some(prev) = &last {
                ensure(r.distortion_power >= prev.distortion_power, || {
                    format!(
                        "w={w}: distortion drops at k={k}: {} < {}",
                        r.distortion, prev.distortion
                    )
                })?;
            }
            if k >= 2 {
                restriction_ok(&g, &dm, &emb, &format!("sup k={k} w={w}"))?;
                restriction_ok(&g, &dm, &lp, &format!("lp k={k} w={w}"))?;
                checked += 2;
            }
            series.push(format!("{:.4}", r.distortion));
            last = Some(r);
        }
    }
    for k in 2..=3 {
        for w in 2..=3 {
            let g = coded(k, w);
            let dm = bfs_all_pairs(&g).map_err(|e| e.to_string())?;
            let codes = g.codes().unwrap();
            let table = PairwiseTable::build(g.len(), 1, |i, j| {
                l1_embed::closed_form_distance(&codes[i], &codes[j], k).to_rational()
            });
            restriction_ok(&g, &dm, &table, &format!("l1 k={k} w={w}"))?;
            checked += 1;
        }
        for q in [1, 2] {
            let (g, dm, table, _) = transfer_table(k, 2, q)?;
            restriction_ok(&g, &dm, &table, &format!("transfer k={k} p={q}"))?;
            checked += 1;
        }
    }
    Ok(format!(
        "p={p} series [{}], {checked} restrictions monotone",
        series.join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "construction equivalence", 5, c1_construction),
        (2, "metric oracle agreement", 10, c2_metric),
        (3, "sup-norm tree embedding", 30, c3_linf),
        (4, "p-norm reading", 60, c4_lp_reading),
        (5, "L1 Bernoulli embedding", 60, c5_l1),
        (6, "Lp transfer", 120, c6_transfer),
        (7, "barycenter inclusion", 10, c7_barycenters),
        (8, "lower-bound curves", 1, c8_curves),
        (9, "growth trend and restriction", 60, c9_growth),
    ];
    let mut failed = 0;
    for (n, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (status, detail) = match (&outcome, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {n} [{title}]: {status} ({:.2} s of {budget} s) {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
