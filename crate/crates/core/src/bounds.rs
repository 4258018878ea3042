//! Lower-bound side: approximate barycenters and midpoints, the
//! barycenter-in-midpoint inclusion as a randomized property, the `ρ`
//! constant of a base bundle, the restriction step from depth `k` to
//! `k - 1`, and the distortion growth curves it forces.

use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::{Norm, PairMeasure, Restricted, SparseVector};
use crate::error::{Error, Result};
use crate::exact;
use crate::graphs::{build_coded, build_recursive, BundleGraph, BundleSpec, Family};
use crate::metric::{bfs_all_pairs, DistanceMatrix};

/// Seed used when the caller gives none.
pub const DEFAULT_SEED: u64 = 0x5eed_d1a3;

/// Relative slack on the midpoint side of the inclusion check, absorbing
/// float rounding in the norms.
pub const MID_SLACK: f64 = 1e-12;

fn check_lambda(lambda: &BigRational) -> Result<()> {
    if !lambda.is_positive() || *lambda >= BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} is outside (0, 1)"
        )));
    }
    Ok(())
}

/// `z ∈ Bar_λ(x, y, δ)`, decided exactly. For the p-norm both sides are
/// raised to the power `p`.
pub fn bar_membership(
    x: &SparseVector,
    y: &SparseVector,
    z: &SparseVector,
    lambda: &BigRational,
    delta: &BigRational,
    norm: Norm,
) -> Result<bool> {
    check_lambda(lambda)?;
    if !delta.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} must be positive"
        )));
    }
    let e = norm.exponent();
    let rhs = exact::pow(&(BigRational::one() + delta), e) * norm.distance_power(x, y);
    let left = norm.distance_power(x, z) / exact::pow(lambda, e);
    let right = norm.distance_power(z, y) / exact::pow(&(BigRational::one() - lambda), e);
    Ok(left <= rhs && right <= rhs)
}

/// `z ∈ Mid(x, y, δ)`.
pub fn mid_membership(
    x: &SparseVector,
    y: &SparseVector,
    z: &SparseVector,
    delta: &BigRational,
    norm: Norm,
) -> Result<bool> {
    let half = BigRational::new(1.into(), 2.into());
    bar_membership(x, y, z, &half, delta, norm)
}

/// `‖v‖_p` for real `p >= 1`, or the sup norm when `p` is infinite.
pub fn p_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    v.iter()
        .map(|x| x.abs().powf(p))
        .sum::<f64>()
        .powf(p.recip())
}

fn p_dist(a: &[f64], b: &[f64], p: f64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    p_norm(&d, p)
}

/// Float version of [`bar_membership`] in `ℓ_p^n`, with `slack` added to
/// the right-hand side as a relative tolerance.
pub fn bar_membership_f64(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    lambda: f64,
    delta: f64,
    p: f64,
    slack: f64,
) -> Result<bool> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} is outside (0, 1)"
        )));
    }
    let rhs = (1.0 + delta) * p_dist(x, y, p) * (1.0 + slack);
    Ok(p_dist(x, z, p) / lambda <= rhs && p_dist(z, y, p) / (1.0 - lambda) <= rhs)
}

/// Tallies of a randomized inclusion run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma51Outcome {
    pub samples: usize,
    /// Draws that landed in the barycenter set.
    pub in_bar: usize,
    /// Draws in the barycenter set but outside the midpoint set.
    pub violations: usize,
}

const SHARD: usize = 1024;

/// Draws `(x, z, λ, δ)` in `ℓ_p^dim` and counts `z ∈ Bar_λ(-λx, (1-λ)x, δ)`
/// with `z ∉ Mid(-μx, μx, δ)`, `μ = max(λ, 1 - λ)`. Shard `i` uses stream
/// `i` of a ChaCha generator keyed by `seed`, so the outcome does not depend
/// on the thread count.
pub fn check_lemma51(dim: usize, p: f64, samples: usize, seed: u64) -> Result<Lemma51Outcome> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is below 2"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p = {p} is below 1")));
    }
    let shards = samples.div_ceil(SHARD);
    let tallies = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let n = SHARD.min(samples - s * SHARD);
            let mut in_bar = 0;
            let mut violations = 0;
            for _ in 0..n {
                let (is_bar, is_mid) = barycenter_draw(&mut rng, dim, p);
                in_bar += is_bar as usize;
                violations += (is_bar && !is_mid) as usize;
            }
            (in_bar, violations)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(Lemma51Outcome {
        samples,
        in_bar: tallies.0,
        violations: tallies.1,
    })
}

/// One draw: `z` sits near the exact barycenter `0`, pushed along `x` and
/// a random direction by amounts comparable to `δ` so that both outcomes
/// of the barycenter test occur.
fn barycenter_draw(rng: &mut ChaCha8Rng, dim: usize, p: f64) -> (bool, bool) {
    let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lambda: f64 = rng.gen_range(0.02..0.98);
    let delta: f64 = rng.gen_range(0.001..0.999);
    let nx = p_norm(&x, p);
    let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nu = p_norm(&u, p).max(f64::MIN_POSITIVE);
    let along = rng.gen_range(-1.5..1.5) * delta * lambda.min(1.0 - lambda);
    let across = rng.gen_range(0.0..1.5) * delta * lambda.min(1.0 - lambda) * nx / nu;
    let z: Vec<f64> = x
        .iter()
        .zip(&u)
        .map(|(a, b)| along * a + across * b)
        .collect();

    let scaled = |c: f64| x.iter().map(|a| c * a).collect::<Vec<_>>();
    let mu = lambda.max(1.0 - lambda);
    let is_bar = bar_membership_f64(
        &scaled(-lambda),
        &scaled(1.0 - lambda),
        &z,
        lambda,
        delta,
        p,
        0.0,
    )
    .expect("lambda drawn inside (0, 1)");
    let is_mid = bar_membership_f64(&scaled(-mu), &scaled(mu), &z, 0.5, delta, p, MID_SLACK)
        .expect("one half");
    (is_bar, is_mid)
}

/// The level of a base bundle carrying the widest family of vertices
/// equidistant from the bottom, and `ρ = max(ℓ, h - ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoChoice {
    pub level: u32,
    pub rho: u32,
    pub height: u32,
    pub multiplicity: usize,
}

impl RhoChoice {
    /// `1 - ℓ/h`, the barycentric weight matching the chosen level.
    pub fn lambda(&self) -> f64 {
        1.0 - self.level as f64 / self.height as f64
    }
}

/// A truncated base stands in for an infinite one when some level holds at
/// least this many vertices.
pub const MIN_MULTIPLICITY: usize = 3;

/// Picks the most populated internal level; ties go to the smaller level.
pub fn compute_rho(base: &BundleGraph) -> Result<RhoChoice> {
    let h = base.height();
    let mut counts = vec![0usize; h as usize + 1];
    for &l in base.levels() {
        counts[l as usize] += 1;
    }
    let (level, multiplicity) = (1..h)
        .map(|l| (l, counts[l as usize]))
        .filter(|&(_, c)| c >= MIN_MULTIPLICITY)
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no level holds {MIN_MULTIPLICITY} or more vertices"
            ))
        })?;
    Ok(RhoChoice {
        level,
        rho: level.max(h - level),
        height: h,
        multiplicity,
    })
}

/// The copy of `G_{k-1}` inside `G_k`: its vertex indices in `G_k` and the
/// factor by which `G_k` stretches its distances.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub subset: Vec<usize>,
    pub scale: u32,
    pub lower: BundleGraph,
    pub lower_metric: DistanceMatrix,
}

/// Finds `V(G_{k-1}) ⊂ V(G_k)` and checks that `G_k` induces `s` times the
/// metric of `G_{k-1}` on it, `s` being the height of the base.
pub fn restriction_subset(g: &BundleGraph, dm: &DistanceMatrix) -> Result<Restriction> {
    let k = g.depth();
    let fail = || Error::SubsetNotIdentifiable(k.saturating_sub(1));
    if k == 0 || g.family() == Family::CustomBase {
        return Err(fail());
    }
    let spec = BundleSpec::new(g.family(), k - 1, g.branching());
    let lower = match g.codes() {
        Some(_) => build_coded(&spec)?,
        None => build_recursive(&spec)?,
    };
    let subset: Vec<usize> = match (g.codes(), lower.codes()) {
        (Some(codes), Some(lower_codes)) => {
            let index = crate::graphs::code_index(codes);
            lower_codes
                .iter()
                .map(|c| index.get(c).copied().ok_or_else(fail))
                .collect::<Result<_>>()?
        }
        // recursive builds list the previous depth first
        _ => (0..lower.len()).collect(),
    };
    if subset.len() > g.len() || dm.len() != g.len() {
        return Err(fail());
    }
    let scale = g.height() / lower.height().max(1);
    let lower_metric = bfs_all_pairs(&lower)?;
    for (i, j) in lower_metric.pairs() {
        if dm.get(subset[i], subset[j]) != scale * lower_metric.get(i, j) {
            return Err(fail());
        }
    }
    Ok(Restriction {
        subset,
        scale,
        lower,
        lower_metric,
    })
}

/// `f` restricted to the copy of `G_{k-1}` and divided by the stretch
/// factor, so its constants are read against the metric of `G_{k-1}`.
pub fn self_improve_restrict<'a, M: PairMeasure + ?Sized>(
    f: &'a M,
    r: &Restriction,
) -> Restricted<'a, M> {
    Restricted {
        inner: f,
        subset: r.subset.clone(),
        scale: BigRational::new(1.into(), r.scale.into()),
    }
}

/// Modulus of asymptotic midpoint convexity, as a lower estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModulusSpec {
    /// `δ(t) = γ t^p`.
    PowerType { gamma: f64, p: f64 },
    /// Piecewise linear through `(t, δ)` points with increasing `t`, flat
    /// outside the sampled range.
    Table { points: Vec<(f64, f64)> },
}

impl ModulusSpec {
    pub fn power_type(gamma: f64, p: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must be positive"
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
        }
        Ok(ModulusSpec::PowerType { gamma, p })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NonMonotoneModulus("empty table".into()));
        }
        for w in points.windows(2) {
            if w[0].0.is_nan() || w[0].0 >= w[1].0 || w[0].1 > w[1].1 {
                return Err(Error::NonMonotoneModulus(format!(
                    "{:?} followed by {:?}",
                    w[0], w[1]
                )));
            }
        }
        if points
            .iter()
            .any(|&(t, d)| t.is_nan() || t <= 0.0 || t >= 1.0 || d.is_nan() || d < 0.0)
        {
            return Err(Error::NonMonotoneModulus(
                "points must have t in (0,1), δ >= 0".into(),
            ));
        }
        Ok(ModulusSpec::Table { points })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ModulusSpec::PowerType { gamma, p } => gamma * t.powf(*p),
            ModulusSpec::Table { points } => {
                let i = points.partition_point(|&(s, _)| s <= t);
                if i == 0 {
                    return points[0].1;
                }
                if i == points.len() {
                    return points[i - 1].1;
                }
                let ((t0, d0), (t1, d1)) = (points[i - 1], points[i]);
                d0 + (d1 - d0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: u32,
    pub c: f64,
    /// `(K (k-1))^(1/p)`.
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCurve {
    pub p: f64,
    pub gamma: f64,
    pub rho: f64,
    /// `γ / (5 (9ρ)^p)`.
    pub k_const: f64,
    pub points: Vec<CurvePoint>,
}

impl LowerBoundCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|q| q.c).collect()
    }
}

/// Relative tolerance of the bisection.
pub const BISECTION_TOL: f64 = 1e-12;

/// `c (1 - δ(1/(9ρc)) / 5)`: the largest distortion at depth `k - 1` that
/// a depth-`k` distortion `c` still allows.
pub fn improved(modulus: &ModulusSpec, rho: f64, c: f64) -> f64 {
    c * (1.0 - modulus.eval(1.0 / (9.0 * rho * c)) / 5.0)
}

/// Smallest `c >= prev` with `improved(c) >= prev`, by bisection. Assumes
/// `improved` is increasing past `prev`, which holds for power type.
pub fn next_lower_bound(modulus: &ModulusSpec, rho: f64, prev: f64) -> f64 {
    let ok = |c: f64| improved(modulus, rho, c) >= prev;
    if ok(prev) {
        return prev;
    }
    let mut lo = prev;
    let mut step = prev.max(1.0) * 1e-3;
    let mut hi = prev + step;
    while !ok(hi) {
        lo = hi;
        step *= 2.0;
        hi = prev + step;
    }
    while hi - lo > BISECTION_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The curve `C_1, ..., C_{k_max}` for a power-type modulus.
pub fn lower_bound_curve(
    p: f64,
    gamma: f64,
    rho: f64,
    k_max: u32,
    c1: f64,
) -> Result<LowerBoundCurve> {
    let modulus = ModulusSpec::power_type(gamma, p)?;
    curve_for(&modulus, p, gamma, rho, k_max, c1)
}

/// Same recursion for any modulus; `p` and `gamma` only feed the floor.
pub fn curve_for(
    modulus: &ModulusSpec,
    p: f64,
    gamma: f64,
    rho: f64,
    k_max: u32,
    c1: f64,
) -> Result<LowerBoundCurve> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho = {rho} is below 1")));
    }
    if !(c1 >= 1.0 && c1.is_finite()) {
        return Err(Error::InvalidParameter(format!("C_1 = {c1} is below 1")));
    }
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let k_const = gamma / (5.0 * (9.0 * rho).powf(p));
    let mut points = Vec::with_capacity(k_max as usize);
    let mut c = c1;
    for k in 1..=k_max {
        if k > 1 {
            c = next_lower_bound(modulus, rho, c);
        }
        points.push(CurvePoint {
            k,
            c,
            floor: (k_const * (k - 1) as f64).powf(p.recip()),
        });
    }
    Ok(LowerBoundCurve {
        p,
        gamma,
        rho,
        k_const,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::product::{diamond_base, laakso_base, parasol_base};
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn vec2(a: BigRational, b: BigRational) -> SparseVector {
        SparseVector::from_entries([(0, a), (1, b)])
    }

    #[test]
    fn exact_barycenter_is_member() {
        let x = vec2(q(-1, 3), q(1, 2));
        let y = vec2(q(2, 1), q(0, 1));
        for (ln, ld) in [(1, 3), (1, 2), (4, 5)] {
            let l = q(ln, ld);
            let mut z = x.scale(&(BigRational::one() - &l));
            for (k, v) in y.scale(&l).iter() {
                z.add_to(k, v);
            }
            for norm in [Norm::Sup, Norm::L1, Norm::Lp(2), Norm::Lp(3)] {
                assert!(
                    bar_membership(&x, &y, &z, &l, &q(1, 1000), norm).unwrap(),
                    "{norm} {l}"
                );
            }
        }
    }

    #[test]
    fn far_point_is_not_member() {
        let l = q(1, 3);
        let x = vec2(-l.clone(), BigRational::zero());
        let y = vec2(BigRational::one() - &l, BigRational::zero());
        let z = vec2(BigRational::zero(), exact::int(10));
        assert!(!bar_membership(&x, &y, &z, &l, &q(1, 2), Norm::Lp(2)).unwrap());
        assert!(bar_membership(&x, &y, &x, &BigRational::zero(), &q(1, 2), Norm::L1).is_err());
        assert!(bar_membership(&x, &y, &x, &l, &BigRational::zero(), Norm::L1).is_err());
    }

    #[test]
    fn half_is_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let half = q(1, 2);
        for _ in 0..1000 {
            let mut draw = || vec2(q(rng.gen_range(-20..20), 8), q(rng.gen_range(-20..20), 8));
            let (x, y, z) = (draw(), draw(), draw());
            let delta = q(rng.gen_range(1..8), 8);
            for norm in [Norm::Sup, Norm::Lp(2)] {
                assert_eq!(
                    bar_membership(&x, &y, &z, &half, &delta, norm).unwrap(),
                    mid_membership(&x, &y, &z, &delta, norm).unwrap()
                );
            }
        }
    }

    #[test]
    fn barycenters_are_midpoints() {
        for p in [1.5, 2.0, 4.0] {
            let out = check_lemma51(8, p, 10_000, DEFAULT_SEED).unwrap();
            assert_eq!(out.violations, 0, "p = {p}");
            assert!(out.in_bar > 1000, "too few informative draws: {out:?}");
        }
        assert_eq!(
            check_lemma51(4, 2.0, 3000, 9).unwrap(),
            check_lemma51(4, 2.0, 3000, 9).unwrap()
        );
        assert!(check_lemma51(1, 2.0, 10, 0).is_err());
    }

    #[test]
    fn perturbed_equality_case() {
        // z slightly beyond the far end of the midpoint ball along x
        let x = [1.0, 0.0];
        let (lambda, delta, p) = (0.25, 0.1, 2.0);
        let mu = 0.75;
        let z = [mu * (1.0 + delta) - mu + 1e-3, 0.0];
        let s = |c: f64| [c * x[0], c * x[1]];
        let bar =
            bar_membership_f64(&s(-lambda), &s(1.0 - lambda), &z, lambda, delta, p, 0.0).unwrap();
        let mid = bar_membership_f64(&s(-mu), &s(mu), &z, 0.5, delta, p, 0.0).unwrap();
        assert!(!mid);
        assert!(!bar, "outside Mid must also be outside Bar");
    }

    #[test]
    fn rho_of_bases() {
        let d = compute_rho(&diamond_base(3)).unwrap();
        assert_eq!((d.level, d.rho), (1, 1));
        let l = compute_rho(&laakso_base(3)).unwrap();
        assert_eq!((l.level, l.rho), (2, 2));
        let p = compute_rho(&parasol_base(3)).unwrap();
        assert_eq!((p.level, p.rho, p.height), (2, 2, 3));
        assert!(compute_rho(&diamond_base(2)).is_err());
    }

    #[test]
    fn restriction_of_coded_diamond() {
        let g = build_coded(&BundleSpec::diamond(2, 2)).unwrap();
        let dm = bfs_all_pairs(&g).unwrap();
        let r = restriction_subset(&g, &dm).unwrap();
        assert_eq!(r.subset.len(), 4);
        assert_eq!(r.scale, 2);
        let g = build_recursive(&BundleSpec::new(Family::Laakso, 2, 2)).unwrap();
        let dm = bfs_all_pairs(&g).unwrap();
        let r = restriction_subset(&g, &dm).unwrap();
        assert_eq!(r.scale, 4);
        assert_eq!(r.subset.len(), r.lower.len());
    }

    #[test]
    fn curve_basics() {
        let c = lower_bound_curve(2.0, 1.0, 1.0, 20, 1.0).unwrap();
        assert_eq!(c.points[0].c, 1.0);
        for w in c.points.windows(2) {
            assert!(w[1].c >= w[0].c);
        }
        for pt in &c.points {
            assert!(pt.c >= pt.floor * (1.0 - 1e-9));
        }
        assert!(lower_bound_curve(1.0, 1.0, 1.0, 5, 1.0).is_err());
        assert!(lower_bound_curve(2.0, 1.0, 0.5, 5, 1.0).is_err());
    }

    #[test]
    fn quadratic_case_regression() {
        // For p = 2 each step solves c - K/c = prev in closed form.
        let c = lower_bound_curve(2.0, 1.0, 1.0, 10, 1.0).unwrap();
        for w in c.points.windows(2) {
            let prev = w[0].c;
            let want = (prev + (prev * prev + 4.0 * c.k_const).sqrt()) / 2.0;
            assert!(
                (w[1].c - want).abs() <= 2.0 * BISECTION_TOL * want,
                "k={}: {} vs {want}",
                w[1].k,
                w[1].c
            );
        }
        assert!((c.points[9].c - 1.0219544447223954).abs() < 1e-12);
    }

    #[test]
    fn table_modulus() {
        assert!(matches!(
            ModulusSpec::table(vec![(0.1, 0.2), (0.2, 0.1)]),
            Err(Error::NonMonotoneModulus(_))
        ));
        let m = ModulusSpec::table(vec![(0.01, 0.0001), (0.5, 0.25)]).unwrap();
        assert!((m.eval(0.255) - 0.12505).abs() < 1e-12);
        assert_eq!(m.eval(0.001), 0.0001);
    }
}
