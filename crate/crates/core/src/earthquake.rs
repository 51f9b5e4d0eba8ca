//! The cluster earthquake map `E(g0, L)`, its inverse, its derivative in
//! `L`, and its asymptotics.
//!
//! All positive points are handled in log coordinates, so `E(g0, t L)` can be
//! evaluated for large `t` without overflow.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::ExchangeMatrix;
use crate::matrix::IntMatrix;
use crate::pattern::{
    enumerate, limit_target, EnumerateOptions, ExchangePattern, Step, VertexId,
};
use crate::points::{
    locate_cone, scale, transport, transport_all, transport_steps,
    PositivePoint, TropicalPoint, DEFAULT_TOL,
};
use crate::semifield::{logistic, LogPositive};

#[derive(Clone, Debug, PartialEq)]
pub struct EarthquakeResult {
    pub g: PositivePoint,
    pub cone_vertex: VertexId,
}

/// `exp` of a tropical point given by its coordinates `x_v` in chart `v`,
/// based at `g0`: in chart `v`, `log X_i := x_i + log X_i(g0)`. The result is
/// expressed in the chart of `g0`.
pub fn exp_map(
    p: &ExchangePattern,
    g0: &PositivePoint,
    v: VertexId,
    x_v: &[f64],
) -> Result<PositivePoint> {
    let mut logs = g0.logs_in(p, v)?;
    if x_v.len() != logs.len() {
        return Err(Error::DimensionMismatch {
            expected: logs.len(),
            found: x_v.len(),
        });
    }
    for (l, x) in logs.iter_mut().zip(x_v) {
        *l += x;
    }
    let coords: Vec<LogPositive> = logs.into_iter().map(LogPositive).collect();
    Ok(PositivePoint {
        chart: g0.chart,
        coords: transport(p, v, g0.chart, &coords)?,
    })
}

pub fn quake(p: &ExchangePattern, g0: &PositivePoint, l: &TropicalPoint) -> Result<EarthquakeResult> {
    quake_with_tol(p, g0, l, DEFAULT_TOL)
}

pub fn quake_with_tol(
    p: &ExchangePattern,
    g0: &PositivePoint,
    l: &TropicalPoint,
    tol: f64,
) -> Result<EarthquakeResult> {
    let loc = locate_cone(l, p, tol)?;
    let coords: Vec<f64> = loc.coords.iter().map(|&x| x.max(0.0)).collect();
    Ok(EarthquakeResult {
        g: exp_map(p, g0, loc.vertex, &coords)?,
        cone_vertex: loc.vertex,
    })
}

/// The tropical point `L` (base chart) with `E(g0, L) = g`.
pub fn inverse_quake(
    p: &ExchangePattern,
    g0: &PositivePoint,
    g: &PositivePoint,
    tol: f64,
) -> Result<TropicalPoint> {
    let all_g = transport_all(p, g.chart, &g.coords)?;
    let all_g0 = transport_all(p, g0.chart, &g0.coords)?;
    for v in &p.vertices {
        let x: Vec<f64> = all_g[v.id.0]
            .iter()
            .zip(&all_g0[v.id.0])
            .map(|(a, b)| a.0 - b.0)
            .collect();
        if x.iter().all(|&xi| xi >= -tol) {
            let x: Vec<f64> = x.iter().map(|&xi| xi.max(0.0)).collect();
            return TropicalPoint::new(p.base, v.cone.apply(&x));
        }
    }
    Err(Error::NoAdmissibleVertex)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    #[default]
    Analytic,
    FiniteDifference,
}

impl FromStr for DerivativeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "fd" | "finite-difference" | "finite_difference" => Ok(Self::FiniteDifference),
            other => Err(Error::Parse(format!("unknown derivative method {other:?}"))),
        }
    }
}

/// Tangent vector at `base`, in log coordinates of `chart`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: PositivePoint,
    pub chart: VertexId,
    pub delta: Vec<f64>,
}

pub const FD_STEP: f64 = 1e-4;

/// One-sided derivative `d/dt|_{t=0+} E(g, tL)` in base-chart log coordinates.
pub fn dquake(
    p: &ExchangePattern,
    g: &PositivePoint,
    l: &TropicalPoint,
    method: DerivativeMethod,
) -> Result<TangentVector> {
    let delta = match method {
        DerivativeMethod::Analytic => {
            let loc = locate_cone(l, p, DEFAULT_TOL)?;
            let at_v = g.logs_in(p, loc.vertex)?;
            push_tangent(p, loc.vertex, p.base, &at_v, &loc.coords)?
        }
        DerivativeMethod::FiniteDifference => {
            let base = g.logs_in(p, p.base)?;
            let diff = |h: f64| -> Result<Vec<f64>> {
                let moved = quake(p, g, &scale(l, h)?)?.g.logs_in(p, p.base)?;
                Ok(moved.iter().zip(&base).map(|(a, b)| (a - b) / h).collect())
            };
            let d1 = diff(FD_STEP)?;
            let d2 = diff(FD_STEP / 2.0)?;
            d2.iter().zip(&d1).map(|(a, b)| 2.0 * a - b).collect()
        }
    };
    Ok(TangentVector {
        base: PositivePoint {
            chart: p.base,
            coords: g.logs_in(p, p.base)?.into_iter().map(LogPositive).collect(),
        },
        chart: p.base,
        delta,
    })
}

/// Pushes a log-coordinate tangent vector at the point with logs `u` in
/// chart `from` to chart `to`, along with the point itself.
pub fn push_tangent(
    p: &ExchangePattern,
    from: VertexId,
    to: VertexId,
    u: &[f64],
    delta: &[f64],
) -> Result<Vec<f64>> {
    let steps = p.path_between(from, to)?;
    let mut eps = p.vertex(from)?.eps.clone();
    let mut u: Vec<LogPositive> = u.iter().map(|&x| LogPositive(x)).collect();
    let mut delta = delta.to_vec();
    for step in &steps {
        match step {
            Step::Mutation { k } => {
                let k = *k;
                let (uk, dk) = (u[k].0, delta[k]);
                for (i, di) in delta.iter_mut().enumerate() {
                    let e = eps.get(i, k);
                    if i != k && e != 0 {
                        // d log X'_i / d log X_k = |eps_ik| logistic(-sgn(eps_ik) log X_k)
                        *di += e.abs() as f64 * logistic(-(e.signum() as f64) * uk) * dk;
                    }
                }
                delta[k] = -dk;
            }
            Step::Permutation { sigma } => delta = sigma.permute(&delta),
        }
        let (next_eps, next_u) = transport_steps(&eps, std::slice::from_ref(step), &u)?;
        eps = next_eps;
        u = next_u;
    }
    Ok(delta)
}

/// `log(X^(chart)(E(g, L)) / X^(chart)(g))`.
pub fn u_coords(
    p: &ExchangePattern,
    g: &PositivePoint,
    l: &TropicalPoint,
    chart: VertexId,
) -> Result<Vec<f64>> {
    let moved = quake(p, g, l)?.g.logs_in(p, chart)?;
    let here = g.logs_in(p, chart)?;
    Ok(moved.iter().zip(&here).map(|(a, b)| a - b).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub estimate: Vec<f64>,
    pub target: Vec<i64>,
    pub error: f64,
}

/// `log X^(v0)(E(g0, t L^(v)_k)) / t` and its limit, column `k` of
/// `C^{-s}_{v -> v0}`.
pub fn limit_l(
    p: &ExchangePattern,
    g0: &PositivePoint,
    v: VertexId,
    k: usize,
    t: f64,
) -> Result<LimitEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    p.vertex(v)?.eps.check_index(k)?;
    let mut x = vec![0.0; p.rank()];
    x[k] = t;
    let g = exp_map(p, g0, v, &x)?;
    let estimate: Vec<f64> = g.logs_in(p, p.base)?.iter().map(|l| l / t).collect();
    let target = limit_target(p, v)?.column(k);
    Ok(LimitEstimate {
        error: max_diff(&estimate, &target),
        estimate,
        target,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitMatrix {
    /// Column `k` is `u(g, L^(v)_k)`.
    pub u: Vec<Vec<f64>>,
    pub target: IntMatrix,
    pub error: f64,
}

/// u-coordinates of the generators of the cone of `v`, against `C^s_{v -> v0}`.
pub fn limit_g(p: &ExchangePattern, g: &PositivePoint, v: VertexId) -> Result<LimitMatrix> {
    let n = p.rank();
    let target = p.vertex(v)?.cone.clone();
    let here = g.logs_in(p, p.base)?;
    let mut u = vec![vec![0.0; n]; n];
    for k in 0..n {
        let mut x = vec![0.0; n];
        x[k] = 1.0;
        let moved = exp_map(p, g, v, &x)?.logs_in(p, p.base)?;
        for i in 0..n {
            u[i][k] = moved[i] - here[i];
        }
    }
    Ok(LimitMatrix {
        error: target.max_abs_diff(&u),
        u,
        target,
    })
}

fn max_diff(a: &[f64], b: &[i64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, &y)| (x - y as f64).abs())
        .fold(0.0, f64::max)
}

/// Commutation residual of earthquake maps with the projection to the
/// coordinates `J` of chart `v0`:
/// `|pi(E(g0, L)) - E_J(pi(g0), pi(L))|` in log coordinates.
pub fn cluster_reduce(
    p: &ExchangePattern,
    v0: VertexId,
    j: &[usize],
    g0: &PositivePoint,
    l: &TropicalPoint,
) -> Result<f64> {
    if j.is_empty() {
        return Err(Error::Precondition("index set J must be nonempty".into()));
    }
    let eps0: &ExchangeMatrix = &p.vertex(v0)?.eps;
    let mut sorted = j.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != j.len() {
        return Err(Error::Precondition(format!("repeated index in J = {j:?}")));
    }
    let sub_eps = eps0.principal_submatrix(j)?;
    let sub = enumerate(
        &sub_eps,
        EnumerateOptions {
            cap: crate::pattern::default_cap(),
            include_permutations: false,
        },
    )?;

    let x0 = l.in_chart(p, v0)?;
    if !in_star(p, v0, j, &sub, &x0)? {
        return Err(Error::Precondition(
            "L is outside the star of the face fixed by J".into(),
        ));
    }

    let full = quake(p, g0, l)?.g.logs_in(p, v0)?;
    let g0_v0 = g0.logs_in(p, v0)?;
    let sub_g0 = PositivePoint::from_logs(sub.base, &j.iter().map(|&i| g0_v0[i]).collect::<Vec<_>>())?;
    let sub_l = TropicalPoint::new(sub.base, j.iter().map(|&i| x0[i]).collect())?;
    let reduced = quake(&sub, &sub_g0, &sub_l)?.g.logs();
    Ok(j
        .iter()
        .zip(&reduced)
        .map(|(&i, r)| (full[i] - r).abs())
        .fold(0.0, f64::max))
}

/// Is the point with chart-`v0` coordinates `x0` in a cone reachable from
/// `v0` by mutations in `J`?
fn in_star(
    p: &ExchangePattern,
    v0: VertexId,
    j: &[usize],
    sub: &ExchangePattern,
    x0: &[f64],
) -> Result<bool> {
    let eps0 = &p.vertex(v0)?.eps;
    let tx: Vec<crate::semifield::Tropical<f64>> = crate::semifield::tropical_vec(x0);
    for w in sub.ids() {
        let steps: Vec<Step> = sub
            .path(w)?
            .into_iter()
            .map(|s| match s {
                Step::Mutation { k } => Ok(Step::Mutation { k: j[k] }),
                Step::Permutation { .. } => Err(Error::Internal(
                    "relabeling in reduced pattern".into(),
                )),
            })
            .collect::<Result<_>>()?;
        let (_, y) = transport_steps(eps0, &steps, &tx)?;
        if y.iter().all(|t| t.0 >= -DEFAULT_TOL) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::Orientation;
    use crate::pattern::{enumerate_type, fan};
    use proptest::prelude::*;

    fn pat(ty: &str) -> ExchangePattern {
        enumerate_type(
            &ty.parse().unwrap(),
            Orientation::Linear,
            EnumerateOptions {
                cap: 10_000,
                include_permutations: true,
            },
        )
        .unwrap()
    }

    fn ones(p: &ExchangePattern) -> PositivePoint {
        PositivePoint::from_logs(p.base, &vec![0.0; p.rank()]).unwrap()
    }

    fn trop(p: &ExchangePattern, x: &[f64]) -> TropicalPoint {
        TropicalPoint::new(p.base, x.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn zero_lamination_is_fixed() {
        let p = pat("A2");
        let g0 = PositivePoint::from_values(p.base, &[1.5, 0.2]).unwrap();
        let r = quake(&p, &g0, &trop(&p, &[0.0, 0.0])).unwrap();
        assert!(close(&r.g.logs(), &g0.logs(), 1e-15));
    }

    #[test]
    fn base_cone_is_componentwise() {
        let p = pat("A2");
        let r = quake(&p, &ones(&p), &trop(&p, &[1.0, 0.0])).unwrap();
        assert!(close(&r.g.values(), &[std::f64::consts::E, 1.0], 1e-12));
        assert_eq!(r.cone_vertex, p.base);
    }

    #[test]
    fn a2_v1_region_inequalities() {
        let p = pat("A2");
        let r = quake(&p, &ones(&p), &trop(&p, &[-1.0, 0.0])).unwrap();
        let [x1, x2] = [r.g.values()[0], r.g.values()[1]];
        assert!(1.0 / x1 >= 1.0 - 1e-12);
        assert!(x1 * x2 / (x1 + 1.0) >= 0.5 - 1e-12);
    }

    #[test]
    fn inverse_of_base_point_is_zero() {
        let p = pat("G2");
        let g0 = PositivePoint::from_values(p.base, &[2.0, 0.7]).unwrap();
        let l = inverse_quake(&p, &g0, &g0, DEFAULT_TOL).unwrap();
        assert!(close(&l.x, &[0.0, 0.0], 1e-15));
    }

    #[test]
    fn tangent_tables() {
        let rows: [(&str, &[([f64; 2], [f64; 2])]); 3] = [
            (
                "A2",
                &[
                    ([1.0, 0.0], [1.0, 0.0]),
                    ([0.0, 1.0], [0.0, 1.0]),
                    ([-1.0, 0.0], [-1.0, 0.5]),
                    ([0.0, -1.0], [-2.0 / 3.0, -2.0 / 3.0]),
                    ([1.0, -1.0], [0.5, -1.0]),
                ],
            ),
            ("B2", &[([1.0, -2.0], [-1.0 / 3.0, -4.0 / 3.0])]),
            ("G2", &[([2.0, -3.0], [0.0, -2.0])]),
        ];
        for (ty, table) in rows {
            let p = pat(ty);
            for (l, xi) in table {
                for m in [DerivativeMethod::Analytic, DerivativeMethod::FiniteDifference] {
                    let d = dquake(&p, &ones(&p), &trop(&p, l), m).unwrap();
                    assert!(close(&d.delta, xi, 1e-6), "{ty} {l:?} {m:?}: {:?}", d.delta);
                }
            }
        }
    }

    #[test]
    fn limit_at_base_vertex_is_exact() {
        let p = pat("B2");
        for t in [1.0, 10.0, 1000.0] {
            let est = limit_l(&p, &ones(&p), p.base, 1, t).unwrap();
            assert_eq!(est.target, vec![0, 1]);
            assert!(est.error < 1e-15);
        }
        let lg = limit_g(&p, &ones(&p), p.base).unwrap();
        assert_eq!(lg.error, 0.0);
    }

    #[test]
    fn limit_l_survives_huge_t() {
        let p = pat("G2");
        for v in fan(&p) {
            for k in 0..2 {
                let est = limit_l(&p, &ones(&p), v.vertex_id, k, 1e6).unwrap();
                assert!(est.estimate.iter().all(|x| x.is_finite()));
                assert!(est.error < 1e-4);
            }
        }
    }

    #[test]
    fn cluster_reduce_preconditions() {
        let p = pat("A3");
        let g0 = ones(&p);
        let l = trop(&p, &[0.5, 0.2, 0.1]);
        assert!(matches!(
            cluster_reduce(&p, p.base, &[], &g0, &l),
            Err(Error::Precondition(_))
        ));
        assert!(cluster_reduce(&p, p.base, &[0, 1, 2], &g0, &l).unwrap() < 1e-12);
        // Far outside the star of the ray fixed by J = {0, 1}.
        let outside = trop(&p, &[0.0, 0.0, -1.0]);
        assert!(matches!(
            cluster_reduce(&p, p.base, &[0, 1], &g0, &outside),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("fd".parse::<DerivativeMethod>().unwrap(), DerivativeMethod::FiniteDifference);
        assert!("euler".parse::<DerivativeMethod>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn flow_property_within_a_cone(pick in 0usize..100,
                                       y in prop::collection::vec(0.0f64..3.0, 2),
                                       logs in prop::collection::vec(-2.0f64..2.0, 2),
                                       s in 0.01f64..2.0, t in 0.01f64..2.0) {
            let p = pat("B2");
            let cones = fan(&p);
            let cone = &cones[pick % cones.len()];
            let l = trop(&p, &cone.generators.apply(&y));
            let g0 = PositivePoint::from_logs(p.base, &logs).unwrap();
            let lhs = quake(&p, &g0, &scale(&l, s + t).unwrap()).unwrap().g;
            let mid = quake(&p, &g0, &scale(&l, s).unwrap()).unwrap().g;
            let rhs = quake(&p, &mid, &scale(&l, t).unwrap()).unwrap().g;
            prop_assert!(close(&lhs.logs(), &rhs.logs(), 1e-9));
        }

        #[test]
        fn gluing_on_shared_faces(pick in 0usize..100, a in 0.0f64..4.0,
                                  logs in prop::collection::vec(-2.0f64..2.0, 2)) {
            let p = pat("G2");
            let g0 = PositivePoint::from_logs(p.base, &logs).unwrap();
            let cones = fan(&p);
            let cone = &cones[pick % cones.len()];
            // A point on ray 0 of this cone, evaluated through every cone that
            // contains it.
            let x0 = cone.generators.apply(&[a, 0.0]);
            let mut images = Vec::new();
            for c in &cones {
                let y = p.vertex(c.vertex_id).unwrap().cone_inverse.apply(&x0);
                if y.iter().all(|&v| v >= -1e-12) {
                    let y: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
                    images.push(exp_map(&p, &g0, c.vertex_id, &y).unwrap().logs());
                }
            }
            prop_assert!(images.len() >= 2 || a == 0.0);
            for im in &images {
                prop_assert!(close(im, &images[0], 1e-9));
            }
        }

        #[test]
        fn analytic_derivative_matches_finite_difference(
            ty in prop::sample::select(vec!["A2", "B2", "G2", "A3"]),
            x in prop::collection::vec(-3.0f64..3.0, 3),
            logs in prop::collection::vec(-2.0f64..2.0, 3)) {
            let p = pat(ty);
            let n = p.rank();
            let g = PositivePoint::from_logs(p.base, &logs[..n]).unwrap();
            let l = trop(&p, &x[..n]);
            let a = dquake(&p, &g, &l, DerivativeMethod::Analytic).unwrap();
            let f = dquake(&p, &g, &l, DerivativeMethod::FiniteDifference).unwrap();
            prop_assert!(close(&a.delta, &f.delta, 1e-6), "{:?} vs {:?}", a.delta, f.delta);
        }

        #[test]
        fn derivative_is_linear_on_cones(pick in 0usize..100,
                                         y1 in prop::collection::vec(0.0f64..3.0, 3),
                                         y2 in prop::collection::vec(0.0f64..3.0, 3),
                                         c in 0.1f64..5.0) {
            let p = pat("A3");
            let cones = fan(&p);
            let cone = &cones[pick % cones.len()];
            let g = ones(&p);
            let d = |y: &[f64]| {
                dquake(&p, &g, &trop(&p, &cone.generators.apply(y)), DerivativeMethod::Analytic)
                    .unwrap()
                    .delta
            };
            let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = y1.iter().map(|a| c * a).collect();
            let additive: Vec<f64> = d(&y1).iter().zip(d(&y2)).map(|(a, b)| a + b).collect();
            prop_assert!(close(&d(&sum), &additive, 1e-9));
            let homog: Vec<f64> = d(&y1).iter().map(|a| c * a).collect();
            prop_assert!(close(&d(&scaled), &homog, 1e-9));
        }

        #[test]
        fn u_coords_in_base_cone(y in prop::collection::vec(0.0f64..5.0, 3),
                                 logs in prop::collection::vec(-3.0f64..3.0, 3)) {
            let p = pat("A3");
            let g = PositivePoint::from_logs(p.base, &logs).unwrap();
            let u = u_coords(&p, &g, &trop(&p, &y), p.base).unwrap();
            prop_assert!(close(&u, &y, 1e-12));
        }
    }
}
