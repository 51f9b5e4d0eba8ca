//! Chart-pinned points of the tropical and positive cluster X-varieties.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::ExchangeMatrix;
use crate::pattern::{ExchangePattern, Step, VertexId};
use crate::semifield::{LogPositive, PositiveRational, Semifield, Tropical};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Cluster X-transformation in direction `k`, in any semifield:
/// `X'_k = X_k^{-1}`, `X'_i = X_i (1 + X_k^{-sgn eps_ik})^{-eps_ik}`.
pub fn mutate_x<S: Semifield>(x: &mut [S], eps: &ExchangeMatrix, k: usize) {
    let one = S::one();
    let xk = x[k].clone();
    for (i, xi) in x.iter_mut().enumerate() {
        let e = eps.get(i, k);
        if i == k || e == 0 {
            continue;
        }
        let factor = one.add(&xk.powi(-e.signum())).powi(-e);
        *xi = xi.mul(&factor);
    }
    x[k] = xk.inv();
}

fn apply_step<S: Semifield>(x: &mut Vec<S>, eps: &ExchangeMatrix, step: &Step) {
    match step {
        Step::Mutation { k } => mutate_x(x, eps, *k),
        Step::Permutation { sigma } => *x = sigma.permute(x),
    }
}

/// Transports coordinates along `steps`, starting in a chart with exchange
/// matrix `eps`. Returns the final exchange matrix too.
pub fn transport_steps<S: Semifield>(
    eps: &ExchangeMatrix,
    steps: &[Step],
    x: &[S],
) -> Result<(ExchangeMatrix, Vec<S>)> {
    check_len(eps.rank(), x.len())?;
    let mut eps = eps.clone();
    let mut x = x.to_vec();
    for step in steps {
        apply_step(&mut x, &eps, step);
        eps = match step {
            Step::Mutation { k } => eps.mutate(*k)?,
            Step::Permutation { sigma } => eps.relabel(sigma)?,
        };
    }
    Ok((eps, x))
}

/// Coordinate change from chart `from` to chart `to` of the pattern, through
/// the base vertex of the BFS tree.
pub fn transport<S: Semifield>(
    p: &ExchangePattern,
    from: VertexId,
    to: VertexId,
    x: &[S],
) -> Result<Vec<S>> {
    check_len(p.rank(), x.len())?;
    let mut x = x.to_vec();
    let mut cur = p.vertex(from)?;
    while let Some((parent, step)) = &cur.parent {
        apply_step(&mut x, &cur.eps, &step.inverse());
        cur = p.vertex(*parent)?;
    }
    let mut chain = Vec::new();
    let mut cur = p.vertex(to)?;
    while let Some((parent, step)) = &cur.parent {
        chain.push((*parent, step));
        cur = p.vertex(*parent)?;
    }
    for (parent, step) in chain.into_iter().rev() {
        apply_step(&mut x, &p.vertices[parent.0].eps, step);
    }
    Ok(x)
}

/// Coordinates in every chart, indexed by vertex id, from coordinates in `from`.
pub fn transport_all<S: Semifield>(
    p: &ExchangePattern,
    from: VertexId,
    x: &[S],
) -> Result<Vec<Vec<S>>> {
    let base = transport(p, from, p.base, x)?;
    let mut out: Vec<Vec<S>> = Vec::with_capacity(p.len());
    for v in p.tree_order() {
        let coords = match &v.parent {
            None => base.clone(),
            Some((parent, step)) => {
                let mut y = out[parent.0].clone();
                apply_step(&mut y, &p.vertices[parent.0].eps, step);
                y
            }
        };
        out.push(coords);
    }
    Ok(out)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TropicalPoint {
    pub chart: VertexId,
    #[serde(rename = "coords")]
    pub x: Vec<f64>,
}

impl TropicalPoint {
    pub fn new(chart: VertexId, x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("tropical coordinates must be finite".into()));
        }
        Ok(Self { chart, x })
    }

    pub fn rank(&self) -> usize {
        self.x.len()
    }

    pub fn in_chart(&self, p: &ExchangePattern, target: VertexId) -> Result<Vec<f64>> {
        let t = transport(p, self.chart, target, &crate::semifield::tropical_vec(&self.x))?;
        Ok(crate::semifield::untropical_vec(&t))
    }
}

/// Piecewise-linear coordinate change of a tropical point.
pub fn tropical_transport(
    l: &TropicalPoint,
    p: &ExchangePattern,
    target: VertexId,
) -> Result<TropicalPoint> {
    Ok(TropicalPoint {
        chart: target,
        x: l.in_chart(p, target)?,
    })
}

/// Exact tropical transport of rational coordinates.
pub fn tropical_transport_exact(
    p: &ExchangePattern,
    from: VertexId,
    to: VertexId,
    x: &[BigRational],
) -> Result<Vec<BigRational>> {
    let t: Vec<Tropical<BigRational>> = x.iter().cloned().map(Tropical).collect();
    Ok(transport(p, from, to, &t)?.into_iter().map(|t| t.0).collect())
}

pub fn scale(l: &TropicalPoint, t: f64) -> Result<TropicalPoint> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("scale factor must be positive, got {t}")));
    }
    Ok(TropicalPoint {
        chart: l.chart,
        x: l.x.iter().map(|v| v * t).collect(),
    })
}

/// A point of the positive X-variety. Floating-point points use
/// [`LogPositive`] and store `log X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivePoint<S = LogPositive> {
    pub chart: VertexId,
    pub coords: Vec<S>,
}

impl PositivePoint<LogPositive> {
    pub fn from_values(chart: VertexId, values: &[f64]) -> Result<Self> {
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "positive coordinates required, got {values:?}"
            )));
        }
        Ok(Self {
            chart,
            coords: values.iter().map(|&v| LogPositive::from_value(v)).collect(),
        })
    }

    pub fn from_logs(chart: VertexId, logs: &[f64]) -> Result<Self> {
        if logs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("log coordinates must be finite".into()));
        }
        Ok(Self {
            chart,
            coords: logs.iter().map(|&v| LogPositive(v)).collect(),
        })
    }

    pub fn logs(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.value()).collect()
    }

    pub fn logs_in(&self, p: &ExchangePattern, chart: VertexId) -> Result<Vec<f64>> {
        let t = transport(p, self.chart, chart, &self.coords)?;
        Ok(t.into_iter().map(|c| c.0).collect())
    }
}

impl PositivePoint<PositiveRational> {
    pub fn from_rationals(chart: VertexId, values: &[BigRational]) -> Result<Self> {
        let coords = values
            .iter()
            .map(|v| {
                PositiveRational::new(v.clone())
                    .ok_or_else(|| Error::Domain(format!("{v} is not positive")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chart, coords })
    }
}

impl<S: Semifield> PositivePoint<S> {
    pub fn rank(&self) -> usize {
        self.coords.len()
    }
}

/// Cluster X-transformation of a positive point to another chart.
pub fn positive_transport<S: Semifield>(
    g: &PositivePoint<S>,
    p: &ExchangePattern,
    target: VertexId,
) -> Result<PositivePoint<S>> {
    Ok(PositivePoint {
        chart: target,
        coords: transport(p, g.chart, target, &g.coords)?,
    })
}

/// Result of cone location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Location {
    pub vertex: VertexId,
    /// Coordinates `x^(vertex)(L)`, all `>= -tol`.
    pub coords: Vec<f64>,
    /// `true` where `|x_i| <= tol`: the point lies on that facet.
    pub boundary: Vec<bool>,
}

impl Location {
    pub fn is_interior(&self) -> bool {
        !self.boundary.iter().any(|&b| b)
    }
}

/// Smallest vertex id whose cone contains `L` within `tol`.
pub fn locate_cone(l: &TropicalPoint, p: &ExchangePattern, tol: f64) -> Result<Location> {
    let x0 = l.in_chart(p, p.base)?;
    locate_base_coords(p, &x0, tol)
}

pub(crate) fn locate_base_coords(p: &ExchangePattern, x0: &[f64], tol: f64) -> Result<Location> {
    for v in &p.vertices {
        let y = v.cone_inverse.apply(x0);
        if y.iter().all(|&yi| yi >= -tol) {
            return Ok(Location {
                vertex: v.id,
                boundary: y.iter().map(|yi| yi.abs() <= tol).collect(),
                coords: y,
            });
        }
    }
    Err(Error::NoConeFound)
}

/// `X_i^(v) = prod_j X0_j^{c_ij} F_j(X0)^{eps^(v)_ij}`, in any semifield.
pub fn separation_eval<S: Semifield>(p: &ExchangePattern, v: VertexId, x0: &[S]) -> Result<Vec<S>> {
    check_len(p.rank(), x0.len())?;
    let vert = p.vertex(v)?;
    let n = p.rank();
    let fvals: Vec<S> = vert.fs.iter().map(|f| f.eval_in(x0)).collect();
    Ok((0..n)
        .map(|i| {
            let mut acc = S::one();
            for j in 0..n {
                let c = vert.c[(i, j)];
                if c != 0 {
                    acc = acc.mul(&x0[j].powi(c));
                }
                let e = vert.eps.get(i, j);
                if e != 0 {
                    acc = acc.mul(&fvals[j].powi(e));
                }
            }
            acc
        })
        .collect())
}

/// Floating-point separation formula with a positivity check.
pub fn separation_eval_f64(p: &ExchangePattern, v: VertexId, x0: &[f64]) -> Result<Vec<f64>> {
    let g = PositivePoint::from_values(p.base, x0)?;
    Ok(separation_eval(p, v, &g.coords)?
        .into_iter()
        .map(LogPositive::value)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::Orientation;
    use crate::pattern::{enumerate_type, fan, EnumerateOptions};
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

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn first_tropical_step() {
        let p = pat("A2");
        let v1 = p.mutation_neighbor(p.base, 0).unwrap();
        let l = TropicalPoint::new(p.base, vec![1.0, 0.0]).unwrap();
        // x'_2 = x_2 - eps_21 min(0, -x_1) = 1.
        assert_eq!(tropical_transport(&l, &p, v1).unwrap().x, vec![-1.0, 1.0]);
        assert_eq!(tropical_transport(&l, &p, p.base).unwrap(), l);
    }

    #[test]
    fn a2_positive_thresholds() {
        let p = pat("A2");
        let v1 = p.mutation_neighbor(p.base, 0).unwrap();
        let v2 = p.mutation_neighbor(v1, 1).unwrap();
        let g = PositivePoint::from_rationals(p.base, &[q(1, 1), q(1, 1)]).unwrap();
        let at = |v| {
            positive_transport(&g, &p, v)
                .unwrap()
                .coords
                .iter()
                .map(|c| c.value().clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(at(v1), vec![q(1, 1), q(1, 2)]);
        assert_eq!(at(v2), vec![q(1, 3), q(2, 1)]);
        let back = positive_transport(&positive_transport(&g, &p, v2).unwrap(), &p, p.base).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn separation_formula_matches_transport_exactly() {
        for ty in ["A2", "B2", "G2", "A3", "B3", "C3", "D4"] {
            let p = pat(ty);
            let n = p.rank();
            let x0: Vec<PositiveRational> = (0..n)
                .map(|i| PositiveRational::from_ratio(2 * i as i64 + 3, i as i64 + 2).unwrap())
                .collect();
            let all = transport_all(&p, p.base, &x0).unwrap();
            for v in p.ids() {
                assert_eq!(separation_eval(&p, v, &x0).unwrap(), all[v.0], "{ty} {v}");
            }
        }
    }

    #[test]
    fn separation_eval_domain() {
        let p = pat("A2");
        assert!(matches!(
            separation_eval_f64(&p, p.base, &[1.0, -1.0]),
            Err(Error::Domain(_))
        ));
        assert_eq!(separation_eval_f64(&p, p.base, &[2.0, 3.0]).unwrap().len(), 2);
    }

    #[test]
    fn locate_examples() {
        let p = pat("A2");
        let l = TropicalPoint::new(p.base, vec![0.5, 2.0]).unwrap();
        assert_eq!(locate_cone(&l, &p, DEFAULT_TOL).unwrap().vertex, p.base);
        let l = TropicalPoint::new(p.base, vec![-1.0, 0.0]).unwrap();
        let loc = locate_cone(&l, &p, DEFAULT_TOL).unwrap();
        let gens = p.vertex(loc.vertex).unwrap().cone.columns();
        assert!(gens.contains(&vec![-1, 0]));
        assert!(!loc.is_interior());
    }

    #[test]
    fn scale_rejects_nonpositive() {
        let l = TropicalPoint::new(VertexId(0), vec![1.0, 2.0]).unwrap();
        assert!(scale(&l, 0.0).is_err());
        assert!(scale(&l, -1.0).is_err());
        assert_eq!(scale(&l, 1.0).unwrap(), l);
        assert_eq!(scale(&scale(&l, 2.0).unwrap(), 0.5).unwrap(), l);
    }

    #[test]
    fn transport_is_linear_on_cones() {
        let p = pat("G2");
        for cone in fan(&p) {
            let v = cone.vertex_id;
            let inv = &p.vertex(v).unwrap().cone_inverse;
            for y in [[1.0, 2.0], [0.3, 0.0], [5.0, 0.25]] {
                let x0 = p.vertex(v).unwrap().cone.apply(&y);
                let l = TropicalPoint::new(p.base, x0.clone()).unwrap();
                let xv = tropical_transport(&l, &p, v).unwrap().x;
                for (a, b) in xv.iter().zip(inv.apply(&x0)) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unknown_chart() {
        let p = pat("A2");
        let l = TropicalPoint::new(VertexId(77), vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            tropical_transport(&l, &p, p.base),
            Err(Error::UnknownVertex(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tropical_round_trip(ty in prop::sample::select(vec!["A2", "B2", "G2", "A3"]),
                               pick in 0usize..1000,
                               x in prop::collection::vec(-10.0f64..10.0, 3)) {
            let p = pat(ty);
            let v = VertexId(pick % p.len());
            let l = TropicalPoint::new(p.base, x[..p.rank()].to_vec()).unwrap();
            let there = tropical_transport(&l, &p, v).unwrap();
            let back = tropical_transport(&there, &p, p.base).unwrap();
            for (a, b) in back.x.iter().zip(&l.x) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn transport_commutes_with_scale(pick in 0usize..1000,
                                         x in prop::collection::vec(-10.0f64..10.0, 3),
                                         t in 0.01f64..50.0) {
            let p = pat("A3");
            let v = VertexId(pick % p.len());
            let l = TropicalPoint::new(p.base, x).unwrap();
            let a = tropical_transport(&scale(&l, t).unwrap(), &p, v).unwrap();
            let b = scale(&tropical_transport(&l, &p, v).unwrap(), t).unwrap();
            for (x, y) in a.x.iter().zip(&b.x) {
                prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn positive_points_stay_positive(pick in 0usize..1000,
                                         logs in prop::collection::vec(-20.0f64..20.0, 3)) {
            let p = pat("B3");
            let v = VertexId(pick % p.len());
            let g = PositivePoint::from_logs(p.base, &logs).unwrap();
            let h = positive_transport(&g, &p, v).unwrap();
            prop_assert!(h.values().iter().all(|&x| x > 0.0));
            let back = positive_transport(&h, &p, p.base).unwrap();
            for (a, b) in back.logs().iter().zip(&logs) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
