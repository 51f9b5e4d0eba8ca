//! Central charges on glued upper half-plane charts and the horocycle flow.

use num_complex::Complex64;
use serde::Serialize;

use crate::earthquake::quake;
use crate::error::{Error, Result};
use crate::pattern::{ExchangePattern, VertexId};
use crate::points::{locate_cone, scale, PositivePoint, TropicalPoint, DEFAULT_TOL};

/// A vector of nonzero complex numbers in the closed upper half-plane,
/// pinned to a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralCharge {
    pub chart: VertexId,
    pub z: Vec<Complex64>,
}

impl CentralCharge {
    pub fn new(chart: VertexId, z: Vec<Complex64>) -> Result<Self> {
        for (i, zi) in z.iter().enumerate() {
            if !(zi.norm() > 0.0) || zi.im < 0.0 || !zi.re.is_finite() || !zi.im.is_finite() {
                return Err(Error::Domain(format!(
                    "central charge component {i} = {zi} is not in the closed upper half-plane"
                )));
            }
        }
        Ok(Self { chart, z })
    }

    pub fn rank(&self) -> usize {
        self.z.len()
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        if self.chart != other.chart {
            return f64::INFINITY;
        }
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for CentralCharge {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            chart: VertexId,
            z: Vec<[f64; 2]>,
        }
        Repr {
            chart: self.chart,
            z: self.z.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

/// Gluing map across the wall `Im z_k = 0`, to the neighboring chart along `k`:
/// `z'_k = -z_k`, `z'_i = z_i + [-sgn(z_k) eps_ik]_+ z_k`.
pub fn glue(zc: &CentralCharge, p: &ExchangePattern, k: usize) -> Result<CentralCharge> {
    let v = p.vertex(zc.chart)?;
    v.eps.check_index(k)?;
    let zk = zc.z[k];
    if zk.im != 0.0 || zk.re == 0.0 {
        return Err(Error::GluingDomain(format!("z_{k} = {zk}")));
    }
    let s = zk.re.signum() as i64;
    let mut z = zc.z.clone();
    for (i, zi) in z.iter_mut().enumerate() {
        if i != k {
            let c = (-s * v.eps.get(i, k)).max(0);
            *zi += zk * c as f64;
        }
    }
    z[k] = -zk;
    CentralCharge::new(p.mutation_neighbor(zc.chart, k)?, z)
        .map_err(|e| Error::GluingDomain(e.to_string()))
}

/// `z ↦ Re z + t Im z + i Im z`, componentwise.
pub fn horocycle_flow(zc: &CentralCharge, t: f64) -> CentralCharge {
    CentralCharge {
        chart: zc.chart,
        z: zc
            .z
            .iter()
            .map(|c| Complex64::new(c.re + t * c.im, c.im))
            .collect(),
    }
}

/// `z_i = log X_i^(v)(g) + i x_i^(v)(L)`, in the chart `v` of the cone
/// containing `L` in its interior.
pub fn lift(p: &ExchangePattern, g: &PositivePoint, l: &TropicalPoint) -> Result<CentralCharge> {
    let loc = locate_cone(l, p, DEFAULT_TOL)?;
    if let Some(i) = loc.coords.iter().position(|&x| x <= DEFAULT_TOL) {
        return Err(Error::OnBoundary {
            chart: loc.vertex,
            index: i,
            value: loc.coords[i],
        });
    }
    let logs = g.logs_in(p, loc.vertex)?;
    CentralCharge::new(
        loc.vertex,
        logs.iter()
            .zip(&loc.coords)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect(),
    )
}

/// `max_i |lift(E(g, tL), L)_i - h_t(lift(g, L))_i|`.
pub fn conjugacy_residual(
    p: &ExchangePattern,
    g: &PositivePoint,
    l: &TropicalPoint,
    t: f64,
) -> Result<f64> {
    let moved = quake(p, g, &scale(l, t)?)?.g;
    let lhs = lift(p, &moved, l)?;
    let rhs = horocycle_flow(&lift(p, g, l)?, t);
    Ok(lhs.max_distance(&rhs))
}

/// `max_i |glue(h_t Z)_i - h_t(glue Z)_i|` for `Z` with `z_k` real.
pub fn gluing_flow_residual(
    zc: &CentralCharge,
    p: &ExchangePattern,
    k: usize,
    t: f64,
) -> Result<f64> {
    let a = glue(&horocycle_flow(zc, t), p, k)?;
    let b = horocycle_flow(&glue(zc, p, k)?, t);
    Ok(a.max_distance(&b))
}
