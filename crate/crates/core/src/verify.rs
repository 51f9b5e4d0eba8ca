//! Seeded invariant suites over enumerated patterns. Failures are report
//! content, never errors.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::earthquake::{dquake, inverse_quake, limit_g, limit_l, quake, DerivativeMethod};
use crate::error::{Error, Result};
use crate::exchange::{build_cartan_seed, DynkinType, Orientation};
use crate::horocycle::{conjugacy_residual, glue, gluing_flow_residual, CentralCharge};
use crate::matrix::is_unimodular;
use crate::pattern::{
    fan, fc_product, fuGy_check, row_recursion_check, tropical_duality_check, tropical_sign,
    ExchangePattern, Sign, VertexId,
};
use crate::points::{locate_cone, PositivePoint, TropicalPoint, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Matrices,
    Fan,
    Earthquake,
    Derivatives,
    Limits,
    Horocycle,
    All,
}

impl Suite {
    const EACH: [Suite; 6] = [
        Suite::Matrices,
        Suite::Fan,
        Suite::Earthquake,
        Suite::Derivatives,
        Suite::Limits,
        Suite::Horocycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Matrices => "matrices",
            Suite::Fan => "fan",
            Suite::Earthquake => "earthquake",
            Suite::Derivatives => "derivatives",
            Suite::Limits => "limits",
            Suite::Horocycle => "horocycle",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random samples per sampled property.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub target: String,
    pub property: String,
    pub passed: bool,
    pub count: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<11} {:<8} {:<32} n={:<6} max_residual={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.target,
            self.property,
            self.count,
            self.max_residual,
            self.tolerance,
        )?;
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(
            f,
            "{} checks, {} failed, suite={} seed={}",
            self.checks.len(),
            failed,
            self.suite,
            self.seed
        )
    }
}

/// Accumulates one property over many cases.
struct Tally {
    count: usize,
    worst: f64,
    failed: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            count: 0,
            worst: 0.0,
            failed: None,
        }
    }

    fn residual(&mut self, r: f64) {
        self.count += 1;
        if r.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(r);
        }
    }

    fn fail(&mut self, why: impl Into<String>) {
        self.count += 1;
        if self.failed.is_none() {
            self.failed = Some(why.into());
        }
    }

    fn absorb(&mut self, r: Result<f64>) {
        match r {
            Ok(x) => self.residual(x),
            Err(e) => self.fail(e.to_string()),
        }
    }
}

struct Runner<'a> {
    suite: Suite,
    target: &'a str,
    out: &'a mut Vec<CheckResult>,
}

impl Runner<'_> {
    fn push(&mut self, property: &str, t: Tally, tolerance: f64) {
        let passed = t.failed.is_none() && t.worst <= tolerance;
        self.out.push(CheckResult {
            suite: self.suite,
            target: self.target.to_string(),
            property: property.to_string(),
            passed,
            count: t.count,
            max_residual: t.worst,
            tolerance,
            detail: t.failed,
        });
    }
}

/// Runs `suite` on each pattern. The rng is reseeded per (suite, pattern)
/// so single suites reproduce their part of `all`.
pub fn verify(suite: Suite, patterns: &[ExchangePattern], opts: VerifyOptions) -> VerifyReport {
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let mut checks = Vec::new();
    for s in suites {
        for (idx, p) in patterns.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((idx as u64) << 32) ^ s as u64);
            let mut r = Runner {
                suite: s,
                target: &p.type_tag,
                out: &mut checks,
            };
            match s {
                Suite::Matrices => matrices(&mut r, p),
                Suite::Fan => fan_suite(&mut r, p, &mut rng, opts.samples),
                Suite::Earthquake => earthquake(&mut r, p, &mut rng, opts.samples),
                Suite::Derivatives => derivatives(&mut r, p, &mut rng, opts.samples),
                Suite::Limits => limits(&mut r, p),
                Suite::Horocycle => horocycle(&mut r, p, &mut rng, opts.samples),
                Suite::All => unreachable!(),
            }
        }
    }
    VerifyReport {
        suite,
        seed: opts.seed,
        checks,
    }
}

fn max_abs(m: &crate::matrix::IntMatrix) -> f64 {
    m.as_slice().iter().map(|x| x.abs()).max().unwrap_or(0) as f64
}

fn matrices(r: &mut Runner, p: &ExchangePattern) {
    let (mut dual, mut fugy, mut coherent, mut g_int, mut fc) =
        (Tally::new(), Tally::new(), Tally::new(), Tally::new(), Tally::new());
    for v in p.ids() {
        dual.absorb(tropical_duality_check(p, v).map(|x| max_abs(&x.residual)));
        fugy.absorb(fuGy_check(p, v).map(|x| max_abs(&x.residual)));
        for k in 0..p.rank() {
            match tropical_sign(p, v, k) {
                Ok(_) => coherent.residual(0.0),
                Err(e) => coherent.fail(e.to_string()),
            }
        }
        let vert = &p.vertices[v.0];
        match vert.c.dual_conjugate(vert.eps.symmetrizer()) {
            Some(_) => g_int.residual(0.0),
            None => g_int.fail(format!("D C^-T D^-1 not integral at {v}")),
        }
        for sign in [Sign::Plus, Sign::Minus] {
            fc.absorb(fc_product(p, v, sign).map(|x| {
                x.product.as_slice().iter().copied().max().unwrap_or(0).max(0) as f64
            }));
        }
    }
    let mut rec = Tally::new();
    let bad = row_recursion_check(p);
    rec.count = p.mutation_edges().count();
    if let Some((a, k, b)) = bad.first() {
        rec.fail(format!("{} bad edges, first {a} -{k}- {b}", bad.len()));
    }
    r.push("tropical duality", dual, 0.0);
    r.push("FuGy identity", fugy, 0.0);
    r.push("sign coherence", coherent, 0.0);
    r.push("G integrality", g_int, 0.0);
    r.push("C row recursion", rec, 0.0);
    r.push("F.C non-positivity", fc, 0.0);
}

/// Number of maximal cones of the finite-type cluster complex.
pub fn expected_cone_count(ty: &DynkinType) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    ty.components()
        .iter()
        .map(|&(fam, n)| {
            let n = n as u64;
            match fam {
                'A' => binom(2 * n + 2, n + 1) / (n + 2),
                'B' | 'C' => binom(2 * n, n),
                'D' => (3 * n - 2) * binom(2 * n - 2, n - 1) / n,
                'E' => match n {
                    6 => 833,
                    7 => 4160,
                    _ => 25080,
                },
                'F' => 105,
                _ => 8,
            }
        })
        .product()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

fn fan_suite(r: &mut Runner, p: &ExchangePattern, rng: &mut ChaCha8Rng, samples: usize) {
    let cones = fan(p);
    if let Ok(ty) = p.type_tag.parse::<DynkinType>() {
        let mut count = Tally::new();
        let expected = expected_cone_count(&ty);
        count.residual(0.0);
        if cones.len() as u64 != expected {
            count.fail(format!("{} cones, expected {expected}", cones.len()));
        }
        r.push("maximal cone count", count, 0.0);
    }
    let mut uni = Tally::new();
    for c in &cones {
        if is_unimodular(&c.generators) {
            uni.residual(0.0);
        } else {
            uni.fail(format!("cone of {} is not unimodular", c.vertex_id));
        }
    }
    r.push("unimodular cones", uni, 0.0);

    let (mut complete, mut disjoint) = (Tally::new(), Tally::new());
    for _ in 0..samples {
        let x = random_vec(rng, p.rank(), 10.0);
        match TropicalPoint::new(p.base, x.clone()).and_then(|l| locate_cone(&l, p, DEFAULT_TOL)) {
            Ok(_) => complete.residual(0.0),
            Err(e) => complete.fail(format!("{x:?}: {e}")),
        }
        let inside = cones
            .iter()
            .filter(|c| {
                p.vertices[c.vertex_id.0]
                    .cone_inverse
                    .apply(&x)
                    .iter()
                    .all(|&y| y > DEFAULT_TOL)
            })
            .count();
        if inside > 1 {
            disjoint.fail(format!("{x:?} is interior to {inside} cones"));
        } else {
            disjoint.residual(0.0);
        }
    }
    r.push("fan completeness", complete, 0.0);
    r.push("cone interiors disjoint", disjoint, 0.0);
}

fn earthquake(r: &mut Runner, p: &ExchangePattern, rng: &mut ChaCha8Rng, samples: usize) {
    let n = p.rank();
    let mut round = Tally::new();
    for _ in 0..samples {
        let g0 = random_vec(rng, n, 2.0);
        let x = random_vec(rng, n, 5.0);
        round.absorb((|| {
            let g0 = PositivePoint::from_logs(p.base, &g0)?;
            let l = TropicalPoint::new(p.base, x.clone())?;
            let g = quake(p, &g0, &l)?.g;
            let back = inverse_quake(p, &g0, &g, DEFAULT_TOL)?;
            Ok(back
                .x
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })());
    }
    r.push("inverse round trip", round, 1e-9);
}

/// Known tangent images at `log X(g) = 0`: `(l_k, xi_k)`.
fn tangent_table(ty: &str) -> &'static [([f64; 2], [f64; 2])] {
    match ty {
        "A1xA1" => &[
            ([1.0, 0.0], [1.0, 0.0]),
            ([0.0, 1.0], [0.0, 1.0]),
            ([-1.0, 0.0], [-1.0, 0.0]),
            ([0.0, -1.0], [0.0, -1.0]),
        ],
        "A2" => &[
            ([1.0, 0.0], [1.0, 0.0]),
            ([0.0, 1.0], [0.0, 1.0]),
            ([-1.0, 0.0], [-1.0, 0.5]),
            ([0.0, -1.0], [-2.0 / 3.0, -2.0 / 3.0]),
            ([1.0, -1.0], [0.5, -1.0]),
        ],
        "B2" => &[
            ([1.0, 0.0], [1.0, 0.0]),
            ([0.0, 1.0], [0.0, 1.0]),
            ([-1.0, 0.0], [-1.0, 1.0]),
            ([0.0, -1.0], [-0.8, -0.2]),
            ([1.0, -2.0], [-1.0 / 3.0, -4.0 / 3.0]),
            ([1.0, -1.0], [0.5, -1.0]),
        ],
        "G2" => &[
            ([1.0, 0.0], [1.0, 0.0]),
            ([0.0, 1.0], [0.0, 1.0]),
            ([-1.0, 0.0], [-1.0, 1.5]),
            ([0.0, -1.0], [-8.0 / 9.0, 1.0 / 3.0]),
            ([1.0, -3.0], [-1.4, -0.6]),
            ([1.0, -2.0], [-0.5, -13.0 / 14.0]),
            ([2.0, -3.0], [0.0, -2.0]),
            ([1.0, -1.0], [0.5, -1.0]),
        ],
        _ => &[],
    }
}

fn is_linear_seed(p: &ExchangePattern, ty: &str) -> bool {
    ty.parse::<DynkinType>()
        .and_then(|t| build_cartan_seed(&t, Orientation::Linear))
        .map(|e| &e == p.initial())
        .unwrap_or(false)
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn derivatives(r: &mut Runner, p: &ExchangePattern, rng: &mut ChaCha8Rng, samples: usize) {
    let n = p.rank();
    let table = tangent_table(&p.type_tag);
    if !table.is_empty() && is_linear_seed(p, &p.type_tag) {
        for (method, name) in [
            (DerivativeMethod::Analytic, "tangent table (analytic)"),
            (DerivativeMethod::FiniteDifference, "tangent table (fd)"),
        ] {
            let mut t = Tally::new();
            for (l, xi) in table {
                t.absorb((|| {
                    let g = PositivePoint::from_logs(p.base, &[0.0, 0.0])?;
                    let d = dquake(p, &g, &TropicalPoint::new(p.base, l.to_vec())?, method)?;
                    Ok(diff(&d.delta, xi))
                })());
            }
            r.push(name, t, 1e-6);
        }
    }
    let mut t = Tally::new();
    for _ in 0..samples {
        let g = random_vec(rng, n, 2.0);
        let x = random_vec(rng, n, 3.0);
        t.absorb((|| {
            let g = PositivePoint::from_logs(p.base, &g)?;
            let l = TropicalPoint::new(p.base, x.clone())?;
            let a = dquake(p, &g, &l, DerivativeMethod::Analytic)?;
            let f = dquake(p, &g, &l, DerivativeMethod::FiniteDifference)?;
            Ok(diff(&a.delta, &f.delta))
        })());
    }
    r.push("analytic vs finite difference", t, 1e-6);
}

pub const LIMIT_T: [f64; 3] = [10.0, 100.0, 1000.0];

fn limits(r: &mut Runner, p: &ExchangePattern) {
    let n = p.rank();
    let (mut at_max, mut mono) = (Tally::new(), Tally::new());
    for c in fan(p) {
        for k in 0..n {
            let errs: Result<Vec<f64>> = LIMIT_T
                .iter()
                .map(|&t| {
                    let g0 = PositivePoint::from_logs(p.base, &vec![0.0; n])?;
                    Ok(limit_l(p, &g0, c.vertex_id, k, t)?.error)
                })
                .collect();
            match errs {
                Ok(e) => {
                    at_max.residual(e[2]);
                    let increases = e.windows(2).any(|w| w[1] > w[0]);
                    if increases {
                        mono.fail(format!("{} k={k}: errors {e:?}", c.vertex_id));
                    } else {
                        mono.residual(0.0);
                    }
                }
                Err(e) => at_max.fail(e.to_string()),
            }
        }
    }
    r.push("limit L at t=1e3", at_max, 1e-2);
    r.push("limit L error monotone in t", mono, 0.0);

    let (mut at30, mut shrink) = (Tally::new(), Tally::new());
    for c in fan(p) {
        let err = |m: f64| -> Result<f64> {
            let g = PositivePoint::from_logs(p.base, &vec![m; n])?;
            Ok(limit_g(p, &g, c.vertex_id)?.error)
        };
        match (err(10.0), err(30.0)) {
            (Ok(e10), Ok(e30)) => {
                at30.residual(e30);
                if e30 < e10 || e10 == 0.0 && e30 == 0.0 {
                    shrink.residual(0.0);
                } else {
                    shrink.fail(format!("{}: {e30} at M=30, {e10} at M=10", c.vertex_id));
                }
            }
            (Err(e), _) | (_, Err(e)) => at30.fail(e.to_string()),
        }
    }
    r.push("limit g at M=30", at30, 1e-3);
    r.push("limit g error shrinks in M", shrink, 0.0);
}

fn horocycle(r: &mut Runner, p: &ExchangePattern, rng: &mut ChaCha8Rng, samples: usize) {
    let n = p.rank();
    let mut conj = Tally::new();
    let mut attempts = 0;
    while conj.count < samples && attempts < 10 * samples {
        attempts += 1;
        let g = random_vec(rng, n, 2.0);
        let x = random_vec(rng, n, 4.0);
        let t = rng.gen_range(0.01..5.0);
        let res = PositivePoint::from_logs(p.base, &g)
            .and_then(|g| Ok((g, TropicalPoint::new(p.base, x.clone())?)))
            .and_then(|(g, l)| conjugacy_residual(p, &g, &l, t));
        match res {
            Err(Error::OnBoundary { .. }) => continue,
            other => conj.absorb(other),
        }
    }
    r.push("horocycle conjugacy", conj, 1e-10);

    let (mut compat, mut invol) = (Tally::new(), Tally::new());
    for _ in 0..samples {
        let v = VertexId(rng.gen_range(0..p.len()));
        let k = rng.gen_range(0..n);
        let mut z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0)))
            .collect();
        let re: f64 = rng.gen_range(0.1..3.0);
        z[k] = Complex64::new(if rng.gen_bool(0.5) { re } else { -re }, 0.0);
        let t = rng.gen_range(-5.0..5.0);
        let zc = match CentralCharge::new(v, z) {
            Ok(z) => z,
            Err(e) => {
                compat.fail(e.to_string());
                continue;
            }
        };
        compat.absorb(gluing_flow_residual(&zc, p, k, t));
        invol.absorb(
            glue(&zc, p, k)
                .and_then(|w| glue(&w, p, k))
                .map(|w| w.max_distance(&zc)),
        );
    }
    r.push("gluing commutes with flow", compat, 1e-12);
    r.push("gluing is an involution", invol, 1e-12);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{enumerate_type, EnumerateOptions};

    fn pat(ty: &str) -> ExchangePattern {
        enumerate_type(&ty.parse().unwrap(), Orientation::Linear, EnumerateOptions::default()).unwrap()
    }

    #[test]
    fn cone_count_formula() {
        for (ty, n) in [("A2", 5), ("B2", 6), ("G2", 8), ("A3", 14), ("B3", 20), ("C3", 20), ("D4", 50), ("A1xA2", 10), ("F4", 105)] {
            assert_eq!(expected_cone_count(&ty.parse().unwrap()), n, "{ty}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.iter().chain(&[Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn all_suites_pass_on_a2() {
        let report = verify(Suite::All, &[pat("A2")], VerifyOptions { seed: 7, samples: 40 });
        assert!(report.passed(), "{report}");
        assert!(report.checks.len() >= 15);
    }

    #[test]
    fn same_seed_same_report() {
        let ps = [pat("B2")];
        let opts = VerifyOptions { seed: 3, samples: 20 };
        let a = serde_json::to_string(&verify(Suite::Earthquake, &ps, opts)).unwrap();
        let b = serde_json::to_string(&verify(Suite::Earthquake, &ps, opts)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derivative_tables_for_rank_two() {
        for ty in ["A1xA1", "B2", "G2"] {
            let report = verify(Suite::Derivatives, &[pat(ty)], VerifyOptions { seed: 1, samples: 10 });
            assert!(report.passed(), "{report}");
            assert!(report.checks.iter().any(|c| c.property.starts_with("tangent table")));
        }
    }
}
