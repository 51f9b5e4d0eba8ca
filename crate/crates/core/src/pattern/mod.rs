//! Labeled exchange graphs of finite mutation classes.
//!
//! Vertices are labeled seeds, identified by the pair (exchange matrix,
//! C-matrix from the base vertex). Each vertex carries its C-, G- and
//! F-data and the generators of its cone in the Fock-Goncharov fan.

mod fan;
mod identities;
mod walk;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{build_cartan_seed, DynkinType, ExchangeMatrix, Orientation};
use crate::fpoly::{f_matrix, FMatrix, FPolynomial};
use crate::matrix::IntMatrix;

pub use fan::{fan, Cone};
pub use identities::{
    c_from_base, c_from_base_opposite, c_to_base, c_to_base_opposite, f_matrix_to_base,
    fc_product, fuGy_check, limit_target, row_recursion_check, tropical_duality_check,
    tropical_sign, FcReport, IdentityReport, Sign,
};
pub use walk::{c_row_recursion, invert_path, SeedWalk, Step};

pub const DEFAULT_CAP: usize = 50_000;

/// Vertex budget: `CLUSTER_QUAKE_CAP` if set, otherwise [`DEFAULT_CAP`].
pub fn default_cap() -> usize {
    std::env::var("CLUSTER_QUAKE_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&c| c >= 1)
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternVertex {
    pub id: VertexId,
    pub eps: ExchangeMatrix,
    /// `C^s_{v0 -> v}`.
    #[serde(rename = "C")]
    pub c: IntMatrix,
    #[serde(rename = "G")]
    pub g: IntMatrix,
    #[serde(rename = "F")]
    pub fs: Vec<FPolynomial>,
    #[serde(rename = "Fmat")]
    pub f_matrix: FMatrix,
    #[serde(skip)]
    pub parent: Option<(VertexId, Step)>,
    pub depth: usize,
    #[serde(skip)]
    pub mutation_neighbors: Vec<VertexId>,
    /// `C^s_{v -> v0}`: its columns generate the cone of `v` in the base chart.
    #[serde(rename = "cone")]
    pub cone: IntMatrix,
    /// Inverse of `cone`, mapping base coordinates to chart-`v` coordinates
    /// on the cone.
    #[serde(skip)]
    pub cone_inverse: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    #[serde(flatten)]
    pub step: Step,
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerateOptions {
    pub cap: usize,
    pub include_permutations: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            cap: default_cap(),
            include_permutations: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangePattern {
    pub type_tag: String,
    pub base: VertexId,
    pub vertices: Vec<PatternVertex>,
    pub edges: Vec<Edge>,
}

impl ExchangePattern {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.initial().rank()
    }

    pub fn initial(&self) -> &ExchangeMatrix {
        &self.vertices[self.base.0].eps
    }

    pub fn vertex(&self, id: VertexId) -> Result<&PatternVertex> {
        self.vertices.get(id.0).ok_or(Error::UnknownVertex(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().map(|v| v.id)
    }

    pub fn mutation_neighbor(&self, id: VertexId, k: usize) -> Result<VertexId> {
        let v = self.vertex(id)?;
        v.mutation_neighbors
            .get(k)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: k,
                rank: self.rank(),
            })
    }

    /// Steps from the base vertex to `id` along the BFS tree.
    pub fn path(&self, id: VertexId) -> Result<Vec<Step>> {
        let mut steps = Vec::new();
        let mut cur = self.vertex(id)?;
        while let Some((parent, step)) = &cur.parent {
            steps.push(step.clone());
            cur = self.vertex(*parent)?;
        }
        steps.reverse();
        Ok(steps)
    }

    /// Steps from `from` to `to`, through the base vertex.
    pub fn path_between(&self, from: VertexId, to: VertexId) -> Result<Vec<Step>> {
        if from == to {
            self.vertex(from)?;
            return Ok(Vec::new());
        }
        let mut steps = invert_path(&self.path(from)?);
        steps.extend(self.path(to)?);
        Ok(steps)
    }

    /// Vertex ids in an order where each parent precedes its children.
    pub fn tree_order(&self) -> impl Iterator<Item = &PatternVertex> {
        // BFS assigns ids in discovery order.
        self.vertices.iter()
    }

    pub fn mutation_edges(&self) -> impl Iterator<Item = (VertexId, usize, VertexId)> + '_ {
        self.edges.iter().filter_map(|e| match e.step {
            Step::Mutation { k } => Some((e.from, k, e.to)),
            Step::Permutation { .. } => None,
        })
    }
}

/// Breadth-first enumeration of the labeled exchange graph of `eps0`.
pub fn enumerate(eps0: &ExchangeMatrix, options: EnumerateOptions) -> Result<ExchangePattern> {
    enumerate_tagged(eps0, options, "custom".into())
}

pub fn enumerate_type(
    ty: &DynkinType,
    orientation: Orientation,
    options: EnumerateOptions,
) -> Result<ExchangePattern> {
    let eps0 = build_cartan_seed(ty, orientation)?;
    enumerate_tagged(&eps0, options, ty.to_string())
}

struct Raw {
    walk: SeedWalk,
    parent: Option<(VertexId, Step)>,
    depth: usize,
    neighbors: Vec<Option<VertexId>>,
}

fn enumerate_tagged(
    eps0: &ExchangeMatrix,
    options: EnumerateOptions,
    type_tag: String,
) -> Result<ExchangePattern> {
    if options.cap == 0 {
        return Err(Error::Precondition("vertex budget must be at least 1".into()));
    }
    let n = eps0.rank();
    let transpositions = if options.include_permutations {
        eps0.admissible_transpositions()
    } else {
        Vec::new()
    };

    let mut raws: Vec<Raw> = Vec::new();
    let mut index: HashMap<(ExchangeMatrix, IntMatrix), VertexId> = HashMap::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();

    let start = SeedWalk::start(eps0.clone());
    index.insert((start.eps.clone(), start.c.clone()), VertexId(0));
    raws.push(Raw {
        walk: start,
        parent: None,
        depth: 0,
        neighbors: vec![None; n],
    });
    queue.push_back(VertexId(0));

    while let Some(v) = queue.pop_front() {
        let steps = (0..n)
            .map(Step::mutation)
            .chain(transpositions.iter().map(|t| Step::Permutation { sigma: t.clone() }));
        for step in steps {
            let next = raws[v.0].walk.step(&step)?;
            let key = (next.eps.clone(), next.c.clone());
            let w = match index.get(&key) {
                Some(&w) => w,
                None => {
                    if raws.len() >= options.cap {
                        let partial = finish(raws, edges, type_tag, false)?;
                        return Err(Error::CapExceeded {
                            cap: options.cap,
                            partial: Box::new(partial),
                        });
                    }
                    let w = VertexId(raws.len());
                    index.insert(key, w);
                    raws.push(Raw {
                        walk: next,
                        parent: Some((v, step.clone())),
                        depth: raws[v.0].depth + 1,
                        neighbors: vec![None; n],
                    });
                    queue.push_back(w);
                    w
                }
            };
            if let Step::Mutation { k } = step {
                raws[v.0].neighbors[k] = Some(w);
            }
            if v < w {
                edges.push(Edge { from: v, to: w, step });
            }
        }
    }
    finish(raws, edges, type_tag, true)
}

fn finish(
    raws: Vec<Raw>,
    edges: Vec<Edge>,
    type_tag: String,
    complete: bool,
) -> Result<ExchangePattern> {
    let mut vertices: Vec<PatternVertex> = Vec::with_capacity(raws.len());
    for (i, raw) in raws.into_iter().enumerate() {
        let id = VertexId(i);
        let d = raw.walk.eps.symmetrizer().to_vec();
        let g = raw.walk.c.dual_conjugate(&d).ok_or_else(|| {
            Error::Internal(format!("G-matrix of {id} is not integral"))
        })?;
        let fs = raw.walk.fs.expect("enumeration tracks F-polynomials");
        let n = fs.len();
        let mutation_neighbors = if complete {
            raw.neighbors
                .iter()
                .map(|w| w.ok_or_else(|| Error::Internal(format!("{id} lacks a neighbor"))))
                .collect::<Result<Vec<_>>>()?
        } else {
            raw.neighbors.iter().flatten().copied().collect()
        };
        vertices.push(PatternVertex {
            id,
            f_matrix: f_matrix(&fs),
            eps: raw.walk.eps,
            c: raw.walk.c,
            g,
            fs,
            parent: raw.parent,
            depth: raw.depth,
            mutation_neighbors,
            cone: IntMatrix::zeros(n),
            cone_inverse: IntMatrix::zeros(n),
        });
    }
    let mut pattern = ExchangePattern {
        type_tag,
        base: VertexId(0),
        vertices,
        edges,
    };
    attach_cones(&mut pattern)?;
    Ok(pattern)
}

fn attach_cones(pattern: &mut ExchangePattern) -> Result<()> {
    for i in 0..pattern.len() {
        let id = VertexId(i);
        let cone = c_to_base(pattern, id)?;
        let inverse = cone
            .inverse()
            .ok_or_else(|| Error::Internal(format!("cone of {id} is not unimodular")))?;
        pattern.vertices[i].cone = cone;
        pattern.vertices[i].cone_inverse = inverse;
    }
    Ok(())
}

/// The pattern of the opposite class `-s`, with the same vertex ids and edges:
/// vertex `v` here is the vertex `-v` with exchange matrix `-eps^(v)`.
pub fn opposite(pattern: &ExchangePattern) -> Result<ExchangePattern> {
    let n = pattern.rank();
    let start = SeedWalk::start(pattern.initial().negated());
    let mut walks: Vec<SeedWalk> = Vec::with_capacity(pattern.len());
    for v in pattern.tree_order() {
        let w = match &v.parent {
            None => start.clone(),
            Some((p, step)) => walks[p.0].step(step)?,
        };
        if w.eps != v.eps.negated() {
            return Err(Error::Internal(format!(
                "opposite exchange matrix mismatch at {}",
                v.id
            )));
        }
        walks.push(w);
    }
    for e in &pattern.edges {
        let w = walks[e.from.0].step(&e.step)?;
        if w != walks[e.to.0] {
            return Err(Error::Internal(format!(
                "opposite pattern does not close up along {} -> {}",
                e.from, e.to
            )));
        }
    }
    let raws = pattern
        .vertices
        .iter()
        .zip(walks)
        .map(|(v, walk)| Raw {
            walk,
            parent: v.parent.clone(),
            depth: v.depth,
            neighbors: (0..n).map(|k| v.mutation_neighbors.get(k).copied()).collect(),
        })
        .collect();
    finish(
        raws,
        pattern.edges.clone(),
        format!("-({})", pattern.type_tag),
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(ty: &str, perms: bool) -> ExchangePattern {
        enumerate_type(
            &ty.parse().unwrap(),
            Orientation::Linear,
            EnumerateOptions {
                cap: DEFAULT_CAP,
                include_permutations: perms,
            },
        )
        .unwrap()
    }

    #[test]
    fn vertex_counts() {
        // Without relabelings the labeled exchange graph of A2 is a 10-cycle.
        assert_eq!(pat("A2", false).len(), 10);
        assert_eq!(pat("A2", true).len(), 10);
        assert_eq!(pat("A3", true).len(), 84);
        assert_eq!(pat("A1xA1", false).len(), 4);
    }

    #[test]
    fn every_vertex_has_n_mutation_edges() {
        let p = pat("A3", true);
        let mut degree = vec![0; p.len()];
        for (a, _, b) in p.mutation_edges() {
            degree[a.0] += 1;
            degree[b.0] += 1;
        }
        assert!(degree.iter().all(|&d| d == 3));
        for v in &p.vertices {
            for (k, &w) in v.mutation_neighbors.iter().enumerate() {
                assert_eq!(p.mutation_neighbor(w, k).unwrap(), v.id);
            }
        }
    }

    #[test]
    fn paths_reproduce_vertices() {
        let p = pat("B3", true);
        let start = SeedWalk::start_tropical(p.initial().clone());
        for v in &p.vertices {
            let w = start.walk(&p.path(v.id).unwrap()).unwrap();
            assert_eq!((w.eps, w.c), (v.eps.clone(), v.c.clone()));
            assert_eq!(p.path(v.id).unwrap().len(), v.depth);
        }
    }

    #[test]
    fn cap_exceeded_carries_partial_graph() {
        // Rank-2 affine type: infinitely many seeds.
        let eps = ExchangeMatrix::from_rows(&[vec![0, -2], vec![2, 0]]).unwrap();
        let err = enumerate(
            &eps,
            EnumerateOptions {
                cap: 40,
                include_permutations: false,
            },
        )
        .unwrap_err();
        match err {
            Error::CapExceeded { cap, partial } => {
                assert_eq!(cap, 40);
                assert_eq!(partial.len(), 40);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_cap_rejected() {
        let eps = build_cartan_seed(&"A2".parse().unwrap(), Orientation::Linear).unwrap();
        let r = enumerate(
            &eps,
            EnumerateOptions {
                cap: 0,
                include_permutations: false,
            },
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn opposite_is_an_involution() {
        for ty in ["A2", "B2", "G2", "A3"] {
            let p = pat(ty, true);
            let oo = opposite(&opposite(&p).unwrap()).unwrap();
            for (a, b) in p.vertices.iter().zip(&oo.vertices) {
                assert_eq!((&a.eps, &a.c), (&b.eps, &b.c));
            }
            assert_eq!(fan(&opposite(&p).unwrap()).len(), fan(&p).len());
        }
    }

    #[test]
    fn unknown_vertex() {
        let p = pat("A2", false);
        assert!(matches!(p.vertex(VertexId(99)), Err(Error::UnknownVertex(_))));
    }
}
