use std::collections::HashSet;

use serde::Serialize;

use super::{ExchangePattern, VertexId};
use crate::matrix::IntMatrix;

/// A maximal cone of the Fock-Goncharov fan, in base-chart coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    pub vertex_id: VertexId,
    /// Generators as columns.
    pub generators: IntMatrix,
}

impl Cone {
    pub fn generator(&self, k: usize) -> Vec<i64> {
        self.generators.column(k)
    }

    fn key(&self) -> Vec<Vec<i64>> {
        let mut cols = self.generators.columns();
        cols.sort();
        cols
    }
}

/// One cone per seed; relabeled copies are dropped, keeping the smallest id.
pub fn fan(p: &ExchangePattern) -> Vec<Cone> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for v in &p.vertices {
        let cone = Cone {
            vertex_id: v.id,
            generators: v.cone.clone(),
        };
        if seen.insert(cone.key()) {
            out.push(cone);
        }
    }
    out
}
