//! Contact–connection–constraint graph and graph-guided chromosome
//! initialization.
//!
//! Chromosomes are grown from the outside in: each step picks a removable
//! part (preferring fasteners, and parts far from the base), records it as
//! the next removal, and deletes it from a working copy of the graph. The
//! stored array is the reverse of the pick order, so index 0 holds the part
//! removed last.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AssemblyModel, PartId, PartKind};
use crate::par::Execution;

/// Fresh RNG streams tried per chromosome after the first stalled build.
pub const RETRY_BUDGET: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InitError {
    #[error("n_genes must be at least 1")]
    NoGenes,
    #[error("chromosome {chromosome}: no admissible part after {attempts} attempts ({remaining} parts left)")]
    InitializationStalled {
        chromosome: usize,
        attempts: usize,
        remaining: usize,
    },
}

/// Permutation of the removable parts. Index 0 is the part removed last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequenceChromosome(pub Vec<PartId>);

impl SequenceChromosome {
    pub fn from_removal_order(mut removal: Vec<PartId>) -> Self {
        removal.reverse();
        Self(removal)
    }

    /// Parts in the order they come off the assembly.
    pub fn removal_order(&self) -> Vec<PartId> {
        self.0.iter().rev().copied().collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the genes are exactly the model's removable parts.
    pub fn is_permutation_of(&self, model: &AssemblyModel) -> bool {
        let mut genes = self.0.clone();
        genes.sort();
        genes == model.removable_parts()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Contact,
    Connection,
    Constraint,
}

/// A typed edge. Contact and connection links are undirected and reported
/// with `a < b`; constraint links point from blocker to blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Link {
    pub a: PartId,
    pub b: PartId,
    pub kind: LinkKind,
}

/// Nodes still present plus the relations among them.
#[derive(Debug, Clone)]
pub struct CccGraph {
    base: PartId,
    alive: Vec<bool>,
    kinds: Vec<PartKind>,
    skeleton: Vec<Vec<usize>>,
    contact: Vec<Vec<usize>>,
    connection: Vec<Vec<usize>>,
    constraint_out: Vec<Vec<usize>>,
    constraint_in: Vec<Vec<usize>>,
}

/// Hop-distance layering around the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceLayers {
    /// Nodes with no skeleton path to the base.
    pub unreachable: Vec<PartId>,
    /// Reachable non-base nodes grouped by distance, farthest first.
    pub far_to_near: Vec<Vec<PartId>>,
}

impl DistanceLayers {
    /// Candidate layers in preference order: unreachable first (when
    /// nonempty), then farthest to nearest.
    pub fn ordered(&self) -> Vec<&[PartId]> {
        let mut out: Vec<&[PartId]> = Vec::with_capacity(self.far_to_near.len() + 1);
        if !self.unreachable.is_empty() {
            out.push(&self.unreachable);
        }
        out.extend(self.far_to_near.iter().map(Vec::as_slice));
        out
    }
}

impl CccGraph {
    pub fn build(model: &AssemblyModel) -> Self {
        let n = model.eta();
        let rel = model.relations();
        let mut skeleton = vec![Vec::new(); n];
        let mut contact = vec![Vec::new(); n];
        let mut connection = vec![Vec::new(); n];
        let mut constraint_out = vec![Vec::new(); n];
        let mut constraint_in = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                if rel.contact.get(u, v) || rel.connection.get(u, v) {
                    skeleton[u].push(v);
                }
                if rel.contact.get(u, v) {
                    contact[u].push(v);
                }
                if rel.connection.get(u, v) {
                    connection[u].push(v);
                }
                if rel.constraint.get(u, v) {
                    constraint_out[u].push(v);
                    constraint_in[v].push(u);
                }
            }
        }
        Self {
            base: model.base(),
            alive: vec![true; n],
            kinds: model.parts().iter().map(|p| p.label.kind).collect(),
            skeleton,
            contact,
            connection,
            constraint_out,
            constraint_in,
        }
    }

    #[inline]
    pub fn base(&self) -> PartId {
        self.base
    }

    #[inline]
    pub fn contains(&self, id: PartId) -> bool {
        self.alive[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = PartId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| PartId::from_index(i))
    }

    pub fn node_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    /// All links among present nodes, sorted.
    pub fn links(&self) -> Vec<Link> {
        let mut out = Vec::new();
        let n = self.alive.len();
        for u in (0..n).filter(|&u| self.alive[u]) {
            for &v in &self.connection[u] {
                if u < v && self.alive[v] {
                    out.push(self.link(u, v, LinkKind::Connection));
                }
            }
            for &v in &self.contact[u] {
                if u < v && self.alive[v] {
                    out.push(self.link(u, v, LinkKind::Contact));
                }
            }
            for &v in &self.constraint_out[u] {
                if self.alive[v] {
                    out.push(self.link(u, v, LinkKind::Constraint));
                }
            }
        }
        out.sort();
        out
    }

    fn link(&self, u: usize, v: usize, kind: LinkKind) -> Link {
        Link {
            a: PartId::from_index(u),
            b: PartId::from_index(v),
            kind,
        }
    }

    /// Deletes a node together with its incident links.
    pub fn remove(&mut self, id: PartId) {
        self.alive[id.index()] = false;
    }

    /// Breadth-first hop distances over contact and connection links.
    /// Constraint links carry precedence, not adjacency, and are ignored.
    pub fn distance_layers(&self) -> DistanceLayers {
        let n = self.alive.len();
        let b = self.base.index();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        dist[b] = 0;
        queue.push_back(b);
        while let Some(u) = queue.pop_front() {
            for &v in &self.skeleton[u] {
                if self.alive[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut unreachable = Vec::new();
        let max = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
        let mut by_distance = vec![Vec::new(); max + 1];
        for u in (0..n).filter(|&u| self.alive[u] && u != b) {
            let id = PartId::from_index(u);
            match dist[u] {
                usize::MAX => unreachable.push(id),
                d => by_distance[d].push(id),
            }
        }
        let far_to_near = by_distance.into_iter().skip(1).rev().filter(|l| !l.is_empty()).collect();
        DistanceLayers {
            unreachable,
            far_to_near,
        }
    }

    /// Present non-base nodes with no incoming constraint link.
    pub fn constraint_free(&self) -> BTreeSet<PartId> {
        self.nodes()
            .filter(|&id| id != self.base)
            .filter(|&id| !self.constraint_in[id.index()].iter().any(|&u| self.alive[u]))
            .collect()
    }

    /// Members of `layer` with at least one removal direction that is not
    /// obstructed by any other present node.
    pub fn collision_free(&self, layer: &[PartId], model: &AssemblyModel) -> Vec<PartId> {
        layer
            .iter()
            .copied()
            .filter(|&u| self.has_free_direction(u, model))
            .collect()
    }

    pub(crate) fn has_free_direction(&self, u: PartId, model: &AssemblyModel) -> bool {
        let rel = model.relations();
        model
            .part(u)
            .geometry
            .removal_directions
            .iter()
            .any(|&d| rel.blockers(u, d).iter().all(|&v| v == u || !self.alive[v.index()]))
    }

    /// Present fasteners joined to `id` by a connection link.
    pub fn fasteners_of(&self, id: PartId) -> Vec<PartId> {
        self.connection[id.index()]
            .iter()
            .copied()
            .filter(|&v| self.alive[v] && self.kinds[v].is_fastener())
            .map(PartId::from_index)
            .collect()
    }

    pub fn has_fasteners(&self, id: PartId) -> bool {
        self.connection[id.index()]
            .iter()
            .any(|&v| self.alive[v] && self.kinds[v].is_fastener())
    }

    fn has_connections(&self, id: PartId) -> bool {
        self.connection[id.index()].iter().any(|&v| self.alive[v])
    }

    /// Graphviz rendering with a `kind` attribute per node and a `tag`
    /// attribute per edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ccc {\n");
        for id in self.nodes() {
            let kind = format!("{:?}", self.kinds[id.index()]).to_lowercase();
            let _ = writeln!(out, "  {} [label=\"{id}\", kind=\"{kind}\"];", id.0);
        }
        for link in self.links() {
            let (tag, extra) = match link.kind {
                LinkKind::Contact => ("contact", ", dir=none"),
                LinkKind::Connection => ("connection", ", dir=none, style=dashed"),
                LinkKind::Constraint => ("constraint", ", color=red"),
            };
            let _ = writeln!(out, "  {} -> {} [tag=\"{tag}\"{extra}];", link.a.0, link.b.0);
        }
        out.push_str("}\n");
        out
    }
}

/// Generates `n_genes` chromosomes. Chromosome `l` draws from its own RNG
/// stream, so the population is independent of how the work is scheduled.
pub fn initialize_population(
    model: &AssemblyModel,
    n_genes: usize,
    rng_seed: u64,
) -> Result<Vec<SequenceChromosome>, InitError> {
    initialize_population_with(model, n_genes, rng_seed, Execution::default())
}

pub fn initialize_population_with(
    model: &AssemblyModel,
    n_genes: usize,
    rng_seed: u64,
    exec: Execution,
) -> Result<Vec<SequenceChromosome>, InitError> {
    if n_genes == 0 {
        return Err(InitError::NoGenes);
    }
    let graph = CccGraph::build(model);
    exec.map_range(n_genes, |l| build_with_retries(model, &graph, rng_seed, l))
        .into_iter()
        .collect()
}

/// Like [`initialize_population_with`], but reports each chromosome on its
/// own so one stalled build does not hide the others.
pub fn try_initialize_population(
    model: &AssemblyModel,
    n_genes: usize,
    rng_seed: u64,
    exec: Execution,
) -> Vec<Result<SequenceChromosome, InitError>> {
    let graph = CccGraph::build(model);
    exec.map_range(n_genes, |l| build_with_retries(model, &graph, rng_seed, l))
}

fn build_with_retries(
    model: &AssemblyModel,
    graph: &CccGraph,
    seed: u64,
    chromosome: usize,
) -> Result<SequenceChromosome, InitError> {
    let mut remaining = 0;
    for attempt in 0..=RETRY_BUDGET {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((chromosome as u64) << 8) | attempt as u64);
        match build_chromosome(model, graph.clone(), &mut rng) {
            Ok(c) => return Ok(c),
            Err(left) => remaining = left,
        }
    }
    Err(InitError::InitializationStalled {
        chromosome,
        attempts: RETRY_BUDGET + 1,
        remaining,
    })
}

/// One pass of the layered pick loop. On a stall returns the number of
/// parts that could not be placed.
pub fn build_chromosome(
    model: &AssemblyModel,
    mut work: CccGraph,
    rng: &mut ChaCha8Rng,
) -> Result<SequenceChromosome, usize> {
    let base = work.base();
    let mut removal = Vec::with_capacity(model.eta() - 1);
    while work.node_count() > 1 {
        let layers = work.distance_layers();
        let free = work.constraint_free();
        let mut placed = None;
        for layer in layers.ordered() {
            let admissible: Vec<PartId> = work
                .collision_free(layer, model)
                .into_iter()
                .filter(|id| free.contains(id))
                .collect();
            if admissible.is_empty() {
                continue;
            }
            let fasteners: Vec<PartId> = admissible.iter().copied().filter(|&id| model.is_fastener(id)).collect();
            let candidates = if fasteners.is_empty() {
                admissible
                    .iter()
                    .copied()
                    .filter(|&id| model.part(id).label.kind == PartKind::Regular && !work.has_connections(id))
                    .collect()
            } else {
                fasteners
            };
            let Some(&pick) = candidates.choose(rng) else {
                continue;
            };
            let pick = if !model.is_fastener(pick) && work.has_fasteners(pick) {
                *work.fasteners_of(pick).choose(rng).expect("has_fasteners checked")
            } else {
                pick
            };
            placed = Some(pick);
            break;
        }
        match placed {
            Some(id) => {
                debug_assert_ne!(id, base);
                removal.push(id);
                work.remove(id);
            }
            None => return Err(work.node_count() - 1),
        }
    }
    Ok(SequenceChromosome::from_removal_order(removal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(xs: &[usize]) -> Vec<PartId> {
        xs.iter().map(|&x| PartId(x)).collect()
    }

    #[test]
    fn fig3_graph_shape() {
        let m = fixtures::fig3();
        let g = CccGraph::build(&m);
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.base(), PartId(6));
        let links = g.links();
        let of = |k| links.iter().filter(|l| l.kind == k).map(|l| (l.a.0, l.b.0)).collect::<Vec<_>>();
        assert_eq!(of(LinkKind::Contact), vec![(5, 6), (6, 7)]);
        assert_eq!(of(LinkKind::Connection).len(), 8);
        assert_eq!(of(LinkKind::Constraint), vec![(5, 1), (5, 2), (5, 7)]);
    }

    #[test]
    fn fig3_layers_and_constraint_free() {
        let m = fixtures::fig3();
        let mut g = CccGraph::build(&m);
        let layers = g.distance_layers();
        assert!(layers.unreachable.is_empty());
        assert_eq!(layers.far_to_near, vec![ids(&[1, 2, 3, 4, 5, 7])]);
        assert_eq!(g.constraint_free().into_iter().collect::<Vec<_>>(), ids(&[3, 4, 5]));
        g.remove(PartId(5));
        assert_eq!(g.constraint_free().into_iter().collect::<Vec<_>>(), ids(&[1, 2, 3, 4, 7]));
    }

    #[test]
    fn fig3_cover_blocks_screw() {
        let m = fixtures::fig3();
        let mut g = CccGraph::build(&m);
        let layer = ids(&[1, 2, 3, 4, 5, 7]);
        let free = g.collision_free(&layer, &m);
        assert!(!free.contains(&PartId(1)));
        assert!(free.contains(&PartId(3)));
        g.remove(PartId(5));
        assert!(g.collision_free(&layer, &m).contains(&PartId(1)));
    }

    #[test]
    fn dot_dump_lists_tags() {
        let dot = CccGraph::build(&fixtures::fig3()).to_dot();
        assert!(dot.contains("tag=\"constraint\""));
        assert!(dot.contains("kind=\"base\""));
    }
}
