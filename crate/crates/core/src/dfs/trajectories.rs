//! Distinct DFS orderings that end at a common node.
//!
//! Every construction cuts the graph along a minimal cut into a *varying* side,
//! whose traversal is re-sampled, and a *suffix* side, whose traversal is held
//! fixed and glued on last. Because the fixed part is visited last, all glued
//! sequences end at the same node.
//!
//! * Bridge `(u, v)`, varying side `G1 ∋ u`, suffix side `G2 ∋ v`:
//!   - [`GlueForm::SuffixRooted`]: `v, dfs(G1 from u), rest of dfs(G2 from v)`.
//!   - [`GlueForm::PrefixRooted`]: `dfs(G1 from u), dfs(G2 from v)`.
//! * Two-edge cut `(a1, b1), (a2, b2)` with `a* ∈ X` and `b* ∈ Y`:
//!   `dfs(X from a1 ending at a2), dfs(Y from b2)`. The end constraint is met
//!   by rejection sampling.
//! * Simple cycle: walk away from a node `v` starting at either neighbor.
//!
//! Glued sequences are re-validated with the DFS replay before they are returned.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sample::{has_branching, random_dfs};
use super::{OrderError, Ordering, TrajectoryPair};
use crate::graph::{ConnectivityClass, CutResult, Edge, Graph};

pub const DEFAULT_REJECTION_BUDGET: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GlueForm {
    /// Start on the suffix side at `v`, cross to `u`, exhaust `G1`, finish `G2`.
    SuffixRooted,
    /// Start at `u`, exhaust `G1`, cross the bridge and traverse `G2` from `v`.
    PrefixRooted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    /// Sampling attempts per cut orientation before it is given up.
    pub rejection_budget: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            rejection_budget: DEFAULT_REJECTION_BUDGET,
        }
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Bridge {
        u: usize,
        v: usize,
        varying: Vec<usize>,
        suffix: Vec<usize>,
        form: GlueForm,
    },
    TwoCut {
        crossing: Vec<Edge>,
        varying: Vec<usize>,
        entry: usize,
        exit: usize,
        suffix: Vec<usize>,
        suffix_root: usize,
    },
    Cycle,
}

fn local_index(map: &[usize], node: usize) -> usize {
    map.iter().position(|&x| x == node).expect("node belongs to the side")
}

/// Random DFS of the induced subgraph on `side`, rooted at `root`, in original indices.
fn side_dfs<R: Rng + ?Sized>(
    sub: &Graph,
    map: &[usize],
    root: usize,
    avoid: Option<usize>,
    rng: &mut R,
) -> Vec<usize> {
    let root = local_index(map, root);
    let avoid = avoid.map(|a| local_index(map, a));
    random_dfs(sub, root, avoid, rng)
        .visit()
        .iter()
        .map(|&i| map[i])
        .collect()
}

fn glue(g: &Graph, seq: Vec<usize>) -> Result<Ordering, OrderError> {
    Ordering::from_sequence(g, &seq)
}

fn cycle_orderings(g: &Graph, end: usize) -> Vec<Ordering> {
    g.neighbors(end)
        .iter()
        .map(|&start| {
            let mut seq = vec![start];
            let mut prev = end;
            let mut cur = start;
            while cur != end {
                let next = g
                    .neighbors(cur)
                    .iter()
                    .copied()
                    .find(|&w| w != prev)
                    .expect("cycle nodes have degree 2");
                prev = cur;
                cur = next;
                seq.push(cur);
            }
            Ordering::from_sequence(g, &seq).expect("walking a cycle is a DFS")
        })
        .collect()
}

impl Plan {
    fn crossing(&self) -> Vec<Edge> {
        match self {
            Plan::Bridge { u, v, .. } => vec![crate::graph::canonical_edge(*u, *v)],
            Plan::TwoCut { crossing, .. } => crossing.clone(),
            Plan::Cycle => Vec::new(),
        }
    }

    /// Up to `want` distinct orderings sharing their last node.
    fn realize<R: Rng + ?Sized>(
        &self,
        g: &Graph,
        want: usize,
        budget: usize,
        rng: &mut R,
    ) -> Result<Vec<Ordering>, OrderError> {
        match self {
            Plan::Bridge {
                u,
                v,
                varying,
                suffix,
                form,
            } => {
                if *form == GlueForm::SuffixRooted && suffix.len() < 2 {
                    return Err(OrderError::DegenerateSuffix);
                }
                let (sub1, map1) = g.induced_subgraph(varying);
                if want > 1 && !has_branching(&sub1, local_index(&map1, *u)) {
                    return Err(OrderError::NoBranching);
                }
                let (sub2, map2) = g.induced_subgraph(suffix);
                let fixed = side_dfs(&sub2, &map2, *v, None, rng);
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                for _ in 0..budget.max(20 * want) {
                    if out.len() == want {
                        break;
                    }
                    let head = side_dfs(&sub1, &map1, *u, None, rng);
                    if !seen.insert(head.clone()) {
                        continue;
                    }
                    let seq = match form {
                        GlueForm::SuffixRooted => {
                            let mut s = vec![*v];
                            s.extend(head);
                            s.extend_from_slice(&fixed[1..]);
                            s
                        }
                        GlueForm::PrefixRooted => {
                            let mut s = head;
                            s.extend_from_slice(&fixed);
                            s
                        }
                    };
                    out.push(glue(g, seq)?);
                }
                Ok(out)
            }
            Plan::TwoCut {
                crossing,
                varying,
                entry,
                exit,
                suffix,
                suffix_root,
            } => {
                let fail = || OrderError::NoEndConstrainedTraversal {
                    cut: crossing.clone(),
                };
                if entry == exit && varying.len() > 1 {
                    return Err(fail());
                }
                let (subx, mapx) = g.induced_subgraph(varying);
                let (suby, mapy) = g.induced_subgraph(suffix);
                let fixed = side_dfs(&suby, &mapy, *suffix_root, None, rng);
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                for _ in 0..budget {
                    if out.len() == want {
                        break;
                    }
                    let head = side_dfs(&subx, &mapx, *entry, Some(*exit), rng);
                    if head.last() != Some(exit) || !seen.insert(head.clone()) {
                        continue;
                    }
                    let mut seq = head;
                    seq.extend_from_slice(&fixed);
                    out.push(glue(g, seq)?);
                }
                if out.len() < want.min(2) {
                    return Err(fail());
                }
                Ok(out)
            }
            Plan::Cycle => {
                let end = rng.gen_range(0..g.node_count());
                let mut out = cycle_orderings(g, end);
                out.truncate(want);
                Ok(out)
            }
        }
    }
}

fn bridge_plans(cut: &CutResult, forms: &[GlueForm]) -> Vec<Plan> {
    let Some(&(a, b)) = cut.crossing_edges.first() else {
        return Vec::new();
    };
    let mut plans = Vec::new();
    for (u, v) in [(a, b), (b, a)] {
        let (varying, suffix) = if cut.side_of(u) == Some(true) {
            (cut.side_a.clone(), cut.side_b.clone())
        } else {
            (cut.side_b.clone(), cut.side_a.clone())
        };
        for &form in forms {
            plans.push(Plan::Bridge {
                u,
                v,
                varying: varying.clone(),
                suffix: suffix.clone(),
                form,
            });
        }
    }
    plans
}

fn two_cut_plans(cut: &CutResult) -> Vec<Plan> {
    let mut plans = Vec::new();
    if cut.crossing_edges.len() != 2 {
        return plans;
    }
    for (x, y, x_is_a) in [
        (&cut.side_a, &cut.side_b, true),
        (&cut.side_b, &cut.side_a, false),
    ] {
        let in_x = |e: Edge| {
            if (cut.side_of(e.0) == Some(true)) == x_is_a {
                (e.0, e.1)
            } else {
                (e.1, e.0)
            }
        };
        for idx in 0..2 {
            let (a1, _b1) = in_x(cut.crossing_edges[idx]);
            let (a2, b2) = in_x(cut.crossing_edges[1 - idx]);
            plans.push(Plan::TwoCut {
                crossing: cut.crossing_edges.clone(),
                varying: x.clone(),
                entry: a1,
                exit: a2,
                suffix: y.clone(),
                suffix_root: b2,
            });
        }
    }
    plans
}

const BOTH_FORMS: [GlueForm; 2] = [GlueForm::SuffixRooted, GlueForm::PrefixRooted];

/// Every construction that applies to `g`, in canonical order.
fn all_plans(g: &Graph) -> Result<Vec<Plan>, OrderError> {
    let cuts = g.enumerate_min_cuts(2)?;
    if cuts.first().is_some_and(|c| c.crossing_edges.len() == 1) {
        return Ok(cuts.iter().flat_map(|c| bridge_plans(c, &BOTH_FORMS)).collect());
    }
    if g.is_cycle() {
        return Ok(vec![Plan::Cycle]);
    }
    Ok(cuts.iter().flat_map(two_cut_plans).collect())
}

fn into_pair(mut orderings: Vec<Ordering>) -> Result<TrajectoryPair, OrderError> {
    if orderings.len() < 2 {
        return Err(OrderError::NoBranching);
    }
    let second = orderings.swap_remove(1);
    let first = orderings.swap_remove(0);
    TrajectoryPair::new(first, second)
}

impl TrajectoryOptions {
    pub fn pair_bridge(
        &self,
        g: &Graph,
        cut: &CutResult,
        u: usize,
        form: GlueForm,
        seed: u64,
    ) -> Result<TrajectoryPair, OrderError> {
        let is_endpoint = cut.crossing_edges.len() == 1
            && (cut.crossing_edges[0].0 == u || cut.crossing_edges[0].1 == u);
        if !is_endpoint {
            return Err(OrderError::NotABridge(u));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = bridge_plans(cut, &[form])
            .into_iter()
            .find(|p| matches!(p, Plan::Bridge { u: pu, .. } if *pu == u))
            .expect("u is an endpoint");
        into_pair(plan.realize(g, 2, self.rejection_budget, &mut rng)?)
    }

    pub fn pair_two_connected(&self, g: &Graph, seed: u64) -> Result<TrajectoryPair, OrderError> {
        if g.is_cycle() {
            return Err(OrderError::CycleSpecialCase);
        }
        if g.edge_connectivity_class()? != ConnectivityClass::TwoEdgeConnected {
            return Err(OrderError::NotTwoEdgeConnected);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plans: Vec<Plan> = g.enumerate_min_cuts(2)?.iter().flat_map(two_cut_plans).collect();
        plans.shuffle(&mut rng);
        let mut last_cut = Vec::new();
        for plan in &plans {
            last_cut = plan.crossing();
            if let Ok(found) = plan.realize(g, 2, self.rejection_budget, &mut rng) {
                if found.len() == 2 {
                    return into_pair(found);
                }
            }
        }
        Err(OrderError::NoEndConstrainedTraversal { cut: last_cut })
    }

    pub fn pair_any(&self, g: &Graph, seed: u64) -> Result<TrajectoryPair, OrderError> {
        g.require_connected()?;
        if g.node_count() < 3 {
            return Err(crate::graph::GraphError::TooSmall {
                needed: 3,
                actual: g.node_count(),
            }
            .into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plans = all_plans(g)?;
        plans.shuffle(&mut rng);
        for plan in &plans {
            if let Ok(found) = plan.realize(g, 2, self.rejection_budget, &mut rng) {
                if found.len() == 2 {
                    return into_pair(found);
                }
            }
        }
        Err(OrderError::NoHeuristicPair)
    }

    pub fn trajectory_set(&self, g: &Graph, count: usize, seed: u64) -> Result<Vec<Ordering>, OrderError> {
        g.require_connected()?;
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plans = all_plans(g)?;
        plans.shuffle(&mut rng);
        for plan in &plans {
            if let Ok(found) = plan.realize(g, count, self.rejection_budget, &mut rng) {
                if found.len() >= count.min(2) {
                    return Ok(found);
                }
            }
        }
        Err(OrderError::NoHeuristicPair)
    }
}

/// Pair from a single-bridge cut; `u` names the endpoint whose side varies.
pub fn common_end_pair_bridge(
    g: &Graph,
    cut: &CutResult,
    u: usize,
    form: GlueForm,
    seed: u64,
) -> Result<TrajectoryPair, OrderError> {
    TrajectoryOptions::default().pair_bridge(g, cut, u, form, seed)
}

/// Pair from a minimal two-edge cut of a 2-edge-connected graph that is not a cycle.
pub fn common_end_pair_two_connected(g: &Graph, seed: u64) -> Result<TrajectoryPair, OrderError> {
    TrajectoryOptions::default().pair_two_connected(g, seed)
}

/// For a simple cycle: the two walks away from a random node `v`, one starting
/// at each neighbor of `v`. Both end at `v`; their roots differ.
pub fn common_end_pair_cycle(g: &Graph, seed: u64) -> Result<TrajectoryPair, OrderError> {
    if !g.is_cycle() {
        return Err(OrderError::NoHeuristicPair);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    into_pair(Plan::Cycle.realize(g, 2, 0, &mut rng)?)
}

/// Tries every applicable construction in random order; the first success wins.
pub fn common_end_pair_any(g: &Graph, seed: u64) -> Result<TrajectoryPair, OrderError> {
    TrajectoryOptions::default().pair_any(g, seed)
}

/// Up to `count` distinct orderings sharing a last node, all built from one
/// randomly chosen eligible cut with a fixed suffix traversal.
pub fn trajectory_set(g: &Graph, count: usize, seed: u64) -> Result<Vec<Ordering>, OrderError> {
    TrajectoryOptions::default().trajectory_set(g, count, seed)
}
