use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::Zero;

use super::{Circuit, CircuitError, NodeId};
use crate::scalar::rational_from_usize;

fn membership(c: &Circuit, restrict: Option<&[NodeId]>) -> Result<Vec<bool>, CircuitError> {
    match restrict {
        None => Ok(vec![true; c.len()]),
        Some(set) => {
            let mut mask = vec![false; c.len()];
            for id in set {
                *mask
                    .get_mut(id.0)
                    .ok_or_else(|| CircuitError::UnknownNode(format!("#{}", id.0)))? = true;
            }
            Ok(mask)
        }
    }
}

/// BFS distances from `from` in the undirected graph underlying `c`,
/// optionally restricted to the induced subgraph on `restrict`.
/// Unreachable nodes (and nodes outside the restriction) map to `None`.
pub fn undirected_distances(
    c: &Circuit,
    from: NodeId,
    restrict: Option<&[NodeId]>,
) -> Result<Vec<Option<usize>>, CircuitError> {
    if from.0 >= c.len() {
        return Err(CircuitError::UnknownNode(format!("#{}", from.0)));
    }
    let allowed = membership(c, restrict)?;
    if !allowed[from.0] {
        return Err(CircuitError::Invalid(format!(
            "source `{}` is outside the restriction",
            c.node(from).name
        )));
    }
    let mut dist = vec![None; c.len()];
    dist[from.0] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v.0].unwrap();
        for &w in c.preds(v).iter().chain(c.succs(v)) {
            if allowed[w.0] && dist[w.0].is_none() {
                dist[w.0] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

/// Number of nodes within undirected distance `radius` of `from`.
pub fn ball_size(
    c: &Circuit,
    from: NodeId,
    radius: usize,
    restrict: Option<&[NodeId]>,
) -> Result<usize, CircuitError> {
    Ok(undirected_distances(c, from, restrict)?
        .iter()
        .filter(|d| d.is_some_and(|d| d <= radius))
        .count())
}

/// Moore bound: the largest possible ball of radius `radius` in a graph of
/// maximum degree `max_degree`.
pub fn ball_radius_bound(max_degree: usize, radius: usize) -> u128 {
    let d = max_degree as u128;
    match max_degree {
        0 => 1,
        1 => if radius == 0 { 1 } else { 2 },
        2 => 1 + 2 * radius as u128,
        _ => {
            let mut total = 1u128;
            let mut layer = d;
            for _ in 0..radius {
                total = total.saturating_add(layer);
                layer = layer.saturating_mul(d - 1);
            }
            total
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDegree {
    pub node: NodeId,
    pub in_degree: usize,
    pub out_degree: usize,
    pub undirected: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeProfile {
    pub max_in: usize,
    pub max_out: usize,
    pub max_undirected: usize,
    pub avg_undirected: BigRational,
    pub per_node: Vec<NodeDegree>,
}

/// Degrees in `c`, or in the subgraph induced by `restrict`.
pub fn degree_profile(c: &Circuit, restrict: Option<&[NodeId]>) -> Result<DegreeProfile, CircuitError> {
    let allowed = membership(c, restrict)?;
    let mut per_node = Vec::new();
    for v in c.ids().filter(|v| allowed[v.0]) {
        let in_degree = c.preds(v).iter().filter(|p| allowed[p.0]).count();
        let out_degree = c.succs(v).iter().filter(|s| allowed[s.0]).count();
        // No parallel or antiparallel edges in a validated DAG.
        per_node.push(NodeDegree { node: v, in_degree, out_degree, undirected: in_degree + out_degree });
    }
    let total: usize = per_node.iter().map(|d| d.undirected).sum();
    let avg_undirected = if per_node.is_empty() {
        BigRational::zero()
    } else {
        rational_from_usize(total) / rational_from_usize(per_node.len())
    };
    Ok(DegreeProfile {
        max_in: per_node.iter().map(|d| d.in_degree).max().unwrap_or(0),
        max_out: per_node.iter().map(|d| d.out_degree).max().unwrap_or(0),
        max_undirected: per_node.iter().map(|d| d.undirected).max().unwrap_or(0),
        avg_undirected,
        per_node,
    })
}
