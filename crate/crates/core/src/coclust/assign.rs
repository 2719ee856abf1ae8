//! Exact one-sided assignment: maximize the total cost of assigning each
//! row to a class subject to exact class counts. This is the inner solve of
//! the alternating support maximization; exactness makes each alternating
//! step provably optimal for the fixed opposite side.

use crate::coclust::{ClassCounts, Labeling};
use crate::error::{Error, Result};
use crate::mat::Mat;

/// Maximize `sum_i cost[i, S(i)]` over labelings with exact class counts.
///
/// Ties are broken deterministically: lower row indices are assigned to
/// lower class ids. K = 2 reduces to sorting by cost differences; larger K
/// goes through a min-cost-flow transportation solve.
pub fn assign_side(cost: &Mat, counts: &ClassCounts) -> Result<Labeling> {
    let m = cost.rows();
    let k = cost.cols();
    if counts.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "cost has {k} classes, counts has {}",
            counts.k()
        )));
    }
    if counts.total() != m {
        return Err(Error::Infeasible(format!(
            "counts total {} does not match {m} rows",
            counts.total()
        )));
    }
    if k == 1 {
        return Labeling::new(vec![0; m], 1);
    }
    if k == 2 {
        return Ok(assign_two_class(cost, counts));
    }
    assign_flow(cost, counts)
}

fn assign_two_class(cost: &Mat, counts: &ClassCounts) -> Labeling {
    let m = cost.rows();
    let mut order: Vec<usize> = (0..m).collect();
    // larger (cost0 - cost1) first; ties resolved toward lower index,
    // which hands class 0 to the earliest rows
    order.sort_by(|&i, &j| {
        let di = cost[(i, 0)] - cost[(i, 1)];
        let dj = cost[(j, 0)] - cost[(j, 1)];
        dj.total_cmp(&di).then(i.cmp(&j))
    });
    let mut labels = vec![1u32; m];
    for &i in order.iter().take(counts.counts()[0]) {
        labels[i] = 0;
    }
    Labeling::new(labels, 2).expect("constructed labels are valid")
}

/// Successive-shortest-path min-cost flow on the rows-to-classes
/// transportation graph. Scale here is small (general K is only exercised
/// at test sizes); SPFA keeps the implementation short and handles the
/// negated (possibly negative) costs directly.
fn assign_flow(cost: &Mat, counts: &ClassCounts) -> Result<Labeling> {
    let m = cost.rows();
    let k = cost.cols();
    let source = 0usize;
    let row0 = 1usize;
    let class0 = row0 + m;
    let sink = class0 + k;
    let n_nodes = sink + 1;

    struct Edge {
        to: usize,
        cap: i64,
        cost: f64,
    }
    let mut edges: Vec<Edge> = Vec::with_capacity(2 * (m + m * k + k));
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let add_edge = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, u: usize, v: usize, cap: i64, c: f64| {
        adj[u].push(edges.len());
        edges.push(Edge { to: v, cap, cost: c });
        adj[v].push(edges.len());
        edges.push(Edge { to: u, cap: 0, cost: -c });
    };

    for i in 0..m {
        add_edge(&mut edges, &mut adj, source, row0 + i, 1, 0.0);
        for a in 0..k {
            // maximization: negate
            add_edge(&mut edges, &mut adj, row0 + i, class0 + a, 1, -cost[(i, a)]);
        }
    }
    for a in 0..k {
        add_edge(&mut edges, &mut adj, class0 + a, sink, counts.counts()[a] as i64, 0.0);
    }

    for _unit in 0..m {
        // SPFA shortest path in the residual graph
        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut parent_edge = vec![usize::MAX; n_nodes];
        let mut in_queue = vec![false; n_nodes];
        dist[source] = 0.0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        in_queue[source] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            for &eid in &adj[u] {
                let e = &edges[eid];
                if e.cap > 0 && dist[u] + e.cost < dist[e.to] - 1e-15 {
                    dist[e.to] = dist[u] + e.cost;
                    parent_edge[e.to] = eid;
                    if !in_queue[e.to] {
                        queue.push_back(e.to);
                        in_queue[e.to] = true;
                    }
                }
            }
        }
        if parent_edge[sink] == usize::MAX {
            return Err(Error::Infeasible("transportation solve ran out of capacity".into()));
        }
        let mut v = sink;
        while v != source {
            let eid = parent_edge[v];
            edges[eid].cap -= 1;
            edges[eid ^ 1].cap += 1;
            v = edges[eid ^ 1].to;
        }
    }

    let mut labels = vec![0u32; m];
    for i in 0..m {
        let mut assigned = None;
        for &eid in &adj[row0 + i] {
            let e = &edges[eid];
            // forward edge with exhausted capacity carries the unit
            if eid % 2 == 0 && e.to >= class0 && e.to < sink && e.cap == 0 {
                assigned = Some((e.to - class0) as u32);
                break;
            }
        }
        labels[i] = assigned
            .ok_or_else(|| Error::Infeasible(format!("row {i} left unassigned by flow")))?;
    }
    Labeling::new(labels, k)
}
