//! Complex graph structure and complex-balanced equilibria.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::network::{Complex, ReactionNetwork};
use crate::stoich;

/// Relative tolerance for complex balance, scaled by the largest complex flow.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Linkage classes with more complexes than this use a dense kernel solve
/// instead of spanning-tree sums.
const TREE_SUM_MAX_NODES: usize = 12;
const TREE_SUM_MAX_CHOICES: f64 = 2.0e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BalanceError {
    #[error("concentration vector must be strictly positive and finite")]
    NonPositiveConcentration,
    #[error("network is not weakly reversible")]
    NotWeaklyReversible,
    #[error("no complex balanced equilibrium for these rate constants (residual {residual:e})")]
    NotFound { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraph {
    pub nodes: Vec<Complex>,
    /// `(source node, target node, rate constant)`, one per reaction.
    pub edges: Vec<(usize, usize, f64)>,
}

impl ComplexGraph {
    pub fn new(net: &ReactionNetwork) -> Self {
        let mut nodes: Vec<Complex> = Vec::new();
        let mut index: BTreeMap<Complex, usize> = BTreeMap::new();
        let mut id = |c: &Complex, nodes: &mut Vec<Complex>| {
            *index.entry(c.clone()).or_insert_with(|| {
                nodes.push(c.clone());
                nodes.len() - 1
            })
        };
        let mut edges = Vec::with_capacity(net.n_reactions());
        for r in net.reactions() {
            let a = id(&r.reactant, &mut nodes);
            let b = id(&r.product, &mut nodes);
            edges.push((a, b, r.rate_k));
        }
        Self { nodes, edges }
    }

    pub fn node_of(&self, c: &Complex) -> Option<usize> {
        self.nodes.iter().position(|n| n == c)
    }

    fn reach(&self, from: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &(a, b, _) in &self.edges {
                let (s, t) = if forward { (a, b) } else { (b, a) };
                if s == u && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// Connected components of the undirected complex graph, each sorted by
/// node index, in order of their smallest node.
pub fn linkage_classes(g: &ComplexGraph) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.nodes.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for &(a, b, _) in &g.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..g.nodes.len() {
        let r = find(&mut parent, v);
        classes.entry(r).or_default().push(v);
    }
    classes.into_values().collect()
}

/// Every edge lies on a directed cycle.
pub fn is_weakly_reversible(g: &ComplexGraph) -> bool {
    g.edges.iter().all(|&(a, b, _)| g.reach(b, true)[a])
}

/// `#complexes - #linkage classes - dim S`.
pub fn deficiency(net: &ReactionNetwork) -> usize {
    let g = ComplexGraph::new(net);
    let m = g.nodes.len();
    let l = linkage_classes(&g).len();
    let s = stoich::dimension(net);
    // Always nonnegative: each linkage class contributes at most (size - 1)
    // independent reaction vectors.
    m - l - s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub concentrations: Vec<f64>,
    pub complex_balanced: bool,
    pub residual: f64,
    /// Largest complex outflow at the point, used to scale the tolerance.
    pub flow_scale: f64,
}

/// Evaluates inflow and outflow at every complex.
pub fn is_complex_balanced_at(
    net: &ReactionNetwork,
    x: &[f64],
    tol: f64,
) -> Result<Equilibrium, BalanceError> {
    if x.len() != net.n_species() || x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(BalanceError::NonPositiveConcentration);
    }
    let g = ComplexGraph::new(net);
    let mut inflow = vec![0.0; g.nodes.len()];
    let mut outflow = vec![0.0; g.nodes.len()];
    for (r, &(a, b, k)) in net.reactions().iter().zip(&g.edges) {
        let rate = k * r.reactant.monomial(x);
        outflow[a] += rate;
        inflow[b] += rate;
    }
    let residual = inflow
        .iter()
        .zip(&outflow)
        .map(|(i, o)| (i - o).abs())
        .fold(0.0, f64::max);
    let flow_scale = outflow.iter().chain(&inflow).copied().fold(0.0, f64::max);
    Ok(Equilibrium {
        concentrations: x.to_vec(),
        complex_balanced: residual <= tol * flow_scale.max(1.0),
        residual,
        flow_scale,
    })
}

/// Species formation rate with every delayed read replaced by `x`.
pub fn species_rhs(net: &ReactionNetwork, x: &[f64]) -> Vec<f64> {
    let mut dx = vec![0.0; net.n_species()];
    for r in net.reactions() {
        let rate = r.rate_k * r.reactant.monomial(x);
        for (s, c) in r.product.terms() {
            dx[s] += rate * c as f64;
        }
        for (s, c) in r.reactant.terms() {
            dx[s] -= rate * c as f64;
        }
    }
    dx
}

/// Weights of rooted in-trees: `rho[v]` sums, over spanning trees directed
/// toward `v`, the product of edge weights. `weights[u]` lists `(target, k)`.
fn tree_sums(weights: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let m = weights.len();
    let mut rho = vec![0.0; m];
    let mut choice = vec![usize::MAX; m];
    for (root, slot) in rho.iter_mut().enumerate() {
        *slot = tree_sum_rooted(weights, root, 0, &mut choice, 1.0);
    }
    rho
}

fn tree_sum_rooted(
    weights: &[Vec<(usize, f64)>],
    root: usize,
    next: usize,
    choice: &mut [usize],
    acc: f64,
) -> f64 {
    let m = weights.len();
    if next == m {
        return acc;
    }
    if next == root {
        return tree_sum_rooted(weights, root, next + 1, choice, acc);
    }
    let mut total = 0.0;
    for &(t, k) in &weights[next] {
        choice[next] = t;
        if !closes_cycle(choice, root, next) {
            total += tree_sum_rooted(weights, root, next + 1, choice, acc * k);
        }
    }
    choice[next] = usize::MAX;
    total
}

/// Following chosen out-edges from `start` returns to `start`.
fn closes_cycle(choice: &[usize], root: usize, start: usize) -> bool {
    let mut v = choice[start];
    let mut steps = 0;
    while v != root && v != usize::MAX && steps <= choice.len() {
        if v == start {
            return true;
        }
        v = choice[v];
        steps += 1;
    }
    false
}

/// Positive kernel vector of the weighted Laplacian of one strongly
/// connected class, via a dense solve.
fn laplacian_kernel(weights: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let m = weights.len();
    // A[t][s] = k(s -> t), A[s][s] = -sum_out(s); kernel of A.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (s, out) in weights.iter().enumerate() {
        for &(t, k) in out {
            a[(t, s)] += k;
            a[(s, s)] -= k;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let row: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let sign = if row.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    row.into_iter().map(|v| (v * sign).max(f64::MIN_POSITIVE)).collect()
}

/// Kernel vector of the complex Laplacian, indexed like `class`.
fn class_kernel(g: &ComplexGraph, class: &[usize]) -> Vec<f64> {
    let local: BTreeMap<usize, usize> = class.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); class.len()];
    for &(a, b, k) in &g.edges {
        if let (Some(&la), Some(&lb)) = (local.get(&a), local.get(&b)) {
            *merged[la].entry(lb).or_insert(0.0) += k;
        }
    }
    let weights: Vec<Vec<(usize, f64)>> = merged
        .into_iter()
        .map(|m| m.into_iter().collect())
        .collect();
    let choices: f64 = weights.iter().map(|w| w.len().max(1) as f64).product();
    if class.len() <= TREE_SUM_MAX_NODES && choices <= TREE_SUM_MAX_CHOICES {
        tree_sums(&weights)
    } else {
        laplacian_kernel(&weights)
    }
}

/// Finds a positive complex balanced equilibrium for the given rates.
pub fn find_complex_balanced_equilibrium(net: &ReactionNetwork) -> Result<Equilibrium, BalanceError> {
    find_complex_balanced_equilibrium_with_tol(net, DEFAULT_TOL)
}

pub fn find_complex_balanced_equilibrium_with_tol(
    net: &ReactionNetwork,
    tol: f64,
) -> Result<Equilibrium, BalanceError> {
    let g = ComplexGraph::new(net);
    if !is_weakly_reversible(&g) {
        return Err(BalanceError::NotWeaklyReversible);
    }
    let classes = linkage_classes(&g);
    let n = net.n_species();
    let l = classes.len();
    let mcount = g.nodes.len();

    // Unknowns: u = log x (n entries), then one log-scale per class.
    // Row for complex c in class j:  c . u - w_j = log rho_c.
    let mut a = DMatrix::<f64>::zeros(mcount, n + l);
    let mut b = DVector::<f64>::zeros(mcount);
    for (j, class) in classes.iter().enumerate() {
        let rho = class_kernel(&g, class);
        for (&node, &r) in class.iter().zip(&rho) {
            for (s, c) in g.nodes[node].terms() {
                a[(node, s)] = c as f64;
            }
            a[(node, n + j)] = -1.0;
            b[node] = r.ln();
        }
    }
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-12)
        .map_err(|_| BalanceError::NotFound { residual: f64::INFINITY })?;
    let x: Vec<f64> = (0..n).map(|s| sol[s].exp()).collect();
    if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(BalanceError::NotFound { residual: f64::INFINITY });
    }
    let eq = is_complex_balanced_at(net, &x, tol)?;
    if eq.complex_balanced {
        Ok(eq)
    } else {
        Err(BalanceError::NotFound { residual: eq.residual })
    }
}
