//! Simple undirected graphs, node attribute matrices and the combinatorial Laplacian.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected, unweighted simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

/// Edge-list entries that were discarded while building a [`Graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DroppedEdges {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl DroppedEdges {
    pub fn total(&self) -> usize {
        self.self_loops + self.duplicates
    }
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops and repeated edges (in either
    /// orientation) are dropped and tallied in the returned [`DroppedEdges`].
    pub fn from_edge_list(edges: &[(usize, usize)], num_nodes: usize) -> Result<(Graph, DroppedEdges)> {
        let mut adjacency = vec![Vec::new(); num_nodes];
        let mut dropped = DroppedEdges::default();
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut duplicate_half_edges = 0;
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
            let before = neighbors.len();
            neighbors.dedup();
            duplicate_half_edges += before - neighbors.len();
        }
        // every repeated undirected edge shows up once in each endpoint's list
        dropped.duplicates = duplicate_half_edges / 2;
        Ok((Graph { adjacency }, dropped))
    }

    /// A graph with `num_nodes` nodes and no edges.
    pub fn empty(num_nodes: usize) -> Graph {
        Graph {
            adjacency: vec![Vec::new(); num_nodes],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Combinatorial Laplacian `L = D - A`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let n = self.num_nodes();
        let mut l = SymmetricMatrix::zeros(n);
        for (v, neighbors) in self.adjacency.iter().enumerate() {
            l.set(v, v, neighbors.len() as f64);
            for &u in neighbors.iter().filter(|&&u| u < v) {
                l.set(v, u, -1.0);
            }
        }
        l
    }

    /// BFS hop distance from `source` to every node reachable within `max_hops`.
    /// Returned as `(node, distance)` in BFS discovery order; `source` comes first.
    pub fn bfs_within(&self, source: usize, max_hops: usize) -> Vec<(usize, usize)> {
        let mut dist = vec![usize::MAX; self.num_nodes()];
        let mut order = vec![(source, 0)];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_hops {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = du + 1;
                    order.push((w, du + 1));
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Nodes at hop distance at most `k` from `v`, `v` included, sorted ascending.
    pub fn k_hop_neighborhood(&self, v: usize, k: usize) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.bfs_within(v, k).into_iter().map(|(u, _)| u).collect();
        nodes.sort_unstable();
        nodes
    }

    /// Fraction of neighbour pairs of `v` that are themselves adjacent; 0 below degree 2.
    pub fn local_clustering_coefficient(&self, v: usize) -> f64 {
        let neighbors = &self.adjacency[v];
        let deg = neighbors.len();
        if deg < 2 {
            return 0.0;
        }
        let mut triangles = 0usize;
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if self.has_edge(a, b) {
                    triangles += 1;
                }
            }
        }
        2.0 * triangles as f64 / (deg * (deg - 1)) as f64
    }

    /// Two synthetic features per node: `ln(1 + degree)` and the local clustering coefficient.
    pub fn structural_features(&self) -> AttributeMatrix {
        let n = self.num_nodes();
        let mut data = Vec::with_capacity(2 * n);
        for v in 0..n {
            data.push((1.0 + self.degree(v) as f64).ln());
            data.push(self.local_clustering_coefficient(v));
        }
        AttributeMatrix { rows: n, cols: 2, data }
    }

    /// Relabels node `i` as `perm[i]`. `perm` must be a permutation of `0..N`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        check_permutation(perm, self.num_nodes())?;
        let mut adjacency = vec![Vec::new(); self.num_nodes()];
        for (v, neighbors) in self.adjacency.iter().enumerate() {
            let mut mapped: Vec<usize> = neighbors.iter().map(|&u| perm[u]).collect();
            mapped.sort_unstable();
            adjacency[perm[v]] = mapped;
        }
        Ok(Graph { adjacency })
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::input(format!(
            "permutation has length {} but the graph has {n} nodes",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::input("relabeling is not a permutation"));
        }
    }
    Ok(())
}

/// Row-major `N × m` matrix of real node features.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AttributeMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::input("attribute matrix needs at least one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "attribute data has {} entries, expected {rows} x {cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!(
                "non-finite attribute at node {}, feature {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(AttributeMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::input(format!(
                "attribute row {i} has {} entries, expected {cols}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_features(&self) -> usize {
        self.cols
    }

    pub fn get(&self, node: usize, feature: usize) -> f64 {
        self.data[node * self.cols + feature]
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.data[node * self.cols..(node + 1) * self.cols]
    }

    pub fn set(&mut self, node: usize, feature: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::input("attribute values must be finite"));
        }
        self.data[node * self.cols + feature] = value;
        Ok(())
    }

    /// Moves row `i` to row `perm[i]`, matching [`Graph::relabel`].
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rows)?;
        let mut data = vec![0.0; self.data.len()];
        for (i, &p) in perm.iter().enumerate() {
            data[p * self.cols..(p + 1) * self.cols].copy_from_slice(self.row(i));
        }
        Ok(AttributeMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Dense symmetric matrix; only the lower triangle is stored (packed by rows).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    lower: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        SymmetricMatrix {
            order,
            lower: vec![0.0; order * (order + 1) / 2],
        }
    }

    /// Builds from a square row-major matrix, reading the lower triangle only.
    pub fn from_lower(order: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != order * order {
            return Err(Error::input("dense matrix length does not match its order"));
        }
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.set(i, j, dense[i * order + j]);
            }
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn index(i: usize, j: usize) -> usize {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        r * (r + 1) / 2 + c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[Self::index(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.lower[Self::index(i, j)] = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SymmetricMatrix {
            order: self.order,
            lower: self.lower.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.order {
            for j in 0..=i {
                let x = self.get(i, j);
                sum += if i == j { x * x } else { 2.0 * x * x };
            }
        }
        sum.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().all(|x| x.is_finite())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }
}
