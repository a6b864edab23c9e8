//! Sorted-assignment distance between wavelet energy profiles, the resulting
//! topological similarity, and the two neighbour transition distributions.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::WaveletMatrix;

/// Largest list length accepted by [`mdpa_bruteforce_oracle`] (8! permutations).
pub const BRUTE_FORCE_MAX_LEN: usize = 8;

/// A node's wavelet column sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSignature {
    node: usize,
    values: Vec<f64>,
}

impl SortedSignature {
    pub fn new(node: usize, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        SortedSignature { node, values }
    }

    pub fn from_wavelets(psi: &WaveletMatrix, node: usize) -> Self {
        Self::new(node, psi.column(node).to_vec())
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Sorted signatures for every node of `psi`, indexed by node.
pub fn sorted_signatures(psi: &WaveletMatrix) -> Vec<SortedSignature> {
    (0..psi.order()).map(|i| SortedSignature::from_wavelets(psi, i)).collect()
}

/// Minimum difference of pair assignments. Once both lists are sorted the
/// optimal one-to-one matching pairs equal ranks, so this is a single pass.
pub fn mdpa(x: &SortedSignature, y: &SortedSignature) -> Result<f64> {
    if x.values.len() != y.values.len() {
        return Err(Error::input(format!(
            "signature lengths differ: {} vs {}",
            x.values.len(),
            y.values.len()
        )));
    }
    Ok(sorted_l1(&x.values, &y.values))
}

#[inline]
fn sorted_l1(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

/// Minimum over all one-to-one assignments of `Σ |x_i - y_σ(i)|`, by enumerating
/// every permutation (Heap's algorithm). Only for short lists.
pub fn mdpa_bruteforce_oracle(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::input("lists must have equal length"));
    }
    if x.len() > BRUTE_FORCE_MAX_LEN {
        return Err(Error::input(format!(
            "brute force limited to {BRUTE_FORCE_MAX_LEN} elements, got {}",
            x.len()
        )));
    }
    let n = x.len();
    let cost = |perm: &[usize]| -> f64 { x.iter().zip(perm).map(|(a, &j)| (a - y[j]).abs()).sum() };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(cost(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// `s(i, j) = exp(-MDPA(Ψ_i, Ψ_j))`.
pub fn topological_similarity(psi: &WaveletMatrix, i: usize, j: usize) -> f64 {
    let a = SortedSignature::from_wavelets(psi, i);
    let b = SortedSignature::from_wavelets(psi, j);
    signature_similarity(&a, &b)
}

/// Same as [`topological_similarity`] on precomputed signatures.
#[inline]
pub fn signature_similarity(a: &SortedSignature, b: &SortedSignature) -> f64 {
    (-sorted_l1(&a.values, &b.values)).exp()
}

/// Probability of drawing each node of the k-hop sub-graph around `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionWeights {
    pub source: usize,
    pub hops: usize,
    /// `G_k(source)`, ascending.
    pub support: Vec<usize>,
    /// `weights[r]` belongs to `support[r]`.
    pub weights: Vec<f64>,
}

impl TransitionWeights {
    fn normalized(source: usize, hops: usize, support: Vec<usize>, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        TransitionWeights {
            source,
            hops,
            support,
            weights,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }
}

fn check_hops(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("hop count must be at least 1"));
    }
    Ok(())
}

/// Neighbours weighted by normalized topological similarity to `v`.
pub fn similarity_transition(
    g: &Graph,
    signatures: &[SortedSignature],
    v: usize,
    k: usize,
) -> Result<TransitionWeights> {
    check_hops(k)?;
    let support = g.k_hop_neighborhood(v, k);
    let raw = support
        .iter()
        .map(|&j| signature_similarity(&signatures[v], &signatures[j]))
        .collect();
    Ok(TransitionWeights::normalized(v, k, support, raw))
}

/// Neighbours weighted by normalized smoothed degree `1 + deg` (full-graph degree).
pub fn influence_transition(g: &Graph, v: usize, k: usize) -> Result<TransitionWeights> {
    check_hops(k)?;
    let support = g.k_hop_neighborhood(v, k);
    let raw = support.iter().map(|&j| 1.0 + g.degree(j) as f64).collect();
    Ok(TransitionWeights::normalized(v, k, support, raw))
}
