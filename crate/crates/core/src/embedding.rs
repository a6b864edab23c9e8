//! Characteristic functions of k-hop feature distributions and their assembly
//! into a fixed-length graph embedding.
//!
//! Layout of an [`EmbeddingVector`], outermost first:
//!
//! ```text
//! variant (similarity, influence) → hop k = 1..k_max → feature p → sample t_j → (Re, Im)
//! ```
//!
//! for a total of `2 · k_max · m · d · 2` entries.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AttributeMatrix, Graph};
use crate::similarity::{
    influence_transition, signature_similarity, similarity_transition, sorted_signatures, TransitionWeights,
};
use crate::spectral::{heat_wavelets, WaveletMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingParams {
    /// Largest sub-graph radius.
    pub k_max: usize,
    /// Number of characteristic-function sample points.
    pub d: usize,
    /// Heat kernel scale.
    pub tau: f64,
    /// Samples are taken at `t_max / d, 2 t_max / d, …, t_max`.
    pub t_max: f64,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams {
            k_max: 5,
            d: 25,
            tau: 0.5,
            t_max: 2.5,
        }
    }
}

impl EmbeddingParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::input("k_max must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::input("number of sample points must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::input(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::input(format!("t_max must be positive, got {}", self.t_max)));
        }
        Ok(())
    }

    /// Length of the embedding for `m` features per node.
    pub fn dimension(&self, num_features: usize) -> usize {
        2 * self.k_max * self.hop_block_len(num_features)
    }

    fn hop_block_len(&self, num_features: usize) -> usize {
        num_features * self.d * 2
    }

    /// Position of `(variant, k, p, sample, part)` in the embedding; `part` 0 is Re, 1 is Im.
    pub fn layout_index(
        &self,
        num_features: usize,
        variant: Variant,
        k: usize,
        feature: usize,
        sample: usize,
        part: usize,
    ) -> usize {
        let hop_block = (variant.index() * self.k_max + (k - 1)) * self.hop_block_len(num_features);
        hop_block + (feature * self.d + sample) * 2 + part
    }
}

/// Which transition distribution weights the sub-graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Normalized topological similarity.
    Similarity,
    /// Normalized smoothed degree.
    Influence,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Similarity, Variant::Influence];

    fn index(self) -> usize {
        match self {
            Variant::Similarity => 0,
            Variant::Influence => 1,
        }
    }
}

/// A value of a characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexSample {
    pub re: f64,
    pub im: f64,
}

impl ComplexSample {
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// `t_j = j · t_max / d` for `j = 1..=d`.
pub fn sample_points(d: usize, t_max: f64) -> Vec<f64> {
    (1..=d).map(|j| j as f64 * t_max / d as f64).collect()
}

/// `Σ_j P(j|v) (cos(t a_j[p]), sin(t a_j[p]))` over the support of `weights`.
pub fn node_characteristic(weights: &TransitionWeights, attrs: &AttributeMatrix, p: usize, t: f64) -> ComplexSample {
    let mut out = ComplexSample::default();
    for (j, w) in weights.iter() {
        let (sin, cos) = (t * attrs.get(j, p)).sin_cos();
        out.re += w * cos;
        out.im += w * sin;
    }
    out
}

/// Mean of [`node_characteristic`] over all nodes; `all_weights[v]` belongs to node `v`.
pub fn graph_characteristic(
    all_weights: &[TransitionWeights],
    attrs: &AttributeMatrix,
    p: usize,
    t: f64,
) -> Result<ComplexSample> {
    if all_weights.len() != attrs.num_rows() || all_weights.is_empty() {
        return Err(Error::input(format!(
            "expected one transition distribution per node ({}), got {}",
            attrs.num_rows(),
            all_weights.len()
        )));
    }
    let mut sum = ComplexSample::default();
    for w in all_weights {
        let c = node_characteristic(w, attrs, p, t);
        sum.re += c.re;
        sum.im += c.im;
    }
    let n = all_weights.len() as f64;
    Ok(ComplexSample {
        re: sum.re / n,
        im: sum.im / n,
    })
}

fn check_inputs(g: &Graph, attrs: &AttributeMatrix, params: &EmbeddingParams) -> Result<()> {
    params.validate()?;
    if g.num_nodes() == 0 {
        return Err(Error::input("cannot embed an empty graph"));
    }
    if attrs.num_rows() != g.num_nodes() {
        return Err(Error::input(format!(
            "attribute matrix has {} rows but the graph has {} nodes",
            attrs.num_rows(),
            g.num_nodes()
        )));
    }
    Ok(())
}

/// The `2 · m · d` block for a single hop count, computed directly from the
/// per-node transition distributions. [`embed_graph`] produces the same numbers
/// for all hops at once.
pub fn k_hop_embedding(
    g: &Graph,
    psi: &WaveletMatrix,
    attrs: &AttributeMatrix,
    k: usize,
    params: &EmbeddingParams,
    variant: Variant,
) -> Result<Vec<f64>> {
    check_inputs(g, attrs, params)?;
    if k == 0 || k > params.k_max {
        return Err(Error::input(format!("hop count {k} outside 1..={}", params.k_max)));
    }
    if psi.order() != g.num_nodes() {
        return Err(Error::input("wavelet matrix does not match the graph"));
    }
    let signatures = sorted_signatures(psi);
    let all_weights = (0..g.num_nodes())
        .map(|v| match variant {
            Variant::Similarity => similarity_transition(g, &signatures, v, k),
            Variant::Influence => influence_transition(g, v, k),
        })
        .collect::<Result<Vec<_>>>()?;

    let ts = sample_points(params.d, params.t_max);
    let mut out = Vec::with_capacity(params.hop_block_len(attrs.num_features()));
    for p in 0..attrs.num_features() {
        for &t in &ts {
            let phi = graph_characteristic(&all_weights, attrs, p, t)?;
            out.push(phi.re);
            out.push(phi.im);
        }
    }
    Ok(out)
}

/// Final graph embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `(cos, sin)` of `t_j · a_v[p]` laid out as `[(v·m + p)·d + j]`.
struct TrigTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
    stride: usize,
}

impl TrigTable {
    fn new(attrs: &AttributeMatrix, ts: &[f64]) -> Self {
        let stride = attrs.num_features() * ts.len();
        let len = attrs.num_rows() * stride;
        let mut cos = Vec::with_capacity(len);
        let mut sin = Vec::with_capacity(len);
        for v in 0..attrs.num_rows() {
            for &a in attrs.row(v) {
                for &t in ts {
                    let (s, c) = (t * a).sin_cos();
                    cos.push(c);
                    sin.push(s);
                }
            }
        }
        TrigTable { cos, sin, stride }
    }

    /// Adds `w · (cos, sin)` of node `v` into an interleaved `(Re, Im)` accumulator.
    #[inline]
    fn accumulate(&self, v: usize, w: f64, acc: &mut [f64]) {
        let range = v * self.stride..(v + 1) * self.stride;
        for ((pair, c), s) in acc.chunks_exact_mut(2).zip(&self.cos[range.clone()]).zip(&self.sin[range]) {
            pair[0] += w * c;
            pair[1] += w * s;
        }
    }
}

/// Embeds one attributed graph.
///
/// Each node's sub-graph is explored once by BFS up to `k_max`; the weighted
/// sums are accumulated ring by ring so every hop count reuses the previous one.
pub fn embed_graph(g: &Graph, attrs: &AttributeMatrix, params: &EmbeddingParams) -> Result<EmbeddingVector> {
    check_inputs(g, attrs, params)?;
    let n = g.num_nodes();
    let m = attrs.num_features();
    let psi = heat_wavelets(g, params.tau)?;
    let signatures = sorted_signatures(&psi);
    let trig = TrigTable::new(attrs, &sample_points(params.d, params.t_max));

    let block = params.hop_block_len(m);
    let mut out = vec![0.0; params.dimension(m)];
    let (sim_out, inf_out) = out.split_at_mut(params.k_max * block);
    let mut sim_acc = vec![0.0; block];
    let mut inf_acc = vec![0.0; block];

    for v in 0..n {
        let reach = g.bfs_within(v, params.k_max);
        sim_acc.fill(0.0);
        inf_acc.fill(0.0);
        let mut sim_total = 0.0;
        let mut inf_total = 0.0;
        let mut next = 0;
        for k in 0..=params.k_max {
            // BFS discovery order is nondecreasing in distance
            while let Some(&(j, _)) = reach.get(next).filter(|&&(_, dist)| dist == k) {
                let ws = signature_similarity(&signatures[v], &signatures[j]);
                let wi = 1.0 + g.degree(j) as f64;
                trig.accumulate(j, ws, &mut sim_acc);
                trig.accumulate(j, wi, &mut inf_acc);
                sim_total += ws;
                inf_total += wi;
                next += 1;
            }
            if k == 0 {
                continue;
            }
            let range = (k - 1) * block..k * block;
            for (dst, src) in sim_out[range.clone()].iter_mut().zip(&sim_acc) {
                *dst += src / sim_total;
            }
            for (dst, src) in inf_out[range].iter_mut().zip(&inf_acc) {
                *dst += src / inf_total;
            }
        }
    }

    let n = n as f64;
    for x in &mut out {
        *x /= n;
    }
    Ok(EmbeddingVector(out))
}

/// What [`embed_collection`] does when a graph fails to embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    /// Return the error of the lowest-indexed failing graph.
    #[default]
    Abort,
    /// Log and leave the graph out of the result.
    Skip,
}

/// Embeddings of a batch, in input order.
#[derive(Debug, Default)]
pub struct CollectionEmbedding {
    /// `(input index, embedding)` for every graph that succeeded.
    pub rows: Vec<(usize, EmbeddingVector)>,
    /// Failures, only populated under [`ErrorPolicy::Skip`].
    pub skipped: Vec<(usize, Error)>,
}

/// Runs `embed_one` for indices `0..count` on the current rayon pool and merges
/// results by index, so the outcome does not depend on the number of threads.
pub fn embed_indexed<F>(count: usize, policy: ErrorPolicy, embed_one: F) -> Result<CollectionEmbedding>
where
    F: Fn(usize) -> Result<EmbeddingVector> + Sync,
{
    let results: Vec<Result<EmbeddingVector>> = (0..count).into_par_iter().map(&embed_one).collect();
    let mut out = CollectionEmbedding::default();
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(row) => out.rows.push((index, row)),
            Err(e) => match policy {
                ErrorPolicy::Abort => return Err(e.context(format!("graph #{index}"))),
                ErrorPolicy::Skip => {
                    log::warn!("skipping graph #{index}: {e}");
                    out.skipped.push((index, e));
                }
            },
        }
    }
    Ok(out)
}

/// Embeds every `(graph, attributes)` pair.
pub fn embed_collection(
    graphs: &[(Graph, AttributeMatrix)],
    params: &EmbeddingParams,
    policy: ErrorPolicy,
) -> Result<CollectionEmbedding> {
    if graphs.is_empty() {
        return Err(Error::input("no graphs to embed"));
    }
    params.validate()?;
    embed_indexed(graphs.len(), policy, |i| embed_graph(&graphs[i].0, &graphs[i].1, params))
}
