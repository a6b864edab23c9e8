#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wavechar::similarity::mdpa_bruteforce_oracle;
use wavechar::spectral::matrix_exponential_oracle;
use wavechar::{AttributeMatrix, EmbeddingParams, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi style graph with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(&edges, n).unwrap().0
}

/// Random spanning tree plus `extra` random edges: always connected.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    if n > 1 {
        for _ in 0..extra {
            edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
        }
    }
    Graph::from_edge_list(&edges, n).unwrap().0
}

pub fn random_attributes(rng: &mut ChaCha8Rng, n: usize, m: usize) -> AttributeMatrix {
    let data = (0..n * m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    AttributeMatrix::new(n, m, data).unwrap()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[allow(clippy::needless_range_loop)]
/// Straight transcription of the embedding definition for tiny graphs:
/// `Ψ` by Taylor series, MDPA by enumerating assignments, hop distances by
/// Floyd–Warshall, every characteristic-function term evaluated on the spot.
pub fn brute_force_embedding(g: &Graph, attrs: &AttributeMatrix, params: &EmbeddingParams) -> Vec<f64> {
    let n = g.num_nodes();
    let m = attrs.num_features();
    let psi = matrix_exponential_oracle(&g.laplacian().scaled(-1.0), params.tau);

    let column = |i: usize| (0..n).map(|j| psi[(j, i)]).collect::<Vec<f64>>();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            sim[i][j] = (-mdpa_bruteforce_oracle(&column(i), &column(j)).unwrap()).exp();
        }
    }

    let inf = usize::MAX / 4;
    let mut dist = vec![vec![inf; n]; n];
    for i in 0..n {
        dist[i][i] = 0;
        for j in 0..n {
            if i != j && g.has_edge(i, j) {
                dist[i][j] = 1;
            }
        }
    }
    for via in 0..n {
        for i in 0..n {
            for j in 0..n {
                dist[i][j] = dist[i][j].min(dist[i][via] + dist[via][j]);
            }
        }
    }

    let ts: Vec<f64> = (1..=params.d).map(|j| j as f64 * params.t_max / params.d as f64).collect();
    let mut out = Vec::new();
    for variant in 0..2 {
        for k in 1..=params.k_max {
            for p in 0..m {
                for &t in &ts {
                    let (mut re, mut im) = (0.0, 0.0);
                    for i in 0..n {
                        let raw = |j: usize| if variant == 0 { sim[i][j] } else { 1.0 + g.degree(j) as f64 };
                        let total: f64 = (0..n).filter(|&r| dist[i][r] <= k).map(raw).sum();
                        for j in (0..n).filter(|&j| dist[i][j] <= k) {
                            let prob = raw(j) / total;
                            re += prob * (t * attrs.get(j, p)).cos();
                            im += prob * (t * attrs.get(j, p)).sin();
                        }
                    }
                    out.push(re / n as f64);
                    out.push(im / n as f64);
                }
            }
        }
    }
    out
}

/// Writes a labeled two-class dataset: class 0 are sparse random graphs, class 1
/// are rings of small cliques with a few random chords. Returns the label vector.
pub fn write_synthetic_dataset(dir: &Path, graphs: usize, seed: u64) -> Vec<u8> {
    let mut rng = rng(seed);
    let mut json = String::from("{");
    let mut target = String::from("id,target\n");
    let mut labels = Vec::new();
    for id in 0..graphs {
        let label = (id % 2) as u8;
        let n = rng.gen_range(8..24);
        let edges: Vec<(usize, usize)> = if label == 0 {
            random_connected_graph(&mut rng, n, n / 3).edges().collect()
        } else {
            clique_ring(&mut rng, n)
        };
        if id > 0 {
            json.push(',');
        }
        let list: Vec<String> = edges.iter().map(|(u, v)| format!("[{u},{v}]")).collect();
        write!(json, "\"{id}\":[{}]", list.join(",")).unwrap();
        writeln!(target, "{id},{label}").unwrap();
        labels.push(label);
    }
    json.push('}');
    std::fs::write(dir.join("graphs.json"), json).unwrap();
    std::fs::write(dir.join("target.csv"), target).unwrap();
    labels
}

fn clique_ring(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let size = 4;
    let groups = n / size;
    let mut edges = Vec::new();
    for g in 0..groups {
        let base = g * size;
        for a in 0..size {
            for b in a + 1..size {
                edges.push((base + a, base + b));
            }
        }
        let next = ((g + 1) % groups) * size;
        edges.push((base, next + 1));
    }
    for v in groups * size..n {
        edges.push((v, rng.gen_range(0..groups * size)));
    }
    edges
}
