//! Graph-classification evaluation: seeded holdout splits, L2-regularized
//! logistic regression, ROC AUC and a one-parameter-at-a-time sensitivity sweep.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::dataset::{embed_dataset, GraphCollection, Labels};
use crate::embedding::{EmbeddingParams, ErrorPolicy};
use crate::error::{Error, Result};

/// Retries allowed when a split leaves one side with a single class.
const MAX_SPLIT_RETRIES: u64 = 5;
const SUB_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Rows per block when forming the Newton system.
const HESSIAN_BLOCK_ROWS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub seeds: Vec<u64>,
    pub test_ratio: f64,
    /// Inverse regularization strength: larger means weaker regularization.
    pub l2_strength: f64,
    pub max_iterations: usize,
    /// Target Euclidean norm of the gradient of the (mean-scaled) objective.
    pub tolerance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seeds: (0..10).collect(),
            test_ratio: 0.2,
            l2_strength: 1.0,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::input("at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("seeds must be distinct"));
        }
        if !(self.test_ratio > 0.0 && self.test_ratio < 1.0) {
            return Err(Error::input(format!("test ratio must lie in (0, 1), got {}", self.test_ratio)));
        }
        if !(self.l2_strength > 0.0 && self.l2_strength.is_finite()) {
            return Err(Error::input("l2 strength must be positive"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(Error::input("solver tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

/// Uniform integer in `0..bound` from the raw 64-bit stream (Lemire's method).
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let product = u128::from(rng.next_u64()) * u128::from(bound);
        if product as u64 >= threshold {
            return (product >> 64) as u64;
        }
    }
}

/// Seeded holdout split of `0..n`.
///
/// The indices are shuffled by a Fisher–Yates pass driven by ChaCha8 seeded with
/// `seed` (via `SeedableRng::seed_from_u64`); the first `round(n · test_ratio)`
/// shuffled indices form the test set, clamped to `1..=n-1`. Both halves are
/// returned sorted.
pub fn train_test_split(n: usize, test_ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 examples to split, got {n}")));
    }
    if !(test_ratio > 0.0 && test_ratio < 1.0) {
        return Err(Error::input(format!("test ratio must lie in (0, 1), got {test_ratio}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let test_len = ((n as f64 * test_ratio).round() as usize).clamp(1, n - 1);
    let mut test = order[..test_len].to_vec();
    let mut train = order[test_len..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::input(format!(
                "model expects {} features, got {}",
                self.weights.len(),
                x.len()
            )));
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept)
    }
}

/// `sigmoid(w·x + b)` for every row.
pub fn predict_scores(model: &LogisticModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter().map(|x| model.decision(x).map(sigmoid)).collect()
}

/// Fits L2-regularized logistic regression by damped Newton iterations.
///
/// Features are standardized with the training mean and standard deviation
/// (constant columns are only centred). In standardized coordinates the solver
/// minimizes
///
/// ```text
/// (1/n) Σ_i ln(1 + exp(-ỹ_i (w·x_i + b))) + ‖w‖² / (2 C n)
/// ```
///
/// with `C = l2_strength` and an unpenalized intercept, and stops once the
/// gradient norm drops below `config.tolerance`. Returned weights are mapped
/// back to the original feature scale.
pub fn fit_logistic_regression(rows: &[Vec<f64>], labels: &[u8], config: &EvalConfig) -> Result<LogisticModel> {
    let n = rows.len();
    if n != labels.len() {
        return Err(Error::input(format!("{n} rows but {} labels", labels.len())));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::input("labels must be 0 or 1"));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::input("logistic regression needs both classes in the training data"));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::input("feature rows have different lengths"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::input("features must be finite"));
    }

    let (mean, scale) = column_moments(rows, p);
    // design matrix [standardized features | 1]
    let q = p + 1;
    let z = DMatrix::from_fn(n, q, |i, j| if j == p { 1.0 } else { (rows[i][j] - mean[j]) / scale[j] });
    let y = DVector::from_iterator(n, labels.iter().map(|&v| f64::from(v)));
    let ridge = 1.0 / (config.l2_strength * n as f64);
    let n_f = n as f64;

    let objective = |beta: &DVector<f64>, margins: &DVector<f64>| -> f64 {
        let loss: f64 = margins
            .iter()
            .zip(y.iter())
            .map(|(&m, &yi)| if yi > 0.5 { softplus(-m) } else { softplus(m) })
            .sum();
        loss / n_f + 0.5 * ridge * beta.rows(0, p).norm_squared()
    };

    let mut beta = DVector::<f64>::zeros(q);
    let mut margins = &z * &beta;
    let mut value = objective(&beta, &margins);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let probs = margins.map(sigmoid);
        let residual = &probs - &y;
        let mut grad = z.tr_mul(&residual) / n_f;
        for j in 0..p {
            grad[j] += ridge * beta[j];
        }
        grad_norm = grad.norm();
        if grad_norm <= config.tolerance {
            return Ok(unstandardize(&beta, &mean, &scale));
        }

        let hessian = newton_matrix(&z, &probs, ridge, p);
        let step = solve_spd(hessian, &-&grad)?;
        let slope = grad.dot(&step);
        let mut t = 1.0;
        loop {
            let candidate = &beta + &step * t;
            let candidate_margins = &z * &candidate;
            let candidate_value = objective(&candidate, &candidate_margins);
            if candidate_value <= value + 1e-4 * t * slope || t < 1e-10 {
                beta = candidate;
                margins = candidate_margins;
                value = candidate_value;
                break;
            }
            t *= 0.5;
        }
    }

    // the cap may be hit right as the last step lands inside the tolerance
    let probs = margins.map(sigmoid);
    let mut grad = z.tr_mul(&(&probs - &y)) / n_f;
    for j in 0..p {
        grad[j] += ridge * beta[j];
    }
    if grad.norm() <= config.tolerance {
        return Ok(unstandardize(&beta, &mean, &scale));
    }
    Err(Error::Numeric {
        message: format!(
            "logistic regression did not converge in {} iterations",
            config.max_iterations
        ),
        residual: grad.norm().min(grad_norm),
    })
}

fn column_moments(rows: &[Vec<f64>], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for r in rows {
        for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let scale = var
        .into_iter()
        .map(|v| {
            let sd = (v / n).sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

fn unstandardize(beta: &DVector<f64>, mean: &[f64], scale: &[f64]) -> LogisticModel {
    let p = mean.len();
    let weights: Vec<f64> = (0..p).map(|j| beta[j] / scale[j]).collect();
    let intercept = beta[p] - weights.iter().zip(mean).map(|(w, m)| w * m).sum::<f64>();
    LogisticModel { weights, intercept }
}

/// `(1/n) Zᵀ diag(π(1-π)) Z + ridge · diag(1, …, 1, 0)`, accumulated in row blocks.
fn newton_matrix(z: &DMatrix<f64>, probs: &DVector<f64>, ridge: f64, p: usize) -> DMatrix<f64> {
    let (n, q) = z.shape();
    let mut h = DMatrix::<f64>::zeros(q, q);
    let mut start = 0;
    while start < n {
        let len = HESSIAN_BLOCK_ROWS.min(n - start);
        let mut block = z.rows(start, len).clone_owned();
        let root_weights =
            DVector::from_iterator(len, probs.rows(start, len).iter().map(|&pi| (pi * (1.0 - pi)).sqrt()));
        for mut col in block.column_iter_mut() {
            col.component_mul_assign(&root_weights);
        }
        h.gemm_tr(1.0, &block, &block, 1.0);
        start += len;
    }
    h /= n as f64;
    for j in 0..p {
        h[(j, j)] += ridge;
    }
    h
}

fn solve_spd(mut h: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let q = h.nrows();
    let mut jitter = 0.0;
    for _ in 0..20 {
        if let Some(chol) = h.clone().cholesky() {
            return Ok(chol.solve(rhs));
        }
        let bump = if jitter == 0.0 { 1e-12 } else { jitter * 9.0 };
        for j in 0..q {
            h[(j, j)] += bump;
        }
        jitter += bump;
    }
    Err(Error::Numeric {
        message: "Newton system is not positive definite".into(),
        residual: jitter,
    })
}

/// ROC AUC as the normalized Mann–Whitney statistic, ties counted half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::input(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::input("scores must not be NaN"));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.iter().filter(|&&y| y == 0).count();
    if positives + negatives != labels.len() {
        return Err(Error::input("labels must be 0 or 1"));
    }
    if positives == 0 || negatives == 0 {
        return Err(Error::input("AUC needs both classes"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // 1-based ranks, tied groups share their average rank
    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let tied_positives = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        positive_rank_sum += avg_rank * tied_positives as f64;
        start = end;
    }
    let (np, nn) = (positives as f64, negatives as f64);
    let u = positive_rank_sum - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    /// The seed actually used for the split after any retries.
    pub split_seed: u64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_seed: Vec<SeedResult>,
    pub mean_auc: f64,
    /// Sample standard deviation over seeds divided by √(number of seeds).
    pub std_error: f64,
}

impl EvalReport {
    fn from_results(per_seed: Vec<SeedResult>) -> Self {
        let k = per_seed.len() as f64;
        let mean_auc = per_seed.iter().map(|r| r.auc).sum::<f64>() / k;
        let std_error = if per_seed.len() > 1 {
            let var = per_seed.iter().map(|r| (r.auc - mean_auc).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        EvalReport {
            per_seed,
            mean_auc,
            std_error,
        }
    }

    /// `seed,split_seed,auc` rows.
    pub fn write_per_seed_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "seed,split_seed,auc")?;
        for r in &self.per_seed {
            writeln!(out, "{},{},{}", r.seed, r.split_seed, r.auc)?;
        }
        Ok(())
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean_auc, self.std_error)
    }
}

fn has_both_classes(indices: &[usize], labels: &[u8]) -> bool {
    let positives = indices.iter().filter(|&&i| labels[i] == 1).count();
    positives > 0 && positives < indices.len()
}

fn evaluate_seed(rows: &[Vec<f64>], labels: &[u8], config: &EvalConfig, seed: u64) -> Result<SeedResult> {
    for attempt in 0..=MAX_SPLIT_RETRIES {
        let split_seed = seed.wrapping_add(attempt.wrapping_mul(SUB_SEED_STRIDE));
        let (train, test) = train_test_split(rows.len(), config.test_ratio, split_seed)?;
        if !has_both_classes(&train, labels) || !has_both_classes(&test, labels) {
            log::warn!("seed {seed}: split {split_seed} lacks a class on one side, retrying");
            continue;
        }
        let pick_rows = |idx: &[usize]| idx.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
        let pick_labels = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
        let model = fit_logistic_regression(&pick_rows(&train), &pick_labels(&train), config)
            .map_err(|e| e.context(format!("seed {seed}")))?;
        let test_rows: Vec<&Vec<f64>> = test.iter().map(|&i| &rows[i]).collect();
        let scores = test_rows
            .iter()
            .map(|x| model.decision(x).map(sigmoid))
            .collect::<Result<Vec<_>>>()?;
        let auc = auc(&scores, &pick_labels(&test))?;
        return Ok(SeedResult { seed, split_seed, auc });
    }
    Err(Error::input(format!(
        "seed {seed}: no split with both classes on each side after {MAX_SPLIT_RETRIES} retries"
    )))
}

/// Repeated holdout: for every seed split, fit on train and score AUC on test.
/// Seeds run in parallel on the current rayon pool; results keep seed order.
pub fn evaluate(rows: &[Vec<f64>], labels: &[u8], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::input(format!("{} embeddings but {} labels", rows.len(), labels.len())));
    }
    if !has_both_classes(&(0..labels.len()).collect::<Vec<_>>(), labels) {
        return Err(Error::input("labels must contain both classes"));
    }
    let per_seed = config
        .seeds
        .par_iter()
        .map(|&seed| evaluate_seed(rows, labels, config, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_results(per_seed))
}

/// Labels for `ids`, in that order. Every id must be labeled.
pub fn align_labels(ids: &[String], labels: &Labels) -> Result<Vec<u8>> {
    ids.iter()
        .map(|id| {
            labels
                .get(id)
                .copied()
                .ok_or_else(|| Error::input(format!("no label for graph \"{id}\"")))
        })
        .collect()
}

/// Embedding parameter varied by [`sensitivity_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    KMax,
    D,
    Tau,
    TMax,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::KMax => "kmax",
            SweepParam::D => "d",
            SweepParam::Tau => "tau",
            SweepParam::TMax => "tmax",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &EmbeddingParams, value: f64) -> Result<EmbeddingParams> {
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::input(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        let params = match self {
            SweepParam::KMax => EmbeddingParams { k_max: count()?, ..*base },
            SweepParam::D => EmbeddingParams { d: count()?, ..*base },
            SweepParam::Tau => EmbeddingParams { tau: value, ..*base },
            SweepParam::TMax => EmbeddingParams { t_max: value, ..*base },
        };
        params.validate()?;
        Ok(params)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kmax" | "k_max" => Ok(SweepParam::KMax),
            "d" => Ok(SweepParam::D),
            "tau" => Ok(SweepParam::Tau),
            "tmax" | "t_max" => Ok(SweepParam::TMax),
            other => Err(Error::input(format!("unknown sweep parameter \"{other}\""))),
        }
    }
}

/// One `(parameter, values)` axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// Parses `name=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| Error::input(format!("grid \"{s}\" must look like name=v1,v2")))?;
        let param = name.parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::input(format!("grid \"{s}\": \"{v}\" is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::input(format!("grid \"{s}\" has no values")));
        }
        Ok(SweepAxis { param, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub param: SweepParam,
    pub value: f64,
    pub mean_auc: f64,
    pub std_error: f64,
}

/// Embeds and evaluates the collection once per grid value, varying one
/// parameter at a time with the others held at `base`.
pub fn sensitivity_sweep(
    collection: &GraphCollection,
    base: &EmbeddingParams,
    grid: &[SweepAxis],
    config: &EvalConfig,
    policy: ErrorPolicy,
) -> Result<Vec<SensitivityRow>> {
    if grid.is_empty() || grid.iter().any(|a| a.values.is_empty()) {
        return Err(Error::input("sensitivity grid is empty"));
    }
    let labels = collection
        .labels
        .as_ref()
        .ok_or_else(|| Error::input("dataset has no labels"))?;
    // validate the whole grid before any compute
    for axis in grid {
        for &value in &axis.values {
            axis.param.apply(base, value)?;
        }
    }
    let mut rows = Vec::new();
    for axis in grid {
        for &value in &axis.values {
            let params = axis.param.apply(base, value)?;
            log::info!("sweep {}={value}", axis.param.name());
            let table = embed_dataset(collection, &params, policy)?;
            let y = align_labels(&table.ids, labels)?;
            let report = evaluate(&table.rows, &y, config)?;
            rows.push(SensitivityRow {
                param: axis.param,
                value,
                mean_auc: report.mean_auc,
                std_error: report.std_error,
            });
        }
    }
    Ok(rows)
}

/// `param,value,mean_auc,stderr`.
pub fn write_sensitivity_csv<W: Write>(mut out: W, rows: &[SensitivityRow]) -> std::io::Result<()> {
    writeln!(out, "param,value,mean_auc,stderr")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.param.name(), r.value, r.mean_auc, r.std_error)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn auc_pairwise(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            for (j, &yj) in labels.iter().enumerate() {
                if yi == 1 && yj == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn split_sizes_and_determinism() {
        let (train, test) = train_test_split(10, 0.2, 0).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        assert!(train.iter().all(|i| !test.contains(i)));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(train_test_split(10, 0.2, 0).unwrap(), (train, test));

        assert_eq!(train_test_split(2, 0.01, 3).unwrap().1.len(), 1);
        assert_eq!(train_test_split(2, 0.99, 3).unwrap().0.len(), 1);
        assert!(train_test_split(1, 0.2, 0).is_err());
    }

    #[test]
    fn seeds_give_distinct_test_sets() {
        let sets: HashSet<Vec<usize>> = (0..10).map(|s| train_test_split(100, 0.2, s).unwrap().1).collect();
        assert!(sets.len() >= 9);
    }

    #[test]
    fn symmetric_data_has_zero_intercept() {
        let rows = vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]];
        let labels = [0, 1, 1, 0];
        let model = fit_logistic_regression(&rows, &labels, &EvalConfig::default()).unwrap();
        assert!(model.intercept.abs() < 1e-6);
        let rows = vec![vec![-1.0], vec![1.0]];
        let model = fit_logistic_regression(&rows, &[0, 1], &EvalConfig::default()).unwrap();
        assert!(model.intercept.abs() < 1e-6);
        assert!(model.weights[0] > 0.0);
    }

    /// Gradient of the objective the solver documents, in standardized coordinates.
    fn objective_gradient(rows: &[Vec<f64>], labels: &[u8], model: &LogisticModel, c: f64) -> f64 {
        let (mean, scale) = column_moments(rows, rows[0].len());
        let n = rows.len() as f64;
        let w_std: Vec<f64> = model.weights.iter().zip(&scale).map(|(w, s)| w * s).collect();
        let mut grad = vec![0.0; w_std.len() + 1];
        for (x, &y) in rows.iter().zip(labels) {
            let r = sigmoid(model.decision(x).unwrap()) - f64::from(y);
            for j in 0..w_std.len() {
                grad[j] += r * (x[j] - mean[j]) / scale[j] / n;
            }
            grad[w_std.len()] += r / n;
        }
        for j in 0..w_std.len() {
            grad[j] += w_std[j] / (c * n);
        }
        grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    #[test]
    fn converged_gradient_within_tolerance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] - 0.5 * r[1] + rng.gen_range(-1.0..1.0) > 0.0))
            .collect();
        let config = EvalConfig::default();
        let model = fit_logistic_regression(&rows, &labels, &config).unwrap();
        assert!(objective_gradient(&rows, &labels, &model, config.l2_strength) <= 1e-6);
        let again = fit_logistic_regression(&rows, &labels, &config).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn separable_toy_ranks_perfectly() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![0.1, 1.0], vec![3.0, 3.0], vec![4.0, 2.5], vec![2.5, 4.0]];
        let labels = [0, 0, 0, 1, 1, 1];
        let model = fit_logistic_regression(&rows, &labels, &EvalConfig::default()).unwrap();
        let scores = predict_scores(&model, &rows).unwrap();
        assert_eq!(auc(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn fit_errors() {
        let config = EvalConfig::default();
        assert!(matches!(
            fit_logistic_regression(&[vec![1.0], vec![2.0]], &[1, 1], &config),
            Err(Error::Input(_))
        ));
        let tight = EvalConfig { max_iterations: 1, tolerance: 1e-30, ..config };
        assert!(matches!(
            fit_logistic_regression(&[vec![1.0], vec![2.0], vec![0.5]], &[1, 0, 1], &tight),
            Err(Error::Numeric { .. })
        ));
    }

    #[test]
    fn prediction_basics() {
        let zero = LogisticModel { weights: vec![0.0, 0.0], intercept: 0.0 };
        assert_eq!(predict_scores(&zero, &[vec![3.0, -9.0]]).unwrap(), vec![0.5]);
        assert!(predict_scores(&zero, &[vec![1.0]]).is_err());
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) > 1.0 - 1e-15);
        let model = LogisticModel { weights: vec![0.7, -0.2], intercept: 0.1 };
        let x = vec![0.3, 0.9];
        let shifted: Vec<f64> = x.iter().zip(&model.weights).map(|(a, w)| a + 2.0 * w).collect();
        let s = predict_scores(&model, &[x, shifted]).unwrap();
        assert!(s[1] > s[0]);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.9], &[1, 0]).unwrap(), 0.0);
        assert_eq!(auc(&[0.5; 4], &[1, 0, 1, 0]).unwrap(), 0.5);
        assert!(auc(&[0.5, 0.2], &[1, 1]).is_err());
        assert!(auc(&[0.5, 0.2], &[1, 2]).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let n = 60;
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let constant = vec![vec![0.3, 0.3]; n];
        let report = evaluate(&constant, &labels, &EvalConfig::default()).unwrap();
        assert!(report.per_seed.iter().all(|r| r.auc == 0.5));
        assert_eq!(report.mean_auc, 0.5);

        let informative: Vec<Vec<f64>> = labels.iter().enumerate().map(|(i, &y)| vec![f64::from(y) * 2.0 - 1.0, (i % 7) as f64]).collect();
        let report = evaluate(&informative, &labels, &EvalConfig::default()).unwrap();
        assert_eq!(report.mean_auc, 1.0);
        assert_eq!(report.per_seed.len(), 10);

        let noisy: Vec<Vec<f64>> = (0..n).map(|i| vec![((i * 37) % 11) as f64, ((i * 13) % 5) as f64]).collect();
        let report = evaluate(&noisy, &labels, &EvalConfig::default()).unwrap();
        let lo = report.per_seed.iter().map(|r| r.auc).fold(f64::INFINITY, f64::min);
        let hi = report.per_seed.iter().map(|r| r.auc).fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= report.mean_auc && report.mean_auc <= hi);
    }

    #[test]
    fn evaluate_retries_unbalanced_splits() {
        // one positive in 20: most 80/20 splits put it in train, leaving a single-class test set
        let mut labels = vec![0u8; 20];
        labels[7] = 1;
        labels[3] = 1;
        let rows: Vec<Vec<f64>> = labels.iter().map(|&y| vec![f64::from(y)]).collect();
        let config = EvalConfig { seeds: vec![0, 1, 2], ..Default::default() };
        match evaluate(&rows, &labels, &config) {
            Ok(report) => assert!(report.per_seed.iter().all(|r| r.auc == 1.0)),
            Err(e) => assert!(e.to_string().contains("retries")),
        }
    }

    #[test]
    fn sweep_grid_parsing() {
        let axis: SweepAxis = "d=5,25".parse().unwrap();
        assert_eq!(axis, SweepAxis { param: SweepParam::D, values: vec![5.0, 25.0] });
        assert!("d".parse::<SweepAxis>().is_err());
        assert!("foo=1".parse::<SweepAxis>().is_err());
        assert!("tau=a".parse::<SweepAxis>().is_err());
        let base = EmbeddingParams::default();
        assert!(SweepParam::KMax.apply(&base, 2.5).is_err());
        assert_eq!(SweepParam::KMax.apply(&base, 3.0).unwrap().k_max, 3);
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise(
            data in prop::collection::vec((0u8..12, 0u8..2), 2..100)
        ) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| f64::from(*s) / 4.0).collect();
            let labels: Vec<u8> = data.iter().map(|(_, y)| *y).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            prop_assert_eq!(auc(&scores, &labels).unwrap(), auc_pairwise(&scores, &labels));
        }
    }
}
