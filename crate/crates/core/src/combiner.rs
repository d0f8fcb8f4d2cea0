//! The LaSeNN prediction rule.
//!
//! A query's network output is averaged with the outputs of its k nearest
//! training neighbors, `w_q * C(X_q) + (1 - w_q) * mean(C(X_nn))`, and the
//! class is the argmax of the combined vector. The rule is agnostic to
//! whether the supplied output vectors are probabilities or raw logits; it
//! averages whatever the corpus ships.

use std::io::Write;

use crate::error::{Error, Result};
use crate::knn::{KnnIndex, Metric, NeighborSet};
use crate::tensor::LabeledCorpus;

/// Parameters of the prediction rule. Defaults are k=3, w_q=0.88 and
/// squared L2, with neighbors drawn from the last hidden layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LasennConfig {
    pub k: usize,
    /// Weight of the query's own output, in [0, 1].
    pub w_q: f64,
    pub metric: Metric,
    /// 1-based hidden layer feeding the index; `None` means the last
    /// hidden layer of whatever model exports the corpus.
    pub layer_index: Option<usize>,
}

impl Default for LasennConfig {
    fn default() -> Self {
        Self {
            k: 3,
            w_q: 0.88,
            metric: Metric::SquaredL2,
            layer_index: None,
        }
    }
}

impl LasennConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.w_q) {
            return Err(Error::Argument(format!("w_q {} not in [0,1]", self.w_q)));
        }
        Ok(())
    }
}

/// Outcome of one combined prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPrediction {
    pub combined_output: Vec<f64>,
    pub predicted_class: usize,
    /// Argmax of the query's own output, without neighbors.
    pub native_class: usize,
    pub neighbors: NeighborSet,
    pub changed: bool,
}

/// Batch accuracy summary; `delta_acc = acc_lasenn - acc_native`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub acc_lasenn: f64,
    pub acc_native: f64,
    pub delta_acc: f64,
    pub same_pred_fraction: f64,
}

/// Index of the maximal element, ties towards the lower index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn argmax_f32(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Elementwise `w_q * query + (1 - w_q) * mean(neighbors)`, accumulated
/// in f64.
pub fn combine(query_logits: &[f32], neighbor_logits: &[&[f32]], w_q: f64) -> Result<Vec<f64>> {
    if neighbor_logits.is_empty() {
        return Err(Error::Argument("neighbor list is empty".into()));
    }
    if !(0.0..=1.0).contains(&w_q) {
        return Err(Error::Argument(format!("w_q {w_q} not in [0,1]")));
    }
    let dim = query_logits.len();
    if neighbor_logits.iter().any(|n| n.len() != dim) {
        return Err(Error::Argument("output vector length mismatch".into()));
    }
    let inv_k = 1.0 / neighbor_logits.len() as f64;
    let mut out = vec![0.0f64; dim];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0f64;
        for n in neighbor_logits {
            sum += n[j] as f64;
        }
        *slot = w_q * query_logits[j] as f64 + (1.0 - w_q) * (sum * inv_k);
    }
    Ok(out)
}

/// Runs the full rule for one query: neighbor lookup, combination, argmax.
pub fn predict(
    config: &LasennConfig,
    corpus: &LabeledCorpus,
    index: &KnnIndex,
    query_embedding: &[f32],
    query_logits: &[f32],
) -> Result<CombinedPrediction> {
    config.validate()?;
    if query_logits.len() != corpus.logits.cols() {
        return Err(Error::Argument(format!(
            "query output length {} does not match corpus {}",
            query_logits.len(),
            corpus.logits.cols()
        )));
    }
    let neighbors = index.query(query_embedding, config.k, None)?;
    let neighbor_logits: Vec<&[f32]> = neighbors.rows().map(|r| corpus.logits.row(r)).collect();
    let combined_output = combine(query_logits, &neighbor_logits, config.w_q)?;
    let predicted_class = argmax(&combined_output);
    let native_class = argmax_f32(query_logits);
    Ok(CombinedPrediction {
        combined_output,
        predicted_class,
        native_class,
        changed: predicted_class != native_class,
        neighbors,
    })
}

/// Predicts every row of a labeled query set and reports accuracy with
/// and without neighbors, their difference, and the fraction of queries
/// whose class did not change.
pub fn predict_batch(
    config: &LasennConfig,
    corpus: &LabeledCorpus,
    index: &KnnIndex,
    queries: &LabeledCorpus,
) -> Result<(Vec<CombinedPrediction>, BatchSummary)> {
    if queries.rows() == 0 {
        return Err(Error::Argument("empty query set".into()));
    }
    let mut predictions = Vec::with_capacity(queries.rows());
    let (mut hit_lasenn, mut hit_native, mut same) = (0usize, 0usize, 0usize);
    for i in 0..queries.rows() {
        let p = predict(
            config,
            corpus,
            index,
            queries.embeddings.row(i),
            queries.logits.row(i),
        )?;
        let label = queries.labels.get(i) as usize;
        hit_lasenn += (p.predicted_class == label) as usize;
        hit_native += (p.native_class == label) as usize;
        same += (p.predicted_class == p.native_class) as usize;
        predictions.push(p);
    }
    let n = queries.rows() as f64;
    let acc_lasenn = hit_lasenn as f64 / n;
    let acc_native = hit_native as f64 / n;
    let summary = BatchSummary {
        acc_lasenn,
        acc_native,
        delta_acc: acc_lasenn - acc_native,
        same_pred_fraction: same as f64 / n,
    };
    Ok((predictions, summary))
}

/// CSV export: one row per query
/// (`query_id,label,native_class,lasenn_class,changed,nn1,...,nnk`)
/// followed by a summary line.
pub fn write_predictions_csv<W: Write>(
    sink: &mut W,
    predictions: &[CombinedPrediction],
    labels: &[u32],
    summary: &BatchSummary,
    k: usize,
) -> Result<()> {
    write!(sink, "query_id,label,native_class,lasenn_class,changed")?;
    for j in 1..=k {
        write!(sink, ",nn{j}")?;
    }
    writeln!(sink)?;
    for (i, p) in predictions.iter().enumerate() {
        write!(
            sink,
            "{},{},{},{},{}",
            i, labels[i], p.native_class, p.predicted_class, p.changed
        )?;
        for j in 0..k {
            match p.neighbors.entries.get(j) {
                Some(n) => write!(sink, ",{}", n.row)?,
                None => write!(sink, ",")?,
            }
        }
        writeln!(sink)?;
    }
    writeln!(
        sink,
        "summary,acc_lasenn={},acc_native={},delta_acc={},same_pred={}",
        summary.acc_lasenn, summary.acc_native, summary.delta_acc, summary.same_pred_fraction
    )?;
    Ok(())
}
