//! Metrics that probe WHY neighbor averaging helps: neighborhood pureness,
//! neighbor distance statistics and their correlation, and 1-D projections
//! of the embedding space onto the line between two class means.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::combiner::{predict_batch, CombinedPrediction, LasennConfig};
use crate::error::{Error, Result};
use crate::knn::{KnnIndex, NeighborSet};
use crate::tensor::{LabelVector, LabeledCorpus, TensorMatrix};

/// Neighborhood statistics over a labeled query set. Conditional means are
/// `None` when their category is empty; the correlation is `None` when one
/// series is constant (correlation undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// Pearson correlation between per-query pureness and mean neighbor
    /// distance.
    pub corr_p_avg_l2: Option<f64>,
    /// Two-sided p-value of that correlation under a t-distribution with
    /// N-2 degrees of freedom.
    pub p_value: Option<f64>,
    /// Fraction of queries whose combined prediction equals the native one.
    pub same_pred: f64,
    /// Mean neighbor distance over queries the native model got right.
    pub avg_l2_corr: Option<f64>,
    /// Mean neighbor distance over queries the native model got wrong.
    pub avg_l2_wrong: Option<f64>,
    /// Mean neighbor distance over queries whose prediction changed.
    pub avg_l2_change: Option<f64>,
    pub avg_l2_all: f64,
}

/// Number of neighbors sharing the query's label.
pub fn pureness(neighbors: &NeighborSet, labels: &LabelVector, query_label: u32) -> usize {
    neighbors
        .rows()
        .filter(|&r| labels.get(r) == query_label)
        .count()
}

/// Mean true (non-squared) L2 distance from the query to its neighbors,
/// accumulated in f64.
pub fn avg_l2(neighbors: &NeighborSet, embeddings: &TensorMatrix, query: &[f32]) -> f64 {
    if neighbors.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0f64;
    for r in neighbors.rows() {
        let mut sq = 0.0f64;
        for (&a, &b) in embeddings.row(r).iter().zip(query) {
            let d = a as f64 - b as f64;
            sq += d * d;
        }
        sum += sq.sqrt();
    }
    sum / neighbors.len() as f64
}

/// Pearson correlation coefficient, or `None` if either series is
/// constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Two-sided p-value for a Pearson correlation over n pairs, via the exact
/// t-statistic with n-2 degrees of freedom.
pub fn correlation_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 || !r.is_finite() || r.abs() > 1.0 {
        return None;
    }
    if r.abs() == 1.0 {
        return Some(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some(2.0 * (1.0 - dist.cdf(t.abs())))
}

fn mean_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Runs the combined predictor over the query set and aggregates
/// per-query pureness and neighbor-distance statistics.
pub fn density_report(
    config: &LasennConfig,
    corpus: &LabeledCorpus,
    index: &KnnIndex,
    queries: &LabeledCorpus,
) -> Result<DensityReport> {
    if queries.rows() < 3 {
        return Err(Error::Argument(
            "need at least 3 query points for a correlation".into(),
        ));
    }
    let (predictions, summary) = predict_batch(config, corpus, index, queries)?;
    let mut p_series = Vec::with_capacity(queries.rows());
    let mut d_series = Vec::with_capacity(queries.rows());
    let mut dist_correct = Vec::new();
    let mut dist_wrong = Vec::new();
    let mut dist_changed = Vec::new();
    for (i, pred) in predictions.iter().enumerate() {
        let label = queries.labels.get(i);
        let p = pureness(&pred.neighbors, &corpus.labels, label) as f64;
        let d = avg_l2(&pred.neighbors, &corpus.embeddings, queries.embeddings.row(i));
        p_series.push(p);
        d_series.push(d);
        if pred.native_class == label as usize {
            dist_correct.push(d);
        } else {
            dist_wrong.push(d);
        }
        if pred.changed {
            dist_changed.push(d);
        }
    }
    let corr = pearson(&p_series, &d_series);
    let p_value = corr.and_then(|r| correlation_p_value(r, queries.rows()));
    Ok(DensityReport {
        corr_p_avg_l2: corr,
        p_value,
        same_pred: summary.same_pred_fraction,
        avg_l2_corr: mean_of(&dist_correct),
        avg_l2_wrong: mean_of(&dist_wrong),
        avg_l2_change: mean_of(&dist_changed),
        avg_l2_all: mean_of(&d_series).unwrap_or(0.0),
    })
}

/// One row per metric, missing categories written as NA.
pub fn write_density_csv<W: Write>(report: &DensityReport, sink: &mut W) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    writeln!(sink, "metric,value")?;
    writeln!(sink, "corr_P_avgL2,{}", opt(report.corr_p_avg_l2))?;
    writeln!(sink, "p_value,{}", opt(report.p_value))?;
    writeln!(sink, "same_pred,{}", report.same_pred)?;
    writeln!(sink, "avgL2_corr,{}", opt(report.avg_l2_corr))?;
    writeln!(sink, "avgL2_wrong,{}", opt(report.avg_l2_wrong))?;
    writeln!(sink, "avgL2_change,{}", opt(report.avg_l2_change))?;
    writeln!(sink, "avgL2_all,{}", report.avg_l2_all)?;
    Ok(())
}

/// Histogram of scalar projections onto the line from the mean of
/// `class_a` to the mean of its nearest other class. The third series
/// counts projected samples whose combined prediction differs from the
/// native one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionHistogram {
    pub class_a: u32,
    pub class_b: u32,
    /// bins + 1 strictly increasing edges spanning the observed
    /// projections of both classes.
    pub bin_edges: Vec<f64>,
    pub counts_a: Vec<usize>,
    pub counts_b: Vec<usize>,
    pub counts_changed: Vec<usize>,
}

fn class_mean(embeddings: &TensorMatrix, labels: &LabelVector, class: u32) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; embeddings.cols()];
    let mut count = 0usize;
    for i in 0..embeddings.rows() {
        if labels.get(i) == class {
            for (s, &v) in sum.iter_mut().zip(embeddings.row(i)) {
                *s += v as f64;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    for s in &mut sum {
        *s /= count as f64;
    }
    Some(sum)
}

/// Projects every sample of `class_a` and of its nearest-mean other class
/// onto the unit vector between the two means (origin at the `class_a`
/// mean) and bins the projections into `bins` equal-width bins over their
/// joint range.
pub fn projection_histogram(
    embeddings: &TensorMatrix,
    labels: &LabelVector,
    native_preds: &[usize],
    lasenn_preds: &[usize],
    class_a: u32,
    bins: usize,
) -> Result<ProjectionHistogram> {
    if bins == 0 {
        return Err(Error::Argument("need at least one bin".into()));
    }
    let n = embeddings.rows();
    if labels.len() != n || native_preds.len() != n || lasenn_preds.len() != n {
        return Err(Error::Argument("row count mismatch across inputs".into()));
    }
    let mean_a = class_mean(embeddings, labels, class_a)
        .ok_or_else(|| Error::Argument(format!("class {class_a} has no samples")))?;

    let mut class_b = None;
    let mut best_dist = f64::INFINITY;
    for c in 0..labels.num_classes() {
        if c == class_a {
            continue;
        }
        if let Some(mean_c) = class_mean(embeddings, labels, c) {
            let dist: f64 = mean_a
                .iter()
                .zip(&mean_c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist < best_dist {
                best_dist = dist;
                class_b = Some((c, mean_c));
            }
        }
    }
    let (class_b, mean_b) =
        class_b.ok_or_else(|| Error::Argument("no second class present".into()))?;
    if best_dist == 0.0 {
        return Err(Error::Argument(
            "class means coincide; projection direction undefined".into(),
        ));
    }
    let direction: Vec<f64> = mean_a
        .iter()
        .zip(&mean_b)
        .map(|(a, b)| (b - a) / best_dist)
        .collect();

    // (projection, is_class_a, changed) for every sample of the two classes
    let mut projected = Vec::new();
    for i in 0..n {
        let label = labels.get(i);
        if label != class_a && label != class_b {
            continue;
        }
        let t: f64 = embeddings
            .row(i)
            .iter()
            .zip(&mean_a)
            .zip(&direction)
            .map(|((&x, m), u)| (x as f64 - m) * u)
            .sum();
        projected.push((t, label == class_a, native_preds[i] != lasenn_preds[i]));
    }
    let lo = projected.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = projected.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Argument(
            "all projections coincide; histogram range is empty".into(),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| {
            if i == bins {
                hi
            } else {
                lo + i as f64 * width
            }
        })
        .collect();
    let mut counts_a = vec![0usize; bins];
    let mut counts_b = vec![0usize; bins];
    let mut counts_changed = vec![0usize; bins];
    for &(t, is_a, changed) in &projected {
        let bin = (((t - lo) / width) as usize).min(bins - 1);
        if is_a {
            counts_a[bin] += 1;
        } else {
            counts_b[bin] += 1;
        }
        if changed {
            counts_changed[bin] += 1;
        }
    }
    Ok(ProjectionHistogram {
        class_a,
        class_b,
        bin_edges,
        counts_a,
        counts_b,
        counts_changed,
    })
}

/// Convenience wrapper: uses the prediction list's native and combined
/// classes as the two series.
pub fn projection_histogram_from_predictions(
    queries: &LabeledCorpus,
    predictions: &[CombinedPrediction],
    class_a: u32,
    bins: usize,
) -> Result<ProjectionHistogram> {
    let native: Vec<usize> = predictions.iter().map(|p| p.native_class).collect();
    let lasenn: Vec<usize> = predictions.iter().map(|p| p.predicted_class).collect();
    projection_histogram(
        &queries.embeddings,
        &queries.labels,
        &native,
        &lasenn,
        class_a,
        bins,
    )
}

pub fn write_histogram_csv<W: Write>(hist: &ProjectionHistogram, sink: &mut W) -> Result<()> {
    writeln!(sink, "bin_lo,bin_hi,count_a,count_b,count_changed")?;
    for i in 0..hist.counts_a.len() {
        writeln!(
            sink,
            "{},{},{},{},{}",
            hist.bin_edges[i],
            hist.bin_edges[i + 1],
            hist.counts_a[i],
            hist.counts_b[i],
            hist.counts_changed[i]
        )?;
    }
    Ok(())
}

/// Minimal static bar chart: class-a bars, class-b bars, and a line-free
/// overlay of changed-prediction bars, one group per bin.
pub fn write_histogram_svg<W: Write>(hist: &ProjectionHistogram, sink: &mut W) -> Result<()> {
    let bins = hist.counts_a.len();
    let (width, height, margin) = (900.0f64, 420.0f64, 40.0f64);
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;
    let max_count = hist
        .counts_a
        .iter()
        .chain(&hist.counts_b)
        .chain(&hist.counts_changed)
        .copied()
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    writeln!(
        sink,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )?;
    writeln!(
        sink,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    )?;
    let group_w = plot_w / bins as f64;
    let bar_w = group_w / 3.0;
    let colors = ["#4878a8", "#e49444", "#d1615d"];
    let series = [&hist.counts_a, &hist.counts_b, &hist.counts_changed];
    for (s, counts) in series.iter().enumerate() {
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let h = plot_h * c as f64 / max_count;
            let x = margin + i as f64 * group_w + s as f64 * bar_w;
            let y = margin + plot_h - h;
            writeln!(
                sink,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"{}\"/>",
                colors[s]
            )?;
        }
    }
    writeln!(
        sink,
        "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        margin + plot_h,
        margin + plot_w,
        margin + plot_h
    )?;
    writeln!(
        sink,
        "<text x=\"{margin}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">class {} vs class {} (changed predictions in red)</text>",
        hist.class_a, hist.class_b
    )?;
    writeln!(sink, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{generate_synthetic, train, MlpClassifier, SyntheticSpec, TrainConfig};
    use crate::knn::{KnnIndex, Metric, Neighbor};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neighbor_set(rows: &[usize]) -> NeighborSet {
        NeighborSet {
            entries: rows.iter().map(|&row| Neighbor { row, score: 0.0 }).collect(),
            k: rows.len(),
        }
    }

    #[test]
    fn pureness_counts_matching_labels() {
        let labels = LabelVector::new(vec![1, 1, 1, 0, 2], 3).unwrap();
        assert_eq!(pureness(&neighbor_set(&[0, 1, 2]), &labels, 1), 3);
        assert_eq!(pureness(&neighbor_set(&[3, 4]), &labels, 1), 0);
        assert_eq!(pureness(&neighbor_set(&[0, 1, 3]), &labels, 1), 2);
    }

    #[test]
    fn avg_l2_hand_cases() {
        let emb = TensorMatrix::new(2, 2, vec![1.0, 0.0, 3.0, 0.0]).unwrap();
        let q = [0.0f32, 0.0];
        assert_eq!(avg_l2(&neighbor_set(&[0]), &emb, &[1.0, 0.0]), 0.0);
        assert!((avg_l2(&neighbor_set(&[0, 1]), &emb, &q) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn avg_l2_matches_scalar_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let emb_data: Vec<f32> = (0..50 * 6).map(|_| rng.random_range(-3.0f32..3.0)).collect();
        let emb = TensorMatrix::new(50, 6, emb_data).unwrap();
        let q: Vec<f32> = (0..6).map(|_| rng.random_range(-3.0f32..3.0)).collect();
        let rows: Vec<usize> = (0..7).map(|_| rng.random_range(0..50)).collect();
        let got = avg_l2(&neighbor_set(&rows), &emb, &q);
        let mut expect = 0.0f64;
        for &r in &rows {
            let mut sq = 0.0f64;
            for d in 0..6 {
                let diff = emb.row(r)[d] as f64 - q[d] as f64;
                sq += diff * diff;
            }
            expect += sq.sqrt();
        }
        expect /= rows.len() as f64;
        assert!((got - expect).abs() < 1e-9);
    }

    #[test]
    fn pearson_textbook_recomputation() {
        let xs = [3.0, 1.0, 2.0, 0.0, 4.0];
        let ys = [1.2, 3.1, 2.0, 4.4, 0.3];
        let r = pearson(&xs, &ys).unwrap();
        // direct formula: r = (n*Sxy - Sx*Sy) / sqrt((n*Sxx - Sx^2)(n*Syy - Sy^2))
        let n = 5.0;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let sxx: f64 = xs.iter().map(|a| a * a).sum();
        let syy: f64 = ys.iter().map(|b| b * b).sum();
        let expect = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
        assert!((r - expect).abs() < 1e-9);
        assert!(r < -0.9);
    }

    #[test]
    fn pearson_degenerate_and_symmetry() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        let xs = [0.5, 1.5, -0.3, 2.2];
        let ys = [1.1, 0.2, 0.9, 1.4];
        let a = pearson(&xs, &ys).unwrap();
        let b = pearson(&ys, &xs).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn p_value_known_case() {
        // r=0.5 over n=5 pairs gives t=1.0 on 3 degrees of freedom,
        // two-sided p close to 0.3910
        let p = correlation_p_value(0.5, 5).unwrap();
        assert!((p - 0.3910).abs() < 2e-4, "p = {p}");
        assert_eq!(correlation_p_value(1.0, 5), Some(0.0));
        assert!(correlation_p_value(0.5, 2).is_none());
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            seed in 0u64..1000,
            scale in 0.01f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(3..30);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            if let (Some(r), xs2) = (
                pearson(&xs, &ys),
                xs.iter().map(|&x| scale * x + shift).collect::<Vec<_>>(),
            ) {
                let r2 = pearson(&xs2, &ys).unwrap();
                prop_assert!((r - r2).abs() < 1e-9);
            }
        }
    }

    fn labeled(emb: Vec<f32>, rows: usize, dims: usize, labels: Vec<u32>, c: u32) -> LabeledCorpus {
        let n = labels.len();
        LabeledCorpus::new(
            TensorMatrix::new(rows, dims, emb).unwrap(),
            TensorMatrix::new(n, c as usize, vec![1.0 / c as f32; n * c as usize]).unwrap(),
            LabelVector::new(labels, c).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn density_report_needs_three_points() {
        let corpus = labeled(vec![0.0, 1.0, 2.0], 3, 1, vec![0, 1, 0], 2);
        let index = KnnIndex::build(&corpus.embeddings, Metric::SquaredL2).unwrap();
        let two = labeled(vec![0.0, 1.0], 2, 1, vec![0, 1], 2);
        assert!(density_report(&LasennConfig::default(), &corpus, &index, &two).is_err());
    }

    #[test]
    fn density_report_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let rows = 40;
        let dims = 3;
        let classes = 3u32;
        let emb: Vec<f32> = (0..rows * dims).map(|_| rng.random_range(-2.0f32..2.0)).collect();
        let logits: Vec<f32> = (0..rows * 3).map(|_| rng.random_range(0.0f32..1.0)).collect();
        let labels: Vec<u32> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
        let corpus = LabeledCorpus::new(
            TensorMatrix::new(rows, dims, emb).unwrap(),
            TensorMatrix::new(rows, 3, logits).unwrap(),
            LabelVector::new(labels, classes).unwrap(),
        )
        .unwrap();
        let index = KnnIndex::build(&corpus.embeddings, Metric::SquaredL2).unwrap();
        let qn = 25;
        let q_emb: Vec<f32> = (0..qn * dims).map(|_| rng.random_range(-2.0f32..2.0)).collect();
        let q_log: Vec<f32> = (0..qn * 3).map(|_| rng.random_range(0.0f32..1.0)).collect();
        let q_lab: Vec<u32> = (0..qn).map(|_| rng.random_range(0..classes)).collect();
        let queries = LabeledCorpus::new(
            TensorMatrix::new(qn, dims, q_emb).unwrap(),
            TensorMatrix::new(qn, 3, q_log).unwrap(),
            LabelVector::new(q_lab, classes).unwrap(),
        )
        .unwrap();

        let config = LasennConfig::default();
        let report = density_report(&config, &corpus, &index, &queries).unwrap();

        // brute-force recomputation from scratch
        let (preds, _) = predict_batch(&config, &corpus, &index, &queries).unwrap();
        let mut ps = Vec::new();
        let mut ds = Vec::new();
        let (mut dc, mut dw, mut dch) = (Vec::new(), Vec::new(), Vec::new());
        let mut same = 0;
        for i in 0..qn {
            let y = queries.labels.get(i);
            let mut matching = 0.0;
            let mut dist_sum = 0.0;
            for r in preds[i].neighbors.rows() {
                if corpus.labels.get(r) == y {
                    matching += 1.0;
                }
                let mut sq = 0.0f64;
                for d in 0..dims {
                    let diff =
                        corpus.embeddings.row(r)[d] as f64 - queries.embeddings.row(i)[d] as f64;
                    sq += diff * diff;
                }
                dist_sum += sq.sqrt();
            }
            let d = dist_sum / preds[i].neighbors.len() as f64;
            ps.push(matching);
            ds.push(d);
            if preds[i].native_class == y as usize {
                dc.push(d);
            } else {
                dw.push(d);
            }
            if preds[i].changed {
                dch.push(d);
            }
            same += (!preds[i].changed) as usize;
        }
        let expect_r = pearson(&ps, &ds).unwrap();
        assert!((report.corr_p_avg_l2.unwrap() - expect_r).abs() < 1e-12);
        assert_eq!(report.same_pred, same as f64 / qn as f64);
        assert!((report.avg_l2_all - ds.iter().sum::<f64>() / qn as f64).abs() < 1e-12);
        let close = |a: Option<f64>, b: &[f64]| match (a, b.is_empty()) {
            (None, true) => true,
            (Some(v), false) => (v - b.iter().sum::<f64>() / b.len() as f64).abs() < 1e-12,
            _ => false,
        };
        assert!(close(report.avg_l2_corr, &dc));
        assert!(close(report.avg_l2_wrong, &dw));
        assert!(close(report.avg_l2_change, &dch));
    }

    #[test]
    fn queries_identical_to_corpus_points_keep_predictions() {
        // every query sits exactly on a corpus point of its class
        let corpus = labeled(
            vec![0.0, 0.0, 0.1, 0.1, 5.0, 5.0, 5.1, 5.1],
            4,
            2,
            vec![0, 0, 1, 1],
            2,
        );
        // make logits decisive per class
        let corpus = LabeledCorpus::new(
            corpus.embeddings.clone(),
            TensorMatrix::new(4, 2, vec![0.9, 0.1, 0.9, 0.1, 0.1, 0.9, 0.1, 0.9]).unwrap(),
            corpus.labels.clone(),
        )
        .unwrap();
        let index = KnnIndex::build(&corpus.embeddings, Metric::SquaredL2).unwrap();
        let config = LasennConfig {
            k: 2,
            ..LasennConfig::default()
        };
        let report = density_report(&config, &corpus, &index, &corpus).unwrap();
        assert_eq!(report.same_pred, 1.0);
        assert_eq!(report.avg_l2_wrong, None);
        assert_eq!(report.avg_l2_change, None);
    }

    #[test]
    fn projection_endpoints_are_zero_and_distance() {
        // class 0 mean at origin, class 1 mean at (3,4): distance 5
        let emb = TensorMatrix::new(
            4,
            2,
            vec![-1.0, 0.0, 1.0, 0.0, 3.0, 3.0, 3.0, 5.0],
        )
        .unwrap();
        let labels = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let preds = vec![0usize; 4];
        let hist = projection_histogram(&emb, &labels, &preds, &preds, 0, 4).unwrap();
        assert_eq!(hist.class_b, 1);
        // project the means by hand: mean_a -> 0, mean_b -> 5
        let lo = *hist.bin_edges.first().unwrap();
        let hi = *hist.bin_edges.last().unwrap();
        // direction (3,4)/5; projections: (-1,0)->-0.6, (1,0)->0.6, (3,3)->4.2, (3,5)->5.8
        assert!((lo - -0.6).abs() < 1e-9);
        assert!((hi - 5.8).abs() < 1e-9);
        assert_eq!(hist.counts_a.iter().sum::<usize>(), 2);
        assert_eq!(hist.counts_b.iter().sum::<usize>(), 2);
        assert_eq!(hist.counts_changed.iter().sum::<usize>(), 0);
    }

    #[test]
    fn projection_rejects_degenerate_means() {
        let emb = TensorMatrix::new(4, 1, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let labels = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let preds = vec![0usize; 4];
        assert!(projection_histogram(&emb, &labels, &preds, &preds, 0, 4).is_err());
        let one_class = LabelVector::new(vec![0, 0, 0, 0], 1).unwrap();
        assert!(projection_histogram(&emb, &one_class, &preds, &preds, 0, 4).is_err());
        assert!(projection_histogram(&emb, &labels, &preds, &preds, 5, 4).is_err());
    }

    #[test]
    fn projection_counts_preserve_sample_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let n = 200;
        let mut emb = Vec::with_capacity(n * 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = (i % 3) as u32;
            let center = [0.0f32, 4.0, 40.0][class as usize];
            emb.push(center + rng.random_range(-1.0f32..1.0));
            emb.push(rng.random_range(-1.0f32..1.0));
            labels.push(class);
        }
        let emb = TensorMatrix::new(n, 2, emb).unwrap();
        let labels = LabelVector::new(labels, 3).unwrap();
        let native: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let lasenn: Vec<usize> = (0..n).map(|i| if i % 10 == 0 { (i + 1) % 3 } else { i % 3 }).collect();
        let hist = projection_histogram(&emb, &labels, &native, &lasenn, 0, 50).unwrap();
        // class 1 is nearer to class 0 than class 2 is
        assert_eq!(hist.class_b, 1);
        assert_eq!(hist.bin_edges.len(), 51);
        assert!(hist.bin_edges.windows(2).all(|w| w[1] > w[0]));
        let total_a: usize = hist.counts_a.iter().sum();
        let total_b: usize = hist.counts_b.iter().sum();
        assert_eq!(total_a, labels.labels().iter().filter(|&&l| l == 0).count());
        assert_eq!(total_b, labels.labels().iter().filter(|&&l| l == 1).count());
        // changed counts only cover the two projected classes
        let expected_changed = (0..n)
            .filter(|&i| labels.get(i) <= 1 && native[i] != lasenn[i])
            .count();
        assert_eq!(hist.counts_changed.iter().sum::<usize>(), expected_changed);
    }

    #[test]
    fn two_gaussians_put_modes_near_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let per_class = 400;
        let mut emb = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u32 {
            let center = if class == 0 { 0.0f32 } else { 6.0 };
            for _ in 0..per_class {
                emb.push(center + rng.random_range(-1.0f32..1.0));
                emb.push(rng.random_range(-1.0f32..1.0));
                labels.push(class);
            }
        }
        let emb = TensorMatrix::new(2 * per_class, 2, emb).unwrap();
        let labels = LabelVector::new(labels, 2).unwrap();
        let preds = vec![0usize; 2 * per_class];
        let hist = projection_histogram(&emb, &labels, &preds, &preds, 0, 20).unwrap();
        let mode_a = hist.counts_a.iter().enumerate().max_by_key(|(_, &c)| c).unwrap().0;
        let mode_b = hist.counts_b.iter().enumerate().max_by_key(|(_, &c)| c).unwrap().0;
        let center = |bin: usize| (hist.bin_edges[bin] + hist.bin_edges[bin + 1]) / 2.0;
        assert!(center(mode_a).abs() < 1.0, "mode_a at {}", center(mode_a));
        assert!((center(mode_b) - 6.0).abs() < 1.0, "mode_b at {}", center(mode_b));
    }

    #[test]
    fn changed_predictions_gather_between_trained_clusters() {
        let spec = SyntheticSpec {
            num_classes: 2,
            samples_per_class: 300,
            dims: 4,
            cluster_mean_scale: 1.5,
            cluster_stddev: 0.8,
            seed: 90,
        };
        let (train_data, test_data) = generate_synthetic(&spec).unwrap();
        let mut model = MlpClassifier::random(&[4, 12, 8, 2], 91).unwrap();
        train(
            &mut model,
            &train_data,
            &TrainConfig {
                epochs: 25,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let corpus = model.export_corpus(&train_data, 2, false).unwrap();
        let index = KnnIndex::build(&corpus.embeddings, Metric::SquaredL2).unwrap();
        let queries = model.export_corpus(&test_data, 2, false).unwrap();
        let config = LasennConfig {
            w_q: 0.52,
            ..LasennConfig::default()
        };
        let (preds, _) = predict_batch(&config, &corpus, &index, &queries).unwrap();
        let hist = projection_histogram_from_predictions(&queries, &preds, 0, 12).unwrap();
        let changed_total: usize = hist.counts_changed.iter().sum();
        if changed_total >= 10 {
            // changed predictions should sit between the class modes, not
            // out in the tails: the middle half of the projection range
            // holds more than the two outer quarters combined
            let quarter = hist.counts_changed.len() / 4;
            let middle: usize = hist.counts_changed[quarter..3 * quarter].iter().sum();
            assert!(
                middle * 2 > changed_total,
                "middle {} of {} changed",
                middle,
                changed_total
            );
        }
    }

    #[test]
    fn csv_and_svg_render() {
        let report = DensityReport {
            corr_p_avg_l2: Some(-0.4),
            p_value: Some(0.001),
            same_pred: 0.97,
            avg_l2_corr: Some(1.0),
            avg_l2_wrong: Some(1.5),
            avg_l2_change: None,
            avg_l2_all: 1.1,
        };
        let mut buf = Vec::new();
        write_density_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("metric,value\ncorr_P_avgL2,-0.4\n"));
        assert!(text.contains("avgL2_change,NA\n"));

        let hist = ProjectionHistogram {
            class_a: 0,
            class_b: 1,
            bin_edges: vec![0.0, 0.5, 1.0],
            counts_a: vec![3, 1],
            counts_b: vec![0, 4],
            counts_changed: vec![1, 0],
        };
        let mut csv = Vec::new();
        write_histogram_csv(&hist, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(
            csv,
            "bin_lo,bin_hi,count_a,count_b,count_changed\n0,0.5,3,0,1\n0.5,1,1,4,0\n"
        );
        let mut svg = Vec::new();
        write_histogram_svg(&hist, &mut svg).unwrap();
        let svg = String::from_utf8(svg).unwrap();
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        // background plus one bar per nonzero count
        assert_eq!(svg.matches("<rect").count(), 1 + 4);
    }
}
