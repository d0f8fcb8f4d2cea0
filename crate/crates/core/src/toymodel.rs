//! A 1-D two-class model small enough to solve by hand, used to check that
//! nearest-neighbor averaging compensates a misplaced decision boundary.
//!
//! Setup: positions are uniform on (0,1). Under the skewed-triangular
//! distribution the blue class has probability 1-x at position x, so the
//! optimal decision boundary is 0.5. A base classifier `c_s` puts its
//! boundary at `0.5 - c` instead, off by the offset `c`, with a linear
//! regime of half-width `d` around it. Conditioned on a training point
//! falling within `a` of the boundary, the probability that this nearest
//! neighbor is blue is exactly `0.5 + c`: the neighbor votes toward the
//! correct side, and a blend `w_q * c_s + (1 - w_q) * c_nn` with
//! `w_q > 0.5` flips only queries inside the linear regime.
//!
//! Coordinate note: the source material states the marginal both as
//! uniform and as position-proportional, and places the query at three
//! differently-written positions; the derivation's integrals fix the
//! convention used here (uniform marginal, boundary at `0.5 - c`). The
//! headline value `0.5 + c` is independent of the reflection chosen.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyDistribution {
    /// p(blue | position x) = 1 - x.
    SkewedTriangular,
    /// p(blue | position x) = 0.5; the nearest neighbor carries no signal.
    Uniform,
}

impl ToyDistribution {
    pub fn blue_prob(self, x: f64) -> f64 {
        match self {
            ToyDistribution::SkewedTriangular => 1.0 - x,
            ToyDistribution::Uniform => 0.5,
        }
    }
}

impl std::fmt::Display for ToyDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ToyDistribution::SkewedTriangular => "skewed_triangular",
            ToyDistribution::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for ToyDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "skewed_triangular" | "skewed-triangular" | "triangular" => {
                Ok(ToyDistribution::SkewedTriangular)
            }
            "uniform" => Ok(ToyDistribution::Uniform),
            other => Err(Error::Argument(format!("unknown distribution '{other}'"))),
        }
    }
}

/// Configuration of one Monte-Carlo run. `c` is the boundary offset from
/// the optimal 0.5 (the query sits at `0.5 - c`), `d` the half-width of
/// the classifier's linear regime, `a` the half-width of the neighbor
/// conditioning window, `n` the number of training points per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModelConfig {
    pub distribution: ToyDistribution,
    pub c: f64,
    pub d: f64,
    pub a: f64,
    pub w_q: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ToyModelConfig {
    fn default() -> Self {
        Self {
            distribution: ToyDistribution::SkewedTriangular,
            c: 0.1,
            d: 0.02,
            a: 0.04,
            w_q: 0.88,
            n: 50,
            trials: 110_000,
            seed: 42,
        }
    }
}

impl ToyModelConfig {
    /// The perturbed boundary position, where `c_s` is undecided.
    pub fn boundary(&self) -> f64 {
        0.5 - self.c
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || !(self.d > 0.0) || !(self.a > 0.0) {
            return Err(Error::Argument("need finite c and d > 0, a > 0".into()));
        }
        let b = self.boundary();
        if b - self.d <= 0.0 || b + self.d >= 1.0 {
            return Err(Error::Argument(format!(
                "linear regime [{}, {}] leaves (0,1)",
                b - self.d,
                b + self.d
            )));
        }
        if b - self.a <= 0.0 || b + self.a >= 1.0 {
            return Err(Error::Argument(format!(
                "neighbor window [{}, {}] leaves (0,1)",
                b - self.a,
                b + self.a
            )));
        }
        if !(self.w_q > 0.5 && self.w_q <= 1.0) {
            return Err(Error::Argument(format!(
                "w_q {} not in (0.5, 1]",
                self.w_q
            )));
        }
        if self.n < 1 || self.trials < 1 {
            return Err(Error::Argument("n and trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// The base classifier's blue probability: 0 below the linear regime,
/// 1 above it, and a straight line through (center, 0.5) inside.
pub fn c_s(x: f64, center: f64, d: f64) -> f64 {
    if x < center - d {
        0.0
    } else if x > center + d {
        1.0
    } else {
        (0.5 * (1.0 + (x - center) / d)).clamp(0.0, 1.0)
    }
}

/// Index of the nearest training position; distance ties go to the
/// smaller position.
fn nearest_index(x: f64, positions: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &p) in positions.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) => {
                let (db, dp) = ((positions[b] - x).abs(), (p - x).abs());
                if dp < db || (dp == db && p < positions[b]) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// The idealized one-neighbor classifier: the distribution's blue
/// probability at the nearest training position. Note it evaluates the
/// true conditional at that position; the sampled label plays no role.
pub fn c_nn(x: f64, positions: &[f64], distribution: ToyDistribution) -> Result<f64> {
    let i = nearest_index(x, positions)
        .ok_or_else(|| Error::Argument("empty training set".into()))?;
    Ok(distribution.blue_prob(positions[i]))
}

/// The blend `w_q * c_s + (1 - w_q) * c_nn`; only meaningful for
/// `w_q > 0.5`, where the base classifier keeps control outside its
/// linear regime.
pub fn c_la(
    x: f64,
    center: f64,
    d: f64,
    positions: &[f64],
    distribution: ToyDistribution,
    w_q: f64,
) -> Result<f64> {
    if !(w_q > 0.5 && w_q <= 1.0) {
        return Err(Error::Argument(format!("w_q {w_q} not in (0.5, 1]")));
    }
    Ok(w_q * c_s(x, center, d) + (1.0 - w_q) * c_nn(x, positions, distribution)?)
}

/// Monte-Carlo estimate of the conditional blue probability of the
/// nearest neighbor at the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NnBlueEstimate {
    pub mc_estimate: f64,
    /// Binomial standard error over the conditioned trials.
    pub mc_stderr: f64,
    pub analytic: f64,
    pub conditioned_trials: usize,
    pub total_trials: usize,
}

/// Places the query at the boundary, samples `n` uniform training
/// positions per trial, keeps trials whose nearest neighbor falls within
/// `a` of the boundary, and estimates the probability that this
/// neighbor's sampled class is blue. Analytically this is `0.5 + c` for
/// the skewed-triangular distribution and 0.5 for the uniform one. Each
/// trial runs on its own RNG stream, so trial results do not depend on
/// the trial order.
pub fn estimate_nn_blue_prob(config: &ToyModelConfig) -> Result<NnBlueEstimate> {
    config.validate()?;
    let boundary = config.boundary();
    let mut conditioned = 0usize;
    let mut blue = 0usize;
    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(trial as u64);
        let mut nn_pos = f64::NAN;
        let mut nn_dist = f64::INFINITY;
        for _ in 0..config.n {
            let p: f64 = rng.random_range(0.0..1.0);
            let dist = (p - boundary).abs();
            // ties to the smaller position, matching c_nn
            if dist < nn_dist || (dist == nn_dist && p < nn_pos) {
                nn_dist = dist;
                nn_pos = p;
            }
        }
        if nn_dist <= config.a {
            conditioned += 1;
            // only the neighbor's class matters; sample it lazily
            let is_blue =
                rng.random_range(0.0..1.0) < config.distribution.blue_prob(nn_pos);
            blue += is_blue as usize;
        }
    }
    if conditioned == 0 {
        return Err(Error::Argument(format!(
            "no trial produced a neighbor within {} of the boundary; raise n (now {}) or a",
            config.a, config.n
        )));
    }
    let mc = blue as f64 / conditioned as f64;
    let stderr = (mc * (1.0 - mc) / conditioned as f64).sqrt();
    let analytic = match config.distribution {
        ToyDistribution::SkewedTriangular => 0.5 + config.c,
        ToyDistribution::Uniform => 0.5,
    };
    Ok(NnBlueEstimate {
        mc_estimate: mc,
        mc_stderr: stderr,
        analytic,
        conditioned_trials: conditioned,
        total_trials: config.trials,
    })
}

/// One CSV row per estimate: `c,d,a,n_trials,mc_estimate,mc_stderr,analytic`
/// where `n_trials` counts the conditioned trials behind the estimate.
pub fn write_estimate_csv<W: Write>(
    rows: &[(ToyModelConfig, NnBlueEstimate)],
    sink: &mut W,
) -> Result<()> {
    writeln!(sink, "c,d,a,n_trials,mc_estimate,mc_stderr,analytic")?;
    for (config, est) in rows {
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            config.c,
            config.d,
            config.a,
            est.conditioned_trials,
            est.mc_estimate,
            est.mc_stderr,
            est.analytic
        )?;
    }
    Ok(())
}

/// Best 1-D threshold for "blue if x < t" on labeled points: scans the
/// midpoints of consecutive sorted positions plus one sentinel on each
/// side, minimizing training errors; equal-error candidates resolve to
/// the threshold nearest 0.5, then to the smaller one. Returns the
/// threshold and its error count.
pub fn fit_threshold(positions: &[f64], blue: &[bool]) -> Result<(f64, usize)> {
    if positions.len() < 2 || positions.len() != blue.len() {
        return Err(Error::Argument("need >= 2 labeled points".into()));
    }
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&i, &j| positions[i].total_cmp(&positions[j]));
    let sorted: Vec<(f64, bool)> = order.iter().map(|&i| (positions[i], blue[i])).collect();
    let n = sorted.len();
    let total_blue = sorted.iter().filter(|p| p.1).count();

    // candidate i predicts the first i sorted points blue
    let candidate = |i: usize| -> f64 {
        if i == 0 {
            sorted[0].0 / 2.0
        } else if i == n {
            (sorted[n - 1].0 + 1.0) / 2.0
        } else {
            (sorted[i - 1].0 + sorted[i].0) / 2.0
        }
    };
    let mut best_t = candidate(0);
    let mut best_errors = total_blue; // i = 0: every blue point misread
    let mut blue_prefix = 0usize;
    for i in 1..=n {
        blue_prefix += sorted[i - 1].1 as usize;
        let red_prefix = i - blue_prefix;
        let errors = red_prefix + (total_blue - blue_prefix);
        let t = candidate(i);
        let better = errors < best_errors
            || (errors == best_errors
                && ((t - 0.5).abs() < (best_t - 0.5).abs()
                    || ((t - 0.5).abs() == (best_t - 0.5).abs() && t < best_t)));
        if better {
            best_errors = errors;
            best_t = t;
        }
    }
    Ok((best_t, best_errors))
}

/// Median absolute offset of the fitted threshold from the optimal
/// boundary 0.5, for one training-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftRow {
    pub n: usize,
    pub median_abs_offset: f64,
    /// Signed offsets, one per seed, in seed order.
    pub offsets: Vec<f64>,
}

fn median_abs(offsets: &[f64]) -> f64 {
    let mut magnitudes: Vec<f64> = offsets.iter().map(|o| o.abs()).collect();
    magnitudes.sort_by(f64::total_cmp);
    let m = magnitudes.len();
    if m % 2 == 1 {
        magnitudes[m / 2]
    } else {
        (magnitudes[m / 2 - 1] + magnitudes[m / 2]) / 2.0
    }
}

/// For each training-set size, repeatedly samples labeled points, fits the
/// error-minimizing threshold, and reports how far it sits from the
/// optimal boundary. Larger samples should pin the boundary down more
/// tightly under the skewed-triangular distribution; the uniform
/// distribution gives no signal and is reported as-is. Cell (n, seed)
/// uses the seed's RNG on stream n.
pub fn boundary_drift(
    distribution: ToyDistribution,
    n_values: &[usize],
    seeds: &[u64],
) -> Result<Vec<DriftRow>> {
    if n_values.is_empty() || seeds.is_empty() {
        return Err(Error::Argument("need at least one n and one seed".into()));
    }
    if n_values.iter().any(|&n| n < 2) {
        return Err(Error::Argument("each n must be >= 2".into()));
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut offsets = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let mut positions = Vec::with_capacity(n);
            let mut blue = Vec::with_capacity(n);
            for _ in 0..n {
                let p: f64 = rng.random_range(0.0..1.0);
                let is_blue = rng.random_range(0.0..1.0) < distribution.blue_prob(p);
                positions.push(p);
                blue.push(is_blue);
            }
            let (t, _) = fit_threshold(&positions, &blue)?;
            offsets.push(t - 0.5);
        }
        rows.push(DriftRow {
            n,
            median_abs_offset: median_abs(&offsets),
            offsets,
        });
    }
    Ok(rows)
}

/// CSV: `n,median_abs_offset`, one row per training-set size.
pub fn write_drift_csv<W: Write>(rows: &[DriftRow], sink: &mut W) -> Result<()> {
    writeln!(sink, "n,median_abs_offset")?;
    for row in rows {
        writeln!(sink, "{},{}", row.n, row.median_abs_offset)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn blue_prob_matches_stated_conditionals() {
        assert_eq!(ToyDistribution::SkewedTriangular.blue_prob(0.3), 0.7);
        assert_eq!(ToyDistribution::SkewedTriangular.blue_prob(1.0), 0.0);
        assert_eq!(ToyDistribution::Uniform.blue_prob(0.123), 0.5);
    }

    #[test]
    fn c_s_hand_values() {
        let (center, d) = (0.4, 0.02);
        assert_eq!(c_s(center, center, d), 0.5);
        assert_eq!(c_s(center + d, center, d), 1.0);
        assert_eq!(c_s(center - 2.0 * d, center, d), 0.0);
        assert_eq!(c_s(0.0, center, d), 0.0);
        assert_eq!(c_s(1.0, center, d), 1.0);
    }

    proptest! {
        #[test]
        fn c_s_monotone_and_bounded(
            x1 in 0.0f64..1.0,
            x2 in 0.0f64..1.0,
            center in 0.1f64..0.9,
            d in 0.001f64..0.09,
        ) {
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let a = c_s(lo, center, d);
            let b = c_s(hi, center, d);
            prop_assert!(a <= b);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn c_la_with_full_weight_is_c_s(
            x in 0.0f64..1.0,
            center in 0.1f64..0.9,
            pos in 0.0f64..1.0,
        ) {
            let got = c_la(x, center, 0.02, &[pos], ToyDistribution::SkewedTriangular, 1.0).unwrap();
            prop_assert_eq!(got, c_s(x, center, 0.02));
        }

        #[test]
        fn outside_linear_regime_base_classifier_decides(
            center in 0.2f64..0.8,
            w_q in 0.501f64..1.0,
            pos in 0.0f64..1.0,
            off in 0.03f64..0.2,
            side in proptest::bool::ANY,
        ) {
            let d = 0.02;
            let x = if side { center + off } else { center - off };
            if !(0.0..=1.0).contains(&x) {
                return Ok(());
            }
            let base = c_s(x, center, d);
            let blended = c_la(x, center, d, &[pos], ToyDistribution::SkewedTriangular, w_q).unwrap();
            // threshold-0.5 class must agree: base is saturated at 0 or 1
            prop_assert_eq!(base >= 0.5, blended >= 0.5);
        }
    }

    #[test]
    fn c_nn_uses_position_not_label() {
        assert_eq!(
            c_nn(0.0, &[0.3], ToyDistribution::SkewedTriangular).unwrap(),
            0.7
        );
        assert_eq!(c_nn(0.9, &[0.3, 0.5], ToyDistribution::Uniform).unwrap(), 0.5);
        // query sitting on a training point is its own neighbor
        assert_eq!(
            c_nn(0.25, &[0.8, 0.25], ToyDistribution::SkewedTriangular).unwrap(),
            0.75
        );
        // equidistant neighbors resolve to the smaller position
        assert_eq!(
            c_nn(0.3, &[0.4, 0.2], ToyDistribution::SkewedTriangular).unwrap(),
            0.8
        );
        assert!(c_nn(0.5, &[], ToyDistribution::Uniform).is_err());
    }

    #[test]
    fn c_la_hand_value() {
        // c_s = 0.5 at the center; neighbor at 0.3 gives c_nn = 0.7
        let got = c_la(0.4, 0.4, 0.02, &[0.3], ToyDistribution::SkewedTriangular, 0.75).unwrap();
        assert!((got - 0.55).abs() < 1e-12);
        assert!(c_la(0.4, 0.4, 0.02, &[0.3], ToyDistribution::SkewedTriangular, 0.5).is_err());
    }

    #[test]
    fn config_validation_guards_intervals() {
        let mut config = ToyModelConfig::default();
        assert!(config.validate().is_ok());
        config.c = 0.49; // boundary at 0.01, window escapes (0,1)
        assert!(config.validate().is_err());
        config = ToyModelConfig {
            w_q: 0.5,
            ..ToyModelConfig::default()
        };
        assert!(config.validate().is_err());
        config = ToyModelConfig {
            d: 0.0,
            ..ToyModelConfig::default()
        };
        assert!(config.validate().is_err());
    }

    fn quick_config(c: f64, distribution: ToyDistribution) -> ToyModelConfig {
        ToyModelConfig {
            distribution,
            c,
            trials: 30_000,
            ..ToyModelConfig::default()
        }
    }

    #[test]
    fn symmetric_case_estimates_half() {
        let est = estimate_nn_blue_prob(&quick_config(0.0, ToyDistribution::SkewedTriangular))
            .unwrap();
        assert_eq!(est.analytic, 0.5);
        assert!((est.mc_estimate - 0.5).abs() <= 3.0 * est.mc_stderr);
    }

    #[test]
    fn offset_case_estimates_half_plus_c() {
        let est = estimate_nn_blue_prob(&quick_config(0.1, ToyDistribution::SkewedTriangular))
            .unwrap();
        assert_eq!(est.analytic, 0.6);
        assert!(
            (est.mc_estimate - 0.6).abs() <= 3.0 * est.mc_stderr,
            "mc {} stderr {}",
            est.mc_estimate,
            est.mc_stderr
        );
    }

    #[test]
    fn uniform_distribution_estimates_half_regardless_of_offset() {
        for c in [0.0, 0.2] {
            let est = estimate_nn_blue_prob(&quick_config(c, ToyDistribution::Uniform)).unwrap();
            assert_eq!(est.analytic, 0.5);
            assert!((est.mc_estimate - 0.5).abs() <= 3.0 * est.mc_stderr);
        }
    }

    #[test]
    fn estimate_is_deterministic() {
        let a = estimate_nn_blue_prob(&quick_config(0.05, ToyDistribution::SkewedTriangular))
            .unwrap();
        let b = estimate_nn_blue_prob(&quick_config(0.05, ToyDistribution::SkewedTriangular))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hopeless_conditioning_reports_guidance() {
        let config = ToyModelConfig {
            n: 1,
            a: 1e-12,
            trials: 20,
            ..ToyModelConfig::default()
        };
        let err = estimate_nn_blue_prob(&config).unwrap_err();
        assert!(err.to_string().contains("raise n"));
    }

    #[test]
    fn threshold_two_point_case() {
        let (t, errors) = fit_threshold(&[0.1, 0.9], &[true, false]).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(errors, 0);
    }

    #[test]
    fn threshold_saturated_cases() {
        // all blue: best threshold above every point
        let (t, errors) = fit_threshold(&[0.2, 0.6], &[true, true]).unwrap();
        assert_eq!(t, 0.8);
        assert_eq!(errors, 0);
        // all red: best threshold below every point
        let (t, errors) = fit_threshold(&[0.2, 0.6], &[false, false]).unwrap();
        assert_eq!(t, 0.1);
        assert_eq!(errors, 0);
    }

    #[test]
    fn threshold_tie_prefers_nearest_half_then_smaller() {
        // inverted labels: both extreme thresholds cost one error;
        // they are equidistant from 0.5, so the smaller wins
        let (t, errors) = fit_threshold(&[0.2, 0.8], &[false, true]).unwrap();
        assert_eq!(errors, 1);
        assert_eq!(t, 0.1);
    }

    #[test]
    fn threshold_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..100 {
            let n = rng.random_range(2..20);
            let positions: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let blue: Vec<bool> = (0..n).map(|_| rng.random_range(0.0..1.0) < 0.5).collect();
            let (t, errors) = fit_threshold(&positions, &blue).unwrap();
            // brute force over the same candidate set
            let mut sorted = positions.clone();
            sorted.sort_by(f64::total_cmp);
            let mut candidates = vec![sorted[0] / 2.0, (sorted[n - 1] + 1.0) / 2.0];
            for w in sorted.windows(2) {
                candidates.push((w[0] + w[1]) / 2.0);
            }
            let count_errors = |t: f64| -> usize {
                positions
                    .iter()
                    .zip(&blue)
                    .filter(|(&p, &b)| if p < t { !b } else { b })
                    .count()
            };
            let best = candidates.iter().map(|&c| count_errors(c)).min().unwrap();
            assert_eq!(errors, best);
            assert_eq!(count_errors(t), best);
        }
    }

    #[test]
    fn drift_shrinks_with_more_data() {
        let seeds: Vec<u64> = (0..15).collect();
        let rows = boundary_drift(ToyDistribution::SkewedTriangular, &[10, 1000], &seeds).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(
            rows[1].median_abs_offset < rows[0].median_abs_offset,
            "n=1000 offset {} vs n=10 offset {}",
            rows[1].median_abs_offset,
            rows[0].median_abs_offset
        );
    }

    #[test]
    fn drift_is_deterministic_and_validated() {
        let seeds = [1u64, 2, 3];
        let a = boundary_drift(ToyDistribution::Uniform, &[20], &seeds).unwrap();
        let b = boundary_drift(ToyDistribution::Uniform, &[20], &seeds).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].offsets.len(), 3);
        assert!(boundary_drift(ToyDistribution::Uniform, &[1], &seeds).is_err());
        assert!(boundary_drift(ToyDistribution::Uniform, &[], &seeds).is_err());
    }

    #[test]
    fn csv_layouts() {
        let config = ToyModelConfig {
            c: 0.1,
            trials: 10_000,
            ..ToyModelConfig::default()
        };
        let est = estimate_nn_blue_prob(&config).unwrap();
        let mut buf = Vec::new();
        write_estimate_csv(&[(config, est.clone())], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "c,d,a,n_trials,mc_estimate,mc_stderr,analytic"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("0.1,0.02,0.04,"));
        assert!(row.ends_with(",0.6"));

        let rows = vec![DriftRow {
            n: 100,
            median_abs_offset: 0.025,
            offsets: vec![0.025],
        }];
        let mut buf = Vec::new();
        write_drift_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,median_abs_offset\n100,0.025\n"
        );
    }

    #[test]
    fn estimator_is_unbiased_for_asymmetric_windows_too() {
        // the conditional expectation argument does not depend on a or n:
        // the NN offset is symmetric around the boundary and the blue
        // probability is linear, so the window mean is the boundary value
        let config = ToyModelConfig {
            c: 0.2,
            a: 0.015,
            n: 200,
            trials: 60_000,
            ..ToyModelConfig::default()
        };
        let est = estimate_nn_blue_prob(&config).unwrap();
        assert!(
            (est.mc_estimate - 0.7).abs() <= 3.0 * est.mc_stderr,
            "mc {} stderr {} conditioned {}",
            est.mc_estimate,
            est.mc_stderr,
            est.conditioned_trials
        );
    }
}
