//! Targeted white-box attacks against the bundled classifier.
//!
//! Three kinds: FGSM (one signed-gradient step of size epsilon), BIA (the
//! iterative extension), and PGD (iterative with a uniform random start
//! inside the ball). All of them descend the cross-entropy toward the
//! target class `(y + 1) mod num_classes`, project onto the L-infinity
//! ball around the original point after every step, and clamp to the
//! feature range. FGSM is exactly BIA with one step of size epsilon, and
//! PGD without its random start is exactly BIA; the code shares one loop
//! so those identities hold bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{Dataset, MlpClassifier};
use crate::combiner::{predict_batch, BatchSummary, CombinedPrediction, LasennConfig};
use crate::error::{Error, Result};
use crate::knn::KnnIndex;
use crate::tensor::{LabeledCorpus, TensorMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    Fgsm,
    Bia,
    Pgd,
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttackKind::Fgsm => "fgsm",
            AttackKind::Bia => "bia",
            AttackKind::Pgd => "pgd",
        })
    }
}

impl std::str::FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fgsm" => Ok(AttackKind::Fgsm),
            "bia" => Ok(AttackKind::Bia),
            "pgd" => Ok(AttackKind::Pgd),
            other => Err(Error::Argument(format!("unknown attack kind '{other}'"))),
        }
    }
}

/// Attack parameters. `epsilon` is the L-infinity radius; `clamp_lo`
/// and `clamp_hi` bound every feature of the perturbed point. Epsilon 0
/// is legal and makes every attack the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub epsilon: f64,
    pub step_size: f64,
    pub num_steps: usize,
    pub random_start: bool,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    pub seed: u64,
}

impl AttackConfig {
    pub fn fgsm(epsilon: f64, clamp_lo: f64, clamp_hi: f64, seed: u64) -> Self {
        Self {
            kind: AttackKind::Fgsm,
            epsilon,
            step_size: epsilon,
            num_steps: 1,
            random_start: false,
            clamp_lo,
            clamp_hi,
            seed,
        }
    }

    pub fn bia(
        epsilon: f64,
        step_size: f64,
        num_steps: usize,
        clamp_lo: f64,
        clamp_hi: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: AttackKind::Bia,
            epsilon,
            step_size,
            num_steps,
            random_start: false,
            clamp_lo,
            clamp_hi,
            seed,
        }
    }

    pub fn pgd(
        epsilon: f64,
        step_size: f64,
        num_steps: usize,
        random_start: bool,
        clamp_lo: f64,
        clamp_hi: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: AttackKind::Pgd,
            epsilon,
            step_size,
            num_steps,
            random_start,
            clamp_lo,
            clamp_hi,
            seed,
        }
    }

    /// Desk-scale defaults scaled from the feature range: epsilon is a
    /// tenth of the range, step a quarter of epsilon, ten steps.
    pub fn defaults_for_range(kind: AttackKind, lo: f64, hi: f64, seed: u64) -> Self {
        let epsilon = 0.15 * (hi - lo);
        match kind {
            AttackKind::Fgsm => Self::fgsm(epsilon, lo, hi, seed),
            AttackKind::Bia => Self::bia(epsilon, epsilon / 4.0, 10, lo, hi, seed),
            AttackKind::Pgd => Self::pgd(epsilon, epsilon / 4.0, 10, true, lo, hi, seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::Argument("epsilon must be finite and >= 0".into()));
        }
        if !self.step_size.is_finite() || self.step_size < 0.0 {
            return Err(Error::Argument("step_size must be finite and >= 0".into()));
        }
        if self.num_steps < 1 {
            return Err(Error::Argument("num_steps must be >= 1".into()));
        }
        if self.step_size > self.epsilon {
            return Err(Error::Argument(format!(
                "step_size {} exceeds epsilon {}",
                self.step_size, self.epsilon
            )));
        }
        if self.kind == AttackKind::Fgsm
            && (self.num_steps != 1 || self.step_size != self.epsilon)
        {
            return Err(Error::Argument(
                "FGSM is a single step of size epsilon".into(),
            ));
        }
        if self.kind != AttackKind::Pgd && self.random_start {
            return Err(Error::Argument(
                "random start is only defined for PGD".into(),
            ));
        }
        if !self.clamp_lo.is_finite() || !self.clamp_hi.is_finite() || self.clamp_lo >= self.clamp_hi
        {
            return Err(Error::Argument("clamp range must be finite with lo < hi".into()));
        }
        Ok(())
    }
}

/// The attacked class: the one after the true class, wrapping around.
pub fn target_label(true_label: u32, num_classes: u32) -> u32 {
    (true_label + 1) % num_classes
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Perturbs one sample. `stream` separates the random-start draws of
/// different samples; batch row i runs on stream i, and [`attack`] uses
/// stream 0.
pub fn attack_sample(
    model: &MlpClassifier,
    x: &[f64],
    true_label: u32,
    config: &AttackConfig,
    stream: u64,
) -> Result<Vec<f64>> {
    config.validate()?;
    if x.len() != model.input_dim() {
        return Err(Error::Argument(format!(
            "input length {} does not match model input {}",
            x.len(),
            model.input_dim()
        )));
    }
    if x.iter().any(|&v| v < config.clamp_lo || v > config.clamp_hi) {
        return Err(Error::Argument("input outside the clamp range".into()));
    }
    let num_classes = model.num_classes() as u32;
    if true_label >= num_classes {
        return Err(Error::Argument(format!("label {true_label} out of range")));
    }
    let target = target_label(true_label, num_classes) as usize;

    let mut current = x.to_vec();
    if config.random_start && config.epsilon > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        for (c, &orig) in current.iter_mut().zip(x) {
            *c = (orig + rng.random_range(-config.epsilon..=config.epsilon))
                .clamp(config.clamp_lo, config.clamp_hi);
        }
    }
    for _ in 0..config.num_steps {
        let grad = model.input_gradient(&current, target)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Validation("non-finite input gradient".into()));
        }
        for ((c, g), &orig) in current.iter_mut().zip(&grad).zip(x) {
            let stepped = *c - config.step_size * sign(*g);
            *c = stepped
                .clamp(orig - config.epsilon, orig + config.epsilon)
                .clamp(config.clamp_lo, config.clamp_hi);
        }
    }
    Ok(current)
}

/// Single-sample convenience wrapper on stream 0.
pub fn attack(
    model: &MlpClassifier,
    x: &[f64],
    true_label: u32,
    config: &AttackConfig,
) -> Result<Vec<f64>> {
    attack_sample(model, x, true_label, config, 0)
}

/// Attacks every row, one RNG stream per row, and repackages the result
/// as a dataset with the original labels.
pub fn attack_dataset(
    model: &MlpClassifier,
    data: &Dataset,
    config: &AttackConfig,
) -> Result<Dataset> {
    if data.rows() == 0 {
        return Err(Error::Argument("empty dataset".into()));
    }
    let mut rows = Vec::with_capacity(data.rows());
    for i in 0..data.rows() {
        let x: Vec<f64> = data.features.row(i).iter().map(|&v| v as f64).collect();
        rows.push(attack_sample(model, &x, data.labels.get(i), config, i as u64)?);
    }
    Dataset::new(TensorMatrix::from_rows_f64(&rows)?, data.labels.clone())
}

/// Result of an attacked evaluation: the perturbed inputs plus both
/// predictors' view of them.
#[derive(Debug, Clone)]
pub struct AttackEvaluation {
    pub attacked: Dataset,
    pub predictions: Vec<CombinedPrediction>,
    pub summary: BatchSummary,
}

/// Crafts attacks against the native model only, then measures native and
/// neighbor-combined accuracy on the identical perturbed inputs. The
/// perturbed embeddings are recomputed through the model at the layer the
/// index was built from.
pub fn evaluate_under_attack(
    model: &MlpClassifier,
    corpus: &LabeledCorpus,
    index: &KnnIndex,
    lasenn_config: &LasennConfig,
    test: &Dataset,
    attack_config: &AttackConfig,
    raw_logits: bool,
) -> Result<AttackEvaluation> {
    let attacked = attack_dataset(model, test, attack_config)?;
    let layer = lasenn_config
        .layer_index
        .unwrap_or_else(|| model.num_hidden_layers());
    let queries = model.export_corpus(&attacked, layer, raw_logits)?;
    let (predictions, summary) = predict_batch(lasenn_config, corpus, index, &queries)?;
    Ok(AttackEvaluation {
        attacked,
        predictions,
        summary,
    })
}
