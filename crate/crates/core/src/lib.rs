//! Latent-space nearest-neighbor augmented classifier inference.
//!
//! The core prediction rule (LaSeNN) averages a query sample's own network
//! output with the outputs of its k nearest training neighbors, where
//! neighbors are found in the latent space of an intermediate classifier
//! layer. The crate bundles everything needed to study that rule end to
//! end on synthetic data: a small MLP classifier with manual
//! backpropagation, exact kNN search, the prediction combiner, targeted
//! adversarial attacks, label-noise injection, decision-boundary
//! diagnostics, and a Monte-Carlo simulator for a 1D two-class model of
//! boundary drift.

pub mod adversarial;
pub mod classifier;
pub mod cli;
pub mod combiner;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod knn;
pub mod tensor;
pub mod toymodel;

pub use adversarial::{AttackConfig, AttackEvaluation, AttackKind};
pub use classifier::{Dataset, MlpClassifier, SyntheticSpec, TrainConfig, TrainTrace};
pub use combiner::{BatchSummary, CombinedPrediction, LasennConfig};
pub use config::{derive_seed, ExperimentConfig};
pub use diagnostics::{DensityReport, ProjectionHistogram};
pub use error::{Error, Result};
pub use knn::{KnnIndex, Metric, Neighbor, NeighborSet};
pub use tensor::{LabelVector, LabeledCorpus, TensorMatrix};
pub use toymodel::{ToyDistribution, ToyModelConfig};
