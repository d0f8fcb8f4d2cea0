//! C ABI for the lasenn toolkit.
//!
//! Conventions: every fallible call returns a [`LasennStatus`] and writes
//! its result through out-pointers; `LASENN_STATUS_OK` is 0. On failure a
//! thread-local message is set, readable via [`lasenn_last_error_message`]
//! until the next failing call on the same thread. Handles returned by
//! `_load`/`_build` calls are opaque and must be released with the
//! matching `_free`; `_free` accepts null. Pointers passed in must stay
//! valid for the duration of the call only.
//!
//! The public header `include/lasenn.h` is regenerated by the build
//! script; do not edit it by hand.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use lasenn::classifier::load_model;
use lasenn::combiner::{combine, predict};
use lasenn::tensor::{load_labels, load_tensor};
use lasenn::toymodel::{estimate_nn_blue_prob, ToyDistribution, ToyModelConfig};
use lasenn::{Error, KnnIndex, LabeledCorpus, LasennConfig, Metric, MlpClassifier};

/// Result code of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LasennStatus {
    LasennStatusOk = 0,
    LasennStatusNullArgument = 1,
    LasennStatusInvalidArgument = 2,
    LasennStatusIoError = 3,
    LasennStatusFormatError = 4,
    LasennStatusRuntimeError = 5,
}

/// Distance used for neighbor lookup.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LasennMetric {
    LasennMetricSquaredL2 = 0,
    LasennMetricCosine = 1,
}

/// Outcome of one combined prediction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LasennPrediction {
    pub predicted_class: u32,
    pub native_class: u32,
    /// Nonzero when the neighbor average changed the predicted class.
    pub changed: u8,
}

/// Labeled training corpus (embeddings, outputs, labels).
pub struct LasennCorpus(LabeledCorpus);

/// Exact nearest-neighbor index over corpus embeddings.
pub struct LasennIndex(KnnIndex);

/// Trained classifier checkpoint.
pub struct LasennModel(MlpClassifier);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn fail(status: LasennStatus, error: impl std::fmt::Display) -> LasennStatus {
    let message = CString::new(error.to_string())
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    status
}

fn fail_error(error: Error) -> LasennStatus {
    let status = match &error {
        Error::Io(_) => LasennStatus::LasennStatusIoError,
        Error::Format(_) => LasennStatus::LasennStatusFormatError,
        Error::Validation(_) | Error::Argument(_) | Error::Config(_) => {
            LasennStatus::LasennStatusInvalidArgument
        }
        Error::Training(_) => LasennStatus::LasennStatusRuntimeError,
    };
    fail(status, error)
}

/// Message of the most recent failing call on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn lasenn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Toolkit version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lasenn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `path` must be a valid NUL-terminated string.
unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, LasennStatus> {
    if path.is_null() {
        return Err(fail(LasennStatus::LasennStatusNullArgument, "null path"));
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail(
            LasennStatus::LasennStatusInvalidArgument,
            "path is not valid UTF-8",
        )),
    }
}

/// Loads a corpus from its three artifact files.
///
/// # Safety
/// The path arguments must be valid NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasenn_corpus_load(
    embeddings_path: *const c_char,
    outputs_path: *const c_char,
    labels_path: *const c_char,
    out: *mut *mut LasennCorpus,
) -> LasennStatus {
    if out.is_null() {
        return fail(LasennStatus::LasennStatusNullArgument, "null out pointer");
    }
    let embeddings = match path_arg(embeddings_path).map(load_tensor) {
        Ok(Ok(t)) => t,
        Ok(Err(e)) => return fail_error(e),
        Err(status) => return status,
    };
    let outputs = match path_arg(outputs_path).map(load_tensor) {
        Ok(Ok(t)) => t,
        Ok(Err(e)) => return fail_error(e),
        Err(status) => return status,
    };
    let labels = match path_arg(labels_path).map(load_labels) {
        Ok(Ok(l)) => l,
        Ok(Err(e)) => return fail_error(e),
        Err(status) => return status,
    };
    match LabeledCorpus::new(embeddings, outputs, labels) {
        Ok(corpus) => {
            *out = Box::into_raw(Box::new(LasennCorpus(corpus)));
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}

/// # Safety
/// `corpus` must be a pointer returned by `lasenn_corpus_load` (or null).
#[no_mangle]
pub unsafe extern "C" fn lasenn_corpus_free(corpus: *mut LasennCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `corpus` must be a valid corpus handle.
#[no_mangle]
pub unsafe extern "C" fn lasenn_corpus_rows(corpus: *const LasennCorpus) -> u64 {
    if corpus.is_null() {
        return 0;
    }
    (*corpus).0.rows() as u64
}

/// # Safety
/// `corpus` must be a valid corpus handle.
#[no_mangle]
pub unsafe extern "C" fn lasenn_corpus_num_classes(corpus: *const LasennCorpus) -> u32 {
    if corpus.is_null() {
        return 0;
    }
    (*corpus).0.labels.num_classes()
}

/// Builds an exact nearest-neighbor index over the corpus embeddings.
///
/// # Safety
/// `corpus` must be a valid corpus handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasenn_index_build(
    corpus: *const LasennCorpus,
    metric: LasennMetric,
    out: *mut *mut LasennIndex,
) -> LasennStatus {
    if corpus.is_null() || out.is_null() {
        return fail(LasennStatus::LasennStatusNullArgument, "null argument");
    }
    let metric = match metric {
        LasennMetric::LasennMetricSquaredL2 => Metric::SquaredL2,
        LasennMetric::LasennMetricCosine => Metric::Cosine,
    };
    match KnnIndex::build(&(*corpus).0.embeddings, metric) {
        Ok(index) => {
            *out = Box::into_raw(Box::new(LasennIndex(index)));
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}

/// # Safety
/// `index` must be a pointer returned by `lasenn_index_build` (or null).
#[no_mangle]
pub unsafe extern "C" fn lasenn_index_free(index: *mut LasennIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Loads a trained classifier checkpoint.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasenn_model_load(
    path: *const c_char,
    out: *mut *mut LasennModel,
) -> LasennStatus {
    if out.is_null() {
        return fail(LasennStatus::LasennStatusNullArgument, "null out pointer");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_model(path) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(LasennModel(model)));
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}

/// # Safety
/// `model` must be a pointer returned by `lasenn_model_load` (or null).
#[no_mangle]
pub unsafe extern "C" fn lasenn_model_free(model: *mut LasennModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Convex combination of a query output vector with the mean of its
/// neighbors' output vectors: `out[i] = w_q*query[i] + (1-w_q)*mean_i`.
/// `neighbor_outputs` holds `num_neighbors` rows of `len` floats each,
/// row-major. `out_combined` receives `len` doubles.
///
/// # Safety
/// All pointers must reference buffers of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn lasenn_combine(
    query_outputs: *const f32,
    len: usize,
    neighbor_outputs: *const f32,
    num_neighbors: usize,
    w_q: f64,
    out_combined: *mut f64,
) -> LasennStatus {
    if query_outputs.is_null() || neighbor_outputs.is_null() || out_combined.is_null() {
        return fail(LasennStatus::LasennStatusNullArgument, "null argument");
    }
    let query = std::slice::from_raw_parts(query_outputs, len);
    let flat = std::slice::from_raw_parts(neighbor_outputs, len * num_neighbors);
    let neighbors: Vec<&[f32]> = flat.chunks(len.max(1)).collect();
    match combine(query, &neighbors, w_q) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), out_combined, len);
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}

/// Runs the full prediction rule for one query given its embedding and
/// the model's output vector for it.
///
/// # Safety
/// Handles must be valid; `embedding` and `outputs` must reference
/// buffers of the stated lengths; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasenn_predict(
    corpus: *const LasennCorpus,
    index: *const LasennIndex,
    embedding: *const f32,
    embedding_len: usize,
    outputs: *const f32,
    outputs_len: usize,
    k: usize,
    w_q: f64,
    out: *mut LasennPrediction,
) -> LasennStatus {
    if corpus.is_null() || index.is_null() || embedding.is_null() || outputs.is_null() || out.is_null()
    {
        return fail(LasennStatus::LasennStatusNullArgument, "null argument");
    }
    let corpus = &(*corpus).0;
    let index = &(*index).0;
    let config = LasennConfig {
        k,
        w_q,
        metric: index.metric(),
        layer_index: None,
    };
    let embedding = std::slice::from_raw_parts(embedding, embedding_len);
    let outputs = std::slice::from_raw_parts(outputs, outputs_len);
    match predict(&config, corpus, index, embedding, outputs) {
        Ok(prediction) => {
            *out = LasennPrediction {
                predicted_class: prediction.predicted_class as u32,
                native_class: prediction.native_class as u32,
                changed: prediction.changed as u8,
            };
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}

/// Embeds raw features through the model, finds neighbors, and combines.
/// `layer` is the 1-based hidden layer; 0 selects the last hidden layer.
/// With `raw_logits` nonzero the pre-softmax outputs are combined.
///
/// # Safety
/// Handles must be valid; `features` must reference `features_len`
/// doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasenn_pipeline_predict(
    model: *const LasennModel,
    corpus: *const LasennCorpus,
    index: *const LasennIndex,
    features: *const f64,
    features_len: usize,
    k: usize,
    w_q: f64,
    layer: usize,
    raw_logits: u8,
    out: *mut LasennPrediction,
) -> LasennStatus {
    if model.is_null() || corpus.is_null() || index.is_null() || features.is_null() || out.is_null()
    {
        return fail(LasennStatus::LasennStatusNullArgument, "null argument");
    }
    let model = &(*model).0;
    let features = std::slice::from_raw_parts(features, features_len);
    let layer = if layer == 0 {
        model.num_hidden_layers()
    } else {
        layer
    };
    if layer < 1 || layer > model.num_hidden_layers() {
        return fail(
            LasennStatus::LasennStatusInvalidArgument,
            format!("layer {layer} outside 1..={}", model.num_hidden_layers()),
        );
    }
    let acts = match model.forward(features) {
        Ok(acts) => acts,
        Err(e) => return fail_error(e),
    };
    let embedding: Vec<f32> = acts.hidden[layer - 1].iter().map(|&v| v as f32).collect();
    let outputs: Vec<f32> = if raw_logits != 0 {
        acts.logits.iter().map(|&v| v as f32).collect()
    } else {
        acts.probs.iter().map(|&v| v as f32).collect()
    };
    lasenn_predict(
        corpus,
        index,
        embedding.as_ptr(),
        embedding.len(),
        outputs.as_ptr(),
        outputs.len(),
        k,
        w_q,
        out,
    )
}

/// Monte-Carlo check of the 1-D toy model: estimates the probability that
/// the nearest neighbor at the shifted boundary is blue, with its
/// binomial standard error and the analytic value (`0.5 + c` for the
/// skewed-triangular distribution, 0.5 for the uniform one).
///
/// # Safety
/// The three out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lasenn_toy_estimate(
    c: f64,
    d: f64,
    a: f64,
    n: u64,
    trials: u64,
    seed: u64,
    uniform: u8,
    out_estimate: *mut f64,
    out_stderr: *mut f64,
    out_analytic: *mut f64,
) -> LasennStatus {
    if out_estimate.is_null() || out_stderr.is_null() || out_analytic.is_null() {
        return fail(LasennStatus::LasennStatusNullArgument, "null out pointer");
    }
    let config = ToyModelConfig {
        distribution: if uniform != 0 {
            ToyDistribution::Uniform
        } else {
            ToyDistribution::SkewedTriangular
        },
        c,
        d,
        a,
        w_q: 0.88,
        n: n as usize,
        trials: trials as usize,
        seed,
    };
    match estimate_nn_blue_prob(&config) {
        Ok(est) => {
            *out_estimate = est.mc_estimate;
            *out_stderr = est.mc_stderr;
            *out_analytic = est.analytic;
            LasennStatus::LasennStatusOk
        }
        Err(e) => fail_error(e),
    }
}
