//! RBF-kernel support-vector classifier for coverage-hole detection.
//!
//! Sign convention: the decision value grows with signal quality. A sample is
//! predicted covered (label 1) when `decision > threshold` and a coverage hole
//! (label 0) otherwise. Internally the dual uses `+1` for covered and `-1`
//! for coverage holes. All reported rates treat the coverage hole as the
//! positive class.

mod cv;
mod model_io;
mod roc;
mod smo;

pub use cv::{cross_validate, CvCell, CvResult};
pub use roc::{
    confusion_at, metrics, operating_point, roc_curve, roc_from_scores, ConfusionMatrix, Metrics,
    OperatingPoint, RocCurve, RocPoint,
};
pub use smo::{train, SmoParams, TrainStats};

use crate::dataset::{Normalization, LABEL_CH, LABEL_COVERED};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvcModel {
    /// In normalized feature space.
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i`.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// C
    pub penalty: f64,
    pub decision_threshold: f64,
    /// Maps raw features into the space of `support_vectors`.
    pub normalization: Option<Normalization>,
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

impl SvcModel {
    /// Model without support vectors that always predicts `label`; used when
    /// the training data has a single class.
    pub fn constant(label: u8, normalization: Option<Normalization>) -> SvcModel {
        SvcModel {
            support_vectors: Vec::new(),
            dual_coefficients: Vec::new(),
            bias: if label == LABEL_COVERED { 1.0 } else { -1.0 },
            gamma: 1.0,
            penalty: 1.0,
            decision_threshold: 0.0,
            normalization,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.support_vectors
            .first()
            .map(Vec::len)
            .or_else(|| self.normalization.as_ref().map(Normalization::dim))
    }

    /// `sum_i coef_i * exp(-gamma * |sv_i - x|^2) + bias` on a normalized input.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, c)| c * rbf(self.gamma, sv, x))
            .sum();
        Ok(sum + self.bias)
    }

    /// Decision value of a raw (unnormalized) feature vector.
    pub fn decision_raw(&self, raw: &[f64]) -> Result<f64> {
        match &self.normalization {
            Some(n) => {
                if n.dim() != raw.len() {
                    return Err(Error::DimensionMismatch {
                        expected: n.dim(),
                        got: raw.len(),
                    });
                }
                self.decision_value(&n.apply(raw))
            }
            None => self.decision_value(raw),
        }
    }

    pub fn classify(&self, decision: f64) -> u8 {
        if decision > self.decision_threshold {
            LABEL_COVERED
        } else {
            LABEL_CH
        }
    }

    pub fn predict_raw(&self, raw: &[f64]) -> Result<u8> {
        Ok(self.classify(self.decision_raw(raw)?))
    }

    pub fn with_threshold(mut self, threshold: f64) -> SvcModel {
        self.decision_threshold = threshold;
        self
    }

    pub fn to_text(&self) -> String {
        model_io::to_text(self)
    }

    pub fn from_text(text: &str) -> Result<SvcModel> {
        model_io::from_text(text)
    }
}
