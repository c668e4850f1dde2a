use std::fmt::Write as _;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::svc::{
    confusion_at, metrics, operating_point, roc_from_scores, ConfusionMatrix, Metrics, OperatingPoint, RocCurve,
    SvcModel,
};

/// Test-set evaluation of a thresholded model.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub roc: RocCurve,
    /// Best g-mean point of the test ROC itself.
    pub roc_optimal: OperatingPoint,
    /// The model's own threshold (picked on validation data).
    pub deployed_threshold: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub optimal_confusion: ConfusionMatrix,
    pub optimal_metrics: Metrics,
}

pub const METRICS_HEADER: &str = "point,threshold,auc,gmean,tpr,fpr,ppv,fnr,accuracy";

fn opt(v: Option<f64>) -> String {
    crate::io::f6(v.unwrap_or(f64::NAN))
}

impl DetectionReport {
    /// Rows `deployed` and `roc_optimal`; `nan` marks an undefined rate.
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from(METRICS_HEADER);
        s.push('\n');
        for (name, thr, m) in [
            ("deployed", self.deployed_threshold, &self.metrics),
            ("roc_optimal", self.roc_optimal.threshold, &self.optimal_metrics),
        ] {
            let _ = writeln!(
                s,
                "{name},{},{:.6},{},{},{},{},{},{}",
                crate::io::f6(thr),
                self.roc.auc,
                opt(m.gmean),
                opt(m.tpr),
                opt(m.fpr),
                opt(m.ppv),
                opt(m.fnr),
                opt(m.accuracy)
            );
        }
        s
    }

    pub fn confusion_csv(&self) -> String {
        self.confusion.to_csv()
    }
}

pub fn report_detection(model: &SvcModel, test: &LabeledDataset) -> Result<DetectionReport> {
    if !test.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let decisions = test
        .rows
        .iter()
        .map(|r| model.decision_raw(r))
        .collect::<Result<Vec<f64>>>()?;
    let roc = roc_from_scores(&decisions, &test.labels)?;
    let roc_optimal = operating_point(&roc)?;
    let confusion = confusion_at(&decisions, &test.labels, model.decision_threshold);
    let optimal_confusion = confusion_at(&decisions, &test.labels, roc_optimal.threshold);
    Ok(DetectionReport {
        metrics: metrics(&confusion),
        optimal_metrics: metrics(&optimal_confusion),
        roc,
        roc_optimal,
        deployed_threshold: model.decision_threshold,
        confusion,
        optimal_confusion,
    })
}
