//! ROC sweep, g-mean operating point and confusion-matrix rates.
//!
//! A coverage hole is the positive class and is predicted when the decision
//! value is at or below the threshold, so raising the threshold moves along
//! the curve from (0, 0) towards (1, 1).

use std::fmt::Write as _;

use super::SvcModel;
use crate::dataset::LABEL_CH;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Ascending thresholds, starting at `-inf` and ending at `+inf`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,tpr,fpr\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{:.6},{:.6}",
                crate::io::f6(p.threshold),
                p.tpr,
                p.fpr
            );
        }
        s
    }
}

/// ROC of raw decision values against labels (0 = coverage hole).
pub fn roc_from_scores(decisions: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if decisions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: decisions.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l == LABEL_CH).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    if decisions.iter().any(|d| d.is_nan()) {
        return Err(Error::Training("NaN decision value".into()));
    }
    let mut order: Vec<usize> = (0..decisions.len()).collect();
    order.sort_by(|&a, &b| decisions[a].total_cmp(&decisions[b]));

    let mut points = vec![RocPoint {
        threshold: f64::NEG_INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let v = decisions[order[k]];
        while k < order.len() && decisions[order[k]] == v {
            if labels[order[k]] == LABEL_CH {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            threshold: v,
            tpr: tp as f64 / pos as f64,
            fpr: fp as f64 / neg as f64,
        });
    }
    points.push(RocPoint {
        threshold: f64::INFINITY,
        tpr: 1.0,
        fpr: 1.0,
    });
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

pub fn roc_curve(model: &SvcModel, inputs: &[Vec<f64>], labels: &[u8]) -> Result<RocCurve> {
    let decisions = inputs
        .iter()
        .map(|x| model.decision_value(x))
        .collect::<Result<Vec<_>>>()?;
    roc_from_scores(&decisions, labels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub index: usize,
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub gmean: f64,
}

pub fn gmean(tpr: f64, fpr: f64) -> f64 {
    (tpr * (1.0 - fpr)).sqrt()
}

/// Threshold maximizing `sqrt(TPR * (1 - FPR))`; ties go to the smaller FPR,
/// then to the earlier point of the sweep.
pub fn operating_point(roc: &RocCurve) -> Result<OperatingPoint> {
    let mut best: Option<OperatingPoint> = None;
    for (index, p) in roc.points.iter().enumerate() {
        let g = gmean(p.tpr, p.fpr);
        let better = match &best {
            None => true,
            Some(b) => g > b.gmean || (g == b.gmean && p.fpr < b.fpr),
        };
        if better {
            best = Some(OperatingPoint {
                index,
                threshold: p.threshold,
                tpr: p.tpr,
                fpr: p.fpr,
                gmean: g,
            });
        }
    }
    best.ok_or_else(|| Error::Training("empty ROC curve".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn to_csv(&self) -> String {
        format!("tp,fp,tn,fn\n{},{},{},{}\n", self.tp, self.fp, self.tn, self.fn_)
    }
}

/// Confusion counts when predicting a coverage hole for `decision <= threshold`.
pub fn confusion_at(decisions: &[f64], labels: &[u8], threshold: f64) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for (&d, &l) in decisions.iter().zip(labels) {
        let predicted_ch = d <= threshold;
        match (l == LABEL_CH, predicted_ch) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    cm
}

/// Rates with a zero denominator are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub ppv: Option<f64>,
    pub fnr: Option<f64>,
    pub accuracy: Option<f64>,
    pub gmean: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let tpr = ratio(cm.tp, cm.tp + cm.fn_);
    let fpr = ratio(cm.fp, cm.tn + cm.fp);
    Metrics {
        tpr,
        fpr,
        ppv: ratio(cm.tp, cm.tp + cm.fp),
        fnr: ratio(cm.fn_, cm.tp + cm.fn_),
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        gmean: tpr.zip(fpr).map(|(t, f)| gmean(t, f)),
    }
}
