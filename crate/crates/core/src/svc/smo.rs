//! Soft-margin kernel SVM dual solved by SMO with second-order working-set
//! selection (the libsvm scheme). The full kernel matrix is cached, which is
//! fine for the few thousand samples a floor survey produces.

use super::{rbf, SvcModel};
use crate::dataset::{LABEL_CH, LABEL_COVERED};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    /// KKT violation tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub iterations: usize,
    /// Final `max_up(-yG) - min_low(-yG)`.
    pub kkt_gap: f64,
    /// All multipliers, one per training sample.
    pub alphas: Vec<f64>,
    /// `+1` covered, `-1` coverage hole.
    pub signs: Vec<f64>,
}

/// Trains on normalized inputs; labels are 0 (coverage hole) or 1.
pub fn train(
    inputs: &[Vec<f64>],
    labels: &[u8],
    c: f64,
    gamma: f64,
    params: SmoParams,
) -> Result<(SvcModel, TrainStats)> {
    if inputs.len() != labels.len() {
        return Err(Error::Training(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    if !(c > 0.0 && gamma > 0.0) {
        return Err(Error::Training(format!("need C > 0 and gamma > 0, got {c}, {gamma}")));
    }
    let n = inputs.len();
    let has = |l: u8| labels.contains(&l);
    if !has(LABEL_CH) || !has(LABEL_COVERED) {
        return Err(Error::Training("training set has a single class".into()));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Training(format!("label {bad} is not 0 or 1")));
    }
    let dim = inputs[0].len();
    if let Some(row) = inputs.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: row.len(),
        });
    }

    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == LABEL_COVERED { 1.0 } else { -1.0 })
        .collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(gamma, &inputs[i], &inputs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let kkt_gap = loop {
        // i: maximal violator in I_up
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i_sel = t;
                }
            }
        }
        // j: best second-order gain in I_low
        let mut g_min = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            if v < g_min {
                g_min = v;
            }
            if i_sel == usize::MAX {
                continue;
            }
            let b = g_max - v;
            if b > 0.0 {
                let mut a = k[i_sel * n + i_sel] + k[t * n + t] - 2.0 * k[i_sel * n + t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = t;
                }
            }
        }
        let gap = g_max - g_min;
        if gap < params.tolerance || j_sel == usize::MAX {
            break gap;
        }
        if iterations >= params.max_iterations {
            return Err(Error::Training(format!(
                "SMO did not converge in {iterations} iterations (KKT gap {gap:.3e})"
            )));
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * d_i + q(t, j) * d_j;
        }
    };

    // rho from free multipliers, else the midpoint of the feasible interval
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(inputs[t].clone());
            dual_coefficients.push(alpha[t] * y[t]);
        }
    }
    let model = SvcModel {
        support_vectors,
        dual_coefficients,
        bias: -rho,
        gamma,
        penalty: c,
        decision_threshold: 0.0,
        normalization: None,
    };
    Ok((
        model,
        TrainStats {
            iterations,
            kkt_gap,
            alphas: alpha,
            signs: y,
        },
    ))
}
