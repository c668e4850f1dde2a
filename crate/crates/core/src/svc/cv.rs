use rayon::prelude::*;

use super::roc::{operating_point, roc_curve};
use super::smo::{train, SmoParams};
use crate::dataset::stratified_partition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CvCell {
    pub c: f64,
    pub gamma: f64,
    /// Mean over folds of the validation g-mean at the fold's operating point.
    pub score: f64,
    pub fold_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_c: f64,
    pub best_gamma: f64,
    /// Grid order: C outer, gamma inner, as given.
    pub cells: Vec<CvCell>,
}

impl CvResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("c,gamma,score\n");
        for cell in &self.cells {
            s.push_str(&format!("{},{},{:.6}\n", cell.c, cell.gamma, cell.score));
        }
        s
    }
}

/// Stratified L-fold grid search. Best cell maximizes the mean score; ties go
/// to the smaller C, then the smaller gamma.
pub fn cross_validate(
    inputs: &[Vec<f64>],
    labels: &[u8],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    seed: u64,
    params: SmoParams,
) -> Result<CvResult> {
    if folds < 2 {
        return Err(Error::Training(format!("need at least 2 folds, got {folds}")));
    }
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::Training("empty hyper-parameter grid".into()));
    }
    let fractions = vec![1.0 / folds as f64; folds];
    let parts = stratified_partition(labels, &fractions, seed)
        .map_err(|e| Error::Training(format!("fold assignment: {e}")))?;

    let grid: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| gamma_grid.iter().map(move |&g| (c, g)))
        .collect();

    let cells = grid
        .par_iter()
        .map(|&(c, gamma)| {
            let fold_scores = (0..folds)
                .map(|f| fold_score(inputs, labels, &parts, f, c, gamma, params))
                .collect::<Result<Vec<f64>>>()?;
            let score = fold_scores.iter().sum::<f64>() / folds as f64;
            Ok(CvCell {
                c,
                gamma,
                score,
                fold_scores,
            })
        })
        .collect::<Result<Vec<CvCell>>>()?;

    let best = cells
        .iter()
        .reduce(|best, cell| {
            let better = cell.score > best.score
                || (cell.score == best.score
                    && (cell.c < best.c || (cell.c == best.c && cell.gamma < best.gamma)));
            if better {
                cell
            } else {
                best
            }
        })
        .expect("grid is non-empty");
    Ok(CvResult {
        best_c: best.c,
        best_gamma: best.gamma,
        cells: cells.clone(),
    })
}

fn fold_score(
    inputs: &[Vec<f64>],
    labels: &[u8],
    parts: &[Vec<usize>],
    fold: usize,
    c: f64,
    gamma: f64,
    params: SmoParams,
) -> Result<f64> {
    let mut train_x = Vec::new();
    let mut train_y = Vec::new();
    for (f, idx) in parts.iter().enumerate() {
        if f == fold {
            continue;
        }
        for &i in idx {
            train_x.push(inputs[i].clone());
            train_y.push(labels[i]);
        }
    }
    let val_x: Vec<Vec<f64>> = parts[fold].iter().map(|&i| inputs[i].clone()).collect();
    let val_y: Vec<u8> = parts[fold].iter().map(|&i| labels[i]).collect();
    let (model, _) = train(&train_x, &train_y, c, gamma, params)?;
    let roc = roc_curve(&model, &val_x, &val_y)
        .map_err(|e| Error::Training(format!("fold {fold}: {e}")))?;
    Ok(operating_point(&roc)?.gmean)
}
