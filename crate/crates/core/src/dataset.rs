//! Labeled feature matrix built from the RSS map pair.
//!
//! Features come from geometry and the path-loss layer only; the faded layer
//! is read for labels and nothing else.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gridworld::WorldPoint;
use crate::radio::{rss_pl, RadioConfig, RssMap, RssVariant, Transmitter};

pub const FEATURE_COUNT: usize = 7;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "x", "y", "dist2d", "dist3d", "rss_pl", "tx_height", "freq_ghz",
];

pub const CSV_HEADER: &str = "x,y,dist2d,dist3d,rss_pl,tx_height,freq_ghz,label";

/// Class label of a coverage-hole position.
pub const LABEL_CH: u8 = 0;
pub const LABEL_COVERED: u8 = 1;

pub type FeatureVector = [f64; FEATURE_COUNT];

/// Strictly below the sensitivity is a coverage hole.
pub fn label_position(rss_sf: f64, sensitivity: f64) -> u8 {
    if rss_sf < sensitivity {
        LABEL_CH
    } else {
        LABEL_COVERED
    }
}

pub fn features_at(tx: &Transmitter, cfg: &RadioConfig, p: WorldPoint) -> FeatureVector {
    [
        p.x,
        p.y,
        tx.horizontal_distance(p),
        tx.distance_3d(p),
        rss_pl(tx, cfg, p),
        tx.height,
        tx.frequency,
    ]
}

/// Per-feature z-score parameters. Zero-variance features get scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalization {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Normalization> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Dataset("cannot fit normalization on zero rows".into()))?;
        let m = first.as_ref().len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; m];
        for r in rows {
            for (acc, v) in mean.iter_mut().zip(r.as_ref()) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m];
        for r in rows {
            for ((acc, v), mu) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Normalization { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<u8>,
    /// Fitted on the training split, shared by every split.
    pub normalization: Option<Normalization>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count_label(LABEL_CH) > 0 && self.count_label(LABEL_COVERED) > 0
    }

    /// Rows passed through the stored normalization (raw rows if none).
    pub fn model_inputs(&self) -> Vec<Vec<f64>> {
        match &self.normalization {
            Some(n) => self.rows.iter().map(|r| n.apply(r)).collect(),
            None => self.rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            rows: idx.iter().map(|&i| self.rows[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            normalization: self.normalization.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 80);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (row, label) in self.rows.iter().zip(&self.labels) {
            for v in row {
                let _ = write!(s, "{v:.6},");
            }
            let _ = writeln!(s, "{label}");
        }
        s
    }

    pub fn read_csv(path: &Path) -> Result<LabeledDataset> {
        let raw = crate::io::read_csv_rows(path, CSV_HEADER, FEATURE_COUNT + 1)?;
        let mut rows = Vec::with_capacity(raw.len());
        let mut labels = Vec::with_capacity(raw.len());
        for r in raw {
            let label = r[FEATURE_COUNT];
            if label != 0.0 && label != 1.0 {
                return Err(Error::Parse(format!("label {label} is not 0 or 1")));
            }
            let mut fv = [0.0; FEATURE_COUNT];
            fv.copy_from_slice(&r[..FEATURE_COUNT]);
            rows.push(fv);
            labels.push(label as u8);
        }
        Ok(LabeledDataset {
            rows,
            labels,
            normalization: None,
        })
    }
}

/// Features at each position from the path-loss layer, labels from the
/// faded layer at the containing cell.
pub fn build_dataset(
    pl: &RssMap,
    sf: &RssMap,
    tx: &Transmitter,
    cfg: &RadioConfig,
    positions: &[WorldPoint],
) -> Result<LabeledDataset> {
    if !pl.grid().same_geometry(sf.grid()) {
        return Err(Error::Dataset("RSS maps have different geometry".into()));
    }
    if pl.variant() != RssVariant::PathLoss || sf.variant() != RssVariant::Fading {
        return Err(Error::Dataset("expected a (pl, sf) map pair".into()));
    }
    let mut rows = Vec::with_capacity(positions.len());
    let mut labels = Vec::with_capacity(positions.len());
    for &p in positions {
        // the pl lookup only validates the position
        pl.at(p).ok_or(Error::BlockedPosition { x: p.x, y: p.y })?;
        let rss = sf.at(p).ok_or(Error::BlockedPosition { x: p.x, y: p.y })?;
        rows.push(features_at(tx, cfg, p));
        labels.push(label_position(rss, cfg.sensitivity));
    }
    Ok(LabeledDataset {
        rows,
        labels,
        normalization: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

/// Stratified split into `k` parts by `fractions`.
///
/// Each class is shuffled and allotted `floor(f * n_class)` rows per part
/// (at least one). Left-over rows go to the parts furthest below their
/// overall target size, one extra per part and class, so every per-class
/// count is within one sample of its exact share whenever that share is at
/// least one.
pub fn stratified_partition(labels: &[u8], fractions: &[f64], seed: u64) -> Result<Vec<Vec<usize>>> {
    let k = fractions.len();
    if k == 0 || fractions.iter().any(|&f| !(f > 0.0)) {
        return Err(Error::Dataset(format!("bad split fractions {fractions:?}")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Dataset(format!("split fractions sum to {total}")));
    }
    let n = labels.len();
    let targets = largest_remainder(n, fractions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); k];

    for class in [LABEL_CH, LABEL_COVERED] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            return Err(Error::Dataset(format!(
                "class {class} has {} samples for {k} splits",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let nc = idx.len();
        let mut counts: Vec<usize> = fractions
            .iter()
            .map(|f| ((f * nc as f64).floor() as usize).max(1))
            .collect();
        // the max(1) bump can overshoot; take back from the largest part
        while counts.iter().sum::<usize>() > nc {
            let j = argmax_by(&counts, |c| *c as f64);
            counts[j] -= 1;
        }
        let mut extra = vec![false; k];
        while counts.iter().sum::<usize>() < nc {
            let deficit = |j: usize| targets[j] as f64 - (parts[j].len() + counts[j]) as f64;
            let j = (0..k)
                .filter(|&j| !extra[j])
                .max_by(|&a, &b| deficit(a).total_cmp(&deficit(b)).then(b.cmp(&a)))
                .unwrap_or_else(|| argmax_by(&vec![1.0; k], |v| *v));
            extra[j] = true;
            counts[j] += 1;
        }
        let mut at = 0;
        for (j, &c) in counts.iter().enumerate() {
            parts[j].extend_from_slice(&idx[at..at + c]);
            at += c;
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

fn argmax_by<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    for (i, it) in items.iter().enumerate() {
        if key(it) > key(&items[best]) {
            best = i;
        }
    }
    best
}

/// Integer sizes summing to `n`, proportional to `fractions`.
fn largest_remainder(n: usize, fractions: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = n - sizes.iter().sum::<usize>();
    for &j in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[j] += 1;
        left -= 1;
    }
    sizes
}

/// Stratified train/validation/test split; normalization is fitted on the
/// training part and attached to all three.
pub fn split(ds: &LabeledDataset, fractions: [f64; 3], seed: u64) -> Result<Splits> {
    let parts = stratified_partition(&ds.labels, &fractions, seed)?;
    let mut train = ds.subset(&parts[0]);
    let norm = Normalization::fit(&train.rows)?;
    train.normalization = Some(norm.clone());
    let mut validation = ds.subset(&parts[1]);
    validation.normalization = Some(norm.clone());
    let mut test = ds.subset(&parts[2]);
    test.normalization = Some(norm);
    Ok(Splits {
        train,
        validation,
        test,
    })
}
