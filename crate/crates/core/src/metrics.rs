//! Confusion matrices and segmentation scores.
//!
//! Rows index the reference class, columns the predicted class.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::taxonomy::UNLABELED;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    /// Row-major `k × k` counts.
    pub counts: Vec<u64>,
    /// Pairs skipped because either side was unlabeled.
    pub skipped_unlabeled: u64,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix { k, counts: vec![0; k * k], skipped_unlabeled: 0 }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let k = rows.len();
        assert!(rows.iter().all(|r| r.len() == k), "matrix must be square");
        ConfusionMatrix { k, counts: rows.concat(), skipped_unlabeled: 0 }
    }

    #[inline]
    pub fn get(&self, reference: usize, predicted: usize) -> u64 {
        self.counts[reference * self.k + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c * self.k..(c + 1) * self.k].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        (0..self.k).map(|r| self.get(r, c)).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    fn merge(mut self, other: &ConfusionMatrix) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.skipped_unlabeled += other.skipped_unlabeled;
        self
    }
}

/// Counts (reference, predicted) pairs. Pairs where either label is
/// [`UNLABELED`] are skipped and counted.
pub fn confusion(reference: &[u8], predicted: &[u8], k: usize) -> Result<ConfusionMatrix> {
    if reference.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: reference.len(), right: predicted.len() });
    }
    const CHUNK: usize = 1 << 16;
    reference
        .par_chunks(CHUNK)
        .zip(predicted.par_chunks(CHUNK))
        .enumerate()
        .map(|(chunk, (r, p))| {
            let mut m = ConfusionMatrix::zeros(k);
            for (j, (&r, &p)) in r.iter().zip(p).enumerate() {
                if r == UNLABELED || p == UNLABELED {
                    m.skipped_unlabeled += 1;
                    continue;
                }
                let index = chunk * CHUNK + j;
                for label in [r, p] {
                    if label as usize >= k {
                        return Err(Error::LabelOutOfRange { index, label, classes: k });
                    }
                }
                m.counts[r as usize * k + p as usize] += 1;
            }
            Ok(m)
        })
        .try_reduce(|| ConfusionMatrix::zeros(k), |a, b| Ok(a.merge(&b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    /// Per-class IoU; `None` for classes absent from both reference and prediction.
    pub iou: Vec<Option<f64>>,
    /// Per-class recall; `None` for classes absent from the reference.
    pub recall: Vec<Option<f64>>,
    pub miou: f64,
    pub oa: f64,
    /// Mean per-class recall (also called mAcc).
    pub aa: f64,
}

fn mean_defined(values: &[Option<f64>]) -> f64 {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    }
}

pub fn report(m: &ConfusionMatrix) -> Result<MetricReport> {
    let total = m.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut iou = Vec::with_capacity(m.k);
    let mut recall = Vec::with_capacity(m.k);
    for c in 0..m.k {
        let tp = m.get(c, c);
        let row = m.row_sum(c);
        let col = m.col_sum(c);
        let union = row + col - tp;
        iou.push((union > 0).then(|| tp as f64 / union as f64));
        recall.push((row > 0).then(|| tp as f64 / row as f64));
    }
    Ok(MetricReport {
        miou: mean_defined(&iou),
        aa: mean_defined(&recall),
        oa: m.trace() as f64 / total as f64,
        iou,
        recall,
    })
}

/// Each row as percentages of its sum; empty rows stay zero.
pub fn row_normalize(m: &ConfusionMatrix) -> Vec<Vec<f64>> {
    (0..m.k)
        .map(|r| {
            let sum = m.row_sum(r);
            (0..m.k)
                .map(|c| if sum == 0 { 0.0 } else { 100.0 * m.get(r, c) as f64 / sum as f64 })
                .collect()
        })
        .collect()
}

/// Row-normalized percentages rounded to `decimals` places with largest
/// remainders, so every non-empty row still sums to exactly 100.
pub fn row_normalize_rounded(m: &ConfusionMatrix, decimals: u32) -> Vec<Vec<f64>> {
    let scale = 10u64.pow(decimals);
    let units = 100 * scale;
    (0..m.k)
        .map(|r| {
            let sum = m.row_sum(r);
            if sum == 0 {
                return vec![0.0; m.k];
            }
            // Exact integer apportionment of `units` across the row.
            let mut floor: Vec<u64> = Vec::with_capacity(m.k);
            let mut rema: Vec<(u128, usize)> = Vec::with_capacity(m.k);
            for c in 0..m.k {
                let num = m.get(r, c) as u128 * units as u128;
                floor.push((num / sum as u128) as u64);
                rema.push((num % sum as u128, c));
            }
            let short = units - floor.iter().sum::<u64>();
            rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(_, c) in rema.iter().take(short as usize) {
                floor[c] += 1;
            }
            floor.iter().map(|&u| u as f64 / scale as f64).collect()
        })
        .collect()
}

/// Overall accuracy recovered from a row-normalized matrix (percent) and
/// the number of reference points per class.
pub fn oa_from_normalized(rows: &[Vec<f64>], class_counts: &[u64]) -> Result<f64> {
    if rows.len() != class_counts.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: class_counts.len() });
    }
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    let hits: f64 = rows
        .iter()
        .zip(class_counts)
        .enumerate()
        .map(|(c, (row, &n))| n as f64 * row.get(c).copied().unwrap_or(0.0))
        .sum();
    Ok(hits / (100.0 * total as f64))
}
