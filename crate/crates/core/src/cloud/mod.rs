//! Columnar labeled point clouds, their on-disk formats, voxel subsampling
//! and a uniform-grid point index.

mod ascii;
mod format;
mod grid;
mod voxel;

use serde::Serialize;

pub use ascii::{read_ascii, write_ascii};
pub use format::{read_cloud, read_cloud_file, write_cloud, write_cloud_file, HEADER_LEN, MAGIC, VERSION};
pub use grid::PointGrid;
pub use voxel::voxel_subsample;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::taxonomy::{TaxonomyId, UNLABELED};

/// Selects one of the two label columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelColumn {
    Real,
    Pseudo,
}

/// One row of a [`LabeledCloud`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub position: Vec3,
    pub rgb: [u8; 3],
    pub intensity: f32,
    pub real_label: u8,
    pub pseudo_label: u8,
}

impl PointRecord {
    /// Unlabeled black point with zero intensity.
    pub fn at(position: Vec3) -> Self {
        PointRecord { position, rgb: [0; 3], intensity: 0.0, real_label: UNLABELED, pseudo_label: UNLABELED }
    }

    pub fn with_labels(mut self, real: u8, pseudo: u8) -> Self {
        self.real_label = real;
        self.pseudo_label = pseudo;
        self
    }
}

/// Point set stored column by column, in the order of the on-disk blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub taxonomy: TaxonomyId,
    pub scan_id: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<u8>,
    pub g: Vec<u8>,
    pub b: Vec<u8>,
    pub intensity: Vec<f32>,
    pub real_label: Vec<u8>,
    pub pseudo_label: Vec<u8>,
}

impl LabeledCloud {
    pub fn new(taxonomy: TaxonomyId, scan_id: impl Into<String>) -> Self {
        Self::with_capacity(taxonomy, scan_id, 0)
    }

    pub fn with_capacity(taxonomy: TaxonomyId, scan_id: impl Into<String>, n: usize) -> Self {
        LabeledCloud {
            taxonomy,
            scan_id: scan_id.into(),
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            z: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            intensity: Vec::with_capacity(n),
            real_label: Vec::with_capacity(n),
            pseudo_label: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn push(&mut self, p: PointRecord) {
        self.x.push(p.position.x);
        self.y.push(p.position.y);
        self.z.push(p.position.z);
        self.r.push(p.rgb[0]);
        self.g.push(p.rgb[1]);
        self.b.push(p.rgb[2]);
        self.intensity.push(p.intensity);
        self.real_label.push(p.real_label);
        self.pseudo_label.push(p.pseudo_label);
    }

    #[inline]
    pub fn position(&self, i: usize) -> Vec3 {
        Vec3::new(self.x[i], self.y[i], self.z[i])
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = Vec3> + '_ {
        (0..self.len()).map(|i| self.position(i))
    }

    pub fn record(&self, i: usize) -> PointRecord {
        PointRecord {
            position: self.position(i),
            rgb: [self.r[i], self.g[i], self.b[i]],
            intensity: self.intensity[i],
            real_label: self.real_label[i],
            pseudo_label: self.pseudo_label[i],
        }
    }

    pub fn labels(&self, which: LabelColumn) -> &[u8] {
        match which {
            LabelColumn::Real => &self.real_label,
            LabelColumn::Pseudo => &self.pseudo_label,
        }
    }

    pub fn labels_mut(&mut self, which: LabelColumn) -> &mut Vec<u8> {
        match which {
            LabelColumn::Real => &mut self.real_label,
            LabelColumn::Pseudo => &mut self.pseudo_label,
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledCloud {
        let mut out = LabeledCloud::with_capacity(self.taxonomy, self.scan_id.clone(), indices.len());
        for &i in indices {
            out.push(self.record(i));
        }
        out
    }

    /// Bounding box of the finite positions.
    pub fn extent(&self) -> Aabb {
        Aabb::from_points(self.positions().filter(|p| p.is_finite()))
    }

    /// Checks column lengths, intensity range and label range.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let lens = [
            self.y.len(),
            self.z.len(),
            self.r.len(),
            self.g.len(),
            self.b.len(),
            self.intensity.len(),
            self.real_label.len(),
            self.pseudo_label.len(),
        ];
        if let Some(&bad) = lens.iter().find(|&&l| l != n) {
            return Err(Error::LengthMismatch { left: n, right: bad });
        }
        if let Some((index, &value)) =
            self.intensity.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        let tax = self.taxonomy.taxonomy();
        for column in [&self.real_label, &self.pseudo_label] {
            if let Some((index, &label)) = column.iter().enumerate().find(|(_, &l)| !tax.is_valid_label(l)) {
                return Err(Error::LabelOutOfRange { index, label, classes: tax.len() });
            }
        }
        Ok(())
    }
}

/// Point counts per class for one label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassHistogram {
    pub counts: Vec<u64>,
    pub unlabeled: u64,
}

impl ClassHistogram {
    pub fn labeled(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn class_histogram(cloud: &LabeledCloud, which: LabelColumn) -> ClassHistogram {
    let k = cloud.taxonomy.taxonomy().len();
    let mut counts = vec![0u64; k];
    let mut unlabeled = 0;
    for &l in cloud.labels(which) {
        match counts.get_mut(l as usize) {
            Some(c) => *c += 1,
            None => unlabeled += 1,
        }
    }
    ClassHistogram { counts, unlabeled }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts() {
        let mut c = LabeledCloud::new(TaxonomyId::Gold, "h");
        for _ in 0..5 {
            c.push(PointRecord::at(Vec3::ZERO).with_labels(17, 17));
        }
        let h = class_histogram(&c, LabelColumn::Real);
        assert_eq!(h.counts[17], 5);
        assert_eq!(h.labeled(), 5);
        assert_eq!(h.unlabeled, 0);

        c.push(PointRecord::at(Vec3::ZERO));
        let h = class_histogram(&c, LabelColumn::Pseudo);
        assert_eq!((h.labeled(), h.unlabeled), (5, 1));
    }

    #[test]
    fn empty_histogram() {
        let c = LabeledCloud::new(TaxonomyId::Silver, "e");
        let h = class_histogram(&c, LabelColumn::Real);
        assert_eq!(h.counts, vec![0; 12]);
        assert_eq!(h.unlabeled, 0);
    }

    #[test]
    fn validate_catches_bad_rows() {
        let mut c = LabeledCloud::new(TaxonomyId::Silver, "v");
        c.push(PointRecord::at(Vec3::ZERO).with_labels(11, 11));
        assert!(c.validate().is_ok());
        c.real_label[0] = 12;
        assert!(matches!(c.validate(), Err(Error::LabelOutOfRange { label: 12, .. })));
        c.real_label[0] = 0;
        c.intensity[0] = f32::NAN;
        assert!(matches!(c.validate(), Err(Error::IntensityOutOfRange { .. })));
        c.intensity[0] = 0.5;
        c.r.pop();
        assert!(matches!(c.validate(), Err(Error::LengthMismatch { .. })));
    }
}
