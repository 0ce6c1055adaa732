//! Pseudo-labeling of indoor point clouds against classed CAD meshes.
//!
//! Every point takes the class of the nearest CAD object whose signed
//! distance lies within that class's threshold, or Clutter when none does.
//! The crate also covers the supporting pieces: mesh ingest, a columnar
//! cloud format, the Gold and Silver taxonomies, segmentation metrics and a
//! synthetic room generator.

pub mod cloud;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod labeler;
pub mod metrics;
pub mod scenegen;
pub mod taxonomy;

pub use cloud::{class_histogram, ClassHistogram, LabelColumn, LabeledCloud, PointRecord};
pub use error::{Error, Result};
pub use geometry::{Aabb, MeshIndex, Triangle, Vec3};
pub use ingest::{load_scene, ClassManifest, ClassedMesh, SceneModel};
pub use labeler::{brute_force_label, pseudo_label, LabelReport, ThresholdPolicy};
pub use metrics::{confusion, report, ConfusionMatrix, MetricReport};
pub use scenegen::{build_scene, sample_cloud, RoomSpec};
pub use taxonomy::{Taxonomy, TaxonomyId, UNLABELED};
