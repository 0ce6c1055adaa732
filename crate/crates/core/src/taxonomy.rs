//! Class registries and the Gold to Silver label simplification.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{LabelColumn, LabeledCloud, PointGrid};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Label value for points without a class.
pub const UNLABELED: u8 = 255;

const GOLD_NAMES: [&str; 18] = [
    "Column",
    "Components",
    "Covering",
    "Damper",
    "Door",
    "Exit sign",
    "Fire terminal",
    "Furniture",
    "Heater",
    "Lamp",
    "Outlet",
    "Railing",
    "Slab",
    "Stair",
    "Switch",
    "Wall",
    "Window",
    "Clutter",
];

const SILVER_NAMES: [&str; 12] = [
    "Column",
    "Covering",
    "Door",
    "Exit sign",
    "Heater",
    "Lamp",
    "Railing",
    "Slab",
    "Stair",
    "Wall",
    "Window",
    "Clutter",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyId {
    Gold,
    Silver,
}

impl TaxonomyId {
    /// Code stored in the binary cloud header.
    pub fn code(self) -> u8 {
        match self {
            TaxonomyId::Gold => 0,
            TaxonomyId::Silver => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(TaxonomyId::Gold),
            1 => Ok(TaxonomyId::Silver),
            c => Err(Error::BadTaxonomy(c)),
        }
    }

    pub fn taxonomy(self) -> &'static Taxonomy {
        match self {
            TaxonomyId::Gold => gold(),
            TaxonomyId::Silver => silver(),
        }
    }
}

impl fmt::Display for TaxonomyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaxonomyId::Gold => "gold",
            TaxonomyId::Silver => "silver",
        })
    }
}

impl std::str::FromStr for TaxonomyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gold" => Ok(TaxonomyId::Gold),
            "silver" => Ok(TaxonomyId::Silver),
            other => Err(Error::InvalidArgument(format!("unknown taxonomy '{other}'"))),
        }
    }
}

/// An ordered class list; the position of a name is its label value.
#[derive(Debug)]
pub struct Taxonomy {
    pub id: TaxonomyId,
    pub names: &'static [&'static str],
    pub clutter_id: u8,
}

static GOLD: Taxonomy = Taxonomy { id: TaxonomyId::Gold, names: &GOLD_NAMES, clutter_id: 17 };
static SILVER: Taxonomy = Taxonomy { id: TaxonomyId::Silver, names: &SILVER_NAMES, clutter_id: 11 };

/// The 18-class Gold taxonomy.
pub fn gold() -> &'static Taxonomy {
    &GOLD
}

/// The 12-class Silver taxonomy.
pub fn silver() -> &'static Taxonomy {
    &SILVER
}

fn fold_name(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

impl Taxonomy {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Looks a class up by name, ignoring case, spaces and punctuation
    /// ("Fire terminal", "FireTerminal" and "fire_terminal" are the same class).
    pub fn class_id(&self, name: &str) -> Option<u8> {
        let key = fold_name(name);
        self.names.iter().position(|n| fold_name(n) == key).map(|i| i as u8)
    }

    pub fn resolve(&self, name: &str) -> Result<u8> {
        self.class_id(name).ok_or_else(|| Error::ClassUnknown {
            class: name.to_string(),
            taxonomy: self.id.to_string(),
        })
    }

    /// Class name, or `"unlabeled"` for the sentinel.
    pub fn name(&self, label: u8) -> &'static str {
        if label == UNLABELED {
            "unlabeled"
        } else {
            self.names.get(label as usize).copied().unwrap_or("?")
        }
    }

    pub fn is_valid_label(&self, label: u8) -> bool {
        label == UNLABELED || (label as usize) < self.len()
    }
}

/// How one Gold class maps into Silver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplifyRule {
    Fixed(u8),
    /// Nearest of these Silver classes, measured to the closest point that
    /// already carries it through a fixed rule. Ties go to Clutter.
    NearestOf(&'static [u8]),
}

const S_COLUMN: u8 = 0;
const S_COVERING: u8 = 1;
const S_DOOR: u8 = 2;
const S_EXIT_SIGN: u8 = 3;
const S_HEATER: u8 = 4;
const S_LAMP: u8 = 5;
const S_RAILING: u8 = 6;
const S_SLAB: u8 = 7;
const S_STAIR: u8 = 8;
const S_WALL: u8 = 9;
const S_WINDOW: u8 = 10;
const S_CLUTTER: u8 = 11;

/// One rule per Gold class, in Gold index order.
pub const GOLD_TO_SILVER: [SimplifyRule; 18] = {
    use SimplifyRule::*;
    [
        Fixed(S_COLUMN),                   // Column
        Fixed(S_CLUTTER),                  // Components
        Fixed(S_COVERING),                 // Covering
        NearestOf(&[S_COVERING, S_CLUTTER]), // Damper
        Fixed(S_DOOR),                     // Door
        Fixed(S_EXIT_SIGN),                // Exit sign
        NearestOf(&[S_WALL, S_CLUTTER]),   // Fire terminal
        Fixed(S_CLUTTER),                  // Furniture
        Fixed(S_HEATER),                   // Heater
        Fixed(S_LAMP),                     // Lamp
        Fixed(S_WALL),                     // Outlet
        Fixed(S_RAILING),                  // Railing
        Fixed(S_SLAB),                     // Slab
        Fixed(S_STAIR),                    // Stair
        Fixed(S_WALL),                     // Switch
        Fixed(S_WALL),                     // Wall
        Fixed(S_WINDOW),                   // Window
        Fixed(S_CLUTTER),                  // Clutter
    ]
};

/// Maps one Gold label column of `cloud` onto Silver labels.
///
/// Fixed rules are a table lookup. Damper and Fire terminal points take the
/// nearer of their candidate classes, measured to points of the same column
/// whose Silver label comes from a fixed rule.
pub fn simplify_labels(cloud: &LabeledCloud, which: LabelColumn) -> Result<Vec<u8>> {
    if cloud.taxonomy != TaxonomyId::Gold {
        return Err(Error::TaxonomyMismatch {
            cloud: cloud.taxonomy.to_string(),
            expected: TaxonomyId::Gold.to_string(),
        });
    }
    let labels = cloud.labels(which);
    for (i, &l) in labels.iter().enumerate() {
        if l == UNLABELED {
            return Err(Error::UnlabeledPoint(i));
        }
        if l as usize >= GOLD_TO_SILVER.len() {
            return Err(Error::LabelOutOfRange { index: i, label: l, classes: GOLD_TO_SILVER.len() });
        }
    }

    let fixed: Vec<Option<u8>> = labels
        .iter()
        .map(|&l| match GOLD_TO_SILVER[l as usize] {
            SimplifyRule::Fixed(s) => Some(s),
            SimplifyRule::NearestOf(_) => None,
        })
        .collect();

    // One point grid per candidate class that some ambiguous point needs.
    let mut needed: Vec<u8> = labels
        .iter()
        .filter_map(|&l| match GOLD_TO_SILVER[l as usize] {
            SimplifyRule::NearestOf(c) => Some(c),
            SimplifyRule::Fixed(_) => None,
        })
        .flatten()
        .copied()
        .collect();
    needed.sort_unstable();
    needed.dedup();
    let grids: Vec<(u8, Option<PointGrid>)> = needed
        .iter()
        .map(|&class| {
            let members: Vec<Vec3> = fixed
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == Some(class))
                .map(|(i, _)| cloud.position(i))
                .collect();
            (class, PointGrid::for_nearest(&members))
        })
        .collect();

    let out = (0..labels.len())
        .into_par_iter()
        .map(|i| match (fixed[i], GOLD_TO_SILVER[labels[i] as usize]) {
            (Some(s), _) => s,
            (None, SimplifyRule::NearestOf(candidates)) => {
                let p = cloud.position(i);
                let dist = |class: u8| -> f64 {
                    if !p.is_finite() {
                        return f64::INFINITY;
                    }
                    grids
                        .iter()
                        .find(|(c, _)| *c == class)
                        .and_then(|(_, g)| g.as_ref())
                        .and_then(|g| g.nearest(p))
                        .map_or(f64::INFINITY, |(_, d)| d)
                };
                resolve_nearest(candidates.iter().map(|&c| (c, dist(c))))
            }
            (None, SimplifyRule::Fixed(s)) => s,
        })
        .collect();
    Ok(out)
}

/// Picks the candidate at the smallest distance. Ties, including all
/// candidates at infinity, resolve to Clutter.
fn resolve_nearest<I: Iterator<Item = (u8, f64)>>(candidates: I) -> u8 {
    let mut best: Option<(u8, f64)> = None;
    let mut tied = false;
    for (c, d) in candidates {
        match best {
            None => best = Some((c, d)),
            Some((_, bd)) if d < bd => {
                best = Some((c, d));
                tied = false;
            }
            Some((_, bd)) if d == bd => tied = true,
            _ => {}
        }
    }
    match best {
        Some((c, _)) if !tied => c,
        _ => S_CLUTTER,
    }
}

/// Simplifies every label column that carries labels, producing a Silver cloud.
/// Columns that are entirely unlabeled stay unlabeled.
pub fn simplify_cloud(cloud: &LabeledCloud) -> Result<LabeledCloud> {
    let mut out = cloud.clone();
    for which in [LabelColumn::Real, LabelColumn::Pseudo] {
        if cloud.labels(which).iter().all(|&l| l == UNLABELED) {
            continue;
        }
        let silver = simplify_labels(cloud, which)?;
        *out.labels_mut(which) = silver;
    }
    out.taxonomy = TaxonomyId::Silver;
    Ok(out)
}
