use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::StrokeSet;
use crate::error::{Result, UmbraError};
use crate::imgcore::io::{decode_mask_png, load_image};
use crate::imgcore::{RasterImage, ShadowMask};

use super::metrics::derive_shadow_mask;

pub const SHADOW_FILE: &str = "shadow.png";
pub const TRUTH_FILE: &str = "noshadow.png";
pub const STROKES_FILE: &str = "strokes.json";
pub const LABELS_FILE: &str = "labels.json";
pub const MASK_FILE: &str = "mask.png";

/// Attribute degrees of a case, each 1 (weak) to 3 (strong).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Labels {
    pub texture: u8,
    pub softness: u8,
    pub brokenness: u8,
    pub colorfulness: u8,
}

pub const ATTRIBUTES: [&str; 4] = ["texture", "softness", "brokenness", "colorfulness"];

impl Labels {
    pub fn degrees(&self) -> [u8; 4] {
        [
            self.texture,
            self.softness,
            self.brokenness,
            self.colorfulness,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in ATTRIBUTES.iter().zip(self.degrees()) {
            if !(1..=3).contains(&d) {
                return Err(UmbraError::InvalidInput(format!(
                    "{name} degree {d} is outside 1..=3"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetCase {
    pub id: String,
    pub shadow: PathBuf,
    pub truth: PathBuf,
    pub strokes: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub labels: Option<Labels>,
}

impl DatasetCase {
    pub fn load_images(&self) -> Result<(RasterImage<f64>, RasterImage<f64>)> {
        let shadow = load_image(&self.shadow)?;
        let truth = load_image(&self.truth)?;
        if !shadow.same_shape(&truth) {
            return Err(UmbraError::InvalidPair(format!(
                "case {}: image sizes differ",
                self.id
            )));
        }
        Ok((shadow, truth))
    }

    pub fn load_strokes(&self) -> Result<Option<StrokeSet>> {
        match &self.strokes {
            Some(p) => Ok(Some(StrokeSet::from_json(&std::fs::read_to_string(p)?)?)),
            None => Ok(None),
        }
    }

    /// The case's own mask if it ships one, otherwise pixels noticeably
    /// darker than the ground truth.
    pub fn shadow_mask(
        &self,
        shadow: &RasterImage<f64>,
        truth: &RasterImage<f64>,
    ) -> Result<ShadowMask> {
        match &self.mask {
            Some(p) => {
                let mask = decode_mask_png(&std::fs::read(p)?)?;
                if mask.width() != shadow.width() || mask.height() != shadow.height() {
                    return Err(UmbraError::InvalidPair(format!(
                        "case {}: mask size differs",
                        self.id
                    )));
                }
                Ok(mask)
            }
            None => derive_shadow_mask(shadow, truth),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkippedCase {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Sorted by id.
    pub cases: Vec<DatasetCase>,
    pub skipped: Vec<SkippedCase>,
}

/// One case per subdirectory holding `shadow.png` and `noshadow.png`.
/// Incomplete or malformed subdirectories are listed in `skipped`.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut cases = Vec::new();
    let mut skipped = Vec::new();
    for dir in dirs {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match read_case(&dir, &id) {
            Ok(case) => cases.push(case),
            Err(e) => skipped.push(SkippedCase {
                id,
                reason: e.to_string(),
            }),
        }
    }
    if cases.is_empty() {
        return Err(UmbraError::EmptyDataset(format!(
            "no usable cases under {} ({} skipped)",
            root.display(),
            skipped.len()
        )));
    }
    Ok(Dataset { cases, skipped })
}

fn read_case(dir: &Path, id: &str) -> Result<DatasetCase> {
    let shadow = dir.join(SHADOW_FILE);
    let truth = dir.join(TRUTH_FILE);
    for p in [&shadow, &truth] {
        if !p.is_file() {
            return Err(UmbraError::InvalidInput(format!("missing {}", p.display())));
        }
    }
    let dims = |p: &Path| image::image_dimensions(p).map_err(UmbraError::from);
    if dims(&shadow)? != dims(&truth)? {
        return Err(UmbraError::InvalidPair(
            "shadow and ground-truth sizes differ".into(),
        ));
    }
    let optional = |name: &str| Some(dir.join(name)).filter(|p| p.is_file());
    let labels = match optional(LABELS_FILE) {
        Some(p) => {
            let labels: Labels = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            labels.validate()?;
            Some(labels)
        }
        None => None,
    };
    Ok(DatasetCase {
        id: id.to_string(),
        shadow,
        truth,
        strokes: optional(STROKES_FILE),
        mask: optional(MASK_FILE),
        labels,
    })
}
