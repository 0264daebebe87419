//! PNG encodings of pipeline outputs, shared by the CLI and the service so
//! that both emit identical bytes.

use std::path::{Path, PathBuf};

use umbra_core::imgcore::io::{encode_mask_png, encode_png, encode_scale_png16};
use umbra_core::{Removal, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    Mask,
    Fusion,
    Strip,
    Aligned,
    Sparse,
    Dense,
    Result,
}

impl Artifact {
    /// Everything written by `--dump-intermediates`, in file-suffix order.
    pub const INTERMEDIATES: [Artifact; 6] = [
        Artifact::Mask,
        Artifact::Fusion,
        Artifact::Strip,
        Artifact::Aligned,
        Artifact::Sparse,
        Artifact::Dense,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            Artifact::Mask => "mask",
            Artifact::Fusion => "fusion",
            Artifact::Strip => "strip",
            Artifact::Aligned => "aligned",
            Artifact::Sparse => "sparse",
            Artifact::Dense => "scales",
            Artifact::Result => "result",
        }
    }

    pub fn encode(self, removal: &Removal<f64>) -> Result<Vec<u8>> {
        match self {
            Artifact::Mask => encode_mask_png(&removal.detection.mask),
            Artifact::Fusion => encode_png(&removal.fusion_image()),
            Artifact::Strip => encode_png(&removal.strip_image(false)),
            Artifact::Aligned => encode_png(&removal.strip_image(true)),
            Artifact::Sparse => encode_png(&removal.sparse_image()),
            Artifact::Dense => encode_scale_png16(&removal.dense),
            Artifact::Result => encode_png(&removal.result),
        }
    }
}

/// `<dir>/<stem>.<suffix>.png` next to the main output.
pub fn intermediate_path(out: &Path, artifact: Artifact) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{}.png", artifact.suffix()))
}
