use crate::error::{Result, UmbraError};
use crate::penumbra::cluster::{dbscan, mean_shift};
use crate::penumbra::SamplingLine;
use crate::scalar::Scalar;

pub const DBSCAN_MIN_PTS: usize = 3;

/// Sub-groups smaller than this fraction of the largest are discarded.
pub const SUBGROUP_KEEP_FRACTION: f64 = 0.1;

/// Log-RGB step across a sampling line and its spherical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleFeature {
    /// Mean lit-half minus mean shadow-half log intensity, per channel.
    pub step: [f64; 3],
    /// `(r, θ, φ)`: radius, polar angle from +z, azimuth in the xy-plane.
    pub spherical: [f64; 3],
}

impl ScaleFeature {
    pub fn from_step(step: [f64; 3]) -> Self {
        Self {
            step,
            spherical: to_spherical(step),
        }
    }

    /// Halves split at the middle row; an odd-length profile's middle
    /// sample belongs to neither half.
    pub fn from_profile<T: Scalar>(profile: &[[T; 3]]) -> Self {
        let n = profile.len();
        let shadow_end = n / 2;
        let lit_start = n - n / 2;
        let mean = |rows: &[[T; 3]]| {
            let mut acc = [0.0; 3];
            for r in rows {
                for c in 0..3 {
                    acc[c] += r[c].as_f64();
                }
            }
            acc.map(|v| v / rows.len() as f64)
        };
        let shadow = mean(&profile[..shadow_end]);
        let lit = mean(&profile[lit_start..]);
        Self::from_step([lit[0] - shadow[0], lit[1] - shadow[1], lit[2] - shadow[2]])
    }
}

pub fn to_spherical(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let theta = if r > 0.0 {
        (v[2] / r).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let phi = v[1].atan2(v[0]);
    // atan2 yields -π for (-x, -0.0); fold onto the half-open range.
    let phi = if phi == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        phi
    };
    [r, theta, phi]
}

#[derive(Clone, Debug)]
pub struct OutlierReport {
    /// Indices into the input that survived, in input order.
    pub kept: Vec<usize>,
    pub features: Vec<ScaleFeature>,
    pub dbscan_labels: Vec<Option<usize>>,
    /// Sub-group of each member of the largest cluster (`None` elsewhere).
    pub subgroups: Vec<Option<usize>>,
}

pub fn filter_outliers<T: Scalar>(
    lines: &[SamplingLine<T>],
    radius: f64,
    bandwidth: f64,
) -> Result<OutlierReport> {
    let features: Vec<ScaleFeature> = lines
        .iter()
        .map(|l| ScaleFeature::from_profile(&l.profile))
        .collect();
    filter_features(features, radius, bandwidth)
}

/// Keeps the largest DBSCAN cluster of spherical features, then drops
/// mean-shift sub-groups smaller than a tenth of the largest sub-group.
pub fn filter_features(
    features: Vec<ScaleFeature>,
    radius: f64,
    bandwidth: f64,
) -> Result<OutlierReport> {
    if features.len() < DBSCAN_MIN_PTS {
        return Err(UmbraError::NoValidSamples(format!(
            "{} sampling line(s), need at least {DBSCAN_MIN_PTS}",
            features.len()
        )));
    }
    let points: Vec<[f64; 3]> = features.iter().map(|f| f.spherical).collect();
    let labels = dbscan(&points, radius, DBSCAN_MIN_PTS);
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    if n_clusters == 0 {
        return Err(UmbraError::NoValidSamples(
            "every sampling line is noise".into(),
        ));
    }
    let mut sizes = vec![0usize; n_clusters];
    for l in labels.iter().flatten() {
        sizes[*l] += 1;
    }
    // Earliest cluster wins ties.
    let largest = (0..n_clusters).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
    let members: Vec<usize> = (0..points.len())
        .filter(|&i| labels[i] == Some(largest))
        .collect();
    let member_points: Vec<[f64; 3]> = members.iter().map(|&i| points[i]).collect();
    let groups = mean_shift(&member_points, bandwidth);
    let n_groups = groups.iter().max().map_or(0, |m| m + 1);
    let mut group_sizes = vec![0usize; n_groups];
    for &g in &groups {
        group_sizes[g] += 1;
    }
    let biggest = group_sizes.iter().copied().max().unwrap_or(0) as f64;
    let mut subgroups = vec![None; points.len()];
    let mut kept = Vec::new();
    for (k, &i) in members.iter().enumerate() {
        subgroups[i] = Some(groups[k]);
        if group_sizes[groups[k]] as f64 >= SUBGROUP_KEEP_FRACTION * biggest {
            kept.push(i);
        }
    }
    Ok(OutlierReport {
        kept,
        features,
        dbscan_labels: labels,
        subgroups,
    })
}
