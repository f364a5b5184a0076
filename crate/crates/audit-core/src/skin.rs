//! Per-image skin colorimetry: box smoothing, masked pixel extraction,
//! dominant-cluster statistics, and the control-chart flags for records
//! whose typology angle is unusual for their annotated Fitzpatrick class.

use crate::color::{ita, srgb_channels_to_lab, LabColor};
use crate::kmeans::{cluster_pixels, KmeansError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Standard normal 97.5% quantile; |z| beyond it falls outside the central
/// 95% band.
const Z_975: f64 = 1.959_963_984_540_054;

/// RGB raster with continuous channel values in [0, 255]. Smoothing keeps
/// fractional channels rather than re-quantizing to 8 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbRaster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl RgbRaster {
    pub fn from_u8(width: usize, height: usize, data: &[[u8; 3]]) -> Self {
        assert_eq!(data.len(), width * height);
        RgbRaster {
            width,
            height,
            pixels: data
                .iter()
                .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
                .collect(),
        }
    }

    fn at(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }
}

/// Binary mask; nonzero marks skin.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskRaster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl MaskRaster {
    pub fn from_bytes(width: usize, height: usize, data: &[u8]) -> Self {
        assert_eq!(data.len(), width * height);
        MaskRaster {
            width,
            height,
            data: data.iter().map(|&v| v != 0).collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SkinError {
    #[error("empty image region")]
    EmptyRegion,
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("image is {0}x{1} but mask is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("Fitzpatrick class {0} has fewer than 2 records or zero variance")]
    DegenerateClass(usize),
    #[error(transparent)]
    Clustering(#[from] KmeansError),
}

/// Box blur with edge clamping, applied per channel. Radius 0 is identity.
pub fn smooth_pixels(region: &RgbRaster, kernel_radius: usize) -> Result<RgbRaster, SkinError> {
    if region.pixels.is_empty() {
        return Err(SkinError::EmptyRegion);
    }
    if kernel_radius == 0 {
        return Ok(region.clone());
    }
    let (w, h) = (region.width, region.height);
    let r = kernel_radius as isize;
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;

    // horizontal pass, then vertical; per-axis clamping factorizes the 2D
    // clamped box kernel
    let mut horiz = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for dx in -r..=r {
                let p = region.at(clamp(x as isize + dx, w), y);
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += v;
                }
            }
            let k = (2 * r + 1) as f64;
            horiz[y * w + x] = [acc[0] / k, acc[1] / k, acc[2] / k];
        }
    }
    let mut out = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for dy in -r..=r {
                let p = horiz[clamp(y as isize + dy, h) * w + x];
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += v;
                }
            }
            let k = (2 * r + 1) as f64;
            out[y * w + x] = [acc[0] / k, acc[1] / k, acc[2] / k];
        }
    }
    Ok(RgbRaster {
        width: w,
        height: h,
        pixels: out,
    })
}

/// Mean and population standard deviation of one channel.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}

/// Extraction parameters; defaults are k = 3 clusters and kernel radius 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkinParams {
    pub k: usize,
    pub kernel_radius: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for SkinParams {
    fn default() -> Self {
        SkinParams {
            k: 3,
            kernel_radius: 1,
            seed: 0,
            max_iters: 100,
        }
    }
}

/// Per-image colorimetric statistics over the dominant skin cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinSummary {
    pub pixel_count: usize,
    pub ita_mean: f64,
    pub ita_std: f64,
    pub l_mean: f64,
    pub l_std: f64,
    pub a_mean: f64,
    pub a_std: f64,
    pub b_mean: f64,
    pub b_std: f64,
    pub r_mean: f64,
    pub r_std: f64,
    pub g_mean: f64,
    pub g_std: f64,
    pub b_channel_mean: f64,
    pub b_channel_std: f64,
    pub dominant_cluster_centroid: LabColor,
}

/// Smooths the image, converts masked pixels to Lab, clusters them, and
/// summarizes the cluster with the highest luminosity.
pub fn extract_skin_summary(
    image: &RgbRaster,
    mask: &MaskRaster,
    params: SkinParams,
) -> Result<SkinSummary, SkinError> {
    if image.width != mask.width || image.height != mask.height {
        return Err(SkinError::DimensionMismatch(
            image.width,
            image.height,
            mask.width,
            mask.height,
        ));
    }
    let smoothed = smooth_pixels(image, params.kernel_radius)?;
    let masked_rgb: Vec<[f64; 3]> = smoothed
        .pixels
        .iter()
        .zip(mask.data.iter())
        .filter(|(_, &m)| m)
        .map(|(&p, _)| p)
        .collect();
    if masked_rgb.is_empty() {
        return Err(SkinError::EmptyMask);
    }
    let lab: Vec<LabColor> = masked_rgb
        .iter()
        .map(|&[r, g, b]| srgb_channels_to_lab(r, g, b))
        .collect();
    let clustering = cluster_pixels(&lab, params.k, params.seed, params.max_iters)?;
    let dominant = clustering.dominant();
    let members = &clustering.assignments[dominant];

    let lab_ref = &lab;
    let rgb_ref = &masked_rgb;
    let pick = move |f: fn(&LabColor) -> f64| members.iter().map(move |&i| f(&lab_ref[i]));
    let pick_rgb = move |c: usize| members.iter().map(move |&i| rgb_ref[i][c]);
    let (ita_mean, ita_std) = mean_std(members.iter().map(|&i| ita(lab[i])));
    let (l_mean, l_std) = mean_std(pick(|c| c.l_star));
    let (a_mean, a_std) = mean_std(pick(|c| c.a_star));
    let (b_mean, b_std) = mean_std(pick(|c| c.b_star));
    let (r_mean, r_std) = mean_std(pick_rgb(0));
    let (g_mean, g_std) = mean_std(pick_rgb(1));
    let (b_channel_mean, b_channel_std) = mean_std(pick_rgb(2));

    Ok(SkinSummary {
        pixel_count: members.len(),
        ita_mean,
        ita_std,
        l_mean,
        l_std,
        a_mean,
        a_std,
        b_mean,
        b_std,
        r_mean,
        r_std,
        g_mean,
        g_std,
        b_channel_mean,
        b_channel_std,
        dominant_cluster_centroid: clustering.centroids[dominant],
    })
}

/// One record's typology angle with its annotated Fitzpatrick class.
#[derive(Debug, Clone, PartialEq)]
pub struct ItaObservation {
    pub id: String,
    pub fitz_class: usize,
    pub ita: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurprisingFlag {
    pub id: String,
    pub fitz_class: usize,
    pub ita: f64,
    pub z_score: f64,
    pub flagged: bool,
}

/// Fits a Gaussian (sample mean, unbiased standard deviation) to each
/// class's typology angles and flags records outside the central 95% band,
/// i.e. below the 2.5% or above the 97.5% quantile of the fitted Gaussian.
pub fn surprising_scores(
    observations: &[ItaObservation],
) -> Result<Vec<SurprisingFlag>, SkinError> {
    let mut by_class: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for obs in observations {
        by_class.entry(obs.fitz_class).or_default().push(obs.ita);
    }
    let mut fits: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for (&class, values) in &by_class {
        if values.len() < 2 {
            return Err(SkinError::DegenerateClass(class));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        if var == 0.0 {
            return Err(SkinError::DegenerateClass(class));
        }
        fits.insert(class, (mean, var.sqrt()));
    }
    Ok(observations
        .iter()
        .map(|obs| {
            let (mean, std) = fits[&obs.fitz_class];
            let z_score = (obs.ita - mean) / std;
            SurprisingFlag {
                id: obs.id.clone(),
                fitz_class: obs.fitz_class,
                ita: obs.ita,
                z_score,
                flagged: z_score.abs() > Z_975,
            }
        })
        .collect())
}
