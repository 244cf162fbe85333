//! Grayscale images: PGM I/O, normalized coordinate grids, the synthetic
//! benchmark image and seeded texture fixtures.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// A grayscale raster with real intensities in [0, 1] and, optionally, a
/// quantized view with `level_count` gray levels.
///
/// Images produced by [`crate::moments::reconstruct`] may carry intensities
/// outside [0, 1]; the error metric needs the raw values, so the range
/// invariant is enforced on load/synthesis paths only.
#[derive(Debug, Clone)]
pub struct GrayImage {
    intensities: Array2<f64>,
    levels: Option<Array2<u16>>,
    level_count: Option<usize>,
}

impl GrayImage {
    /// Build from validated intensities in [0, 1].
    pub fn from_intensities(intensities: Array2<f64>) -> Result<Self> {
        for ((r, c), &v) in intensities.indexed_iter() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::IntensityOutOfRange { row: r, col: c, value: v });
            }
        }
        Ok(GrayImage { intensities, levels: None, level_count: None })
    }

    /// Build from raw values without range validation (reconstructions).
    pub fn from_raw(intensities: Array2<f64>) -> Self {
        GrayImage { intensities, levels: None, level_count: None }
    }

    /// Build from level data: intensities are levels / (level_count - 1).
    pub fn from_levels(levels: Array2<u16>, level_count: usize) -> Result<Self> {
        if !(2..=65536).contains(&level_count) {
            return Err(Error::InvalidArgument(format!(
                "level_count must be in 2..=65536, got {level_count}"
            )));
        }
        let maxval = (level_count - 1) as f64;
        if let Some(&bad) = levels.iter().find(|&&v| v as usize >= level_count) {
            return Err(Error::InvalidArgument(format!(
                "level {bad} exceeds level_count {level_count}"
            )));
        }
        let intensities = levels.mapv(|v| v as f64 / maxval);
        Ok(GrayImage { intensities, levels: Some(levels), level_count: Some(level_count) })
    }

    pub fn rows(&self) -> usize {
        self.intensities.nrows()
    }

    pub fn cols(&self) -> usize {
        self.intensities.ncols()
    }

    pub fn intensities(&self) -> &Array2<f64> {
        &self.intensities
    }

    pub fn levels(&self) -> Option<&Array2<u16>> {
        self.levels.as_ref()
    }

    pub fn level_count(&self) -> Option<usize> {
        self.level_count
    }

    /// Attach a quantized view with `level_count` levels:
    /// floor(intensity * level_count), clamped to level_count - 1.
    pub fn quantize(mut self, level_count: usize) -> Result<Self> {
        if !(2..=65536).contains(&level_count) {
            return Err(Error::InvalidArgument(format!(
                "level_count must be in 2..=65536, got {level_count}"
            )));
        }
        let top = (level_count - 1) as u16;
        let levels = self.intensities.mapv(|v| {
            let q = (v.clamp(0.0, 1.0) * level_count as f64).floor() as usize;
            (q.min(level_count - 1) as u16).min(top)
        });
        self.levels = Some(levels);
        self.level_count = Some(level_count);
        Ok(self)
    }
}

/// Normalized pixel coordinates for both image axes.
///
/// x_k = (2k - (M+1))/(M-1) for k = 1..M: one node per pixel, endpoints at
/// exactly -1 and 1, symmetric about 0.
#[derive(Debug, Clone)]
pub struct Grid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Build the normalized grid for an `rows` x `cols` image.
pub fn normalized_grid(rows: usize, cols: usize) -> Result<Grid> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 points per axis, got {rows}x{cols}"
        )));
    }
    Ok(Grid { x: axis_coordinates(rows), y: axis_coordinates(cols) })
}

pub(crate) fn axis_coordinates(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| ((2 * k) as f64 - (count + 1) as f64) / (count - 1) as f64)
        .collect()
}

/// The smooth benchmark intensity function (1/2) e^x sin(pi x) sin(pi y),
/// sampled on the normalized grid and affinely rescaled so min -> 0 and
/// max -> 1.
pub fn model_image(rows: usize, cols: usize) -> Result<GrayImage> {
    let grid = normalized_grid(rows, cols)?;
    let mut values = Array2::zeros((rows, cols));
    for (r, &x) in grid.x.iter().enumerate() {
        let fx = 0.5 * x.exp() * (std::f64::consts::PI * x).sin();
        for (c, &y) in grid.y.iter().enumerate() {
            values[(r, c)] = fx * (std::f64::consts::PI * y).sin();
        }
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values.mapv_inplace(|v| (v - min) / span);
    GrayImage::from_intensities(values)
}

// ---------------------------------------------------------------------------
// PGM (P2 ASCII / P5 binary), maxval up to 65535
// ---------------------------------------------------------------------------

/// Load a P2 or P5 PGM file. Intensities are raw/maxval and the raw values
/// are kept as the level view with level_count = maxval + 1.
pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    parse_pgm(&data)
}

/// Parse PGM bytes; see [`load_pgm`].
pub fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    if data.len() < 2 {
        return Err(Error::PgmBadMagic(String::from_utf8_lossy(data).into_owned()));
    }
    let magic = &data[0..2];
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(Error::PgmBadMagic(String::from_utf8_lossy(magic).into_owned())),
    };

    let mut pos = 2;
    let cols = read_header_number(data, &mut pos)? as usize;
    let rows = read_header_number(data, &mut pos)? as usize;
    let maxval = read_header_number(data, &mut pos)?;
    if rows == 0 || cols == 0 {
        return Err(Error::PgmMalformedHeader(format!("zero dimension {cols}x{rows}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::PgmMalformedHeader(format!("maxval {maxval} out of 1..=65535")));
    }

    let levels = if binary {
        // exactly one whitespace byte separates the header from the payload
        if pos >= data.len() || !data[pos].is_ascii_whitespace() {
            return Err(Error::PgmMalformedHeader(
                "missing whitespace before binary payload".into(),
            ));
        }
        pos += 1;
        let bytes_per = if maxval > 255 { 2 } else { 1 };
        let expected = rows * cols * bytes_per;
        let payload = &data[pos..];
        if payload.len() != expected {
            return Err(Error::PgmPayloadSize { expected, actual: payload.len() });
        }
        let mut levels = Array2::zeros((rows, cols));
        for (i, chunk) in payload.chunks(bytes_per).enumerate() {
            let v = if bytes_per == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]])
            } else {
                chunk[0] as u16
            };
            if v as u32 > maxval {
                return Err(Error::PgmMalformedHeader(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            levels[(i / cols, i % cols)] = v;
        }
        levels
    } else {
        let text = std::str::from_utf8(&data[pos..])
            .map_err(|_| Error::PgmMalformedHeader("non-UTF8 ASCII payload".into()))?;
        let mut values = Vec::with_capacity(rows * cols);
        for token in text.split_whitespace() {
            let v: u32 = token.parse().map_err(|_| {
                Error::PgmMalformedHeader(format!("non-numeric sample {token:?}"))
            })?;
            if v > maxval {
                return Err(Error::PgmMalformedHeader(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            values.push(v as u16);
        }
        if values.len() != rows * cols {
            return Err(Error::PgmPayloadSize { expected: rows * cols, actual: values.len() });
        }
        Array2::from_shape_vec((rows, cols), values)
            .expect("shape checked against sample count")
    };

    GrayImage::from_levels(levels, maxval as usize + 1)
}

/// Read one header integer, skipping whitespace and '#' comment lines.
fn read_header_number(data: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::PgmMalformedHeader("expected a numeric header field".into()));
    }
    std::str::from_utf8(&data[start..*pos])
        .unwrap()
        .parse()
        .map_err(|_| Error::PgmMalformedHeader("header number out of range".into()))
}

/// Save as binary P5. Level data round-trips losslessly; images without a
/// level view are quantized to 65536 levels first.
pub fn save_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    let owned;
    let (levels, level_count) = match (image.levels(), image.level_count()) {
        (Some(l), Some(c)) => (l, c),
        _ => {
            owned = image
                .intensities
                .mapv(|v| (v.clamp(0.0, 1.0) * 65536.0).floor().min(65535.0) as u16);
            (&owned, 65536)
        }
    };
    let maxval = level_count - 1;
    let mut out = Vec::new();
    write!(out, "P5\n{} {}\n{}\n", image.cols(), image.rows(), maxval)?;
    for &v in levels.iter() {
        if maxval > 255 {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Synthetic rotated-texture fixtures
// ---------------------------------------------------------------------------

/// One labeled image of the synthetic texture collection.
#[derive(Debug, Clone)]
pub struct TextureSample {
    pub image: GrayImage,
    pub class_id: usize,
    pub orientation_degrees: f64,
    pub sample_index: usize,
}

/// Manifest row for a dataset written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub class: usize,
    pub orientation_degrees: f64,
    pub sample_index: usize,
}

/// Deterministic rotated-texture collection: each class is a mixture of
/// sinusoidal gratings with class-specific frequencies, directions and
/// contrast, rendered at each orientation by rotating the generating
/// function's coordinates (not the raster), plus seeded per-sample phase
/// jitter and noise.
///
/// Classes share the same mid-gray mean, so the discriminative signal lives
/// in the fine structure rather than in low-order global statistics.
pub fn texture_dataset(
    class_count: usize,
    orientations: &[f64],
    samples_per_class: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<TextureSample>> {
    if class_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 texture classes, got {class_count}"
        )));
    }
    if size < 32 {
        return Err(Error::InvalidArgument(format!(
            "texture images need size >= 32, got {size}"
        )));
    }
    if orientations.is_empty() || samples_per_class == 0 {
        return Err(Error::InvalidArgument(
            "orientations and samples_per_class must be nonempty/positive".into(),
        ));
    }

    let mut out = Vec::with_capacity(class_count * orientations.len() * samples_per_class);
    for class_id in 0..class_count {
        let params = TextureClassParams::derive(seed, class_id, class_count);
        for (o_idx, &theta) in orientations.iter().enumerate() {
            for sample_index in 0..samples_per_class {
                let img_seed = derive_seed(
                    seed,
                    &[1, class_id as u64, o_idx as u64, sample_index as u64],
                );
                let image = params.render(theta, size, img_seed)?;
                out.push(TextureSample {
                    image,
                    class_id,
                    orientation_degrees: theta,
                    sample_index,
                });
            }
        }
    }
    Ok(out)
}

const GRATING_COMPONENTS: usize = 3;

struct TextureClassParams {
    frequencies: [f64; GRATING_COMPONENTS], // cycles per pixel
    directions: [f64; GRATING_COMPONENTS],
    amplitudes: [f64; GRATING_COMPONENTS],
    contrast: f64,
}

impl TextureClassParams {
    fn derive(seed: u64, class_id: usize, class_count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0, class_id as u64]));
        let spread = class_id as f64 / (class_count - 1) as f64;
        let mut frequencies = [0.0; GRATING_COMPONENTS];
        let mut directions = [0.0; GRATING_COMPONENTS];
        let mut amplitudes = [0.0; GRATING_COMPONENTS];
        for m in 0..GRATING_COMPONENTS {
            frequencies[m] = rng.random_range(0.12..0.42) * (1.0 + 0.45 * spread);
            directions[m] = rng.random_range(0.0..std::f64::consts::PI);
            amplitudes[m] = rng.random_range(0.5..1.0);
        }
        TextureClassParams {
            frequencies,
            directions,
            amplitudes,
            contrast: 0.8 + 2.0 * spread,
        }
    }

    fn render(&self, theta_degrees: f64, size: usize, img_seed: u64) -> Result<GrayImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(img_seed);
        let phases: Vec<f64> = (0..GRATING_COMPONENTS)
            .map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI))
            .collect();
        let noise = Normal::new(0.0, 0.015).expect("valid sigma");

        let theta = theta_degrees.to_radians();
        let (sin_t, cos_t) = theta.sin_cos();
        let norm = (GRATING_COMPONENTS as f64).sqrt();
        let mut values = Array2::zeros((size, size));
        for r in 0..size {
            for c in 0..size {
                let (u, v) = (c as f64, r as f64);
                let ur = u * cos_t - v * sin_t;
                let vr = u * sin_t + v * cos_t;
                let mut g = 0.0;
                for (m, &phase) in phases.iter().enumerate() {
                    let k = 2.0 * std::f64::consts::PI * self.frequencies[m];
                    let proj = ur * self.directions[m].cos() + vr * self.directions[m].sin();
                    g += self.amplitudes[m] * (k * proj + phase).sin();
                }
                let pixel = 0.5 + 0.5 * (self.contrast * g / norm).tanh()
                    + noise.sample(&mut rng);
                values[(r, c)] = pixel.clamp(0.0, 1.0);
            }
        }
        GrayImage::from_intensities(values)
    }
}

/// Write the dataset under `dir` (one 8-bit PGM per sample plus
/// manifest.json) and return the manifest.
pub fn write_texture_dataset(
    samples: &[TextureSample],
    dir: &Path,
) -> Result<Vec<ManifestEntry>> {
    let image_dir = dir.join("images");
    std::fs::create_dir_all(&image_dir)?;
    let mut manifest = Vec::with_capacity(samples.len());
    for s in samples {
        let name = format!(
            "c{}_o{}_s{}.pgm",
            s.class_id, s.orientation_degrees as i64, s.sample_index
        );
        let rel = PathBuf::from("images").join(&name);
        let quantized = s.image.clone().quantize(256)?;
        save_pgm(&quantized, &image_dir.join(&name))?;
        manifest.push(ManifestEntry {
            path: rel,
            class: s.class_id,
            orientation_degrees: s.orientation_degrees,
            sample_index: s.sample_index,
        });
    }
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

/// Read a manifest written by [`write_texture_dataset`].
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let data = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_small_cases() {
        let g = normalized_grid(3, 5).unwrap();
        assert_eq!(g.x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.y, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(normalized_grid(1, 5).is_err());
    }

    #[test]
    fn grid_endpoints_and_spacing_at_1023() {
        let g = normalized_grid(1023, 2).unwrap();
        assert_eq!(g.x[0], -1.0);
        assert_eq!(g.x[1022], 1.0);
        let h = g.x[1] - g.x[0];
        assert!((h - 2.0 / 1022.0).abs() < 1e-16);
    }

    #[test]
    fn grid_symmetry_is_exact() {
        for m in [5usize, 64, 1023] {
            let x = axis_coordinates(m);
            for k in 0..m {
                assert_eq!(x[k] + x[m - 1 - k], 0.0, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn model_image_hits_exact_bounds() {
        for (m, n) in [(33, 33), (64, 48)] {
            let img = model_image(m, n).unwrap();
            let min = img.intensities().iter().cloned().fold(f64::INFINITY, f64::min);
            let max = img.intensities().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(min, 0.0);
            assert_eq!(max, 1.0);
        }
    }

    #[test]
    fn model_function_vanishes_on_the_x_axis() {
        // pre-rescale f(0, y) = 0 since sin(0) = 0; on an odd grid the
        // center row is constant at the rescaled zero level
        let img = model_image(33, 33).unwrap();
        let mid = img.intensities().row(16);
        let first = mid[0];
        for &v in mid.iter() {
            assert!((v - first).abs() < 1e-15);
        }
    }

    #[test]
    fn model_image_frozen_probes() {
        // golden values frozen from the first generation and cross-checked
        // against an independent evaluation of the formula. The function is
        // odd in y, so rescaled values pair to 1 and the sum is exactly
        // rows*cols/2; the x = 0 row rescales to exactly 0.5.
        let img = model_image(1023, 1023).unwrap();
        let total: f64 = img.intensities().sum();
        assert!((total - 523264.5).abs() < 1e-5, "sum drifted: {total:.10}");
        assert_eq!(img.intensities()[(511, 255)], 0.5);
        let probe = img.intensities()[(100, 900)];
        assert!((probe - 0.44924601243261775).abs() < 1e-12, "probe {probe:.17}");
    }

    #[test]
    fn pgm_ascii_parse() {
        let file = b"P2\n# comment\n2 2\n255\n0 255\n128 64\n";
        let img = parse_pgm(file).unwrap();
        assert_eq!(img.levels().unwrap()[(0, 1)], 255);
        assert_eq!(img.level_count(), Some(256));
        assert!((img.intensities()[(1, 0)] - 128.0 / 255.0).abs() < 1e-15);
        assert!((img.intensities()[(1, 1)] - 64.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn pgm_distinct_errors() {
        assert!(matches!(parse_pgm(b"P3\n1 1\n255\n0"), Err(Error::PgmBadMagic(_))));
        assert!(matches!(
            parse_pgm(b"P2\n2 x\n255\n0 0 0 0"),
            Err(Error::PgmMalformedHeader(_))
        ));
        // 2x2 binary image with maxval 255 must carry exactly 4 payload bytes
        let six = b"P5\n2 2\n255\nABCDEF";
        assert!(matches!(
            parse_pgm(six),
            Err(Error::PgmPayloadSize { expected: 4, actual: 6 })
        ));
        let three = b"P5\n2 2\n255\nABC";
        assert!(matches!(
            parse_pgm(three),
            Err(Error::PgmPayloadSize { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn quantize_matches_level_floor_rule() {
        let img = GrayImage::from_intensities(ndarray::array![[0.0, 0.5], [0.999, 1.0]])
            .unwrap()
            .quantize(256)
            .unwrap();
        let l = img.levels().unwrap();
        assert_eq!(l[(0, 0)], 0);
        assert_eq!(l[(0, 1)], 128);
        assert_eq!(l[(1, 0)], 255);
        assert_eq!(l[(1, 1)], 255); // clamped
    }

    #[test]
    fn dataset_shape_and_determinism() {
        let orientations = [0.0, 30.0, 60.0, 90.0];
        let a = texture_dataset(5, &orientations, 2, 32, 9).unwrap();
        assert_eq!(a.len(), 5 * 4 * 2);
        let b = texture_dataset(5, &orientations, 2, 32, 9).unwrap();
        for (s, t) in a.iter().zip(&b) {
            assert_eq!(s.image.intensities(), t.image.intensities());
            assert_eq!(s.class_id, t.class_id);
        }
        // different seed, different pixels
        let c = texture_dataset(5, &orientations, 2, 32, 10).unwrap();
        assert_ne!(a[0].image.intensities(), c[0].image.intensities());
    }

    #[test]
    fn dataset_rejects_degenerate_requests() {
        assert!(texture_dataset(1, &[0.0], 1, 32, 0).is_err());
        assert!(texture_dataset(2, &[0.0], 1, 16, 0).is_err());
    }

    proptest! {
        #[test]
        fn pgm_round_trip_is_lossless(
            rows in 1usize..6,
            cols in 1usize..6,
            maxval in 1u32..=65535,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let levels = Array2::from_shape_fn((rows, cols), |_| {
                rng.random_range(0..=maxval) as u16
            });
            let img = GrayImage::from_levels(levels.clone(), maxval as usize + 1).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.pgm");
            save_pgm(&img, &path).unwrap();
            let back = load_pgm(&path).unwrap();
            prop_assert_eq!(back.levels().unwrap(), &levels);
            prop_assert_eq!(back.level_count(), Some(maxval as usize + 1));
        }
    }
}
