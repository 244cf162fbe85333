//! Gray-level co-occurrence matrices and moments-from-GLCM feature vectors.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::imageio::GrayImage;
use crate::moments::{
    chebyshev2_moments, discrete_chebyshev_moments, legendre_moments,
    legendre_moments_closed_form, MomentFamily, MomentMatrix,
};

/// The four canonical co-occurrence directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlcmAngle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl GlcmAngle {
    pub const ALL: [GlcmAngle; 4] = [
        GlcmAngle::Deg0,
        GlcmAngle::Deg45,
        GlcmAngle::Deg90,
        GlcmAngle::Deg135,
    ];

    /// (row, col) displacement for distance `d`.
    pub fn offset(&self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            GlcmAngle::Deg0 => (0, d),
            GlcmAngle::Deg45 => (-d, d),
            GlcmAngle::Deg90 => (-d, 0),
            GlcmAngle::Deg135 => (-d, -d),
        }
    }

    pub fn degrees(&self) -> u32 {
        match self {
            GlcmAngle::Deg0 => 0,
            GlcmAngle::Deg45 => 45,
            GlcmAngle::Deg90 => 90,
            GlcmAngle::Deg135 => 135,
        }
    }

    pub fn from_degrees(degrees: u32) -> Result<Self> {
        match degrees {
            0 => Ok(GlcmAngle::Deg0),
            45 => Ok(GlcmAngle::Deg45),
            90 => Ok(GlcmAngle::Deg90),
            135 => Ok(GlcmAngle::Deg135),
            _ => Err(Error::BadAngle { degrees }),
        }
    }
}

/// Distance, angle set and level count for feature extraction.
#[derive(Debug, Clone)]
pub struct GlcmConfig {
    pub distance: usize,
    pub angles: Vec<GlcmAngle>,
    pub level_count: usize,
    /// Count each pair in both directions. Off by default: the canonical
    /// form here is single-direction counting.
    pub symmetric: bool,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        GlcmConfig {
            distance: 1,
            angles: GlcmAngle::ALL.to_vec(),
            level_count: 256,
            symmetric: false,
        }
    }
}

impl GlcmConfig {
    fn validate(&self) -> Result<()> {
        if self.distance == 0 {
            return Err(Error::InvalidArgument("GLCM distance must be >= 1".into()));
        }
        if self.angles.is_empty() {
            return Err(Error::InvalidArgument("GLCM needs at least one angle".into()));
        }
        Ok(())
    }
}

/// L x L pair-count matrix for one (distance, angle).
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    counts: Array2<f64>,
    distance: usize,
    angle: GlcmAngle,
    level_count: usize,
    normalized: bool,
}

impl CooccurrenceMatrix {
    pub fn counts(&self) -> &Array2<f64> {
        &self.counts
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn angle(&self) -> GlcmAngle {
        self.angle
    }

    pub fn level_count(&self) -> usize {
        self.level_count
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Scale the counts to sum to 1 (probability form). Features are
    /// extracted from the normalized matrix so they do not depend on the
    /// image area.
    pub fn normalize(mut self) -> Self {
        let total: f64 = self.counts.sum();
        if total > 0.0 {
            self.counts.mapv_inplace(|v| v / total);
        }
        self.normalized = true;
        self
    }

    /// View the (normalized) matrix as an L x L intensity image.
    pub fn to_image(&self) -> Result<GrayImage> {
        GrayImage::from_intensities(self.counts.clone())
    }
}

/// Count level pairs (p, p + offset) over the quantized image, skipping
/// pairs that leave the raster. Single-direction counting unless
/// `symmetric` is set.
pub fn glcm(image: &GrayImage, distance: usize, angle: GlcmAngle) -> Result<CooccurrenceMatrix> {
    glcm_with(image, distance, angle, false)
}

pub fn glcm_with(
    image: &GrayImage,
    distance: usize,
    angle: GlcmAngle,
    symmetric: bool,
) -> Result<CooccurrenceMatrix> {
    let levels = image.levels().ok_or(Error::MissingLevels)?;
    let level_count = image.level_count().expect("levels imply level_count");
    if distance == 0 {
        return Err(Error::InvalidArgument("GLCM distance must be >= 1".into()));
    }
    let (rows, cols) = (levels.nrows() as isize, levels.ncols() as isize);
    let (dr, dc) = angle.offset(distance);
    let mut counts = Array2::zeros((level_count, level_count));
    for r in 0..rows {
        let r2 = r + dr;
        if r2 < 0 || r2 >= rows {
            continue;
        }
        for c in 0..cols {
            let c2 = c + dc;
            if c2 < 0 || c2 >= cols {
                continue;
            }
            let a = levels[(r as usize, c as usize)] as usize;
            let b = levels[(r2 as usize, c2 as usize)] as usize;
            counts[(a, b)] += 1.0;
            if symmetric {
                counts[(b, a)] += 1.0;
            }
        }
    }
    Ok(CooccurrenceMatrix {
        counts,
        distance,
        angle,
        level_count,
        normalized: false,
    })
}

/// Where a feature vector came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSource {
    Image,
    Glcm { distance: usize, level_count: usize, angles: Vec<GlcmAngle> },
}

/// Provenance of a feature vector: family, order and extraction source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorId {
    pub family: MomentFamily,
    pub order: usize,
    pub source: FeatureSource,
}

impl std::fmt::Display for DescriptorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.source {
            FeatureSource::Image => {
                write!(f, "image:{}:q{}", self.family.id(), self.order)
            }
            FeatureSource::Glcm { distance, level_count, angles } => {
                let a: Vec<String> =
                    angles.iter().map(|x| x.degrees().to_string()).collect();
                write!(
                    f,
                    "glcm:{}:q{}:d{}:L{}:a{}",
                    self.family.id(),
                    self.order,
                    distance,
                    level_count,
                    a.join("-")
                )
            }
        }
    }
}

/// A flat descriptor with its provenance.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub descriptor: DescriptorId,
}

/// Number of entries in the triangular set {(i, j): i + j <= q}.
pub fn triangular_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Row-major triangular extraction: i outer, j inner, i + j <= q.
fn triangular_entries(mu: &MomentMatrix) -> Vec<f64> {
    let q = mu.order();
    let mut out = Vec::with_capacity(triangular_len(q));
    for i in 0..=q {
        for j in 0..=(q - i) {
            out.push(mu.mu()[(i, j)]);
        }
    }
    out
}

fn moments_for(image: &GrayImage, family: MomentFamily, order: usize) -> Result<MomentMatrix> {
    match family {
        MomentFamily::Legendre => legendre_moments(image, order),
        MomentFamily::ChebyshevSecondKind => chebyshev2_moments(image, order),
        MomentFamily::DiscreteChebyshev => discrete_chebyshev_moments(image, order),
        MomentFamily::LegendreClosedForm => legendre_moments_closed_form(image, order),
    }
}

/// Moments of the image itself, triangular layout, single block.
pub fn image_moment_features(
    image: &GrayImage,
    family: MomentFamily,
    order: usize,
) -> Result<FeatureVector> {
    let mm = moments_for(image, family, order)?;
    Ok(FeatureVector {
        values: triangular_entries(&mm),
        descriptor: DescriptorId { family, order, source: FeatureSource::Image },
    })
}

/// For each configured angle: GLCM, normalize to sum 1, treat the L x L
/// matrix as an intensity image, take its order-q moments and the
/// triangular entries; blocks are concatenated in the configured angle
/// order.
pub fn glcm_moment_features(
    image: &GrayImage,
    family: MomentFamily,
    order: usize,
    config: &GlcmConfig,
) -> Result<FeatureVector> {
    config.validate()?;
    let quantized;
    let source = if image.level_count() == Some(config.level_count) {
        image
    } else {
        quantized = image.clone().quantize(config.level_count)?;
        &quantized
    };
    let mut values = Vec::with_capacity(config.angles.len() * triangular_len(order));
    for &angle in &config.angles {
        let cm = glcm_with(source, config.distance, angle, config.symmetric)?.normalize();
        let mm = moments_for(&cm.to_image()?, family, order)?;
        values.extend(triangular_entries(&mm));
    }
    Ok(FeatureVector {
        values,
        descriptor: DescriptorId {
            family,
            order,
            source: FeatureSource::Glcm {
                distance: config.distance,
                level_count: config.level_count,
                angles: config.angles.clone(),
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::model_image;
    use ndarray::array;

    fn two_by_two() -> GrayImage {
        let levels = array![[0u16, 1], [0, 1]];
        GrayImage::from_levels(levels, 2).unwrap()
    }

    #[test]
    fn horizontal_pairs() {
        let cm = glcm(&two_by_two(), 1, GlcmAngle::Deg0).unwrap();
        assert_eq!(cm.counts()[(0, 1)], 2.0);
        assert_eq!(cm.counts().sum(), 2.0);
    }

    #[test]
    fn vertical_pairs() {
        let cm = glcm(&two_by_two(), 1, GlcmAngle::Deg90).unwrap();
        assert_eq!(cm.counts()[(0, 0)], 1.0);
        assert_eq!(cm.counts()[(1, 1)], 1.0);
        assert_eq!(cm.counts().sum(), 2.0);
    }

    #[test]
    fn constant_image_concentrates_on_the_diagonal() {
        let levels = Array2::from_elem((5, 7), 3u16);
        let img = GrayImage::from_levels(levels, 8).unwrap();
        for angle in GlcmAngle::ALL {
            let cm = glcm(&img, 1, angle).unwrap();
            let total = cm.counts().sum();
            assert_eq!(cm.counts()[(3, 3)], total);
            assert!(total > 0.0);
        }
    }

    #[test]
    fn horizontal_pair_count_formula() {
        // d=1 at 0 degrees pairs every pixel with its right neighbor:
        // rows * (cols - 1)
        let levels = Array2::from_shape_fn((6, 9), |(r, c)| ((r * 9 + c) % 4) as u16);
        let img = GrayImage::from_levels(levels, 4).unwrap();
        let cm = glcm(&img, 1, GlcmAngle::Deg0).unwrap();
        assert_eq!(cm.counts().sum(), (6 * 8) as f64);
    }

    #[test]
    fn missing_levels_is_an_error() {
        let img = GrayImage::from_intensities(Array2::from_elem((4, 4), 0.5)).unwrap();
        assert!(matches!(glcm(&img, 1, GlcmAngle::Deg0), Err(Error::MissingLevels)));
    }

    #[test]
    fn normalization_sums_to_one() {
        let img = model_image(32, 32).unwrap().quantize(16).unwrap();
        let cm = glcm(&img, 1, GlcmAngle::Deg45).unwrap().normalize();
        assert!((cm.counts().sum() - 1.0).abs() <= 1e-12);
        assert!(cm.is_normalized());
    }

    #[test]
    fn symmetric_counting_doubles_mass() {
        let img = two_by_two();
        let cm = glcm_with(&img, 1, GlcmAngle::Deg0, true).unwrap();
        assert_eq!(cm.counts()[(0, 1)], 2.0);
        assert_eq!(cm.counts()[(1, 0)], 2.0);
    }

    #[test]
    fn brute_force_equivalence() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rows = rng.random_range(2..=32);
            let cols = rng.random_range(2..=32);
            let l = rng.random_range(2..=16);
            let levels =
                Array2::from_shape_fn((rows, cols), |_| rng.random_range(0..l) as u16);
            let img = GrayImage::from_levels(levels.clone(), l).unwrap();
            let d = rng.random_range(1..=2);
            for angle in GlcmAngle::ALL {
                let cm = glcm(&img, d, angle).unwrap();
                let (dr, dc) = angle.offset(d);
                let mut expect = Array2::<f64>::zeros((l, l));
                for r in 0..rows as isize {
                    for c in 0..cols as isize {
                        let (r2, c2) = (r + dr, c + dc);
                        if r2 >= 0 && r2 < rows as isize && c2 >= 0 && c2 < cols as isize {
                            expect[(
                                levels[(r as usize, c as usize)] as usize,
                                levels[(r2 as usize, c2 as usize)] as usize,
                            )] += 1.0;
                        }
                    }
                }
                assert_eq!(cm.counts(), &expect);
            }
        }
    }

    #[test]
    fn feature_lengths_match_published_sizes() {
        assert_eq!(triangular_len(3), 10);
        assert_eq!(triangular_len(10), 66);
        assert_eq!(4 * triangular_len(3), 40);
        assert_eq!(4 * triangular_len(45), 4324);
        for q in 0..=45 {
            assert_eq!(triangular_len(q), (q + 1) * (q + 2) / 2);
        }

        let img = model_image(64, 64).unwrap().quantize(64).unwrap();
        let fv = image_moment_features(&img, MomentFamily::DiscreteChebyshev, 3).unwrap();
        assert_eq!(fv.values.len(), 10);
        let config = GlcmConfig { level_count: 64, ..GlcmConfig::default() };
        let gv =
            glcm_moment_features(&img, MomentFamily::DiscreteChebyshev, 3, &config).unwrap();
        assert_eq!(gv.values.len(), 40);
        assert_eq!(gv.descriptor.to_string(), "glcm:dcheb:q3:d1:L64:a0-45-90-135");
    }

    #[test]
    fn continuous_families_accept_glcm_images() {
        // a 64x64 co-occurrence matrix goes through the Legendre pipeline
        // via the usual odd-size trim
        let img = model_image(48, 48).unwrap().quantize(64).unwrap();
        let config = GlcmConfig { level_count: 64, ..GlcmConfig::default() };
        for family in [MomentFamily::Legendre, MomentFamily::ChebyshevSecondKind] {
            let fv = glcm_moment_features(&img, family, 3, &config).unwrap();
            assert_eq!(fv.values.len(), 40);
            assert!(fv.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn identical_images_identical_features() {
        let img = model_image(48, 48).unwrap().quantize(32).unwrap();
        let a = image_moment_features(&img, MomentFamily::Legendre, 4).unwrap();
        let b = image_moment_features(&img, MomentFamily::Legendre, 4).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn distinct_texture_classes_are_separated() {
        let samples = crate::imageio::texture_dataset(2, &[0.0], 1, 32, 4).unwrap();
        let config = GlcmConfig { level_count: 64, ..GlcmConfig::default() };
        let a = glcm_moment_features(&samples[0].image, MomentFamily::DiscreteChebyshev, 5, &config)
            .unwrap();
        let b = glcm_moment_features(&samples[1].image, MomentFamily::DiscreteChebyshev, 5, &config)
            .unwrap();
        let dist: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(dist > 0.0);
    }

    #[test]
    fn transposed_image_permutes_legendre_features() {
        // transposition swaps the axes of the moment integral, so the
        // triangular vector of the transpose is the (i, j) -> (j, i)
        // permutation of the original
        let img = model_image(65, 65).unwrap();
        let transposed = GrayImage::from_intensities(img.intensities().t().to_owned()).unwrap();
        let q = 6;
        let a = legendre_moments(&img, q).unwrap();
        let b = legendre_moments(&transposed, q).unwrap();
        for i in 0..=q {
            for j in 0..=q {
                let d = (a.mu()[(i, j)] - b.mu()[(j, i)]).abs();
                assert!(d <= 1e-10, "mu[{i}][{j}] vs transpose: {d:.3e}");
            }
        }
    }
}
