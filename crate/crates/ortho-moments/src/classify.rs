//! 1-nearest-neighbor classification with the stratified,
//! orientation-split evaluation protocol.
//!
//! The protocol trains on features from orientation 0 only and tests on
//! every other acquisition angle: per repeat, the 0-degree samples are
//! stratified-halved into a training set, and each non-zero orientation
//! contributes the test half of its own stratified split. Repeats own
//! deterministically derived seeds, so reports are bit-identical for a
//! given (data, repeats, seed) regardless of execution order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Parallel arrays of feature vectors, class labels and acquisition
/// orientations (degrees).
#[derive(Debug, Clone)]
pub struct LabeledFeatures {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    orientations: Vec<f64>,
}

impl LabeledFeatures {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        orientations: Vec<f64>,
    ) -> Result<Self> {
        if labels.len() != features.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: features.len(),
                got: labels.len(),
            });
        }
        if orientations.len() != features.len() {
            return Err(Error::LengthMismatch {
                what: "orientations",
                expected: features.len(),
                got: orientations.len(),
            });
        }
        if let Some(first) = features.first() {
            let dim = first.len();
            for f in &features {
                if f.len() != dim {
                    return Err(Error::FeatureLengthMismatch { expected: dim, got: f.len() });
                }
            }
        }
        Ok(LabeledFeatures { features, labels, orientations })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    fn class_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// Label each test point with the class of its Euclidean-nearest training
/// point; ties go to the lowest training index.
pub fn knn1(
    train_features: &[Vec<f64>],
    train_labels: &[usize],
    test_features: &[Vec<f64>],
) -> Result<Vec<usize>> {
    if train_features.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if train_labels.len() != train_features.len() {
        return Err(Error::LengthMismatch {
            what: "train labels",
            expected: train_features.len(),
            got: train_labels.len(),
        });
    }
    let dim = train_features[0].len();
    for f in train_features.iter().chain(test_features.iter()) {
        if f.len() != dim {
            return Err(Error::FeatureLengthMismatch { expected: dim, got: f.len() });
        }
    }
    let mut out = Vec::with_capacity(test_features.len());
    for t in test_features {
        let mut best = f64::INFINITY;
        let mut label = train_labels[0];
        for (f, &l) in train_features.iter().zip(train_labels) {
            let d: f64 = f.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best {
                best = d;
                label = l;
            }
        }
        out.push(label);
    }
    Ok(out)
}

/// C x C matrix of (true class, predicted class) counts.
#[derive(Debug, Clone)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn from_predictions(
        true_labels: &[usize],
        predicted: &[usize],
        class_count: usize,
    ) -> Result<Self> {
        if true_labels.len() != predicted.len() {
            return Err(Error::LengthMismatch {
                what: "predictions",
                expected: true_labels.len(),
                got: predicted.len(),
            });
        }
        let mut counts = vec![vec![0usize; class_count]; class_count];
        for (&t, &p) in true_labels.iter().zip(predicted) {
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|row| row.iter().sum::<usize>()).sum()
    }
}

/// Macro accuracy: the one-vs-rest index (TP + TN) / total per class,
/// averaged over classes so each class weighs equally.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("empty confusion matrix".into()));
    }
    let c = cm.counts().len();
    let mut sum = 0.0;
    for class in 0..c {
        let tp = cm.counts()[class][class];
        let fp: usize = (0..c).filter(|&t| t != class).map(|t| cm.counts()[t][class]).sum();
        let fn_: usize =
            (0..c).filter(|&p| p != class).map(|p| cm.counts()[class][p]).sum();
        let tn = total - tp - fp - fn_;
        sum += (tp + tn) as f64 / total as f64;
    }
    Ok(sum / c as f64)
}

/// Plain fraction of correct predictions.
pub fn micro_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("empty confusion matrix".into()));
    }
    let correct: usize = (0..cm.counts().len()).map(|i| cm.counts()[i][i]).sum();
    Ok(correct as f64 / total as f64)
}

/// Per-class seeded shuffle; floor(fraction * n_c) samples of each class go
/// to the training side, the rest to the test side.
pub fn stratified_split(
    labels: &[usize],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::BadFraction { fraction });
    }
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..=max_label {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall { class, count: idx.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[class as u64]));
        idx.shuffle(&mut rng);
        let take = (fraction * idx.len() as f64).floor() as usize;
        train.extend_from_slice(&idx[..take]);
        test.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Mean/std of the accuracy index at one test orientation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientationAccuracy {
    pub angle: f64,
    pub mean: f64,
    pub std: f64,
}

/// Aggregated protocol outcome; serializes to the report JSON interface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub descriptor_id: String,
    pub per_orientation: Vec<OrientationAccuracy>,
    pub grand_mean: f64,
    pub micro_mean: f64,
    pub repeats: usize,
    pub seed: u64,
}

/// Run the rotation protocol: for each repeat, train 1-NN on a stratified
/// half of the orientation-0 samples and evaluate on the stratified test
/// half of every other orientation. Returns per-orientation means/stds over
/// repeats (macro accuracy), the grand mean, and the micro mean alongside.
pub fn rotation_protocol(
    data: &LabeledFeatures,
    descriptor_id: &str,
    repeats: usize,
    seed: u64,
) -> Result<ClassificationReport> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let zero_idx: Vec<usize> = (0..data.len())
        .filter(|&i| data.orientations()[i] == 0.0)
        .collect();
    if zero_idx.is_empty() {
        return Err(Error::MissingZeroOrientation);
    }
    let mut other: Vec<f64> = data
        .orientations()
        .iter()
        .copied()
        .filter(|&o| o != 0.0)
        .collect();
    other.sort_by(|a, b| a.partial_cmp(b).expect("finite orientations"));
    other.dedup();
    if other.is_empty() {
        return Err(Error::InvalidArgument(
            "rotation protocol needs at least one non-zero orientation".into(),
        ));
    }
    let class_count = data.class_count();

    // accuracies[r] = per-orientation (macro, micro) pairs for repeat r
    let accuracies: Result<Vec<Vec<(f64, f64)>>> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let repeat_seed = derive_seed(seed, &[r as u64]);
            let zero_labels: Vec<usize> =
                zero_idx.iter().map(|&i| data.labels()[i]).collect();
            let (train_part, _) =
                stratified_split(&zero_labels, 0.5, derive_seed(repeat_seed, &[0]))?;
            let train_idx: Vec<usize> = train_part.iter().map(|&i| zero_idx[i]).collect();
            let train_features: Vec<Vec<f64>> =
                train_idx.iter().map(|&i| data.features()[i].clone()).collect();
            let train_labels: Vec<usize> =
                train_idx.iter().map(|&i| data.labels()[i]).collect();

            let mut per_theta = Vec::with_capacity(other.len());
            for (t, &theta) in other.iter().enumerate() {
                let theta_idx: Vec<usize> = (0..data.len())
                    .filter(|&i| data.orientations()[i] == theta)
                    .collect();
                let theta_labels: Vec<usize> =
                    theta_idx.iter().map(|&i| data.labels()[i]).collect();
                let (_, test_part) = stratified_split(
                    &theta_labels,
                    0.5,
                    derive_seed(repeat_seed, &[t as u64 + 1]),
                )?;
                let test_idx: Vec<usize> =
                    test_part.iter().map(|&i| theta_idx[i]).collect();
                let test_features: Vec<Vec<f64>> =
                    test_idx.iter().map(|&i| data.features()[i].clone()).collect();
                let test_labels: Vec<usize> =
                    test_idx.iter().map(|&i| data.labels()[i]).collect();

                let predicted = knn1(&train_features, &train_labels, &test_features)?;
                let cm =
                    ConfusionMatrix::from_predictions(&test_labels, &predicted, class_count)?;
                per_theta.push((accuracy(&cm)?, micro_accuracy(&cm)?));
            }
            Ok(per_theta)
        })
        .collect();
    let accuracies = accuracies?;

    let mut per_orientation = Vec::with_capacity(other.len());
    let mut micro_sum = 0.0;
    for (t, &theta) in other.iter().enumerate() {
        let macros: Vec<f64> = accuracies.iter().map(|rep| rep[t].0).collect();
        let micros: Vec<f64> = accuracies.iter().map(|rep| rep[t].1).collect();
        let mean = macros.iter().sum::<f64>() / repeats as f64;
        // population std: well-defined for a single repeat
        let var =
            macros.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / repeats as f64;
        per_orientation.push(OrientationAccuracy { angle: theta, mean, std: var.sqrt() });
        micro_sum += micros.iter().sum::<f64>() / repeats as f64;
    }
    let grand_mean =
        per_orientation.iter().map(|o| o.mean).sum::<f64>() / per_orientation.len() as f64;
    let micro_mean = micro_sum / per_orientation.len() as f64;

    Ok(ClassificationReport {
        descriptor_id: descriptor_id.to_string(),
        per_orientation,
        grand_mean,
        micro_mean,
        repeats,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_point_wins() {
        let train = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let labels = vec![7, 9];
        let pred = knn1(&train, &labels, &[vec![0.1, 0.0]]).unwrap();
        assert_eq!(pred, vec![7]);
    }

    #[test]
    fn ties_break_to_lowest_training_index() {
        let train = vec![vec![-1.0], vec![1.0]];
        let labels = vec![0, 1];
        let pred = knn1(&train, &labels, &[vec![0.0]]).unwrap();
        assert_eq!(pred, vec![0]);
    }

    #[test]
    fn self_classification_is_perfect() {
        let feats = vec![vec![0.0, 1.0], vec![3.0, 0.5], vec![-2.0, 2.0]];
        let labels = vec![0, 1, 2];
        let pred = knn1(&feats, &labels, &feats).unwrap();
        assert_eq!(pred, labels);
    }

    #[test]
    fn knn_rejects_bad_shapes() {
        assert!(matches!(knn1(&[], &[], &[vec![1.0]]), Err(Error::EmptyTrainingSet)));
        let train = vec![vec![0.0, 0.0]];
        assert!(matches!(
            knn1(&train, &[0], &[vec![1.0]]),
            Err(Error::FeatureLengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn knn_is_translation_invariant() {
        let train = vec![vec![0.0, 2.0], vec![4.0, -1.0], vec![1.0, 1.0]];
        let labels = vec![0, 1, 2];
        let test = vec![vec![0.4, 1.7], vec![3.0, 0.0]];
        let base = knn1(&train, &labels, &test).unwrap();
        let shift = [10.0, -3.5];
        let train2: Vec<Vec<f64>> = train
            .iter()
            .map(|f| f.iter().zip(shift).map(|(v, s)| v + s).collect())
            .collect();
        let test2: Vec<Vec<f64>> = test
            .iter()
            .map(|f| f.iter().zip(shift).map(|(v, s)| v + s).collect())
            .collect();
        assert_eq!(base, knn1(&train2, &labels, &test2).unwrap());
    }

    #[test]
    fn accuracy_perfect_diagonal() {
        let cm = ConfusionMatrix { counts: vec![vec![5, 0], vec![0, 5]] };
        assert_eq!(accuracy(&cm).unwrap(), 1.0);
        assert_eq!(micro_accuracy(&cm).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_collapsed_predictions() {
        // both classes predicted as class 0: each one-vs-rest index is 0.5
        let cm = ConfusionMatrix { counts: vec![vec![5, 0], vec![5, 0]] };
        assert_eq!(accuracy(&cm).unwrap(), 0.5);
        assert_eq!(micro_accuracy(&cm).unwrap(), 0.5);
    }

    #[test]
    fn accuracy_three_class_collapse() {
        // 9 balanced samples all predicted as class 1:
        // classes contribute 3/9, 6/9, 6/9 -> mean 5/9
        let cm = ConfusionMatrix {
            counts: vec![vec![0, 3, 0], vec![0, 3, 0], vec![0, 3, 0]],
        };
        let a = accuracy(&cm).unwrap();
        assert!((a - 5.0 / 9.0).abs() < 1e-15);
        assert!((micro_accuracy(&cm).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn accuracy_invariant_under_relabeling() {
        let cm = ConfusionMatrix {
            counts: vec![vec![4, 1, 0], vec![2, 2, 1], vec![0, 0, 5]],
        };
        // permute classes (0 1 2) -> (2 0 1) on both axes
        let p = [2usize, 0, 1];
        let mut permuted = vec![vec![0usize; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                permuted[p[i]][p[j]] = cm.counts[i][j];
            }
        }
        let cm2 = ConfusionMatrix { counts: permuted };
        assert!((accuracy(&cm).unwrap() - accuracy(&cm2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let labels = vec![0; 10];
        let (train, test) = stratified_split(&labels, 0.5, 3).unwrap();
        assert_eq!(train.len(), 5);
        assert_eq!(test.len(), 5);
        let again = stratified_split(&labels, 0.5, 3).unwrap();
        assert_eq!((train, test), again);

        let mut labels = vec![0; 8];
        labels.extend(vec![1; 6]);
        let (train, _) = stratified_split(&labels, 0.5, 3).unwrap();
        let zeros = train.iter().filter(|&&i| labels[i] == 0).count();
        let ones = train.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(zeros, 4);
        assert_eq!(ones, 3);
    }

    #[test]
    fn split_partitions_indices() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 0];
        let (train, test) = stratified_split(&labels, 0.4, 17).unwrap();
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_degenerate_input() {
        assert!(matches!(
            stratified_split(&[0, 0, 1], 0.5, 1),
            Err(Error::ClassTooSmall { class: 1, count: 1 })
        ));
        assert!(matches!(
            stratified_split(&[0, 0], 1.0, 1),
            Err(Error::BadFraction { .. })
        ));
    }

    fn toy_data() -> LabeledFeatures {
        // orientation-invariant, perfectly separated classes
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut orientations = Vec::new();
        for class in 0..3usize {
            for &theta in &[0.0, 30.0, 60.0] {
                for s in 0..4usize {
                    features.push(vec![class as f64 * 10.0, s as f64 * 0.01]);
                    labels.push(class);
                    orientations.push(theta);
                }
            }
        }
        LabeledFeatures::new(features, labels, orientations).unwrap()
    }

    #[test]
    fn invariant_features_classify_perfectly() {
        let report = rotation_protocol(&toy_data(), "toy", 1, 7).unwrap();
        for o in &report.per_orientation {
            assert_eq!(o.mean, 1.0);
        }
        assert_eq!(report.grand_mean, 1.0);
        assert_eq!(report.micro_mean, 1.0);
    }

    #[test]
    fn protocol_is_deterministic() {
        let a = rotation_protocol(&toy_data(), "toy", 100, 42).unwrap();
        let b = rotation_protocol(&toy_data(), "toy", 100, 42).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn split_partition_property() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(
                &(
                    proptest::collection::vec(0usize..4, 8..60),
                    0u64..1000,
                    1usize..9,
                ),
                |(mut labels, seed, frac10)| {
                    // guarantee every present class has at least 2 samples
                    labels.extend(labels.clone());
                    let fraction = frac10 as f64 / 10.0;
                    let (train, test) = stratified_split(&labels, fraction, seed).unwrap();
                    let mut all: Vec<usize> =
                        train.iter().chain(test.iter()).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
                    Ok(())
                },
            )
            .unwrap();
    }

    #[test]
    fn protocol_needs_zero_orientation() {
        let data = LabeledFeatures::new(
            vec![vec![0.0], vec![1.0]],
            vec![0, 1],
            vec![30.0, 30.0],
        )
        .unwrap();
        assert!(matches!(
            rotation_protocol(&data, "x", 1, 0),
            Err(Error::MissingZeroOrientation)
        ));
    }
}
