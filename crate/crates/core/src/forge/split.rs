use crate::class_code::ClassCode;
use crate::error::{Error, Result};
use crate::rng::{mix_seed, PortableRng};

use super::{DatasetSpec, LabeledSet, Quota, Sample, FULL_TEST, FULL_TRAIN};

const TRAIN_ORDER_TAG: u64 = 0x0074_7261_696e;
const TEST_ORDER_TAG: u64 = 0x7465_7374;

/// Splits `total` into integer parts proportional to `weights` summing to
/// exactly `total`: floors first, then one extra unit to the parts with the
/// largest fractional remainders (ties to the lower index).
pub fn apportion(weights: &[u64], total: u64) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut parts: Vec<u64> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let num = w as u128 * total as u128;
        parts.push((num / sum as u128) as u64);
        remainders.push((num % sum as u128, i));
    }
    let short = total - parts.iter().sum::<u64>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(short as usize) {
        parts[i] += 1;
    }
    parts
}

/// Pools every glyph by its dataset class, shuffles each pool with its own
/// seed (`spec.seed ^ class`), and draws the test quota followed by the
/// training quota. The training and test lists are then each shuffled
/// globally, and the validation tail is carved if the spec has one.
///
/// `labels[i]` is the source class of store entry `i`.
pub fn pool_and_redraw(labels: &[ClassCode], spec: &DatasetSpec) -> Result<LabeledSet> {
    let class_count = spec.class_count();
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &label) in labels.iter().enumerate() {
        if let Some(c) = spec.merge.apply(label) {
            pools[c].push(i);
        }
    }

    let sizes: Vec<usize> = pools.iter().map(Vec::len).collect();
    let quotas = class_quotas(&sizes, spec)?;

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, (pool, (n_train, n_test))) in pools.iter_mut().zip(quotas).enumerate() {
        PortableRng::new(spec.seed ^ class as u64).shuffle(pool);
        let label = class as u16;
        test.extend(pool[..n_test].iter().map(|&index| Sample { index, label }));
        train.extend(
            pool[n_test..n_test + n_train]
                .iter()
                .map(|&index| Sample { index, label }),
        );
    }
    PortableRng::new(mix_seed(spec.seed, &[TRAIN_ORDER_TAG])).shuffle(&mut train);
    PortableRng::new(mix_seed(spec.seed, &[TEST_ORDER_TAG])).shuffle(&mut test);

    let set = LabeledSet {
        train,
        validation: Vec::new(),
        test,
        class_count,
    };
    carve_validation(set, spec)
}

fn class_quotas(sizes: &[usize], spec: &DatasetSpec) -> Result<Vec<(usize, usize)>> {
    let name = |c: usize| spec.merge.names()[c].clone();
    match spec.quota {
        Quota::Proportional => {
            let total: u64 = sizes.iter().map(|&n| n as u64).sum();
            let full = FULL_TRAIN + FULL_TEST;
            // round half up
            let test_total = ((2 * total as u128 * FULL_TEST as u128 + full as u128)
                / (2 * full as u128)) as u64;
            let weights: Vec<u64> = sizes.iter().map(|&n| n as u64).collect();
            let tests = apportion(&weights, test_total);
            Ok(sizes
                .iter()
                .zip(tests)
                .map(|(&n, t)| (n - t as usize, t as usize))
                .collect())
        }
        Quota::PerClass { train, test } => sizes
            .iter()
            .enumerate()
            .map(|(c, &n)| {
                if train + test > n {
                    Err(Error::Quota {
                        class: name(c),
                        needed: train + test,
                        available: n,
                    })
                } else {
                    Ok((train, test))
                }
            })
            .collect(),
        Quota::LargestBalanced {
            train_parts,
            test_parts,
        } => {
            let parts = train_parts + test_parts;
            let (smallest, &n) = sizes
                .iter()
                .enumerate()
                .min_by_key(|&(_, n)| *n)
                .ok_or_else(|| Error::Invalid("dataset has no classes".into()))?;
            let unit = n / parts;
            if unit == 0 {
                return Err(Error::Quota {
                    class: name(smallest),
                    needed: parts,
                    available: n,
                });
            }
            Ok(vec![(unit * train_parts, unit * test_parts); sizes.len()])
        }
    }
}

/// Moves a class-balanced block of `|test|` training samples to the end of
/// the training order and labels it validation. For each class the last
/// `|test| / classes` occurrences are taken; everything else keeps its order.
/// Specs without validation pass through unchanged.
pub fn carve_validation(mut set: LabeledSet, spec: &DatasetSpec) -> Result<LabeledSet> {
    if !spec.has_validation {
        return Ok(set);
    }
    let mut train = std::mem::take(&mut set.train);
    train.append(&mut set.validation);
    let size = set.test.len();
    if train.len() < 2 * size {
        return Err(Error::Partition(format!(
            "training set of {} is smaller than twice the test set of {size}",
            train.len()
        )));
    }
    let classes = set.class_count;
    if classes == 0 || !size.is_multiple_of(classes) {
        return Err(Error::Partition(format!(
            "test size {size} cannot be split evenly over {classes} classes"
        )));
    }
    let per_class = size / classes;
    let mut wanted = vec![per_class; classes];
    let mut in_tail = vec![false; train.len()];
    for (i, s) in train.iter().enumerate().rev() {
        let slot = &mut wanted[s.label as usize];
        if *slot > 0 {
            *slot -= 1;
            in_tail[i] = true;
        }
    }
    if let Some(c) = wanted.iter().position(|&w| w > 0) {
        return Err(Error::Partition(format!(
            "class {} has too few training samples for a balanced validation tail",
            spec.merge.names().get(c).cloned().unwrap_or_else(|| c.to_string())
        )));
    }
    let (tail, head): (Vec<_>, Vec<_>) = train
        .into_iter()
        .zip(in_tail)
        .partition(|&(_, t)| t);
    set.train = head.into_iter().map(|(s, _)| s).collect();
    set.validation = tail.into_iter().map(|(s, _)| s).collect();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{DatasetName, LettersClasses};
    use std::collections::HashSet;

    fn corpus(per_class: impl Fn(ClassCode) -> usize) -> Vec<ClassCode> {
        let mut labels = Vec::new();
        for c in ClassCode::all() {
            labels.extend(std::iter::repeat_n(c, per_class(c)));
        }
        // interleave so store order is not class-sorted
        let mut rng = PortableRng::new(99);
        rng.shuffle(&mut labels);
        labels
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(&[1, 1, 1], 2), vec![1, 1, 0]);
        assert_eq!(apportion(&[10, 20, 30], 6), vec![1, 2, 3]);
        assert_eq!(apportion(&[5, 5], 0), vec![0, 0]);
        assert_eq!(apportion(&[0, 0], 3), vec![0, 0]);
        let w = [3, 7, 11, 13, 17];
        assert_eq!(apportion(&w, 29).iter().sum::<u64>(), 29);
    }

    #[test]
    fn full_corpus_ratio_is_reproduced() {
        // class sizes summing to the full corpus size
        let mut sizes = vec![13_000usize; 62];
        let extra = 814_255 - 13_000 * 62;
        for i in 0..extra {
            sizes[i % 62] += 1;
        }
        let spec = DatasetSpec::standard(DatasetName::ByClass, 1);
        let q = class_quotas(&sizes, &spec).unwrap();
        let train: usize = q.iter().map(|p| p.0).sum();
        let test: usize = q.iter().map(|p| p.1).sum();
        assert_eq!((train, test), (697_932, 116_323));
    }

    #[test]
    fn balanced_structure() {
        let labels = corpus(|c| 2900 + c.index() * 3);
        let set = pool_and_redraw(&labels, &DatasetSpec::standard(DatasetName::Balanced, 5)).unwrap();
        assert_eq!(set.class_count, 47);
        assert_eq!(set.train.len() + set.validation.len(), 112_800);
        assert_eq!(set.test.len(), 18_800);
        assert_eq!(set.validation.len(), 18_800);
        assert!(LabeledSet::class_histogram(&set.test, 47).iter().all(|&n| n == 400));
        assert!(LabeledSet::class_histogram(&set.validation, 47).iter().all(|&n| n == 400));
        let full = set.full_train();
        assert!(LabeledSet::class_histogram(&full, 47).iter().all(|&n| n == 2400));
        let mut seen = HashSet::new();
        for s in full.iter().chain(&set.test) {
            assert!(seen.insert(s.index), "duplicate glyph {}", s.index);
            assert_eq!(
                DatasetSpec::standard(DatasetName::Balanced, 5).merge.apply(labels[s.index]),
                Some(s.label as usize)
            );
        }
    }

    #[test]
    fn quota_error_names_class() {
        let labels = corpus(|_| 100);
        let mut spec = DatasetSpec::standard(DatasetName::Mnist, 0);
        spec.quota = Quota::PerClass { train: 99_999, test: 1 };
        match pool_and_redraw(&labels, &spec) {
            Err(Error::Quota { class, needed, available }) => {
                assert_eq!(class, "0");
                assert_eq!((needed, available), (100_000, 100));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn proportional_keeps_everything() {
        let labels = corpus(|c| 50 + c.index());
        let spec = DatasetSpec::standard(DatasetName::ByMerge, 3);
        let set = pool_and_redraw(&labels, &spec).unwrap();
        assert!(set.validation.is_empty());
        assert_eq!(set.train.len() + set.test.len(), labels.len());
        let expected_test =
            ((labels.len() as f64) * 116_323.0 / 814_255.0).round() as usize;
        assert_eq!(set.test.len(), expected_test);
    }

    #[test]
    fn letters_largest_balanced() {
        let labels = corpus(|c| if c.is_digit() { 10 } else { 71 + 3 * (c.index() % 5) });
        let spec = DatasetSpec::standard(DatasetName::Letters, 0);
        let sizes: Vec<usize> = {
            let mut s = vec![0; 26];
            for l in &labels {
                if let Some(i) = spec.merge.apply(*l) {
                    s[i] += 1;
                }
            }
            s
        };
        let unit = sizes.iter().min().unwrap() / 7;
        let set = pool_and_redraw(&labels, &spec).unwrap();
        assert_eq!(set.test.len(), 26 * unit);
        assert_eq!(set.train.len() + set.validation.len(), 26 * 6 * unit);
        assert_eq!(set.validation.len(), set.test.len());
        let l37 = DatasetSpec::with_letters(DatasetName::Letters, 0, LettersClasses::Merged37);
        assert!(matches!(pool_and_redraw(&labels, &l37), Err(Error::Quota { .. })));
    }

    #[test]
    fn same_seed_same_draw_other_seed_other_order() {
        let labels = corpus(|_| 1200);
        let a = pool_and_redraw(&labels, &DatasetSpec::standard(DatasetName::Mnist, 7));
        let b = pool_and_redraw(&labels, &DatasetSpec::standard(DatasetName::Mnist, 7));
        let c = pool_and_redraw(&labels, &DatasetSpec::standard(DatasetName::Mnist, 8));
        // 1200 per digit is not enough for mnist quotas
        assert!(a.is_err() && b.is_err() && c.is_err());

        let mut spec = DatasetSpec::standard(DatasetName::Mnist, 7);
        spec.quota = Quota::PerClass { train: 600, test: 100 };
        let a = pool_and_redraw(&labels, &spec).unwrap();
        let b = pool_and_redraw(&labels, &spec).unwrap();
        spec.seed = 8;
        let c = pool_and_redraw(&labels, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn carve_keeps_head_order_and_rejects_small_sets() {
        let spec = DatasetSpec::standard(DatasetName::Mnist, 0);
        let train: Vec<Sample> = (0..40).map(|i| Sample { index: i, label: (i % 10) as u16 }).collect();
        let test: Vec<Sample> = (100..110).map(|i| Sample { index: i, label: (i % 10) as u16 }).collect();
        let set = LabeledSet { train: train.clone(), validation: vec![], test, class_count: 10 };
        let carved = carve_validation(set.clone(), &spec).unwrap();
        assert_eq!(carved.train, train[..30].to_vec());
        assert_eq!(carved.validation, train[30..].to_vec());

        let small = LabeledSet { train: train[..15].to_vec(), ..set.clone() };
        assert!(matches!(carve_validation(small, &spec), Err(Error::Partition(_))));

        let byclass = DatasetSpec::standard(DatasetName::ByClass, 0);
        assert_eq!(carve_validation(set.clone(), &byclass).unwrap(), set);
    }

    #[test]
    fn carve_balances_a_skewed_tail() {
        let mut spec = DatasetSpec::standard(DatasetName::Mnist, 0);
        // tail is all class 0; class 1 samples live at the front
        let mut train: Vec<Sample> = (0..10).map(|i| Sample { index: i, label: 1 }).collect();
        train.extend((10..30).map(|i| Sample { index: i, label: 0 }));
        let set = LabeledSet {
            train,
            validation: vec![],
            test: (0..10).map(|i| Sample { index: 100 + i, label: (i % 2) as u16 }).collect(),
            class_count: 2,
        };
        spec.has_validation = true;
        let carved = carve_validation(set, &spec).unwrap();
        let hist = LabeledSet::class_histogram(&carved.validation, 2);
        assert_eq!(hist, vec![5, 5]);
        assert_eq!(carved.train.len(), 20);
        // head keeps original relative order
        assert!(carved.train.windows(2).all(|w| w[0].index < w[1].index));
    }
}
