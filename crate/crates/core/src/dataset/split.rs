use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const TEST_FRACTION: f64 = 0.20;
pub const VALIDATION_FRACTION: f64 = 0.25;
pub const TWO_WAY_TEST_FRACTION: f64 = 0.30;

/// Disjoint train/validation/test row indices covering `0..n`, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// `floor(x + 0.5)`, tolerant of representation error just below a half.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut idx, &mut rng::seeded(seed));
    idx
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Sizes `(train, validation, test)` of the three-way split of `n` rows.
pub fn three_way_sizes(n: usize) -> (usize, usize, usize) {
    let n_test = round_half_up(TEST_FRACTION * n as f64);
    let n_val = round_half_up(VALIDATION_FRACTION * (n - n_test) as f64);
    (n - n_test - n_val, n_val, n_test)
}

/// 80/20 train/test, then 75/25 train/validation on the 80%.
///
/// Rows are shuffled with [`rng::shuffle`]; the first `n_test` shuffled
/// positions form the test set, the next `n_val` the validation set.
pub fn split(n_rows: usize, seed: u64) -> Result<SplitIndices> {
    if n_rows < 5 {
        return Err(Error::validation(format!(
            "cannot split {n_rows} rows into three non-empty parts (need at least 5)"
        )));
    }
    let (_, n_val, n_test) = three_way_sizes(n_rows);
    let idx = shuffled(n_rows, seed);
    Ok(SplitIndices {
        test: sorted(idx[..n_test].to_vec()),
        validation: sorted(idx[n_test..n_test + n_val].to_vec()),
        train: sorted(idx[n_test + n_val..].to_vec()),
        seed,
    })
}

/// Train/test split with an empty validation list.
pub fn split_two_way(n_rows: usize, seed: u64, test_fraction: f64) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::validation(format!(
            "test fraction {test_fraction} is outside (0, 1)"
        )));
    }
    let n_test = round_half_up(test_fraction * n_rows as f64);
    if n_test == 0 || n_test >= n_rows {
        return Err(Error::validation(format!(
            "test fraction {test_fraction} of {n_rows} rows leaves an empty part"
        )));
    }
    let idx = shuffled(n_rows, seed);
    Ok(SplitIndices {
        test: sorted(idx[..n_test].to_vec()),
        validation: Vec::new(),
        train: sorted(idx[n_test..].to_vec()),
        seed,
    })
}

/// Three-way split applied within each class separately, so each part keeps
/// roughly the overall hit rate. Per-class sizes follow the same rounding
/// rule, so totals can differ by one from [`split`].
pub fn split_stratified(labels: &[u8], seed: u64) -> Result<SplitIndices> {
    let mut out = SplitIndices {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (class, stream) in [(0u8, 0u64), (1, 1)] {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 5 {
            return Err(Error::validation(format!(
                "class {class} has {} rows; stratified split needs at least 5",
                members.len()
            )));
        }
        let (_, n_val, n_test) = three_way_sizes(members.len());
        let order = shuffled(members.len(), rng::derive_seed(seed, stream));
        let pick = |range: std::ops::Range<usize>| order[range].iter().map(|&k| members[k]);
        out.test.extend(pick(0..n_test));
        out.validation.extend(pick(n_test..n_test + n_val));
        out.train.extend(pick(n_test + n_val..members.len()));
    }
    out.train.sort_unstable();
    out.validation.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// How rows are partitioned; enough to regenerate a [`SplitIndices`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SplitScheme {
    /// 80/20 train/test, then 75/25 train/validation.
    ThreeWay,
    /// The three-way rule applied within each class.
    Stratified,
    /// Train/test only.
    TwoWay { test_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    #[serde(flatten)]
    pub scheme: SplitScheme,
    pub seed: u64,
    pub n_rows: usize,
}

impl SplitPlan {
    /// `labels` is only consulted by the stratified scheme.
    pub fn apply(&self, labels: &[u8]) -> Result<SplitIndices> {
        if labels.len() != self.n_rows {
            return Err(Error::validation(format!(
                "split was planned for {} rows but the data has {}",
                self.n_rows,
                labels.len()
            )));
        }
        match self.scheme {
            SplitScheme::ThreeWay => split(self.n_rows, self.seed),
            SplitScheme::Stratified => split_stratified(labels, self.seed),
            SplitScheme::TwoWay { test_fraction } => {
                split_two_way(self.n_rows, self.seed, test_fraction)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_partition(s: &SplitIndices, n: usize) {
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.validation)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn full_dataset_sizes() {
        let s = split(2063, 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (1237, 413, 413));
        let s = split_two_way(2063, 1, 0.30).unwrap();
        assert_eq!(s.test.len(), 619);
        assert!(s.validation.is_empty());
        assert_eq!(split_two_way(2063, 1, 0.20).unwrap().test.len(), 413);
    }

    #[test]
    fn hundred_rows() {
        let s = split(100, 3).unwrap();
        assert_eq!((s.test.len(), s.validation.len(), s.train.len()), (20, 20, 60));
        let s = split_two_way(10, 3, 0.5).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (5, 5));
    }

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(split(10, 7).unwrap(), split(10, 7).unwrap());
        assert_ne!(split(50, 7).unwrap(), split(50, 8).unwrap());
    }

    #[test]
    fn too_few_rows() {
        assert!(split(4, 0).is_err());
        assert!(split(5, 0).is_ok());
    }

    #[test]
    fn bad_fraction() {
        assert!(split_two_way(10, 0, 0.0).is_err());
        assert!(split_two_way(10, 0, 1.0).is_err());
        assert!(split_two_way(10, 0, -0.2).is_err());
        assert!(split_two_way(10, 0, f64::NAN).is_err());
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(round_half_up(412.5), 413);
        assert_eq!(round_half_up(412.4999), 412);
        assert_eq!(round_half_up(0.3 * 5.0), 2);
    }

    #[test]
    fn plan_regenerates_split() {
        let plan = SplitPlan {
            scheme: SplitScheme::TwoWay { test_fraction: 0.3 },
            seed: 5,
            n_rows: 40,
        };
        let labels = vec![0u8; 40];
        assert_eq!(plan.apply(&labels).unwrap(), split_two_way(40, 5, 0.3).unwrap());
        assert!(plan.apply(&labels[..39]).is_err());
        let v = serde_json::to_value(plan).unwrap();
        assert_eq!(v["scheme"], "two-way");
        assert_eq!(serde_json::from_value::<SplitPlan>(v).unwrap(), plan);
    }

    #[test]
    fn stratified_keeps_hit_rate() {
        let labels: Vec<u8> = (0..2063).map(|i| u8::from(i % 9 == 0)).collect();
        let s = split_stratified(&labels, 4).unwrap();
        assert_partition(&s, labels.len());
        let rate = |idx: &[usize]| {
            idx.iter().filter(|&&i| labels[i] == 1).count() as f64 / idx.len() as f64
        };
        let overall = rate(&(0..labels.len()).collect::<Vec<_>>());
        for part in [&s.train, &s.validation, &s.test] {
            assert!((rate(part) - overall).abs() < 0.01);
        }
    }

    proptest! {
        #[test]
        fn partition_properties(n in 5usize..=5000, seed in any::<u64>()) {
            let s = split(n, seed).unwrap();
            assert_partition(&s, n);
            let n_test = round_half_up(0.2 * n as f64);
            let n_val = round_half_up(0.25 * (n - n_test) as f64);
            prop_assert_eq!(s.test.len(), n_test);
            prop_assert_eq!(s.validation.len(), n_val);
            prop_assert!(!s.train.is_empty());
            prop_assert_eq!(s, split(n, seed).unwrap());
        }

        #[test]
        fn two_way_partition(n in 2usize..=3000, seed in any::<u64>()) {
            let s = split_two_way(n, seed, 0.5).unwrap();
            assert_partition(&s, n);
        }
    }
}
