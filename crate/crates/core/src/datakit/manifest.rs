use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidParameter("split must be train, val or test")),
        }
    }
}

/// One image/mask pair of a dataset.
///
/// `provenance` starts with the source capture name, followed by `/` and any
/// frame or copy details, e.g. `field-a/frame_0003#2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub image_path: String,
    pub mask_path: String,
    pub split: Split,
    pub has_edge: bool,
    pub provenance: String,
}

impl ManifestRecord {
    pub fn capture(&self) -> &str {
        self.provenance.split('/').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Fails when any capture contributes records to more than one split.
    pub fn check_capture_disjoint(&self) -> Result<()> {
        let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
        for r in &self.records {
            match seen.get(r.capture()) {
                Some(&s) if s != r.split => {
                    return Err(Error::SplitOverlap {
                        capture: r.capture().to_string(),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(r.capture(), r.split);
                }
            }
        }
        Ok(())
    }
}

/// Relative sizes of the train, validation and test splits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SplitWeights {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitWeights {
    fn default() -> Self {
        Self {
            train: 10.0,
            val: 2.0,
            test: 2.0,
        }
    }
}

/// Assigns whole captures to splits.
///
/// Captures are deduplicated, sorted, shuffled with `seed` and cut by
/// cumulative weight. With at least three captures and positive weights every
/// split receives one.
pub fn assign_splits(captures: &[String], weights: &SplitWeights, seed: u64) -> Result<BTreeMap<String, Split>> {
    let w = [weights.train, weights.val, weights.test];
    if w.iter().any(|v| !(*v >= 0.0)) || !(w.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidParameter(
            "split weights must be nonnegative with a positive sum",
        ));
    }
    let mut names: Vec<&String> = captures.iter().collect();
    names.sort();
    names.dedup();
    names.shuffle(&mut rng::seeded(seed));

    let n = names.len();
    let total: f64 = w.iter().sum();
    let mut counts = [0usize; 3];
    for (i, wi) in w.iter().enumerate() {
        counts[i] = libm::floor(n as f64 * wi / total) as usize;
    }
    counts[0] += n - counts.iter().sum::<usize>();
    // a split with positive weight gets a capture, taken from the largest split
    for i in 0..3 {
        if w[i] > 0.0 && counts[i] == 0 {
            let donor = (0..3).max_by_key(|&j| (counts[j], core::cmp::Reverse(j))).unwrap_or(0);
            if counts[donor] > 1 {
                counts[donor] -= 1;
                counts[i] += 1;
            }
        }
    }

    let mut out = BTreeMap::new();
    let mut it = names.into_iter();
    for (split, count) in Split::ALL.into_iter().zip(counts) {
        for name in it.by_ref().take(count) {
            out.insert(name.clone(), split);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn rec(provenance: &str, split: Split) -> ManifestRecord {
        ManifestRecord {
            image_path: format!("{provenance}.png"),
            mask_path: format!("{provenance}_mask.png"),
            split,
            has_edge: true,
            provenance: provenance.to_string(),
        }
    }

    #[test]
    fn split_names_round_trip() {
        for s in Split::ALL {
            assert_eq!(s.as_str().parse::<Split>().unwrap(), s);
        }
        assert!("dev".parse::<Split>().is_err());
    }

    #[test]
    fn overlap_detected() {
        let ok = DatasetManifest::new(alloc::vec![
            rec("a/1", Split::Train),
            rec("a/2", Split::Train),
            rec("b/1", Split::Val)
        ]);
        assert!(ok.check_capture_disjoint().is_ok());
        let bad = DatasetManifest::new(alloc::vec![rec("a/1", Split::Train), rec("a/2", Split::Test)]);
        assert_eq!(
            bad.check_capture_disjoint(),
            Err(Error::SplitOverlap { capture: "a".into() })
        );
    }

    #[test]
    fn every_split_gets_a_capture() {
        let caps: Vec<String> = (0..3).map(|i| format!("cap{i}")).collect();
        let m = assign_splits(&caps, &SplitWeights::default(), 0).unwrap();
        let mut splits: Vec<Split> = m.values().copied().collect();
        splits.sort();
        assert_eq!(splits, alloc::vec![Split::Train, Split::Val, Split::Test]);
    }

    #[test]
    fn proportions_follow_weights() {
        let caps: Vec<String> = (0..70).map(|i| format!("cap{i}")).collect();
        let m = assign_splits(&caps, &SplitWeights::default(), 9).unwrap();
        let count = |s| m.values().filter(|v| **v == s).count();
        assert_eq!(
            (count(Split::Train), count(Split::Val), count(Split::Test)),
            (50, 10, 10)
        );
    }
}
