use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::learners::Labels;
use crate::stroke::{Diagnosis, SubjectRecord};

/// Prediction targets. Binary pairings put the more impaired group at
/// class 1, which is the positive class for sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Diagnosis,
    CnVsMci,
    CnVsDementia,
    MciVsDementia,
    Mmse,
    Mtl,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::Diagnosis,
        Target::CnVsMci,
        Target::CnVsDementia,
        Target::MciVsDementia,
        Target::Mmse,
        Target::Mtl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Diagnosis => "diagnosis",
            Target::CnVsMci => "cn_vs_mci",
            Target::CnVsDementia => "cn_vs_dementia",
            Target::MciVsDementia => "mci_vs_dementia",
            Target::Mmse => "mmse",
            Target::Mtl => "mtl",
        }
    }

    fn pair(self) -> Option<(Diagnosis, Diagnosis)> {
        match self {
            Target::CnVsMci => Some((Diagnosis::Cn, Diagnosis::Mci)),
            Target::CnVsDementia => Some((Diagnosis::Cn, Diagnosis::Dementia)),
            Target::MciVsDementia => Some((Diagnosis::Mci, Diagnosis::Dementia)),
            _ => None,
        }
    }

    /// Rows with a usable label and the labels themselves.
    pub fn labels(self, subjects: &[SubjectRecord]) -> (Vec<usize>, Labels) {
        let mut rows = Vec::new();
        match self {
            Target::Diagnosis => {
                let mut y = Vec::new();
                for (i, s) in subjects.iter().enumerate() {
                    if let Some(d) = s.diagnosis {
                        rows.push(i);
                        y.push(d.index());
                    }
                }
                (rows, Labels::Classes { y, n_classes: 3 })
            }
            Target::CnVsMci | Target::CnVsDementia | Target::MciVsDementia => {
                let (neg, pos) = self.pair().expect("binary target");
                let mut y = Vec::new();
                for (i, s) in subjects.iter().enumerate() {
                    match s.diagnosis {
                        Some(d) if d == neg => y.push(0),
                        Some(d) if d == pos => y.push(1),
                        _ => continue,
                    }
                    rows.push(i);
                }
                (rows, Labels::Classes { y, n_classes: 2 })
            }
            Target::Mmse | Target::Mtl => {
                let mut v = Vec::new();
                for (i, s) in subjects.iter().enumerate() {
                    let value = match self {
                        Target::Mmse => s.mmse.map(|m| m as f64),
                        _ => s.mtl_atrophy_z,
                    };
                    if let Some(value) = value {
                        rows.push(i);
                        v.push(value);
                    }
                }
                (rows, Labels::Values(v))
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown target {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subject(d: Option<Diagnosis>, mmse: Option<i64>) -> SubjectRecord {
        SubjectRecord {
            diagnosis: d,
            mmse,
            mtl_atrophy_z: None,
        }
    }

    #[test]
    fn pairings() {
        let subjects = [
            subject(Some(Diagnosis::Cn), Some(29)),
            subject(Some(Diagnosis::Dementia), Some(18)),
            subject(Some(Diagnosis::Mci), None),
            subject(None, Some(25)),
        ];
        let (rows, labels) = Target::CnVsDementia.labels(&subjects);
        assert_eq!(rows, vec![0, 1]);
        assert_eq!(labels, Labels::Classes { y: vec![0, 1], n_classes: 2 });
        let (rows, labels) = Target::MciVsDementia.labels(&subjects);
        assert_eq!(rows, vec![1, 2]);
        assert_eq!(labels, Labels::Classes { y: vec![1, 0], n_classes: 2 });
        let (rows, labels) = Target::Mmse.labels(&subjects);
        assert_eq!(rows, vec![0, 1, 3]);
        assert_eq!(labels, Labels::Values(vec![29.0, 18.0, 25.0]));
        assert_eq!(Target::Mtl.labels(&subjects).0, Vec::<usize>::new());
    }

    #[test]
    fn names_round_trip() {
        for t in Target::ALL {
            assert_eq!(t.as_str().parse::<Target>().unwrap(), t);
        }
        assert!("x".parse::<Target>().is_err());
    }
}
