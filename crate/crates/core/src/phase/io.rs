//! Phase files: JSON lines, one record per episode.
//!
//! ```text
//! {"episode":"walk","labels":[1,1,0,0,...],"gmm":{"weights":[...],"means":[[x,y],...],
//!  "covariances":[[[a,b],[b,c]],...]},"config":{...},"seed":7}
//! ```
//!
//! `gmm`, `config` and `seed` are `null` for ground-truth tracks that were
//! not produced by segmentation.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GmmModel, PhaseConfig, PhaseTrack};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRecord {
    pub episode: String,
    pub labels: PhaseTrack,
    pub gmm: Option<GmmModel<f64>>,
    pub config: Option<PhaseConfig>,
    pub seed: Option<u64>,
}

pub fn write_phase_records<W: Write>(records: &[PhaseRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_phase_records<R: BufRead>(reader: R) -> Result<Vec<PhaseRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PhaseRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhaseLabel;

    #[test]
    fn records_round_trip() {
        let rec = PhaseRecord {
            episode: "a".into(),
            labels: PhaseTrack {
                labels: vec![PhaseLabel::Navigation, PhaseLabel::Manipulation],
            },
            gmm: Some(GmmModel {
                weights: vec![0.25, 0.75],
                means: vec![[0.1, 0.2], [3.0, -1.0 / 3.0]],
                covariances: vec![[[1e-3, 1e-5], [1e-5, 2e-3]]; 2],
            }),
            config: Some(PhaseConfig::default()),
            seed: Some(42),
        };
        let truth = PhaseRecord {
            episode: "b".into(),
            gmm: None,
            config: None,
            seed: None,
            ..rec.clone()
        };
        let mut buf = Vec::new();
        write_phase_records(&[rec.clone(), truth.clone()], &mut buf).unwrap();
        let back = read_phase_records(buf.as_slice()).unwrap();
        assert_eq!(back, vec![rec, truth]);
    }
}
