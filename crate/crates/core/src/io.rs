//! JSON channel files.
//!
//! A channel is stored as a list of row-major complex matrices, one per Kraus
//! operator, or a single matrix when `repr` is "choi". Complex entries are
//! `[re, im]` pairs; serde_json round-trips every finite f64 exactly.

use crate::chan::{ChannelSpec, ChoiMatrix};
use crate::error::{Error, Result};
use crate::linalg::{cx, CMat};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub repr: String,
    pub data: Vec<Vec<Vec<[f64; 2]>>>,
}

fn mat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_mat(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nr, nc, |i, j| cx(rows[i][j][0], rows[i][j][1])))
}

pub fn to_file(ch: &ChannelSpec) -> Result<ChannelFile> {
    if let Some(ks) = ch.kraus_ops() {
        Ok(ChannelFile {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            repr: "kraus".into(),
            data: ks.iter().map(mat_to_rows).collect(),
        })
    } else {
        let choi = ch.choi()?;
        Ok(ChannelFile {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            repr: "choi".into(),
            data: vec![mat_to_rows(choi.mat())],
        })
    }
}

pub fn from_file(f: &ChannelFile) -> Result<ChannelSpec> {
    match f.repr.as_str() {
        "kraus" => {
            let ks = f.data.iter().map(|m| rows_to_mat(m)).collect::<Result<Vec<_>>>()?;
            ChannelSpec::from_kraus(f.dim_in, f.dim_out, ks)
        }
        "choi" => {
            if f.data.len() != 1 {
                return Err(Error::Parse(format!(
                    "choi repr wants one matrix, got {}",
                    f.data.len()
                )));
            }
            let m = rows_to_mat(&f.data[0])?;
            Ok(ChannelSpec::from_choi(ChoiMatrix::new(m, f.dim_in, f.dim_out)?))
        }
        other => Err(Error::Parse(format!("unknown repr '{other}'"))),
    }
}

pub fn parse_channel_json(s: &str) -> Result<ChannelSpec> {
    let f: ChannelFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    from_file(&f)
}

pub fn channel_to_json(ch: &ChannelSpec) -> Result<String> {
    let f = to_file(ch)?;
    serde_json::to_string_pretty(&f).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_channel(path: &Path) -> Result<ChannelSpec> {
    let s = std::fs::read_to_string(path)?;
    parse_channel_json(&s)
}

pub fn write_channel(path: &Path, ch: &ChannelSpec) -> Result<()> {
    std::fs::write(path, channel_to_json(ch)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chan::depolarizing;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kraus_json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ch = sample::random_channel(2, 2, 3, &mut rng);
        let json = channel_to_json(&ch).unwrap();
        let back = parse_channel_json(&json).unwrap();
        let (a, b) = (ch.kraus_ops().unwrap(), back.kraus_ops().unwrap());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn choi_json_round_trip_is_bit_exact() {
        let choi = depolarizing(0.37).choi().unwrap();
        let ch = ChannelSpec::from_choi(choi.clone());
        let json = channel_to_json(&ch).unwrap();
        let back = parse_channel_json(&json).unwrap();
        assert_eq!(back.choi().unwrap().mat(), choi.mat());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(parse_channel_json("{").is_err());
        assert!(parse_channel_json(
            r#"{"dim_in":2,"dim_out":2,"repr":"nope","data":[]}"#
        )
        .is_err());
        // wrong completeness
        let bad = r#"{"dim_in":1,"dim_out":1,"repr":"kraus","data":[[[[0.5,0.0]]]]}"#;
        assert!(parse_channel_json(bad).is_err());
    }
}
