use std::fs;
use std::path::Path;
use std::str::FromStr;

use byteorder::{ByteOrder, LittleEndian};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// One vector per line, comma- or whitespace-separated decimals.
    Csv,
    /// Repeated `[i32 d][d x f32]` little-endian records.
    Fvecs,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "fvecs" => Ok(DataFormat::Fvecs),
            other => Err(Error::InvalidParam(format!("unknown format {other:?} (expected csv or fvecs)"))),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match format {
        DataFormat::Csv => parse_csv(&String::from_utf8_lossy(&bytes)),
        DataFormat::Fvecs => parse_fvecs(&bytes),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Malformed {
                    location: format!("line {}", i + 1),
                    reason: format!("{s:?} is not a finite number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = out.first() {
            if first.len() != row.len() {
                return Err(Error::Malformed {
                    location: format!("line {}", i + 1),
                    reason: format!("{} values, expected {}", row.len(), first.len()),
                });
            }
        }
        out.push(row);
    }
    Ok(out)
}

pub fn parse_fvecs(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    let mut off = 0;
    while off < bytes.len() {
        let truncated = |off: usize| Error::Malformed {
            location: format!("byte offset {off}"),
            reason: "truncated record".into(),
        };
        if bytes.len() - off < 4 {
            return Err(truncated(off));
        }
        let d = LittleEndian::read_i32(&bytes[off..]);
        if d <= 0 {
            return Err(Error::Malformed {
                location: format!("byte offset {off}"),
                reason: format!("nonpositive dimension {d}"),
            });
        }
        let d = d as usize;
        if let Some(first) = out.first().map(|v: &Vec<f64>| v.len()) {
            if first != d {
                return Err(Error::Malformed {
                    location: format!("byte offset {off}"),
                    reason: format!("dimension {d}, expected {first}"),
                });
            }
        }
        let body = off + 4;
        if bytes.len() - body < 4 * d {
            return Err(truncated(off));
        }
        let mut v = vec![0f32; d];
        LittleEndian::read_f32_into(&bytes[body..body + 4 * d], &mut v);
        out.push(v.into_iter().map(f64::from).collect());
        off = body + 4 * d;
    }
    Ok(out)
}

pub fn encode_fvecs(data: &[Vec<f64>]) -> Vec<u8> {
    let mut out = Vec::new();
    for v in data {
        let mut rec = vec![0u8; 4 + 4 * v.len()];
        LittleEndian::write_i32(&mut rec, v.len() as i32);
        for (i, x) in v.iter().enumerate() {
            LittleEndian::write_f32(&mut rec[4 + 4 * i..], *x as f32);
        }
        out.extend(rec);
    }
    out
}

/// Appends `0.1 * |A| * (a* - c) + c`, where `c` is the centroid of `A` and
/// `a*` the point farthest from it in l2 (the last one on ties).
pub fn inject_outlier(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if a.len() < 2 {
        return Err(Error::InvalidParam(format!("outlier injection needs at least 2 points, got {}", a.len())));
    }
    let d = a[0].len();
    let n = a.len() as f64;
    let mut c = vec![0.0; d];
    for v in a {
        for (ci, x) in c.iter_mut().zip(v) {
            *ci += x / n;
        }
    }
    let dist2 = |v: &Vec<f64>| v.iter().zip(&c).map(|(x, m)| (x - m).powi(2)).sum::<f64>();
    let far = a.iter().fold(&a[0], |best, v| if dist2(v) >= dist2(best) { v } else { best });
    let outlier: Vec<f64> = far.iter().zip(&c).map(|(x, m)| 0.1 * n * (x - m) + m).collect();
    let mut out = a.to_vec();
    out.push(outlier);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parsing() {
        assert_eq!(parse_csv("1,2\n3,4").unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(parse_csv("# hdr\n1 2\n\n3\t4\n").unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let err = parse_csv("1,2\n3").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_csv("1,x").is_err());
    }

    #[test]
    fn fvecs_parsing() {
        let bytes = encode_fvecs(&[vec![1.0, 2.0]]);
        assert_eq!(bytes.len(), 12);
        assert_eq!(parse_fvecs(&bytes).unwrap(), vec![vec![1.0, 2.0]]);
        let mut two = encode_fvecs(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        two.truncate(20);
        let err = parse_fvecs(&two).unwrap_err();
        assert!(err.to_string().contains("byte offset 12"), "{err}");
        let mut mixed = encode_fvecs(&[vec![1.0, 2.0]]);
        mixed.extend(encode_fvecs(&[vec![1.0]]));
        assert!(parse_fvecs(&mixed).is_err());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.fvecs");
        fs::write(&p, encode_fvecs(&[vec![0.5, -1.0, 2.0]])).unwrap();
        assert_eq!(load_dataset(&p, DataFormat::Fvecs).unwrap(), vec![vec![0.5, -1.0, 2.0]]);
        assert!(load_dataset(dir.path().join("missing"), DataFormat::Csv).is_err());
        assert_eq!("FVECS".parse::<DataFormat>().unwrap(), DataFormat::Fvecs);
        assert!("npy".parse::<DataFormat>().is_err());
    }

    #[test]
    fn outlier_formula() {
        let out = inject_outlier(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(out.len(), 3);
        // c = (1, 0), a* = (2, 0): 0.1 * 2 * (1, 0) + (1, 0).
        let o = &out[2];
        assert!((o[0] - 1.2).abs() < 1e-12 && o[1] == 0.0, "{o:?}");
        assert!(inject_outlier(&[vec![1.0]]).is_err());
    }

    #[test]
    fn outlier_stays_on_axis() {
        let a = vec![vec![-3.0, 0.0], vec![3.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let o = inject_outlier(&a).unwrap().pop().unwrap();
        assert_eq!(o[1], 0.0);
        assert!((o[0].abs() - 0.1 * 4.0 * 3.0).abs() < 1e-12);
    }
}
