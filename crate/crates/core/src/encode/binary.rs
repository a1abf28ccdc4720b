//! Tensor-ready encoded dataset: little-endian flat token streams with
//! offset indexes.
//!
//! For a prefix `P`: `P.src.ids`/`P.src.types` hold all encoder inputs
//! back to back as u32 values, `P.src.idx` holds u64 offsets (one more
//! than the example count, starting at 0). `P.tgt.*` does the same for
//! targets. `P.rec` holds one u32 record index per example.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::TokenSequence;

/// Encoder input and decoder target for one (record, product) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub record: u32,
    pub source: TokenSequence,
    pub target: TokenSequence,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodedSet {
    pub examples: Vec<Example>,
}

fn path(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn u32s(v: impl Iterator<Item = u32>) -> Vec<u8> {
    v.flat_map(|x| x.to_le_bytes()).collect()
}

fn write_stream(prefix: &Path, part: &str, seqs: &[&TokenSequence]) -> io::Result<()> {
    let ids = u32s(seqs.iter().flat_map(|s| s.ids.iter().copied()));
    let types = u32s(seqs.iter().flat_map(|s| s.type_ids.iter().map(|&t| t as u32)));
    let mut idx = Vec::with_capacity((seqs.len() + 1) * 8);
    let mut off = 0u64;
    idx.extend_from_slice(&off.to_le_bytes());
    for s in seqs {
        off += s.len() as u64;
        idx.extend_from_slice(&off.to_le_bytes());
    }
    fs::write(path(prefix, &format!(".{part}.ids")), ids)?;
    fs::write(path(prefix, &format!(".{part}.types")), types)?;
    fs::write(path(prefix, &format!(".{part}.idx")), idx)
}

pub fn write_encoded(prefix: &Path, set: &EncodedSet) -> io::Result<()> {
    let src: Vec<&TokenSequence> = set.examples.iter().map(|e| &e.source).collect();
    let tgt: Vec<&TokenSequence> = set.examples.iter().map(|e| &e.target).collect();
    write_stream(prefix, "src", &src)?;
    write_stream(prefix, "tgt", &tgt)?;
    fs::write(path(prefix, ".rec"), u32s(set.examples.iter().map(|e| e.record)))
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn read_u32s(p: &Path) -> io::Result<Vec<u32>> {
    let b = fs::read(p)?;
    if b.len() % 4 != 0 {
        return Err(invalid(format!("{}: length not a multiple of 4", p.display())));
    }
    Ok(b.chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("chunk of 4")))
        .collect())
}

fn read_stream(prefix: &Path, part: &str) -> io::Result<Vec<TokenSequence>> {
    let ids = read_u32s(&path(prefix, &format!(".{part}.ids")))?;
    let types = read_u32s(&path(prefix, &format!(".{part}.types")))?;
    if ids.len() != types.len() {
        return Err(invalid(format!("{part}: ids and types differ in length")));
    }
    let raw = fs::read(path(prefix, &format!(".{part}.idx")))?;
    if raw.len() % 8 != 0 || raw.len() < 8 {
        return Err(invalid(format!("{part}: malformed index")));
    }
    let idx: Vec<u64> = raw
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if idx[0] != 0 || *idx.last().expect("non-empty") as usize != ids.len() || idx.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid(format!("{part}: index does not cover the stream")));
    }
    Ok(idx
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0] as usize, w[1] as usize);
            TokenSequence {
                ids: ids[a..b].to_vec(),
                type_ids: types[a..b].iter().map(|&t| t as u8).collect(),
            }
        })
        .collect())
}

pub fn read_encoded(prefix: &Path) -> io::Result<EncodedSet> {
    let src = read_stream(prefix, "src")?;
    let tgt = read_stream(prefix, "tgt")?;
    let rec = read_u32s(&path(prefix, ".rec"))?;
    if src.len() != tgt.len() || src.len() != rec.len() {
        return Err(invalid("source, target and record counts differ"));
    }
    Ok(EncodedSet {
        examples: rec
            .into_iter()
            .zip(src.into_iter().zip(tgt))
            .map(|(record, (source, target))| Example { record, source, target })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("train");
        let set = EncodedSet {
            examples: vec![
                Example {
                    record: 0,
                    source: TokenSequence { ids: vec![5, 6], type_ids: vec![1, 1] },
                    target: TokenSequence { ids: vec![1, 5, 2], type_ids: vec![4, 3, 4] },
                },
                Example {
                    record: 0,
                    source: TokenSequence { ids: vec![7], type_ids: vec![1] },
                    target: TokenSequence { ids: vec![1, 2], type_ids: vec![4, 4] },
                },
            ],
        };
        write_encoded(&prefix, &set).unwrap();
        assert_eq!(read_encoded(&prefix).unwrap(), set);
        let idx = fs::read(dir.path().join("train.src.idx")).unwrap();
        assert_eq!(idx, [0u64, 2, 3].iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>());
        let ids = fs::read(dir.path().join("train.src.ids")).unwrap();
        assert_eq!(ids, vec![5, 0, 0, 0, 6, 0, 0, 0, 7, 0, 0, 0]);
    }
}
