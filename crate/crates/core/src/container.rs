//! Flat little-endian tensor container used for model and dataset files.
//!
//! ```text
//! magic   b"NARMTNS1"
//! u32     metadata length, then that many bytes of UTF-8 JSON
//! u32     tensor count
//! per tensor:
//!   u16   name length, name bytes (UTF-8)
//!   u8    rank, then rank x u64 dims
//!   f64   product(dims) values, row-major
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"NARMTNS1";

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { name: name.into(), shape, data }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorFile {
    pub meta: serde_json::Value,
    pub tensors: Vec<Tensor>,
}

impl TensorFile {
    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors.iter().find(|t| t.name == name).ok_or_else(|| Error::Container(format!("missing tensor {name:?}")))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        let meta = serde_json::to_vec(&self.meta)?;
        w.write_all(&(meta.len() as u32).to_le_bytes())?;
        w.write_all(&meta)?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for t in &self.tensors {
            let name = t.name.as_bytes();
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name)?;
            w.write_all(&[t.shape.len() as u8])?;
            for d in &t.shape {
                w.write_all(&(*d as u64).to_le_bytes())?;
            }
            for v in &t.data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let meta_len = read_u32(&mut r)? as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let meta = serde_json::from_slice(&meta)?;
        let count = read_u32(&mut r)?;
        let mut tensors = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut b2 = [0u8; 2];
            r.read_exact(&mut b2)?;
            let mut name = vec![0u8; u16::from_le_bytes(b2) as usize];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|_| Error::Container("tensor name not UTF-8".into()))?;
            let mut rank = [0u8; 1];
            r.read_exact(&mut rank)?;
            let mut shape = Vec::with_capacity(rank[0] as usize);
            for _ in 0..rank[0] {
                let mut b8 = [0u8; 8];
                r.read_exact(&mut b8)?;
                shape.push(u64::from_le_bytes(b8) as usize);
            }
            let len: usize = shape.iter().product();
            let mut raw = vec![0u8; len * 8];
            r.read_exact(&mut raw)?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            tensors.push(Tensor { name, shape, data });
        }
        Ok(Self { meta, tensors })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = TensorFile {
            meta: serde_json::json!({"kind": "test", "n": 3}),
            tensors: vec![
                Tensor::new("a", vec![2, 3], vec![1.0, -2.0, 3.5, f64::MIN_POSITIVE, 0.0, 1e300]),
                Tensor::new("b", vec![0], vec![]),
            ],
        };
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert_eq!(TensorFile::read_from(&buf[..]).unwrap(), f);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(TensorFile::read_from(&b"NOTMAGIC...."[..]).is_err());
        let f = TensorFile { meta: serde_json::json!({}), tensors: vec![Tensor::new("a", vec![4], vec![1.0; 4])] };
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert!(TensorFile::read_from(&buf[..buf.len() - 3]).is_err());
    }
}
