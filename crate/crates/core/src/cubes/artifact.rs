//! Packed `TDQ1` cube files.
//!
//! Layout, all little-endian:
//! `"TDQ1"`, u32 r, u32 #axes, per axis (u32 name length, utf-8 name,
//! u8 source, u32 domain column, f64 min, f64 max), u32 #pairs as
//! (u32, u32), u32 #triples as (u32, u32), f64 t_base, u64 #leaves,
//! #leaves × u64 absolute byte offsets of the leaf blocks, then per leaf
//! u64 id, u64 count, h1, h2, h3 as u64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::Arc;

use super::{AxisSource, CubeLayout, CubeSet, Histograms, LeafCube};
use crate::dataset::Range;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"TDQ1";

fn header_bytes<T: Scalar>(set: &CubeSet<T>) -> Vec<u8> {
    let l = &set.layout;
    let mut h = Vec::new();
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&(l.resolution as u32).to_le_bytes());
    h.extend_from_slice(&(l.n_axes() as u32).to_le_bytes());
    for a in 0..l.n_axes() {
        h.extend_from_slice(&(l.names[a].len() as u32).to_le_bytes());
        h.extend_from_slice(l.names[a].as_bytes());
        let (kind, col) = match l.sources[a] {
            AxisSource::Domain(c) => (0u8, c as u32),
            AxisSource::Function => (1u8, 0),
        };
        h.push(kind);
        h.extend_from_slice(&col.to_le_bytes());
        h.extend_from_slice(&l.bounds[a].min.as_f64().to_le_bytes());
        h.extend_from_slice(&l.bounds[a].max.as_f64().to_le_bytes());
    }
    for list in [&l.pairs, &l.triples] {
        h.extend_from_slice(&(list.len() as u32).to_le_bytes());
        for &(i, j) in list.iter() {
            h.extend_from_slice(&(i as u32).to_le_bytes());
            h.extend_from_slice(&(j as u32).to_le_bytes());
        }
    }
    h.extend_from_slice(&set.t_base.as_f64().to_le_bytes());
    h.extend_from_slice(&(set.leaves.len() as u64).to_le_bytes());
    h
}

fn leaf_block_len(hist: &Histograms) -> usize {
    8 * (2 + hist.h1.len() + hist.h2.len() + hist.h3.len())
}

pub fn write_cubes<T: Scalar, W: Write>(set: &CubeSet<T>, out: &mut W) -> Result<()> {
    let header = header_bytes(set);
    out.write_all(&header)?;
    let mut offset = (header.len() + 8 * set.leaves.len()) as u64;
    for leaf in &set.leaves {
        out.write_all(&offset.to_le_bytes())?;
        offset += leaf_block_len(&leaf.hist) as u64;
    }
    for leaf in &set.leaves {
        out.write_all(&(leaf.id as u64).to_le_bytes())?;
        out.write_all(&leaf.hist.count.to_le_bytes())?;
        for v in leaf.hist.h1.iter().chain(&leaf.hist.h2).chain(&leaf.hist.h3) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_cubes<T: Scalar>(set: &CubeSet<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_cubes(set, &mut out)?;
    out.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
    pos: u64,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::format("TDQ1", format!("truncated: {e}")))?;
        self.pos += N as u64;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes()?) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64<T: Scalar>(&mut self) -> Result<T> {
        Ok(T::of(f64::from_le_bytes(self.bytes()?)))
    }
    fn u64s(&mut self, n: usize) -> Result<Vec<u64>> {
        let mut raw = vec![0u8; n * 8];
        self.inner
            .read_exact(&mut raw)
            .map_err(|e| Error::format("TDQ1", format!("truncated: {e}")))?;
        self.pos += raw.len() as u64;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_cubes<T: Scalar, R: Read>(input: R) -> Result<CubeSet<T>> {
    let mut r = Reader { inner: input, pos: 0 };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::format("TDQ1", "bad magic"));
    }
    let resolution = r.u32()?;
    if !(2..=1 << 12).contains(&resolution) {
        return Err(Error::format("TDQ1", format!("resolution {resolution} out of range")));
    }
    let n_axes = r.u32()?;
    if n_axes == 0 || n_axes > 1 << 16 {
        return Err(Error::format("TDQ1", format!("axis count {n_axes} out of range")));
    }
    let mut names = Vec::with_capacity(n_axes);
    let mut sources = Vec::with_capacity(n_axes);
    let mut bounds = Vec::with_capacity(n_axes);
    for _ in 0..n_axes {
        let len = r.u32()?;
        if len > 1 << 16 {
            return Err(Error::format("TDQ1", "axis name too long"));
        }
        let mut name = vec![0u8; len];
        r.inner
            .read_exact(&mut name)
            .map_err(|e| Error::format("TDQ1", format!("truncated: {e}")))?;
        r.pos += len as u64;
        names.push(String::from_utf8(name).map_err(|_| Error::format("TDQ1", "axis name is not utf-8"))?);
        let kind = r.u8()?;
        let col = r.u32()?;
        sources.push(match kind {
            0 => AxisSource::Domain(col),
            1 => AxisSource::Function,
            k => return Err(Error::format("TDQ1", format!("unknown axis kind {k}"))),
        });
        bounds.push(Range {
            min: r.f64()?,
            max: r.f64()?,
        });
    }
    if sources.last() != Some(&AxisSource::Function) {
        return Err(Error::format("TDQ1", "last axis must be the function"));
    }
    let mut lists = [Vec::new(), Vec::new()];
    for list in lists.iter_mut() {
        let n = r.u32()?;
        for _ in 0..n {
            let (i, j) = (r.u32()?, r.u32()?);
            if i >= j || j >= n_axes {
                return Err(Error::format("TDQ1", format!("bad axis pair ({i}, {j})")));
            }
            list.push((i, j));
        }
    }
    let [pairs, triples] = lists;
    let layout = CubeLayout {
        resolution,
        names,
        sources,
        bounds,
        pairs,
        triples,
    };
    let t_base = r.f64()?;
    let n_leaves = r.u64()? as usize;
    let offsets = r.u64s(n_leaves)?;
    let shape = layout.shape();
    let mut leaves = Vec::with_capacity(n_leaves);
    for &offset in &offsets {
        if offset != r.pos {
            return Err(Error::format("TDQ1", format!("leaf offset {offset} does not match position {}", r.pos)));
        }
        let id = r.u64()? as usize;
        let count = r.u64()?;
        let mut hist = Histograms::zeros(shape);
        hist.count = count;
        hist.h1 = r.u64s(hist.h1.len())?;
        hist.h2 = r.u64s(hist.h2.len())?;
        hist.h3 = r.u64s(hist.h3.len())?;
        hist.refresh_suffix();
        leaves.push(LeafCube { id, hist });
    }
    if leaves.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(Error::format("TDQ1", "leaf ids are not ascending"));
    }
    Ok(CubeSet {
        layout: Arc::new(layout),
        t_base,
        leaves,
    })
}

pub fn load_cubes<T: Scalar>(path: &Path) -> Result<CubeSet<T>> {
    let file = File::open(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
    read_cubes(BufReader::new(file))
}

/// Reads a single leaf block via its stored offset, without touching the
/// others.
pub fn read_leaf_at<R: Read + Seek>(input: &mut R, layout_shape: super::CubeShape, offset: u64) -> Result<LeafCube> {
    input.seek(SeekFrom::Start(offset))?;
    let mut r = Reader { inner: input, pos: offset };
    let id = r.u64()? as usize;
    let count = r.u64()?;
    let mut hist = Histograms::zeros(layout_shape);
    hist.count = count;
    hist.h1 = r.u64s(hist.h1.len())?;
    hist.h2 = r.u64s(hist.h2.len())?;
    hist.h3 = r.u64s(hist.h3.len())?;
    hist.refresh_suffix();
    Ok(LeafCube { id, hist })
}
