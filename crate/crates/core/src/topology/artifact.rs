//! Packed `TDT1` topology files.
//!
//! Layout, all little-endian:
//! `"TDT1"`, u64 n, n × u64 base labels, u64 #maxima, maxima as u64,
//! u64 #saddles, saddles as (u64 a, u64 b, u64 vertex, f64 value),
//! u64 #events, events as (u64 victim, u64 survivor, u64 saddle,
//! f64 persistence), f64 f_min, f64 f_max.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::hierarchy::{MergeEvent, MergeHierarchy};
use super::labels::Segmentation;
use super::saddles::SaddleRecord;
use crate::dataset::Range;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"TDT1";

/// Everything the offline topology stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyArtifact<T> {
    pub segmentation: Segmentation,
    pub saddles: Vec<SaddleRecord<T>>,
    pub hierarchy: MergeHierarchy<T>,
}

fn put_u64<W: Write>(out: &mut W, v: usize) -> Result<()> {
    out.write_all(&(v as u64).to_le_bytes())?;
    Ok(())
}

fn put_f64<W: Write, T: Scalar>(out: &mut W, v: T) -> Result<()> {
    out.write_all(&v.as_f64().to_le_bytes())?;
    Ok(())
}

pub fn write_topology<T: Scalar, W: Write>(topo: &TopologyArtifact<T>, out: &mut W) -> Result<()> {
    out.write_all(MAGIC)?;
    put_u64(out, topo.segmentation.labels.len())?;
    for &l in &topo.segmentation.labels {
        put_u64(out, l)?;
    }
    put_u64(out, topo.segmentation.maxima.len())?;
    for &m in &topo.segmentation.maxima {
        put_u64(out, m)?;
    }
    put_u64(out, topo.saddles.len())?;
    for s in &topo.saddles {
        put_u64(out, s.a)?;
        put_u64(out, s.b)?;
        put_u64(out, s.vertex)?;
        put_f64(out, s.value)?;
    }
    put_u64(out, topo.hierarchy.events.len())?;
    for e in &topo.hierarchy.events {
        put_u64(out, e.victim)?;
        put_u64(out, e.survivor)?;
        put_u64(out, e.saddle)?;
        put_f64(out, e.persistence)?;
    }
    put_f64(out, topo.hierarchy.f_range.min)?;
    put_f64(out, topo.hierarchy.f_range.max)?;
    Ok(())
}

pub fn save_topology<T: Scalar>(topo: &TopologyArtifact<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_topology(topo, &mut out)?;
    out.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::format("TDT1", format!("truncated: {e}")))?;
        Ok(buf)
    }

    fn u64(&mut self) -> Result<usize> {
        Ok(u64::from_le_bytes(self.bytes()?) as usize)
    }

    fn f64<T: Scalar>(&mut self) -> Result<T> {
        Ok(T::of(f64::from_le_bytes(self.bytes()?)))
    }

    fn count(&mut self, limit: usize) -> Result<usize> {
        let n = self.u64()?;
        if n > limit {
            return Err(Error::format("TDT1", format!("count {n} exceeds {limit}")));
        }
        Ok(n)
    }
}

pub fn read_topology<T: Scalar, R: Read>(input: R) -> Result<TopologyArtifact<T>> {
    let mut r = Reader { inner: input };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::format("TDT1", "bad magic"));
    }
    let n = r.u64()?;
    let labels = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    let n_max = r.count(n)?;
    let maxima = (0..n_max).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    let n_saddles = r.u64()?;
    let mut saddles = Vec::with_capacity(n_saddles.min(1 << 20));
    for _ in 0..n_saddles {
        saddles.push(SaddleRecord {
            a: r.u64()?,
            b: r.u64()?,
            vertex: r.u64()?,
            value: r.f64()?,
        });
    }
    let n_events = r.count(n_max)?;
    let mut events = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        events.push(MergeEvent {
            victim: r.u64()?,
            survivor: r.u64()?,
            saddle: r.u64()?,
            persistence: r.f64()?,
        });
    }
    let f_range = Range {
        min: r.f64()?,
        max: r.f64()?,
    };
    if labels.iter().any(|&l| l >= n) || maxima.iter().any(|&m| m >= n) {
        return Err(Error::format("TDT1", "vertex id out of range"));
    }
    Ok(TopologyArtifact {
        segmentation: Segmentation {
            labels,
            maxima: maxima.clone(),
        },
        saddles,
        hierarchy: MergeHierarchy {
            events,
            f_range,
            base_maxima: maxima,
        },
    })
}

pub fn load_topology<T: Scalar>(path: &Path) -> Result<TopologyArtifact<T>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_topology(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_hierarchy;

    #[test]
    fn round_trip_and_bad_magic() {
        let seg = Segmentation {
            labels: vec![1, 1, 3, 3, 3],
            maxima: vec![1, 3],
        };
        let saddles = vec![SaddleRecord {
            a: 1,
            b: 3,
            vertex: 2,
            value: 1.0,
        }];
        let f = [0.0, 2.0, 1.0, 3.0, 0.0];
        let topo = TopologyArtifact {
            hierarchy: build_hierarchy(&seg, &saddles, &f),
            segmentation: seg,
            saddles,
        };
        let mut buf = Vec::new();
        write_topology(&topo, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"TDT1");
        assert_eq!(buf.len(), 4 + 8 + 5 * 8 + 8 + 2 * 8 + 8 + 32 + 8 + 32 + 16);
        assert_eq!(read_topology::<f64, _>(buf.as_slice()).unwrap(), topo);
        buf[0] = b'X';
        assert!(read_topology::<f64, _>(buf.as_slice()).is_err());
    }
}
