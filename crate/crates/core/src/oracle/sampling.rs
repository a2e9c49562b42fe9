//! Ancestral sampling from `P`: draw `depth` letters i.i.d. from `(p_j)` and map
//! the mean through the composed similitude.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CHUNK: usize = 65_536;
pub const DEFAULT_DEPTH: usize = 40;
pub const MAGIC: &[u8; 8] = b"IFSQSMP1";

/// Samples drawn from `P`; a deterministic function of `(seed, depth, count)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub depth: usize,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.values.len() as f64
    }

    /// Fraction of samples in the closed interval `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.values.iter().filter(|&&x| lo <= x && x <= hi).count() as f64 / self.values.len() as f64
    }

    /// `IFSQSMP1`, count as u64 LE, then the values as f64 LE.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    }

    /// Reads the binary form. Seed and depth are not stored and come back as 0.
    pub fn read_from<R: Read>(mut input: R) -> Result<SampleBatch> {
        let io = |e: std::io::Error| Error::SampleFormat(e.to_string());
        let mut header = [0u8; 16];
        input.read_exact(&mut header).map_err(io)?;
        if &header[..8] != MAGIC {
            return Err(Error::SampleFormat("bad magic".into()));
        }
        let count = u64::from_le_bytes(header[8..].try_into().unwrap()) as usize;
        let mut body = Vec::new();
        input.read_to_end(&mut body).map_err(io)?;
        if body.len() != count * 8 {
            return Err(Error::SampleFormat(format!(
                "expected {} value bytes, found {}",
                count * 8,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(SampleBatch {
            values,
            seed: 0,
            depth: 0,
        })
    }
}

/// Letter `j` with probability `p_j`, by inverse CDF on `F(j) = 1 − 3/2^(j+1)`
/// (`F(1) = 1/4`).
pub fn sample_letter<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut j = 1;
    // mass strictly above letter j
    let mut rest = 0.75;
    while u >= 1.0 - rest {
        j += 1;
        rest *= 0.5;
    }
    j
}

/// `S_{ω_1 ... ω_depth}(4/7)` for a fresh random word.
fn sample_point<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> f64 {
    let mut offset = 0.0f64;
    let mut scale = 1.0f64;
    for _ in 0..depth {
        let j = sample_letter(rng) as i32;
        offset += scale * (1.0 - 2f64.powi(1 - j));
        scale *= 2f64.powi(-(j + 1));
    }
    offset + scale * (4.0 / 7.0)
}

/// Draws `count` points. Chunk `c` of 65536 points uses the ChaCha8 stream `c`
/// of `seed`, so the batch does not depend on the number of worker threads.
pub fn sample(count: usize, depth: usize, seed: u64) -> Result<SampleBatch> {
    if count < 1 || depth < 1 {
        return Err(Error::InvalidArgument("count and depth must be at least 1".into()));
    }
    let mut values = vec![0.0; count];
    values.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        for v in chunk.iter_mut() {
            *v = sample_point(&mut rng, depth);
        }
    });
    Ok(SampleBatch { values, seed, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let j = sample_letter(&mut rng) as usize;
            if j <= 5 {
                counts[j] += 1;
            }
        }
        let expected = [0.0, 0.25, 0.375, 0.1875, 0.09375, 0.046875];
        for j in 1..=5 {
            let f = counts[j] as f64 / n as f64;
            assert!((f - expected[j]).abs() < 0.004, "letter {j}: {f}");
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let a = sample(150_000, 40, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample(150_000, 40, 11).unwrap());
        assert_eq!(a, b);
        let c = sample(150_000, 40, 12).unwrap();
        assert_ne!(a.values, c.values);
        assert!(a.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn prefix_stable() {
        let a = sample(70_000, 10, 3).unwrap();
        let b = sample(140_000, 10, 3).unwrap();
        assert_eq!(a.values[..], b.values[..70_000]);
    }

    #[test]
    fn binary_round_trip() {
        let batch = sample(1000, 40, 5).unwrap();
        let mut buf = Vec::new();
        batch.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"IFSQSMP1");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 1000);
        assert_eq!(buf.len(), 16 + 8000);
        let back = SampleBatch::read_from(&buf[..]).unwrap();
        assert_eq!(back.values, batch.values);
        assert!(SampleBatch::read_from(&buf[..100]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(SampleBatch::read_from(&bad[..]).is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(sample(0, 40, 1).is_err());
        assert!(sample(10, 0, 1).is_err());
    }
}
