use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::rng::mix64;

const BLOOM_MAGIC: &[u8] = b"HETEDGE-BLOOM v1\n";
const DEFAULT_SEEDS: (u64, u64) = (0x243F_6A88_85A3_08D3, 0x1319_8A2E_0370_7344);

/// Bloom filter with `k` probes derived by double hashing from two seeded
/// 64-bit hashes: probe `i` sets bit `(h1 + i * h2) mod m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u64>,
    m: u64,
    k: u32,
    seeds: (u64, u64),
    inserted: u64,
}

/// Seeded byte hash: 8-byte little-endian words folded through SplitMix64.
fn hash_bytes(seed: u64, key: &[u8]) -> u64 {
    let mut h = mix64(seed ^ (key.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut chunks = key.chunks_exact(8);
    for c in &mut chunks {
        h = mix64(h ^ u64::from_le_bytes(c.try_into().unwrap()));
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut buf = [0u8; 8];
        buf[..rest.len()].copy_from_slice(rest);
        h = mix64(h ^ u64::from_le_bytes(buf) ^ 0xFF);
    }
    h
}

impl BloomFilter {
    pub fn new(m: u64, k: u32) -> Result<Self> {
        Self::with_seeds(m, k, DEFAULT_SEEDS)
    }

    pub fn with_seeds(m: u64, k: u32, seeds: (u64, u64)) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidConfig("bloom filter needs m >= 1 and k >= 1".into()));
        }
        Ok(BloomFilter { bits: vec![0; m.div_ceil(64) as usize], m, k, seeds, inserted: 0 })
    }

    /// Sized for `expected` items at `bits_per_item` bits each, with
    /// `k = round(m / n * ln 2)`.
    pub fn with_capacity(expected: usize, bits_per_item: usize) -> Result<Self> {
        let n = expected.max(1) as u64;
        let m = n * bits_per_item.max(1) as u64;
        let k = ((m as f64 / n as f64) * std::f64::consts::LN_2).round().max(1.0) as u32;
        Self::new(m, k)
    }

    pub fn num_bits(&self) -> u64 {
        self.m
    }

    pub fn num_hashes(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.inserted
    }

    pub fn is_empty(&self) -> bool {
        self.inserted == 0
    }

    fn probes(&self, key: &[u8]) -> impl Iterator<Item = u64> {
        let h1 = hash_bytes(self.seeds.0, key);
        let h2 = hash_bytes(self.seeds.1, key) | 1;
        let m = self.m;
        (0..self.k as u64).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % m)
    }

    pub fn insert(&mut self, key: impl AsRef<[u8]>) {
        let probes: Vec<u64> = self.probes(key.as_ref()).collect();
        for b in probes {
            self.bits[(b / 64) as usize] |= 1 << (b % 64);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, key: impl AsRef<[u8]>) -> bool {
        self.probes(key.as_ref()).all(|b| self.bits[(b / 64) as usize] & (1 << (b % 64)) != 0)
    }

    pub fn insert_node(&mut self, v: NodeId) {
        self.insert(v.0.to_le_bytes());
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.contains(v.0.to_le_bytes())
    }

    /// `(1 - e^{-kn/m})^k` for the current insert count.
    pub fn expected_fpr(&self) -> f64 {
        analytic_fpr(self.m, self.k, self.inserted)
    }

    /// Versioned binary snapshot: magic, m, k, both seeds, insert count,
    /// then the bit array as little-endian 64-bit words.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BLOOM_MAGIC)?;
        w.write_all(&self.m.to_le_bytes())?;
        w.write_all(&self.k.to_le_bytes())?;
        w.write_all(&self.seeds.0.to_le_bytes())?;
        w.write_all(&self.seeds.1.to_le_bytes())?;
        w.write_all(&self.inserted.to_le_bytes())?;
        for word in &self.bits {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; BLOOM_MAGIC.len()];
        r.read_exact(&mut magic)?;
        if magic != BLOOM_MAGIC {
            return Err(Error::artifact("bloom snapshot", "missing `HETEDGE-BLOOM v1` header"));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        let mut u64_field = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let m = u64_field(&mut r)?;
        r.read_exact(&mut b4)?;
        let k = u32::from_le_bytes(b4);
        let seeds = (u64_field(&mut r)?, u64_field(&mut r)?);
        let inserted = u64_field(&mut r)?;
        let mut f = Self::with_seeds(m, k, seeds)?;
        for word in f.bits.iter_mut() {
            *word = u64_field(&mut r)?;
        }
        f.inserted = inserted;
        Ok(f)
    }
}

pub fn analytic_fpr(m: u64, k: u32, n: u64) -> f64 {
    (1.0 - (-(k as f64) * n as f64 / m as f64).exp()).powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_filter_contains_nothing() {
        let f = BloomFilter::new(1000, 7).unwrap();
        for i in 0..1000u32 {
            assert!(!f.contains(i.to_le_bytes()));
        }
        assert!(f.is_empty());
    }

    #[test]
    fn inserted_items_are_always_found() {
        let mut f = BloomFilter::new(64, 3).unwrap();
        for i in 0..200u32 {
            f.insert_node(NodeId(i));
            assert!(f.contains_node(NodeId(i)));
        }
        assert_eq!(f.len(), 200);
    }

    #[test]
    fn default_sizing() {
        let f = BloomFilter::with_capacity(100, 10).unwrap();
        assert_eq!(f.num_bits(), 1000);
        assert_eq!(f.num_hashes(), 7);
    }

    #[test]
    fn analytic_rate_matches_reference_sizing() {
        // (1 - e^{-7000/9585})^7; m = 10000 would give the often quoted 0.0082
        assert!((analytic_fpr(9585, 7, 1000) - 0.010_039_508).abs() < 1e-8);
        assert!((analytic_fpr(10_000, 7, 1000) - 0.008_19).abs() < 1e-4);
    }

    #[test]
    fn snapshot_round_trips() {
        let mut f = BloomFilter::with_seeds(100, 4, (1, 2)).unwrap();
        f.insert("alice");
        f.insert("bob");
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        let back = BloomFilter::read(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert!(back.contains("alice"));
        assert!(BloomFilter::read(&buf[..10]).is_err());
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(BloomFilter::new(0, 3).is_err());
        assert!(BloomFilter::new(10, 0).is_err());
    }
}
