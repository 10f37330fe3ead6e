//! Edge-coverage bitmap and novelty detection.

use thiserror::Error;

pub const DEFAULT_BITMAP_SIZE: usize = 262_144;

/// Fixed-length array of saturating edge-hit counters. Per-execution maps
/// hold raw counts; the global map accumulates bucket bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageBitmap {
    bytes: Vec<u8>,
}

impl CoverageBitmap {
    pub fn new(len: usize) -> CoverageBitmap {
        CoverageBitmap {
            bytes: vec![0; len],
        }
    }

    pub fn from_bytes(bytes: Vec<u8>) -> CoverageBitmap {
        CoverageBitmap { bytes }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bytes
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.bytes
    }

    pub fn saturating_hit(&mut self, index: usize) {
        let len = self.bytes.len();
        let b = &mut self.bytes[index % len];
        *b = b.saturating_add(1);
    }

    /// Number of positions with any recorded coverage.
    pub fn count_nonzero(&self) -> usize {
        self.bytes.iter().filter(|&&b| b != 0).count()
    }
}

/// Map a hit count into the eight logarithmic buckets
/// 1, 2, 3, 4–7, 8–15, 16–31, 32–127, 128+ as one bit each.
pub fn bucketize(count: u8) -> u8 {
    match count {
        0 => 0,
        1 => 1 << 0,
        2 => 1 << 1,
        3 => 1 << 2,
        4..=7 => 1 << 3,
        8..=15 => 1 << 4,
        16..=31 => 1 << 5,
        32..=127 => 1 << 6,
        _ => 1 << 7,
    }
}

#[derive(Debug, Error)]
#[error("coverage map length mismatch: execution {exec} vs global {global}")]
pub struct BitmapLenMismatch {
    pub exec: usize,
    pub global: usize,
}

/// Bucketize the execution map and report whether it contributes any
/// bucket bit absent from the global map; on true the global map absorbs
/// the new bits. A length mismatch is campaign-fatal.
pub fn has_new_coverage(
    exec: &CoverageBitmap,
    global: &mut CoverageBitmap,
) -> Result<bool, BitmapLenMismatch> {
    if exec.len() != global.len() {
        return Err(BitmapLenMismatch {
            exec: exec.len(),
            global: global.len(),
        });
    }
    let mut new = false;
    for (e, g) in exec.bytes.iter().zip(global.bytes.iter_mut()) {
        let bucket = bucketize(*e);
        if bucket & !*g != 0 {
            new = true;
            *g |= bucket;
        }
    }
    Ok(new)
}

/// Stable signature of a bucketized coverage map, used for crash dedup.
pub fn coverage_signature(exec: &CoverageBitmap) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut h = FNV_OFFSET;
    for (i, &b) in exec.bytes.iter().enumerate() {
        let bucket = bucketize(b);
        if bucket != 0 {
            for byte in (i as u64).to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(FNV_PRIME);
            }
            h ^= u64::from(bucket);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}
