//! Byte-level havoc mutation for the baseline harness. Grammar-blind by
//! design: this is the comparison arm, not the main pipeline.

use rand::Rng;

const INTERESTING_8: [u8; 9] = [128, 255, 0, 1, 16, 32, 64, 100, 127];
const MAX_STACK_POW2: u32 = 7;
const MAX_LEN: usize = 1 << 16;

/// Apply a random stack of byte-level mutations: bit flips, byte
/// substitutions, interesting-value writes, block deletes, block clones
/// and splices from `other`.
pub fn havoc(input: &[u8], other: Option<&[u8]>, rng: &mut impl Rng) -> Vec<u8> {
    let mut buf = input.to_vec();
    if buf.is_empty() {
        buf.push(b' ');
    }
    let stack = 1usize << rng.gen_range(1..=MAX_STACK_POW2);
    for _ in 0..stack {
        let len = buf.len();
        match rng.gen_range(0..6) {
            0 => {
                // bit flip
                let pos = rng.gen_range(0..len);
                buf[pos] ^= 1 << rng.gen_range(0..8);
            }
            1 => {
                let pos = rng.gen_range(0..len);
                buf[pos] = rng.gen();
            }
            2 => {
                let pos = rng.gen_range(0..len);
                buf[pos] = INTERESTING_8[rng.gen_range(0..INTERESTING_8.len())];
            }
            3 => {
                // delete a block
                if len > 2 {
                    let from = rng.gen_range(0..len - 1);
                    let to = rng.gen_range(from + 1..len.min(from + 64).max(from + 2));
                    buf.drain(from..to);
                }
            }
            4 => {
                // clone a block
                if len > 1 && len < MAX_LEN {
                    let from = rng.gen_range(0..len - 1);
                    let to = rng.gen_range(from + 1..len.min(from + 64).max(from + 2));
                    let block: Vec<u8> = buf[from..to].to_vec();
                    let at = rng.gen_range(0..=buf.len());
                    for (i, b) in block.into_iter().enumerate() {
                        buf.insert(at + i, b);
                    }
                }
            }
            _ => {
                // splice bytes from another queue entry
                if let Some(other) = other.filter(|o| !o.is_empty()) {
                    if len < MAX_LEN {
                        let from = rng.gen_range(0..other.len());
                        let to = rng.gen_range(from..other.len().min(from + 64)) + 1;
                        let at = rng.gen_range(0..=buf.len());
                        for (i, b) in other[from..to.min(other.len())].iter().enumerate() {
                            buf.insert(at + i, *b);
                        }
                    }
                }
            }
        }
        if buf.is_empty() {
            buf.push(b' ');
        }
    }
    buf.truncate(MAX_LEN);
    buf
}
