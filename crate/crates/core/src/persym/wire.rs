//! Bit-exact serialization of encoded batches.
//!
//! Layout: header { d: u16 BE, per-dimension bits: d x u8, n: u64 BE },
//! then row-major cell indices, dimension j spending exactly its allocated
//! bits, packed MSB-first. The final byte is zero-padded.

use crate::error::{Error, Result};

pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u32,
    used: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            acc: 0,
            used: 0,
        }
    }

    pub fn put(&mut self, value: u32, bits: u32) {
        debug_assert!(bits == 32 || value < (1u32 << bits));
        for i in (0..bits).rev() {
            self.acc = (self.acc << 1) | ((value >> i) & 1);
            self.used += 1;
            if self.used == 8 {
                self.bytes.push(self.acc as u8);
                self.acc = 0;
                self.used = 0;
            }
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.bytes.push((self.acc << (8 - self.used)) as u8);
        }
        self.bytes
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u32,
    avail: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            acc: 0,
            avail: 0,
        }
    }

    pub fn get(&mut self, bits: u32) -> Result<u32> {
        let mut out = 0u32;
        for _ in 0..bits {
            if self.avail == 0 {
                let byte = *self.bytes.get(self.pos).ok_or(Error::TruncatedPayload {
                    expected: self.pos + 1,
                    got: self.bytes.len(),
                })?;
                self.pos += 1;
                self.acc = byte as u32;
                self.avail = 8;
            }
            self.avail -= 1;
            out = (out << 1) | ((self.acc >> self.avail) & 1);
        }
        Ok(out)
    }
}

/// Serialized header length in bits for a d-dimensional batch.
pub fn header_bits(d: usize) -> u64 {
    8 * (2 + d as u64 + 8)
}

pub fn write_header(out: &mut Vec<u8>, per_dim_bits: &[u32], n: u64) {
    out.extend_from_slice(&(per_dim_bits.len() as u16).to_be_bytes());
    for &b in per_dim_bits {
        debug_assert!(b <= u8::MAX as u32);
        out.push(b as u8);
    }
    out.extend_from_slice(&n.to_be_bytes());
}

pub struct Header {
    pub per_dim_bits: Vec<u32>,
    pub n: u64,
    pub body_offset: usize,
}

pub fn read_header(bytes: &[u8]) -> Result<Header> {
    let need = |want: usize| -> Result<()> {
        if bytes.len() < want {
            Err(Error::TruncatedPayload {
                expected: want,
                got: bytes.len(),
            })
        } else {
            Ok(())
        }
    };
    need(2)?;
    let d = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
    need(2 + d + 8)?;
    let per_dim_bits: Vec<u32> = bytes[2..2 + d].iter().map(|&b| b as u32).collect();
    let mut n_raw = [0u8; 8];
    n_raw.copy_from_slice(&bytes[2 + d..2 + d + 8]);
    Ok(Header {
        per_dim_bits,
        n: u64::from_be_bytes(n_raw),
        body_offset: 2 + d + 8,
    })
}
