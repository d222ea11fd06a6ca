//! Block error-correcting codes over bit vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StegoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EccCodec {
    /// Each bit sent three times, majority decoded.
    Repetition3,
    /// Hamming(7,4), single-error correcting.
    Hamming74,
}

impl EccCodec {
    pub const ALL: [EccCodec; 2] = [EccCodec::Repetition3, EccCodec::Hamming74];

    /// Payload bits per block.
    pub fn data_len(self) -> usize {
        match self {
            EccCodec::Repetition3 => 1,
            EccCodec::Hamming74 => 4,
        }
    }

    /// Codeword bits per block.
    pub fn block_len(self) -> usize {
        match self {
            EccCodec::Repetition3 => 3,
            EccCodec::Hamming74 => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EccCodec::Repetition3 => "repetition3",
            EccCodec::Hamming74 => "hamming74",
        }
    }

    pub fn encode(self, bits: &[bool]) -> Result<Vec<bool>, StegoError> {
        ecc_encode(bits, self)
    }

    pub fn decode(self, bits: &[bool]) -> Result<Vec<bool>, StegoError> {
        ecc_decode(bits, self)
    }
}

impl fmt::Display for EccCodec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EccCodec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repetition3" => Ok(EccCodec::Repetition3),
            "hamming74" => Ok(EccCodec::Hamming74),
            other => Err(format!("unknown codec {other:?}")),
        }
    }
}

fn check_len(len: usize, block: usize) -> Result<(), StegoError> {
    if !len.is_multiple_of(block) {
        return Err(StegoError::BlockLength { len, block });
    }
    Ok(())
}

/// Encodes `bits`; the length must be a multiple of the codec's data block.
pub fn ecc_encode(bits: &[bool], codec: EccCodec) -> Result<Vec<bool>, StegoError> {
    check_len(bits.len(), codec.data_len())?;
    let mut out = Vec::with_capacity(bits.len() / codec.data_len() * codec.block_len());
    match codec {
        EccCodec::Repetition3 => {
            for &b in bits {
                out.extend([b, b, b]);
            }
        }
        EccCodec::Hamming74 => {
            for d in bits.chunks_exact(4) {
                out.extend(hamming_encode([d[0], d[1], d[2], d[3]]));
            }
        }
    }
    Ok(out)
}

/// Decodes `bits`, correcting up to one flipped bit per block.
pub fn ecc_decode(bits: &[bool], codec: EccCodec) -> Result<Vec<bool>, StegoError> {
    check_len(bits.len(), codec.block_len())?;
    let mut out = Vec::with_capacity(bits.len() / codec.block_len() * codec.data_len());
    match codec {
        EccCodec::Repetition3 => {
            for block in bits.chunks_exact(3) {
                let ones = block.iter().filter(|&&b| b).count();
                out.push(ones >= 2);
            }
        }
        EccCodec::Hamming74 => {
            for block in bits.chunks_exact(7) {
                let mut cw = [false; 7];
                cw.copy_from_slice(block);
                out.extend(hamming_decode(cw));
            }
        }
    }
    Ok(out)
}

// Codeword positions 1..=7 hold p1 p2 d1 p4 d2 d3 d4.
fn hamming_encode(d: [bool; 4]) -> [bool; 7] {
    let p1 = d[0] ^ d[1] ^ d[3];
    let p2 = d[0] ^ d[2] ^ d[3];
    let p4 = d[1] ^ d[2] ^ d[3];
    [p1, p2, d[0], p4, d[1], d[2], d[3]]
}

fn hamming_decode(mut cw: [bool; 7]) -> [bool; 4] {
    let mut syndrome = 0usize;
    for (i, &bit) in cw.iter().enumerate() {
        if bit {
            syndrome ^= i + 1;
        }
    }
    if syndrome != 0 {
        cw[syndrome - 1] = !cw[syndrome - 1];
    }
    [cw[2], cw[4], cw[5], cw[6]]
}

/// CRC-8 (polynomial x^8 + x^2 + x + 1, zero init) over a bit stream.
pub fn crc8(bits: &[bool]) -> [bool; 8] {
    let mut reg: u8 = 0;
    for &b in bits {
        let top = (reg >> 7) & 1 == 1;
        reg <<= 1;
        if top ^ b {
            reg ^= 0x07;
        }
    }
    let mut out = [false; 8];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (reg >> (7 - i)) & 1 == 1;
    }
    out
}
