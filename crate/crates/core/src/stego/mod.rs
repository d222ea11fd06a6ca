//! Whitespace steganography.
//!
//! Two profiles:
//!
//! * **p-ary**: the first `k` plain spaces are replaced by alphabet scalars
//!   `u_{m_1} .. u_{m_k}`, one base-`p` digit each. Decoding scans the whole
//!   text and reads every alphabet scalar, so the alphabet must not contain
//!   U+0020 (untouched trailing spaces would otherwise read as zeros).
//! * **positional**: whitespace `j` carries bit `j`; a 1 becomes the mark,
//!   a 0 stays U+0020. The reader must know the bit count.
//!
//! [`embed_robust`] and [`extract_robust`] add a CRC-8 and an
//! error-correcting code on top of either profile.

pub mod ecc;
pub mod profile;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::registry::{format_codepoint, Registry};

pub use ecc::{crc8, ecc_decode, ecc_encode, EccCodec};
pub use profile::{Carrier, Extracted, StegoProfile};

const SPACE: char = '\u{0020}';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StegoError {
    #[error("message needs {needed} whitespaces but the text has {available}")]
    MessageTooLong { needed: usize, available: usize },
    #[error("need {needed} carrier positions but the text has {available}")]
    InsufficientPositions { needed: usize, available: usize },
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("message is base {message} but the alphabet has {alphabet} codepoints")]
    RadixMismatch { message: u32, alphabet: usize },
    #[error("length {len} is not a multiple of the block size {block}")]
    BlockLength { len: usize, block: usize },
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("invalid payload: {0}")]
    Payload(String),
}

/// Ordered, distinct whitespace codepoints `[u_0, .., u_{p-1}]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodepointAlphabet {
    codepoints: Vec<char>,
}

impl CodepointAlphabet {
    pub fn new(codepoints: Vec<char>) -> Result<Self, StegoError> {
        Self::with_registry(codepoints, Registry::builtin())
    }

    pub fn with_registry(codepoints: Vec<char>, registry: &Registry) -> Result<Self, StegoError> {
        if codepoints.len() < 2 {
            return Err(StegoError::Alphabet("needs at least two codepoints".into()));
        }
        for (i, &c) in codepoints.iter().enumerate() {
            if c == SPACE {
                return Err(StegoError::Alphabet("U+0020 cannot be a digit".into()));
            }
            if !registry.is_whitespace(c) {
                return Err(StegoError::Alphabet(format!(
                    "{} is not a registered whitespace",
                    format_codepoint(c)
                )));
            }
            if codepoints[..i].contains(&c) {
                return Err(StegoError::Alphabet(format!(
                    "{} repeated",
                    format_codepoint(c)
                )));
            }
        }
        Ok(CodepointAlphabet { codepoints })
    }

    /// Parses a comma-separated `U+XXXX` list.
    pub fn parse(list: &str) -> Result<Self, StegoError> {
        let cps = list
            .split(',')
            .map(|s| {
                crate::registry::parse_codepoint(s)
                    .ok_or_else(|| StegoError::Alphabet(format!("bad codepoint {:?}", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(cps)
    }

    pub fn radix(&self) -> usize {
        self.codepoints.len()
    }

    pub fn codepoints(&self) -> &[char] {
        &self.codepoints
    }

    pub fn digit_of(&self, c: char) -> Option<u32> {
        // Every registered whitespace other than U+0020 lies above Latin-1 controls.
        if (c as u32) < 0xA0 {
            return None;
        }
        self.codepoints
            .iter()
            .position(|&u| u == c)
            .map(|i| i as u32)
    }

    pub fn scalar(&self, digit: u32) -> char {
        self.codepoints[digit as usize]
    }
}

impl Default for CodepointAlphabet {
    /// EN QUAD for 0, THREE-PER-EM SPACE for 1.
    fn default() -> Self {
        CodepointAlphabet {
            codepoints: vec!['\u{2000}', '\u{2004}'],
        }
    }
}

/// A non-negative integer together with the base-`p` digits that carry it.
///
/// The digit list is authoritative: `[0, 1]` and `[1]` have the same value
/// but embed differently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub radix: u32,
    pub digits: Vec<u32>,
}

impl Message {
    pub fn from_value(value: &BigUint, radix: u32) -> Self {
        Message {
            radix,
            digits: to_digits(value, radix),
        }
    }

    pub fn from_u64(value: u64, radix: u32) -> Self {
        Message {
            radix,
            digits: to_digits_u64(value, radix),
        }
    }

    pub fn from_digits(digits: Vec<u32>, radix: u32) -> Result<Self, StegoError> {
        assert!(radix >= 2, "radix must be at least 2");
        if let Some(&d) = digits.iter().find(|&&d| d >= radix) {
            return Err(StegoError::Payload(format!(
                "digit {d} out of range for base {radix}"
            )));
        }
        Ok(Message { radix, digits })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn value(&self) -> BigUint {
        self.digits
            .iter()
            .fold(BigUint::zero(), |acc, &d| acc * self.radix + d)
    }

    pub fn value_u64(&self) -> Option<u64> {
        self.digits.iter().try_fold(0u64, |acc, &d| {
            acc.checked_mul(u64::from(self.radix))?
                .checked_add(u64::from(d))
        })
    }
}

/// Most-significant-first digits of `m` in base `p`; zero is `[0]`.
pub fn to_digits(m: &BigUint, p: u32) -> Vec<u32> {
    assert!(p >= 2, "radix must be at least 2");
    if let Some(small) = m.to_u64() {
        return to_digits_u64(small, p);
    }
    let mut digits = m
        .to_radix_be(p)
        .into_iter()
        .map(u32::from)
        .collect::<Vec<_>>();
    if digits.is_empty() {
        digits.push(0);
    }
    digits
}

pub fn to_digits_u64(mut m: u64, p: u32) -> Vec<u32> {
    assert!(p >= 2, "radix must be at least 2");
    let p = u64::from(p);
    let mut digits = Vec::new();
    loop {
        digits.push((m % p) as u32);
        m /= p;
        if m == 0 {
            break;
        }
    }
    digits.reverse();
    digits
}

/// Replaces the first `k` plain spaces with the message digits. Text after
/// the `k`-th replaced space is copied unchanged.
pub fn encode(
    text: &str,
    message: &Message,
    alphabet: &CodepointAlphabet,
) -> Result<String, StegoError> {
    if message.radix as usize != alphabet.radix() {
        return Err(StegoError::RadixMismatch {
            message: message.radix,
            alphabet: alphabet.radix(),
        });
    }
    let k = message.digits.len();
    let mut out = String::with_capacity(text.len() + k * 2);
    let mut digits = message.digits.iter();
    let mut next = digits.next();
    let mut used = 0;
    let mut rest = text;
    while let Some(&d) = next {
        match rest.find(SPACE) {
            Some(pos) => {
                out.push_str(&rest[..pos]);
                out.push(alphabet.scalar(d));
                rest = &rest[pos + 1..];
                used += 1;
                next = digits.next();
            }
            None => {
                return Err(StegoError::MessageTooLong {
                    needed: k,
                    available: used,
                })
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Reads every alphabet scalar in order as one digit.
pub fn decode(text: &str, alphabet: &CodepointAlphabet) -> Message {
    Message {
        radix: alphabet.radix() as u32,
        digits: text.chars().filter_map(|c| alphabet.digit_of(c)).collect(),
    }
}

/// Whitespace `j` (1-indexed) becomes `mark` iff bit `j` is set.
pub fn encode_positional(text: &str, bits: &[bool], mark: char) -> Result<String, StegoError> {
    if mark == SPACE {
        return Err(StegoError::Alphabet(
            "positional mark cannot be U+0020".into(),
        ));
    }
    let available = text.chars().filter(|&c| c == SPACE).count();
    if available < bits.len() {
        return Err(StegoError::MessageTooLong {
            needed: bits.len(),
            available,
        });
    }
    let mut bits = bits.iter();
    Ok(text
        .chars()
        .map(|c| match c {
            SPACE => match bits.next() {
                Some(true) => mark,
                _ => SPACE,
            },
            other => other,
        })
        .collect())
}

/// Reads `n_bits` positions, where a position is any U+0020 or `mark`.
pub fn decode_positional(text: &str, n_bits: usize, mark: char) -> Result<Vec<bool>, StegoError> {
    let bits: Vec<bool> = text
        .chars()
        .filter(|&c| c == SPACE || c == mark)
        .take(n_bits)
        .map(|c| c == mark)
        .collect();
    if bits.len() < n_bits {
        return Err(StegoError::InsufficientPositions {
            needed: n_bits,
            available: bits.len(),
        });
    }
    Ok(bits)
}

/// How a bit stream is written into whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BitCarrier {
    /// Binary alphabet; digit 0 is `u_0`, digit 1 is `u_1`.
    Alphabet(CodepointAlphabet),
    /// 0 stays U+0020, 1 becomes `mark`.
    Positional { mark: char },
}

impl BitCarrier {
    pub fn binary(alphabet: CodepointAlphabet) -> Result<Self, StegoError> {
        if alphabet.radix() != 2 {
            return Err(StegoError::Alphabet(format!(
                "robust embedding needs a binary alphabet, got {} codepoints",
                alphabet.radix()
            )));
        }
        Ok(BitCarrier::Alphabet(alphabet))
    }

    pub fn write(&self, text: &str, bits: &[bool]) -> Result<String, StegoError> {
        match self {
            BitCarrier::Alphabet(alphabet) => {
                let msg = Message {
                    radix: 2,
                    digits: bits.iter().map(|&b| b as u32).collect(),
                };
                encode(text, &msg, alphabet)
            }
            BitCarrier::Positional { mark } => encode_positional(text, bits, *mark),
        }
    }

    pub fn read(&self, text: &str, n_bits: usize) -> Result<Vec<bool>, StegoError> {
        match self {
            BitCarrier::Alphabet(alphabet) => {
                let digits = decode(text, alphabet).digits;
                if digits.len() < n_bits {
                    return Err(StegoError::InsufficientPositions {
                        needed: n_bits,
                        available: digits.len(),
                    });
                }
                Ok(digits[..n_bits].iter().map(|&d| d == 1).collect())
            }
            BitCarrier::Positional { mark } => decode_positional(text, n_bits, *mark),
        }
    }
}

fn frame_len(payload_len: usize, codec: EccCodec) -> usize {
    (payload_len + 8).div_ceil(codec.data_len()) * codec.data_len()
}

/// Number of carrier positions `embed_robust` consumes for a payload.
pub fn robust_codeword_len(payload_len: usize, codec: EccCodec) -> usize {
    frame_len(payload_len, codec) / codec.data_len() * codec.block_len()
}

/// Embeds `payload ++ crc8(payload)`, zero-padded to whole blocks, through
/// `codec`.
pub fn embed_robust(
    text: &str,
    payload: &[bool],
    carrier: &BitCarrier,
    codec: EccCodec,
) -> Result<String, StegoError> {
    let mut frame = payload.to_vec();
    frame.extend(crc8(payload));
    frame.resize(frame_len(payload.len(), codec), false);
    let codeword = ecc_encode(&frame, codec)?;
    carrier.write(text, &codeword)
}

/// Inverse of [`embed_robust`]. Corrects the codec's error budget and fails
/// with `DecodeFailure` when the checksum disagrees afterwards.
pub fn extract_robust(
    text: &str,
    payload_len: usize,
    carrier: &BitCarrier,
    codec: EccCodec,
) -> Result<Vec<bool>, StegoError> {
    let n_code = robust_codeword_len(payload_len, codec);
    let codeword = carrier.read(text, n_code)?;
    let frame = ecc_decode(&codeword, codec)?;
    let (payload, rest) = frame.split_at(payload_len);
    if rest[..8] != crc8(payload) {
        return Err(StegoError::DecodeFailure(
            "checksum mismatch after correction".into(),
        ));
    }
    Ok(payload.to_vec())
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>, StegoError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(StegoError::Payload(format!("{other:?} is not a bit"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a payload given as `0x`-prefixed hex, `0b`-prefixed bits, a bare
/// 0/1 string (bits), or bare hex. Hex digits expand to four bits each, so
/// leading zeros survive.
pub fn parse_payload(s: &str) -> Result<Vec<bool>, StegoError> {
    let s = s.trim();
    if let Some(bits) = s.strip_prefix("0b") {
        return parse_bits(bits);
    }
    let hex = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => h,
        None if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') => return parse_bits(s),
        None => s,
    };
    if hex.is_empty() {
        return Err(StegoError::Payload("empty payload".into()));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| StegoError::Payload(format!("{c:?} is not a hex digit")))?;
        bits.extend((0..4).map(|i| v & (8 >> i) != 0));
    }
    Ok(bits)
}

pub fn bits_to_value(bits: &[bool]) -> BigUint {
    bits.iter()
        .fold(BigUint::zero(), |acc, &b| (acc << 1u32) + u32::from(b))
}
