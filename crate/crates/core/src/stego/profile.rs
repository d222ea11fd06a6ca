//! One embed/extract entry point over every carrier and codec combination.

use num_bigint::BigUint;
use serde::Serialize;

use super::{
    bits_to_string, bits_to_value, decode, decode_positional, embed_robust, encode,
    encode_positional, extract_robust, BitCarrier, CodepointAlphabet, EccCodec, Message,
    StegoError,
};
use crate::scheme::Annotation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    Alphabet(CodepointAlphabet),
    Positional { mark: char },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StegoProfile {
    pub carrier: Carrier,
    pub codec: Option<EccCodec>,
}

/// What a reader recovered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extracted {
    pub radix: u32,
    pub digits: Vec<u32>,
    /// Present when the bit length was known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
    pub value: String,
    pub hex: String,
}

impl Extracted {
    fn from_bits(bits: &[bool]) -> Extracted {
        let value = bits_to_value(bits);
        Extracted {
            radix: 2,
            digits: bits.iter().map(|&b| b as u32).collect(),
            bits: Some(bits_to_string(bits)),
            value: value.to_string(),
            hex: format!("0x{value:x}"),
        }
    }
}

fn value_to_bits(value: &BigUint, n_bits: usize) -> Result<Vec<bool>, StegoError> {
    if value.bits() as usize > n_bits {
        return Err(StegoError::DecodeFailure(format!(
            "value {value} does not fit in {n_bits} bits"
        )));
    }
    Ok((0..n_bits).rev().map(|i| value.bit(i as u64)).collect())
}

impl StegoProfile {
    pub fn alphabet(
        alphabet: CodepointAlphabet,
        codec: Option<EccCodec>,
    ) -> Result<Self, StegoError> {
        let profile = StegoProfile {
            carrier: Carrier::Alphabet(alphabet),
            codec,
        };
        profile.bit_carrier()?;
        Ok(profile)
    }

    pub fn positional(mark: char, codec: Option<EccCodec>) -> Result<Self, StegoError> {
        if mark == ' ' {
            return Err(StegoError::Alphabet(
                "positional mark cannot be U+0020".into(),
            ));
        }
        Ok(StegoProfile {
            carrier: Carrier::Positional { mark },
            codec,
        })
    }

    fn bit_carrier(&self) -> Result<Option<BitCarrier>, StegoError> {
        if self.codec.is_none() {
            return Ok(None);
        }
        Ok(Some(match &self.carrier {
            Carrier::Alphabet(a) => BitCarrier::binary(a.clone())?,
            Carrier::Positional { mark } => BitCarrier::Positional { mark: *mark },
        }))
    }

    /// Embeds `payload`. A binary alphabet carries the bits verbatim; a
    /// larger alphabet carries their value in base `p`.
    pub fn embed(&self, text: &str, payload: &[bool]) -> Result<String, StegoError> {
        if let (Some(codec), Some(carrier)) = (self.codec, self.bit_carrier()?) {
            return embed_robust(text, payload, &carrier, codec);
        }
        match &self.carrier {
            Carrier::Alphabet(a) => {
                let p = a.radix() as u32;
                let message = if p == 2 {
                    Message::from_digits(payload.iter().map(|&b| b as u32).collect(), 2)?
                } else {
                    Message::from_value(&bits_to_value(payload), p)
                };
                encode(text, &message, a)
            }
            Carrier::Positional { mark } => encode_positional(text, payload, *mark),
        }
    }

    /// `n_bits` is required for positional and error-corrected reads.
    pub fn extract(&self, text: &str, n_bits: Option<usize>) -> Result<Extracted, StegoError> {
        if let (Some(codec), Some(carrier)) = (self.codec, self.bit_carrier()?) {
            let n = n_bits.ok_or_else(|| {
                StegoError::Payload("error-corrected extraction needs the bit count".into())
            })?;
            return extract_robust(text, n, &carrier, codec).map(|b| Extracted::from_bits(&b));
        }
        match &self.carrier {
            Carrier::Alphabet(a) => {
                let message = decode(text, a);
                match (n_bits, message.radix) {
                    (Some(n), 2) => {
                        if message.digits.len() < n {
                            return Err(StegoError::InsufficientPositions {
                                needed: n,
                                available: message.digits.len(),
                            });
                        }
                        let bits: Vec<bool> = message.digits[..n].iter().map(|&d| d == 1).collect();
                        Ok(Extracted::from_bits(&bits))
                    }
                    (Some(n), _) => {
                        let bits = value_to_bits(&message.value(), n)?;
                        Ok(Extracted {
                            radix: message.radix,
                            digits: message.digits.clone(),
                            ..Extracted::from_bits(&bits)
                        })
                    }
                    (None, radix) => {
                        let value = message.value();
                        Ok(Extracted {
                            radix,
                            digits: message.digits,
                            bits: None,
                            value: value.to_string(),
                            hex: format!("0x{value:x}"),
                        })
                    }
                }
            }
            Carrier::Positional { mark } => {
                let n = n_bits.ok_or_else(|| {
                    StegoError::Payload("positional extraction needs the bit count".into())
                })?;
                decode_positional(text, n, *mark).map(|b| Extracted::from_bits(&b))
            }
        }
    }

    /// Carrier scalars present in `text`.
    pub fn annotate(&self, text: &str) -> Vec<Annotation> {
        text.chars()
            .enumerate()
            .filter_map(|(i, c)| match &self.carrier {
                Carrier::Alphabet(a) => a.digit_of(c).map(|_| Annotation::new(i, 1, c, "digit")),
                Carrier::Positional { mark } => {
                    (c == *mark).then(|| Annotation::new(i, 1, c, "bit"))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stego::{parse_bits, parse_payload};

    const TEXT: &str = "one two three four five six seven eight nine ten";

    fn words(n: usize) -> String {
        (0..=n)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn binary_keeps_leading_zeros() {
        let p = StegoProfile::alphabet(CodepointAlphabet::parse("U+2000,U+2004").unwrap(), None)
            .unwrap();
        let bits = parse_bits("0010").unwrap();
        let marked = p.embed(TEXT, &bits).unwrap();
        let out = p.extract(&marked, Some(4)).unwrap();
        assert_eq!(out.bits.as_deref(), Some("0010"));
        assert_eq!(p.extract(&marked, None).unwrap().digits, vec![0, 0, 1, 0]);
        assert_eq!(p.annotate(&marked).len(), 4);
    }

    #[test]
    fn larger_alphabet_carries_value() {
        let a = CodepointAlphabet::parse("U+2000,U+2001,U+2002,U+2003").unwrap();
        let p = StegoProfile::alphabet(a, None).unwrap();
        let bits = parse_payload("0x1b").unwrap();
        let marked = p.embed(TEXT, &bits).unwrap();
        let out = p.extract(&marked, None).unwrap();
        assert_eq!(
            (out.radix, out.value.as_str(), out.hex.as_str()),
            (4, "27", "0x1b")
        );
        assert_eq!(out.digits, vec![1, 2, 3]);
        assert_eq!(
            p.extract(&marked, Some(8)).unwrap().bits.as_deref(),
            Some("00011011")
        );
    }

    #[test]
    fn positional_and_robust() {
        let bits = parse_bits("1101001").unwrap();
        let p = StegoProfile::positional('\u{2004}', None).unwrap();
        let marked = p.embed(TEXT, &bits).unwrap();
        assert_eq!(
            p.extract(&marked, Some(7)).unwrap().bits.as_deref(),
            Some("1101001")
        );
        assert!(p.extract(&marked, None).is_err());

        for codec in EccCodec::ALL {
            let p = StegoProfile::positional('\u{2004}', Some(codec)).unwrap();
            let text = words(crate::stego::robust_codeword_len(7, codec));
            let marked = p.embed(&text, &bits).unwrap();
            assert_eq!(
                p.extract(&marked, Some(7)).unwrap().bits.as_deref(),
                Some("1101001")
            );
        }
    }

    #[test]
    fn robust_needs_binary_alphabet() {
        let a = CodepointAlphabet::parse("U+2000,U+2001,U+2002").unwrap();
        assert!(matches!(
            StegoProfile::alphabet(a, Some(EccCodec::Hamming74)),
            Err(StegoError::Alphabet(_))
        ));
    }

    #[test]
    fn too_long() {
        let p = StegoProfile::positional('\u{2004}', None).unwrap();
        assert_eq!(
            p.embed("a b", &[true, true]),
            Err(StegoError::MessageTooLong {
                needed: 2,
                available: 1
            })
        );
    }
}
