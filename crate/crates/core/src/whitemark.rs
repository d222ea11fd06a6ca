//! Replace-all whitespace watermark.
//!
//! Every base space becomes the mark space; detection is presence of a
//! single mark. Both operations are scalar-local, so a document may be split
//! into chunks at any scalar boundary and processed piecewise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{format_codepoint, Registry};

pub const DEFAULT_BASE: char = '\u{0020}';
pub const DEFAULT_MARK: char = '\u{2004}';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WhitemarkScheme {
    pub base: char,
    pub mark: char,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("base and mark are both {0}")]
    SameCodepoint(String),
    #[error("{0} is not a registered whitespace")]
    NotWhitespace(String),
}

impl Default for WhitemarkScheme {
    fn default() -> Self {
        WhitemarkScheme {
            base: DEFAULT_BASE,
            mark: DEFAULT_MARK,
        }
    }
}

impl WhitemarkScheme {
    pub fn new(base: char, mark: char) -> Result<Self, SchemeError> {
        let scheme = WhitemarkScheme { base, mark };
        scheme.validate(Registry::builtin())?;
        Ok(scheme)
    }

    pub fn validate(&self, registry: &Registry) -> Result<(), SchemeError> {
        if self.base == self.mark {
            return Err(SchemeError::SameCodepoint(format_codepoint(self.base)));
        }
        for c in [self.base, self.mark] {
            if !registry.is_whitespace(c) {
                return Err(SchemeError::NotWhitespace(format_codepoint(c)));
            }
        }
        Ok(())
    }

    pub fn apply(&self, text: &str) -> String {
        apply(text, self)
    }

    pub fn detect(&self, text: &str) -> Verdict {
        detect(text, self)
    }

    pub fn strip(&self, text: &str) -> String {
        strip(text, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub detected: bool,
    pub mark_count: usize,
    pub base_count: usize,
}

fn replace_scalar(text: &str, from: char, to: char) -> String {
    text.chars()
        .map(|c| if c == from { to } else { c })
        .collect()
}

pub fn apply(text: &str, scheme: &WhitemarkScheme) -> String {
    replace_scalar(text, scheme.base, scheme.mark)
}

pub fn detect(text: &str, scheme: &WhitemarkScheme) -> Verdict {
    let (mut mark_count, mut base_count) = (0, 0);
    for c in text.chars() {
        if c == scheme.mark {
            mark_count += 1;
        } else if c == scheme.base {
            base_count += 1;
        }
    }
    Verdict {
        detected: mark_count > 0,
        mark_count,
        base_count,
    }
}

/// Maps every mark back to the base space. This is also the trivial attack
/// that erases the watermark.
pub fn strip(text: &str, scheme: &WhitemarkScheme) -> String {
    replace_scalar(text, scheme.mark, scheme.base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MARK: char = '\u{2004}';

    #[test]
    fn apply_examples() {
        let s = WhitemarkScheme::default();
        assert_eq!(s.apply("a b c"), "a\u{2004}b\u{2004}c");
        assert_eq!(s.apply(""), "");
        assert_eq!(s.apply("abc"), "abc");
    }

    #[test]
    fn detect_examples() {
        let s = WhitemarkScheme::default();
        let v = s.detect("a\u{2004}b");
        assert!(v.detected);
        assert_eq!(v.mark_count, 1);
        assert!(!s.detect("a b").detected);
        assert_eq!(s.detect("a b").base_count, 1);
    }

    #[test]
    fn strip_examples() {
        let s = WhitemarkScheme::default();
        assert_eq!(s.strip(&s.apply("a b")), "a b");
        assert_eq!(s.strip("x\u{2004}y"), "x y");
    }

    #[test]
    fn scheme_validation() {
        assert!(WhitemarkScheme::new(' ', '\u{2009}').is_ok());
        assert_eq!(
            WhitemarkScheme::new(' ', ' '),
            Err(SchemeError::SameCodepoint("U+0020".into()))
        );
        assert_eq!(
            WhitemarkScheme::new(' ', 'X'),
            Err(SchemeError::NotWhitespace("U+0058".into()))
        );
    }

    #[test]
    fn every_registered_mark_keeps_non_whitespace_count() {
        let text = "The quick brown fox jumps over the lazy dog.";
        let non_ws = |t: &str| t.chars().filter(|c| !c.is_whitespace()).count();
        for entry in Registry::builtin().whitespace_codepoints().iter().skip(1) {
            let s = WhitemarkScheme::new(' ', entry.codepoint).unwrap();
            assert_eq!(non_ws(&s.apply(text)), non_ws(text));
        }
    }

    #[test]
    fn chunked_apply_matches_whole() {
        let s = WhitemarkScheme::default();
        let text = "stream me piece by piece ";
        let chunks: Vec<&str> = text.split_inclusive('e').collect();
        let joined: String = chunks.iter().map(|c| s.apply(c)).collect();
        assert_eq!(joined, s.apply(text));
    }

    fn ascii_and_space() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-zA-Z0-9 .,]{0,64}").unwrap()
    }

    proptest! {
        #[test]
        fn strip_inverts_apply(x in ascii_and_space()) {
            let s = WhitemarkScheme::default();
            let marked = s.apply(&x);
            prop_assert_eq!(marked.chars().count(), x.chars().count());
            prop_assert_eq!(s.strip(&marked), x.clone());
            prop_assert!(!s.detect(&s.strip(&marked)).detected);
            prop_assert_eq!(s.detect(&marked).detected, x.contains(' '));
            prop_assert_eq!(s.apply(&marked), marked);
        }

        #[test]
        fn unicode_roundtrip(x in any::<String>()) {
            prop_assume!(!x.contains(MARK));
            let s = WhitemarkScheme::default();
            prop_assert_eq!(s.strip(&s.apply(&x)), x);
        }
    }
}
