//! Every-other-occurrence watermarks.
//!
//! Eligible occurrences (registered CJK bases, spaces, ligature-able
//! substrings) are enumerated left to right over the whole document.
//! Occurrences at even 0-based index receive the marked form; odd ones are
//! left alone. Detection counts neighbouring eligible occurrences whose
//! marked states differ. Indexing is global, so a document cannot be split
//! into independently processed chunks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{is_variation_selector, Registry};
use crate::whitemark::{DEFAULT_BASE, DEFAULT_MARK};

pub const DEFAULT_MIN_ELIGIBLE: usize = 4;
pub const DEFAULT_MIN_RATIO: f64 = 0.8;

/// Which selector a CJK mark attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantForm {
    /// A selector rendering exactly like the bare ideograph.
    SameGlyph,
    /// A selector rendering a visibly different variant (survives printing).
    AlternateGlyph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eligibility {
    CjkVariant { form: VariantForm },
    Whitespace { base: char, mark: char },
    Ligature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternationScheme {
    pub eligibility: Eligibility,
    pub min_eligible: usize,
    pub min_ratio: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AlternationError {
    #[error("min_eligible must be at least 2, got {0}")]
    MinEligible(usize),
    #[error("min_ratio must lie in (0, 1], got {0}")]
    MinRatio(f64),
    #[error("scheme eligibility is {0}, expected ligature")]
    NotLigature(&'static str),
}

impl AlternationScheme {
    pub fn new(eligibility: Eligibility) -> Self {
        AlternationScheme {
            eligibility,
            min_eligible: DEFAULT_MIN_ELIGIBLE,
            min_ratio: DEFAULT_MIN_RATIO,
        }
    }

    pub fn variantmark() -> Self {
        Self::new(Eligibility::CjkVariant {
            form: VariantForm::SameGlyph,
        })
    }

    pub fn printmark_variant() -> Self {
        Self::new(Eligibility::CjkVariant {
            form: VariantForm::AlternateGlyph,
        })
    }

    pub fn printmark_whitespace() -> Self {
        Self::new(Eligibility::Whitespace {
            base: DEFAULT_BASE,
            mark: DEFAULT_MARK,
        })
    }

    pub fn printmark_ligature() -> Self {
        Self::new(Eligibility::Ligature)
    }

    pub fn with_thresholds(
        mut self,
        min_eligible: usize,
        min_ratio: f64,
    ) -> Result<Self, AlternationError> {
        self.min_eligible = min_eligible;
        self.min_ratio = min_ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), AlternationError> {
        if self.min_eligible < 2 {
            return Err(AlternationError::MinEligible(self.min_eligible));
        }
        if !(self.min_ratio > 0.0 && self.min_ratio <= 1.0) {
            return Err(AlternationError::MinRatio(self.min_ratio));
        }
        Ok(())
    }

    pub fn eligibility_name(&self) -> &'static str {
        match self.eligibility {
            Eligibility::CjkVariant { .. } => "cjk_variant",
            Eligibility::Whitespace { .. } => "whitespace",
            Eligibility::Ligature => "ligature",
        }
    }
}

/// One eligible occurrence, in scalar offsets into the scanned text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub start: usize,
    pub len: usize,
    pub marked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternationVerdict {
    pub eligible_count: usize,
    pub marked_count: usize,
    pub alternating_pairs: usize,
    pub ratio: f64,
    pub detected: bool,
}

fn cjk_selector(registry: &Registry, base: char, form: VariantForm) -> Option<char> {
    match form {
        VariantForm::SameGlyph => registry.same_glyph_selector(base),
        VariantForm::AlternateGlyph => registry.alternate_glyph_selector(base),
    }
}

/// Enumerates eligible occurrences left to right.
pub fn occurrences(
    chars: &[char],
    scheme: &AlternationScheme,
    registry: &Registry,
) -> Vec<Occurrence> {
    let mut out = Vec::new();
    let mut i = 0;
    match scheme.eligibility {
        Eligibility::CjkVariant { form } => {
            while i < chars.len() {
                let c = chars[i];
                if cjk_selector(registry, c, form).is_some() {
                    let marked = chars.get(i + 1).is_some_and(|&n| is_variation_selector(n));
                    let len = if marked { 2 } else { 1 };
                    out.push(Occurrence {
                        start: i,
                        len,
                        marked,
                    });
                    i += len;
                } else {
                    i += 1;
                }
            }
        }
        Eligibility::Whitespace { base, mark } => {
            for (start, &c) in chars.iter().enumerate() {
                if c == base || c == mark {
                    out.push(Occurrence {
                        start,
                        len: 1,
                        marked: c == mark,
                    });
                }
            }
        }
        Eligibility::Ligature => {
            let mut buf = String::new();
            while i < chars.len() {
                if registry.ligature_plain(chars[i]).is_some() {
                    out.push(Occurrence {
                        start: i,
                        len: 1,
                        marked: true,
                    });
                    i += 1;
                    continue;
                }
                buf.clear();
                buf.extend(chars[i..chars.len().min(i + 3)].iter());
                if let Some(entry) = registry.longest_ligature_prefix(&buf) {
                    let len = entry.plain.chars().count();
                    out.push(Occurrence {
                        start: i,
                        len,
                        marked: false,
                    });
                    i += len;
                } else {
                    i += 1;
                }
            }
        }
    }
    out
}

impl AlternationScheme {
    pub fn apply(&self, text: &str, registry: &Registry) -> String {
        let chars: Vec<char> = text.chars().collect();
        let occs = occurrences(&chars, self, registry);
        let mut out = String::with_capacity(text.len() + occs.len() * 4);
        let mut cursor = 0;
        for (idx, occ) in occs.iter().enumerate() {
            if idx % 2 == 1 || occ.marked {
                continue;
            }
            out.extend(&chars[cursor..occ.start]);
            let span = &chars[occ.start..occ.start + occ.len];
            match self.eligibility {
                Eligibility::CjkVariant { form } => {
                    out.push(span[0]);
                    // occurrences() only yields bases that have this selector
                    out.push(cjk_selector(registry, span[0], form).expect("registered base"));
                }
                Eligibility::Whitespace { mark, .. } => out.push(mark),
                Eligibility::Ligature => {
                    let plain: String = span.iter().collect();
                    let entry = registry
                        .longest_ligature_prefix(&plain)
                        .expect("registered ligature");
                    out.push(entry.ligature);
                }
            }
            cursor = occ.start + occ.len;
        }
        out.extend(&chars[cursor..]);
        out
    }

    pub fn detect(&self, text: &str, registry: &Registry) -> AlternationVerdict {
        let chars: Vec<char> = text.chars().collect();
        let states: Vec<bool> = occurrences(&chars, self, registry)
            .iter()
            .map(|o| o.marked)
            .collect();
        self.verdict_from_states(&states)
    }

    /// Verdict for an explicit sequence of marked/unmarked states.
    pub fn verdict_from_states(&self, states: &[bool]) -> AlternationVerdict {
        let eligible_count = states.len();
        let marked_count = states.iter().filter(|&&s| s).count();
        let alternating_pairs = states.windows(2).filter(|w| w[0] != w[1]).count();
        let ratio = alternating_pairs as f64 / eligible_count.saturating_sub(1).max(1) as f64;
        AlternationVerdict {
            eligible_count,
            marked_count,
            alternating_pairs,
            ratio,
            detected: eligible_count >= self.min_eligible && ratio >= self.min_ratio,
        }
    }

    pub fn strip(&self, text: &str, registry: &Registry) -> String {
        let mut out = String::with_capacity(text.len());
        match self.eligibility {
            Eligibility::CjkVariant { .. } => {
                let mut prev_base = false;
                for c in text.chars() {
                    if prev_base && is_variation_selector(c) {
                        prev_base = false;
                        continue;
                    }
                    prev_base = registry.is_variant_base(c);
                    out.push(c);
                }
            }
            Eligibility::Whitespace { base, mark } => {
                out.extend(text.chars().map(|c| if c == mark { base } else { c }));
            }
            Eligibility::Ligature => {
                for c in text.chars() {
                    match registry.ligature_plain(c) {
                        Some(plain) => out.push_str(plain),
                        None => out.push(c),
                    }
                }
            }
        }
        out
    }
}

pub fn apply_alternating(text: &str, scheme: &AlternationScheme) -> String {
    scheme.apply(text, Registry::builtin())
}

pub fn detect_alternating(text: &str, scheme: &AlternationScheme) -> AlternationVerdict {
    scheme.detect(text, Registry::builtin())
}

pub fn strip_alternation(text: &str, scheme: &AlternationScheme) -> String {
    scheme.strip(text, Registry::builtin())
}

/// Ligature-only entry point; rejects schemes with any other eligibility.
pub fn apply_printmark_ligature(
    text: &str,
    scheme: &AlternationScheme,
) -> Result<String, AlternationError> {
    if scheme.eligibility != Eligibility::Ligature {
        return Err(AlternationError::NotLigature(scheme.eligibility_name()));
    }
    Ok(apply_alternating(text, scheme))
}
