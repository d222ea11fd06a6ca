//! Tables of the codepoints the watermark schemes exploit.
//!
//! The whitespace table is compiled in and its order is part of the public
//! contract: steganography alphabets refer to entries by position, so the
//! list must never be reordered.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming an extension file for variant sequences.
pub const REGISTRY_ENV: &str = "UNIMARK_REGISTRY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WhitespaceEntry {
    #[serde(serialize_with = "ser_codepoint")]
    pub codepoint: char,
    pub name: &'static str,
    pub no_break: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantSequence {
    #[serde(serialize_with = "ser_codepoint")]
    pub base: char,
    #[serde(serialize_with = "ser_opt_codepoint")]
    pub selector: Option<char>,
    /// Identifies the glyph this sequence renders as. Two sequences with the
    /// same tag look identical.
    pub renders_as: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LigatureEntry {
    pub plain: &'static str,
    #[serde(serialize_with = "ser_codepoint")]
    pub ligature: char,
}

const fn ws(codepoint: char, name: &'static str, no_break: bool) -> WhitespaceEntry {
    WhitespaceEntry {
        codepoint,
        name,
        no_break,
    }
}

static WHITESPACE: [WhitespaceEntry; 17] = [
    ws('\u{0020}', "SPACE", false),
    ws('\u{00A0}', "NO-BREAK SPACE", true),
    ws('\u{1680}', "OGHAM SPACE MARK", false),
    ws('\u{2000}', "EN QUAD", false),
    ws('\u{2001}', "EM QUAD", false),
    ws('\u{2002}', "EN SPACE", false),
    ws('\u{2003}', "EM SPACE", false),
    ws('\u{2004}', "THREE-PER-EM SPACE", false),
    ws('\u{2005}', "FOUR-PER-EM SPACE", false),
    ws('\u{2006}', "SIX-PER-EM SPACE", false),
    ws('\u{2007}', "FIGURE SPACE", true),
    ws('\u{2008}', "PUNCTUATION SPACE", false),
    ws('\u{2009}', "THIN SPACE", false),
    ws('\u{200A}', "HAIR SPACE", false),
    ws('\u{202F}', "NARROW NO-BREAK SPACE", true),
    ws('\u{205F}', "MEDIUM MATHEMATICAL SPACE", false),
    ws('\u{3000}', "IDEOGRAPHIC SPACE", false),
];

static LIGATURES: [LigatureEntry; 5] = [
    LigatureEntry {
        plain: "ff",
        ligature: '\u{FB00}',
    },
    LigatureEntry {
        plain: "fi",
        ligature: '\u{FB01}',
    },
    LigatureEntry {
        plain: "fl",
        ligature: '\u{FB02}',
    },
    LigatureEntry {
        plain: "ffi",
        ligature: '\u{FB03}',
    },
    LigatureEntry {
        plain: "ffl",
        ligature: '\u{FB04}',
    },
];

// (base, [(selector, tag)]). The bare form renders as the first tag.
// U+9BD6 follows the mackerel example: E0101 and E0103 keep the default
// glyph, E0100 selects the variant glyph.
const SEED_VARIANTS: &[(char, &[(char, &str)])] = &[
    (
        '\u{9BD6}',
        &[('\u{E0101}', "a"), ('\u{E0103}', "a"), ('\u{E0100}', "b")],
    ),
    ('\u{845B}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{8FBB}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{9017}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{8FE6}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{98F4}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{9905}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{7947}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{82A6}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    ('\u{6A9C}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
    (
        '\u{9089}',
        &[('\u{E0100}', "a"), ('\u{E0101}', "b"), ('\u{E0102}', "c")],
    ),
    ('\u{9BF5}', &[('\u{E0100}', "a"), ('\u{E0101}', "b")]),
];

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("failed to read registry file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("base {base}: {message}")]
    InvalidBase { base: String, message: String },
}

/// True for scalars in either variation-selector block.
pub fn is_variation_selector(c: char) -> bool {
    matches!(c, '\u{FE00}'..='\u{FE0F}' | '\u{E0100}'..='\u{E01EF}')
}

/// Formats a scalar as `U+XXXX` (at least four hex digits).
pub fn format_codepoint(c: char) -> String {
    format!("U+{:04X}", c as u32)
}

/// Parses `U+XXXX`, `u+xxxx`, `0xXXXX` or bare hex into a scalar.
pub fn parse_codepoint(s: &str) -> Option<char> {
    let s = s.trim();
    let hex = s
        .strip_prefix("U+")
        .or_else(|| s.strip_prefix("u+"))
        .or_else(|| s.strip_prefix("0x"))
        .or_else(|| s.strip_prefix("0X"))
        .unwrap_or(s);
    if hex.is_empty() || hex.len() > 6 {
        return None;
    }
    u32::from_str_radix(hex, 16).ok().and_then(char::from_u32)
}

fn ser_codepoint<S: serde::Serializer>(c: &char, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_codepoint(*c))
}

fn ser_opt_codepoint<S: serde::Serializer>(c: &Option<char>, s: S) -> Result<S::Ok, S::Error> {
    match c {
        Some(c) => s.serialize_str(&format_codepoint(*c)),
        None => s.serialize_none(),
    }
}

/// Codepoint tables. Immutable once built.
#[derive(Debug, Clone)]
pub struct Registry {
    variants: BTreeMap<char, Vec<VariantSequence>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut variants = BTreeMap::new();
        for (base, forms) in SEED_VARIANTS {
            let mut seqs = vec![VariantSequence {
                base: *base,
                selector: None,
                renders_as: forms[0].1.to_string(),
            }];
            seqs.extend(forms.iter().map(|(sel, tag)| VariantSequence {
                base: *base,
                selector: Some(*sel),
                renders_as: tag.to_string(),
            }));
            variants.insert(*base, seqs);
        }
        Registry { variants }
    }
}

#[derive(Deserialize)]
struct ExtensionLine {
    base: String,
    #[serde(default)]
    selector: Option<String>,
    renders_as: String,
}

impl Registry {
    /// The compiled-in tables.
    pub fn builtin() -> &'static Registry {
        static BUILTIN: OnceLock<Registry> = OnceLock::new();
        BUILTIN.get_or_init(Registry::default)
    }

    /// Builtin tables, extended by the file named in `UNIMARK_REGISTRY` if set.
    pub fn from_env() -> Result<Registry, RegistryError> {
        let mut reg = Registry::default();
        if let Some(path) = std::env::var_os(REGISTRY_ENV) {
            reg.load_extension_file(Path::new(&path))?;
        }
        Ok(reg)
    }

    pub fn load_extension_file(&mut self, path: &Path) -> Result<(), RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.extend_from_jsonl(&text)
    }

    /// Adds variant sequences from JSON lines of the form
    /// `{"base": "U+XXXX", "selector": "U+XXXXX", "renders_as": "tag"}`.
    ///
    /// A missing or null `selector` registers the bare form. When a base gets
    /// no bare line, the bare form takes the tag of its first selector line.
    pub fn extend_from_jsonl(&mut self, text: &str) -> Result<(), RegistryError> {
        let mut added: BTreeMap<char, Vec<VariantSequence>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let parsed: ExtensionLine =
                serde_json::from_str(raw).map_err(|e| RegistryError::Parse {
                    line,
                    message: e.to_string(),
                })?;
            let bad = |what: &str, v: &str| RegistryError::Parse {
                line,
                message: format!("invalid {what} codepoint {v:?}"),
            };
            let base = parse_codepoint(&parsed.base).ok_or_else(|| bad("base", &parsed.base))?;
            let selector = match parsed.selector.as_deref() {
                None => None,
                Some(s) => {
                    let c = parse_codepoint(s).ok_or_else(|| bad("selector", s))?;
                    if !is_variation_selector(c) {
                        return Err(RegistryError::Parse {
                            line,
                            message: format!("{} is not a variation selector", format_codepoint(c)),
                        });
                    }
                    Some(c)
                }
            };
            if is_variation_selector(base) || base.is_whitespace() {
                return Err(bad("base", &parsed.base));
            }
            let seqs = added.entry(base).or_default();
            if seqs.iter().any(|s| s.selector == selector) {
                return Err(RegistryError::Parse {
                    line,
                    message: "duplicate sequence".into(),
                });
            }
            seqs.push(VariantSequence {
                base,
                selector,
                renders_as: parsed.renders_as,
            });
        }

        for (base, mut seqs) in added {
            if !seqs.iter().any(|s| s.selector.is_none()) {
                let tag = seqs[0].renders_as.clone();
                seqs.insert(
                    0,
                    VariantSequence {
                        base,
                        selector: None,
                        renders_as: tag,
                    },
                );
            }
            // Bare form first, then selectors in codepoint order.
            seqs.sort_by_key(|s| s.selector.map_or(0, |c| c as u32 + 1));
            let bare_tag = &seqs[0].renders_as;
            if !seqs[1..].iter().any(|s| &s.renders_as == bare_tag) {
                return Err(RegistryError::InvalidBase {
                    base: format_codepoint(base),
                    message: "no selector form renders like the bare character".into(),
                });
            }
            self.variants.insert(base, seqs);
        }
        Ok(())
    }

    pub fn whitespace_codepoints(&self) -> &'static [WhitespaceEntry] {
        &WHITESPACE
    }

    pub fn whitespace_entry(&self, c: char) -> Option<&'static WhitespaceEntry> {
        WHITESPACE.iter().find(|e| e.codepoint == c)
    }

    pub fn is_whitespace(&self, c: char) -> bool {
        self.whitespace_entry(c).is_some()
    }

    /// All registered sequences for `base`, bare form first. Empty when the
    /// base is not registered.
    pub fn variant_sequences(&self, base: char) -> &[VariantSequence] {
        self.variants.get(&base).map_or(&[], Vec::as_slice)
    }

    pub fn is_variant_base(&self, c: char) -> bool {
        self.variants.contains_key(&c)
    }

    pub fn variant_bases(&self) -> impl Iterator<Item = char> + '_ {
        self.variants.keys().copied()
    }

    /// First selector whose glyph matches the bare character.
    pub fn same_glyph_selector(&self, base: char) -> Option<char> {
        let seqs = self.variant_sequences(base);
        let bare = seqs.first()?;
        seqs[1..]
            .iter()
            .find(|s| s.renders_as == bare.renders_as)
            .and_then(|s| s.selector)
    }

    /// First selector whose glyph differs from the bare character.
    pub fn alternate_glyph_selector(&self, base: char) -> Option<char> {
        let seqs = self.variant_sequences(base);
        let bare = seqs.first()?;
        seqs[1..]
            .iter()
            .find(|s| s.renders_as != bare.renders_as)
            .and_then(|s| s.selector)
    }

    pub fn ligature_map(&self) -> &'static [LigatureEntry] {
        &LIGATURES
    }

    /// Plain spelling of a registered ligature scalar.
    pub fn ligature_plain(&self, c: char) -> Option<&'static str> {
        LIGATURES.iter().find(|e| e.ligature == c).map(|e| e.plain)
    }

    /// Longest registered plain spelling that `text` starts with.
    pub fn longest_ligature_prefix(&self, text: &str) -> Option<&'static LigatureEntry> {
        LIGATURES
            .iter()
            .filter(|e| text.starts_with(e.plain))
            .max_by_key(|e| e.plain.len())
    }
}

/// Whitespace table of the builtin registry.
pub fn whitespace_codepoints() -> &'static [WhitespaceEntry] {
    Registry::builtin().whitespace_codepoints()
}

/// Variant sequences of `base` in the builtin registry.
pub fn variant_sequences(base: char) -> &'static [VariantSequence] {
    Registry::builtin().variant_sequences(base)
}

pub fn ligature_map() -> &'static [LigatureEntry] {
    Registry::builtin().ligature_map()
}

impl fmt::Display for WhitespaceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", format_codepoint(self.codepoint), self.name)?;
        if self.no_break {
            f.write_str(" *")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn whitespace_table_shape() {
        let table = whitespace_codepoints();
        assert_eq!(table[0].codepoint, ' ');
        assert!(table
            .iter()
            .any(|e| e.codepoint == '\u{2004}' && e.name == "THREE-PER-EM SPACE"));
        let nbsp = table.iter().find(|e| e.codepoint == '\u{00A0}').unwrap();
        assert!(nbsp.no_break);
        let unique: HashSet<char> = table.iter().map(|e| e.codepoint).collect();
        assert_eq!(unique.len(), table.len());
        for e in table {
            assert!(e.codepoint.is_whitespace(), "{e}");
        }
        assert_eq!(
            whitespace_codepoints(),
            Registry::default().whitespace_codepoints()
        );
    }

    #[test]
    fn mackerel_variants() {
        let seqs = variant_sequences('\u{9BD6}');
        assert!(seqs.iter().any(|s| s.selector == Some('\u{E0101}')));
        assert!(seqs.iter().any(|s| s.selector.is_none()));
        let reg = Registry::builtin();
        assert_eq!(reg.same_glyph_selector('\u{9BD6}'), Some('\u{E0101}'));
        assert_eq!(reg.alternate_glyph_selector('\u{9BD6}'), Some('\u{E0100}'));
        assert!(variant_sequences('A').is_empty());
    }

    #[test]
    fn every_base_has_two_same_glyph_forms() {
        let reg = Registry::builtin();
        for base in reg.variant_bases() {
            let seqs = reg.variant_sequences(base);
            assert!(seqs.len() >= 2);
            assert_eq!(seqs[0].selector, None);
            let sel = reg.same_glyph_selector(base).unwrap();
            assert!(is_variation_selector(sel));
        }
    }

    #[test]
    fn ligature_lookup() {
        let reg = Registry::builtin();
        assert_eq!(reg.ligature_plain('\u{FB00}'), Some("ff"));
        assert_eq!(reg.ligature_plain('\u{FB01}'), Some("fi"));
        assert_eq!(reg.longest_ligature_prefix("ffix").unwrap().plain, "ffi");
        assert_eq!(reg.longest_ligature_prefix("ffa").unwrap().plain, "ff");
        assert!(reg.longest_ligature_prefix("of").is_none());
    }

    #[test]
    fn codepoint_parsing() {
        assert_eq!(parse_codepoint("U+2004"), Some('\u{2004}'));
        assert_eq!(parse_codepoint("u+e0101"), Some('\u{E0101}'));
        assert_eq!(parse_codepoint("0x20"), Some(' '));
        assert_eq!(parse_codepoint("U+D800"), None);
        assert_eq!(parse_codepoint("U+"), None);
        assert_eq!(format_codepoint('\u{E0101}'), "U+E0101");
        assert_eq!(format_codepoint(' '), "U+0020");
    }

    #[test]
    fn extension_lines() {
        let mut reg = Registry::default();
        reg.extend_from_jsonl(
            "{\"base\": \"U+5F25\", \"selector\": \"U+E0100\", \"renders_as\": \"std\"}\n\
             # comment\n\
             {\"base\": \"U+5F25\", \"selector\": \"U+E0101\", \"renders_as\": \"alt\"}\n",
        )
        .unwrap();
        let seqs = reg.variant_sequences('\u{5F25}');
        assert_eq!(seqs.len(), 3);
        assert_eq!(seqs[0].selector, None);
        assert_eq!(seqs[0].renders_as, "std");
        assert_eq!(reg.same_glyph_selector('\u{5F25}'), Some('\u{E0100}'));
    }

    #[test]
    fn extension_errors() {
        let mut reg = Registry::default();
        let err = reg
            .extend_from_jsonl(
                "{\"base\": \"U+5F25\", \"selector\": \"U+0041\", \"renders_as\": \"x\"}",
            )
            .unwrap_err();
        assert!(matches!(err, RegistryError::Parse { line: 1, .. }));

        let err = reg.extend_from_jsonl("\n{not json").unwrap_err();
        assert!(matches!(err, RegistryError::Parse { line: 2, .. }));

        let err = reg
            .extend_from_jsonl(
                "{\"base\": \"U+5F25\", \"selector\": null, \"renders_as\": \"x\"}\n\
                 {\"base\": \"U+5F25\", \"selector\": \"U+E0100\", \"renders_as\": \"y\"}",
            )
            .unwrap_err();
        assert!(matches!(err, RegistryError::InvalidBase { .. }));
    }
}
