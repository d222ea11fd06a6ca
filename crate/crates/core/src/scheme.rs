//! Named schemes with optional parameters, shared by the CLI and the HTTP
//! service.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alternation::{
    AlternationError, AlternationScheme, AlternationVerdict, Eligibility, VariantForm,
};
use crate::registry::{format_codepoint, is_variation_selector, parse_codepoint, Registry};
use crate::whitemark::{self, Verdict, WhitemarkScheme};

pub const SCHEME_NAMES: [&str; 5] = [
    "whitemark",
    "variantmark",
    "printmark-space",
    "printmark-ligature",
    "printmark-variant",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeSpecError {
    #[error("unknown scheme {0:?}")]
    Unknown(String),
    #[error("{field}: {message}")]
    Param {
        field: &'static str,
        message: String,
    },
}

impl SchemeSpecError {
    pub fn field(&self) -> &'static str {
        match self {
            SchemeSpecError::Unknown(_) => "scheme",
            SchemeSpecError::Param { field, .. } => field,
        }
    }
}

/// Optional overrides. Codepoints use the `U+XXXX` spelling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eligible: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Whitemark(WhitemarkScheme),
    Alternation {
        name: &'static str,
        scheme: AlternationScheme,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeVerdict {
    Whitemark(Verdict),
    Alternation(AlternationVerdict),
}

impl SchemeVerdict {
    pub fn detected(&self) -> bool {
        match self {
            SchemeVerdict::Whitemark(v) => v.detected,
            SchemeVerdict::Alternation(v) => v.detected,
        }
    }
}

/// A highlighted span, in scalar offsets into the text it accompanies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub offset: usize,
    pub length: usize,
    pub codepoint: String,
    pub kind: String,
}

impl Annotation {
    pub fn new(offset: usize, length: usize, c: char, kind: &str) -> Self {
        Annotation {
            offset,
            length,
            codepoint: format_codepoint(c),
            kind: kind.to_string(),
        }
    }
}

fn codepoint_param(
    field: &'static str,
    value: &Option<String>,
    default: char,
) -> Result<char, SchemeSpecError> {
    match value {
        None => Ok(default),
        Some(s) => parse_codepoint(s).ok_or_else(|| SchemeSpecError::Param {
            field,
            message: format!("not a codepoint: {s:?}"),
        }),
    }
}

impl Scheme {
    pub fn from_name(
        name: &str,
        params: &SchemeParams,
        registry: &Registry,
    ) -> Result<Scheme, SchemeSpecError> {
        let name: &'static str = SCHEME_NAMES
            .iter()
            .find(|n| **n == name)
            .ok_or_else(|| SchemeSpecError::Unknown(name.to_string()))?;
        let takes_codepoints = matches!(name, "whitemark" | "printmark-space");
        if !takes_codepoints {
            for (field, v) in [("base", &params.base), ("mark", &params.mark)] {
                if v.is_some() {
                    return Err(SchemeSpecError::Param {
                        field,
                        message: format!("{name} takes no {field}"),
                    });
                }
            }
        }
        let base = codepoint_param("base", &params.base, whitemark::DEFAULT_BASE)?;
        let mark = codepoint_param("mark", &params.mark, whitemark::DEFAULT_MARK)?;
        if takes_codepoints {
            let ws = WhitemarkScheme { base, mark };
            ws.validate(registry).map_err(|e| SchemeSpecError::Param {
                field: if registry.is_whitespace(base) {
                    "mark"
                } else {
                    "base"
                },
                message: e.to_string(),
            })?;
        }
        if name == "whitemark" {
            for (field, set) in [
                ("min_eligible", params.min_eligible.is_some()),
                ("min_ratio", params.min_ratio.is_some()),
            ] {
                if set {
                    return Err(SchemeSpecError::Param {
                        field,
                        message: "whitemark takes no alternation thresholds".into(),
                    });
                }
            }
            return Ok(Scheme::Whitemark(WhitemarkScheme { base, mark }));
        }
        let eligibility = match name {
            "variantmark" => Eligibility::CjkVariant {
                form: VariantForm::SameGlyph,
            },
            "printmark-variant" => Eligibility::CjkVariant {
                form: VariantForm::AlternateGlyph,
            },
            "printmark-space" => Eligibility::Whitespace { base, mark },
            _ => Eligibility::Ligature,
        };
        let mut scheme = AlternationScheme::new(eligibility);
        if let Some(n) = params.min_eligible {
            scheme.min_eligible = n;
        }
        if let Some(r) = params.min_ratio {
            scheme.min_ratio = r;
        }
        scheme.validate().map_err(|e| SchemeSpecError::Param {
            field: match e {
                AlternationError::MinEligible(_) => "min_eligible",
                _ => "min_ratio",
            },
            message: e.to_string(),
        })?;
        Ok(Scheme::Alternation { name, scheme })
    }

    pub fn whitemark() -> Scheme {
        Scheme::Whitemark(WhitemarkScheme::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Whitemark(_) => "whitemark",
            Scheme::Alternation { name, .. } => name,
        }
    }

    pub fn apply(&self, text: &str, registry: &Registry) -> String {
        match self {
            Scheme::Whitemark(w) => w.apply(text),
            Scheme::Alternation { scheme, .. } => scheme.apply(text, registry),
        }
    }

    pub fn detect(&self, text: &str, registry: &Registry) -> SchemeVerdict {
        match self {
            Scheme::Whitemark(w) => SchemeVerdict::Whitemark(w.detect(text)),
            Scheme::Alternation { scheme, .. } => {
                SchemeVerdict::Alternation(scheme.detect(text, registry))
            }
        }
    }

    pub fn strip(&self, text: &str, registry: &Registry) -> String {
        match self {
            Scheme::Whitemark(w) => w.strip(text),
            Scheme::Alternation { scheme, .. } => scheme.strip(text, registry),
        }
    }

    /// Every marked form present in `text`.
    pub fn annotate(&self, text: &str, registry: &Registry) -> Vec<Annotation> {
        let chars: Vec<char> = text.chars().collect();
        match self {
            Scheme::Whitemark(w) => chars
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == w.mark)
                .map(|(i, &c)| Annotation::new(i, 1, c, "mark"))
                .collect(),
            Scheme::Alternation { scheme, .. } => {
                crate::alternation::occurrences(&chars, scheme, registry)
                    .into_iter()
                    .filter(|o| o.marked)
                    .map(|o| match scheme.eligibility {
                        Eligibility::CjkVariant { .. } => {
                            Annotation::new(o.start + 1, 1, chars[o.start + 1], "selector")
                        }
                        Eligibility::Whitespace { .. } => {
                            Annotation::new(o.start, 1, chars[o.start], "mark")
                        }
                        Eligibility::Ligature => {
                            Annotation::new(o.start, 1, chars[o.start], "ligature")
                        }
                    })
                    .collect()
            }
        }
    }

    /// Whether the text already carries this scheme's marked form.
    pub fn contains_mark(&self, text: &str, registry: &Registry) -> bool {
        !self.annotate(text, registry).is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [&'static str],
}

pub fn scheme_catalog() -> Vec<SchemeInfo> {
    vec![
        SchemeInfo {
            name: "whitemark",
            description:
                "replace every base space with a look-alike space; any mark means detected",
            params: &["base", "mark"],
        },
        SchemeInfo {
            name: "variantmark",
            description:
                "append a same-glyph variation selector to every other registered ideograph",
            params: &["min_eligible", "min_ratio"],
        },
        SchemeInfo {
            name: "printmark-space",
            description: "replace every other base space with a visibly wider space",
            params: &["base", "mark", "min_eligible", "min_ratio"],
        },
        SchemeInfo {
            name: "printmark-ligature",
            description: "replace every other ff/fi/fl/ffi/ffl with its ligature",
            params: &["min_eligible", "min_ratio"],
        },
        SchemeInfo {
            name: "printmark-variant",
            description: "append a variant-glyph selector to every other registered ideograph",
            params: &["min_eligible", "min_ratio"],
        },
    ]
}

/// True when `marked` differs from `original` only by edits that do not
/// change printable content: one registered space swapped for another, a
/// registered selector appended to its base ideograph, or a plain letter
/// run replaced by its ligature.
pub fn edits_are_invisible(original: &str, marked: &str, registry: &Registry) -> bool {
    let a: Vec<char> = original.chars().collect();
    let b: Vec<char> = marked.chars().collect();
    let (mut i, mut j) = (0, 0);
    while j < b.len() {
        let bc = b[j];
        if i < a.len() && (a[i] == bc || registry.is_whitespace(a[i]) && registry.is_whitespace(bc))
        {
            i += 1;
            j += 1;
        } else if is_variation_selector(bc)
            && j > 0
            && registry
                .variant_sequences(b[j - 1])
                .iter()
                .any(|s| s.selector == Some(bc))
        {
            j += 1;
        } else if let Some(plain) = registry.ligature_plain(bc) {
            let n = plain.chars().count();
            if i + n <= a.len() && a[i..i + n].iter().copied().eq(plain.chars()) {
                i += n;
                j += 1;
            } else {
                return false;
            }
        } else {
            return false;
        }
    }
    i == a.len()
}
