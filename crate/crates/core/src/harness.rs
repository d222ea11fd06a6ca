//! Corpus-level detection rates and invariance checks.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::Registry;
use crate::scheme::{edits_are_invisible, Scheme};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("corpus is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// A document that could not be loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadWarning {
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub source: PathBuf,
    pub warnings: Vec<LoadWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    TxtDir,
    Jsonl,
}

impl CorpusFormat {
    /// Directories hold `.txt` files; anything else is JSON lines.
    pub fn infer(path: &Path) -> CorpusFormat {
        if path.is_dir() {
            CorpusFormat::TxtDir
        } else {
            CorpusFormat::Jsonl
        }
    }
}

impl Corpus {
    pub fn from_documents(documents: Vec<Document>) -> Corpus {
        Corpus {
            documents,
            ..Corpus::default()
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlDoc {
    id: String,
    text: String,
}

/// Loads documents without any normalization. Files or lines that are not
/// valid UTF-8 are skipped and recorded in `warnings`.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, HarnessError> {
    let mut corpus = Corpus {
        source: path.to_path_buf(),
        ..Corpus::default()
    };
    match format {
        CorpusFormat::TxtDir => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(io_err(path))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()
                .map_err(io_err(path))?;
            files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"));
            files.sort();
            for file in files {
                let bytes = std::fs::read(&file).map_err(io_err(&file))?;
                let id = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                match String::from_utf8(bytes) {
                    Ok(text) => corpus.documents.push(Document { id, text }),
                    Err(e) => corpus.warnings.push(LoadWarning {
                        location: file.display().to_string(),
                        message: format!("invalid UTF-8: {}", e.utf8_error()),
                    }),
                }
            }
        }
        CorpusFormat::Jsonl => {
            let bytes = std::fs::read(path).map_err(io_err(path))?;
            let mut seen = HashSet::new();
            for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
                let line = idx + 1;
                let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
                let text = match std::str::from_utf8(raw) {
                    Ok(t) => t,
                    Err(e) => {
                        corpus.warnings.push(LoadWarning {
                            location: format!("{}:{line}", path.display()),
                            message: format!("invalid UTF-8: {e}"),
                        });
                        continue;
                    }
                };
                if text.trim().is_empty() {
                    continue;
                }
                let doc: JsonlDoc =
                    serde_json::from_str(text).map_err(|e| HarnessError::Format {
                        path: path.display().to_string(),
                        line,
                        message: e.to_string(),
                    })?;
                if !seen.insert(doc.id.clone()) {
                    return Err(HarnessError::Format {
                        path: path.display().to_string(),
                        line,
                        message: format!("duplicate id {:?}", doc.id),
                    });
                }
                corpus.documents.push(Document {
                    id: doc.id,
                    text: doc.text,
                });
            }
        }
    }
    Ok(corpus)
}

const WORDS: &[&str] = &[
    "the",
    "model",
    "writes",
    "a",
    "short",
    "answer",
    "about",
    "river",
    "boats",
    "and",
    "quiet",
    "harbors",
    "every",
    "morning",
    "students",
    "read",
    "essays",
    "on",
    "history",
    "while",
    "teachers",
    "check",
    "drafts",
    "for",
    "clear",
    "structure",
    "translation",
    "keeps",
    "meaning",
    "intact",
    "across",
    "languages",
    "weather",
    "turned",
    "cold",
    "after",
    "rain",
    "markets",
    "opened",
    "late",
    "council",
    "approved",
    "new",
    "budget",
    "library",
    "extends",
    "hours",
];

/// Deterministic pseudo-English documents with at least two words each.
pub fn synthetic_corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let documents = (0..n)
        .map(|i| {
            let sentences = rng.random_range(1..=3);
            let mut text = String::new();
            for s in 0..sentences {
                if s > 0 {
                    text.push(' ');
                }
                let len = rng.random_range(2..=14);
                let words: Vec<&str> = (0..len)
                    .map(|_| WORDS[rng.random_range(0..WORDS.len())])
                    .collect();
                let mut sentence = words.join(" ");
                if let Some(first) = sentence.get_mut(0..1) {
                    first.make_ascii_uppercase();
                }
                sentence.push('.');
                text.push_str(&sentence);
            }
            Document {
                id: format!("syn-{i:05}"),
                text,
            }
        })
        .collect();
    Corpus::from_documents(documents)
}

/// How documents are assigned to the marked and unmarked arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Every document appears in both arms: marked for the false-negative
    /// count, as-is for the false-positive count.
    #[default]
    Paired,
    /// A seeded shuffle puts half the documents in each arm.
    Halves,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: String,
    pub n_docs: usize,
    pub split: Split,
    pub seed: u64,
    pub n_marked: usize,
    pub n_unmarked: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    /// Share of marked documents not detected.
    pub fnr: f64,
    /// Share of unmarked documents detected.
    pub fpr: f64,
    /// Unmarked-arm documents that already contain a marked form.
    pub premarked_count: usize,
    /// Marked-arm documents with nothing the scheme can mark.
    pub unmarkable_count: usize,
    pub delta_fp_hat: f64,
    pub delta_fn_hat: f64,
    /// Share of documents with `strip(apply(x)) == x` and only invisible edits.
    pub invariance_pass: f64,
    pub false_negative_ids: Vec<String>,
    pub false_positive_ids: Vec<String>,
    /// Documents that contained a marked form before marking.
    pub premarked_ids: Vec<String>,
}

impl EvalReport {
    /// `fnr <= delta_fn_hat` and `fpr <= delta_fp_hat`, compared as exact
    /// counts over the same denominators.
    pub fn within_detection_bounds(&self) -> bool {
        self.false_negatives <= self.unmarkable_count
            && self.false_positives <= self.premarked_count
    }
}

/// `strip(apply(x)) == x` and every edit made by `apply` is invisible.
pub fn quality_invariance_check(original: &str, scheme: &Scheme, registry: &Registry) -> bool {
    let marked = scheme.apply(original, registry);
    scheme.strip(&marked, registry) == original && edits_are_invisible(original, &marked, registry)
}

fn has_markable(scheme: &Scheme, text: &str, registry: &Registry) -> bool {
    match scheme {
        Scheme::Whitemark(w) => text.contains(w.base) || text.contains(w.mark),
        Scheme::Alternation { scheme, .. } => {
            let chars: Vec<char> = text.chars().collect();
            crate::alternation::occurrences(&chars, scheme, registry).len() >= scheme.min_eligible
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Runs the detection protocol over `corpus`. Deterministic in `seed`.
pub fn evaluate(
    scheme: &Scheme,
    corpus: &Corpus,
    seed: u64,
    registry: &Registry,
) -> Result<EvalReport, HarnessError> {
    evaluate_with_split(scheme, corpus, Split::Paired, seed, registry)
}

pub fn evaluate_with_split(
    scheme: &Scheme,
    corpus: &Corpus,
    split: Split,
    seed: u64,
    registry: &Registry,
) -> Result<EvalReport, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::Empty);
    }
    let n = corpus.len();
    let (marked_arm, unmarked_arm): (Vec<usize>, Vec<usize>) = match split {
        Split::Paired => ((0..n).collect(), (0..n).collect()),
        Split::Halves => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let (a, b) = order.split_at(n.div_ceil(2));
            let (mut a, mut b) = (a.to_vec(), b.to_vec());
            a.sort_unstable();
            b.sort_unstable();
            (a, b)
        }
    };

    let docs = &corpus.documents;
    let mut false_negative_ids = Vec::new();
    let mut unmarkable_count = 0;
    for &i in &marked_arm {
        let doc = &docs[i];
        if !has_markable(scheme, &doc.text, registry) {
            unmarkable_count += 1;
        }
        if !scheme
            .detect(&scheme.apply(&doc.text, registry), registry)
            .detected()
        {
            false_negative_ids.push(doc.id.clone());
        }
    }
    let mut false_positive_ids = Vec::new();
    let mut premarked_count = 0;
    for &i in &unmarked_arm {
        let doc = &docs[i];
        if scheme.contains_mark(&doc.text, registry) {
            premarked_count += 1;
        }
        if scheme.detect(&doc.text, registry).detected() {
            false_positive_ids.push(doc.id.clone());
        }
    }
    let premarked_ids = docs
        .iter()
        .filter(|d| scheme.contains_mark(&d.text, registry))
        .map(|d| d.id.clone())
        .collect();
    let invariant = docs
        .iter()
        .filter(|d| quality_invariance_check(&d.text, scheme, registry))
        .count();

    Ok(EvalReport {
        scheme: scheme.name().to_string(),
        n_docs: n,
        split,
        seed,
        n_marked: marked_arm.len(),
        n_unmarked: unmarked_arm.len(),
        false_negatives: false_negative_ids.len(),
        false_positives: false_positive_ids.len(),
        fnr: ratio(false_negative_ids.len(), marked_arm.len()),
        fpr: ratio(false_positive_ids.len(), unmarked_arm.len()),
        premarked_count,
        unmarkable_count,
        delta_fp_hat: ratio(premarked_count, unmarked_arm.len()),
        delta_fn_hat: ratio(unmarkable_count, marked_arm.len()),
        invariance_pass: ratio(invariant, n),
        false_negative_ids,
        false_positive_ids,
        premarked_ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Markdown,
}

fn pct(x: f64) -> String {
    format!("{:.1} %", x * 100.0)
}

pub fn emit_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str("| Method | BLEU | FNR | FPR |\n|---|---|---|---|\n");
            let _ = writeln!(
                out,
                "| {} | n/a (out of scope) | {} | {} |",
                report.scheme,
                pct(report.fnr),
                pct(report.fpr)
            );
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{} documents ({:?} split, seed {}). δ̂_FN = {}, δ̂_FP = {}, invariance {}.",
                report.n_docs,
                report.split,
                report.seed,
                pct(report.delta_fn_hat),
                pct(report.delta_fp_hat),
                pct(report.invariance_pass)
            );
            if !report.false_negative_ids.is_empty() {
                let _ = writeln!(
                    out,
                    "\nFalse negatives: {}",
                    report.false_negative_ids.join(", ")
                );
            }
            if !report.false_positive_ids.is_empty() {
                let _ = writeln!(
                    out,
                    "\nFalse positives: {}",
                    report.false_positive_ids.join(", ")
                );
            }
            if !report.premarked_ids.is_empty() {
                let _ = writeln!(
                    out,
                    "\nWarning: already marked before evaluation: {}",
                    report.premarked_ids.join(", ")
                );
            }
            out
        }
    }
}
