//! Detection rates on the bundled sample plus a single-word document that
//! cannot be marked.

use std::path::Path;

use unimark::harness::{emit_report, evaluate, load_corpus, CorpusFormat, Document, ReportFormat};
use unimark::registry::Registry;
use unimark::scheme::Scheme;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/sample.jsonl");
    let mut corpus = load_corpus(&path, CorpusFormat::Jsonl).unwrap();
    corpus.documents.push(Document {
        id: "one-word".into(),
        text: "Hello".into(),
    });
    let report = evaluate(&Scheme::whitemark(), &corpus, 7, Registry::builtin()).unwrap();
    print!("{}", emit_report(&report, ReportFormat::Markdown));
    println!("within bounds: {}", report.within_detection_bounds());
}
