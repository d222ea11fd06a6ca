//! Mark a sentence, show where the marks went, then detect and strip.

use unimark::registry::Registry;
use unimark::scheme::Scheme;

fn main() {
    let reg = Registry::builtin();
    let scheme = Scheme::whitemark();
    let text = "Invisible marks ride along in ordinary spaces.";

    let marked = scheme.apply(text, reg);
    println!("original: {text:?}");
    println!("marked:   {marked:?}");
    println!(
        "looks the same: {}",
        marked.replace('\u{2004}', " ") == text
    );
    for a in scheme.annotate(&marked, reg) {
        println!("  {} at char {}", a.codepoint, a.offset);
    }

    println!(
        "detected in marked:   {}",
        scheme.detect(&marked, reg).detected()
    );
    println!(
        "detected in original: {}",
        scheme.detect(text, reg).detected()
    );
    assert_eq!(scheme.strip(&marked, reg), text);
    println!("strip restores the original");
}
