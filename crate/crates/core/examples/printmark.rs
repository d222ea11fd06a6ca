//! The three print-oriented alternation schemes on one document each.

use unimark::registry::Registry;
use unimark::scheme::{Scheme, SchemeParams};

fn main() {
    let reg = Registry::builtin();
    let samples = [
        (
            "printmark-space",
            "print the page and the marks are still on paper for anyone",
        ),
        (
            "printmark-ligature",
            "the office filed five final fixes for the flawed offer",
        ),
        (
            "printmark-variant",
            "葛飾の辻で鯖を買い、邉さんと葛湯を飲んだ。",
        ),
    ];
    for (name, text) in samples {
        let scheme = Scheme::from_name(name, &SchemeParams::default(), reg).unwrap();
        let marked = scheme.apply(text, reg);
        let verdict = scheme.detect(&marked, reg);
        println!("{name}");
        println!("  edits:    {}", scheme.annotate(&marked, reg).len());
        println!("  verdict:  {}", serde_json::to_string(&verdict).unwrap());
        println!(
            "  original: {}",
            serde_json::to_string(&scheme.detect(text, reg)).unwrap()
        );
        assert_eq!(scheme.strip(&marked, reg), text);
    }
}
