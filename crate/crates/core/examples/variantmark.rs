//! Alternate between two selectors that render the same glyph on CJK
//! ideographs, then detect the alternation.

use unimark::alternation::AlternationScheme;
use unimark::registry::Registry;

fn main() {
    let reg = Registry::builtin();
    let scheme = AlternationScheme::variantmark();
    let text = "鯖と葛と辻と邉、また鯖と葛と辻と邉。";

    let marked = scheme.apply(text, reg);
    let selectors: Vec<String> = marked
        .chars()
        .filter(|c| unimark::registry::is_variation_selector(*c))
        .map(unimark::registry::format_codepoint)
        .collect();
    println!("selectors inserted: {}", selectors.join(" "));

    let v = scheme.detect(&marked, reg);
    println!(
        "marked:   eligible={} pairs={} ratio={:.2} detected={}",
        v.eligible_count, v.alternating_pairs, v.ratio, v.detected
    );
    let v = scheme.detect(text, reg);
    println!(
        "original: eligible={} ratio={:.2} detected={}",
        v.eligible_count, v.ratio, v.detected
    );
    assert_eq!(scheme.strip(&marked, reg), text);
}
