use unicode_normalization::UnicodeNormalization;
use unimark::registry::{is_variation_selector, ligature_map, whitespace_codepoints, Registry};

#[test]
fn ligatures_decompose_to_their_plain_text() {
    for entry in ligature_map() {
        let nfkd: String = entry.ligature.to_string().nfkd().collect();
        assert_eq!(nfkd, entry.plain, "U+{:04X}", entry.ligature as u32);
    }
}

#[test]
fn whitespace_table_is_unicode_whitespace() {
    let table = whitespace_codepoints();
    assert_eq!(table[0].codepoint, ' ');
    for (i, e) in table.iter().enumerate() {
        assert!(e.codepoint.is_whitespace(), "{}", e.name);
        assert!(!table[..i].iter().any(|o| o.codepoint == e.codepoint));
        // No-break spaces decompose to a space with a compatibility tag.
        let nfkd: String = e.codepoint.to_string().nfkd().collect();
        if e.no_break {
            assert_eq!(nfkd, " ", "{}", e.name);
        }
    }
}

#[test]
fn variant_bases_are_ideographs_with_selectors() {
    let reg = Registry::builtin();
    let bases: Vec<char> = reg.variant_bases().collect();
    assert!(!bases.is_empty());
    for base in bases {
        assert!(
            ('\u{4E00}'..='\u{9FFF}').contains(&base),
            "U+{:04X}",
            base as u32
        );
        for seq in reg.variant_sequences(base) {
            assert_eq!(seq.base, base);
            assert!(seq.selector.is_none_or(is_variation_selector));
        }
        let same = reg.same_glyph_selector(base);
        let alt = reg.alternate_glyph_selector(base);
        assert!(same.is_some() || alt.is_some());
        assert_ne!(same, alt);
    }
}
