//! Hide a payload in whitespace three ways: binary digits, base-16 digits,
//! and positional bits with error correction that survives a flipped bit.

use unimark::stego::{parse_payload, CodepointAlphabet, EccCodec, StegoProfile};

const COVER: &str =
    "It was the best of times, it was the worst of times, it was the age of wisdom, \
it was the age of foolishness, it was the epoch of belief, it was the epoch of incredulity, \
it was the season of light, it was the season of darkness";

fn main() {
    let payload = parse_payload("0xbeef").unwrap();

    let binary = StegoProfile::alphabet(CodepointAlphabet::default(), None).unwrap();
    let marked = binary.embed(COVER, &payload).unwrap();
    let out = binary.extract(&marked, Some(16)).unwrap();
    println!(
        "binary alphabet: {} digits, recovered {}",
        out.digits.len(),
        out.hex
    );

    let sixteen = CodepointAlphabet::parse(
        "U+2000,U+2001,U+2002,U+2003,U+2004,U+2005,U+2006,U+2007,\
         U+2008,U+2009,U+200A,U+202F,U+205F,U+3000,U+00A0,U+1680",
    )
    .unwrap();
    let hex = StegoProfile::alphabet(sixteen, None).unwrap();
    let marked = hex.embed(COVER, &payload).unwrap();
    let out = hex.extract(&marked, None).unwrap();
    println!(
        "base-16 alphabet: {} digits {:?}, recovered {}",
        out.digits.len(),
        out.digits,
        out.hex
    );

    let robust = StegoProfile::positional('\u{2004}', Some(EccCodec::Hamming74)).unwrap();
    let marked = robust.embed(COVER, &payload).unwrap();
    // Flip the first whitespace: a single error inside one Hamming block.
    let damaged: String = {
        let mut flipped = false;
        marked
            .chars()
            .map(|c| match c {
                ' ' | '\u{2004}' if !flipped => {
                    flipped = true;
                    if c == ' ' {
                        '\u{2004}'
                    } else {
                        ' '
                    }
                }
                c => c,
            })
            .collect()
    };
    let out = robust.extract(&damaged, Some(16)).unwrap();
    println!(
        "positional + hamming74 after one flip: recovered {}",
        out.hex
    );
}
