//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p unimark --test acceptance`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unimark::alternation::AlternationScheme;
use unimark::erasure::generate::random_compliant_setup;
use unimark::erasure::{
    posterior_erased_law, run_experiment, total_variation, verify_counterexample_multimodal,
    verify_counterexample_universal, EraseFailure, Ext, Mode, SetupFile,
};
use unimark::harness::{
    evaluate, evaluate_with_split, load_corpus, synthetic_corpus, Corpus, CorpusFormat, Document,
    Split,
};
use unimark::registry::Registry;
use unimark::scheme::{Scheme, SchemeParams, SCHEME_NAMES};
use unimark::stego::{
    decode, ecc_decode, ecc_encode, encode, encode_positional, CodepointAlphabet, EccCodec, Message,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    if ok {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn reg() -> &'static Registry {
    Registry::builtin()
}

/// Bundled sample documents topped up with synthetic ones to `n`.
fn mixed_corpus(n: usize) -> Corpus {
    let sample = load_corpus(&manifest().join("corpus/sample.jsonl"), CorpusFormat::Jsonl)
        .expect("sample corpus");
    let mut docs = sample.documents;
    docs.extend(synthetic_corpus(n - docs.len(), 2024).documents);
    Corpus::from_documents(docs)
}

fn whitemark_rates() -> Outcome {
    let corpus = mixed_corpus(1000);
    let clean = corpus
        .documents
        .iter()
        .all(|d| d.text.contains(' ') && !d.text.contains('\u{2004}'));
    if !clean {
        return Err("corpus precondition violated".into());
    }
    let start = Instant::now();
    let r = evaluate(&Scheme::whitemark(), &corpus, 0, reg()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        r.n_docs == 1000 && r.fnr == 0.0 && r.fpr == 0.0 && elapsed < Duration::from_secs(5),
        format!(
            "n={} FNR={} FPR={} in {:.2?}",
            r.n_docs, r.fnr, r.fpr, elapsed
        ),
    )
}

fn random_adversarial_corpus(rng: &mut ChaCha8Rng) -> Corpus {
    let pieces = ["word", " ", "\u{2004}", "x", "\u{00A0}", "\u{2009}"];
    let n = rng.random_range(1..40);
    let docs = (0..n)
        .map(|i| {
            let len = rng.random_range(0..8);
            let text: String = (0..len)
                .map(|_| pieces[rng.random_range(0..pieces.len())])
                .collect();
            Document {
                id: format!("r{i}"),
                text,
            }
        })
        .collect();
    Corpus::from_documents(docs)
}

fn detection_bounds() -> Outcome {
    let s = Scheme::whitemark();
    let mut corpus = synthetic_corpus(999, 5);
    corpus.documents.push(Document {
        id: "single-word".into(),
        text: "Danke".into(),
    });
    let r = evaluate(&s, &corpus, 0, reg()).map_err(|e| e.to_string())?;
    if !(r.fnr == 0.001 && r.false_negative_ids == ["single-word"] && r.within_detection_bounds()) {
        return Err(format!(
            "single-word corpus: FNR={} ids={:?}",
            r.fnr, r.false_negative_ids
        ));
    }

    let mut seeded = synthetic_corpus(997, 6);
    for i in 0..3 {
        seeded.documents.push(Document {
            id: format!("pre{i}"),
            text: "already\u{2004}marked text".into(),
        });
    }
    let r = evaluate(&s, &seeded, 0, reg()).map_err(|e| e.to_string())?;
    if !(r.fpr == 0.003 && r.fpr <= r.delta_fp_hat && r.within_detection_bounds()) {
        return Err(format!(
            "seeded corpus: FPR={} δ̂_FP={}",
            r.fpr, r.delta_fp_hat
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for seed in 0..300 {
        let c = random_adversarial_corpus(&mut rng);
        for split in [Split::Paired, Split::Halves] {
            let r = evaluate_with_split(&s, &c, split, seed, reg()).map_err(|e| e.to_string())?;
            if !(r.within_detection_bounds() && r.fnr <= r.delta_fn_hat && r.fpr <= r.delta_fp_hat)
            {
                return Err(format!("random corpus {seed} {split:?}: {r:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("FNR=0.1% on 1/1000 single-word docs; FPR=δ̂_FP=0.3% when seeded; bounds hold on {checked} random corpora"))
}

fn quality_invariance() -> Outcome {
    let corpus = mixed_corpus(1000);
    let r = evaluate(&Scheme::whitemark(), &corpus, 0, reg()).map_err(|e| e.to_string())?;
    if r.invariance_pass != 1.0 {
        return Err(format!("whitemark invariance {}", r.invariance_pass));
    }
    let multi = load_corpus(&manifest().join("corpus/sample.jsonl"), CorpusFormat::Jsonl)
        .map_err(|e| e.to_string())?;
    for name in SCHEME_NAMES {
        let scheme = Scheme::from_name(name, &SchemeParams::default(), reg()).expect("scheme");
        let r = evaluate(&scheme, &multi, 0, reg()).map_err(|e| e.to_string())?;
        if r.invariance_pass != 1.0 {
            return Err(format!("{name} invariance {}", r.invariance_pass));
        }
    }
    Ok(format!(
        "100% on {} whitemark docs and on {} sample docs under all {} schemes",
        corpus.len(),
        multi.len(),
        SCHEME_NAMES.len()
    ))
}

fn stego_roundtrip() -> Outcome {
    let template = "We hold these truths to be self evident that all texts are made equal";
    let start = Instant::now();
    let mut total = 0u64;
    let cps: Vec<char> = reg().whitespace_codepoints()[1..]
        .iter()
        .map(|e| e.codepoint)
        .collect();
    for p in [2u32, 3, 4, 16] {
        let alphabet =
            CodepointAlphabet::new(cps[..p as usize].to_vec()).map_err(|e| e.to_string())?;
        for m in 0..(p as u64).pow(6) {
            let msg = Message::from_u64(m, p);
            let marked = encode(template, &msg, &alphabet).map_err(|e| e.to_string())?;
            if decode(&marked, &alphabet).value_u64() != Some(m) {
                return Err(format!("p={p} m={m} failed"));
            }
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    let words = "w1 w2 w3 w4 w5 w6 w7 w8";
    let bits = [true, true, false, true, false, false, true];
    let marked = encode_positional(words, &bits, '\u{2004}').map_err(|e| e.to_string())?;
    let marked_positions: Vec<usize> = marked
        .chars()
        .filter(|&c| c == ' ' || c == '\u{2004}')
        .enumerate()
        .filter(|(_, c)| *c == '\u{2004}')
        .map(|(i, _)| i + 1)
        .collect();
    check(
        marked_positions == [1, 2, 4, 7] && elapsed < Duration::from_secs(30),
        format!("{total} messages round-tripped in {elapsed:.2?}; 1101001 marks whitespaces {marked_positions:?}"),
    )
}

fn ecc_budget() -> Outcome {
    let mut cases = 0;
    for codec in EccCodec::ALL {
        for n in 0u8..16 {
            let payload: Vec<bool> = (0..4).map(|i| n & (8 >> i) != 0).collect();
            let cw = ecc_encode(&payload, codec).map_err(|e| e.to_string())?;
            for pos in 0..cw.len() {
                let mut bad = cw.clone();
                bad[pos] = !bad[pos];
                if ecc_decode(&bad, codec).map_err(|e| e.to_string())? != payload {
                    return Err(format!("{codec} payload {n} flip {pos}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} single-flip corruptions corrected"))
}

/// Text with exactly `n` eligible occurrences for each alternation scheme.
fn eligible_text(name: &str, n: usize) -> String {
    match name {
        "printmark-space" => (0..=n)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" "),
        "printmark-ligature" => vec!["fi"; n].join("-"),
        _ => {
            let bases = ['\u{9BD6}', '\u{845B}', '\u{8FBB}', '\u{9089}'];
            (0..n)
                .map(|i| format!("{}a", bases[i % bases.len()]))
                .collect()
        }
    }
}

/// Probability that `n` independent states, each marked with probability
/// `q`, pass the detector. Sums over all 2^n state vectors.
fn exact_null_rate(scheme: &AlternationScheme, n: usize, q: f64) -> f64 {
    (0u32..1 << n)
        .map(|mask| {
            let states: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let k = states.iter().filter(|&&s| s).count() as i32;
            let p = q.powi(k) * (1.0 - q).powi(n as i32 - k);
            if scheme.verdict_from_states(&states).detected {
                p
            } else {
                0.0
            }
        })
        .sum()
}

fn monte_carlo_rate(
    scheme: &AlternationScheme,
    n: usize,
    q: f64,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut hits = 0;
    let mut states = vec![false; n];
    for _ in 0..trials {
        for s in states.iter_mut() {
            *s = rng.random_bool(q);
        }
        if scheme.verdict_from_states(&states).detected {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

fn alternation_detection() -> Outcome {
    let mut texts = 0;
    for name in SCHEME_NAMES.iter().filter(|n| **n != "whitemark") {
        let scheme = Scheme::from_name(name, &SchemeParams::default(), reg()).expect("scheme");
        for n in 4..=40 {
            let text = eligible_text(name, n);
            match scheme.detect(&scheme.apply(&text, reg()), reg()) {
                unimark::scheme::SchemeVerdict::Alternation(v)
                    if v.eligible_count == n && v.ratio == 1.0 && v.detected => {}
                other => return Err(format!("{name} n={n}: {other:?}")),
            }
            texts += 1;
        }
    }

    let scheme = AlternationScheme::printmark_whitespace();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 100_000;
    let mut worst = 0.0f64;
    for step in 1..=10 {
        let q = step as f64 * 0.05;
        let fp = monte_carlo_rate(&scheme, 20, q, trials, &mut rng);
        worst = worst.max(fp);
        if fp >= 0.01 {
            return Err(format!("n=20 q={q:.2}: false-positive rate {fp}"));
        }
    }
    let mut max_z = 0.0f64;
    for step in 1..=10 {
        let q = step as f64 * 0.05;
        let exact = exact_null_rate(&scheme, 10, q);
        let mc = monte_carlo_rate(&scheme, 10, q, trials, &mut rng);
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        let z = if se == 0.0 {
            if mc == exact {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (mc - exact).abs() / se
        };
        max_z = max_z.max(z);
        if z > 3.0 {
            return Err(format!(
                "n=10 q={q:.2}: exact {exact} vs Monte Carlo {mc} ({z:.2} SE)"
            ));
        }
    }
    Ok(format!(
        "ratio 1.0 on {texts} marked texts; worst null FP at n=20 is {:.4}%; n=10 exact vs Monte Carlo within {max_z:.2} SE",
        worst * 100.0
    ))
}

fn nearest_erasure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n_setups = 256;
    for i in 0..n_setups {
        let setup = random_compliant_setup(&mut rng);
        let r = run_experiment(&setup, Mode::Nearest).map_err(|e| format!("setup {i}: {e}"))?;
        if !(r.erase_success_prob.is_one()
            && r.loss_excess <= Ext::Finite(r.bound.clone())
            && r.passed)
        {
            return Err(format!("setup {i}: {r:?}"));
        }
    }

    let proof = verify_counterexample_multimodal().map_err(|e| e.to_string())?;
    let expected = |target: &str| -> Vec<EraseFailure> {
        match target {
            "x1" => vec![EraseFailure::InfiniteLoss {
                key: "k".into(),
                condition: "c2".into(),
                text: "x1".into(),
            }],
            "x2" => vec![EraseFailure::InfiniteLoss {
                key: "k".into(),
                condition: "c1".into(),
                text: "x2".into(),
            }],
            _ => vec![EraseFailure::StillDetected {
                key: "k".into(),
                text: "x3".into(),
                probability: "1".into(),
            }],
        }
    };
    let candidates_ok = proof.search.candidates.len() == 3
        && proof
            .search
            .candidates
            .iter()
            .all(|c| c.failures == expected(&c.mapping["x3"]));
    if !(proof.watermark_is_perfect && candidates_ok) {
        return Err(format!("multimodal: {proof:?}"));
    }

    for n in 2..=6 {
        let proof = verify_counterexample_universal(n).map_err(|e| e.to_string())?;
        let rates_ok = proof.cases.iter().all(|c| {
            c.erased_detection == "1"
                && c.marked_detection == "1"
                && if c.case == 1 {
                    c.natural_detection == "0"
                } else {
                    c.natural_detection == format!("1/{n}")
                }
        });
        if !(proof.all_fail && rates_ok && proof.cases.len() == n + 1) {
            return Err(format!("universal n={n}: {proof:?}"));
        }
    }
    Ok(format!(
        "{n_setups} generated setups erased exactly; multimodal: 3 choices each fail as listed; universal n=2..6 all fail, case 2 natural rate 1/n"
    ))
}

fn posterior_erasure() -> Outcome {
    let dir = manifest().join("setups");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let mut names = Vec::new();
    for path in &files {
        let file = SetupFile::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let law_x = file.setup.law_of_x();
        for k in 0..file.setup.keys.len() {
            let law = posterior_erased_law(&file.setup, k).map_err(|e| e.to_string())?;
            let tv = total_variation(&law, &law_x);
            if !tv.is_zero() {
                return Err(format!("{}: TV = {tv}", path.display()));
            }
        }
        names.push(file_name(path));
    }
    check(
        files.len() >= 3,
        format!("TV = 0 exactly on {}", names.join(", ")),
    )
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("whitemark detection rates", whitemark_rates),
        ("detection-rate bounds", detection_bounds),
        ("quality invariance", quality_invariance),
        ("steganography exhaustive roundtrip", stego_roundtrip),
        ("ECC correction budget", ecc_budget),
        ("alternation detection", alternation_detection),
        ("nearest-support erasure", nearest_erasure),
        ("posterior erasure marginal", posterior_erasure),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
