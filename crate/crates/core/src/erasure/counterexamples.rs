//! Setups where a deterministic eraser cannot exist.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{
    format_rational, posterior_erased_law, search_erasers, EraserSearch, ErasureError,
    ErasureSetup, Ext, Rational, TextSpace, Violation,
};

fn frac(n: usize, d: usize) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Three texts, two conditions. Every good answer for one condition is
/// useless for the other, and the watermarked text is good for both but
/// far from either.
pub fn multimodal_setup() -> ErasureSetup {
    let inf = Ext::PosInf;
    let zero = Ext::zero();
    let names = vec!["x1".to_string(), "x2".to_string(), "x3".to_string()];
    let metric = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| if i == j { zero.clone() } else { inf.clone() })
                .collect()
        })
        .collect();
    ErasureSetup {
        space: TextSpace::new(names, metric).expect("discrete infinite metric"),
        conditions: vec!["c1".into(), "c2".into()],
        condition_probs: vec![frac(1, 2), frac(1, 2)],
        keys: vec!["k".into()],
        generator: vec![0, 1],
        watermarker: vec![vec![2, 2]],
        loss: vec![
            vec![zero.clone(), inf.clone()],
            vec![inf, zero.clone()],
            vec![zero.clone(), zero],
        ],
        detect: vec![vec![false, false, true]],
        epsilon: Rational::one(),
        epsilon_prime: Rational::one(),
        delta: Rational::zero(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultimodalProof {
    /// Loss is unchanged by the watermark and detection is exact.
    pub watermark_is_perfect: bool,
    /// Assumptions of the nearest-mode guarantee that fail; only closeness.
    pub assumption_violations: Vec<Violation>,
    pub search: EraserSearch,
}

pub fn verify_counterexample_multimodal() -> Result<MultimodalProof, ErasureError> {
    let setup = multimodal_setup();
    let excess = setup.watermark_loss_excess(0)?;
    let watermark_is_perfect = excess == Ext::zero()
        && setup.marked_detection_rate(0).is_one()
        && setup.natural_detection_rate(0).is_zero();
    let search = search_erasers(&setup)?;
    Ok(MultimodalProof {
        watermark_is_perfect,
        assumption_violations: search.assumption_violations.clone(),
        search,
    })
}

/// Texts `0..=n`, conditions `1..=n`, `f(c) = c`, zero loss, the watermark
/// always emits `0`, and the detector flags `0` plus `erase_zero` when that
/// is nonzero.
pub fn universal_setup(n: usize, erase_zero: usize) -> Result<ErasureSetup, ErasureError> {
    if n < 2 {
        return Err(ErasureError::TooSmall(n));
    }
    if erase_zero > n {
        return Err(ErasureError::Malformed(format!(
            "Erase(0) = {erase_zero} is outside 0..={n}"
        )));
    }
    let names: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let metric = (0..=n)
        .map(|i| (0..=n).map(|j| Ext::int((i != j) as i64)).collect())
        .collect();
    let detect = (0..=n).map(|x| x == 0 || x == erase_zero).collect();
    let delta = if erase_zero == 0 {
        Rational::zero()
    } else {
        frac(1, n)
    };
    Ok(ErasureSetup {
        space: TextSpace::new(names, metric)?,
        conditions: (1..=n).map(|c| format!("c{c}")).collect(),
        condition_probs: vec![frac(1, n); n],
        keys: vec!["k".into()],
        generator: (1..=n).collect(),
        watermarker: vec![vec![0; n]],
        loss: vec![vec![Ext::zero(); n]; n + 1],
        detect: vec![detect],
        epsilon: Rational::zero(),
        epsilon_prime: Rational::one(),
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalCase {
    pub erase_zero: usize,
    /// 1 when `Erase(0) = 0`, else 2.
    pub case: u8,
    pub natural_detection: String,
    pub marked_detection: String,
    pub erased_detection: String,
    /// Success of the posterior eraser on the same adversarial setup.
    pub posterior_success: String,
    pub posterior_required: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalProof {
    pub n: usize,
    pub cases: Vec<UniversalCase>,
    /// Every choice of `Erase(0)` leaves the watermark detected.
    pub all_fail: bool,
    pub posterior_always_succeeds: bool,
}

/// Runs every value of `Erase(0)` against its adversarial detector.
pub fn verify_counterexample_universal(n: usize) -> Result<UniversalProof, ErasureError> {
    let mut cases = Vec::with_capacity(n + 1);
    let mut all_fail = true;
    let mut posterior_ok = true;
    for e in 0..=n {
        let setup = universal_setup(n, e)?;
        // X_k = 0 surely, so Erase(X_k) = e surely.
        let erased: Rational = if setup.detect[0][e] {
            Rational::one()
        } else {
            Rational::zero()
        };
        all_fail &= erased.is_one();
        let law = posterior_erased_law(&setup, 0)?;
        let success: Rational = law
            .iter()
            .enumerate()
            .filter(|(x, _)| !setup.detect[0][*x])
            .map(|(_, p)| p)
            .sum();
        let required = Rational::one() - &setup.delta;
        posterior_ok &= success >= required;
        cases.push(UniversalCase {
            erase_zero: e,
            case: if e == 0 { 1 } else { 2 },
            natural_detection: format_rational(&setup.natural_detection_rate(0)),
            marked_detection: format_rational(&setup.marked_detection_rate(0)),
            erased_detection: format_rational(&erased),
            posterior_success: format_rational(&success),
            posterior_required: format_rational(&required),
        });
    }
    Ok(UniversalProof {
        n,
        cases,
        all_fail,
        posterior_always_succeeds: posterior_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::{run_experiment, support_of, Condition, EraseFailure, Mode};

    #[test]
    fn multimodal_support() {
        assert_eq!(support_of(&multimodal_setup()), vec![0, 1]);
    }

    #[test]
    fn multimodal_rejected_in_nearest_mode() {
        match run_experiment(&multimodal_setup(), Mode::Nearest) {
            Err(ErasureError::SetupInvalid(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].condition, Condition::MetricCloseness);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multimodal_each_choice_fails_once() {
        let proof = verify_counterexample_multimodal().unwrap();
        assert!(proof.watermark_is_perfect);
        assert!(proof.search.all_fail);
        assert_eq!(proof.search.candidates.len(), 3);
        let by_target = |t: &str| {
            proof
                .search
                .candidates
                .iter()
                .find(|c| c.mapping["x3"] == t)
                .unwrap()
                .failures
                .clone()
        };
        assert_eq!(
            by_target("x1"),
            vec![EraseFailure::InfiniteLoss {
                key: "k".into(),
                condition: "c2".into(),
                text: "x1".into()
            }]
        );
        assert_eq!(
            by_target("x2"),
            vec![EraseFailure::InfiniteLoss {
                key: "k".into(),
                condition: "c1".into(),
                text: "x2".into()
            }]
        );
        assert_eq!(
            by_target("x3"),
            vec![EraseFailure::StillDetected {
                key: "k".into(),
                text: "x3".into(),
                probability: "1".into()
            }]
        );
    }

    #[test]
    fn universal_n5() {
        let proof = verify_counterexample_universal(5).unwrap();
        assert!(proof.all_fail);
        assert!(proof.posterior_always_succeeds);
        let c1 = &proof.cases[0];
        assert_eq!(
            (
                c1.case,
                c1.natural_detection.as_str(),
                c1.erased_detection.as_str()
            ),
            (1, "0", "1")
        );
        let c2 = &proof.cases[3];
        assert_eq!(
            (
                c2.case,
                c2.natural_detection.as_str(),
                c2.erased_detection.as_str()
            ),
            (2, "1/5", "1")
        );
        assert_eq!(c2.posterior_success, "4/5");
    }

    #[test]
    fn universal_n2_all_fail() {
        let proof = verify_counterexample_universal(2).unwrap();
        assert_eq!(proof.cases.len(), 3);
        assert!(proof.all_fail);
        assert!(proof.cases.iter().all(|c| c.marked_detection == "1"));
    }

    #[test]
    fn universal_setups_are_posterior_compliant() {
        for n in 2..=4 {
            for e in 0..=n {
                let s = universal_setup(n, e).unwrap();
                let report = run_experiment(&s, Mode::Posterior).unwrap();
                assert!(report.passed, "n={n} e={e}");
            }
        }
        assert!(matches!(
            universal_setup(1, 0),
            Err(ErasureError::TooSmall(1))
        ));
    }
}
