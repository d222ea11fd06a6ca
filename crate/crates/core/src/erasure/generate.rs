//! Random setups that meet every nearest-mode assumption by construction.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::{support_of, ErasureSetup, Ext, Rational, TextSpace};

pub const MAX_TEXTS: usize = 8;

/// Texts are distinct points on a small integer grid under the L1 metric.
/// Each condition's loss is a minimum of shifted distance cones, so it is
/// 1-Lipschitz. Detection is false on the generator's support and random
/// elsewhere; epsilon, epsilon' and delta are the tightest values the
/// setup satisfies.
pub fn random_compliant_setup<R: Rng + ?Sized>(rng: &mut R) -> ErasureSetup {
    let n = rng.random_range(2..=MAX_TEXTS);
    let mut points: Vec<(i64, i64)> = Vec::with_capacity(n);
    while points.len() < n {
        let p = (rng.random_range(0..6), rng.random_range(0..6));
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let metric: Vec<Vec<Ext>> = points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| Ext::int((a.0 - b.0).abs() + (a.1 - b.1).abs()))
                .collect()
        })
        .collect();
    let space = TextSpace::new(names, metric).expect("L1 is a metric");

    let n_conditions = rng.random_range(1..=4);
    let weights: Vec<i64> = (0..n_conditions).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    let condition_probs = weights
        .iter()
        .map(|&w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect();

    let texts: Vec<usize> = (0..n).collect();
    let loss_columns: Vec<Vec<Ext>> = (0..n_conditions)
        .map(|_| {
            let anchors: Vec<(usize, i64)> = (0..rng.random_range(1..=2))
                .map(|_| {
                    (
                        *texts.choose(rng).expect("non-empty"),
                        rng.random_range(0..=3),
                    )
                })
                .collect();
            (0..n)
                .map(|x| {
                    anchors
                        .iter()
                        .map(|&(a, off)| {
                            space
                                .distance(x, a)
                                .checked_add(&Ext::int(off))
                                .expect("finite")
                        })
                        .min()
                        .expect("non-empty")
                })
                .collect()
        })
        .collect();
    let loss = (0..n)
        .map(|x| loss_columns.iter().map(|col| col[x].clone()).collect())
        .collect();

    let n_keys = rng.random_range(1..=2);
    let generator: Vec<usize> = (0..n_conditions).map(|_| rng.random_range(0..n)).collect();
    let watermarker: Vec<Vec<usize>> = (0..n_keys)
        .map(|_| (0..n_conditions).map(|_| rng.random_range(0..n)).collect())
        .collect();

    let mut setup = ErasureSetup {
        space,
        conditions: (0..n_conditions).map(|c| format!("c{c}")).collect(),
        condition_probs,
        keys: (0..n_keys).map(|k| format!("k{k}")).collect(),
        generator,
        watermarker,
        loss,
        detect: vec![vec![false; n]; n_keys],
        epsilon: Rational::zero(),
        epsilon_prime: Rational::zero(),
        delta: Rational::zero(),
    };
    let support = support_of(&setup);
    for row in &mut setup.detect {
        for (x, d) in row.iter_mut().enumerate() {
            *d = !support.contains(&x) && rng.random_bool(0.8);
        }
    }

    let mut eps = Rational::zero();
    let mut eps_prime = Rational::zero();
    let mut delta = Rational::zero();
    for k in 0..n_keys {
        if let Ext::Finite(e) = setup.watermark_loss_excess(k).expect("finite losses") {
            eps = eps.max(e);
        }
        if let Ext::Finite(d) = setup.expected_distance(k) {
            eps_prime = eps_prime.max(d);
        }
        delta = delta.max(Rational::one() - setup.marked_detection_rate(k));
    }
    setup.epsilon = eps;
    setup.epsilon_prime = eps_prime;
    setup.delta = delta;
    setup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::{erase_nearest, run_experiment, Mode};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn generated_setups_are_compliant_and_erasable(seed in any::<u64>()) {
            let setup = random_compliant_setup(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(setup.space.len() <= MAX_TEXTS);
            prop_assert!(setup.violations(Mode::Nearest).unwrap().is_empty());
            let report = run_experiment(&setup, Mode::Nearest).unwrap();
            prop_assert!(report.erase_success_prob.is_one());
            prop_assert!(report.loss_excess <= Ext::Finite(report.bound.clone()));
            prop_assert!(report.passed);
        }

        #[test]
        fn posterior_marginal_equals_law_of_x(seed in any::<u64>()) {
            let setup = random_compliant_setup(&mut ChaCha8Rng::seed_from_u64(seed));
            let report = run_experiment(&setup, Mode::Posterior).unwrap();
            for k in &report.per_key {
                prop_assert!(k.marginal_tv.as_ref().unwrap().is_zero());
            }
        }

        #[test]
        fn nearest_ignores_keys_and_detectors(seed in any::<u64>()) {
            // erase_nearest sees only (x, support, metric): swapping the
            // detector or watermark leaves every output unchanged
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_compliant_setup(&mut rng);
            let mut b = a.clone();
            for row in &mut b.detect {
                for d in row.iter_mut() {
                    *d = !*d;
                }
            }
            b.watermarker.reverse();
            let support = support_of(&a);
            prop_assert_eq!(&support, &support_of(&b));
            for x in 0..a.space.len() {
                prop_assert_eq!(erase_nearest(x, &support, &a.space), erase_nearest(x, &support, &b.space));
            }
        }
    }
}
