//! Exact, enumerable model of universal watermark erasure.
//!
//! A setup is a finite text space with a metric, a distribution over
//! conditions (prompts), a generator `f`, a watermarker `g` per key, a loss
//! and a detector per key. Two erasers are provided:
//!
//! * [`erase_nearest`] maps a text to the closest text the generator can
//!   emit. It sees only the text, the support and the metric.
//! * [`erase_posterior`] resamples from `Pr[X = . | X_k = x]`, which also
//!   depends on the law of the watermarked text.
//!
//! All probabilities and expectations are exact rationals; losses and
//! distances may be `+inf`.

mod counterexamples;
pub mod ext;
mod file;
pub mod generate;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use counterexamples::{
    multimodal_setup, universal_setup, verify_counterexample_multimodal,
    verify_counterexample_universal, MultimodalProof, UniversalCase, UniversalProof,
};
pub use ext::{format_rational, parse_ext, parse_rational, Ext, Rational};
pub use file::{SetupFile, SimMode, Simulation};

/// Largest number of candidate erasers [`search_erasers`] will enumerate.
pub const MAX_ERASER_CHOICES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErasureError {
    #[error("malformed setup: {0}")]
    Malformed(String),
    #[error("invalid metric: {0}")]
    Metric(String),
    #[error("setup violates its assumptions: {}", join_violations(.0))]
    SetupInvalid(Vec<Violation>),
    #[error("Pr[X_k = {text}] = 0 under key {key}; the posterior is undefined")]
    UndefinedConditional { text: String, key: String },
    #[error("loss expectation is undefined (inf - inf) under key {0}")]
    UndefinedExpectation(String),
    #[error("{0} candidate erasers exceed the enumeration limit")]
    TooManyErasers(String),
    #[error("n must be at least 2, got {0}")]
    TooSmall(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Assumptions a setup must meet before an eraser is guaranteed to work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `|L(x,c) - L(x',c)| <= d(x,x')` for all texts and conditions.
    Lipschitz,
    /// `E[L(X_k,C) - L(X,C)] <= epsilon`.
    LossBudget,
    /// `Pr[Detect(X_k,k) = True] >= 1 - delta`.
    MarkedDetection,
    /// `Pr[Detect(X,k) = False] = 1` (nearest) or `>= 1 - delta` (posterior).
    UnmarkedDetection,
    /// `E[d(X, X_k)] <= epsilon'`.
    MetricCloseness,
}

impl Condition {
    pub fn describe(self) -> &'static str {
        match self {
            Condition::Lipschitz => "loss is 1-Lipschitz in the text",
            Condition::LossBudget => "E[L(X_k,C) - L(X,C)] <= epsilon",
            Condition::MarkedDetection => "Pr[Detect(X_k,k) = True] >= 1 - delta",
            Condition::UnmarkedDetection => "unmarked texts are not detected",
            Condition::MetricCloseness => "E[d(X, X_k)] <= epsilon'",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.condition)?;
        if let Some(k) = &self.key {
            write!(f, " [key {k}]")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Finite set of named texts with a (pseudo)metric.
#[derive(Debug, Clone, PartialEq)]
pub struct TextSpace {
    names: Vec<String>,
    metric: Vec<Vec<Ext>>,
}

impl TextSpace {
    /// Checks non-negativity, `d(x,x) = 0`, symmetry and the triangle
    /// inequality over every triple.
    pub fn new(names: Vec<String>, metric: Vec<Vec<Ext>>) -> Result<Self, ErasureError> {
        let n = names.len();
        if n == 0 {
            return Err(ErasureError::Malformed("text space is empty".into()));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(ErasureError::Malformed(format!("duplicate text {a:?}")));
            }
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(ErasureError::Metric(format!("metric must be {n}x{n}")));
        }
        let zero = Ext::zero();
        for i in 0..n {
            if metric[i][i] != zero {
                return Err(ErasureError::Metric(format!(
                    "d({0}, {0}) = {1}",
                    names[i], metric[i][i]
                )));
            }
            for j in 0..n {
                let d = &metric[i][j];
                if *d < zero {
                    return Err(ErasureError::Metric(format!(
                        "d({}, {}) is negative",
                        names[i], names[j]
                    )));
                }
                if *d != metric[j][i] {
                    return Err(ErasureError::Metric(format!(
                        "d({}, {}) is not symmetric",
                        names[i], names[j]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = metric[i][k]
                        .checked_add(&metric[k][j])
                        .expect("distances are non-negative");
                    if metric[i][j] > via {
                        return Err(ErasureError::Metric(format!(
                            "triangle inequality fails: d({a}, {c}) > d({a}, {b}) + d({b}, {c})",
                            a = names[i],
                            b = names[k],
                            c = names[j]
                        )));
                    }
                }
            }
        }
        Ok(TextSpace { names, metric })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn distance(&self, a: usize, b: usize) -> &Ext {
        &self.metric[a][b]
    }

    pub fn metric(&self) -> &[Vec<Ext>] {
        &self.metric
    }
}

/// Outcome of [`check_lipschitz`]; `witness` is `(x, x', c)` when it fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LipschitzCheck {
    pub holds: bool,
    pub witness: Option<(usize, usize, usize)>,
}

/// `|L(x,c) - L(x',c)| <= d(x,x')` for every pair and condition. Two
/// infinite losses count as equal; exactly one infinite loss is a violation
/// unless the distance is infinite too.
pub fn check_lipschitz(
    loss: &[Vec<Ext>],
    space: &TextSpace,
    n_conditions: usize,
) -> LipschitzCheck {
    let n = space.len();
    #[allow(clippy::needless_range_loop)]
    for c in 0..n_conditions {
        for x in 0..n {
            for y in (x + 1)..n {
                let d = space.distance(x, y);
                let ok = match (&loss[x][c], &loss[y][c]) {
                    (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite((a - b).abs()) <= *d,
                    (a, b) if a == b => true,
                    _ => d.is_infinite(),
                };
                if !ok {
                    return LipschitzCheck {
                        holds: false,
                        witness: Some((x, y, c)),
                    };
                }
            }
        }
    }
    LipschitzCheck {
        holds: true,
        witness: None,
    }
}

/// Which detection assumption on unmarked text applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Unmarked text is never detected; eraser is [`erase_nearest`].
    Nearest,
    /// Unmarked text is detected with probability at most delta; eraser is
    /// [`erase_posterior`].
    Posterior,
}

#[derive(Debug, Clone)]
pub struct ErasureSetup {
    pub space: TextSpace,
    pub conditions: Vec<String>,
    pub condition_probs: Vec<Rational>,
    pub keys: Vec<String>,
    /// `generator[c]`: text emitted for condition `c`.
    pub generator: Vec<usize>,
    /// `watermarker[k][c]`: watermarked text under key `k`.
    pub watermarker: Vec<Vec<usize>>,
    /// `loss[x][c]`, finite or `+inf`.
    pub loss: Vec<Vec<Ext>>,
    /// `detect[k][x]`.
    pub detect: Vec<Vec<bool>>,
    pub epsilon: Rational,
    pub epsilon_prime: Rational,
    pub delta: Rational,
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, ErasureError> {
    Err(ErasureError::Malformed(msg.into()))
}

/// Law of a text-valued random variable, indexed by text.
pub type Law = Vec<Rational>;

impl ErasureSetup {
    /// Checks shapes and probability axioms. Modelling assumptions are
    /// checked separately by [`ErasureSetup::violations`].
    pub fn validate_structure(&self) -> Result<(), ErasureError> {
        let n = self.space.len();
        let nc = self.conditions.len();
        let nk = self.keys.len();
        if nc == 0 {
            return malformed("no conditions");
        }
        if nk == 0 {
            return malformed("no keys");
        }
        if self.condition_probs.len() != nc || self.generator.len() != nc {
            return malformed("condition probabilities and generator need one entry per condition");
        }
        if self.condition_probs.iter().any(|p| p.is_negative()) {
            return malformed("negative condition probability");
        }
        let total: Rational = self.condition_probs.iter().sum();
        if !total.is_one() {
            return malformed(format!(
                "condition probabilities sum to {}",
                format_rational(&total)
            ));
        }
        if self.generator.iter().any(|&x| x >= n) {
            return malformed("generator output outside the text space");
        }
        if self.watermarker.len() != nk
            || self
                .watermarker
                .iter()
                .any(|row| row.len() != nc || row.iter().any(|&x| x >= n))
        {
            return malformed("watermarker must map every (key, condition) into the text space");
        }
        if self.loss.len() != n || self.loss.iter().any(|row| row.len() != nc) {
            return malformed("loss must have one row per text and one column per condition");
        }
        if self.loss.iter().flatten().any(|l| *l == Ext::NegInf) {
            return malformed("loss may not be -inf");
        }
        if self.detect.len() != nk || self.detect.iter().any(|row| row.len() != n) {
            return malformed("detect must have one row per key and one column per text");
        }
        if self.epsilon.is_negative() || self.epsilon_prime.is_negative() {
            return malformed("epsilon and epsilon' must be non-negative");
        }
        if self.delta.is_negative() || self.delta > Rational::one() {
            return malformed("delta must lie in [0, 1]");
        }
        for names in [&self.conditions, &self.keys] {
            for (i, a) in names.iter().enumerate() {
                if names[..i].contains(a) {
                    return malformed(format!("duplicate name {a:?}"));
                }
            }
        }
        Ok(())
    }

    fn live_conditions(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.condition_probs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
    }

    /// Law of `X = f(C)`.
    pub fn law_of_x(&self) -> Law {
        let mut law = vec![Rational::zero(); self.space.len()];
        for (c, p) in self.live_conditions() {
            law[self.generator[c]] += p;
        }
        law
    }

    /// Law of `X_k = g(C, k)`.
    pub fn law_of_marked(&self, key: usize) -> Law {
        let mut law = vec![Rational::zero(); self.space.len()];
        for (c, p) in self.live_conditions() {
            law[self.watermarker[key][c]] += p;
        }
        law
    }

    pub fn key_index(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    fn expectation(&self, key: usize, term: impl Fn(usize) -> Ext) -> Result<Ext, ErasureError> {
        let mut acc = Ext::zero();
        for (c, p) in self.live_conditions() {
            acc = acc
                .checked_add(&term(c).scale(p))
                .ok_or_else(|| ErasureError::UndefinedExpectation(self.keys[key].clone()))?;
        }
        Ok(acc)
    }

    /// `E[L(X_k,C) - L(X,C)]` under `key`.
    pub fn watermark_loss_excess(&self, key: usize) -> Result<Ext, ErasureError> {
        loss_excess_with(self, key, |c| {
            self.loss[self.watermarker[key][c]][c].clone()
        })
    }

    /// `E[d(X, X_k)]` under `key`.
    pub fn expected_distance(&self, key: usize) -> Ext {
        self.expectation(key, |c| {
            self.space
                .distance(self.generator[c], self.watermarker[key][c])
                .clone()
        })
        .expect("distances are non-negative")
    }

    /// `Pr[Detect(X,k) = True]`.
    pub fn natural_detection_rate(&self, key: usize) -> Rational {
        self.law_of_x()
            .iter()
            .enumerate()
            .filter(|(x, _)| self.detect[key][*x])
            .map(|(_, p)| p)
            .sum()
    }

    /// `Pr[Detect(X_k,k) = True]`.
    pub fn marked_detection_rate(&self, key: usize) -> Rational {
        self.law_of_marked(key)
            .iter()
            .enumerate()
            .filter(|(x, _)| self.detect[key][*x])
            .map(|(_, p)| p)
            .sum()
    }

    /// Every assumption `mode` needs that this setup breaks.
    pub fn violations(&self, mode: Mode) -> Result<Vec<Violation>, ErasureError> {
        self.validate_structure()?;
        let mut out = Vec::new();
        let lip = check_lipschitz(&self.loss, &self.space, self.conditions.len());
        if let Some((x, y, c)) = lip.witness {
            out.push(Violation {
                condition: Condition::Lipschitz,
                key: None,
                detail: format!(
                    "|L({x},{c}) - L({y},{c})| = |{} - {}| exceeds d = {}",
                    self.loss[x][c],
                    self.loss[y][c],
                    self.space.distance(x, y),
                    x = self.space.name(x),
                    y = self.space.name(y),
                    c = self.conditions[c],
                ),
            });
        }
        let one = Rational::one();
        let floor = &one - &self.delta;
        for k in 0..self.keys.len() {
            let key = Some(self.keys[k].clone());
            let excess = self.watermark_loss_excess(k)?;
            if excess > Ext::Finite(self.epsilon.clone()) {
                out.push(Violation {
                    condition: Condition::LossBudget,
                    key: key.clone(),
                    detail: format!("{excess} > {}", format_rational(&self.epsilon)),
                });
            }
            let marked = self.marked_detection_rate(k);
            if marked < floor {
                out.push(Violation {
                    condition: Condition::MarkedDetection,
                    key: key.clone(),
                    detail: format!("{} < {}", format_rational(&marked), format_rational(&floor)),
                });
            }
            let clean = &one - self.natural_detection_rate(k);
            let required = match mode {
                Mode::Nearest => one.clone(),
                Mode::Posterior => floor.clone(),
            };
            if clean < required {
                out.push(Violation {
                    condition: Condition::UnmarkedDetection,
                    key: key.clone(),
                    detail: format!(
                        "Pr[Detect(X,k) = False] = {} < {}",
                        format_rational(&clean),
                        format_rational(&required)
                    ),
                });
            }
            let dist = self.expected_distance(k);
            if dist > Ext::Finite(self.epsilon_prime.clone()) {
                out.push(Violation {
                    condition: Condition::MetricCloseness,
                    key,
                    detail: format!("{dist} > {}", format_rational(&self.epsilon_prime)),
                });
            }
        }
        Ok(out)
    }

    /// Fails with `SetupInvalid` naming every broken assumption.
    pub fn validate(&self, mode: Mode) -> Result<(), ErasureError> {
        let v = self.violations(mode)?;
        if v.is_empty() {
            Ok(())
        } else {
            Err(ErasureError::SetupInvalid(v))
        }
    }
}

/// Texts the generator emits with positive probability, in index order.
pub fn support_of(setup: &ErasureSetup) -> Vec<usize> {
    setup
        .law_of_x()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_positive())
        .map(|(x, _)| x)
        .collect()
}

/// Closest support text to `x`; ties go to the smallest name.
///
/// # Panics
/// If `support` is empty.
pub fn erase_nearest(x: usize, support: &[usize], space: &TextSpace) -> usize {
    assert!(!support.is_empty(), "support must be non-empty");
    *support
        .iter()
        .min_by(|&&a, &&b| {
            space
                .distance(x, a)
                .cmp(space.distance(x, b))
                .then_with(|| space.name(a).cmp(space.name(b)))
        })
        .expect("non-empty")
}

/// Exact distribution of `Erase_q(x)`: `Pr[X = . | X_k = x]` under `key`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Law,
}

impl Posterior {
    /// Draws a text index. Exact when the common denominator fits in `u64`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let lcm = self
            .probs
            .iter()
            .fold(BigInt::one(), |acc, p| num_integer_lcm(&acc, p.denom()));
        if let Some(denom) = lcm.to_u64() {
            let draw = rng.random_range(0..denom);
            let mut acc = 0u64;
            for (x, p) in self.probs.iter().enumerate() {
                let weight = (p * Rational::from_integer(lcm.clone()))
                    .to_integer()
                    .to_u64()
                    .unwrap_or(0);
                acc += weight;
                if draw < acc {
                    return x;
                }
            }
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (x, p) in self.probs.iter().enumerate() {
                acc += ext::rational_to_f64(p);
                if u < acc {
                    return x;
                }
            }
        }
        self.probs
            .iter()
            .rposition(|p| p.is_positive())
            .unwrap_or(0)
    }
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

pub fn erase_posterior(
    x: usize,
    setup: &ErasureSetup,
    key: usize,
) -> Result<Posterior, ErasureError> {
    let mut joint = vec![Rational::zero(); setup.space.len()];
    let mut mass = Rational::zero();
    for (c, p) in setup.live_conditions() {
        if setup.watermarker[key][c] == x {
            joint[setup.generator[c]] += p;
            mass += p;
        }
    }
    if mass.is_zero() {
        return Err(ErasureError::UndefinedConditional {
            text: setup.space.name(x).to_string(),
            key: setup.keys[key].clone(),
        });
    }
    for p in &mut joint {
        *p /= &mass;
    }
    Ok(Posterior { probs: joint })
}

/// Exact law of `Erase_q(X_k)` under `key`.
pub fn posterior_erased_law(setup: &ErasureSetup, key: usize) -> Result<Law, ErasureError> {
    let q = setup.law_of_marked(key);
    let mut law = vec![Rational::zero(); setup.space.len()];
    for (x, qx) in q.iter().enumerate().filter(|(_, p)| p.is_positive()) {
        let post = erase_posterior(x, setup, key)?;
        for (y, p) in post.probs.iter().enumerate() {
            law[y] += qx * p;
        }
    }
    Ok(law)
}

pub fn total_variation(a: &Law, b: &Law) -> Rational {
    let sum: Rational = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    sum / Rational::from_integer(BigInt::from(2))
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_ext<S: Serializer>(e: &Ext, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

fn ser_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyReport {
    pub key: String,
    #[serde(serialize_with = "ser_rational")]
    pub erase_success_prob: Rational,
    #[serde(serialize_with = "ser_ext")]
    pub loss_excess: Ext,
    /// Nearest mode: where each watermarked text is sent.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub erase_map: BTreeMap<String, String>,
    /// Posterior mode: total variation between `Erase_q(X_k)` and `X`.
    #[serde(
        serialize_with = "ser_opt_rational",
        skip_serializing_if = "Option::is_none"
    )]
    pub marginal_tv: Option<Rational>,
}

/// Worst case over keys, plus per-key detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErasureReport {
    pub mode: Mode,
    #[serde(serialize_with = "ser_rational")]
    pub erase_success_prob: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub required_success_prob: Rational,
    #[serde(serialize_with = "ser_ext")]
    pub loss_excess: Ext,
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub passed: bool,
    pub per_key: Vec<KeyReport>,
}

/// Validates `setup` for `mode`, runs the matching eraser, and computes the
/// erase success probability and loss excess exactly.
pub fn run_experiment(setup: &ErasureSetup, mode: Mode) -> Result<ErasureReport, ErasureError> {
    setup.validate(mode)?;
    let support = support_of(setup);
    let mut per_key = Vec::with_capacity(setup.keys.len());
    for k in 0..setup.keys.len() {
        let q = setup.law_of_marked(k);
        let report = match mode {
            Mode::Nearest => {
                let erase: BTreeMap<usize, usize> = q
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(x, _)| (x, erase_nearest(x, &support, &setup.space)))
                    .collect();
                let success: Rational = q
                    .iter()
                    .enumerate()
                    .filter(|(x, p)| p.is_positive() && !setup.detect[k][erase[x]])
                    .map(|(_, p)| p)
                    .sum();
                let excess = loss_excess_with(setup, k, |c| {
                    setup.loss[erase[&setup.watermarker[k][c]]][c].clone()
                })?;
                KeyReport {
                    key: setup.keys[k].clone(),
                    erase_success_prob: success,
                    loss_excess: excess,
                    erase_map: erase
                        .iter()
                        .map(|(&a, &b)| {
                            (
                                setup.space.name(a).to_string(),
                                setup.space.name(b).to_string(),
                            )
                        })
                        .collect(),
                    marginal_tv: None,
                }
            }
            Mode::Posterior => {
                let posteriors: BTreeMap<usize, Posterior> = q
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(x, _)| erase_posterior(x, setup, k).map(|post| (x, post)))
                    .collect::<Result<_, _>>()?;
                let erased = posterior_erased_law(setup, k)?;
                let success: Rational = erased
                    .iter()
                    .enumerate()
                    .filter(|(x, _)| !setup.detect[k][*x])
                    .map(|(_, p)| p)
                    .sum();
                let mut undefined = false;
                let excess = loss_excess_with(setup, k, |c| {
                    let post = &posteriors[&setup.watermarker[k][c]];
                    let mut acc = Ext::zero();
                    for (y, p) in post
                        .probs
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| p.is_positive())
                    {
                        match acc.checked_add(&setup.loss[y][c].scale(p)) {
                            Some(v) => acc = v,
                            None => undefined = true,
                        }
                    }
                    acc
                })?;
                if undefined {
                    return Err(ErasureError::UndefinedExpectation(setup.keys[k].clone()));
                }
                KeyReport {
                    key: setup.keys[k].clone(),
                    erase_success_prob: success,
                    loss_excess: excess,
                    erase_map: BTreeMap::new(),
                    marginal_tv: Some(total_variation(&erased, &setup.law_of_x())),
                }
            }
        };
        per_key.push(report);
    }

    let required = match mode {
        Mode::Nearest => Rational::one(),
        Mode::Posterior => Rational::one() - &setup.delta,
    };
    let bound = &setup.epsilon + &setup.epsilon_prime;
    let erase_success_prob = per_key
        .iter()
        .map(|r| r.erase_success_prob.clone())
        .min()
        .expect("at least one key");
    let loss_excess = per_key
        .iter()
        .map(|r| r.loss_excess.clone())
        .max()
        .expect("at least one key");
    let passed = erase_success_prob >= required && loss_excess <= Ext::Finite(bound.clone());
    Ok(ErasureReport {
        mode,
        erase_success_prob,
        required_success_prob: required,
        loss_excess,
        bound,
        passed,
        per_key,
    })
}

/// `E[erased_loss(C) - L(X,C)]` under `key`.
fn loss_excess_with(
    setup: &ErasureSetup,
    key: usize,
    mut erased_loss: impl FnMut(usize) -> Ext,
) -> Result<Ext, ErasureError> {
    let mut acc = Ext::zero();
    for (c, p) in setup.live_conditions() {
        let term = erased_loss(c)
            .checked_sub(&setup.loss[setup.generator[c]][c])
            .ok_or_else(|| ErasureError::UndefinedExpectation(setup.keys[key].clone()))?;
        acc = acc
            .checked_add(&term.scale(p))
            .ok_or_else(|| ErasureError::UndefinedExpectation(setup.keys[key].clone()))?;
    }
    Ok(acc)
}

/// One way an eraser candidate fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EraseFailure {
    /// Erased text has infinite loss under a condition that occurs.
    InfiniteLoss {
        key: String,
        condition: String,
        text: String,
    },
    /// Finite but above `epsilon + epsilon'`.
    LossBudgetExceeded {
        key: String,
        excess: String,
        bound: String,
    },
    /// The erased text is still detected.
    StillDetected {
        key: String,
        text: String,
        probability: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EraserCandidate {
    /// Watermarked text name to erased text name.
    pub mapping: BTreeMap<String, String>,
    pub failures: Vec<EraseFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EraserSearch {
    /// Texts the watermarker emits under some key.
    pub domain: Vec<String>,
    /// Broken assumptions of the nearest-mode guarantee.
    pub assumption_violations: Vec<Violation>,
    pub candidates: Vec<EraserCandidate>,
    /// True when no deterministic eraser succeeds.
    pub all_fail: bool,
}

/// Enumerates every deterministic eraser on the watermarked texts and
/// records how each one fails to erase (detection must drop to zero) while
/// keeping loss excess within `epsilon + epsilon'`.
pub fn search_erasers(setup: &ErasureSetup) -> Result<EraserSearch, ErasureError> {
    setup.validate_structure()?;
    let n = setup.space.len();
    let mut domain: Vec<usize> = (0..setup.keys.len())
        .flat_map(|k| {
            let q = setup.law_of_marked(k);
            (0..n).filter(move |&x| q[x].is_positive())
        })
        .collect();
    domain.sort_unstable();
    domain.dedup();
    let total = (n as u128)
        .checked_pow(domain.len() as u32)
        .unwrap_or(u128::MAX);
    if total > MAX_ERASER_CHOICES as u128 {
        return Err(ErasureError::TooManyErasers(total.to_string()));
    }

    let bound = Ext::Finite(&setup.epsilon + &setup.epsilon_prime);
    let mut candidates = Vec::with_capacity(total as usize);
    let mut choice = vec![0usize; domain.len()];
    loop {
        let erase = |x: usize| choice[domain.binary_search(&x).expect("in domain")];
        let mut failures = Vec::new();
        for k in 0..setup.keys.len() {
            let key = &setup.keys[k];
            let mut infinite = false;
            for (c, _) in setup.live_conditions() {
                let y = erase(setup.watermarker[k][c]);
                if setup.loss[y][c].is_infinite() && setup.loss[setup.generator[c]][c].is_finite() {
                    infinite = true;
                    failures.push(EraseFailure::InfiniteLoss {
                        key: key.clone(),
                        condition: setup.conditions[c].clone(),
                        text: setup.space.name(y).to_string(),
                    });
                }
            }
            if !infinite {
                let excess = loss_excess_with(setup, k, |c| {
                    setup.loss[erase(setup.watermarker[k][c])][c].clone()
                })?;
                if excess > bound {
                    failures.push(EraseFailure::LossBudgetExceeded {
                        key: key.clone(),
                        excess: excess.to_string(),
                        bound: bound.to_string(),
                    });
                }
            }
            let q = setup.law_of_marked(k);
            let mut detected: BTreeMap<usize, Rational> = BTreeMap::new();
            for (x, p) in q.iter().enumerate().filter(|(_, p)| p.is_positive()) {
                let y = erase(x);
                if setup.detect[k][y] {
                    *detected.entry(y).or_insert_with(Rational::zero) += p;
                }
            }
            for (y, p) in detected {
                failures.push(EraseFailure::StillDetected {
                    key: key.clone(),
                    text: setup.space.name(y).to_string(),
                    probability: format_rational(&p),
                });
            }
        }
        candidates.push(EraserCandidate {
            mapping: domain
                .iter()
                .zip(&choice)
                .map(|(&x, &y)| {
                    (
                        setup.space.name(x).to_string(),
                        setup.space.name(y).to_string(),
                    )
                })
                .collect(),
            failures,
        });

        // odometer over choices
        let mut i = 0;
        loop {
            if i == choice.len() {
                let all_fail = candidates.iter().all(|c| !c.failures.is_empty());
                return Ok(EraserSearch {
                    domain: domain
                        .iter()
                        .map(|&x| setup.space.name(x).to_string())
                        .collect(),
                    assumption_violations: setup.violations(Mode::Nearest)?,
                    candidates,
                    all_fail,
                });
            }
            choice[i] += 1;
            if choice[i] < n {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
