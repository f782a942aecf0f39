//! Hat-word selection and preimage descent of Abelian powers.
//!
//! Given an Abelian power `X1 Y X2` in a fixed-point prefix, both blocks
//! parse on the image grid as `X_i = s_i f(x_i) p_i`; in the preimage the
//! letter `b_i` sits just before `x_i` and `a_i` just after. The hat
//! selection extends each `x_i` by at most one marker letter on each side
//! so that the hats are again anagrams, and the descent relocates the whole
//! power one morphism level down with controlled exponent loss.

use crate::calculus::ExactRational;
use crate::error::{Error, Result};
use crate::morphism::{ParsedFactor, UniformCyclicMorphism};
use crate::scanner::{witness_check, AbelianWitness};
use crate::word::{is_anagram, parikh, Letter, Word};
use num::rational::BigRational;
use num::{BigInt, One};

/// Which branch of the selection procedure produced the hats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatCase {
    /// `x1 ~ x2` already.
    Equal,
    /// Some letter count differs by 2 or more: both sides take both markers.
    AtLeastTwo,
    /// One length unit apart, a single surplus letter.
    OneA,
    /// One length unit apart, two surplus letters on the longer side.
    OneB,
    /// Equal lengths, one surplus letter each way.
    TwoA,
    /// Equal lengths, two surplus letters each way.
    TwoB,
}

impl std::fmt::Display for HatCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            HatCase::Equal => "equal",
            HatCase::AtLeastTwo => "at-least-2",
            HatCase::OneA => "1a",
            HatCase::OneB => "1b",
            HatCase::TwoA => "2a",
            HatCase::TwoB => "2b",
        };
        f.write_str(label)
    }
}

/// Which marker letters a hat takes. The extensions are contiguous in the
/// preimage: `b` is prepended, `a` is appended.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HatExtension {
    pub prepend_b: bool,
    pub append_a: bool,
}

/// Result of the hat selection: two anagram words, each extending its `x`
/// by at most one letter per side.
#[derive(Debug, Clone)]
pub struct HatSelection {
    pub hat1: Word,
    pub hat2: Word,
    pub case: HatCase,
    pub ext1: HatExtension,
    pub ext2: HatExtension,
    /// `|x1| - |x2|`; always in `{-1, 0, 1}` for genuine anagram factors.
    pub delta: i64,
}

/// Length difference `|x1| - |x2|` of two parsed factors.
pub fn delta(pf1: &ParsedFactor<'_>, pf2: &ParsedFactor<'_>) -> i64 {
    pf1.x.len() as i64 - pf2.x.len() as i64
}

/// The adjacency law on anagram factor pairs: whenever one preimage block
/// has a strict surplus of letter `k`, that letter must appear as a marker
/// of the other side (`a` or `b`). A violation on genuine fixed-point data
/// falsifies the surrounding theory, so it reports as `Inconsistency`.
pub fn lemma1_check(pf1: &ParsedFactor<'_>, pf2: &ParsedFactor<'_>) -> Result<()> {
    let p1 = parikh(&pf1.x);
    let p2 = parikh(&pf2.x);
    for k in 0..p1.counts().len() {
        let k_letter = k as Letter;
        if p1.count(k_letter) > p2.count(k_letter)
            && pf2.a != Some(k_letter)
            && pf2.b != Some(k_letter)
        {
            return Err(Error::Inconsistency(format!(
                "surplus letter {k} in x1 appears as neither marker of X2 (a={:?}, b={:?})",
                pf2.a, pf2.b
            )));
        }
        if p2.count(k_letter) > p1.count(k_letter)
            && pf1.a != Some(k_letter)
            && pf1.b != Some(k_letter)
        {
            return Err(Error::Inconsistency(format!(
                "surplus letter {k} in x2 appears as neither marker of X1 (a={:?}, b={:?})",
                pf1.a, pf1.b
            )));
        }
    }
    Ok(())
}

fn extend_by_letter(pf: &ParsedFactor<'_>, k: Letter) -> Result<HatExtension> {
    // Prefer the a-side when both markers carry the letter.
    if pf.a == Some(k) {
        Ok(HatExtension {
            prepend_b: false,
            append_a: true,
        })
    } else if pf.b == Some(k) {
        Ok(HatExtension {
            prepend_b: true,
            append_a: false,
        })
    } else {
        Err(Error::Inconsistency(format!(
            "surplus letter {k} is neither marker (a={:?}, b={:?})",
            pf.a, pf.b
        )))
    }
}

fn full_extension(pf: &ParsedFactor<'_>) -> Result<HatExtension> {
    if pf.a.is_none() || pf.b.is_none() {
        return Err(Error::Inconsistency(format!(
            "two-sided extension needs both markers, got a={:?}, b={:?}",
            pf.a, pf.b
        )));
    }
    Ok(HatExtension {
        prepend_b: true,
        append_a: true,
    })
}

fn check_marker_pair(pf: &ParsedFactor<'_>, k1: Letter, k2: Letter) -> Result<()> {
    let ok = matches!((pf.a, pf.b), (Some(a), Some(b))
        if (a == k1 && b == k2) || (a == k2 && b == k1));
    if ok {
        Ok(())
    } else {
        Err(Error::Inconsistency(format!(
            "markers (a={:?}, b={:?}) do not carry the surplus letters {{{k1}, {k2}}}",
            pf.a, pf.b
        )))
    }
}

fn build_hat(pf: &ParsedFactor<'_>, ext: HatExtension) -> Result<Word> {
    let mut letters = Vec::with_capacity(pf.x.len() + 2);
    if ext.prepend_b {
        letters.push(pf.b.ok_or_else(|| {
            Error::Inconsistency("prepend extension without a b marker".into())
        })?);
    }
    letters.extend_from_slice(pf.x.letters());
    if ext.append_a {
        letters.push(pf.a.ok_or_else(|| {
            Error::Inconsistency("append extension without an a marker".into())
        })?);
    }
    Word::new(letters, pf.x.alphabet())
}

/// Chooses hat words for two anagram factor blocks so that the hats are
/// anagrams again. Follows the case analysis on the multiset of per-letter
/// surpluses of the preimage blocks; each returned hat extends its `x` by
/// at most one marker letter per side, and the pair always satisfies
/// `is_anagram`.
pub fn hat_select<'h>(
    pf1: &ParsedFactor<'h>,
    pf2: &ParsedFactor<'h>,
) -> Result<HatSelection> {
    if !pf1.same_host(pf2) {
        return Err(Error::Precondition(
            "factors must be parsed against the same host".into(),
        ));
    }
    let min_len = 2 * (pf1.image_len() - 1);
    if pf1.length() <= min_len || pf2.length() <= min_len {
        return Err(Error::Precondition(format!(
            "factor blocks must be longer than {min_len} so the preimage blocks are nonempty"
        )));
    }
    if !is_anagram(&pf1.factor(), &pf2.factor())? {
        return Err(Error::Precondition("factors are not anagrams".into()));
    }
    if pf1.x.is_empty() || pf2.x.is_empty() {
        return Err(Error::Precondition("empty preimage block".into()));
    }

    let d = delta(pf1, pf2);
    let p1 = parikh(&pf1.x);
    let p2 = parikh(&pf2.x);
    let mut surplus1 = Vec::new(); // letters with |x1|_k = |x2|_k + 1
    let mut surplus2 = Vec::new(); // letters with |x2|_k = |x1|_k + 1
    let mut big_gap = false;
    for k in 0..p1.counts().len() {
        let c1 = p1.count(k as Letter) as i64;
        let c2 = p2.count(k as Letter) as i64;
        match c1 - c2 {
            0 => {}
            1 => surplus1.push(k as Letter),
            -1 => surplus2.push(k as Letter),
            _ => big_gap = true,
        }
    }

    let (case, ext1, ext2) = if !big_gap && surplus1.is_empty() && surplus2.is_empty() {
        (HatCase::Equal, HatExtension::default(), HatExtension::default())
    } else if big_gap {
        // A gap of two or more forces both markers on both sides.
        (HatCase::AtLeastTwo, full_extension(pf1)?, full_extension(pf2)?)
    } else {
        if d.abs() > 1 {
            return Err(Error::Inconsistency(format!(
                "anagram factors with |delta| = {} > 1",
                d.abs()
            )));
        }
        if surplus1.len() > 2 || surplus2.len() > 2 {
            return Err(Error::Inconsistency(
                "more than two surplus letters on one side".into(),
            ));
        }
        match (surplus1.as_slice(), surplus2.as_slice()) {
            ([k1], []) => (
                HatCase::OneA,
                HatExtension::default(),
                extend_by_letter(pf2, *k1)?,
            ),
            ([], [k1]) => (
                HatCase::OneA,
                extend_by_letter(pf1, *k1)?,
                HatExtension::default(),
            ),
            ([k1, k2], [k3]) => {
                check_marker_pair(pf2, *k1, *k2)?;
                (
                    HatCase::OneB,
                    extend_by_letter(pf1, *k3)?,
                    full_extension(pf2)?,
                )
            }
            ([k3], [k1, k2]) => {
                check_marker_pair(pf1, *k1, *k2)?;
                (
                    HatCase::OneB,
                    full_extension(pf1)?,
                    extend_by_letter(pf2, *k3)?,
                )
            }
            ([k1], [k2]) => (
                HatCase::TwoA,
                extend_by_letter(pf1, *k2)?,
                extend_by_letter(pf2, *k1)?,
            ),
            ([k1, k2], [k3, k4]) => {
                check_marker_pair(pf2, *k1, *k2)?;
                check_marker_pair(pf1, *k3, *k4)?;
                (HatCase::TwoB, full_extension(pf1)?, full_extension(pf2)?)
            }
            _ => {
                return Err(Error::Inconsistency(format!(
                    "surplus pattern ({}, {}) matches no selection case",
                    surplus1.len(),
                    surplus2.len()
                )))
            }
        }
    };

    let hat1 = build_hat(pf1, ext1)?;
    let hat2 = build_hat(pf2, ext2)?;
    if !is_anagram(&hat1, &hat2)? {
        return Err(Error::Inconsistency(format!(
            "selected hats are not anagrams (case {case}): {hat1} vs {hat2}"
        )));
    }
    Ok(HatSelection {
        hat1,
        hat2,
        case,
        ext1,
        ext2,
        delta: d,
    })
}

/// One descent step: the parent witness relocated to the preimage level.
#[derive(Debug, Clone)]
pub struct DescentResult {
    /// The relocated power on the child host.
    pub child: AbelianWitness,
    /// Hat selection that produced it.
    pub selection: HatSelection,
    /// Parent `|X1 Y|` (the period of the parent witness).
    pub parent_span: usize,
    /// Child `|hat(x1) hat(y)|` (the period of the child witness).
    pub hat_span: usize,
    pub parent_exponent: ExactRational,
    pub child_exponent: ExactRational,
    /// Descent scale the inequalities were checked against.
    pub n: ExactRational,
    ell: usize,
}

impl DescentResult {
    /// Slack of the span inequality:
    /// `parent_span - l*n/(n+1) * hat_span >= 0`.
    pub fn span_slack(&self) -> ExactRational {
        let ell_n = BigRational::from_integer(BigInt::from(self.ell)) * &self.n;
        let lhs = BigRational::from_integer(BigInt::from(self.parent_span));
        let rhs = ell_n * BigRational::from_integer(BigInt::from(self.hat_span))
            / (&self.n + BigRational::one());
        lhs - rhs
    }

    /// Slack of the exponent inequality:
    /// `child_exponent + 6(l-1)/parent_span - parent_exponent >= 0`.
    pub fn exponent_slack(&self) -> ExactRational {
        let drift = BigRational::new(
            BigInt::from(6 * (self.ell - 1)),
            BigInt::from(self.parent_span),
        );
        &self.child_exponent + drift - &self.parent_exponent
    }

    /// Guaranteed per-step shrink factor `(n+1)/(l*n)` of the span.
    pub fn shrink_factor(&self) -> ExactRational {
        (&self.n + BigRational::one())
            / (BigRational::from_integer(BigInt::from(self.ell)) * &self.n)
    }
}

fn rational_usize(v: usize) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Relocates an Abelian power from `parent_host` to `child_host`, one
/// morphism level down. Requires `parent_host = f(child_host)` (checked
/// structurally), a valid witness with `|X1| >= 2(l-1) n`, and `n > 1`.
///
/// Both descent inequalities are asserted on the result; a violation
/// reports as `Inconsistency` because it would falsify the construction.
pub fn descend(
    m: &UniformCyclicMorphism,
    parent_host: &Word,
    child_host: &Word,
    w: &AbelianWitness,
    n: &ExactRational,
) -> Result<DescentResult> {
    let ell = m.image_len();
    if parent_host.len() != ell * child_host.len() {
        return Err(Error::Precondition(format!(
            "parent length {} is not {} times child length {}",
            parent_host.len(),
            ell,
            child_host.len()
        )));
    }
    if parent_host.letters()[..child_host.len()] != *child_host.letters() {
        return Err(Error::Precondition(
            "child host is not a prefix of the parent host".into(),
        ));
    }
    if *n <= BigRational::one() {
        return Err(Error::Precondition("descent scale n must exceed 1".into()));
    }
    if !witness_check(parent_host, w)? {
        return Err(Error::Precondition(
            "witness fails its check on the parent host".into(),
        ));
    }
    let min_x1 = rational_usize(2 * (ell - 1)) * n;
    if rational_usize(w.m) < min_x1 {
        return Err(Error::Precondition(format!(
            "|X1| = {} is below the descent hypothesis 2(l-1)n",
            w.m
        )));
    }

    let pf1 = m.parse_factor(parent_host, w.start, w.m)?;
    let pf2 = m.parse_factor(parent_host, w.start + w.p, w.m)?;
    let selection = hat_select(&pf1, &pf2)?;

    let hat1_start = pf1.x_block_start() - selection.ext1.prepend_b as usize;
    let hat1_end = pf1.x_block_start() + pf1.x.len() + selection.ext1.append_a as usize;
    let hat2_start = pf2.x_block_start() - selection.ext2.prepend_b as usize;
    let hat2_end = pf2.x_block_start() + pf2.x.len() + selection.ext2.append_a as usize;

    if hat2_start <= hat1_end {
        return Err(Error::Inconsistency(format!(
            "hat blocks [{hat1_start}, {hat1_end}) and [{hat2_start}, {hat2_end}) leave no gap; \
             the relocated power would not have a nonempty middle"
        )));
    }
    if hat2_end > child_host.len() {
        return Err(Error::Inconsistency(
            "hat block runs past the child host".into(),
        ));
    }
    let child_m = hat1_end - hat1_start;
    if hat2_end - hat2_start != child_m {
        return Err(Error::Inconsistency(
            "hat blocks have different lengths despite being anagrams".into(),
        ));
    }
    // The hats must spell exactly the child-host letters at their positions.
    if child_host.letters()[hat1_start..hat1_end] != *selection.hat1.letters()
        || child_host.letters()[hat2_start..hat2_end] != *selection.hat2.letters()
    {
        return Err(Error::Inconsistency(
            "hat words disagree with the child host at the relocated positions".into(),
        ));
    }

    let child = AbelianWitness::new(hat1_start, child_m, hat2_start - hat1_start)?;
    if !witness_check(child_host, &child)? {
        return Err(Error::Inconsistency(
            "relocated blocks are not anagrams on the child host".into(),
        ));
    }

    let result = DescentResult {
        parent_span: w.p,
        hat_span: child.p,
        parent_exponent: w.exponent.clone(),
        child_exponent: child.exponent.clone(),
        n: n.clone(),
        ell,
        child,
        selection,
    };
    if result.span_slack() < BigRational::from_integer(BigInt::from(0)) {
        return Err(Error::Inconsistency(format!(
            "span inequality violated: parent {} vs hat span {} at n = {}",
            result.parent_span, result.hat_span, result.n
        )));
    }
    if result.exponent_slack() < BigRational::from_integer(BigInt::from(0)) {
        return Err(Error::Inconsistency(format!(
            "exponent inequality violated: parent {} vs child {} + {}/{}",
            result.parent_exponent,
            result.child_exponent,
            6 * (ell - 1),
            result.parent_span
        )));
    }
    Ok(result)
}

/// Iterated descent down a chain of hosts `f^t(0), f^(t-1)(0), ...`,
/// stopping at the first witness with `|X1| <= 2(l-1) n`. The span shrinks
/// by a factor of at least `l*n/(n+1) > 1` per step, so the chain is finite.
pub fn descent_chain(
    m: &UniformCyclicMorphism,
    hosts: &[Word],
    w: &AbelianWitness,
    n: &ExactRational,
) -> Result<Vec<DescentResult>> {
    if hosts.is_empty() {
        return Err(Error::Precondition("empty host chain".into()));
    }
    if *n <= BigRational::one() {
        return Err(Error::Precondition("descent scale n must exceed 1".into()));
    }
    let threshold = rational_usize(2 * (m.image_len() - 1)) * n;
    let mut results = Vec::new();
    let mut current = w.clone();
    let mut level = 0usize;
    while rational_usize(current.m) > threshold {
        if level + 1 >= hosts.len() {
            return Err(Error::Precondition(format!(
                "host chain exhausted at level {level} with |X1| = {} still above 2(l-1)n",
                current.m
            )));
        }
        let step = descend(m, &hosts[level], &hosts[level + 1], &current, n)?;
        current = step.child.clone();
        results.push(step);
        level += 1;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ratio;
    use crate::default_morphism;
    use crate::scanner::{harvest_anagram_pairs, scan_max, HarvestConfig, ScanConfig};

    fn hosts_down_from(t: u32) -> Vec<Word> {
        let f = default_morphism();
        (0..=t)
            .rev()
            .map(|i| f.fixed_point_prefix(i).unwrap())
            .collect()
    }

    #[test]
    fn aligned_descent_divides_by_thirteen() {
        let f = default_morphism();
        let f3 = f.fixed_point_prefix(3).unwrap();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let child_w = harvest_anagram_pairs(
            &f3,
            &HarvestConfig {
                cap: 100,
                min_m: 2,
                per_period: 1,
                max_total: 1,
                period_min: 3,
                period_max: 200,
                workers: 1,
            },
        )
        .pop()
        .expect("f^3(0) contains anagram pairs");
        let parent =
            AbelianWitness::new(13 * child_w.start, 13 * child_w.m, 13 * child_w.p).unwrap();
        let n = ratio(13 * child_w.m as i64, 24);
        assert!(n > ratio(1, 1));
        let step = descend(&f, &f4, &f3, &parent, &n).unwrap();
        assert_eq!(step.selection.case, HatCase::Equal);
        assert_eq!(
            (step.child.start, step.child.m, step.child.p),
            (child_w.start, child_w.m, child_w.p)
        );
    }

    #[test]
    fn harvested_f4_witnesses_descend() {
        let f = default_morphism();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let f3 = f.fixed_point_prefix(3).unwrap();
        let pairs = harvest_anagram_pairs(
            &f4,
            &HarvestConfig {
                cap: 400,
                min_m: 25,
                per_period: 1,
                max_total: 40,
                period_min: 26,
                period_max: 400,
                workers: 0,
            },
        );
        assert!(!pairs.is_empty());
        for w in &pairs {
            // The tightest n the hypothesis allows for this witness.
            let n = ratio(w.m as i64, 24);
            let step = descend(&f, &f4, &f3, w, &n).unwrap();
            assert!(witness_check(&f3, &step.child).unwrap());
            assert!(step.span_slack() >= ratio(0, 1));
            assert!(step.exponent_slack() >= ratio(0, 1));
        }
    }

    #[test]
    fn chain_stops_below_threshold() {
        let f = default_morphism();
        let hosts = hosts_down_from(4);
        let w = harvest_anagram_pairs(
            &hosts[0],
            &HarvestConfig {
                cap: 1000,
                min_m: 100,
                per_period: 1,
                max_total: 1,
                period_min: 101,
                period_max: 2000,
                workers: 0,
            },
        )
        .pop()
        .expect("f^4(0) contains anagram pairs with |X1| >= 100");

        // Terminal immediately: threshold above |X1|.
        let big_n = ratio(w.m as i64, 24) + ratio(1, 1);
        let chain = descent_chain(&f, &hosts, &w, &big_n).unwrap();
        assert!(chain.is_empty());

        // Small n forces at least one step and the stop condition.
        let n = ratio(3, 2);
        let chain = descent_chain(&f, &hosts, &w, &n).unwrap();
        assert!(!chain.is_empty());
        let last = chain.last().unwrap();
        assert!(rational_usize(last.child.m) <= rational_usize(24) * &n);
        for step in &chain {
            // Per-step span shrink by at least l*n/(n+1).
            let bound = rational_usize(step.parent_span) * step.shrink_factor();
            assert!(rational_usize(step.hat_span) <= bound);
        }
    }

    #[test]
    fn harvested_pairs_satisfy_the_selection_laws() {
        let f = default_morphism();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let pairs = harvest_anagram_pairs(
            &f4,
            &HarvestConfig {
                cap: 400,
                min_m: 25,
                per_period: 2,
                max_total: 200,
                period_min: 26,
                period_max: 700,
                workers: 0,
            },
        );
        assert!(pairs.len() >= 50, "expected a rich harvest, got {}", pairs.len());
        let mut cases = std::collections::BTreeMap::new();
        for w in &pairs {
            let pf1 = f.parse_factor(&f4, w.start, w.m).unwrap();
            let pf2 = f.parse_factor(&f4, w.start + w.p, w.m).unwrap();
            assert!(delta(&pf1, &pf2).abs() <= 1);
            lemma1_check(&pf1, &pf2).unwrap();
            let sel = hat_select(&pf1, &pf2).unwrap();
            assert!(is_anagram(&sel.hat1, &sel.hat2).unwrap());
            for (hat, pf) in [(&sel.hat1, &pf1), (&sel.hat2, &pf2)] {
                let grown = hat.len() - pf.x.len();
                assert!(grown <= 2);
            }
            *cases.entry(sel.case.to_string()).or_insert(0usize) += 1;
        }
        assert!(cases.contains_key("equal"));
    }

    #[test]
    fn hat_select_rejects_bad_inputs() {
        let f = default_morphism();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let pf_a = f.parse_factor(&f4, 0, 100).unwrap();
        let pf_short = f.parse_factor(&f4, 0, 24).unwrap();

        // Not anagrams: find an offset whose factor genuinely differs.
        let offset = (1..300)
            .find(|&o| {
                !is_anagram(
                    &f4.factor(0, 100).unwrap(),
                    &f4.factor(o, 100).unwrap(),
                )
                .unwrap()
            })
            .expect("some length-100 factor differs from the prefix");
        let pf_b = f.parse_factor(&f4, offset, 100).unwrap();
        match hat_select(&pf_a, &pf_b) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("anagram")),
            other => panic!("expected precondition error, got {other:?}"),
        }
        // Too short.
        assert!(matches!(
            hat_select(&pf_short, &pf_short),
            Err(Error::Precondition(_))
        ));
        // Different hosts.
        let f4b = f.fixed_point_prefix(3).unwrap();
        let pf_c = f.parse_factor(&f4b, 0, 100).unwrap();
        assert!(matches!(
            hat_select(&pf_a, &pf_c),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn descend_rejects_mismatched_hosts() {
        let f = default_morphism();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let f2 = f.fixed_point_prefix(2).unwrap();
        let w = AbelianWitness::new(0, 26, 39).unwrap();
        assert!(matches!(
            descend(&f, &f4, &f2, &w, &ratio(3, 2)),
            Err(Error::Precondition(_))
        ));
    }
}
