//! Exhaustive Abelian-power search.
//!
//! An Abelian power is a factor `x1 y x2` with `x1 ~ x2`; we record it as
//! `(start, m, p)` where `m = |x1| = |x2|` and `p = |x1 y|` is the period,
//! with exact exponent `(p + m) / p`.
//!
//! The scan precomputes nothing global: for each period `p` it rolls the
//! window signature `D_p(j) = parikh(host[j .. j+p))` across the word with
//! two letter updates per step. Blocks at `j` and `j + m` are anagrams at
//! distance `p` exactly when `D_p(j) = D_p(j+m)`, so one left-to-right pass
//! with a signature table finds, per period, the maximal gap `m` within the
//! sliding window `m <= min(cap, p-1)`.

use crate::calculus::ExactRational;
use crate::error::{Error, Result};
use crate::word::Word;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive};
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hash, Hasher};

/// Size guard for the brute-force oracle.
pub const ORACLE_GUARD: usize = 4096;

/// A located Abelian power with its exact exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianWitness {
    /// Index of the first letter of `x1`.
    pub start: usize,
    /// Block length `|x1| = |x2|`.
    pub m: usize,
    /// Period `|x1 y|`; always `> m`, so `|y| >= 1`.
    pub p: usize,
    /// `(p + m) / p` in lowest terms; always strictly between 1 and 2.
    pub exponent: ExactRational,
}

impl AbelianWitness {
    pub fn new(start: usize, m: usize, p: usize) -> Result<Self> {
        if m < 1 || p <= m {
            return Err(Error::InvalidConfig(format!(
                "witness needs 1 <= m < p, got m={m}, p={p}"
            )));
        }
        Ok(AbelianWitness {
            start,
            m,
            p,
            exponent: exponent_of(m, p),
        })
    }

    /// Rebuilds a witness from stored fields without recomputing the
    /// exponent; `witness_check` validates it against `(p+m)/p`.
    pub fn from_parts(start: usize, m: usize, p: usize, exponent: ExactRational) -> Self {
        AbelianWitness {
            start,
            m,
            p,
            exponent,
        }
    }
}

/// `(p + m) / p` as an exact rational in lowest terms.
pub fn exponent_of(m: usize, p: usize) -> ExactRational {
    BigRational::new(BigInt::from(p + m), BigInt::from(p))
}

/// Scan parameters. `cap` bounds the block length `m`; the optional
/// `threshold` (strictly between 1 and 2) drives violations mode; the
/// optional `period_limit` bounds `p`; `workers = 0` means one worker per
/// available CPU.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    cap: usize,
    threshold: Option<ExactRational>,
    period_limit: Option<usize>,
    workers: usize,
}

impl ScanConfig {
    pub fn new(cap: usize) -> Result<Self> {
        if cap < 1 {
            return Err(Error::InvalidConfig("cap must be >= 1".into()));
        }
        Ok(ScanConfig {
            cap,
            threshold: None,
            period_limit: None,
            workers: 0,
        })
    }

    pub fn with_threshold(mut self, threshold: ExactRational) -> Result<Self> {
        let one = BigRational::one();
        let two = &one + &one;
        if threshold <= one || threshold >= two {
            return Err(Error::InvalidConfig(
                "threshold must lie strictly between 1 and 2".into(),
            ));
        }
        self.threshold = Some(threshold);
        Ok(self)
    }

    pub fn with_period_limit(mut self, period_limit: usize) -> Self {
        self.period_limit = Some(period_limit);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn threshold(&self) -> Option<&ExactRational> {
        self.threshold.as_ref()
    }

    pub fn period_limit(&self) -> Option<usize> {
        self.period_limit
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

/// Returns a witness of maximal exponent among all Abelian powers with
/// `m <= cap` (and `p <= period_limit` if set), or `None` if the word
/// contains no Abelian power at all. Ties break to the smallest period,
/// then the smallest start; the result is identical for every worker count.
pub fn scan_max(host: &Word, cfg: &ScanConfig) -> Option<AbelianWitness> {
    let letters = host.letters();
    let n = host.alphabet().size();
    let len = letters.len();
    if len < 3 {
        return None;
    }
    let p_max = cfg.period_limit.unwrap_or(len - 1).min(len - 1);
    if p_max < 2 {
        return None;
    }
    let workers = effective_workers(cfg.workers, p_max - 1);
    let best = if workers <= 1 {
        worker_scan_max(letters, n, cfg.cap, p_max, 1, 0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || worker_scan_max(letters, n, cfg.cap, p_max, workers, w)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scan worker panicked"))
                .fold(None, merge_best)
        })
    };
    best.map(|c| AbelianWitness::new(c.start, c.m, c.p).expect("scan candidates are well-formed"))
}

/// Returns every witness with exponent strictly above the configured
/// threshold and `m <= cap`, sorted by `(p, start, m)`. An empty list
/// certifies avoidance at that cap. The threshold must be set.
pub fn scan_violations(host: &Word, cfg: &ScanConfig) -> Result<Vec<AbelianWitness>> {
    let threshold = cfg
        .threshold
        .clone()
        .ok_or_else(|| Error::Precondition("violations mode needs a threshold".into()))?;
    let letters = host.letters();
    let n = host.alphabet().size();
    let len = letters.len();
    if len < 3 {
        return Ok(Vec::new());
    }
    let p_max = cfg.period_limit.unwrap_or(len - 1).min(len - 1);
    if p_max < 2 {
        return Ok(Vec::new());
    }
    // Violation at period p needs m > (c-1) * p; precompute the numerator
    // and denominator of c - 1 once.
    let diff = threshold.numer() - threshold.denom();
    let den = threshold.denom().clone();
    let workers = effective_workers(cfg.workers, p_max - 1);
    let mut cands = if workers <= 1 {
        worker_scan_violations(letters, n, cfg.cap, p_max, &diff, &den, 1, 0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let diff = &diff;
                    let den = &den;
                    scope.spawn(move || {
                        worker_scan_violations(letters, n, cfg.cap, p_max, diff, den, workers, w)
                    })
                })
                .collect();
            let mut all = Vec::new();
            for h in handles {
                all.extend(h.join().expect("scan worker panicked"));
            }
            all
        })
    };
    cands.sort_by_key(|c| (c.p, c.start, c.m));
    Ok(cands
        .into_iter()
        .map(|c| AbelianWitness::new(c.start, c.m, c.p).expect("scan candidates are well-formed"))
        .collect())
}

/// Reference implementation of `scan_max` by direct enumeration of all
/// `(start, m, p)` triples with Parikh comparison; identical contract
/// including tie-breaks. Guarded to short hosts.
pub fn oracle_scan(host: &Word, cfg: &ScanConfig) -> Result<Option<AbelianWitness>> {
    let len = host.len();
    if len > ORACLE_GUARD {
        return Err(Error::OracleSizeExceeded {
            len,
            guard: ORACLE_GUARD,
        });
    }
    let n = host.alphabet().size();
    let letters = host.letters();
    // prefix[j] = counts of letters in host[0..j), flattened.
    let mut prefix = vec![0u32; (len + 1) * n];
    for j in 0..len {
        let (done, rest) = prefix.split_at_mut((j + 1) * n);
        let prev = &done[j * n..];
        rest[..n].copy_from_slice(prev);
        rest[letters[j] as usize] += 1;
    }
    let anagram = |j1: usize, j2: usize, m: usize| -> bool {
        let a1 = &prefix[j1 * n..j1 * n + n];
        let b1 = &prefix[(j1 + m) * n..(j1 + m) * n + n];
        let a2 = &prefix[j2 * n..j2 * n + n];
        let b2 = &prefix[(j2 + m) * n..(j2 + m) * n + n];
        (0..n).all(|k| b1[k] - a1[k] == b2[k] - a2[k])
    };
    let p_max = cfg.period_limit.unwrap_or(len.saturating_sub(1));
    let mut best: Option<Cand> = None;
    for p in 2..=p_max.min(len.saturating_sub(1)) {
        for m in 1..=cfg.cap.min(p - 1) {
            if p + m > len {
                break;
            }
            for start in 0..=(len - p - m) {
                if anagram(start, start + p, m) {
                    let cand = Cand { start, m, p };
                    if best.as_ref().is_none_or(|b| cand.beats(b)) {
                        best = Some(cand);
                    }
                    break; // later starts with the same (m, p) lose the tie-break
                }
            }
        }
    }
    Ok(best.map(|c| AbelianWitness::new(c.start, c.m, c.p).expect("oracle candidates are valid")))
}

/// Re-verifies a witness against its host: equal Parikh vectors at distance
/// `p`, and the stored exponent equal to `(p+m)/p` in lowest terms.
pub fn witness_check(host: &Word, w: &AbelianWitness) -> Result<bool> {
    let end = w
        .start
        .checked_add(w.p)
        .and_then(|v| v.checked_add(w.m))
        .ok_or(Error::OutOfRange {
            index: w.start,
            length: w.p + w.m,
            len: host.len(),
        })?;
    if end > host.len() {
        return Err(Error::OutOfRange {
            index: w.start,
            length: w.p + w.m,
            len: host.len(),
        });
    }
    if w.m < 1 || w.p <= w.m {
        return Ok(false);
    }
    let x1 = host.factor(w.start, w.m)?;
    let x2 = host.factor(w.start + w.p, w.m)?;
    Ok(crate::word::is_anagram(&x1, &x2)? && w.exponent == exponent_of(w.m, w.p))
}

/// Deterministic harvesting of anagram block pairs, used to feed the lemma
/// property suites with factor pairs `X1 ~ X2` taken from real fixed-point
/// prefixes (random sampling would essentially never find anagram pairs).
#[derive(Debug, Clone)]
pub struct HarvestConfig {
    /// Maximal block length `m`.
    pub cap: usize,
    /// Minimal block length `m` worth collecting.
    pub min_m: usize,
    /// At most this many pairs per period.
    pub per_period: usize,
    /// Overall cutoff, applied after the deterministic (p, start, m) sort.
    pub max_total: usize,
    /// Periods scanned: `[period_min, period_max]`.
    pub period_min: usize,
    pub period_max: usize,
    pub workers: usize,
}

/// Collects up to `max_total` witnesses with `min_m <= m <= cap`, scanning
/// the configured period range; output is sorted by `(p, start, m)` and
/// independent of the worker count.
pub fn harvest_anagram_pairs(host: &Word, hcfg: &HarvestConfig) -> Vec<AbelianWitness> {
    let letters = host.letters();
    let n = host.alphabet().size();
    let len = letters.len();
    if len < 3 || hcfg.min_m > hcfg.cap {
        return Vec::new();
    }
    let p_min = hcfg.period_min.max(hcfg.min_m + 1).max(2);
    let p_max = hcfg.period_max.min(len - 1);
    if p_min > p_max {
        return Vec::new();
    }
    let workers = effective_workers(hcfg.workers, p_max - p_min + 1);
    let mut cands = if workers <= 1 {
        worker_harvest(letters, n, hcfg, p_min, p_max, 1, 0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || worker_harvest(letters, n, hcfg, p_min, p_max, workers, w)))
                .collect();
            let mut all = Vec::new();
            for h in handles {
                all.extend(h.join().expect("harvest worker panicked"));
            }
            all
        })
    };
    cands.sort_by_key(|c| (c.p, c.start, c.m));
    cands.truncate(hcfg.max_total);
    cands
        .into_iter()
        .map(|c| AbelianWitness::new(c.start, c.m, c.p).expect("harvest candidates are valid"))
        .collect()
}

/// All-distance anagram pairs at one fixed block length `m`: a single
/// rolling pass records the first occurrence of each window signature, and
/// every later site with the same signature at distance `> m` pairs with
/// it. Unlike the per-period scan this puts no bound on the period, which
/// is how large-`m` pairs (whose smallest periods are far above `m`) are
/// found cheaply.
pub fn harvest_pairs_with_m(host: &Word, m: usize, max_pairs: usize) -> Vec<AbelianWitness> {
    let letters = host.letters();
    let n = host.alphabet().size();
    let mut out = Vec::new();
    if m < 1 || letters.len() < 2 * m + 1 || max_pairs == 0 {
        return out;
    }
    let mut sig = WideSig::init(&letters[..m], n);
    let mut first: HashMap<WideSig, u32, SigBuild> = HashMap::default();
    for j in 0..=letters.len() - m {
        if j > 0 {
            sig.advance(letters[j - 1], letters[j - 1 + m]);
        }
        match first.get(&sig) {
            Some(&j0) if j - j0 as usize > m => {
                out.push(
                    AbelianWitness::new(j0 as usize, m, j - j0 as usize)
                        .expect("collision pairs are well-formed"),
                );
                if out.len() >= max_pairs {
                    break;
                }
            }
            Some(_) => {}
            None => {
                first.insert(sig.clone(), j as u32);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Internals
// ---------------------------------------------------------------------------

const NONE: u32 = u32::MAX;

/// Largest period representable in 16-bit signature lanes (intermediate
/// counts reach p + 1 during an update).
const MAX_PACKED_PERIOD: usize = u16::MAX as usize - 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cand {
    start: usize,
    m: usize,
    p: usize,
}

impl Cand {
    /// Strictly better: larger exponent, then smaller period, then smaller
    /// start. A strict total order on distinct candidates, so folds over it
    /// are order-independent.
    fn beats(&self, other: &Cand) -> bool {
        let lhs = self.m as u128 * other.p as u128;
        let rhs = other.m as u128 * self.p as u128;
        lhs > rhs
            || (lhs == rhs && (self.p, self.start) < (other.p, other.start))
    }
}

fn merge_best(a: Option<Cand>, b: Option<Cand>) -> Option<Cand> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.beats(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn effective_workers(requested: usize, jobs: usize) -> usize {
    let auto = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    let w = if requested == 0 { auto } else { requested };
    w.max(1).min(jobs.max(1))
}

/// FxHash-style deterministic hasher; signature keys are already wide, so a
/// multiply-fold spreads them well enough and keeps scans reproducible.
#[derive(Default)]
struct SigHasher(u64);

impl Hasher for SigHasher {
    #[inline]
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    #[inline]
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        self.0 ^= self.0 >> 29;
    }

    #[inline]
    fn write_u128(&mut self, v: u128) {
        self.write_u64(v as u64);
        self.write_u64((v >> 64) as u64);
    }

    #[inline]
    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_u8(&mut self, v: u8) {
        self.write_u64(v as u64);
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

type SigBuild = BuildHasherDefault<SigHasher>;

/// Window signature rolled across the host at a fixed period.
trait Signature: Eq + Hash + Clone {
    fn init(window: &[u8], n: usize) -> Self;
    fn advance(&mut self, remove: u8, add: u8);
}

/// All letter counts packed into 16-bit lanes of one `u128`; valid for
/// alphabets up to 8 letters and periods up to `MAX_PACKED_PERIOD`.
/// Adding before removing keeps every lane in `[0, p+1]`, so lane updates
/// never carry across boundaries.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct PackedSig(u128);

impl Signature for PackedSig {
    fn init(window: &[u8], _n: usize) -> Self {
        let mut v = 0u128;
        for &a in window {
            v += 1u128 << (16 * a as u32);
        }
        PackedSig(v)
    }

    #[inline]
    fn advance(&mut self, remove: u8, add: u8) {
        self.0 += 1u128 << (16 * add as u32);
        self.0 -= 1u128 << (16 * remove as u32);
    }
}

/// Fallback signature for large alphabets or periods beyond the packed
/// range: explicit per-letter counts.
#[derive(Clone, PartialEq, Eq, Hash)]
struct WideSig(Box<[u32]>);

impl Signature for WideSig {
    fn init(window: &[u8], n: usize) -> Self {
        let mut counts = vec![0u32; n].into_boxed_slice();
        for &a in window {
            counts[a as usize] += 1;
        }
        WideSig(counts)
    }

    #[inline]
    fn advance(&mut self, remove: u8, add: u8) {
        self.0[add as usize] += 1;
        self.0[remove as usize] -= 1;
    }
}

#[derive(Clone, Copy)]
struct Entry {
    head: u32,
    tail: u32,
}

/// Per-worker reusable state: signature tables plus the arena that chains
/// equal-signature sites in ascending order.
struct Scratch {
    packed: HashMap<PackedSig, Entry, SigBuild>,
    wide: HashMap<WideSig, Entry, SigBuild>,
    next: Vec<u32>,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            packed: HashMap::default(),
            wide: HashMap::default(),
            next: Vec::new(),
        }
    }
}

/// Walks the chain of equal-signature sites for the current position, in
/// ascending site order (hence descending gap).
struct ListWalk<'a> {
    next: &'a [u32],
    cur: u32,
}

impl ListWalk<'_> {
    fn next_site(&mut self) -> Option<usize> {
        if self.cur == NONE {
            None
        } else {
            let site = self.cur as usize;
            self.cur = self.next[site];
            Some(site)
        }
    }
}

/// One pass over all window positions for a fixed period. For every site
/// `j` whose signature has earlier unexpired occurrences, `on_site` receives
/// `j` and a walk over those occurrences (earliest first, i.e. maximal gap
/// first).
fn period_pass<S: Signature>(
    letters: &[u8],
    n: usize,
    p: usize,
    window: usize,
    map: &mut HashMap<S, Entry, SigBuild>,
    next: &mut Vec<u32>,
    mut on_site: impl FnMut(usize, &mut ListWalk<'_>),
) {
    let n_sites = letters.len() - p + 1;
    map.clear();
    next.clear();
    next.resize(n_sites, NONE);
    let mut sig = S::init(&letters[..p], n);
    for j in 0..n_sites {
        if j > 0 {
            sig.advance(letters[j - 1], letters[j - 1 + p]);
        }
        match map.get_mut(&sig) {
            Some(entry) => {
                let expire_before = j.saturating_sub(window) as u32;
                let mut head = entry.head;
                while head != NONE && head < expire_before {
                    head = next[head as usize];
                }
                if head == NONE {
                    // every earlier occurrence expired; restart the chain
                    entry.head = j as u32;
                    entry.tail = j as u32;
                } else {
                    entry.head = head;
                    let mut walk = ListWalk { next, cur: head };
                    on_site(j, &mut walk);
                    next[entry.tail as usize] = j as u32;
                    entry.tail = j as u32;
                }
            }
            None => {
                map.insert(
                    sig.clone(),
                    Entry {
                        head: j as u32,
                        tail: j as u32,
                    },
                );
            }
        }
    }
}

fn worker_scan_max(
    letters: &[u8],
    n: usize,
    cap: usize,
    p_max: usize,
    stride: usize,
    offset: usize,
) -> Option<Cand> {
    let mut scratch = Scratch::new();
    let mut best: Option<Cand> = None;
    let mut p = 2 + offset;
    while p <= p_max {
        let window = cap.min(p - 1);
        // A period can only matter if its best conceivable exponent
        // 1 + window/p beats the best held so far. Candidates equal to the
        // current best lose the smaller-period tie-break anyway, because
        // each worker visits its periods in ascending order.
        let worth_it = window >= 1
            && best
                .as_ref()
                .is_none_or(|b| window as u128 * b.p as u128 > b.m as u128 * p as u128);
        if worth_it {
            let on_site = |best: &mut Option<Cand>, j: usize, walk: &mut ListWalk<'_>| {
                if let Some(site) = walk.next_site() {
                    let cand = Cand {
                        start: site,
                        m: j - site,
                        p,
                    };
                    if best.as_ref().is_none_or(|b| cand.beats(b)) {
                        *best = Some(cand);
                    }
                }
            };
            if n <= 8 && p <= MAX_PACKED_PERIOD {
                period_pass::<PackedSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.packed,
                    &mut scratch.next,
                    |j, walk| on_site(&mut best, j, walk),
                );
            } else {
                period_pass::<WideSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.wide,
                    &mut scratch.next,
                    |j, walk| on_site(&mut best, j, walk),
                );
            }
        }
        p += stride;
    }
    best
}

/// Smallest m that violates the threshold at period p: m > (c-1) * p.
fn min_violating_m(p: usize, diff: &BigInt, den: &BigInt) -> usize {
    let t = (BigInt::from(p) * diff) / den;
    t.to_usize().expect("threshold < 2 keeps t <= p") + 1
}

fn worker_scan_violations(
    letters: &[u8],
    n: usize,
    cap: usize,
    p_max: usize,
    diff: &BigInt,
    den: &BigInt,
    stride: usize,
    offset: usize,
) -> Vec<Cand> {
    let mut scratch = Scratch::new();
    let mut out = Vec::new();
    let mut p = 2 + offset;
    while p <= p_max {
        let window = cap.min(p - 1);
        let min_gap = min_violating_m(p, diff, den);
        if window >= 1 && min_gap <= window {
            let on_site = |out: &mut Vec<Cand>, j: usize, walk: &mut ListWalk<'_>| {
                while let Some(site) = walk.next_site() {
                    let m = j - site;
                    if m < min_gap {
                        break;
                    }
                    out.push(Cand { start: site, m, p });
                }
            };
            if n <= 8 && p <= MAX_PACKED_PERIOD {
                period_pass::<PackedSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.packed,
                    &mut scratch.next,
                    |j, walk| on_site(&mut out, j, walk),
                );
            } else {
                period_pass::<WideSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.wide,
                    &mut scratch.next,
                    |j, walk| on_site(&mut out, j, walk),
                );
            }
        }
        p += stride;
    }
    out
}

fn worker_harvest(
    letters: &[u8],
    n: usize,
    hcfg: &HarvestConfig,
    p_min: usize,
    p_max: usize,
    stride: usize,
    offset: usize,
) -> Vec<Cand> {
    let mut scratch = Scratch::new();
    let mut out = Vec::new();
    let mut p = p_min + offset;
    while p <= p_max {
        let window = hcfg.cap.min(p - 1);
        if window >= hcfg.min_m {
            let mut taken = 0usize;
            let on_site = |out: &mut Vec<Cand>, taken: &mut usize, j: usize, walk: &mut ListWalk<'_>| {
                while *taken < hcfg.per_period {
                    let Some(site) = walk.next_site() else { break };
                    let m = j - site;
                    if m < hcfg.min_m {
                        break;
                    }
                    out.push(Cand { start: site, m, p });
                    *taken += 1;
                }
            };
            if n <= 8 && p <= MAX_PACKED_PERIOD {
                period_pass::<PackedSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.packed,
                    &mut scratch.next,
                    |j, walk| on_site(&mut out, &mut taken, j, walk),
                );
            } else {
                period_pass::<WideSig>(
                    letters,
                    n,
                    p,
                    window,
                    &mut scratch.wide,
                    &mut scratch.next,
                    |j, walk| on_site(&mut out, &mut taken, j, walk),
                );
            }
        }
        p += stride;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ratio;
    use crate::word::{shift, Alphabet, Word};
    use proptest::prelude::*;

    fn w(text: &str, n: usize) -> Word {
        Word::from_text(text, Alphabet::new(n).unwrap()).unwrap()
    }

    fn cfg(cap: usize) -> ScanConfig {
        ScanConfig::new(cap).unwrap()
    }

    #[test]
    fn scan_max_examples() {
        let best = scan_max(&w("0101", 8), &cfg(1000)).unwrap();
        assert_eq!((best.start, best.m, best.p), (0, 1, 2));
        assert_eq!(best.exponent, ratio(3, 2));

        assert!(scan_max(&w("01234567", 8), &cfg(1000)).is_none());
        assert!(scan_max(&w("00", 8), &cfg(1000)).is_none());

        let best = scan_max(&w("000", 8), &cfg(1000)).unwrap();
        assert_eq!((best.start, best.m, best.p), (0, 1, 2));
    }

    #[test]
    fn oracle_examples() {
        let best = oracle_scan(&w("0101", 8), &cfg(1000)).unwrap().unwrap();
        assert_eq!((best.start, best.m, best.p), (0, 1, 2));
        assert!(oracle_scan(&w("00", 8), &cfg(1000)).unwrap().is_none());
        let best = oracle_scan(&w("000", 8), &cfg(1000)).unwrap().unwrap();
        assert_eq!((best.start, best.m, best.p), (0, 1, 2));
        assert_eq!(best.exponent, ratio(3, 2));

        let too_big = Word::new(vec![0; ORACLE_GUARD + 1], Alphabet::new(2).unwrap()).unwrap();
        assert!(matches!(
            oracle_scan(&too_big, &cfg(10)),
            Err(Error::OracleSizeExceeded { .. })
        ));
    }

    #[test]
    fn violations_examples() {
        let t43 = cfg(1000).with_threshold(ratio(4, 3)).unwrap();
        let vs = scan_violations(&w("0101", 8), &t43).unwrap();
        let triples: Vec<_> = vs.iter().map(|v| (v.start, v.m, v.p)).collect();
        assert_eq!(triples, vec![(0, 1, 2), (1, 1, 2)]);
        assert!(vs.iter().all(|v| v.exponent == ratio(3, 2)));

        let t32 = cfg(1000).with_threshold(ratio(3, 2)).unwrap();
        assert!(scan_violations(&w("0101", 8), &t32).unwrap().is_empty());

        assert!(matches!(
            scan_violations(&w("0101", 8), &cfg(1000)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ScanConfig::new(0).is_err());
        assert!(cfg(10).with_threshold(ratio(2, 1)).is_err());
        assert!(cfg(10).with_threshold(ratio(1, 1)).is_err());
        assert!(cfg(10).with_threshold(ratio(5, 4)).is_ok());
    }

    #[test]
    fn witness_check_examples() {
        let host = w("0101", 8);
        let good = AbelianWitness::new(0, 1, 2).unwrap();
        assert!(witness_check(&host, &good).unwrap());

        let tampered = AbelianWitness::from_parts(0, 1, 2, ratio(2, 1));
        assert!(!witness_check(&host, &tampered).unwrap());

        let out = AbelianWitness::new(3, 1, 2).unwrap();
        assert!(matches!(
            witness_check(&host, &out),
            Err(Error::OutOfRange { .. })
        ));

        // Non-anagram blocks.
        let host = w("0011", 8);
        let wrong = AbelianWitness::new(0, 1, 2).unwrap();
        assert!(!witness_check(&host, &wrong).unwrap());
    }

    #[test]
    fn scan_agrees_with_oracle_on_fixed_point_prefix() {
        let f = crate::default_morphism();
        let f3 = f.fixed_point_prefix(3).unwrap();
        let c = cfg(1000);
        let fast = scan_max(&f3, &c).unwrap();
        let slow = oracle_scan(&f3, &c).unwrap().unwrap();
        assert_eq!(fast, slow);
        assert!(witness_check(&f3, &fast).unwrap());
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let f = crate::default_morphism();
        let f3 = f.fixed_point_prefix(3).unwrap();
        let base = scan_max(&f3, &cfg(1000).with_workers(1));
        for workers in [2, 3, 8] {
            assert_eq!(base, scan_max(&f3, &cfg(1000).with_workers(workers)));
        }
        let t = ratio(101, 100);
        let base = scan_violations(&f3, &cfg(50).with_threshold(t.clone()).unwrap()).unwrap();
        for workers in [2, 5] {
            let got = scan_violations(
                &f3,
                &cfg(50).with_threshold(t.clone()).unwrap().with_workers(workers),
            )
            .unwrap();
            assert_eq!(base, got);
        }
    }

    #[test]
    fn shift_invariance() {
        let f = crate::default_morphism();
        let f2 = f.fixed_point_prefix(2).unwrap();
        let base = scan_max(&f2, &cfg(1000)).unwrap();
        for i in 1..8 {
            let shifted = scan_max(&shift(&f2, i), &cfg(1000)).unwrap();
            assert_eq!(
                (base.start, base.m, base.p, &base.exponent),
                (shifted.start, shifted.m, shifted.p, &shifted.exponent)
            );
        }
    }

    #[test]
    fn wide_signature_path_matches_oracle() {
        // Alphabet 9 exceeds the packed-lane budget and exercises WideSig.
        let alph = Alphabet::new(9).unwrap();
        let letters: Vec<u8> = (0..240u32).map(|i| ((i * 7 + i * i * 5) % 9) as u8).collect();
        let host = Word::new(letters, alph).unwrap();
        let c = cfg(40);
        assert_eq!(scan_max(&host, &c), oracle_scan(&host, &c).unwrap());
    }

    #[test]
    fn fixed_m_harvest_finds_unbounded_periods() {
        let f = crate::default_morphism();
        let f4 = f.fixed_point_prefix(4).unwrap();
        let pairs = harvest_pairs_with_m(&f4, 100, 20);
        assert_eq!(pairs.len(), 20);
        for w in &pairs {
            assert_eq!(w.m, 100);
            assert!(w.p > 100);
            assert!(witness_check(&f4, w).unwrap());
        }
        assert!(harvest_pairs_with_m(&f4, 0, 20).is_empty());
        let short = w("0101", 8);
        assert!(harvest_pairs_with_m(&short, 2, 20).is_empty());
    }

    #[test]
    fn harvest_is_deterministic_and_sound() {
        let f = crate::default_morphism();
        let f3 = f.fixed_point_prefix(3).unwrap();
        let mut hcfg = HarvestConfig {
            cap: 200,
            min_m: 10,
            per_period: 2,
            max_total: 100,
            period_min: 2,
            period_max: 400,
            workers: 1,
        };
        let base = harvest_anagram_pairs(&f3, &hcfg);
        assert!(!base.is_empty());
        for v in &base {
            assert!(witness_check(&f3, v).unwrap());
            assert!(v.m >= 10);
        }
        hcfg.workers = 3;
        assert_eq!(base, harvest_anagram_pairs(&f3, &hcfg));
    }

    fn arb_host() -> impl Strategy<Value = Word> {
        (2usize..=8).prop_flat_map(|n| {
            proptest::collection::vec(0..n as u8, 0..=48)
                .prop_map(move |ls| Word::new(ls, Alphabet::new(n).unwrap()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_oracle(host in arb_host(), cap in 1usize..=16) {
            let c = cfg(cap);
            prop_assert_eq!(scan_max(&host, &c), oracle_scan(&host, &c).unwrap());
        }

        #[test]
        fn monotone_in_cap(host in arb_host(), cap in 1usize..=12) {
            let small = scan_max(&host, &cfg(cap));
            let large = scan_max(&host, &cfg(cap + 4));
            match (small, large) {
                (Some(s), Some(l)) => prop_assert!(l.exponent >= s.exponent),
                (Some(_), None) => prop_assert!(false, "witness lost when enlarging cap"),
                _ => {}
            }
        }

        #[test]
        fn planted_pairs_are_found(
            seed in proptest::collection::vec(0u8..4, 24..40),
            block in proptest::collection::vec(0u8..4, 2..8),
            gap in 1usize..6,
        ) {
            // Plant x1 and a reversal of it at distance p = |x1| + gap.
            let alph = Alphabet::new(4).unwrap();
            let m = block.len();
            let p = m + gap;
            let mut letters = seed;
            let insert_at = letters.len();
            letters.extend_from_slice(&block);
            letters.extend(std::iter::repeat_n(0u8, gap));
            letters.extend(block.iter().rev());
            let host = Word::new(letters, alph).unwrap();
            let threshold = ratio(p as i64 + m as i64 - 1, p as i64)
                .min(ratio(199, 100))
                .max(ratio(101, 100));
            let c = cfg(m).with_threshold(threshold).unwrap();
            let vs = scan_violations(&host, &c).unwrap();
            prop_assert!(
                vs.iter().any(|v| (v.start, v.m, v.p) == (insert_at, m, p)),
                "planted pair at ({}, {}, {}) missing from {:?}",
                insert_at, m, p,
                vs.iter().map(|v| (v.start, v.m, v.p)).collect::<Vec<_>>()
            );
        }
    }
}
