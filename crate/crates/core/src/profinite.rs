//! Lasso evaluation of structured words in the annotated transition semigroup.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::automata::{eval_word, fold, lasso_accept, map_letters, AnnotatedTransform, DMuller, LassoWord, StateSet};
use crate::error::{Error, Result};
use crate::word::{Alphabet, BlockPowerDesc, Exponent, MorphicDesc, OmegaWord, Structure};

/// Iteration cap for function-space cycle detection.
pub const DEFAULT_STEP_BUDGET: u64 = 1 << 20;

fn check_morphic(d: &MorphicDesc, out: &Alphabet) -> Result<Vec<u32>> {
    let k = d.tau.len();
    if d.mu.len() != k || (d.start as usize) >= k {
        return Err(Error::input("substitution, coding and start letter disagree on the alphabet size"));
    }
    if let Some(c) = d.tau.iter().position(Vec::is_empty) {
        return Err(Error::input(format!("substitution erases letter {c}")));
    }
    if d.tau.iter().flatten().any(|&c| c as usize >= k) || d.mu.iter().any(|&c| c as usize >= out.len()) {
        return Err(Error::input("substitution or coding leaves its alphabet"));
    }
    let img = &d.tau[d.start as usize];
    if img[0] != d.start {
        return Err(Error::input("the image of the start letter must begin with the start letter"));
    }
    if img.len() == 1 {
        return Err(Error::NotGrowing("the fixed point is the single letter repeated or finite".into()));
    }
    Ok(img[1..].to_vec())
}

/// `σ(mu(tau^ω(start)))` as a lasso. Non-erasing substitutions with
/// `tau(start) = start·w`, `w` non-empty, always grow.
pub fn morphic_lasso(a: &DMuller, d: &MorphicDesc, out: &Alphabet, budget: u64) -> Result<LassoWord> {
    let w = check_morphic(d, out)?;
    let map = a.letter_map(out)?;
    let n = a.states();
    let mut h: Vec<AnnotatedTransform> =
        d.mu.iter().map(|&c| eval_word(a, &[map[c as usize]])).collect::<Result<_>>()?;
    let mut seen: HashMap<Vec<AnnotatedTransform>, usize> = HashMap::new();
    let mut blocks = Vec::new();
    let mut hist = Vec::new();
    let (n0, p) = loop {
        if let Some(&i) = seen.get(&h) {
            break (i, hist.len() - i);
        }
        if hist.len() as u64 >= budget {
            return Err(Error::Budget(format!("no repetition among {budget} substitution iterates")));
        }
        seen.insert(h.clone(), hist.len());
        blocks.push(fold(n, &w.iter().map(|&c| h[c as usize].clone()).collect::<Vec<_>>()));
        let next = d.tau.iter().map(|img| fold(n, &img.iter().map(|&c| h[c as usize].clone()).collect::<Vec<_>>())).collect();
        hist.push(std::mem::replace(&mut h, next));
    };
    let mut head = vec![hist[0][d.start as usize].clone()];
    head.extend_from_slice(&blocks[..n0]);
    LassoWord::new(head, blocks[n0..n0 + p].to_vec())
}

pub fn accept_morphic(a: &DMuller, d: &MorphicDesc, out: &Alphabet) -> Result<(bool, StateSet)> {
    let l = morphic_lasso(a, d, out, DEFAULT_STEP_BUDGET)?;
    Ok(lasso_accept(a, &l, a.initial))
}

/// Claim that `f(n + period) ≡ f(n) (mod modulus)` and, unless `f` is
/// constant, `f(n) ≥ floor` for every `n ≥ from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentCertificate {
    pub from: u64,
    pub modulus: u64,
    pub period: u64,
    pub floor: u64,
}

pub fn exponent_value(e: &Exponent, n: u64) -> BigUint {
    match e {
        Exponent::FactorialGap => {
            let fact: BigUint = (1..=n).map(BigUint::from).product();
            fact * n - BigUint::one()
        }
        Exponent::Linear { a, b } => BigUint::from(*a) * n + *b,
    }
}

/// Certificate for the power cycle of a letter with tail `floor` and cycle
/// length `modulus`.
pub fn exponent_certificate(e: &Exponent, floor: u64, modulus: u64) -> ExponentCertificate {
    let big_floor = BigUint::from(floor);
    let mut from = 1;
    match e {
        Exponent::FactorialGap => {
            // n! vanishes mod m once n ≥ m
            from = from.max(modulus);
            while exponent_value(e, from) < big_floor {
                from += 1;
            }
            ExponentCertificate { from, modulus, period: 1, floor }
        }
        Exponent::Linear { a, .. } => {
            if *a == 0 {
                return ExponentCertificate { from: 1, modulus, period: 1, floor };
            }
            while exponent_value(e, from) < big_floor {
                from += 1;
            }
            let period = modulus / num_integer::gcd(*a % modulus, modulus).max(1);
            ExponentCertificate { from, modulus, period: period.max(1), floor }
        }
    }
}

/// Exact recheck on `samples` periods past `from`.
pub fn check_certificate(e: &Exponent, c: &ExponentCertificate, samples: u64) -> Result<()> {
    if c.modulus == 0 || c.period == 0 {
        return Err(Error::Certificate("zero modulus or period".into()));
    }
    let m = BigUint::from(c.modulus);
    for n in c.from..c.from + samples * c.period {
        let (x, y) = (exponent_value(e, n), exponent_value(e, n + c.period));
        let constant = matches!(e, Exponent::Linear { a: 0, .. });
        if !constant && (x < BigUint::from(c.floor) || y < x) {
            return Err(Error::Certificate(format!("exponent below the stated floor at n = {n}")));
        }
        if &x % &m != &y % &m {
            return Err(Error::Certificate(format!("exponent residues differ at n = {n} and n + {}", c.period)));
        }
    }
    Ok(())
}

/// Powers of `m`: `(tail, cycle, powers)` with `powers[i] = m^i` for
/// `i < tail + cycle` and `m^(tail + cycle) = m^tail`.
pub fn power_cycle(m: &AnnotatedTransform) -> (u64, u64, Vec<AnnotatedTransform>) {
    let mut seen = HashMap::new();
    let mut powers = Vec::new();
    let mut cur = AnnotatedTransform::identity(m.states());
    loop {
        if let Some(&i) = seen.get(&cur) {
            return (i as u64, (powers.len() - i) as u64, powers);
        }
        seen.insert(cur.clone(), powers.len());
        powers.push(cur.clone());
        cur = cur.compose(m);
    }
}

fn power_index(f: &BigUint, tail: u64, cycle: u64) -> usize {
    match f.to_u64() {
        Some(v) if v < tail => v as usize,
        _ => (tail + ((f - BigUint::from(tail)) % cycle).to_u64().unwrap()) as usize,
    }
}

fn minimal_period<T: PartialEq>(b: &[T]) -> usize {
    (1..=b.len()).find(|&p| b.len().is_multiple_of(p) && (p..b.len()).all(|i| b[i] == b[i - p])).unwrap()
}

/// Lasso for `head · Π sep·c^{f(n)}` under a certificate on `f`.
pub fn block_power_lasso_with(
    a: &DMuller,
    d: &BlockPowerDesc,
    out: &Alphabet,
    cert: &ExponentCertificate,
) -> Result<LassoWord> {
    let map = a.letter_map(out)?;
    let c = eval_word(a, &[map[d.c as usize]])?;
    let (tail, cycle, powers) = power_cycle(&c);
    if !cert.modulus.is_multiple_of(cycle) || cert.floor < tail {
        return Err(Error::Certificate(format!(
            "certificate (modulus {}, floor {}) does not cover the power cycle (tail {tail}, length {cycle})",
            cert.modulus, cert.floor
        )));
    }
    check_certificate(&d.exponent, cert, 8)?;
    let sep = eval_word(a, &map_letters(&map, &d.sep))?;
    let block = |n: u64| sep.compose(&powers[power_index(&exponent_value(&d.exponent, n), tail, cycle)]);
    let mut head = vec![eval_word(a, &map_letters(&map, &d.head))?];
    head.extend((1..cert.from).map(block));
    let mut b: Vec<_> = (cert.from..cert.from + cert.period).map(block).collect();
    b.truncate(minimal_period(&b));
    LassoWord::new(head, b)
}

pub fn block_power_lasso(a: &DMuller, d: &BlockPowerDesc, out: &Alphabet) -> Result<LassoWord> {
    let map = a.letter_map(out)?;
    let (tail, cycle, _) = power_cycle(&eval_word(a, &[map[d.c as usize]])?);
    let cert = exponent_certificate(&d.exponent, tail, cycle);
    block_power_lasso_with(a, d, out, &cert)
}

/// Lasso for whichever finite description the word carries.
pub fn word_lasso(a: &DMuller, w: &OmegaWord) -> Result<LassoWord> {
    word_lasso_with(a, w, DEFAULT_STEP_BUDGET)
}

pub fn word_lasso_with(a: &DMuller, w: &OmegaWord, budget: u64) -> Result<LassoWord> {
    let out = w.alphabet();
    match w.structure() {
        Some(Structure::UltPeriodic { a: pre, b }) => {
            let map = a.letter_map(out)?;
            let ev = |u: &[u32]| eval_word(a, &map_letters(&map, u));
            LassoWord::new(vec![ev(pre)?], vec![ev(b)?])
        }
        Some(Structure::Morphic(d)) => morphic_lasso(a, d, out, budget),
        Some(Structure::BlockPower(d)) => block_power_lasso(a, d, out),
        None => Err(Error::ClassificationUnavailable(format!(
            "{} has no substitutive or block-power description",
            w.name()
        ))),
    }
}

pub fn accept_profinite(a: &DMuller, w: &OmegaWord) -> Result<(bool, StateSet)> {
    Ok(lasso_accept(a, &word_lasso(a, w)?, a.initial))
}

/// Prefix of the fixed point `tau^ω(start)` before coding, for checks.
pub fn fixed_point_prefix(d: &MorphicDesc, len: usize) -> Vec<u32> {
    let mut x = vec![d.start];
    while x.len() < len {
        let next: Vec<u32> = x.iter().flat_map(|&c| d.tau[c as usize].iter().copied()).collect();
        if next.len() == x.len() {
            break;
        }
        x = next;
    }
    x.truncate(len);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{set_from, AnnotatedTransform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin() -> Alphabet {
        Alphabet::from_chars("01").unwrap()
    }

    fn fib() -> MorphicDesc {
        MorphicDesc { tau: vec![vec![0, 1], vec![0]], start: 0, mu: vec![0, 1] }
    }

    fn thue_morse() -> MorphicDesc {
        MorphicDesc { tau: vec![vec![0, 1], vec![1, 0]], start: 0, mu: vec![0, 1] }
    }

    fn brute(a: &DMuller, letters: &[usize]) -> StateSet {
        let mut q = a.initial;
        let mut inf = 0;
        for (i, &c) in letters.iter().enumerate() {
            if i >= letters.len() / 2 {
                inf |= 1 << q;
            }
            q = a.step(q, c);
        }
        inf
    }

    #[test]
    fn non_growing_is_refused() {
        let a = DMuller::random(&mut ChaCha8Rng::seed_from_u64(0), 2, &["0"]);
        let d = MorphicDesc { tau: vec![vec![0]], start: 0, mu: vec![0] };
        let e = morphic_lasso(&a, &d, &Alphabet::from_chars("0").unwrap(), 100).unwrap_err();
        assert!(matches!(e, Error::NotGrowing(_)));
    }

    #[test]
    fn morphic_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [fib(), thue_morse()] {
            let x: Vec<usize> = fixed_point_prefix(&d, 20_000).iter().map(|&c| d.mu[c as usize] as usize).collect();
            for _ in 0..40 {
                let k = rng.gen_range(1..=5);
                let a = DMuller::random(&mut rng, k, &["0", "1"]);
                let (ok, inf) = accept_morphic(&a, &d, &bin()).unwrap();
                assert_eq!(inf, brute(&a, &x));
                assert_eq!(ok, a.accepts_set(inf));
            }
        }
    }

    #[test]
    fn squared_substitution_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = fib();
        let sq: Vec<Vec<u32>> = d.tau.iter().map(|img| img.iter().flat_map(|&c| d.tau[c as usize].clone()).collect()).collect();
        let d2 = MorphicDesc { tau: sq, ..d.clone() };
        for _ in 0..30 {
            let a = DMuller::random(&mut rng, 4, &["0", "1"]);
            assert_eq!(accept_morphic(&a, &d, &bin()).unwrap(), accept_morphic(&a, &d2, &bin()).unwrap());
        }
    }

    fn factorial() -> BlockPowerDesc {
        BlockPowerDesc { head: vec![0], sep: vec![1], c: 0, exponent: Exponent::FactorialGap }
    }

    fn block_letters(d: &BlockPowerDesc, len: usize) -> Vec<usize> {
        let mut x: Vec<usize> = d.head.iter().map(|&c| c as usize).collect();
        let mut n = 1;
        while x.len() < len {
            x.extend(d.sep.iter().map(|&c| c as usize));
            let f = exponent_value(&d.exponent, n).to_usize().unwrap_or(len).min(len);
            x.extend(std::iter::repeat_n(d.c as usize, f));
            n += 1;
        }
        x.truncate(len);
        x
    }

    #[test]
    fn factorial_prefix_and_exponents() {
        let s: String = block_letters(&factorial(), 11).iter().map(|c| c.to_string()).collect();
        assert_eq!(s, "01100010000");
        assert_eq!(exponent_value(&Exponent::FactorialGap, 3), BigUint::from(17u32));
    }

    /// Block-by-block run with each power reduced along the orbit of the
    /// current state; states seen in blocks 40..80 form the infinity set.
    fn per_state_inf(a: &DMuller, d: &BlockPowerDesc) -> StateSet {
        let mut q = a.initial;
        for &c in &d.head {
            q = a.step(q, c as usize);
        }
        let mut inf = 0;
        for n in 1..80u64 {
            let mut vis = 1u64 << q;
            for &c in &d.sep {
                q = a.step(q, c as usize);
                vis |= 1 << q;
            }
            let mut orbit = vec![q];
            while !orbit[..orbit.len() - 1].contains(orbit.last().unwrap()) {
                orbit.push(a.step(*orbit.last().unwrap(), d.c as usize));
            }
            let last = *orbit.last().unwrap();
            let t = orbit.iter().position(|&r| r == last).unwrap() as u64;
            let cyc = orbit.len() as u64 - 1 - t;
            let f = exponent_value(&d.exponent, n);
            let idx = match f.to_u64() {
                Some(v) if v < t + cyc => v,
                _ => t + ((f.clone() - BigUint::from(t)) % cyc).to_u64().unwrap(),
            };
            let reach = f.to_u64().map_or(orbit.len() as u64 - 1, |v| v.min(orbit.len() as u64 - 1));
            vis |= orbit[..=reach as usize].iter().fold(0, |s, &r| s | 1 << r);
            q = orbit[idx as usize];
            if n >= 40 {
                inf |= vis;
            }
        }
        inf
    }

    #[test]
    fn block_power_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let linear = BlockPowerDesc { head: vec![], sep: vec![1, 1], c: 0, exponent: Exponent::Linear { a: 3, b: 1 } };
        for d in [factorial(), linear] {
            for _ in 0..60 {
                let k = rng.gen_range(1..=5);
                let a = DMuller::random(&mut rng, k, &["0", "1"]);
                let l = block_power_lasso(&a, &d, &bin()).unwrap();
                assert_eq!(lasso_accept(&a, &l, a.initial).1, per_state_inf(&a, &d));
            }
        }
    }

    #[test]
    fn factorial_verdicts() {
        let inf_ones = DMuller::new(
            vec!["0".into(), "1".into()],
            0,
            vec![vec![0, 1], vec![0, 1]],
            [set_from([1]), set_from([0, 1])].into_iter().collect(),
        )
        .unwrap();
        let l = block_power_lasso(&inf_ones, &factorial(), &bin()).unwrap();
        assert!(lasso_accept(&inf_ones, &l, 0).0);
        // state 2 means "just read 11"; accept iff it recurs
        let delta = vec![vec![0, 1], vec![0, 2], vec![0, 2]];
        let acc = (1..8u64).filter(|s| s & 4 != 0).collect();
        let pair = DMuller::new(vec!["0".into(), "1".into()], 0, delta, acc).unwrap();
        let l = block_power_lasso(&pair, &factorial(), &bin()).unwrap();
        assert_eq!(lasso_accept(&pair, &l, 0), (false, set_from([0, 1])));
    }

    #[test]
    fn idempotent_power_collapses() {
        let a = DMuller::new(vec!["0".into(), "1".into()], 0, vec![vec![1, 0], vec![1, 0]], [set_from([1])].into_iter().collect()).unwrap();
        let d = BlockPowerDesc { head: vec![], sep: vec![1], c: 0, exponent: Exponent::Linear { a: 1, b: 0 } };
        assert_eq!(block_power_lasso(&a, &d, &bin()).unwrap().b.len(), 1);
        let idem = eval_word(&a, &[0]).unwrap();
        assert_eq!(idem.compose(&idem).end, idem.end);
        assert_ne!(idem, AnnotatedTransform::identity(2));
    }

    #[test]
    fn false_certificate_is_rejected() {
        let d = BlockPowerDesc { head: vec![], sep: vec![1], c: 0, exponent: Exponent::Linear { a: 1, b: 0 } };
        let bad = ExponentCertificate { from: 4, modulus: 6, period: 1, floor: 0 };
        assert!(matches!(check_certificate(&d.exponent, &bad, 8), Err(Error::Certificate(_))));
    }
}
