//! Word generators and the named examples.

pub mod sign;
pub mod sturmian;

use std::collections::HashSet;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::profinite::exponent_value;
use crate::torus::spec::periodic_spec;
use crate::torus::TorusSpec;
use crate::word::image_coding;
use crate::word::{
    Alphabet, ApOracle, BlockPowerDesc, Exponent, Geometry, Letter, LetterSource, MorphicDesc, OmegaWord, Structure,
};

pub use sign::{gap_witness, plus_minus_occurrences, sign_drift, sign_pair, sign_static, DriftSignSpec};
pub use sturmian::{fib_xi, sturmian, SturmianSpec};

/// Alphabet of the distinct characters of `s`, sorted.
pub fn chars_alphabet(s: &str) -> Result<Alphabet> {
    let mut cs: Vec<char> = s.chars().collect();
    cs.sort_unstable();
    cs.dedup();
    Alphabet::new(cs.iter().map(|c| c.to_string()))
}

/// `a · b^ω` with the exact bound `R(u) = |a| + 2|b| + |u|`.
pub fn ult_periodic(name: impl Into<String>, alphabet: Alphabet, a: Vec<Letter>, b: Vec<Letter>) -> Result<OmegaWord> {
    if b.is_empty() {
        return Err(Error::input("the period must be non-empty"));
    }
    if let Some(&c) = a.iter().chain(&b).find(|&&c| c as usize >= alphabet.len()) {
        return Err(Error::UnknownLetter(c.to_string()));
    }
    let spec = periodic_spec(&a, &b, alphabet.len())?;
    let (pa, pb) = (a.clone(), b.clone());
    let src = move |n: u64| -> Result<Letter> {
        Ok(match n.checked_sub(pa.len() as u64) {
            None => pa[n as usize],
            Some(k) => pb[(k % pb.len() as u64) as usize],
        })
    };
    let base = (a.len() + 2 * b.len()) as u64;
    let ap: ApOracle = Arc::new(move |u: &[Letter]| Ok(base + u.len() as u64));
    Ok(OmegaWord::builder(name, alphabet, Arc::new(src))
        .ap(ap)
        .transient_prefix(a.len() as u64)
        .geometry(Geometry::Torus(Arc::new(spec)))
        .structure(Structure::UltPeriodic { a, b })
        .build())
}

/// `a · b^ω` over the characters of `a` and `b`.
pub fn ult_periodic_str(a: &str, b: &str) -> Result<OmegaWord> {
    let al = chars_alphabet(&format!("{a}{b}"))?;
    ult_periodic(format!("{a}({b})^ω"), al.clone(), al.parse_word(a)?, al.parse_word(b)?)
}

pub fn periodic_str(u: &str) -> Result<OmegaWord> {
    ult_periodic_str("", u)
}

/// `|τ^k(c)|` per level, saturating.
struct Lengths(Vec<Vec<u64>>);

impl Lengths {
    fn new(tau: &[Vec<Letter>]) -> Lengths {
        Lengths(vec![vec![1; tau.len()]])
    }

    fn level(&mut self, tau: &[Vec<Letter>], k: usize) -> &[u64] {
        while self.0.len() <= k {
            let prev = self.0.last().unwrap();
            let next = tau.iter().map(|img| img.iter().fold(0u64, |s, &d| s.saturating_add(prev[d as usize]))).collect();
            self.0.push(next);
        }
        &self.0[k]
    }
}

struct MorphicSource {
    d: MorphicDesc,
    lens: std::sync::Mutex<Lengths>,
}

impl MorphicSource {
    /// Letters `start..start + out.len()` of the uncoded fixed point.
    fn raw(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        let end = start + out.len() as u64;
        let tau = &self.d.tau;
        let mut lens = self.lens.lock().unwrap();
        let mut k = 0;
        while lens.level(tau, k)[self.d.start as usize] < end.max(1) {
            k += 1;
            if k > 1 << 22 {
                return Err(Error::Budget("fixed point grows too slowly".into()));
            }
        }
        for j in 0..=k {
            lens.level(tau, j);
        }
        let l = &lens.0;
        // (letter, level, next child)
        let mut stack: Vec<(Letter, usize, usize)> = vec![(self.d.start, k, 0)];
        let mut pos = start;
        while stack.last().unwrap().1 > 0 {
            let top = stack.last_mut().unwrap();
            let (c, lv) = (top.0, top.1);
            let img = &tau[c as usize];
            let mut i = 0;
            while pos >= l[lv - 1][img[i] as usize] {
                pos -= l[lv - 1][img[i] as usize];
                i += 1;
            }
            top.2 = i + 1;
            stack.push((img[i], lv - 1, 0));
        }
        let mut filled = 0;
        while filled < out.len() {
            let (c, lv, next) = *stack.last().unwrap();
            if lv == 0 {
                out[filled] = c;
                filled += 1;
                stack.pop();
                continue;
            }
            let img = &tau[c as usize];
            if next < img.len() {
                stack.last_mut().unwrap().2 += 1;
                stack.push((img[next], lv - 1, 0));
            } else {
                stack.pop();
            }
        }
        Ok(())
    }
}

impl LetterSource for MorphicSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        let mut x = [0];
        self.fill(n, &mut x)?;
        Ok(x[0])
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        self.raw(start, out)?;
        for x in out.iter_mut() {
            *x = self.d.mu[*x as usize];
        }
        Ok(())
    }
}

/// Smallest `p` with every entry of the `p`-th incidence power positive.
pub fn primitivity_exponent(tau: &[Vec<Letter>]) -> Option<usize> {
    let k = tau.len();
    let step: Vec<Vec<bool>> =
        tau.iter().map(|img| (0..k).map(|d| img.contains(&(d as Letter))).collect()).collect();
    let mut m = step.clone();
    for p in 1..=(k - 1) * (k - 1) + 1 {
        if m.iter().flatten().all(|&x| x) {
            return Some(p);
        }
        m = (0..k).map(|i| (0..k).map(|j| (0..k).any(|l| m[i][l] && step[l][j])).collect()).collect();
    }
    None
}

/// Two-letter factors of the fixed point: pairs inside images, closed under
/// the pairs straddling `τ(a)τ(b)`.
fn two_factors(tau: &[Vec<Letter>]) -> HashSet<(Letter, Letter)> {
    let mut set: HashSet<(Letter, Letter)> =
        tau.iter().flat_map(|img| img.windows(2).map(|w| (w[0], w[1]))).collect();
    loop {
        let add: Vec<_> = set
            .iter()
            .map(|&(a, b)| (*tau[a as usize].last().unwrap(), tau[b as usize][0]))
            .filter(|p| !set.contains(p))
            .collect();
        if add.is_empty() {
            return set;
        }
        set.extend(add);
    }
}

/// Gap bound for a primitive substitution. Every factor of length `ℓ` sits
/// in `τ^k(ab)` for a two-letter factor `ab` once images at level `k` are
/// at least `ℓ` long; those lie in `τ^{k+j}(start)`, hence in every
/// `τ^{k+j+p}(c)`, and any window of twice the longest such block holds one.
fn primitive_ap(d: &MorphicDesc) -> Result<Option<ApOracle>> {
    let Some(p) = primitivity_exponent(&d.tau) else { return Ok(None) };
    let pairs = two_factors(&d.tau);
    let mut x = vec![d.start];
    let mut j = 0;
    loop {
        let seen: HashSet<(Letter, Letter)> = x.windows(2).map(|w| (w[0], w[1])).collect();
        if pairs.iter().all(|pr| seen.contains(pr)) {
            break;
        }
        x = x.iter().flat_map(|&c| d.tau[c as usize].iter().copied()).collect();
        j += 1;
        if x.len() > 1 << 22 {
            return Err(Error::Budget("two-letter factors not all found in the fixed point prefix".into()));
        }
    }
    let tau = d.tau.clone();
    let lens = std::sync::Mutex::new(Lengths::new(&tau));
    Ok(Some(Arc::new(move |u: &[Letter]| {
        let mut lens = lens.lock().unwrap();
        let mut k = 0;
        while lens.level(&tau, k).iter().copied().min().unwrap() < u.len() as u64 {
            k += 1;
        }
        let top = lens.level(&tau, k + j + p).iter().copied().max().unwrap();
        if top >= u64::MAX / 4 {
            return Err(Error::Budget(format!("gap bound for a factor of length {} overflows", u.len())));
        }
        Ok(2 * top)
    })))
}

/// `μ(τ^ω(start))`; primitive substitutions also get an occurrence bound.
pub fn morphic(name: impl Into<String>, d: MorphicDesc, out: Alphabet) -> Result<OmegaWord> {
    let k = d.tau.len();
    if k == 0 || d.mu.len() != k || d.start as usize >= k {
        return Err(Error::input("substitution, coding and start letter disagree on the alphabet size"));
    }
    if d.tau.iter().any(Vec::is_empty) {
        return Err(Error::input("erasing substitution"));
    }
    if d.tau.iter().flatten().any(|&c| c as usize >= k) || d.mu.iter().any(|&c| c as usize >= out.len()) {
        return Err(Error::input("substitution or coding leaves its alphabet"));
    }
    let img = &d.tau[d.start as usize];
    if img[0] != d.start {
        return Err(Error::input("the image of the start letter must begin with the start letter"));
    }
    if img.len() < 2 {
        return Err(Error::NotGrowing("the start letter is a fixed letter".into()));
    }
    let ap = primitive_ap(&d)?;
    let src = MorphicSource { lens: std::sync::Mutex::new(Lengths::new(&d.tau)), d: d.clone() };
    Ok(OmegaWord::builder(name, out, Arc::new(src)).maybe_ap(ap).structure(Structure::Morphic(d)).build())
}

/// Substitution over the characters of the images; `tau` lists `(letter,
/// image)` pairs and the coding is the identity.
pub fn morphic_str(name: &str, tau: &[(&str, &str)], start: &str) -> Result<OmegaWord> {
    let al = Alphabet::new(tau.iter().map(|(c, _)| c.to_string()))?;
    let mut t = vec![vec![]; al.len()];
    for (c, img) in tau {
        t[al.index(c).unwrap() as usize] = al.parse_word(img)?;
    }
    let start = al.index(start).ok_or_else(|| Error::UnknownLetter(start.to_string()))?;
    let mu = (0..al.len() as Letter).collect();
    morphic(name, MorphicDesc { tau: t, start, mu }, al)
}

struct BlockSource {
    d: BlockPowerDesc,
    /// Start of block `n` (`n ≥ 1`) at index `n - 1`, while it fits in u64.
    starts: Vec<u64>,
}

impl BlockSource {
    fn new(d: BlockPowerDesc) -> BlockSource {
        let mut starts = vec![d.head.len() as u64];
        let mut n = 1;
        loop {
            let f = exponent_value(&d.exponent, n).to_u64();
            let next = f.and_then(|f| starts.last().unwrap().checked_add(d.sep.len() as u64)?.checked_add(f));
            match next {
                Some(s) if s < u64::MAX / 2 => starts.push(s),
                _ => break,
            }
            n += 1;
        }
        BlockSource { d, starts }
    }
}

impl LetterSource for BlockSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        if n < self.d.head.len() as u64 {
            return Ok(self.d.head[n as usize]);
        }
        let i = self.starts.partition_point(|&s| s <= n) - 1;
        if i + 1 == self.starts.len() && self.starts.len() > 1 && n >= u64::MAX / 2 {
            return Err(Error::Budget(format!("position {n} beyond tabulated blocks")));
        }
        let off = n - self.starts[i];
        Ok(if off < self.d.sep.len() as u64 { self.d.sep[off as usize] } else { self.d.c })
    }
}

/// `head · Π_{n ≥ 1} sep · c^{f(n)}`.
pub fn block_power(name: impl Into<String>, d: BlockPowerDesc, out: Alphabet) -> Result<OmegaWord> {
    if let Some(&c) = d.head.iter().chain(&d.sep).chain([&d.c]).find(|&&c| c as usize >= out.len()) {
        return Err(Error::UnknownLetter(c.to_string()));
    }
    if d.sep.is_empty() {
        return Err(Error::input("block separator must be non-empty"));
    }
    let src = BlockSource::new(d.clone());
    Ok(OmegaWord::builder(name, out, Arc::new(src)).structure(Structure::BlockPower(d)).build())
}

/// Boxes of `spec` coded by `alphabet`.
pub fn toric_box(name: impl Into<String>, alphabet: Alphabet, spec: TorusSpec) -> Result<OmegaWord> {
    OmegaWord::from_torus(name, alphabet, spec)
}

pub fn fibonacci() -> OmegaWord {
    morphic_str("fibonacci", &[("0", "01"), ("1", "0")], "0").expect("static")
}

pub fn thue_morse() -> OmegaWord {
    morphic_str("thue_morse", &[("0", "01"), ("1", "10")], "0").expect("static")
}

pub fn tribonacci() -> OmegaWord {
    morphic_str("tribonacci", &[("1", "12"), ("2", "13"), ("3", "1")], "1").expect("static")
}

pub fn carton_thomas() -> OmegaWord {
    morphic_str("carton_thomas", &[("a", "ab"), ("b", "ccb"), ("c", "c")], "a").expect("static")
}

/// Characteristic word of the squares.
pub fn squares() -> OmegaWord {
    let out = Alphabet::from_chars("01").expect("static");
    image_coding(&carton_thomas(), vec![1, 1, 0], out).expect("static")
}

pub fn salomaa() -> OmegaWord {
    morphic_str("salomaa", &[("a", "aab"), ("b", "a")], "a").expect("static")
}

/// Ones exactly at the factorials.
pub fn factorial() -> OmegaWord {
    let d = BlockPowerDesc { head: vec![0], sep: vec![1], c: 0, exponent: Exponent::FactorialGap };
    block_power("factorial", d, Alphabet::from_chars("01").expect("static")).expect("static")
}

/// Named words for the word language.
pub fn preset(name: &str) -> Option<OmegaWord> {
    Some(match name {
        "fibonacci" => fibonacci(),
        "thue_morse" => thue_morse(),
        "tribonacci" => tribonacci(),
        "carton_thomas" => carton_thomas(),
        "squares" => squares(),
        "salomaa" => salomaa(),
        "factorial" => factorial(),
        "fibonacci_sturmian" => sturmian::fibonacci_sturmian(),
        "salomaa_sturmian" => sturmian::salomaa_sturmian(),
        _ => return None,
    })
}

pub const PRESETS: &[&str] = &[
    "fibonacci",
    "thue_morse",
    "tribonacci",
    "carton_thomas",
    "squares",
    "salomaa",
    "factorial",
    "fibonacci_sturmian",
    "salomaa_sturmian",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes() {
        assert_eq!(fibonacci().render_prefix(11).unwrap(), "01001010010");
        assert_eq!(thue_morse().render_prefix(10).unwrap(), "0110100110");
        assert_eq!(tribonacci().render_prefix(12).unwrap(), "121312112131");
        assert_eq!(carton_thomas().render_prefix(10).unwrap(), "abccbccccb");
        assert_eq!(salomaa().render_prefix(17).unwrap(), "aabaabaaabaabaaab");
        assert_eq!(factorial().render_prefix(11).unwrap(), "01100010000");
        let sq: String = (0..200u64).map(|n| if (0..15).any(|k| k * k == n) { '1' } else { '0' }).collect();
        assert_eq!(squares().render_prefix(200).unwrap(), sq);
    }

    #[test]
    fn random_access_matches_prefix() {
        for w in [fibonacci(), carton_thomas(), factorial()] {
            let p = w.prefix(5000).unwrap();
            let src = w.source();
            for n in [0u64, 1, 17, 999, 4096, 4999] {
                assert_eq!(src.letter(n).unwrap(), p[n as usize], "{} at {n}", w.name());
            }
        }
    }

    #[test]
    fn squares_positions() {
        let p = squares().prefix(150).unwrap();
        let ones: Vec<usize> = (0..150).filter(|&i| p[i] == 1).collect();
        assert_eq!(ones, (0..13).map(|k| k * k).collect::<Vec<_>>());
    }

    #[test]
    fn primitivity() {
        assert_eq!(primitivity_exponent(&[vec![0, 1], vec![0]]), Some(2));
        assert_eq!(primitivity_exponent(&[vec![0, 1], vec![1, 0]]), Some(1));
        assert_eq!(primitivity_exponent(&[vec![0, 1], vec![2, 2, 1], vec![2]]), None);
        assert!(thue_morse().has_ap() && salomaa().has_ap() && !carton_thomas().has_ap());
    }

    #[test]
    fn periodic_words() {
        let w = periodic_str("01").unwrap();
        assert_eq!(w.render_prefix(10).unwrap(), "0101010101");
        assert_eq!(ult_periodic_str("1", "0").unwrap().render_prefix(4).unwrap(), "1000");
        assert_eq!(w.classify_factor(&[1, 1]).unwrap().tag, crate::word::Tag::Transient);
        assert!(periodic_str("").is_err());
    }
}
