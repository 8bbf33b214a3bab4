//! Infinite words given by letter oracles, with optional occurrence-bound
//! oracles and generator geometry.

mod combinators;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus::TorusSpec;

pub use combinators::{image_coding, image_uniform, merge, product, suffix};

pub type Letter = u32;

/// Letters are indices into a list of printable symbols.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet(Arc<Vec<String>>);

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Alphabet> {
        let v: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if v.is_empty() {
            return Err(Error::input("empty alphabet"));
        }
        for (i, s) in v.iter().enumerate() {
            if s.is_empty() || v[..i].contains(s) {
                return Err(Error::input(format!("bad or repeated symbol {s:?}")));
            }
        }
        Ok(Alphabet(Arc::new(v)))
    }

    /// One symbol per character of `s`, in order of first appearance.
    pub fn from_chars(s: &str) -> Result<Alphabet> {
        let mut v: Vec<String> = Vec::new();
        for c in s.chars() {
            let c = c.to_string();
            if !v.contains(&c) {
                v.push(c);
            }
        }
        Alphabet::new(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbol(&self, a: Letter) -> &str {
        &self.0[a as usize]
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn index(&self, s: &str) -> Option<Letter> {
        self.0.iter().position(|x| x == s).map(|i| i as Letter)
    }

    /// Parse a finite word, matching the longest symbol at each step.
    pub fn parse_word(&self, s: &str) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let best = self
                .0
                .iter()
                .enumerate()
                .filter(|(_, sym)| rest.starts_with(sym.as_str()))
                .max_by_key(|(_, sym)| sym.len());
            match best {
                Some((i, sym)) => {
                    out.push(i as Letter);
                    rest = &rest[sym.len()..];
                }
                None => {
                    let c = rest.chars().next().unwrap();
                    return Err(Error::UnknownLetter(c.to_string()));
                }
            }
        }
        Ok(out)
    }

    pub fn render(&self, w: &[Letter]) -> String {
        w.iter().map(|&a| self.symbol(a)).collect()
    }
}

/// Produces letters of an infinite word.
pub trait LetterSource: Send + Sync {
    fn letter(&self, n: u64) -> Result<Letter>;

    /// Letters `start..start + out.len()`; sources with cheap sequential
    /// generation override this.
    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.letter(start + i as u64)?;
        }
        Ok(())
    }
}

impl<F: Fn(u64) -> Result<Letter> + Send + Sync> LetterSource for F {
    fn letter(&self, n: u64) -> Result<Letter> {
        self(n)
    }
}

/// Occurrence bound `R(u)`: either `u` never starts at a position `≥ R(u)`, or
/// every factor of length `R(u)` contains `u`.
pub type ApOracle = Arc<dyn Fn(&[Letter]) -> Result<u64> + Send + Sync>;

/// Substitution `tau` on internal letters with a coding `mu` to the word's
/// alphabet; the word is `mu(tau^ω(start))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphicDesc {
    pub tau: Vec<Vec<Letter>>,
    pub start: Letter,
    pub mu: Vec<Letter>,
}

/// Exponent families for block-power words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    /// `f(n) = n·n! - 1`
    FactorialGap,
    /// `f(n) = a n + b`
    Linear { a: u64, b: u64 },
}

/// `head · Π_{n ≥ 1} sep · c^{f(n)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPowerDesc {
    pub head: Vec<Letter>,
    pub sep: Vec<Letter>,
    pub c: Letter,
    pub exponent: Exponent,
}

/// Finite descriptions that the semigroup pipeline can evaluate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    UltPeriodic { a: Vec<Letter>, b: Vec<Letter> },
    Morphic(MorphicDesc),
    BlockPower(BlockPowerDesc),
}

/// Generator geometry used to fuse oracles under combinators.
#[derive(Clone, Debug)]
pub enum Geometry {
    Torus(Arc<TorusSpec>),
    /// Rotation coding with a drifting target; not fusable.
    Drift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Tag {
    Recurrent,
    Transient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorClass {
    pub tag: Tag,
    /// Gap bound for recurrent factors, horizon for transient ones.
    pub bound: u64,
    /// Start of the occurrence inside the window `[bound, 2·bound)`.
    pub found_at: Option<u64>,
}

const CACHE_CAP: u64 = 1 << 21;
const CHUNK: u64 = 1 << 12;

struct Inner {
    name: String,
    alphabet: Alphabet,
    source: Arc<dyn LetterSource>,
    ap: Option<ApOracle>,
    transient_prefix: Option<u64>,
    geometry: Option<Geometry>,
    structure: Option<Structure>,
    warnings: Vec<String>,
    prefix: RwLock<Vec<Letter>>,
    memo: Mutex<HashMap<Vec<Letter>, u64>>,
}

/// An infinite word. Cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct OmegaWord(Arc<Inner>);

impl fmt::Debug for OmegaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OmegaWord({})", self.0.name)
    }
}

/// Builder for [`OmegaWord`].
pub struct WordBuilder {
    name: String,
    alphabet: Alphabet,
    source: Arc<dyn LetterSource>,
    ap: Option<ApOracle>,
    transient_prefix: Option<u64>,
    geometry: Option<Geometry>,
    structure: Option<Structure>,
    warnings: Vec<String>,
}

impl WordBuilder {
    pub fn ap(mut self, ap: ApOracle) -> Self {
        self.ap = Some(ap);
        self
    }

    pub fn maybe_ap(mut self, ap: Option<ApOracle>) -> Self {
        self.ap = ap;
        self
    }

    pub fn transient_prefix(mut self, n: u64) -> Self {
        self.transient_prefix = Some(n);
        self
    }

    pub fn geometry(mut self, g: Geometry) -> Self {
        self.geometry = Some(g);
        self
    }

    pub fn maybe_geometry(mut self, g: Option<Geometry>) -> Self {
        self.geometry = g;
        self
    }

    pub fn structure(mut self, s: Structure) -> Self {
        self.structure = Some(s);
        self
    }

    pub fn maybe_structure(mut self, s: Option<Structure>) -> Self {
        self.structure = s;
        self
    }

    pub fn warn(mut self, w: impl Into<String>) -> Self {
        self.warnings.push(w.into());
        self
    }

    pub fn build(self) -> OmegaWord {
        OmegaWord(Arc::new(Inner {
            name: self.name,
            alphabet: self.alphabet,
            source: self.source,
            ap: self.ap,
            transient_prefix: self.transient_prefix,
            geometry: self.geometry,
            structure: self.structure,
            warnings: self.warnings,
            prefix: RwLock::new(Vec::new()),
            memo: Mutex::new(HashMap::new()),
        }))
    }
}

/// Ap oracle of a torus spec, mapping word letters to spec letters.
pub fn torus_ap(spec: Arc<TorusSpec>) -> ApOracle {
    Arc::new(move |u: &[Letter]| Ok(spec.region_bound(u)?.value()))
}

impl OmegaWord {
    pub fn builder(name: impl Into<String>, alphabet: Alphabet, source: Arc<dyn LetterSource>) -> WordBuilder {
        WordBuilder {
            name: name.into(),
            alphabet,
            source,
            ap: None,
            transient_prefix: None,
            geometry: None,
            structure: None,
            warnings: Vec::new(),
        }
    }

    /// Word driven by a torus spec whose letter indices are the alphabet's.
    pub fn from_torus(name: impl Into<String>, alphabet: Alphabet, spec: TorusSpec) -> Result<OmegaWord> {
        if spec.letters() != alphabet.len() {
            return Err(Error::input("torus spec and alphabet sizes differ"));
        }
        let spec = Arc::new(spec);
        let s2 = spec.clone();
        let src: Arc<dyn LetterSource> = Arc::new(move |n: u64| s2.letter(n));
        Ok(OmegaWord::builder(name, alphabet, src)
            .ap(torus_ap(spec.clone()))
            .transient_prefix(spec.transient_prefix)
            .geometry(Geometry::Torus(spec))
            .build())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.0.alphabet
    }

    pub fn has_ap(&self) -> bool {
        self.0.ap.is_some()
    }

    pub fn transient_prefix(&self) -> Option<u64> {
        self.0.transient_prefix
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.0.geometry.as_ref()
    }

    pub fn torus(&self) -> Option<&Arc<TorusSpec>> {
        match &self.0.geometry {
            Some(Geometry::Torus(s)) => Some(s),
            _ => None,
        }
    }

    pub fn structure(&self) -> Option<&Structure> {
        self.0.structure.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.0.warnings
    }

    pub(crate) fn source(&self) -> Arc<dyn LetterSource> {
        self.0.source.clone()
    }

    pub(crate) fn ap_oracle(&self) -> Option<ApOracle> {
        self.0.ap.clone()
    }

    fn ensure_prefix(&self, len: u64) -> Result<()> {
        if self.0.prefix.read().unwrap().len() as u64 >= len {
            return Ok(());
        }
        let mut p = self.0.prefix.write().unwrap();
        let have = p.len() as u64;
        if have >= len {
            return Ok(());
        }
        let target = (len.div_ceil(CHUNK) * CHUNK).max(have * 2).min(CACHE_CAP);
        let mut buf = vec![0; (target - have) as usize];
        self.0.source.fill(have, &mut buf)?;
        p.extend_from_slice(&buf);
        Ok(())
    }

    /// Whether `[.., end)` should go through the prefix cache: sequential
    /// growth doubles it, far jumps bypass it.
    fn cacheable(&self, end: u64) -> bool {
        let have = self.0.prefix.read().unwrap().len() as u64;
        end <= CACHE_CAP && end <= 2 * have.max(CHUNK)
    }

    pub fn letter_at(&self, n: u64) -> Result<Letter> {
        if self.cacheable(n + 1) {
            self.ensure_prefix(n + 1)?;
            return Ok(self.0.prefix.read().unwrap()[n as usize]);
        }
        self.0.source.letter(n)
    }

    /// The finite word `w[n, m)`.
    pub fn factor(&self, n: u64, m: u64) -> Result<Vec<Letter>> {
        if n > m {
            return Err(Error::input(format!("factor bounds {n} > {m}")));
        }
        let mut out = Vec::with_capacity((m - n) as usize);
        if n > 0 && !self.cacheable(n) {
            out.resize((m - n) as usize, 0);
            self.0.source.fill(n, &mut out)?;
            return Ok(out);
        }
        let cached_end = m.min(CACHE_CAP);
        if n < cached_end {
            self.ensure_prefix(cached_end)?;
            out.extend_from_slice(&self.0.prefix.read().unwrap()[n as usize..cached_end as usize]);
        }
        let from = n.max(CACHE_CAP);
        if from < m {
            let mut buf = vec![0; (m - from) as usize];
            self.0.source.fill(from, &mut buf)?;
            out.extend(buf);
        }
        Ok(out)
    }

    pub fn prefix(&self, n: u64) -> Result<Vec<Letter>> {
        self.factor(0, n)
    }

    pub fn render_prefix(&self, n: u64) -> Result<String> {
        Ok(self.0.alphabet.render(&self.prefix(n)?))
    }

    /// `R(u)`, clamped to at least `|u|` and memoized.
    pub fn ap_bound(&self, u: &[Letter]) -> Result<u64> {
        let ap = self.0.ap.as_ref().ok_or_else(|| {
            Error::ClassificationUnavailable(format!("{} carries no occurrence-bound oracle", self.0.name))
        })?;
        if let Some(&r) = self.0.memo.lock().unwrap().get(u) {
            return Ok(r);
        }
        let r = ap(u)?.max(u.len() as u64).max(1);
        self.0.memo.lock().unwrap().insert(u.to_vec(), r);
        Ok(r)
    }

    /// Decide whether `u` recurs, by scanning `w[R, 2R)` for an occurrence.
    pub fn classify_factor(&self, u: &[Letter]) -> Result<FactorClass> {
        if u.is_empty() {
            return Err(Error::input("cannot classify the empty word"));
        }
        if let Some(&a) = u.iter().find(|&&a| a as usize >= self.0.alphabet.len()) {
            return Err(Error::UnknownLetter(a.to_string()));
        }
        let r = self.ap_bound(u)?;
        let window = self.factor(r, 2 * r)?;
        let found = window.windows(u.len()).position(|w| w == u);
        Ok(match found {
            Some(i) => FactorClass { tag: Tag::Recurrent, bound: r, found_at: Some(r + i as u64) },
            None => FactorClass { tag: Tag::Transient, bound: r, found_at: None },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::spec::periodic_spec;

    fn periodic01() -> OmegaWord {
        let al = Alphabet::from_chars("01").unwrap();
        OmegaWord::from_torus("(01)^w", al, periodic_spec(&[], &[0, 1], 2).unwrap()).unwrap()
    }

    #[test]
    fn alphabet_parsing() {
        let al = Alphabet::new(["(0,1)", "(1,0)", "0"]).unwrap();
        assert_eq!(al.parse_word("(0,1)0(1,0)").unwrap(), vec![0, 2, 1]);
        assert!(al.parse_word("x").is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
    }

    #[test]
    fn prefix_and_factor() {
        let w = periodic01();
        assert_eq!(w.render_prefix(6).unwrap(), "010101");
        assert_eq!(w.factor(3, 3).unwrap(), Vec::<Letter>::new());
        assert_eq!(w.letter_at(CACHE_CAP + 1).unwrap(), 1);
        assert_eq!(w.factor(CACHE_CAP - 1, CACHE_CAP + 2).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn classification() {
        let w = periodic01();
        assert_eq!(w.classify_factor(&[1, 1]).unwrap().tag, Tag::Transient);
        assert_eq!(w.classify_factor(&[1, 0]).unwrap().tag, Tag::Recurrent);
        let plain = OmegaWord::builder("p", w.alphabet().clone(), w.source()).build();
        assert!(matches!(plain.classify_factor(&[0]), Err(Error::ClassificationUnavailable(_))));
    }
}
