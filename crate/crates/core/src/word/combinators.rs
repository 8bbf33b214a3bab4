use std::sync::Arc;

use num_integer::Integer;

use super::{
    torus_ap, Alphabet, ApOracle, BlockPowerDesc, Geometry, Letter, LetterSource, MorphicDesc, OmegaWord,
    Structure, Tag,
};
use crate::error::{Error, Result};
use crate::torus::TorusSpec;

fn ult_from_letters(w: &OmegaWord, pre: u64, per: u64) -> Result<Structure> {
    Ok(Structure::UltPeriodic { a: w.factor(0, pre)?, b: w.factor(pre, pre + per)? })
}

fn ult_params(ws: &[OmegaWord]) -> Option<(u64, u64)> {
    let mut pre = 0u64;
    let mut per = 1u64;
    for w in ws {
        match w.structure() {
            Some(Structure::UltPeriodic { a, b }) => {
                pre = pre.max(a.len() as u64);
                per = per.lcm(&(b.len() as u64));
            }
            _ => return None,
        }
    }
    Some((pre, per))
}

struct ProductSource {
    parts: Vec<Arc<dyn LetterSource>>,
    radix: Vec<u32>,
}

impl ProductSource {
    fn combine(&self, letters: impl Iterator<Item = Letter>) -> Letter {
        letters.zip(&self.radix).fold(0, |acc, (a, &r)| acc * r + a)
    }
}

impl LetterSource for ProductSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        let ls: Vec<Letter> = self.parts.iter().map(|p| p.letter(n)).collect::<Result<_>>()?;
        Ok(self.combine(ls.into_iter()))
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        out.iter_mut().for_each(|x| *x = 0);
        let mut buf = vec![0; out.len()];
        for (p, &r) in self.parts.iter().zip(&self.radix) {
            p.fill(start, &mut buf)?;
            for (x, &a) in out.iter_mut().zip(&buf) {
                *x = *x * r + a;
            }
        }
        Ok(())
    }
}

fn tuple_symbols(ws: &[OmegaWord]) -> Vec<String> {
    let mut syms: Vec<Vec<String>> = vec![vec![]];
    for w in ws {
        syms = syms
            .into_iter()
            .flat_map(|pre| {
                w.alphabet().symbols().iter().map(move |s| {
                    let mut v = pre.clone();
                    v.push(s.clone());
                    v
                })
            })
            .collect();
    }
    syms.into_iter().map(|v| format!("({})", v.join(","))).collect()
}

/// Fused torus spec of several words, or the reason fusion fails.
fn fuse(ws: &[OmegaWord], head_of: impl Fn(u64) -> Result<Letter>) -> std::result::Result<TorusSpec, String> {
    let specs: Vec<&TorusSpec> = ws
        .iter()
        .map(|w| w.torus().map(|s| s.as_ref()).ok_or_else(|| format!("{} has no torus geometry", w.name())))
        .collect::<std::result::Result<_, _>>()?;
    let n = specs.iter().map(|s| s.transient_prefix).max().unwrap_or(0);
    let head = (0..n).map(&head_of).collect::<Result<Vec<_>>>().map_err(|e| e.to_string())?;
    TorusSpec::product(&specs, head).map_err(|e| e.to_string())
}

/// Letterwise product; the occurrence oracle survives only when the operands'
/// geometries fuse into one torus spec.
pub fn product(ws: &[OmegaWord]) -> Result<OmegaWord> {
    match ws {
        [] => return Err(Error::input("product of no words")),
        [w] => return Ok(w.clone()),
        _ => {}
    }
    let alphabet = Alphabet::new(tuple_symbols(ws))?;
    let src = Arc::new(ProductSource {
        parts: ws.iter().map(|w| w.source()).collect(),
        radix: ws.iter().map(|w| w.alphabet().len() as u32).collect(),
    });
    let name = format!("product({})", ws.iter().map(|w| w.name()).collect::<Vec<_>>().join(", "));
    let s2 = src.clone();
    let fused = fuse(ws, move |n| s2.letter(n));
    let mut b = OmegaWord::builder(name, alphabet, src);
    match fused {
        Ok(spec) => {
            let spec = Arc::new(spec);
            b = b.ap(torus_ap(spec.clone())).transient_prefix(spec.transient_prefix).geometry(Geometry::Torus(spec));
        }
        Err(why) => b = b.warn(format!("occurrence oracle dropped: {why}")),
    }
    let mut w = b.build();
    if let Some((pre, per)) = ult_params(ws) {
        w = with_structure(&w, ult_from_letters(&w, pre, per)?);
    }
    Ok(w)
}

fn with_structure(w: &OmegaWord, s: Structure) -> OmegaWord {
    let mut b = OmegaWord::builder(w.name(), w.alphabet().clone(), w.source())
        .maybe_ap(w.ap_oracle())
        .maybe_geometry(w.geometry().cloned())
        .structure(s);
    if let Some(n) = w.transient_prefix() {
        b = b.transient_prefix(n);
    }
    for x in w.warnings() {
        b = b.warn(x.clone());
    }
    b.build()
}

/// `merge(w_0, …, w_{L-1})(nL + r) = w_r(n)`, over the union of the alphabets.
pub fn merge(ws: &[OmegaWord]) -> Result<OmegaWord> {
    match ws {
        [] => return Err(Error::input("merge of no words")),
        [w] => return Ok(w.clone()),
        _ => {}
    }
    let mut syms: Vec<String> = Vec::new();
    for w in ws {
        for s in w.alphabet().symbols() {
            if !syms.contains(s) {
                syms.push(s.clone());
            }
        }
    }
    let alphabet = Alphabet::new(syms)?;
    let maps: Vec<Vec<Letter>> = ws
        .iter()
        .map(|w| w.alphabet().symbols().iter().map(|s| alphabet.index(s).unwrap()).collect())
        .collect();
    let l = ws.len() as u64;
    let parts: Vec<Arc<dyn LetterSource>> = ws.iter().map(|w| w.source()).collect();
    let maps2 = maps.clone();
    let src: Arc<dyn LetterSource> = Arc::new(move |n: u64| {
        let r = (n % l) as usize;
        Ok(maps2[r][parts[r].letter(n / l)? as usize])
    });
    let name = format!("merge({})", ws.iter().map(|w| w.name()).collect::<Vec<_>>().join(", "));
    let mut b = OmegaWord::builder(name, alphabet.clone(), src);
    // merge = uniform image of the product under (a_0, …) ↦ a_0 a_1 …
    let prod = product(ws)?;
    let mut images: Vec<Vec<Letter>> = vec![vec![]];
    for m in &maps {
        images = images
            .into_iter()
            .flat_map(|pre| {
                m.iter().map(move |&x| {
                    let mut v = pre.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    match prod.torus().map(|s| s.image_uniform(&images, alphabet.len())) {
        Some(Ok(spec)) => {
            let spec = Arc::new(spec);
            b = b.ap(torus_ap(spec.clone())).transient_prefix(spec.transient_prefix).geometry(Geometry::Torus(spec));
        }
        Some(Err(e)) => b = b.warn(format!("occurrence oracle dropped: {e}")),
        None => b = b.warn("occurrence oracle dropped: operands do not fuse"),
    }
    let mut w = b.build();
    if let Some((pre, per)) = ult_params(ws) {
        w = with_structure(&w, ult_from_letters(&w, pre * l, per * l)?);
    }
    Ok(w)
}

/// Image under a `k`-uniform morphism `images[a]` into `out`.
pub fn image_uniform(w: &OmegaWord, images: Vec<Vec<Letter>>, out: Alphabet) -> Result<OmegaWord> {
    let k = images.first().map_or(0, |x| x.len()) as u64;
    if k == 0 || images.iter().any(|x| x.len() as u64 != k) {
        return Err(Error::input("morphism is not uniform"));
    }
    if images.len() != w.alphabet().len() {
        return Err(Error::input("morphism must be total on the alphabet"));
    }
    if images.iter().flatten().any(|&b| b as usize >= out.len()) {
        return Err(Error::input("morphism image outside the target alphabet"));
    }
    let parts = w.source();
    let im2 = images.clone();
    let src: Arc<dyn LetterSource> =
        Arc::new(move |n: u64| Ok(im2[parts.letter(n / k)? as usize][(n % k) as usize]));
    let mut b = OmegaWord::builder(format!("image({})", w.name()), out.clone(), src);
    match w.torus().map(|s| s.image_uniform(&images, out.len())) {
        Some(Ok(spec)) => {
            let spec = Arc::new(spec);
            b = b.ap(torus_ap(spec.clone())).transient_prefix(spec.transient_prefix).geometry(Geometry::Torus(spec));
        }
        Some(Err(e)) => b = b.warn(format!("occurrence oracle dropped: {e}")),
        None if w.has_ap() => b = b.warn("occurrence oracle dropped: no torus geometry"),
        None => {}
    }
    if let Some(Structure::UltPeriodic { a, b: per }) = w.structure() {
        let img = |x: &Vec<Letter>| x.iter().flat_map(|&c| images[c as usize].iter().copied()).collect();
        b = b.structure(Structure::UltPeriodic { a: img(a), b: img(per) });
    }
    Ok(b.build())
}

/// Letter renaming `mu` into `out`.
pub fn image_coding(w: &OmegaWord, mu: Vec<Letter>, out: Alphabet) -> Result<OmegaWord> {
    if mu.len() != w.alphabet().len() {
        return Err(Error::input("coding must be total on the alphabet"));
    }
    if mu.iter().any(|&b| b as usize >= out.len()) {
        return Err(Error::input("coding image outside the target alphabet"));
    }
    let parts = w.source();
    let mu2 = mu.clone();
    let src: Arc<dyn LetterSource> = Arc::new(CodedSource { inner: parts, mu: mu2 });
    let mut b = OmegaWord::builder(format!("coding({})", w.name()), out.clone(), src);
    if let Some(spec) = w.torus() {
        let mut targets = vec![vec![]; out.len()];
        for (a, bs) in spec.targets.iter().enumerate() {
            targets[mu[a] as usize].extend(bs.iter().cloned());
        }
        let head = spec.head.iter().map(|&a| mu[a as usize]).collect();
        let coded = TorusSpec::new(spec.angles.clone(), spec.declared.clone(), targets, spec.transient_prefix, head)?;
        let coded = Arc::new(coded);
        b = b.ap(torus_ap(coded.clone())).transient_prefix(coded.transient_prefix).geometry(Geometry::Torus(coded));
    } else if w.has_ap() {
        b = b.ap(preimage_ap(w.clone(), mu.clone()));
        if let Some(n) = w.transient_prefix() {
            b = b.transient_prefix(n);
        }
    }
    let recode = |x: &[Letter]| x.iter().map(|&c| mu[c as usize]).collect::<Vec<_>>();
    match w.structure() {
        Some(Structure::UltPeriodic { a, b: per }) => {
            b = b.structure(Structure::UltPeriodic { a: recode(a), b: recode(per) });
        }
        Some(Structure::Morphic(m)) => {
            b = b.structure(Structure::Morphic(MorphicDesc {
                tau: m.tau.clone(),
                start: m.start,
                mu: recode(&m.mu),
            }));
        }
        Some(Structure::BlockPower(d)) => {
            b = b.structure(Structure::BlockPower(BlockPowerDesc {
                head: recode(&d.head),
                sep: recode(&d.sep),
                c: mu[d.c as usize],
                exponent: d.exponent.clone(),
            }));
        }
        None => {}
    }
    Ok(b.build())
}

struct CodedSource {
    inner: Arc<dyn LetterSource>,
    mu: Vec<Letter>,
}

impl LetterSource for CodedSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        Ok(self.mu[self.inner.letter(n)? as usize])
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        self.inner.fill(start, out)?;
        out.iter_mut().for_each(|x| *x = self.mu[*x as usize]);
        Ok(())
    }
}

/// `R(v)` for a coded word: the maximum of the preimage bounds, where a
/// transient preimage prefix bounds all of its extensions.
fn preimage_ap(w: OmegaWord, mu: Vec<Letter>) -> ApOracle {
    Arc::new(move |v: &[Letter]| {
        let pre: Vec<Vec<Letter>> = v
            .iter()
            .map(|&b| (0..mu.len() as Letter).filter(|&a| mu[a as usize] == b).collect())
            .collect();
        let mut best = v.len() as u64;
        let mut stack: Vec<Vec<Letter>> = vec![vec![]];
        while let Some(p) = stack.pop() {
            if p.len() == v.len() {
                best = best.max(w.ap_bound(&p)?);
                continue;
            }
            if !p.is_empty() {
                let c = w.classify_factor(&p)?;
                if c.tag == Tag::Transient {
                    // no extension of p starts at or after the horizon
                    best = best.max(c.bound);
                    continue;
                }
            }
            for &a in &pre[p.len()] {
                let mut q = p.clone();
                q.push(a);
                stack.push(q);
            }
        }
        Ok(best)
    })
}

/// `w[N, ∞)`.
pub fn suffix(w: &OmegaWord, n: u64) -> Result<OmegaWord> {
    if n == 0 {
        return Ok(w.clone());
    }
    let parts = w.source();
    let src: Arc<dyn LetterSource> = Arc::new(ShiftedSource { inner: parts, shift: n });
    let mut b = OmegaWord::builder(format!("suffix({}, {n})", w.name()), w.alphabet().clone(), src);
    if let Some(spec) = w.torus() {
        let s = Arc::new(spec.suffix(n)?);
        b = b.ap(torus_ap(s.clone())).transient_prefix(s.transient_prefix).geometry(Geometry::Torus(s));
    } else if let Some(ap) = w.ap_oracle() {
        b = b.ap(Arc::new(move |u: &[Letter]| Ok(ap(u)? + n)));
        if let Some(t) = w.transient_prefix() {
            b = b.transient_prefix(t.saturating_sub(n));
        }
        if let Some(g) = w.geometry() {
            b = b.geometry(g.clone());
        }
    }
    if let Some(Structure::UltPeriodic { a, b: per }) = w.structure() {
        let s = if (n as usize) <= a.len() {
            Structure::UltPeriodic { a: a[n as usize..].to_vec(), b: per.clone() }
        } else {
            let r = ((n as usize) - a.len()) % per.len();
            let mut rot = per[r..].to_vec();
            rot.extend_from_slice(&per[..r]);
            Structure::UltPeriodic { a: vec![], b: rot }
        };
        b = b.structure(s);
    }
    Ok(b.build())
}

struct ShiftedSource {
    inner: Arc<dyn LetterSource>,
    shift: u64,
}

impl LetterSource for ShiftedSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        self.inner.letter(n + self.shift)
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        self.inner.fill(start + self.shift, out)
    }
}
