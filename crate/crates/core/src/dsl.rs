//! Word-expression language.
//!
//! ```text
//! expr  := ident | ident "(" [arg ("," arg)*] ")"
//! arg   := [ident "="] value
//! value := expr | string | number | map | list
//! number:= ["-"] digits ["/" digits | "." digits]
//! map   := "{" [value ":" value ("," value ":" value)*] "}"
//! list  := "[" [value ("," value)*] "]"
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::torus::real::consts;
use crate::torus::{Arc1, Lin, Real, TBox, TorusSpec};
use crate::word::{image_coding, image_uniform, merge, product, suffix, Alphabet, Letter, MorphicDesc, OmegaWord};
use crate::zoo::{self, sign::GaussPoint, DriftSignSpec, SturmianSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Str(String),
    Num(BigRational),
    Ident(String),
    Call(String, Vec<Arg>),
    Map(Vec<(Spanned, Spanned)>),
    List(Vec<Spanned>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spanned {
    pub node: Node,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Spanned,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(BigRational),
    Punct(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c.is_whitespace() {
            bump!();
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            out.push((Tok::Ident(s), l0, c0));
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(Error::parse(l0, c0, "unterminated string"));
                }
                if chars[i] == '"' {
                    bump!();
                    break;
                }
                s.push(chars[i]);
                bump!();
            }
            out.push((Tok::Str(s), l0, c0));
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut s = String::new();
            s.push(c);
            bump!();
            let digits = |i: &mut usize, s: &mut String, col: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    s.push(chars[*i]);
                    *i += 1;
                    *col += 1;
                }
            };
            digits(&mut i, &mut s, &mut col);
            let num: BigInt = s.parse().map_err(|_| Error::parse(l0, c0, "bad number"))?;
            let q = if i < chars.len() && (chars[i] == '/' || chars[i] == '.') {
                let sep = chars[i];
                bump!();
                let mut t = String::new();
                digits(&mut i, &mut t, &mut col);
                if t.is_empty() {
                    return Err(Error::parse(line, col, format!("digits expected after '{sep}'")));
                }
                let t_int: BigInt = t.parse().expect("digits");
                if sep == '/' {
                    if t_int.is_zero() {
                        return Err(Error::parse(l0, c0, "zero denominator"));
                    }
                    BigRational::new(num, t_int)
                } else {
                    let scale = num_traits::pow(BigInt::from(10), t.len());
                    let frac = BigRational::new(t_int, scale);
                    let whole = BigRational::from_integer(num.clone());
                    if s.starts_with('-') { whole - frac } else { whole + frac }
                }
            } else {
                BigRational::from_integer(num)
            };
            out.push((Tok::Num(q), l0, c0));
        } else if "(),={}[]:".contains(c) {
            bump!();
            out.push((Tok::Punct(c), l0, c0));
        } else {
            return Err(Error::parse(l0, c0, format!("unexpected character {c:?}")));
        }
    }
    out.push((Tok::End, line, col));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next() {
            (Tok::Punct(d), _, _) if d == c => Ok(()),
            (t, l, k) => Err(Error::parse(l, k, format!("expected '{c}', found {}", show(&t)))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().0 == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn value(&mut self) -> Result<Spanned> {
        let (t, line, col) = self.next();
        let node = match t {
            Tok::Str(s) => Node::Str(s),
            Tok::Num(q) => Node::Num(q),
            Tok::Ident(name) => {
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.arg()?);
                            if self.eat(')') {
                                break;
                            }
                            self.expect(',')?;
                        }
                    }
                    Node::Call(name, args)
                } else {
                    Node::Ident(name)
                }
            }
            Tok::Punct('{') => {
                let mut kv = Vec::new();
                if !self.eat('}') {
                    loop {
                        let k = self.value()?;
                        self.expect(':')?;
                        kv.push((k, self.value()?));
                        if self.eat('}') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Node::Map(kv)
            }
            Tok::Punct('[') => {
                let mut xs = Vec::new();
                if !self.eat(']') {
                    loop {
                        xs.push(self.value()?);
                        if self.eat(']') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Node::List(xs)
            }
            t => return Err(Error::parse(line, col, format!("unexpected {}", show(&t)))),
        };
        Ok(Spanned { node, line, col })
    }

    fn arg(&mut self) -> Result<Arg> {
        if let (Tok::Ident(k), _, _) = self.peek().clone() {
            if self.toks.get(self.pos + 1).is_some_and(|t| t.0 == Tok::Punct('=')) {
                self.pos += 2;
                return Ok(Arg { key: Some(k), value: self.value()? });
            }
        }
        Ok(Arg { key: None, value: self.value()? })
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier {s:?}"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Num(q) => format!("number {q}"),
        Tok::Punct(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

/// Syntax tree of one expression.
pub fn parse_expr(text: &str) -> Result<Spanned> {
    let mut lx = Lexer { toks: lex(text)?, pos: 0 };
    let v = lx.value()?;
    match lx.peek() {
        (Tok::End, _, _) => Ok(v),
        (t, l, c) => Err(Error::parse(*l, *c, format!("trailing {}", show(t)))),
    }
}

fn err(s: &Spanned, msg: impl Into<String>) -> Error {
    Error::parse(s.line, s.col, msg)
}

/// Arguments of one call, consumed by name or position.
struct Args<'a> {
    call: &'a Spanned,
    name: &'a str,
    pos: Vec<&'a Spanned>,
    named: Vec<(&'a str, &'a Spanned)>,
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    fn new(call: &'a Spanned, name: &'a str, args: &'a [Arg]) -> Args<'a> {
        let pos = args.iter().filter(|a| a.key.is_none()).map(|a| &a.value).collect();
        let named: Vec<_> = args.iter().filter_map(|a| a.key.as_deref().map(|k| (k, &a.value))).collect();
        let used = vec![false; named.len()];
        Args { call, name, pos, named, used }
    }

    fn opt(&mut self, key: &str, index: usize) -> Option<&'a Spanned> {
        if let Some(i) = self.named.iter().position(|(k, _)| *k == key) {
            self.used[i] = true;
            return Some(self.named[i].1);
        }
        self.pos.get(index).copied()
    }

    fn req(&mut self, key: &str, index: usize) -> Result<&'a Spanned> {
        self.opt(key, index).ok_or_else(|| err(self.call, format!("{} needs argument {key}", self.name)))
    }

    fn finish(&self, max_pos: usize) -> Result<()> {
        if let Some(s) = self.pos.get(max_pos) {
            return Err(err(s, format!("too many arguments to {}", self.name)));
        }
        if let Some(i) = self.used.iter().position(|u| !u) {
            return Err(err(self.named[i].1, format!("{} has no argument {}", self.name, self.named[i].0)));
        }
        Ok(())
    }
}

fn string(s: &Spanned) -> Result<String> {
    match &s.node {
        Node::Str(x) => Ok(x.clone()),
        _ => Err(err(s, "string expected")),
    }
}

/// Map keys and letters: strings, integers or bare identifiers.
fn key(s: &Spanned) -> Result<String> {
    match &s.node {
        Node::Str(x) | Node::Ident(x) => Ok(x.clone()),
        Node::Num(q) if q.is_integer() => Ok(q.to_integer().to_string()),
        _ => Err(err(s, "letter expected")),
    }
}

fn rational(s: &Spanned) -> Result<BigRational> {
    match &s.node {
        Node::Num(q) => Ok(q.clone()),
        _ => Err(err(s, "number expected")),
    }
}

fn natural(s: &Spanned) -> Result<u64> {
    let q = rational(s)?;
    q.is_integer().then(|| q.to_integer().to_u64()).flatten().ok_or_else(|| err(s, "natural number expected"))
}

fn integer(s: &Spanned) -> Result<i64> {
    let q = rational(s)?;
    q.is_integer().then(|| q.to_integer().to_i64()).flatten().ok_or_else(|| err(s, "integer expected"))
}

/// An angle given as a rational or a named constant.
pub fn parse_angle(text: &str) -> Result<Real> {
    real(&parse_expr(text)?)
}

fn real(s: &Spanned) -> Result<Real> {
    match &s.node {
        Node::Num(q) => Ok(Real::rational(q.clone())),
        Node::Ident(n) => consts::by_name(n).ok_or_else(|| err(s, format!("unknown constant {n}"))),
        _ => Err(err(s, "angle expected")),
    }
}

/// Point `c + mθ` on a coordinate: a rational, `fib_xi`, or `orbit(m[, c])`.
fn lin(s: &Spanned) -> Result<Lin> {
    match &s.node {
        Node::Num(q) => Ok(Lin::rational(q.clone())),
        Node::Ident(n) if n == "fib_xi" => Ok(zoo::fib_xi()),
        Node::Call(n, args) if n == "orbit" => {
            let mut a = Args::new(s, n, args);
            let m = integer(a.req("m", 0)?)?;
            let c = a.opt("c", 1).map(rational).transpose()?.unwrap_or_else(BigRational::zero);
            a.finish(2)?;
            Ok(Lin::rational(c).rotate(m))
        }
        Node::Ident(n) => Err(err(s, format!("unknown point {n}"))),
        _ => Err(err(s, "point expected")),
    }
}

fn map(s: &Spanned) -> Result<Vec<(String, &Spanned)>> {
    match &s.node {
        Node::Map(kv) => kv.iter().map(|(k, v)| Ok((key(k)?, v))).collect(),
        _ => Err(err(s, "map expected")),
    }
}

fn list(s: &Spanned) -> Result<&[Spanned]> {
    match &s.node {
        Node::List(xs) => Ok(xs),
        _ => Err(err(s, "list expected")),
    }
}

fn letters(al: &Alphabet, s: &Spanned) -> Result<Vec<Letter>> {
    string(s)?.chars().map(|c| al.index(&c.to_string()).ok_or_else(|| err(s, format!("letter {c:?} not in alphabet")))).collect()
}

fn alphabet_arg(a: &mut Args, index: usize, default: impl FnOnce() -> Result<Alphabet>) -> Result<Alphabet> {
    match a.opt("alphabet", index) {
        Some(s) => {
            let x = string(s)?;
            Alphabet::new(x.chars().map(String::from)).map_err(|e| err(s, e.to_string()))
        }
        None => default(),
    }
}

fn words(a: &Args, s: &Spanned) -> Result<Vec<OmegaWord>> {
    let ws: Vec<OmegaWord> = a.pos.iter().map(|x| eval(x)).collect::<Result<_>>()?;
    if ws.is_empty() {
        return Err(err(s, format!("{} needs at least one word", a.name)));
    }
    Ok(ws)
}

fn gauss(a: &mut Args) -> Result<GaussPoint> {
    let x = a.opt("x", usize::MAX).map(integer).transpose()?.unwrap_or(3);
    let y = a.opt("y", usize::MAX).map(integer).transpose()?.unwrap_or(4);
    let r = a.opt("r", usize::MAX).map(integer).transpose()?.unwrap_or(5);
    GaussPoint::new(x, y, r)
}

fn toric(s: &Spanned, a: &mut Args) -> Result<OmegaWord> {
    let angles: Vec<Real> = list(a.req("angles", 0)?)?.iter().map(real).collect::<Result<_>>()?;
    let targets_node = a.req("targets", 1)?;
    let mut symbols = Vec::new();
    let mut targets = Vec::new();
    for (k, v) in map(targets_node)? {
        symbols.push(k);
        let mut boxes = Vec::new();
        for b in list(v)? {
            let coords = list(b)?;
            // a bare pair is a one-dimensional box
            let pairs: Vec<&Spanned> = if coords.len() == 2 && !matches!(coords[0].node, Node::List(_)) {
                vec![b]
            } else {
                coords.iter().collect()
            };
            let arcs = pairs
                .into_iter()
                .map(|p| match list(p)? {
                    [lo, hi] => Ok(Arc1::open(lin(lo)?, lin(hi)?)),
                    _ => Err(err(p, "arc needs two endpoints")),
                })
                .collect::<Result<Vec<_>>>()?;
            boxes.push(TBox(arcs));
        }
        targets.push(boxes);
    }
    let al = Alphabet::new(symbols).map_err(|e| err(targets_node, e.to_string()))?;
    let transient = a.opt("transient", 2).map(natural).transpose()?.unwrap_or(0);
    let head = a.opt("head", 3).map(|h| letters(&al, h)).transpose()?.unwrap_or_default();
    let declared = match a.opt("relations", 4) {
        Some(r) => list(r)?
            .iter()
            .map(|row| list(row)?.iter().map(integer).collect::<Result<Vec<i64>>>())
            .collect::<Result<_>>()?,
        None => vec![],
    };
    a.finish(5)?;
    let spec = TorusSpec::new(angles, declared, targets, transient, head)?;
    zoo::toric_box(expr_name(s), al, spec)
}

fn expr_name(s: &Spanned) -> String {
    match &s.node {
        Node::Call(n, _) | Node::Ident(n) => n.clone(),
        _ => "word".into(),
    }
}

fn morphic(s: &Spanned, a: &mut Args) -> Result<OmegaWord> {
    let tau_node = a.req("tau", 0)?;
    let tau = map(tau_node)?;
    let internal = Alphabet::new(tau.iter().map(|(k, _)| k.clone())).map_err(|e| err(tau_node, e.to_string()))?;
    let images = tau
        .iter()
        .map(|(_, v)| {
            string(v)?
                .chars()
                .map(|c| internal.index(&c.to_string()).ok_or_else(|| err(v, format!("{c:?} has no image"))))
                .collect::<Result<Vec<Letter>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let start_node = a.opt("start", 1);
    let start = match start_node {
        Some(x) => internal.index(&key(x)?).ok_or_else(|| err(x, "start letter has no image"))?,
        None => 0,
    };
    let (mu, out) = match a.opt("coding", 2) {
        Some(c) => {
            let cm = map(c)?;
            let mut syms: Vec<String> = Vec::new();
            let mut mu = vec![None; internal.len()];
            for (k, v) in &cm {
                let i = internal.index(k).ok_or_else(|| err(c, format!("coding of unknown letter {k}")))?;
                let y = key(v)?;
                if !syms.contains(&y) {
                    syms.push(y.clone());
                }
                mu[i as usize] = Some(syms.iter().position(|z| *z == y).expect("pushed") as Letter);
            }
            let mu = mu.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| err(c, "coding must be total"))?;
            (mu, Alphabet::new(syms).map_err(|e| err(c, e.to_string()))?)
        }
        None => ((0..internal.len() as Letter).collect(), internal.clone()),
    };
    a.finish(3)?;
    zoo::morphic(expr_name(s), MorphicDesc { tau: images, start, mu }, out)
}

/// Builds the word an expression denotes.
pub fn eval(s: &Spanned) -> Result<OmegaWord> {
    let (name, args): (&str, &[Arg]) = match &s.node {
        Node::Ident(n) => {
            return zoo::preset(n).ok_or_else(|| err(s, format!("unknown word {n}")));
        }
        Node::Call(n, args) => (n, args),
        _ => return Err(err(s, "word expression expected")),
    };
    let mut a = Args::new(s, name, args);
    match name {
        "periodic" | "ult_periodic" => {
            let (pre, per, k) = if name == "periodic" {
                (String::new(), string(a.req("u", 0)?)?, 1)
            } else {
                (string(a.req("prefix", 0)?)?, string(a.req("period", 1)?)?, 2)
            };
            let al = alphabet_arg(&mut a, k, || zoo::chars_alphabet(&format!("{pre}{per}")))?;
            a.finish(k + 1)?;
            let x = al.parse_word(&pre)?;
            let y = al.parse_word(&per)?;
            zoo::ult_periodic(format!("{pre}({per})^ω"), al, x, y)
        }
        "morphic" => morphic(s, &mut a),
        "sturmian" => {
            let theta = real(a.req("theta", 0)?)?;
            let xi = lin(a.req("xi", 1)?)?;
            let al = alphabet_arg(&mut a, 2, || Alphabet::from_chars("01"))?;
            a.finish(3)?;
            zoo::sturmian("sturmian", &SturmianSpec { theta, xi }, al)
        }
        "toric_box" => toric(s, &mut a),
        "sign_static" => {
            let p = gauss(&mut a)?;
            a.finish(0)?;
            zoo::sign_static(&p)
        }
        "sign_drift" | "sign_pair" => {
            let p = gauss(&mut a)?;
            let c = a.opt("c", 0).map(rational).transpose()?.unwrap_or_else(|| BigRational::from_integer(7.into()));
            let from = a.opt("from", usize::MAX).map(natural).transpose()?.unwrap_or(1);
            a.finish(1)?;
            let d = DriftSignSpec { point: p, c, zero_free_from: from, ..DriftSignSpec::standard() };
            if name == "sign_drift" { zoo::sign_drift(&d) } else { zoo::sign_pair(&d) }
        }
        "factorial_word" => {
            a.finish(0)?;
            Ok(zoo::factorial())
        }
        "product" => product(&words(&a, s)?),
        "merge" => merge(&words(&a, s)?),
        "suffix" => {
            let w = eval(a.req("w", 0)?)?;
            let n = natural(a.req("n", 1)?)?;
            a.finish(2)?;
            suffix(&w, n)
        }
        "image" | "coding" => {
            let w = eval(a.req("w", 0)?)?;
            let m = a.req("map", 1)?;
            let kv = map(m)?;
            let default_out = || {
                let all: String = kv.iter().map(|(_, v)| string(v)).collect::<Result<Vec<_>>>()?.concat();
                zoo::chars_alphabet(&all)
            };
            let out = alphabet_arg(&mut a, 2, default_out)?;
            a.finish(3)?;
            let mut images: Vec<Option<Vec<Letter>>> = vec![None; w.alphabet().len()];
            for (k, v) in &kv {
                let i = w.alphabet().index(k).ok_or_else(|| err(m, format!("letter {k} not in the word's alphabet")))?;
                images[i as usize] = Some(letters(&out, v)?);
            }
            let images: Vec<Vec<Letter>> = images.into_iter().collect::<Option<_>>().ok_or_else(|| err(m, "map must be total"))?;
            if name == "coding" {
                if images.iter().any(|x| x.len() != 1) {
                    return Err(err(m, "a coding maps letters to letters"));
                }
                image_coding(&w, images.into_iter().map(|x| x[0]).collect(), out)
            } else {
                image_uniform(&w, images, out)
            }
        }
        _ => Err(err(s, format!("unknown generator {name}"))),
    }
}

/// Parses and builds a word expression.
pub fn parse_word_expr(text: &str) -> Result<OmegaWord> {
    eval(&parse_expr(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples() {
        assert_eq!(parse_word_expr(r#"periodic("01")"#).unwrap().render_prefix(6).unwrap(), "010101");
        let f = parse_word_expr(r#"morphic(tau={0:"01",1:"0"}, start=0)"#).unwrap();
        assert_eq!(f.render_prefix(5).unwrap(), "01001");
        let p = parse_word_expr("product(sturmian(theta=golden, xi=fib_xi), sturmian(theta=sqrt2m1, xi=0))").unwrap();
        assert!(p.has_ap());
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn generators_and_combinators() {
        let cases = [
            (r#"ult_periodic("10", "0")"#, "100000"),
            ("factorial_word()", "011000"),
            ("sign_static()", "0+++--"),
            ("sign_drift(c=7)", "--+++-"),
            (r#"suffix(periodic("abc"), 2)"#, "cabcab"),
            (r#"image(periodic("01"), {0:"ab", 1:"ba"})"#, "abbaab"),
            (r#"coding(fibonacci, {"0":"x", "1":"y"})"#, "xyxxyx"),
            (r#"merge(periodic("0"), periodic("1"))"#, "010101"),
            ("toric_box(angles=[golden], targets={a:[[0,1/2]], b:[[1/2,1]]}, transient=1, head=\"a\")", "ababaa"),
        ];
        for (src, want) in cases {
            let w = parse_word_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            assert_eq!(w.render_prefix(want.len() as u64).unwrap(), want, "{src}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_word_expr("product(fibonacci,\n  nope)").unwrap_err();
        assert_eq!(e, Error::parse(2, 3, "unknown word nope"));
        assert!(matches!(parse_word_expr("periodic(\"01\""), Err(Error::Parse { line: 1, col: 14, .. })));
        assert!(matches!(parse_word_expr("sturmian(theta=pi, xi=0)"), Err(Error::Parse { col: 16, .. })));
        assert!(matches!(parse_word_expr("periodic(\"01\", bogus=1)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_word_expr("1/0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_word_expr("sturmian(theta=1/3, xi=0)"), Err(Error::Certificate(_))));
    }
}
