use std::collections::BTreeSet;

use super::{set_from, DMuller, StateSet, MAX_STATES};
use crate::error::{Error, Result};

/// Parse either format; HOA input starts with `HOA:`.
pub fn parse_automaton(text: &str) -> Result<DMuller> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    if first.is_some_and(|l| l.starts_with("HOA:")) {
        parse_hoa(text)
    } else {
        parse_native(text)
    }
}

fn col_of(line: &str, tok: &str) -> usize {
    line.find(tok).map_or(1, |i| i + 1)
}

/// Native format: `states N`, `alphabet a b …`, `initial q`,
/// `trans q a q'` lines and `muller {q …}` lines; `#` starts a comment.
pub fn parse_native(text: &str) -> Result<DMuller> {
    let mut n: Option<usize> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut initial: Option<usize> = None;
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut accepting: BTreeSet<StateSet> = BTreeSet::new();
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        last_line = ln;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |tok: &str, msg: String| Error::parse(ln, col_of(raw, tok), msg);
        let state = |tok: &str| -> Result<usize> {
            let q: usize = tok.parse().map_err(|_| err(tok, format!("bad state {tok:?}")))?;
            match n {
                Some(n) if q < n => Ok(q),
                Some(_) => Err(err(tok, format!("state {q} out of range"))),
                None => Err(err(tok, "`states` must come first".into())),
            }
        };
        match toks[0] {
            "states" => {
                let k: usize = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(toks[0], "expected a state count".into()))?;
                if k == 0 || k > MAX_STATES {
                    return Err(err(toks[1], format!("state count must be 1..={MAX_STATES}")));
                }
                n = Some(k);
            }
            "alphabet" => {
                if toks.len() < 2 {
                    return Err(err(toks[0], "empty alphabet".into()));
                }
                alphabet = Some(toks[1..].iter().map(|s| s.to_string()).collect());
            }
            "initial" => {
                let t = toks.get(1).ok_or_else(|| err(toks[0], "expected a state".into()))?;
                initial = Some(state(t)?);
            }
            "trans" => {
                if toks.len() != 4 {
                    return Err(err(toks[0], "expected `trans q letter q'`".into()));
                }
                let al = alphabet.as_ref().ok_or_else(|| err(toks[0], "`alphabet` must come first".into()))?;
                let (q, t) = (state(toks[1])?, state(toks[3])?);
                let a = al
                    .iter()
                    .position(|x| x == toks[2])
                    .ok_or_else(|| err(toks[2], format!("unknown letter {:?}", toks[2])))?;
                if delta.is_empty() {
                    delta = vec![vec![None; al.len()]; n.unwrap()];
                }
                match delta[q][a] {
                    Some(t0) if t0 != t => {
                        return Err(err(toks[0], format!("nondeterministic: {q} --{}--> {t0} and {t}", toks[2])))
                    }
                    _ => delta[q][a] = Some(t),
                }
            }
            "muller" => {
                let rest = line["muller".len()..].trim();
                let inner = rest
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| err(toks[0], "expected `muller {q …}`".into()))?;
                let qs: Vec<usize> = inner.split_whitespace().map(&state).collect::<Result<_>>()?;
                if qs.is_empty() {
                    return Err(err(toks[0], "empty accepting set".into()));
                }
                accepting.insert(set_from(qs));
            }
            other => return Err(err(other, format!("unknown directive {other:?}"))),
        }
    }
    let end = |msg: &str| Error::parse(last_line, 1, msg.to_string());
    let n = n.ok_or_else(|| end("missing `states`"))?;
    let alphabet = alphabet.ok_or_else(|| end("missing `alphabet`"))?;
    let initial = initial.ok_or_else(|| end("missing `initial`"))?;
    if delta.is_empty() {
        delta = vec![vec![None; alphabet.len()]; n];
    }
    let mut full = Vec::with_capacity(n);
    for (q, row) in delta.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (a, t) in row.iter().enumerate() {
            r.push(t.ok_or_else(|| end(&format!("incomplete: no transition from {q} on {}", alphabet[a])))?);
        }
        full.push(r);
    }
    DMuller::new(alphabet, initial, full, accepting)
}

#[derive(Debug, Clone)]
enum Label {
    True,
    False,
    Ap(usize),
    Not(Box<Label>),
    And(Box<Label>, Box<Label>),
    Or(Box<Label>, Box<Label>),
}

impl Label {
    fn eval(&self, v: usize) -> bool {
        match self {
            Label::True => true,
            Label::False => false,
            Label::Ap(i) => v >> i & 1 == 1,
            Label::Not(e) => !e.eval(v),
            Label::And(a, b) => a.eval(v) && b.eval(v),
            Label::Or(a, b) => a.eval(v) || b.eval(v),
        }
    }
}

struct LabelParser<'a> {
    s: &'a [u8],
    pos: usize,
    aps: usize,
}

impl LabelParser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn or(&mut self) -> std::result::Result<Label, String> {
        let mut l = self.and()?;
        loop {
            self.ws();
            if self.s.get(self.pos) == Some(&b'|') {
                self.pos += 1;
                l = Label::Or(Box::new(l), Box::new(self.and()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn and(&mut self) -> std::result::Result<Label, String> {
        let mut l = self.atom()?;
        loop {
            self.ws();
            if self.s.get(self.pos) == Some(&b'&') {
                self.pos += 1;
                l = Label::And(Box::new(l), Box::new(self.atom()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn atom(&mut self) -> std::result::Result<Label, String> {
        self.ws();
        match self.s.get(self.pos) {
            Some(b'!') => {
                self.pos += 1;
                Ok(Label::Not(Box::new(self.atom()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.or()?;
                self.ws();
                if self.s.get(self.pos) != Some(&b')') {
                    return Err("expected `)`".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(Label::True)
            }
            Some(b'f') => {
                self.pos += 1;
                Ok(Label::False)
            }
            Some(c) if c.is_ascii_digit() => {
                let st = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let i: usize = std::str::from_utf8(&self.s[st..self.pos]).unwrap().parse().unwrap();
                if i >= self.aps {
                    return Err(format!("atomic proposition {i} not declared"));
                }
                Ok(Label::Ap(i))
            }
            _ => Err("expected a label expression".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cond {
    Buchi,
    Parity { max: bool, odd: bool },
}

/// Header tokens, honouring double-quoted strings.
fn tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '"' => {
                cur.push(c);
                quoted = !quoted;
            }
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// HOA v1 subset: deterministic, complete, state-based Büchi or parity
/// acceptance. Letters are valuations written as bit strings, AP 0 first.
pub fn parse_hoa(text: &str) -> Result<DMuller> {
    let mut n: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut aps: Option<usize> = None;
    let mut cond: Option<Cond> = None;
    let mut props: Vec<String> = Vec::new();
    let mut in_body = false;
    let mut cur: Option<usize> = None;
    let mut marks: Vec<Option<usize>> = Vec::new();
    let mut edges: Vec<Vec<(Label, usize, usize)>> = Vec::new();
    let mut ended = false;
    let mut last = 0;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        last = ln;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |tok: &str, msg: String| Error::parse(ln, col_of(raw, tok), msg);
        if !in_body {
            if line == "--BODY--" {
                let k = n.ok_or_else(|| err(line, "missing `States:`".into()))?;
                marks = vec![None; k];
                edges = vec![vec![]; k];
                in_body = true;
                continue;
            }
            let (key, rest) = line.split_once(':').ok_or_else(|| err(line, "expected `Header: value`".into()))?;
            let toks = tokens(rest);
            match key {
                "HOA" => {
                    if toks.first().map(String::as_str) != Some("v1") {
                        return Err(err(line, "only HOA v1 is supported".into()));
                    }
                }
                "States" => {
                    let k: usize = toks
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(rest, "bad state count".into()))?;
                    if k == 0 || k > MAX_STATES {
                        return Err(err(rest, format!("state count must be 1..={MAX_STATES}")));
                    }
                    n = Some(k);
                }
                "Start" => {
                    if start.is_some() || toks.len() != 1 {
                        return Err(err(rest, "exactly one initial state is supported".into()));
                    }
                    start = Some(toks[0].parse().map_err(|_| err(rest, "bad start state".into()))?);
                }
                "AP" => {
                    let k: usize = toks
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(rest, "bad AP count".into()))?;
                    if k > 6 {
                        return Err(err(rest, "at most 6 atomic propositions".into()));
                    }
                    aps = Some(k);
                }
                "acc-name" => {
                    let t: Vec<&str> = toks.iter().map(String::as_str).collect();
                    cond = Some(match t.as_slice() {
                        ["Buchi"] => Cond::Buchi,
                        ["parity", mm, eo, _] if matches!(*mm, "min" | "max") && matches!(*eo, "even" | "odd") => {
                            Cond::Parity { max: *mm == "max", odd: *eo == "odd" }
                        }
                        _ => return Err(err(rest, format!("unsupported acceptance {:?}", rest.trim()))),
                    });
                }
                "properties" => props.extend(toks),
                "Acceptance" | "name" | "tool" | "spot-state-ordering" => {}
                other => return Err(err(other, format!("unsupported header {other:?}"))),
            }
            continue;
        }
        if line == "--END--" {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("State:") {
            let toks = tokens(rest);
            let q: usize = toks
                .first()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(rest, "bad state number".into()))?;
            if q >= marks.len() {
                return Err(err(rest, format!("state {q} out of range")));
            }
            if let Some(m) = rest.find('{') {
                let close = rest.find('}').ok_or_else(|| err(rest, "unclosed acceptance set".into()))?;
                let sets: Vec<usize> = rest[m + 1..close]
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| err(t, "bad acceptance mark".into())))
                    .collect::<Result<_>>()?;
                if sets.len() > 1 {
                    return Err(err(rest, "one acceptance mark per state".into()));
                }
                marks[q] = sets.first().copied();
            }
            cur = Some(q);
            continue;
        }
        let q = cur.ok_or_else(|| err(line, "edge before any `State:`".into()))?;
        let open = line.strip_prefix('[').ok_or_else(|| err(line, "only labelled edges are supported".into()))?;
        let close = open.find(']').ok_or_else(|| err(line, "unclosed label".into()))?;
        let k = aps.ok_or_else(|| err(line, "missing `AP:`".into()))?;
        let mut p = LabelParser { s: open[..close].as_bytes(), pos: 0, aps: k };
        let label = p.or().map_err(|m| err(line, m))?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(err(line, "trailing input in label".into()));
        }
        let target_s = open[close + 1..].trim();
        if target_s.contains('{') {
            return Err(err(target_s, "transition-based acceptance is not supported".into()));
        }
        let t: usize = target_s.parse().map_err(|_| err(target_s, "bad target state".into()))?;
        if t >= marks.len() {
            return Err(err(target_s, format!("state {t} out of range")));
        }
        edges[q].push((label, t, ln));
    }
    let end = |msg: String| Error::parse(last, 1, msg);
    if !ended {
        return Err(end("missing `--END--`".into()));
    }
    for need in ["deterministic", "complete"] {
        if !props.iter().any(|p| p == need) {
            return Err(end(format!("property `{need}` is required")));
        }
    }
    let n = n.unwrap();
    let aps = aps.ok_or_else(|| end("missing `AP:`".into()))?;
    let start = start.ok_or_else(|| end("missing `Start:`".into()))?;
    if start >= n {
        return Err(end("start state out of range".into()));
    }
    let cond = cond.ok_or_else(|| end("missing `acc-name:`".into()))?;
    let letters = 1usize << aps;
    let alphabet: Vec<String> = (0..letters).map(|v| (0..aps).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()).collect();
    let alphabet = if aps == 0 { vec!["".to_string()] } else { alphabet };
    let mut delta = vec![vec![0; letters]; n];
    for q in 0..n {
        for v in 0..letters {
            let hits: Vec<&(Label, usize, usize)> = edges[q].iter().filter(|(l, _, _)| l.eval(v)).collect();
            match hits.as_slice() {
                [] => return Err(end(format!("incomplete: state {q} has no edge for valuation {}", alphabet[v]))),
                [(_, t, _), rest @ ..] => {
                    if let Some((_, t2, l2)) = rest.iter().find(|(_, t2, _)| t2 != t) {
                        return Err(Error::parse(*l2, 1, format!("nondeterministic: state {q} reaches {t} and {t2}")));
                    }
                    delta[q][v] = *t;
                }
            }
        }
    }
    let accepting = to_muller(n, cond, &marks).map_err(end)?;
    DMuller::new(alphabet, start, delta, accepting)
}

fn to_muller(n: usize, cond: Cond, marks: &[Option<usize>]) -> std::result::Result<BTreeSet<StateSet>, String> {
    let mut out = BTreeSet::new();
    if let Cond::Parity { .. } = cond {
        if let Some(q) = marks.iter().position(Option::is_none) {
            return Err(format!("parity automaton: state {q} has no priority"));
        }
    }
    for s in 1..1u64 << n {
        let states = (0..n).filter(|&q| s >> q & 1 == 1);
        let ok = match cond {
            Cond::Buchi => states.into_iter().any(|q| marks[q] == Some(0)),
            Cond::Parity { max, odd } => {
                let pr = states.map(|q| marks[q].unwrap());
                let p = if max { pr.max() } else { pr.min() }.unwrap();
                (p % 2 == 1) == odd
            }
        };
        if ok {
            out.insert(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NATIVE: &str = "\
# infinitely many 1s
states 2
alphabet 0 1
initial 0
trans 0 0 0
trans 0 1 1
trans 1 0 0
trans 1 1 1
muller {1}
muller {0 1}
";

    #[test]
    fn native_roundtrip() {
        let a = parse_native(NATIVE).unwrap();
        assert_eq!(a.delta, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(parse_native(&a.to_native()).unwrap(), a);
    }

    #[test]
    fn native_errors_are_located() {
        let missing = NATIVE.replace("trans 1 1 1\n", "");
        let e = parse_native(&missing).unwrap_err();
        assert!(e.to_string().contains("incomplete"), "{e}");
        let nondet = format!("{NATIVE}trans 0 0 1\n");
        let e = parse_native(&nondet).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 11, .. }), "{e:?}");
        assert!(e.to_string().contains("nondeterministic"));
        let e = parse_native("states 2\nalphabet 0 1\ninitial 5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, col: 9, .. }), "{e:?}");
    }

    const HOA_BUCHI: &str = r#"HOA: v1
States: 2
Start: 0
AP: 1 "p"
acc-name: Buchi
Acceptance: 1 Inf(0)
properties: deterministic complete state-acc
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {0}
[!0] 0
[0] 1
--END--
"#;

    #[test]
    fn hoa_buchi_becomes_muller() {
        let a = parse_automaton(HOA_BUCHI).unwrap();
        assert_eq!(a.alphabet, vec!["0", "1"]);
        let want: BTreeSet<StateSet> = (1..4u64).filter(|s| s & 0b10 != 0).collect();
        assert_eq!(a.accepting, want);
    }

    #[test]
    fn hoa_parity_matches_enumeration() {
        let text = r#"HOA: v1
States: 3
Start: 0
AP: 1 "p"
acc-name: parity min even 2
Acceptance: 2 Inf(0) | Fin(1)
properties: deterministic complete
--BODY--
State: 0 {1}
[t] 1
State: 1 {0}
[0] 2
[!0] 0
State: 2 {1}
[0 | !0] 2
--END--
"#;
        let a = parse_hoa(text).unwrap();
        let prio = [1, 0, 1];
        for s in 1..8u64 {
            let min = (0..3).filter(|q| s >> q & 1 == 1).map(|q| prio[q]).min().unwrap();
            assert_eq!(a.accepting.contains(&s), min % 2 == 0, "set {s:b}");
        }
    }

    #[test]
    fn hoa_rejects_nondeterminism_and_gaps() {
        let nondet = HOA_BUCHI.replace("[0] 1\nState: 1", "[t] 1\nState: 1");
        assert!(parse_hoa(&nondet).unwrap_err().to_string().contains("nondeterministic"));
        let gap = HOA_BUCHI.replace("[!0] 0\n[0] 1\n--END--", "[0] 1\n--END--");
        assert!(parse_hoa(&gap).unwrap_err().to_string().contains("incomplete"));
        let noprop = HOA_BUCHI.replace("properties: deterministic complete state-acc\n", "");
        assert!(parse_hoa(&noprop).is_err());
    }
}
