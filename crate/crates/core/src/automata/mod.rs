//! Deterministic Muller automata and their annotated transition semigroup.

mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::word::{Alphabet, Letter, OmegaWord};

pub use parse::{parse_automaton, parse_hoa, parse_native};

pub const MAX_STATES: usize = 16;

/// Set of states as a bitmask.
pub type StateSet = u64;

pub fn set_to_vec(s: StateSet) -> Vec<usize> {
    (0..64).filter(|&i| s >> i & 1 == 1).collect()
}

pub fn set_from(states: impl IntoIterator<Item = usize>) -> StateSet {
    states.into_iter().fold(0, |m, q| m | 1 << q)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DMuller {
    pub alphabet: Vec<String>,
    pub initial: usize,
    /// `delta[q][a]`
    pub delta: Vec<Vec<usize>>,
    pub accepting: BTreeSet<StateSet>,
}

impl DMuller {
    pub fn new(alphabet: Vec<String>, initial: usize, delta: Vec<Vec<usize>>, accepting: BTreeSet<StateSet>) -> Result<DMuller> {
        let n = delta.len();
        if n == 0 || n > MAX_STATES {
            return Err(Error::input(format!("automata need 1..={MAX_STATES} states, got {n}")));
        }
        if initial >= n {
            return Err(Error::input("initial state out of range"));
        }
        for row in &delta {
            if row.len() != alphabet.len() {
                return Err(Error::input("incomplete transition table"));
            }
            if row.iter().any(|&t| t >= n) {
                return Err(Error::input("transition to unknown state"));
            }
        }
        if accepting.iter().any(|&s| s == 0 || s >> n != 0) {
            return Err(Error::input("accepting set is empty or mentions unknown states"));
        }
        Ok(DMuller { alphabet, initial, delta, accepting })
    }

    pub fn states(&self) -> usize {
        self.delta.len()
    }

    pub fn step(&self, q: usize, a: usize) -> usize {
        self.delta[q][a]
    }

    pub fn accepts_set(&self, s: StateSet) -> bool {
        self.accepting.contains(&s)
    }

    /// Automaton letter for each letter of `al`, matched by symbol.
    pub fn letter_map(&self, al: &Alphabet) -> Result<Vec<usize>> {
        al.symbols()
            .iter()
            .map(|s| {
                self.alphabet
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::input(format!("word letter {s:?} is not in the automaton alphabet")))
            })
            .collect()
    }

    pub fn letter_index(&self, s: &str) -> Result<usize> {
        self.alphabet.iter().position(|x| x == s).ok_or_else(|| Error::UnknownLetter(s.to_string()))
    }

    /// Render in the native text format.
    pub fn to_native(&self) -> String {
        let mut out = format!("states {}\nalphabet {}\ninitial {}\n", self.states(), self.alphabet.join(" "), self.initial);
        for (q, row) in self.delta.iter().enumerate() {
            for (a, t) in row.iter().enumerate() {
                out.push_str(&format!("trans {q} {} {t}\n", self.alphabet[a]));
            }
        }
        for s in &self.accepting {
            let v: Vec<String> = set_to_vec(*s).iter().map(|q| q.to_string()).collect();
            out.push_str(&format!("muller {{{}}}\n", v.join(" ")));
        }
        out
    }

    /// Random complete automaton; each nonempty state set is accepting with
    /// probability 1/2.
    pub fn random<R: Rng>(rng: &mut R, states: usize, alphabet: &[&str]) -> DMuller {
        let delta = (0..states).map(|_| (0..alphabet.len()).map(|_| rng.gen_range(0..states)).collect()).collect();
        let accepting = (1..1u64 << states).filter(|_| rng.gen_bool(0.5)).collect();
        DMuller::new(alphabet.iter().map(|s| s.to_string()).collect(), 0, delta, accepting)
            .expect("random automaton is well formed")
    }
}

/// Per start state: the end state and every state occupied on the way,
/// including the start and the end.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnnotatedTransform {
    pub end: Vec<u8>,
    pub visited: Vec<StateSet>,
}

impl fmt::Debug for AnnotatedTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.end.len())
            .map(|q| format!("{q}->{}{:?}", self.end[q], set_to_vec(self.visited[q])))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

impl AnnotatedTransform {
    pub fn identity(n: usize) -> AnnotatedTransform {
        AnnotatedTransform { end: (0..n as u8).collect(), visited: (0..n).map(|q| 1 << q).collect() }
    }

    pub fn letter(a: &DMuller, c: usize) -> AnnotatedTransform {
        let n = a.states();
        AnnotatedTransform {
            end: (0..n).map(|q| a.step(q, c) as u8).collect(),
            visited: (0..n).map(|q| 1 << q | 1 << a.step(q, c)).collect(),
        }
    }

    /// `self` then `other`.
    pub fn compose(&self, other: &AnnotatedTransform) -> AnnotatedTransform {
        let end = self.end.iter().map(|&e| other.end[e as usize]).collect();
        let visited = self
            .end
            .iter()
            .zip(&self.visited)
            .map(|(&e, &v)| v | other.visited[e as usize])
            .collect();
        AnnotatedTransform { end, visited }
    }

    pub fn states(&self) -> usize {
        self.end.len()
    }
}

/// Fold of a sequence of transforms; the identity when empty.
pub fn fold(n: usize, ms: &[AnnotatedTransform]) -> AnnotatedTransform {
    ms.iter().fold(AnnotatedTransform::identity(n), |acc, m| acc.compose(m))
}

/// Transform of a finite word over the automaton's letter indices.
pub fn eval_word(a: &DMuller, u: &[usize]) -> Result<AnnotatedTransform> {
    let mut m = AnnotatedTransform::identity(a.states());
    for &c in u {
        if c >= a.alphabet.len() {
            return Err(Error::UnknownLetter(c.to_string()));
        }
        m = m.compose(&AnnotatedTransform::letter(a, c));
    }
    Ok(m)
}

/// Transform of a finite word given by symbols.
pub fn eval_symbols(a: &DMuller, u: &[&str]) -> Result<AnnotatedTransform> {
    let idx: Vec<usize> = u.iter().map(|s| a.letter_index(s)).collect::<Result<_>>()?;
    eval_word(a, &idx)
}

/// `a · b^ω` in the transition semigroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub a: Vec<AnnotatedTransform>,
    pub b: Vec<AnnotatedTransform>,
}

impl LassoWord {
    pub fn new(a: Vec<AnnotatedTransform>, b: Vec<AnnotatedTransform>) -> Result<LassoWord> {
        if b.is_empty() {
            return Err(Error::input("lasso loop must be non-empty"));
        }
        Ok(LassoWord { a, b })
    }
}

/// Acceptance of the run from `q0` on a lasso, with its infinity set.
pub fn lasso_accept(a: &DMuller, l: &LassoWord, q0: usize) -> (bool, StateSet) {
    let n = a.states();
    let q1 = fold(n, &l.a).end[q0] as usize;
    let loop_m = fold(n, &l.b);
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut seq = Vec::new();
    let mut q = q1;
    while !seen.contains_key(&q) {
        seen.insert(q, seq.len());
        seq.push(q);
        q = loop_m.end[q] as usize;
    }
    let inf = seq[seen[&q]..].iter().fold(0, |s, &p| s | loop_m.visited[p]);
    (a.accepts_set(inf), inf)
}

/// Run of the automaton over `w`: the state before reading each letter.
pub fn run_states(a: &DMuller, w: &OmegaWord, len: u64) -> Result<Vec<usize>> {
    let map = a.letter_map(w.alphabet())?;
    let letters = w.prefix(len)?;
    let mut q = a.initial;
    let mut out = Vec::with_capacity(len as usize + 1);
    out.push(q);
    for c in letters {
        q = a.step(q, map[c as usize]);
        out.push(q);
    }
    Ok(out)
}

/// States occupied in the second half of the run over `w[0, horizon)`. A
/// necessary-condition check, not a decision procedure.
pub fn brute_inf(a: &DMuller, w: &OmegaWord, horizon: u64) -> Result<StateSet> {
    let horizon = horizon.max(1);
    let run = run_states(a, w, horizon)?;
    Ok(run[(horizon / 2) as usize..].iter().fold(0, |s, &q| s | 1 << q))
}

/// Symbols of a finite word, for evaluating word letters.
pub fn map_letters(map: &[usize], u: &[Letter]) -> Vec<usize> {
    u.iter().map(|&c| map[c as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// State 1 after reading 1, state 0 after reading 0; accept iff 1 recurs.
    pub(crate) fn inf_ones() -> DMuller {
        let acc = [set_from([1]), set_from([0, 1])].into_iter().collect();
        DMuller::new(vec!["0".into(), "1".into()], 0, vec![vec![0, 1], vec![0, 1]], acc).unwrap()
    }

    #[test]
    fn identity_and_letters() {
        let a = inf_ones();
        assert_eq!(eval_word(&a, &[]).unwrap(), AnnotatedTransform::identity(2));
        let m = eval_word(&a, &[1]).unwrap();
        assert_eq!(m.end, vec![1, 1]);
        assert_eq!(m.visited, vec![0b11, 0b10]);
    }

    #[test]
    fn composition_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = DMuller::random(&mut rng, 4, &["0", "1"]);
            let u: Vec<usize> = (0..rng.gen_range(0..7)).map(|_| rng.gen_range(0..2)).collect();
            let v: Vec<usize> = (0..rng.gen_range(0..7)).map(|_| rng.gen_range(0..2)).collect();
            let uv: Vec<usize> = u.iter().chain(&v).copied().collect();
            let lhs = eval_word(&a, &uv).unwrap();
            assert_eq!(lhs, eval_word(&a, &u).unwrap().compose(&eval_word(&a, &v).unwrap()));
            for q in 0..4 {
                let mut p = q;
                let mut vis = 1u64 << p;
                for &c in &uv {
                    p = a.step(p, c);
                    vis |= 1 << p;
                }
                assert_eq!((lhs.end[q] as usize, lhs.visited[q]), (p, vis));
            }
        }
    }

    #[test]
    fn lasso_examples() {
        let a = inf_ones();
        let l = LassoWord::new(vec![eval_word(&a, &[0]).unwrap()], vec![eval_word(&a, &[0, 1]).unwrap()]).unwrap();
        assert_eq!(lasso_accept(&a, &l, 0), (true, 0b11));
        let idle = LassoWord::new(vec![], vec![AnnotatedTransform::identity(2)]).unwrap();
        assert_eq!(lasso_accept(&a, &idle, 1), (true, 0b10));
        assert_eq!(lasso_accept(&a, &idle, 0), (false, 0b01));
    }
}
