//! Acceptance over words with an occurrence-bound oracle, via the word of
//! automaton states.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::automata::{brute_inf, set_to_vec, DMuller, StateSet};
use crate::error::{Error, Result};
use crate::word::{Alphabet, Letter, LetterSource, OmegaWord, Tag};

/// Limits for the state-word bound construction.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Largest context length tried.
    pub max_context: usize,
    /// Largest product graph.
    pub max_nodes: usize,
    /// Letters simulated while looking for a bottom component.
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_context: 96, max_nodes: 1 << 16, max_steps: 1 << 24 }
    }
}

/// Per-state outcome of the bound construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateBounds {
    pub context: usize,
    /// From here on every factor of length `context + 1` is recurrent.
    pub horizon: u64,
    /// Position where the run enters its final component.
    pub entry: u64,
    /// `(recurrent, bound)` per state.
    pub states: Vec<(bool, u64)>,
}

/// Recurrent factors of each length, grown one letter at a time.
struct FactorTree<'a> {
    w: &'a OmegaWord,
    levels: Vec<Vec<Vec<Letter>>>,
    horizon: u64,
}

impl<'a> FactorTree<'a> {
    fn new(w: &'a OmegaWord) -> Self {
        FactorTree { w, levels: vec![vec![vec![]]], horizon: 0 }
    }

    fn level(&mut self, k: usize) -> Result<&[Vec<Letter>]> {
        while self.levels.len() <= k {
            let mut next = Vec::new();
            for u in self.levels.last().unwrap() {
                for a in 0..self.w.alphabet().len() as Letter {
                    let mut v = u.clone();
                    v.push(a);
                    let c = self.w.classify_factor(&v)?;
                    match c.tag {
                        Tag::Recurrent => next.push(v),
                        Tag::Transient => self.horizon = self.horizon.max(c.bound),
                    }
                }
            }
            if next.is_empty() {
                return Err(Error::Certificate(format!("{} has no recurrent factor of length {}", self.w.name(), self.levels.len())));
            }
            self.levels.push(next);
        }
        Ok(&self.levels[k])
    }
}

/// Strongly connected components, numbered in reverse topological order.
fn scc(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let (mut next, mut ncomp) = (0, 0);
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let t = adj[v][*i];
                *i += 1;
                if index[t] == usize::MAX {
                    index[t] = next;
                    low[t] = next;
                    next += 1;
                    stack.push(t);
                    on[t] = true;
                    call.push((t, 0));
                } else if on[t] {
                    low[v] = low[v].min(index[t]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let x = stack.pop().unwrap();
                        on[x] = false;
                        comp[x] = ncomp;
                        if x == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Longest path, counted in nodes, inside `keep`; `None` if `keep` has a cycle.
fn longest_path(adj: &[Vec<usize>], keep: &[bool]) -> Option<u64> {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for v in (0..n).filter(|&v| keep[v]) {
        for &t in &adj[v] {
            if keep[t] {
                indeg[t] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| keep[v] && indeg[v] == 0).collect();
    let mut depth = vec![1u64; n];
    let mut done = 0;
    let mut best = 0;
    while let Some(v) = queue.pop() {
        done += 1;
        best = best.max(depth[v]);
        for &t in &adj[v] {
            if keep[t] {
                depth[t] = depth[t].max(depth[v] + 1);
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push(t);
                }
            }
        }
    }
    (done == keep.iter().filter(|&&k| k).count()).then_some(best)
}

/// Bounds for every state of the run of `a` over `w`.
pub fn state_bounds(a: &DMuller, w: &OmegaWord, budget: &Budget) -> Result<StateBounds> {
    if !w.has_ap() {
        return Err(Error::ClassificationUnavailable(format!("{} carries no occurrence-bound oracle", w.name())));
    }
    let map = a.letter_map(w.alphabet())?;
    let nq = a.states();
    let mut tree = FactorTree::new(w);
    let mut steps = 0u64;
    let mut ell = 1;
    loop {
        if ell > budget.max_context {
            return Err(Error::Budget(format!(
                "no state-word bound with contexts up to {} letters",
                budget.max_context
            )));
        }
        let nodes: Vec<Vec<Letter>> = tree.level(ell)?.to_vec();
        let ext: Vec<Vec<Letter>> = tree.level(ell + 1)?.to_vec();
        if nodes.len() * nq > budget.max_nodes {
            return Err(Error::Budget(format!("product graph exceeds {} nodes", budget.max_nodes)));
        }
        let idx: HashMap<&[Letter], usize> = nodes.iter().enumerate().map(|(i, u)| (u.as_slice(), i)).collect();
        let node = |q: usize, u: usize| q * nodes.len() + u;
        let mut adj = vec![Vec::new(); nq * nodes.len()];
        for v in &ext {
            let (from, to) = (idx[&v[..ell]], idx[&v[1..]]);
            for q in 0..nq {
                adj[node(q, from)].push(node(a.step(q, map[v[0] as usize]), to));
            }
        }
        let comp = scc(&adj);
        let bottom: Vec<bool> = {
            let mut b = vec![true; adj.len()];
            for (v, ts) in adj.iter().enumerate() {
                if ts.iter().any(|&t| comp[t] != comp[v]) {
                    b[comp[v]] = false;
                }
            }
            b
        };
        // walk the actual run from the horizon into a bottom component
        let h = tree.horizon;
        let mut q = a.initial;
        for c in w.prefix(h)? {
            q = a.step(q, map[c as usize]);
        }
        let limit = (64 * adj.len() as u64).min(budget.max_steps.saturating_sub(steps));
        let mut pos = h;
        let mut cur = w.factor(h, h + ell as u64)?;
        let mut entered = None;
        for _ in 0..=limit {
            let u = *idx.get(cur.as_slice()).ok_or_else(|| {
                Error::Certificate(format!("factor at {pos} is not recurrent past the horizon {h}"))
            })?;
            if bottom[comp[node(q, u)]] {
                entered = Some((pos, comp[node(q, u)]));
                break;
            }
            q = a.step(q, map[cur[0] as usize]);
            cur.remove(0);
            cur.push(w.letter_at(pos + ell as u64)?);
            pos += 1;
        }
        steps += pos - h;
        if let Some((entry, c)) = entered {
            let in_c: Vec<bool> = comp.iter().map(|&x| x == c).collect();
            let mut states = Vec::with_capacity(nq);
            let mut ok = true;
            for s in 0..nq {
                if !(0..nodes.len()).any(|u| in_c[node(s, u)]) {
                    states.push((false, entry.max(1)));
                    continue;
                }
                let keep: Vec<bool> = (0..adj.len()).map(|v| in_c[v] && v / nodes.len() != s).collect();
                match longest_path(&adj, &keep) {
                    Some(l) => states.push((true, entry + l + 1)),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(StateBounds { context: ell, horizon: h, entry, states });
            }
        }
        if steps >= budget.max_steps {
            return Err(Error::Budget(format!("run simulation exceeded {} letters", budget.max_steps)));
        }
        ell = if ell < 8 { ell + 1 } else { ell + ell / 2 };
    }
}

/// Run of an automaton, restartable from checkpoints.
struct RunSource {
    a: DMuller,
    w: OmegaWord,
    map: Vec<usize>,
    checkpoints: Mutex<Vec<usize>>,
}

const STRIDE: u64 = 1 << 14;

impl RunSource {
    fn state_at(&self, n: u64) -> Result<usize> {
        let k = (n / STRIDE) as usize;
        let mut cps = self.checkpoints.lock().unwrap();
        while cps.len() <= k {
            let i = cps.len() as u64 - 1;
            let mut q = cps[i as usize];
            for c in self.w.factor(i * STRIDE, (i + 1) * STRIDE)? {
                q = self.a.step(q, self.map[c as usize]);
            }
            cps.push(q);
        }
        let mut q = cps[k];
        drop(cps);
        for c in self.w.factor(k as u64 * STRIDE, n)? {
            q = self.a.step(q, self.map[c as usize]);
        }
        Ok(q)
    }
}

impl LetterSource for RunSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        Ok(self.state_at(n)? as Letter)
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        let mut q = self.state_at(start)?;
        let letters = self.w.factor(start, start + out.len() as u64 - 1)?;
        out[0] = q as Letter;
        for (x, c) in out[1..].iter_mut().zip(letters) {
            q = self.a.step(q, self.map[c as usize]);
            *x = q as Letter;
        }
        Ok(())
    }
}

pub fn state_alphabet(a: &DMuller) -> Alphabet {
    Alphabet::new((0..a.states()).map(|q| format!("q{q}"))).expect("distinct state names")
}

/// The word of states `σ(n)` occupied before reading `w(n)`. Its occurrence
/// bounds cover single states only.
pub fn state_word(a: &DMuller, w: &OmegaWord, budget: Budget) -> Result<OmegaWord> {
    state_word_cell(a, w, budget).map(|(s, _)| s)
}

type BoundsCell = Arc<OnceLock<Result<StateBounds>>>;

fn state_word_cell(a: &DMuller, w: &OmegaWord, budget: Budget) -> Result<(OmegaWord, BoundsCell)> {
    if !w.has_ap() {
        return Err(Error::ClassificationUnavailable(format!("{} carries no occurrence-bound oracle", w.name())));
    }
    let map = a.letter_map(w.alphabet())?;
    let src = RunSource { a: a.clone(), w: w.clone(), map, checkpoints: Mutex::new(vec![a.initial]) };
    let (a2, w2) = (a.clone(), w.clone());
    let cell: BoundsCell = Arc::new(OnceLock::new());
    let shared = cell.clone();
    let ap = move |u: &[Letter]| -> Result<u64> {
        if u.len() != 1 {
            return Err(Error::ClassificationUnavailable("state-word bounds cover single states only".into()));
        }
        let b = cell.get_or_init(|| state_bounds(&a2, &w2, &budget)).clone()?;
        Ok(b.states[u[0] as usize].1)
    };
    let sigma = OmegaWord::builder(format!("run of automaton over {}", w.name()), state_alphabet(a), Arc::new(src))
        .ap(Arc::new(ap))
        .build();
    Ok((sigma, shared))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCertificate {
    pub state: usize,
    pub bound: u64,
    pub window: (u64, u64),
    pub found_at: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EapReport {
    pub accepted: bool,
    pub inf_set: Vec<usize>,
    pub certificates: Vec<StateCertificate>,
    /// Context length and horizon the bound construction settled on.
    pub context: usize,
    pub horizon: u64,
}

impl EapReport {
    pub fn inf_mask(&self) -> StateSet {
        self.inf_set.iter().fold(0, |s, &q| s | 1 << q)
    }
}

/// Classify every state of the run by scanning `σ[R(q), 2R(q))`.
pub fn accept_eap_with(a: &DMuller, w: &OmegaWord, budget: Budget) -> Result<EapReport> {
    let (sigma, cell) = state_word_cell(a, w, budget)?;
    let mut certificates = Vec::with_capacity(a.states());
    let mut inf = 0;
    for q in 0..a.states() {
        let c = sigma.classify_factor(&[q as Letter])?;
        if c.tag == Tag::Recurrent {
            inf |= 1 << q;
        }
        certificates.push(StateCertificate { state: q, bound: c.bound, window: (c.bound, 2 * c.bound), found_at: c.found_at });
    }
    let (context, horizon) = match cell.get() {
        Some(Ok(b)) => (b.context, b.horizon),
        _ => (0, 0),
    };
    Ok(EapReport { accepted: a.accepts_set(inf), inf_set: set_to_vec(inf), certificates, context, horizon })
}

pub fn accept_eap(a: &DMuller, w: &OmegaWord) -> Result<(bool, StateSet)> {
    let r = accept_eap_with(a, w, Budget::default())?;
    Ok((r.accepted, r.inf_mask()))
}

/// Uncertified guess from the tail of a finite run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guess {
    pub accepted: bool,
    pub inf_set: StateSet,
    pub certified: bool,
}

pub fn accept_with_budget(a: &DMuller, w: &OmegaWord, horizon: u64) -> Result<Guess> {
    let inf = brute_inf(a, w, horizon)?;
    Ok(Guess { accepted: a.accepts_set(inf), inf_set: inf, certified: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::set_from;
    use crate::torus::spec::periodic_spec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn periodic(a: &[u32], b: &[u32]) -> OmegaWord {
        let al = Alphabet::from_chars("01").unwrap();
        OmegaWord::from_torus("p", al, periodic_spec(a, b, 2).unwrap()).unwrap()
    }

    fn inf_ones() -> DMuller {
        let acc = [set_from([1]), set_from([0, 1])].into_iter().collect();
        DMuller::new(vec!["0".into(), "1".into()], 0, vec![vec![0, 1], vec![0, 1]], acc).unwrap()
    }

    #[test]
    fn scc_numbering() {
        let adj = vec![vec![1], vec![0, 2], vec![2]];
        let c = scc(&adj);
        assert_eq!(c[0], c[1]);
        assert_ne!(c[0], c[2]);
        assert_eq!(longest_path(&adj, &[true, false, true]), None);
        assert_eq!(longest_path(&[vec![1], vec![2], vec![]], &[true; 3]), Some(3));
        assert_eq!(longest_path(&adj, &[true, true, false]), None);
    }

    #[test]
    fn periodic_run() {
        let a = inf_ones();
        let w = periodic(&[], &[0, 1]);
        let r = accept_eap_with(&a, &w, Budget::default()).unwrap();
        assert!(r.accepted);
        assert_eq!(r.inf_set, vec![0, 1]);
        let sigma = state_word(&a, &w, Budget::default()).unwrap();
        assert_eq!(sigma.letter_at(0).unwrap(), 0);
        assert_eq!(sigma.render_prefix(5).unwrap(), "q0q0q1q0q1");
        let g = accept_with_budget(&a, &w, 10).unwrap();
        assert_eq!((g.accepted, g.inf_set, g.certified), (true, 0b11, false));
    }

    #[test]
    fn random_lassos_match_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let pre: Vec<u32> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..2)).collect();
            let per: Vec<u32> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..2)).collect();
            let k = rng.gen_range(1..=5);
            let a = DMuller::random(&mut rng, k, &["0", "1"]);
            let w = periodic(&pre, &per);
            let (ok, inf) = accept_eap(&a, &w).unwrap();
            let truth = brute_inf(&a, &w, 4000).unwrap();
            assert_eq!(inf, truth, "{pre:?} {per:?}");
            assert_eq!(ok, a.accepts_set(truth));
        }
    }

    #[test]
    fn state_bounds_are_sound_on_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = DMuller::random(&mut rng, 4, &["0", "1"]);
            let w = periodic(&[1, 1, 0], &[0, 1, 1]);
            let b = state_bounds(&a, &w, &Budget::default()).unwrap();
            let sigma = state_word(&a, &w, Budget::default()).unwrap();
            let run = sigma.prefix(5000).unwrap();
            for (q, &(rec, r)) in b.states.iter().enumerate() {
                let r = r as usize;
                if rec {
                    assert!(run.windows(r).all(|x| x.contains(&(q as u32))));
                } else {
                    assert!(!run[r..].contains(&(q as u32)));
                }
            }
        }
    }

    #[test]
    fn refuses_without_oracle() {
        let w = OmegaWord::builder("bare", Alphabet::from_chars("01").unwrap(), Arc::new(|_n: u64| Ok(0))).build();
        assert!(matches!(accept_eap(&inf_ones(), &w), Err(Error::ClassificationUnavailable(_))));
    }
}
