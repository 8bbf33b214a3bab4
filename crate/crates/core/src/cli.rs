//! Commands behind the `toricdec` binary, usable in-process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automata::{brute_inf, lasso_accept, parse_automaton, set_to_vec, DMuller, StateSet};
use crate::error::{Error, Result};
use crate::profinite::word_lasso_with;
use crate::semenov::{accept_eap_with, Budget, StateCertificate};
use crate::torus::lattice::{orbit_closure, relation_lattice};
use crate::torus::real::DEFAULT_MAX_BITS;
use crate::torus::Real;
use crate::word::{OmegaWord, Tag};
use crate::zoo::{self, DriftSignSpec};

#[derive(Clone, Copy, Debug)]
pub struct Config {
    /// Bits of precision for real-number searches.
    pub precision_bits: u32,
    /// Letters simulated, or substitution levels unfolded.
    pub step_budget: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { precision_bits: DEFAULT_MAX_BITS, step_budget: 1 << 24 }
    }
}

impl Config {
    fn semenov(&self) -> Budget {
        Budget { max_steps: self.step_budget, ..Budget::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Semenov,
    Profinite,
    Auto,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetUsed {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub context: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub horizon: Option<u64>,
    /// Semigroup elements in the lasso.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lasso: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub verdict: String,
    pub inf_set: Vec<usize>,
    pub certificates: Vec<StateCertificate>,
    pub pipeline: Pipeline,
    pub budget_used: BudgetUsed,
}

impl Report {
    pub fn accepted(&self) -> bool {
        self.verdict == "accepted"
    }

    pub fn inf_mask(&self) -> StateSet {
        self.inf_set.iter().fold(0, |s, &q| s | 1 << q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Report> {
        serde_json::from_str(s).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
    }
}

fn verdict(b: bool) -> String {
    if b { "accepted" } else { "rejected" }.into()
}

const INF_ONES: &str = "\
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

const FIN_ONES: &str = "\
# finitely many 1s
states 2
alphabet 0 1
initial 0
trans 0 0 0
trans 0 1 1
trans 1 0 0
trans 1 1 1
muller {0}
";

const NO_11: &str = "\
# 11 never occurs
states 3
alphabet 0 1
initial 0
trans 0 0 0
trans 0 1 1
trans 1 0 0
trans 1 1 2
trans 2 0 2
trans 2 1 2
muller {0}
muller {0 1}
";

pub const BUILTIN_AUTOMATA: &[(&str, &str)] = &[("inf-ones", INF_ONES), ("fin-ones", FIN_ONES), ("no-11", NO_11)];

/// A named built-in automaton, or the contents of a file.
pub fn load_automaton(spec: &str) -> Result<DMuller> {
    if let Some((_, text)) = BUILTIN_AUTOMATA.iter().find(|(n, _)| *n == spec) {
        return parse_automaton(text);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::input(format!("{spec}: {e}")))?;
    parse_automaton(&text)
}

/// A word expression, or `@path` for one stored in a file.
pub fn load_word(spec: &str) -> Result<OmegaWord> {
    match spec.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::input(format!("{path}: {e}")))?;
            crate::dsl::parse_word_expr(&text)
        }
        None => crate::dsl::parse_word_expr(spec),
    }
}

pub fn cmd_print(w: &OmegaWord, n: u64) -> Result<String> {
    w.render_prefix(n)
}

pub fn cmd_classify(w: &OmegaWord, u: &str) -> Result<String> {
    let letters = w.alphabet().parse_word(u)?;
    let c = w.classify_factor(&letters)?;
    let mut s = match c.tag {
        Tag::Recurrent => format!("recurrent R={}", c.bound),
        Tag::Transient => format!("transient R={}", c.bound),
    };
    if let Some(k) = c.found_at {
        write!(s, " found_at={k}").unwrap();
    }
    Ok(s)
}

fn accept_semenov(a: &DMuller, w: &OmegaWord, cfg: &Config) -> Result<Report> {
    let r = accept_eap_with(a, w, cfg.semenov())?;
    Ok(Report {
        verdict: verdict(r.accepted),
        inf_set: r.inf_set,
        certificates: r.certificates,
        pipeline: Pipeline::Semenov,
        budget_used: BudgetUsed { context: Some(r.context), horizon: Some(r.horizon), lasso: None },
    })
}

fn accept_profinite(a: &DMuller, w: &OmegaWord, cfg: &Config) -> Result<Report> {
    let l = word_lasso_with(a, w, cfg.step_budget)?;
    let (acc, inf) = lasso_accept(a, &l, a.initial);
    Ok(Report {
        verdict: verdict(acc),
        inf_set: set_to_vec(inf),
        certificates: vec![],
        pipeline: Pipeline::Profinite,
        budget_used: BudgetUsed { lasso: Some(l.a.len() + l.b.len()), ..BudgetUsed::default() },
    })
}

/// `auto` prefers the exact semigroup route when the word has a finite
/// description.
pub fn cmd_accept(w: &OmegaWord, a: &DMuller, pipeline: Pipeline, cfg: &Config) -> Result<Report> {
    match pipeline {
        Pipeline::Semenov => accept_semenov(a, w, cfg),
        Pipeline::Profinite => accept_profinite(a, w, cfg),
        Pipeline::Auto if w.structure().is_some() => accept_profinite(a, w, cfg),
        Pipeline::Auto => accept_semenov(a, w, cfg),
    }
}

pub fn cmd_closure(angles: &[Real]) -> Result<String> {
    let basis = relation_lattice(angles, &[])?;
    let c = orbit_closure(angles, &basis)?;
    Ok(format!("L={}, rank={}, points={}", c.order, c.rank, c.points.len()))
}

fn show_set(s: StateSet) -> String {
    let v: Vec<String> = set_to_vec(s).iter().map(usize::to_string).collect();
    format!("{{{}}}", v.join(","))
}

/// Runs every applicable certified pipeline and a finite simulation; the
/// last line is `AGREE` or `DISAGREE`.
pub fn cmd_crosscheck(w: &OmegaWord, a: &DMuller, horizon: u64, cfg: &Config) -> Result<String> {
    let mut out = String::new();
    let mut seen: Vec<(bool, StateSet)> = Vec::new();
    for p in [Pipeline::Semenov, Pipeline::Profinite] {
        let available = match p {
            Pipeline::Semenov => w.has_ap(),
            _ => w.structure().is_some(),
        };
        if !available {
            continue;
        }
        let r = cmd_accept(w, a, p, cfg)?;
        writeln!(out, "{:?}: {} {}", p, r.verdict, show_set(r.inf_mask())).unwrap();
        seen.push((r.accepted(), r.inf_mask()));
    }
    if seen.is_empty() {
        return Err(Error::ClassificationUnavailable(format!("no certified pipeline applies to {}", w.name())));
    }
    let inf = brute_inf(a, w, horizon)?;
    writeln!(out, "Brute({horizon}): {} {}", verdict(a.accepts_set(inf)), show_set(inf)).unwrap();
    seen.push((a.accepts_set(inf), inf));
    let agree = seen.windows(2).all(|p| p[0] == p[1]);
    out.push_str(if agree { "AGREE" } else { "DISAGREE" });
    Ok(out)
}

pub fn cmd_gaps(b: u64, cfg: &Config) -> Result<String> {
    let spec = DriftSignSpec { max_bits: cfg.precision_bits, ..DriftSignSpec::standard() };
    let n = zoo::gap_witness(&spec, b, cfg.step_budget)?;
    let occ = zoo::plus_minus_occurrences(&spec, 5, n + b)?;
    let occ: Vec<String> = occ.iter().map(u64::to_string).collect();
    Ok(format!("window [{n}, {}) has no (+,-)\n(+,-) after it at {}", n + b, occ.join(", ")))
}

const FIXTURE_PREFIX: u64 = 200;

/// Golden files: word prefixes, the derived intercept, a closure, and the
/// built-in automata.
pub fn fixture_files() -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for name in zoo::PRESETS {
        let w = zoo::preset(name).expect("listed");
        m.insert(format!("prefixes/{name}.txt"), w.render_prefix(FIXTURE_PREFIX)? + "\n");
    }
    let xi = zoo::fib_xi();
    m.insert("constants/fib_xi.txt".into(), format!("{} + {}·θ\n", xi.c, xi.m));
    let angles = [Real::ratio(1, 3), Real::ratio(1, 6)];
    m.insert("closure/third_sixth.txt".into(), cmd_closure(&angles)? + "\n");
    for (name, text) in BUILTIN_AUTOMATA {
        m.insert(format!("automata/{name}.aut"), (*text).to_string());
    }
    Ok(m)
}

/// Writes the golden files, or checks an existing directory against them.
pub fn cmd_fixtures(dir: &Path, write: bool) -> Result<String> {
    let files = fixture_files()?;
    let io = |e: std::io::Error| Error::input(format!("{}: {e}", dir.display()));
    if write {
        for (rel, text) in &files {
            let p = dir.join(rel);
            std::fs::create_dir_all(p.parent().expect("relative path")).map_err(io)?;
            std::fs::write(&p, text).map_err(io)?;
        }
        return Ok(format!("wrote {} fixtures", files.len()));
    }
    if !dir.is_dir() {
        return Err(Error::input(format!("{} is not a directory", dir.display())));
    }
    let mut bad = Vec::new();
    for (rel, text) in &files {
        match std::fs::read_to_string(dir.join(rel)) {
            Ok(t) if t == *text => {}
            Ok(_) => bad.push(format!("{rel} differs")),
            Err(_) => bad.push(format!("{rel} missing")),
        }
    }
    if bad.is_empty() {
        Ok(format!("{} fixtures match", files.len()))
    } else {
        Err(Error::Certificate(bad.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip() {
        let a = load_automaton("inf-ones").unwrap();
        for p in [Pipeline::Semenov, Pipeline::Profinite] {
            let r = cmd_accept(&zoo::fibonacci(), &a, p, &Config::default()).unwrap();
            assert!(r.accepted());
            let j = r.to_json();
            let back = Report::from_json(&j).unwrap();
            assert_eq!(back, r);
            assert_eq!(back.to_json(), j);
        }
    }

    #[test]
    fn closure_and_crosscheck() {
        assert_eq!(cmd_closure(&[Real::ratio(1, 3), Real::ratio(1, 6)]).unwrap(), "L=6, rank=0, points=6");
        let out = cmd_crosscheck(&zoo::fibonacci(), &load_automaton("no-11").unwrap(), 5000, &Config::default()).unwrap();
        assert!(out.ends_with("\nAGREE"), "{out}");
        assert!(cmd_crosscheck(&zoo::sign_pair(&DriftSignSpec::standard()).unwrap(), &load_automaton("inf-ones").unwrap(), 10, &Config::default()).is_err());
    }

    #[test]
    fn fixtures_write_then_check() {
        let dir = tempfile::tempdir().unwrap();
        cmd_fixtures(dir.path(), true).unwrap();
        cmd_fixtures(dir.path(), false).unwrap();
        std::fs::write(dir.path().join("prefixes/fibonacci.txt"), "0\n").unwrap();
        assert_eq!(cmd_fixtures(dir.path(), false).unwrap_err().exit_code(), 3);
    }
}
