//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one line.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toricdec::automata::{set_to_vec, DMuller, StateSet};
use toricdec::profinite::accept_profinite;
use toricdec::semenov::accept_eap;
use toricdec::torus::coverage::{coverage_bound, verify_coverage};
use toricdec::torus::diophantine::kronecker_hit;
use toricdec::torus::lattice::{orbit_closure, relation_lattice};
use toricdec::torus::real::{consts, DEFAULT_MAX_BITS};
use toricdec::torus::spec::rational_arc;
use toricdec::torus::{Coord, Real, TBox};
use toricdec::word::{image_coding, image_uniform, merge, product, suffix, Alphabet, OmegaWord};
use toricdec::zoo::{self, sign::is_plus_minus, DriftSignSpec};
use toricdec::Error;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn show(s: StateSet) -> String {
    format!("{:?}", set_to_vec(s))
}

fn random_automaton(rng: &mut ChaCha8Rng, alphabet: &[&str]) -> DMuller {
    let k = rng.gen_range(1..=5);
    DMuller::random(rng, k, alphabet)
}

fn cross_pipeline(morphic: &OmegaWord, rotation: &OmegaWord, alphabet: &[&str], seed: u64, count: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let a = random_automaton(&mut rng, alphabet);
        let p = accept_profinite(&a, morphic).map_err(e2s)?;
        let s = accept_eap(&a, rotation).map_err(e2s)?;
        ensure(p == s, || {
            format!("{} automaton {i}: semigroup {} {} vs occurrence bounds {} {}", morphic.name(), p.0, show(p.1), s.0, show(s.1))
        })?;
    }
    Ok(())
}

fn c1() -> Outcome {
    let t = Instant::now();
    cross_pipeline(&zoo::fibonacci(), &zoo::sturmian::fibonacci_sturmian(), &["0", "1"], 11, 60)?;
    cross_pipeline(&zoo::salomaa(), &zoo::sturmian::salomaa_sturmian(), &["a", "b"], 12, 60)?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 600.0, || format!("took {secs:.0}s"))?;
    Ok(format!("2 x 60 automata agree in {secs:.1}s"))
}

/// Inf set of the run on `pre · per^ω`, by iterating whole periods until the
/// state at a period boundary repeats.
fn lasso_oracle(a: &DMuller, pre: &[usize], per: &[usize]) -> (bool, StateSet) {
    let mut q = a.initial;
    for &c in pre {
        q = a.step(q, c);
    }
    let mut starts = vec![q];
    loop {
        for &c in per {
            q = a.step(q, c);
        }
        if let Some(i) = starts.iter().position(|&s| s == q) {
            let mut inf = 0u64;
            let mut r = starts[i];
            for _ in i..starts.len() {
                for &c in per {
                    inf |= 1 << r;
                    r = a.step(r, c);
                }
            }
            return (a.accepts_set(inf), inf);
        }
        starts.push(q);
    }
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..220 {
        let pre: Vec<usize> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..2)).collect();
        let per: Vec<usize> = (0..rng.gen_range(1..7)).map(|_| rng.gen_range(0..2)).collect();
        let al = Alphabet::from_chars("01").unwrap();
        let w = zoo::ult_periodic("lasso", al, pre.iter().map(|&c| c as u32).collect(), per.iter().map(|&c| c as u32).collect())
            .map_err(e2s)?;
        let a = random_automaton(&mut rng, &["0", "1"]);
        let want = lasso_oracle(&a, &pre, &per);
        let p = accept_profinite(&a, &w).map_err(e2s)?;
        let s = accept_eap(&a, &w).map_err(e2s)?;
        ensure(p == want && s == want, || {
            format!("case {i} {pre:?}({per:?}): oracle {} semigroup {} bounds {}", show(want.1), show(p.1), show(s.1))
        })?;
    }
    Ok("220 lassos match".into())
}

/// Checks the dichotomy for `u` on `p`: no start at or after `r`, or every
/// length-`r` window of `p` contains `u`. Returns whether the prefix was long
/// enough to say anything.
fn dichotomy(p: &[u32], u: &[u32], r: u64) -> Result<bool, String> {
    let r = r as usize;
    let n = p.len();
    let starts: Vec<usize> = (0..=n - u.len()).filter(|&i| p[i..i + u.len()] == *u).collect();
    let transient = starts.iter().all(|&i| i < r);
    if transient {
        return Ok(r < n);
    }
    if r > n {
        return Ok(false);
    }
    // every window [i, i + r) must contain a start in [i, i + r - |u|]
    let slack = r - u.len();
    let mut prev: Option<usize> = None;
    for &s in &starts {
        let gap_ok = match prev {
            None => s <= slack,
            Some(t) => s - t <= slack + 1,
        };
        if !gap_ok {
            return Err(format!("{u:?} misses a window of length {r} before {s}"));
        }
        prev = Some(s);
    }
    match prev {
        Some(t) if t + r >= n => Ok(true),
        _ => Err(format!("{u:?} misses the last window of length {r}")),
    }
}

fn c3() -> Outcome {
    const N: u64 = 100_000;
    let mut words: Vec<OmegaWord> = zoo::PRESETS.iter().filter_map(|n| zoo::preset(n)).filter(|w| w.has_ap()).collect();
    words.push(zoo::periodic_str("0010111").map_err(e2s)?);
    words.push(zoo::ult_periodic_str("10110", "001").map_err(e2s)?);
    words.push(zoo::sign_static(&zoo::sign::GaussPoint::three_four_five()).map_err(e2s)?);
    words.push(zoo::sign_drift(&DriftSignSpec::standard()).map_err(e2s)?);
    words.push(toricdec::dsl::parse_word_expr("product(sturmian(theta=golden, xi=fib_xi), sturmian(theta=sqrt2m1, xi=0))").map_err(e2s)?);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut vacuous) = (0, 0);
    for w in &words {
        let p = w.prefix(N).map_err(e2s)?;
        let k = w.alphabet().len() as u32;
        for j in 0..30 {
            let len = rng.gen_range(1..=8);
            // mostly factors that occur, some arbitrary words
            let u: Vec<u32> = if j % 5 == 4 {
                (0..len).map(|_| rng.gen_range(0..k)).collect()
            } else {
                let i = rng.gen_range(0..(N as usize - len));
                p[i..i + len].to_vec()
            };
            let r = w.ap_bound(&u).map_err(|e| format!("{}: {e}", w.name()))?;
            match dichotomy(&p, &u, r) {
                Ok(true) => checked += 1,
                Ok(false) => vacuous += 1,
                Err(m) => return Err(format!("{}: {m}", w.name())),
            }
        }
    }
    ensure(checked > 0, || "nothing checked".into())?;
    Ok(format!("{} words, {checked} factors checked, {vacuous} with R beyond the prefix, 0 violations", words.len()))
}

fn c4() -> Outcome {
    let cases = [
        (zoo::fibonacci(), "01001010010"),
        (zoo::thue_morse(), "0110100110"),
        (zoo::tribonacci(), "121312112131"),
        (zoo::factorial(), "01100010000"),
        (zoo::carton_thomas(), "abccbccccb"),
        (zoo::salomaa(), "aabaabaaabaabaaab"),
    ];
    for (w, s) in &cases {
        let got = w.render_prefix(s.len() as u64).map_err(e2s)?;
        ensure(got == *s, || format!("{}: {got} != {s}", w.name()))?;
    }
    Ok("6 prefixes exact".into())
}

fn c5() -> Outcome {
    let g = Complex::new(BigRational::new(3.into(), 5.into()), BigRational::new(4.into(), 5.into()));
    let c = BigRational::from_integer(7.into());
    // v_n = n sin(nθ) - c cos(nθ) from exact powers of γ
    let mut z = Complex::new(BigRational::one(), BigRational::zero());
    let mut u = Vec::new();
    let mut v = Vec::new();
    for n in 0..=10_000u64 {
        u.push(z.im.clone());
        v.push(BigRational::from_integer(n.into()) * &z.im - &c * &z.re);
        z = &z * &g;
    }
    let alpha = zoo::sign_static(&zoo::sign::GaussPoint::three_four_five()).map_err(e2s)?.render_prefix(5).map_err(e2s)?;
    ensure(alpha == "0+++-", || format!("sign_static prefix {alpha}"))?;
    let drift = zoo::sign_drift(&DriftSignSpec::standard()).map_err(e2s)?;
    let beta = drift.render_prefix(3).map_err(e2s)?;
    ensure(beta == "--+", || format!("sign_drift prefix {beta}"))?;
    let want = [BigRational::from_integer((-7).into()), BigRational::new((-17).into(), 5.into()), BigRational::new(97.into(), 25.into())];
    ensure(v[..3] == want, || format!("v(0..2) = {:?}", &v[..3]))?;
    let spec = DriftSignSpec::standard();
    for (n, w) in want.iter().enumerate() {
        ensure(spec.value(n as u64).map_err(e2s)? == *w, || format!("library v({n})"))?;
    }
    ensure(v[1..].iter().all(|x| !x.is_zero()), || "v vanishes".into())?;
    let signs = drift.prefix(10_001).map_err(e2s)?;
    for (n, x) in v.iter().enumerate() {
        ensure((signs[n] == 0) == x.is_positive(), || format!("sign of v({n})"))?;
    }
    let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
    let (c1, c2, c3, c4) = (r(12, 5), r(-86, 25), r(12, 5), r(-1, 1));
    for n in 0..=100 {
        let rhs = &c1 * &v[n + 3] + &c2 * &v[n + 2] + &c3 * &v[n + 1] + &c4 * &v[n];
        ensure(v[n + 4] == rhs, || format!("recurrence fails at {n}"))?;
    }
    for n in 0..=100 {
        ensure(u[n + 2] == r(6, 5) * &u[n + 1] - &u[n], || format!("sine recurrence fails at {n}"))?;
    }
    Ok("prefixes, values, 10^4 nonzero, recurrences exact".into())
}

fn c6() -> Outcome {
    let t = Instant::now();
    let spec = DriftSignSpec::standard();
    let pair = zoo::sign_pair(&spec).map_err(e2s)?;
    let pm = pair.alphabet().index("(+,-)").ok_or("no (+,-) symbol")?;
    let mut notes = Vec::new();
    for b in [5u64, 10, 20] {
        let n = zoo::gap_witness(&spec, b, 1 << 24).map_err(e2s)?;
        let win = pair.factor(n, n + b).map_err(e2s)?;
        ensure(!win.contains(&pm), || format!("B={b}: window at {n} contains (+,-)"))?;
        let occ = zoo::plus_minus_occurrences(&spec, 5, n + b).map_err(e2s)?;
        ensure(occ.len() >= 5, || format!("B={b}: {} occurrences", occ.len()))?;
        for &k in &occ {
            ensure(k >= n + b && pair.letter_at(k).map_err(e2s)? == pm, || format!("B={b}: no (+,-) at {k}"))?;
            ensure(is_plus_minus(&spec, k).map_err(e2s)?, || format!("B={b}: exact check at {k}"))?;
        }
        notes.push(format!("B={b}@{n}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0}s"))?;
    Ok(format!("{} in {secs:.1}s", notes.join(" ")))
}

fn c7() -> Outcome {
    let angles = [Real::ratio(1, 3), Real::ratio(1, 6)];
    let basis = relation_lattice(&angles, &[]).map_err(e2s)?;
    let cl = orbit_closure(&angles, &basis).map_err(e2s)?;
    let brute: HashSet<Vec<BigRational>> = (0..36i64)
        .map(|n| [r(n, 3), r(n, 6)].iter().map(|x| x - x.floor()).collect())
        .collect();
    let got: HashSet<Vec<BigRational>> = cl.points.iter().cloned().collect();
    ensure(cl.order == 6 && cl.rank == 0 && got == brute, || format!("closure L={} rank={}", cl.order, cl.rank))?;
    let coord = Coord::new(consts::golden(), DEFAULT_MAX_BITS);
    let coords = [coord.clone()];
    let j = TBox(vec![rational_arc(BigRational::zero(), r(51, 100))]);
    let cert = coverage_bound(&coords, &j, 1, 1 << 16).map_err(e2s)?;
    ensure(cert.k == 2, || format!("coverage K = {}", cert.k))?;
    for (lo, hi) in [(0, 51), (10, 50), (0, 40), (97, 99), (30, 31)] {
        let j = TBox(vec![rational_arc(r(lo, 100), r(hi, 100))]);
        let c = coverage_bound(&coords, &j, 1, 1 << 20).map_err(e2s)?;
        ensure(verify_coverage(&coords, &j, &c).map_err(e2s)?, || format!("certificate for ({lo},{hi}) fails"))?;
    }
    let n = kronecker_hit(&coords, &[r(1, 2)], &r(1, 20), 0, 1 << 16).map_err(e2s)?;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let x = (n as f64 * phi).fract();
    ensure((x - 0.5).abs() < 0.05, || format!("hit {n} lands at {x}"))?;
    Ok(format!("closure 6 points, K=2, 5 certificates, hit n={n}"))
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Combinator trees over leaves with independently generated prefixes.
enum Tree {
    Leaf(usize),
    Product(Box<Tree>, Box<Tree>),
    Merge(Box<Tree>, Box<Tree>),
    Suffix(Box<Tree>, u64),
    Image(Box<Tree>, usize, u64),
}

const LEAVES: usize = 4;

fn leaf_word(i: usize) -> OmegaWord {
    match i {
        0 => zoo::fibonacci(),
        1 => zoo::thue_morse(),
        2 => zoo::periodic_str("aab").unwrap(),
        _ => zoo::sturmian::salomaa_sturmian(),
    }
}

fn leaf_ref(i: usize, n: usize) -> Vec<String> {
    let s: Vec<char> = match i {
        0 | 3 => {
            let (a, b) = if i == 0 { (vec!['0', '1'], vec!['0']) } else { (vec!['a', 'a', 'b'], vec!['a']) };
            let first = if i == 0 { '0' } else { 'a' };
            let mut x = vec![first];
            while x.len() < n {
                x = x.iter().flat_map(|&c| if c == first { a.clone() } else { b.clone() }).collect();
            }
            x
        }
        1 => (0..n).map(|k| if (k as u64).count_ones().is_multiple_of(2) { '0' } else { '1' }).collect(),
        _ => (0..n).map(|k| ['a', 'a', 'b'][k % 3]).collect(),
    };
    s[..n].iter().map(|c| c.to_string()).collect()
}

fn random_tree(rng: &mut ChaCha8Rng, depth: u32) -> Tree {
    if depth == 0 || rng.gen_bool(0.2) {
        return Tree::Leaf(rng.gen_range(0..LEAVES));
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_tree(rng, depth - 1));
    match rng.gen_range(0..4) {
        0 => Tree::Product(sub(rng), sub(rng)),
        1 => Tree::Merge(sub(rng), sub(rng)),
        2 => Tree::Suffix(sub(rng), rng.gen_range(1..50)),
        _ => Tree::Image(sub(rng), rng.gen_range(1..=3), rng.gen()),
    }
}

fn image_table(al: &Alphabet, k: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..al.len()).map(|_| (0..k).map(|_| ['x', 'y', 'z'][rng.gen_range(0..3)]).collect()).collect()
}

fn build(t: &Tree) -> OmegaWord {
    match t {
        Tree::Leaf(i) => leaf_word(*i),
        Tree::Product(a, b) => product(&[build(a), build(b)]).unwrap(),
        Tree::Merge(a, b) => merge(&[build(a), build(b)]).unwrap(),
        Tree::Suffix(a, k) => suffix(&build(a), *k).unwrap(),
        Tree::Image(a, k, seed) => {
            let w = build(a);
            let table = image_table(w.alphabet(), *k, *seed);
            let out = Alphabet::from_chars("xyz").unwrap();
            let images: Vec<Vec<u32>> = table.iter().map(|s| out.parse_word(s).unwrap()).collect();
            if *k == 1 {
                image_coding(&w, images.into_iter().map(|x| x[0]).collect(), out).unwrap()
            } else {
                image_uniform(&w, images, out).unwrap()
            }
        }
    }
}

fn reference(t: &Tree, n: usize) -> (Vec<String>, Alphabet) {
    match t {
        Tree::Leaf(i) => (leaf_ref(*i, n), leaf_word(*i).alphabet().clone()),
        Tree::Product(a, b) => {
            let ((x, xa), (y, ya)) = (reference(a, n), reference(b, n));
            let mut syms = Vec::new();
            for s in xa.symbols() {
                for t in ya.symbols() {
                    syms.push(format!("({s},{t})"));
                }
            }
            (x.iter().zip(&y).map(|(s, t)| format!("({s},{t})")).collect(), Alphabet::new(syms).unwrap())
        }
        Tree::Merge(a, b) => {
            let half = n / 2 + 1;
            let ((x, xa), (y, ya)) = (reference(a, half), reference(b, half));
            let mut syms: Vec<String> = xa.symbols().to_vec();
            syms.extend(ya.symbols().iter().filter(|s| !xa.symbols().contains(s)).cloned());
            ((0..n).map(|i| if i % 2 == 0 { x[i / 2].clone() } else { y[i / 2].clone() }).collect(), Alphabet::new(syms).unwrap())
        }
        Tree::Suffix(a, k) => {
            let (x, xa) = reference(a, n + *k as usize);
            (x[*k as usize..].to_vec(), xa)
        }
        Tree::Image(a, k, seed) => {
            let (x, xa) = reference(a, n / k + 1);
            let table = image_table(&xa, *k, *seed);
            let out: Vec<String> = x.iter().flat_map(|s| table[xa.index(s).unwrap() as usize].chars().map(String::from)).collect();
            (out[..n].to_vec(), Alphabet::from_chars("xyz").unwrap())
        }
    }
}

fn c8() -> Outcome {
    const N: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..20 {
        let t = random_tree(&mut rng, 3);
        let w = build(&t);
        let p = w.prefix(N as u64).map_err(e2s)?;
        let got: Vec<&str> = p.iter().map(|&a| w.alphabet().symbol(a)).collect();
        let (want, _) = reference(&t, N);
        if let Some(k) = (0..N).find(|&k| got[k] != want[k]) {
            return Err(format!("tree {i} ({}) differs at {k}: {} vs {}", w.name(), got[k], want[k]));
        }
    }
    Ok("20 trees agree on 10^4 letters".into())
}

fn c9() -> Outcome {
    let pair = zoo::sign_pair(&DriftSignSpec::standard()).map_err(e2s)?;
    ensure(!pair.has_ap(), || "product kept an occurrence oracle".into())?;
    let al: Vec<&str> = pair.alphabet().symbols().iter().map(String::as_str).collect();
    let a = DMuller::random(&mut ChaCha8Rng::seed_from_u64(9), 2, &al);
    match accept_eap(&a, &pair) {
        Err(e @ Error::ClassificationUnavailable(_)) if e.to_string().starts_with("classification unavailable") => Ok(e.to_string()),
        other => Err(format!("expected refusal, got {other:?}")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cross-pipeline agreement", c1),
        ("lasso ground truth", c2),
        ("occurrence-bound soundness", c3),
        ("prefixes", c4),
        ("exact sign arithmetic", c5),
        ("unbounded (+,-) gaps", c6),
        ("torus kernel", c7),
        ("combinator laws", c8),
        ("refusal without oracle", c9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(d) => println!("criterion {} {name}: PASS ({d})", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({d})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
