//! Native and HOA automata, including parity conditions.
use toricdec::automata::{parse_automaton, set_to_vec};
use toricdec::profinite::accept_profinite;
use toricdec::zoo;

const PARITY: &str = r#"HOA: v1
States: 2
Start: 0
AP: 1 "p"
acc-name: parity max even 3
Acceptance: 3 Inf(2) | (Fin(1) & Inf(0))
properties: deterministic complete
--BODY--
State: 0 {0}
[!0] 0
[0] 1
State: 1 {1}
[!0] 0
[0] 1
--END--
"#;

fn main() -> toricdec::Result<()> {
    let a = parse_automaton(PARITY)?;
    print!("{}", a.to_native());
    for w in [zoo::fibonacci(), zoo::periodic_str("0")?, zoo::periodic_str("1")?] {
        let (acc, inf) = accept_profinite(&a, &w)?;
        println!("{}: accepted={acc} inf={:?}", w.name(), set_to_vec(inf));
    }
    match parse_automaton("states 2\nalphabet 0 1\ninitial 0\ntrans 0 0 1\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
