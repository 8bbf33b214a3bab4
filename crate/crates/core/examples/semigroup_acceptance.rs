//! Acceptance on morphic and block-power words by reduction to a lasso in
//! the automaton's annotated transition semigroup.
use toricdec::automata::{lasso_accept, parse_automaton, set_to_vec};
use toricdec::profinite::{block_power_lasso, exponent_certificate, word_lasso};
use toricdec::word::{Exponent, Structure};
use toricdec::zoo;

const TWO_ONES_IN_A_ROW: &str = "\
states 3
alphabet 0 1
initial 0
trans 0 0 0
trans 0 1 1
trans 1 0 0
trans 1 1 2
trans 2 0 0
trans 2 1 2
muller {0 1 2}
muller {2}
";

fn main() -> toricdec::Result<()> {
    let a = parse_automaton(TWO_ONES_IN_A_ROW)?;
    for w in [zoo::fibonacci(), zoo::thue_morse(), zoo::squares(), zoo::factorial()] {
        let l = word_lasso(&a, &w)?;
        let (acc, inf) = lasso_accept(&a, &l, a.initial);
        println!("{:>14}: lasso |a|={} |b|={}  accepted={acc}  inf={:?}", w.name(), l.a.len(), l.b.len(), set_to_vec(inf));
    }
    // the exponent certificate behind the factorial word
    let Some(Structure::BlockPower(d)) = zoo::factorial().structure().cloned() else { unreachable!() };
    println!("{:?}", exponent_certificate(&Exponent::FactorialGap, 3, 12));
    let l = block_power_lasso(&a, &d, zoo::factorial().alphabet())?;
    println!("factorial lasso cycle length {}", l.b.len());
    Ok(())
}
