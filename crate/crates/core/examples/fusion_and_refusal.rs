//! Products keep an occurrence oracle only when the generators share one
//! torus; otherwise acceptance is refused rather than guessed.
use toricdec::automata::DMuller;
use toricdec::dsl::parse_word_expr;
use toricdec::semenov::{accept_eap, accept_with_budget};
use rand::SeedableRng;

fn main() -> toricdec::Result<()> {
    let fused = parse_word_expr("product(sturmian(theta=golden, xi=fib_xi), sturmian(theta=sqrt2m1, xi=0))")?;
    println!("{}: oracle={} prefix {}", fused.name(), fused.has_ap(), fused.render_prefix(8)?);
    let pair = parse_word_expr("sign_pair()")?;
    println!("{}: oracle={} warnings {:?}", pair.name(), pair.has_ap(), pair.warnings());
    let syms: Vec<&str> = pair.alphabet().symbols().iter().map(String::as_str).collect();
    let a = DMuller::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3), 3, &syms);
    println!("certified: {:?}", accept_eap(&a, &pair).map(|r| r.0));
    println!("uncertified guess: {:?}", accept_with_budget(&a, &pair, 5000)?);
    Ok(())
}
