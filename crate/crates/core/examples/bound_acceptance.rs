//! Acceptance from occurrence bounds: the run's state word is classified
//! state by state, each verdict backed by a scanned window.
use toricdec::automata::DMuller;
use toricdec::semenov::{accept_eap_with, state_bounds, Budget};
use toricdec::zoo;
use rand::SeedableRng;

fn main() -> toricdec::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let w = zoo::sturmian::fibonacci_sturmian();
    for _ in 0..4 {
        let a = DMuller::random(&mut rng, 4, &["0", "1"]);
        let b = state_bounds(&a, &w, &Budget::default())?;
        let r = accept_eap_with(&a, &w, Budget::default())?;
        println!("context {} horizon {} entry {}: accepted={} inf={:?}", b.context, b.horizon, b.entry, r.accepted, r.inf_set);
        for c in &r.certificates {
            println!("    q{} R={} window={:?} found_at={:?}", c.state, c.bound, c.window, c.found_at);
        }
    }
    Ok(())
}
