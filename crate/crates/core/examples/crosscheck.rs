//! Both pipelines against each other on the Salomaa word.
use toricdec::automata::DMuller;
use toricdec::cli::{cmd_crosscheck, Config};
use toricdec::profinite::accept_profinite;
use toricdec::semenov::accept_eap;
use toricdec::zoo;
use rand::{Rng, SeedableRng};

fn main() -> toricdec::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (m, s) = (zoo::salomaa(), zoo::sturmian::salomaa_sturmian());
    let mut agree = 0;
    for _ in 0..20 {
        let k = rng.gen_range(1..=5);
        let a = DMuller::random(&mut rng, k, &["a", "b"]);
        agree += usize::from(accept_profinite(&a, &m)? == accept_eap(&a, &s)?);
    }
    println!("substitution vs rotation: {agree}/20 agree");
    let a = DMuller::random(&mut rng, 4, &["a", "b"]);
    println!("{}", cmd_crosscheck(&m, &a, 50_000, &Config::default())?);
    Ok(())
}
