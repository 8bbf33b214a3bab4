//! Generators and the word language.
use toricdec::{dsl::parse_word_expr, zoo};

fn main() -> toricdec::Result<()> {
    for name in zoo::PRESETS {
        let w = zoo::preset(name).unwrap();
        println!("{name:>20}  {}", w.render_prefix(40)?);
    }
    for src in [
        r#"morphic(tau={a:"ab", b:"ccb", c:"c"}, start=a, coding={a:"1", b:"1", c:"0"})"#,
        "sturmian(theta=sqrt2m1, xi=orbit(3))",
        "sign_static(x=5, y=12, r=13)",
        r#"toric_box(angles=[golden, 1/2], targets={x:[[[0,1/2],[1/4,3/4]]], y:[[[1/2,1],[1/4,3/4]]], z:[[[0,1],[3/4,5/4]]]}, transient=1, head="z")"#,
    ] {
        let w = parse_word_expr(src)?;
        println!("{src}\n    {}", w.render_prefix(40)?);
    }
    Ok(())
}
