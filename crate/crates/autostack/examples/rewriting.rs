//! Structures read off convergent rewriting systems.

use autostack::constructions::from_rewriting_system;
use autostack::zoo::{klein_rewriting_system, z2_z3_rewriting_system};

fn main() -> autostack::Result<()> {
    for rs in [klein_rewriting_system(), z2_z3_rewriting_system()] {
        let al = rs.alphabet().clone();
        println!("rules:");
        for (l, r) in rs.rules() {
            println!("  {} -> {}", al.render(l), if r.is_empty() { "ε".into() } else { al.render(r) });
        }
        rs.check_local_confluence()?;
        let s = from_rewriting_system("demo", rs)?;
        let w = al.parse("b a b a a^-1 b^-1 b")?;
        let (nf, trace) = s.derivation_trace(&w, None)?;
        println!("{}  =>  {}  ({} steps)", al.render(&w), al.render(&nf), trace.len());
        println!("normal forms of length ≤ 3: {}\n", s.nf().enumerate_upto(3).len());
    }

    // a system that is not locally confluent is refused
    let al = autostack::words::Alphabet::from_generators(&["a", "b"]);
    let bad = autostack::constructions::RewritingSystem::parse(al, &[("a b", "b"), ("b a", "a")])?;
    match from_rewriting_system("bad", bad) {
        Err(e) => println!("refused: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
