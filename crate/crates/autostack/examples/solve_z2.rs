//! Normal forms and solver traces in Z² with the shortlex state table.

use autostack::stacking::replay_trace;
use autostack::zoo::zn;

fn main() -> autostack::Result<()> {
    let z2 = zn(2)?;
    let al = z2.alphabet();
    println!("{} over {:?}, bound {}", z2.name(), al.names(), z2.bound());

    for text in ["b a", "b b a^-1 b^-1 a", "a b a^-1 b^-1"] {
        let w = al.parse(text)?;
        let (nf, trace) = z2.derivation_trace(&w, None)?;
        println!("\n{text}  =>  {}", al.render(&nf));
        for e in &trace {
            println!("  {}", e.render(al));
        }
        assert_eq!(replay_trace(al, &w, &trace)?, nf);
    }

    let rel = al.parse("a b a^-1 b^-1")?;
    println!("\ncommutator trivial: {}", z2.is_trivial(&rel, None)?);
    println!("normal forms of length ≤ 2: {}", z2.nf().enumerate_upto(2).len());
    Ok(())
}
