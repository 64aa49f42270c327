//! Regular graphs of stacking functions: compile, cross-check, export.

use autostack::constructions::gog::gog_compose_compiled;
use autostack::zoo::{free_product_spec, zn};

fn main() -> autostack::Result<()> {
    let z2 = zn(2)?.with_compiled_graph()?;
    let g = z2.graph_phi().expect("compiled");
    println!("Z2: Graph(φ) has {} states", g.num_states());
    let r = z2.cross_check(8)?;
    println!("  agrees with φ on {} pairs", r.pairs_checked);

    let al = z2.alphabet();
    let y = al.parse("b")?;
    let (values, overflow) = z2.graph_third_tapes(&y, al.parse("a")?[0], 4)?;
    println!("  φ(b, a) read from the automaton: {:?} (overflow {overflow})", values.iter().map(|w| al.render(w)).collect::<Vec<_>>());

    let zz = gog_compose_compiled(&free_product_spec()?)?;
    println!("Z*Z: Graph(φ) has {} states", zz.graph_phi().expect("compiled").num_states());
    println!("  agrees with φ on {} pairs", zz.cross_check(6)?.pairs_checked);

    let dot = z2.nf().to_dot("Z2 normal forms");
    println!("\n{dot}");
    Ok(())
}
