//! The bounded verifier on zoo structures, and what it reports for a
//! broken one.

use autostack::stacking::{StackingMap, StateTable};
use autostack::verify::verify_structure;
use autostack::words::Letter;
use autostack::zoo::{zoo, zoo_names};
use std::sync::Arc;

fn main() -> autostack::Result<()> {
    for name in zoo_names() {
        let e = zoo(name)?;
        let o = e.oracle.as_ref().expect("zoo entries carry oracles");
        let rep = verify_structure(&e.structure, o, 3, 5)?;
        println!("{name:<14} {}", if rep.passed() { "pass" } else { "FAIL" });
    }

    // send one non-tree edge of Z² to a path with the wrong endpoint
    let e = zoo("Z2")?;
    let s = &e.structure;
    let StackingMap::StateTable(t) = s.stacking() else { unreachable!() };
    let mut t: StateTable = (**t).clone();
    let q = s.nf().run(&[2]);
    t.set(q, Letter(0), vec![Letter(3), Letter(0), Letter(0), Letter(2)]);
    let broken = s.with_stacking(StackingMap::StateTable(Arc::new(t)), 4);
    let rep = verify_structure(&broken, e.oracle.as_ref().unwrap(), 3, 5)?;
    println!("\n{}", rep.to_text());
    Ok(())
}
