//! Extensions: the Heisenberg group over Z² and Sol over Z.

use autostack::oracles::{heisenberg_oracle, sol_oracle};
use autostack::verify::check_respecting;
use autostack::zoo::zoo;

fn main() -> autostack::Result<()> {
    let h = zoo("heisenberg")?;
    let s = &h.structure;
    let al = s.alphabet();
    let o = heisenberg_oracle();
    for text in ["a b a^-1 b^-1", "b a", "b b a a", "c a b c^-1"] {
        let w = al.parse(text)?;
        let nf = s.normal_form(&w, None)?;
        println!("{text:>16}  =>  {:<20} key {:?}", al.render(&nf), o.eval(&nf));
    }
    let r = h.respecting.as_ref().expect("heisenberg respects ⟨c, a⟩");
    let rep = check_respecting(r, &o, h.in_h.as_deref().expect("membership"), 3)?;
    println!("respecting at radius 3: {}", if rep.passed() { "pass" } else { "FAIL" });

    let sol = zoo("sol")?;
    let sa = sol.structure.alphabet();
    let so = sol_oracle();
    for text in ["t p t^-1", "t^-1 q t", "t t p"] {
        let w = sa.parse(text)?;
        let nf = sol.structure.normal_form(&w, None)?;
        assert_eq!(so.eval(&nf), so.eval(&w));
        println!("{text:>16}  =>  {}", sa.render(&nf));
    }
    Ok(())
}
