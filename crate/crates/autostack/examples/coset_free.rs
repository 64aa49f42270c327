//! F2 built from the coset automatic pair (F2, ⟨a⟩).

use std::sync::Arc;

use autostack::constructions::coset_compose;
use autostack::zoo::{f2_coset_data, zn_named};

fn main() -> autostack::Result<()> {
    let data = Arc::new(f2_coset_data()?);
    let c = data.alphabet().clone();
    println!("fellow constant {}, ball of {} elements, μ = {}", data.fellow_constant(), data.ball().len(), data.mu());

    // z·c = h·z′ with z′ in the transversal
    for (z, x) in [("b", "a"), ("b a^-1", "b^-1"), ("", "a"), ("b b", "b^-1")] {
        let zw = c.parse(z)?;
        let (h, z2) = data.mult_solve(&zw, c.parse(x)?[0])?;
        let hw = &data.ball().elements[h].1;
        println!("({z})·{x} = ({}) · ({})", c.render(hw), c.render(&z2));
    }
    let m = data.build_multiplier(data.subgroup_id(&data.oracle().identity()).expect("identity"), c.parse("a")?[0])?;
    println!("M_(1,a): {} states", m.minimize().num_states());

    let r = coset_compose("F2 over ⟨a⟩", &zn_named(&["h"])?, data)?;
    let s = r.base();
    let al = s.alphabet();
    for text in ["a b a^-1", "b a b^-1 a", "h a^-1 b"] {
        let w = al.parse(text)?;
        println!("{text:>14}  =>  {}", al.render(&s.normal_form(&w, None)?));
    }
    Ok(())
}
