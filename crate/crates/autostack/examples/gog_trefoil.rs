//! The trefoil group as an amalgam of two copies of Z, plus the Klein
//! bottle group as an HNN extension.

use autostack::constructions::gog::gog_compose_with_data;
use autostack::oracles::trefoil_oracle;
use autostack::zoo::{klein_hnn_spec, torus_knot_spec};

fn main() -> autostack::Result<()> {
    let (s, g) = gog_compose_with_data(&torus_knot_spec(2, 3)?)?;
    let al = s.alphabet();
    println!("{} over {:?} (Ã = {:?}), bound {}", s.name(), al.names(), g.tilde_alphabet().names(), s.bound());

    let o = trefoil_oracle().translate("trefoil", al, &[("X", "x x"), ("Y", "y y y")])?;
    for text in ["x x y^-1 y^-1 y^-1", "y x x y^-1", "X Y^-1", "x y x y x y", "x y"] {
        let w = al.parse(text)?;
        let nf = s.normal_form(&w, None)?;
        assert_eq!(o.eval(&nf), o.eval(&w));
        println!("{text:>24}  =>  {:<12} inflated {}", al.render(&nf), g.tilde_alphabet().render(&g.infl(&nf)));
    }

    let k = gog_compose_with_data(&klein_hnn_spec()?)?.0;
    let ka = k.alphabet();
    let rel = ka.parse("e a e^-1 a")?;
    println!("\n{}: e a e⁻¹ a trivial = {}", k.name(), k.is_trivial(&rel, None)?);
    println!("{}: a e => {}", k.name(), ka.render(&k.normal_form(&ka.parse("a e")?, None)?));
    Ok(())
}
