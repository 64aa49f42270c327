//! The infinite dihedral group over its index-two subgroup ⟨a⟩.

use autostack::constructions::finite_index::{check_coset_table, finite_index_compose};
use autostack::oracles::dihedral_oracle;
use autostack::zoo::dihedral_spec;

fn main() -> autostack::Result<()> {
    let spec = dihedral_spec()?;
    let r = finite_index_compose(&spec)?;
    let s = r.base();
    let al = s.alphabet();
    let o = dihedral_oracle().translate("dihedral", al, &[])?;
    check_coset_table(&spec, &o)?;
    println!("coset table agrees with the isometry model");

    for text in ["b a", "a b a", "b a b a", "b a^-1 a^-1 b a"] {
        let w = al.parse(text)?;
        let nf = s.normal_form(&w, None)?;
        let (x, t) = r.factor(&nf);
        println!("{text:>16}  =>  {:<10} (H part {:?}, coset rep {:?})", al.render(&nf), al.render(x), al.render(t));
    }
    Ok(())
}
