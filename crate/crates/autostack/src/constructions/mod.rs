//! Closure combinators: each takes immutable ingredient structures and
//! returns a new structure whose stacking map evaluates through them.

pub mod coset;
pub mod extend;
pub mod extension;
pub mod finite_index;
pub mod gog;
pub mod rws;

pub use coset::{coset_compose, CosetAutomaticData};
pub use extend::{extend_generators, extend_respecting, NewGenerator};
pub use extension::{extension_compose, CollectingRewriter, ExtensionSpec, KRewriter};
pub use finite_index::{finite_index_compose, FiniteIndexSpec};
pub use gog::{gog_compose, gog_normal_forms, GraphOfGroupsSpec};
pub use rws::{from_rewriting_system, RewritingSystem};

use crate::automata::Fsa;
use crate::error::{Error, Result};
use crate::stacking::RespectingStructure;

/// `(Nf ∩ B*, {ε} ∪ (Nf ∩ (A∖B)·A*))` for the letters marked in `mask`.
pub fn split_languages(nf: &Fsa, mask: &[bool]) -> (Fsa, Fsa) {
    let syms = nf.symbols().to_vec();
    let k = syms.len();
    let b_star = Fsa::subset_star(syms.clone(), mask);
    let nf_h = nf.intersection(&b_star).minimize();
    // state 0: start, state 1: read a first letter outside B
    let mut trans = Vec::new();
    for a in 0..k {
        if !mask[a] {
            trans.push((0, a, 1));
        }
        trans.push((1, a, 1));
    }
    let starts_outside = Fsa::from_partial(syms.clone(), 2, 0, &[1], &trans).expect("static automaton");
    let eps = Fsa::finite(syms, &[vec![]]);
    let nf_tr = nf.intersection(&starts_outside).union(&eps).minimize();
    (nf_h, nf_tr)
}

/// Recomputes both components of a respecting structure and checks them
/// against the declared ones, including prefix-closure.
pub fn split_respecting(r: &RespectingStructure) -> Result<(Fsa, Fsa)> {
    let (h, tr) = split_languages(r.base().nf(), r.subgroup_mask());
    if !h.equivalent(r.nf_h()) {
        return Err(Error::FactorizationMismatch("declared Nf_H differs from Nf ∩ B*".into()));
    }
    if !tr.equivalent(r.nf_tr()) {
        return Err(Error::FactorizationMismatch("declared Nf_Tr differs from {ε} ∪ (Nf ∩ (A∖B)A*)".into()));
    }
    for (name, m) in [("Nf_H", &h), ("Nf_Tr", &tr)] {
        if !m.is_prefix_closed() {
            return Err(Error::FactorizationMismatch(format!("{name} is not prefix-closed")));
        }
    }
    if !h.concat(&tr).equivalent(r.base().nf()) {
        return Err(Error::FactorizationMismatch("Nf differs from Nf_H · Nf_Tr".into()));
    }
    Ok((h, tr))
}
