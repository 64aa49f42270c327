//! Finite-index supergroups. Normal forms are `Nf_H · T` for a finite
//! prefix-closed transversal `T`; a non-tree edge leaving the subgroup
//! walks back to `H`, across the subgroup word given by the coset table,
//! and out along the target representative.

use std::collections::HashMap;
use std::sync::Arc;

use crate::automata::Fsa;
use crate::error::{Error, Result};
use crate::oracles::ElementOracle;
use crate::stacking::{AutostackableStructure, ComposedMap, RespectingStructure, StackingMap};
use crate::words::{Alphabet, Letter, Word};

/// `A` is the alphabet of `h` extended by `extra`. `transversal[0]` must be
/// ε; `action[i][a] = (h, j)` records `tᵢ·a = h·tⱼ` with `h` over `B`.
#[derive(Clone, Debug)]
pub struct FiniteIndexSpec {
    pub name: String,
    pub h: AutostackableStructure,
    pub extra: Vec<(String, String)>,
    pub transversal: Vec<Vec<String>>,
    pub action: Vec<Vec<(Vec<String>, usize)>>,
}

struct Compiled {
    alphabet: Alphabet,
    nb: usize,
    transversal: Vec<Word>,
    index: HashMap<Word, usize>,
    /// [i][a] → (normal form in H, j)
    action: Vec<Vec<(Word, usize)>>,
}

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::InconsistentCosetTable(msg.into())
}

impl FiniteIndexSpec {
    fn compile(&self) -> Result<Compiled> {
        let h = &self.h;
        let nb = h.alphabet().len();
        let alphabet = h.alphabet().extended(&self.extra)?;
        let transversal =
            self.transversal.iter().map(|t| alphabet.parse_names(t)).collect::<Result<Vec<Word>>>()?;
        if transversal.first().is_none_or(|t| !t.is_empty()) {
            return Err(Error::NonPrefixClosedTransversal("the first representative must be ε".into()));
        }
        let mut index = HashMap::new();
        for (i, t) in transversal.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::NonPrefixClosedTransversal(format!("`{}` listed twice", alphabet.render(t))));
            }
        }
        for t in &transversal {
            if !t.is_empty() && !index.contains_key(&t[..t.len() - 1]) {
                return Err(Error::NonPrefixClosedTransversal(format!("prefix of `{}` missing", alphabet.render(t))));
            }
            if t.first().is_some_and(|a| a.idx() < nb) {
                return Err(Error::NonPrefixClosedTransversal(format!(
                    "`{}` starts with a subgroup letter",
                    alphabet.render(t)
                )));
            }
            if !alphabet.is_freely_reduced(t) {
                return Err(Error::NonPrefixClosedTransversal(format!("`{}` is not freely reduced", alphabet.render(t))));
            }
        }
        if self.action.len() != transversal.len() {
            return Err(inconsistent("one action row per representative"));
        }
        let mut action = Vec::new();
        for (i, row) in self.action.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(inconsistent(format!("row {i} has {} entries for {} letters", row.len(), alphabet.len())));
            }
            let mut out = Vec::new();
            for (a, (w, j)) in row.iter().enumerate() {
                let w = h.alphabet().parse_names(w)?;
                if *j >= transversal.len() {
                    return Err(inconsistent(format!("row {i}: coset {j} out of range")));
                }
                let a = Letter(a as u32);
                let mut ta = transversal[i].clone();
                ta.push(a);
                if index.get(&ta) == Some(j) && !w.is_empty() {
                    return Err(inconsistent(format!("row {i}: tree edge `{}` needs an empty subgroup word", alphabet.name(a))));
                }
                if i == 0 && a.idx() < nb && (*j != 0 || h.normal_form(&w, None)? != h.normal_form(&[a], None)?) {
                    return Err(inconsistent(format!("row 0: subgroup letter `{}` must stay in H", alphabet.name(a))));
                }
                out.push((h.normal_form(&w, None)?, *j));
            }
            action.push(out);
        }
        // tᵢ·a = h·tⱼ and tⱼ·a⁻¹ = h'·tᵢ must be compatible
        for (i, row) in action.iter().enumerate() {
            for a in alphabet.letters() {
                let (hw, j) = &row[a.idx()];
                let (hw2, back) = &action[*j][alphabet.inv(a).idx()];
                if *back != i {
                    return Err(inconsistent(format!("coset {i} --{}--> {j} does not return", alphabet.name(a))));
                }
                let mut prod = hw.clone();
                prod.extend_from_slice(hw2);
                if !h.is_trivial(&prod, None)? {
                    return Err(inconsistent(format!(
                        "subgroup words for coset {i} --{}--> {j} and back are not inverse",
                        alphabet.name(a)
                    )));
                }
            }
        }
        Ok(Compiled { alphabet, nb, transversal, index, action })
    }
}

struct FiniteIndexMap {
    h: AutostackableStructure,
    c: Compiled,
    nf: Fsa,
    recipe: serde_json::Value,
}

impl ComposedMap for FiniteIndexMap {
    fn phi(&self, y: &[Letter], a: Letter) -> Result<Word> {
        let c = &self.c;
        let split = y.iter().position(|x| x.idx() >= c.nb).unwrap_or(y.len());
        let (x, t) = y.split_at(split);
        let i = *c.index.get(t).ok_or_else(|| Error::NotANormalForm(c.alphabet.render(y)))?;
        if t.is_empty() && a.idx() < c.nb {
            return self.h.phi_eval(x, a);
        }
        let forward = self.nf.accepts(&AutostackableStructure::syms(y).into_iter().chain([a.idx()]).collect::<Vec<_>>());
        if forward || y.last() == Some(&c.alphabet.inv(a)) {
            return Ok(vec![a]);
        }
        let (u, j) = &c.action[i][a.idx()];
        let mut out = c.alphabet.invert(t);
        out.extend_from_slice(u);
        out.extend_from_slice(&c.transversal[*j]);
        Ok(out)
    }

    fn recipe(&self) -> serde_json::Value {
        self.recipe.clone()
    }
}

/// Composes the supergroup structure respecting `H`.
pub fn finite_index_compose(spec: &FiniteIndexSpec) -> Result<RespectingStructure> {
    let c = spec.compile()?;
    let h = &spec.h;
    let names = c.alphabet.names().to_vec();
    let nf_h = h.nf().embed(&(0..c.nb).collect::<Vec<_>>(), names.clone());
    let t: Vec<Vec<usize>> = c.transversal.iter().map(|w| AutostackableStructure::syms(w)).collect();
    let nf = nf_h.concat(&Fsa::finite(names, &t)).minimize();
    let mut bound = h.bound();
    for (i, row) in c.action.iter().enumerate() {
        for (u, j) in row {
            bound = bound.max(c.transversal[i].len() + u.len() + c.transversal[*j].len());
        }
    }
    let recipe = serde_json::json!({
        "combinator": "finite_index",
        "name": spec.name,
        "h": h.to_json(),
        "extra": spec.extra,
        "transversal": spec.transversal,
        "action": spec.action,
    });
    let sub: Vec<Letter> = (0..c.nb).map(|i| Letter(i as u32)).collect();
    let al = c.alphabet.clone();
    let m = FiniteIndexMap { h: h.clone(), c, nf: nf.clone(), recipe };
    let s = AutostackableStructure::new(&spec.name, al, nf, StackingMap::Composed(Arc::new(m)), bound)?;
    RespectingStructure::new(s, &sub)
}

/// Checks `tᵢ·a = h·tⱼ` in the oracle for every table entry.
pub fn check_coset_table(spec: &FiniteIndexSpec, o: &ElementOracle) -> Result<()> {
    let c = spec.compile()?;
    for (i, row) in c.action.iter().enumerate() {
        for (a, (u, j)) in row.iter().enumerate() {
            let mut lhs = c.transversal[i].clone();
            lhs.push(Letter(a as u32));
            let mut rhs = u.clone();
            rhs.extend_from_slice(&c.transversal[*j]);
            if o.eval(&lhs) != o.eval(&rhs) {
                return Err(inconsistent(format!(
                    "{} ≠ {} in {}",
                    c.alphabet.render(&lhs),
                    c.alphabet.render(&rhs),
                    o.name()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::zn_oracle;
    use crate::zoo::zn_named;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    /// `Z = ⟨a⟩` over its subgroup `⟨X⟩`, `X = a²`, transversal `{ε, a}`.
    fn z_over_even() -> FiniteIndexSpec {
        FiniteIndexSpec {
            name: "Z over 2Z".into(),
            h: zn_named(&["X"]).unwrap(),
            extra: vec![("a".into(), "a^-1".into())],
            transversal: vec![vec![], w("a")],
            // letters X, X^-1, a, a^-1
            action: vec![
                vec![(w("X"), 0), (w("X^-1"), 0), (vec![], 1), (w("X^-1"), 1)],
                vec![(w("X"), 1), (w("X^-1"), 1), (w("X"), 0), (vec![], 0)],
            ],
        }
    }

    #[test]
    fn index_two_flow_returns_through_the_subgroup() {
        let r = finite_index_compose(&z_over_even()).unwrap();
        let s = r.base();
        let al = s.alphabet();
        let p = |t: &str| al.parse(t).unwrap();
        assert_eq!(s.phi_eval(&p("X a"), p("a")[0]).unwrap(), p("a^-1 X"));
        assert_eq!(s.phi_eval(&p("X"), p("a^-1")[0]).unwrap(), p("X^-1 a"));
        assert_eq!(s.phi_eval(&p("a"), p("X")[0]).unwrap(), p("a^-1 X a"));
        assert_eq!(s.phi_eval(&p("X"), p("a")[0]).unwrap(), p("a"));
        let o = zn_oracle(1).translate("Z", al, &[("X", "a a")]).unwrap();
        check_coset_table(&z_over_even(), &o).unwrap();
        assert_eq!(s.normal_form(&p("a a a a^-1 a"), None).unwrap(), p("X a"));
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let mut spec = z_over_even();
        spec.transversal = vec![vec![], w("a a")];
        assert!(matches!(finite_index_compose(&spec), Err(Error::NonPrefixClosedTransversal(_))));

        let mut spec = z_over_even();
        spec.transversal = vec![vec![], w("X")];
        assert!(matches!(finite_index_compose(&spec), Err(Error::NonPrefixClosedTransversal(_))));

        let mut spec = z_over_even();
        spec.action[0][2] = (w("X"), 1);
        assert!(matches!(finite_index_compose(&spec), Err(Error::InconsistentCosetTable(_))));

        let mut spec = z_over_even();
        spec.action[1][2] = (w("X X"), 0);
        assert!(matches!(finite_index_compose(&spec), Err(Error::InconsistentCosetTable(_))));

        let mut spec = z_over_even();
        spec.action[1][3] = (vec![], 1);
        assert!(matches!(finite_index_compose(&spec), Err(Error::InconsistentCosetTable(_))));
    }

    #[test]
    fn oracle_catches_a_wrong_but_consistent_table() {
        let mut spec = z_over_even();
        // tᵢ·a and its inverse swapped consistently, but false in Z
        spec.action[1][2] = (w("X X"), 0);
        spec.action[0][3] = (w("X^-1 X^-1"), 1);
        let c = finite_index_compose(&spec).unwrap();
        let o = zn_oracle(1).translate("Z", c.alphabet(), &[("X", "a a")]).unwrap();
        assert!(matches!(check_coset_table(&spec, &o), Err(Error::InconsistentCosetTable(_))));
    }
}
