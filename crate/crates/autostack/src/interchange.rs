//! JSON interchange. Wherever a structure is expected, a spec may give an
//! inline structure object, a build spec (`"combinator": …`), a path to a
//! file holding either, or `"zoo:NAME"`. Paths are relative to the file
//! that mentions them.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::Value;

use crate::automata::{Fsa, FsaJson};
use crate::constructions::coset::{coset_compose, CosetAutomaticData, SUBGROUP_SEARCH_LIMIT};
use crate::constructions::extension::{extension_compose, CollectingRewriter, ExtensionSpec};
use crate::constructions::finite_index::{finite_index_compose, FiniteIndexSpec};
use crate::constructions::gog::{gog_compose, gog_compose_compiled, DirectedEdgeData, EdgeDecl, GraphOfGroupsSpec};
use crate::constructions::rws::{from_rewriting_system, RewritingSystem};
use crate::error::{Error, Result};
use crate::oracles::{oracle_by_name, ElementOracle, Key};
use crate::stacking::{AutostackableStructure, RespectingStructure, StackingMap, StateTable};
use crate::words::{inverse_name, Alphabet, Letter};
use crate::zoo::zoo;

/// Result of running a build spec.
#[derive(Clone, Debug)]
pub struct Built {
    pub structure: AutostackableStructure,
    pub respecting: Option<RespectingStructure>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing field `{key}`")))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| bad(format!("`{key}` must be a string")))
}

fn from_field<T: serde::de::DeserializeOwned>(v: &Value, key: &str) -> Result<T> {
    serde_json::from_value(field(v, key)?.clone()).map_err(|e| bad(format!("`{key}`: {e}")))
}

/// A word given as a space-separated string or as an array of names.
pub fn word_names(v: &Value) -> Result<Vec<String>> {
    match v {
        Value::String(s) => Ok(s.split_whitespace().map(str::to_string).collect()),
        Value::Array(a) => a
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad("word entries must be strings")))
            .collect(),
        _ => Err(bad("a word is a string or an array of letter names")),
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn dir_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// `zoo:NAME` or a path to a structure or build-spec file.
pub fn load_structure(reference: &str) -> Result<AutostackableStructure> {
    load_built(reference).map(|b| b.structure)
}

/// Like [`load_structure`], keeping the subgroup when the source has one.
pub fn load_built(reference: &str) -> Result<Built> {
    structure_value(&Value::String(reference.to_string()), Path::new(""))
}

/// `zoo:NAME` or a built-in oracle name.
pub fn load_oracle(reference: &str) -> Result<ElementOracle> {
    if let Some(name) = reference.strip_prefix("zoo:") {
        return zoo(name)?.oracle.ok_or_else(|| bad(format!("zoo entry `{name}` has no oracle")));
    }
    oracle_by_name(reference).ok_or_else(|| bad(format!("unknown oracle `{reference}`")))
}

fn structure_value(v: &Value, base: &Path) -> Result<Built> {
    match v {
        Value::String(r) => {
            if let Some(name) = r.strip_prefix("zoo:") {
                let e = zoo(name)?;
                return Ok(Built { structure: e.structure, respecting: e.respecting });
            }
            let path = base.join(r);
            let v = read_json(&path)?;
            structure_value(&v, &dir_of(&path))
        }
        Value::Object(o) if o.contains_key("combinator") => build_value(v, base),
        Value::Object(_) => Ok(Built { structure: structure_from_json(v, base)?, respecting: None }),
        _ => Err(bad("expected a structure, a build spec, a path or zoo:NAME")),
    }
}

/// Inverse of [`AutostackableStructure::to_json`]; composed structures are
/// rebuilt by re-running their recipe.
pub fn structure_from_json(v: &Value, base: &Path) -> Result<AutostackableStructure> {
    let name = str_field(v, "name")?;
    let stacking = field(v, "stacking")?;
    let kind = str_field(stacking, "kind")?;
    if kind == "composed" {
        return Ok(build_value(field(stacking, "recipe")?, base)?.structure.renamed(name));
    }
    let al: Alphabet = from_field(v, "alphabet")?;
    let bound: usize = from_field(v, "bound")?;
    match kind {
        "state_table" => {
            let nf = Fsa::from_json(&from_field::<FsaJson>(v, "nf")?)?;
            let rows: Vec<(usize, String, Value)> = from_field(stacking, "table")?;
            let mut t = StateTable::empty(al.len(), nf.num_states());
            for (q, a, w) in rows {
                if q >= nf.num_states() {
                    return Err(bad(format!("state table mentions state {q}")));
                }
                t.set(q, al.letter_or_err(&a)?, al.parse_names(&word_names(&w)?)?);
            }
            AutostackableStructure::new(name, al, nf, StackingMap::StateTable(Arc::new(t)), bound)
        }
        "rewriting" => {
            let rules = rules_from(&al, field(stacking, "rules")?)?;
            from_rewriting_system(name, RewritingSystem::new(al, rules)?)
        }
        other => Err(bad(format!("unknown stacking kind `{other}`"))),
    }
}

fn rules_from(al: &Alphabet, v: &Value) -> Result<Vec<(Vec<Letter>, Vec<Letter>)>> {
    let rows: Vec<(Value, Value)> = serde_json::from_value(v.clone()).map_err(|e| bad(format!("rules: {e}")))?;
    rows.iter().map(|(l, r)| Ok((al.parse_names(&word_names(l)?)?, al.parse_names(&word_names(r)?)?))).collect()
}

fn respecting_value(v: &Value, base: &Path) -> Result<RespectingStructure> {
    if let Value::String(r) = v {
        let b = structure_value(v, base)?;
        return b.respecting.ok_or_else(|| bad(format!("`{r}` does not declare a subgroup")));
    }
    let s = structure_value(field(v, "structure")?, base)?.structure;
    let sub = s.alphabet().parse_names(&word_names(field(v, "subgroup")?)?)?;
    RespectingStructure::new(s, &sub)
}

fn hat_from(v: Option<&Value>) -> Result<Vec<(String, Vec<String>)>> {
    match v {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Object(o)) => o.iter().map(|(k, w)| Ok((k.clone(), word_names(w)?))).collect(),
        Some(Value::Array(a)) => a
            .iter()
            .map(|e| {
                let (k, w): (String, Value) = serde_json::from_value(e.clone()).map_err(|e| bad(format!("hat: {e}")))?;
                Ok((k, word_names(&w)?))
            })
            .collect(),
        _ => Err(bad("`hat` is an object or a list of pairs")),
    }
}

fn edge_data(v: &Value, base: &Path) -> Result<DirectedEdgeData> {
    let r = v.get("respecting").or_else(|| v.get("structure")).ok_or_else(|| bad("edge data needs `respecting`"))?;
    Ok(DirectedEdgeData { structure: respecting_value(r, base)?, hat: hat_from(v.get("hat"))? })
}

fn gog_spec(v: &Value, base: &Path) -> Result<GraphOfGroupsSpec> {
    let mut edges = Vec::new();
    for e in field(v, "edges")?.as_array().ok_or_else(|| bad("`edges` must be a list"))? {
        let en = str_field(e, "name")?;
        edges.push(EdgeDecl {
            name: en.to_string(),
            inverse: e.get("inverse").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| inverse_name(en)),
            from: str_field(e, "from")?.to_string(),
            to: str_field(e, "to")?.to_string(),
            tree: e.get("tree").and_then(Value::as_bool).unwrap_or(false),
            forward: edge_data(field(e, "forward")?, base)?,
            backward: edge_data(field(e, "backward")?, base)?,
        });
    }
    Ok(GraphOfGroupsSpec {
        name: v.get("name").and_then(Value::as_str).unwrap_or("composed").to_string(),
        vertices: from_field(v, "vertices")?,
        base_vertex: str_field(v, "base_vertex")?.to_string(),
        base: structure_value(field(v, "base")?, base)?.structure,
        edges,
    })
}

/// Attaches a compiled Graph(Φ): directly for state tables, through the
/// components for graphs of groups.
pub fn compile_graph(s: &AutostackableStructure) -> Result<AutostackableStructure> {
    match s.stacking() {
        StackingMap::StateTable(_) => s.with_compiled_graph(),
        StackingMap::Composed(c) => {
            let r = c.recipe();
            if r.get("combinator").and_then(Value::as_str) != Some("gog") {
                return Err(Error::Unsupported(format!("no Graph(Φ) compiler for `{}`", s.name())));
            }
            Ok(gog_compose_compiled(&gog_spec(&r, Path::new(""))?)?.renamed(s.name()))
        }
        StackingMap::RewritingDerived(_) => {
            Err(Error::Unsupported(format!("no Graph(Φ) compiler for rewriting structure `{}`", s.name())))
        }
    }
}

/// Runs a build spec read from `path`.
pub fn build_file(path: &Path) -> Result<Built> {
    let v = read_json(path)?;
    build_value(&v, &dir_of(path))
}

/// Runs the combinator named in `v["combinator"]`.
pub fn build_value(v: &Value, base: &Path) -> Result<Built> {
    let name = v.get("name").and_then(Value::as_str).unwrap_or("composed").to_string();
    let plain = |s: AutostackableStructure| Ok(Built { structure: s, respecting: None });
    let resp = |r: RespectingStructure| Ok(Built { structure: r.base().clone(), respecting: Some(r) });
    match str_field(v, "combinator")? {
        "zoo" => structure_value(&Value::String(format!("zoo:{name}")), base),
        "rewriting" | "rws" => {
            let al: Alphabet = match v.get("generators") {
                Some(g) => Alphabet::from_generators(&word_names(g)?),
                None => from_field(v, "alphabet")?,
            };
            let rules = rules_from(&al, field(v, "rules")?)?;
            let mut rs = RewritingSystem::new(al, rules)?;
            if v.get("free_cancellation").and_then(Value::as_bool).unwrap_or(false) {
                rs = rs.with_free_cancellation();
            }
            plain(from_rewriting_system(&name, rs)?)
        }
        "gog" => plain(gog_compose(&gog_spec(v, base)?)?),
        "finite_index" | "findex" => {
            let words = |x: &Value| -> Result<Vec<Vec<String>>> {
                x.as_array().ok_or_else(|| bad("expected a list of words"))?.iter().map(word_names).collect()
            };
            let mut action = Vec::new();
            for row in field(v, "action")?.as_array().ok_or_else(|| bad("`action` must be a list of rows"))? {
                let cells: Vec<(Value, usize)> =
                    serde_json::from_value(row.clone()).map_err(|e| bad(format!("action: {e}")))?;
                action.push(cells.iter().map(|(w, j)| Ok((word_names(w)?, *j))).collect::<Result<Vec<_>>>()?);
            }
            let spec = FiniteIndexSpec {
                name,
                h: structure_value(field(v, "h")?, base)?.structure,
                extra: v.get("extra").map(|x| serde_json::from_value(x.clone())).transpose()?.unwrap_or_default(),
                transversal: words(field(v, "transversal")?)?,
                action,
            };
            resp(finite_index_compose(&spec)?)
        }
        "extension" => {
            let k = structure_value(field(v, "k")?, base)?.structure;
            let q = respecting_value(field(v, "q")?, base)?;
            let lifts: Vec<String> = from_field(v, "lifts")?;
            let rw = field(v, "k_rewriter")?;
            if rw.get("kind").and_then(Value::as_str) != Some("collecting") {
                return Err(Error::Unsupported("only collecting K-rewriters can be loaded from JSON".into()));
            }
            let rw = CollectingRewriter::from_json(&k, q.base(), &lifts, rw)?;
            let spec = ExtensionSpec { name, k_structure: k, q_structure: q, lifts, k_rewriter: Arc::new(rw) };
            resp(extension_compose(&spec)?)
        }
        "coset" => {
            let h = structure_value(field(v, "h")?, base)?.structure;
            let o = load_oracle(str_field(v, "oracle")?)?;
            let t = Fsa::from_json(&from_field::<FsaJson>(v, "transversal")?)?;
            let k_ft: usize = from_field(v, "fellow_constant")?;
            let b_keys: Vec<Key> = match v.get("subgroup_keys") {
                Some(k) => serde_json::from_value(k.clone())?,
                None => {
                    let defs: Vec<(String, Value)> = from_field(v, "subgroup_words")?;
                    let mut keys = vec![Key::new(); h.alphabet().len()];
                    for (b, w) in defs {
                        let b = h.alphabet().letter_or_err(&b)?;
                        let g = o.eval(&o.alphabet().parse_names(&word_names(&w)?)?);
                        keys[h.alphabet().inv(b).idx()] = o.inverse(&g);
                        keys[b.idx()] = g;
                    }
                    keys
                }
            };
            let len = v.get("membership_length").and_then(Value::as_u64).map_or(4 * k_ft.max(1), |x| x as usize);
            let members = subgroup_elements(&o, &b_keys, len);
            let in_h = move |g: &Key| members.contains(g);
            let mut data = CosetAutomaticData::new(o, t, k_ft, h.alphabet().clone(), b_keys, &in_h)?;
            if let Some(mu) = v.get("mu").and_then(Value::as_u64) {
                data = data.with_mu(mu as usize);
            }
            resp(coset_compose(&name, &h, Arc::new(data))?)
        }
        other => Err(bad(format!("unknown combinator `{other}`"))),
    }
}

/// Subgroup elements reachable by subgroup words of length at most `len`.
fn subgroup_elements(o: &ElementOracle, b_keys: &[Key], len: usize) -> HashSet<Key> {
    let mut seen = HashSet::from([o.identity()]);
    let mut frontier = vec![o.identity()];
    for _ in 0..len {
        let mut next = Vec::new();
        for g in &frontier {
            for b in b_keys {
                let g2 = o.mul_keys(g, b);
                if seen.len() < SUBGROUP_SEARCH_LIMIT && seen.insert(g2.clone()) {
                    next.push(g2);
                }
            }
        }
        frontier = next;
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::zoo_names;

    fn same_solver(a: &AutostackableStructure, b: &AutostackableStructure, n: usize) {
        assert_eq!(a.alphabet(), b.alphabet());
        assert!(a.nf().equivalent(b.nf()));
        for w in a.nf().enumerate_upto(n) {
            let y: Vec<Letter> = w.iter().map(|&i| Letter(i as u32)).collect();
            for x in a.alphabet().letters() {
                assert_eq!(a.phi_eval(&y, x).unwrap(), b.phi_eval(&y, x).unwrap(), "{}", a.name());
            }
        }
    }

    #[test]
    fn every_zoo_entry_round_trips() {
        for name in zoo_names() {
            let s = load_structure(&format!("zoo:{name}")).unwrap();
            let back = structure_from_json(&s.to_json(), Path::new("")).unwrap();
            assert_eq!(back.name(), s.name());
            same_solver(&s, &back, 3);
        }
    }

    #[test]
    fn rewriting_spec_with_string_rules() {
        let v = serde_json::json!({
            "combinator": "rws", "name": "z2z3", "generators": ["a", "b"],
            "rules": [["a^-1", "a"], ["a a", ""], ["b b", "b^-1"], ["b^-1 b^-1", "b"], ["b b^-1", ""], ["b^-1 b", ""]]
        });
        let s = build_value(&v, Path::new("")).unwrap().structure;
        let w = s.alphabet().parse("b b b a a").unwrap();
        assert!(s.is_trivial(&w, None).unwrap());
    }

    #[test]
    fn coset_spec_from_subgroup_words() {
        let mut v = serde_json::json!({
            "combinator": "coset", "name": "f2-coset-a", "h": crate::zoo::zn_named(&["h"]).unwrap().to_json(),
            "oracle": "F2", "fellow_constant": 2,
            "transversal": crate::zoo::f2_transversal().to_json(),
            "subgroup_words": [["h", "a"]],
        });
        let b = build_value(&v, Path::new("")).unwrap();
        let z = zoo("f2-coset-a").unwrap();
        same_solver(&b.structure, &z.structure, 3);
        assert!(b.respecting.is_some());
        // B = {a} clashes with C
        v["h"] = serde_json::json!("zoo:Z");
        v["subgroup_words"] = serde_json::json!([["a", "a"]]);
        assert!(matches!(build_value(&v, Path::new("")), Err(Error::DuplicateLetter(_))));
    }

    #[test]
    fn compiled_graphs_cross_check() {
        for name in ["Z2", "z*z"] {
            let s = compile_graph(&load_structure(&format!("zoo:{name}")).unwrap()).unwrap();
            assert!(s.graph_phi().is_some());
            s.cross_check(4).unwrap();
        }
        assert!(matches!(compile_graph(&load_structure("zoo:klein-rs").unwrap()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn missing_fields_are_input_errors() {
        let v = serde_json::json!({ "combinator": "gog", "name": "x" });
        assert!(matches!(build_value(&v, Path::new("")), Err(Error::Input(_))));
        assert!(matches!(load_oracle("nope"), Err(Error::Input(_))));
    }
}
