//! Extensions `1 → K → G → Q → 1`. Normal forms are `Nf_K · hat(Nf_Q)`;
//! the stacking map needs normal forms in `K` of short words over the full
//! alphabet, supplied by a [`KRewriter`].

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stacking::{state_representatives, AutostackableStructure, ComposedMap, RespectingStructure, StackingMap};
use crate::words::{Alphabet, Letter, Word};

/// Normal forms in `K` of words over `A = A_K ∪ Ĉ` that represent elements
/// of `K`. Letters of `A_K` come first in `A`, so outputs are words over both.
pub trait KRewriter: Send + Sync {
    fn rewrite(&self, w: &[Letter]) -> Result<Word>;

    /// Serializable description, if any.
    fn to_json(&self) -> Option<serde_json::Value> {
        None
    }
}

/// `A = A_K` followed by the lifted pairs in the order of `C`, and for each
/// letter of `C` the index of its lift.
pub fn extension_alphabet(k: &Alphabet, q: &Alphabet, lifts: &[String]) -> Result<(Alphabet, Vec<usize>)> {
    if lifts.len() != q.len() {
        return Err(Error::Input(format!("{} lift names for {} letters", lifts.len(), q.len())));
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    for c in q.letters() {
        let ci = q.inv(c);
        if ci.idx() >= c.idx() {
            pairs.push((lifts[c.idx()].clone(), lifts[ci.idx()].clone()));
        }
    }
    let al = k.extended(&pairs)?;
    let map = q.letters().map(|c| al.letter_or_err(&lifts[c.idx()]).map(Letter::idx)).collect::<Result<Vec<_>>>()?;
    for c in q.letters() {
        if al.inv(Letter(map[c.idx()] as u32)).idx() != map[q.inv(c).idx()] {
            return Err(Error::Input(format!("lift of `{}` is not inverse-compatible", q.name(c))));
        }
    }
    Ok((al, map))
}

/// Collects `K`-letters to the left: `ĉ k = (ĉ k ĉ⁻¹) ĉ` through the
/// conjugation table, then reduces the remaining lift word along the
/// solver trace of its image in `Q`, each flow step `ĉ → hat(u)` emitting
/// the cocycle `ĉ · hat(u)⁻¹ ∈ K`.
pub struct CollectingRewriter {
    k: AutostackableStructure,
    q: AutostackableStructure,
    alphabet: Alphabet,
    /// global index → letter of C, for lifted letters
    lift_of: Vec<Option<usize>>,
    /// conj[c][k]: `ĉ k ĉ⁻¹` as a K normal form
    conj: Vec<Vec<Word>>,
    /// (c, u) ↦ `ĉ · hat(u)⁻¹` as a word over `A_K`
    cocycle: BTreeMap<(usize, Vec<usize>), Word>,
}

impl CollectingRewriter {
    /// Tables come from the two functions; the cocycle is tabulated for
    /// every value of `φ_Q` on state representatives of `Nf_Q`.
    pub fn from_fns(
        k: &AutostackableStructure,
        q: &AutostackableStructure,
        lifts: &[String],
        conj: impl Fn(Letter, Letter) -> Word,
        cocycle: impl Fn(Letter, &[Letter]) -> Word,
    ) -> Result<Self> {
        let (alphabet, map) = extension_alphabet(k.alphabet(), q.alphabet(), lifts)?;
        let mut lift_of = vec![None; alphabet.len()];
        for (c, &g) in map.iter().enumerate() {
            lift_of[g] = Some(c);
        }
        let mut conj_t = Vec::new();
        for c in q.alphabet().letters() {
            let mut row = Vec::new();
            for x in k.alphabet().letters() {
                row.push(k.normal_form(&conj(c, x), None)?);
            }
            conj_t.push(row);
        }
        let mut table = BTreeMap::new();
        for (_, y) in state_representatives(q.nf()) {
            let y: Word = y.into_iter().map(|i| Letter(i as u32)).collect();
            for c in q.alphabet().letters() {
                let u = q.phi_eval(&y, c)?;
                let key = (c.idx(), AutostackableStructure::syms(&u));
                if let std::collections::btree_map::Entry::Vacant(e) = table.entry(key) {
                    let w = k.normal_form(&cocycle(c, &u), None)?;
                    e.insert(w);
                }
            }
        }
        Ok(CollectingRewriter { k: k.clone(), q: q.clone(), alphabet, lift_of, conj: conj_t, cocycle: table })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// `U·w·U⁻¹` for a lift word `U` (as letters of C) and `w` over `A_K`.
    fn conjugate(&self, u: &[usize], w: Word) -> Result<Word> {
        let mut w = w;
        for &c in u.iter().rev() {
            let mut next = Vec::new();
            for x in &w {
                next.extend_from_slice(&self.conj[c][x.idx()]);
            }
            w = self.k.normal_form(&next, None)?;
        }
        Ok(w)
    }

    fn failure(&self, w: &[Letter], why: &str) -> Error {
        Error::KRewriterFailure(format!("{}: {why}", self.alphabet.render(w)))
    }
}

impl KRewriter for CollectingRewriter {
    fn rewrite(&self, input: &[Letter]) -> Result<Word> {
        let nk = self.k.alphabet().len();
        let mut kacc: Word = Vec::new();
        let mut u: Vec<usize> = Vec::new();
        for &x in input {
            match self.lift_of.get(x.idx()).copied().flatten() {
                Some(c) => u.push(c),
                None if x.idx() < nk => {
                    let moved = self.conjugate(&u, vec![x])?;
                    kacc.extend(moved);
                }
                None => return Err(self.failure(input, "letter outside the extension alphabet")),
            }
        }
        let uq: Word = u.iter().map(|&c| Letter(c as u32)).collect();
        let (nf, events) = self.q.derivation_trace(&uq, None)?;
        if !nf.is_empty() {
            return Err(self.failure(input, "does not map to the identity of the quotient"));
        }
        let mut cur: Vec<usize> = u;
        for e in events {
            match e {
                crate::stacking::TraceEvent::Flow { position, a, replacement, .. } => {
                    let key = (a.idx(), AutostackableStructure::syms(&replacement));
                    let kappa = self.cocycle.get(&key).ok_or_else(|| self.failure(input, "missing cocycle entry"))?;
                    let moved = self.conjugate(&cur[..position], kappa.clone())?;
                    kacc.extend(moved);
                    cur.splice(position..position + 1, key.1);
                }
                crate::stacking::TraceEvent::Cancel { position, .. } => {
                    cur.drain(position..position + 2);
                }
            }
        }
        self.k.normal_form(&kacc, None)
    }

    fn to_json(&self) -> Option<serde_json::Value> {
        let kal = self.k.alphabet();
        let qal = self.q.alphabet();
        let conj: Vec<serde_json::Value> = qal
            .letters()
            .flat_map(|c| {
                kal.letters().map(move |x| serde_json::json!([qal.name(c), kal.name(x), kal.to_names(&self.conj[c.idx()][x.idx()])]))
            })
            .collect();
        let cocycle: Vec<serde_json::Value> = self
            .cocycle
            .iter()
            .map(|((c, u), w)| {
                let u: Word = u.iter().map(|&i| Letter(i as u32)).collect();
                serde_json::json!([qal.name(Letter(*c as u32)), qal.to_names(&u), kal.to_names(w)])
            })
            .collect();
        Some(serde_json::json!({ "kind": "collecting", "conj": conj, "cocycle": cocycle }))
    }
}

impl CollectingRewriter {
    /// Inverse of [`KRewriter::to_json`] for this rewriter.
    pub fn from_json(
        k: &AutostackableStructure,
        q: &AutostackableStructure,
        lifts: &[String],
        j: &serde_json::Value,
    ) -> Result<Self> {
        type Entry = (String, Vec<String>, Vec<String>);
        let bad = |m: &str| Error::Input(format!("collecting rewriter: {m}"));
        let conj: Vec<(String, String, Vec<String>)> =
            serde_json::from_value(j.get("conj").cloned().ok_or_else(|| bad("missing conj"))?)?;
        let cocycle: Vec<Entry> = serde_json::from_value(j.get("cocycle").cloned().ok_or_else(|| bad("missing cocycle"))?)?;
        let (kal, qal) = (k.alphabet(), q.alphabet());
        let mut ct: BTreeMap<(usize, usize), Word> = BTreeMap::new();
        for (c, x, w) in conj {
            ct.insert((qal.letter_or_err(&c)?.idx(), kal.letter_or_err(&x)?.idx()), kal.parse_names(&w)?);
        }
        let mut cy: BTreeMap<(usize, Vec<usize>), Word> = BTreeMap::new();
        for (c, u, w) in cocycle {
            let u = AutostackableStructure::syms(&qal.parse_names(&u)?);
            cy.insert((qal.letter_or_err(&c)?.idx(), u), kal.parse_names(&w)?);
        }
        let mut r = Self::from_fns(
            k,
            q,
            lifts,
            |c, x| ct.get(&(c.idx(), x.idx())).cloned().unwrap_or_else(|| vec![x]),
            |_, _| Vec::new(),
        )?;
        r.cocycle = cy;
        for c in qal.letters() {
            for x in kal.letters() {
                if !ct.contains_key(&(c.idx(), x.idx())) {
                    return Err(bad(&format!("missing conjugate of `{}` by `{}`", kal.name(x), qal.name(c))));
                }
            }
        }
        Ok(r)
    }
}

#[derive(Clone)]
pub struct ExtensionSpec {
    pub name: String,
    pub k_structure: AutostackableStructure,
    pub q_structure: RespectingStructure,
    /// lift name for each letter of `C`, in alphabet order
    pub lifts: Vec<String>,
    pub k_rewriter: Arc<dyn KRewriter>,
}

impl std::fmt::Debug for ExtensionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtensionSpec").field("name", &self.name).field("lifts", &self.lifts).finish()
    }
}

struct ExtensionMap {
    k: AutostackableStructure,
    q: AutostackableStructure,
    nk: usize,
    /// global index → letter of C
    lift_of: Vec<Option<usize>>,
    /// letter of C → global index
    lift: Vec<usize>,
    rewriter: Arc<dyn KRewriter>,
    recipe: serde_json::Value,
}

impl ExtensionMap {
    fn rw(&self, w: &[Letter]) -> Result<Word> {
        let r = self.rewriter.rewrite(w)?;
        if r.iter().any(|x| x.idx() >= self.nk) || !self.k.is_normal_form(&r) {
            return Err(Error::KRewriterFailure(format!("output {r:?} is not a normal form of the kernel")));
        }
        Ok(r)
    }

    fn hat(&self, u: &[Letter]) -> Word {
        u.iter().map(|c| Letter(self.lift[c.idx()] as u32)).collect()
    }

    fn inv(&self, x: Letter) -> Letter {
        match self.lift_of[x.idx()] {
            Some(c) => Letter(self.lift[self.q.alphabet().inv(Letter(c as u32)).idx()] as u32),
            None => self.k.alphabet().inv(x),
        }
    }

    fn case_two(&self, last: Letter, a: Letter) -> Result<Word> {
        let li = self.inv(last);
        let mut out = vec![li];
        out.extend(self.rw(&[last, a, li])?);
        out.push(last);
        Ok(out)
    }

    fn case_three(&self, st: &[Letter], a: Letter) -> Result<Word> {
        let qst: Word = st.iter().map(|x| Letter(self.lift_of[x.idx()].expect("lift letter") as u32)).collect();
        let qa = Letter(self.lift_of[a.idx()].expect("lift letter") as u32);
        let u = self.q.phi_eval(&qst, qa)?;
        let hu = self.hat(&u);
        let mut w = vec![a];
        w.extend(hu.iter().rev().map(|&x| self.inv(x)));
        let mut out = self.rw(&w)?;
        out.extend(hu);
        Ok(out)
    }
}

impl ComposedMap for ExtensionMap {
    fn phi(&self, y: &[Letter], a: Letter) -> Result<Word> {
        let split = y.iter().position(|x| x.idx() >= self.nk).unwrap_or(y.len());
        let (r, st) = y.split_at(split);
        if a.idx() < self.nk {
            match st.last() {
                None => self.k.phi_eval(r, a),
                Some(&last) => self.case_two(last, a),
            }
        } else {
            self.case_three(st, a)
        }
    }

    fn recipe(&self) -> serde_json::Value {
        self.recipe.clone()
    }
}

/// Composes the extension; the result respects the preimage of the
/// subgroup of `Q`, with subgroup alphabet `A_K ∪ D̂`.
pub fn extension_compose(spec: &ExtensionSpec) -> Result<RespectingStructure> {
    let k = &spec.k_structure;
    let qr = &spec.q_structure;
    let q = qr.base();
    let (al, lift) = extension_alphabet(k.alphabet(), q.alphabet(), &spec.lifts)?;
    let nk = k.alphabet().len();
    let mut lift_of = vec![None; al.len()];
    for (c, &g) in lift.iter().enumerate() {
        lift_of[g] = Some(c);
    }
    let names = al.names().to_vec();
    let nf_k = k.nf().embed(&(0..nk).collect::<Vec<_>>(), names.clone());
    let nf_q = q.nf().embed(&lift, names.clone());
    let nf = nf_k.concat(&nf_q).minimize();

    let recipe = serde_json::json!({
        "combinator": "extension",
        "name": spec.name,
        "k": k.to_json(),
        "q": { "structure": q.to_json(), "subgroup": q.alphabet().to_names(&qr.subgroup_letters()) },
        "lifts": spec.lifts,
        "k_rewriter": spec.k_rewriter.to_json(),
    });
    let m = ExtensionMap {
        k: k.clone(),
        q: q.clone(),
        nk,
        lift_of,
        lift: lift.clone(),
        rewriter: spec.k_rewriter.clone(),
        recipe,
    };

    // bound over the finitely many rewriter calls: conjugates by a last
    // letter, and cocycles at state representatives of Nf_Q
    let mut bound = k.bound();
    for &l in &lift {
        for x in k.alphabet().letters() {
            bound = bound.max(m.case_two(Letter(l as u32), x)?.len());
        }
    }
    for (_, y) in state_representatives(q.nf()) {
        let st: Word = y.iter().map(|&i| Letter(lift[i] as u32)).collect();
        for &l in &lift {
            bound = bound.max(m.case_three(&st, Letter(l as u32))?.len());
        }
    }

    let s = AutostackableStructure::new(&spec.name, al.clone(), nf, StackingMap::Composed(Arc::new(m)), bound)?;
    let mut sub: Vec<Letter> = (0..nk).map(|i| Letter(i as u32)).collect();
    sub.extend(qr.subgroup_letters().iter().map(|d| Letter(lift[d.idx()] as u32)));
    RespectingStructure::new(s, &sub)
}
