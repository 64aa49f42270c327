//! Adding generators to an existing structure: normal forms are unchanged
//! and every edge labelled by a new letter flows to the normal form of the
//! element it represents.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stacking::{AutostackableStructure, ComposedMap, RespectingStructure, StackingMap};
use crate::words::{Letter, Word};

/// A new inverse pair `name`, `inverse` where `name` represents `word`.
#[derive(Clone, Debug)]
pub struct NewGenerator {
    pub name: String,
    pub inverse: String,
    pub word: Word,
}

impl NewGenerator {
    pub fn new(name: &str, word: Word) -> Self {
        NewGenerator { name: name.to_string(), inverse: crate::words::inverse_name(name), word }
    }
}

struct ExtendedMap {
    base: AutostackableStructure,
    old: usize,
    words: Vec<Word>,
    names: Vec<(String, String, Vec<String>)>,
}

impl ComposedMap for ExtendedMap {
    fn phi(&self, y: &[Letter], a: Letter) -> Result<Word> {
        if a.idx() < self.old {
            self.base.phi_unchecked(y, a)
        } else {
            Ok(self.words[a.idx() - self.old].clone())
        }
    }

    fn recipe(&self) -> serde_json::Value {
        serde_json::json!({
            "combinator": "extend_generators",
            "base": self.base.to_json(),
            "extra": self.names,
        })
    }
}

/// Appends the new letters. The inverse of each new letter is sent to the
/// normal form of the inverted representative.
pub fn extend_generators(s: &AutostackableStructure, extra: &[NewGenerator]) -> Result<AutostackableStructure> {
    let old = s.alphabet().len();
    let pairs: Vec<(&str, &str)> = extra.iter().map(|g| (g.name.as_str(), g.inverse.as_str())).collect();
    let al = s.alphabet().extended(&pairs)?;
    let mut words: Vec<Word> = vec![Vec::new(); al.len() - old];
    for g in extra {
        if g.word.is_empty() {
            return Err(Error::BadRepresentative { letter: g.name.clone(), reason: "identity letters are excluded".into() });
        }
        if !s.is_normal_form(&g.word) {
            return Err(Error::BadRepresentative {
                letter: g.name.clone(),
                reason: format!("`{}` is not a normal form", s.alphabet().render(&g.word)),
            });
        }
        let x = al.letter(&g.name).expect("just added");
        let xi = al.inv(x);
        words[x.idx() - old] = g.word.clone();
        if xi != x {
            words[xi.idx() - old] = s.normal_form(&s.alphabet().invert(&g.word), None)?;
        }
    }
    let map: Vec<usize> = (0..old).collect();
    let nf = s.nf().embed(&map, al.names().to_vec()).minimize();
    let bound = words.iter().map(Vec::len).max().unwrap_or(0).max(s.bound());
    let names = extra.iter().map(|g| (g.name.clone(), g.inverse.clone(), s.alphabet().to_names(&g.word))).collect();
    let m = ExtendedMap { base: s.clone(), old, words, names };
    AutostackableStructure::new(s.name(), al, nf, StackingMap::Composed(Arc::new(m)), bound)
}

/// As [`extend_generators`]; a new letter joins the subgroup alphabet when
/// its representative is a subgroup word.
pub fn extend_respecting(r: &RespectingStructure, extra: &[NewGenerator]) -> Result<RespectingStructure> {
    let s = extend_generators(r.base(), extra)?;
    let mut sub = r.subgroup_letters();
    for g in extra {
        if r.is_subgroup_word(&g.word) {
            let x = s.alphabet().letter(&g.name).expect("just added");
            sub.push(x);
            sub.push(s.alphabet().inv(x));
        }
    }
    RespectingStructure::new(s, &sub)
}
