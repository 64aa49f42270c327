//! Alphabets with formal inverses, words and free reduction.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned letter: an index into its [`Alphabet`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Letter(pub u32);

impl Letter {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A word is a finite sequence of letters; the empty vector is the empty word.
pub type Word = Vec<Letter>;

/// Suffix that marks a formal inverse in the default naming convention.
pub const INV_SUFFIX: &str = "^-1";

/// Finite inverse-closed alphabet. Letter order is declaration order and is
/// the order used for every shortlex comparison in the crate.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<u32>,
    index: HashMap<String, u32>,
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names.iter()).finish()
    }
}

/// Default name of the inverse of `name`.
pub fn inverse_name(name: &str) -> String {
    match name.strip_suffix(INV_SUFFIX) {
        Some(base) => base.to_string(),
        None => format!("{name}{INV_SUFFIX}"),
    }
}

impl Alphabet {
    /// Builds an alphabet from `(name, inverse name)` pairs. A pair with equal
    /// names declares a self-inverse letter. Each name may occur once.
    pub fn new<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        let mut alph = Alphabet { names: Vec::new(), inverse: Vec::new(), index: HashMap::new() };
        for (x, y) in pairs {
            alph.push_pair(x.as_ref(), y.as_ref())?;
        }
        Ok(alph)
    }

    /// `x, x^-1, y, y^-1, ...` for the given generator names.
    pub fn from_generators<S: AsRef<str>>(gens: &[S]) -> Self {
        let pairs: Vec<(String, String)> =
            gens.iter().map(|g| (g.as_ref().to_string(), inverse_name(g.as_ref()))).collect();
        Self::new(&pairs).expect("generator names must be distinct")
    }

    /// The empty alphabet.
    pub fn empty() -> Self {
        Alphabet { names: Vec::new(), inverse: Vec::new(), index: HashMap::new() }
    }

    fn push_pair(&mut self, x: &str, y: &str) -> Result<()> {
        for n in [x, y] {
            if n.is_empty() || n.chars().any(char::is_whitespace) {
                return Err(Error::Input(format!("invalid letter name `{n}`")));
            }
        }
        if self.index.contains_key(x) {
            return Err(Error::DuplicateLetter(x.to_string()));
        }
        let i = self.names.len() as u32;
        self.names.push(x.to_string());
        self.index.insert(x.to_string(), i);
        if x == y {
            self.inverse.push(i);
            return Ok(());
        }
        if self.index.contains_key(y) {
            return Err(Error::DuplicateLetter(y.to_string()));
        }
        self.names.push(y.to_string());
        self.index.insert(y.to_string(), i + 1);
        self.inverse.push(i + 1);
        self.inverse.push(i);
        Ok(())
    }

    /// Appends new inverse pairs, keeping existing letter indices.
    pub fn extended<S: AsRef<str>>(&self, pairs: &[(S, S)]) -> Result<Self> {
        let mut out = self.clone();
        for (x, y) in pairs {
            out.push_pair(x.as_ref(), y.as_ref())?;
        }
        Ok(out)
    }

    /// Copy of this alphabet with every name prefixed by `tag.`; used to keep
    /// semantically overlapping generating sets disjoint.
    pub fn namespaced(&self, tag: &str) -> Self {
        let names: Vec<String> = self.names.iter().map(|n| format!("{tag}.{n}")).collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        Alphabet { names, inverse: self.inverse.clone(), index }
    }

    /// Disjoint union; letters of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &Alphabet) -> Result<Self> {
        let mut out = self.clone();
        let off = self.len() as u32;
        for (i, n) in other.names.iter().enumerate() {
            if out.index.contains_key(n) {
                return Err(Error::DuplicateLetter(n.clone()));
            }
            out.names.push(n.clone());
            out.index.insert(n.clone(), off + i as u32);
            out.inverse.push(off + other.inverse[i]);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len() as u32).map(Letter)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.names[a.idx()]
    }

    pub fn inv(&self, a: Letter) -> Letter {
        Letter(self.inverse[a.idx()])
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.index.get(name).map(|&i| Letter(i))
    }

    pub fn letter_or_err(&self, name: &str) -> Result<Letter> {
        if let Some(a) = self.letter(name) {
            return Ok(a);
        }
        if let Some(base) = name.strip_suffix(INV_SUFFIX) {
            if let Some(a) = self.letter(base) {
                return Ok(self.inv(a));
            }
        }
        Err(Error::UnknownLetter(name.to_string()))
    }

    /// Parses whitespace-separated letter names; `x^-1` denotes the inverse of
    /// `x` even when the inverse carries another declared name. A lone `ε`
    /// is the empty word, unless it was declared as a letter.
    pub fn parse(&self, text: &str) -> Result<Word> {
        if text.trim() == "ε" && self.letter("ε").is_none() {
            return Ok(Vec::new());
        }
        text.split_whitespace().map(|t| self.letter_or_err(t)).collect()
    }

    /// Words given as lists of names (the JSON convention).
    pub fn parse_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Word> {
        names.iter().map(|n| self.letter_or_err(n.as_ref())).collect()
    }

    pub fn to_names(&self, w: &[Letter]) -> Vec<String> {
        w.iter().map(|&a| self.names[a.idx()].clone()).collect()
    }

    /// Space-separated rendering; the empty word renders as `ε`.
    pub fn render(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        self.to_names(w).join(" ")
    }

    /// Formal inverse: reverse and invert each letter.
    pub fn invert(&self, w: &[Letter]) -> Word {
        w.iter().rev().map(|&a| self.inv(a)).collect()
    }

    /// Iteratively deletes adjacent inverse pairs.
    pub fn free_reduce(&self, w: &[Letter]) -> Word {
        let mut out: Word = Vec::with_capacity(w.len());
        for &a in w {
            if out.last().is_some_and(|&b| b == self.inv(a)) {
                out.pop();
            } else {
                out.push(a);
            }
        }
        out
    }

    pub fn is_freely_reduced(&self, w: &[Letter]) -> bool {
        w.windows(2).all(|p| p[1] != self.inv(p[0]))
    }

    /// Shortlex comparison under declaration order.
    pub fn shortlex_cmp(u: &[Letter], v: &[Letter]) -> std::cmp::Ordering {
        u.len().cmp(&v.len()).then_with(|| u.cmp(v))
    }

    pub fn to_json(&self) -> Vec<(String, String)> {
        self.letters().filter(|a| a.0 <= self.inv(*a).0).map(|a| (self.name(a).to_string(), self.name(self.inv(a)).to_string())).collect()
    }
}

impl Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(String, String)> = Vec::deserialize(d)?;
        Alphabet::new(&pairs).map_err(serde::de::Error::custom)
    }
}

/// `w(i)`: the prefix of length `i`, or all of `w` when `i >= ℓ(w)`.
pub fn prefix(w: &[Letter], i: usize) -> Word {
    w[..i.min(w.len())].to_vec()
}

/// `w(i)′`: what remains after removing the first `i` letters.
pub fn suffix_from(w: &[Letter], i: usize) -> Word {
    w[i.min(w.len())..].to_vec()
}

pub fn concat(parts: &[&[Letter]]) -> Word {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}
