//! Finite convergent rewriting systems and the structure they induce: the
//! irreducible words are the normal forms and each non-tree edge is sent to
//! the path that walks back over the redex and forward along its right side.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::automata::Fsa;
use crate::error::{Error, Result};
use crate::stacking::{AutostackableStructure, StackingMap};
use crate::words::{Alphabet, Letter, Word};

/// Step budget for joining one critical pair.
pub const JOIN_LIMIT: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewritingSystem {
    alphabet: Alphabet,
    rules: Vec<(Word, Word)>,
}

/// JSON form of a rewriting system.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RewritingSystemJson {
    pub alphabet: Alphabet,
    pub rules: Vec<(Vec<String>, Vec<String>)>,
}

impl RewritingSystem {
    pub fn new(alphabet: Alphabet, rules: Vec<(Word, Word)>) -> Result<Self> {
        for (l, r) in &rules {
            if l.is_empty() {
                return Err(Error::Input("rule with empty left side".into()));
            }
            if l.iter().chain(r).any(|a| a.idx() >= alphabet.len()) {
                return Err(Error::UnknownLetter("rule letter outside the alphabet".into()));
            }
        }
        Ok(RewritingSystem { alphabet, rules })
    }

    /// Rules written as `"lhs -> rhs"` pairs of space-separated names; an
    /// empty side is written as an empty string.
    pub fn parse(alphabet: Alphabet, rules: &[(&str, &str)]) -> Result<Self> {
        let rules = rules
            .iter()
            .map(|(l, r)| Ok((alphabet.parse(l)?, alphabet.parse(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, rules)
    }

    /// Adds `x x⁻¹ → ε` for every letter `x`, skipping rules already present.
    pub fn with_free_cancellation(mut self) -> Self {
        for a in self.alphabet.letters() {
            let lhs = vec![a, self.alphabet.inv(a)];
            if a != self.alphabet.inv(a) && !self.rules.iter().any(|(l, _)| *l == lhs) {
                self.rules.push((lhs, Vec::new()));
            }
        }
        self
    }

    pub fn from_json(j: &RewritingSystemJson) -> Result<Self> {
        let al = j.alphabet.clone();
        let rules = j
            .rules
            .iter()
            .map(|(l, r)| Ok((al.parse_names(l)?, al.parse_names(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(al, rules)
    }

    pub fn to_json(&self) -> RewritingSystemJson {
        RewritingSystemJson { alphabet: self.alphabet.clone(), rules: self.rules_json() }
    }

    pub fn rules_json(&self) -> Vec<(Vec<String>, Vec<String>)> {
        self.rules.iter().map(|(l, r)| (self.alphabet.to_names(l), self.alphabet.to_names(r))).collect()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[(Word, Word)] {
        &self.rules
    }

    /// `max(|lhs| − 1 + |rhs|)`, at least 1.
    pub fn bound(&self) -> usize {
        self.rules.iter().map(|(l, r)| l.len() - 1 + r.len()).max().unwrap_or(1).max(1)
    }

    /// One leftmost rewrite, if any rule applies.
    pub fn rewrite_once(&self, w: &[Letter]) -> Option<Word> {
        for i in 0..w.len() {
            for (l, r) in &self.rules {
                if w[i..].starts_with(l) {
                    let mut out = w[..i].to_vec();
                    out.extend_from_slice(r);
                    out.extend_from_slice(&w[i + l.len()..]);
                    return Some(out);
                }
            }
        }
        None
    }

    /// Rewrites to an irreducible word, failing after `limit` steps.
    pub fn reduce(&self, w: &[Letter], limit: usize) -> Result<Word> {
        let mut w = w.to_vec();
        for _ in 0..limit {
            match self.rewrite_once(&w) {
                Some(n) => w = n,
                None => return Ok(w),
            }
        }
        Err(Error::StepLimitExceeded { limit: limit as u64, word: self.alphabet.render(&w) })
    }

    /// Critical pairs from overlaps and inclusions of left sides; each must
    /// join within [`JOIN_LIMIT`] steps.
    pub fn check_local_confluence(&self) -> Result<()> {
        let al = &self.alphabet;
        for (i, (l1, r1)) in self.rules.iter().enumerate() {
            for (j, (l2, r2)) in self.rules.iter().enumerate() {
                // overlap: a proper suffix of l1 is a proper prefix of l2
                for k in 1..l1.len().min(l2.len()) {
                    if l1[l1.len() - k..] == l2[..k] {
                        let mut overlap = l1.clone();
                        overlap.extend_from_slice(&l2[k..]);
                        let mut left = r1.clone();
                        left.extend_from_slice(&l2[k..]);
                        let mut right = l1[..l1.len() - k].to_vec();
                        right.extend_from_slice(r2);
                        self.join(al, &overlap, &left, &right)?;
                    }
                }
                // inclusion: l2 is a factor of l1
                if i != j && l2.len() <= l1.len() {
                    for p in 0..=l1.len() - l2.len() {
                        if l1[p..p + l2.len()] == l2[..] {
                            let mut right = l1[..p].to_vec();
                            right.extend_from_slice(r2);
                            right.extend_from_slice(&l1[p + l2.len()..]);
                            self.join(al, l1, r1, &right)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn join(&self, al: &Alphabet, overlap: &[Letter], left: &[Letter], right: &[Letter]) -> Result<()> {
        let err = |l: &[Letter], r: &[Letter]| Error::NotLocallyConfluent {
            overlap: al.render(overlap),
            left: al.render(l),
            right: al.render(r),
        };
        let a = self.reduce(left, JOIN_LIMIT).map_err(|_| err(left, right))?;
        let b = self.reduce(right, JOIN_LIMIT).map_err(|_| err(left, right))?;
        if a != b {
            return Err(err(&a, &b));
        }
        Ok(())
    }

    /// Irreducible words: the complement of `A*·{lhs}·A*`.
    pub fn irreducible_acceptor(&self) -> Fsa {
        let names = self.alphabet.names().to_vec();
        let any = Fsa::universal(names.clone());
        let lhs: Vec<Vec<usize>> = self.rules.iter().map(|(l, _)| AutostackableStructure::syms(l)).collect();
        let redex = Fsa::finite(names, &lhs);
        any.concat(&redex).concat(&any).complement().minimize()
    }

    /// φ on a non-tree edge: the shortest left side that is a suffix of
    /// `y·a` (declaration order breaks ties) gives `invert(s)·rhs` where
    /// `s·a = lhs`.
    pub fn phi_non_tree(&self, y: &[Letter], a: Letter) -> Result<Word> {
        let mut best: Option<&(Word, Word)> = None;
        for rule in &self.rules {
            let l = &rule.0;
            if l.last() != Some(&a) || l.len() > y.len() + 1 || !y.ends_with(&l[..l.len() - 1]) {
                continue;
            }
            if best.is_none_or(|b| l.len() < b.0.len()) {
                best = Some(rule);
            }
        }
        let (l, r) = best.ok_or_else(|| Error::NoApplicableRule {
            y: self.alphabet.render(y),
            a: self.alphabet.name(a).to_string(),
        })?;
        let mut out = self.alphabet.invert(&l[..l.len() - 1]);
        out.extend_from_slice(r);
        Ok(out)
    }
}

/// Checks local confluence and returns the induced structure.
pub fn from_rewriting_system(name: &str, rs: RewritingSystem) -> Result<AutostackableStructure> {
    rs.check_local_confluence()?;
    let nf = rs.irreducible_acceptor();
    let bound = rs.bound();
    let al = rs.alphabet.clone();
    AutostackableStructure::new(name, al, nf, StackingMap::RewritingDerived(Arc::new(rs)), bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn klein() -> RewritingSystem {
        let al = Alphabet::from_generators(&["a", "b"]);
        RewritingSystem::parse(
            al,
            &[("b a", "a^-1 b"), ("b a^-1", "a b"), ("b^-1 a", "a^-1 b^-1"), ("b^-1 a^-1", "a b^-1")],
        )
        .unwrap()
        .with_free_cancellation()
    }

    #[test]
    fn klein_phi() {
        let s = from_rewriting_system("klein", klein()).unwrap();
        let al = s.alphabet().clone();
        let a = al.letter("a").unwrap();
        assert_eq!(al.render(&s.phi_eval(&al.parse("b").unwrap(), a).unwrap()), "b^-1 a^-1 b");
        assert_eq!(s.bound(), 3);
        assert_eq!(al.render(&s.normal_form(&al.parse("b a b^-1 a").unwrap(), None).unwrap()), "ε");
    }

    #[test]
    fn z_rank_one_all_tree() {
        let al = Alphabet::from_generators(&["a"]);
        let rs = RewritingSystem::new(al.clone(), vec![]).unwrap().with_free_cancellation();
        let s = from_rewriting_system("Z", rs).unwrap();
        let a = al.letter("a").unwrap();
        for y in s.nf().enumerate_upto(4) {
            let y: Word = y.into_iter().map(|i| Letter(i as u32)).collect();
            for b in [a, al.inv(a)] {
                assert!(s.in_tree(&y, b).unwrap());
            }
        }
    }

    #[test]
    fn z2_z3_phi() {
        let al = Alphabet::from_generators(&["a", "b"]);
        let rs = RewritingSystem::parse(
            al.clone(),
            &[("a^-1", "a"), ("a a", ""), ("b b", "b^-1"), ("b^-1 b^-1", "b"), ("b b^-1", ""), ("b^-1 b", "")],
        )
        .unwrap();
        let s = from_rewriting_system("Z2*Z3", rs).unwrap();
        let b = al.letter("b").unwrap();
        assert_eq!(al.render(&s.phi_eval(&al.parse("b").unwrap(), b).unwrap()), "b^-1 b^-1");
    }

    #[test]
    fn non_confluent_rejected() {
        let al = Alphabet::from_generators(&["a", "b"]);
        let rs = RewritingSystem::parse(al, &[("a b", "b"), ("b a", "a")]).unwrap();
        assert!(matches!(rs.check_local_confluence(), Err(Error::NotLocallyConfluent { .. })));
    }
}
