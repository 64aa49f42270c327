//! Complete deterministic finite-state acceptors and the regular-language
//! closure operations, including synchronous padded multi-tape languages.
//!
//! Symbols are plain indices `0..k`; an [`Fsa`] also carries one display label
//! per symbol for JSON and DOT output. Every acceptor is kept complete, so a
//! rejected prefix ends in an explicit dead state.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complete deterministic acceptor over symbols `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsa {
    symbols: Vec<String>,
    n_states: usize,
    start: usize,
    accept: Vec<bool>,
    delta: Vec<u32>,
}

impl Fsa {
    /// Builds a complete acceptor from a partial transition list; missing
    /// transitions are routed to a fresh dead state.
    pub fn from_partial(
        symbols: Vec<String>,
        n_states: usize,
        start: usize,
        accept: &[usize],
        transitions: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let k = symbols.len();
        let dead = n_states;
        let total = n_states + 1;
        if start >= n_states.max(1) {
            return Err(Error::Input(format!("start state {start} out of range")));
        }
        let mut delta = vec![dead as u32; total * k];
        for &(s, a, t) in transitions {
            if s >= n_states || t >= n_states || a >= k {
                return Err(Error::Input(format!("transition ({s}, {a}, {t}) out of range")));
            }
            delta[s * k + a] = t as u32;
        }
        let mut acc = vec![false; total];
        for &p in accept {
            if p >= n_states {
                return Err(Error::Input(format!("accept state {p} out of range")));
            }
            acc[p] = true;
        }
        Ok(Fsa { symbols, n_states: total, start, accept: acc, delta })
    }

    /// Builds directly from a complete table `delta[state * k + symbol]`.
    pub fn from_table(symbols: Vec<String>, start: usize, accept: Vec<bool>, delta: Vec<u32>) -> Self {
        let n = accept.len();
        assert_eq!(delta.len(), n * symbols.len(), "table must be complete");
        Fsa { symbols, n_states: n, start, accept, delta }
    }

    /// Σ*.
    pub fn universal(symbols: Vec<String>) -> Self {
        let k = symbols.len();
        Fsa { symbols, n_states: 1, start: 0, accept: vec![true], delta: vec![0; k] }
    }

    /// ∅.
    pub fn empty_language(symbols: Vec<String>) -> Self {
        let k = symbols.len();
        Fsa { symbols, n_states: 1, start: 0, accept: vec![false], delta: vec![0; k] }
    }

    /// The finite language `words`.
    pub fn finite(symbols: Vec<String>, words: &[Vec<usize>]) -> Self {
        let k = symbols.len();
        // trie with state 0 as root and state 1 as dead
        let mut delta: Vec<u32> = vec![1; 2 * k];
        let mut accept = vec![false, false];
        for w in words {
            let mut q = 0usize;
            for &a in w {
                assert!(a < k, "symbol out of range");
                let t = delta[q * k + a] as usize;
                if t == 1 {
                    let fresh = accept.len();
                    accept.push(false);
                    delta.extend(std::iter::repeat_n(1, k));
                    delta[q * k + a] = fresh as u32;
                    q = fresh;
                } else {
                    q = t;
                }
            }
            accept[q] = true;
        }
        Fsa { symbols, n_states: accept.len(), start: 0, accept, delta }
    }

    /// S* for the symbol subset marked in `allowed`.
    pub fn subset_star(symbols: Vec<String>, allowed: &[bool]) -> Self {
        let k = symbols.len();
        let mut delta = vec![1u32; 2 * k];
        for a in 0..k {
            if allowed[a] {
                delta[a] = 0;
            }
        }
        Fsa { symbols, n_states: 2, start: 0, accept: vec![true, false], delta }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn num_states(&self) -> usize {
        self.n_states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accept[q]
    }

    pub fn accepting(&self) -> Vec<usize> {
        (0..self.n_states).filter(|&q| self.accept[q]).collect()
    }

    pub fn step(&self, q: usize, a: usize) -> usize {
        self.delta[q * self.symbols.len() + a] as usize
    }

    pub fn run_from(&self, q: usize, w: &[usize]) -> usize {
        w.iter().fold(q, |q, &a| self.step(q, a))
    }

    pub fn run(&self, w: &[usize]) -> usize {
        self.run_from(self.start, w)
    }

    /// Membership; panics on out-of-range symbols (see [`Fsa::accepts_checked`]).
    pub fn accepts(&self, w: &[usize]) -> bool {
        self.accept[self.run(w)]
    }

    pub fn accepts_checked(&self, w: &[usize]) -> Result<bool> {
        if let Some(&a) = w.iter().find(|&&a| a >= self.symbols.len()) {
            return Err(Error::UnknownLetter(format!("symbol #{a}")));
        }
        Ok(self.accepts(w))
    }

    /// Same transitions, different accepting set.
    pub fn with_accepting(&self, accept: Vec<bool>) -> Self {
        assert_eq!(accept.len(), self.n_states);
        Fsa { accept, ..self.clone() }
    }

    /// Same automaton with a different start state.
    pub fn with_start(&self, start: usize) -> Self {
        Fsa { start, ..self.clone() }
    }

    pub fn relabel(&self, symbols: Vec<String>) -> Self {
        assert_eq!(symbols.len(), self.symbols.len());
        Fsa { symbols, ..self.clone() }
    }

    fn check_same_alphabet(&self, other: &Fsa) {
        assert_eq!(self.symbols.len(), other.symbols.len(), "automata over different alphabets");
    }

    fn combine(&self, other: &Fsa, f: impl Fn(bool, bool) -> bool) -> Fsa {
        self.check_same_alphabet(other);
        let k = self.symbols.len();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut delta: Vec<u32> = Vec::new();
        let s0 = (self.start as u32, other.start as u32);
        ids.insert(s0, 0);
        pairs.push(s0);
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for a in 0..k {
                let t = (self.step(p as usize, a) as u32, other.step(q as usize, a) as u32);
                let id = *ids.entry(t).or_insert_with(|| {
                    pairs.push(t);
                    (pairs.len() - 1) as u32
                });
                delta.push(id);
            }
            i += 1;
        }
        let accept = pairs.iter().map(|&(p, q)| f(self.accept[p as usize], other.accept[q as usize])).collect();
        Fsa::from_table(self.symbols.clone(), 0, accept, delta)
    }

    pub fn union(&self, other: &Fsa) -> Fsa {
        self.combine(other, |x, y| x || y)
    }

    pub fn intersection(&self, other: &Fsa) -> Fsa {
        self.combine(other, |x, y| x && y)
    }

    pub fn difference(&self, other: &Fsa) -> Fsa {
        self.combine(other, |x, y| x && !y)
    }

    pub fn symmetric_difference(&self, other: &Fsa) -> Fsa {
        self.combine(other, |x, y| x != y)
    }

    pub fn complement(&self) -> Fsa {
        let accept = self.accept.iter().map(|&x| !x).collect();
        self.with_accepting(accept)
    }

    /// L(self)·L(other).
    pub fn concat(&self, other: &Fsa) -> Fsa {
        self.check_same_alphabet(other);
        let mut n = Nfa::from_fsa(self);
        let off = n.add_fsa(other);
        for q in 0..self.n_states {
            if self.accept[q] {
                n.eps[q].push(off + other.start);
                n.accept[q] = false;
            }
        }
        n.determinize().relabel(self.symbols.clone())
    }

    /// L(self)*.
    pub fn star(&self) -> Fsa {
        let mut n = Nfa::new(self.symbols.len(), 0);
        let s = n.add_state(true);
        let off = n.add_fsa(self);
        n.start = vec![s];
        n.eps[s].push(off + self.start);
        for q in 0..self.n_states {
            if self.accept[q] {
                n.eps[off + q].push(s);
            }
        }
        n.determinize().relabel(self.symbols.clone())
    }

    /// `{ w : w·x ∈ L }`, by re-targeting the accepting set.
    pub fn quotient_by_word(&self, x: &[usize]) -> Fsa {
        let accept = (0..self.n_states).map(|q| self.accept[self.run_from(q, x)]).collect();
        self.with_accepting(accept)
    }

    /// φ(L) for the monoid homomorphism sending symbol `a` to `images[a]`
    /// over `target` symbols.
    pub fn hom_image(&self, images: &[Vec<usize>], target: Vec<String>) -> Fsa {
        assert_eq!(images.len(), self.symbols.len());
        let mut n = Nfa::new(target.len(), self.n_states);
        n.start = vec![self.start];
        for q in 0..self.n_states {
            n.accept[q] = self.accept[q];
        }
        for q in 0..self.n_states {
            for (a, img) in images.iter().enumerate() {
                let t = self.step(q, a);
                if img.is_empty() {
                    n.eps[q].push(t);
                    continue;
                }
                let mut cur = q;
                for (i, &b) in img.iter().enumerate() {
                    let nxt = if i + 1 == img.len() { t } else { n.add_state(false) };
                    n.trans[cur].push((b, nxt));
                    cur = nxt;
                }
            }
        }
        n.determinize().relabel(target)
    }

    /// φ⁻¹(L) over `source` symbols, where this automaton reads the target.
    pub fn hom_preimage(&self, images: &[Vec<usize>], source: Vec<String>) -> Fsa {
        assert_eq!(images.len(), source.len());
        let k = source.len();
        let mut delta = Vec::with_capacity(self.n_states * k);
        for q in 0..self.n_states {
            for img in images {
                delta.push(self.run_from(q, img) as u32);
            }
        }
        Fsa::from_table(source, self.start, self.accept.clone(), delta)
    }

    /// Re-reads this automaton over a larger alphabet: symbol `a` here is
    /// `map[a]` there, and target symbols outside the image lead to rejection.
    pub fn embed(&self, map: &[usize], target: Vec<String>) -> Fsa {
        assert_eq!(map.len(), self.symbols.len());
        let k = target.len();
        let dead = self.n_states;
        let mut delta = vec![dead as u32; (self.n_states + 1) * k];
        for q in 0..self.n_states {
            for (a, &b) in map.iter().enumerate() {
                delta[q * k + b] = self.step(q, a) as u32;
            }
        }
        let mut accept = self.accept.clone();
        accept.push(false);
        Fsa::from_table(target, self.start, accept, delta)
    }

    /// States reachable from the start state.
    pub fn reachable(&self) -> Vec<bool> {
        let k = self.symbols.len();
        let mut seen = vec![false; self.n_states];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(q) = stack.pop() {
            for a in 0..k {
                let t = self.step(q, a);
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Shortest distance from each state to an accepting state (`usize::MAX` if none).
    pub fn distance_to_accept(&self) -> Vec<usize> {
        let k = self.symbols.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); self.n_states];
        for q in 0..self.n_states {
            for a in 0..k {
                rev[self.step(q, a)].push(q);
            }
        }
        let mut dist = vec![usize::MAX; self.n_states];
        let mut queue = VecDeque::new();
        for q in 0..self.n_states {
            if self.accept[q] {
                dist[q] = 0;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q] {
                if dist[p] == usize::MAX {
                    dist[p] = dist[q] + 1;
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// States from which some accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        self.distance_to_accept().into_iter().map(|d| d != usize::MAX).collect()
    }

    /// Minimal complete deterministic acceptor of the same language.
    pub fn minimize(&self) -> Fsa {
        let k = self.symbols.len();
        let reach = self.reachable();
        let states: Vec<usize> = (0..self.n_states).filter(|&q| reach[q]).collect();
        let mut class = vec![0u32; self.n_states];
        for &q in &states {
            class[q] = self.accept[q] as u32;
        }
        let mut count = {
            let mut c: Vec<u32> = states.iter().map(|&q| class[q]).collect();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        loop {
            let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next = vec![0u32; self.n_states];
            for &q in &states {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                for a in 0..k {
                    sig.push(class[self.step(q, a)]);
                }
                let fresh = ids.len() as u32;
                next[q] = *ids.entry(sig).or_insert(fresh);
            }
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // renumber in BFS order from the start so equal languages give equal tables
        let mut order: HashMap<u32, u32> = HashMap::new();
        let mut reps: Vec<usize> = Vec::new();
        order.insert(class[self.start], 0);
        reps.push(self.start);
        let mut i = 0;
        let mut delta = Vec::with_capacity(count * k);
        while i < reps.len() {
            let q = reps[i];
            for a in 0..k {
                let t = self.step(q, a);
                let c = class[t];
                let id = *order.entry(c).or_insert_with(|| {
                    reps.push(t);
                    (reps.len() - 1) as u32
                });
                delta.push(id);
            }
            i += 1;
        }
        let accept = reps.iter().map(|&q| self.accept[q]).collect();
        Fsa::from_table(self.symbols.clone(), 0, accept, delta)
    }

    pub fn is_empty(&self) -> bool {
        let reach = self.reachable();
        !(0..self.n_states).any(|q| reach[q] && self.accept[q])
    }

    pub fn equivalent(&self, other: &Fsa) -> bool {
        self.symmetric_difference(other).is_empty()
    }

    /// A shortest accepted word, shortlex-least among shortest.
    pub fn shortest_word(&self) -> Option<Vec<usize>> {
        let dist = self.distance_to_accept();
        if dist[self.start] == usize::MAX {
            return None;
        }
        let mut q = self.start;
        let mut w = Vec::new();
        while dist[q] > 0 {
            let a = (0..self.symbols.len()).find(|&a| dist[self.step(q, a)] + 1 == dist[q]).expect("distance");
            w.push(a);
            q = self.step(q, a);
        }
        Some(w)
    }

    /// All accepted words of length ≤ n in shortlex order.
    pub fn enumerate_upto(&self, n: usize) -> Vec<Vec<usize>> {
        let dist = self.distance_to_accept();
        let mut out = Vec::new();
        for len in 0..=n {
            let mut w = Vec::with_capacity(len);
            self.enum_rec(self.start, len, &dist, &mut w, &mut out);
        }
        out
    }

    fn enum_rec(&self, q: usize, left: usize, dist: &[usize], w: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dist[q] > left {
            return;
        }
        if left == 0 {
            if self.accept[q] {
                out.push(w.clone());
            }
            return;
        }
        for a in 0..self.symbols.len() {
            w.push(a);
            self.enum_rec(self.step(q, a), left - 1, dist, w, out);
            w.pop();
        }
    }

    /// Number of accepted words of each length up to n.
    pub fn count_upto(&self, n: usize) -> Vec<u128> {
        let mut cur = vec![0u128; self.n_states];
        cur[self.start] = 1;
        let mut out = Vec::with_capacity(n + 1);
        for len in 0..=n {
            out.push((0..self.n_states).filter(|&q| self.accept[q]).map(|q| cur[q]).sum());
            if len == n {
                break;
            }
            let mut nxt = vec![0u128; self.n_states];
            for q in 0..self.n_states {
                if cur[q] == 0 {
                    continue;
                }
                for a in 0..self.symbols.len() {
                    let t = self.step(q, a);
                    nxt[t] = nxt[t].saturating_add(cur[q]);
                }
            }
            cur = nxt;
        }
        out
    }

    /// True iff every prefix of every accepted word is accepted: every
    /// reachable state that can still reach acceptance is accepting.
    pub fn is_prefix_closed(&self) -> bool {
        let reach = self.reachable();
        let co = self.coreachable();
        (0..self.n_states).all(|q| !(reach[q] && co[q]) || self.accept[q])
    }

    /// Numbering used by [`Fsa::to_json`]: live states (and the start state)
    /// get consecutive ids, every other state maps to `usize::MAX`.
    pub fn json_state_ids(&self) -> Vec<usize> {
        let reach = self.reachable();
        let co = self.coreachable();
        let mut id = vec![usize::MAX; self.n_states];
        let mut next = 0;
        for q in 0..self.n_states {
            if q == self.start || (reach[q] && co[q]) {
                id[q] = next;
                next += 1;
            }
        }
        id
    }

    /// JSON interchange form; only live states are listed, everything else is
    /// the implicit dead state.
    pub fn to_json(&self) -> FsaJson {
        let co = self.coreachable();
        let id = self.json_state_ids();
        let live: Vec<usize> = (0..self.n_states).filter(|&q| id[q] != usize::MAX).collect();
        let mut transitions = Vec::new();
        for &q in &live {
            for a in 0..self.symbols.len() {
                let t = self.step(q, a);
                if id[t] != usize::MAX && co[t] {
                    transitions.push((id[q], self.symbols[a].clone(), id[t]));
                }
            }
        }
        FsaJson {
            alphabet: self.symbols.clone(),
            states: live.len(),
            start: id[self.start],
            accept: live.iter().enumerate().filter(|(_, &q)| self.accept[q]).map(|(i, _)| i).collect(),
            transitions,
        }
    }

    pub fn from_json(j: &FsaJson) -> Result<Fsa> {
        let idx: HashMap<&str, usize> = j.alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut trans = Vec::with_capacity(j.transitions.len());
        for (s, a, t) in &j.transitions {
            let ai = *idx.get(a.as_str()).ok_or_else(|| Error::UnknownLetter(a.clone()))?;
            trans.push((*s, ai, *t));
        }
        Fsa::from_partial(j.alphabet.clone(), j.states.max(1), j.start, &j.accept, &trans)
    }

    /// Graphviz rendering of the live part.
    pub fn to_dot(&self, name: &str) -> String {
        let j = self.to_json();
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(s, "  rankdir=LR;");
        let _ = writeln!(s, "  init [shape=point];");
        for q in 0..j.states {
            let shape = if j.accept.contains(&q) { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  {q} [shape={shape}];");
        }
        let _ = writeln!(s, "  init -> {};", j.start);
        let mut grouped: HashMap<(usize, usize), Vec<String>> = HashMap::new();
        for (p, a, q) in &j.transitions {
            grouped.entry((*p, *q)).or_default().push(a.clone());
        }
        let mut keys: Vec<_> = grouped.keys().copied().collect();
        keys.sort_unstable();
        for (p, q) in keys {
            let label = grouped[&(p, q)].join(", ").replace('"', "'");
            let _ = writeln!(s, "  {p} -> {q} [label=\"{label}\"];");
        }
        s.push_str("}\n");
        s
    }
}

/// `{ "alphabet", "states", "start", "accept", "transitions" }`; transitions
/// not listed go to an implicit dead state.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FsaJson {
    pub alphabet: Vec<String>,
    pub states: usize,
    pub start: usize,
    pub accept: Vec<usize>,
    pub transitions: Vec<(usize, String, usize)>,
}

impl Serialize for Fsa {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fsa {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FsaJson::deserialize(d)?;
        Fsa::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Nondeterministic automaton with ε-moves, used only as an intermediate for
/// concatenation, star and homomorphic images.
struct Nfa {
    k: usize,
    start: Vec<usize>,
    accept: Vec<bool>,
    trans: Vec<Vec<(usize, usize)>>,
    eps: Vec<Vec<usize>>,
}

impl Nfa {
    fn new(k: usize, n: usize) -> Self {
        Nfa { k, start: Vec::new(), accept: vec![false; n], trans: vec![Vec::new(); n], eps: vec![Vec::new(); n] }
    }

    fn add_state(&mut self, accept: bool) -> usize {
        self.accept.push(accept);
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.accept.len() - 1
    }

    fn from_fsa(m: &Fsa) -> Self {
        let mut n = Nfa::new(m.symbols.len(), 0);
        let off = n.add_fsa(m);
        n.start = vec![off + m.start];
        n
    }

    fn add_fsa(&mut self, m: &Fsa) -> usize {
        let off = self.accept.len();
        for q in 0..m.n_states {
            self.add_state(m.accept[q]);
        }
        for q in 0..m.n_states {
            for a in 0..m.symbols.len() {
                self.trans[off + q].push((a, off + m.step(q, a)));
            }
        }
        off
    }

    fn closure(&self, set: &mut Vec<usize>) {
        let mut seen: Vec<bool> = vec![false; self.accept.len()];
        for &q in set.iter() {
            seen[q] = true;
        }
        let mut stack = set.clone();
        while let Some(q) = stack.pop() {
            for &t in &self.eps[q] {
                if !seen[t] {
                    seen[t] = true;
                    set.push(t);
                    stack.push(t);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }

    fn determinize(&self) -> Fsa {
        let k = self.k;
        let mut ids: HashMap<Vec<usize>, u32> = HashMap::new();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let mut delta: Vec<u32> = Vec::new();
        let mut s0 = self.start.clone();
        self.closure(&mut s0);
        ids.insert(s0.clone(), 0);
        sets.push(s0);
        let mut i = 0;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
        while i < sets.len() {
            for b in buckets.iter_mut() {
                b.clear();
            }
            for &q in &sets[i] {
                for &(a, t) in &self.trans[q] {
                    buckets[a].push(t);
                }
            }
            for b in buckets.iter_mut() {
                let mut t = std::mem::take(b);
                self.closure(&mut t);
                let id = match ids.get(&t) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        ids.insert(t.clone(), id);
                        sets.push(t.clone());
                        id
                    }
                };
                delta.push(id);
                *b = t;
            }
            i += 1;
        }
        let accept = sets.iter().map(|s| s.iter().any(|&q| self.accept[q])).collect();
        Fsa::from_table(vec![String::new(); k], 0, accept, delta)
    }
}

// Padded tuple alphabets.

/// Tuple alphabet `(A₁ ∪ $) × … × (Aₙ ∪ $)` minus the all-`$` tuple. Tuple
/// symbols are ordered lexicographically by component with `$` last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedAlphabet {
    sizes: Vec<usize>,
}

impl PaddedAlphabet {
    pub fn new(sizes: Vec<usize>) -> Self {
        assert!(!sizes.is_empty());
        PaddedAlphabet { sizes }
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of tuple symbols.
    pub fn len(&self) -> usize {
        self.sizes.iter().map(|k| k + 1).product::<usize>() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `None` stands for the padding symbol.
    pub fn encode(&self, comps: &[Option<usize>]) -> usize {
        assert_eq!(comps.len(), self.sizes.len());
        assert!(comps.iter().any(Option::is_some), "the all-padding tuple is not a symbol");
        let mut idx = 0;
        for (c, &k) in comps.iter().zip(&self.sizes) {
            idx = idx * (k + 1) + c.unwrap_or(k);
        }
        idx
    }

    pub fn decode(&self, mut sym: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; self.sizes.len()];
        for i in (0..self.sizes.len()).rev() {
            let k = self.sizes[i];
            let c = sym % (k + 1);
            sym /= k + 1;
            out[i] = if c == k { None } else { Some(c) };
        }
        out
    }

    /// Convolution of a word tuple into a padded word.
    pub fn pad(&self, words: &[&[usize]]) -> Vec<usize> {
        assert_eq!(words.len(), self.sizes.len());
        let n = words.iter().map(|w| w.len()).max().unwrap_or(0);
        (0..n).map(|i| self.encode(&words.iter().map(|w| w.get(i).copied()).collect::<Vec<_>>())).collect()
    }

    /// Inverse of [`PaddedAlphabet::pad`]; fails if a component resumes after `$`.
    pub fn unpad(&self, w: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        let mut done = vec![false; self.sizes.len()];
        for &s in w {
            for (i, c) in self.decode(s).into_iter().enumerate() {
                match c {
                    Some(a) if done[i] => {
                        let _ = a;
                        return Err(Error::MalformedPadding { component: i });
                    }
                    Some(a) => out[i].push(a),
                    None => done[i] = true,
                }
            }
        }
        Ok(out)
    }

    /// Display labels such as `(a,$,b)`.
    pub fn symbol_names(&self, names: &[&[String]]) -> Vec<String> {
        (0..self.len())
            .map(|s| {
                let parts: Vec<&str> = self
                    .decode(s)
                    .iter()
                    .enumerate()
                    .map(|(i, c)| match c {
                        Some(a) => names[i][*a].as_str(),
                        None => "$",
                    })
                    .collect();
                format!("({})", parts.join(","))
            })
            .collect()
    }

    fn anon_names(&self) -> Vec<String> {
        (0..self.len()).map(|s| format!("t{s}")).collect()
    }
}

const PAD: u32 = u32::MAX;

/// Synchronous product: accepts exactly the padded words of tuples
/// `(w₁, …, wₙ)` with `wᵢ ∈ L(mᵢ)`.
pub fn product(ms: &[&Fsa]) -> (PaddedAlphabet, Fsa) {
    let pa = PaddedAlphabet::new(ms.iter().map(|m| m.num_symbols()).collect());
    let names: Vec<&[String]> = ms.iter().map(|m| m.symbols()).collect();
    let symbols = pa.symbol_names(&names);
    let live: Vec<Vec<bool>> = ms.iter().map(|m| m.coreachable()).collect();
    let k = pa.len();
    let decoded: Vec<Vec<Option<usize>>> = (0..k).map(|s| pa.decode(s)).collect();
    // state 0 is the global dead state
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut states: Vec<Vec<u32>> = vec![Vec::new()];
    let mut delta: Vec<u32> = vec![0; k];
    let start: Vec<u32> = ms.iter().map(|m| m.start() as u32).collect();
    let start_live = start.iter().enumerate().all(|(i, &q)| live[i][q as usize]);
    let start_id = if start_live {
        ids.insert(start.clone(), 1);
        states.push(start);
        1
    } else {
        0
    };
    let mut i = 1;
    while i < states.len() {
        let cur = states[i].clone();
        for comps in decoded.iter() {
            let mut nxt = Vec::with_capacity(cur.len());
            let mut dead = false;
            for (j, c) in comps.iter().enumerate() {
                let q = cur[j];
                let t = match (q == PAD, c) {
                    (true, None) => PAD,
                    (true, Some(_)) => {
                        dead = true;
                        break;
                    }
                    (false, None) => {
                        if ms[j].is_accepting(q as usize) {
                            PAD
                        } else {
                            dead = true;
                            break;
                        }
                    }
                    (false, Some(a)) => {
                        let t = ms[j].step(q as usize, *a);
                        if !live[j][t] {
                            dead = true;
                            break;
                        }
                        t as u32
                    }
                };
                nxt.push(t);
            }
            let id = if dead {
                0
            } else {
                *ids.entry(nxt.clone()).or_insert_with(|| {
                    states.push(nxt);
                    (states.len() - 1) as u32
                })
            };
            delta.push(id);
        }
        i += 1;
    }
    let accept = states
        .iter()
        .enumerate()
        .map(|(i, st)| i != 0 && st.iter().enumerate().all(|(j, &q)| q == PAD || ms[j].is_accepting(q as usize)))
        .collect();
    let m = Fsa::from_table(symbols, start_id, accept, delta);
    (pa, m)
}

/// `p_i(L)`: the i-th components (padding removed) of accepted padded words.
pub fn projection(m: &Fsa, pa: &PaddedAlphabet, i: usize, target: Vec<String>) -> Fsa {
    assert_eq!(m.num_symbols(), pa.len());
    assert_eq!(target.len(), pa.sizes()[i]);
    let images: Vec<Vec<usize>> = (0..pa.len()).map(|s| pa.decode(s)[i].into_iter().collect()).collect();
    m.hom_image(&images, target)
}

/// Padded words that are well formed (no component resumes after `$`).
pub fn padded_universe(pa: &PaddedAlphabet) -> Fsa {
    let ms: Vec<Fsa> = pa.sizes().iter().map(|&k| Fsa::universal(vec![String::new(); k])).collect();
    let refs: Vec<&Fsa> = ms.iter().collect();
    let (_, m) = product(&refs);
    m.relabel(pa.anon_names())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    }

    fn a_star() -> Fsa {
        Fsa::subset_star(syms(2), &[true, false])
    }

    #[test]
    fn accepts_examples() {
        let m = a_star();
        assert!(m.accepts(&[0, 0]));
        assert!(!m.accepts(&[1]));
        assert!(m.accepts(&[]));
        assert!(matches!(m.accepts_checked(&[5]), Err(Error::UnknownLetter(_))));
    }

    #[test]
    fn boolean_examples() {
        let all = Fsa::universal(syms(2));
        assert!(a_star().intersection(&all).equivalent(&a_star()));
        assert!(a_star().complement().complement().equivalent(&a_star()));
        assert!(a_star().difference(&a_star()).is_empty());
        assert!(all.complement().is_empty());
    }

    #[test]
    fn concat_star_examples() {
        let a = Fsa::finite(syms(2), &[vec![0]]);
        let b = Fsa::finite(syms(2), &[vec![1]]);
        assert!(a.concat(&b).equivalent(&Fsa::finite(syms(2), &[vec![0, 1]])));
        let eps = Fsa::finite(syms(2), &[vec![]]);
        assert!(eps.star().equivalent(&eps));
        assert!(a.star().equivalent(&a_star()));
    }

    #[test]
    fn quotient_examples() {
        let ab = Fsa::finite(syms(2), &[vec![0, 1]]);
        assert!(ab.quotient_by_word(&[1]).equivalent(&Fsa::finite(syms(2), &[vec![0]])));
        assert!(a_star().quotient_by_word(&[0]).equivalent(&a_star()));
        let eps = Fsa::finite(syms(2), &[vec![]]);
        assert!(eps.quotient_by_word(&[0]).is_empty());
    }

    #[test]
    fn hom_examples() {
        // symbols a, e, b; deflation erases e
        let src = Fsa::finite(syms(3), &[vec![0, 1, 2]]);
        let defl = vec![vec![0], vec![], vec![1]];
        let img = src.hom_image(&defl, syms(2));
        assert!(img.equivalent(&Fsa::finite(syms(2), &[vec![0, 1]])));
        let pre = a_star().hom_preimage(&[vec![0], vec![]], syms(2));
        assert!(pre.accepts(&[0, 1, 1, 0]));
        assert!(pre.equivalent(&Fsa::universal(syms(2))));
        assert!(Fsa::empty_language(syms(3)).hom_image(&defl, syms(2)).is_empty());
    }

    #[test]
    fn padded_examples() {
        let pa = PaddedAlphabet::new(vec![2, 2]);
        let w = pa.pad(&[&[0, 1], &[1]]);
        assert_eq!(pa.decode(w[0]), vec![Some(0), Some(1)]);
        assert_eq!(pa.decode(w[1]), vec![Some(1), None]);
        assert_eq!(pa.unpad(&w).unwrap(), vec![vec![0, 1], vec![1]]);
        let bad = vec![pa.encode(&[None, Some(0)]), pa.encode(&[Some(0), Some(0)])];
        assert!(matches!(pa.unpad(&bad), Err(Error::MalformedPadding { component: 0 })));
        assert_eq!(pa.len(), 8);
    }

    #[test]
    fn product_projection_examples() {
        let l1 = Fsa::finite(syms(2), &[vec![0, 1]]);
        let l2 = Fsa::finite(syms(2), &[vec![1]]);
        let (pa, m) = product(&[&l1, &l2]);
        assert!(m.accepts(&pa.pad(&[&[0, 1], &[1]])));
        assert!(!m.accepts(&pa.pad(&[&[0, 1], &[0]])));
        assert!(projection(&m, &pa, 0, syms(2)).equivalent(&l1));
        let eps = Fsa::finite(syms(2), &[vec![]]);
        let a = Fsa::finite(syms(2), &[vec![0]]);
        let (pa, m) = product(&[&eps, &a]);
        assert!(m.accepts(&[pa.encode(&[None, Some(0)])]));
        assert_eq!(m.enumerate_upto(3).len(), 1);
    }

    #[test]
    fn minimize_enumerate_prefix_closed() {
        let m = a_star().union(&Fsa::finite(syms(2), &[vec![0, 0]]));
        assert!(m.minimize().equivalent(&m));
        assert_eq!(m.minimize().num_states(), 2);
        assert_eq!(a_star().enumerate_upto(2), vec![vec![], vec![0], vec![0, 0]]);
        assert!(a_star().is_prefix_closed());
        assert!(!Fsa::finite(syms(2), &[vec![0, 1]]).is_prefix_closed());
        assert!(Fsa::finite(syms(2), &[vec![], vec![0], vec![0, 1]]).is_prefix_closed());
    }

    #[test]
    fn json_round_trip_and_dot() {
        let m = Fsa::finite(syms(2), &[vec![], vec![0], vec![0, 1]]);
        let s = serde_json::to_string(&m).unwrap();
        let back: Fsa = serde_json::from_str(&s).unwrap();
        assert!(back.equivalent(&m));
        assert!(m.to_dot("m").contains("doublecircle"));
        let j: FsaJson = serde_json::from_str(
            r#"{"alphabet":["a"],"states":1,"start":0,"accept":[0],"transitions":[[0,"a",0]]}"#,
        )
        .unwrap();
        assert!(Fsa::from_json(&j).unwrap().equivalent(&Fsa::universal(vec!["a".into()])));
    }

    #[test]
    fn padded_universe_rejects_resumption() {
        let pa = PaddedAlphabet::new(vec![1, 1]);
        let u = padded_universe(&pa);
        assert!(u.accepts(&pa.pad(&[&[0, 0], &[0]])));
        let bad = vec![pa.encode(&[Some(0), None]), pa.encode(&[Some(0), Some(0)])];
        assert!(!u.accepts(&bad));
    }
}
