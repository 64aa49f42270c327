//! Bounded checks of the flow axioms, normal-form uniqueness and the
//! respecting-subgroup conditions on a Cayley ball, plus the coset
//! fellow-traveler property of coset data.
//!
//! Normal forms of ball elements are found by walking the normal-form tree
//! breadth first, so the checks do not depend on the stacking map they test.
//! The solver is only used as a fallback for elements the walk misses.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::constructions::coset::CosetAutomaticData;
use crate::error::Result;
use crate::oracles::{ball_enumerate, Ball, ElementOracle, Key, BALL_LIMIT};
use crate::stacking::{AutostackableStructure, RespectingStructure};
use crate::words::{Alphabet, Letter, Word};

/// Maximum number of stored counterexamples per check.
pub const MAX_EXAMPLES: usize = 20;

/// Nodes visited while searching the normal-form tree for ball elements.
pub const NF_SEARCH_LIMIT: usize = 400_000;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub counterexamples: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        CheckReport { check: check.to_string(), passed: true, counterexamples: Vec::new(), notes: Vec::new() }
    }

    fn fail(&mut self, ex: String) {
        self.passed = false;
        self.counterexamples.push(ex);
    }

    fn finish(mut self) -> Self {
        let total = self.counterexamples.len();
        self.counterexamples.sort();
        self.counterexamples.dedup();
        if self.counterexamples.len() > MAX_EXAMPLES {
            self.counterexamples.truncate(MAX_EXAMPLES);
            self.notes.push(format!("{total} counterexamples, first {MAX_EXAMPLES} shown"));
        }
        self
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct VerificationReport {
    pub structure: String,
    pub radius: usize,
    pub checks: Vec<CheckReport>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("structure {} (radius {})\n", self.structure, self.radius);
        for c in &self.checks {
            out.push_str(&format!("  {:<14} {}\n", c.check, if c.passed { "pass" } else { "FAIL" }));
            for n in &c.notes {
                out.push_str(&format!("      note: {n}\n"));
            }
            for e in &c.counterexamples {
                out.push_str(&format!("      counterexample: {e}\n"));
            }
        }
        out
    }
}

/// Ball of radius `r` with the normal form of every element.
pub struct BallContext<'a> {
    pub s: &'a AutostackableStructure,
    pub o: &'a ElementOracle,
    pub ball: Ball,
    pub nf: Vec<Option<Word>>,
    pub problems: Vec<String>,
    phi_cache: HashMap<(usize, Letter), std::result::Result<Word, String>>,
}

impl<'a> BallContext<'a> {
    pub fn new(s: &'a AutostackableStructure, o: &'a ElementOracle, r: usize) -> Result<Self> {
        let ball = ball_enumerate(o, r, BALL_LIMIT)?;
        let mut nf: Vec<Option<Word>> = vec![None; ball.len()];
        let mut found = 0;
        // breadth-first walk of the normal-form tree
        let m = s.nf();
        let mut queue: VecDeque<(usize, Key, Word)> = VecDeque::new();
        if m.is_accepting(m.start()) {
            queue.push_back((m.start(), o.identity(), Vec::new()));
        }
        let mut visited = 0;
        while let Some((q, g, w)) = queue.pop_front() {
            if found == ball.len() || visited >= NF_SEARCH_LIMIT {
                break;
            }
            visited += 1;
            if let Some(&i) = ball.index.get(&g) {
                if nf[i].is_none() {
                    nf[i] = Some(w.clone());
                    found += 1;
                }
            }
            for a in s.alphabet().letters() {
                let t = m.step(q, a.idx());
                if m.is_accepting(t) {
                    let mut w2 = w.clone();
                    w2.push(a);
                    queue.push_back((t, o.multiply(&g, a), w2));
                }
            }
        }
        let mut problems = Vec::new();
        for (i, slot) in nf.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let (g, wit) = &ball.elements[i];
            match s.normal_form(wit, None) {
                Ok(y) if s.is_normal_form(&y) && o.eval(&y) == *g => *slot = Some(y),
                Ok(y) => problems.push(format!(
                    "solver returned `{}` for `{}`, which is not its normal form",
                    s.alphabet().render(&y),
                    s.alphabet().render(wit)
                )),
                Err(e) => problems.push(format!("no normal form for `{}`: {e}", s.alphabet().render(wit))),
            }
        }
        Ok(BallContext { s, o, ball, nf, problems, phi_cache: HashMap::new() })
    }

    fn al(&self) -> &Alphabet {
        self.s.alphabet()
    }

    fn phi(&mut self, i: usize, a: Letter) -> std::result::Result<Word, String> {
        if let Some(v) = self.phi_cache.get(&(i, a)) {
            return v.clone();
        }
        let v = match &self.nf[i] {
            Some(y) => self.s.phi_eval(y, a).map_err(|e| e.to_string()),
            None => Err("normal form unknown".to_string()),
        };
        self.phi_cache.insert((i, a), v.clone());
        v
    }

    fn edge(&self, i: usize, a: Letter) -> String {
        let y = self.nf[i].as_deref().unwrap_or(&[]);
        format!("({}, {})", self.al().render(y), self.al().name(a))
    }

    fn note_problems(&self, rep: &mut CheckReport) {
        for p in &self.problems {
            rep.fail(p.clone());
        }
    }

    /// (F1): bounded paths with the right endpoints.
    pub fn check_f1(&mut self) -> CheckReport {
        let mut rep = CheckReport::new("f1");
        self.note_problems(&mut rep);
        let k = self.s.bound();
        let letters: Vec<Letter> = self.al().letters().collect();
        for i in 0..self.ball.len() {
            if self.nf[i].is_none() {
                continue;
            }
            for &a in &letters {
                match self.phi(i, a) {
                    Err(e) => rep.fail(format!("{}: {e}", self.edge(i, a))),
                    Ok(u) => {
                        let g = &self.ball.elements[i].0;
                        if u.len() > k {
                            rep.fail(format!("{} -> {}: length {} > K = {k}", self.edge(i, a), self.al().render(&u), u.len()));
                        } else if self.o.eval_from(g, &u) != self.o.multiply(g, a) {
                            rep.fail(format!("{} -> {}: wrong endpoint", self.edge(i, a), self.al().render(&u)));
                        }
                    }
                }
            }
        }
        rep.notes.push(format!("{} vertices, {} edges", self.ball.len(), self.ball.len() * letters.len()));
        rep.finish()
    }

    /// (F2): tree edges are fixed.
    pub fn check_f2(&mut self) -> CheckReport {
        let mut rep = CheckReport::new("f2");
        let letters: Vec<Letter> = self.al().letters().collect();
        let mut tree = 0;
        for i in 0..self.ball.len() {
            let Some(y) = self.nf[i].clone() else { continue };
            for &a in &letters {
                if !self.s.in_tree_unchecked(&y, a) {
                    continue;
                }
                tree += 1;
                match self.phi(i, a) {
                    Ok(u) if u == [a] => {}
                    Ok(u) => rep.fail(format!("tree edge {} -> {}", self.edge(i, a), self.al().render(&u))),
                    Err(e) => rep.fail(format!("tree edge {}: {e}", self.edge(i, a))),
                }
            }
        }
        rep.notes.push(format!("{tree} tree edges"));
        rep.finish()
    }

    /// (F3) on the ball: the relation "e′ is a non-tree edge on Φ(e)" has
    /// no cycle. Successor edges starting outside the ball are counted.
    pub fn check_f3_acyclic(&mut self) -> CheckReport {
        let mut rep = CheckReport::new("f3");
        let letters: Vec<Letter> = self.al().letters().collect();
        let k = letters.len();
        let n = self.ball.len();
        let node = |i: usize, a: Letter| i * k + a.idx();
        let mut non_tree = vec![false; n * k];
        for i in 0..n {
            if let Some(y) = &self.nf[i] {
                for &a in &letters {
                    non_tree[node(i, a)] = !self.s.in_tree_unchecked(y, a);
                }
            }
        }
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n * k];
        let mut escaping = 0usize;
        for i in 0..n {
            for &a in &letters {
                if !non_tree[node(i, a)] {
                    continue;
                }
                let Ok(u) = self.phi(i, a) else { continue };
                let mut g = self.ball.elements[i].0.clone();
                for &b in &u {
                    match self.ball.index.get(&g) {
                        Some(&j) if self.nf[j].is_some() => {
                            if non_tree[node(j, b)] {
                                succ[node(i, a)].push(node(j, b));
                            }
                        }
                        _ => escaping += 1,
                    }
                    g = self.o.multiply(&g, b);
                }
            }
        }
        // Kahn's algorithm
        let mut indeg = vec![0usize; n * k];
        for s in &succ {
            for &t in s {
                indeg[t] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n * k).filter(|&v| non_tree[v] && indeg[v] == 0).collect();
        let mut removed = vec![false; n * k];
        while let Some(v) = stack.pop() {
            removed[v] = true;
            for &t in &succ[v] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    stack.push(t);
                }
            }
        }
        let remaining: Vec<usize> = (0..n * k).filter(|&v| non_tree[v] && !removed[v]).collect();
        if let Some(&start) = remaining.first() {
            // walk inside the remaining subgraph until a node repeats
            let mut seen: HashMap<usize, usize> = HashMap::new();
            let mut path = vec![start];
            let mut v = start;
            loop {
                seen.insert(v, path.len() - 1);
                v = *succ[v].iter().find(|&&t| !removed[t]).expect("cyclic core has successors");
                if let Some(&p) = seen.get(&v) {
                    let cyc: Vec<String> =
                        path[p..].iter().map(|&x| self.edge(x / k, Letter((x % k) as u32))).collect();
                    rep.fail(format!("flow cycle {}", cyc.join(" -> ")));
                    break;
                }
                path.push(v);
            }
            rep.notes.push(format!("{} non-tree edges lie on cycles", remaining.len()));
        }
        let total = non_tree.iter().filter(|&&b| b).count();
        rep.notes.push(format!("{total} non-tree edges, {escaping} flow successors leave the ball"));
        rep.finish()
    }

    /// Soundness of the solver on ball witnesses.
    pub fn check_solver(&mut self) -> CheckReport {
        let mut rep = CheckReport::new("solver");
        for i in 0..self.ball.len() {
            let (g, w) = &self.ball.elements[i];
            match self.s.normal_form(w, None) {
                Ok(y) if Some(&y) == self.nf[i].as_ref() => {}
                Ok(y) if self.o.eval(&y) != *g => {
                    rep.fail(format!("`{}` -> `{}` changes the element", self.al().render(w), self.al().render(&y)))
                }
                Ok(y) => rep.fail(format!(
                    "`{}` -> `{}`, expected `{}`",
                    self.al().render(w),
                    self.al().render(&y),
                    self.nf[i].as_ref().map(|v| self.al().render(v)).unwrap_or_default()
                )),
                Err(e) => rep.fail(format!("`{}`: {e}", self.al().render(w))),
            }
        }
        rep.finish()
    }
}

pub fn check_f1(s: &AutostackableStructure, o: &ElementOracle, r: usize) -> Result<CheckReport> {
    Ok(BallContext::new(s, o, r)?.check_f1())
}

pub fn check_f2(s: &AutostackableStructure, o: &ElementOracle, r: usize) -> Result<CheckReport> {
    Ok(BallContext::new(s, o, r)?.check_f2())
}

pub fn check_f3_acyclic(s: &AutostackableStructure, o: &ElementOracle, r: usize) -> Result<CheckReport> {
    Ok(BallContext::new(s, o, r)?.check_f3_acyclic())
}

/// The normal-form acceptor is prefix-closed and accepts ε.
pub fn check_prefix_closed(s: &AutostackableStructure) -> CheckReport {
    let mut rep = CheckReport::new("prefix_closed");
    if !s.nf().accepts(&[]) {
        rep.fail("ε is not a normal form".into());
    }
    if !s.nf().is_prefix_closed() {
        // find a witness: shortest accepted word with a rejected prefix
        let words = s.nf().enumerate_upto(12);
        if let Some(w) = words.iter().find(|w| (0..w.len()).any(|i| !s.nf().accepts(&w[..i]))) {
            let w: Word = w.iter().map(|&x| Letter(x as u32)).collect();
            rep.fail(format!("`{}` has a prefix outside Nf", s.alphabet().render(&w)));
        } else {
            rep.fail("acceptor is not prefix-closed".into());
        }
    }
    rep.finish()
}

/// Normal forms of length ≤ n are oracle-distinct; ball(r) coverage is
/// asserted when `n ≥ r·K` and reported otherwise.
pub fn check_uniqueness(s: &AutostackableStructure, o: &ElementOracle, r: usize, n: usize) -> Result<CheckReport> {
    let mut rep = CheckReport::new("uniqueness");
    let al = s.alphabet();
    let mut seen: HashMap<Key, Word> = HashMap::new();
    let words = s.nf().enumerate_upto(n);
    for w in &words {
        let w: Word = w.iter().map(|&x| Letter(x as u32)).collect();
        let g = o.eval(&w);
        if let Some(v) = seen.get(&g) {
            rep.fail(format!("`{}` and `{}` represent the same element", al.render(v), al.render(&w)));
        } else {
            seen.insert(g, w);
        }
    }
    let ball = ball_enumerate(o, r, BALL_LIMIT)?;
    let covered = ball.elements.iter().filter(|(g, _)| seen.contains_key(g)).count();
    let asserted = n >= r * s.bound();
    if asserted && covered < ball.len() {
        let (_, w) = ball.elements.iter().find(|(g, _)| !seen.contains_key(g)).expect("uncovered element");
        rep.fail(format!("no normal form of length ≤ {n} for `{}`", al.render(w)));
    }
    rep.notes.push(format!(
        "{} normal forms of length ≤ {n}; ball({r}) covered {covered}/{}{}",
        words.len(),
        ball.len(),
        if asserted { "" } else { " (coverage not asserted: n < r·K)" }
    ));
    Ok(rep.finish())
}

/// Prefix-closure, (F1), (F2), (F3), uniqueness and solver soundness.
pub fn verify_structure(s: &AutostackableStructure, o: &ElementOracle, r: usize, n: usize) -> Result<VerificationReport> {
    let mut ctx = BallContext::new(s, o, r)?;
    let checks = vec![
        check_prefix_closed(s),
        ctx.check_f1(),
        ctx.check_f2(),
        ctx.check_f3_acyclic(),
        check_uniqueness(s, o, r.min(n), n)?,
        ctx.check_solver(),
    ];
    Ok(VerificationReport { structure: s.name().to_string(), radius: r, checks })
}

/// Factorization, subgroup closure and H-translation invariance on the
/// ball; `in_h` decides subgroup membership of ball elements.
pub fn check_respecting(rs: &RespectingStructure, o: &ElementOracle, in_h: &dyn Fn(&Key) -> bool, r: usize) -> Result<VerificationReport> {
    let s = rs.base();
    let mut ctx = BallContext::new(s, o, r)?;
    let al = s.alphabet().clone();
    let mut fact = CheckReport::new("factorization");
    if let Err(e) = crate::constructions::split_respecting(rs) {
        fact.fail(e.to_string());
    }
    let h_idx: Vec<usize> = (0..ctx.ball.len()).filter(|&i| in_h(&ctx.ball.elements[i].0)).collect();
    let b_letters = rs.subgroup_letters();
    let letters: Vec<Letter> = al.letters().collect();

    let mut closure = CheckReport::new("subgroup_closure");
    ctx.note_problems(&mut closure);
    for &i in &h_idx {
        let Some(y) = ctx.nf[i].clone() else { continue };
        if !rs.is_subgroup_word(&y) {
            closure.fail(format!("normal form `{}` of a subgroup element leaves B*", al.render(&y)));
            continue;
        }
        for &b in &b_letters {
            match ctx.phi(i, b) {
                Ok(u) if rs.is_subgroup_word(&u) => {}
                Ok(u) => closure.fail(format!("{} -> {} leaves B*", ctx.edge(i, b), al.render(&u))),
                Err(e) => closure.fail(format!("{}: {e}", ctx.edge(i, b))),
            }
        }
    }
    closure.notes.push(format!("{} subgroup elements in the ball", h_idx.len()));

    let mut inv = CheckReport::new("translation");
    let mut compared = 0usize;
    for i in 0..ctx.ball.len() {
        if ctx.nf[i].is_none() {
            continue;
        }
        let g = ctx.ball.elements[i].0.clone();
        let g_in_h = in_h(&g);
        for &a in &letters {
            if g_in_h && rs.in_subgroup_alphabet(a) {
                continue;
            }
            let Ok(base) = ctx.phi(i, a) else { continue };
            for &j in &h_idx {
                let hg = o.mul_keys(&ctx.ball.elements[j].0, &g);
                let Some(&t) = ctx.ball.index.get(&hg) else { continue };
                if ctx.nf[t].is_none() {
                    continue;
                }
                compared += 1;
                match ctx.phi(t, a) {
                    Ok(u) if u == base => {}
                    Ok(u) => inv.fail(format!(
                        "{} -> {} but {} -> {}",
                        ctx.edge(i, a),
                        al.render(&base),
                        ctx.edge(t, a),
                        al.render(&u)
                    )),
                    Err(e) => inv.fail(format!("{}: {e}", ctx.edge(t, a))),
                }
            }
        }
    }
    inv.notes.push(format!("{compared} translated edge pairs compared"));
    Ok(VerificationReport {
        structure: s.name().to_string(),
        radius: r,
        checks: vec![fact.finish(), closure.finish(), inv.finish()],
    })
}

/// Sampled H-coset fellow-traveling: for transversal words `v`, `w` of
/// length ≤ `max_len` and `h ∈ H` with `d(v, h·w) ≤ 1`, every
/// `d(v(i), h·w(i))` is at most the declared constant.
pub fn check_coset_fellow_traveler(
    data: &CosetAutomaticData,
    o: &ElementOracle,
    in_h: &dyn Fn(&Key) -> bool,
    max_len: usize,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("fellow_traveler");
    let kft = data.fellow_constant();
    let al = data.alphabet();
    let ball = ball_enumerate(o, kft.max(1), BALL_LIMIT)?;
    let words: Vec<Word> = data
        .transversal()
        .enumerate_upto(max_len)
        .into_iter()
        .map(|w| w.into_iter().map(|x| Letter(x as u32)).collect())
        .collect();
    let keys: Vec<Key> = words.iter().map(|w| o.eval(w)).collect();
    let inv_keys: Vec<Key> = keys.iter().map(|k| o.inverse(k)).collect();
    let steps: Vec<Key> = ball.elements.iter().filter(|(_, w)| w.len() <= 1).map(|(g, _)| g.clone()).collect();
    let mut pairs = 0usize;
    for (vi, v) in words.iter().enumerate() {
        for x in &steps {
            let vx = o.mul_keys(&keys[vi], x);
            for (wi, w) in words.iter().enumerate() {
                // h = v·x·w⁻¹
                let h = o.mul_keys(&vx, &inv_keys[wi]);
                if !in_h(&h) {
                    continue;
                }
                pairs += 1;
                let len = v.len().max(w.len());
                for i in 0..=len {
                    let vp = o.eval(&v[..i.min(v.len())]);
                    let wp = o.eval(&w[..i.min(w.len())]);
                    let d = o.mul_keys(&o.mul_keys(&o.inverse(&vp), &h), &wp);
                    if ball.dist(&d).is_none_or(|dd| dd > kft) {
                        rep.fail(format!("v = `{}`, w = `{}`, i = {i}: distance > {kft}", al.render(v), al.render(w)));
                        break;
                    }
                }
            }
        }
    }
    rep.notes.push(format!("{} transversal words, {pairs} close pairs", words.len()));
    Ok(rep.finish())
}
