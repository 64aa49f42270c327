//! Strongly prefix-closed coset automatic pairs `(G, H)`. Multiplier
//! automata track `x(i)⁻¹·h·y(i)` through a ball; the composed stacking map
//! uses them to find coset representatives and, for long representatives,
//! to shortcut through a bounded continuation.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::automata::{product, Fsa, PaddedAlphabet};
use crate::error::{Error, Result};
use crate::oracles::{ball_enumerate, Ball, ElementOracle, Key, BALL_LIMIT};
use crate::stacking::{AutostackableStructure, ComposedMap, RespectingStructure, StackingMap};
use crate::words::{Alphabet, Letter, Word};

/// Bound on subgroup elements visited while finding `B`-words for the
/// subgroup part of the ball.
pub const SUBGROUP_SEARCH_LIMIT: usize = 200_000;

pub struct CosetAutomaticData {
    oracle: ElementOracle,
    transversal: Fsa,
    k_ft: usize,
    ball: Ball,
    in_h: Vec<bool>,
    b_alphabet: Alphabet,
    b_keys: Vec<Key>,
    /// ball id → word over B, for subgroup elements of the ball
    h_words: HashMap<usize, Word>,
    /// [g][a][b] with index |C| for ε: id of a⁻¹·g·b
    mult: Vec<Option<u32>>,
    pa: PaddedAlphabet,
    tt: Fsa,
    /// multiplier transitions; state (q, g) is q·|ball| + g, the last is F
    delta: Vec<u32>,
    mu: usize,
    sl: Vec<Word>,
}

impl std::fmt::Debug for CosetAutomaticData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosetAutomaticData")
            .field("oracle", &self.oracle.name())
            .field("fellow_constant", &self.k_ft)
            .field("ball", &self.ball.len())
            .field("mu", &self.mu)
            .finish()
    }
}

fn too_small(msg: impl Into<String>) -> Error {
    Error::BallTooSmall(msg.into())
}

impl CosetAutomaticData {
    /// `oracle` is over `C`; `b_keys[b]` is the element represented by the
    /// subgroup letter `b` of `b_alphabet`; `in_h` decides subgroup
    /// membership of keys.
    pub fn new(
        oracle: ElementOracle,
        transversal: Fsa,
        fellow_constant: usize,
        b_alphabet: Alphabet,
        b_keys: Vec<Key>,
        in_h: &dyn Fn(&Key) -> bool,
    ) -> Result<Self> {
        let al = oracle.alphabet().clone();
        let k = al.len();
        if transversal.num_symbols() != k {
            return Err(Error::AlphabetMismatch(format!(
                "transversal over {} symbols, oracle over {k}",
                transversal.num_symbols()
            )));
        }
        let transversal = transversal.relabel(al.names().to_vec()).minimize();
        if !transversal.accepts(&[]) {
            return Err(Error::NonPrefixClosedTransversal("ε is not accepted".into()));
        }
        if !transversal.is_prefix_closed() {
            return Err(Error::NonPrefixClosedTransversal("transversal language".into()));
        }
        if b_keys.len() != b_alphabet.len() {
            return Err(Error::Input("one key per subgroup letter".into()));
        }
        if let Some(b) = b_keys.iter().position(|g| !in_h(g)) {
            return Err(Error::Input(format!("`{}` is not in the subgroup", b_alphabet.name(Letter(b as u32)))));
        }
        let ball = ball_enumerate(&oracle, fellow_constant.max(1), BALL_LIMIT)?;
        let n = ball.len();
        let in_h_v: Vec<bool> = ball.elements.iter().map(|(g, _)| in_h(g)).collect();

        // B-words for the subgroup part of the ball
        let mut h_words = HashMap::new();
        let targets = in_h_v.iter().filter(|x| **x).count();
        let mut seen: HashMap<Key, ()> = HashMap::new();
        let mut q = VecDeque::from([(oracle.identity(), Vec::<Letter>::new())]);
        seen.insert(oracle.identity(), ());
        while let Some((g, w)) = q.pop_front() {
            if let Some(&id) = ball.index.get(&g) {
                h_words.entry(id).or_insert_with(|| w.clone());
                if h_words.len() == targets {
                    break;
                }
            }
            if seen.len() > SUBGROUP_SEARCH_LIMIT {
                return Err(too_small("subgroup elements of the ball are not reachable by short subgroup words"));
            }
            for b in b_alphabet.letters() {
                let g2 = oracle.mul_keys(&g, &b_keys[b.idx()]);
                if seen.insert(g2.clone(), ()).is_none() {
                    let mut w2 = w.clone();
                    w2.push(b);
                    q.push_back((g2, w2));
                }
            }
        }

        let mut mult = vec![None; n * (k + 1) * (k + 1)];
        for (g, (key, _)) in ball.elements.iter().enumerate() {
            for a in 0..=k {
                let left = if a < k { oracle.mul_keys(&oracle.inverse(oracle.image(Letter(a as u32))), key) } else { key.clone() };
                for b in 0..=k {
                    let v = if b < k { oracle.multiply(&left, Letter(b as u32)) } else { left.clone() };
                    mult[(g * (k + 1) + a) * (k + 1) + b] = ball.index.get(&v).map(|&i| i as u32);
                }
            }
        }

        let (pa, tt) = product(&[&transversal, &transversal]);
        let nq = tt.num_states();
        let fail = (nq * n) as u32;
        let ns = pa.len();
        let mut delta = vec![fail; (nq * n + 1) * ns];
        let reach = tt.coreachable();
        for qs in 0..nq {
            for g in 0..n {
                for s in 0..ns {
                    let comps = pa.decode(s);
                    let q2 = tt.step(qs, s);
                    let a = comps[0].unwrap_or(k);
                    let b = comps[1].unwrap_or(k);
                    let g2 = mult[(g * (k + 1) + a) * (k + 1) + b];
                    if let (Some(g2), true) = (g2, reach[q2]) {
                        delta[(qs * n + g) * ns + s] = (q2 * n + g2 as usize) as u32;
                    }
                }
            }
        }

        let mut data = CosetAutomaticData {
            oracle,
            transversal,
            k_ft: fellow_constant,
            ball,
            in_h: in_h_v,
            b_alphabet,
            b_keys: Vec::new(),
            h_words,
            mult,
            pa,
            tt,
            delta,
            mu: 0,
            sl: Vec::new(),
        };
        data.mu = data.reachable_states();
        data.sl = (0..b_keys.len()).map(|b| data.shortlex_word(&b_keys[b])).collect::<Result<_>>()?;
        data.b_keys = b_keys;
        Ok(data)
    }

    /// Replaces μ. Smaller values exercise the long-representative case of
    /// the stacking map on short words.
    pub fn with_mu(mut self, mu: usize) -> Self {
        self.mu = mu.max(1);
        self
    }

    pub fn fellow_constant(&self) -> usize {
        self.k_ft
    }

    /// The alphabet `C`.
    pub fn alphabet(&self) -> &Alphabet {
        self.oracle.alphabet()
    }

    pub fn subgroup_alphabet(&self) -> &Alphabet {
        &self.b_alphabet
    }

    /// Elements represented by the subgroup letters.
    pub fn subgroup_keys(&self) -> &[Key] {
        &self.b_keys
    }

    pub fn transversal(&self) -> &Fsa {
        &self.transversal
    }

    pub fn oracle(&self) -> &ElementOracle {
        &self.oracle
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn padded_alphabet(&self) -> &PaddedAlphabet {
        &self.pa
    }

    /// `sl_C(b)` for a subgroup letter.
    pub fn sl_c(&self, b: Letter) -> &Word {
        &self.sl[b.idx()]
    }

    /// Ball ids of subgroup elements, with their `B`-words.
    pub fn subgroup_ball(&self) -> Vec<(usize, &Word)> {
        let mut v: Vec<(usize, &Word)> = self.h_words.iter().map(|(&i, w)| (i, w)).collect();
        v.sort();
        v
    }

    /// `a⁻¹·g·b` inside the ball (`None` letters stand for ε).
    pub fn bounded_mult(&self, g: usize, a: Option<Letter>, b: Option<Letter>) -> Option<usize> {
        let k = self.alphabet().len();
        let a = a.map_or(k, Letter::idx);
        let b = b.map_or(k, Letter::idx);
        self.mult[(g * (k + 1) + a) * (k + 1) + b].map(|x| x as usize)
    }

    fn n_states(&self) -> usize {
        self.tt.num_states() * self.ball.len() + 1
    }

    fn fail_state(&self) -> usize {
        self.n_states() - 1
    }

    fn step(&self, s: usize, sym: usize) -> usize {
        self.delta[s * self.pa.len() + sym] as usize
    }

    fn start_state(&self, h: usize) -> usize {
        self.tt.start() * self.ball.len() + h
    }

    fn accepting(&self, s: usize, c: usize) -> bool {
        let n = self.ball.len();
        s != self.fail_state() && self.tt.is_accepting(s / n) && s % n == c
    }

    /// States reachable from any subgroup start, plus the failure state.
    fn reachable_states(&self) -> usize {
        let mut seen = vec![false; self.n_states()];
        let mut q: VecDeque<usize> = VecDeque::new();
        for &h in self.h_words.keys() {
            let s = self.start_state(h);
            if !seen[s] {
                seen[s] = true;
                q.push_back(s);
            }
        }
        while let Some(s) = q.pop_front() {
            for sym in 0..self.pa.len() {
                let t = self.step(s, sym);
                if !seen[t] {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
        seen[self.fail_state()] = true;
        seen.iter().filter(|x| **x).count()
    }

    fn letter_id(&self, c: Letter) -> Result<usize> {
        self.ball
            .index
            .get(self.oracle.image(c))
            .copied()
            .ok_or_else(|| too_small("generators must lie in the ball"))
    }

    /// Shortlex least `C`-word for `g`, searching inside the ball.
    fn shortlex_word(&self, g: &Key) -> Result<Word> {
        let target = *self.ball.index.get(g).ok_or_else(|| too_small("a subgroup generator lies outside the ball"))?;
        let mut prev: Vec<Option<(usize, Letter)>> = vec![None; self.ball.len()];
        let mut seen = vec![false; self.ball.len()];
        seen[0] = true;
        let mut q = VecDeque::from([0usize]);
        while let Some(x) = q.pop_front() {
            if x == target {
                let mut w = Vec::new();
                let mut y = x;
                while let Some((p, c)) = prev[y] {
                    w.push(c);
                    y = p;
                }
                w.reverse();
                return Ok(w);
            }
            for c in self.alphabet().letters() {
                if let Some(t) = self.bounded_mult(x, None, Some(c)) {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((x, c));
                        q.push_back(t);
                    }
                }
            }
        }
        Err(too_small("shortlex representative leaves the ball"))
    }

    /// `M_{h,c}` as an automaton over padded pairs. `h` is a ball id of a
    /// subgroup element.
    pub fn build_multiplier(&self, h: usize, c: Letter) -> Result<Fsa> {
        if !self.in_h.get(h).copied().unwrap_or(false) {
            return Err(Error::Input(format!("ball element {h} is not in the subgroup")));
        }
        let cid = self.letter_id(c)?;
        let n = self.n_states();
        let accept = (0..n).map(|s| self.accepting(s, cid)).collect();
        let names = self.tt.symbols().to_vec();
        Ok(Fsa::from_table(names, self.start_state(h), accept, self.delta.clone()))
    }

    /// Ball id of a subgroup key.
    pub fn subgroup_id(&self, g: &Key) -> Option<usize> {
        self.ball.index.get(g).copied().filter(|&i| self.in_h[i])
    }

    /// The unique `(h, z′)` with `z·c = h·z′`, `z′` in the transversal.
    pub fn mult_solve(&self, z: &[Letter], c: Letter) -> Result<(usize, Word)> {
        let cid = self.letter_id(c)?;
        let k = self.alphabet().len();
        let mut hs: Vec<usize> = self.h_words.keys().copied().collect();
        hs.sort_unstable();
        for h in hs {
            let start = (self.start_state(h), 0usize);
            let mut prev: HashMap<(usize, usize), ((usize, usize), Option<usize>)> = HashMap::new();
            let mut q = VecDeque::from([start]);
            prev.insert(start, (start, None));
            while let Some((s, pos)) = q.pop_front() {
                if pos == z.len() && self.accepting(s, cid) {
                    let mut w = Vec::new();
                    let mut cur = (s, pos);
                    while cur != start {
                        let (p, b) = prev[&cur];
                        if let Some(b) = b {
                            w.push(Letter(b as u32));
                        }
                        cur = p;
                    }
                    w.reverse();
                    return Ok((h, w));
                }
                let a = z.get(pos).map(|x| x.idx());
                for b in (0..k).map(Some).chain([None]) {
                    if a.is_none() && b.is_none() {
                        continue;
                    }
                    let sym = self.pa.encode(&[a, b]);
                    let t = self.step(s, sym);
                    if t == self.fail_state() {
                        continue;
                    }
                    let next = (t, pos + usize::from(a.is_some()));
                    if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(next) {
                        e.insert(((s, pos), b));
                        q.push_back(next);
                    }
                }
            }
        }
        Err(Error::OracleInconsistent(format!(
            "no multiplier accepts `{}` times `{}`; the fellow constant may be too small",
            self.alphabet().render(z),
            self.alphabet().name(c)
        )))
    }

    /// Shortest padded continuation from `s` to an accept state of
    /// `M_{·,c}`, ties broken by symbol index, unpadded.
    fn continuation(&self, s: usize, c: usize) -> Option<(Word, Word)> {
        let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut seen = vec![false; self.n_states()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            if self.accepting(x, c) {
                let mut path = Vec::new();
                let mut y = x;
                while y != s {
                    let (p, sym) = prev[&y];
                    path.push(sym);
                    y = p;
                }
                path.reverse();
                let mut v = Vec::new();
                let mut w = Vec::new();
                for sym in path {
                    let d = self.pa.decode(sym);
                    v.extend(d[0].map(|i| Letter(i as u32)));
                    w.extend(d[1].map(|i| Letter(i as u32)));
                }
                return Some((v, w));
            }
            for sym in 0..self.pa.len() {
                let t = self.step(x, sym);
                if t != self.fail_state() && !seen[t] {
                    seen[t] = true;
                    prev.insert(t, (x, sym));
                    q.push_back(t);
                }
            }
        }
        None
    }
}

struct CosetMap {
    name: String,
    h: AutostackableStructure,
    data: Arc<CosetAutomaticData>,
    nb: usize,
    alphabet: Alphabet,
    /// normal forms in H of the subgroup part of the ball
    h_nf: Mutex<HashMap<usize, Word>>,
}

impl CosetMap {
    fn lift(&self, w: &[Letter]) -> Word {
        w.iter().map(|c| Letter((c.idx() + self.nb) as u32)).collect()
    }

    fn h_normal_form(&self, id: usize) -> Result<Word> {
        if let Some(w) = self.h_nf.lock().expect("cache lock").get(&id) {
            return Ok(w.clone());
        }
        let word = self.data.h_words.get(&id).ok_or_else(|| too_small("subgroup element without a word"))?;
        let w = self.h.normal_form(word, None)?;
        self.h_nf.lock().expect("cache lock").insert(id, w.clone());
        Ok(w)
    }
}

impl ComposedMap for CosetMap {
    fn phi(&self, y: &[Letter], a: Letter) -> Result<Word> {
        let nb = self.nb;
        let d = &self.data;
        let split = y.iter().position(|x| x.idx() >= nb).unwrap_or(y.len());
        let (x, zg) = y.split_at(split);
        let z: Word = zg.iter().map(|l| Letter((l.idx() - nb) as u32)).collect();
        if a.idx() < nb {
            return if z.is_empty() { self.h.phi_eval(x, a) } else { Ok(self.lift(d.sl_c(a))) };
        }
        let c = Letter((a.idx() - nb) as u32);
        let mut zc = AutostackableStructure::syms(&z);
        zc.push(c.idx());
        if d.transversal.accepts(&zc) || y.last() == Some(&self.alphabet.inv(a)) {
            return Ok(vec![a]);
        }
        let (hid, z2) = d.mult_solve(&z, c)?;
        if z.len() <= d.mu {
            let mut w = self.lift(&d.alphabet().invert(&z));
            w.extend(self.h_normal_form(hid)?);
            w.extend(self.lift(&z2));
            return Ok(self.alphabet.free_reduce(&w));
        }
        let j = z.len() - d.mu - 1;
        let zs = AutostackableStructure::syms(&z);
        let z2s = AutostackableStructure::syms(&z2);
        let mut s = d.start_state(hid);
        for sym in d.pa.pad(&[&zs[..j], &z2s[..j.min(z2s.len())]]) {
            s = d.step(s, sym);
        }
        let cid = d.letter_id(c)?;
        let (v, w) = d.continuation(s, cid).ok_or_else(|| {
            Error::DeadMultiplierState(format!(
                "state after `{}` / `{}` cannot reach acceptance",
                d.alphabet().render(&z[..j]),
                d.alphabet().render(&z2[..j.min(z2.len())])
            ))
        })?;
        let mut out = self.lift(&d.alphabet().invert(&z[j..]));
        out.extend(self.lift(&v));
        out.push(a);
        out.extend(self.lift(&d.alphabet().invert(&w)));
        out.extend(self.lift(&z2[j.min(z2.len())..]));
        Ok(out)
    }

    fn recipe(&self) -> serde_json::Value {
        serde_json::json!({
            "combinator": "coset",
            "name": self.name,
            "h": self.h.to_json(),
            "subgroup_keys": self.data.b_keys,
            "oracle": self.data.oracle.name(),
            "transversal": self.data.transversal.to_json(),
            "fellow_constant": self.data.k_ft,
            "mu": self.data.mu,
        })
    }
}

/// Composes `G` over `B ⊔ C`, respecting `H`.
pub fn coset_compose(name: &str, h: &AutostackableStructure, data: Arc<CosetAutomaticData>) -> Result<RespectingStructure> {
    if h.alphabet() != data.subgroup_alphabet() {
        return Err(Error::AlphabetMismatch("subgroup structure and coset data use different subgroup alphabets".into()));
    }
    let nb = h.alphabet().len();
    let al = h.alphabet().disjoint_union(data.alphabet())?;
    let names = al.names().to_vec();
    let nf_h = h.nf().embed(&(0..nb).collect::<Vec<_>>(), names.clone());
    let nc = data.alphabet().len();
    let nf_t = data.transversal.embed(&(nb..nb + nc).collect::<Vec<_>>(), names);
    let nf = nf_h.concat(&nf_t).minimize();
    let m = CosetMap { name: name.to_string(), h: h.clone(), data: data.clone(), nb, alphabet: al.clone(), h_nf: Mutex::new(HashMap::new()) };
    let mut x = 0;
    for (id, _) in data.subgroup_ball() {
        x = x.max(m.h_normal_form(id)?.len());
    }
    let sl = data.sl.iter().map(Vec::len).max().unwrap_or(0);
    let bound = h.bound().max(sl).max(5 * data.mu + 3 + x);
    let s = AutostackableStructure::new(name, al, nf, StackingMap::Composed(Arc::new(m)), bound)?;
    let sub: Vec<Letter> = (0..nb).map(|i| Letter(i as u32)).collect();
    RespectingStructure::new(s, &sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::free_oracle;
    use crate::zoo::{f2_coset_data, free_cyclic_membership, zn_named};
    use rand::{Rng, SeedableRng};

    fn syms(w: &[Letter]) -> Vec<usize> {
        AutostackableStructure::syms(w)
    }

    #[test]
    fn multiplier_examples() {
        let d = f2_coset_data().unwrap();
        let c = d.alphabet().clone();
        let p = |t: &str| c.parse(t).unwrap();
        let one = d.subgroup_id(&d.oracle().identity()).unwrap();
        let a_id = d.subgroup_id(&d.oracle().eval(&p("a"))).unwrap();
        let m = d.build_multiplier(one, p("a")[0]).unwrap();
        let pad = |x: &str, y: &str| d.padded_alphabet().pad(&[&syms(&p(x)), &syms(&p(y))]);
        assert!(m.accepts(&pad("b", "b a")));
        assert!(m.accepts(&pad("b a^-1", "b")));
        assert!(!m.accepts(&pad("b", "b")));
        assert!(!m.accepts(&pad("", "")));
        let ma = d.build_multiplier(a_id, p("a")[0]).unwrap();
        assert!(ma.accepts(&pad("", "")));
        assert!(!ma.accepts(&pad("b", "b a")));
        assert!(d.build_multiplier(d.ball().index[&d.oracle().eval(&p("b"))], p("a")[0]).is_err());
    }

    #[test]
    fn solving_for_the_next_representative() {
        let d = f2_coset_data().unwrap();
        let c = d.alphabet().clone();
        let p = |t: &str| c.parse(t).unwrap();
        let (h, z) = d.mult_solve(&p("b a^-1"), p("b^-1")[0]).unwrap();
        assert_eq!(d.ball().elements[h].1, Vec::<Letter>::new());
        assert_eq!(z, p("b a^-1 b^-1"));
        let (h, z) = d.mult_solve(&[], p("a^-1")[0]).unwrap();
        assert_eq!(d.ball().elements[h].1, p("a^-1"));
        assert!(z.is_empty());
        assert_eq!(d.sl_c(Letter(0)), &p("a"));
    }

    #[test]
    fn small_mu_takes_the_long_representative_branch() {
        let d = f2_coset_data().unwrap().with_mu(1);
        let r = coset_compose("short", &zn_named(&["h"]).unwrap(), Arc::new(d)).unwrap();
        let s = r.base();
        let o = free_oracle(&["a", "b"]).translate("F2", s.alphabet(), &[("h", "a")]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(0..12);
            let w: Word = (0..n).map(|_| Letter(rng.gen_range(0..s.alphabet().len()) as u32)).collect();
            let nf = s.normal_form(&w, None).unwrap();
            assert!(s.is_normal_form(&nf));
            assert_eq!(o.eval(&nf), o.eval(&w), "{}", s.alphabet().render(&w));
        }
    }

    #[test]
    fn subgroup_generators_must_lie_in_the_subgroup() {
        let o = free_oracle(&["a", "b"]);
        let b = o.image(Letter(2)).clone();
        let bi = o.image(Letter(3)).clone();
        let r = CosetAutomaticData::new(
            o,
            crate::zoo::f2_transversal(),
            2,
            Alphabet::from_generators(&["h"]),
            vec![b, bi],
            &free_cyclic_membership,
        );
        assert!(matches!(r, Err(Error::Input(_))));
    }
}
