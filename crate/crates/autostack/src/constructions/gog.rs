//! Fundamental groups of graphs of groups. Normal forms are deflated
//! Higgins normal forms; the stacking map either fixes non-tree edges,
//! pushes a subgroup letter across the last edge of the path, or defers to
//! the structure of that edge.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::automata::{product, projection, Fsa};
use crate::error::{Error, Result};
use crate::stacking::{triple, AutostackableStructure, ComposedMap, RespectingStructure, StackingMap};
use crate::words::{Alphabet, Letter, Word};

/// Data attached to one directed edge `e`: a structure for the vertex group
/// at `t(e)` respecting the image of the edge group, and for each subgroup
/// letter `a` the word `â_e` over the subgroup letters at the other end.
#[derive(Clone, Debug)]
pub struct DirectedEdgeData {
    pub structure: RespectingStructure,
    pub hat: Vec<(String, Vec<String>)>,
}

/// An undirected edge declared as a pair of directed edges `name` (from
/// `from` to `to`) and `inverse` (back).
#[derive(Clone, Debug)]
pub struct EdgeDecl {
    pub name: String,
    pub inverse: String,
    pub from: String,
    pub to: String,
    pub tree: bool,
    pub forward: DirectedEdgeData,
    pub backward: DirectedEdgeData,
}

#[derive(Clone, Debug)]
pub struct GraphOfGroupsSpec {
    pub name: String,
    pub vertices: Vec<String>,
    pub base_vertex: String,
    pub base: AutostackableStructure,
    pub edges: Vec<EdgeDecl>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// vertex, local letter index
    Vertex(usize, usize),
    /// directed edge index
    Edge(usize),
}

struct Directed {
    name: String,
    from: usize,
    to: usize,
    tree: bool,
    inv: usize,
    structure: RespectingStructure,
    /// indexed by local letter at `to`; words are global letters of A
    hat: Vec<Option<Word>>,
    /// letter of Ã
    tilde: usize,
    /// letter of A for non-tree edges
    global: Option<usize>,
}

/// Everything the composed stacking map needs.
pub struct Gog {
    name: String,
    vertices: Vec<String>,
    v0: usize,
    base: AutostackableStructure,
    edges: Vec<Directed>,
    vertex_alphabets: Vec<Alphabet>,
    offsets: Vec<usize>,
    alphabet: Alphabet,
    tilde: Alphabet,
    kinds: Vec<Kind>,
    /// pt[u][v]: directed tree edges from u to v
    pt: Vec<Vec<Vec<usize>>>,
    nf_tilde: Fsa,
    nf: Fsa,
    bound: usize,
    recipe: serde_json::Value,
}

impl std::fmt::Debug for Gog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gog").field("name", &self.name).field("vertices", &self.vertices).finish()
    }
}

fn viol(msg: impl Into<String>) -> Error {
    Error::SpecInvariantViolation(msg.into())
}

impl Gog {
    fn build(spec: &GraphOfGroupsSpec) -> Result<Gog> {
        let nv = spec.vertices.len();
        if nv == 0 || spec.edges.is_empty() {
            return Err(viol("the graph needs a vertex and at least one edge"));
        }
        let vidx: HashMap<&str, usize> = spec.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        if vidx.len() != nv {
            return Err(viol("duplicate vertex name"));
        }
        let vertex = |n: &str| vidx.get(n).copied().ok_or_else(|| Error::UnknownVertex(n.to_string()));
        let v0 = vertex(&spec.base_vertex)?;

        // directed edges: 2i forward, 2i+1 backward
        let mut raw = Vec::new();
        for e in &spec.edges {
            let (u, v) = (vertex(&e.from)?, vertex(&e.to)?);
            if e.tree && u == v {
                return Err(viol(format!("tree edge `{}` is a loop", e.name)));
            }
            raw.push((e.name.clone(), u, v, e.tree, &e.forward));
            raw.push((e.inverse.clone(), v, u, e.tree, &e.backward));
        }

        // spanning tree check
        let tree_count = spec.edges.iter().filter(|e| e.tree).count();
        if tree_count + 1 != nv {
            return Err(viol(format!("{tree_count} tree edges cannot span {nv} vertices")));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (d, r) in raw.iter().enumerate() {
            if r.3 {
                adj[r.1].push(d);
            }
        }
        let mut pt = vec![vec![Vec::new(); nv]; nv];
        for (u, row) in pt.iter_mut().enumerate() {
            let mut prev: Vec<Option<usize>> = vec![None; nv];
            let mut seen = vec![false; nv];
            seen[u] = true;
            let mut q = VecDeque::from([u]);
            while let Some(x) = q.pop_front() {
                for &d in &adj[x] {
                    let y = raw[d].2;
                    if !seen[y] {
                        seen[y] = true;
                        prev[y] = Some(d);
                        q.push_back(y);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(viol("tree edges do not connect the graph"));
            }
            for (v, slot) in row.iter_mut().enumerate() {
                let mut path = Vec::new();
                let mut x = v;
                while let Some(d) = prev[x] {
                    path.push(d);
                    x = raw[d].1;
                }
                path.reverse();
                *slot = path;
            }
        }

        // vertex alphabets must agree across all structures at a vertex
        let mut valph: Vec<Option<Alphabet>> = vec![None; nv];
        valph[v0] = Some(spec.base.alphabet().clone());
        for r in &raw {
            let al = r.4.structure.alphabet();
            match &valph[r.2] {
                None => valph[r.2] = Some(al.clone()),
                Some(a) if a == al => {}
                Some(a) => {
                    return Err(viol(format!(
                        "structures at vertex `{}` use different alphabets ({a:?} vs {al:?}); unify them with extend_generators first",
                        spec.vertices[r.2]
                    )))
                }
            }
        }
        let vertex_alphabets: Vec<Alphabet> = valph.into_iter().map(|a| a.expect("every vertex is a terminus")).collect();

        // global alphabets
        let mut alphabet = Alphabet::empty();
        let mut offsets = Vec::new();
        let mut kinds = Vec::new();
        for (v, al) in vertex_alphabets.iter().enumerate() {
            offsets.push(alphabet.len());
            alphabet = alphabet.disjoint_union(al)?;
            kinds.extend((0..al.len()).map(|i| Kind::Vertex(v, i)));
        }
        let nvert = alphabet.len();
        let mut tilde = alphabet.clone();
        for e in &spec.edges {
            tilde = tilde.extended(&[(e.name.as_str(), e.inverse.as_str())])?;
            if !e.tree {
                alphabet = alphabet.extended(&[(e.name.as_str(), e.inverse.as_str())])?;
            }
        }
        let mut edges = Vec::new();
        let mut nt = nvert;
        for (d, r) in raw.iter().enumerate() {
            let tilde_idx = nvert + d;
            let global = if r.3 {
                None
            } else {
                let g = nt + (d % 2);
                if d % 2 == 1 {
                    nt += 2;
                }
                Some(g)
            };
            edges.push(Directed {
                name: r.0.clone(),
                from: r.1,
                to: r.2,
                tree: r.3,
                inv: d ^ 1,
                structure: r.4.structure.clone(),
                hat: Vec::new(),
                tilde: tilde_idx,
                global,
            });
        }
        for d in &edges {
            if let Some(g) = d.global {
                kinds.push(Kind::Edge(edges.iter().position(|x| x.global == Some(g)).expect("edge")));
            }
        }

        // hat words
        for d in 0..edges.len() {
            let (to, from) = (edges[d].to, edges[d].from);
            let other = &edges[d ^ 1].structure;
            let local = &vertex_alphabets[to];
            let mut hat: Vec<Option<Word>> = vec![None; local.len()];
            for (a, w) in &raw[d].4.hat {
                let la = local.letter_or_err(a)?;
                if !edges[d].structure.in_subgroup_alphabet(la) {
                    return Err(viol(format!("hat given for `{a}`, which is not a subgroup letter of `{}`", edges[d].name)));
                }
                let lw = vertex_alphabets[from].parse_names(w)?;
                if !other.is_subgroup_word(&lw) || !other.base().is_normal_form(&lw) {
                    return Err(viol(format!(
                        "hat of `{a}` across `{}` is not a subgroup normal form at `{}`",
                        edges[d].name, spec.vertices[from]
                    )));
                }
                hat[la.idx()] = Some(lw.iter().map(|b| Letter((offsets[from] + b.idx()) as u32)).collect());
            }
            for b in edges[d].structure.subgroup_letters() {
                if hat[b.idx()].is_none() {
                    return Err(viol(format!("missing hat for `{}` across `{}`", local.name(b), edges[d].name)));
                }
            }
            edges[d].hat = hat;
        }

        let mut g = Gog {
            name: spec.name.clone(),
            vertices: spec.vertices.clone(),
            v0,
            base: spec.base.clone(),
            edges,
            vertex_alphabets,
            offsets,
            alphabet,
            tilde,
            kinds,
            pt,
            nf_tilde: Fsa::empty_language(Vec::new()),
            nf: Fsa::empty_language(Vec::new()),
            bound: 1,
            recipe: serde_json::Value::Null,
        };
        g.check_hats_inverse()?;
        g.build_normal_forms()?;
        let mut k = 0;
        for d in &g.edges {
            k = k.max(d.structure.base().bound());
            for w in d.hat.iter().flatten() {
                k = k.max(w.len());
            }
        }
        g.bound = 2 + k.max(g.base.bound());
        g.recipe = spec_recipe(spec);
        Ok(g)
    }

    /// `hat_ē ∘ hat_e` is the identity on subgroup elements.
    fn check_hats_inverse(&self) -> Result<()> {
        for (d, e) in self.edges.iter().enumerate() {
            let back = &self.edges[d ^ 1];
            let s = e.structure.base();
            let loc = &self.vertex_alphabets[e.to];
            for b in e.structure.subgroup_letters() {
                let there = e.hat[b.idx()].as_ref().expect("checked");
                let mut round = Vec::new();
                for &c in there {
                    let lc = c.idx() - self.offsets[e.from];
                    let w = back.hat[lc].as_ref().ok_or_else(|| viol("hat word uses a letter without a hat"))?;
                    round.extend(w.iter().map(|x| Letter((x.idx() - self.offsets[e.to]) as u32)));
                }
                if s.normal_form(&round, None)? != s.normal_form(&[b], None)? {
                    return Err(viol(format!(
                        "hats across `{}` and `{}` are not mutually inverse at `{}`",
                        e.name,
                        back.name,
                        loc.name(b)
                    )));
                }
            }
        }
        Ok(())
    }

    fn local_map(&self, v: usize) -> Vec<usize> {
        (0..self.vertex_alphabets[v].len()).map(|i| self.offsets[v] + i).collect()
    }

    fn build_normal_forms(&mut self) -> Result<()> {
        let tn = self.tilde.names().to_vec();
        let any = Fsa::universal(tn.clone());
        let nf0 = self.base.nf().embed(&self.local_map(self.v0), tn.clone());
        let letter = |x: usize| Fsa::finite(tn.clone(), &[vec![x]]);
        let mut blocks = Fsa::empty_language(tn.clone());
        let mut tr: Vec<Fsa> = Vec::new();
        for d in &self.edges {
            let nft = d.structure.nf_tr().embed(&self.local_map(d.to), tn.clone());
            blocks = blocks.union(&letter(d.tilde).concat(&nft)).minimize();
            tr.push(nft);
        }
        let x = nf0.concat(&blocks.star()).minimize();
        let mut forbidden = Fsa::empty_language(tn.clone());
        for (i, d) in self.edges.iter().enumerate() {
            let pair = Fsa::finite(tn.clone(), &[vec![d.tilde, self.edges[d.inv].tilde]]);
            forbidden = forbidden.union(&any.concat(&pair).concat(&any)).minimize();
            for e in &self.edges {
                if d.to != e.from {
                    let l = any.concat(&letter(d.tilde)).concat(&tr[i]).concat(&letter(e.tilde)).concat(&any);
                    forbidden = forbidden.union(&l).minimize();
                }
            }
            if d.from != self.v0 {
                forbidden = forbidden.union(&nf0.concat(&letter(d.tilde)).concat(&any)).minimize();
            }
            if d.tree {
                forbidden = forbidden.union(&any.concat(&letter(d.tilde))).minimize();
            }
        }
        let nf_tilde = x.difference(&forbidden).minimize();
        let images: Vec<Vec<usize>> = (0..self.tilde.len())
            .map(|t| {
                if t < self.offsets.last().copied().unwrap_or(0) + self.vertex_alphabets.last().map_or(0, Alphabet::len) {
                    vec![t]
                } else {
                    let d = &self.edges[t - self.edges[0].tilde];
                    d.global.into_iter().collect()
                }
            })
            .collect();
        let nf = nf_tilde.hom_image(&images, self.alphabet.names().to_vec()).minimize();
        if !nf.is_prefix_closed() {
            return Err(Error::ComponentNotPrefixClosed(format!("{}: deflated normal forms", self.name)));
        }
        self.nf_tilde = nf_tilde;
        self.nf = nf;
        Ok(())
    }

    /// Deflation restricted to Ñ is injective on words of length ≤ `n`.
    pub fn check_deflation_injective(&self, n: usize) -> Result<()> {
        let mut seen: HashMap<Word, Word> = HashMap::new();
        for w in self.nf_tilde.enumerate_upto(n) {
            let w: Word = w.into_iter().map(|x| Letter(x as u32)).collect();
            let d = self.defl(&w);
            if let Some(prev) = seen.insert(d, w.clone()) {
                return Err(Error::DeflationNotInjective(self.tilde.render(&prev), self.tilde.render(&w)));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn tilde_alphabet(&self) -> &Alphabet {
        &self.tilde
    }

    pub fn nf_tilde(&self) -> &Fsa {
        &self.nf_tilde
    }

    fn vertex_of(&self, name: &str) -> Result<usize> {
        self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    fn tilde_to_global(&self, t: usize) -> Option<usize> {
        let nvert = self.edges[0].tilde;
        if t < nvert {
            Some(t)
        } else {
            self.edges[t - nvert].global
        }
    }

    fn global_to_tilde(&self, g: usize) -> usize {
        match self.kinds[g] {
            Kind::Vertex(..) => g,
            Kind::Edge(d) => self.edges[d].tilde,
        }
    }

    fn vst(&self, a: Letter) -> usize {
        match self.kinds[a.idx()] {
            Kind::Vertex(v, _) => v,
            Kind::Edge(d) => self.edges[d].from,
        }
    }

    fn vend(&self, a: Letter) -> usize {
        match self.kinds[a.idx()] {
            Kind::Vertex(v, _) => v,
            Kind::Edge(d) => self.edges[d].to,
        }
    }

    /// `pt(u, v)` as letters of Ã.
    pub fn pt(&self, u: &str, v: &str) -> Result<Word> {
        let (u, v) = (self.vertex_of(u)?, self.vertex_of(v)?);
        Ok(self.pt[u][v].iter().map(|&d| Letter(self.edges[d].tilde as u32)).collect())
    }

    /// Inserts tree paths before each letter; the result is over Ã.
    pub fn infl(&self, w: &[Letter]) -> Word {
        let mut out = Vec::new();
        let mut cur = self.v0;
        for &a in w {
            out.extend(self.pt[cur][self.vst(a)].iter().map(|&d| Letter(self.edges[d].tilde as u32)));
            out.push(Letter(self.global_to_tilde(a.idx()) as u32));
            cur = self.vend(a);
        }
        out
    }

    /// Erases tree-edge letters of a word over Ã.
    pub fn defl(&self, w: &[Letter]) -> Word {
        w.iter().filter_map(|t| self.tilde_to_global(t.idx()).map(|g| Letter(g as u32))).collect()
    }

    /// Maximal prefix of a word over Ã ending in a letter of A.
    pub fn trim(&self, w: &[Letter]) -> Word {
        let n = w.iter().rposition(|t| self.tilde_to_global(t.idx()).is_some()).map_or(0, |i| i + 1);
        w[..n].to_vec()
    }

    /// Edge letters of a word over Ã.
    pub fn edgeonly(&self, w: &[Letter]) -> Word {
        let nvert = self.edges[0].tilde;
        w.iter().copied().filter(|t| t.idx() >= nvert).collect()
    }

    /// (last edge of `edgeonly(infl(w))`, `vend(w)`).
    fn track(&self, w: &[Letter]) -> (Option<usize>, usize) {
        let mut last = None;
        let mut cur = self.v0;
        for &a in w {
            let (l, c) = self.track_step(last, cur, a);
            last = l;
            cur = c;
        }
        (last, cur)
    }

    fn track_step(&self, last: Option<usize>, cur: usize, a: Letter) -> (Option<usize>, usize) {
        match self.kinds[a.idx()] {
            Kind::Vertex(v, _) => (self.pt[cur][v].last().copied().or(last), v),
            Kind::Edge(d) => (Some(d), self.edges[d].to),
        }
    }

    fn epair_from(&self, last: Option<usize>, cur: usize, a: Letter) -> Option<usize> {
        self.pt[cur][self.vst(a)].last().copied().or(last)
    }

    /// Last edge of `edgeonly(infl(y·a))`, as a directed edge index.
    pub fn epair_index(&self, y: &[Letter], a: Letter) -> Option<usize> {
        let (last, cur) = self.track(y);
        self.epair_from(last, cur, a)
    }

    /// [`Gog::epair_index`] as the edge letter of Ã.
    pub fn epair(&self, y: &[Letter], a: Letter) -> Option<Letter> {
        self.epair_index(y, a).map(|d| Letter(self.edges[d].tilde as u32))
    }

    /// Maximal suffix of `w` over the letters of vertex `u`.
    pub fn suf(&self, u: &str, w: &[Letter]) -> Result<Word> {
        Ok(self.suf_at(self.vertex_of(u)?, w).to_vec())
    }

    fn suf_at<'a>(&self, u: usize, w: &'a [Letter]) -> &'a [Letter] {
        let i = w.iter().rposition(|a| !matches!(self.kinds[a.idx()], Kind::Vertex(v, _) if v == u)).map_or(0, |i| i + 1);
        &w[i..]
    }

    fn to_local(&self, v: usize, w: &[Letter]) -> Word {
        w.iter().map(|a| Letter((a.idx() - self.offsets[v]) as u32)).collect()
    }

    fn to_global(&self, v: usize, w: &[Letter]) -> Word {
        w.iter().map(|a| Letter((a.idx() + self.offsets[v]) as u32)).collect()
    }

    fn phi_impl(&self, y: &[Letter], a: Letter) -> Result<Word> {
        let Kind::Vertex(u, la) = self.kinds[a.idx()] else {
            return Ok(vec![a]);
        };
        let la = Letter(la as u32);
        let f = self.epair_index(y, a);
        let suf = self.suf_at(u, y);
        match f {
            Some(d) => {
                let e = &self.edges[d];
                if suf.is_empty() && e.structure.in_subgroup_alphabet(la) {
                    let hat = e.hat[la.idx()].as_ref().expect("checked at build");
                    return Ok(match e.global {
                        Some(g) => {
                            let inv = self.edges[e.inv].global.expect("non-tree pair");
                            let mut w = vec![Letter(inv as u32)];
                            w.extend_from_slice(hat);
                            w.push(Letter(g as u32));
                            w
                        }
                        None => hat.clone(),
                    });
                }
                let s = e.structure.base();
                let w = s.phi_eval(&self.to_local(u, suf), la).map_err(|err| provenance(&e.name, err))?;
                Ok(self.to_global(u, &w))
            }
            None => {
                let w = self.base.phi_eval(&self.to_local(u, suf), la).map_err(|err| provenance("base", err))?;
                Ok(self.to_global(u, &w))
            }
        }
    }

    fn component_graph(s: &AutostackableStructure) -> Result<Fsa> {
        match s.graph_phi() {
            Some(g) => Ok(g.clone()),
            None => s.compile_state_table_graph(),
        }
    }

    /// Graph(Φ) from the component graphs, assembled piece by piece: fixed
    /// non-tree edges, the languages
    /// `L_{f,a} = R_{f,a} ∩ S_a`, and `L′_{f,a,w}` built from `R_{f,a}`,
    /// `S_a` and `Q_{f,a,w}`.
    pub fn compile_graph(&self) -> Result<Fsa> {
        let names = self.alphabet.names().to_vec();
        let k = names.len();
        let nv = self.vertices.len();
        let ne = self.edges.len();
        // tracker: state = last * nv + cur with last = 0 for none, d + 1 otherwise
        let n_track = (ne + 1) * nv;
        let enc = |last: Option<usize>, cur: usize| last.map_or(0, |d| d + 1) * nv + cur;
        let mut delta = vec![0u32; n_track * k];
        for last in 0..=ne {
            let l = if last == 0 { None } else { Some(last - 1) };
            for cur in 0..nv {
                for a in 0..k {
                    let (l2, c2) = self.track_step(l, cur, Letter(a as u32));
                    delta[enc(l, cur) * k + a] = enc(l2, c2) as u32;
                }
            }
        }
        let tracker = |a: Letter, f: Option<usize>| {
            let accept = (0..n_track)
                .map(|s| {
                    let l = if s / nv == 0 { None } else { Some(s / nv - 1) };
                    self.epair_from(l, s % nv, a) == f
                })
                .collect();
            Fsa::from_table(names.clone(), enc(None, self.v0), accept, delta.clone())
        };
        let eps = Fsa::finite(names.clone(), &[vec![]]);
        let mut pieces: Vec<Fsa> = Vec::new();
        for a in self.alphabet.letters() {
            let Kind::Vertex(u, la) = self.kinds[a.idx()] else {
                pieces.push(triple(&self.nf, a, &[a], &names));
                continue;
            };
            let la = Letter(la as u32);
            // S_a: empty or ending outside A_u
            let mut s_trans = Vec::new();
            for c in 0..k {
                let inside = matches!(self.kinds[c], Kind::Vertex(v, _) if v == u);
                s_trans.push((0, c, usize::from(inside)));
                s_trans.push((1, c, usize::from(inside)));
            }
            let s_a = Fsa::from_partial(names.clone(), 2, 0, &[0], &s_trans)?.intersection(&self.nf).minimize();
            let not_s_a = self.nf.difference(&s_a).minimize();
            let mut candidates: Vec<Option<usize>> = vec![None];
            candidates.extend((0..ne).map(Some));
            for f in candidates {
                let r = self.nf.intersection(&tracker(a, f)).minimize();
                if r.is_empty() {
                    continue;
                }
                let comp = match f {
                    Some(d) => {
                        if self.edges[d].to != u {
                            continue;
                        }
                        self.edges[d].structure.base()
                    }
                    None => {
                        if u != self.v0 {
                            continue;
                        }
                        &self.base
                    }
                };
                let in_b = f.is_some_and(|d| self.edges[d].structure.in_subgroup_alphabet(la));
                if in_b {
                    let d = f.expect("edge");
                    let l = r.intersection(&s_a).minimize();
                    let y = vec![];
                    let w = self.phi_impl(&y, a).ok().filter(|_| false);
                    let _ = w;
                    let e = &self.edges[d];
                    let hat = e.hat[la.idx()].clone().expect("checked");
                    let value = match e.global {
                        Some(g) => {
                            let mut v = vec![Letter(self.edges[e.inv].global.expect("pair") as u32)];
                            v.extend(hat);
                            v.push(Letter(g as u32));
                            v
                        }
                        None => hat,
                    };
                    if !l.is_empty() {
                        pieces.push(triple(&l, a, &value, &names));
                    }
                }
                // Q_{f,a,w} for every value w of the component at letter a
                let g = Self::component_graph(comp)?;
                let lk = comp.alphabet().len();
                let lnames = comp.alphabet().names().to_vec();
                let univ = Fsa::universal(lnames.clone());
                let sa = Fsa::finite(lnames.clone(), &[vec![la.idx()]]);
                let (pa, with_a) = product(&[&univ, &sa, &univ]);
                let g_a = g.intersection(&with_a.relabel(g.symbols().to_vec())).minimize();
                let values = projection(&g_a, &pa, 2, lnames.clone()).minimize();
                let map = self.local_map(u);
                for wv in values.enumerate_upto(comp.bound()) {
                    let sw = Fsa::finite(lnames.clone(), std::slice::from_ref(&wv));
                    let (_, with_w) = product(&[&univ, &sa, &sw]);
                    let gw = g.intersection(&with_w.relabel(g.symbols().to_vec())).minimize();
                    let p1 = projection(&gw, &pa, 0, lnames.clone()).embed(&map, names.clone());
                    let q = self.nf.intersection(&s_a.union(&eps).concat(&p1)).minimize();
                    let l = if in_b { r.intersection(&not_s_a).intersection(&q) } else { r.intersection(&q) }.minimize();
                    if l.is_empty() {
                        continue;
                    }
                    let w: Word = wv.iter().map(|&x| Letter((x + self.offsets[u]) as u32)).collect();
                    pieces.push(triple(&l, a, &w, &names));
                }
                let _ = lk;
            }
        }
        let mut acc: Option<Fsa> = None;
        for p in pieces {
            acc = Some(match acc {
                None => p,
                Some(m) => m.union(&p).minimize(),
            });
        }
        Ok(acc.expect("alphabet is nonempty"))
    }
}

fn provenance(component: &str, err: Error) -> Error {
    match err {
        Error::BoundViolation { .. } | Error::NotANormalForm(_) => {
            Error::SpecInvariantViolation(format!("component `{component}`: {err}"))
        }
        other => other,
    }
}

struct GogMap(Arc<Gog>);

impl ComposedMap for GogMap {
    fn phi(&self, y: &[Letter], a: Letter) -> Result<Word> {
        self.0.phi_impl(y, a)
    }

    fn recipe(&self) -> serde_json::Value {
        self.0.recipe.clone()
    }
}

fn respecting_json(r: &RespectingStructure) -> serde_json::Value {
    serde_json::json!({
        "structure": r.base().to_json(),
        "subgroup": r.alphabet().to_names(&r.subgroup_letters()),
    })
}

fn spec_recipe(spec: &GraphOfGroupsSpec) -> serde_json::Value {
    let edges: Vec<serde_json::Value> = spec
        .edges
        .iter()
        .map(|e| {
            serde_json::json!({
                "name": e.name, "inverse": e.inverse, "from": e.from, "to": e.to, "tree": e.tree,
                "forward": { "respecting": respecting_json(&e.forward.structure), "hat": e.forward.hat },
                "backward": { "respecting": respecting_json(&e.backward.structure), "hat": e.backward.hat },
            })
        })
        .collect();
    serde_json::json!({
        "combinator": "gog",
        "name": spec.name,
        "vertices": spec.vertices,
        "base_vertex": spec.base_vertex,
        "base": spec.base.to_json(),
        "edges": edges,
    })
}

/// `(Ñ, Nf)` together with the compiled data.
pub fn gog_normal_forms(spec: &GraphOfGroupsSpec) -> Result<(Fsa, Fsa)> {
    let g = Gog::build(spec)?;
    Ok((g.nf_tilde.clone(), g.nf.clone()))
}

/// Builds the composed structure; deflation injectivity is checked on Ñ
/// words of length ≤ 6.
pub fn gog_compose(spec: &GraphOfGroupsSpec) -> Result<AutostackableStructure> {
    Ok(gog_compose_with_data(spec)?.0)
}

/// As [`gog_compose`], also returning the inflation/deflation machinery.
pub fn gog_compose_with_data(spec: &GraphOfGroupsSpec) -> Result<(AutostackableStructure, Arc<Gog>)> {
    let g = Arc::new(Gog::build(spec)?);
    g.check_deflation_injective(6)?;
    let s = AutostackableStructure::new(
        &g.name,
        g.alphabet.clone(),
        g.nf.clone(),
        StackingMap::Composed(Arc::new(GogMap(g.clone()))),
        g.bound,
    )?;
    Ok((s, g))
}

/// Composed structure carrying Graph(Φ) assembled from the components.
pub fn gog_compose_compiled(spec: &GraphOfGroupsSpec) -> Result<AutostackableStructure> {
    let (s, g) = gog_compose_with_data(spec)?;
    let graph = g.compile_graph()?;
    Ok(s.with_graph_phi(graph))
}

/// Letters of `w` that never occur in words of the language `l`.
pub fn unused_letters(l: &Fsa) -> HashSet<usize> {
    let reach = l.reachable();
    let co = l.coreachable();
    let mut used = HashSet::new();
    for q in 0..l.num_states() {
        if !(reach[q] && co[q]) {
            continue;
        }
        for a in 0..l.num_symbols() {
            if co[l.step(q, a)] {
                used.insert(a);
            }
        }
    }
    (0..l.num_symbols()).filter(|a| !used.contains(a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{amalgam_spec, free_group, free_product_spec, klein_hnn_spec, torus_knot_spec};

    fn parse(al: &Alphabet, s: &str) -> Word {
        al.parse(s).unwrap()
    }

    #[test]
    fn tree_paths_and_inflation() {
        let (_, g) = gog_compose_with_data(&free_product_spec().unwrap()).unwrap();
        let (al, t) = (g.alphabet().clone(), g.tilde_alphabet().clone());
        assert_eq!(g.pt("u", "v").unwrap(), parse(&t, "f"));
        assert_eq!(g.pt("v", "u").unwrap(), parse(&t, "f^-1"));
        assert!(g.pt("u", "u").unwrap().is_empty());
        assert!(matches!(g.pt("u", "w"), Err(Error::UnknownVertex(_))));

        let w = parse(&al, "x y y x^-1");
        let inflated = g.infl(&w);
        assert_eq!(inflated, parse(&t, "x f y y f^-1 x^-1"));
        assert_eq!(g.defl(&inflated), w);
        assert_eq!(g.trim(&parse(&t, "x f")), parse(&t, "x"));
        assert_eq!(g.edgeonly(&inflated), parse(&t, "f f^-1"));
        assert_eq!(g.suf("v", &w).unwrap(), Vec::<Letter>::new());
        assert_eq!(g.suf("u", &w).unwrap(), parse(&al, "x^-1"));
    }

    #[test]
    fn last_edge_of_the_inflated_path() {
        let (_, g) = gog_compose_with_data(&free_product_spec().unwrap()).unwrap();
        let (al, t) = (g.alphabet().clone(), g.tilde_alphabet().clone());
        let x = parse(&al, "x")[0];
        let y = parse(&al, "y")[0];
        assert_eq!(g.epair(&[], x), None);
        assert_eq!(g.epair(&[], y), Some(parse(&t, "f")[0]));
        assert_eq!(g.epair(&parse(&al, "y"), x), Some(parse(&t, "f^-1")[0]));
        assert_eq!(g.epair(&parse(&al, "y x"), x), Some(parse(&t, "f^-1")[0]));
        assert_eq!(g.epair(&parse(&al, "y x"), y), Some(parse(&t, "f")[0]));
    }

    #[test]
    fn free_product_normal_forms_are_reduced_words() {
        let (_, nf) = gog_normal_forms(&free_product_spec().unwrap()).unwrap();
        let reduced = free_group(&["x", "y"]).unwrap();
        assert!(nf.equivalent(reduced.nf()));
    }

    #[test]
    fn relators_are_trivial() {
        let cases = [
            (klein_hnn_spec().unwrap(), vec!["e a e^-1 a", "e a^-1 e^-1 a^-1", "a e a e^-1"]),
            (torus_knot_spec(2, 3).unwrap(), vec!["x x y^-1 y^-1 y^-1", "X Y^-1", "x x X^-1", "y y y Y^-1"]),
            (amalgam_spec().unwrap(), vec!["a c^-1", "b c b^-1 a^-1", "a d a^-1 d^-1"]),
        ];
        for (spec, rels) in cases {
            let s = gog_compose(&spec).unwrap();
            for r in rels {
                assert!(s.is_trivial(&parse(s.alphabet(), r), None).unwrap(), "{} {r}", spec.name);
            }
            assert!(!s.is_trivial(&parse(s.alphabet(), s.alphabet().names()[0].as_str()), None).unwrap());
        }
    }

    #[test]
    fn subgroup_letters_cross_the_last_edge() {
        let (s, _) = gog_compose_with_data(&torus_knot_spec(2, 3).unwrap()).unwrap();
        let al = s.alphabet();
        // inside the v block Y flows through the vertex structure; right after f it crosses
        let y = parse(al, "x y");
        assert_eq!(s.phi_eval(&y, parse(al, "Y")[0]).unwrap(), parse(al, "y^-1 Y y"));
        assert_eq!(s.phi_eval(&parse(al, "x"), parse(al, "Y")[0]).unwrap(), parse(al, "X"));
        let (k, _) = gog_compose_with_data(&klein_hnn_spec().unwrap()).unwrap();
        let ka = k.alphabet();
        assert_eq!(k.phi_eval(&parse(ka, "e"), parse(ka, "a")[0]).unwrap(), parse(ka, "e^-1 a^-1 e"));
    }

    #[test]
    fn compiled_graphs_agree_with_phi() {
        for spec in [free_product_spec().unwrap(), klein_hnn_spec().unwrap(), torus_knot_spec(2, 3).unwrap()] {
            let s = gog_compose_compiled(&spec).unwrap();
            s.cross_check(4).unwrap_or_else(|e| panic!("{}: {e}", spec.name));
        }
    }

    #[test]
    fn hats_must_be_subgroup_words() {
        let mut spec = torus_knot_spec(2, 3).unwrap();
        spec.edges[0].forward.hat[0].1 = vec!["x".into()];
        assert!(gog_compose(&spec).is_err());
        let mut spec = torus_knot_spec(2, 3).unwrap();
        spec.edges[0].forward.hat.clear();
        assert!(gog_compose(&spec).is_err());
    }
}
