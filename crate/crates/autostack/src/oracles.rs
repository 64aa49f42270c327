//! Independent models of the example groups. Keys are exact integer tuples;
//! nothing here is used by the solver, only by the verifier and tests.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

/// Canonical element key.
pub type Key = Vec<i64>;

/// A group given by canonical keys and a multiplication on them.
pub trait GroupModel: Send + Sync {
    fn identity(&self) -> Key;
    fn mul(&self, g: &Key, h: &Key) -> Key;
    fn inverse(&self, g: &Key) -> Key;
}

/// Zⁿ under addition.
pub struct VectorModel(pub usize);

impl GroupModel for VectorModel {
    fn identity(&self) -> Key {
        vec![0; self.0]
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        g.iter().zip(h).map(|(x, y)| x + y).collect()
    }
    fn inverse(&self, g: &Key) -> Key {
        g.iter().map(|x| -x).collect()
    }
}

/// Free product of cyclic groups; order 0 means Z. Keys are reduced
/// syllable sequences flattened as `[factor, exponent, factor, exponent, …]`.
pub struct FreeProductModel {
    pub orders: Vec<i64>,
}

impl FreeProductModel {
    fn norm(&self, f: i64, e: i64) -> i64 {
        let m = self.orders[f as usize];
        if m > 0 {
            e.rem_euclid(m)
        } else {
            e
        }
    }

    fn push(&self, out: &mut Key, f: i64, e: i64) {
        let n = out.len();
        if n >= 2 && out[n - 2] == f {
            let e2 = self.norm(f, out[n - 1] + e);
            out.truncate(n - 2);
            if e2 != 0 {
                out.extend([f, e2]);
            }
        } else {
            let e = self.norm(f, e);
            if e != 0 {
                out.extend([f, e]);
            }
        }
    }

    /// Key of the generator of factor `f`.
    pub fn generator(&self, f: usize) -> Key {
        let mut k = Vec::new();
        self.push(&mut k, f as i64, 1);
        k
    }
}

impl GroupModel for FreeProductModel {
    fn identity(&self) -> Key {
        Vec::new()
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        let mut out = g.clone();
        for s in h.chunks(2) {
            self.push(&mut out, s[0], s[1]);
        }
        out
    }
    fn inverse(&self, g: &Key) -> Key {
        let mut out = Vec::new();
        for s in g.chunks(2).rev() {
            self.push(&mut out, s[0], -s[1]);
        }
        out
    }
}

/// Integer Heisenberg group: `(x, y, z)` is the unitriangular matrix with
/// `x`, `y` above the diagonal and `z` in the corner.
pub struct HeisenbergModel;

impl GroupModel for HeisenbergModel {
    fn identity(&self) -> Key {
        vec![0, 0, 0]
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        vec![g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1]]
    }
    fn inverse(&self, g: &Key) -> Key {
        vec![-g[0], -g[1], g[0] * g[1] - g[2]]
    }
}

type Mat = Vec<Vec<i64>>;

fn mat_vec(m: &Mat, v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `Zᵏ ⋊_M Z` with `(v, n)(w, m) = (v + Mⁿw, n + m)`; `M` must be
/// invertible over Z.
pub struct SemidirectModel {
    m: Mat,
    m_inv: Mat,
}

impl SemidirectModel {
    pub fn new(m: Mat, m_inv: Mat) -> Self {
        let k = m.len();
        for i in 0..k {
            let e: Vec<i64> = (0..k).map(|j| i64::from(i == j)).collect();
            assert_eq!(mat_vec(&m, &mat_vec(&m_inv, &e)), e, "M_inv is not the inverse of M");
        }
        SemidirectModel { m, m_inv }
    }

    fn k(&self) -> usize {
        self.m.len()
    }

    fn act(&self, n: i64, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        let m = if n >= 0 { &self.m } else { &self.m_inv };
        for _ in 0..n.unsigned_abs() {
            v = mat_vec(m, &v);
        }
        v
    }
}

impl GroupModel for SemidirectModel {
    fn identity(&self) -> Key {
        vec![0; self.k() + 1]
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        let k = self.k();
        let w = self.act(g[k], &h[..k]);
        let mut out: Key = g[..k].iter().zip(&w).map(|(a, b)| a + b).collect();
        out.push(g[k] + h[k]);
        out
    }
    fn inverse(&self, g: &Key) -> Key {
        let k = self.k();
        let mut out: Key = self.act(-g[k], &g[..k]).into_iter().map(|x| -x).collect();
        out.push(-g[k]);
        out
    }
}

/// Isometries `x ↦ s·x + t` of Z, composed as maps.
pub struct IsometryModel;

impl GroupModel for IsometryModel {
    fn identity(&self) -> Key {
        vec![1, 0]
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        vec![g[0] * h[0], g[1] + g[0] * h[1]]
    }
    fn inverse(&self, g: &Key) -> Key {
        vec![g[0], -g[0] * g[1]]
    }
}

/// PSL(2, Z): 2×2 determinant-one matrices up to sign, with the first
/// nonzero entry made positive.
pub struct PslModel;

impl PslModel {
    fn normalize(mut m: Key) -> Key {
        if m.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            m.iter_mut().for_each(|x| *x = -*x);
        }
        m
    }
}

impl GroupModel for PslModel {
    fn identity(&self) -> Key {
        vec![1, 0, 0, 1]
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        Self::normalize(vec![
            g[0] * h[0] + g[1] * h[2],
            g[0] * h[1] + g[1] * h[3],
            g[2] * h[0] + g[3] * h[2],
            g[2] * h[1] + g[3] * h[3],
        ])
    }
    fn inverse(&self, g: &Key) -> Key {
        Self::normalize(vec![g[3], -g[1], -g[2], g[0]])
    }
}

/// Direct product; the left factor has fixed key length `left_len`.
pub struct ProductModel {
    pub left: Arc<dyn GroupModel>,
    pub left_len: usize,
    pub right: Arc<dyn GroupModel>,
}

impl GroupModel for ProductModel {
    fn identity(&self) -> Key {
        let mut k = self.left.identity();
        k.extend(self.right.identity());
        k
    }
    fn mul(&self, g: &Key, h: &Key) -> Key {
        let n = self.left_len;
        let mut k = self.left.mul(&g[..n].to_vec(), &h[..n].to_vec());
        k.extend(self.right.mul(&g[n..].to_vec(), &h[n..].to_vec()));
        k
    }
    fn inverse(&self, g: &Key) -> Key {
        let n = self.left_len;
        let mut k = self.left.inverse(&g[..n].to_vec());
        k.extend(self.right.inverse(&g[n..].to_vec()));
        k
    }
}

/// A model together with the image of every letter of an alphabet.
#[derive(Clone)]
pub struct ElementOracle {
    name: String,
    alphabet: Alphabet,
    model: Arc<dyn GroupModel>,
    images: Vec<Key>,
}

impl std::fmt::Debug for ElementOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ElementOracle").field("name", &self.name).field("alphabet", &self.alphabet).finish()
    }
}

impl ElementOracle {
    /// `images` lists one key per generator pair, in alphabet order of the
    /// first letter of each pair; inverse letters get inverse keys.
    pub fn new(name: &str, alphabet: Alphabet, model: Arc<dyn GroupModel>, gens: &[Key]) -> Self {
        let mut images = vec![Vec::new(); alphabet.len()];
        let mut it = gens.iter();
        for a in alphabet.letters() {
            if a.0 <= alphabet.inv(a).0 {
                let g = it.next().expect("one image per generator pair").clone();
                images[alphabet.inv(a).idx()] = model.inverse(&g);
                images[a.idx()] = g;
            }
        }
        ElementOracle { name: name.to_string(), alphabet, model, images }
    }

    /// The same group over another alphabet. Each letter of `alphabet` must
    /// either have a definition in `defs` (a word over this oracle's
    /// alphabet), be the inverse of such a letter, or carry a name that this
    /// oracle already knows.
    pub fn translate(&self, name: &str, alphabet: &Alphabet, defs: &[(&str, &str)]) -> Result<Self> {
        let mut images: Vec<Option<Key>> = vec![None; alphabet.len()];
        for (l, w) in defs {
            let a = alphabet.letter_or_err(l)?;
            let k = self.eval(&self.alphabet.parse(w)?);
            images[alphabet.inv(a).idx()] = Some(self.model.inverse(&k));
            images[a.idx()] = Some(k);
        }
        for a in alphabet.letters() {
            if images[a.idx()].is_none() {
                let b = self.alphabet.letter_or_err(alphabet.name(a))?;
                images[a.idx()] = Some(self.images[b.idx()].clone());
            }
        }
        Ok(ElementOracle {
            name: name.to_string(),
            alphabet: alphabet.clone(),
            model: self.model.clone(),
            images: images.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn model(&self) -> &Arc<dyn GroupModel> {
        &self.model
    }

    pub fn identity(&self) -> Key {
        self.model.identity()
    }

    pub fn image(&self, a: Letter) -> &Key {
        &self.images[a.idx()]
    }

    pub fn multiply(&self, g: &Key, a: Letter) -> Key {
        self.model.mul(g, &self.images[a.idx()])
    }

    pub fn mul_keys(&self, g: &Key, h: &Key) -> Key {
        self.model.mul(g, h)
    }

    pub fn inverse(&self, g: &Key) -> Key {
        self.model.inverse(g)
    }

    pub fn eval(&self, w: &[Letter]) -> Key {
        w.iter().fold(self.identity(), |g, &a| self.multiply(&g, a))
    }

    pub fn eval_from(&self, g: &Key, w: &[Letter]) -> Key {
        w.iter().fold(g.clone(), |g, &a| self.multiply(&g, a))
    }

    pub fn is_identity(&self, w: &[Letter]) -> bool {
        self.eval(w) == self.identity()
    }
}

/// `Zⁿ` over `a, b, …` (or `x1, x2, …` past six generators).
pub fn zn_oracle(n: usize) -> ElementOracle {
    let names = zn_names(n);
    let al = Alphabet::from_generators(&names);
    let gens: Vec<Key> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    ElementOracle::new(&format!("Z{n}"), al, Arc::new(VectorModel(n)), &gens)
}

pub fn zn_names(n: usize) -> Vec<String> {
    if n <= 6 {
        ["a", "b", "c", "d", "e", "f"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

/// Free product of cyclic groups of the given orders (0 for Z) over `gens`.
pub fn free_product_oracle(name: &str, gens: &[&str], orders: &[i64]) -> ElementOracle {
    let al = Alphabet::from_generators(gens);
    let m = FreeProductModel { orders: orders.to_vec() };
    let keys: Vec<Key> = (0..orders.len()).map(|f| m.generator(f)).collect();
    ElementOracle::new(name, al, Arc::new(m), &keys)
}

/// Free group on `gens`.
pub fn free_oracle(gens: &[&str]) -> ElementOracle {
    free_product_oracle(&format!("F{}", gens.len()), gens, &vec![0; gens.len()])
}

/// Heisenberg group over `c, a, b` with `c` central and `[a, b] = c`.
pub fn heisenberg_oracle() -> ElementOracle {
    let al = Alphabet::from_generators(&["c", "a", "b"]);
    ElementOracle::new("heisenberg", al, Arc::new(HeisenbergModel), &[vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]])
}

/// `Z² ⋊_M Z` with `M = [[2,1],[1,1]]` over `p, q, t`.
pub fn sol_oracle() -> ElementOracle {
    let m = SemidirectModel::new(vec![vec![2, 1], vec![1, 1]], vec![vec![1, -1], vec![-1, 2]]);
    let al = Alphabet::from_generators(&["p", "q", "t"]);
    ElementOracle::new("sol", al, Arc::new(m), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
}

/// Klein bottle group `Z ⋊_{-1} Z` over `a, b` with `b a b⁻¹ = a⁻¹`.
pub fn klein_oracle() -> ElementOracle {
    let m = SemidirectModel::new(vec![vec![-1]], vec![vec![-1]]);
    let al = Alphabet::from_generators(&["a", "b"]);
    ElementOracle::new("klein", al, Arc::new(m), &[vec![1, 0], vec![0, 1]])
}

/// Infinite dihedral group as isometries of Z: `a` translates, `b` reflects.
pub fn dihedral_oracle() -> ElementOracle {
    let al = Alphabet::from_generators(&["a", "b"]);
    ElementOracle::new("dihedral", al, Arc::new(IsometryModel), &[vec![1, 1], vec![-1, 0]])
}

/// Trefoil group `⟨x, y | x² = y³⟩`: image in PSL(2, Z) paired with the
/// exponent sum `x ↦ 3, y ↦ 2`. Two elements with the same PSL image differ
/// by a central power of `x²`, which the exponent sum detects.
pub fn trefoil_oracle() -> ElementOracle {
    let m = ProductModel { left: Arc::new(PslModel), left_len: 4, right: Arc::new(VectorModel(1)) };
    let al = Alphabet::from_generators(&["x", "y"]);
    ElementOracle::new("trefoil", al, Arc::new(m), &[vec![0, -1, 1, 0, 3], vec![0, -1, 1, 1, 2]])
}

/// Torus knot group `⟨x, y | xᵖ = y^q⟩`: image in `Z/p * Z/q` paired with
/// the exponent sum `x ↦ q, y ↦ p`.
pub fn torus_knot_oracle(p: i64, q: i64) -> ElementOracle {
    let fp = FreeProductModel { orders: vec![p, q] };
    let (gx, gy) = (fp.generator(0), fp.generator(1));
    let m = ProductModel { left: Arc::new(VectorModel(1)), left_len: 1, right: Arc::new(fp) };
    let al = Alphabet::from_generators(&["x", "y"]);
    let mut kx = vec![q];
    kx.extend(gx);
    let mut ky = vec![p];
    ky.extend(gy);
    ElementOracle::new(&format!("torus({p},{q})"), al, Arc::new(m), &[kx, ky])
}

/// Every built-in oracle by catalog name.
pub fn builtin_oracles() -> Vec<ElementOracle> {
    vec![
        zn_oracle(1),
        zn_oracle(2),
        zn_oracle(3),
        free_oracle(&["a", "b"]),
        free_product_oracle("Z2*Z3", &["a", "b"], &[2, 3]),
        free_product_oracle("Z*Z", &["x", "y"], &[0, 0]),
        heisenberg_oracle(),
        sol_oracle(),
        klein_oracle(),
        dihedral_oracle(),
        trefoil_oracle(),
        torus_knot_oracle(2, 5),
    ]
}

pub fn oracle_by_name(name: &str) -> Option<ElementOracle> {
    builtin_oracles().into_iter().find(|o| o.name() == name)
}

/// Closed ball with shortlex-least witnesses, in breadth-first order.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: usize,
    pub elements: Vec<(Key, Word)>,
    pub index: HashMap<Key, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &Key) -> bool {
        self.index.contains_key(g)
    }

    pub fn witness(&self, g: &Key) -> Option<&Word> {
        self.index.get(g).map(|&i| &self.elements[i].1)
    }

    /// Word length of `g` if it lies in the ball.
    pub fn dist(&self, g: &Key) -> Option<usize> {
        self.witness(g).map(Vec::len)
    }
}

/// Default cap on ball size.
pub const BALL_LIMIT: usize = 2_000_000;

/// Breadth-first closure of the identity up to `radius`.
pub fn ball_enumerate(o: &ElementOracle, radius: usize, limit: usize) -> Result<Ball> {
    let mut elements = vec![(o.identity(), Vec::new())];
    let mut index = HashMap::new();
    index.insert(o.identity(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if elements[i].1.len() == radius {
            continue;
        }
        for a in o.alphabet().letters() {
            let g = o.multiply(&elements[i].0, a);
            if index.contains_key(&g) {
                continue;
            }
            if elements.len() >= limit {
                return Err(Error::BallLimitExceeded { limit });
            }
            let mut w = elements[i].1.clone();
            w.push(a);
            index.insert(g.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push((g, w));
        }
    }
    Ok(Ball { radius, elements, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_eval() {
        let o = zn_oracle(2);
        let w = o.alphabet().parse("a b a^-1").unwrap();
        assert_eq!(o.eval(&w), vec![0, 1]);
    }

    #[test]
    fn heisenberg_commutator_is_central_generator() {
        let o = heisenberg_oracle();
        let w = o.alphabet().parse("a b a^-1 b^-1").unwrap();
        let c = o.alphabet().parse("c").unwrap();
        assert_eq!(o.eval(&w), o.eval(&c));
        assert_ne!(o.eval(&w), o.identity());
    }

    #[test]
    fn trefoil_relator() {
        let o = trefoil_oracle();
        assert!(o.is_identity(&o.alphabet().parse("x x y^-1 y^-1 y^-1").unwrap()));
        assert!(!o.is_identity(&o.alphabet().parse("x x").unwrap()));
        assert!(!o.is_identity(&o.alphabet().parse("x y").unwrap()));
        let t = torus_knot_oracle(2, 3);
        assert!(t.is_identity(&t.alphabet().parse("x x y^-1 y^-1 y^-1").unwrap()));
    }

    #[test]
    fn relators_of_semidirect_examples() {
        let k = klein_oracle();
        assert!(k.is_identity(&k.alphabet().parse("b a b^-1 a").unwrap()));
        let s = sol_oracle();
        // t p t⁻¹ = p² q
        assert!(s.is_identity(&s.alphabet().parse("t p t^-1 q^-1 p^-1 p^-1").unwrap()));
        let d = dihedral_oracle();
        assert!(d.is_identity(&d.alphabet().parse("b b").unwrap()));
        assert!(d.is_identity(&d.alphabet().parse("b a b a").unwrap()));
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_enumerate(&zn_oracle(2), 1, BALL_LIMIT).unwrap().len(), 5);
        assert_eq!(ball_enumerate(&free_oracle(&["a", "b"]), 2, BALL_LIMIT).unwrap().len(), 17);
        assert_eq!(ball_enumerate(&trefoil_oracle(), 0, BALL_LIMIT).unwrap().len(), 1);
        assert!(matches!(ball_enumerate(&free_oracle(&["a", "b"]), 5, 10), Err(Error::BallLimitExceeded { .. })));
    }

    #[test]
    fn translate_to_new_letters() {
        let o = zn_oracle(1);
        let al = Alphabet::from_generators(&["a", "X"]);
        let t = o.translate("Z/2Z", &al, &[("X", "a a")]).unwrap();
        assert_eq!(t.eval(&al.parse("X a^-1 X^-1").unwrap()), vec![-1]);
    }
}
