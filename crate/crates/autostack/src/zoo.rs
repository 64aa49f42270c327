//! Ready-made structures with matching oracles. Hand-written state tables
//! cover the base cases; everything else is assembled by the combinators.

use std::sync::Arc;

use crate::automata::Fsa;
use crate::constructions::coset::{coset_compose, CosetAutomaticData};
use crate::constructions::extension::{extension_compose, CollectingRewriter, ExtensionSpec};
use crate::constructions::finite_index::{finite_index_compose, FiniteIndexSpec};
use crate::constructions::gog::{gog_compose, DirectedEdgeData, EdgeDecl, GraphOfGroupsSpec};
use crate::constructions::rws::{from_rewriting_system, RewritingSystem};
use crate::error::{Error, Result};
use crate::oracles::{
    dihedral_oracle, free_oracle, free_product_oracle, heisenberg_oracle, klein_oracle, sol_oracle, torus_knot_oracle,
    trefoil_oracle, zn_names, zn_oracle, ElementOracle, FreeProductModel, Key, ProductModel, VectorModel,
};
use crate::stacking::{AutostackableStructure, RespectingStructure};
use crate::words::{Alphabet, Letter, Word};

/// Subgroup membership on oracle keys.
pub type Membership = Arc<dyn Fn(&Key) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub structure: AutostackableStructure,
    pub respecting: Option<RespectingStructure>,
    pub oracle: Option<ElementOracle>,
    pub in_h: Option<Membership>,
}

impl std::fmt::Debug for ZooEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZooEntry").field("name", &self.name).field("structure", &self.structure).finish()
    }
}

/// Catalog names with one-line descriptions.
pub const CATALOG: &[(&str, &str)] = &[
    ("Z", "integers, shortlex"),
    ("Z2", "free abelian of rank 2, shortlex state table"),
    ("Z3", "free abelian of rank 3, shortlex state table"),
    ("F2", "free group of rank 2, freely reduced words"),
    ("F3", "free group of rank 3, freely reduced words"),
    ("Z-mod-2", "Z over a, X = a² respecting ⟨X⟩"),
    ("Z-mod-3", "Z over a, X = a³ respecting ⟨X⟩"),
    ("klein-rs", "Klein bottle group from a convergent rewriting system"),
    ("z2*z3", "Z/2 * Z/3 from a convergent rewriting system"),
    ("klein-hnn", "Klein bottle group as an HNN extension of Z"),
    ("z*z", "free product Z * Z as a graph of groups"),
    ("trefoil", "⟨x, y | x² = y³⟩ as an amalgam of two copies of Z"),
    ("torus-2-5", "⟨x, y | x² = y⁵⟩ as an amalgam of two copies of Z"),
    ("z2-amalgam-z2", "Z² *_Z Z² glued along a primitive element (≅ Z × F2)"),
    ("heisenberg", "integer Heisenberg group as an extension of Z² by Z, respecting ⟨c, a⟩"),
    ("sol", "Z² ⋊ Z with monodromy [[2,1],[1,1]], respecting the fiber"),
    ("dihedral", "infinite dihedral group over ⟨a⟩ of index 2"),
    ("f2-coset-a", "F2 from the coset automatic pair (F2, ⟨a⟩)"),
];

pub fn zoo_names() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).collect()
}

fn describe(name: &str) -> Result<(&'static str, &'static str)> {
    CATALOG.iter().find(|(n, _)| *n == name).copied().ok_or_else(|| Error::Input(format!("unknown zoo entry `{name}`")))
}

/// Builds a catalog entry.
pub fn zoo(name: &str) -> Result<ZooEntry> {
    let (name, description) = describe(name)?;
    let entry = |structure: AutostackableStructure, oracle: Option<ElementOracle>| ZooEntry {
        name,
        description,
        structure,
        respecting: None,
        oracle,
        in_h: None,
    };
    let with_sub = |r: RespectingStructure, oracle: ElementOracle, in_h: Membership| ZooEntry {
        name,
        description,
        structure: r.base().clone(),
        respecting: Some(r),
        oracle: Some(oracle),
        in_h: Some(in_h),
    };
    Ok(match name {
        "Z" => entry(zn(1)?, Some(zn_oracle(1))),
        "Z2" => entry(zn(2)?, Some(zn_oracle(2))),
        "Z3" => entry(zn(3)?, Some(zn_oracle(3))),
        "F2" => entry(free_group(&["a", "b"])?, Some(free_oracle(&["a", "b"]))),
        "F3" => entry(free_group(&["a", "b", "c"])?, Some(free_oracle(&["a", "b", "c"]))),
        "Z-mod-2" | "Z-mod-3" => {
            let m = if name == "Z-mod-2" { 2 } else { 3 };
            let r = z_respecting_multiple("a", "X", m)?;
            let o = zn_oracle(1).translate(name, r.alphabet(), &[("X", &vec!["a"; m].join(" "))])?;
            with_sub(r, o, Arc::new(move |k: &Key| k[0] % m as i64 == 0))
        }
        "klein-rs" => entry(from_rewriting_system("klein-rs", klein_rewriting_system())?, Some(klein_oracle())),
        "z2*z3" => entry(
            from_rewriting_system("z2*z3", z2_z3_rewriting_system())?,
            Some(free_product_oracle("Z2*Z3", &["a", "b"], &[2, 3])),
        ),
        "klein-hnn" => {
            let s = gog_compose(&klein_hnn_spec()?)?;
            let o = klein_oracle().translate("klein", &Alphabet::from_generators(&["a", "e"]), &[("e", "b")])?;
            entry(s, Some(o))
        }
        "z*z" => entry(gog_compose(&free_product_spec()?)?, Some(free_product_oracle("Z*Z", &["x", "y"], &[0, 0]))),
        "trefoil" => {
            let s = gog_compose(&torus_knot_spec(2, 3)?)?;
            let o = trefoil_oracle().translate("trefoil", s.alphabet(), &[("X", "x x"), ("Y", "y y y")])?;
            entry(s, Some(o))
        }
        "torus-2-5" => {
            let s = gog_compose(&torus_knot_spec(2, 5)?)?;
            let o = torus_knot_oracle(2, 5).translate("torus(2,5)", s.alphabet(), &[("X", "x x"), ("Y", "y y y y y")])?;
            entry(s, Some(o))
        }
        "z2-amalgam-z2" => entry(gog_compose(&amalgam_spec()?)?, Some(amalgam_oracle())),
        "heisenberg" => {
            let r = extension_compose(&heisenberg_spec()?)?;
            with_sub(r, heisenberg_oracle(), Arc::new(|k: &Key| k[1] == 0))
        }
        "sol" => {
            let r = extension_compose(&sol_spec()?)?;
            with_sub(r, sol_oracle(), Arc::new(|k: &Key| k[2] == 0))
        }
        "dihedral" => {
            let r = finite_index_compose(&dihedral_spec()?)?;
            let o = dihedral_oracle().translate("dihedral", r.alphabet(), &[])?;
            with_sub(r, o, Arc::new(|k: &Key| k[0] == 1))
        }
        "f2-coset-a" => {
            let data = Arc::new(f2_coset_data()?);
            let r = coset_compose("f2-coset-a", &zn_named(&["h"])?, data)?;
            let o = free_oracle(&["a", "b"]).translate("F2", r.alphabet(), &[("h", "a")])?;
            with_sub(r, o, Arc::new(free_cyclic_membership))
        }
        _ => unreachable!("catalog and match agree"),
    })
}

/// Shortlex `Zⁿ`: words `a₁^{e₁} ⋯ aₙ^{eₙ}`. An edge `a` leaving a word
/// whose last letter `l` belongs to a later generator flows along
/// `l⁻¹ a l`; every other edge is in the tree.
pub fn zn(n: usize) -> Result<AutostackableStructure> {
    zn_named(&zn_names(n).iter().map(String::as_str).collect::<Vec<_>>())
}

/// [`zn`] over the given generator names.
pub fn zn_named(gens: &[&str]) -> Result<AutostackableStructure> {
    let al = Alphabet::from_generators(gens);
    let k = al.len();
    let mut t = Vec::new();
    for a in 0..k {
        t.push((0, a, a + 1));
        for b in 0..k {
            if b / 2 > a / 2 || b == a {
                t.push((a + 1, b, b + 1));
            }
        }
    }
    let accept: Vec<usize> = (0..=k).collect();
    let nf = Fsa::from_partial(al.names().to_vec(), k + 1, 0, &accept, &t)?;
    let al2 = al.clone();
    let name = if gens.len() == 1 { "Z".to_string() } else { format!("Z{}", gens.len()) };
    AutostackableStructure::from_state_fn(&name, al, nf, move |y, a| match y.last() {
        Some(&l) if l.idx() / 2 > a.idx() / 2 => vec![al2.inv(l), a, l],
        _ => vec![a],
    })
}

/// Free group: freely reduced words, every edge in the tree.
pub fn free_group(gens: &[&str]) -> Result<AutostackableStructure> {
    let al = Alphabet::from_generators(gens);
    let k = al.len();
    let mut t = Vec::new();
    for a in 0..k {
        t.push((0, a, a + 1));
        for b in 0..k {
            if b != al.inv(Letter(a as u32)).idx() {
                t.push((a + 1, b, b + 1));
            }
        }
    }
    let accept: Vec<usize> = (0..=k).collect();
    let nf = Fsa::from_partial(al.names().to_vec(), k + 1, 0, &accept, &t)?;
    AutostackableStructure::from_state_fn(&format!("F{}", gens.len()), al, nf, |_, a| vec![a])
}

/// `Z = ⟨a⟩` over `a±, X±` with `X = aᵐ`, respecting `⟨X⟩`. Normal forms
/// are `Xᵏ aⁱ` with `0 ≤ i < m`.
pub fn z_respecting_multiple(gen: &str, big: &str, m: usize) -> Result<RespectingStructure> {
    if m < 2 {
        return Err(Error::Input("the multiple must be at least 2".into()));
    }
    let al = Alphabet::from_generators(&[gen, big]);
    let (a, ai, x, xi) = (0, 1, 2, 3);
    // states: 0 start; 1 X⁺ block; 2 X⁻ block; 2 + i after aⁱ (1 ≤ i < m)
    let mut t = vec![(0, x, 1), (0, xi, 2), (1, x, 1), (2, xi, 2)];
    for from in [0, 1, 2] {
        t.push((from, a, 3));
    }
    for i in 1..m - 1 {
        t.push((2 + i, a, 3 + i));
    }
    let n = m + 2;
    let accept: Vec<usize> = (0..n).collect();
    let nf = Fsa::from_partial(al.names().to_vec(), n, 0, &accept, &t)?;
    let name = format!("Z-mod-{m}");
    let s = AutostackableStructure::from_state_fn(&name, al.clone(), nf, move |y, l| {
        let i = y.iter().filter(|c| c.idx() == a).count();
        let pow = |c: usize, e: usize| vec![Letter(c as u32); e];
        match l.idx() {
            c if c == a && i == m - 1 => [pow(ai, m - 1), pow(x, 1)].concat(),
            c if c == ai && i == 0 => [pow(xi, 1), pow(a, m - 1)].concat(),
            c if (c == x || c == xi) && i > 0 => [pow(ai, i), pow(c, 1), pow(a, i)].concat(),
            _ => vec![l],
        }
    })?;
    RespectingStructure::new(s, &[Letter(x as u32), Letter(xi as u32)])
}

pub fn klein_rewriting_system() -> RewritingSystem {
    let al = Alphabet::from_generators(&["a", "b"]);
    RewritingSystem::parse(
        al,
        &[("b a", "a^-1 b"), ("b a^-1", "a b"), ("b^-1 a", "a^-1 b^-1"), ("b^-1 a^-1", "a b^-1")],
    )
    .expect("static system")
    .with_free_cancellation()
}

pub fn z2_z3_rewriting_system() -> RewritingSystem {
    let al = Alphabet::from_generators(&["a", "b"]);
    RewritingSystem::parse(
        al,
        &[("a^-1", "a"), ("a a", ""), ("b b", "b^-1"), ("b^-1 b^-1", "b"), ("b b^-1", ""), ("b^-1 b", "")],
    )
    .expect("static system")
}

fn edge(
    name: &str,
    from: &str,
    to: &str,
    tree: bool,
    forward: (RespectingStructure, &[(&str, &str)]),
    backward: (RespectingStructure, &[(&str, &str)]),
) -> EdgeDecl {
    let hat = |h: &[(&str, &str)]| {
        h.iter().map(|(a, w)| (a.to_string(), w.split_whitespace().map(str::to_string).collect())).collect()
    };
    EdgeDecl {
        name: name.to_string(),
        inverse: crate::words::inverse_name(name),
        from: from.to_string(),
        to: to.to_string(),
        tree,
        forward: DirectedEdgeData { structure: forward.0, hat: hat(forward.1) },
        backward: DirectedEdgeData { structure: backward.0, hat: hat(backward.1) },
    }
}

/// Single vertex `Z = ⟨a⟩`, one loop `e` acting by inversion.
pub fn klein_hnn_spec() -> Result<GraphOfGroupsSpec> {
    let z = zn_named(&["a"])?;
    let whole = RespectingStructure::whole_group(z.clone())?;
    let inv: &[(&str, &str)] = &[("a", "a^-1"), ("a^-1", "a")];
    Ok(GraphOfGroupsSpec {
        name: "klein-hnn".into(),
        vertices: vec!["u".into()],
        base_vertex: "u".into(),
        base: z,
        edges: vec![edge("e", "u", "u", false, (whole.clone(), inv), (whole, inv))],
    })
}

/// Two copies of `Z` joined by a tree edge with trivial edge group.
pub fn free_product_spec() -> Result<GraphOfGroupsSpec> {
    let zx = zn_named(&["x"])?;
    let zy = zn_named(&["y"])?;
    Ok(GraphOfGroupsSpec {
        name: "z*z".into(),
        vertices: vec!["u".into(), "v".into()],
        base_vertex: "u".into(),
        base: zx.clone(),
        edges: vec![edge(
            "f",
            "u",
            "v",
            true,
            (RespectingStructure::trivial_subgroup(zy)?, &[]),
            (RespectingStructure::trivial_subgroup(zx)?, &[]),
        )],
    })
}

/// `⟨x, y | xᵖ = y^q⟩` glued along `X = xᵖ` and `Y = y^q`.
pub fn torus_knot_spec(p: usize, q: usize) -> Result<GraphOfGroupsSpec> {
    let u = z_respecting_multiple("x", "X", p)?;
    let v = z_respecting_multiple("y", "Y", q)?;
    Ok(GraphOfGroupsSpec {
        name: if (p, q) == (2, 3) { "trefoil".into() } else { format!("torus-{p}-{q}") },
        vertices: vec!["u".into(), "v".into()],
        base_vertex: "u".into(),
        base: u.base().clone(),
        edges: vec![edge(
            "f",
            "u",
            "v",
            true,
            (v, &[("Y", "X"), ("Y^-1", "X^-1")]),
            (u, &[("X", "Y"), ("X^-1", "Y^-1")]),
        )],
    })
}

/// `⟨a, b⟩ × ⟨c, d⟩` amalgamated along `a = c`.
pub fn amalgam_spec() -> Result<GraphOfGroupsSpec> {
    let zu = zn_named(&["a", "b"])?;
    let zv = zn_named(&["c", "d"])?;
    let ru = RespectingStructure::new(zu.clone(), &[Letter(0), Letter(1)])?;
    let rv = RespectingStructure::new(zv, &[Letter(0), Letter(1)])?;
    Ok(GraphOfGroupsSpec {
        name: "z2-amalgam-z2".into(),
        vertices: vec!["u".into(), "v".into()],
        base_vertex: "u".into(),
        base: zu,
        edges: vec![edge(
            "f",
            "u",
            "v",
            true,
            (rv, &[("c", "a"), ("c^-1", "a^-1")]),
            (ru, &[("a", "c"), ("a^-1", "c^-1")]),
        )],
    })
}

/// `Z × F(b, d)` with `a = c` central.
pub fn amalgam_oracle() -> ElementOracle {
    let fp = FreeProductModel { orders: vec![0, 0] };
    let (gb, gd) = (fp.generator(0), fp.generator(1));
    let m = ProductModel { left: Arc::new(VectorModel(1)), left_len: 1, right: Arc::new(fp) };
    let al = Alphabet::from_generators(&["a", "b", "c", "d"]);
    let with = |z: i64, f: &[i64]| {
        let mut k = vec![z];
        k.extend(f.iter().copied());
        k
    };
    ElementOracle::new("Z×F2", al, Arc::new(m), &[with(1, &[]), with(0, &gb), with(1, &[]), with(0, &gd)])
}

/// Kernel normal form of an oracle key through a known word map.
fn kernel_word(k: &AutostackableStructure, w: Word) -> Word {
    k.normal_form(&w, None).expect("kernel words reduce")
}

/// Heisenberg group: kernel `⟨c⟩`, quotient shortlex `Z²` respecting `⟨a⟩`.
pub fn heisenberg_spec() -> Result<ExtensionSpec> {
    let k = zn_named(&["c"])?;
    let q = RespectingStructure::new(zn_named(&["a", "b"])?, &[Letter(0), Letter(1)])?;
    let lifts: Vec<String> = q.alphabet().names().to_vec();
    let o = heisenberg_oracle();
    let kk = k.clone();
    let rw = CollectingRewriter::from_fns(
        &k,
        q.base(),
        &lifts,
        |_, x| vec![x],
        |c, u| {
            // ĉ · hat(u)⁻¹ = c^z; letters of Q and of the lifts share names
            let mut w = vec![Letter(c.idx() as u32 + 2)];
            w.extend(u.iter().rev().map(|x| Letter((x.idx() ^ 1) as u32 + 2)));
            let z = o.eval(&w)[2];
            let gen = if z >= 0 { 0 } else { 1 };
            kernel_word(&kk, vec![Letter(gen); z.unsigned_abs() as usize])
        },
    )?;
    Ok(ExtensionSpec {
        name: "heisenberg".into(),
        k_structure: k,
        q_structure: q,
        lifts,
        k_rewriter: Arc::new(rw),
    })
}

/// Sol lattice: kernel shortlex `Z² = ⟨p, q⟩`, quotient `Z = ⟨t⟩`
/// respecting the trivial subgroup.
pub fn sol_spec() -> Result<ExtensionSpec> {
    let k = zn_named(&["p", "q"])?;
    let q = RespectingStructure::trivial_subgroup(zn_named(&["t"])?)?;
    let lifts: Vec<String> = q.alphabet().names().to_vec();
    let o = sol_oracle();
    let kk = k.clone();
    let to_word = move |key: &Key| {
        let mut w = Vec::new();
        for (i, &e) in key[..2].iter().enumerate() {
            let l = Letter((2 * i + usize::from(e < 0)) as u32);
            w.extend(std::iter::repeat_n(l, e.unsigned_abs() as usize));
        }
        kernel_word(&kk, w)
    };
    let rw = CollectingRewriter::from_fns(
        &k,
        q.base(),
        &lifts,
        |c, x| {
            let t = Letter(c.idx() as u32 + 4);
            let ti = Letter((c.idx() ^ 1) as u32 + 4);
            to_word(&o.eval(&[t, x, ti]))
        },
        |c, u| {
            let mut w = vec![Letter(c.idx() as u32 + 4)];
            w.extend(u.iter().rev().map(|x| Letter((x.idx() ^ 1) as u32 + 4)));
            to_word(&o.eval(&w))
        },
    )?;
    Ok(ExtensionSpec { name: "sol".into(), k_structure: k, q_structure: q, lifts, k_rewriter: Arc::new(rw) })
}

/// `⟨a, b | b², b a b a⟩` over `H = ⟨a⟩` with transversal `{ε, b}`.
pub fn dihedral_spec() -> Result<FiniteIndexSpec> {
    let w = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    Ok(FiniteIndexSpec {
        name: "dihedral".into(),
        h: zn_named(&["a"])?,
        extra: vec![("b".into(), "b".into())],
        transversal: vec![vec![], w("b")],
        // letters a, a^-1, b
        action: vec![
            vec![(w("a"), 0), (w("a^-1"), 0), (vec![], 1)],
            vec![(w("a^-1"), 1), (w("a"), 1), (vec![], 0)],
        ],
    })
}

/// Reduced words over `a±, b±` not starting with `a±`.
pub fn f2_transversal() -> Fsa {
    let al = Alphabet::from_generators(&["a", "b"]);
    let mut t = vec![(0, 2, 3), (0, 3, 4)];
    for l in 0..4 {
        for c in 0..4 {
            if c != l ^ 1 {
                t.push((l + 1, c, c + 1));
            }
        }
    }
    Fsa::from_partial(al.names().to_vec(), 5, 0, &[0, 1, 2, 3, 4], &t).expect("static automaton")
}

/// Keys of `⟨a⟩` in the free-group model.
pub fn free_cyclic_membership(k: &Key) -> bool {
    k.is_empty() || (k.len() == 2 && k[0] == 0)
}

/// Coset data for `(F2, ⟨a⟩)` with fellow constant 2; the subgroup is
/// generated by `h = a`.
pub fn f2_coset_data() -> Result<CosetAutomaticData> {
    let o = free_oracle(&["a", "b"]);
    let b_al = Alphabet::from_generators(&["h"]);
    let a = o.image(Letter(0)).clone();
    let ai = o.image(Letter(1)).clone();
    CosetAutomaticData::new(o, f2_transversal(), 2, b_al, vec![a, ai], &free_cyclic_membership)
}
