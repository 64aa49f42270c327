//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails. Oracles below are written
//! independently of the library's own models.

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use autostack::automata::{product, projection, Fsa};
use autostack::constructions::gog::{gog_compose_compiled, gog_normal_forms};
use autostack::oracles::{free_product_oracle, klein_oracle, ElementOracle};
use autostack::stacking::{AutostackableStructure, ComposedMap, StackingMap};
use autostack::verify::{check_prefix_closed, check_respecting, check_uniqueness, BallContext, CheckReport};
use autostack::words::{Alphabet, Letter, Word};
use autostack::zoo::{f2_coset_data, free_product_spec, klein_rewriting_system, z2_z3_rewriting_system, zoo, ZooEntry};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(r: &CheckReport) -> Result<(), String> {
    ensure(r.passed, || format!("{} failed: {:?}", r.check, r.counterexamples))
}

fn within(t: Instant, limit: u64) -> Result<String, String> {
    let e = t.elapsed();
    ensure(e < Duration::from_secs(limit), || format!("took {e:.1?}, limit {limit}s"))?;
    Ok(format!("{e:.1?}"))
}

fn letters(w: &[usize]) -> Word {
    w.iter().map(|&i| Letter(i as u32)).collect()
}

fn random_word(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Word {
    (0..n).map(|_| Letter(rng.gen_range(0..k) as u32)).collect()
}

/// All words of length ≤ n over k symbols, in shortlex order.
fn all_words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * k);
        for w in &layer {
            for a in 0..k {
                let mut v: Vec<usize> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// ---------------------------------------------------------------- 1

struct Raw {
    k: usize,
    delta: Vec<usize>,
    acc: Vec<bool>,
}

impl Raw {
    fn random(rng: &mut ChaCha8Rng, k: usize) -> Raw {
        let n = rng.gen_range(1..=6);
        Raw { k, delta: (0..n * k).map(|_| rng.gen_range(0..n)).collect(), acc: (0..n).map(|_| rng.gen_bool(0.4)).collect() }
    }

    fn n(&self) -> usize {
        self.acc.len()
    }

    fn run(&self, w: &[usize]) -> usize {
        w.iter().fold(0, |q, &a| self.delta[q * self.k + a])
    }

    fn has(&self, w: &[usize]) -> bool {
        self.acc[self.run(w)]
    }

    fn fsa(&self, names: &[String]) -> Fsa {
        Fsa::from_table(names.to_vec(), 0, self.acc.clone(), self.delta.iter().map(|&t| t as u32).collect())
    }
}

fn names(k: usize, tag: &str) -> Vec<String> {
    (0..k).map(|i| format!("{tag}{i}")).collect()
}

/// Words of length ≤ n, as an automaton.
fn up_to(k: usize, n: usize) -> Fsa {
    let trans: Vec<(usize, usize, usize)> = (0..n).flat_map(|q| (0..k).map(move |a| (q, a, q + 1))).collect();
    Fsa::from_partial(names(k, "s"), n + 1, 0, &(0..=n).collect::<Vec<_>>(), &trans).unwrap()
}

fn in_image(m: &Raw, images: &[Vec<usize>], w: &[usize]) -> bool {
    let mut seen = HashSet::from([(0usize, 0usize)]);
    let mut stack = vec![(0usize, 0usize)];
    while let Some((q, p)) = stack.pop() {
        if p == w.len() && m.acc[q] {
            return true;
        }
        for (a, img) in images.iter().enumerate() {
            if w[p..].starts_with(img) {
                let s = (m.delta[q * m.k + a], p + img.len());
                if seen.insert(s) {
                    stack.push(s);
                }
            }
        }
    }
    false
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    for round in 0..200 {
        let k = rng.gen_range(2..=4);
        let (r1, r2) = (Raw::random(&mut rng, k), Raw::random(&mut rng, k));
        let nm = names(k, "s");
        let (m1, m2) = (r1.fsa(&nm), r2.fsa(&nm));
        let kt = rng.gen_range(1..=3);
        let images: Vec<Vec<usize>> =
            (0..k).map(|_| (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..kt)).collect()).collect();
        let r3 = Raw::random(&mut rng, kt);
        let x: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..k)).collect();
        let fail = |op: &str, w: &[usize]| format!("round {round}: {op} disagrees on {w:?}");

        let union = m1.union(&m2);
        let inter = m1.intersection(&m2);
        let diff = m1.difference(&m2);
        let sym = m1.symmetric_difference(&m2);
        let comp = m1.complement();
        let cat = m1.concat(&m2);
        let star = m1.star();
        let quo = m1.quotient_by_word(&x);
        let min = m1.minimize();
        let pre = r3.fsa(&names(kt, "t")).hom_preimage(&images, nm.clone());
        let img = m1.hom_image(&images, names(kt, "t"));

        let words = all_words(k, 8);
        let mut brute_list = Vec::new();
        for w in &words {
            let (a, b) = (r1.has(w), r2.has(w));
            if a {
                brute_list.push(w.clone());
            }
            ensure(union.accepts(w) == (a || b), || fail("union", w))?;
            ensure(inter.accepts(w) == (a && b), || fail("intersection", w))?;
            ensure(diff.accepts(w) == (a && !b), || fail("difference", w))?;
            ensure(sym.accepts(w) == (a != b), || fail("symmetric difference", w))?;
            ensure(comp.accepts(w) == !a, || fail("complement", w))?;
            ensure(min.accepts(w) == a, || fail("minimize", w))?;
            let wx: Vec<usize> = w.iter().chain(&x).copied().collect();
            ensure(quo.accepts(w) == r1.has(&wx), || fail("quotient", w))?;
            let cat_b = (0..=w.len()).any(|i| r1.has(&w[..i]) && r2.has(&w[i..]));
            ensure(cat.accepts(w) == cat_b, || fail("concat", w))?;
            let mut reach = vec![false; w.len() + 1];
            reach[0] = true;
            for j in 1..=w.len() {
                reach[j] = (0..j).any(|i| reach[i] && r1.has(&w[i..j]));
            }
            ensure(star.accepts(w) == reach[w.len()], || fail("star", w))?;
            let phi_w: Vec<usize> = w.iter().flat_map(|&a| images[a].iter().copied()).collect();
            ensure(pre.accepts(w) == r3.has(&phi_w), || fail("preimage", w))?;
            checked += 1;
        }
        for w in all_words(kt, 8) {
            ensure(img.accepts(&w) == in_image(&r1, &images, &w), || fail("image", &w))?;
        }
        // enumeration, emptiness, equivalence, prefix closure
        let listed = m1.enumerate_upto(8);
        let mut shortlex = brute_list.clone();
        shortlex.sort_by(|u, v| u.len().cmp(&v.len()).then(u.cmp(v)));
        ensure(listed == shortlex, || format!("round {round}: enumerate_upto"))?;
        let empty_b = words.iter().filter(|w| w.len() < r1.n()).all(|w| !r1.has(w));
        ensure(m1.is_empty() == empty_b, || format!("round {round}: is_empty"))?;
        let cut = up_to(k, 8);
        let (c1, c2) = (m1.intersection(&cut), m2.intersection(&cut));
        let eq_b = words.iter().all(|w| r1.has(w) == r2.has(w));
        ensure(c1.equivalent(&c2) == eq_b, || format!("round {round}: equivalent"))?;
        ensure(m1.equivalent(&min), || format!("round {round}: minimize not equivalent"))?;
        let pc_b = brute_list.iter().all(|w| (0..w.len()).all(|i| r1.has(&w[..i])));
        ensure(c1.is_prefix_closed() == pc_b, || format!("round {round}: prefix closure (cut)"))?;
        if r1.n() <= 5 {
            ensure(m1.is_prefix_closed() == pc_b, || format!("round {round}: prefix closure"))?;
        }
        // product and projection
        let (pa, prod) = product(&[&m1, &m2]);
        for u in all_words(k, 3) {
            for v in all_words(k, 3) {
                let p = pa.pad(&[&u, &v]);
                ensure(prod.accepts(&p) == (r1.has(&u) && r2.has(&v)), || fail("product", &p))?;
            }
        }
        let p0 = projection(&prod, &pa, 0, nm.clone());
        let m2_nonempty = words.iter().any(|w| w.len() < r2.n() && r2.has(w));
        for w in &words {
            ensure(p0.accepts(w) == (m2_nonempty && r1.has(w)), || fail("projection", w))?;
        }
    }
    let time = within(t, 60)?;
    Ok(format!("200 automata, {checked} words per operation in total, {time}"))
}

// ---------------------------------------------------------------- 2

fn run_ball_checks(e: &ZooEntry, r: usize, which: &[&str]) -> Result<(), String> {
    let o = e.oracle.as_ref().expect("oracle");
    let mut ctx = BallContext::new(&e.structure, o, r).map_err(|x| x.to_string())?;
    for w in which {
        let rep = match *w {
            "f1" => ctx.check_f1(),
            "f2" => ctx.check_f2(),
            "f3" => ctx.check_f3_acyclic(),
            _ => unreachable!(),
        };
        passed(&rep)?;
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let e = zoo("Z2").map_err(|x| x.to_string())?;
    run_ball_checks(&e, 6, &["f1", "f2", "f3"])?;
    let s = &e.structure;
    passed(&check_uniqueness(s, e.oracle.as_ref().unwrap(), 4, 8).map_err(|x| x.to_string())?)?;
    passed(&check_prefix_closed(s))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vec2 = |w: &[Letter]| {
        let mut v = [0i64; 2];
        for a in w {
            v[a.idx() / 2] += if a.idx() % 2 == 0 { 1 } else { -1 };
        }
        v
    };
    for _ in 0..1000 {
        let n = rng.gen_range(0..=40);
        let w = random_word(&mut rng, 4, n);
        let nf = s.normal_form(&w, None).map_err(|x| x.to_string())?;
        ensure(vec2(&nf) == vec2(&w) && s.is_normal_form(&nf), || format!("solver on {}", s.alphabet().render(&w)))?;
    }
    Ok(format!("f1/f2/f3 r=6, uniqueness, prefix closure, 1000 words, {}", within(t, 10)?))
}

// ---------------------------------------------------------------- 3

/// Leftmost rewriting until no rule applies.
fn rewrite_naive(rules: &[(Word, Word)], w: &[Letter]) -> Word {
    let mut w = w.to_vec();
    'outer: loop {
        for i in 0..w.len() {
            for (l, r) in rules {
                if w[i..].starts_with(l) {
                    w.splice(i..i + l.len(), r.iter().copied());
                    continue 'outer;
                }
            }
        }
        return w;
    }
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut total = 0;
    let cases = [
        ("z2*z3", z2_z3_rewriting_system(), free_product_oracle("Z2*Z3", &["a", "b"], &[2, 3])),
        ("klein-rs", klein_rewriting_system(), klein_oracle()),
    ];
    for (name, rs, oracle) in cases {
        let e = zoo(name).map_err(|x| x.to_string())?;
        let s = &e.structure;
        let rules = rs.rules().to_vec();
        for w in all_words(s.alphabet().len(), 10) {
            let w = letters(&w);
            let nf = s.normal_form(&w, None).map_err(|x| x.to_string())?;
            ensure(nf == rewrite_naive(&rules, &w), || format!("{name}: {}", s.alphabet().render(&w)))?;
            total += 1;
        }
        let entry = ZooEntry { oracle: Some(oracle), ..e };
        run_ball_checks(&entry, 5, &["f1", "f2", "f3"])?;
    }
    Ok(format!("{total} words, flow axioms r=5, {}", within(t, 30)?))
}

// ---------------------------------------------------------------- 4

fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::new();
    for &a in w {
        if out.last().is_some_and(|b| b.idx() ^ 1 == a.idx()) {
            out.pop();
        } else {
            out.push(a);
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let spec = free_product_spec().map_err(|x| x.to_string())?;
    let (_, nf) = gog_normal_forms(&spec).map_err(|x| x.to_string())?;
    // blocks of x^±, y^± with no letter followed by its inverse
    let mut trans = Vec::new();
    for a in 0..4 {
        trans.push((0, a, a + 1));
        for b in 0..4 {
            if b != a ^ 1 {
                trans.push((a + 1, b, b + 1));
            }
        }
    }
    let names: Vec<String> = ["x", "x^-1", "y", "y^-1"].iter().map(|s| s.to_string()).collect();
    let blocks = Fsa::from_partial(names, 5, 0, &[0, 1, 2, 3, 4], &trans).map_err(|x| x.to_string())?;
    ensure(nf.equivalent(&blocks), || "normal forms differ from reduced block words".into())?;
    let e = zoo("z*z").map_err(|x| x.to_string())?;
    let s = &e.structure;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let n = rng.gen_range(0..=30);
        let w = random_word(&mut rng, 4, n);
        let got = s.normal_form(&w, None).map_err(|x| x.to_string())?;
        ensure(got == free_reduce(&w), || format!("solver on {}", s.alphabet().render(&w)))?;
    }
    run_ball_checks(&e, 5, &["f3"])?;
    Ok(format!("Nf equivalent, 1000 words, f3 r=5, {}", within(t, 30)?))
}

// ---------------------------------------------------------------- 5

type M2 = [i64; 4];

fn mul2(a: M2, b: M2) -> M2 {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

/// Image in PSL(2, Z) (sign-normalized) with the exponent sum x ↦ 3, y ↦ 2.
fn trefoil_key(al: &Alphabet, w: &[Letter]) -> (M2, i64) {
    let s: M2 = [0, -1, 1, 0];
    let si: M2 = [0, 1, -1, 0];
    let u: M2 = [0, -1, 1, 1];
    let ui: M2 = [1, 1, -1, 0];
    let mut m: M2 = [1, 0, 0, 1];
    let mut e = 0;
    for &a in w {
        let (g, d) = match al.name(a) {
            "x" => (vec![s], 3),
            "x^-1" => (vec![si], -3),
            "X" => (vec![s, s], 6),
            "X^-1" => (vec![si, si], -6),
            "y" => (vec![u], 2),
            "y^-1" => (vec![ui], -2),
            "Y" => (vec![u, u, u], 6),
            "Y^-1" => (vec![ui, ui, ui], -6),
            other => panic!("unexpected letter {other}"),
        };
        for x in g {
            m = mul2(m, x);
        }
        e += d;
    }
    let first = m.iter().copied().find(|&v| v != 0).unwrap_or(1);
    if first < 0 {
        m = m.map(|v| -v);
    }
    (m, e)
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let e = zoo("trefoil").map_err(|x| x.to_string())?;
    let s = &e.structure;
    let al = s.alphabet().clone();
    let p = |t: &str| al.parse(t).unwrap();
    let gens = p("x x^-1 y y^-1");
    let rel = p("x x y^-1 y^-1 y^-1");
    let id = trefoil_key(&al, &[]);
    ensure(trefoil_key(&al, &rel) == id, || "relator is not trivial in the test oracle".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut n_true = 0;
    while n_true < 200 {
        let mut w = Vec::new();
        loop {
            let gl = rng.gen_range(0..=6);
            let g: Word = (0..gl).map(|_| gens[rng.gen_range(0..4)]).collect();
            let r = if rng.gen_bool(0.5) { rel.clone() } else { al.invert(&rel) };
            if w.len() + 2 * gl + r.len() > 40 {
                break;
            }
            w.extend(&g);
            w.extend(&r);
            w.extend(al.invert(&g));
        }
        if w.is_empty() {
            continue;
        }
        ensure(s.is_trivial(&w, None).map_err(|x| x.to_string())?, || format!("not trivial: {}", al.render(&w)))?;
        n_true += 1;
    }
    let mut n_false = 0;
    while n_false < 200 {
        let n = rng.gen_range(1..=20);
        let w: Word = (0..n).map(|_| gens[rng.gen_range(0..4)]).collect();
        if trefoil_key(&al, &w) == id {
            continue;
        }
        ensure(!s.is_trivial(&w, None).map_err(|x| x.to_string())?, || format!("reported trivial: {}", al.render(&w)))?;
        n_false += 1;
    }
    run_ball_checks(&e, 4, &["f1", "f2", "f3"])?;
    Ok(format!("200 trivial, 200 nontrivial, flow axioms r=4, {}", within(t, 60)?))
}

// ---------------------------------------------------------------- 6

type M3 = [[i64; 3]; 3];

fn mul3(a: &M3, b: &M3) -> M3 {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn eval3(gens: &HashMap<&str, M3>, al: &Alphabet, w: &[Letter]) -> M3 {
    let mut m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for &a in w {
        m = mul3(&m, &gens[al.name(a)]);
    }
    m
}

fn solver_vs(e: &ZooEntry, gens: &HashMap<&str, M3>, seed: u64, count: usize, max_len: usize) -> Result<(), String> {
    let s = &e.structure;
    let al = s.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let n = rng.gen_range(0..=max_len);
        let w = random_word(&mut rng, al.len(), n);
        let nf = s.normal_form(&w, None).map_err(|x| x.to_string())?;
        ensure(s.is_normal_form(&nf) && eval3(gens, al, &nf) == eval3(gens, al, &w), || {
            format!("{}: {} -> {}", e.name, al.render(&w), al.render(&nf))
        })?;
    }
    Ok(())
}

fn respecting_ok(e: &ZooEntry, r: usize) -> Result<(), String> {
    let rep = check_respecting(
        e.respecting.as_ref().expect("respecting"),
        e.oracle.as_ref().expect("oracle"),
        e.in_h.as_deref().expect("membership"),
        r,
    )
    .map_err(|x| x.to_string())?;
    ensure(rep.passed(), || rep.to_text())
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let heis: HashMap<&str, M3> = HashMap::from([
        ("a", [[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
        ("a^-1", [[1, -1, 0], [0, 1, 0], [0, 0, 1]]),
        ("b", [[1, 0, 0], [0, 1, 1], [0, 0, 1]]),
        ("b^-1", [[1, 0, 0], [0, 1, -1], [0, 0, 1]]),
        ("c", [[1, 0, 1], [0, 1, 0], [0, 0, 1]]),
        ("c^-1", [[1, 0, -1], [0, 1, 0], [0, 0, 1]]),
    ]);
    // affine maps of Z²: translations p, q and the monodromy t
    let sol: HashMap<&str, M3> = HashMap::from([
        ("p", [[1, 0, 1], [0, 1, 0], [0, 0, 1]]),
        ("p^-1", [[1, 0, -1], [0, 1, 0], [0, 0, 1]]),
        ("q", [[1, 0, 0], [0, 1, 1], [0, 0, 1]]),
        ("q^-1", [[1, 0, 0], [0, 1, -1], [0, 0, 1]]),
        ("t", [[2, 1, 0], [1, 1, 0], [0, 0, 1]]),
        ("t^-1", [[1, -1, 0], [-1, 2, 0], [0, 0, 1]]),
    ]);
    let h = zoo("heisenberg").map_err(|x| x.to_string())?;
    let s = zoo("sol").map_err(|x| x.to_string())?;
    solver_vs(&h, &heis, 6, 500, 20)?;
    solver_vs(&s, &sol, 7, 500, 20)?;
    respecting_ok(&h, 4)?;
    respecting_ok(&s, 4)?;
    Ok(format!("2 × 500 words, check_respecting r=4, {}", within(t, 60)?))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let e = zoo("dihedral").map_err(|x| x.to_string())?;
    // x ↦ s·x + d as [[s, d], [0, 1]]
    let iso: HashMap<&str, M3> = HashMap::from([
        ("a", [[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
        ("a^-1", [[1, -1, 0], [0, 1, 0], [0, 0, 1]]),
        ("b", [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]),
    ]);
    solver_vs(&e, &iso, 8, 500, 20)?;
    respecting_ok(&e, 5)?;
    Ok(format!("500 words, respecting checks r=5, {}", within(t, 15)?))
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let d = f2_coset_data().map_err(|x| x.to_string())?;
    let c = d.alphabet().clone();
    let pa = d.padded_alphabet().clone();
    // transversal: reduced words over a, b not starting with a^±
    let in_t = |w: &[Letter]| free_reduce(w).len() == w.len() && w.first().is_none_or(|x| x.idx() >= 2);
    let trans: Vec<Word> = all_words(4, 6).into_iter().map(|w| letters(&w)).filter(|w| in_t(w)).collect();
    let mut machines = 0;
    for (hid, _) in d.subgroup_ball() {
        // the subgroup element as a power of a
        let hw = d.ball().elements[hid].1.clone();
        let hinv = c.invert(&hw);
        for x in c.letters() {
            let mut pairs = Vec::new();
            for z in &trans {
                let mut y = hinv.clone();
                y.extend(z);
                y.push(x);
                let y = free_reduce(&y);
                if y.len() <= 6 && in_t(&y) {
                    pairs.push(pa.pad(&[&AutostackableStructure::syms(z), &AutostackableStructure::syms(&y)]));
                }
            }
            let exact = Fsa::finite(pa.symbol_names(&[c.names(), c.names()]), &pairs);
            let m = d.build_multiplier(hid, x).map_err(|e| e.to_string())?;
            let cut = up_to(pa.len(), 6).relabel(m.symbols().to_vec());
            let got = m.intersection(&cut);
            ensure(got.equivalent(&exact.relabel(m.symbols().to_vec())), || {
                format!("M_({}, {}) differs from the enumerated pairs", c.render(&hw), c.name(x))
            })?;
            machines += 1;
        }
    }
    let e = zoo("f2-coset-a").map_err(|x| x.to_string())?;
    let s = &e.structure;
    let al = s.alphabet();
    // h ↦ a, then free reduction over a, b
    let to_f2 = |w: &[Letter]| -> Word {
        w.iter()
            .map(|&l| match al.name(l) {
                "h" | "a" => Letter(0),
                "h^-1" | "a^-1" => Letter(1),
                "b" => Letter(2),
                _ => Letter(3),
            })
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let n = rng.gen_range(0..=30);
        let w = random_word(&mut rng, al.len(), n);
        let nf = s.normal_form(&w, None).map_err(|x| x.to_string())?;
        ensure(s.is_normal_form(&nf) && free_reduce(&to_f2(&nf)) == free_reduce(&to_f2(&w)), || {
            format!("solver on {}", al.render(&w))
        })?;
    }
    respecting_ok(&e, 5)?;
    Ok(format!("{machines} multipliers exact to length 6, 1000 words, check_respecting r=5, {}", within(t, 60)?))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let z2 = zoo("Z2").map_err(|x| x.to_string())?.structure.with_compiled_graph().map_err(|x| x.to_string())?;
    let a = z2.cross_check(8).map_err(|x| x.to_string())?;
    let zz = gog_compose_compiled(&free_product_spec().map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
    let b = zz.cross_check(8).map_err(|x| x.to_string())?;
    Ok(format!("Z2 {} pairs, Z*Z {} pairs, {}", a.pairs_checked, b.pairs_checked, within(t, 30)?))
}

// ---------------------------------------------------------------- 10

/// Z² with φ overridden on selected edges.
struct Faulty {
    base: AutostackableStructure,
    patch: fn(&Alphabet, &[Letter], Letter) -> Option<Word>,
}

impl ComposedMap for Faulty {
    fn phi(&self, y: &[Letter], a: Letter) -> autostack::Result<Word> {
        match (self.patch)(self.base.alphabet(), y, a) {
            Some(w) => Ok(w),
            None => self.base.phi_eval(y, a),
        }
    }
    fn recipe(&self) -> serde_json::Value {
        serde_json::json!({ "combinator": "faulty" })
    }
}

fn faulty(base: &AutostackableStructure, patch: fn(&Alphabet, &[Letter], Letter) -> Option<Word>) -> AutostackableStructure {
    base.with_stacking(StackingMap::Composed(Arc::new(Faulty { base: base.clone(), patch })), base.bound())
}

fn detects(o: &ElementOracle, s: &AutostackableStructure, check: &str, needle: &str) -> Result<(), String> {
    let mut ctx = BallContext::new(s, o, 4).map_err(|x| x.to_string())?;
    let rep = match check {
        "f1" => ctx.check_f1(),
        "f2" => ctx.check_f2(),
        "f3" => ctx.check_f3_acyclic(),
        "uniqueness" => check_uniqueness(s, o, 3, 5).map_err(|x| x.to_string())?,
        _ => unreachable!(),
    };
    ensure(!rep.passed && rep.counterexamples.iter().any(|c| c.contains(needle)), || {
        format!("{check} missed the defect: {:?}", rep.counterexamples)
    })
}

fn criterion_10() -> Outcome {
    let e = zoo("Z2").map_err(|x| x.to_string())?;
    let (s, o) = (&e.structure, e.oracle.as_ref().unwrap());
    let (a, b) = (Letter(0), Letter(2));
    let mut found = 0;
    let mut log = Vec::new();
    let mut attempt = |name: &str, r: Result<(), String>| match r {
        Ok(()) => {
            found += 1;
            log.push(format!("{name} ok"));
        }
        Err(m) => log.push(format!("{name}: {m}")),
    };
    // a flow path within the bound that ends at the wrong vertex
    attempt("wrong endpoints", detects(o, &faulty(s, |_, y, x| (y == [Letter(2)] && x == Letter(0)).then(|| vec![Letter(3), Letter(0), Letter(0)])), "f1", "wrong endpoint"));
    // a correct path longer than the declared bound
    attempt("oversized", detects(o, &faulty(s, |_, y, x| (y == [Letter(2)] && x == Letter(0)).then(|| vec![Letter(3), Letter(0), Letter(0), Letter(1), Letter(2)])), "f1", "bound"));
    // a tree edge no longer fixed by the flow
    attempt("moved tree edge", detects(o, &faulty(s, |_, y, x| (y.is_empty() && x == Letter(2)).then(|| vec![Letter(0), Letter(2), Letter(1)])), "f2", "tree edge"));
    // (bʲ, a) flows up for odd j and down for even j
    attempt(
        "flow 2-cycle",
        detects(
            o,
            &faulty(s, |_, y, x| {
                let j = y.iter().filter(|l| l.idx() == 2).count();
                (x == Letter(0) && y.iter().all(|l| l.idx() == 2) && j > 0).then(|| {
                    if j % 2 == 1 {
                        vec![Letter(2), Letter(0), Letter(3)]
                    } else {
                        vec![Letter(3), Letter(0), Letter(2)]
                    }
                })
            }),
            "f3",
            "flow cycle",
        ),
    );
    // a second normal form for a b
    let extra = Fsa::finite(s.nf().symbols().to_vec(), &[vec![b.idx(), a.idx()]]);
    attempt("duplicated normal form", detects(o, &s.with_nf_unchecked(s.nf().union(&extra).minimize()), "uniqueness", "same element"));
    let detail = log.join("; ");
    ensure(found == 5, || format!("{found}/5 detected: {detail}"))?;
    Ok(format!("5/5 detected ({detail})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("automata operations vs brute force", criterion_1),
        ("Z2 flow axioms, uniqueness and solver", criterion_2),
        ("rewriting structures vs exhaustive rewriting", criterion_3),
        ("free product Z*Z as a graph of groups", criterion_4),
        ("trefoil word problem", criterion_5),
        ("Heisenberg and Sol extensions", criterion_6),
        ("infinite dihedral over an index-two subgroup", criterion_7),
        ("coset automatic pair (F2, <a>)", criterion_8),
        ("Graph(phi) cross check", criterion_9),
        ("fault injection", criterion_10),
    ];
    let only: Option<usize> = std::env::args().find_map(|a| a.strip_prefix("criterion=").and_then(|n| n.parse().ok()));
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match r {
            Ok(d) => println!("PASS  {:>2}. {name}: {d}", i + 1),
            Err(d) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {d}", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
