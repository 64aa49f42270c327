use proptest::prelude::*;

use autostack::automata::{Fsa, PaddedAlphabet};
use autostack::stacking::replay_trace;
use autostack::words::{Alphabet, Letter, Word};
use autostack::zoo::{zoo, zoo_names};

fn word(k: u32, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..k).prop_map(Letter), 0..=max)
}

/// A complete DFA over `k` symbols with 1 to 5 states, as (delta, accepting).
fn dfa(k: usize) -> impl Strategy<Value = (Vec<u32>, Vec<bool>)> {
    (1usize..=5).prop_flat_map(move |n| {
        (prop::collection::vec(0..n as u32, n * k), prop::collection::vec(any::<bool>(), n))
    })
}

fn build(k: usize, (delta, acc): &(Vec<u32>, Vec<bool>)) -> Fsa {
    Fsa::from_table((0..k).map(|i| format!("s{i}")).collect(), 0, acc.clone(), delta.clone())
}

fn run(k: usize, (delta, acc): &(Vec<u32>, Vec<bool>), w: &[usize]) -> bool {
    acc[w.iter().fold(0usize, |q, &a| delta[q * k + a] as usize)]
}

proptest! {
    #[test]
    fn free_reduction_is_idempotent(w in word(6, 30)) {
        let al = Alphabet::from_generators(&["a", "b", "c"]);
        let r = al.free_reduce(&w);
        prop_assert!(al.is_freely_reduced(&r));
        prop_assert_eq!(al.free_reduce(&r), r.clone());
        prop_assert!(r.len() <= w.len() && (w.len() - r.len()).is_multiple_of(2));
    }

    #[test]
    fn inversion_is_an_involution(w in word(6, 30)) {
        let al = Alphabet::from_generators(&["a", "b", "c"]);
        prop_assert_eq!(al.invert(&al.invert(&w)), w.clone());
        let mut ww = w.clone();
        ww.extend(al.invert(&w));
        prop_assert!(al.free_reduce(&ww).is_empty());
    }

    #[test]
    fn rendering_round_trips(w in word(6, 20)) {
        let al = Alphabet::from_generators(&["a", "b", "c"]);
        prop_assert_eq!(al.parse(&al.render(&w)).unwrap(), w);
    }

    #[test]
    fn padding_round_trips(
        u in prop::collection::vec(0usize..3, 0..8),
        v in prop::collection::vec(0usize..2, 0..8),
    ) {
        let pa = PaddedAlphabet::new(vec![3, 2]);
        let p = pa.pad(&[&u, &v]);
        prop_assert_eq!(p.len(), u.len().max(v.len()));
        prop_assert_eq!(pa.unpad(&p).unwrap(), vec![u, v]);
    }

    #[test]
    fn boolean_operations_match_simulation(
        d1 in dfa(2),
        d2 in dfa(2),
        ws in prop::collection::vec(prop::collection::vec(0usize..2, 0..10), 1..20),
    ) {
        let (m1, m2) = (build(2, &d1), build(2, &d2));
        let (u, i, c, min) = (m1.union(&m2), m1.intersection(&m2), m1.complement(), m1.minimize());
        prop_assert!(min.num_states() <= m1.num_states());
        prop_assert!(min.equivalent(&m1));
        prop_assert!(c.complement().equivalent(&m1));
        for w in &ws {
            let (a, b) = (run(2, &d1, w), run(2, &d2, w));
            prop_assert_eq!(u.accepts(w), a || b);
            prop_assert_eq!(i.accepts(w), a && b);
            prop_assert_eq!(c.accepts(w), !a);
            prop_assert_eq!(min.accepts(w), a);
        }
    }

    #[test]
    fn enumeration_is_shortlex_and_accepted(d in dfa(3)) {
        let m = build(3, &d);
        let listed = m.enumerate_upto(5);
        for w in &listed {
            prop_assert!(run(3, &d, w));
        }
        for pair in listed.windows(2) {
            prop_assert!((pair[0].len(), &pair[0]) < (pair[1].len(), &pair[1]));
        }
        prop_assert_eq!(m.is_empty(), m.minimize().enumerate_upto(m.num_states()).is_empty());
    }

    #[test]
    fn solver_is_sound_on_the_zoo(i in 0usize..zoo_names().len(), seed in prop::collection::vec(any::<u32>(), 0..16)) {
        let e = zoo(zoo_names()[i]).unwrap();
        let s = &e.structure;
        let al = s.alphabet();
        let w: Word = seed.iter().map(|x| Letter(x % al.len() as u32)).collect();
        let (nf, events) = s.derivation_trace(&w, None).unwrap();
        prop_assert!(s.is_normal_form(&nf));
        prop_assert_eq!(s.normal_form(&nf, None).unwrap(), nf.clone());
        prop_assert_eq!(replay_trace(al, &w, &events).unwrap(), nf.clone());
        if let Some(o) = &e.oracle {
            prop_assert_eq!(o.eval(&nf), o.eval(&w));
        }
        let mut ww = w.clone();
        ww.extend(al.invert(&w));
        prop_assert!(s.is_trivial(&ww, None).unwrap());
    }

    #[test]
    fn flow_values_are_bounded_paths(i in 0usize..zoo_names().len(), seed in prop::collection::vec(any::<u32>(), 0..10), x in any::<u32>()) {
        let e = zoo(zoo_names()[i]).unwrap();
        let s = &e.structure;
        let al = s.alphabet();
        let w: Word = seed.iter().map(|x| Letter(x % al.len() as u32)).collect();
        let y = s.normal_form(&w, None).unwrap();
        let a = Letter(x % al.len() as u32);
        let path = s.phi_eval(&y, a).unwrap();
        prop_assert!(path.len() <= s.bound());
        if let Some(o) = &e.oracle {
            let mut ya = y.clone();
            ya.push(a);
            let mut yp = y.clone();
            yp.extend(&path);
            prop_assert_eq!(o.eval(&yp), o.eval(&ya));
        }
    }
}
