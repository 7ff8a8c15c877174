use proptest::prelude::*;
use treefpp::{Degree, Portrait, Vertex};

fn factorial(d: usize) -> u16 {
    (1..=d as u16).product()
}

/// Degree, depth and two random portraits of that shape.
fn pair() -> impl Strategy<Value = (Portrait, Portrait)> {
    (2usize..=4, 0usize..=3).prop_flat_map(|(d, n)| {
        let deg = Degree::new(d).unwrap();
        let len = deg.internal_vertices(n);
        let labels = prop::collection::vec(0..factorial(d), len);
        (labels.clone(), labels)
            .prop_map(move |(a, b)| (Portrait::from_ranks(deg, n, a), Portrait::from_ranks(deg, n, b)))
    })
}

fn triple() -> impl Strategy<Value = (Portrait, Portrait, Portrait)> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(d, n)| {
        let deg = Degree::new(d).unwrap();
        let len = deg.internal_vertices(n);
        let labels = prop::collection::vec(0..factorial(d), len);
        (labels.clone(), labels.clone(), labels).prop_map(move |(a, b, c)| {
            (
                Portrait::from_ranks(deg, n, a),
                Portrait::from_ranks(deg, n, b),
                Portrait::from_ranks(deg, n, c),
            )
        })
    })
}

fn leaves(p: &Portrait) -> Vec<Vertex> {
    let d = p.degree();
    (0..d.pow(p.depth()))
        .map(|i| Vertex::from_level_position(d, p.depth(), i))
        .collect()
}

proptest! {
    #[test]
    fn composition_is_associative((a, b, c) in triple()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_and_identity((a, _) in pair()) {
        let id = Portrait::identity(a.degree(), a.depth());
        prop_assert_eq!(a.compose(&a.invert()).unwrap(), id.clone());
        prop_assert_eq!(a.invert().compose(&a).unwrap(), id.clone());
        prop_assert_eq!(a.compose(&id).unwrap(), a.clone());
        prop_assert_eq!(id.compose(&a).unwrap(), a);
    }

    #[test]
    fn action_is_left_action((a, b) in pair()) {
        let ab = a.compose(&b).unwrap();
        for v in leaves(&a) {
            prop_assert_eq!(ab.apply(&v).unwrap(), a.apply(&b.apply(&v).unwrap()).unwrap());
        }
    }

    #[test]
    fn section_of_product((a, b) in pair()) {
        prop_assume!(a.depth() >= 1);
        let ab = a.compose(&b).unwrap();
        for x in 1..=a.degree().get() {
            let v = Vertex::new(&[x]).unwrap();
            let hv = b.apply(&v).unwrap();
            let expected = a.section(&hv).unwrap().compose(&b.section(&v).unwrap()).unwrap();
            prop_assert_eq!(ab.section(&v).unwrap(), expected);
        }
    }

    #[test]
    fn encoding_round_trips((a, _) in pair()) {
        let bytes = a.encode();
        prop_assert_eq!(Portrait::decode(&bytes).unwrap(), a.clone());
        prop_assert_eq!(Portrait::from_body(a.degree(), a.depth(), &a.body()).unwrap(), a);
    }

    #[test]
    fn truncation_is_a_homomorphism_and_a_body_prefix((a, b) in pair(), k in 0usize..=3) {
        let k = k.min(a.depth());
        let ab = a.compose(&b).unwrap();
        let ta = a.truncate(k).unwrap();
        prop_assert_eq!(ab.truncate(k).unwrap(), ta.compose(&b.truncate(k).unwrap()).unwrap());
        let body = a.body();
        prop_assert!(body.starts_with(&ta.body()));
    }

    #[test]
    fn fixed_leaves_match_brute_force((a, _) in pair()) {
        let brute = leaves(&a).iter().filter(|v| a.apply(v).unwrap() == **v).count();
        prop_assert_eq!(a.fixed_leaves(), brute);
    }

    #[test]
    fn decoding_arbitrary_bytes_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..40)) {
        let _ = Portrait::decode(&bytes);
    }

    #[test]
    fn level_action_agrees_with_apply((a, _) in pair()) {
        let n = a.depth();
        let d = a.degree();
        let act = a.level_action(n).unwrap();
        for (i, v) in leaves(&a).iter().enumerate() {
            let w = a.apply(v).unwrap();
            prop_assert_eq!(act[i] as usize, w.level_position(d));
        }
    }
}
