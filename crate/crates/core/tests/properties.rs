use std::sync::OnceLock;

use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use linear_insdel::basecode::{BaseCode, PositionedWord, ReedSolomon};
use linear_insdel::channel::{corrupt, replay, AdversaryScript, StrategyRegistry};
use linear_insdel::codec::Codec;
use linear_insdel::editmetrics::{align, edit_distance, lcs};
use linear_insdel::fulllinear::FullLinearCode;
use linear_insdel::halflinear::{HalfLinearCode, Pair};
use linear_insdel::syncstring::generate_sync;
use linear_insdel::{Fe, Field};

fn fields() -> Vec<Field> {
    vec![
        Field::prime(2).unwrap(),
        Field::prime(7).unwrap(),
        Field::prime(251).unwrap(),
        Field::binary(1).unwrap(),
        Field::binary(4).unwrap(),
        Field::binary(8).unwrap(),
    ]
}

fn half() -> &'static HalfLinearCode {
    static C: OnceLock<HalfLinearCode> = OnceLock::new();
    C.get_or_init(|| {
        let sync = generate_sync(32, 0.5, 255, 5).unwrap();
        HalfLinearCode::with_reed_solomon(Field::binary(8).unwrap(), sync, 0.2, 0.02).unwrap()
    })
}

fn full() -> &'static FullLinearCode {
    static C: OnceLock<FullLinearCode> = OnceLock::new();
    C.get_or_init(|| {
        let sync = generate_sync(32, 0.5, 255, 6).unwrap();
        FullLinearCode::with_reed_solomon(Field::binary(8).unwrap(), sync, 0.15, 0.01).unwrap()
    })
}

/// An insertion (`Some(symbol seed)`) or deletion (`None`) at a relative position.
fn edits(max: usize) -> impl Strategy<Value = Vec<(f64, Option<u32>)>> {
    prop::collection::vec((0.0..1.0f64, prop::option::of(0u32..256)), 0..=max)
}

fn apply<S: Clone>(word: &[S], ops: &[(f64, Option<u32>)], make: impl Fn(u32) -> S) -> Vec<S> {
    let mut w = word.to_vec();
    for &(pos, ins) in ops {
        match ins {
            Some(v) => {
                let i = (pos * (w.len() + 1) as f64) as usize;
                w.insert(i.min(w.len()), make(v));
            }
            None if !w.is_empty() => {
                let i = (pos * w.len() as f64) as usize;
                w.remove(i.min(w.len() - 1));
            }
            None => {}
        }
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(fi in 0usize..6, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = &fields()[fi];
        let q = f.order();
        let (a, b, c) = (Fe(a % q), Fe(b % q), Fe(c % q));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe(1));
        } else {
            prop_assert!(f.inv(a).is_err());
        }
    }

    #[test]
    fn edit_distance_is_a_metric(
        s in prop::collection::vec(0u8..3, 0..24),
        t in prop::collection::vec(0u8..3, 0..24),
        u in prop::collection::vec(0u8..3, 0..24),
    ) {
        prop_assert_eq!(edit_distance(&s, &t), edit_distance(&t, &s));
        prop_assert_eq!(edit_distance(&s, &s), 0);
        prop_assert!(edit_distance(&s, &u) <= edit_distance(&s, &t) + edit_distance(&t, &u));
        prop_assert!(lcs(&s, &t) <= s.len().min(t.len()));
        prop_assert_eq!(edit_distance(&s, &t) % 2, (s.len() + t.len()) % 2);
        let a = align(&s, &t);
        prop_assert!(a.is_valid_for(&s, &t));
    }

    #[test]
    fn edits_bound_edit_distance(s in prop::collection::vec(0u8..4, 0..40), ops in edits(8)) {
        let t = apply(&s, &ops, |v| (v % 4) as u8);
        prop_assert!(edit_distance(&s, &t) <= ops.len());
    }

    #[test]
    fn reed_solomon_corrects_within_radius(
        msg in prop::collection::vec(0u32..256, 5),
        errs in prop::collection::btree_map(0usize..20, 1u32..256, 0..=5),
        erase in prop::collection::btree_set(0usize..20, 0..=4),
    ) {
        let f = Field::binary(8).unwrap();
        let rs = ReedSolomon::new(f.clone(), 20, 5).unwrap();
        let msg: Vec<Fe> = msg.into_iter().map(Fe).collect();
        let cw = rs.encode(&msg).unwrap();
        let mut w: Vec<Option<Fe>> = cw.iter().map(|&c| Some(c)).collect();
        for (&i, &e) in &errs {
            w[i] = Some(f.add(cw[i], Fe(e)));
        }
        for &i in &erase {
            w[i] = None;
        }
        let word = PositionedWord(w);
        if 2 * word.disagreements(&cw) + word.erasures() <= 15 {
            prop_assert_eq!(rs.decode_errors_erasures(&word).unwrap(), msg);
        }
    }

    #[test]
    fn half_linear_roundtrip_under_insdel(msg in prop::collection::vec(0u32..256, 9), ops in edits(6)) {
        let code = half();
        prop_assume!(ops.len() <= code.guaranteed_budget());
        let msg: Vec<Fe> = msg.into_iter().map(Fe).collect();
        let x = code.encode(&msg).unwrap();
        let y = apply(&x, &ops, |v| Pair(Fe(v), Fe(v.rotate_left(3) % 256)));
        prop_assert_eq!(code.decode(&y).unwrap(), msg);
    }

    #[test]
    fn full_linear_roundtrip_under_insdel(seed in any::<u64>(), ops in edits(4)) {
        let code = full();
        prop_assume!(ops.len() <= code.guaranteed_budget());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg: Vec<Fe> = (0..code.dimension()).map(|_| Codec::random_symbol(code, &mut rng)).collect();
        let x = code.encode(&msg).unwrap();
        let y = apply(&x, &ops, Fe);
        prop_assert_eq!(code.decode(&y).unwrap(), msg);
    }

    #[test]
    fn corruption_log_replays(seed in any::<u64>(), budget in 0usize..10, which in 0usize..4) {
        let code = full();
        let names = ["random", "zero-pair-exploit", "block-merge", "buffer-delete"];
        let reg = StrategyRegistry::<Fe>::standard();
        let x = code.encode(&vec![Fe(3); code.dimension()]).unwrap();
        let script = AdversaryScript { strategy: names[which].into(), budget, seed, params: Default::default() };
        let source = |r: &mut ChaCha8Rng| Codec::random_symbol(code, r);
        let c = corrupt(&x, &script, &reg, &source).unwrap();
        prop_assert!(c.ops_used <= budget);
        prop_assert_eq!(c.log.len(), c.ops_used);
        prop_assert_eq!(replay(&x, &c.log).unwrap(), c.word.clone());
        prop_assert!(edit_distance(&x, &c.word) <= c.ops_used);
        let again = corrupt(&x, &script, &reg, &source).unwrap();
        prop_assert_eq!(again.word, c.word);
    }

    /// Codewords with the most zeros a nonzero codeword can have (k - 1):
    /// every zero is an erasure before the adversary even starts.
    #[test]
    fn half_linear_survives_maximal_zero_codewords(
        roots in prop::collection::btree_set(0usize..32, 8),
        scale in 1u32..256,
        ops in edits(6),
    ) {
        let code = half();
        prop_assume!(ops.len() <= code.guaranteed_budget());
        let f = code.field().clone();
        let rs = ReedSolomon::new(f.clone(), 32, code.dimension()).unwrap();
        // Coefficients of scale * prod (x - p_r), lowest degree first.
        let mut poly = vec![Fe(scale)];
        for &r in &roots {
            let p = rs.points()[r];
            let mut next = vec![Fe::ZERO; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] = f.add(next[i + 1], c);
                next[i] = f.sub(next[i], f.mul(c, p));
            }
            poly = next;
        }
        let x = code.encode(&poly).unwrap();
        prop_assert_eq!(x.iter().filter(|p| p.is_zero()).count(), code.dimension() - 1);
        let y = apply(&x, &ops, |v| Pair(Fe(v), Fe(v.rotate_left(3) % 256)));
        prop_assert_eq!(code.decode(&y).unwrap(), poly);
    }
}
