use proptest::prelude::*;

use thz_srlnc::pipeline::{parallelize, read_frames, serialize, GenerationFrame};
use thz_srlnc::srlnc::{decode, encode};
use thz_srlnc::{CoefficientSeed, Field, FieldElement, Generation};

fn field(bits: u32) -> Field {
    Field::with_bits(bits).unwrap()
}

proptest! {
    #[test]
    fn field_axioms(bits in 1u32..=16, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = field(bits);
        let [a, b, c] = [a, b, c].map(|v| f.element_truncating(v));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, a), FieldElement::ZERO);
        if !b.is_zero() {
            prop_assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
        }
    }

    #[test]
    fn parallelize_roundtrip(
        stream in proptest::collection::vec(any::<u8>(), 0..3000),
        lanes in 1usize..=5,
        k in 1usize..=64,
        bits in 1u32..=16,
    ) {
        let gens = parallelize(&stream, lanes, k, bits).unwrap();
        prop_assert_eq!(gens.len() % lanes, 0);
        prop_assert_eq!(serialize(&gens, lanes, bits).unwrap(), stream.clone());
        let mut shuffled = gens.clone();
        shuffled.reverse();
        prop_assert_eq!(serialize(&shuffled, lanes, bits).unwrap(), stream);
    }

    #[test]
    fn encode_decode_any_k_survivors(
        bits in 2u32..=16,
        k in 1usize..=12,
        r in 0usize..=6,
        seed in any::<u64>(),
        index in any::<u64>(),
        values in proptest::collection::vec(any::<u32>(), 12),
        drop in proptest::collection::vec(any::<bool>(), 18),
    ) {
        let f = field(bits);
        let symbols: Vec<FieldElement> = values[..k].iter().map(|&v| f.element_truncating(v)).collect();
        let g = Generation { index, symbols: symbols.clone(), pad_bits: 0 };
        let e = encode(&f, &g, r, CoefficientSeed(seed)).unwrap();
        let kept: Vec<_> = e.symbols().zip(&drop).filter(|(_, &d)| !d).map(|(s, _)| s.clone()).collect();
        match decode(&f, &kept, k) {
            Ok(out) => prop_assert_eq!(out, symbols),
            Err(_) => prop_assert!(kept.len() < k || r > 0),
        }
    }

    #[test]
    fn frames_roundtrip(
        bits in 1u32..=16,
        k in 1usize..=40,
        r in 0usize..=10,
        seed in any::<u64>(),
        session in any::<u32>(),
        values in proptest::collection::vec(any::<u32>(), 40),
    ) {
        let f = field(bits);
        let g = Generation::new(9, values[..k].iter().map(|&v| f.element_truncating(v)).collect());
        let e = encode(&f, &g, r, CoefficientSeed(seed)).unwrap();
        let (main, aux) = GenerationFrame::pair(session, &e, bits, CoefficientSeed(seed), 0).unwrap();
        let mut bytes = main.to_bytes();
        bytes.extend(aux.to_bytes());
        let frames = read_frames(&bytes).unwrap();
        prop_assert_eq!(&frames[0], &main);
        prop_assert_eq!(&frames[1], &aux);
        let rebuilt: Vec<_> = frames.iter().flat_map(|fr| fr.coded_symbols(&f)).collect();
        let original: Vec<_> = e.symbols().cloned().collect();
        prop_assert_eq!(rebuilt, original);
    }
}
