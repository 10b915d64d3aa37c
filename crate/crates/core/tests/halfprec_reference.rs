//! The binary16 codec against the `half` crate as an independent reference.

use evosynth::halfprec::{decode_f16, encode_f16, quantize_network, round_trip, HalfCode, PrecisionPolicy};
use evosynth::{init_network, Activation, LayerSpec, Precision};
use half::f16;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAT: PrecisionPolicy = PrecisionPolicy::SATURATE;
const INF: PrecisionPolicy = PrecisionPolicy::TO_INFINITY;

#[test]
fn reference_values() {
    for x in [1.0f32, 2049.0, 0.1, 65504.0, 2f32.powi(-24), -3.75, 1e-8] {
        assert_eq!(encode_f16(x, INF).bits(), f16::from_f32(x).to_bits(), "{x}");
    }
    assert_eq!(f16::from_f32(2049.0).to_f32(), 2048.0);
    assert_eq!(f16::from_f32(0.1).to_f32(), 0.0999755859375);
    assert_eq!(f16::from_f32(65520.0).to_bits(), 0x7C00);
    assert_eq!(encode_f16(65520.0, SAT).bits(), 0x7BFF);
    assert_eq!(decode_f16(HalfCode(0x0001)), f16::from_bits(1).to_f32());
}

#[test]
fn every_code_decodes_like_reference() {
    for bits in 0..=u16::MAX {
        let ours = decode_f16(HalfCode(bits));
        let reference = f16::from_bits(bits).to_f32();
        if reference.is_nan() {
            assert!(ours.is_nan());
        } else {
            assert_eq!(ours.to_bits(), reference.to_bits(), "{bits:#06x}");
        }
    }
}

#[test]
fn random_bit_patterns_encode_like_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF16);
    for _ in 0..1_000_000 {
        let x = f32::from_bits(rng.random());
        if x.is_nan() {
            continue;
        }
        assert_eq!(encode_f16(x, INF).bits(), f16::from_f32(x).to_bits(), "{x:e} ({:#010x})", x.to_bits());
    }
}

#[test]
fn neighbourhoods_of_every_midpoint() {
    // midpoints between consecutive positive binary16 values and one binary32
    // ulp either side of each
    for bits in 0u16..0x7BFF {
        let lo = decode_f16(HalfCode(bits)) as f64;
        let hi = decode_f16(HalfCode(bits + 1)) as f64;
        let mid = ((lo + hi) / 2.0) as f32;
        for x in [f32::from_bits(mid.to_bits() - 1), mid, f32::from_bits(mid.to_bits() + 1)] {
            assert_eq!(encode_f16(x, INF).bits(), f16::from_f32(x).to_bits(), "{x:e}");
            assert_eq!(encode_f16(-x, INF).bits(), f16::from_f32(-x).to_bits(), "{:e}", -x);
        }
    }
}

proptest! {
    #[test]
    fn relative_error_bound(m in 1.0f32..2.0, e in -14i32..=15) {
        let x = m * 2f32.powi(e);
        prop_assume!(x <= 65504.0);
        let err = (round_trip(x, SAT) as f64 - x as f64).abs();
        prop_assert!(err <= 2f64.powi(-11) * x as f64);
    }

    #[test]
    fn monotone_when_saturating(a in any::<f32>(), b in any::<f32>()) {
        prop_assume!(!a.is_nan() && !b.is_nan());
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(round_trip(x, SAT) <= round_trip(y, SAT));
    }

    #[test]
    fn sign_symmetry(x in any::<f32>()) {
        prop_assume!(!x.is_nan());
        prop_assert_eq!(encode_f16(-x, SAT).bits(), encode_f16(x, SAT).bits() ^ 0x8000);
    }

    #[test]
    fn quantize_is_idempotent(seed in any::<u64>()) {
        let net = init_network(&LayerSpec::chain(&[5, 7, 3], Activation::Relu), seed).unwrap();
        let once = quantize_network(&net, SAT).unwrap();
        let twice = quantize_network(&once, SAT).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.precision, Precision::Half);
    }
}

#[test]
fn quantize_examples() {
    let mut net = init_network(&LayerSpec::chain(&[2, 2], Activation::Relu), 1).unwrap();
    net.layers[0].weights = vec![0.0; 4];
    let q = quantize_network(&net, SAT).unwrap();
    assert_eq!(q.layers[0].weights, vec![0.0; 4]);
    assert_eq!(q.precision, Precision::Half);

    net.layers[0].weights = vec![0.1, 0.0, 0.0, 0.0];
    net.layers[0].mask = vec![true, false, false, true];
    let q = quantize_network(&net, SAT).unwrap();
    assert_eq!(q.layers[0].weights[0], 0.0999755859375);
    assert_eq!(q.layers[0].weights[1].to_bits(), 0);
    assert_eq!(q.layers[0].mask, net.layers[0].mask);

    net.layers[0].bias[1] = f32::NAN;
    assert!(matches!(quantize_network(&net, SAT), Err(evosynth::Error::NumericFailure(_))));
}
