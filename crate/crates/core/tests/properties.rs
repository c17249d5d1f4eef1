//! Property tests over randomized inputs.

use legendre_gabor::field::{is_prime, FieldContext};
use legendre_gabor::gabor::{gabor_vector, inner_product, NormConvention, TimeFreqIndex};
use legendre_gabor::recovery::{measure, SparseSignal};
use legendre_gabor::theorem::{dirichlet_kernel_mag, piecewise_bound_sum, ConsecutiveBlock, ThetaParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn trial_division(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

const SMALL_PRIMES: [u64; 6] = [5, 7, 11, 13, 17, 19];

proptest! {
    #[test]
    fn primality_matches_trial_division(m in 0u64..200_000) {
        prop_assert_eq!(is_prime(m), trial_division(m));
    }

    #[test]
    fn kernel_magnitude_is_p_periodic_and_bounded(
        pi in 0usize..SMALL_PRIMES.len(),
        len in 1u64..19,
        t in -100i64..100,
    ) {
        let p = SMALL_PRIMES[pi];
        let len = 1 + len % p;
        let block = ConsecutiveBlock::new(0, len);
        let a = dirichlet_kernel_mag(p, &block, t);
        let b = dirichlet_kernel_mag(p, &block, t + p as i64);
        prop_assert!((a - b).abs() <= 1e-12 * len as f64);
        prop_assert!(a <= len as f64 + 1e-12);
    }

    #[test]
    fn piecewise_sum_scales_as_c_squared(
        pi in 0usize..SMALL_PRIMES.len(),
        n in 1u64..19,
        m1 in 1u64..4,
        m2 in 1u64..4,
    ) {
        let p = SMALL_PRIMES[pi];
        let (m1, m2) = (m1.min(m2).min(p), m1.max(m2).min(p));
        let params = ThetaParams::free(p, n % p, m1, m2).unwrap();
        let a = piecewise_bound_sum(&params, std::f64::consts::PI);
        let b = piecewise_bound_sum(&params, 2.0);
        let scale = (std::f64::consts::PI / 2.0).powi(2);
        prop_assert!((a - scale * b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn inner_products_are_conjugate_symmetric(
        l1 in 0u64..13, j1 in 0u64..13, l2 in 0u64..13, j2 in 0u64..13,
    ) {
        let ctx = FieldContext::new(13).unwrap();
        let u = gabor_vector(&ctx, TimeFreqIndex::new(l1, j1), NormConvention::UnitNorm);
        let v = gabor_vector(&ctx, TimeFreqIndex::new(l2, j2), NormConvention::UnitNorm);
        let uv = inner_product(&u, &v).unwrap();
        let vu = inner_product(&v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() <= 1e-13);
    }

    #[test]
    fn measurement_is_linear(
        l1 in 0u64..11, j1 in 0u64..11, l2 in 0u64..11, j2 in 0u64..11,
        re1 in -2.0f64..2.0, im1 in -2.0f64..2.0,
        re2 in -2.0f64..2.0, im2 in -2.0f64..2.0,
    ) {
        prop_assume!((l1, j1) != (l2, j2));
        let ctx = FieldContext::new(11).unwrap();
        let a = TimeFreqIndex::new(l1, j1);
        let b = TimeFreqIndex::new(l2, j2);
        let va = Complex64::new(re1, im1);
        let vb = Complex64::new(re2, im2);
        let joint = measure(
            &ctx,
            &SparseSignal::new(vec![a, b], vec![va, vb]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        let pa = measure(
            &ctx,
            &SparseSignal::new(vec![a], vec![va]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        let pb = measure(
            &ctx,
            &SparseSignal::new(vec![b], vec![vb]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        for k in 0..11 {
            prop_assert!((joint[k] - (pa[k] + pb[k])).norm() <= 1e-12);
        }
    }
}
