//! Property tests spanning several modules.

use crate::analysis::{
    norm_distance, pairwise_loss, smd_params, weight_profile, DecoderKind, WeightProfile, MAX_LOSS_DB,
};
use crate::code_loss::{exhaustive_profiles, min_profiles_trellis, pareto_frontier, ParetoPoint};
use crate::codebook::{enumerate_codewords, ConvCode};
use crate::constellation::{Constellation, Labeling};
use crate::decoder::{bdec_metric, sdec_metric, smd_sdec, Codebook, ViterbiDecoder};
use crate::demapper::{smd_piecewise, Demapper};
use crate::sim::{parse_grid, wilson_interval};
use proptest::prelude::*;

fn gray() -> impl Strategy<Value = Labeling> {
    prop::sample::select(Labeling::GRAY_4PAM.to_vec())
}

fn pair(max_len: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1..=max_len).prop_flat_map(|n| (prop::collection::vec(0..4usize, n), prop::collection::vec(0..4usize, n)))
}

/// Small feedforward rate-1/2 code with memory up to 3 and g(0) = 1.
fn small_cc() -> impl Strategy<Value = ConvCode> {
    (1..=3usize)
        .prop_flat_map(|nu| {
            let top = 1u32 << nu;
            (Just(nu), 0..top, 0..top)
        })
        .prop_map(|(nu, a, b)| {
            let top = 1u32 << nu;
            ConvCode::new(vec![vec![top | a, top | b]]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn loss_within_bound(w01 in 0u32..40, w10 in 0u32..40, w11 in 0u32..40, frac in 0.0f64..=1.0) {
        prop_assume!(w01 + w10 + w11 > 0);
        let wc = ((w01 + w10) as f64 * frac).floor() as u32;
        let p = WeightProfile::new(w01, w10, w11, wc).unwrap();
        let l = pairwise_loss(&p).unwrap();
        prop_assert!((0.0..=MAX_LOSS_DB + 1e-12).contains(&l));
        if p.beta_int() == 4 * wc && wc > 0 {
            prop_assert!((l - MAX_LOSS_DB).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_symmetric_and_bdec_not_better((x, xh) in pair(16), l in gray()) {
        prop_assume!(x != xh);
        let c = Constellation::make_pam(2, l, 1.0).unwrap();
        let p = weight_profile(&c, &x, &xh).unwrap();
        prop_assert_eq!(p, weight_profile(&c, &xh, &x).unwrap());
        prop_assert!(p.wc <= p.w01 + p.w10);
        let a_s = norm_distance(DecoderKind::Sdec, &p).unwrap();
        let a_b = norm_distance(DecoderKind::Bdec, &p).unwrap();
        prop_assert!(a_b <= a_s * (1.0 + 1e-12));
        // S-DEC distance is the Euclidean one: Σ gap² = Σ μ_S
        let euclid: f64 = x.iter().zip(&xh).filter(|(a, b)| a != b)
            .map(|(&a, &b)| smd_params(DecoderKind::Sdec, a, b).unwrap().mu).sum();
        prop_assert!((a_s * a_s - euclid).abs() < 1e-9);
    }

    #[test]
    fn smd_piecewise_matches_llr_difference(l in gray(), x in 0usize..4, xh in 0usize..4, y in -8.0f64..8.0, s in 0.2f64..3.0) {
        prop_assume!(x != xh);
        let c = Constellation::make_pam(2, l, 1.0).unwrap();
        let f = smd_piecewise(&c, x, xh, s).unwrap();
        let mut llr = [0.0; 2];
        Demapper::new(&c).llrs_into(y, 1.0, s, &mut llr);
        let direct: f64 = (0..2).map(|j| 2.0 * (c.bit(x, j) as f64 - c.bit(xh, j) as f64) * llr[j]).sum();
        prop_assert!((f.eval(y) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        let sd = smd_sdec(c.point(x), c.point(xh), y);
        prop_assert!(sd.is_finite());
    }

    #[test]
    fn conv_encoder_is_linear(cc in small_cc(), u1 in prop::collection::vec(0u8..2, 1..12), seed in any::<u64>()) {
        let u2: Vec<u8> = u1.iter().enumerate().map(|(i, _)| ((seed >> (i % 64)) & 1) as u8).collect();
        let sum: Vec<u8> = u1.iter().zip(&u2).map(|(a, b)| a ^ b).collect();
        let e1 = cc.encode_conv(&u1, true).unwrap();
        let e2 = cc.encode_conv(&u2, true).unwrap();
        let es = cc.encode_conv(&sum, true).unwrap();
        prop_assert_eq!(es, e1.iter().zip(&e2).map(|(a, b)| a ^ b).collect::<Vec<_>>());
        prop_assert!(cc.encode_conv(&vec![0; u1.len()], true).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn frontier_is_antichain(pts in prop::collection::vec((1u32..60, 0u32..10), 1..40)) {
        let points: Vec<ParetoPoint> = pts.iter().map(|&(beta, wc)| ParetoPoint { beta, wc, witness: None }).collect();
        let f = pareto_frontier(&points);
        for a in &f {
            for b in &f {
                if a != b {
                    prop_assert!(!(b.beta <= a.beta && b.wc <= a.wc));
                }
            }
        }
        for p in &points {
            prop_assert!(f.iter().any(|q| q.beta <= p.beta && q.wc <= p.wc));
        }
    }

    #[test]
    fn wilson_contains_estimate(k in 0u64..1000, extra in 0u64..100_000) {
        let n = k + extra + 1;
        let (lo, hi) = wilson_interval(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn grid_is_ascending(a in -10.0f64..10.0, step in 0.05f64..2.0, n in 0usize..40) {
        let b = a + step * n as f64;
        let g = parse_grid(&format!("{a}:{step}:{b}")).unwrap();
        prop_assert!(g.len() == n + 1 || g.len() == n);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trellis_dp_equals_exhaustive(cc in small_cc(), steps in 1usize..=7, l in gray()) {
        let c = Constellation::make_pam(2, l, 1.0).unwrap();
        let frame = cc.frame(steps, true);
        let mut ex: Vec<(u32, u32)> = exhaustive_profiles(&frame, &c).unwrap().iter().map(|p| (p.beta, p.wc)).collect();
        ex.sort_unstable_by_key(|&(b, wc)| (wc, b));
        let tp = min_profiles_trellis(&cc, &c, steps, true, 64).unwrap();
        prop_assert!(!tp.cap_exceeded);
        prop_assert_eq!(tp.profiles, ex);
    }

    #[test]
    fn viterbi_equals_exhaustive(cc in small_cc(), steps in 1usize..=5, l in gray(), ys in prop::collection::vec(-4.0f64..4.0, 16), s in 0.3f64..2.0) {
        let c = Constellation::make_pam(2, l, 1.0).unwrap();
        let frame = cc.frame(steps, true);
        let book = Codebook::from_code(&frame, &c, 16).unwrap();
        let vit = ViterbiDecoder::new(&cc, &c, steps, true).unwrap();
        let n = vit.num_symbols();
        let y = &ys[..n];
        let h = vec![1.0; n];
        let a = vit.sdec(y, &h).unwrap();
        let b = book.sdec(y, &h).unwrap();
        prop_assert!((a.metric - b.metric).abs() < 1e-9);
        // the winner is only pinned down when the optimum is unique beyond rounding
        let near = (0..book.len()).filter(|&i| (sdec_metric(&c, book.symbols(i), y, &h) - b.metric).abs() < 1e-9).count();
        if near == 1 {
            prop_assert_eq!(a.info, b.info);
        }
        let llrs = Demapper::new(&c).frame_llrs(y, &h, s);
        let a = vit.bdec(&llrs).unwrap();
        let b = book.bdec(&llrs).unwrap();
        prop_assert!((a.metric - b.metric).abs() < 1e-9);
        let near = (0..book.len()).filter(|&i| (bdec_metric(book.bits(i), &llrs) - b.metric).abs() < 1e-9).count();
        if near == 1 {
            prop_assert_eq!(a.info, b.info);
        }
        prop_assert_eq!(enumerate_codewords(&frame, 16).unwrap().count(), 1usize << steps);
    }
}
