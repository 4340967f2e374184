mod support;

use omsense::io::{decode_aer, encode_aer, AerSequence, DecodeOptions};
use omsense::metrics::{
    dense_bit_rate, perf_per_bit, ratio_table, read_csv, sparse_bit_rate, write_csv, MetricsRow, Representation,
};
use omsense::{
    convolve2d, dvs_sequence, oms_step, BoundaryMode, DiskKernel, DvsState, EventFrame, Frame, FrameSequence,
    LuminanceFrame, RealFrame, SensorConfig, SpikeFrame,
};
use proptest::prelude::*;

use support::naive_convolve;

fn boundary() -> impl Strategy<Value = BoundaryMode> {
    prop_oneof![Just(BoundaryMode::Replicate), Just(BoundaryMode::Zero)]
}

/// Random frame at least `min` on each side and at most 32.
fn real_frame(min: usize) -> impl Strategy<Value = RealFrame> {
    (min..=32usize, min..=32usize).prop_flat_map(|(h, w)| {
        prop::collection::vec(-2.0f64..2.0, h * w).prop_map(move |d| RealFrame::new(h, w, d).unwrap())
    })
}

fn event_frame(h: usize, w: usize) -> impl Strategy<Value = EventFrame> {
    prop::collection::vec(prop_oneof![6 => Just(0i8), 1 => Just(1i8), 1 => Just(-1i8)], h * w)
        .prop_map(move |d| EventFrame::new(h, w, d, 0).unwrap())
}

fn lum_pair(h: usize, w: usize, lo: f64) -> impl Strategy<Value = (LuminanceFrame, LuminanceFrame)> {
    let one =
        move || prop::collection::vec(lo..=1.0f64, h * w).prop_map(move |d| LuminanceFrame::new(h, w, d).unwrap());
    (one(), one())
}

fn fresh_pair(a: &LuminanceFrame, b: &LuminanceFrame, cfg: &SensorConfig) -> EventFrame {
    let mut s = DvsState::new();
    s.step(a, cfg).unwrap();
    s.step(b, cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_matches_naive(
        (frame, radius) in (1u32..=5).prop_flat_map(|r| (real_frame(2 * r as usize + 1), Just(r))),
        mode in boundary(),
    ) {
        let k = DiskKernel::new(radius).unwrap();
        let got = convolve2d(&frame, &k, mode).unwrap();
        let want = naive_convolve(&frame, &k, mode);
        for (a, b) in got.data().iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_frame_is_silent((a, _) in lum_pair(6, 7, 0.0), use_log in any::<bool>()) {
        let cfg = SensorConfig { use_log, ..Default::default() };
        let ev = fresh_pair(&a, &a, &cfg);
        prop_assert!(ev.data().iter().all(|&p| p == 0));
    }

    #[test]
    fn swapping_frames_negates_events((a, b) in lum_pair(6, 7, 0.0), use_log in any::<bool>()) {
        let cfg = SensorConfig { use_log, ..Default::default() };
        let forward = fresh_pair(&a, &b, &cfg);
        let backward = fresh_pair(&b, &a, &cfg);
        for (f, g) in forward.data().iter().zip(backward.data()) {
            prop_assert_eq!(*f, -*g);
        }
    }

    #[test]
    fn scaling_leaves_events_unchanged(
        (a, b) in lum_pair(5, 6, 0.5),
        k in 0.2f64..=2.0,
    ) {
        // keep scaled values inside [10 eps, 1]
        let cfg = SensorConfig::default();
        let eps = cfg.log_epsilon;
        let scale = |f: &LuminanceFrame| {
            LuminanceFrame::new(5, 6, f.data().iter().map(|v| (v * k).min(1.0)).collect()).unwrap()
        };
        prop_assume!(a.data().iter().chain(b.data()).all(|v| v * k <= 1.0 && v * k >= 10.0 * eps));
        let plain = fresh_pair(&a, &b, &cfg);
        let scaled = fresh_pair(&scale(&a), &scale(&b), &cfg);
        for i in 0..30 {
            let (x, y) = (a.data()[i], b.data()[i]);
            // epsilon shifts each log difference from ln(y / x) by at most eps / min
            let pure = (y / x).ln();
            let slack = eps / x.min(y) + eps / (k * x.min(y));
            if (pure.abs() - cfg.contrast_threshold).abs() > slack {
                prop_assert_eq!(plain.data()[i], scaled.data()[i], "pixel {}", i);
            }
        }
    }

    #[test]
    fn streaming_equals_batch(
        frames in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 20), 1..6),
    ) {
        let frames: Vec<_> = frames.into_iter().map(|d| LuminanceFrame::new(4, 5, d).unwrap()).collect();
        let cfg = SensorConfig::default();
        let batch = dvs_sequence(&FrameSequence::new(frames.clone(), 5.0).unwrap(), &cfg).unwrap();
        let mut state = DvsState::new();
        for (f, want) in frames.iter().zip(batch.frames()) {
            let got = state.step(f, &cfg).unwrap();
            prop_assert_eq!(&got, want);
            prop_assert!(got.data().iter().all(|p| (-1..=1).contains(p)));
        }
    }

    #[test]
    fn raising_oms_threshold_never_adds_spikes(ev in event_frame(14, 16), t1 in 0.01f64..0.3, dt in 0.0f64..0.3) {
        let low = oms_step(&ev, &SensorConfig { oms_threshold: t1, ..Default::default() }).unwrap();
        let high = oms_step(&ev, &SensorConfig { oms_threshold: t1 + dt, ..Default::default() }).unwrap();
        for (h, l) in high.spikes.data().iter().zip(low.spikes.data()) {
            prop_assert!(!h || *l);
        }
    }

    #[test]
    fn raising_surround_weight_never_adds_spikes(ev in event_frame(14, 16), s1 in 0.0f64..2.0, ds in 0.0f64..2.0, mode in boundary()) {
        let cfg = |s| SensorConfig { surround_weight: s, boundary_mode: mode, ..Default::default() };
        let low = oms_step(&ev, &cfg(s1)).unwrap();
        let high = oms_step(&ev, &cfg(s1 + ds)).unwrap();
        for (h, l) in high.spikes.data().iter().zip(low.spikes.data()) {
            prop_assert!(!h || *l);
        }
    }

    #[test]
    fn uniform_activity_never_spikes(h in 11usize..24, w in 11usize..24, p in prop_oneof![Just(1i8), Just(-1i8)], thr in 0.001f64..1.0) {
        let ev = EventFrame::new(h, w, vec![p; h * w], 0).unwrap();
        let r = oms_step(&ev, &SensorConfig { oms_threshold: thr, ..Default::default() }).unwrap();
        prop_assert!(r.spikes.data().iter().all(|&s| !s));
    }

    #[test]
    fn spikes_depend_only_on_the_surround_window(
        a in event_frame(20, 22),
        b in event_frame(20, 22),
        y in 0usize..20,
        x in 0usize..22,
        mode in boundary(),
    ) {
        let cfg = SensorConfig { boundary_mode: mode, ..Default::default() };
        let r = cfg.surround_radius as usize;
        // b outside the window around (y, x), a inside
        let mixed: Vec<i8> = (0..20 * 22usize)
            .map(|i| {
                let (yy, xx) = (i / 22, i % 22);
                if yy.abs_diff(y) <= r && xx.abs_diff(x) <= r { a.data()[i] } else { b.data()[i] }
            })
            .collect();
        let mixed = EventFrame::new(20, 22, mixed, 0).unwrap();
        let sa = oms_step(&a, &cfg).unwrap();
        let sm = oms_step(&mixed, &cfg).unwrap();
        prop_assert_eq!(sa.difference.get(y, x), sm.difference.get(y, x));
        prop_assert_eq!(sa.spikes.get(y, x), sm.spikes.get(y, x));
    }

    #[test]
    fn sparse_rate_grows_with_events_and_stays_below_dense(ev in event_frame(9, 13), at in 0usize..117, depth in 0u32..8) {
        let mut more = ev.data().to_vec();
        more[at] = 1;
        let more = EventFrame::new(9, 13, more, 0).unwrap();
        prop_assert!(sparse_bit_rate(&more, depth) >= sparse_bit_rate(&ev, depth));
        prop_assert!(sparse_bit_rate(&more, depth) <= dense_bit_rate(9, 13, depth));
    }

    #[test]
    fn perf_per_bit_is_homogeneous(f1 in 0.0f64..0.5, k in 0.0f64..2.0, bits in 1.0f64..1e8) {
        let base = perf_per_bit(f1, bits).unwrap();
        let scaled = perf_per_bit(f1 * k, bits).unwrap();
        prop_assert!((scaled.ratio - k * base.ratio).abs() <= 1e-12 * base.ratio.max(1e-300));
    }

    #[test]
    fn ratio_table_is_reciprocal(entries in prop::collection::vec((0.01f64..1.0, 1.0f64..1e8), 2..5)) {
        let entries: Vec<_> = entries.into_iter().map(|(f, b)| perf_per_bit(f, b).unwrap()).collect();
        let t = ratio_table(&entries).unwrap();
        for i in 0..entries.len() {
            for j in 0..entries.len() {
                prop_assert!((t.ratio(i, j) * t.ratio(j, i) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn metrics_csv_round_trips(
        rows in prop::collection::vec(
            (0usize..3, 0usize..500, 1u64..2000, 1u64..2000, 0u32..32, 0.0f64..1e7, prop::option::of(0.0f64..=1.0)),
            0..5,
        )
    ) {
        let rows: Vec<MetricsRow> = rows
            .into_iter()
            .map(|(rep, frames, h, w, depth, sparse, f1)| MetricsRow {
                representation: Representation::ALL[rep],
                frames,
                height: h,
                width: w,
                bit_depth: depth,
                dense_bits_per_frame: dense_bit_rate(h, w, depth),
                avg_sparse_bits_per_frame: sparse,
                f1_input: f1,
                perf_per_bit: f1.map(|f| f / sparse.max(1.0)),
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn aer_round_trips_events(frames in prop::collection::vec(event_frame(5, 7), 1..5)) {
        let frames: Vec<_> = frames.into_iter().enumerate().map(|(t, f)| f.with_index(t as u32)).collect();
        let seq = FrameSequence::new(frames, 5.0).unwrap();
        let bytes = encode_aer(&seq).unwrap();
        let opts = DecodeOptions { frame_count: Some(seq.len()), frame_rate: 5.0 };
        prop_assert_eq!(decode_aer(&bytes, &opts).unwrap(), AerSequence::Events(seq));
    }

    #[test]
    fn aer_round_trips_spikes(data in prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.1), 6 * 4), 1..5)) {
        let frames: Vec<_> = data.into_iter().enumerate().map(|(t, d)| SpikeFrame::new(6, 4, d, t as u32).unwrap()).collect();
        let seq = FrameSequence::new(frames, 5.0).unwrap();
        let bytes = encode_aer(&seq).unwrap();
        let opts = DecodeOptions { frame_count: Some(seq.len()), frame_rate: 5.0 };
        prop_assert_eq!(decode_aer(&bytes, &opts).unwrap(), AerSequence::Spikes(seq));
    }
}

#[test]
fn exact_log_tie_is_silent() {
    // C chosen as the exact floating-point log difference of the two frames
    let cfg0 = SensorConfig::default();
    let (x, y) = (0.3, 0.4);
    let c = (y + cfg0.log_epsilon).ln() - (x + cfg0.log_epsilon).ln();
    let cfg = SensorConfig {
        contrast_threshold: c,
        ..cfg0
    };
    let a = LuminanceFrame::new(1, 1, vec![x]).unwrap();
    let b = LuminanceFrame::new(1, 1, vec![y]).unwrap();
    assert_eq!(fresh_pair(&a, &b, &cfg).data(), &[0]);
    assert_eq!(fresh_pair(&b, &a, &cfg).data(), &[0]);
    let nudged = SensorConfig {
        contrast_threshold: c * (1.0 - 1e-12),
        ..cfg
    };
    assert_eq!(fresh_pair(&a, &b, &nudged).data(), &[1]);
    assert_eq!(a.shape(), (1, 1));
}
