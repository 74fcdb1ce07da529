//! Property-based laws for the pixel-level primitives and dataset
//! plumbing. Each law is checked against an inline recomputation, never
//! against the code under test.

use proptest::prelude::*;

use inflow::imaging::pnm;
use inflow::imaging::{EdgeMap, GrayImage, RgbImage};
use inflow::mlp::{split_dataset, Dataset, FeatureVector, IntensityLabel, LabeledSample};
use inflow::staticfilter::{filter_static_edges, FilterMode, FilterParams, ZeroTrafficReference};
use inflow::synth::{oracle_label, OracleLabelRules, SceneSpec, Vehicle, VehicleSize};
use inflow::zones::Zone;

fn edge_pair() -> impl Strategy<Value = (u32, u32, Vec<bool>, Vec<bool>)> {
    (1u32..=24, 1u32..=24).prop_flat_map(|(w, h)| {
        let n = (w * h) as usize;
        (
            Just(w),
            Just(h),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn vehicles() -> impl Strategy<Value = Vec<Vehicle>> {
    let vehicle = (
        prop_oneof![Just(Zone::Near), Just(Zone::Mid), Just(Zone::Far)],
        prop::bool::ANY,
        0.0..=1.0f64,
        0.0..=1.0f64,
        any::<u64>(),
    )
        .prop_map(|(zone, large, lateral, depth, seed)| Vehicle {
            zone,
            size: if large {
                VehicleSize::Large
            } else {
                VehicleSize::Small
            },
            lateral_offset: lateral,
            depth_offset: depth,
            texture_seed: seed,
        });
    // Zone capacity is 8; keep one slot free so another vehicle fits.
    prop::collection::vec(vehicle, 0..=7)
}

proptest! {
    #[test]
    fn strict_filter_is_the_pointwise_conjunction(
        (w, h, ref_data, real_data) in edge_pair()
    ) {
        let reference = ZeroTrafficReference {
            edges: EdgeMap::from_raw(w, h, ref_data.clone()).unwrap(),
            capture_id: "prop".into(),
        };
        let real = EdgeMap::from_raw(w, h, real_data.clone()).unwrap();
        let params = FilterParams { kernel_radius: 3, mode: FilterMode::Strict };
        let out = filter_static_edges(&real, &reference, &params).unwrap();
        for i in 0..ref_data.len() {
            prop_assert_eq!(out.data()[i], real_data[i] && !ref_data[i]);
        }
    }

    #[test]
    fn tolerant_filter_clears_a_chebyshev_neighborhood(
        (w, h, ref_data, real_data) in edge_pair(),
        radius in 0u32..=3,
    ) {
        let reference = ZeroTrafficReference {
            edges: EdgeMap::from_raw(w, h, ref_data.clone()).unwrap(),
            capture_id: "prop".into(),
        };
        let real = EdgeMap::from_raw(w, h, real_data.clone()).unwrap();
        let params = FilterParams { kernel_radius: radius, mode: FilterMode::Tolerant };
        let out = filter_static_edges(&real, &reference, &params).unwrap();
        let r = radius as i64;
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut near_ref = false;
                for ny in (y - r).max(0)..=(y + r).min(h as i64 - 1) {
                    for nx in (x - r).max(0)..=(x + r).min(w as i64 - 1) {
                        near_ref |= ref_data[(ny * w as i64 + nx) as usize];
                    }
                }
                let i = (y * w as i64 + x) as usize;
                prop_assert_eq!(out.data()[i], real_data[i] && !near_ref);
            }
        }
    }

    #[test]
    fn filtering_never_adds_edges((w, h, ref_data, real_data) in edge_pair()) {
        let reference = ZeroTrafficReference {
            edges: EdgeMap::from_raw(w, h, ref_data).unwrap(),
            capture_id: "prop".into(),
        };
        let real = EdgeMap::from_raw(w, h, real_data.clone()).unwrap();
        for mode in [FilterMode::Strict, FilterMode::Tolerant] {
            let params = FilterParams { kernel_radius: 2, mode };
            let out = filter_static_edges(&real, &reference, &params).unwrap();
            for (kept, was_edge) in out.data().iter().zip(&real_data) {
                prop_assert!(!kept || *was_edge);
            }
        }
    }

    #[test]
    fn pgm_decode_inverts_encode(
        (w, h) in (1u32..=24, 1u32..=24),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<u8> = (0..(w * h) as usize).map(|_| rng.gen()).collect();
        let img = GrayImage::from_raw(w, h, data).unwrap();
        prop_assert_eq!(pnm::decode_pgm(&pnm::encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn ppm_decode_inverts_encode(
        (w, h) in (1u32..=24, 1u32..=24),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<u8> = (0..(w * h * 3) as usize).map(|_| rng.gen()).collect();
        let img = RgbImage::from_raw(w, h, data).unwrap();
        prop_assert_eq!(pnm::decode_ppm(&pnm::encode_ppm(&img)).unwrap(), img);
    }

    #[test]
    fn edge_pgm_decode_inverts_encode((w, h, data, _) in edge_pair()) {
        let edges = EdgeMap::from_raw(w, h, data).unwrap();
        prop_assert_eq!(
            pnm::decode_edge_pgm(&pnm::encode_edge_pgm(&edges)).unwrap(),
            edges
        );
    }

    #[test]
    fn split_is_a_partition(
        n in 2usize..80,
        ratio in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let samples: Vec<LabeledSample> = (0..n)
            .map(|i| {
                LabeledSample::new(
                    FeatureVector { near: i as u32, mid: 2 * i as u32, far: 3 * i as u32 },
                    IntensityLabel::new((i % 5) as u8 + 1).unwrap(),
                )
            })
            .collect();
        let data = Dataset::new(samples.clone());
        let (train, test) = split_dataset(&data, ratio, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), n);

        // Every sample lands on exactly one side; `near` doubles as an id.
        let mut seen = vec![0u32; n];
        for s in train.samples.iter().chain(&test.samples) {
            seen[s.features.near as usize] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));

        // Same seed, same split.
        let (train2, test2) = split_dataset(&data, ratio, seed).unwrap();
        prop_assert_eq!(train, train2);
        prop_assert_eq!(test, test2);
    }

    #[test]
    fn oracle_label_is_monotone_in_vehicles(
        base in vehicles(),
        zone_pick in 0usize..3,
        large in any::<bool>(),
    ) {
        let rules = OracleLabelRules::default();
        let mut spec = SceneSpec::empty(320, 240, true);
        spec.vehicles = base;
        let mut bigger = spec.clone();
        bigger.vehicles.push(Vehicle {
            zone: Zone::ALL[zone_pick],
            size: if large { VehicleSize::Large } else { VehicleSize::Small },
            lateral_offset: 0.5,
            depth_offset: 0.5,
            texture_seed: 0,
        });
        let a = oracle_label(&spec, &rules).unwrap().get();
        let b = oracle_label(&bigger, &rules).unwrap().get();
        prop_assert!(b >= a, "label fell from {} to {}", a, b);
    }

    #[test]
    fn oracle_label_ignores_placement_within_zones(
        base in vehicles(),
        lateral in 0.0..=1.0f64,
        depth in 0.0..=1.0f64,
    ) {
        let rules = OracleLabelRules::default();
        let mut spec = SceneSpec::empty(320, 240, true);
        spec.vehicles = base;
        let mut moved = spec.clone();
        for v in &mut moved.vehicles {
            v.lateral_offset = lateral;
            v.depth_offset = depth;
            v.texture_seed ^= 0x5a5a;
        }
        prop_assert_eq!(
            oracle_label(&spec, &rules).unwrap(),
            oracle_label(&moved, &rules).unwrap()
        );
    }
}
