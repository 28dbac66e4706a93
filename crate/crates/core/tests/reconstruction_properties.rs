use msrec_core::dictionary::{build_mpd, build_multi_epd};
use msrec_core::metrics::porosity;
use msrec_core::plan::{plan, ScalePlan, TEMPLATE_SIZE};
use msrec_core::reconstruct::{
    pad_micropores, reconstruct_multistage, ReconstructionConfig, TieBreak,
};
use msrec_core::{BinaryVolume, Connectivity};
use msrec_oracles::new_components;
use msrec_oracles::suites::random_binary;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_volume(seed: u64, dims: [usize; 3], scale: f64) -> BinaryVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BinaryVolume::new(dims, scale, random_binary(&mut rng, dims, true)).unwrap()
}

fn two_stage_plan() -> ScalePlan {
    plan(9.4, 2.35, 16, 24, TEMPLATE_SIZE).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn skeleton_survives_every_stage(seed in any::<u64>(), n in 3usize..12, first in any::<bool>()) {
        let hr = random_volume(seed, [24, 24, 24], 2.35);
        let lr = random_volume(seed ^ 1, [n, n + 1, n + 2], 9.4);
        let p = two_stage_plan();
        let dicts = build_multi_epd(&hr, &p).unwrap();
        let cfg = ReconstructionConfig {
            seed,
            tie_break: if first { TieBreak::First } else { TieBreak::SeededRandom },
            ..Default::default()
        };
        let rec = reconstruct_multistage(&lr, &dicts, &cfg).unwrap();
        let mut previous = lr.clone();
        for stage in &rec.stages {
            prop_assert_eq!(stage.subsample(2).unwrap().into_data(), previous.data().to_vec());
            previous = stage.clone();
        }
        prop_assert_eq!(rec.final_volume().subsample(4).unwrap().into_data(), lr.data().to_vec());
        // FoV conservation on the interleaved grid
        let out = rec.final_volume();
        for a in 0..3 {
            let corrected = out.scale() * (out.dims()[a] + 3) as f64;
            prop_assert!((corrected - lr.scale() * lr.dims()[a] as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruction_is_deterministic(seed in any::<u64>()) {
        let hr = random_volume(seed, [24, 24, 24], 2.35);
        let lr = random_volume(seed ^ 7, [8, 8, 8], 9.4);
        let dicts = build_multi_epd(&hr, &two_stage_plan()).unwrap();
        let cfg = ReconstructionConfig { seed, ..Default::default() };
        let a = reconstruct_multistage(&lr, &dicts, &cfg).unwrap();
        let b = reconstruct_multistage(&lr, &dicts, &cfg).unwrap();
        prop_assert_eq!(a.final_volume(), b.final_volume());
        prop_assert_eq!(a.reports, b.reports);
    }

    #[test]
    fn padding_adds_isolated_components(seed in any::<u64>(), full in any::<bool>()) {
        let conn = if full { Connectivity::TwentySix } else { Connectivity::Six };
        let hr = random_volume(seed, [20, 20, 20], 2.35);
        let pms = {
            // sparse macro-pores leave room for placements
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
            let data: Vec<u8> = random_binary(&mut rng, [24, 24, 24], true)
                .into_iter()
                .enumerate()
                .map(|(i, v)| v & ((i / 24) % 24 < 6) as u8)
                .collect();
            BinaryVolume::new([24, 24, 24], 2.35, data).unwrap()
        };
        let p = two_stage_plan();
        let mpd = build_mpd(&hr, &p, conn);
        let cfg = ReconstructionConfig { seed, connectivity: conn, ..Default::default() };
        let (ms, report) = pad_micropores(&pms, &mpd, &p, &cfg).unwrap();

        prop_assert!(porosity(&ms) >= porosity(&pms));
        prop_assert_eq!(porosity(&ms) == porosity(&pms), report.placed == 0);
        prop_assert_eq!(report.placed + report.skipped, report.requested);

        let diff = new_components(pms.data(), ms.data(), ms.dims(), full);
        prop_assert_eq!(diff.lost, 0);
        prop_assert_eq!(diff.touching, 0);
        prop_assert_eq!(diff.sizes.len(), report.placed);
        let mut placed: Vec<usize> = report
            .placements
            .iter()
            .map(|pl| mpd.elements()[pl.element].voxel_count())
            .collect();
        let mut found = diff.sizes.clone();
        placed.sort_unstable();
        found.sort_unstable();
        prop_assert_eq!(found, placed);

        let (again, _) = pad_micropores(&pms, &mpd, &p, &cfg).unwrap();
        prop_assert_eq!(again, ms);
    }
}

#[test]
fn first_tie_break_ignores_seed() {
    let hr = random_volume(5, [24, 24, 24], 2.35);
    let lr = random_volume(6, [7, 7, 7], 9.4);
    let dicts = build_multi_epd(&hr, &two_stage_plan()).unwrap();
    let run = |seed| {
        let cfg = ReconstructionConfig {
            seed,
            tie_break: TieBreak::First,
            ..Default::default()
        };
        reconstruct_multistage(&lr, &dicts, &cfg)
            .unwrap()
            .into_final()
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn baseline_uses_native_dictionary_each_stage() {
    let hr = random_volume(8, [24, 24, 24], 2.35);
    let lr = random_volume(9, [6, 6, 6], 9.4);
    let dicts = build_multi_epd(&hr, &two_stage_plan()).unwrap();
    let cfg = ReconstructionConfig {
        single_epd_baseline: true,
        ..Default::default()
    };
    let rec = reconstruct_multistage(&lr, &dicts, &cfg).unwrap();
    assert_eq!(rec.reports.len(), 2);
    assert!(rec.reports.iter().all(|r| r.dictionary_level == 1));
    assert_eq!(rec.final_volume().dims(), [21, 21, 21]);
}

#[test]
fn roomy_volume_places_every_copy() {
    let hr = random_volume(11, [20, 20, 20], 2.35);
    let p = two_stage_plan();
    let mpd = build_mpd(&hr, &p, Connectivity::TwentySix);
    assert!(mpd.len() > 3);
    let pms = BinaryVolume::from_fn([48, 48, 48], 2.35, |x, y, z| x + y + z < 6).unwrap();
    let (ms, report) = pad_micropores(&pms, &mpd, &p, &ReconstructionConfig::default()).unwrap();
    assert_eq!(report.placed, report.requested);
    assert_eq!(report.placed, mpd.len() * p.pad_multiplicity);
    let added: usize = mpd
        .elements()
        .iter()
        .map(|e| e.voxel_count())
        .sum::<usize>()
        * p.pad_multiplicity;
    assert_eq!(ms.pore_count(), pms.pore_count() + added);
}
