use std::collections::HashSet;

use msrec_core::threshold::Polarity;
use msrec_core::{BinaryVolume, Volume};
use msrec_harness::simulation::place_cuts;
use msrec_harness::{make_simulation_pair, SpherePack};

fn voxels(origin: [usize; 3], size: [usize; 3]) -> HashSet<[usize; 3]> {
    let mut out = HashSet::new();
    for z in 0..size[2] {
        for y in 0..size[1] {
            for x in 0..size[0] {
                out.insert([origin[0] + x, origin[1] + y, origin[2] + z]);
            }
        }
    }
    out
}

#[test]
fn cuts_are_disjoint_and_inside() {
    let source = [20, 14, 12];
    let cut = [6, 6, 6];
    for seed in 0..100 {
        let c = place_cuts(source, cut, seed).unwrap();
        for o in [c.hr_origin, c.lr_origin] {
            assert!(
                (0..3).all(|a| o[a] + cut[a] <= source[a]),
                "seed {seed}: {c:?}"
            );
        }
        let shared = voxels(c.hr_origin, cut)
            .intersection(&voxels(c.lr_origin, cut))
            .count();
        assert_eq!(shared, 0, "seed {seed}: {c:?}");
        assert!(!c.overlaps());
    }
}

#[test]
fn every_feasible_axis_gets_used() {
    let axes: HashSet<usize> = (0..100)
        .map(|s| place_cuts([16, 16, 16], [8, 8, 8], s).unwrap().split_axis)
        .collect();
    assert_eq!(axes.len(), 3);
}

#[test]
fn pair_contents_come_from_the_source() {
    let src = SpherePack {
        dims: [32, 32, 64],
        grain_radius: [3.0, 5.0],
        micropores: 10,
        ..SpherePack::default()
    }
    .generate_binary()
    .unwrap();
    for seed in 0..10 {
        let pair = make_simulation_pair(
            &Volume::Binary(src.clone()),
            [32, 32, 32],
            4,
            seed,
            Polarity::PoresDark,
        )
        .unwrap();
        assert_eq!(
            pair.hr,
            src.crop(pair.cuts.hr_origin, [32, 32, 32]).unwrap()
        );
        assert_eq!(
            pair.reference,
            src.crop(pair.cuts.lr_origin, [32, 32, 32]).unwrap()
        );
        assert_eq!(pair.lr.dims(), [8, 8, 8]);
        assert!((pair.lr.scale() - 4.0 * src.scale()).abs() < 1e-12);
        assert_eq!(pair.hr.scale(), src.scale());
    }
}

#[test]
fn gray_source_thresholds_to_the_binary_structure() {
    let pack = SpherePack {
        dims: [32, 32, 64],
        grain_radius: [3.0, 5.0],
        micropores: 0,
        gray: true,
        ..SpherePack::default()
    };
    let binary = SpherePack {
        gray: false,
        ..pack.clone()
    }
    .generate_binary()
    .unwrap();
    let pair = make_simulation_pair(
        &pack.generate().unwrap(),
        [32, 32, 32],
        2,
        3,
        Polarity::PoresDark,
    )
    .unwrap();
    assert_eq!(
        pair.hr,
        binary.crop(pair.cuts.hr_origin, [32, 32, 32]).unwrap()
    );
}

#[test]
fn rejects_sources_without_room() {
    let src = BinaryVolume::filled([16, 16, 16], 1.0, 0).unwrap();
    assert!(make_simulation_pair(&src.into(), [12, 12, 12], 4, 0, Polarity::PoresDark).is_err());
}
