use msrec_core::io::{load_binary, load_volume, save_binary, save_volume};
use msrec_core::label::label_components;
use msrec_core::morphology::dilate;
use msrec_core::resample::{downsample_binary, downsample_mean};
use msrec_core::threshold::{otsu_threshold, Polarity};
use msrec_core::{BinaryVolume, BitDepth, Connectivity, Dims, GrayVolume, Volume, PORE, ROCK};
use proptest::prelude::*;

fn binary_volume(max: usize) -> impl Strategy<Value = BinaryVolume> {
    (1..=max, 1..=max, 1..=max, 0.1f64..20.0).prop_flat_map(|(x, y, z, scale)| {
        prop::collection::vec(0u8..=1, x * y * z)
            .prop_map(move |data| BinaryVolume::new([x, y, z], scale, data).unwrap())
    })
}

/// Two volumes of the same shape with `a ⊆ b`.
fn nested_pair(max: usize) -> impl Strategy<Value = (BinaryVolume, BinaryVolume)> {
    binary_volume(max).prop_flat_map(|a| {
        let n = a.len();
        prop::collection::vec(0u8..=1, n).prop_map(move |extra| {
            let data = a.data().iter().zip(&extra).map(|(x, y)| x | y).collect();
            let b = BinaryVolume::new(a.dims(), a.scale(), data).unwrap();
            (a.clone(), b)
        })
    })
}

fn subset(a: &BinaryVolume, b: &BinaryVolume) -> bool {
    a.data().iter().zip(b.data()).all(|(&x, &y)| x <= y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn save_load_roundtrip(v in binary_volume(9)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.raw");
        save_binary(&v, &path).unwrap();
        let back = load_binary(&path).unwrap();
        prop_assert_eq!(&back, &v);
        // and the other way round: saving what was loaded gives the same bytes
        let again = dir.path().join("w.raw");
        save_binary(&back, &again).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn gray_roundtrip(dims in (1usize..6, 1usize..6, 1usize..6), seed in any::<u64>(), wide in any::<bool>()) {
        let n = dims.0 * dims.1 * dims.2;
        let (depth, max) = if wide { (BitDepth::Sixteen, u16::MAX as u64) } else { (BitDepth::Eight, 255) };
        let data: Vec<u16> = (0..n as u64).map(|i| (((i * 2654435761) ^ seed) % (max + 1)) as u16).collect();
        let g = GrayVolume::new([dims.0, dims.1, dims.2], 3.5, depth, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.raw");
        save_volume(&Volume::Gray(g.clone()), &path).unwrap();
        match load_volume(&path).unwrap() {
            Volume::Gray(back) => prop_assert_eq!(back, g),
            Volume::Binary(_) => prop_assert!(false, "loaded as binary"),
        }
    }

    #[test]
    fn labels_partition_pore_phase(v in binary_volume(10), full in any::<bool>()) {
        let conn = if full { Connectivity::TwentySix } else { Connectivity::Six };
        let l = label_components(&v, conn);
        for (&value, &label) in v.data().iter().zip(l.labels()) {
            prop_assert_eq!(value == PORE, label > 0);
            prop_assert!(label as usize <= l.count());
        }
        prop_assert_eq!(l.sizes().iter().sum::<usize>(), v.pore_count());
        prop_assert!(l.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn dilation_is_monotone_and_extensive((a, b) in nested_pair(9), r in 0usize..3) {
        let da = dilate(&a, r);
        let db = dilate(&b, r);
        prop_assert!(subset(&a, &da));
        prop_assert!(subset(&da, &db));
    }

    #[test]
    fn downsampling_never_grows_fov(v in binary_volume(13), f in 1usize..5) {
        prop_assume!(v.dims().iter().all(|&d| d >= f));
        let out = downsample_binary(&v, f).unwrap();
        for a in 0..3 {
            prop_assert!(out.scale() * out.dims()[a] as f64 <= v.scale() * v.dims()[a] as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn otsu_partition_invariant_under_shift(values in prop::collection::vec(0u16..200, 27), shift in 0u16..56) {
        prop_assume!(values.iter().any(|&v| v != values[0]));
        let g = GrayVolume::new([3, 3, 3], 1.0, BitDepth::Eight, values.clone()).unwrap();
        let shifted = GrayVolume::new([3, 3, 3], 1.0, BitDepth::Eight, values.iter().map(|v| v + shift).collect()).unwrap();
        for polarity in [Polarity::PoresDark, Polarity::PoresBright] {
            prop_assert_eq!(otsu_threshold(&g, polarity).unwrap(), otsu_threshold(&shifted, polarity).unwrap());
        }
    }
}

#[test]
fn gray_mean_rounds_half_up() {
    let g = GrayVolume::new([2, 1, 1], 1.0, BitDepth::Eight, vec![10, 11]).unwrap();
    match downsample_mean(&Volume::Gray(g), 1).unwrap() {
        Volume::Gray(out) => assert_eq!(out.data(), &[10, 11]),
        _ => unreachable!(),
    }
    let g = GrayVolume::new(
        [2, 2, 2],
        1.0,
        BitDepth::Eight,
        vec![10, 11, 10, 11, 10, 11, 10, 11],
    )
    .unwrap();
    match downsample_mean(&Volume::Gray(g), 2).unwrap() {
        Volume::Gray(out) => assert_eq!(out.data(), &[11]),
        _ => unreachable!(),
    }
}

#[test]
fn crop_then_subsample_bookkeeping() {
    let dims: Dims = [9, 7, 5];
    let v = BinaryVolume::from_fn(dims, 2.0, |x, y, z| (x + y + z) % 3 == 0).unwrap();
    let c = v.crop([1, 2, 0], [4, 4, 4]).unwrap();
    assert_eq!(c.dims(), [4, 4, 4]);
    assert_eq!(c.get(0, 0, 0), v.get(1, 2, 0));
    assert_eq!(c.scale(), 2.0);
    let s = v.subsample(2).unwrap();
    assert_eq!(s.dims(), [5, 4, 3]);
    assert_eq!(s.scale(), 4.0);
    assert_eq!(s.get(4, 3, 2), v.get(8, 6, 4));
    assert_eq!(
        BinaryVolume::filled([1, 1, 1], 1.0, ROCK)
            .unwrap()
            .pore_count(),
        0
    );
}
