use msrec_core::plan::{fov, plan, TEMPLATE_SIZE};
use msrec_core::Error;
use proptest::prelude::*;

fn ceil3(x: f64) -> usize {
    let c = if (x - x.round()).abs() < 1e-9 {
        x.round()
    } else {
        x.ceil()
    };
    (c as usize).pow(3)
}

#[test]
fn sandstone_sample_scales() {
    let p = plan(9.4, 2.35, 64, 256, TEMPLATE_SIZE).unwrap();
    assert_eq!((p.n_max, p.m_max), (2, 2));
    assert!((p.output_scale_um - 2.35).abs() < 1e-12);
    assert_eq!(p.cc_range, [1, 64]);
    assert_eq!(p.pad_multiplicity, 1);
    let levels: Vec<u32> = p.stages.iter().map(|s| s.dictionary_level).collect();
    assert_eq!(levels, vec![2, 1]);

    let q = plan(13.29, 2.35, 300, 256, TEMPLATE_SIZE).unwrap();
    assert_eq!(q.m_max, 2);
    assert!((q.output_scale_um - 3.3225).abs() < 1e-12);
    // ceil(3.3225 / 2.35)^3 = 8, ceil(13.29 / 2.35)^3 = 216
    assert_eq!(q.cc_range, [8, 216]);
}

#[test]
fn degenerate_plans_are_rejected() {
    assert!(matches!(
        plan(2.35, 2.35, 64, 256, 5),
        Err(Error::NothingToReconstruct(_))
    ));
    assert!(matches!(
        plan(2.0, 2.35, 64, 256, 5),
        Err(Error::NothingToReconstruct(_))
    ));
    assert!(matches!(plan(9.4, 2.35, 64, 9, 5), Err(Error::TooSmall(_))));
    assert!(plan(-1.0, 2.35, 64, 256, 5).is_err());
}

#[test]
fn fov_by_repeated_addition() {
    for (scale, size) in [(2.35, 256usize), (13.29, 300), (1.0, 1), (0.7, 1000)] {
        let mut sum = 0.0;
        for _ in 0..size {
            sum += scale;
        }
        assert!((fov(scale, size).unwrap() - sum).abs() < 1e-9 * sum);
    }
}

proptest! {
    #[test]
    fn plan_invariants(hr in 0.5f64..5.0, ratio in 2.0f64..40.0, lr_size in 8usize..200, hr_size in 10usize..400) {
        let lr = hr * ratio;
        let p = plan(lr, hr, lr_size, hr_size, TEMPLATE_SIZE).unwrap();
        let n = p.n_max as i32;
        let m = p.m_max as i32;
        let tol = 1e-9;
        prop_assert!(lr / 2f64.powi(n + 1) <= hr * (1.0 + tol) && hr <= lr / 2f64.powi(n) * (1.0 + tol));
        prop_assert!(2f64.powi(m) * hr <= lr * (1.0 + tol));
        prop_assert!(m == n || hr_size < TEMPLATE_SIZE << (m + 1));
        prop_assert!(hr_size >> m >= TEMPLATE_SIZE);
        prop_assert!((p.output_scale_um - lr / 2f64.powi(m)).abs() <= 1e-12 * lr);
        prop_assert_eq!(p.cc_range, [ceil3(p.output_scale_um / hr), ceil3(ratio)]);
        prop_assert!(p.cc_range[0] >= 1 && p.cc_range[0] <= p.cc_range[1]);
        prop_assert_eq!(p.cc_range[0] == 1, p.output_scale_um <= hr * (1.0 + tol));
        prop_assert_eq!(p.stages.len(), p.m_max as usize);
        prop_assert!(p.pad_multiplicity >= 1);
        let fov_ratio = (lr * lr_size as f64) / (hr * hr_size as f64);
        prop_assert_eq!(p.pad_multiplicity, (fov_ratio.powi(3).round() as usize).max(1));
    }

    #[test]
    fn doubling_lr_scale_adds_one_stage(hr in 0.5f64..5.0, ratio in 1.0f64..64.0) {
        let a = plan(hr * ratio, hr, 64, 4096, TEMPLATE_SIZE);
        let b = plan(2.0 * hr * ratio, hr, 64, 4096, TEMPLATE_SIZE).unwrap();
        match a {
            Ok(a) => prop_assert_eq!(b.n_max, a.n_max + 1),
            Err(_) => prop_assert_eq!(b.n_max, 1),
        }
    }

    #[test]
    fn output_fov_matches_lr_fov(hr in 0.5f64..5.0, ratio in 2.0f64..20.0, n in 3usize..100) {
        let lr = hr * ratio;
        let p = plan(lr, hr, n, 512, TEMPLATE_SIZE).unwrap();
        // the interleaved grid loses one output voxel short of 2^m per LR voxel
        let out = p.output_size(n);
        let corrected = p.output_scale_um * (out + (1usize << p.m_max) - 1) as f64;
        prop_assert!((corrected - fov(lr, n).unwrap()).abs() <= 1e-9 * corrected);
    }
}
