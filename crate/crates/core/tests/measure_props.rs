use std::sync::Arc;

use lpfock::linop::{CMatrix, C64};
use lpfock::measure::{
    check_spatial_algebraic, reverse, spatial_from_system, SetTransformation, SpatialSystem,
    Verdict, DEFAULT_TOL,
};
use lpfock::space::weighted_norm;
use lpfock::{Conjugate, FiniteMeasureSpace, LinOp, PExponent};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    src_w: Vec<f64>,
    dst_w: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    angles: Vec<f64>,
    xi: Vec<(f64, f64)>,
    p: f64,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..5, 1usize..5)
        .prop_flat_map(|(n, m)| {
            let k_max = n.min(m);
            (
                prop::collection::vec(0.25f64..4.0, n),
                prop::collection::vec(0.25f64..4.0, m),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
                0..=k_max,
                prop::collection::vec(0.0f64..std::f64::consts::TAU, k_max),
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
                prop::sample::select(vec![1.0, 1.5, 2.0, 2.5, 3.0, 7.0]),
            )
        })
        .prop_map(|(src_w, dst_w, src, dst, k, angles, xi, p)| Instance {
            src_w,
            dst_w,
            pairs: src.into_iter().zip(dst).take(k).collect(),
            angles: angles.into_iter().take(k).collect(),
            xi,
            p,
        })
}

fn build(inst: &Instance) -> SpatialSystem {
    let src = Arc::new(FiniteMeasureSpace::weighted(inst.src_w.clone()).unwrap());
    let dst = Arc::new(FiniteMeasureSpace::weighted(inst.dst_w.clone()).unwrap());
    let map = SetTransformation::new(src, dst, inst.pairs.clone()).unwrap();
    let phases = inst.angles.iter().map(|a| C64::from_polar(1.0, *a)).collect();
    SpatialSystem::new(map, phases).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isometric_on_domain(inst in instance()) {
        let sys = build(&inst);
        let p = PExponent::new(inst.p).unwrap();
        let s = spatial_from_system(&sys, p);
        let xi: Vec<C64> = inst.xi.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let mut restricted = vec![C64::new(0.0, 0.0); xi.len()];
        for i in sys.map().domain() {
            restricted[i] = xi[i];
        }
        let image: Vec<C64> = (s.matrix() * nalgebra::DVector::from_vec(xi)).iter().copied().collect();
        let lhs = weighted_norm(&image, &inst.dst_w, Conjugate::Finite(inst.p));
        let rhs = weighted_norm(&restricted, &inst.src_w, Conjugate::Finite(inst.p));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn reverse_pair_is_spatial(inst in instance()) {
        let sys = build(&inst);
        let p = PExponent::new(inst.p).unwrap();
        let s = spatial_from_system(&sys, p);
        let t = reverse(&sys, p).unwrap();
        let c = check_spatial_algebraic(&s, &t, DEFAULT_TOL).unwrap();
        prop_assert_eq!(c.verdict, Verdict::SpatialPartialIsometry, "{:?}", c.failed);
    }

    #[test]
    fn reverse_twice_is_original(inst in instance()) {
        let sys = build(&inst);
        let p = PExponent::new(inst.p).unwrap();
        let twice = sys.reverse_system().unwrap().reverse_system().unwrap();
        let a = spatial_from_system(&sys, p);
        let b = spatial_from_system(&twice, p);
        prop_assert!(a.approx_eq(&b, 1e-12));
    }

    #[test]
    fn non_unimodular_scaling_is_rejected(
        mags in prop::collection::vec(0.2f64..3.0, 1..5),
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]),
    ) {
        prop_assume!(mags.iter().any(|m| (m - 1.0).abs() > 1e-3));
        let p = PExponent::new(p).unwrap();
        let n = mags.len();
        let s = LinOp::counting(
            CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, mags.iter().map(|m| C64::new(*m, 0.0)))),
            p,
        );
        let t = LinOp::counting(
            CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, mags.iter().map(|m| C64::new(1.0 / m, 0.0)))),
            p,
        );
        let c = check_spatial_algebraic(&s, &t, DEFAULT_TOL).unwrap();
        prop_assert_ne!(c.verdict, Verdict::SpatialPartialIsometry);
    }
}
