use lpfock::linop::{kron, CMatrix, LinOp, C64};
use lpfock::modules::{
    algebra_module, check_module_axioms, cstar_defect, direct_sum, external_tensor, in_ka, in_la,
    lp_lq, lq_lp, pairing, standard_module, theta, MatrixAlgebra, ModuleTriple, DEFAULT_TOL,
};
use lpfock::norm::{certified_norm, CertifyOptions};
use lpfock::PExponent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(p: f64) -> PExponent {
    PExponent::new(p).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_coeffs(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    (0..k).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

#[test]
fn standard_examples_satisfy_axioms() {
    for p in [1.0, 1.5, 2.0, 3.0] {
        let modules = [
            algebra_module(&MatrixAlgebra::full(2, e(p))),
            algebra_module(&MatrixAlgebra::nilpotent(e(p))),
            lp_lq(3, e(p)),
            lq_lp(3, e(p)),
            standard_module(2, &MatrixAlgebra::full(2, e(p))).unwrap(),
        ];
        for m in &modules {
            let r = check_module_axioms(m, DEFAULT_TOL);
            assert!(r.pass, "{}: {:?}", m.id(), r.conditions);
            assert!(r.conditions.iter().all(|c| c.worst <= 1e-12));
        }
    }
}

#[test]
fn enlarged_x_fails_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = algebra_module(&MatrixAlgebra::diagonal(2, e(2.5)));
    let bad = m.with_extra_x("r", random_matrix(&mut rng, 2, 2)).unwrap();
    let r = check_module_axioms(&bad, DEFAULT_TOL);
    assert!(!r.pass);
    assert!(r.conditions.iter().any(|c| !c.pass && c.worst > 1e-3));
}

#[test]
fn pairing_examples() {
    let m = lp_lq(3, e(2.5));
    let x = m.x_basis();
    let y = m.y_basis();
    let one = pairing(&y[0], &x[0], &m).unwrap();
    assert!((one.coefficients[0] - C64::new(1.0, 0.0)).norm() < 1e-14 && one.residual < 1e-14);
    let zero = pairing(&y[0], &x[1], &m).unwrap();
    assert!(zero.coefficients[0].norm() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alg = MatrixAlgebra::full(2, e(3.0));
    let aa = algebra_module(&alg);
    let a = alg.element(&random_coeffs(&mut rng, 4));
    let b = alg.element(&random_coeffs(&mut rng, 4));
    let pr = pairing(&a, &b, &aa).unwrap();
    let ab = a.compose(&b).unwrap();
    let back = alg.element(&pr.coefficients);
    assert!(back.approx_eq(&ab, 1e-12) && pr.residual < 1e-12);
}

#[test]
fn defects_of_cstar_like_examples_vanish() {
    for p in [1.0, 1.5, 2.0, 3.0] {
        for m in [lp_lq(3, e(p)), lq_lp(3, e(p)), algebra_module(&MatrixAlgebra::full(2, e(p)))] {
            let d = cstar_defect(&m, 16, 1).unwrap();
            assert!(d.defect_x.upper <= 1e-3, "{} p={p}: {:?}", m.id(), d.defect_x);
            assert!(d.defect_y.upper <= 1e-3, "{} p={p}: {:?}", m.id(), d.defect_y);
            assert!(d.defect_x.lower <= d.defect_x.upper);
            assert!(d.defect_x.lower >= -1e-3 && d.defect_y.lower >= -1e-3);
        }
    }
}

#[test]
fn nilpotent_defect_is_one() {
    let m = algebra_module(&MatrixAlgebra::nilpotent(e(2.5)));
    let d = cstar_defect(&m, 16, 0).unwrap();
    assert!((d.defect_x.lower - 1.0).abs() <= 1e-6 && (d.defect_x.upper - 1.0).abs() <= 1e-6);
}

#[test]
fn theta_examples_and_composition_law() {
    let m = lp_lq(3, e(2.0));
    let t = theta(&m.x_basis()[0], &m.y_basis()[0]).unwrap();
    let mut e11 = CMatrix::zeros(3, 3);
    e11[(0, 0)] = C64::new(1.0, 0.0);
    assert_eq!(t.matrix(), &e11);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = m.x_element(&random_coeffs(&mut rng, 3));
    let y = m.y_element(&random_coeffs(&mut rng, 3));
    let t = theta(&x, &y).unwrap();
    let outer = CMatrix::from_fn(3, 3, |i, j| x.matrix()[(i, 0)] * y.matrix()[(0, j)]);
    assert!(t.approx_eq(&t.with_matrix(outer).unwrap(), 1e-14));

    let sm = standard_module(2, &MatrixAlgebra::full(2, e(1.5))).unwrap();
    for _ in 0..10 {
        let kx = sm.x_span().generators().len();
        let ky = sm.y_span().generators().len();
        let (x1, x2) = (sm.x_element(&random_coeffs(&mut rng, kx)), sm.x_element(&random_coeffs(&mut rng, kx)));
        let (y1, y2) = (sm.y_element(&random_coeffs(&mut rng, ky)), sm.y_element(&random_coeffs(&mut rng, ky)));
        let lhs = theta(&x1, &y1).unwrap().compose(&theta(&x2, &y2).unwrap()).unwrap();
        let inner = x1.compose(&y1.compose(&x2).unwrap()).unwrap();
        let rhs = theta(&inner, &y2).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }
}

#[test]
fn morphisms_and_compacts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sm = standard_module(2, &MatrixAlgebra::diagonal(2, e(2.5))).unwrap();
    let id = LinOp::identity(sm.outer().clone());
    assert!(in_la(&id, &sm, DEFAULT_TOL).unwrap().member);
    let x = sm.x_basis();
    let y = sm.y_basis();
    let th = theta(&x[1], &y[2]).unwrap();
    assert!(in_la(&th, &sm, DEFAULT_TOL).unwrap().member);
    let r = LinOp::new(sm.outer().clone(), sm.outer().clone(), random_matrix(&mut rng, 4, 4)).unwrap();
    let verdict = in_la(&r, &sm, DEFAULT_TOL).unwrap();
    assert!(!verdict.member && !verdict.violations.is_empty());

    // Ideal property: t θ and θ t stay in K_A for t ∈ L_A.
    let k = LinOp::counting(random_matrix(&mut rng, 2, 2), e(2.5));
    let a = sm.algebra().element(&random_coeffs(&mut rng, 2));
    let a = LinOp::counting(a.into_matrix(), e(2.5));
    let t = LinOp::new(sm.outer().clone(), sm.outer().clone(), kron(&k, &a).unwrap().into_matrix()).unwrap();
    assert!(in_la(&t, &sm, DEFAULT_TOL).unwrap().member);
    for xi in &x {
        for yj in &y {
            let th = theta(xi, yj).unwrap();
            assert!(in_ka(&t.compose(&th).unwrap(), &sm, DEFAULT_TOL).member);
            assert!(in_ka(&th.compose(&t).unwrap(), &sm, DEFAULT_TOL).member);
        }
    }
}

#[test]
fn direct_sum_matches_standard_module() {
    let alg = MatrixAlgebra::full(2, e(3.0));
    let aa = algebra_module(&alg);
    let one = direct_sum(std::slice::from_ref(&aa)).unwrap();
    assert_eq!(one.x_span().generators(), aa.x_span().generators());

    let ds = direct_sum(&[aa.clone(), aa.clone(), aa.clone()]).unwrap();
    let st = standard_module(3, &alg).unwrap();
    for g in st.x_span().generators() {
        assert!(ds.x_span().contains(g, 1e-12));
    }
    for g in st.y_span().generators() {
        assert!(ds.y_span().contains(g, 1e-12));
    }
    assert_eq!(ds.x_span().dim(), st.x_span().dim());
    assert!(check_module_axioms(&ds, DEFAULT_TOL).pass);
}

#[test]
fn direct_sum_norm_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = CertifyOptions::default();
    for p in [1.5, 2.0, 3.0] {
        let aa = algebra_module(&MatrixAlgebra::full(2, e(p)));
        let ds = direct_sum(&[aa.clone(), aa.clone()]).unwrap();
        for _ in 0..5 {
            let c1 = random_coeffs(&mut rng, 4);
            let c2 = random_coeffs(&mut rng, 4);
            let mut c = c1.clone();
            c.extend(c2.iter().copied());
            let n1 = certified_norm(&aa.x_element(&c1), &opts);
            let n2 = certified_norm(&aa.x_element(&c2), &opts);
            let n = certified_norm(&ds.x_element(&c), &opts);
            assert!(n.upper >= n1.lower.max(n2.lower) - 1e-12);
            assert!(n.lower <= (n1.upper.powf(p) + n2.upper.powf(p)).powf(1.0 / p) + 1e-12);

            let q = p / (p - 1.0);
            let m1 = certified_norm(&aa.y_element(&c1), &opts);
            let m2 = certified_norm(&aa.y_element(&c2), &opts);
            let m = certified_norm(&ds.y_element(&c), &opts);
            assert!(m.upper >= m1.lower.max(m2.lower) - 1e-12);
            assert!(m.lower <= (m1.upper.powf(q) + m2.upper.powf(q)).powf(1.0 / q) + 1e-12);
        }
    }
}

#[test]
fn orthogonal_rank_one_sum_sits_between_max_and_psum() {
    let p = 2.5;
    let m = lq_lp(2, e(p));
    let ds = direct_sum(&[m.clone(), m.clone()]).unwrap();
    let x = ds.x_element(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let n = certified_norm(&x, &CertifyOptions::default());
    assert!(n.upper >= 1.0 - 1e-12 && n.lower <= 2f64.powf(1.0 / p) + 1e-12, "{n:?}");
}

#[test]
fn external_tensor_examples() {
    let p = e(2.5);
    let alg = MatrixAlgebra::full(2, p);
    let trivial = lp_lq(1, p);
    let aa = algebra_module(&alg);
    let t = external_tensor(&trivial, &aa).unwrap();
    assert_eq!(t.x_span().generators(), aa.x_span().generators());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = lp_lq(3, p);
    for _ in 0..20 {
        let x = l.x_element(&random_coeffs(&mut rng, 3));
        let y = l.y_element(&random_coeffs(&mut rng, 3));
        let a = alg.element(&random_coeffs(&mut rng, 4));
        let b = alg.element(&random_coeffs(&mut rng, 4));
        let lhs = theta(&kron(&x, &a).unwrap(), &kron(&y, &b).unwrap()).unwrap();
        let rhs = kron(&theta(&x, &y).unwrap(), &a.compose(&b).unwrap()).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }
}

#[test]
fn module_json_round_trip() {
    let m = standard_module(2, &MatrixAlgebra::diagonal(2, e(1.5))).unwrap();
    let json = m.to_json();
    assert!(json.contains("\"X\"") && json.contains("\"name\""));
    let back = ModuleTriple::from_json(&json).unwrap();
    assert_eq!(back.x_span().generators(), m.x_span().generators());
    assert_eq!(back.y_names(), m.y_names());
    assert_eq!(back.id(), m.id());
}
