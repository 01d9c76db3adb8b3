use nalgebra::DMatrix;
use paralex::algebra::{classify, structure_constants};
use paralex::connections::{covariant_derivative, ConnectionKind};
use paralex::domain::sample_points;
use paralex::frame::{act_constant, catalog_lookup, groupoid_arrow, Expr};
use paralex::tensor::{contract, fd_derivative, raise_lower, sig, FdConfig, TensorValue};
use proptest::prelude::*;

fn tensor(n: usize, signature: &str, values: &[f64]) -> TensorValue {
    let s = sig(signature);
    let len = n.pow(s.len() as u32);
    TensorValue::new(n, s, values[..len].to_vec()).unwrap()
}

fn point_in(name: &'static str) -> impl Strategy<Value = Vec<f64>> {
    let p = catalog_lookup(name).unwrap();
    let d = p.domain().shrink(0.05);
    d.lo.iter().zip(&d.hi).map(|(l, h)| *l..=*h).collect::<Vec<_>>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_is_linear(
        a in prop::collection::vec(-5.0..5.0f64, 27),
        b in prop::collection::vec(-5.0..5.0f64, 27),
        s in -3.0..3.0f64,
    ) {
        let ta = tensor(3, "ull", &a);
        let tb = tensor(3, "ull", &b);
        let lhs = contract(&(&ta.scaled(s) + &tb), 0, 2).unwrap();
        let rhs = &contract(&ta, 0, 2).unwrap().scaled(s) + &contract(&tb, 0, 2).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn groupoid_laws_heisenberg(x in point_in("heisenberg3"), y in point_in("heisenberg3"), z in point_in("heisenberg3")) {
        let p = catalog_lookup("heisenberg3").unwrap();
        let exy = groupoid_arrow(&p, &x, &y).unwrap();
        let eyz = groupoid_arrow(&p, &y, &z).unwrap();
        let exz = groupoid_arrow(&p, &x, &z).unwrap();
        let eyx = groupoid_arrow(&p, &y, &x).unwrap();
        prop_assert!((&eyz * &exy - exz).amax() < 1e-12);
        prop_assert!((&eyx * &exy - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn groupoid_laws_quaternion(x in point_in("quaternion3"), y in point_in("quaternion3"), z in point_in("quaternion3")) {
        let p = catalog_lookup("quaternion3").unwrap();
        let exy = groupoid_arrow(&p, &x, &y).unwrap();
        let eyz = groupoid_arrow(&p, &y, &z).unwrap();
        let exz = groupoid_arrow(&p, &x, &z).unwrap();
        prop_assert!((&eyz * &exy - exz).amax() < 1e-12);
        prop_assert!((groupoid_arrow(&p, &x, &x).unwrap() - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn raise_lower_round_trip(
        values in prop::collection::vec(-2.0..2.0f64, 27),
        m in prop::collection::vec(-1.0..1.0f64, 9),
        slot in 0usize..3,
    ) {
        let a = DMatrix::from_row_slice(3, 3, &m);
        let gm = &a * a.transpose() + DMatrix::identity(3, 3);
        let g = TensorValue::from_matrix(&gm, sig("ll")).unwrap();
        let ginv = TensorValue::from_matrix(&gm.clone().try_inverse().unwrap(), sig("uu")).unwrap();
        let t = tensor(3, "ull", &values);
        let back = raise_lower(&raise_lower(&t, slot, &g, &ginv).unwrap(), slot, &g, &ginv).unwrap();
        prop_assert_eq!(back.signature(), t.signature());
        prop_assert!(back.max_abs_diff(&t) < 1e-10);
    }

    #[test]
    fn fd_is_exact_on_affine_fields(
        base in prop::collection::vec(-3.0..3.0f64, 4),
        slopes in prop::collection::vec(-3.0..3.0f64, 8),
        x in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let field = |y: &[f64]| {
            let v: Vec<f64> = (0..4).map(|e| base[e] + slopes[2 * e] * y[0] + slopes[2 * e + 1] * y[1]).collect();
            TensorValue::new(2, sig("ul"), v)
        };
        for cfg in [FdConfig::default(), FdConfig::nested()] {
            let d = fd_derivative(field, &x, &cfg, None).unwrap();
            for e in 0..4 {
                for r in 0..2 {
                    prop_assert!((d.entries()[e * 2 + r] - slopes[2 * e + r]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn frame_parallel_derivative_obeys_product_rule(x in point_in("rotor2")) {
        let p = catalog_lookup("rotor2").unwrap();
        let u = |y: &[f64]| TensorValue::new(2, sig("u"), vec![y[0].sin() + y[1], y[0] * y[1]]);
        let v = |y: &[f64]| TensorValue::new(2, sig("l"), vec![y[1].cos(), y[0] * y[0] - 0.3]);
        let uv = |y: &[f64]| u(y)?.outer(&v(y)?);
        let kind = ConnectionKind::FrameParallel;
        let cfg = p.fd();
        let d_uv = covariant_derivative(&p, kind, uv, &x, cfg).unwrap();
        let du = covariant_derivative(&p, kind, u, &x, cfg).unwrap();
        let dv = covariant_derivative(&p, kind, v, &x, cfg).unwrap();
        let first = du.outer(&v(&x).unwrap()).unwrap().permute(&[0, 2, 1]).unwrap();
        let second = u(&x).unwrap().outer(&dv).unwrap();
        prop_assert!(d_uv.max_abs_diff(&(&first + &second)) < 1e-7);
    }

    #[test]
    fn spencer_derivative_obeys_product_rule(x in point_in("heisenberg3")) {
        let p = catalog_lookup("heisenberg3").unwrap();
        let u = |y: &[f64]| TensorValue::new(3, sig("u"), vec![y[2], y[0] * y[1], 1.0 + y[1]]);
        let v = |y: &[f64]| TensorValue::new(3, sig("u"), vec![y[0].exp(), y[2] - y[1], 0.5]);
        let uv = |y: &[f64]| u(y)?.outer(&v(y)?);
        let kind = ConnectionKind::Spencer;
        let d_uv = covariant_derivative(&p, kind, uv, &x, p.fd()).unwrap();
        let du = covariant_derivative(&p, kind, u, &x, p.fd()).unwrap();
        let dv = covariant_derivative(&p, kind, v, &x, p.fd()).unwrap();
        let first = du.outer(&v(&x).unwrap()).unwrap().permute(&[0, 2, 1]).unwrap();
        let second = u(&x).unwrap().outer(&dv).unwrap();
        prop_assert!(d_uv.max_abs_diff(&(&first + &second)) < 1e-7);
    }

    #[test]
    fn expressions_evaluate_like_rust(a in -5i32..5, b in 1i32..4, x in prop::collection::vec(-2.0..2.0f64, 2)) {
        let src = format!("{a}*x1^{b}-sin(x2)/(1+x1^2)");
        let e = Expr::parse(&src, 2, 1, 1).unwrap();
        let expect = a as f64 * x[0].powi(b) - x[1].sin() / (1.0 + x[0] * x[0]);
        prop_assert!((e.eval(&x) - expect).abs() < 1e-12);
    }

    #[test]
    fn classification_is_basis_independent(m in prop::collection::vec(-1.0..1.0f64, 9)) {
        let a = DMatrix::from_row_slice(3, 3, &m) + DMatrix::identity(3, 3) * 2.5;
        for name in ["heisenberg3", "quaternion3"] {
            let p = catalog_lookup(name).unwrap();
            let q = act_constant(&p, &a).unwrap();
            let s = sample_points(p.domain(), 3, 17);
            let l = classify(&structure_constants(&p, &s[0], &s[1..], 1e-6).unwrap());
            let r = classify(&structure_constants(&q, &s[0], &s[1..], 1e-6).unwrap());
            prop_assert_eq!(l.summary, r.summary);
            prop_assert_eq!(l.killing_signature, r.killing_signature);
        }
    }
}
