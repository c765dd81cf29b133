//! Property-based checks of the jet arithmetic, the vector algebra and the
//! expression parser/printer.

use cuspedge::expr::parse_expression;
use cuspedge::jet::{plug_curve, Jet1, Jet2, Scalar, V3};
use proptest::prelude::*;

const ORDER: usize = 4;

fn coeff() -> impl Strategy<Value = f64> {
    // modest magnitudes keep products well inside f64 range
    -3.0..3.0f64
}

fn jet2() -> impl Strategy<Value = Jet2> {
    // (order+1)(order+2)/2 coefficients for a dense bivariate jet
    prop::collection::vec(coeff(), 15).prop_map(|c| {
        let mut j = Jet2::zero(ORDER);
        let mut k = 0;
        for i in 0..=ORDER {
            for l in 0..=(ORDER - i) {
                j.set_coeff(i, l, c[k]);
                k += 1;
            }
        }
        j
    })
}

fn jet1() -> impl Strategy<Value = Jet1> {
    prop::collection::vec(coeff(), ORDER + 1).prop_map(Jet1::from_coeffs)
}

fn v3() -> impl Strategy<Value = V3<f64>> {
    (coeff(), coeff(), coeff()).prop_map(|(x, y, z)| V3::new(x, y, z))
}

fn jets_close(a: &Jet2, b: &Jet2, tol: f64) -> bool {
    (0..=ORDER).all(|i| {
        (0..=(ORDER - i)).all(|j| {
            let (x, y) = (a.coeff(i, j), b.coeff(i, j));
            (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
        })
    })
}

proptest! {
    // --- truncated polynomial ring axioms -------------------------------------

    #[test]
    fn jet2_addition_commutes(a in jet2(), b in jet2()) {
        prop_assert!(jets_close(&a.add(&b), &b.add(&a), 0.0));
    }

    #[test]
    fn jet2_multiplication_commutes(a in jet2(), b in jet2()) {
        prop_assert!(jets_close(&a.mul(&b), &b.mul(&a), 1e-12));
    }

    #[test]
    fn jet2_multiplication_associates(a in jet2(), b in jet2(), c in jet2()) {
        prop_assert!(jets_close(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)), 1e-10));
    }

    #[test]
    fn jet2_distributes(a in jet2(), b in jet2(), c in jet2()) {
        prop_assert!(jets_close(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)), 1e-11));
    }

    #[test]
    fn jet2_division_inverts_multiplication(a in jet2(), b in jet2()) {
        prop_assume!(b.value().abs() > 0.1);
        let q = a.mul(&b).div(&b).unwrap();
        prop_assert!(jets_close(&q, &a, 1e-8));
    }

    #[test]
    fn jet2_exp_ln_round_trip(a in jet2(), v in 0.5..3.0f64) {
        // base value well away from 0, where ln coefficients blow up and
        // rounding dominates the comparison
        let mut a = a;
        a.set_coeff(0, 0, v);
        let b = a.ln().unwrap().exp();
        prop_assert!(jets_close(&b, &a, 1e-9));
    }

    #[test]
    fn jet1_composition_associates(a in jet1(), b in jet1(), c in jet1()) {
        // composition only makes sense along jets without constant term
        let mut b = b; b.set_coeff(0, 0.0);
        let mut c = c; c.set_coeff(0, 0.0);
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        for k in 0..=ORDER {
            let (x, y) = (left.coeff(k), right.coeff(k));
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
                "coefficient {k}: {x} vs {y}");
        }
    }

    #[test]
    fn jet1_inverse_composes_to_identity(a in jet1(), a1 in 0.5..3.0f64, flip in any::<bool>()) {
        let mut a = a;
        a.set_coeff(0, 0.0);
        // inverse coefficients scale like a1^-(2k-1); keep the linear term
        // well-conditioned so cancellation stays below the tolerance
        a.set_coeff(1, if flip { -a1 } else { a1 });
        let inv = a.inverse().unwrap();
        let id = a.compose(&inv);
        prop_assert!((id.coeff(1) - 1.0).abs() < 1e-9);
        for k in 2..=ORDER {
            prop_assert!(id.coeff(k).abs() < 1e-8, "coefficient {k} = {}", id.coeff(k));
        }
    }

    // --- derivatives and evaluation ------------------------------------------

    #[test]
    fn jet2_partials_commute(a in jet2()) {
        let ab = a.du().dv();
        let ba = a.dv().du();
        prop_assert!(jets_close(&ab.truncated(ORDER - 2), &ba.truncated(ORDER - 2), 1e-12));
    }

    #[test]
    fn jet2_eval_matches_taylor_sum(a in jet2(), du in -0.5..0.5f64, dv in -0.5..0.5f64) {
        let mut sum = 0.0;
        for i in 0..=ORDER {
            for j in 0..=(ORDER - i) {
                sum += a.coeff(i, j) * du.powi(i as i32) * dv.powi(j as i32);
            }
        }
        prop_assert!((a.eval(du, dv) - sum).abs() < 1e-10 * sum.abs().max(1.0));
    }

    #[test]
    fn plug_curve_matches_pointwise_eval(
        a in jet2(), cu in jet1(), cv in jet1(), t in -0.2..0.2f64,
    ) {
        // restrict the bivariate jet along a parametrized curve through its
        // base point and compare the two evaluation orders
        let mut cu = cu; cu.set_coeff(0, 0.0);
        let mut cv = cv; cv.set_coeff(0, 0.0);
        let along = plug_curve(&a, (0.0, 0.0), &cu, &cv).unwrap();
        let direct = a.eval(cu.eval(t), cv.eval(t));
        // the jet route truncates the composition at degree ORDER; every
        // dropped monomial carries t^d with d > ORDER, so for |t| <= 1 the
        // gap is at most |t|^(ORDER+1) * sum_ij |a_ij| Su^i Sv^j with
        // Su = sum_k |cu_k|, Sv = sum_k |cv_k|
        let su: f64 = (1..=ORDER).map(|k| cu.coeff(k).abs()).sum();
        let sv: f64 = (1..=ORDER).map(|k| cv.coeff(k).abs()).sum();
        let mut tail = 0.0;
        for i in 0..=ORDER {
            for j in 0..=(ORDER - i) {
                tail += a.coeff(i, j).abs() * su.powi(i as i32) * sv.powi(j as i32);
            }
        }
        let tail = tail * t.abs().powi(ORDER as i32 + 1) * 1.0001;
        prop_assert!((along.eval(t) - direct).abs() <= 1e-9 * direct.abs().max(1.0) + tail);
    }

    // --- vector algebra --------------------------------------------------------

    #[test]
    fn det3_is_alternating(a in v3(), b in v3(), c in v3()) {
        let d = V3::det3(&a, &b, &c);
        prop_assert!((V3::det3(&b, &a, &c) + d).abs() < 1e-9 * d.abs().max(1.0));
        prop_assert!((V3::det3(&a, &c, &b) + d).abs() < 1e-9 * d.abs().max(1.0));
        prop_assert!(V3::det3(&a, &a, &c).abs() < 1e-9 * d.abs().max(1.0));
    }

    #[test]
    fn det3_matches_scalar_triple_product(a in v3(), b in v3(), c in v3()) {
        let d = V3::det3(&a, &b, &c);
        let t = a.dot(&b.cross(&c));
        prop_assert!((d - t).abs() < 1e-9 * d.abs().max(1.0));
    }

    #[test]
    fn cross_is_orthogonal(a in v3(), b in v3()) {
        let c = a.cross(&b);
        let scale = (a.dot(&a) * b.dot(&b)).sqrt().max(1.0);
        prop_assert!(a.dot(&c).abs() < 1e-10 * scale);
        prop_assert!(b.dot(&c).abs() < 1e-10 * scale);
    }

    // --- expression round trip ---------------------------------------------------

    #[test]
    fn parse_print_parse_round_trip(
        a in coeff(), b in coeff(), c in coeff(),
        u in -0.9..0.9f64, v in -0.9..0.9f64,
    ) {
        let src = format!(
            "({a})*u^2 + sin(({b})*v) - cos(u*v)/(2 + abs({c})) + sqrt(1 + u^2) + atan(v)"
        );
        let ast = parse_expression(&src).unwrap();
        let printed = ast.to_string();
        let reparsed = parse_expression(&printed).unwrap();
        let x = ast.eval_scalar(u, v).unwrap();
        let y = reparsed.eval_scalar(u, v).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{src} -> {printed}: {x} vs {y}");
    }

    #[test]
    fn expression_jet_matches_finite_difference(
        a in coeff(), b in coeff(), u in -0.5..0.5f64, v in -0.5..0.5f64,
    ) {
        let src = format!("exp(({a})*u)*cos(({b})*v) + u^3*v");
        let ast = parse_expression(&src).unwrap();
        let ju = Jet2::var_u(u, 2);
        let jv = Jet2::var_v(v, 2);
        let jet = ast.eval(&ju, &jv).unwrap();
        let h = 1e-5;
        let fd_u = (ast.eval_scalar(u + h, v).unwrap() - ast.eval_scalar(u - h, v).unwrap())
            / (2.0 * h);
        let fd_v = (ast.eval_scalar(u, v + h).unwrap() - ast.eval_scalar(u, v - h).unwrap())
            / (2.0 * h);
        prop_assert!((jet.partial(1, 0).unwrap() - fd_u).abs() < 1e-6 * fd_u.abs().max(1.0));
        prop_assert!((jet.partial(0, 1).unwrap() - fd_v).abs() < 1e-6 * fd_v.abs().max(1.0));
    }
}
