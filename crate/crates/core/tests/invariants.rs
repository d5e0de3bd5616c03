//! Randomized invariants: expression printing and differentiation, space-form retraction,
//! ambient curvature symmetries, verdict thresholds and canonical forms.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surflab::classify::{shape_canonical_form, CanonicalForm, Verdict};
use surflab::exprlang::{parse, Expr, Func, Node};
use surflab::numkit::jet::derivative;
use surflab::numkit::linalg::{Mat2, Vector};
use surflab::spaceforms::SpaceFormModel;
use surflab::spacetime::{Spacetime, Warping};

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        Just(Node::Var),
        (-4.0f64..4.0).prop_map(|x| Node::num((x * 8.0).round() / 8.0)),
    ]
}

fn tree(funcs: Vec<Func>, with_div: bool) -> impl Strategy<Value = Node> {
    leaf().prop_recursive(4, 24, 2, move |inner| {
        let funcs = funcs.clone();
        let binary = (
            inner.clone(),
            inner.clone(),
            0..if with_div { 4 } else { 3 },
        )
            .prop_map(|(a, b, op)| match op {
                0 => Node::add(a, b),
                1 => Node::sub(a, b),
                2 => Node::mul(a, b),
                _ => Node::div(a, b),
            });
        prop_oneof![
            inner.clone().prop_map(Node::neg),
            binary,
            (inner.clone(), 0i32..4).prop_map(|(a, n)| Node::pow(a, n)),
            (inner, 0..funcs.len()).prop_map(move |(a, i)| Node::call(funcs[i], a)),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

const SMOOTH: [Func; 7] = [
    Func::Sin,
    Func::Cos,
    Func::Sinh,
    Func::Cosh,
    Func::Tanh,
    Func::Exp,
    Func::Atan,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_expression_parses_to_same_values(
        node in tree(Func::ALL.to_vec(), true),
        x in -1.5f64..1.5,
    ) {
        let e = Expr::new(node, "z");
        let back = parse(&e.to_string()).unwrap();
        match (e.eval(x), back.eval(x)) {
            (Ok(a), Ok(b)) if a.is_finite() => prop_assert!(close(a, b, 1e-12), "{e}: {a} vs {b}"),
            (Ok(_), Ok(_)) | (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn symbolic_derivative_matches_difference(
        node in tree(SMOOTH.to_vec(), false),
        x in -1.0f64..1.0,
    ) {
        let e = Expr::new(node, "z");
        let y = e.eval(x).unwrap();
        prop_assume!(y.abs() < 1e4);
        let exact = e.differentiate().eval(x).unwrap();
        prop_assume!(exact.abs() < 1e4);
        let fd = derivative(|t| e.eval(t), x, 1e-3).unwrap();
        prop_assert!(close(exact, fd, 1e-5), "{e}: {exact} vs {fd}");
    }

    #[test]
    fn retraction_lands_on_the_model(
        c in -1i32..=1,
        coords in prop::array::uniform4(-2.0f64..2.0),
        shift in 0.5f64..2.0,
    ) {
        let m = SpaceFormModel::new(c).unwrap();
        let mut x = Vector::from_slice(&coords[..m.ambient_dim()]);
        // move into the region where ⟨x,x⟩ has the sign of c
        match c {
            1 => x[1] += shift.copysign(x[1]) * 2.0,
            -1 => x[0] += shift.copysign(x[0]) * 2.0,
            _ => {}
        }
        prop_assume!(m.g(&x, &x) * m.c() > 0.0 || c == 0);
        let p = m.retract(&x);
        prop_assert!(m.membership_residual(&p) < 1e-12);
        let v = Vector::from_slice(&[0.3, -0.7, 0.2, 0.5][..m.ambient_dim()]);
        let t = m.project(&p, &v);
        if c != 0 {
            prop_assert!(m.g(&t, &p).abs() < 1e-12 * (1.0 + v.max_abs() * p.max_abs()));
        }
    }

    #[test]
    fn ambient_curvature_symmetries(c in -1i32..=1, w in 0usize..3, seed in any::<u64>()) {
        let warping = Warping::new(["exp(z)", "cosh(z)", "1 + z^2/4"][w], (-1.0, 1.0), 0.0).unwrap();
        let st = Spacetime::new(SpaceFormModel::new(c).unwrap(), warping);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = st.random_point(&mut rng);
        let [x, y, z, u] = std::array::from_fn(|_| st.random_tangent(&p, &mut rng));
        let z0 = p[st.base_dim()];
        let r = |a: &Vector, b: &Vector, c: &Vector, d: &Vector| {
            st.inner_z(z0, &st.curvature_lifted(&p, a, b, c), d)
        };
        let scale = 1.0 + r(&x, &y, &z, &u).abs();
        prop_assert!((r(&x, &y, &z, &u) + r(&y, &x, &z, &u)).abs() < 1e-9 * scale);
        prop_assert!((r(&x, &y, &z, &u) + r(&x, &y, &u, &z)).abs() < 1e-9 * scale);
        prop_assert!((r(&x, &y, &z, &u) - r(&z, &u, &x, &y)).abs() < 1e-9 * scale);
        let bianchi = r(&x, &y, &z, &u) + r(&y, &z, &x, &u) + r(&z, &x, &y, &u);
        prop_assert!(bianchi.abs() < 1e-9 * scale);
    }

    #[test]
    fn verdicts_are_monotone_in_the_residual(
        a in 0.0f64..1e-2,
        b in 0.0f64..1e-2,
        norm in 0.0f64..100.0,
    ) {
        let rank = |v: Verdict| match v {
            Verdict::Pass => 0,
            Verdict::Indeterminate => 1,
            _ => 2,
        };
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(rank(Verdict::from_residual(lo, norm)) <= rank(Verdict::from_residual(hi, norm)));
        prop_assert!(rank(Verdict::from_residual(lo, norm + 1.0)) <= rank(Verdict::from_residual(lo, norm)));
    }

    #[test]
    fn aggregate_verdict_ignores_order(vs in prop::collection::vec(0usize..3, 0..8)) {
        let all = [Verdict::Pass, Verdict::Indeterminate, Verdict::Fail];
        let seq: Vec<Verdict> = vs.iter().map(|&i| all[i]).collect();
        let mut rev = seq.clone();
        rev.reverse();
        let expected = if vs.contains(&2) {
            Verdict::Fail
        } else if vs.contains(&1) {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        };
        prop_assert_eq!(Verdict::all(seq), expected);
        prop_assert_eq!(Verdict::all(rev), expected);
    }

    #[test]
    fn canonical_form_preserves_trace_and_determinant(
        g in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        s in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
    ) {
        let metric = Mat2::new(g.0, g.1, g.1, g.2);
        prop_assume!(metric.det() < -0.1);
        // gA symmetric, so A is self-adjoint for the metric
        let a = metric.inverse().unwrap().mul(&Mat2::new(s.0, s.1, s.1, s.2));
        let (tr, det) = (a.trace(), a.det());
        let tol = 1e-6 * (1.0 + a.max_abs()).powi(2);
        let (t, d) = match shape_canonical_form(&a, &metric).unwrap() {
            CanonicalForm::I { lambda1, lambda2 } => {
                prop_assert!(lambda1 <= lambda2);
                (lambda1 + lambda2, lambda1 * lambda2)
            }
            CanonicalForm::II { lambda, mu } => {
                prop_assert!(mu != 0.0);
                (2.0 * lambda, lambda * lambda + mu * mu)
            }
            CanonicalForm::III { lambda } => (2.0 * lambda, lambda * lambda),
        };
        prop_assert!((t - tr).abs() < tol, "trace {t} vs {tr}");
        prop_assert!((d - det).abs() < tol, "det {d} vs {det}");
    }
}
