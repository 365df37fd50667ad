use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use oiforge::dio::{dio_search, dio_search_serial, SearchSpec};
use oiforge::field::FieldElem;
use oiforge::genpoly::{compile_sigma, CompiledSystem};
use oiforge::lattice::{hnf, left_kernel, rank, vec_mat};
use oiforge::padic::{brute_roots, crt, hensel_root, prime_power};
use oiforge::poly::uni;
use oiforge::syntax::{parse_expr, to_field, Expr};
use oiforge::{NumberField, PrecisionCtx, WorkspaceSpec};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ctx() -> PrecisionCtx {
    PrecisionCtx::default()
}

fn cubic() -> NumberField {
    NumberField::new(vec![(-2).into(), 0.into(), 0.into(), 1.into()], q(1, 1), q(2, 1)).unwrap()
}

fn rat() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| q(n, d))
}

fn elem(deg: usize) -> impl Strategy<Value = FieldElem> {
    proptest::collection::vec(rat(), deg).prop_map(FieldElem::from_coords)
}

fn sequence_system() -> &'static CompiledSystem {
    static SYS: OnceLock<CompiledSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        let ws = WorkspaceSpec::parse(
            "[field]\nsqrt = 2\n[symbols]\nr1 = 0.30103\nr2 = 1/3\n[sequence]\ng0 = t\ng1 = sqrt(2)*t - r1\ng2 = 2*sqrt(2)*r1*t - r2\n",
        )
        .unwrap();
        compile_sigma(&ws.sequence().unwrap())
    })
}

fn rotation_system() -> &'static CompiledSystem {
    static SYS: OnceLock<CompiledSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        let ws = WorkspaceSpec::parse(
            "[field]\nsqrt = 2\n[symbols]\nr1 = 0.30103\n[sequence]\ng0 = t\ng1 = sqrt(2)*t - r1\n",
        )
        .unwrap();
        compile_sigma(&ws.sequence().unwrap())
    })
}

fn ring_laws(field: &NumberField, a: &FieldElem, b: &FieldElem, c: &FieldElem) {
    assert_eq!(field.mul(a, b), field.mul(b, a));
    assert_eq!(field.mul(&field.mul(a, b), c), field.mul(a, &field.mul(b, c)));
    assert_eq!(field.mul(a, &b.add(c)), field.mul(a, b).add(&field.mul(a, c)));
    assert_eq!(a.add(b).sub(b), *a);
    assert_eq!(field.mul(a, &FieldElem::one()), *a);
}

fn floor_brackets(field: &NumberField, a: &FieldElem) {
    let ctx = ctx();
    let f = field.floor(a, &ctx).unwrap();
    let lo = a.sub(&FieldElem::from_int(f.clone()));
    let hi = FieldElem::from_int(f + 1).sub(a);
    assert!(field.sign(&lo, &ctx).unwrap() >= 0);
    assert_eq!(field.sign(&hi, &ctx).unwrap(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_field_laws(a in elem(2), b in elem(2), c in elem(2)) {
        let field = NumberField::sqrt(2).unwrap();
        ring_laws(&field, &a, &b, &c);
        floor_brackets(&field, &a);
        let ctx = ctx();
        // sign of a product
        let sab = field.sign(&field.mul(&a, &b), &ctx).unwrap();
        prop_assert_eq!(sab, field.sign(&a, &ctx).unwrap() * field.sign(&b, &ctx).unwrap());
        // the closed form agrees with interval refinement
        prop_assert_eq!(field.sign(&a, &ctx).unwrap(), field.sign_by_intervals(&a, &ctx).unwrap());
        prop_assert_eq!(field.floor(&a, &ctx).unwrap(), field.floor_by_intervals(&a, &ctx).unwrap());
    }

    #[test]
    fn cubic_field_laws(a in elem(3), b in elem(3), c in elem(3)) {
        let field = cubic();
        ring_laws(&field, &a, &b, &c);
        floor_brackets(&field, &a);
        let approx = field.approx(&a);
        let f = field.floor(&a, &ctx()).unwrap();
        // doubles agree away from integers
        if (approx - approx.round()).abs() > 1e-6 {
            prop_assert_eq!(f, BigInt::from(approx.floor() as i64));
        }
    }

    #[test]
    fn puiseux_arithmetic(a in -6i64..=6, b in -6i64..=6, c in 1i64..=5, k in 1u32..=3) {
        let ws = WorkspaceSpec::parse("[field]\nsqrt = 2\n[symbols]\nr1 = 1/3\n[generators]\nt0 = t\n").unwrap();
        let x = ws.element(&format!("{a}*t^{k} + sqrt(2)*r1")).unwrap();
        let y = ws.element(&format!("{b}*t - r1^2 + {c}")).unwrap();
        let z = ws.element(&format!("{c}*t^2 + {a}")).unwrap();
        let lhs = x.try_add(&y).unwrap().try_mul(&z).unwrap();
        let rhs = x.try_mul(&z).unwrap().try_add(&y.try_mul(&z).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(x.try_mul(&y).unwrap(), y.try_mul(&x).unwrap());
        let ctx = ctx();
        // t dominates every constant
        let sxy = x.try_sub(&y).unwrap().sign(&ctx).unwrap();
        let syx = y.try_sub(&x).unwrap().sign(&ctx).unwrap();
        prop_assert_eq!(sxy, -syx);
        let ip = x.integer_part(&ctx).unwrap();
        let frac = x.try_sub(&ip).unwrap();
        prop_assert!(frac.is_t_free());
        prop_assert!(frac.sign(&ctx).unwrap() >= 0);
    }

    #[test]
    fn kernel_annihilates(rows in 1usize..=6, cols in 1usize..=5, seed in proptest::collection::vec(-9i64..=9, 30)) {
        let a: Vec<Vec<BigInt>> =
            (0..rows).map(|r| (0..cols).map(|c| BigInt::from(seed[r * cols + c])).collect()).collect();
        let k = left_kernel(&a);
        prop_assert_eq!(k.len(), rows - rank(&a));
        for v in &k {
            prop_assert!(vec_mat(v, &a).iter().all(|x| x.is_zero()));
        }
        let h = hnf(k.clone());
        prop_assert_eq!(hnf(h.clone()), h.clone());
        prop_assert_eq!(h.len(), k.len());
    }

    #[test]
    fn crt_solves_every_congruence(r in proptest::collection::vec(0i64..1000, 4), e in proptest::collection::vec(1u32..=3, 4)) {
        let primes = [2u64, 3, 5, 7];
        let cong: Vec<(BigInt, BigInt)> =
            primes.iter().zip(&r).zip(&e).map(|((&p, &ri), &ei)| (BigInt::from(ri), prime_power(p, ei))).collect();
        let x = crt(&cong).unwrap();
        let total: BigInt = cong.iter().map(|(_, m)| m.clone()).product();
        prop_assert!(!x.is_negative() && x < total);
        for (ri, m) in &cong {
            prop_assert_eq!(x.mod_floor(m), ri.mod_floor(m));
        }
    }

    #[test]
    fn hensel_on_quadratic_residues(pi in 0usize..5, a in 1i64..500, k in 1u32..=6) {
        let p = [3u64, 5, 7, 11, 13][pi];
        prop_assume!(a % p as i64 != 0);
        // x^2 - a^2, ascending
        let g = vec![BigInt::from(-a * a), BigInt::zero(), BigInt::one()];
        let root = hensel_root(&g, p, k).unwrap();
        let m = prime_power(p, k);
        prop_assert!(uni::eval(&g, root.residue()).mod_floor(&m).is_zero());
        if k <= 3 {
            prop_assert!(brute_roots(&g, p, k).contains(root.residue()));
        }
    }

    #[test]
    fn syntax_round_trip(e in expr_tree()) {
        let text = e.render();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back.render(), text.clone());
        let field = NumberField::sqrt(2).unwrap();
        let vals = |s: &str| match s {
            "x" => Some(FieldElem::from_rational(q(7, 3))),
            "y" => Some(field.theta()),
            _ => None,
        };
        let ctx = ctx();
        prop_assert_eq!(to_field(&e, &field, &vals, &ctx).unwrap(), to_field(&back, &field, &vals, &ctx).unwrap());
    }

    #[test]
    fn gammas_lie_in_unit_interval_and_on_the_parabola(y in 1u64..2_000_000) {
        let sys = sequence_system();
        let field = sys.field();
        let ctx = ctx();
        let p = sys.gamma_eval(&BigInt::from(y), &ctx).unwrap();
        for g in &p.gamma {
            prop_assert!(field.sign(g, &ctx).unwrap() >= 0);
            prop_assert_eq!(field.sign(&g.sub(&FieldElem::one()), &ctx).unwrap(), -1);
        }
        prop_assert_eq!(field.mul(&p.gamma[0], &p.gamma[0]), p.gamma[1].clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn search_serial_matches_parallel_and_grows_with_epsilon(y_max in 1u64..1500, d in 10i64..200) {
        let sys = rotation_system();
        let ctx = ctx();
        let narrow = SearchSpec::new(sys, q(1, d), y_max);
        let wide = SearchSpec::new(sys, q(2, d), y_max);
        let a = dio_search(&narrow, &ctx).unwrap();
        prop_assert_eq!(&a, &dio_search_serial(&narrow, &ctx).unwrap());
        let b = dio_search(&wide, &ctx).unwrap();
        let wide_ys = b.y0s();
        prop_assert!(a.y0s().iter().all(|y| wide_ys.contains(y)));
    }
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..30).prop_map(|n| Expr::Num(q(n, 1))),
        (1i64..30, 2i64..9).prop_map(|(n, d)| Expr::Num(q(n, d))),
        Just(Expr::Theta),
        Just(Expr::Sqrt(8)),
        Just(Expr::Ident("x".into())),
        Just(Expr::Ident("y".into())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(a.into(), b.into())),
            inner.clone().prop_map(|a| Expr::Neg(a.into())),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| Expr::Pow(a.into(), k)),
            inner.clone().prop_map(|a| Expr::Floor(a.into())),
            inner.prop_map(|a| Expr::Frac(a.into())),
        ]
    })
}
