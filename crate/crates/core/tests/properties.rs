use gcmax::certificate::{
    check_max_nonneg, check_nf_condition, helly_check, solve_lp, solve_recursive, solve_two, verify_certificate,
    Certificate, SimplexPoint, Witness,
};
use gcmax::convexity::{check_convexity, fn_add, fn_max, fn_scale, is_convex};
use gcmax::generate::{
    random_convex_family, random_convex_function, random_family, random_kkt_instance, random_magma, random_term,
    rng_from_seed, FnStrategy, MagmaKind,
};
use gcmax::instance::{parse_instance, serialize_instance, ConvexityParams, Function, Instance};
use gcmax::kkt::{kkt_multipliers, kkt_verify_converse, solve_mp_bruteforce};
use gcmax::lp::maximin;
use gcmax::opcalc::{synthesize_ratio, OpTerm};
use gcmax::{BigInt, Error, Magma, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

type P = ConvexityParams<Rational>;
type F = Function<Rational>;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn positive() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn params() -> impl Strategy<Value = P> {
    (positive(), positive()).prop_map(|(p, q)| ConvexityParams::new(p, q).unwrap())
}

fn kind() -> impl Strategy<Value = MagmaKind> {
    prop::sample::select(MagmaKind::ALL.to_vec())
}

fn strategy() -> impl Strategy<Value = FnStrategy> {
    prop::sample::select(FnStrategy::ALL.to_vec())
}

fn value_matrix(fns: &[F]) -> Vec<Vec<Rational>> {
    fns.iter().map(|f| f.values.clone()).collect()
}

/// A convex function, or `None` when the strategy found none.
fn convex(magma: &Magma, p: &P, s: FnStrategy, seed: u64) -> Option<F> {
    let mut rng = rng_from_seed(seed);
    random_convex_function(magma, p, s, &mut rng).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rational_field_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!(a.clone() - a.clone(), Rational::zero());
        if !a.is_zero() {
            prop_assert_eq!(a.clone() * (Rational::one() / a.clone()), Rational::one());
        }
        prop_assert_eq!(a < b, a.clone() - b.clone() < Rational::zero());
    }

    #[test]
    fn instance_text_round_trips(k in kind(), m in 1usize..=5, n in 1usize..=3, p in params(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let magma = random_magma(k, m, &mut rng);
        let mut fns: Vec<F> = random_family(m, n, 6, &mut rng);
        for f in fns.iter_mut() {
            f.values = f.values.iter().map(|v| v.clone() / Rational::from_integer(BigInt::from(rng.random_range(1..=7)))).collect();
        }
        let inst = Instance::new(magma, p, fns).unwrap();
        let text = serialize_instance(&inst);
        let back: Instance<Rational> = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn convexity_scan_is_exhaustive(k in kind(), m in 1usize..=5, a in positive(), b in positive(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let magma = random_magma(k, m, &mut rng);
        let f: F = random_family(m, 1, 4, &mut rng).remove(0);
        let found = check_convexity(magma.table(), &a, &b, &f).unwrap();
        let mut expected = Vec::new();
        for x in 0..m {
            for y in 0..m {
                let rhs = a.clone() * f.at(x).clone() + b.clone() * f.at(y).clone();
                if *f.at(magma.op(x, y)) > rhs {
                    expected.push((x, y));
                }
            }
        }
        prop_assert_eq!(found.iter().map(|v| (v.x, v.y)).collect::<Vec<_>>(), expected);
        prop_assert!(found.iter().all(|v| v.lhs > v.rhs));
    }

    #[test]
    fn closure_under_add_scale_max(k in kind(), m in 1usize..=5, p in params(), s in strategy(), c in positive(), seed in any::<u64>()) {
        let magma = random_magma(k, m, &mut rng_from_seed(seed));
        let (Some(f), Some(g)) = (convex(&magma, &p, s, seed ^ 1), convex(&magma, &p, s, seed ^ 2)) else {
            return Ok(());
        };
        prop_assert!(is_convex(&magma, &p, &fn_add(&f, &g).unwrap()).unwrap());
        prop_assert!(is_convex(&magma, &p, &fn_scale(&c, &f).unwrap()).unwrap());
        prop_assert!(is_convex(&magma, &p, &fn_max(&[f, g]).unwrap()).unwrap());
    }

    #[test]
    fn nonnegative_convex_functions_stay_convex_for_larger_weights(
        k in kind(), m in 1usize..=5, p in params(), da in 0i64..=4, db in 0i64..=4, seed in any::<u64>()
    ) {
        let magma = random_magma(k, m, &mut rng_from_seed(seed));
        let Some(f) = convex(&magma, &p, FnStrategy::Structured, seed) else { return Ok(()) };
        let f = fn_max(&[f, Function::constant("zero", m, Rational::zero())]).unwrap();
        prop_assume!(is_convex(&magma, &p, &f).unwrap());
        let wider = ConvexityParams::new(p.p().clone() + rat(da, 3), p.q().clone() + rat(db, 3)).unwrap();
        prop_assert!(is_convex(&magma, &wider, &f).unwrap());
    }

    #[test]
    fn term_identities(p in params(), d1 in 0usize..=5, d2 in 0usize..=5, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let s = random_term(&p, d1, &mut rng);
        let t = random_term(&p, d2, &mut rng);
        let c = OpTerm::compose(s.clone(), t.clone());
        let (a, b) = s.coefficients();
        let (cc, d) = t.coefficients();
        let (a2, b2) = c.coefficients();
        prop_assert_eq!(c.ratio(), s.ratio() * t.ratio());
        prop_assert_eq!(OpTerm::swap(s.clone()).ratio(), Rational::one() - s.ratio());
        prop_assert_eq!(a2.clone() + b2.clone(), (a.clone() + b.clone()) * (cc.clone() + d.clone()));
        prop_assert!(a2.is_positive() && b2.is_positive());
        prop_assert_eq!(OpTerm::parse(&c.to_string(), &p).unwrap(), c);
    }

    #[test]
    fn realized_terms_transport_convexity(k in kind(), m in 1usize..=4, p in params(), s in strategy(), depth in 0usize..=5, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let magma = random_magma(k, m, &mut rng);
        let Some(f) = convex(&magma, &p, s, seed) else { return Ok(()) };
        let term = random_term(&p, depth, &mut rng);
        let op = term.realize(&magma);
        prop_assert!(op.table.iter().flatten().all(|&z| z < m));
        prop_assert!(check_convexity(&op.table, &op.a, &op.b, &f).unwrap().is_empty());
    }

    #[test]
    fn synthesized_ratio_lies_in_target(p in params(), den in 2i64..=400, x in 0.0f64..1.0, w in 0.0f64..1.0) {
        let lo_num = 1 + ((den - 2) as f64 * x) as i64;
        let hi_num = lo_num + ((den - 1 - lo_num) as f64 * w) as i64;
        let (lo, hi) = (rat(lo_num, den), rat(hi_num, den));
        match synthesize_ratio(&p, &lo, &hi) {
            Ok(term) => {
                let r = term.ratio();
                prop_assert!(lo <= r && r <= hi);
            }
            Err(e) => {
                // only degenerate targets outside the reachable powers may fail
                prop_assert!(lo == hi, "{}", e);
                let unreachable = matches!(e, Error::UnreachableRatio { .. });
                prop_assert!(unreachable);
            }
        }
    }

    #[test]
    fn solvers_agree_on_convex_families(k in kind(), m in 1usize..=5, n in 1usize..=4, p in params(), s in strategy(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let magma = random_magma(k, m, &mut rng);
        let Ok(fns) = random_convex_family(&magma, &p, n, s, true, &mut rng) else { return Ok(()) };
        let lp = solve_lp(&fns).unwrap();
        prop_assert!(lp.is_feasible());
        let rec = solve_recursive(&fns, &magma, &p).unwrap();
        let mut certs = vec![lp, rec];
        if n == 2 {
            certs.push(solve_two(&fns[0], &fns[1]).unwrap());
        }
        for cert in certs {
            let Certificate::Feasible { lambda, margin } = cert else {
                return Err(TestCaseError::fail("infeasible certificate"));
            };
            let (value, ok) = verify_certificate(&fns, &lambda).unwrap();
            prop_assert!(ok);
            prop_assert_eq!(value, margin);
        }
    }

    #[test]
    fn two_function_solver_matches_lp(m in 1usize..=6, seed in any::<u64>()) {
        let fns: Vec<F> = random_family(m, 2, 3, &mut rng_from_seed(seed));
        let two = solve_two(&fns[0], &fns[1]).unwrap();
        let lp = solve_lp(&fns).unwrap();
        prop_assert_eq!(two.is_feasible(), lp.is_feasible());
        if let Certificate::Infeasible { witness } = two {
            prop_assert!(witness.verify(&fns).unwrap());
        }
    }

    #[test]
    fn nf_helly_and_lp_are_equivalent(m in 1usize..=4, n in 1usize..=3, seed in any::<u64>()) {
        let fns: Vec<F> = random_family(m, n, 3, &mut rng_from_seed(seed));
        let lp = solve_lp(&fns).unwrap().is_feasible();
        let nf = check_nf_condition(&fns).unwrap();
        let helly = helly_check(&fns).unwrap();
        prop_assert_eq!(lp, nf.is_none());
        prop_assert_eq!(lp, helly.is_none());
        if let Some(w) = nf {
            // recompute max_i Σ_j t_j f_i(x_j) at the reported t
            let worst = fns
                .iter()
                .map(|f| w.tuple.iter().zip(w.t.weights()).fold(Rational::zero(), |acc, (&x, t)| acc + t.clone() * f.at(x).clone()))
                .max()
                .unwrap();
            prop_assert_eq!(worst, w.value.clone());
            prop_assert!(w.value.is_negative());
        }
    }

    #[test]
    fn lp_margin_dominates_the_grid(m in 1usize..=4, n in 1usize..=3, seed in any::<u64>()) {
        let fns: Vec<F> = random_family(m, n, 4, &mut rng_from_seed(seed));
        let exact = maximin(&value_matrix(&fns));
        let lambda = SimplexPoint::new(exact.weights.clone()).unwrap();
        let (attained, _) = verify_certificate(&fns, &lambda).unwrap();
        prop_assert_eq!(&attained, &exact.value);
        let mut best: Option<Rational> = None;
        for i in 0..=12i64 {
            for j in 0..=(12 - i) {
                let w = match n {
                    1 => if i == 12 && j == 0 { vec![rat(1, 1)] } else { continue },
                    2 => if i + j == 12 { vec![rat(i, 12), rat(j, 12)] } else { continue },
                    _ => vec![rat(i, 12), rat(j, 12), rat(12 - i - j, 12)],
                };
                let (v, _) = verify_certificate(&fns, &SimplexPoint::new(w).unwrap()).unwrap();
                best = Some(match best { Some(b) if b >= v => b, _ => v });
            }
        }
        prop_assert!(best.unwrap() <= exact.value);
        if let Certificate::Feasible { margin, .. } = solve_lp(&fns).unwrap() {
            prop_assert_eq!(margin, exact.value);
        }
    }

    #[test]
    fn infeasibility_witnesses_are_sound(m in 1usize..=5, n in 1usize..=4, seed in any::<u64>()) {
        let fns: Vec<F> = random_family(m, n, 3, &mut rng_from_seed(seed));
        if let Certificate::Infeasible { witness } = solve_lp(&fns).unwrap() {
            prop_assert!(witness.verify(&fns).unwrap());
            let Witness::Minimax { value, .. } = &witness else {
                return Err(TestCaseError::fail("expected a minimax witness"));
            };
            prop_assert!(value.is_negative());
            prop_assert_eq!(value, &maximin(&value_matrix(&fns)).value);
        } else {
            prop_assert!(check_max_nonneg(&fns).unwrap().is_none());
        }
    }

    #[test]
    fn kkt_round_trip(k in kind(), m in 1usize..=5, n in 0usize..=3, p in params(), s in strategy(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let magma = random_magma(k, m, &mut rng);
        let Ok(inst) = random_kkt_instance(&magma, &p, n, s, &mut rng) else { return Ok(()) };
        let res = kkt_multipliers(&inst.objective, &inst.constraints, inst.x0, &magma, &p).unwrap();
        prop_assert!(res.transversality_products.iter().all(Zero::is_zero));
        prop_assert!(!res.el_margin.is_negative());
        prop_assert_eq!(&res.minimizers, &solve_mp_bruteforce(&inst.objective, &inst.constraints).unwrap());
        let converse = kkt_verify_converse(&inst.objective, &inst.constraints, inst.x0, &res.lambda);
        if res.is_degenerate() {
            prop_assert!(matches!(converse, Err(Error::DegenerateMultiplier)));
        } else {
            prop_assert!(converse.unwrap());
        }
    }
}
