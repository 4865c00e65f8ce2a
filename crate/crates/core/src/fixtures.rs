//! Small built-in instances used as regression anchors.

use crate::instance::{ConvexityParams, Function, Instance, Magma};
use crate::Rational;

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Two elements `{a1, a2}` partitioned into singletons, with `f_i = 0` on
/// `A_i` and `-1` elsewhere. The pointwise maximum is 0 but every convex
/// combination is negative somewhere; the operation (addition mod 2) plays no role.
pub fn counterexample() -> Instance<Rational> {
    Instance::new(
        Magma::cyclic_addition(2),
        ConvexityParams::new(int(1), int(1)).unwrap(),
        vec![Function::from_ints("f1", &[0, -1]), Function::from_ints("f2", &[-1, 0])],
    )
    .and_then(|i| i.with_elements(vec!["a1".into(), "a2".into()]))
    .expect("valid fixture")
}

/// `{0,1,2}` under `max` with `p = q = 1/2`; both functions are convex and
/// the only certificate is `λ = (0, 1)`.
pub fn max_semilattice() -> Instance<Rational> {
    Instance::new(
        Magma::max_semilattice(3),
        ConvexityParams::new(half(), half()).unwrap(),
        vec![Function::from_ints("f1", &[2, 0, -1]), Function::from_ints("f2", &[3, 1, 0])],
    )
    .expect("valid fixture")
}

/// Subadditive functions on `Z_5`: cyclic distance to 0, and a function
/// alternating between 1 and 2.
pub fn cyclic_subadditive() -> Instance<Rational> {
    Instance::new(
        Magma::cyclic_addition(5),
        ConvexityParams::new(int(1), int(1)).unwrap(),
        vec![Function::from_ints("dist", &[0, 1, 2, 2, 1]), Function::from_ints("wave", &[2, 1, 2, 1, 2])],
    )
    .expect("valid fixture")
}

/// The constrained problem on [`max_semilattice`]: minimize `f0 = (2,1,0)`
/// subject to `f1 = (3,1,0) <= 0`. The only admissible point is 2.
pub fn kkt_max_semilattice() -> Instance<Rational> {
    Instance::new(
        Magma::max_semilattice(3),
        ConvexityParams::new(half(), half()).unwrap(),
        vec![Function::from_ints("f0", &[2, 1, 0]), Function::from_ints("f1", &[3, 1, 0])],
    )
    .expect("valid fixture")
}

/// One nonnegative subadditive function on `Z_2`; the certificate is `λ = (1)`.
pub fn single_nonneg() -> Instance<Rational> {
    Instance::new(
        Magma::cyclic_addition(2),
        ConvexityParams::new(int(1), int(1)).unwrap(),
        vec![Function::from_ints("f", &[0, 3])],
    )
    .expect("valid fixture")
}

/// Minimize `f0 = (2,1,0)` on the max semilattice subject to `f1 = -1 <= 0`,
/// a constraint that is slack everywhere, so `λ_1 = 0`.
pub fn kkt_slack() -> Instance<Rational> {
    Instance::new(
        Magma::max_semilattice(3),
        ConvexityParams::new(half(), half()).unwrap(),
        vec![Function::from_ints("f0", &[2, 1, 0]), Function::from_ints("f1", &[-1, -1, -1])],
    )
    .expect("valid fixture")
}

/// All built-in fixtures with their file stems.
pub fn all() -> Vec<(&'static str, Instance<Rational>)> {
    vec![
        ("counterexample", counterexample()),
        ("max_semilattice", max_semilattice()),
        ("cyclic_subadditive", cyclic_subadditive()),
        ("kkt_max_semilattice", kkt_max_semilattice()),
        ("single_nonneg", single_nonneg()),
        ("kkt_slack", kkt_slack()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::is_convex;

    #[test]
    fn convex_fixtures_are_convex() {
        for inst in [max_semilattice(), cyclic_subadditive(), kkt_max_semilattice(), single_nonneg(), kkt_slack()] {
            for f in &inst.functions {
                assert!(is_convex(&inst.magma, &inst.params, f).unwrap(), "{}", f.name);
            }
        }
    }
}
