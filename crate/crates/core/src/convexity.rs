//! Deciding `(op, a, b)`-convexity, and the operations that preserve it.

use crate::error::{Error, Result};
use crate::instance::{family_size, ConvexityParams, Function, Magma};
use crate::scalar::Scalar;

/// A pair `(x, y)` with `f(x∘y) > a f(x) + b f(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation<T> {
    pub x: usize,
    pub y: usize,
    /// `f(x∘y)`
    pub lhs: T,
    /// `a f(x) + b f(y)`
    pub rhs: T,
}

/// Scans all `m²` ordered pairs and returns every violation in row-major order.
///
/// An empty result means `f(x∘y) <= a f(x) + b f(y)` for all `x, y`.
pub fn check_convexity<T: Scalar>(
    op_table: &[Vec<usize>],
    a: &T,
    b: &T,
    f: &Function<T>,
) -> Result<Vec<Violation<T>>> {
    if !a.is_positive() {
        return Err(Error::NonPositive { name: "a", value: a.to_canonical() });
    }
    if !b.is_positive() {
        return Err(Error::NonPositive { name: "b", value: b.to_canonical() });
    }
    let m = op_table.len();
    if f.len() != m {
        return Err(Error::SizeMismatch { context: "check_convexity", expected: m, found: f.len() });
    }
    if let Some(row) = op_table.iter().find(|row| row.len() != m) {
        return Err(Error::SizeMismatch { context: "check_convexity table row", expected: m, found: row.len() });
    }

    let mut violations = Vec::new();
    for (x, row) in op_table.iter().enumerate() {
        let ax = a.clone() * f.at(x).clone();
        for (y, &xy) in row.iter().enumerate() {
            if xy >= m {
                return Err(Error::IndexOutOfRange { index: xy, size: m });
            }
            let rhs = ax.clone() + b.clone() * f.at(y).clone();
            if *f.at(xy) > rhs {
                violations.push(Violation { x, y, lhs: f.at(xy).clone(), rhs });
            }
        }
    }
    Ok(violations)
}

/// Convenience wrapper: is `f` `(∘, p, q)`-convex on `magma`?
pub fn is_convex<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, f: &Function<T>) -> Result<bool> {
    Ok(check_convexity(magma.table(), params.p(), params.q(), f)?.is_empty())
}

/// Index of the first function in `fns` that is not convex, if any.
pub fn first_nonconvex<T: Scalar>(
    magma: &Magma,
    params: &ConvexityParams<T>,
    fns: &[Function<T>],
) -> Result<Option<usize>> {
    for (i, f) in fns.iter().enumerate() {
        if !is_convex(magma, params, f)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

pub fn fn_add<T: Scalar>(f: &Function<T>, g: &Function<T>) -> Result<Function<T>> {
    if f.len() != g.len() {
        return Err(Error::SizeMismatch { context: "fn_add", expected: f.len(), found: g.len() });
    }
    let values = f.values.iter().zip(&g.values).map(|(u, v)| u.clone() + v.clone()).collect();
    Ok(Function::new(format!("({}+{})", f.name, g.name), values))
}

pub fn fn_scale<T: Scalar>(c: &T, f: &Function<T>) -> Result<Function<T>> {
    if !c.is_positive() {
        return Err(Error::NonPositive { name: "scale factor", value: c.to_canonical() });
    }
    let values = f.values.iter().map(|v| c.clone() * v.clone()).collect();
    Ok(Function::new(format!("{}*{}", c.to_canonical(), f.name), values))
}

pub fn fn_max<T: Scalar>(fns: &[Function<T>]) -> Result<Function<T>> {
    let m = family_size(fns, "fn_max")?;
    let values = (0..m)
        .map(|x| {
            fns.iter()
                .map(|f| f.at(x))
                .fold(None::<&T>, |acc, v| match acc {
                    Some(best) if *best >= *v => Some(best),
                    _ => Some(v),
                })
                .cloned()
                .expect("nonempty family")
        })
        .collect();
    let names: Vec<&str> = fns.iter().map(|f| f.name.as_str()).collect();
    Ok(Function::new(format!("max({})", names.join(",")), values))
}

/// `Σ w_i f_i` for nonnegative weights; zero weights are allowed.
pub fn fn_combine<T: Scalar>(weights: &[T], fns: &[Function<T>]) -> Result<Function<T>> {
    let m = family_size(fns, "fn_combine")?;
    if weights.len() != fns.len() {
        return Err(Error::SizeMismatch { context: "fn_combine weights", expected: fns.len(), found: weights.len() });
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(Error::NonPositive { name: "combination weight", value: w.to_canonical() });
    }
    let values = (0..m)
        .map(|x| {
            weights
                .iter()
                .zip(fns)
                .fold(T::zero(), |acc, (w, f)| acc + w.clone() * f.at(x).clone())
        })
        .collect();
    Ok(Function::new("combination", values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, Scalar};

    type F = Function<Rational>;

    fn r(s: &str) -> Rational {
        Rational::parse_scalar(s).unwrap()
    }

    #[test]
    fn zero_function_is_convex_everywhere() {
        let magma = Magma::from_fn(4, |x, y| (3 * x + y + 1) % 4).unwrap();
        let zero = F::constant("z", 4, r("0"));
        for (a, b) in [("1", "1"), ("1/7", "3"), ("5/2", "1/100")] {
            assert!(check_convexity(magma.table(), &r(a), &r(b), &zero).unwrap().is_empty());
        }
    }

    #[test]
    fn constant_table_violation() {
        // op ≡ 0, a = b = 1, f = (5, -10): pairs (0,0): 5 <= 10 ok; (0,1),(1,0): 5 <= -5 no; (1,1): 5 <= -20 no.
        let magma = Magma::from_fn(2, |_, _| 0).unwrap();
        let f = F::from_ints("f", &[5, -10]);
        let v = check_convexity(magma.table(), &r("1"), &r("1"), &f).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!((v[0].x, v[0].y), (0, 1));
        assert_eq!((v[1].x, v[1].y), (1, 0));
        assert_eq!(v[2], Violation { x: 1, y: 1, lhs: r("5"), rhs: r("-20") });
    }

    #[test]
    fn max_semilattice_average() {
        let magma = Magma::max_semilattice(3);
        let f = F::from_ints("f", &[2, 0, -1]);
        assert!(check_convexity(magma.table(), &r("1/2"), &r("1/2"), &f).unwrap().is_empty());
        let g = F::from_ints("g", &[-1, 0, 2]);
        assert!(!check_convexity(magma.table(), &r("1/2"), &r("1/2"), &g).unwrap().is_empty());
    }

    #[test]
    fn noncommutative_pairs_are_checked_both_ways() {
        // x∘y = x (left projection): f(x) <= a f(x) + b f(y) for all x,y.
        let magma = Magma::from_fn(2, |x, _| x).unwrap();
        let f = F::from_ints("f", &[1, 0]);
        let v = check_convexity(magma.table(), &r("1"), &r("1"), &f).unwrap();
        assert!(v.is_empty());
        let v = check_convexity(magma.table(), &r("1/2"), &r("1/2"), &f).unwrap();
        assert_eq!(v.iter().map(|v| (v.x, v.y)).collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn argument_errors() {
        let magma = Magma::cyclic_addition(2);
        let f = F::from_ints("f", &[0, 0, 0]);
        assert!(matches!(
            check_convexity(magma.table(), &r("1"), &r("1"), &f),
            Err(Error::SizeMismatch { .. })
        ));
        let f = F::from_ints("f", &[0, 0]);
        assert!(check_convexity(magma.table(), &r("0"), &r("1"), &f).is_err());
        assert!(fn_scale(&r("0"), &f).is_err());
        assert!(fn_scale(&r("-1"), &f).is_err());
        assert!(fn_max::<Rational>(&[]).is_err());
        assert!(fn_add(&f, &F::from_ints("g", &[1])).is_err());
    }

    #[test]
    fn pointwise_operations() {
        let f = F::from_ints("f", &[1, 2]);
        let g = F::from_ints("g", &[3, 4]);
        assert_eq!(fn_add(&f, &g).unwrap().values, F::from_ints("", &[4, 6]).values);
        assert_eq!(
            fn_scale(&r("1/2"), &F::from_ints("h", &[2, -4])).unwrap().values,
            F::from_ints("", &[1, -2]).values
        );
        // partition {0} | {1}: indicator-style pair from the non-example of the maximum property
        let f1 = F::from_ints("f1", &[0, -1]);
        let f2 = F::from_ints("f2", &[-1, 0]);
        assert_eq!(fn_max(&[f1, f2]).unwrap().values, vec![r("0"), r("0")]);
    }

    #[test]
    fn combine_allows_zero_weights() {
        let f = F::from_ints("f", &[1, 2]);
        let g = F::from_ints("g", &[3, 4]);
        let h = fn_combine(&[r("0"), r("1/2")], &[f.clone(), g]).unwrap();
        assert_eq!(h.values, vec![r("3/2"), r("2")]);
        assert!(fn_combine(&[r("-1"), r("1")], &[f.clone(), f]).is_err());
    }
}
