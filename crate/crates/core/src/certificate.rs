//! Nonnegative convex combinations of function families.
//!
//! A certificate for `f_1, .., f_n` is a point `λ` of the simplex `S_n` with
//! `Σ λ_i f_i(x) >= 0` at every element. Three solvers compute one:
//! [`solve_lp`] (exact LP, any family), [`solve_two`] (interval
//! intersection, two functions) and [`solve_recursive`] (the induction on
//! pointwise maxima, convex families only). [`check_nf_condition`] and
//! [`helly_check`] decide existence without producing `λ`.

use itertools::Itertools;
use serde_json::{json, Value};

use crate::convexity::{first_nonconvex, fn_combine, fn_max};
use crate::error::{Error, Result};
use crate::instance::{family_size, ConvexityParams, Function, Magma};
use crate::lp::{maximin, maximin_lex_at, weighted_columns};
use crate::scalar::{max_of, min_of, Scalar};

/// A point of the standard simplex: nonnegative entries summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplexPoint<T>(Vec<T>);

impl<T: Scalar> SimplexPoint<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotInSimplex("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NotInSimplex(format!("negative weight {}", w.to_canonical())));
        }
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if !sum.is_one() {
            return Err(Error::NotInSimplex(format!("weights sum to {}", sum.to_canonical())));
        }
        Ok(Self(weights))
    }

    /// The `i`-th vertex of `S_n`.
    pub fn vertex(n: usize, i: usize) -> Self {
        Self((0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
    }

    pub fn weights(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

/// Evidence that no certificate exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness<T> {
    /// Element weights `w` (a simplex point over `X`) with
    /// `value = max_i Σ_x w_x f_i(x) < 0`, the dual of the margin LP.
    Minimax { weights: SimplexPoint<T>, value: T },
    /// Elements whose sets `Λ_x` already have empty intersection.
    Elements(Vec<usize>),
}

impl<T: Scalar> Witness<T> {
    pub fn elements(&self) -> Vec<usize> {
        match self {
            Witness::Minimax { weights, .. } => weights
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, w)| w.is_positive())
                .map(|(x, _)| x)
                .collect(),
            Witness::Elements(xs) => xs.clone(),
        }
    }

    /// Re-checks the witness against `fns` from scratch.
    pub fn verify(&self, fns: &[Function<T>]) -> Result<bool> {
        let m = family_size(fns, "witness")?;
        match self {
            Witness::Minimax { weights, value } => {
                if weights.dim() != m {
                    return Err(Error::SizeMismatch { context: "witness weights", expected: m, found: weights.dim() });
                }
                let transposed: Vec<Vec<T>> = (0..m).map(|x| fns.iter().map(|f| f.at(x).clone()).collect()).collect();
                let worst = max_of(&weighted_columns(&transposed, weights.weights())).expect("nonempty");
                Ok(worst == *value && value.is_negative())
            }
            Witness::Elements(xs) => {
                if let Some(&x) = xs.iter().find(|&&x| x >= m) {
                    return Err(Error::IndexOutOfRange { index: x, size: m });
                }
                if xs.is_empty() {
                    return Ok(false);
                }
                let restricted = restrict(fns, xs);
                Ok(maximin(&value_matrix(&restricted)).value.is_negative())
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Witness::Minimax { weights, value } => json!({
                "kind": "minimax",
                "elements": self.elements(),
                "weights": rational_strings(weights.weights()),
                "value": value.to_canonical(),
            }),
            Witness::Elements(xs) => json!({ "kind": "elements", "elements": xs }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate<T> {
    Feasible { lambda: SimplexPoint<T>, margin: T },
    Infeasible { witness: Witness<T> },
}

impl<T: Scalar> Certificate<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Certificate::Feasible { .. })
    }

    pub fn lambda(&self) -> Option<&SimplexPoint<T>> {
        match self {
            Certificate::Feasible { lambda, .. } => Some(lambda),
            Certificate::Infeasible { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Feasible { lambda, margin } => json!({
                "status": "feasible",
                "lambda": rational_strings(lambda.weights()),
                "margin": margin.to_canonical(),
            }),
            Certificate::Infeasible { witness } => json!({
                "status": "infeasible",
                "witness": witness.to_json(),
            }),
        }
    }
}

pub(crate) fn rational_strings<T: Scalar>(values: &[T]) -> Vec<String> {
    values.iter().map(Scalar::to_canonical).collect()
}

/// `matrix[i][x] = f_i(x)`.
fn value_matrix<T: Scalar>(fns: &[Function<T>]) -> Vec<Vec<T>> {
    fns.iter().map(|f| f.values.clone()).collect()
}

fn restrict<T: Scalar>(fns: &[Function<T>], elements: &[usize]) -> Vec<Function<T>> {
    fns.iter()
        .map(|f| Function::new(f.name.clone(), elements.iter().map(|&x| f.at(x).clone()).collect()))
        .collect()
}

/// `None` when `max_i f_i(x) >= 0` at every element, otherwise the first
/// element where every function is negative.
pub fn check_max_nonneg<T: Scalar>(fns: &[Function<T>]) -> Result<Option<usize>> {
    let m = family_size(fns, "check_max_nonneg")?;
    Ok((0..m).find(|&x| fns.iter().all(|f| f.at(x).is_negative())))
}

/// Margin `min_x Σ λ_i f_i(x)` of `lambda`, and whether it is nonnegative.
pub fn verify_certificate<T: Scalar>(fns: &[Function<T>], lambda: &SimplexPoint<T>) -> Result<(T, bool)> {
    family_size(fns, "verify_certificate")?;
    if lambda.dim() != fns.len() {
        return Err(Error::SizeMismatch { context: "verify_certificate lambda", expected: fns.len(), found: lambda.dim() });
    }
    SimplexPoint::new(lambda.weights().to_vec())?;
    let combined = weighted_columns(&value_matrix(fns), lambda.weights());
    let margin = min_of(&combined).expect("nonempty magma");
    let valid = !margin.is_negative();
    Ok((margin, valid))
}

/// Maximizes the uniform margin over `S_n` by exact simplex.
///
/// Among optimal weightings the lexicographically greatest is returned. When
/// the optimum is negative the result carries the dual weighting of the
/// elements as its witness.
pub fn solve_lp<T: Scalar>(fns: &[Function<T>]) -> Result<Certificate<T>> {
    let m = family_size(fns, "solve_lp")?;
    let matrix = value_matrix(fns);
    let primal = maximin(&matrix);
    if !primal.value.is_negative() {
        let lex = maximin_lex_at(&matrix, primal.value);
        return Ok(Certificate::Feasible { lambda: SimplexPoint(lex.weights), margin: lex.value });
    }
    // min_w max_i Σ_x w_x f_i(x) = -max_w min_i Σ_x w_x (-f_i(x))
    let negated: Vec<Vec<T>> = (0..m).map(|x| fns.iter().map(|f| -f.at(x).clone()).collect()).collect();
    let dual = maximin(&negated);
    let value = -dual.value;
    if value != primal.value {
        return Err(Error::Invariant(format!(
            "LP duality gap: primal {} vs dual {}",
            primal.value.to_canonical(),
            value.to_canonical()
        )));
    }
    Ok(Certificate::Infeasible { witness: Witness::Minimax { weights: SimplexPoint(dual.weights), value } })
}

/// Solution set of `λu + (1-λ)v >= 0` over the real line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentBound<T> {
    All,
    Empty,
    AtLeast(T),
    AtMost(T),
}

pub fn segment_bound<T: Scalar>(u: &T, v: &T) -> SegmentBound<T> {
    // λ(u - v) >= -v
    let d = u.clone() - v.clone();
    if d.is_zero() {
        if v.is_negative() {
            SegmentBound::Empty
        } else {
            SegmentBound::All
        }
    } else {
        let b = -v.clone() / d.clone();
        if d.is_positive() {
            SegmentBound::AtLeast(b)
        } else {
            SegmentBound::AtMost(b)
        }
    }
}

/// Certificate for two functions by intersecting the per-element intervals
/// `{λ ∈ [0,1] : λ f(x) + (1-λ) g(x) >= 0}`.
///
/// The upper endpoint of the intersection is returned, which matches the
/// lexicographic preference of [`solve_lp`]. On failure the witness names the
/// one or two elements whose constraints conflict.
pub fn solve_two<T: Scalar>(f: &Function<T>, g: &Function<T>) -> Result<Certificate<T>> {
    if f.len() != g.len() {
        return Err(Error::SizeMismatch { context: "solve_two", expected: f.len(), found: g.len() });
    }
    if f.is_empty() {
        return Err(Error::SizeMismatch { context: "solve_two", expected: 1, found: 0 });
    }
    let (mut lo, mut lo_src) = (T::zero(), None);
    let (mut hi, mut hi_src) = (T::one(), None);
    for x in 0..f.len() {
        match segment_bound(f.at(x), g.at(x)) {
            SegmentBound::All => {}
            SegmentBound::Empty => {
                return Ok(Certificate::Infeasible { witness: Witness::Elements(vec![x]) });
            }
            SegmentBound::AtLeast(b) => {
                if b > lo {
                    lo = b;
                    lo_src = Some(x);
                }
            }
            SegmentBound::AtMost(b) => {
                if b < hi {
                    hi = b;
                    hi_src = Some(x);
                }
            }
        }
        if lo > hi {
            let elements: Vec<usize> = [lo_src, hi_src].into_iter().flatten().sorted().dedup().collect();
            return Ok(Certificate::Infeasible { witness: Witness::Elements(elements) });
        }
    }
    let lambda = SimplexPoint(vec![hi.clone(), T::one() - hi]);
    let (margin, valid) = verify_certificate(&[f.clone(), g.clone()], &lambda)?;
    if !valid {
        return Err(Error::Invariant("interval intersection produced an invalid point".into()));
    }
    Ok(Certificate::Feasible { lambda, margin })
}

/// Certificate by induction on the number of functions.
///
/// `g = max(f_1..f_n)` is convex, so [`solve_two`] finds `λ` for `(f_0, g)`;
/// the family `λ f_0 + (1-λ) f_i` then has nonnegative maximum and one member
/// fewer, and its multipliers `μ_i` combine to `(λ, (1-λ)μ_1, .., (1-λ)μ_n)`.
/// The inputs must be `(∘,p,q)`-convex with nonnegative pointwise maximum.
pub fn solve_recursive<T: Scalar>(
    fns: &[Function<T>],
    magma: &Magma,
    params: &ConvexityParams<T>,
) -> Result<Certificate<T>> {
    let m = family_size(fns, "solve_recursive")?;
    if m != magma.size() {
        return Err(Error::SizeMismatch { context: "solve_recursive magma", expected: magma.size(), found: m });
    }
    if let Some(index) = first_nonconvex(magma, params, fns)? {
        return Err(Error::NotConvex { index, name: fns[index].name.clone() });
    }
    if let Some(element) = check_max_nonneg(fns)? {
        return Err(Error::MaxNegative { element });
    }
    let lambda = SimplexPoint::new(induct(fns)?)?;
    let (margin, valid) = verify_certificate(fns, &lambda)?;
    if !valid {
        return Err(Error::Invariant(format!("recursive certificate has margin {}", margin.to_canonical())));
    }
    Ok(Certificate::Feasible { lambda, margin })
}

fn induct<T: Scalar>(fns: &[Function<T>]) -> Result<Vec<T>> {
    let (head, rest) = fns.split_first().expect("nonempty family");
    if rest.is_empty() {
        return Ok(vec![T::one()]);
    }
    let g = fn_max(rest)?;
    let lam = match solve_two(head, &g)? {
        Certificate::Feasible { lambda, .. } => lambda.weights()[0].clone(),
        Certificate::Infeasible { .. } => {
            return Err(Error::Invariant("two-function step infeasible for a convex pair".into()));
        }
    };
    let rest_weight = T::one() - lam.clone();
    let family = rest
        .iter()
        .map(|f| fn_combine(&[lam.clone(), rest_weight.clone()], &[head.clone(), f.clone()]))
        .collect::<Result<Vec<_>>>()?;
    let inner = induct(&family)?;
    let mut out = Vec::with_capacity(fns.len());
    out.push(lam);
    out.extend(inner.into_iter().map(|mu| mu * rest_weight.clone()));
    Ok(out)
}

/// A tuple `(x_1..x_n)` and weights `t ∈ S_n` with `max_i Σ_j t_j f_i(x_j) < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfWitness<T> {
    pub tuple: Vec<usize>,
    pub t: SimplexPoint<T>,
    /// `min_t max_i Σ_j t_j f_i(x_j)`, attained at `t`.
    pub value: T,
}

/// `min_{t ∈ S_n} max_i Σ_j t_j f_i(x_j)` and a minimizing `t`.
pub fn nf_inner_value<T: Scalar>(fns: &[Function<T>], tuple: &[usize]) -> (T, SimplexPoint<T>) {
    // rows j (weights t_j), columns i; entries -f_i(x_j)
    let matrix: Vec<Vec<T>> = tuple.iter().map(|&x| fns.iter().map(|f| -f.at(x).clone()).collect()).collect();
    let sol = maximin(&matrix);
    (-sol.value, SimplexPoint(sol.weights))
}

/// Checks `max_i Σ_j t_j f_i(x_j) >= 0` for every `n`-tuple of elements
/// (with repetition) and every `t ∈ S_n`. Returns the first failing tuple in
/// lexicographic order.
pub fn check_nf_condition<T: Scalar>(fns: &[Function<T>]) -> Result<Option<NfWitness<T>>> {
    let m = family_size(fns, "check_nf_condition")?;
    let n = fns.len();
    for tuple in (0..n).map(|_| 0..m).multi_cartesian_product() {
        let (value, t) = nf_inner_value(fns, &tuple);
        if value.is_negative() {
            return Ok(Some(NfWitness { tuple, t, value }));
        }
    }
    Ok(None)
}

/// `Λ_x = {λ ∈ S_n : Σ λ_i f_i(x) >= 0}` as an explicit constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaPolytope<T> {
    pub element: usize,
    /// `f_i(x)`; the set is `{λ ∈ S_n : coeffs · λ >= 0}`.
    pub coeffs: Vec<T>,
}

impl<T: Scalar> LambdaPolytope<T> {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn contains(&self, lambda: &SimplexPoint<T>) -> bool {
        let s = self
            .coeffs
            .iter()
            .zip(lambda.weights())
            .fold(T::zero(), |acc, (c, l)| acc + c.clone() * l.clone());
        !s.is_negative()
    }

    /// The linear constraint is implied by the simplex constraints.
    pub fn is_whole_simplex(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_negative())
    }

    /// For `n = 2`: the range of `λ_1` as a closed interval inside `[0, 1]`.
    pub fn first_weight_interval(&self) -> Option<(T, T)> {
        assert_eq!(self.dim(), 2, "interval form needs exactly two functions");
        let (lo, hi) = match segment_bound(&self.coeffs[0], &self.coeffs[1]) {
            SegmentBound::All => (T::zero(), T::one()),
            SegmentBound::Empty => return None,
            SegmentBound::AtLeast(b) => (max_of([&b, &T::zero()]).unwrap(), T::one()),
            SegmentBound::AtMost(b) => (T::zero(), min_of([&b, &T::one()]).unwrap()),
        };
        (lo <= hi).then_some((lo, hi))
    }

    /// Human-readable half-space description.
    pub fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| format!("({})*l{}", c.to_canonical(), i + 1))
            .collect();
        let n = self.dim();
        format!("{} >= 0, l1..l{n} >= 0, l1+..+l{n} = 1", terms.join(" + "))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "element": self.element,
            "coeffs": rational_strings(&self.coeffs),
            "whole_simplex": self.is_whole_simplex(),
            "empty": self.is_empty(),
        })
    }
}

pub fn lambda_polytope<T: Scalar>(fns: &[Function<T>], x: usize) -> Result<LambdaPolytope<T>> {
    let m = family_size(fns, "lambda_polytope")?;
    if x >= m {
        return Err(Error::IndexOutOfRange { index: x, size: m });
    }
    Ok(LambdaPolytope { element: x, coeffs: fns.iter().map(|f| f.at(x).clone()).collect() })
}

/// Checks that every `n` of the sets `Λ_x` (all of them when `m <= n`) have a
/// common point. Returns the first failing subset.
pub fn helly_check<T: Scalar>(fns: &[Function<T>]) -> Result<Option<Vec<usize>>> {
    let m = family_size(fns, "helly_check")?;
    let k = fns.len().min(m);
    for subset in (0..m).combinations(k) {
        let restricted = restrict(fns, &subset);
        if maximin(&value_matrix(&restricted)).value.is_negative() {
            return Ok(Some(subset));
        }
    }
    Ok(None)
}
