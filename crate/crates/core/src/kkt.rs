//! Multipliers for `minimize f_0 subject to f_1, .., f_n <= 0` on a finite magma.
//!
//! At a solution `x_0` with `f_0(x_0) = 0` the functions `f_0, .., f_n`
//! cannot all be simultaneously "good", so their pointwise maximum is
//! nonnegative and a certificate `λ ∈ S_{n+1}` exists. Evaluating it at `x_0`
//! forces every `λ_i f_i(x_0)` to vanish. Conversely, such multipliers with
//! `λ_0 > 0` prove that `x_0` is a minimizer.

use serde_json::{json, Value};

use crate::certificate::{check_max_nonneg, rational_strings, solve_lp, verify_certificate, Certificate, SimplexPoint};
use crate::convexity::first_nonconvex;
use crate::error::{Error, Result};
use crate::instance::{check_lengths, ConvexityParams, Function, Magma};
use crate::scalar::{min_of, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktResult<T> {
    /// `(λ_0, λ_1, .., λ_n)`
    pub lambda: SimplexPoint<T>,
    /// `λ_i f_i(x_0)` for `i = 1..n`, all zero.
    pub transversality_products: Vec<T>,
    /// `min_x Σ_i λ_i f_i(x)`, nonnegative.
    pub el_margin: T,
    pub minimizers: Vec<usize>,
}

impl<T: Scalar> KktResult<T> {
    /// `λ_0 = 0`: the multipliers exist but say nothing about optimality.
    pub fn is_degenerate(&self) -> bool {
        self.lambda.weights()[0].is_zero()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "lambda": rational_strings(self.lambda.weights()),
            "transversality_products": rational_strings(&self.transversality_products),
            "el_margin": self.el_margin.to_canonical(),
            "minimizers": self.minimizers,
        });
        if self.is_degenerate() {
            v["warning"] = json!("degenerate multiplier — converse inapplicable");
        }
        v
    }
}

fn family<T: Scalar>(f0: &Function<T>, constraints: &[Function<T>]) -> Vec<Function<T>> {
    std::iter::once(f0.clone()).chain(constraints.iter().cloned()).collect()
}

/// Indices where every constraint is `<= 0`.
pub fn admissible_set<T: Scalar>(f0: &Function<T>, constraints: &[Function<T>]) -> Result<Vec<usize>> {
    check_lengths(constraints, f0.len(), "constraints")?;
    Ok((0..f0.len())
        .filter(|&x| constraints.iter().all(|c| !c.at(x).is_positive()))
        .collect())
}

/// Minimizers of `f_0` over the admissible set, by exhaustive comparison.
/// Empty when nothing is admissible.
pub fn solve_mp_bruteforce<T: Scalar>(f0: &Function<T>, constraints: &[Function<T>]) -> Result<Vec<usize>> {
    let admissible = admissible_set(f0, constraints)?;
    let Some(best) = min_of(admissible.iter().map(|&x| f0.at(x))) else {
        return Ok(Vec::new());
    };
    Ok(admissible.into_iter().filter(|&x| *f0.at(x) == best).collect())
}

/// Multipliers at a solution `x0` of the constrained problem.
///
/// Preconditions, each reported separately: every function is
/// `(∘,p,q)`-convex, `f0(x0) = 0`, and `x0` minimizes `f0` over the
/// admissible set.
pub fn kkt_multipliers<T: Scalar>(
    f0: &Function<T>,
    constraints: &[Function<T>],
    x0: usize,
    magma: &Magma,
    params: &ConvexityParams<T>,
) -> Result<KktResult<T>> {
    let fns = family(f0, constraints);
    check_lengths(&fns, magma.size(), "kkt functions")?;
    if x0 >= magma.size() {
        return Err(Error::IndexOutOfRange { index: x0, size: magma.size() });
    }
    if let Some(index) = first_nonconvex(magma, params, &fns)? {
        return Err(Error::NotConvex { index, name: fns[index].name.clone() });
    }
    if !f0.at(x0).is_zero() {
        return Err(Error::ObjectiveNotZero { value: f0.at(x0).to_canonical() });
    }
    let minimizers = solve_mp_bruteforce(f0, constraints)?;
    if !minimizers.contains(&x0) {
        return Err(Error::NotASolution { x0 });
    }
    if let Some(element) = check_max_nonneg(&fns)? {
        return Err(Error::Invariant(format!("max(f_0..f_n) negative at {element} although x0 is optimal")));
    }
    let (lambda, el_margin) = match solve_lp(&fns)? {
        Certificate::Feasible { lambda, margin } => (lambda, margin),
        Certificate::Infeasible { .. } => {
            return Err(Error::Invariant("no multipliers for a convex problem at its solution".into()));
        }
    };
    let transversality_products = transversality(&lambda, constraints, x0);
    if transversality_products.iter().any(|v| !v.is_zero()) {
        return Err(Error::Invariant("transversality failed for optimal multipliers".into()));
    }
    Ok(KktResult { lambda, transversality_products, el_margin, minimizers })
}

fn transversality<T: Scalar>(lambda: &SimplexPoint<T>, constraints: &[Function<T>], x0: usize) -> Vec<T> {
    lambda.weights()[1..]
        .iter()
        .zip(constraints)
        .map(|(l, c)| l.clone() * c.at(x0).clone())
        .collect()
}

/// Checks transversality and the nonnegativity of `Σ λ_i f_i` for
/// multipliers with `λ_0 > 0`. When both hold, `x0` is confirmed as a
/// brute-force minimizer.
pub fn kkt_verify_converse<T: Scalar>(
    f0: &Function<T>,
    constraints: &[Function<T>],
    x0: usize,
    lambda: &SimplexPoint<T>,
) -> Result<bool> {
    let fns = family(f0, constraints);
    check_lengths(&fns, f0.len(), "kkt functions")?;
    if lambda.dim() != fns.len() {
        return Err(Error::SizeMismatch { context: "kkt multipliers", expected: fns.len(), found: lambda.dim() });
    }
    if x0 >= f0.len() {
        return Err(Error::IndexOutOfRange { index: x0, size: f0.len() });
    }
    if !f0.at(x0).is_zero() {
        return Err(Error::ObjectiveNotZero { value: f0.at(x0).to_canonical() });
    }
    if lambda.weights()[0].is_zero() {
        return Err(Error::DegenerateMultiplier);
    }
    let tr_holds = transversality(lambda, constraints, x0).iter().all(|v| v.is_zero());
    let (_, el_holds) = verify_certificate(&fns, lambda)?;
    if tr_holds && el_holds && !solve_mp_bruteforce(f0, constraints)?.contains(&x0) {
        return Err(Error::Invariant(format!("multipliers verified but x0 = {x0} is not a minimizer")));
    }
    Ok(tr_holds && el_holds)
}

/// Replaces `f0` by `f0 - f0(x0)` and re-checks convexity.
///
/// Subtracting `c` is only guaranteed to preserve `(∘,p,q)`-convexity when
/// `(p + q - 1) c <= 0`; any loss is reported as [`Error::NotConvex`].
pub fn shift_objective<T: Scalar>(
    f0: &Function<T>,
    x0: usize,
    magma: &Magma,
    params: &ConvexityParams<T>,
) -> Result<Function<T>> {
    if x0 >= f0.len() {
        return Err(Error::IndexOutOfRange { index: x0, size: f0.len() });
    }
    let c = f0.at(x0).clone();
    let shifted = Function::new(f0.name.clone(), f0.values.iter().map(|v| v.clone() - c.clone()).collect());
    if first_nonconvex(magma, params, std::slice::from_ref(&shifted))?.is_some() {
        return Err(Error::NotConvex { index: 0, name: format!("{} shifted by {}", f0.name, (-c).to_canonical()) });
    }
    Ok(shifted)
}
