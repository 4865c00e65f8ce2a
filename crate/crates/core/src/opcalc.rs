//! Derived operations and their convexity coefficients.
//!
//! If every `(∘,p,q)`-convex function is also `(*,a,b)`-convex and
//! `(·,c,d)`-convex, then it is `(*',b,a)`-convex for the swapped operation
//! `x *' y = y * x`, and `(⋄, ac, bc+ad+bd)`-convex for
//! `x ⋄ y = (x * y) · (y * y)`. The term algebra below tracks those
//! coefficients exactly. The ratio `a/(a+b)` is complemented by swapping and
//! multiplied by composing, and [`synthesize_ratio`] uses both facts to reach
//! any target interval in `(0, 1)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::{ConvexityParams, Magma};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind<T> {
    Base,
    Swap(Arc<OpTerm<T>>),
    /// Left child acts as `*`, right child as `·`.
    Compose(Arc<OpTerm<T>>, Arc<OpTerm<T>>),
}

/// A derived binary operation together with its coefficients `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpTerm<T> {
    kind: TermKind<T>,
    a: T,
    b: T,
    depth: usize,
}

impl<T: Scalar> OpTerm<T> {
    pub fn base(params: &ConvexityParams<T>) -> Self {
        Self { kind: TermKind::Base, a: params.p().clone(), b: params.q().clone(), depth: 0 }
    }

    pub fn swap(child: OpTerm<T>) -> Self {
        let (a, b) = (child.b.clone(), child.a.clone());
        let depth = child.depth + 1;
        Self { kind: TermKind::Swap(Arc::new(child)), a, b, depth }
    }

    pub fn compose(left: OpTerm<T>, right: OpTerm<T>) -> Self {
        let (a, b) = (&left.a, &left.b);
        let (c, d) = (&right.a, &right.b);
        let new_a = a.clone() * c.clone();
        let new_b = b.clone() * c.clone() + a.clone() * d.clone() + b.clone() * d.clone();
        let depth = left.depth.max(right.depth) + 1;
        Self { kind: TermKind::Compose(Arc::new(left), Arc::new(right)), a: new_a, b: new_b, depth }
    }

    pub fn kind(&self) -> &TermKind<T> {
        &self.kind
    }

    pub fn coefficients(&self) -> (&T, &T) {
        (&self.a, &self.b)
    }

    /// `a / (a + b)`, always strictly between 0 and 1.
    pub fn ratio(&self) -> T {
        self.a.clone() / (self.a.clone() + self.b.clone())
    }

    /// 0 for `base`; one more than the deepest child otherwise.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            TermKind::Base => 1,
            TermKind::Swap(t) => 1 + t.node_count(),
            TermKind::Compose(s, t) => 1 + s.node_count() + t.node_count(),
        }
    }

    /// Materializes the operation as a table on `magma`.
    pub fn realize(&self, magma: &Magma) -> RealizedOp<T> {
        RealizedOp { table: self.table(magma), a: self.a.clone(), b: self.b.clone() }
    }

    fn table(&self, magma: &Magma) -> Vec<Vec<usize>> {
        let m = magma.size();
        match &self.kind {
            TermKind::Base => magma.table().to_vec(),
            TermKind::Swap(t) => {
                let inner = t.table(magma);
                (0..m).map(|x| (0..m).map(|y| inner[y][x]).collect()).collect()
            }
            TermKind::Compose(s, t) => {
                let star = s.table(magma);
                let dot = t.table(magma);
                (0..m)
                    .map(|x| (0..m).map(|y| dot[star[x][y]][star[y][y]]).collect())
                    .collect()
            }
        }
    }

    /// Parses the prefix form written by `Display`, e.g. `compose(swap(base),base)`.
    pub fn parse(text: &str, params: &ConvexityParams<T>) -> Result<Self> {
        let mut parser = TermParser { src: text.as_bytes(), pos: 0, params };
        let term = parser.term()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(term)
    }
}

impl<T> fmt::Display for OpTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Base => f.write_str("base"),
            TermKind::Swap(t) => write!(f, "swap({t})"),
            TermKind::Compose(s, t) => write!(f, "compose({s},{t})"),
        }
    }
}

struct TermParser<'a, T> {
    src: &'a [u8],
    pos: usize,
    params: &'a ConvexityParams<T>,
}

impl<T: Scalar> TermParser<'_, T> {
    fn error(&self, message: &str) -> Error {
        Error::TermSyntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", byte as char)))
        }
    }

    fn term(&mut self) -> Result<OpTerm<T>> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        match &self.src[start..self.pos] {
            b"base" => Ok(OpTerm::base(self.params)),
            b"swap" => {
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(OpTerm::swap(t))
            }
            b"compose" => {
                self.expect(b'(')?;
                let s = self.term()?;
                self.expect(b',')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(OpTerm::compose(s, t))
            }
            _ => {
                self.pos = start;
                Err(self.error("expected base, swap or compose"))
            }
        }
    }
}

/// A derived operation materialized on a finite magma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedOp<T> {
    pub table: Vec<Vec<usize>>,
    pub a: T,
    pub b: T,
}

pub fn ratio<T: Scalar>(term: &OpTerm<T>) -> T {
    term.ratio()
}

pub fn realize<T: Scalar>(term: &OpTerm<T>, magma: &Magma) -> RealizedOp<T> {
    term.realize(magma)
}

/// `compose(...compose(compose(t, t), t)..., t)` with `count` copies of `t`.
pub fn left_fold_power<T: Scalar>(term: &OpTerm<T>, count: usize) -> OpTerm<T> {
    assert!(count >= 1);
    (1..count).fold(term.clone(), |acc, _| OpTerm::compose(acc, term.clone()))
}

/// Returns a term whose ratio lies in `[lo, hi]`.
pub fn synthesize_ratio<T: Scalar>(params: &ConvexityParams<T>, lo: &T, hi: &T) -> Result<OpTerm<T>> {
    synthesize_ratio_bounded(params, lo, hi, None)
}

/// [`synthesize_ratio`] with an optional bound on the depth of the result.
///
/// With `s0 = p/(p+q)`: the base term is returned when `s0` already lies in
/// the target. Otherwise `k` is the least exponent with `1 - s0^k > lo/hi`,
/// `s = 1 - s0^k` is realized as a swapped left-fold power, and the result is
/// the least power `s^n` with `s^n <= hi`. Minimality of `n` gives
/// `s^n > hi · (lo/hi) = lo`. Both exponents are found by exact repeated
/// multiplication.
///
/// A degenerate target `lo == hi` has no slack for that argument, so it is
/// searched for among the powers of `s0` and `1 - s0` instead.
pub fn synthesize_ratio_bounded<T: Scalar>(
    params: &ConvexityParams<T>,
    lo: &T,
    hi: &T,
    max_depth: Option<usize>,
) -> Result<OpTerm<T>> {
    if !lo.is_positive() || *hi >= T::one() || lo > hi {
        return Err(Error::InvalidInterval { lo: lo.to_canonical(), hi: hi.to_canonical() });
    }
    let base = OpTerm::base(params);
    let s0 = base.ratio();
    if s0 >= *lo && s0 <= *hi {
        return Ok(base);
    }
    let within = |depth: usize| match max_depth {
        Some(limit) if depth > limit => Err(Error::DepthExceeded { limit }),
        _ => Ok(()),
    };

    if lo == hi {
        return exact_power(params, lo, max_depth);
    }

    let threshold = lo.clone() / hi.clone();
    let mut k = 1;
    let mut power = s0.clone();
    while T::one() - power.clone() <= threshold {
        k += 1;
        // the swapped power term has depth k
        within(k)?;
        power = power * s0.clone();
    }
    let s = T::one() - power;

    let mut n = 1;
    let mut current = s.clone();
    while current > *hi {
        n += 1;
        within(n - 1 + k)?;
        current = current * s.clone();
    }
    within(n - 1 + k)?;

    let s_term = OpTerm::swap(left_fold_power(&base, k));
    let term = left_fold_power(&s_term, n);
    debug_assert!(term.ratio() == current);
    Ok(term)
}

fn exact_power<T: Scalar>(params: &ConvexityParams<T>, target: &T, max_depth: Option<usize>) -> Result<OpTerm<T>> {
    let base = OpTerm::base(params);
    let swapped = OpTerm::swap(base.clone());
    for seed in [base, swapped] {
        let s = seed.ratio();
        let mut power = s.clone();
        let mut count = 1;
        while power > *target {
            power = power * s.clone();
            count += 1;
        }
        if power == *target {
            let term = left_fold_power(&seed, count);
            if let Some(limit) = max_depth {
                if term.depth() > limit {
                    return Err(Error::DepthExceeded { limit });
                }
            }
            return Ok(term);
        }
    }
    Err(Error::UnreachableRatio { target: target.to_canonical() })
}

/// Every term of depth at most `max_depth`, in a fixed order.
pub fn enumerate_terms<T: Scalar>(params: &ConvexityParams<T>, max_depth: usize) -> Vec<OpTerm<T>> {
    let mut terms = vec![OpTerm::base(params)];
    for _ in 0..max_depth {
        let previous = terms.clone();
        let mut next = vec![OpTerm::base(params)];
        next.extend(previous.iter().cloned().map(OpTerm::swap));
        for s in &previous {
            for t in &previous {
                next.push(OpTerm::compose(s.clone(), t.clone()));
            }
        }
        terms = next;
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::check_convexity;
    use crate::instance::Function;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        Rational::parse_scalar(s).unwrap()
    }

    fn params(p: &str, q: &str) -> ConvexityParams<Rational> {
        ConvexityParams::new(r(p), r(q)).unwrap()
    }

    #[test]
    fn base_and_first_compose() {
        let pq = params("1", "1");
        let base = OpTerm::base(&pq);
        assert_eq!(base.ratio(), r("1/2"));
        let c = OpTerm::compose(base.clone(), base);
        assert_eq!(c.coefficients(), (&r("1"), &r("3")));
        assert_eq!(c.ratio(), r("1/4"));
    }

    #[test]
    fn swap_transposes() {
        let magma = Magma::new(vec![vec![0, 0], vec![1, 1]]).unwrap();
        let pq = params("1", "2");
        let sw = OpTerm::swap(OpTerm::base(&pq)).realize(&magma);
        assert_eq!(sw.table, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!((sw.a, sw.b), (r("2"), r("1")));
        assert_eq!(OpTerm::base(&pq).realize(&magma).table, magma.table());
    }

    #[test]
    fn compose_on_z3_is_first_projection() {
        let magma = Magma::cyclic_addition(3);
        let pq = params("1", "1");
        let base = OpTerm::base(&pq);
        let t = OpTerm::compose(base.clone(), base).realize(&magma);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(t.table[x][y], x);
            }
        }
    }

    #[test]
    fn compose_orientation() {
        // left child supplies *, right child supplies ·: (x,y) ↦ (x*y)·(y*y)
        let magma = Magma::new(vec![vec![1, 0, 2], vec![2, 2, 0], vec![0, 1, 1]]).unwrap();
        let pq = params("1", "1");
        let star = OpTerm::swap(OpTerm::base(&pq));
        let dot = OpTerm::base(&pq);
        let t = OpTerm::compose(star, dot).realize(&magma);
        for x in 0..3 {
            for y in 0..3 {
                let s = |u: usize, v: usize| magma.op(v, u);
                assert_eq!(t.table[x][y], magma.op(s(x, y), s(y, y)));
            }
        }
    }

    #[test]
    fn term_text_round_trip() {
        let pq = params("3", "1/3");
        let text = "compose(swap(base),compose(base,swap(swap(base))))";
        let t = OpTerm::parse(text, &pq).unwrap();
        assert_eq!(t.to_string(), text);
        assert_eq!(OpTerm::parse(" compose ( base , base ) ", &pq).unwrap().to_string(), "compose(base,base)");
        for bad in ["", "base base", "swap(base", "compose(base)", "bse", "compose(base,base))"] {
            assert!(OpTerm::parse(bad, &pq).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn synthesis_worked_example() {
        let pq = params("1", "2");
        let t = synthesize_ratio(&pq, &r("2/5"), &r("1/2")).unwrap();
        assert_eq!(t.ratio(), r("262144/531441"));
        // k = 2, n = 6: swap of a depth-1 power, folded six times
        let s_term = OpTerm::swap(left_fold_power(&OpTerm::base(&pq), 2));
        assert_eq!(t, left_fold_power(&s_term, 6));
        assert_eq!(t.depth(), 7);
    }

    #[test]
    fn synthesis_trivial_and_degenerate_targets() {
        let pq = params("1", "1");
        assert_eq!(synthesize_ratio(&pq, &r("1/4"), &r("3/4")).unwrap().to_string(), "base");
        let quarter = synthesize_ratio(&pq, &r("1/4"), &r("1/4")).unwrap();
        assert_eq!(quarter.ratio(), r("1/4"));
        assert_eq!(quarter.to_string(), "compose(base,base)");
        assert!(matches!(
            synthesize_ratio(&pq, &r("1/3"), &r("1/3")),
            Err(Error::UnreachableRatio { .. })
        ));
        let pq = params("1", "2");
        assert_eq!(synthesize_ratio(&pq, &r("4/9"), &r("4/9")).unwrap().ratio(), r("4/9"));
    }

    #[test]
    fn synthesis_rejects_bad_intervals() {
        let pq = params("1", "1");
        for (lo, hi) in [("0", "1/2"), ("1/2", "1"), ("2/3", "1/3"), ("-1", "1/2")] {
            assert!(matches!(
                synthesize_ratio(&pq, &r(lo), &r(hi)),
                Err(Error::InvalidInterval { .. })
            ));
        }
    }

    #[test]
    fn depth_guard() {
        let pq = params("1", "1");
        let err = synthesize_ratio_bounded(&pq, &r("1/1000001"), &r("1/1000000"), Some(8)).unwrap_err();
        assert_eq!(err, Error::DepthExceeded { limit: 8 });
        let t = synthesize_ratio_bounded(&pq, &r("1/10"), &r("1/9"), Some(64)).unwrap();
        assert!(t.ratio() >= r("1/10") && t.ratio() <= r("1/9"));
        assert!(t.depth() <= 64);
    }

    #[test]
    fn enumeration_counts() {
        let pq = params("1", "1");
        let counts: Vec<usize> = (0..=3).map(|d| enumerate_terms(&pq, d).len()).collect();
        assert_eq!(counts, vec![1, 3, 13, 183]);
    }

    #[test]
    fn subadditive_transport_on_z4() {
        // f(x) = min(x, 4 - x) is subadditive on Z_4
        let magma = Magma::cyclic_addition(4);
        let pq = params("1", "1");
        let f = Function::from_ints("f", &[0, 1, 2, 1]);
        assert!(check_convexity(magma.table(), pq.p(), pq.q(), &f).unwrap().is_empty());
        for t in enumerate_terms(&pq, 2) {
            let op = t.realize(&magma);
            assert!(check_convexity(&op.table, &op.a, &op.b, &f).unwrap().is_empty(), "{t}");
        }
    }
}
