//! Exact certificates for the maximum theorem of `(∘,p,q)`-convex functions.
//!
//! A function `f` on a magma `(X, ∘)` is `(∘,p,q)`-convex when
//! `f(x∘y) <= p f(x) + q f(y)` for all `x, y`. If finitely many such
//! functions have a nonnegative pointwise maximum, some convex combination
//! of them is nonnegative everywhere. This crate checks the hypotheses on
//! finite magmas, computes and verifies the combination with exact rational
//! arithmetic, and derives Karush–Kuhn–Tucker multipliers from it.
//!
//! Every algorithm is generic over [`Scalar`]; the aliases below fix it to
//! arbitrary-precision rationals.

pub mod certificate;
pub mod convexity;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod kkt;
pub mod lp;
pub mod opcalc;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_bigint::BigInt;

/// Exact rational in canonical form (reduced, positive denominator).
pub type Rational = num_rational::BigRational;

pub type Fn = instance::Function<Rational>;
pub type Params = instance::ConvexityParams<Rational>;
pub type Instance = instance::Instance<Rational>;
pub type Certificate = certificate::Certificate<Rational>;
pub type SimplexPoint = certificate::SimplexPoint<Rational>;
pub type OpTerm = opcalc::OpTerm<Rational>;
pub type KktResult = kkt::KktResult<Rational>;

pub use instance::Magma;
