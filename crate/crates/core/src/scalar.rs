//! The scalar abstraction every algorithm in this crate is written against.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed};

/// An ordered field element.
///
/// All solvers and checkers are generic over this trait. The guarantees they
/// document (exact feasibility, exact transversality, zero-tolerance
/// comparisons) hold for exact fields such as [`crate::Rational`]. Fixed-width
/// ratios like `Ratio<i64>` also work until they overflow, and binary floats
/// satisfy the bounds but void every exactness claim.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Parses `"num/den"` or `"num"`. An ASCII or U+2212 minus sign is accepted.
    fn parse_scalar(text: &str) -> Option<Self> {
        let text = text.trim().replace('\u{2212}', "-");
        if text.is_empty() {
            return None;
        }
        Self::from_str_radix(&text, 10)
            .ok()
            .or_else(|| if text.contains('/') { None } else { Self::from_str_radix(&format!("{text}/1"), 10).ok() })
    }

    fn from_int(value: i64) -> Self {
        Self::from_i64(value).expect("every scalar type represents small integers")
    }

    /// Canonical text form, `"num/den"` or `"num"` when the denominator is 1.
    fn to_canonical(&self) -> String {
        self.to_string()
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
}

pub(crate) fn min_of<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> Option<T> {
    values.into_iter().fold(None, |acc: Option<&T>, v| match acc {
        Some(m) if *m <= *v => Some(m),
        _ => Some(v),
    })
    .cloned()
}

pub(crate) fn max_of<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> Option<T> {
    values.into_iter().fold(None, |acc: Option<&T>, v| match acc {
        Some(m) if *m >= *v => Some(m),
        _ => Some(v),
    })
    .cloned()
}
