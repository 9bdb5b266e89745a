//! Textual format for incomplete domains (`.ipddl`), problems (`.ipprob`)
//! and plans (`.plan`).
//!
//! The domain grammar is STRIPS PDDL with typing, extended by two action
//! fields, `:poss-precondition` and `:poss-effect`. See `docs/format.md`.

mod domain;
mod plan;
mod problem;
mod sexpr;
mod write;

use std::fmt;
use std::path::Path;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

pub use domain::parse_domain;
pub use plan::parse_plan;
pub use problem::parse_problem;
pub use sexpr::{read_all, SExpr, SourceSpan};
pub use write::{serialize_domain, serialize_plan, serialize_problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed text.
    Syntax,
    /// Well-formed text naming something that does not resolve.
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError { kind, message: message.into(), span }
    }

    pub(crate) fn syntax(message: impl Into<String>, span: &SourceSpan) -> Self {
        Self::new(ParseErrorKind::Syntax, message, span.clone())
    }

    pub(crate) fn semantic(message: impl Into<String>, span: &SourceSpan) -> Self {
        Self::new(ParseErrorKind::Semantic, message, span.clone())
    }

    /// Attaches the file the text came from.
    pub fn with_file(mut self, path: impl AsRef<Path>) -> Self {
        self.span.file = Some(path.as_ref().to_path_buf());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Semantic => "semantic error",
        };
        write!(f, "{}: {kind}: {}", self.span, self.message)
    }
}

/// Parses `0.7`, `.25`, `3/4` or `1` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Renders a rational as an exact decimal when one exists (`7/10` → `0.7`),
/// otherwise as `n/d`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut e2, mut e5) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        e2 += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        e5 += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = e2.max(e5);
    let scaled = (r * BigRational::from_integer(num::pow(BigInt::from(10), places))).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    format!("{}{int_part}.{frac_part}", if neg { "-" } else { "" })
}

/// Lossy view of a rational for reporting.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.7"), Some(ratio(7, 10)));
        assert_eq!(parse_rational("0.9"), Some(ratio(9, 10)));
        assert_eq!(parse_rational(".25"), Some(ratio(1, 4)));
        assert_eq!(parse_rational("3/4"), Some(ratio(3, 4)));
        assert_eq!(parse_rational("1"), Some(ratio(1, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn formatting_prefers_decimals() {
        assert_eq!(format_rational(&ratio(7, 10)), "0.7");
        assert_eq!(format_rational(&ratio(1, 4)), "0.25");
        assert_eq!(format_rational(&ratio(51, 100)), "0.51");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&ratio(1, 1)), "1");
        assert_eq!(format_rational(&ratio(1, 1000)), "0.001");
        assert_eq!(format_rational(&ratio(-3, 8)), "-0.375");
    }

    #[test]
    fn format_then_parse_is_identity() {
        for (n, d) in [(1, 2), (9, 10), (1, 3), (657, 1000), (1, 1024)] {
            let r = ratio(n, d);
            assert_eq!(parse_rational(&format_rational(&r)), Some(r));
        }
    }
}
