//! Text front end for chaos elements and directions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | factor
//! factor := primary ('^' digits)?
//! primary:= 'xi' digits | 'H(' digits ',' digits ')' | digits ('/' digits)? | '(' expr ')'
//! ```
//!
//! Whitespace is insignificant. Exponents and Hermite orders are capped at
//! [`MAX_EXPONENT`]. Unary minus is accepted so that the canonical `Display`
//! output of an element always parses back.

use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;

use crate::chaos::ChaosElement;
use crate::direction::Direction;
use crate::index::{Coord, MultiIndex};
use crate::rational::Rational;

pub const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown atom `{atom}` at {line}:{column}")]
    UnknownAtom {
        line: usize,
        column: usize,
        atom: String,
    },
    #[error("exponent {value} exceeds {MAX_EXPONENT} at {line}:{column}")]
    ExponentOverflow {
        line: usize,
        column: usize,
        value: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::UnknownAtom { line, column, .. }
            | ParseError::ExponentOverflow { line, column, .. } => (*line, *column),
        }
    }
}

/// Parses an expression in `ξ_i` and `H_n(ξ_i)` into the Hermite basis.
///
/// ```
/// use wiener_chaos::{expr::parse_expression, ChaosElement};
/// assert_eq!(parse_expression("xi1^2 - 1").unwrap(), ChaosElement::hermite_1d(2, 1));
/// ```
pub fn parse_expression(text: &str) -> Result<ChaosElement, ParseError> {
    let mut p = Parser::new(text);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a direction `c1*e1 + c2*e2`; coefficients use the rational literal
/// rule and may carry a sign. `0` is the zero direction.
pub fn parse_direction(text: &str) -> Result<Direction, ParseError> {
    let mut p = Parser::new(text);
    let mut coords: Vec<(Coord, Rational)> = Vec::new();
    p.skip_ws();
    if p.peek() == Some(b'0') && p.rest_is_ws_after(1) {
        return Ok(Direction::zero());
    }
    let mut first = true;
    loop {
        p.skip_ws();
        let mut sign = Rational::from_integer(1.into());
        match p.peek() {
            Some(b'+') if !first => p.bump(),
            Some(b'-') => {
                p.bump();
                sign = -sign;
            }
            _ if !first => return Err(p.syntax("expected `+` or `-`")),
            _ => {}
        }
        if !first {
            p.skip_ws();
            if p.peek() == Some(b'-') {
                p.bump();
                sign = -sign;
            }
        }
        first = false;
        p.skip_ws();
        let coeff = if p.peek().is_some_and(|c| c.is_ascii_digit()) {
            let c = p.rational()?;
            p.skip_ws();
            p.expect(b'*')?;
            p.skip_ws();
            c
        } else {
            Rational::from_integer(1.into())
        };
        let at = p.pos;
        if p.peek() != Some(b'e') {
            return Err(p.syntax("expected basis vector `e<k>`"));
        }
        p.bump();
        let k = p.coordinate(at, "e")?;
        coords.push((k, sign * coeff));
        p.skip_ws();
        if p.peek().is_none() {
            break;
        }
    }
    Ok(Direction::new(coords))
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn rest_is_ws_after(&self, n: usize) -> bool {
        self.bytes[self.pos + n..]
            .iter()
            .all(|c| c.is_ascii_whitespace())
    }

    fn line_col(&self, at: usize) -> (usize, usize) {
        let before = &self.src[..at.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn syntax_at(&self, at: usize, message: &str) -> ParseError {
        let (line, column) = self.line_col(at);
        let found = match self.src[at.min(self.src.len())..].chars().next() {
            Some(c) => format!("found `{c}`"),
            None => "found end of input".to_string(),
        };
        ParseError::Syntax {
            line,
            column,
            message: format!("{message}, {found}"),
        }
    }

    fn syntax(&self, message: &str) -> ParseError {
        self.syntax_at(self.pos, message)
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(b')') => Err(self.syntax("unbalanced `)`")),
            Some(_) => Err(self.syntax("expected operator")),
        }
    }

    fn digits(&mut self) -> Result<&'a str, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected digits"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let num: BigInt = self.digits()?.parse().expect("ascii digits");
        if self.peek() != Some(b'/') {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        let at = self.pos;
        let den: BigInt = self.digits()?.parse().expect("ascii digits");
        if den.is_zero() {
            return Err(self.syntax_at(at, "zero denominator"));
        }
        Ok(Rational::new(num, den))
    }

    fn small(&mut self) -> Result<u32, ParseError> {
        let at = self.pos;
        let text = self.digits()?;
        match text.parse::<u32>() {
            Ok(v) if v <= MAX_EXPONENT => Ok(v),
            _ => {
                let (line, column) = self.line_col(at);
                Err(ParseError::ExponentOverflow {
                    line,
                    column,
                    value: text.to_string(),
                })
            }
        }
    }

    fn coordinate(&mut self, atom_start: usize, prefix: &str) -> Result<Coord, ParseError> {
        let text = self.digits()?;
        match text.parse::<Coord>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => {
                let (line, column) = self.line_col(atom_start);
                Err(ParseError::UnknownAtom {
                    line,
                    column,
                    atom: format!("{prefix}{text}"),
                })
            }
        }
    }

    fn expr(&mut self) -> Result<ChaosElement, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    acc += &self.term()?;
                }
                Some(b'-') => {
                    self.bump();
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ChaosElement, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() != Some(b'*') {
                return Ok(acc);
            }
            self.bump();
            let rhs = self.unary()?;
            acc = acc.multiply(&rhs);
        }
    }

    fn unary(&mut self) -> Result<ChaosElement, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<ChaosElement, ParseError> {
        let base = self.primary()?;
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.bump();
        self.skip_ws();
        let n = self.small()?;
        Ok(base.pow(n))
    }

    fn primary(&mut self) -> Result<ChaosElement, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(ChaosElement::constant(self.rational()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    "xi" => {
                        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                            return Err(self.syntax("expected coordinate after `xi`"));
                        }
                        Ok(ChaosElement::xi(self.coordinate(start, "xi")?))
                    }
                    "H" => {
                        self.skip_ws();
                        self.expect(b'(')?;
                        self.skip_ws();
                        let n = self.small()?;
                        self.skip_ws();
                        self.expect(b',')?;
                        self.skip_ws();
                        let k = self.coordinate(start, "H")?;
                        self.skip_ws();
                        self.expect(b')')?;
                        Ok(ChaosElement::hermite(MultiIndex::single(k, n)))
                    }
                    other => {
                        let (line, column) = self.line_col(start);
                        let mut atom = other.to_string();
                        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                            atom.push(self.peek().unwrap() as char);
                            self.pos += 1;
                        }
                        Err(ParseError::UnknownAtom { line, column, atom })
                    }
                }
            }
            _ => Err(self.syntax("expected a term")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.coords().iter().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write!(f, "{}*e{k}", crate::rational::to_text(&abs))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p(s: &str) -> ChaosElement {
        parse_expression(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn examples() {
        assert_eq!(p("xi1^2 - 1"), ChaosElement::hermite_1d(2, 1));
        assert_eq!(p("H(3,1)"), ChaosElement::hermite_1d(3, 1));
        let expected = ChaosElement::hermite_1d(2, 1)
            + ChaosElement::hermite(MultiIndex::from_dense(&[1, 1])).scale(&int(2))
            + ChaosElement::hermite_1d(2, 2)
            + ChaosElement::constant(int(2));
        assert_eq!(p("(xi1+xi2)^2"), expected);
    }

    #[test]
    fn precedence_and_whitespace() {
        assert_eq!(p(" 2 * xi1 ^ 2 "), p("2*(xi1^2)"));
        assert_eq!(p("1 - 2 - 3"), ChaosElement::constant(int(-4)));
        assert_eq!(p("-xi1^2"), -p("xi1^2"));
        assert_eq!(p("3/6*xi2"), ChaosElement::xi(2).scale(&rat(1, 2)));
        assert_eq!(p("H(0,4)"), ChaosElement::one());
        assert_eq!(p("xi1^0"), ChaosElement::one());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "(xi1 - 3/2*xi2)^3 + H(4,3)*xi1",
            "-7",
            "0",
            "xi10*xi2 - 1/3",
        ] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s} -> {e}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression("xi1 +\n  * 2").unwrap_err();
        assert!(
            matches!(
                e,
                ParseError::Syntax {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{e:?}"
        );
        let e = parse_expression("xi1 + foo2").unwrap_err();
        assert_eq!(
            e,
            ParseError::UnknownAtom {
                line: 1,
                column: 7,
                atom: "foo2".into()
            }
        );
        assert!(matches!(
            parse_expression("xi0"),
            Err(ParseError::UnknownAtom { .. })
        ));
        assert!(matches!(
            parse_expression("xi1^65"),
            Err(ParseError::ExponentOverflow { column: 5, .. })
        ));
        assert!(parse_expression("xi1^64").is_ok());
        assert!(matches!(
            parse_expression("(xi1"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("xi1)"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("1/0"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression(""),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("xi1 xi2"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn directions() {
        let d = parse_direction("1*e1 + -1/3*e10").unwrap();
        assert_eq!(d, Direction::new([(1, int(1)), (10, rat(-1, 3))]));
        assert_eq!(
            parse_direction("e2 - 2*e1").unwrap(),
            Direction::new([(2, int(1)), (1, int(-2))])
        );
        assert_eq!(parse_direction(" 0 ").unwrap(), Direction::zero());
        assert_eq!(parse_direction(&d.to_string()).unwrap(), d);
        assert!(parse_direction("1*x1").is_err());
        assert!(parse_direction("e0").is_err());
    }
}
