//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 'pi' | 'e' | identifier | function '(' expr ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::{BinaryOp, Constant, Expr, Function, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number `{n}`"),
            Token::Ident(i) => format!("identifier `{i}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { offset, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Token::Plus, start)),
            b'-' => out.push((Token::Minus, start)),
            b'*' => out.push((Token::Star, start)),
            b'/' => out.push((Token::Slash, start)),
            b'^' => out.push((Token::Caret, start)),
            b'(' => out.push((Token::LParen, start)),
            b')' => out.push((Token::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                if lexeme == "." {
                    return Err(syntax(start, "lone `.` is not a number"));
                }
                out.push((Token::Number(lexeme.to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expr::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Token::Number(text) => Literal::from_text(&text)
                .map(Expr::Number)
                .ok_or_else(|| syntax(offset, format!("malformed number `{text}`"))),
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let func = Function::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name: name.clone(), offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    return Ok(Expr::call(func, arg));
                }
                if Function::from_name(&name).is_some() {
                    return Err(syntax(offset, format!("function `{name}` needs a parenthesized argument")));
                }
                Ok(match name.as_str() {
                    "pi" => Expr::Constant(Constant::Pi),
                    "e" => Expr::Constant(Constant::Euler),
                    _ => Expr::Variable(name),
                })
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            other => Err(syntax(offset, format!("expected an operand, found {}", other.describe()))),
        }
    }
}

/// Parses one expression; the whole input must be consumed.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Token::End {
        return Err(syntax(p.offset(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinaryOp::*;

    fn num(s: &str) -> Expr {
        Expr::Number(Literal::from_text(s).unwrap())
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("x").unwrap(), Expr::var("x"));
    }

    #[test]
    fn dirichlet_term_shape() {
        let e = parse("ln(2)^3/2^s").unwrap();
        let expected = Expr::binary(
            Div,
            Expr::binary(Pow, Expr::call(Function::Ln, num("2")), num("3")),
            Expr::binary(Pow, num("2"), Expr::var("s")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn entropy_expression_parses() {
        let e = parse("((1-3*x)/2)*ln((1-3*x)/2) + 2*((1-24*x)/5)*ln((1-24*x)/5)").unwrap();
        let Expr::Binary(Add, lhs, rhs) = &e else { panic!("expected a sum, got {e}") };
        assert!(matches!(**lhs, Expr::Binary(Mul, _, _)));
        // 2*(..)*ln(..) is left associated
        let Expr::Binary(Mul, inner, _) = &**rhs else { panic!() };
        assert!(matches!(**inner, Expr::Binary(Mul, _, _)));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::binary(Pow, num("2"), Expr::binary(Pow, num("3"), num("2")))
        );
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::binary(Pow, Expr::var("x"), num("2"))));
        assert_eq!(
            parse("a-b-c").unwrap(),
            Expr::binary(Sub, Expr::binary(Sub, Expr::var("a"), Expr::var("b")), Expr::var("c"))
        );
        assert_eq!(
            parse("2^-x").unwrap(),
            Expr::binary(Pow, num("2"), Expr::neg(Expr::var("x")))
        );
    }

    #[test]
    fn literals_keep_their_text() {
        let e = parse("1.50e-3").unwrap();
        assert_eq!(e.to_string(), "1.50e-3");
        assert_eq!(e.as_number().unwrap(), "0.0015".parse().unwrap());
    }

    #[test]
    fn constants_and_identifiers() {
        assert_eq!(parse("pi").unwrap(), Expr::Constant(Constant::Pi));
        assert_eq!(parse("e").unwrap(), Expr::Constant(Constant::Euler));
        assert_eq!(parse("x_1").unwrap(), Expr::var("x_1"));
    }

    #[test]
    fn errors() {
        assert_eq!(parse("").unwrap_err(), ParseError::Empty);
        assert_eq!(parse("   ").unwrap_err(), ParseError::Empty);
        assert_eq!(
            parse("foo(x)").unwrap_err(),
            ParseError::UnknownFunction { name: "foo".into(), offset: 0 }
        );
        assert!(matches!(parse("2x").unwrap_err(), ParseError::Syntax { offset: 1, .. }));
        assert!(matches!(parse("(x").unwrap_err(), ParseError::Syntax { offset: 2, .. }));
        assert!(matches!(parse("x +").unwrap_err(), ParseError::Syntax { offset: 3, .. }));
        assert!(matches!(parse("ln x").unwrap_err(), ParseError::Syntax { offset: 0, .. }));
        assert!(matches!(parse("x # y").unwrap_err(), ParseError::Syntax { offset: 2, .. }));
        assert!(matches!(parse("max(x)").unwrap_err(), ParseError::UnknownFunction { .. }));
        assert!(matches!(parse("ln(x, y)").unwrap_err(), ParseError::Syntax { offset: 4, .. }));
    }
}
