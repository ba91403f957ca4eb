//! Expression grammar for custom models.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '×' | '/' | '÷') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right associative
//! atom   := integer | 'p' | 'a' | '(' expr ')'
//! ```

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    P,
    A,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, p: f64, a: f64) -> f64 {
        match self {
            Expr::Int(v) => *v as f64,
            Expr::P => p,
            Expr::A => a,
            Expr::Neg(e) => -e.eval(p, a),
            Expr::Add(l, r) => l.eval(p, a) + r.eval(p, a),
            Expr::Sub(l, r) => l.eval(p, a) - r.eval(p, a),
            Expr::Mul(l, r) => l.eval(p, a) * r.eval(p, a),
            Expr::Div(l, r) => l.eval(p, a) / r.eval(p, a),
            Expr::Pow(l, r) => {
                let exp = r.eval(p, a);
                let base = l.eval(p, a);
                if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
                    base.powi(exp as i32)
                } else {
                    base.powf(exp)
                }
            }
        }
    }

    pub fn uses_a(&self) -> bool {
        match self {
            Expr::A => true,
            Expr::Int(_) | Expr::P => false,
            Expr::Neg(e) => e.uses_a(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) | Expr::Pow(l, r) => {
                l.uses_a() || r.uses_a()
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::P => write!(f, "p"),
            Expr::A => write!(f, "a"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l}+{r})"),
            Expr::Sub(l, r) => write!(f, "({l}-{r})"),
            Expr::Mul(l, r) => write!(f, "({l}*{r})"),
            Expr::Div(l, r) => write!(f, "({l}/{r})"),
            Expr::Pow(l, r) => write!(f, "({l}^{r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    P,
    A,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(digit) = d.to_digit(10) else { break };
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(digit as i64))
                        .ok_or("integer literal overflows")?;
                    chars.next();
                }
                if chars.peek() == Some(&'.') {
                    return Err("only integer literals are allowed".into());
                }
                out.push(Tok::Int(v));
            }
            'p' => {
                chars.next();
                out.push(Tok::P);
            }
            'a' => {
                chars.next();
                out.push(Tok::A);
            }
            '+' => {
                chars.next();
                out.push(Tok::Plus);
            }
            '-' | '−' => {
                chars.next();
                out.push(Tok::Minus);
            }
            '*' | '×' => {
                chars.next();
                out.push(Tok::Star);
            }
            '/' | '÷' => {
                chars.next();
                out.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                out.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                out.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                out.push(Tok::RParen);
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, String> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v)),
            Some(Tok::P) => Ok(Expr::P),
            Some(Tok::A) => Ok(Expr::A),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err("expected `)`".into()),
                }
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, String> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut parser = Parser { toks, pos: 0 };
    let e = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(format!("trailing input at token {}", parser.pos + 1));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse("p^(a-1)*(p-1)").unwrap();
        assert_eq!(e.eval(3.0, 2.0), 6.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0, 0.0), 512.0);
        assert_eq!(parse("-2^2").unwrap().eval(0.0, 0.0), -4.0);
        assert_eq!(parse("10 - 4 - 3").unwrap().eval(0.0, 0.0), 3.0);
        assert_eq!(parse("12 / 3 / 2").unwrap().eval(0.0, 0.0), 2.0);
        assert_eq!(parse("(p^(a+1) - 1) ÷ (p − 1)").unwrap().eval(2.0, 3.0), 15.0);
        assert_eq!(parse("p × 2").unwrap().eval(5.0, 1.0), 10.0);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "p +", "(p", "p)", "1.5", "q", "p p", "2 ^"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tracks_exponent_variable() {
        assert!(parse("a + 1").unwrap().uses_a());
        assert!(!parse("p - 1").unwrap().uses_a());
    }
}
