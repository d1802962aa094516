//! Text grammar for right-hand sides, Lagrangians and metric components.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents are integers, optionally signed or parenthesised. Decimal
//! literals are read as exact rationals.

use symexpr::{Expr, ExprError, Int, Sampler, SignCount, Var};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("y'''' may not appear on the right-hand side (at {pos})")]
    FourthDerivative { pos: usize },
    #[error("division by zero at {pos}")]
    DivisionByZero { pos: usize },
    #[error("metric is not positive definite at a sample point: {detail}")]
    NotDefinite { detail: String },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::FourthDerivative { pos }
            | ParseError::DivisionByZero { pos } => Some(*pos),
            ParseError::NotDefinite { .. } => None,
        }
    }
}

/// Right-hand side of `y'''' = F`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeInput {
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianInput {
    pub lagrangian: Expr,
}

/// `E dx^2 + F dx dz + G dz^2` on the contact planes of `dy - z dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricInput {
    pub e: Expr,
    pub f: Expr,
    pub g: Expr,
}

/// Display name of a jet coordinate in prime notation.
pub fn prime_name(v: Var) -> Option<String> {
    let name = v.name()?;
    let k: usize = name.strip_prefix('y')?.parse().ok()?;
    if k > 4 {
        return None;
    }
    Some(format!("y{}", "'".repeat(k)))
}

/// Renders with `y`, `y'`, ... in place of `y0`, `y1`, ...
pub fn render_primes(e: &Expr) -> String {
    e.render_with(&prime_name)
}

#[derive(Clone, Copy)]
enum Vocabulary {
    /// x and y up to y'''.
    Ode,
    /// x and y up to y''.
    Lagrangian,
    /// x, y, z.
    Metric,
}

impl Vocabulary {
    fn resolve(self, name: &str, primes: usize, pos: usize) -> Result<Var, ParseError> {
        let unknown = || ParseError::UnknownIdentifier {
            pos,
            name: format!("{name}{}", "'".repeat(primes)),
        };
        let order = match (name, primes) {
            ("y", k) => Some(k),
            (n, 0) if n.len() == 2 && n.starts_with('y') => n[1..].parse::<usize>().ok(),
            _ => None,
        };
        match self {
            Vocabulary::Metric => match (name, primes) {
                ("x" | "y" | "z", 0) => Ok(Var::symbol(name)),
                _ => Err(unknown()),
            },
            Vocabulary::Ode | Vocabulary::Lagrangian => {
                if name == "x" && primes == 0 {
                    return Ok(Var::symbol("x"));
                }
                let max = if matches!(self, Vocabulary::Ode) { 3 } else { 2 };
                match order {
                    Some(k) if k <= max => Ok(Var::symbol(&format!("y{k}"))),
                    Some(4) if matches!(self, Vocabulary::Ode) => Err(ParseError::FourthDerivative { pos }),
                    _ => Err(unknown()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Int, Int),
    Name(String, usize),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut digits = String::new();
            let mut frac = 0u32;
            let mut seen_dot = false;
            while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !seen_dot)) {
                if chars[i] == '.' {
                    seen_dot = true;
                } else {
                    digits.push(chars[i]);
                    if seen_dot {
                        frac += 1;
                    }
                }
                i += 1;
            }
            let n: Int = digits.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "bad number".into(),
            })?;
            out.push((Tok::Num(n, Int::from(10u8).pow(frac as usize)), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                name.push(chars[i]);
                i += 1;
            }
            let mut primes = 0;
            while i < chars.len() && chars[i] == '\'' {
                primes += 1;
                i += 1;
            }
            out.push((Tok::Name(name, primes), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), start));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                pos: start,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    vocab: Vocabulary,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.pos();
                self.at += 1;
                let d = self.unary()?;
                acc = acc.try_div(&d).map_err(|_| ParseError::DivisionByZero { pos })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let pos = self.pos();
        let k = match self.peek() {
            Some(Tok::Num(n, d)) if d.is_one() => i64::try_from(n.clone()).map_err(|_| ParseError::Syntax {
                pos,
                msg: "exponent too large".into(),
            })?,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "exponent must be an integer".into(),
                })
            }
        };
        self.at += 1;
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -k } else { k })
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op('^')) {
            let pos = self.pos();
            self.at += 1;
            let k = self.exponent()?;
            return base.try_pow(k).map_err(|_| ParseError::DivisionByZero { pos });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.toks.get(self.at).cloned() {
            Some((Tok::Num(n, d), _)) => {
                self.at += 1;
                Ok(Expr::from_ints(n, d).expect("power of ten is nonzero"))
            }
            Some((Tok::Name(name, primes), _)) => {
                self.at += 1;
                let func = matches!(name.as_str(), "exp" | "sin" | "cos" | "sqrt") && primes == 0;
                if func && self.eat('(') {
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(match name.as_str() {
                        "exp" => arg.exp(),
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        _ => arg.sqrt(),
                    });
                }
                Ok(Expr::var(self.vocab.resolve(&name, primes, pos)?))
            }
            Some((Tok::Op('('), _)) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((Tok::Op(c), _)) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected `{c}`"),
            }),
            None => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

fn parse_with(text: &str, vocab: Vocabulary) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.chars().count(),
        vocab,
    };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

pub fn parse_ode(text: &str) -> Result<OdeInput, ParseError> {
    Ok(OdeInput {
        rhs: parse_with(text, Vocabulary::Ode)?,
    })
}

pub fn parse_lagrangian(text: &str) -> Result<LagrangianInput, ParseError> {
    Ok(LagrangianInput {
        lagrangian: parse_with(text, Vocabulary::Lagrangian)?,
    })
}

/// Parses one metric component over `x, y, z`.
pub fn parse_metric_component(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, Vocabulary::Metric)
}

/// Parses `E=..., F=..., G=...` (comma or semicolon separated, any order).
pub fn parse_metric(text: &str, sampler: &Sampler, force: bool) -> Result<(MetricInput, Vec<String>), ParseError> {
    let mut parts: [Option<&str>; 3] = [None, None, None];
    let mut offset = 0;
    for piece in text.split([',', ';']) {
        let Some((key, value)) = piece.split_once('=') else {
            return Err(ParseError::Syntax {
                pos: offset,
                msg: "expected `E=...`, `F=...` or `G=...`".into(),
            });
        };
        let slot = match key.trim() {
            "E" => 0,
            "F" => 1,
            "G" => 2,
            other => {
                return Err(ParseError::UnknownIdentifier {
                    pos: offset,
                    name: other.into(),
                })
            }
        };
        parts[slot] = Some(value);
        offset += piece.len() + 1;
    }
    let get = |i: usize, name: &str| {
        parts[i].ok_or_else(|| ParseError::Syntax {
            pos: text.len(),
            msg: format!("missing component {name}"),
        })
    };
    metric_from_components(get(0, "E")?, get(1, "F")?, get(2, "G")?, sampler, force)
}

/// Builds a metric from its three component texts and samples definiteness.
/// With `force`, failures become warnings.
pub fn metric_from_components(
    e: &str,
    f: &str,
    g: &str,
    sampler: &Sampler,
    force: bool,
) -> Result<(MetricInput, Vec<String>), ParseError> {
    let m = MetricInput {
        e: parse_metric_component(e)?,
        f: parse_metric_component(f)?,
        g: parse_metric_component(g)?,
    };
    let warnings = match check_definite(&m, sampler) {
        Ok(()) => Vec::new(),
        Err(detail) if force => vec![format!("metric not positive definite: {detail}")],
        Err(detail) => return Err(ParseError::NotDefinite { detail }),
    };
    Ok((m, warnings))
}

/// Samples `E > 0` and `4EG - F^2 > 0`.
pub fn check_definite(m: &MetricInput, sampler: &Sampler) -> Result<(), String> {
    let disc = Expr::int(4) * &m.e * &m.g - &m.f * &m.f;
    let bad = |c: SignCount| c.negative > 0 || c.zero > 0;
    let ce = sampler.signs(&m.e);
    if bad(ce) || ce.positive == 0 {
        return Err(format!("E = {} is not positive", m.e));
    }
    let cd = sampler.signs(&disc);
    if bad(cd) || cd.positive == 0 {
        return Err(format!("4EG - F^2 = {disc} is not positive"));
    }
    Ok(())
}

impl From<ExprError> for ParseError {
    fn from(e: ExprError) -> ParseError {
        ParseError::Syntax {
            pos: 0,
            msg: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_aliases_agree() {
        let a = parse_ode("3*(y''')^2").unwrap().rhs;
        let b = parse_ode("3*y3^2").unwrap().rhs;
        assert_eq!(a, b);
        assert_eq!(render_primes(&a), "3*(y''')^2");
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(
            parse_ode("0.5*y").unwrap().rhs,
            Expr::rational(1, 2) * Expr::symbol("y0")
        );
        assert_eq!(parse_ode("1.25").unwrap().rhs, Expr::rational(5, 4));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_ode("y''''").unwrap_err(), ParseError::FourthDerivative { pos: 0 });
        assert!(matches!(
            parse_ode("1 + w"),
            Err(ParseError::UnknownIdentifier { pos: 4, .. })
        ));
        assert!(matches!(parse_ode("(1+x"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_ode("1/0"), Err(ParseError::DivisionByZero { pos: 1 })));
        assert!(matches!(
            parse_lagrangian("y'''"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(parse_ode("x^y"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn negative_exponent() {
        let e = parse_ode("x^-2 - x^(-2)").unwrap().rhs;
        assert!(e.is_zero_poly());
        assert_eq!(parse_ode("-x^2").unwrap().rhs, -(Expr::symbol("x") * Expr::symbol("x")));
    }
}
