//! Hand-rolled lexer. Produces a flat token stream with line/column info;
//! `//` comments run to end of line.

use crate::error::ParseError;
use crate::time::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i128),
    /// Decimal literal such as `0.5`, kept exact.
    Decimal(Rat),
    Str(String),
    // punctuation and operators
    LParen,
    RParen,
    Comma,
    Colon,
    Define, // :=
    Dot,
    At,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq, // = and ==
    Ne,
    Not,
    And, // & and &&
    Or,  // | and ||
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Decimal(r) => format!("`{r}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Define => "`:=`".into(),
            Tok::Dot => "`.`".into(),
            Tok::At => "`@`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&&`".into(),
            Tok::Or => "`||`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! tok {
        ($t:expr, $n:expr) => {{
            out.push(Token { tok: $t, line, col });
            i += $n;
            col += $n as u32;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => tok!(Tok::LParen, 1),
            ')' => tok!(Tok::RParen, 1),
            ',' => tok!(Tok::Comma, 1),
            '.' => tok!(Tok::Dot, 1),
            '@' => tok!(Tok::At, 1),
            '+' => tok!(Tok::Plus, 1),
            '-' => tok!(Tok::Minus, 1),
            '*' => tok!(Tok::Star, 1),
            '/' => tok!(Tok::Slash, 1),
            ':' if next == Some('=') => tok!(Tok::Define, 2),
            ':' => tok!(Tok::Colon, 1),
            '<' if next == Some('=') => tok!(Tok::Le, 2),
            '<' => tok!(Tok::Lt, 1),
            '>' if next == Some('=') => tok!(Tok::Ge, 2),
            '>' => tok!(Tok::Gt, 1),
            '=' if next == Some('=') => tok!(Tok::EqEq, 2),
            '=' => tok!(Tok::EqEq, 1),
            '!' if next == Some('=') => tok!(Tok::Ne, 2),
            '!' => tok!(Tok::Not, 1),
            '&' if next == Some('&') => tok!(Tok::And, 2),
            '&' => tok!(Tok::And, 1),
            '|' if next == Some('|') => tok!(Tok::Or, 2),
            '|' => tok!(Tok::Or, 1),
            '"' => {
                let (start_line, start_col) = (line, col);
                i += 1;
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError {
                                line: start_line,
                                col: start_col,
                                expected: "closing `\"`".into(),
                                found: "end of line".into(),
                            })
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            let esc = chars.get(i + 1).copied();
                            match esc {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                other => {
                                    return Err(ParseError {
                                        line,
                                        col,
                                        expected: "escape sequence".into(),
                                        found: other.map(|c| c.to_string()).unwrap_or_default(),
                                    })
                                }
                            }
                            i += 2;
                            col += 2;
                        }
                        Some(c) => {
                            s.push(*c);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    line: start_line,
                    col: start_col,
                });
            }
            '0'..='9' => {
                let start = i;
                let start_col = col;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                // Decimal literal only when a fractional digit follows the dot,
                // so `1.hold()` still lexes as Int, Dot, Ident.
                let is_decimal = chars.get(i) == Some(&'.')
                    && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit());
                if is_decimal {
                    i += 1;
                    col += 1;
                    let frac_start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                        col += 1;
                    }
                    let whole: i128 = chars[start..frac_start - 1].iter().collect::<String>().parse().map_err(|_| ParseError {
                        line,
                        col: start_col,
                        expected: "number".into(),
                        found: "overflowing literal".into(),
                    })?;
                    let frac_str: String = chars[frac_start..i].iter().collect();
                    let frac: i64 = frac_str.parse().map_err(|_| ParseError {
                        line,
                        col: start_col,
                        expected: "number".into(),
                        found: "overflowing literal".into(),
                    })?;
                    let denom = 10i64.checked_pow(frac_str.len() as u32).ok_or(ParseError {
                        line,
                        col: start_col,
                        expected: "number".into(),
                        found: "too many fractional digits".into(),
                    })?;
                    let r = Rat::from_integer(whole as i64) + Rat::new(frac, denom);
                    out.push(Token {
                        tok: Tok::Decimal(r),
                        line,
                        col: start_col,
                    });
                } else {
                    let text: String = chars[start..i].iter().collect();
                    let v: i128 = text.parse().map_err(|_| ParseError {
                        line,
                        col: start_col,
                        expected: "number".into(),
                        found: "overflowing literal".into(),
                    })?;
                    out.push(Token {
                        tok: Tok::Int(v),
                        line,
                        col: start_col,
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let start_col = col;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token {
                    tok: Tok::Ident(text),
                    line,
                    col: start_col,
                });
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    expected: "token".into(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    Ok(out)
}
