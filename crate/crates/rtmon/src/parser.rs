//! Recursive descent parser for the stream specification language.
//!
//! Grammar (informal):
//!
//! ```text
//! decl    := 'constant' name ':' type (':='|'=') literal
//!          | 'input' name (',' name)* ':' (type | '(' type (',' type)* ')')
//!          | 'output' name [':' type] ['@' freq 'Hz'] ':=' expr
//!          | 'trigger' ['@' freq 'Hz'] expr [string]
//! expr    := 'if' expr 'then' expr 'else' expr | or
//! or      := and ('||' and)*          and := cmp ('&&' cmp)*
//! cmp     := add (cmpop add)*         add := mul (('+'|'-') mul)*
//! mul     := unary (('*'|'/') unary)* unary := ('!'|'-') unary | postfix
//! postfix := primary ['.offset(by:-k).defaults(to:e)'
//!          | '.hold().defaults(to:e)'
//!          | '.aggregate(over:Ns,using:agg).defaults(to:e)']
//! primary := int | 'true' | 'false' | name | '(' expr ')'
//!          | 'abs(' expr ')' | 'isqrt(' expr ')' | 'delta(' name ')'
//! ```
//!
//! Tuple input types are flattened into one scalar input per element
//! (`gps: (Int32, Int32)` becomes `gps_0`, `gps_1`), and the implicit
//! `time: UInt64` input stream is injected into every parsed specification.
//! Offset, hold, and window accesses must be wrapped by `.defaults(to:...)`;
//! positive (future) offsets are rejected.

use crate::ast::*;
use crate::error::ParseError;
use crate::lexer::{lex, Tok, Token};
use crate::time::Rat;
use crate::value::ValueType;
use num::Signed;

pub fn parse(src: &str) -> Result<Spec, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.spec()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            expected: expected.into(),
            found: self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of input".into()),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn spec(&mut self) -> Result<Spec, ParseError> {
        let mut decls = Vec::new();
        while self.peek().is_some() {
            if self.keyword("constant") {
                decls.push(Decl::Constant(self.constant()?));
            } else if self.keyword("input") {
                for i in self.input()? {
                    decls.push(Decl::Input(i));
                }
            } else if self.keyword("output") {
                decls.push(Decl::Output(self.output()?));
            } else if self.keyword("trigger") {
                decls.push(Decl::Trigger(self.trigger()?));
            } else {
                return Err(self.err("`constant`, `input`, `output`, or `trigger`"));
            }
        }
        decls.push(Decl::Input(InputDecl {
            name: TIME_STREAM.into(),
            ty: ValueType::Unsigned(64),
            implicit: true,
        }));
        Ok(Spec { decls })
    }

    fn value_type(&mut self) -> Result<ValueType, ParseError> {
        let name = self.ident("type name")?;
        ValueType::from_name(&name).ok_or_else(|| {
            let mut e = self.err("type name");
            e.found = format!("`{name}`");
            e
        })
    }

    fn constant(&mut self) -> Result<ConstantDecl, ParseError> {
        let name = self.ident("constant name")?;
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.value_type()?;
        if !self.eat(&Tok::Define) && !self.eat(&Tok::EqEq) {
            return Err(self.err("`:=`"));
        }
        let value = self.literal()?;
        Ok(ConstantDecl { name, ty, value })
    }

    fn literal(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v)),
            Some(Tok::Minus) => match self.bump() {
                Some(Tok::Int(v)) => Ok(Expr::Int(-v)),
                _ => {
                    self.pos -= 1;
                    Err(self.err("integer literal"))
                }
            },
            Some(Tok::Ident(s)) if s == "true" => Ok(Expr::Bool(true)),
            Some(Tok::Ident(s)) if s == "false" => Ok(Expr::Bool(false)),
            _ => {
                self.pos -= 1;
                Err(self.err("literal"))
            }
        }
    }

    fn input(&mut self) -> Result<Vec<InputDecl>, ParseError> {
        let mut names = vec![self.ident("input name")?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident("input name")?);
        }
        self.expect(Tok::Colon, "`:`")?;
        let tys: Vec<ValueType> = if self.eat(&Tok::LParen) {
            let mut tys = vec![self.value_type()?];
            while self.eat(&Tok::Comma) {
                tys.push(self.value_type()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            tys
        } else {
            vec![self.value_type()?]
        };
        let mut decls = Vec::new();
        for name in names {
            if tys.len() == 1 {
                decls.push(InputDecl {
                    name,
                    ty: tys[0],
                    implicit: false,
                });
            } else {
                // One scalar input per tuple element.
                for (k, ty) in tys.iter().enumerate() {
                    decls.push(InputDecl {
                        name: format!("{name}_{k}"),
                        ty: *ty,
                        implicit: false,
                    });
                }
            }
        }
        Ok(decls)
    }

    fn frequency(&mut self) -> Result<Rat, ParseError> {
        let f = match self.bump() {
            Some(Tok::Int(v)) if v > 0 && v <= i64::MAX as i128 => Rat::from_integer(v as i64),
            Some(Tok::Decimal(r)) if r.is_positive() => r,
            _ => {
                self.pos -= 1;
                return Err(self.err("positive frequency"));
            }
        };
        match self.bump() {
            Some(Tok::Ident(u)) if u == "Hz" => Ok(f),
            _ => {
                self.pos -= 1;
                Err(self.err("`Hz`"))
            }
        }
    }

    fn output(&mut self) -> Result<OutputDecl, ParseError> {
        let name = self.ident("output name")?;
        let ty = if self.eat(&Tok::Colon) {
            Some(self.value_type()?)
        } else {
            None
        };
        let frequency = if self.eat(&Tok::At) {
            Some(self.frequency()?)
        } else {
            None
        };
        self.expect(Tok::Define, "`:=`")?;
        let expr = self.expr()?;
        Ok(OutputDecl {
            name,
            ty,
            frequency,
            expr,
        })
    }

    fn trigger(&mut self) -> Result<TriggerDecl, ParseError> {
        let frequency = if self.eat(&Tok::At) {
            Some(self.frequency()?)
        } else {
            None
        };
        let expr = self.expr()?;
        let message = match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Some(s)
            }
            _ => None,
        };
        Ok(TriggerDecl {
            frequency,
            expr,
            message,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.keyword("if") {
            let c = self.expr()?;
            if !self.keyword("then") {
                return Err(self.err("`then`"));
            }
            let t = self.expr()?;
            if !self.keyword("else") {
                return Err(self.err("`else`"));
            }
            let e = self.expr()?;
            return Ok(Expr::Ite(Box::new(c), Box::new(t), Box::new(e)));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.eat(&Tok::And) {
            let rhs = self.cmp_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Lt) => BinOp::Lt,
                Some(Tok::Le) => BinOp::Le,
                Some(Tok::Gt) => BinOp::Gt,
                Some(Tok::Ge) => BinOp::Ge,
                Some(Tok::EqEq) => BinOp::Eq,
                Some(Tok::Ne) => BinOp::Ne,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.add_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Not) {
            let inner = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(inner)));
        }
        if self.eat(&Tok::Minus) {
            let inner = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(inner)));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let prim = self.primary()?;
        if self.peek() != Some(&Tok::Dot) {
            return Ok(prim);
        }
        // Stream access methods apply to a plain stream name.
        let target = match prim {
            Expr::Ref(name) => name,
            _ => return Err(self.err("stream name before `.`")),
        };
        self.pos += 1;
        let method = self.ident("`offset`, `hold`, or `aggregate`")?;
        let access = match method.as_str() {
            "offset" => {
                self.expect(Tok::LParen, "`(`")?;
                if !self.keyword("by") {
                    return Err(self.err("`by`"));
                }
                self.expect(Tok::Colon, "`:`")?;
                let neg = self.eat(&Tok::Minus);
                let back = match self.bump() {
                    Some(Tok::Int(v)) if v >= 0 && v <= u32::MAX as i128 => v as u32,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("offset magnitude"));
                    }
                };
                if !neg && back > 0 {
                    return Err(self.err("negative offset (future offsets are unsupported)"));
                }
                self.expect(Tok::RParen, "`)`")?;
                let default = self.defaults_clause()?;
                Expr::Offset {
                    target,
                    back,
                    default: Box::new(default),
                }
            }
            "hold" => {
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                let default = self.defaults_clause()?;
                Expr::Hold {
                    target,
                    default: Box::new(default),
                }
            }
            "aggregate" => {
                self.expect(Tok::LParen, "`(`")?;
                if !self.keyword("over") {
                    return Err(self.err("`over`"));
                }
                self.expect(Tok::Colon, "`:`")?;
                let duration = self.duration()?;
                self.expect(Tok::Comma, "`,`")?;
                if !self.keyword("using") {
                    return Err(self.err("`using`"));
                }
                self.expect(Tok::Colon, "`:`")?;
                let aggname = self.ident("aggregation name")?;
                let agg = Aggregation::from_name(&aggname).ok_or_else(|| {
                    let mut e = self.err("aggregation name");
                    e.found = format!("`{aggname}`");
                    e
                })?;
                self.expect(Tok::RParen, "`)`")?;
                let default = self.defaults_clause()?;
                Expr::Window {
                    target,
                    duration,
                    agg,
                    default: Box::new(default),
                }
            }
            other => {
                let mut e = self.err("`offset`, `hold`, or `aggregate`");
                e.found = format!("`{other}`");
                return Err(e);
            }
        };
        if self.peek() == Some(&Tok::Dot) {
            return Err(self.err("no further method after `.defaults`"));
        }
        Ok(access)
    }

    /// Every stream access must be defaulted: `.defaults(to:<expr>)`.
    fn defaults_clause(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::Dot, "`.defaults(to:...)`")?;
        if !self.keyword("defaults") {
            return Err(self.err("`defaults`"));
        }
        self.expect(Tok::LParen, "`(`")?;
        if !self.keyword("to") {
            return Err(self.err("`to`"));
        }
        self.expect(Tok::Colon, "`:`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn duration(&mut self) -> Result<Rat, ParseError> {
        let v = match self.bump() {
            Some(Tok::Int(v)) if v > 0 && v <= i64::MAX as i128 => Rat::from_integer(v as i64),
            Some(Tok::Decimal(r)) if r.is_positive() => r,
            _ => {
                self.pos -= 1;
                return Err(self.err("positive duration"));
            }
        };
        match self.bump() {
            Some(Tok::Ident(u)) if u == "s" => Ok(v),
            _ => {
                self.pos -= 1;
                Err(self.err("`s` duration unit"))
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                match s.as_str() {
                    "true" => {
                        self.pos += 1;
                        Ok(Expr::Bool(true))
                    }
                    "false" => {
                        self.pos += 1;
                        Ok(Expr::Bool(false))
                    }
                    "abs" | "isqrt" if self.peek2() == Some(&Tok::LParen) => {
                        self.pos += 2;
                        let inner = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        let op = if s == "abs" { UnOp::Abs } else { UnOp::Isqrt };
                        Ok(Expr::Unary(op, Box::new(inner)))
                    }
                    "delta" if self.peek2() == Some(&Tok::LParen) => {
                        self.pos += 2;
                        let name = self.ident("stream name")?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Delta(name))
                    }
                    "if" | "then" | "else" | "input" | "output" | "trigger" | "constant" => {
                        Err(self.err("expression"))
                    }
                    _ => {
                        self.pos += 1;
                        Ok(Expr::Ref(s))
                    }
                }
            }
            _ => Err(self.err("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_input_declaration() {
        let spec = parse("input velo: Int32").unwrap();
        assert_eq!(spec.inputs().count(), 1);
        assert_eq!(spec.outputs().count(), 0);
        // The implicit time stream is present but not user-visible.
        assert!(spec
            .decls
            .iter()
            .any(|d| matches!(d, Decl::Input(i) if i.implicit && i.name == TIME_STREAM)));
    }

    #[test]
    fn multi_name_and_tuple_inputs_flatten() {
        let spec = parse("input lat, lon, velo: Int32\ninput gps: (Int32, Int32)").unwrap();
        let names: Vec<&str> = spec.inputs().map(|i| i.name.as_str()).collect();
        assert_eq!(names, vec!["lat", "lon", "velo", "gps_0", "gps_1"]);
    }

    #[test]
    fn output_with_frequency_and_window() {
        let spec = parse(
            "input velo: Int32\n\
             output avg_velo @1Hz := velo.aggregate(over:3s,using:avg).defaults(to:80)",
        )
        .unwrap();
        let o = spec.outputs().next().unwrap();
        assert_eq!(o.frequency, Some(Rat::from_integer(1)));
        match &o.expr {
            Expr::Window { target, duration, agg, .. } => {
                assert_eq!(target, "velo");
                assert_eq!(*duration, Rat::from_integer(3));
                assert_eq!(*agg, Aggregation::Avg);
            }
            other => panic!("expected window access, got {other:?}"),
        }
    }

    #[test]
    fn access_without_defaults_is_rejected() {
        let err = parse("input v: Int32\noutput x := v.offset(by:-1)").unwrap_err();
        assert!(err.expected.contains("defaults"), "{err}");
    }

    #[test]
    fn future_offsets_are_rejected() {
        assert!(parse("input v: Int32\noutput x := v.offset(by:1).defaults(to:0)").is_err());
        // Zero offsets survive parsing; the analyzer decides their fate.
        assert!(parse("input v: Int32\noutput x := v.offset(by:0).defaults(to:0)").is_ok());
    }

    #[test]
    fn precedence_unary_over_mul_over_add_over_cmp_over_and_over_or() {
        let spec = parse("input a: Int32\noutput x := -a * 2 + 1 < 3 && true || false").unwrap();
        let o = spec.outputs().next().unwrap();
        // ((((-a * 2) + 1) < 3) && true) || false
        match &o.expr {
            Expr::Binary(BinOp::Or, lhs, _) => match lhs.as_ref() {
                Expr::Binary(BinOp::And, l2, _) => {
                    assert!(matches!(l2.as_ref(), Expr::Binary(BinOp::Lt, _, _)));
                }
                other => panic!("expected &&, got {other:?}"),
            },
            other => panic!("expected ||, got {other:?}"),
        }
    }

    #[test]
    fn trigger_with_pacing_and_message() {
        let spec = parse(
            "input v: Int32\ntrigger @2Hz v.aggregate(over:0.5s,using:sum).defaults(to:0) > 10 \"burst\"",
        )
        .unwrap();
        let t = spec.triggers().next().unwrap();
        assert_eq!(t.frequency, Some(Rat::from_integer(2)));
        assert_eq!(t.message.as_deref(), Some("burst"));
    }

    #[test]
    fn error_carries_position() {
        let err = parse("input velo Int32").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 12);
    }
}
