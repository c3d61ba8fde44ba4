//! Lexer and precedence-climbing parser for goal and list expressions.
//!
//! Precedence, loosest first: `?:`, `implies`/`eqv`, `||`, `&&`, `xor`,
//! `|`, `^`, `&`, `==`/`!=`, `<`/`>`/`<=`/`>=`, `<<`/`>>`, `+`/`-`,
//! `*`/`/`/`%`, then the unary operators `!`, `~` and `-`. Binary operators
//! associate to the left, `?:` to the right.

use crate::expr::{ArithOp, Builtin, CmpOp, GoalExpr, ListExpr, ListItem, LogicalOp};
use crate::model::FeatureId;
use crate::value::DataValue;

/// Deepest expression tree the parser will build.
pub const MAX_EXPR_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ExprError {
    pub message: String,
    pub start: usize,
    pub end: usize,
}

impl ExprError {
    fn new(message: impl Into<String>, start: usize, end: usize) -> Self {
        ExprError {
            message: message.into(),
            start,
            end,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Op(&'static str),
    Implies,
    Eqv,
    Xor,
    To,
    LParen,
    RParen,
    Comma,
    Question,
    Colon,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

const OPERATORS: [&str; 20] = [
    "||", "&&", "==", "!=", "<=", ">=", "<<", ">>", "<", ">", "!", "~", "+", "-", "*", "/", "%", "^", "&", "|",
];

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "implies" => Tok::Implies,
                "eqv" => Tok::Eqv,
                "xor" => Tok::Xor,
                "to" => Tok::To,
                _ => Tok::Ident(word.to_string()),
            };
            out.push(Token { tok, start, end: i });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i = lex_number(bytes, i);
            if i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                return Err(ExprError::new("malformed number", start, i + 1));
            }
            out.push(Token {
                tok: Tok::Num(text[start..i].to_string()),
                start,
                end: i,
            });
            continue;
        }
        if c == b'"' {
            let (s, next) = lex_string(text, i)?;
            out.push(Token {
                tok: Tok::Str(s),
                start,
                end: next,
            });
            i = next;
            continue;
        }
        let punct = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'?' => Some(Tok::Question),
            b':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = punct {
            out.push(Token { tok, start, end: i + 1 });
            i += 1;
            continue;
        }
        if let Some(op) = OPERATORS.iter().find(|op| text[i..].starts_with(**op)) {
            out.push(Token {
                tok: Tok::Op(op),
                start,
                end: i + op.len(),
            });
            i += op.len();
            continue;
        }
        let ch = text[i..].chars().next().unwrap_or('?');
        return Err(ExprError::new(
            format!("unexpected character {ch:?}"),
            start,
            start + ch.len_utf8(),
        ));
    }
    Ok(out)
}

fn lex_number(b: &[u8], mut i: usize) -> usize {
    if b[i] == b'0' && matches!(b.get(i + 1), Some(b'x' | b'X')) && b.get(i + 2).is_some_and(u8::is_ascii_hexdigit) {
        i += 2;
        while i < b.len() && b[i].is_ascii_hexdigit() {
            i += 1;
        }
        return i;
    }
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

fn lex_string(text: &str, start: usize) -> Result<(String, usize), ExprError> {
    let mut out = String::new();
    let mut chars = text[start + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        match c {
            '"' => return Ok((out, start + 1 + off + 1)),
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, other)) => out.push(other),
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(ExprError::new("unterminated string", start, text.len()))
}

enum BinKind {
    Logical(LogicalOp),
    Arith(ArithOp),
    Cmp(CmpOp),
}

fn binary_operator(tok: &Tok) -> Option<(u8, BinKind)> {
    let kind = match tok {
        Tok::Implies => BinKind::Logical(LogicalOp::Implies),
        Tok::Eqv => BinKind::Logical(LogicalOp::Eqv),
        Tok::Xor => BinKind::Logical(LogicalOp::Xor),
        Tok::Op(op) => match *op {
            "||" => BinKind::Logical(LogicalOp::Or),
            "&&" => BinKind::Logical(LogicalOp::And),
            "|" => BinKind::Arith(ArithOp::BitOr),
            "^" => BinKind::Arith(ArithOp::BitXor),
            "&" => BinKind::Arith(ArithOp::BitAnd),
            "==" => BinKind::Cmp(CmpOp::Eq),
            "!=" => BinKind::Cmp(CmpOp::Ne),
            "<" => BinKind::Cmp(CmpOp::Lt),
            ">" => BinKind::Cmp(CmpOp::Gt),
            "<=" => BinKind::Cmp(CmpOp::Le),
            ">=" => BinKind::Cmp(CmpOp::Ge),
            "<<" => BinKind::Arith(ArithOp::Shl),
            ">>" => BinKind::Arith(ArithOp::Shr),
            "+" => BinKind::Arith(ArithOp::Add),
            "-" => BinKind::Arith(ArithOp::Sub),
            "*" => BinKind::Arith(ArithOp::Mul),
            "/" => BinKind::Arith(ArithOp::Div),
            "%" => BinKind::Arith(ArithOp::Mod),
            _ => return None,
        },
        _ => return None,
    };
    let prec = match &kind {
        BinKind::Logical(op) => op.precedence(),
        BinKind::Arith(op) => op.precedence(),
        BinKind::Cmp(op) => op.precedence(),
    };
    Some((prec, kind))
}

fn starts_expression(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Ident(_) | Tok::Num(_) | Tok::Str(_) | Tok::LParen | Tok::Op("!" | "~" | "-")
    )
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    text: &'a str,
    nesting: usize,
}

type Parsed = (GoalExpr, usize);

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ExprError> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
            text,
            nesting: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn error_here(&self, message: impl Into<String>) -> ExprError {
        match self.tokens.get(self.pos) {
            Some(t) => ExprError::new(message, t.start, t.end),
            None => ExprError::new(message, self.text.len(), self.text.len()),
        }
    }

    fn describe_current(&self) -> String {
        match self.tokens.get(self.pos) {
            Some(t) => format!("unexpected {:?}", &self.text[t.start..t.end]),
            None => "unexpected end of expression".to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, {}", self.describe_current())))
        }
    }

    fn check_depth(&self, depth: usize) -> Result<(), ExprError> {
        if depth > MAX_EXPR_DEPTH || self.nesting > MAX_EXPR_DEPTH {
            Err(self.error_here("expression nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn parse_cond(&mut self) -> Result<Parsed, ExprError> {
        self.nesting += 1;
        let result = self.parse_cond_inner();
        self.nesting -= 1;
        result
    }

    fn parse_cond_inner(&mut self) -> Result<Parsed, ExprError> {
        self.check_depth(0)?;
        let (guard, gd) = self.parse_binary(2)?;
        if self.peek() != Some(&Tok::Question) {
            return Ok((guard, gd));
        }
        self.pos += 1;
        let (then, td) = self.parse_cond()?;
        self.expect(Tok::Colon, "':'")?;
        let (other, od) = self.parse_cond()?;
        let depth = gd.max(td).max(od) + 1;
        self.check_depth(depth)?;
        Ok((GoalExpr::cond(guard, then, other), depth))
    }

    fn parse_binary(&mut self, min: u8) -> Result<Parsed, ExprError> {
        let (mut lhs, mut depth) = self.parse_unary()?;
        while let Some((prec, kind)) = self.peek().and_then(binary_operator) {
            if prec < min {
                break;
            }
            self.pos += 1;
            let (rhs, rd) = self.parse_binary(prec + 1)?;
            depth = depth.max(rd) + 1;
            self.check_depth(depth)?;
            lhs = match kind {
                BinKind::Logical(op) => GoalExpr::logical(op, lhs, rhs),
                BinKind::Arith(op) => GoalExpr::arith(op, lhs, rhs),
                BinKind::Cmp(op) => GoalExpr::compare(op, lhs, rhs),
            };
        }
        Ok((lhs, depth))
    }

    fn parse_unary(&mut self) -> Result<Parsed, ExprError> {
        self.nesting += 1;
        let result = self.parse_unary_inner();
        self.nesting -= 1;
        result
    }

    fn parse_unary_inner(&mut self) -> Result<Parsed, ExprError> {
        self.check_depth(0)?;
        let wrap = |(e, d): Parsed, f: fn(Box<GoalExpr>) -> GoalExpr| (f(Box::new(e)), d + 1);
        match self.peek() {
            Some(Tok::Op("!")) => {
                self.pos += 1;
                Ok(wrap(self.parse_unary()?, GoalExpr::Not))
            }
            Some(Tok::Op("~")) => {
                self.pos += 1;
                Ok(wrap(self.parse_unary()?, GoalExpr::BitNot))
            }
            Some(Tok::Op("-")) => {
                self.pos += 1;
                if let Some(Tok::Num(n)) = self.peek() {
                    let lit = format!("-{n}");
                    self.pos += 1;
                    return Ok((GoalExpr::Const(DataValue::from(lit)), 0));
                }
                Ok(wrap(self.parse_unary()?, GoalExpr::Neg))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Parsed, ExprError> {
        let Some(token) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error_here("expected an operand, found end of expression"));
        };
        match token.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok((GoalExpr::Const(DataValue::from(n)), 0))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok((GoalExpr::Const(DataValue::from(s)), 0))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.parse_cond()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    return self.parse_call(&name, token.start, token.end);
                }
                let id = FeatureId::new(&name)
                    .map_err(|_| ExprError::new(format!("invalid feature name {name:?}"), token.start, token.end))?;
                Ok((GoalExpr::Ident(id), 0))
            }
            _ => Err(ExprError::new(
                format!("expected an operand, {}", self.describe_current()),
                token.start,
                token.end,
            )),
        }
    }

    fn parse_call(&mut self, name: &str, start: usize, end: usize) -> Result<Parsed, ExprError> {
        let builtin =
            Builtin::from_name(name).ok_or_else(|| ExprError::new(format!("unknown function {name:?}"), start, end))?;
        self.pos += 1; // '('
        let mut args = Vec::new();
        let mut depth = 0;
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let (arg, d) = self.parse_cond()?;
                depth = depth.max(d);
                args.push(arg);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    continue;
                }
                break;
            }
        }
        self.expect(Tok::RParen, "')' or ','")?;
        if args.len() != builtin.arity() {
            return Err(ExprError::new(
                format!(
                    "{} takes {} argument(s), got {}",
                    builtin.name(),
                    builtin.arity(),
                    args.len()
                ),
                start,
                end,
            ));
        }
        Ok((GoalExpr::Call(builtin, args), depth + 1))
    }

    fn finish(&self) -> Result<(), ExprError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error_here(self.describe_current()))
        }
    }
}

pub(crate) fn parse_goal(text: &str) -> Result<GoalExpr, ExprError> {
    let mut p = Parser::new(text)?;
    let (e, _) = p.parse_cond()?;
    p.finish()?;
    Ok(e)
}

/// Parses a whitespace separated sequence of goal expressions.
pub(crate) fn parse_goal_sequence(text: &str) -> Result<Vec<GoalExpr>, ExprError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        let (e, _) = p.parse_cond()?;
        out.push(e);
        match p.peek() {
            None => break,
            Some(t) if starts_expression(t) => continue,
            Some(_) => return Err(p.error_here(p.describe_current())),
        }
    }
    Ok(out)
}

pub(crate) fn parse_list(text: &str) -> Result<ListExpr, ExprError> {
    let mut p = Parser::new(text)?;
    if p.at_end() {
        return Err(ExprError::new("empty list expression", 0, text.len()));
    }
    let mut items = Vec::new();
    loop {
        let (lo, _) = p.parse_cond()?;
        if p.peek() == Some(&Tok::To) {
            p.pos += 1;
            if p.at_end() {
                return Err(p.error_here("'to' must be followed by an upper bound"));
            }
            let (hi, _) = p.parse_cond()?;
            items.push(ListItem::Range(lo, hi));
        } else {
            items.push(ListItem::Single(lo));
        }
        match p.peek() {
            None => break,
            Some(t) if starts_expression(t) => continue,
            Some(_) => return Err(p.error_here(p.describe_current())),
        }
    }
    Ok(ListExpr::new(items).expect("at least one item"))
}
