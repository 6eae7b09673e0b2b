//! Recursive-descent parser for the scenario grammar, written as ordered-choice
//! rules over the token stream:
//!
//! ```text
//! program     <- (statement)* EOF
//! statement   <- kind_def / require / mutate / assignment / new_object NEWLINE
//! kind_def    <- 'kind' NAME ('(' NAME ')')? ':' NEWLINE INDENT (NAME ':' expr NEWLINE)+ DEDENT
//! require     <- 'require' expr NEWLINE
//! mutate      <- 'mutate' (target (',' target)*)? ('by' expr)? NEWLINE
//! assignment  <- (NAME / 'ego') '=' (NAME specifiers / expr) NEWLINE
//! expr        <- temporal ('until' temporal)*
//! temporal    <- ('always' / 'eventually' / 'next') temporal / disjunction
//! disjunction <- conjunction ('or' conjunction)*
//! conjunction <- negation ('and' negation)*
//! negation    <- 'not' (temporal / negation) / comparison
//! comparison  <- sum (cmp sum / 'can' 'see' sum / 'not'? 'in' sum)?
//! sum         <- term (('+' / '-') term)*
//! term        <- factor (('*' / '/') factor)*
//! factor      <- '-' factor / postfix
//! postfix     <- primary ('.' NAME / 'deg')*
//! primary     <- NUMBER / STRING / 'true' / 'false' / 'ego' / 'self' / new_object
//!              / 'distance' 'to' postfix / NAME '(' args ')' / NAME / '(' expr (',' expr)* ')'
//! new_object  <- 'new' NAME (specifier (',' specifier)*)?
//! ```
//!
//! The legacy `x = Kind with ...` form (no `new`) is accepted on the right of an
//! assignment when the kind name is directly followed by a specifier.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::{LangError, Pos, Span};

pub fn parse(source: &str) -> Result<Program, LangError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        toks: tokens,
        i: 0,
        nesting: 0,
    };
    p.program()
}

const SPECIFIER_STARTS: &[&str] = &[
    "at", "offset", "left", "right", "ahead", "behind", "above", "below", "on", "facing", "with", "visible",
];

const TEMPORAL_KEYWORDS: &[&str] = &["always", "eventually", "next"];

struct Parser {
    toks: Vec<Token>,
    i: usize,
    /// Depth of enclosing brackets; at depth 0 a comma after a specifier must
    /// introduce another specifier.
    nesting: usize,
}

type PResult<T> = Result<T, LangError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.i + k).min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let t = self.peek().clone();
        if t.kind != TokenKind::Eof {
            self.i += 1;
        }
        t
    }

    fn start(&self) -> Pos {
        self.peek().pos()
    }

    /// Span from `start` to the end of the last consumed token.
    fn span_from(&self, start: Pos) -> Span {
        let end = if self.i == 0 {
            start
        } else {
            self.toks[self.i - 1].end_pos()
        };
        Span::new(start, end)
    }

    fn error(&self, expected: impl Into<String>) -> LangError {
        let t = self.peek();
        LangError::Parse {
            line: t.line,
            column: t.column,
            expected: expected.into(),
            found: t.describe(),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_keyword(kw)
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_op(op)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("'{kw}'")))
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(format!("'{op}'")))
        }
    }

    fn expect_name(&mut self) -> PResult<String> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.advance().lexeme)
        } else {
            Err(self.error("identifier"))
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        match self.peek().kind {
            TokenKind::Newline => {
                self.i += 1;
                Ok(())
            }
            TokenKind::Eof => Ok(()),
            _ => Err(self.error("end of line")),
        }
    }

    fn at_specifier_start(&self) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && SPECIFIER_STARTS.contains(&t.lexeme.as_str())
    }

    fn program(&mut self) -> PResult<Program> {
        let mut statements = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Newline => {
                    self.i += 1;
                }
                _ => statements.push(self.statement()?),
            }
        }
        Ok(Program { statements })
    }

    fn statement(&mut self) -> PResult<Statement> {
        let start = self.start();
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Keyword if t.lexeme == "kind" => return self.kind_definition(),
            TokenKind::Keyword if t.lexeme == "require" => {
                self.i += 1;
                let e = self.expression()?;
                if e.is_temporal() {
                    StatementKind::RequireTemporal(e)
                } else {
                    StatementKind::Require(e)
                }
            }
            TokenKind::Keyword if t.lexeme == "mutate" => {
                self.i += 1;
                self.mutate()?
            }
            TokenKind::Keyword if t.lexeme == "ego" && self.peek_at(1).is_op("=") => {
                self.i += 2;
                StatementKind::EgoAssignment(self.assignment_value()?)
            }
            TokenKind::Identifier if self.peek_at(1).is_op("=") => {
                self.i += 2;
                StatementKind::Assignment {
                    name: t.lexeme,
                    value: self.assignment_value()?,
                }
            }
            TokenKind::Keyword if t.lexeme == "new" => StatementKind::NewObject(self.new_object()?),
            TokenKind::Identifier => {
                self.i += 1;
                return Err(self.error("'='"));
            }
            _ => return Err(self.error("statement")),
        };
        let span = self.span_from(start);
        self.expect_newline()?;
        Ok(Statement { kind, span })
    }

    fn assignment_value(&mut self) -> PResult<Expr> {
        let start = self.start();
        if self.peek().kind == TokenKind::Identifier && {
            let next = self.peek_at(1);
            next.kind == TokenKind::Keyword && SPECIFIER_STARTS.contains(&next.lexeme.as_str())
        } {
            let kind = self.advance().lexeme;
            let specifiers = self.specifier_list()?;
            let span = self.span_from(start);
            return Ok(Expr {
                kind: ExprKind::New(NewObject { kind, specifiers, span }),
                span,
            });
        }
        self.expression()
    }

    fn mutate(&mut self) -> PResult<StatementKind> {
        let mut targets = Vec::new();
        let is_target = |t: &Token| t.kind == TokenKind::Identifier || t.is_keyword("ego");
        if is_target(self.peek()) {
            loop {
                let s = self.start();
                let name = self.advance().lexeme;
                targets.push(Ident {
                    name,
                    span: self.span_from(s),
                });
                if !self.eat_op(",") {
                    break;
                }
                if !is_target(self.peek()) {
                    return Err(self.error("identifier"));
                }
            }
        }
        let scale = if self.eat_kw("by") { Some(self.expression()?) } else { None };
        Ok(StatementKind::Mutate { targets, scale })
    }

    fn kind_definition(&mut self) -> PResult<Statement> {
        let start = self.start();
        self.expect_kw("kind")?;
        let name = self.expect_name()?;
        let parent = if self.eat_op("(") {
            let p = self.expect_name()?;
            self.expect_op(")")?;
            Some(p)
        } else {
            None
        };
        self.expect_op(":")?;
        if self.peek().kind != TokenKind::Newline {
            return Err(self.error("end of line"));
        }
        self.i += 1;
        if self.peek().kind != TokenKind::Indent {
            return Err(self.error("indented block"));
        }
        self.i += 1;
        let mut defaults = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Dedent => {
                    self.i += 1;
                    break;
                }
                TokenKind::Eof => break,
                _ => {}
            }
            let s = self.start();
            let property = if self.peek().kind == TokenKind::Identifier {
                self.advance().lexeme
            } else {
                return Err(self.error("property name"));
            };
            self.expect_op(":")?;
            let value = self.expression()?;
            defaults.push(PropertyDefault {
                property,
                value,
                span: self.span_from(s),
            });
            self.expect_newline()?;
        }
        Ok(Statement {
            kind: StatementKind::KindDefinition { name, parent, defaults },
            span: self.span_from(start),
        })
    }

    fn new_object(&mut self) -> PResult<NewObject> {
        let start = self.start();
        self.expect_kw("new")?;
        let kind = self.expect_name()?;
        let specifiers = if self.at_specifier_start() {
            self.specifier_list()?
        } else {
            Vec::new()
        };
        Ok(NewObject {
            kind,
            specifiers,
            span: self.span_from(start),
        })
    }

    fn specifier_list(&mut self) -> PResult<Vec<Specifier>> {
        let mut out = vec![self.specifier()?];
        while self.at_op(",") {
            let next = self.peek_at(1);
            let continues = next.kind == TokenKind::Keyword && SPECIFIER_STARTS.contains(&next.lexeme.as_str());
            if !continues {
                if self.nesting == 0 {
                    self.i += 1;
                    return Err(self.error("specifier"));
                }
                break;
            }
            self.i += 1;
            out.push(self.specifier()?);
        }
        Ok(out)
    }

    fn specifier(&mut self) -> PResult<Specifier> {
        let start = self.start();
        let t = self.peek().clone();
        if t.kind != TokenKind::Keyword {
            return Err(self.error("specifier"));
        }
        self.i += 1;
        let positional = |p: &mut Parser, direction: Direction| -> PResult<SpecifierKind> {
            let target = p.sum()?;
            let by = if p.eat_kw("by") { Some(p.sum()?) } else { None };
            Ok(SpecifierKind::Positional { direction, target, by })
        };
        let kind = match t.lexeme.as_str() {
            "at" => SpecifierKind::At(self.sum()?),
            "offset" => {
                self.expect_kw("by")?;
                SpecifierKind::OffsetBy(self.sum()?)
            }
            "left" => {
                self.expect_kw("of")?;
                positional(self, Direction::LeftOf)?
            }
            "right" => {
                self.expect_kw("of")?;
                positional(self, Direction::RightOf)?
            }
            "ahead" => {
                self.expect_kw("of")?;
                positional(self, Direction::AheadOf)?
            }
            "behind" => positional(self, Direction::Behind)?,
            "above" => positional(self, Direction::Above)?,
            "below" => positional(self, Direction::Below)?,
            "on" => SpecifierKind::On(self.sum()?),
            "facing" => {
                if self.eat_kw("directly") {
                    self.expect_kw("toward")?;
                    SpecifierKind::FacingDirectlyToward(self.sum()?)
                } else if self.eat_kw("toward") {
                    SpecifierKind::FacingToward(self.sum()?)
                } else {
                    SpecifierKind::Facing(self.sum()?)
                }
            }
            "with" => {
                if self.eat_kw("behavior") {
                    let name = self.expect_name()?;
                    let args = if self.at_op("(") { self.call_args()? } else { Vec::new() };
                    SpecifierKind::Behavior { name, args }
                } else {
                    let property = self.expect_name().map_err(|_| self.error("property name"))?;
                    SpecifierKind::With {
                        property,
                        value: self.sum()?,
                    }
                }
            }
            "visible" => {
                let from = if self.eat_kw("from") { Some(self.sum()?) } else { None };
                SpecifierKind::Visible { from }
            }
            _ => {
                self.i -= 1;
                return Err(self.error("specifier"));
            }
        };
        Ok(Specifier {
            kind,
            span: self.span_from(start),
        })
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_op("(")?;
        self.nesting += 1;
        let mut args = Vec::new();
        if !self.at_op(")") {
            loop {
                args.push(self.expression()?);
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        self.nesting -= 1;
        Ok(args)
    }

    fn expression(&mut self) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = self.temporal()?;
        while self.eat_kw("until") {
            let rhs = self.temporal()?;
            lhs = Expr {
                kind: ExprKind::Until {
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.span_from(start),
            };
        }
        Ok(lhs)
    }

    fn temporal_op(&self) -> Option<TemporalOp> {
        let t = self.peek();
        if t.kind != TokenKind::Keyword || !TEMPORAL_KEYWORDS.contains(&t.lexeme.as_str()) {
            return None;
        }
        Some(match t.lexeme.as_str() {
            "always" => TemporalOp::Always,
            "eventually" => TemporalOp::Eventually,
            _ => TemporalOp::Next,
        })
    }

    fn temporal(&mut self) -> PResult<Expr> {
        let start = self.start();
        if let Some(op) = self.temporal_op() {
            self.i += 1;
            let operand = self.temporal()?;
            return Ok(Expr {
                kind: ExprKind::Temporal {
                    op,
                    operand: Box::new(operand),
                },
                span: self.span_from(start),
            });
        }
        self.disjunction()
    }

    fn binary_chain(
        &mut self,
        next: fn(&mut Parser) -> PResult<Expr>,
        ops: &[(&str, BinaryOp)],
    ) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = next(self)?;
        'outer: loop {
            for (text, op) in ops {
                let t = self.peek();
                let hit = (t.kind == TokenKind::Keyword || t.kind == TokenKind::Operator) && t.lexeme == *text;
                if hit {
                    self.i += 1;
                    let rhs = next(self)?;
                    lhs = Expr {
                        kind: ExprKind::Binary {
                            op: *op,
                            lhs: Box::new(lhs),
                            rhs: Box::new(rhs),
                        },
                        span: self.span_from(start),
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn disjunction(&mut self) -> PResult<Expr> {
        self.binary_chain(Parser::conjunction, &[("or", BinaryOp::Or)])
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        self.binary_chain(Parser::negation, &[("and", BinaryOp::And)])
    }

    fn negation(&mut self) -> PResult<Expr> {
        let start = self.start();
        if self.eat_kw("not") {
            let operand = if self.temporal_op().is_some() {
                self.temporal()?
            } else {
                self.negation()?
            };
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                span: self.span_from(start),
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let start = self.start();
        let lhs = self.sum()?;
        const CMP: &[(&str, BinaryOp)] = &[
            ("<", BinaryOp::Lt),
            ("<=", BinaryOp::Le),
            (">", BinaryOp::Gt),
            (">=", BinaryOp::Ge),
            ("==", BinaryOp::Eq),
            ("!=", BinaryOp::Ne),
        ];
        if let Some((_, op)) = CMP.iter().find(|(s, _)| self.at_op(s)) {
            self.i += 1;
            let rhs = self.sum()?;
            return Ok(Expr {
                kind: ExprKind::Binary {
                    op: *op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.span_from(start),
            });
        }
        if self.eat_kw("can") {
            self.expect_kw("see")?;
            let target = self.sum()?;
            return Ok(Expr {
                kind: ExprKind::CanSee {
                    viewer: Box::new(lhs),
                    target: Box::new(target),
                },
                span: self.span_from(start),
            });
        }
        let negated = self.at_kw("not") && self.peek_at(1).is_keyword("in");
        if negated {
            self.i += 1;
        }
        if self.eat_kw("in") {
            let region = self.sum()?;
            let span = self.span_from(start);
            let inner = Expr {
                kind: ExprKind::In {
                    subject: Box::new(lhs),
                    region: Box::new(region),
                },
                span,
            };
            if negated {
                return Ok(Expr {
                    kind: ExprKind::Unary {
                        op: UnaryOp::Not,
                        operand: Box::new(inner),
                    },
                    span,
                });
            }
            return Ok(inner);
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> PResult<Expr> {
        self.binary_chain(Parser::term, &[("+", BinaryOp::Add), ("-", BinaryOp::Sub)])
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary_chain(Parser::factor, &[("*", BinaryOp::Mul), ("/", BinaryOp::Div)])
    }

    fn factor(&mut self) -> PResult<Expr> {
        let start = self.start();
        if self.eat_op("-") {
            let operand = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                },
                span: self.span_from(start),
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.start();
        let mut e = self.primary()?;
        loop {
            if self.eat_op(".") {
                let t = self.peek();
                if t.kind != TokenKind::Identifier && t.kind != TokenKind::Keyword {
                    return Err(self.error("property name"));
                }
                let name = self.advance().lexeme;
                e = Expr {
                    kind: ExprKind::Attribute { base: Box::new(e), name },
                    span: self.span_from(start),
                };
            } else if self.eat_kw("deg") {
                e = Expr {
                    kind: ExprKind::Deg(Box::new(e)),
                    span: self.span_from(start),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Number => {
                self.i += 1;
                let v: f64 = t.lexeme.parse().map_err(|_| LangError::Parse {
                    line: t.line,
                    column: t.column,
                    expected: "number".into(),
                    found: t.describe(),
                })?;
                ExprKind::Number(v)
            }
            TokenKind::String => {
                self.i += 1;
                ExprKind::Str(unescape(&t.lexeme))
            }
            TokenKind::Keyword => match t.lexeme.as_str() {
                "true" | "false" => {
                    self.i += 1;
                    ExprKind::Bool(t.lexeme == "true")
                }
                "ego" => {
                    self.i += 1;
                    ExprKind::Ego
                }
                "self" => {
                    self.i += 1;
                    ExprKind::SelfRef
                }
                "new" => ExprKind::New(self.new_object()?),
                "distance" => {
                    self.i += 1;
                    self.expect_kw("to")?;
                    ExprKind::DistanceTo(Box::new(self.postfix()?))
                }
                _ => return Err(self.error("expression")),
            },
            TokenKind::Identifier => {
                self.i += 1;
                if self.at_op("(") {
                    let args = self.call_args()?;
                    ExprKind::Call { func: t.lexeme, args }
                } else {
                    ExprKind::Name(t.lexeme)
                }
            }
            TokenKind::Operator if t.lexeme == "(" => {
                self.i += 1;
                self.nesting += 1;
                let mut items = vec![self.expression()?];
                while self.eat_op(",") {
                    if items.len() == 3 {
                        self.i -= 1;
                        return Err(self.error("')'"));
                    }
                    items.push(self.expression()?);
                }
                self.expect_op(")")?;
                self.nesting -= 1;
                if items.len() == 1 {
                    let mut inner = items.pop().unwrap();
                    inner.span = self.span_from(start);
                    return Ok(inner);
                }
                ExprKind::Vector(items)
            }
            _ => return Err(self.error("expression")),
        };
        Ok(Expr {
            kind,
            span: self.span_from(start),
        })
    }
}

fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}
