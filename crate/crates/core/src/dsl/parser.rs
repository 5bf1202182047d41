//! Recursive-descent parser plus the static checks that need no world
//! config: variable scoping and unreachable statements.

use num_rational::Ratio;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{DslError, SourceSpan};
use crate::model::{Day, Sex};

const RESERVED: &[&str] = &[
    "procedure",
    "require",
    "if",
    "else",
    "pick",
    "where",
    "flip",
    "say",
    "reject",
    "and",
    "or",
    "not",
    "true",
    "false",
    "boy",
    "girl",
    "exists",
    "all",
    "count",
    "sex",
    "day",
    "claim",
    "atleastone",
    "twoofakind",
    "proudof",
    "yes",
    "no",
    "text",
];

fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name) || Day::NAMES.contains(&name) || is_day_index(name)
}

fn is_day_index(name: &str) -> bool {
    name.strip_prefix('d')
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    pub(crate) fn new(source: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(source)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let tok = self.toks[self.pos].clone();
        if tok.tok != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let found = self.peek();
        Err(DslError::Syntax {
            span: found.span,
            message: format!("expected {expected}, found {}", found.tok.describe()),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.peek().tok == tok {
            Ok(self.next().span)
        } else {
            self.error(&tok.describe())
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.at_keyword(kw);
        if hit {
            self.next();
        }
        hit
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_keyword(kw) {
            Ok(self.next().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    pub(crate) fn finish(&mut self) -> PResult<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    pub(crate) fn protocol(&mut self) -> PResult<ProtocolAst> {
        self.expect_keyword("procedure")?;
        let name = self.ident("procedure name")?;
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        let mut in_preamble = true;
        while self.peek().tok != Tok::RBrace {
            let stmt = self.stmt()?;
            if matches!(stmt.node, StmtKind::Require(_)) {
                if !in_preamble {
                    return Err(DslError::Syntax {
                        span: stmt.span,
                        message: "`require` must precede all other statements".into(),
                    });
                }
            } else {
                in_preamble = false;
            }
            body.push(stmt);
        }
        self.expect(Tok::RBrace)?;
        Ok(ProtocolAst { name, body })
    }

    fn ident(&mut self, what: &str) -> PResult<Spanned<String>> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok(Spanned::new(s, self.next().span))
            }
            _ => self.error(what),
        }
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while self.peek().tok != Tok::RBrace {
            let stmt = self.stmt()?;
            if matches!(stmt.node, StmtKind::Require(_)) {
                return Err(DslError::Syntax {
                    span: stmt.span,
                    message: "`require` is only allowed at the top of a procedure".into(),
                });
            }
            stmts.push(stmt);
        }
        self.expect(Tok::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek().span;
        let kind = if self.eat_keyword("require") {
            let p = self.pred()?;
            self.expect(Tok::Semi)?;
            StmtKind::Require(p)
        } else if self.eat_keyword("if") {
            let cond = self.pred()?;
            let then = self.block()?;
            let otherwise = if self.eat_keyword("else") {
                Some(self.block()?)
            } else {
                None
            };
            StmtKind::If {
                cond,
                then,
                otherwise,
            }
        } else if self.eat_keyword("pick") {
            let var = self.ident("variable name")?;
            if is_reserved(&var.node) {
                return Err(DslError::Syntax {
                    span: var.span,
                    message: format!("`{}` is reserved and cannot name a child", var.node),
                });
            }
            let filter = if self.eat_keyword("where") {
                Some(self.pred()?)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            StmtKind::Pick { var, filter }
        } else if self.eat_keyword("flip") {
            let prob = self.probability()?;
            let heads = self.block()?;
            self.expect_keyword("else")?;
            let tails = self.block()?;
            StmtKind::Flip { prob, heads, tails }
        } else if self.eat_keyword("say") {
            let e = self.say_expr()?;
            self.expect(Tok::Semi)?;
            StmtKind::Say(e)
        } else if self.eat_keyword("reject") {
            self.expect(Tok::Semi)?;
            StmtKind::Reject
        } else {
            return self.error("a statement (require, if, pick, flip, say, reject)");
        };
        Ok(Spanned::new(kind, span))
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => self.error("an integer"),
        }
    }

    fn probability(&mut self) -> PResult<Ratio<u64>> {
        let span = self.peek().span;
        let numer = self.int()?;
        let denom = if self.peek().tok == Tok::Slash {
            self.next();
            self.int()?
        } else {
            1
        };
        if denom == 0 || numer > denom {
            return Err(DslError::Syntax {
                span,
                message: format!("probability {numer}/{denom} is not in [0, 1]"),
            });
        }
        Ok(Ratio::new(numer, denom))
    }

    fn sex(&mut self) -> PResult<Sex> {
        if self.eat_keyword("boy") {
            Ok(Sex::Boy)
        } else if self.eat_keyword("girl") {
            Ok(Sex::Girl)
        } else {
            self.error("`boy` or `girl`")
        }
    }

    fn try_day(&mut self) -> Option<Spanned<DayLit>> {
        let Tok::Ident(name) = &self.peek().tok else {
            return None;
        };
        let lit = if let Some(i) = Day::NAMES.iter().position(|n| n == name) {
            DayLit::Named(i as u32)
        } else if is_day_index(name) {
            DayLit::Index(name[1..].parse().ok()?)
        } else {
            return None;
        };
        Some(Spanned::new(lit, self.next().span))
    }

    fn day(&mut self) -> PResult<Spanned<DayLit>> {
        match self.try_day() {
            Some(d) => Ok(d),
            None => self.error("a day (`mon`..`sun` or `d<n>`)"),
        }
    }

    fn child_ref(&mut self) -> PResult<Spanned<ChildRef>> {
        self.expect(Tok::LParen)?;
        let span = self.peek().span;
        let r = match &self.peek().tok {
            Tok::Int(n) => {
                let n = *n as usize;
                self.next();
                ChildRef::Index(n)
            }
            Tok::Ident(name) if !is_reserved(name) => {
                let name = name.clone();
                self.next();
                ChildRef::Var(name)
            }
            _ => return self.error("a child variable or index"),
        };
        self.expect(Tok::RParen)?;
        Ok(Spanned::new(r, span))
    }

    fn filter(&mut self) -> PResult<ChildFilter> {
        self.expect(Tok::LParen)?;
        let mut filter = ChildFilter {
            sex: None,
            day: None,
        };
        loop {
            if filter.sex.is_none() && (self.at_keyword("boy") || self.at_keyword("girl")) {
                filter.sex = Some(self.sex()?);
            } else if let Some(d) = filter.day.is_none().then(|| self.try_day()).flatten() {
                filter.day = Some(d);
            } else {
                return self.error("a sex or a day");
            }
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(filter)
    }

    pub(crate) fn pred(&mut self) -> PResult<Pred> {
        let mut lhs = self.pred_and()?;
        while self.eat_keyword("or") {
            lhs = Pred::Or(Box::new(lhs), Box::new(self.pred_and()?));
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> PResult<Pred> {
        let mut lhs = self.pred_unary()?;
        while self.eat_keyword("and") {
            lhs = Pred::And(Box::new(lhs), Box::new(self.pred_unary()?));
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> PResult<Pred> {
        if self.eat_keyword("not") {
            return Ok(Pred::Not(Box::new(self.pred_unary()?)));
        }
        if self.peek().tok == Tok::LParen {
            self.next();
            let p = self.pred()?;
            self.expect(Tok::RParen)?;
            return Ok(p);
        }
        if self.eat_keyword("true") {
            return Ok(Pred::Const(true));
        }
        if self.eat_keyword("false") {
            return Ok(Pred::Const(false));
        }
        if self.eat_keyword("exists") {
            return Ok(Pred::Exists(self.filter()?));
        }
        if self.eat_keyword("all") {
            return Ok(Pred::All(self.filter()?));
        }
        if self.eat_keyword("count") {
            let f = self.filter()?;
            let op = self.cmp_op()?;
            return Ok(Pred::Count(f, op, self.int()?));
        }
        if self.eat_keyword("sex") {
            let r = self.child_ref()?;
            let negate = self.equality()?;
            let p = Pred::SexOf(r, self.sex()?);
            return Ok(if negate { Pred::Not(Box::new(p)) } else { p });
        }
        if self.eat_keyword("day") {
            let r = self.child_ref()?;
            let negate = self.equality()?;
            let p = Pred::DayOf(r, self.day()?);
            return Ok(if negate { Pred::Not(Box::new(p)) } else { p });
        }
        self.error("a predicate")
    }

    /// `=` or `!=`; returns whether it negates.
    fn equality(&mut self) -> PResult<bool> {
        match self.peek().tok {
            Tok::Eq => {
                self.next();
                Ok(false)
            }
            Tok::Ne => {
                self.next();
                Ok(true)
            }
            _ => self.error("`=` or `!=`"),
        }
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        let op = match self.peek().tok {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return self.error("a comparison"),
        };
        self.next();
        Ok(op)
    }

    fn sex_arg(&mut self) -> PResult<SexArg> {
        if self.eat_keyword("sex") {
            Ok(SexArg::Of(self.child_ref()?))
        } else {
            Ok(SexArg::Lit(self.sex()?))
        }
    }

    fn day_arg(&mut self) -> PResult<DayArg> {
        if self.eat_keyword("day") {
            Ok(DayArg::Of(self.child_ref()?))
        } else {
            Ok(DayArg::Lit(self.day()?))
        }
    }

    fn sex_call(&mut self) -> PResult<Sex> {
        self.expect(Tok::LParen)?;
        let s = self.sex()?;
        self.expect(Tok::RParen)?;
        Ok(s)
    }

    pub(crate) fn say_expr(&mut self) -> PResult<SayExpr> {
        if self.eat_keyword("claim") {
            self.expect(Tok::LParen)?;
            let sex = self.sex_arg()?;
            let day = if self.peek().tok == Tok::Comma {
                self.next();
                Some(self.day_arg()?)
            } else {
                None
            };
            self.expect(Tok::RParen)?;
            Ok(SayExpr::Claim { sex, day })
        } else if self.eat_keyword("atleastone") {
            Ok(SayExpr::AtLeastOne(self.sex_call()?))
        } else if self.eat_keyword("twoofakind") {
            Ok(SayExpr::TwoOfAKind(self.sex_call()?))
        } else if self.eat_keyword("proudof") {
            Ok(SayExpr::ProudOf(self.sex_call()?))
        } else if self.eat_keyword("yes") {
            Ok(SayExpr::Yes)
        } else if self.eat_keyword("no") {
            Ok(SayExpr::No)
        } else if self.eat_keyword("text") {
            self.expect(Tok::LParen)?;
            let text = match &self.peek().tok {
                Tok::Str(s) => s.clone(),
                _ => return self.error("a string literal"),
            };
            self.next();
            self.expect(Tok::RParen)?;
            Ok(SayExpr::Text(text))
        } else {
            self.error("a statement (claim, atleastone, twoofakind, proudof, yes, no, text)")
        }
    }
}

/// Rejects variables used outside the scope of their `pick` and statements
/// that can never run.
pub(crate) fn check(ast: &ProtocolAst) -> Result<(), DslError> {
    let mut scope = Vec::new();
    check_block(&ast.body, &mut scope)?;
    Ok(())
}

/// Returns whether every path through the block ends in `say`/`reject`.
fn check_block(block: &[Stmt], scope: &mut Vec<String>) -> Result<bool, DslError> {
    let depth = scope.len();
    let mut terminated = false;
    for stmt in block {
        if terminated {
            return Err(DslError::Path {
                span: stmt.span,
                message: "unreachable statement: every path already ended in say or reject".into(),
            });
        }
        terminated = match &stmt.node {
            StmtKind::Require(p) => {
                check_pred(p, scope)?;
                false
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                check_pred(cond, scope)?;
                let a = check_block(then, scope)?;
                let b = match otherwise {
                    Some(block) => check_block(block, scope)?,
                    None => false,
                };
                a && b
            }
            StmtKind::Pick { var, filter } => {
                scope.push(var.node.clone());
                if let Some(f) = filter {
                    check_pred(f, scope)?;
                }
                false
            }
            StmtKind::Flip { heads, tails, .. } => {
                let a = check_block(heads, scope)?;
                let b = check_block(tails, scope)?;
                a && b
            }
            StmtKind::Say(e) => {
                check_say(e, scope)?;
                true
            }
            StmtKind::Reject => true,
        };
    }
    scope.truncate(depth);
    Ok(terminated)
}

fn check_ref(r: &Spanned<ChildRef>, scope: &[String]) -> Result<(), DslError> {
    match &r.node {
        ChildRef::Var(name) if !scope.contains(name) => Err(DslError::UnboundVariable {
            span: r.span,
            name: name.clone(),
        }),
        _ => Ok(()),
    }
}

fn check_pred(p: &Pred, scope: &[String]) -> Result<(), DslError> {
    match p {
        Pred::SexOf(r, _) | Pred::DayOf(r, _) => check_ref(r, scope),
        Pred::And(a, b) | Pred::Or(a, b) => {
            check_pred(a, scope)?;
            check_pred(b, scope)
        }
        Pred::Not(a) => check_pred(a, scope),
        Pred::Const(_) | Pred::Exists(_) | Pred::All(_) | Pred::Count(..) => Ok(()),
    }
}

fn check_say(e: &SayExpr, scope: &[String]) -> Result<(), DslError> {
    if let SayExpr::Claim { sex, day } = e {
        if let SexArg::Of(r) = sex {
            check_ref(r, scope)?;
        }
        if let Some(DayArg::Of(r)) = day {
            check_ref(r, scope)?;
        }
    }
    Ok(())
}
