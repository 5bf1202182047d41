//! Resolves a parsed procedure against a world config: day literals become
//! indices, variables become environment slots, and family-level
//! predicates become [`QueryPredicate`]s.
//!
//! Both the exact compiler and the Monte Carlo interpreter run the lowered
//! [`Program`].

use super::ast::*;
use super::{DslError, SourceSpan};
use crate::engine::Statement;
use crate::model::{Day, Family, QueryPredicate, Sex, WorldConfig};

/// A procedure ready to run against families of one world config.
#[derive(Debug, Clone)]
pub struct Program {
    pub(crate) name: String,
    pub(crate) config: WorldConfig,
    pub(crate) pre_filter: Option<QueryPredicate>,
    pub(crate) body: Vec<Op>,
    pub(crate) span: SourceSpan,
}

impl Program {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn pre_filter(&self) -> Option<&QueryPredicate> {
        self.pre_filter.as_ref()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    If(Cond, Vec<Op>, Vec<Op>),
    Pick {
        filter: Option<Cond>,
        span: SourceSpan,
    },
    Flip {
        numer: u64,
        denom: u64,
        heads: Vec<Op>,
        tails: Vec<Op>,
    },
    Say(SayOp),
    Reject,
}

/// Where a child comes from: a picked variable's slot, or a birth-order index.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Src {
    Slot(usize),
    Child(usize),
}

impl Src {
    fn child(self, env: &[usize]) -> usize {
        match self {
            Src::Slot(s) => env[s],
            Src::Child(i) => i,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Cond {
    Family(QueryPredicate),
    SexOf(usize, Sex),
    DayOf(usize, Day),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

impl Cond {
    pub(crate) fn eval(&self, family: &Family, env: &[usize]) -> bool {
        let kids = family.children();
        match self {
            Cond::Family(q) => q.eval(family),
            Cond::SexOf(slot, sex) => kids[env[*slot]].sex == *sex,
            Cond::DayOf(slot, day) => kids[env[*slot]].day == *day,
            Cond::And(a, b) => a.eval(family, env) && b.eval(family, env),
            Cond::Or(a, b) => a.eval(family, env) || b.eval(family, env),
            Cond::Not(a) => !a.eval(family, env),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SayOp {
    Fixed(Statement),
    Claim {
        sex: Result<Sex, Src>,
        day: Option<Result<Day, Src>>,
    },
}

impl SayOp {
    pub(crate) fn statement(&self, family: &Family, env: &[usize]) -> Statement {
        match self {
            SayOp::Fixed(s) => s.clone(),
            SayOp::Claim { sex, day } => {
                let kids = family.children();
                Statement::Claim {
                    sex: sex.unwrap_or_else(|src| kids[src.child(env)].sex),
                    day: day.map(|d| d.unwrap_or_else(|src| kids[src.child(env)].day)),
                }
            }
        }
    }

    pub(crate) fn matches(&self, target: &Statement, family: &Family, env: &[usize]) -> bool {
        match self {
            SayOp::Fixed(s) => s == target,
            SayOp::Claim { .. } => self.statement(family, env) == *target,
        }
    }
}

pub(crate) struct Lowerer<'c> {
    cfg: &'c WorldConfig,
    scope: Vec<String>,
}

impl<'c> Lowerer<'c> {
    pub(crate) fn new(cfg: &'c WorldConfig) -> Self {
        Lowerer {
            cfg,
            scope: Vec::new(),
        }
    }

    pub(crate) fn program(mut self, ast: &ProtocolAst) -> Result<Program, DslError> {
        let mut pre_filter: Option<QueryPredicate> = None;
        for p in ast.requires() {
            let q = self.query(p)?;
            pre_filter = Some(match pre_filter {
                None => q,
                Some(prev) => prev.and(q),
            });
        }
        let rest: Vec<Stmt> = ast
            .body
            .iter()
            .skip_while(|s| matches!(s.node, StmtKind::Require(_)))
            .cloned()
            .collect();
        let body = self.block(&rest)?;
        Ok(Program {
            name: ast.name.node.clone(),
            config: *self.cfg,
            pre_filter,
            body,
            span: ast.name.span,
        })
    }

    fn block(&mut self, block: &[Stmt]) -> Result<Vec<Op>, DslError> {
        let depth = self.scope.len();
        let mut ops = Vec::with_capacity(block.len());
        for stmt in block {
            ops.push(match &stmt.node {
                StmtKind::Require(_) => {
                    return Err(DslError::Syntax {
                        span: stmt.span,
                        message: "`require` must precede all other statements".into(),
                    })
                }
                StmtKind::If {
                    cond,
                    then,
                    otherwise,
                } => {
                    let c = self.cond(cond)?;
                    let t = self.block(then)?;
                    let e = match otherwise {
                        Some(b) => self.block(b)?,
                        None => Vec::new(),
                    };
                    Op::If(c, t, e)
                }
                StmtKind::Pick { var, filter } => {
                    self.scope.push(var.node.clone());
                    let filter = filter.as_ref().map(|f| self.cond(f)).transpose()?;
                    Op::Pick {
                        filter,
                        span: stmt.span,
                    }
                }
                StmtKind::Flip { prob, heads, tails } => Op::Flip {
                    numer: *prob.numer(),
                    denom: *prob.denom(),
                    heads: self.block(heads)?,
                    tails: self.block(tails)?,
                },
                StmtKind::Say(e) => Op::Say(self.say(e)?),
                StmtKind::Reject => Op::Reject,
            });
        }
        self.scope.truncate(depth);
        Ok(ops)
    }

    fn day(&self, lit: &Spanned<DayLit>) -> Result<Day, DslError> {
        let week = self.cfg.week_length();
        let bad = |message: String| {
            Err(DslError::InvalidDay {
                span: lit.span,
                message,
            })
        };
        match lit.node {
            DayLit::Named(_) if week != 7 => bad(format!(
                "named days need a 7-day week; use d0..d{} for a {week}-day week",
                week - 1
            )),
            l if l.index() >= week => bad(format!(
                "`{}` is outside a {week}-day week",
                super::render::render_day(l)
            )),
            l => Ok(Day(l.index())),
        }
    }

    fn slot(&self, r: &Spanned<ChildRef>) -> Result<Src, DslError> {
        match &r.node {
            ChildRef::Var(name) => self
                .scope
                .iter()
                .rposition(|v| v == name)
                .map(Src::Slot)
                .ok_or_else(|| DslError::UnboundVariable {
                    span: r.span,
                    name: name.clone(),
                }),
            ChildRef::Index(i) if *i < self.cfg.family_size() => Ok(Src::Child(*i)),
            ChildRef::Index(i) => Err(DslError::Syntax {
                span: r.span,
                message: format!(
                    "child index {i} but families have {} children",
                    self.cfg.family_size()
                ),
            }),
        }
    }

    fn filter(&self, f: &ChildFilter) -> Result<(Option<Sex>, Option<Day>), DslError> {
        Ok((f.sex, f.day.as_ref().map(|d| self.day(d)).transpose()?))
    }

    /// Lowers a predicate that must not mention picked variables.
    pub(crate) fn query(&self, p: &Pred) -> Result<QueryPredicate, DslError> {
        Ok(match p {
            Pred::Const(b) => QueryPredicate::Const(*b),
            Pred::Exists(f) => {
                let (sex, day) = self.filter(f)?;
                QueryPredicate::exists(sex, day)
            }
            Pred::All(f) => {
                let (sex, day) = self.filter(f)?;
                QueryPredicate::all(sex, day)
            }
            Pred::Count(f, op, k) => {
                let (sex, day) = self.filter(f)?;
                let at_least = |k: u64| QueryPredicate::count_at_least(k as usize, sex, day);
                let exactly = || at_least(*k).and(!at_least(k + 1));
                match op {
                    CmpOp::Ge => at_least(*k),
                    CmpOp::Gt => at_least(k + 1),
                    CmpOp::Lt => !at_least(*k),
                    CmpOp::Le => !at_least(k + 1),
                    CmpOp::Eq => exactly(),
                    CmpOp::Ne => !exactly(),
                }
            }
            Pred::SexOf(r, s) => match self.slot(r)? {
                Src::Child(i) => QueryPredicate::ChildSexIs(i, *s),
                Src::Slot(_) => return Err(self.needs_family_level(r)),
            },
            Pred::DayOf(r, d) => match self.slot(r)? {
                Src::Child(i) => QueryPredicate::ChildDayIs(i, self.day(d)?),
                Src::Slot(_) => return Err(self.needs_family_level(r)),
            },
            Pred::And(a, b) => self.query(a)?.and(self.query(b)?),
            Pred::Or(a, b) => self.query(a)?.or(self.query(b)?),
            Pred::Not(a) => !self.query(a)?,
        })
    }

    fn needs_family_level(&self, r: &Spanned<ChildRef>) -> DslError {
        DslError::Syntax {
            span: r.span,
            message: "a family-level predicate cannot refer to a picked child".into(),
        }
    }

    fn mentions_vars(p: &Pred) -> bool {
        match p {
            Pred::SexOf(r, _) | Pred::DayOf(r, _) => matches!(r.node, ChildRef::Var(_)),
            Pred::And(a, b) | Pred::Or(a, b) => Self::mentions_vars(a) || Self::mentions_vars(b),
            Pred::Not(a) => Self::mentions_vars(a),
            _ => false,
        }
    }

    fn cond(&self, p: &Pred) -> Result<Cond, DslError> {
        if !Self::mentions_vars(p) {
            return Ok(Cond::Family(self.query(p)?));
        }
        Ok(match p {
            Pred::SexOf(r, s) => match self.slot(r)? {
                Src::Slot(slot) => Cond::SexOf(slot, *s),
                Src::Child(i) => Cond::Family(QueryPredicate::ChildSexIs(i, *s)),
            },
            Pred::DayOf(r, d) => match self.slot(r)? {
                Src::Slot(slot) => Cond::DayOf(slot, self.day(d)?),
                Src::Child(i) => Cond::Family(QueryPredicate::ChildDayIs(i, self.day(d)?)),
            },
            Pred::And(a, b) => Cond::And(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
            Pred::Or(a, b) => Cond::Or(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
            Pred::Not(a) => Cond::Not(Box::new(self.cond(a)?)),
            other => Cond::Family(self.query(other)?),
        })
    }

    pub(crate) fn say(&self, e: &SayExpr) -> Result<SayOp, DslError> {
        Ok(SayOp::Fixed(match e {
            SayExpr::Claim { sex, day } => {
                let sex = match sex {
                    SexArg::Lit(s) => Ok(*s),
                    SexArg::Of(r) => Err(self.slot(r)?),
                };
                let day = match day {
                    None => None,
                    Some(DayArg::Lit(d)) => Some(Ok(self.day(d)?)),
                    Some(DayArg::Of(r)) => Some(Err(self.slot(r)?)),
                };
                return Ok(match (sex, day) {
                    (Ok(sex), None) => SayOp::Fixed(Statement::Claim { sex, day: None }),
                    (Ok(sex), Some(Ok(d))) => SayOp::Fixed(Statement::Claim { sex, day: Some(d) }),
                    (sex, day) => SayOp::Claim { sex, day },
                });
            }
            SayExpr::AtLeastOne(s) => Statement::AtLeastOne(*s),
            SayExpr::TwoOfAKind(s) => Statement::TwoOfAKind(*s),
            SayExpr::ProudOf(s) => Statement::ProudOf(*s),
            SayExpr::Yes => Statement::YesNo(true),
            SayExpr::No => Statement::YesNo(false),
            SayExpr::Text(t) => Statement::Text(t.clone()),
        }))
    }
}
