//! Syntax tree for protocol programs. Spans are carried for diagnostics
//! but ignored by equality, so a rendered-and-reparsed tree compares equal
//! to the original.

use num_rational::Ratio;

use super::SourceSpan;
use crate::model::Sex;

#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: SourceSpan,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: SourceSpan) -> Self {
        Spanned { node, span }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolAst {
    pub name: Spanned<String>,
    pub body: Vec<Stmt>,
}

impl ProtocolAst {
    /// Leading `require` predicates.
    pub fn requires(&self) -> impl Iterator<Item = &Pred> {
        self.body.iter().map_while(|s| match &s.node {
            StmtKind::Require(p) => Some(p),
            _ => None,
        })
    }
}

pub type Stmt = Spanned<StmtKind>;
pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Require(Pred),
    If {
        cond: Pred,
        then: Block,
        otherwise: Option<Block>,
    },
    /// Uniform choice among the children passing `filter`.
    Pick {
        var: Spanned<String>,
        filter: Option<Pred>,
    },
    Flip {
        prob: Ratio<u64>,
        heads: Block,
        tails: Block,
    },
    Say(SayExpr),
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayLit {
    /// `mon`..`sun`; index 0 is Monday.
    Named(u32),
    /// `d<index>`.
    Index(u32),
}

impl DayLit {
    pub fn index(self) -> u32 {
        match self {
            DayLit::Named(i) | DayLit::Index(i) => i,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChildRef {
    Var(String),
    /// Birth-order position.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChildFilter {
    pub sex: Option<Sex>,
    pub day: Option<Spanned<DayLit>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    Const(bool),
    Exists(ChildFilter),
    All(ChildFilter),
    Count(ChildFilter, CmpOp, u64),
    SexOf(Spanned<ChildRef>, Sex),
    DayOf(Spanned<ChildRef>, Spanned<DayLit>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SexArg {
    Lit(Sex),
    Of(Spanned<ChildRef>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DayArg {
    Lit(Spanned<DayLit>),
    Of(Spanned<ChildRef>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SayExpr {
    Claim { sex: SexArg, day: Option<DayArg> },
    AtLeastOne(Sex),
    TwoOfAKind(Sex),
    ProudOf(Sex),
    Yes,
    No,
    Text(String),
}
