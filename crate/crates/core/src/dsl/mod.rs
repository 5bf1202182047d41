//! A small language for writing disclosure procedures.
//!
//! ```text
//! procedure gn_dn {
//!   pick c;
//!   say claim(sex(c), day(c));
//! }
//! ```
//!
//! Programs are parsed to a [`ProtocolAst`], rendered back to canonical
//! text with [`render`], and compiled exactly to a
//! [`ProtocolKernel`](crate::ProtocolKernel) with [`compile`]. A path that
//! ends without `say` or `reject` rejects, with a warning.

pub mod ast;
mod compile;
mod lexer;
pub(crate) mod lower;
mod parser;
mod render;

use std::fmt;

use thiserror::Error;

pub use ast::ProtocolAst;
pub use compile::Compiled;
pub use lower::Program;
pub use render::{render, render_pred, render_say};

use crate::engine::Statement;
use crate::model::{Family, QueryPredicate, WorldConfig};
use crate::Weight;

/// 1-based position of a token in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{span}: {message}")]
    Path { span: SourceSpan, message: String },
    #[error("{span}: unbound variable `{name}`")]
    UnboundVariable { span: SourceSpan, name: String },
    #[error("{span}: {message}")]
    InvalidDay { span: SourceSpan, message: String },
    #[error("{span}: pick matches no child in {} famil{}, e.g. {}", .families.len(),
        if .families.len() == 1 { "y" } else { "ies" }, .families[0])]
    EmptyPick {
        span: SourceSpan,
        families: Vec<Family>,
    },
}

impl DslError {
    pub fn span(&self) -> SourceSpan {
        match self {
            DslError::Syntax { span, .. }
            | DslError::Path { span, .. }
            | DslError::UnboundVariable { span, .. }
            | DslError::InvalidDay { span, .. }
            | DslError::EmptyPick { span, .. } => *span,
        }
    }
}

pub fn parse(source: &str) -> Result<ProtocolAst, DslError> {
    let mut p = parser::Parser::new(source)?;
    let ast = p.protocol()?;
    p.finish()?;
    parser::check(&ast)?;
    Ok(ast)
}

/// Resolves days and variables for one world config.
pub fn lower(ast: &ProtocolAst, cfg: &WorldConfig) -> Result<Program, DslError> {
    lower::Lowerer::new(cfg).program(ast)
}

pub fn compile<W: Weight>(ast: &ProtocolAst, cfg: &WorldConfig) -> Result<Compiled<W>, DslError> {
    compile::compile_program(&lower(ast, cfg)?)
}

pub fn compile_program<W: Weight>(program: &Program) -> Result<Compiled<W>, DslError> {
    compile::compile_program(program)
}

/// Parses a statement expression such as `claim(boy, tue)`.
pub fn parse_statement(text: &str, cfg: &WorldConfig) -> Result<Statement, DslError> {
    let mut p = parser::Parser::new(text)?;
    let expr = p.say_expr()?;
    p.finish()?;
    match lower::Lowerer::new(cfg).say(&expr)? {
        lower::SayOp::Fixed(s) => Ok(s),
        lower::SayOp::Claim { .. } => Err(DslError::Syntax {
            span: SourceSpan::new(1, 1, text.len()),
            message: "a statement must name a concrete sex and day".into(),
        }),
    }
}

/// Parses a family-level event such as `all(boy)` or `not exists(girl, tue)`.
pub fn parse_event(text: &str, cfg: &WorldConfig) -> Result<QueryPredicate, DslError> {
    let mut p = parser::Parser::new(text)?;
    let pred = p.pred()?;
    p.finish()?;
    lower::Lowerer::new(cfg).query(&pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{marginal, posterior};
    use crate::model::{Day, Sex};
    use crate::{ratio, Rational};

    const GN_DN: &str = "procedure gn_dn {\n  pick c;\n  say claim(sex(c), day(c));\n}\n";

    fn kernel(src: &str, cfg: &WorldConfig) -> crate::ProtocolKernel<Rational> {
        compile::<Rational>(&parse(src).unwrap(), cfg)
            .unwrap()
            .kernel
    }

    #[test]
    fn constant_flip_marginal() {
        let k = kernel(
            "procedure p { flip 1/3 { say yes; } else { say no; } }",
            &WorldConfig::standard(),
        );
        let m = marginal(&k).unwrap();
        assert_eq!(m.statements[&Statement::YesNo(true)], ratio(1, 3));
        assert_eq!(m.statements[&Statement::YesNo(false)], ratio(2, 3));
        assert_eq!(m.reject, ratio(0, 1));
    }

    #[test]
    fn fall_through_rejects_with_warning() {
        let out = compile::<Rational>(
            &parse("procedure p { if all(boy) { say atleastone(boy); } }").unwrap(),
            &WorldConfig::standard(),
        )
        .unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].message.contains("147 families"));
        let m = marginal(&out.kernel).unwrap();
        assert_eq!(m.reject, ratio(3, 4));

        let silent = compile::<Rational>(
            &parse("procedure p { if all(boy) { say atleastone(boy); } else { reject; } }")
                .unwrap(),
            &WorldConfig::standard(),
        )
        .unwrap();
        assert!(silent.warnings.is_empty());
        assert_eq!(silent.kernel, out.kernel);
    }

    #[test]
    fn empty_pick_lists_families() {
        let err = compile::<Rational>(
            &parse("procedure p { pick c where sex(c) = boy; say yes; }").unwrap(),
            &WorldConfig::new(1, 2).unwrap(),
        )
        .unwrap_err();
        match err {
            DslError::EmptyPick { families, .. } => {
                assert_eq!(families.len(), 1);
                assert_eq!(families[0].to_string(), "G@0,G@0");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn guarded_pick_is_fine() {
        let k = kernel(
            "procedure p { require exists(boy); pick c where sex(c) = boy; say claim(boy, day(c)); }",
            &WorldConfig::standard(),
        );
        let r = posterior(
            &k,
            &Statement::claim(Sex::Boy, Day::TUESDAY),
            &QueryPredicate::all(Some(Sex::Boy), None),
        )
        .unwrap();
        assert_eq!(r.posterior, ratio(1, 3));
    }

    #[test]
    fn gn_dn_statements_cover_everything() {
        let m = marginal(&kernel(GN_DN, &WorldConfig::standard())).unwrap();
        assert_eq!(m.statements.len(), 14);
        assert!(m.statements.values().all(|w| *w == ratio(1, 14)));
    }

    #[test]
    fn named_days_need_seven_day_week() {
        let ast = parse("procedure p { require exists(boy, tue); say claim(boy, tue); }").unwrap();
        let short = WorldConfig::new(3, 2).unwrap();
        assert!(matches!(
            compile::<Rational>(&ast, &short),
            Err(DslError::InvalidDay { .. })
        ));
        let ast = parse("procedure p { say claim(boy, d5); }").unwrap();
        assert!(matches!(
            compile::<Rational>(&ast, &short),
            Err(DslError::InvalidDay { .. })
        ));
    }

    #[test]
    fn count_comparisons() {
        let cfg = WorldConfig::standard();
        let count = |text: &str| crate::count_families(&cfg, &parse_event(text, &cfg).unwrap());
        assert_eq!(count("count(boy) = 1"), 98);
        assert_eq!(count("count(boy) != 1"), 98);
        assert_eq!(count("count(boy) >= 1"), 147);
        assert_eq!(count("count(boy) > 1"), 49);
        assert_eq!(count("count(boy) < 1"), 49);
        assert_eq!(count("count(boy) <= 1"), 147);
        assert_eq!(count("count(tue) >= 1"), 52);
        assert_eq!(count("sex(0) = boy and day(1) != tue"), 84);
    }

    #[test]
    fn event_and_statement_entry_points() {
        let cfg = WorldConfig::standard();
        assert_eq!(
            parse_statement("claim(boy,tue)", &cfg).unwrap(),
            Statement::claim(Sex::Boy, Day::TUESDAY)
        );
        assert_eq!(
            parse_statement("yes", &cfg).unwrap(),
            Statement::YesNo(true)
        );
        assert!(parse_statement("claim(sex(c))", &cfg).is_err());
        assert!(parse_statement("claim(boy, tue) extra", &cfg).is_err());
        assert_eq!(
            parse_event("not all(boy)", &cfg).unwrap(),
            !QueryPredicate::all(Some(Sex::Boy), None)
        );
        assert!(parse_event("sex(c) = boy", &cfg).is_err());
        assert!(parse_event("sex(2) = boy", &cfg).is_err());
    }

    #[test]
    fn render_round_trips_nesting() {
        let src = "procedure  nest{ if exists(girl)and(all(tue) or count(boy)>=1){flip 2/4{ if true { say \
                   text(\"hi \\\"there\\\"\"); } } else { pick k where not (sex(k)=girl and day(k)=d3); \
                   say claim(sex(k), day(k)); } } else { reject; } }";
        let ast = parse(src).unwrap();
        let text = render(&ast);
        assert!(text.contains("flip 1/2 {"));
        assert!(text.contains("exists(girl) and (all(tue) or count(boy) >= 1)"));
        assert_eq!(parse(&text).unwrap(), ast);
        assert_eq!(render(&parse(&text).unwrap()), text);
    }
}
