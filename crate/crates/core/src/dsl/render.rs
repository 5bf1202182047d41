use std::fmt::Write;

use super::ast::*;
use crate::engine::quote;
use crate::model::Day;

const INDENT: &str = "  ";

/// Canonical source text. Parsing the output yields an equal tree.
pub fn render(ast: &ProtocolAst) -> String {
    let mut out = format!("procedure {} {{\n", ast.name.node);
    render_block(&ast.body, 1, &mut out);
    out.push_str("}\n");
    out
}

fn render_block(block: &[Stmt], depth: usize, out: &mut String) {
    for stmt in block {
        render_stmt(stmt, depth, out);
    }
}

fn open_block(block: &[Stmt], depth: usize, out: &mut String) {
    out.push_str("{\n");
    render_block(block, depth + 1, out);
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn render_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    out.push_str(&pad);
    match &stmt.node {
        StmtKind::Require(p) => {
            let _ = writeln!(out, "require {};", render_pred(p));
        }
        StmtKind::If {
            cond,
            then,
            otherwise,
        } => {
            let _ = write!(out, "if {} ", render_pred(cond));
            open_block(then, depth, out);
            if let Some(other) = otherwise {
                out.push_str(" else ");
                open_block(other, depth, out);
            }
            out.push('\n');
        }
        StmtKind::Pick { var, filter } => {
            out.push_str("pick ");
            out.push_str(&var.node);
            if let Some(f) = filter {
                let _ = write!(out, " where {}", render_pred(f));
            }
            out.push_str(";\n");
        }
        StmtKind::Flip { prob, heads, tails } => {
            let _ = write!(out, "flip {} ", render_prob(prob));
            open_block(heads, depth, out);
            out.push_str(" else ");
            open_block(tails, depth, out);
            out.push('\n');
        }
        StmtKind::Say(e) => {
            let _ = writeln!(out, "say {};", render_say(e));
        }
        StmtKind::Reject => out.push_str("reject;\n"),
    }
}

fn render_prob(p: &num_rational::Ratio<u64>) -> String {
    if *p.denom() == 1 {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

pub(crate) fn render_day(d: DayLit) -> String {
    match d {
        DayLit::Named(i) => Day::NAMES[i as usize].to_string(),
        DayLit::Index(i) => format!("d{i}"),
    }
}

fn render_ref(r: &ChildRef) -> String {
    match r {
        ChildRef::Var(name) => name.clone(),
        ChildRef::Index(i) => i.to_string(),
    }
}

fn render_filter(f: &ChildFilter) -> String {
    let parts: Vec<String> = f
        .sex
        .map(|s| s.keyword().to_string())
        .into_iter()
        .chain(f.day.as_ref().map(|d| render_day(d.node)))
        .collect();
    format!("({})", parts.join(", "))
}

// or = 0, and = 1, unary/atom = 2
fn precedence(p: &Pred) -> u8 {
    match p {
        Pred::Or(..) => 0,
        Pred::And(..) => 1,
        _ => 2,
    }
}

/// Parenthesizes `p` when its precedence is below `min`.
fn render_at(p: &Pred, min: u8) -> String {
    let text = render_pred(p);
    if precedence(p) < min {
        format!("({text})")
    } else {
        text
    }
}

pub fn render_pred(p: &Pred) -> String {
    match p {
        Pred::Const(b) => b.to_string(),
        Pred::Exists(f) => format!("exists{}", render_filter(f)),
        Pred::All(f) => format!("all{}", render_filter(f)),
        Pred::Count(f, op, k) => format!("count{} {} {k}", render_filter(f), op.symbol()),
        Pred::SexOf(r, s) => format!("sex({}) = {}", render_ref(&r.node), s.keyword()),
        Pred::DayOf(r, d) => format!("day({}) = {}", render_ref(&r.node), render_day(d.node)),
        // left-associative: a right operand of the same operator needs parens
        Pred::Or(a, b) => format!("{} or {}", render_at(a, 0), render_at(b, 1)),
        Pred::And(a, b) => format!("{} and {}", render_at(a, 1), render_at(b, 2)),
        Pred::Not(a) => format!("not {}", render_at(a, 2)),
    }
}

pub fn render_say(e: &SayExpr) -> String {
    match e {
        SayExpr::Claim { sex, day } => {
            let sex = match sex {
                SexArg::Lit(s) => s.keyword().to_string(),
                SexArg::Of(r) => format!("sex({})", render_ref(&r.node)),
            };
            match day {
                None => format!("claim({sex})"),
                Some(DayArg::Lit(d)) => format!("claim({sex}, {})", render_day(d.node)),
                Some(DayArg::Of(r)) => format!("claim({sex}, day({}))", render_ref(&r.node)),
            }
        }
        SayExpr::AtLeastOne(s) => format!("atleastone({})", s.keyword()),
        SayExpr::TwoOfAKind(s) => format!("twoofakind({})", s.keyword()),
        SayExpr::ProudOf(s) => format!("proudof({})", s.keyword()),
        SayExpr::Yes => "yes".into(),
        SayExpr::No => "no".into(),
        SayExpr::Text(t) => format!("text({})", quote(t)),
    }
}
