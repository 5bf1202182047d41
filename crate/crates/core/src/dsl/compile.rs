//! Exact lowering of a program to a kernel: every flip and pick branch is
//! expanded and path weights are multiplied, so no sampling is involved.

use std::collections::BTreeMap;

use super::lower::{Op, Program};
use super::{Diagnostic, DslError, SourceSpan};
use crate::engine::{ProtocolKernel, Statement};
use crate::model::{enumerate_families, Family};
use crate::Weight;

#[derive(Debug, Clone)]
pub struct Compiled<W> {
    pub kernel: ProtocolKernel<W>,
    pub warnings: Vec<Diagnostic>,
}

/// Remaining work after a nested block finishes.
struct Frame<'p, 'f> {
    ops: &'p [Op],
    depth: usize,
    next: Option<&'f Frame<'p, 'f>>,
}

struct Expander<'a, W> {
    family: &'a Family,
    row: BTreeMap<Statement, W>,
    fell_through: bool,
    empty_pick: Option<SourceSpan>,
}

impl<W: Weight> Expander<'_, W> {
    fn run(&mut self, ops: &[Op], mut env: Vec<usize>, cont: Option<&Frame<'_, '_>>, weight: W) {
        let Some((op, rest)) = ops.split_first() else {
            match cont {
                Some(frame) => {
                    env.truncate(frame.depth);
                    self.run(frame.ops, env, frame.next, weight);
                }
                None => self.fell_through = true,
            }
            return;
        };
        match op {
            Op::If(cond, then, otherwise) => {
                let branch = if cond.eval(self.family, &env) {
                    then
                } else {
                    otherwise
                };
                let frame = Frame {
                    ops: rest,
                    depth: env.len(),
                    next: cont,
                };
                self.run(branch, env, Some(&frame), weight);
            }
            Op::Pick { filter, span } => {
                let matches: Vec<usize> = (0..self.family.len())
                    .filter(|&i| {
                        filter.as_ref().is_none_or(|f| {
                            let mut probe = env.clone();
                            probe.push(i);
                            f.eval(self.family, &probe)
                        })
                    })
                    .collect();
                if matches.is_empty() {
                    self.empty_pick.get_or_insert(*span);
                    return;
                }
                let share = weight / W::from_usize(matches.len()).expect("child count");
                for i in matches {
                    let mut next = env.clone();
                    next.push(i);
                    self.run(rest, next, cont, share.clone());
                }
            }
            Op::Flip {
                numer,
                denom,
                heads,
                tails,
            } => {
                let frame = Frame {
                    ops: rest,
                    depth: env.len(),
                    next: cont,
                };
                let p = W::from_ratio(*numer, *denom);
                if *numer > 0 {
                    self.run(heads, env.clone(), Some(&frame), weight.clone() * p.clone());
                }
                if numer < denom {
                    self.run(tails, env, Some(&frame), weight * (W::one() - p));
                }
            }
            Op::Say(say) => {
                let slot = self
                    .row
                    .entry(say.statement(self.family, &env))
                    .or_insert_with(W::zero);
                *slot = slot.clone() + weight;
            }
            Op::Reject => {}
        }
    }
}

pub(crate) fn compile_program<W: Weight>(program: &Program) -> Result<Compiled<W>, DslError> {
    let cfg = program.config;
    let mut rows = BTreeMap::new();
    let mut fell_through = 0usize;
    let mut empty: Option<(SourceSpan, Vec<Family>)> = None;
    for family in enumerate_families(&cfg) {
        if !program.pre_filter.as_ref().is_none_or(|q| q.eval(&family)) {
            continue;
        }
        let mut ex = Expander {
            family: &family,
            row: BTreeMap::new(),
            fell_through: false,
            empty_pick: None,
        };
        ex.run(&program.body, Vec::new(), None, W::one());
        if let Some(span) = ex.empty_pick {
            empty
                .get_or_insert_with(|| (span, Vec::new()))
                .1
                .push(family.clone());
        }
        fell_through += usize::from(ex.fell_through);
        let row = ex.row.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        rows.insert(family, row);
    }
    if let Some((span, families)) = empty {
        return Err(DslError::EmptyPick { span, families });
    }
    let mut warnings = Vec::new();
    if fell_through > 0 {
        warnings.push(Diagnostic {
            span: program.span,
            message: format!(
                "procedure `{}` can end without say or reject ({fell_through} famil{}); \
                 treating as reject",
                program.name,
                if fell_through == 1 { "y" } else { "ies" }
            ),
        });
    }
    Ok(Compiled {
        kernel: ProtocolKernel::new(cfg, program.pre_filter.clone(), rows),
        warnings,
    })
}
