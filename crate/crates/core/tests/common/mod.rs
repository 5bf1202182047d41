//! Random kernels and events shared by the property tests and the
//! acceptance harness.

#![allow(dead_code)]

use ambiprob::{
    enumerate_families, ratio, Day, ExactKernel, Family, QueryPredicate, Rational, Sex, Statement,
    WorldConfig,
};
use proptest::prelude::*;

pub const WEEKS: [u32; 3] = [1, 2, 7];

/// Statements a random kernel can emit.
pub fn statement_pool() -> Vec<Statement> {
    vec![
        Statement::claim(Sex::Boy, Day(0)),
        Statement::Claim {
            sex: Sex::Girl,
            day: None,
        },
        Statement::AtLeastOne(Sex::Boy),
        Statement::YesNo(true),
    ]
}

#[derive(Debug, Clone)]
pub struct KernelCase {
    pub kernel: ExactKernel,
    pub query: QueryPredicate,
    pub statement: Statement,
    /// In `(0, 1]`.
    pub scale: Rational,
}

fn sex() -> impl Strategy<Value = Option<Sex>> {
    prop_oneof![Just(None), Just(Some(Sex::Boy)), Just(Some(Sex::Girl))]
}

/// Day indices are reduced modulo the week length once it is known.
fn raw_query() -> impl Strategy<Value = QueryPredicate> {
    let day = proptest::option::of((0..7u32).prop_map(Day));
    let leaf = prop_oneof![
        any::<bool>().prop_map(QueryPredicate::Const),
        (0..2usize, prop_oneof![Just(Sex::Boy), Just(Sex::Girl)])
            .prop_map(|(i, s)| QueryPredicate::ChildSexIs(i, s)),
        (0..2usize, 0..7u32).prop_map(|(i, d)| QueryPredicate::ChildDayIs(i, Day(d))),
        (sex(), day.clone()).prop_map(|(s, d)| QueryPredicate::exists(s, d)),
        (sex(), day.clone()).prop_map(|(s, d)| QueryPredicate::all(s, d)),
        (0..4usize, sex(), day).prop_map(|(k, s, d)| QueryPredicate::count_at_least(k, s, d)),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.prop_map(|a| !a),
        ]
    })
}

pub fn fit_days(q: QueryPredicate, d: u32) -> QueryPredicate {
    use QueryPredicate::*;
    let fit = |day: Option<Day>| day.map(|x| Day(x.0 % d));
    match q {
        ChildDayIs(i, day) => ChildDayIs(i, Day(day.0 % d)),
        Exists { sex, day } => Exists { sex, day: fit(day) },
        AllMatch { sex, day } => AllMatch { sex, day: fit(day) },
        CountAtLeast { k, sex, day } => CountAtLeast {
            k,
            sex,
            day: fit(day),
        },
        And(a, b) => And(Box::new(fit_days(*a, d)), Box::new(fit_days(*b, d))),
        Or(a, b) => Or(Box::new(fit_days(*a, d)), Box::new(fit_days(*b, d))),
        Not(a) => Not(Box::new(fit_days(*a, d))),
        other => other,
    }
}

/// One row: integer weights for each pool statement plus a reject weight,
/// normalized so the row sums to at most one.
fn row(weights: &[u8]) -> Vec<(Statement, Rational)> {
    let total: i64 = weights.iter().map(|&w| i64::from(w)).sum();
    if total == 0 {
        return Vec::new();
    }
    statement_pool()
        .into_iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0)
        .map(|(s, &w)| (s, ratio(i64::from(w), total)))
        .collect()
}

pub fn kernel_case() -> impl Strategy<Value = KernelCase> {
    let pool = statement_pool().len();
    (
        0..WEEKS.len(),
        proptest::option::of(raw_query()),
        proptest::collection::vec(proptest::collection::vec(0u8..4, pool + 1), 196),
        raw_query(),
        0..pool,
        (1..=6i64).prop_flat_map(|den| (1..=den).prop_map(move |num| ratio(num, den))),
    )
        .prop_map(|(w, pre, rows, query, s, scale)| {
            let d = WEEKS[w];
            let cfg = WorldConfig::new(d, 2).unwrap();
            let pre = pre.map(|q| fit_days(q, d));
            let rows = enumerate_families(&cfg)
                .into_iter()
                .filter(|f| pre.as_ref().is_none_or(|q| q.eval(f)))
                .zip(rows.iter().cycle())
                .map(|(f, r)| (f, row(r)))
                .collect();
            KernelCase {
                kernel: ExactKernel::new(cfg, pre, rows),
                query: fit_days(query, d),
                statement: statement_pool()[s].clone(),
                scale,
            }
        })
}

/// The same kernel with every weight on `s` multiplied by `c`.
pub fn scale_statement(k: &ExactKernel, s: &Statement, c: &Rational) -> ExactKernel {
    let rows = k
        .rows()
        .iter()
        .map(|(f, row): (&Family, _)| {
            let row = row
                .iter()
                .map(|(t, w): &(Statement, Rational)| {
                    (t.clone(), if t == s { w * c } else { w.clone() })
                })
                .collect();
            (f.clone(), row)
        })
        .collect();
    ExactKernel::new(*k.config(), k.pre_filter().cloned(), rows)
}

/// Which law a case broke, if any.
pub fn check_laws(case: &KernelCase) -> Result<(), String> {
    use ambiprob::{marginal, posterior, restrict_prior, uniform_prior, EngineError};
    let KernelCase {
        kernel,
        query,
        statement,
        scale,
    } = case;
    let one = Rational::from_integer(1.into());

    let prior = match kernel.prior() {
        Ok(p) => p,
        Err(EngineError::EmptySupport) => return Ok(()),
        Err(e) => return Err(format!("prior: {e}")),
    };

    let m = marginal(kernel).map_err(|e| format!("marginal: {e}"))?;
    if m.total() != one {
        return Err(format!("marginal masses plus reject = {}", m.total()));
    }

    let yes = posterior(kernel, statement, query);
    let no = posterior(kernel, statement, &!query.clone());
    let scaled = posterior(&scale_statement(kernel, statement, scale), statement, query);
    match (yes, no, scaled) {
        (Ok(a), Ok(b), Ok(c)) => {
            if a.posterior.clone() + b.posterior != one {
                return Err("posterior(q) + posterior(not q) != 1".into());
            }
            if c.posterior != a.posterior {
                return Err(format!("scaling by {scale} moved the posterior"));
            }
        }
        (Err(EngineError::ZeroStatementMass(_)), Err(_), Err(_)) => {}
        other => return Err(format!("inconsistent outcomes: {other:?}")),
    }

    for base in [prior, uniform_prior(kernel.config())] {
        if let Ok(once) = restrict_prior(&base, query) {
            if restrict_prior(&once, query).as_ref() != Ok(&once) {
                return Err("restrict_prior is not idempotent".into());
            }
        }
    }
    Ok(())
}
