//! Procedures as statement-emission kernels, and Bayesian conditioning on
//! what the procedure said.
//!
//! A kernel assigns each family in its support a sub-probability
//! distribution over statements; whatever mass is missing from a row is
//! the probability that the run ends in a reject. An optional pre-filter
//! sends non-qualifying families home before they speak, which is exact
//! renormalization of the prior.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{
    restrict_prior, uniform_prior, Day, Family, ModelError, PriorDistribution, QueryPredicate, Sex,
    WorldConfig,
};
use crate::Weight;

/// Something a parent may say. Compared structurally, never by prose.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    /// "I have a son" / "I have a son born on a Tuesday".
    Claim {
        sex: Sex,
        day: Option<Day>,
    },
    /// "At least one of them is a boy".
    AtLeastOne(Sex),
    /// "I have two boys".
    TwoOfAKind(Sex),
    /// "I am the proud father of a girl".
    ProudOf(Sex),
    YesNo(bool),
    Text(String),
}

impl Statement {
    pub fn claim(sex: Sex, day: Day) -> Self {
        Statement::Claim {
            sex,
            day: Some(day),
        }
    }

    pub fn day(&self) -> Option<Day> {
        match self {
            Statement::Claim { day, .. } => *day,
            _ => None,
        }
    }

    /// Renders in the protocol language's statement syntax.
    pub fn render(&self, cfg: &WorldConfig) -> String {
        self.render_with(|d| d.label(cfg))
    }

    fn render_with(&self, label: impl Fn(Day) -> String) -> String {
        match self {
            Statement::Claim { sex, day: None } => format!("claim({})", sex.keyword()),
            Statement::Claim { sex, day: Some(d) } => {
                format!("claim({}, {})", sex.keyword(), label(*d))
            }
            Statement::AtLeastOne(s) => format!("atleastone({})", s.keyword()),
            Statement::TwoOfAKind(s) => format!("twoofakind({})", s.keyword()),
            Statement::ProudOf(s) => format!("proudof({})", s.keyword()),
            Statement::YesNo(true) => "yes".to_string(),
            Statement::YesNo(false) => "no".to_string(),
            Statement::Text(label) => format!("text({})", quote(label)),
        }
    }
}

/// Statement syntax with days written as `d<index>`.
impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|d| format!("d{}", d.0)))
    }
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationRule {
    NegativeWeight,
    RowExceedsOne,
    MissingRow,
    FamilyOutsideConfig,
    RowOutsideSupport,
    StatementDayOutOfRange,
    InvalidPreFilter(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub family: Option<Family>,
    pub rule: ViolationRule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Some(family) => write!(f, "{family}: {:?}", self.rule),
            None => write!(f, "{:?}", self.rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("statement {0} is never emitted; the conditional probability is undefined")]
    ZeroStatementMass(Statement),
    #[error("no family passes the pre-filter")]
    EmptySupport,
    #[error("kernel violates {} invariant(s); first: {}", .0.len(), .0[0])]
    InvalidKernel(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A procedure, lowered to per-family statement distributions.
#[derive(Debug, Clone)]
pub struct ProtocolKernel<W> {
    config: WorldConfig,
    pre_filter: Option<QueryPredicate>,
    rows: BTreeMap<Family, Vec<(Statement, W)>>,
}

impl<W: Weight> ProtocolKernel<W> {
    /// Assembles a kernel without checking it; see [`validate_kernel`].
    pub fn new(
        config: WorldConfig,
        pre_filter: Option<QueryPredicate>,
        rows: BTreeMap<Family, Vec<(Statement, W)>>,
    ) -> Self {
        ProtocolKernel {
            config,
            pre_filter,
            rows,
        }
    }

    /// Builds one row per family passing the pre-filter.
    pub fn from_fn<F>(config: WorldConfig, pre_filter: Option<QueryPredicate>, mut row: F) -> Self
    where
        F: FnMut(&Family) -> Vec<(Statement, W)>,
    {
        let rows = crate::model::enumerate_families(&config)
            .into_iter()
            .filter(|f| pre_filter.as_ref().is_none_or(|q| q.eval(f)))
            .map(|f| {
                let r = merge_row(row(&f));
                (f, r)
            })
            .collect();
        ProtocolKernel {
            config,
            pre_filter,
            rows,
        }
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn pre_filter(&self) -> Option<&QueryPredicate> {
        self.pre_filter.as_ref()
    }

    pub fn rows(&self) -> &BTreeMap<Family, Vec<(Statement, W)>> {
        &self.rows
    }

    pub fn row(&self, family: &Family) -> Option<&[(Statement, W)]> {
        self.rows.get(family).map(Vec::as_slice)
    }

    /// Probability that `family` emits `s`.
    pub fn emission(&self, family: &Family, s: &Statement) -> W {
        self.rows.get(family).map_or_else(W::zero, |row| {
            row.iter()
                .filter(|(t, _)| t == s)
                .fold(W::zero(), |acc, (_, w)| acc + w.clone())
        })
    }

    /// Rows with duplicate statements merged and zero entries dropped.
    pub fn canonical_rows(&self) -> BTreeMap<Family, BTreeMap<Statement, W>> {
        self.rows
            .iter()
            .map(|(f, row)| (f.clone(), merge_row(row.clone()).into_iter().collect()))
            .collect()
    }

    /// Uniform prior, renormalized by the pre-filter.
    pub fn prior(&self) -> Result<PriorDistribution<W>, EngineError> {
        let prior = uniform_prior(&self.config);
        match &self.pre_filter {
            None => Ok(prior),
            Some(q) => restrict_prior(&prior, q).map_err(|e| match e {
                ModelError::EmptySupport => EngineError::EmptySupport,
                other => EngineError::Model(other),
            }),
        }
    }

    fn checked_prior(&self) -> Result<PriorDistribution<W>, EngineError> {
        let violations = validate_kernel(self);
        if !violations.is_empty() {
            return Err(EngineError::InvalidKernel(violations));
        }
        self.prior()
    }
}

impl<W: Weight> PartialEq for ProtocolKernel<W> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.pre_filter == other.pre_filter
            && self.canonical_rows() == other.canonical_rows()
    }
}

fn merge_row<W: Weight>(row: Vec<(Statement, W)>) -> Vec<(Statement, W)> {
    let mut merged: BTreeMap<Statement, W> = BTreeMap::new();
    for (s, w) in row {
        let slot = merged.entry(s).or_insert_with(W::zero);
        *slot = slot.clone() + w;
    }
    merged.into_iter().filter(|(_, w)| !w.is_zero()).collect()
}

/// Lists every broken kernel invariant. Empty means the kernel is sound.
pub fn validate_kernel<W: Weight>(k: &ProtocolKernel<W>) -> Vec<Violation> {
    let mut out = Vec::new();
    let cfg = &k.config;
    if let Some(q) = &k.pre_filter {
        if let Err(e) = q.validate(cfg) {
            out.push(Violation {
                family: None,
                rule: ViolationRule::InvalidPreFilter(e.to_string()),
            });
        }
    }
    let in_support = |f: &Family| k.pre_filter.as_ref().is_none_or(|q| q.eval(f));
    for (family, row) in &k.rows {
        let mut push = |rule| {
            out.push(Violation {
                family: Some(family.clone()),
                rule,
            })
        };
        if !family.fits(cfg) {
            push(ViolationRule::FamilyOutsideConfig);
            continue;
        }
        if !in_support(family) {
            push(ViolationRule::RowOutsideSupport);
        }
        if row.iter().any(|(_, w)| *w < W::zero()) {
            push(ViolationRule::NegativeWeight);
        }
        if row
            .iter()
            .any(|(s, _)| s.day().is_some_and(|d| d.0 >= cfg.week_length()))
        {
            push(ViolationRule::StatementDayOutOfRange);
        }
        let total = row.iter().fold(W::zero(), |acc, (_, w)| acc + w.clone());
        if total > W::one() {
            push(ViolationRule::RowExceedsOne);
        }
    }
    for family in crate::model::enumerate_families(cfg) {
        if in_support(&family) && !k.rows.contains_key(&family) {
            out.push(Violation {
                family: Some(family),
                rule: ViolationRule::MissingRow,
            });
        }
    }
    out
}

/// Prior-weighted probability that the procedure emits `s`.
pub fn statement_mass<W: Weight>(k: &ProtocolKernel<W>, s: &Statement) -> Result<W, EngineError> {
    let prior = k.checked_prior()?;
    Ok(prior
        .support()
        .fold(W::zero(), |acc, (f, p)| acc + p.clone() * k.emission(f, s)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow<W> {
    pub family: Family,
    pub prior: W,
    pub emission: W,
    pub event: bool,
}

/// Exact answer to "given that `statement` was said, how likely is the event".
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorReport<W> {
    pub statement: Statement,
    pub query: QueryPredicate,
    pub statement_mass: W,
    pub joint_mass: W,
    pub posterior: W,
    /// Families that emit the statement with nonzero probability.
    pub case_table: Vec<CaseRow<W>>,
}

pub fn posterior<W: Weight>(
    k: &ProtocolKernel<W>,
    s: &Statement,
    q: &QueryPredicate,
) -> Result<PosteriorReport<W>, EngineError> {
    q.validate(&k.config)?;
    let prior = k.checked_prior()?;
    let mut statement_mass = W::zero();
    let mut joint_mass = W::zero();
    let mut case_table = Vec::new();
    for (family, p) in prior.support() {
        let emission = k.emission(family, s);
        if emission.is_zero() {
            continue;
        }
        let event = q.eval(family);
        let mass = p.clone() * emission.clone();
        statement_mass = statement_mass + mass.clone();
        if event {
            joint_mass = joint_mass + mass;
        }
        case_table.push(CaseRow {
            family: family.clone(),
            prior: p.clone(),
            emission,
            event,
        });
    }
    if statement_mass <= W::zero() {
        return Err(EngineError::ZeroStatementMass(s.clone()));
    }
    Ok(PosteriorReport {
        statement: s.clone(),
        query: q.clone(),
        posterior: joint_mass.clone() / statement_mass.clone(),
        statement_mass,
        joint_mass,
        case_table,
    })
}

/// Distribution over everything the procedure can emit, reject included.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal<W> {
    pub statements: BTreeMap<Statement, W>,
    pub reject: W,
}

impl<W: Weight> Marginal<W> {
    pub fn total(&self) -> W {
        self.statements
            .values()
            .fold(self.reject.clone(), |acc, w| acc + w.clone())
    }
}

pub fn marginal<W: Weight>(k: &ProtocolKernel<W>) -> Result<Marginal<W>, EngineError> {
    let prior = k.checked_prior()?;
    let mut statements: BTreeMap<Statement, W> = BTreeMap::new();
    let mut reject = W::zero();
    for (family, p) in prior.support() {
        let mut emitted = W::zero();
        for (s, w) in k.row(family).unwrap_or(&[]) {
            let mass = p.clone() * w.clone();
            let slot = statements.entry(s.clone()).or_insert_with(W::zero);
            *slot = slot.clone() + mass;
            emitted = emitted + w.clone();
        }
        reject = reject + p.clone() * (W::one() - emitted);
    }
    statements.retain(|_, w| !w.is_zero());
    Ok(Marginal { statements, reject })
}
