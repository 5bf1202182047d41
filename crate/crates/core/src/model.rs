//! Outcome space, uniform prior, and the event language.
//!
//! A family is an ordered tuple of children, each a (sex, birth day) pair.
//! Every family is equally likely a priori; there are no twins and birth
//! order matters.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use thiserror::Error;

use crate::Weight;

/// Upper bound on `(2d)^n`; enumeration is materialized in memory.
pub const MAX_OUTCOMES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("no family in the support satisfies the predicate")]
    EmptySupport,
    #[error("predicate does not fit the world config: {0}")]
    InvalidPredicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sex {
    Boy,
    Girl,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::Boy, Sex::Girl];

    pub fn other(self) -> Sex {
        match self {
            Sex::Boy => Sex::Girl,
            Sex::Girl => Sex::Boy,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Sex::Boy => 'B',
            Sex::Girl => 'G',
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sex::Boy => "boy",
            Sex::Girl => "girl",
        }
    }
}

/// Birth day as an index into the week, `0..week_length`.
///
/// With a seven-day week, 0 is Monday and 6 is Sunday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day(pub u32);

impl Day {
    pub const MONDAY: Day = Day(0);
    pub const TUESDAY: Day = Day(1);

    pub const NAMES: [&'static str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

    pub fn index(self) -> u32 {
        self.0
    }

    /// Parses `mon`..`sun` (seven-day weeks only) or `d<index>`.
    pub fn parse(text: &str, cfg: &WorldConfig) -> Option<Day> {
        let day = if let Some(pos) = Day::NAMES.iter().position(|n| *n == text) {
            if cfg.week_length() != 7 {
                return None;
            }
            Day(pos as u32)
        } else {
            let digits = text.strip_prefix('d')?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            Day(digits.parse().ok()?)
        };
        (day.0 < cfg.week_length()).then_some(day)
    }

    /// Weekday name for seven-day weeks, `d<index>` otherwise.
    pub fn label(self, cfg: &WorldConfig) -> String {
        if cfg.week_length() == 7 && self.0 < 7 {
            Day::NAMES[self.0 as usize].to_string()
        } else {
            format!("d{}", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WorldConfig {
    week_length: u32,
    family_size: usize,
}

impl WorldConfig {
    pub fn new(week_length: u32, family_size: usize) -> Result<Self, ModelError> {
        if week_length == 0 {
            return Err(ModelError::InvalidConfig(
                "week length must be at least 1".into(),
            ));
        }
        if family_size == 0 {
            return Err(ModelError::InvalidConfig(
                "family size must be at least 1".into(),
            ));
        }
        let per_child = 2 * week_length as usize;
        match u32::try_from(family_size)
            .ok()
            .and_then(|n| per_child.checked_pow(n))
        {
            Some(total) if total <= MAX_OUTCOMES => Ok(WorldConfig {
                week_length,
                family_size,
            }),
            _ => Err(ModelError::InvalidConfig(format!(
                "outcome space (2*{week_length})^{family_size} exceeds {MAX_OUTCOMES} families"
            ))),
        }
    }

    /// Seven-day week, two children.
    pub fn standard() -> Self {
        WorldConfig {
            week_length: 7,
            family_size: 2,
        }
    }

    pub fn week_length(&self) -> u32 {
        self.week_length
    }

    pub fn family_size(&self) -> usize {
        self.family_size
    }

    /// `(2d)^n`, the number of equally likely families.
    pub fn outcome_count(&self) -> usize {
        (2 * self.week_length as usize).pow(self.family_size as u32)
    }

    pub fn days(&self) -> impl Iterator<Item = Day> {
        (0..self.week_length).map(Day)
    }

    pub fn check_day(&self, day: Day) -> Result<(), ModelError> {
        if day.0 < self.week_length {
            Ok(())
        } else {
            Err(ModelError::InvalidPredicate(format!(
                "day {} outside a {}-day week",
                day.0, self.week_length
            )))
        }
    }
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Child {
    pub sex: Sex,
    pub day: Day,
}

impl Child {
    pub fn new(sex: Sex, day: Day) -> Self {
        Child { sex, day }
    }

    fn matches(&self, sex: Option<Sex>, day: Option<Day>) -> bool {
        sex.is_none_or(|s| s == self.sex) && day.is_none_or(|d| d == self.day)
    }
}

impl fmt::Display for Child {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.sex.letter(), self.day.0)
    }
}

/// Children in birth order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Family(Vec<Child>);

impl Family {
    pub fn new(children: Vec<Child>) -> Self {
        Family(children)
    }

    pub fn children(&self) -> &[Child] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_sex(&self, sex: Sex) -> usize {
        self.0.iter().filter(|c| c.sex == sex).count()
    }

    pub fn fits(&self, cfg: &WorldConfig) -> bool {
        self.0.len() == cfg.family_size() && self.0.iter().all(|c| c.day.0 < cfg.week_length())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, child) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{child}")?;
        }
        Ok(())
    }
}

/// Family-level event.
///
/// `sex`/`day` filters set to `None` match any child.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryPredicate {
    Const(bool),
    ChildSexIs(usize, Sex),
    ChildDayIs(usize, Day),
    /// At least one child matches.
    Exists {
        sex: Option<Sex>,
        day: Option<Day>,
    },
    CountAtLeast {
        k: usize,
        sex: Option<Sex>,
        day: Option<Day>,
    },
    /// Every child matches.
    AllMatch {
        sex: Option<Sex>,
        day: Option<Day>,
    },
    And(Box<QueryPredicate>, Box<QueryPredicate>),
    Or(Box<QueryPredicate>, Box<QueryPredicate>),
    Not(Box<QueryPredicate>),
}

impl QueryPredicate {
    pub fn exists(sex: Option<Sex>, day: Option<Day>) -> Self {
        QueryPredicate::Exists { sex, day }
    }

    pub fn all(sex: Option<Sex>, day: Option<Day>) -> Self {
        QueryPredicate::AllMatch { sex, day }
    }

    pub fn count_at_least(k: usize, sex: Option<Sex>, day: Option<Day>) -> Self {
        QueryPredicate::CountAtLeast { k, sex, day }
    }

    pub fn and(self, other: QueryPredicate) -> Self {
        QueryPredicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: QueryPredicate) -> Self {
        QueryPredicate::Or(Box::new(self), Box::new(other))
    }

    pub fn eval(&self, family: &Family) -> bool {
        use QueryPredicate::*;
        let kids = family.children();
        match self {
            Const(b) => *b,
            ChildSexIs(i, sex) => kids.get(*i).is_some_and(|c| c.sex == *sex),
            ChildDayIs(i, day) => kids.get(*i).is_some_and(|c| c.day == *day),
            Exists { sex, day } => kids.iter().any(|c| c.matches(*sex, *day)),
            CountAtLeast { k, sex, day } => {
                kids.iter().filter(|c| c.matches(*sex, *day)).count() >= *k
            }
            AllMatch { sex, day } => kids.iter().all(|c| c.matches(*sex, *day)),
            And(a, b) => a.eval(family) && b.eval(family),
            Or(a, b) => a.eval(family) || b.eval(family),
            Not(a) => !a.eval(family),
        }
    }

    /// Checks child indices and day literals against the config.
    pub fn validate(&self, cfg: &WorldConfig) -> Result<(), ModelError> {
        use QueryPredicate::*;
        let check_opt = |day: &Option<Day>| day.map_or(Ok(()), |d| cfg.check_day(d));
        let check_index = |i: usize| {
            if i < cfg.family_size() {
                Ok(())
            } else {
                Err(ModelError::InvalidPredicate(format!(
                    "child index {i} but families have {} children",
                    cfg.family_size()
                )))
            }
        };
        match self {
            Const(_) => Ok(()),
            ChildSexIs(i, _) => check_index(*i),
            ChildDayIs(i, d) => check_index(*i).and_then(|_| cfg.check_day(*d)),
            Exists { day, .. } | CountAtLeast { day, .. } | AllMatch { day, .. } => check_opt(day),
            And(a, b) | Or(a, b) => a.validate(cfg).and_then(|_| b.validate(cfg)),
            Not(a) => a.validate(cfg),
        }
    }
}

impl QueryPredicate {
    /// Event syntax accepted by [`crate::dsl::parse_event`].
    pub fn render(&self, cfg: &WorldConfig) -> String {
        self.render_at(cfg, 0)
    }

    // 0: or, 1: and, 2: operand of not
    fn render_at(&self, cfg: &WorldConfig, prec: u8) -> String {
        use QueryPredicate::*;
        let filter = |sex: &Option<Sex>, day: &Option<Day>| {
            let parts: Vec<String> = sex
                .map(|s| s.keyword().to_string())
                .into_iter()
                .chain(day.map(|d| d.label(cfg)))
                .collect();
            parts.join(", ")
        };
        let wrap = |text: String, own: u8| {
            if own < prec {
                format!("({text})")
            } else {
                text
            }
        };
        match self {
            Const(b) => b.to_string(),
            ChildSexIs(i, s) => format!("sex({i}) = {}", s.keyword()),
            ChildDayIs(i, d) => format!("day({i}) = {}", d.label(cfg)),
            Exists {
                sex: None,
                day: None,
            }
            | AllMatch {
                sex: None,
                day: None,
            } => "true".into(),
            CountAtLeast {
                k,
                sex: None,
                day: None,
            } => (*k <= cfg.family_size()).to_string(),
            Exists { sex, day } => format!("exists({})", filter(sex, day)),
            AllMatch { sex, day } => format!("all({})", filter(sex, day)),
            CountAtLeast { k, sex, day } => format!("count({}) >= {k}", filter(sex, day)),
            And(a, b) => wrap(
                format!("{} and {}", a.render_at(cfg, 1), b.render_at(cfg, 2)),
                1,
            ),
            Or(a, b) => wrap(
                format!("{} or {}", a.render_at(cfg, 0), b.render_at(cfg, 1)),
                0,
            ),
            Not(a) => format!("not {}", a.render_at(cfg, 2)),
        }
    }
}

impl Not for QueryPredicate {
    type Output = QueryPredicate;

    fn not(self) -> QueryPredicate {
        QueryPredicate::Not(Box::new(self))
    }
}

pub fn eval_query(q: &QueryPredicate, family: &Family) -> bool {
    q.eval(family)
}

/// All `(2d)^n` families, lexicographic by (child index, sex, day).
pub fn enumerate_families(cfg: &WorldConfig) -> Vec<Family> {
    let per_child: Vec<Child> = Sex::ALL
        .iter()
        .flat_map(|&sex| cfg.days().map(move |day| Child::new(sex, day)))
        .collect();
    let mut out = Vec::with_capacity(cfg.outcome_count());
    let mut digits = vec![0usize; cfg.family_size()];
    loop {
        out.push(Family(digits.iter().map(|&i| per_child[i]).collect()));
        // odometer, last child fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < per_child.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

pub fn count_families(cfg: &WorldConfig, q: &QueryPredicate) -> usize {
    enumerate_families(cfg).iter().filter(|f| q.eval(f)).count()
}

/// Weights over every family of a config. Families outside the support
/// carry an explicit zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorDistribution<W> {
    config: WorldConfig,
    weights: BTreeMap<Family, W>,
}

impl<W: Weight> PriorDistribution<W> {
    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn weight(&self, family: &Family) -> W {
        self.weights.get(family).cloned().unwrap_or_else(W::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Family, &W)> {
        self.weights.iter()
    }

    /// Families with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (&Family, &W)> {
        self.weights.iter().filter(|(_, w)| **w > W::zero())
    }

    pub fn total(&self) -> W {
        self.weights
            .values()
            .fold(W::zero(), |acc, w| acc + w.clone())
    }
}

pub fn uniform_prior<W: Weight>(cfg: &WorldConfig) -> PriorDistribution<W> {
    let families = enumerate_families(cfg);
    let each = W::one() / W::from_usize(families.len()).expect("outcome count representable");
    PriorDistribution {
        config: *cfg,
        weights: families.into_iter().map(|f| (f, each.clone())).collect(),
    }
}

/// Conditions the prior on `q` by zeroing the rest and renormalizing.
pub fn restrict_prior<W: Weight>(
    prior: &PriorDistribution<W>,
    q: &QueryPredicate,
) -> Result<PriorDistribution<W>, ModelError> {
    let kept = prior
        .weights
        .iter()
        .filter(|(f, _)| q.eval(f))
        .fold(W::zero(), |acc, (_, w)| acc + w.clone());
    if kept <= W::zero() {
        return Err(ModelError::EmptySupport);
    }
    let weights = prior
        .weights
        .iter()
        .map(|(f, w)| {
            let w = if q.eval(f) {
                w.clone() / kept.clone()
            } else {
                W::zero()
            };
            (f.clone(), w)
        })
        .collect();
    Ok(PriorDistribution {
        config: prior.config,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ratio, Rational};

    fn fam(kids: &[(Sex, u32)]) -> Family {
        Family::new(kids.iter().map(|&(s, d)| Child::new(s, Day(d))).collect())
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(
            enumerate_families(&WorldConfig::new(7, 2).unwrap()).len(),
            196
        );
        assert_eq!(
            enumerate_families(&WorldConfig::new(1, 1).unwrap()).len(),
            2
        );
        assert_eq!(
            enumerate_families(&WorldConfig::new(7, 1).unwrap()).len(),
            14
        );
        assert_eq!(
            enumerate_families(&WorldConfig::new(3, 3).unwrap()).len(),
            216
        );
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let families = enumerate_families(&WorldConfig::new(3, 2).unwrap());
        assert!(families.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(families[0].to_string(), "B@0,B@0");
        assert_eq!(families[1].to_string(), "B@0,B@1");
        assert_eq!(families.last().unwrap().to_string(), "G@2,G@2");
    }

    #[test]
    fn config_rejects_degenerate_and_huge() {
        assert!(WorldConfig::new(0, 2).is_err());
        assert!(WorldConfig::new(7, 0).is_err());
        assert!(WorldConfig::new(7, 40).is_err());
    }

    #[test]
    fn uniform_weights() {
        let prior = uniform_prior::<Rational>(&WorldConfig::standard());
        assert!(prior.iter().all(|(_, w)| *w == ratio(1, 196)));
        assert_eq!(prior.total(), ratio(1, 1));
        let tiny = uniform_prior::<Rational>(&WorldConfig::new(1, 1).unwrap());
        assert!(tiny.iter().all(|(_, w)| *w == ratio(1, 2)));
    }

    #[test]
    fn eval_examples() {
        let mixed = fam(&[(Sex::Boy, 1), (Sex::Girl, 4)]);
        assert!(QueryPredicate::exists(Some(Sex::Boy), Some(Day::TUESDAY)).eval(&mixed));
        assert!(!QueryPredicate::all(Some(Sex::Boy), None).eval(&mixed));
        let girls = fam(&[(Sex::Girl, 0), (Sex::Girl, 0)]);
        assert!(!QueryPredicate::count_at_least(1, Some(Sex::Boy), None).eval(&girls));
        assert!(QueryPredicate::ChildSexIs(1, Sex::Girl).eval(&mixed));
        assert!(QueryPredicate::ChildDayIs(1, Day(4)).eval(&mixed));
    }

    #[test]
    fn tuesday_counts() {
        let cfg = WorldConfig::standard();
        let tue_boy = QueryPredicate::exists(Some(Sex::Boy), Some(Day::TUESDAY));
        let two_boys = QueryPredicate::all(Some(Sex::Boy), None);
        assert_eq!(count_families(&cfg, &tue_boy), 27);
        assert_eq!(
            count_families(&cfg, &tue_boy.clone().and(two_boys.clone())),
            13
        );
        assert_eq!(count_families(&cfg, &two_boys), 49);
        assert_eq!(count_families(&cfg, &QueryPredicate::Const(true)), 196);
    }

    #[test]
    fn restrict_examples() {
        let cfg = WorldConfig::standard();
        let prior = uniform_prior::<Rational>(&cfg);
        let tue_boy = QueryPredicate::exists(Some(Sex::Boy), Some(Day::TUESDAY));
        let restricted = restrict_prior(&prior, &tue_boy).unwrap();
        assert_eq!(restricted.support().count(), 27);
        assert!(restricted.support().all(|(_, w)| *w == ratio(1, 27)));
        assert_eq!(restricted.total(), ratio(1, 1));

        assert_eq!(
            restrict_prior(&prior, &QueryPredicate::Const(true)).unwrap(),
            prior
        );

        let contradiction = QueryPredicate::all(Some(Sex::Boy), None)
            .and(QueryPredicate::all(Some(Sex::Girl), None));
        assert_eq!(
            restrict_prior(&prior, &contradiction),
            Err(ModelError::EmptySupport)
        );
    }

    #[test]
    fn predicate_validation() {
        let cfg = WorldConfig::standard();
        assert!(QueryPredicate::ChildSexIs(2, Sex::Boy)
            .validate(&cfg)
            .is_err());
        assert!(QueryPredicate::exists(None, Some(Day(7)))
            .validate(&cfg)
            .is_err());
        assert!(QueryPredicate::exists(None, Some(Day(6)))
            .validate(&cfg)
            .is_ok());
    }

    #[test]
    fn day_parsing() {
        let week = WorldConfig::standard();
        let short = WorldConfig::new(3, 2).unwrap();
        assert_eq!(Day::parse("tue", &week), Some(Day::TUESDAY));
        assert_eq!(Day::parse("tue", &short), None);
        assert_eq!(Day::parse("d2", &short), Some(Day(2)));
        assert_eq!(Day::parse("d3", &short), None);
        assert_eq!(Day::parse("d", &short), None);
        assert_eq!(Day::TUESDAY.label(&week), "tue");
        assert_eq!(Day(1).label(&short), "d1");
    }
}
