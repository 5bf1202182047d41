//! Named disclosure procedures for two-child families.
//!
//! Each constructor builds its kernel directly from the procedure's rules.
//! Every one also has a reference program in the protocol language (see
//! [`reference_source`]) that compiles to the same kernel.

use thiserror::Error;

use crate::engine::{posterior, EngineError, PosteriorReport, ProtocolKernel, Statement};
use crate::model::{Day, Family, QueryPredicate, Sex, WorldConfig};
use crate::{fraction, Rational, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario needs two-child families, config has {0}")]
    UnsupportedConfig(usize),
    #[error("day {day} is outside a {week_length}-day week")]
    DayOutOfRange { day: u32, week_length: u32 },
    #[error("probability must lie in [0, 1]")]
    InvalidProbability,
}

/// Scenario ids, sorted.
pub const IDS: [&str; 10] = [
    "any-answer",
    "bc-dn",
    "bc-tc",
    "brag",
    "classic-coinflip",
    "classic-selection",
    "deemphasize",
    "gn-dn",
    "gn-tc",
    "yesno",
];

pub fn describe(id: &str) -> Option<&'static str> {
    Some(match id {
        "any-answer" => "two boys say at-least-one-boy w.p. p, mixed w.p. (1-p)/2",
        "bc-dn" => "boy-centered, day-neutral: families without a son are sent home",
        "bc-tc" => "boy-centered, day-centered: only fathers of a son born on the day speak",
        "brag" => "brags: two boys say so, one boy says at-least-one",
        "classic-coinflip" => "gender-neutral: mixed families flip a coin between the sexes",
        "classic-selection" => "boy-centered: pick a random family having a boy",
        "deemphasize" => "de-emphasizes boys: mixed families talk about the girl",
        "gn-dn" => "gender-neutral, day-neutral: a coin picks the child to describe",
        "gn-tc" => "gender-neutral, day-centered: only fathers of a child born on the day speak",
        "yesno" => "asked yes or no whether there is a son born on the day",
        _ => return None,
    })
}

#[derive(Debug, Clone)]
pub struct Scenario<W> {
    pub id: &'static str,
    pub kernel: ProtocolKernel<W>,
    pub canonical_statement: Statement,
    pub canonical_query: QueryPredicate,
    pub expected_answer: Option<W>,
}

impl<W: Weight> Scenario<W> {
    pub fn evaluate(&self) -> Result<PosteriorReport<W>, EngineError> {
        posterior(
            &self.kernel,
            &self.canonical_statement,
            &self.canonical_query,
        )
    }
}

fn two_children(cfg: &WorldConfig) -> Result<(), ScenarioError> {
    match cfg.family_size() {
        2 => Ok(()),
        n => Err(ScenarioError::UnsupportedConfig(n)),
    }
}

fn check_day(cfg: &WorldConfig, day: Day) -> Result<(), ScenarioError> {
    if day.0 < cfg.week_length() {
        Ok(())
    } else {
        Err(ScenarioError::DayOutOfRange {
            day: day.0,
            week_length: cfg.week_length(),
        })
    }
}

fn w<W: Weight>(numer: u64, denom: u64) -> W {
    W::from_ratio(numer, denom)
}

fn boy() -> Option<Sex> {
    Some(Sex::Boy)
}

fn two_boys() -> QueryPredicate {
    QueryPredicate::all(boy(), None)
}

fn scenario<W: Weight>(
    id: &'static str,
    kernel: ProtocolKernel<W>,
    statement: Statement,
    expected: Option<W>,
) -> Scenario<W> {
    Scenario {
        id,
        kernel,
        canonical_statement: statement,
        canonical_query: two_boys(),
        expected_answer: expected,
    }
}

/// Fathers with at least one son are sampled and say so.
pub fn classic_selection<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, Some(QueryPredicate::exists(boy(), None)), |_| {
        vec![(Statement::AtLeastOne(Sex::Boy), W::one())]
    });
    Ok(scenario(
        "classic-selection",
        kernel,
        Statement::AtLeastOne(Sex::Boy),
        Some(w(1, 3)),
    ))
}

/// Same-sex families name their sex; mixed families flip a fair coin.
pub fn classic_coinflip<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| match f.count_sex(Sex::Boy) {
        2 => vec![(Statement::AtLeastOne(Sex::Boy), W::one())],
        0 => vec![(Statement::AtLeastOne(Sex::Girl), W::one())],
        _ => vec![
            (Statement::AtLeastOne(Sex::Boy), w(1, 2)),
            (Statement::AtLeastOne(Sex::Girl), w(1, 2)),
        ],
    });
    Ok(scenario(
        "classic-coinflip",
        kernel,
        Statement::AtLeastOne(Sex::Boy),
        Some(w(1, 2)),
    ))
}

/// Mentions as many sons as possible. Two-girl families reject.
pub fn brag<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| match f.count_sex(Sex::Boy) {
        2 => vec![(Statement::TwoOfAKind(Sex::Boy), W::one())],
        1 => vec![(Statement::AtLeastOne(Sex::Boy), W::one())],
        _ => vec![],
    });
    Ok(scenario(
        "brag",
        kernel,
        Statement::AtLeastOne(Sex::Boy),
        Some(W::zero()),
    ))
}

/// Talks about a daughter whenever there is one. Two-girl families reject.
pub fn deemphasize<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| match f.count_sex(Sex::Boy) {
        2 => vec![(Statement::AtLeastOne(Sex::Boy), W::one())],
        1 => vec![(Statement::ProudOf(Sex::Girl), W::one())],
        _ => vec![],
    });
    Ok(scenario(
        "deemphasize",
        kernel,
        Statement::AtLeastOne(Sex::Boy),
        Some(W::one()),
    ))
}

/// Uniform choice among the children satisfying `keep`, each described by
/// `say`. Returns an empty row when nobody qualifies.
fn pick_uniform<W: Weight>(
    f: &Family,
    keep: impl Fn(&crate::model::Child) -> bool,
    say: impl Fn(&crate::model::Child) -> Statement,
) -> Vec<(Statement, W)> {
    let chosen: Vec<_> = f.children().iter().filter(|c| keep(c)).collect();
    let share: W = w(1, chosen.len().max(1) as u64);
    chosen
        .into_iter()
        .map(|c| (say(c), share.clone()))
        .collect()
}

// Tuesday when the week has one, else the first day.
fn default_claim_day(cfg: &WorldConfig) -> Day {
    Day::TUESDAY.min(Day(cfg.week_length() - 1))
}

/// A coin picks one child, whose sex and birth day are reported.
pub fn gn_dn<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| {
        pick_uniform(f, |_| true, |c| Statement::claim(c.sex, c.day))
    });
    Ok(scenario(
        "gn-dn",
        kernel,
        Statement::claim(Sex::Boy, default_claim_day(cfg)),
        Some(w(1, 2)),
    ))
}

/// Families without a son are sent home; a random son's day is reported.
pub fn bc_dn<W: Weight>(cfg: &WorldConfig) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    let kernel = ProtocolKernel::from_fn(*cfg, Some(QueryPredicate::exists(boy(), None)), |f| {
        pick_uniform(
            f,
            |c| c.sex == Sex::Boy,
            |c| Statement::claim(Sex::Boy, c.day),
        )
    });
    Ok(scenario(
        "bc-dn",
        kernel,
        Statement::claim(Sex::Boy, default_claim_day(cfg)),
        Some(w(1, 3)),
    ))
}

/// `(2d-1)/(4d-1)`, the boy-centered day-centered answer for a `d`-day week.
pub fn week_formula<W: Weight>(week_length: u32) -> W {
    let d = week_length as u64;
    w(2 * d - 1, 4 * d - 1)
}

/// Only fathers of a son born on `day` stay, and they say exactly that.
pub fn bc_tc<W: Weight>(cfg: &WorldConfig, day: Day) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    check_day(cfg, day)?;
    let statement = Statement::claim(Sex::Boy, day);
    let kernel =
        ProtocolKernel::from_fn(*cfg, Some(QueryPredicate::exists(boy(), Some(day))), |_| {
            vec![(statement.clone(), W::one())]
        });
    Ok(scenario(
        "bc-tc",
        kernel,
        statement,
        Some(week_formula(cfg.week_length())),
    ))
}

/// Only fathers of a child born on `day` stay; they describe that child,
/// choosing uniformly when both qualify.
pub fn gn_tc<W: Weight>(cfg: &WorldConfig, day: Day) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    check_day(cfg, day)?;
    let kernel =
        ProtocolKernel::from_fn(*cfg, Some(QueryPredicate::exists(None, Some(day))), |f| {
            pick_uniform(f, |c| c.day == day, |c| Statement::claim(c.sex, day))
        });
    Ok(scenario(
        "gn-tc",
        kernel,
        Statement::claim(Sex::Boy, day),
        Some(w(1, 2)),
    ))
}

/// Every father truthfully answers whether he has a son born on `day`.
pub fn yesno_question<W: Weight>(
    cfg: &WorldConfig,
    day: Day,
) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    check_day(cfg, day)?;
    let asked = QueryPredicate::exists(boy(), Some(day));
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| {
        vec![(Statement::YesNo(asked.eval(f)), W::one())]
    });
    Ok(scenario(
        "yesno",
        kernel,
        Statement::YesNo(true),
        Some(week_formula(cfg.week_length())),
    ))
}

/// A procedure whose answer is exactly `p`.
///
/// Two-boy families say "at least one is a boy" with probability `p`,
/// mixed families with probability `(1-p)/2`, and everything else rejects.
pub fn any_answer<W: Weight>(cfg: &WorldConfig, p: W) -> Result<Scenario<W>, ScenarioError> {
    two_children(cfg)?;
    if p < W::zero() || p > W::one() {
        return Err(ScenarioError::InvalidProbability);
    }
    let mixed = (W::one() - p.clone()) / w(2, 1);
    let kernel = ProtocolKernel::from_fn(*cfg, None, |f| match f.count_sex(Sex::Boy) {
        2 => vec![(Statement::AtLeastOne(Sex::Boy), p.clone())],
        1 => vec![(Statement::AtLeastOne(Sex::Boy), mixed.clone())],
        _ => vec![],
    });
    Ok(scenario(
        "any-answer",
        kernel,
        Statement::AtLeastOne(Sex::Boy),
        Some(p),
    ))
}

/// Default target probability for `any-answer`.
pub fn default_any_answer_p() -> Rational {
    crate::ratio(1, 3)
}

/// Builds a scenario by id. `day` applies to the day-centered procedures
/// and `p` to `any-answer`; both are ignored elsewhere.
pub fn build<W: Weight>(
    id: &str,
    cfg: &WorldConfig,
    day: Day,
    p: W,
) -> Result<Scenario<W>, ScenarioError> {
    match id {
        "any-answer" => any_answer(cfg, p),
        "bc-dn" => bc_dn(cfg).and_then(|s| with_claim_day(s, cfg, day)),
        "bc-tc" => bc_tc(cfg, day),
        "brag" => brag(cfg),
        "classic-coinflip" => classic_coinflip(cfg),
        "classic-selection" => classic_selection(cfg),
        "deemphasize" => deemphasize(cfg),
        "gn-dn" => gn_dn(cfg).and_then(|s| with_claim_day(s, cfg, day)),
        "gn-tc" => gn_tc(cfg, day),
        "yesno" => yesno_question(cfg, day),
        other => Err(ScenarioError::UnknownScenario(other.to_string())),
    }
}

fn with_claim_day<W>(
    mut s: Scenario<W>,
    cfg: &WorldConfig,
    day: Day,
) -> Result<Scenario<W>, ScenarioError> {
    check_day(cfg, day)?;
    s.canonical_statement = Statement::claim(Sex::Boy, day);
    Ok(s)
}

/// Protocol-language program equivalent to [`build`] for the same arguments.
pub fn reference_source(
    id: &str,
    cfg: &WorldConfig,
    day: Day,
    p: &Rational,
) -> Result<String, ScenarioError> {
    two_children(cfg)?;
    let day_label = || -> Result<String, ScenarioError> {
        check_day(cfg, day)?;
        Ok(day.label(cfg))
    };
    let name = id.replace('-', "_");
    let body = match id {
        "any-answer" => {
            if *p < Rational::from_integer(0.into()) || *p > Rational::from_integer(1.into()) {
                return Err(ScenarioError::InvalidProbability);
            }
            let mixed = (Rational::from_integer(1.into()) - p) / Rational::from_integer(2.into());
            format!(
                "  if all(boy) {{\n    flip {} {{ say atleastone(boy); }} else {{ reject; }}\n  \
                 }} else {{\n    if count(boy) = 1 {{\n      flip {} {{ say atleastone(boy); }} \
                 else {{ reject; }}\n    }} else {{\n      reject;\n    }}\n  }}\n",
                fraction(p),
                fraction(&mixed)
            )
        }
        "bc-dn" => "  require exists(boy);\n  pick c where sex(c) = boy;\n  say claim(boy, day(c));\n"
            .to_string(),
        "bc-tc" => {
            let d = day_label()?;
            format!("  require exists(boy, {d});\n  say claim(boy, {d});\n")
        }
        "brag" => "  if all(boy) {\n    say twoofakind(boy);\n  } else {\n    if count(boy) = 1 {\n      \
                   say atleastone(boy);\n    } else {\n      reject;\n    }\n  }\n"
            .to_string(),
        "classic-coinflip" => "  if all(boy) {\n    say atleastone(boy);\n  } else {\n    if all(girl) {\n      \
                               say atleastone(girl);\n    } else {\n      flip 1/2 { say atleastone(boy); } \
                               else { say atleastone(girl); }\n    }\n  }\n"
            .to_string(),
        "classic-selection" => "  require exists(boy);\n  say atleastone(boy);\n".to_string(),
        "deemphasize" => "  if all(boy) {\n    say atleastone(boy);\n  } else {\n    if count(boy) = 1 {\n      \
                          say proudof(girl);\n    } else {\n      reject;\n    }\n  }\n"
            .to_string(),
        "gn-dn" => "  pick c;\n  say claim(sex(c), day(c));\n".to_string(),
        "gn-tc" => {
            let d = day_label()?;
            format!("  require exists({d});\n  pick c where day(c) = {d};\n  say claim(sex(c), {d});\n")
        }
        "yesno" => {
            let d = day_label()?;
            format!("  if exists(boy, {d}) {{\n    say yes;\n  }} else {{\n    say no;\n  }}\n")
        }
        other => return Err(ScenarioError::UnknownScenario(other.to_string())),
    };
    Ok(format!("procedure {name} {{\n{body}}}\n"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<W> {
    pub week_length: u32,
    pub posterior: W,
    pub formula: W,
}

impl<W: Weight> SweepRow<W> {
    pub fn matches(&self) -> bool {
        self.posterior == self.formula
    }
}

/// Boy-centered day-centered answer for each week length, target day 0.
pub fn week_sweep<W: Weight>(
    weeks: impl IntoIterator<Item = u32>,
) -> Result<Vec<SweepRow<W>>, SweepError> {
    weeks
        .into_iter()
        .map(|d| {
            let cfg = WorldConfig::new(d, 2).map_err(SweepError::Model)?;
            let report = bc_tc::<W>(&cfg, Day(0))?.evaluate()?;
            Ok(SweepRow {
                week_length: d,
                posterior: report.posterior,
                formula: week_formula(d),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Model(crate::model::ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{marginal, statement_mass, validate_kernel};
    use crate::model::Child;
    use crate::ratio;

    fn std_cfg() -> WorldConfig {
        WorldConfig::standard()
    }

    fn answer(s: &Scenario<Rational>) -> Rational {
        s.evaluate().unwrap().posterior
    }

    #[test]
    fn every_builtin_is_valid_and_matches_expectation() {
        for id in IDS {
            let s =
                build::<Rational>(id, &std_cfg(), Day::TUESDAY, default_any_answer_p()).unwrap();
            assert!(validate_kernel(&s.kernel).is_empty(), "{id}");
            assert_eq!(Some(answer(&s)), s.expected_answer, "{id}");
        }
    }

    #[test]
    fn ids_sorted() {
        assert!(IDS.windows(2).all(|w| w[0] < w[1]));
        assert!(IDS.iter().all(|id| describe(id).is_some()));
    }

    #[test]
    fn two_child_only() {
        let cfg = WorldConfig::new(7, 3).unwrap();
        assert_eq!(
            gn_dn::<Rational>(&cfg).unwrap_err(),
            ScenarioError::UnsupportedConfig(3)
        );
        assert!(matches!(
            bc_tc::<Rational>(&std_cfg(), Day(7)),
            Err(ScenarioError::DayOutOfRange {
                day: 7,
                week_length: 7
            })
        ));
        assert_eq!(
            any_answer(&std_cfg(), ratio(3, 2)).unwrap_err(),
            ScenarioError::InvalidProbability
        );
    }

    #[test]
    fn classic_selection_independent_of_days() {
        let s = classic_selection::<Rational>(&WorldConfig::new(1, 2).unwrap()).unwrap();
        assert_eq!(answer(&s), ratio(1, 3));
        assert_eq!(
            statement_mass(&s.kernel, &Statement::AtLeastOne(Sex::Boy)).unwrap(),
            ratio(1, 1)
        );
    }

    #[test]
    fn coinflip_marginal_is_symmetric() {
        let s = classic_coinflip::<Rational>(&std_cfg()).unwrap();
        let m = marginal(&s.kernel).unwrap();
        assert_eq!(m.statements[&Statement::AtLeastOne(Sex::Boy)], ratio(1, 2));
        assert_eq!(m.statements[&Statement::AtLeastOne(Sex::Girl)], ratio(1, 2));
        assert_eq!(m.reject, ratio(0, 1));
        let girls = posterior(
            &s.kernel,
            &Statement::AtLeastOne(Sex::Girl),
            &QueryPredicate::all(Some(Sex::Girl), None),
        )
        .unwrap();
        assert_eq!(girls.posterior, ratio(1, 2));
    }

    #[test]
    fn brag_two_of_a_kind_is_certain() {
        let s = brag::<Rational>(&std_cfg()).unwrap();
        let r = posterior(&s.kernel, &Statement::TwoOfAKind(Sex::Boy), &two_boys()).unwrap();
        assert_eq!(r.posterior, ratio(1, 1));
    }

    #[test]
    fn gn_dn_rows() {
        let s = gn_dn::<Rational>(&std_cfg()).unwrap();
        let tue = Day::TUESDAY;
        let both_tue = Family::new(vec![Child::new(Sex::Boy, tue), Child::new(Sex::Boy, tue)]);
        assert_eq!(
            s.kernel
                .emission(&both_tue, &Statement::claim(Sex::Boy, tue)),
            ratio(1, 1)
        );
        let mixed = Family::new(vec![
            Child::new(Sex::Boy, tue),
            Child::new(Sex::Girl, Day(3)),
        ]);
        assert_eq!(
            s.kernel.emission(&mixed, &Statement::claim(Sex::Boy, tue)),
            ratio(1, 2)
        );
        let m = marginal(&s.kernel).unwrap();
        assert_eq!(m.reject, ratio(0, 1));
        // mixed families contribute 1/2 * 1/7 each once the day is fixed
        let mixed_per_family = ratio(1, 2) * ratio(1, 7);
        let mixed_mass: Rational = crate::model::enumerate_families(&std_cfg())
            .iter()
            .filter(|f| f.count_sex(Sex::Boy) == 1)
            .map(|f| s.kernel.emission(f, &Statement::claim(Sex::Boy, tue)))
            .sum();
        assert_eq!(mixed_mass, ratio(98, 1) * mixed_per_family);
    }

    #[test]
    fn bc_dn_picks_a_son_uniformly() {
        let s = bc_dn::<Rational>(&std_cfg()).unwrap();
        let f = Family::new(vec![
            Child::new(Sex::Boy, Day(1)),
            Child::new(Sex::Boy, Day(2)),
        ]);
        assert_eq!(
            s.kernel.emission(&f, &Statement::claim(Sex::Boy, Day(1))),
            ratio(1, 2)
        );
        let masses: Vec<_> = std_cfg()
            .days()
            .map(|d| statement_mass(&s.kernel, &Statement::claim(Sex::Boy, d)).unwrap())
            .collect();
        assert!(masses.iter().all(|m| *m == ratio(1, 7)));
    }

    #[test]
    fn bc_tc_support_counts_and_short_week() {
        let s = bc_tc::<Rational>(&std_cfg(), Day::TUESDAY).unwrap();
        let r = s.evaluate().unwrap();
        let mixed = r
            .case_table
            .iter()
            .filter(|c| c.family.count_sex(Sex::Boy) == 1)
            .count();
        let sons = r.case_table.iter().filter(|c| c.event).count();
        assert_eq!((mixed, sons), (14, 13));
        let one_day = bc_tc::<Rational>(&WorldConfig::new(1, 2).unwrap(), Day(0)).unwrap();
        assert_eq!(answer(&one_day), ratio(1, 3));
    }

    #[test]
    fn gn_tc_support_and_mirror() {
        let s = gn_tc::<Rational>(&std_cfg(), Day::TUESDAY).unwrap();
        let support = s.kernel.prior().unwrap();
        let by_boys = |n| {
            support
                .support()
                .filter(|(f, _)| f.count_sex(Sex::Boy) == n)
                .count()
        };
        assert_eq!((by_boys(0), by_boys(1), by_boys(2)), (13, 26, 13));
        let girls = posterior(
            &s.kernel,
            &Statement::claim(Sex::Girl, Day::TUESDAY),
            &QueryPredicate::all(Some(Sex::Girl), None),
        )
        .unwrap();
        assert_eq!(girls.posterior, ratio(1, 2));
    }

    #[test]
    fn day_centered_answers_ignore_the_target_day() {
        for day in std_cfg().days() {
            assert_eq!(answer(&bc_tc(&std_cfg(), day).unwrap()), ratio(13, 27));
            assert_eq!(answer(&gn_tc(&std_cfg(), day).unwrap()), ratio(1, 2));
            assert_eq!(
                answer(&yesno_question(&std_cfg(), day).unwrap()),
                ratio(13, 27)
            );
        }
    }

    #[test]
    fn yesno_masses() {
        let s = yesno_question::<Rational>(&std_cfg(), Day::TUESDAY).unwrap();
        assert_eq!(answer(&s), ratio(13, 27));
        assert_eq!(
            statement_mass(&s.kernel, &Statement::YesNo(true)).unwrap(),
            ratio(27, 196)
        );
        let no = posterior(&s.kernel, &Statement::YesNo(false), &two_boys()).unwrap();
        assert_eq!(no.posterior, ratio(36, 169));
    }

    #[test]
    fn any_answer_endpoints() {
        for p in [ratio(0, 1), ratio(1, 3), ratio(13, 27), ratio(1, 1)] {
            assert_eq!(answer(&any_answer(&std_cfg(), p.clone()).unwrap()), p);
        }
    }

    #[test]
    fn sweep_small_weeks() {
        let rows = week_sweep::<Rational>(1..=3).unwrap();
        assert_eq!(rows[0].posterior, ratio(1, 3));
        assert_eq!(rows[1].posterior, ratio(3, 7));
        assert!(rows.iter().all(SweepRow::matches));
    }

    #[test]
    fn float_instantiation_tracks_exact() {
        let s = bc_tc::<f64>(&std_cfg(), Day::TUESDAY).unwrap();
        let p = s.evaluate().unwrap().posterior;
        assert!((p - 13.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn reference_sources_reject_bad_inputs() {
        let p = default_any_answer_p();
        assert!(reference_source("nope", &std_cfg(), Day::TUESDAY, &p).is_err());
        assert!(reference_source("bc-tc", &std_cfg(), Day(9), &p).is_err());
        assert!(reference_source("any-answer", &std_cfg(), Day(0), &ratio(2, 1)).is_err());
        let short = WorldConfig::new(3, 2).unwrap();
        let src = reference_source("yesno", &short, Day(2), &p).unwrap();
        assert!(src.contains("exists(boy, d2)"));
    }
}
