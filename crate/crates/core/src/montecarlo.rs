//! Sampling oracle that runs a procedure literally.
//!
//! A family is drawn uniformly; if it fails the procedure's `require`
//! clauses it is sent home and another is drawn. The procedure body then
//! runs with real coin flips and random picks. Runs that end in reject are
//! redrawn too. Sampling continues until the target statement has been
//! heard `trials` times.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through
//! `SeedableRng::seed_from_u64`. Bounded integers are drawn from
//! `next_u64` by rejection, so results depend only on the ChaCha8 stream and
//! are identical across platforms. Shard `i` is seeded with
//! `splitmix64(seed + i * 0x9E3779B97F4A7C15)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::dsl::lower::{Op, Program};
use crate::dsl::{compile_program, DslError};
use crate::engine::{posterior, EngineError, Statement};
use crate::model::{Child, Day, Family, QueryPredicate, Sex};
use num_traits::ToPrimitive;

use crate::Rational;

pub const DEFAULT_REDRAW_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("shard count must be at least 1")]
    NoShards,
    #[error("{0} consecutive draws without hearing the statement; its mass is zero or nearly so")]
    DegenerateProtocol(u64),
    #[error("pick matched no child in family {0}")]
    EmptyPick(Family),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    pub shards: u64,
    /// Consecutive draws allowed without a statement match.
    pub redraw_cap: u64,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            shards: 1,
            redraw_cap: DEFAULT_REDRAW_CAP,
        }
    }

    pub fn with_shards(mut self, shards: u64) -> Self {
        self.shards = shards;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    /// Runs that ended in a statement.
    pub trials: u64,
    pub rejected_families: u64,
    pub rejected_runs: u64,
    pub hits: u64,
    pub statement_matches: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: u64,
    rejected_families: u64,
    rejected_runs: u64,
    hits: u64,
    statement_matches: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            rejected_families: self.rejected_families + o.rejected_families,
            rejected_runs: self.rejected_runs + o.rejected_runs,
            hits: self.hits + o.hits,
            statement_matches: self.statement_matches + o.statement_matches,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn shard_seed(seed: u64, shard: u64) -> u64 {
    splitmix64(seed.wrapping_add(shard.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Uniform integer in `0..bound`.
fn below(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % bound;
        }
    }
}

enum Outcome {
    Said { matched: bool },
    Rejected,
}

struct Runner<'p> {
    program: &'p Program,
    target: &'p Statement,
    env: Vec<usize>,
    stack: Vec<(&'p [Op], usize)>,
}

impl<'p> Runner<'p> {
    fn run(&mut self, family: &Family, rng: &mut impl RngCore) -> Result<Outcome, McError> {
        self.env.clear();
        self.stack.clear();
        let mut ops: &'p [Op] = &self.program.body;
        loop {
            let Some((op, rest)) = ops.split_first() else {
                match self.stack.pop() {
                    Some((next, depth)) => {
                        self.env.truncate(depth);
                        ops = next;
                        continue;
                    }
                    // fell off the end: implicit reject
                    None => return Ok(Outcome::Rejected),
                }
            };
            match op {
                Op::If(cond, then, otherwise) => {
                    self.stack.push((rest, self.env.len()));
                    ops = if cond.eval(family, &self.env) {
                        then
                    } else {
                        otherwise
                    };
                }
                Op::Pick { filter, .. } => {
                    let mut chosen = None;
                    let mut seen = 0u64;
                    let mut candidates = [0usize; 8];
                    let mut spill = Vec::new();
                    for i in 0..family.len() {
                        let ok = match filter {
                            None => true,
                            Some(f) => {
                                self.env.push(i);
                                let ok = f.eval(family, &self.env);
                                self.env.pop();
                                ok
                            }
                        };
                        if ok {
                            if (seen as usize) < candidates.len() {
                                candidates[seen as usize] = i;
                            } else {
                                spill.push(i);
                            }
                            seen += 1;
                        }
                    }
                    if seen > 0 {
                        let r = below(rng, seen) as usize;
                        chosen = Some(if r < candidates.len() {
                            candidates[r]
                        } else {
                            spill[r - candidates.len()]
                        });
                    }
                    let Some(i) = chosen else {
                        return Err(McError::EmptyPick(family.clone()));
                    };
                    self.env.push(i);
                    ops = rest;
                }
                Op::Flip {
                    numer,
                    denom,
                    heads,
                    tails,
                } => {
                    self.stack.push((rest, self.env.len()));
                    ops = if below(rng, *denom) < *numer {
                        heads
                    } else {
                        tails
                    };
                }
                Op::Say(say) => {
                    return Ok(Outcome::Said {
                        matched: say.matches(self.target, family, &self.env),
                    })
                }
                Op::Reject => return Ok(Outcome::Rejected),
            }
        }
    }
}

fn draw_family(children: &mut [Child], week: u32, rng: &mut impl RngCore) {
    let per_child = 2 * week as u64;
    for child in children.iter_mut() {
        let k = below(rng, per_child) as u32;
        let sex = if k < week { Sex::Boy } else { Sex::Girl };
        *child = Child::new(sex, Day(k % week));
    }
}

fn sample_shard(
    program: &Program,
    s: &Statement,
    q: &QueryPredicate,
    target: u64,
    seed: u64,
    cap: u64,
) -> Result<Tally, McError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = program.config();
    let mut runner = Runner {
        program,
        target: s,
        env: Vec::new(),
        stack: Vec::new(),
    };
    let mut tally = Tally::default();
    let mut children = vec![Child::new(Sex::Boy, Day(0)); cfg.family_size()];
    let mut dry = 0u64;
    while tally.statement_matches < target {
        if dry >= cap {
            return Err(McError::DegenerateProtocol(dry));
        }
        dry += 1;
        draw_family(&mut children, cfg.week_length(), &mut rng);
        let family = Family::new(children.clone());
        if program.pre_filter().is_some_and(|pf| !pf.eval(&family)) {
            tally.rejected_families += 1;
            continue;
        }
        match runner.run(&family, &mut rng)? {
            Outcome::Rejected => tally.rejected_runs += 1,
            Outcome::Said { matched } => {
                tally.trials += 1;
                if matched {
                    dry = 0;
                    tally.statement_matches += 1;
                    tally.hits += u64::from(q.eval(&family));
                }
            }
        }
    }
    Ok(tally)
}

/// Estimates `P(q | s)` by running `program` until `s` has been emitted
/// `opts.trials` times.
pub fn sample_posterior(
    program: &Program,
    s: &Statement,
    q: &QueryPredicate,
    opts: &McOptions,
) -> Result<McResult, McError> {
    if opts.trials == 0 {
        return Err(McError::NoTrials);
    }
    if opts.shards == 0 {
        return Err(McError::NoShards);
    }
    let per = opts.trials / opts.shards;
    let extra = opts.trials % opts.shards;
    let quota = |i: u64| per + u64::from(i < extra);
    let tally = if opts.shards == 1 {
        sample_shard(
            program,
            s,
            q,
            opts.trials,
            shard_seed(opts.seed, 0),
            opts.redraw_cap,
        )?
    } else {
        let results: Vec<Result<Tally, McError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..opts.shards)
                .filter(|&i| quota(i) > 0)
                .map(|i| {
                    scope.spawn(move || {
                        sample_shard(
                            program,
                            s,
                            q,
                            quota(i),
                            shard_seed(opts.seed, i),
                            opts.redraw_cap,
                        )
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling shard panicked"))
                .collect()
        });
        results
            .into_iter()
            .try_fold(Tally::default(), |acc, r| r.map(|t| acc.merge(t)))?
    };
    let n = tally.statement_matches as f64;
    let estimate = tally.hits as f64 / n;
    Ok(McResult {
        trials: tally.trials,
        rejected_families: tally.rejected_families,
        rejected_runs: tally.rejected_runs,
        hits: tally.hits,
        statement_matches: tally.statement_matches,
        estimate,
        stderr: (estimate * (1.0 - estimate) / n).sqrt(),
        seed: opts.seed,
    })
}

/// Absolute-error floor of the agreement test.
pub const AGREEMENT_FLOOR: f64 = 0.005;
/// Standard errors allowed by the agreement test.
pub const AGREEMENT_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub exact: Rational,
    pub result: McResult,
    pub tolerance: f64,
    pub error: f64,
    pub pass: bool,
}

impl Agreement {
    /// Passes iff `|estimate - exact| <= max(0.005, 5 * stderr)`.
    pub fn judge(exact: Rational, result: McResult) -> Agreement {
        let exact_f = exact.to_f64().unwrap_or(f64::NAN);
        let tolerance = AGREEMENT_FLOOR.max(AGREEMENT_SIGMAS * result.stderr);
        let error = (result.estimate - exact_f).abs();
        Agreement {
            exact,
            result,
            tolerance,
            error,
            pass: error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgreementError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sampling(#[from] McError),
}

/// Compares the exact posterior of `program` with a sampled estimate.
pub fn agreement_check(
    program: &Program,
    s: &Statement,
    q: &QueryPredicate,
    opts: &McOptions,
) -> Result<Agreement, AgreementError> {
    let kernel = compile_program::<Rational>(program)?.kernel;
    let exact = posterior(&kernel, s, q)?.posterior;
    let result = sample_posterior(program, s, q, opts)?;
    Ok(Agreement::judge(exact, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{lower, parse};
    use crate::model::WorldConfig;
    use rand_core::SeedableRng;

    fn program(src: &str, cfg: &WorldConfig) -> Program {
        lower(&parse(src).unwrap(), cfg).unwrap()
    }

    #[test]
    fn below_is_in_range_and_covers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = [0u32; 14];
        for _ in 0..14_000 {
            seen[below(&mut rng, 14) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| (800..1200).contains(&c)), "{seen:?}");
    }

    #[test]
    fn generator_stream_is_pinned() {
        // Guards the documented generator: changing it changes every result.
        let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(42, 0));
        let first: Vec<u64> = (0..3).map(|_| below(&mut rng, 1000)).collect();
        let mut again = ChaCha8Rng::seed_from_u64(shard_seed(42, 0));
        let second: Vec<u64> = (0..3).map(|_| below(&mut again, 1000)).collect();
        assert_eq!(first, second);
        assert_ne!(shard_seed(42, 0), shard_seed(42, 1));
    }

    #[test]
    fn certain_event_estimates_one() {
        let cfg = WorldConfig::standard();
        let p = program("procedure p { pick c; say claim(sex(c), day(c)); }", &cfg);
        let r = sample_posterior(
            &p,
            &Statement::claim(Sex::Girl, Day(3)),
            &QueryPredicate::Const(true),
            &McOptions::new(500, 1),
        )
        .unwrap();
        assert_eq!(r.hits, 500);
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.rejected_families, 0);
        assert_eq!(r.rejected_runs, 0);
    }

    #[test]
    fn counters_follow_rejection_kind() {
        let cfg = WorldConfig::standard();
        let filtered = program(
            "procedure p { require exists(boy); say atleastone(boy); }",
            &cfg,
        );
        let r = sample_posterior(
            &filtered,
            &Statement::AtLeastOne(Sex::Boy),
            &QueryPredicate::all(Some(Sex::Boy), None),
            &McOptions::new(2_000, 3),
        )
        .unwrap();
        assert!(r.rejected_families > 0);
        assert_eq!(r.rejected_runs, 0);
        assert!(r.hits <= r.statement_matches && r.statement_matches <= r.trials);

        let in_body = program(
            "procedure p { if exists(boy) { say atleastone(boy); } else { reject; } }",
            &cfg,
        );
        let r = sample_posterior(
            &in_body,
            &Statement::AtLeastOne(Sex::Boy),
            &QueryPredicate::all(Some(Sex::Boy), None),
            &McOptions::new(2_000, 3),
        )
        .unwrap();
        assert_eq!(r.rejected_families, 0);
        assert!(r.rejected_runs > 0);
    }

    #[test]
    fn never_said_is_degenerate() {
        let cfg = WorldConfig::standard();
        let p = program("procedure p { say yes; }", &cfg);
        let mut opts = McOptions::new(10, 0);
        opts.redraw_cap = 1_000;
        assert_eq!(
            sample_posterior(
                &p,
                &Statement::YesNo(false),
                &QueryPredicate::Const(true),
                &opts
            ),
            Err(McError::DegenerateProtocol(1_000))
        );
    }

    #[test]
    fn argument_validation() {
        let cfg = WorldConfig::standard();
        let p = program("procedure p { say yes; }", &cfg);
        let q = QueryPredicate::Const(true);
        assert_eq!(
            sample_posterior(&p, &Statement::YesNo(true), &q, &McOptions::new(0, 0)),
            Err(McError::NoTrials)
        );
        assert_eq!(
            sample_posterior(
                &p,
                &Statement::YesNo(true),
                &q,
                &McOptions::new(5, 0).with_shards(0)
            ),
            Err(McError::NoShards)
        );
    }

    #[test]
    fn sharding_is_deterministic_and_complete() {
        let cfg = WorldConfig::standard();
        let p = program(
            "procedure p { flip 1/3 { say yes; } else { say no; } }",
            &cfg,
        );
        let q = QueryPredicate::exists(Some(Sex::Boy), None);
        let opts = McOptions::new(1_001, 9).with_shards(4);
        let a = sample_posterior(&p, &Statement::YesNo(true), &q, &opts).unwrap();
        let b = sample_posterior(&p, &Statement::YesNo(true), &q, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.statement_matches, 1_001);
    }

    #[test]
    fn negative_control_fails() {
        let cfg = WorldConfig::standard();
        let p = program(
            "procedure p { require exists(boy, tue); say claim(boy, tue); }",
            &cfg,
        );
        let s = Statement::claim(Sex::Boy, Day::TUESDAY);
        let q = QueryPredicate::all(Some(Sex::Boy), None);
        let good = agreement_check(&p, &s, &q, &McOptions::new(20_000, 5)).unwrap();
        assert!(good.pass, "{good:?}");
        let shifted = good.exact.clone() + crate::ratio(1, 10);
        assert!(!Agreement::judge(shifted, good.result).pass);
    }
}
