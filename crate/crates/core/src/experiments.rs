//! Exact verification of the inequalities behind the decay argument, the
//! end-to-end reduction pipeline, and decay curves.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Game, TupleIter};
use crate::generators;
use crate::links::consistency_probability;
use crate::scalar::{power_of_two_le, Rational};
use crate::strategy::Strategy;
use crate::structure::{connectivity, decompose_loosely, is_projection};
use crate::transform::{convex_coefficient, full_support, saturate, transform};

/// How `lhs` is compared with `rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
    /// `lhs^(2^k) <= rhs`.
    PowLe(u32),
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::PowLe(k) => power_of_two_le(lhs, k, rhs),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Eq => f.write_str("=="),
            Relation::Le => f.write_str("<="),
            Relation::Ge => f.write_str(">="),
            Relation::PowLe(k) => write!(f, "^(2^{k}) <="),
        }
    }
}

/// One exact check. Players are 0-based here and 1-based in the CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub claim_id: &'static str,
    pub game: String,
    pub i: Option<usize>,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub relation: Relation,
    pub holds: bool,
    pub elapsed: Duration,
}

pub const CSV_HEADER: &str = "claim_id,game,i,p,n,lhs_num,lhs_den,rhs_num,rhs_den,holds,ms";

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        claim_id: &'static str,
        game: &str,
        (i, p, n): (Option<usize>, Option<usize>, Option<usize>),
        lhs: Rational,
        relation: Relation,
        rhs: Rational,
        started: Instant,
    ) -> Self {
        let holds = relation.holds(&lhs, &rhs);
        VerificationReport {
            claim_id,
            game: game.to_string(),
            i,
            p,
            n,
            lhs,
            rhs,
            relation,
            holds,
            elapsed: started.elapsed(),
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<usize>, shift: usize| x.map_or(String::new(), |v| (v + shift).to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.claim_id,
            self.game,
            opt(self.i, 1),
            opt(self.p, 1),
            opt(self.n, 0),
            self.lhs.numer(),
            self.lhs.denom(),
            self.rhs.numer(),
            self.rhs.denom(),
            self.holds,
            self.elapsed.as_millis()
        )
    }
}

pub fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Every deterministic strategy, in lexicographic order of the flattened
/// maps.
pub fn all_strategies(question_counts: &[usize], answer_counts: &[usize]) -> impl Iterator<Item = Strategy> {
    let radices: Vec<usize> = question_counts
        .iter()
        .zip(answer_counts)
        .flat_map(|(&q, &a)| std::iter::repeat(a).take(q))
        .collect();
    let qc = question_counts.to_vec();
    TupleIter::new(radices).map(move |flat| {
        let mut rest = flat.0.as_slice();
        Strategy::new(
            qc.iter()
                .map(|&q| {
                    let (head, tail) = rest.split_at(q);
                    rest = tail;
                    head.to_vec()
                })
                .collect(),
        )
    })
}

/// Product of the i-link distribution against the link distribution of the
/// repeated game. `lhs` is their L1 distance.
pub fn verify_link_identity(
    game: &Game,
    name: &str,
    i: usize,
    n: usize,
    budget: u128,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let product = game.product_link_distribution(i, n, budget)?;
    let direct = game.repeated(n)?.link_distribution(i)?;
    let mut distance = Rational::zero();
    for (link, w) in &product.atoms {
        distance += (w - direct.weight(link)).abs();
    }
    for (link, w) in &direct.atoms {
        if !product.atoms.contains_key(link) {
            distance += w.abs();
        }
    }
    Ok(VerificationReport::new(
        "link_identity",
        name,
        (Some(i), None, Some(n)),
        distance,
        Relation::Eq,
        Rational::zero(),
        started,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMode {
    /// Every deterministic strategy; needs a strategy space of at most 2^16.
    Exhaustive,
    /// Only the optimal strategy found by exact search.
    OptimalOnly,
}

/// Largest strategy space checked exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 16;

/// Link consistency probability against the squared acceptance probability.
/// The report carries the strategy with the least slack.
pub fn verify_path_bound(
    game: &Game,
    name: &str,
    i: usize,
    mode: PathMode,
    budget: u128,
) -> Result<VerificationReport> {
    let started = Instant::now();
    game.link_distribution(i)?;
    let strategies: Vec<Strategy> = match mode {
        PathMode::Exhaustive => {
            let size = game.strategy_space();
            if size > BigUint::from(EXHAUSTIVE_LIMIT) {
                return Err(Error::BudgetExceeded {
                    size,
                    budget: EXHAUSTIVE_LIMIT,
                });
            }
            all_strategies(&game.question_counts(), &game.answer_counts()).collect()
        }
        PathMode::OptimalOnly => vec![game.exact_value(budget)?.strategy],
    };
    let checked: Vec<(Rational, Rational)> = strategies
        .par_iter()
        .map(|s| {
            let v = game.evaluate(s)?;
            Ok((consistency_probability(game, i, s)?, &v * &v))
        })
        .collect::<Result<_>>()?;
    let (lhs, rhs) = checked
        .into_iter()
        .min_by(|a, b| (&a.0 - &a.1).cmp(&(&b.0 - &b.1)))
        .expect("at least one strategy");
    Ok(VerificationReport::new(
        "path_bound",
        name,
        (Some(i), None, None),
        lhs,
        Relation::Ge,
        rhs,
        started,
    ))
}

/// The transformed game's value against `1 - eps * d`, where `d` is the
/// convex coefficient of the pivot, and its repeated values against the
/// squares of the original's for `n = 1..=n_max`.
pub fn verify_transform_bounds(
    game: &Game,
    name: &str,
    i: usize,
    p: usize,
    n_max: usize,
    budget: u128,
) -> Result<Vec<VerificationReport>> {
    if !is_projection(game).holds() {
        return Err(Error::NotProjection {
            reason: format!("{name} has a non-projection predicate"),
        });
    }
    let started = Instant::now();
    let t = transform(game, i, p)?;
    let val = game.exact_value(budget)?.value;
    let val_t = t.exact_value(budget)?.value;
    let eps = Rational::one() - &val;
    let bound = Rational::one() - eps * convex_coefficient(game, i)?;
    let mut out = vec![VerificationReport::new(
        "transform_upper_bound",
        name,
        (Some(i), Some(p), Some(1)),
        val_t.clone(),
        Relation::Le,
        bound,
        started,
    )];
    for n in 1..=n_max {
        let started = Instant::now();
        let (lhs, base) = if n == 1 {
            (val_t.clone(), val.clone())
        } else {
            (
                t.repeated(n)?.exact_value(budget)?.value,
                game.repeated(n)?.exact_value(budget)?.value,
            )
        };
        out.push(VerificationReport::new(
            "transform_square_bound",
            name,
            (Some(i), Some(p), Some(n)),
            lhs,
            Relation::Ge,
            &base * &base,
            started,
        ));
    }
    Ok(out)
}

/// Result for one loose component of the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentReport {
    pub mass: Rational,
    pub support_size: usize,
    pub saturated_support_size: usize,
    pub full_support: bool,
    pub passes_used: usize,
    /// Number of transformations applied, `T'`.
    pub t_prime: usize,
    pub connected: bool,
    pub value: Rational,
    pub saturated_value: Rational,
    /// `value^(2^T') <= saturated_value`.
    pub chain_holds: bool,
    /// `saturated_value < 1` exactly when `value < 1`.
    pub below_one_agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub game: String,
    pub components: Vec<ComponentReport>,
    pub elapsed: Duration,
}

impl PipelineReport {
    pub fn holds(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.chain_holds && c.below_one_agrees && c.connected && c.full_support)
    }

    pub fn reports(&self) -> Vec<VerificationReport> {
        let mut out = Vec::new();
        for c in &self.components {
            let started = Instant::now();
            let squarings = u32::try_from(c.t_prime).unwrap_or(u32::MAX);
            let mut chain = VerificationReport::new(
                "pipeline_chain",
                &self.game,
                (None, None, Some(1)),
                c.value.clone(),
                Relation::PowLe(squarings),
                c.saturated_value.clone(),
                started,
            );
            chain.elapsed = self.elapsed;
            let mut below = chain.clone();
            below.claim_id = "pipeline_below_one";
            below.lhs = c.saturated_value.clone();
            below.rhs = Rational::one();
            below.relation = if c.value < Rational::one() {
                Relation::Le
            } else {
                Relation::Eq
            };
            below.holds = c.below_one_agrees && c.connected && c.full_support;
            out.push(chain);
            out.push(below);
        }
        out
    }
}

/// Splits a projection game into loose components, saturates each one and
/// checks the value chain exactly at `n = 1`.
pub fn run_theorem_pipeline(game: &Game, name: &str, budget: u128) -> Result<PipelineReport> {
    let started = Instant::now();
    if let crate::structure::ProjectionWitness::Fails(w) = is_projection(game) {
        return Err(Error::NotProjection {
            reason: format!("missing answer tuple {} at question {}", w.answer, w.question),
        });
    }
    let mut components = Vec::new();
    for (part, mass) in decompose_loosely(game) {
        let sat = saturate(&part, None, None)?;
        let value = part.exact_value(budget)?.value;
        let saturated_value = sat.game.exact_value(budget)?.value;
        let squarings = u32::try_from(sat.transforms_applied).unwrap_or(u32::MAX);
        let one = Rational::one();
        components.push(ComponentReport {
            mass,
            support_size: part.support().count(),
            saturated_support_size: sat.game.support().count(),
            full_support: sat.game.support_set() == full_support(&part),
            passes_used: sat.passes_used,
            t_prime: sat.transforms_applied,
            connected: connectivity(&sat.game).is_connected(),
            chain_holds: power_of_two_le(&value, squarings, &saturated_value),
            below_one_agrees: (saturated_value < one) == (value < one),
            value,
            saturated_value,
        });
    }
    Ok(PipelineReport {
        game: name.to_string(),
        components,
        elapsed: started.elapsed(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayMethod {
    Exact,
    LocalSearch,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecayKind {
    Exact,
    LowerBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayPoint {
    pub n: usize,
    pub kind: DecayKind,
    pub value: Rational,
    pub note: String,
}

pub const DECAY_HEADER: &str = "n,kind,num,den,approx,note";

pub fn decay_csv(points: &[DecayPoint]) -> String {
    let mut out = format!("{DECAY_HEADER}\n");
    for pt in points {
        let kind = match pt.kind {
            DecayKind::Exact => "exact",
            DecayKind::LowerBound => "lower_bound",
        };
        let approx = num_traits::ToPrimitive::to_f64(&pt.value).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{:.9},{}\n",
            pt.n,
            kind,
            pt.value.numer(),
            pt.value.denom(),
            approx,
            pt.note
        ));
    }
    out
}

/// Values of `G^n` for `n = 1..=n_max`: exact where the budget allows,
/// seeded local-search lower bounds otherwise (or everywhere for
/// [`DecayMethod::LocalSearch`]).
pub fn decay_curve(
    game: &Game,
    n_max: usize,
    method: DecayMethod,
    seed: u64,
    iterations: usize,
    budget: u128,
) -> Result<Vec<DecayPoint>> {
    let mut points = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let rep = game.repeated(n)?;
        let mut note = String::new();
        if method == DecayMethod::Exact {
            match rep.exact_value(budget) {
                Ok(s) => {
                    points.push(DecayPoint {
                        n,
                        kind: DecayKind::Exact,
                        value: s.value,
                        note,
                    });
                    continue;
                }
                Err(Error::BudgetExceeded { size, budget }) => {
                    note = format!("budget exceeded: {size} strategies > {budget}");
                }
                Err(e) => return Err(e),
            }
        }
        let lb = match rep.local_search_from_tensor(budget, seed, iterations) {
            Ok(lb) => lb,
            Err(Error::BudgetExceeded { .. }) => rep.local_search_value(None, seed, iterations),
            Err(e) => return Err(e),
        };
        if !note.is_empty() {
            note.push_str("; ");
        }
        note.push_str(&format!("local search seed {seed}, {} restarts", lb.restarts));
        points.push(DecayPoint {
            n,
            kind: DecayKind::LowerBound,
            value: lb.value,
            note,
        });
    }
    Ok(points)
}

/// Strategy-space ceiling for the `n = 2` checks in [`verify_suite`].
pub const SUITE_REPEAT_LIMIT: u128 = 1 << 24;

fn space(game: &Game, n: usize) -> BigUint {
    if n == 1 {
        game.strategy_space()
    } else {
        game.repeated(n).map(|r| r.strategy_space()).unwrap_or_default()
    }
}

enum Task {
    Link(usize, usize),
    Path(usize, PathMode),
    Transform(usize, usize, usize),
    Monotone,
    Pipeline,
}

fn plan(name: &str, g: &Game, budget: u128, tasks: &mut Vec<(String, Game, Task)>) -> Result<()> {
    let small = |n: usize, limit: u128| space(g, n) <= BigUint::from(limit.min(budget));
    let mut push = |task| tasks.push((name.to_string(), g.clone(), task));
    let k = g.players();
    for i in 0..k {
        let atoms = g.link_distribution(i)?.atoms.len() as u128;
        for n in 1..=2 {
            if atoms.pow(n as u32) <= 1 << 16 {
                push(Task::Link(i, n));
            }
        }
        if small(1, EXHAUSTIVE_LIMIT) {
            push(Task::Path(i, PathMode::Exhaustive));
        } else if small(1, budget) {
            push(Task::Path(i, PathMode::OptimalOnly));
        }
    }
    if is_projection(g).holds() && small(1, budget) {
        for i in 0..k {
            for p in 0..k {
                let n_max = if (i, p) == (0, 1) && small(2, SUITE_REPEAT_LIMIT) { 2 } else { 1 };
                push(Task::Transform(i, p, n_max));
            }
        }
        push(Task::Pipeline);
    }
    if small(2, SUITE_REPEAT_LIMIT) {
        push(Task::Monotone);
    }
    Ok(())
}

fn run(tasks: Vec<(String, Game, Task)>, budget: u128) -> Result<Vec<VerificationReport>> {
    let results: Vec<Result<Vec<VerificationReport>>> = tasks
        .par_iter()
        .map(|(name, g, task)| match *task {
            Task::Link(i, n) => verify_link_identity(g, name, i, n, budget).map(|r| vec![r]),
            Task::Path(i, mode) => verify_path_bound(g, name, i, mode, budget).map(|r| vec![r]),
            Task::Transform(i, p, n_max) => verify_transform_bounds(g, name, i, p, n_max, budget),
            Task::Monotone => verify_monotonicity(g, name, 2, budget),
            Task::Pipeline => run_theorem_pipeline(g, name, budget).map(|r| r.reports()),
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Every check on one game that fits the budget: link identities, path
/// bounds, transform bounds and the pipeline for projection games, and
/// repetition monotonicity.
pub fn verify_game(game: &Game, name: &str, budget: u128) -> Result<Vec<VerificationReport>> {
    let mut tasks = Vec::new();
    plan(name, game, budget, &mut tasks)?;
    run(tasks, budget)
}

/// [`verify_game`] over every catalog game.
pub fn verify_suite(budget: u128) -> Result<Vec<VerificationReport>> {
    let mut tasks = Vec::new();
    for (name, g) in generators::catalog() {
        plan(name, &g, budget, &mut tasks)?;
    }
    run(tasks, budget)
}

/// `val(G)^n <= val(G^n) <= val(G)`.
pub fn verify_monotonicity(
    game: &Game,
    name: &str,
    n: usize,
    budget: u128,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let v = game.exact_value(budget)?.value;
    let vn = game.repeated(n)?.exact_value(budget)?.value;
    let power = num_traits::pow(v.clone(), n);
    Ok(vec![
        VerificationReport::new(
            "repeat_lower",
            name,
            (None, None, Some(n)),
            vn.clone(),
            Relation::Ge,
            power,
            started,
        ),
        VerificationReport::new(
            "repeat_upper",
            name,
            (None, None, Some(n)),
            vn,
            Relation::Le,
            v,
            started,
        ),
    ])
}
