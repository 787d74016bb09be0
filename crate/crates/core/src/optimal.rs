//! Exact minimization of the social and maximum cost over the real line.
//!
//! Every agent cost is piecewise linear with slopes of ±1 and kinks only at
//! `x - b_left`, `x` and `x + b_right`. The social cost is therefore
//! minimized at one of those kinks. The maximum cost is an upper envelope of
//! unit-slope pieces, so its local minima sit either at a kink or where a
//! falling piece meets a rising one, which is always the midpoint of two
//! peaks. Enumerating those finite candidate sets gives the exact optimum.
//!
//! With unequal peak offsets the cost is discontinuous just right of every
//! agent; the objective is left-continuous, so the only values that can be
//! approached but not attained are the right-hand limits at the agents'
//! locations. Those are probed separately and reported in
//! [`OptResult::right_limit`].

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{agent_cost_right_limit, Instance, Objective};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    /// Leftmost examined point achieving `value`.
    pub location: Rational,
    pub value: Rational,
    pub candidates_examined: usize,
    /// `(x, v)` when the objective tends to `v < value` as the facility
    /// approaches agent location `x` from the right. Only possible with
    /// asymmetric peaks; always `None` otherwise.
    pub right_limit: Option<(Rational, Rational)>,
}

pub fn sc_candidates(instance: &Instance) -> BTreeSet<Rational> {
    let params = instance.params();
    let mut out = BTreeSet::new();
    for (x, _) in instance.distinct() {
        out.insert(params.left_peak(x));
        out.insert(x.clone());
        out.insert(params.right_peak(x));
    }
    out
}

pub fn mc_candidates(instance: &Instance) -> BTreeSet<Rational> {
    let params = instance.params();
    let mut peaks = BTreeSet::new();
    for (x, _) in instance.distinct() {
        peaks.insert(params.left_peak(x));
        peaks.insert(params.right_peak(x));
    }
    let peaks: Vec<Rational> = peaks.into_iter().collect();
    let two = int(2);
    let mut out = sc_candidates(instance);
    for (i, p) in peaks.iter().enumerate() {
        for q in &peaks[i + 1..] {
            out.insert((p + q) / &two);
        }
    }
    out
}

pub fn optimal_social(instance: &Instance) -> OptResult {
    minimize(instance, Objective::Social, sc_candidates(instance))
}

pub fn optimal_max(instance: &Instance) -> OptResult {
    minimize(instance, Objective::Max, mc_candidates(instance))
}

pub fn optimal(instance: &Instance, objective: Objective) -> OptResult {
    match objective {
        Objective::Social => optimal_social(instance),
        Objective::Max => optimal_max(instance),
    }
}

/// Leftmost minimizer over an explicit candidate set.
pub fn minimize<I>(instance: &Instance, objective: Objective, candidates: I) -> OptResult
where
    I: IntoIterator<Item = Rational>,
{
    let mut best: Option<(Rational, Rational)> = None;
    let mut examined = 0;
    let mut sorted: Vec<Rational> = candidates.into_iter().collect();
    sorted.sort();
    for y in sorted {
        examined += 1;
        let v = objective.evaluate(instance, &y);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((y, v));
        }
    }
    let (location, value) = best.expect("candidate set is never empty");
    let right_limit = if instance.params().is_symmetric() {
        None
    } else {
        lowest_right_limit(instance, objective).filter(|(_, v)| *v < value)
    };
    OptResult {
        location,
        value,
        candidates_examined: examined,
        right_limit,
    }
}

fn lowest_right_limit(instance: &Instance, objective: Objective) -> Option<(Rational, Rational)> {
    let params = instance.params();
    let distinct = instance.distinct();
    let mut best: Option<(Rational, Rational)> = None;
    for (y, _) in &distinct {
        let costs = distinct.iter().map(|(x, count)| {
            let cost = agent_cost_right_limit(params, x, y);
            (cost, *count)
        });
        let v = match objective {
            Objective::Social => costs
                .map(|(cost, count)| cost * Rational::from_integer(count.into()))
                .sum(),
            Objective::Max => costs.map(|(cost, _)| cost).max()?,
        };
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some(((*y).clone(), v));
        }
    }
    best
}

/// Grid bounds wide enough to contain every optimum, with a step fine enough
/// that a grid minimum is within one step of the true one.
pub fn default_grid(instance: &Instance) -> (Rational, Rational, Rational) {
    let spread = instance.params().spread();
    let margin = &spread * int(3);
    (
        instance.first() - &margin,
        instance.last() + &margin,
        spread / int(64),
    )
}

/// Evaluates the objective at `lo, lo + step, ...` up to `hi` and returns
/// the leftmost grid minimizer. Used only as an oracle.
pub fn grid_scan(
    instance: &Instance,
    objective: Objective,
    lo: &Rational,
    hi: &Rational,
    step: &Rational,
) -> Result<OptResult> {
    if lo >= hi {
        return Err(Error::InvalidRange("lo must be below hi"));
    }
    if !step.is_positive() {
        return Err(Error::InvalidRange("step must be positive"));
    }
    let mut best: Option<(Rational, Rational)> = None;
    let mut examined = 0;
    let mut y = lo.clone();
    while &y <= hi {
        examined += 1;
        let v = objective.evaluate(instance, &y);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((y.clone(), v));
        }
        y += step;
    }
    let (location, value) = best.expect("grid contains lo");
    Ok(OptResult {
        location,
        value,
        candidates_examined: examined,
        right_limit: None,
    })
}

/// True when `value` is within `tolerance` above `reference` (never below).
pub fn within_above(value: &Rational, reference: &Rational, tolerance: &Rational) -> bool {
    let gap = value - reference;
    !gap.is_negative() && (gap.is_zero() || &gap <= tolerance)
}
