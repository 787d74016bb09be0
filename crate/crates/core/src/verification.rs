//! Black-box incentive and axiom checks for any [`Mechanism`].
//!
//! The searches are exact but finite: a `None` result means no violation
//! exists among the candidate misreports, not that the mechanism is
//! strategyproof. Every report returned has been re-evaluated from scratch
//! by [`recheck`] before it leaves this module.
//!
//! Agents are identified by their 0-based input position throughout; the
//! human-readable rendering numbers them from 1.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::model::{expected_cost, CostParams, Instance, Lottery};
use crate::rational::{int, Joined, Rational};

/// Mechanism evaluations allowed in one coalition search.
pub const DEFAULT_COALITION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Unilateral,
    Coalition,
    Anonymity,
    PositionInvariance,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::Unilateral => "unilateral",
            ViolationKind::Coalition => "coalition",
            ViolationKind::Anonymity => "anonymity",
            ViolationKind::PositionInvariance => "position_invariance",
        }
    }
}

/// A profitable misreport by one agent or a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub deviators: Vec<usize>,
    pub misreports: BTreeMap<usize, Rational>,
    /// Expected true cost under truthful reporting.
    pub cost_before: BTreeMap<usize, Rational>,
    /// Expected true cost after the misreport.
    pub cost_after: BTreeMap<usize, Rational>,
    pub outcome_before: Lottery,
    pub outcome_after: Lottery,
}

/// Two runs of the mechanism whose outcomes should have agreed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMismatch {
    /// Reports handed to the mechanism in the second run, in input order.
    pub reports: Vec<Rational>,
    /// Translation applied for the second run, if any.
    pub shift: Option<Rational>,
    pub expected: Lottery,
    pub observed: Lottery,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    Deviation(Deviation),
    Outcomes(OutcomeMismatch),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationReport {
    pub kind: ViolationKind,
    pub mechanism: String,
    pub instance: Instance,
    pub evidence: Evidence,
}

impl ViolationReport {
    pub fn deviation(&self) -> Option<&Deviation> {
        match &self.evidence {
            Evidence::Deviation(d) => Some(d),
            Evidence::Outcomes(_) => None,
        }
    }

    pub fn mismatch(&self) -> Option<&OutcomeMismatch> {
        match &self.evidence {
            Evidence::Outcomes(m) => Some(m),
            Evidence::Deviation(_) => None,
        }
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "violation: {} ({})", self.kind.as_str(), self.mechanism)?;
        writeln!(f, "  instance: {}", self.instance)?;
        match &self.evidence {
            Evidence::Deviation(d) => {
                for agent in &d.deviators {
                    let truth = self.instance.reported(*agent).expect("deviator exists");
                    writeln!(
                        f,
                        "  agent {}: true {} reports {}; expected cost {} -> {}",
                        agent + 1,
                        truth,
                        d.misreports[agent],
                        d.cost_before[agent],
                        d.cost_after[agent],
                    )?;
                }
                write!(f, "  outcome: {} -> {}", d.outcome_before, d.outcome_after)
            }
            Evidence::Outcomes(m) => {
                match &m.shift {
                    Some(t) => writeln!(f, "  shift: {t}")?,
                    None => writeln!(f, "  permuted reports: ({})", Joined(&m.reports, ", "))?,
                }
                write!(f, "  expected outcome: {}\n  observed outcome: {}", m.expected, m.observed)
            }
        }
    }
}

/// Misreports tried for one agent: a structured set of points derived from
/// the instance plus a uniform grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub structured: BTreeSet<Rational>,
    pub grid_lo: Rational,
    pub grid_hi: Rational,
    pub grid_step: Rational,
}

impl CandidateSet {
    pub fn grid_points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut y = self.grid_lo.clone();
        while y <= self.grid_hi {
            out.push(y.clone());
            y += &self.grid_step;
        }
        out
    }

    /// Structured points and grid points, ascending and deduplicated.
    pub fn all(&self) -> BTreeSet<Rational> {
        let mut out = self.structured.clone();
        out.extend(self.grid_points());
        out
    }
}

pub fn deviation_candidates(instance: &Instance, agent: usize) -> Result<CandidateSet> {
    let len = instance.len();
    if agent >= len {
        return Err(Error::IndexOutOfRange { index: agent, len });
    }
    let params = instance.params();
    let (bl, br) = (params.b_left(), params.b_right());
    let spread = params.spread();
    let two = int(2);
    let mut offsets = alloc::vec![int(0)];
    for d in [bl.clone(), br.clone(), spread.clone(), bl * &two, br * &two] {
        offsets.push(-d.clone());
        offsets.push(d);
    }
    let eps = &spread / int(1000);
    let mut structured = BTreeSet::new();
    for (x, _) in instance.distinct() {
        for d in &offsets {
            let p = x + d;
            structured.insert(&p - &eps);
            structured.insert(&p + &eps);
            structured.insert(p);
        }
    }
    let margin = &spread * int(3);
    Ok(CandidateSet {
        structured,
        grid_lo: instance.first() - &margin,
        grid_hi: instance.last() + &margin,
        grid_step: spread / int(32),
    })
}

fn true_location(instance: &Instance, agent: usize) -> Result<&Rational> {
    instance.reported(agent).ok_or(Error::IndexOutOfRange {
        index: agent,
        len: instance.len(),
    })
}

/// Evaluates a specific joint misreport and returns a certificate if it is
/// profitable: nobody in the group is worse off and someone is strictly
/// better off (for a single agent: strictly better off).
pub fn check_deviation<M: Mechanism>(
    mech: &M,
    instance: &Instance,
    misreports: &BTreeMap<usize, Rational>,
) -> Result<Option<ViolationReport>> {
    let before = mech.apply(instance)?;
    let report = evaluate_deviation(mech, instance, &before, misreports)?;
    Ok(report.filter(|r| is_profitable(r.deviation().expect("deviation evidence"))))
}

fn evaluate_deviation<M: Mechanism>(
    mech: &M,
    instance: &Instance,
    before: &Lottery,
    misreports: &BTreeMap<usize, Rational>,
) -> Result<Option<ViolationReport>> {
    if misreports.is_empty() {
        return Ok(None);
    }
    let deviated = instance.with_reports(misreports.iter().map(|(a, x)| (*a, x)))?;
    let after = mech.apply(&deviated)?;
    let params = instance.params();
    let mut cost_before = BTreeMap::new();
    let mut cost_after = BTreeMap::new();
    for &agent in misreports.keys() {
        let x = true_location(instance, agent)?;
        cost_before.insert(agent, expected_cost(params, x, before));
        cost_after.insert(agent, expected_cost(params, x, &after));
    }
    let kind = if misreports.len() == 1 {
        ViolationKind::Unilateral
    } else {
        ViolationKind::Coalition
    };
    Ok(Some(ViolationReport {
        kind,
        mechanism: mech.name(),
        instance: instance.clone(),
        evidence: Evidence::Deviation(Deviation {
            deviators: misreports.keys().copied().collect(),
            misreports: misreports.clone(),
            cost_before,
            cost_after,
            outcome_before: before.clone(),
            outcome_after: after,
        }),
    }))
}

fn is_profitable(d: &Deviation) -> bool {
    let mut strict = false;
    for agent in &d.deviators {
        let (b, a) = (&d.cost_before[agent], &d.cost_after[agent]);
        if a > b {
            return false;
        }
        strict |= a < b;
    }
    strict
}

/// Searches for a single agent who gains by misreporting.
///
/// Agents are tried in input order. For the first agent that can gain, the
/// misreport with the lowest resulting cost is returned, ties going to the
/// smallest misreport. Costs are expectations over the mechanism's lottery,
/// always evaluated at the agent's true location.
pub fn find_sp_violation<M: Mechanism>(mech: &M, instance: &Instance) -> Result<Option<ViolationReport>> {
    let truthful = mech.apply(instance)?;
    let params = instance.params();
    for agent in 0..instance.len() {
        let x = true_location(instance, agent)?;
        let before = expected_cost(params, x, &truthful);
        let mut best: Option<(Rational, Rational)> = None;
        for candidate in deviation_candidates(instance, agent)?.all() {
            if &candidate == x {
                continue;
            }
            let deviated = instance.with_reports([(agent, &candidate)])?;
            let after = expected_cost(params, x, &mech.apply(&deviated)?);
            let current = best.as_ref().map_or(&before, |(_, c)| c);
            if after < *current {
                best = Some((candidate, after));
            }
        }
        if let Some((misreport, _)) = best {
            let misreports = BTreeMap::from([(agent, misreport)]);
            let report = evaluate_deviation(mech, instance, &truthful, &misreports)?
                .expect("nonempty misreport");
            return certified(mech, report).map(Some);
        }
    }
    Ok(None)
}

pub fn find_gsp_violation<M: Mechanism>(
    mech: &M,
    instance: &Instance,
    max_coalition: usize,
) -> Result<Option<ViolationReport>> {
    find_gsp_violation_with_budget(mech, instance, max_coalition, DEFAULT_COALITION_BUDGET)
}

/// Searches coalitions of size `1..=max_coalition` for a joint misreport
/// that leaves no member worse off and some member strictly better off.
///
/// Coalitions are visited by size, then lexicographically. Each member
/// draws from its truthful report followed by the structured candidate
/// points in ascending order; joint profiles are enumerated
/// lexicographically and the first profitable one is returned. Exceeding
/// `budget` mechanism evaluations is an error, distinct from `Ok(None)`.
pub fn find_gsp_violation_with_budget<M: Mechanism>(
    mech: &M,
    instance: &Instance,
    max_coalition: usize,
    budget: u64,
) -> Result<Option<ViolationReport>> {
    let n = instance.len();
    if max_coalition == 0 || max_coalition > n {
        return Err(Error::InvalidArgument(format!(
            "coalition size must be between 1 and {n}, got {max_coalition}"
        )));
    }
    let truthful = mech.apply(instance)?;
    let params = instance.params();
    let mut before = Vec::with_capacity(n);
    let mut options: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for agent in 0..n {
        let x = true_location(instance, agent)?;
        before.push(expected_cost(params, x, &truthful));
        let mut list = alloc::vec![x.clone()];
        list.extend(
            deviation_candidates(instance, agent)?
                .structured
                .into_iter()
                .filter(|y| y != x),
        );
        options.push(list);
    }

    let mut evaluations: u64 = 0;
    for size in 1..=max_coalition {
        let mut members: Vec<usize> = (0..size).collect();
        loop {
            let mut digits = alloc::vec![0usize; size];
            loop {
                if digits.iter().any(|&d| d != 0) {
                    if evaluations >= budget {
                        return Err(Error::SearchBudgetExceeded { budget });
                    }
                    evaluations += 1;
                    let reports: Vec<(usize, &Rational)> = members
                        .iter()
                        .zip(&digits)
                        .map(|(&a, &d)| (a, &options[a][d]))
                        .collect();
                    let outcome = mech.apply(&instance.with_reports(reports.iter().copied())?)?;
                    let mut strict = false;
                    let mut worse = false;
                    for &a in &members {
                        let after = expected_cost(params, &options[a][0], &outcome);
                        worse |= after > before[a];
                        strict |= after < before[a];
                    }
                    if strict && !worse {
                        let misreports = reports.into_iter().map(|(a, x)| (a, x.clone())).collect();
                        let mut report = evaluate_deviation(mech, instance, &truthful, &misreports)?
                            .expect("nonempty coalition");
                        // The coalition is the one searched, even when some
                        // members keep their truthful report.
                        report.kind = if size == 1 {
                            ViolationKind::Unilateral
                        } else {
                            ViolationKind::Coalition
                        };
                        return certified(mech, report).map(Some);
                    }
                }
                if !advance_odometer(&mut digits, members.iter().map(|&a| options[a].len())) {
                    break;
                }
            }
            if !next_combination(&mut members, n) {
                break;
            }
        }
    }
    Ok(None)
}

fn advance_odometer<I: Iterator<Item = usize>>(digits: &mut [usize], radices: I) -> bool {
    let radices: Vec<usize> = radices.collect();
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < radices[pos] {
            return true;
        }
        digits[pos] = 0;
    }
    false
}

fn next_combination(members: &mut [usize], n: usize) -> bool {
    let k = members.len();
    for pos in (0..k).rev() {
        if members[pos] < n - k + pos {
            members[pos] += 1;
            for next in pos + 1..k {
                members[next] = members[next - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Compares the mechanism's outcome across reorderings of the raw reports.
///
/// Up to eight agents every permutation is tried; above that a fixed set of
/// rotations, the reversal and all adjacent transpositions.
pub fn check_anonymity<M: Mechanism>(
    mech: &M,
    raw: &[Rational],
    params: &CostParams,
) -> Result<Option<ViolationReport>> {
    let base = Instance::normalize(raw.to_vec(), params.clone())?;
    let expected = mech.apply(&base)?;
    for perm in permutations(raw.len()) {
        let reports: Vec<Rational> = perm.iter().map(|&i| raw[i].clone()).collect();
        let permuted = Instance::normalize(reports.clone(), params.clone())?;
        let observed = mech.apply(&permuted)?;
        if observed != expected {
            let report = ViolationReport {
                kind: ViolationKind::Anonymity,
                mechanism: mech.name(),
                instance: base,
                evidence: Evidence::Outcomes(OutcomeMismatch {
                    reports,
                    shift: None,
                    expected,
                    observed,
                }),
            };
            return certified(mech, report).map(Some);
        }
    }
    Ok(None)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    if n <= 8 {
        let mut out = Vec::new();
        let mut perm = identity;
        loop {
            out.push(perm.clone());
            if !next_permutation(&mut perm) {
                return out;
            }
        }
    }
    let mut out = Vec::new();
    for r in 1..n {
        let mut p = identity.clone();
        p.rotate_left(r);
        out.push(p);
    }
    let mut rev = identity.clone();
    rev.reverse();
    out.push(rev);
    for i in 0..n - 1 {
        let mut p = identity.clone();
        p.swap(i, i + 1);
        out.push(p);
    }
    out
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).expect("pivot exists");
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Checks `f(x + t) = f(x) + t` for every shift `t`.
pub fn check_position_invariance<M: Mechanism>(
    mech: &M,
    instance: &Instance,
    shifts: &[Rational],
) -> Result<Option<ViolationReport>> {
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("at least one shift is required".into()));
    }
    let base = mech.apply(instance)?;
    for t in shifts {
        let moved = instance.shifted(t);
        let expected = base.shifted(t);
        let observed = mech.apply(&moved)?;
        if observed != expected {
            let report = ViolationReport {
                kind: ViolationKind::PositionInvariance,
                mechanism: mech.name(),
                instance: instance.clone(),
                evidence: Evidence::Outcomes(OutcomeMismatch {
                    reports: moved.raw_locations(),
                    shift: Some(t.clone()),
                    expected,
                    observed,
                }),
            };
            return certified(mech, report).map(Some);
        }
    }
    Ok(None)
}

/// Re-evaluates a report from scratch and confirms it is a genuine
/// violation with exactly the recorded numbers.
pub fn recheck<M: Mechanism>(mech: &M, report: &ViolationReport) -> Result<bool> {
    let instance = &report.instance;
    match &report.evidence {
        Evidence::Deviation(d) => {
            let before = mech.apply(instance)?;
            let Some(fresh) = evaluate_deviation(mech, instance, &before, &d.misreports)? else {
                return Ok(false);
            };
            let fresh = fresh.deviation().expect("deviation evidence").clone();
            let kind_ok = match report.kind {
                ViolationKind::Unilateral => d.deviators.len() == 1,
                ViolationKind::Coalition => !d.deviators.is_empty(),
                _ => false,
            };
            Ok(kind_ok && fresh == *d && is_profitable(&fresh))
        }
        Evidence::Outcomes(m) => {
            let observed = match (&report.kind, &m.shift) {
                (ViolationKind::PositionInvariance, Some(t)) => {
                    if m.expected != mech.apply(instance)?.shifted(t) {
                        return Ok(false);
                    }
                    mech.apply(&instance.shifted(t))?
                }
                (ViolationKind::Anonymity, None) => {
                    if m.expected != mech.apply(instance)? {
                        return Ok(false);
                    }
                    let mut sorted_reports = m.reports.clone();
                    sorted_reports.sort();
                    if sorted_reports != instance.locations() {
                        return Ok(false);
                    }
                    mech.apply(&Instance::normalize(m.reports.clone(), instance.params().clone())?)?
                }
                _ => return Ok(false),
            };
            Ok(observed == m.observed && observed != m.expected)
        }
    }
}

fn certified<M: Mechanism>(mech: &M, report: ViolationReport) -> Result<ViolationReport> {
    if recheck(mech, &report)? {
        Ok(report)
    } else {
        Err(Error::RecheckFailed)
    }
}

/// Deliberately flawed mechanisms for testing the checkers themselves.
pub mod fixtures {
    use alloc::string::String;

    use crate::error::Result;
    use crate::mechanisms::Mechanism;
    use crate::model::{Instance, Lottery};
    use crate::rational::int;

    /// Always places the facility at 0. Strategyproof and anonymous, but not
    /// position invariant.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct ConstantZero;

    impl Mechanism for ConstantZero {
        fn name(&self) -> String {
            "constant-zero".into()
        }

        fn apply(&self, _instance: &Instance) -> Result<Lottery> {
            Ok(Lottery::point(int(0)))
        }
    }

    /// Left peak of whoever reported first. Position invariant, but not
    /// anonymous.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct FirstReportDictator;

    impl Mechanism for FirstReportDictator {
        fn name(&self) -> String {
            "first-report-dictator".into()
        }

        fn apply(&self, instance: &Instance) -> Result<Lottery> {
            let first = instance.reported(0).expect("instances are nonempty");
            Ok(Lottery::point(instance.params().left_peak(first)))
        }
    }
}
