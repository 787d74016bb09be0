//! Instances, lotteries and the double-peaked cost model.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Peak offsets and base cost shared by all agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostParams {
    b_left: Rational,
    b_right: Rational,
    c: Rational,
}

impl CostParams {
    pub fn new(b_left: Rational, b_right: Rational, c: Rational) -> Result<Self> {
        if !b_left.is_positive() {
            return Err(Error::InvalidParams("b_left must be positive"));
        }
        if !b_right.is_positive() {
            return Err(Error::InvalidParams("b_right must be positive"));
        }
        if !c.is_positive() {
            return Err(Error::InvalidParams("c must be positive"));
        }
        Ok(Self { b_left, b_right, c })
    }

    pub fn symmetric(b: Rational, c: Rational) -> Result<Self> {
        Self::new(b.clone(), b, c)
    }

    pub fn b_left(&self) -> &Rational {
        &self.b_left
    }

    pub fn b_right(&self) -> &Rational {
        &self.b_right
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn is_symmetric(&self) -> bool {
        self.b_left == self.b_right
    }

    /// The common peak offset, if both sides agree.
    pub fn b(&self) -> Option<&Rational> {
        self.is_symmetric().then_some(&self.b_left)
    }

    /// Distance between an agent's two peaks.
    pub fn spread(&self) -> Rational {
        &self.b_left + &self.b_right
    }

    pub fn left_peak(&self, x: &Rational) -> Rational {
        x - &self.b_left
    }

    pub fn right_peak(&self, x: &Rational) -> Rational {
        x + &self.b_right
    }
}

impl fmt::Display for CostParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_symmetric() {
            write!(f, "b={} c={}", self.b_left, self.c)
        } else {
            write!(f, "b_left={} b_right={} c={}", self.b_left, self.b_right, self.c)
        }
    }
}

/// A location profile, sorted, remembering where each agent came from.
///
/// `origin[k]` is the input position (0-based) of the agent in sorted slot
/// `k`. Duplicates keep their input order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    params: CostParams,
    locations: Vec<Rational>,
    origin: Vec<usize>,
}

impl Instance {
    pub fn normalize(raw: Vec<Rational>, params: CostParams) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].cmp(&raw[b]));
        let locations = order.iter().map(|&i| raw[i].clone()).collect();
        Ok(Self {
            params,
            locations,
            origin: order,
        })
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    /// Sorted locations.
    pub fn locations(&self) -> &[Rational] {
        &self.locations
    }

    pub fn origin_index(&self) -> &[usize] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Locations in the order they were reported.
    pub fn raw_locations(&self) -> Vec<Rational> {
        let mut raw = self.locations.clone();
        for (slot, &input) in self.origin.iter().enumerate() {
            raw[input] = self.locations[slot].clone();
        }
        raw
    }

    /// Location of agent `agent`, counted in input order.
    pub fn reported(&self, agent: usize) -> Option<&Rational> {
        let slot = self.origin.iter().position(|&o| o == agent)?;
        Some(&self.locations[slot])
    }

    pub fn first(&self) -> &Rational {
        &self.locations[0]
    }

    pub fn last(&self) -> &Rational {
        &self.locations[self.locations.len() - 1]
    }

    /// Distinct locations with their multiplicities, ascending.
    pub fn distinct(&self) -> Vec<(&Rational, usize)> {
        let mut out: Vec<(&Rational, usize)> = Vec::new();
        for x in &self.locations {
            match out.last_mut() {
                Some((y, count)) if *y == x => *count += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// Same agents, every location moved by `t`.
    pub fn shifted(&self, t: &Rational) -> Self {
        Self {
            params: self.params.clone(),
            locations: self.locations.iter().map(|x| x + t).collect(),
            origin: self.origin.clone(),
        }
    }

    /// The profile after the listed agents (input indices) change their
    /// reports. Identity of every agent is preserved.
    pub fn with_reports<'a, I>(&self, reports: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, &'a Rational)>,
    {
        let mut raw = self.raw_locations();
        for (agent, x) in reports {
            let len = raw.len();
            let slot = raw
                .get_mut(agent)
                .ok_or(Error::IndexOutOfRange { index: agent, len })?;
            *slot = x.clone();
        }
        Self::normalize(raw, self.params.clone())
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} agents=({})",
            self.params,
            crate::rational::Joined(&self.raw_locations(), ", ")
        )
    }
}

/// Finite distribution over facility points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lottery {
    atoms: Vec<(Rational, Rational)>,
}

impl Lottery {
    pub fn point(y: Rational) -> Self {
        Self {
            atoms: alloc::vec![(y, Rational::one())],
        }
    }

    /// Builds a lottery from `(point, probability)` pairs. Equal points are
    /// merged; probabilities must be positive and sum to one.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut atoms: Vec<(Rational, Rational)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidLottery("no atoms"));
        }
        if atoms.iter().any(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidLottery("probabilities must be positive"));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
        for (y, p) in atoms {
            match merged.last_mut() {
                Some((z, q)) if *z == y => *q += p,
                _ => merged.push((y, p)),
            }
        }
        let total: Rational = merged.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(Error::InvalidLottery("probabilities must sum to one"));
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn is_deterministic(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn shifted(&self, t: &Rational) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(y, p)| (y + t, p.clone())).collect(),
        }
    }

    /// Probability-weighted average of `f` over the atoms.
    pub fn expectation<F>(&self, mut f: F) -> Rational
    where
        F: FnMut(&Rational) -> Rational,
    {
        let mut total = Rational::zero();
        for (y, p) in &self.atoms {
            total += f(y) * p;
        }
        total
    }
}

impl fmt::Display for Lottery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [(y, _)] = self.atoms.as_slice() {
            return write!(f, "{y}");
        }
        f.write_str("{")?;
        for (i, (y, p)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{y} w.p. {p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Objective {
    /// Sum of all agents' costs.
    Social,
    /// Largest single agent cost.
    Max,
}

impl Objective {
    pub fn evaluate(self, instance: &Instance, y: &Rational) -> Rational {
        match self {
            Objective::Social => social_cost(instance, y),
            Objective::Max => max_cost(instance, y),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Social => "sc",
            Objective::Max => "mc",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "social" => Ok(Objective::Social),
            "mc" | "max" => Ok(Objective::Max),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown objective {other:?} (expected sc or mc)"
            ))),
        }
    }
}

/// Cost of an agent at `x` when the facility is at `y`.
///
/// `y <= x` is measured against the left peak, `y > x` against the right
/// peak. With unequal offsets the cost jumps by `|b_left - b_right|` just to
/// the right of `x`.
pub fn agent_cost(params: &CostParams, x: &Rational, y: &Rational) -> Rational {
    let peak = if y <= x {
        params.left_peak(x)
    } else {
        params.right_peak(x)
    };
    params.c() + (peak - y).abs()
}

/// Limit of [`agent_cost`] as the facility approaches `y` from the right.
///
/// Differs from `agent_cost` only at `y == x` for asymmetric offsets.
pub fn agent_cost_right_limit(params: &CostParams, x: &Rational, y: &Rational) -> Rational {
    let peak = if y < x {
        params.left_peak(x)
    } else {
        params.right_peak(x)
    };
    params.c() + (peak - y).abs()
}

pub fn social_cost(instance: &Instance, y: &Rational) -> Rational {
    let params = instance.params();
    instance
        .distinct()
        .into_iter()
        .map(|(x, count)| agent_cost(params, x, y) * Rational::from_integer(count.into()))
        .sum()
}

pub fn max_cost(instance: &Instance, y: &Rational) -> Rational {
    let params = instance.params();
    // Only the two extreme agents can attain the maximum, but a full scan
    // keeps this obviously correct.
    instance
        .distinct()
        .into_iter()
        .map(|(x, _)| agent_cost(params, x, y))
        .max()
        .expect("instances are nonempty")
}

pub fn expected_cost(params: &CostParams, x: &Rational, lottery: &Lottery) -> Rational {
    lottery.expectation(|y| agent_cost(params, x, y))
}

pub fn expected_objective(instance: &Instance, lottery: &Lottery, objective: Objective) -> Rational {
    lottery.expectation(|y| objective.evaluate(instance, y))
}
