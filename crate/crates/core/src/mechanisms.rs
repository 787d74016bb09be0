//! Mechanisms: rules mapping a reported profile to a facility lottery.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Instance, Lottery};
use crate::optimal::{optimal_max, optimal_social};
use crate::rational::{ratio, Rational};

/// A rule that turns a reported profile into a (possibly random) outcome.
///
/// Implementations must be deterministic functions of the instance.
pub trait Mechanism {
    fn name(&self) -> String;
    fn apply(&self, instance: &Instance) -> Result<Lottery>;
}

impl<M: Mechanism + ?Sized> Mechanism for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn apply(&self, instance: &Instance) -> Result<Lottery> {
        (**self).apply(instance)
    }
}

impl<M: Mechanism + ?Sized> Mechanism for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn apply(&self, instance: &Instance) -> Result<Lottery> {
        (**self).apply(instance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// 1-based position of the median agent in the sorted profile, ties going
/// to the smaller index.
pub fn median_index(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    Ok(n.div_ceil(2))
}

fn median(instance: &Instance) -> &Rational {
    let k = median_index(instance.len()).expect("instances are nonempty");
    &instance.locations()[k - 1]
}

/// Median-peak lottery: the median agent's two peaks, each with
/// probability one half.
pub fn m1(instance: &Instance) -> Lottery {
    let params = instance.params();
    let xm = median(instance);
    let half = ratio(1, 2);
    Lottery::from_atoms([(params.left_peak(xm), half.clone()), (params.right_peak(xm), half)])
        .expect("peaks are distinct since offsets are positive")
}

/// Left peak of the leftmost agent, or right peak of the rightmost one.
pub fn m2(instance: &Instance, side: Side) -> Lottery {
    let params = instance.params();
    Lottery::point(match side {
        Side::Left => params.left_peak(instance.first()),
        Side::Right => params.right_peak(instance.last()),
    })
}

/// One peak of the `k`-th smallest report (`k` is 1-based).
pub fn kth_peak(instance: &Instance, k: usize, side: Side) -> Result<Lottery> {
    let len = instance.len();
    if k == 0 || k > len {
        return Err(Error::IndexOutOfRange { index: k, len });
    }
    let params = instance.params();
    let x = &instance.locations()[k - 1];
    Ok(Lottery::point(match side {
        Side::Left => params.left_peak(x),
        Side::Right => params.right_peak(x),
    }))
}

pub fn opt_sc_mech(instance: &Instance) -> Lottery {
    Lottery::point(optimal_social(instance).location)
}

pub fn opt_mc_mech(instance: &Instance) -> Lottery {
    Lottery::point(optimal_max(instance).location)
}

/// The named mechanisms shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinMechanism {
    M1,
    M2(Side),
    KthPeak { k: usize, side: Side },
    OptSocial,
    OptMax,
}

impl Mechanism for BuiltinMechanism {
    fn name(&self) -> String {
        self.to_string()
    }

    fn apply(&self, instance: &Instance) -> Result<Lottery> {
        Ok(match *self {
            BuiltinMechanism::M1 => m1(instance),
            BuiltinMechanism::M2(side) => m2(instance, side),
            BuiltinMechanism::KthPeak { k, side } => kth_peak(instance, k, side)?,
            BuiltinMechanism::OptSocial => opt_sc_mech(instance),
            BuiltinMechanism::OptMax => opt_mc_mech(instance),
        })
    }
}

impl fmt::Display for BuiltinMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinMechanism::M1 => f.write_str("m1"),
            BuiltinMechanism::M2(side) => write!(f, "m2-{}", side.as_str()),
            BuiltinMechanism::KthPeak { k, side } => write!(f, "kth-{}:{k}", side.as_str()),
            BuiltinMechanism::OptSocial => f.write_str("opt-sc"),
            BuiltinMechanism::OptMax => f.write_str("opt-mc"),
        }
    }
}

impl FromStr for BuiltinMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::InvalidArgument(format!("unknown mechanism {s:?}"));
        Ok(match s {
            "m1" => BuiltinMechanism::M1,
            "m2-left" => BuiltinMechanism::M2(Side::Left),
            "m2-right" => BuiltinMechanism::M2(Side::Right),
            "opt-sc" => BuiltinMechanism::OptSocial,
            "opt-mc" => BuiltinMechanism::OptMax,
            _ => {
                let (head, k) = s.split_once(':').ok_or_else(unknown)?;
                let side = match head {
                    "kth-left" => Side::Left,
                    "kth-right" => Side::Right,
                    _ => return Err(unknown()),
                };
                let k = k
                    .parse::<usize>()
                    .ok()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad order statistic in {s:?}")))?;
                BuiltinMechanism::KthPeak { k, side }
            }
        })
    }
}
