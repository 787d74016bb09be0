//! Adversarial instance families and approximation-ratio measurements.
//!
//! Every generator puts its leftmost agent at 0; all objectives are
//! translation invariant, so nothing is lost.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mechanisms::{median_index, Mechanism};
use crate::model::{expected_objective, CostParams, Instance, Objective};
use crate::optimal::optimal;
use crate::rational::{int, parse, ratio, Rational};
use crate::verification::{find_sp_violation, ViolationReport};

fn symmetric_b(params: &CostParams) -> Result<&Rational> {
    params.b().ok_or(Error::NonSymmetricParams)
}

fn positive(value: &Rational, what: &str) -> Result<()> {
    if value.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive, got {value}")))
    }
}

fn repeated(parts: &[(Rational, usize)], params: &CostParams) -> Result<Instance> {
    let raw = parts
        .iter()
        .flat_map(|(x, count)| core::iter::repeat_n(x.clone(), *count))
        .collect();
    Instance::normalize(raw, params.clone())
}

/// Two agents whose inner peaks are `b + eps` apart: `(0, 3b + eps)`.
pub fn gen_primary(params: &CostParams, eps: &Rational) -> Result<Instance> {
    let b = symmetric_b(params)?;
    positive(eps, "eps")?;
    repeated(&[(int(0), 1), (b * int(3) + eps, 1)], params)
}

/// `k - 1` agents at 0, one at `b`, the rest at `2b`, where `k` is the
/// median index.
pub fn gen_sc_lb(n: usize, params: &CostParams) -> Result<Instance> {
    let b = symmetric_b(params)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!("sc-lb needs n >= 3, got {n}")));
    }
    let k = median_index(n)?;
    repeated(&[(int(0), k - 1), (b.clone(), 1), (b * int(2), n - k)], params)
}

/// One agent at 0 and `n - 1` agents at `2(b + d)`; the max-cost optimum
/// sits `d` beyond the first agent's right peak.
pub fn gen_m1_mc_lb(n: usize, params: &CostParams, d: &Rational) -> Result<Instance> {
    let b = symmetric_b(params)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("m1-mc-lb needs n >= 2, got {n}")));
    }
    positive(d, "d")?;
    repeated(&[(int(0), 1), ((b + d) * int(2), n - 1)], params)
}

/// One agent at 0 and `n - 1` agents stacked at `spread`.
pub fn gen_m2_sc_worst(n: usize, params: &CostParams, spread: &Rational) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("m2-sc-worst needs n >= 2, got {n}")));
    }
    positive(spread, "spread")?;
    repeated(&[(int(0), 1), (spread.clone(), n - 1)], params)
}

/// `(0, 2b)`: the two inner peaks coincide.
pub fn gen_m2_mc_tight(params: &CostParams) -> Result<Instance> {
    let b = symmetric_b(params)?;
    repeated(&[(int(0), 1), (b * int(2), 1)], params)
}

/// Half the agents at 0, half at `2b`.
pub fn gen_even_lb(n: usize, params: &CostParams) -> Result<Instance> {
    let b = symmetric_b(params)?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("even-lb needs an even n >= 2, got {n}")));
    }
    repeated(&[(int(0), n / 2), (b * int(2), n / 2)], params)
}

/// `(-2b + eps, 0, 3b)` with `0 < eps < b`: the first agent's right peak
/// overlaps the second agent's left peak by `eps`.
pub fn gen_opt_not_sp(params: &CostParams, eps: &Rational) -> Result<Instance> {
    let b = symmetric_b(params)?;
    positive(eps, "eps")?;
    if eps >= b {
        return Err(Error::InvalidArgument(format!("opt-not-sp needs eps < b, got eps={eps}")));
    }
    repeated(
        &[(eps - b * int(2), 1), (int(0), 1), (b * int(3), 1)],
        params,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Primary,
    ScLowerBound,
    M1MaxLowerBound,
    M2SocialWorst,
    M2MaxTight,
    EvenLowerBound,
    OptNotSp,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Primary,
        Family::ScLowerBound,
        Family::M1MaxLowerBound,
        Family::M2SocialWorst,
        Family::M2MaxTight,
        Family::EvenLowerBound,
        Family::OptNotSp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Family::Primary => "primary",
            Family::ScLowerBound => "sc-lb",
            Family::M1MaxLowerBound => "m1-mc-lb",
            Family::M2SocialWorst => "m2-sc-worst",
            Family::M2MaxTight => "m2-mc-tight",
            Family::EvenLowerBound => "even-lb",
            Family::OptNotSp => "opt-not-sp",
        }
    }

    /// Which of the [`FamilyArgs`] fields the family reads.
    pub fn uses(self) -> &'static [GridAxis] {
        match self {
            Family::Primary | Family::OptNotSp => &[GridAxis::Eps],
            Family::ScLowerBound | Family::EvenLowerBound => &[GridAxis::N],
            Family::M1MaxLowerBound => &[GridAxis::N, GridAxis::D],
            Family::M2SocialWorst => &[GridAxis::N, GridAxis::Spread],
            Family::M2MaxTight => &[],
        }
    }

    pub fn generate(self, params: &CostParams, args: &FamilyArgs) -> Result<Instance> {
        match self {
            Family::Primary => gen_primary(params, &args.eps),
            Family::ScLowerBound => gen_sc_lb(args.n, params),
            Family::M1MaxLowerBound => gen_m1_mc_lb(args.n, params, &args.d),
            Family::M2SocialWorst => gen_m2_sc_worst(args.n, params, &args.spread),
            Family::M2MaxTight => gen_m2_mc_tight(params),
            Family::EvenLowerBound => gen_even_lb(args.n, params),
            Family::OptNotSp => gen_opt_not_sp(params, &args.eps),
        }
    }

    /// `key=value` pairs describing one generated instance.
    pub fn describe(self, params: &CostParams, args: &FamilyArgs) -> String {
        let mut parts: Vec<String> = Vec::new();
        match params.b() {
            Some(b) => parts.push(format!("b={b}")),
            None => {
                parts.push(format!("b_left={}", params.b_left()));
                parts.push(format!("b_right={}", params.b_right()));
            }
        }
        parts.push(format!("c={}", params.c()));
        for axis in self.uses() {
            let value = match axis {
                GridAxis::N => args.n.to_string(),
                GridAxis::Eps => args.eps.to_string(),
                GridAxis::D => args.d.to_string(),
                GridAxis::Spread => args.spread.to_string(),
                GridAxis::B | GridAxis::C => continue,
            };
            parts.push(format!("{}={value}", axis.key()));
        }
        parts.join(";")
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?}")))
    }
}

/// Family parameters not carried by [`CostParams`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyArgs {
    pub n: usize,
    pub eps: Rational,
    pub d: Rational,
    pub spread: Rational,
}

impl Default for FamilyArgs {
    fn default() -> Self {
        Self {
            n: 4,
            eps: ratio(1, 10),
            d: int(1),
            spread: int(1000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridAxis {
    N,
    Eps,
    D,
    Spread,
    B,
    C,
}

impl GridAxis {
    pub fn key(self) -> &'static str {
        match self {
            GridAxis::N => "n",
            GridAxis::Eps => "eps",
            GridAxis::D => "d",
            GridAxis::Spread => "spread",
            GridAxis::B => "b",
            GridAxis::C => "c",
        }
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [GridAxis::N, GridAxis::Eps, GridAxis::D, GridAxis::Spread, GridAxis::B, GridAxis::C]
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown grid axis {s:?}")))
    }
}

/// One varying parameter and its values, written `axis=v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub axis: GridAxis,
    pub values: Vec<Rational>,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("grid {s:?} is not of the form axis=v1,v2")))?;
        let axis: GridAxis = key.trim().parse()?;
        let values = values
            .split(',')
            .map(parse)
            .collect::<core::result::Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(Error::InvalidArgument("grid has no values".into()));
        }
        Ok(Grid { axis, values })
    }
}

impl Grid {
    fn point(&self, value: &Rational, params: &CostParams, args: &FamilyArgs) -> Result<(CostParams, FamilyArgs)> {
        let mut params = params.clone();
        let mut args = args.clone();
        match self.axis {
            GridAxis::N => {
                args.n = value
                    .is_integer()
                    .then(|| value.to_integer().to_usize())
                    .flatten()
                    .ok_or_else(|| Error::InvalidArgument(format!("n must be a natural number, got {value}")))?;
            }
            GridAxis::Eps => args.eps = value.clone(),
            GridAxis::D => args.d = value.clone(),
            GridAxis::Spread => args.spread = value.clone(),
            GridAxis::B => {
                symmetric_b(&params)?;
                params = CostParams::symmetric(value.clone(), params.c().clone())?;
            }
            GridAxis::C => {
                params = CostParams::new(params.b_left().clone(), params.b_right().clone(), value.clone())?;
            }
        }
        Ok((params, args))
    }
}

/// Exact mechanism-to-optimum ratio on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    pub mechanism: String,
    pub objective: Objective,
    pub generator: String,
    pub params: String,
    pub mech_value: Rational,
    pub opt_value: Rational,
    pub ratio: Rational,
}

/// Expected objective of `mech` divided by the optimal objective.
///
/// When the optimum is only approached (asymmetric peaks), the infimum is
/// used as the denominator.
pub fn ratio_on<M: Mechanism>(mech: &M, instance: &Instance, objective: Objective) -> Result<RatioReport> {
    let lottery = mech.apply(instance)?;
    let mech_value = expected_objective(instance, &lottery, objective);
    let opt = optimal(instance, objective);
    let opt_value = match opt.right_limit {
        Some((_, v)) => v,
        None => opt.value,
    };
    debug_assert!(!opt_value.is_zero(), "objective values are at least c > 0");
    Ok(RatioReport {
        mechanism: mech.name(),
        objective,
        generator: "instance".into(),
        params: instance.to_string(),
        ratio: &mech_value / &opt_value,
        mech_value,
        opt_value,
    })
}

/// One [`RatioReport`] per grid value, in grid order.
pub fn sweep<M: Mechanism>(
    mech: &M,
    objective: Objective,
    family: Family,
    params: &CostParams,
    args: &FamilyArgs,
    grid: &Grid,
) -> Result<Vec<RatioReport>> {
    grid.values
        .iter()
        .map(|value| {
            let (params, args) = grid.point(value, params, args)?;
            let instance = family.generate(&params, &args)?;
            let mut report = ratio_on(mech, &instance, objective)?;
            report.generator = family.id().into();
            report.params = family.describe(&params, &args);
            Ok(report)
        })
        .collect()
}

/// Fixed set of instances with unequal peak offsets, at most five agents
/// each: every profile below under every offset pair, with `c = 1`.
///
/// Offsets `(b_left, b_right)`: (1, 2), (2, 1), (1, 3), (3, 1), (1/2, 1).
/// Profiles: (0), (0, 1), (0, 2), (0, 0, 3), (0, 1, 5), (0, 1, 2, 4),
/// (-2, 0, 1, 3, 7).
pub fn nonsymmetric_battery() -> Vec<Instance> {
    let offsets = [
        (int(1), int(2)),
        (int(2), int(1)),
        (int(1), int(3)),
        (int(3), int(1)),
        (ratio(1, 2), int(1)),
    ];
    let profiles: [&[i64]; 7] = [
        &[0],
        &[0, 1],
        &[0, 2],
        &[0, 0, 3],
        &[0, 1, 5],
        &[0, 1, 2, 4],
        &[-2, 0, 1, 3, 7],
    ];
    let mut out = Vec::new();
    for (bl, br) in offsets {
        let params = CostParams::new(bl, br, int(1)).expect("positive offsets");
        for profile in profiles {
            let raw = profile.iter().map(|&x| int(x)).collect();
            out.push(Instance::normalize(raw, params.clone()).expect("nonempty profile"));
        }
    }
    out
}

/// Result of running the unilateral deviation search over a battery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub instances_searched: usize,
    /// First violation per instance where one was found, in battery order.
    pub violations: Vec<ViolationReport>,
}

impl ProbeOutcome {
    pub fn exhausted(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn probe<M: Mechanism>(mech: &M, battery: &[Instance]) -> Result<ProbeOutcome> {
    let mut violations = Vec::new();
    for instance in battery {
        if let Some(report) = find_sp_violation(mech, instance)? {
            violations.push(report);
        }
    }
    Ok(ProbeOutcome {
        instances_searched: battery.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{BuiltinMechanism, Side};
    use alloc::vec;

    fn sym(b: i64, c: i64) -> CostParams {
        CostParams::symmetric(int(b), int(c)).unwrap()
    }

    fn locs(i: &Instance) -> Vec<Rational> {
        i.locations().to_vec()
    }

    #[test]
    fn primary_examples() {
        assert_eq!(locs(&gen_primary(&sym(1, 1), &ratio(1, 10)).unwrap()), vec![int(0), ratio(31, 10)]);
        assert_eq!(locs(&gen_primary(&sym(2, 1), &int(1)).unwrap()), vec![int(0), int(7)]);
        assert!(gen_primary(&sym(1, 1), &int(0)).is_err());
        let skew = CostParams::new(int(1), int(2), int(1)).unwrap();
        assert_eq!(gen_primary(&skew, &int(1)), Err(Error::NonSymmetricParams));
    }

    #[test]
    fn sc_lb_examples() {
        assert_eq!(locs(&gen_sc_lb(4, &sym(1, 1)).unwrap()), vec![int(0), int(1), int(2), int(2)]);
        assert_eq!(locs(&gen_sc_lb(5, &sym(1, 1)).unwrap()), vec![int(0), int(0), int(1), int(2), int(2)]);
        assert_eq!(locs(&gen_sc_lb(3, &sym(2, 1)).unwrap()), vec![int(0), int(2), int(4)]);
        assert!(gen_sc_lb(2, &sym(1, 1)).is_err());
    }

    #[test]
    fn m1_mc_lb_examples() {
        assert_eq!(locs(&gen_m1_mc_lb(3, &sym(2, 1), &int(1)).unwrap()), vec![int(0), int(6), int(6)]);
        assert_eq!(locs(&gen_m1_mc_lb(2, &sym(1, 1), &int(1)).unwrap()), vec![int(0), int(4)]);
        assert!(gen_m1_mc_lb(3, &sym(1, 1), &int(0)).is_err());
    }

    #[test]
    fn other_family_examples() {
        assert_eq!(locs(&gen_m2_mc_tight(&sym(1, 1)).unwrap()), vec![int(0), int(2)]);
        assert_eq!(locs(&gen_even_lb(4, &sym(1, 1)).unwrap()), vec![int(0), int(0), int(2), int(2)]);
        assert!(gen_even_lb(3, &sym(1, 1)).is_err());
        assert_eq!(
            locs(&gen_opt_not_sp(&sym(1, 1), &ratio(1, 10)).unwrap()),
            vec![ratio(-19, 10), int(0), int(3)]
        );
        assert!(gen_opt_not_sp(&sym(1, 1), &int(1)).is_err());
        assert_eq!(
            locs(&gen_m2_sc_worst(3, &sym(1, 1), &int(50)).unwrap()),
            vec![int(0), int(50), int(50)]
        );
    }

    #[test]
    fn ratio_examples() {
        let p = sym(1, 1);
        let r = ratio_on(&BuiltinMechanism::M1, &gen_sc_lb(4, &p).unwrap(), Objective::Social).unwrap();
        assert_eq!((r.mech_value.clone(), r.opt_value.clone(), r.ratio), (int(7), int(5), ratio(7, 5)));
        let m2 = BuiltinMechanism::M2(Side::Left);
        let r = ratio_on(&m2, &gen_m2_mc_tight(&p).unwrap(), Objective::Max).unwrap();
        assert_eq!(r.ratio, int(3));
        let r = ratio_on(&m2, &gen_even_lb(4, &p).unwrap(), Objective::Social).unwrap();
        assert_eq!(r.ratio, int(2));
        let i = gen_m1_mc_lb(3, &sym(2, 1), &int(1)).unwrap();
        let r = ratio_on(&BuiltinMechanism::M1, &i, Objective::Max).unwrap();
        assert_eq!(r.ratio, ratio(5, 2));
    }

    #[test]
    fn sweep_over_n() {
        let grid: Grid = "n=4,10,100,1000".parse().unwrap();
        let rows = sweep(
            &BuiltinMechanism::M1,
            Objective::Social,
            Family::ScLowerBound,
            &sym(1, 1),
            &FamilyArgs::default(),
            &grid,
        )
        .unwrap();
        let ratios: Vec<Rational> = rows.iter().map(|r| r.ratio.clone()).collect();
        assert_eq!(ratios, vec![ratio(7, 5), ratio(19, 11), ratio(199, 101), ratio(1999, 1001)]);
        assert_eq!(rows[0].params, "b=1;c=1;n=4");
        assert_eq!(rows[0].generator, "sc-lb");
    }

    #[test]
    fn sweep_over_d_and_b() {
        let grid: Grid = "d=1/100,1,100".parse().unwrap();
        let rows = sweep(
            &BuiltinMechanism::M1,
            Objective::Max,
            Family::M1MaxLowerBound,
            &sym(2, 1),
            &FamilyArgs { n: 3, ..FamilyArgs::default() },
            &grid,
        )
        .unwrap();
        for (row, d) in rows.iter().zip(&grid.values) {
            assert_eq!(row.ratio, int(1) + (int(2) + d) / (int(1) + d));
        }

        let grid: Grid = "b=1,2".parse().unwrap();
        let rows = sweep(
            &BuiltinMechanism::M2(Side::Left),
            Objective::Max,
            Family::M2MaxTight,
            &sym(1, 1),
            &FamilyArgs::default(),
            &grid,
        )
        .unwrap();
        assert_eq!(rows[1].ratio, int(5));
        assert_eq!(rows[1].params, "b=2;c=1");
    }

    #[test]
    fn grid_parsing() {
        assert!("n=1.5".parse::<Grid>().is_ok());
        assert!("x=1".parse::<Grid>().is_err());
        assert!("n".parse::<Grid>().is_err());
        assert!("n=1,,2".parse::<Grid>().is_err());
        let g: Grid = "n=1.5".parse().unwrap();
        assert!(g.point(&g.values[0], &sym(1, 1), &FamilyArgs::default()).is_err());
        assert_eq!("m2-sc-worst".parse::<Family>(), Ok(Family::M2SocialWorst));
    }

    #[test]
    fn battery_is_documented_size() {
        let battery = nonsymmetric_battery();
        assert_eq!(battery.len(), 35);
        assert!(battery.iter().all(|i| !i.params().is_symmetric() && i.len() <= 5));
    }
}
