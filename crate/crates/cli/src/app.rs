//! Command-line front end.
//!
//! Exit codes: 0 success (or no violation found), 1 violation found,
//! 2 usage or input error, 3 coalition search budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use twinpeak_core::experiments::{self, nonsymmetric_battery, probe, sweep, Family, FamilyArgs, Grid};
use twinpeak_core::model::{expected_objective, Objective};
use twinpeak_core::optimal::optimal;
use twinpeak_core::rational::{parse, Rational};
use twinpeak_core::verification::{
    check_anonymity, check_position_invariance, find_gsp_violation_with_budget, find_sp_violation,
    fixtures, ViolationReport, DEFAULT_COALITION_BUDGET,
};
use twinpeak_core::{BuiltinMechanism, CostParams, Error, Instance, Mechanism};

use crate::instance_file::{parse_instance, write_instance};
use crate::output::{write_ratio_csv, write_violation_csv, NumberFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "twinpeak", version, about = "Exact facility location with double-peaked preferences")]
struct Cli {
    /// Render numbers as rounded decimals with this many digits.
    #[arg(long, global = true, value_name = "DIGITS")]
    decimal: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Objective value at a given facility location.
    Eval {
        file: PathBuf,
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        at: Rational,
        #[arg(long, value_parser = objective_arg)]
        objective: Objective,
    },
    /// Optimal facility location.
    Opt {
        file: PathBuf,
        #[arg(long, value_parser = objective_arg)]
        objective: Objective,
    },
    /// Outcome of a mechanism.
    Mech {
        file: PathBuf,
        #[arg(long)]
        mech: String,
    },
    /// Mechanism objective divided by the optimum.
    Ratio {
        file: PathBuf,
        #[arg(long)]
        mech: String,
        #[arg(long, value_parser = objective_arg)]
        objective: Objective,
    },
    /// Search for a profitable unilateral misreport.
    VerifySp {
        file: PathBuf,
        #[arg(long)]
        mech: String,
        /// Also write the certificate as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Search for a profitable joint misreport.
    VerifyGsp {
        file: PathBuf,
        #[arg(long)]
        mech: String,
        #[arg(long)]
        max_coalition: usize,
        #[arg(long, default_value_t = DEFAULT_COALITION_BUDGET)]
        budget: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check anonymity and position invariance.
    VerifyAxioms {
        file: PathBuf,
        #[arg(long)]
        mech: String,
        /// Comma-separated translations to try.
        #[arg(long, default_value = "1,-7/3,10", allow_hyphen_values = true)]
        shifts: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write an instance from one of the built-in families.
    Gen {
        family: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        family_args: FamilyArgOpts,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Ratio of a mechanism along a family, one row per grid value.
    Sweep {
        #[arg(long)]
        mech: String,
        #[arg(long, value_parser = objective_arg)]
        objective: Objective,
        #[arg(long)]
        family: String,
        /// `axis=v1,v2,...` with axis one of n, eps, d, spread, b, c.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        family_args: FamilyArgOpts,
        /// Output file, or `-` for stdout.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Run the unilateral search over the fixed asymmetric-peak battery.
    ProbeNonsym {
        #[arg(long, default_value = "m1")]
        mech: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    b: Rational,
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    c: Rational,
    /// Overrides --b on the left side.
    #[arg(long, value_parser = rational_arg)]
    b_left: Option<Rational>,
    /// Overrides --b on the right side.
    #[arg(long, value_parser = rational_arg)]
    b_right: Option<Rational>,
}

impl ParamArgs {
    fn params(&self) -> Result<CostParams, Error> {
        CostParams::new(
            self.b_left.clone().unwrap_or_else(|| self.b.clone()),
            self.b_right.clone().unwrap_or_else(|| self.b.clone()),
            self.c.clone(),
        )
    }
}

#[derive(Debug, Args)]
struct FamilyArgOpts {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = rational_arg)]
    eps: Option<Rational>,
    #[arg(long, value_parser = rational_arg)]
    d: Option<Rational>,
    #[arg(long, value_parser = rational_arg)]
    spread: Option<Rational>,
}

impl FamilyArgOpts {
    fn args(&self) -> FamilyArgs {
        let defaults = FamilyArgs::default();
        FamilyArgs {
            n: self.n.unwrap_or(defaults.n),
            eps: self.eps.clone().unwrap_or(defaults.eps),
            d: self.d.clone().unwrap_or(defaults.d),
            spread: self.spread.clone().unwrap_or(defaults.spread),
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse(s).map_err(|e| e.to_string())
}

fn objective_arg(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Built-in mechanism names plus the two checker fixtures.
pub fn resolve_mechanism(name: &str) -> Result<Box<dyn Mechanism>, Error> {
    match name {
        "constant-zero" => Ok(Box::new(fixtures::ConstantZero)),
        "first-report-dictator" => Ok(Box::new(fixtures::FirstReportDictator)),
        _ => Ok(Box::new(name.parse::<BuiltinMechanism>()?)),
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn open_output(path: &Path) -> anyhow::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(std::io::stdout()));
    }
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(Box::new(file))
}

fn write_violations(path: Option<&PathBuf>, reports: &[ViolationReport]) -> anyhow::Result<()> {
    if let Some(path) = path {
        write_violation_csv(open_output(path)?, reports)?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let budget = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::SearchBudgetExceeded { .. })));
            let _ = writeln!(err, "error: {e:#}");
            if budget {
                EXIT_BUDGET
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let fmt = NumberFormat { decimal: cli.decimal };
    match cli.command {
        Command::Eval { file, at, objective } => {
            let instance = load(&file)?;
            writeln!(out, "value={}", fmt.num(&objective.evaluate(&instance, &at)))?;
        }
        Command::Opt { file, objective } => {
            let instance = load(&file)?;
            let r = optimal(&instance, objective);
            writeln!(out, "y={} value={}", fmt.num(&r.location), fmt.num(&r.value))?;
            if let Some((x, v)) = &r.right_limit {
                writeln!(
                    out,
                    "infimum={} approached from the right of x={} (not attained)",
                    fmt.num(v),
                    fmt.num(x)
                )?;
            }
        }
        Command::Mech { file, mech } => {
            let instance = load(&file)?;
            let mech = resolve_mechanism(&mech)?;
            let lottery = mech.apply(&instance)?;
            writeln!(out, "{}", fmt.lottery(&lottery))?;
            for objective in [Objective::Social, Objective::Max] {
                let v = expected_objective(&instance, &lottery, objective);
                writeln!(out, "expected {objective}={}", fmt.num(&v))?;
            }
        }
        Command::Ratio { file, mech, objective } => {
            let instance = load(&file)?;
            let mech = resolve_mechanism(&mech)?;
            let r = experiments::ratio_on(&mech, &instance, objective)?;
            writeln!(out, "{}", fmt.num(&r.ratio))?;
        }
        Command::VerifySp { file, mech, csv } => {
            let instance = load(&file)?;
            let mech = resolve_mechanism(&mech)?;
            let report = find_sp_violation(&mech, &instance)?;
            return report_outcome(out, report, csv.as_ref(), "no profitable unilateral misreport among the candidates");
        }
        Command::VerifyGsp {
            file,
            mech,
            max_coalition,
            budget,
            csv,
        } => {
            let instance = load(&file)?;
            let mech = resolve_mechanism(&mech)?;
            let report = find_gsp_violation_with_budget(&mech, &instance, max_coalition, budget)?;
            return report_outcome(out, report, csv.as_ref(), "no profitable joint misreport among the candidates");
        }
        Command::VerifyAxioms {
            file,
            mech,
            shifts,
            csv,
        } => {
            let instance = load(&file)?;
            let mech = resolve_mechanism(&mech)?;
            let shifts: Vec<Rational> = shifts
                .split(',')
                .map(parse)
                .collect::<Result<_, _>>()
                .context("parsing --shifts")?;
            let mut found = Vec::new();
            match check_anonymity(&mech, &instance.raw_locations(), instance.params())? {
                Some(r) => found.push(r),
                None => writeln!(out, "anonymity: ok")?,
            }
            match check_position_invariance(&mech, &instance, &shifts)? {
                Some(r) => found.push(r),
                None => writeln!(out, "position invariance: ok")?,
            }
            for r in &found {
                writeln!(out, "{r}")?;
            }
            write_violations(csv.as_ref(), &found)?;
            return Ok(if found.is_empty() { EXIT_OK } else { EXIT_VIOLATION });
        }
        Command::Gen {
            family,
            params,
            family_args,
            output,
        } => {
            let family: Family = family.parse()?;
            let params = params.params()?;
            let args = family_args.args();
            let instance = family.generate(&params, &args)?;
            let comment = format!("{} {}", family.id(), family.describe(&params, &args));
            fs::write(&output, write_instance(&instance, Some(&comment)))
                .with_context(|| format!("writing {}", output.display()))?;
            writeln!(out, "wrote {} ({instance})", output.display())?;
        }
        Command::Sweep {
            mech,
            objective,
            family,
            grid,
            params,
            family_args,
            csv,
        } => {
            let mech = resolve_mechanism(&mech)?;
            let family: Family = family.parse()?;
            let grid: Grid = grid.parse()?;
            let rows = sweep(&mech, objective, family, &params.params()?, &family_args.args(), &grid)?;
            write_ratio_csv(open_output(&csv)?, &rows)?;
        }
        Command::ProbeNonsym { mech, csv } => {
            let mech = resolve_mechanism(&mech)?;
            let battery = nonsymmetric_battery();
            let outcome = probe(&mech, &battery)?;
            for r in &outcome.violations {
                writeln!(out, "{r}")?;
            }
            writeln!(
                out,
                "searched {} instances: {} with a certified violation",
                outcome.instances_searched,
                outcome.violations.len()
            )?;
            if outcome.exhausted() {
                writeln!(out, "exhausted: no profitable misreport among the candidates")?;
            }
            write_violations(csv.as_ref(), &outcome.violations)?;
            return Ok(if outcome.exhausted() { EXIT_OK } else { EXIT_VIOLATION });
        }
    }
    Ok(EXIT_OK)
}

fn report_outcome(
    out: &mut dyn Write,
    report: Option<ViolationReport>,
    csv: Option<&PathBuf>,
    none_message: &str,
) -> anyhow::Result<i32> {
    match report {
        Some(r) => {
            writeln!(out, "{r}")?;
            write_violations(csv, std::slice::from_ref(&r))?;
            Ok(EXIT_VIOLATION)
        }
        None => {
            writeln!(out, "{none_message}")?;
            write_violations(csv, &[])?;
            Ok(EXIT_OK)
        }
    }
}
