//! Number rendering and CSV rows.

use std::io::Write;

use twinpeak_core::experiments::RatioReport;
use twinpeak_core::rational::to_decimal;
use twinpeak_core::verification::{Evidence, ViolationReport};
use twinpeak_core::{Lottery, Rational};

pub const RATIO_COLUMNS: [&str; 7] = [
    "mechanism",
    "objective",
    "generator",
    "params",
    "mech_value",
    "opt_value",
    "ratio",
];

pub const VIOLATION_COLUMNS: [&str; 9] = [
    "mechanism",
    "kind",
    "instance",
    "deviators",
    "misreports",
    "cost_before",
    "cost_after",
    "outcome_before",
    "outcome_after",
];

/// Exact `p/q` by default; `~`-prefixed rounded decimals on request.
#[derive(Debug, Clone, Copy, Default)]
pub struct NumberFormat {
    pub decimal: Option<usize>,
}

impl NumberFormat {
    pub fn num(&self, value: &Rational) -> String {
        match self.decimal {
            None => value.to_string(),
            Some(digits) => format!("~{}", to_decimal(value, digits)),
        }
    }

    pub fn lottery(&self, lottery: &Lottery) -> String {
        if let [(y, _)] = lottery.atoms() {
            return self.num(y);
        }
        let atoms: Vec<String> = lottery
            .atoms()
            .iter()
            .map(|(y, p)| format!("{} w.p. {p}", self.num(y)))
            .collect();
        format!("{{{}}}", atoms.join(", "))
    }
}

/// `point:prob` pairs joined by `;`, always exact.
pub fn lottery_cell(lottery: &Lottery) -> String {
    lottery
        .atoms()
        .iter()
        .map(|(y, p)| format!("{y}:{p}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn ratio_record(report: &RatioReport) -> [String; 7] {
    [
        report.mechanism.clone(),
        report.objective.to_string(),
        report.generator.clone(),
        report.params.clone(),
        report.mech_value.to_string(),
        report.opt_value.to_string(),
        report.ratio.to_string(),
    ]
}

/// One CSV row; agents are numbered from 1 as in the text report.
pub fn violation_record(report: &ViolationReport) -> [String; 9] {
    let base = [
        report.mechanism.clone(),
        report.kind.as_str().to_string(),
        report.instance.to_string(),
    ];
    let rest = match &report.evidence {
        Evidence::Deviation(d) => {
            let per_agent = |f: &dyn Fn(usize) -> String| {
                d.deviators.iter().map(|&a| f(a)).collect::<Vec<_>>().join(";")
            };
            [
                per_agent(&|a| (a + 1).to_string()),
                per_agent(&|a| d.misreports[&a].to_string()),
                per_agent(&|a| d.cost_before[&a].to_string()),
                per_agent(&|a| d.cost_after[&a].to_string()),
                lottery_cell(&d.outcome_before),
                lottery_cell(&d.outcome_after),
            ]
        }
        Evidence::Outcomes(m) => [
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            lottery_cell(&m.expected),
            lottery_cell(&m.observed),
        ],
    };
    let [a, b, c] = base;
    let [d, e, f, g, h, i] = rest;
    [a, b, c, d, e, f, g, h, i]
}

pub fn write_ratio_csv<W: Write>(out: W, reports: &[RatioReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RATIO_COLUMNS)?;
    for r in reports {
        w.write_record(ratio_record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_violation_csv<'a, W, I>(out: W, reports: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ViolationReport>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VIOLATION_COLUMNS)?;
    for r in reports {
        w.write_record(violation_record(r))?;
    }
    w.flush()?;
    Ok(())
}
