//! Plain-text instance files.
//!
//! ```text
//! # comment
//! params <b> <c>                  (symmetric peaks)
//! params <b_left> <b_right> <c>
//! agents <x_1> ... <x_n>
//! ```
//!
//! Numbers use the rational text form (`3`, `-7/2`, `3.1`). Blank lines and
//! lines starting with `#` are ignored.

use std::fmt::Write as _;

use twinpeak_core::rational::{parse, Joined};
use twinpeak_core::{CostParams, Instance, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceFileError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] twinpeak_core::Error),
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> InstanceFileError {
    InstanceFileError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceFileError> {
    let mut params: Option<CostParams> = None;
    let mut agents: Option<Vec<Rational>> = None;
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let toks = tokens(line);
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        if keyword.starts_with('#') {
            continue;
        }
        let mut values = Vec::with_capacity(toks.len() - 1);
        for &(c, tok) in &toks[1..] {
            values.push(parse(tok).map_err(|e| parse_error(lineno, c, e.to_string()))?);
        }
        match keyword {
            "params" => {
                if params.is_some() {
                    return Err(parse_error(lineno, col, "duplicate params line"));
                }
                let p = match values.as_slice() {
                    [b, c] => CostParams::symmetric(b.clone(), c.clone())?,
                    [bl, br, c] => CostParams::new(bl.clone(), br.clone(), c.clone())?,
                    _ => {
                        return Err(parse_error(
                            lineno,
                            col,
                            "params takes <b> <c> or <b_left> <b_right> <c>",
                        ))
                    }
                };
                params = Some(p);
            }
            "agents" => {
                if agents.is_some() {
                    return Err(parse_error(lineno, col, "duplicate agents line"));
                }
                agents = Some(values);
            }
            other => {
                return Err(parse_error(lineno, col, format!("unknown keyword {other:?}")));
            }
        }
    }
    let params = params.ok_or_else(|| parse_error(last_line.max(1), 1, "missing params line"))?;
    let agents = agents.ok_or_else(|| parse_error(last_line.max(1), 1, "missing agents line"))?;
    Ok(Instance::normalize(agents, params)?)
}

/// Renders an instance in the file format, agents in their input order.
pub fn write_instance(instance: &Instance, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(comment) = comment {
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let p = instance.params();
    match p.b() {
        Some(b) => {
            let _ = writeln!(out, "params {b} {}", p.c());
        }
        None => {
            let _ = writeln!(out, "params {} {} {}", p.b_left(), p.b_right(), p.c());
        }
    }
    let _ = writeln!(out, "agents {}", Joined(&instance.raw_locations(), " "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use twinpeak_core::rational::{int, ratio};

    #[test]
    fn parses_symmetric_file() {
        let i = parse_instance("params 1 1\nagents 0 3.1").unwrap();
        assert_eq!(i.params(), &CostParams::symmetric(int(1), int(1)).unwrap());
        assert_eq!(i.locations(), &[int(0), ratio(31, 10)]);
    }

    #[test]
    fn parses_asymmetric_file_with_comments() {
        let text = "# skewed\n\n  params 1 3 1\n# agent\nagents 0\n";
        let i = parse_instance(text).unwrap();
        assert!(!i.params().is_symmetric());
        assert_eq!(i.params().b_right(), &int(3));
        assert_eq!(i.len(), 1);
    }

    #[test]
    fn reports_missing_and_bad_lines() {
        assert!(matches!(
            parse_instance("agents 0 1"),
            Err(InstanceFileError::Parse { message, .. }) if message.contains("missing params")
        ));
        assert!(matches!(
            parse_instance("params 1 1\nagents 0 x1"),
            Err(InstanceFileError::Parse { line: 2, column: 10, .. })
        ));
        assert!(matches!(
            parse_instance("params 1\nagents 0"),
            Err(InstanceFileError::Parse { line: 1, column: 1, .. })
        ));
        assert!(parse_instance("params 1 1\nagents 0\nagents 1").is_err());
        assert!(parse_instance("params 1 1\nplaces 0").is_err());
        assert_eq!(
            parse_instance("params 0 1\nagents 0"),
            Err(InstanceFileError::Invalid(twinpeak_core::Error::InvalidParams(
                "b_left must be positive"
            )))
        );
        assert_eq!(
            parse_instance("params 1 1\nagents"),
            Err(InstanceFileError::Invalid(twinpeak_core::Error::EmptyInstance))
        );
    }

    #[test]
    fn writer_round_trips() {
        let p = CostParams::new(ratio(1, 2), int(3), int(1)).unwrap();
        let i = Instance::normalize(vec![int(2), ratio(-7, 3), int(2)], p).unwrap();
        let text = write_instance(&i, Some("generated"));
        assert!(text.starts_with("# generated\nparams 1/2 3 1\nagents 2 -7/3 2\n"));
        assert_eq!(parse_instance(&text).unwrap(), i);
    }
}
