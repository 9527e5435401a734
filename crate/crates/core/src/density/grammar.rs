//! Text form of densities used by the CLI and experiment configs.
//!
//! ```text
//! uniform:T | exp:LAMBDA | power:ALPHA,BETA,GAMMA | pc:PATH.csv
//! ```
//! followed by any number of `|shift:T` and `|scale:L` modifiers applied left
//! to right, e.g. `power:1,1,2|shift:10|scale:0.5`.
//!
//! A `pc` file holds `breakpoint,level` rows; `level` applies up to the next
//! row's breakpoint and the last row closes the support (its level must be 0).
//! An optional non-numeric header row is skipped. Levels are renormalized to
//! unit mass.

use std::path::Path;

use thiserror::Error;

use super::{Density, Normalization};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot parse density token `{token}`: {reason}")]
pub struct GrammarError {
    pub token: String,
    pub reason: String,
}

impl GrammarError {
    fn new(token: &str, reason: impl Into<String>) -> Self {
        Self {
            token: token.to_string(),
            reason: reason.into(),
        }
    }
}

pub fn parse_density(text: &str) -> Result<Density, GrammarError> {
    let mut tokens = text.split('|').map(str::trim);
    let head = tokens.next().unwrap_or_default();
    let mut density = parse_base(head)?;
    for token in tokens {
        let (name, arg) = token
            .split_once(':')
            .ok_or_else(|| GrammarError::new(token, "expected NAME:VALUE"))?;
        let value = number(token, arg)?;
        density = match name {
            "shift" => density.shift(value),
            "scale" => density.scale(value),
            _ => return Err(GrammarError::new(token, "unknown modifier")),
        }
        .map_err(|e| GrammarError::new(token, e.to_string()))?;
    }
    Ok(density)
}

fn parse_base(token: &str) -> Result<Density, GrammarError> {
    let (name, args) = token
        .split_once(':')
        .ok_or_else(|| GrammarError::new(token, "expected KIND:PARAMS"))?;
    let built = match name {
        "uniform" => Density::uniform(number(token, args)?),
        "exp" => Density::exponential(number(token, args)?),
        "power" => {
            let params = args
                .split(',')
                .map(|a| number(token, a))
                .collect::<Result<Vec<_>, _>>()?;
            if params.len() != 3 {
                return Err(GrammarError::new(token, "power takes ALPHA,BETA,GAMMA"));
            }
            Density::power(params[0], params[1], params[2])
        }
        "pc" => return read_steps(Path::new(args)).map_err(|r| GrammarError::new(token, r)),
        _ => return Err(GrammarError::new(token, "unknown density kind")),
    };
    built.map_err(|e| GrammarError::new(token, e.to_string()))
}

fn number(token: &str, text: &str) -> Result<f64, GrammarError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| GrammarError::new(token, format!("`{text}` is not a number")))
}

fn read_steps(path: &Path) -> Result<Density, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut breakpoints = Vec::new();
    let mut levels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != 2 {
            return Err(format!("row {}: expected breakpoint,level", row + 1));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(b), Ok(l)) => {
                breakpoints.push(b);
                levels.push(l);
            }
            _ if row == 0 => continue,
            _ => return Err(format!("row {}: non-numeric entry", row + 1)),
        }
    }
    match levels.pop() {
        Some(0.0) => {}
        Some(last) => {
            return Err(format!(
                "last row must close the support with level 0, got {last}"
            ))
        }
        None => return Err("no rows".into()),
    }
    Density::piecewise_constant(breakpoints, levels, Normalization::Renormalize)
        .map_err(|e| e.to_string())
}
