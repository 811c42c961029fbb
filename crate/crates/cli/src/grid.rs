//! Parsing of numeric lists and dB ranges given on the command line.

use crate::error::{usage, CliResult};

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
///
/// The result must be strictly increasing.
pub fn parse_db_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.len() {
        1 => parse_list(s)?,
        3 => {
            let start = number(parts[0])?;
            let step = number(parts[1])?;
            let stop = number(parts[2])?;
            if !(step > 0.0) || stop < start {
                return Err(usage(format!("bad dB range '{s}': need step > 0 and stop >= start")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(usage(format!("dB range '{s}' has {count} points")));
            }
            // integer multiples of the step keep the points free of accumulated drift
            (0..count).map(|i| start + step * i as f64).collect()
        }
        _ => return Err(usage(format!("bad dB range '{s}', expected start:step:stop"))),
    };
    increasing(&out, "gamma grid")?;
    Ok(out)
}

/// Parses `a,b,c` into numbers.
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let out: Vec<f64> = s.split(',').map(|p| number(p.trim())).collect::<CliResult<_>>()?;
    if out.is_empty() {
        return Err(usage("empty list"));
    }
    Ok(out)
}

fn number(s: &str) -> CliResult<f64> {
    let v: f64 = s.parse().map_err(|_| usage(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(usage(format!("'{s}' is not finite")));
    }
    Ok(v)
}

pub fn increasing(xs: &[f64], what: &str) -> CliResult<()> {
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
