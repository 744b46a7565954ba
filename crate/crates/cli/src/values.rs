//! Parsing of `--values` sweep specifications.

use anyhow::{bail, Context, Result};

/// Parses `a..b` (inclusive, step 1), `a..b:step` (inclusive) or a comma list.
pub fn parse_values(input: &str) -> Result<Vec<f64>> {
    let input = input.trim();
    if let Some((lo, rest)) = input.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, number(step)?),
            None => (rest, 1.0),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if step <= 0.0 {
            bail!("step must be positive in `{input}`");
        }
        if hi < lo {
            bail!("empty range `{input}`");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| lo + i as f64 * step).collect());
    }
    let values = input.split(',').map(number).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("no values given");
    }
    Ok(values)
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .with_context(|| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        bail!("`{}` is not finite", s.trim());
    }
    Ok(v)
}
