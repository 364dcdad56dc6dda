//! Share of issued recommendations that the user followed.

use crate::{Error, Result};

/// `100 · effective / total`, with `total = 0` defined as 0.
pub fn effectiveness(effective: u64, total: u64) -> Result<f64> {
    check(effective, total)?;
    if total == 0 {
        return Ok(0.0);
    }
    Ok(100.0 * effective as f64 / total as f64)
}

/// Effectiveness in hundredths of a percent, rounded half-up using integer
/// arithmetic only. `effectiveness_hundredths(1, 3) == 3333`.
pub fn effectiveness_hundredths(effective: u64, total: u64) -> Result<u64> {
    check(effective, total)?;
    if total == 0 {
        return Ok(0);
    }
    let (e, t) = (u128::from(effective), u128::from(total));
    Ok(((e * 20_000 + t) / (2 * t)) as u64)
}

fn check(effective: u64, total: u64) -> Result<()> {
    if effective > total {
        Err(Error::EffectiveExceedsTotal { effective, total })
    } else {
        Ok(())
    }
}
