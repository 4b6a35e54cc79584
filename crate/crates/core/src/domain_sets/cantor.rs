use super::{canonicalize, AxisBox, BoxUnionSet};
use crate::error::{invalid, Result};

/// Which tower of shrinking intervals to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CantorVariant {
    /// `⋃_n [n − 2^{−|n|}, n + 2^{−|n|}]`.
    Full,
    /// `[−1, 1] ∪ ⋃_{|n| > k} [n − 2^{−|n|}, n + 2^{−|n|}]`.
    Holed(u32),
}

/// Truncation `|n| ≤ n_max` of an unbounded interval tower.
#[derive(Clone, Debug)]
pub struct CantorTower {
    pub set: BoxUnionSet,
    pub n_max: u32,
    pub variant: CantorVariant,
    /// Measure of the discarded intervals `|n| > n_max`, `4·2^{−n_max}`.
    pub tail_measure: f64,
}

pub fn cantor_tower(n_max: u32, variant: CantorVariant) -> Result<CantorTower> {
    if n_max < 2 {
        return Err(invalid("n_max", format!("need n_max >= 2, got {n_max}")));
    }
    if n_max > 60 {
        return Err(invalid("n_max", "intervals narrower than 2^-60 are not representable"));
    }
    if let CantorVariant::Holed(k) = variant {
        if k >= n_max {
            return Err(invalid("k", format!("hole size {k} must be below n_max {n_max}")));
        }
        if k < 4 {
            return Err(invalid("k", format!("hole size {k} must be at least 4")));
        }
    }
    let mut boxes = Vec::new();
    let n_max_i = n_max as i64;
    for n in -n_max_i..=n_max_i {
        let keep = match variant {
            CantorVariant::Full => true,
            CantorVariant::Holed(k) => n == 0 || n.unsigned_abs() > k as u64,
        };
        if keep {
            let r = 0.5f64.powi(n.unsigned_abs() as i32);
            boxes.push(AxisBox::interval(n as f64 - r, n as f64 + r)?);
        }
    }
    Ok(CantorTower {
        set: canonicalize(boxes)?,
        n_max,
        variant,
        tail_measure: 4.0 * 0.5f64.powi(n_max as i32),
    })
}
