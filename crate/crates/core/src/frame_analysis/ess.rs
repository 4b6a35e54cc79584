//! Grid surrogates for `ess inf` and `ess sup` of `max_j |g_j|`.

use rayon::prelude::*;

use super::discretize::Model;
use super::window::Window;
use crate::domain_sets::{AxisBox, BoxUnionSet};
use crate::error::{invalid, Result};

/// Cauchy tolerance between the two finest refinement levels.
const CAUCHY_TOL: f64 = 1e-3;

/// Largest refinement grid accepted (cells, including empty ones).
const MAX_LEVEL_CELLS: f64 = 16_777_216.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EssLevel {
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EssBounds {
    /// Estimate of `ess inf_Ω max_{j∈J} |g_j|`.
    pub m_hat: f64,
    /// Estimate of `ess sup_Ω max_{j∈J} |g_j|`; infinite when `J` is empty.
    pub big_m: f64,
    /// Indices of the windows judged essentially bounded.
    pub j: Vec<usize>,
    /// Whether the two finest levels of the lower estimate agree to 1e-3 or
    /// the three levels follow a power law the extrapolation accepted.
    /// A lower estimate that is still moving is not bounded away from zero.
    pub lower_converged: bool,
    pub upper_converged: bool,
    /// Rigorous lower bound for `ess inf max_{j∈J} |g_j|` from interval
    /// arithmetic on the finest cells; `None` if a member is sampled.
    pub certified_lower: Option<f64>,
    /// Raw cell-mean extremes at grid sizes `n`, `2n`, `4n`.
    pub levels: Vec<EssLevel>,
    pub notes: Vec<String>,
}

impl EssBounds {
    /// `m̂ > 0`, backed by a positive certified lower bound or, failing
    /// that, by a converged lower estimate.
    pub fn bounded_away_from_zero(&self) -> bool {
        !self.j.is_empty()
            && self.m_hat > CAUCHY_TOL
            && (self.certified_lower.is_some_and(|l| l > 0.0) || self.lower_converged)
    }
}

/// Richardson extrapolation of `v(h)` from `h`, `h/2`, `h/4`. The order is
/// estimated from the ratio of successive differences and only used when it
/// lies in `[0.5, 4]`; otherwise the finest value is returned. Near order 1
/// the `h` and `h²` terms are both eliminated.
pub(crate) fn richardson(v1: f64, v2: f64, v4: f64) -> f64 {
    extrapolate(v1, v2, v4).unwrap_or(v4)
}

fn extrapolate(v1: f64, v2: f64, v4: f64) -> Option<f64> {
    let d1 = v1 - v2;
    let d2 = v2 - v4;
    if d2 == 0.0 || d1 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let p = (d1 / d2).log2();
    if !(0.5..=4.0).contains(&p) {
        return None;
    }
    if (p - 1.0).abs() < 0.25 {
        let r1 = 2.0 * v2 - v1;
        let r2 = 2.0 * v4 - v2;
        return Some((4.0 * r2 - r1) / 3.0);
    }
    Some(v4 - d2 / (2f64.powf(p) - 1.0))
}

fn converged(v1: f64, v2: f64, v4: f64) -> bool {
    (v2 - v4).abs() <= CAUCHY_TOL || extrapolate(v1, v2, v4).is_some()
}

/// Upper bound for `max_j |g_j|` on the box from interval arithmetic, when
/// every window is an expression.
fn enclosure_sup(windows: &[&Window], on: &AxisBox) -> f64 {
    windows
        .iter()
        .map(|w| match w.expr() {
            Some(e) => {
                let r = e.range_over(on);
                r.lo.abs().max(r.hi.abs())
            }
            None => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Per-cell `max_j` of the L² cell means `sqrt(mean |g_j|²)` over `cell ∩ Ω`.
fn cell_values(windows: &[&Window], model: &Model) -> Vec<f64> {
    model
        .cells
        .par_iter()
        .map(|c| {
            windows
                .iter()
                .map(|w| w.piece_means(&c.pieces).1.sqrt())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `min_cells max_j inf_{piece} |g_j|` by interval arithmetic.
fn certified_lower(windows: &[&Window], model: &Model) -> Option<f64> {
    let exprs: Vec<_> = windows.iter().map(|w| w.expr()).collect::<Option<_>>()?;
    let lower = |iv: super::expr::Interval| {
        if iv.lo > 0.0 {
            iv.lo
        } else if iv.hi < 0.0 {
            -iv.hi
        } else {
            0.0
        }
    };
    let per_cell: Vec<f64> = model
        .cells
        .par_iter()
        .map(|c| {
            c.pieces
                .iter()
                .map(|p| exprs.iter().map(|e| lower(e.range_over(p))).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Some(per_cell.into_iter().fold(f64::INFINITY, f64::min))
}

fn level_extremes(values: &[f64]) -> (f64, f64) {
    (
        values.iter().copied().fold(f64::INFINITY, f64::min),
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// `(m̂, M̂, J)` for a list of windows on `Ω`.
///
/// Boundedness of an expression window is decided by interval arithmetic on
/// the closed bounding box of `Ω`; a sampled window counts as unbounded when
/// its cell maxima grow by more than 10% at each refinement. The numeric
/// check is also run on expression windows and a disagreement is noted.
pub fn ess_bounds(windows: &[Window], omega: &BoxUnionSet, grid_n: usize) -> Result<EssBounds> {
    if windows.is_empty() {
        return Err(invalid("windows", "need at least one window"));
    }
    if grid_n == 0 {
        return Err(invalid("grid_n", "need at least one cell per axis"));
    }
    let d = omega.dim();
    if ((4 * grid_n) as f64).powi(d as i32) > MAX_LEVEL_CELLS {
        return Err(invalid("grid_n", "finest refinement level is too large"));
    }
    for w in windows {
        w.check_dim(d)?;
    }
    let bb = omega.bounding_box();
    let sizes = [grid_n, 2 * grid_n, 4 * grid_n];
    let models: Vec<Model> = sizes
        .iter()
        .map(|&n| Model::uniform(omega, n))
        .collect::<Result<_>>()?;

    let mut j = Vec::new();
    let mut notes = Vec::new();
    for (idx, w) in windows.iter().enumerate() {
        let maxima: Vec<f64> = models
            .iter()
            .map(|m| level_extremes(&cell_values(&[w], m)).1)
            .collect();
        let grows = maxima[1] > 1.1 * maxima[0] && maxima[2] > 1.1 * maxima[1];
        let numeric_bounded = !grows && maxima.iter().all(|v| v.is_finite());
        let bounded = match w.symbolic_bounded(&bb) {
            Some(symbolic) => {
                if symbolic != numeric_bounded {
                    notes.push(format!(
                        "window {idx} `{}`: symbolic boundedness {symbolic} overrides grid growth check",
                        w.label()
                    ));
                }
                symbolic
            }
            None => numeric_bounded,
        };
        if bounded {
            j.push(idx);
        }
    }
    if j.is_empty() {
        notes.push("no essentially bounded window: J is empty".into());
        return Ok(EssBounds {
            m_hat: 0.0,
            big_m: f64::INFINITY,
            j,
            lower_converged: true,
            upper_converged: false,
            certified_lower: None,
            levels: Vec::new(),
            notes,
        });
    }
    let members: Vec<&Window> = j.iter().map(|&i| &windows[i]).collect();
    let levels: Vec<EssLevel> = models
        .iter()
        .zip(sizes)
        .map(|(m, n)| {
            let (min, max) = level_extremes(&cell_values(&members, m));
            EssLevel { n, min, max }
        })
        .collect();
    // extrapolation may overshoot a rigorous enclosure by its remainder term
    let big_m = richardson(levels[0].max, levels[1].max, levels[2].max).min(enclosure_sup(&members, &bb));
    let m_hat = richardson(levels[0].min, levels[1].min, levels[2].min).clamp(0.0, big_m);
    Ok(EssBounds {
        m_hat,
        big_m,
        j,
        lower_converged: converged(levels[0].min, levels[1].min, levels[2].min),
        upper_converged: converged(levels[0].max, levels[1].max, levels[2].max),
        certified_lower: certified_lower(&members, &models[2]),
        levels,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoxUnionSet {
        BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap()
    }

    fn windows(list: &[&str]) -> Vec<Window> {
        list.iter().map(|s| Window::parse(s).unwrap()).collect()
    }

    #[test]
    fn richardson_recovers_linear_and_sqrt_rates() {
        let f = |h: f64| 0.5 + 0.3 * h;
        assert!((richardson(f(0.1), f(0.05), f(0.025)) - 0.5).abs() < 1e-12);
        let g = |h: f64| h.sqrt();
        assert!(richardson(g(0.1), g(0.05), g(0.025)).abs() < 1e-12);
        assert_eq!(richardson(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn linear_pair() {
        let e = ess_bounds(&windows(&["x", "1-x"]), &unit(), 64).unwrap();
        assert!(e.m_hat >= 0.49 && e.m_hat <= 0.5, "{e:?}");
        assert!(e.big_m >= 0.99 && e.big_m <= 1.0, "{e:?}");
        assert_eq!(e.j, vec![0, 1]);
        assert!(e.bounded_away_from_zero());
        let l = e.certified_lower.unwrap();
        assert!(l > 0.49 && l <= 0.5);
    }

    #[test]
    fn unbounded_power_gives_empty_j() {
        let e = ess_bounds(&windows(&["x^(-1/4)"]), &unit(), 64).unwrap();
        assert!(e.j.is_empty());
        assert!(e.big_m.is_infinite());
        let e = ess_bounds(&windows(&["x", "1-x", "x^(-1/4)", "(1-x)^(-1/4)"]), &unit(), 64).unwrap();
        assert_eq!(e.j, vec![0, 1]);
        assert!(e.m_hat <= 0.5 && e.m_hat >= 0.49);
    }

    #[test]
    fn indicator_is_one() {
        let e = ess_bounds(&[Window::indicator()], &unit(), 32).unwrap();
        assert_eq!((e.m_hat, e.big_m), (1.0, 1.0));
    }

    #[test]
    fn sqrt_weight_not_bounded_away() {
        let e = ess_bounds(&windows(&["sqrt(x)"]), &unit(), 64).unwrap();
        assert!(e.m_hat < 0.01, "{e:?}");
        assert_eq!(e.certified_lower, Some(0.0));
        assert!(!e.bounded_away_from_zero());
        assert!((e.big_m - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sampled_window_is_piecewise_constant() {
        use crate::convolution_lab::GridFunction;
        use crate::domain_sets::AxisBox;
        let g = GridFunction::sample_real(AxisBox::interval(0.0, 1.0).unwrap(), 4096, |x| x[0].powf(-0.25)).unwrap();
        let e = ess_bounds(&[Window::sampled("sampled x^-1/4", g)], &unit(), 64).unwrap();
        // piecewise constant, so bounded, though the coarse levels still grow
        assert_eq!(e.j, vec![0]);
        assert_eq!(e.notes.len(), 1);
    }
}
