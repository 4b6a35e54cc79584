//! Infinite discrete sets with finite descriptions, positive combs built from
//! them, and their upper/lower Beurling densities.
//!
//! The densities are limits over all window sizes and positions, so they are
//! only computed exactly for the structured families below. The sliding-window
//! estimator is a cross-check and never the reference value.

use std::io::Write;

use crate::domain_sets::{AxisBox, Lattice};
use crate::error::{check_dim, invalid, Result};

/// A finitely described, possibly infinite, discrete subset of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum StructuredPointSet {
    /// `⋃_o (o + Γ)`.
    LatticeCosets {
        lattice: Lattice,
        offsets: Vec<Vec<f64>>,
    },
    EventuallyPeriodic(EventuallyPeriodic),
    /// `(base ∪ added) \ removed` for finite `added`, `removed`.
    FinitePerturbation {
        base: Box<StructuredPointSet>,
        added: Vec<Vec<f64>>,
        removed: Vec<Vec<f64>>,
    },
}

/// One-dimensional set that is periodic on each tail:
/// `{right_start + n·right_period} ∪ {left_start − n·left_period} ∪ core`, `n ≥ 0`.
/// A missing period means that tail is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct EventuallyPeriodic {
    left_period: Option<f64>,
    right_period: Option<f64>,
    left_start: f64,
    right_start: f64,
    core: Vec<f64>,
}

const MEMBER_TOL: f64 = 1e-9;

fn snap(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= MEMBER_TOL {
        r
    } else {
        t
    }
}

/// Number of integers `k` with `lo <= offset + k·step < hi`, snapping ratios
/// that land within rounding of an integer.
fn progression_count(offset: f64, step: f64, lo: f64, hi: f64) -> (i64, i64) {
    let first = snap((lo - offset) / step).ceil() as i64;
    let last = snap((hi - offset) / step).ceil() as i64 - 1;
    (first, last)
}

impl EventuallyPeriodic {
    pub fn new(
        left_period: Option<f64>,
        right_period: Option<f64>,
        left_start: f64,
        right_start: f64,
        mut core: Vec<f64>,
    ) -> Result<Self> {
        for p in [left_period, right_period].into_iter().flatten() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(invalid("period", format!("periods must be positive, got {p}")));
            }
        }
        if !left_start.is_finite() || !right_start.is_finite() {
            return Err(invalid("start", "tail anchors must be finite"));
        }
        if left_period.is_some() && right_period.is_some() && left_start >= right_start {
            return Err(invalid(
                "start",
                "left tail must start strictly below the right tail",
            ));
        }
        core.sort_by(f64::total_cmp);
        if core.windows(2).any(|w| w[1] - w[0] <= MEMBER_TOL) {
            return Err(invalid("core", "core points must be distinct"));
        }
        let set = Self {
            left_period,
            right_period,
            left_start,
            right_start,
            core,
        };
        if set.core.iter().any(|&c| set.in_tails(c)) {
            return Err(invalid("core", "core point duplicates a tail point"));
        }
        Ok(set)
    }

    /// `{start, start + period, ...}`.
    pub fn right_ray(start: f64, period: f64) -> Result<Self> {
        Self::new(None, Some(period), 0.0, start, vec![])
    }

    /// `{start, start − period, ...}`.
    pub fn left_ray(start: f64, period: f64) -> Result<Self> {
        Self::new(Some(period), None, start, 0.0, vec![])
    }

    pub fn left_period(&self) -> Option<f64> {
        self.left_period
    }

    pub fn right_period(&self) -> Option<f64> {
        self.right_period
    }

    pub fn left_start(&self) -> f64 {
        self.left_start
    }

    pub fn right_start(&self) -> f64 {
        self.right_start
    }

    pub fn core(&self) -> &[f64] {
        &self.core
    }

    fn in_tails(&self, x: f64) -> bool {
        let on = |t: f64| (t - t.round()).abs() <= MEMBER_TOL && t.round() >= 0.0;
        self.right_period
            .is_some_and(|p| on((x - self.right_start) / p))
            || self.left_period.is_some_and(|p| on((self.left_start - x) / p))
    }

    fn contains(&self, x: f64) -> bool {
        self.in_tails(x) || self.core.iter().any(|c| (c - x).abs() <= MEMBER_TOL)
    }

    fn right_range(&self, lo: f64, hi: f64) -> Option<(i64, i64)> {
        let p = self.right_period?;
        let (a, b) = progression_count(self.right_start, p, lo, hi);
        let a = a.max(0);
        (a <= b).then_some((a, b))
    }

    /// Points `left_start − n·p` in `[lo, hi)` as an index range of `n`.
    fn left_range(&self, lo: f64, hi: f64) -> Option<(i64, i64)> {
        let p = self.left_period?;
        // lo <= ls - n p < hi  <=>  (ls - hi)/p < n <= (ls - lo)/p
        let a = snap((self.left_start - hi) / p).floor() as i64 + 1;
        let b = snap((self.left_start - lo) / p).floor() as i64;
        let a = a.max(0);
        (a <= b).then_some((a, b))
    }

    fn count(&self, lo: f64, hi: f64) -> u64 {
        let span = |r: Option<(i64, i64)>| r.map_or(0, |(a, b)| (b - a + 1) as u64);
        let core = self
            .core
            .iter()
            .filter(|&&c| c >= lo && c < hi)
            .count() as u64;
        span(self.right_range(lo, hi)) + span(self.left_range(lo, hi)) + core
    }

    fn enumerate(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .core
            .iter()
            .copied()
            .filter(|&c| c >= lo && c < hi)
            .collect();
        if let (Some((a, b)), Some(p)) = (self.right_range(lo, hi), self.right_period) {
            out.extend((a..=b).map(|n| self.right_start + n as f64 * p));
        }
        if let (Some((a, b)), Some(p)) = (self.left_range(lo, hi), self.left_period) {
            out.extend((a..=b).map(|n| self.left_start - n as f64 * p));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    fn side_densities(&self) -> (f64, f64) {
        (
            self.left_period.map_or(0.0, |p| 1.0 / p),
            self.right_period.map_or(0.0, |p| 1.0 / p),
        )
    }
}

/// Asymptotic density profile of a support.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Profile {
    /// One-dimensional tails with separate densities towards −∞ and +∞.
    Sides { left: f64, right: f64 },
    /// Same density in every window far from the origin (lattice-periodic).
    Uniform(f64),
}

impl StructuredPointSet {
    pub fn lattice_cosets(lattice: Lattice, offsets: Vec<Vec<f64>>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(invalid("offsets", "at least one coset offset is required"));
        }
        for o in &offsets {
            check_dim(lattice.dim(), o.len())?;
        }
        for (i, a) in offsets.iter().enumerate() {
            for b in &offsets[i + 1..] {
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                if lattice.contains(&diff, MEMBER_TOL) {
                    return Err(invalid("offsets", "offsets must be distinct modulo the lattice"));
                }
            }
        }
        Ok(Self::LatticeCosets { lattice, offsets })
    }

    pub fn lattice(lattice: Lattice) -> Self {
        let d = lattice.dim();
        Self::LatticeCosets {
            lattice,
            offsets: vec![vec![0.0; d]],
        }
    }

    /// `c·Z` on the line.
    pub fn arithmetic(c: f64) -> Result<Self> {
        Ok(Self::lattice(Lattice::diagonal(&[c])?))
    }

    pub fn eventually_periodic(ep: EventuallyPeriodic) -> Self {
        Self::EventuallyPeriodic(ep)
    }

    pub fn finite_perturbation(
        base: StructuredPointSet,
        added: Vec<Vec<f64>>,
        removed: Vec<Vec<f64>>,
    ) -> Result<Self> {
        for p in added.iter().chain(&removed) {
            check_dim(base.dim(), p.len())?;
        }
        if let Some(p) = added.iter().find(|p| base.contains(p)) {
            return Err(invalid("added", format!("point {p:?} already belongs to the base set")));
        }
        if let Some(p) = removed.iter().find(|p| !base.contains(p)) {
            return Err(invalid("removed", format!("point {p:?} is not in the base set")));
        }
        Ok(Self::FinitePerturbation {
            base: Box::new(base),
            added,
            removed,
        })
    }

    /// `−Λ`.
    pub fn negated(&self) -> Self {
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<f64>>();
        match self {
            Self::LatticeCosets { lattice, offsets } => Self::LatticeCosets {
                lattice: lattice.clone(),
                offsets: offsets.iter().map(neg).collect(),
            },
            Self::EventuallyPeriodic(ep) => Self::EventuallyPeriodic(EventuallyPeriodic {
                left_period: ep.right_period,
                right_period: ep.left_period,
                left_start: -ep.right_start,
                right_start: -ep.left_start,
                core: ep.core.iter().rev().map(|x| -x).collect(),
            }),
            Self::FinitePerturbation {
                base,
                added,
                removed,
            } => Self::FinitePerturbation {
                base: Box::new(base.negated()),
                added: added.iter().map(neg).collect(),
                removed: removed.iter().map(neg).collect(),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::LatticeCosets { lattice, .. } => lattice.dim(),
            Self::EventuallyPeriodic(_) => 1,
            Self::FinitePerturbation { base, .. } => base.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Self::LatticeCosets { lattice, offsets } => offsets.iter().any(|o| {
                let diff: Vec<f64> = x.iter().zip(o).map(|(a, b)| a - b).collect();
                lattice.contains(&diff, MEMBER_TOL)
            }),
            Self::EventuallyPeriodic(ep) => ep.contains(x[0]),
            Self::FinitePerturbation {
                base,
                added,
                removed,
            } => {
                let near = |p: &Vec<f64>| p.iter().zip(x).all(|(a, b)| (a - b).abs() <= MEMBER_TOL);
                added.iter().any(near) || (base.contains(x) && !removed.iter().any(near))
            }
        }
    }

    /// Exactly the points in the half-open box, sorted lexicographically.
    pub fn enumerate_in_box(&self, window: &AxisBox) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        self.collect_in_box(window, &mut out);
        crate::domain_sets::sort_points(&mut out);
        out
    }

    fn collect_in_box(&self, window: &AxisBox, out: &mut Vec<Vec<f64>>) {
        if window.dim() != self.dim() {
            return;
        }
        match self {
            Self::LatticeCosets { lattice, offsets } => {
                for o in offsets {
                    lattice.for_each_in_box(window, o, |p| out.push(p.to_vec()));
                }
            }
            Self::EventuallyPeriodic(ep) => {
                out.extend(ep.enumerate(window.lo()[0], window.hi()[0]).into_iter().map(|v| vec![v]));
            }
            Self::FinitePerturbation {
                base,
                added,
                removed,
            } => {
                let mut inner = Vec::new();
                base.collect_in_box(window, &mut inner);
                inner.retain(|p| {
                    !removed
                        .iter()
                        .any(|r| r.iter().zip(p).all(|(a, b)| (a - b).abs() <= MEMBER_TOL))
                });
                out.extend(inner);
                out.extend(added.iter().filter(|p| window.contains(p)).cloned());
            }
        }
    }

    /// `#(Λ ∩ window)`, in closed form where the structure allows it.
    pub fn count_in_box(&self, window: &AxisBox) -> u64 {
        if window.dim() != self.dim() {
            return 0;
        }
        match self {
            Self::LatticeCosets { lattice, offsets } => match lattice.diagonal_spacings() {
                Some(steps) => offsets
                    .iter()
                    .map(|o| {
                        (0..steps.len())
                            .map(|i| {
                                let (a, b) = progression_count(
                                    o[i],
                                    steps[i],
                                    window.lo()[i],
                                    window.hi()[i],
                                );
                                (b - a + 1).max(0) as u64
                            })
                            .product::<u64>()
                    })
                    .sum(),
                None => {
                    let mut n = 0u64;
                    for o in offsets {
                        lattice.for_each_in_box(window, o, |_| n += 1);
                    }
                    n
                }
            },
            Self::EventuallyPeriodic(ep) => ep.count(window.lo()[0], window.hi()[0]),
            Self::FinitePerturbation {
                base,
                added,
                removed,
            } => {
                let inside = |v: &Vec<Vec<f64>>| v.iter().filter(|p| window.contains(p)).count() as u64;
                base.count_in_box(window) + inside(added) - inside(removed)
            }
        }
    }

    fn profile(&self) -> Profile {
        match self {
            Self::LatticeCosets { lattice, offsets } => {
                let d = offsets.len() as f64 / lattice.covolume();
                if lattice.dim() == 1 {
                    Profile::Sides { left: d, right: d }
                } else {
                    Profile::Uniform(d)
                }
            }
            Self::EventuallyPeriodic(ep) => {
                let (left, right) = ep.side_densities();
                Profile::Sides { left, right }
            }
            // finitely many points carry zero density
            Self::FinitePerturbation { base, .. } => base.profile(),
        }
    }

    /// Characteristic scale used to step the sliding window.
    fn min_period(&self) -> f64 {
        match self {
            Self::LatticeCosets { lattice, .. } => lattice
                .generators()
                .iter()
                .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min),
            Self::EventuallyPeriodic(ep) => [ep.left_period, ep.right_period]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min),
            Self::FinitePerturbation { base, .. } => base.min_period(),
        }
    }

    /// Finite anchor points (starts, core, perturbations) in dimension one.
    fn anchors_1d(&self) -> Vec<f64> {
        match self {
            Self::LatticeCosets { lattice, offsets } => {
                let c = lattice.covolume();
                offsets.iter().flat_map(|o| [o[0], o[0] + c]).collect()
            }
            Self::EventuallyPeriodic(ep) => {
                let mut v = ep.core.clone();
                if ep.left_period.is_some() {
                    v.push(ep.left_start);
                }
                if ep.right_period.is_some() {
                    v.push(ep.right_start);
                }
                v
            }
            Self::FinitePerturbation {
                base,
                added,
                removed,
            } => {
                let mut v = base.anchors_1d();
                v.extend(added.iter().chain(removed).map(|p| p[0]));
                v
            }
        }
    }

    fn base_lattice(&self) -> Option<&Lattice> {
        match self {
            Self::LatticeCosets { lattice, .. } => Some(lattice),
            Self::FinitePerturbation { base, .. } => base.base_lattice(),
            Self::EventuallyPeriodic(_) => None,
        }
    }

    fn is_enumerated_lattice(&self) -> Option<f64> {
        match self {
            Self::LatticeCosets { lattice, offsets } if lattice.diagonal_spacings().is_none() => {
                Some(offsets.len() as f64 / lattice.covolume())
            }
            Self::FinitePerturbation { base, .. } => base.is_enumerated_lattice(),
            _ => None,
        }
    }
}

/// Positive combination `μ = Σ w_i δ_{Λ_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedComb {
    terms: Vec<(f64, StructuredPointSet)>,
}

impl WeightedComb {
    pub fn new(terms: Vec<(f64, StructuredPointSet)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| invalid("terms", "a comb needs at least one term"))?;
        let d = first.1.dim();
        for (w, s) in &terms {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(invalid("weight", format!("weights must be positive, got {w}")));
            }
            check_dim(d, s.dim())?;
        }
        Ok(Self { terms })
    }

    /// `δ_Λ`.
    pub fn dirac(set: StructuredPointSet) -> Self {
        Self {
            terms: vec![(1.0, set)],
        }
    }

    pub fn terms(&self) -> &[(f64, StructuredPointSet)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.terms.iter().map(|(w, s)| (w * c, s.clone())).collect())
    }

    pub fn plus(&self, other: &WeightedComb) -> Result<Self> {
        Self::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    /// `μ(window)`.
    pub fn mass_in(&self, window: &AxisBox) -> f64 {
        self.terms
            .iter()
            .map(|(w, s)| w * s.count_in_box(window) as f64)
            .sum()
    }

    /// Weighted atoms in the box, sorted by position.
    pub fn atoms_in(&self, window: &AxisBox) -> Vec<(Vec<f64>, f64)> {
        self.terms
            .iter()
            .flat_map(|(w, s)| s.enumerate_in_box(window).into_iter().map(move |p| (p, *w)))
            .collect()
    }

    /// Smallest structural period over all terms.
    pub(crate) fn min_period(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, s)| s.min_period())
            .fold(f64::INFINITY, f64::min)
    }

    /// `(min, max)` of the finite anchor points of a one-dimensional comb.
    pub(crate) fn anchor_span_1d(&self) -> (f64, f64) {
        let anchors: Vec<f64> = self.terms.iter().flat_map(|(_, s)| s.anchors_1d()).collect();
        (
            anchors.iter().copied().fold(f64::INFINITY, f64::min),
            anchors.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    /// Generators of the first lattice term, if any.
    pub(crate) fn cell_generators(&self) -> Option<Vec<Vec<f64>>> {
        self.terms.iter().find_map(|(_, s)| s.base_lattice().map(Lattice::generators))
    }

    fn profile(&self) -> Profile {
        let mut left = 0.0;
        let mut right = 0.0;
        let mut uniform = 0.0;
        let mut sided = false;
        for (w, s) in &self.terms {
            match s.profile() {
                Profile::Sides { left: l, right: r } => {
                    sided = true;
                    left += w * l;
                    right += w * r;
                }
                Profile::Uniform(d) => uniform += w * d,
            }
        }
        if sided {
            Profile::Sides { left, right }
        } else {
            Profile::Uniform(uniform)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityMethod {
    ClosedForm,
    WindowedEstimate { h_list: Vec<f64> },
}

/// One row of the sliding-window estimator: `(h, inf μ(x+Q_h)/h^d, sup μ(x+Q_h)/h^d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub h: f64,
    pub inf_density: f64,
    pub sup_density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub lower: f64,
    pub upper: f64,
    pub method: DensityMethod,
    pub estimator_trace: Vec<TraceRow>,
}

impl DensityReport {
    /// Trace as CSV with header `h,inf_density,sup_density`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "inf_density", "sup_density"])?;
        for row in &self.estimator_trace {
            w.write_record([
                row.h.to_string(),
                row.inf_density.to_string(),
                row.sup_density.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact `(D⁻(μ), D⁺(μ))` for combs of structured supports.
///
/// In dimension one every supported kind is asymptotically periodic on each
/// half-line, so the comb has a density `d_L` towards −∞ and `d_R` towards
/// +∞ (side densities add over terms) and `D⁺ = max(d_L, d_R)`,
/// `D⁻ = min(d_L, d_R)`. In higher dimensions only lattice cosets are
/// supported; their counts are uniform in the window position, so densities
/// add and `D⁺ = D⁻`.
pub fn density_closed_form(mu: &WeightedComb) -> DensityReport {
    let (lower, upper) = match mu.profile() {
        Profile::Sides { left, right } => (left.min(right), left.max(right)),
        Profile::Uniform(d) => (d, d),
    };
    DensityReport {
        lower,
        upper,
        method: DensityMethod::ClosedForm,
        estimator_trace: Vec::new(),
    }
}

/// Above this many enumerated points per window the estimator refuses.
const MAX_ENUMERATED: f64 = 5e7;

/// Sliding-window estimate of `inf_x / sup_x μ(x + Q_h)/h^d` for each `h`.
///
/// Window centres step by `min period / x_samples` over the span of the
/// structure's anchors plus `3h` into each tail (dimension one), or over one
/// fundamental cell (lattice cosets in higher dimension). The reported
/// `(lower, upper)` come from the largest `h`.
pub fn density_windowed(mu: &WeightedComb, h_list: &[f64], x_samples: usize) -> Result<DensityReport> {
    if h_list.is_empty() {
        return Err(invalid("h_list", "need at least one window size"));
    }
    if h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(invalid("h_list", "window sizes must be positive and finite"));
    }
    if h_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("h_list", "window sizes must be increasing"));
    }
    if x_samples == 0 {
        return Err(invalid("x_samples", "need at least one sample per period"));
    }
    let d = mu.dim();
    let step = mu.min_period() / x_samples as f64;
    let mut trace = Vec::with_capacity(h_list.len());
    for &h in h_list {
        for (_, s) in &mu.terms {
            if let Some(dens) = s.is_enumerated_lattice() {
                if dens * h.powi(d as i32) > MAX_ENUMERATED {
                    return Err(invalid(
                        "h_list",
                        format!("window {h} exceeds the enumerable range of a skew lattice"),
                    ));
                }
            }
        }
        let centres = window_centres(mu, h, step, x_samples);
        let vol = h.powi(d as i32);
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for x in &centres {
            let lo: Vec<f64> = x.iter().map(|v| v - 0.5 * h).collect();
            let hi: Vec<f64> = x.iter().map(|v| v + 0.5 * h).collect();
            let m = mu.mass_in(&AxisBox::new(lo, hi)?) / vol;
            inf = inf.min(m);
            sup = sup.max(m);
        }
        trace.push(TraceRow {
            h,
            inf_density: inf,
            sup_density: sup,
        });
    }
    let last = *trace.last().expect("non-empty h_list");
    Ok(DensityReport {
        lower: last.inf_density,
        upper: last.sup_density,
        method: DensityMethod::WindowedEstimate {
            h_list: h_list.to_vec(),
        },
        estimator_trace: trace,
    })
}

fn window_centres(mu: &WeightedComb, h: f64, step: f64, x_samples: usize) -> Vec<Vec<f64>> {
    let d = mu.dim();
    if d == 1 {
        let (a, b) = mu.anchor_span_1d();
        let (a, b) = (a - 3.0 * h, b + 3.0 * h);
        let n = ((b - a) / step).ceil() as usize;
        (0..=n).map(|i| vec![a + i as f64 * step]).collect()
    } else {
        // d >= 2 supports are lattice cosets, periodic under the first lattice
        let gens = mu.cell_generators().expect("multi-dimensional supports carry a lattice");
        cell_samples(&gens, x_samples)
    }
}

/// `x_samples^d` points `Σ_k (i_k / x_samples) g_k` covering one fundamental cell.
pub(crate) fn cell_samples(gens: &[Vec<f64>], x_samples: usize) -> Vec<Vec<f64>> {
    let d = gens.len();
    let total = x_samples.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for g in gens {
                let t = (idx % x_samples) as f64 / x_samples as f64;
                idx /= x_samples;
                for (xi, gi) in x.iter_mut().zip(g) {
                    *xi += t * gi;
                }
            }
            x
        })
        .collect()
}
