//! Frame bounds of windowed exponential systems `⋃_j {g_j e^{2πi⟨λ,·⟩} : λ ∈ Λ_j}`
//! on `L²(Ω)`, the window/density brackets they imply, and the decay of the
//! lower bound on growing domains.

mod discretize;
mod eigen;
mod ess;
mod expr;
mod window;

use std::io::Write;

use num_complex::Complex64;

pub use eigen::{dense_extremes, lanczos_extremes, LanczosOutcome};
pub use ess::{ess_bounds, EssBounds, EssLevel};
pub use expr::{Expr, Func, Interval};
pub use window::{Window, WindowKind};

pub(crate) use discretize::Model;
use discretize::FrameOperator;

use crate::convolution_lab::GridFunction;
use crate::domain_sets::{AxisBox, BoxUnionSet};
use crate::error::{check_dim, invalid, Result};
use crate::point_measures::{density_closed_form, DensityReport, StructuredPointSet, WeightedComb};

/// `density(ξ) dξ + Σ w_k δ_{ξ_k}` on the frequency side.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousFreqMeasure {
    density: Option<GridFunction>,
    atoms: Vec<(Vec<f64>, f64)>,
}

impl ContinuousFreqMeasure {
    pub fn new(density: Option<GridFunction>, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let dim = match (&density, atoms.first()) {
            (Some(g), _) => g.dim(),
            (None, Some(a)) => a.0.len(),
            (None, None) => return Err(invalid("measure", "need a density or at least one atom")),
        };
        if let Some(g) = &density {
            if let Some(s) = g.samples().iter().find(|s| !(s.re >= 0.0) || s.im != 0.0) {
                return Err(invalid("density", format!("density value {s} is not a non-negative real")));
            }
        }
        for (p, w) in &atoms {
            check_dim(dim, p.len())?;
            if !(*w > 0.0) || !w.is_finite() {
                return Err(invalid("atoms", format!("atom weight {w} must be positive")));
            }
        }
        Ok(Self { density, atoms })
    }

    pub fn dim(&self) -> usize {
        match &self.density {
            Some(g) => g.dim(),
            None => self.atoms[0].0.len(),
        }
    }

    pub fn density(&self) -> Option<&GridFunction> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.density.as_ref().map_or(0.0, |g| g.integral().re) + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Midpoint quadrature nodes of the density plus the atoms, inside `trunc`.
    fn weighted_points(&self, trunc: &AxisBox) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        if let Some(g) = &self.density {
            for k in 0..g.len() {
                let w = g.samples()[k].re * g.cell_weights()[k];
                let c = g.cell_center(k);
                if w > 0.0 && trunc.contains(&c) {
                    out.push((c, w));
                }
            }
        }
        out.extend(self.atoms.iter().filter(|a| trunc.contains(&a.0)).cloned());
        out
    }
}

/// Frequencies of one pair.
#[derive(Clone, Debug, PartialEq)]
pub enum FreqSpec {
    Discrete(StructuredPointSet),
    Continuous(ContinuousFreqMeasure),
}

impl FreqSpec {
    pub fn dim(&self) -> usize {
        match self {
            FreqSpec::Discrete(s) => s.dim(),
            FreqSpec::Continuous(m) => m.dim(),
        }
    }

    fn weighted_points(&self, trunc: &AxisBox) -> Vec<(Vec<f64>, f64)> {
        match self {
            FreqSpec::Discrete(s) => s.enumerate_in_box(trunc).into_iter().map(|p| (p, 1.0)).collect(),
            FreqSpec::Continuous(m) => m.weighted_points(trunc),
        }
    }
}

impl From<StructuredPointSet> for FreqSpec {
    fn from(s: StructuredPointSet) -> Self {
        FreqSpec::Discrete(s)
    }
}

/// `(Ω, {(g_j, Λ_j)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedSystem {
    omega: BoxUnionSet,
    pairs: Vec<(Window, FreqSpec)>,
}

impl WindowedSystem {
    pub fn new(omega: BoxUnionSet, pairs: Vec<(Window, FreqSpec)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("pairs", "a system needs at least one (window, frequencies) pair"));
        }
        for (w, f) in &pairs {
            w.check_dim(omega.dim())?;
            check_dim(omega.dim(), f.dim())?;
            if w.l2_norm_on(&omega)? == 0.0 {
                return Err(invalid("window", format!("`{}` vanishes on the domain", w.label())));
            }
        }
        Ok(Self { omega, pairs })
    }

    /// The exponentials `{χ_Ω e_λ : λ ∈ Λ}`.
    pub fn fourier(omega: BoxUnionSet, freq: StructuredPointSet) -> Result<Self> {
        Self::new(omega, vec![(Window::indicator(), FreqSpec::Discrete(freq))])
    }

    pub fn omega(&self) -> &BoxUnionSet {
        &self.omega
    }

    pub fn pairs(&self) -> &[(Window, FreqSpec)] {
        &self.pairs
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn windows(&self) -> Vec<Window> {
        self.pairs.iter().map(|p| p.0.clone()).collect()
    }

    /// Every window multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.omega.clone(),
            self.pairs.iter().map(|(w, f)| (w.scaled(c), f.clone())).collect(),
        )
    }

    /// Union of the pairs of two systems on the same domain.
    pub fn union(&self, other: &WindowedSystem) -> Result<Self> {
        if self.omega != other.omega {
            return Err(invalid("omega", "systems live on different domains"));
        }
        Self::new(self.omega.clone(), self.pairs.iter().chain(&other.pairs).cloned().collect())
    }

    /// Same pairs on another domain.
    pub fn restricted(&self, omega: BoxUnionSet) -> Result<Self> {
        Self::new(omega, self.pairs.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solver {
    Dense,
    Lanczos { iterations: usize, converged: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameBoundsReport {
    pub a_est: f64,
    pub b_est: f64,
    pub grid_n: usize,
    pub trunc_box: AxisBox,
    /// `B/A`, infinite when `A = 0`.
    pub tight_ratio: f64,
    /// Dimension of the model space (cells meeting `Ω`).
    pub model_cells: usize,
    /// Frequencies kept per pair after truncation.
    pub frequency_counts: Vec<usize>,
    pub solver: Solver,
    pub notes: Vec<String>,
}

/// Knobs for [`estimate_frame_bounds_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    /// Largest model dimension solved densely.
    pub dense_limit: usize,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4096,
            rel_tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Truncation box matching `grid_n` cells per axis on the bounding box of
/// `Ω`: `[−n/(2L_i), n/(2L_i))` on axis `i`.
pub fn nyquist_trunc(omega: &BoxUnionSet, grid_n: usize) -> AxisBox {
    let bb = omega.bounding_box();
    let half: Vec<f64> = (0..bb.dim()).map(|i| grid_n as f64 / (2.0 * bb.side(i))).collect();
    AxisBox::new(half.iter().map(|h| -h).collect(), half).expect("positive extent")
}

/// `A_est`, `B_est` as the extreme eigenvalues of the discretized frame operator.
pub fn estimate_frame_bounds(sys: &WindowedSystem, grid_n: usize, trunc_box: &AxisBox) -> Result<FrameBoundsReport> {
    estimate_frame_bounds_with(sys, grid_n, trunc_box, &EstimateOptions::default())
}

pub fn estimate_frame_bounds_with(
    sys: &WindowedSystem,
    grid_n: usize,
    trunc_box: &AxisBox,
    opts: &EstimateOptions,
) -> Result<FrameBoundsReport> {
    check_dim(sys.dim(), trunc_box.dim())?;
    let model = Model::for_truncation(&sys.omega, grid_n, trunc_box)?;
    let mut notes = Vec::new();
    let freqs: Vec<Vec<(Vec<f64>, f64)>> = sys.pairs.iter().map(|(_, f)| f.weighted_points(trunc_box)).collect();
    for (j, f) in freqs.iter().enumerate() {
        if f.is_empty() {
            notes.push(format!("pair {j}: no frequency inside the truncation box, contributes 0"));
        }
    }
    let pairs: Vec<(&Window, Vec<(Vec<f64>, f64)>)> =
        sys.pairs.iter().zip(freqs.iter().cloned()).map(|((w, _), f)| (w, f)).collect();
    let op = FrameOperator::new(model, &pairs);
    let n = op.size();
    let (lo, hi, solver) = if n <= opts.dense_limit {
        let (lo, hi) = dense_extremes(&op.dense());
        (lo, hi, Solver::Dense)
    } else {
        let out = lanczos_extremes(n, |v: &[Complex64]| op.apply(v), opts.rel_tol, opts.max_iter);
        if !out.converged {
            notes.push(format!("Lanczos stopped after {} steps without converging", out.iterations));
        }
        (
            out.min,
            out.max,
            Solver::Lanczos {
                iterations: out.iterations,
                converged: out.converged,
            },
        )
    };
    let b_est = hi.max(0.0);
    let mut a_est = if lo.abs() <= 1e-12 * b_est { 0.0 } else { lo };
    if a_est < 0.0 {
        notes.push(format!("smallest eigenvalue {lo:e} is negative beyond roundoff; clamped to 0"));
        a_est = 0.0;
    }
    Ok(FrameBoundsReport {
        a_est,
        b_est,
        grid_n,
        trunc_box: trunc_box.clone(),
        tight_ratio: if a_est > 0.0 { b_est / a_est } else { f64::INFINITY },
        model_cells: n,
        frequency_counts: freqs.iter().map(Vec::len).collect(),
        solver,
        notes,
    })
}

/// `[lo,hi)` per axis joined by `x`.
pub fn format_box(b: &AxisBox) -> String {
    (0..b.dim())
        .map(|i| format!("[{},{})", b.lo()[i], b.hi()[i]))
        .collect::<Vec<_>>()
        .join("x")
}

/// CSV with header `system,grid_n,trunc,A_est,B_est,tight_ratio`.
pub fn write_frame_bounds_csv<W: Write>(rows: &[(&str, &FrameBoundsReport)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["system", "grid_n", "trunc", "A_est", "B_est", "tight_ratio"])?;
    for (name, r) in rows {
        w.write_record([
            name.to_string(),
            r.grid_n.to_string(),
            format_box(&r.trunc_box),
            r.a_est.to_string(),
            r.b_est.to_string(),
            r.tight_ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One inequality `lhs ≤ rhs` with its margin.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BracketCheck {
    fn new(label: String, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            pass: lhs <= rhs + tol,
            label,
            lhs,
            rhs,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Thm31Report {
    /// `ess sup |g_j| ≤ √(B/D⁺(Λ_j))` for every `j` with `D⁺(Λ_j) > 0`.
    pub upper: Vec<BracketCheck>,
    /// `√(A/D⁺(Σ_{J'} δ_{Λ_j})) ≤ ess inf max_{J'} |g_j|` and
    /// `ess sup max_{J'} |g_j| ≤ max_{J'} √(B/D⁺(Λ_j))`.
    pub lower: Vec<BracketCheck>,
    /// Bounded windows whose frequencies have positive upper density.
    pub j_prime: Vec<usize>,
    pub notes: Vec<String>,
}

impl Thm31Report {
    pub fn all_pass(&self) -> bool {
        self.upper.iter().chain(&self.lower).all(|c| c.pass)
    }
}

/// Check the window/density brackets implied by frame bounds `(A, B)`.
///
/// `densities[j]` are the densities of `Λ_j`; ess bounds come from
/// [`ess_bounds`] at `grid_n`. Each comparison passes within `tol`.
pub fn check_thm31(
    sys: &WindowedSystem,
    report: &FrameBoundsReport,
    densities: &[DensityReport],
    grid_n: usize,
    tol: f64,
) -> Result<Thm31Report> {
    if densities.len() != sys.pairs.len() {
        return Err(invalid("densities", "need one density report per pair"));
    }
    let (a, b) = (report.a_est, report.b_est);
    let windows = sys.windows();
    let all = ess_bounds(&windows, &sys.omega, grid_n)?;
    let mut notes = all.notes.clone();
    let mut upper = Vec::new();
    for (j, d) in densities.iter().enumerate() {
        if d.upper <= 0.0 {
            continue;
        }
        let rhs = (b / d.upper).sqrt();
        let lhs = if all.j.contains(&j) {
            ess_bounds(std::slice::from_ref(&windows[j]), &sys.omega, grid_n)?.big_m
        } else {
            notes.push(format!("pair {j}: unbounded window with positive density cannot be Bessel"));
            f64::INFINITY
        };
        upper.push(BracketCheck::new(format!("ess sup |g_{j}| <= sqrt(B/D+(L_{j}))"), lhs, rhs, tol));
    }
    let j_prime: Vec<usize> = all.j.iter().copied().filter(|&j| densities[j].upper > 0.0).collect();
    let mut lower = Vec::new();
    if j_prime.is_empty() {
        if a > 0.0 {
            notes.push("contradiction: A > 0 but no bounded window has frequencies of positive upper density".into());
        }
    } else {
        let members: Vec<Window> = j_prime.iter().map(|&j| windows[j].clone()).collect();
        let e = ess_bounds(&members, &sys.omega, grid_n)?;
        let discrete: Option<Vec<(f64, StructuredPointSet)>> = j_prime
            .iter()
            .map(|&j| match &sys.pairs[j].1 {
                FreqSpec::Discrete(s) => Some((1.0, s.clone())),
                FreqSpec::Continuous(_) => None,
            })
            .collect();
        let d_sum = match discrete {
            Some(terms) => density_closed_form(&WeightedComb::new(terms)?).upper,
            None => {
                notes.push("continuous frequency measures: D+ of the sum bounded by the sum of D+".into());
                j_prime.iter().map(|&j| densities[j].upper).sum()
            }
        };
        let rhs_max = j_prime
            .iter()
            .map(|&j| (b / densities[j].upper).sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        lower.push(BracketCheck::new(
            "sqrt(A/D+(sum over J')) <= ess inf max |g_j|".into(),
            (a / d_sum).sqrt(),
            e.m_hat,
            tol,
        ));
        lower.push(BracketCheck::new("ess inf max |g_j| <= ess sup max |g_j|".into(), e.m_hat, e.big_m, tol));
        lower.push(BracketCheck::new(
            "ess sup max |g_j| <= max sqrt(B/D+(L_j))".into(),
            e.big_m,
            rhs_max,
            tol,
        ));
        if b > 0.0 && (b - a).abs() <= 1e-9 * b {
            notes.push("A = B: lower bracket applied in the tight case".into());
        }
    }
    Ok(Thm31Report {
        upper,
        lower,
        j_prime,
        notes,
    })
}

/// Windows `g_j √φ` for a weight `φ ≥ 0`.
///
/// `φ` is sampled at the cell-average nodes of an `grid_n` grid over `Ω` and
/// rejected if any node is negative.
pub fn weighted_transform(phi: &Window, windows: &[Window], omega: &BoxUnionSet, grid_n: usize) -> Result<Vec<Window>> {
    let phi_expr = phi
        .expr()
        .ok_or_else(|| invalid("phi", "the weight must be an expression"))?
        .clone();
    phi.check_dim(omega.dim())?;
    let model = Model::uniform(omega, grid_n)?;
    let d = omega.dim();
    let s = window::subdivisions(d);
    for cell in &model.cells {
        for p in &cell.pieces {
            for mut k in 0..s.pow(d as u32) {
                let x: Vec<f64> = (0..d)
                    .map(|i| {
                        let j = k % s;
                        k /= s;
                        p.lo()[i] + (j as f64 + 0.5) * p.side(i) / s as f64
                    })
                    .collect();
                let v = phi_expr.eval(&x);
                if v < 0.0 || v.is_nan() {
                    return Err(invalid("phi", format!("weight is {v} at {x:?}")));
                }
            }
        }
    }
    let root = Expr::Func(Func::Sqrt, Box::new(phi_expr));
    windows
        .iter()
        .map(|w| match w.expr() {
            Some(e) => Ok(Window::from_expr(e.clone().times(root.clone()))),
            None => Err(invalid("windows", "weighted transform needs expression windows")),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub n: f64,
    pub measure: f64,
    pub a_est: f64,
    pub b_est: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// `A_est(N)` never increases along the table.
    pub non_increasing: bool,
}

/// `A_est(N)` of a fixed system on the growing domains `Ω_N = family(N)`,
/// each at `grid_n` cells per axis and its Nyquist truncation.
pub fn infinite_measure_probe(
    windows: &[Window],
    freqs: &[StructuredPointSet],
    family: impl Fn(f64) -> Result<BoxUnionSet>,
    n_list: &[f64],
    grid_n: usize,
) -> Result<DecayTable> {
    if windows.len() != freqs.len() {
        return Err(invalid("freqs", "need one frequency set per window"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let omega = family(n)?;
        let sys = WindowedSystem::new(
            omega.clone(),
            windows.iter().cloned().zip(freqs.iter().cloned().map(FreqSpec::Discrete)).collect(),
        )?;
        let r = estimate_frame_bounds(&sys, grid_n, &nyquist_trunc(&omega, grid_n))?;
        rows.push(DecayRow {
            n,
            measure: omega.measure(),
            a_est: r.a_est,
            b_est: r.b_est,
        });
    }
    let non_increasing = rows.windows(2).all(|w| w[1].a_est <= w[0].a_est);
    Ok(DecayTable { rows, non_increasing })
}

/// Translates `{φ_j(· − t) : t ∈ T_j}` become, after a Fourier transform,
/// windowed exponentials with windows `φ̂_j` and frequencies `−T_j` on the
/// whole space. Probes them on `[−N/2, N/2)^d`.
pub fn translate_frame_probe(
    fourier_windows: &[Window],
    translations: &[StructuredPointSet],
    n_list: &[f64],
    grid_n: usize,
) -> Result<DecayTable> {
    let dim = translations
        .first()
        .ok_or_else(|| invalid("translations", "need at least one translation set"))?
        .dim();
    let freqs: Vec<StructuredPointSet> = translations.iter().map(StructuredPointSet::negated).collect();
    infinite_measure_probe(
        fourier_windows,
        &freqs,
        |n| Ok(BoxUnionSet::from_box(AxisBox::centered(dim, n / 2.0)?)),
        n_list,
        grid_n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_sets::Lattice;
    use proptest::prelude::*;

    fn unit() -> BoxUnionSet {
        BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap()
    }

    fn ints(c: f64) -> StructuredPointSet {
        StructuredPointSet::arithmetic(c).unwrap()
    }

    #[test]
    fn orthonormal_basis_saturates() {
        let sys = WindowedSystem::fourier(unit(), ints(1.0)).unwrap();
        let r = estimate_frame_bounds(&sys, 256, &nyquist_trunc(&unit(), 256)).unwrap();
        assert!((r.a_est - 1.0).abs() < 1e-9 && (r.b_est - 1.0).abs() < 1e-9, "{r:?}");
        assert_eq!(r.model_cells, 256);
        assert_eq!(r.frequency_counts, vec![256]);
    }

    #[test]
    fn half_integers_are_tight_with_constant_two() {
        let sys = WindowedSystem::fourier(unit(), ints(0.5)).unwrap();
        let r = estimate_frame_bounds(&sys, 512, &AxisBox::interval(-64.0, 64.0).unwrap()).unwrap();
        assert!((r.a_est - 2.0).abs() < 0.04 && (r.b_est - 2.0).abs() < 0.04, "{r:?}");
    }

    #[test]
    fn single_frequency_is_rank_one() {
        let zero = StructuredPointSet::finite_perturbation(
            StructuredPointSet::eventually_periodic(
                crate::point_measures::EventuallyPeriodic::new(None, None, 0.0, 0.0, vec![]).unwrap(),
            ),
            vec![vec![0.0]],
            vec![],
        )
        .unwrap();
        let sys = WindowedSystem::fourier(unit(), zero).unwrap();
        let r = estimate_frame_bounds(&sys, 64, &nyquist_trunc(&unit(), 64)).unwrap();
        assert!(r.a_est.abs() < 1e-9);
        assert!((r.b_est - 1.0).abs() < 1e-9);
        assert!(r.tight_ratio.is_infinite());
    }

    #[test]
    fn empty_truncation_noted() {
        let sys = WindowedSystem::fourier(unit(), ints(1.0)).unwrap();
        let r = estimate_frame_bounds(&sys, 16, &AxisBox::interval(0.2, 0.8).unwrap()).unwrap();
        assert_eq!(r.b_est, 0.0);
        assert!(r.notes.iter().any(|n| n.contains("contributes 0")));
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let omega = BoxUnionSet::from_intervals(&[(0.0, 0.7), (1.0, 1.6)]).unwrap();
        let sys = WindowedSystem::new(
            omega.clone(),
            vec![
                (Window::parse("1+x").unwrap(), FreqSpec::Discrete(ints(1.0))),
                (Window::parse("indicator(0,1)").unwrap(), FreqSpec::Discrete(ints(0.5))),
            ],
        )
        .unwrap();
        let trunc = AxisBox::interval(-16.0, 16.0).unwrap();
        let dense = estimate_frame_bounds(&sys, 64, &trunc).unwrap();
        let opts = EstimateOptions {
            dense_limit: 0,
            ..EstimateOptions::default()
        };
        let iter = estimate_frame_bounds_with(&sys, 64, &trunc, &opts).unwrap();
        assert!(matches!(iter.solver, Solver::Lanczos { converged: true, .. }));
        assert!((iter.b_est - dense.b_est).abs() <= 1e-7 * dense.b_est);
        assert!((iter.a_est - dense.a_est).abs() <= 1e-6 * dense.b_est, "{iter:?} {dense:?}");
    }

    #[test]
    fn two_dimensional_square() {
        let omega = BoxUnionSet::from_box(AxisBox::cube(vec![0.0, 0.0], 1.0).unwrap());
        let sys = WindowedSystem::fourier(omega.clone(), StructuredPointSet::lattice(Lattice::scaled_integer(2, 1.0))).unwrap();
        let r = estimate_frame_bounds(&sys, 16, &nyquist_trunc(&omega, 16)).unwrap();
        assert!((r.a_est - 1.0).abs() < 1e-9 && (r.b_est - 1.0).abs() < 1e-9);
    }

    #[test]
    fn continuous_measure_atoms_match_discrete() {
        let atoms: Vec<(Vec<f64>, f64)> = (-32..32).map(|k| (vec![k as f64], 1.0)).collect();
        let m = ContinuousFreqMeasure::new(None, atoms).unwrap();
        let sys = WindowedSystem::new(unit(), vec![(Window::indicator(), FreqSpec::Continuous(m))]).unwrap();
        let r = estimate_frame_bounds(&sys, 64, &nyquist_trunc(&unit(), 64)).unwrap();
        assert!((r.a_est - 1.0).abs() < 1e-9 && (r.b_est - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lebesgue_frequency_measure_is_plancherel() {
        // dξ on a wide box: ∫|f̂|² = ‖f‖², so A = B = 1 up to the band limit
        let dens = GridFunction::sample_real(AxisBox::interval(-32.0, 32.0).unwrap(), 64 * 16, |_| 1.0).unwrap();
        let m = ContinuousFreqMeasure::new(Some(dens), vec![]).unwrap();
        let sys = WindowedSystem::new(unit(), vec![(Window::indicator(), FreqSpec::Continuous(m))]).unwrap();
        let r = estimate_frame_bounds(&sys, 64, &nyquist_trunc(&unit(), 64)).unwrap();
        assert!((r.a_est - 1.0).abs() < 1e-6 && (r.b_est - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn thm31_examples() {
        let sys = WindowedSystem::fourier(unit(), ints(1.0)).unwrap();
        let r = estimate_frame_bounds(&sys, 128, &nyquist_trunc(&unit(), 128)).unwrap();
        let d = vec![density_closed_form(&WeightedComb::dirac(ints(1.0)))];
        let c = check_thm31(&sys, &r, &d, 64, 1e-9).unwrap();
        assert!(c.all_pass(), "{c:?}");
        assert!((c.upper[0].lhs - c.upper[0].rhs).abs() < 1e-9);
        assert!(c.notes.iter().any(|n| n.contains("tight case")));

        let sys2 = WindowedSystem::new(unit(), vec![(Window::parse("2*indicator").unwrap(), FreqSpec::Discrete(ints(1.0)))]).unwrap();
        let r2 = estimate_frame_bounds(&sys2, 128, &nyquist_trunc(&unit(), 128)).unwrap();
        assert!((r2.a_est - 4.0).abs() < 1e-9 && (r2.b_est - 4.0).abs() < 1e-9);
        let c2 = check_thm31(&sys2, &r2, &d, 64, 1e-9).unwrap();
        assert!(c2.all_pass());
        assert!((c2.upper[0].rhs - 2.0).abs() < 1e-9 && (c2.upper[0].lhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_pair_bracket() {
        let sys = WindowedSystem::new(
            unit(),
            vec![
                (Window::parse("x").unwrap(), FreqSpec::Discrete(ints(1.0))),
                (Window::parse("1-x").unwrap(), FreqSpec::Discrete(ints(1.0))),
            ],
        )
        .unwrap();
        let r = estimate_frame_bounds(&sys, 128, &nyquist_trunc(&unit(), 128)).unwrap();
        let d = vec![density_closed_form(&WeightedComb::dirac(ints(1.0))); 2];
        let c = check_thm31(&sys, &r, &d, 64, 0.02).unwrap();
        assert!(c.all_pass(), "{c:?}");
        assert_eq!(c.j_prime, vec![0, 1]);
        // √(A/2) ≤ m̂ with m̂ ≥ 1/2 − 0.01
        assert!(c.lower[0].rhs >= 0.49);
    }

    #[test]
    fn weighted_transforms() {
        let same = weighted_transform(&Window::parse("1").unwrap(), &[Window::indicator()], &unit(), 32).unwrap();
        assert_eq!(same[0].eval(&[0.3]).re, 1.0);
        let four = weighted_transform(&Window::parse("4").unwrap(), &[Window::indicator()], &unit(), 32).unwrap();
        assert_eq!(four[0].eval(&[0.3]).re, 2.0);
        let root = weighted_transform(&Window::parse("x").unwrap(), &[Window::indicator()], &unit(), 32).unwrap();
        let e = ess_bounds(&root, &unit(), 64).unwrap();
        assert!(!e.bounded_away_from_zero());
        assert!((e.big_m - 1.0).abs() < 1e-3);
        assert!(weighted_transform(&Window::parse("x-0.5").unwrap(), &[Window::indicator()], &unit(), 32).is_err());
    }

    #[test]
    fn decay_probe_on_growing_intervals() {
        let t = infinite_measure_probe(
            &[Window::indicator()],
            &[ints(1.0)],
            |n| BoxUnionSet::from_intervals(&[(0.0, n)]),
            &[1.0, 2.0, 4.0],
            64,
        )
        .unwrap();
        assert!(t.non_increasing);
        assert!((t.rows[0].a_est - 1.0).abs() < 1e-9);
        assert!(t.rows[2].a_est <= 0.6 * t.rows[0].a_est);
        let single = infinite_measure_probe(&[Window::indicator()], &[ints(1.0)], |n| BoxUnionSet::from_intervals(&[(0.0, n)]), &[1.0], 64).unwrap();
        assert_eq!(single.rows.len(), 1);
    }

    #[test]
    fn gaussian_decay_and_translates() {
        let g = Window::parse("exp(-x^2/2)").unwrap();
        let t = infinite_measure_probe(
            std::slice::from_ref(&g),
            &[ints(1.0)],
            |n| BoxUnionSet::from_intervals(&[(0.0, n)]),
            &[2.0, 4.0, 8.0],
            64,
        )
        .unwrap();
        assert!(t.non_increasing, "{t:?}");
        let tr = translate_frame_probe(&[g], &[ints(1.0)], &[1.0, 2.0, 4.0], 64).unwrap();
        assert!(tr.non_increasing, "{tr:?}");
        assert!(tr.rows[2].a_est <= 0.6 * tr.rows[0].a_est);
    }

    #[test]
    fn csv_row() {
        let sys = WindowedSystem::fourier(unit(), ints(1.0)).unwrap();
        let r = estimate_frame_bounds(&sys, 8, &nyquist_trunc(&unit(), 8)).unwrap();
        let mut buf = Vec::new();
        write_frame_bounds_csv(&[("unit", &r)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("system,grid_n,trunc,A_est,B_est,tight_ratio\nunit,8,\"[-4,4)\","), "{text}");
    }

    fn arb_piecewise() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.1f64..2.0, 1..5)
    }

    fn piecewise_window(vals: &[f64]) -> Window {
        let n = vals.len() as f64;
        let terms: Vec<String> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{v}*indicator({},{})", i as f64 / n, (i + 1) as f64 / n))
            .collect();
        Window::parse(&terms.join("+")).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn scaling_multiplies_bounds(vals in arb_piecewise(), c in 0.2f64..3.0) {
            let sys = WindowedSystem::new(unit(), vec![(piecewise_window(&vals), FreqSpec::Discrete(ints(0.5)))]).unwrap();
            let trunc = nyquist_trunc(&unit(), 32);
            let r = estimate_frame_bounds(&sys, 32, &trunc).unwrap();
            let s = estimate_frame_bounds(&sys.scaled(c).unwrap(), 32, &trunc).unwrap();
            prop_assert!((s.b_est - c * c * r.b_est).abs() <= 1e-10 * s.b_est.max(1.0));
            prop_assert!((s.a_est - c * c * r.a_est).abs() <= 1e-10 * s.b_est.max(1.0));
        }

        #[test]
        fn bessel_bound_caps_windows(vals in arb_piecewise(), k in 0usize..4) {
            let c = [0.25, 0.5, 1.0, 2.0][k];
            let lam = ints(c);
            let sys = WindowedSystem::new(unit(), vec![(piecewise_window(&vals), FreqSpec::Discrete(lam.clone()))]).unwrap();
            let r = estimate_frame_bounds(&sys, 64, &nyquist_trunc(&unit(), 64)).unwrap();
            let d = density_closed_form(&WeightedComb::dirac(lam));
            let e = ess_bounds(&sys.windows(), &unit(), 16).unwrap();
            prop_assert!(e.big_m <= (r.b_est / d.upper).sqrt() + 1e-6, "{} vs {}", e.big_m, (r.b_est / d.upper).sqrt());
        }

        #[test]
        fn union_bound(v1 in arb_piecewise(), v2 in arb_piecewise()) {
            let s1 = WindowedSystem::new(unit(), vec![(piecewise_window(&v1), FreqSpec::Discrete(ints(1.0)))]).unwrap();
            let s2 = WindowedSystem::new(unit(), vec![(piecewise_window(&v2), FreqSpec::Discrete(ints(0.5)))]).unwrap();
            let trunc = nyquist_trunc(&unit(), 32);
            let b1 = estimate_frame_bounds(&s1, 32, &trunc).unwrap().b_est;
            let b2 = estimate_frame_bounds(&s2, 32, &trunc).unwrap().b_est;
            let b = estimate_frame_bounds(&s1.union(&s2).unwrap(), 32, &trunc).unwrap().b_est;
            prop_assert!(b <= b1 + b2 + 1e-9 * (b1 + b2));
        }

        #[test]
        fn restriction_monotone(lo in 0usize..4, len in 1usize..4) {
            // Ω' = a union of whole model cells inside Ω = [0,1), so the models match
            let a = lo as f64 / 8.0;
            let b = (lo + len) as f64 / 8.0;
            let sys = WindowedSystem::new(unit(), vec![(Window::parse("1+x").unwrap(), FreqSpec::Discrete(ints(0.5)))]).unwrap();
            let trunc = AxisBox::interval(-16.0, 16.0).unwrap();
            let full = estimate_frame_bounds(&sys, 32, &trunc).unwrap();
            let part = sys.restricted(BoxUnionSet::from_intervals(&[(a, b)]).unwrap()).unwrap();
            let r = estimate_frame_bounds(&part, 32, &trunc).unwrap();
            prop_assert!(r.b_est <= full.b_est + 1e-9);
            prop_assert!(r.a_est >= full.a_est - 1e-9);
        }
    }
}
