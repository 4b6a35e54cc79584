//! Explicit frames: windowed exponentials over a covering cube, tight Fourier
//! frames from lattice packings, tight frame measures `(1 + cos 2π⟨x0, ξ⟩) dξ`,
//! and the translate-overlap obstruction to tight Fourier frames.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convolution_lab::GridFunction;
use crate::domain_sets::{canonicalize, AxisBox, BoxUnionSet, Lattice, ResidueVerdict};
use crate::error::{check_dim, invalid, Error, Result};
use crate::frame_analysis::{
    ess_bounds, estimate_frame_bounds, nyquist_trunc, ContinuousFreqMeasure, FrameBoundsReport, FreqSpec, Model,
    Window, WindowedSystem,
};
use crate::point_measures::StructuredPointSet;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionResult {
    pub system: WindowedSystem,
    pub predicted_a: f64,
    pub predicted_b: f64,
    /// Disjoint pieces `T_j` covering the domain, one per window; `None`
    /// where a window received no cell.
    pub partition: Vec<Option<BoxUnionSet>>,
    /// Grid size the prediction was made at.
    pub grid_n: usize,
    /// Truncation box at which the system's model is exact.
    pub matched_trunc: AxisBox,
    pub provenance: String,
}

impl ConstructionResult {
    pub fn partition_measure(&self, j: usize) -> f64 {
        self.partition[j].as_ref().map_or(0.0, BoxUnionSet::measure)
    }
}

/// Tight constant `c` of `{e^{2πi⟨λ,·⟩} : λ ∈ Γ*}` on a fundamental domain,
/// measured by a dense eigensolve of the exponential system on `q`.
fn measured_tight_constant(q: &AxisBox, dual: &Lattice) -> Result<f64> {
    let omega = BoxUnionSet::from_box(q.clone());
    let n = match q.dim() {
        1 => 64,
        2 => 8,
        _ => 4,
    };
    let sys = WindowedSystem::fourier(omega.clone(), StructuredPointSet::lattice(dual.clone()))?;
    let r = estimate_frame_bounds(&sys, n, &nyquist_trunc(&omega, n))?;
    if r.b_est - r.a_est > 1e-9 * r.b_est {
        return Err(Error::Refused(format!(
            "exponentials on the covering cube are not tight: A = {}, B = {}",
            r.a_est, r.b_est
        )));
    }
    Ok(0.5 * (r.a_est + r.b_est))
}

/// Frame of windowed exponentials on `Ω` from windows whose bounded members
/// have `max |g_j|` bounded away from zero.
///
/// Frequencies are `(1/R) Z^d` for the covering cube `Q_R` on bounded
/// windows and `{0}` on unbounded ones. The bounds are
/// `A = c·m̂²` and `B = q·(c·M̂² + max(1, |Ω|)·max_j ‖g_j‖²)` with `c` the
/// measured tight constant of the exponentials on `Q_R`.
pub fn construct_thm02(windows: &[Window], omega: &BoxUnionSet, grid_n: usize) -> Result<ConstructionResult> {
    let e = ess_bounds(windows, omega, grid_n)?;
    if e.j.is_empty() {
        return Err(Error::Refused(
            "every window is essentially unbounded, so no frame of windowed exponentials exists".into(),
        ));
    }
    if !e.bounded_away_from_zero() {
        return Err(Error::Refused(format!(
            "max of the bounded windows is not bounded away from zero (m = {:e}), so no frame of windowed exponentials exists",
            e.m_hat
        )));
    }
    let d = omega.dim();
    let q = omega.cover_cube();
    let r = q.side(0);
    let dual = Lattice::scaled_integer(d, 1.0 / r);
    let c = measured_tight_constant(&q, &dual)?;

    let zero = ContinuousFreqMeasure::new(None, vec![(vec![0.0; d], 1.0)])?;
    let pairs: Vec<(Window, FreqSpec)> = windows
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let f = if e.j.contains(&j) {
                FreqSpec::Discrete(StructuredPointSet::lattice(dual.clone()))
            } else {
                FreqSpec::Continuous(zero.clone())
            };
            (w.clone(), f)
        })
        .collect();
    let system = WindowedSystem::new(omega.clone(), pairs)?;

    // first-hit assignment of whole cells to T_j ⊆ {|g_j| ≥ m̂}
    let model = Model::uniform(omega, grid_n)?;
    let mut parts: Vec<Vec<AxisBox>> = vec![Vec::new(); windows.len()];
    let mut fallback = 0usize;
    for cell in &model.cells {
        let values: Vec<f64> = e.j.iter().map(|&j| windows[j].piece_means(&cell.pieces).1.sqrt()).collect();
        let pick = match values.iter().position(|v| *v >= e.m_hat) {
            Some(k) => k,
            None => {
                fallback += 1;
                values
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .expect("J is non-empty")
            }
        };
        parts[e.j[pick]].extend(cell.pieces.iter().cloned());
    }
    let partition = parts
        .into_iter()
        .map(|boxes| (!boxes.is_empty()).then(|| canonicalize(boxes)).transpose())
        .collect::<Result<Vec<_>>>()?;

    let max_norm_sq = windows
        .iter()
        .map(|w| w.l2_norm_on(omega).map(|n| n * n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let qn = windows.len() as f64;
    let predicted_a = c * e.m_hat * e.m_hat;
    let predicted_b = qn * (c * e.big_m * e.big_m + omega.measure().max(1.0) * max_norm_sq);
    let mut provenance = format!(
        "covering cube side {r}, frequencies (1/{r})Z^{d} on J = {:?}, {{0}} elsewhere; c = {c}, m = {}, M = {}",
        e.j, e.m_hat, e.big_m
    );
    if fallback > 0 {
        provenance.push_str(&format!("; {fallback} cells below m assigned to their largest window"));
    }
    Ok(ConstructionResult {
        system,
        predicted_a,
        predicted_b,
        partition,
        grid_n,
        matched_trunc: nyquist_trunc(&BoxUnionSet::from_box(q), grid_n),
        provenance,
    })
}

/// Two lattice translates of `Ω` overlap, so `χ_Ω` with frequencies `Γ*`
/// misses a function.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop51Refusal {
    pub gamma: Vec<f64>,
    pub gamma_prime: Vec<f64>,
    /// `χ_{E+γ} − χ_{E+γ′}` on a grid aligned with both translates.
    pub counterexample: GridFunction,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prop51Outcome {
    Tight(ConstructionResult),
    Refused(Prop51Refusal),
}

/// `χ_Ω` with frequencies `Γ*`, tight when the `Γ`-translates of `Ω` pack.
///
/// The tight constant is the one measured by a dense eigensolve at `grid_n`
/// and `trunc`; the provenance also records `Σ_λ |χ̂_Ω(λ)|² / |Ω|` over the
/// truncation as an independent Parseval value.
pub fn construct_prop51(omega: &BoxUnionSet, gamma: &Lattice, grid_n: usize, trunc: &AxisBox) -> Result<Prop51Outcome> {
    check_dim(omega.dim(), gamma.dim())?;
    match omega.lattice_residue_check(gamma)? {
        ResidueVerdict::Violated {
            gamma: g0,
            gamma_prime: g1,
            collision,
            ..
        } => {
            let e = collision
                .boxes()
                .iter()
                .max_by(|a, b| a.volume().total_cmp(&b.volume()))
                .cloned()
                .expect("collision has positive measure");
            let counterexample = difference_of_translates(&e, &g0, &g1, grid_n.max(16))?;
            Ok(Prop51Outcome::Refused(Prop51Refusal {
                reason: format!("translates by {g0:?} and {g1:?} overlap on positive measure"),
                gamma: g0,
                gamma_prime: g1,
                counterexample,
            }))
        }
        ResidueVerdict::Holds => {
            let dual = gamma.dual();
            let system = WindowedSystem::fourier(omega.clone(), StructuredPointSet::lattice(dual.clone()))?;
            let r = estimate_frame_bounds(&system, grid_n, trunc)?;
            let freqs = dual.enumerate_in_box(trunc);
            let one = Window::indicator();
            let parseval: f64 = freqs
                .iter()
                .map(|l| box_union_transform(omega, l).norm_sqr())
                .sum::<f64>()
                / one.l2_norm_on(omega)?.powi(2);
            Ok(Prop51Outcome::Tight(ConstructionResult {
                provenance: format!(
                    "packing lattice with covolume {}; eigensolve A = {}, B = {}; Parseval sum for f = 1 gives {parseval}",
                    gamma.covolume(),
                    r.a_est,
                    r.b_est
                ),
                system,
                predicted_a: r.a_est,
                predicted_b: r.b_est,
                partition: vec![Some(omega.clone())],
                grid_n,
                matched_trunc: trunc.clone(),
            }))
        }
    }
}

/// `f = χ_{E'+γ} − χ_{E'+γ′}` for a sub-box `E' ⊆ E` chosen so that both
/// translates are unions of cells of one grid.
fn difference_of_translates(e: &AxisBox, g0: &[f64], g1: &[f64], n_min: usize) -> Result<GridFunction> {
    let d = e.dim();
    let mut n = n_min;
    loop {
        let mut spacing = Vec::with_capacity(d);
        let mut shift_cells = Vec::with_capacity(d);
        let mut ok = true;
        for i in 0..d {
            let delta = (g1[i] - g0[i]).abs();
            if delta == 0.0 {
                spacing.push(e.side(i) / n as f64);
                shift_cells.push(0);
                continue;
            }
            // E' side (n − b)·h ≤ side(E) with h = δ/b
            let b = ((n as f64 * delta) / (e.side(i) + delta)).ceil() as usize;
            if b >= n {
                ok = false;
                break;
            }
            spacing.push(delta / b as f64);
            shift_cells.push(b);
        }
        if !ok {
            n *= 2;
            continue;
        }
        let lo: Vec<f64> = (0..d).map(|i| e.lo()[i] + g0[i].min(g1[i])).collect();
        let hi: Vec<f64> = (0..d).map(|i| lo[i] + n as f64 * spacing[i]).collect();
        let bb = AxisBox::new(lo, hi)?;
        // plus on E'+γ, minus on E'+γ′; which one sits at the low end depends on the sign
        let plus_low: Vec<bool> = (0..d).map(|i| g0[i] <= g1[i]).collect();
        let len = n.pow(d as u32);
        let mut samples = vec![Complex64::new(0.0, 0.0); len];
        let mut weights = vec![0.0; len];
        for (k, (s, w)) in samples.iter_mut().zip(weights.iter_mut()).enumerate() {
            let mut rem = k;
            let mut idx = vec![0usize; d];
            for i in (0..d).rev() {
                idx[i] = rem % n;
                rem /= n;
            }
            let span = |i: usize| n - shift_cells[i];
            let in_plus = (0..d).all(|i| {
                let start = if plus_low[i] { 0 } else { shift_cells[i] };
                idx[i] >= start && idx[i] < start + span(i)
            });
            let in_minus = (0..d).all(|i| {
                let start = if plus_low[i] { shift_cells[i] } else { 0 };
                idx[i] >= start && idx[i] < start + span(i)
            });
            let v = in_plus as i32 - in_minus as i32;
            *s = Complex64::new(v as f64, 0.0);
            if in_plus || in_minus {
                *w = spacing.iter().product();
            }
        }
        return GridFunction::new(bb, n, samples, weights);
    }
}

/// `∫_B e^{−2πi⟨λ,x⟩} dx` in closed form.
pub fn box_transform(b: &AxisBox, lambda: &[f64]) -> Complex64 {
    (0..b.dim())
        .map(|i| {
            let (a, c, l) = (b.lo()[i], b.hi()[i], lambda[i]);
            if l == 0.0 {
                Complex64::new(c - a, 0.0)
            } else {
                (Complex64::from_polar(1.0, -TAU * l * c) - Complex64::from_polar(1.0, -TAU * l * a))
                    / Complex64::new(0.0, -TAU * l)
            }
        })
        .product()
}

fn box_union_transform(omega: &BoxUnionSet, lambda: &[f64]) -> Complex64 {
    omega.boxes().iter().map(|b| box_transform(b, lambda)).sum()
}

/// `⟨f, e_λ⟩ = ∫ f(x) e^{−2πi⟨λ,x⟩} dx` for a piecewise constant grid
/// function (each cell weighted by its fraction `w_c / |cell|`).
pub fn frame_coefficients(f: &GridFunction, freqs: &[Vec<f64>]) -> Vec<Complex64> {
    let vol = f.cell_volume();
    freqs
        .par_iter()
        .map(|l| {
            (0..f.len())
                .filter(|&k| f.cell_weights()[k] > 0.0 && f.samples()[k] != Complex64::new(0.0, 0.0))
                .map(|k| f.samples()[k] * (f.cell_weights()[k] / vol) * box_transform(&f.cell_box(k), l))
                .sum()
        })
        .collect()
}

/// Result of scanning `|Ω ∩ (Ω + x)|` for the tight-frame obstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    /// Smallest radius from the supplied list beyond which every sampled
    /// overlap is positive; `None` when no radius works.
    pub radius: Option<f64>,
    pub x_max: f64,
    pub step: f64,
    pub samples: usize,
    /// Sampled translates with zero overlap.
    pub zero_overlap: Vec<Vec<f64>>,
    /// Maximal runs of consecutive zero-overlap samples (one dimension only).
    pub witness_intervals: Vec<(f64, f64)>,
    pub caveat: String,
}

impl ObstructionReport {
    /// Positive overlap at every sampled translate beyond the radius, so no
    /// tight Fourier frame (on the sampled range).
    pub fn hypothesis_holds(&self) -> bool {
        self.radius.is_some()
    }
}

/// Sample `|Ω ∩ (Ω + x)|` on `[−x_max, x_max]^d` with the given step.
///
/// `tail_measure` is the measure discarded by truncating an unbounded set;
/// it is reported in the caveat.
pub fn check_thm03(
    omega: &BoxUnionSet,
    r_grid: &[f64],
    x_max: f64,
    step: f64,
    tail_measure: Option<f64>,
) -> Result<ObstructionReport> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid("step", "step must be positive"));
    }
    if !(x_max >= 0.0) {
        return Err(invalid("x_max", "x_max must be non-negative"));
    }
    let d = omega.dim();
    let k = (x_max / step + 1e-9).floor() as i64;
    let per_axis = (2 * k + 1) as usize;
    let total = per_axis
        .checked_pow(d as u32)
        .filter(|t| *t <= 50_000_000)
        .ok_or_else(|| invalid("step", "too many sample translates"))?;
    let overlaps: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; d];
            for i in (0..d).rev() {
                x[i] = ((flat % per_axis) as i64 - k) as f64 * step;
                flat /= per_axis;
            }
            let v = omega.translate_overlap(&x).expect("dimension checked");
            (x, v)
        })
        .collect();
    let zero = |v: f64| v <= 1e-12 * omega.measure();
    let norm = |x: &[f64]| x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut radii: Vec<f64> = r_grid.iter().copied().filter(|r| *r >= 0.0 && *r < x_max).collect();
    radii.sort_by(f64::total_cmp);
    let radius = radii
        .into_iter()
        .find(|r| overlaps.iter().all(|(x, v)| norm(x) <= *r || !zero(*v)));
    let zero_overlap: Vec<Vec<f64>> = overlaps.iter().filter(|(_, v)| zero(*v)).map(|(x, _)| x.clone()).collect();
    let mut witness_intervals = Vec::new();
    if d == 1 {
        let mut run: Option<(f64, f64)> = None;
        for (x, v) in &overlaps {
            if zero(*v) {
                run = Some(run.map_or((x[0], x[0]), |(a, _)| (a, x[0])));
            } else if let Some(r) = run.take() {
                witness_intervals.push(r);
            }
        }
        witness_intervals.extend(run);
    }
    let caveat = match tail_measure {
        Some(t) => format!("sampled range |x| <= {x_max} at step {step}; truncated set, discarded tail measure {t:e}"),
        None => format!("sampled range |x| <= {x_max} at step {step}"),
    };
    Ok(ObstructionReport {
        radius,
        x_max,
        step,
        samples: overlaps.len(),
        zero_overlap,
        witness_intervals,
        caveat,
    })
}

/// `(1 + cos 2π⟨x0, ξ⟩) dξ` certified as a tight frame measure with `A = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TightCertificate {
    pub x0: Vec<f64>,
    pub constant_a: f64,
    /// `max_f |∫|f̂|² dμ − ‖f‖²|` over the test family.
    pub residual: f64,
    pub test_family_size: usize,
    pub seed: u64,
}

/// `(1 + cos 2π⟨x0, ξ⟩)` sampled on `n` cells per axis of `on`.
pub fn cosine_measure(x0: &[f64], on: &AxisBox, n: usize) -> Result<ContinuousFreqMeasure> {
    check_dim(on.dim(), x0.len())?;
    let g = GridFunction::sample_real(on.clone(), n, |xi| {
        1.0 + (TAU * xi.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>()).cos()
    })?;
    ContinuousFreqMeasure::new(Some(g), Vec::new())
}

/// Check `∫|f̂|² (1 + cos 2π⟨x0,ξ⟩) dξ = ‖f‖²` on `trials` random functions
/// piecewise constant on `grid_n` cells per axis over `Ω`.
///
/// Uses `∫|f̂|² e^{2πi⟨x0,ξ⟩} dξ = ∫ f(x + x0) conj f(x) dx`, evaluated exactly
/// from piece overlaps. Trial `t` draws from ChaCha8 seeded with `seed + t`.
pub fn cosine_measure_certificate(
    omega: &BoxUnionSet,
    x0: &[f64],
    grid_n: usize,
    trials: usize,
    seed: u64,
) -> Result<TightCertificate> {
    check_dim(omega.dim(), x0.len())?;
    let neg: Vec<f64> = x0.iter().map(|v| -v).collect();
    let (o1, o2) = (omega.translate_overlap(x0)?, omega.translate_overlap(&neg)?);
    if o1 > 0.0 || o2 > 0.0 {
        return Err(Error::Refused(format!(
            "|Ω ∩ (Ω + x0)| = {o1} > 0, so (1 + cos) is not a tight frame measure for this shift"
        )));
    }
    if trials == 0 {
        return Err(invalid("trials", "need at least one test function"));
    }
    let model = Model::uniform(omega, grid_n)?;
    let pieces: Vec<(usize, AxisBox)> = model
        .cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| cell.pieces.iter().map(move |p| (c, p.clone())))
        .collect();
    let residuals: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let mut vals: Vec<Complex64> = (0..model.cells.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let norm_sq: f64 = vals.iter().zip(&model.cells).map(|(v, c)| v.norm_sqr() * c.weight).sum();
            let scale = norm_sq.sqrt();
            for v in &mut vals {
                *v /= scale;
            }
            // ∫ f(x + x0) conj f(x) dx = Σ_{a,b} f_a conj f_b |(P_a − x0) ∩ P_b|
            let mut corr = Complex64::new(0.0, 0.0);
            for (a, pa) in &pieces {
                let shifted = pa.translate(&neg);
                for (b, pb) in &pieces {
                    let ov = shifted.intersection_volume(pb);
                    if ov > 0.0 {
                        corr += vals[*a] * vals[*b].conj() * ov;
                    }
                }
            }
            // ‖f‖ = 1, and ∫|f̂|² dμ = ‖f‖² + Re corr
            corr.re.abs()
        })
        .collect();
    Ok(TightCertificate {
        x0: x0.to_vec(),
        constant_a: 1.0,
        residual: residuals.into_iter().fold(0.0, f64::max),
        test_family_size: trials,
        seed,
    })
}

/// CSV with header `x0,residual,trials`; vector shifts are joined by `;`.
pub fn write_certificates_csv<W: Write>(certs: &[TightCertificate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x0", "residual", "trials"])?;
    for c in certs {
        let x0 = c.x0.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        w.write_record([x0, c.residual.to_string(), c.test_family_size.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Frame bounds of a construction at its matched discretization.
pub fn estimate_matched(c: &ConstructionResult) -> Result<FrameBoundsReport> {
    estimate_frame_bounds(&c.system, c.grid_n, &c.matched_trunc)
}
