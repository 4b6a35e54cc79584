//! Sampled functions on boxes, comb convolutions `μ ∗ f`, translation
//! boundedness and the density–convolution inequalities
//! `D⁺(Σ (∫h_i) μ_i) ≤ sup Σ μ_i ∗ h_i` and `inf Σ μ_i ∗ h_i ≤ D⁻(...)`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain_sets::{AxisBox, BoxUnionSet};
use crate::error::{check_dim, invalid, Result};
use crate::point_measures::{cell_samples, density_closed_form, DensityReport, WeightedComb};

/// Samples at the centres of a uniform `n^d` cell grid on a box.
///
/// Cell `(i_0, .., i_{d-1})` is stored at flat index `Σ i_k n^{d-1-k}`
/// (last axis fastest) and has centre `lo + (i + 1/2)·spacing`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    bounding_box: AxisBox,
    n_per_axis: usize,
    samples: Vec<Complex64>,
    cell_weights: Vec<f64>,
}

/// Relative distance under which a point is snapped onto a box face.
const FACE_SNAP: f64 = 1e-9;

impl GridFunction {
    pub fn new(
        bounding_box: AxisBox,
        n_per_axis: usize,
        samples: Vec<Complex64>,
        cell_weights: Vec<f64>,
    ) -> Result<Self> {
        let d = bounding_box.dim();
        if n_per_axis == 0 {
            return Err(invalid("n_per_axis", "need at least one cell per axis"));
        }
        let len = n_per_axis
            .checked_pow(d as u32)
            .ok_or_else(|| invalid("n_per_axis", "grid too large"))?;
        if samples.len() != len {
            return Err(invalid("samples", format!("expected {len} samples, got {}", samples.len())));
        }
        if cell_weights.len() != len {
            return Err(invalid(
                "cell_weights",
                format!("expected {len} weights, got {}", cell_weights.len()),
            ));
        }
        if cell_weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("cell_weights", "weights must be non-negative"));
        }
        if cell_weights.iter().sum::<f64>() > bounding_box.volume() + 1e-9 {
            return Err(invalid("cell_weights", "weights exceed the box volume"));
        }
        Ok(Self {
            bounding_box,
            n_per_axis,
            samples,
            cell_weights,
        })
    }

    /// Sample `f` at every cell centre; weights are full cell volumes.
    pub fn sample(bounding_box: AxisBox, n_per_axis: usize, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Result<Self> {
        let d = bounding_box.dim();
        let len = n_per_axis
            .checked_pow(d as u32)
            .ok_or_else(|| invalid("n_per_axis", "grid too large"))?;
        let proto = Self {
            bounding_box,
            n_per_axis,
            samples: Vec::new(),
            cell_weights: Vec::new(),
        };
        let samples: Vec<Complex64> = (0..len)
            .into_par_iter()
            .map(|k| f(&proto.cell_center(k)))
            .collect();
        let vol = proto.cell_volume();
        Self::new(proto.bounding_box, n_per_axis, samples, vec![vol; len])
    }

    pub fn sample_real(bounding_box: AxisBox, n_per_axis: usize, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        Self::sample(bounding_box, n_per_axis, |x| Complex64::new(f(x), 0.0))
    }

    /// `χ_Ω` on the bounding box of `Ω`, with cell weights `|cell ∩ Ω|` and
    /// samples equal to the covered fraction of each cell.
    pub fn indicator(omega: &BoxUnionSet, n_per_axis: usize) -> Result<Self> {
        let mut g = Self::sample_real(omega.bounding_box(), n_per_axis, |_| 1.0)?;
        g.attach_set(omega)?;
        let vol = g.cell_volume();
        for (s, w) in g.samples.iter_mut().zip(&g.cell_weights) {
            *s = Complex64::new(w / vol, 0.0);
        }
        Ok(g)
    }

    /// Replace the cell weights by `|cell ∩ Ω|`.
    pub fn attach_set(&mut self, omega: &BoxUnionSet) -> Result<()> {
        check_dim(self.dim(), omega.dim())?;
        let weights: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|k| omega.measure_in(&self.cell_box(k)))
            .collect();
        self.cell_weights = weights;
        Ok(())
    }

    pub fn bounding_box(&self) -> &AxisBox {
        &self.bounding_box
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn dim(&self) -> usize {
        self.bounding_box.dim()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.bounding_box.side(axis) / self.n_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).product()
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for axis in (0..d).rev() {
            idx[axis] = k % self.n_per_axis;
            k /= self.n_per_axis;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n_per_axis + i)
    }

    pub fn cell_center(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.bounding_box.lo()[axis] + (i as f64 + 0.5) * self.spacing(axis))
            .collect()
    }

    pub fn cell_box(&self, k: usize) -> AxisBox {
        let idx = self.multi_index(k);
        let lo: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.bounding_box.lo()[axis] + i as f64 * self.spacing(axis))
            .collect();
        let hi: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(axis, &i)| {
                if i + 1 == self.n_per_axis {
                    self.bounding_box.hi()[axis]
                } else {
                    self.bounding_box.lo()[axis] + (i + 1) as f64 * self.spacing(axis)
                }
            })
            .collect();
        AxisBox::new(lo, hi).expect("cell of a valid grid")
    }

    /// Fractional grid coordinate of `x` along `axis` (cell `i` spans `[i, i+1)`),
    /// or `None` outside the half-open box after face snapping.
    fn grid_coord(&self, axis: usize, x: f64) -> Option<f64> {
        let lo = self.bounding_box.lo()[axis];
        let hi = self.bounding_box.hi()[axis];
        let eps = FACE_SNAP * (hi - lo);
        if x < lo - eps || x >= hi - eps {
            return None;
        }
        Some(((x - lo) / self.spacing(axis)).clamp(0.0, self.n_per_axis as f64))
    }

    /// Multilinear interpolation between cell centres, constant beyond the
    /// outermost centres and zero outside the box.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        if x.len() != d {
            return Complex64::new(0.0, 0.0);
        }
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for axis in 0..d {
            let Some(t) = self.grid_coord(axis, x[axis]) else {
                return Complex64::new(0.0, 0.0);
            };
            let u = (t - 0.5).clamp(0.0, (self.n_per_axis - 1) as f64);
            let i = (u.floor() as usize).min(self.n_per_axis.saturating_sub(2));
            base[axis] = i;
            frac[axis] = if self.n_per_axis == 1 { 0.0 } else { u - i as f64 };
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = vec![0usize; d];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            for axis in 0..d {
                let up = corner >> axis & 1 == 1;
                if up && self.n_per_axis == 1 {
                    w = 0.0;
                    break;
                }
                idx[axis] = base[axis] + up as usize;
                w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            }
            if w != 0.0 {
                acc += self.samples[self.flat_index(&idx)] * w;
            }
        }
        acc
    }

    /// Sample of the cell containing `x`, zero outside the box.
    pub fn eval_cell(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        if x.len() != d {
            return Complex64::new(0.0, 0.0);
        }
        let mut idx = vec![0usize; d];
        for axis in 0..d {
            let Some(t) = self.grid_coord(axis, x[axis]) else {
                return Complex64::new(0.0, 0.0);
            };
            idx[axis] = (t.floor() as usize).min(self.n_per_axis - 1);
        }
        self.samples[self.flat_index(&idx)]
    }

    /// Midpoint-rule integral `Σ w_k f_k`.
    pub fn integral(&self) -> Complex64 {
        self.samples
            .iter()
            .zip(&self.cell_weights)
            .map(|(s, w)| s * w)
            .sum()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * a).collect(),
            ..self.clone()
        }
    }

    /// Error unless every sample is real and non-negative.
    fn require_nonnegative(&self, field: &'static str) -> Result<()> {
        if let Some(s) = self.samples.iter().find(|s| !(s.re >= 0.0) || s.im != 0.0) {
            return Err(invalid(field, format!("sample {s} is not a non-negative real")));
        }
        Ok(())
    }

    /// First-difference total variation along each axis, scaled so a unit
    /// jump across a hyperplane of area `a` contributes `a`. Differences
    /// involving the implicit zero outside the box are not counted.
    pub fn interior_variation(&self) -> Vec<f64> {
        let d = self.dim();
        let n = self.n_per_axis;
        (0..d)
            .map(|axis| {
                let face = self.cell_volume() / self.spacing(axis);
                let stride = n.pow((d - 1 - axis) as u32);
                let mut tv = 0.0;
                for k in 0..self.len() {
                    if (k / stride) % n + 1 < n {
                        tv += (self.samples[k + stride] - self.samples[k]).norm();
                    }
                }
                tv * face
            })
            .collect()
    }

    /// Real parts as CSV with header `x,value` (or `x1,..,xd,value`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.dim();
        let mut header: Vec<String> = if d == 1 {
            vec!["x".into()]
        } else {
            (1..=d).map(|i| format!("x{i}")).collect()
        };
        header.push("value".into());
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row: Vec<String> = self.cell_center(k).iter().map(f64::to_string).collect();
            row.push(self.samples[k].re.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `x ↦ Σ_λ w(λ) f(x − λ)` on the cell centres of `eval_box`.
pub fn comb_convolve(mu: &WeightedComb, f: &GridFunction, eval_box: &AxisBox, n_eval: usize) -> Result<GridFunction> {
    check_dim(mu.dim(), f.dim())?;
    check_dim(mu.dim(), eval_box.dim())?;
    f.require_nonnegative("f")?;
    let support = f.bounding_box();
    GridFunction::sample_real(eval_box.clone(), n_eval, |x| {
        // λ ∈ (x − hi, x − lo]; widen well past any face snapping and let f
        // reject the extra atoms.
        let lo: Vec<f64> = (0..x.len())
            .map(|i| x[i] - support.hi()[i] - 0.01 * support.side(i))
            .collect();
        let hi: Vec<f64> = (0..x.len())
            .map(|i| x[i] - support.lo()[i] + 0.01 * support.side(i))
            .collect();
        let window = AxisBox::new(lo, hi).expect("window around a finite point");
        mu.atoms_in(&window)
            .into_iter()
            .map(|(p, w)| {
                let y: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
                w * f.eval(&y).re
            })
            .sum()
    })
}

/// Sliding-window estimate of `sup_x μ(x + K)` and a maximising `x`.
///
/// In dimension one the count `x ↦ μ(x + K)` only increases when the left
/// edge of `x + K` moves onto an atom, so every position `λ − lo(K)` for an
/// atom `λ` near the structure is a candidate and the result is exact.
/// In higher dimensions (lattice cosets) the candidates are the products of
/// per-axis atom coordinates over one fundamental cell, plus `x_samples^d`
/// grid positions.
pub fn translation_bounded_probe(mu: &WeightedComb, k: &AxisBox, x_samples: usize) -> Result<(f64, Vec<f64>)> {
    check_dim(mu.dim(), k.dim())?;
    if x_samples == 0 {
        return Err(invalid("x_samples", "need at least one sample"));
    }
    let d = mu.dim();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if d == 1 {
        let (a, b) = mu.anchor_span_1d();
        let side = k.side(0);
        let period = mu.min_period();
        let tail = 3.0 * side + if period.is_finite() { period } else { 0.0 };
        let region = AxisBox::interval(a - tail, b + tail)?;
        candidates.extend(mu.atoms_in(&region).into_iter().map(|(p, _)| vec![p[0] - k.lo()[0]]));
        let step = if period.is_finite() { period / x_samples as f64 } else { side };
        let n = ((region.side(0)) / step).ceil() as usize;
        candidates.extend((0..=n).map(|i| vec![region.lo()[0] + i as f64 * step]));
    } else {
        let gens = mu
            .cell_generators()
            .ok_or_else(|| invalid("mu", "multi-dimensional combs must be lattice based"))?;
        let grid = cell_samples(&gens, x_samples);
        // bounding box of one fundamental cell, grown by K
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in cell_samples(&gens, 2) {
            for i in 0..d {
                lo[i] = lo[i].min(x[i]);
                hi[i] = hi[i].max(x[i]);
            }
        }
        let cell = AxisBox::new(lo.clone(), hi.iter().zip(&lo).map(|(h, l)| h.max(l + 1e-12)).collect())?;
        let region = AxisBox::new(
            (0..d).map(|i| cell.lo()[i] + k.lo()[i] - 1e-9).collect(),
            (0..d).map(|i| cell.hi()[i] + k.lo()[i] + 1e-9).collect(),
        )?;
        let mut coords: Vec<Vec<f64>> = vec![Vec::new(); d];
        for (p, _) in mu.atoms_in(&region) {
            for i in 0..d {
                coords[i].push(p[i] - k.lo()[i]);
            }
        }
        for c in &mut coords {
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        }
        let total: usize = coords.iter().map(Vec::len).product();
        if total > 0 && total <= 100_000 {
            for mut idx in 0..total {
                let mut x = vec![0.0; d];
                for i in (0..d).rev() {
                    x[i] = coords[i][idx % coords[i].len()];
                    idx /= coords[i].len();
                }
                candidates.push(x);
            }
        }
        candidates.extend(grid);
    }
    let counts: Vec<f64> = candidates
        .par_iter()
        .map(|x| mu.mass_in(&k.translate(x)))
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for (x, c) in candidates.into_iter().zip(counts) {
        if c > best.0 {
            best = (c, x);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct Thm23Report {
    /// `S = Σ_i μ_i ∗ h_i` on the evaluation grid.
    pub s: GridFunction,
    pub a_hat: f64,
    pub b_hat: f64,
    /// `∫ h_i` by the midpoint rule.
    pub masses: Vec<f64>,
    /// `D⁻` and `D⁺` of `Σ_i (∫h_i) μ_i`.
    pub density: DensityReport,
    /// Quadrature and sampling slack used in both comparisons.
    pub tol: f64,
    /// `D⁺(μ) ≤ B̂ + tol`.
    pub upper_holds: bool,
    /// `Â − tol ≤ D⁻(μ)`.
    pub lower_holds: bool,
}

/// Evaluate `S = Σ μ_i ∗ h_i` and compare its range with the densities of
/// `Σ (∫h_i) μ_i`.
///
/// The slack is `1e-12 + Σ_i D⁺(μ_i)·δ_i·TV(h_i)` with `δ_i` the coarser of the
/// sample spacing of `h_i` and the evaluation spacing, and `TV` the interior
/// first-difference variation.
pub fn verify_thm23(pairs: &[(WeightedComb, GridFunction)], eval_box: &AxisBox, n_eval: usize) -> Result<Thm23Report> {
    if pairs.is_empty() {
        return Err(invalid("pairs", "need at least one (measure, function) pair"));
    }
    let d = eval_box.dim();
    let mut total: Option<GridFunction> = None;
    let mut masses = Vec::with_capacity(pairs.len());
    let mut tol = 1e-12;
    let mut terms = Vec::new();
    for (mu, h) in pairs {
        check_dim(d, mu.dim())?;
        let conv = comb_convolve(mu, h, eval_box, n_eval)?;
        total = Some(match total {
            None => conv,
            Some(mut acc) => {
                for (a, b) in acc.samples.iter_mut().zip(&conv.samples) {
                    *a += b;
                }
                acc
            }
        });
        let mass = h.integral().re;
        masses.push(mass);
        let dens = density_closed_form(mu).upper;
        let tv = h.interior_variation();
        tol += (0..d)
            .map(|axis| dens * h.spacing(axis).max(eval_box.side(axis) / n_eval as f64) * tv[axis])
            .sum::<f64>();
        if mass > 0.0 {
            terms.extend(mu.scaled(mass)?.terms().iter().cloned());
        }
    }
    let s = total.expect("non-empty pairs");
    let values: Vec<f64> = s.samples.iter().map(|v| v.re).collect();
    let a_hat = values.iter().copied().fold(f64::INFINITY, f64::min);
    let b_hat = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let density = if terms.is_empty() {
        DensityReport {
            lower: 0.0,
            upper: 0.0,
            method: crate::point_measures::DensityMethod::ClosedForm,
            estimator_trace: Vec::new(),
        }
    } else {
        density_closed_form(&WeightedComb::new(terms)?)
    };
    Ok(Thm23Report {
        upper_holds: density.upper <= b_hat + tol,
        lower_holds: a_hat - tol <= density.lower,
        s,
        a_hat,
        b_hat,
        masses,
        density,
        tol,
    })
}
