//! Finite model of `L²(Ω)` and the frame operator of a windowed system on it.
//!
//! `Ω` is covered by a uniform cell grid anchored at the minimum of its
//! bounding box. A function is represented by one value per cell, and the
//! cell weight `w_c = |cell ∩ Ω|` turns the coefficient vector `u_c = √w_c f_c`
//! into an isometric copy of the model space. A pair `(g, Λ)` contributes the
//! rows `λ ↦ √ω_λ Σ_c u_c √w_c conj(ḡ_c) e^{−2πi⟨λ, x_c⟩}` with `ḡ_c` the cell
//! mean of `g` and `x_c` the cell centre, so
//!
//! `S[c, c'] = Σ_j ū_{jc} conj(ū_{jc'}) K_j(x_c − x_c')`,  `ū_{jc} = √w_c ḡ_{jc}`,
//!
//! with `K_j(y) = Σ_λ ω_λ e^{2πi⟨λ, y⟩}` tabulated once per grid offset.
//!
//! The spacing on axis `i` is `max(L_i / grid_n, 1 / W_i)` where `W_i` is
//! the width of the truncation box. When the frequencies are a lattice whose
//! truncation covers whole periods, `K_j` is then an exact aliasing comb and
//! the model reproduces the frame bounds of the continuous system.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::window::Window;
use crate::domain_sets::{AxisBox, BoxUnionSet};
use crate::error::{invalid, Result};

/// Largest model grid (including empty cells) that is accepted.
const MAX_GRID_CELLS: usize = 1 << 24;

#[derive(Clone, Debug)]
pub(crate) struct ModelCell {
    pub index: Vec<usize>,
    pub weight: f64,
    pub pieces: Vec<AxisBox>,
}

#[derive(Clone, Debug)]
pub(crate) struct Model {
    pub counts: Vec<usize>,
    pub spacing: Vec<f64>,
    pub cells: Vec<ModelCell>,
}

impl Model {
    /// Grid over the bounding box of `Ω` with the given spacing; cells that
    /// miss `Ω` are dropped.
    pub fn with_spacing(omega: &BoxUnionSet, spacing: Vec<f64>) -> Result<Self> {
        let bb = omega.bounding_box();
        let d = bb.dim();
        let counts: Vec<usize> = (0..d)
            .map(|i| ((bb.side(i) / spacing[i]) - 1e-9).ceil().max(1.0) as usize)
            .collect();
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        if total.is_none_or(|t| t > MAX_GRID_CELLS) {
            return Err(invalid("grid_n", "model grid too large"));
        }
        let origin = bb.lo().to_vec();
        let mut pieces: BTreeMap<Vec<usize>, Vec<AxisBox>> = BTreeMap::new();
        for b in omega.boxes() {
            let ranges: Vec<(usize, usize)> = (0..d)
                .map(|i| {
                    let a = ((b.lo()[i] - origin[i]) / spacing[i]).floor().max(0.0) as usize;
                    let e = (((b.hi()[i] - origin[i]) / spacing[i]).ceil() as usize).min(counts[i]);
                    (a.min(counts[i]), e.max(a.min(counts[i])))
                })
                .collect();
            if ranges.iter().any(|(a, e)| a >= e) {
                continue;
            }
            let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
            loop {
                let cell = cell_box(&origin, &spacing, &idx);
                if let Some(p) = b.intersect(&cell) {
                    pieces.entry(idx.clone()).or_default().push(p);
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        break;
                    }
                    idx[axis] += 1;
                    if idx[axis] < ranges[axis].1 {
                        break;
                    }
                    idx[axis] = ranges[axis].0;
                    axis += 1;
                }
                if axis == d {
                    break;
                }
            }
        }
        let cells: Vec<ModelCell> = pieces
            .into_iter()
            .filter_map(|(index, pieces)| {
                let weight: f64 = pieces.iter().map(AxisBox::volume).sum();
                (weight > 0.0).then_some(ModelCell {
                    index,
                    weight,
                    pieces,
                })
            })
            .collect();
        if cells.is_empty() {
            return Err(invalid("omega", "every quadrature cell has zero weight"));
        }
        Ok(Self {
            counts,
            spacing,
            cells,
        })
    }

    /// Model for the frame operator with truncation box `trunc`.
    pub fn for_truncation(omega: &BoxUnionSet, grid_n: usize, trunc: &AxisBox) -> Result<Self> {
        if grid_n == 0 {
            return Err(invalid("grid_n", "need at least one cell per axis"));
        }
        let bb = omega.bounding_box();
        let spacing = (0..bb.dim())
            .map(|i| (bb.side(i) / grid_n as f64).max(1.0 / trunc.side(i)))
            .collect();
        Self::with_spacing(omega, spacing)
    }

    /// Grid with `n` cells per axis over the bounding box.
    pub fn uniform(omega: &BoxUnionSet, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("grid_n", "need at least one cell per axis"));
        }
        let bb = omega.bounding_box();
        Self::with_spacing(omega, (0..bb.dim()).map(|i| bb.side(i) / n as f64).collect())
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }
}

fn cell_box(origin: &[f64], spacing: &[f64], idx: &[usize]) -> AxisBox {
    AxisBox::new(
        (0..idx.len()).map(|i| origin[i] + idx[i] as f64 * spacing[i]).collect(),
        (0..idx.len()).map(|i| origin[i] + (idx[i] + 1) as f64 * spacing[i]).collect(),
    )
    .expect("positive spacing")
}

/// Kernel `K(Δ) = Σ ω e^{2πi⟨λ, Δ·h⟩}` on all grid offsets `Δ`.
struct Kernel {
    extent: Vec<usize>,
    values: Vec<Complex64>,
}

impl Kernel {
    fn new(model: &Model, freqs: &[(Vec<f64>, f64)]) -> Self {
        let d = model.dim();
        let extent: Vec<usize> = model.counts.iter().map(|n| 2 * n - 1).collect();
        let total: usize = extent.iter().product();
        let values = (0..total)
            .into_par_iter()
            .map(|mut k| {
                let mut y = vec![0.0; d];
                for i in (0..d).rev() {
                    let delta = (k % extent[i]) as f64 - (model.counts[i] - 1) as f64;
                    k /= extent[i];
                    y[i] = delta * model.spacing[i];
                }
                freqs
                    .iter()
                    .map(|(lam, w)| {
                        let phase: f64 = lam.iter().zip(&y).map(|(a, b)| a * b).sum();
                        Complex64::from_polar(*w, std::f64::consts::TAU * phase)
                    })
                    .sum()
            })
            .collect();
        Self { extent, values }
    }

    fn at(&self, counts: &[usize], a: &[usize], b: &[usize]) -> Complex64 {
        let mut k = 0;
        for i in 0..a.len() {
            k = k * self.extent[i] + (a[i] + counts[i] - 1 - b[i]);
        }
        self.values[k]
    }
}

struct PairData {
    weighted_means: Vec<Complex64>,
    kernel: Kernel,
}

/// Frame operator `S = T*T` of a windowed system on a [`Model`].
pub(crate) struct FrameOperator {
    pub model: Model,
    pairs: Vec<PairData>,
}

impl FrameOperator {
    /// `pairs[j] = (window, weighted frequencies)`.
    pub fn new(model: Model, pairs: &[(&Window, Vec<(Vec<f64>, f64)>)]) -> Self {
        let data = pairs
            .iter()
            .map(|(window, freqs)| {
                let weighted_means = model
                    .cells
                    .par_iter()
                    .map(|c| window.piece_means(&c.pieces).0 * c.weight.sqrt())
                    .collect();
                PairData {
                    weighted_means,
                    kernel: Kernel::new(&model, freqs),
                }
            })
            .collect();
        Self { model, pairs: data }
    }

    pub fn size(&self) -> usize {
        self.model.cells.len()
    }

    fn entry(&self, a: usize, b: usize) -> Complex64 {
        let ca = &self.model.cells[a].index;
        let cb = &self.model.cells[b].index;
        self.pairs
            .iter()
            .map(|p| p.weighted_means[a] * p.weighted_means[b].conj() * p.kernel.at(&self.model.counts, ca, cb))
            .sum()
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|a| (0..n).map(|b| self.entry(a, b)).collect())
            .collect();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    /// `S v` without forming `S`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .into_par_iter()
            .map(|a| (0..n).map(|b| self.entry(a, b) * v[b]).sum())
            .collect()
    }
}
