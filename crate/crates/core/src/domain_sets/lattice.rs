use nalgebra::{DMatrix, DVector};

use super::AxisBox;
use crate::error::{check_dim, invalid, Result};

/// Full-rank lattice `Γ = B·Z^d`; the columns of `B` generate it.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    covolume: f64,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(invalid("basis", "lattice basis must be a non-empty square matrix"));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(invalid("basis", "non-finite entry"));
        }
        let covolume = basis.determinant().abs();
        let scale: f64 = basis
            .column_iter()
            .map(|c| c.norm())
            .product();
        if covolume <= 1e-12 * scale {
            return Err(invalid("basis", "lattice basis is singular"));
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| invalid("basis", "lattice basis is singular"))?;
        Ok(Self {
            basis,
            inverse,
            covolume,
        })
    }

    /// Build from generator vectors (the columns of the basis).
    pub fn from_generators(generators: &[Vec<f64>]) -> Result<Self> {
        let d = generators.len();
        for g in generators {
            check_dim(d, g.len())?;
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| generators[j][i]))
    }

    /// `c·Z^d`.
    pub fn scaled_integer(dim: usize, c: f64) -> Self {
        Self::diagonal(&vec![c; dim]).expect("positive spacing")
    }

    /// Rectangular lattice with the given per-axis spacings.
    pub fn diagonal(spacings: &[f64]) -> Result<Self> {
        if spacings.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(invalid("spacing", "lattice spacings must be positive"));
        }
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(spacings)))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn generators(&self) -> Vec<Vec<f64>> {
        self.basis
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    /// `|det B|`, the volume of a fundamental domain.
    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Points per unit volume.
    pub fn density(&self) -> f64 {
        1.0 / self.covolume
    }

    /// `Γ* = {λ : ⟨λ, γ⟩ ∈ Z for all γ ∈ Γ}`, generated by `B^{-T}`.
    pub fn dual(&self) -> Lattice {
        Lattice::new(self.inverse.transpose()).expect("inverse of invertible basis")
    }

    /// Per-axis spacings when the basis is diagonal.
    pub fn diagonal_spacings(&self) -> Option<Vec<f64>> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if i != j && self.basis[(i, j)] != 0.0 {
                    return None;
                }
            }
        }
        Some((0..d).map(|i| self.basis[(i, i)].abs()).collect())
    }

    /// Lattice coordinates `B^{-1} x`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        (self.inverse.clone() * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect()
    }

    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.basis[(i, j)] * coeffs[j] as f64).sum())
            .collect()
    }

    /// Whether `x` is a lattice point up to relative tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.coordinates(x)
            .iter()
            .all(|c| (c - c.round()).abs() <= tol)
    }

    /// Integer coefficient ranges covering every lattice point in `window`.
    pub(crate) fn coefficient_ranges(&self, window: &AxisBox) -> Vec<(i64, i64)> {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for corner in 0..(1usize << d) {
            let x: Vec<f64> = (0..d)
                .map(|i| {
                    if corner >> i & 1 == 0 {
                        window.lo()[i]
                    } else {
                        window.hi()[i]
                    }
                })
                .collect();
            for (i, c) in self.coordinates(&x).into_iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| ((a - 1e-9).floor() as i64, (b + 1e-9).ceil() as i64))
            .collect()
    }

    /// Lattice points in the half-open `window`, lexicographically sorted.
    ///
    /// Points within `1e-9` (relative to the window size) of a face are
    /// snapped to it before the half-open test, so integer multiples that
    /// round to just below an upper face are still excluded.
    pub fn enumerate_in_box(&self, window: &AxisBox) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        self.for_each_in_box(window, &[0.0; 0], |p| out.push(p.to_vec()));
        sort_points(&mut out);
        out
    }

    /// Visit every point of `offset + Γ` in the half-open window.
    pub(crate) fn for_each_in_box(
        &self,
        window: &AxisBox,
        offset: &[f64],
        mut visit: impl FnMut(&[f64]),
    ) {
        let d = self.dim();
        let offset: Vec<f64> = if offset.is_empty() {
            vec![0.0; d]
        } else {
            offset.to_vec()
        };
        let shifted = window.translate(&offset.iter().map(|v| -v).collect::<Vec<_>>());
        let ranges = self.coefficient_ranges(&shifted);
        let eps: Vec<f64> = (0..d).map(|i| 1e-9 * window.side(i).max(1.0)).collect();
        let mut coeffs: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut p = vec![0.0; d];
        loop {
            for (i, pi) in p.iter_mut().enumerate() {
                *pi = offset[i]
                    + (0..d)
                        .map(|j| self.basis[(i, j)] * coeffs[j] as f64)
                        .sum::<f64>();
            }
            if inside_snapped(window, &p, &eps) {
                visit(&p);
            }
            // odometer increment
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                coeffs[axis] += 1;
                if coeffs[axis] <= ranges[axis].1 {
                    break;
                }
                coeffs[axis] = ranges[axis].0;
                axis += 1;
            }
        }
    }
}

pub(crate) fn inside_snapped(window: &AxisBox, p: &[f64], eps: &[f64]) -> bool {
    p.iter().enumerate().all(|(i, v)| {
        let lo = window.lo()[i];
        let hi = window.hi()[i];
        let v = if (v - lo).abs() <= eps[i] {
            lo
        } else if (v - hi).abs() <= eps[i] {
            hi
        } else {
            *v
        };
        v >= lo && v < hi
    })
}

pub(crate) fn sort_points(points: &mut [Vec<f64>]) {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covolume_and_dual() {
        let l = Lattice::from_generators(&[vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert!((l.covolume() - 6.0).abs() < 1e-12 * 6.0);
        let dual = l.dual();
        assert!((dual.covolume() - 1.0 / 6.0).abs() < 1e-12);
        // ⟨λ, γ⟩ ∈ Z for generator pairs
        for g in l.generators() {
            for h in dual.generators() {
                let ip: f64 = g.iter().zip(&h).map(|(a, b)| a * b).sum();
                assert!((ip - ip.round()).abs() < 1e-12);
            }
        }
        let back = dual.dual();
        assert!((back.basis() - l.basis()).abs().max() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        assert!(Lattice::from_generators(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        assert!(Lattice::diagonal(&[0.0]).is_err());
    }

    #[test]
    fn enumerate_half_open() {
        let z = Lattice::scaled_integer(1, 1.0);
        let pts = z.enumerate_in_box(&AxisBox::interval(-2.5, 2.5).unwrap());
        assert_eq!(pts, vec![vec![-2.0], vec![-1.0], vec![0.0], vec![1.0], vec![2.0]]);
        let half = Lattice::scaled_integer(1, 0.5);
        let pts = half.enumerate_in_box(&AxisBox::interval(0.0, 1.0).unwrap());
        assert_eq!(pts, vec![vec![0.0], vec![0.5]]);
        // 0.1 * 10 rounds to 1.0000000000000002 without snapping
        let tenth = Lattice::scaled_integer(1, 0.1);
        assert_eq!(tenth.enumerate_in_box(&AxisBox::interval(0.0, 1.0).unwrap()).len(), 10);
    }

    #[test]
    fn enumerate_skewed_matches_brute_force() {
        let l = Lattice::from_generators(&[vec![1.0, 0.5], vec![0.3, 1.0]]).unwrap();
        let w = AxisBox::new(vec![-2.0, -1.5], vec![2.5, 3.0]).unwrap();
        let got = l.enumerate_in_box(&w);
        let mut want = Vec::new();
        for a in -20i64..20 {
            for b in -20i64..20 {
                let p = l.point(&[a, b]);
                if w.contains(&p) {
                    want.push(p);
                }
            }
        }
        sort_points(&mut want);
        assert_eq!(got, want);
    }
}
