//! Finite unions of axis-aligned boxes.
//!
//! Every set handled by the toolkit (the domain of the windows, truncations
//! of unbounded examples, covering cubes, partitions) is a [`BoxUnionSet`]:
//! a list of pairwise interior-disjoint half-open boxes. Measures, translate
//! overlaps and lattice packing checks are then exact up to floating-point
//! rounding of the box endpoints.

mod cantor;
mod lattice;

pub use cantor::{cantor_tower, CantorTower, CantorVariant};
pub use lattice::Lattice;
pub(crate) use lattice::sort_points;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

/// Half-open axis-aligned box `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(invalid("box", "zero-dimensional box"));
        }
        check_dim(lo.len(), hi.len())?;
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(invalid("box", format!("non-finite bound on axis {i}")));
            }
            if a >= b {
                return Err(invalid(
                    "box",
                    format!("degenerate axis {i}: lo {a} is not below hi {b}"),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    /// One-dimensional interval `[a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// Cube `[lo, lo + side)^d` anchored at `lo`.
    pub fn cube(lo: Vec<f64>, side: f64) -> Result<Self> {
        let hi = lo.iter().map(|a| a + side).collect();
        Self::new(lo, hi)
    }

    /// Box `[-r, r)^d`.
    pub fn centered(dim: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Half-open membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v < *b)
    }

    pub fn translate(&self, x: &[f64]) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().zip(x).map(|(a, t)| a + t).collect(),
            hi: self.hi.iter().zip(x).map(|(b, t)| b + t).collect(),
        }
    }

    /// Positive-measure intersection, if any.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = self.lo[i].max(other.lo[i]);
            let b = self.hi[i].min(other.hi[i]);
            if a >= b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(AxisBox { lo, hi })
    }

    pub fn intersection_volume(&self, other: &AxisBox) -> f64 {
        let mut v = 1.0;
        for i in 0..self.dim() {
            let len = self.hi[i].min(other.hi[i]) - self.lo[i].max(other.lo[i]);
            if len <= 0.0 {
                return 0.0;
            }
            v *= len;
        }
        v
    }

    /// `|self ∩ (other + x)|` without allocating the shifted box.
    fn shifted_overlap(&self, other: &AxisBox, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for i in 0..self.dim() {
            let len = self.hi[i].min(other.hi[i] + x[i]) - self.lo[i].max(other.lo[i] + x[i]);
            if len <= 0.0 {
                return 0.0;
            }
            v *= len;
        }
        v
    }

    fn drop_first_axis(&self) -> AxisBox {
        AxisBox {
            lo: self.lo[1..].to_vec(),
            hi: self.hi[1..].to_vec(),
        }
    }

    fn prepend_axis(&self, a: f64, b: f64) -> AxisBox {
        let mut lo = Vec::with_capacity(self.dim() + 1);
        let mut hi = Vec::with_capacity(self.dim() + 1);
        lo.push(a);
        hi.push(b);
        lo.extend_from_slice(&self.lo);
        hi.extend_from_slice(&self.hi);
        AxisBox { lo, hi }
    }

    fn cmp_lex(&self, other: &AxisBox) -> std::cmp::Ordering {
        for (a, b) in self.lo.iter().zip(&other.lo).chain(self.hi.iter().zip(&other.hi)) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Canonical finite union of pairwise interior-disjoint boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxUnionSet {
    dim: usize,
    boxes: Vec<AxisBox>,
}

/// Outcome of [`lattice_residue_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum ResidueVerdict {
    /// `Σ_γ χ_Ω(x + γ) ≤ 1` almost everywhere.
    Holds,
    /// Two distinct lattice translates of the set collide on positive measure.
    Violated {
        gamma: Vec<f64>,
        gamma_prime: Vec<f64>,
        /// A point `x` with `x + gamma` and `x + gamma_prime` both in the set.
        point: Vec<f64>,
        /// `(Ω − γ) ∩ (Ω − γ′)`, the collision region.
        collision: BoxUnionSet,
    },
}

/// Merge arbitrary boxes into canonical form.
///
/// Dimension one uses an endpoint sweep; higher dimensions slice recursively
/// along the first coordinate.
pub fn canonicalize(boxes: Vec<AxisBox>) -> Result<BoxUnionSet> {
    let dim = boxes
        .first()
        .map(AxisBox::dim)
        .ok_or_else(|| invalid("boxes", "a set needs at least one box"))?;
    for b in &boxes {
        check_dim(dim, b.dim())?;
    }
    let mut merged = union_boxes(boxes);
    merged.sort_by(AxisBox::cmp_lex);
    Ok(BoxUnionSet { dim, boxes: merged })
}

fn union_boxes(boxes: Vec<AxisBox>) -> Vec<AxisBox> {
    if boxes.is_empty() {
        return boxes;
    }
    if boxes[0].dim() == 1 {
        return sweep_intervals(boxes);
    }
    let mut cuts: Vec<f64> = boxes.iter().flat_map(|b| [b.lo[0], b.hi[0]]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // (slab lo, slab hi, canonical cross-section)
    let mut slabs: Vec<(f64, f64, Vec<AxisBox>)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let section: Vec<AxisBox> = boxes
            .iter()
            .filter(|bx| bx.lo[0] <= a && bx.hi[0] >= b)
            .map(AxisBox::drop_first_axis)
            .collect();
        if section.is_empty() {
            continue;
        }
        let mut section = union_boxes(section);
        section.sort_by(AxisBox::cmp_lex);
        match slabs.last_mut() {
            Some(last) if last.1 == a && last.2 == section => last.1 = b,
            _ => slabs.push((a, b, section)),
        }
    }
    slabs
        .into_iter()
        .flat_map(|(a, b, section)| {
            section
                .into_iter()
                .map(move |s| s.prepend_axis(a, b))
        })
        .collect()
}

fn sweep_intervals(mut boxes: Vec<AxisBox>) -> Vec<AxisBox> {
    boxes.sort_by(|a, b| a.lo[0].total_cmp(&b.lo[0]));
    let mut out: Vec<AxisBox> = Vec::with_capacity(boxes.len());
    for b in boxes {
        match out.last_mut() {
            Some(last) if b.lo[0] <= last.hi[0] => {
                if b.hi[0] > last.hi[0] {
                    last.hi[0] = b.hi[0];
                }
            }
            _ => out.push(b),
        }
    }
    out
}

impl BoxUnionSet {
    /// Shorthand for a union of one-dimensional intervals.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        let boxes = intervals
            .iter()
            .map(|&(a, b)| AxisBox::interval(a, b))
            .collect::<Result<Vec<_>>>()?;
        canonicalize(boxes)
    }

    pub fn from_box(b: AxisBox) -> Self {
        BoxUnionSet {
            dim: b.dim(),
            boxes: vec![b],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[AxisBox] {
        &self.boxes
    }

    /// Lebesgue measure; exact sum of the canonical box volumes.
    pub fn measure(&self) -> f64 {
        self.boxes.iter().map(AxisBox::volume).sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Smallest box containing the set.
    pub fn bounding_box(&self) -> AxisBox {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for b in &self.boxes {
            for i in 0..self.dim {
                lo[i] = lo[i].min(b.lo[i]);
                hi[i] = hi[i].max(b.hi[i]);
            }
        }
        AxisBox { lo, hi }
    }

    /// `|Ω ∩ box|`.
    pub fn measure_in(&self, window: &AxisBox) -> f64 {
        self.boxes.iter().map(|b| b.intersection_volume(window)).sum()
    }

    /// `Ω ∩ box`, or `None` when the intersection is null.
    pub fn intersect_box(&self, window: &AxisBox) -> Option<BoxUnionSet> {
        let boxes: Vec<AxisBox> = self.boxes.iter().filter_map(|b| b.intersect(window)).collect();
        if boxes.is_empty() {
            None
        } else {
            Some(BoxUnionSet {
                dim: self.dim,
                boxes,
            })
        }
    }

    pub fn intersect(&self, other: &BoxUnionSet) -> Option<BoxUnionSet> {
        let boxes: Vec<AxisBox> = self
            .boxes
            .iter()
            .flat_map(|a| other.boxes.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        if boxes.is_empty() {
            None
        } else {
            canonicalize(boxes).ok()
        }
    }

    pub fn translate(&self, x: &[f64]) -> BoxUnionSet {
        BoxUnionSet {
            dim: self.dim,
            boxes: self.boxes.iter().map(|b| b.translate(x)).collect(),
        }
    }

    /// `|Ω ∩ (Ω + x)|` by pairwise box intersection.
    pub fn translate_overlap(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .boxes
            .iter()
            .map(|a| {
                self.boxes
                    .iter()
                    .map(|b| a.shifted_overlap(b, x))
                    .sum::<f64>()
            })
            .sum())
    }

    /// [`Self::translate_overlap`] at every grid point.
    pub fn overlap_profile(&self, x_grid: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, f64)>> {
        if x_grid.is_empty() {
            return Err(invalid("x_grid", "empty evaluation grid"));
        }
        x_grid
            .iter()
            .map(|x| Ok((x.clone(), self.translate_overlap(x)?)))
            .collect()
    }

    /// Minimal cube `Q_R` containing the set, anchored at the bounding-box minimum.
    pub fn cover_cube(&self) -> AxisBox {
        let bb = self.bounding_box();
        let side = (0..self.dim).map(|i| bb.side(i)).fold(0.0, f64::max);
        AxisBox::cube(bb.lo.clone(), side).expect("bounding box has positive sides")
    }

    /// Decide whether lattice translates of the set pack, i.e. whether
    /// `Σ_γ χ_Ω(x + γ) ≤ 1` almost everywhere.
    ///
    /// Only lattice vectors shorter than the bounding box extent on every axis
    /// can produce a collision, so the enumeration is finite and exact.
    pub fn lattice_residue_check(&self, lattice: &Lattice) -> Result<ResidueVerdict> {
        check_dim(self.dim, lattice.dim())?;
        let bb = self.bounding_box();
        let reach: Vec<f64> = (0..self.dim).map(|i| bb.side(i)).collect();
        let search = AxisBox::new(
            reach.iter().map(|r| -r).collect(),
            reach.clone(),
        )?;
        let mut shifts: Vec<Vec<f64>> = lattice
            .enumerate_in_box(&search)
            .into_iter()
            .filter(|g| g.iter().any(|v| v.abs() > 1e-12))
            .collect();
        shifts.sort_by(|a, b| {
            let na: f64 = a.iter().map(|v| v * v).sum();
            let nb: f64 = b.iter().map(|v| v * v).sum();
            na.total_cmp(&nb).then_with(|| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let floor = 1e-12 * self.measure();
        for delta in shifts {
            // Ω ∩ (Ω − δ): x in it means x and x + δ both lie in Ω.
            let neg: Vec<f64> = delta.iter().map(|v| -v).collect();
            if self.translate_overlap(&neg)? <= floor {
                continue;
            }
            let collision = self
                .intersect(&self.translate(&neg))
                .ok_or_else(|| Error::Refused("overlap without intersection".into()))?;
            let point = collision
                .boxes
                .iter()
                .max_by(|a, b| a.volume().total_cmp(&b.volume()))
                .map(AxisBox::center)
                .expect("non-empty collision");
            return Ok(ResidueVerdict::Violated {
                gamma: vec![0.0; self.dim],
                gamma_prime: delta,
                point,
                collision,
            });
        }
        Ok(ResidueVerdict::Holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: f64, b: f64) -> AxisBox {
        AxisBox::interval(a, b).unwrap()
    }

    #[test]
    fn overlapping_intervals_merge() {
        let s = canonicalize(vec![iv(0.0, 1.0), iv(0.5, 1.5)]).unwrap();
        assert_eq!(s.boxes(), &[iv(0.0, 1.5)]);
        assert_eq!(s.measure(), 1.5);
    }

    #[test]
    fn disjoint_intervals_kept() {
        let s = canonicalize(vec![iv(2.0, 3.0), iv(0.0, 1.0)]).unwrap();
        assert_eq!(s.boxes(), &[iv(0.0, 1.0), iv(2.0, 3.0)]);
        assert_eq!(s.measure(), 2.0);
    }

    #[test]
    fn squares_merge_against_monte_carlo() {
        let a = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let b = AxisBox::new(vec![0.5, 0.0], vec![1.5, 1.0]).unwrap();
        let s = canonicalize(vec![a.clone(), b.clone()]).unwrap();
        assert!((s.measure() - 1.5).abs() < 1e-15);

        // Monte Carlo indicator integration over the bounding box [0,1.5)x[0,1).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let p = [rng.random::<f64>() * 1.5, rng.random::<f64>()];
                a.contains(&p) || b.contains(&p)
            })
            .count();
        let mc = 1.5 * hits as f64 / n as f64;
        assert!((mc - s.measure()).abs() < 0.01, "mc {mc}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(canonicalize(vec![]).is_err());
        let a = iv(0.0, 1.0);
        let b = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            canonicalize(vec![a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(AxisBox::interval(1.0, 1.0).is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap().measure(), 1.0);
        let s = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        assert_eq!(s.measure(), 1.0);
    }

    #[test]
    fn translate_overlaps() {
        let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap();
        assert_eq!(unit.translate_overlap(&[0.5]).unwrap(), 0.5);
        assert_eq!(unit.translate_overlap(&[2.0]).unwrap(), 0.0);
        let two = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        // Oracle: [1,1.5) ∩ ([0,0.5)+1) = [1,1.5), the only non-empty pair.
        assert_eq!(two.translate_overlap(&[1.0]).unwrap(), 0.5);
        assert!(unit.translate_overlap(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn overlap_profiles() {
        let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap();
        let prof = unit
            .overlap_profile(&[vec![0.0], vec![0.5], vec![1.0]])
            .unwrap();
        let vals: Vec<f64> = prof.iter().map(|p| p.1).collect();
        assert_eq!(vals, vec![1.0, 0.5, 0.0]);
        let s = BoxUnionSet::from_intervals(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(s.overlap_profile(&[vec![2.0]]).unwrap()[0].1, 1.0);
        assert!(s.overlap_profile(&[]).is_err());
    }

    #[test]
    fn residue_checks() {
        let s = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        match s.lattice_residue_check(&Lattice::scaled_integer(1, 1.0)).unwrap() {
            ResidueVerdict::Violated {
                gamma,
                gamma_prime,
                point,
                collision,
            } => {
                let diff = gamma_prime[0] - gamma[0];
                assert_eq!(diff.abs(), 1.0);
                assert!(s.contains(&point));
                let moved = [point[0] + diff];
                assert!(s.contains(&moved));
                assert_eq!(collision.measure(), 0.5);
            }
            ResidueVerdict::Holds => panic!("Z should collide"),
        }
        assert_eq!(
            s.lattice_residue_check(&Lattice::scaled_integer(1, 2.0)).unwrap(),
            ResidueVerdict::Holds
        );
        let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap();
        assert_eq!(
            unit.lattice_residue_check(&Lattice::scaled_integer(1, 1.0)).unwrap(),
            ResidueVerdict::Holds
        );
    }

    /// Brute-force residue oracle: count translates covering sample points.
    #[test]
    fn residue_matches_enumeration() {
        let s = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        for (spacing, expect_holds) in [(1.0, false), (2.0, true), (1.5, true), (0.5, false)] {
            let mut max_cover = 0;
            for i in 0..1000 {
                let x = (i as f64 + 0.5) / 1000.0 * spacing;
                let cover = (-10..10)
                    .filter(|k| s.contains(&[x + *k as f64 * spacing]))
                    .count();
                max_cover = max_cover.max(cover);
            }
            let verdict = s
                .lattice_residue_check(&Lattice::scaled_integer(1, spacing))
                .unwrap();
            assert_eq!(verdict == ResidueVerdict::Holds, expect_holds);
            assert_eq!(max_cover <= 1, expect_holds, "spacing {spacing}");
        }
    }

    #[test]
    fn cover_cubes() {
        let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap();
        assert_eq!(unit.cover_cube(), iv(0.0, 1.0));
        let s = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        assert_eq!(s.cover_cube(), iv(0.0, 1.5));
        let r = BoxUnionSet::from_box(AxisBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap());
        assert_eq!(
            r.cover_cube(),
            AxisBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap()
        );
    }

    fn arb_intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-5i32..5, 1i32..6), 1..6).prop_map(|v| {
            v.into_iter()
                .map(|(a, l)| (a as f64 * 0.25, a as f64 * 0.25 + l as f64 * 0.25))
                .collect()
        })
    }

    fn arb_rects() -> impl Strategy<Value = Vec<AxisBox>> {
        prop::collection::vec((-4i32..4, -4i32..4, 1i32..5, 1i32..5), 1..5).prop_map(|v| {
            v.into_iter()
                .map(|(x, y, w, h)| {
                    let (x, y) = (x as f64 * 0.5, y as f64 * 0.5);
                    AxisBox::new(vec![x, y], vec![x + w as f64 * 0.5, y + h as f64 * 0.5]).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric(iv in arb_intervals(), x in -4.0f64..4.0) {
            let s = BoxUnionSet::from_intervals(&iv).unwrap();
            let a = s.translate_overlap(&[x]).unwrap();
            let b = s.translate_overlap(&[-x]).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert_eq!(s.translate_overlap(&[0.0]).unwrap(), s.measure());
        }

        #[test]
        fn canonical_form_is_idempotent(rects in arb_rects()) {
            let s = canonicalize(rects.clone()).unwrap();
            let again = canonicalize(s.boxes().to_vec()).unwrap();
            prop_assert_eq!(&s, &again);
            // interiors pairwise disjoint
            for (i, a) in s.boxes().iter().enumerate() {
                for b in &s.boxes()[i + 1..] {
                    prop_assert_eq!(a.intersection_volume(b), 0.0);
                }
            }
            // measure invariant under subdividing the input boxes
            let split: Vec<AxisBox> = rects.iter().flat_map(|r| {
                let m = 0.5 * (r.lo()[0] + r.hi()[0]);
                [AxisBox::new(r.lo().to_vec(), vec![m, r.hi()[1]]).unwrap(),
                 AxisBox::new(vec![m, r.lo()[1]], r.hi().to_vec()).unwrap()]
            }).collect();
            let t = canonicalize(split).unwrap();
            prop_assert!((t.measure() - s.measure()).abs() < 1e-12);
            prop_assert_eq!(t, s);
        }

        #[test]
        fn packing_bounded_by_covolume(iv in arb_intervals(), k in 1i32..12) {
            let s = BoxUnionSet::from_intervals(&iv).unwrap();
            let lat = Lattice::scaled_integer(1, k as f64 * 0.25);
            if s.lattice_residue_check(&lat).unwrap() == ResidueVerdict::Holds {
                prop_assert!(s.measure() <= lat.covolume() + 1e-12);
            }
        }
    }
}
