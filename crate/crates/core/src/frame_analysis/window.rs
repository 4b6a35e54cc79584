use num_complex::Complex64;

use super::expr::Expr;
use crate::convolution_lab::GridFunction;
use crate::domain_sets::{AxisBox, BoxUnionSet};
use crate::error::{check_dim, invalid, Result};

/// A window function `g_j` on the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    label: String,
    kind: WindowKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WindowKind {
    Expr(Expr),
    /// Piecewise constant on the cells of a grid (nearest-cell lookup).
    Sampled(GridFunction),
}

/// Midpoint subdivisions per axis used for cell averages.
pub(crate) fn subdivisions(dim: usize) -> usize {
    match dim {
        1 => 8,
        2 => 2,
        _ => 1,
    }
}

impl Window {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            label: text.trim().to_string(),
            kind: WindowKind::Expr(Expr::parse(text)?),
        })
    }

    pub fn from_expr(expr: Expr) -> Self {
        Self {
            label: expr.to_string(),
            kind: WindowKind::Expr(expr),
        }
    }

    pub fn sampled(label: impl Into<String>, values: GridFunction) -> Self {
        Self {
            label: label.into(),
            kind: WindowKind::Sampled(values),
        }
    }

    /// `χ_Ω`.
    pub fn indicator() -> Self {
        Self::from_expr(Expr::DomainIndicator)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            WindowKind::Expr(e) => Some(e),
            WindowKind::Sampled(_) => None,
        }
    }

    /// Check the window can be evaluated in dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match &self.kind {
            WindowKind::Expr(e) => {
                if e.arity() > dim {
                    return Err(invalid(
                        "window",
                        format!("`{}` uses coordinate x{} in dimension {dim}", self.label, e.arity()),
                    ));
                }
                Ok(())
            }
            WindowKind::Sampled(g) => check_dim(dim, g.dim()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match &self.kind {
            WindowKind::Expr(e) => Complex64::new(e.eval(x), 0.0),
            WindowKind::Sampled(g) => g.eval_cell(x),
        }
    }

    /// `c·g`.
    pub fn scaled(&self, c: f64) -> Self {
        match &self.kind {
            WindowKind::Expr(e) => Self {
                label: format!("{c}*({})", self.label),
                kind: WindowKind::Expr(Expr::Const(c).times(e.clone())),
            },
            WindowKind::Sampled(g) => Self {
                label: format!("{c}*({})", self.label),
                kind: WindowKind::Sampled(g.scaled(c)),
            },
        }
    }

    /// Whether `|g|` is bounded on the closed box, decided without sampling.
    /// Sampled windows are piecewise constant, so bounded exactly when every
    /// sample is finite.
    pub fn symbolic_bounded(&self, on: &AxisBox) -> Option<bool> {
        Some(match &self.kind {
            WindowKind::Expr(e) => e.range_over(on).is_bounded(),
            WindowKind::Sampled(g) => g.samples().iter().all(|v| v.is_finite()),
        })
    }

    /// A box outside of which the window vanishes, if one is known.
    pub fn support_box(&self, dim: usize) -> Option<AxisBox> {
        match &self.kind {
            WindowKind::Expr(e) => e.support_box(dim),
            WindowKind::Sampled(g) => Some(g.bounding_box().clone()),
        }
    }

    /// Midpoint-rule averages of `g` and `|g|²` over a union of pieces
    /// (the part of one cell inside the domain).
    pub(crate) fn piece_means(&self, pieces: &[AxisBox]) -> (Complex64, f64) {
        let mut vol = 0.0;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        for p in pieces {
            let (m, m2) = match &self.kind {
                WindowKind::Expr(e) => box_means(p, |x| e.eval(x)),
                WindowKind::Sampled(g) => sampled_box_means(g, p),
            };
            let w = p.volume();
            vol += w;
            sum += m * w;
            sum_sq += m2 * w;
        }
        if vol == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        (sum / vol, sum_sq / vol)
    }

    /// `‖g‖²_{L²(Ω)}` by the midpoint rule on `n` cells per axis of the
    /// bounding box, each cell subdivided as for cell averages.
    pub fn l2_norm_sq_on(&self, omega: &BoxUnionSet, n: usize) -> Result<f64> {
        self.check_dim(omega.dim())?;
        let grid = GridFunction::sample_real(omega.bounding_box(), n, |_| 0.0)?;
        let total: f64 = (0..grid.len())
            .map(|k| {
                let cell = grid.cell_box(k);
                let pieces: Vec<AxisBox> = omega.boxes().iter().filter_map(|b| b.intersect(&cell)).collect();
                let w: f64 = pieces.iter().map(AxisBox::volume).sum();
                if w == 0.0 {
                    0.0
                } else {
                    self.piece_means(&pieces).1 * w
                }
            })
            .sum();
        Ok(total)
    }

    pub fn l2_norm_on(&self, omega: &BoxUnionSet) -> Result<f64> {
        let n = match omega.dim() {
            1 => 1024,
            2 => 64,
            _ => 16,
        };
        Ok(self.l2_norm_sq_on(omega, n)?.sqrt())
    }
}

/// Exact means of a piecewise constant grid function and its squared modulus
/// over a box; the part of the box outside the grid counts as zero.
fn sampled_box_means(g: &GridFunction, p: &AxisBox) -> (Complex64, f64) {
    let d = g.dim();
    let n = g.n_per_axis();
    let bb = g.bounding_box();
    let ranges: Vec<(usize, usize)> = (0..d)
        .map(|i| {
            let h = g.spacing(i);
            let a = ((p.lo()[i] - bb.lo()[i]) / h).floor().clamp(0.0, n as f64) as usize;
            let e = ((p.hi()[i] - bb.lo()[i]) / h).ceil().clamp(0.0, n as f64) as usize;
            (a, e.max(a))
        })
        .collect();
    let vol = p.volume();
    if vol == 0.0 || ranges.iter().any(|(a, e)| a == e) {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    'cells: loop {
        let k = g.flat_index(&idx);
        let ov = p.intersection_volume(&g.cell_box(k));
        let v = g.samples()[k];
        sum += v * ov;
        sum_sq += v.norm_sqr() * ov;
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < ranges[axis].1 {
                continue 'cells;
            }
            idx[axis] = ranges[axis].0;
        }
        break;
    }
    (sum / vol, sum_sq / vol)
}

/// Means of `f` and `f²` over a box by the midpoint rule.
fn box_means(b: &AxisBox, f: impl Fn(&[f64]) -> f64) -> (Complex64, f64) {
    let d = b.dim();
    let s = subdivisions(d);
    let total = s.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for mut k in 0..total {
        for i in 0..d {
            let j = k % s;
            k /= s;
            x[i] = b.lo()[i] + (j as f64 + 0.5) * b.side(i) / s as f64;
        }
        let v = f(&x);
        sum += v;
        sum_sq += v * v;
    }
    (
        Complex64::new(sum / total as f64, 0.0),
        sum_sq / total as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)]).unwrap();
        let x = Window::parse("x").unwrap();
        assert!((x.l2_norm_sq_on(&unit, 1024).unwrap() - 1.0 / 3.0).abs() < 1e-7);
        assert!((Window::indicator().l2_norm_on(&unit).unwrap() - 1.0).abs() < 1e-15);
        let two = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)]).unwrap();
        assert!((Window::indicator().l2_norm_sq_on(&two, 7).unwrap() - 1.0).abs() < 1e-12);
        let singular = Window::parse("x^(-1/4)").unwrap();
        // ∫ x^{-1/2} = 2, the midpoint rule converges slowly near 0
        assert!((singular.l2_norm_sq_on(&unit, 4096).unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn dimension_check() {
        assert!(Window::parse("x2").unwrap().check_dim(1).is_err());
        assert!(Window::parse("x1*x2").unwrap().check_dim(2).is_ok());
    }

    #[test]
    fn symbolic_flag() {
        let unit = AxisBox::interval(0.0, 1.0).unwrap();
        assert_eq!(Window::parse("x").unwrap().symbolic_bounded(&unit), Some(true));
        assert_eq!(Window::parse("(1-x)^(-1/4)").unwrap().symbolic_bounded(&unit), Some(false));
    }

    #[test]
    fn sampled_means_are_exact() {
        let g = GridFunction::sample_real(AxisBox::interval(0.0, 1.0).unwrap(), 4, |x| x[0]).unwrap();
        let w = Window::sampled("steps", g);
        // values 1/8, 3/8, 5/8, 7/8; [0.125, 0.625) covers half, full, half
        let (m, m2) = w.piece_means(&[AxisBox::interval(0.125, 0.625).unwrap()]);
        assert!((m.re - (0.125 / 8.0 + 0.25 * 3.0 / 8.0 + 0.125 * 5.0 / 8.0) / 0.5).abs() < 1e-15);
        assert!((m2 - (0.125 / 64.0 + 0.25 * 9.0 / 64.0 + 0.125 * 25.0 / 64.0) / 0.5).abs() < 1e-15);
        // beyond the grid the window is zero
        let (m, _) = w.piece_means(&[AxisBox::interval(0.75, 1.25).unwrap()]);
        assert!((m.re - 0.4375).abs() < 1e-15);
    }
}
