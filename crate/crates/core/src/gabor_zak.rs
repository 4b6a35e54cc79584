//! Zak transform `Zg(x,t) = Σ_k g(x−k) e^{2πikt}` of compactly supported
//! windows and the rational-shift Gabor test: with `a = p/q` and
//! `g_j = Zg(x − pj/q, t)`, a Gabor frame `{e^{2πimx} g(x − na)}` forces
//! `0 < A ≤ max_j |g_j| ≤ B`, and for `p = 1` the converse holds.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::convolution_lab::GridFunction;
use crate::domain_sets::{AxisBox, BoxUnionSet, Lattice};
use crate::error::{invalid, Result};
use crate::frame_analysis::{FreqSpec, Window, WindowedSystem};
use crate::point_measures::StructuredPointSet;

/// `Zg` on the `M × M` grid `x_i = (i + ½)/M`, `t_l = l/M` of `[0,1)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakGrid {
    m: usize,
    /// Row-major, `values[i·M + l] = Zg(x_i, t_l)`.
    values: Vec<Complex64>,
    source_support: AxisBox,
    /// Midpoint-rule `‖g‖²` on the nodes `x_i − k`.
    node_norm_sq: f64,
}

impl ZakGrid {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, i: usize, l: usize) -> Complex64 {
        self.values[i * self.m + l]
    }

    pub fn source_support(&self) -> &AxisBox {
        &self.source_support
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.m as f64
    }

    pub fn t(&self, l: usize) -> f64 {
        l as f64 / self.m as f64
    }

    /// `‖g‖²` by the midpoint rule on the nodes the transform used.
    pub fn node_norm_sq(&self) -> f64 {
        self.node_norm_sq
    }

    /// `|∫∫|Zg|² − ‖g‖²| / ‖g‖²` with both sides on the same nodes; nonzero
    /// only if terms of the `k`-sum were lost or aliased.
    pub fn unitarity_residual(&self) -> f64 {
        let quad: f64 = self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (self.m * self.m) as f64;
        (quad - self.node_norm_sq).abs() / self.node_norm_sq.max(f64::MIN_POSITIVE)
    }

    /// Piecewise constant copy on `[0,1)²` (cell `(i, l)` holds `Zg(x_i, t_l)`).
    pub fn to_grid_function(&self) -> GridFunction {
        let unit = AxisBox::cube(vec![0.0, 0.0], 1.0).expect("unit square");
        let cell = 1.0 / (self.m * self.m) as f64;
        GridFunction::new(unit, self.m, self.values.clone(), vec![cell; self.values.len()])
            .expect("sizes match")
    }
}

fn support_of(g: &Window) -> Result<AxisBox> {
    g.check_dim(1)?;
    g.support_box(1)
        .ok_or_else(|| invalid("window", format!("`{}` has no bounded support", g.label())))
}

/// Integers `k` with `x − k` in the support `[lo, hi)`.
fn k_range(x: f64, s: &AxisBox) -> std::ops::RangeInclusive<i64> {
    ((x - s.hi()[0]).floor() as i64)..=((x - s.lo()[0]).ceil() as i64)
}

/// `Zg(x, t)` at any point of the plane by the finite sum.
pub fn zak_eval(g: &Window, x: f64, t: f64) -> Result<Complex64> {
    let s = support_of(g)?;
    Ok(k_range(x, &s)
        .map(|k| g.eval(&[x - k as f64]) * Complex64::from_polar(1.0, TAU * k as f64 * t))
        .sum())
}

pub fn zak_transform(g: &Window, m: usize) -> Result<ZakGrid> {
    if m < 16 {
        return Err(invalid("M", format!("need M >= 16, got {m}")));
    }
    let s = support_of(g)?;
    let rows: Vec<(Vec<Complex64>, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64;
            let terms: Vec<(i64, Complex64)> = k_range(x, &s)
                .map(|k| (k, g.eval(&[x - k as f64])))
                .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
                .collect();
            let row = (0..m)
                .map(|l| {
                    let t = l as f64 / m as f64;
                    terms
                        .iter()
                        .map(|(k, v)| v * Complex64::from_polar(1.0, TAU * *k as f64 * t))
                        .sum()
                })
                .collect();
            (row, terms.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>())
        })
        .collect();
    let node_norm_sq = rows.iter().map(|r| r.1).sum::<f64>() / m as f64;
    Ok(ZakGrid {
        m,
        values: rows.into_iter().flat_map(|r| r.0).collect(),
        source_support: s,
        node_norm_sq,
    })
}

/// Largest `|Zg(x, t+1) − Zg(x, t)|` and `|Zg(x+1, t) − e^{2πit} Zg(x, t)|`
/// over the `M × M` grid, from direct evaluation off the unit square.
pub fn quasiperiodicity_residual(g: &Window, m: usize) -> Result<f64> {
    support_of(g)?;
    let worst = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64;
            (0..m)
                .map(|l| {
                    let t = l as f64 / m as f64;
                    let z = zak_eval(g, x, t).expect("support checked");
                    let dt = (zak_eval(g, x, t + 1.0).expect("support checked") - z).norm();
                    let dx = (zak_eval(g, x + 1.0, t).expect("support checked")
                        - Complex64::from_polar(1.0, TAU * t) * z)
                        .norm();
                    dt.max(dx)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_pq(p: u64, q: u64) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(invalid("p", "p and q must be positive"));
    }
    if gcd(p, q) != 1 {
        return Err(invalid("p", format!("p = {p} and q = {q} are not coprime")));
    }
    if p > q || (p == q && q != 1) {
        return Err(invalid("p", format!("need a = p/q <= 1, got {p}/{q}")));
    }
    Ok(())
}

/// `g_j = Zg(x − pj/q, t)` for `j = 0..q`, by exact grid shifts and
/// `Zg(x − n, t) = e^{−2πint} Zg(x, t)` for the part shifted past `x = 0`.
pub fn gabor_windows(z: &ZakGrid, p: u64, q: u64) -> Result<Vec<ZakGrid>> {
    check_pq(p, q)?;
    let m = z.m;
    if !m.is_multiple_of(q as usize) {
        return Err(invalid("M", format!("M = {m} is not divisible by q = {q}")));
    }
    Ok((0..q as usize)
        .map(|j| {
            let shift = (p as usize * j * m / q as usize) as i64;
            let mut values = vec![Complex64::new(0.0, 0.0); m * m];
            for i in 0..m {
                let src = i as i64 - shift;
                let (n, r) = (src.div_euclid(m as i64), src.rem_euclid(m as i64) as usize);
                for l in 0..m {
                    let phase = Complex64::from_polar(1.0, TAU * n as f64 * z.t(l));
                    values[i * m + l] = phase * z.at(r, l);
                }
            }
            ZakGrid {
                m,
                values,
                source_support: z.source_support.clone(),
                node_norm_sq: z.node_norm_sq,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    FrameCertified,
    NotFrame,
    NecessaryOnly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::FrameCertified => "frame_certified",
            Verdict::NotFrame => "not_frame",
            Verdict::NecessaryOnly => "necessary_only",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaborVerdict {
    pub p: u64,
    pub q: u64,
    pub m: usize,
    /// Grid minimum of `max_j |g_j|`.
    pub a53: f64,
    /// Grid maximum of `max_j |g_j|`.
    pub b53: f64,
    pub verdict: Verdict,
    /// Grid extremes of `Σ_j |g_j|²`.
    pub zz_min: f64,
    pub zz_max: f64,
    pub unitarity_residual: f64,
    pub note: String,
}

fn decide(p: u64, q: u64, m: usize, a: f64, b: f64, zz: (f64, f64), eps: f64, unitarity: f64) -> GaborVerdict {
    let (verdict, note) = if a <= eps {
        if p == 1 {
            (Verdict::NotFrame, "max_j |Zg_j| vanishes on the grid".to_string())
        } else {
            (
                Verdict::NotFrame,
                "necessary condition fails: max_j |Zg_j| vanishes on the grid".to_string(),
            )
        }
    } else if p == 1 {
        (Verdict::FrameCertified, format!("bounds {a} <= max_j |Zg_j| <= {b} with a = 1/{q}"))
    } else {
        (
            Verdict::NecessaryOnly,
            format!("necessary condition holds at a = {p}/{q}; sufficiency is not decided"),
        )
    };
    GaborVerdict {
        p,
        q,
        m,
        a53: a,
        b53: b,
        verdict,
        zz_min: zz.0,
        zz_max: zz.1,
        unitarity_residual: unitarity,
        note,
    }
}

/// `(min, max)` of `max_j |g_j|` and of `Σ_j |g_j|²` over the grid.
fn extremes(ws: &[ZakGrid]) -> ((f64, f64), (f64, f64)) {
    let n = ws[0].values.len();
    let (mut lo, mut hi, mut zlo, mut zhi) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for k in 0..n {
        let mx = ws.iter().map(|w| w.values[k].norm()).fold(0.0, f64::max);
        let ss: f64 = ws.iter().map(|w| w.values[k].norm_sqr()).sum();
        lo = lo.min(mx);
        hi = hi.max(mx);
        zlo = zlo.min(ss);
        zhi = zhi.max(ss);
    }
    ((lo, hi), (zlo, zhi))
}

/// Decide the Gabor frame property of `{e^{2πimx} g(x − n p/q)}` in one dimension.
pub fn certify_gabor(g: &Window, p: u64, q: u64, m: usize) -> Result<GaborVerdict> {
    check_pq(p, q)?;
    let z = zak_transform(g, m)?;
    let ws = gabor_windows(&z, p, q)?;
    let ((a, b), zz) = extremes(&ws);
    let eps = 1e-9 * z.node_norm_sq.sqrt();
    Ok(decide(p, q, m, a, b, zz, eps, z.unitarity_residual()))
}

/// Separable window `g(x) = Π_i g_i(x_i)`: the Zak transform, the shifted
/// windows and both extremes factor over coordinates.
pub fn certify_gabor_separable(factors: &[Window], p: u64, q: u64, m: usize) -> Result<GaborVerdict> {
    if factors.is_empty() {
        return Err(invalid("window", "need at least one factor"));
    }
    let parts = factors
        .iter()
        .map(|g| {
            let z = zak_transform(g, m)?;
            let ws = gabor_windows(&z, p, q)?;
            Ok((extremes(&ws), z.node_norm_sq, z.unitarity_residual()))
        })
        .collect::<Result<Vec<_>>>()?;
    let a = parts.iter().map(|p| p.0 .0 .0).product();
    let b = parts.iter().map(|p| p.0 .0 .1).product();
    let zz = (parts.iter().map(|p| p.0 .1 .0).product(), parts.iter().map(|p| p.0 .1 .1).product());
    let norm: f64 = parts.iter().map(|p| p.1).product::<f64>().sqrt();
    let unitarity = parts.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(decide(p, q, m, a, b, zz, 1e-9 * norm, unitarity))
}

/// The Zak image `⋃_j E(g_j, Z × pZ)` on `[0,1)²` with the `g_j` as
/// piecewise constant windows.
pub fn zak_image_system(windows: &[ZakGrid], p: u64) -> Result<WindowedSystem> {
    let unit = BoxUnionSet::from_box(AxisBox::cube(vec![0.0, 0.0], 1.0)?);
    let freqs = StructuredPointSet::lattice(Lattice::diagonal(&[1.0, p as f64])?);
    WindowedSystem::new(
        unit,
        windows
            .iter()
            .enumerate()
            .map(|(j, w)| (Window::sampled(format!("Zg_{j}"), w.to_grid_function()), FreqSpec::Discrete(freqs.clone())))
            .collect(),
    )
}

/// CSV with header `p,q,M,A53,B53,verdict,zz_min,zz_max`.
pub fn write_gabor_csv<W: Write>(rows: &[GaborVerdict], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "q", "M", "A53", "B53", "verdict", "zz_min", "zz_max"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.q.to_string(),
            r.m.to_string(),
            r.a53.to_string(),
            r.b53.to_string(),
            r.verdict.to_string(),
            r.zz_min.to_string(),
            r.zz_max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_analysis::{estimate_frame_bounds, nyquist_trunc};
    use proptest::prelude::*;

    fn w(s: &str) -> Window {
        Window::parse(s).unwrap()
    }

    #[test]
    fn indicator_transforms() {
        let z = zak_transform(&w("indicator(0,1)"), 64).unwrap();
        assert!(z.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let z = zak_transform(&w("indicator(0,0.5)"), 64).unwrap();
        for i in 0..64 {
            let want = if i < 32 { 1.0 } else { 0.0 };
            assert!((0..64).all(|l| (z.at(i, l) - want).norm() < 1e-15));
        }
        // χ_[0,2): terms k = 0 and k = −1
        let z = zak_transform(&w("indicator(0,2)"), 64).unwrap();
        for i in [0, 17, 63] {
            for l in [0, 5, 32] {
                let want = 1.0 + Complex64::from_polar(1.0, -TAU * z.t(l));
                assert!((z.at(i, l) - want).norm() < 1e-12);
            }
            assert!(z.at(i, 32).norm() < 1e-12);
        }
        assert!(zak_transform(&w("x"), 64).is_err());
        assert!(zak_transform(&w("indicator(0,1)"), 8).is_err());
    }

    #[test]
    fn unitarity_and_quasiperiodicity() {
        for s in ["indicator(0,1)", "indicator(0,0.5)", "indicator(-0.25,1.75)", "(1-abs(x))*indicator(-1,1)", "exp(-x^2)*indicator(-3,3)"] {
            let g = w(s);
            let z = zak_transform(&g, 256).unwrap();
            assert!(z.unitarity_residual() < 1e-12, "{s}: {}", z.unitarity_residual());
            assert!(quasiperiodicity_residual(&g, 32).unwrap() < 1e-9);
        }
        // against the exact norm for indicators on commensurate breakpoints
        let z = zak_transform(&w("indicator(-0.25,1.75)"), 256).unwrap();
        assert!((z.node_norm_sq() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_windows() {
        let z = zak_transform(&w("indicator(0,0.5)"), 64).unwrap();
        assert_eq!(gabor_windows(&z, 1, 1).unwrap()[0], z);
        let ws = gabor_windows(&z, 1, 2).unwrap();
        for k in 0..64 * 64 {
            let mx = ws[0].values()[k].norm().max(ws[1].values()[k].norm());
            assert!((mx - 1.0).abs() < 1e-15);
        }
        let ones = gabor_windows(&zak_transform(&w("indicator(0,1)"), 64).unwrap(), 1, 2).unwrap();
        assert!(ones.iter().all(|g| g.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12)));
        assert!(gabor_windows(&z, 1, 3).is_err());
        assert!(gabor_windows(&z, 2, 4).is_err());
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let g = w("(1-abs(x))*indicator(-1,1)");
        let z = zak_transform(&g, 48).unwrap();
        let ws = gabor_windows(&z, 2, 3).unwrap();
        for (j, gj) in ws.iter().enumerate() {
            for (i, l) in [(0, 0), (5, 7), (40, 47), (47, 13)] {
                let direct = zak_eval(&g, z.x(i) - 2.0 * j as f64 / 3.0, z.t(l)).unwrap();
                assert!((gj.at(i, l) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn verdicts() {
        let v = certify_gabor(&w("indicator(0,1)"), 1, 1, 256).unwrap();
        assert_eq!(v.verdict, Verdict::FrameCertified);
        assert!((v.a53 - 1.0).abs() < 1e-9 && (v.b53 - 1.0).abs() < 1e-9);
        let v = certify_gabor(&w("indicator(0,0.5)"), 1, 1, 256).unwrap();
        assert_eq!(v.verdict, Verdict::NotFrame);
        assert!(v.a53 <= 1e-9);
        let v = certify_gabor(&w("indicator(0,0.5)"), 1, 2, 256).unwrap();
        assert_eq!(v.verdict, Verdict::FrameCertified);
        assert!((v.a53 - 1.0).abs() < 1e-9);
        assert!((v.zz_min - 1.0).abs() < 1e-12 && (v.zz_max - 1.0).abs() < 1e-12);
        let v = certify_gabor(&w("indicator(0,1)"), 2, 3, 255).unwrap();
        assert_eq!(v.verdict, Verdict::NecessaryOnly);
        let v = certify_gabor(&w("indicator(0,0.25)"), 2, 3, 255).unwrap();
        assert_eq!(v.verdict, Verdict::NotFrame);
        assert!(v.note.contains("necessary"));
    }

    #[test]
    fn separable_products() {
        let g = [w("indicator(0,0.5)"), w("indicator(0,1)")];
        let v = certify_gabor_separable(&g, 1, 2, 64).unwrap();
        assert_eq!(v.verdict, Verdict::FrameCertified);
        assert!((v.a53 - 1.0).abs() < 1e-12);
        let v = certify_gabor_separable(&g, 1, 1, 64).unwrap();
        assert_eq!(v.verdict, Verdict::NotFrame);
    }

    #[test]
    fn image_system_matches_zak_bounds() {
        for (g, q) in [("indicator(0,0.5)", 2), ("indicator(0,0.5)", 1), ("indicator(0,1.5)", 2)] {
            let z = zak_transform(&w(g), 16).unwrap();
            let ws = gabor_windows(&z, 1, q).unwrap();
            let v = certify_gabor(&w(g), 1, q, 16).unwrap();
            let sys = zak_image_system(&ws, 1).unwrap();
            let r = estimate_frame_bounds(&sys, 16, &nyquist_trunc(sys.omega(), 16)).unwrap();
            // Z² exponentials are an orthonormal basis of L²([0,1)²): S = Σ_j |g_j|²
            assert!((r.a_est - v.zz_min).abs() < 1e-9, "{g}: {} vs {}", r.a_est, v.zz_min);
            assert!((r.b_est - v.zz_max).abs() < 1e-9);
            assert_eq!(r.a_est > 1e-9, v.a53 > 1e-9);
        }
    }

    #[test]
    fn csv_header() {
        let v = certify_gabor(&w("indicator(0,1)"), 1, 1, 16).unwrap();
        let mut buf = Vec::new();
        write_gabor_csv(&[v], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p,q,M,A53,B53,verdict,zz_min,zz_max\n1,1,16,1,1,frame_certified,1,1\n");
    }

    fn step_window(vals: &[f64], lo: i32) -> Window {
        let terms: Vec<String> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{v}*indicator({},{})", lo as f64 + i as f64 / 4.0, lo as f64 + (i + 1) as f64 / 4.0))
            .collect();
        w(&terms.join("+"))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn norm_equivalence(vals in prop::collection::vec(-2.0f64..2.0, 1..9), lo in -2i32..2, q in 1u64..4) {
            let g = step_window(&vals, lo);
            let m = 48;
            let z = zak_transform(&g, m).unwrap();
            prop_assert!(z.unitarity_residual() < 1e-12);
            let ws = gabor_windows(&z, 1, q).unwrap();
            for k in 0..m * m {
                let mx = ws.iter().map(|w| w.values()[k].norm_sqr()).fold(0.0, f64::max);
                let ss: f64 = ws.iter().map(|w| w.values()[k].norm_sqr()).sum();
                prop_assert!(mx <= ss + 1e-12 && ss <= q as f64 * mx + 1e-12);
            }
        }

        /// Supported in one unit interval, the Zak modulus is piecewise
        /// constant in x and constant in t, so the grid minimum is exact.
        #[test]
        fn grid_minimum_is_robust(vals in prop::collection::vec(-2.0f64..2.0, 1..5), lo in -2i32..2, q in 1u64..4) {
            let g = step_window(&vals, lo);
            let a = certify_gabor(&g, 1, q, 48).unwrap();
            let b = certify_gabor(&g, 1, q, 96).unwrap();
            prop_assert!((a.a53 - b.a53).abs() <= 0.1 * a.a53 + 1e-12);
            prop_assert!((a.b53 - b.b53).abs() <= 0.1 * a.b53 + 1e-12);
        }
    }
}
