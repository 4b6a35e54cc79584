//! The reproducibility suite behind `verify`: every acceptance criterion
//! recomputed from the library, one CSV row per individual check.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convolution_lab::{verify_thm23, GridFunction};
use crate::domain_sets::{cantor_tower, AxisBox, BoxUnionSet, CantorVariant, Lattice};
use crate::error::Result;
use crate::frame_analysis::{
    check_thm31, estimate_frame_bounds, infinite_measure_probe, nyquist_trunc, Window, WindowedSystem,
};
use crate::frame_construction::{
    check_thm03, construct_prop51, construct_thm02, cosine_measure_certificate, estimate_matched,
    frame_coefficients, Prop51Outcome,
};
use crate::gabor_zak::{certify_gabor, zak_transform, Verdict};
use crate::point_measures::{density_closed_form, density_windowed, EventuallyPeriodic, StructuredPointSet, WeightedComb};

/// How a check's value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Below,
    Above,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Below => value < threshold,
            Relation::Above => value > threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::Above => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            threshold,
        }
    }

    /// A yes/no outcome recorded as `1 >= 1` or `0 >= 1`.
    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }

    pub fn pass(&self) -> bool {
        self.relation.holds(self.value, self.threshold)
    }
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Set when the computation itself failed; the criterion then fails.
    pub error: Option<String>,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::pass)
    }
}

pub const TITLES: [&str; 12] = [
    "orthonormal saturation",
    "packing lattice tight frame",
    "overlapping lattice refusal",
    "covering-cube construction",
    "window/density bracket",
    "density calculus",
    "tiling saturation",
    "translate-overlap obstruction",
    "cosine tight frame measure",
    "Gabor certification",
    "lower-bound decay",
    "determinism",
];

fn unit() -> Result<BoxUnionSet> {
    BoxUnionSet::from_intervals(&[(0.0, 1.0)])
}

fn c1() -> Result<Vec<Check>> {
    let omega = unit()?;
    let sys = WindowedSystem::fourier(omega.clone(), StructuredPointSet::arithmetic(1.0)?)?;
    let r = estimate_frame_bounds(&sys, 256, &nyquist_trunc(&omega, 256))?;
    Ok(vec![
        Check::new("|A_est - 1|", (r.a_est - 1.0).abs(), Relation::AtMost, 1e-9),
        Check::new("|B_est - 1|", (r.b_est - 1.0).abs(), Relation::AtMost, 1e-9),
    ])
}

fn packing_domain() -> Result<BoxUnionSet> {
    BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)])
}

fn c2() -> Result<Vec<Check>> {
    let trunc = AxisBox::interval(-64.0, 64.0)?;
    let out = construct_prop51(&packing_domain()?, &Lattice::diagonal(&[2.0])?, 512, &trunc)?;
    let Prop51Outcome::Tight(c) = out else {
        return Ok(vec![Check::flag("construction is tight", false)]);
    };
    let r = estimate_matched(&c)?;
    Ok(vec![
        Check::flag("construction is tight", true),
        Check::new("tight_ratio", r.tight_ratio, Relation::AtMost, 1.05),
        Check::new("|A_est / 2 - 1|", (r.a_est / 2.0 - 1.0).abs(), Relation::AtMost, 0.02),
        Check::new("|B_est / 2 - 1|", (r.b_est / 2.0 - 1.0).abs(), Relation::AtMost, 0.02),
    ])
}

fn c3() -> Result<Vec<Check>> {
    let trunc = AxisBox::interval(-64.0, 64.0)?;
    let out = construct_prop51(&packing_domain()?, &Lattice::diagonal(&[1.0])?, 512, &trunc)?;
    let Prop51Outcome::Refused(r) = out else {
        return Ok(vec![Check::flag("construction refused", false)]);
    };
    let freqs = Lattice::diagonal(&[1.0])?.enumerate_in_box(&trunc);
    let coef = frame_coefficients(&r.counterexample, &freqs)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let f = &r.counterexample;
    let norm = f
        .samples()
        .iter()
        .zip(f.cell_weights())
        .map(|(s, w)| s.norm_sqr() * w)
        .sum::<f64>()
        .sqrt();
    Ok(vec![
        Check::flag("construction refused", true),
        Check::new("max |<f, e_l>|", coef, Relation::Below, 1e-9),
        Check::new("||f||_2", norm, Relation::AtLeast, 0.1),
    ])
}

fn c4() -> Result<Vec<Check>> {
    let omega = unit()?;
    let parse = |list: &[&str]| list.iter().map(|s| Window::parse(s)).collect::<Result<Vec<_>>>();
    let base = construct_thm02(&parse(&["x", "1-x"])?, &omega, 64)?;
    let r = estimate_matched(&base)?;
    let redundant = construct_thm02(&parse(&["x", "1-x", "x^(-1/4)", "(1-x)^(-1/4)"])?, &omega, 64);
    let mut checks = vec![
        Check::new("|predicted_A - 1/4|", (base.predicted_a - 0.25).abs(), Relation::AtMost, 1e-6),
        Check::new("A_est", r.a_est, Relation::AtLeast, 0.2),
        Check::new("B_est / predicted_B", r.b_est / base.predicted_b, Relation::AtMost, 1.2),
        Check::flag("construction accepted with unbounded windows", redundant.is_ok()),
    ];
    if let Ok(red) = redundant {
        checks.push(Check::new(
            "|predicted_A change|",
            (red.predicted_a - base.predicted_a).abs(),
            Relation::AtMost,
            1e-12,
        ));
    }
    Ok(checks)
}

/// Random piecewise-constant windows on `[0,1)` with `Λ = (1/m)Z`; every
/// fourth trial uses a constant window.
fn c5(seed: u64) -> Result<Vec<Check>> {
    let omega = unit()?;
    let grid_n = 64;
    let trunc = nyquist_trunc(&omega, grid_n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut worst_const: f64 = 0.0;
    for t in 0..20 {
        let m = rng.random_range(1..=4u32);
        let c = 1.0 / m as f64;
        let vals: Vec<f64> = if t % 4 == 0 {
            vec![rng.random_range(0.2..2.0)]
        } else {
            (0..8).map(|_| rng.random_range(0.2..2.0)).collect()
        };
        let k = vals.len();
        let g = GridFunction::sample_real(AxisBox::interval(0.0, 1.0)?, k, |x| {
            vals[((x[0] * k as f64) as usize).min(k - 1)]
        })?;
        let lambda = StructuredPointSet::arithmetic(c)?;
        let sys = WindowedSystem::new(omega.clone(), vec![(Window::sampled(format!("trial {t}"), g), lambda.clone().into())])?;
        let r = estimate_frame_bounds(&sys, grid_n, &trunc)?;
        let dens = density_closed_form(&WeightedComb::dirac(lambda));
        let rep = check_thm31(&sys, &r, &[dens], grid_n, 0.02)?;
        let upper = &rep.upper[0];
        worst = worst.max(upper.lhs - upper.rhs);
        if k == 1 {
            worst_const = worst_const.max((upper.lhs / upper.rhs - 1.0).abs());
        }
    }
    Ok(vec![
        Check::new("max (ess sup |g| - sqrt(B/D+))", worst, Relation::AtMost, 0.02),
        Check::new("max |ess sup |g| / sqrt(B/D+) - 1|, constant windows", worst_const, Relation::AtMost, 0.02),
    ])
}

fn c6() -> Result<Vec<Check>> {
    let right = WeightedComb::dirac(StructuredPointSet::eventually_periodic(EventuallyPeriodic::right_ray(0.0, 1.0)?));
    let left = WeightedComb::dirac(StructuredPointSet::eventually_periodic(EventuallyPeriodic::left_ray(-1.0, 1.0)?));
    let both = right.plus(&left)?;
    let mut checks = Vec::new();
    let h = 1000.0;
    for (name, mu, want) in [("N", &right, (0.0, 1.0)), ("-N", &left, (0.0, 1.0)), ("Z", &both, (1.0, 1.0))] {
        let exact = density_closed_form(mu);
        let dev = (exact.lower - want.0).abs().max((exact.upper - want.1).abs());
        checks.push(Check::new(format!("{name}: closed-form deviation"), dev, Relation::AtMost, 0.0));
        let est = density_windowed(mu, &[h], 64)?;
        let gap = (est.lower - exact.lower).abs().max((est.upper - exact.upper).abs());
        checks.push(Check::new(format!("{name}: windowed estimate at h=1000"), gap, Relation::AtMost, 2.0 / h));
    }
    Ok(checks)
}

fn c7() -> Result<Vec<Check>> {
    let mu = WeightedComb::dirac(StructuredPointSet::arithmetic(1.0)?);
    let h = GridFunction::indicator(&unit()?, 64)?;
    let r = verify_thm23(&[(mu, h)], &AxisBox::interval(-3.0, 3.0)?, 600)?;
    let s_dev = (r.a_hat - 1.0).abs().max((r.b_hat - 1.0).abs());
    let d_dev = (r.density.lower - 1.0).abs().max((r.density.upper - 1.0).abs());
    Ok(vec![
        Check::new("tolerance", r.tol, Relation::Below, 1e-9),
        Check::new("sup |S - 1|", s_dev, Relation::AtMost, r.tol),
        Check::new("|D(mu) - 1|", d_dev, Relation::AtMost, r.tol),
    ])
}

fn c8() -> Result<Vec<Check>> {
    let full = cantor_tower(12, CantorVariant::Full)?;
    let r = check_thm03(&full.set, &[0.0], 8.0, 0.01, Some(full.tail_measure))?;
    let holed = cantor_tower(12, CantorVariant::Holed(5))?;
    let h = check_thm03(&holed.set, &[0.0], 8.0, 0.01, Some(holed.tail_measure))?;
    let width = h
        .witness_intervals
        .iter()
        .filter(|(a, b)| *a <= 2.5 && 2.5 <= *b)
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new("full tower: zero-overlap samples", r.zero_overlap.len() as f64, Relation::AtMost, 0.0),
        Check::new("holed tower: witness width around 5/2", width, Relation::AtLeast, 0.02),
    ])
}

fn c9(seed: u64) -> Result<Vec<Check>> {
    let cert = cosine_measure_certificate(&unit()?, &[2.0], 16, 20, seed)?;
    Ok(vec![Check::new("max residual over 20 trials", cert.residual, Relation::AtMost, 1e-6)])
}

fn c10() -> Result<Vec<Check>> {
    let box1 = Window::parse("indicator(0,1)")?;
    let half = Window::parse("indicator(0,0.5)")?;
    let a = certify_gabor(&box1, 1, 1, 256)?;
    let b = certify_gabor(&half, 1, 1, 256)?;
    let c = certify_gabor(&half, 1, 2, 256)?;
    let unitarity = [&box1, &half]
        .iter()
        .map(|w| zak_transform(w, 256).map(|z| z.unitarity_residual()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![
        Check::flag("chi[0,1), a=1: frame_certified", a.verdict == Verdict::FrameCertified),
        Check::new("chi[0,1), a=1: max(|A53-1|, |B53-1|)", (a.a53 - 1.0).abs().max((a.b53 - 1.0).abs()), Relation::AtMost, 1e-9),
        Check::flag("chi[0,1/2), a=1: not_frame", b.verdict == Verdict::NotFrame),
        Check::new("chi[0,1/2), a=1: A53", b.a53, Relation::AtMost, 1e-9),
        Check::flag("chi[0,1/2), a=1/2: frame_certified", c.verdict == Verdict::FrameCertified),
        Check::new("chi[0,1/2), a=1/2: |A53-1|", (c.a53 - 1.0).abs(), Relation::AtMost, 1e-9),
        Check::new("Zak unitarity residual at M=256", unitarity, Relation::AtMost, 1e-6),
    ])
}

fn c11() -> Result<Vec<Check>> {
    let t = infinite_measure_probe(
        &[Window::parse("1")?],
        &[StructuredPointSet::arithmetic(1.0)?],
        |n| BoxUnionSet::from_intervals(&[(0.0, n)]),
        &[1.0, 2.0, 4.0],
        64,
    )?;
    let a1 = t.rows[0].a_est;
    Ok(vec![
        Check::flag("A_est non-increasing in N", t.non_increasing),
        Check::new("A_est(4) / A_est(1)", t.rows[2].a_est / a1, Relation::AtMost, 0.6),
    ])
}

/// Criterion `id` in 1..=11.
pub fn run_criterion(id: u8, seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(seed),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(seed),
        10 => c10(),
        11 => c11(),
        _ => Err(crate::error::invalid("criterion", format!("no computed criterion {id}"))),
    };
    let (checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionOutcome {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        checks,
        error,
        elapsed: start.elapsed(),
    }
}

/// Criteria 1 to 11, then 12: a second full pass whose CSV must match the
/// first byte for byte.
pub fn run_suite(seed: u64) -> Result<Vec<CriterionOutcome>> {
    let first: Vec<CriterionOutcome> = (1..=11).map(|id| run_criterion(id, seed)).collect();
    let start = Instant::now();
    let second: Vec<CriterionOutcome> = (1..=11).map(|id| run_criterion(id, seed)).collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_verify_csv(&first, &mut a)?;
    write_verify_csv(&second, &mut b)?;
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    let mut all = first;
    all.push(CriterionOutcome {
        id: 12,
        title: TITLES[11],
        checks: vec![Check::new("differing CSV bytes across two runs", differing as f64, Relation::AtMost, 0.0)],
        error: None,
        elapsed: start.elapsed(),
    });
    Ok(all)
}

/// CSV with header `criterion,name,status,value,threshold`, one row per check.
pub fn write_verify_csv<W: Write>(outcomes: &[CriterionOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["criterion", "name", "status", "value", "threshold"])?;
    for o in outcomes {
        if let Some(e) = &o.error {
            w.write_record([o.id.to_string(), format!("{}: error", o.title), "FAIL".into(), "NaN".into(), e.clone()])?;
            continue;
        }
        for c in &o.checks {
            w.write_record([
                o.id.to_string(),
                format!("{}: {}", o.title, c.name),
                if c.pass() { "PASS" } else { "FAIL" }.to_string(),
                format!("{:e}", c.value),
                format!("{} {:e}", c.relation.symbol(), c.threshold),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table, one line per criterion followed by its checks.
pub fn write_verify_report<W: Write>(outcomes: &[CriterionOutcome], mut out: W) -> Result<()> {
    for o in outcomes {
        writeln!(
            out,
            "{} {:>2} {:<32} ({:.2}s)",
            if o.pass() { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.elapsed.as_secs_f64()
        )?;
        if let Some(e) = &o.error {
            writeln!(out, "        error: {e}")?;
        }
        for c in &o.checks {
            writeln!(out, "        {:<56} {:>12.4e} {} {:e}", c.name, c.value, c.relation.symbol(), c.threshold)?;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    writeln!(out, "{passed}/{} criteria passed", outcomes.len())?;
    Ok(())
}
