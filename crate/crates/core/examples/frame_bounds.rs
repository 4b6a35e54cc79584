//! Frame bounds of windowed exponential systems from the discretized frame
//! operator, and the window/density brackets they imply.

use frameforge::domain_sets::BoxUnionSet;
use frameforge::frame_analysis::{check_thm31, estimate_frame_bounds, nyquist_trunc, write_frame_bounds_csv, Window, WindowedSystem};
use frameforge::point_measures::{density_closed_form, StructuredPointSet, WeightedComb};

fn main() -> frameforge::Result<()> {
    let omega = BoxUnionSet::from_intervals(&[(0.0, 1.0)])?;
    let grid_n = 128;
    let trunc = nyquist_trunc(&omega, grid_n);
    let z = StructuredPointSet::arithmetic(1.0)?;
    let half = StructuredPointSet::arithmetic(0.5)?;

    let onb = WindowedSystem::fourier(omega.clone(), z.clone())?;
    let redundant = WindowedSystem::fourier(omega.clone(), half.clone())?;
    let pair = WindowedSystem::new(
        omega.clone(),
        vec![(Window::parse("x")?, z.clone().into()), (Window::parse("1-x")?, z.clone().into())],
    )?;
    let reports = [
        ("onb", estimate_frame_bounds(&onb, grid_n, &trunc)?),
        ("half_integers", estimate_frame_bounds(&redundant, grid_n, &trunc)?),
        ("linear_pair", estimate_frame_bounds(&pair, grid_n, &trunc)?),
    ];
    let rows: Vec<(&str, _)> = reports.iter().map(|(n, r)| (*n, r)).collect();
    write_frame_bounds_csv(&rows, std::io::stdout())?;

    let dens = [density_closed_form(&WeightedComb::dirac(z.clone())), density_closed_form(&WeightedComb::dirac(z))];
    let bracket = check_thm31(&pair, &reports[2].1, &dens, 64, 0.02)?;
    for c in bracket.upper.iter().chain(&bracket.lower) {
        println!("{:<50} {:.4} vs {:.4}  {}", c.label, c.lhs, c.rhs, if c.pass { "ok" } else { "violated" });
    }
    Ok(())
}
