//! Upper and lower Beurling densities: closed form for structured combs and
//! the sliding-window estimator as a cross-check.

use frameforge::point_measures::{density_closed_form, density_windowed, EventuallyPeriodic, StructuredPointSet, WeightedComb};

fn main() -> frameforge::Result<()> {
    let right = WeightedComb::dirac(StructuredPointSet::eventually_periodic(EventuallyPeriodic::right_ray(0.0, 1.0)?));
    let left = WeightedComb::dirac(StructuredPointSet::eventually_periodic(EventuallyPeriodic::left_ray(-1.0, 1.0)?));
    let sum = right.plus(&left)?;
    let thinned = WeightedComb::dirac(StructuredPointSet::finite_perturbation(
        StructuredPointSet::arithmetic(0.5)?,
        vec![vec![0.25]],
        vec![vec![0.0], vec![0.5]],
    )?);
    for (name, mu) in [("N", &right), ("-N-1", &left), ("N ∪ (-N-1)", &sum), ("(1/2)Z perturbed", &thinned)] {
        let exact = density_closed_form(mu);
        let est = density_windowed(mu, &[10.0, 100.0, 1000.0], 32)?;
        println!("{name:>18}: D- = {}, D+ = {}  (window h=1000: {}, {})", exact.lower, exact.upper, est.lower, est.upper);
    }
    println!("lower density is not additive: 0 + 0 < 1");
    let est = density_windowed(&right, &[10.0, 100.0, 1000.0], 32)?;
    est.write_trace_csv(std::io::stdout())?;
    Ok(())
}
