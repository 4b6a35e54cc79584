//! Comb convolutions: the range of `Σ μ_i ∗ h_i` brackets the densities of
//! `Σ (∫h_i) μ_i`, with equality for tilings.

use frameforge::convolution_lab::{comb_convolve, translation_bounded_probe, verify_thm23, GridFunction};
use frameforge::domain_sets::{AxisBox, BoxUnionSet};
use frameforge::point_measures::{StructuredPointSet, WeightedComb};

fn main() -> frameforge::Result<()> {
    let z = WeightedComb::dirac(StructuredPointSet::arithmetic(1.0)?);
    let unit = GridFunction::indicator(&BoxUnionSet::from_intervals(&[(0.0, 1.0)])?, 64)?;
    let eval = AxisBox::interval(-2.0, 2.0)?;
    let tiling = verify_thm23(&[(z.clone(), unit)], &eval, 400)?;
    println!("δ_Z ∗ χ_[0,1): S in [{}, {}], D = [{}, {}]", tiling.a_hat, tiling.b_hat, tiling.density.lower, tiling.density.upper);

    let tent = GridFunction::sample_real(AxisBox::interval(-1.0, 1.0)?, 256, |x| 1.0 - x[0].abs())?;
    let half = WeightedComb::dirac(StructuredPointSet::arithmetic(0.75)?);
    let r = verify_thm23(&[(half.clone(), tent.clone())], &eval, 400)?;
    println!(
        "δ_(3/4)Z ∗ tent: S in [{:.4}, {:.4}], D·∫h = [{:.4}, {:.4}], upper holds {}, lower holds {}",
        r.a_hat, r.b_hat, r.density.lower, r.density.upper, r.upper_holds, r.lower_holds
    );

    let s = comb_convolve(&half, &tent, &AxisBox::interval(0.0, 1.5)?, 6)?;
    s.write_csv(std::io::stdout())?;

    let (sup, at) = translation_bounded_probe(&z.plus(&half)?, &AxisBox::interval(0.0, 1.0)?, 16)?;
    println!("sup_x μ(x + [0,1)) = {sup} at x = {at:?}");
    Ok(())
}
