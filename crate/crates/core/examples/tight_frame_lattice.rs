//! Tight Fourier frames from lattice packings, and the counterexample returned
//! when the translates overlap.

use frameforge::domain_sets::{AxisBox, BoxUnionSet, Lattice};
use frameforge::frame_construction::{construct_prop51, frame_coefficients, Prop51Outcome};

fn main() -> frameforge::Result<()> {
    let omega = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)])?;
    let trunc = AxisBox::interval(-64.0, 64.0)?;
    for spacing in [2.0, 1.0] {
        let gamma = Lattice::diagonal(&[spacing])?;
        match construct_prop51(&omega, &gamma, 512, &trunc)? {
            Prop51Outcome::Tight(c) => {
                println!("Γ = {spacing}Z: tight, A = {:.9}, B = {:.9}", c.predicted_a, c.predicted_b);
                println!("  {}", c.provenance);
            }
            Prop51Outcome::Refused(r) => {
                let freqs = gamma.dual().enumerate_in_box(&trunc);
                let worst = frame_coefficients(&r.counterexample, &freqs).iter().map(|c| c.norm()).fold(0.0, f64::max);
                println!("Γ = {spacing}Z: refused ({})", r.reason);
                println!("  counterexample has every coefficient below {worst:e}");
            }
        }
    }

    // a packing in the plane: an L-shaped union of three unit squares and the lattice generated by (1,1), (2,-1)
    let l = BoxUnionSet::from_box(AxisBox::new(vec![0.0, 0.0], vec![2.0, 1.0])?);
    let l = frameforge::domain_sets::canonicalize(
        l.boxes().iter().cloned().chain([AxisBox::new(vec![0.0, 1.0], vec![1.0, 2.0])?]).collect(),
    )?;
    let gamma = Lattice::from_generators(&[vec![1.0, 1.0], vec![2.0, -1.0]])?;
    let trunc = AxisBox::centered(2, 4.0)?;
    if let Prop51Outcome::Tight(c) = construct_prop51(&l, &gamma, 16, &trunc)? {
        println!("L-tromino with covolume {}: A = {:.6}, B = {:.6}", gamma.covolume(), c.predicted_a, c.predicted_b);
    }
    Ok(())
}
