//! Box-union sets: measure, translate overlaps, lattice packing checks and the
//! truncated interval towers.

use frameforge::domain_sets::{cantor_tower, BoxUnionSet, CantorVariant, Lattice, ResidueVerdict};

fn main() -> frameforge::Result<()> {
    let omega = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5), (0.25, 0.75)])?;
    println!("boxes after merging: {:?}", omega.boxes().iter().map(|b| (b.lo()[0], b.hi()[0])).collect::<Vec<_>>());
    println!("|Ω| = {}", omega.measure());
    for x in [0.0, 0.25, 0.5, 1.0, 2.0] {
        println!("|Ω ∩ (Ω + {x})| = {}", omega.translate_overlap(&[x])?);
    }

    let pair = BoxUnionSet::from_intervals(&[(0.0, 0.5), (1.0, 1.5)])?;
    for spacing in [2.0, 1.0] {
        match pair.lattice_residue_check(&Lattice::diagonal(&[spacing])?)? {
            ResidueVerdict::Holds => println!("{spacing}Z translates of [0,1/2)∪[1,3/2) pack"),
            ResidueVerdict::Violated { gamma_prime, collision, .. } => println!(
                "{spacing}Z translates collide: shift {gamma_prime:?}, overlap measure {}",
                collision.measure()
            ),
        }
    }

    for variant in [CantorVariant::Full, CantorVariant::Holed(5)] {
        let t = cantor_tower(12, variant)?;
        println!(
            "{variant:?}: {} intervals, measure {:.6}, discarded tail {:e}",
            t.set.boxes().len(),
            t.set.measure(),
            t.tail_measure
        );
    }
    Ok(())
}
