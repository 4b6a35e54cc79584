//! Positive translate overlaps rule out tight Fourier frames; the holed tower
//! escapes the obstruction around x = 5/2. Also certifies the tight frame
//! measure (1 + cos 2πx0ξ) dξ.

use frameforge::domain_sets::{cantor_tower, BoxUnionSet, CantorVariant};
use frameforge::frame_construction::{check_thm03, cosine_measure_certificate, write_certificates_csv};

fn main() -> frameforge::Result<()> {
    for variant in [CantorVariant::Full, CantorVariant::Holed(5)] {
        let t = cantor_tower(12, variant)?;
        let r = check_thm03(&t.set, &[0.0, 1.0, 2.0], 8.0, 0.01, Some(t.tail_measure))?;
        println!("{variant:?}: radius {:?}, {} zero-overlap samples", r.radius, r.zero_overlap.len());
        for (a, b) in r.witness_intervals.iter().filter(|(a, _)| *a >= 0.0) {
            println!("  no overlap for x in [{a:.2}, {b:.2}]");
        }
        println!("  {}", r.caveat);
    }

    let unit = BoxUnionSet::from_intervals(&[(0.0, 1.0)])?;
    let cert = cosine_measure_certificate(&unit, &[2.0], 16, 20, 7)?;
    write_certificates_csv(&[cert], std::io::stdout())?;
    match cosine_measure_certificate(&unit, &[0.5], 16, 20, 7) {
        Ok(_) => println!("x0 = 1/2 unexpectedly certified"),
        Err(e) => println!("x0 = 1/2: {e}"),
    }
    Ok(())
}
