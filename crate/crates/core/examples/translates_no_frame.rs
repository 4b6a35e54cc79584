//! Translates of one function never form a frame: after a Fourier transform
//! they are windowed exponentials on the whole line, and the lower bound on
//! growing domains decays.

use frameforge::frame_analysis::{infinite_measure_probe, translate_frame_probe, Window};
use frameforge::domain_sets::BoxUnionSet;
use frameforge::point_measures::StructuredPointSet;

fn main() -> frameforge::Result<()> {
    let table = infinite_measure_probe(
        &[Window::parse("1")?],
        &[StructuredPointSet::arithmetic(1.0)?],
        |n| BoxUnionSet::from_intervals(&[(0.0, n)]),
        &[1.0, 2.0, 4.0, 8.0],
        64,
    )?;
    println!("g = 1, Λ = Z on [0, N):");
    for r in &table.rows {
        println!("  N = {:>2}: A_est = {:.6}, B_est = {:.6}", r.n, r.a_est, r.b_est);
    }

    let gauss_hat = Window::parse("exp(-3.14159265358979*x^2)")?;
    let t = translate_frame_probe(&[gauss_hat], &[StructuredPointSet::arithmetic(0.5)?], &[2.0, 4.0, 8.0], 64)?;
    println!("Gaussian translates by (1/2)Z, probed on [-N/2, N/2):");
    for r in &t.rows {
        println!("  N = {:>2}: A_est = {:.3e}, B_est = {:.6}", r.n, r.a_est, r.b_est);
    }
    println!("non-increasing lower bounds: {} / {}", table.non_increasing, t.non_increasing);
    Ok(())
}
