//! Frame of windowed exponentials built from windows whose maximum is bounded
//! away from zero; unbounded windows only get the frequency 0.

use frameforge::domain_sets::BoxUnionSet;
use frameforge::frame_analysis::{ess_bounds, Window};
use frameforge::frame_construction::{construct_thm02, estimate_matched};
use frameforge::io::{to_json_pretty, SystemDesc};

fn main() -> frameforge::Result<()> {
    let omega = BoxUnionSet::from_intervals(&[(0.0, 1.0)])?;
    let windows: Vec<Window> = ["x", "1-x", "x^(-1/4)", "(1-x)^(-1/4)"]
        .iter()
        .map(|s| Window::parse(s))
        .collect::<frameforge::Result<_>>()?;
    let e = ess_bounds(&windows, &omega, 64)?;
    println!("J = {:?}, ess inf max|g_j| ≈ {:.6}, ess sup ≈ {:.6}", e.j, e.m_hat, e.big_m);

    let c = construct_thm02(&windows, &omega, 64)?;
    println!("predicted A = {:.6}, B = {:.6}", c.predicted_a, c.predicted_b);
    for j in 0..windows.len() {
        println!("  T_{j} has measure {}", c.partition_measure(j));
    }
    let r = estimate_matched(&c)?;
    println!("estimated A = {:.6}, B = {:.6}", r.a_est, r.b_est);

    match construct_thm02(&[Window::parse("sqrt(x)")?], &omega, 64) {
        Ok(_) => println!("sqrt(x) unexpectedly accepted"),
        Err(e) => println!("sqrt(x): {e}"),
    }
    print!("{}", to_json_pretty(&SystemDesc::from_construction(&c))?);
    Ok(())
}
