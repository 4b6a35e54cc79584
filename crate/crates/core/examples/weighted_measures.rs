//! Weighted frequency measures: a density plus atoms on the frequency side,
//! and windows multiplied by the square root of a weight.

use frameforge::domain_sets::{AxisBox, BoxUnionSet};
use frameforge::frame_analysis::{estimate_frame_bounds, weighted_transform, ContinuousFreqMeasure, FreqSpec, Window, WindowedSystem};
use frameforge::frame_construction::cosine_measure;
use frameforge::point_measures::StructuredPointSet;

fn main() -> frameforge::Result<()> {
    let omega = BoxUnionSet::from_intervals(&[(0.0, 1.0)])?;
    let trunc = AxisBox::interval(-32.0, 32.0)?;

    // Lebesgue measure on the frequency line is a tight frame measure with A = 1
    let lebesgue = frameforge::convolution_lab::GridFunction::sample_real(trunc.clone(), 2048, |_| 1.0)?;
    let sys = WindowedSystem::new(omega.clone(), vec![(Window::indicator(), FreqSpec::Continuous(ContinuousFreqMeasure::new(Some(lebesgue), vec![])?))])?;
    let r = estimate_frame_bounds(&sys, 64, &trunc)?;
    println!("Lebesgue measure: A = {:.4}, B = {:.4}", r.a_est, r.b_est);

    let cos = cosine_measure(&[2.0], &trunc, 2048)?;
    let sys = WindowedSystem::new(omega.clone(), vec![(Window::indicator(), FreqSpec::Continuous(cos))])?;
    let r = estimate_frame_bounds(&sys, 64, &trunc)?;
    println!("(1 + cos 4πξ) dξ: A = {:.4}, B = {:.4}", r.a_est, r.b_est);

    let windows = vec![Window::parse("x")?, Window::parse("1-x")?];
    let weighted = weighted_transform(&Window::parse("1+x")?, &windows, &omega, 64)?;
    let z = StructuredPointSet::arithmetic(1.0)?;
    for (name, ws) in [("plain", &windows), ("weighted by 1+x", &weighted)] {
        let sys = WindowedSystem::new(omega.clone(), ws.iter().map(|w| (w.clone(), z.clone().into())).collect())?;
        let r = estimate_frame_bounds(&sys, 64, &trunc)?;
        println!("{name:>16}: A = {:.4}, B = {:.4}", r.a_est, r.b_est);
    }
    Ok(())
}
