//! Gabor frame verdicts at rational oversampling from the Zak transform.

use frameforge::frame_analysis::Window;
use frameforge::gabor_zak::{certify_gabor, certify_gabor_separable, quasiperiodicity_residual, write_gabor_csv, zak_transform};

fn main() -> frameforge::Result<()> {
    let cases = [
        ("indicator(0,1)", 1, 1),
        ("indicator(0,0.5)", 1, 1),
        ("indicator(0,0.5)", 1, 2),
        ("indicator(0,2)", 1, 1),
        ("indicator(0,2)", 1, 3),
        ("(1-x)*indicator(0,1)", 2, 3),
    ];
    let mut rows = Vec::new();
    for (w, p, q) in cases {
        let g = Window::parse(w)?;
        let v = certify_gabor(&g, p, q, 240)?;
        println!("{w:<22} a = {p}/{q}: {} ({})", v.verdict, v.note);
        rows.push(v);
    }
    write_gabor_csv(&rows, std::io::stdout())?;

    let g = Window::parse("exp(-x^2)*indicator(-3,3)")?;
    let z = zak_transform(&g, 128)?;
    println!("truncated Gaussian: unitarity residual {:e}, quasi-periodicity residual {:e}", z.unitarity_residual(), quasiperiodicity_residual(&g, 128)?);

    let sq = certify_gabor_separable(&[Window::parse("indicator(0,1)")?, Window::parse("indicator(0,0.5)")?], 1, 2, 64)?;
    println!("separable χ[0,1)×χ[0,1/2) at a = 1/2: {}", sq.verdict);
    Ok(())
}
