//! Where the second-derivative correction does not apply: f(x) = |x|.
//!
//! The correction g = f − b²f″ needs two derivatives. |x| has a kink at 0,
//! and the plug-in bias E[|q + Z|] − |q| = b·e^{−|q|/b} never vanishes —
//! it just decays as the statistic moves away from the kink. This example
//! prints the analytic bias next to a Monte Carlo measurement.
//!
//!     cargo run --release --example abs_plugin_bias

use unbias::function_model::SmoothFunction;
use unbias::laplace_debias::{plug_in_bias_abs, plug_in_bias_mc};
use unbias::noise::RngStream;

fn main() -> unbias::Result<()> {
    let b = 1.0;
    let f = SmoothFunction::abs();
    println!("f(x) = |x|, b = {b}");
    println!("{:>6} {:>14} {:>14} {:>10}", "q", "analytic bias", "mc bias", "mc se");
    for (i, q) in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0].into_iter().enumerate() {
        let analytic = plug_in_bias_abs(q, b);
        let mut rng = RngStream::new(9, i as u64);
        let (mc, se) = plug_in_bias_mc(&f, q, b, 500_000, &mut rng)?;
        println!("{q:>6} {analytic:>14.6} {mc:>14.6} {se:>10.6}");
    }
    println!("\nNo smooth correction exists at the kink; the bias is a floor,");
    println!("not a removable term. Compare closed_form_debias for smooth f.");
    Ok(())
}
