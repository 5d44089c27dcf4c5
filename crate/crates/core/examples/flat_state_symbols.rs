//! Flat-state multiplier `m(k)` and growth rates `λ_k`, stable and unstable.

use mudflow::evolution::linearized_symbols;
use mudflow::ModelParams;

fn main() -> mudflow::Result<()> {
    let stable = ModelParams { gamma: 0.1, rho_m: 1.2, ..ModelParams::unit_newtonian() };
    let unstable = ModelParams { rho_w: 2.0, rho_m: 1.0, ..ModelParams::unit_newtonian() };
    for (name, p) in [("stable", &stable), ("heavy water on top, no surface tension", &unstable)] {
        println!("{name}: stability condition holds = {}", p.stability_ok());
        println!("{:>3} {:>12} {:>12}", "k", "m(k)", "lambda_k");
        for k in 1..=8 {
            let s = linearized_symbols(k, p)?;
            println!("{:>3} {:>12.8} {:>12.8}", s.k, s.m, s.lambda);
        }
    }
    Ok(())
}
