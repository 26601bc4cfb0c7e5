//! The go/no-go rule: MFBO is recommended only for a cheap (ρ < 0.2) and
//! informative (R² > 0.75) low-fidelity source.

use mfbo::experiments::advise;

fn main() -> mfbo::Result<()> {
    for (rho, r2) in [(0.065, 0.98), (0.167, 0.99), (0.1, 0.88), (0.5, 0.49), (0.5, 0.99), (0.1, 0.5)] {
        let v = advise(rho, r2)?;
        println!(
            "rho = {rho:<5} R2 = {r2:<4} -> {} (cheap: {}, informative: {})",
            v.verdict, v.cheap_enough, v.informative_enough
        );
    }
    Ok(())
}
