//! Maps ALT values to "perfectly alternating agents".

use altlab::{
    alt_ratio_from_calt, alt_scores, fit_alt_ratio_regression, pa_equivalent, synth_pa_mixture,
    AltVariant,
};

fn main() -> altlab::Result<()> {
    let n = 10;
    println!("x of {n} alternating  CALT    ratio");
    for x in [1, 2, 5, 10] {
        let calt = alt_scores(&synth_pa_mixture(x, n, 100)?, n)?.calt;
        println!("{x:>18}  {calt:.4}  {:.4}", alt_ratio_from_calt(calt));
    }

    for variant in [AltVariant::Calt, AltVariant::Ealt, AltVariant::Aalt] {
        let fit = fit_alt_ratio_regression(variant, 2..=20)?;
        println!(
            "{variant:>5}: ratio = {:.4} + {:.4}·v^{:.3} (rmse {:.1e})",
            fit.intercept, fit.slope, fit.exponent, fit.rmse
        );
    }

    for (n, calt) in [(2, 0.3222), (5, 0.0624), (10, 0.0482)] {
        let pa = pa_equivalent(alt_ratio_from_calt(calt), n)?;
        println!(
            "n={n:<2} CALT {calt}: {:.2} PA-equivalent agents ({:.1}% of perfect)",
            pa.pa_equiv_agents, pa.pct_of_perfect
        );
    }
    Ok(())
}
