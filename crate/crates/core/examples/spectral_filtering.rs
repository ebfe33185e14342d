//! Correlation spectrum against the Marchenko-Pastur noise band, and the
//! market / sector / random split of the correlation matrix.
//!
//! `cargo run --example spectral_filtering`

use specnet::spectral::{
    correlation_matrix, decompose_modes, eigendecompose, mp_bounds, mp_density, select_sector_count, MpVariant,
};
use specnet::synthetic::{iid_gaussian_panel, FactorMarket};

fn main() -> specnet::Result<()> {
    let noise = iid_gaussian_panel(100, 1000, 5)?;
    let eig = eigendecompose(&correlation_matrix(&noise)?)?;
    let bounds = mp_bounds(100, 1000, MpVariant::Standard)?;
    let outside = eig.eigenvalues.iter().filter(|&&l| l < bounds.lambda_min || l > bounds.lambda_max).count();
    println!(
        "pure noise: band [{:.3}, {:.3}], {outside}/100 eigenvalues outside",
        bounds.lambda_min, bounds.lambda_max
    );
    println!("density at 1.0: {:.4}", mp_density(1.0, &bounds)?);

    let market = FactorMarket::default().generate()?;
    let c = correlation_matrix(&market.panel)?;
    let eig = eigendecompose(&c)?;
    let bounds = mp_bounds(market.panel.n_stocks(), market.panel.n_days(), MpVariant::Standard)?;
    let k = select_sector_count(&eig, &bounds, None)?;
    println!(
        "factor market: largest eigenvalue {:.2}, {k} sector eigenvalues above {:.3}",
        eig.eigenvalues[0], bounds.lambda_max
    );
    let modes = decompose_modes(&eig, k)?;
    let err = (&modes.total() - &c.values).amax();
    println!("market + sector + random reproduces C to {err:.1e}");
    Ok(())
}
