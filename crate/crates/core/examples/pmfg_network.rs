//! Planar maximally filtered graphs of each correlation mode.
//!
//! `cargo run --example pmfg_network`

use specnet::network::WeightTransform;
use specnet::pmfg::is_planar;
use specnet::rolling::{mode_networks, Mode};
use specnet::spectral::MpVariant;
use specnet::synthetic::FactorMarket;

fn main() -> specnet::Result<()> {
    let market = FactorMarket::default().generate()?;
    let nets = mode_networks(&market.panel, &Mode::ALL, None, MpVariant::Standard, WeightTransform::Absolute)?;
    for (mode, net) in &nets.networks {
        let Some(net) = net else {
            println!("{mode}: no network");
            continue;
        };
        let planar = is_planar(net.n(), &net.edge_pairs()).is_planar();
        let heaviest = net.edges().iter().max_by(|a, b| a.weight.total_cmp(&b.weight)).expect("edges");
        println!(
            "{mode:>6}: {} nodes, {} edges (3(N-2) = {}), planar {planar}, heaviest {}-{} ({:.3})",
            net.n(),
            net.edge_count(),
            3 * (net.n() - 2),
            net.labels[heaviest.i],
            net.labels[heaviest.j],
            heaviest.weight
        );
    }
    Ok(())
}
