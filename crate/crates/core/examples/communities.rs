//! Louvain, label propagation and Girvan-Newman on the sector-mode network,
//! compared with the planted sectors.
//!
//! `cargo run --example communities`

use specnet::community::{girvan_newman, louvain, modularity, nmi, Detector, Partition};
use specnet::network::WeightTransform;
use specnet::rolling::{mode_networks, Mode};
use specnet::spectral::MpVariant;
use specnet::synthetic::FactorMarket;

fn main() -> specnet::Result<()> {
    let market = FactorMarket::default().generate()?;
    let nets = mode_networks(&market.panel, &Mode::ALL, None, MpVariant::Standard, WeightTransform::Absolute)?;
    let planted = Partition::from_labels(&market.sectors);

    for (mode, net) in &nets.networks {
        let Some(net) = net else { continue };
        for d in Detector::ALL {
            let (p, q) = d.detect(net, 3)?;
            println!(
                "{mode:>6} {:>7}: {:>2} communities, Q = {q:.3}, NMI vs sectors {:.3}",
                d.name(),
                p.n_communities(),
                nmi(&p, &planted)?
            );
        }
    }

    let sector = nets.networks[&Mode::Sector].as_ref().expect("factor market has sector eigenvalues");
    let lv = louvain(sector, 3, 1.0)?;
    println!("louvain levels {}, accumulated Q {:.6}, recomputed {:.6}", lv.levels, lv.q, modularity(sector, &lv.partition)?.q);
    let gn = girvan_newman(sector)?;
    println!("girvan-newman: best of {} cuts after removing {} edges", gn.cuts.len(), gn.removed.len());
    Ok(())
}
