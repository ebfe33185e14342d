//! Coreness from three detectors on a noisy planted core-periphery network.
//!
//! `cargo run --example core_periphery`

use specnet::coreperiphery::{
    cosine_similarity, cp_fit_distance, minres_coreness, rombach_coreness, rossa_coreness, rossa_profile,
    DEFAULT_MINRES_MAX_ITER, DEFAULT_MINRES_TOL,
};
use specnet::synthetic::planted_core_periphery;

fn main() -> specnet::Result<()> {
    let (n, k) = (30, 6);
    let net = planted_core_periphery(n, k, 0.05, 7)?;
    let profile = rossa_profile(&net)?;
    let c = profile.cp_centralization.expect("n >= 3");
    println!("cp-centralization {:.3}", c.reported());

    let rossa = rossa_coreness(&net)?;
    let minres = minres_coreness(&net, DEFAULT_MINRES_TOL, DEFAULT_MINRES_MAX_ITER)?;
    let rombach = rombach_coreness(&net, 2000, 11)?;
    println!("minres converged in {} iterations", minres.iterations);

    let adjacency = net.adjacency();
    for cv in [&rossa, &minres.coreness, &rombach] {
        let top: Vec<&str> = cv.ranking()[..k].iter().map(|&i| net.labels[i].as_str()).collect();
        println!(
            "{:>8}: top {k} {:?}, distance to ideal {:.3}",
            cv.method.name(),
            top,
            cp_fit_distance(&adjacency, cv, k)?
        );
    }
    println!("cosine rossa/minres {:.3}", cosine_similarity(&rossa.scores, &minres.coreness.scores)?);
    println!("cosine minres/rombach {:.3}", cosine_similarity(&minres.coreness.scores, &rombach.scores)?);
    Ok(())
}
