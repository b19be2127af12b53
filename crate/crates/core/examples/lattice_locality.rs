//! Regions, isotone embeddings and local commutativity on `Z^d`.

use quasilocal::lattice::{commutator, embed, make_region, operator_norm, site_operator, OpLabel, Region, Site};

fn main() -> quasilocal::Result<()> {
    let chain = Region::chain(-2, 5)?;
    println!("chain {chain}: {} sites, dimension {}", chain.len(), chain.total_dim());

    // A ⊗ I: embedding keeps the operator norm
    let x0 = site_operator(OpLabel::X, &Site::qubit(0))?;
    let lifted = embed(&x0, &chain)?;
    println!("‖X_0‖ = {}, after embedding into {chain}: {}", operator_norm(&x0), operator_norm(&lifted));

    // operators on disjoint regions commute; overlapping ones need not
    let z0 = site_operator(OpLabel::Z, &Site::qubit(0))?;
    let z2 = site_operator(OpLabel::Z, &Site::qubit(2))?;
    println!("‖[X_0, Z_2]‖ = {}", operator_norm(&commutator(&x0, &z2)?));
    println!("‖[X_0, Z_0]‖ = {}", operator_norm(&commutator(&x0, &z0)?));

    // square lattice, sites kept in canonical (lexicographic) order
    let square = make_region([Site::qubit_2d(1, 0), Site::qubit_2d(0, 1), Site::qubit_2d(0, 0)])?;
    println!("2D region in canonical order: {square}");

    // qutrit site with a matrix unit label
    let e01 = site_operator("E01".parse()?, &Site::new(vec![3], 3)?)?;
    println!("|0><1| on a qutrit: support {}, dimension {}", e01.support(), e01.matrix().nrows());
    Ok(())
}
