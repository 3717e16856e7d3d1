//! Save a TT chain and a fitted local basis to disk and load them back.
//!
//! cargo run --example chain_persistence

use tt_anomaly::storage::{load_basis, load_chain, save_basis, save_chain};
use tt_anomaly::{local_compress, local_fit, tt_decompose, DenseTensor, DetectorConfig, FactorShape, Method, TruncationPolicy};

fn main() -> tt_anomaly::Result<()> {
    let dir = std::env::temp_dir();
    let data: Vec<f64> = (0..64).map(|i| (i as f64 * 0.3).sin() + (i % 7) as f64 * 0.1).collect();

    let chain = tt_decompose(&DenseTensor::new(vec![4, 4, 4], data.clone())?, &TruncationPolicy::uniform(0.05)?)?;
    let chain_path = dir.join("example.ttc");
    save_chain(&chain_path, &chain)?;
    let loaded = load_chain(&chain_path)?;
    println!("chain bonds {:?}, identical after reload: {}", loaded.bond_dims(), loaded == chain);

    let cfg = DetectorConfig::new(Method::Acl, FactorShape::new(vec![2; 6])?, TruncationPolicy::per_step(vec![0.0, 0.0, 0.1, 0.1, 0.2])?);
    let basis = local_fit(&data, &cfg)?;
    let basis_path = dir.join("example.ttb");
    save_basis(&basis_path, &basis)?;
    let loaded = load_basis(&basis_path)?;
    let y: Vec<f64> = data.iter().rev().copied().collect();
    let a = local_compress(&y, &basis, basis.policy())?;
    let b = local_compress(&y, &loaded, loaded.policy())?;
    println!("basis bonds {:?}, same compression after reload: {}", loaded.bond_dims(), a == b);
    Ok(())
}
