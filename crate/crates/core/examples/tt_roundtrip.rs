//! Decompose a random order-5 tensor at several tau values and report bond
//! dimensions, storage and reconstruction error.
//!
//! cargo run --example tt_roundtrip

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_anomaly::{tt_contract, tt_decompose, DenseTensor, TruncationPolicy};

fn main() -> tt_anomaly::Result<()> {
    let dims = vec![3, 4, 2, 4, 3];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<f64> = (0..dims.iter().product::<usize>())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let t = DenseTensor::new(dims, data)?;

    println!("{:>5}  {:<18} {:>8}  {:>10}", "tau", "bonds", "params", "rel. error");
    for tau in [0.0, 0.1, 0.2, 0.4, 0.8] {
        let chain = tt_decompose(&t, &TruncationPolicy::uniform(tau)?)?;
        let back = tt_contract(&chain)?;
        let err: f64 = back
            .data()
            .iter()
            .zip(t.data())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / t.frobenius_norm();
        let params: usize = chain.cores().iter().map(|c| c.data().len()).sum();
        println!(
            "{tau:>5.2}  {:<18} {params:>8}  {err:>10.3e}",
            format!("{:?}", chain.bond_dims())
        );
    }
    Ok(())
}
