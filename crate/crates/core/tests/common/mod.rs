#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use swapsim::{DensityMatrix, Direction, Operator, StateVector};

/// Haar-random pure state from normalized complex Gaussians.
pub fn random_state<R: Rng>(num_qubits: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << num_qubits)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

pub fn random_direction<R: Rng>(rng: &mut R) -> Direction {
    let v: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    Direction::new(v[0] / n, v[1] / n, v[2] / n).unwrap()
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Operator {
    let mut m = Operator::zeros(dim);
    for i in 0..dim {
        m.set(i, i, C64::new(rng.sample(StandardNormal), 0.0));
        for j in i + 1..dim {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

pub fn random_operator<R: Rng>(dim: usize, rng: &mut R) -> Operator {
    let rows = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    Operator::from_rows(rows).unwrap()
}

/// Random convex mixture of `terms` random product states of two qubits.
pub fn random_separable<R: Rng>(terms: usize, rng: &mut R) -> DensityMatrix {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<(f64, DensityMatrix)> = weights
        .iter()
        .map(|w| {
            let prod = random_state(1, rng).tensor(&random_state(1, rng));
            (w / total, swapsim::density_from_pure(&prod))
        })
        .collect();
    DensityMatrix::mixture(&parts).unwrap()
}

pub fn random_density<R: Rng>(num_qubits: usize, terms: usize, rng: &mut R) -> DensityMatrix {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<(f64, DensityMatrix)> = weights
        .iter()
        .map(|w| {
            (
                w / total,
                swapsim::density_from_pure(&random_state(num_qubits, rng)),
            )
        })
        .collect();
    DensityMatrix::mixture(&parts).unwrap()
}

/// Binomial 4σ half-width.
pub fn four_sigma(p: f64, n: u64) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}
