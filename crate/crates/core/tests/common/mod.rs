#![allow(dead_code)]

use nalgebra::DMatrix;
use olsform::{gram, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_COND: f64 = 1e8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Spectral condition number of `XᵀX`.
pub fn gram_condition(x: &DenseMatrix) -> f64 {
    let g = gram(x);
    let p = g.ncols();
    let m = DMatrix::from_fn(p, p, |r, c| g.get(r, c));
    let ev = m.symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn raw_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(n, p);
    for c in 0..p {
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let shift = rng.gen_range(-1.0..1.0);
        for r in 0..n {
            x.set(r, c, scale * (rng.gen_range(-1.0..1.0) + shift));
        }
    }
    x
}

/// Random `n × p` design with `cond(XᵀX) ≤ max_cond`; returns the design and
/// its condition number.
pub fn design(rng: &mut ChaCha8Rng, n: usize, p: usize, max_cond: f64) -> (DenseMatrix, f64) {
    loop {
        let x = raw_design(rng, n, p);
        let k = gram_condition(&x);
        if k <= max_cond {
            return (x, k);
        }
    }
}

/// Coefficients of magnitude 0.5..2 with random signs.
pub fn beta(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p)
        .map(|_| {
            let m = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

pub fn response(rng: &mut ChaCha8Rng, x: &DenseMatrix, beta: &[f64], noise: f64) -> Vec<f64> {
    let mean = x.matvec(beta).unwrap();
    mean.iter()
        .map(|m| m + noise * rng.gen_range(-1.0..1.0))
        .collect()
}

/// Design, true coefficients and a noisy response.
pub fn instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    max_cond: f64,
) -> (DenseMatrix, Vec<f64>, Vec<f64>) {
    let (x, _) = design(rng, n, p, max_cond);
    let b = beta(rng, p);
    let y = response(rng, &x, &b, 0.05);
    (x, b, y)
}

/// `max_i |a_i − o_i| / |o_i|`.
pub fn max_rel(a: &[f64], oracle: &[f64]) -> f64 {
    assert_eq!(a.len(), oracle.len());
    a.iter()
        .zip(oracle)
        .map(|(x, o)| (x - o).abs() / o.abs())
        .fold(0.0, f64::max)
}

/// `|a − o| / |o|`.
pub fn rel(a: f64, o: f64) -> f64 {
    (a - o).abs() / o.abs()
}

/// Genotype codes 0/1/2 drawn with allele frequency `maf`.
pub fn genotypes(rng: &mut ChaCha8Rng, m: usize, maf: f64) -> Vec<f64> {
    (0..m)
        .map(|_| (rng.gen_bool(maf) as u8 + rng.gen_bool(maf) as u8) as f64)
        .collect()
}

pub fn noise(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Non-degenerate locus pair: neither locus, nor their product, is constant.
pub fn locus_pair(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let gi = genotypes(rng, m, 0.35);
        let gj = genotypes(rng, m, 0.35);
        if olsform::interaction_stat(&gi, &gj, &noise(rng, m)).is_ok() {
            return (gi, gj);
        }
    }
}
