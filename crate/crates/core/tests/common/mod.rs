//! Dense brute-force realizations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use qregister::{DenseTensor, Mpo, Mps, C64};
use rand::Rng;

pub type Dense = Vec<Vec<C64>>;

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Bit `k` (0 = most significant) of `s` on `n` qubits.
pub fn bit(s: usize, k: usize, n: usize) -> usize {
    (s >> (n - 1 - k)) & 1
}

pub fn zeros(n: usize) -> Dense {
    vec![vec![C64::new(0.0, 0.0); 1 << n]; 1 << n]
}

pub fn diagonal(n: usize, f: impl Fn(usize) -> C64) -> Dense {
    let mut m = zeros(n);
    for s in 0..1 << n {
        m[s][s] = f(s);
    }
    m
}

/// `(S+ p)(s) = p(s - 1)`.
pub fn shift_up(n: usize) -> Dense {
    let mut m = zeros(n);
    for s in 1..1 << n {
        m[s][s - 1] = c(1.0);
    }
    m
}

pub fn shift_down(n: usize) -> Dense {
    let mut m = zeros(n);
    for s in 0..(1 << n) - 1 {
        m[s][s + 1] = c(1.0);
    }
    m
}

pub fn add(a: &Dense, b: &Dense, ca: C64, cb: C64) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| ca * p + cb * q).collect())
        .collect()
}

pub fn identity(n: usize) -> Dense {
    diagonal(n, |_| c(1.0))
}

pub fn twos(s: usize, n: usize) -> i64 {
    if s >= 1 << (n - 1) {
        s as i64 - (1i64 << n)
    } else {
        s as i64
    }
}

/// Unitary DFT with kernel `exp(sign 2 pi i s k / N) / sqrt(N)`.
pub fn dft(v: &[C64], sign: f64) -> Vec<C64> {
    let n = v.len();
    let norm = (n as f64).sqrt().recip();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(s, x)| {
                    x * C64::from_polar(norm, sign * 2.0 * PI * ((s * k) % n) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

pub fn matvec(m: &Dense, v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Largest entrywise deviation, relative to the largest oracle entry when that exceeds one.
pub fn mpo_deviation(op: &Mpo, oracle: &Dense) -> f64 {
    let got = op.to_dense().unwrap();
    let n = oracle.len();
    assert_eq!((got.nrows(), got.ncols()), (n, n));
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for i in 0..n {
        for j in 0..n {
            diff = diff.max((got[(i, j)] - oracle[i][j]).norm());
            scale = scale.max(oracle[i][j].norm());
        }
    }
    diff / scale
}

pub fn vec_deviation(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

pub fn random_vector(len: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// MPS with independent random cores of bond dimension up to `chi`.
pub fn random_mps(n: usize, chi: usize, rng: &mut impl Rng) -> Mps {
    let mut dims = vec![1usize; n + 1];
    for k in 1..n {
        let cap = (1usize << k.min(n - k)).min(chi);
        dims[k] = cap;
    }
    let sites = (0..n)
        .map(|k| {
            let shape = vec![dims[k], 2, dims[k + 1]];
            let len = shape.iter().product();
            DenseTensor::new(shape, random_vector(len, rng)).unwrap()
        })
        .collect();
    Mps::new(sites, 0.0).unwrap()
}

/// Dense product `layers[k-1] ... layers[0]` (the first layer acts first).
pub fn dense_product(layers: &[Mpo]) -> Dense {
    let n = layers[0].len();
    let mut acc = identity(n);
    for l in layers {
        let m = l.to_dense().unwrap();
        let dim = 1usize << n;
        acc = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| (0..dim).map(|k| m[(i, k)] * acc[k][j]).sum())
                    .collect()
            })
            .collect();
    }
    acc
}

pub fn dense_deviation(a: &Dense, b: &Dense) -> f64 {
    let scale = b.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}
