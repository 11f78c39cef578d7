//! Exact straight-line path integrals for the shift/slack identity, used as an
//! oracle that shares no code with the Euler integrator.
//!
//! Along straight lines every integrand is a polynomial in `t`, so
//! Gauss–Legendre quadrature with enough nodes is exact up to rounding.

#![allow(dead_code)]

/// Levels of one identity `c = Π x_j · Σ_i w_i k_i` at both ends.
#[derive(Debug, Clone)]
pub struct LineProblem {
    pub scalars: Vec<(f64, f64)>,
    pub shares: Vec<(f64, f64)>,
    pub member_factors: Vec<(f64, f64)>,
}

/// Contributions in engine driver order: scalars, member factors, shifts.
#[derive(Debug, Clone)]
pub struct ExactContributions {
    pub scalars: Vec<f64>,
    pub member_factors: Vec<f64>,
    pub shifts: Vec<f64>,
}

impl ExactContributions {
    pub fn all(&self) -> Vec<f64> {
        self.scalars
            .iter()
            .chain(&self.member_factors)
            .chain(&self.shifts)
            .copied()
            .collect()
    }
}

fn lerp((a, b): (f64, f64), t: f64) -> f64 {
    a + (b - a) * t
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights mapped to [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            ((x + 1.0) / 2.0, w / 2.0)
        })
        .collect()
}

pub fn exact_contributions(p: &LineProblem) -> ExactContributions {
    let m = p.shares.len();
    let s = p.scalars.len();
    let nodes = gauss_legendre(12);
    let mut out = ExactContributions {
        scalars: vec![0.0; s],
        member_factors: vec![0.0; m],
        shifts: vec![0.0; m],
    };
    for (t, weight) in nodes {
        let x: Vec<f64> = p.scalars.iter().map(|&v| lerp(v, t)).collect();
        let w: Vec<f64> = p.shares.iter().map(|&v| lerp(v, t)).collect();
        let k: Vec<f64> = p.member_factors.iter().map(|&v| lerp(v, t)).collect();
        let structure: f64 = w.iter().zip(&k).map(|(a, b)| a * b).sum();
        let prod: f64 = x.iter().product();
        for j in 0..s {
            let others: f64 = x
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != j)
                .map(|(_, v)| v)
                .product();
            out.scalars[j] += weight * others * structure * (p.scalars[j].1 - p.scalars[j].0);
        }
        let mean_k = k.iter().sum::<f64>() / m as f64;
        for i in 0..m {
            out.member_factors[i] +=
                weight * prod * w[i] * (p.member_factors[i].1 - p.member_factors[i].0);
            out.shifts[i] += weight * prod * (k[i] - mean_k) * (p.shares[i].1 - p.shares[i].0);
        }
    }
    out
}
