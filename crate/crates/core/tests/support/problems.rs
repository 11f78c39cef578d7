//! Random decomposition problems of the shape used across the property suites:
//! three scalar factors and a three-member share group with its own factors,
//! every level in [0.5, 2].

#![allow(dead_code)]

use cooldecomp_core::decomp::{DecompositionProblem, FactorPath, ShareGroup};
use rand::Rng;

use super::quadrature::LineProblem;

pub const SCALARS: [&str; 3] = ["p", "n", "e"];
pub const MEMBERS: [&str; 3] = ["room_ac", "fan", "air_cooler"];

#[derive(Debug, Clone)]
pub struct Spec {
    pub scalars: Vec<(f64, f64)>,
    pub shares: Vec<(f64, f64)>,
    pub member_factors: Vec<(f64, f64)>,
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

impl Spec {
    /// `raw_*` shares are positive weights, normalized here.
    pub fn new(scalars: Vec<(f64, f64)>, raw_start: &[f64], raw_end: &[f64], member_factors: Vec<(f64, f64)>) -> Self {
        let start = normalize(raw_start);
        let end = normalize(raw_end);
        Self {
            scalars,
            shares: start.into_iter().zip(end).collect(),
            member_factors,
        }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let level = |rng: &mut dyn rand::RngCore| (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let scalars = (0..3).map(|_| level(rng)).collect();
        let member_factors = (0..3).map(|_| level(rng)).collect();
        let raw_start: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let raw_end: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        Self::new(scalars, &raw_start, &raw_end, member_factors)
    }

    pub fn problem(&self, segments: usize) -> DecompositionProblem {
        DecompositionProblem::new(
            SCALARS
                .iter()
                .zip(&self.scalars)
                .map(|(n, &(a, b))| FactorPath::new(*n, a, b))
                .collect(),
            ShareGroup {
                members: MEMBERS.iter().map(|s| s.to_string()).collect(),
                start_shares: self.shares.iter().map(|s| s.0).collect(),
                end_shares: self.shares.iter().map(|s| s.1).collect(),
                member_factors: Some(
                    MEMBERS
                        .iter()
                        .zip(&self.member_factors)
                        .map(|(n, &(a, b))| FactorPath::new(format!("k_{n}"), a, b))
                        .collect(),
                ),
            },
            segments,
        )
    }

    pub fn line(&self) -> LineProblem {
        LineProblem {
            scalars: self.scalars.clone(),
            shares: self.shares.clone(),
            member_factors: self.member_factors.clone(),
        }
    }
}
