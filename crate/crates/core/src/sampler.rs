//! Deterministic random spaces, admissible operators and A-unit vectors.
//!
//! Every random stream is a ChaCha8 generator keyed by a seed derived from
//! the master seed along a path of integers (dimension, rank, trial,
//! operand), so a sample never depends on how many others were drawn
//! before it or on which worker drew them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::catalog::OperandBundle;
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_part, Complex64, ComplexMatrix, ComplexVector, Tolerances};
use crate::space::{SemiHilbertSpace, SemiOperator};

/// Distribution of the positive eigenvalues of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum SpectrumLaw {
    Uniform { lo: f64, hi: f64 },
    Equal { value: f64 },
    /// `top, top * ratio, top * ratio^2, ...`
    Geometric { top: f64, ratio: f64 },
}

impl Default for SpectrumLaw {
    fn default() -> Self {
        SpectrumLaw::Uniform { lo: 0.1, hi: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub dim: usize,
    pub rank: usize,
    pub law: SpectrumLaw,
    /// Standard deviation of operator entries.
    pub scale: f64,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(dim: usize, rank: usize, seed: u64) -> Self {
        Self {
            dim,
            rank,
            law: SpectrumLaw::default(),
            scale: 1.0,
            seed,
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let bad = |msg: String| Err(Error::BadConfig(msg));
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        if self.rank > self.dim {
            return bad(format!("rank {} exceeds dimension {}", self.rank, self.dim));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("entry scale must be positive, got {}", self.scale));
        }
        match self.law {
            SpectrumLaw::Uniform { lo, hi } if !(lo > 0.0 && hi >= lo && hi.is_finite()) => {
                bad(format!("uniform law needs 0 < lo <= hi, got ({lo}, {hi})"))
            }
            SpectrumLaw::Equal { value } if !(value > 0.0 && value.is_finite()) => {
                bad(format!("equal law needs a positive value, got {value}"))
            }
            SpectrumLaw::Geometric { top, ratio } => {
                if !(top > 0.0 && top.is_finite() && ratio > 0.0 && ratio <= 1.0) {
                    return bad(format!("geometric law needs top > 0 and 0 < ratio <= 1, got ({top}, {ratio})"));
                }
                let smallest = ratio.powi(self.rank.saturating_sub(1) as i32);
                if self.rank > 0 && smallest <= 100.0 * tol.cutoff {
                    return bad(format!("geometric ratio {ratio} drives eigenvalues below the rank cutoff"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the stream at `path` below `master`, by chained SplitMix64.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream ids below a trial seed.
pub mod streams {
    pub const SPACE: u64 = 0;
    pub const OPERATORS: [(&str, u64); 8] = [
        ("T", 1),
        ("S", 2),
        ("X", 3),
        ("Y", 4),
        ("T1", 5),
        ("T2", 6),
        ("S1", 7),
        ("S2", 8),
    ];
    pub const SELFADJOINT: u64 = 9;
    pub const COMMUTING: u64 = 10;
    pub const VECTORS: u64 = 100;
}

fn gaussian(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng, 1.0));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn spectrum(config: &SampleConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..config.rank)
        .map(|k| match config.law {
            SpectrumLaw::Uniform { lo, hi } => {
                if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                }
            }
            SpectrumLaw::Equal { value } => value,
            SpectrumLaw::Geometric { top, ratio } => top * ratio.powi(k as i32),
        })
        .collect()
}

/// The seed matrix `A = U diag(lambda_1..lambda_r, 0..0) U*`.
pub fn sample_seed_matrix(config: &SampleConfig) -> Result<ComplexMatrix> {
    config.validate(&Tolerances::default())?;
    let n = config.dim;
    let mut rng = stream(derive_seed(config.seed, &[streams::SPACE]));
    if let (SpectrumLaw::Equal { value }, true) = (config.law, config.rank == n) {
        return Ok(ComplexMatrix::identity(n, n) * c64(value, 0.0));
    }
    let lambdas = spectrum(config, &mut rng);
    let u = random_unitary(n, &mut rng);
    let mut scaled = u.clone();
    for j in 0..n {
        let l = lambdas.get(j).copied().unwrap_or(0.0);
        for i in 0..n {
            scaled[(i, j)] *= l;
        }
    }
    Ok(hermitian_part(&(scaled * u.adjoint())))
}

pub fn sample_space(config: &SampleConfig) -> Result<SemiHilbertSpace> {
    sample_space_with(config, Tolerances::default())
}

pub fn sample_space_with(config: &SampleConfig, tol: Tolerances) -> Result<SemiHilbertSpace> {
    config.validate(&tol)?;
    SemiHilbertSpace::new(&sample_seed_matrix(config)?, tol)
}

/// A random matrix in `B_A(H)`: in the eigenbasis of `A` ordered as
/// (null space, range) its block mapping the null space into the range is
/// zero, and all other entries are independent complex Gaussians.
pub fn sample_operator_matrix(space: &SemiHilbertSpace, scale: f64, seed: u64) -> ComplexMatrix {
    let n = space.dim();
    let null = n - space.rank();
    let mut rng = stream(seed);
    let g = ComplexMatrix::from_fn(n, n, |i, j| {
        let z = gaussian(&mut rng, scale);
        if i >= null && j < null {
            Complex64::default()
        } else {
            z
        }
    });
    let u = &space.eigen().vectors;
    u * g * u.adjoint()
}

pub fn sample_operator_in_ba(space: &SemiHilbertSpace, scale: f64, seed: u64) -> Result<SemiOperator> {
    space.register(sample_operator_matrix(space, scale, seed))
}

/// `Re_A(R)` for a random admissible `R`.
pub fn sample_a_selfadjoint(space: &SemiHilbertSpace, scale: f64, seed: u64) -> Result<SemiOperator> {
    let r = sample_operator_in_ba(space, scale, seed)?;
    space.register(space.re_part(&r)?)
}

/// `(p(R), q(R))` for a random admissible `R` and random polynomials of
/// degree at most two.
pub fn sample_commuting_pair(space: &SemiHilbertSpace, scale: f64, seed: u64) -> Result<(SemiOperator, SemiOperator)> {
    let n = space.dim();
    let r = sample_operator_matrix(space, scale, derive_seed(seed, &[0]));
    let r2 = &r * &r;
    let mut rng = stream(derive_seed(seed, &[1]));
    let mut poly = || {
        let (a0, a1, a2) = (gaussian(&mut rng, 1.0), gaussian(&mut rng, 1.0), gaussian(&mut rng, 1.0 / scale));
        ComplexMatrix::identity(n, n) * a0 * c64(scale, 0.0) + &r * a1 + &r2 * a2
    };
    let p = poly();
    let q = poly();
    Ok((space.register(p)?, space.register(q)?))
}

/// A vector with `||x||_A = 1`, uniform on the A-unit sphere modulo `N(A)`.
pub fn sample_unit_vector(space: &SemiHilbertSpace, seed: u64) -> Result<ComplexVector> {
    let r = space.rank();
    if r == 0 {
        return Err(Error::DegenerateSpace);
    }
    let mut rng = stream(seed);
    let mut y = ComplexVector::from_fn(r, |_, _| gaussian(&mut rng, 1.0));
    let norm = y.norm();
    y /= c64(norm, 0.0);
    Ok(space.coord_inverse() * y)
}

/// The full operand bundle of one trial.
pub fn sample_bundle(space: &SemiHilbertSpace, scale: f64, seed: u64, vectors: usize) -> Result<OperandBundle> {
    let mut bundle = OperandBundle::default();
    for (name, id) in streams::OPERATORS {
        let m = sample_operator_matrix(space, scale, derive_seed(seed, &[id]));
        bundle.operators.insert(name.to_string(), m);
    }
    let h = sample_a_selfadjoint(space, scale, derive_seed(seed, &[streams::SELFADJOINT]))?;
    bundle.operators.insert("H".into(), h.into_matrix());
    let (u, v) = sample_commuting_pair(space, scale, derive_seed(seed, &[streams::COMMUTING]))?;
    bundle.operators.insert("U".into(), u.into_matrix());
    bundle.operators.insert("V".into(), v.into_matrix());
    if space.rank() > 0 {
        for k in 0..vectors {
            let x = sample_unit_vector(space, derive_seed(seed, &[streams::VECTORS + k as u64]))?;
            bundle.vectors.push(x);
        }
    }
    Ok(bundle)
}
