//! Certified enclosures of the numerical radius and the Crawford number of
//! a square matrix, through the support function of its numerical range.
//!
//! For `H(phi) = cos(phi) Re M + sin(phi) Im M` the support function of
//! `W(M)` in direction `phi` is `h(phi) = lambda_max(H(phi))`, and
//!
//! * `w(M) = max_phi h(phi)`,
//! * `c(M) = max(0, -min_phi h(phi))`.
//!
//! One eigen-solve at `phi` yields `h(phi)` and `h(phi + pi) = -lambda_min`.
//! Samples on a circular grid give a lower bound for `w` directly. Between
//! two neighbouring samples `h` is bounded above by the vertex of the two
//! supporting lines (and by a Lipschitz estimate), which certifies `w` from
//! above. For `c`, the Rayleigh points of the extremal eigenvectors lie in
//! `W(M)` and bound `h` from below inside each cell. Cells whose bound is
//! not yet within the target are bisected.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::enclosure::{Enclosure, Method};
use crate::error::{Error, Result};
use crate::linalg::{c64, eigh_unchecked, spectral_norm, Complex64, ComplexMatrix, ComplexVector, EigenWorkspace};

/// Controls the angular grid and its refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadiusOptions {
    /// Initial number of angles over `[0, 2pi)`; rounded up to an even count.
    pub grid: usize,
    /// Target enclosure width, relative to `1 + ||M||_2`.
    pub gap: f64,
    pub max_rounds: usize,
    /// Budget of eigen-solves per enclosure.
    pub max_evals: usize,
    /// Monte-Carlo samples used to tighten the Crawford upper bound.
    pub oracle_samples: usize,
    pub seed: u64,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self {
            grid: 256,
            gap: 1e-12,
            max_rounds: 20,
            max_evals: 65_536,
            oracle_samples: 0,
            seed: 0,
        }
    }
}

impl RadiusOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(Error::BadConfig(format!("grid must be at least 4, got {}", self.grid)));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::BadConfig(format!("gap must be positive, got {}", self.gap)));
        }
        Ok(())
    }

    /// Absolute target width for a matrix of spectral norm `norm`.
    pub fn target(&self, norm: f64) -> f64 {
        self.gap * (1.0 + norm)
    }
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    phi: f64,
    h: f64,
    /// Rayleigh point of the maximizing eigenvector (only for Crawford).
    point: Complex64,
    /// Cached bound for the cell starting at this sample; NaN when stale.
    bound: f64,
    fresh: bool,
}

impl Sample {
    fn new(phi: f64, h: f64, point: Complex64) -> Self {
        Self { phi, h, point, bound: f64::NAN, fresh: true }
    }
}

struct Support {
    r: usize,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    m: ComplexMatrix,
    ws: EigenWorkspace,
    with_points: bool,
    evals: usize,
}

impl Support {
    fn new(m: &ComplexMatrix, with_points: bool) -> Self {
        let r = m.nrows();
        let mut h1 = Vec::with_capacity(r * r);
        let mut h2 = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let a = m[(i, j)];
                let b = m[(j, i)].conj();
                h1.push((a + b) * 0.5);
                h2.push((a - b) * c64(0.0, -0.5));
            }
        }
        Self {
            r,
            h1,
            h2,
            m: m.clone(),
            ws: EigenWorkspace::default(),
            with_points,
            evals: 0,
        }
    }

    /// Samples at `phi` and `phi + pi`, for `phi` in `[0, pi)`.
    fn pair(&mut self, phi: f64) -> Result<[Sample; 2]> {
        self.evals += 1;
        let (s, c) = phi.sin_cos();
        let r = self.r;
        let antipode = phi + PI;
        if !self.with_points {
            let buf = self.ws.buffer(r);
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = self.h1[k] * c + self.h2[k] * s;
            }
            let vals = self.ws.solve(r)?;
            let (lo, hi) = (vals[0], vals[r - 1]);
            let zero = Complex64::default();
            return Ok([Sample::new(phi, hi, zero), Sample::new(antipode, -lo, zero)]);
        }
        let h = ComplexMatrix::from_fn(r, r, |i, j| self.h1[i * r + j] * c + self.h2[i * r + j] * s);
        let eig = eigh_unchecked(&h)?;
        let rayleigh = |col: usize| {
            let y: ComplexVector = eig.vectors.column(col).into_owned();
            y.dotc(&(&self.m * &y)) / y.norm_squared()
        };
        Ok([
            Sample::new(phi, eig.values[r - 1], rayleigh(r - 1)),
            Sample::new(antipode, -eig.values[0], rayleigh(0)),
        ])
    }

    fn initial(&mut self, grid: usize) -> Result<Vec<Sample>> {
        let k = grid + grid % 2;
        let mut samples = Vec::with_capacity(k);
        for j in 0..k / 2 {
            samples.extend(self.pair(TAU * j as f64 / k as f64)?);
        }
        samples.sort_unstable_by(|a, b| a.phi.total_cmp(&b.phi));
        Ok(samples)
    }

    /// Bisects the given cells (and, by symmetry, their antipodal cells).
    fn bisect(&mut self, samples: &mut Vec<Sample>, cells: &[usize]) -> Result<()> {
        let mut mids: Vec<f64> = cells
            .iter()
            .map(|&i| {
                let (a, _, width) = cell(samples, i);
                (a.phi + 0.5 * width) % PI
            })
            .collect();
        mids.sort_by(f64::total_cmp);
        mids.dedup_by(|b, a| (*b - *a).abs() <= 1e-13);
        for phi in mids {
            samples.extend(self.pair(phi)?);
        }
        samples.sort_unstable_by(|a, b| a.phi.total_cmp(&b.phi));
        Ok(())
    }
}

/// Refreshes stale cell bounds and returns them.
fn cell_bounds(samples: &mut [Sample], bound: impl Fn(&Sample, &Sample, f64) -> f64) -> Vec<f64> {
    let k = samples.len();
    for i in 0..k {
        if samples[(i + 1) % k].fresh {
            samples[i].bound = f64::NAN;
        }
    }
    for i in 0..k {
        if samples[i].bound.is_nan() {
            let (a, b, width) = cell(samples, i);
            samples[i].bound = bound(&a, &b, width);
        }
    }
    for s in samples.iter_mut() {
        s.fresh = false;
    }
    samples.iter().map(|s| s.bound).collect()
}

/// Cell `i` runs from sample `i` to sample `i + 1` (cyclically).
fn cell(samples: &[Sample], i: usize) -> (Sample, Sample, f64) {
    let a = samples[i];
    let (b, width) = if i + 1 == samples.len() {
        (samples[0], samples[0].phi + TAU - a.phi)
    } else {
        (samples[i + 1], samples[i + 1].phi - a.phi)
    };
    (a, b, width)
}

/// Upper bound for `h` on a cell: the vertex of the supporting lines at
/// both ends, capped by the Lipschitz estimate.
fn cell_upper(a: &Sample, b: &Sample, width: f64, lipschitz: f64) -> f64 {
    let half = 0.5 * width;
    let along = (a.h + b.h) / (2.0 * half.cos());
    let across = (b.h - a.h) / (2.0 * half.sin());
    let vertex = along.hypot(across);
    vertex.min(0.5 * (a.h + b.h) + lipschitz * half)
}

/// Lower bound for `h` on a cell from the two Rayleigh points, which both
/// lie in the numerical range, together with the Lipschitz estimate.
fn cell_lower(a: &Sample, b: &Sample, width: f64, lipschitz: f64) -> f64 {
    let f = |phi: f64| {
        let e = Complex64::from_polar(1.0, -phi);
        (e * a.point).re.max((e * b.point).re)
    };
    let start = a.phi;
    let end = a.phi + width;
    let mut best = f(start).min(f(end));
    let diff = a.point - b.point;
    let mut candidates = [a.point.arg() + PI, b.point.arg() + PI, 0.0, 0.0];
    candidates[2] = diff.arg() + 0.5 * PI;
    candidates[3] = diff.arg() - 0.5 * PI;
    for c in candidates {
        // Shift the candidate into [start, start + 2pi).
        let t = start + (c - start).rem_euclid(TAU);
        if t <= end {
            best = best.min(f(t));
        }
    }
    let lipschitz_bound = 0.5 * (a.h + b.h) - lipschitz * 0.5 * width;
    best.max(lipschitz_bound)
}

fn rounding_margin(r: usize, norm: f64) -> f64 {
    16.0 * f64::EPSILON * (r as f64 + 1.0) * norm
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Enclosure of `w(M) = max |<My, y>|` over unit vectors `y`.
pub fn numerical_radius(m: &ComplexMatrix, opts: &RadiusOptions) -> Result<Enclosure> {
    check_square(m)?;
    opts.validate()?;
    let r = m.nrows();
    if r == 0 {
        return Ok(Enclosure::exact(0.0));
    }
    if r == 1 {
        return Ok(Enclosure::exact(m[(0, 0)].norm()));
    }
    let norm = spectral_norm(m);
    if norm == 0.0 {
        return Ok(Enclosure::exact(0.0));
    }
    let lipschitz = norm * (1.0 + 1e-12);
    let margin = rounding_margin(r, norm);
    let target = opts.target(norm);

    let mut support = Support::new(m, false);
    let mut samples = support.initial(opts.grid)?;
    let mut round = 0;
    loop {
        let lo = samples.iter().map(|s| s.h).fold(0.0, f64::max);
        let uppers = cell_bounds(&mut samples, |a, b, width| cell_upper(a, b, width, lipschitz));
        let hi = uppers.iter().copied().fold(lo, f64::max);
        let done = hi - lo <= target;
        if done || round == opts.max_rounds || support.evals >= opts.max_evals {
            let lo = (lo - margin).max(0.0);
            return Ok(Enclosure::new(lo, hi + margin, Method::Grid));
        }
        let open: Vec<usize> = (0..uppers.len()).filter(|&i| uppers[i] > lo + target).collect();
        support.bisect(&mut samples, &open)?;
        round += 1;
    }
}

/// Enclosure of the Crawford number `c(M) = min |<My, y>|` over unit
/// vectors `y`, i.e. the distance from 0 to the numerical range.
pub fn crawford_number(m: &ComplexMatrix, opts: &RadiusOptions) -> Result<Enclosure> {
    check_square(m)?;
    opts.validate()?;
    let r = m.nrows();
    if r == 0 {
        return Ok(Enclosure::exact(0.0));
    }
    if r == 1 {
        return Ok(Enclosure::exact(m[(0, 0)].norm()));
    }
    let norm = spectral_norm(m);
    if norm == 0.0 {
        return Ok(Enclosure::exact(0.0));
    }
    let lipschitz = norm * (1.0 + 1e-12);
    let margin = rounding_margin(r, norm);
    let target = opts.target(norm);
    let oracle = mc_crawford_upper_of(m, opts.oracle_samples, opts.seed);

    let mut support = Support::new(m, true);
    let mut samples = support.initial(opts.grid)?;
    let mut round = 0;
    loop {
        let lo = samples.iter().map(|s| -s.h).fold(0.0, f64::max);
        // Upper bounds on c contributed by each cell.
        let uppers = cell_bounds(&mut samples, |a, b, width| -cell_lower(a, b, width, lipschitz));
        let hi = uppers.iter().copied().fold(0.0, f64::max).min(oracle).max(lo);
        let done = hi - lo <= target;
        if done || round == opts.max_rounds || support.evals >= opts.max_evals {
            let lo = (lo - margin).max(0.0);
            return Ok(Enclosure::new(lo, hi + margin, Method::Grid));
        }
        let open: Vec<usize> = (0..uppers.len()).filter(|&i| uppers[i] > lo + target).collect();
        support.bisect(&mut samples, &open)?;
        round += 1;
    }
}

fn random_unit(rng: &mut ChaCha8Rng, r: usize) -> ComplexVector {
    let mut y = ComplexVector::from_fn(r, |_, _| {
        c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let norm = y.norm();
    y /= c64(norm, 0.0);
    y
}

fn sampled_moduli(m: &ComplexMatrix, samples: usize, seed: u64) -> impl Iterator<Item = f64> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = m.nrows();
    (0..samples).map(move |_| {
        let y = random_unit(&mut rng, r);
        y.dotc(&(m * &y)).norm()
    })
}

/// Best sampled `|<My, y>|` over random unit vectors; a lower bound for `w(M)`.
pub fn mc_radius_lower_of(m: &ComplexMatrix, samples: usize, seed: u64) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sampled_moduli(m, samples, seed).fold(0.0, f64::max)
}

/// Smallest sampled `|<My, y>|`; an upper bound for `c(M)`. Infinite when
/// no samples are drawn.
pub fn mc_crawford_upper_of(m: &ComplexMatrix, samples: usize, seed: u64) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sampled_moduli(m, samples, seed).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use proptest::prelude::*;

    fn opts() -> RadiusOptions {
        RadiusOptions::default()
    }

    fn random_matrix(r: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(r, r, |_, _| {
            c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    /// Dense reference: `max_phi lambda_max` on a fine grid through the
    /// Jacobi solver, independent of the refinement logic.
    fn dense_extremes(m: &ComplexMatrix, k: usize) -> (f64, f64) {
        let mut best_max = f64::NEG_INFINITY;
        let mut best_min = f64::NEG_INFINITY;
        for j in 0..k {
            let phi = TAU * j as f64 / k as f64;
            let e = Complex64::from_polar(1.0, phi);
            let h = (m * e + m.adjoint() * e.conj()) * c64(0.5, 0.0);
            let eig = eigh_unchecked(&h).unwrap();
            best_max = best_max.max(eig.values[eig.values.len() - 1]);
            best_min = best_min.max(eig.values[0]);
        }
        (best_max, best_min.max(0.0))
    }

    #[test]
    fn nilpotent_disk() {
        let m = real_matrix(&[[0.0, 1.0], [0.0, 0.0]]);
        let e = numerical_radius(&m, &opts()).unwrap();
        assert!(e.contains(0.5), "{e}");
        assert!(e.gap() <= 1e-9, "{e}");
        let c = crawford_number(&m, &opts()).unwrap();
        assert!(c.lo == 0.0 && c.hi <= 1e-12, "{c}");
    }

    #[test]
    fn hermitian_radius_is_spectral_radius() {
        let m = real_matrix(&[[-3.0, 0.0], [0.0, 2.0]]);
        let e = numerical_radius(&m, &opts()).unwrap();
        assert!(e.contains(3.0) && e.gap() <= 1e-12, "{e}");
    }

    #[test]
    fn crawford_examples() {
        let jordan = real_matrix(&[[1.0, 1.0], [0.0, 1.0]]);
        let c = crawford_number(&jordan, &opts()).unwrap();
        assert!(c.contains(0.5) && c.gap() <= 1e-9, "{c}");
        let seg = real_matrix(&[[1.0, 0.0], [0.0, 2.0]]);
        let c = crawford_number(&seg, &opts()).unwrap();
        assert!(c.contains(1.0) && c.gap() <= 1e-9, "{c}");
        let touching = real_matrix(&[[0.0, 0.0], [0.0, 1.0]]);
        let c = crawford_number(&touching, &opts()).unwrap();
        assert!(c.lo == 0.0 && c.hi <= 1e-12, "{c}");
    }

    #[test]
    fn trivial_sizes() {
        let empty = ComplexMatrix::zeros(0, 0);
        assert_eq!(numerical_radius(&empty, &opts()).unwrap(), Enclosure::exact(0.0));
        let one = ComplexMatrix::from_element(1, 1, c64(3.0, 4.0));
        assert_eq!(numerical_radius(&one, &opts()).unwrap(), Enclosure::exact(5.0));
        assert_eq!(crawford_number(&one, &opts()).unwrap(), Enclosure::exact(5.0));
        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(numerical_radius(&zero, &opts()).unwrap(), Enclosure::exact(0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(numerical_radius(&rect, &opts()), Err(Error::NonSquare { .. })));
        let bad = RadiusOptions { grid: 2, ..opts() };
        assert!(matches!(
            numerical_radius(&ComplexMatrix::identity(2, 2), &bad),
            Err(Error::BadConfig(_))
        ));
    }

    #[test]
    fn random_matrix_agrees_with_oracle() {
        let m = random_matrix(4, 42);
        let e = numerical_radius(&m, &opts()).unwrap();
        let oracle = mc_radius_lower_of(&m, 100_000, 42);
        assert!(oracle <= e.hi);
        assert!(e.gap() <= 1e-9 * (1.0 + spectral_norm(&m)), "{e}");
    }

    #[test]
    fn oracle_edge_cases() {
        let id = ComplexMatrix::identity(3, 3);
        assert_eq!(mc_radius_lower_of(&id, 0, 1), 0.0);
        assert_eq!(mc_crawford_upper_of(&id, 0, 1), f64::INFINITY);
        assert!((mc_radius_lower_of(&id, 50, 1) - 1.0).abs() < 1e-14);
        assert!((mc_crawford_upper_of(&id, 50, 1) - 1.0).abs() < 1e-14);
        assert_eq!(mc_radius_lower_of(&id, 50, 9), mc_radius_lower_of(&id, 50, 9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn enclosures_contain_dense_reference(r in 2usize..6, seed in 0u64..10_000, shift in -2.0f64..2.0) {
            let m = random_matrix(r, seed) + ComplexMatrix::identity(r, r) * c64(shift, 0.5 * shift);
            let w = numerical_radius(&m, &opts()).unwrap();
            let c = crawford_number(&m, &opts()).unwrap();
            let (w_ref, c_ref) = dense_extremes(&m, 4096);
            // The dense grid value is attained, hence a lower bound.
            prop_assert!(w_ref <= w.hi + 1e-12);
            prop_assert!(c_ref <= c.hi + 1e-12);
            prop_assert!(w.lo <= w_ref + 1e-4 * (1.0 + w_ref));
            prop_assert!(c.lo <= c_ref + 1e-4 * (1.0 + c_ref));
            prop_assert!(w.gap() <= 1e-9 * (1.0 + spectral_norm(&m)));
            prop_assert!(c.lo <= c.hi);
        }
    }
}
