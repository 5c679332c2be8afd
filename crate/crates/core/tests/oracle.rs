//! Cross-checks against an independent dense oracle. The oracle uses
//! nalgebra's own Hermitian eigensolver and SVD, textbook formulas for the
//! A-adjoint and the seminorm, and golden-section refinement of the
//! support function instead of certified grids.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiradius::campaign::{run_trials, CampaignConfig, Status};
use semiradius::linalg::{c64, psd_pseudo_inverse, psd_square_root, real_matrix, spectral_norm};
use semiradius::range::{mc_crawford_upper_of, mc_radius_lower_of};
use semiradius::sampler::{sample_a_selfadjoint, sample_bundle, sample_operator_in_ba, sample_space, sample_unit_vector, SampleConfig};
use semiradius::{
    a_numerical_radius, build_space, crawford, numerical_radius, op_seminorm, run_all, run_check, tightness_report,
    CheckOptions, CheckResult, Complex64, ComplexMatrix, ComplexVector, OperandBundle, RadiusOptions, SemiHilbertSpace,
    Verdict,
};

type M = DMatrix<Complex64>;

struct Oracle {
    sqrt_a: M,
    pinv_a: M,
    pinv_sqrt_a: M,
    /// Orthonormal basis of the range of `A`, one column per vector.
    range: M,
}

impl Oracle {
    fn new(a: &M) -> Self {
        let n = a.nrows();
        let eig = a.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
        let func = |f: &dyn Fn(f64) -> f64| {
            let mut out = M::zeros(n, n);
            for &i in &keep {
                let v = eig.eigenvectors.column(i);
                out += v * v.adjoint() * c64(f(eig.eigenvalues[i]), 0.0);
            }
            out
        };
        let range = M::from_fn(n, keep.len(), |i, k| eig.eigenvectors[(i, keep[k])]);
        Self {
            sqrt_a: func(&|l| l.sqrt()),
            pinv_a: func(&|l| 1.0 / l),
            pinv_sqrt_a: func(&|l| 1.0 / l.sqrt()),
            range,
        }
    }

    fn sharp(&self, a: &M, t: &M) -> M {
        &self.pinv_a * t.adjoint() * a
    }

    /// `T` seen on the range of `A` in an orthonormal basis.
    fn reduced(&self, t: &M) -> M {
        self.range.adjoint() * &self.sqrt_a * t * &self.pinv_sqrt_a * &self.range
    }

    fn seminorm(&self, t: &M) -> f64 {
        let m = self.reduced(t);
        if m.is_empty() {
            return 0.0;
        }
        m.singular_values().iter().cloned().fold(0.0, f64::max)
    }
}

fn lambda_max(m: &M, phi: f64) -> f64 {
    let rot = m * c64(phi.cos(), phi.sin());
    let h = (&rot + rot.adjoint()) * c64(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Extremum of `lambda_max(Re(e^{i phi} M))` by a dense scan followed by
/// golden-section search around the best sample.
fn support_extremum(m: &M, maximize: bool) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let f = |phi: f64| sign * lambda_max(m, phi);
    let n = 2048;
    let step = std::f64::consts::TAU / n as f64;
    let best = (0..n)
        .map(|k| k as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    sign * f(0.5 * (lo + hi)).max(f(best))
}

fn oracle_radius(m: &M) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    support_extremum(m, true)
}

fn oracle_crawford(m: &M) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    (-support_extremum(m, false)).max(0.0)
}

fn complex_gaussian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut g = || {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        (-2.0 * (1.0 - u).ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    ComplexMatrix::from_fn(n, n, |_, _| c64(g(), g()))
}

fn diag20() -> SemiHilbertSpace {
    build_space(&real_matrix(&[[2.0, 0.0], [0.0, 0.0]]), 1e-10).unwrap()
}

fn t_lower() -> ComplexMatrix {
    real_matrix(&[[1.0, 0.0], [5.0, 3.0]])
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    (a - b).iter().all(|z| z.norm() <= tol)
}

#[test]
fn all_ones_factors_satisfy_their_defining_equations() {
    let a = real_matrix(&[[1.0, 1.0], [1.0, 1.0]]);
    let p = psd_pseudo_inverse(&a, 1e-10).unwrap();
    assert!(close(&(&a * &p * &a), &a, 1e-14));
    assert!(close(&(&p * &a * &p), &p, 1e-14));
    assert!(close(&(&a * &p).adjoint(), &(&a * &p), 1e-14));
    assert!(close(&(&p * &a).adjoint(), &(&p * &a), 1e-14));
    assert!(close(&p, &real_matrix(&[[0.25, 0.25], [0.25, 0.25]]), 1e-14));
    let s = psd_square_root(&a, 1e-10).unwrap();
    assert!(close(&(&s * &s), &a, 1e-14));
    assert!((spectral_norm(&a) - 2.0).abs() < 1e-14);
}

#[test]
fn rank_one_space_by_hand() {
    let sp = diag20();
    assert_eq!(sp.rank(), 1);
    let c = sp.coord_map();
    assert_eq!((c.nrows(), c.ncols()), (1, 2));
    assert!((c[(0, 0)].norm() - 2f64.sqrt()).abs() < 1e-14 && c[(0, 1)].norm() < 1e-14);
    assert!(close(sp.range_projection(), &real_matrix(&[[1.0, 0.0], [0.0, 0.0]]), 1e-14));
    let x = ComplexVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
    let y = ComplexVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
    assert!((sp.a_inner(&x, &y).unwrap() - c64(2.0, 0.0)).norm() < 1e-14);
    assert!((sp.a_vec_norm(&x).unwrap() - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn adjoint_and_reduction_by_hand() {
    let sp = diag20();
    let a = sp.a().clone();
    let t = t_lower();
    assert!(sp.admits_a_adjoint(&t).unwrap() && sp.is_a_bounded(&t).unwrap());
    let upper = real_matrix(&[[1.0, 2.0], [0.0, 3.0]]);
    assert!(!sp.admits_a_adjoint(&upper).unwrap());

    let op = sp.register(t.clone()).unwrap();
    let sharp = sp.sharp(&op).unwrap();
    assert!(close(&sharp, &real_matrix(&[[1.0, 0.0], [0.0, 0.0]]), 1e-14));
    assert!(close(&(&a * &sharp), &(t.adjoint() * &a), 1e-14));

    // the reduction intertwines the coordinate map: C T = T~ C
    let tilde = sp.tilde(&op).unwrap();
    assert_eq!(tilde.shape(), (1, 1));
    assert!((tilde[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
    assert!(close(&(sp.coord_map() * &t), &(&tilde * sp.coord_map()), 1e-13));

    // parts from the adjoint above
    let re = sp.re_part(&op).unwrap();
    let im = sp.im_part(&op).unwrap();
    assert!(close(&re, &((&t + &sharp) * c64(0.5, 0.0)), 1e-14));
    assert!(close(&im, &((&t - &sharp) * c64(0.0, -0.5)), 1e-14));
    assert!(close(&re, &real_matrix(&[[1.0, 0.0], [2.5, 1.5]]), 1e-14));

    // A T = diag(2, 0) is Hermitian even though T differs from its adjoint
    let at = &a * &t;
    assert!(close(&at, &at.adjoint(), 1e-14));
    assert!(sp.is_a_selfadjoint(&t));
    assert!(!close(&t, &sharp, 1e-8));

    let opts = RadiusOptions::default();
    let n = op_seminorm(&sp, &op).unwrap();
    let w = a_numerical_radius(&sp, &op, &opts).unwrap();
    assert!(n.contains(1.0) || (n.mid() - 1.0).abs() < 1e-12);
    assert!((w.mid() - 1.0).abs() < 1e-12);
}

#[test]
fn mixed_norm_bound_against_dense_arithmetic() {
    let sp = diag20();
    let a = sp.a().clone();
    let t = t_lower();
    let oracle = Oracle::new(&a);
    let ts = oracle.sharp(&a, &t);
    let lhs = oracle.seminorm(&(&t * &ts + &ts * &t));
    let rhs = oracle.seminorm(&t).powi(2) + oracle.seminorm(&(&t * &t));
    assert!((lhs - 2.0).abs() < 1e-12 && (rhs - 2.0).abs() < 1e-12);

    let bundle = OperandBundle::default().with("T", t.clone()).with("S", t);
    let r = run_check(&sp, "C11", &bundle, &CheckOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::PassCertified);
    assert!(r.lhs.contains(lhs) || (r.lhs.mid() - lhs).abs() < 1e-12);
    assert!(r.rhs.contains(rhs) || (r.rhs.mid() - rhs).abs() < 1e-12);
}

#[test]
fn functionals_agree_with_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = RadiusOptions::default();
    for k in 0..60 {
        let dim = rng.random_range(2..=5);
        let rank = rng.random_range(1..=dim);
        let sp = sample_space(&SampleConfig::new(dim, rank, rng.random())).unwrap();
        let op = sample_operator_in_ba(&sp, 1.0, rng.random()).unwrap();
        let oracle = Oracle::new(sp.a());
        let reduced = oracle.reduced(op.matrix());
        let scale = 1.0 + oracle.seminorm(op.matrix());

        let sharp = sp.sharp(&op).unwrap();
        assert!(close(&sharp, &oracle.sharp(sp.a(), op.matrix()), 1e-9 * scale), "#{k} sharp");

        let n = op_seminorm(&sp, &op).unwrap();
        assert!((n.mid() - oracle.seminorm(op.matrix())).abs() <= 1e-10 * scale, "#{k} seminorm");

        let w = a_numerical_radius(&sp, &op, &opts).unwrap();
        let w_ref = oracle_radius(&reduced);
        assert!(w.lo <= w_ref + 1e-10 * scale && w_ref <= w.hi + 1e-10 * scale, "#{k} radius {w} vs {w_ref}");

        let c = crawford(&sp, &op, &opts).unwrap();
        let c_ref = oracle_crawford(&reduced);
        assert!(c.lo <= c_ref + 1e-10 * scale && c_ref <= c.hi + 1e-10 * scale, "#{k} crawford {c} vs {c_ref}");
    }
}

#[test]
fn seeded_matrices_against_sampling_oracles() {
    let opts = RadiusOptions::default();
    for seed in [42u64, 7] {
        let m = complex_gaussian(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        let w = numerical_radius(&m, &opts).unwrap();
        let sampled = mc_radius_lower_of(&m, 100_000, seed);
        let upper = mc_crawford_upper_of(&m, 100_000, seed);
        assert!(sampled <= w.hi + 1e-12, "seed {seed}: {sampled} above {w}");
        assert!(upper >= 0.0);
        // how close sampling gets is informative only
        println!("seed {seed}: w {w}, sampled {sampled:.12}, shortfall {:.3e}", w.lo - sampled);
        let w_ref = oracle_radius(&m);
        assert!(w.lo <= w_ref + 1e-12 && w_ref <= w.hi + 1e-12);
    }
}

#[test]
fn sampler_examples() {
    let sp = sample_space(&SampleConfig::new(4, 2, 9)).unwrap();
    assert_eq!(sp.rank(), 2);

    let sp = diag20();
    let op = sample_operator_in_ba(&sp, 1.0, 3).unwrap();
    let a = sp.a();
    let p = sp.range_projection();
    let identity = ComplexMatrix::identity(2, 2);
    let leak = (&identity - p) * op.matrix().adjoint() * a;
    assert!(leak.iter().all(|z| z.norm() < 1e-12));

    // an A-selfadjoint input is compressed to P R P
    let r = sample_a_selfadjoint(&sp, 1.0, 4).unwrap();
    let rop = sp.register(r.matrix().clone()).unwrap();
    let re = sp.re_part(&rop).unwrap();
    let are = a * &re;
    assert!(close(&are, &are.adjoint(), 1e-12));
    assert!(close(&(a * &re), &(a * p * r.matrix() * p), 1e-12));

    let x = sample_unit_vector(&sp, 5).unwrap();
    assert!((x[0].norm() - 0.5f64.sqrt()).abs() < 1e-12 && x[1].norm() < 1e-12);
    assert!((sp.a_vec_norm(&x).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn seeded_bundle_is_reproducible() {
    let sp = sample_space(&SampleConfig::new(4, 2, 1)).unwrap();
    let run = || {
        let bundle = sample_bundle(&sp, 1.0, 1, 8).unwrap();
        run_all(&sp, &bundle, &CheckOptions::default()).unwrap()
    };
    let (first, second) = (run(), run());
    assert_eq!(first.len(), 23);
    for (a, b) in first.iter().zip(&second) {
        match (&a.result, &b.result) {
            (Ok(x), Ok(y)) => {
                assert_ne!(x.verdict, Verdict::ViolationCandidate, "{}", a.id);
                assert_eq!(x.slack.to_bits(), y.slack.to_bits(), "{}", a.id);
            }
            (Err(x), Err(y)) => assert_eq!(x, y),
            _ => panic!("{} differs between runs", a.id),
        }
    }
}

#[test]
fn campaign_summary_matches_recomputation() {
    let config = CampaignConfig {
        dims: vec![2, 3],
        ranks: Some(vec![1, 2]),
        trials: 25,
        seed: 8,
        ..CampaignConfig::default()
    };
    let records = run_trials(&config, 1).unwrap();
    assert_eq!(records.len(), 100);
    let report = semiradius::campaign::run_campaign(&config, 2).unwrap();

    // recompute every check from scratch, one run_check per trial
    let mut results: Vec<CheckResult> = Vec::new();
    for rec in &records {
        let (space, bundle) = config.generate(rec.key).unwrap();
        for c in &rec.checks {
            if let Status::Evaluated { slack, .. } = c.status {
                let mut r = run_check(&space, c.id, &bundle, &config.options).unwrap();
                assert_eq!(r.slack.to_bits(), slack.to_bits());
                r.instance = Some(rec.key.to_string());
                results.push(r);
            }
        }
    }
    for summary in tightness_report(&results).unwrap() {
        let agg = report.check(&summary.id).unwrap();
        assert_eq!(agg.pass_certified + agg.pass_uncertified + agg.violations + agg.diagnostics, summary.count);
        assert_eq!(agg.min_slack, Some(summary.min_slack), "{}", summary.id);
        assert_eq!(agg.median_slack, Some(summary.median_slack), "{}", summary.id);
        assert_eq!(agg.max_tightness, Some(summary.max_tightness), "{}", summary.id);
        assert_eq!(agg.argmin_instance, summary.argmin_instance, "{}", summary.id);
        assert_eq!(agg.argmin_relation.as_deref(), Some(summary.argmin_relation.as_str()), "{}", summary.id);
    }
}
