//! Acceptance criteria. Every test prints a single `[PASS]` or `[FAIL]`
//! line (straight to stdout, so it shows even when output is captured) and
//! then asserts. Tests share one lock so the timed campaign runs alone.

use std::io::Write;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiradius::campaign::{run_campaign, CampaignConfig, CampaignReport};
use semiradius::linalg::{c64, spectral_norm};
use semiradius::sampler::{derive_seed, sample_a_selfadjoint, sample_operator_in_ba, sample_space, SampleConfig};
use semiradius::{
    a_numerical_radius, crawford, crawford_number, mc_crawford_upper, mc_radius_lower, numerical_radius, op_seminorm,
    run_check, CheckOptions, ComplexMatrix, Enclosure, Layout, OperandBundle, RadiusOptions, SemiHilbertSpace,
    Tolerances,
};

static LOCK: Mutex<()> = Mutex::new(());
static MAIN: OnceLock<(CampaignReport, usize)> = OnceLock::new();

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn announce(n: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {n}: {name}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn main_config() -> CampaignConfig {
    CampaignConfig {
        dims: vec![2, 3, 4, 5, 6],
        ranks: None,
        trials: 1000,
        seed: 42,
        ..CampaignConfig::default()
    }
}

/// The main campaign, run once on all cores. Returns the report and the
/// thread count it used.
fn main_campaign() -> &'static (CampaignReport, usize) {
    MAIN.get_or_init(|| {
        let report = run_campaign(&main_config(), 0).expect("main campaign runs");
        let threads = report.runtime.threads;
        (report, threads)
    })
}

/// Random space of dimension 2..=6 and rank 0..=dim.
fn random_space(rng: &mut ChaCha8Rng) -> SemiHilbertSpace {
    let dim = rng.random_range(2..=6);
    let rank = rng.random_range(0..=dim);
    sample_space(&SampleConfig::new(dim, rank, rng.random())).expect("sampled space")
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise distance relative to the larger of the two sides (at least 1).
fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(1.0)
}

/// Largest distance between points of two enclosures.
fn spread(a: &Enclosure, b: &Enclosure) -> f64 {
    (a.hi - b.lo).abs().max((b.hi - a.lo).abs())
}

#[test]
fn criterion_1_theorem_suite() {
    let _g = serial();
    let (report, _) = main_campaign();
    let violations: usize = report.checks.iter().filter(|c| c.id != "C23").map(|c| c.violations).sum();
    let rate = report.totals.uncertified_rate;
    let wall = report.runtime.wall_time_s;
    let ok = violations == 0 && rate < 0.01 && wall < 300.0 && report.totals.trials == 20_000;
    announce(
        1,
        "theorem suite",
        ok,
        &format!(
            "{} trials, {violations} violation candidates in C1-C22, uncertified rate {:.4}%, {wall:.1}s on {} threads",
            report.totals.trials,
            100.0 * rate,
            report.runtime.threads
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_algebraic_identities() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 6];
    for _ in 0..10_000 {
        let space = random_space(&mut rng);
        let t = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let s = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let (tm, sm) = (t.matrix(), s.matrix());
        let ts_sharp = space.sharp(&t).unwrap();
        let ss_sharp = space.sharp(&s).unwrap();
        let p = space.range_projection();
        let a = space.a();

        // A T# = T* A
        worst[0] = worst[0].max(rel_diff(&(a * &ts_sharp), &(tm.adjoint() * a)));
        // (TS)# = S# T#
        let prod = space.register(tm * sm).unwrap();
        worst[1] = worst[1].max(rel_diff(&space.sharp(&prod).unwrap(), &(&ss_sharp * &ts_sharp)));
        // (T#)# = P T P
        let sharp_op = space.register(ts_sharp.clone()).unwrap();
        worst[2] = worst[2].max(rel_diff(&space.sharp(&sharp_op).unwrap(), &(p * tm * p)));
        // tilde(TS) = tilde(T) tilde(S), tilde(T + S) = tilde(T) + tilde(S)
        let tt = space.tilde(&t).unwrap();
        let st = space.tilde(&s).unwrap();
        worst[3] = worst[3].max(rel_diff(&space.tilde(&prod).unwrap(), &(&tt * &st)));
        let sum = space.register(tm + sm).unwrap();
        worst[4] = worst[4].max(rel_diff(&space.tilde(&sum).unwrap(), &(&tt + &st)));
        // tilde(T#) = tilde(T)*
        worst[5] = worst[5].max(rel_diff(&space.tilde(&sharp_op).unwrap(), &tt.adjoint()));
    }
    let ok = worst.iter().all(|&w| w <= 1e-10);
    announce(
        2,
        "algebraic identities",
        ok,
        &format!(
            "10000 instances, worst relative errors: A T#=T*A {:.1e}, (TS)#=S#T# {:.1e}, (T#)#=PTP {:.1e}, tilde(TS) {:.1e}, tilde(T+S) {:.1e}, tilde(T#) {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_equality_claims() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = CheckOptions::default();
    let (mut worst_c2, mut worst_c3) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let space = random_space(&mut rng);
        let h = sample_a_selfadjoint(&space, 1.0, rng.random()).unwrap();
        let t = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let bundle = OperandBundle::default()
            .with("H", h.into_matrix())
            .with("T", t.into_matrix());
        for (id, worst) in [("C2", &mut worst_c2), ("C3", &mut worst_c3)] {
            let r = run_check(&space, id, &bundle, &opts).unwrap();
            for rel in &r.relations {
                let scale = 1.0 + rel.lhs.hi.abs().max(rel.rhs.hi.abs());
                *worst = worst.max(spread(&rel.lhs, &rel.rhs) / scale);
            }
        }
    }
    let ok = worst_c2 <= 1e-8 && worst_c3 <= 1e-8;
    announce(
        3,
        "equality claims",
        ok,
        &format!("1000 instances each, worst relative disagreement C2 {worst_c2:.1e}, C3 {worst_c3:.1e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_4_functional_oracles() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = RadiusOptions::default();
    let mut failures = Vec::new();
    let (mut worst_gap, mut worst_closeness) = (0.0f64, 0.0f64);
    for k in 0..200 {
        let space = random_space(&mut rng);
        let t = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let norm = spectral_norm(&space.tilde(&t).unwrap());
        let w = a_numerical_radius(&space, &t, &opts).unwrap();
        let c = crawford(&space, &t, &opts).unwrap();
        let seed = rng.random();
        let w_mc = mc_radius_lower(&space, &t, 100_000, seed).unwrap();
        let c_mc = mc_crawford_upper(&space, &t, 100_000, seed).unwrap();
        let bound = 1e-8 * (1.0 + norm);
        worst_gap = worst_gap.max(w.gap().max(c.gap()) / (1.0 + norm));
        worst_closeness = worst_closeness.max(w.lo - w_mc);
        // The sampled values are attained, so they bound the true values
        // from the correct side and must lie on that side of the enclosure,
        // up to the rounding of the sampled evaluation itself.
        let rounding = 1e-12 * (1.0 + norm);
        if w_mc > w.hi + rounding || c_mc < c.lo - rounding || w.gap() > bound || c.gap() > bound {
            failures.push(format!("#{k}: w {w} vs {w_mc:e}, c {c} vs {c_mc:e}"));
        }
    }
    let ok = failures.is_empty();
    announce(
        4,
        "functional oracles",
        ok,
        &format!(
            "200 instances, {} inconsistent, worst gap {worst_gap:.1e}*(1+n(T)), largest lo - sampled radius {worst_closeness:.1e}{}",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_closed_forms() {
    let _g = serial();
    let opts = RadiusOptions::default();
    let r = |re: [[f64; 2]; 2]| ComplexMatrix::from_fn(2, 2, |i, j| c64(re[i][j], 0.0));
    let w = numerical_radius(&r([[0.0, 1.0], [0.0, 0.0]]), &opts).unwrap();
    let c = crawford_number(&r([[1.0, 1.0], [0.0, 1.0]]), &opts).unwrap();
    let space = SemiHilbertSpace::new(&r([[2.0, 0.0], [0.0, 0.0]]), Tolerances::default()).unwrap();
    let t = space.register(r([[1.0, 0.0], [5.0, 3.0]])).unwrap();
    let n_a = op_seminorm(&space, &t).unwrap();
    let w_a = a_numerical_radius(&space, &t, &opts).unwrap();
    let within = |e: &Enclosure, v: f64, tol: f64| (e.lo - v).abs() <= tol && (e.hi - v).abs() <= tol;
    let ok = within(&w, 0.5, 1e-9) && within(&c, 0.5, 1e-8) && within(&n_a, 1.0, 1e-9) && within(&w_a, 1.0, 1e-9);
    announce(
        5,
        "closed-form values",
        ok,
        &format!("w(nilpotent) {w}, c(Jordan) {c}, n_A(T) {n_a}, w_A(T) {w_a}"),
    );
    assert!(ok);
}

#[test]
fn criterion_6_block_lemma() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = CheckOptions::default();
    let (mut worst_lemma, mut worst_block) = (0.0f64, 0.0f64);
    let mut lemma_ok = true;
    for _ in 0..500 {
        let space = random_space(&mut rng);
        let t = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let s = sample_operator_in_ba(&space, 1.0, rng.random()).unwrap();
        let bundle = OperandBundle::default()
            .with("T", t.matrix().clone())
            .with("S", s.matrix().clone());
        let r = run_check(&space, "C7", &bundle, &opts).unwrap();
        for rel in &r.relations {
            let scale = 1.0 + rel.lhs.hi.abs().max(rel.rhs.hi.abs());
            let excess = spread(&rel.lhs, &rel.rhs) - rel.lhs.gap() - rel.rhs.gap();
            worst_lemma = worst_lemma.max(excess / scale);
            lemma_ok &= excess <= 1e-9 * scale;
        }

        // antidiag(T1, T2) gives a block-diagonal T#T + TT#.
        let doubled = space.double();
        let anti = doubled.block2(&t, &s, Layout::Antidiagonal).unwrap();
        let anti_sharp = doubled.sharp(&anti).unwrap();
        let lhs = &anti_sharp * anti.matrix() + anti.matrix() * &anti_sharp;
        let t_sharp = space.sharp(&t).unwrap();
        let s_sharp = space.sharp(&s).unwrap();
        let top = space.register(t.matrix() * &t_sharp + &s_sharp * s.matrix()).unwrap();
        let bottom = space.register(&t_sharp * t.matrix() + s.matrix() * &s_sharp).unwrap();
        let rhs = doubled.block2(&top, &bottom, Layout::Diagonal).unwrap();
        worst_block = worst_block.max(rel_diff(&lhs, rhs.matrix()));
    }
    let ok = lemma_ok && worst_block <= 1e-10;
    announce(
        6,
        "block lemma",
        ok,
        &format!(
            "500 pairs, worst excess over gaps {worst_lemma:.1e}*scale, worst block-diagonal deviation {worst_block:.1e}*scale"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_dominance() {
    let _g = serial();
    let (report, _) = main_campaign();
    let trials = report.totals.trials;
    let every = report.dominance.len() == 2 && report.dominance.iter().all(|d| d.trials == trials);
    let failures: usize = report.dominance.iter().map(|d| d.failures).sum();
    let ok = every && failures == 0;
    let detail = report
        .dominance
        .iter()
        .map(|d| format!("{}: {}/{} hold, min margin {:.2e}", d.name, d.holds, d.trials, d.min_margin.unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join("; ");
    announce(7, "dominance relations", ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_8_determinism() {
    let _g = serial();
    let (first, first_threads) = main_campaign();
    let threads = if *first_threads == 1 { 2 } else { 1 };
    let second = run_campaign(&main_config(), threads).unwrap();
    let same = first.payload_json() == second.payload_json();
    announce(
        8,
        "determinism",
        same,
        &format!(
            "payload {} bytes, {} threads vs {} threads: {}",
            first.payload_json().len(),
            first_threads,
            threads,
            if same { "byte-identical" } else { "different" }
        ),
    );
    assert!(same);
}

#[test]
fn trial_seeds_do_not_depend_on_scheduling() {
    let config = main_config();
    let key = semiradius::campaign::TrialKey { dim: 3, rank: 2, trial: 7 };
    assert_eq!(config.trial_seed(key), derive_seed(42, &[3, 2, 7]));
}
