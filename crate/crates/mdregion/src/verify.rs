//! Seeded randomized verification suites: generators for instances,
//! channels, and ladders, plus independent oracles (dense grid search,
//! Schur-complement conditioning, vanishing-ladder extrapolation) for the
//! headline properties. The command-line `verify` subcommand and the
//! acceptance battery both run these.

use crate::bound::{
    bound_objective, loose_central_bound, maximize_bound, AuxiliaryLadder, OptimizerOptions,
};
use crate::channel::TestChannel;
use crate::epi::{
    congruence_residual, epi_lhs_gaussian, epi_rhs, equality_covariance, verify_epi, EpiInstance,
};
use crate::error::{Error, Result};
use crate::linalg::{
    inversion_identity_residual, kron, loewner_less, ordering_consequences_hold, Matrix, SpdMatrix,
};
use crate::optim::golden_section_max;
use crate::problem::{group_weights, ProblemInstance, WeightProfile};
use crate::scalar::{
    chain_solve, f_objective, induced_ladder, kkt_residual, solve, ChainEval, ScalarInstance,
    ScalarLadder, ScalarSolution, Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of a single suite: a check counter, a failure counter, the
/// first failure's description, and non-fatal observations.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    /// Diagnostics that are reported but do not fail the suite.
    pub flags: Vec<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        SuiteOutcome {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
            flags: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    fn fail(&mut self, detail: String) {
        self.check(false, || detail);
    }

    /// Unwraps a fallible step, converting an error into a failed check.
    fn ok_or<T>(&mut self, r: Result<T>, what: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(format!("{what}: {e}"));
                None
            }
        }
    }

    fn flag(&mut self, note: String) {
        self.flags.push(note);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// One human-readable block for reports.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "{:<26} {} ({} checks",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases
        );
        if self.failures > 0 {
            s.push_str(&format!(", {} failed", self.failures));
        }
        s.push(')');
        if let Some(f) = &self.first_failure {
            s.push_str(&format!("\n    first failure: {f}"));
        }
        for note in &self.flags {
            s.push_str(&format!("\n    note: {note}"));
        }
        s
    }
}

fn spd1(x: f64) -> SpdMatrix<f64> {
    SpdMatrix::from_rows(&[vec![x]]).expect("1x1 matrix")
}

/// Random symmetric positive-definite matrix with moderate conditioning:
/// a Gram matrix plus a ridge an order of magnitude below the scale.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SpdMatrix<f64> {
    let mut g = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            g.set(r, c, rng.gen_range(-1.0..1.0));
        }
    }
    let gram = SpdMatrix::from_matrix(&g.matmul(&g.transpose()).expect("square product"))
        .expect("gram matrix");
    gram.scale(scale / n as f64).add_scaled_identity(0.1 * scale)
}

/// Strictly decreasing weights with comfortable gaps, in random
/// description order so sorting and permutation logic stay exercised.
pub fn strict_weights(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    let mut beta = Vec::with_capacity(l);
    let mut b = rng.gen_range(0.3..0.8);
    for _ in 0..l {
        beta.push(b);
        b += rng.gen_range(0.08..0.7);
    }
    for i in (1..l).rev() {
        let j = rng.gen_range(0..=i);
        beta.swap(i, j);
    }
    beta
}

/// Weights drawn from a small palette, so ties (and hence nontrivial
/// group multiplicities) appear regularly.
pub fn mixed_weights(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    let palette = [1.0, 1.5, 2.0, 3.0];
    (0..l)
        .map(|_| palette[rng.gen_range(0..palette.len())])
        .collect()
}

/// One solved random scalar problem, kept together with everything the
/// suites need to re-derive it.
#[derive(Debug, Clone)]
pub struct ScalarSample {
    pub instance: ProblemInstance<f64>,
    pub profile: WeightProfile<f64>,
    pub scalar: ScalarInstance<f64>,
    pub solution: ScalarSolution<f64>,
}

/// Rejection-samples a scalar problem until the solver lands in the
/// requested scenario (any scenario when `want` is `None`).
pub fn sample_scalar(
    rng: &mut ChaCha8Rng,
    l: usize,
    want: Option<Scenario>,
    strict: bool,
) -> Result<ScalarSample> {
    for _ in 0..2000 {
        let vx = rng.gen_range(0.5..2.0);
        let beta = if strict {
            strict_weights(rng, l)
        } else {
            mixed_weights(rng, l)
        };
        let profile = group_weights(&beta)?;
        let mut d_sorted: Vec<f64> = (0..l).map(|_| vx * rng.gen_range(0.15..0.7)).collect();
        if want == Some(Scenario::Enhanced) {
            d_sorted[l - 1] = vx * rng.gen_range(0.88..0.97);
        }
        let inv_sum: f64 = d_sorted.iter().map(|d| 1.0 / d).sum();
        let d0_loose = 1.0 / (inv_sum - (l as f64 - 1.0) / vx);
        let d0 = match want {
            Some(Scenario::LooseCentral) => {
                let d_min = d_sorted.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = 0.999 * d_min;
                if hi <= d0_loose {
                    continue;
                }
                d0_loose + rng.gen_range(0.02..0.95) * (hi - d0_loose)
            }
            Some(Scenario::Enhanced) => rng.gen_range(0.15..0.55) * d0_loose,
            _ => rng.gen_range(0.35..0.97) * d0_loose,
        };
        let mut d_orig = vec![0.0; l];
        for (pos, &orig) in profile.permutation().iter().enumerate() {
            d_orig[orig] = d_sorted[pos];
        }
        let instance = match ProblemInstance::new(
            spd1(vx),
            spd1(d0),
            d_orig.iter().map(|&x| spd1(x)).collect(),
        ) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let scalar = ScalarInstance::from_problem(&instance, &profile)?;
        let solution = match solve(&scalar, &profile) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if let Some(w) = want {
            if solution.scenario != w {
                continue;
            }
        }
        return Ok(ScalarSample {
            instance,
            profile,
            scalar,
            solution,
        });
    }
    Err(Error::DomainError {
        what: "scenario sampler exhausted its attempts".to_string(),
    })
}

/// Interior-scenario batch with strict weights, description counts
/// cycling through 2..=5. Deterministic per seed.
pub fn interior_batch(seed: u64, cases: usize) -> Result<Vec<ScalarSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|i| sample_scalar(&mut rng, 2 + i % 4, Some(Scenario::Interior), true))
        .collect()
}

/// Loose-central batch with palette weights (ties included).
pub fn loose_batch(seed: u64, cases: usize) -> Result<Vec<ScalarSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..cases)
        .map(|i| sample_scalar(&mut rng, 2 + i % 4, Some(Scenario::LooseCentral), false))
        .collect()
}

/// Enhanced-scenario batch with strict weights.
pub fn enhanced_batch(seed: u64, cases: usize) -> Result<Vec<ScalarSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
    (0..cases)
        .map(|i| sample_scalar(&mut rng, 2 + i % 3, Some(Scenario::Enhanced), true))
        .collect()
}

/// Random feasible channel for the profile: random per-description noise
/// plus either zero correlations or a shared correlation direction with
/// increasing weighted multiples, shrunk until the expanded covariance
/// accepts it.
pub fn random_channel(
    rng: &mut ChaCha8Rng,
    profile: &WeightProfile<f64>,
    n: usize,
    scale: f64,
) -> Result<TestChannel<f64>> {
    let l = profile.descriptions();
    let j_count = profile.group_count();
    let noise: Vec<SpdMatrix<f64>> = (0..l)
        .map(|_| {
            let s = scale * rng.gen_range(0.4..1.6);
            random_spd(rng, n, s)
        })
        .collect();
    if rng.gen_bool(0.3) {
        return TestChannel::new(
            noise,
            vec![SpdMatrix::zeros(n); j_count],
            profile.clone(),
        );
    }
    let base_scale = scale * rng.gen_range(0.1..0.5);
    let base = random_spd(rng, n, base_scale);
    let mut t = Vec::with_capacity(j_count);
    let mut acc = rng.gen_range(0.05..0.4);
    for _ in 0..j_count {
        t.push(acc);
        acc += rng.gen_range(0.05..0.6);
    }
    for _ in 0..48 {
        let corr: Vec<SpdMatrix<f64>> = t
            .iter()
            .zip(1..)
            .map(|(&tj, j)| base.scale(tj / profile.group_weight(j)))
            .collect();
        match TestChannel::new(noise.clone(), corr, profile.clone()) {
            Ok(c) => return Ok(c),
            Err(_) => {
                for tj in &mut t {
                    *tj *= 0.5;
                }
            }
        }
    }
    TestChannel::new(
        noise,
        vec![SpdMatrix::zeros(n); j_count],
        profile.clone(),
    )
}

/// Random feasible ladder: accumulated Gram matrices divided by the group
/// weights, which makes the weighted chain strictly increasing.
pub fn random_ladder(
    rng: &mut ChaCha8Rng,
    profile: &WeightProfile<f64>,
    n: usize,
    scale: f64,
) -> Result<AuxiliaryLadder<f64>> {
    let mut running = SpdMatrix::zeros(n);
    let mut covs = Vec::with_capacity(profile.group_count());
    for j in 1..=profile.group_count() {
        let g_scale = scale * 10f64.powf(rng.gen_range(-1.0..0.6));
        running = running.add(&random_spd(rng, n, g_scale))?;
        covs.push(running.scale(1.0 / profile.group_weight(j)));
    }
    AuxiliaryLadder::new(covs, profile)
}

fn meets_constraints(
    ch: &TestChannel<f64>,
    inst: &ProblemInstance<f64>,
    profile: &WeightProfile<f64>,
) -> Result<bool> {
    let kx = inst.source_cov();
    let l = inst.descriptions();
    for pos in 0..l {
        let d = ch.received_distortion(kx, &[pos])?;
        let orig = profile.permutation()[pos];
        if inst.side_distortion(orig).sub(&d)?.min_eigenvalue() < -1e-12 {
            return Ok(false);
        }
    }
    let all: Vec<usize> = (0..l).collect();
    let d0 = ch.received_distortion(kx, &all)?;
    Ok(inst.central_distortion().sub(&d0)?.min_eigenvalue() >= -1e-12)
}

/// Random channel scaled down until it meets the instance's distortion
/// constraints, so its vertex rates lie in the rate region.
pub fn constrained_channel(
    rng: &mut ChaCha8Rng,
    inst: &ProblemInstance<f64>,
    profile: &WeightProfile<f64>,
) -> Result<TestChannel<f64>> {
    let n = inst.dim();
    let ch = random_channel(rng, profile, n, inst.source_cov().trace() / n as f64)?;
    let mut t = 1.0;
    for _ in 0..70 {
        let scaled = TestChannel::new(
            ch.noise_covariances().iter().map(|k| k.scale(t)).collect(),
            ch.correlations().iter().map(|a| a.scale(t)).collect(),
            profile.clone(),
        );
        if let Ok(c) = scaled {
            if meets_constraints(&c, inst, profile)? {
                return Ok(c);
            }
        }
        t *= 0.5;
    }
    Err(Error::DomainError {
        what: "could not scale a channel into the constraint set".to_string(),
    })
}

/// Identity checks on the matrix kernel: inversion, factorization,
/// eigenvalue reconstruction, Kronecker structure, and the consequences
/// of the ordering.
pub fn suite_linalg(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("linalg-identities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..40 {
        let n = 1 + case % 6;
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let a = random_spd(&mut rng, n, scale);

        if let Some(inv) = out.ok_or(a.inverse(), "inversion") {
            let prod = inv
                .as_matrix()
                .matmul(a.as_matrix())
                .expect("square product");
            let resid = prod
                .max_abs_diff(&Matrix::identity(n))
                .expect("same shape");
            out.check(resid < 1e-8, || {
                format!("inverse identity residual {resid:.3e} at dim {n}")
            });
        }

        let (vals, vecs) = a.eigen_decomposition();
        let mut rebuilt = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for (k, &lam) in vals.iter().enumerate() {
                    s += vecs.get(r, k) * lam * vecs.get(c, k);
                }
                rebuilt.set(r, c, s);
            }
        }
        let eig_resid = rebuilt.max_abs_diff(a.as_matrix()).expect("same shape")
            / (1.0 + a.as_matrix().max_abs());
        out.check(eig_resid < 1e-10, || {
            format!("eigen reconstruction residual {eig_resid:.3e} at dim {n}")
        });

        if let Some(chol) = out.ok_or(a.cholesky(), "factorization") {
            let white = chol.whiten(&a).expect("own whitening");
            let resid = white
                .as_matrix()
                .max_abs_diff(&Matrix::identity(n))
                .expect("same shape");
            out.check(resid < 1e-9, || {
                format!("self-whitening residual {resid:.3e} at dim {n}")
            });
        }

        let b = random_spd(&mut rng, n, scale);
        let larger = a.add(&b).expect("same dim");
        match ordering_consequences_hold(&larger, &a) {
            Ok(ok) => out.check(ok, || format!("ordering consequences failed at dim {n}")),
            Err(e) => out.fail(format!("ordering consequences: {e}")),
        }
        out.check(
            loewner_less(&a, &larger, 0.0).unwrap_or(false),
            || format!("strict ordering of a sum failed at dim {n}"),
        );

        if n <= 3 {
            let c = random_spd(&mut rng, 2, 1.0);
            let kr = kron(a.as_matrix(), c.as_matrix());
            let tr: f64 = (0..2 * n).map(|i| kr.get(i, i)).sum();
            out.check((tr - a.trace() * c.trace()).abs() < 1e-9 * (1.0 + tr.abs()), || {
                format!("kronecker trace mismatch at dim {n}")
            });
            let mut cmat = Matrix::zeros(n, 2);
            let mut dmat = Matrix::zeros(2, n);
            for r in 0..n {
                for q in 0..2 {
                    cmat.set(r, q, rng.gen_range(-1.0..1.0));
                    dmat.set(q, r, rng.gen_range(-1.0..1.0));
                }
            }
            match inversion_identity_residual(&a, &c, &cmat, &dmat) {
                Ok(resid) => out.check(resid < 1e-8, || {
                    format!("rank-modification identity residual {resid:.3e}")
                }),
                Err(e) => out.fail(format!("rank-modification identity: {e}")),
            }
        }
    }
    out
}

/// The hand-solved two-description instance: unit variance, side ceilings
/// one half, central ceiling one sixth, equal weights.
pub fn suite_closed_form() -> SuiteOutcome {
    let mut out = SuiteOutcome::new("closed-form-instance");
    let instance = ProblemInstance::new(spd1(1.0), spd1(1.0 / 6.0), vec![spd1(0.5), spd1(0.5)])
        .expect("valid instance");
    let profile = group_weights(&[1.0, 1.0]).expect("valid weights");
    let scalar = ScalarInstance::from_problem(&instance, &profile).expect("scalar extraction");
    match solve(&scalar, &profile) {
        Ok(sol) => {
            let sig = sol.ladder.sigma2[0];
            out.check((sig - 0.6).abs() < 1e-10, || {
                format!("leading correlation {sig} is not 0.6 within 1e-10")
            });
            let target = 0.5 * 6.25f64.ln();
            out.check((sol.value - target).abs() < 1e-9, || {
                format!("sum rate {} is not {} within 1e-9", sol.value, target)
            });
            out.check(sol.scenario == Scenario::Interior, || {
                format!("scenario {:?} instead of interior", sol.scenario)
            });
        }
        Err(e) => out.fail(format!("solver error: {e}")),
    }
    out
}

/// Exactness of the scalar pipeline: on interior instances the certifying
/// ladder reproduces the achieved weighted rate, and the cone maximizer
/// independently reaches the same value.
pub fn suite_scalar_tightness(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("scalar-tightness");
    let batch = match interior_batch(seed, 100) {
        Ok(b) => b,
        Err(e) => {
            out.fail(format!("sampling: {e}"));
            return out;
        }
    };
    for (i, s) in batch.iter().enumerate() {
        let ws = match out.ok_or(
            s.profile.weighted_sum(s.solution.rates.rates()),
            "weighted sum",
        ) {
            Some(v) => v,
            None => continue,
        };
        let ladder = match out.ok_or(induced_ladder(&s.solution), "certifying ladder") {
            Some(l) => l,
            None => continue,
        };
        let bo = match out.ok_or(
            bound_objective(&s.instance, &s.profile, &ladder),
            "bound at the certifying ladder",
        ) {
            Some(v) => v,
            None => continue,
        };
        out.check((ws - bo).abs() < 1e-6, || {
            format!(
                "case {i}: achieved weighted sum {ws} vs certified bound {bo} (gap {:.3e})",
                (ws - bo).abs()
            )
        });
        let opts = OptimizerOptions {
            seed: seed ^ (i as u64).wrapping_mul(0x9e3779b9),
            ..OptimizerOptions::default()
        };
        match maximize_bound(&s.instance, &s.profile, &opts) {
            Ok(res) => out.check((s.solution.value - res.value).abs() < 1e-5, || {
                format!(
                    "case {i}: solver value {} vs maximized bound {} (gap {:.3e})",
                    s.solution.value,
                    res.value,
                    (s.solution.value - res.value).abs()
                )
            }),
            Err(e) => out.fail(format!("case {i}: maximizer error: {e}")),
        }
    }
    out
}

/// The loose-central corner: the solved value collapses to the weighted
/// minimum single-description rates, and the corner's central distortion
/// stays below the ceiling.
pub fn suite_loose_central(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("loose-central-corner");
    let batch = match loose_batch(seed, 20) {
        Ok(b) => b,
        Err(e) => {
            out.fail(format!("sampling: {e}"));
            return out;
        }
    };
    for (i, s) in batch.iter().enumerate() {
        let loose = match out.ok_or(
            loose_central_bound(&s.instance, &s.profile),
            "loose-central value",
        ) {
            Some(v) => v,
            None => continue,
        };
        out.check((s.solution.value - loose).abs() < 1e-9, || {
            format!(
                "case {i}: solver value {} differs from weighted single rates {}",
                s.solution.value, loose
            )
        });
        let inv_sum: f64 = s.scalar.d.iter().map(|d| 1.0 / d).sum();
        let corner = 1.0 / (inv_sum - (s.scalar.d.len() as f64 - 1.0) / s.scalar.var_x);
        out.check(
            (corner - s.scalar.loose_central_distortion()).abs() < 1e-12 * corner.abs(),
            || format!("case {i}: corner distortion disagrees with the harmonic form"),
        );
        out.check(corner <= s.scalar.d0, || {
            format!(
                "case {i}: corner central distortion {corner} exceeds the ceiling {}",
                s.scalar.d0
            )
        });
        if i < 5 {
            let opts = OptimizerOptions {
                seed: seed.wrapping_add(i as u64),
                ..OptimizerOptions::default()
            };
            match maximize_bound(&s.instance, &s.profile, &opts) {
                Ok(res) => out.check((res.value - loose).abs() < 1e-7, || {
                    format!(
                        "case {i}: maximizer {} missed the vanishing-ladder value {}",
                        res.value, loose
                    )
                }),
                Err(e) => out.fail(format!("case {i}: maximizer error: {e}")),
            }
        }
    }
    out
}

fn single_group_grid_best(
    inst: &ProblemInstance<f64>,
    profile: &WeightProfile<f64>,
) -> Result<f64> {
    let n = inst.dim();
    let mut eval = |t: f64| -> f64 {
        let cov = SpdMatrix::scaled_identity(n, t.exp());
        AuxiliaryLadder::new(vec![cov], profile)
            .and_then(|lad| bound_objective(inst, profile, &lad))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let lo = (1e-6f64).ln();
    let hi = (1e6f64).ln();
    let points = 2001;
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_t = lo;
    let mut best = f64::NEG_INFINITY;
    for i in 0..points {
        let t = lo + step * i as f64;
        let v = eval(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let (_, refined) = golden_section_max(
        &mut eval,
        (best_t - step).max(lo),
        (best_t + step).min(hi),
        150,
    );
    Ok(best.max(refined))
}

/// Single-group oracle: the cone maximizer must agree with a dense
/// log-grid plus golden-section refinement over isotropic ladders, on
/// scalar and isotropic vector instances.
pub fn suite_single_group_grid(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("single-group-grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1357_9bdf_2468_ace0);
    for case in 0..20 {
        let n = if case < 10 { 1 } else { 2 + case % 2 };
        let l = 2 + case % 3;
        let c = rng.gen_range(0.5..2.0);
        let d: Vec<f64> = (0..l).map(|_| c * rng.gen_range(0.2..0.7)).collect();
        let inv_sum: f64 = d.iter().map(|x| 1.0 / x).sum();
        let d0_loose = 1.0 / (inv_sum - (l as f64 - 1.0) / c);
        let d0 = rng.gen_range(0.3..0.97) * d0_loose;
        let instance = match ProblemInstance::new(
            SpdMatrix::scaled_identity(n, c),
            SpdMatrix::scaled_identity(n, d0),
            d.iter()
                .map(|&x| SpdMatrix::scaled_identity(n, x))
                .collect(),
        ) {
            Ok(i) => i,
            Err(e) => {
                out.fail(format!("case {case}: instance rejected: {e}"));
                continue;
            }
        };
        let profile = group_weights(&vec![1.0; l]).expect("equal weights");
        let grid = match out.ok_or(
            single_group_grid_best(&instance, &profile),
            "grid search",
        ) {
            Some(v) => v,
            None => continue,
        };
        let opts = OptimizerOptions {
            seed: seed.wrapping_add(case as u64),
            ..OptimizerOptions::default()
        };
        match maximize_bound(&instance, &profile, &opts) {
            Ok(res) => out.check((res.value - grid).abs() < 1e-4, || {
                format!(
                    "case {case}: maximizer {} vs grid oracle {} (dim {n}, {l} descriptions)",
                    res.value, grid
                )
            }),
            Err(e) => out.fail(format!("case {case}: maximizer error: {e}")),
        }
    }
    out
}

fn random_epi_instance(rng: &mut ChaCha8Rng, at_equality: bool) -> Result<EpiInstance<f64>> {
    let n = 1 + rng.gen_range(0..3);
    let mu2 = rng.gen_range(0.2..2.0);
    let mu1 = mu2 * rng.gen_range(1.05..3.0);
    let s1 = rng.gen_range(0.3..2.0);
    let n1 = random_spd(rng, n, s1);
    let inflate = mu1 / mu2 * (1.0 + rng.gen_range(0.05..1.0));
    let s2 = rng.gen_range(0.05..1.0);
    let n2 = n1.scale(inflate).add(&random_spd(rng, n, s2))?;
    let b = if at_equality {
        equality_covariance(mu1, mu2, &n1, &n2)?
    } else {
        let sb = rng.gen_range(0.1..3.0);
        random_spd(rng, n, sb)
    };
    EpiInstance::new(mu1, mu2, n1, n2, b, 1)
}

/// The weighted-entropy inequality in the Gaussian regime: nonnegative
/// gap over a randomized sweep, vanishing gap at the equality covariance,
/// the frozen scalar oracle, block-repetition linearity, and the
/// diagonalizing-congruence transcription check.
pub fn suite_entropy_inequality(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("entropy-inequality");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed_f00d_dead_beef);

    let frozen = EpiInstance::new(2.0, 1.0, spd1(1.0), spd1(3.0), spd1(3.0), 1)
        .expect("frozen instance");
    let target = 0.5 * (9.0f64 / 8.0).ln();
    match (epi_lhs_gaussian(&frozen), epi_rhs(&frozen)) {
        (Ok(lhs), Ok(rhs)) => {
            out.check((lhs - target).abs() < 1e-12, || {
                format!("frozen left side {lhs} vs {target}")
            });
            out.check((rhs - target).abs() < 1e-12, || {
                format!("frozen right side {rhs} vs {target}")
            });
        }
        _ => out.fail("frozen instance evaluation errored".to_string()),
    }

    let mut min_gap = f64::INFINITY;
    for case in 0..500 {
        let want_eq = case % 10 == 9;
        let inst = match random_epi_instance(&mut rng, want_eq) {
            Ok(i) => i,
            Err(e) => {
                out.fail(format!("case {case}: generation failed: {e}"));
                continue;
            }
        };
        match verify_epi(&inst) {
            Ok(v) => {
                min_gap = min_gap.min(v.gap);
                out.check(v.gap >= -1e-9, || {
                    format!("case {case}: negative gap {}", v.gap)
                });
                if want_eq {
                    out.check(v.at_equality && v.gap.abs() < 1e-9, || {
                        format!(
                            "case {case}: equality covariance missed (gap {}, flag {})",
                            v.gap, v.at_equality
                        )
                    });
                }
            }
            Err(e) => out.fail(format!("case {case}: verdict error: {e}")),
        }
        if case % 25 == 0 {
            match congruence_residual(&inst) {
                Ok(r) => out.check(r < 1e-9, || {
                    format!("case {case}: congruence residual {r:.3e}")
                }),
                Err(e) => out.fail(format!("case {case}: congruence check: {e}")),
            }
        }
    }
    out.flag(format!("smallest gap seen {min_gap:.3e}"));

    // block-repetition linearity
    let base = verify_epi(&EpiInstance::new(2.0, 1.0, spd1(1.0), spd1(3.0), spd1(1.7), 1).unwrap())
        .expect("base verdict");
    for reps in 2..=3 {
        let inst = EpiInstance::new(2.0, 1.0, spd1(1.0), spd1(3.0), spd1(1.7), reps).unwrap();
        match verify_epi(&inst) {
            Ok(v) => out.check((v.gap - reps as f64 * base.gap).abs() < 1e-12, || {
                format!("repetition count {reps} does not scale the gap linearly")
            }),
            Err(e) => out.fail(format!("repetition {reps}: {e}")),
        }
    }

    // the scalar gap is uniquely minimized at the equality covariance
    let (argmax, _) = golden_section_max(
        &mut |b: f64| {
            EpiInstance::new(2.0, 1.0, spd1(1.0), spd1(3.0), spd1(b), 1)
                .and_then(|i| epi_lhs_gaussian(&i))
                .unwrap_or(f64::NEG_INFINITY)
        },
        0.01,
        50.0,
        200,
    );
    out.check((argmax - 3.0).abs() < 1e-6, || {
        format!("scalar equality search found {argmax} instead of 3")
    });
    out
}

/// Monotone structure of the forward chain: along a grid of leading
/// correlation values, prefix joint noises fall strictly, later
/// correlations rise strictly, the weighted correlation chain stays
/// ordered, and the small-correlation limits hold.
pub fn suite_chain_monotonicity(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("chain-monotonicity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0f0f_0f0f_1234_5678);
    for case in 0..20 {
        let l = 3 + case % 3;
        let s = match sample_scalar(&mut rng, l, Some(Scenario::Interior), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("case {case}: sampling: {e}"));
                continue;
            }
        };
        let j_count = s.profile.group_count();
        let top = s.solution.ladder.sigma2[0] * 0.999;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        for g in 1..=50 {
            let sig1 = top * g as f64 / 50.0;
            let point = match chain_solve(&s.scalar, &s.profile, sig1) {
                ChainEval::Feasible(p) => p,
                ChainEval::Infeasible { stage } => {
                    out.fail(format!(
                        "case {case}: grid point {g} infeasible at stage {stage}"
                    ));
                    continue;
                }
            };
            for j in 0..j_count.saturating_sub(1) {
                let lhs = s.profile.group_weight(j + 1) * point.sigma2[j];
                let rhs = s.profile.group_weight(j + 2) * point.sigma2[j + 1];
                out.check(rhs > lhs, || {
                    format!(
                        "case {case}: weighted correlation chain broken at group {} (grid {g})",
                        j + 1
                    )
                });
            }
            if let Some((ps, pu)) = &prev {
                for j in 1..j_count {
                    out.check(point.sigma2[j] > ps[j], || {
                        format!(
                            "case {case}: correlation {} not strictly increasing at grid {g}",
                            j + 1
                        )
                    });
                }
                for j in 0..j_count {
                    out.check(point.uk[j] < pu[j], || {
                        format!(
                            "case {case}: prefix noise {} not strictly decreasing at grid {g}",
                            j + 1
                        )
                    });
                }
            }
            prev = Some((point.sigma2, point.uk));
        }
        // limits at a vanishing leading correlation
        match chain_solve(&s.scalar, &s.profile, 1e-8) {
            ChainEval::Feasible(p) => {
                let uk_w = *p.uk.last().expect("nonempty chain");
                out.check(
                    (uk_w - s.scalar.k_up).abs() < 1e-6 * s.scalar.k_up,
                    || {
                        format!(
                            "case {case}: joint noise {} does not approach the uncorrelated value {}",
                            uk_w, s.scalar.k_up
                        )
                    },
                );
                let mut spread: f64 = 0.0;
                for j in 1..j_count {
                    spread = spread.max((p.sigma2[j] - p.sigma2[j - 1]).abs());
                }
                out.check(spread < 1e-6, || {
                    format!("case {case}: correlations spread {spread:.3e} near zero")
                });
            }
            ChainEval::Infeasible { stage } => out.fail(format!(
                "case {case}: vanishing correlation infeasible at stage {stage}"
            )),
        }
    }
    out
}

/// Every solver-constructed channel (the same instance streams the
/// tightness, loose-central, and enhancement suites consume, plus the
/// closed-form instance) satisfies the layered fixed-point equations and
/// has a positive-definite expanded covariance.
pub fn suite_channel_fixed_point(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("channel-fixed-point");
    let mut samples: Vec<ScalarSample> = Vec::new();
    match interior_batch(seed, 100) {
        Ok(mut b) => samples.append(&mut b),
        Err(e) => out.fail(format!("interior sampling: {e}")),
    }
    match loose_batch(seed, 20) {
        Ok(mut b) => samples.append(&mut b),
        Err(e) => out.fail(format!("loose sampling: {e}")),
    }
    match enhanced_batch(seed, 20) {
        Ok(mut b) => samples.append(&mut b),
        Err(e) => out.fail(format!("enhanced sampling: {e}")),
    }
    let closed = ProblemInstance::new(spd1(1.0), spd1(1.0 / 6.0), vec![spd1(0.5), spd1(0.5)])
        .expect("valid instance");
    let profile = group_weights(&[1.0, 1.0]).expect("valid weights");
    let scalar = ScalarInstance::from_problem(&closed, &profile).expect("scalar extraction");
    match solve(&scalar, &profile) {
        Ok(solution) => samples.push(ScalarSample {
            instance: closed,
            profile,
            scalar,
            solution,
        }),
        Err(e) => out.fail(format!("closed-form solve: {e}")),
    }

    for (i, s) in samples.iter().enumerate() {
        match s.solution.channel.fixedpoint_residual() {
            Ok(r) => out.check(r < 1e-9, || {
                format!(
                    "sample {i} ({}): fixed-point residual {r:.3e}",
                    s.solution.scenario.label()
                )
            }),
            Err(e) => out.fail(format!("sample {i}: residual: {e}")),
        }
        out.check(
            s.solution.channel.full_covariance().is_positive_definite(),
            || format!("sample {i}: expanded covariance is not positive definite"),
        );
    }
    out
}

/// Conditional-covariance oracle: the fixed-point distortion of every
/// description subset equals the Schur complement of the explicit joint
/// covariance of source and observations.
pub fn suite_mmse_schur(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("mmse-schur-oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd_ef01_2345_6789);
    for case in 0..200 {
        let l = 2 + case % 3;
        let n = 1 + case % 3;
        let beta = if rng.gen_bool(0.5) {
            strict_weights(&mut rng, l)
        } else {
            mixed_weights(&mut rng, l)
        };
        let profile = match group_weights(&beta) {
            Ok(p) => p,
            Err(e) => {
                out.fail(format!("case {case}: weights: {e}"));
                continue;
            }
        };
        let kx_scale = rng.gen_range(0.5..2.0);
        let kx = random_spd(&mut rng, n, kx_scale);
        let ch = match random_channel(&mut rng, &profile, n, 1.0) {
            Ok(c) => c,
            Err(e) => {
                out.fail(format!("case {case}: channel: {e}"));
                continue;
            }
        };
        let full = ch.full_covariance();
        for mask in 1u32..(1 << l) {
            let subset: Vec<usize> = (0..l).filter(|i| mask & (1 << i) != 0).collect();
            let m = subset.len();
            let mut joint = Matrix::zeros(m * n, m * n);
            for (ai, &a) in subset.iter().enumerate() {
                for (bi, &b) in subset.iter().enumerate() {
                    for r in 0..n {
                        for c in 0..n {
                            joint.set(
                                ai * n + r,
                                bi * n + c,
                                kx.get(r, c) + full.get(a * n + r, b * n + c),
                            );
                        }
                    }
                }
            }
            let mut cross = Matrix::zeros(n, m * n);
            for bi in 0..m {
                for r in 0..n {
                    for c in 0..n {
                        cross.set(r, bi * n + c, kx.get(r, c));
                    }
                }
            }
            let schur = joint
                .lu()
                .and_then(|lu| lu.solve_mat(&cross.transpose()))
                .and_then(|sol| cross.matmul(&sol))
                .and_then(|proj| kx.as_matrix().sub(&proj));
            let schur = match out.ok_or(schur, "conditioning") {
                Some(sm) => sm,
                None => continue,
            };
            match ch.received_distortion(&kx, &subset) {
                Ok(d) => {
                    let resid = d
                        .as_matrix()
                        .max_abs_diff(&schur)
                        .expect("same shape");
                    out.check(resid < 1e-10, || {
                        format!(
                            "case {case}: subset {subset:?} disagreement {resid:.3e} (dim {n})"
                        )
                    });
                }
                Err(e) => out.fail(format!("case {case}: distortion: {e}")),
            }
        }
    }
    out
}

/// Enhancement invariance: a loose ceiling on the least-weighted
/// description never changes the solution value, the enhanced noise never
/// exceeds the original, and the multiplier stays nonnegative.
pub fn suite_enhancement(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("enhancement-invariance");
    let batch = match enhanced_batch(seed, 20) {
        Ok(b) => b,
        Err(e) => {
            out.fail(format!("sampling: {e}"));
            return out;
        }
    };
    for (i, s) in batch.iter().enumerate() {
        let l = s.scalar.descriptions();
        let k_last = s.scalar.k[l - 1];
        let k_enh = s.solution.channel.noise(l - 1).get(0, 0);
        out.check(k_enh <= k_last * (1.0 + 1e-12), || {
            format!("case {i}: enhanced noise {k_enh} exceeds the original {k_last}")
        });
        out.check(s.solution.ladder.lambda >= 0.0, || {
            format!("case {i}: negative multiplier {}", s.solution.ladder.lambda)
        });

        let vx = s.scalar.var_x;
        let d_last = s.scalar.d[l - 1];
        for (vi, t) in [0.5, 1.0].into_iter().enumerate() {
            let varied_last = d_last + t * (0.995 * vx - d_last);
            let mut d_sorted = s.scalar.d.clone();
            d_sorted[l - 1] = varied_last;
            let mut d_orig = vec![0.0; l];
            for (pos, &orig) in s.profile.permutation().iter().enumerate() {
                d_orig[orig] = d_sorted[pos];
            }
            let varied = ProblemInstance::new(
                spd1(vx),
                spd1(s.scalar.d0),
                d_orig.iter().map(|&x| spd1(x)).collect(),
            )
            .and_then(|inst| {
                let sc = ScalarInstance::from_problem(&inst, &s.profile)?;
                solve(&sc, &s.profile).map(|sol| (sc, sol))
            });
            match varied {
                Ok((sc, sol)) => {
                    out.check(sol.scenario == Scenario::Enhanced, || {
                        format!(
                            "case {i} variation {vi}: scenario {:?} instead of enhanced",
                            sol.scenario
                        )
                    });
                    out.check((sol.value - s.solution.value).abs() < 1e-8, || {
                        format!(
                            "case {i} variation {vi}: value moved by {:.3e}",
                            (sol.value - s.solution.value).abs()
                        )
                    });
                    let k_enh_v = sol.channel.noise(l - 1).get(0, 0);
                    out.check(k_enh_v <= sc.k[l - 1] * (1.0 + 1e-12), || {
                        format!("case {i} variation {vi}: enhanced noise exceeds the ceiling's")
                    });
                }
                Err(e) => out.fail(format!("case {i} variation {vi}: {e}")),
            }
        }
    }
    out
}

/// Soundness sampling: random feasible ladders never certify more than
/// any constraint-satisfying channel achieves.
pub fn suite_soundness(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("bound-soundness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0bad_cafe_0bad_cafe);

    let mut fixtures: Vec<(ProblemInstance<f64>, Vec<f64>)> = Vec::new();
    fixtures.push((
        ProblemInstance::new(
            spd1(1.0),
            spd1(0.12),
            vec![spd1(0.3), spd1(0.45), spd1(0.6)],
        )
        .expect("valid instance"),
        vec![3.0, 2.0, 1.0],
    ));
    fixtures.push((
        ProblemInstance::new(
            spd1(1.5),
            spd1(0.1),
            vec![spd1(0.35), spd1(0.6), spd1(0.75), spd1(0.95)],
        )
        .expect("valid instance"),
        vec![3.0, 2.0, 2.0, 1.0],
    ));
    let kx2 = SpdMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.2]]).expect("2x2");
    fixtures.push((
        ProblemInstance::new(kx2.clone(), kx2.scale(0.2), vec![kx2.scale(0.5), kx2.scale(0.55)])
            .expect("valid instance"),
        vec![1.0, 1.0],
    ));

    let mut min_slack = f64::INFINITY;
    for (fi, (inst, beta)) in fixtures.iter().enumerate() {
        let profile = match group_weights(beta) {
            Ok(p) => p,
            Err(e) => {
                out.fail(format!("fixture {fi}: weights: {e}"));
                continue;
            }
        };
        let kx = inst.source_cov();
        let scale = kx.trace() / inst.dim() as f64;
        for pair in 0..500 {
            let ladder = match random_ladder(&mut rng, &profile, inst.dim(), scale) {
                Ok(l) => l,
                Err(e) => {
                    out.fail(format!("fixture {fi} pair {pair}: ladder: {e}"));
                    continue;
                }
            };
            let bound = match out.ok_or(
                bound_objective(inst, &profile, &ladder),
                "bound evaluation",
            ) {
                Some(v) => v,
                None => continue,
            };
            let ch = match constrained_channel(&mut rng, inst, &profile) {
                Ok(c) => c,
                Err(e) => {
                    out.fail(format!("fixture {fi} pair {pair}: channel: {e}"));
                    continue;
                }
            };
            let ws = match ch
                .vertex_rates(kx)
                .and_then(|r| profile.weighted_sum(r.rates()))
            {
                Ok(v) => v,
                Err(e) => {
                    out.fail(format!("fixture {fi} pair {pair}: rates: {e}"));
                    continue;
                }
            };
            min_slack = min_slack.min(ws - bound);
            out.check(bound <= ws + 1e-8, || {
                format!(
                    "fixture {fi} pair {pair}: bound {bound} exceeds achieved weighted sum {ws}"
                )
            });
        }
    }
    out.flag(format!("smallest achievability slack {min_slack:.3e}"));
    out
}

/// The geometric vanishing-ladder family drives the bound to the
/// loose-central value; two evaluations plus linear extrapolation must
/// land on it.
pub fn suite_limit_consistency(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("vanishing-ladder-limit");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7777_1111_3333_5555);

    let mut fixtures: Vec<(ProblemInstance<f64>, WeightProfile<f64>)> = Vec::new();
    for case in 0..6 {
        let want = if case < 3 {
            Some(Scenario::LooseCentral)
        } else {
            Some(Scenario::Interior)
        };
        match sample_scalar(&mut rng, 2 + case % 4, want, true) {
            Ok(s) => fixtures.push((s.instance, s.profile)),
            Err(e) => out.fail(format!("case {case}: sampling: {e}")),
        }
    }
    for _ in 0..2 {
        let kx = random_spd(&mut rng, 2, 1.0);
        let beta = strict_weights(&mut rng, 3);
        let inst = ProblemInstance::new(
            kx.clone(),
            kx.scale(0.15),
            vec![kx.scale(0.3), kx.scale(0.45), kx.scale(0.55)],
        )
        .expect("scaled instance");
        fixtures.push((inst, group_weights(&beta).expect("strict weights")));
    }

    for (fi, (inst, profile)) in fixtures.iter().enumerate() {
        let n = inst.dim();
        let ladder_at = |eps: f64| -> Result<AuxiliaryLadder<f64>> {
            let mut covs = Vec::with_capacity(profile.group_count());
            let mut geo_sum = 0.0;
            let mut power = eps;
            for j in 1..=profile.group_count() {
                geo_sum += power;
                power *= eps;
                covs.push(SpdMatrix::scaled_identity(
                    n,
                    geo_sum / profile.group_weight(j),
                ));
            }
            AuxiliaryLadder::new(covs, profile)
        };
        let value_at = |eps: f64| -> Result<f64> {
            bound_objective(inst, profile, &ladder_at(eps)?)
        };
        let eps = [1e-3, 1e-4, 1e-5];
        let vals = match (value_at(eps[0]), value_at(eps[1]), value_at(eps[2])) {
            (Ok(a), Ok(b), Ok(c)) => [a, b, c],
            _ => {
                out.fail(format!("fixture {fi}: ladder evaluation errored"));
                continue;
            }
        };
        let loose = match out.ok_or(loose_central_bound(inst, profile), "limit value") {
            Some(v) => v,
            None => continue,
        };
        // first-order convergence: shrinking the parameter 100x shrinks
        // the error by an order of magnitude at the very least
        out.check(
            (vals[2] - loose).abs() < 0.05 * (vals[0] - loose).abs() + 1e-12,
            || {
                format!(
                    "fixture {fi}: error fell only from {:.3e} to {:.3e}",
                    (vals[0] - loose).abs(),
                    (vals[2] - loose).abs()
                )
            },
        );
        // polynomial extrapolation to zero cancels the linear and quadratic
        // error terms, pinning the limit to cubic accuracy
        let mut extrapolated = 0.0;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if j != i {
                    w *= eps[j] / (eps[j] - eps[i]);
                }
            }
            extrapolated += w * vals[i];
        }
        out.check((extrapolated - loose).abs() < 1e-6, || {
            format!(
                "fixture {fi}: extrapolated {extrapolated} vs limit {loose} (gap {:.3e})",
                (extrapolated - loose).abs()
            )
        });
    }
    out
}

fn bisect_root(
    scalar: &ScalarInstance<f64>,
    profile: &WeightProfile<f64>,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let above = |s: f64| match chain_solve(scalar, profile, s) {
        ChainEval::Feasible(p) => *p.uk.last().expect("nonempty") > scalar.k_target,
        ChainEval::Infeasible { .. } => false,
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The chain root does not depend on the bracket it was found from.
pub fn suite_bisection_uniqueness(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("bisection-uniqueness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2222_aaaa_4444_cccc);
    for case in 0..12 {
        let s = match sample_scalar(&mut rng, 2 + case % 4, Some(Scenario::Interior), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("case {case}: sampling: {e}"));
                continue;
            }
        };
        let vx = s.scalar.var_x;
        let root_a = bisect_root(&s.scalar, &s.profile, 0.0, vx);
        let mut hi_b = 1e-3 * vx;
        for _ in 0..80 {
            let above = match chain_solve(&s.scalar, &s.profile, hi_b) {
                ChainEval::Feasible(p) => *p.uk.last().expect("nonempty") > s.scalar.k_target,
                ChainEval::Infeasible { .. } => false,
            };
            if !above {
                break;
            }
            hi_b *= 2.0;
        }
        let root_b = bisect_root(&s.scalar, &s.profile, 0.0, hi_b);
        out.check((root_a - root_b).abs() < 1e-10, || {
            format!(
                "case {case}: brackets disagree ({root_a} vs {root_b}, diff {:.3e})",
                (root_a - root_b).abs()
            )
        });
        let solver_root = s.solution.ladder.sigma2[0];
        out.check((root_a - solver_root).abs() < 1e-8, || {
            format!(
                "case {case}: independent root {root_a} vs solver root {solver_root}"
            )
        });
    }
    out
}

fn f_gradient(
    scalar: &ScalarInstance<f64>,
    profile: &WeightProfile<f64>,
    y: &[f64],
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; y.len()];
    for i in 0..y.len() {
        let h = 1e-6 * y[i].abs().max(1e-3);
        let mut up = y.to_vec();
        up[i] += h;
        let mut down = y.to_vec();
        down[i] -= h;
        g[i] = (f_objective(scalar, profile, &up)? - f_objective(scalar, profile, &down)?)
            / (2.0 * h);
    }
    Ok(g)
}

fn increments(sigma2: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(sigma2.len());
    let mut prev = 0.0;
    for &s in sigma2 {
        y.push(s - prev);
        prev = s;
    }
    y
}

/// Stationarity cross-check: the residual system and the numerical
/// gradient of the increment objective vanish together at solutions
/// (every gradient entry equals the boundary multiplier), and both flag
/// perturbed points.
pub fn suite_stationarity(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("stationarity-residuals");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6666_dddd_8888_eeee);

    for case in 0..15 {
        let l = 3 + case % 3;
        let s = match sample_scalar(&mut rng, l, Some(Scenario::Interior), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("case {case}: sampling: {e}"));
                continue;
            }
        };
        match kkt_residual(&s.scalar, &s.profile, &s.solution.ladder) {
            Ok(r) => out.check(r < 1e-8, || {
                format!("case {case}: stationarity residual {r:.3e}")
            }),
            Err(e) => out.fail(format!("case {case}: residual: {e}")),
        }
        let y = increments(&s.solution.ladder.sigma2);
        match f_gradient(&s.scalar, &s.profile, &y) {
            Ok(g) => {
                let worst = g.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                out.check(worst < 1e-5, || {
                    format!("case {case}: gradient magnitude {worst:.3e} at the solution")
                });
            }
            Err(e) => out.fail(format!("case {case}: gradient: {e}")),
        }

        // a perturbed point must trip both detectors
        let mut sigma2 = s.solution.ladder.sigma2.clone();
        let room = sigma2[1] - sigma2[0];
        let bump = (1e-3f64).min(0.25 * room);
        sigma2[0] += bump;
        let perturbed = ScalarLadder {
            sigma2: sigma2.clone(),
            uk: s.solution.ladder.uk.clone(),
            lambda: 0.0,
        };
        match kkt_residual(&s.scalar, &s.profile, &perturbed) {
            Ok(r) => out.check(r > 1e-6, || {
                format!("case {case}: perturbed residual {r:.3e} not detected")
            }),
            Err(e) => out.fail(format!("case {case}: perturbed residual: {e}")),
        }
        match f_gradient(&s.scalar, &s.profile, &increments(&sigma2)) {
            Ok(g) => {
                let worst = g.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                out.check(worst > 1e-6, || {
                    format!("case {case}: perturbed gradient {worst:.3e} not detected")
                });
            }
            Err(e) => out.fail(format!("case {case}: perturbed gradient: {e}")),
        }
    }

    // boundary scenario: the residual system balances with a positive
    // multiplier and the gradient matches that multiplier entrywise
    for case in 0..5 {
        let s = match sample_scalar(&mut rng, 3 + case % 2, Some(Scenario::Enhanced), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("boundary case {case}: sampling: {e}"));
                continue;
            }
        };
        let lambda = s.solution.ladder.lambda;
        out.check(lambda > 0.0, || {
            format!("boundary case {case}: multiplier {lambda} is not positive")
        });
        out.check(
            *s.solution.ladder.sigma2.last().unwrap() == s.scalar.var_x,
            || format!("boundary case {case}: top correlation is not pinned at the variance"),
        );
        match kkt_residual(&s.scalar, &s.profile, &s.solution.ladder) {
            Ok(r) => out.check(r < 1e-8, || {
                format!("boundary case {case}: residual {r:.3e}")
            }),
            Err(e) => out.fail(format!("boundary case {case}: residual: {e}")),
        }
        match f_gradient(&s.scalar, &s.profile, &increments(&s.solution.ladder.sigma2)) {
            Ok(g) => {
                let worst = g
                    .iter()
                    .fold(0.0f64, |a, &v| a.max((v - lambda).abs()));
                out.check(worst < 1e-5 * (1.0 + lambda.abs()), || {
                    format!(
                        "boundary case {case}: gradient does not match the multiplier (off by {worst:.3e})"
                    )
                });
            }
            Err(e) => out.fail(format!("boundary case {case}: gradient: {e}")),
        }
    }
    out
}

/// Diagnostic only: the best value found by the cone search should not
/// depend on the random starts. Dispersion above the threshold is flagged
/// but does not fail the suite.
pub fn suite_start_dispersion(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("start-dispersion");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9999_bbbb_7777_ffff);
    let mut worst = 0.0f64;
    for case in 0..6 {
        let s = match sample_scalar(&mut rng, 2 + case % 4, Some(Scenario::Interior), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("case {case}: sampling: {e}"));
                continue;
            }
        };
        let mut values = Vec::new();
        for run in 0..3 {
            let opts = OptimizerOptions {
                starts: 4,
                seed: seed
                    .wrapping_mul(2862933555777941757)
                    .wrapping_add(case as u64 * 3 + run),
                ..OptimizerOptions::default()
            };
            match maximize_bound(&s.instance, &s.profile, &opts) {
                Ok(r) => values.push(r.value),
                Err(e) => out.fail(format!("case {case} run {run}: {e}")),
            }
        }
        if values.len() == 3 {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            worst = worst.max(max - min);
            out.check(true, || unreachable!());
            if max - min >= 1e-6 {
                out.flag(format!(
                    "case {case}: start dispersion {:.3e} above 1e-6",
                    max - min
                ));
            }
        }
    }
    out.flag(format!("largest start dispersion {worst:.3e}"));
    out
}

/// Mutation sensitivity: flipping the sign of one log-determinant in the
/// bound's tail term must break the tightness identity, proving the
/// tightness suite can detect transcription errors.
pub fn suite_mutation_sensitivity(seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("mutation-sensitivity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3141_5926_5358_9793);
    let mut produced = 0;
    let mut attempts = 0;
    while produced < 10 && attempts < 60 {
        attempts += 1;
        let l = 3 + attempts % 3;
        let s = match sample_scalar(&mut rng, l, Some(Scenario::Interior), true) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("sampling: {e}"));
                continue;
            }
        };
        let j_count = s.profile.group_count();
        if j_count < 2 {
            continue;
        }
        let ladder = match out.ok_or(induced_ladder(&s.solution), "certifying ladder") {
            Some(l) => l,
            None => continue,
        };
        let tail_diff = match ladder
            .cov(j_count)
            .sub(ladder.cov(j_count - 1))
            .and_then(|d| d.logdet())
        {
            Ok(v) => v,
            Err(e) => {
                out.fail(format!("tail difference: {e}"));
                continue;
            }
        };
        if tail_diff.abs() < 2e-6 {
            continue; // the flip would be invisible; draw another instance
        }
        produced += 1;
        let ws = s.solution.value;
        let bo = match out.ok_or(
            bound_objective(&s.instance, &s.profile, &ladder),
            "bound value",
        ) {
            Some(v) => v,
            None => continue,
        };
        out.check((ws - bo).abs() < 1e-6, || {
            format!("baseline tightness broken before mutation (gap {:.3e})", (ws - bo).abs())
        });
        let alpha_last = s.profile.group_weight(j_count);
        let mutated = bo + alpha_last * tail_diff;
        out.check((ws - mutated).abs() > 1e-6, || {
            format!(
                "sign flip in the tail term went undetected (mutated gap {:.3e})",
                (ws - mutated).abs()
            )
        });
    }
    if produced < 10 {
        out.fail(format!("only {produced} usable mutation fixtures generated"));
    }
    out
}

/// Runs every suite with the given seed, in a fixed order.
pub fn run_all(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        suite_linalg(seed),
        suite_closed_form(),
        suite_scalar_tightness(seed),
        suite_loose_central(seed),
        suite_single_group_grid(seed),
        suite_entropy_inequality(seed),
        suite_chain_monotonicity(seed),
        suite_channel_fixed_point(seed),
        suite_mmse_schur(seed),
        suite_enhancement(seed),
        suite_soundness(seed),
        suite_limit_consistency(seed),
        suite_bisection_uniqueness(seed),
        suite_stationarity(seed),
        suite_start_dispersion(seed),
        suite_mutation_sensitivity(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_bookkeeping() {
        let mut out = SuiteOutcome::new("demo");
        out.check(true, || unreachable!());
        out.check(false, || "first".to_string());
        out.check(false, || "second".to_string());
        assert_eq!(out.cases, 3);
        assert_eq!(out.failures, 2);
        assert_eq!(out.first_failure.as_deref(), Some("first"));
        assert!(!out.passed());
        assert!(out.describe().contains("FAIL"));
    }

    #[test]
    fn samplers_hit_requested_scenarios() {
        for (i, s) in interior_batch(1, 4).unwrap().iter().enumerate() {
            assert_eq!(s.solution.scenario, Scenario::Interior, "case {i}");
            assert_eq!(s.scalar.descriptions(), 2 + i % 4);
        }
        for s in loose_batch(2, 3).unwrap() {
            assert_eq!(s.solution.scenario, Scenario::LooseCentral);
        }
        for s in enhanced_batch(3, 2).unwrap() {
            assert_eq!(s.solution.scenario, Scenario::Enhanced);
            assert!(s.solution.ladder.lambda >= 0.0);
        }
    }

    #[test]
    fn random_channels_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut correlated = 0;
        for _ in 0..20 {
            let l = 2 + rng.gen_range(0..3);
            let beta = strict_weights(&mut rng, l);
            let profile = group_weights(&beta).unwrap();
            let n = 1 + rng.gen_range(0..2);
            let ch = random_channel(&mut rng, &profile, n, 1.0).unwrap();
            assert!(ch.fixedpoint_residual().unwrap().is_finite());
            if ch.correlation(1).as_matrix().max_abs() > 0.0 {
                correlated += 1;
            }
        }
        assert!(correlated >= 5, "only {correlated} correlated channels");
    }

    #[test]
    fn cheap_suites_pass() {
        let outcomes = vec![
            suite_closed_form(),
            suite_limit_consistency(17),
            suite_bisection_uniqueness(19),
            suite_mutation_sensitivity(23),
        ];
        for o in outcomes {
            assert!(o.passed(), "{}", o.describe());
        }
    }

    #[test]
    fn linalg_suite_passes() {
        let o = suite_linalg(29);
        assert!(o.passed(), "{}", o.describe());
    }
}
