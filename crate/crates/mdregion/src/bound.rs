//! Converse side: a weighted-sum-rate lower bound evaluated on a ladder of
//! auxiliary covariances, and its maximization over the feasible cone.
//!
//! The bound is a sum of one term per weight group plus a base term for the
//! excess weight on the top description. Each term is a ratio of
//! determinants involving the source covariance, the sorted side
//! distortions, the central distortion, and the ladder matrices; the ladder
//! is feasible when the weighted matrices increase strictly in the Loewner
//! order. The supremum over the cone is approached at a vanishing ladder
//! exactly when the central constraint is loose, so the maximizer always
//! compares its best iterate against that closed-form limit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{fp, Matrix, Scalar, SpdMatrix};
use crate::optim::{coordinate_polish, nelder_mead_max, SimplexOptions};
use crate::problem::{ProblemInstance, WeightProfile};

/// Minimum eigenvalue under which a determinant in the bound is treated as
/// on the cone boundary and the objective collapses to negative infinity.
const BOUNDARY_EIG: f64 = 1e-12;

/// Ridge added when the maximizer reconstructs ladder matrices from
/// unconstrained square roots, keeping every iterate strictly inside the
/// cone.
const CONE_RIDGE: f64 = 1e-9;

/// Strictly increasing ladder of auxiliary covariances, one per weight
/// group, validated against the profile that defines the group weights.
#[derive(Debug, Clone)]
pub struct AuxiliaryLadder<F> {
    covs: Vec<SpdMatrix<F>>,
}

impl<F: Scalar> AuxiliaryLadder<F> {
    /// Accepts `J` same-sized covariances with
    /// `0 < a_1 N_1 < a_2 N_2 < ... < a_J N_J` in the strict Loewner order.
    pub fn new(covs: Vec<SpdMatrix<F>>, profile: &WeightProfile<F>) -> Result<Self> {
        let j_count = profile.group_count();
        if covs.len() != j_count {
            return Err(Error::LengthMismatch {
                what: "auxiliary ladder",
                expected: j_count,
                found: covs.len(),
            });
        }
        let n = covs[0].dim();
        let mut prev: Option<SpdMatrix<F>> = None;
        for (idx, cov) in covs.iter().enumerate() {
            if cov.dim() != n {
                return Err(Error::DimensionMismatch {
                    what: "auxiliary ladder entry",
                    expected: n,
                    found: cov.dim(),
                });
            }
            let scaled = cov.scale(profile.group_weight(idx + 1));
            let gap = match &prev {
                None => scaled.min_eigenvalue(),
                Some(p) => scaled.sub(p)?.min_eigenvalue(),
            };
            if gap <= F::zero() {
                return Err(Error::OrderingViolation {
                    what: "weighted auxiliary covariances must increase strictly",
                });
            }
            prev = Some(scaled);
        }
        Ok(AuxiliaryLadder { covs })
    }

    pub fn covs(&self) -> &[SpdMatrix<F>] {
        &self.covs
    }

    /// Ladder entry for group `j` (1-based).
    pub fn cov(&self, j: usize) -> &SpdMatrix<F> {
        &self.covs[j - 1]
    }

    pub fn dim(&self) -> usize {
        self.covs[0].dim()
    }
}

/// Per-term breakdown of the bound: the base term carried by the excess
/// top weight, then one term per group.
#[derive(Debug, Clone)]
pub struct BoundTerms<F> {
    pub base: F,
    pub layers: Vec<F>,
}

impl<F: Scalar> BoundTerms<F> {
    pub fn total(&self) -> F {
        self.layers.iter().fold(self.base, |acc, &t| acc + t)
    }
}

fn guarded_logdet<F: Scalar>(m: &SpdMatrix<F>) -> Option<F> {
    if m.min_eigenvalue() < fp(BOUNDARY_EIG) {
        return None;
    }
    m.cholesky().ok().map(|c| c.logdet())
}

/// Evaluates the bound terms over raw ladder covariances. `None` means a
/// required determinant sat on the cone boundary.
fn eval_terms<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
    sorted_d: &[SpdMatrix<F>],
    covs: &[SpdMatrix<F>],
) -> Result<Option<BoundTerms<F>>> {
    let kx = inst.source_cov();
    let d0 = inst.central_distortion();
    let n_dim = fp::<F>(kx.dim() as f64);
    let half = fp::<F>(0.5);
    let j_count = profile.group_count();

    macro_rules! ld {
        ($m:expr) => {
            match guarded_logdet(&$m) {
                Some(v) => v,
                None => return Ok(None),
            }
        };
    }

    let ld_kx = ld!(kx.clone());
    let base = profile.alpha0() * half * (ld_kx - ld!(sorted_d[0].clone()));

    if j_count == 1 {
        // single-group form: every description shares the one ladder matrix
        let alpha1 = profile.group_weight(1);
        let n1 = &covs[0];
        let l = profile.descriptions();
        let mut acc = ld_kx;
        acc = acc + fp::<F>((l - 1) as f64) * ld!(kx.add(n1)?);
        acc = acc + ld!(d0.add(n1)?);
        acc = acc - ld!(d0.clone());
        for d in sorted_d {
            acc = acc - ld!(d.add(n1)?);
        }
        return Ok(Some(BoundTerms {
            base,
            layers: vec![alpha1 * half * acc],
        }));
    }

    let mut layers = Vec::with_capacity(j_count);

    // head: first group against the second ladder matrix
    {
        let alpha1 = profile.group_weight(1);
        let alpha2 = profile.group_weight(2);
        let m1 = profile.group_size(1);
        let n1 = &covs[0];
        let n2 = &covs[1];
        let mut acc = n_dim * (alpha1.ln() - (alpha1 - alpha2).ln());
        acc = acc + ld_kx;
        acc = acc + fp::<F>((m1 - 1) as f64) * ld!(kx.add(n1)?);
        acc = acc + ld!(n2.sub(n1)?);
        for d in sorted_d.iter().take(m1) {
            acc = acc - ld!(n1.add(d)?);
        }
        acc = acc - ld!(n2.clone());
        layers.push(alpha1 * half * acc);
    }

    // interior groups
    for j in 2..j_count {
        let alpha_prev = profile.group_weight(j - 1);
        let alpha_j = profile.group_weight(j);
        let alpha_next = profile.group_weight(j + 1);
        let m_j = profile.group_size(j);
        let n_prev = &covs[j - 2];
        let n_j = &covs[j - 1];
        let n_next = &covs[j];
        let mut acc = n_dim * ((alpha_prev - alpha_j).ln() - (alpha_j - alpha_next).ln());
        acc = acc + fp::<F>(m_j as f64) * ld!(kx.add(n_j)?);
        acc = acc + ld!(n_prev.clone());
        acc = acc + ld!(n_next.sub(n_j)?);
        for d in sorted_d
            .iter()
            .skip(profile.prefix_len(j - 1))
            .take(m_j)
        {
            acc = acc - ld!(n_j.add(d)?);
        }
        acc = acc - ld!(n_j.sub(n_prev)?);
        acc = acc - ld!(n_next.clone());
        layers.push(alpha_j * half * acc);
    }

    // tail: last group against the central distortion
    {
        let j = j_count;
        let alpha_prev = profile.group_weight(j - 1);
        let alpha_j = profile.group_weight(j);
        let m_j = profile.group_size(j);
        let n_prev = &covs[j - 2];
        let n_j = &covs[j - 1];
        let mut acc = n_dim * ((alpha_prev - alpha_j).ln() - alpha_j.ln());
        acc = acc + ld!(n_j.add(d0)?);
        acc = acc + fp::<F>(m_j as f64) * ld!(kx.add(n_j)?);
        acc = acc + ld!(n_prev.clone());
        acc = acc - ld!(d0.clone());
        for d in sorted_d
            .iter()
            .skip(profile.prefix_len(j - 1))
            .take(m_j)
        {
            acc = acc - ld!(n_j.add(d)?);
        }
        acc = acc - ld!(n_j.sub(n_prev)?);
        layers.push(alpha_j * half * acc);
    }

    Ok(Some(BoundTerms { base, layers }))
}

fn check_shapes<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
    ladder_dim: usize,
) -> Result<()> {
    if profile.descriptions() != inst.descriptions() {
        return Err(Error::LengthMismatch {
            what: "weight profile",
            expected: inst.descriptions(),
            found: profile.descriptions(),
        });
    }
    if ladder_dim != inst.dim() {
        return Err(Error::DimensionMismatch {
            what: "auxiliary ladder",
            expected: inst.dim(),
            found: ladder_dim,
        });
    }
    Ok(())
}

/// Weighted-sum-rate lower bound at one ladder. Returns negative infinity
/// when a required determinant degenerates (minimum eigenvalue below
/// `1e-12`).
pub fn bound_objective<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
    ladder: &AuxiliaryLadder<F>,
) -> Result<F> {
    check_shapes(inst, profile, ladder.dim())?;
    let sorted_d = inst.sorted_side_distortions(profile)?;
    Ok(eval_terms(inst, profile, &sorted_d, ladder.covs())?
        .map_or(F::neg_infinity(), |t| t.total()))
}

/// Per-term breakdown of [`bound_objective`]; `None` on the cone boundary.
pub fn bound_objective_terms<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
    ladder: &AuxiliaryLadder<F>,
) -> Result<Option<BoundTerms<F>>> {
    check_shapes(inst, profile, ladder.dim())?;
    let sorted_d = inst.sorted_side_distortions(profile)?;
    eval_terms(inst, profile, &sorted_d, ladder.covs())
}

/// Value of the bound in the vanishing-ladder limit: the weighted sum of
/// minimum single-description rates. This is the exact supremum whenever
/// the central constraint is loose.
pub fn loose_central_bound<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
) -> Result<F> {
    check_shapes(inst, profile, inst.dim())?;
    let half = fp::<F>(0.5);
    let ld_kx = inst.source_cov().logdet()?;
    let rates: Vec<F> = inst
        .sorted_side_distortions(profile)?
        .iter()
        .map(|d| d.logdet().map(|ld| half * (ld_kx - ld)))
        .collect::<Result<_>>()?;
    profile.weighted_sum(&rates)
}

/// Multi-start maximizer settings.
#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    pub starts: usize,
    pub rel_tol: f64,
    /// Evaluation budget per start.
    pub max_evals: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            starts: 8,
            rel_tol: 1e-9,
            max_evals: 20_000,
            patience: 25,
            seed: 0,
        }
    }
}

/// Where the reported maximum was attained.
#[derive(Debug, Clone)]
pub enum BoundLadder<F> {
    /// An interior ladder realizes the value.
    Attained(AuxiliaryLadder<F>),
    /// The vanishing-ladder limit wins; no finite argmax exists.
    VanishingLimit,
}

/// Result of the cone search.
#[derive(Debug, Clone)]
pub struct BoundResult<F> {
    pub value: F,
    pub ladder: BoundLadder<F>,
    pub converged: bool,
    pub evaluations: usize,
}

/// Builds ladder covariances from unconstrained square-root parameters:
/// the weighted ladder accumulates one Gram matrix plus a tiny ridge per
/// group, which keeps every iterate strictly feasible.
fn covs_from_params<F: Scalar>(
    profile: &WeightProfile<F>,
    n: usize,
    params: &[F],
) -> Result<Vec<SpdMatrix<F>>> {
    let j_count = profile.group_count();
    let ridge = fp::<F>(CONE_RIDGE);
    let mut covs = Vec::with_capacity(j_count);
    let mut running = SpdMatrix::zeros(n);
    for j in 0..j_count {
        let mut g = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                g.set(r, c, params[j * n * n + r * n + c]);
            }
        }
        let gram = SpdMatrix::from_matrix(&g.matmul(&g.transpose())?)?;
        running = running.add(&gram)?.add_scaled_identity(ridge);
        covs.push(running.scale(F::one() / profile.group_weight(j + 1)));
    }
    Ok(covs)
}

/// Maximizes the bound over the feasible cone: seeded multi-start simplex
/// search over square-root parameters, a coordinatewise polish of the best
/// iterate ever seen, and a final comparison against the vanishing-ladder
/// limit. Deterministic for a fixed seed.
pub fn maximize_bound<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
    opts: &OptimizerOptions,
) -> Result<BoundResult<F>> {
    check_shapes(inst, profile, inst.dim())?;
    let sorted_d = inst.sorted_side_distortions(profile)?;
    let n = inst.dim();
    let j_count = profile.group_count();
    let param_count = j_count * n * n;

    let mut best_x: Vec<F> = Vec::new();
    let mut best_val = F::neg_infinity();
    let mut best_converged = false;
    let mut total_evals = 0usize;

    {
        let raw = |x: &[F]| -> F {
            match covs_from_params(profile, n, x) {
                Ok(covs) => match eval_terms(inst, profile, &sorted_d, &covs) {
                    Ok(Some(t)) => t.total(),
                    _ => F::neg_infinity(),
                },
                Err(_) => F::neg_infinity(),
            }
        };

        let scale = (inst.source_cov().trace() / fp::<F>(n as f64))
            .abs()
            .sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for start in 0..opts.starts.max(1) {
            let spread = if start == 0 {
                fp::<F>(0.5)
            } else {
                fp::<F>(10f64.powf(rng.gen_range(-2.0..1.0)))
            };
            let x0: Vec<F> = (0..param_count)
                .map(|i| {
                    if start == 0 {
                        // deterministic diagonal seed
                        let r = (i / n) % n;
                        let c = i % n;
                        if r == c {
                            scale * spread
                        } else {
                            F::zero()
                        }
                    } else {
                        scale * spread * fp::<F>(rng.gen_range(-1.0..1.0))
                    }
                })
                .collect();
            let sim_opts = SimplexOptions {
                max_evals: opts.max_evals,
                rel_tol: fp(opts.rel_tol),
                patience: opts.patience,
                init_step: scale * spread * fp::<F>(0.25),
            };
            let mut tracked = |x: &[F]| -> F {
                let v = raw(x);
                if v > best_val {
                    best_val = v;
                    best_x = x.to_vec();
                }
                v
            };
            let run = nelder_mead_max(&mut tracked, &x0, &sim_opts);
            total_evals += run.evaluations;
            // the incumbent's convergence flag is the one that matters
            if run.value >= best_val || run.x == best_x {
                best_converged = run.converged;
            }
        }

        if best_val.is_finite() {
            let mut tracked = |x: &[F]| -> F {
                // polish keeps its own best; tracking here only counts evals
                raw(x)
            };
            let (px, pv, pe) =
                coordinate_polish(&mut tracked, &best_x, best_val, fp::<F>(1e-6), 60);
            total_evals += pe;
            if pv > best_val {
                best_val = pv;
                best_x = px;
            }
        }
    }

    let loose = loose_central_bound(inst, profile)?;
    if loose > best_val {
        return Ok(BoundResult {
            value: loose,
            ladder: BoundLadder::VanishingLimit,
            converged: true,
            evaluations: total_evals,
        });
    }

    let covs = covs_from_params(profile, n, &best_x)?;
    let ladder = AuxiliaryLadder::new(covs, profile)?;
    Ok(BoundResult {
        value: best_val,
        ladder: BoundLadder::Attained(ladder),
        converged: best_converged,
        evaluations: total_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::group_weights;

    fn spd1(x: f64) -> SpdMatrix<f64> {
        SpdMatrix::from_rows(&[vec![x]]).unwrap()
    }

    fn scalar_instance(d: &[f64], d0: f64) -> ProblemInstance<f64> {
        ProblemInstance::new(
            spd1(1.0),
            spd1(d0),
            d.iter().map(|&x| spd1(x)).collect(),
        )
        .unwrap()
    }

    fn ladder(ns: &[f64], profile: &WeightProfile<f64>) -> AuxiliaryLadder<f64> {
        AuxiliaryLadder::new(ns.iter().map(|&x| spd1(x)).collect(), profile).unwrap()
    }

    #[test]
    fn single_group_objective_value() {
        let inst = scalar_instance(&[0.5, 0.5], 0.25);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let v = bound_objective(&inst, &profile, &ladder(&[1.0], &profile)).unwrap();
        assert!((v - 0.5 * (40.0f64 / 9.0).ln()).abs() < 1e-14);
        // both extremes approach the loose value log 2
        let lo = bound_objective(&inst, &profile, &ladder(&[1e-7], &profile)).unwrap();
        let hi = bound_objective(&inst, &profile, &ladder(&[1e7], &profile)).unwrap();
        assert!((lo - 2.0f64.ln()).abs() < 1e-5);
        assert!((hi - 2.0f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn single_group_objective_matches_closed_form_optimum() {
        // two unit-noise descriptions, target effective noise 0.2
        let inst = scalar_instance(&[0.5, 0.5], 1.0 / 6.0);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let v = bound_objective(&inst, &profile, &ladder(&[1.5], &profile)).unwrap();
        assert!((v - 0.5 * 6.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_group_objective_matches_vertex_sum() {
        // hand-solved three-description instance
        let inst = scalar_instance(&[0.5, 0.5, 0.5], 171.0 / 1046.0);
        let profile = group_weights(&[3.0, 2.0, 1.0]).unwrap();
        let lad = ladder(&[1.0 / 9.0, 9.0 / 26.0], &profile);
        let v = bound_objective(&inst, &profile, &lad).unwrap();

        let channel = crate::channel::TestChannel::new(
            vec![spd1(1.0), spd1(1.0), spd1(1.0)],
            vec![spd1(0.1), spd1(9.0 / 35.0)],
            profile.clone(),
        )
        .unwrap();
        let rates = channel.vertex_rates(inst.source_cov()).unwrap();
        let ws = profile.weighted_sum(rates.rates()).unwrap();
        assert!((v - ws).abs() < 1e-10, "bound {v} vs weighted sum {ws}");

        let terms = bound_objective_terms(&inst, &profile, &lad)
            .unwrap()
            .unwrap();
        assert!((terms.total() - v).abs() < 1e-12);
        assert_eq!(terms.layers.len(), 2);
        // head term carries the first group's weighted prefix rates
        let prefix = 2.0 * (rates.get(0) + rates.get(1));
        assert!((terms.layers[0] - prefix).abs() < 1e-10);
    }

    #[test]
    fn boundary_collapses_to_negative_infinity() {
        let inst = scalar_instance(&[0.5, 0.5, 0.5], 0.1);
        let profile = group_weights(&[3.0, 2.0, 1.0]).unwrap();
        let sorted_d = inst.sorted_side_distortions(&profile).unwrap();
        // second ladder matrix nearly equal to the first
        let covs = vec![spd1(0.2), spd1(0.2 + 1e-13)];
        let out = eval_terms(&inst, &profile, &sorted_d, &covs).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn ladder_validation_rejects_broken_chain() {
        let profile = group_weights(&[3.0, 2.0, 1.0]).unwrap();
        // weighted chain requires 1*n2 > 2*n1
        let err = AuxiliaryLadder::new(vec![spd1(0.3), spd1(0.5)], &profile).unwrap_err();
        assert!(matches!(err, Error::OrderingViolation { .. }));
        assert!(AuxiliaryLadder::new(vec![spd1(0.3), spd1(0.7)], &profile).is_ok());
    }

    #[test]
    fn loose_central_bound_values() {
        let inst = scalar_instance(&[0.5, 0.5], 0.4);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let v = loose_central_bound(&inst, &profile).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-14);

        let inst = scalar_instance(&[0.5, 0.5, 0.5], 0.3);
        let profile = group_weights(&[5.0, 3.0, 2.0]).unwrap();
        let v = loose_central_bound(&inst, &profile).unwrap();
        assert!((v - 5.0 * 2.0f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn maximizer_reaches_closed_form_value() {
        let inst = scalar_instance(&[0.5, 0.5], 1.0 / 6.0);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let r = maximize_bound(&inst, &profile, &OptimizerOptions::default()).unwrap();
        assert!(
            (r.value - 0.5 * 6.25f64.ln()).abs() < 1e-6,
            "value {}",
            r.value
        );
        assert!(matches!(r.ladder, BoundLadder::Attained(_)));
        if let BoundLadder::Attained(l) = &r.ladder {
            assert!((l.cov(1).get(0, 0) - 1.5).abs() < 1e-3);
        }
    }

    #[test]
    fn maximizer_detects_loose_central_instances() {
        let inst = scalar_instance(&[0.5, 0.5], 0.4);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let r = maximize_bound(&inst, &profile, &OptimizerOptions::default()).unwrap();
        let loose = loose_central_bound(&inst, &profile).unwrap();
        assert!((r.value - loose).abs() < 1e-7);
        assert!(matches!(r.ladder, BoundLadder::VanishingLimit));
    }

    #[test]
    fn maximizer_is_deterministic_per_seed() {
        let inst = scalar_instance(&[0.5, 0.5], 1.0 / 6.0);
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let opts = OptimizerOptions {
            starts: 3,
            max_evals: 2_000,
            ..OptimizerOptions::default()
        };
        let a = maximize_bound(&inst, &profile, &opts).unwrap();
        let b = maximize_bound(&inst, &profile, &opts).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn isotropic_vector_doubles_the_scalar_value() {
        let eye = |s: f64| SpdMatrix::scaled_identity(2, s);
        let inst = ProblemInstance::new(eye(1.0), eye(1.0 / 6.0), vec![eye(0.5), eye(0.5)])
            .unwrap();
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let r = maximize_bound(&inst, &profile, &OptimizerOptions::default()).unwrap();
        assert!(
            (r.value - 6.25f64.ln()).abs() < 1e-5,
            "value {} vs {}",
            r.value,
            6.25f64.ln()
        );
    }
}
