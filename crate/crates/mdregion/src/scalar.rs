//! Exact solver for scalar sources.
//!
//! For a unit-dimension source the optimal weighted sum rate is computed
//! in closed form up to one bisection: the layered correlation values obey
//! a forward chain recursion driven by the leading value `sigma_1^2`, the
//! joint effective noise of the full prefix is monotone decreasing in that
//! value, and the central constraint pins its root. Three scenarios cover
//! the geometry: a loose central constraint (no correlation needed), an
//! interior stationary point, and a boundary solution where the least
//! weighted description is enhanced and the top correlation saturates at
//! the source variance.

use crate::bound::AuxiliaryLadder;
use crate::channel::TestChannel;
use crate::error::{Error, Result};
use crate::linalg::{fp, Scalar, SpdMatrix};
use crate::problem::{ProblemInstance, RatePoint, WeightProfile};

/// Relative tolerance on the joint-noise match used by [`solve`].
const SOLVE_TOL: f64 = 1e-12;

/// Bisection iteration cap.
const MAX_BISECT: usize = 200;

/// Cap standing in for the infinite top ladder entry of a boundary
/// solution, as a multiple of the source variance.
const LADDER_CAP: f64 = 1e12;

/// Scalar problem data in solver (weight-sorted) description order.
#[derive(Debug, Clone)]
pub struct ScalarInstance<F> {
    /// Source variance.
    pub var_x: F,
    /// Central distortion ceiling.
    pub d0: F,
    /// Side distortion ceilings, weight-sorted.
    pub d: Vec<F>,
    /// Single-description noise achieving each side ceiling exactly.
    pub k: Vec<F>,
    /// Joint effective noise the central constraint demands.
    pub k_target: F,
    /// Joint effective noise of uncorrelated descriptions (its maximum).
    pub k_up: F,
}

impl<F: Scalar> ScalarInstance<F> {
    /// Extracts the scalar data from a unit-dimension instance, sorting
    /// descriptions by the profile order.
    pub fn from_problem(
        inst: &ProblemInstance<F>,
        profile: &WeightProfile<F>,
    ) -> Result<Self> {
        if inst.dim() != 1 {
            return Err(Error::DimensionMismatch {
                what: "scalar source",
                expected: 1,
                found: inst.dim(),
            });
        }
        if profile.descriptions() != inst.descriptions() {
            return Err(Error::LengthMismatch {
                what: "weight profile",
                expected: inst.descriptions(),
                found: profile.descriptions(),
            });
        }
        let var_x = inst.source_cov().get(0, 0);
        let d0 = inst.central_distortion().get(0, 0);
        let to_noise = |d: F| F::one() / (F::one() / d - F::one() / var_x);
        let d: Vec<F> = profile
            .permutation()
            .iter()
            .map(|&orig| inst.side_distortion(orig).get(0, 0))
            .collect();
        let k: Vec<F> = d.iter().map(|&x| to_noise(x)).collect();
        let k_up = F::one() / k.iter().map(|&x| F::one() / x).sum::<F>();
        Ok(ScalarInstance {
            var_x,
            d0,
            k_target: to_noise(d0),
            d,
            k,
            k_up,
        })
    }

    pub fn descriptions(&self) -> usize {
        self.d.len()
    }

    /// Central distortion reached by uncorrelated descriptions — the best
    /// the loose-central corner can do.
    pub fn loose_central_distortion(&self) -> F {
        F::one() / (F::one() / self.var_x + F::one() / self.k_up)
    }
}

/// How the optimum was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Central constraint already satisfied without correlation.
    LooseCentral,
    /// Stationary point with the top correlation strictly below the
    /// source variance.
    Interior,
    /// Top correlation saturates the source variance; the least weighted
    /// description is enhanced.
    Enhanced,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::LooseCentral => "loose-central",
            Scenario::Interior => "interior",
            Scenario::Enhanced => "enhanced",
        }
    }
}

/// Layered correlation values, prefix joint noises, and the
/// complementary-slackness multiplier of the stationarity system.
#[derive(Debug, Clone)]
pub struct ScalarLadder<F> {
    /// Correlation value per group, increasing.
    pub sigma2: Vec<F>,
    /// Joint effective noise of each group prefix, decreasing.
    pub uk: Vec<F>,
    /// Multiplier on the saturation constraint; zero off the boundary.
    pub lambda: F,
}

/// Full scalar solution.
#[derive(Debug, Clone)]
pub struct ScalarSolution<F> {
    pub scenario: Scenario,
    pub ladder: ScalarLadder<F>,
    /// Optimal test channel (enhanced noise in the boundary scenario).
    pub channel: TestChannel<F>,
    /// Vertex rates in weight-sorted description order.
    pub rates: RatePoint<F>,
    /// Optimal weighted sum rate in nats.
    pub value: F,
    /// Source variance, kept for ladder reconstruction.
    pub var_x: F,
}

/// One evaluation of the forward chain.
#[derive(Debug, Clone)]
pub struct ChainPoint<F> {
    pub sigma2: Vec<F>,
    pub uk: Vec<F>,
}

/// Chain outcome: feasible values or the first failing stage (1-based).
#[derive(Debug, Clone)]
pub enum ChainEval<F> {
    Feasible(ChainPoint<F>),
    Infeasible { stage: usize },
}

/// Forward chain recursion from the leading correlation value: the first
/// group's joint noise, then alternating correlation and joint-noise
/// updates per remaining group. Infeasibility (nonpositive joint noise,
/// nonincreasing correlation, or a nonpositive update denominator) is
/// reported with its stage.
pub fn chain_solve<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    sigma1sq: F,
) -> ChainEval<F> {
    let j_count = profile.group_count();
    if !(sigma1sq > F::zero()) {
        return ChainEval::Infeasible { stage: 1 };
    }
    let mut s = sigma1sq;
    let mut inv: F = inst.k[..profile.prefix_len(1)]
        .iter()
        .map(|&k| F::one() / (s + k))
        .sum();
    let mut u = F::one() / inv - s;
    if !(u > F::zero()) {
        return ChainEval::Infeasible { stage: 1 };
    }
    let mut sigma2 = Vec::with_capacity(j_count);
    let mut uk = Vec::with_capacity(j_count);
    sigma2.push(s);
    uk.push(u);
    for j in 1..j_count {
        let a = profile.group_weight(j);
        let a_next = profile.group_weight(j + 1);
        let den = a_next / s - (a - a_next) / u;
        if !(den > F::zero()) {
            return ChainEval::Infeasible { stage: j + 1 };
        }
        let s_next = a / den;
        if !(s_next > s) {
            return ChainEval::Infeasible { stage: j + 1 };
        }
        inv = F::one() / (u + s_next);
        for &k in &inst.k[profile.prefix_len(j)..profile.prefix_len(j + 1)] {
            inv = inv + F::one() / (s_next + k);
        }
        u = F::one() / inv - s_next;
        if !(u > F::zero()) {
            return ChainEval::Infeasible { stage: j + 1 };
        }
        s = s_next;
        sigma2.push(s);
        uk.push(u);
    }
    ChainEval::Feasible(ChainPoint { sigma2, uk })
}

/// Finds the leading correlation whose full-prefix joint noise equals the
/// central target, to relative tolerance `tol` on the noise value. The
/// upper bracket grows geometrically; an infeasible chain counts as
/// "leading value too large" since the feasible support is an interval
/// shrinking from above.
pub fn bisect_sigma1<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    tol: F,
) -> Result<(F, ScalarLadder<F>)> {
    let target = inst.k_target;
    if inst.k_up <= target {
        return Err(Error::BracketingFailure {
            what: format!(
                "joint noise of uncorrelated descriptions {} never exceeds the target {}",
                inst.k_up, target
            ),
        });
    }
    let last_uk = |s: F| -> Option<ChainPoint<F>> {
        match chain_solve(inst, profile, s) {
            ChainEval::Feasible(p) => Some(p),
            ChainEval::Infeasible { .. } => None,
        }
    };
    let mut hi = inst.var_x;
    let mut grown = 0;
    while let Some(p) = last_uk(hi) {
        if *p.uk.last().unwrap() < target {
            break;
        }
        hi = hi + hi;
        grown += 1;
        if grown > 60 {
            return Err(Error::BracketingFailure {
                what: "joint noise never fell below the central target".to_string(),
            });
        }
    }
    let mut lo = F::zero();
    for _ in 0..MAX_BISECT {
        let mid = (lo + hi) * fp::<F>(0.5);
        match last_uk(mid) {
            Some(p) => {
                let u = *p.uk.last().unwrap();
                if (u - target).abs() < tol * target {
                    return Ok((
                        mid,
                        ScalarLadder {
                            sigma2: p.sigma2,
                            uk: p.uk,
                            lambda: F::zero(),
                        },
                    ));
                }
                if u > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            None => hi = mid,
        }
    }
    Err(Error::BracketingFailure {
        what: format!(
            "joint-noise bisection did not meet tolerance {tol} within {MAX_BISECT} iterations"
        ),
    })
}

/// Root of `sigma_J^2(sigma_1^2) = var_x` for the boundary scenario; the
/// returned value sits on the feasible side (top correlation just below
/// the variance). Caller guarantees a crossing exists at or below `hint`.
fn bisect_saturation<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    hint: F,
) -> Result<F> {
    let vx = inst.var_x;
    let crossed = |s: F| -> Option<bool> {
        match chain_solve(inst, profile, s) {
            ChainEval::Feasible(p) => Some(*p.sigma2.last().unwrap() >= vx),
            ChainEval::Infeasible { .. } => None,
        }
    };
    let mut hi = hint;
    let mut grown = 0;
    while crossed(hi) == Some(false) {
        hi = hi * fp::<F>(1.25);
        grown += 1;
        if grown > 200 {
            return Err(Error::BracketingFailure {
                what: "top correlation never reached the source variance".to_string(),
            });
        }
    }
    let mut lo = F::zero();
    for _ in 0..MAX_BISECT {
        let mid = (lo + hi) * fp::<F>(0.5);
        match crossed(mid) {
            Some(false) => lo = mid,
            _ => hi = mid,
        }
        if hi - lo < fp::<F>(1e-14) * hi {
            break;
        }
    }
    Ok(lo)
}

/// Multiplier balancing the saturated central equation: what must be
/// added to the last description's inverse total noise so the joint noise
/// meets the target exactly when the top correlation equals the variance.
fn saturation_multiplier<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    prefix: Option<&ChainPoint<F>>,
) -> F {
    let vx = inst.var_x;
    let j_count = profile.group_count();
    let mut lam = F::one() / (inst.k_target + vx);
    if let Some(p) = prefix {
        lam = lam - F::one() / (p.uk[j_count - 2] + vx);
    }
    for &k in &inst.k[profile.prefix_len(j_count - 1)..] {
        lam = lam - F::one() / (k + vx);
    }
    if lam > F::zero() {
        lam
    } else {
        F::zero()
    }
}

/// Solves the scalar problem exactly: scenario dispatch, chain bisection,
/// and enhancement of the least weighted description when the top
/// correlation saturates.
pub fn solve<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
) -> Result<ScalarSolution<F>> {
    let j_count = profile.group_count();
    let vx = inst.var_x;
    let tol = fp::<F>(SOLVE_TOL);

    if inst.k_target >= inst.k_up {
        // no correlation needed; every description works alone
        let mut uk = Vec::with_capacity(j_count);
        let mut inv = F::zero();
        for j in 1..=j_count {
            for &k in &inst.k[profile.prefix_len(j - 1)..profile.prefix_len(j)] {
                inv = inv + F::one() / k;
            }
            uk.push(F::one() / inv);
        }
        let ladder = ScalarLadder {
            sigma2: vec![F::zero(); j_count],
            uk,
            lambda: F::zero(),
        };
        return finish(inst, profile, Scenario::LooseCentral, ladder, &inst.k);
    }

    let (_, ladder) = bisect_sigma1(inst, profile, tol)?;
    let margin = vx * (F::one() - fp::<F>(1e-10));
    if *ladder.sigma2.last().unwrap() < margin {
        return finish(inst, profile, Scenario::Interior, ladder, &inst.k);
    }

    // boundary scenario: pin the top correlation at the variance, balance
    // the central equation with a multiplier, enhance the last description
    let edge = if j_count == 1 {
        vx
    } else {
        bisect_saturation(inst, profile, *ladder.sigma2.first().unwrap())?
    };
    let prefix = match chain_solve(inst, profile, edge) {
        ChainEval::Feasible(p) => p,
        ChainEval::Infeasible { stage } => {
            return Err(Error::EnhancementFailure {
                what: format!("chain infeasible at stage {stage} on the saturation edge"),
            })
        }
    };
    let lam = saturation_multiplier(
        inst,
        profile,
        (j_count >= 2).then_some(&prefix),
    );
    let last = inst.descriptions() - 1;
    let k_last = inst.k[last];
    let k_enh = F::one() / (F::one() / (k_last + vx) + lam) - vx;
    if !(k_enh <= k_last * (F::one() + fp::<F>(1e-12))) {
        return Err(Error::EnhancementFailure {
            what: format!("enhanced noise {k_enh} exceeds the original {k_last}"),
        });
    }
    let mut k_mod = inst.k.clone();
    k_mod[last] = k_enh;
    let mut d_mod = inst.d.clone();
    d_mod[last] = F::one() / (F::one() / vx + F::one() / k_enh);
    let modified = ScalarInstance {
        var_x: vx,
        d0: inst.d0,
        d: d_mod,
        k: k_mod.clone(),
        k_target: inst.k_target,
        k_up: F::one() / k_mod.iter().map(|&x| F::one() / x).sum::<F>(),
    };
    let (_, mut ladder) = bisect_sigma1(&modified, profile, tol)?;
    // the balanced system meets the target exactly on the boundary
    ladder.sigma2[j_count - 1] = vx;
    ladder.uk[j_count - 1] = inst.k_target;
    ladder.lambda = profile.group_weight(j_count) * lam;
    finish(inst, profile, Scenario::Enhanced, ladder, &k_mod)
}

/// Builds the channel, rates, and value for a finished ladder.
fn finish<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    scenario: Scenario,
    ladder: ScalarLadder<F>,
    k: &[F],
) -> Result<ScalarSolution<F>> {
    let spd1 = |x: F| SpdMatrix::from_rows(&[vec![x]]);
    let noise: Vec<SpdMatrix<F>> = k.iter().map(|&x| spd1(x)).collect::<Result<_>>()?;
    let corr: Vec<SpdMatrix<F>> = ladder
        .sigma2
        .iter()
        .map(|&x| spd1(x))
        .collect::<Result<_>>()?;
    let channel = TestChannel::new(noise, corr, profile.clone())?;
    let source = spd1(inst.var_x)?;
    let rates = channel.vertex_rates(&source)?;
    let value = profile.weighted_sum(rates.rates())?;
    Ok(ScalarSolution {
        scenario,
        ladder,
        channel,
        rates,
        value,
        var_x: inst.var_x,
    })
}

/// Equivalent unconstrained objective in increment coordinates
/// `y_j = sigma_j^2 - sigma_{j-1}^2`; its stationary point reproduces the
/// chain solution. Defined for two or more groups.
pub fn f_objective<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    y: &[F],
) -> Result<F> {
    let j_count = profile.group_count();
    if j_count < 2 {
        return Err(Error::UnsupportedGroupCount {
            found: j_count,
            what: "increment objective needs at least two groups",
        });
    }
    if y.len() != j_count {
        return Err(Error::LengthMismatch {
            what: "increment vector",
            expected: j_count,
            found: y.len(),
        });
    }
    let lg = |x: F| -> Result<F> {
        if x > F::zero() {
            Ok(x.ln())
        } else {
            Err(Error::DomainError {
                what: format!("log of nonpositive value {x}"),
            })
        }
    };
    let alpha = |j: usize| profile.group_weight(j);
    let cum: Vec<F> = y
        .iter()
        .scan(F::zero(), |acc, &v| {
            *acc = *acc + v;
            Some(*acc)
        })
        .collect();
    let total = cum[j_count - 1];
    let mut f = alpha(j_count) * lg(inst.k_target + total)?;
    for j in 1..=j_count {
        let mut sum = F::zero();
        for &k in &inst.k[profile.prefix_len(j - 1)..profile.prefix_len(j)] {
            sum = sum + lg(cum[j - 1] + k)?;
        }
        f = f - alpha(j) * sum;
    }
    for j in 1..j_count {
        f = f + (alpha(j) - alpha(j + 1)) * lg(y[j])?;
    }
    for j in 2..j_count {
        f = f - (alpha(j - 1) - alpha(j + 1)) * lg(cum[j - 1])?;
    }
    f = f + alpha(2) * lg(y[0])?;
    f = f - alpha(j_count - 1) * lg(total)?;
    Ok(f)
}

/// Maximum absolute residual of the stationarity system at a ladder:
/// the leading equation, the interior equations, the multiplier equation,
/// complementary slackness, and multiplier nonnegativity. Defined for two
/// or more groups.
pub fn kkt_residual<F: Scalar>(
    inst: &ScalarInstance<F>,
    profile: &WeightProfile<F>,
    ladder: &ScalarLadder<F>,
) -> Result<F> {
    let j_count = profile.group_count();
    if j_count < 2 {
        return Err(Error::UnsupportedGroupCount {
            found: j_count,
            what: "stationarity system needs at least two groups",
        });
    }
    let s = &ladder.sigma2;
    let lam = ladder.lambda;
    let alpha = |j: usize| profile.group_weight(j);
    let noise_sum = |j: usize| -> F {
        inst.k[profile.prefix_len(j - 1)..profile.prefix_len(j)]
            .iter()
            .map(|&k| F::one() / (s[j - 1] + k))
            .sum()
    };

    let mut worst = (alpha(1) * noise_sum(1) - alpha(2) / s[0]
        + (alpha(1) - alpha(2)) / (s[1] - s[0]))
    .abs();
    for j in 2..j_count {
        let r = alpha(j) * noise_sum(j) - (alpha(j - 1) - alpha(j)) / (s[j - 1] - s[j - 2])
            + (alpha(j) - alpha(j + 1)) / (s[j] - s[j - 1])
            + (alpha(j - 1) - alpha(j + 1)) / s[j - 1];
        worst = worst.max(r.abs());
    }
    let jl = j_count;
    let r_last = alpha(jl) / (s[jl - 1] + inst.k_target) - alpha(jl) * noise_sum(jl)
        + (alpha(jl - 1) - alpha(jl)) / (s[jl - 1] - s[jl - 2])
        - alpha(jl - 1) / s[jl - 1]
        - lam;
    worst = worst.max(r_last.abs());
    worst = worst.max((lam * (inst.var_x - s[jl - 1])).abs());
    worst = worst.max((-lam).max(F::zero()));
    Ok(worst)
}

/// Auxiliary ladder certifying the solution value in the determinant
/// bound: each correlation value maps through the source variance, and a
/// saturated top entry becomes a large finite cap. Unsupported for the
/// loose-central scenario, whose supremum is a vanishing-ladder limit.
pub fn induced_ladder<F: Scalar>(solution: &ScalarSolution<F>) -> Result<AuxiliaryLadder<F>> {
    if solution.scenario == Scenario::LooseCentral {
        return Err(Error::DomainError {
            what: "loose-central solutions have no finite certifying ladder".to_string(),
        });
    }
    let vx = solution.var_x;
    let j_count = solution.ladder.sigma2.len();
    let covs: Vec<SpdMatrix<F>> = solution
        .ladder
        .sigma2
        .iter()
        .enumerate()
        .map(|(idx, &s)| {
            let n = if solution.scenario == Scenario::Enhanced && idx == j_count - 1 {
                fp::<F>(LADDER_CAP) * vx
            } else {
                F::one() / (F::one() / s - F::one() / vx)
            };
            SpdMatrix::from_rows(&[vec![n]])
        })
        .collect::<Result<_>>()?;
    AuxiliaryLadder::new(covs, solution.channel.profile())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::bound_objective;
    use crate::problem::group_weights;

    fn spd1(x: f64) -> SpdMatrix<f64> {
        SpdMatrix::from_rows(&[vec![x]]).unwrap()
    }

    fn instance(d: &[f64], d0: f64, beta: &[f64]) -> (ScalarInstance<f64>, WeightProfile<f64>) {
        let profile = group_weights(beta).unwrap();
        let inst = ProblemInstance::new(
            spd1(1.0),
            spd1(d0),
            d.iter().map(|&x| spd1(x)).collect(),
        )
        .unwrap();
        (ScalarInstance::from_problem(&inst, &profile).unwrap(), profile)
    }

    #[test]
    fn chain_recursion_matches_hand_rationals() {
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], 0.15, &[3.0, 2.0, 1.0]);
        match chain_solve(&inst, &profile, 0.1) {
            ChainEval::Feasible(p) => {
                assert!((p.uk[0] - 0.45).abs() < 1e-15);
                assert!((p.sigma2[1] - 9.0 / 35.0).abs() < 1e-15);
                assert!((p.uk[1] - 171.0 / 875.0).abs() < 1e-15);
            }
            ChainEval::Infeasible { stage } => panic!("infeasible at stage {stage}"),
        }
    }

    #[test]
    fn chain_equal_noise_closed_form() {
        let (inst, profile) = instance(&[0.5, 0.5], 1.0 / 6.0, &[1.0, 1.0]);
        match chain_solve(&inst, &profile, 0.6) {
            ChainEval::Feasible(p) => assert!((p.uk[0] - 0.2).abs() < 1e-15),
            ChainEval::Infeasible { .. } => panic!("feasible point rejected"),
        }
    }

    #[test]
    fn chain_reports_failing_stage() {
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], 0.15, &[3.0, 2.0, 1.0]);
        match chain_solve(&inst, &profile, 0.5) {
            ChainEval::Infeasible { stage } => assert_eq!(stage, 2),
            ChainEval::Feasible(_) => panic!("infeasible point accepted"),
        }
        match chain_solve(&inst, &profile, -0.1) {
            ChainEval::Infeasible { stage } => assert_eq!(stage, 1),
            ChainEval::Feasible(_) => panic!("negative leading value accepted"),
        }
    }

    #[test]
    fn bisection_hits_known_roots() {
        let (inst, profile) = instance(&[0.5, 0.5], 1.0 / 6.0, &[1.0, 1.0]);
        let (s1, ladder) = bisect_sigma1(&inst, &profile, 1e-12).unwrap();
        assert!((s1 - 0.6).abs() < 1e-10);
        assert_eq!(ladder.sigma2.len(), 1);
        assert!(ladder.lambda == 0.0);

        // three descriptions, target from the hand-solved chain
        let d0 = 1.0 / (1.0 + 875.0 / 171.0);
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], d0, &[3.0, 2.0, 1.0]);
        let (s1, _) = bisect_sigma1(&inst, &profile, 1e-12).unwrap();
        assert!((s1 - 0.1).abs() < 1e-8, "root {s1}");
    }

    #[test]
    fn bisection_rejects_loose_targets() {
        let (inst, profile) = instance(&[0.5, 0.5], 0.4, &[1.0, 1.0]);
        assert!(matches!(
            bisect_sigma1(&inst, &profile, 1e-12),
            Err(Error::BracketingFailure { .. })
        ));
    }

    #[test]
    fn solve_loose_central_corner() {
        let (inst, profile) = instance(&[0.5, 0.5], 0.4, &[1.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        assert_eq!(sol.scenario, Scenario::LooseCentral);
        assert!((sol.value - 2.0f64.ln()).abs() < 1e-14);
        assert!((sol.rates.get(0) - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        assert!((sol.rates.get(1) - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        assert!((inst.loose_central_distortion() - 1.0 / 3.0).abs() < 1e-15);
        assert!(inst.loose_central_distortion() <= inst.d0);
        assert!(sol.ladder.sigma2.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn solve_interior_closed_form() {
        let (inst, profile) = instance(&[0.5, 0.5], 1.0 / 6.0, &[1.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        assert_eq!(sol.scenario, Scenario::Interior);
        assert!((sol.ladder.sigma2[0] - 0.6).abs() < 1e-10);
        assert!((sol.value - 0.5 * 6.25f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn solve_interior_two_groups_certified_by_bound() {
        let d0 = 1.0 / (1.0 + 875.0 / 171.0);
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], d0, &[3.0, 2.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        assert_eq!(sol.scenario, Scenario::Interior);
        let prob = ProblemInstance::new(
            spd1(1.0),
            spd1(d0),
            vec![spd1(0.5), spd1(0.5), spd1(0.5)],
        )
        .unwrap();
        let lad = induced_ladder(&sol).unwrap();
        let certified = bound_objective(&prob, &profile, &lad).unwrap();
        assert!(
            (certified - sol.value).abs() < 1e-9,
            "bound {certified} vs value {}",
            sol.value
        );
        assert!((lad.cov(1).get(0, 0) - 1.0 / 9.0).abs() < 1e-9);
        assert!((lad.cov(2).get(0, 0) - 9.0 / 26.0).abs() < 1e-8);
        assert!(kkt_residual(&inst, &profile, &sol.ladder).unwrap() < 1e-8);
    }

    #[test]
    fn solve_enhanced_boundary() {
        let (inst, profile) = instance(&[0.5, 0.9], 1.0 / 3.0, &[2.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        assert_eq!(sol.scenario, Scenario::Enhanced);
        assert_eq!(sol.ladder.sigma2[0], 1.0);
        assert_eq!(sol.ladder.uk[0], 0.5);
        assert!((sol.ladder.lambda - 1.0 / 15.0).abs() < 1e-9);
        assert!((sol.channel.noise(1).get(0, 0) - 5.0).abs() < 1e-9);
        assert!((sol.value - 0.5 * 6.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn increment_objective_is_stationary_at_the_solution() {
        let d0 = 1.0 / (1.0 + 875.0 / 171.0);
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], d0, &[3.0, 2.0, 1.0]);
        let y = [0.1, 9.0 / 35.0 - 0.1];
        let f0 = f_objective(&inst, &profile, &y).unwrap();
        assert!(f0.is_finite());
        let h = 1e-6;
        for i in 0..2 {
            let mut up = y;
            up[i] += h;
            let mut dn = y;
            dn[i] -= h;
            let grad = (f_objective(&inst, &profile, &up).unwrap()
                - f_objective(&inst, &profile, &dn).unwrap())
                / (2.0 * h);
            assert!(grad.abs() < 1e-5, "gradient {grad} in coordinate {i}");
        }
    }

    #[test]
    fn stationarity_residual_flags_perturbations() {
        let d0 = 1.0 / (1.0 + 875.0 / 171.0);
        let (inst, profile) = instance(&[0.5, 0.5, 0.5], d0, &[3.0, 2.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        let mut bent = sol.ladder.clone();
        bent.sigma2[0] += 1e-4;
        let r = kkt_residual(&inst, &profile, &bent).unwrap();
        assert!(r > 1e-5, "perturbed residual {r}");
    }

    #[test]
    fn induced_ladder_refuses_loose_central() {
        let (inst, profile) = instance(&[0.5, 0.5], 0.4, &[1.0, 1.0]);
        let sol = solve(&inst, &profile).unwrap();
        assert!(matches!(
            induced_ladder(&sol),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn scalar_extraction_sorts_by_weight() {
        let profile = group_weights(&[1.0, 2.0]).unwrap();
        let prob = ProblemInstance::new(
            spd1(1.0),
            spd1(0.1),
            vec![spd1(0.5), spd1(0.25)],
        )
        .unwrap();
        let inst = ScalarInstance::from_problem(&prob, &profile).unwrap();
        assert_eq!(inst.d, vec![0.25, 0.5]);
        assert!((inst.k[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((inst.k[1] - 1.0).abs() < 1e-15);
        assert!((inst.k_target - 1.0 / 9.0).abs() < 1e-15);
        assert!((inst.k_up - 0.25).abs() < 1e-15);
    }
}
