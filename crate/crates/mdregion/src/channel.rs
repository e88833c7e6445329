//! Additive Gaussian test channels with layered description correlations.
//!
//! A channel adds noise `w_l` to the source to form description `l`. The
//! noises have per-description covariances and a layered cross-correlation
//! structure: within the sorted description order, the correlation block
//! between a description in weight group `j` and every earlier description
//! is the same matrix, `-A_j`. The expanded covariance of the stacked noise
//! vector must be positive definite for the channel to exist; subsetting
//! that covariance yields the effective noise seen by a receiver that
//! combines several descriptions, and from it distortions and achievable
//! rates follow.
//!
//! Descriptions are indexed in sorted (descending-weight) order throughout
//! this module.

use crate::error::{Error, Result};
use crate::linalg::{fp, Scalar, SpdMatrix};
use crate::problem::{ProblemInstance, RatePoint, WeightProfile};

/// A layered Gaussian test channel.
#[derive(Debug, Clone)]
pub struct TestChannel<F> {
    noise: Vec<SpdMatrix<F>>,
    correlations: Vec<SpdMatrix<F>>,
    profile: WeightProfile<F>,
    full_cov: SpdMatrix<F>,
}

impl<F: Scalar> TestChannel<F> {
    /// Builds a channel from per-description noise covariances (sorted
    /// order), one correlation block per weight group, and the profile that
    /// defines the groups. Checks every noise covariance for positive
    /// definiteness, the scaled correlation chain
    /// `0 < a_1 A_1 < a_2 A_2 < ...` (all-zero correlations are the one
    /// allowed exception), and positive definiteness of the expanded
    /// covariance.
    pub fn new(
        noise: Vec<SpdMatrix<F>>,
        correlations: Vec<SpdMatrix<F>>,
        profile: WeightProfile<F>,
    ) -> Result<Self> {
        let l = profile.descriptions();
        let j_count = profile.group_count();
        if noise.len() != l {
            return Err(Error::LengthMismatch {
                what: "channel noise covariances",
                expected: l,
                found: noise.len(),
            });
        }
        if correlations.len() != j_count {
            return Err(Error::LengthMismatch {
                what: "channel correlation blocks",
                expected: j_count,
                found: correlations.len(),
            });
        }
        let n = noise[0].dim();
        for m in noise.iter().chain(correlations.iter()) {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    what: "channel block",
                    expected: n,
                    found: m.dim(),
                });
            }
        }
        for k in &noise {
            if k.cholesky().is_err() {
                return Err(Error::NotPositiveDefinite {
                    what: "channel noise covariance",
                });
            }
        }
        let all_zero = correlations.iter().all(|a| a.as_matrix().max_abs() == F::zero());
        if !all_zero {
            let mut prev: Option<SpdMatrix<F>> = None;
            for (idx, a) in correlations.iter().enumerate() {
                let scaled = a.scale(profile.group_weight(idx + 1));
                let gap = match &prev {
                    None => scaled.min_eigenvalue(),
                    Some(p) => scaled.sub(p)?.min_eigenvalue(),
                };
                if gap <= F::zero() {
                    return Err(Error::OrderingViolation {
                        what: "weighted correlation blocks must increase strictly",
                    });
                }
                prev = Some(scaled);
            }
        }
        let full_cov = assemble_full_cov(&noise, &correlations, &profile)?;
        if full_cov.cholesky().is_err() {
            return Err(Error::NotPositiveDefinite {
                what: "expanded channel covariance",
            });
        }
        Ok(TestChannel {
            noise,
            correlations,
            profile,
            full_cov,
        })
    }

    pub fn dim(&self) -> usize {
        self.noise[0].dim()
    }

    pub fn descriptions(&self) -> usize {
        self.noise.len()
    }

    pub fn noise(&self, l: usize) -> &SpdMatrix<F> {
        &self.noise[l]
    }

    pub fn noise_covariances(&self) -> &[SpdMatrix<F>] {
        &self.noise
    }

    pub fn correlation(&self, j: usize) -> &SpdMatrix<F> {
        &self.correlations[j - 1]
    }

    pub fn correlations(&self) -> &[SpdMatrix<F>] {
        &self.correlations
    }

    pub fn profile(&self) -> &WeightProfile<F> {
        &self.profile
    }

    /// Expanded covariance of the stacked noise vector, `L*N` square.
    pub fn full_covariance(&self) -> &SpdMatrix<F> {
        &self.full_cov
    }

    /// Effective noise covariance seen when the descriptions in `subset`
    /// are combined by a joint MMSE receiver: the inverse of the
    /// all-blocks sum of the inverted sub-covariance. A singleton subset
    /// returns that description's noise covariance unchanged.
    pub fn effective_noise(&self, subset: &[usize]) -> Result<SpdMatrix<F>> {
        let idx = self.checked_subset(subset)?;
        if idx.len() == 1 {
            return Ok(self.noise[idx[0]].clone());
        }
        let n = self.dim();
        let rows: Vec<usize> = idx
            .iter()
            .flat_map(|&i| (i * n..(i + 1) * n).collect::<Vec<_>>())
            .collect();
        let sub = self.full_cov.principal_submatrix(&rows)?;
        let inv = sub
            .cholesky()
            .map_err(|_| Error::SingularSubmatrix {
                what: "effective noise subset",
            })?
            .inverse()?;
        let s = idx.len();
        let mut acc = SpdMatrix::zeros(n).to_matrix();
        for p in 0..s {
            for q in 0..s {
                for r in 0..n {
                    for c in 0..n {
                        let v = acc.get(r, c) + inv.get(p * n + r, q * n + c);
                        acc.set(r, c, v);
                    }
                }
            }
        }
        let summed = SpdMatrix::from_matrix(&acc)?;
        summed
            .cholesky()
            .map_err(|_| Error::SingularSubmatrix {
                what: "effective noise block sum",
            })?
            .inverse()
    }

    fn checked_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        if subset.is_empty() {
            return Err(Error::LengthMismatch {
                what: "description subset",
                expected: 1,
                found: 0,
            });
        }
        let mut idx = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != subset.len() {
            return Err(Error::DomainError {
                what: "description subset contains duplicates".into(),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.descriptions()) {
            return Err(Error::DimensionMismatch {
                what: "description subset index",
                expected: self.descriptions(),
                found: bad,
            });
        }
        Ok(idx)
    }

    /// Minimum sum rate (nats) over the descriptions in `subset` that this
    /// channel supports: half of
    /// `sum_l log|Kx + K_l| - log|K_subset|`.
    pub fn subset_rate_bound(&self, source_cov: &SpdMatrix<F>, subset: &[usize]) -> Result<F> {
        let idx = self.checked_subset(subset)?;
        let n = self.dim();
        if source_cov.dim() != n {
            return Err(Error::DimensionMismatch {
                what: "source covariance",
                expected: n,
                found: source_cov.dim(),
            });
        }
        let mut acc = F::zero();
        for &i in &idx {
            acc = acc + source_cov.add(&self.noise[i])?.logdet()?;
        }
        let rows: Vec<usize> = idx
            .iter()
            .flat_map(|&i| (i * n..(i + 1) * n).collect::<Vec<_>>())
            .collect();
        let sub = self.full_cov.principal_submatrix(&rows)?;
        let sub_logdet = sub.logdet().map_err(|_| Error::SingularSubmatrix {
            what: "subset rate bound",
        })?;
        Ok(fp::<F>(0.5) * (acc - sub_logdet))
    }

    /// Greedy vertex of the achievable region for the sorted description
    /// order: description 1 pays its own bound, each later description pays
    /// the increment of the prefix bound.
    pub fn vertex_rates(&self, source_cov: &SpdMatrix<F>) -> Result<RatePoint<F>> {
        let l = self.descriptions();
        let mut rates = Vec::with_capacity(l);
        let mut prev = F::zero();
        let mut prefix: Vec<usize> = Vec::with_capacity(l);
        for i in 0..l {
            prefix.push(i);
            let b = self.subset_rate_bound(source_cov, &prefix)?;
            rates.push(b - prev);
            prev = b;
        }
        RatePoint::new(rates)
    }

    /// Distortion at a receiver observing the descriptions in `subset`.
    pub fn received_distortion(
        &self,
        source_cov: &SpdMatrix<F>,
        subset: &[usize],
    ) -> Result<SpdMatrix<F>> {
        mmse_distortion(source_cov, &self.effective_noise(subset)?)
    }

    /// Residual of the layered effective-noise recursion. For each group
    /// prefix, the inverse of (prefix effective noise + correlation) must
    /// equal the previous prefix's matching term plus the per-description
    /// inverses of that group. The left sides are computed independently
    /// from the expanded covariance, so this doubles as a consistency check
    /// between the two paths.
    pub fn fixedpoint_residual(&self) -> Result<F> {
        let mut worst = F::zero();
        for j in 1..=self.profile.group_count() {
            let a_j = &self.correlations[j - 1];
            let prefix: Vec<usize> = (0..self.profile.prefix_len(j)).collect();
            let lhs = self.effective_noise(&prefix)?.add(a_j)?.inverse()?;
            let mut rhs = if j == 1 {
                SpdMatrix::zeros(self.dim())
            } else {
                let prev: Vec<usize> = (0..self.profile.prefix_len(j - 1)).collect();
                self.effective_noise(&prev)?.add(a_j)?.inverse()?
            };
            for i in self.profile.prefix_len(j - 1)..self.profile.prefix_len(j) {
                rhs = rhs.add(&self.noise[i].add(a_j)?.inverse()?)?;
            }
            worst = worst.max(lhs.max_abs_diff(&rhs)?);
        }
        Ok(worst)
    }

    /// Residual of the layer-to-layer proportionality condition that an
    /// optimal channel satisfies between consecutive correlation blocks.
    /// Defined for two or more groups.
    pub fn proportionality_residual(&self, source_cov: &SpdMatrix<F>) -> Result<F> {
        let j_count = self.profile.group_count();
        if j_count < 2 {
            return Err(Error::UnsupportedGroupCount {
                found: j_count,
                what: "layer proportionality",
            });
        }
        if source_cov.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "source covariance",
                expected: self.dim(),
                found: source_cov.dim(),
            });
        }
        let mut worst = F::zero();
        for j in 1..j_count {
            let alpha_j = self.profile.group_weight(j);
            let alpha_next = self.profile.group_weight(j + 1);
            let prefix: Vec<usize> = (0..self.profile.prefix_len(j)).collect();
            let en = self.effective_noise(&prefix)?;
            let t1 = self.correlations[j - 1]
                .add(&en)?
                .inverse()?
                .scale(alpha_j);
            let t2 = en.inverse()?.scale(alpha_j - alpha_next);
            let t3 = self.correlations[j]
                .add(&en)?
                .inverse()?
                .scale(alpha_next);
            let residual = t1.sub(&t2)?.sub(&t3)?.as_matrix().max_abs();
            worst = worst.max(residual);
        }
        Ok(worst)
    }
}

fn assemble_full_cov<F: Scalar>(
    noise: &[SpdMatrix<F>],
    correlations: &[SpdMatrix<F>],
    profile: &WeightProfile<F>,
) -> Result<SpdMatrix<F>> {
    let l = noise.len();
    let n = noise[0].dim();
    let mut full = SpdMatrix::zeros(l * n).to_matrix();
    let group_of = |idx: usize| -> usize {
        (1..=profile.group_count())
            .find(|&j| idx < profile.prefix_len(j))
            .expect("index within profile")
    };
    for p in 0..l {
        for q in 0..l {
            for r in 0..n {
                for c in 0..n {
                    let v = if p == q {
                        noise[p].get(r, c)
                    } else {
                        // the later description's group decides the block
                        let j = group_of(p.max(q));
                        -correlations[j - 1].get(r, c)
                    };
                    full.set(p * n + r, q * n + c, v);
                }
            }
        }
    }
    SpdMatrix::from_matrix(&full)
}

/// MMSE distortion of a Gaussian source observed through additive noise
/// with the given effective covariance: `(Kx^-1 + en^-1)^-1`.
pub fn mmse_distortion<F: Scalar>(
    source_cov: &SpdMatrix<F>,
    effective_noise: &SpdMatrix<F>,
) -> Result<SpdMatrix<F>> {
    if source_cov.dim() != effective_noise.dim() {
        return Err(Error::DimensionMismatch {
            what: "MMSE distortion",
            expected: source_cov.dim(),
            found: effective_noise.dim(),
        });
    }
    source_cov
        .inverse()?
        .add(&effective_noise.inverse()?)?
        .inverse()
}

/// Converts distortion constraints into the noise covariances of the test
/// channel that meets them with equality: `K_l = (D_l^-1 - Kx^-1)^-1` in
/// sorted description order, plus the analogous effective-noise target for
/// the central constraint. A constraint that touches the source covariance
/// has no finite noise; the resulting error reports the offending original
/// description index, or `L` for the central constraint.
pub fn distortion_to_noise<F: Scalar>(
    inst: &ProblemInstance<F>,
    profile: &WeightProfile<F>,
) -> Result<(Vec<SpdMatrix<F>>, SpdMatrix<F>)> {
    let kx_inv = inst.source_cov().inverse()?;
    let convert = |d: &SpdMatrix<F>, index: usize| -> Result<SpdMatrix<F>> {
        let gap = d.inverse()?.sub(&kx_inv)?;
        gap.cholesky()
            .map_err(|_| Error::DegenerateDistortion { index })?
            .inverse()
    };
    let mut noise = Vec::with_capacity(inst.descriptions());
    for &orig in profile.permutation() {
        noise.push(convert(inst.side_distortion(orig), orig)?);
    }
    let target = convert(inst.central_distortion(), inst.descriptions())?;
    Ok((noise, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::group_weights;

    fn spd1(x: f64) -> SpdMatrix<f64> {
        SpdMatrix::from_rows(&[vec![x]]).unwrap()
    }

    fn scalar_channel(k: &[f64], a: &[f64], beta: &[f64]) -> Result<TestChannel<f64>> {
        let profile = group_weights(beta).unwrap();
        TestChannel::new(
            k.iter().map(|&x| spd1(x)).collect(),
            a.iter().map(|&x| spd1(x)).collect(),
            profile,
        )
    }

    #[test]
    fn full_covariance_assembly() {
        let tc = scalar_channel(&[1.0, 1.0], &[0.6], &[1.0, 1.0]).unwrap();
        let kw = tc.full_covariance();
        assert_eq!(kw.get(0, 0), 1.0);
        assert_eq!(kw.get(0, 1), -0.6);
        assert!((kw.logdet().unwrap() - 0.64f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_expansion() {
        let err = scalar_channel(&[1.0, 1.0], &[1.1], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn rejects_broken_correlation_chain() {
        // second layer's weighted correlation must exceed the first's
        let err = scalar_channel(&[1.0, 1.0, 1.0], &[0.2, 0.3], &[3.0, 2.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::OrderingViolation { .. }));
        // 2*0.2 < 1*0.5 is fine
        assert!(scalar_channel(&[1.0, 1.0, 1.0], &[0.2, 0.5], &[3.0, 2.0, 1.0]).is_ok());
    }

    #[test]
    fn effective_noise_values() {
        let tc = scalar_channel(&[1.0, 1.0], &[0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(tc.effective_noise(&[0]).unwrap().get(0, 0), 1.0);
        assert!((tc.effective_noise(&[0, 1]).unwrap().get(0, 0) - 0.5).abs() < 1e-15);
        let tc = scalar_channel(&[1.0, 1.0], &[0.5], &[1.0, 1.0]).unwrap();
        assert!((tc.effective_noise(&[0, 1]).unwrap().get(0, 0) - 0.25).abs() < 1e-15);
        assert!(tc.effective_noise(&[]).is_err());
        assert!(tc.effective_noise(&[0, 0]).is_err());
        assert!(tc.effective_noise(&[2]).is_err());
    }

    #[test]
    fn mmse_distortion_values() {
        let one = spd1(1.0);
        assert!((mmse_distortion(&one, &spd1(1.0)).unwrap().get(0, 0) - 0.5).abs() < 1e-15);
        assert!((mmse_distortion(&one, &spd1(0.25)).unwrap().get(0, 0) - 0.2).abs() < 1e-15);
        let kx = SpdMatrix::<f64>::diagonal(&[1.0, 2.0]);
        let en = SpdMatrix::<f64>::diagonal(&[1.0, 2.0]);
        let d = mmse_distortion(&kx, &en).unwrap();
        assert!((d.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((d.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distortion_to_noise_values() {
        let inst = ProblemInstance::new(
            spd1(1.0),
            spd1(1.0 / 6.0),
            vec![spd1(0.5), spd1(0.5)],
        )
        .unwrap();
        let profile = group_weights(&[1.0, 1.0]).unwrap();
        let (noise, target) = distortion_to_noise(&inst, &profile).unwrap();
        assert!((noise[0].get(0, 0) - 1.0).abs() < 1e-14);
        assert!((noise[1].get(0, 0) - 1.0).abs() < 1e-14);
        assert!((target.get(0, 0) - 0.2).abs() < 1e-14);

        let degenerate = ProblemInstance::new_unchecked(
            spd1(1.0),
            spd1(0.25),
            vec![spd1(1.0), spd1(0.5)],
        );
        let err = distortion_to_noise(&degenerate, &profile).unwrap_err();
        assert_eq!(err, Error::DegenerateDistortion { index: 0 });
    }

    #[test]
    fn subset_rate_bound_values() {
        let kx = spd1(1.0);
        let tc = scalar_channel(&[1.0, 1.0], &[0.6], &[1.0, 1.0]).unwrap();
        let b1 = tc.subset_rate_bound(&kx, &[0]).unwrap();
        assert!((b1 - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        let b12 = tc.subset_rate_bound(&kx, &[0, 1]).unwrap();
        assert!((b12 - 0.5 * 6.25f64.ln()).abs() < 1e-14);
        // uncorrelated noises make the bound additive
        let tc0 = scalar_channel(&[1.0, 1.0], &[0.0], &[1.0, 1.0]).unwrap();
        let sum = tc0.subset_rate_bound(&kx, &[0]).unwrap() * 2.0;
        assert!((tc0.subset_rate_bound(&kx, &[0, 1]).unwrap() - sum).abs() < 1e-14);
    }

    #[test]
    fn vertex_rates_and_permutation() {
        let kx = spd1(1.0);
        let tc = scalar_channel(&[1.0, 1.0], &[0.6], &[1.0, 1.0]).unwrap();
        let v = tc.vertex_rates(&kx).unwrap();
        assert!((v.get(0) - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        assert!((v.get(1) - 0.5 * 3.125f64.ln()).abs() < 1e-14);
        // distinct noises in the two possible orders: prefix structure moves
        // with the order, the total stays the number shared by both
        let a = scalar_channel(&[1.0, 2.0], &[0.4], &[1.0, 1.0]).unwrap();
        let b = scalar_channel(&[2.0, 1.0], &[0.4], &[1.0, 1.0]).unwrap();
        let va = a.vertex_rates(&kx).unwrap();
        let vb = b.vertex_rates(&kx).unwrap();
        assert!((va.get(0) - 0.5 * 2.0f64.ln()).abs() < 1e-14);
        assert!((vb.get(0) - 0.5 * 1.5f64.ln()).abs() < 1e-14);
        let ta = va.get(0) + va.get(1);
        let tb = vb.get(0) + vb.get(1);
        assert!((ta - tb).abs() < 1e-14);
    }

    #[test]
    fn fixedpoint_holds_on_layered_channel() {
        // two groups: correlations 0.1 and 9/35, three unit noises
        let tc = scalar_channel(&[1.0, 1.0, 1.0], &[0.1, 9.0 / 35.0], &[3.0, 2.0, 1.0]).unwrap();
        let en = tc.effective_noise(&[0, 1]).unwrap();
        assert!((en.get(0, 0) - 0.45).abs() < 1e-14);
        assert!(tc.fixedpoint_residual().unwrap() < 1e-12);
        // uncorrelated channel satisfies the recursion too
        let tc0 = scalar_channel(&[1.0, 2.0], &[0.0], &[1.0, 1.0]).unwrap();
        assert!(tc0.fixedpoint_residual().unwrap() < 1e-15);
    }

    #[test]
    fn proportionality_at_optimal_layering() {
        let kx = spd1(1.0);
        let tc = scalar_channel(&[1.0, 1.0, 1.0], &[0.1, 9.0 / 35.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!(tc.proportionality_residual(&kx).unwrap() < 1e-12);
        // perturbed second layer breaks it
        let tc2 = scalar_channel(&[1.0, 1.0, 1.0], &[0.1, 0.27], &[3.0, 2.0, 1.0]).unwrap();
        assert!(tc2.proportionality_residual(&kx).unwrap() > 1e-4);
        let tc1 = scalar_channel(&[1.0, 1.0], &[0.3], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            tc1.proportionality_residual(&kx),
            Err(Error::UnsupportedGroupCount { .. })
        ));
    }

    #[test]
    fn received_distortion_improves_with_more_descriptions() {
        let kx = spd1(1.0);
        let tc = scalar_channel(&[1.0, 0.8, 1.2], &[0.1, 0.3], &[3.0, 2.0, 1.0]).unwrap();
        let d1 = tc.received_distortion(&kx, &[0]).unwrap();
        let d12 = tc.received_distortion(&kx, &[0, 1]).unwrap();
        let d123 = tc.received_distortion(&kx, &[0, 1, 2]).unwrap();
        assert!(d12.get(0, 0) < d1.get(0, 0));
        assert!(d123.get(0, 0) < d12.get(0, 0));
    }
}
