//! Problem data: source statistics, distortion constraints, and the grouped
//! weight profile that drives every weighted-sum-rate computation.
//!
//! A problem instance fixes the source covariance, one central distortion
//! constraint, and one side distortion constraint per description. Weights
//! enter separately: a weighted sum of description rates is specified by a
//! strictly positive weight vector, which is sorted in descending order and
//! grouped into runs of equal value before any bound is evaluated. All of
//! the layered machinery downstream is indexed by those groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fp, loewner_less, Scalar, SpdMatrix};

/// One run of equal weights after sorting: the shared value and how many
/// sorted descriptions carry it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGroup<F> {
    pub weight: F,
    pub count: usize,
}

/// Sorted-and-grouped weight vector.
///
/// Sorting is descending with ties broken by the original index, and the
/// grouping is applied to the modified multiset in which the largest weight
/// has been replaced by a second copy of the runner-up. The excess of the
/// largest weight over the runner-up is kept separately in `alpha0`. By
/// construction the first group has multiplicity at least two and the group
/// values are strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile<F> {
    beta_sorted: Vec<F>,
    permutation: Vec<usize>,
    alpha0: F,
    groups: Vec<WeightGroup<F>>,
    prefix: Vec<usize>,
}

/// Absolute tolerance under which two weights are considered tied.
const TIE_TOL: f64 = 1e-12;

/// Sorts a weight vector and groups it as described on [`WeightProfile`].
pub fn group_weights<F: Scalar>(beta: &[F]) -> Result<WeightProfile<F>> {
    if beta.len() < 2 {
        return Err(Error::LengthMismatch {
            what: "weight vector",
            expected: 2,
            found: beta.len(),
        });
    }
    for (i, &b) in beta.iter().enumerate() {
        if !(b > F::zero()) || !b.is_finite() {
            return Err(Error::NonPositiveWeight { index: i });
        }
    }
    let mut order: Vec<usize> = (0..beta.len()).collect();
    order.sort_by(|&i, &j| {
        beta[j]
            .partial_cmp(&beta[i])
            .expect("weights are finite")
            .then(i.cmp(&j))
    });
    let beta_sorted: Vec<F> = order.iter().map(|&i| beta[i]).collect();
    let alpha0 = beta_sorted[0] - beta_sorted[1];

    // Grouping runs over (b2, b2, b3, ..., bL): the top weight participates
    // only through alpha0.
    let mut modified = beta_sorted.clone();
    modified[0] = beta_sorted[1];
    let tie = fp::<F>(TIE_TOL);
    let mut groups: Vec<WeightGroup<F>> = Vec::new();
    for &w in &modified {
        match groups.last_mut() {
            Some(g) if g.weight - w <= tie => g.count += 1,
            _ => groups.push(WeightGroup { weight: w, count: 1 }),
        }
    }
    let mut prefix = Vec::with_capacity(groups.len());
    let mut acc = 0;
    for g in &groups {
        acc += g.count;
        prefix.push(acc);
    }
    debug_assert!(groups[0].count >= 2);
    debug_assert_eq!(acc, beta.len());
    Ok(WeightProfile {
        beta_sorted,
        permutation: order,
        alpha0,
        groups,
        prefix,
    })
}

impl<F: Scalar> WeightProfile<F> {
    /// Number of descriptions `L`.
    pub fn descriptions(&self) -> usize {
        self.beta_sorted.len()
    }

    /// Number of weight groups.
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn alpha0(&self) -> F {
        self.alpha0
    }

    pub fn groups(&self) -> &[WeightGroup<F>] {
        &self.groups
    }

    /// Weight of group `j` (1-based).
    pub fn group_weight(&self, j: usize) -> F {
        self.groups[j - 1].weight
    }

    /// Multiplicity of group `j` (1-based).
    pub fn group_size(&self, j: usize) -> usize {
        self.groups[j - 1].count
    }

    /// Number of sorted descriptions covered by groups `1..=j`; zero for
    /// `j = 0`.
    pub fn prefix_len(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.prefix[j - 1]
        }
    }

    /// Sorted weights, descending.
    pub fn beta_sorted(&self) -> &[F] {
        &self.beta_sorted
    }

    /// Maps sorted position to the original description index.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Weighted sum of a rate vector given in sorted description order.
    /// Equals the plain dot product with the unsorted weights whenever the
    /// ties grouped together are exact.
    pub fn weighted_sum(&self, rates_sorted: &[F]) -> Result<F> {
        let l = self.descriptions();
        if rates_sorted.len() != l {
            return Err(Error::LengthMismatch {
                what: "rate vector",
                expected: l,
                found: rates_sorted.len(),
            });
        }
        let mut total = self.alpha0 * rates_sorted[0];
        let mut pos = 0;
        for g in &self.groups {
            for _ in 0..g.count {
                total = total + g.weight * rates_sorted[pos];
                pos += 1;
            }
        }
        Ok(total)
    }

    /// Reorders a sorted-index vector back to original description order.
    pub fn to_original_order(&self, sorted_vals: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); sorted_vals.len()];
        for (pos, &orig) in self.permutation.iter().enumerate() {
            out[orig] = sorted_vals[pos];
        }
        out
    }
}

/// Nonnegative finite rate vector, one entry per description.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint<F> {
    rates: Vec<F>,
}

impl<F: Scalar> RatePoint<F> {
    /// Accepts nonnegative finite rates; entries above `-1e-12` are clamped
    /// to zero so that exact-boundary arithmetic noise does not reject a
    /// legitimate vertex.
    pub fn new(rates: Vec<F>) -> Result<Self> {
        let clamp = fp::<F>(-1e-12);
        let mut out = Vec::with_capacity(rates.len());
        for (i, &r) in rates.iter().enumerate() {
            if !r.is_finite() || r < clamp {
                return Err(Error::NegativeRate {
                    index: i,
                    value: r.to_f64().unwrap_or(f64::NAN),
                });
            }
            out.push(if r < F::zero() { F::zero() } else { r });
        }
        Ok(RatePoint { rates: out })
    }

    pub fn rates(&self) -> &[F] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn get(&self, i: usize) -> F {
        self.rates[i]
    }
}

/// Source covariance plus distortion constraints for `L` descriptions.
///
/// `side_distortions` is kept in the caller's description order; operations
/// that need the sorted order go through a [`WeightProfile`] permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<F> {
    source_cov: SpdMatrix<F>,
    central_distortion: SpdMatrix<F>,
    side_distortions: Vec<SpdMatrix<F>>,
}

impl<F: Scalar> ProblemInstance<F> {
    /// Validates and builds an instance. Requirements, each named in the
    /// error when violated: at least two descriptions; matching dimensions;
    /// positive definite source and distortions; every side distortion
    /// strictly below the source covariance; the central distortion no
    /// larger than any side distortion.
    pub fn new(
        source_cov: SpdMatrix<F>,
        central_distortion: SpdMatrix<F>,
        side_distortions: Vec<SpdMatrix<F>>,
    ) -> Result<Self> {
        let n = source_cov.dim();
        let l = side_distortions.len();
        if l < 2 {
            return Err(Error::InvalidInstance {
                what: format!("need at least 2 descriptions, got {l}"),
            });
        }
        if central_distortion.dim() != n {
            return Err(Error::InvalidInstance {
                what: "central distortion dimension differs from the source covariance".into(),
            });
        }
        if !source_cov.is_positive_definite() {
            return Err(Error::InvalidInstance {
                what: "source covariance must be positive definite".into(),
            });
        }
        if !central_distortion.is_positive_definite() {
            return Err(Error::InvalidInstance {
                what: "central distortion must be positive definite".into(),
            });
        }
        let tol = source_cov.pd_tolerance();
        for (i, d) in side_distortions.iter().enumerate() {
            if d.dim() != n {
                return Err(Error::InvalidInstance {
                    what: format!("side distortion {i} dimension differs from the source"),
                });
            }
            if !d.is_positive_definite() {
                return Err(Error::InvalidInstance {
                    what: format!("side distortion {i} must be positive definite"),
                });
            }
            if !loewner_less(d, &source_cov, tol)? {
                return Err(Error::InvalidInstance {
                    what: format!("side distortion {i} must lie strictly below the source covariance"),
                });
            }
            // central <= side, with a small slack so exact equality passes
            let slack = d.pd_tolerance();
            if d.sub(&central_distortion)?.min_eigenvalue() < -slack {
                return Err(Error::InvalidInstance {
                    what: format!("central distortion must not exceed side distortion {i}"),
                });
            }
        }
        Ok(ProblemInstance {
            source_cov,
            central_distortion,
            side_distortions,
        })
    }

    /// Builds without validation; boundary studies (for example a side
    /// distortion equal to the source covariance) are representable this
    /// way, so use with care.
    pub fn new_unchecked(
        source_cov: SpdMatrix<F>,
        central_distortion: SpdMatrix<F>,
        side_distortions: Vec<SpdMatrix<F>>,
    ) -> Self {
        ProblemInstance {
            source_cov,
            central_distortion,
            side_distortions,
        }
    }

    pub fn dim(&self) -> usize {
        self.source_cov.dim()
    }

    pub fn descriptions(&self) -> usize {
        self.side_distortions.len()
    }

    pub fn source_cov(&self) -> &SpdMatrix<F> {
        &self.source_cov
    }

    pub fn central_distortion(&self) -> &SpdMatrix<F> {
        &self.central_distortion
    }

    pub fn side_distortion(&self, l: usize) -> &SpdMatrix<F> {
        &self.side_distortions[l]
    }

    pub fn side_distortions(&self) -> &[SpdMatrix<F>] {
        &self.side_distortions
    }

    /// Side distortions reordered to the sorted description order of a
    /// weight profile.
    pub fn sorted_side_distortions(&self, profile: &WeightProfile<F>) -> Result<Vec<SpdMatrix<F>>> {
        if profile.descriptions() != self.descriptions() {
            return Err(Error::LengthMismatch {
                what: "weight profile",
                expected: self.descriptions(),
                found: profile.descriptions(),
            });
        }
        Ok(profile
            .permutation()
            .iter()
            .map(|&i| self.side_distortions[i].clone())
            .collect())
    }

    /// Minimum rate (nats) at which description `l` alone can meet its side
    /// distortion constraint: half the log-determinant ratio of source to
    /// distortion.
    pub fn min_single_description_rate(&self, l: usize) -> Result<F> {
        let half = fp::<F>(0.5);
        Ok(half * (self.source_cov.logdet()? - self.side_distortions[l].logdet()?))
    }
}

/// On-disk JSON schema: row-major matrices, one side distortion per
/// description, and the weight vector. The optional `K`/`A` fields carry an
/// explicit test channel (per-description noise covariances and one
/// correlation block per weight group) for channel-evaluation commands.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(rename = "Kx")]
    kx: Vec<Vec<f64>>,
    #[serde(rename = "D0")]
    d0: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<Vec<f64>>>,
    beta: Vec<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    k: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<Vec<f64>>>>,
}

/// A parsed instance file: the validated instance, its weight vector, and
/// any explicit channel matrices that were present.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: ProblemInstance<f64>,
    pub beta: Vec<f64>,
    pub channel_noise: Option<Vec<SpdMatrix<f64>>>,
    pub channel_corr: Option<Vec<SpdMatrix<f64>>>,
}

/// Parses and validates an instance from JSON text.
pub fn parse_instance_json(text: &str) -> Result<LoadedInstance> {
    let raw: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        what: e.to_string(),
    })?;
    let kx = SpdMatrix::from_rows(&raw.kx)?;
    let d0 = SpdMatrix::from_rows(&raw.d0)?;
    let d: Result<Vec<_>> = raw.d.iter().map(|m| SpdMatrix::from_rows(m)).collect();
    let d = d?;
    if raw.beta.len() != d.len() {
        return Err(Error::InvalidInstance {
            what: format!(
                "beta has {} entries but D lists {} distortions",
                raw.beta.len(),
                d.len()
            ),
        });
    }
    let instance = ProblemInstance::new(kx, d0, d)?;
    let parse_list = |ms: &Vec<Vec<Vec<f64>>>, what: &str, expected: usize| -> Result<Vec<SpdMatrix<f64>>> {
        if ms.len() != expected {
            return Err(Error::InvalidInstance {
                what: format!("{what} lists {} matrices, expected {expected}", ms.len()),
            });
        }
        ms.iter().map(|m| SpdMatrix::from_rows(m)).collect()
    };
    let channel_noise = match &raw.k {
        Some(ms) => Some(parse_list(ms, "K", instance.descriptions())?),
        None => None,
    };
    let channel_corr = match &raw.a {
        Some(ms) => {
            let profile = group_weights(&raw.beta)?;
            Some(parse_list(ms, "A", profile.group_count())?)
        }
        None => None,
    };
    Ok(LoadedInstance {
        instance,
        beta: raw.beta,
        channel_noise,
        channel_corr,
    })
}

/// Serializes an instance and weight vector back to the JSON schema.
pub fn instance_to_json(inst: &ProblemInstance<f64>, beta: &[f64]) -> String {
    let to_rows = |m: &SpdMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
            .collect()
    };
    let raw = InstanceFile {
        kx: to_rows(inst.source_cov()),
        d0: to_rows(inst.central_distortion()),
        d: inst.side_distortions().iter().map(to_rows).collect(),
        beta: beta.to_vec(),
        k: None,
        a: None,
    };
    serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_of_distinct_weights() {
        let p = group_weights(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.alpha0(), 1.0);
        assert_eq!(p.group_count(), 1);
        assert_eq!(p.group_weight(1), 1.0);
        assert_eq!(p.group_size(1), 3);
        assert_eq!(p.prefix_len(1), 3);
    }

    #[test]
    fn grouping_of_equal_pair() {
        let p = group_weights(&[1.0, 1.0]).unwrap();
        assert_eq!(p.alpha0(), 0.0);
        assert_eq!(p.group_count(), 1);
        assert_eq!(p.group_size(1), 2);
    }

    #[test]
    fn grouping_with_interior_tie() {
        let p = group_weights(&[3.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(p.alpha0(), 1.0);
        assert_eq!(p.group_count(), 2);
        assert_eq!(p.group_weight(1), 2.0);
        assert_eq!(p.group_size(1), 3);
        assert_eq!(p.group_weight(2), 1.0);
        assert_eq!(p.group_size(2), 1);
        assert_eq!(p.prefix_len(0), 0);
        assert_eq!(p.prefix_len(1), 3);
        assert_eq!(p.prefix_len(2), 4);
    }

    #[test]
    fn grouping_sorts_unsorted_input() {
        let p = group_weights(&[2.0, 5.0, 3.0]).unwrap();
        assert_eq!(p.beta_sorted(), &[5.0, 3.0, 2.0]);
        assert_eq!(p.permutation(), &[1, 2, 0]);
        assert_eq!(p.alpha0(), 2.0);
        assert_eq!(p.group_count(), 2);
        assert_eq!(p.group_size(1), 2);
    }

    #[test]
    fn grouping_rejects_bad_weights() {
        assert!(matches!(
            group_weights(&[1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1 })
        ));
        assert!(matches!(
            group_weights(&[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn weighted_sum_matches_dot_product() {
        let p = group_weights::<f64>(&[5.0, 3.0, 2.0]).unwrap();
        // grouped: 2*0.2 + 3*(0.2+0.4) + 2*0.6 = 3.4
        let v = p.weighted_sum(&[0.2, 0.4, 0.6]).unwrap();
        assert!((v - 3.4).abs() < 1e-15);

        let p = group_weights::<f64>(&[1.0, 1.0]).unwrap();
        assert!((p.weighted_sum(&[0.7, 0.5]).unwrap() - 1.2).abs() < 1e-15);

        let p = group_weights::<f64>(&[2.0, 2.0, 2.0]).unwrap();
        let v = p.weighted_sum(&[1.0, 1.5, 1.5]).unwrap();
        assert!((v - 8.0).abs() < 1e-15);
    }

    #[test]
    fn to_original_order_inverts_sort() {
        let p = group_weights(&[2.0, 5.0, 3.0]).unwrap();
        let back = p.to_original_order(&[10.0, 20.0, 30.0]);
        // sorted order is descriptions (1, 2, 0)
        assert_eq!(back, vec![30.0, 10.0, 20.0]);
    }

    fn unit_instance(d: &[f64], d0: f64) -> ProblemInstance<f64> {
        let side = d
            .iter()
            .map(|&x| SpdMatrix::from_rows(&[vec![x]]).unwrap())
            .collect();
        ProblemInstance::new(
            SpdMatrix::from_rows(&[vec![1.0]]).unwrap(),
            SpdMatrix::from_rows(&[vec![d0]]).unwrap(),
            side,
        )
        .unwrap()
    }

    #[test]
    fn min_single_rate_values() {
        let inst = unit_instance(&[0.5, 0.25], 0.2);
        let r0 = inst.min_single_description_rate(0).unwrap();
        assert!((r0 - 0.5 * 2.0f64.ln()).abs() < 1e-15);
        let r1 = inst.min_single_description_rate(1).unwrap();
        assert!((r1 - 0.5 * 4.0f64.ln()).abs() < 1e-15);
        // boundary: distortion equal to the source gives rate zero
        let boundary = ProblemInstance::new_unchecked(
            SpdMatrix::from_rows(&[vec![1.0]]).unwrap(),
            SpdMatrix::from_rows(&[vec![1.0]]).unwrap(),
            vec![
                SpdMatrix::from_rows(&[vec![1.0]]).unwrap(),
                SpdMatrix::from_rows(&[vec![1.0]]).unwrap(),
            ],
        );
        assert_eq!(boundary.min_single_description_rate(0).unwrap(), 0.0);
    }

    #[test]
    fn validation_names_the_violation() {
        let one = SpdMatrix::from_rows(&[vec![1.0]]).unwrap();
        let half = SpdMatrix::from_rows(&[vec![0.5]]).unwrap();
        let err = ProblemInstance::new(one.clone(), half.clone(), vec![one.clone(), half.clone()])
            .unwrap_err();
        assert!(err.to_string().contains("strictly below"));
        let err = ProblemInstance::new(one.clone(), half.clone(), vec![half.clone()]).unwrap_err();
        assert!(err.to_string().contains("at least 2"));
        let d_tiny = SpdMatrix::from_rows(&[vec![0.1]]).unwrap();
        let err =
            ProblemInstance::new(one, half, vec![d_tiny.clone(), d_tiny]).unwrap_err();
        assert!(err.to_string().contains("central"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let text = r#"{
            "Kx": [[1.0, 0.25], [0.25, 1.5]],
            "D0": [[0.125, 0.0], [0.0, 0.17]],
            "D": [[[0.5, 0.1], [0.1, 0.7]], [[0.55, 0.0], [0.0, 0.66]]],
            "beta": [2.0, 1.0]
        }"#;
        let loaded = parse_instance_json(text).unwrap();
        let json = instance_to_json(&loaded.instance, &loaded.beta);
        let reloaded = parse_instance_json(&json).unwrap();
        assert_eq!(loaded.instance, reloaded.instance);
        assert_eq!(loaded.beta, reloaded.beta);
        let json2 = instance_to_json(&reloaded.instance, &reloaded.beta);
        assert_eq!(json, json2);
    }

    #[test]
    fn json_errors_are_descriptive() {
        assert!(matches!(
            parse_instance_json("{"),
            Err(Error::Parse { .. })
        ));
        let bad = r#"{"Kx": [[1.0]], "D0": [[0.1]], "D": [[[0.5]], [[0.5]]], "beta": [1.0]}"#;
        let err = parse_instance_json(bad).unwrap_err();
        assert!(err.to_string().contains("beta"));
        let unknown = r#"{"Kx": [[1.0]], "D0": [[0.1]], "D": [[[0.5]], [[0.5]]], "beta": [1.0, 1.0], "extra": 1}"#;
        assert!(matches!(parse_instance_json(unknown), Err(Error::Parse { .. })));
    }
}
