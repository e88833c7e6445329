//! Numerical checks of the extremal entropy inequality that drives the
//! converse proof: a weighted difference of Gaussian conditional entropies
//! is maximized by a specific conditional covariance, with a closed-form
//! maximum. Both sides are evaluated exactly for jointly Gaussian data,
//! along with the diagonalizing-congruence cross-check of the right side.

use crate::error::{Error, Result};
use crate::linalg::{fp, Scalar, SpdMatrix};

/// Boundary floor for the determinant of the noise difference.
const BOUNDARY_EIG: f64 = 1e-12;

/// One weighted-entropy instance: weights `mu1 > mu2 > 0`, noise
/// covariances ordered as `0 < mu1*n1 < mu2*n2`, a conditional source
/// covariance `b`, and a block-repetition count.
#[derive(Debug, Clone)]
pub struct EpiInstance<F> {
    pub mu1: F,
    pub mu2: F,
    pub n1: SpdMatrix<F>,
    pub n2: SpdMatrix<F>,
    pub b: SpdMatrix<F>,
    pub reps: usize,
}

impl<F: Scalar> EpiInstance<F> {
    pub fn new(
        mu1: F,
        mu2: F,
        n1: SpdMatrix<F>,
        n2: SpdMatrix<F>,
        b: SpdMatrix<F>,
        reps: usize,
    ) -> Result<Self> {
        if !(mu1 > mu2 && mu2 > F::zero()) {
            return Err(Error::OrderingViolation {
                what: "entropy weights must satisfy mu1 > mu2 > 0",
            });
        }
        let n = n1.dim();
        if n2.dim() != n || b.dim() != n {
            return Err(Error::DimensionMismatch {
                what: "entropy instance covariance",
                expected: n,
                found: if n2.dim() != n { n2.dim() } else { b.dim() },
            });
        }
        if reps == 0 {
            return Err(Error::DomainError {
                what: "block-repetition count must be at least 1".to_string(),
            });
        }
        if n1.scale(mu1).cholesky().is_err() {
            return Err(Error::NotPositiveDefinite {
                what: "weighted first noise covariance",
            });
        }
        if !(n2.scale(mu2).sub(&n1.scale(mu1))?.min_eigenvalue() > F::zero()) {
            return Err(Error::OrderingViolation {
                what: "weighted noise covariances must increase strictly",
            });
        }
        if b.cholesky().is_err() {
            return Err(Error::NotPositiveDefinite {
                what: "conditional covariance",
            });
        }
        Ok(EpiInstance {
            mu1,
            mu2,
            n1,
            n2,
            b,
            reps,
        })
    }

    /// Skips validation; for probing behavior outside the invariants.
    pub fn new_unchecked(
        mu1: F,
        mu2: F,
        n1: SpdMatrix<F>,
        n2: SpdMatrix<F>,
        b: SpdMatrix<F>,
        reps: usize,
    ) -> Self {
        EpiInstance {
            mu1,
            mu2,
            n1,
            n2,
            b,
            reps,
        }
    }

    pub fn dim(&self) -> usize {
        self.n1.dim()
    }
}

/// Left side of the inequality for jointly Gaussian data: the weighted
/// combination of conditional entropies, where the dimension-dependent
/// constants cancel because the weights sum to zero.
pub fn epi_lhs_gaussian<F: Scalar>(inst: &EpiInstance<F>) -> Result<F> {
    let half = fp::<F>(0.5);
    let v = inst.mu2 * inst.b.add(&inst.n2)?.logdet()?
        - inst.mu1 * inst.b.add(&inst.n1)?.logdet()?
        + (inst.mu1 - inst.mu2) * inst.b.logdet()?;
    Ok(fp::<F>(inst.reps as f64) * half * v)
}

/// Right side of the inequality: the closed-form maximum, independent of
/// the conditional covariance. Degenerates to positive infinity as the
/// noise difference loses rank (the bound becomes vacuous there).
pub fn epi_rhs<F: Scalar>(inst: &EpiInstance<F>) -> Result<F> {
    let n_dim = fp::<F>(inst.dim() as f64);
    let half = fp::<F>(0.5);
    let diff = inst.n2.sub(&inst.n1)?;
    let min_eig = diff.min_eigenvalue();
    if min_eig <= -fp::<F>(BOUNDARY_EIG) {
        return Err(Error::NotPositiveDefinite {
            what: "difference of noise covariances",
        });
    }
    if min_eig < fp::<F>(BOUNDARY_EIG) {
        return Ok(F::infinity());
    }
    let ld_diff = diff.logdet()?;
    let gap = inst.mu1 - inst.mu2;
    let first = inst.mu1
        * half
        * (n_dim * gap.ln() + inst.n2.logdet()? - n_dim * inst.mu1.ln() - ld_diff);
    let second = inst.mu2
        * half
        * (n_dim * gap.ln() + inst.n1.logdet()? - n_dim * inst.mu2.ln() - ld_diff);
    Ok(fp::<F>(inst.reps as f64) * (first - second))
}

/// The conditional covariance achieving equality:
/// `(mu1-mu2) * n2 * inv(mu2*n2 - mu1*n1) * n1`, symmetrized.
pub fn equality_covariance<F: Scalar>(
    mu1: F,
    mu2: F,
    n1: &SpdMatrix<F>,
    n2: &SpdMatrix<F>,
) -> Result<SpdMatrix<F>> {
    if !(mu1 > mu2 && mu2 > F::zero()) {
        return Err(Error::OrderingViolation {
            what: "entropy weights must satisfy mu1 > mu2 > 0",
        });
    }
    let pivot = n2.scale(mu2).sub(&n1.scale(mu1))?;
    if !(pivot.min_eigenvalue() > F::zero()) {
        return Err(Error::OrderingViolation {
            what: "weighted noise covariances must increase strictly",
        });
    }
    let m = n2
        .as_matrix()
        .matmul(pivot.inverse()?.as_matrix())?
        .matmul(n1.as_matrix())?
        .scale(mu1 - mu2);
    SpdMatrix::from_matrix(&m)
}

/// Verdict of one instance check.
#[derive(Debug, Clone)]
pub struct EpiVerdict<F> {
    pub lhs: F,
    pub rhs: F,
    /// `rhs - lhs`; nonnegative when the inequality holds.
    pub gap: F,
    /// Whether the conditional covariance matches the equality condition.
    pub at_equality: bool,
}

/// Evaluates both sides and reports the gap; flags instances sitting on
/// the equality covariance, where the gap must vanish.
pub fn verify_epi<F: Scalar>(inst: &EpiInstance<F>) -> Result<EpiVerdict<F>> {
    let lhs = epi_lhs_gaussian(inst)?;
    let rhs = epi_rhs(inst)?;
    let eq = equality_covariance(inst.mu1, inst.mu2, &inst.n1, &inst.n2)?;
    let tol = fp::<F>(1e-9) * (F::one() + eq.as_matrix().max_abs());
    let at_equality = inst.b.max_abs_diff(&eq)? < tol;
    Ok(EpiVerdict {
        lhs,
        rhs,
        gap: rhs - lhs,
        at_equality,
    })
}

/// Independent transcription check of the right side: a congruence that
/// diagonalizes both noise covariances simultaneously reduces the matrix
/// expression to a sum of scalar instances, which must agree. Returns the
/// worst absolute discrepancy, including the diagonalization's own
/// consistency.
pub fn congruence_residual<F: Scalar>(inst: &EpiInstance<F>) -> Result<F> {
    let chol = inst.n2.cholesky()?;
    let white = chol.whiten(&inst.n1)?;
    let (vals, vecs) = white.eigen_decomposition();
    let u = chol.transpose_solve(&vecs)?;

    // in the congruent coordinates the first noise is diag(vals), the
    // second the identity
    let mut residual = inst
        .n1
        .congruence(&u)?
        .as_matrix()
        .max_abs_diff(SpdMatrix::<F>::diagonal(&vals).as_matrix())?;
    residual = residual.max(
        inst.n2
            .congruence(&u)?
            .as_matrix()
            .max_abs_diff(SpdMatrix::identity(inst.dim()).as_matrix())?,
    );

    let half = fp::<F>(0.5);
    let gap = inst.mu1 - inst.mu2;
    let mut scalar_sum = F::zero();
    for &lam in &vals {
        let d = F::one() - lam;
        if !(d > F::zero()) {
            return Err(Error::NotPositiveDefinite {
                what: "difference of congruent noise covariances",
            });
        }
        scalar_sum = scalar_sum
            + inst.mu1 * half * ((gap / (inst.mu1 * d)).ln())
            - inst.mu2 * half * ((gap * lam / (inst.mu2 * d)).ln());
    }
    scalar_sum = scalar_sum * fp::<F>(inst.reps as f64);
    let full = epi_rhs(inst)?;
    Ok(residual.max((scalar_sum - full).abs()))
}
