//! Recovery of the pseudo-channels compatible with a PDO.
//!
//! A pseudo-channel `Λ` is a trace-preserving, Hermiticity-preserving linear
//! map with `R = (I ⊗ Λ) K(ρ_A)`. When `ρ_A` is invertible there is exactly
//! one; when `ρ_A` is pure they form a family labelled by a Hermitian
//! trace-one operator `τ`.

use crate::channel::{apply_channel, bloch_operator, is_cptp, ChoiMap, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, negativity, partial_trace, partial_transpose, tensor, ComplexMatrix,
    Subsystem,
};
use crate::pdo::{apply_on_b, k_operator, swap_pdo, Direction, Pdo};

/// Smallest marginal eigenvalue for which the closed form is used.
pub const EPS_RANK: f64 = 1e-7;

/// Upper end of the band `[EPS_RANK, NEAR_RANK_FACTOR · EPS_RANK]` in which
/// both recovery paths are run.
pub const NEAR_RANK_FACTOR: f64 = 100.0;

const TOL_TAU: f64 = 1e-9;
const TOL_CPTP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoChannel {
    choi: ComplexMatrix,
    direction: Direction,
    tau: Option<ComplexMatrix>,
}

impl ChoiMap for PseudoChannel {
    fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }
}

impl PseudoChannel {
    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The family label, present only for rank-deficient marginals.
    pub fn tau(&self) -> Option<&ComplexMatrix> {
        self.tau.as_ref()
    }

    /// Negativity of the Choi operator; zero iff the map is completely positive.
    pub fn negativity(&self) -> f64 {
        negativity(&self.choi).expect("Choi operator is Hermitian")
    }

    pub fn is_cptp(&self) -> bool {
        is_cptp(&self.choi, TOL_CPTP).cptp
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        apply_channel(self, x)
    }
}

/// `L = (ρ_A − I/2) ⊗ tr_A[(½ρ_A⁻¹ ⊗ I) R] + I/2 ⊗ tr_A[((I − ½ρ_A⁻¹) ⊗ I) R]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LOperator {
    pub matrix: ComplexMatrix,
}

impl LOperator {
    pub fn new(r: &Pdo) -> Result<Self> {
        let rho = r.marginal_a();
        let lambda_min = marginal_lambda_min(&rho);
        if lambda_min < EPS_RANK {
            return Err(Error::RankDeficient { lambda_min });
        }
        let id2 = ComplexMatrix::identity(2);
        let half_inv = rho.inverse_2x2()?.scale(0.5);
        let weighted = |w: &ComplexMatrix| {
            partial_trace(&(tensor(w, &id2) * *r.matrix()), Subsystem::A).expect("4x4")
        };
        let matrix = tensor(&(rho - id2.scale(0.5)), &weighted(&half_inv))
            + tensor(&id2.scale(0.5), &weighted(&(id2 - half_inv)));
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }
}

/// Smallest eigenvalue of a qubit marginal.
pub fn marginal_lambda_min(rho: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(&rho.hermitian_part())
        .expect("Hermitian part")
        .min()
}

/// `τ(v) = (I + v·σ)/2`, Hermitian with unit trace for any real `v`.
pub fn tau_from_bloch(v: [f64; 3]) -> ComplexMatrix {
    bloch_operator(v)
}

fn check_tau(tau: &ComplexMatrix) -> Result<()> {
    if tau.dim() != 2 {
        return Err(Error::Argument("tau must be 2x2".into()));
    }
    let herm = tau.hermiticity_residual();
    if herm > TOL_TAU {
        return Err(Error::Argument(format!("tau is not Hermitian (residual {herm:e})")));
    }
    let tr = tau.trace();
    if (tr.re - 1.0).abs() > TOL_TAU || tr.im.abs() > TOL_TAU {
        return Err(Error::Argument(format!("tau must have unit trace, got {tr}")));
    }
    Ok(())
}

/// The unique compatible forward pseudo-channel of a PDO whose A marginal
/// has smallest eigenvalue at least [`EPS_RANK`].
pub fn recover_choi_full_rank(r: &Pdo) -> Result<PseudoChannel> {
    let l = LOperator::new(r)?;
    let choi = partial_transpose(&(*r.matrix() - l.matrix), Subsystem::A)?;
    Ok(PseudoChannel {
        choi: choi.hermitian_part(),
        direction: Direction::Forward,
        tau: None,
    })
}

/// `R_τ = R + (I/2 − ρ_A) ⊗ ½(τ + tr_A R) + I/2 ⊗ ½(τ − tr_A R)`.
pub fn family_pdo(r: &Pdo, tau: &ComplexMatrix) -> ComplexMatrix {
    let rho_a = r.marginal_a();
    let rho_b = r.marginal_b();
    let half_id = ComplexMatrix::identity(2).scale(0.5);
    *r.matrix()
        + tensor(&(half_id - rho_a), &(*tau + rho_b).scale(0.5))
        + tensor(&half_id, &(*tau - rho_b).scale(0.5))
}

/// The forward pseudo-channel labelled by `τ` for a PDO with a pure A
/// marginal. The actual marginal is used in the construction, which keeps
/// the map exactly trace preserving.
pub fn recover_choi_family(r: &Pdo, tau: &ComplexMatrix) -> Result<PseudoChannel> {
    check_tau(tau)?;
    let lambda_min = marginal_lambda_min(&r.marginal_a());
    if lambda_min >= NEAR_RANK_FACTOR * EPS_RANK {
        return Err(Error::Argument(format!(
            "the tau family needs a rank-deficient marginal (lambda_min = {lambda_min:e})"
        )));
    }
    let choi = partial_transpose(&family_pdo(r, tau), Subsystem::A)?;
    Ok(PseudoChannel {
        choi: choi.hermitian_part(),
        direction: Direction::Forward,
        tau: Some(tau.hermitian_part()),
    })
}

fn oriented(r: &Pdo, direction: Direction) -> Pdo {
    match direction {
        Direction::Forward => *r,
        Direction::Reverse => swap_pdo(r),
    }
}

/// Recovers a pseudo-channel in the given direction. Rank-deficient sources
/// need an explicit `τ`; otherwise [`Error::RankDeficient`] is returned.
pub fn recover_pseudo_channel(
    r: &Pdo,
    direction: Direction,
    tau: Option<&ComplexMatrix>,
) -> Result<PseudoChannel> {
    let source = oriented(r, direction);
    let lambda_min = marginal_lambda_min(&source.marginal_a());
    let mut pc = if lambda_min >= EPS_RANK {
        recover_choi_full_rank(&source)?
    } else {
        match tau {
            Some(t) => recover_choi_family(&source, t)?,
            None => return Err(Error::RankDeficient { lambda_min }),
        }
    };
    pc.direction = direction;
    Ok(pc)
}

/// Max-entry residual between `(I ⊗ Λ) K(ρ)` and the source PDO, taken in
/// the channel's own direction.
pub fn verify_compatibility(pc: &PseudoChannel, r: &Pdo) -> f64 {
    let source = oriented(r, pc.direction);
    let rho = source.marginal_a();
    let kernel = match DensityOperator::new(rho) {
        Ok(state) => k_operator(&state),
        Err(_) => return f64::INFINITY,
    };
    apply_on_b(pc, &kernel).max_abs_diff(source.matrix())
}
