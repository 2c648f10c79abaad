//! Pseudo-density operators on two qubits.
//!
//! A PDO `R = ¼ Σ_ab r_ab σ_a ⊗ σ_b` collects the Pauli–Pauli correlations
//! `r_ab` between two measurement events. It is Hermitian with unit trace and
//! positive marginals, but may itself have negative eigenvalues.

use std::fmt;

use crate::channel::{apply_channel, ChoiMap, DensityOperator, QuantumChannel, TOL_STATE};
use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, hermitian_eigenvalues, partial_trace, paulis, swap_operator, tensor,
    ComplexMatrix, Subsystem,
};

/// Table of correlations `r_ab = tr[R (σ_a ⊗ σ_b)]`.
pub type PauliTable = [[f64; 4]; 4];

const TOL_R00: f64 = 1e-9;
const TOL_R_BOUND: f64 = 1e-9;

/// Direction of a temporal interpretation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// A is measured first; a channel maps A to B.
    Forward,
    /// B is measured first; a channel maps B to A.
    Reverse,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "reverse" => Ok(Direction::Reverse),
            other => Err(Error::Argument(format!(
                "direction must be 'forward' or 'reverse', got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pdo {
    matrix: ComplexMatrix,
}

/// An initial qubit state and the channel it passes through.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalSpec {
    pub initial: DensityOperator,
    pub channel: QuantumChannel,
    pub direction: Direction,
}

impl TemporalSpec {
    pub fn forward(initial: DensityOperator, channel: QuantumChannel) -> Self {
        Self {
            initial,
            channel,
            direction: Direction::Forward,
        }
    }

    pub fn reverse(initial: DensityOperator, channel: QuantumChannel) -> Self {
        Self {
            initial,
            channel,
            direction: Direction::Reverse,
        }
    }
}

fn marginal_min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(&m.hermitian_part())
        .map(|s| s.min())
        .unwrap_or(f64::NEG_INFINITY)
}

impl Pdo {
    /// Validates a 4×4 matrix as a PDO: Hermitian, unit trace and positive
    /// marginals (each within [`TOL_STATE`]). Global positivity is not
    /// required.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::Argument(format!(
                "a PDO must be 4x4, got {0}x{0}",
                matrix.dim()
            )));
        }
        let herm = matrix.hermiticity_residual();
        if herm > TOL_STATE {
            return Err(Error::Validation(format!(
                "PDO is not Hermitian (residual {herm:e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TOL_STATE {
            return Err(Error::Normalization(tr));
        }
        for (name, sub) in [("A", Subsystem::B), ("B", Subsystem::A)] {
            let marginal = partial_trace(&matrix, sub)?;
            let min = marginal_min_eigenvalue(&marginal);
            if min < -TOL_STATE {
                return Err(Error::InvalidCorrelations(format!(
                    "marginal {name} has negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `ρ_A = tr_B R`.
    pub fn marginal_a(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, Subsystem::B).expect("4x4")
    }

    /// `ρ_B = tr_A R`.
    pub fn marginal_b(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, Subsystem::A).expect("4x4")
    }

    pub fn pauli_coeffs(&self) -> PauliTable {
        let p = paulis();
        let mut r = [[0.0; 4]; 4];
        for (a, row) in r.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = (self.matrix * tensor(&p[a], &p[b])).trace().re;
            }
        }
        r
    }

    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
            .expect("PDO is Hermitian")
            .eigenvalues
    }

    /// Convex combination `Σ w_i R_i`; weights must be non-negative and sum to 1.
    pub fn mix(parts: &[(f64, &Pdo)]) -> Result<Pdo> {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument("mixture weights must be a distribution".into()));
        }
        let m = parts
            .iter()
            .fold(ComplexMatrix::zeros(4), |acc, (w, r)| acc + r.matrix.scale(*w));
        Pdo::from_matrix(m)
    }

    /// `(U ⊗ V) R (U ⊗ V)†`.
    pub fn local_unitary(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Pdo> {
        let w = tensor(u, v);
        Pdo::from_matrix(w * self.matrix * w.dagger())
    }
}

/// Builds `R = ¼ Σ r_ab σ_a ⊗ σ_b`, checking `r_00 = 1`, `|r_ab| ≤ 1` and
/// positivity of both marginals.
pub fn pdo_from_pauli_coeffs(r: &PauliTable) -> Result<Pdo> {
    if (r[0][0] - 1.0).abs() > TOL_R00 {
        return Err(Error::Normalization(r[0][0]));
    }
    for (a, row) in r.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 + TOL_R_BOUND {
                return Err(Error::InvalidCorrelations(format!(
                    "|r[{a}][{b}]| = {v} exceeds 1"
                )));
            }
        }
    }
    let p = paulis();
    let mut m = ComplexMatrix::zeros(4);
    for a in 0..4 {
        for b in 0..4 {
            if r[a][b] != 0.0 {
                m += tensor(&p[a], &p[b]).scale(r[a][b] / 4.0);
            }
        }
    }
    Pdo::from_matrix(m)
}

pub fn pdo_from_state(rho: &DensityOperator) -> Result<Pdo> {
    if rho.dim() != 4 {
        return Err(Error::Argument("spatial PDOs need a two-qubit state".into()));
    }
    Ok(Pdo {
        matrix: *rho.matrix(),
    })
}

/// `K = {ρ_A ⊗ I/2, S}`.
pub fn k_operator(rho_a: &DensityOperator) -> ComplexMatrix {
    let lifted = tensor(rho_a.matrix(), &ComplexMatrix::identity(2).scale(0.5));
    anticommutator(&lifted, &swap_operator()).expect("matching dimensions")
}

/// `(I ⊗ Λ) M`, applying `Λ` blockwise to the B factor.
pub fn apply_on_b<M: ChoiMap + ?Sized>(map: &M, m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut block = ComplexMatrix::zeros(2);
            for k in 0..2 {
                for l in 0..2 {
                    block[(k, l)] = m[(2 * i + k, 2 * j + l)];
                }
            }
            let image = apply_channel(map, &block);
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = image[(k, l)];
                }
            }
        }
    }
    out
}

/// `¼ Σ_a σ_a ⊗ Λ({ρ_A, σ_a})`, the forward temporal PDO of `(ρ_A, Λ)`.
/// Works for any Hermiticity-preserving `Λ`; the result is not validated.
pub fn temporal_matrix<M: ChoiMap + ?Sized>(rho_a: &ComplexMatrix, map: &M) -> ComplexMatrix {
    let p = paulis();
    let mut r = ComplexMatrix::zeros(4);
    for s in &p {
        let ac = anticommutator(rho_a, s).expect("2x2");
        r += tensor(s, &apply_channel(map, &ac));
    }
    r.scale(0.25).hermitian_part()
}

/// PDO of a qubit prepared in `ρ_A`, measured, sent through `ℰ` and measured
/// again. The reverse direction is the swap of the forward construction.
pub fn pdo_from_temporal(spec: &TemporalSpec) -> Result<Pdo> {
    let forward = Pdo::from_matrix(temporal_matrix(spec.initial.matrix(), &spec.channel))?;
    Ok(match spec.direction {
        Direction::Forward => forward,
        Direction::Reverse => swap_pdo(&forward),
    })
}

/// `S R S†`: exchanges the roles of A and B.
pub fn swap_pdo(r: &Pdo) -> Pdo {
    let s = swap_operator();
    Pdo {
        matrix: s * r.matrix * s,
    }
}
