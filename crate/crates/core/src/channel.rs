//! Density operators, qubit channels in Choi form, and random sampling.
//!
//! Channels are stored canonically as Choi operators
//! `χ = ¼ Σ_a σ_aᵀ ⊗ Λ(σ_a) = (I ⊗ Λ)|φ+⟩⟨φ+|`, normalized to unit trace.
//! A Kraus list, when present, is a derived view.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigen, hermitian_eigenvalues, hermitian_function, partial_trace, paulis,
    tensor, ComplexMatrix, Subsystem, ONE, ZERO,
};

/// Tolerance used when validating density operators and CPTP maps.
pub const TOL_STATE: f64 = 1e-10;

/// Hilbert–Schmidt (Ginibre) measure; recorded in sweep metadata.
pub const RANDOM_STATE_MEASURE: &str = "hilbert-schmidt";

/// A positive semidefinite, unit-trace operator on one or two qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity (all within
    /// [`TOL_STATE`]). The stored matrix is the Hermitian part of the input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 2 && matrix.dim() != 4 {
            return Err(Error::Argument(format!(
                "density operators must be 2x2 or 4x4, got {0}x{0}",
                matrix.dim()
            )));
        }
        let herm = matrix.hermiticity_residual();
        if herm > TOL_STATE {
            return Err(Error::Validation(format!(
                "density operator is not Hermitian (residual {herm:e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TOL_STATE {
            return Err(Error::Validation(format!("density operator has trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)?.min();
        if min < -TOL_STATE {
            return Err(Error::Validation(format!(
                "density operator has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for a vector normalized here.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Argument("zero state vector".into()));
        }
        let v: Vec<_> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Qubit state `½[[1+p, c], [c*, 1−p]]`.
    pub fn qubit(p: f64, coherence: num_complex::Complex64) -> Result<Self> {
        let m = ComplexMatrix::from_row_major(
            2,
            &[c(1.0 + p, 0.0), coherence, coherence.conj(), c(1.0 - p, 0.0)],
        )?;
        Self::new(m.scale(0.5))
    }

    /// Qubit state from a Bloch vector `(I + r·σ)/2`, `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        Self::new(bloch_operator(r))
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `(I + r·σ)/2` for any real `r` (Hermitian, trace one, not necessarily PSD).
pub fn bloch_operator(r: [f64; 3]) -> ComplexMatrix {
    let p = paulis();
    let mut m = p[0];
    for k in 0..3 {
        m += p[k + 1].scale(r[k]);
    }
    m.scale(0.5)
}

/// Bloch vector `tr[Mσ_k]` of a 2×2 operator.
pub fn bloch_vector(m: &ComplexMatrix) -> [f64; 3] {
    let p = paulis();
    [1, 2, 3].map(|k| (*m * p[k]).trace().re)
}

/// Anything with a Choi operator in the `¼ Σ σ_aᵀ ⊗ Λ(σ_a)` convention.
pub trait ChoiMap {
    fn choi(&self) -> &ComplexMatrix;
}

impl ChoiMap for ComplexMatrix {
    fn choi(&self) -> &ComplexMatrix {
        self
    }
}

/// A CPTP qubit channel.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    choi: ComplexMatrix,
    kraus: Option<Vec<ComplexMatrix>>,
}

impl ChoiMap for QuantumChannel {
    fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }
}

/// Residuals reported by [`is_cptp`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpDiagnostics {
    pub cptp: bool,
    pub min_eigenvalue: f64,
    pub negativity: f64,
    /// `‖tr_B χ − I/2‖_max`.
    pub tp_residual: f64,
    pub hermiticity_residual: f64,
}

/// CPTP test on a Choi operator: `λ_min ≥ −tol` and `‖tr_B χ − I/2‖_max ≤ tol`.
pub fn is_cptp(choi: &ComplexMatrix, tol: f64) -> CptpDiagnostics {
    let hermiticity_residual = choi.hermiticity_residual();
    let sym = choi.hermitian_part();
    let spectrum = hermitian_eigenvalues(&sym).expect("Hermitian part");
    let negativity = spectrum
        .eigenvalues
        .iter()
        .filter(|&&x| x < 0.0)
        .map(|x| -x)
        .sum();
    let tp_residual = match partial_trace(&sym, Subsystem::B) {
        Ok(m) => m.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)),
        Err(_) => f64::INFINITY,
    };
    let min_eigenvalue = spectrum.min();
    CptpDiagnostics {
        cptp: hermiticity_residual <= tol && min_eigenvalue >= -tol && tp_residual <= tol,
        min_eigenvalue,
        negativity,
        tp_residual,
        hermiticity_residual,
    }
}

/// `Λ(X) = 2 tr_A[(Xᵀ ⊗ I) χ]`; linear in `X`.
pub fn apply_channel<M: ChoiMap + ?Sized>(map: &M, x: &ComplexMatrix) -> ComplexMatrix {
    let lifted = tensor(&x.transpose(), &ComplexMatrix::identity(2)) * *map.choi();
    partial_trace(&lifted, Subsystem::A)
        .expect("Choi operators are 4x4")
        .scale(2.0)
}

fn apply_kraus(kraus: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    kraus
        .iter()
        .fold(ComplexMatrix::zeros(2), |acc, k| acc + *k * *x * k.dagger())
}

/// Choi operator of `X ↦ Σ K X K†`.
pub fn choi_from_kraus(kraus: &[ComplexMatrix]) -> Result<QuantumChannel> {
    if kraus.is_empty() {
        return Err(Error::Validation("empty Kraus list".into()));
    }
    if let Some(k) = kraus.iter().find(|k| k.dim() != 2) {
        return Err(Error::Argument(format!(
            "Kraus operators must be 2x2, got {0}x{0}",
            k.dim()
        )));
    }
    let completeness = kraus
        .iter()
        .fold(ComplexMatrix::zeros(2), |acc, k| acc + k.dagger() * *k);
    let resid = completeness.max_abs_diff(&ComplexMatrix::identity(2));
    if resid > 1e-8 {
        return Err(Error::Validation(format!(
            "Kraus set is not complete (max |ΣK†K − I| = {resid:e})"
        )));
    }
    let p = paulis();
    let mut choi = ComplexMatrix::zeros(4);
    for s in &p {
        choi += tensor(&s.transpose(), &apply_kraus(kraus, s));
    }
    Ok(QuantumChannel {
        choi: choi.scale(0.25).hermitian_part(),
        kraus: Some(kraus.to_vec()),
    })
}

/// Kraus operators from the eigen-decomposition of a PSD Choi operator.
pub fn kraus_from_choi(choi: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let (vals, vecs) = hermitian_eigen(&choi.hermitian_part())?;
    let mut out = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam < -TOL_STATE {
            return Err(Error::Validation(format!(
                "Choi operator is not PSD (eigenvalue {lam:e})"
            )));
        }
        if lam <= 1e-14 {
            continue;
        }
        let w = (2.0 * lam).sqrt();
        let mut kr = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                kr[(j, i)] = vecs[(2 * i + j, k)] * w;
            }
        }
        out.push(kr);
    }
    Ok(out)
}

impl QuantumChannel {
    /// Validates a Choi operator as CPTP within [`TOL_STATE`].
    pub fn from_choi(choi: ComplexMatrix) -> Result<Self> {
        if choi.dim() != 4 {
            return Err(Error::Argument("Choi operator must be 4x4".into()));
        }
        let d = is_cptp(&choi, TOL_STATE);
        if !d.cptp {
            return Err(Error::Validation(format!(
                "Choi operator is not CPTP (λ_min = {:e}, TP residual = {:e}, hermiticity = {:e})",
                d.min_eigenvalue, d.tp_residual, d.hermiticity_residual
            )));
        }
        Ok(Self {
            choi: choi.hermitian_part(),
            kraus: None,
        })
    }

    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        choi_from_kraus(kraus)
    }

    pub fn identity() -> Self {
        choi_from_kraus(&[ComplexMatrix::identity(2)]).expect("identity is CPTP")
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        choi_from_kraus(&[*u])
    }

    /// `ρ ↦ pρ + (1−p) ZρZ†`.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("dephasing p = {p} outside [0, 1]")));
        }
        let p_ops = paulis();
        choi_from_kraus(&[p_ops[0].scale(p.sqrt()), p_ops[3].scale((1.0 - p).sqrt())])
    }

    /// `ρ ↦ tr[ρ] τ`.
    pub fn constant(tau: &DensityOperator) -> Result<Self> {
        if tau.dim() != 2 {
            return Err(Error::Argument("constant channel output must be a qubit".into()));
        }
        Self::from_choi(tensor(&ComplexMatrix::identity(2).scale(0.5), tau.matrix()))
    }

    /// `ρ ↦ Σ_i ⟨e_i|ρ|e_i⟩ τ_i` for an orthonormal basis `{e_i}`.
    pub fn measure_prepare(
        basis: [[num_complex::Complex64; 2]; 2],
        outputs: [&DensityOperator; 2],
    ) -> Result<Self> {
        let mut choi = ComplexMatrix::zeros(4);
        for (e, tau) in basis.iter().zip(outputs) {
            let proj = ComplexMatrix::outer(e);
            choi += tensor(&proj.transpose(), tau.matrix());
        }
        Self::from_choi(choi.scale(0.5))
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    /// Kraus view, derived from the Choi operator when not stored.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        match &self.kraus {
            Some(k) => k.clone(),
            None => kraus_from_choi(&self.choi).expect("validated CPTP Choi"),
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        apply_channel(self, x)
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply(rho.matrix()).hermitian_part())
    }
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = c(re, im);
        }
    }
    g
}

/// Hilbert–Schmidt random state `GG†/tr(GG†)` with complex Ginibre `G`.
pub fn random_density_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityOperator> {
    if dim != 2 && dim != 4 {
        return Err(Error::Argument(format!("dimension {dim} must be 2 or 4")));
    }
    let g = ginibre(dim, rng);
    let w = g * g.dagger();
    let tr = w.trace().re;
    DensityOperator::new(w.scale(1.0 / tr).hermitian_part())
}

/// Haar-random normalized state vector.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<num_complex::Complex64> {
    let v: Vec<_> = (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random 2×2 unitary `e^{iφ}[[a, −b*], [b, a*]]`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let v = random_pure_state(2, rng);
    let (a, b) = (v[0], v[1]);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let u = ComplexMatrix::from_row_major(2, &[a, -b.conj(), b, a.conj()]).expect("2x2");
    u.scale_c(c(phase.cos(), phase.sin()))
}

/// Random CPTP channel from a Ginibre-sampled Choi operator, normalized to
/// be trace preserving: `χ = ½ (Y^{-1/2} ⊗ I) W (Y^{-1/2} ⊗ I)`, `Y = tr_B W`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R) -> QuantumChannel {
    loop {
        let g = ginibre(4, rng);
        let w = (g * g.dagger()).hermitian_part();
        let y = partial_trace(&w, Subsystem::B).expect("4x4").hermitian_part();
        let Ok(y_inv_sqrt) = hermitian_function(&y, |x| if x > 1e-12 { x.sqrt().recip() } else { 0.0 })
        else {
            continue;
        };
        let lift = tensor(&y_inv_sqrt, &ComplexMatrix::identity(2));
        let choi = (lift * w * lift).scale(0.5).hermitian_part();
        if let Ok(ch) = QuantumChannel::from_choi(choi) {
            return ch;
        }
    }
}

/// Projector onto a normalized qubit vector, returned as a matrix.
pub fn ket_projector(psi: [num_complex::Complex64; 2]) -> ComplexMatrix {
    ComplexMatrix::outer(&psi)
}

pub const KET0: [num_complex::Complex64; 2] = [ONE, ZERO];
pub const KET1: [num_complex::Complex64; 2] = [ZERO, ONE];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{negativity, pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_choi_is_bell_projector() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = ComplexMatrix::outer(&[c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);
        assert!(QuantumChannel::identity().choi().max_abs_diff(&phi) < 1e-15);
    }

    #[test]
    fn dephasing_choi_matches_direct_bell_arm_application() {
        // Oracle: apply Λ(ρ) = pρ + (1−p)ZρZ to the second arm of |φ+⟩⟨φ+|
        // blockwise, without going through Pauli expansions.
        let p = 0.5;
        let z = pauli(3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = ComplexMatrix::outer(&[c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);
        let zz = tensor(&ComplexMatrix::identity(2), &z);
        let expected = phi.scale(p) + (zz * phi * zz).scale(1.0 - p);
        let ch = QuantumChannel::dephasing(p).unwrap();
        assert!(ch.choi().max_abs_diff(&expected) < 1e-15);
        assert!(is_cptp(ch.choi(), 1e-12).cptp);
    }

    #[test]
    fn constant_channel_choi_is_maximally_mixed() {
        let tau = DensityOperator::maximally_mixed(2);
        let ch = QuantumChannel::constant(&tau).unwrap();
        assert!(ch.choi().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
        let p = paulis();
        let kraus: Vec<_> = p.iter().map(|s| s.scale(0.5)).collect();
        let via_kraus = choi_from_kraus(&kraus).unwrap();
        assert!(via_kraus.choi().max_abs_diff(ch.choi()) < 1e-15);
        let rho = DensityOperator::qubit(0.3, c(0.1, -0.2)).unwrap();
        assert!(ch.apply(rho.matrix()).max_abs_diff(tau.matrix()) < 1e-15);
    }

    #[test]
    fn incomplete_kraus_is_rejected() {
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(choi_from_kraus(&[half]), Err(Error::Validation(_))));
    }

    #[test]
    fn is_cptp_diagnostics() {
        assert!(is_cptp(QuantumChannel::identity().choi(), 1e-12).cptp);
        assert!(is_cptp(&ComplexMatrix::identity(4).scale(0.25), 1e-12).cptp);
        // Transpose map: Choi = S/2, eigenvalues ±½.
        let t = crate::linalg::swap_operator().scale(0.5);
        let d = is_cptp(&t, 1e-12);
        assert!(!d.cptp);
        assert!((d.negativity - 0.5).abs() < 1e-12);
        assert!(d.tp_residual < 1e-15);
    }

    #[test]
    fn apply_channel_on_paulis() {
        let p = paulis();
        let id = QuantumChannel::identity();
        for s in &p {
            assert!(id.apply(s).max_abs_diff(s) < 1e-15);
        }
        for &q in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let ch = QuantumChannel::dephasing(q).unwrap();
            for k in [1, 2] {
                let out = ch.apply(&p[k]);
                assert!(out.max_abs_diff(&p[k].scale(2.0 * q - 1.0)) < 1e-15);
            }
            assert!(ch.apply(&p[3]).max_abs_diff(&p[3]) < 1e-15);
        }
        assert!(QuantumChannel::dephasing(1.5).is_err());
        assert!(QuantumChannel::dephasing(-0.1).is_err());
    }

    #[test]
    fn kraus_roundtrip_is_idempotent_on_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let ch = random_channel(&mut rng);
            let kraus = kraus_from_choi(ch.choi()).unwrap();
            let rebuilt = choi_from_kraus(&kraus).unwrap();
            assert!(rebuilt.choi().max_abs_diff(ch.choi()) < 1e-9);
            assert!(is_cptp(rebuilt.choi(), 1e-10).cptp);
        }
    }

    #[test]
    fn random_states_are_valid_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let ra = random_density_operator(4, &mut a).unwrap();
        let rb = random_density_operator(4, &mut b).unwrap();
        assert_eq!(ra, rb);
        assert!((ra.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(random_density_operator(3, &mut a).is_err());
    }

    #[test]
    fn mean_qubit_eigenvalue_is_one_half() {
        // Each qubit sample has eigenvalues λ, 1−λ; the mean over both is ½
        // exactly, so also check the smaller one against its Hilbert–Schmidt
        // expectation (uniform Bloch ball, E|r| = ¾): E[λ_min] = ⅛.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let mut mean_all = 0.0;
        let mut mean_min = 0.0;
        for _ in 0..n {
            let rho = random_density_operator(2, &mut rng).unwrap();
            let s = hermitian_eigenvalues(rho.matrix()).unwrap();
            mean_all += s.sum() / 2.0;
            mean_min += s.min();
        }
        mean_all /= n as f64;
        mean_min /= n as f64;
        assert!((mean_all - 0.5).abs() < 0.01);
        assert!((mean_min - 0.125).abs() < 0.01, "mean λ_min {mean_min}");
    }

    #[test]
    fn cptp_channels_map_states_to_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let ch = random_channel(&mut rng);
            let rho = random_density_operator(2, &mut rng).unwrap();
            let out = ch.apply(rho.matrix());
            assert!(DensityOperator::new(out).is_ok());
            assert!(negativity(&out.hermitian_part()).unwrap() < 1e-12);
        }
    }
}
