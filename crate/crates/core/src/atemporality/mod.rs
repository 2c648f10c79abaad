//! Spatial and temporal causal measures and the four-region classification.

mod tau_search;

pub use tau_search::{
    certify, minimize_negativity_over_tau, minimize_objective, TauObjective,
    TauOptimizationResult, INITIAL_RADIUS, LINE_TOL, MAX_RADIUS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{negativity, partial_transpose, trace_norm, Subsystem};
use crate::pdo::{swap_pdo, Direction, Pdo};
use crate::pseudo_channel::{
    marginal_lambda_min, recover_choi_full_rank, EPS_RANK, NEAR_RANK_FACTOR,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_spatial: f64,
    pub eps_temporal: f64,
    pub tol_opt: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_spatial: 1e-9,
            eps_temporal: 1e-4,
            tol_opt: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_spatial", self.eps_spatial),
            ("eps_temporal", self.eps_temporal),
            ("tol_opt", self.tol_opt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Venn region of the spatial (S) and temporal (T) compatibility sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "S∩T")]
    SpatialTemporal,
    #[serde(rename = "S∩Tc")]
    SpatialOnly,
    #[serde(rename = "Sc∩T")]
    TemporalOnly,
    #[serde(rename = "Sc∩Tc")]
    Neither,
}

impl Region {
    pub fn new(spatial: bool, temporal: bool) -> Self {
        match (spatial, temporal) {
            (true, true) => Region::SpatialTemporal,
            (true, false) => Region::SpatialOnly,
            (false, true) => Region::TemporalOnly,
            (false, false) => Region::Neither,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::SpatialTemporal => "S∩T",
            Region::SpatialOnly => "S∩Tc",
            Region::TemporalOnly => "Sc∩T",
            Region::Neither => "Sc∩Tc",
        }
    }

    pub fn is_spatial(self) -> bool {
        matches!(self, Region::SpatialTemporal | Region::SpatialOnly)
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, Region::SpatialTemporal | Region::TemporalOnly)
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The PDO has negative eigenvalues, so `e_neg` is withheld.
    NotAState,
    /// Forward value came from the `τ` optimization.
    ForwardTauFamily,
    ReverseTauFamily,
    /// Forward marginal sits just above the rank threshold; both recovery
    /// paths were run and the smaller value kept.
    ForwardNearRankThreshold,
    ReverseNearRankThreshold,
    /// Measures were computed from a finite-shot reconstruction.
    FiniteSampleEstimate,
    /// Reconstructed marginals were projected back onto valid states.
    ProjectedMarginals,
}

/// How a directed atemporality value was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DirectedSolution {
    /// The closed-form pseudo-channel, unique for a full-rank marginal.
    Unique,
    Family(TauOptimizationResult),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectedAtemporality {
    pub value: f64,
    pub solution: DirectedSolution,
    /// Set when the marginal lies in the band just above the rank threshold.
    pub near_rank_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub aspatiality: f64,
    pub f_forward: f64,
    pub f_reverse: f64,
    pub f: f64,
    pub e_neg: Option<f64>,
    pub region: Region,
    pub tolerances: Tolerances,
    pub flags: Vec<Flag>,
}

/// `(‖R^{T_A}‖₁ − 1)/2`. Well defined for any PDO, but only an entanglement
/// measure when `R` is a state.
pub fn entanglement_negativity(r: &Pdo) -> f64 {
    let pt = partial_transpose(r.matrix(), Subsystem::A).expect("4x4");
    ((trace_norm(&pt).expect("Hermitian") - 1.0) / 2.0).max(0.0)
}

/// Negativity of the PDO itself; zero iff it is a density operator.
pub fn aspatiality(r: &Pdo) -> f64 {
    negativity(r.matrix()).expect("PDO is Hermitian")
}

/// Minimal Choi negativity over forward pseudo-channels compatible with `r`.
pub fn forward_atemporality(r: &Pdo, tol_opt: f64) -> Result<DirectedAtemporality> {
    let lambda_min = marginal_lambda_min(&r.marginal_a());
    if lambda_min < EPS_RANK {
        let opt = minimize_negativity_over_tau(r, Direction::Forward, tol_opt)?;
        return Ok(DirectedAtemporality {
            value: opt.value,
            solution: DirectedSolution::Family(opt),
            near_rank_threshold: false,
        });
    }
    let closed = recover_choi_full_rank(r)?.negativity();
    if lambda_min < NEAR_RANK_FACTOR * EPS_RANK {
        let opt = minimize_negativity_over_tau(r, Direction::Forward, tol_opt)?;
        let (value, solution) = if opt.value < closed {
            (opt.value, DirectedSolution::Family(opt))
        } else {
            (closed, DirectedSolution::Unique)
        };
        return Ok(DirectedAtemporality {
            value,
            solution,
            near_rank_threshold: true,
        });
    }
    Ok(DirectedAtemporality {
        value: closed,
        solution: DirectedSolution::Unique,
        near_rank_threshold: false,
    })
}

/// Forward atemporality of the swapped PDO.
pub fn reverse_atemporality(r: &Pdo, tol_opt: f64) -> Result<DirectedAtemporality> {
    forward_atemporality(&swap_pdo(r), tol_opt)
}

/// `f = min(f→, f←)`.
pub fn atemporality(r: &Pdo, tol_opt: f64) -> Result<f64> {
    let fwd = forward_atemporality(r, tol_opt)?.value;
    let rev = reverse_atemporality(r, tol_opt)?.value;
    Ok(fwd.min(rev))
}

pub fn classify(r: &Pdo, tol: &Tolerances) -> Result<CausalReport> {
    tol.validate()?;
    let mut flags = Vec::new();
    let asp = aspatiality(r);
    let spatial = asp <= tol.eps_spatial;
    let e_neg = if spatial {
        Some(entanglement_negativity(r))
    } else {
        flags.push(Flag::NotAState);
        None
    };
    let fwd = forward_atemporality(r, tol.tol_opt)?;
    let rev = reverse_atemporality(r, tol.tol_opt)?;
    for (d, family, near) in [
        (fwd, Flag::ForwardTauFamily, Flag::ForwardNearRankThreshold),
        (rev, Flag::ReverseTauFamily, Flag::ReverseNearRankThreshold),
    ] {
        if matches!(d.solution, DirectedSolution::Family(_)) {
            flags.push(family);
        }
        if d.near_rank_threshold {
            flags.push(near);
        }
    }
    let f = fwd.value.min(rev.value);
    Ok(CausalReport {
        aspatiality: asp,
        f_forward: fwd.value,
        f_reverse: rev.value,
        f,
        e_neg,
        region: Region::new(spatial, f <= tol.eps_temporal),
        tolerances: *tol,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_channel, random_density_operator, DensityOperator, QuantumChannel, KET0};
    use crate::linalg::{c, tensor, ComplexMatrix, ZERO};
    use crate::pdo::{pdo_from_state, pdo_from_temporal, TemporalSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell(sign: f64, flip: bool) -> Pdo {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = if flip {
            [ZERO, c(h, 0.0), c(sign * h, 0.0), ZERO]
        } else {
            [c(h, 0.0), ZERO, ZERO, c(sign * h, 0.0)]
        };
        pdo_from_state(&DensityOperator::pure(&psi).unwrap()).unwrap()
    }

    #[test]
    fn bell_state_measures() {
        let r = bell(1.0, false);
        assert!((entanglement_negativity(&r) - 0.5).abs() < 1e-12);
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert!(rep.aspatiality < 1e-12);
        assert!((rep.f - 0.5).abs() < 1e-9);
        assert_eq!(rep.region, Region::SpatialOnly);
        assert!(rep.flags.is_empty());
    }

    #[test]
    fn identity_channel_is_temporal_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let rho = random_density_operator(2, &mut rng).unwrap();
        let r = pdo_from_temporal(&TemporalSpec::forward(rho, QuantumChannel::identity())).unwrap();
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert!((rep.aspatiality - 0.5).abs() < 1e-10);
        assert!(rep.f_forward < 1e-9);
        assert_eq!(rep.region, Region::TemporalOnly);
        assert_eq!(rep.e_neg, None);
        assert!(rep.flags.contains(&Flag::NotAState));
    }

    #[test]
    fn pure_marginal_identity_uses_family() {
        let r = pdo_from_temporal(&TemporalSpec::forward(
            DensityOperator::pure(&KET0).unwrap(),
            QuantumChannel::identity(),
        ))
        .unwrap();
        let fwd = forward_atemporality(&r, 1e-5).unwrap();
        assert!(fwd.value < 1e-6);
        assert!(matches!(fwd.solution, DirectedSolution::Family(_)));
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert!(rep.flags.contains(&Flag::ForwardTauFamily));
        assert!(rep.region.is_temporal());
    }

    #[test]
    fn product_of_pure_states() {
        let p0 = ComplexMatrix::diag(&[1.0, 0.0]);
        let r = Pdo::from_matrix(tensor(&p0, &p0)).unwrap();
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert_eq!(rep.region, Region::SpatialTemporal);
        assert!(rep.f_forward < 1e-6 && rep.f_reverse < 1e-6);
    }

    #[test]
    fn near_threshold_runs_both_paths() {
        let lambda = 5.0 * EPS_RANK;
        let rho = DensityOperator::new(ComplexMatrix::diag(&[1.0 - lambda, lambda])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let r = pdo_from_temporal(&TemporalSpec::forward(rho, random_channel(&mut rng))).unwrap();
        let fwd = forward_atemporality(&r, 1e-5).unwrap();
        assert!(fwd.near_rank_threshold);
        assert!(fwd.value < 1e-5);
    }

    #[test]
    fn invalid_tolerances_rejected() {
        let tol = Tolerances {
            tol_opt: 0.0,
            ..Tolerances::default()
        };
        assert!(matches!(classify(&bell(1.0, false), &tol), Err(Error::Argument(_))));
    }

    #[test]
    fn region_serializes_with_set_notation() {
        assert_eq!(serde_json::to_string(&Region::Neither).unwrap(), "\"Sc∩Tc\"");
        assert_eq!(
            serde_json::to_string(&Flag::ForwardNearRankThreshold).unwrap(),
            "\"forward-near-rank-threshold\""
        );
    }
}
