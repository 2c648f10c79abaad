//! Finite-shot simulation of Pauli measurements on two events and
//! reconstruction of the PDO from the estimated correlations.
//!
//! Setting `a = 0` (or `b = 0`) means that side does not measure: the
//! outcome is recorded as `+1` and the system is left untouched, which is
//! what `Π_{x|0} = ½(I + x I)` gives (`Π_+ = I`, `Π_- = 0`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DensityOperator;
use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, ComplexMatrix};
use crate::pdo::{pdo_from_pauli_coeffs, Direction, PauliTable, Pdo, TemporalSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    /// Both events are arms of one bipartite state.
    Spatial(DensityOperator),
    /// One qubit measured, sent through a channel and measured again.
    Temporal(TemporalSpec),
    /// Each shot draws one component with the given probability.
    Mixture(Vec<(f64, Mechanism)>),
}

impl Mechanism {
    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Spatial(rho) if rho.dim() != 4 => {
                Err(Error::Argument("spatial mechanism needs a two-qubit state".into()))
            }
            Mechanism::Temporal(spec) if spec.initial.dim() != 2 => {
                Err(Error::Argument("temporal mechanism needs a qubit input".into()))
            }
            Mechanism::Mixture(parts) => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                if parts.is_empty()
                    || parts.iter().any(|(w, _)| !(*w >= 0.0))
                    || (total - 1.0).abs() > 1e-12
                {
                    return Err(Error::Argument("mixture weights must be a distribution".into()));
                }
                parts.iter().try_for_each(|(_, m)| m.validate())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub r_hat: PauliTable,
    pub shots_per_setting: u64,
    pub standard_errors: PauliTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub pdo: Pdo,
    /// Marginal Bloch vectors were shrunk back onto the unit ball.
    pub projected: bool,
}

/// `Π_{x|a} = ½(I + x σ_a)`.
pub fn projector(a: usize, x: i8) -> Result<ComplexMatrix> {
    if x != 1 && x != -1 {
        return Err(Error::Argument(format!("outcome must be +1 or -1, got {x}")));
    }
    let s = pauli(a)?;
    Ok((ComplexMatrix::identity(2) + s.scale(f64::from(x))).scale(0.5))
}

/// Unnormalized channel outputs after the first measurement, one per outcome
/// `+1, −1`; their traces are the outcome probabilities.
fn temporal_branches(spec: &TemporalSpec, first: usize) -> Result<[ComplexMatrix; 2]> {
    let rho = spec.initial.matrix();
    let mut out = [ComplexMatrix::zeros(2); 2];
    for (slot, x) in out.iter_mut().zip([1i8, -1]) {
        let p = projector(first, x)?;
        *slot = spec.channel.apply(&(p * *rho * p));
    }
    Ok(out)
}

/// `Pr(x, y | a, b)` with `x` the outcome at A and `y` the outcome at B.
pub fn joint_probability(m: &Mechanism, a: usize, b: usize, x: i8, y: i8) -> Result<f64> {
    let (pa, pb) = (projector(a, x)?, projector(b, y)?);
    Ok(match m {
        Mechanism::Spatial(rho) => (*rho.matrix() * tensor(&pa, &pb)).trace().re,
        Mechanism::Temporal(spec) => {
            let (p_first, p_second) = match spec.direction {
                Direction::Forward => (pa, pb),
                Direction::Reverse => (pb, pa),
            };
            let rho = spec.initial.matrix();
            (spec.channel.apply(&(p_first * *rho * p_first)) * p_second).trace().re
        }
        Mechanism::Mixture(parts) => {
            let mut total = 0.0;
            for (w, part) in parts {
                total += w * joint_probability(part, a, b, x, y)?;
            }
            total
        }
    })
}

/// The infinite-shot correlation table `r_ab = Σ_xy x y Pr(x, y | a, b)`.
pub fn exact_correlations(m: &Mechanism) -> Result<PauliTable> {
    m.validate()?;
    let mut r = [[0.0; 4]; 4];
    for (a, row) in r.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            for x in [1i8, -1] {
                for y in [1i8, -1] {
                    *v += f64::from(x * y) * joint_probability(m, a, b, x, y)?;
                }
            }
        }
    }
    Ok(r)
}

/// Per-setting sampler: outcome distributions precomputed once.
enum Sampler {
    /// Joint distribution over `(x, y)` in the order `++, +-, -+, --`.
    Joint([f64; 4]),
    /// `Pr(first = +1)` and `Pr(second = +1 | first)`, plus whether the first
    /// measurement happens at B.
    TwoStage { p_first: f64, p_second: [f64; 2], first_is_b: bool },
    Mixture(Vec<(f64, Sampler)>),
}

const OUTCOMES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

impl Sampler {
    fn new(m: &Mechanism, a: usize, b: usize) -> Result<Self> {
        Ok(match m {
            Mechanism::Spatial(_) => {
                let mut p = [0.0; 4];
                for (slot, (x, y)) in p.iter_mut().zip(OUTCOMES) {
                    *slot = joint_probability(m, a, b, x, y)?.max(0.0);
                }
                Sampler::Joint(p)
            }
            Mechanism::Temporal(spec) => {
                let (first, second, first_is_b) = match spec.direction {
                    Direction::Forward => (a, b, false),
                    Direction::Reverse => (b, a, true),
                };
                let branches = temporal_branches(spec, first)?;
                let weight = |m: &ComplexMatrix| m.trace().re.max(0.0);
                let p_first = weight(&branches[0]) / (weight(&branches[0]) + weight(&branches[1]));
                let proj = projector(second, 1)?;
                let mut p_second = [0.0; 2];
                for (slot, branch) in p_second.iter_mut().zip(&branches) {
                    let w = weight(branch);
                    *slot = if w > 0.0 {
                        ((*branch * proj).trace().re / w).clamp(0.0, 1.0)
                    } else {
                        0.5
                    };
                }
                Sampler::TwoStage { p_first, p_second, first_is_b }
            }
            Mechanism::Mixture(parts) => Sampler::Mixture(
                parts
                    .iter()
                    .map(|(w, part)| Ok((*w, Sampler::new(part, a, b)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (i8, i8) {
        match self {
            Sampler::Joint(p) => {
                let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
                let mut acc = 0.0;
                for (pi, outcome) in p.iter().zip(OUTCOMES) {
                    acc += pi;
                    if u < acc {
                        return outcome;
                    }
                }
                OUTCOMES[3]
            }
            Sampler::TwoStage { p_first, p_second, first_is_b } => {
                let first: i8 = if rng.random::<f64>() < *p_first { 1 } else { -1 };
                let branch = usize::from(first == -1);
                let second: i8 = if rng.random::<f64>() < p_second[branch] { 1 } else { -1 };
                if *first_is_b {
                    (second, first)
                } else {
                    (first, second)
                }
            }
            Sampler::Mixture(parts) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, part) in parts {
                    acc += w;
                    if u < acc {
                        return part.draw(rng);
                    }
                }
                parts.last().expect("non-empty mixture").1.draw(rng)
            }
        }
    }
}

/// Estimates all sixteen correlations from `shots` rounds per setting.
/// Setting `(a, b)` uses its own generator seeded with `seed ^ (4a + b)`, so
/// results do not depend on scheduling.
pub fn sample_correlations(m: &Mechanism, shots: u64, seed: u64) -> Result<CorrelationEstimate> {
    if shots == 0 {
        return Err(Error::Argument("shots per setting must be at least 1".into()));
    }
    m.validate()?;
    let settings: Vec<(usize, usize)> = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
    let stats = settings
        .par_iter()
        .map(|&(a, b)| {
            if a == 0 && b == 0 {
                return Ok((1.0, 0.0));
            }
            let sampler = Sampler::new(m, a, b)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (4 * a + b) as u64);
            let mut plus = 0u64;
            for _ in 0..shots {
                let (x, y) = sampler.draw(&mut rng);
                if x * y == 1 {
                    plus += 1;
                }
            }
            let n = shots as f64;
            let mean = (2.0 * plus as f64 - n) / n;
            // Products are ±1, so the sample variance is n/(n−1)·(1 − mean²).
            let var = if shots > 1 {
                (1.0 - mean * mean).max(0.0) * n / (n - 1.0)
            } else {
                0.0
            };
            Ok((mean, (var / n).sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r_hat = [[0.0; 4]; 4];
    let mut standard_errors = [[0.0; 4]; 4];
    for (&(a, b), (mean, se)) in settings.iter().zip(stats) {
        r_hat[a][b] = mean;
        standard_errors[a][b] = se;
    }
    Ok(CorrelationEstimate {
        r_hat,
        shots_per_setting: shots,
        standard_errors,
    })
}

/// Shrinks the Bloch vector `(r_k)` to the unit ball if it overshoots by no
/// more than `allowed`.
fn project_bloch(v: &mut [f64; 3], allowed: f64) -> Result<bool> {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if len <= 1.0 {
        return Ok(false);
    }
    if len - 1.0 > allowed {
        return Err(Error::Data(format!(
            "marginal Bloch vector has length {len}, beyond statistical tolerance"
        )));
    }
    v.iter_mut().for_each(|x| *x /= len);
    Ok(true)
}

/// Builds the PDO from estimated correlations, projecting marginals that
/// fall outside the Bloch ball within statistical tolerance.
pub fn reconstruct_pdo(est: &CorrelationEstimate) -> Result<Reconstruction> {
    let mut r = est.r_hat;
    let se = &est.standard_errors;
    for a in 0..4 {
        for b in 0..4 {
            let v = r[a][b];
            if !v.is_finite() || v.abs() > 1.0 + 5.0 * se[a][b] + 1e-12 {
                return Err(Error::Data(format!(
                    "r_hat[{a}][{b}] = {v} is inconsistent with its standard error"
                )));
            }
            r[a][b] = v.clamp(-1.0, 1.0);
        }
    }
    r[0][0] = 1.0;
    let tolerance = |k: [f64; 3]| 5.0 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt() + 1e-12;
    let mut marginal_a = [r[1][0], r[2][0], r[3][0]];
    let mut marginal_b = [r[0][1], r[0][2], r[0][3]];
    let projected_a = project_bloch(&mut marginal_a, tolerance([se[1][0], se[2][0], se[3][0]]))?;
    let projected_b = project_bloch(&mut marginal_b, tolerance([se[0][1], se[0][2], se[0][3]]))?;
    for k in 0..3 {
        r[k + 1][0] = marginal_a[k];
        r[0][k + 1] = marginal_b[k];
    }
    Ok(Reconstruction {
        pdo: pdo_from_pauli_coeffs(&r)?,
        projected: projected_a || projected_b,
    })
}

/// Noise-free reconstruction straight from [`exact_correlations`].
pub fn reconstruct_exact(m: &Mechanism) -> Result<Pdo> {
    pdo_from_pauli_coeffs(&exact_correlations(m)?)
}
