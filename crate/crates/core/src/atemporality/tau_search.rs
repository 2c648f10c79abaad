//! Minimization of Choi negativity over the `τ` family of pseudo-channels.
//!
//! For a pure marginal every `τ(v) = (I + v·σ)/2` labels a compatible
//! pseudo-channel whose Choi operator is affine in `v`, so the negativity
//! `g(v)` is convex and coercive. The search alternates golden-section line
//! minimizations along a fixed direction set (plus the last net step) with
//! Nelder–Mead refinement, inside a ball that grows while the incumbent sits
//! on its boundary.

use crate::error::{Error, Result};
use crate::linalg::{negativity_unchecked, partial_transpose, paulis, tensor, ComplexMatrix, Subsystem};
use crate::pdo::{swap_pdo, Direction, Pdo};
use crate::pseudo_channel::{family_pdo, marginal_lambda_min, tau_from_bloch, EPS_RANK, NEAR_RANK_FACTOR};

pub const INITIAL_RADIUS: f64 = 4.0;
pub const MAX_RADIUS: f64 = 64.0;
/// Golden-section stopping width in `v`.
pub const LINE_TOL: f64 = 1e-7;

const MAX_ROUNDS: usize = 200;
const NM_MAX_EVALS: usize = 3000;
const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauOptimizationResult {
    /// Bloch vector of the optimal `τ`.
    pub v_star: [f64; 3],
    /// Minimal Choi negativity.
    pub value: f64,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// Gap to a grid search, when one was run.
    pub certificate: Option<f64>,
}

impl TauOptimizationResult {
    pub fn tau(&self) -> ComplexMatrix {
        tau_from_bloch(self.v_star)
    }
}

/// `v ↦ (R_{τ(v)})^{T_A}` stored as a base point and three directions.
#[derive(Clone, Debug)]
pub struct TauObjective {
    base: ComplexMatrix,
    dirs: [ComplexMatrix; 3],
}

impl TauObjective {
    /// Objective for the forward family of `r`.
    pub fn new(r: &Pdo) -> Self {
        let base = partial_transpose(&family_pdo(r, &tau_from_bloch([0.0; 3])), Subsystem::A)
            .expect("4x4");
        let complement = (ComplexMatrix::identity(2) - r.marginal_a()).scale(0.25);
        let p = paulis();
        let dirs = [1, 2, 3].map(|k| {
            partial_transpose(&tensor(&complement, &p[k]), Subsystem::A).expect("4x4")
        });
        Self { base, dirs }
    }

    pub fn choi(&self, v: [f64; 3]) -> ComplexMatrix {
        let mut m = self.base;
        for (d, x) in self.dirs.iter().zip(v) {
            m += d.scale(x);
        }
        m
    }

    /// `g(v)`, the negativity of the Choi operator at `τ(v)`.
    pub fn value(&self, v: [f64; 3]) -> f64 {
        negativity_unchecked(&self.choi(v))
    }
}

fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy(x: [f64; 3], t: f64, d: [f64; 3]) -> [f64; 3] {
    [x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]]
}

struct Search<'a> {
    objective: &'a TauObjective,
    radius: f64,
    evals: usize,
}

impl Search<'_> {
    fn eval(&mut self, v: [f64; 3]) -> f64 {
        if norm(v) > self.radius {
            return f64::INFINITY;
        }
        self.evals += 1;
        self.objective.value(v)
    }

    /// Golden-section minimization of `t ↦ g(x + t d)` over the chord of the
    /// ball through `x`. Returns the new point if it improves on `fx`.
    fn line(&mut self, x: [f64; 3], fx: f64, d: [f64; 3]) -> ([f64; 3], f64) {
        let b = dot(x, d);
        let disc = b * b - dot(x, x) + self.radius * self.radius;
        if disc <= 0.0 {
            return (x, fx);
        }
        let root = disc.sqrt();
        let (mut lo, mut hi) = (-b - root, -b + root);
        let invphi = (5f64.sqrt() - 1.0) / 2.0;
        let mut t1 = hi - invphi * (hi - lo);
        let mut t2 = lo + invphi * (hi - lo);
        let mut f1 = self.eval(axpy(x, t1, d));
        let mut f2 = self.eval(axpy(x, t2, d));
        while hi - lo > LINE_TOL {
            if f1 <= f2 {
                hi = t2;
                t2 = t1;
                f2 = f1;
                t1 = hi - invphi * (hi - lo);
                f1 = self.eval(axpy(x, t1, d));
            } else {
                lo = t1;
                t1 = t2;
                f1 = f2;
                t2 = lo + invphi * (hi - lo);
                f2 = self.eval(axpy(x, t2, d));
            }
        }
        let (t, ft) = if f1 <= f2 { (t1, f1) } else { (t2, f2) };
        if ft < fx {
            (axpy(x, t, d), ft)
        } else {
            (x, fx)
        }
    }

    fn nelder_mead(&mut self, x: [f64; 3], fx: f64, size: f64) -> ([f64; 3], f64) {
        let mut simplex: Vec<([f64; 3], f64)> = vec![(x, fx)];
        for k in 0..3 {
            let mut p = x;
            p[k] += size;
            if norm(p) > self.radius {
                p[k] -= 2.0 * size;
            }
            let fp = self.eval(p);
            simplex.push((p, fp));
        }
        let budget = self.evals + NM_MAX_EVALS;
        while self.evals < budget {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (simplex[0], simplex[3]);
            let spread = worst.1 - best.1;
            let diameter = simplex[1..]
                .iter()
                .map(|(p, _)| norm(axpy(*p, -1.0, best.0)))
                .fold(0.0, f64::max);
            if diameter < 1e-10 || (spread < 1e-15 && diameter < 1e-7) {
                break;
            }
            let mut centroid = [0.0; 3];
            for (p, _) in &simplex[..3] {
                centroid = axpy(centroid, 1.0 / 3.0, *p);
            }
            let toward = axpy(centroid, -1.0, worst.0);
            let reflected = axpy(centroid, 1.0, toward);
            let fr = self.eval(reflected);
            if fr < best.1 {
                let expanded = axpy(centroid, 2.0, toward);
                let fe = self.eval(expanded);
                simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[2].1 {
                simplex[3] = (reflected, fr);
            } else {
                let contracted = if fr < worst.1 {
                    axpy(centroid, 0.5, toward)
                } else {
                    axpy(centroid, -0.5, toward)
                };
                let fc = self.eval(contracted);
                if fc < worst.1.min(fr) {
                    simplex[3] = (contracted, fc);
                } else {
                    for i in 1..4 {
                        let p = axpy(best.0, 0.5, axpy(simplex[i].0, -1.0, best.0));
                        simplex[i] = (p, self.eval(p));
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < fx {
            simplex[0]
        } else {
            (x, fx)
        }
    }
}

fn search_directions() -> Vec<[f64; 3]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    vec![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [h, h, 0.0],
        [h, -h, 0.0],
        [h, 0.0, h],
        [h, 0.0, -h],
        [0.0, h, h],
        [0.0, h, -h],
        [t, t, t],
        [t, t, -t],
        [t, -t, t],
        [-t, t, t],
    ]
}

/// Minimizes `g` starting from `start`. `tol_opt` bounds the per-round
/// improvement at which the search is considered converged.
pub fn minimize_objective(
    objective: &TauObjective,
    start: [f64; 3],
    tol_opt: f64,
) -> Result<TauOptimizationResult> {
    if !(tol_opt > 0.0) {
        return Err(Error::Argument("tol_opt must be positive".into()));
    }
    let mut search = Search {
        objective,
        radius: INITIAL_RADIUS,
        evals: 0,
    };
    let mut x = if norm(start) < INITIAL_RADIUS - BOUNDARY_MARGIN {
        start
    } else {
        [0.0; 3]
    };
    let mut fx = search.eval(x);
    let directions = search_directions();
    let stall = (tol_opt * 1e-4).max(1e-14);
    let mut step: f64 = 0.5;
    for _ in 0..MAX_ROUNDS {
        let round_start = (x, fx);
        for d in &directions {
            (x, fx) = search.line(x, fx, *d);
        }
        let moved = axpy(x, -1.0, round_start.0);
        let len = norm(moved);
        if len > 0.0 {
            (x, fx) = search.line(x, fx, moved.map(|m| m / len));
        }
        (x, fx) = search.nelder_mead(x, fx, step.max(1e-4));
        step = norm(axpy(x, -1.0, round_start.0)).clamp(1e-4, 1.0);

        let on_boundary = norm(x) > search.radius - BOUNDARY_MARGIN;
        if round_start.1 - fx <= stall && fx < f64::INFINITY {
            if !on_boundary {
                return Ok(TauOptimizationResult {
                    v_star: x,
                    value: fx.max(0.0),
                    iterations: search.evals,
                    certificate: None,
                });
            }
            if search.radius >= MAX_RADIUS {
                return Err(Error::Solver {
                    message: format!("minimizer on the boundary of the |v| <= {MAX_RADIUS} region"),
                    best: fx,
                });
            }
            search.radius *= 2.0;
        }
    }
    Err(Error::Solver {
        message: format!("no convergence after {MAX_ROUNDS} rounds"),
        best: fx,
    })
}

fn oriented(r: &Pdo, direction: Direction) -> Pdo {
    match direction {
        Direction::Forward => *r,
        Direction::Reverse => swap_pdo(r),
    }
}

/// Minimal Choi negativity over the `τ` family in the given direction.
/// The source marginal must be rank deficient (or within the near-threshold
/// band).
pub fn minimize_negativity_over_tau(
    r: &Pdo,
    direction: Direction,
    tol_opt: f64,
) -> Result<TauOptimizationResult> {
    let source = oriented(r, direction);
    let lambda_min = marginal_lambda_min(&source.marginal_a());
    if lambda_min >= NEAR_RANK_FACTOR * EPS_RANK {
        return Err(Error::Argument(format!(
            "tau optimization needs a rank-deficient marginal (lambda_min = {lambda_min:e})"
        )));
    }
    let objective = TauObjective::new(&source);
    // The constant channel onto the output marginal is a natural first guess.
    let start = crate::channel::bloch_vector(&source.marginal_b());
    minimize_objective(&objective, start, tol_opt)
}

/// Fills `certificate` with `max(0, value − grid minimum)` over a cubic grid
/// of spacing `step` restricted to `|v| ≤ radius`.
pub fn certify(
    r: &Pdo,
    direction: Direction,
    result: &mut TauOptimizationResult,
    step: f64,
    radius: f64,
) -> Result<()> {
    if !(step > 0.0) || !(radius > 0.0) {
        return Err(Error::Argument("grid step and radius must be positive".into()));
    }
    let objective = TauObjective::new(&oriented(r, direction));
    let n = (radius / step).floor() as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                let v = [i as f64 * step, j as f64 * step, k as f64 * step];
                if norm(v) <= radius {
                    best = best.min(objective.value(v));
                }
            }
        }
    }
    result.certificate = Some((result.value - best).max(0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_channel, random_pure_state, DensityOperator, QuantumChannel, KET0};
    use crate::pdo::{pdo_from_temporal, TemporalSpec};
    use crate::pseudo_channel::recover_choi_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pure_marginal_pdo(rng: &mut ChaCha8Rng) -> Pdo {
        let psi = random_pure_state(2, rng);
        let ch = random_channel(rng);
        pdo_from_temporal(&TemporalSpec::forward(DensityOperator::pure(&psi).unwrap(), ch)).unwrap()
    }

    #[test]
    fn affine_objective_matches_family_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..20 {
            let r = random_pure_marginal_pdo(&mut rng);
            let obj = TauObjective::new(&r);
            let v = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let pc = recover_choi_family(&r, &tau_from_bloch(v)).unwrap();
            assert!(obj.choi(v).max_abs_diff(pc.choi()) < 1e-13);
        }
    }

    #[test]
    fn objective_is_midpoint_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..20 {
            let r = random_pure_marginal_pdo(&mut rng);
            let obj = TauObjective::new(&r);
            for _ in 0..50 {
                let a = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
                let b = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
                let mid = axpy(a, 0.5, axpy(b, -1.0, a));
                assert!(obj.value(mid) <= 0.5 * (obj.value(a) + obj.value(b)) + 1e-10);
            }
        }
    }

    #[test]
    fn cptp_sources_reach_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        for _ in 0..20 {
            let r = random_pure_marginal_pdo(&mut rng);
            let res = minimize_negativity_over_tau(&r, Direction::Forward, 1e-5).unwrap();
            assert!(res.value < 1e-6, "value {}", res.value);
        }
        let r = pdo_from_temporal(&TemporalSpec::forward(
            DensityOperator::pure(&KET0).unwrap(),
            QuantumChannel::identity(),
        ))
        .unwrap();
        let res = minimize_negativity_over_tau(&r, Direction::Forward, 1e-5).unwrap();
        assert!(res.value < 1e-6);
    }

    #[test]
    fn full_rank_marginal_is_rejected() {
        let r = pdo_from_temporal(&TemporalSpec::forward(
            DensityOperator::maximally_mixed(2),
            QuantumChannel::identity(),
        ))
        .unwrap();
        assert!(matches!(
            minimize_negativity_over_tau(&r, Direction::Forward, 1e-5),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn coarse_certificate_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let r = random_pure_marginal_pdo(&mut rng);
        let mut res = minimize_negativity_over_tau(&r, Direction::Forward, 1e-5).unwrap();
        certify(&r, Direction::Forward, &mut res, 0.25, 4.0).unwrap();
        assert_eq!(res.certificate, Some(0.0));
    }
}
