//! Generators and independent oracles shared by the integration tests.
//!
//! The oracles use nalgebra's Hermitian eigensolver and index-level partial
//! operations, so they do not share code paths with the library.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use pdo_causal::channel::{random_channel, random_density_operator, random_pure_state, ChoiMap, DensityOperator};
use pdo_causal::linalg::{paulis, tensor, ComplexMatrix};
use pdo_causal::pdo::{temporal_matrix, Pdo};
use rand::Rng;

pub type M4 = Matrix4<Complex64>;
pub type M2 = Matrix2<Complex64>;

pub fn to_na(m: &ComplexMatrix) -> M4 {
    assert_eq!(m.dim(), 4);
    M4::from_fn(|i, j| m[(i, j)])
}

pub fn eigenvalues(m: &M4) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn negativity(m: &M4) -> f64 {
    eigenvalues(m).iter().filter(|x| **x < 0.0).map(|x| -x).sum()
}

/// Transpose of the first tensor factor, on `|ij⟩ → 2i + j` indices.
pub fn partial_transpose_a(m: &M4) -> M4 {
    M4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        m[(2 * k + j, 2 * i + l)]
    })
}

pub fn trace_out_b(m: &M4) -> M2 {
    M2::from_fn(|i, k| m[(2 * i, 2 * k)] + m[(2 * i + 1, 2 * k + 1)])
}

pub fn trace_out_a(m: &M4) -> M2 {
    M2::from_fn(|j, l| m[(j, l)] + m[(2 + j, 2 + l)])
}

pub fn kron(a: &M2, b: &M2) -> M4 {
    M4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `(‖R^{T_A}‖₁ − 1)/2`.
pub fn entanglement_negativity(m: &M4) -> f64 {
    let norm1: f64 = eigenvalues(&partial_transpose_a(m)).iter().map(|x| x.abs()).sum();
    ((norm1 - 1.0) / 2.0).max(0.0)
}

pub fn is_ppt(m: &M4) -> bool {
    eigenvalues(&partial_transpose_a(m))[0] > -1e-12
}

/// Brute-force minimum of the `τ`-family Choi negativity, written with the
/// `R − ½ρ_A⊗ρ_B + ½(I − ρ_A)⊗τ` form of the family. Scans the cube grid of
/// spacing `coarse` inside `|v| ≤ radius`, then a `fine` grid over
/// `±fine_half_width` around the coarse incumbent.
pub fn grid_oracle(r: &M4, coarse: f64, radius: f64, fine: f64, fine_half_width: f64) -> (f64, [f64; 3]) {
    let rho_a = trace_out_b(r);
    let rho_b = trace_out_a(r);
    let id = M2::identity();
    let half = Complex64::new(0.5, 0.0);
    let base = r - kron(&rho_a, &rho_b) * half + kron(&(id - rho_a), &(id * half)) * half;
    let comp = (id - rho_a) * Complex64::new(0.25, 0.0);
    let p = pauli_na();
    let base_pt = partial_transpose_a(&base);
    let dirs: Vec<M4> = (1..4).map(|k| partial_transpose_a(&kron(&comp, &p[k]))).collect();
    let value = |v: [f64; 3]| {
        let m = base_pt
            + dirs[0] * Complex64::new(v[0], 0.0)
            + dirs[1] * Complex64::new(v[1], 0.0)
            + dirs[2] * Complex64::new(v[2], 0.0);
        negativity(&m)
    };
    let scan = |center: [f64; 3], step: f64, half_width: f64, ball: Option<f64>, best: &mut (f64, [f64; 3])| {
        let n = (half_width / step).round() as i64;
        for i in -n..=n {
            for j in -n..=n {
                for k in -n..=n {
                    let v = [
                        center[0] + i as f64 * step,
                        center[1] + j as f64 * step,
                        center[2] + k as f64 * step,
                    ];
                    if let Some(rad) = ball {
                        if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() > rad {
                            continue;
                        }
                    }
                    let g = value(v);
                    if g < best.0 {
                        *best = (g, v);
                    }
                }
            }
        }
    };
    let mut best = (f64::INFINITY, [0.0; 3]);
    scan([0.0; 3], coarse, radius, Some(radius), &mut best);
    let incumbent = best.1;
    scan(incumbent, fine, fine_half_width, None, &mut best);
    best
}

pub fn pauli_na() -> [M2; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        M2::new(o, z, z, o),
        M2::new(z, o, o, z),
        M2::new(z, -i, i, z),
        M2::new(o, z, z, -o),
    ]
}

/// A Choi operator `χ_cptp + ε H / 4` with `tr_B H = 0`: trace preserving
/// and Hermitian, completely positive only for small `ε`.
pub fn random_pseudo_channel_choi<R: Rng + ?Sized>(rng: &mut R, eps: f64) -> ComplexMatrix {
    let p = paulis();
    let ch = random_channel(rng);
    let mut h = ComplexMatrix::zeros(4);
    for a in 0..4 {
        for b in 1..4 {
            h += tensor(&p[a], &p[b]).scale(rng.random_range(-1.0..1.0));
        }
    }
    *ch.choi() + h.scale(eps / 4.0)
}

/// A forward PDO built from a random pseudo-channel acting on `ρ_A`.
/// Draws until the B marginal is a valid state.
pub fn random_pseudo_temporal_pdo<R: Rng + ?Sized>(rng: &mut R, rho_a: &DensityOperator, max_eps: f64) -> Pdo {
    loop {
        let eps = rng.random_range(0.0..max_eps);
        let chi = random_pseudo_channel_choi(rng, eps);
        if let Ok(r) = Pdo::from_matrix(temporal_matrix(rho_a.matrix(), &chi)) {
            return r;
        }
    }
}

pub fn random_pure_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityOperator {
    DensityOperator::pure(&random_pure_state(2, rng)).expect("normalized")
}

pub fn random_full_rank_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityOperator {
    random_density_operator(2, rng).expect("valid")
}
