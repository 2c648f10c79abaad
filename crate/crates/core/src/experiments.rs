//! Named PDO families and the batch sweeps built on them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atemporality::{classify, CausalReport, Tolerances};
use crate::channel::{
    random_channel, random_density_operator, random_unitary, DensityOperator, QuantumChannel,
    KET0, RANDOM_STATE_MEASURE,
};
use crate::error::{Error, Result};
use crate::io::format_number;
use crate::linalg::{c, swap_operator, tensor, ComplexMatrix, ONE, ZERO};
use crate::pdo::{pdo_from_state, pdo_from_temporal, Pdo, TemporalSpec};

pub const CSV_HEADER: &str = "p,q,e_neg,f,f_forward,f_reverse,aspatiality,region";

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// `q/3 · P_s + (1 − q) · P_a`, with `P_s`, `P_a` the symmetric and
/// antisymmetric projectors.
pub fn werner(q: f64) -> Result<Pdo> {
    check_unit("q", q)?;
    let id = ComplexMatrix::identity(4);
    let s = swap_operator();
    let sym = (id + s).scale(0.5);
    let anti = (id - s).scale(0.5);
    Pdo::from_matrix(sym.scale(q / 3.0) + anti.scale(1.0 - q))
}

/// `(1 − p) · werner(q) + p |00⟩⟨00|`.
pub fn biased_werner(p: f64, q: f64) -> Result<Pdo> {
    check_unit("p", p)?;
    let w = werner(q)?;
    let zz = ComplexMatrix::outer(&[ONE, ZERO, ZERO, ZERO]);
    Pdo::from_matrix(w.matrix().scale(1.0 - p) + zz.scale(p))
}

/// `¼|+⟩⟨+| + ¾|−⟩⟨−|` sent through `ρ ↦ pρ + (1 − p)ZρZ`.
pub fn dephasing_asymmetry(p: f64) -> Result<Pdo> {
    check_unit("p", p)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ComplexMatrix::outer(&[c(h, 0.0), c(h, 0.0)]);
    let minus = ComplexMatrix::outer(&[c(h, 0.0), c(-h, 0.0)]);
    let rho = DensityOperator::new(plus.scale(0.25) + minus.scale(0.75))?;
    pdo_from_temporal(&TemporalSpec::forward(rho, QuantumChannel::dephasing(p)?))
}

/// Equal mixture of `|0⟩` through the identity and `|+⟩` through the fully
/// depolarizing channel.
pub fn mixture_counterexample() -> Pdo {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = DensityOperator::pure(&KET0).expect("normalized");
    let plus = DensityOperator::pure(&[c(h, 0.0), c(h, 0.0)]).expect("normalized");
    let noise = QuantumChannel::constant(&DensityOperator::maximally_mixed(2)).expect("valid");
    let a = pdo_from_temporal(&TemporalSpec::forward(zero, QuantumChannel::identity()))
        .expect("valid temporal PDO");
    let b = pdo_from_temporal(&TemporalSpec::forward(plus, noise)).expect("valid temporal PDO");
    Pdo::mix(&[(0.5, &a), (0.5, &b)]).expect("convex mixture of PDOs")
}

/// `Σ_i p_i |e_i⟩⟨e_i| ⊗ τ_i` for an orthonormal qubit basis `{e_0, e_1}`.
pub fn zero_discord_state(
    p0: f64,
    basis: [[Complex64; 2]; 2],
    tau0: &DensityOperator,
    tau1: &DensityOperator,
) -> Result<Pdo> {
    check_unit("p0", p0)?;
    let inner = |a: &[Complex64; 2], b: &[Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    let (e0, e1) = (&basis[0], &basis[1]);
    if (inner(e0, e0).re - 1.0).abs() > 1e-10
        || (inner(e1, e1).re - 1.0).abs() > 1e-10
        || inner(e0, e1).norm() > 1e-10
    {
        return Err(Error::Argument("basis must be orthonormal".into()));
    }
    let m = tensor(&ComplexMatrix::outer(e0), tau0.matrix()).scale(p0)
        + tensor(&ComplexMatrix::outer(e1), tau1.matrix()).scale(1.0 - p0);
    Pdo::from_matrix(m)
}

/// Two-qubit state with both marginals `I/2`: a random Bell-diagonal
/// mixture rotated by random local unitaries.
pub fn random_maximally_mixed_marginal_state<R: Rng + ?Sized>(rng: &mut R) -> Result<Pdo> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bells = [
        [c(h, 0.0), ZERO, ZERO, c(h, 0.0)],
        [c(h, 0.0), ZERO, ZERO, c(-h, 0.0)],
        [ZERO, c(h, 0.0), c(h, 0.0), ZERO],
        [ZERO, c(h, 0.0), c(-h, 0.0), ZERO],
    ];
    // Uniform weights on the probability simplex.
    let mut w: Vec<f64> = (0..4).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut m = ComplexMatrix::zeros(4);
    for (wi, b) in w.iter().zip(&bells) {
        m += ComplexMatrix::outer(b).scale(*wi);
    }
    let (u, v) = (random_unitary(rng), random_unitary(rng));
    Pdo::from_matrix(m)?.local_unitary(&u, &v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameters: BTreeMap<String, f64>,
    pub measures: CausalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub generator: String,
    pub seed: Option<u64>,
    pub measure: Option<String>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Header-first CSV; parameters other than `p` and `q` and a withheld
    /// `e_neg` leave their cells empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let cell = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        for row in &self.rows {
            let m = &row.measures;
            let fields = [
                cell(row.parameters.get("p").copied()),
                cell(row.parameters.get("q").copied()),
                cell(m.e_neg),
                cell(Some(m.f)),
                cell(Some(m.f_forward)),
                cell(Some(m.f_reverse)),
                cell(Some(m.aspatiality)),
                m.region.as_str().to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

type Point = Vec<(&'static str, f64)>;

/// Classifies every `(parameters, PDO)` pair in parallel, keeping input order.
fn sweep(
    generator: &str,
    points: Vec<(Point, Pdo)>,
    tol: &Tolerances,
    seed: Option<u64>,
    measure: Option<&str>,
) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::Argument("a sweep needs at least one point".into()));
    }
    tol.validate()?;
    let rows = points
        .into_par_iter()
        .map(|(params, r)| {
            Ok(SweepRow {
                parameters: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                measures: classify(&r, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        metadata: SweepMetadata {
            generator: generator.to_string(),
            seed,
            measure: measure.map(str::to_string),
            tolerances: *tol,
        },
    })
}

/// `n ≥ 2` evenly spaced values on `[0, 1]`.
pub fn unit_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Argument(format!("grid size must be at least 2, got {n}")));
    }
    Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect())
}

/// Werner states along an `n`-point `q` grid.
pub fn werner_line(n: usize, tol: &Tolerances) -> Result<SweepResult> {
    let points = unit_grid(n)?
        .into_iter()
        .map(|q| Ok((vec![("q", q)], werner(q)?)))
        .collect::<Result<Vec<_>>>()?;
    sweep("werner", points, tol, None, None)
}

/// Biased Werner states over a `grid_p × grid_q` lattice, `p` major.
pub fn colormap_biased_werner(grid_p: usize, grid_q: usize, tol: &Tolerances) -> Result<SweepResult> {
    let qs = unit_grid(grid_q)?;
    let mut points = Vec::with_capacity(grid_p * grid_q);
    for p in unit_grid(grid_p)? {
        for &q in &qs {
            points.push((vec![("p", p), ("q", q)], biased_werner(p, q)?));
        }
    }
    sweep("colormap", points, tol, None, None)
}

pub fn biased_werner_point(p: f64, q: f64, tol: &Tolerances) -> Result<SweepResult> {
    sweep("biased-werner", vec![(vec![("p", p), ("q", q)], biased_werner(p, q)?)], tol, None, None)
}

/// The dephasing family over an `n`-point `p` grid.
pub fn asymmetry_line(n: usize, tol: &Tolerances) -> Result<SweepResult> {
    let points = unit_grid(n)?
        .into_iter()
        .map(|p| Ok((vec![("p", p)], dephasing_asymmetry(p)?)))
        .collect::<Result<Vec<_>>>()?;
    sweep("asymmetry", points, tol, None, None)
}

pub fn mixture_sweep(tol: &Tolerances) -> Result<SweepResult> {
    sweep("mixture", vec![(vec![], mixture_counterexample())], tol, None, None)
}

/// `n` Hilbert–Schmidt random two-qubit states. States are drawn serially
/// from the seed, then classified in parallel.
pub fn scatter_random_spatial(n: usize, seed: u64, tol: &Tolerances) -> Result<SweepResult> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|i| {
            let rho = random_density_operator(4, &mut rng)?;
            Ok((vec![("index", i as f64)], pdo_from_state(&rho)?))
        })
        .collect::<Result<Vec<_>>>()?;
    sweep("random-scatter", points, tol, Some(seed), Some(RANDOM_STATE_MEASURE))
}

/// `n` forward-temporal PDOs from Hilbert–Schmidt random inputs and
/// Ginibre-sampled channels.
pub fn scatter_random_temporal(n: usize, seed: u64, tol: &Tolerances) -> Result<SweepResult> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|i| {
            let rho = random_density_operator(2, &mut rng)?;
            let ch = random_channel(&mut rng);
            Ok((vec![("index", i as f64)], pdo_from_temporal(&TemporalSpec::forward(rho, ch))?))
        })
        .collect::<Result<Vec<_>>>()?;
    sweep("random-temporal", points, tol, Some(seed), Some("hilbert-schmidt+ginibre"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atemporality::{aspatiality, entanglement_negativity, Region};
    use crate::linalg::{negativity, partial_trace, partial_transpose, Subsystem};

    fn ppt(r: &Pdo) -> bool {
        negativity(&partial_transpose(r.matrix(), Subsystem::A).unwrap()).unwrap() < 1e-12
    }

    #[test]
    fn werner_marginals_and_endpoints() {
        for q in [0.0, 0.3, 0.5, 1.0] {
            let w = werner(q).unwrap();
            let half = ComplexMatrix::identity(2).scale(0.5);
            assert!(w.marginal_a().max_abs_diff(&half) < 1e-15);
            assert!(w.marginal_b().max_abs_diff(&half) < 1e-15);
            assert!(aspatiality(&w) < 1e-12);
        }
        // q = 0 is the singlet.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = ComplexMatrix::outer(&[ZERO, c(h, 0.0), c(-h, 0.0), ZERO]);
        assert!(werner(0.0).unwrap().matrix().max_abs_diff(&singlet) < 1e-15);
        assert!(ppt(&werner(1.0).unwrap()));
        assert!(werner(1.5).is_err());
    }

    #[test]
    fn werner_negativity_closed_form() {
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let expected = (0.5 - q).max(0.0);
            assert!((entanglement_negativity(&werner(q).unwrap()) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn biased_werner_endpoints() {
        assert_eq!(biased_werner(0.0, 0.4).unwrap(), werner(0.4).unwrap());
        let r = biased_werner(1.0, 0.4).unwrap();
        let zz = ComplexMatrix::outer(&[ONE, ZERO, ZERO, ZERO]);
        assert!(r.matrix().max_abs_diff(&zz) < 1e-15);
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert!(rep.f < 1e-6);
        assert_eq!(rep.e_neg, Some(0.0));
        assert!(biased_werner(-0.1, 0.2).is_err());
    }

    #[test]
    fn asymmetry_marginal_and_endpoints() {
        let r = dephasing_asymmetry(0.5).unwrap();
        let a = r.marginal_a();
        // ¼|+⟩⟨+| + ¾|−⟩⟨−| = I/2 − X/4.
        assert!((a[(0, 1)].re + 0.25).abs() < 1e-15);
        let tol = Tolerances::default();
        for p in [0.0, 1.0] {
            let rep = classify(&dephasing_asymmetry(p).unwrap(), &tol).unwrap();
            assert!(rep.f_reverse <= tol.eps_temporal);
        }
        let rep = classify(&r, &tol).unwrap();
        assert!(rep.f_forward < 1e-9);
        assert!(rep.f_reverse > tol.eps_temporal);
    }

    #[test]
    fn mixture_is_neither_spatial_nor_temporal() {
        let r = mixture_counterexample();
        assert!(aspatiality(&r) > 1e-3);
        let rep = classify(&r, &Tolerances::default()).unwrap();
        assert_eq!(rep.region, Region::Neither);
        assert_eq!(mixture_counterexample(), r);
    }

    #[test]
    fn zero_discord_states_are_temporal() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let tol = Tolerances::default();
        for _ in 0..20 {
            let u = random_unitary(&mut rng);
            let basis = [[u[(0, 0)], u[(1, 0)]], [u[(0, 1)], u[(1, 1)]]];
            let t0 = random_density_operator(2, &mut rng).unwrap();
            let t1 = random_density_operator(2, &mut rng).unwrap();
            let p0 = rng.random_range(0.0..1.0);
            let r = zero_discord_state(p0, basis, &t0, &t1).unwrap();
            let rep = classify(&r, &tol).unwrap();
            assert!(rep.aspatiality <= tol.eps_spatial);
            assert!(rep.f <= tol.eps_temporal, "f = {}", rep.f);
        }
        let t = DensityOperator::maximally_mixed(2);
        let bad = [[ONE, ZERO], [ONE, ZERO]];
        assert!(zero_discord_state(0.5, bad, &t, &t).is_err());
        let std = [[ONE, ZERO], [ZERO, ONE]];
        let product = zero_discord_state(1.0, std, &t, &t).unwrap();
        assert!(product.matrix().max_abs_diff(&tensor(&ComplexMatrix::diag(&[1.0, 0.0]), t.matrix())) < 1e-15);
    }

    #[test]
    fn maximally_mixed_marginal_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let half = ComplexMatrix::identity(2).scale(0.5);
        for _ in 0..50 {
            let r = random_maximally_mixed_marginal_state(&mut rng).unwrap();
            assert!(partial_trace(r.matrix(), Subsystem::B).unwrap().max_abs_diff(&half) < 1e-12);
            assert!(partial_trace(r.matrix(), Subsystem::A).unwrap().max_abs_diff(&half) < 1e-12);
            assert!(aspatiality(&r) < 1e-12);
        }
    }

    #[test]
    fn sweeps_are_deterministic_and_well_formed() {
        let tol = Tolerances::default();
        let a = scatter_random_spatial(20, 7, &tol).unwrap();
        let b = scatter_random_spatial(20, 7, &tol).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_csv().lines().count(), 21);
        assert!(a.to_csv().starts_with(CSV_HEADER));
        let keys: Vec<_> = a.rows.iter().map(|r| r.parameters.keys().cloned().collect::<Vec<_>>()).collect();
        assert!(keys.windows(2).all(|w| w[0] == w[1]));

        let cm = colormap_biased_werner(3, 4, &tol).unwrap();
        assert_eq!(cm.rows.len(), 12);
        assert_eq!(cm.rows[5].parameters["p"], 0.5);
        assert!(scatter_random_spatial(0, 1, &tol).is_err());
        assert!(unit_grid(1).is_err());
    }

    #[test]
    fn mixture_csv_leaves_non_state_cells_blank() {
        let csv = mixture_sweep(&Tolerances::default()).unwrap().to_csv();
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with(",,,"));
        assert!(row.ends_with("Sc∩Tc"));
    }
}
