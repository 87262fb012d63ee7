//! Time evolution: dense propagation, a fixed-step integrator used as an independent
//! check, and the closed coefficient solutions of the two stages.

mod stage_a;
mod stage_b;

pub use stage_a::{
    stage_a_coefficients, stage_a_generators, stage_a_kets, Side, StageASolution,
    STAGE_A_KET_LAYOUT,
};
pub use stage_b::{
    case_branches, stage_b_coefficients, stage_b_initial_state, stage_b_kets, PairBranch,
    StageBSolution, STAGE_B_KET_LAYOUT, STAGE_B_LABELS,
};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, StateVector, C64};
use crate::linalg::expm;

const MINUS_I: C64 = C64::new(0.0, -1.0);

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

fn check_hermitian_matrix(h: &Array2<C64>) -> Result<()> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.ncols(),
        });
    }
    let mut deviation = 0.0f64;
    for i in 0..n {
        for j in i..n {
            deviation = deviation.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    if deviation < crate::hilbert::HERMITIAN_TOLERANCE {
        Ok(())
    } else {
        Err(Error::NotHermitian { deviation })
    }
}

/// e^{−iHt} for a hermitian matrix.
pub fn unitary(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    check_time(t)?;
    check_hermitian_matrix(h)?;
    Ok(expm(&h.mapv(|z| z * MINUS_I * t)))
}

/// e^{−iHt}ψ on raw coordinates (used for subspace-restricted generators).
pub fn propagate_coordinates(h: &Array2<C64>, psi0: &Array1<C64>, t: f64) -> Result<Array1<C64>> {
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: psi0.len(),
        });
    }
    Ok(unitary(h, t)?.dot(psi0))
}

/// e^{−iĤt}ψ₀ via the dense matrix exponential.
pub fn propagate(h: &OperatorMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h, t)?.apply(psi0)
}

/// A precomputed e^{−iĤΔt}; repeated application samples a trajectory on a uniform grid.
#[derive(Clone, Debug)]
pub struct Propagator {
    unitary: Array2<C64>,
    space: crate::hilbert::SpaceDescriptor,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix, dt: f64) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: h.hermitian_deviation(),
            });
        }
        Ok(Self {
            unitary: unitary(h.entries(), dt)?,
            space: h.space().clone(),
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.space() != &self.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dimension(),
                found: psi.space().dimension(),
            });
        }
        Ok(StateVector::from_parts(
            self.space.clone(),
            self.unitary.dot(psi.amplitudes()),
        ))
    }
}

/// Source of Ĥ(t)ψ for the integrator.
pub trait HamiltonianSource {
    fn dimension(&self) -> usize;
    fn apply_at(&self, t: f64, psi: &Array1<C64>) -> Result<Array1<C64>>;
}

impl HamiltonianSource for OperatorMatrix {
    fn dimension(&self) -> usize {
        self.space().dimension()
    }

    fn apply_at(&self, _t: f64, psi: &Array1<C64>) -> Result<Array1<C64>> {
        Ok(self.entries().dot(psi))
    }
}

impl HamiltonianSource for Array2<C64> {
    fn dimension(&self) -> usize {
        self.nrows()
    }

    fn apply_at(&self, _t: f64, psi: &Array1<C64>) -> Result<Array1<C64>> {
        Ok(self.dot(psi))
    }
}

/// Row-compressed copy of a constant Hamiltonian, for integrating on large spaces
/// where most entries vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHamiltonian {
    dimension: usize,
    row_start: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<C64>,
}

impl SparseHamiltonian {
    pub fn from_dense(h: &Array2<C64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                found: h.ncols(),
            });
        }
        let mut row_start = Vec::with_capacity(h.nrows() + 1);
        let (mut columns, mut values) = (Vec::new(), Vec::new());
        row_start.push(0);
        for row in h.rows() {
            for (j, &z) in row.iter().enumerate() {
                if z != C64::new(0.0, 0.0) {
                    columns.push(j);
                    values.push(z);
                }
            }
            row_start.push(columns.len());
        }
        Ok(Self {
            dimension: h.nrows(),
            row_start,
            columns,
            values,
        })
    }

    pub fn from_operator(h: &OperatorMatrix) -> Result<Self> {
        Self::from_dense(h.entries())
    }

    pub fn nonzeros(&self) -> usize {
        self.values.len()
    }
}

impl HamiltonianSource for SparseHamiltonian {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn apply_at(&self, _t: f64, psi: &Array1<C64>) -> Result<Array1<C64>> {
        if psi.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: psi.len(),
            });
        }
        Ok(Array1::from_shape_fn(self.dimension, |i| {
            let span = self.row_start[i]..self.row_start[i + 1];
            self.columns[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&j, &v)| v * psi[j])
                .sum()
        }))
    }
}

/// A Hamiltonian rebuilt at every evaluation time.
pub struct TimeDependent<F> {
    dimension: usize,
    build: F,
}

impl<F> TimeDependent<F>
where
    F: Fn(f64) -> Result<OperatorMatrix>,
{
    pub fn new(dimension: usize, build: F) -> Self {
        Self { dimension, build }
    }
}

impl<F> HamiltonianSource for TimeDependent<F>
where
    F: Fn(f64) -> Result<OperatorMatrix>,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn apply_at(&self, t: f64, psi: &Array1<C64>) -> Result<Array1<C64>> {
        let h = (self.build)(t)?;
        if h.space().dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: h.space().dimension(),
            });
        }
        Ok(h.entries().dot(psi))
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub state: StateVector,
    /// Final squared norm minus initial squared norm.
    pub norm_drift: f64,
}

/// Classical fourth-order Runge–Kutta for iψ̇ = Ĥ(t)ψ on raw coordinates.
/// Global error scales as O(Δt⁴).
pub fn rk4_coordinates<H: HamiltonianSource + ?Sized>(
    h: &H,
    psi0: &Array1<C64>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Array1<C64>> {
    check_time(t0)?;
    check_time(t1)?;
    if steps == 0 {
        return Err(Error::NoSteps);
    }
    if psi0.len() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            found: psi0.len(),
        });
    }
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, y: &Array1<C64>| -> Result<Array1<C64>> {
        Ok(h.apply_at(t, y)?.mapv(|z| z * MINUS_I))
    };
    let mut y = psi0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + 0.5 * dt, &(&y + &k1.mapv(|z| z * (0.5 * dt))))?;
        let k3 = rhs(t + 0.5 * dt, &(&y + &k2.mapv(|z| z * (0.5 * dt))))?;
        let k4 = rhs(t + dt, &(&y + &k3.mapv(|z| z * dt)))?;
        y = y + (k1 + (k2 + k3).mapv(|z| z * 2.0) + k4).mapv(|z| z * (dt / 6.0));
    }
    Ok(y)
}

/// Integrates from 0 to `t` in `steps` equal steps.
pub fn integrate_ode<H: HamiltonianSource + ?Sized>(
    h: &H,
    psi0: &StateVector,
    t: f64,
    steps: usize,
) -> Result<OdeSolution> {
    integrate_ode_between(h, psi0, 0.0, t, steps)
}

pub fn integrate_ode_between<H: HamiltonianSource + ?Sized>(
    h: &H,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<OdeSolution> {
    let y = rk4_coordinates(h, psi0.amplitudes(), t0, t1, steps)?;
    let state = StateVector::from_parts(psi0.space().clone(), y);
    let norm_drift = state.norm_sqr() - psi0.norm_sqr();
    Ok(OdeSolution { state, norm_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_space, AtomLevel, BasisState, SpaceDescriptor};
    use crate::models::{h_eff_stage_a, AtomMap, ModelParams};
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_state(space: &SpaceDescriptor, seed: u64) -> StateVector {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let v: Array1<C64> = (0..space.dimension()).map(|_| c(next(), next())).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        StateVector::new(space.clone(), v.mapv(|z| z / n)).unwrap()
    }

    fn stage_a_setup() -> (OperatorMatrix, StateVector) {
        let space = build_space(&[2, 0], &[2, 0], 2).unwrap();
        let map = AtomMap::new(vec![2, 3]).unwrap();
        let p = ModelParams::dimensionless(0.5, 2.0).unwrap();
        let h = h_eff_stage_a(&p, &space, &map).unwrap();
        let psi = random_state(&space, 9);
        (h, psi)
    }

    #[test]
    fn zero_time_is_identity() {
        let (h, psi) = stage_a_setup();
        let out = propagate(&h, &psi, 0.0).unwrap();
        assert!((&out.amplitudes().clone() - psi.amplitudes())
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn diagonal_hamiltonian_gives_pure_phases() {
        let space = build_space(&[], &[], 1).unwrap();
        let energies = [0.3, -1.7, 4.0];
        let h = OperatorMatrix::new(
            space.clone(),
            Array2::from_diag(&Array1::from_iter(energies.iter().map(|&e| c(e, 0.0)))),
            true,
        )
        .unwrap();
        let psi = random_state(&space, 1);
        let t = 2.3;
        let out = propagate(&h, &psi, t).unwrap();
        for k in 0..3 {
            let want = psi.amplitudes()[k] * C64::from_polar(1.0, -energies[k] * t);
            assert!((out.amplitudes()[k] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn exchange_block_matches_closed_form() {
        let k = 1.0 / 0.5;
        let h = array![[c(k, 0.0), c(k, 0.0)], [c(k, 0.0), c(k, 0.0)]];
        let psi = array![c(1.0, 0.0), c(0.0, 0.0)];
        for t in [0.0, 0.1, 0.77, 3.0] {
            let out = propagate_coordinates(&h, &psi, t).unwrap();
            let e = C64::from_polar(1.0, -2.0 * k * t);
            assert!((out[0] - (e + 1.0) / 2.0).norm() < 1e-14);
            assert!((out[1] - (e - 1.0) / 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn propagation_preserves_norm() {
        let (h, psi) = stage_a_setup();
        for t in [0.5, 3.0, 10.0] {
            let out = propagate(&h, &psi, t).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn input_validation() {
        let (h, psi) = stage_a_setup();
        let a =
            crate::hilbert::mode_annihilator(h.space(), crate::hilbert::Mode::Photon(0)).unwrap();
        assert!(matches!(
            propagate(&a, &psi, 1.0),
            Err(Error::NotHermitian { .. })
        ));
        let other = build_space(&[], &[], 2).unwrap();
        let wrong = StateVector::basis(
            other.clone(),
            &other.vacuum_state(&[AtomLevel::L1, AtomLevel::L1]).unwrap(),
        )
        .unwrap();
        assert!(propagate(&h, &wrong, 1.0).is_err());
        assert!(propagate(&h, &psi, f64::NAN).is_err());
        assert!(matches!(
            integrate_ode(&h, &psi, 1.0, 0),
            Err(Error::NoSteps)
        ));
    }

    #[test]
    fn zero_hamiltonian_integrates_to_identity() {
        let space = build_space(&[1], &[], 1).unwrap();
        let h = OperatorMatrix::zeros(space.clone());
        let psi = random_state(&space, 4);
        let sol = integrate_ode(&h, &psi, 5.0, 7).unwrap();
        assert_eq!(sol.state.amplitudes(), psi.amplitudes());
        assert_eq!(sol.norm_drift, 0.0);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let (h, psi) = stage_a_setup();
        let t = 0.5;
        let exact = propagate(&h, &psi, t).unwrap();
        let err = |steps| {
            let sol = integrate_ode(&h, &psi, t, steps).unwrap();
            (sol.state.amplitudes() - exact.amplitudes())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(200), err(400));
        let ratio = coarse / fine;
        assert!(
            (13.0..19.0).contains(&ratio),
            "ratio {ratio} coarse {coarse} fine {fine}"
        );
    }

    #[test]
    fn rk4_matches_propagation_on_effective_stage_a() {
        let (h, _) = stage_a_setup();
        let space = h.space().clone();
        let start = BasisState::new(vec![0, 0], vec![0, 0], vec![AtomLevel::L3, AtomLevel::L1]);
        let psi = StateVector::basis(space, &start).unwrap();
        let exact = propagate(&h, &psi, 1.0).unwrap();
        let sol = integrate_ode(&h, &psi, 1.0, 10_000).unwrap();
        let err = (sol.state.amplitudes() - exact.amplitudes())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "err {err}");
        assert!(sol.norm_drift.abs() < 1e-10);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let (h, psi) = stage_a_setup();
        let sparse = SparseHamiltonian::from_operator(&h).unwrap();
        assert!(sparse.nonzeros() < h.space().dimension() * 20);
        let a = sparse.apply_at(0.0, psi.amplitudes()).unwrap();
        let b = h.apply_at(0.0, psi.amplitudes()).unwrap();
        assert!((&a - &b).iter().all(|z| z.norm() < 1e-14));
        let x = integrate_ode(&sparse, &psi, 0.3, 300).unwrap();
        let y = integrate_ode(&h, &psi, 0.3, 300).unwrap();
        assert!((x.state.amplitudes() - y.state.amplitudes())
            .iter()
            .all(|z| z.norm() < 1e-13));
        assert!(SparseHamiltonian::from_dense(&Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn propagator_steps_compose() {
        let (h, psi) = stage_a_setup();
        let step = Propagator::new(&h, 0.25).unwrap();
        let mut x = psi.clone();
        for _ in 0..4 {
            x = step.apply(&x).unwrap();
        }
        let direct = propagate(&h, &psi, 1.0).unwrap();
        let err = (x.amplitudes() - direct.amplitudes())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
