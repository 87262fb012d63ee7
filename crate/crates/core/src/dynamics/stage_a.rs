//! Optomechanical stage: closed solution for the eleven ansatz coefficients.
//!
//! The Schrödinger equation restricted to the ansatz splits into A₁ (frozen), two
//! copies of a 3×3 system (A₂, A₃, A₄) and (A₉, A₁₀, A₁₁), and a 4×4 system
//! (A₅..A₈). Each is solved as e^{−iMt} applied to its initial vector.

use ndarray::{array, Array1, Array2};

use crate::error::{Error, Result};
use crate::hilbert::{AtomLevel, BasisState, SpaceDescriptor, StateVector, C64};
use crate::linalg::expm;
use crate::models::{AtomMap, ModelParams};

use AtomLevel::{L1, L3};

/// Which half of the chain a stage-A run acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Atoms 1–4, interaction on (2,3).
    Left,
    /// Atoms 5–8, interaction on (6,7).
    Right,
}

impl Side {
    pub fn labels(self) -> [u8; 4] {
        match self {
            Side::Left => [1, 2, 3, 4],
            Side::Right => [5, 6, 7, 8],
        }
    }
}

/// Ansatz kets: (n_a1 = n_b1, levels of the four atoms of a side in chain order).
/// Modes a2, b2 are vacuum in every ket.
pub const STAGE_A_KET_LAYOUT: [(usize, [AtomLevel; 4]); 11] = [
    (0, [L1, L3, L3, L1]),
    (0, [L1, L3, L1, L3]),
    (0, [L1, L1, L3, L3]),
    (1, [L1, L3, L3, L3]),
    (0, [L3, L1, L1, L3]),
    (1, [L3, L3, L1, L3]),
    (1, [L3, L1, L3, L3]),
    (2, [L3, L3, L3, L3]),
    (0, [L3, L1, L3, L1]),
    (0, [L3, L3, L1, L1]),
    (1, [L3, L3, L3, L1]),
];

#[derive(Clone, Debug, PartialEq)]
pub struct StageASolution {
    /// Interaction time (in units of 1/λ₁ for dimensionless parameters).
    pub t: f64,
    /// A₁..A₁₁, stored zero-based.
    pub a: [C64; 11],
}

impl StageASolution {
    /// Aₖ with the one-based index used for the ansatz.
    pub fn coefficient(&self, k: usize) -> C64 {
        assert!(
            (1..=11).contains(&k),
            "coefficient index {k} outside 1..=11"
        );
        self.a[k - 1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The ansatz state on a space holding the four atoms of `side`.
    pub fn embed(&self, space: &SpaceDescriptor, map: &AtomMap, side: Side) -> Result<StateVector> {
        let kets = stage_a_kets(space, map, side)?;
        let terms: Vec<(C64, BasisState)> = self.a.iter().copied().zip(kets).collect();
        StateVector::superposition(space.clone(), &terms)
    }
}

/// The eleven ansatz kets on `space`, ordered A₁..A₁₁.
pub fn stage_a_kets(
    space: &SpaceDescriptor,
    map: &AtomMap,
    side: Side,
) -> Result<[BasisState; 11]> {
    if map.labels().len() != space.atom_count() {
        return Err(Error::AtomMap(format!(
            "{} labels for a space with {} atoms",
            map.labels().len(),
            space.atom_count()
        )));
    }
    if space.photon_caps().len() != 2 || space.phonon_caps().len() != 2 {
        return Err(Error::InvalidSubsystem(
            "the ansatz needs modes a1, a2, b1, b2".into(),
        ));
    }
    let positions = map.positions(&side.labels())?;
    let mut out = Vec::with_capacity(11);
    for (n, levels) in STAGE_A_KET_LAYOUT {
        // spectators not in the ansatz sit in L3
        let mut atoms = vec![L3; space.atom_count()];
        for (&pos, &level) in positions.iter().zip(&levels) {
            atoms[pos] = level;
        }
        let ket = BasisState::new(vec![n, 0], vec![n, 0], atoms);
        space.basis_index(&ket)?;
        out.push(ket);
    }
    Ok(out.try_into().expect("eleven kets"))
}

/// Generators M of iȦ = MA for (A₂, A₃, A₄) and (A₅, A₆, A₇, A₈), entry by entry
/// from the coupled equations of motion.
pub fn stage_a_generators(params: &ModelParams) -> (Array2<C64>, Array2<C64>) {
    let l = params.lambda1;
    let w = params.omega_m;
    let g = params.g;
    let k = l * l / w;
    let c = g * l / w;
    let r = |x: f64| C64::new(x, 0.0);
    let three = array![
        [r(k), r(k), r(-c)],
        [r(k), r(k), r(-c)],
        [r(-c), r(-c), r(-(2.0 * l * l + g * g) / w)],
    ];
    let four = array![
        [r(2.0 * k), r(-c), r(-c), r(0.0)],
        [r(-c), r((l * l - g * g) / w), r(k), r(-2.0 * c)],
        [r(-c), r(k), r((l * l - g * g) / w), r(-2.0 * c)],
        [
            r(0.0),
            r(-2.0 * c),
            r(-2.0 * c),
            r(-4.0 * (l * l + g * g) / w)
        ],
    ];
    (three, four)
}

fn evolve(m: &Array2<C64>, x0: Array1<C64>, t: f64) -> Array1<C64> {
    expm(&m.mapv(|z| z * C64::new(0.0, -t))).dot(&x0)
}

/// A₁..A₁₁ at time `t` starting from the product of two Bell pairs with all modes in vacuum.
pub fn stage_a_coefficients(params: &ModelParams, t: f64) -> Result<StageASolution> {
    params.check_simplification()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let (three, four) = stage_a_generators(params);
    let half = C64::new(0.5, 0.0);
    let zero = C64::new(0.0, 0.0);
    let first = evolve(&three, array![half, zero, zero], t);
    let second = evolve(&four, array![half, zero, zero, zero], t);
    let a = [
        half, first[0], first[1], first[2], second[0], second[1], second[2], second[3], first[0],
        first[1], first[2],
    ];
    Ok(StageASolution { t, a })
}
