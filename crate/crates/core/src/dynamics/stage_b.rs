//! Optical-cavity stage: atoms 4 and 5 exchange excitation while the pairs (1,4) and
//! (5,8) carry the states heralded by the two optomechanical stages.

use crate::error::{Error, Result};
use crate::hilbert::{AtomLevel, BasisState, SpaceDescriptor, StateVector, C64};
use crate::models::{AtomMap, ModelParams};

use super::stage_a::StageASolution;

use AtomLevel::{L1, L3};

/// Atom labels in ket order for the stage-B coefficients.
pub const STAGE_B_LABELS: [u8; 4] = [1, 4, 5, 8];

/// Levels of atoms (1, 4, 5, 8) for B₁..B₆.
pub const STAGE_B_KET_LAYOUT: [[AtomLevel; 4]; 6] = [
    [L1, L3, L1, L3],
    [L1, L1, L3, L3],
    [L1, L3, L3, L1],
    [L3, L1, L1, L3],
    [L3, L1, L3, L1],
    [L3, L3, L1, L1],
];

/// Which successful stage-A outcome a pair carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairBranch {
    /// A₂|L1,L3⟩ + A₁₀|L3,L1⟩.
    Psi1,
    /// A₃|L1,L3⟩ + A₉|L3,L1⟩.
    Psi2,
}

impl PairBranch {
    /// Unnormalized amplitudes on (|L1,L3⟩, |L3,L1⟩) of the first and last atoms of a side.
    pub fn amplitudes(self, sa: &StageASolution) -> [C64; 2] {
        match self {
            PairBranch::Psi1 => [sa.coefficient(2), sa.coefficient(10)],
            PairBranch::Psi2 => [sa.coefficient(3), sa.coefficient(9)],
        }
    }
}

/// Branches carried by pairs (1,4) and (5,8) for cases 1–4.
pub fn case_branches(case_id: u8) -> Result<(PairBranch, PairBranch)> {
    use PairBranch::{Psi1, Psi2};
    match case_id {
        1 => Ok((Psi1, Psi2)),
        2 => Ok((Psi2, Psi1)),
        3 => Ok((Psi1, Psi1)),
        4 => Ok((Psi2, Psi2)),
        other => Err(Error::InvalidCase(other)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageBSolution {
    pub case_id: u8,
    pub tau: f64,
    /// B₁..B₆, stored zero-based.
    pub b: [C64; 6],
}

impl StageBSolution {
    pub fn coefficient(&self, k: usize) -> C64 {
        assert!((1..=6).contains(&k), "coefficient index {k} outside 1..=6");
        self.b[k - 1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.b.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn embed(&self, space: &SpaceDescriptor, map: &AtomMap) -> Result<StateVector> {
        let kets = stage_b_kets(space, map)?;
        let terms: Vec<(C64, BasisState)> = self.b.iter().copied().zip(kets).collect();
        StateVector::superposition(space.clone(), &terms)
    }
}

/// The six kets of atoms (1,4,5,8) on `space`, all modes in vacuum.
pub fn stage_b_kets(space: &SpaceDescriptor, map: &AtomMap) -> Result<[BasisState; 6]> {
    if map.labels().len() != space.atom_count() {
        return Err(Error::AtomMap(format!(
            "{} labels for a space with {} atoms",
            map.labels().len(),
            space.atom_count()
        )));
    }
    let positions = map.positions(&STAGE_B_LABELS)?;
    let mut out = Vec::with_capacity(6);
    for levels in STAGE_B_KET_LAYOUT {
        let mut atoms = vec![L3; space.atom_count()];
        for (&pos, &level) in positions.iter().zip(&levels) {
            atoms[pos] = level;
        }
        let ket = BasisState::new(
            vec![0; space.photon_caps().len()],
            vec![0; space.phonon_caps().len()],
            atoms,
        );
        space.basis_index(&ket)?;
        out.push(ket);
    }
    Ok(out.try_into().expect("six kets"))
}

/// Normalized product of the two heralded pair states for `case_id`, at the start of stage B.
pub fn stage_b_initial_state(
    sa: &StageASolution,
    case_id: u8,
    space: &SpaceDescriptor,
    map: &AtomMap,
) -> Result<StateVector> {
    let (left, right) = case_branches(case_id)?;
    let x = left.amplitudes(sa);
    let y = right.amplitudes(sa);
    let positions = map.positions(&STAGE_B_LABELS)?;
    if map.labels().len() != space.atom_count() {
        return Err(Error::AtomMap("atom map does not match the space".into()));
    }
    let mut terms = Vec::with_capacity(4);
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            let pair = |first: bool| if first { [L1, L3] } else { [L3, L1] };
            let levels = [pair(i == 0), pair(j == 0)].concat();
            let mut atoms = vec![L3; space.atom_count()];
            for (&pos, &level) in positions.iter().zip(&levels) {
                atoms[pos] = level;
            }
            let ket = BasisState::new(
                vec![0; space.photon_caps().len()],
                vec![0; space.phonon_caps().len()],
                atoms,
            );
            terms.push((xi * yj, ket));
        }
    }
    StateVector::superposition(space.clone(), &terms)?
        .normalized()
        .ok_or(Error::ZeroAmplitudes)
}

/// B₁..B₆ at time `tau` (stage B runs from `sa.t` to `tau`).
pub fn stage_b_coefficients(
    sa: &StageASolution,
    params: &ModelParams,
    case_id: u8,
    tau: f64,
) -> Result<StageBSolution> {
    let (left, right) = case_branches(case_id)?;
    if !tau.is_finite() {
        return Err(Error::InvalidTime(tau));
    }
    if tau < sa.t {
        return Err(Error::TauBeforeT { t: sa.t, tau });
    }
    params.validate()?;
    let [x1, x2] = left.amplitudes(sa);
    let [y1, y2] = right.amplitudes(sa);
    let norm = (x1.norm_sqr() + x2.norm_sqr()).sqrt() * (y1.norm_sqr() + y2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroAmplitudes);
    }
    let theta = 2.0 * params.lambda1 * params.lambda1 * (tau - sa.t) / params.omega_m;
    let e = C64::from_polar(1.0, -theta);
    let plus = (1.0 + e) / 2.0;
    let minus = -(1.0 - e) / 2.0;
    let b = [
        x1 * y1 * plus / norm,
        x1 * y1 * minus / norm,
        x1 * y2 / norm,
        x2 * y1 * e / norm,
        x2 * y2 * plus / norm,
        x2 * y2 * minus / norm,
    ];
    Ok(StageBSolution { case_id, tau, b })
}
