//! Projective measurements in the occupation/level basis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::hilbert::{
    AtomLevel, BasisState, Mode, SpaceDescriptor, StateVector, Subsystem, SubsystemValue,
};

/// Outcomes at or below this probability carry no post-measurement state.
pub const DEFAULT_PROBABILITY_THRESHOLD: f64 = 1e-14;

/// A product projector: fixed occupancies on some modes and fixed levels on some atoms.
/// The derived ordering is the canonical outcome order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectorSpec {
    pub modes: BTreeMap<Mode, usize>,
    pub atoms: BTreeMap<usize, AtomLevel>,
}

impl ProjectorSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mode(mut self, mode: Mode, occupancy: usize) -> Self {
        self.modes.insert(mode, occupancy);
        self
    }

    pub fn with_atom(mut self, atom: usize, level: AtomLevel) -> Self {
        self.atoms.insert(atom, level);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty() && self.atoms.is_empty()
    }

    pub fn subsystems(&self) -> BTreeSet<Subsystem> {
        self.modes
            .keys()
            .map(|&m| Subsystem::Mode(m))
            .chain(self.atoms.keys().map(|&a| Subsystem::Atom(a)))
            .collect()
    }

    pub fn validate(&self, space: &SpaceDescriptor) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyProjector);
        }
        for (&mode, &n) in &self.modes {
            let cap = space.cap(mode)?;
            if n > cap {
                return Err(Error::OccupancyOverCap {
                    mode,
                    occupancy: n,
                    cap,
                });
            }
        }
        for &atom in self.atoms.keys() {
            space.check_atom(atom)?;
        }
        Ok(())
    }

    pub fn matches(&self, state: &BasisState) -> bool {
        self.modes
            .iter()
            .all(|(&m, &n)| state.occupancy(m) == Some(n))
            && self
                .atoms
                .iter()
                .all(|(&a, &l)| state.atoms.get(a) == Some(&l))
    }

    /// The label a basis state produces when `measured` is read out.
    fn label_of(state: &BasisState, measured: &BTreeSet<Subsystem>) -> Self {
        let mut spec = Self::new();
        for &s in measured {
            match state.value(s) {
                Some(SubsystemValue::Occupancy(n)) => {
                    if let Subsystem::Mode(m) = s {
                        spec.modes.insert(m, n);
                    }
                }
                Some(SubsystemValue::Level(l)) => {
                    if let Subsystem::Atom(a) = s {
                        spec.atoms.insert(a, l);
                    }
                }
                None => {}
            }
        }
        spec
    }
}

impl fmt::Display for ProjectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .modes
            .iter()
            .map(|(m, n)| format!("{m}={n}"))
            .chain(self.atoms.iter().map(|(a, l)| format!("atom[{a}]=L{l}")))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub spec: ProjectorSpec,
    pub probability: f64,
    /// Normalized post-measurement state over the unmeasured subsystems (measured modes
    /// and atoms removed, the rest kept in canonical order); `None` below threshold.
    pub post_state: Option<StateVector>,
}

pub fn project(state: &StateVector, spec: &ProjectorSpec) -> Result<MeasurementOutcome> {
    project_with_threshold(state, spec, DEFAULT_PROBABILITY_THRESHOLD)
}

pub fn project_with_threshold(
    state: &StateVector,
    spec: &ProjectorSpec,
    threshold: f64,
) -> Result<MeasurementOutcome> {
    let space = state.space();
    spec.validate(space)?;
    let removed = spec.subsystems();
    let reduced = space.without(&removed)?;
    let mut amplitudes = Array1::zeros(reduced.dimension());
    let mut probability = 0.0;
    for (i, basis) in space.basis().enumerate() {
        if spec.matches(&basis) {
            let z = state.amplitudes()[i];
            probability += z.norm_sqr();
            amplitudes[reduced.basis_index(&basis.without(&removed))?] = z;
        }
    }
    let post_state = (probability > threshold).then(|| {
        let scale = probability.sqrt().recip();
        StateVector::from_parts(reduced, amplitudes.mapv(|z| z * scale))
    });
    Ok(MeasurementOutcome {
        spec: spec.clone(),
        probability,
        post_state,
    })
}

/// Every outcome of reading out `measured` whose probability exceeds the threshold,
/// in canonical label order.
pub fn enumerate_outcomes(
    state: &StateVector,
    measured: &BTreeSet<Subsystem>,
) -> Result<Vec<MeasurementOutcome>> {
    enumerate_outcomes_with_threshold(state, measured, DEFAULT_PROBABILITY_THRESHOLD)
}

pub fn enumerate_outcomes_with_threshold(
    state: &StateVector,
    measured: &BTreeSet<Subsystem>,
    threshold: f64,
) -> Result<Vec<MeasurementOutcome>> {
    if measured.is_empty() {
        return Err(Error::EmptyProjector);
    }
    let space = state.space();
    for &s in measured {
        space.check_subsystem(s)?;
    }
    let mut weights: BTreeMap<ProjectorSpec, f64> = BTreeMap::new();
    for (i, basis) in space.basis().enumerate() {
        let p = state.amplitudes()[i].norm_sqr();
        if p > 0.0 {
            *weights
                .entry(ProjectorSpec::label_of(&basis, measured))
                .or_default() += p;
        }
    }
    weights
        .into_iter()
        .filter(|&(_, p)| p > threshold)
        .map(|(spec, _)| project_with_threshold(state, &spec, threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_space, C64};

    use AtomLevel::{L1, L3};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell_with_mode() -> StateVector {
        // (|1;L1,L3⟩ + |0;L3,L1⟩)/√2 on one photon mode and two atoms
        let space = build_space(&[1], &[], 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::superposition(
            space,
            &[
                (c(h), BasisState::new(vec![1], vec![], vec![L1, L3])),
                (c(h), BasisState::new(vec![0], vec![], vec![L3, L1])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn projection_probability_and_state() {
        let psi = bell_with_mode();
        let out = project(&psi, &ProjectorSpec::new().with_mode(Mode::Photon(0), 1)).unwrap();
        assert!((out.probability - 0.5).abs() < 1e-15);
        let post = out.post_state.unwrap();
        assert!((post.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(post.space().dimension(), 9);
        let ket = BasisState::new(vec![], vec![], vec![L1, L3]);
        assert!((post.amplitude(&ket).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn impossible_outcome_has_no_post_state() {
        let psi = bell_with_mode();
        let spec = ProjectorSpec::new()
            .with_mode(Mode::Photon(0), 1)
            .with_atom(0, L3);
        let out = project(&psi, &spec).unwrap();
        assert_eq!(out.probability, 0.0);
        assert!(out.post_state.is_none());
    }

    #[test]
    fn invalid_projectors_are_rejected() {
        let psi = bell_with_mode();
        assert_eq!(
            project(&psi, &ProjectorSpec::new()),
            Err(Error::EmptyProjector)
        );
        assert!(project(&psi, &ProjectorSpec::new().with_mode(Mode::Photon(0), 2)).is_err());
        assert!(project(&psi, &ProjectorSpec::new().with_mode(Mode::Phonon(0), 0)).is_err());
        assert!(project(&psi, &ProjectorSpec::new().with_atom(2, L1)).is_err());
    }

    #[test]
    fn enumeration_is_complete_and_ordered() {
        let psi = bell_with_mode();
        let measured: BTreeSet<_> = [Subsystem::Atom(0)].into();
        let outs = enumerate_outcomes(&psi, &measured).unwrap();
        assert_eq!(outs.len(), 2);
        assert_eq!(outs[0].spec, ProjectorSpec::new().with_atom(0, L1));
        assert_eq!(outs[1].spec, ProjectorSpec::new().with_atom(0, L3));
        let total: f64 = outs.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent() {
        let psi = bell_with_mode();
        let post = project(&psi, &ProjectorSpec::new().with_atom(0, L3))
            .unwrap()
            .post_state
            .unwrap();
        // remaining subsystems: photon a1 and the second atom
        let again = project(&post, &ProjectorSpec::new().with_mode(Mode::Photon(0), 0)).unwrap();
        assert!((again.probability - 1.0).abs() < 1e-15);
        let again = project(&post, &ProjectorSpec::new().with_atom(0, L1)).unwrap();
        assert!((again.probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measuring_everything_leaves_a_scalar() {
        let psi = bell_with_mode();
        let spec = ProjectorSpec::new()
            .with_mode(Mode::Photon(0), 0)
            .with_atom(0, L3)
            .with_atom(1, L1);
        let post = project(&psi, &spec).unwrap().post_state.unwrap();
        assert_eq!(post.space().dimension(), 1);
        assert!((post.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn labels_display_compactly() {
        let spec = ProjectorSpec::new()
            .with_mode(Mode::Phonon(0), 2)
            .with_atom(1, L3)
            .with_mode(Mode::Photon(0), 0);
        assert_eq!(spec.to_string(), "a1=0,b1=2,atom[1]=L3");
    }
}
