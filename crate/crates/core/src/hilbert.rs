//! Composite Hilbert spaces: truncated bosonic modes tensored with three-level atoms.
//!
//! Basis ordering is fixed: the flat index is a mixed-radix number whose digits are,
//! from most to least significant, the photon occupancies (mode order), the phonon
//! occupancies (mode order), then the atomic levels (atom order, `L1 = 0`). The last
//! atom therefore varies fastest, and the all-vacuum, all-`L1` state has index 0.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension `build_space` accepts unless a different guard is supplied.
pub const DEFAULT_DIMENSION_GUARD: usize = 100_000;

/// Tolerance for the hermiticity flag and for state norms.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Levels of a V-type atom; `L3` is the common lower level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomLevel {
    L1,
    L2,
    L3,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::L1, AtomLevel::L2, AtomLevel::L3];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::L1 => 0,
            AtomLevel::L2 => 1,
            AtomLevel::L3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// A bosonic mode, zero-based within its family. `Photon(0)` displays as `a1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Photon(usize),
    Phonon(usize),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Photon(j) => write!(f, "a{}", j + 1),
            Mode::Phonon(j) => write!(f, "b{}", j + 1),
        }
    }
}

/// Anything that can be measured or traced out. Derived ordering is the canonical one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subsystem {
    Mode(Mode),
    Atom(usize),
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::Mode(m) => write!(f, "{m}"),
            Subsystem::Atom(k) => write!(f, "atom[{k}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    photon_caps: Vec<usize>,
    phonon_caps: Vec<usize>,
    atom_count: usize,
    dimension: usize,
}

pub fn build_space(
    photon_caps: &[usize],
    phonon_caps: &[usize],
    atom_count: usize,
) -> Result<SpaceDescriptor> {
    SpaceDescriptor::with_guard(
        photon_caps,
        phonon_caps,
        atom_count,
        DEFAULT_DIMENSION_GUARD,
    )
}

impl SpaceDescriptor {
    pub fn new(photon_caps: &[usize], phonon_caps: &[usize], atom_count: usize) -> Result<Self> {
        build_space(photon_caps, phonon_caps, atom_count)
    }

    pub fn with_guard(
        photon_caps: &[usize],
        phonon_caps: &[usize],
        atom_count: usize,
        guard: usize,
    ) -> Result<Self> {
        let mut dimension: usize = 1;
        let radices = photon_caps
            .iter()
            .chain(phonon_caps)
            .map(|&c| c.checked_add(1))
            .chain(std::iter::repeat(Some(3)).take(atom_count));
        // radices are >= 1, so the running product is monotone
        for r in radices {
            match r.and_then(|r| dimension.checked_mul(r)) {
                Some(d) if d <= guard => dimension = d,
                Some(d) => {
                    return Err(Error::Capacity {
                        dimension: d,
                        guard,
                    })
                }
                None => {
                    return Err(Error::Capacity {
                        dimension: usize::MAX,
                        guard,
                    })
                }
            }
        }
        Ok(Self {
            photon_caps: photon_caps.to_vec(),
            phonon_caps: phonon_caps.to_vec(),
            atom_count,
            dimension,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn photon_caps(&self) -> &[usize] {
        &self.photon_caps
    }

    pub fn phonon_caps(&self) -> &[usize] {
        &self.phonon_caps
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn cap(&self, mode: Mode) -> Result<usize> {
        let cap = match mode {
            Mode::Photon(j) => self.photon_caps.get(j),
            Mode::Phonon(j) => self.phonon_caps.get(j),
        };
        cap.copied().ok_or(Error::UnknownMode(mode))
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.photon_caps.len())
            .map(Mode::Photon)
            .chain((0..self.phonon_caps.len()).map(Mode::Phonon))
    }

    pub fn subsystems(&self) -> impl Iterator<Item = Subsystem> + '_ {
        self.modes()
            .map(Subsystem::Mode)
            .chain((0..self.atom_count).map(Subsystem::Atom))
    }

    pub fn check_subsystem(&self, s: Subsystem) -> Result<()> {
        match s {
            Subsystem::Mode(m) => self.cap(m).map(|_| ()),
            Subsystem::Atom(k) => self.check_atom(k),
        }
    }

    pub fn check_atom(&self, index: usize) -> Result<()> {
        if index < self.atom_count {
            Ok(())
        } else {
            Err(Error::AtomOutOfRange {
                index,
                count: self.atom_count,
            })
        }
    }

    /// The space left after removing `removed` subsystems (surviving modes are renumbered).
    pub fn without(&self, removed: &BTreeSet<Subsystem>) -> Result<SpaceDescriptor> {
        for &s in removed {
            self.check_subsystem(s)?;
        }
        let photons: Vec<usize> = self
            .photon_caps
            .iter()
            .enumerate()
            .filter(|(j, _)| !removed.contains(&Subsystem::Mode(Mode::Photon(*j))))
            .map(|(_, &c)| c)
            .collect();
        let phonons: Vec<usize> = self
            .phonon_caps
            .iter()
            .enumerate()
            .filter(|(j, _)| !removed.contains(&Subsystem::Mode(Mode::Phonon(*j))))
            .map(|(_, &c)| c)
            .collect();
        let atoms = (0..self.atom_count)
            .filter(|k| !removed.contains(&Subsystem::Atom(*k)))
            .count();
        SpaceDescriptor::with_guard(&photons, &phonons, atoms, usize::MAX)
    }

    pub fn basis_index(&self, state: &BasisState) -> Result<usize> {
        if state.photons.len() != self.photon_caps.len()
            || state.phonons.len() != self.phonon_caps.len()
            || state.atoms.len() != self.atom_count
        {
            return Err(Error::StateShape(format!(
                "expected {} photon, {} phonon and {} atom entries, got {}, {}, {}",
                self.photon_caps.len(),
                self.phonon_caps.len(),
                self.atom_count,
                state.photons.len(),
                state.phonons.len(),
                state.atoms.len()
            )));
        }
        let mut index = 0usize;
        for (j, (&n, &cap)) in state.photons.iter().zip(&self.photon_caps).enumerate() {
            if n > cap {
                return Err(Error::OccupancyOverCap {
                    mode: Mode::Photon(j),
                    occupancy: n,
                    cap,
                });
            }
            index = index * (cap + 1) + n;
        }
        for (j, (&n, &cap)) in state.phonons.iter().zip(&self.phonon_caps).enumerate() {
            if n > cap {
                return Err(Error::OccupancyOverCap {
                    mode: Mode::Phonon(j),
                    occupancy: n,
                    cap,
                });
            }
            index = index * (cap + 1) + n;
        }
        for level in &state.atoms {
            index = index * 3 + level.index();
        }
        Ok(index)
    }

    pub fn basis_state(&self, index: usize) -> Result<BasisState> {
        if index >= self.dimension {
            return Err(Error::IndexOutOfRange {
                index,
                dimension: self.dimension,
            });
        }
        let mut rest = index;
        let mut atoms = vec![AtomLevel::L1; self.atom_count];
        for slot in atoms.iter_mut().rev() {
            *slot = AtomLevel::ALL[rest % 3];
            rest /= 3;
        }
        let mut phonons = vec![0; self.phonon_caps.len()];
        for (slot, &cap) in phonons.iter_mut().zip(&self.phonon_caps).rev() {
            *slot = rest % (cap + 1);
            rest /= cap + 1;
        }
        let mut photons = vec![0; self.photon_caps.len()];
        for (slot, &cap) in photons.iter_mut().zip(&self.photon_caps).rev() {
            *slot = rest % (cap + 1);
            rest /= cap + 1;
        }
        Ok(BasisState {
            photons,
            phonons,
            atoms,
        })
    }

    /// All basis states in canonical order.
    pub fn basis(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dimension).map(move |i| self.basis_state(i).expect("index in range"))
    }

    pub fn vacuum_state(&self, atoms: &[AtomLevel]) -> Result<BasisState> {
        let state = BasisState {
            photons: vec![0; self.photon_caps.len()],
            phonons: vec![0; self.phonon_caps.len()],
            atoms: atoms.to_vec(),
        };
        self.basis_index(&state)?;
        Ok(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    pub photons: Vec<usize>,
    pub phonons: Vec<usize>,
    pub atoms: Vec<AtomLevel>,
}

/// Value of a single subsystem in a basis state: an occupancy or an atomic level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubsystemValue {
    Occupancy(usize),
    Level(AtomLevel),
}

impl BasisState {
    pub fn new(photons: Vec<usize>, phonons: Vec<usize>, atoms: Vec<AtomLevel>) -> Self {
        Self {
            photons,
            phonons,
            atoms,
        }
    }

    pub fn occupancy(&self, mode: Mode) -> Option<usize> {
        match mode {
            Mode::Photon(j) => self.photons.get(j).copied(),
            Mode::Phonon(j) => self.phonons.get(j).copied(),
        }
    }

    pub fn value(&self, s: Subsystem) -> Option<SubsystemValue> {
        match s {
            Subsystem::Mode(m) => self.occupancy(m).map(SubsystemValue::Occupancy),
            Subsystem::Atom(k) => self.atoms.get(k).copied().map(SubsystemValue::Level),
        }
    }

    /// Drop the listed subsystems, keeping the rest in canonical order.
    pub fn without(&self, removed: &BTreeSet<Subsystem>) -> BasisState {
        let keep = |s: Subsystem| !removed.contains(&s);
        BasisState {
            photons: (0..self.photons.len())
                .filter(|&j| keep(Subsystem::Mode(Mode::Photon(j))))
                .map(|j| self.photons[j])
                .collect(),
            phonons: (0..self.phonons.len())
                .filter(|&j| keep(Subsystem::Mode(Mode::Phonon(j))))
                .map(|j| self.phonons[j])
                .collect(),
            atoms: (0..self.atoms.len())
                .filter(|&k| keep(Subsystem::Atom(k)))
                .map(|k| self.atoms[k])
                .collect(),
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        write!(
            f,
            "|{};{};{}>",
            join(self.photons.iter().map(|n| n.to_string()).collect()),
            join(self.phonons.iter().map(|n| n.to_string()).collect()),
            join(self.atoms.iter().map(|l| l.to_string()).collect())
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    space: SpaceDescriptor,
}

impl StateVector {
    /// Wraps raw amplitudes. Unnormalized vectors are allowed as long as the squared
    /// norm does not exceed one.
    pub fn new(space: SpaceDescriptor, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != space.dimension() {
            return Err(Error::DimensionMismatch {
                expected: space.dimension(),
                found: amplitudes.len(),
            });
        }
        let state = Self { amplitudes, space };
        let norm = state.norm_sqr();
        if !norm.is_finite() || norm > 1.0 + HERMITIAN_TOLERANCE {
            return Err(Error::StateShape(format!("squared norm {norm} exceeds 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_parts(space: SpaceDescriptor, amplitudes: Array1<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), space.dimension());
        Self { amplitudes, space }
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        let n = space.dimension();
        Self {
            amplitudes: Array1::zeros(n),
            space,
        }
    }

    pub fn basis(space: SpaceDescriptor, state: &BasisState) -> Result<Self> {
        let i = space.basis_index(state)?;
        let mut v = Self::zeros(space);
        v.amplitudes[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Σ cᵢ|sᵢ⟩ over the given basis states (repeated states accumulate).
    pub fn superposition(space: SpaceDescriptor, terms: &[(C64, BasisState)]) -> Result<Self> {
        let mut amplitudes = Array1::zeros(space.dimension());
        for (c, s) in terms {
            amplitudes[space.basis_index(s)?] += *c;
        }
        Self::new(space, amplitudes)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, state: &BasisState) -> Result<C64> {
        Ok(self.amplitudes[self.space.basis_index(state)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| Self {
            amplitudes: self.amplitudes.mapv(|c| c / n),
            space: self.space.clone(),
        })
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// One factor of an operator product acting on a single subsystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Annihilate(Mode),
    Create(Mode),
    /// |to⟩⟨from| on one atom.
    Transition {
        atom: usize,
        to: AtomLevel,
        from: AtomLevel,
    },
}

impl Factor {
    pub fn sigma(atom: usize, l: AtomLevel, m: AtomLevel) -> Self {
        Factor::Transition {
            atom,
            to: l,
            from: m,
        }
    }

    fn adjoint(self) -> Self {
        match self {
            Factor::Annihilate(m) => Factor::Create(m),
            Factor::Create(m) => Factor::Annihilate(m),
            Factor::Transition { atom, to, from } => Factor::Transition {
                atom,
                to: from,
                from: to,
            },
        }
    }
}

/// A coefficient times an ordered product of factors; the rightmost factor acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coefficient: C64,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn new(coefficient: impl Into<C64>, factors: Vec<Factor>) -> Self {
        Self {
            coefficient: coefficient.into(),
            factors,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            factors: self.factors.iter().rev().map(|f| f.adjoint()).collect(),
        }
    }

    fn validate(&self, space: &SpaceDescriptor) -> Result<()> {
        for f in &self.factors {
            match *f {
                Factor::Annihilate(m) | Factor::Create(m) => {
                    space.cap(m)?;
                }
                Factor::Transition { atom, .. } => space.check_atom(atom)?,
            }
        }
        Ok(())
    }

    /// Applies the product to a basis state in place; returns the real matrix-element
    /// magnitude, or `None` when the state is annihilated.
    fn act(&self, space: &SpaceDescriptor, state: &mut BasisState) -> Option<f64> {
        let mut amp = 1.0;
        for f in self.factors.iter().rev() {
            match *f {
                Factor::Annihilate(m) => {
                    let n = slot(state, m);
                    if *n == 0 {
                        return None;
                    }
                    amp *= (*n as f64).sqrt();
                    *n -= 1;
                }
                Factor::Create(m) => {
                    let cap = space.cap(m).ok()?;
                    let n = slot(state, m);
                    if *n >= cap {
                        return None;
                    }
                    *n += 1;
                    amp *= (*n as f64).sqrt();
                }
                Factor::Transition { atom, to, from } => {
                    if state.atoms[atom] != from {
                        return None;
                    }
                    state.atoms[atom] = to;
                }
            }
        }
        Some(amp)
    }
}

fn slot(state: &mut BasisState, mode: Mode) -> &mut usize {
    match mode {
        Mode::Photon(j) => &mut state.photons[j],
        Mode::Phonon(j) => &mut state.phonons[j],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    space: SpaceDescriptor,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a dense matrix. A set `hermitian` flag is verified to [`HERMITIAN_TOLERANCE`].
    pub fn new(space: SpaceDescriptor, entries: Array2<C64>, hermitian: bool) -> Result<Self> {
        let n = space.dimension();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if entries.nrows() != n {
                    entries.nrows()
                } else {
                    entries.ncols()
                },
            });
        }
        let op = Self {
            entries,
            space,
            hermitian,
        };
        if hermitian {
            let deviation = op.hermitian_deviation();
            if !(deviation < HERMITIAN_TOLERANCE) {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Ok(op)
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        let n = space.dimension();
        Self {
            entries: Array2::zeros((n, n)),
            space,
            hermitian: true,
        }
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        let n = space.dimension();
        Self {
            entries: Array2::eye(n),
            space,
            hermitian: true,
        }
    }

    /// Sums the terms column by column over the canonical basis.
    pub fn from_terms(space: SpaceDescriptor, terms: &[Term], hermitian: bool) -> Result<Self> {
        for t in terms {
            t.validate(&space)?;
        }
        let n = space.dimension();
        let mut entries = Array2::<C64>::zeros((n, n));
        for col in 0..n {
            let ket = space.basis_state(col)?;
            for term in terms {
                let mut out = ket.clone();
                if let Some(amp) = term.act(&space, &mut out) {
                    let row = space.basis_index(&out)?;
                    entries[[row, col]] += term.coefficient * amp;
                }
            }
        }
        Self::new(space, entries, hermitian)
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// ⟨bra|M|ket⟩
    pub fn element(&self, bra: &BasisState, ket: &BasisState) -> Result<C64> {
        Ok(self.entries[[self.space.basis_index(bra)?, self.space.basis_index(ket)?]])
    }

    fn same_space(&self, other: &OperatorMatrix) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_space(other)?;
        Ok(Self {
            entries: self.entries.dot(&other.entries),
            space: self.space.clone(),
            hermitian: false,
        })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        Self {
            entries: self.entries.t().mapv(|c| c.conj()),
            space: self.space.clone(),
            hermitian: self.hermitian,
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_space(other)?;
        Ok(Self {
            entries: &self.entries + &other.entries,
            space: self.space.clone(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_space(other)?;
        Ok(Self {
            entries: &self.entries - &other.entries,
            space: self.space.clone(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scale(&self, factor: C64) -> OperatorMatrix {
        Self {
            entries: self.entries.mapv(|c| c * factor),
            space: self.space.clone(),
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// [self, other]
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.space != psi.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(StateVector::from_parts(
            self.space.clone(),
            self.entries.dot(&psi.amplitudes),
        ))
    }
}

/// â on `mode`, truncated at the mode's cap.
pub fn mode_annihilator(space: &SpaceDescriptor, mode: Mode) -> Result<OperatorMatrix> {
    OperatorMatrix::from_terms(
        space.clone(),
        &[Term::new(1.0, vec![Factor::Annihilate(mode)])],
        false,
    )
}

/// â†â on `mode`.
pub fn number_operator(space: &SpaceDescriptor, mode: Mode) -> Result<OperatorMatrix> {
    OperatorMatrix::from_terms(
        space.clone(),
        &[Term::new(
            1.0,
            vec![Factor::Create(mode), Factor::Annihilate(mode)],
        )],
        true,
    )
}

/// σ_lm = |l⟩⟨m| on atom `atom_index`, identity elsewhere.
pub fn atomic_transition(
    space: &SpaceDescriptor,
    atom_index: usize,
    l: AtomLevel,
    m: AtomLevel,
) -> Result<OperatorMatrix> {
    space.check_atom(atom_index)?;
    OperatorMatrix::from_terms(
        space.clone(),
        &[Term::new(1.0, vec![Factor::sigma(atom_index, l, m)])],
        l == m,
    )
}

/// A coordinate subspace spanned by selected basis states of a parent space.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    space: SpaceDescriptor,
    indices: Vec<usize>,
}

impl Subspace {
    pub fn new(space: SpaceDescriptor, states: &[BasisState]) -> Result<Self> {
        let indices = states
            .iter()
            .map(|s| space.basis_index(s))
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<_> = indices.iter().collect();
        if distinct.len() != indices.len() {
            return Err(Error::StateShape(
                "subspace basis states must be distinct".into(),
            ));
        }
        Ok(Self { space, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// P M P in the subspace coordinates.
    pub fn restrict(&self, op: &OperatorMatrix) -> Result<Array2<C64>> {
        if op.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        let k = self.indices.len();
        Ok(Array2::from_shape_fn((k, k), |(i, j)| {
            op.entries[[self.indices[i], self.indices[j]]]
        }))
    }

    pub fn coordinates(&self, psi: &StateVector) -> Result<Array1<C64>> {
        if psi.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.indices.iter().map(|&i| psi.amplitudes[i]).collect())
    }

    pub fn embed(&self, coords: &Array1<C64>) -> Result<StateVector> {
        if coords.len() != self.indices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.indices.len(),
                found: coords.len(),
            });
        }
        let mut amplitudes = Array1::zeros(self.space.dimension());
        for (&i, &c) in self.indices.iter().zip(coords.iter()) {
            amplitudes[i] = c;
        }
        StateVector::new(self.space.clone(), amplitudes)
    }

    /// Norm of the component of `psi` outside the subspace.
    pub fn leakage(&self, psi: &StateVector) -> Result<f64> {
        if psi.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        let inside: BTreeSet<usize> = self.indices.iter().copied().collect();
        Ok(psi
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !inside.contains(i))
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}
