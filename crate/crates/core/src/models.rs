//! Hamiltonians of the two interaction stages.
//!
//! Stage A couples two V-type atoms to two cavity photon modes `a1, a2`, each of which
//! is in turn coupled by radiation pressure to a phonon mode `b1, b2`. Stage B couples
//! two atoms to the same two photon modes in an ordinary optical cavity. The effective
//! Hamiltonians are second-order results taken as given.
//!
//! Builders take an [`AtomMap`] that labels each atom of the space with its position
//! (1 through 8) in the repeater chain, so spectator atoms can share the space.

use crate::error::{Error, Result};
use crate::hilbert::{AtomLevel, Factor, Mode, OperatorMatrix, SpaceDescriptor, Term, C64};

use AtomLevel::{L1, L2, L3};

const A1: Mode = Mode::Photon(0);
const A2: Mode = Mode::Photon(1);
const B1: Mode = Mode::Phonon(0);
const B2: Mode = Mode::Phonon(1);

/// Relative tolerance for the equalities of the simplification preset.
pub const PRESET_TOLERANCE: f64 = 1e-12;

/// Every coupling and frequency appearing in the stage Hamiltonians.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1p: f64,
    pub lambda2p: f64,
    pub g: f64,
    pub gp: f64,
    pub omega_m: f64,
    /// ω̃₁..ω̃₃ of the first atom of a stage.
    pub atom_freqs: [f64; 3],
    /// ω̃′₁..ω̃′₃ of the second atom of a stage.
    pub atom_freqs_p: [f64; 3],
    /// Ω₁, Ω₂
    pub photon_freqs: [f64; 2],
    /// ω₁, ω₂
    pub phonon_freqs: [f64; 2],
}

impl ModelParams {
    /// Default photon frequency in units of λ₁; only frequency differences matter.
    pub const DEFAULT_PHOTON_FREQ: f64 = 10.0;

    /// Parameters in units of λ₁ (λ₁ = λ₂ = 1) satisfying the simplification preset
    /// exactly: primed couplings equal unprimed ones, ω̃₃ = 0, Ω₁ = Ω₂ = 10,
    /// ω̃ⱼ = Ωⱼ + ω_M and both phonon modes at ω_M.
    pub fn dimensionless(omega_m_over_lambda1: f64, g_over_lambda1: f64) -> Result<Self> {
        let w = omega_m_over_lambda1;
        let omega = Self::DEFAULT_PHOTON_FREQ;
        let atom = [omega + w, omega + w, 0.0];
        let p = Self {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda1p: 1.0,
            lambda2p: 1.0,
            g: g_over_lambda1,
            gp: g_over_lambda1,
            omega_m: w,
            atom_freqs: atom,
            atom_freqs_p: atom,
            photon_freqs: [omega, omega],
            phonon_freqs: [w, w],
        };
        p.validate()?;
        Ok(p)
    }

    /// Rates must be finite and positive, frequencies finite.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda1p", self.lambda1p),
            ("lambda2p", self.lambda2p),
            ("g", self.g),
            ("gp", self.gp),
            ("omega_m", self.omega_m),
            ("photon_freq_1", self.photon_freqs[0]),
            ("photon_freq_2", self.photon_freqs[1]),
            ("phonon_freq_1", self.phonon_freqs[0]),
            ("phonon_freq_2", self.phonon_freqs[1]),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !self
            .atom_freqs
            .iter()
            .chain(&self.atom_freqs_p)
            .all(|f| f.is_finite())
        {
            return Err(Error::InvalidParams(
                "atomic frequencies must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Checks the equalities under which the interaction-picture and effective
    /// Hamiltonians are written: λ₁=λ′₁, λ₂=λ′₂, G=G′, ω̃ᵢ=ω̃′ᵢ, ω₁=ω₂=ω_M and
    /// ω̃₁−ω̃₃−Ω₁ = ω_M = ω̃₂−ω̃₃−Ω₂.
    pub fn check_simplification(&self) -> Result<()> {
        self.validate()?;
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= PRESET_TOLERANCE * scale.max(1.0);
        let mut violations = Vec::new();
        let mut check = |what: &str, a: f64, b: f64, scale: f64| {
            if !close(a, b, scale) {
                violations.push(format!("{what}: {a} != {b}"));
            }
        };
        check(
            "lambda1 = lambda1'",
            self.lambda1,
            self.lambda1p,
            self.lambda1.abs().max(self.lambda1p.abs()),
        );
        check(
            "lambda2 = lambda2'",
            self.lambda2,
            self.lambda2p,
            self.lambda2.abs().max(self.lambda2p.abs()),
        );
        check("G = G'", self.g, self.gp, self.g.abs().max(self.gp.abs()));
        for i in 0..3 {
            let (a, b) = (self.atom_freqs[i], self.atom_freqs_p[i]);
            check(
                &format!("w{} = w{}'", i + 1, i + 1),
                a,
                b,
                a.abs().max(b.abs()),
            );
        }
        for (j, &w) in self.phonon_freqs.iter().enumerate() {
            check(
                &format!("phonon w{} = omega_m", j + 1),
                w,
                self.omega_m,
                w.abs().max(self.omega_m),
            );
        }
        for j in 0..2 {
            let detuning = self.atom_freqs[j] - self.atom_freqs[2] - self.photon_freqs[j];
            let scale = self.atom_freqs[j]
                .abs()
                .max(self.atom_freqs[2].abs())
                .max(self.photon_freqs[j])
                .max(self.omega_m);
            check(
                &format!("resonance w{} - w3 - Omega{} = omega_m", j + 1, j + 1),
                detuning,
                self.omega_m,
                scale,
            );
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(violations.join("; ")))
        }
    }
}

/// Chain labels (1..=8) of the atoms of a space, in space order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomMap(Vec<u8>);

impl AtomMap {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        for (i, &l) in labels.iter().enumerate() {
            if !(1..=8).contains(&l) {
                return Err(Error::AtomMap(format!("label {l} outside 1..=8")));
            }
            if labels[..i].contains(&l) {
                return Err(Error::AtomMap(format!("label {l} repeated")));
            }
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    /// Space index of the atom carrying `label`.
    pub fn position(&self, label: u8) -> Option<usize> {
        self.0.iter().position(|&l| l == label)
    }

    pub fn positions(&self, labels: &[u8]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|&l| {
                self.position(l)
                    .ok_or_else(|| Error::AtomMap(format!("atom {l} not present")))
            })
            .collect()
    }

    fn check_space(&self, space: &SpaceDescriptor) -> Result<()> {
        if self.0.len() != space.atom_count() {
            return Err(Error::AtomMap(format!(
                "{} labels for a space with {} atoms",
                self.0.len(),
                space.atom_count()
            )));
        }
        Ok(())
    }

    /// The interacting pair for an optomechanical stage: (2,3) or (6,7).
    fn stage_a_pair(&self, space: &SpaceDescriptor) -> Result<(usize, usize)> {
        self.check_space(space)?;
        let found: Vec<(usize, usize)> = [(2, 3), (6, 7)]
            .iter()
            .filter_map(|&(x, y)| Some((self.position(x)?, self.position(y)?)))
            .collect();
        match found.as_slice() {
            [pair] => Ok(*pair),
            [] => Err(Error::AtomMap(
                "need atoms (2,3) or (6,7) for the optomechanical stage".into(),
            )),
            _ => Err(Error::AtomMap(
                "both (2,3) and (6,7) present; the stage is ambiguous".into(),
            )),
        }
    }

    /// The interacting pair of the optical-cavity stage: (4,5).
    fn stage_b_pair(&self, space: &SpaceDescriptor) -> Result<(usize, usize)> {
        self.check_space(space)?;
        let p = self.positions(&[4, 5])?;
        Ok((p[0], p[1]))
    }
}

fn require_modes(space: &SpaceDescriptor, photons: usize, phonons: usize) -> Result<()> {
    if space.photon_caps().len() < photons || space.phonon_caps().len() < phonons {
        return Err(Error::InvalidSubsystem(format!(
            "need {photons} photon and {phonons} phonon modes, space has {} and {}",
            space.photon_caps().len(),
            space.phonon_caps().len()
        )));
    }
    Ok(())
}

fn sigma(atom: usize, l: AtomLevel, m: AtomLevel) -> Factor {
    Factor::sigma(atom, l, m)
}

fn number(mode: Mode) -> [Factor; 2] {
    [Factor::Create(mode), Factor::Annihilate(mode)]
}

/// Appends `term` and its adjoint.
fn push_with_adjoint(terms: &mut Vec<Term>, term: Term) {
    let adj = term.adjoint();
    terms.push(term);
    terms.push(adj);
}

fn free_terms(params: &ModelParams, first: usize, second: usize, phonons: bool) -> Vec<Term> {
    let mut terms = Vec::new();
    for (i, level) in AtomLevel::ALL.into_iter().enumerate() {
        terms.push(Term::new(
            params.atom_freqs[i],
            vec![sigma(first, level, level)],
        ));
        terms.push(Term::new(
            params.atom_freqs_p[i],
            vec![sigma(second, level, level)],
        ));
    }
    for (j, mode) in [A1, A2].into_iter().enumerate() {
        terms.push(Term::new(params.photon_freqs[j], number(mode).to_vec()));
    }
    if phonons {
        for (j, mode) in [B1, B2].into_iter().enumerate() {
            terms.push(Term::new(params.phonon_freqs[j], number(mode).to_vec()));
        }
    }
    terms
}

/// λ(âσ_{l3} + â†σ_{3l}) for both atoms and both photon modes.
fn atom_field_terms(params: &ModelParams, first: usize, second: usize) -> Vec<Term> {
    let mut terms = Vec::new();
    let couplings = [
        (params.lambda1, first, A1, L1),
        (params.lambda2, first, A2, L2),
        (params.lambda1p, second, A1, L1),
        (params.lambda2p, second, A2, L2),
    ];
    for (lambda, atom, mode, upper) in couplings {
        push_with_adjoint(
            &mut terms,
            Term::new(
                lambda,
                vec![Factor::Annihilate(mode), sigma(atom, upper, L3)],
            ),
        );
    }
    terms
}

/// Free Hamiltonian Ĥ₀ of the optomechanical stage.
pub fn h_free(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let (first, second) = atom_map.stage_a_pair(space)?;
    require_modes(space, 2, 2)?;
    OperatorMatrix::from_terms(
        space.clone(),
        &free_terms(params, first, second, true),
        true,
    )
}

/// Coupling Ĥ₁: atom–photon exchange plus the radiation-pressure terms −G â†â(b̂ + b̂†).
pub fn h_coupling(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let (first, second) = atom_map.stage_a_pair(space)?;
    require_modes(space, 2, 2)?;
    let mut terms = atom_field_terms(params, first, second);
    for (g, a, b) in [(params.g, A1, B1), (params.gp, A2, B2)] {
        push_with_adjoint(
            &mut terms,
            Term::new(
                -g,
                vec![
                    Factor::Create(a),
                    Factor::Annihilate(a),
                    Factor::Annihilate(b),
                ],
            ),
        );
    }
    OperatorMatrix::from_terms(space.clone(), &terms, true)
}

/// Ĥ₁ in the frame rotating with Ĥ₀, written with the resonance conditions applied:
/// e^{iω_M t}[λ₁â₁(σ²₁₃+σ³₁₃) + λ₂â₂(σ²₂₃+σ³₂₃) − G(â₁†â₁b̂₁† + â₂†â₂b̂₂†)] + h.c.
pub fn h_interaction_picture(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
    t: f64,
) -> Result<OperatorMatrix> {
    params.check_simplification()?;
    if !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    let (first, second) = atom_map.stage_a_pair(space)?;
    require_modes(space, 2, 2)?;
    let phase = C64::from_polar(1.0, params.omega_m * t);
    let mut terms = Vec::new();
    for atom in [first, second] {
        push_with_adjoint(
            &mut terms,
            Term::new(
                phase * params.lambda1,
                vec![Factor::Annihilate(A1), sigma(atom, L1, L3)],
            ),
        );
        push_with_adjoint(
            &mut terms,
            Term::new(
                phase * params.lambda2,
                vec![Factor::Annihilate(A2), sigma(atom, L2, L3)],
            ),
        );
    }
    for (a, b) in [(A1, B1), (A2, B2)] {
        push_with_adjoint(
            &mut terms,
            Term::new(
                -phase * params.g,
                vec![Factor::Create(a), Factor::Annihilate(a), Factor::Create(b)],
            ),
        );
    }
    OperatorMatrix::from_terms(space.clone(), &terms, true)
}

/// Effective Hamiltonian of the optomechanical stage.
///
/// Term groups, each summed over the two interacting atoms where indexed:
/// AC-Stark shifts (λᵢ²/ω_M)[σᵢᵢ + âᵢ†âᵢ(σᵢᵢ − σ₃₃)], atom–atom exchange
/// (λᵢ²/ω_M)(σ_{i3}σ'_{3i} + h.c.), Kerr terms −(G²/ω_M)(âⱼ†âⱼ)², photon-mode conversion
/// (λ₁λ₂/ω_M)(â₁â₂†σ₁₂ + h.c.) and correlated photon–phonon emission
/// −(Gλᵢ/ω_M)(âᵢb̂ᵢσ_{i3} + h.c.).
pub fn h_eff_stage_a(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let (first, second) = atom_map.stage_a_pair(space)?;
    require_modes(space, 2, 2)?;
    let w = params.omega_m;
    let (l1, l2, g) = (params.lambda1, params.lambda2, params.g);
    let mut terms = Vec::new();

    for (lambda, mode, upper) in [(l1, A1, L1), (l2, A2, L2)] {
        let k = lambda * lambda / w;
        for atom in [first, second] {
            terms.push(Term::new(k, vec![sigma(atom, upper, upper)]));
            let [c, a] = number(mode);
            terms.push(Term::new(k, vec![c, a, sigma(atom, upper, upper)]));
            terms.push(Term::new(-k, vec![c, a, sigma(atom, L3, L3)]));
        }
        push_with_adjoint(
            &mut terms,
            Term::new(k, vec![sigma(first, upper, L3), sigma(second, L3, upper)]),
        );
    }

    for mode in [A1, A2] {
        let [c, a] = number(mode);
        terms.push(Term::new(-g * g / w, vec![c, a, c, a]));
    }

    for atom in [first, second] {
        push_with_adjoint(
            &mut terms,
            Term::new(
                l1 * l2 / w,
                vec![
                    Factor::Annihilate(A1),
                    Factor::Create(A2),
                    sigma(atom, L1, L2),
                ],
            ),
        );
        for (lambda, a, b, upper) in [(l1, A1, B1, L1), (l2, A2, B2, L2)] {
            push_with_adjoint(
                &mut terms,
                Term::new(
                    -g * lambda / w,
                    vec![
                        Factor::Annihilate(a),
                        Factor::Annihilate(b),
                        sigma(atom, upper, L3),
                    ],
                ),
            );
        }
    }
    OperatorMatrix::from_terms(space.clone(), &terms, true)
}

/// Full Hamiltonian of the optical-cavity stage (atoms 4 and 5, photon modes only).
pub fn h_stage_b(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let (first, second) = atom_map.stage_b_pair(space)?;
    require_modes(space, 2, 0)?;
    let mut terms = free_terms(params, first, second, false);
    terms.extend(atom_field_terms(params, first, second));
    OperatorMatrix::from_terms(space.clone(), &terms, true)
}

/// Effective Hamiltonian of the optical-cavity stage with the field in vacuum:
/// (λ₁²/ω_M)[σ⁴₁₁ + σ⁵₁₁ + (σ⁴₁₃σ⁵₃₁ + h.c.)] + (λ₂²/ω_M)[σ⁴₂₂ + σ⁵₂₂ + (σ⁴₂₃σ⁵₃₂ + h.c.)].
/// Any field modes in the space are left untouched.
pub fn h_eff_stage_b(
    params: &ModelParams,
    space: &SpaceDescriptor,
    atom_map: &AtomMap,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let (first, second) = atom_map.stage_b_pair(space)?;
    let mut terms = Vec::new();
    for (lambda, upper) in [(params.lambda1, L1), (params.lambda2, L2)] {
        let k = lambda * lambda / params.omega_m;
        terms.push(Term::new(k, vec![sigma(first, upper, upper)]));
        terms.push(Term::new(k, vec![sigma(second, upper, upper)]));
        push_with_adjoint(
            &mut terms,
            Term::new(k, vec![sigma(first, upper, L3), sigma(second, L3, upper)]),
        );
    }
    OperatorMatrix::from_terms(space.clone(), &terms, true)
}
