//! Entanglement and probability figures of merit.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hilbert::{StateVector, Subsystem, C64};

/// Linear entropy 1 − Tr ρ_A² of the normalized two-term state c₁|ab⟩ + c₂|a′b′⟩
/// with orthogonal local kets: 2|c₁|²|c₂|²/(|c₁|² + |c₂|²)². Ranges over [0, 1/2].
pub fn linear_entropy_two_term(c1: C64, c2: C64) -> Result<f64> {
    let (a, b) = (c1.norm_sqr(), c2.norm_sqr());
    let p = a + b;
    if p == 0.0 {
        return Err(Error::ZeroAmplitudes);
    }
    Ok(2.0 * (a / p) * (b / p))
}

/// Σ|cᵢ|².
pub fn success_probability(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

/// A heralded pair state c₁|13⟩ + c₂|31⟩ with its probability and linear entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStateSummary {
    pub c1: C64,
    pub c2: C64,
    /// |c₁|² + |c₂|².
    pub p: f64,
    /// Linear entropy; defined as 0 for an outcome that never occurs.
    pub e: f64,
}

impl PairStateSummary {
    pub fn from_amplitudes(c1: C64, c2: C64) -> Self {
        let p = c1.norm_sqr() + c2.norm_sqr();
        let e = linear_entropy_two_term(c1, c2).unwrap_or(0.0);
        Self { c1, c2, p, e }
    }
}

/// Tr ρ_kept² for a state normalized to one, tracing out everything not in `kept`.
pub fn reduced_purity(state: &StateVector, kept: &BTreeSet<Subsystem>) -> Result<f64> {
    let space = state.space();
    for &s in kept {
        space.check_subsystem(s)?;
    }
    let traced: BTreeSet<Subsystem> = space.subsystems().filter(|s| !kept.contains(s)).collect();
    let kept_space = space.without(&traced)?;
    let traced_space = space.without(kept)?;
    let mut m = Array2::<C64>::zeros((kept_space.dimension(), traced_space.dimension()));
    for (i, basis) in space.basis().enumerate() {
        let r = kept_space.basis_index(&basis.without(&traced))?;
        let c = traced_space.basis_index(&basis.without(kept))?;
        m[[r, c]] = state.amplitudes()[i];
    }
    let rho = m.dot(&m.t().mapv(|z| z.conj()));
    Ok(rho.iter().map(|z| z.norm_sqr()).sum())
}

/// 1 − Tr ρ_kept².
pub fn linear_entropy(state: &StateVector, kept: &BTreeSet<Subsystem>) -> Result<f64> {
    Ok(1.0 - reduced_purity(state, kept)?)
}
