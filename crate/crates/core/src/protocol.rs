//! The full three-stage protocol as a tree of measurement branches.
//!
//! Both optomechanical stages evolve for time `t` and read out a1, b1 and their two
//! inner atoms. Each pair of successful outcomes selects one of four cases for the
//! optical-cavity stage, which runs until `tau` and reads out atoms 4 and 5, leaving
//! the outer pair (1,8) in a two-term state.

use std::collections::BTreeMap;

use crate::dynamics::{
    stage_a_coefficients, stage_b_coefficients, PairBranch, Side, StageASolution, StageBSolution,
};
use crate::error::{Error, Result};
use crate::hilbert::{build_space, AtomLevel, BasisState, Mode, SpaceDescriptor, StateVector, C64};
use crate::measurement::{project, ProjectorSpec};
use crate::metrics::PairStateSummary;
use crate::models::{AtomMap, ModelParams};

use AtomLevel::{L1, L3};

/// Tolerance for the exact identities checked on a finished tree.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    ALeft,
    ARight,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    /// The outer pair holds an entangled state that feeds the next stage.
    Success,
    /// A maximally entangled outer pair; the branch ends here.
    HeraldedBell,
    Failure,
}

/// One readout of an optomechanical stage: n = n_a1 = n_b1 and the inner atom levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageAOutcome {
    pub n: usize,
    pub levels: [AtomLevel; 2],
    pub classification: Classification,
    pub branch: Option<PairBranch>,
}

const fn outcome(
    n: usize,
    first: AtomLevel,
    second: AtomLevel,
    classification: Classification,
    branch: Option<PairBranch>,
) -> StageAOutcome {
    StageAOutcome {
        n,
        levels: [first, second],
        classification,
        branch,
    }
}

/// Every readout with support on the ansatz.
pub const STAGE_A_OUTCOMES: [StageAOutcome; 8] = [
    outcome(0, L3, L1, Classification::Success, Some(PairBranch::Psi1)),
    outcome(0, L1, L3, Classification::Success, Some(PairBranch::Psi2)),
    outcome(1, L3, L3, Classification::HeraldedBell, None),
    outcome(0, L3, L3, Classification::Failure, None),
    outcome(0, L1, L1, Classification::Failure, None),
    outcome(1, L3, L1, Classification::Failure, None),
    outcome(1, L1, L3, Classification::Failure, None),
    outcome(2, L3, L3, Classification::Failure, None),
];

/// Readouts of atoms (4,5) in the optical-cavity stage: levels, and whether the outer
/// pair is left in the primed state (`Some(true)`), the unprimed one, or a product state.
pub const STAGE_B_OUTCOMES: [([AtomLevel; 2], Option<bool>); 4] = [
    ([L1, L3], Some(false)),
    ([L3, L1], Some(true)),
    ([L3, L3], None),
    ([L1, L1], None),
];

#[derive(Clone, Debug, PartialEq)]
pub struct StageARecord {
    pub outcome: StageAOutcome,
    pub label: String,
    pub probability: f64,
    /// Outer-pair amplitudes on (|L1,L3⟩, |L3,L1⟩), scaled so that `p` is the branch probability.
    pub pair: Option<PairStateSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageARun {
    pub side: Side,
    pub solution: StageASolution,
    pub records: Vec<StageARecord>,
}

fn stage_a_space() -> Result<SpaceDescriptor> {
    build_space(&[2, 0], &[2, 0], 4)
}

fn pair_from_reduced(reduced: &StateVector, scale: f64) -> Result<PairStateSummary> {
    let space = reduced.space();
    let ket = |levels: Vec<AtomLevel>| {
        BasisState::new(
            vec![0; space.photon_caps().len()],
            vec![0; space.phonon_caps().len()],
            levels,
        )
    };
    let c1 = reduced.amplitude(&ket(vec![L1, L3]))? * scale;
    let c2 = reduced.amplitude(&ket(vec![L3, L1]))? * scale;
    Ok(PairStateSummary::from_amplitudes(c1, c2))
}

/// Evolves one side for time `t` and projects onto every readout in the catalog.
pub fn run_stage_a(params: &ModelParams, t: f64, side: Side) -> Result<StageARun> {
    let solution = stage_a_coefficients(params, t)?;
    let space = stage_a_space()?;
    let labels = side.labels();
    let map = AtomMap::new(labels.to_vec())?;
    let state = solution.embed(&space, &map, side)?;
    let inner = [1, 2];
    let mut records = Vec::with_capacity(STAGE_A_OUTCOMES.len());
    for oc in STAGE_A_OUTCOMES {
        let spec = ProjectorSpec::new()
            .with_mode(Mode::Photon(0), oc.n)
            .with_mode(Mode::Phonon(0), oc.n)
            .with_atom(inner[0], oc.levels[0])
            .with_atom(inner[1], oc.levels[1]);
        let measured = project(&state, &spec)?;
        let pair = match (&measured.post_state, oc.classification) {
            (Some(post), Classification::Success | Classification::HeraldedBell) => {
                Some(pair_from_reduced(post, measured.probability.sqrt())?)
            }
            _ => None,
        };
        let label = format!(
            "a1={n},b1={n},atom{}=L{},atom{}=L{}",
            labels[inner[0]],
            oc.levels[0],
            labels[inner[1]],
            oc.levels[1],
            n = oc.n
        );
        records.push(StageARecord {
            outcome: oc,
            label,
            probability: measured.probability,
            pair,
        });
    }
    Ok(StageARun {
        side,
        solution,
        records,
    })
}

/// The outer-pair state heralded by a successful stage-A readout, from the coefficients.
pub fn heralded_pair(sa: &StageASolution, branch: PairBranch) -> PairStateSummary {
    let [c1, c2] = branch.amplitudes(sa);
    PairStateSummary::from_amplitudes(c1, c2)
}

/// The (1,8) state left by a stage-B readout, straight from B₁..B₆.
pub fn final_pair(sb: &StageBSolution, primed: bool) -> PairStateSummary {
    if primed {
        PairStateSummary::from_amplitudes(sb.coefficient(1), sb.coefficient(6))
    } else {
        PairStateSummary::from_amplitudes(sb.coefficient(2), sb.coefficient(5))
    }
}

/// The case selected by the branches heralded on pairs (1,4) and (5,8).
pub fn case_for(left: PairBranch, right: PairBranch) -> u8 {
    use PairBranch::{Psi1, Psi2};
    match (left, right) {
        (Psi1, Psi2) => 1,
        (Psi2, Psi1) => 2,
        (Psi1, Psi1) => 3,
        (Psi2, Psi2) => 4,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinalKey {
    pub case_id: u8,
    pub primed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub stage: Stage,
    pub outcome_label: String,
    /// Probability given that the parent branch occurred.
    pub conditional_probability: f64,
    pub cumulative_probability: f64,
    pub pair: Option<PairStateSummary>,
    pub classification: Classification,
    /// Stage-A successes: which pair state was heralded.
    pub heralded: Option<PairBranch>,
    pub case_id: Option<u8>,
    /// Stage-B successes: whether the outer pair is in the primed state.
    pub primed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolTree {
    pub params: ModelParams,
    pub t: f64,
    pub tau: f64,
    pub stage_a: StageASolution,
    pub branches: Vec<BranchRecord>,
    /// Outer-pair (1,8) states for each case and stage-B readout, with stage-B probabilities.
    pub final_results: BTreeMap<FinalKey, PairStateSummary>,
}

struct StageBRecord {
    label: String,
    probability: f64,
    primed: Option<bool>,
    pair: Option<PairStateSummary>,
}

fn run_stage_b(sb: &StageBSolution) -> Result<Vec<StageBRecord>> {
    let space = build_space(&[], &[], 4)?;
    let map = AtomMap::new(vec![1, 4, 5, 8])?;
    let state = sb.embed(&space, &map)?;
    let mut out = Vec::with_capacity(STAGE_B_OUTCOMES.len());
    for (levels, primed) in STAGE_B_OUTCOMES {
        let spec = ProjectorSpec::new()
            .with_atom(1, levels[0])
            .with_atom(2, levels[1]);
        let measured = project(&state, &spec)?;
        let pair = match (&measured.post_state, primed) {
            (Some(post), Some(_)) => Some(pair_from_reduced(post, measured.probability.sqrt())?),
            _ => None,
        };
        out.push(StageBRecord {
            label: format!("atom4=L{},atom5=L{}", levels[0], levels[1]),
            probability: measured.probability,
            primed,
            pair,
        });
    }
    Ok(out)
}

/// Builds the whole branch tree for interaction times `t` (stage A) and `tau` ≥ `t` (stage B).
pub fn run_full_protocol(params: &ModelParams, t: f64, tau: f64) -> Result<ProtocolTree> {
    let left = run_stage_a(params, t, Side::Left)?;
    let right = run_stage_a(params, t, Side::Right)?;
    let sa = left.solution.clone();
    if !tau.is_finite() {
        return Err(Error::InvalidTime(tau));
    }
    if tau < t {
        return Err(Error::TauBeforeT { t, tau });
    }

    let mut branches = Vec::new();
    fn push(branches: &mut Vec<BranchRecord>, mut record: BranchRecord) -> usize {
        record.id = branches.len();
        branches.push(record);
        branches.len() - 1
    }

    for l in &left.records {
        let l_id = push(
            &mut branches,
            BranchRecord {
                id: 0,
                parent: None,
                stage: Stage::ALeft,
                outcome_label: l.label.clone(),
                conditional_probability: l.probability,
                cumulative_probability: l.probability,
                pair: l.pair,
                classification: l.outcome.classification,
                heralded: l.outcome.branch,
                case_id: None,
                primed: None,
            },
        );
        let Some(left_branch) = l.outcome.branch else {
            continue;
        };
        for r in &right.records {
            let r_cum = l.probability * r.probability;
            let r_id = push(
                &mut branches,
                BranchRecord {
                    id: 0,
                    parent: Some(l_id),
                    stage: Stage::ARight,
                    outcome_label: r.label.clone(),
                    conditional_probability: r.probability,
                    cumulative_probability: r_cum,
                    pair: r.pair,
                    classification: r.outcome.classification,
                    heralded: r.outcome.branch,
                    case_id: None,
                    primed: None,
                },
            );
            let Some(right_branch) = r.outcome.branch else {
                continue;
            };
            let case_id = case_for(left_branch, right_branch);
            let sb = stage_b_coefficients(&sa, params, case_id, tau)?;
            for b in run_stage_b(&sb)? {
                push(
                    &mut branches,
                    BranchRecord {
                        id: 0,
                        parent: Some(r_id),
                        stage: Stage::B,
                        outcome_label: b.label,
                        conditional_probability: b.probability,
                        cumulative_probability: r_cum * b.probability,
                        pair: b.pair,
                        classification: if b.primed.is_some() {
                            Classification::Success
                        } else {
                            Classification::Failure
                        },
                        heralded: None,
                        case_id: Some(case_id),
                        primed: b.primed,
                    },
                );
            }
        }
    }

    let mut final_results = BTreeMap::new();
    for case_id in 1..=4u8 {
        let sb = stage_b_coefficients(&sa, params, case_id, tau)?;
        for primed in [false, true] {
            final_results.insert(FinalKey { case_id, primed }, final_pair(&sb, primed));
        }
    }

    Ok(ProtocolTree {
        params: params.clone(),
        t,
        tau,
        stage_a: sa,
        branches,
        final_results,
    })
}

/// A named numerical identity and how far it is from holding.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            deviation,
            tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Equalities between final-pair figures across cases and readouts, plus agreement
/// between the closed-form results and the projected branch records.
pub fn verify_symmetries(tree: &ProtocolTree) -> Report {
    let get = |case_id, primed| tree.final_results[&FinalKey { case_id, primed }];
    let name = |case: u8, primed: bool| format!("{}{}", case, if primed { "'" } else { "" });
    let pairs = [
        ((1, false), (1, true)),
        ((2, false), (2, true)),
        ((1, false), (2, false)),
        ((3, false), (4, true)),
        ((4, false), (3, true)),
    ];
    let mut report = Report::default();
    for ((ca, pa), (cb, pb)) in pairs {
        let (x, y) = (get(ca, pa), get(cb, pb));
        report.push(
            format!("E{} = E{}", name(ca, pa), name(cb, pb)),
            (x.e - y.e).abs(),
            IDENTITY_TOLERANCE,
        );
        report.push(
            format!("P{} = P{}", name(ca, pa), name(cb, pb)),
            (x.p - y.p).abs(),
            IDENTITY_TOLERANCE,
        );
    }

    let mut consistency = 0.0f64;
    for b in tree.branches.iter().filter(|b| b.stage == Stage::B) {
        let (Some(pair), Some(case_id), Some(primed)) = (b.pair, b.case_id, b.primed) else {
            continue;
        };
        let want = get(case_id, primed);
        consistency = consistency
            .max((pair.p - want.p).abs())
            .max((pair.e - want.e).abs());
    }
    report.push(
        "projected stage-B records match closed form",
        consistency,
        IDENTITY_TOLERANCE,
    );
    report
}

/// Conservation and consistency checks on a finished tree.
pub fn check_invariants(tree: &ProtocolTree) -> Report {
    let sa = &tree.stage_a;
    let mut report = Report::default();
    report.push(
        "stage-A coefficients normalized",
        (sa.norm_sqr() - 1.0).abs(),
        IDENTITY_TOLERANCE,
    );
    report.push(
        "A2 - A3 = 1/2",
        (sa.coefficient(2) - sa.coefficient(3) - C64::new(0.5, 0.0)).norm(),
        IDENTITY_TOLERANCE,
    );

    let mut children: BTreeMap<Option<usize>, Vec<&BranchRecord>> = BTreeMap::new();
    for b in &tree.branches {
        children.entry(b.parent).or_default().push(b);
    }
    let mut completeness = 0.0f64;
    for kids in children.values() {
        let total: f64 = kids.iter().map(|b| b.conditional_probability).sum();
        completeness = completeness.max((total - 1.0).abs());
    }
    report.push(
        "readout probabilities sum to one",
        completeness,
        IDENTITY_TOLERANCE,
    );

    let mut herald = 0.0f64;
    for b in tree.branches.iter().filter(|b| b.stage != Stage::B) {
        if let Some(pair) = b.pair {
            herald = herald.max((pair.p - b.conditional_probability).abs());
            if b.classification == Classification::HeraldedBell && pair.p > 0.0 {
                herald = herald.max((pair.e - 0.5).abs());
            }
        }
    }
    report.push(
        "heralded pairs carry the whole branch",
        herald,
        IDENTITY_TOLERANCE,
    );

    let mut closed = 0.0f64;
    for b in &tree.branches {
        if let (Some(branch), Some(pair)) = (b.heralded, b.pair) {
            let want = heralded_pair(sa, branch);
            closed = closed
                .max((pair.c1 - want.c1).norm())
                .max((pair.c2 - want.c2).norm());
        }
    }
    report.push(
        "projected stage-A pairs match coefficients",
        closed,
        IDENTITY_TOLERANCE,
    );

    report.checks.extend(verify_symmetries(tree).checks);
    report
}
