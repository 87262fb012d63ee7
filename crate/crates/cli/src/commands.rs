//! Single-point runs: stage A on its own and the full protocol tree.

use std::io::Write;

use repeater_core::dynamics::Side;
use repeater_core::metrics::PairStateSummary;
use repeater_core::protocol::{
    check_invariants, run_full_protocol, run_stage_a, verify_symmetries, BranchRecord,
    Classification, FinalKey, ProtocolTree, Report, Stage, IDENTITY_TOLERANCE,
};
use repeater_core::ModelParams;

use crate::error::Result;

pub const BRANCH_HEADER: [&str; 11] = [
    "id",
    "parent",
    "stage",
    "outcome",
    "classification",
    "case_id",
    "readout",
    "conditional_probability",
    "cumulative_probability",
    "pair_p",
    "pair_e",
];

fn stage_name(s: Stage) -> &'static str {
    match s {
        Stage::ALeft => "A-left",
        Stage::ARight => "A-right",
        Stage::B => "B",
    }
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Success => "success",
        Classification::HeraldedBell => "heralded-bell",
        Classification::Failure => "failure",
    }
}

fn readout_name(primed: Option<bool>) -> &'static str {
    match primed {
        Some(false) => "psi",
        Some(true) => "psi'",
        None => "",
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn branch_record(b: &BranchRecord) -> [String; 11] {
    [
        b.id.to_string(),
        b.parent.map(|p| p.to_string()).unwrap_or_default(),
        stage_name(b.stage).into(),
        b.outcome_label.clone(),
        class_name(b.classification).into(),
        b.case_id.map(|c| c.to_string()).unwrap_or_default(),
        readout_name(b.primed).into(),
        float(b.conditional_probability),
        float(b.cumulative_probability),
        b.pair.map(|p| float(p.p)).unwrap_or_default(),
        b.pair.map(|p| float(p.e)).unwrap_or_default(),
    ]
}

/// The branch table as CSV.
pub fn write_branch_table<W: Write>(out: W, tree: &ProtocolTree) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BRANCH_HEADER)?;
    for b in &tree.branches {
        w.write_record(branch_record(b))?;
    }
    w.flush()?;
    Ok(())
}

fn write_report<W: Write + ?Sized>(out: &mut W, title: &str, report: &Report) -> Result<()> {
    writeln!(out, "{title}:")?;
    for c in &report.checks {
        writeln!(
            out,
            "  {} {} (deviation {:.3e}, tolerance {:.0e})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance
        )?;
    }
    Ok(())
}

fn pair_line(p: &PairStateSummary) -> String {
    format!("P = {:.12}  E = {:.12}", p.p, p.e)
}

pub struct ProtocolOutcome {
    pub tree: ProtocolTree,
    pub symmetries: Report,
    pub invariants: Report,
}

impl ProtocolOutcome {
    pub fn passed(&self) -> bool {
        self.invariants.passed()
    }
}

pub fn protocol(params: &ModelParams, t: f64, tau: f64) -> Result<ProtocolOutcome> {
    let tree = run_full_protocol(params, t, tau)?;
    let symmetries = verify_symmetries(&tree);
    let invariants = check_invariants(&tree);
    Ok(ProtocolOutcome {
        tree,
        symmetries,
        invariants,
    })
}

/// Human-readable summary. The branch table is embedded unless it goes to a file.
pub fn print_protocol<W: Write + ?Sized>(
    out: &mut W,
    run: &ProtocolOutcome,
    embed_table: bool,
    full_check: bool,
) -> Result<()> {
    let tree = &run.tree;
    writeln!(
        out,
        "protocol: omega_m/lambda1 = {}, g/lambda1 = {}, lambda1_t = {}, lambda1_tau = {}",
        tree.params.omega_m, tree.params.g, tree.t, tree.tau
    )?;
    writeln!(out, "stage-A coefficients:")?;
    for k in 1..=11 {
        let a = tree.stage_a.coefficient(k);
        writeln!(out, "  A{k:<2} = {:+.12} {:+.12}i", a.re, a.im)?;
    }
    let stage_a_total: f64 = tree
        .branches
        .iter()
        .filter(|b| b.parent.is_none())
        .map(|b| b.conditional_probability)
        .sum();
    writeln!(
        out,
        "stage-A readout probabilities sum to {stage_a_total:.15}"
    )?;
    if embed_table {
        writeln!(out, "branches:")?;
        write_branch_table(&mut *out, tree)?;
    }
    writeln!(out, "final pair (1,8):")?;
    for (FinalKey { case_id, primed }, pair) in &tree.final_results {
        writeln!(
            out,
            "  case {case_id} {:<4} {}",
            readout_name(Some(*primed)),
            pair_line(pair)
        )?;
    }
    write_report(out, "symmetry checks", &run.symmetries)?;
    if full_check {
        write_report(out, "invariant checks", &run.invariants)?;
    }
    let failed = run.invariants.failures().count();
    writeln!(
        out,
        "{} of {} invariant checks passed",
        run.invariants.checks.len() - failed,
        run.invariants.checks.len()
    )?;
    Ok(())
}

/// Runs one optomechanical stage and prints its readout table. Returns whether the
/// stage-level identities hold.
pub fn stage_a<W: Write + ?Sized>(
    out: &mut W,
    params: &ModelParams,
    t: f64,
    full_check: bool,
) -> Result<bool> {
    let run = run_stage_a(params, t, Side::Left)?;
    let sa = &run.solution;
    writeln!(
        out,
        "stage A: omega_m/lambda1 = {}, g/lambda1 = {}, lambda1_t = {t}",
        params.omega_m, params.g
    )?;
    for k in 1..=11 {
        let a = sa.coefficient(k);
        writeln!(out, "  A{k:<2} = {:+.12} {:+.12}i", a.re, a.im)?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record([
        "outcome",
        "classification",
        "probability",
        "pair_p",
        "pair_e",
    ])?;
    for r in &run.records {
        w.write_record([
            r.label.clone(),
            class_name(r.outcome.classification).into(),
            float(r.probability),
            r.pair.map(|p| float(p.p)).unwrap_or_default(),
            r.pair.map(|p| float(p.e)).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    drop(w);

    let total: f64 = run.records.iter().map(|r| r.probability).sum();
    let half = repeater_core::C64::new(0.5, 0.0);
    let checks = [
        ("coefficients normalized", (sa.norm_sqr() - 1.0).abs()),
        ("A1 = 1/2", (sa.coefficient(1) - half).norm()),
        (
            "A2 - A3 = 1/2",
            (sa.coefficient(2) - sa.coefficient(3) - half).norm(),
        ),
        ("readout probabilities sum to one", (total - 1.0).abs()),
    ];
    let mut ok = true;
    for (name, dev) in checks {
        let pass = dev <= IDENTITY_TOLERANCE;
        ok &= pass;
        if full_check || !pass {
            writeln!(
                out,
                "  {} {name} (deviation {dev:.3e}, tolerance {IDENTITY_TOLERANCE:.0e})",
                if pass { "PASS" } else { "FAIL" }
            )?;
        }
    }
    Ok(ok)
}
