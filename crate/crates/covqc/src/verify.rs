//! The acceptance gate: nine release criteria, each recomputing its
//! quantities from scratch and comparing them against closed forms or
//! recorded reference values.
//!
//! Every comparison becomes a [`CheckDetail`] inside a [`CriterionReport`],
//! so both the `verify` subcommand and the acceptance test suite can print
//! one line per criterion and inspect individual computed-versus-expected
//! pairs without rerunning anything. Runtime is recorded on the report but
//! is deliberately not a check: wall-clock budgets are asserted by the test
//! harness, not traded off against numerical tolerances.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::capacity::{
    self, coherent_info_single, fixed_eigenvalue_check, moe_brute_force, moe_cov1l, moe_cov22,
    superactivation_experiment, MinimizerLabel,
};
use crate::channel::{
    cg_channel, covariance_residual, family_channel, reference, FamilyParams,
};
use crate::linalg::{entropy_of_spectrum, DenseMatrix};
use crate::ppt::{ppt_report, pt_spectrum_agreement, twirl_average};
use crate::su2::{haar_state, haar_su2};
use crate::tol::DEFAULT as TOL;
use crate::witnesses::{
    cov1l_boundary_decomposition_defect, cov1l_outside_facet_points, cov22_outside_facet_points,
    cov22_vertex_decomposition_defects, degradability_witness_cov1l, degradability_witness_cov22,
    degradability_witness_covl1, positivity_region_cov1l, positivity_region_cov22, Conclusion,
    WitnessKind, WitnessReport,
};
use crate::{Error, Result};

/// How a [`CheckDetail`] compares `computed` against its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// `|computed - expected| <= tolerance`.
    AbsDiff,
    /// `computed <= tolerance`; `expected` records the ideal value.
    UpperBound,
    /// `computed >= tolerance`.
    LowerBound,
}

/// One computed-versus-expected pair.
#[derive(Debug, Clone)]
pub struct CheckDetail {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    /// The tolerance actually applied (the override if one is set).
    pub tolerance: f64,
    pub mode: CheckMode,
    pub pass: bool,
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// True when the criterion fails under a tolerance override but every
    /// check would pass at the built-in defaults, so the failure says
    /// something about the override rather than about the numerics.
    pub tolerance_induced: bool,
    pub runtime_ms: u128,
    pub details: Vec<CheckDetail>,
}

/// Knobs shared by all criteria.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    /// Replaces every check's default tolerance when set. Runtime budgets
    /// are not tolerances and are unaffected.
    pub tolerance_override: Option<f64>,
    /// Seed for the randomized probes (Haar rotations, Haar states, twirl
    /// sampling). Two runs with equal config produce identical reports.
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tolerance_override: None, seed: 17 }
    }
}

pub const CRITERION_COUNT: usize = 9;

/// Run a single criterion, `id` in `1..=CRITERION_COUNT`.
pub fn run_criterion(id: usize, config: &VerifyConfig) -> Result<CriterionReport> {
    match id {
        1 => criterion_actions(config),
        2 => criterion_covariance(config),
        3 => criterion_pt_regions(config),
        4 => criterion_twirl(config),
        5 => criterion_moe(config),
        6 => criterion_fixed_eigenvalue(config),
        7 => criterion_superactivation(config),
        8 => criterion_witnesses(config),
        9 => criterion_positivity(config),
        _ => Err(Error::InvalidParams(format!("criterion id {id} outside 1..={CRITERION_COUNT}"))),
    }
}

/// Run the whole gate in criterion order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<CriterionReport>> {
    (1..=CRITERION_COUNT).map(|id| run_criterion(id, config)).collect()
}

fn passes(mode: CheckMode, computed: f64, expected: f64, tolerance: f64) -> bool {
    match mode {
        CheckMode::AbsDiff => (computed - expected).abs() <= tolerance,
        CheckMode::UpperBound => computed <= tolerance,
        CheckMode::LowerBound => computed >= tolerance,
    }
}

/// Accumulates details, tracking separately whether everything would pass at
/// the default tolerances (for the `tolerance_induced` flag).
struct Checks {
    override_tol: Option<f64>,
    details: Vec<CheckDetail>,
    all_pass_at_default: bool,
}

impl Checks {
    fn new(config: &VerifyConfig) -> Self {
        Checks { override_tol: config.tolerance_override, details: Vec::new(), all_pass_at_default: true }
    }

    fn push(&mut self, name: impl Into<String>, computed: f64, expected: f64, default_tol: f64, mode: CheckMode) {
        let tolerance = self.override_tol.unwrap_or(default_tol);
        self.all_pass_at_default &= passes(mode, computed, expected, default_tol);
        self.details.push(CheckDetail {
            name: name.into(),
            computed,
            expected,
            tolerance,
            mode,
            pass: passes(mode, computed, expected, tolerance),
        });
    }

    fn report(self, id: usize, name: &'static str, started: Instant) -> CriterionReport {
        let passed = self.details.iter().all(|d| d.pass);
        CriterionReport {
            id,
            name,
            passed,
            tolerance_induced: !passed && self.all_pass_at_default,
            runtime_ms: started.elapsed().as_millis(),
            details: self.details,
        }
    }
}

fn criterion_actions(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);

    let mut worst_lower = 0.0f64;
    let mut worst_upper = 0.0f64;
    for l in 1..=6 {
        let lower = cg_channel(1, l, l - 1)?;
        let upper = cg_channel(1, l, l + 1)?;
        for a in 0..2 {
            for b in 0..2 {
                let x = DenseMatrix::matrix_unit(2, a, b);
                worst_lower = worst_lower
                    .max(lower.apply(&x)?.sub(&reference::lower_action(l, &x)).max_abs_entry());
                worst_upper = worst_upper
                    .max(upper.apply(&x)?.sub(&reference::upper_action(l, &x)).max_abs_entry());
            }
        }
    }
    checks.push("down-coupling actions on matrix units, l <= 6", worst_lower, 0.0, TOL.action, CheckMode::UpperBound);
    checks.push("up-coupling actions on matrix units, l <= 6", worst_upper, 0.0, TOL.action, CheckMode::UpperBound);

    let mut worst_qutrit = 0.0f64;
    for m in [0usize, 2, 4] {
        let channel = cg_channel(2, 2, m)?;
        for a in 0..3 {
            for b in 0..3 {
                let x = DenseMatrix::matrix_unit(3, a, b);
                worst_qutrit = worst_qutrit
                    .max(channel.apply(&x)?.sub(&reference::cov22_action(m, &x)).max_abs_entry());
            }
        }
    }
    checks.push("qutrit extreme-point actions on matrix units", worst_qutrit, 0.0, TOL.action, CheckMode::UpperBound);

    Ok(checks.report(1, "channel actions match the closed forms", started))
}

fn criterion_covariance(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut grid: Vec<FamilyParams> = Vec::new();
    for l in 1..=4 {
        for p in [0.0, 0.3, 0.7, 1.0] {
            grid.push(FamilyParams::Cov1L { l, p });
            grid.push(FamilyParams::CovL1 { l, p });
        }
    }
    for (p, q) in [(0.0, 0.0), (0.3, 0.2), (0.5, 0.5), (1.0, 0.0), (0.0, 1.0), (0.2, 0.6)] {
        grid.push(FamilyParams::Cov22 { p, q });
    }

    let mut worst = 0.0f64;
    for params in &grid {
        let channel = family_channel(params)?;
        let (k, l) = params.irrep_labels();
        for _ in 0..20 {
            let u = haar_su2(&mut rng);
            worst = worst.max(covariance_residual(channel.as_map(), k, l, &u)?);
        }
    }
    checks.push(
        format!("max residual over {} channels x 20 Haar rotations", grid.len()),
        worst,
        0.0,
        TOL.covariance,
        CheckMode::UpperBound,
    );

    Ok(checks.report(2, "irreducible covariance under random rotations", started))
}

/// Membership on a parameter line: out-of-simplex points count as
/// non-members (there is no channel there), and sign changes are located at
/// midpoints between adjacent grid points.
fn membership_flips(line: &[(f64, FamilyParams)]) -> Vec<f64> {
    let member: Vec<bool> = line
        .iter()
        .map(|(_, params)| match ppt_report(params) {
            Ok(report) => report.margin >= -TOL.psd_floor,
            Err(_) => false,
        })
        .collect();
    let mut flips = Vec::new();
    for i in 1..member.len() {
        if member[i] != member[i - 1] {
            flips.push(0.5 * (line[i - 1].0 + line[i].0));
        }
    }
    flips
}

fn criterion_pt_regions(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);

    let mut worst = 0.0f64;
    for l in 1..=5 {
        for i in 0..50 {
            let p = i as f64 / 49.0;
            worst = worst.max(pt_spectrum_agreement(&FamilyParams::Cov1L { l, p })?);
            worst = worst.max(pt_spectrum_agreement(&FamilyParams::CovL1 { l, p })?);
        }
    }
    for i in 0..30 {
        for j in 0..30 {
            let (p, q) = (i as f64 / 29.0, j as f64 / 29.0);
            if p + q <= 1.0 {
                worst = worst.max(pt_spectrum_agreement(&FamilyParams::Cov22 { p, q })?);
            }
        }
    }
    checks.push("closed vs numerical PT spectra, all families", worst, 0.0, TOL.closed_form, CheckMode::UpperBound);

    let step_1l = 1.0 / 49.0;
    for l in 1..=5 {
        let threshold = 1.0 / (l + 1) as f64;
        let mut offset = 0.0f64;
        for adjoint in [false, true] {
            let line: Vec<(f64, FamilyParams)> = (0..50)
                .map(|i| i as f64 / 49.0)
                .map(|p| {
                    (p, if adjoint { FamilyParams::CovL1 { l, p } } else { FamilyParams::Cov1L { l, p } })
                })
                .collect();
            offset = offset.max(match membership_flips(&line).as_slice() {
                [flip] => (flip - threshold).abs(),
                _ => f64::INFINITY,
            });
        }
        checks.push(
            format!("membership flip at p = 1/{} (l = {l}, both directions)", l + 1),
            offset,
            0.0,
            step_1l,
            CheckMode::UpperBound,
        );
    }

    // Two lines across the qutrit region, each crossing two facets: the
    // q = 0.3 line crosses p + q = 2/3 and p = 1/2, the q = 0.6 line
    // crosses p + q = 2/3 and the simplex edge p + q = 1.
    for (q, p_max, facets) in [
        (0.3, 0.7, [("p + q = 2/3", 2.0 / 3.0 - 0.3), ("p = 1/2", 0.5)]),
        (0.6, 0.5, [("p + q = 2/3", 2.0 / 3.0 - 0.6), ("p + q = 1", 0.4)]),
    ] {
        let step = p_max / 29.0;
        let line: Vec<(f64, FamilyParams)> = (0..30)
            .map(|i| i as f64 * step)
            .map(|p| (p, FamilyParams::Cov22 { p, q }))
            .collect();
        let flips = membership_flips(&line);
        for (index, (facet, position)) in facets.into_iter().enumerate() {
            let offset = if flips.len() == 2 { (flips[index] - position).abs() } else { f64::INFINITY };
            checks.push(
                format!("membership flip across {facet} on the q = {q} line"),
                offset,
                0.0,
                step,
                CheckMode::UpperBound,
            );
        }
    }

    Ok(checks.report(3, "partial-transpose spectra and membership thresholds", started))
}

fn criterion_twirl(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let gap_full = twirl_average(1, 2, 0, 0, 100_000, &mut rng)?.frobenius_gap;
    checks.push("qubit-environment case, 1e5 samples", gap_full, 0.0, TOL.twirl_gap, CheckMode::UpperBound);

    for (i1, i2) in [(0, 2), (0, 1), (1, 1), (0, 0)] {
        let gap = twirl_average(2, 2, i1, i2, 100_000, &mut rng)?.frobenius_gap;
        checks.push(
            format!("qutrit vertex state ({i1},{i2}), 1e5 samples"),
            gap,
            0.0,
            TOL.twirl_gap,
            CheckMode::UpperBound,
        );
    }

    let gap_coarse = twirl_average(1, 2, 0, 0, 1_000, &mut rng)?.frobenius_gap;
    let gap_mid = twirl_average(1, 2, 0, 0, 10_000, &mut rng)?.frobenius_gap;
    checks.push("gap at 1e3 samples (tolerance scaled by sqrt(100))", gap_coarse, 0.0, TOL.twirl_gap * 10.0, CheckMode::UpperBound);
    checks.push("gap at 1e4 samples (tolerance scaled by sqrt(10))", gap_mid, 0.0, TOL.twirl_gap * 10.0f64.sqrt(), CheckMode::UpperBound);
    let ratio = gap_coarse / gap_full;
    checks.push("gap ratio 1e3/1e5 vs sqrt(100), lower", ratio, 10.0, 10.0 / 10.0f64.sqrt(), CheckMode::LowerBound);
    checks.push("gap ratio 1e3/1e5 vs sqrt(100), upper", ratio, 10.0, 10.0 * 10.0f64.sqrt(), CheckMode::UpperBound);

    Ok(checks.report(4, "Monte Carlo twirls converge to the separable targets", started))
}

fn diagonal_entropy(diag: &[f64]) -> Result<f64> {
    entropy_of_spectrum(diag)
}

/// Distance from `(p, q)` to the two straight minimizer tie lines.
fn tie_distance(p: f64, q: f64) -> f64 {
    (p - 0.6 * q).abs().min((p - (1.0 - 1.2 * q)).abs())
}

fn criterion_moe(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);

    let (diag0, diag1) = capacity::cov22_basis_outputs(0.5, 0.5);
    checks.push(
        "output entropy of the first basis state at (0.5, 0.5)",
        diagonal_entropy(&diag0)?,
        1.089,
        TOL.moe_reference,
        CheckMode::AbsDiff,
    );
    checks.push(
        "output entropy of the middle basis state at (0.5, 0.5)",
        diagonal_entropy(&diag1)?,
        1.055,
        TOL.moe_reference,
        CheckMode::AbsDiff,
    );
    checks.push(
        "minimum output entropy at (0.5, 0.5)",
        moe_cov22(0.5, 0.5)?.h_min,
        1.055,
        TOL.moe_reference,
        CheckMode::AbsDiff,
    );

    let mut worst_chi = 0.0f64;
    for l in 1..=5 {
        let p_star = (l + 2) as f64 / (2.0 * (l + 1) as f64);
        worst_chi = worst_chi.max(moe_cov1l(l, p_star)?.holevo.abs());
    }
    checks.push("Holevo information at the depolarizing points, l <= 5", worst_chi, 0.0, TOL.closed_form, CheckMode::UpperBound);

    let mut worst_qubit = 0.0f64;
    for l in 1..=5 {
        for i in 0..21 {
            let p = i as f64 / 20.0;
            let closed = moe_cov1l(l, p)?;
            let brute = moe_brute_force(&family_channel(&FamilyParams::Cov1L { l, p })?, 40)?;
            worst_qubit = worst_qubit.max((brute.h_min - closed.h_min).abs());
        }
    }
    checks.push("brute-force agreement, qubit-input family", worst_qubit, 0.0, TOL.moe_brute_force, CheckMode::UpperBound);

    let mut worst_qutrit = 0.0f64;
    let mut label_mismatches = 0usize;
    for i in 0..21 {
        for j in 0..21 {
            let (p, q) = (i as f64 / 20.0, j as f64 / 20.0);
            if p + q > 1.0 {
                continue;
            }
            let closed = moe_cov22(p, q)?;
            let brute = moe_brute_force(&family_channel(&FamilyParams::Cov22 { p, q })?, 40)?;
            worst_qutrit = worst_qutrit.max((brute.h_min - closed.h_min).abs());

            if tie_distance(p, q) > 1e-6 {
                let (diag0, diag1) = capacity::cov22_basis_outputs(p, q);
                let observed = if diagonal_entropy(&diag0)? <= diagonal_entropy(&diag1)? {
                    MinimizerLabel::Ket0
                } else {
                    MinimizerLabel::Ket1
                };
                if closed.minimizer_label != observed {
                    label_mismatches += 1;
                }
            }
        }
    }
    checks.push("brute-force agreement, qutrit family", worst_qutrit, 0.0, TOL.moe_brute_force, CheckMode::UpperBound);
    checks.push(
        "minimizer-label mismatches away from the tie lines",
        label_mismatches as f64,
        0.0,
        0.5,
        CheckMode::UpperBound,
    );

    Ok(checks.report(5, "minimum output entropy and Holevo information", started))
}

fn criterion_fixed_eigenvalue(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let (p, q) = (i as f64 / 9.0, j as f64 / 9.0);
            if p + q > 1.0 {
                continue;
            }
            for _ in 0..100 {
                let xi = haar_state(3, &mut rng);
                worst = worst.max(fixed_eigenvalue_check(p, q, &xi)?);
            }
        }
    }
    checks.push(
        "distance of p/2 + 3q/10 from the output spectrum, 100 states per point",
        worst,
        0.0,
        TOL.closed_form,
        CheckMode::UpperBound,
    );

    Ok(checks.report(6, "pure outputs carry the fixed eigenvalue", started))
}

fn criterion_superactivation(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);

    let report = superactivation_experiment(2, 0.1045, 100_001)?;
    checks.push("diagonal-input scan maximum at 1e5+1 grid points", report.scan.q1, 0.0, 1e-6, CheckMode::UpperBound);

    // The continuity bound at 1e5+1 points is larger than the certificate
    // target, so the certified upper bound is recomputed on a finer grid.
    let fine = coherent_info_single(2, 0.1045, 4_000_001)?;
    checks.push(
        "certified single-copy upper bound (4e6+1 grid plus continuity bound)",
        fine.q1 + fine.fannes_error_bound,
        0.0,
        1e-5,
        CheckMode::UpperBound,
    );

    checks.push("two-copy probe output entropy", report.probe_h_out, 2.0727, TOL.two_copy_entropy, CheckMode::AbsDiff);
    checks.push("two-copy probe environment entropy", report.probe_h_env, 2.0648, TOL.two_copy_entropy, CheckMode::AbsDiff);
    checks.push(
        "half the two-copy coherent information",
        report.two_copy_half_bound,
        0.0039,
        0.0039 - 1e-4,
        CheckMode::LowerBound,
    );

    Ok(checks.report(7, "almost-superactivation experiment", started))
}

/// Tie-case reports certify through a norm lower bound, every other report
/// through an exact closed-form value.
fn accumulate_witness(report: &WitnessReport, worst_diff: &mut f64, worst_tie: &mut f64) {
    if report.conclusion == Conclusion::DegradableKnown {
        return;
    }
    if report.witness_kind == WitnessKind::TieCase {
        *worst_tie = worst_tie.max(report.closed_form_value - report.witness_value);
    } else {
        *worst_diff = worst_diff.max(report.difference());
    }
}

fn criterion_witnesses(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);

    let mut worst_corner = 0.0f64;
    for l in 1..=5 {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let complementary = family_channel(&FamilyParams::Cov1L { l, p })?.complementary();
            let dim = complementary.out_dim();
            let corner = |basis: usize| -> Result<f64> {
                let out = complementary.apply(&DenseMatrix::matrix_unit(2, basis, basis))?;
                Ok(out.get(dim - 1, dim - 1).re)
            };
            worst_corner = worst_corner
                .max(corner(0)?.abs())
                .max((corner(1)? - 2.0 * p / (l + 2) as f64).abs());
        }
    }
    checks.push(
        "environment corner entries 0 and 2p/(l+2), l <= 5",
        worst_corner,
        0.0,
        TOL.witness,
        CheckMode::UpperBound,
    );

    let mut worst_1l = 0.0f64;
    let mut worst_l1 = 0.0f64;
    let mut worst_22 = 0.0f64;
    let mut worst_tie = 0.0f64;
    for l in 1..=4 {
        for i in 0..=18 {
            let p = i as f64 / 18.0;
            accumulate_witness(&degradability_witness_cov1l(l, p)?, &mut worst_1l, &mut worst_tie);
            accumulate_witness(&degradability_witness_covl1(l, p)?, &mut worst_l1, &mut worst_tie);
        }
    }
    for i in 0..=14 {
        for j in 0..=14 {
            let (p, q) = (i as f64 / 14.0, j as f64 / 14.0);
            if p + q > 1.0 {
                continue;
            }
            accumulate_witness(&degradability_witness_cov22(p, q)?, &mut worst_22, &mut worst_tie);
        }
    }
    checks.push("qubit-input witness vs closed form", worst_1l, 0.0, TOL.witness, CheckMode::UpperBound);
    checks.push("qubit-output witness vs closed form", worst_l1, 0.0, TOL.witness, CheckMode::UpperBound);
    checks.push("qutrit witness vs closed form", worst_22, 0.0, TOL.witness, CheckMode::UpperBound);
    checks.push("tie-case norms dominate their closed lower bounds", worst_tie, 0.0, TOL.witness, CheckMode::UpperBound);

    Ok(checks.report(8, "degradability witnesses match the closed forms", started))
}

fn criterion_positivity(config: &VerifyConfig) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Checks::new(config);
    const SAMPLES: usize = 1_000;
    const OUTSIDE_VIOLATION: f64 = 1e-4;

    let mut worst_identity = 0.0f64;
    for l in 1..=4 {
        worst_identity = worst_identity.max(cov1l_boundary_decomposition_defect(l)?);
    }
    let (left_vertex, right_vertex) = cov22_vertex_decomposition_defects()?;
    worst_identity = worst_identity.max(left_vertex).max(right_vertex);
    checks.push(
        "decomposition identities at the boundary and vertices",
        worst_identity,
        0.0,
        TOL.decomposability,
        CheckMode::UpperBound,
    );

    let mut min_inside = f64::INFINITY;
    for l in 1..=3 {
        let boundary = (l + 2) as f64 / (l + 1) as f64;
        for p in [0.0, 0.5, 1.0, boundary - 0.01, boundary] {
            min_inside = min_inside.min(positivity_region_cov1l(l, p, SAMPLES, config.seed)?.margin);
        }
    }
    let inside_22 = [
        (0.0, 0.0),
        (1.0, 0.0),
        (0.5, 5.0 / 6.0),
        (-1.0, 5.0 / 3.0),
        (0.3, 0.3),
        (0.0, 1.0),
        (-0.5, 1.2),
    ];
    for (p, q) in inside_22 {
        min_inside = min_inside.min(positivity_region_cov22(p, q, SAMPLES, config.seed)?.margin);
    }
    checks.push(
        "no violation inside the positivity regions",
        (-min_inside).max(0.0),
        0.0,
        TOL.psd_floor,
        CheckMode::UpperBound,
    );

    let mut min_depth = f64::INFINITY;
    for l in 1..=3 {
        for p in cov1l_outside_facet_points(l) {
            min_depth = min_depth.min(-positivity_region_cov1l(l, p, SAMPLES, config.seed)?.margin);
        }
    }
    for (p, q) in cov22_outside_facet_points() {
        min_depth = min_depth.min(-positivity_region_cov22(p, q, SAMPLES, config.seed)?.margin);
    }
    checks.push(
        "violation depth 0.05 beyond each facet",
        min_depth,
        OUTSIDE_VIOLATION,
        OUTSIDE_VIOLATION,
        CheckMode::LowerBound,
    );

    Ok(checks.report(9, "positivity and decomposability of the extended families", started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::KrausMap;

    #[test]
    fn the_detail_modes_evaluate_as_documented() {
        assert!(passes(CheckMode::AbsDiff, 1.0005, 1.0, 1e-3));
        assert!(!passes(CheckMode::AbsDiff, 1.002, 1.0, 1e-3));
        assert!(passes(CheckMode::UpperBound, 1e-12, 0.0, 1e-10));
        assert!(!passes(CheckMode::UpperBound, 1e-8, 0.0, 1e-10));
        assert!(passes(CheckMode::LowerBound, 0.5, 0.0, 0.1));
        assert!(!passes(CheckMode::LowerBound, 0.05, 0.0, 0.1));
    }

    #[test]
    fn criterion_ids_outside_the_gate_are_rejected() {
        let config = VerifyConfig::default();
        assert!(run_criterion(0, &config).is_err());
        assert!(run_criterion(10, &config).is_err());
    }

    #[test]
    fn the_action_criterion_passes_and_times_itself() {
        let report = run_criterion(1, &VerifyConfig::default()).unwrap();
        assert!(report.passed, "details: {:?}", report.details);
        assert!(!report.tolerance_induced);
        assert_eq!(report.details.len(), 3);
    }

    #[test]
    fn an_absurd_override_flags_failures_as_tolerance_induced() {
        let config = VerifyConfig { tolerance_override: Some(1e-20), seed: 17 };
        let report = run_criterion(1, &config).unwrap();
        assert!(!report.passed);
        assert!(report.tolerance_induced);
        for detail in &report.details {
            assert_eq!(detail.tolerance, 1e-20);
        }
    }

    #[test]
    fn a_tampered_kraus_operator_fails_the_covariance_check() {
        let channel = cg_channel(1, 2, 1).unwrap();
        let mut kraus: Vec<DenseMatrix> = channel.kraus().to_vec();
        let flipped = kraus[0].get(1, 0);
        kraus[0].set(1, 0, -flipped);
        let tampered = KrausMap::new(kraus).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let u = haar_su2(&mut rng);
            worst = worst.max(covariance_residual(&tampered, 1, 2, &u).unwrap());
        }
        assert!(worst > 1e-2, "sign tampering must break covariance, got {worst:.3e}");
    }
}
