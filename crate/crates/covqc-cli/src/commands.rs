//! One handler per subcommand. Handlers assemble a run-config object, do the
//! numerics through the library and hand the result to [`crate::output`].

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::{Map, Value};

use covqc::capacity::{
    coherent_info_single, moe_cov1l, moe_cov22, superactivation_experiment, CoherentScanner,
    MinimizerLabel, MoeResult,
};
use covqc::channel::{ChannelDump, FamilyParams};
use covqc::ppt::{ebt_certify as lib_ebt_certify, ppt_report, twirl_average, twirl_pt_floor, EbtCertificate};
use covqc::verify::{run_all, run_criterion, CheckMode, VerifyConfig};
use covqc::witnesses::{
    degradability_witness_cov1l, degradability_witness_cov22, degradability_witness_covl1,
    positivity_region_cov1l, positivity_region_cov22, Conclusion, WitnessKind,
};

use crate::output::{emit, render_json, write_table, Display, Field, Format, Table};
use crate::{
    usage, CliError, CoherentInfoArgs, EbtCertifyArgs, FamilyArg, MoeArgs, PointArgs,
    PositivityArgs, PptRegionArgs, SuperactivationArgs, TwirlVerifyArgs, VerifyArgs,
};

fn config(command: &str, format: Format, display: &Display) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("command".to_string(), command.into());
    map.insert("format".to_string(), format.name().into());
    map.insert("units".to_string(), display.units.into());
    map
}

fn insert_usize(map: &mut Map<String, Value>, key: &str, value: usize) {
    map.insert(key.to_string(), Value::from(value as u64));
}

fn insert_f64(map: &mut Map<String, Value>, key: &str, value: f64) {
    map.insert(key.to_string(), Value::from(value));
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn check_grid(grid: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    Ok(())
}

fn require_json(format: Format, command: &str) -> Result<(), CliError> {
    if format != Format::Json {
        return Err(usage(format!("{command} emits a nested report; only --format json is supported")));
    }
    Ok(())
}

fn require_l(family: FamilyArg, l: Option<usize>) -> Result<usize, CliError> {
    match family {
        FamilyArg::Cov22 => match l {
            None | Some(2) => Ok(2),
            Some(_) => Err(usage("the qutrit family is fixed at l = 2")),
        },
        _ => l.ok_or_else(|| usage("cov1l and covl1 require --l")),
    }
}

fn one_param(family: FamilyArg, l: usize, p: f64) -> FamilyParams {
    match family {
        FamilyArg::Cov1l => FamilyParams::Cov1L { l, p },
        FamilyArg::Covl1 => FamilyParams::CovL1 { l, p },
        FamilyArg::Cov22 => unreachable!("cov22 takes two parameters"),
    }
}

fn point_params(family: FamilyArg, l: Option<usize>, p: f64, q: Option<f64>) -> Result<FamilyParams, CliError> {
    match family {
        FamilyArg::Cov1l | FamilyArg::Covl1 => {
            if q.is_some() {
                return Err(usage("--q applies only to cov22"));
            }
            Ok(one_param(family, require_l(family, l)?, p))
        }
        FamilyArg::Cov22 => {
            require_l(family, l)?;
            let q = q.ok_or_else(|| usage("cov22 requires --q"))?;
            Ok(FamilyParams::Cov22 { p, q })
        }
    }
}

fn params_config(map: &mut Map<String, Value>, params: &FamilyParams) {
    map.insert("family".to_string(), params.family_name().to_lowercase().into());
    match *params {
        FamilyParams::Cov1L { l, p } | FamilyParams::CovL1 { l, p } => {
            insert_usize(map, "l", l);
            insert_f64(map, "p", p);
        }
        FamilyParams::Cov22 { p, q } => {
            insert_f64(map, "p", p);
            insert_f64(map, "q", q);
        }
    }
}

pub fn ppt_region(args: &PptRegionArgs, display: &Display) -> Result<(), CliError> {
    check_grid(args.grid)?;
    let mut cfg = config("ppt-region", args.format, display);
    cfg.insert("family".to_string(), args.family.name().into());
    insert_usize(&mut cfg, "grid", args.grid);

    let mut table = Table::new(&["p", "q", "min_pt_eigenvalue", "member"]);
    match args.family {
        FamilyArg::Cov1l | FamilyArg::Covl1 => {
            let l = require_l(args.family, args.l)?;
            insert_usize(&mut cfg, "l", l);
            for p in linspace(0.0, 1.0, args.grid) {
                let report = ppt_report(&one_param(args.family, l, p))?;
                table.push(vec![
                    Field::Float(p),
                    Field::Empty,
                    Field::Float(report.margin),
                    Field::Text(report.closed_form_member.to_string()),
                ]);
            }
        }
        FamilyArg::Cov22 => {
            require_l(args.family, args.l)?;
            for p in linspace(0.0, 1.0, args.grid) {
                for q in linspace(0.0, 1.0, args.grid) {
                    if p + q > 1.0 + 1e-12 {
                        continue;
                    }
                    let report = ppt_report(&FamilyParams::Cov22 { p, q })?;
                    table.push(vec![
                        Field::Float(p),
                        Field::Float(q),
                        Field::Float(report.margin),
                        Field::Text(report.closed_form_member.to_string()),
                    ]);
                }
            }
        }
    }
    Ok(write_table(&table, &Value::Object(cfg), args.format, args.out.as_deref())?)
}

pub fn ebt_certify(args: &EbtCertifyArgs, display: &Display) -> Result<(), CliError> {
    require_json(args.format, "ebt-certify")?;
    let params = point_params(args.family, args.l, args.p, args.q)?;
    let mut cfg = config("ebt-certify", args.format, display);
    params_config(&mut cfg, &params);
    insert_usize(&mut cfg, "samples", args.samples);
    cfg.insert("seed".to_string(), Value::from(args.seed));

    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let certificate = lib_ebt_certify(&params, args.samples, &mut rng)?;
    let report = certificate.report();

    let mut root = Map::new();
    root.insert("config".to_string(), Value::Object(cfg));
    root.insert("closed_form_member".to_string(), Value::from(report.closed_form_member));
    insert_f64(&mut root, "min_pt_eigenvalue", report.margin);
    match &certificate {
        EbtCertificate::Member { decomposition, decomposition_defect, .. } => {
            root.insert("kind".to_string(), "member".into());
            insert_f64(&mut root, "decomposition_defect", *decomposition_defect);
            let mut points = Vec::new();
            for piece in decomposition {
                let mut entry = Map::new();
                insert_f64(&mut entry, "weight", piece.weight);
                params_config(&mut entry, &piece.params);
                let mut twirl = Map::new();
                insert_usize(&mut twirl, "m", piece.twirl.m);
                insert_usize(&mut twirl, "l", piece.twirl.l);
                insert_usize(&mut twirl, "i1", piece.twirl.i1);
                insert_usize(&mut twirl, "i2", piece.twirl.i2);
                insert_usize(&mut twirl, "samples", piece.twirl.sample_count);
                insert_f64(&mut twirl, "frobenius_gap", piece.twirl.frobenius_gap);
                insert_f64(&mut twirl, "empirical_pt_min", twirl_pt_floor(&piece.twirl)?);
                entry.insert("twirl".to_string(), Value::Object(twirl));
                points.push(Value::Object(entry));
            }
            root.insert("extreme_points".to_string(), Value::Array(points));
        }
        EbtCertificate::NonMember { .. } => {
            root.insert("kind".to_string(), "non_member".into());
        }
    }
    Ok(emit(args.out.as_deref(), &render_json(&Value::Object(root)))?)
}

fn label_name(label: MinimizerLabel) -> &'static str {
    match label {
        MinimizerLabel::Ket0 => "ket0",
        MinimizerLabel::Ket1 => "ket1",
        MinimizerLabel::Custom => "custom",
    }
}

pub fn moe(args: &MoeArgs, display: &Display, holevo_only: bool) -> Result<(), CliError> {
    let command = if holevo_only { "holevo" } else { "moe" };
    let mut cfg = config(command, args.format, display);
    cfg.insert("family".to_string(), args.family.name().into());

    let columns: &'static [&'static str] = if holevo_only {
        &["p", "q", "holevo"]
    } else {
        &["p", "q", "h_min", "holevo", "minimizer"]
    };
    let mut table = Table::new(columns);
    let push_row = |table: &mut Table, p: f64, q: Option<f64>, result: &MoeResult| {
        let mut row = vec![Field::Float(p), q.map_or(Field::Empty, Field::Float)];
        if !holevo_only {
            row.push(Field::Float(display.entropy(result.h_min)));
        }
        row.push(Field::Float(display.entropy(result.holevo)));
        if !holevo_only {
            row.push(Field::Text(label_name(result.minimizer_label).to_string()));
        }
        table.push(row);
    };

    match args.family {
        FamilyArg::Cov1l => {
            let l = require_l(args.family, args.l)?;
            insert_usize(&mut cfg, "l", l);
            if args.q.is_some() {
                return Err(usage("--q applies only to cov22"));
            }
            if let Some(p) = args.p {
                insert_f64(&mut cfg, "p", p);
                push_row(&mut table, p, None, &moe_cov1l(l, p)?);
            } else {
                let grid = args.grid.unwrap_or(101);
                check_grid(grid)?;
                insert_usize(&mut cfg, "grid", grid);
                for p in linspace(0.0, 1.0, grid) {
                    push_row(&mut table, p, None, &moe_cov1l(l, p)?);
                }
            }
        }
        FamilyArg::Cov22 => {
            require_l(args.family, args.l)?;
            match (args.p, args.q) {
                (Some(p), Some(q)) => {
                    insert_f64(&mut cfg, "p", p);
                    insert_f64(&mut cfg, "q", q);
                    push_row(&mut table, p, Some(q), &moe_cov22(p, q)?);
                }
                (None, None) => {
                    let grid = args.grid.unwrap_or(41);
                    check_grid(grid)?;
                    insert_usize(&mut cfg, "grid", grid);
                    for p in linspace(0.0, 1.0, grid) {
                        for q in linspace(0.0, 1.0, grid) {
                            if p + q > 1.0 + 1e-12 {
                                continue;
                            }
                            push_row(&mut table, p, Some(q), &moe_cov22(p, q)?);
                        }
                    }
                }
                _ => return Err(usage("cov22 takes --p and --q together, or neither for a sweep")),
            }
        }
        FamilyArg::Covl1 => {
            return Err(usage("output-entropy rules cover cov1l and cov22"));
        }
    }
    Ok(write_table(&table, &Value::Object(cfg), args.format, args.out.as_deref())?)
}

fn scan_table(scanner: &CoherentScanner, grid: usize, display: &Display) -> Result<Table, CliError> {
    let mut table = Table::new(&["lambda", "h_out", "h_env", "coherent_info"]);
    for lambda in linspace(0.0, 1.0, grid) {
        let (h_out, h_env) = scanner.point(lambda)?;
        table.push(vec![
            Field::Float(lambda),
            Field::Float(display.entropy(h_out)),
            Field::Float(display.entropy(h_env)),
            Field::Float(display.entropy(h_out - h_env)),
        ]);
    }
    Ok(table)
}

pub fn coherent_info(args: &CoherentInfoArgs, display: &Display) -> Result<(), CliError> {
    check_grid(args.grid)?;
    let mut cfg = config("coherent-info", args.format, display);
    insert_usize(&mut cfg, "l", args.l);
    insert_f64(&mut cfg, "p", args.p);
    insert_usize(&mut cfg, "grid", args.grid);

    match args.format {
        Format::Csv => {
            let scanner = CoherentScanner::new(args.l, args.p)?;
            let table = scan_table(&scanner, args.grid, display)?;
            Ok(write_table(&table, &Value::Object(cfg), args.format, args.out.as_deref())?)
        }
        Format::Json => {
            let result = coherent_info_single(args.l, args.p, args.grid)?;
            let mut root = Map::new();
            root.insert("config".to_string(), Value::Object(cfg));
            insert_f64(&mut root, "q1", display.entropy(result.q1));
            insert_f64(&mut root, "argmax_lambda", result.argmax_lambda);
            insert_f64(&mut root, "grid_resolution", result.grid_resolution);
            insert_f64(&mut root, "fannes_error_bound", display.entropy(result.fannes_error_bound));
            Ok(emit(args.out.as_deref(), &render_json(&Value::Object(root)))?)
        }
    }
}

pub fn superactivation(args: &SuperactivationArgs, display: &Display) -> Result<(), CliError> {
    require_json(args.format, "superactivation")?;
    check_grid(args.grid)?;
    let mut cfg = config("superactivation", args.format, display);
    insert_usize(&mut cfg, "l", args.l);
    insert_f64(&mut cfg, "p", args.p);
    insert_usize(&mut cfg, "grid", args.grid);

    let mut scan_cfg = cfg.clone();
    scan_cfg.insert("artifact".to_string(), "lambda_scan".into());
    scan_cfg.insert("format".to_string(), "csv".into());

    let report = superactivation_experiment(args.l, args.p, args.grid)?;
    let mut root = Map::new();
    root.insert("config".to_string(), Value::Object(cfg));
    insert_f64(&mut root, "q1_scan_max", display.entropy(report.scan.q1));
    insert_f64(&mut root, "argmax_lambda", report.scan.argmax_lambda);
    insert_f64(&mut root, "fannes_bound", display.entropy(report.fannes_bound));
    insert_f64(&mut root, "q1_upper_via_scan", display.entropy(report.q1_upper_via_scan));
    insert_f64(&mut root, "probe_h_out", display.entropy(report.probe_h_out));
    insert_f64(&mut root, "probe_h_env", display.entropy(report.probe_h_env));
    insert_f64(&mut root, "two_copy_half_bound_probe", display.entropy(report.two_copy_half_bound_probe));
    insert_f64(&mut root, "two_copy_half_bound", display.entropy(report.two_copy_half_bound));
    insert_f64(&mut root, "gap", display.entropy(report.gap));
    emit(args.out.as_deref(), &render_json(&Value::Object(root)))?;

    if let Some(out) = &args.out {
        let scanner = CoherentScanner::new(args.l, args.p)?;
        let table = scan_table(&scanner, args.grid, display)?;
        let scan_path = out.with_extension("scan.csv");
        write_table(&table, &Value::Object(scan_cfg), Format::Csv, Some(Path::new(&scan_path)))?;
    }
    Ok(())
}

fn kind_name(kind: WitnessKind) -> &'static str {
    match kind {
        WitnessKind::Cov1lEntry => "cov1l_entry",
        WitnessKind::Covl1Entry => "covl1_entry",
        WitnessKind::Cov22M => "cov22_m_entry",
        WitnessKind::Cov22N => "cov22_n_entry",
        WitnessKind::TieCase => "tie_norm",
    }
}

fn conclusion_name(conclusion: Conclusion) -> &'static str {
    match conclusion {
        Conclusion::NotDegradable => "not_degradable",
        Conclusion::DegradableKnown => "degradable",
        Conclusion::Inconclusive => "inconclusive",
    }
}

pub fn degradability(args: &PointArgs, display: &Display) -> Result<(), CliError> {
    require_json(args.format, "degradability")?;
    let params = point_params(args.family, args.l, args.p, args.q)?;
    let mut cfg = config("degradability", args.format, display);
    params_config(&mut cfg, &params);

    let report = match params {
        FamilyParams::Cov1L { l, p } => degradability_witness_cov1l(l, p)?,
        FamilyParams::CovL1 { l, p } => degradability_witness_covl1(l, p)?,
        FamilyParams::Cov22 { p, q } => degradability_witness_cov22(p, q)?,
    };

    let mut root = Map::new();
    root.insert("config".to_string(), Value::Object(cfg));
    root.insert("witness_kind".to_string(), kind_name(report.witness_kind).into());
    insert_f64(&mut root, "witness_value", report.witness_value);
    insert_f64(&mut root, "closed_form_value", report.closed_form_value);
    insert_f64(&mut root, "difference", report.difference());
    root.insert("conclusion".to_string(), conclusion_name(report.conclusion).into());
    Ok(emit(args.out.as_deref(), &render_json(&Value::Object(root)))?)
}

pub fn positivity(args: &PositivityArgs, display: &Display) -> Result<(), CliError> {
    let mut cfg = config("positivity", args.format, display);
    cfg.insert("family".to_string(), args.family.name().into());
    insert_usize(&mut cfg, "samples", args.samples);
    cfg.insert("seed".to_string(), Value::from(args.seed));

    let mut table = Table::new(&["p", "q", "min_output_eigenvalue", "member"]);
    let push_row = |table: &mut Table, p: f64, q: Option<f64>, margin: f64, member: bool| {
        table.push(vec![
            Field::Float(p),
            q.map_or(Field::Empty, Field::Float),
            Field::Float(margin),
            Field::Text(member.to_string()),
        ]);
    };

    match args.family {
        FamilyArg::Cov1l => {
            let l = require_l(args.family, args.l)?;
            insert_usize(&mut cfg, "l", l);
            if args.q.is_some() {
                return Err(usage("--q applies only to cov22"));
            }
            if let Some(p) = args.p {
                insert_f64(&mut cfg, "p", p);
                let report = positivity_region_cov1l(l, p, args.samples, args.seed)?;
                push_row(&mut table, p, None, report.margin, report.closed_form_member);
            } else {
                check_grid(args.grid)?;
                insert_usize(&mut cfg, "grid", args.grid);
                let upper = (l + 2) as f64 / (l + 1) as f64 + 0.25;
                for p in linspace(-0.25, upper, args.grid) {
                    let report = positivity_region_cov1l(l, p, args.samples, args.seed)?;
                    push_row(&mut table, p, None, report.margin, report.closed_form_member);
                }
            }
        }
        FamilyArg::Cov22 => {
            require_l(args.family, args.l)?;
            match (args.p, args.q) {
                (Some(p), Some(q)) => {
                    insert_f64(&mut cfg, "p", p);
                    insert_f64(&mut cfg, "q", q);
                    let report = positivity_region_cov22(p, q, args.samples, args.seed)?;
                    push_row(&mut table, p, Some(q), report.margin, report.closed_form_member);
                }
                (None, None) => {
                    check_grid(args.grid)?;
                    insert_usize(&mut cfg, "grid", args.grid);
                    for p in linspace(-1.25, 1.25, args.grid) {
                        for q in linspace(-0.25, 1.75, args.grid) {
                            let report = positivity_region_cov22(p, q, args.samples, args.seed)?;
                            push_row(&mut table, p, Some(q), report.margin, report.closed_form_member);
                        }
                    }
                }
                _ => return Err(usage("cov22 takes --p and --q together, or neither for a sweep")),
            }
        }
        FamilyArg::Covl1 => {
            return Err(usage("positivity regions cover cov1l and cov22"));
        }
    }
    Ok(write_table(&table, &Value::Object(cfg), args.format, args.out.as_deref())?)
}

pub fn twirl_verify(args: &TwirlVerifyArgs, display: &Display) -> Result<(), CliError> {
    let mut cfg = config("twirl-verify", args.format, display);
    cfg.insert("family".to_string(), args.family.name().into());
    insert_usize(&mut cfg, "samples", args.samples);
    cfg.insert("seed".to_string(), Value::from(args.seed));

    // The extreme points of each family's PPT region, as (m, l, i1, i2)
    // twirl cases whose averaged product states build the vertex Choi matrix.
    let cases: Vec<(usize, usize, usize, usize)> = match args.family {
        FamilyArg::Cov1l => {
            let l = require_l(args.family, args.l)?;
            insert_usize(&mut cfg, "l", l);
            vec![(1, l, 0, 0), (1, l, 1, 0)]
        }
        FamilyArg::Covl1 => {
            let l = require_l(args.family, args.l)?;
            insert_usize(&mut cfg, "l", l);
            vec![(l, 1, l, 1), (l, 1, l, 0)]
        }
        FamilyArg::Cov22 => {
            require_l(args.family, args.l)?;
            vec![(2, 2, 0, 2), (2, 2, 0, 1), (2, 2, 1, 1), (2, 2, 0, 0)]
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut table = Table::new(&["m", "l", "i1", "i2", "samples", "frobenius_gap", "empirical_pt_min"]);
    for (m, l, i1, i2) in cases {
        let cert = twirl_average(m, l, i1, i2, args.samples, &mut rng)?;
        let floor = twirl_pt_floor(&cert)?;
        table.push(vec![
            Field::Int(m as i64),
            Field::Int(l as i64),
            Field::Int(i1 as i64),
            Field::Int(i2 as i64),
            Field::Int(args.samples as i64),
            Field::Float(cert.frobenius_gap),
            Field::Float(floor),
        ]);
    }
    Ok(write_table(&table, &Value::Object(cfg), args.format, args.out.as_deref())?)
}

pub fn kraus_dump(args: &PointArgs, display: &Display) -> Result<(), CliError> {
    require_json(args.format, "kraus-dump")?;
    let params = point_params(args.family, args.l, args.p, args.q)?;
    let mut cfg = config("kraus-dump", args.format, display);
    params_config(&mut cfg, &params);

    let dump = ChannelDump::new(&params)?;
    let mut root = Map::new();
    root.insert("config".to_string(), Value::Object(cfg));
    root.insert("channel".to_string(), serde_json::to_value(&dump).expect("dump serializes"));
    Ok(emit(args.out.as_deref(), &render_json(&Value::Object(root)))?)
}

fn mode_name(mode: CheckMode) -> &'static str {
    match mode {
        CheckMode::AbsDiff => "abs_diff",
        CheckMode::UpperBound => "upper_bound",
        CheckMode::LowerBound => "lower_bound",
    }
}

pub fn verify(args: &VerifyArgs, display: &Display) -> Result<bool, CliError> {
    require_json(args.format, "verify")?;
    let mut cfg = config("verify", args.format, display);
    cfg.insert("seed".to_string(), Value::from(args.seed));
    if let Some(tolerance) = args.tolerance {
        insert_f64(&mut cfg, "tolerance", tolerance);
    }
    if let Some(criterion) = args.criterion {
        insert_usize(&mut cfg, "criterion", criterion);
    }

    let verify_config = VerifyConfig { tolerance_override: args.tolerance, seed: args.seed };
    let reports = match args.criterion {
        Some(id) => vec![run_criterion(id, &verify_config)?],
        None => run_all(&verify_config)?,
    };
    for report in &reports {
        eprintln!(
            "criterion {} ({}): {}",
            report.id,
            report.name,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    let passed = reports.iter().all(|r| r.passed);

    let criteria: Vec<Value> = reports
        .iter()
        .map(|report| {
            let checks: Vec<Value> = report
                .details
                .iter()
                .map(|detail| {
                    let mut check = Map::new();
                    check.insert("name".to_string(), detail.name.as_str().into());
                    insert_f64(&mut check, "computed", detail.computed);
                    insert_f64(&mut check, "expected", detail.expected);
                    insert_f64(&mut check, "tolerance", detail.tolerance);
                    check.insert("mode".to_string(), mode_name(detail.mode).into());
                    check.insert("pass".to_string(), Value::from(detail.pass));
                    Value::Object(check)
                })
                .collect();
            let mut entry = Map::new();
            insert_usize(&mut entry, "id", report.id);
            entry.insert("name".to_string(), report.name.into());
            entry.insert("passed".to_string(), Value::from(report.passed));
            entry.insert("tolerance_induced".to_string(), Value::from(report.tolerance_induced));
            entry.insert("checks".to_string(), Value::Array(checks));
            Value::Object(entry)
        })
        .collect();

    let mut root = Map::new();
    root.insert("config".to_string(), Value::Object(cfg));
    root.insert("passed".to_string(), Value::from(passed));
    root.insert("criteria".to_string(), Value::Array(criteria));
    emit(args.out.as_deref(), &render_json(&Value::Object(root)))?;
    Ok(passed)
}
