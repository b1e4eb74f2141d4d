use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anisojump::audit::{build_ledger, oracle_fuzz, FuzzConfig};
use anisojump::jump::{FormulaVariant, RelationPath, STATE_COMPONENTS};
use anisojump::manufactured::{builtin_case, curve_samples, ManufacturedCase, BUILTIN_CASES};
use anisojump::solver::{convergence_study, solve_case, AssemblyOptions, SolverOptions};
use anisojump::tensor::rotate_to_local;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::svg::{LogLogPlot, Series};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] anisojump::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(anisojump::Error::Solver { .. }) => 1,
            _ => 2,
        }
    }
}

pub const CONSTANT_TOLERANCE: f64 = 1e-8;
pub const VARIABLE_TOLERANCE: f64 = 1e-7;

/// Result of a command: the text shown to the user and whether verification passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub passed: bool,
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    use crate::config::Command::*;
    match cfg.command {
        VerifyRelations => verify_relations(cfg),
        RotateTensor => rotate_tensor(cfg),
        Convergence => convergence(cfg),
        OracleFuzz => fuzz(cfg),
    }
}

fn variant(cfg: &RunConfig) -> FormulaVariant {
    if cfg.strict_paper {
        FormulaVariant::as_published()
    } else {
        FormulaVariant::corrected()
    }
}

fn cases_or(cfg: &RunConfig, defaults: &[&str]) -> Vec<ManufacturedCase> {
    cfg.cases.clone().unwrap_or_else(|| {
        defaults
            .iter()
            .map(|n| builtin_case(n).expect("registry names resolve"))
            .collect()
    })
}

#[derive(Serialize)]
struct VerifyRow {
    t: f64,
    x: f64,
    y: f64,
    path: &'static str,
    max_closed_form: f64,
    max_oracle: f64,
    dev_u: f64,
    dev_u_xi: f64,
    dev_u_eta: f64,
    dev_u_xixi: f64,
    dev_u_xieta: f64,
    dev_u_etaeta: f64,
}

fn verify_relations(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let defaults: Vec<&str> = BUILTIN_CASES
        .iter()
        .copied()
        .filter(|n| *n != "no-interface")
        .collect();
    let cases = cases_or(cfg, &defaults);
    create_dir(&cfg.out)?;
    let variant = variant(cfg);
    let mut report = String::new();
    let mut passed = true;
    for case in &cases {
        let mut rows = Vec::with_capacity(cfg.points);
        let mut closed_max = [0.0f64; 6];
        let mut oracle_max = 0.0f64;
        let mut path = RelationPath::Constant;
        for t in curve_samples(&case.curve, cfg.points) {
            let r = case.verify_theorem_at(t, variant)?;
            path = r.path;
            for (m, d) in closed_max.iter_mut().zip(r.closed_form) {
                *m = m.max(d);
            }
            let oracle = r.oracle.iter().fold(0.0f64, |m, d| m.max(*d));
            oracle_max = oracle_max.max(oracle);
            let c = r.closed_form;
            rows.push(VerifyRow {
                t,
                x: r.point.x,
                y: r.point.y,
                path: r.path.name(),
                max_closed_form: c.iter().fold(0.0f64, |m, d| m.max(*d)),
                max_oracle: oracle,
                dev_u: c[0],
                dev_u_xi: c[1],
                dev_u_eta: c[2],
                dev_u_xixi: c[3],
                dev_u_xieta: c[4],
                dev_u_etaeta: c[5],
            });
        }
        write_csv(&cfg.out.join(format!("verify_{}.csv", case.name)), &rows)?;
        let tolerance = match path {
            RelationPath::Constant => CONSTANT_TOLERANCE,
            RelationPath::Variable => VARIABLE_TOLERANCE,
        };
        let max = closed_max.iter().fold(oracle_max, |m, d| m.max(*d));
        let ok = max < tolerance;
        passed &= ok;
        let _ = writeln!(
            report,
            "{} verify-relations case={} path={} points={} max_residual={:.3e} tolerance={:e}",
            if ok { "PASS" } else { "FAIL" },
            case.name,
            path.name(),
            cfg.points,
            max,
            tolerance
        );
        for (i, d) in closed_max.iter().enumerate() {
            if *d >= tolerance {
                let _ = writeln!(
                    report,
                    "  diverges from oracle: {} max_rel_dev={:.3e}",
                    STATE_COMPONENTS[i], d
                );
            }
        }
        if oracle_max >= tolerance {
            let _ = writeln!(report, "  primitive solve residual {:.3e}", oracle_max);
        }
    }
    write_text(&cfg.out.join("verify_summary.txt"), &report)?;
    Ok(Outcome { report, passed })
}

fn rotate_tensor(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = cfg.tensor.expect("validated in RunConfig::resolve");
    let local =
        rotate_to_local(&a, cfg.theta).map_err(|e| ConfigError::Invalid(format!("tensor: {e}")))?;
    let e = local.entries();
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    let det_dev = rel(e.det(), a.det());
    let trace_dev = rel(e.trace(), a.trace());
    let spd = e.is_spd();
    let mut report = String::new();
    let _ = writeln!(report, "theta = {}", cfg.theta);
    let _ = writeln!(report, "a11 = {:.15e}", e.a11);
    let _ = writeln!(report, "a12 = {:.15e}", e.a12);
    let _ = writeln!(report, "a22 = {:.15e}", e.a22);
    let ok_det = det_dev < 1e-12;
    let ok_trace = trace_dev < 1e-12;
    let _ = writeln!(
        report,
        "det preserved: {} (relative deviation {:.3e})",
        ok_det, det_dev
    );
    let _ = writeln!(
        report,
        "trace preserved: {} (relative deviation {:.3e})",
        ok_trace, trace_dev
    );
    let _ = writeln!(report, "spd: {spd}");
    Ok(Outcome {
        report,
        passed: ok_det && ok_trace && spd,
    })
}

#[derive(Serialize)]
struct ConvergenceCsvRow {
    n: usize,
    h: f64,
    max_err: f64,
    l2_err: f64,
    order: Option<f64>,
}

#[derive(Serialize)]
struct SolutionRow {
    x: f64,
    y: f64,
    u: f64,
    error: f64,
}

fn convergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cases = cases_or(cfg, &["scalar-benchmark", "anisotropic-benchmark"]);
    create_dir(&cfg.out)?;
    let opts = SolverOptions {
        assembly: AssemblyOptions {
            corrections: cfg.corrections,
            relations: variant(cfg),
        },
        ..Default::default()
    };
    let mut report = String::new();
    for case in &cases {
        let table = convergence_study(case, &cfg.n, &opts)?;
        let rows: Vec<ConvergenceCsvRow> = table
            .rows
            .iter()
            .map(|r| ConvergenceCsvRow {
                n: r.n,
                h: r.h,
                max_err: r.max_err,
                l2_err: r.l2_err,
                order: r.order,
            })
            .collect();
        write_csv(
            &cfg.out.join(format!("convergence_{}.csv", case.name)),
            &rows,
        )?;

        let finest = *cfg.n.last().expect("validated non-empty");
        let sol = solve_case(case, finest, &opts)?;
        let nodes: Vec<SolutionRow> = sol
            .node_errors(case)
            .into_iter()
            .map(|e| SolutionRow {
                x: e.x,
                y: e.y,
                u: e.u,
                error: e.error,
            })
            .collect();
        write_csv(
            &cfg.out
                .join(format!("solution_{}_n{}.csv", case.name, finest)),
            &nodes,
        )?;

        let slope = table.fitted_slope();
        let plot = LogLogPlot {
            title: format!(
                "{} ({})",
                case.name,
                if cfg.corrections {
                    "corrected"
                } else {
                    "no corrections"
                }
            ),
            x_label: "h".into(),
            y_label: "error".into(),
            series: vec![
                Series {
                    label: "max error".into(),
                    points: table.rows.iter().map(|r| (r.h, r.max_err)).collect(),
                },
                Series {
                    label: "L2 error".into(),
                    points: table.rows.iter().map(|r| (r.h, r.l2_err)).collect(),
                },
            ],
            annotation: slope.map(|s| format!("fitted slope = {s:.2}")),
        };
        write_text(
            &cfg.out.join(format!("convergence_{}.svg", case.name)),
            &plot.render(),
        )?;

        let _ = writeln!(report, "convergence case={}", case.name);
        let _ = writeln!(
            report,
            "{:>6} {:>12} {:>12} {:>12} {:>8}",
            "n", "h", "max_err", "l2_err", "order"
        );
        for r in &table.rows {
            let order = r
                .order
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                report,
                "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>8}",
                r.n, r.h, r.max_err, r.l2_err, order
            );
        }
        if let Some(s) = slope {
            let _ = writeln!(report, "fitted slope = {s:.3}");
        }
    }
    Ok(Outcome {
        report,
        passed: true,
    })
}

fn fuzz(cfg: &RunConfig) -> Result<Outcome, CliError> {
    create_dir(&cfg.out)?;
    let fuzz_cfg = FuzzConfig {
        draws: cfg.draws,
        seed: cfg.seed,
        variant: variant(cfg),
    };
    let report = oracle_fuzz(&fuzz_cfg)?;
    let text = report.render();
    write_text(&cfg.out.join("fuzz_report.txt"), &text)?;
    if cfg.strict_paper {
        let ledger = build_ledger(cfg.draws, cfg.seed)?;
        write_text(&cfg.out.join("relation_ledger.toml"), &ledger.to_toml())?;
    }
    Ok(Outcome {
        report: text,
        passed: report.passed(),
    })
}
