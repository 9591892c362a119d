//! Benchmark-table reproduction.
//!
//! Reruns every benchmark row (four linear truth models, three nonlinear
//! ones, noise-free and noisy), writes one report per row plus a summary
//! CSV, and enforces the noise-free tolerances: the command exits nonzero
//! if any noise-free row misses its target.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use hyperfit::datasets::{add_noise, generate_truth, SamplingGrid, TruthModel};
use hyperfit::discovery::{
    linear_lasso_path, run_linear_discovery, run_nonlinear_discovery, DiscoveryReport,
    LinearMethod, NonlinearMethod, SelectionCriterion, StartPoint,
};
use hyperfit::hyperelastic::{nonlinear_objective, HyperelasticLibrary};
use hyperfit::proximal::alpha_max_general;

use crate::{nonlinear_config, BenchArgs, Cli, CliError, CliResult};

const ORDER: usize = 4;
const NOISE_SIGMA: f64 = 5.0;

/// Fraction of `alpha_max` used for the ISTA benchmarks. At this level the
/// L1 term prunes the Mooney polynomial tail while the informative features
/// survive and the selected supports admit interior unregularized minima.
const ISTA_ALPHA_FRACTION: f64 = 0.02;

/// Schedule length for the pathwise rows.
const PATHWISE_N_ALPHA: usize = 1000;

enum RowMethod {
    Cd { alpha: f64 },
    Lars { selection: SelectionCriterion<f64> },
    /// ISTA from the all-ones start at `ISTA_ALPHA_FRACTION * alpha_max`.
    Ista,
    /// Pathwise ISTA selecting the last knot with at most four terms. Used
    /// for the Mooney-Rivlin nonlinear rows, where the warm-started zero
    /// start keeps the Ogden pair inert and the refit stays well-posed; an
    /// all-ones ISTA start instead selects an Ogden support whose
    /// unregularized optimum first-order refits cannot reach in budget.
    Pathwise,
}

/// Enforced tolerance for a noise-free acceptance row.
enum Target {
    None,
    NeoHookean,
    MooneyRivlin,
    Yeoh,
    Biderman,
    Ogden,
    /// Noisy rows: term and mismatch bounds, reported but not enforced by
    /// the exit code.
    Noisy,
}

struct Row {
    name: &'static str,
    model: TruthModel,
    sigma: f64,
    method: RowMethod,
    published_mismatch: Option<f64>,
    target: Target,
}

fn rows(sigma_filter: Option<f64>) -> Vec<Row> {
    let mut out = Vec::new();
    let noise_free = sigma_filter.is_none_or(|s| s == 0.0);
    let noisy = sigma_filter.is_none_or(|s| s == NOISE_SIGMA);
    if noise_free {
        out.extend([
            Row {
                name: "neo-hookean",
                model: TruthModel::NeoHookean,
                sigma: 0.0,
                method: RowMethod::Cd { alpha: 0.01 },
                published_mismatch: Some(7.34e-33),
                target: Target::NeoHookean,
            },
            Row {
                name: "mooney-rivlin",
                model: TruthModel::MooneyRivlin,
                sigma: 0.0,
                method: RowMethod::Lars {
                    selection: SelectionCriterion::SparsityTarget(2),
                },
                published_mismatch: Some(3.76e-32),
                target: Target::MooneyRivlin,
            },
            Row {
                name: "yeoh",
                model: TruthModel::Yeoh,
                sigma: 0.0,
                method: RowMethod::Lars {
                    selection: SelectionCriterion::SparsityTarget(3),
                },
                published_mismatch: Some(3.84e-32),
                target: Target::Yeoh,
            },
            Row {
                name: "biderman",
                model: TruthModel::Biderman,
                sigma: 0.0,
                method: RowMethod::Lars {
                    selection: SelectionCriterion::SparsityTarget(3),
                },
                published_mismatch: Some(1.98e-4),
                target: Target::Biderman,
            },
            Row {
                name: "mooney-rivlin-nonlinear",
                model: TruthModel::MooneyRivlin,
                sigma: 0.0,
                method: RowMethod::Pathwise,
                published_mismatch: Some(4.28e-5),
                target: Target::None,
            },
            Row {
                name: "ogden",
                model: TruthModel::Ogden,
                sigma: 0.0,
                method: RowMethod::Ista,
                published_mismatch: Some(6.21e-7),
                target: Target::Ogden,
            },
            Row {
                name: "mixed",
                model: TruthModel::Mixed,
                sigma: 0.0,
                method: RowMethod::Ista,
                published_mismatch: Some(5.57e-5),
                target: Target::None,
            },
        ]);
    }
    if noisy {
        for (name, model) in [
            ("neo-hookean", TruthModel::NeoHookean),
            ("mooney-rivlin", TruthModel::MooneyRivlin),
            ("yeoh", TruthModel::Yeoh),
            ("biderman", TruthModel::Biderman),
        ] {
            out.push(Row {
                name,
                model,
                sigma: NOISE_SIGMA,
                method: RowMethod::Lars {
                    selection: SelectionCriterion::MismatchPlateau(0.05),
                },
                published_mismatch: None,
                target: Target::Noisy,
            });
        }
        out.push(Row {
            name: "mooney-rivlin-nonlinear",
            model: TruthModel::MooneyRivlin,
            sigma: NOISE_SIGMA,
            method: RowMethod::Pathwise,
            published_mismatch: None,
            target: Target::Noisy,
        });
        for (name, model) in [("ogden", TruthModel::Ogden), ("mixed", TruthModel::Mixed)] {
            out.push(Row {
                name,
                model,
                sigma: NOISE_SIGMA,
                method: RowMethod::Ista,
                published_mismatch: None,
                target: Target::Noisy,
            });
        }
    }
    out
}

fn run_row(row: &Row, seed: u64) -> Result<DiscoveryReport<f64>, hyperfit::Error> {
    let data = add_noise(
        &generate_truth::<f64>(row.model, &SamplingGrid::default()),
        row.sigma,
        seed,
    );
    match &row.method {
        RowMethod::Cd { alpha } => run_linear_discovery(
            &data,
            ORDER,
            &LinearMethod::Cd { alpha: *alpha },
            &SelectionCriterion::SparsityTarget(usize::MAX),
        ),
        RowMethod::Lars { selection } => {
            run_linear_discovery(&data, ORDER, &LinearMethod::LarsLasso, selection)
        }
        RowMethod::Ista => {
            let library = HyperelasticLibrary::new(ORDER, true);
            let objective = nonlinear_objective(&data, library)?;
            let alpha = ISTA_ALPHA_FRACTION * alpha_max_general(&objective);
            run_nonlinear_discovery(
                &data,
                library,
                &NonlinearMethod::Ista {
                    alpha,
                    start: StartPoint::Ones,
                },
                &SelectionCriterion::SparsityTarget(library.n_params()),
                &nonlinear_config(),
            )
        }
        RowMethod::Pathwise => {
            let library = HyperelasticLibrary::new(ORDER, true);
            run_nonlinear_discovery(
                &data,
                library,
                &NonlinearMethod::Pathwise {
                    n_alpha: PATHWISE_N_ALPHA,
                },
                &SelectionCriterion::SparsityTarget(4),
                &nonlinear_config(),
            )
        }
    }
}

/// Returns a failure description when the row misses its target.
fn verdict(row: &Row, report: &DiscoveryReport<f64>) -> Option<String> {
    let tol = 1e-12;
    let p = &report.refit.params;
    let f = report.refit.mismatch;
    match row.target {
        Target::None => None,
        Target::NeoHookean => {
            if p.n_terms(tol) != 1 {
                return Some(format!("expected 1 term, got {}", p.n_terms(tol)));
            }
            if (p.mooney[0] - 40.0).abs() > 1e-6 {
                return Some(format!("C10 = {} not within 1e-6 of 40", p.mooney[0]));
            }
            (f >= 1e-12).then(|| format!("mismatch {f:e} not below 1e-12"))
        }
        Target::MooneyRivlin => {
            if (p.mooney[0] - 40.0).abs() > 1e-6 || (p.mooney[1] - 20.0).abs() > 1e-6 {
                return Some(format!(
                    "(C10, C01) = ({}, {}) not within 1e-6 of (40, 20)",
                    p.mooney[0], p.mooney[1]
                ));
            }
            (f >= 1e-12).then(|| format!("mismatch {f:e} not below 1e-12"))
        }
        Target::Yeoh => {
            let want = [(0usize, 40.0), (2, 10.0), (5, 30.0)];
            for (i, v) in want {
                if (p.mooney[i] - v).abs() > 1e-4 {
                    return Some(format!("coefficient {i} = {} not within 1e-4 of {v}", p.mooney[i]));
                }
            }
            (f >= 1e-12).then(|| format!("mismatch {f:e} not below 1e-12"))
        }
        Target::Biderman => {
            if p.n_terms(tol) > 3 {
                return Some(format!("expected at most 3 terms, got {}", p.n_terms(tol)));
            }
            (f > 2e-4).then(|| format!("mismatch {f:e} above 2e-4"))
        }
        Target::Ogden => {
            let (d, delta) = p.ogden.unwrap_or((0.0, 0.0));
            if !(4.8..=5.2).contains(&d) || !(7.9..=8.1).contains(&delta) {
                return Some(format!("(D, delta) = ({d}, {delta}) outside [4.8,5.2]x[7.9,8.1]"));
            }
            (f >= 1e-5).then(|| format!("mismatch {f:e} not below 1e-5"))
        }
        Target::Noisy => {
            if p.n_terms(tol) > 4 {
                return Some(format!("expected at most 4 terms, got {}", p.n_terms(tol)));
            }
            (f > 0.01).then(|| format!("mismatch {f:e} above 0.01"))
        }
    }
}

/// Documents whether this sampling density reproduces the transient
/// cross-term on the noise-free Yeoh path.
fn yeoh_transient_note() -> String {
    let data = generate_truth::<f64>(TruthModel::Yeoh, &SamplingGrid::default());
    match linear_lasso_path(&data, ORDER) {
        Ok((library, path, _)) => {
            // (I1-3)(I2-3) is the C11 slot.
            let c11 = library
                .param_names()
                .iter()
                .position(|n| n == "C11")
                .unwrap();
            let entered = path.knots.iter().position(|k| k.active.contains(&c11));
            let dropped = entered.and_then(|start| {
                path.knots[start..]
                    .iter()
                    .position(|k| k.is_drop_step && !k.active.contains(&c11))
                    .map(|offset| start + offset)
            });
            match (entered, dropped) {
                (Some(e), Some(d)) => format!(
                    "yeoh sigma=0: transient (I1-3)*(I2-3) feature enters at knot {e} and drops at knot {d}, matching the published sequence"
                ),
                (Some(e), None) => format!(
                    "yeoh sigma=0: (I1-3)*(I2-3) enters at knot {e} but is not dropped at this sampling density; the terminal recovery remains the binding check"
                ),
                _ => "yeoh sigma=0: (I1-3)*(I2-3) does not appear at this sampling density; the terminal recovery remains the binding check".to_string(),
            }
        }
        Err(e) => format!("yeoh sigma=0: path computation failed: {e}"),
    }
}

pub(crate) fn cmd_bench(cli: &Cli, args: &BenchArgs) -> CliResult {
    if let Some(s) = args.sigma {
        if s != 0.0 && s != NOISE_SIGMA {
            return Err(CliError::Usage(format!(
                "--sigma must be 0 or {NOISE_SIGMA} for the benchmark table"
            )));
        }
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("bench"));
    std::fs::create_dir_all(&out_dir).map_err(hyperfit::Error::from)?;

    let mut summary = String::from("benchmark,sigma,energy,mismatch,published_mismatch\n");
    let mut notes = String::new();
    let mut failures: Vec<String> = Vec::new();

    for row in rows(args.sigma) {
        let started = Instant::now();
        let outcome = run_row(&row, cli.seed);
        let elapsed = started.elapsed();
        let published = row
            .published_mismatch
            .map(|f| format!("{f:e}"))
            .unwrap_or_default();
        match outcome {
            Ok(report) => {
                let file = out_dir.join(format!("{}_sigma{}.json", row.name, row.sigma));
                std::fs::write(&file, report.to_json()).map_err(hyperfit::Error::from)?;
                writeln!(
                    summary,
                    "{},{},\"{}\",{:e},{}",
                    row.name, row.sigma, report.energy, report.refit.mismatch, published
                )
                .unwrap();
                let status = match verdict(&row, &report) {
                    None => "ok".to_string(),
                    Some(why) => {
                        if row.sigma == 0.0 && !matches!(row.target, Target::None | Target::Noisy) {
                            failures.push(format!("{} (sigma 0): {why}", row.name));
                        }
                        writeln!(notes, "{} sigma={}: {}", row.name, row.sigma, why).unwrap();
                        format!("MISS ({why})")
                    }
                };
                println!(
                    "{:<26} sigma {:>3} | {:<60} | f = {:>9.3e} | {:>8.1?} | {status}",
                    row.name, row.sigma, report.energy, report.refit.mismatch, elapsed
                );
            }
            Err(e) => {
                writeln!(summary, "{},{},\"error: {e}\",,{published}", row.name, row.sigma).unwrap();
                writeln!(notes, "{} sigma={}: error: {e}", row.name, row.sigma).unwrap();
                println!("{:<26} sigma {:>3} | error: {e}", row.name, row.sigma);
                if row.sigma == 0.0 && !matches!(row.target, Target::None) {
                    failures.push(format!("{} (sigma 0): {e}", row.name));
                }
            }
        }
    }

    if args.sigma.is_none_or(|s| s == 0.0) {
        let note = yeoh_transient_note();
        println!("{note}");
        writeln!(notes, "{note}").unwrap();
    }

    std::fs::write(out_dir.join("summary.csv"), summary).map_err(hyperfit::Error::from)?;
    if !notes.is_empty() {
        std::fs::write(out_dir.join("notes.txt"), notes).map_err(hyperfit::Error::from)?;
    }
    println!("reports written to {}", out_dir.display());

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "noise-free benchmark rows failed: {}",
            failures.join("; ")
        )))
    }
}
