//! Command-line front end: parses instance files, dispatches to the
//! solvers, and emits human-readable reports, JSON, and CSV sweeps.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 optimizer non-convergence (the value is still reported).

use crate::bound::{maximize_bound, BoundLadder, OptimizerOptions};
use crate::channel::TestChannel;
use crate::linalg::SpdMatrix;
use crate::problem::{group_weights, parse_instance_json, LoadedInstance, WeightProfile};
use crate::scalar::{kkt_residual, solve, ScalarInstance, Scenario};
use crate::verify;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "mdregion",
    version,
    about = "Rate-region bounds for Gaussian multiple descriptions with \
             individual and central receivers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the weighted-sum-rate lower bound over auxiliary ladders.
    Bound(BoundArgs),
    /// Evaluate a test channel (explicit or solver-built) against the
    /// instance's distortion constraints.
    Achieve(CommonArgs),
    /// Solve a one-dimensional instance exactly and report the scenario.
    SolveScalar(CommonArgs),
    /// Sweep supporting-hyperplane weights over a simplex grid (CSV).
    Region(RegionArgs),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of random optimizer starts.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Relative convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Evaluation budget per start.
    #[arg(long, default_value_t = 20_000)]
    max_evals: usize,
    /// Random seed for the optimizer starts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of weight steps per description (grid resolution).
    #[arg(long, default_value_t = 11)]
    resolution: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A command failure: the exit code and a message for standard error.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn convergence(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

/// Rendered command output plus its destination and exit code.
struct Rendered {
    text: String,
    out: Option<PathBuf>,
    code: i32,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bound(a) => cmd_bound(&a),
        Command::Achieve(a) => cmd_achieve(&a),
        Command::SolveScalar(a) => cmd_solve_scalar(&a),
        Command::Region(a) => cmd_region(&a),
        Command::Verify(a) => Ok(cmd_verify(&a)),
    };
    match outcome {
        Ok(r) => {
            if let Some(path) = &r.out {
                if let Err(e) = std::fs::write(path, &r.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            } else {
                print!("{}", r.text);
            }
            r.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<(LoadedInstance, WeightProfile<f64>), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let loaded = parse_instance_json(&text).map_err(|e| Failure::input(e.to_string()))?;
    let profile = group_weights(&loaded.beta).map_err(|e| Failure::input(e.to_string()))?;
    Ok((loaded, profile))
}

fn mat_rows(m: &SpdMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|r| (0..m.dim()).map(|c| m.get(r, c)).collect())
        .collect()
}

fn rate_unit(bits: bool) -> f64 {
    if bits {
        std::f64::consts::LN_2
    } else {
        1.0
    }
}

fn cmd_bound(args: &BoundArgs) -> Result<Rendered, Failure> {
    let (loaded, profile) = load(&args.common.instance)?;
    let opts = OptimizerOptions {
        starts: args.starts,
        rel_tol: args.rel_tol,
        max_evals: args.max_evals,
        seed: args.seed,
        ..OptimizerOptions::default()
    };
    let res = maximize_bound(&loaded.instance, &profile, &opts)
        .map_err(|e| Failure::input(e.to_string()))?;
    let unit = rate_unit(args.common.bits);
    let value_key = if args.common.bits {
        "bound_value_bits"
    } else {
        "bound_value_nats"
    };
    let ladder = match &res.ladder {
        BoundLadder::Attained(l) => json!(l.covs().iter().map(mat_rows).collect::<Vec<_>>()),
        BoundLadder::VanishingLimit => json!("limit (ε→0)"),
    };
    let report = json!({
        value_key: res.value / unit,
        "ladder": ladder,
        "converged": res.converged,
        "evaluations": res.evaluations,
    });
    Ok(Rendered {
        text: format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
        out: args.common.out.clone(),
        code: if res.converged { 0 } else { 3 },
    })
}

fn cmd_solve_scalar(args: &CommonArgs) -> Result<Rendered, Failure> {
    let (loaded, profile) = load(&args.instance)?;
    let inst = &loaded.instance;
    if inst.dim() != 1 {
        return Err(Failure::input(format!(
            "instance has dimension {}; solve-scalar handles dimension 1 — use the bound command",
            inst.dim()
        )));
    }
    let scalar =
        ScalarInstance::from_problem(inst, &profile).map_err(|e| Failure::input(e.to_string()))?;
    let sol = solve(&scalar, &profile).map_err(|e| Failure::convergence(e.to_string()))?;
    let unit = rate_unit(args.bits);
    let rates: Vec<f64> = profile
        .to_original_order(sol.rates.rates())
        .into_iter()
        .map(|r| r / unit)
        .collect();
    let kkt = if profile.group_count() >= 2 {
        Some(
            kkt_residual(&scalar, &profile, &sol.ladder)
                .map_err(|e| Failure::input(e.to_string()))?,
        )
    } else {
        None
    };
    let mut report = json!({
        "scenario": sol.scenario.label(),
        "sigma2": sol.ladder.sigma2,
        "uk": sol.ladder.uk,
        "lambda": sol.ladder.lambda,
        "rates": rates,
        "value": sol.value / unit,
        "kkt_residual": kkt,
    });
    if sol.scenario == Scenario::Enhanced {
        let last = inst.descriptions() - 1;
        let map = report.as_object_mut().unwrap();
        map.insert(
            "k_enhanced".to_string(),
            json!(sol.channel.noise(last).get(0, 0)),
        );
        map.insert(
            "enhanced_description".to_string(),
            json!(profile.permutation()[last]),
        );
    }
    Ok(Rendered {
        text: format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
        out: args.out.clone(),
        code: 0,
    })
}

fn cmd_achieve(args: &CommonArgs) -> Result<Rendered, Failure> {
    let (loaded, profile) = load(&args.instance)?;
    let inst = &loaded.instance;
    let l = inst.descriptions();
    let n = inst.dim();

    let (channel, channel_source) = match (&loaded.channel_noise, &loaded.channel_corr) {
        (Some(noise_orig), corr) => {
            // channel matrices arrive in original description order
            let noise: Vec<SpdMatrix<f64>> = profile
                .permutation()
                .iter()
                .map(|&orig| noise_orig[orig].clone())
                .collect();
            let corr = match corr {
                Some(c) => c.clone(),
                None => vec![SpdMatrix::zeros(n); profile.group_count()],
            };
            let ch = TestChannel::new(noise, corr, profile.clone())
                .map_err(|e| Failure::input(e.to_string()))?;
            (ch, "provided")
        }
        (None, Some(_)) => {
            return Err(Failure::input(
                "channel correlations (A) require noise covariances (K)",
            ))
        }
        (None, None) => {
            if n != 1 {
                return Err(Failure::input(
                    "vector instances need explicit channel matrices (K, optionally A)",
                ));
            }
            let scalar = ScalarInstance::from_problem(inst, &profile)
                .map_err(|e| Failure::input(e.to_string()))?;
            let sol =
                solve(&scalar, &profile).map_err(|e| Failure::convergence(e.to_string()))?;
            (sol.channel, "solver")
        }
    };

    let kx = inst.source_cov();
    let tol_of = |m: &SpdMatrix<f64>| 1e-9 * (1.0 + m.as_matrix().max_abs());
    let mut side = Vec::with_capacity(l);
    let mut side_ok = Vec::with_capacity(l);
    let mut pos_of = vec![0usize; l];
    for (pos, &orig) in profile.permutation().iter().enumerate() {
        pos_of[orig] = pos;
    }
    for orig in 0..l {
        let d = channel
            .received_distortion(kx, &[pos_of[orig]])
            .map_err(|e| Failure::input(e.to_string()))?;
        let ceiling = inst.side_distortion(orig);
        let ok = ceiling
            .sub(&d)
            .map(|diff| diff.min_eigenvalue() >= -tol_of(ceiling))
            .unwrap_or(false);
        side.push(d);
        side_ok.push(ok);
    }
    let all: Vec<usize> = (0..l).collect();
    let central = channel
        .received_distortion(kx, &all)
        .map_err(|e| Failure::input(e.to_string()))?;
    let central_ok = inst
        .central_distortion()
        .sub(&central)
        .map(|diff| diff.min_eigenvalue() >= -tol_of(inst.central_distortion()))
        .unwrap_or(false);

    let rates_sorted = channel
        .vertex_rates(kx)
        .map_err(|e| Failure::input(e.to_string()))?;
    let weighted = profile
        .weighted_sum(rates_sorted.rates())
        .map_err(|e| Failure::input(e.to_string()))?;
    let residual = channel
        .fixedpoint_residual()
        .map_err(|e| Failure::input(e.to_string()))?;
    let unit = rate_unit(args.bits);
    let rates: Vec<f64> = profile
        .to_original_order(rates_sorted.rates())
        .into_iter()
        .map(|r| r / unit)
        .collect();

    let report = json!({
        "channel": channel_source,
        "achieved_side_distortions": side.iter().map(mat_rows).collect::<Vec<_>>(),
        "side_feasible": side_ok,
        "achieved_central_distortion": mat_rows(&central),
        "central_feasible": central_ok,
        "rates": rates,
        "weighted_sum": weighted / unit,
        "fixedpoint_residual": residual,
    });
    Ok(Rendered {
        text: format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
        out: args.out.clone(),
        code: 0,
    })
}

/// All length-`parts` integer vectors with entries ≥ 1 summing to `total`,
/// in ascending lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, parts_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts_left == 1 {
            cur.push(remaining);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 1..=remaining - (parts_left - 1) {
            cur.push(v);
            rec(remaining - v, parts_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if total >= parts && parts >= 1 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

fn cmd_region(args: &RegionArgs) -> Result<Rendered, Failure> {
    if args.resolution < 2 {
        return Err(Failure::input(format!(
            "resolution must be at least 2, got {}",
            args.resolution
        )));
    }
    let (loaded, _) = load(&args.common.instance)?;
    let inst = &loaded.instance;
    if inst.dim() != 1 {
        return Err(Failure::input(format!(
            "instance has dimension {}; region sweeps handle dimension 1",
            inst.dim()
        )));
    }
    let l = inst.descriptions();
    let unit = rate_unit(args.common.bits);

    let mut csv = String::new();
    for i in 1..=l {
        csv.push_str(&format!("beta_{i},"));
    }
    csv.push_str("value,");
    for i in 1..=l {
        csv.push_str(&format!("R_{i},"));
    }
    csv.push_str("scenario\n");

    let total = args.resolution + l - 1;
    let mut values = Vec::new();
    for c in compositions(total, l) {
        let beta: Vec<f64> = c.iter().map(|&x| x as f64 * l as f64 / total as f64).collect();
        let profile = group_weights(&beta).map_err(|e| Failure::input(e.to_string()))?;
        let scalar = ScalarInstance::from_problem(inst, &profile)
            .map_err(|e| Failure::input(e.to_string()))?;
        let sol = solve(&scalar, &profile).map_err(|e| Failure::convergence(e.to_string()))?;
        let rates = profile.to_original_order(sol.rates.rates());
        for b in &beta {
            csv.push_str(&format!("{b},"));
        }
        csv.push_str(&format!("{},", sol.value / unit));
        for r in &rates {
            csv.push_str(&format!("{},", r / unit));
        }
        csv.push_str(sol.scenario.label());
        csv.push('\n');
        values.push(sol.value);
    }

    // diagnostic only: along a two-description sweep the optimal value is
    // expected to be concave in the weights
    if l == 2 {
        for w in values.windows(3) {
            if w[1] * 2.0 < w[0] + w[2] - 1e-9 {
                eprintln!("note: value sequence is not concave along the weight sweep");
                break;
            }
        }
    }

    Ok(Rendered {
        text: csv,
        out: args.common.out.clone(),
        code: 0,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Rendered {
    let outcomes = verify::run_all(args.seed);
    let mut text = format!("verification suites (seed {})\n", args.seed);
    let mut all_ok = true;
    for o in &outcomes {
        text.push_str(&o.describe());
        text.push('\n');
        all_ok &= o.passed();
    }
    text.push_str(if all_ok {
        "result: all suites passed\n"
    } else {
        "result: FAILED\n"
    });
    Rendered {
        text,
        out: None,
        code: if all_ok { 0 } else { 1 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_cover_the_simplex_grid() {
        let cs = compositions(12, 2);
        assert_eq!(cs.len(), 11);
        assert_eq!(cs.first().unwrap(), &vec![1, 11]);
        assert_eq!(cs.last().unwrap(), &vec![11, 1]);
        assert!(cs.contains(&vec![6, 6]));
        for w in cs.windows(2) {
            assert!(w[0] < w[1], "not lexicographically ascending");
        }

        let cs3 = compositions(6, 3);
        assert_eq!(cs3.len(), 10);
        assert!(cs3.iter().all(|c| c.iter().sum::<usize>() == 6));
        assert!(cs3.iter().all(|c| c.iter().all(|&x| x >= 1)));
    }

    #[test]
    fn composition_weights_normalize() {
        let total = 12;
        for c in compositions(total, 3) {
            let beta: Vec<f64> = c.iter().map(|&x| x as f64 * 3.0 / total as f64).collect();
            let sum: f64 = beta.iter().sum();
            assert!((sum - 3.0).abs() < 1e-12);
            assert!(beta.iter().all(|&b| b > 0.0));
        }
    }
}
