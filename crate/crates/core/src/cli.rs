//! `stcdm` command-line front end.
//!
//! Every subcommand works on a scenario document (the bundled full-scale setup
//! unless `--scenario` is given) and writes its results under `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::codeopt::{optimize_code, OptimizeOptions, SolverSettings};
use crate::error::{Error, Result};
use crate::experiments::{
    paper_scenario, reproduce, run_monte_carlo_with_code, ReproduceOptions, Scenario,
};
use crate::fim::{assemble_fim, crb, ParamSelection};
use crate::imaging::mf_image;
use crate::io::{read_json, read_snapshot, real_matrix_to_csv, write_json, write_snapshot};
use crate::model::{synthesize, CodeMatrix, TargetScene};
use crate::relax::{AngleDopplerGrid, RelaxEstimator, RelaxResult};
use crate::sequences::CodeFamily;

#[derive(Debug, Parser)]
#[command(name = "stcdm", version, about = "Slow-time code-division MIMO radar toolkit")]
pub struct Cli {
    /// Scenario document; defaults to the bundled full-scale setup.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Master seed, overriding the scenario's.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "STCDM_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
    /// Monte-Carlo trials per SNR.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Comma-separated SNR list in dB.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Option<Vec<f64>>,
    /// Grid sizes as `LthetaxLomega`, e.g. `1024x512`.
    #[arg(long, global = true, value_parser = parse_grids)]
    pub grids: Option<AngleDopplerGrid>,
    /// Worker threads for Monte-Carlo trials and dense algebra.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Random,
    ZadoffChu,
    PSequence,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SelectionArg {
    All,
    AngleDoppler,
}

impl From<SelectionArg> for ParamSelection {
    fn from(s: SelectionArg) -> Self {
        match s {
            SelectionArg::All => ParamSelection::All,
            SelectionArg::AngleDoppler => ParamSelection::AngleDoppler,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a code matrix for the scenario's array to code.json.
    Codegen {
        /// Defaults to the scenario's code family.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
    },
    /// Synthesize a snapshot to snapshot.csv.
    Simulate {
        #[arg(long)]
        code: Option<PathBuf>,
        /// Override the scene SNR in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
    },
    /// CRB diagonal and trace of the scenario to crb.json.
    Crb {
        #[arg(long)]
        code: Option<PathBuf>,
        /// Also write the full CRB to crb_matrix.csv.
        #[arg(long)]
        full_matrix: bool,
        #[arg(long, value_enum, default_value = "all")]
        selection: SelectionArg,
    },
    /// Optimize the slow-time code for an anchor scene.
    OptimizeCode {
        /// Anchor scene document; defaults to the scenario's true targets.
        #[arg(long)]
        anchor: Option<PathBuf>,
        /// Initial code; defaults to the scenario's family.
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        selection: SelectionArg,
        /// Print solver progress.
        #[arg(long)]
        trace: bool,
    },
    /// RELAX estimation on a snapshot to relax.json.
    Relax {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        code: Option<PathBuf>,
        /// Known model order instead of BIC selection.
        #[arg(long)]
        fixed_order: Option<usize>,
        /// Print the cost after every sweep.
        #[arg(long)]
        trace: bool,
    },
    /// Matched-filter image to image.csv and image.json.
    Image {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        code: Option<PathBuf>,
    },
    /// Monte-Carlo RMSE and RCRB curves to mc.csv and mc.json.
    Mc {
        #[arg(long)]
        code: Option<PathBuf>,
    },
    /// End-to-end workflow: images, anchor fit, optimized code and curves.
    Reproduce {
        #[arg(long, value_enum, default_value = "angle-doppler")]
        selection: SelectionArg,
        #[arg(long)]
        trace: bool,
    },
}

fn parse_grids(s: &str) -> std::result::Result<AngleDopplerGrid, String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected LthetaxLomega, got '{s}'"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("angle bins: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("doppler bins: {e}"))?;
    Ok(AngleDopplerGrid::new(a, b))
}

impl Cli {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => paper_scenario(),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(t) = self.trials {
            s.trials = t;
        }
        if let Some(snr) = &self.snr {
            s.snr_db = snr.clone();
        }
        if let Some(g) = self.grids {
            let mut e = s.estimator();
            e.grid = g;
            s.estimator = Some(e);
        }
        s.validate()?;
        Ok(s)
    }
}

fn load_code(path: &Option<PathBuf>, scn: &Scenario) -> Result<CodeMatrix> {
    let code = match path {
        Some(p) => read_json::<CodeMatrix>(p)?,
        None => scn.generate_code()?,
    };
    code.check_dims(&scn.array)?;
    Ok(code)
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn print_sweeps(r: &RelaxResult) {
    let mut costs = r.residual_norms.iter();
    for (i, &sweeps) in r.sweeps_per_order.iter().enumerate() {
        for (s, c) in costs.by_ref().take(sweeps).enumerate() {
            eprintln!("order {} sweep {}: cost {c:.6e}", i + 1, s + 1);
        }
        eprintln!("order {}: bic {:.6e}", i + 1, r.bic[i + 1]);
    }
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let scn = cli.scenario()?;
    let cfg = &scn.array;
    let out = &cli.out;
    match &cli.command {
        Command::Codegen { family } => {
            let fam = match family {
                None => scn.code.clone(),
                Some(FamilyArg::Random) => CodeFamily::Random { seed: scn.seed },
                Some(FamilyArg::ZadoffChu) => CodeFamily::ZadoffChu { roots: None },
                Some(FamilyArg::PSequence) => CodeFamily::PSequence { shifts: None },
            };
            let code = fam.generate(cfg.tx_count, cfg.pri_count)?;
            write_json(out_file(out, "code.json")?, &code)?;
        }
        Command::Simulate { code, snr_db } => {
            let c = load_code(code, &scn)?;
            let scene = match snr_db {
                Some(s) => scn.scene.with_snr(*s)?,
                None => scn.scene.clone(),
            };
            let x = synthesize(&scene, &c, cfg, scn.seed)?;
            write_snapshot(out_file(out, "snapshot.csv")?, &x)?;
        }
        Command::Crb {
            code,
            full_matrix,
            selection,
        } => {
            let c = load_code(code, &scn)?;
            let f = assemble_fim(&scn.scene, &c, cfg)?;
            let bound = crb(&f)?;
            let idx = ParamSelection::from(*selection).indices(scn.scene.len());
            let doc = serde_json::json!({
                "target_count": scn.scene.len(),
                "noise_power": scn.scene.noise_power,
                "selection": ParamSelection::from(*selection),
                "trace": bound.trace(&idx),
                "diagonal": bound.diagonal(),
                "condition": bound.condition,
            });
            write_json(out_file(out, "crb.json")?, &doc)?;
            if *full_matrix {
                fs::write(out_file(out, "crb_matrix.csv")?, real_matrix_to_csv(&bound.entries))?;
            }
        }
        Command::OptimizeCode {
            anchor,
            code,
            selection,
            trace,
        } => {
            let anchor: TargetScene = match anchor {
                Some(p) => read_json(p)?,
                None => scn.scene.clone(),
            };
            let initial = load_code(code, &scn)?;
            let opts = OptimizeOptions {
                selection: (*selection).into(),
                rounding_seed: scn.seed,
                solver: SolverSettings {
                    verbose: *trace,
                    ..SolverSettings::default()
                },
                ..OptimizeOptions::default()
            };
            let (optimized, report) = optimize_code(&anchor, cfg, &initial, &opts)?;
            if report.fallback_failed {
                eprintln!("warning: no extracted code beat the initial code; initial code kept");
            }
            write_json(out_file(out, "optimized_code.json")?, &optimized)?;
            write_json(out_file(out, "optimize_report.json")?, &report)?;
        }
        Command::Relax {
            snapshot,
            code,
            fixed_order,
            trace,
        } => {
            let c = load_code(code, &scn)?;
            let x = read_snapshot(snapshot)?;
            let est = RelaxEstimator::new(&c, cfg, &scn.estimator())?;
            if !est.uses_fft() {
                eprintln!("notice: virtual array is not uniform; grid evaluated directly");
            }
            let r = match fixed_order {
                Some(k) => est.estimate_order(&x, *k)?,
                None => est.estimate(&x)?,
            };
            if *trace {
                print_sweeps(&r);
            }
            if r.hit_sweep_cap {
                eprintln!("warning: sweep cap reached before convergence");
            }
            write_json(out_file(out, "relax.json")?, &r)?;
        }
        Command::Image { snapshot, code } => {
            let c = load_code(code, &scn)?;
            let x = read_snapshot(snapshot)?;
            let img = mf_image(&x, &c, cfg, scn.estimator().grid)?;
            fs::write(out_file(out, "image.csv")?, real_matrix_to_csv(&img.values))?;
            write_json(out_file(out, "image.json")?, &img)?;
        }
        Command::Mc { code } => {
            let c = load_code(code, &scn)?;
            let label = if code.is_some() { "external" } else { scn.code.label() };
            let r = run_monte_carlo_with_code(&scn, &c, label)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("monte carlo finished in {:.1} s", r.wall_clock_seconds);
            fs::write(out_file(out, "mc.csv")?, r.to_csv())?;
            write_json(out_file(out, "mc.json")?, &r)?;
        }
        Command::Reproduce { selection, trace } => {
            let mut opts = ReproduceOptions::new(out);
            opts.optimize.selection = (*selection).into();
            opts.optimize.rounding_seed = scn.seed;
            opts.optimize.solver.verbose = *trace;
            opts.initial_code_seed = scn.seed;
            let s = reproduce(&scn, &opts)?;
            eprintln!(
                "target {}: RCRB gain vs Zadoff-Chu {:.2} dB (angle), {:.2} dB (Doppler)",
                scn.target_of_interest + 1,
                s.improvement_vs_zadoff_chu.theta_db,
                s.improvement_vs_zadoff_chu.omega_db
            );
        }
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
                _ => 1,
            }
        }
    }
}
