//! `eigenshape`: databases, PCA reports, model fits and optimization runs.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eigenshape::bench::{
    bench_metamodels, bench_optimizers, default_bench, opt_report, shape_database, shape_space,
    write_opt_csv, write_r2_csv, BenchConfig, CoordinateSpace, MetaMethod, Objective, Problem,
    R2Options,
};
use eigenshape::bo::{latin_hypercube, run, RunConfig};
use eigenshape::eigenbasis::{
    pca_fit, write_basis, write_spectrum, DesignSpace, PcaRoute, ShapeSpace, TruncationPolicy,
};
use eigenshape::gp::{fit_gp, FitOptions, KernelFamily};
use eigenshape::reduction::{select_active, SelectionOptions};
use eigenshape::shapes::MappingKind;
use eigenshape::{Error, Result};

#[derive(Parser)]
#[command(name = "eigenshape", version, about = "Bayesian shape optimization in a PCA eigenshape basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// circle1d, circle2d, circle3d, circle39, three-circles, rectangle,
    /// catenoid, naca3, naca22 or griewank40
    #[arg(long)]
    problem: Option<String>,
    /// chi, sdf or contour
    #[arg(long, default_value = "contour")]
    mapping: String,
    /// Database size (or sample size for model fits)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a design database and write it as CSV
    BuildDb(Common),
    /// PCA of a database: spectrum and basis files
    PcaReport(Common),
    /// Fit a GP on eigencoordinates of a Latin-hypercube sample
    FitModel {
        #[command(flatten)]
        common: Common,
        /// Number of evaluated designs
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Select active eigencoordinates from a Latin-hypercube sample
    SelectActive {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// One Bayesian-optimization run described by a TOML config
    Optimize(Common),
    /// R2 comparison of metamodels
    BenchR2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Comma-separated training sizes
        #[arg(long, default_value = "20,50,100,200")]
        sizes: String,
    },
    /// Optimization benchmark (method roster from --config or the defaults)
    BenchOpt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
    },
}

const DEFAULT_DB_SIZE: usize = 5000;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

impl Common {
    fn problem(&self) -> Result<Problem> {
        self.problem
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--problem is required".into()))?
            .parse()
    }

    fn shape_problem(&self) -> Result<eigenshape::shapes::Family> {
        let problem = self.problem()?;
        problem
            .family()
            .ok_or_else(|| Error::InvalidArgument(format!("{problem} has no shape database")))
    }

    fn mapping(&self) -> Result<MappingKind> {
        self.mapping.parse()
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn out_file(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::BuildDb(c) => {
            let family = c.shape_problem()?;
            let db = shape_database(family, c.mapping()?, c.n.unwrap_or(DEFAULT_DB_SIZE), c.seed())?;
            db.write_csv(c.out_file("database.csv")?)?;
            println!("{} designs of {family}, D = {}", db.len(), db.phi.ncols());
        }
        Command::PcaReport(c) => {
            let family = c.shape_problem()?;
            let db = shape_database(family, c.mapping()?, c.n.unwrap_or(DEFAULT_DB_SIZE), c.seed())?;
            let mut basis = pca_fit(&db.phi, PcaRoute::Auto)?;
            let l1 = basis.eigenvalues.first().copied().unwrap_or(0.0);
            let significant = basis.eigenvalues.iter().filter(|&&v| v > 1e-8 * l1).count();
            basis.truncate(family.dim(), TruncationPolicy::default())?;
            write_spectrum(c.out_file("spectrum.csv")?, &basis.eigenvalues)?;
            write_basis(c.out_file("basis.csv")?, &basis, &db.mapping)?;
            println!("{family}: {significant} significant eigenvalues, d' = {}", basis.d_prime);
        }
        Command::FitModel { common: c, samples } => {
            let (space, alphas, y) = sample_problem(&c, samples)?;
            let fit = FitOptions {
                seed: c.seed(),
                ..FitOptions::default()
            };
            let model = fit_gp(&alphas, &y, KernelFamily::Matern52, 0.0, false, &fit)?;
            fs::create_dir_all(&c.out)?;
            fs::write(c.out.join("model.json"), model.to_json()?)?;
            println!(
                "GP on {} coordinates of {} designs, log-likelihood {:.4}",
                space.coord_dim(),
                y.len(),
                model.loglik
            );
        }
        Command::SelectActive { common: c, samples } => {
            let (_, alphas, y) = sample_problem(&c, samples)?;
            let mut opts = SelectionOptions::default();
            opts.fit.seed = c.seed();
            let sel = select_active(&alphas, &y, &opts)?;
            sel.write_csv(c.out_file("selection.csv")?)?;
            let named: Vec<String> = sel.active.iter().map(|j| (j + 1).to_string()).collect();
            println!("active: {}", named.join(","));
        }
        Command::Optimize(c) => {
            let path = c
                .config
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("optimize needs --config".into()))?;
            let mut cfg = RunConfig::from_toml_str(&read_text(path)?)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
                cfg.settings.seed = s;
            }
            let problem: Problem = cfg.problem.parse()?;
            let objective = problem
                .objective()
                .ok_or_else(|| Error::InvalidArgument(format!("{problem} has no objective")))?;
            let f = |x: &[f64]| objective.eval(x);
            let (result, dims) = match problem.family() {
                Some(family) if !cfg.mapping.as_deref().is_some_and(|m| m == "design") => {
                    let mapping: MappingKind = cfg.mapping.as_deref().unwrap_or("contour").parse()?;
                    let space = shape_space(family, mapping, cfg.database_size, cfg.seed)?;
                    (run(&space, &cfg.settings, f)?, (family.dim(), space.coord_dim()))
                }
                _ => {
                    let space = problem.identity_space();
                    let d = space.coord_dim();
                    (run(&space, &cfg.settings, f)?, (d, d))
                }
            };
            result.state.write_log(c.out_file("run_log.csv")?, dims.0, dims.1)?;
            println!("best {:.6} after {} evaluations", result.best_y, result.trace.len());
        }
        Command::BenchR2 { common: c, runs, sizes } => {
            let family = c.shape_problem()?;
            let objective = Objective::for_family(family)
                .ok_or_else(|| Error::InvalidArgument(format!("{family} has no objective")))?;
            let space = shape_space(family, c.mapping()?, c.n.unwrap_or(DEFAULT_DB_SIZE), c.seed())?;
            let sizes = sizes
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad size '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let k = match family {
                eigenshape::shapes::Family::Rectangle => 2,
                _ => space.coord_dim(),
            };
            let methods = [MetaMethod::GpX, MetaMethod::GpAlpha(k), MetaMethod::GpActive, MetaMethod::AddGp];
            let opts = R2Options {
                sizes,
                runs,
                seed: c.seed(),
                ..R2Options::default()
            };
            let rows = bench_metamodels(&space, objective, &methods, &opts)?;
            write_r2_csv(c.out_file("r2.csv")?, &rows)?;
            for r in &rows {
                println!("{:<28} n={:<4} R2 {:.4} ({:.4})", r.method, r.n, r.mean(), r.sd());
            }
        }
        Command::BenchOpt { common: c, runs } => {
            let problem = c.problem()?;
            let objective = problem
                .objective()
                .ok_or_else(|| Error::InvalidArgument(format!("{problem} has no objective")))?;
            let mut bench: BenchConfig = match &c.config {
                Some(p) => BenchConfig::from_toml_str(&read_text(p)?)?,
                None => default_bench(objective),
            };
            if let Some(r) = runs {
                bench.runs = r;
            }
            let needs_shapes = bench.methods.iter().any(|m| m.space == CoordinateSpace::Eigen);
            let shape = match problem.family() {
                Some(f) if needs_shapes => Some(shape_space(f, c.mapping()?, c.n.unwrap_or(DEFAULT_DB_SIZE), c.seed())?),
                _ => None,
            };
            let outcomes = bench_optimizers(
                shape.as_ref(),
                &problem.identity_space(),
                objective,
                &bench.methods,
                bench.runs,
                c.seed(),
            )?;
            let rows = opt_report(&outcomes, &bench.targets);
            write_opt_csv(c.out_file("opt.csv")?, &rows)?;
            for r in &rows {
                println!(
                    "{:<52} best {:.4} ({:.4}) target {} {} [{}]",
                    r.method,
                    r.best_mean,
                    r.best_sd,
                    r.target.map_or("-".to_string(), |t| t.to_string()),
                    r.stat,
                    r.successes
                );
            }
        }
    }
    Ok(())
}

/// Shape space of the problem plus an evaluated Latin-hypercube sample in
/// design space, returned as coordinates and objective values.
fn sample_problem(c: &Common, samples: usize) -> Result<(ShapeSpace, Vec<Vec<f64>>, Vec<f64>)> {
    let family = c.shape_problem()?;
    let objective = Objective::for_family(family)
        .ok_or_else(|| Error::InvalidArgument(format!("{family} has no objective")))?;
    let space = shape_space(family, c.mapping()?, c.n.unwrap_or(DEFAULT_DB_SIZE), c.seed())?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let designs = latin_hypercube(samples, space.design_bounds(), &mut rng);
    let y = designs.iter().map(|x| objective.eval(x)).collect::<Result<Vec<_>>>()?;
    let alphas = designs.iter().map(|x| space.encode(x)).collect::<Result<Vec<_>>>()?;
    Ok((space, alphas, y))
}
