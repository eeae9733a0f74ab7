use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use qsvm_core::feature_map::DEFAULT_REPS;
use qsvm_core::pipeline::{run_experiment_with, GammaRule, KernelEvent, Preprocessor};
use qsvm_core::{gram_matrix, Dataset, ExperimentConfig, FeatureMapFamily, FeatureMapSpec, ModelKind};

use crate::features::{load_feature_csv, write_matrix_csv, EXPECTED_WIDTH};
use crate::report::{write_report, ResolvedConfig, RunMetadata, RunReport};

#[derive(Debug, Parser)]
#[command(name = "qsvm", version, about = "Quantum fidelity-kernel SVM experiments on deep-feature CSVs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the cross-validated experiment grid and write a report.
    Run(RunArgs),
    /// Write one fidelity Gram matrix over the whole dataset as CSV.
    Kernel(KernelArgs),
    /// Load a feature CSV and check it without training anything.
    Validate(InputArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Feature CSV with header `id,label,f0,...`.
    #[arg(long, default_value = "features.csv")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// PCA component counts.
    #[arg(long, value_delimiter = ',', default_value = "3,6,9")]
    pub pca: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "svm,rf,qsvm")]
    pub models: Vec<ModelKind>,
    /// Feature maps for qsvm: z, zz, paulix.
    #[arg(long = "map", alias = "maps", value_delimiter = ',', default_value = "zz,z,paulix")]
    pub maps: Vec<FeatureMapFamily>,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    /// SVM regularisation constant, shared by the RBF SVM and QSVM.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    /// RBF gamma: `scale` or a positive number.
    #[arg(long, default_value = "scale")]
    pub gamma: GammaRule,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    #[arg(long, default_value_t = 5)]
    pub k_folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report directory.
    #[arg(long, env = "QSVM_OUTPUT_DIR", default_value = "results")]
    pub output: PathBuf,
    /// Also write every fold's train kernel matrix under `<output>/kernels`.
    #[arg(long)]
    pub dump_kernels: bool,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "map", default_value = "z")]
    pub map: FeatureMapFamily,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 3)]
    pub pca: usize,
    /// Output CSV; defaults to `<output dir>/kernel_<map>_pca<k>.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QSVM_OUTPUT_DIR", default_value = "results")]
    pub output_dir: PathBuf,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn load(path: &Path) -> anyhow::Result<Dataset> {
    let ds = load_feature_csv(path).with_context(|| format!("loading {}", path.display()))?;
    log::info!("loaded {} samples x {} features from {}", ds.len(), ds.n_features(), path.display());
    Ok(ds)
}

pub fn run(args: RunArgs) -> anyhow::Result<RunReport> {
    let experiment = ExperimentConfig {
        pca_components: args.pca,
        models: args.models,
        maps: args.maps,
        reps: args.reps,
        c: args.c,
        gamma: args.gamma,
        n_trees: args.n_trees,
        k_folds: args.k_folds,
        seed: args.seed,
    };
    experiment.validate()?;
    let config = ResolvedConfig {
        input: args.input.input.clone(),
        output_dir: args.output.clone(),
        dump_kernels: args.dump_kernels,
        experiment,
    };
    let dataset = load(&config.input)?;
    let started = unix_now();

    let kernel_dir = config.output_dir.join("kernels");
    let mut dump_error: Option<std::io::Error> = None;
    let mut observer = |e: KernelEvent<'_>| {
        if !config.dump_kernels || dump_error.is_some() {
            return;
        }
        let name = format!("fold{}_pca{}_{}_train.csv", e.fold, e.pca_components, e.variant);
        let res = std::fs::create_dir_all(&kernel_dir)
            .and_then(|_| write_matrix_csv(&kernel_dir.join(name), &e.train.values));
        if let Err(err) = res {
            dump_error = Some(err);
        }
    };
    let report = run_experiment_with(&dataset, &config.experiment, &mut observer)?;
    if let Some(err) = dump_error {
        return Err(err).context("writing kernel dumps");
    }
    let run = RunReport {
        metadata: RunMetadata {
            seed: config.experiment.seed,
            config_hash: config.hash(),
            started_unix: started,
            finished_unix: unix_now(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        config,
        report,
    };
    let written = write_report(&run.config.output_dir, &run).context("writing report")?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(run)
}

pub fn kernel(args: KernelArgs) -> anyhow::Result<PathBuf> {
    let spec = FeatureMapSpec::new(args.map, args.pca, args.reps)?;
    let dataset = load(&args.input.input)?;
    let prep = Preprocessor::fit(&dataset.features, args.pca)?;
    let x = prep.transform(&dataset.features)?;
    let rows: Vec<&[f64]> = x.iter_rows().collect();
    let k = gram_matrix(&spec, &rows, None)?;
    let path = args.output.unwrap_or_else(|| args.output_dir.join(format!("kernel_{}_pca{}.csv", args.map, args.pca)));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_matrix_csv(&path, &k.values).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} ({}x{}, max asymmetry {:.2e}, max diagonal deviation {:.2e})",
        path.display(),
        k.rows(),
        k.cols(),
        k.max_asymmetry(),
        k.max_diagonal_deviation()
    );
    Ok(path)
}

pub fn validate(args: InputArgs) -> anyhow::Result<Dataset> {
    let dataset = load(&args.input)?;
    let [healthy, sick] = dataset.class_counts();
    println!(
        "{}: {} samples ({} healthy, {} nonhealthy), {} features",
        args.input.display(),
        dataset.len(),
        healthy,
        sick,
        dataset.n_features()
    );
    if dataset.n_features() != EXPECTED_WIDTH {
        println!("warning: expected {EXPECTED_WIDTH} features per row");
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = dataset.ids.iter().find(|id| !seen.insert(id.as_str())) {
        bail!("duplicate sample id `{dup}`");
    }
    dataset.validate()?;
    println!("ok");
    Ok(dataset)
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|_| ()),
        Command::Kernel(a) => kernel(a).map(|_| ()),
        Command::Validate(a) => validate(a).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
