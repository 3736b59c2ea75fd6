use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use treeshape::geometry_checks::{
    cat0_probe, genericity_probe, metric_axiom_suite, ordering_suite, AxiomMetric, AxiomReport, Verdict,
};
use treeshape::io::{self, synth, SynthSpec};
use treeshape::labels::LabelConstraint;
use treeshape::metric::{self, Metric};
use treeshape::qed::QedConfig;
use treeshape::statistics::{self, Dataset, DEFAULT_MAX_ITER};
use treeshape::tree_model::{TreeShape, DEFAULT_DEPTH};
use treeshape::Error;

const THREADS_VAR: &str = "TREESHAPE_THREADS";

#[derive(Parser)]
#[command(name = "treeshape", version, about = "Distances, geodesics and prototypes of tree-like shapes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, value_enum, default_value_t = MetricName::Qed)]
    metric: MetricName,
    /// Maximum number of Euclidean stretches (QED).
    #[arg(long = "K", global = true, default_value_t = 2)]
    k: usize,
    /// Maximum vertex degree at transitions (QED).
    #[arg(long = "D", global = true, default_value_t = 3)]
    d: usize,
    /// Minimize over sibling orderings.
    #[arg(long, global = true)]
    unordered: bool,
    /// File listing labels that must be matched to themselves, one per line.
    #[arg(long, global = true)]
    label_constraint: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Convergence tolerance; defaults to 1e-6 times the data diameter.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Depth of the maximal binary tree.
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Keep QED paths inside the maximal tree, truncating intermediate trees.
    #[arg(long, global = true)]
    bounded: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Ted,
    Qed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Axioms,
    Cat0,
    Genericity,
    Ordering,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic trees into the output directory.
    Gen {
        #[arg(long = "tree-depth", default_value_t = 3)]
        tree_depth: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        landmarks: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Probability of dropping each terminal bifurcation.
        #[arg(long, default_value_t = 0.0)]
        drop: f64,
        #[arg(long, default_value_t = 0.8)]
        branching: f64,
        /// Share one template tree, varied by this relative jitter.
        #[arg(long)]
        jitter: Option<f64>,
    },
    /// Distance between two tree files.
    Dist { a: PathBuf, b: PathBuf },
    /// Pairwise distance matrix of a directory of tree files, as CSV.
    Matrix {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Geodesic between two trees, written as frames.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 11)]
        frames: usize,
    },
    /// Edge correspondence along the geodesic, as CSV.
    Match { a: PathBuf, b: PathBuf },
    /// Fréchet mean of a directory of trees.
    Mean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Recursive centroid of a directory of trees.
    Centroid {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Circumcenter of a directory of trees.
    Circumcenter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Run a property suite on seeded random shapes.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ComplexityGuard(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn non_converged(what: &str) -> Failure {
    Failure { code: 4, message: format!("{what} did not converge; best iterate written") }
}

struct Ctx {
    metric: Metric,
    ordered: bool,
    labels: Option<LabelConstraint>,
    g: Global,
}

impl Ctx {
    fn new(g: Global) -> Result<Self, Failure> {
        let cfg = QedConfig {
            k: g.k,
            degree: g.d,
            capacity: g.bounded.then_some(g.depth),
            depth: g.depth,
            ..QedConfig::default()
        };
        cfg.validate()?;
        let metric = match g.metric {
            MetricName::Ted => Metric::Ted,
            MetricName::Qed => Metric::Qed(cfg),
        };
        let labels = match &g.label_constraint {
            Some(p) => Some(LabelConstraint::parse(&fs::read_to_string(p)?)),
            None => None,
        };
        Ok(Ctx { metric, ordered: !g.unordered, labels, g })
    }

    fn out_dir(&self) -> Result<&Path, Failure> {
        self.g
            .out
            .as_deref()
            .ok_or_else(|| Failure { code: 2, message: "--out <dir> is required".into() })
    }

    /// Writes `text` to `--out`, or to stdout without it.
    fn emit(&self, text: &str) -> Outcome {
        match &self.g.out {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn dataset(&self, dir: &Path) -> Result<Dataset, Failure> {
        let shapes: Vec<TreeShape> = io::read_dir(dir)?.into_iter().map(|(_, s)| s).collect();
        Ok(Dataset::new(shapes, self.metric)?.unordered(!self.ordered).with_labels(self.labels.clone()))
    }

    fn prototype_out(&self) -> Result<(PathBuf, PathBuf), Failure> {
        let out = self
            .g
            .out
            .clone()
            .ok_or_else(|| Failure { code: 2, message: "--out <file> is required".into() })?;
        let mut report = out.clone().into_os_string();
        report.push(".report.json");
        Ok((out, report.into()))
    }
}

#[derive(Serialize)]
struct PathSummary {
    metric: &'static str,
    distance: f64,
    stretch_lengths: Vec<f64>,
    transition_fractions: Vec<f64>,
    maximal_tree_depth: usize,
    exceeds_capacity: bool,
    truncated: bool,
}

#[derive(Serialize)]
struct PrototypeReport {
    method: &'static str,
    metric: &'static str,
    shapes: usize,
    iterations: usize,
    converged: bool,
    objective: Option<f64>,
    radius: Option<f64>,
    spread: Option<f64>,
    trace: Vec<f64>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx::new(cli.global)?;
    let labels = ctx.labels.as_ref();
    match cli.command {
        Command::Gen { tree_depth, dim, landmarks, count, drop, branching, jitter } => {
            let spec = SynthSpec {
                depth: tree_depth,
                dim,
                landmarks,
                count,
                drop,
                branching,
                template_jitter: jitter,
                seed: ctx.g.seed,
            };
            let shapes = io::generate_synthetic(&spec)?;
            let dir = ctx.out_dir()?;
            fs::create_dir_all(dir)?;
            let width = count.saturating_sub(1).to_string().len().max(3);
            for (i, s) in shapes.iter().enumerate() {
                io::write_tree(&dir.join(format!("tree_{i:0width$}.json")), s)?;
            }
        }
        Command::Dist { a, b } => {
            let (a, b) = (io::read_tree(&a)?, io::read_tree(&b)?);
            let d = metric::distance(&ctx.metric, &a, &b, ctx.ordered, labels)?;
            ctx.emit(&format!("{d}\n"))?;
        }
        Command::Matrix { input } => {
            let files = io::read_dir(&input)?;
            let names: Vec<String> = files
                .iter()
                .map(|(p, _)| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
                .collect();
            let shapes: Vec<TreeShape> = files.into_iter().map(|(_, s)| s).collect();
            let m = io::distance_matrix(&shapes, &ctx.metric, ctx.ordered, labels)?;
            let mut buf = Vec::new();
            io::write_matrix_csv(&mut buf, &names, &m)?;
            ctx.emit(&String::from_utf8_lossy(&buf))?;
        }
        Command::Geodesic { a, b, frames } => {
            let (a, b) = (io::read_tree(&a)?, io::read_tree(&b)?);
            let g = metric::geodesic(&ctx.metric, &a, &b, ctx.ordered, labels)?;
            let (d, path) = (g.distance, g.path);
            let dir = ctx.out_dir()?;
            io::export_frames(&path, frames, dir)?;
            let summary = PathSummary {
                metric: ctx.metric.name(),
                distance: d,
                stretch_lengths: path.stretch_lengths().to_vec(),
                transition_fractions: path.transition_fractions(),
                maximal_tree_depth: path.maximal_tree().depth(),
                exceeds_capacity: path.exceeds_capacity(),
                truncated: path.truncated(),
            };
            fs::write(dir.join("path.json"), to_json(&summary))?;
        }
        Command::Match { a, b } => {
            let (a, b) = (io::read_tree(&a)?, io::read_tree(&b)?);
            let g = metric::geodesic(&ctx.metric, &a, &b, ctx.ordered, labels)?;
            let mut buf = Vec::new();
            io::write_matching_csv(&mut buf, &g.path.edge_matching(), &g.source, &g.target)?;
            ctx.emit(&String::from_utf8_lossy(&buf))?;
        }
        Command::Mean { input, max_iter } => {
            let ds = ctx.dataset(&input)?;
            let r = statistics::frechet_mean(&ds, max_iter, ctx.g.tol)?;
            let (out, report) = ctx.prototype_out()?;
            io::write_tree(&out, &r.shape)?;
            let rep = PrototypeReport {
                method: "frechet_mean",
                metric: ctx.metric.name(),
                shapes: ds.len(),
                iterations: r.iterations,
                converged: r.converged,
                objective: Some(r.objective),
                radius: None,
                spread: None,
                trace: r.trace,
            };
            fs::write(report, to_json(&rep))?;
            if !r.converged {
                return Err(non_converged("mean"));
            }
        }
        Command::Centroid { input, max_iter } => {
            let ds = ctx.dataset(&input)?;
            let r = statistics::centroid(&ds, max_iter, ctx.g.tol, ctx.g.seed)?;
            let (out, report) = ctx.prototype_out()?;
            io::write_tree(&out, &r.shape)?;
            let rep = PrototypeReport {
                method: "centroid",
                metric: ctx.metric.name(),
                shapes: ds.len(),
                iterations: r.iterations,
                converged: r.converged,
                objective: None,
                radius: None,
                spread: Some(r.spread),
                trace: vec![],
            };
            fs::write(report, to_json(&rep))?;
            if !r.converged {
                return Err(non_converged("centroid"));
            }
        }
        Command::Circumcenter { input, max_iter } => {
            let ds = ctx.dataset(&input)?;
            let r = statistics::circumcenter(&ds, max_iter, ctx.g.tol)?;
            let (out, report) = ctx.prototype_out()?;
            io::write_tree(&out, &r.shape)?;
            let rep = PrototypeReport {
                method: "circumcenter",
                metric: ctx.metric.name(),
                shapes: ds.len(),
                iterations: r.iterations,
                converged: r.converged,
                objective: None,
                radius: Some(r.radius),
                spread: None,
                trace: vec![],
            };
            fs::write(report, to_json(&rep))?;
            if !r.converged {
                return Err(non_converged("circumcenter"));
            }
        }
        Command::Check { suite, trials } => {
            let rows = check(&ctx, suite, trials)?;
            let mut text = String::new();
            for (k, v) in &rows {
                text.push_str(&format!("{k}: {v}\n"));
            }
            print!("{text}");
            if let Some(p) = &ctx.g.out {
                let mut w = csv::Writer::from_path(p).map_err(|e| Failure { code: 2, message: e.to_string() })?;
                let err = |e: csv::Error| Failure { code: 2, message: e.to_string() };
                w.write_record(["key", "value"]).map_err(err)?;
                for (k, v) in &rows {
                    w.write_record([k, v]).map_err(err)?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn planar_sampler(rng: &mut ChaCha8Rng) -> TreeShape {
    let spec = SynthSpec { depth: 3, landmarks: 3, ..SynthSpec::default() };
    synth::sample_shape(&spec, rng).expect("valid synthetic spec")
}

fn axiom_rows(name: &str, r: &AxiomReport, rows: &mut Vec<(String, String)>) {
    rows.push((format!("{name}.symmetry_violations"), r.symmetry_violations.to_string()));
    rows.push((format!("{name}.identity_violations"), r.identity_violations.to_string()));
    rows.push((format!("{name}.triangle_violations"), r.triangle_violations.to_string()));
    rows.push((format!("{name}.worst_triangle"), r.worst_triangle.to_string()));
}

fn check(ctx: &Ctx, suite: Suite, trials: usize) -> Result<Vec<(String, String)>, Failure> {
    let seed = ctx.g.seed;
    let tol = ctx.g.tol.unwrap_or(1e-10);
    let mut rows = vec![("trials".to_string(), trials.to_string()), ("seed".to_string(), seed.to_string())];
    match suite {
        Suite::Axioms => {
            let main = match ctx.metric {
                Metric::Ted => ("ted", AxiomMetric::Ted),
                Metric::Qed(cfg) => ("qed", AxiomMetric::Qed(cfg)),
            };
            for (name, m) in [main, ("d1", AxiomMetric::D1), ("d2", AxiomMetric::D2)] {
                let r = metric_axiom_suite(planar_sampler, trials, m, seed, tol)?;
                axiom_rows(name, &r, &mut rows);
            }
        }
        Suite::Ordering => {
            let cfg = match ctx.metric {
                Metric::Qed(cfg) => cfg,
                Metric::Ted => QedConfig::default(),
            };
            let r = ordering_suite(planar_sampler, trials, cfg, seed, tol)?;
            rows.push(("qed_above_ted".into(), r.qed_above_ted.to_string()));
            rows.push(("not_monotone_in_k".into(), r.not_monotone_in_k.to_string()));
            rows.push(("worst_gap".into(), r.worst_gap.to_string()));
        }
        Suite::Cat0 => {
            let (mut thin, mut violated, mut degenerate) = (0, 0, 0);
            let mut worst = f64::INFINITY;
            for i in 0..trials {
                let spec = SynthSpec {
                    depth: 3,
                    landmarks: 3,
                    count: 3,
                    template_jitter: Some(0.02),
                    seed: seed.wrapping_add(i as u64),
                    ..SynthSpec::default()
                };
                let s = io::generate_synthetic(&spec)?;
                let r = cat0_probe(&ctx.metric, [&s[0], &s[1], &s[2]], 4)?;
                match r.verdict {
                    Verdict::Thin => thin += 1,
                    Verdict::Violated => violated += 1,
                    Verdict::Degenerate => degenerate += 1,
                }
                if r.perimeter > 0.0 {
                    worst = worst.min(r.min_slack / r.perimeter);
                }
            }
            rows.push(("thin".into(), thin.to_string()));
            rows.push(("violated".into(), violated.to_string()));
            rows.push(("degenerate".into(), degenerate.to_string()));
            rows.push(("worst_relative_slack".into(), worst.to_string()));
        }
        Suite::Genericity => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut total = 0.0;
            for i in 0..trials {
                let s = planar_sampler(&mut rng);
                total += genericity_probe(&s, 1e-3, 20, seed.wrapping_add(i as u64))?;
            }
            rows.push(("mean_binary_fraction".into(), (total / trials.max(1) as f64).to_string()));
        }
    }
    Ok(rows)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| Failure { code: 2, message: format!("{THREADS_VAR} must be a positive integer") })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 2, message: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
