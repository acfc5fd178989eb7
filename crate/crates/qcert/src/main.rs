use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qcert::config::ConfigOverlay;
use qcert::corpus::builtin_corpus;
use qcert::run::run;

/// Numerical quasi-concavity certification on boxes.
///
/// MODE is one of: validate, theorem1, theorem2, lemma1, property_n,
/// oracle, concavity, trace — or `corpus` to list the builtin fields.
/// Flags override values from --config; unset values fall back to the
/// defaults shown below.
#[derive(Parser)]
#[command(name = "qcert", version, about)]
struct Cli {
    /// Test mode (see long help), or `corpus`
    mode: String,

    /// Config file in the flat `key = value` format
    #[arg(long)]
    config: Option<PathBuf>,

    /// Builtin corpus name or an expression in x1..xn
    #[arg(long)]
    function: Option<String>,

    /// Vector field g as `;`-separated component expressions (e.g. "0; 1")
    #[arg(long)]
    g: Option<String>,

    /// Scale field lambda as an expression [default: 1]
    #[arg(long)]
    lambda: Option<String>,

    /// Domain box, e.g. "x1:-0.5:0.5,x2:-0.5:0.5" [default: the builtin's box]
    #[arg(long)]
    domain: Option<String>,

    /// Lattice points per axis [default: 21]
    #[arg(long)]
    grid: Option<usize>,

    /// Extra seeded random sample points [default: 0]
    #[arg(long = "random-points")]
    random_points: Option<usize>,

    /// Oracle trials [default: 10000]
    #[arg(long)]
    trials: Option<usize>,

    /// Seed for every random stream [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// Margin tolerance; the refutation threshold is 10x this [default: 1e-8]
    #[arg(long)]
    tol: Option<f64>,

    /// Central finite-difference step [default: 1e-5]
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,

    /// Oracle inequality: quasi | strict | concave [default: quasi]
    #[arg(long)]
    oracle: Option<String>,

    /// Base point x* for lemma1, e.g. "1,0"
    #[arg(long)]
    point: Option<String>,

    /// Level value (x2 at the anchor) for trace mode
    #[arg(long)]
    level: Option<f64>,

    /// Anchor x1 for trace mode [default: 0]
    #[arg(long)]
    anchor: Option<f64>,

    /// Trace range "lo:hi" [default: the domain's x1 bounds]
    #[arg(long = "x1-range")]
    x1_range: Option<String>,

    /// Trace integration step [default: 1e-3]
    #[arg(long)]
    step: Option<f64>,

    /// Output format: text | json | csv (csv is trace-only) [default: text]
    #[arg(long)]
    format: Option<String>,

    /// Output path; reports are written atomically (temp file + rename)
    #[arg(long)]
    out: Option<String>,
}

impl Cli {
    fn overlay(&self) -> ConfigOverlay {
        ConfigOverlay {
            mode: Some(self.mode.clone()),
            function: self.function.clone(),
            g: self.g.clone(),
            lambda: self.lambda.clone(),
            domain: self.domain.clone(),
            grid: self.grid,
            random_points: self.random_points,
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
            fd_step: self.fd_step,
            oracle: self.oracle.clone(),
            point: self.point.clone(),
            level: self.level,
            anchor: self.anchor,
            x1_range: self.x1_range.clone(),
            step: self.step.clone(),
            format: self.format.clone(),
            out: self.out.clone(),
        }
    }
}

fn write_atomic(path: &str, contents: &str) -> std::io::Result<()> {
    let tmp = format!("{path}.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn list_corpus() {
    println!("{:<22} {:>3}  {:<26} labels (qc/strict/concave/grad!=0)", "name", "dim", "domain");
    for e in builtin_corpus() {
        let domain: Vec<String> = e
            .domain
            .lower()
            .iter()
            .zip(e.domain.upper())
            .enumerate()
            .map(|(i, (lo, hi))| format!("x{}:{}:{}", i + 1, lo, hi))
            .collect();
        println!(
            "{:<22} {:>3}  {:<26} {}/{}/{}/{}",
            e.name,
            e.dim,
            domain.join(","),
            e.labels.quasiconcave,
            e.labels.strictly_quasiconcave,
            e.labels.concave,
            e.labels.gradient_nonvanishing,
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.mode == "corpus" {
        list_corpus();
        return ExitCode::SUCCESS;
    }

    let file_overlay = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match ConfigOverlay::from_text(&text) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("qcert: {e}");
                    return ExitCode::from(4);
                }
            },
            Err(e) => {
                eprintln!("qcert: cannot read {}: {e}", path.display());
                return ExitCode::from(4);
            }
        },
        None => ConfigOverlay::default(),
    };

    let cfg = match cli.overlay().over(file_overlay).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qcert: {e}");
            return ExitCode::from(4);
        }
    };

    match run(&cfg) {
        Ok(output) => {
            if let Some(path) = &cfg.out {
                if let Err(e) = write_atomic(path, &output.rendered) {
                    eprintln!("qcert: cannot write {path}: {e}");
                    return ExitCode::from(4);
                }
                if let Some(v) = output.verdict {
                    println!("verdict: {} (report written to {path})", v.as_str());
                }
            } else {
                print!("{}", output.rendered);
            }
            ExitCode::from(u8::try_from(output.exit_code()).unwrap_or(4))
        }
        Err(e) => {
            eprintln!("qcert: {e}");
            ExitCode::from(4)
        }
    }
}
