use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shtuka_cli::pipeline::{
    analyze, AnalysisReport, AnalyzeOptions, BuildRequest, SurfaceFile, SurfaceSpec,
};
use shtuka_cli::reproduce::{
    parse_rows, reproduce, ReproduceOptions, TrialSpec, DEFAULT_BUDGET_SECONDS,
};
use shtuka_cli::CliError;

#[derive(Parser)]
#[command(
    name = "shtuka",
    version,
    about = "Degree-4 Γ₀ shtuka surfaces: build, analyze, reproduce"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct SurfaceArgs {
    /// 4(0), 2(0)+2(inf), 3(0)+(inf), 2(0)+(1)+(inf), sqfree, (0)+(1)+(inf)+(R)
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    /// Integer, α_r^k or packed [c0,c1,..]
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long = "Q", allow_hyphen_values = true)]
    q_val: Option<String>,
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
}

impl SurfaceArgs {
    fn request(&self) -> Result<BuildRequest, CliError> {
        let (Some(shape), Some(q)) = (&self.shape, self.q) else {
            return Err(CliError::Usage("--shape and --q are required".into()));
        };
        Ok(BuildRequest {
            shape: shape.clone(),
            q,
            p: self.p.clone(),
            q_val: self.q_val.clone(),
            r: self.r.clone(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a specialized surface and write surface.json.
    Build {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Singular checks, fibration and Tate analysis of a surface file (or
    /// of a surface given by flags).
    Analyze {
        surface_file: Option<PathBuf>,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 2)]
        deg_bound: u32,
        /// Also search for singular points up to this extension degree.
        #[arg(long)]
        sing_ext: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare computed invariants with a bundled table.
    Reproduce {
        #[arg(long)]
        table: u8,
        /// q=2,q=3
        #[arg(long)]
        rows: Option<String>,
        /// A number of default pairs, or explicit pairs `P,Q;P,Q`.
        #[arg(long)]
        trials: Option<String>,
        #[arg(long, env = "SHTUKA_BUDGET", default_value_t = DEFAULT_BUDGET_SECONDS)]
        budget_seconds: f64,
        #[arg(long, default_value_t = 2)]
        deg_bound: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn write_out(path: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("report serializes") + "\n"
}

fn analysis_text(a: &AnalysisReport) -> String {
    let mut s = a.text_row() + "\n";
    s.push_str(&format!(
        "census: {}\npa={} (bound {}), e={}\n",
        a.surface.closure_row(),
        a.surface.pa,
        a.pa_bound,
        a.surface.e
    ));
    if let Some(pts) = &a.singular.stated {
        let n = pts.iter().filter(|p| p.is_singular).count();
        s.push_str(&format!(
            "stated singular points confirmed: {n}/{}\n",
            pts.len()
        ));
    }
    if let Some(search) = &a.singular.search {
        s.push_str(&format!(
            "singular points up to degree {}: {:?}{}\n",
            search.max_ext,
            search.counts,
            if search.non_isolated {
                " (non-isolated)"
            } else {
                ""
            }
        ));
    }
    s
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Build {
            surface,
            out,
            format,
        } => {
            let spec = SurfaceSpec::resolve(&surface.request()?)?;
            let tf = spec.build()?;
            let file = SurfaceFile::new(&spec, &tf)?;
            let json = to_json(&file);
            write_out(&Some(out.unwrap_or_else(|| "surface.json".into())), &json)?;
            let [a, b, c] = file.multidegree;
            match format {
                Format::Json => print!("{json}"),
                Format::Text => println!(
                    "{} q={} over {} (P,Q)=({},{}): multidegree ({a},{b},{c}), pa ≤ {}",
                    file.shape,
                    file.q,
                    spec.field_label(),
                    spec.field.display(spec.p),
                    spec.field.display(spec.q_val),
                    file.pa_bound
                ),
            }
            Ok(0)
        }
        Command::Analyze {
            surface_file,
            surface,
            deg_bound,
            sing_ext,
            out,
            format,
        } => {
            let (spec, tf) = match surface_file {
                Some(path) => {
                    let body = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    let file: SurfaceFile = serde_json::from_str(&body)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    file.load()?
                }
                None => {
                    let spec = SurfaceSpec::resolve(&surface.request()?)?;
                    let tf = spec.build()?;
                    (spec, tf)
                }
            };
            let report = analyze(
                &spec,
                &tf,
                AnalyzeOptions {
                    deg_bound,
                    sing_ext,
                },
            )?;
            let json = to_json(&report);
            write_out(&Some(out.unwrap_or_else(|| "report.json".into())), &json)?;
            match format {
                Format::Json => print!("{json}"),
                Format::Text => print!("{}", analysis_text(&report)),
            }
            Ok(0)
        }
        Command::Reproduce {
            table,
            rows,
            trials,
            budget_seconds,
            deg_bound,
            out,
            format,
        } => {
            let opts = ReproduceOptions {
                rows: rows.as_deref().map(parse_rows).transpose()?,
                trials: trials
                    .as_deref()
                    .map(TrialSpec::parse)
                    .transpose()?
                    .unwrap_or_default(),
                budget_seconds,
                analyze: AnalyzeOptions {
                    deg_bound,
                    sing_ext: None,
                },
            };
            let report = reproduce(table, &opts)?;
            let json = to_json(&report);
            write_out(&out, &json)?;
            match format {
                Format::Json => print!("{json}"),
                Format::Text => print!("{}", report.to_text()),
            }
            Ok(if report.all_pass_or_skip() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
