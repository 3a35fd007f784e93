use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use segredefect::certs::{self, render_prose, Certificate};
use segredefect::checker::{check_configuration_with, CheckOptions};
use segredefect::configs::{abundancy, virtual_dim, ConfigShape};
use segredefect::families::inductant::{vdim_additivity_check, verify_inductant_relabeled};
use segredefect::families::{
    catalog_lookup, catalog_names, emit_family, family_eval, nice_edges, ugly_edges, Suite,
};
use segredefect::ffrank::DEFAULT_PRIME;
use segredefect::suite::{run_basecases, SuiteOptions, DEFAULT_SIZE_CAP};

#[derive(Parser)]
#[command(
    name = "segredefect",
    version,
    about = "Non-defectivity checks for (1,2) Segre-Veronese secants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Prime for the finite field
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u32,
    /// Random seed (master seed for suites)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra attempts with seed+1, seed+2, ... before reporting a defect
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Worker threads
    #[arg(long, env = "SEGREDEFECT_WORKERS")]
    workers: Option<usize>,
    /// Largest matrix, in entries, that will be built
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    size_cap: u64,
    /// Directory for certificates
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write certificates as prose reports
    #[arg(long)]
    paper_style: bool,
}

#[derive(Args)]
struct Target {
    /// Catalog family name, used with --m and --n
    #[arg(long, conflicts_with = "config", requires_all = ["m", "n"])]
    family: Option<String>,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    n: Option<i64>,
    /// Configuration file in the `config k= m= n=` format
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Target {
    fn resolve(&self) -> Result<(String, ConfigShape)> {
        match (&self.family, &self.config) {
            (Some(f), None) => {
                let (m, n) = (
                    self.m.expect("required by clap"),
                    self.n.expect("required by clap"),
                );
                let spec = catalog_lookup(f)?;
                Ok((format!("{f}_{m}_{n}"), family_eval(&spec, m, n)?))
            }
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let shape: ConfigShape = text
                    .parse()
                    .map_err(|e| anyhow::anyhow!("{}: {e:?}", path.display()))?;
                let stem = path
                    .file_stem()
                    .map_or("config".into(), |s| s.to_string_lossy().into_owned());
                Ok((stem, shape))
            }
            _ => bail!("give either --family with --m and --n, or --config"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a base-case suite (nice, ugly or all)
    Basecases {
        suite: Suite,
        #[command(flatten)]
        flags: RunFlags,
        /// Also write the report as a tab-separated table here
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Check one configuration and print its certificate
    Check {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Virtual dimension and abundancy of a configuration
    Vdim {
        #[command(flatten)]
        target: Target,
    },
    /// Check the catalog's inductant edges over a grid of points
    Inductant {
        /// Only edges into this family
        #[arg(long)]
        child: Option<String>,
        /// Number of m values per edge
        #[arg(long, default_value_t = 4)]
        m_span: i64,
        /// Number of n values per m
        #[arg(long, default_value_t = 20)]
        n_span: i64,
    },
    /// Re-check a certificate file
    Verify { file: PathBuf },
    /// List the built-in families
    Catalog {
        /// Print the definition of this family
        #[arg(long)]
        show: Option<String>,
    },
}

fn setup_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // fails only if a pool already exists, which is harmless here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global();
    }
}

fn render(cert: &Certificate, paper_style: bool) -> String {
    if paper_style {
        render_prose(cert)
    } else {
        cert.to_string()
    }
}

fn write_cert(dir: &Path, name: &str, cert: &Certificate, paper_style: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{name}.cert"));
    fs::write(&path, render(cert, paper_style))
        .with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Basecases { suite, flags, tsv } => {
            setup_workers(flags.workers);
            let opts = SuiteOptions {
                master_seed: flags.seed,
                prime: flags.prime,
                retries: flags.retries,
                size_cap: flags.size_cap,
                workers: flags.workers,
            };
            let report = run_basecases(suite, &opts);
            println!("{report}");
            if let Some(dir) = &flags.out {
                for e in &report.entries {
                    if let Some(c) = &e.certificate {
                        write_cert(
                            dir,
                            &format!("{}_{}_{}", e.family, e.m, e.n),
                            c,
                            flags.paper_style,
                        )?;
                    }
                }
                fs::write(dir.join("report.tsv"), report.to_tsv())?;
            }
            if let Some(path) = tsv {
                fs::write(&path, report.to_tsv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(report.passed())
        }
        Command::Check { target, flags } => {
            setup_workers(flags.workers);
            let (name, shape) = target.resolve()?;
            let opts = CheckOptions {
                prime: flags.prime,
                retries: flags.retries,
                max_entries: flags.size_cap,
            };
            let (verdict, cert) = check_configuration_with(&shape, flags.seed, &opts)?;
            match &flags.out {
                Some(dir) => {
                    write_cert(dir, &name, &cert, flags.paper_style)?;
                    println!("{verdict}");
                }
                None => print!("{}", render(&cert, flags.paper_style)),
            }
            Ok(verdict.is_nondefective())
        }
        Command::Vdim { target } => {
            let (_, shape) = target.resolve()?;
            println!(
                "vdim={} abundancy={}",
                virtual_dim(&shape),
                abundancy(&shape)
            );
            Ok(true)
        }
        Command::Inductant {
            child,
            m_span,
            n_span,
        } => {
            let mut all_ok = true;
            for e in nice_edges().into_iter().chain(ugly_edges()) {
                if child.as_deref().is_some_and(|c| c != e.child) {
                    continue;
                }
                let c = catalog_lookup(e.child)?;
                let p = catalog_lookup(e.parent)?;
                let (mut checked, mut failed) = (0, 0);
                for (m, n) in c.domain.sample(m_span, n_span) {
                    let Ok((mm, nn)) = e.step.apply(m, n) else {
                        continue;
                    };
                    if !p.domain.contains(m, n) || !p.domain.contains(mm, nn) {
                        continue;
                    }
                    checked += 1;
                    let ok = verify_inductant_relabeled(&c, &p, &e.step, &e.relabel, m, n)?
                        && vdim_additivity_check(&p, &e.step, m, n)?;
                    if !ok {
                        failed += 1;
                        println!("  {} <- {} fails at ({m},{n})", e.child, e.parent);
                    }
                }
                let status = if failed == 0 && checked > 0 {
                    "ok"
                } else {
                    "FAIL"
                };
                println!(
                    "{} <- {} [{}]: {checked} points, {failed} failures, {status}",
                    e.child, e.parent, e.step
                );
                all_ok &= failed == 0 && checked > 0;
            }
            Ok(all_ok)
        }
        Command::Verify { file } => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let cert = certs::parse(&text)?;
            let ok = certs::reverify(&cert)?;
            println!("{}", if ok { "VERIFIED" } else { "MISMATCH" });
            Ok(ok)
        }
        Command::Catalog { show } => {
            if let Some(name) = show {
                print!("{}", emit_family(&catalog_lookup(&name)?));
                return Ok(true);
            }
            for name in catalog_names() {
                let f = catalog_lookup(name)?;
                let bounds: Vec<String> = f.domain.bounds.iter().map(ToString::to_string).collect();
                println!(
                    "{name}\tk={}\tmodulus={}\t{}\t{}",
                    f.k,
                    f.modulus(),
                    f.domain.parity,
                    bounds.join(", ")
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
