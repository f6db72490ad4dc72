//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on bad input (including usage errors), 2 when
//! a certificate, verification or acceptance check fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::auctions::{brev, revenue, verify_ic_ir, DEFAULT_TOLERANCE};
use crate::constructions::{layer_bounds, Construction, DEFAULT_MAX_LAYER};
use crate::error::{Error, Result};
use crate::gapcore::{align_gap_terms, menu_gap_terms, sup_gap, GapReport};
use crate::gapopt::{
    align_gap_bruteforce, align_gap_search, lagrel_chain, menu_gap_lp, optimal_mechanism_lp,
    search::DEFAULT_RESTARTS,
};
use crate::io::{self, MechanismFile};
use crate::reproduce::{self, ALIGN_BOUND};
use crate::scalar::{Backend, Rational, Scalar};
use crate::transforms::{
    aligned_sequence, hn_construct, prop_hn_check, representative_sequence, theorem_ext_pipeline,
    theorem_main_pipeline, ExtractionConfig, HnParams, Parity,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "menugap",
    version,
    about = "Gap functionals and revenue certificates for multi-item auctions"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args, serde::Serialize)]
pub struct RunConfig {
    /// Arithmetic backend.
    #[arg(long, global = true, default_value = "float")]
    pub backend: Backend,
    /// Relative tolerance for float comparisons; ignored by the rational backend.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Seed for randomized searches and instance draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write a run manifest (config, input hashes, result, wall time) to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

impl RunConfig {
    fn tol<T: Scalar>(&self) -> f64 {
        if T::EXACT {
            0.0
        } else {
            self.tolerance
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the layered construction and write X (and optionally Q).
    BuildSequence {
        #[arg(long, default_value_t = DEFAULT_MAX_LAYER)]
        layers: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        q_out: Option<PathBuf>,
    },
    /// Per-layer relaxation and gap bounds of the construction.
    Bounds {
        #[arg(long, default_value_t = DEFAULT_MAX_LAYER)]
        layers: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// MenuGap of a sequence: optimal (--lp), for given allocations (--q) or SupGap (--sup).
    Menugap {
        x: PathBuf,
        #[arg(long, conflicts_with_all = ["q", "sup"])]
        lp: bool,
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long, conflicts_with = "q")]
        sup: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// AlignGap bounds: search, grid bruteforce, relaxation chain or given scalars.
    Aligngap {
        x: PathBuf,
        #[arg(long, group = "mode")]
        search: bool,
        #[arg(long, group = "mode")]
        bruteforce: bool,
        #[arg(long, group = "mode")]
        lagrel: bool,
        #[arg(long, group = "mode")]
        scalars: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Revenue-optimal mechanism for a finite distribution.
    Optmech {
        d: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected revenue of a mechanism, with per-buyer purchases.
    Rev {
        d: PathBuf,
        m: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Best grand-bundle price.
    Brev { d: PathBuf },
    /// Revenue from buyers whose allocation is parallel to their values.
    Arev { d: PathBuf, m: PathBuf },
    /// Check incentive compatibility and individual rationality.
    Verify { d: PathBuf, m: PathBuf },
    /// Turn (X, Q) into a distribution and a menu.
    HnConstruct {
        x: PathBuf,
        q: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        max_index: Option<usize>,
        #[arg(long)]
        out_dist: PathBuf,
        #[arg(long)]
        out_mech: PathBuf,
    },
    /// Extract a representative (or aligned) sequence from a structured menu.
    Extract {
        d: PathBuf,
        m: PathBuf,
        #[arg(long)]
        c: String,
        #[arg(long)]
        aligned: bool,
        #[arg(long, default_value = "0")]
        epsilon: String,
        #[arg(long, default_value = "auto")]
        parity: Parity,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the extraction pipeline and certify the factor-9 bound.
    Certify {
        d: PathBuf,
        /// Certify the aligned bound for this mechanism instead.
        #[arg(long)]
        ext: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check aligned revenue of candidate menus against the relaxation bound.
    PropHn {
        x: PathBuf,
        q: PathBuf,
        #[arg(long)]
        base: String,
        /// Directory of mechanism JSON files.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checklist.
    Reproduce {
        /// Only the randomized property criteria.
        #[arg(long)]
        quick: bool,
        /// Only the per-layer relaxation table, checked against the bound.
        #[arg(long)]
        paper_bounds: bool,
        #[arg(long, default_value_t = reproduce::LAYERS)]
        layers: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory receiving the report bundle.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u8>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BuildSequence { .. } => "build-sequence",
            Command::Bounds { .. } => "bounds",
            Command::Menugap { .. } => "menugap",
            Command::Aligngap { .. } => "aligngap",
            Command::Optmech { .. } => "optmech",
            Command::Rev { .. } => "rev",
            Command::Brev { .. } => "brev",
            Command::Arev { .. } => "arev",
            Command::Verify { .. } => "verify",
            Command::HnConstruct { .. } => "hn-construct",
            Command::Extract { .. } => "extract",
            Command::Certify { .. } => "certify",
            Command::PropHn { .. } => "prop-hn",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// Result of a subcommand: a JSON summary and whether its checks held.
struct Outcome {
    summary: Value,
    ok: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { summary, ok: true }
    }
}

/// Tracks input files for the manifest.
#[derive(Default)]
struct Inputs(Vec<PathBuf>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<Value> {
        self.0.push(path.to_path_buf());
        io::read_json(path)
    }

    fn hashes(&self) -> Vec<Value> {
        self.0
            .iter()
            .map(|p| {
                let digest = std::fs::read(p)
                    .map(|b| format!("{:x}", Sha256::digest(&b)))
                    .unwrap_or_default();
                json!({ "path": p, "sha256": digest })
            })
            .collect()
    }
}

fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    match out {
        Some(p) => io::write_json(p, v),
        None => print_stdout(&format!("{}\n", serde_json::to_string_pretty(v)?)),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn parse_scalar<T: Scalar>(field: &str, s: &str) -> Result<T> {
    T::parse_text(s).map_err(|e| Error::invalid(field, e.to_string()))
}

fn gap_csv<T: Scalar>(path: Option<&PathBuf>, report: &GapReport<T>) -> Result<()> {
    if let Some(p) = path {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        io::write_atomic(p, &buf)?;
    }
    Ok(())
}

fn load_mechanism<T: Scalar>(inputs: &mut Inputs, path: &Path) -> Result<MechanismFile<T>> {
    let v = inputs.read(path)?;
    io::mechanism_from_json(&v, path)
}

fn run_typed<T: Scalar>(cmd: &Command, cfg: &RunConfig, inputs: &mut Inputs) -> Result<Outcome> {
    let tol = cfg.tol::<T>();
    match cmd {
        Command::BuildSequence { layers, out, q_out } => {
            let c = Construction::<f64>::with_layers(*layers)?;
            let x = c.x.cast::<T>();
            io::write_json(out, &io::points_to_json(&x))?;
            if let Some(qp) = q_out {
                io::write_json(qp, &io::allocations_to_json(&c.q.cast::<T>()))?;
            }
            Ok(Outcome::ok(json!({
                "layers": layers,
                "points": x.len(),
                "alpha": [c.params.alpha.lo(), c.params.alpha.hi()],
            })))
        }
        Command::Bounds { layers, csv } => {
            let c = Construction::<T>::with_layers(*layers)?;
            let rows = layer_bounds(&c)?;
            match csv {
                Some(p) => io::write_csv(p, &rows)?,
                None => print_stdout(&String::from_utf8_lossy(&io::csv_bytes(&rows)?))?,
            }
            Ok(Outcome::ok(json!({ "layers": layers, "rows": rows.len() })))
        }
        Command::Menugap {
            x,
            lp,
            q,
            sup,
            out,
            csv,
        } => {
            let xv = inputs.read(x)?;
            let xs = io::points_from_json::<T>(&xv, x)?;
            let result = if let Some(qp) = q {
                let qv = inputs.read(qp)?;
                let qs = io::allocations_from_json::<T>(&qv, qp)?;
                let rep = menu_gap_terms(&xs, &qs)?;
                gap_csv(csv.as_ref(), &rep)?;
                json!({ "objective": rep.total.to_json(), "witness": rep.argmin_witness })
            } else if *sup {
                let rep = sup_gap(&xs)?;
                gap_csv(csv.as_ref(), &rep)?;
                json!({ "objective": rep.total.to_json(), "witness": rep.argmin_witness })
            } else {
                if !*lp {
                    return Err(Error::invalid(
                        "mode",
                        "pass one of --lp, --q FILE or --sup",
                    ));
                }
                let sol = menu_gap_lp(&xs)?;
                if csv.is_some() {
                    gap_csv(csv.as_ref(), &menu_gap_terms(&xs, &sol.q_star)?)?;
                }
                json!({
                    "objective": sol.objective.to_json(),
                    "witness": io::allocations_to_json(&sol.q_star),
                    "status": sol.status,
                })
            };
            emit(out.as_deref(), &result)?;
            Ok(Outcome::ok(result))
        }
        Command::Aligngap {
            x,
            search,
            bruteforce,
            lagrel,
            scalars,
            restarts,
            resolution,
            out,
            csv,
        } => {
            let xv = inputs.read(x)?;
            let xs = io::points_from_json::<T>(&xv, x)?;
            let (result, ok) = if *lagrel {
                let rep = lagrel_chain(&xs, *restarts, cfg.seed, tol)?;
                (
                    json!({
                        "objective": rep.lagrel.to_f64(),
                        "lagrel_coefficient": rep.lagrel.coeff.to_json(),
                        "chain": rep.summary(),
                        "witness": rep.active,
                    }),
                    rep.chain_valid,
                )
            } else {
                let (value, c) = if let Some(sp) = scalars {
                    let sv = inputs.read(sp)?;
                    let c = io::scalars_from_json(&sv, sp, &xs)?;
                    (align_gap_terms(&xs, &c)?.total, c)
                } else if *bruteforce {
                    align_gap_bruteforce(&xs, *resolution)?
                } else {
                    if !*search {
                        return Err(Error::invalid(
                            "mode",
                            "pass one of --search, --bruteforce, --lagrel or --scalars FILE",
                        ));
                    }
                    align_gap_search(&xs, *restarts, cfg.seed)?
                };
                gap_csv(csv.as_ref(), &align_gap_terms(&xs, &c)?)?;
                (
                    json!({ "objective": value.to_json(), "witness": io::scalars_to_json(&c) }),
                    true,
                )
            };
            emit(out.as_deref(), &result)?;
            Ok(Outcome {
                summary: result,
                ok,
            })
        }
        Command::Optmech { d, out } => {
            let dv = inputs.read(d)?;
            let dist = io::distribution_from_json::<T>(&dv, d)?;
            let opt = optimal_mechanism_lp(&dist)?;
            let merged = dist.len() == opt.assignment.len();
            let doc =
                io::mechanism_to_json(&opt.mechanism, merged.then_some(opt.assignment.as_slice()));
            emit(out.as_deref(), &doc)?;
            Ok(Outcome::ok(json!({
                "objective": opt.revenue.to_json(),
                "entries": opt.mechanism.len(),
            })))
        }
        Command::Rev { d, m, csv } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let mf = load_mechanism::<T>(inputs, m)?;
            let rep = revenue(&dist, &mf.mechanism, tol)?;
            if let Some(p) = csv {
                io::write_csv(p, &rep.records())?;
            }
            let v = json!({
                "rev": rep.rev.to_json(),
                "arev": rep.arev.to_json(),
                "brev": rep.brev.to_json(),
                "brev_price": rep.brev_price.to_json(),
                "purchases": rep.records(),
            });
            emit(None, &v)?;
            Ok(Outcome::ok(v))
        }
        Command::Brev { d } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let (price, value) = brev(&dist);
            let v = json!({ "price": price.to_json(), "brev": value.to_json() });
            emit(None, &v)?;
            Ok(Outcome::ok(v))
        }
        Command::Arev { d, m } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let mf = load_mechanism::<T>(inputs, m)?;
            let rep = revenue(&dist, &mf.mechanism, tol)?;
            let v = json!({ "arev": rep.arev.to_json(), "rev": rep.rev.to_json() });
            emit(None, &v)?;
            Ok(Outcome::ok(v))
        }
        Command::Verify { d, m } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let mf = load_mechanism::<T>(inputs, m)?;
            let rep = verify_ic_ir(&dist, &mf.mechanism, mf.assignment.as_deref(), tol)?;
            let violations: Vec<Value> = rep
                .violations
                .iter()
                .map(|v| {
                    json!({
                        "support_index": v.support_index,
                        "chosen": v.chosen,
                        "preferred": v.preferred,
                        "margin": v.margin.to_json(),
                    })
                })
                .collect();
            let v = json!({
                "ok": rep.ok,
                "worst_margin": rep.worst_margin.to_json(),
                "violations": violations,
            });
            emit(None, &v)?;
            Ok(Outcome {
                summary: v,
                ok: rep.ok,
            })
        }
        Command::HnConstruct {
            x,
            q,
            base,
            max_index,
            out_dist,
            out_mech,
        } => {
            let xs = io::points_from_json::<T>(&inputs.read(x)?, x)?;
            let qs = io::allocations_from_json::<T>(&inputs.read(q)?, q)?;
            let params = HnParams::new(
                parse_scalar::<T>("base", base)?,
                max_index.unwrap_or(xs.len().max(1)),
            )?;
            let hn = hn_construct(&xs, &qs, &params, tol)?;
            io::write_json(out_dist, &io::distribution_to_json(&hn.distribution))?;
            io::write_json(
                out_mech,
                &io::mechanism_to_json(&hn.mechanism, Some(&hn.assignment)),
            )?;
            let rep = revenue(&hn.distribution, &hn.mechanism, tol)?;
            let gap = menu_gap_terms(&xs, &qs)?.total;
            let v = json!({
                "ic_ok": hn.ic.ok,
                "ic_violations": hn.ic.violations.len(),
                "buys_intended": hn.buys_intended,
                "rev": rep.rev.to_json(),
                "brev": rep.brev.to_json(),
                "ratio": rep.rev.div_ref(&rep.brev).to_f64(),
                "menugap": gap.to_json(),
            });
            emit(None, &v)?;
            Ok(Outcome::ok(v))
        }
        Command::Extract {
            d,
            m,
            c,
            aligned,
            epsilon,
            parity,
            out,
        } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let mf = load_mechanism::<T>(inputs, m)?;
            let cfg_x = ExtractionConfig::new(
                parse_scalar::<T>("c", c)?,
                parse_scalar::<T>("epsilon", epsilon)?,
                *parity,
            )?;
            let v = if *aligned {
                let ext = aligned_sequence(&dist, &mf.mechanism, &cfg_x, tol)?;
                let gap = align_gap_terms(&ext.x, &ext.c)?.total;
                json!({
                    "parity": ext.parity,
                    "x": io::points_to_json(&ext.x),
                    "scalars": io::scalars_to_json(&ext.c),
                    "bands": ext.buckets.iter().map(|b| b.band).collect::<Vec<_>>(),
                    "aligngap": gap.to_json(),
                })
            } else {
                let ext = representative_sequence(&dist, &mf.mechanism, &cfg_x, tol)?;
                let gap = menu_gap_terms(&ext.x, &ext.q)?.total;
                json!({
                    "parity": ext.parity,
                    "x": io::points_to_json(&ext.x),
                    "q": io::allocations_to_json(&ext.q),
                    "bands": ext.buckets.iter().map(|b| b.band).collect::<Vec<_>>(),
                    "menugap": gap.to_json(),
                })
            };
            emit(out.as_deref(), &v)?;
            Ok(Outcome::ok(v))
        }
        Command::Certify { d, ext, out } => {
            let dist = io::distribution_from_json::<T>(&inputs.read(d)?, d)?;
            let cert = match ext {
                Some(mp) => {
                    let mf = load_mechanism::<T>(inputs, mp)?;
                    theorem_ext_pipeline(&dist, &mf.mechanism, tol)?
                }
                None => theorem_main_pipeline(&dist, tol)?,
            };
            let v = cert.to_json();
            emit(out.as_deref(), &v)?;
            Ok(Outcome {
                summary: v,
                ok: cert.all_checks_pass(),
            })
        }
        Command::PropHn {
            x,
            q,
            base,
            candidates,
            out,
        } => {
            let xs = io::points_from_json::<T>(&inputs.read(x)?, x)?;
            let qs = io::allocations_from_json::<T>(&inputs.read(q)?, q)?;
            let mut cands = Vec::new();
            if let Some(dir) = candidates {
                let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
                    .map_err(|source| Error::Io {
                        path: dir.clone(),
                        source,
                    })?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "json"))
                    .collect();
                files.sort();
                for f in files {
                    let mf = load_mechanism::<T>(inputs, &f)?;
                    let label = f
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    cands.push((label, mf.mechanism));
                }
            }
            let rep = prop_hn_check(&xs, &qs, parse_scalar::<T>("base", base)?, &cands, tol)?;
            let outcomes: Vec<Value> = rep
                .outcomes
                .iter()
                .map(|o| {
                    json!({
                        "label": o.label,
                        "arev": o.arev.to_json(),
                        "margin": o.margin,
                        "holds": o.holds,
                    })
                })
                .collect();
            let v = json!({
                "bound": rep.lagrel_coeff.to_f64() * std::f64::consts::SQRT_2 + 1.0 / rep.base.to_f64(),
                "worst_margin": rep.worst_margin,
                "all_hold": rep.all_hold,
                "candidates": outcomes,
            });
            emit(out.as_deref(), &v)?;
            Ok(Outcome {
                summary: v,
                ok: rep.all_hold,
            })
        }
        Command::Reproduce { .. } => unreachable!("handled without a backend"),
    }
}

fn run_reproduce(
    cfg: &RunConfig,
    quick: bool,
    paper_bounds: bool,
    layers: usize,
    csv: Option<&Path>,
    out: Option<&Path>,
    criterion: Option<u8>,
) -> Result<Outcome> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let table_path = csv
        .map(Path::to_path_buf)
        .or_else(|| out.map(|d| d.join("layer_bounds.csv")));
    if paper_bounds {
        let rows = reproduce::layer_table(layers)?;
        match &table_path {
            Some(p) => io::write_csv(p, &rows)?,
            None => print_stdout(&String::from_utf8_lossy(&io::csv_bytes(&rows)?))?,
        }
        let worst = rows
            .iter()
            .map(|r| r.lagrel_total)
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = rows.iter().all(|r| r.lagrel_total <= ALIGN_BOUND);
        eprintln!(
            "{} layer table: max relaxation + tail {worst:.6} against bound {ALIGN_BOUND}",
            if ok { "PASS" } else { "FAIL" }
        );
        return Ok(Outcome {
            summary: json!({ "rows": rows.len(), "max_total": worst, "pass": ok }),
            ok,
        });
    }
    let outcomes = match criterion {
        Some(id) => vec![reproduce::run_criterion(id, cfg.seed)?],
        None => reproduce::run_all(cfg.seed, quick)?,
    };
    for o in &outcomes {
        print_stdout(&format!("{}\n", o.line()))?;
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
    }
    if let Some(dir) = out {
        io::write_json(
            &dir.join("criteria.json"),
            &serde_json::to_value(&outcomes)?,
        )?;
        if !quick {
            io::write_csv(
                &dir.join("layer_bounds.csv"),
                &reproduce::layer_table(reproduce::LAYERS)?,
            )?;
        }
    }
    Ok(Outcome {
        summary: json!({ "criteria": outcomes, "failed": failed }),
        ok: failed.is_empty(),
    })
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<Outcome> {
    if let Command::Reproduce {
        quick,
        paper_bounds,
        layers,
        csv,
        out,
        criterion,
    } = &cli.command
    {
        return run_reproduce(
            &cli.config,
            *quick,
            *paper_bounds,
            *layers,
            csv.as_deref(),
            out.as_deref(),
            *criterion,
        );
    }
    match cli.config.backend {
        Backend::Float => run_typed::<f64>(&cli.command, &cli.config, inputs),
        Backend::Rational => run_typed::<Rational>(&cli.command, &cli.config, inputs),
    }
}

fn write_manifest(cli: &Cli, inputs: &Inputs, outcome: &Value, ok: bool, secs: f64) -> Result<()> {
    if let Some(path) = &cli.config.manifest {
        let doc = json!({
            "subcommand": cli.command.name(),
            "config": cli.config,
            "args": std::env::args().skip(1).collect::<Vec<_>>(),
            "inputs": inputs.hashes(),
            "result": outcome,
            "ok": ok,
            "wall_time_secs": secs,
        });
        io::write_json(path, &doc)?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs::default();
    match dispatch(&cli, &mut inputs) {
        Ok(outcome) => {
            if let Err(e) = write_manifest(
                &cli,
                &inputs,
                &outcome.summary,
                outcome.ok,
                start.elapsed().as_secs_f64(),
            ) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            if outcome.ok {
                EXIT_OK
            } else {
                EXIT_CHECK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_CHECK
            }
        }
    }
}
