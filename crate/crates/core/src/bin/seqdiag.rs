use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqdiag::dpi_format::serialize_dpi;
use seqdiag::engine::{calc_query, run, Answer, Goal, Oracle, Session, SessionConfig, Status};
use seqdiag::fixtures::{self, parse_sentence_list};
use seqdiag::mbd::{parse_netlist, reduce, Reduction};
use seqdiag::qpartition::{enumerate_cqps, qsm_value, search_optimal_qp, Measure, QsmConfig, DEFAULT_ENUMERATION_CAP};
use seqdiag::query_cost::Qcm;
use seqdiag::query_enhance::EntailmentFilter;
use seqdiag::{hs_tree, parse_dpi, verify, Diagnosis, Dpi, LeadingDiagnoses};

#[derive(Parser)]
#[command(name = "seqdiag", version, about = "Sequential diagnosis of faulty propositional knowledge bases")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the most probable minimal diagnoses.
    Diagnose {
        file: PathBuf,
        #[arg(short = 'n', long, default_value_t = 10)]
        n: usize,
    },
    /// Find the best canonical q-partition for the leading diagnoses.
    Qpartition {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Score every canonical q-partition instead of searching.
        #[arg(long)]
        brute_force: bool,
    },
    /// Compute the next query.
    Query {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Reduce a circuit netlist to a DPI file.
    Reduce { netlist: PathBuf },
    /// Run a diagnosis session, answering on stdin or from a simulated oracle.
    Session {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value = "single")]
        goal: String,
        #[arg(long)]
        simulate: bool,
        /// Reference KB for the simulated oracle, one sentence per line.
        #[arg(long, requires = "simulate", conflicts_with = "target")]
        reference: Option<PathBuf>,
        /// Target diagnosis for the simulated oracle, as comma-separated sentence ids.
        #[arg(long, requires = "simulate", value_delimiter = ',')]
        target: Option<Vec<u32>>,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Print or check the bundled reference problems.
    Fixtures {
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(short = 'n', long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value = "ent")]
    qsm: Measure,
    #[arg(long, default_value_t = 0.01)]
    tm: f64,
    #[arg(long)]
    no_pruning: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, default_value = "card")]
    qcm: Qcm,
    /// Enrich the query with implicit entailments before minimizing it.
    #[arg(long)]
    enhance: bool,
    /// Entailment types for enrichment: `literals`, `implications` or both, comma-separated.
    #[arg(long, default_value = "literals,implications")]
    et: String,
}

impl SearchArgs {
    fn qsm(&self) -> seqdiag::Result<QsmConfig> {
        let mut c = QsmConfig::new(self.qsm, self.tm)?;
        c.pruning = !self.no_pruning;
        Ok(c)
    }
}

fn config(search: &SearchArgs, query: &QueryArgs, goal: &str) -> seqdiag::Result<SessionConfig> {
    let c = SessionConfig {
        n_leading: search.n,
        qsm: search.qsm()?,
        qcm: query.qcm,
        enhance: query.enhance,
        goal: goal.parse::<Goal>()?,
        filter: EntailmentFilter::parse_kinds(&query.et)?,
        time_budget: None,
    };
    c.validate()?;
    Ok(c)
}

/// Loads a DPI file, or reduces a netlist when the extension is `.net`.
fn load(path: &Path) -> Result<(Dpi, Option<Reduction>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let at = |e: seqdiag::Error| format!("{}: {e}", path.display());
    if path.extension().is_some_and(|x| x == "net") {
        let r = reduce(&parse_netlist(&text).map_err(at)?).map_err(at)?;
        Ok((r.dpi.clone(), Some(r)))
    } else {
        Ok((parse_dpi(&text).map_err(at)?, None))
    }
}

fn describe(d: &Diagnosis, r: Option<&Reduction>) -> String {
    match r {
        Some(r) => format!("{{{}}}", r.components_of(d).join(",")),
        None => {
            let ids: Vec<String> = d.raw().iter().map(|i| format!("a{i}")).collect();
            format!("{{{}}}", ids.join(","))
        }
    }
}

fn print_leading(lead: &LeadingDiagnoses, r: Option<&Reduction>) {
    for (d, p) in lead.entries() {
        println!("{:<24} {p:.4}", describe(d, r));
    }
}

fn print_qp(qp: &seqdiag::QPartition, r: Option<&Reduction>) {
    let cell = |s: &std::collections::BTreeSet<Diagnosis>| {
        s.iter().map(|d| describe(d, r)).collect::<Vec<_>>().join(" ")
    };
    println!("D+: {}", cell(&qp.dplus));
    println!("D-: {}", cell(&qp.dminus));
    println!("D0: {}", cell(&qp.dzero));
}

fn exec(cmd: Cmd) -> Result<ExitCode, String> {
    let e2s = |e: seqdiag::Error| e.to_string();
    match cmd {
        Cmd::Diagnose { file, n } => {
            let (dpi, r) = load(&file)?;
            dpi.check_valid().map_err(e2s)?;
            print_leading(&hs_tree(&dpi, n, None).map_err(e2s)?, r.as_ref());
        }
        Cmd::Qpartition {
            file,
            search,
            brute_force,
        } => {
            let (dpi, r) = load(&file)?;
            dpi.check_valid().map_err(e2s)?;
            let lead = hs_tree(&dpi, search.n, None).map_err(e2s)?;
            let qsm = search.qsm().map_err(e2s)?;
            if brute_force {
                let all = enumerate_cqps(&lead.diagnoses(), DEFAULT_ENUMERATION_CAP).map_err(e2s)?;
                let best = all
                    .iter()
                    .map(|qp| (qp, qsm_value(qsm.measure, qp, &lead)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .ok_or("fewer than two leading diagnoses")?;
                println!("{} canonical q-partitions, best {} = {:.6}", all.len(), qsm.measure, best.1);
                print_qp(best.0, r.as_ref());
            } else {
                let out = search_optimal_qp(&lead, qsm, &[]).map_err(e2s)?;
                println!(
                    "{} = {:.6} ({}), {} generated, {} expanded",
                    qsm.measure,
                    out.value,
                    if out.goal { "within threshold" } else { "best found" },
                    out.stats.generated,
                    out.stats.expanded
                );
                print_qp(&out.qp, r.as_ref());
            }
        }
        Cmd::Query { file, search, query } => {
            let (dpi, r) = load(&file)?;
            let c = config(&search, &query, "single").map_err(e2s)?;
            dpi.check_valid().map_err(e2s)?;
            let lead = hs_tree(&dpi, c.n_leading, None).map_err(e2s)?;
            let q = calc_query(&dpi, &lead, &c, &[]).map_err(e2s)?;
            for f in q.query.sentences() {
                println!("{f}");
            }
            println!("# p(true) = {:.4}, {} = {:.6}", q.p_true, c.qsm.measure, q.value);
            print_qp(&q.qp, r.as_ref());
        }
        Cmd::Reduce { netlist } => {
            let text = std::fs::read_to_string(&netlist).map_err(|e| format!("{}: {e}", netlist.display()))?;
            let r = reduce(&parse_netlist(&text).map_err(e2s)?).map_err(e2s)?;
            for (id, name) in r.mapping() {
                println!("# {} = {name}", id.0);
            }
            print!("{}", serialize_dpi(&r.dpi));
        }
        Cmd::Session {
            file,
            search,
            query,
            goal,
            simulate,
            reference,
            target,
        } => {
            let (dpi, r) = load(&file)?;
            let c = config(&search, &query, &goal).map_err(e2s)?;
            let session = if simulate {
                let oracle = match (reference, target) {
                    (Some(path), None) => {
                        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                        Oracle::Reference(parse_sentence_list(&text).map_err(e2s)?.into_iter().collect())
                    }
                    (None, Some(ids)) => Oracle::Target(Diagnosis::from_ids(&ids)),
                    _ => return Err("--simulate needs --reference <file> or --target <ids>".into()),
                };
                run(dpi, &oracle, c).map_err(e2s)?
            } else {
                interactive(dpi, c, r.as_ref())?
            };
            let transcript = serde_json::to_string_pretty(&session.transcript_json()).map_err(|e| e.to_string())?;
            println!("{transcript}");
            if let Status::Done(d) = session.status() {
                eprintln!("diagnosis {} after {} answers", describe(d, r.as_ref()), session.answered());
            }
        }
        Cmd::Serve { port } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("listening on 0.0.0.0:{port}");
            rt.block_on(seqdiag::service::serve(port)).map_err(|e| e.to_string())?;
        }
        Cmd::Fixtures { verify: true } => {
            let checks = verify::run_all();
            print!("{}", verify::report(&checks));
            if checks.iter().any(|c| !c.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Fixtures { verify: false } => {
            println!("# exk.dpi\n{}", fixtures::EXK_DPI);
            println!("# circuit.net\n{}", fixtures::CIRCUIT_NET);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn interactive(dpi: Dpi, c: SessionConfig, r: Option<&Reduction>) -> Result<Session, String> {
    let mut s = Session::new(dpi, c).map_err(|e| e.to_string())?;
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    while let Some(p) = s.pending() {
        eprintln!("query {} (p(true) = {:.3}):", p.iteration, p.p_true);
        for f in p.query.sentences() {
            eprintln!("  {f}");
        }
        eprint!("true / false / skip? ");
        io::stderr().flush().ok();
        let Some(line) = lines.next() else {
            return Ok(s);
        };
        let line = line.map_err(|e| e.to_string())?;
        match line.trim().parse::<Answer>() {
            Ok(a) => s.step(a).map_err(|e| e.to_string())?,
            Err(e) => eprintln!("{e}"),
        }
    }
    if let Some(d) = s.diagnosis() {
        eprintln!("diagnosis {}", describe(d, r));
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
