use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};

use binpack3d_client::{Client, ClientError};
use binpack3d_core::api::{BenchRequest, EpisodeRequest, IndustrialRequest, SyntheticRequest};
use binpack3d_core::sim::{
    collection_to_csv, load_collection, metrics_csv, summary_table, write_model_files, BenchSpec, EpisodeConfig,
    MetricsRow, Trace, TraceIssue,
};
use binpack3d_core::{is_feasible, BinState, BoxDims, Policy, PolicyKind, RobotConfig, SelectionRule};

use crate::args::{BenchArgs, BinArgs, Cli, Command, ExportArgs, GenCommand, PolicyArgs, Selection, Switch};
use crate::Failure;

pub async fn run(cli: Cli) -> Result<u8, Failure> {
    if let Command::Serve { addr } = cli.command {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        println!("listening on http://{}", listener.local_addr().context("local address")?);
        axum::serve(listener, binpack3d_server::router()).await.context("serving")?;
        return Ok(0);
    }
    let client = connect(cli.server.as_deref()).await?;
    match cli.command {
        Command::Gen(cmd) => gen(&client, cmd).await,
        Command::Bench(args) => bench(&client, args).await,
        Command::Validate { traces } => validate(&client, &traces).await,
        Command::ExportMilp(args) => export_milp(&client, args).await,
        Command::Serve { .. } => unreachable!("handled above"),
    }
}

async fn connect(server: Option<&str>) -> Result<Client, Failure> {
    let client = match server {
        Some(url) => Client::new(url),
        None => {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.context("binding loopback port")?;
            let addr = listener.local_addr().context("local address")?;
            tokio::spawn(async move {
                let _ = axum::serve(listener, binpack3d_server::router()).await;
            });
            Client::new(format!("http://{addr}"))
        }
    };
    client.health().await.with_context(|| format!("service at {} is not reachable", client.base_url()))?;
    Ok(client)
}

/// Bad requests are the caller's fault, so they exit like usage errors.
fn classify(e: ClientError) -> Failure {
    if e.is_bad_request() {
        Failure::Usage(e.to_string())
    } else {
        Failure::Failed(e.into())
    }
}

fn robot(p: &PolicyArgs) -> RobotConfig {
    RobotConfig {
        forbid_largest_dim_vertical: p.forbid_largest_vertical,
        min_supported_vertices: p.min_support,
        require_cep: p.cep == Switch::On,
        ..RobotConfig::default()
    }
    .with_orientations(&p.orientations.0)
}

fn policy(kind: PolicyKind, p: &PolicyArgs) -> Result<Policy, Failure> {
    let selection = match p.selection {
        Selection::MinScore => SelectionRule::MinScore,
        Selection::FillAdaptive => SelectionRule::FillAdaptive { threshold: 50.0 },
    };
    let policy = Policy {
        weights: p.weights,
        robot: robot(p),
        candidate_mode: p.candidate_mode,
        selection,
        node_budget: p.node_budget,
        ..Policy::new(kind)
    };
    policy.robot.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(policy)
}

fn bin_dims(b: &BinArgs) -> [u32; 3] {
    b.bin_dims.unwrap_or(b.bin_type.dims())
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

async fn gen(client: &Client, cmd: GenCommand) -> Result<u8, Failure> {
    match cmd {
        GenCommand::Synthetic { bins, dims, n, min_side, max_side, seed, out } => {
            if n == 0 || bins == 0 {
                return Err(Failure::Usage("at least one collection of at least one bin is required".into()));
            }
            let bin = BoxDims::new(0, dims[0], dims[1], dims[2]).map_err(|e| Failure::Usage(e.to_string()))?;
            for k in 0..n {
                let req = SyntheticRequest { bin: dims, n_bins: bins, min_side, max_side, seed: seed + k as u64 };
                let c = client.synthetic(&req).await.map_err(classify)?;
                let fills = certificate_fills(&c.certificate, bin, bins)?;
                let volume: u64 = c.boxes.iter().map(BoxDims::grid_volume).sum();
                let path = out.join(format!("synthetic_{k:03}.csv"));
                write(&path, &collection_to_csv(&c.boxes))?;
                let exact = volume == bins as u64 * bin.grid_volume();
                let full = fills.iter().all(|f| *f == 100.0);
                println!(
                    "{}: {} boxes, volume {volume} ({}), certificate fill {}",
                    path.display(),
                    c.boxes.len(),
                    if exact { "exact" } else { "MISMATCH" },
                    if full { "100.0% in every bin".to_string() } else { format!("{fills:?}") },
                );
                if !exact || !full {
                    return Err(Failure::Failed(anyhow!("certificate check failed for {}", path.display())));
                }
            }
        }
        GenCommand::Industrial { bin_type, target_bins, n, seed, out } => {
            if n == 0 || target_bins == 0 {
                return Err(Failure::Usage("at least one collection of at least one bin is required".into()));
            }
            for k in 0..n {
                let req = IndustrialRequest { bin_type, target_bins, seed: seed + k as u64 };
                let boxes = client.industrial(&req).await.map_err(classify)?;
                let path = out.join(format!("industrial_{}_{k:03}.csv", bin_type.name().to_lowercase()));
                write(&path, &collection_to_csv(&boxes))?;
                let total: f64 = boxes.iter().map(BoxDims::accounted_volume).sum();
                println!("{}: {} boxes, true volume {total:.1}", path.display(), boxes.len());
            }
        }
    }
    Ok(0)
}

/// Replays a synthetic certificate through the feasibility check and
/// returns the fill rate of each source bin.
fn certificate_fills(cert: &[binpack3d_core::Placement], bin: BoxDims, n_bins: usize) -> Result<Vec<f64>, Failure> {
    let mut bins: Vec<BinState> = (1..=n_bins).map(|j| BinState::new(bin, j, j as u64)).collect();
    let cfg = RobotConfig::default();
    for p in cert {
        let target = bins.get_mut(p.bin_index - 1).ok_or_else(|| anyhow!("certificate names bin {}", p.bin_index))?;
        let verdict = is_feasible(target, p, &cfg);
        if !verdict.is_ok() {
            return Err(Failure::Failed(anyhow!("certificate placement of box {} is infeasible: {:?}", p.id(), verdict.violations)));
        }
        target.push(*p);
    }
    Ok(bins.iter().map(BinState::fill_rate).collect())
}

fn read_collections(dir: &Path) -> Result<Vec<Vec<BoxDims>>, Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!("no .csv collections in {}", dir.display())));
    }
    paths.iter().map(|p| load_collection(p).map_err(|e| Failure::Failed(e.into()))).collect()
}

fn episode_config(kind: PolicyKind, p: &PolicyArgs, b: &BinArgs, lookahead: usize) -> Result<EpisodeConfig, Failure> {
    Ok(EpisodeConfig {
        policy: policy(kind, p)?,
        lookahead,
        open_bins: b.open_bins,
        bin: bin_dims(b),
        count_open_at_end: b.count_open_at_end,
        record_timing: !b.no_timing,
    })
}

async fn bench(client: &Client, args: BenchArgs) -> Result<u8, Failure> {
    let collections = read_collections(&args.collections)?;
    let template = policy(PolicyKind::FirstFit, &args.policy)?;
    let mut spec = BenchSpec::new(
        args.policies.0.clone(),
        args.lookaheads.0.clone(),
        args.seeds.0.clone(),
        args.bin.bin_type.name(),
        bin_dims(&args.bin),
    );
    spec.template = template;
    spec.open_bins = args.bin.open_bins;
    spec.count_open_at_end = args.bin.count_open_at_end;
    spec.record_timing = !args.bin.no_timing;
    spec.keep_traces = true;
    spec.threads = args.threads;
    let episodes = spec.episodes();
    let resp = client.bench(&BenchRequest { spec, collections: collections.clone() }).await.map_err(classify)?;

    let rows: Vec<MetricsRow> = resp.episodes.iter().map(|e| e.row.clone()).collect();
    write(&args.out.join("metrics.csv"), &metrics_csv(&rows))?;
    for e in &resp.episodes {
        if let Some(trace) = &e.trace {
            let name = format!("trace_{}_l{}_s{}.json", e.row.policy, e.row.lookahead, e.row.seed);
            write(&args.out.join("traces").join(name), &trace.to_json())?;
        }
    }
    println!("{episodes} episodes on {} collection(s), bin {}", collections.len(), args.bin.bin_type);
    print!("{}", summary_table(&resp.summary));
    println!("metrics: {}", args.out.join("metrics.csv").display());

    if let Some(dir) = &args.export_milp {
        for kind in args.policies.0.iter().filter(|k| **k == PolicyKind::Mpack) {
            for &l in &args.lookaheads.0 {
                for (k, &seed) in args.seeds.0.iter().enumerate() {
                    let config = episode_config(*kind, &args.policy, &args.bin, l)?;
                    let collection = collections[k % collections.len()].clone();
                    let r = client.export_milp(&EpisodeRequest { collection, config, seed }).await.map_err(classify)?;
                    let sub = dir.join(format!("{kind}_l{l}_s{seed}"));
                    write_model_files(&sub, &r.files).map_err(|e| Failure::Failed(e.into()))?;
                }
            }
        }
    }
    Ok(0)
}

async fn validate(client: &Client, traces: &[PathBuf]) -> Result<u8, Failure> {
    let mut dirty = 0;
    for path in traces {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let trace = Trace::from_json(&text).with_context(|| format!("{}", path.display()))?;
        let report = client.validate(&trace).await.map_err(classify)?;
        if report.is_clean() {
            println!("{}: clean ({} records)", path.display(), report.records);
            continue;
        }
        dirty += 1;
        let stability = report.count(|i| matches!(i, TraceIssue::Stability { .. }));
        println!(
            "{}: {} violation(s), {stability} stability, over {} records",
            path.display(),
            report.violations.len(),
            report.records
        );
        for v in &report.violations {
            println!("  step {} box {}: {:?}", v.step, v.box_id, v.issue);
        }
    }
    Ok(if dirty == 0 { 0 } else { 1 })
}

async fn export_milp(client: &Client, args: ExportArgs) -> Result<u8, Failure> {
    let collection = load_collection(&args.collection).map_err(|e| Failure::Failed(e.into()))?;
    let config = episode_config(PolicyKind::Mpack, &args.policy, &args.bin, args.lookahead)?;
    let r = client.export_milp(&EpisodeRequest { collection, config, seed: args.seed }).await.map_err(classify)?;
    write_model_files(&args.export_milp, &r.files).map_err(|e| Failure::Failed(e.into()))?;
    println!("wrote {} model file(s) to {} ({} boxes packed)", r.files.len(), args.export_milp.display(), r.boxes_packed);
    Ok(0)
}
