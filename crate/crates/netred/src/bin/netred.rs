//! Command-line front end: inspect systems, rank partitions, run the
//! reduction pipelines, simulate, and reproduce the bundled experiments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use netred::clustering::{BasisSource, ClusterInput, FeatureMode};
use netred::mas::realize;
use netred::mor::{pod, MorMethod};
use netred::nonlinear::{
    cluster_reduce_nonlinear, l2_relative_error, lift_trajectory, simulate as simulate_nl,
};
use netred::numerics::{integrate_ode, sym_gen_eig, OdeOptions};
use netred::partition::Partition;
use netred::presets;
use netred::search::{
    heuristic_pipeline, rank_all_partitions, ClusterAlgo, Metric, PipelineConfig, PipelineResult,
    DEFAULT_BUDGET,
};
use netred::stabsep::{decompose_mas, error_realization, h2_norm};
use netred::sysfile::SystemFile;
use netred::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "netred",
    version,
    about = "Clustering-based structure-preserving reduction of network systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print basic graph and spectral facts about a system file.
    GraphInfo {
        file: PathBuf,
    },
    /// Rank every r-cluster partition by relative model error.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        clusters: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::H2)]
        metric: MetricArg,
        #[arg(long, default_value_t = 15)]
        top: usize,
        /// Worker threads; defaults to NETRED_WORKERS or all cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Refuse to enumerate more partitions than this.
        #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
        budget: u64,
        /// Output CSV path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the MOR → clustering pipeline and report partition and errors.
    Cluster {
        file: PathBuf,
        #[arg(long, value_enum)]
        mor: MorArg,
        /// Reduction basis order r_P.
        #[arg(long)]
        order: usize,
        #[arg(long)]
        clusters: usize,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, value_enum, default_value_t = BasisArg::V)]
        basis: BasisArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate the system and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Re-run both bundled experiments end to end, writing CSV artifacts.
    Repro {
        #[arg(long, default_value = "repro_out")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Input signal: "train" (e^-t), "test" (e^(-t/10) sin t), or an
    /// expression in t.
    #[arg(long, default_value = "train")]
    input: String,
    #[arg(long, num_args = 2, default_values_t = [0.0, 20.0])]
    tspan: Vec<f64>,
    /// Uniform output samples over the span.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instead of a trajectory, sweep POD+k-means reductions over these
    /// cluster counts (comma-separated) and emit the error decay.
    #[arg(long)]
    sweep_clusters: Option<String>,
    /// POD modes for the sweep.
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    H2,
    Hinf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MorArg {
    Irka,
    Bt,
    Pod,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Qr,
    Kmeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    V,
    W,
    Vw,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::H2 => Metric::H2,
            MetricArg::Hinf => Metric::Hinf,
        }
    }
}

impl From<MorArg> for MorMethod {
    fn from(m: MorArg) -> Self {
        match m {
            MorArg::Irka => MorMethod::Irka,
            MorArg::Bt => MorMethod::BalancedTruncation,
            MorArg::Pod => MorMethod::Pod,
        }
    }
}

impl From<AlgoArg> for ClusterAlgo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Qr => ClusterAlgo::Qr,
            AlgoArg::Kmeans => ClusterAlgo::Kmeans,
        }
    }
}

impl From<BasisArg> for BasisSource {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::V => BasisSource::V,
            BasisArg::W => BasisSource::W,
            BasisArg::Vw => BasisSource::CombinedSvd,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::BudgetExceeded(_) => 3,
        Error::InvalidCombination(_) => 4,
        Error::Integration { .. } => 5,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::GraphInfo { file } => graph_info(&file),
        Cmd::Enumerate {
            file,
            clusters,
            metric,
            top,
            workers,
            budget,
            out,
        } => enumerate(&file, clusters, metric.into(), top, workers, budget, out.as_deref()),
        Cmd::Cluster {
            file,
            mor,
            order,
            clusters,
            algo,
            basis,
            seed,
        } => cluster(&file, mor, order, clusters, algo.into(), basis.into(), seed),
        Cmd::Simulate(args) => simulate_cmd(&args),
        Cmd::Repro { out, workers, seed } => repro(&out, resolve_workers(workers), seed),
    }
}

fn resolve_workers(cli_value: Option<usize>) -> usize {
    cli_value
        .or_else(|| {
            std::env::var("NETRED_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0)
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn make_signal(spec: &str) -> Result<Box<dyn Fn(f64) -> f64>> {
    match spec {
        presets::TRAIN_INPUT_NAME => Ok(Box::new(presets::train_input)),
        presets::TEST_INPUT_NAME => Ok(Box::new(presets::test_input)),
        expr => {
            let parsed: meval::Expr = expr.parse().map_err(|e| {
                Error::InvalidCombination(format!("cannot parse input expression {expr:?}: {e}"))
            })?;
            let bound = parsed.bind("t").map_err(|e| {
                Error::InvalidCombination(format!(
                    "input expression must be a function of t only: {e}"
                ))
            })?;
            Ok(Box::new(bound))
        }
    }
}

fn graph_info(file: &Path) -> Result<()> {
    let sf = SystemFile::load(file)?;
    let graph = sf.build_graph()?;
    let mats = graph.build_matrices();
    let inertias = match sf.to_linear() {
        Ok(sys) => sys.inertias,
        Err(_) => match sf.to_nonlinear() {
            Ok(sys) => sys.inertias,
            Err(e) => return Err(e),
        },
    };
    let m = DMatrix::from_diagonal(&inertias);
    let (vals, _) = sym_gen_eig(&mats.laplacian, &m)?;
    println!("name: {}", sf.name);
    println!("vertices: {}", graph.n_vertices());
    println!("edges: {}", graph.n_edges());
    println!("connected: {}", graph.is_connected()?);
    if vals.len() >= 2 {
        println!("lambda_2: {:.16e}", vals[1]);
        println!("lambda_n: {:.16e}", vals[vals.len() - 1]);
    }
    Ok(())
}

fn partition_csv_row(rank: usize, err: f64, p: &Partition) -> String {
    format!("{rank},{err:.16e},\"{p}\"\n")
}

fn enumerate(
    file: &Path,
    clusters: usize,
    metric: Metric,
    top: usize,
    workers: Option<usize>,
    budget: u64,
    out: Option<&Path>,
) -> Result<()> {
    let sys = SystemFile::load(file)?.to_linear()?;
    let progress = |done: u128, total: u128| {
        eprintln!("evaluated {done}/{total} partitions");
    };
    let ranked = rank_all_partitions(
        &sys,
        clusters,
        metric,
        top,
        resolve_workers(workers),
        budget as u128,
        Some(&progress),
    )?;
    let mut w = out_writer(out)?;
    w.write_all(b"rank,rel_error,partition\n")?;
    for r in &ranked {
        w.write_all(partition_csv_row(r.rank, r.relative_error, &r.partition).as_bytes())?;
    }
    Ok(())
}

fn cluster(
    file: &Path,
    mor: MorArg,
    order: usize,
    clusters: usize,
    algo: ClusterAlgo,
    basis: BasisSource,
    seed: u64,
) -> Result<()> {
    let sf = SystemFile::load(file)?;
    if sf.is_nonlinear() {
        if !matches!(mor, MorArg::Pod) {
            return Err(Error::InvalidCombination(
                "nonlinear systems support only --mor pod".into(),
            ));
        }
        return cluster_nonlinear(&sf, order, clusters, algo, seed);
    }
    let sys = sf.to_linear()?;
    let cfg = PipelineConfig {
        order,
        clusters,
        method: mor.into(),
        source: basis,
        algo,
        seed,
    };
    let res = heuristic_pipeline(&sys, &cfg)?;
    print_pipeline(&res);
    Ok(())
}

fn print_pipeline(res: &PipelineResult) {
    println!("partition: {}", res.partition);
    println!("h2_rel_error: {:.16e}", res.h2.relative);
    println!("hinf_rel_error: {:.16e}", res.hinf.relative);
    println!("mor_converged: {}", res.mor_diagnostics.converged);
    println!("mor_iterations: {}", res.mor_diagnostics.iterations);
    if let Some(r) = res.h2_rank {
        println!("h2_rank: {r}");
    }
    if let Some(r) = res.hinf_rank {
        println!("hinf_rank: {r}");
    }
}

/// POD snapshots from the training run, block-row clustering, clustered
/// reduction, and L2 errors for both preset inputs.
fn cluster_nonlinear(
    sf: &SystemFile,
    order: usize,
    clusters: usize,
    algo: ClusterAlgo,
    seed: u64,
) -> Result<()> {
    if algo == ClusterAlgo::Qr && clusters != order {
        return Err(Error::InvalidCombination(format!(
            "QR clustering fixes the cluster count to the basis order; got order {order} \
             with {clusters} clusters"
        )));
    }
    let sys = sf.to_nonlinear()?;
    let span = (0.0, 20.0);
    let x0 = DVector::zeros(sys.order());
    let train = broadcast_signal(Box::new(presets::train_input), sys.n_inputs());
    let snap = simulate_nl(&sys, &x0, &train, span, None, &OdeOptions::default())?;
    let basis = pod(&snap.y, order, sys.agent_dim)?;
    let partition = cluster_features(&basis.v, sys.agent_dim, clusters, algo, seed)?;
    let red = cluster_reduce_nonlinear(&sys, &partition)?;
    let test = broadcast_signal(Box::new(presets::test_input), sys.n_inputs());
    let err_train = l2_relative_error(&sys, &red, &partition, &x0, &train, span, 1000)?;
    let err_test = l2_relative_error(&sys, &red, &partition, &x0, &test, span, 1000)?;
    println!("partition: {partition}");
    println!("snapshots: {}", snap.y.ncols());
    println!("l2_rel_error_train: {err_train:.16e}");
    println!("l2_rel_error_test: {err_test:.16e}");
    Ok(())
}

fn cluster_features(
    basis: &DMatrix<f64>,
    block: usize,
    clusters: usize,
    algo: ClusterAlgo,
    seed: u64,
) -> Result<Partition> {
    let input = ClusterInput::new(basis.clone(), block, FeatureMode::BlockRows, BasisSource::V)?;
    match algo {
        ClusterAlgo::Qr => netred::clustering::qr_cluster(&input),
        ClusterAlgo::Kmeans => {
            Ok(netred::clustering::kmeans_cluster(&input, clusters, seed, 50, 300)?.0)
        }
    }
}

fn broadcast_signal(
    f: Box<dyn Fn(f64) -> f64>,
    m: usize,
) -> impl Fn(f64) -> DVector<f64> {
    move |t| DVector::from_element(m, f(t))
}

fn uniform_grid(a: f64, b: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| a + (b - a) * i as f64 / (samples.max(2) - 1) as f64)
        .collect()
}

fn write_trajectory_csv(
    w: &mut dyn Write,
    t: &[f64],
    y: &DMatrix<f64>,
    agent_dim: usize,
) -> Result<()> {
    let n_agents = y.nrows() / agent_dim;
    let mut header = String::from("t");
    for i in 1..=n_agents {
        for a in 1..=agent_dim {
            header.push_str(&format!(",x_{i}_{a}"));
        }
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;
    for (j, &tj) in t.iter().enumerate() {
        let mut line = format!("{tj:.16e}");
        for row in 0..y.nrows() {
            line.push_str(&format!(",{:.16e}", y[(row, j)]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let sf = SystemFile::load(&args.file)?;
    let (t0, t1) = (args.tspan[0], args.tspan[1]);
    let signal = make_signal(&args.input)?;
    if let Some(spec) = &args.sweep_clusters {
        return sweep_clusters(&sf, spec, signal, (t0, t1), args);
    }
    let grid = uniform_grid(t0, t1, args.samples.max(2));
    let mut w = out_writer(args.out.as_deref())?;
    if sf.is_nonlinear() {
        let sys = sf.to_nonlinear()?;
        let u = broadcast_signal(signal, sys.n_inputs());
        let x0 = DVector::zeros(sys.order());
        let sol = simulate_nl(&sys, &x0, &u, (t0, t1), Some(&grid), &OdeOptions::default())?;
        write_trajectory_csv(&mut w, &sol.t, &sol.y, sys.agent_dim)?;
    } else {
        let sys = sf.to_linear()?;
        let r = realize(&sys);
        let n = r.order();
        let e_lu = r.e.clone().lu();
        let a_pre = e_lu
            .solve(&r.a)
            .ok_or_else(|| Error::Model("singular descriptor matrix".into()))?;
        let b_pre = e_lu
            .solve(&r.b)
            .ok_or_else(|| Error::Model("singular descriptor matrix".into()))?;
        let m = r.b.ncols();
        let mut rhs = |t: f64, x: &DVector<f64>| -> DVector<f64> {
            &a_pre * x + &b_pre * DVector::from_element(m, signal(t))
        };
        let mut jac = |_t: f64, _x: &DVector<f64>| -> DMatrix<f64> { a_pre.clone() };
        let x0 = DVector::zeros(n);
        let sol = integrate_ode(
            &mut rhs,
            Some(&mut jac),
            (t0, t1),
            &x0,
            Some(&grid),
            &OdeOptions::default(),
        )?;
        write_trajectory_csv(&mut w, &sol.t, &sol.y, sys.agent.dim())?;
    }
    Ok(())
}

/// Reduced-vs-full L2 error for a list of cluster counts (nonlinear systems).
fn sweep_clusters(
    sf: &SystemFile,
    spec: &str,
    signal: Box<dyn Fn(f64) -> f64>,
    span: (f64, f64),
    args: &SimulateArgs,
) -> Result<()> {
    if !sf.is_nonlinear() {
        return Err(Error::InvalidCombination(
            "--sweep-clusters applies to nonlinear systems".into(),
        ));
    }
    let counts: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| {
                Error::InvalidCombination(format!("bad cluster count {s:?} in --sweep-clusters"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = sf.to_nonlinear()?;
    let x0 = DVector::zeros(sys.order());
    let train = broadcast_signal(Box::new(presets::train_input), sys.n_inputs());
    let snap = simulate_nl(&sys, &x0, &train, span, None, &OdeOptions::default())?;
    let basis = pod(&snap.y, args.order, sys.agent_dim)?;
    let eval = broadcast_signal(signal, sys.n_inputs());

    let mut w = out_writer(args.out.as_deref())?;
    w.write_all(b"clusters,l2_rel_error\n")?;
    for &k in &counts {
        let partition =
            cluster_features(&basis.v, sys.agent_dim, k, ClusterAlgo::Kmeans, args.seed)?;
        let red = cluster_reduce_nonlinear(&sys, &partition)?;
        let err = l2_relative_error(&sys, &red, &partition, &x0, &eval, span, args.samples)?;
        w.write_all(format!("{k},{err:.16e}\n").as_bytes())?;
        eprintln!("clusters {k}: l2_rel_error {err:.6e}");
    }
    Ok(())
}

fn repro(out_dir: &Path, workers: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    eprintln!("[1/6] exhaustive H2 ranking of the 10-vertex network");
    let sys = presets::small_network().to_linear()?;
    let progress = |done: u128, total: u128| {
        if done % 10_000 == 0 || done == total {
            eprintln!("  {done}/{total}");
        }
    };
    let h2_table = rank_all_partitions(
        &sys,
        5,
        Metric::H2,
        100,
        workers,
        DEFAULT_BUDGET,
        Some(&progress),
    )?;
    write_table(&out_dir.join("table1_h2.csv"), &h2_table[..15])?;

    eprintln!("[2/6] exhaustive Hinf ranking");
    let hinf_table = rank_all_partitions(
        &sys,
        5,
        Metric::Hinf,
        100,
        workers,
        DEFAULT_BUDGET,
        Some(&progress),
    )?;
    write_table(&out_dir.join("table1_hinf.csv"), &hinf_table[..15])?;

    eprintln!("[3/6] IRKA quality on the asymptotically stable part");
    let decomp = decompose_mas(&sys)?;
    let h2_full = h2_norm(&decomp.stable)?;
    let mut irka_csv = String::from("seed,rel_error,converged,iterations\n");
    for s in 0..5u64 {
        let b = netred::mor::irka(&decomp.stable, 5, 200, 1e-6, s)?;
        let er = b.w.transpose() * &decomp.stable.e * &b.v;
        let ar = b.w.transpose() * &decomp.stable.a * &b.v;
        let br = b.w.transpose() * &decomp.stable.b;
        let cr = &decomp.stable.c * &b.v;
        let red = netred::mas::LtiRealization { e: er, a: ar, b: br, c: cr };
        let err = error_realization(&decomp.stable, &red);
        let rel = h2_norm(&err)? / h2_full;
        irka_csv.push_str(&format!(
            "{s},{rel:.16e},{},{}\n",
            b.diagnostics.converged, b.diagnostics.iterations
        ));
    }
    std::fs::write(out_dir.join("irka_stable.csv"), irka_csv)?;

    eprintln!("[4/6] heuristic pipelines");
    let combos: &[(MorMethod, BasisSource, ClusterAlgo, &str, &str, &str)] = &[
        (MorMethod::Irka, BasisSource::V, ClusterAlgo::Qr, "irka", "v", "qr"),
        (MorMethod::Irka, BasisSource::W, ClusterAlgo::Qr, "irka", "w", "qr"),
        (MorMethod::Irka, BasisSource::V, ClusterAlgo::Kmeans, "irka", "v", "kmeans"),
        (MorMethod::Irka, BasisSource::W, ClusterAlgo::Kmeans, "irka", "w", "kmeans"),
        (MorMethod::Irka, BasisSource::CombinedSvd, ClusterAlgo::Kmeans, "irka", "vw", "kmeans"),
        (MorMethod::BalancedTruncation, BasisSource::V, ClusterAlgo::Qr, "bt", "v", "qr"),
        (MorMethod::BalancedTruncation, BasisSource::V, ClusterAlgo::Kmeans, "bt", "v", "kmeans"),
        (
            MorMethod::BalancedTruncation,
            BasisSource::CombinedSvd,
            ClusterAlgo::Kmeans,
            "bt",
            "vw",
            "kmeans",
        ),
    ];
    let mut pipe_csv = String::from("mor,basis,algo,partition,h2_rel_error,hinf_rel_error,h2_rank,hinf_rank\n");
    for &(method, source, algo, mname, bname, aname) in combos {
        let cfg = PipelineConfig { order: 5, clusters: 5, method, source, algo, seed };
        let mut res = heuristic_pipeline(&sys, &cfg)?;
        res.attach_ranks(Some(&h2_table), Some(&hinf_table));
        let fmt_rank = |r: Option<usize>| r.map(|v| v.to_string()).unwrap_or_else(|| ">100".into());
        pipe_csv.push_str(&format!(
            "{mname},{bname},{aname},\"{}\",{:.16e},{:.16e},{},{}\n",
            res.partition,
            res.h2.relative,
            res.hinf.relative,
            fmt_rank(res.h2_rank),
            fmt_rank(res.hinf_rank),
        ));
    }
    std::fs::write(out_dir.join("pipelines.csv"), pipe_csv)?;

    eprintln!("[5/6] Van der Pol lattice: training run, POD, k-means");
    let vdp = presets::vanderpol_grid()?.to_nonlinear()?;
    let span = (0.0, 20.0);
    let x0 = DVector::zeros(vdp.order());
    let train = broadcast_signal(Box::new(presets::train_input), vdp.n_inputs());
    let test = broadcast_signal(Box::new(presets::test_input), vdp.n_inputs());
    let snap = simulate_nl(&vdp, &x0, &train, span, None, &OdeOptions::default())?;
    {
        let grid = uniform_grid(span.0, span.1, 1000);
        let sol = simulate_nl(&vdp, &x0, &train, span, Some(&grid), &OdeOptions::default())?;
        let mut f = std::fs::File::create(out_dir.join("vdp_trajectory_train.csv"))?;
        write_trajectory_csv(&mut f, &sol.t, &sol.y, vdp.agent_dim)?;
    }
    let (_, svals, _) = netred::numerics::svd(&snap.y)?;
    let mut sv_csv = String::from("index,sigma\n");
    for (i, s) in svals.iter().enumerate() {
        sv_csv.push_str(&format!("{},{s:.16e}\n", i + 1));
    }
    std::fs::write(out_dir.join("vdp_pod_sv.csv"), sv_csv)?;

    let basis = pod(&snap.y, 2, vdp.agent_dim)?;
    let p10 = cluster_features(&basis.v, vdp.agent_dim, 10, ClusterAlgo::Kmeans, seed)?;
    let red10 = cluster_reduce_nonlinear(&vdp, &p10)?;
    {
        let grid = uniform_grid(span.0, span.1, 1000);
        let full = simulate_nl(&vdp, &x0, &test, span, Some(&grid), &OdeOptions::default())?;
        let x0h = netred::nonlinear::project_state(&vdp, &p10, &x0);
        let redsol = simulate_nl(&red10, &x0h, &test, span, Some(&grid), &OdeOptions::default())?;
        let lifted = lift_trajectory(&p10, vdp.agent_dim, &redsol.y);
        let mut err_csv = String::from("t,max_abs_error\n");
        for j in 0..grid.len() {
            let mut worst = 0.0f64;
            for i in 0..full.y.nrows() {
                worst = worst.max((full.y[(i, j)] - lifted[(i, j)]).abs());
            }
            err_csv.push_str(&format!("{:.16e},{worst:.16e}\n", grid[j]));
        }
        std::fs::write(out_dir.join("vdp_error_k10.csv"), err_csv)?;
        eprintln!("  k=10 partition: {p10}");
    }

    eprintln!("[6/6] Van der Pol error decay over cluster counts");
    let mut decay_csv = String::from("clusters,l2_rel_error\n");
    for &k in &[2usize, 5, 10, 20, 30, 40, 50] {
        let p = cluster_features(&basis.v, vdp.agent_dim, k, ClusterAlgo::Kmeans, seed)?;
        let red = cluster_reduce_nonlinear(&vdp, &p)?;
        let err = l2_relative_error(&vdp, &red, &p, &x0, &test, span, 1000)?;
        decay_csv.push_str(&format!("{k},{err:.16e}\n"));
        eprintln!("  clusters {k}: l2_rel_error {err:.6e}");
    }
    std::fs::write(out_dir.join("vdp_l2_decay.csv"), decay_csv)?;
    eprintln!("done; artifacts in {}", out_dir.display());
    Ok(())
}

fn write_table(path: &Path, rows: &[netred::search::RankedPartition]) -> Result<()> {
    let mut s = String::from("rank,rel_error,partition\n");
    for r in rows {
        s.push_str(&partition_csv_row(r.rank, r.relative_error, &r.partition));
    }
    std::fs::write(path, s)?;
    Ok(())
}
