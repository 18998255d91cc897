//! Exhaustive partition ranking and the heuristic MOR → cluster → evaluate
//! pipeline.

use crate::clustering::{
    combined_basis, kmeans_cluster, qr_cluster, BasisSource, ClusterInput, FeatureMode,
};
use crate::error::{Error, Result};
use crate::mas::{cluster_reduce, realize, LinearMas};
use crate::mor::{balanced_truncation, irka, Diagnostics, MorMethod};
use crate::numerics::orthonormalize;
use crate::partition::{count_partitions, enumerate_partitions, Partition};
use crate::stabsep::{
    check_unstable_match, decompose_mas, error_realization, h2_error, h2_norm, hinf_error,
    hinf_norm, transfer_sv_max, NormError, StableDecomposition,
};
use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    H2,
    Hinf,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::H2 => write!(f, "h2"),
            Metric::Hinf => write!(f, "hinf"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankedPartition {
    /// 1-based position in the sorted census.
    pub rank: usize,
    pub metric: Metric,
    pub relative_error: f64,
    pub partition: Partition,
}

/// Partition-count ceiling for the exhaustive search.
pub const DEFAULT_BUDGET: u128 = 1_000_000;
/// Merge/progress granularity.
pub const CHUNK: usize = 1000;
/// How many leading candidates get the refined H∞ evaluation.
const HINF_REFINE: usize = 100;

/// Frequency tolerance used for refined H∞ evaluations.
pub const HINF_TOL: f64 = 1e-6;

fn coarse_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(201);
    g.push(0.0);
    for i in 0..200 {
        g.push(10f64.powf(-3.0 + 6.0 * i as f64 / 199.0));
    }
    g
}

/// Relative error of one clustered model against the shared original
/// decomposition; H∞ uses the supplied frequency grid without refinement.
fn eval_partition(
    sys: &LinearMas,
    d_orig: &StableDecomposition,
    denom: f64,
    metric: Metric,
    grid: &[f64],
    p: &Partition,
) -> Result<f64> {
    let reduced = cluster_reduce(sys, p)?;
    let d_red = decompose_mas(&reduced)?;
    check_unstable_match(d_orig, &d_red)?;
    let err = error_realization(&d_orig.stable, &d_red.stable);
    let absolute = match metric {
        Metric::H2 => h2_norm(&err)?,
        Metric::Hinf => grid
            .iter()
            .map(|&w| transfer_sv_max(&err, w))
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(absolute / denom)
}

/// Rank every `r`-cluster partition by relative error, ascending, ties
/// broken by canonical partition order. Work proceeds in `CHUNK`-sized
/// batches (parallel inside each batch, merged in enumeration order, so the
/// output is independent of the worker count); `progress` is invoked after
/// each merged batch with (evaluated, total). H∞ runs two-stage: a coarse
/// 200-point sweep over all partitions, then full refinement of the leading
/// `max(100, top_k)` candidates.
pub fn rank_all_partitions(
    sys: &LinearMas,
    r: usize,
    metric: Metric,
    top_k: usize,
    workers: usize,
    budget: u128,
    progress: Option<&(dyn Fn(u128, u128) + Sync)>,
) -> Result<Vec<RankedPartition>> {
    let n = sys.n_agents();
    let total = count_partitions(n, r)?;
    if total > budget {
        return Err(Error::BudgetExceeded(format!(
            "{total} partitions of {n} vertices into {r} clusters exceed the budget of {budget}; \
             use the heuristic pipeline instead"
        )));
    }

    let d_orig = decompose_mas(sys)?;
    let denom = match metric {
        Metric::H2 => h2_norm(&d_orig.stable)?,
        Metric::Hinf => hinf_norm(&d_orig.stable, HINF_TOL),
    };
    if denom <= 0.0 {
        return Err(Error::Model("original stable part has zero norm".into()));
    }
    let grid = coarse_grid();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerics(format!("worker pool: {e}")))?;

    let mut results: Vec<(f64, Partition)> = Vec::with_capacity(total.min(1 << 22) as usize);
    let mut iter = enumerate_partitions(n, r)?;
    loop {
        let chunk: Vec<Partition> = iter.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let evals: Vec<Result<f64>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|p| eval_partition(sys, &d_orig, denom, metric, &grid, p))
                .collect()
        });
        for (p, e) in chunk.into_iter().zip(evals) {
            results.push((e?, p));
        }
        if let Some(cb) = progress {
            cb(results.len() as u128, total);
        }
    }

    if metric == Metric::Hinf {
        let refine = HINF_REFINE.max(top_k).min(results.len());
        let mut order: Vec<usize> = (0..results.len()).collect();
        order.sort_by(|&a, &b| results[a].0.total_cmp(&results[b].0));
        let refined: Vec<(usize, Result<f64>)> = pool.install(|| {
            order[..refine]
                .par_iter()
                .map(|&idx| {
                    let value = (|| {
                        let reduced = cluster_reduce(sys, &results[idx].1)?;
                        let d_red = decompose_mas(&reduced)?;
                        let err = error_realization(&d_orig.stable, &d_red.stable);
                        Ok(hinf_norm(&err, HINF_TOL) / denom)
                    })();
                    (idx, value)
                })
                .collect()
        });
        for (idx, value) in refined {
            results[idx].0 = value?;
        }
    }

    results.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    results.truncate(top_k);
    Ok(results
        .into_iter()
        .enumerate()
        .map(|(i, (relative_error, partition))| RankedPartition {
            rank: i + 1,
            metric,
            relative_error,
            partition,
        })
        .collect())
}

/// 1-based rank of `p` inside a ranking table.
pub fn lookup_rank(table: &[RankedPartition], p: &Partition) -> Option<usize> {
    table.iter().find(|e| &e.partition == p).map(|e| e.rank)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterAlgo {
    Qr,
    Kmeans,
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    /// MOR basis order r_P.
    pub order: usize,
    /// Cluster count r.
    pub clusters: usize,
    pub method: MorMethod,
    pub source: BasisSource,
    pub algo: ClusterAlgo,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub partition: Partition,
    pub h2: NormError,
    pub hinf: NormError,
    pub h2_rank: Option<usize>,
    pub hinf_rank: Option<usize>,
    pub mor_diagnostics: Diagnostics,
}

impl PipelineResult {
    pub fn attach_ranks(&mut self, h2: Option<&[RankedPartition]>, hinf: Option<&[RankedPartition]>) {
        if let Some(t) = h2 {
            self.h2_rank = lookup_rank(t, &self.partition);
        }
        if let Some(t) = hinf {
            self.hinf_rank = lookup_rank(t, &self.partition);
        }
    }
}

/// MOR → clustering → clustered reduction → error evaluation.
///
/// IRKA runs on the full semistable realization (its consensus pole is
/// mirrored into a valid shift, and the resulting basis carries the agent
/// averaging direction that clustering needs); balanced truncation runs on
/// the stable part and its basis is lifted back through the decomposition.
/// Either way the basis is orthonormalized before clustering, which only
/// depends on its span.
pub fn heuristic_pipeline(sys: &LinearMas, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if cfg.algo == ClusterAlgo::Qr && cfg.clusters != cfg.order {
        return Err(Error::InvalidCombination(format!(
            "QR clustering fixes the cluster count to the basis order; got order {} \
             with {} clusters",
            cfg.order, cfg.clusters
        )));
    }
    let n = sys.n_agents();
    if cfg.clusters == 0 || cfg.clusters > n {
        return Err(Error::InvalidCombination(format!(
            "cluster count {} out of range for {n} agents",
            cfg.clusters
        )));
    }

    let (v, w, diagnostics) = match cfg.method {
        MorMethod::Irka => {
            let basis = irka(&realize(sys), cfg.order, 200, 1e-6, cfg.seed)?;
            (basis.v, basis.w, basis.diagnostics)
        }
        MorMethod::BalancedTruncation => {
            let decomp = decompose_mas(sys)?;
            let bt = balanced_truncation(&decomp.stable, cfg.order)?;
            let v = &decomp.t_minus * &bt.basis.v;
            let w = &decomp.s_minus * &bt.basis.w;
            (v, w, bt.basis.diagnostics)
        }
        MorMethod::Pod => {
            return Err(Error::InvalidCombination(
                "POD needs trajectory snapshots; use the nonlinear pipeline".into(),
            ));
        }
    };

    let features: DMatrix<f64> = match cfg.source {
        BasisSource::V => orthonormalize(&v),
        BasisSource::W => orthonormalize(&w),
        BasisSource::CombinedSvd => {
            combined_basis(&orthonormalize(&v), &orthonormalize(&w), cfg.order)?
        }
    };
    let input = ClusterInput::new(features, 1, FeatureMode::Rows, cfg.source)?;
    let partition = match cfg.algo {
        ClusterAlgo::Qr => qr_cluster(&input)?,
        ClusterAlgo::Kmeans => kmeans_cluster(&input, cfg.clusters, cfg.seed, 50, 300)?.0,
    };

    let reduced = cluster_reduce(sys, &partition)?;
    let h2 = h2_error(sys, &reduced)?;
    let hinf = hinf_error(sys, &reduced, HINF_TOL)?;
    Ok(PipelineResult {
        partition,
        h2,
        hinf,
        h2_rank: None,
        hinf_rank: None,
        mor_diagnostics: diagnostics,
    })
}
