//! Partition recovery from projection bases: column-pivoted-QR clustering
//! and k-means on (block-)rows.

use crate::error::{Error, Result};
use crate::numerics::{qr_column_pivot, svd};
use crate::partition::Partition;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// One feature per matrix row (scalar agents).
    Rows,
    /// One feature per `block_size`-row block, flattened row-major.
    BlockRows,
}

/// Where the basis came from; recorded for diagnostics only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSource {
    V,
    W,
    CombinedSvd,
}

#[derive(Debug, Clone)]
pub struct ClusterInput {
    pub basis: DMatrix<f64>,
    pub block_size: usize,
    pub mode: FeatureMode,
    pub source: BasisSource,
}

impl ClusterInput {
    pub fn new(
        basis: DMatrix<f64>,
        block_size: usize,
        mode: FeatureMode,
        source: BasisSource,
    ) -> Result<Self> {
        if block_size == 0 || basis.nrows() % block_size != 0 {
            return Err(Error::Partition(format!(
                "basis with {} rows cannot be split into blocks of {block_size}",
                basis.nrows()
            )));
        }
        if mode == FeatureMode::Rows && block_size != 1 {
            return Err(Error::Partition(
                "row mode requires block_size 1".into(),
            ));
        }
        Ok(Self { basis, block_size, mode, source })
    }

    pub fn n_agents(&self) -> usize {
        self.basis.nrows() / self.block_size
    }
}

/// One feature row per agent; block mode flattens each agent's
/// `block_size`×r_P block row-major.
pub fn feature_rows(input: &ClusterInput) -> DMatrix<f64> {
    let n_agents = input.n_agents();
    let bs = input.block_size;
    let rp = input.basis.ncols();
    DMatrix::from_fn(n_agents, bs * rp, |i, col| {
        let (a, j) = (col / rp, col % rp);
        input.basis[(i * bs + a, j)]
    })
}

/// First `r` left singular vectors of `[V W]`, for combined-source clustering.
pub fn combined_basis(v: &DMatrix<f64>, w: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    if v.nrows() != w.nrows() {
        return Err(Error::Partition("combined basis: row mismatch".into()));
    }
    let mut cat = DMatrix::<f64>::zeros(v.nrows(), v.ncols() + w.ncols());
    cat.view_mut((0, 0), (v.nrows(), v.ncols())).copy_from(v);
    cat.view_mut((0, v.ncols()), (w.nrows(), w.ncols())).copy_from(w);
    let (u, _, _) = svd(&cat)?;
    if u.ncols() < r {
        return Err(Error::Partition(format!(
            "combined basis: requested {r} singular vectors, have {}",
            u.ncols()
        )));
    }
    Ok(u.columns(0, r).into_owned())
}

/// Cluster by column-pivoted QR of the transposed feature matrix. The first
/// `r_P` pivot agents seed the clusters; everyone else joins the pivot with
/// the largest-magnitude membership coefficient (ties to the lowest pivot).
pub fn qr_cluster(input: &ClusterInput) -> Result<Partition> {
    let features = feature_rows(input);
    let n_agents = features.nrows();
    let k = input.basis.ncols();
    if k > n_agents {
        return Err(Error::Partition(format!(
            "qr_cluster: {k} clusters exceed {n_agents} agents"
        )));
    }
    if k == 0 {
        return Err(Error::Partition("qr_cluster: empty basis".into()));
    }
    let (_, rmat, piv) = qr_column_pivot(&features.transpose())?;
    let diag_min = (0..k).map(|i| rmat[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if diag_min <= 1e-10 * rmat[(0, 0)].abs() {
        return Err(Error::Partition(format!(
            "qr_cluster: feature rank below {k}, cannot seed clusters"
        )));
    }

    let mut labels = vec![0usize; n_agents];
    for (i, &p) in piv.iter().take(k).enumerate() {
        labels[p] = i;
    }
    if k < n_agents {
        let r11 = rmat.view((0, 0), (k, k)).into_owned();
        let r12 = rmat.view((0, k), (k, n_agents - k)).into_owned();
        let memb = r11
            .lu()
            .solve(&r12)
            .ok_or_else(|| Error::Partition("qr_cluster: singular pivot block".into()))?;
        for j in 0..n_agents - k {
            let mut best = 0usize;
            let mut best_val = memb[(0, j)].abs();
            for i in 1..k {
                let val = memb[(i, j)].abs();
                if val > best_val {
                    best_val = val;
                    best = i;
                }
            }
            labels[piv[k + j]] = best;
        }
    }
    Partition::from_labels(&labels)
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// Canonical labels (first occurrence order).
    pub labels: Vec<usize>,
    /// k×d center matrix matching `labels`.
    pub centers: DMatrix<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub seed: u64,
}

fn dist2_to(features: &DMatrix<f64>, i: usize, center: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in center.iter().enumerate() {
        let d = features[(i, j)] - c;
        acc += d * d;
    }
    acc
}

fn dist2_rows(features: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for col in 0..features.ncols() {
        let d = features[(i, col)] - features[(j, col)];
        acc += d * d;
    }
    acc
}

fn weighted_sample(d2: &[f64], tot: f64, rng: &mut ChaCha8Rng) -> usize {
    if tot <= 0.0 {
        return rng.random_range(0..d2.len());
    }
    let target = rng.random::<f64>() * tot;
    let mut acc = 0.0;
    for (i, &w) in d2.iter().enumerate() {
        acc += w;
        if acc > target {
            return i;
        }
    }
    d2.len() - 1
}

/// Greedy k-means++: each new center drawn from a handful of d²-weighted
/// candidates, keeping the one with the lowest resulting potential.
fn kmeanspp(features: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = features.nrows();
    let n_trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut d2: Vec<f64> = (0..n).map(|i| dist2_rows(features, i, first)).collect();
    for _ in 1..k {
        let tot: f64 = d2.iter().sum();
        let mut best_idx = usize::MAX;
        let mut best_pot = f64::INFINITY;
        for _ in 0..n_trials {
            let cand = weighted_sample(&d2, tot, rng);
            let pot: f64 = (0..n)
                .map(|i| d2[i].min(dist2_rows(features, i, cand)))
                .sum();
            if pot < best_pot {
                best_pot = pot;
                best_idx = cand;
            }
        }
        chosen.push(best_idx);
        for i in 0..n {
            d2[i] = d2[i].min(dist2_rows(features, i, best_idx));
        }
    }
    chosen
}

fn assign(features: &DMatrix<f64>, centers: &DMatrix<f64>) -> Vec<usize> {
    (0..features.nrows())
        .map(|i| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for m in 0..centers.nrows() {
                let d = dist2_to(features, i, centers.row(m).transpose().as_slice());
                if d < best_d {
                    best_d = d;
                    best = m;
                }
            }
            best
        })
        .collect()
}

/// Lloyd iterations with empty-cluster repair: a vacated cluster is reseeded
/// with the farthest point of the highest-cost cluster.
fn lloyd(
    features: &DMatrix<f64>,
    mut centers: DMatrix<f64>,
    max_iter: usize,
) -> (Vec<usize>, DMatrix<f64>, f64, usize) {
    let n = features.nrows();
    let k = centers.nrows();
    let d = features.ncols();
    let mut labels: Option<Vec<usize>> = None;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let mut new_labels = assign(features, &centers);

        for ci in 0..k {
            if new_labels.iter().any(|&l| l == ci) {
                continue;
            }
            let mut costs = vec![0.0f64; k];
            for i in 0..n {
                costs[new_labels[i]] +=
                    dist2_to(features, i, centers.row(new_labels[i]).transpose().as_slice());
            }
            let big = costs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let far = (0..n)
                .filter(|&i| new_labels[i] == big)
                .max_by(|&a, &b| {
                    dist2_to(features, a, centers.row(big).transpose().as_slice())
                        .total_cmp(&dist2_to(features, b, centers.row(big).transpose().as_slice()))
                })
                .unwrap_or(0);
            for j in 0..d {
                centers[(ci, j)] = features[(far, j)];
            }
            new_labels[far] = ci;
        }

        if labels.as_deref() == Some(new_labels.as_slice()) {
            break;
        }
        labels = Some(new_labels);
        let current = labels.as_ref().unwrap();
        for m in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| current[i] == m).collect();
            if members.is_empty() {
                continue;
            }
            for j in 0..d {
                let s: f64 = members.iter().map(|&i| features[(i, j)]).sum();
                centers[(m, j)] = s / members.len() as f64;
            }
        }
    }

    let labels = labels.unwrap_or_else(|| assign(features, &centers));
    let cost: f64 = (0..n)
        .map(|i| dist2_to(features, i, centers.row(labels[i]).transpose().as_slice()))
        .sum();
    (labels, centers, cost, iterations)
}

fn canon(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; labels.len()];
    let mut next = 0usize;
    labels
        .iter()
        .map(|&l| {
            *map[l].get_or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

/// K-means over `n_init` restarts sharing one seeded RNG. Among restart
/// outcomes whose cost is within 10% of the best, the most frequent
/// partition wins (cost, then label order, break remaining ties); this keeps
/// the selection stable across seeds on plateaus of near-equal local minima.
pub fn kmeans_cluster(
    input: &ClusterInput,
    r: usize,
    seed: u64,
    n_init: usize,
    max_iter: usize,
) -> Result<(Partition, KMeansResult)> {
    let features = feature_rows(input);
    let n = features.nrows();
    if r == 0 || r > n {
        return Err(Error::Partition(format!(
            "kmeans_cluster: cluster count {r} out of range for {n} agents"
        )));
    }
    if n_init == 0 {
        return Err(Error::Partition("kmeans_cluster: n_init must be positive".into()));
    }
    let d = features.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    struct Outcome {
        count: usize,
        cost: f64,
        centers: DMatrix<f64>,
        iterations: usize,
    }
    let mut outcomes: BTreeMap<Vec<usize>, Outcome> = BTreeMap::new();

    for _ in 0..n_init {
        let seeds = kmeanspp(&features, r, &mut rng);
        let centers0 = DMatrix::from_fn(r, d, |m, j| features[(seeds[m], j)]);
        let (labels, centers, cost, iterations) = lloyd(&features, centers0, max_iter);
        let key = canon(&labels);
        outcomes
            .entry(key)
            .and_modify(|o| {
                o.count += 1;
                if cost < o.cost {
                    o.cost = cost;
                    o.centers = centers.clone();
                    o.iterations = iterations;
                }
            })
            .or_insert(Outcome { count: 1, cost, centers, iterations });
    }

    let cmin = outcomes
        .values()
        .map(|o| o.cost)
        .fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<(&Vec<usize>, &Outcome)> = outcomes
        .iter()
        .filter(|(_, o)| o.cost <= 1.1 * cmin)
        .collect();
    candidates.sort_by(|a, b| {
        b.1.count
            .cmp(&a.1.count)
            .then(a.1.cost.total_cmp(&b.1.cost))
            .then(a.0.cmp(b.0))
    });
    let (labels, best) = candidates[0];

    // Reorder centers to match the canonical labels.
    let raw_centers = &best.centers;
    let mut centers = DMatrix::<f64>::zeros(r, d);
    let mut seen = vec![false; r];
    let raw_assign = assign(&features, raw_centers);
    for i in 0..n {
        let c = labels[i];
        if !seen[c] {
            seen[c] = true;
            for j in 0..d {
                centers[(c, j)] = raw_centers[(raw_assign[i], j)];
            }
        }
    }

    let partition = Partition::from_labels(labels)?;
    Ok((
        partition,
        KMeansResult {
            labels: labels.clone(),
            centers,
            cost: best.cost,
            iterations: best.iterations,
            seed,
        },
    ))
}

/// Evaluate the k-means cost of `p` on the rows of an orthonormal `v` and
/// the matching projection residual `‖(I − Π_P)V‖_F²`; the two agree
/// analytically.
pub fn kmeans_cost_equals_projection_bound(
    v: &DMatrix<f64>,
    p: &Partition,
) -> Result<(f64, f64)> {
    let n = v.nrows();
    if p.n_vertices() != n {
        return Err(Error::Partition("partition size does not match basis rows".into()));
    }
    let gram = v.transpose() * v;
    let mut dev = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - target).abs());
        }
    }
    if dev > 1e-8 {
        return Err(Error::Partition(format!(
            "kmeans cost identity requires orthonormal columns (deviation {dev:.2e})"
        )));
    }

    let mut cost = 0.0f64;
    for cluster in p.clusters() {
        let size = cluster.len() as f64;
        for j in 0..v.ncols() {
            let mean: f64 = cluster.iter().map(|&i| v[(i, j)]).sum::<f64>() / size;
            for &i in cluster {
                let d = v[(i, j)] - mean;
                cost += d * d;
            }
        }
    }

    let pc = p.characteristic_matrix();
    let gram_p = (pc.transpose() * &pc)
        .try_inverse()
        .ok_or_else(|| Error::Partition("singular PᵀP".into()))?;
    let residual = v - &pc * gram_p * pc.transpose() * v;
    let bound = residual.iter().map(|x| x * x).sum::<f64>();
    Ok((cost, bound))
}
