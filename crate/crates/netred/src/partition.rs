//! Vertex partitions, characteristic matrices, and exhaustive enumeration of
//! all partitions into exactly `r` clusters.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt;

/// Partition of `{1..n}` into nonempty clusters, kept in canonical form:
/// clusters ordered by smallest member, members ascending. Members are stored
/// 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    clusters: Vec<Vec<usize>>,
}

impl Partition {
    /// From explicit clusters with 1-based members (the form partitions are
    /// written in). Validates disjointness and coverage.
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            if cluster.is_empty() {
                return Err(Error::Partition("empty cluster".into()));
            }
            let mut members = Vec::with_capacity(cluster.len());
            for &v in cluster {
                if v < 1 || v > n {
                    return Err(Error::Partition(format!(
                        "vertex {v} outside 1..={n}"
                    )));
                }
                if seen[v - 1] {
                    return Err(Error::Partition(format!("vertex {v} appears twice")));
                }
                seen[v - 1] = true;
                members.push(v - 1);
            }
            members.sort_unstable();
            canon.push(members);
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::Partition(format!("vertex {} not covered", v + 1)));
        }
        canon.sort_unstable_by_key(|c| c[0]);
        Ok(Self { n, clusters: canon })
    }

    /// From a per-vertex label array; label values are arbitrary and get
    /// compacted into canonical cluster order.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Partition("empty label array".into()));
        }
        let mut order: Vec<usize> = Vec::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (v, &lab) in labels.iter().enumerate() {
            match order.iter().position(|&l| l == lab) {
                Some(k) => clusters[k].push(v),
                None => {
                    order.push(lab);
                    clusters.push(vec![v]);
                }
            }
        }
        clusters.sort_unstable_by_key(|c| c[0]);
        Ok(Self {
            n: labels.len(),
            clusters,
        })
    }

    /// Parse the textual form `{{1, 8}, {2, 3}, {4}}` (whitespace optional).
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .ok_or_else(|| Error::Partition(format!("malformed partition `{s}`")))?;
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(',').trim();
            if rest.is_empty() {
                break;
            }
            let open = rest
                .find('{')
                .ok_or_else(|| Error::Partition(format!("malformed partition `{s}`")))?;
            let close = rest[open..]
                .find('}')
                .map(|k| open + k)
                .ok_or_else(|| Error::Partition(format!("malformed partition `{s}`")))?;
            let body = &rest[open + 1..close];
            let mut members = Vec::new();
            for tok in body.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::Partition(format!("bad vertex id `{tok}`")))?;
                members.push(v);
            }
            clusters.push(members);
            rest = rest[close + 1..].trim();
        }
        Self::from_clusters(n, &clusters)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Canonical clusters, 0-based members.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn clusters_one_based(&self) -> Vec<Vec<usize>> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|&v| v + 1).collect())
            .collect()
    }

    /// Cluster index of each vertex (0-based both ways).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0usize; self.n];
        for (k, cluster) in self.clusters.iter().enumerate() {
            for &v in cluster {
                labels[v] = k;
            }
        }
        labels
    }

    /// n×r binary characteristic matrix; column k marks cluster k.
    pub fn characteristic_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::<f64>::zeros(self.n, self.clusters.len());
        for (k, cluster) in self.clusters.iter().enumerate() {
            for &v in cluster {
                p[(v, k)] = 1.0;
            }
        }
        p
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, cluster) in self.clusters.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (i, &v) in cluster.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", v + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// Stirling number of the second kind S(n, r), exact.
pub fn count_partitions(n: usize, r: usize) -> Result<u128> {
    if r > n || n > 30 {
        return Err(Error::Partition(format!(
            "count_partitions requires r <= n <= 30, got n={n} r={r}"
        )));
    }
    // S(n, r) = r·S(n−1, r) + S(n−1, r−1)
    let mut row = vec![0u128; r + 1];
    row[0] = 1;
    for _ in 1..=n {
        let mut next = vec![0u128; r + 1];
        for k in 1..=r {
            let t = (k as u128)
                .checked_mul(row[k])
                .and_then(|v| v.checked_add(row[k - 1]))
                .ok_or_else(|| Error::Partition("Stirling number overflow".into()))?;
            next[k] = t;
        }
        row = next;
    }
    Ok(row[r])
}

/// Iterator over all partitions of `{1..n}` into exactly `r` clusters, in
/// restricted-growth-string lexicographic order.
pub struct PartitionIter {
    n: usize,
    r: usize,
    /// Current restricted growth string, or None when exhausted.
    rgs: Option<Vec<usize>>,
}

impl PartitionIter {
    fn first(n: usize, r: usize) -> Vec<usize> {
        // Smallest RGS with exactly r values: zeros, then 1,2,…,r−1 at the tail.
        let mut a = vec![0usize; n];
        for k in 0..r {
            a[n - r + k] = k;
        }
        a
    }

    fn advance(&mut self) {
        let Some(a) = self.rgs.as_mut() else { return };
        let (n, r) = (self.n, self.r);
        // Prefix maxima up to each position.
        let mut pmax = vec![0usize; n];
        let mut m = 0;
        for i in 0..n {
            m = m.max(a[i]);
            pmax[i] = m;
        }
        // Find rightmost position (>0) that can be incremented while a valid
        // completion to exactly r values still exists.
        let mut pos = n;
        for i in (1..n).rev() {
            let prior_max = pmax[i - 1];
            let cand = a[i] + 1;
            if cand > prior_max + 1 || cand > r - 1 {
                continue;
            }
            // After setting a[i]=cand, values used ≥ prior_max.max(cand)+1;
            // remaining n−1−i positions must cover the rest.
            let used = prior_max.max(cand) + 1;
            if used + (n - 1 - i) >= r {
                pos = i;
                break;
            }
        }
        if pos == n {
            self.rgs = None;
            return;
        }
        a[pos] += 1;
        let mut cur_max = pmax[pos - 1].max(a[pos]);
        for q in pos + 1..n {
            let need = r - 1 - cur_max; // new values still missing
            let left = n - q;
            if need >= left {
                cur_max += 1;
                a[q] = cur_max;
            } else {
                a[q] = 0;
            }
        }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let labels = self.rgs.clone()?;
        self.advance();
        Some(Partition::from_labels(&labels).expect("RGS is always a valid labeling"))
    }
}

/// All partitions of `{1..n}` into exactly `r` clusters.
pub fn enumerate_partitions(n: usize, r: usize) -> Result<PartitionIter> {
    if r < 1 || r > n {
        return Err(Error::Partition(format!(
            "need 1 <= r <= n, got n={n} r={r}"
        )));
    }
    Ok(PartitionIter {
        n,
        r,
        rgs: Some(PartitionIter::first(n, r)),
    })
}
