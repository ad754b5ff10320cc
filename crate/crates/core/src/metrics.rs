//! External clustering quality: accuracy under the best one-to-one relabeling
//! and normalized mutual information.

use crate::error::{ClusterError, Result};

/// Joint label counts, rows indexed by predicted label, columns by true label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    n: u64,
}

impl ContingencyTable {
    pub fn pred_clusters(&self) -> usize {
        self.rows
    }

    pub fn true_clusters(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn get(&self, pred: usize, truth: usize) -> u64 {
        self.counts[pred * self.cols + truth]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts
            .chunks_exact(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.cols];
        for row in self.counts.chunks_exact(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Counts `|{i : pred_i = a ∧ truth_i = b}|` for every label pair.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(ClusterError::LabelLengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(ClusterError::EmptyDataset);
    }
    let rows = pred.iter().max().map_or(0, |m| m + 1);
    let cols = truth.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0u64; rows * cols];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p * cols + t] += 1;
    }
    Ok(ContingencyTable {
        counts,
        rows,
        cols,
        n: pred.len() as u64,
    })
}

/// Injective map from predicted clusters to true clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    /// `assignment[p]` is the true label matched to predicted label `p`, or
    /// `None` when `p` has no partner.
    pub assignment: Vec<Option<usize>>,
    /// Samples whose mapped prediction equals the truth.
    pub matched: u64,
}

/// Maximum-weight matching of predicted to true labels on the contingency table.
pub fn best_mapping(table: &ContingencyTable) -> LabelMapping {
    let size = table.rows.max(table.cols);
    let max = table.counts.iter().copied().max().unwrap_or(0) as i64;
    // Negated counts padded with zeros to a square cost matrix.
    let mut cost = vec![0i64; size * size];
    for p in 0..size {
        for t in 0..size {
            let w = if p < table.rows && t < table.cols {
                table.get(p, t) as i64
            } else {
                0
            };
            cost[p * size + t] = max - w;
        }
    }
    let cols_for_rows = hungarian_min(&cost, size);
    let mut assignment = vec![None; table.rows];
    let mut matched = 0;
    for (p, slot) in assignment.iter_mut().enumerate() {
        let t = cols_for_rows[p];
        if t < table.cols {
            *slot = Some(t);
            matched += table.get(p, t);
        }
    }
    LabelMapping {
        assignment,
        matched,
    }
}

/// Minimum-cost perfect assignment on a square `size × size` matrix using
/// the shortest augmenting path method with vertex potentials. Returns the
/// column assigned to each row.
pub fn hungarian_min(cost: &[i64], size: usize) -> Vec<usize> {
    assert_eq!(cost.len(), size * size);
    const NONE: usize = usize::MAX;
    // 1-based potentials with a virtual column 0.
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut row_of_col = vec![NONE; size + 1];
    let mut way = vec![0usize; size + 1];

    for row in 0..size {
        row_of_col[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i64::MAX; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[col0] = true;
            let r = row_of_col[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for col in 1..=size {
                if used[col] {
                    continue;
                }
                let reduced = cost[r * size + col - 1] - u[r + 1] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=size {
                if used[col] {
                    u[row_of_col[col] + 1] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == NONE {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut result = vec![0; size];
    for col in 1..=size {
        if row_of_col[col] != NONE {
            result[row_of_col[col]] = col - 1;
        }
    }
    result
}

/// Fraction of samples labeled correctly under the best relabeling.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let mapping = best_mapping(&table);
    Ok(mapping.matched as f64 / table.total() as f64)
}

fn entropy_bits(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Mutual information in bits.
pub fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total() as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let mut mi = 0.0;
    for (p, &rp) in rows.iter().enumerate() {
        for (t, &ct) in cols.iter().enumerate() {
            let joint = table.get(p, t);
            if joint == 0 {
                continue;
            }
            // p(a,b) / (p(a) p(b)) = n·n_ab / (n_a n_b)
            let ratio = (n * joint as f64) / (rp as f64 * ct as f64);
            mi += joint as f64 / n * ratio.log2();
        }
    }
    mi
}

/// `MI / max(H(pred), H(truth))`, clamped to `[0, 1]`.
///
/// Two constant labelings score 1; a constant labeling against a
/// non-constant one scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = table.total() as f64;
    let h_pred = entropy_bits(&table.row_sums(), n);
    let h_true = entropy_bits(&table.col_sums(), n);
    let norm = h_pred.max(h_true);
    if norm == 0.0 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_true == 0.0 {
        return Ok(0.0);
    }
    // Rounding in the sums would otherwise leave this a few ulps below 1.
    if same_up_to_relabeling(&table) {
        return Ok(1.0);
    }
    Ok((mutual_information(&table) / norm).clamp(0.0, 1.0))
}

fn same_up_to_relabeling(table: &ContingencyTable) -> bool {
    let nonzero = |cells: &mut dyn Iterator<Item = u64>| cells.filter(|&v| v > 0).count() <= 1;
    (0..table.pred_clusters())
        .all(|p| nonzero(&mut (0..table.true_clusters()).map(|t| table.get(p, t))))
        && (0..table.true_clusters())
            .all(|t| nonzero(&mut (0..table.pred_clusters()).map(|p| table.get(p, t))))
}
