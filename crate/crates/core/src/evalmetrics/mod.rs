//! Label-agreement measures between a reference labelling and a clustering.
//!
//! All six scores are computed from a shared [`ContingencyTable`]:
//! rand score, adjusted rand score, mutual information, normalized mutual
//! information, cluster accuracy (optimal one-to-one matching) and purity.
//! Every measure is invariant to relabelling either side.

mod hungarian;

pub use hungarian::{max_weight_matching, min_cost_assignment};

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("label length mismatch: true={true_len}, pred={pred_len}")]
    LengthMismatch { true_len: usize, pred_len: usize },
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Normalizer applied to the two entropies in NMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMethod {
    Min,
    Geometric,
    #[default]
    Arithmetic,
    Max,
}

impl AverageMethod {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            AverageMethod::Min => a.min(b),
            AverageMethod::Geometric => (a * b).sqrt(),
            AverageMethod::Arithmetic => 0.5 * (a + b),
            AverageMethod::Max => a.max(b),
        }
    }
}

/// Cell counts `n_ij = |true class i ∩ predicted cluster j|` with marginals.
///
/// Rows and columns follow the sorted order of the distinct label values.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub cells: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(true_labels: &[usize], pred_labels: &[usize]) -> Result<Self, MetricError> {
        if true_labels.len() != pred_labels.len() {
            return Err(MetricError::LengthMismatch {
                true_len: true_labels.len(),
                pred_len: pred_labels.len(),
            });
        }
        let rows = dense_index(true_labels);
        let cols = dense_index(pred_labels);
        let mut cells = vec![vec![0u64; cols.len()]; rows.len()];
        for (t, p) in true_labels.iter().zip(pred_labels) {
            cells[rows[t]][cols[p]] += 1;
        }
        let row_sums: Vec<u64> = cells.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols.len())
            .map(|j| cells.iter().map(|r| r[j]).sum())
            .collect();
        Ok(Self {
            cells,
            row_sums,
            col_sums,
            n: true_labels.len() as u64,
        })
    }

    pub fn k_true(&self) -> usize {
        self.row_sums.len()
    }

    pub fn k_pred(&self) -> usize {
        self.col_sums.len()
    }

    fn nonzero_cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.cells.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(j, &c)| (i, j, c))
        })
    }
}

fn dense_index(labels: &[usize]) -> BTreeMap<usize, usize> {
    labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect()
}

fn comb2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

struct PairSums {
    cells: f64,
    rows: f64,
    cols: f64,
    total: f64,
}

fn pair_sums(table: &ContingencyTable) -> PairSums {
    PairSums {
        cells: table.nonzero_cells().map(|(_, _, c)| comb2(c)).sum(),
        rows: table.row_sums.iter().copied().map(comb2).sum(),
        cols: table.col_sums.iter().copied().map(comb2).sum(),
        total: comb2(table.n),
    }
}

fn checked_table(true_labels: &[usize], pred_labels: &[usize]) -> Result<ContingencyTable, MetricError> {
    let table = ContingencyTable::new(true_labels, pred_labels)?;
    if table.n < 2 {
        return Err(MetricError::TooFewSamples(table.n as usize));
    }
    Ok(table)
}

/// Fraction of sample pairs on which both labellings agree.
pub fn rand_score(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    Ok(rand_from_table(&checked_table(true_labels, pred_labels)?))
}

fn rand_from_table(table: &ContingencyTable) -> f64 {
    let s = pair_sums(table);
    // agreeing = same/same + different/different
    let agreeing = s.total + 2.0 * s.cells - s.rows - s.cols;
    agreeing / s.total
}

/// Rand index corrected for chance. Returns 1.0 when the expected and
/// maximum index coincide.
pub fn adjusted_rand_score(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    Ok(ars_from_table(&checked_table(true_labels, pred_labels)?))
}

fn ars_from_table(table: &ContingencyTable) -> f64 {
    let s = pair_sums(table);
    let expected = s.rows * s.cols / s.total;
    let max_index = 0.5 * (s.rows + s.cols);
    if max_index == expected {
        return 1.0;
    }
    (s.cells - expected) / (max_index - expected)
}

/// Mutual information in nats.
pub fn mutual_info(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    Ok(mi_from_table(&checked_table(true_labels, pred_labels)?))
}

fn mi_from_table(table: &ContingencyTable) -> f64 {
    let n = table.n as f64;
    let mi: f64 = table
        .nonzero_cells()
        .map(|(i, j, c)| {
            let c = c as f64;
            let a = table.row_sums[i] as f64;
            let b = table.col_sums[j] as f64;
            (c / n) * (n * c / (a * b)).ln()
        })
        .sum();
    mi.max(0.0)
}

fn entropy(counts: &[u64], n: u64) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI with arithmetic-mean normalization.
pub fn normalized_mutual_info(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    normalized_mutual_info_with(true_labels, pred_labels, AverageMethod::Arithmetic)
}

pub fn normalized_mutual_info_with(
    true_labels: &[usize],
    pred_labels: &[usize],
    method: AverageMethod,
) -> Result<f64, MetricError> {
    Ok(nmi_from_table(&checked_table(true_labels, pred_labels)?, method))
}

fn nmi_from_table(table: &ContingencyTable, method: AverageMethod) -> f64 {
    let h_true = entropy(&table.row_sums, table.n);
    let h_pred = entropy(&table.col_sums, table.n);
    if h_true == 0.0 && h_pred == 0.0 {
        return 1.0;
    }
    let mi = mi_from_table(table);
    let norm = method.combine(h_true, h_pred);
    if norm <= 0.0 {
        return 0.0;
    }
    (mi / norm).clamp(0.0, 1.0)
}

/// Best one-to-one cluster-to-class matching, as a fraction of samples.
pub fn cluster_accuracy(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    Ok(ca_from_table(&checked_table(true_labels, pred_labels)?))
}

fn ca_from_table(table: &ContingencyTable) -> f64 {
    max_weight_matching(&table.cells) as f64 / table.n as f64
}

/// Each cluster votes for its majority class.
pub fn purity_score(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64, MetricError> {
    Ok(purity_from_table(&checked_table(true_labels, pred_labels)?))
}

fn purity_from_table(table: &ContingencyTable) -> f64 {
    let matched: u64 = (0..table.k_pred())
        .map(|j| table.cells.iter().map(|r| r[j]).max().unwrap_or(0))
        .sum();
    matched as f64 / table.n as f64
}

/// The six scores in RS, ARS, MI, NMI, CA, PS order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rs: f64,
    pub ars: f64,
    pub mi: f64,
    pub nmi: f64,
    pub ca: f64,
    pub ps: f64,
    pub n: usize,
    pub k_true: usize,
    pub k_pred: usize,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 6] = ["RS", "ARS", "MI", "NMI", "CA", "PS"];

    pub fn values(&self) -> [f64; 6] {
        [self.rs, self.ars, self.mi, self.nmi, self.ca, self.ps]
    }
}

pub fn evaluate(true_labels: &[usize], pred_labels: &[usize]) -> Result<MetricReport, MetricError> {
    evaluate_with(true_labels, pred_labels, AverageMethod::Arithmetic)
}

pub fn evaluate_with(
    true_labels: &[usize],
    pred_labels: &[usize],
    nmi_method: AverageMethod,
) -> Result<MetricReport, MetricError> {
    let table = checked_table(true_labels, pred_labels)?;
    Ok(MetricReport {
        rs: rand_from_table(&table),
        ars: ars_from_table(&table),
        mi: mi_from_table(&table),
        nmi: nmi_from_table(&table, nmi_method),
        ca: ca_from_table(&table),
        ps: purity_from_table(&table),
        n: table.n as usize,
        k_true: table.k_true(),
        k_pred: table.k_pred(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rand_examples() {
        assert_eq!(rand_score(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(rand_score(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        // pairs: (0,1) agree, (0,2) agree, (0,3) agree, (1,2) agree, (1,3) agree, (2,3) disagree
        assert_abs_diff_eq!(rand_score(&[0, 0, 1, 2], &[0, 0, 1, 1]).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            rand_score(&[0, 1], &[0]),
            Err(MetricError::LengthMismatch { true_len: 2, pred_len: 1 })
        );
        assert_eq!(purity_score(&[0], &[0]), Err(MetricError::TooFewSamples(1)));
        assert_eq!(evaluate(&[], &[]).unwrap_err(), MetricError::TooFewSamples(0));
    }

    #[test]
    fn ars_examples() {
        assert_eq!(adjusted_rand_score(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_abs_diff_eq!(adjusted_rand_score(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap(), 0.0, epsilon = 1e-15);
        // both single class: expected == max
        assert_eq!(adjusted_rand_score(&[3, 3, 3], &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn ars_lower_bound_case() {
        // maximally discordant 2x2 split attains -0.5
        let ars = adjusted_rand_score(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert_abs_diff_eq!(ars, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn mi_examples() {
        let mi = mutual_info(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert_abs_diff_eq!(mi, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(normalized_mutual_info(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(mutual_info(&[0, 0, 1, 1], &[5, 5, 5, 5]).unwrap(), 0.0);
        assert_eq!(normalized_mutual_info(&[0, 0, 1, 1], &[5, 5, 5, 5]).unwrap(), 0.0);
        assert_eq!(normalized_mutual_info(&[2, 2], &[7, 7]).unwrap(), 1.0);
        let a = mutual_info(&[0, 1, 1, 2, 0], &[0, 1, 0, 1, 1]).unwrap();
        let b = mutual_info(&[0, 1, 1, 2, 0], &[1, 0, 1, 0, 0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nmi_methods_order() {
        let t = [0, 0, 0, 1, 1, 2];
        let p = [0, 0, 1, 1, 1, 1];
        let min = normalized_mutual_info_with(&t, &p, AverageMethod::Min).unwrap();
        let geo = normalized_mutual_info_with(&t, &p, AverageMethod::Geometric).unwrap();
        let ari = normalized_mutual_info_with(&t, &p, AverageMethod::Arithmetic).unwrap();
        let max = normalized_mutual_info_with(&t, &p, AverageMethod::Max).unwrap();
        assert!(min >= geo && geo >= ari && ari >= max);
    }

    #[test]
    fn accuracy_and_purity_examples() {
        assert_eq!(cluster_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(cluster_accuracy(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(purity_score(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(purity_score(&[0, 0, 1, 1], &[0, 1, 2, 3]).unwrap(), 1.0);
        assert_eq!(purity_score(&[4, 4, 2], &[4, 4, 2]).unwrap(), 1.0);
        // singletons: purity 1, accuracy limited by the one-to-one constraint
        assert_eq!(cluster_accuracy(&[0, 0, 1, 1], &[0, 1, 2, 3]).unwrap(), 0.5);
    }

    #[test]
    fn report_order_and_ranges() {
        let r = evaluate(&[0, 0, 1, 1, 2, 2], &[0, 0, 1, 2, 2, 2]).unwrap();
        assert_eq!(r.n, 6);
        assert_eq!((r.k_true, r.k_pred), (3, 3));
        let json = serde_json::to_string(&r).unwrap();
        let pos: Vec<usize> = ["\"rs\"", "\"ars\"", "\"mi\"", "\"nmi\"", "\"ca\"", "\"ps\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn contingency_marginals() {
        let t = ContingencyTable::new(&[9, 9, 3, 3, 3], &[1, 0, 0, 0, 1]).unwrap();
        assert_eq!(t.cells, vec![vec![2, 1], vec![1, 1]]);
        assert_eq!(t.row_sums, vec![3, 2]);
        assert_eq!(t.col_sums, vec![3, 2]);
        assert_eq!(t.n, 5);
    }
}
