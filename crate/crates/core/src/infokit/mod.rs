//! Discrete probability objects, information measures, cost-constrained
//! capacity, exact and rate-limited optimal transport, maximal couplings.
//!
//! JSON layout shared with the hybrid evaluator and the CLI:
//!
//! ```json
//! { "alphabet": ["0", "1"], "probs": [0.75, 0.25] }
//! { "input_alphabet": ["0","1"], "output_alphabet": ["0","1"],
//!   "matrix": [[0.9, 0.1], [0.1, 0.9]], "cost": [0.0, 1.0] }
//! ```
//!
//! Alphabet labels are optional on input and default to `"0"`, `"1"`, ...;
//! a channel's `cost` defaults to all zeros.

mod capacity;
mod matrix;
mod rate_limited;
mod transport;

pub use capacity::{blahut_arimoto, CapacityResult};
pub use matrix::Matrix;
pub use rate_limited::{
    entropic_plan, rate_limited_ot, rate_limited_ot_with, EntropicPlan, RateLimitedOptions,
    SinkhornOptions,
};
pub use transport::{ot_min_cost, OT_CELL_LIMIT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::xlog2x;

const SUM_TOL: f64 = 1e-9;
const COUPLING_TOL: f64 = 1e-8;

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Probability vector over a labelled finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DiscreteDistribution {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    alphabet: Option<Vec<String>>,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        let alphabet = raw.alphabet.unwrap_or_else(|| default_labels(raw.probs.len()));
        DiscreteDistribution::new(alphabet, raw.probs)
    }
}

impl DiscreteDistribution {
    pub fn new(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Invalid("distribution over an empty alphabet".into()));
        }
        if alphabet.len() != probs.len() {
            return Err(Error::Invalid(format!(
                "alphabet has {} labels but {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Invalid(format!("probabilities must be finite and nonnegative: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { alphabet, probs })
    }

    /// Distribution with default labels `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(default_labels(probs.len()), probs)
    }

    /// `B(p)`: probability `p` on symbol `"1"`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("Bernoulli parameter must lie in [0, 1], got {p}")));
        }
        Self::from_probs(vec![1.0 - p, p])
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        let mut probs = vec![0.0; n];
        *probs
            .get_mut(at)
            .ok_or_else(|| Error::Domain(format!("point mass index {at} outside alphabet of size {n}")))? = 1.0;
        Self::from_probs(probs)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn check_same_alphabet(&self, other: &Self) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", self.alphabet, other.alphabet)));
        }
        Ok(())
    }
}

/// Joint table with prescribed marginals and a cost matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    pub row_marginal: DiscreteDistribution,
    pub col_marginal: DiscreteDistribution,
    pub table: Matrix,
    pub cost: Matrix,
}

impl Coupling {
    pub fn new(
        row_marginal: DiscreteDistribution,
        col_marginal: DiscreteDistribution,
        table: Matrix,
        cost: Matrix,
    ) -> Result<Self> {
        let shape = (row_marginal.len(), col_marginal.len());
        if table.shape() != shape || cost.shape() != shape {
            return Err(Error::Dimension(format!(
                "coupling table {:?} / cost {:?} do not match marginals {:?}",
                table.shape(),
                cost.shape(),
                shape
            )));
        }
        if table.data().iter().any(|v| *v < 0.0) {
            return Err(Error::Invalid("coupling table has negative entries".into()));
        }
        let rs = table.row_sums();
        let cs = table.col_sums();
        let bad_row = rs.iter().zip(row_marginal.probs()).any(|(a, b)| (a - b).abs() > COUPLING_TOL);
        let bad_col = cs.iter().zip(col_marginal.probs()).any(|(a, b)| (a - b).abs() > COUPLING_TOL);
        if bad_row || bad_col {
            return Err(Error::Invalid("coupling marginals do not match".into()));
        }
        Ok(Self { row_marginal, col_marginal, table, cost })
    }

    pub fn expected_cost(&self) -> f64 {
        self.table.dot(&self.cost)
    }

    /// `P{first != second}` for couplings on a common alphabet.
    pub fn mismatch_probability(&self) -> f64 {
        let n = self.table.rows().min(self.table.cols());
        1.0 - (0..n).map(|i| self.table.get(i, i)).sum::<f64>()
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information(&self.table)
    }
}

/// Memoryless channel `p_{V|U}` with a per-input cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct DiscreteChannel {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    matrix: Matrix,
    cost: Vec<f64>,
}

#[derive(Deserialize)]
struct RawChannel {
    input_alphabet: Option<Vec<String>>,
    output_alphabet: Option<Vec<String>>,
    matrix: Matrix,
    cost: Option<Vec<f64>>,
}

impl TryFrom<RawChannel> for DiscreteChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        let (r, c) = raw.matrix.shape();
        DiscreteChannel::new(
            raw.input_alphabet.unwrap_or_else(|| default_labels(r)),
            raw.output_alphabet.unwrap_or_else(|| default_labels(c)),
            raw.matrix,
            raw.cost.unwrap_or_else(|| vec![0.0; r]),
        )
    }
}

impl DiscreteChannel {
    pub fn new(
        input_alphabet: Vec<String>,
        output_alphabet: Vec<String>,
        matrix: Matrix,
        cost: Vec<f64>,
    ) -> Result<Self> {
        if matrix.rows() != input_alphabet.len() || matrix.cols() != output_alphabet.len() {
            return Err(Error::Dimension(format!(
                "channel matrix {:?} does not match alphabets ({}, {})",
                matrix.shape(),
                input_alphabet.len(),
                output_alphabet.len()
            )));
        }
        if cost.len() != matrix.rows() {
            return Err(Error::Dimension(format!(
                "cost vector has {} entries for {} inputs",
                cost.len(),
                matrix.rows()
            )));
        }
        if cost.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Invalid("input costs must be finite and nonnegative".into()));
        }
        for i in 0..matrix.rows() {
            let row = matrix.row(i);
            if row.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Invalid(format!("channel row {i} has negative entries")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::Invalid(format!("channel row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self { input_alphabet, output_alphabet, matrix, cost })
    }

    /// Channel with default labels and zero cost.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        let (r, c) = matrix.shape();
        Self::new(default_labels(r), default_labels(c), matrix, vec![0.0; r])
    }

    /// `BSC(theta)`.
    pub fn bsc(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("crossover must lie in [0, 1], got {theta}")));
        }
        Self::from_matrix(Matrix::from_rows(vec![vec![1.0 - theta, theta], vec![theta, 1.0 - theta]])?)
    }

    /// Binary erasure channel; outputs are `0`, `1`, `e`.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Domain(format!("erasure probability must lie in [0, 1], got {eps}")));
        }
        let m = Matrix::from_rows(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])?;
        Self::new(default_labels(2), vec!["0".into(), "1".into(), "e".into()], m, vec![0.0; 2])
    }

    pub fn with_cost(mut self, cost: Vec<f64>) -> Result<Self> {
        if cost.len() != self.matrix.rows() {
            return Err(Error::Dimension("cost vector length differs from input alphabet".into()));
        }
        self.cost = cost;
        Self::new(self.input_alphabet, self.output_alphabet, self.matrix, self.cost)
    }

    pub fn input_alphabet(&self) -> &[String] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[String] {
        &self.output_alphabet
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn inputs(&self) -> usize {
        self.matrix.rows()
    }

    pub fn outputs(&self) -> usize {
        self.matrix.cols()
    }

    /// `p(v|u)`.
    #[inline]
    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.matrix.get(u, v)
    }
}

/// One sample of the rate-limited transport curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RDPoint {
    /// bits
    pub rate: f64,
    pub distortion: f64,
    /// Lagrange weight on the mutual-information term (cost units per nat).
    pub multiplier: f64,
}

/// Shannon entropy in bits.
pub fn entropy(p: &DiscreteDistribution) -> f64 {
    -p.probs().iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// `I(A;B)` in bits of a joint table. Marginals are taken from the table.
pub fn mutual_information(joint: &Matrix) -> f64 {
    let ra = joint.row_sums();
    let cb = joint.col_sums();
    let mut acc = 0.0;
    for (i, &pa) in ra.iter().enumerate() {
        for (j, &pb) in cb.iter().enumerate() {
            let p = joint.get(i, j);
            if p > 0.0 {
                acc += p * (p / (pa * pb)).log2();
            }
        }
    }
    acc.max(0.0)
}

/// Total variation distance `(1/2) sum |p_i - q_i|`.
pub fn total_variation(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(tv_slices(p.probs(), q.probs()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Coupling of `(p, q)` maximizing `P{first == second}`: the diagonal carries
/// `min(p_i, q_i)` and the excess of `p` is spread over the excess of `q`
/// proportionally.
pub fn maximal_coupling(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<Coupling> {
    p.check_same_alphabet(q)?;
    let table = maximal_coupling_table(p.probs(), q.probs());
    let n = p.len();
    Coupling::new(p.clone(), q.clone(), table, Matrix::hamming(n))
}

pub(crate) fn maximal_coupling_table(p: &[f64], q: &[f64]) -> Matrix {
    let n = p.len();
    let mut table = Matrix::zeros(n, n);
    let excess_p: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a - b).max(0.0)).collect();
    let excess_q: Vec<f64> = p.iter().zip(q).map(|(a, b)| (b - a).max(0.0)).collect();
    let total: f64 = excess_q.iter().sum();
    for i in 0..n {
        table.set(i, i, p[i].min(q[i]));
        if total > 0.0 && excess_p[i] > 0.0 {
            for j in 0..n {
                if excess_q[j] > 0.0 {
                    table.add(i, j, excess_p[i] * excess_q[j] / total);
                }
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::binary_entropy;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&DiscreteDistribution::uniform(4).unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(entropy(&DiscreteDistribution::point_mass(3, 1).unwrap()), 0.0);
        let b = DiscreteDistribution::bernoulli(0.25).unwrap();
        assert!((entropy(&b) - binary_entropy(0.25).unwrap()).abs() < 1e-15);
        assert!((entropy(&b) - 0.81128).abs() < 1e-5);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = Matrix::from_fn(2, 3, |i, j| [0.3, 0.7][i] * [0.2, 0.5, 0.3][j]);
        assert!(mutual_information(&prod).abs() < 1e-15);
        let ident = Matrix::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&ident) - 1.0).abs() < 1e-15);
        let t = 0.11;
        let dsbs = Matrix::from_rows(vec![vec![(1.0 - t) / 2.0, t / 2.0], vec![t / 2.0, (1.0 - t) / 2.0]]).unwrap();
        let expect = 1.0 - binary_entropy(t).unwrap();
        assert!((mutual_information(&dsbs) - expect).abs() < 1e-12);
        assert!((expect - 0.50007).abs() < 1e-4);
    }

    #[test]
    fn tv_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        assert!((total_variation(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap() - 0.5).abs() < 1e-15);
        assert!((total_variation(&p, &dist(&[0.3, 0.3, 0.4])).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(total_variation(&p, &dist(&[0.5, 0.5])), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn maximal_coupling_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        let c = maximal_coupling(&p, &p).unwrap();
        assert!(c.mismatch_probability().abs() < 1e-15);
        let c = maximal_coupling(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap();
        assert!((c.mismatch_probability() - 0.5).abs() < 1e-15);
        let c = maximal_coupling(&dist(&[0.7, 0.3]), &dist(&[0.3, 0.7])).unwrap();
        assert!((c.mismatch_probability() - 0.4).abs() < 1e-15);
        assert!((c.expected_cost() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::from_probs(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(vec!["a".into()], vec![0.5, 0.5]).is_err());
        let d: DiscreteDistribution = serde_json::from_str(r#"{"probs":[0.25,0.75]}"#).unwrap();
        assert_eq!(d.alphabet(), &["0".to_string(), "1".to_string()]);
        assert!(serde_json::from_str::<DiscreteDistribution>(r#"{"probs":[0.25,0.70]}"#).is_err());
    }

    #[test]
    fn channel_validation() {
        let bad = Matrix::from_rows(vec![vec![0.5, 0.4], vec![0.1, 0.9]]).unwrap();
        assert!(DiscreteChannel::from_matrix(bad).is_err());
        let ch: DiscreteChannel =
            serde_json::from_str(r#"{"matrix":[[0.9,0.1],[0.2,0.8]],"cost":[0,1]}"#).unwrap();
        assert_eq!(ch.cost(), &[0.0, 1.0]);
        assert!(serde_json::from_str::<DiscreteChannel>(r#"{"matrix":[[0.9,0.1]],"cost":[-1]}"#).is_err());
    }

    fn prob_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn mismatch_equals_tv((a, b) in (2usize..7).prop_flat_map(|n| (prob_vec(n), prob_vec(n)))) {
            let p = DiscreteDistribution::from_probs(a).unwrap();
            let q = DiscreteDistribution::from_probs(b).unwrap();
            let c = maximal_coupling(&p, &q).unwrap();
            let tv = total_variation(&p, &q).unwrap();
            prop_assert!((c.mismatch_probability() - tv).abs() <= 1e-12);
        }

        #[test]
        fn mi_nonnegative_and_zero_on_products(a in prob_vec(3), b in prob_vec(4), w in prob_vec(12)) {
            let prod = Matrix::from_fn(3, 4, |i, j| a[i] * b[j]);
            prop_assert!(mutual_information(&prod).abs() < 1e-12);
            let joint = Matrix::from_fn(3, 4, |i, j| w[i * 4 + j]);
            prop_assert!(mutual_information(&joint) >= 0.0);
        }
    }
}
