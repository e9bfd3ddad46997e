//! Random-coding hybrid scheme at small blocklength.
//!
//! Per codebook draw: `ceil(2^(nR))` codewords `Z^n(m)` i.i.d. `p_Z`; a
//! likelihood encoder picks `m` with probability proportional to
//! `p_{X|Z}^n(x^n | Z^n(m))`; `U^n` is drawn symbolwise from `p_{U|XZ}` and
//! sent through the channel; the decoder looks for the unique codeword whose
//! joint type with `V^n` is within `typ_delta` (sup norm) of `p_{ZV}`, falling
//! back to the most likely codeword; `Yhat^n` is drawn symbolwise from
//! `p_{Y|ZV}` and finally mapped onto `p_Y^n` by a maximal coupling.
//!
//! When the enumeration is small enough the law of `Yhat^n` given the
//! codebook, and the decoding error probability, are computed exactly by
//! applying the per-position kernels one tensor mode at a time. Otherwise the
//! law is replaced by the empirical histogram of the simulated blocks
//! (biased upward in total variation).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{chunk_rng, pool};
use super::{Categorical, EmpiricalMarginal, SimConfig, SimReport, Welford, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::hybrid::{HybridSpec, Table3};
use crate::infokit::{DiscreteChannel, DiscreteDistribution, Matrix};

/// Largest `n * log2(max alphabet size)` accepted by [`sim_block_hybrid`].
pub const BLOCK_BUDGET_BITS: f64 = 24.0;
/// Default typicality slack.
pub const DEFAULT_TYP_DELTA: f64 = 0.1;
const EXACT_WORK_LIMIT: f64 = (1u64 << 30) as f64;
const STREAM_BLOCK: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawMode {
    Exact,
    PlugIn,
}

/// Laws of a single-letter hybrid candidate, split into the conditionals the
/// block scheme needs, plus the block parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCodeConfig {
    pub n: usize,
    /// Codebook rate in bits per symbol.
    pub rate: f64,
    pub typ_delta: f64,
    /// Number of independent codebook draws.
    pub codebooks: usize,
    source: DiscreteDistribution,
    code_marginal: DiscreteDistribution,
    /// `p(x | z)`, rows indexed by `z`.
    x_given_z: Matrix,
    /// `p(u | x, z)` as `[x][z][u]`.
    u_given_xz: Table3,
    channel: DiscreteChannel,
    /// `p(y | z, v)` as `[z][v][y]`.
    dec_cond: Table3,
    target: DiscreteDistribution,
    dist: Matrix,
}

impl BlockCodeConfig {
    /// Splits `spec` into `p_Z`, `p_{X|Z}` and `p_{U|XZ}`; `typ_delta` defaults
    /// to 0.1 and `codebooks` to 32.
    pub fn from_spec(spec: &HybridSpec, n: usize, rate: f64) -> Result<Self> {
        let [nx, nz, nu] = spec.enc().dims();
        let px = spec.p_x().probs();
        let enc_row = |x: usize, z: usize| (0..nu).map(|u| spec.enc().get(x, z, u)).sum::<f64>();
        let pxz = Matrix::from_fn(nx, nz, |x, z| px[x] * enc_row(x, z));
        let pz = pxz.col_sums();
        let x_given_z = Matrix::from_fn(nz, nx, |z, x| if pz[z] > 0.0 { pxz.get(x, z) / pz[z] } else { 1.0 / nx as f64 });
        let u_given_xz = Table3::from_fn([nx, nz, nu], |x, z, u| {
            let s = enc_row(x, z);
            if s > 0.0 {
                spec.enc().get(x, z, u) / s
            } else {
                1.0 / nu as f64
            }
        });
        let total: f64 = pz.iter().sum();
        let code_marginal = DiscreteDistribution::from_probs(pz.iter().map(|p| p / total).collect())?;
        let cfg = Self {
            n,
            rate,
            typ_delta: DEFAULT_TYP_DELTA,
            codebooks: 32,
            source: spec.p_x().clone(),
            code_marginal,
            x_given_z,
            u_given_xz,
            channel: spec.ch().clone(),
            dec_cond: spec.dec().clone(),
            target: spec.p_y().clone(),
            dist: spec.dist().clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn source(&self) -> &DiscreteDistribution {
        &self.source
    }

    pub fn code_marginal(&self) -> &DiscreteDistribution {
        &self.code_marginal
    }

    pub fn x_given_z(&self) -> &Matrix {
        &self.x_given_z
    }

    pub fn u_given_xz(&self) -> &Table3 {
        &self.u_given_xz
    }

    pub fn channel(&self) -> &DiscreteChannel {
        &self.channel
    }

    pub fn dec_cond(&self) -> &Table3 {
        &self.dec_cond
    }

    pub fn target(&self) -> &DiscreteDistribution {
        &self.target
    }

    /// `ceil(2^(n R))`.
    pub fn codebook_size(&self) -> usize {
        (self.n as f64 * self.rate).exp2().ceil() as usize
    }

    fn sizes(&self) -> Sizes {
        Sizes {
            x: self.source.len(),
            z: self.code_marginal.len(),
            u: self.channel.inputs(),
            v: self.channel.outputs(),
            y: self.target.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("blocklength must be >= 1".into()));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::Invalid(format!("rate must be positive, got {}", self.rate)));
        }
        if !(self.typ_delta > 0.0) {
            return Err(Error::Invalid(format!("typicality slack must be positive, got {}", self.typ_delta)));
        }
        if self.codebooks == 0 {
            return Err(Error::Invalid("need at least one codebook".into()));
        }
        let s = self.sizes();
        let widest = s.x.max(s.z).max(s.v).max(s.y) as f64;
        let bits = self.n as f64 * widest.log2();
        if bits > BLOCK_BUDGET_BITS {
            return Err(Error::BudgetExceeded(format!(
                "n * log2(alphabet) = {bits} exceeds {BLOCK_BUDGET_BITS} bits"
            )));
        }
        if self.n as f64 * self.rate > BLOCK_BUDGET_BITS {
            return Err(Error::BudgetExceeded(format!(
                "codebook of 2^{} words exceeds 2^{BLOCK_BUDGET_BITS}",
                self.n as f64 * self.rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Sizes {
    x: usize,
    z: usize,
    u: usize,
    v: usize,
    y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookStats {
    pub index: usize,
    /// All codewords identical.
    pub degenerate: bool,
    /// Probability that decoding fails or returns the wrong index (exact when
    /// the law is exact, otherwise the simulated frequency).
    pub msg_error_rate: f64,
    pub msg_error_rate_mc: f64,
    /// Fraction of simulated blocks without a unique typical codeword.
    pub typicality_failures: f64,
    /// Total variation between the law of `Yhat^n` and `p_Y^n`.
    pub tv_pre_coupling: f64,
    pub mean_distortion: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub n: usize,
    pub rate: f64,
    pub codebook_size: usize,
    pub typ_delta: f64,
    pub typicality_test: String,
    pub law: LawMode,
    pub blocks_per_codebook: u64,
    pub median_msg_error_rate: f64,
    pub median_tv_pre_coupling: f64,
    pub codebooks: Vec<CodebookStats>,
}

/// Simulates `cfg.codebooks` independent codebooks with `sim.samples` blocks
/// each. Codebooks run in parallel; each one has its own random stream.
pub fn sim_block_hybrid(cfg: &BlockCodeConfig, sim: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    sim.validate()?;
    let model = Model::new(cfg);
    let law = if model.exact_work() <= EXACT_WORK_LIMIT { LawMode::Exact } else { LawMode::PlugIn };
    let run = |c: usize| model.run_codebook(c, law, sim);
    let results: Vec<(CodebookStats, Welford, Vec<u64>)> = if sim.workers == 1 {
        (0..cfg.codebooks).map(run).collect()
    } else {
        pool(sim.workers)?.install(|| (0..cfg.codebooks).into_par_iter().map(run).collect())
    };

    let mut dist = Welford::default();
    let mut counts = vec![0u64; model.s.y];
    let mut stats = Vec::with_capacity(results.len());
    for (s, d, c) in results {
        dist.merge(&d);
        counts.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
        stats.push(s);
    }
    let total: u64 = counts.iter().sum();
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let med_err = median(stats.iter().map(|s| s.msg_error_rate).collect());
    let med_tv = median(stats.iter().map(|s| s.tv_pre_coupling).collect());
    let d = dist.estimate();
    Ok(SimReport {
        schema_version: SCHEMA_VERSION,
        scheme: "block-hybrid".into(),
        seed: sim.seed,
        samples: sim.samples,
        mean_distortion: d.mean,
        std_error: d.std_error,
        empirical_marginal: EmpiricalMarginal::Discrete { probs },
        tv_to_target: Some(med_tv),
        channel_power: None,
        msg_error_rate: Some(med_err),
        block: Some(BlockStats {
            n: cfg.n,
            rate: cfg.rate,
            codebook_size: cfg.codebook_size(),
            typ_delta: cfg.typ_delta,
            typicality_test: "sup-norm distance between the joint type of (Z^n, V^n) and p_ZV".into(),
            law,
            blocks_per_codebook: sim.samples,
            median_msg_error_rate: med_err,
            median_tv_pre_coupling: med_tv,
            codebooks: stats,
        }),
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Precomputed single-letter tables.
struct Model<'a> {
    cfg: &'a BlockCodeConfig,
    s: Sizes,
    n: usize,
    m: usize,
    /// `p(v | x, z)` per `z`, as `nx x nv`.
    xv_kernel: Vec<Matrix>,
    /// `p(y | z, v)` per `z`, as `nv x ny`.
    vy_kernel: Vec<Matrix>,
    p_zv: Matrix,
    log_v_given_z: Matrix,
    x_sampler: Categorical,
    z_sampler: Categorical,
    u_sampler: Vec<Categorical>,
    v_sampler: Vec<Categorical>,
    y_sampler: Vec<Categorical>,
}

impl<'a> Model<'a> {
    fn new(cfg: &'a BlockCodeConfig) -> Self {
        let s = cfg.sizes();
        let w = cfg.channel.matrix();
        let xv_kernel: Vec<Matrix> = (0..s.z)
            .map(|z| {
                Matrix::from_fn(s.x, s.v, |x, v| (0..s.u).map(|u| cfg.u_given_xz.get(x, z, u) * w.get(u, v)).sum())
            })
            .collect();
        let vy_kernel = (0..s.z).map(|z| Matrix::from_fn(s.v, s.y, |v, y| cfg.dec_cond.get(z, v, y))).collect();
        let pz = cfg.code_marginal.probs();
        let p_zv = Matrix::from_fn(s.z, s.v, |z, v| {
            (0..s.x).map(|x| pz[z] * cfg.x_given_z.get(z, x) * xv_kernel[z].get(x, v)).sum()
        });
        let log_v_given_z = Matrix::from_fn(s.z, s.v, |z, v| {
            if pz[z] > 0.0 {
                (p_zv.get(z, v) / pz[z]).ln()
            } else {
                f64::NEG_INFINITY
            }
        });
        let cat = |w: Vec<f64>| Categorical::new(&w).unwrap_or_else(|_| Categorical::new(&[1.0]).expect("unit weight"));
        let u_sampler =
            (0..s.x * s.z).map(|k| cat((0..s.u).map(|u| cfg.u_given_xz.get(k / s.z, k % s.z, u)).collect())).collect();
        let v_sampler = (0..s.u).map(|u| cat(w.row(u).to_vec())).collect();
        let y_sampler =
            (0..s.z * s.v).map(|k| cat((0..s.y).map(|y| cfg.dec_cond.get(k / s.v, k % s.v, y)).collect())).collect();
        Self {
            cfg,
            s,
            n: cfg.n,
            m: cfg.codebook_size(),
            xv_kernel,
            vy_kernel,
            p_zv,
            log_v_given_z,
            x_sampler: cat(cfg.source.probs().to_vec()),
            z_sampler: cat(pz.to_vec()),
            u_sampler,
            v_sampler,
            y_sampler,
        }
    }

    fn exact_work(&self) -> f64 {
        let n = self.n as i32;
        let (nx, nv, ny) = (self.s.x as f64, self.s.v as f64, self.s.y as f64);
        self.m as f64 * self.n as f64 * (nx.powi(n) * (nv + 2.0) + nv.powi(n) * (ny + 2.0)) + ny.powi(n)
    }

    fn typical(&self, word: &[usize], v: &[usize]) -> bool {
        let (nz, nv) = (self.s.z, self.s.v);
        let mut counts = vec![0u32; nz * nv];
        for (z, v) in word.iter().zip(v) {
            counts[z * nv + v] += 1;
        }
        let n = self.n as f64;
        counts.iter().enumerate().all(|(k, &c)| (c as f64 / n - self.p_zv.get(k / nv, k % nv)).abs() <= self.cfg.typ_delta)
    }

    /// `(index, declared_failure)`.
    fn decode(&self, book: &[Vec<usize>], v: &[usize]) -> (usize, bool) {
        let mut found = None;
        let mut unique = false;
        for (m, word) in book.iter().enumerate() {
            if self.typical(word, v) {
                if found.is_some() {
                    unique = false;
                    break;
                }
                found = Some(m);
                unique = true;
            }
        }
        if let (Some(m), true) = (found, unique) {
            return (m, false);
        }
        let mut best = (0, f64::NEG_INFINITY);
        for (m, word) in book.iter().enumerate() {
            let ll: f64 = word.iter().zip(v).map(|(&z, &v)| self.log_v_given_z.get(z, v)).sum();
            if ll > best.1 {
                best = (m, ll);
            }
        }
        (best.0, true)
    }

    fn run_codebook(&self, c: usize, law: LawMode, sim: &SimConfig) -> (CodebookStats, Welford, Vec<u64>) {
        let mut rng = chunk_rng(sim.seed, STREAM_BLOCK, c as u64);
        let book: Vec<Vec<usize>> =
            (0..self.m).map(|_| (0..self.n).map(|_| self.z_sampler.sample(rng.random())).collect()).collect();
        let degenerate = book.iter().all(|w| *w == book[0]);
        let (n, s) = (self.n, self.s);

        let exact = (law == LawMode::Exact).then(|| self.exact_law(&book));
        let blocks: Vec<Block> = (0..sim.samples).map(|_| self.simulate_block(&book, exact.as_ref(), &mut rng)).collect();

        let yhat_law = match &exact {
            Some(e) => e.yhat.clone(),
            None => {
                let mut h = vec![0.0; s.y.pow(n as u32)];
                let w = 1.0 / blocks.len() as f64;
                blocks.iter().for_each(|b| h[b.yhat] += w);
                h
            }
        };
        let target = product_law(self.cfg.target.probs(), n);
        let residual: Vec<f64> = target.iter().zip(&yhat_law).map(|(q, p)| (q - p).max(0.0)).collect();
        let tv: f64 = residual.iter().sum();
        let residual = Categorical::new(&residual).ok();

        let mut dist = Welford::default();
        let mut counts = vec![0u64; s.y];
        let (mut xs, mut ys) = (vec![0; n], vec![0; n]);
        for b in &blocks {
            let (p, q) = (yhat_law[b.yhat], target[b.yhat]);
            let keep = q >= p || rng.random::<f64>() * p < q;
            let y = match (&residual, keep) {
                (Some(r), false) => r.sample(rng.random()),
                _ => b.yhat,
            };
            digits(b.x, s.x, &mut xs);
            digits(y, s.y, &mut ys);
            let d: f64 = xs.iter().zip(&ys).map(|(&x, &y)| self.cfg.dist.get(x, y)).sum();
            ys.iter().for_each(|&y| counts[y] += 1);
            dist.push(d / n as f64);
        }
        let blocks_n = blocks.len() as f64;
        let mc_err = blocks.iter().filter(|b| b.error).count() as f64 / blocks_n;
        let typ_fail = blocks.iter().filter(|b| b.declared).count() as f64 / blocks_n;
        let e = dist.estimate();
        let stats = CodebookStats {
            index: c,
            degenerate,
            msg_error_rate: exact.as_ref().map_or(mc_err, |e| e.error),
            msg_error_rate_mc: mc_err,
            typicality_failures: typ_fail,
            tv_pre_coupling: tv,
            mean_distortion: e.mean,
            std_error: e.std_error,
        };
        (stats, dist, counts)
    }

    fn simulate_block(&self, book: &[Vec<usize>], exact: Option<&ExactLaw>, rng: &mut ChaCha8Rng) -> Block {
        let (n, s) = (self.n, self.s);
        let x: Vec<usize> = (0..n).map(|_| self.x_sampler.sample(rng.random())).collect();
        let weights: Vec<f64> =
            book.iter().map(|w| w.iter().zip(&x).map(|(&z, &x)| self.cfg.x_given_z.get(z, x)).product()).collect();
        let m = match Categorical::new(&weights) {
            Ok(c) => c.sample(rng.random()),
            Err(_) => rng.random_range(0..book.len()),
        };
        let word = &book[m];
        let v: Vec<usize> = (0..n)
            .map(|t| {
                let u = self.u_sampler[x[t] * s.z + word[t]].sample(rng.random());
                self.v_sampler[u].sample(rng.random())
            })
            .collect();
        let (m_hat, declared) = match exact {
            Some(e) => e.decoded[index(&v, s.v)],
            None => self.decode(book, &v),
        };
        let zh = &book[m_hat];
        let yhat: Vec<usize> = (0..n).map(|t| self.y_sampler[zh[t] * s.v + v[t]].sample(rng.random())).collect();
        Block { x: index(&x, s.x), yhat: index(&yhat, s.y), error: declared || m_hat != m, declared }
    }

    fn exact_law(&self, book: &[Vec<usize>]) -> ExactLaw {
        let (n, s) = (self.n, self.s);
        let px = product_law(self.cfg.source.probs(), n);
        let lik = |word: &[usize]| {
            let factors: Vec<Vec<f64>> = word.iter().map(|&z| self.cfg.x_given_z.row(z).to_vec()).collect();
            kron(&factors)
        };
        let mut total = vec![0.0; px.len()];
        for word in book {
            total.iter_mut().zip(lik(word)).for_each(|(t, l)| *t += l);
        }
        let uniform = 1.0 / book.len() as f64;
        let nv_n = s.v.pow(n as u32);
        let mut joint_v = vec![0.0; nv_n];
        let mut per_m = Vec::with_capacity(book.len());
        for word in book {
            let l = lik(word);
            let a: Vec<f64> = px
                .iter()
                .zip(&l)
                .zip(&total)
                .map(|((p, l), t)| if *t > 0.0 { p * l / t } else { p * uniform })
                .collect();
            let b = apply_modes(a, s.x, s.v, word.iter().map(|&z| &self.xv_kernel[z]));
            joint_v.iter_mut().zip(&b).for_each(|(j, b)| *j += b);
            per_m.push(b);
        }
        let mut v = vec![0; n];
        let decoded: Vec<(usize, bool)> = (0..nv_n)
            .map(|k| {
                digits(k, s.v, &mut v);
                self.decode(book, &v)
            })
            .collect();
        let mut error = 0.0;
        for (m, b) in per_m.iter().enumerate() {
            for (k, &(mh, declared)) in decoded.iter().enumerate() {
                if declared || mh != m {
                    error += b[k];
                }
            }
        }
        let mut yhat = vec![0.0; s.y.pow(n as u32)];
        for (mh, word) in book.iter().enumerate() {
            let masked: Vec<f64> =
                joint_v.iter().zip(&decoded).map(|(p, d)| if d.0 == mh { *p } else { 0.0 }).collect();
            if masked.iter().all(|&p| p == 0.0) {
                continue;
            }
            let y = apply_modes(masked, s.v, s.y, word.iter().map(|&z| &self.vy_kernel[z]));
            yhat.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
        }
        ExactLaw { decoded, error: error.clamp(0.0, 1.0), yhat }
    }
}

struct Block {
    x: usize,
    yhat: usize,
    error: bool,
    declared: bool,
}

struct ExactLaw {
    decoded: Vec<(usize, bool)>,
    error: f64,
    yhat: Vec<f64>,
}

/// Sequence index with position 0 as the least significant digit.
fn index(seq: &[usize], base: usize) -> usize {
    seq.iter().rev().fold(0, |acc, &d| acc * base + d)
}

fn digits(mut k: usize, base: usize, out: &mut [usize]) {
    for d in out.iter_mut() {
        *d = k % base;
        k /= base;
    }
}

/// `out[index(s)] = prod_t factors[t][s_t]`.
fn kron(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        let len = out.len();
        let mut next = vec![0.0; len * f.len()];
        for (d, &w) in f.iter().enumerate() {
            for (j, &o) in out.iter().enumerate() {
                next[j + len * d] = o * w;
            }
        }
        out = next;
    }
    out
}

fn product_law(p: &[f64], n: usize) -> Vec<f64> {
    kron(&vec![p.to_vec(); n])
}

/// Applies `kernels[t]` (an `in_dim x out_dim` stochastic matrix) along
/// position `t` of a tensor over `in_dim^n` sequences.
fn apply_modes<'k>(mut v: Vec<f64>, in_dim: usize, out_dim: usize, kernels: impl Iterator<Item = &'k Matrix>) -> Vec<f64> {
    let mut stride = 1;
    let mut outer = v.len();
    for k in kernels {
        outer /= in_dim;
        let mut next = vec![0.0; outer * out_dim * stride];
        for hi in 0..outer {
            for i in 0..in_dim {
                let src = (hi * in_dim + i) * stride;
                for o in 0..out_dim {
                    let w = k.get(i, o);
                    if w == 0.0 {
                        continue;
                    }
                    let dst = (hi * out_dim + o) * stride;
                    for lo in 0..stride {
                        next[dst + lo] += w * v[src + lo];
                    }
                }
            }
        }
        v = next;
        stride *= out_dim;
    }
    v
}
