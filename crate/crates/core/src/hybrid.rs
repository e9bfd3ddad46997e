//! Single-letter hybrid-coding achievability bound for finite alphabets.
//!
//! A candidate is `p_X`, an encoder `p(z, u | x)`, the channel `p(v | u)` with
//! input cost, a decoder `p(y | z, v)`, a distortion `d(x, y)`, a budget and
//! the required reconstruction marginal `p_Y`. It certifies `E[d(X, Y)]` as
//! achievable when
//!
//! * `E[c(U)] <= gamma`,
//! * `max{I(X;Z), I(Y;Z)} <= I(Z;V)`,
//! * the induced `Y` marginal equals `p_Y`.
//!
//! JSON layout (`enc[x][z][u]`, `dec[z][v][y]`, `dist[x][y]`):
//!
//! ```json
//! { "p_x": {"probs": [0.75, 0.25]}, "p_y": {"probs": [0.75, 0.25]},
//!   "enc": [[[1, 0]], [[0, 1]]],
//!   "ch": {"matrix": [[0.75, 0.25], [0.25, 0.75]], "cost": [0, 0]},
//!   "dec": [[[1, 0], [0.3333, 0.6667]]],
//!   "dist": [[0, 1], [1, 0]], "gamma": 0 }
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infokit::{mutual_information, tv_slices, DiscreteChannel, DiscreteDistribution, Matrix};

const ROW_TOL: f64 = 1e-9;
/// Slack on the cost and information conditions.
pub const CONDITION_SLACK: f64 = 1e-9;
/// Largest total-variation gap between induced and target `p_Y`.
pub const MARGINAL_TV: f64 = 1e-8;

/// Three-index conditional table stored row-major; serializes as nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<f64>>>", into = "Vec<Vec<Vec<f64>>>")]
pub struct Table3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Table3 {
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for a in 0..dims[0] {
            for b in 0..dims[1] {
                for c in 0..dims[2] {
                    data.push(f(a, b, c));
                }
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dims[1] + b) * self.dims[2] + c]
    }
}

impl TryFrom<Vec<Vec<Vec<f64>>>> for Table3 {
    type Error = Error;

    fn try_from(v: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let d0 = v.len();
        let d1 = v.first().map_or(0, Vec::len);
        let d2 = v.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if d0 == 0 || d1 == 0 || d2 == 0 {
            return Err(Error::Dimension("conditional table must be non-empty".into()));
        }
        if v.iter().any(|r| r.len() != d1 || r.iter().any(|c| c.len() != d2)) {
            return Err(Error::Dimension("conditional table is ragged".into()));
        }
        Ok(Self { dims: [d0, d1, d2], data: v.into_iter().flatten().flatten().collect() })
    }
}

impl From<Table3> for Vec<Vec<Vec<f64>>> {
    fn from(t: Table3) -> Self {
        let [_, d1, d2] = t.dims;
        t.data.chunks(d1 * d2).map(|blk| blk.chunks(d2).map(<[f64]>::to_vec).collect()).collect()
    }
}

/// A finite-alphabet hybrid-coding candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct HybridSpec {
    p_x: DiscreteDistribution,
    p_y: DiscreteDistribution,
    enc: Table3,
    ch: DiscreteChannel,
    dec: Table3,
    dist: Matrix,
    gamma: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    p_x: DiscreteDistribution,
    p_y: DiscreteDistribution,
    enc: Table3,
    ch: DiscreteChannel,
    dec: Table3,
    dist: Matrix,
    gamma: f64,
}

impl TryFrom<RawSpec> for HybridSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        HybridSpec::new(r.p_x, r.p_y, r.enc, r.ch, r.dec, r.dist, r.gamma)
    }
}

impl HybridSpec {
    pub fn new(
        p_x: DiscreteDistribution,
        p_y: DiscreteDistribution,
        enc: Table3,
        ch: DiscreteChannel,
        dec: Table3,
        dist: Matrix,
        gamma: f64,
    ) -> Result<Self> {
        let (nx, ny, nu, nv) = (p_x.len(), p_y.len(), ch.inputs(), ch.outputs());
        let [ex, nz, eu] = enc.dims();
        if ex != nx || eu != nu {
            return Err(Error::Dimension(format!(
                "encoder table is {ex}x{nz}x{eu}, expected {nx}xZx{nu}"
            )));
        }
        if dec.dims() != [nz, nv, ny] {
            return Err(Error::Dimension(format!("decoder table is {:?}, expected {:?}", dec.dims(), [nz, nv, ny])));
        }
        if dist.shape() != (nx, ny) {
            return Err(Error::Dimension(format!("distortion matrix is {:?}, expected ({nx}, {ny})", dist.shape())));
        }
        if nz > nx + ny + nv + 2 {
            return Err(Error::Invalid(format!(
                "auxiliary alphabet of size {nz} exceeds |X|+|Y|+|V|+2 = {}",
                nx + ny + nv + 2
            )));
        }
        if enc.data.iter().chain(&dec.data).any(|p| !(*p >= 0.0)) {
            return Err(Error::Invalid("conditional tables must be nonnegative".into()));
        }
        for x in 0..nx {
            let s: f64 = (0..nz).flat_map(|z| (0..nu).map(move |u| (z, u))).map(|(z, u)| enc.get(x, z, u)).sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::Invalid(format!("encoder slice for x = {x} sums to {s}")));
            }
        }
        for z in 0..nz {
            for v in 0..nv {
                let s: f64 = (0..ny).map(|y| dec.get(z, v, y)).sum();
                if (s - 1.0).abs() > ROW_TOL {
                    return Err(Error::Invalid(format!("decoder row (z = {z}, v = {v}) sums to {s}")));
                }
            }
        }
        if !(gamma >= 0.0) {
            return Err(Error::Invalid(format!("cost budget must be nonnegative, got {gamma}")));
        }
        Ok(Self { p_x, p_y, enc, ch, dec, dist, gamma })
    }

    pub fn p_x(&self) -> &DiscreteDistribution {
        &self.p_x
    }

    pub fn p_y(&self) -> &DiscreteDistribution {
        &self.p_y
    }

    pub fn enc(&self) -> &Table3 {
        &self.enc
    }

    pub fn ch(&self) -> &DiscreteChannel {
        &self.ch
    }

    pub fn dec(&self) -> &Table3 {
        &self.dec
    }

    pub fn dist(&self) -> &Matrix {
        &self.dist
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn z_size(&self) -> usize {
        self.enc.dims()[1]
    }
}

/// Joint law over `X x Z x U x V x Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint5 {
    dims: [usize; 5],
    data: Vec<f64>,
}

impl Joint5 {
    pub fn dims(&self) -> [usize; 5] {
        self.dims
    }

    fn index(&self, i: [usize; 5]) -> usize {
        i.iter().zip(&self.dims).fold(0, |acc, (&k, &d)| acc * d + k)
    }

    pub fn get(&self, x: usize, z: usize, u: usize, v: usize, y: usize) -> f64 {
        self.data[self.index([x, z, u, v, y])]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Two-axis marginal; axes are numbered `X=0, Z=1, U=2, V=3, Y=4`.
    pub fn marginal2(&self, a: usize, b: usize) -> Matrix {
        assert!(a < 5 && b < 5 && a != b);
        let mut m = Matrix::zeros(self.dims[a], self.dims[b]);
        let mut idx = [0usize; 5];
        for &p in &self.data {
            if p != 0.0 {
                m.add(idx[a], idx[b], p);
            }
            for k in (0..5).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        m
    }
}

/// `p_X p_{ZU|X} p_{V|U} p_{Y|ZV}` as a dense table.
pub fn induced_joint(spec: &HybridSpec) -> Joint5 {
    let [nx, nz, nu] = spec.enc.dims();
    let (nv, ny) = (spec.ch.outputs(), spec.p_y.len());
    let mut data = Vec::with_capacity(nx * nz * nu * nv * ny);
    for x in 0..nx {
        let px = spec.p_x.probs()[x];
        for z in 0..nz {
            for u in 0..nu {
                let pxzu = px * spec.enc.get(x, z, u);
                for v in 0..nv {
                    let pxzuv = pxzu * spec.ch.prob(u, v);
                    for y in 0..ny {
                        data.push(pxzuv * spec.dec.get(z, v, y));
                    }
                }
            }
        }
    }
    Joint5 { dims: [nx, nz, nu, nv, ny], data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub cost: bool,
    pub information: bool,
    pub marginal: bool,
}

/// Quantities entering the achievability conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridReport {
    pub e_dist: f64,
    pub e_cost: f64,
    pub i_xz: f64,
    pub i_yz: f64,
    pub i_zv: f64,
    pub i_uv: f64,
    pub induced_y: DiscreteDistribution,
    pub tv_y: f64,
    pub feasible: bool,
    pub flags: Feasibility,
}

/// Evaluate a candidate. Infeasibility is reported in the flags.
pub fn evaluate(spec: &HybridSpec) -> Result<HybridReport> {
    let joint = induced_joint(spec);
    let xy = joint.marginal2(0, 4);
    let uv = joint.marginal2(2, 3);
    let e_dist = xy.dot(&spec.dist);
    let e_cost: f64 = uv.row_sums().iter().zip(spec.ch.cost()).map(|(p, c)| p * c).sum();
    let i_xz = mutual_information(&joint.marginal2(0, 1));
    let i_yz = mutual_information(&joint.marginal2(4, 1));
    let i_zv = mutual_information(&joint.marginal2(1, 3));
    let i_uv = mutual_information(&uv);
    let y = xy.col_sums();
    let total: f64 = y.iter().sum();
    let tv_y = tv_slices(&y, spec.p_y.probs());
    let induced_y = DiscreteDistribution::new(spec.p_y.alphabet().to_vec(), y.iter().map(|p| p / total).collect())?;
    let flags = Feasibility {
        cost: e_cost <= spec.gamma + CONDITION_SLACK,
        information: i_xz.max(i_yz) <= i_zv + CONDITION_SLACK,
        marginal: tv_y <= MARGINAL_TV,
    };
    Ok(HybridReport {
        e_dist,
        e_cost,
        i_xz,
        i_yz,
        i_zv,
        i_uv,
        induced_y,
        tv_y,
        feasible: flags.cost && flags.information && flags.marginal,
        flags,
    })
}

/// Uncoded candidate: constant `Z`, `U = X`, decoder `p(y | v)`.
pub fn make_uncoded(
    p_x: &DiscreteDistribution,
    p_y: &DiscreteDistribution,
    ch: &DiscreteChannel,
    dec: &Matrix,
    dist: &Matrix,
    gamma: f64,
) -> Result<HybridSpec> {
    if ch.input_alphabet() != p_x.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "channel inputs {:?} vs source alphabet {:?}",
            ch.input_alphabet(),
            p_x.alphabet()
        )));
    }
    if dec.shape() != (ch.outputs(), p_y.len()) {
        return Err(Error::AlphabetMismatch(format!(
            "decoder is {:?}, expected ({}, {})",
            dec.shape(),
            ch.outputs(),
            p_y.len()
        )));
    }
    let n = p_x.len();
    let enc = Table3::from_fn([n, 1, n], |x, _, u| if x == u { 1.0 } else { 0.0 });
    let dec = Table3::from_fn([1, ch.outputs(), p_y.len()], |_, v, y| dec.get(v, y));
    HybridSpec::new(p_x.clone(), p_y.clone(), enc, ch.clone(), dec, dist.clone(), gamma)
}

/// `log2 |V|`, the trivial ceiling on any channel information.
pub fn output_log_size(spec: &HybridSpec) -> f64 {
    (spec.ch.outputs() as f64).log2()
}
