//! Finite-dimensional quantum information metrics.
//!
//! States are `d×d` density matrices; channels are Kraus families acting as
//! `Λρ = Σ_j K_j ρ K_j†` with `Σ_j K_j† K_j = I`. Every metric takes a
//! [`LogBase`] (bits by default).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;
pub const CHANNEL_TOL: f64 = 1e-10;
pub const W_TOL: f64 = 1e-10;
pub const CLAIM_TOL: f64 = 1e-10;
/// Eigenvalues at or below this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("empty matrix")]
    Empty,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    Trace(f64),
    #[error("negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("channel has no Kraus operators")]
    NoKraus,
    #[error("Kraus operators have inconsistent shapes")]
    KrausShape,
    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("priors must be nonnegative and sum to 1")]
    Priors,
    #[error("ensemble is empty or priors and states differ in length")]
    EnsembleShape,
    #[error("entropy exchange matrix is inconsistent: {0}")]
    Exchange(String),
    #[error("channel output has zero trace")]
    ZeroOutput,
    #[error("channel is not a rank-one projection valued measure")]
    NotRankOnePvm,
    #[error("log base must be 2 or e")]
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn parse(s: &str) -> Result<Self, EntropyError> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" | "E" => Ok(LogBase::E),
            _ => Err(EntropyError::Base),
        }
    }

    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigenpairs sorted by descending eigenvalue, eigenvector phases fixed so the
/// first entry above `1e-12` in modulus is real and positive.
fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12) {
            let phase = lead.conj() / lead.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, EntropyError> {
        Self::with_tolerance(m, HERMITIAN_TOL, TRACE_TOL)
    }

    fn with_tolerance(m: CMatrix, herm_tol: f64, trace_tol: f64) -> Result<Self, EntropyError> {
        if m.nrows() != m.ncols() {
            return Err(EntropyError::NotSquare(m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return Err(EntropyError::Empty);
        }
        let dev = max_abs(&(&m - m.adjoint()));
        if dev > herm_tol {
            return Err(EntropyError::NotHermitian(dev));
        }
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(EntropyError::Trace(tr));
        }
        let m = hermitize(&m);
        let (vals, _) = eigh(&m);
        let low = vals.last().copied().unwrap_or(0.0);
        if low < -EIGEN_TOL {
            return Err(EntropyError::NotPositive(low));
        }
        Ok(DensityMatrix { m })
    }

    pub fn from_real_diagonal(p: &[f64]) -> Result<Self, EntropyError> {
        let d = p.len();
        Self::new(CMatrix::from_diagonal(&DVector::from_iterator(
            d,
            p.iter().map(|&x| c(x)),
        )))
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &DVector<Complex64>) -> Result<Self, EntropyError> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(EntropyError::Empty);
        }
        let u = v / c(norm);
        Self::new(&u * u.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Result<Self, EntropyError> {
        Self::new(CMatrix::identity(d, d) * c(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Eigenvalues (clamped at 0, descending) and matching eigenvectors.
    pub fn spectrum(&self) -> (Vec<f64>, CMatrix) {
        let (vals, vecs) = eigh(&self.m);
        (vals.into_iter().map(|x| x.max(0.0)).collect(), vecs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self, EntropyError> {
        let first = ops.first().ok_or(EntropyError::NoKraus)?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 || ops.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(EntropyError::KrausShape);
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let dev = max_abs(&(sum - CMatrix::identity(d_in, d_in)));
        if dev > CHANNEL_TOL {
            return Err(EntropyError::NotTracePreserving(dev));
        }
        Ok(KrausChannel { ops, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel {
            ops: vec![CMatrix::identity(d, d)],
            d_in: d,
            d_out: d,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self, EntropyError> {
        Self::new(vec![u])
    }

    /// Projections onto the columns of `basis`.
    pub fn rank_one_pvm(basis: &CMatrix) -> Result<Self, EntropyError> {
        let ops = basis
            .column_iter()
            .map(|v| v * v.adjoint())
            .collect();
        Self::new(ops)
    }

    pub fn computational_pvm(d: usize) -> Self {
        Self::rank_one_pvm(&CMatrix::identity(d, d)).expect("standard basis is orthonormal")
    }

    /// `Λρ = I/d` via the `d²` operators `|i⟩⟨j| / √d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = c(1.0 / (d as f64).sqrt());
        let mut ops = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = s;
                ops.push(k);
            }
        }
        KrausChannel {
            ops,
            d_in: d,
            d_out: d,
        }
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    pub fn output_dim(&self) -> usize {
        self.d_out
    }

    fn apply_raw(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.ops {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, EntropyError> {
        if rho.dim() != self.d_in {
            return Err(EntropyError::Dimension(rho.dim(), self.d_in));
        }
        let out = self.apply_raw(&rho.m);
        let tr = trace(&out).re;
        if tr <= 0.0 {
            return Err(EntropyError::ZeroOutput);
        }
        DensityMatrix::with_tolerance(out * c(1.0 / tr), 1e-10, 1e-10)
    }

    /// Every operator is an orthogonal projection, they are mutually
    /// orthogonal and they sum to the identity.
    pub fn is_pvm(&self) -> bool {
        if self.d_in != self.d_out {
            return false;
        }
        let d = self.d_in;
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in self.ops.iter().enumerate() {
            if max_abs(&(p - p.adjoint())) > CHANNEL_TOL || max_abs(&(p * p - p)) > CHANNEL_TOL {
                return false;
            }
            for q in &self.ops[i + 1..] {
                if max_abs(&(p * q)) > CHANNEL_TOL {
                    return false;
                }
            }
            sum += p;
        }
        max_abs(&(sum - CMatrix::identity(d, d))) <= CHANNEL_TOL
    }

    pub fn is_rank_one_pvm(&self) -> bool {
        self.is_pvm() && self.ops.iter().all(|p| (trace(p).re - 1.0).abs() <= CHANNEL_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self, EntropyError> {
        if priors.is_empty() || priors.len() != states.len() {
            return Err(EntropyError::EnsembleShape);
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > TRACE_TOL {
            return Err(EntropyError::Priors);
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(EntropyError::Dimension(s.dim(), d));
        }
        Ok(Ensemble { priors, states })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// `σ = Σ λ_n σ_n`.
    pub fn average(&self) -> Result<DensityMatrix, EntropyError> {
        let d = self.states[0].dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, s) in self.priors.iter().zip(&self.states) {
            m += &s.m * c(*p);
        }
        DensityMatrix::with_tolerance(m, 1e-10, 1e-10)
    }
}

fn entropy_of_values(vals: &[f64], base: LogBase) -> f64 {
    vals.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * base.log(x))
        .sum::<f64>()
        .max(0.0)
}

pub fn vn_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    entropy_of_values(&rho.spectrum().0, base)
}

/// `S(σ, ρ) = tr σ (log σ − log ρ)`, `+∞` when `supp σ ⊄ supp ρ`.
pub fn relative_entropy(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    base: LogBase,
) -> Result<f64, EntropyError> {
    if sigma.dim() != rho.dim() {
        return Err(EntropyError::Dimension(sigma.dim(), rho.dim()));
    }
    let (mu, v) = rho.spectrum();
    let mut cross = 0.0;
    for (j, &m) in mu.iter().enumerate() {
        let col = v.column(j);
        let weight = (col.adjoint() * &sigma.m * col)[(0, 0)].re;
        if m <= SUPPORT_TOL {
            if weight > EIGEN_TOL {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += weight * base.log(m);
        }
    }
    Ok((-vn_entropy(sigma, base) - cross).max(0.0))
}

/// `Σ_n λ_n S(Λ|v_n⟩⟨v_n|, Λρ)` for weights `λ_n` and unit vectors `v_n`
/// (the columns of `vectors`) with `ρ = Σ λ_n |v_n⟩⟨v_n|`.
pub fn mutual_entropy_decomposition(
    weights: &[f64],
    vectors: &CMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<f64, EntropyError> {
    if vectors.nrows() != channel.d_in {
        return Err(EntropyError::Dimension(vectors.nrows(), channel.d_in));
    }
    if weights.len() != vectors.ncols() {
        return Err(EntropyError::Dimension(weights.len(), vectors.ncols()));
    }
    let mut rho = CMatrix::zeros(channel.d_in, channel.d_in);
    for (w, v) in weights.iter().zip(vectors.column_iter()) {
        rho += v * v.adjoint() * c(*w);
    }
    let out = channel.apply(&DensityMatrix::with_tolerance(rho, 1e-10, 1e-10)?)?;
    let mut total = 0.0;
    for (&w, v) in weights.iter().zip(vectors.column_iter()) {
        if w <= 0.0 {
            continue;
        }
        let e = DensityMatrix::pure(&v.into_owned())?;
        total += w * relative_entropy(&channel.apply(&e)?, &out, base)?;
    }
    Ok(total)
}

/// Mutual entropy over the spectral decomposition of `ρ`.
pub fn mutual_entropy(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<f64, EntropyError> {
    let (vals, vecs) = rho.spectrum();
    mutual_entropy_decomposition(&vals, &vecs, channel, base)
}

/// [`mutual_entropy`], maximized additionally over `budget` random unitary
/// rotations inside each degenerate eigenspace of `ρ`.
pub fn mutual_entropy_search(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
    budget: usize,
    seed: u64,
) -> Result<f64, EntropyError> {
    let (vals, vecs) = rho.spectrum();
    let mut best = mutual_entropy_decomposition(&vals, &vecs, channel, base)?;
    let blocks = degenerate_blocks(&vals);
    if blocks.is_empty() {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let mut rotated = vecs.clone();
        for &(start, len) in &blocks {
            let u = random_unitary(len, &mut rng);
            let block = vecs.columns(start, len) * u;
            rotated.columns_mut(start, len).copy_from(&block);
        }
        best = best.max(mutual_entropy_decomposition(&vals, &rotated, channel, base)?);
    }
    Ok(best)
}

/// `(start, len)` of runs of equal eigenvalues with `len ≥ 2`.
fn degenerate_blocks(vals: &[f64]) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || (vals[k] - vals[start]).abs() > DEGENERACY_TOL {
            if k - start >= 2 {
                blocks.push((start, k - start));
            }
            start = k;
        }
    }
    blocks
}

/// `S(Λσ) − Σ λ_n S(Λσ_n)`.
pub fn holevo_mutual(
    ensemble: &Ensemble,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<f64, EntropyError> {
    let avg = channel.apply(&ensemble.average()?)?;
    let mut value = vn_entropy(&avg, base);
    for (p, s) in ensemble.priors.iter().zip(&ensemble.states) {
        value -= p * vn_entropy(&channel.apply(s)?, base);
    }
    Ok(value)
}

/// `W_ij = tr(K_i ρ K_j†) / tr Λρ`.
pub fn exchange_matrix(rho: &DensityMatrix, channel: &KrausChannel) -> Result<CMatrix, EntropyError> {
    if rho.dim() != channel.d_in {
        return Err(EntropyError::Dimension(rho.dim(), channel.d_in));
    }
    let tr = trace(&channel.apply_raw(&rho.m)).re;
    if tr <= 0.0 {
        return Err(EntropyError::ZeroOutput);
    }
    let r = channel.ops.len();
    let mut w = CMatrix::zeros(r, r);
    for (i, ki) in channel.ops.iter().enumerate() {
        let left = ki * &rho.m;
        for (j, kj) in channel.ops.iter().enumerate() {
            w[(i, j)] = trace(&(&left * kj.adjoint())) / tr;
        }
    }
    Ok(w)
}

pub fn entropy_exchange(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<f64, EntropyError> {
    let w = exchange_matrix(rho, channel)?;
    let herm = max_abs(&(&w - w.adjoint()));
    if herm > W_TOL {
        return Err(EntropyError::Exchange(format!("not Hermitian ({herm:e})")));
    }
    let tr = trace(&w).re;
    if (tr - 1.0).abs() > W_TOL {
        return Err(EntropyError::Exchange(format!("trace {tr}")));
    }
    let (vals, _) = eigh(&w);
    if let Some(&low) = vals.last() {
        if low < -W_TOL {
            return Err(EntropyError::Exchange(format!("eigenvalue {low:e}")));
        }
    }
    let clamped: Vec<f64> = vals.into_iter().map(|x| x.max(0.0)).collect();
    Ok(entropy_of_values(&clamped, base))
}

/// `(I₂, I₃) = (S(Λρ) − Sₑ, S(ρ) + S(Λρ) − Sₑ)`.
pub fn coherent_informations(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<(f64, f64), EntropyError> {
    let s_out = vn_entropy(&channel.apply(rho)?, base);
    let s_e = entropy_exchange(rho, channel, base)?;
    let i2 = s_out - s_e;
    Ok((i2, i2 + vn_entropy(rho, base)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    #[serde(rename = "S")]
    pub s_rho: f64,
    #[serde(rename = "S_out")]
    pub s_out: f64,
    #[serde(rename = "S_e")]
    pub s_e: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
}

pub fn entropy_report(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<EntropyReport, EntropyError> {
    let s_rho = vn_entropy(rho, base);
    let s_out = vn_entropy(&channel.apply(rho)?, base);
    let s_e = entropy_exchange(rho, channel, base)?;
    let i2 = s_out - s_e;
    Ok(EntropyReport {
        s_rho,
        s_out,
        s_e,
        i1: mutual_entropy(rho, channel, base)?,
        i2,
        i3: s_rho + i2,
    })
}

/// The three rank-one projection bounds: `I₁ ≤ min{S(ρ), S(Λρ)}`, `I₂ = 0`,
/// `I₃ = S(ρ)`, each checked to [`CLAIM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvmComparison {
    #[serde(flatten)]
    pub values: EntropyReport,
    pub i1_bounded: bool,
    pub i2_zero: bool,
    pub i3_equals_s: bool,
}

impl PvmComparison {
    pub fn all_hold(&self) -> bool {
        self.i1_bounded && self.i2_zero && self.i3_equals_s
    }
}

pub fn pvm_comparison(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    base: LogBase,
) -> Result<PvmComparison, EntropyError> {
    if !channel.is_rank_one_pvm() {
        return Err(EntropyError::NotRankOnePvm);
    }
    let v = entropy_report(rho, channel, base)?;
    Ok(PvmComparison {
        i1_bounded: v.i1 <= v.s_rho.min(v.s_out) + CLAIM_TOL,
        i2_zero: v.i2.abs() <= CLAIM_TOL,
        i3_equals_s: (v.i3 - v.s_rho).abs() <= CLAIM_TOL,
        values: v,
    })
}

/// Haar-random `d×d` unitary (QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal divided out).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Full-rank random state `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(hermitize(&(m * c(1.0 / tr)))).expect("Ginibre state is valid")
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let v = DVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityMatrix::pure(&v).expect("nonzero vector")
}

pub fn random_rank_one_pvm<R: Rng + ?Sized>(d: usize, rng: &mut R) -> KrausChannel {
    KrausChannel::rank_one_pvm(&random_unitary(d, rng)).expect("unitary columns are orthonormal")
}

/// Random channel with `r` Kraus operators cut from the first `d_in` columns
/// of a random `(r·d_out)`-dimensional unitary.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, r: usize, rng: &mut R) -> KrausChannel {
    let big = r * d_out;
    assert!(big >= d_in, "isometry needs r * d_out >= d_in");
    let u = random_unitary(big, rng);
    let ops = (0..r)
        .map(|k| u.view((k * d_out, 0), (d_out, d_in)).into_owned())
        .collect();
    KrausChannel::new(ops).expect("isometry blocks form a channel")
}
