//! Truncated Fock-space states and the amplifier's measurement model.
//!
//! The success operator is `M_S = sum_n min(1, g^{n-N}) |n><n|` and the
//! failure operator is its completion `M_F = sqrt(I - M_S^2)`. Both are
//! diagonal, so they are stored as their diagonals. The joint system–apparatus
//! unitary is block diagonal in the Fock index with one 2×2 rotation per block.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, NlaError, Result};
use crate::summation::CompensatedSum;

/// One amplifier instance: amplitude gain `g >= 1` and cutoff `N >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSpec {
    g: f64,
    cutoff: u32,
}

impl AmplifierSpec {
    pub fn new(g: f64, cutoff: u32) -> Result<Self> {
        if !(g >= 1.0) || !g.is_finite() {
            return domain(format!("gain must be finite and >= 1, got {g}"));
        }
        Ok(AmplifierSpec { g, cutoff })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// `G_n = min(1, g^{n-N})`, the success amplitude on `|n>`.
    pub fn success_amplitude(&self, n: usize) -> f64 {
        if n >= self.cutoff as usize {
            1.0
        } else {
            self.g.powi(n as i32 - self.cutoff as i32)
        }
    }

    fn check_representable(&self, n_max: usize) -> Result<()> {
        if n_max < self.cutoff as usize {
            return domain(format!(
                "n_max = {n_max} is below the amplifier cutoff N = {}",
                self.cutoff
            ));
        }
        Ok(())
    }
}

/// Single-mode state over occupation numbers `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return domain("a Fock vector needs at least one amplitude");
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return domain("Fock amplitudes must be finite");
        }
        Ok(FockVector { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        FockVector { amplitudes }
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<CompensatedSum>()
            .value()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.n_max() != other.n_max() {
            return Err(NlaError::Dimension {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            let z = a.conj() * b;
            re.add(z.re);
            im.add(z.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }
}

/// Coherent state `|alpha>` truncated at `n_max`, together with the
/// neglected probability mass `sum_{n > n_max} |c_n|^2`.
pub fn make_coherent(alpha: Complex64, n_max: usize) -> Result<(FockVector, f64)> {
    if n_max < 1 {
        return domain("coherent state truncation needs n_max >= 1");
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return domain("coherent amplitude must be finite");
    }
    let mean = alpha.norm_sqr();
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-mean / 2.0).exp(), 0.0);
    amplitudes.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        amplitudes.push(c);
    }
    let tail = poisson_upper_tail(mean, n_max);
    Ok((FockVector { amplitudes }, tail))
}

/// `e^{-mean} sum_{n > n_max} mean^n / n!`. Past the mode the tail is summed
/// term by term; below it the complement is used, since the first tail terms
/// can underflow while the tail itself is close to 1.
pub(crate) fn poisson_upper_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_pmf =
        |n: usize| -mean + n as f64 * mean.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    if (n_max as f64) < mean {
        let below: CompensatedSum = (0..=n_max).map(|n| ln_pmf(n).exp()).sum();
        return (1.0 - below.value()).max(0.0);
    }
    let mut term = ln_pmf(n_max + 1).exp();
    let mut acc = CompensatedSum::new();
    let mut n = n_max + 1;
    while term > 0.0 {
        acc.add(term);
        if term < 1e-17 * acc.value() {
            break;
        }
        n += 1;
        term *= mean / n as f64;
    }
    acc.value()
}

/// Smallest `n_max >= 1` whose coherent-state truncation tail is below `tol`.
pub fn coherent_cutoff(alpha_mag: f64, tol: f64) -> usize {
    let mean = alpha_mag * alpha_mag;
    let mut n_max = 1;
    while poisson_upper_tail(mean, n_max) >= tol {
        n_max += 1;
    }
    n_max
}

/// Smallest `n_max` with geometric tail `chi^{2(n_max+1)} < tol`.
pub fn geometric_cutoff(chi: f64, tol: f64) -> usize {
    if chi <= 0.0 {
        return 1;
    }
    let n = (tol.ln() / (2.0 * chi.ln())).ceil() as i64 - 1;
    n.max(1) as usize
}

/// Real diagonal operator `sum_n d_n |n><n|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalOperator {
    entries: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("diagonal operator needs at least one entry");
        }
        Ok(DiagonalOperator { entries })
    }

    pub fn identity(n_max: usize) -> Self {
        DiagonalOperator {
            entries: vec![1.0; n_max + 1],
        }
    }

    /// The unbounded ideal amplifier `g^{a†a}`, truncated to `n_max`.
    pub fn ideal_gain(g: f64, n_max: usize) -> Self {
        DiagonalOperator {
            entries: (0..=n_max).map(|n| g.powi(n as i32)).collect(),
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn apply(&self, psi: &FockVector) -> Result<FockVector> {
        if self.entries.len() != psi.amplitudes.len() {
            return Err(NlaError::Dimension {
                expected: self.entries.len(),
                found: psi.amplitudes.len(),
            });
        }
        let amplitudes = psi
            .amplitudes
            .iter()
            .zip(&self.entries)
            .map(|(c, d)| c * *d)
            .collect();
        Ok(FockVector { amplitudes })
    }
}

/// Success operator: `d_n = g^{n-N}` for `n <= N`, `1` above.
pub fn make_ms(spec: &AmplifierSpec, n_max: usize) -> Result<DiagonalOperator> {
    spec.check_representable(n_max)?;
    Ok(DiagonalOperator {
        entries: (0..=n_max).map(|n| spec.success_amplitude(n)).collect(),
    })
}

/// Failure operator: `d_n = sqrt(1 - g^{2(n-N)})` for `n < N`, `0` from `N` on.
pub fn make_mf(spec: &AmplifierSpec, n_max: usize) -> Result<DiagonalOperator> {
    spec.check_representable(n_max)?;
    Ok(DiagonalOperator {
        entries: (0..=n_max)
            .map(|n| failure_amplitude(spec.success_amplitude(n)))
            .collect(),
    })
}

fn failure_amplitude(success: f64) -> f64 {
    if success >= 1.0 {
        0.0
    } else {
        (1.0 - success * success).sqrt()
    }
}

/// Unnormalized post-measurement state `op |psi>`; its squared norm is the
/// outcome probability when `psi` is normalized.
pub fn apply_diag(op: &DiagonalOperator, psi: &FockVector) -> Result<FockVector> {
    op.apply(psi)
}

/// Mode selector for a [`ThreeModeState`] with occupations `(n, t, n - t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    Second,
    Loss,
}

/// Real three-mode state supported on `|n, t, n - t>`, `0 <= t <= n <= n_max`.
///
/// Only the `(n, t)` pairs are stored; the loss-mode occupation is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeState {
    n_max: usize,
    amplitudes: Vec<f64>,
}

/// Largest truncation for which binomial coefficients stay finite.
const THREE_MODE_MAX: usize = 1000;

impl ThreeModeState {
    fn index(n: usize, t: usize) -> usize {
        n * (n + 1) / 2 + t
    }

    pub fn zeros(n_max: usize) -> Self {
        ThreeModeState {
            n_max,
            amplitudes: vec![0.0; Self::index(n_max + 1, 0)],
        }
    }

    /// `sum_{n, t} chi^n sqrt(C(n,t) eta^t (1-eta)^{n-t}) |n, t, n-t>`
    /// without the `sqrt(1 - chi^2)` prefactor. Any `chi >= 0` is accepted,
    /// so divergent parameter sets can still be compared after truncation.
    pub fn lossy_epr_unnormalized(chi: f64, eta: f64, n_max: usize) -> Result<Self> {
        if !(chi >= 0.0) || !chi.is_finite() {
            return domain(format!("squeezing must be finite and >= 0, got {chi}"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return domain(format!("transmission must lie in [0, 1], got {eta}"));
        }
        if n_max > THREE_MODE_MAX {
            return domain(format!(
                "three-mode truncation above {THREE_MODE_MAX} is not supported"
            ));
        }
        let mut state = Self::zeros(n_max);
        let mut chi_n = 1.0;
        for n in 0..=n_max {
            let mut binom = 1.0;
            for t in 0..=n {
                let weight = binom * eta.powi(t as i32) * (1.0 - eta).powi((n - t) as i32);
                state.amplitudes[Self::index(n, t)] = chi_n * weight.sqrt();
                binom = binom * (n - t) as f64 / (t + 1) as f64;
            }
            chi_n *= chi;
        }
        Ok(state)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitude(&self, n: usize, t: usize) -> f64 {
        self.amplitudes[Self::index(n, t)]
    }

    /// Iterates `((n, t), amplitude)` in order of increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        (0..=self.n_max)
            .flat_map(|n| (0..=n).map(move |t| (n, t)))
            .zip(self.amplitudes.iter().copied())
    }

    pub fn scale(&mut self, factor: f64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a * a)
            .sum::<CompensatedSum>()
            .value()
    }

    pub fn inner(&self, other: &ThreeModeState) -> Result<f64> {
        if self.n_max != other.n_max {
            return Err(NlaError::Dimension {
                expected: self.n_max + 1,
                found: other.n_max + 1,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum::<CompensatedSum>()
            .value())
    }

    /// Applies a diagonal operator to one mode, unnormalized.
    pub fn apply_diag(&self, op: &DiagonalOperator, mode: Mode) -> Result<ThreeModeState> {
        if op.n_max() != self.n_max {
            return Err(NlaError::Dimension {
                expected: self.n_max + 1,
                found: op.entries.len(),
            });
        }
        let d = &op.entries;
        let amplitudes = self
            .iter()
            .map(|((n, t), a)| {
                let occupation = match mode {
                    Mode::First => n,
                    Mode::Second => t,
                    Mode::Loss => n - t,
                };
                a * d[occupation]
            })
            .collect();
        Ok(ThreeModeState {
            n_max: self.n_max,
            amplitudes,
        })
    }
}

/// Heralding-qubit basis state. Block matrices are indexed `S = 0`, `F = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apparatus {
    Success,
    Failure,
}

impl Apparatus {
    pub fn index(self) -> usize {
        match self {
            Apparatus::Success => 0,
            Apparatus::Failure => 1,
        }
    }
}

pub type Block = [[f64; 2]; 2];

/// `U = sum_n |n><n| ⊗ R_n` with
/// `R_n = [[sqrt(1-G_n^2), G_n], [-G_n, sqrt(1-G_n^2)]]` in the `(S, F)` basis.
///
/// Column `F` holds `(M_S, M_F)` and column `S` holds `(M_F, -M_S)`, i.e. the
/// blocks `B_2 = M_F` and `B_1 = -M_S` that complete the dilation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointUnitary {
    blocks: Vec<Block>,
}

/// Post-interaction branches of `U (psi ⊗ |apparatus>)`, each unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Branches {
    pub success: FockVector,
    pub failure: FockVector,
}

pub fn build_joint_unitary(spec: &AmplifierSpec, n_max: usize) -> Result<JointUnitary> {
    spec.check_representable(n_max)?;
    let blocks = (0..=n_max)
        .map(|n| {
            let s = spec.success_amplitude(n);
            let c = failure_amplitude(s);
            [[c, s], [-s, c]]
        })
        .collect();
    Ok(JointUnitary { blocks })
}

impl JointUnitary {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Dense matrix over `|n> ⊗ |a>`, row/column index `2n + a`.
    pub fn dense(&self) -> DMatrix<f64> {
        let dim = 2 * self.blocks.len();
        let mut u = DMatrix::zeros(dim, dim);
        for (n, r) in self.blocks.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    u[(2 * n + i, 2 * n + j)] = r[i][j];
                }
            }
        }
        u
    }

    /// `max |U^T U - I|` over the dense matrix.
    pub fn orthogonality_error(&self) -> f64 {
        let u = self.dense();
        let dim = u.nrows();
        let gram = u.transpose() * &u;
        max_abs_diff(&gram, &DMatrix::identity(dim, dim))
    }

    pub fn apply(&self, psi: &FockVector, prepared: Apparatus) -> Result<Branches> {
        if psi.amplitudes.len() != self.blocks.len() {
            return Err(NlaError::Dimension {
                expected: self.blocks.len(),
                found: psi.amplitudes.len(),
            });
        }
        let col = prepared.index();
        let branch = |row: usize| FockVector {
            amplitudes: psi
                .amplitudes
                .iter()
                .zip(&self.blocks)
                .map(|(c, r)| c * r[row][col])
                .collect(),
        };
        Ok(Branches {
            success: branch(Apparatus::Success.index()),
            failure: branch(Apparatus::Failure.index()),
        })
    }
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Per-block rotation angle `theta_n = arcsin(min(1, g^{n-N}))`, the
/// dimensionless `H tau / hbar` of each Fock block.
pub fn hamiltonian_phase(spec: &AmplifierSpec, n_max: usize) -> Result<Vec<f64>> {
    spec.check_representable(n_max)?;
    Ok((0..=n_max)
        .map(|n| spec.success_amplitude(n).min(1.0).asin())
        .collect())
}

/// `exp(i theta Y) = cos(theta) I + sin(theta) [[0, 1], [-1, 0]]`.
pub fn generated_block(theta: f64) -> Block {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Largest entry deviation between every `R_n` and the block generated by
/// its Hamiltonian phase.
pub fn hamiltonian_reproduction_error(spec: &AmplifierSpec, n_max: usize) -> Result<f64> {
    let u = build_joint_unitary(spec, n_max)?;
    let phases = hamiltonian_phase(spec, n_max)?;
    Ok(u.blocks
        .iter()
        .zip(phases)
        .flat_map(|(r, theta)| {
            let e = generated_block(theta);
            (0..4).map(move |k| (r[k / 2][k % 2] - e[k / 2][k % 2]).abs())
        })
        .fold(0.0, f64::max))
}

/// Controlled-rotation angle for the `N = 1` gate identity,
/// `2 arccos(1/g)` under `R_y(t) = exp(-i t Y / 2)`.
pub fn n1_decomposition_angle(g: f64) -> f64 {
    2.0 * (1.0 / g).acos()
}

/// Builds `U_{N=1}` on span{|0>, |1>} ⊗ apparatus and the gate sequence
/// `-(X⊗X)(I⊗Z) C(R_y(theta)) (X⊗I)`, returning their max entry difference.
pub fn verify_n1_decomposition(g: f64) -> Result<f64> {
    let spec = AmplifierSpec::new(g, 1)?;
    let blocks = build_joint_unitary(&spec, 1)?.blocks;
    let block = |r: &Block| Matrix2::new(r[0][0], r[0][1], r[1][0], r[1][1]);
    let p0 = Matrix2::new(1.0, 0.0, 0.0, 0.0);
    let p1 = Matrix2::new(0.0, 0.0, 0.0, 1.0);
    let u: Matrix4<f64> = p0.kronecker(&block(&blocks[0])) + p1.kronecker(&block(&blocks[1]));

    let x = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let id = Matrix2::identity();
    let (s, c) = (n1_decomposition_angle(g) / 2.0).sin_cos();
    let ry = Matrix2::new(c, -s, s, c);
    let controlled: Matrix4<f64> = p0.kronecker(&id) + p1.kronecker(&ry);
    let rhs: Matrix4<f64> = -(x.kronecker(&x) * id.kronecker(&z) * controlled * x.kronecker(&id));

    Ok((u - rhs).abs().max())
}
