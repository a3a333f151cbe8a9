//! Truncated Fock-space oracle.
//!
//! Brute-force number-basis implementation of probe preparation, the
//! phase-and-loss channel and the SLD-based quantum Fisher information.
//! Every Gaussian-formula result in this crate is cross-validated against
//! this module at small photon number; nothing here is optimized beyond
//! what desk-scale cutoffs (N <= 80) need.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::ProbeSpec;
use crate::scalar::{real, to_f64, Real};

type CMatrix<R> = DMatrix<Complex<R>>;

/// Acceptable truncation leakage for probe preparation.
const LEAKAGE_TOL: f64 = 1e-8;

/// Lowering and number operators on the truncated basis `|0> .. |N-1>`.
#[derive(Debug, Clone)]
pub struct FockOperators<R: Real> {
    cutoff: usize,
    lowering: CMatrix<R>,
    number: CMatrix<R>,
}

impl<R: Real> FockOperators<R> {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument(
                "Fock cutoff must be at least 2".into(),
            ));
        }
        let mut lowering = CMatrix::zeros(cutoff, cutoff);
        let mut number = CMatrix::zeros(cutoff, cutoff);
        for n in 1..cutoff {
            lowering[(n - 1, n)] = Complex::new(real::<R>(n as f64).sqrt(), R::zero());
        }
        for n in 0..cutoff {
            number[(n, n)] = Complex::new(real::<R>(n as f64), R::zero());
        }
        Ok(Self {
            cutoff,
            lowering,
            number,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn lowering(&self) -> &CMatrix<R> {
        &self.lowering
    }

    pub fn number(&self) -> &CMatrix<R> {
        &self.number
    }

    /// Displacement operator `D(alpha) = exp(alpha a^dag - alpha* a)`.
    pub fn displacement(&self, alpha: Complex<R>) -> CMatrix<R> {
        let adag = self.lowering.adjoint();
        let gen = adag.map(|z| z * alpha) - self.lowering.map(|z| z * alpha.conj());
        expm(&gen)
    }

    /// Squeezing operator `S(r, angle) = exp((xi* a^2 - xi a^dag^2)/2)` with
    /// `xi = r exp(2 i angle)`; at `angle = 0` this reduces the x-variance,
    /// matching the Gaussian-side convention.
    pub fn squeezer(&self, r: R, angle: R) -> CMatrix<R> {
        let (s2, c2) = (angle + angle).sin_cos();
        let xi = Complex::new(r * c2, r * s2);
        let a2 = &self.lowering * &self.lowering;
        let adag2 = a2.adjoint();
        let half = Complex::new(real::<R>(0.5), R::zero());
        let gen = (a2.map(|z| z * xi.conj()) - adag2.map(|z| z * xi)).map(|z| z * half);
        expm(&gen)
    }
}

/// Density matrix on the truncated number basis.
#[derive(Debug, Clone)]
pub struct FockDensityMatrix<R: Real> {
    cutoff: usize,
    rho: CMatrix<R>,
}

impl<R: Real> FockDensityMatrix<R> {
    /// Wrap a raw matrix, enforcing Hermiticity, trace and positivity.
    pub fn from_matrix(rho: CMatrix<R>) -> Result<Self> {
        let n = rho.nrows();
        if n < 2 || rho.ncols() != n {
            return Err(Error::InvalidArgument(
                "density matrix must be square with dimension >= 2".into(),
            ));
        }
        let state = Self { cutoff: n, rho };
        state.validate()?;
        Ok(state)
    }

    /// Pure state `|psi><psi|` from an unnormalized-tolerant vector.
    pub fn pure(psi: &DVector<Complex<R>>) -> Result<Self> {
        let rho = psi * psi.adjoint();
        Self::from_matrix(rho)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        let ops = FockOperators::<R>::new(cutoff)?;
        let mut psi = DVector::zeros(ops.cutoff());
        psi[0] = Complex::new(R::one(), R::zero());
        Self::pure(&psi)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.rho
    }

    pub fn trace(&self) -> R {
        (0..self.cutoff).map(|i| self.rho[(i, i)].re).fold(R::zero(), |a, b| a + b)
    }

    pub fn validate(&self) -> Result<()> {
        let mut asym = R::zero();
        for i in 0..self.cutoff {
            for j in i..self.cutoff {
                let delta = self.rho[(i, j)] - self.rho[(j, i)].conj();
                asym = asym.max(delta.modulus());
            }
        }
        if asym > real(1e-12) {
            return Err(Error::InvalidArgument(format!(
                "density matrix not Hermitian: asymmetry {:.3e}",
                to_f64(asym)
            )));
        }
        let tr = self.trace();
        if tr < real(1.0 - 1e-8) || tr > real(1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {} outside [1 - 1e-8, 1 + 1e-12]",
                to_f64(tr)
            )));
        }
        let eig = SymmetricEigen::new(self.rho.clone());
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(R::one(), |a, b| a.min(b));
        if min < real(-1e-10) {
            return Err(Error::InvalidArgument(format!(
                "density matrix not positive semidefinite: min eigenvalue {:.3e}",
                to_f64(min)
            )));
        }
        Ok(())
    }

    /// Truncation diagnostic: `max(1 - trace, population of the top 3 levels)`.
    pub fn truncation_error(&self) -> R {
        let deficit = (R::one() - self.trace()).max(R::zero());
        let from = self.cutoff.saturating_sub(3);
        let top: R = (from..self.cutoff)
            .map(|n| self.rho[(n, n)].re)
            .fold(R::zero(), |a, b| a + b);
        deficit.max(top.max(R::zero()))
    }

    /// Phase-and-loss channel: phase unitary `exp(i phi n)` followed by the
    /// loss Kraus family `K_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k`.
    pub fn apply_phase_loss(&self, phi: R, eta: R) -> Result<Self> {
        if eta < R::zero() || eta > R::one() {
            return Err(Error::InvalidArgument(
                "transmissivity must lie in [0, 1]".into(),
            ));
        }
        let n = self.cutoff;

        // phase: rho_nm -> exp(i phi (n - m)) rho_nm
        let phases: Vec<Complex<R>> = (0..n)
            .map(|k| {
                let (s, c) = (phi * real::<R>(k as f64)).sin_cos();
                Complex::new(c, s)
            })
            .collect();
        let mut rotated = self.rho.clone();
        for i in 0..n {
            for j in 0..n {
                rotated[(i, j)] = phases[i] * rotated[(i, j)] * phases[j].conj();
            }
        }

        if eta == R::one() {
            return Ok(Self {
                cutoff: n,
                rho: rotated,
            });
        }

        // loss: sum_k c_k^2 D a^k rho a^dag^k D with D = diag(eta^{n/2});
        // iterate C_k = a C_{k-1} a^dag, which keeps every step O(N^2).
        let sqrt_eta_pow: Vec<R> = (0..n)
            .map(|k| {
                if k == 0 {
                    R::one()
                } else {
                    eta.powf(real::<R>(k as f64) / real(2.0))
                }
            })
            .collect();
        let mut acc = CMatrix::zeros(n, n);
        let mut c_k = rotated;
        let mut weight = R::one(); // (1 - eta)^k / k!
        for k in 0..n {
            if k > 0 {
                c_k = lower_sandwich(&c_k);
                weight *= (R::one() - eta) / real(k as f64);
            }
            for i in 0..n {
                for j in 0..n {
                    let damp = weight * sqrt_eta_pow[i] * sqrt_eta_pow[j];
                    acc[(i, j)] += c_k[(i, j)].scale(damp);
                }
            }
        }
        Ok(Self {
            cutoff: n,
            rho: acc,
        })
    }

    /// `<n>` of the state.
    pub fn mean_photon(&self) -> R {
        (0..self.cutoff)
            .map(|k| self.rho[(k, k)].re * real(k as f64))
            .fold(R::zero(), |a, b| a + b)
    }

    /// Expectation of `x = a + a^dag`.
    pub fn mean_x(&self) -> R {
        self.quadrature_moment(|re, _| re + re)
    }

    /// Expectation of `p = -i (a - a^dag)`.
    pub fn mean_p(&self) -> R {
        self.quadrature_moment(|_, im| im + im)
    }

    fn quadrature_moment(&self, combine: fn(R, R) -> R) -> R {
        // tr(rho a) = sum_n sqrt(n+1) rho[n+1, n]
        let mut mean_a = Complex::new(R::zero(), R::zero());
        for n in 0..self.cutoff - 1 {
            let amp = real::<R>((n + 1) as f64).sqrt();
            mean_a += self.rho[(n + 1, n)].scale(amp);
        }
        combine(mean_a.re, mean_a.im)
    }

    /// Variance of the rotated quadrature `x cos(angle) + p sin(angle)`.
    pub fn quadrature_variance(&self, angle: R) -> R {
        // second moments from tr(rho a a), tr(rho a^dag a)
        let mut aa = Complex::new(R::zero(), R::zero());
        for n in 0..self.cutoff.saturating_sub(2) {
            let amp = (real::<R>((n + 1) as f64) * real::<R>((n + 2) as f64)).sqrt();
            aa += self.rho[(n + 2, n)].scale(amp);
        }
        let nbar = self.mean_photon();

        let mut mean_a = Complex::new(R::zero(), R::zero());
        for n in 0..self.cutoff - 1 {
            let amp = real::<R>((n + 1) as f64).sqrt();
            mean_a += self.rho[(n + 1, n)].scale(amp);
        }

        let (s, c) = angle.sin_cos();
        let u = Complex::new(c, s); // e^{i angle}
        // x_angle = a e^{-i angle} + a^dag e^{i angle}
        let two = real::<R>(2.0);
        let second = two * nbar + R::one() + two * (aa * u.conj() * u.conj()).re;
        let first = two * (mean_a * u.conj()).re;
        second - first * first
    }

    /// Fidelity-style overlap `tr(rho sigma)` (exact fidelity for pure states).
    pub fn overlap(&self, other: &Self) -> R {
        let mut acc = R::zero();
        for i in 0..self.cutoff {
            for j in 0..self.cutoff {
                acc += (self.rho[(i, j)] * other.rho[(j, i)]).re;
            }
        }
        acc
    }

    /// Trace distance `(1/2) ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &Self) -> R {
        let diff = &self.rho - &other.rho;
        let eig = SymmetricEigen::new(diff);
        let half = real::<R>(0.5);
        half * eig
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(R::zero(), |a, b| a + b)
    }
}

/// `a M a^dag` using the sparse structure of the lowering operator.
fn lower_sandwich<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let wi = real::<R>((i + 1) as f64).sqrt();
        for j in 0..n - 1 {
            let wj = real::<R>((j + 1) as f64).sqrt();
            out[(i, j)] = m[(i + 1, j + 1)].scale(wi * wj);
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    let n = m.nrows();
    let norm = one_norm(m);
    let mut squarings = 0usize;
    let mut scale = R::one();
    let half = real::<R>(0.5);
    let mut scaled_norm = norm;
    while scaled_norm > half && squarings < 64 {
        scaled_norm *= half;
        scale *= half;
        squarings += 1;
    }
    let a = m.map(|z| z.scale(scale));

    let mut acc = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..64 {
        term = (&term * &a).map(|z| z.scale(R::one() / real(k as f64)));
        acc += &term;
        if one_norm(&term) < real(1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

fn one_norm<R: Real>(m: &CMatrix<R>) -> R {
    let mut worst = R::zero();
    for j in 0..m.ncols() {
        let mut col = R::zero();
        for i in 0..m.nrows() {
            col += m[(i, j)].modulus();
        }
        worst = worst.max(col);
    }
    worst
}

/// Prepare `D(alpha) S(r, angle) |0>` as a density matrix, rejecting
/// cutoffs whose truncation leakage exceeds 1e-8.
pub fn prepare_probe_fock<R: Real>(
    probe: &ProbeSpec<R>,
    cutoff: usize,
) -> Result<FockDensityMatrix<R>> {
    let ops = FockOperators::<R>::new(cutoff)?;
    let mut psi = DVector::zeros(cutoff);
    psi[0] = Complex::new(R::one(), R::zero());
    if probe.squeeze_r() > R::zero() {
        psi = ops.squeezer(probe.squeeze_r(), probe.squeeze_angle()) * psi;
    }
    let alpha = probe.alpha();
    if alpha.modulus() > R::zero() {
        psi = ops.displacement(alpha) * psi;
    }
    let rho = FockDensityMatrix::from_matrix(&psi * psi.adjoint())?;
    let leak = rho.truncation_error();
    if leak > real(LEAKAGE_TOL) {
        return Err(Error::Truncation(format!(
            "leakage {:.3e} exceeds 1e-8 at cutoff {}; retry with cutoff >= {}",
            to_f64(leak),
            cutoff,
            cutoff * 2
        )));
    }
    Ok(rho)
}

/// SLD quantum Fisher information of a state family at `theta`.
///
/// `d rho / d theta` comes from central differences with one Richardson
/// step; the QFI is `2 sum |<i|d rho|j>|^2 / (lambda_i + lambda_j)` over
/// eigenpairs with `lambda_i + lambda_j > 1e-12` (the same support cut the
/// Gaussian pseudo-inverse uses).
pub fn sld_qfi<R, F>(family: F, theta: R, fd_step: R) -> Result<R>
where
    R: Real,
    F: Fn(R) -> Result<FockDensityMatrix<R>>,
{
    if fd_step <= R::zero() {
        return Err(Error::InvalidArgument("fd_step must be positive".into()));
    }
    let half = real::<R>(0.5);
    let offsets = [
        theta - fd_step,
        theta - half * fd_step,
        theta + half * fd_step,
        theta + fd_step,
    ];
    let w = crate::search::richardson_weights::<R>(fd_step);
    let center = family(theta)?;
    let n = center.cutoff();

    let mut drho = CMatrix::<R>::zeros(n, n);
    for (k, off) in offsets.iter().enumerate() {
        let state = family(*off)?;
        if state.cutoff() != n {
            return Err(Error::InvalidArgument(
                "family must keep a fixed cutoff".into(),
            ));
        }
        drho += state.matrix().map(|z| z.scale(w[k]));
    }

    // hermitize before the eigendecomposition
    let rho_h = (center.matrix() + center.matrix().adjoint()).map(|z| z.scale(half));
    let eig = SymmetricEigen::new(rho_h);
    let basis = &eig.eigenvectors;
    let l = basis.adjoint() * drho * basis;

    let cut = real::<R>(1e-12);
    let two = real::<R>(2.0);
    let mut qfi = R::zero();
    for i in 0..n {
        for j in 0..n {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            if denom > cut {
                qfi += two * l[(i, j)].norm_sqr() / denom;
            }
        }
    }
    Ok(qfi.max(R::zero()))
}
