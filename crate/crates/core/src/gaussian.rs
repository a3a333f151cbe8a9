//! Gaussian optical states and their transformations.
//!
//! A state of `M` modes is carried by its quadrature mean vector `d`
//! (length `2M`, ordered `x1, p1, ..., xM, pM`) and covariance matrix
//! `sigma` (`2M x 2M`). Conventions, fixed once for the whole crate:
//!
//! * quadratures `x = a + a^dag`, `p = -i (a - a^dag)`, so the vacuum
//!   covariance is the identity;
//! * a coherent amplitude `alpha` displaces the mean block to
//!   `(2 Re alpha, 2 Im alpha)`;
//! * `squeeze` with `r > 0` at angle 0 reduces the x-variance;
//! * the beam splitter acts as `a -> sqrt(T) a + sqrt(1-T) b`,
//!   `b -> sqrt(1-T) a - sqrt(T) b`;
//! * `phase_shift` implements `a -> exp(i phi) a`, i.e. the quadrature
//!   rotation `R(phi) = [[cos, -sin], [sin, cos]]`.
//!
//! All operations are pure: inputs are never mutated and outputs are fresh
//! values, so states can be shared freely across worker threads.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Maximum tolerated covariance asymmetry.
const SYMMETRY_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue of `sigma + i Omega`.
const PHYSICALITY_TOL: f64 = -1e-9;

/// The symplectic form `Omega`: block diagonal `[[0, 1], [-1, 0]]` per mode.
///
/// Encodes the canonical commutation relations in the quadrature ordering
/// used by [`GaussianState`]; lossless Gaussian maps `S` preserve it,
/// `S Omega S^T = Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm<R: Real> {
    modes: usize,
    omega: DMatrix<R>,
}

impl<R: Real> SymplecticForm<R> {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument(
                "symplectic form needs at least one mode".into(),
            ));
        }
        Ok(Self {
            modes,
            omega: omega_matrix(modes),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<R> {
        &self.omega
    }
}

/// Bare `Omega` matrix for `modes` modes.
pub fn omega_matrix<R: Real>(modes: usize) -> DMatrix<R> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = R::one();
        omega[(2 * m + 1, 2 * m)] = -R::one();
    }
    omega
}

/// Quadrature rotation `R(phi)` implementing `a -> exp(i phi) a`.
pub fn rotation2<R: Real>(phi: R) -> Matrix2<R> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Single-mode squeezing block: at `angle = 0`, `diag(exp(-r), exp(r))`
/// (x-variance reduced); general angle conjugates by `R(angle)`.
pub fn squeeze2<R: Real>(r: R, angle: R) -> Matrix2<R> {
    let core = Matrix2::new((-r).exp(), R::zero(), R::zero(), r.exp());
    let rot = rotation2(angle);
    rot * core * rot.transpose()
}

/// Two-mode beam-splitter symplectic matrix on modes `(a, b)` of an
/// `modes`-mode register, transmittance `t` in `[0, 1]`.
pub fn beam_splitter_symplectic<R: Real>(
    modes: usize,
    mode_a: usize,
    mode_b: usize,
    transmittance: R,
) -> DMatrix<R> {
    let ct = transmittance.sqrt();
    let cr = (R::one() - transmittance).sqrt();
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for q in 0..2 {
        let (ia, ib) = (2 * mode_a + q, 2 * mode_b + q);
        s[(ia, ia)] = ct;
        s[(ia, ib)] = cr;
        s[(ib, ia)] = cr;
        s[(ib, ib)] = -ct;
    }
    s
}

/// Embed a 2x2 single-mode block into the full `2M x 2M` identity.
pub fn embed_single<R: Real>(modes: usize, mode: usize, block: &Matrix2<R>) -> DMatrix<R> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for i in 0..2 {
        for j in 0..2 {
            s[(2 * mode + i, 2 * mode + j)] = block[(i, j)];
        }
    }
    s
}

/// Gaussian state: quadrature means plus covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<R: Real> {
    modes: usize,
    d: DVector<R>,
    sigma: DMatrix<R>,
}

impl<R: Real> GaussianState<R> {
    /// The `modes`-mode vacuum: zero means, identity covariance.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument(
                "vacuum state needs at least one mode".into(),
            ));
        }
        Ok(Self {
            modes,
            d: DVector::zeros(2 * modes),
            sigma: DMatrix::identity(2 * modes, 2 * modes),
        })
    }

    /// Build from raw parts, validating symmetry and physicality.
    pub fn from_parts(d: DVector<R>, sigma: DMatrix<R>) -> Result<Self> {
        if d.len() == 0 || d.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "mean vector length {} is not twice a positive mode count",
                d.len()
            )));
        }
        if sigma.nrows() != d.len() || sigma.ncols() != d.len() {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}x{}, expected {}x{}",
                sigma.nrows(),
                sigma.ncols(),
                d.len(),
                d.len()
            )));
        }
        let state = Self {
            modes: d.len() / 2,
            d,
            sigma,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mean(&self) -> &DVector<R> {
        &self.d
    }

    pub fn covariance(&self) -> &DMatrix<R> {
        &self.sigma
    }

    /// Mean block `(x, p)` of one mode.
    pub fn mode_mean(&self, mode: usize) -> Result<Vector2<R>> {
        self.check_mode(mode)?;
        Ok(Vector2::new(self.d[2 * mode], self.d[2 * mode + 1]))
    }

    /// Covariance block of one mode.
    pub fn mode_covariance(&self, mode: usize) -> Result<Matrix2<R>> {
        self.check_mode(mode)?;
        let m = 2 * mode;
        Ok(Matrix2::new(
            self.sigma[(m, m)],
            self.sigma[(m, m + 1)],
            self.sigma[(m + 1, m)],
            self.sigma[(m + 1, m + 1)],
        ))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::InvalidArgument(format!(
                "mode index {} out of range for {} modes",
                mode, self.modes
            )));
        }
        Ok(())
    }

    /// Check the covariance invariants: symmetry within 1e-12 and
    /// `sigma + i Omega >= 0` with eigenvalues above -1e-9.
    pub fn validate(&self) -> Result<()> {
        let asym = max_asymmetry(&self.sigma);
        if asym > real(SYMMETRY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "covariance asymmetry {:.3e} exceeds 1e-12",
                crate::scalar::to_f64(asym)
            )));
        }
        let min = self.min_physicality_eigenvalue();
        if min < real(PHYSICALITY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "sigma + i*Omega has eigenvalue {:.3e} below -1e-9",
                crate::scalar::to_f64(min)
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the Hermitian matrix `sigma + i Omega`.
    pub fn min_physicality_eigenvalue(&self) -> R {
        let n = 2 * self.modes;
        let omega = omega_matrix::<R>(self.modes);
        let h = DMatrix::from_fn(n, n, |i, j| Complex::new(self.sigma[(i, j)], omega[(i, j)]));
        let eig = SymmetricEigen::new(h);
        let mut vals = eig.eigenvalues.iter().copied();
        let first = vals.next().expect("eigenvalue list is nonempty");
        vals.fold(first, |a, b| a.min(b))
    }

    /// Symplectic eigenvalues of the covariance matrix (each listed twice).
    ///
    /// These are the moduli of the eigenvalues of `Omega sigma`; a pure
    /// state has all of them equal to 1.
    pub fn symplectic_eigenvalues(&self) -> Vec<R> {
        let omega = omega_matrix::<R>(self.modes);
        let m = &omega * &self.sigma;
        m.complex_eigenvalues()
            .iter()
            .map(|z| z.modulus())
            .collect()
    }

    /// Williamson decomposition of the covariance matrix.
    pub fn williamson(&self) -> Result<Williamson<R>> {
        williamson(&self.sigma)
    }

    /// Apply a symplectic matrix: `d -> S d`, `sigma -> S sigma S^T`.
    fn apply_symplectic(&self, s: &DMatrix<R>) -> Self {
        Self {
            modes: self.modes,
            d: s * &self.d,
            sigma: s * &self.sigma * s.transpose(),
        }
    }

    /// Displace one mode by the complex amplitude `alpha`.
    pub fn displace(&self, mode: usize, alpha: Complex<R>) -> Result<Self> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        let two = real::<R>(2.0);
        out.d[2 * mode] += two * alpha.re;
        out.d[2 * mode + 1] += two * alpha.im;
        Ok(out)
    }

    /// Squeeze one mode by `r >= 0` along the quadrature at `angle`.
    pub fn squeeze(&self, mode: usize, r: R, angle: R) -> Result<Self> {
        self.check_mode(mode)?;
        if r < R::zero() {
            return Err(Error::InvalidArgument(
                "squeezing parameter must be nonnegative".into(),
            ));
        }
        let s = embed_single(self.modes, mode, &squeeze2(r, angle));
        Ok(self.apply_symplectic(&s))
    }

    /// Rotate one mode: `a -> exp(i phi) a`.
    pub fn phase_shift(&self, mode: usize, phi: R) -> Result<Self> {
        self.check_mode(mode)?;
        let s = embed_single(self.modes, mode, &rotation2(phi));
        Ok(self.apply_symplectic(&s))
    }

    /// Mix two modes on a beam splitter of the given transmittance.
    pub fn beam_splitter(&self, mode_a: usize, mode_b: usize, transmittance: R) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::InvalidArgument(
                "beam splitter needs two distinct modes".into(),
            ));
        }
        if transmittance < R::zero() || transmittance > R::one() {
            return Err(Error::InvalidArgument(
                "beam-splitter transmittance must lie in [0, 1]".into(),
            ));
        }
        let s = beam_splitter_symplectic(self.modes, mode_a, mode_b, transmittance);
        Ok(self.apply_symplectic(&s))
    }

    /// Phase-and-loss channel on one mode: rotate by `phi` and attenuate to
    /// transmissivity `eta`, injecting environmental vacuum.
    ///
    /// Mode block: `d -> sqrt(eta) R(phi) d`,
    /// `sigma -> eta R sigma R^T + (1 - eta) I`; covariances with the other
    /// modes are scaled by `sqrt(eta)` and rotated, exactly as the
    /// beam-splitter dilation prescribes.
    pub fn phase_loss_channel(&self, mode: usize, phi: R, eta: R) -> Result<Self> {
        self.check_mode(mode)?;
        if eta < R::zero() || eta > R::one() {
            return Err(Error::InvalidArgument(
                "transmissivity must lie in [0, 1]".into(),
            ));
        }
        let block = rotation2(phi) * eta.sqrt();
        let x = embed_single(self.modes, mode, &block);
        let mut out = self.apply_symplectic(&x);
        let one_minus = R::one() - eta;
        out.sigma[(2 * mode, 2 * mode)] += one_minus;
        out.sigma[(2 * mode + 1, 2 * mode + 1)] += one_minus;
        Ok(out)
    }

    /// Mean photon number of one mode:
    /// `(sigma_xx + sigma_pp + dx^2 + dp^2) / 4 - 1/2`.
    pub fn mean_photon(&self, mode: usize) -> Result<R> {
        self.check_mode(mode)?;
        let m = 2 * mode;
        let quarter = real::<R>(0.25);
        let half = real::<R>(0.5);
        let n = quarter
            * (self.sigma[(m, m)]
                + self.sigma[(m + 1, m + 1)]
                + self.d[m] * self.d[m]
                + self.d[m + 1] * self.d[m + 1])
            - half;
        Ok(n.max(R::zero()))
    }

    /// Total mean photon number over all modes.
    pub fn total_mean_photon(&self) -> R {
        (0..self.modes)
            .map(|m| self.mean_photon(m).expect("mode index in range"))
            .fold(R::zero(), |a, b| a + b)
    }
}

/// Williamson normal form of a covariance matrix:
/// `sigma = S diag(nu_1, nu_1, ..., nu_M, nu_M) S^T` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct Williamson<R: Real> {
    /// Symplectic eigenvalues, one per mode, `nu_k >= 1` for physical states.
    pub nus: Vec<R>,
    /// `S` of the decomposition.
    pub s: DMatrix<R>,
    /// `S^{-1}`, kept explicitly since both directions are needed.
    pub s_inv: DMatrix<R>,
}

/// Compute the Williamson decomposition of a symmetric positive-definite
/// covariance matrix.
///
/// Route: `A = sigma^{-1/2} Omega sigma^{-1/2}` is antisymmetric; its
/// canonical form `A = O (directsum kappa_k omega) O^T` (orthogonal `O`,
/// obtained from the Hermitian eigenproblem of `iA`) yields
/// `nu_k = 1 / kappa_k` and `S = sigma^{1/2} O directsum(nu_k^{-1/2} I)`.
pub fn williamson<R: Real>(sigma: &DMatrix<R>) -> Result<Williamson<R>> {
    let n = sigma.nrows();
    if n == 0 || n % 2 != 0 || sigma.ncols() != n {
        return Err(Error::InvalidArgument(
            "covariance must be square with even dimension".into(),
        ));
    }
    let modes = n / 2;

    let eig = SymmetricEigen::new(sigma.clone());
    let min_eig = eig.eigenvalues.iter().copied().fold(R::one(), |a, b| a.min(b));
    if min_eig <= R::zero() {
        return Err(Error::IllConditionedState(
            "covariance matrix is not positive definite".into(),
        ));
    }
    let q = &eig.eigenvectors;
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
    let inv_sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| R::one() / l.sqrt()));
    let sigma_sqrt = q * sqrt_diag * q.transpose();
    let sigma_inv_sqrt = q * inv_sqrt_diag * q.transpose();

    let a = &sigma_inv_sqrt * omega_matrix::<R>(modes) * &sigma_inv_sqrt;
    // Hermitian iA: eigenvalues come in +-kappa pairs
    let h = DMatrix::from_fn(n, n, |i, j| Complex::new(R::zero(), a[(i, j)]));
    let heig = SymmetricEigen::new(h);

    let mut positives: Vec<(R, usize)> = heig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, k)| **k > R::zero())
        .map(|(idx, k)| (*k, idx))
        .collect();
    if positives.len() != modes {
        return Err(Error::IllConditionedState(format!(
            "antisymmetric canonical form found {} positive eigenvalues, expected {}",
            positives.len(),
            modes
        )));
    }
    // descending kappa = ascending nu
    positives.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));

    let sqrt2 = real::<R>(2.0).sqrt();
    let mut o = DMatrix::<R>::zeros(n, n);
    let mut nus = Vec::with_capacity(modes);
    for (mode, (kappa, idx)) in positives.iter().enumerate() {
        nus.push(R::one() / *kappa);
        let u = heig.eigenvectors.column(*idx);
        // iA u = kappa u gives A x = kappa y, A y = -kappa x for
        // u = (x + i y) / sqrt(2); columns (y, x) realize the kappa*omega block
        for row in 0..n {
            o[(row, 2 * mode)] = sqrt2 * u[row].im;
            o[(row, 2 * mode + 1)] = sqrt2 * u[row].re;
        }
    }

    let mut scale = DMatrix::<R>::zeros(n, n);
    let mut scale_inv = DMatrix::<R>::zeros(n, n);
    for (mode, nu) in nus.iter().enumerate() {
        let root = nu.sqrt();
        for q in 0..2 {
            scale[(2 * mode + q, 2 * mode + q)] = R::one() / root;
            scale_inv[(2 * mode + q, 2 * mode + q)] = root;
        }
    }
    let s = &sigma_sqrt * &o * scale;
    let s_inv = scale_inv * o.transpose() * sigma_inv_sqrt;
    Ok(Williamson { nus, s, s_inv })
}

fn max_asymmetry<R: Real>(m: &DMatrix<R>) -> R {
    let mut worst = R::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Which Gaussian probe feeds the channel or interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Coherent,
    SqueezedCoherent,
    SqueezedVacuum,
}

impl ProbeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeKind::Coherent => "coherent",
            ProbeKind::SqueezedCoherent => "squeezed_coherent",
            ProbeKind::SqueezedVacuum => "squeezed_vacuum",
        }
    }
}

/// Probe specification: kind, total mean photon number and squeezing data.
///
/// `nbar = |alpha|^2 + sinh^2(r)` holds by construction. As a single-mode
/// probe this prepares `D(alpha) S(r) |0>`; as an interferometer input the
/// coherent part enters port 1 and the squeezed vacuum enters port 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec<R: Real> {
    kind: ProbeKind,
    nbar: R,
    squeeze_r: R,
    squeeze_angle: R,
    coherent_phase: R,
}

impl<R: Real> ProbeSpec<R> {
    pub fn coherent(nbar: R, coherent_phase: R) -> Result<Self> {
        if nbar < R::zero() {
            return Err(Error::InvalidArgument(
                "mean photon number must be nonnegative".into(),
            ));
        }
        Ok(Self {
            kind: ProbeKind::Coherent,
            nbar,
            squeeze_r: R::zero(),
            squeeze_angle: R::zero(),
            coherent_phase,
        })
    }

    pub fn squeezed_vacuum(squeeze_r: R, squeeze_angle: R) -> Result<Self> {
        if squeeze_r < R::zero() {
            return Err(Error::InvalidArgument(
                "squeezing parameter must be nonnegative".into(),
            ));
        }
        Ok(Self {
            kind: ProbeKind::SqueezedVacuum,
            nbar: squeeze_r.sinh() * squeeze_r.sinh(),
            squeeze_r,
            squeeze_angle,
            coherent_phase: R::zero(),
        })
    }

    /// Coherent part plus squeezed vacuum; `nbar` is the total photon
    /// budget and must cover `sinh^2(r)`.
    pub fn squeezed_coherent(
        nbar: R,
        squeeze_r: R,
        squeeze_angle: R,
        coherent_phase: R,
    ) -> Result<Self> {
        if squeeze_r < R::zero() {
            return Err(Error::InvalidArgument(
                "squeezing parameter must be nonnegative".into(),
            ));
        }
        let sq_photons = squeeze_r.sinh() * squeeze_r.sinh();
        if nbar < sq_photons - real(1e-9) {
            return Err(Error::InvalidArgument(format!(
                "nbar {:.6} below the sinh^2(r) = {:.6} carried by squeezing",
                crate::scalar::to_f64(nbar),
                crate::scalar::to_f64(sq_photons)
            )));
        }
        Ok(Self {
            kind: ProbeKind::SqueezedCoherent,
            nbar,
            squeeze_r,
            squeeze_angle,
            coherent_phase,
        })
    }

    pub fn kind(&self) -> ProbeKind {
        self.kind
    }

    pub fn nbar(&self) -> R {
        self.nbar
    }

    pub fn squeeze_r(&self) -> R {
        self.squeeze_r
    }

    pub fn squeeze_angle(&self) -> R {
        self.squeeze_angle
    }

    pub fn coherent_phase(&self) -> R {
        self.coherent_phase
    }

    /// Coherent amplitude `alpha` with `|alpha|^2 = nbar - sinh^2(r)`.
    pub fn alpha(&self) -> Complex<R> {
        let sq = self.squeeze_r.sinh() * self.squeeze_r.sinh();
        let mag2 = (self.nbar - sq).max(R::zero());
        let mag = mag2.sqrt();
        let (s, c) = self.coherent_phase.sin_cos();
        Complex::new(mag * c, mag * s)
    }

    /// Single-mode preparation `D(alpha) S(r, angle) |0>`.
    pub fn prepare_single_mode(&self) -> GaussianState<R> {
        GaussianState::vacuum(1)
            .and_then(|v| v.squeeze(0, self.squeeze_r, self.squeeze_angle))
            .and_then(|s| s.displace(0, self.alpha()))
            .expect("probe construction is valid by ProbeSpec invariants")
    }

    /// Two-mode interferometer input: coherent part in port 0, squeezed
    /// vacuum in port 1.
    pub fn mzi_input(&self) -> GaussianState<R> {
        GaussianState::vacuum(2)
            .and_then(|v| v.displace(0, self.alpha()))
            .and_then(|s| s.squeeze(1, self.squeeze_r, self.squeeze_angle))
            .expect("probe construction is valid by ProbeSpec invariants")
    }
}
