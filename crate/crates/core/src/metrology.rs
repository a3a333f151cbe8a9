//! Quantum and classical Fisher information for the phase-and-loss channel
//! and its Mach-Zehnder readout.
//!
//! Two levels of bookkeeping are exposed deliberately. [`coherent_qfi`] is
//! the channel-level closed form for a coherent probe sent straight through
//! the channel; [`build_mzi_output`] + [`gaussian_qfi`] give the
//! interferometric protocol value, where only half of the input energy
//! traverses the sensing arm. The two differ by that energy-splitting
//! factor; conflating them is the classic factor-of-2 mistake.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{omega_matrix, GaussianState, ProbeKind, ProbeSpec};
use crate::scalar::{real, to_f64, Real};
use crate::search::{golden_section_max, richardson_weights};
use crate::slit::FPChannelPoint;

/// How a QFI value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    ClosedForm,
    GaussianGeneral,
    Oracle,
}

/// One Fisher-information evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherReport<R: Real> {
    pub theta: R,
    pub qfi: R,
    pub method: QfiMethod,
    pub fd_step: R,
}

/// Where a family's validity interval came from; picks the error reported
/// when a finite-difference stencil leaves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DomainOrigin {
    User,
    LossClamp,
}

/// A theta-parametrized family of Gaussian output states.
///
/// The evaluator must be deterministic and safe to call concurrently at
/// distinct theta.
pub struct StateFamily<R: Real> {
    evaluator: Box<dyn Fn(R) -> GaussianState<R> + Send + Sync>,
    theta_domain: (R, R),
    origin: DomainOrigin,
}

impl<R: Real> StateFamily<R> {
    pub fn new<F>(theta_domain: (R, R), evaluator: F) -> Result<Self>
    where
        F: Fn(R) -> GaussianState<R> + Send + Sync + 'static,
    {
        if theta_domain.0 >= theta_domain.1 {
            return Err(Error::InvalidArgument(
                "theta domain must satisfy min < max".into(),
            ));
        }
        Ok(Self {
            evaluator: Box::new(evaluator),
            theta_domain,
            origin: DomainOrigin::User,
        })
    }

    pub fn theta_domain(&self) -> (R, R) {
        self.theta_domain
    }

    pub fn state_at(&self, theta: R) -> GaussianState<R> {
        (self.evaluator)(theta)
    }

    /// Require `[theta - h, theta + h]` inside the domain.
    fn check_window(&self, theta: R, h: R) -> Result<()> {
        if h <= R::zero() {
            return Err(Error::InvalidArgument("fd_step must be positive".into()));
        }
        let (lo, hi) = self.theta_domain;
        if theta - h < lo || theta + h > hi {
            let msg = format!(
                "stencil [{}, {}] leaves the family domain ({}, {})",
                to_f64(theta - h),
                to_f64(theta + h),
                to_f64(lo),
                to_f64(hi)
            );
            return Err(match self.origin {
                DomainOrigin::User => Error::OutOfRange(msg),
                DomainOrigin::LossClamp => Error::LinearizationInvalid(msg),
            });
        }
        Ok(())
    }
}

impl<R: Real> std::fmt::Debug for StateFamily<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateFamily")
            .field("theta_domain", &(to_f64(self.theta_domain.0), to_f64(self.theta_domain.1)))
            .finish()
    }
}

/// Quantum Cramer-Rao bound: minimal variance `1 / (nu * qfi)` after `nu`
/// repetitions. Nonpositive information yields the distinct
/// [`Error::UnboundedVariance`] signal.
pub fn crb_bound<R: Real>(qfi: R, nu: u64) -> Result<R> {
    if nu == 0 {
        return Err(Error::InvalidArgument(
            "repetition count must be at least 1".into(),
        ));
    }
    if qfi <= R::zero() {
        return Err(Error::UnboundedVariance);
    }
    Ok(R::one() / (real::<R>(nu as f64) * qfi))
}

/// Channel-level coherent-probe QFI:
/// `F = 4 nbar [eta (dphi)^2 + (deta)^2 / (4 eta)]`.
///
/// Exact for the map `alpha -> sqrt(eta) exp(i phi) alpha`; for constant
/// eta it reduces to `4 nbar eta (dphi)^2`, i.e. a loss factor
/// `g_coh(eta) = eta` with `g_coh(1) = 1`.
pub fn coherent_qfi<R: Real>(nbar: R, point: &FPChannelPoint<R>) -> Result<FisherReport<R>> {
    if nbar < R::zero() {
        return Err(Error::InvalidArgument(
            "mean photon number must be nonnegative".into(),
        ));
    }
    point.validate()?;
    let four = real::<R>(4.0);
    let qfi = if point.eta == R::zero() {
        if point.deta_dtheta != R::zero() {
            return Err(Error::SingularLoss(
                "eta = 0 with nonzero deta/dtheta: (deta)^2/(4 eta) diverges".into(),
            ));
        }
        R::zero()
    } else {
        nbar * four
            * (point.eta * point.dphi_dtheta * point.dphi_dtheta
                + point.deta_dtheta * point.deta_dtheta / (four * point.eta))
    };
    Ok(FisherReport {
        theta: point.theta,
        qfi,
        method: QfiMethod::ClosedForm,
        fd_step: R::zero(),
    })
}

/// General Gaussian QFI from finite-differenced moments.
///
/// Derivatives of `d` and `sigma` come from central differences with one
/// Richardson step. For mixed states
/// `F = 1/2 vec(ds)^T (sigma (x) sigma - Omega (x) Omega)^+ vec(ds)
///    + dd^T sigma^{-1} dd`,
/// evaluated through the Williamson factorization
/// `sigma (x) sigma - Omega (x) Omega
///    = (S (x) S)(D (x) D - Omega (x) Omega)(S (x) S)^T`:
/// the pseudo-inverse support cut is applied to the canonical middle factor,
/// which keeps the value invariant under fixed Gaussian postprocessing even
/// when some modes are pure (their null directions are dropped canonically).
/// When every symplectic eigenvalue sits within 1e-6 of 1 the covariance
/// term switches to the pure-state form `1/4 tr[(sigma^{-1} ds)^2]`.
pub fn gaussian_qfi<R: Real>(
    family: &StateFamily<R>,
    theta: R,
    fd_step: R,
) -> Result<FisherReport<R>> {
    family.check_window(theta, fd_step)?;
    let center = family.state_at(theta);
    let modes = center.modes();
    let n = 2 * modes;
    let half = real::<R>(0.5);

    let offsets = [
        theta - fd_step,
        theta - half * fd_step,
        theta + half * fd_step,
        theta + fd_step,
    ];
    let w = richardson_weights::<R>(fd_step);
    let mut dd = DVector::<R>::zeros(n);
    let mut ds = DMatrix::<R>::zeros(n, n);
    for (k, off) in offsets.iter().enumerate() {
        let s = family.state_at(*off);
        dd += s.mean() * w[k];
        ds += s.covariance() * w[k];
    }
    let ds = (&ds + &ds.transpose()) * half;

    let sigma = center.covariance().clone();
    let sigma_inv = sigma.clone().try_inverse().ok_or_else(|| {
        Error::IllConditionedState("covariance matrix is numerically singular".into())
    })?;

    let williamson = center.williamson()?;
    let pure = williamson
        .nus
        .iter()
        .all(|nu| (*nu - R::one()).abs() <= real(1e-6));

    let f_cov = if pure {
        let m = &sigma_inv * &ds;
        real::<R>(0.25) * (&m * &m).trace()
    } else {
        let mut d_form = DMatrix::<R>::zeros(n, n);
        for (mode, nu) in williamson.nus.iter().enumerate() {
            d_form[(2 * mode, 2 * mode)] = *nu;
            d_form[(2 * mode + 1, 2 * mode + 1)] = *nu;
        }
        let omega = omega_matrix::<R>(modes);
        let canonical = d_form.kronecker(&d_form) - omega.kronecker(&omega);
        let svd = nalgebra::SVD::new(canonical, true, true);
        let smax = svd.singular_values.max();
        let pinv = svd
            .pseudo_inverse(smax * real(1e-10))
            .map_err(|e| Error::IllConditionedState(e.to_string()))?;
        let ds_canonical = &williamson.s_inv * &ds * williamson.s_inv.transpose();
        let vec_ds = DVector::from_iterator(n * n, ds_canonical.iter().cloned());
        half * (vec_ds.transpose() * &pinv * &vec_ds)[(0, 0)]
    };
    let f_disp = (dd.transpose() * &sigma_inv * &dd)[(0, 0)];
    let mut qfi = f_cov + f_disp;
    if qfi < R::zero() {
        if qfi >= real(-1e-9) {
            qfi = R::zero();
        } else {
            return Err(Error::IllConditionedState(format!(
                "QFI evaluated to {:.3e} < -1e-9",
                to_f64(qfi)
            )));
        }
    }
    Ok(FisherReport {
        theta,
        qfi,
        method: QfiMethod::GaussianGeneral,
        fd_step,
    })
}

/// Two-mode Mach-Zehnder output family around a channel working point.
///
/// Circuit: coherent part in port 0 and squeezed vacuum in port 1, 50:50
/// beam splitter, phase-and-loss channel `(phi(theta), eta(theta))` on arm
/// 0 and the fixed reference phase on arm 1, then a second 50:50 beam
/// splitter. `phi` and `eta` are linearized from the channel point around
/// its working theta; the family domain is the interval where the
/// linearized `eta` needs no clamping.
pub fn build_mzi_output<R: Real>(
    probe: &ProbeSpec<R>,
    point: &FPChannelPoint<R>,
    phi_ref: R,
) -> Result<StateFamily<R>> {
    point.validate()?;
    let big = real::<R>(1e30);
    let (lo_off, hi_off) = if point.deta_dtheta == R::zero() {
        (-big, big)
    } else {
        let to_zero = -point.eta / point.deta_dtheta;
        let to_one = (R::one() - point.eta) / point.deta_dtheta;
        (to_zero.min(to_one), to_zero.max(to_one))
    };
    if lo_off >= R::zero() || hi_off <= R::zero() {
        return Err(Error::LinearizationInvalid(format!(
            "eta = {} sits on a clamping boundary with deta/dtheta = {}",
            to_f64(point.eta),
            to_f64(point.deta_dtheta)
        )));
    }

    let half = real::<R>(0.5);
    let after_bs1 = probe.mzi_input().beam_splitter(0, 1, half)?;
    let (theta0, phi0, dphi) = (point.theta, point.phi, point.dphi_dtheta);
    let (eta0, deta) = (point.eta, point.deta_dtheta);
    let evaluator = move |theta: R| {
        let dt = theta - theta0;
        let phi = phi0 + dphi * dt;
        let eta = (eta0 + deta * dt).clamp(R::zero(), R::one());
        after_bs1
            .phase_loss_channel(0, phi, eta)
            .and_then(|s| s.phase_shift(1, phi_ref))
            .and_then(|s| s.beam_splitter(0, 1, half))
            .expect("interferometer arguments are valid by construction")
    };
    Ok(StateFamily {
        evaluator: Box::new(evaluator),
        theta_domain: (theta0 + lo_off, theta0 + hi_off),
        origin: DomainOrigin::LossClamp,
    })
}

/// Per-offset mean and covariance of one mode, shared by the homodyne
/// routines so the angle search does not re-evaluate the family.
struct ModeSamples<R: Real> {
    d: [Vector2<R>; 5],
    cov: [Matrix2<R>; 5],
    h: R,
}

impl<R: Real> ModeSamples<R> {
    fn collect(family: &StateFamily<R>, theta: R, mode: usize, h: R) -> Result<Self> {
        family.check_window(theta, h)?;
        let half = real::<R>(0.5);
        let points = [
            theta - h,
            theta - half * h,
            theta + half * h,
            theta + h,
            theta,
        ];
        let mut d = [Vector2::zeros(); 5];
        let mut cov = [Matrix2::zeros(); 5];
        for (k, th) in points.iter().enumerate() {
            let s = family.state_at(*th);
            d[k] = s.mode_mean(mode)?;
            cov[k] = s.mode_covariance(mode)?;
        }
        Ok(Self { d, cov, h })
    }

    fn fisher_at(&self, angle: R) -> Result<R> {
        let u = Vector2::new(angle.cos(), angle.sin());
        let mu: Vec<R> = self.d.iter().map(|d| u.dot(d)).collect();
        let var: Vec<R> = self.cov.iter().map(|c| (u.transpose() * c * u)[0]).collect();
        let v = var[4];
        if v <= real(1e-12) {
            return Err(Error::DegenerateDistribution(
                "quadrature variance vanishes".into(),
            ));
        }
        let w = richardson_weights::<R>(self.h);
        let mut dmu = R::zero();
        let mut dvar = R::zero();
        for k in 0..4 {
            dmu += w[k] * mu[k];
            dvar += w[k] * var[k];
        }
        Ok(dmu * dmu / v + dvar * dvar / (real::<R>(2.0) * v * v))
    }
}

/// Classical Fisher information of a homodyne measurement of one mode at a
/// fixed quadrature angle: `(d mu)^2 / v + (d v)^2 / (2 v^2)` for the
/// Gaussian outcome distribution.
pub fn homodyne_fi<R: Real>(
    family: &StateFamily<R>,
    theta: R,
    mode: usize,
    quad_angle: R,
    fd_step: R,
) -> Result<R> {
    ModeSamples::collect(family, theta, mode, fd_step)?.fisher_at(quad_angle)
}

/// Best homodyne angle in `[0, pi)` and its Fisher information, by a
/// coarse scan plus golden-section refinement (1e-8 rad tolerance).
pub fn optimal_homodyne_fi<R: Real>(
    family: &StateFamily<R>,
    theta: R,
    mode: usize,
    fd_step: R,
) -> Result<(R, R)> {
    let samples = ModeSamples::collect(family, theta, mode, fd_step)?;
    // reject states whose quadrature statistics are unusable anywhere
    samples.fisher_at(R::zero())?;

    let pi = R::pi();
    let coarse = 64usize;
    let mut best_k = 0usize;
    let mut best = -R::one();
    for k in 0..coarse {
        let a = pi * real::<R>(k as f64) / real(coarse as f64);
        let v = samples.fisher_at(a)?;
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let step = pi / real(coarse as f64);
    let center = pi * real::<R>(best_k as f64) / real(coarse as f64);
    let f = |a: R| samples.fisher_at(a).unwrap_or_else(|_| R::zero());
    let (raw_angle, fi) = golden_section_max(f, center - step, center + step, real(1e-8));
    let mut angle = raw_angle;
    while angle < R::zero() {
        angle += pi;
    }
    while angle >= pi {
        angle -= pi;
    }
    Ok((angle, fi))
}

/// Poisson photon-counting Fisher information `(d lambda)^2 / lambda`.
pub fn counting_fi<R: Real>(mean_counts: R, d_mean_counts: R) -> Result<R> {
    if mean_counts <= R::zero() {
        return Err(Error::InvalidArgument(
            "Poisson mean must be positive".into(),
        ));
    }
    Ok(d_mean_counts * d_mean_counts / mean_counts)
}

/// Balanced-detection Fisher information of a coherent-probe interferometer:
/// difference photocurrent `mu1 - mu2` with shot-noise variance `mu1 + mu2`.
///
/// Restricted to coherent probes, where the photon-counting statistics of
/// both ports are Poissonian and the shot-noise variance is exact.
pub fn balanced_detection_fi<R: Real>(
    probe: &ProbeSpec<R>,
    point: &FPChannelPoint<R>,
    phi_ref: R,
    fd_step: R,
) -> Result<R> {
    if probe.kind() != ProbeKind::Coherent {
        return Err(Error::InvalidArgument(
            "balanced detection is defined for coherent probes only".into(),
        ));
    }
    let family = build_mzi_output(probe, point, phi_ref)?;
    family.check_window(point.theta, fd_step)?;
    let half = real::<R>(0.5);
    let theta = point.theta;
    let offsets = [
        theta - fd_step,
        theta - half * fd_step,
        theta + half * fd_step,
        theta + fd_step,
    ];
    let w = richardson_weights::<R>(fd_step);
    let mut d_diff = R::zero();
    for (k, off) in offsets.iter().enumerate() {
        let s = family.state_at(*off);
        d_diff += w[k] * (s.mean_photon(0)? - s.mean_photon(1)?);
    }
    let center = family.state_at(theta);
    let variance = center.mean_photon(0)? + center.mean_photon(1)?;
    if variance <= real(1e-12) {
        return Err(Error::DegenerateDistribution(
            "both output ports are dark".into(),
        ));
    }
    Ok(d_diff * d_diff / variance)
}
