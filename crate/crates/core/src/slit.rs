//! Fabry-Perot slit response: round-trip phase, phase generator, Airy
//! transmissivity and quality factor.
//!
//! The guided-mode dispersion `beta(lambda, theta)` and the interface phase
//! `phi_end(lambda, theta)` come from a pluggable [`DispersionModel`]:
//! either a toy analytic model (`n_eff = n_out (1 + a_len / w)`,
//! `phi_end = phi0 + b_end atan((w - w0) / s_width)`) or a tabulated grid
//! loaded from CSV for externally computed dispersion. The estimated
//! parameter `theta` substitutes for the slit width or the external index
//! according to [`ThetaName`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};
use crate::search::{bisect_to_level, golden_section_max, richardson_weights};

/// Which physical quantity the estimated parameter stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaName {
    Width,
    NOut,
}

impl ThetaName {
    pub fn name(&self) -> &'static str {
        match self {
            ThetaName::Width => "width",
            ThetaName::NOut => "n_out",
        }
    }
}

/// Toy analytic dispersion. The arctan step in `phi_end` supplies the rapid
/// interface-phase variation near `w0`; `a_len` controls how strongly the
/// effective index reacts to the width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyDispersion<R: Real> {
    pub a_len: R,
    pub b_end: R,
    pub w0: R,
    pub s_width: R,
    pub phi0: R,
}

impl<R: Real> ToyDispersion<R> {
    pub fn validate(&self) -> Result<()> {
        if self.s_width <= R::zero() {
            return Err(Error::InvalidConfig(
                "toy dispersion requires s_width > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Tabulated dispersion on a rectangular `(lambda, theta)` grid with
/// bilinear interpolation and no extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDispersion<R: Real> {
    lambdas: Vec<R>,
    thetas: Vec<R>,
    beta: Vec<R>,    // row-major: beta[il * thetas.len() + it]
    phi_end: Vec<R>, // same layout
}

impl<R: Real> TabulatedDispersion<R> {
    /// Parse the CSV interface: header `lambda_nm,theta,beta_rad_per_nm,phi_end_rad`,
    /// rows in strictly increasing lambda-major order forming a complete grid.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty dispersion table".into(),
        })?;
        let expected = "lambda_nm,theta,beta_rad_per_nm,phi_end_rad";
        if header.trim() != expected {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header must be `{expected}`, got `{}`", header.trim()),
            });
        }

        let mut rows: Vec<(R, R, R, R)> = Vec::new();
        for (idx, row) in lines {
            let line_no = idx + 1;
            let trimmed = row.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let mut vals = [R::zero(); 4];
            for (k, raw) in fields.iter().enumerate() {
                let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("field {} (`{}`) is not a number", k + 1, raw.trim()),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("field {} must be finite", k + 1),
                    });
                }
                vals[k] = real(v);
            }
            rows.push((vals[0], vals[1], vals[2], vals[3]));
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "dispersion table has no data rows".into(),
            });
        }

        // First lambda block defines the theta axis.
        let first_lambda = rows[0].0;
        let mut thetas: Vec<R> = Vec::new();
        for (l, t, _, _) in &rows {
            if *l == first_lambda {
                thetas.push(*t);
            } else {
                break;
            }
        }
        let nt = thetas.len();
        for w in thetas.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Parse {
                    line: 2,
                    msg: "theta axis must be strictly increasing".into(),
                });
            }
        }
        if rows.len() % nt != 0 {
            return Err(Error::Parse {
                line: rows.len() + 1,
                msg: format!(
                    "row count {} is not a multiple of the theta-axis length {}",
                    rows.len(),
                    nt
                ),
            });
        }
        let nl = rows.len() / nt;
        let mut lambdas: Vec<R> = Vec::with_capacity(nl);
        let mut beta = Vec::with_capacity(rows.len());
        let mut phi_end = Vec::with_capacity(rows.len());
        for il in 0..nl {
            let block_lambda = rows[il * nt].0;
            if let Some(prev) = lambdas.last() {
                if block_lambda <= *prev {
                    return Err(Error::Parse {
                        line: il * nt + 2,
                        msg: "lambda axis must be strictly increasing".into(),
                    });
                }
            }
            lambdas.push(block_lambda);
            for it in 0..nt {
                let line_no = il * nt + it + 2;
                let (l, t, b, p) = rows[il * nt + it];
                if l != block_lambda {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "rows must be grouped lambda-major".into(),
                    });
                }
                if t != thetas[it] {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "theta axis must repeat identically in every lambda block".into(),
                    });
                }
                beta.push(b);
                phi_end.push(p);
            }
        }
        if nl < 2 || nt < 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "dispersion grid needs at least 2 nodes per axis".into(),
            });
        }
        Ok(Self {
            lambdas,
            thetas,
            beta,
            phi_end,
        })
    }

    pub fn theta_range(&self) -> (R, R) {
        (self.thetas[0], *self.thetas.last().unwrap())
    }

    pub fn lambda_range(&self) -> (R, R) {
        (self.lambdas[0], *self.lambdas.last().unwrap())
    }

    fn bracket(axis: &[R], x: R, what: &str) -> Result<(usize, R)> {
        let lo = axis[0];
        let hi = *axis.last().unwrap();
        if x < lo || x > hi {
            return Err(Error::OutOfRange(format!(
                "{} = {} outside tabulated range [{}, {}]",
                what,
                to_f64(x),
                to_f64(lo),
                to_f64(hi)
            )));
        }
        let mut i = match axis.iter().position(|v| *v > x) {
            Some(p) => p - 1,
            None => axis.len() - 2,
        };
        if i >= axis.len() - 1 {
            i = axis.len() - 2;
        }
        let frac = (x - axis[i]) / (axis[i + 1] - axis[i]);
        Ok((i, frac))
    }

    fn interpolate(&self, table: &[R], lambda: R, theta: R) -> Result<R> {
        let (il, fl) = Self::bracket(&self.lambdas, lambda, "lambda")?;
        let (it, ft) = Self::bracket(&self.thetas, theta, "theta")?;
        let nt = self.thetas.len();
        let g = |a: usize, b: usize| table[a * nt + b];
        let one = R::one();
        Ok(g(il, it) * (one - fl) * (one - ft)
            + g(il + 1, it) * fl * (one - ft)
            + g(il, it + 1) * (one - fl) * ft
            + g(il + 1, it + 1) * fl * ft)
    }

    pub fn beta_at(&self, lambda: R, theta: R) -> Result<R> {
        self.interpolate(&self.beta, lambda, theta)
    }

    pub fn phi_end_at(&self, lambda: R, theta: R) -> Result<R> {
        self.interpolate(&self.phi_end, lambda, theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionModel<R: Real> {
    Toy(ToyDispersion<R>),
    Tabulated(TabulatedDispersion<R>),
}

/// Channel parameters at one operating point: phase, transmissivity and
/// their derivatives with respect to the estimated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FPChannelPoint<R: Real> {
    pub theta: R,
    pub phi: R,
    pub eta: R,
    pub dphi_dtheta: R,
    pub deta_dtheta: R,
    pub theta_name: ThetaName,
}

impl<R: Real> FPChannelPoint<R> {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.theta, self.phi, self.eta, self.dphi_dtheta, self.deta_dtheta]
            .iter()
            .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidArgument(
                "channel point fields must be finite".into(),
            ));
        }
        if self.eta < R::zero() || self.eta > R::one() {
            return Err(Error::InvalidArgument(
                "channel transmissivity must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Resonance summary at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceReport<R: Real> {
    pub lambda_res: R,
    pub fwhm: R,
    pub q_factor: R,
    pub t_peak: R,
}

/// Slit geometry, environment and cavity parameters.
///
/// `mirror_r0` is the facet reflection magnitude `|r|`, `tau` the
/// single-interface transmission magnitude; construction rejects
/// combinations whose Airy peak `tau^4 / (1 - r0^2)^2` would exceed 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitConfig<R: Real> {
    pub w: R,
    pub t: R,
    pub n_out: R,
    pub lambda0: R,
    pub theta_name: ThetaName,
    pub dispersion: DispersionModel<R>,
    pub mirror_r0: R,
    pub tau: R,
}

impl<R: Real> SlitConfig<R> {
    pub fn new(
        w: R,
        t: R,
        n_out: R,
        lambda0: R,
        theta_name: ThetaName,
        dispersion: DispersionModel<R>,
        mirror_r0: R,
        tau: R,
    ) -> Result<Self> {
        let cfg = Self {
            w,
            t,
            n_out,
            lambda0,
            theta_name,
            dispersion,
            mirror_r0,
            tau,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w <= R::zero() || self.t <= R::zero() || self.lambda0 <= R::zero() {
            return Err(Error::InvalidConfig(
                "slit lengths (w, t, lambda0) must be strictly positive".into(),
            ));
        }
        if self.w >= self.lambda0 {
            return Err(Error::InvalidConfig(
                "subwavelength regime requires w < lambda0".into(),
            ));
        }
        if self.n_out < R::one() {
            return Err(Error::InvalidConfig("n_out must be >= 1".into()));
        }
        if self.mirror_r0 < R::zero() || self.mirror_r0 >= R::one() {
            return Err(Error::InvalidConfig("mirror_r0 must lie in [0, 1)".into()));
        }
        if self.tau <= R::zero() || self.tau > R::one() {
            return Err(Error::InvalidConfig("tau must lie in (0, 1]".into()));
        }
        let r2 = self.mirror_r0 * self.mirror_r0;
        let peak = self.tau.powi(4) / ((R::one() - r2) * (R::one() - r2));
        if peak > R::one() + real(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "Airy peak tau^4/(1-r0^2)^2 = {:.4} exceeds 1; reduce tau or mirror_r0",
                to_f64(peak)
            )));
        }
        if let DispersionModel::Toy(toy) = &self.dispersion {
            toy.validate()?;
        }
        Ok(())
    }

    /// Demo toy configuration: one resonance inside the default window and
    /// visibly separated optima. Demo constants, not measured data.
    pub fn demo_toy() -> Self {
        Self {
            w: real(120.0),
            t: real(300.0),
            n_out: R::one(),
            lambda0: real(650.0),
            theta_name: ThetaName::Width,
            dispersion: DispersionModel::Toy(ToyDispersion {
                a_len: real(20.0),
                b_end: real(2.0),
                w0: real(120.0),
                s_width: real(15.0),
                phi0: real(0.6),
            }),
            mirror_r0: real(0.85),
            tau: real(0.5),
        }
    }

    /// `(w, n_out)` with `theta` substituted per `theta_name`.
    fn resolved_geometry(&self, theta: R) -> (R, R) {
        match self.theta_name {
            ThetaName::Width => (theta, self.n_out),
            ThetaName::NOut => (self.w, theta),
        }
    }

    /// Parameter interval on which the model is defined (open interval for
    /// the toy variant, grid extent for tabulated data).
    pub fn theta_validity_range(&self) -> (R, R) {
        match &self.dispersion {
            DispersionModel::Toy(_) => match self.theta_name {
                ThetaName::Width => (R::zero(), self.lambda0),
                ThetaName::NOut => (R::one(), real(1e6)),
            },
            DispersionModel::Tabulated(tab) => tab.theta_range(),
        }
    }

    /// Guided-mode propagation constant `beta(lambda, theta)` in rad/nm.
    pub fn propagation_constant(&self, lambda: R, theta: R) -> Result<R> {
        if lambda <= R::zero() {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        match &self.dispersion {
            DispersionModel::Toy(toy) => {
                let (w, n_out) = self.resolved_geometry(theta);
                if w <= R::zero() {
                    return Err(Error::OutOfRange("toy model needs w > 0".into()));
                }
                let n_eff = n_out * (R::one() + toy.a_len / w);
                Ok(R::two_pi() / lambda * n_eff)
            }
            DispersionModel::Tabulated(tab) => tab.beta_at(lambda, theta),
        }
    }

    /// Interface-induced phase at the slit openings.
    pub fn end_phase(&self, lambda: R, theta: R) -> Result<R> {
        match &self.dispersion {
            DispersionModel::Toy(toy) => {
                let (w, _) = self.resolved_geometry(theta);
                Ok(toy.phi0 + toy.b_end * ((w - toy.w0) / toy.s_width).atan())
            }
            DispersionModel::Tabulated(tab) => tab.phi_end_at(lambda, theta),
        }
    }

    /// Total unwrapped round-trip phase `Phi = 2 beta t + 2 phi_end`.
    pub fn round_trip_phase(&self, lambda: R, theta: R) -> Result<R> {
        let two = real::<R>(2.0);
        Ok(two * self.propagation_constant(lambda, theta)? * self.t
            + two * self.end_phase(lambda, theta)?)
    }

    /// Airy transmission `T = tau^4 / |1 - r0^2 exp(i Phi)|^2`.
    pub fn transmission(&self, lambda: R, theta: R) -> Result<R> {
        let phi = self.round_trip_phase(lambda, theta)?;
        let r2 = self.mirror_r0 * self.mirror_r0;
        let (s, c) = phi.sin_cos();
        let denom = (R::one() - r2 * c) * (R::one() - r2 * c) + r2 * s * r2 * s;
        Ok(self.tau.powi(4) / denom)
    }

    /// Channel parameters at `theta`: phase and transmissivity at
    /// `lambda0` plus central-difference derivatives (step `fd_step` with
    /// one Richardson refinement).
    pub fn channel_point(&self, theta: R, fd_step: R) -> Result<FPChannelPoint<R>> {
        if fd_step <= R::zero() {
            return Err(Error::InvalidArgument("fd_step must be positive".into()));
        }
        let (lo, hi) = self.theta_validity_range();
        if theta - fd_step <= lo || theta + fd_step >= hi {
            return Err(Error::OutOfRange(format!(
                "theta = {} must stay at least fd_step = {} inside ({}, {})",
                to_f64(theta),
                to_f64(fd_step),
                to_f64(lo),
                to_f64(hi)
            )));
        }
        let phi = self.round_trip_phase(self.lambda0, theta)?;
        let eta = self.transmission(self.lambda0, theta)?;

        let offsets = [
            theta - fd_step,
            theta - fd_step / real(2.0),
            theta + fd_step / real(2.0),
            theta + fd_step,
        ];
        let w = richardson_weights::<R>(fd_step);
        let mut dphi = R::zero();
        let mut deta = R::zero();
        for (k, off) in offsets.iter().enumerate() {
            dphi += w[k] * self.round_trip_phase(self.lambda0, *off)?;
            deta += w[k] * self.transmission(self.lambda0, *off)?;
        }

        let point = FPChannelPoint {
            theta,
            phi,
            eta: eta.clamp(R::zero(), R::one()),
            dphi_dtheta: dphi,
            deta_dtheta: deta,
            theta_name: self.theta_name,
        };
        point.validate()?;
        Ok(point)
    }

    /// Locate the resonance inside `window` and report `Q = lambda_res / FWHM`.
    ///
    /// The peak is found by golden-section maximization of `T(lambda)`
    /// (1e-6 nm tolerance); the half-maximum crossings by bisection on each
    /// side. The window must contain exactly one transmission maximum.
    pub fn quality_factor(&self, theta: R, window: (R, R)) -> Result<ResonanceReport<R>> {
        let (a, b) = window;
        if a <= R::zero() || b <= a {
            return Err(Error::InvalidArgument(
                "wavelength window must satisfy 0 < min < max".into(),
            ));
        }
        let tol = real::<R>(1e-6);
        let t_of = |lambda: R| {
            self.transmission(lambda, theta)
                .expect("transmission defined on positive wavelengths")
        };
        let (lambda_res, t_peak) = golden_section_max(&t_of, a, b, tol);

        let edge_margin = real::<R>(16.0) * tol;
        if lambda_res - a < edge_margin || b - lambda_res < edge_margin {
            return Err(Error::NoResonance(format!(
                "no interior transmission maximum in [{}, {}] at theta = {}",
                to_f64(a),
                to_f64(b),
                to_f64(theta)
            )));
        }
        let t_a = t_of(a);
        let t_b = t_of(b);
        let flat = real::<R>(1e-12) * t_peak;
        if t_peak - t_a <= flat || t_peak - t_b <= flat {
            return Err(Error::NoResonance(format!(
                "transmission is flat or edge-peaked in the window at theta = {}",
                to_f64(theta)
            )));
        }

        let half = t_peak / real(2.0);
        if t_a >= half || t_b >= half {
            return Err(Error::WindowTooNarrow(format!(
                "half-maximum not bracketed in [{}, {}] at theta = {}",
                to_f64(a),
                to_f64(b),
                to_f64(theta)
            )));
        }
        let left = bisect_to_level(&t_of, a, lambda_res, half, tol);
        let right = bisect_to_level(&t_of, lambda_res, b, half, tol);
        let fwhm = right - left;
        if fwhm <= R::zero() {
            return Err(Error::NoResonance(
                "degenerate full width at half maximum".into(),
            ));
        }
        Ok(ResonanceReport {
            lambda_res,
            fwhm,
            q_factor: lambda_res / fwhm,
            t_peak,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn toy_cfg(
        a_len: f64,
        b_end: f64,
        w0: f64,
        s_width: f64,
        phi0: f64,
        r0: f64,
        tau: f64,
        t: f64,
        n_out: f64,
        theta_name: ThetaName,
    ) -> SlitConfig<f64> {
        SlitConfig::new(
            100.0,
            t,
            n_out,
            650.0,
            theta_name,
            DispersionModel::Toy(ToyDispersion {
                a_len,
                b_end,
                w0,
                s_width,
                phi0,
            }),
            r0,
            tau,
        )
        .unwrap()
    }

    #[test]
    fn propagation_constant_examples() {
        let plane = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.0, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        assert_relative_eq!(
            plane.propagation_constant(600.0, 100.0).unwrap(),
            2.0 * PI / 600.0,
            max_relative = 1e-14
        );

        let toy = toy_cfg(20.0, 0.0, 120.0, 15.0, 0.0, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        let beta = toy.propagation_constant(600.0, 100.0).unwrap();
        assert_relative_eq!(beta, (2.0 * PI / 600.0) * 1.2, max_relative = 1e-12);
        assert_relative_eq!(beta, 0.0125664, max_relative = 1e-5);
    }

    #[test]
    fn end_phase_examples() {
        let cfg = toy_cfg(0.0, 2.0, 120.0, 15.0, 0.6, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        assert_relative_eq!(cfg.end_phase(650.0, 120.0).unwrap(), 0.6, max_relative = 1e-14);

        // arctan asymptote
        let far = cfg.end_phase(650.0, 120.0 + 1e6 * 15.0).unwrap();
        assert_relative_eq!(far, 0.6 + 2.0 * PI / 2.0, epsilon = 1e-5);

        let flat = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.6, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        for w in [60.0, 100.0, 200.0] {
            assert_eq!(flat.end_phase(650.0, w).unwrap(), 0.6);
        }
    }

    #[test]
    fn round_trip_phase_recomposition() {
        // beta t = pi, phi_end = 0 -> Phi = 2 pi
        let cfg = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.0, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        let lambda = 2.0 * cfg.n_out * cfg.t; // beta t = pi exactly
        assert_relative_eq!(
            cfg.round_trip_phase(lambda, 100.0).unwrap(),
            2.0 * PI,
            max_relative = 1e-12
        );

        // phi_end = pi/2, beta = 0 model is unreachable (lambda finite), so
        // check the term-by-term recomposition on the default toy instead.
        let demo = SlitConfig::<f64>::demo_toy();
        let theta = 123.0;
        let lhs = demo.round_trip_phase(650.0, theta).unwrap();
        let rhs = 2.0 * demo.propagation_constant(650.0, theta).unwrap() * demo.t
            + 2.0 * demo.end_phase(650.0, theta).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn pure_end_phase_limit() {
        // beta = 0 with phi_end = pi/2 gives Phi = pi; expressible with a
        // tabulated model since the toy beta never vanishes.
        let half_pi = PI / 2.0;
        let csv = format!(
            "lambda_nm,theta,beta_rad_per_nm,phi_end_rad\n\
             400,50,0,{half_pi}\n400,250,0,{half_pi}\n\
             900,50,0,{half_pi}\n900,250,0,{half_pi}\n"
        );
        let tab = TabulatedDispersion::<f64>::from_csv_str(&csv).unwrap();
        let cfg = SlitConfig::new(
            100.0,
            300.0,
            1.0,
            650.0,
            ThetaName::Width,
            DispersionModel::Tabulated(tab),
            0.5,
            0.5,
        )
        .unwrap();
        assert_relative_eq!(
            cfg.round_trip_phase(650.0, 100.0).unwrap(),
            PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn transmission_airy_values() {
        let r0: f64 = 0.6;
        let tau = 0.55;
        let cfg = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.0, r0, tau, 300.0, 1.5, ThetaName::Width);
        let r = r0 * r0;

        // on resonance: Phi = 2 pi m exactly at lambda = 2 n t / m
        let lambda_res = 2.0 * 1.5 * 300.0 / 1.0;
        let t_peak = cfg.transmission(lambda_res, 100.0).unwrap();
        assert_relative_eq!(t_peak, tau.powi(4) / (1.0 - r).powi(2), max_relative = 1e-12);

        // anti-resonance: Phi = (2m + 1) pi at lambda = 4 n t / (2 m + 1)
        let lambda_anti = 4.0 * 1.5 * 300.0 / 3.0;
        let t_min = cfg.transmission(lambda_anti, 100.0).unwrap();
        assert_relative_eq!(t_min, tau.powi(4) / (1.0 + r).powi(2), max_relative = 1e-12);

        // no cavity
        let flat = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.0, 0.0, 0.55, 300.0, 1.5, ThetaName::Width);
        for lambda in [400.0, 650.0, 900.0] {
            assert_relative_eq!(
                flat.transmission(lambda, 100.0).unwrap(),
                tau.powi(4),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn construction_rejects_superunitary_peak() {
        // tau too large for the chosen reflectivity: Airy peak above 1
        let bad = SlitConfig::new(
            100.0,
            300.0,
            1.0,
            650.0,
            ThetaName::Width,
            DispersionModel::Toy(ToyDispersion {
                a_len: 0.0,
                b_end: 0.0,
                w0: 120.0,
                s_width: 15.0,
                phi0: 0.0,
            }),
            0.85,
            0.6,
        );
        assert!(matches!(bad, Err(Error::InvalidConfig(_))));

        let not_subwavelength = SlitConfig::new(
            700.0,
            300.0,
            1.0,
            650.0,
            ThetaName::Width,
            DispersionModel::Toy(ToyDispersion {
                a_len: 0.0,
                b_end: 0.0,
                w0: 120.0,
                s_width: 15.0,
                phi0: 0.0,
            }),
            0.5,
            0.5,
        );
        assert!(not_subwavelength.is_err());
    }

    #[test]
    fn channel_point_interface_dominated_width() {
        // beta independent of w: dphi/dtheta = 2 b_end / s_width at w = w0
        let cfg = toy_cfg(0.0, 2.0, 120.0, 15.0, 0.6, 0.5, 0.5, 300.0, 1.0, ThetaName::Width);
        let p = cfg.channel_point(120.0, 1e-4).unwrap();
        assert_relative_eq!(p.dphi_dtheta, 2.0 * 2.0 / 15.0, max_relative = 1e-9);
        assert_eq!(p.theta_name, ThetaName::Width);
    }

    #[test]
    fn channel_point_n_out_slope() {
        // theta = n_out, a_len = 0: dphi/dtheta = 4 pi t / lambda0
        let cfg = toy_cfg(0.0, 2.0, 120.0, 15.0, 0.6, 0.5, 0.5, 300.0, 1.0, ThetaName::NOut);
        let p = cfg.channel_point(1.4, 1e-5).unwrap();
        assert_relative_eq!(
            p.dphi_dtheta,
            4.0 * PI * 300.0 / 650.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn channel_point_fd_matches_analytic_over_grid() {
        let demo = SlitConfig::<f64>::demo_toy();
        let (a_len, b_end, w0, s) = (20.0, 2.0, 120.0, 15.0);
        for k in 0..50 {
            let w = 70.0 + (210.0 - 70.0) * (k as f64) / 49.0;
            let p = demo.channel_point(w, 1e-4).unwrap();
            // analytic derivative of 2 beta t + 2 phi_end in w
            let dbeta = (2.0 * PI / 650.0) * demo.n_out * (-a_len / (w * w));
            let dphe = b_end / s / (1.0 + ((w - w0) / s).powi(2));
            let analytic = 2.0 * demo.t * dbeta + 2.0 * dphe;
            assert_relative_eq!(p.dphi_dtheta, analytic, max_relative = 1e-6);
        }
    }

    #[test]
    fn channel_point_rejects_edge() {
        let demo = SlitConfig::<f64>::demo_toy();
        assert!(matches!(
            demo.channel_point(0.5, 1.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn quality_factor_matches_finesse_oracle() {
        // dispersionless: n_eff = n_out, phi_end constant
        let r: f64 = 0.9; // intensity reflectance
        let r0 = r.sqrt();
        let tau = (0.8 * (1.0 - r)).sqrt();
        let cfg = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.3, r0, tau, 300.0, 1.5, ThetaName::Width);
        let rep = cfg.quality_factor(100.0, (700.0, 1400.0)).unwrap();
        // analytic: lambda_res from Phi = 2 pi, Q = F * 2 n t / lambda_res
        let lambda_res = 4.0 * PI * 1.5 * 300.0 / (2.0 * PI - 0.6);
        let finesse = PI * r.sqrt() / (1.0 - r);
        let q_analytic = finesse * 2.0 * 1.5 * 300.0 / lambda_res;
        assert_relative_eq!(rep.lambda_res, lambda_res, max_relative = 1e-6);
        assert!(
            (rep.q_factor - q_analytic).abs() / q_analytic < 0.02,
            "numeric Q {} vs analytic {}",
            rep.q_factor,
            q_analytic
        );
        // self-consistency
        assert_relative_eq!(rep.q_factor * rep.fwhm, rep.lambda_res, max_relative = 1e-9);
    }

    #[test]
    fn quality_factor_flat_spectrum_errors() {
        let flat = toy_cfg(0.0, 0.0, 120.0, 15.0, 0.3, 0.0, 0.5, 300.0, 1.5, ThetaName::Width);
        assert!(matches!(
            flat.quality_factor(100.0, (700.0, 1400.0)),
            Err(Error::NoResonance(_))
        ));
    }

    #[test]
    fn doubling_thickness_doubles_q() {
        // phi0 = 0 keeps lambda_res = 2 n t / m identical for (t, m=1) and (2t, m=2)
        let r: f64 = 0.9;
        let mk = |t: f64| {
            toy_cfg(
                0.0,
                0.0,
                120.0,
                15.0,
                0.0,
                r.sqrt(),
                (0.8 * (1.0 - r)).sqrt(),
                t,
                1.5,
                ThetaName::Width,
            )
        };
        let q1 = mk(300.0).quality_factor(100.0, (700.0, 1200.0)).unwrap();
        let q2 = mk(600.0).quality_factor(100.0, (700.0, 1200.0)).unwrap();
        assert_relative_eq!(q2.lambda_res, q1.lambda_res, max_relative = 1e-6);
        assert!(
            (q2.q_factor / q1.q_factor - 2.0).abs() < 0.03,
            "Q ratio {}",
            q2.q_factor / q1.q_factor
        );
    }

    #[test]
    fn transmission_bounds_hold_across_window() {
        let demo = SlitConfig::<f64>::demo_toy();
        let r = demo.mirror_r0 * demo.mirror_r0;
        let t4 = demo.tau.powi(4);
        let (lo, hi) = (t4 / (1.0 + r).powi(2), t4 / (1.0 - r).powi(2));
        for k in 0..200 {
            let lambda = 430.0 + (900.0 - 430.0) * (k as f64) / 199.0;
            let t = demo.transmission(lambda, 123.0).unwrap();
            assert!(t >= lo - 1e-12 && t <= hi + 1e-12);
        }
    }

    #[test]
    fn richardson_close_to_single_step() {
        let demo = SlitConfig::<f64>::demo_toy();
        let theta = 110.0;
        let h = 1e-4;
        let p = demo.channel_point(theta, h).unwrap();
        let single = (demo.round_trip_phase(650.0, theta + h).unwrap()
            - demo.round_trip_phase(650.0, theta - h).unwrap())
            / (2.0 * h);
        assert_relative_eq!(p.dphi_dtheta, single, max_relative = 1e-4);
    }

    #[test]
    fn interface_dominance_at_w0() {
        let demo = SlitConfig::<f64>::demo_toy();
        let h = 1e-4;
        let w0 = 120.0;
        let dbeta_term = 2.0 * demo.t
            * (demo.propagation_constant(650.0, w0 + h).unwrap()
                - demo.propagation_constant(650.0, w0 - h).unwrap())
            / (2.0 * h);
        let dend_term = 2.0
            * (demo.end_phase(650.0, w0 + h).unwrap() - demo.end_phase(650.0, w0 - h).unwrap())
            / (2.0 * h);
        assert!(dend_term.abs() > dbeta_term.abs());
    }

    #[test]
    fn tabulated_round_trip_and_errors() {
        let csv = "lambda_nm,theta,beta_rad_per_nm,phi_end_rad\n\
                   600,100,0.010,0.50\n\
                   600,120,0.011,0.55\n\
                   700,100,0.009,0.40\n\
                   700,120,0.010,0.45\n";
        let tab = TabulatedDispersion::<f64>::from_csv_str(csv).unwrap();
        // node identity
        assert_eq!(tab.beta_at(600.0, 120.0).unwrap(), 0.011);
        assert_eq!(tab.phi_end_at(700.0, 100.0).unwrap(), 0.40);
        // bilinear midpoint
        assert_relative_eq!(tab.beta_at(650.0, 110.0).unwrap(), 0.01, max_relative = 1e-12);
        // no extrapolation
        assert!(matches!(
            tab.beta_at(500.0, 110.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            tab.beta_at(650.0, 130.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn tabulated_parse_errors_carry_line_numbers() {
        let bad_field = "lambda_nm,theta,beta_rad_per_nm,phi_end_rad\n600,100,abc,0.5\n";
        match TabulatedDispersion::<f64>::from_csv_str(bad_field) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let bad_order = "lambda_nm,theta,beta_rad_per_nm,phi_end_rad\n\
                         600,100,0.01,0.5\n600,90,0.01,0.5\n";
        assert!(matches!(
            TabulatedDispersion::<f64>::from_csv_str(bad_order),
            Err(Error::Parse { .. })
        ));

        let bad_header = "lambda,theta,beta,phi\n600,100,0.01,0.5\n";
        match TabulatedDispersion::<f64>::from_csv_str(bad_header) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
