//! Gaussian-formula vs Fock-oracle comparison grid.
//!
//! Shared by the acceptance suite and the `oracle-check` CLI command: the
//! general Gaussian QFI and the SLD QFI must agree on single-mode
//! phase-and-loss families at small photon number.

use serde::Serialize;

use crate::error::Result;
use crate::fock::{prepare_probe_fock, sld_qfi};
use crate::gaussian::ProbeSpec;
use crate::metrology::{gaussian_qfi, StateFamily};
use crate::scalar::{real, Real};

#[derive(Debug, Clone, Serialize)]
pub struct OracleCase<R: Real> {
    pub probe: String,
    pub eta: R,
    pub dphi: R,
    pub gaussian: R,
    pub fock: R,
    pub rel_err: R,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport<R: Real> {
    pub cutoff: usize,
    pub cases: Vec<OracleCase<R>>,
    pub max_rel_err: R,
}

/// Default comparison grid: coherent probes with `nbar` in {0.5, 1, 2} and
/// squeezed vacua with `r` in {0.3, 0.7}, crossed with
/// `eta` in {0.3, 0.6, 1.0} and `dphi` in {0.5, 1.0}.
pub fn default_probe_grid<R: Real>() -> Vec<(String, ProbeSpec<R>)> {
    let mut probes = Vec::new();
    for nbar in [0.5, 1.0, 2.0] {
        probes.push((
            format!("coherent nbar={nbar}"),
            ProbeSpec::coherent(real(nbar), R::zero()).expect("valid probe"),
        ));
    }
    for r in [0.3, 0.7] {
        probes.push((
            format!("squeezed_vacuum r={r}"),
            ProbeSpec::squeezed_vacuum(real(r), R::zero()).expect("valid probe"),
        ));
    }
    probes
}

/// Run the comparison grid at the given Fock cutoff.
///
/// Each case encodes `phi(theta) = 0.3 + dphi * theta` at constant `eta`
/// on the bare channel (no interferometer: the oracle is single-mode) and
/// evaluates both QFI routes at `theta = 0`.
pub fn oracle_check_grid<R: Real>(
    cutoff: usize,
    gaussian_fd: R,
    fock_fd: R,
) -> Result<OracleReport<R>> {
    let mut cases = Vec::new();
    let mut max_rel = R::zero();
    let phi0 = real::<R>(0.3);

    for (name, probe) in default_probe_grid::<R>() {
        let rho0 = prepare_probe_fock(&probe, cutoff)?;
        for eta_f in [0.3, 0.6, 1.0] {
            let eta = real::<R>(eta_f);
            for dphi_f in [0.5, 1.0] {
                let dphi = real::<R>(dphi_f);

                let g_probe = probe;
                let family = StateFamily::new((real(-10.0), real(10.0)), move |theta: R| {
                    g_probe
                        .prepare_single_mode()
                        .phase_loss_channel(0, phi0 + dphi * theta, eta)
                        .expect("channel arguments are valid")
                })?;
                let gaussian = gaussian_qfi(&family, R::zero(), gaussian_fd)?.qfi;

                let fock = sld_qfi(
                    |theta: R| rho0.apply_phase_loss(phi0 + dphi * theta, eta),
                    R::zero(),
                    fock_fd,
                )?;

                let rel_err = (gaussian - fock).abs() / fock;
                max_rel = max_rel.max(rel_err);
                cases.push(OracleCase {
                    probe: name.clone(),
                    eta,
                    dphi,
                    gaussian,
                    fock,
                    rel_err,
                });
            }
        }
    }
    Ok(OracleReport {
        cutoff,
        cases,
        max_rel_err: max_rel,
    })
}
