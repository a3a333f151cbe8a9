//! Parameter sweep: per-theta channel data, quality factor, QFI and
//! classical-FI columns, CSV emission and argmax comparison.
//!
//! Records are keyed by theta and assembled deterministically, so a sweep
//! may be evaluated on any number of worker threads and still produce
//! bitwise-identical CSV output.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{ProbeKind, ProbeSpec};
use crate::metrology::{
    balanced_detection_fi, build_mzi_output, gaussian_qfi, optimal_homodyne_fi,
};
use crate::scalar::{real, to_f64, Real};
use crate::search::parabola_vertex;
use crate::slit::SlitConfig;

/// Uniform theta grid `min..=max` with `points >= 3` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaGrid<R: Real> {
    pub min: R,
    pub max: R,
    pub points: usize,
}

impl<R: Real> ThetaGrid<R> {
    pub fn step(&self) -> R {
        (self.max - self.min) / real((self.points - 1) as f64)
    }

    pub fn values(&self) -> Vec<R> {
        let step = self.step();
        (0..self.points)
            .map(|i| self.min + step * real(i as f64))
            .collect()
    }
}

/// Whether the sweep takes eta from the slit model or pins it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode<R: Real> {
    Model,
    Fixed(R),
}

#[derive(Debug, Clone)]
pub struct SweepConfig<R: Real> {
    pub slit: SlitConfig<R>,
    pub theta_grid: ThetaGrid<R>,
    pub probes: Vec<ProbeSpec<R>>,
    pub phi_ref: R,
    pub eta_mode: EtaMode<R>,
    pub fd_step: R,
    pub q_window: (R, R),
}

impl<R: Real> SweepConfig<R> {
    pub fn validate(&self) -> Result<()> {
        self.slit.validate()?;
        if self.theta_grid.points < 3 {
            return Err(Error::InvalidConfig("theta grid needs >= 3 points".into()));
        }
        if self.theta_grid.min >= self.theta_grid.max {
            return Err(Error::InvalidConfig(
                "theta grid needs min < max".into(),
            ));
        }
        if self.probes.is_empty() {
            return Err(Error::InvalidConfig("at least one probe required".into()));
        }
        if let EtaMode::Fixed(eta) = self.eta_mode {
            if eta <= R::zero() || eta > R::one() {
                return Err(Error::InvalidConfig(
                    "fixed eta must lie in (0, 1]".into(),
                ));
            }
        }
        if self.fd_step <= R::zero() {
            return Err(Error::InvalidConfig("fd_step must be positive".into()));
        }
        Ok(())
    }

    /// Demo sweep reproducing the shipped narrative: width sweep over
    /// [60, 220] nm with one coherent, one squeezed-assisted and one
    /// squeezed-vacuum probe.
    pub fn demo() -> Self {
        Self {
            slit: SlitConfig::demo_toy(),
            theta_grid: ThetaGrid {
                min: real(60.0),
                max: real(220.0),
                points: 81,
            },
            probes: vec![
                ProbeSpec::coherent(R::one(), R::zero()).expect("valid probe"),
                // anti-squeezed along the coherent quadrature: that is the
                // orientation that enhances the arm-phase information
                ProbeSpec::squeezed_coherent(R::one(), real(0.4), R::frac_pi_2(), R::zero())
                    .expect("valid probe"),
                ProbeSpec::squeezed_vacuum(real(0.6), R::zero()).expect("valid probe"),
            ],
            phi_ref: R::zero(),
            eta_mode: EtaMode::Model,
            fd_step: real(1e-5),
            q_window: (real(430.0), real(900.0)),
        }
    }
}

/// Stable CSV column labels for a probe list: the probe kind, with `_2`,
/// `_3`, ... appended to repeats in order.
pub fn probe_labels<R: Real>(probes: &[ProbeSpec<R>]) -> Vec<String> {
    let mut labels = Vec::with_capacity(probes.len());
    for probe in probes {
        let base = probe.kind().name().to_string();
        let dupes = labels.iter().filter(|l: &&String| {
            l.as_str() == base || l.strip_prefix(base.as_str()).is_some_and(|s| s.starts_with('_'))
        });
        let count = dupes.count();
        if count == 0 {
            labels.push(base);
        } else {
            labels.push(format!("{base}_{}", count + 1));
        }
    }
    labels
}

/// One sweep sample. `qfi` is aligned with the sweep's probe labels;
/// `q_factor` is absent when no resonance is bracketed at this theta;
/// the classical-FI columns are present when the sweep has a coherent
/// probe to read out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord<R: Real> {
    pub theta: R,
    pub phi: R,
    pub dphi_dtheta: R,
    pub eta: R,
    pub deta_dtheta: R,
    pub q_factor: Option<R>,
    pub gen_sq: R,
    pub qfi: Vec<R>,
    pub fi_homodyne_opt: Option<R>,
    pub fi_balanced: Option<R>,
}

/// Sweep output: labeled records in increasing theta order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<R: Real> {
    pub labels: Vec<String>,
    pub records: Vec<SweepRecord<R>>,
}

/// Refined argmax location of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedArgmax<R: Real> {
    pub theta: R,
    pub value: R,
    pub at_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOptima<R: Real> {
    pub label: String,
    pub argmax_qfi: RefinedArgmax<R>,
    pub separation: R,
    pub separated: bool,
}

/// Argmax comparison behind the headline claim: where the quality factor
/// peaks versus where the information peaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimaReport<R: Real> {
    pub argmax_q: RefinedArgmax<R>,
    pub argmax_gen: RefinedArgmax<R>,
    pub probes: Vec<ProbeOptima<R>>,
    pub grid_step: R,
    pub normalized_curves_included: bool,
}

/// Evaluate the full sweep. Points where the channel or a Fisher column
/// fails are skipped; if more than half of the grid fails the sweep as a
/// whole is an error listing the failing thetas.
pub fn run_sweep<R: Real>(cfg: &SweepConfig<R>) -> Result<SweepResult<R>> {
    cfg.validate()?;
    let labels = probe_labels(&cfg.probes);
    let thetas = cfg.theta_grid.values();

    let outcomes: Vec<(R, Result<SweepRecord<R>>)> = thetas
        .par_iter()
        .map(|theta| (*theta, evaluate_point(cfg, *theta)))
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures: Vec<(R, Error)> = Vec::new();
    for (theta, outcome) in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err(err) => failures.push((theta, err)),
        }
    }
    if failures.len() * 2 > thetas.len() {
        let listed: Vec<String> = failures
            .iter()
            .take(8)
            .map(|(theta, err)| format!("theta = {}: {}", to_f64(*theta), err))
            .collect();
        return Err(Error::SweepFailed(format!(
            "{} of {} grid points failed; first failures: {}",
            failures.len(),
            thetas.len(),
            listed.join("; ")
        )));
    }
    Ok(SweepResult { labels, records })
}

fn evaluate_point<R: Real>(cfg: &SweepConfig<R>, theta: R) -> Result<SweepRecord<R>> {
    let mut point = cfg.slit.channel_point(theta, cfg.fd_step)?;
    if let EtaMode::Fixed(eta) = cfg.eta_mode {
        point.eta = eta;
        point.deta_dtheta = R::zero();
    }

    let q_factor = match cfg.slit.quality_factor(theta, cfg.q_window) {
        Ok(report) => Some(report.q_factor),
        Err(Error::NoResonance(_)) | Err(Error::WindowTooNarrow(_)) => None,
        Err(other) => return Err(other),
    };

    let mut qfi = Vec::with_capacity(cfg.probes.len());
    for probe in &cfg.probes {
        let family = build_mzi_output(probe, &point, cfg.phi_ref)?;
        qfi.push(gaussian_qfi(&family, theta, cfg.fd_step)?.qfi);
    }

    // classical readout columns follow the first coherent probe
    let coherent = cfg
        .probes
        .iter()
        .find(|p| p.kind() == ProbeKind::Coherent);
    let (fi_homodyne_opt, fi_balanced) = match coherent {
        Some(probe) => {
            let family = build_mzi_output(probe, &point, cfg.phi_ref)?;
            let (_, fi_a) = optimal_homodyne_fi(&family, theta, 0, cfg.fd_step)?;
            let (_, fi_b) = optimal_homodyne_fi(&family, theta, 1, cfg.fd_step)?;
            let balanced = balanced_detection_fi(probe, &point, cfg.phi_ref, cfg.fd_step)?;
            (Some(fi_a.max(fi_b)), Some(balanced))
        }
        None => (None, None),
    };

    Ok(SweepRecord {
        theta,
        phi: point.phi,
        dphi_dtheta: point.dphi_dtheta,
        eta: point.eta,
        deta_dtheta: point.deta_dtheta,
        q_factor,
        gen_sq: point.dphi_dtheta * point.dphi_dtheta,
        qfi,
        fi_homodyne_opt,
        fi_balanced,
    })
}

fn format_value<R: Real>(v: R) -> String {
    format!("{}", to_f64(v))
}

fn format_opt<R: Real>(v: Option<R>) -> String {
    v.map(format_value).unwrap_or_default()
}

impl<R: Real> SweepResult<R> {
    pub fn header(&self) -> String {
        let mut cols = vec![
            "theta".to_string(),
            "phi".to_string(),
            "dphi_dtheta".to_string(),
            "eta".to_string(),
            "deta_dtheta".to_string(),
            "q_factor".to_string(),
            "gen_sq".to_string(),
        ];
        for label in &self.labels {
            cols.push(format!("qfi_{label}"));
        }
        cols.push("fi_homodyne_opt".to_string());
        cols.push("fi_balanced".to_string());
        cols.join(",")
    }

    /// Grid spacing inferred from the first two records.
    pub fn grid_step(&self) -> Result<R> {
        if self.records.len() < 2 {
            return Err(Error::NoData("need at least two records".into()));
        }
        Ok(self.records[1].theta - self.records[0].theta)
    }

    /// Deterministic CSV emission; absent values become empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header());
        out.push('\n');
        for r in &self.records {
            let mut fields = vec![
                format_value(r.theta),
                format_value(r.phi),
                format_value(r.dphi_dtheta),
                format_value(r.eta),
                format_value(r.deta_dtheta),
                format_opt(r.q_factor),
                format_value(r.gen_sq),
            ];
            for q in &r.qfi {
                fields.push(format_value(*q));
            }
            fields.push(format_opt(r.fi_homodyne_opt));
            fields.push(format_opt(r.fi_balanced));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Figure-style companion: every curve divided by its own grid maximum.
    /// Raw values stay in the main CSV.
    pub fn to_normalized_csv(&self) -> String {
        let mut out = String::new();
        let mut cols = vec!["theta".to_string(), "q_factor".to_string(), "gen_sq".to_string()];
        for label in &self.labels {
            cols.push(format!("qfi_{label}"));
        }
        cols.push("fi_homodyne_opt".to_string());
        cols.push("fi_balanced".to_string());
        out.push_str(&cols.join(","));
        out.push('\n');

        let max_of = |get: &dyn Fn(&SweepRecord<R>) -> Option<R>| -> Option<R> {
            self.records
                .iter()
                .filter_map(get)
                .fold(None, |acc: Option<R>, v| Some(acc.map_or(v, |a| a.max(v))))
        };
        let q_max = max_of(&|r| r.q_factor);
        let gen_max = max_of(&|r| Some(r.gen_sq));
        let qfi_max: Vec<Option<R>> = (0..self.labels.len())
            .map(|i| max_of(&move |r: &SweepRecord<R>| r.qfi.get(i).copied()))
            .collect();
        let hom_max = max_of(&|r| r.fi_homodyne_opt);
        let bal_max = max_of(&|r| r.fi_balanced);

        let norm = |v: Option<R>, max: Option<R>| -> String {
            match (v, max) {
                (Some(v), Some(m)) if m > R::zero() => format_value(v / m),
                (Some(v), _) => format_value(v),
                _ => String::new(),
            }
        };
        for r in &self.records {
            let mut fields = vec![
                format_value(r.theta),
                norm(r.q_factor, q_max),
                norm(Some(r.gen_sq), gen_max),
            ];
            for (i, q) in r.qfi.iter().enumerate() {
                fields.push(norm(Some(*q), qfi_max[i]));
            }
            fields.push(norm(r.fi_homodyne_opt, hom_max));
            fields.push(norm(r.fi_balanced, bal_max));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse a CSV produced by [`Self::to_csv`].
    pub fn from_csv(text: &str) -> Result<SweepResult<R>> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty sweep CSV".into(),
        })?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let fixed_head = [
            "theta",
            "phi",
            "dphi_dtheta",
            "eta",
            "deta_dtheta",
            "q_factor",
            "gen_sq",
        ];
        if cols.len() < fixed_head.len() + 2
            || cols[..fixed_head.len()] != fixed_head
            || cols[cols.len() - 2] != "fi_homodyne_opt"
            || cols[cols.len() - 1] != "fi_balanced"
        {
            return Err(Error::Parse {
                line: 1,
                msg: "unrecognized sweep CSV header".into(),
            });
        }
        let labels: Vec<String> = cols[fixed_head.len()..cols.len() - 2]
            .iter()
            .map(|c| {
                c.strip_prefix("qfi_").map(str::to_string).ok_or(Error::Parse {
                    line: 1,
                    msg: format!("expected qfi_<probe> column, found `{c}`"),
                })
            })
            .collect::<Result<_>>()?;

        let mut records = Vec::new();
        for (idx, row) in lines {
            let line = idx + 1;
            if row.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
                });
            }
            let req = |k: usize| -> Result<R> {
                let raw = fields[k].trim();
                let v: f64 = raw.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column `{}` value `{}` is not a number", cols[k], raw),
                })?;
                Ok(real(v))
            };
            let opt = |k: usize| -> Result<Option<R>> {
                if fields[k].trim().is_empty() {
                    Ok(None)
                } else {
                    req(k).map(Some)
                }
            };
            let mut qfi = Vec::with_capacity(labels.len());
            for i in 0..labels.len() {
                qfi.push(req(fixed_head.len() + i)?);
            }
            records.push(SweepRecord {
                theta: req(0)?,
                phi: req(1)?,
                dphi_dtheta: req(2)?,
                eta: req(3)?,
                deta_dtheta: req(4)?,
                q_factor: opt(5)?,
                gen_sq: req(6)?,
                qfi,
                fi_homodyne_opt: opt(cols.len() - 2)?,
                fi_balanced: opt(cols.len() - 1)?,
            });
        }
        Ok(SweepResult { labels, records })
    }

    fn column(&self, name: &str) -> Result<Vec<Option<R>>> {
        let get: Box<dyn Fn(&SweepRecord<R>) -> Option<R>> = match name {
            "q_factor" => Box::new(|r: &SweepRecord<R>| r.q_factor),
            "gen_sq" => Box::new(|r: &SweepRecord<R>| Some(r.gen_sq)),
            "fi_homodyne_opt" => Box::new(|r: &SweepRecord<R>| r.fi_homodyne_opt),
            "fi_balanced" => Box::new(|r: &SweepRecord<R>| r.fi_balanced),
            other => match other
                .strip_prefix("qfi_")
                .and_then(|label| self.labels.iter().position(|l| l == label))
            {
                Some(i) => Box::new(move |r: &SweepRecord<R>| r.qfi.get(i).copied()),
                None => {
                    return Err(Error::NoData(format!("unknown column `{name}`")));
                }
            },
        };
        Ok(self.records.iter().map(|r| get(r)).collect())
    }
}

/// Locate the grid argmax of a column and refine it by parabolic
/// interpolation through the bracketing neighbors.
///
/// Falls back to the grid point when the parabola is degenerate
/// (curvature >= -1e-15) or its vertex leaves the bracket; ties break
/// toward the smallest theta; a boundary argmax is returned as-is with
/// `at_edge` set.
pub fn refine_argmax<R: Real>(result: &SweepResult<R>, column: &str) -> Result<RefinedArgmax<R>> {
    let values = result.column(column)?;
    let mut best: Option<(usize, R)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            let better = match best {
                None => true,
                Some((_, b)) => *v > b,
            };
            if better {
                best = Some((i, *v));
            }
        }
    }
    let (i, value) = best.ok_or_else(|| {
        Error::NoData(format!("column `{column}` is absent from every record"))
    })?;

    if i == 0 || i == values.len() - 1 {
        return Ok(RefinedArgmax {
            theta: result.records[i].theta,
            value,
            at_edge: true,
        });
    }
    let (left, right) = (values[i - 1], values[i + 1]);
    let grid = RefinedArgmax {
        theta: result.records[i].theta,
        value,
        at_edge: false,
    };
    let (Some(yl), Some(yr)) = (left, right) else {
        return Ok(grid);
    };
    let (xl, x, xr) = (
        result.records[i - 1].theta,
        result.records[i].theta,
        result.records[i + 1].theta,
    );
    match parabola_vertex(xl, yl, x, value, xr, yr) {
        Some((xv, yv, curvature))
            if curvature < real(-1e-15) && xv >= xl && xv <= xr =>
        {
            Ok(RefinedArgmax {
                theta: xv,
                value: yv,
                at_edge: false,
            })
        }
        _ => Ok(grid),
    }
}

/// Compare the refined optima of `q_factor`, `gen_sq` and every QFI column.
pub fn compare_optima<R: Real>(result: &SweepResult<R>) -> Result<OptimaReport<R>> {
    let grid_step = result.grid_step()?;
    let argmax_q = refine_argmax(result, "q_factor")?;
    let argmax_gen = refine_argmax(result, "gen_sq")?;
    let two = real::<R>(2.0);
    let probes = result
        .labels
        .iter()
        .map(|label| {
            let argmax_qfi = refine_argmax(result, &format!("qfi_{label}"))?;
            let separation = (argmax_q.theta - argmax_qfi.theta).abs();
            Ok(ProbeOptima {
                label: label.clone(),
                argmax_qfi,
                separation,
                separated: separation > two * grid_step,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimaReport {
        argmax_q,
        argmax_gen,
        probes,
        grid_step,
        normalized_curves_included: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(records: Vec<(f64, Option<f64>, f64)>) -> SweepResult<f64> {
        // (theta, q_factor, gen_sq) with one dummy probe column equal to gen_sq
        SweepResult {
            labels: vec!["coherent".into()],
            records: records
                .into_iter()
                .map(|(theta, q, gen)| SweepRecord {
                    theta,
                    phi: 0.0,
                    dphi_dtheta: gen.sqrt(),
                    eta: 0.5,
                    deta_dtheta: 0.0,
                    q_factor: q,
                    gen_sq: gen,
                    qfi: vec![gen],
                    fi_homodyne_opt: None,
                    fi_balanced: None,
                })
                .collect(),
        }
    }

    fn parabola_records(center: f64) -> Vec<(f64, Option<f64>, f64)> {
        (0..13)
            .map(|i| {
                let theta = 0.05 * i as f64;
                let gen = 1.0 - (theta - center).powi(2);
                let q = 10.0 - (theta - 0.5).powi(2);
                (theta, Some(q), gen)
            })
            .collect()
    }

    #[test]
    fn refine_argmax_exact_on_parabola() {
        let res = synthetic(parabola_records(0.30));
        let refined = refine_argmax(&res, "gen_sq").unwrap();
        assert_relative_eq!(refined.theta, 0.30, epsilon = 1e-12);
        assert_relative_eq!(refined.value, 1.0, epsilon = 1e-12);
        assert!(!refined.at_edge);
    }

    #[test]
    fn refine_argmax_constant_ties_to_smallest() {
        let rows: Vec<_> = (0..5).map(|i| (i as f64, Some(2.0), 3.0)).collect();
        let res = synthetic(rows);
        let refined = refine_argmax(&res, "q_factor").unwrap();
        assert_eq!(refined.theta, 0.0);
        assert_eq!(refined.value, 2.0);
        assert!(refined.at_edge); // smallest theta is the grid edge
    }

    #[test]
    fn refine_argmax_boundary_flagged() {
        let rows: Vec<_> = (0..5).map(|i| (i as f64, Some(i as f64), 1.0)).collect();
        let res = synthetic(rows);
        let refined = refine_argmax(&res, "q_factor").unwrap();
        assert_eq!(refined.theta, 4.0);
        assert!(refined.at_edge);
    }

    #[test]
    fn refine_argmax_missing_column() {
        let rows: Vec<_> = (0..5).map(|i| (i as f64, None, 1.0)).collect();
        let res = synthetic(rows);
        assert!(matches!(
            refine_argmax(&res, "q_factor"),
            Err(Error::NoData(_))
        ));
        assert!(matches!(
            refine_argmax(&res, "qfi_nonexistent"),
            Err(Error::NoData(_))
        ));
    }

    #[test]
    fn compare_optima_synthetic_separation() {
        // gen_sq (and the qfi column) peak at 0.30, q_factor at 0.50
        let res = synthetic(parabola_records(0.30));
        let report = compare_optima(&res).unwrap();
        assert_relative_eq!(report.argmax_q.theta, 0.50, epsilon = 1e-12);
        assert_relative_eq!(report.probes[0].argmax_qfi.theta, 0.30, epsilon = 1e-12);
        assert_relative_eq!(report.probes[0].separation, 0.20, epsilon = 1e-12);
        assert!(report.probes[0].separated); // 0.20 > 2 * 0.05
        assert!(matches!(
            compare_optima(&synthetic(
                (0..5).map(|i| (i as f64, None, 1.0)).collect()
            )),
            Err(Error::NoData(_))
        ));
    }

    #[test]
    fn probe_labels_disambiguate() {
        let probes = vec![
            ProbeSpec::<f64>::coherent(1.0, 0.0).unwrap(),
            ProbeSpec::<f64>::coherent(2.0, 0.0).unwrap(),
            ProbeSpec::<f64>::squeezed_vacuum(0.3, 0.0).unwrap(),
            ProbeSpec::<f64>::coherent(3.0, 0.0).unwrap(),
        ];
        assert_eq!(
            probe_labels(&probes),
            vec!["coherent", "coherent_2", "squeezed_vacuum", "coherent_3"]
        );
    }

    #[test]
    fn csv_round_trip() {
        let res = synthetic(parabola_records(0.30));
        let csv = res.to_csv();
        assert!(csv.starts_with(
            "theta,phi,dphi_dtheta,eta,deta_dtheta,q_factor,gen_sq,qfi_coherent,fi_homodyne_opt,fi_balanced\n"
        ));
        let parsed = SweepResult::<f64>::from_csv(&csv).unwrap();
        assert_eq!(parsed, res);
        assert_eq!(parsed.to_csv(), csv);
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let res = synthetic(parabola_records(0.30));
        let mut csv = res.to_csv();
        csv.push_str("not,enough,fields\n");
        match SweepResult::<f64>::from_csv(&csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 15),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_structure_on_tiny_grid() {
        let mut cfg = SweepConfig::<f64>::demo();
        cfg.theta_grid.points = 3;
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.records.len(), 3);
        assert!(res.records.windows(2).all(|w| w[0].theta < w[1].theta));
        for r in &res.records {
            assert_eq!(r.gen_sq, r.dphi_dtheta * r.dphi_dtheta);
            assert_eq!(r.qfi.len(), 3);
            assert!(r.qfi.iter().all(|q| *q >= 0.0));
            assert!(r.fi_homodyne_opt.is_some() && r.fi_balanced.is_some());
        }
    }

    #[test]
    fn sweep_without_cavity_has_no_q_but_full_qfi() {
        let mut cfg = SweepConfig::<f64>::demo();
        cfg.slit.mirror_r0 = 0.0;
        cfg.theta_grid.points = 5;
        let res = run_sweep(&cfg).unwrap();
        for r in &res.records {
            assert!(r.q_factor.is_none());
            assert!(r.qfi.iter().all(|q| q.is_finite()));
        }
    }

    #[test]
    fn sweep_fails_when_grid_leaves_model() {
        let mut cfg = SweepConfig::<f64>::demo();
        cfg.theta_grid.min = 700.0; // beyond the toy validity range (w < lambda0)
        cfg.theta_grid.max = 900.0;
        cfg.theta_grid.points = 5;
        match run_sweep(&cfg) {
            Err(Error::SweepFailed(msg)) => assert!(msg.contains("5 of 5")),
            other => panic!("expected sweep failure, got {other:?}"),
        }
    }
}
