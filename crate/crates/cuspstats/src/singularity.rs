//! Location and classification of singular points and small local minima of
//! the self-consistent density, and the local quantities `sigma`, `psi`,
//! `Delta_hat`, the fluctuation scale `eta_f`, and the regime parameter
//! `alpha_hat`.

use crate::dyson::{solve_boundary, DensityGrid, SolveOpts};
use crate::profile::VarianceProfile;
use crate::stability::{perron_data, sigma_psi};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Length of the gap adjacent to a singular point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapLength {
    Finite(f64),
    /// Outermost edges: no further support interval on the gap side.
    Unbounded,
}

impl GapLength {
    /// The capped gap `Delta_0 = min{Delta, 1}` used in scaling relations.
    pub fn capped(&self) -> f64 {
        match self {
            GapLength::Finite(d) => d.min(1.0),
            GapLength::Unbounded => 1.0,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            GapLength::Finite(d) => Some(*d),
            GapLength::Unbounded => None,
        }
    }
}

/// Kind of a classified point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    LeftEdge,
    RightEdge,
    ExactCusp,
    NonzeroMinimum,
}

/// A classified singular point or small local minimum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularityReport {
    pub e0: f64,
    pub kind: SingularityKind,
    /// Adjacent gap length (edges and cusps).
    pub delta: GapLength,
    /// Orientation: `E0 + s_hat x` lies in the support for small `x > 0`;
    /// 0 for cusps and minima.
    pub s_hat: i8,
    /// Density at `E0` (0 for edges and cusps).
    pub rho0: f64,
    pub sigma: f64,
    pub psi: f64,
    /// Effective gap `Delta_hat = 4 |sigma|^3 / (27 pi psi^2)`.
    pub delta_hat: f64,
    /// Natural fluctuation scale at `E0`.
    pub eta_f: f64,
    /// Regime parameter at the default mesoscopic scale `eta0_default`.
    pub alpha_hat: f64,
    /// The default `eta0` used for `alpha_hat` above.
    pub eta0_default: f64,
}

/// Configuration thresholds for classification.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOpts {
    /// Local minima with density above this are not reported.
    pub rho_star: f64,
    /// Gaps shorter than this merge two edges into one exact cusp.
    pub cusp_gap_tol: f64,
    /// Gaps at least this long count as simple edges (`alpha_hat = inf`).
    pub delta_star: f64,
    pub solver: SolveOpts,
}

impl Default for ClassifyOpts {
    fn default() -> Self {
        ClassifyOpts {
            rho_star: 0.1,
            cusp_gap_tol: 1e-6,
            delta_star: 0.05,
            solver: SolveOpts::default(),
        }
    }
}

/// Classification outcome: reports plus per-point failures.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifyOutcome {
    pub reports: Vec<SingularityReport>,
    pub failures: Vec<(f64, String)>,
}

/// Default mesoscopic scale for a report kind: `N^{-4/9}` at edges,
/// `N^{-1/2}` at cusps and minima (mid-window between `eta_f` and order 1).
pub fn default_eta0(kind: SingularityKind, n: usize) -> f64 {
    let nf = n as f64;
    match kind {
        SingularityKind::LeftEdge | SingularityKind::RightEdge => nf.powf(-4.0 / 9.0),
        SingularityKind::ExactCusp | SingularityKind::NonzeroMinimum => nf.powf(-0.5),
    }
}

/// Classify every support endpoint and small interior local minimum visible
/// on the grid.
pub fn classify(
    grid: &DensityGrid,
    profile: &VarianceProfile,
    opts: &ClassifyOpts,
) -> Result<ClassifyOutcome> {
    let mut reports = Vec::new();
    let mut failures = Vec::new();

    let intervals = &grid.support_intervals;
    if intervals.is_empty() {
        return Err(Error::Grid("no support detected on the grid".into()));
    }

    // candidate edges with adjacent gaps; merge short gaps into cusps
    #[derive(Debug)]
    enum Candidate {
        Edge { e: f64, kind: SingularityKind, delta: GapLength },
        Cusp { e: f64, delta: f64 },
    }
    let mut candidates = Vec::new();
    for (i, &(a, b)) in intervals.iter().enumerate() {
        // left endpoint of interval i
        let gap_left = if i == 0 {
            GapLength::Unbounded
        } else {
            GapLength::Finite(a - intervals[i - 1].1)
        };
        match gap_left {
            GapLength::Finite(d) if d < opts.cusp_gap_tol => {
                // merged with the previous right endpoint below
            }
            other => candidates.push(Candidate::Edge {
                e: a,
                kind: SingularityKind::LeftEdge,
                delta: other,
            }),
        }
        // right endpoint of interval i
        let gap_right = if i + 1 == intervals.len() {
            GapLength::Unbounded
        } else {
            GapLength::Finite(intervals[i + 1].0 - b)
        };
        match gap_right {
            GapLength::Finite(d) if d < opts.cusp_gap_tol => {
                candidates.push(Candidate::Cusp {
                    e: 0.5 * (b + intervals[i + 1].0),
                    delta: d.max(0.0),
                });
            }
            other => candidates.push(Candidate::Edge {
                e: b,
                kind: SingularityKind::RightEdge,
                delta: other,
            }),
        }
    }

    for cand in candidates {
        let (e0, kind, delta, s_hat) = match cand {
            Candidate::Edge { e, kind, delta } => {
                let s = if kind == SingularityKind::LeftEdge { 1 } else { -1 };
                (e, kind, delta, s)
            }
            Candidate::Cusp { e, delta } => (e, SingularityKind::ExactCusp, GapLength::Finite(delta), 0),
        };
        match finish_report(profile, grid, e0, kind, delta, s_hat, 0.0, opts) {
            Ok(r) => reports.push(r),
            Err(err) => failures.push((e0, err.to_string())),
        }
    }

    // interior local minima with small density
    let n = grid.energies.len();
    for i in 1..n - 1 {
        let r = grid.rho_values[i];
        if r <= grid.rho_floor || r > opts.rho_star {
            continue;
        }
        if !(r <= grid.rho_values[i - 1] && r <= grid.rho_values[i + 1]) {
            continue;
        }
        // strictly inside a support interval, away from its endpoints
        let e = grid.energies[i];
        let step = grid.energies[1] - grid.energies[0];
        let inside = intervals
            .iter()
            .any(|&(a, b)| e > a + 2.0 * step && e < b - 2.0 * step);
        if !inside {
            continue;
        }
        match refine_minimum(profile, grid.energies[i - 1], grid.energies[i + 1], &opts.solver) {
            Ok((e0, rho0)) => {
                if rho0 <= grid.rho_floor {
                    // density actually touches zero: an exact cusp
                    match finish_report(
                        profile,
                        grid,
                        e0,
                        SingularityKind::ExactCusp,
                        GapLength::Finite(0.0),
                        0,
                        0.0,
                        opts,
                    ) {
                        Ok(r) => reports.push(r),
                        Err(err) => failures.push((e0, err.to_string())),
                    }
                } else {
                    match finish_report(
                        profile,
                        grid,
                        e0,
                        SingularityKind::NonzeroMinimum,
                        GapLength::Finite(0.0),
                        0,
                        rho0,
                        opts,
                    ) {
                        Ok(r) => reports.push(r),
                        Err(err) => failures.push((e0, err.to_string())),
                    }
                }
            }
            Err(err) => failures.push((e, err.to_string())),
        }
    }

    reports.sort_by(|a, b| a.e0.total_cmp(&b.e0));
    reports.dedup_by(|a, b| (a.e0 - b.e0).abs() < 1e-8 && a.kind == b.kind);
    Ok(ClassifyOutcome { reports, failures })
}

/// Golden-section refinement of a local minimum of `rho`.
fn refine_minimum(
    profile: &VarianceProfile,
    mut lo: f64,
    mut hi: f64,
    solver: &SolveOpts,
) -> Result<(f64, f64)> {
    let rho = |e: f64| -> Result<f64> { Ok(solve_boundary(profile, e, solver)?.rho) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = rho(c)?;
    let mut fd = rho(d)?;
    while (hi - lo).abs() > 1e-9 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = rho(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = rho(d)?;
        }
    }
    let e0 = 0.5 * (lo + hi);
    Ok((e0, rho(e0)?))
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    profile: &VarianceProfile,
    grid: &DensityGrid,
    e0: f64,
    kind: SingularityKind,
    delta: GapLength,
    s_hat: i8,
    rho0: f64,
    opts: &ClassifyOpts,
) -> Result<SingularityReport> {
    let point = solve_boundary(profile, e0, &opts.solver)
        .map_err(|e| Error::Classification(e0, e.to_string()))?;
    let perron = perron_data(profile, &point).map_err(|e| Error::Classification(e0, e.to_string()))?;
    let (sigma, psi) = sigma_psi(profile, &point, &perron)
        .map_err(|e| Error::Classification(e0, e.to_string()))?;
    let delta_hat = if psi.abs() > 0.0 {
        4.0 * sigma.abs().powi(3) / (27.0 * PI * psi * psi)
    } else {
        f64::INFINITY
    };
    let mut report = SingularityReport {
        e0,
        kind,
        delta,
        s_hat,
        rho0,
        sigma,
        psi,
        delta_hat,
        eta_f: 0.0,
        alpha_hat: 0.0,
        eta0_default: default_eta0(kind, profile.dim()),
    };
    report.eta_f = fluctuation_scale(&report, grid, profile.dim())?;
    report.alpha_hat = alpha_hat(&report, report.eta0_default, opts.delta_star);
    Ok(report)
}

/// Natural fluctuation scale at a classified point.
///
/// At singular points (`rho0 = 0`) this is
/// `max{N^{-3/4}, N^{-2/3} min{Delta^{1/9}, 1}}`; at non-zero minima it is
/// defined implicitly by `int_{-eta}^{eta} rho(E0 + x) dx = 1/N`, solved by
/// bisection on the grid interpolant.
pub fn fluctuation_scale(report: &SingularityReport, grid: &DensityGrid, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension("N must be at least 2".into()));
    }
    let nf = n as f64;
    if report.rho0 <= 0.0 {
        let d19 = match report.delta {
            GapLength::Unbounded => 1.0,
            GapLength::Finite(d) => d.powf(1.0 / 9.0).min(1.0),
        };
        return Ok((nf.powf(-0.75)).max(nf.powf(-2.0 / 3.0) * d19));
    }
    // implicit equation on the grid interpolant
    let e0 = report.e0;
    let target = 1.0 / nf;
    let span_lo = e0 - grid.energies[0];
    let span_hi = grid.energies[grid.energies.len() - 1] - e0;
    let max_eta = span_lo.min(span_hi);
    if max_eta <= 0.0 {
        return Err(Error::Resolution(
            "E0 lies at the boundary of the density grid".into(),
        ));
    }
    let mass = |eta: f64| grid.integrate_rho(e0 - eta, e0 + eta);
    if mass(max_eta) < target {
        return Err(Error::Resolution(format!(
            "grid spans only {:.3e} of spectral mass around E0, need {:.3e}",
            mass(max_eta),
            target
        )));
    }
    let (mut lo, mut hi) = (0.0f64, max_eta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Regime parameter `alpha_hat` at mesoscopic scale `eta0`.
///
/// Singular points with a small gap give `Delta_hat / (2 eta0)`; gaps of at
/// least `delta_star` (or unbounded) give `+inf`; non-zero minima give
/// `-2 psi rho0^3 / (sqrt(27) pi eta0)`.
pub fn alpha_hat(report: &SingularityReport, eta0: f64, delta_star: f64) -> f64 {
    match report.kind {
        SingularityKind::NonzeroMinimum => {
            -2.0 * report.psi * report.rho0.powi(3) / (27f64.sqrt() * PI * eta0)
        }
        _ => match report.delta {
            GapLength::Unbounded => f64::INFINITY,
            GapLength::Finite(d) => {
                if d >= delta_star {
                    f64::INFINITY
                } else {
                    report.delta_hat / (2.0 * eta0)
                }
            }
        },
    }
}

/// Warn-window check for the mesoscopic scale: `eta0` should lie in
/// `[N^{eps0} eta_f, N^{-eps0}]`.
pub fn eta0_window_ok(eta0: f64, eta_f: f64, n: usize, eps0: f64) -> bool {
    let nf = n as f64;
    eta0 >= nf.powf(eps0) * eta_f && eta0 <= nf.powf(-eps0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyson::density_grid;

    #[test]
    fn classify_flat_two_edges() {
        let p = VarianceProfile::build_flat(1000).unwrap();
        let g = density_grid(&p, (-3.0, 3.0), 601, &SolveOpts::default()).unwrap();
        let out = classify(&g, &p, &ClassifyOpts::default()).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.reports.len(), 2, "{:#?}", out.reports);
        let left = &out.reports[0];
        let right = &out.reports[1];
        assert_eq!(left.kind, SingularityKind::LeftEdge);
        assert!((left.e0 + 2.0).abs() < 1e-6);
        assert_eq!(left.s_hat, 1);
        assert_eq!(left.delta, GapLength::Unbounded);
        assert_eq!(right.kind, SingularityKind::RightEdge);
        assert!((right.e0 - 2.0).abs() < 1e-6);
        assert_eq!(right.s_hat, -1);
        assert!(right.sigma < 0.0, "sigma at a right edge is negative");
        assert!(left.sigma > 0.0);
        // alpha_hat at simple edges is +inf
        assert!(right.alpha_hat.is_infinite() && right.alpha_hat > 0.0);
    }

    #[test]
    fn fluctuation_scale_formulas() {
        let n = 1_000_000usize;
        let g = DensityGrid {
            energies: vec![-1.0, 0.0, 1.0],
            rho_values: vec![0.3, 0.3, 0.3],
            eta_used: vec![0.0; 3],
            support_intervals: vec![(-1.0, 1.0)],
            rho_floor: 1e-8,
            mass_defect: 0.0,
        };
        // cusp: Delta = 0 -> N^{-3/4}
        let cusp = SingularityReport {
            e0: 0.0,
            kind: SingularityKind::ExactCusp,
            delta: GapLength::Finite(0.0),
            s_hat: 0,
            rho0: 0.0,
            sigma: 0.0,
            psi: 1.0,
            delta_hat: 0.0,
            eta_f: 0.0,
            alpha_hat: 0.0,
            eta0_default: 0.0,
        };
        let ef = fluctuation_scale(&cusp, &g, n).unwrap();
        assert!((ef - (n as f64).powf(-0.75)).abs() < 1e-15);
        assert!((ef - 10f64.powf(-4.5)).abs() < 1e-12);

        // edge with Delta >= 1 -> N^{-2/3}
        let edge = SingularityReport {
            kind: SingularityKind::RightEdge,
            delta: GapLength::Finite(1.5),
            s_hat: -1,
            ..cusp.clone()
        };
        let ef = fluctuation_scale(&edge, &g, n).unwrap();
        assert!((ef - 1e-4).abs() < 1e-12);

        // constant density rho0 around an interior minimum: eta_f ~ 1/(2 N rho0)
        let minimum = SingularityReport {
            kind: SingularityKind::NonzeroMinimum,
            rho0: 0.3,
            s_hat: 0,
            ..cusp
        };
        let ef = fluctuation_scale(&minimum, &g, n).unwrap();
        assert!(
            (ef - 1.0 / (2.0 * n as f64 * 0.3)).abs() < 1e-9 * ef,
            "eta_f = {ef}"
        );
    }

    #[test]
    fn alpha_hat_arithmetic() {
        let base = SingularityReport {
            e0: 0.0,
            kind: SingularityKind::ExactCusp,
            delta: GapLength::Finite(0.0),
            s_hat: 0,
            rho0: 0.0,
            sigma: 0.0,
            psi: 1.0,
            delta_hat: 0.0,
            eta_f: 1e-6,
            alpha_hat: 0.0,
            eta0_default: 1e-3,
        };
        assert_eq!(alpha_hat(&base, 1e-3, 0.05), 0.0);

        let gap = SingularityReport {
            kind: SingularityKind::RightEdge,
            delta: GapLength::Finite(2e-3),
            delta_hat: 2e-3,
            s_hat: -1,
            ..base.clone()
        };
        assert!((alpha_hat(&gap, 1e-3, 0.05) - 1.0).abs() < 1e-12);

        // minimum with rho0^3 = sqrt(27) pi eta0 / (2 psi) -> -1
        let eta0 = 1e-3;
        let rho0 = (27f64.sqrt() * PI * eta0 / 2.0).powf(1.0 / 3.0);
        let minimum = SingularityReport {
            kind: SingularityKind::NonzeroMinimum,
            rho0,
            psi: 1.0,
            ..base
        };
        assert!((alpha_hat(&minimum, eta0, 0.05) + 1.0).abs() < 1e-12);
    }
}
