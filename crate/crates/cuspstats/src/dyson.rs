//! Vector Dyson equation solver and Stieltjes inversion.
//!
//! The equation `-1/m_j(z) = z + (S m)_j(z)` with `Im m_j Im z > 0` is
//! solved in the block-reduced representation by a damped fixed-point
//! iteration that hands over to Newton once the residual is small; the
//! Newton Jacobian is `1 - diag(m_hat^2) S`, the stability-operator
//! structure. Boundary values on the real axis come from a geometric
//! continuation in `eta` with Richardson extrapolation over the last three
//! heights, followed by a Newton polish at `eta = 0` where the limit is a
//! regular solution.

use crate::profile::VarianceProfile;
use crate::smallmat::CMat;
use crate::{C64, Error, Result};
use rayon::prelude::*;

/// Options for the iterative solver.
#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Terminal height of the eta -> 0 continuation.
    pub eta_min: f64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            tol: 1e-12,
            max_iter: 100_000,
            damping: 1.0,
            eta_min: 1e-9,
        }
    }
}

/// The Dyson solution at one spectral parameter.
#[derive(Clone, Debug)]
pub struct SpectralPoint {
    pub z: C64,
    /// Block-reduced solution vector (length K).
    pub m: Vec<C64>,
    /// `max_a |1/m_a + z + (S m)_a|`.
    pub residual: f64,
    /// `pi^{-1} <Im m>`, the (harmonic extension of the) density.
    pub rho: f64,
    /// Evaluation height actually used; 0 for polished boundary values.
    pub eta_used: f64,
}

/// Semicircle Stieltjes transform `m_sc(z) = (-z + sqrt(z-2) sqrt(z+2))/2`,
/// branch-correct on both half-planes.
pub fn m_semicircle(z: C64) -> C64 {
    let w = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    (-z + w) / 2.0
}

fn initial_guess(profile: &VarianceProfile, z: C64) -> Vec<C64> {
    let k = profile.num_blocks();
    // correct large-z asymptotics; semicircle scaled to the mean variance
    let scale = {
        let w = profile.weights();
        let mut s = 0.0;
        for a in 0..k {
            for b in 0..k {
                s += w[a] * w[b] * profile.v(a, b);
            }
        }
        s.sqrt()
    };
    let guess = if z.norm() <= 10.0 * scale.max(1.0) {
        m_semicircle(z / scale) / scale
    } else {
        -1.0 / z
    };
    vec![guess; k]
}

fn residual_of(profile: &VarianceProfile, z: C64, m: &[C64]) -> f64 {
    let sm = profile.apply_s(m);
    let mut r: f64 = 0.0;
    for a in 0..m.len() {
        r = r.max((1.0 / m[a] + z + sm[a]).norm());
    }
    r
}

fn fixed_point_map(profile: &VarianceProfile, z: C64, m: &[C64]) -> Vec<C64> {
    let sm = profile.apply_s(m);
    m.iter()
        .enumerate()
        .map(|(a, _)| -1.0 / (z + sm[a]))
        .collect()
}

fn newton_step(profile: &VarianceProfile, z: C64, m: &[C64]) -> Option<Vec<C64>> {
    let k = profile.num_blocks();
    let sm = profile.apply_s(m);
    let w = profile.weights();
    // F(m) = m + 1/(z + Sm); J = I - diag(1/(z+Sm)^2) * (v_ab phi_b)
    let mut rhs = vec![C64::new(0.0, 0.0); k];
    let mut jac = CMat::zeros(k);
    for a in 0..k {
        let d = z + sm[a];
        if d.norm() < 1e-300 {
            return None;
        }
        let inv = 1.0 / d;
        rhs[a] = -(m[a] + inv);
        let c = inv * inv;
        for b in 0..k {
            jac[(a, b)] = -c * profile.v(a, b) * w[b];
        }
        jac[(a, a)] += 1.0;
    }
    let delta = crate::smallmat::solve(&jac, &rhs)?;
    Some(m.iter().zip(&delta).map(|(&x, &d)| x + d).collect())
}

fn solve_from(
    profile: &VarianceProfile,
    z: C64,
    start: Vec<C64>,
    opts: &SolveOpts,
) -> Result<Vec<C64>> {
    let mut m = start;
    let mut res = residual_of(profile, z, &m);
    let mut theta = opts.damping.clamp(0.05, 1.0);
    let mut iter = 0usize;
    while res > opts.tol {
        if iter >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: res,
            });
        }
        if !res.is_finite() {
            return Err(Error::Numeric(format!(
                "residual became non-finite at z = {z}"
            )));
        }
        let mut advanced = false;
        if res < 1e-3 {
            if let Some(cand) = newton_step(profile, z, &m) {
                let mut cand = cand;
                let mut cres = residual_of(profile, z, &cand);
                let mut backtrack = 0;
                while !cres.is_finite() || cres > res {
                    if backtrack >= 6 {
                        break;
                    }
                    cand = m
                        .iter()
                        .zip(&cand)
                        .map(|(&old, &new)| 0.5 * (old + new))
                        .collect();
                    cres = residual_of(profile, z, &cand);
                    backtrack += 1;
                }
                if cres.is_finite() && cres < res {
                    m = cand;
                    res = cres;
                    advanced = true;
                }
            }
        }
        if !advanced {
            let target = fixed_point_map(profile, z, &m);
            let cand: Vec<C64> = m
                .iter()
                .zip(&target)
                .map(|(&old, &new)| (1.0 - theta) * old + theta * new)
                .collect();
            let cres = residual_of(profile, z, &cand);
            if cres.is_finite() && cres <= res {
                m = cand;
                res = cres;
                theta = (theta * 1.2).min(1.0);
            } else {
                theta *= 0.5;
                if theta < 1e-6 {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        residual: res,
                    });
                }
            }
        }
        iter += 1;
    }
    Ok(m)
}

fn make_point(profile: &VarianceProfile, z: C64, m: Vec<C64>, eta_used: f64) -> SpectralPoint {
    let residual = residual_of(profile, z, &m);
    let rho = profile.mean(&m).im / std::f64::consts::PI;
    SpectralPoint {
        z,
        m,
        residual,
        rho,
        eta_used,
    }
}

/// Solve the vector Dyson equation at a spectral parameter off the real
/// axis. For `Im z < 0` returns the conjugate of the upper-half-plane
/// solution. Real `z` outside the spectrum (|E| > 10 sqrt(C_sup)) is solved
/// directly on the axis where `m` is real.
pub fn solve_vde(profile: &VarianceProfile, z: C64, opts: &SolveOpts) -> Result<SpectralPoint> {
    if z.im == 0.0 {
        let bound = 10.0 * profile.c_sup().sqrt().max(1.0);
        if z.re.abs() > bound {
            // outside the support m is real; Newton from -1/E
            let start = vec![-1.0 / z.re + C64::new(0.0, 0.0); profile.num_blocks()];
            let m = solve_from(profile, z, start, opts)?;
            return Ok(make_point(profile, z, m, 0.0));
        }
        return Err(Error::Domain(
            "solve_vde requires Im z != 0 (use solve_boundary for real energies)".into(),
        ));
    }
    if z.im < 0.0 {
        let up = solve_vde(profile, z.conj(), opts)?;
        let m: Vec<C64> = up.m.iter().map(|v| v.conj()).collect();
        return Ok(make_point(profile, z, m, z.im.abs()));
    }
    let m = solve_from(profile, z, initial_guess(profile, z), opts)?;
    // upper-half-plane side condition
    if m.iter().any(|v| v.im < -1e-9) {
        return Err(Error::Numeric(format!(
            "solution left the upper half-plane at z = {z}"
        )));
    }
    Ok(make_point(profile, z, m, z.im))
}

/// Warm-started solve used by the continuation; assumes `Im z > 0`.
fn solve_warm(profile: &VarianceProfile, z: C64, warm: &[C64], opts: &SolveOpts) -> Result<Vec<C64>> {
    solve_from(profile, z, warm.to_vec(), opts)
}

/// The `eta -> 0+` limit of the Dyson solution at real energy `E`.
///
/// Geometric continuation `eta_k = eta_0 2^{-k}` warm-starts each solve from
/// the previous height; the limit is Richardson-extrapolated from the last
/// three heights with the decay exponent estimated componentwise, and
/// polished by a Newton solve at `eta = 0` when that converges.
pub fn solve_boundary(profile: &VarianceProfile, energy: f64, opts: &SolveOpts) -> Result<SpectralPoint> {
    let mut eta = 1.0f64;
    let mut m = match solve_vde(profile, C64::new(energy, eta), opts) {
        Ok(p) => p.m,
        Err(e) => return Err(e),
    };
    let mut history: Vec<(f64, Vec<C64>)> = Vec::new();
    while eta > opts.eta_min {
        eta *= 0.5;
        let z = C64::new(energy, eta);
        m = solve_warm(profile, z, &m, opts).map_err(|e| Error::BoundaryEvaluation {
            energy,
            eta_min: eta,
            message: e.to_string(),
        })?;
        history.push((eta, m.clone()));
    }
    let k = profile.num_blocks();
    let n_h = history.len();
    let extrapolated: Vec<C64> = if n_h >= 3 {
        let (_, m1) = &history[n_h - 3];
        let (_, m2) = &history[n_h - 2];
        let (_, m3) = &history[n_h - 1];
        (0..k)
            .map(|a| {
                let d12 = m1[a] - m2[a];
                let d23 = m2[a] - m3[a];
                if d23.norm() < 1e-15 * (1.0 + m3[a].norm()) {
                    return m3[a];
                }
                let r = d12 / d23; // ~ 2^gamma
                if r.norm() > 1.05 && r.norm() < 16.0 {
                    m3[a] - d23 / (r - 1.0)
                } else {
                    m3[a]
                }
            })
            .collect()
    } else {
        m.clone()
    };

    // Newton polish directly on the axis; keep it only if it converges and
    // stays on the correct branch.
    let polish_opts = SolveOpts {
        max_iter: 200,
        ..*opts
    };
    let z0 = C64::new(energy, 0.0);
    let polished = solve_from(profile, z0, extrapolated.clone(), &polish_opts)
        .ok()
        .filter(|cand| {
            cand.iter()
                .zip(&extrapolated)
                .all(|(c, e)| c.im > -1e-10 && (c - e).norm() < 1e-2 * (1.0 + e.norm()))
        });

    let (m_final, eta_used) = match polished {
        Some(p) => (p, 0.0),
        None => (extrapolated, opts.eta_min),
    };
    let mut point = make_point(profile, z0, m_final, eta_used);
    if point.rho < 0.0 {
        if point.rho < -1e-8 {
            return Err(Error::BoundaryEvaluation {
                energy,
                eta_min: opts.eta_min,
                message: format!("extrapolated density is negative ({:.3e})", point.rho),
            });
        }
        point.rho = 0.0;
    }
    Ok(point)
}

/// Density of states evaluated on a grid, with located support intervals.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    pub energies: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub eta_used: Vec<f64>,
    /// Maximal intervals `[a, b]` on which `rho > rho_floor` in the interior,
    /// endpoints refined by bisection.
    pub support_intervals: Vec<(f64, f64)>,
    pub rho_floor: f64,
    /// Deviation of the trapezoid integral of `rho` over the grid from 1.
    pub mass_defect: f64,
}

impl DensityGrid {
    /// Linear interpolation of `rho` between grid points.
    pub fn rho_at(&self, e: f64) -> f64 {
        let es = &self.energies;
        if e <= es[0] {
            return self.rho_values[0];
        }
        if e >= es[es.len() - 1] {
            return self.rho_values[es.len() - 1];
        }
        let idx = es.partition_point(|&x| x <= e).min(es.len() - 1);
        let (x0, x1) = (es[idx - 1], es[idx]);
        let (y0, y1) = (self.rho_values[idx - 1], self.rho_values[idx]);
        if x1 == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (e - x0) / (x1 - x0)
    }

    /// Trapezoid integral of the interpolant over `[a, b]` (clipped to the grid).
    pub fn integrate_rho(&self, a: f64, b: f64) -> f64 {
        let es = &self.energies;
        let lo = a.max(es[0]);
        let hi = b.min(es[es.len() - 1]);
        if hi <= lo {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut x = lo;
        let mut fx = self.rho_at(lo);
        for i in 0..es.len() {
            if es[i] <= lo {
                continue;
            }
            if es[i] >= hi {
                break;
            }
            acc += 0.5 * (fx + self.rho_values[i]) * (es[i] - x);
            x = es[i];
            fx = self.rho_values[i];
        }
        acc += 0.5 * (fx + self.rho_at(hi)) * (hi - x);
        acc
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "energy,rho,eta_used")?;
        for i in 0..self.energies.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.3e}",
                self.energies[i], self.rho_values[i], self.eta_used[i]
            )?;
        }
        Ok(())
    }
}

/// Default floor below which the density counts as zero.
pub const RHO_FLOOR: f64 = 1e-8;

/// Evaluate the self-consistent density on `n_points` equally spaced
/// energies in `[a, b]` and locate the support.
pub fn density_grid(
    profile: &VarianceProfile,
    range: (f64, f64),
    n_points: usize,
    opts: &SolveOpts,
) -> Result<DensityGrid> {
    let (a, b) = range;
    if !(a < b) {
        return Err(Error::Domain(format!("empty energy range [{a}, {b}]")));
    }
    if n_points < 2 {
        return Err(Error::Domain("need at least 2 grid points".into()));
    }
    let energies: Vec<f64> = (0..n_points)
        .map(|i| a + (b - a) * i as f64 / (n_points - 1) as f64)
        .collect();
    let results: Vec<Result<SpectralPoint>> = energies
        .par_iter()
        .map(|&e| solve_boundary(profile, e, opts))
        .collect();
    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed * 100 > n_points {
        return Err(Error::Grid(format!(
            "{failed} of {n_points} boundary evaluations failed"
        )));
    }
    let mut rho_values = vec![0.0f64; n_points];
    let mut eta_used = vec![0.0f64; n_points];
    let mut last_good = 0.0f64;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                rho_values[i] = p.rho;
                eta_used[i] = p.eta_used;
                last_good = p.rho;
            }
            Err(_) => {
                rho_values[i] = last_good;
                eta_used[i] = f64::NAN;
            }
        }
    }

    let support_intervals = locate_support(profile, &energies, &rho_values, RHO_FLOOR, opts)?;

    let mut mass = 0.0;
    for i in 1..n_points {
        mass += 0.5 * (rho_values[i] + rho_values[i - 1]) * (energies[i] - energies[i - 1]);
    }
    Ok(DensityGrid {
        energies,
        rho_values,
        eta_used,
        support_intervals,
        rho_floor: RHO_FLOOR,
        mass_defect: (mass - 1.0).abs(),
    })
}

fn bisect_support_edge(
    profile: &VarianceProfile,
    mut lo: f64,
    mut hi: f64,
    rho_floor: f64,
    opts: &SolveOpts,
) -> Result<f64> {
    // invariant: rho(lo) <= floor < rho(hi) or vice versa; callers orient it
    let rho = |e: f64| -> Result<f64> { Ok(solve_boundary(profile, e, opts)?.rho) };
    let f_lo = rho(lo)? - rho_floor;
    for _ in 0..200 {
        if (hi - lo).abs() < 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = rho(mid)? - rho_floor;
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn locate_support(
    profile: &VarianceProfile,
    energies: &[f64],
    rho_values: &[f64],
    rho_floor: f64,
    opts: &SolveOpts,
) -> Result<Vec<(f64, f64)>> {
    let n = energies.len();
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if rho_values[i] > rho_floor {
            let start = i;
            while i < n && rho_values[i] > rho_floor {
                i += 1;
            }
            let end = i - 1;
            // refine both edges by bisection on rho - floor
            let left = if start == 0 {
                energies[0]
            } else {
                bisect_support_edge(profile, energies[start - 1], energies[start], rho_floor, opts)?
            };
            let right = if end == n - 1 {
                energies[n - 1]
            } else {
                bisect_support_edge(profile, energies[end + 1], energies[end], rho_floor, opts)?
            };
            intervals.push((left.min(right), left.max(right)));
        } else {
            i += 1;
        }
    }
    Ok(intervals)
}
