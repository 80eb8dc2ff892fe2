//! The two-parameter stability operator `B(z,zeta) = 1 - m(z) m(zeta) S`,
//! its isolated small eigenvalue with left/right eigenvectors, the saturated
//! self-energy operator `F(z) = |m| S |m|` with Perron data, and the
//! expansion function `xi(z,zeta)`.
//!
//! All scalar products are the normalized `<x,y> = N^{-1} sum conj(x_j) y_j`,
//! which in block-reduced coordinates is the `phi`-weighted product. On a
//! block-constant profile with `K < N` blocks the full operator `B` acts as
//! the identity on the complement of block-constant vectors, so its spectrum
//! is the reduced `K x K` spectrum plus a spectator eigenvalue 1 with
//! multiplicity `N - K`; branch selection accounts for the spectator.

use crate::dyson::SpectralPoint;
use crate::lapack;
use crate::profile::VarianceProfile;
use crate::smallmat::CMat;
use crate::{C64, Error, Result};
use std::f64::consts::PI;

/// Perron data of the saturated self-energy operator `F(z) = |m| S |m|`.
#[derive(Clone, Debug)]
pub struct PerronData {
    /// Largest eigenvalue `||F||`.
    pub f_norm: f64,
    /// Perron eigenvector, positive, normalized to `<v, v> = 1`.
    pub v: Vec<f64>,
    /// Spectral gap: `spec(F/||F||) subset [-1+gap, 1-gap] union {1}`.
    pub spectral_gap: f64,
    /// `f = rho^{-1} Im m / |m|` (or its boundary limit through `v`).
    pub f: Vec<f64>,
    /// `p = sign(Re m)`.
    pub p: Vec<f64>,
    /// Density at the evaluation point.
    pub rho: f64,
}

/// Threshold below which `f` switches to the Perron-direction limit.
const RHO_DIRECT_MIN: f64 = 1e-6;

/// Build the Perron data of `F(z)` at a solved spectral point.
pub fn perron_data(profile: &VarianceProfile, point: &SpectralPoint) -> Result<PerronData> {
    let k = profile.num_blocks();
    let w = profile.weights();
    let abs_m: Vec<f64> = point.m.iter().map(|m| m.norm()).collect();
    if abs_m.iter().any(|&a| a < 1e-14) {
        return Err(Error::SingularF("solution vector has a vanishing entry".into()));
    }

    // symmetrized F: G_ab = sqrt(phi_a) |m_a| v_ab |m_b| sqrt(phi_b)
    let mut g = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            g[a + b * k] = w[a].sqrt() * abs_m[a] * profile.v(a, b) * abs_m[b] * w[b].sqrt();
        }
    }
    let evals = lapack::eigh_symmetric(&mut g, k).map_err(Error::Numeric)?;
    let f_norm = evals[k - 1];
    if f_norm <= 0.0 {
        return Err(Error::SingularF("largest eigenvalue of F is not positive".into()));
    }
    // dsyev stored eigenvectors in g; top one is the last column
    let top = &g[(k - 1) * k..k * k];
    let sign = if top.iter().sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
    let v: Vec<f64> = (0..k).map(|a| sign * top[a] / w[a].sqrt()).collect();
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::SingularF(
            "Perron eigenvector is not strictly positive".into(),
        ));
    }
    let spectral_gap = if k == 1 {
        1.0
    } else {
        let second = evals[..k - 1]
            .iter()
            .map(|e| e.abs())
            .fold(0.0f64, f64::max);
        1.0 - second / f_norm
    };

    let rho = point.rho;
    let f: Vec<f64> = if rho > RHO_DIRECT_MIN {
        (0..k).map(|a| point.m[a].im / (rho * abs_m[a])).collect()
    } else {
        // boundary limit: f is parallel to v, normalized by <|m|, f> = pi
        let denom: f64 = (0..k).map(|a| w[a] * abs_m[a] * v[a]).sum();
        v.iter().map(|&x| PI * x / denom).collect()
    };
    let p: Vec<f64> = point
        .m
        .iter()
        .map(|m| if m.re >= 0.0 { 1.0 } else { -1.0 })
        .collect();

    Ok(PerronData {
        f_norm,
        v,
        spectral_gap,
        f,
        p,
        rho,
    })
}

/// Apply the reduced `F = |m| S |m|` to a real vector.
fn apply_f(profile: &VarianceProfile, abs_m: &[f64], x: &[f64]) -> Vec<f64> {
    let k = profile.num_blocks();
    let w = profile.weights();
    (0..k)
        .map(|a| {
            abs_m[a]
                * (0..k)
                    .map(|b| profile.v(a, b) * w[b] * abs_m[b] * x[b])
                    .sum::<f64>()
        })
        .collect()
}

/// The local quantities `sigma = <p f^2, f>` and
/// `psi = <p f^2, (1+F)/(1-F) (1 - v v*) [p f^2]>`.
///
/// The linear system is solved in the eigenbasis of the symmetrized `F`
/// restricted to the orthogonal complement of the Perron direction, which
/// removes the `1 - ||F||` near-singularity at boundary points.
pub fn sigma_psi(
    profile: &VarianceProfile,
    point: &SpectralPoint,
    perron: &PerronData,
) -> Result<(f64, f64)> {
    let k = profile.num_blocks();
    let w = profile.weights();
    let abs_m: Vec<f64> = point.m.iter().map(|m| m.norm()).collect();
    let pf2: Vec<f64> = (0..k)
        .map(|a| perron.p[a] * perron.f[a] * perron.f[a])
        .collect();
    let sigma: f64 = (0..k).map(|a| w[a] * pf2[a] * perron.f[a]).sum();

    // y = (1 - v v*)[p f^2]
    let vy: f64 = (0..k).map(|a| w[a] * perron.v[a] * pf2[a]).sum();
    let y: Vec<f64> = (0..k).map(|a| pf2[a] - vy * perron.v[a]).collect();
    // rhs = (1 + F) y
    let fy = apply_f(profile, &abs_m, &y);
    let rhs: Vec<f64> = (0..k).map(|a| y[a] + fy[a]).collect();

    // symmetrized eigenbasis of F
    let mut g = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            g[a + b * k] = w[a].sqrt() * abs_m[a] * profile.v(a, b) * abs_m[b] * w[b].sqrt();
        }
    }
    let evals = lapack::eigh_symmetric(&mut g, k).map_err(Error::Numeric)?;
    let rhs_t: Vec<f64> = (0..k).map(|a| w[a].sqrt() * rhs[a]).collect();
    let mut x_t = vec![0.0f64; k];
    let mut worst_cond: f64 = 1.0;
    for i in 0..k.saturating_sub(1) {
        let col = &g[i * k..(i + 1) * k];
        let proj: f64 = (0..k).map(|a| col[a] * rhs_t[a]).sum();
        let denom = 1.0 - evals[i];
        if denom.abs() < 1e-13 {
            return Err(Error::SingularPsi(1.0 / denom.abs().max(1e-300)));
        }
        worst_cond = worst_cond.max(1.0 / denom.abs());
        for a in 0..k {
            x_t[a] += proj / denom * col[a];
        }
    }
    if worst_cond > 1e12 {
        return Err(Error::SingularPsi(worst_cond));
    }
    let x: Vec<f64> = (0..k).map(|a| x_t[a] / w[a].sqrt()).collect();
    let psi: f64 = (0..k).map(|a| w[a] * pf2[a] * x[a]).sum();
    Ok((sigma, psi))
}

/// Reduced `K x K` matrix of `B(z,zeta) = 1 - m(z) m(zeta) S`.
pub fn stability_matrix(
    profile: &VarianceProfile,
    mz: &[C64],
    mzeta: &[C64],
) -> CMat {
    let k = profile.num_blocks();
    let w = profile.weights();
    let mut b = CMat::zeros(k);
    for a in 0..k {
        let mm = mz[a] * mzeta[a];
        for c in 0..k {
            b[(a, c)] = -mm * profile.v(a, c) * w[c];
        }
        b[(a, a)] += 1.0;
    }
    b
}

/// The isolated eigenvalue of `B(z,zeta)` and its eigenvector data.
#[derive(Clone, Debug)]
pub struct StabilityData {
    pub z: C64,
    pub zeta: C64,
    /// Overlap-selected eigenvalue.
    pub beta: C64,
    /// Right eigenvector, normalized as `Pi[|m(z)| v(z)] <v, f>`.
    pub b_right: Vec<C64>,
    /// Left eigenvector (for the weighted product), same scaling convention.
    pub b_left: Vec<C64>,
    /// `|<b_right, |m| v>|` overlap with the Perron direction (cosine).
    pub overlap: f64,
    /// Smallest-modulus eigenvalue over the full spectrum (including the
    /// spectator 1 for block-reduced profiles).
    pub min_modulus_beta: C64,
    /// `<f(z)^2>` at the first argument.
    pub f2: f64,
}

/// Tolerance used by the `|beta| < eps` branch-consistency guard.
pub const BRANCH_EPSILON: f64 = 0.25;

/// Build the stability data at `(z, zeta)`; both points must come from the
/// same profile.
pub fn build_stability(
    profile: &VarianceProfile,
    pz: &SpectralPoint,
    pzeta: &SpectralPoint,
) -> Result<StabilityData> {
    let k = profile.num_blocks();
    let w = profile.weights();
    let perron = perron_data(profile, pz)?;
    let bmat = stability_matrix(profile, &pz.m, &pzeta.m);
    let mut a = bmat.a.clone();
    let eig = lapack::eig_complex(&mut a, k).map_err(Error::Numeric)?;

    // distinguished direction |m(z)| v(z)
    let dir: Vec<C64> = (0..k)
        .map(|aa| C64::new(pz.m[aa].norm() * perron.v[aa], 0.0))
        .collect();
    let dir_norm = weighted_norm(w, &dir);

    let mut best = 0usize;
    let mut best_overlap = -1.0f64;
    for i in 0..k {
        let vr = eig.right_vector(i);
        let nr = weighted_norm(w, vr);
        let ov = weighted_inner(w, vr, &dir).norm() / (nr * dir_norm);
        if ov > best_overlap {
            best_overlap = ov;
            best = i;
        }
    }
    let beta = eig.values[best];

    // full-spectrum min-modulus eigenvalue, spectator included
    let mut min_beta = beta;
    for i in 0..k {
        if eig.values[i].norm() < min_beta.norm() {
            min_beta = eig.values[i];
        }
    }
    if profile.num_blocks() < profile.dim() && 1.0 < min_beta.norm() {
        min_beta = C64::new(1.0, 0.0);
    }
    if (min_beta - beta).norm() > 1e-9 * (1.0 + beta.norm()) && beta.norm() < BRANCH_EPSILON {
        return Err(Error::AmbiguousBranch {
            overlap_beta: beta.norm(),
            min_beta: min_beta.norm(),
        });
    }

    // left eigenvector for the weighted product: rescale the LAPACK left
    // eigenvector u (u^H B = beta u^H) by 1/phi
    let vr = eig.right_vector(best).to_vec();
    let u = eig.left_vector(best);
    let wl: Vec<C64> = (0..k).map(|a| u[a] / w[a]).collect();

    // normalization per the projector convention:
    // b = Pi[|m| v] <v, f>,  b_left = Pi^*[|m|^{-1} v] <v, f>
    let wb = weighted_inner(w, &wl, &vr);
    if wb.norm() < 1e-13 * weighted_norm(w, &wl) * weighted_norm(w, &vr) {
        return Err(Error::DegenerateNormalization(wb.norm()));
    }
    let vf: f64 = (0..k).map(|a| w[a] * perron.v[a] * perron.f[a]).sum();
    let dir_inv: Vec<C64> = (0..k)
        .map(|aa| C64::new(perron.v[aa] / pz.m[aa].norm(), 0.0))
        .collect();
    let coeff_r = weighted_inner(w, &wl, &dir) / wb * vf;
    let coeff_l = (weighted_inner(w, &vr, &dir_inv) / wb.conj()) * vf;
    let b_right: Vec<C64> = vr.iter().map(|&x| x * coeff_r).collect();
    let b_left: Vec<C64> = wl.iter().map(|&x| x * coeff_l).collect();

    let f2: f64 = (0..k).map(|a| w[a] * perron.f[a] * perron.f[a]).sum();

    Ok(StabilityData {
        z: pz.z,
        zeta: pzeta.z,
        beta,
        b_right,
        b_left,
        overlap: best_overlap,
        min_modulus_beta: min_beta,
        f2,
    })
}

pub(crate) fn weighted_inner(w: &[f64], x: &[C64], y: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..x.len() {
        acc += w[a] * x[a].conj() * y[a];
    }
    acc
}

pub(crate) fn weighted_norm(w: &[f64], x: &[C64]) -> f64 {
    x.iter()
        .zip(w)
        .map(|(v, &wa)| wa * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense matrix of the rank-one projector `Pi` held by a `StabilityData`.
pub fn projector_matrix(profile: &VarianceProfile, stab: &StabilityData) -> CMat {
    let k = profile.num_blocks();
    let w = profile.weights();
    let denom = weighted_inner(w, &stab.b_left, &stab.b_right);
    CMat::from_fn(k, |a, c| {
        stab.b_right[a] * w[c] * stab.b_left[c].conj() / denom
    })
}

/// `xi(base, target) = <b_left(base), m(target) - m(base)> / <b_left, b_right>`.
pub fn xi(
    profile: &VarianceProfile,
    base_stab: &StabilityData,
    base: &SpectralPoint,
    target: &SpectralPoint,
) -> Result<C64> {
    let w = profile.weights();
    let denom = weighted_inner(w, &base_stab.b_left, &base_stab.b_right);
    if denom.norm() < 1e-12 {
        return Err(Error::DegenerateNormalization(denom.norm()));
    }
    let dm: Vec<C64> = target
        .m
        .iter()
        .zip(&base.m)
        .map(|(t, b)| t - b)
        .collect();
    Ok(weighted_inner(w, &base_stab.b_left, &dm) / denom)
}

/// `m'(z) = B(z,z)^{-1}[m(z)^2]`, the derivative of the Dyson solution.
pub fn m_prime(profile: &VarianceProfile, point: &SpectralPoint) -> Result<Vec<C64>> {
    let bmat = stability_matrix(profile, &point.m, &point.m);
    let m2: Vec<C64> = point.m.iter().map(|m| m * m).collect();
    let lu = bmat
        .lu()
        .ok_or_else(|| Error::Numeric("singular stability operator in m'".into()))?;
    Ok(lu.solve(&m2))
}

/// The second-order expansion vector `r(z) = (1 - beta) (Q/B)[b^2 / m]`,
/// computed contour-free through the deflated solve `(B + (1-beta) Pi) x = Q y`.
pub fn expansion_vector_r(
    profile: &VarianceProfile,
    point: &SpectralPoint,
    stab: &StabilityData,
) -> Result<Vec<C64>> {
    let k = profile.num_blocks();
    let w = profile.weights();
    let y: Vec<C64> = (0..k)
        .map(|a| stab.b_right[a] * stab.b_right[a] / point.m[a])
        .collect();
    let pi = projector_matrix(profile, stab);
    let piy = pi.matvec(&y);
    let qy: Vec<C64> = (0..k).map(|a| y[a] - piy[a]).collect();

    let bmat = stability_matrix(profile, &point.m, &point.m);
    let shift = C64::new(1.0, 0.0) - stab.beta;
    let mut deflated = bmat.clone();
    for a in 0..k {
        for c in 0..k {
            deflated[(a, c)] += shift * pi[(a, c)];
        }
    }
    let lu = deflated
        .lu()
        .ok_or_else(|| Error::Numeric("singular deflated stability operator".into()))?;
    let x = lu.solve(&qy);
    let pix = pi.matvec(&x);
    Ok((0..k).map(|a| shift * (x[a] - pix[a])).collect())
}

/// Residual report of the cubic equation for `xi` at a singular base point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CubicReport {
    pub xi_re: f64,
    pub xi_im: f64,
    /// `|psi xi^3 + sigma xi^2 + (zeta - z) pi|`.
    pub residual: f64,
    /// Size of the equation's leading term, for normalization.
    pub scale: f64,
    /// The error-budget context `(rho + rho^{-1} eta + |xi|) |zeta - z|`.
    pub budget: f64,
}

/// Evaluate the cubic `mu3 xi^3 + mu2 xi^2 + mu1 xi + (zeta - z) mu0` with
/// the leading coefficients at a singular base point: `mu3 = psi`,
/// `mu2 = sigma`, `mu1 = 0`, `mu0 = pi`.
pub fn verify_cubic(
    profile: &VarianceProfile,
    base: &SpectralPoint,
    base_stab: &StabilityData,
    sigma: f64,
    psi: f64,
    target: &SpectralPoint,
) -> Result<CubicReport> {
    let x = xi(profile, base_stab, base, target)?;
    let dz = target.z - base.z;
    let value = psi * x * x * x + sigma * x * x + PI * dz;
    let scale = (psi * x * x * x).norm() + (sigma * x * x).norm() + (PI * dz).norm();
    let rho = base.rho;
    let eta = base.z.im.abs();
    let rho_term = if rho > 0.0 { eta / rho } else { 0.0 };
    Ok(CubicReport {
        xi_re: x.re,
        xi_im: x.im,
        residual: value.norm(),
        scale,
        budget: (rho + rho_term + x.norm()) * dz.norm(),
    })
}

/// Comparison of the directly computed `beta(z,zeta)` against its two
/// perturbative expansions around a singular point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BetaExpansionReport {
    pub beta_re: f64,
    pub beta_im: f64,
    /// Quadratic expansion in `xi(E0, z)`, `xi(E0, zeta)`.
    pub expansion_re: f64,
    pub expansion_im: f64,
    pub rel_error_expansion: f64,
    /// The `pi (zeta - z) / (<f^2> xi(z,zeta))` form.
    pub ratio_form_re: f64,
    pub ratio_form_im: f64,
    pub rel_error_ratio: f64,
}

/// Check the eigenvalue expansions of `B(z,zeta)` near a singular base point.
pub fn beta_expansion_check(
    profile: &VarianceProfile,
    base: &SpectralPoint,
    sigma: f64,
    psi: f64,
    pz: &SpectralPoint,
    pzeta: &SpectralPoint,
) -> Result<BetaExpansionReport> {
    let base_stab = build_stability(profile, base, base)?;
    let xi_z = xi(profile, &base_stab, base, pz)?;
    let xi_zeta = xi(profile, &base_stab, base, pzeta)?;
    let f2 = base_stab.f2;

    let direct = build_stability(profile, pz, pzeta)?;
    let beta = direct.beta;

    let expansion = -(sigma / f2) * (xi_z + xi_zeta)
        - (psi / f2) * (xi_z * xi_z + xi_z * xi_zeta + xi_zeta * xi_zeta)
        - (sigma * sigma / (f2 * f2)) * xi_z * xi_zeta;

    // ratio form rooted at z
    let stab_z = build_stability(profile, pz, pz)?;
    let xi_z_zeta = xi(profile, &stab_z, pz, pzeta)?;
    let ratio = if xi_z_zeta.norm() > 0.0 {
        PI * (pzeta.z - pz.z) / (stab_z.f2 * xi_z_zeta)
    } else {
        C64::new(0.0, 0.0)
    };

    let scale = beta.norm().max(1e-300);
    Ok(BetaExpansionReport {
        beta_re: beta.re,
        beta_im: beta.im,
        expansion_re: expansion.re,
        expansion_im: expansion.im,
        rel_error_expansion: (beta - expansion).norm() / scale,
        ratio_form_re: ratio.re,
        ratio_form_im: ratio.im,
        rel_error_ratio: (beta - ratio).norm() / scale,
    })
}

/// The sharpened bound `M(z, w)` on `|xi(z, z+w)|` near a singular point:
/// `min{ |w|^{1/3}, |w|^{1/2} / (D0+d)^{1/6}, |w| / (d^{1/2} (D0+d)^{1/3}) }`
/// with `d` the distance of `z` to the nearer gap endpoint and `D0` the
/// capped gap length.
pub fn xi_bound_m(delta_z: f64, delta0: f64, w: f64) -> f64 {
    let aw = w.abs();
    let d = delta0 + delta_z;
    let first = aw.powf(1.0 / 3.0);
    let second = aw.sqrt() / d.powf(1.0 / 6.0);
    let third = if delta_z > 0.0 {
        aw / (delta_z.sqrt() * d.powf(1.0 / 3.0))
    } else {
        f64::INFINITY
    };
    first.min(second).min(third)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyson::{m_semicircle, solve_boundary, solve_vde, SolveOpts};

    fn flat() -> VarianceProfile {
        VarianceProfile::build_flat(100).unwrap()
    }

    #[test]
    fn perron_flat_at_i() {
        let p = flat();
        let pt = solve_vde(&p, C64::new(0.0, 1.0), &SolveOpts::default()).unwrap();
        let pd = perron_data(&p, &pt).unwrap();
        // ||F|| = |m(i)|^2 = ((sqrt5-1)/2)^2 = (3 - sqrt5)/2
        let expect = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((pd.f_norm - expect).abs() < 1e-12, "f_norm = {}", pd.f_norm);
        assert!(pd.v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(pd.v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn perron_identity_one_minus_fnorm() {
        // 1 - ||F|| = eta <v,|m|> / <v, Im m / |m|>
        let p = flat();
        for &(e, eta) in &[(0.3, 0.5), (1.7, 0.01), (0.0, 1.0)] {
            let pt = solve_vde(&p, C64::new(e, eta), &SolveOpts::default()).unwrap();
            let pd = perron_data(&p, &pt).unwrap();
            let absm: Vec<f64> = pt.m.iter().map(|m| m.norm()).collect();
            let num: f64 = pd.v.iter().zip(&absm).map(|(v, a)| v * a).sum::<f64>();
            let den: f64 = pd
                .v
                .iter()
                .zip(pt.m.iter())
                .map(|(v, m)| v * m.im / m.norm())
                .sum::<f64>();
            let rhs = eta * num / den;
            assert!(
                ((1.0 - pd.f_norm) - rhs).abs() <= 1e-8 * rhs.abs().max(1e-12),
                "E={e} eta={eta}: lhs={} rhs={rhs}",
                1.0 - pd.f_norm
            );
        }
    }

    #[test]
    fn f_vector_flat_closed_form() {
        // f_j = pi / |m_sc(E)| on the interior
        let p = flat();
        for &e in &[0.0, 0.5, 1.0, 1.5] {
            let pt = solve_boundary(&p, e, &SolveOpts::default()).unwrap();
            let pd = perron_data(&p, &pt).unwrap();
            let msc = m_semicircle(C64::new(e, 1e-12));
            let expect = PI / msc.norm();
            assert!(
                (pd.f[0] - expect).abs() < 1e-5,
                "E={e}: f={} expect={expect}",
                pd.f[0]
            );
        }
    }

    #[test]
    fn sigma_flat_edge_is_minus_pi_cubed() {
        let p = flat();
        let pt = solve_boundary(&p, 2.0, &SolveOpts::default()).unwrap();
        let pd = perron_data(&p, &pt).unwrap();
        let (sigma, psi) = sigma_psi(&p, &pt, &pd).unwrap();
        assert!(
            (sigma + PI.powi(3)).abs() < 1e-6,
            "sigma = {sigma}, expected {}",
            -PI.powi(3)
        );
        assert!(psi.abs() < 1e-9, "psi = {psi}");
        // mirrored at the left edge
        let ptl = solve_boundary(&p, -2.0, &SolveOpts::default()).unwrap();
        let pdl = perron_data(&p, &ptl).unwrap();
        let (sigma_l, _) = sigma_psi(&p, &ptl, &pdl).unwrap();
        assert!((sigma_l - PI.powi(3)).abs() < 1e-6);
    }

    #[test]
    fn psi_vanishes_in_flat_interior() {
        let p = flat();
        let pt = solve_boundary(&p, 0.7, &SolveOpts::default()).unwrap();
        let pd = perron_data(&p, &pt).unwrap();
        let (_, psi) = sigma_psi(&p, &pt, &pd).unwrap();
        assert!(psi.abs() < 1e-10, "psi = {psi}");
    }

    #[test]
    fn beta_flat_boundary_and_branch_selection() {
        let p = flat();
        let opts = SolveOpts::default();
        let at2 = solve_boundary(&p, 2.0, &opts).unwrap();
        let stab = build_stability(&p, &at2, &at2).unwrap();
        // beta = 1 - m(2)^2 = 0
        assert!(stab.beta.norm() < 1e-4, "beta = {}", stab.beta);

        let ati = solve_vde(&p, C64::new(0.0, 1.0), &opts).unwrap();
        let stab_i = build_stability(&p, &ati, &ati).unwrap();
        let expect = C64::new(1.0, 0.0) - ati.m[0] * ati.m[0];
        assert!((stab_i.beta - expect).norm() < 1e-12);
        assert!((stab_i.beta.norm() - 1.3819660113).abs() < 1e-9);
        // the spectator eigenvalue 1 has smaller modulus but is not selected
        assert!((stab_i.min_modulus_beta - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn duality_in_z_zeta() {
        let p = flat();
        let opts = SolveOpts::default();
        let a = solve_vde(&p, C64::new(0.3, 0.2), &opts).unwrap();
        let b = solve_vde(&p, C64::new(-0.5, 0.7), &opts).unwrap();
        let s1 = build_stability(&p, &a, &b).unwrap();
        let s2 = build_stability(&p, &b, &a).unwrap();
        assert!((s1.beta - s2.beta).norm() < 1e-9);
    }

    #[test]
    fn projector_idempotent_rank_one() {
        let p = flat();
        let opts = SolveOpts::default();
        let a = solve_vde(&p, C64::new(1.9, 0.05), &opts).unwrap();
        let b = solve_vde(&p, C64::new(2.05, 0.03), &opts).unwrap();
        let stab = build_stability(&p, &a, &b).unwrap();
        let pi = projector_matrix(&p, &stab);
        let pi2 = pi.matmul(&pi);
        let mut diff: f64 = 0.0;
        let mut trace = C64::new(0.0, 0.0);
        for i in 0..pi.n {
            trace += pi[(i, i)];
            for j in 0..pi.n {
                diff = diff.max((pi2[(i, j)] - pi[(i, j)]).norm());
            }
        }
        assert!(diff < 1e-9, "idempotency defect {diff}");
        assert!((trace - 1.0).norm() < 1e-9, "trace {trace}");
    }

    #[test]
    fn eigen_residuals() {
        let p = flat();
        let opts = SolveOpts::default();
        let a = solve_vde(&p, C64::new(1.9, 0.05), &opts).unwrap();
        let b = solve_vde(&p, C64::new(2.05, 0.03), &opts).unwrap();
        let stab = build_stability(&p, &a, &b).unwrap();
        let bmat = stability_matrix(&p, &a.m, &b.m);
        let bv = bmat.matvec(&stab.b_right);
        let w = p.weights();
        let mut res: f64 = 0.0;
        for i in 0..bv.len() {
            res += w[i] * (bv[i] - stab.beta * stab.b_right[i]).norm_sqr();
        }
        let nb = weighted_norm(w, &stab.b_right);
        assert!(res.sqrt() <= 1e-9 * nb, "right residual {}", res.sqrt() / nb);
    }

    #[test]
    fn xi_trivial_and_flat_edge() {
        let p = flat();
        let opts = SolveOpts::default();
        let base = solve_boundary(&p, 2.0, &opts).unwrap();
        let stab = build_stability(&p, &base, &base).unwrap();
        // target = base -> 0
        let x0 = xi(&p, &stab, &base, &base).unwrap();
        assert!(x0.norm() < 1e-14);
        // with the projector normalization of the eigenvectors, all vectors
        // are constant for the flat profile and b = |m| f = pi, so
        // xi = (m_sc(z) + 1) / pi
        for &w in &[1e-2, 1e-3, -1e-3] {
            let z = C64::new(2.0 + w, 1e-8);
            let target = solve_vde(&p, z, &opts).unwrap();
            let x = xi(&p, &stab, &base, &target).unwrap();
            let expect = (m_semicircle(z) + 1.0) / PI;
            assert!(
                (x - expect).norm() < 1e-4 * expect.norm().max(1e-6),
                "w={w}: xi={x} expect={expect}"
            );
        }
    }

    #[test]
    fn derivative_identity_complex_step() {
        let p = flat();
        let opts = SolveOpts::default();
        for &z in &[C64::new(0.4, 0.3), C64::new(1.8, 0.05)] {
            let pt = solve_vde(&p, z, &opts).unwrap();
            let mp = m_prime(&p, &pt).unwrap();
            let h = 1e-5;
            let plus = solve_vde(&p, z + h, &opts).unwrap();
            let minus = solve_vde(&p, z - h, &opts).unwrap();
            let fd = (plus.m[0] - minus.m[0]) / (2.0 * h);
            assert!(
                (mp[0] - fd).norm() < 1e-6 * mp[0].norm(),
                "z={z}: analytic {} vs fd {fd}",
                mp[0]
            );
        }
    }

    #[test]
    fn b_vect_leading_term_as_rho_decreases() {
        // || b_right - <v,f> |m| v ||_inf = O(rho)
        let p = flat();
        let opts = SolveOpts::default();
        let mut prev_defect = f64::INFINITY;
        for &eta in &[1e-2, 1e-4, 1e-6] {
            let pt = solve_vde(&p, C64::new(2.0, eta), &opts).unwrap();
            let pd = perron_data(&p, &pt).unwrap();
            let stab = build_stability(&p, &pt, &pt).unwrap();
            let w = p.weights();
            let vf: f64 = (0..1).map(|a| w[a] * pd.v[a] * pd.f[a]).sum();
            let mut defect: f64 = 0.0;
            for a in 0..1 {
                let lead = C64::new(vf * pt.m[a].norm() * pd.v[a], 0.0);
                defect = defect.max((stab.b_right[a] - lead).norm());
            }
            // defect should shrink with rho (up to constants)
            assert!(defect < prev_defect + 1e-10 || defect < 5.0 * pt.rho);
            assert!(defect < 5.0 * pt.rho.max(1e-9), "eta={eta}: defect {defect} rho {}", pt.rho);
            prev_defect = defect;
        }
    }

    #[test]
    fn cubic_residual_trivial_target() {
        let p = flat();
        let opts = SolveOpts::default();
        let base = solve_boundary(&p, 2.0, &opts).unwrap();
        let stab = build_stability(&p, &base, &base).unwrap();
        let pd = perron_data(&p, &base).unwrap();
        let (sigma, psi) = sigma_psi(&p, &base, &pd).unwrap();
        let rep = verify_cubic(&p, &base, &stab, sigma, psi, &base).unwrap();
        assert!(rep.residual < 1e-12);
    }

    #[test]
    fn cubic_residual_flat_edge_scales() {
        // at a regular edge the mu2 term dominates; residual/|w| -> 0
        let p = flat();
        let opts = SolveOpts::default();
        let base = solve_boundary(&p, 2.0, &opts).unwrap();
        let stab = build_stability(&p, &base, &base).unwrap();
        let pd = perron_data(&p, &base).unwrap();
        let (sigma, psi) = sigma_psi(&p, &base, &pd).unwrap();
        let mut ratios = Vec::new();
        for &w in &[1e-2, 1e-3, 1e-4] {
            let target = solve_vde(&p, C64::new(2.0 + w, 1e-9), &opts).unwrap();
            let rep = verify_cubic(&p, &base, &stab, sigma, psi, &target).unwrap();
            ratios.push(rep.residual / w);
        }
        assert!(ratios[2] < ratios[0], "ratios {ratios:?}");
    }
}
