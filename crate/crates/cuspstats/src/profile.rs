//! Variance profiles `S`, matrix-entry distributions, and the built-in
//! compactly supported C^2 test functions.
//!
//! All deterministic computations downstream run in the block-reduced
//! representation: a profile stores block weights `phi_a = N_a / N` and the
//! scaled block variances `v_ab = N * S_jk` for `j` in block `a`, `k` in
//! block `b`. Entries of the Dyson solution are constant within blocks, so a
//! `K`-block profile reduces every operator to `K` dimensions. Explicit
//! profiles are represented as `K = N` singleton blocks.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Serializable description of a variance profile.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Flat {
        #[serde(rename = "N")]
        n: usize,
    },
    TwoBlock {
        #[serde(rename = "N")]
        n: usize,
        fraction: f64,
        /// `[v11, v12, v22]`, per-entry variances times N.
        v: [f64; 3],
    },
    Block {
        #[serde(rename = "N")]
        n: usize,
        fractions: Vec<f64>,
        variances: Vec<Vec<f64>>,
    },
    Explicit {
        #[serde(rename = "N")]
        n: usize,
        /// Path to a CSV file with N rows of N comma-separated entries of S.
        csv: String,
    },
    /// Two-block profile with the coupling tuned so the interior gap closes.
    CuspTuned {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Two-block profile tuned to a small interior gap.
    GapTuned {
        #[serde(rename = "N")]
        n: usize,
    },
}

/// The variance matrix `S` of a Wigner-type ensemble (flatness assumption:
/// `c_inf/N <= S_jk <= C_sup/N`), stored block-reduced.
#[derive(Clone, Debug)]
pub struct VarianceProfile {
    spec: ProfileSpec,
    n: usize,
    /// Block sizes, summing to `n`.
    block_sizes: Vec<usize>,
    /// Block weights `phi_a = N_a / N`.
    weights: Vec<f64>,
    /// `v_ab = N * S_jk` for `j in a`, `k in b`; row-major K x K, symmetric.
    vmat: Vec<f64>,
    c_inf: f64,
    c_sup: f64,
}

impl VarianceProfile {
    /// Standard Wigner profile: `S_jk = 1/N` exactly.
    pub fn build_flat(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "matrix dimension must be at least 2, got {n}"
            )));
        }
        Ok(VarianceProfile {
            spec: ProfileSpec::Flat { n },
            n,
            block_sizes: vec![n],
            weights: vec![1.0],
            vmat: vec![1.0],
            c_inf: 1.0,
            c_sup: 1.0,
        })
    }

    /// Two-block profile: the first `round(fraction * N)` indices form block
    /// 1, the rest block 2, with `S = v_ab / N` on block `(a, b)`.
    pub fn build_two_block(n: usize, fraction: f64, v11: f64, v12: f64, v22: f64) -> Result<Self> {
        Self::build_blocks(n, &[fraction, 1.0 - fraction], &[v11, v12, v12, v22]).map(|mut p| {
            p.spec = ProfileSpec::TwoBlock {
                n,
                fraction,
                v: [v11, v12, v22],
            };
            p
        })
    }

    /// General block-constant profile.
    pub fn build_blocks(n: usize, fractions: &[f64], variances: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "matrix dimension must be at least 2, got {n}"
            )));
        }
        let k = fractions.len();
        if variances.len() != k * k {
            return Err(Error::InvalidProfile(format!(
                "expected {k}x{k} block variances, got {} entries",
                variances.len()
            )));
        }
        if fractions.iter().any(|&f| f <= 0.0 || f >= 1.0) && k > 1 {
            return Err(Error::InvalidProfile(
                "block fractions must lie strictly in (0, 1)".into(),
            ));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProfile(format!(
                "block fractions sum to {sum}, expected 1"
            )));
        }
        if variances.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidProfile(
                "block variances must be strictly positive".into(),
            ));
        }
        for a in 0..k {
            for b in 0..a {
                if (variances[a * k + b] - variances[b * k + a]).abs() > 0.0 {
                    return Err(Error::InvalidProfile(
                        "block variance matrix must be symmetric".into(),
                    ));
                }
            }
        }
        // largest-remainder rounding to integer block sizes summing to n
        let raw: Vec<f64> = fractions.iter().map(|&f| f * n as f64).collect();
        let mut sizes: Vec<usize> = raw.iter().map(|&r| r.floor() as usize).collect();
        let mut rem: Vec<(usize, f64)> = raw
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, r - r.floor()))
            .collect();
        rem.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut missing = n - sizes.iter().sum::<usize>();
        for (i, _) in rem {
            if missing == 0 {
                break;
            }
            sizes[i] += 1;
            missing -= 1;
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidProfile(
                "a block rounded to zero size; increase N or the fraction".into(),
            ));
        }
        let weights: Vec<f64> = sizes.iter().map(|&s| s as f64 / n as f64).collect();
        let c_inf = variances.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_sup = variances.iter().cloned().fold(0.0, f64::max);
        Ok(VarianceProfile {
            spec: ProfileSpec::Block {
                n,
                fractions: fractions.to_vec(),
                variances: (0..k)
                    .map(|a| variances[a * k..(a + 1) * k].to_vec())
                    .collect(),
            },
            n,
            block_sizes: sizes,
            weights,
            vmat: variances.to_vec(),
            c_inf,
            c_sup,
        })
    }

    /// Explicit symmetric profile from the full matrix of `S_jk` entries.
    pub fn build_explicit(entries: &[f64], n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "matrix dimension must be at least 2, got {n}"
            )));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidProfile(format!(
                "expected {n}x{n} entries, got {}",
                entries.len()
            )));
        }
        for j in 0..n {
            for k in 0..j {
                if (entries[j * n + k] - entries[k * n + j]).abs() > 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "S is not symmetric at ({j}, {k})"
                    )));
                }
            }
        }
        if entries.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidProfile(
                "explicit profiles must have strictly positive entries (flatness)".into(),
            ));
        }
        let vmat: Vec<f64> = entries.iter().map(|&s| s * n as f64).collect();
        let c_inf = vmat.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_sup = vmat.iter().cloned().fold(0.0, f64::max);
        Ok(VarianceProfile {
            spec: ProfileSpec::Explicit {
                n,
                csv: String::new(),
            },
            n,
            block_sizes: vec![1; n],
            weights: vec![1.0 / n as f64; n],
            vmat,
            c_inf,
            c_sup,
        })
    }

    /// Load an explicit profile from CSV: N rows of N comma-separated reals.
    pub fn load_explicit_csv(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect();
            let row = row.map_err(|e| {
                Error::InvalidProfile(format!("csv parse error on line {}: {e}", lineno + 1))
            })?;
            rows.push(row);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidProfile(
                "csv must be square: N rows of N entries".into(),
            ));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let mut p = Self::build_explicit(&flat, n)?;
        p.spec = ProfileSpec::Explicit {
            n,
            csv: path.to_string(),
        };
        Ok(p)
    }

    /// Build from a serializable spec (resolves tuned profiles).
    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        match spec {
            ProfileSpec::Flat { n } => Self::build_flat(*n),
            ProfileSpec::TwoBlock { n, fraction, v } => {
                Self::build_two_block(*n, *fraction, v[0], v[1], v[2])
            }
            ProfileSpec::Block {
                n,
                fractions,
                variances,
            } => {
                let flat: Vec<f64> = variances.iter().flatten().cloned().collect();
                Self::build_blocks(*n, fractions, &flat)
            }
            ProfileSpec::Explicit { csv, .. } => Self::load_explicit_csv(csv),
            ProfileSpec::CuspTuned { n } => crate::tuning::cusp_tuned_profile(*n),
            ProfileSpec::GapTuned { n } => crate::tuning::gap_tuned_profile(*n),
        }
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of blocks `K` in the reduced representation.
    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Block weights `phi_a = N_a / N`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Scaled block variance `v_ab = N * S_ab`.
    pub fn v(&self, a: usize, b: usize) -> f64 {
        self.vmat[a * self.num_blocks() + b]
    }

    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    pub fn c_sup(&self) -> f64 {
        self.c_sup
    }

    /// Block index of matrix index `j`.
    pub fn block_of(&self, j: usize) -> usize {
        let mut acc = 0;
        for (a, &s) in self.block_sizes.iter().enumerate() {
            acc += s;
            if j < acc {
                return a;
            }
        }
        self.block_sizes.len() - 1
    }

    /// Entry `S_jk` of the full variance matrix.
    pub fn s_entry(&self, j: usize, k: usize) -> f64 {
        self.v(self.block_of(j), self.block_of(k)) / self.n as f64
    }

    /// `(S x)_a` for a block-reduced vector: `sum_b v_ab phi_b x_b`.
    pub fn apply_s(&self, x: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        let k = self.num_blocks();
        let mut y = vec![num_complex::Complex64::new(0.0, 0.0); k];
        for a in 0..k {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for b in 0..k {
                acc += self.v(a, b) * self.weights[b] * x[b];
            }
            y[a] = acc;
        }
        y
    }

    /// Same for real vectors.
    pub fn apply_s_real(&self, x: &[f64]) -> Vec<f64> {
        let k = self.num_blocks();
        (0..k)
            .map(|a| (0..k).map(|b| self.v(a, b) * self.weights[b] * x[b]).sum())
            .collect()
    }

    /// Weighted scalar product `<x, y> = sum_a phi_a conj(x_a) y_a`,
    /// the block-reduced form of the normalized product `N^{-1} sum_j`.
    pub fn inner(&self, x: &[num_complex::Complex64], y: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..self.num_blocks() {
            acc += self.weights[a] * x[a].conj() * y[a];
        }
        acc
    }

    /// Weighted mean `<x> = sum_a phi_a x_a`.
    pub fn mean(&self, x: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..self.num_blocks() {
            acc += self.weights[a] * x[a];
        }
        acc
    }

    /// A safe bound on the spectral radius of sampled matrices:
    /// `||H|| <= 2 sqrt(C_sup)` up to fluctuations.
    pub fn support_bound(&self) -> f64 {
        2.0 * self.c_sup.sqrt() + 0.5
    }
}

/// Matrix symmetry class; `beta = 1` real symmetric, `beta = 2` complex
/// Hermitian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryClass {
    RealSymmetric,
    ComplexHermitian,
}

impl SymmetryClass {
    pub fn beta(self) -> u8 {
        match self {
            SymmetryClass::RealSymmetric => 1,
            SymmetryClass::ComplexHermitian => 2,
        }
    }
}

/// Entry distribution family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    Rademacher,
}

/// Distribution of the matrix entries before scaling by `sqrt(S_jk)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDistribution {
    pub family: Family,
    pub symmetry_class: SymmetryClass,
}

impl EntryDistribution {
    pub fn gaussian(symmetry_class: SymmetryClass) -> Self {
        EntryDistribution {
            family: Family::Gaussian,
            symmetry_class,
        }
    }

    pub fn rademacher(symmetry_class: SymmetryClass) -> Self {
        EntryDistribution {
            family: Family::Rademacher,
            symmetry_class,
        }
    }

    /// Fourth cumulant `c4(Re H_jk) + c4(Im H_jk)` of an off-diagonal entry
    /// with total variance `s`.
    pub fn fourth_cumulant(&self, s: f64) -> f64 {
        match (self.family, self.symmetry_class) {
            (Family::Gaussian, _) => 0.0,
            // real entry +-sqrt(s): kappa4 = E h^4 - 3 (E h^2)^2 = -2 s^2
            (Family::Rademacher, SymmetryClass::RealSymmetric) => -2.0 * s * s,
            // Re, Im = +-sqrt(s/2) independently: each contributes -2 (s/2)^2
            (Family::Rademacher, SymmetryClass::ComplexHermitian) => -s * s,
        }
    }
}

/// Full `N x N` matrix of per-entry fourth cumulants
/// `C4_jk = c4(Re H_jk) + c4(Im H_jk)`.
pub fn fourth_cumulant_matrix(profile: &VarianceProfile, dist: &EntryDistribution) -> Vec<f64> {
    let n = profile.dim();
    let mut c = vec![0.0f64; n * n];
    if dist.family == Family::Gaussian {
        return c;
    }
    for j in 0..n {
        for k in 0..n {
            c[j * n + k] = dist.fourth_cumulant(profile.s_entry(j, k));
        }
    }
    c
}

/// Block-reduced fourth cumulants: `c_ab` is the per-entry cumulant for an
/// off-diagonal entry in block pair `(a, b)`.
pub fn fourth_cumulant_blocks(profile: &VarianceProfile, dist: &EntryDistribution) -> Vec<f64> {
    let k = profile.num_blocks();
    let n = profile.dim() as f64;
    let mut c = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            c[a * k + b] = dist.fourth_cumulant(profile.v(a, b) / n);
        }
    }
    c
}

/// A compactly supported C^2 test function with recorded sup-norm bounds.
#[derive(Clone)]
pub struct TestFunction {
    pub id: &'static str,
    pub support: (f64, f64),
    eval_fn: fn(f64) -> f64,
    d1_fn: fn(f64) -> f64,
    d2_fn: fn(f64) -> f64,
    pub sup_g: f64,
    pub sup_d1: f64,
    pub sup_d2: f64,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("support", &self.support)
            .finish()
    }
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval_fn)(x)
    }
    pub fn eval_d1(&self, x: f64) -> f64 {
        (self.d1_fn)(x)
    }
    pub fn eval_d2(&self, x: f64) -> f64 {
        (self.d2_fn)(x)
    }

    /// Look up a built-in test function by name.
    pub fn builtin(id: &str) -> Result<&'static TestFunction> {
        BUILTINS
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::Config(format!("unknown test function '{id}'")))
    }

    pub fn builtin_ids() -> Vec<&'static str> {
        BUILTINS.iter().map(|t| t.id).collect()
    }
}

fn bump_raw(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

// d/dx bump = bump * (-2x / (1-x^2)^2)
fn bump_d1_raw(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let u = 1.0 - x * x;
        bump_raw(x) * (-2.0 * x / (u * u))
    } else {
        0.0
    }
}

// second derivative: bump * (4x^2/(1-x^2)^4 - (2 + 6x^2)/(1-x^2)^3)
fn bump_d2_raw(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let u = 1.0 - x * x;
        bump_raw(x) * (4.0 * x * x / u.powi(4) - (2.0 + 6.0 * x * x) / u.powi(3))
    } else {
        0.0
    }
}

fn xbump(x: f64) -> f64 {
    x * bump_raw(x)
}
fn xbump_d1(x: f64) -> f64 {
    bump_raw(x) + x * bump_d1_raw(x)
}
fn xbump_d2(x: f64) -> f64 {
    2.0 * bump_d1_raw(x) + x * bump_d2_raw(x)
}

fn widebump(x: f64) -> f64 {
    bump_raw(x / 2.0)
}
fn widebump_d1(x: f64) -> f64 {
    0.5 * bump_d1_raw(x / 2.0)
}
fn widebump_d2(x: f64) -> f64 {
    0.25 * bump_d2_raw(x / 2.0)
}

/// Built-in test functions: the standard exponential bump (even), its odd
/// variant `x * bump(x)`, and a width-2 bump.
pub static BUILTINS: &[TestFunction] = &[
    TestFunction {
        id: "bump",
        support: (-1.0, 1.0),
        eval_fn: bump_raw,
        d1_fn: bump_d1_raw,
        d2_fn: bump_d2_raw,
        sup_g: 0.3678794411714424,
        sup_d1: 0.6382,
        sup_d2: 2.7314,
    },
    TestFunction {
        id: "xbump",
        support: (-1.0, 1.0),
        eval_fn: xbump,
        d1_fn: xbump_d1,
        d2_fn: xbump_d2,
        sup_g: 0.1699,
        sup_d1: 0.3679,
        sup_d2: 1.9151,
    },
    TestFunction {
        id: "widebump",
        support: (-2.0, 2.0),
        eval_fn: widebump,
        d1_fn: widebump_d1,
        d2_fn: widebump_d2,
        sup_g: 0.3678794411714424,
        sup_d1: 0.3191,
        sup_d2: 0.6829,
    },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_profile_entries() {
        let p = VarianceProfile::build_flat(4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(p.s_entry(j, k), 0.25);
            }
        }
        assert_eq!(p.c_inf(), 1.0);
        assert_eq!(p.c_sup(), 1.0);
        let p = VarianceProfile::build_flat(1000).unwrap();
        assert_eq!(p.c_inf(), 1.0);
        assert_eq!(p.c_sup(), 1.0);
    }

    #[test]
    fn flat_rejects_degenerate_dimension() {
        assert!(matches!(
            VarianceProfile::build_flat(1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn two_block_equal_matches_flat() {
        let p = VarianceProfile::build_two_block(10, 0.5, 1.0, 1.0, 1.0).unwrap();
        let f = VarianceProfile::build_flat(10).unwrap();
        for j in 0..10 {
            for k in 0..10 {
                assert_eq!(p.s_entry(j, k), f.s_entry(j, k));
            }
        }
    }

    #[test]
    fn two_block_flatness_constants() {
        let p = VarianceProfile::build_two_block(1000, 0.5, 2.0, 0.1, 2.0).unwrap();
        assert_eq!(p.c_inf(), 0.1);
        assert_eq!(p.c_sup(), 2.0);
        assert_eq!(p.block_sizes(), &[500, 500]);
        // flatness holds exactly: min/max of N*S_jk equal the recorded bounds
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in (0..1000).step_by(97) {
            for k in (0..1000).step_by(89) {
                let ns = p.s_entry(j, k) * 1000.0;
                lo = lo.min(ns);
                hi = hi.max(ns);
            }
        }
        assert!(lo >= p.c_inf() && hi <= p.c_sup());
    }

    #[test]
    fn two_block_rejects_nonpositive_variance() {
        assert!(VarianceProfile::build_two_block(100, 0.5, 2.0, 0.0, 2.0).is_err());
        assert!(VarianceProfile::build_two_block(100, 0.5, -1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn fourth_cumulants() {
        let p = VarianceProfile::build_flat(100).unwrap();
        let g = fourth_cumulant_matrix(&p, &EntryDistribution::gaussian(SymmetryClass::RealSymmetric));
        assert!(g.iter().all(|&c| c == 0.0));
        let r = fourth_cumulant_matrix(
            &p,
            &EntryDistribution::rademacher(SymmetryClass::RealSymmetric),
        );
        for &c in &r {
            assert!((c - (-2e-4)).abs() < 1e-18);
        }
        let cg = fourth_cumulant_matrix(
            &p,
            &EntryDistribution::gaussian(SymmetryClass::ComplexHermitian),
        );
        assert!(cg.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn profile_spec_json_roundtrip() {
        let text = r#"{"kind":"two-block","N":2000,"fraction":0.5,"v":[2.0,0.7,2.0]}"#;
        let spec: ProfileSpec = serde_json::from_str(text).unwrap();
        assert_eq!(
            spec,
            ProfileSpec::TwoBlock {
                n: 2000,
                fraction: 0.5,
                v: [2.0, 0.7, 2.0]
            }
        );
        let p = VarianceProfile::from_spec(&spec).unwrap();
        assert_eq!(p.dim(), 2000);
        let back = serde_json::to_string(p.spec()).unwrap();
        let spec2: ProfileSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(spec, spec2);
    }

    #[test]
    fn test_functions_vanish_at_support_and_respect_supnorms() {
        for t in BUILTINS {
            let (a, b) = t.support;
            assert_eq!(t.eval(a), 0.0);
            assert_eq!(t.eval(b), 0.0);
            assert_eq!(t.eval(a - 0.5), 0.0);
            assert_eq!(t.eval_d2(b + 1.0), 0.0);
            let m = 10_000;
            for i in 0..=m {
                let x = a + (b - a) * i as f64 / m as f64;
                assert!(t.eval(x).abs() <= t.sup_g * (1.0 + 1e-12), "{} at {x}", t.id);
                assert!(t.eval_d1(x).abs() <= t.sup_d1 * (1.0 + 1e-9), "{}' at {x}", t.id);
                assert!(t.eval_d2(x).abs() <= t.sup_d2 * (1.0 + 1e-9), "{}'' at {x}", t.id);
            }
        }
    }

    #[test]
    fn test_function_derivatives_match_finite_differences() {
        let h = 1e-6;
        for t in BUILTINS {
            for &x in &[-0.83, -0.4, 0.11, 0.57, 0.92] {
                let fd1 = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
                assert!((fd1 - t.eval_d1(x)).abs() < 1e-7, "{} d1 at {x}", t.id);
                let fd2 = (t.eval(x + h) - 2.0 * t.eval(x) + t.eval(x - h)) / (h * h);
                assert!((fd2 - t.eval_d2(x)).abs() < 2e-4, "{} d2 at {x}", t.id);
            }
        }
    }
}
