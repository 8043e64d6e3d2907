//! Quantum lithography: deposition rates of N-photon path-entangled states in
//! one and two dimensions, pattern synthesis and fitting objectives.
//!
//! Deposition rates are scaled so that Δ_N(m = 0, θ = 0, φ = 0) = 2. With that
//! convention the N-photon resist sees Δ = |A(φ)|², where A is the amplitude
//! ⟨0|ê^N|Ψ⟩ up to a constant, so superpositions stay non-negative.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{binomial, c, C64};

fn binom(n: u32, k: u32) -> f64 {
    binomial(u64::from(n), u64::from(k))
}

/// Δ_N = 1 + cos Nφ.
pub fn deposition_basic(n: u32, phi: f64) -> f64 {
    1.0 + (f64::from(n) * phi).cos()
}

/// C(N,m){1 + cos[(N−2m)φ + θ]}.
pub fn deposition_general(n: u32, m: u32, theta: f64, phi: f64) -> f64 {
    binom(n, m) * (1.0 + ((f64::from(n) - 2.0 * f64::from(m)) * phi + theta).cos())
}

/// The four-exponential bracket of ⟨ψ_Nm|δ̂_N|ψ_Nm'⟩ without binomial weights.
pub fn deposition_cross_bracket(n: u32, m: u32, mp: u32, th: f64, thp: f64, phi: f64) -> C64 {
    let (n, m, mp) = (f64::from(n), f64::from(m), f64::from(mp));
    let e = |x: f64| C64::from_polar(1.0, x);
    e((mp - m) * phi) + e((n - m - mp) * phi + thp) + e(-(n - m - mp) * phi - th) + e(-(mp - m) * phi + thp - th)
}

/// ⟨ψ_Nm|δ̂_N|ψ_Nm'⟩ = ½√(C(N,m)C(N,m')) × bracket; equals
/// [`deposition_general`] on the diagonal.
pub fn deposition_cross(n: u32, m: u32, mp: u32, th: f64, thp: f64, phi: f64) -> C64 {
    deposition_cross_bracket(n, m, mp, th, thp, phi) * (0.5 * (binom(n, m) * binom(n, mp)).sqrt())
}

/// Amplitude A_m(φ) = √C(N,m)(e^{imφ} + e^{i[(N−m)φ+θ]})/√2, with Δ_{mm'} = A_m* A_m'.
pub fn amplitude_1d(n: u32, m: u32, theta: f64, phi: f64) -> C64 {
    let (nf, mf) = (f64::from(n), f64::from(m));
    (C64::from_polar(1.0, mf * phi) + C64::from_polar(1.0, (nf - mf) * phi + theta)) * (binom(n, m) / 2.0).sqrt()
}

/// One branch α|ψ_Nm(θ)⟩ of a fixed-N superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LithoTerm {
    pub m: u32,
    pub theta: f64,
    pub alpha: C64,
}

/// Σ α_j|ψ_{N m_j}(θ_j)⟩. Several branches may share m with different θ.
#[derive(Clone, Debug, PartialEq)]
pub struct LithoState1D {
    pub n: u32,
    pub terms: Vec<LithoTerm>,
}

impl LithoState1D {
    pub fn new(n: u32, terms: Vec<LithoTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("photon number must be positive".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.m > n / 2) {
            return Err(Error::Domain(format!("m = {} exceeds ⌊N/2⌋ = {}", t.m, n / 2)));
        }
        let norm: f64 = terms.iter().map(|t| t.alpha.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("Σ|α|² = {norm}, expected 1")));
        }
        Ok(Self { n, terms })
    }

    pub fn amplitude(&self, phi: f64) -> C64 {
        self.terms.iter().map(|t| t.alpha * amplitude_1d(self.n, t.m, t.theta, phi)).sum()
    }
}

/// Σ_{jk} α_j* α_k Δ_{jk}, hermitised as ½(Δ_{jk} + Δ_{kj}*). The pairwise
/// sum and |Σ α A|² coincide; the latter is what is evaluated.
pub fn deposition_superposition(state: &LithoState1D, phi: f64) -> f64 {
    state.amplitude(phi).norm_sqr()
}

/// Double sum over branch pairs, kept as an independent evaluation path.
pub fn deposition_superposition_pairwise(state: &LithoState1D, phi: f64) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in &state.terms {
        for b in &state.terms {
            let d = deposition_cross(state.n, a.m, b.m, a.theta, b.theta, phi);
            let dt = deposition_cross(state.n, b.m, a.m, b.theta, a.theta, phi);
            acc += a.alpha.conj() * b.alpha * (d + dt.conj()) * 0.5;
        }
    }
    acc.re
}

/// Uniform grid φ_i = 2πi/len on [0, 2π).
pub fn grid(len: usize) -> Vec<f64> {
    (0..len).map(|i| TAU * i as f64 / len as f64).collect()
}

/// Periodic trapezoid rule on a uniform grid over [0, 2π).
pub fn integrate_periodic(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() * TAU / samples.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoFourier {
    pub samples: Vec<f64>,
    /// Penalty rate Q = Σ c_n.
    pub q: f64,
}

/// P(φ) = Q·t + t Σ_n (a_n cos nφ + b_n sin nφ), Q = Σ √(a_n² + b_n²).
pub fn pseudo_fourier_pattern(a: &[f64], b: &[f64], t: f64, phis: &[f64]) -> Result<PseudoFourier> {
    if a.len() != b.len() {
        return Err(Error::Dimension("a and b coefficient lists differ in length".into()));
    }
    let q: f64 = a.iter().zip(b).map(|(x, y)| x.hypot(*y)).sum();
    let samples = phis
        .iter()
        .map(|&p| {
            let s: f64 = a.iter().zip(b).enumerate().map(|(n, (x, y))| x * (n as f64 * p).cos() + y * (n as f64 * p).sin()).sum();
            t * (q + s)
        })
        .collect();
    Ok(PseudoFourier { samples, q })
}

/// Polar form c_n(cos θ_n, sin θ_n) of Fourier coefficients.
pub fn to_polar(a: f64, b: f64) -> (f64, f64) {
    (a.hypot(b), b.atan2(a))
}

/// Cosine coefficients of the trench: (−1)^q/(2q+1) at frequency 2q+1 ≤ budget.
pub fn trench_fourier(photon_budget: u32) -> Vec<(u32, f64)> {
    (0..)
        .map(|q: u32| (2 * q + 1, if q.is_multiple_of(2) { 1.0 } else { -1.0 } / f64::from(2 * q + 1)))
        .take_while(|(n, _)| *n <= photon_budget)
        .collect()
}

/// Cartesian coefficient vectors (a_n, b_n) indexed by frequency.
pub fn trench_coefficients(photon_budget: u32) -> (Vec<f64>, Vec<f64>) {
    let terms = trench_fourier(photon_budget);
    let len = terms.last().map_or(1, |t| t.0 as usize + 1);
    let mut a = vec![0.0; len];
    for (n, v) in terms {
        a[n as usize] = v;
    }
    (a, vec![0.0; len])
}

/// F(φ) sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPattern {
    pub samples: Vec<f64>,
}

impl TargetPattern {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("target samples must be finite and non-empty".into()));
        }
        Ok(Self { samples })
    }

    /// h on (−π/2, π/2), zero elsewhere.
    pub fn trench(h: f64, len: usize) -> Self {
        let samples = grid(len).into_iter().map(|p| if !(PI / 2.0..=1.5 * PI).contains(&p) { h } else { 0.0 }).collect();
        Self { samples }
    }

    pub fn phis(&self) -> Vec<f64> {
        grid(self.samples.len())
    }

    /// Two whitespace- or comma-separated columns (φ, F). The points are
    /// resampled onto a uniform grid of `len` points by periodic linear
    /// interpolation.
    pub fn from_text(text: &str, len: usize) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)));
            match cols.as_slice() {
                [p, f] => pts.push((parse(p)?.rem_euclid(TAU), parse(f)?)),
                _ => return Err(Error::Parse(format!("line {}: expected two columns", ln + 1))),
            }
        }
        if pts.is_empty() {
            return Err(Error::Parse("target file has no data".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let samples = grid(len).into_iter().map(|p| interpolate_periodic(&pts, p)).collect();
        Self::new(samples)
    }

    pub fn from_file(path: &Path, len: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text, len)
    }
}

fn interpolate_periodic(pts: &[(f64, f64)], x: f64) -> f64 {
    let k = pts.partition_point(|p| p.0 <= x);
    let (lo, hi) = match k {
        0 => ((pts[pts.len() - 1].0 - TAU, pts[pts.len() - 1].1), pts[0]),
        k if k == pts.len() => (pts[k - 1], (pts[0].0 + TAU, pts[0].1)),
        k => (pts[k - 1], pts[k]),
    };
    if hi.0 == lo.0 {
        return lo.1;
    }
    lo.1 + (hi.1 - lo.1) * (x - lo.0) / (hi.0 - lo.0)
}

/// d = ∫|F − Δ t|² dφ by the periodic trapezoid rule.
pub fn objective(deposition: &[f64], t: f64, target: &TargetPattern) -> Result<f64> {
    if deposition.len() != target.samples.len() {
        return Err(Error::Dimension("deposition and target grids differ".into()));
    }
    let sq: Vec<f64> = deposition.iter().zip(&target.samples).map(|(d, f)| (f - d * t).powi(2)).collect();
    Ok(integrate_periodic(&sq))
}

/// Mean of `samples` over grid points in [π/2, 3π/2].
pub fn forbidden_mean(samples: &[f64]) -> f64 {
    let phis = grid(samples.len());
    let inside: Vec<f64> =
        phis.iter().zip(samples).filter(|(p, _)| **p >= PI / 2.0 && **p <= 1.5 * PI).map(|(_, v)| *v).collect();
    inside.iter().sum::<f64>() / inside.len().max(1) as f64
}

// ------------------------------------------------------------------- 2D

/// One branch α|ψ^k_{Nm}⟩ on beams a, b (phase φ) and c, d (phase χ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LithoTerm2D {
    pub m: u32,
    pub k: u32,
    pub zeta: f64,
    pub zeta_bar: f64,
    pub alpha: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LithoState2D {
    pub n: u32,
    pub terms: Vec<LithoTerm2D>,
}

impl LithoState2D {
    pub fn new(n: u32, terms: Vec<LithoTerm2D>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("photon number must be positive".into()));
        }
        if terms.iter().any(|t| t.m > n || t.k > n) {
            return Err(Error::Domain("m and k must not exceed N".into()));
        }
        let norm: f64 = terms.iter().map(|t| t.alpha.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("Σ|α|² = {norm}, expected 1")));
        }
        Ok(Self { n, terms })
    }
}

fn half_pair(n: u32, m: u32, zeta: f64, x: f64) -> C64 {
    let (nf, mf) = (f64::from(n), f64::from(m));
    C64::from_polar(1.0, mf * x) + C64::from_polar(1.0, (nf - mf) * x + zeta)
}

/// B = C(N,m)(e^{imφ} + e^{i[(N−m)φ+ζ]}) + C(N,k)(e^{ikχ} + e^{i[(N−k)χ+ζ̄]}).
/// The four-block rate is B_{mk}* B_{m'k'}.
pub fn amplitude_2d(n: u32, t: &LithoTerm2D, phi: f64, chi: f64) -> C64 {
    half_pair(n, t.m, t.zeta, phi) * binom(n, t.m) + half_pair(n, t.k, t.zeta_bar, chi) * binom(n, t.k)
}

/// The published four-block matrix element between two branches, literally.
pub fn deposition_2d_block(n: u32, a: &LithoTerm2D, b: &LithoTerm2D, phi: f64, chi: f64) -> C64 {
    let e = |x: f64| C64::from_polar(1.0, x);
    let nf = f64::from(n);
    let block = |w: f64, m: f64, x: f64, z: f64, mp: f64, y: f64, zp: f64| {
        (e(-m * x + mp * y)
            + e(-m * x + (nf - mp) * y + zp)
            + e(-(nf - m) * x + mp * y - z)
            + e(-(nf - m) * x + (nf - mp) * y - (z - zp)))
            * w
    };
    let (m, k, mp, kp) = (f64::from(a.m), f64::from(a.k), f64::from(b.m), f64::from(b.k));
    block(binom(n, a.m) * binom(n, b.m), m, phi, a.zeta, mp, phi, b.zeta)
        + block(binom(n, a.m) * binom(n, b.k), m, phi, a.zeta, kp, chi, b.zeta_bar)
        + block(binom(n, a.k) * binom(n, b.m), k, chi, a.zeta_bar, mp, phi, b.zeta)
        + block(binom(n, a.k) * binom(n, b.k), k, chi, a.zeta_bar, kp, chi, b.zeta_bar)
}

/// ½ Σ α* α' × four-block sum, i.e. ½|Σ α B|².
pub fn deposition_2d(state: &LithoState2D, phi: f64, chi: f64) -> f64 {
    let amp: C64 = state.terms.iter().map(|t| t.alpha * amplitude_2d(state.n, t, phi, chi)).sum();
    0.5 * amp.norm_sqr()
}

/// Closed form of the diagonal (single-branch) 2D rate, ½ × the four-block sum.
pub fn deposition_2d_diagonal(n: u32, m: u32, k: u32, zeta: f64, zeta_bar: f64, phi: f64, chi: f64) -> f64 {
    let (nf, cm, ck) = (f64::from(n), binom(n, m), binom(n, k));
    let am = (nf - 2.0 * f64::from(m)) * phi + zeta;
    let ak = (nf - 2.0 * f64::from(k)) * chi + zeta_bar;
    cm * cm * (1.0 + am.cos())
        + ck * ck * (1.0 + ak.cos())
        + 4.0 * cm * ck * (0.5 * (nf * (phi - chi) + zeta - zeta_bar)).cos() * (0.5 * am).cos() * (0.5 * ak).cos()
}

// ------------------------------------------------------------ trench fits

/// Least-squares exposure time and floor of the truncated-Fourier trench.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierFit {
    pub t: f64,
    pub q: f64,
    pub pattern: Vec<f64>,
    pub objective: f64,
}

impl FourierFit {
    /// The uniform background Q·t.
    pub fn floor(&self) -> f64 {
        self.q * self.t
    }
}

/// Pseudo-Fourier approximation of `target` by the trench series within a
/// photon budget, with t chosen to minimise the objective.
pub fn fourier_trench_fit(target: &TargetPattern, photon_budget: u32) -> Result<FourierFit> {
    let (a, b) = trench_coefficients(photon_budget);
    let unit = pseudo_fourier_pattern(&a, &b, 1.0, &target.phis())?;
    let num: f64 = unit.samples.iter().zip(&target.samples).map(|(p, f)| p * f).sum();
    let den: f64 = unit.samples.iter().map(|p| p * p).sum();
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let t = num / den;
    let objective = objective(&unit.samples, t, target)?;
    let pattern = unit.samples.iter().map(|p| p * t).collect();
    Ok(FourierFit { t, q: unit.q, pattern, objective })
}

/// Fixed-N superposition ansatz with one complex amplitude per (m, θ) branch.
/// Gene layout: real parts, imaginary parts, then the exposure time.
#[derive(Clone, Debug)]
pub struct SuperpositionAnsatz {
    pub n: u32,
    pub branches: Vec<(u32, f64)>,
    table: Vec<Vec<C64>>,
    target: TargetPattern,
}

impl SuperpositionAnsatz {
    pub fn new(n: u32, branches: Vec<(u32, f64)>, target: TargetPattern) -> Result<Self> {
        if branches.iter().any(|b| b.0 > n / 2) {
            return Err(Error::Domain("branch m exceeds ⌊N/2⌋".into()));
        }
        let phis = target.phis();
        let table = branches.iter().map(|&(m, th)| phis.iter().map(|&p| amplitude_1d(n, m, th, p)).collect()).collect();
        Ok(Self { n, branches, table, target })
    }

    /// N = 10 with m = 0..4 and θ ∈ {0, π}: 21 genes.
    pub fn trench_preset(target: TargetPattern) -> Result<Self> {
        let branches = (0..5).flat_map(|m| [(m, 0.0), (m, PI)]).collect();
        Self::new(10, branches, target)
    }

    pub fn genes(&self) -> usize {
        2 * self.branches.len() + 1
    }

    /// Indices of the amplitude genes normalised before evaluation.
    pub fn amplitude_genes(&self) -> std::ops::Range<usize> {
        0..2 * self.branches.len()
    }

    /// Amplitudes from unnormalised genes.
    pub fn alphas(&self, x: &[f64]) -> Result<Vec<C64>> {
        let v = crate::optimizer::normalize_genes(x, self.amplitude_genes())?;
        let b = self.branches.len();
        Ok((0..b).map(|j| c(v[j], v[j + b])).collect())
    }

    pub fn state(&self, x: &[f64]) -> Result<LithoState1D> {
        let alphas = self.alphas(x)?;
        let terms = self.branches.iter().zip(alphas).map(|(&(m, theta), alpha)| LithoTerm { m, theta, alpha }).collect();
        LithoState1D::new(self.n, terms)
    }

    pub fn deposition(&self, x: &[f64]) -> Result<Vec<f64>> {
        let alphas = self.alphas(x)?;
        let len = self.target.samples.len();
        Ok((0..len).map(|i| alphas.iter().zip(&self.table).map(|(a, row)| a * row[i]).sum::<C64>().norm_sqr()).collect())
    }

    /// Objective for a gene vector; the last gene is the exposure time.
    pub fn cost(&self, x: &[f64]) -> f64 {
        if x.len() != self.genes() {
            return f64::NAN;
        }
        match self.deposition(x) {
            Ok(d) => objective(&d, x[x.len() - 1], &self.target).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }

    pub fn target(&self) -> &TargetPattern {
        &self.target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::r;

    #[test]
    fn basic_and_general() {
        assert!((deposition_basic(1, 0.0) - 2.0).abs() < 1e-15);
        assert!((deposition_basic(2, 0.3) - deposition_basic(2, 0.3 + PI)).abs() < 1e-12);
        for phi in grid(16) {
            assert!((deposition_general(7, 0, 0.0, phi) - deposition_basic(7, phi)).abs() < 1e-12);
            assert!((deposition_general(7, 0, PI, phi) - (1.0 - (7.0 * phi).cos())).abs() < 1e-12);
            assert!((deposition_general(7, 0, PI / 2.0, phi) - (1.0 - (7.0 * phi).sin())).abs() < 1e-12);
            let d = deposition_cross(9, 2, 2, 0.4, 0.4, phi);
            assert!(d.im.abs() < 1e-12 && (d.re - deposition_general(9, 2, 0.4, phi)).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_special_cases() {
        let (n, m, mp) = (11u32, 2u32, 4u32);
        let w = 2.0 * (binom(n, m) * binom(n, mp)).sqrt();
        for phi in grid(13) {
            let hm = 0.5 * (f64::from(n) - 2.0 * f64::from(m)) * phi;
            let hp = 0.5 * (f64::from(n) - 2.0 * f64::from(mp)) * phi;
            // Up to a unimodular phase the bracket is 4 × the published product.
            let cases = [
                (0.0, 0.0, hm.cos() * hp.cos()),
                (0.0, PI, hm.cos() * hp.sin()),
                (PI, 0.0, hm.sin() * hp.cos()),
                (PI, PI, hm.sin() * hp.sin()),
            ];
            for (a, b, want) in cases {
                let d = deposition_cross(n, m, mp, a, b, phi);
                assert!((d.norm() - w * want.abs()).abs() < 1e-9, "{a} {b}");
            }
            let a = deposition_cross(n, m, mp, 0.3, 1.1, phi);
            let b = deposition_cross(n, mp, m, 1.1, 0.3, phi);
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn two_branch_zeros() {
        let h = r(std::f64::consts::FRAC_1_SQRT_2);
        let s = LithoState1D::new(20, vec![LithoTerm { m: 9, theta: 0.0, alpha: h }, LithoTerm { m: 5, theta: 0.0, alpha: h }])
            .unwrap();
        assert!(deposition_superposition(&s, PI / 2.0) < 1e-12);
        assert!(deposition_superposition(&s, 1.5 * PI) < 1e-12);
        for phi in grid(64) {
            assert!((deposition_superposition(&s, phi) - deposition_superposition_pairwise(&s, phi)).abs() < 1e-6);
        }
    }

    #[test]
    fn two_d() {
        let a = LithoTerm2D { m: 2, k: 1, zeta: 0.7, zeta_bar: -0.4, alpha: r(1.0) };
        let b = LithoTerm2D { m: 3, k: 0, zeta: 0.1, zeta_bar: 1.2, alpha: r(1.0) };
        let n = 6;
        for (phi, chi) in [(0.1, 0.2), (1.3, 2.9), (4.0, 0.5)] {
            let lit = deposition_2d_block(n, &a, &b, phi, chi);
            let fac = amplitude_2d(n, &a, phi, chi).conj() * amplitude_2d(n, &b, phi, chi);
            assert!((lit - fac).norm() < 1e-9);
            let s = LithoState2D::new(n, vec![a]).unwrap();
            let diag = deposition_2d_diagonal(n, a.m, a.k, a.zeta, a.zeta_bar, phi, chi);
            assert!((deposition_2d(&s, phi, chi) - diag).abs() < 1e-9);
            let swapped = LithoTerm2D { m: a.k, k: a.m, zeta: a.zeta_bar, zeta_bar: a.zeta, alpha: a.alpha };
            let s2 = LithoState2D::new(n, vec![swapped]).unwrap();
            assert!((deposition_2d(&s, phi, chi) - deposition_2d(&s2, chi, phi)).abs() < 1e-9);
        }
    }

    #[test]
    fn fourier() {
        let t = trench_fourier(10);
        assert_eq!(t.len(), 5);
        assert_eq!(t[0], (1, 1.0));
        assert!((t[1].1 + 1.0 / 3.0).abs() < 1e-15);
        let phis = grid(256);
        let pf = pseudo_fourier_pattern(&[0.0, 1.0], &[0.0, 0.0], 1.0, &phis).unwrap();
        for (p, v) in phis.iter().zip(&pf.samples) {
            assert!((v - (1.0 + p.cos())).abs() < 1e-12);
        }
        let (cn, th) = to_polar(0.3, -0.4);
        assert!((cn * th.cos() - 0.3).abs() < 1e-15 && (cn * th.sin() + 0.4).abs() < 1e-15);
        let fit = fourier_trench_fit(&TargetPattern::trench(1.0, 1024), 10).unwrap();
        assert!(fit.pattern.iter().all(|&p| p >= -1e-12));
        assert!(fit.floor() > 0.5);
    }

    #[test]
    fn objective_quadrature() {
        let target = TargetPattern::new(grid(512).iter().map(|p| p.cos().powi(2)).collect()).unwrap();
        let d = vec![0.0; 512];
        assert!((objective(&d, 1.0, &target).unwrap() - 3.0 * PI / 4.0).abs() < 1e-12);
        let exact: Vec<f64> = target.samples.clone();
        assert!(objective(&exact, 1.0, &target).unwrap() < 1e-30);
    }

    #[test]
    fn target_from_text() {
        let text = "# phi F\n0 1\n3.14159 0\n";
        let t = TargetPattern::from_text(text, 4).unwrap();
        assert_eq!(t.samples.len(), 4);
        assert!((t.samples[0] - 1.0).abs() < 1e-12);
        assert!(TargetPattern::from_text("1 2 3\n", 4).is_err());
    }
}
