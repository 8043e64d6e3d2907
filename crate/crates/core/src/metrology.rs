//! Confidence, fidelity, entropies and down-conversion statistics.

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeLabel, OccupationState};
use crate::gaussian::PdcCoupling;
use crate::linalg::{self, CMatrix, CVector, C64};

/// A joint state Σ_k c_k |a_k⟩|b_k⟩ measured on the first party with a POVM element
/// written in the {|a_k⟩} basis.
#[derive(Clone, Debug)]
pub struct PreparationScenario {
    pub coefficients: Vec<C64>,
    pub povm: CMatrix,
    pub target: usize,
}

/// C = |c_k|²⟨a_k|E|a_k⟩ / Σ_l |c_l|²⟨a_l|E|a_l⟩.
pub fn confidence(s: &PreparationScenario) -> Result<f64> {
    let n = s.coefficients.len();
    if s.povm.nrows() != n || s.povm.ncols() != n || s.target >= n {
        return Err(Error::Dimension("scenario shapes".into()));
    }
    let w = |l: usize| s.coefficients[l].norm_sqr() * s.povm[(l, l)].re;
    let den: f64 = (0..n).map(w).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok(w(s.target) / den)
}

/// Confidence after the operation ρ → Σ_μ 𝒜_μ ρ 𝒜_μ†, read off along |a⟩.
pub fn confidence_measurement(family: &[CMatrix], rho: &CMatrix, a: &CVector) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::Dimension("empty operator family".into()));
    }
    let mut f = CMatrix::zeros(rho.nrows(), rho.ncols());
    for op in family {
        if op.ncols() != rho.nrows() {
            return Err(Error::Dimension("operator and state dimensions differ".into()));
        }
        f += op * rho * op.adjoint();
    }
    let tr = f.trace().re;
    if !(tr.abs() > 1e-300) {
        return Err(Error::ZeroProbability);
    }
    Ok((a.adjoint() * &f * a)[(0, 0)].re / tr)
}

/// Confidence that a single click of an N-cascade came from one photon when the
/// two-photon branch has relative weight δ.
pub fn confidence_cascade(n: usize, eta2: f64, delta: f64) -> f64 {
    let nf = n as f64;
    nf / (nf + delta * (eta2 + 2.0 * nf * (1.0 - eta2)))
}

/// The N → ∞ limit 1/(1 + 2δ(1−η²)).
pub fn confidence_cascade_limit(eta2: f64, delta: f64) -> f64 {
    1.0 / (1.0 + 2.0 * delta * (1.0 - eta2))
}

/// Efficiency needed to reach confidence `c`; `None` for the infinite cascade.
pub fn efficiency_for_confidence(n: Option<usize>, c: f64, delta: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) || !(delta > 0.0) {
        return Err(Error::Domain("need 0 < C ≤ 1 and δ > 0".into()));
    }
    let x = (1.0 / c - 1.0) / delta;
    Ok(match n {
        None => 1.0 - x / 2.0,
        Some(0) => return Err(Error::Domain("cascade needs N ≥ 1".into())),
        Some(n) => {
            let nf = n as f64;
            (2.0 * nf - nf * x) / (2.0 * nf - 1.0)
        }
    })
}

/// Lossy photon-number-resolving detector reporting "one": 1/(1 + 2δ(1−η²)).
/// A two-photon input is misread when exactly one photon is lost, weight 2η²(1−η²).
pub fn confidence_resolution(eta2: f64, delta: f64) -> f64 {
    1.0 / (1.0 + 2.0 * delta * (1.0 - eta2))
}

/// The published expression η²/(4−3η²) for the resolution detector.
pub fn confidence_resolution_published(eta2: f64) -> f64 {
    eta2 / (4.0 - 3.0 * eta2)
}

/// F = ⟨φ|ρ|φ⟩ for normalised ρ and φ.
pub fn fidelity(rho: &DensityOperator, target: &OccupationState) -> Result<f64> {
    let phi = target.normalized()?;
    let tr = rho.trace().re;
    if !(tr > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(rho.expectation(&phi)?.re / tr)
}

/// Probabilities over photon counts 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub p: Vec<f64>,
}

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !(x >= &0.0) || !x.is_finite()) {
            return Err(Error::Domain("probabilities must be finite and non-negative".into()));
        }
        Ok(Self { p })
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol
    }
}

/// P(n) = (n+1) r^{2n} e^{−2q} for a two-mode polarisation-entangled down-converter.
pub fn pdc_distribution(coupling: &PdcCoupling, n_max: usize) -> Distribution {
    let r2 = coupling.r().powi(2);
    let e = (-2.0 * coupling.q()).exp();
    Distribution { p: (0..=n_max).map(|n| (n as f64 + 1.0) * r2.powi(n as i32) * e).collect() }
}

/// Small-p form (n+1)(p/2)ⁿ e^{−p}.
pub fn pdc_distribution_small_p(p: f64, n_max: usize) -> Distribution {
    Distribution { p: (0..=n_max).map(|n| (n as f64 + 1.0) * (p / 2.0).powi(n as i32) * (-p).exp()).collect() }
}

pub fn poisson(mean: f64, n_max: usize) -> Distribution {
    let mut p = Vec::with_capacity(n_max + 1);
    let mut term = (-mean).exp();
    for n in 0..=n_max {
        if n > 0 {
            term *= mean / n as f64;
        }
        p.push(term);
    }
    Distribution { p }
}

/// s = arccos Σ√(p_j q_j).
pub fn statistical_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.p.len() != q.p.len() {
        return Err(Error::Dimension("distributions have different supports".into()));
    }
    let bc: f64 = p.p.iter().zip(&q.p).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(bc.clamp(-1.0, 1.0).acos())
}

/// Σ (p_j − q_j)²/q_j, the line element ds² between nearby distributions.
pub fn ds2(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.p.len() != q.p.len() {
        return Err(Error::Dimension("distributions have different supports".into()));
    }
    Ok(p.p.iter().zip(&q.p).filter(|(_, b)| **b > 0.0).map(|(a, b)| (a - b).powi(2) / b).sum())
}

/// ds² between the small-p pair distribution and the Poisson law of equal mean,
/// with the number of samples 1/ds² needed to tell them apart.
pub fn pdc_poisson_distinguishability(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    let n_max = 30;
    let pdc = pdc_distribution_small_p(p, n_max);
    let pois = poisson(pdc.mean(), n_max);
    let d = ds2(&pdc, &pois)?;
    Ok((d, 1.0 / d))
}

/// −Σ p log₂ p with 0 log 0 = 0.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

/// −Tr ρ log₂ ρ for a dense Hermitian ρ.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    let ev: Vec<f64> = linalg::hermitian_eigenvalues(rho).into_iter().map(|x| x.max(0.0)).collect();
    shannon_entropy(&ev)
}

pub fn von_neumann_entropy_of(rho: &DensityOperator) -> f64 {
    von_neumann_entropy(&rho.to_dense(&rho.support_basis()))
}

/// E(Ψ) = S(Tr₂|Ψ⟩⟨Ψ|) with subsystem 1 formed by `side`.
pub fn entanglement_measure(psi: &OccupationState, side: &[ModeLabel]) -> Result<f64> {
    let rho = DensityOperator::from_pure(&psi.normalized()?);
    Ok(von_neumann_entropy_of(&rho.partial_trace(side)?))
}

/// E(Ψ) for a dense vector on C^{d1} ⊗ C^{d2} (row-major: index = i·d2 + j).
pub fn entanglement_measure_dense(psi: &CVector, d1: usize, d2: usize) -> Result<f64> {
    if psi.len() != d1 * d2 {
        return Err(Error::Dimension("vector length differs from d1·d2".into()));
    }
    let nrm = psi.norm();
    if !(nrm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let m = CMatrix::from_fn(d1, d2, |i, j| psi[i * d2 + j] / nrm);
    let sv = m.singular_values();
    Ok(shannon_entropy(&sv.iter().map(|s| s * s).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{cascade_closed_form, CascadeConfig};
    use crate::fock::Register;
    use crate::linalg::{c, r};

    #[test]
    fn confidence_basics() {
        let s = PreparationScenario {
            coefficients: vec![r(0.6), r(0.8)],
            povm: CMatrix::from_diagonal(&CVector::from_vec(vec![r(1.0), r(0.0)])),
            target: 0,
        };
        assert_eq!(confidence(&s).unwrap(), 1.0);
        let s0 = PreparationScenario { povm: CMatrix::zeros(2, 2), ..s };
        assert!(confidence(&s0).is_err());
    }

    #[test]
    fn stern_gerlach() {
        let rho = CMatrix::from_diagonal(&CVector::from_vec(vec![r(0.5), r(0.5)]));
        let up = CVector::from_vec(vec![r(1.0), r(0.0)]);
        let proj = &up * up.adjoint();
        assert!((confidence_measurement(&[proj], &rho, &up).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measurement_family_matches_dense() {
        let a1 = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.1), r(0.2), r(0.0), c(0.3, -0.2)]);
        let a2 = CMatrix::from_row_slice(2, 2, &[r(0.1), c(0.0, 0.5), r(0.4), r(0.2)]);
        let rho = CMatrix::from_row_slice(2, 2, &[r(0.7), c(0.1, 0.2), c(0.1, -0.2), r(0.3)]);
        let a = CVector::from_vec(vec![r(0.0), r(1.0)]);
        let f = &a1 * &rho * a1.adjoint() + &a2 * &rho * a2.adjoint();
        let want = f[(1, 1)].re / f.trace().re;
        assert!((confidence_measurement(&[a1, a2], &rho, &a).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn cascade_confidence_thresholds() {
        assert_eq!(confidence_cascade(4, 0.3, 0.0), 1.0);
        let e4 = efficiency_for_confidence(Some(4), 0.65, 1.0).unwrap();
        assert!((confidence_cascade(4, e4, 1.0) - 0.65).abs() < 1e-14);
        assert!((e4 - 0.835).abs() < 0.005);
        let einf = efficiency_for_confidence(None, 0.65, 1.0).unwrap();
        assert!((einf - 0.731).abs() < 0.005);
        assert!((confidence_cascade(1_000_000, einf, 1.0) - 0.65).abs() < 1e-6);
    }

    #[test]
    fn cascade_confidence_from_click_statistics() {
        for n in 1..=4 {
            for &e in &[0.3, 0.8, 1.0] {
                for &d in &[0.5f64, 1.0, 2.0] {
                    let cfg = CascadeConfig::new(n, e).unwrap();
                    let p1 = cascade_closed_form(&cfg, 1, 1).unwrap();
                    let p2 = cascade_closed_form(&cfg, 1, 2).unwrap();
                    let s = PreparationScenario {
                        coefficients: vec![r(1.0), r(d.sqrt())],
                        povm: CMatrix::from_diagonal(&CVector::from_vec(vec![r(p1), r(p2)])),
                        target: 0,
                    };
                    assert!((confidence(&s).unwrap() - confidence_cascade(n, e, d)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn resolution_detector_forms() {
        assert!((confidence_resolution(0.88, 1.0) - 1.0 / 1.24).abs() < 1e-15);
        assert!((confidence_resolution_published(0.88) - 0.88 / 1.36).abs() < 1e-15);
    }

    #[test]
    fn fidelity_of_mixture() {
        let reg = Register::scalar(1);
        let a = OccupationState::basis(reg.clone(), 2, &[1]).unwrap();
        let b = OccupationState::basis(reg, 2, &[2]).unwrap();
        let rho = DensityOperator::mixture(&[(0.3, a.clone()), (0.7, b.clone())]).unwrap();
        assert!((fidelity(&rho, &b).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(fidelity(&DensityOperator::from_pure(&a), &b).unwrap(), 0.0);
        assert!((fidelity(&DensityOperator::from_pure(&a), &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdc_statistics() {
        let k = PdcCoupling::new(r(0.3));
        let d = pdc_distribution(&k, 200);
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!((d.p[0] - (-2.0 * k.q()).exp()).abs() < 1e-15);
        for &p in &[1e-2, 1e-3, 1e-4] {
            let s = pdc_distribution_small_p(p, 30);
            assert!((s.total() - 1.0).abs() < 10.0 * p * p);
            let (ds, n) = pdc_poisson_distinguishability(p).unwrap();
            let ratio = ds / (p * p / 8.0);
            assert!((0.9..=1.1).contains(&ratio), "p={p}: {ratio}");
            assert!(n < 8.0 / (p * p) * 1.2);
        }
    }

    #[test]
    fn distances() {
        let a = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(statistical_distance(&a, &a).unwrap(), 0.0);
        let d0 = Distribution::new(vec![1.0, 0.0]).unwrap();
        let d1 = Distribution::new(vec![0.0, 1.0]).unwrap();
        assert!((statistical_distance(&d0, &d1).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // second order: s² ≈ ¼ Σ dp²/p
        let b = Distribution::new(vec![0.2 + 1e-4, 0.5 - 3e-4, 0.3 + 2e-4]).unwrap();
        let s = statistical_distance(&a, &b).unwrap();
        assert!((4.0 * s * s / ds2(&b, &a).unwrap() - 1.0).abs() < 1e-3);
        assert!(statistical_distance(&a, &d0).is_err());
    }

    #[test]
    fn entropies() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]), 0.0);
        assert!((shannon_entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let bell = CVector::from_vec(vec![r(h), r(0.0), r(0.0), r(h)]);
        assert!((entanglement_measure_dense(&bell, 2, 2).unwrap() - 1.0).abs() < 1e-12);
        let prod = CVector::from_vec(vec![r(1.0), r(0.0), r(0.0), r(0.0)]);
        assert!(entanglement_measure_dense(&prod, 2, 2).unwrap().abs() < 1e-12);
        let psi = OccupationState::from_terms(Register::scalar(2), 2, [(vec![1, 0], r(h)), (vec![0, 1], r(h))]).unwrap();
        let m0 = psi.register().modes()[0];
        let m1 = psi.register().modes()[1];
        assert!((entanglement_measure(&psi, &[m0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((entanglement_measure(&psi, &[m1]).unwrap() - 1.0).abs() < 1e-12);
    }
}
