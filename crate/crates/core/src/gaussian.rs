//! Quadratic sources and passive components.
//!
//! Mode-space matrices act on creation operators row-wise:
//! a_i† → Σ_j U[(i, j)] a_j†.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{ModeLabel, OccupationState, Register, TOL};
use crate::linalg::{self, c, r, CMatrix, CVector, C64};

/// Coefficients of the ordered form
/// exp(τK₊ − τ*K₋) = exp(t₊K₊) exp(t₀K₀) exp(t₋K₋).
pub fn normal_order_su11(tau: C64) -> (C64, f64, C64) {
    let m = tau.norm();
    if m == 0.0 {
        return (C64::default(), 0.0, C64::default());
    }
    let hat = tau / m;
    let th = m.tanh();
    (hat * th, -2.0 * m.cosh().ln(), -hat.conj() * th)
}

/// Coupling of a down-converter: τ = κt and the derived ξ, r, q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdcCoupling {
    pub tau: C64,
}

impl PdcCoupling {
    pub fn new(tau: C64) -> Self {
        Self { tau }
    }

    /// ξ = τ̂ tanh|τ|.
    pub fn xi(&self) -> C64 {
        normal_order_su11(self.tau).0
    }

    pub fn r(&self) -> f64 {
        self.tau.norm().tanh()
    }

    pub fn q(&self) -> f64 {
        2.0 * self.tau.norm().cosh().ln()
    }

    /// Single-pair probability p = 2 tanh²|τ|.
    pub fn p(&self) -> f64 {
        2.0 * self.r().powi(2)
    }
}

/// exp[σ (a†, B a†)]|0⟩ with σ = −½ by default.
#[derive(Clone, Debug)]
pub struct GaussianSource {
    b: CMatrix,
    order: u32,
    sign: f64,
}

impl GaussianSource {
    pub fn new(b: CMatrix, order: u32) -> Result<Self> {
        let d = linalg::symmetry_defect(&b);
        if !(d <= TOL) {
            return Err(Error::NotSymmetric(d));
        }
        Ok(Self { b, order, sign: -0.5 })
    }

    /// Replace the prefactor of the exponent (e.g. +½ for a ξ-coupled prior).
    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign = sign;
        self
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// Terms of the Taylor series by pair order k: (σQ)^k/k! |0⟩ for k = 0..=order.
    pub fn expand_by_order(&self, register: &Register, cutoff: u32) -> Result<Vec<OccupationState>> {
        let n = register.len();
        if self.b.nrows() != n {
            return Err(Error::Dimension(format!("B is {}x{}, register has {n} modes", self.b.nrows(), self.b.ncols())));
        }
        if 2 * self.order > cutoff {
            return Err(Error::Cutoff { cutoff, needed: 2 * self.order });
        }
        let mut terms = vec![OccupationState::vacuum(register.clone(), cutoff)];
        for k in 1..=self.order {
            let prev = terms.last().expect("non-empty");
            let next = apply_quadratic(prev, &self.b)?.scaled(r(self.sign / k as f64));
            terms.push(next);
        }
        Ok(terms)
    }
}

/// Q|ψ⟩ with Q = Σ_ij B_ij a_i† a_j†.
pub fn apply_quadratic(psi: &OccupationState, b: &CMatrix) -> Result<OccupationState> {
    let n = psi.register().len();
    let mut acc = OccupationState::zero(psi.register().clone(), psi.cutoff());
    for i in 0..n {
        let ai = psi.create_at(i);
        for j in i..n {
            let w = if i == j { b[(i, i)] } else { b[(i, j)] + b[(j, i)] };
            if w == C64::default() {
                continue;
            }
            acc = acc.add(&ai.create_at(j).scaled(w))?;
        }
    }
    Ok(acc)
}

/// Taylor expansion of the source through its order (unnormalised).
pub fn expand_squeezed_vacuum(src: &GaussianSource, register: &Register, cutoff: u32) -> Result<OccupationState> {
    let terms = src.expand_by_order(register, cutoff)?;
    let mut acc = OccupationState::zero(register.clone(), cutoff);
    for t in &terms {
        acc = acc.add(t)?;
    }
    Ok(acc)
}

/// Modes a_x, a_y, b_x, b_y of a polarisation-entangled pair source.
pub fn pdc_register() -> Register {
    Register::polarized(2)
}

/// Antisymmetric pair creator L₊ = a_x†b_y† − a_y†b_x† as a defining matrix
/// for exp(ξL₊) = exp[−½(a†, B a†)] on [`pdc_register`].
pub fn pdc_matrix(xi: C64) -> CMatrix {
    let mut b = CMatrix::zeros(4, 4);
    b[(0, 3)] = -xi;
    b[(3, 0)] = -xi;
    b[(1, 2)] = xi;
    b[(2, 1)] = xi;
    b
}

/// Normalised n-pair state N_n L₊ⁿ|0⟩ with N_n² = 1/(n!(n+1)!).
pub fn pdc_pair_state(n: u32, cutoff: u32) -> Result<OccupationState> {
    if 2 * n > cutoff {
        return Err(Error::Cutoff { cutoff, needed: 2 * n });
    }
    let mut s = OccupationState::vacuum(pdc_register(), cutoff);
    for _ in 0..n {
        s = apply_pair_creator(&s, 0, 3, 1, 2);
    }
    let norm = (linalg::factorial(n) * linalg::factorial(n + 1)).sqrt();
    Ok(s.scaled(r(1.0 / norm)))
}

/// (a_i†a_j† − a_k†a_l†)|ψ⟩ by register position.
pub(crate) fn apply_pair_creator(s: &OccupationState, i: usize, j: usize, k: usize, l: usize) -> OccupationState {
    let p = s.create_at(i).create_at(j);
    let m = s.create_at(k).create_at(l);
    p.add(&m.scaled(r(-1.0))).expect("same register")
}

/// Symmetric N-port, U_jk = e^{2πi jk/N}/√N (indices from 0).
pub fn symmetric_nport(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Domain("N-port needs N ≥ 1".into()));
    }
    let s = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, n, |j, k| {
        let ph = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        c(ph.cos() * s, ph.sin() * s)
    }))
}

/// 2N×2N cascade with loss ports: [[ηU, √(1−η²)U], [−√(1−η²)U, ηU]].
/// `eta` is the amplitude transmission (efficiency η²).
pub fn cascade_unitary(n: usize, eta: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("η = {eta} outside [0, 1]")));
    }
    let u = symmetric_nport(n)?;
    let l = (1.0 - eta * eta).max(0.0).sqrt();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&u.scale(eta));
    out.view_mut((0, n), (n, n)).copy_from(&u.scale(l));
    out.view_mut((n, 0), (n, n)).copy_from(&u.scale(-l));
    out.view_mut((n, n), (n, n)).copy_from(&u.scale(eta));
    Ok(out)
}

/// Beam splitter with a_out† = cosθ a† + sinθ b†, b_out† = sinθ a† − cosθ b†.
pub fn beam_splitter(theta: f64) -> CMatrix {
    let (s, co) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[r(co), r(s), r(s), r(-co)])
}

/// Polarisation rotation x' = cosθ x + sinθ y, y' = sinθ x − cosθ y.
pub fn polarization_rotation(theta: f64) -> CMatrix {
    beam_splitter(theta)
}

/// Proper rotation [[cosθ, sinθ], [−sinθ, cosθ]], used by the nonlinear-sign circuit.
pub fn rotation(theta: f64) -> CMatrix {
    let (s, co) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[r(co), r(s), r(-s), r(co)])
}

/// a† → e^{iφ} a†.
pub fn phase_shift(phi: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C64::from_polar(1.0, phi))
}

/// Squeeze spectrum of a complex symmetric B: B = W diag(λ) Wᵀ with W unitary.
#[derive(Clone, Debug)]
pub struct SqueezeSpectrum {
    pub lambda: Vec<f64>,
    pub w: CMatrix,
}

/// Takagi factorisation through the real symmetric embedding
/// [[Re B, Im B], [Im B, −Re B]], whose spectrum is ±λ.
pub fn takagi(b: &CMatrix) -> Result<SqueezeSpectrum> {
    let d = linalg::symmetry_defect(b);
    if !(d <= TOL) {
        return Err(Error::NotSymmetric(d));
    }
    let n = b.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = b[(i, j)];
            m[(i, j)] = z.re;
            m[(i, j + n)] = z.im;
            m[(i + n, j)] = z.im;
            m[(i + n, j + n)] = -z.re;
        }
    }
    let eig = SymmetricEigen::new(m);
    let scale = linalg::max_abs(b).max(1.0);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut lambda = Vec::with_capacity(n);
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    let to_complex = |k: usize| CVector::from_fn(n, |i, _| c(eig.eigenvectors[(i, k)], eig.eigenvectors[(i + n, k)]));
    for &k in &order {
        if cols.len() == n {
            break;
        }
        let ev = eig.eigenvalues[k];
        if ev > 1e-10 * scale {
            lambda.push(ev);
            cols.push(to_complex(k));
        }
    }
    // Null directions: complex Gram-Schmidt on the zero eigenspace.
    for &k in &order {
        if cols.len() == n {
            break;
        }
        if eig.eigenvalues[k].abs() > 1e-10 * scale {
            continue;
        }
        let mut v = to_complex(k);
        for u in &cols {
            let p = u.dotc(&v);
            v -= u * p;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            cols.push(v / c(nv, 0.0));
            lambda.push(0.0);
        }
    }
    if cols.len() != n {
        return Err(Error::Dimension("Takagi factorisation failed to span the space".into()));
    }
    let w = CMatrix::from_columns(&cols);
    Ok(SqueezeSpectrum { lambda, w })
}

/// The symmetric 8×8 matrix of the teleportation prior on modes
/// a_x, a_y, b_x, b_y, c_x, c_y, d_x, d_y.
pub fn teleport_prior_matrix(theta: f64) -> CMatrix {
    let (s, co) = theta.sin_cos();
    let h = 0.5f64.sqrt();
    let mut a = DMatrix::<f64>::zeros(8, 8);
    let upper: [(usize, usize, f64); 12] = [
        (0, 2, -s),
        (0, 3, co),
        (0, 4, -s),
        (0, 5, co),
        (1, 2, co),
        (1, 3, s),
        (1, 4, co),
        (1, 5, s),
        (2, 7, -1.0),
        (3, 6, -1.0),
        (4, 7, 1.0),
        (5, 6, 1.0),
    ];
    for (i, j, v) in upper {
        a[(i, j)] = v * h;
        a[(j, i)] = v * h;
    }
    a.map(r)
}

/// Register a, b, c, d (spatial 0..4) with x and y polarisations.
pub fn teleport_register() -> Register {
    Register::polarized(4)
}

/// exp[½ξ(a†, A a†)]|0⟩ expanded through `order` pairs.
pub fn innsbruck_prior_state(theta: f64, xi: f64, order: u32) -> Result<OccupationState> {
    if !(2..=3).contains(&order) {
        return Err(Error::Domain(format!("prior order {order} not in {{2, 3}}")));
    }
    let src = GaussianSource::new(teleport_prior_matrix(theta).scale(xi), order)?.with_sign(0.5);
    expand_squeezed_vacuum(&src, &teleport_register(), 2 * order)
}

/// Convenience: the mode label list of a register.
pub fn labels(reg: &Register) -> Vec<ModeLabel> {
    reg.modes().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DensityOperator;

    #[test]
    fn su11_identity_and_real_tau() {
        assert_eq!(normal_order_su11(C64::default()), (C64::default(), 0.0, C64::default()));
        let (tp, t0, tm) = normal_order_su11(r(0.3));
        assert!((tp - r(0.3f64.tanh())).norm() < 1e-15);
        assert!((tm + r(0.3f64.tanh())).norm() < 1e-15);
        assert!((t0 + 2.0 * 0.3f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn single_mode_squeezing_series() {
        let lam = 0.4;
        let src = GaussianSource::new(CMatrix::from_element(1, 1, r(lam)), 2).unwrap();
        let s = expand_squeezed_vacuum(&src, &Register::scalar(1), 4).unwrap();
        assert!((s.amplitude(&[0]) - r(1.0)).norm() < 1e-15);
        assert!((s.amplitude(&[2]) - r(-lam / 2.0 * 2f64.sqrt())).norm() < 1e-15);
        let k2 = (lam / 2.0).powi(2) * 24f64.sqrt() / 2.0;
        assert!((s.amplitude(&[4]) - r(k2)).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_gives_vacuum() {
        let src = GaussianSource::new(CMatrix::zeros(3, 3), 2).unwrap();
        let s = expand_squeezed_vacuum(&src, &Register::scalar(3), 4).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.amplitude(&[0, 0, 0]) - r(1.0)).norm() < 1e-15);
    }

    #[test]
    fn cutoff_guard() {
        let src = GaussianSource::new(CMatrix::zeros(1, 1), 3).unwrap();
        assert!(matches!(expand_squeezed_vacuum(&src, &Register::scalar(1), 4), Err(Error::Cutoff { .. })));
    }

    #[test]
    fn non_symmetric_rejected() {
        let b = CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)]);
        assert!(matches!(GaussianSource::new(b, 1), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn pdc_first_order_structure() {
        let xi = 0.05;
        let src = GaussianSource::new(pdc_matrix(r(xi)), 2).unwrap();
        let s = expand_squeezed_vacuum(&src, &pdc_register(), 4).unwrap();
        let singlet = pdc_pair_state(1, 4).unwrap();
        let overlap = singlet.inner_product(&s).unwrap();
        // ξ|Ψ⁻⟩ with |Ψ⁻⟩ normalised carries amplitude ξ√2 on the normalised singlet
        assert!((overlap - r(xi * 2f64.sqrt())).norm() < 1e-15);
        assert!((s.amplitude(&[0, 0, 0, 0]) - r(1.0)).norm() < 1e-15);
    }

    #[test]
    fn pair_states() {
        let p0 = pdc_pair_state(0, 0).unwrap();
        assert!((p0.amplitude(&[0, 0, 0, 0]) - r(1.0)).norm() < 1e-15);
        let p1 = pdc_pair_state(1, 2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((p1.amplitude(&[1, 0, 0, 1]) - r(h)).norm() < 1e-15);
        assert!((p1.amplitude(&[0, 1, 1, 0]) - r(-h)).norm() < 1e-15);
        for n in 0..4 {
            let p = pdc_pair_state(n, 2 * n).unwrap();
            assert!((p.norm_sqr() - 1.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn nport_matrices() {
        assert!((symmetric_nport(1).unwrap()[(0, 0)] - r(1.0)).norm() < 1e-15);
        let u2 = symmetric_nport(2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((u2[(1, 1)] - r(-h)).norm() < 1e-15);
        assert!(linalg::unitarity_defect(&symmetric_nport(4).unwrap()) < 1e-14);
        assert!(symmetric_nport(0).is_err());
        let cu = cascade_unitary(2, 0.5f64.sqrt()).unwrap();
        assert!(linalg::unitarity_defect(&cu) < 1e-14);
        let c1 = cascade_unitary(3, 1.0).unwrap();
        assert!(c1.view((0, 3), (3, 3)).iter().all(|z| z.norm() == 0.0));
        assert!(cascade_unitary(2, 1.2).is_err());
    }

    #[test]
    fn component_conventions() {
        let b0 = beam_splitter(0.0);
        assert!((b0[(1, 1)] - r(-1.0)).norm() < 1e-15);
        for th in [0.1, 0.7, PI / 4.0] {
            assert!(linalg::unitarity_defect(&beam_splitter(th)) < 1e-15);
            assert!(linalg::unitarity_defect(&polarization_rotation(th)) < 1e-15);
            assert!(linalg::unitarity_defect(&rotation(th)) < 1e-15);
        }
        let p = phase_shift(PI);
        assert!(((p[(0, 0)] * p[(0, 0)]) - r(1.0)).norm() < 1e-15);
        let s = OccupationState::basis(Register::scalar(2), 2, &[1, 1]).unwrap();
        let out = s.apply_passive_unitary(&beam_splitter(PI / 4.0)).unwrap();
        let h = 0.5f64.sqrt();
        assert!((out.amplitude(&[2, 0]) - r(h)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 2]) - r(-h)).norm() < 1e-15);
        let s = OccupationState::basis(Register::scalar(2), 1, &[1, 0]).unwrap();
        let out = s.apply_passive_unitary(&symmetric_nport(2).unwrap()).unwrap();
        assert!((out.amplitude(&[1, 0]) - r(h)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 1]) - r(h)).norm() < 1e-15);
    }

    #[test]
    fn prior_matrix_is_orthogonal() {
        for th in [0.0, 0.3, 1.2] {
            let a = teleport_prior_matrix(th);
            assert!(linalg::unitarity_defect(&a) < 1e-14);
            assert!(linalg::symmetry_defect(&a) == 0.0);
        }
    }

    #[test]
    fn prior_vacuum_at_zero_coupling() {
        let s = innsbruck_prior_state(0.4, 0.0, 2).unwrap();
        assert_eq!(s.len(), 1);
        assert!(innsbruck_prior_state(0.4, 0.1, 1).is_err());
    }

    #[test]
    fn prior_first_order_follows_row_one() {
        let th = 0.6;
        let src = GaussianSource::new(teleport_prior_matrix(th).scale(0.1), 2).unwrap().with_sign(0.5);
        let terms = src.expand_by_order(&teleport_register(), 4).unwrap();
        let h = 0.5f64.sqrt();
        // ½ξ · 2A_{ax,by} a_x† b_y† → amplitude ξ cosθ/√2 on |ax, by⟩
        let mut occ = vec![0u8; 8];
        occ[0] = 1;
        occ[3] = 1;
        assert!((terms[1].amplitude(&occ) - r(0.1 * th.cos() * h)).norm() < 1e-15);
        occ[3] = 0;
        occ[2] = 1;
        assert!((terms[1].amplitude(&occ) - r(-0.1 * th.sin() * h)).norm() < 1e-15);
    }

    #[test]
    fn prior_teleports_polarisation() {
        let th = 0.7;
        let prior = innsbruck_prior_state(th, 0.2, 2).unwrap();
        let reg = teleport_register();
        let m = |s: u16, x: bool| if x { ModeLabel::x(s) } else { ModeLabel::y(s) };
        let ax = prior.apply_annihilation(m(0, true)).unwrap();
        let t1 = ax.apply_annihilation(m(1, true)).unwrap().apply_annihilation(m(2, false)).unwrap();
        let t2 = ax.apply_annihilation(m(1, false)).unwrap().apply_annihilation(m(2, true)).unwrap();
        let out = t1.add(&t2.scaled(r(-1.0))).unwrap();
        let det: Vec<ModeLabel> = reg.modes()[..6].to_vec();
        let d = out.project(&det, &[0; 6]).unwrap().normalized().unwrap();
        // The published matrix carries the input's cos θ onto d_y and sin θ onto d_x.
        let ov = d.amplitude(&[1, 0]) * th.sin() + d.amplitude(&[0, 1]) * th.cos();
        assert!((ov.norm() - 1.0).abs() < 1e-12);
        assert!(DensityOperator::from_pure(&d).is_hermitian(1e-15));
    }

    #[test]
    fn takagi_reconstructs() {
        let b = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.3, 0.1),
                c(0.2, -0.4),
                c(0.05, 0.0),
                c(0.2, -0.4),
                c(-0.1, 0.2),
                c(0.0, 0.3),
                c(0.05, 0.0),
                c(0.0, 0.3),
                c(0.4, 0.0),
            ],
        );
        let sp = takagi(&b).unwrap();
        assert!(linalg::unitarity_defect(&sp.w) < 1e-10);
        let lam = CMatrix::from_diagonal(&CVector::from_iterator(3, sp.lambda.iter().map(|&x| r(x))));
        let rec = &sp.w * lam * sp.w.transpose();
        assert!(linalg::max_abs(&(rec - &b)) < 1e-10);
        assert!(sp.lambda.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn takagi_rank_deficient() {
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let b = &v * v.transpose();
        let sp = takagi(&b).unwrap();
        let zeros = sp.lambda.iter().filter(|&&x| x == 0.0).count();
        assert_eq!(zeros, 1);
        let lam = CMatrix::from_diagonal(&CVector::from_iterator(2, sp.lambda.iter().map(|&x| r(x))));
        assert!(linalg::max_abs(&(&sp.w * lam * sp.w.transpose() - &b)) < 1e-10);
    }
}
