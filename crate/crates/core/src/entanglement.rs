//! Bipartite structure: Schmidt form, partial transpose, Werner states,
//! purification and local-unitary equivalence.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeLabel, Occupation, OccupationState};
use crate::linalg::{self, c, r, CMatrix, CVector, C64};
use crate::metrology::shannon_entropy;

/// Schmidt form Σ_i c_i |u_i⟩|v_i⟩ of a dense pure state.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Non-negative, descending.
    pub coefficients: Vec<f64>,
    /// Columns |u_i⟩ on subsystem 1.
    pub u: CMatrix,
    /// Columns |v_i⟩ on subsystem 2.
    pub v: CMatrix,
}

impl Schmidt {
    pub fn reconstruct(&self) -> CVector {
        let (d1, d2) = (self.u.nrows(), self.v.nrows());
        let mut out = CVector::zeros(d1 * d2);
        for (k, &ck) in self.coefficients.iter().enumerate() {
            for i in 0..d1 {
                for j in 0..d2 {
                    out[i * d2 + j] += self.u[(i, k)] * self.v[(j, k)] * ck;
                }
            }
        }
        out
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.coefficients.iter().map(|x| x * x).collect::<Vec<_>>())
    }
}

/// Schmidt decomposition of ψ ∈ C^{d1} ⊗ C^{d2} (index i·d2 + j) by SVD.
pub fn schmidt(psi: &CVector, d1: usize, d2: usize) -> Result<Schmidt> {
    if psi.len() != d1 * d2 {
        return Err(Error::Dimension("vector length differs from d1·d2".into()));
    }
    let m = CMatrix::from_fn(d1, d2, |i, j| psi[i * d2 + j]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u = CMatrix::from_columns(&order.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
    // M = Σ s u v†, so ψ_ij = Σ s u_i (v†)_kj: the second factor is row k of v_t.
    let v = CMatrix::from_columns(&order.iter().map(|&k| vt.row(k).transpose().into_owned()).collect::<Vec<_>>());
    Ok(Schmidt { coefficients, u, v })
}

/// Coefficient matrix of a Fock state split into `side` and the remaining modes,
/// with the occupation labels of rows and columns.
pub fn bipartite_matrix(psi: &OccupationState, side: &[ModeLabel]) -> Result<(CMatrix, Vec<Occupation>, Vec<Occupation>)> {
    let idx = psi.register().indices_of(side)?;
    let rest: Vec<usize> = (0..psi.register().len()).filter(|i| !idx.contains(i)).collect();
    if rest.is_empty() || idx.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let mut rows: BTreeMap<Occupation, usize> = BTreeMap::new();
    let mut cols: BTreeMap<Occupation, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (k, a) in psi.iter() {
        let ro: Occupation = idx.iter().map(|&i| k[i]).collect();
        let co: Occupation = rest.iter().map(|&i| k[i]).collect();
        let nr = rows.len();
        let ri = *rows.entry(ro).or_insert(nr);
        let nc = cols.len();
        let ci = *cols.entry(co).or_insert(nc);
        entries.push((ri, ci, *a));
    }
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (i, j, a) in entries {
        m[(i, j)] += a;
    }
    let mut rl = vec![Vec::new(); rows.len()];
    for (o, i) in rows {
        rl[i] = o;
    }
    let mut cl = vec![Vec::new(); cols.len()];
    for (o, i) in cols {
        cl[i] = o;
    }
    Ok((m, rl, cl))
}

/// Schmidt coefficients of a Fock state across `side`.
pub fn schmidt_coefficients(psi: &OccupationState, side: &[ModeLabel]) -> Result<Vec<f64>> {
    let (m, _, _) = bipartite_matrix(psi, side)?;
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Transpose of subsystem 2 on a dense operator over C^{d1} ⊗ C^{d2}.
pub fn partial_transpose(rho: &CMatrix, d1: usize, d2: usize) -> Result<CMatrix> {
    if rho.nrows() != d1 * d2 || !rho.is_square() {
        return Err(Error::Dimension("operator dimension differs from d1·d2".into()));
    }
    Ok(CMatrix::from_fn(d1 * d2, d1 * d2, |row, col| {
        let (i, j) = (row / d2, row % d2);
        let (k, l) = (col / d2, col % d2);
        rho[(i * d2 + l, k * d2 + j)]
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptVerdict {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

/// Positive-partial-transpose test. A negative eigenvalue proves entanglement; for
/// dimensions beyond 2×2 and 2×3 a positive verdict is inconclusive.
pub fn is_ppt(rho: &CMatrix, d1: usize, d2: usize, tol: f64) -> Result<PptVerdict> {
    let ev = linalg::hermitian_eigenvalues(&partial_transpose(rho, d1, d2)?);
    let min = ev.first().copied().unwrap_or(0.0);
    Ok(PptVerdict { ppt: min >= -tol, min_eigenvalue: min })
}

/// PPT verdict for a Fock-space operator, transposing `modes`, with the spectrum
/// taken on the support of the transposed operator.
pub fn is_ppt_fock(rho: &DensityOperator, modes: &[ModeLabel], tol: f64) -> Result<PptVerdict> {
    let ev = rho.partial_transpose(modes)?.eigenvalues();
    let min = ev.first().copied().unwrap_or(0.0);
    Ok(PptVerdict { ppt: min >= -tol, min_eigenvalue: min })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn label(&self) -> &'static str {
        match self {
            Bell::PhiPlus => "Phi+",
            Bell::PhiMinus => "Phi-",
            Bell::PsiPlus => "Psi+",
            Bell::PsiMinus => "Psi-",
        }
    }
}

/// Two-qubit Bell vector, basis |00⟩, |01⟩, |10⟩, |11⟩.
pub fn bell(kind: Bell) -> CVector {
    let h = 0.5f64.sqrt();
    let v = match kind {
        Bell::PhiPlus => [h, 0.0, 0.0, h],
        Bell::PhiMinus => [h, 0.0, 0.0, -h],
        Bell::PsiPlus => [0.0, h, h, 0.0],
        Bell::PsiMinus => [0.0, h, -h, 0.0],
    };
    CVector::from_iterator(4, v.iter().map(|&x| r(x)))
}

/// ε|Ψ⁻⟩⟨Ψ⁻| + (1−ε)𝟙/4.
pub fn werner(eps: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} outside [0, 1]")));
    }
    let s = bell(Bell::PsiMinus);
    Ok(&s * s.adjoint() * r(eps) + CMatrix::identity(4, 4) * r((1.0 - eps) / 4.0))
}

/// (F, F′) with F = (1+3ε)/4 and F′ = (1+2ε+5ε²)/(4(1+ε)), as published.
pub fn purification_step(eps: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} outside [0, 1]")));
    }
    let f = (1.0 + 3.0 * eps) / 4.0;
    Ok((f, (1.0 + 2.0 * eps + 5.0 * eps * eps) / (4.0 * (1.0 + eps))))
}

/// (F, F′) with the recurrence-protocol denominator 4(1+ε²); F′ > F exactly for 1/3 < ε < 1.
pub fn purification_step_corrected(eps: f64) -> Result<(f64, f64)> {
    let (f, _) = purification_step(eps)?;
    Ok((f, (1.0 + 2.0 * eps + 5.0 * eps * eps) / (4.0 * (1.0 + eps * eps))))
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)])
}

/// One recurrence round on two Werner pairs by direct density-matrix algebra.
/// Qubit order (A1, B1, A2, B2). Returns (F′, success probability).
pub fn purification_simulate(eps: f64) -> Result<(f64, f64)> {
    let w = werner(eps)?;
    let rho = linalg::kron(&w, &w);
    let id = CMatrix::identity(2, 2);
    let y = pauli_y();
    let on = |ops: [&CMatrix; 4]| linalg::kron(&linalg::kron(ops[0], ops[1]), &linalg::kron(ops[2], ops[3]));
    let flip = on([&id, &y, &id, &y]);
    let rho = &flip * rho * flip.adjoint();
    // bilateral CNOT: A1 → A2 and B1 → B2
    let cnot = CMatrix::from_fn(16, 16, |row, col| {
        let bits = |x: usize| [(x >> 3) & 1, (x >> 2) & 1, (x >> 1) & 1, x & 1];
        let b = bits(col);
        let out = [b[0], b[1], b[2] ^ b[0], b[3] ^ b[1]];
        r(f64::from(out == bits(row)))
    });
    let rho = &cnot * rho * cnot.adjoint();
    let mut kept = CMatrix::zeros(4, 4);
    for t in 0..2usize {
        for i in 0..4usize {
            for j in 0..4usize {
                let (a1, b1) = (i >> 1, i & 1);
                let (a1p, b1p) = (j >> 1, j & 1);
                let row = (a1 << 3) | (b1 << 2) | (t << 1) | t;
                let col = (a1p << 3) | (b1p << 2) | (t << 1) | t;
                kept[(i, j)] += rho[(row, col)];
            }
        }
    }
    let p = kept.trace().re;
    if !(p > 0.0) {
        return Err(Error::ZeroProbability);
    }
    let fix = linalg::kron(&id, &y);
    let kept = &fix * kept * fix.adjoint() / r(p);
    let s = bell(Bell::PsiMinus);
    Ok(((s.adjoint() * kept * &s)[(0, 0)].re, p))
}

/// Local unitary U with (U ⊗ 𝟙)|ψ′⟩ = |ψ⟩ for maximally entangled states on C^d ⊗ C^d.
pub fn equivalize_max_entangled(psi: &CVector, psi_prime: &CVector, d: usize) -> Result<CMatrix> {
    let flat = |v: &CVector| -> Result<CMatrix> {
        let s = schmidt(v, d, d)?;
        let target = 1.0 / (d as f64).sqrt();
        let nrm = v.norm();
        if s.coefficients.iter().any(|&x| (x / nrm - target).abs() > 1e-8) {
            return Err(Error::NotMaximallyEntangled);
        }
        Ok(CMatrix::from_fn(d, d, |i, j| v[i * d + j] / nrm))
    };
    let m = flat(psi)?;
    let mp = flat(psi_prime)?;
    // M_ψ = U M_ψ′ and M_ψ′ M_ψ′† = 𝟙/d.
    let mut u = m * mp.adjoint() * r(d as f64);
    // fix the global phase on the largest entry
    let (mut best, mut phase) = (0.0, r(1.0));
    for z in u.iter() {
        if z.norm() > best + 1e-12 {
            best = z.norm();
            phase = z / z.norm();
        }
    }
    u /= phase;
    Ok(u)
}

/// ‖(U ⊗ 𝟙)ψ′ − e^{iχ}ψ‖ minimised over the global phase.
pub fn equivalence_residual(u: &CMatrix, psi: &CVector, psi_prime: &CVector, d: usize) -> f64 {
    let full = linalg::kron(u, &CMatrix::identity(d, d));
    let a = (full * psi_prime).normalize();
    let b = psi.normalize();
    let ov: C64 = b.dotc(&a);
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { r(1.0) };
    (a - b * ph).norm()
}

/// Expectations of the single-photon nonlocality test on (|0,1⟩ − |1,0⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingletTable {
    pub pa1: f64,
    pub pb1: f64,
    pub pa_pb: f64,
    pub pa_pb1: f64,
    pub pa1_pb: f64,
    pub pa1_pb1: f64,
    /// ⟨P_a′ + P_b′ − P_a′P_b′ − P_a′P_b − P_aP_b′ + P_aP_b⟩.
    pub combination: f64,
}

impl SingletTable {
    /// Whether the combination leaves the local-realistic range [0, 1].
    pub fn violates(&self) -> bool {
        self.combination < 0.0 || self.combination > 1.0
    }
}

pub fn singlet_projector_values() -> SingletTable {
    let h = 0.5f64.sqrt();
    // basis |n_a n_b⟩ in order 00, 01, 10, 11
    let psi = CVector::from_vec(vec![r(0.0), r(h), r(-h), r(0.0)]);
    let s3 = 3f64.sqrt() / 2.0;
    let proj = |v: [f64; 2]| {
        let v = CVector::from_vec(vec![r(v[0]), r(v[1])]);
        &v * v.adjoint()
    };
    let pa = proj([0.0, 1.0]);
    let pa1 = proj([s3, 0.5]);
    let pb1 = proj([-s3, 0.5]);
    let id = CMatrix::identity(2, 2);
    let ev = |a: &CMatrix, b: &CMatrix| (psi.adjoint() * linalg::kron(a, b) * &psi)[(0, 0)].re;
    let t = SingletTable {
        pa1: ev(&pa1, &id),
        pb1: ev(&id, &pb1),
        pa_pb: ev(&pa, &pa),
        pa_pb1: ev(&pa, &pb1),
        pa1_pb: ev(&pa1, &pa),
        pa1_pb1: ev(&pa1, &pb1),
        combination: 0.0,
    };
    SingletTable { combination: t.pa1 + t.pb1 - t.pa1_pb1 - t.pa1_pb - t.pa_pb1 + t.pa_pb, ..t }
}

/// One outcome of the Bell measurement in the swapping purification protocol.
#[derive(Clone, Debug)]
pub struct SwapOutcome {
    pub bell: Bell,
    pub probability: f64,
    /// Normalised state of systems 1 and 4.
    pub state: CVector,
    pub entanglement: f64,
}

/// Swap two copies of cosθ|x,x⟩ + sinθ|y,y⟩ by a Bell measurement on systems 2 and 3.
pub fn bose_swap(theta: f64) -> Result<Vec<SwapOutcome>> {
    let (s, co) = theta.sin_cos();
    let pair = CVector::from_vec(vec![r(co), r(0.0), r(0.0), r(s)]);
    let full = CVector::from_fn(16, |k, _| pair[k / 4] * pair[k % 4]);
    let mut out = Vec::with_capacity(4);
    for b in Bell::ALL {
        let bv = bell(b);
        let mut st = CVector::zeros(4);
        for q1 in 0..2 {
            for q4 in 0..2 {
                let mut a = C64::default();
                for q2 in 0..2 {
                    for q3 in 0..2 {
                        a += bv[q2 * 2 + q3].conj() * full[q1 * 8 + q2 * 4 + q3 * 2 + q4];
                    }
                }
                st[q1 * 2 + q4] = a;
            }
        }
        let p = st.norm_squared();
        let state = if p > 0.0 { st / r(p.sqrt()) } else { st };
        let e = if p > 0.0 { schmidt(&state, 2, 2)?.entropy() } else { 0.0 };
        out.push(SwapOutcome { bell: b, probability: p, state, entanglement: e });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schmidt_basics() {
        let prod = CVector::from_vec(vec![r(0.0), r(1.0), r(0.0), r(0.0)]);
        let s = schmidt(&prod, 2, 2).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14 && s.coefficients[1].abs() < 1e-14);
        let b = schmidt(&bell(Bell::PsiMinus), 2, 2).unwrap();
        let h = 0.5f64.sqrt();
        assert!(b.coefficients.iter().all(|x| (x - h).abs() < 1e-14));
        assert!((b.reconstruct() - bell(Bell::PsiMinus)).norm() < 1e-12);
        assert!((b.entropy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_rectangular() {
        let v = CVector::from_vec(vec![c(0.1, 0.2), r(0.3), c(-0.2, 0.1), r(0.4), c(0.0, -0.5), r(0.2)]);
        let v = v.normalize();
        let s = schmidt(&v, 2, 3).unwrap();
        assert!((s.reconstruct() - &v).norm() < 1e-12);
        let s = schmidt(&v, 3, 2).unwrap();
        assert!((s.reconstruct() - &v).norm() < 1e-12);
    }

    #[test]
    fn fock_split() {
        let psi = crate::gaussian::pdc_pair_state(2, 4).unwrap();
        let a: Vec<ModeLabel> = psi.register().modes()[..2].to_vec();
        let cs = schmidt_coefficients(&psi, &a).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|x| (x - t).abs() < 1e-12));
    }

    #[test]
    fn singlet_pt() {
        let s = bell(Bell::PsiMinus);
        let pt = partial_transpose(&(&s * s.adjoint()), 2, 2).unwrap();
        let ev = linalg::hermitian_eigenvalues(&pt);
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!(ev[1..].iter().all(|x| (x - 0.5).abs() < 1e-12));
        let v = is_ppt(&(&s * s.adjoint()), 2, 2, 1e-12).unwrap();
        assert!(!v.ppt);
        assert!(is_ppt(&(CMatrix::identity(4, 4) / r(4.0)), 2, 2, 1e-12).unwrap().ppt);
    }

    #[test]
    fn werner_threshold() {
        for k in 0..=20 {
            let e = k as f64 / 20.0;
            let v = is_ppt(&werner(e).unwrap(), 2, 2, 1e-12).unwrap();
            assert!((v.min_eigenvalue - (1.0 - 3.0 * e) / 4.0).abs() < 1e-12);
            assert_eq!(v.ppt, e <= 1.0 / 3.0 + 1e-12, "ε = {e}");
        }
        assert!(werner(1.1).is_err());
    }

    #[test]
    fn purification_formulas() {
        assert_eq!(purification_step(1.0).unwrap(), (1.0, 1.0));
        assert_eq!(purification_step(0.0).unwrap(), (0.25, 0.25));
        let (f, fp) = purification_step(1.0 / 3.0).unwrap();
        assert!((f - 0.5).abs() < 1e-15 && (fp - 5.0 / 12.0).abs() < 1e-15);
        for k in 0..=10 {
            let e = k as f64 / 10.0;
            let (_, sim) = purification_simulate(e).map(|(f, p)| (p, f)).unwrap();
            let (_, corr) = purification_step_corrected(e).unwrap();
            assert!((sim - corr).abs() < 1e-12, "ε = {e}: {sim} vs {corr}");
        }
    }

    #[test]
    fn equivalence() {
        let u = equivalize_max_entangled(&bell(Bell::PsiMinus), &bell(Bell::PhiPlus), 2).unwrap();
        assert!(linalg::unitarity_defect(&u) < 1e-12);
        assert!(equivalence_residual(&u, &bell(Bell::PsiMinus), &bell(Bell::PhiPlus), 2) < 1e-12);
        let id = equivalize_max_entangled(&bell(Bell::PhiPlus), &bell(Bell::PhiPlus), 2).unwrap();
        assert!((id - CMatrix::identity(2, 2)).norm() < 1e-12);
        let prod = CVector::from_vec(vec![r(1.0), r(0.0), r(0.0), r(0.0)]);
        assert!(matches!(equivalize_max_entangled(&prod, &bell(Bell::PhiPlus), 2), Err(Error::NotMaximallyEntangled)));
    }

    #[test]
    fn singlet_table() {
        let t = singlet_projector_values();
        for (got, want) in [(t.pa1, 0.5), (t.pb1, 0.5), (t.pa_pb, 0.0), (t.pa_pb1, 0.375), (t.pa1_pb, 0.375), (t.pa1_pb1, 0.375)]
        {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((t.combination + 0.125).abs() < 1e-15);
        assert!(t.violates());
    }

    #[test]
    fn bose_protocol() {
        let th = 0.4;
        let (s, co) = f64::sin_cos(th);
        let out = bose_swap(th).unwrap();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let n = (co.powi(4) + s.powi(4)).sqrt();
        for o in &out {
            match o.bell {
                Bell::PhiPlus | Bell::PhiMinus => {
                    assert!((o.probability - n * n / 2.0).abs() < 1e-14);
                    let sign = if o.bell == Bell::PhiPlus { 1.0 } else { -1.0 };
                    let want = CVector::from_vec(vec![r(co * co / n), r(0.0), r(0.0), r(sign * s * s / n)]);
                    assert!((o.state.clone() - want).norm() < 1e-12);
                }
                _ => {
                    assert!((o.probability - co * co * s * s).abs() < 1e-14);
                    assert!((o.entanglement - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
