//! Randomised invariants across the library.

use condprep::detectors::{cascade_probability, CascadeConfig};
use condprep::entanglement::{is_ppt, partial_transpose, schmidt};
use condprep::fock::{photons, DensityOperator, ModeLabel, OccupationState, Register};
use condprep::linalg::{kron, max_abs, CMatrix, CVector, C64};
use condprep::lithography::{self as litho, LithoState1D, LithoTerm};
use condprep::mdhp::{self, DefiningMatrix};
use condprep::metrology::{self, Distribution};
use condprep::optimizer::{de_minimize, normalize_genes, DeConfig};
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn cvec(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(cplx(), n).prop_map(CVector::from_vec).prop_filter("non-zero", |v| v.norm() > 1e-3)
}

fn cmat(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(cplx(), n * n).prop_map(move |v| CMatrix::from_vec(n, n, v))
}

fn unitary(n: usize) -> impl Strategy<Value = CMatrix> {
    cmat(n).prop_filter("invertible", |m| m.determinant().norm() > 1e-3).prop_map(|m| m.qr().q())
}

fn density(n: usize) -> impl Strategy<Value = CMatrix> {
    cmat(n).prop_map(|g| {
        let r = &g * g.adjoint();
        let t = r.trace();
        r / t
    })
}

const MODES: usize = 3;
const CUTOFF: u32 = 4;

fn register() -> Register {
    Register::scalar(MODES)
}

/// Random state on three modes with at most CUTOFF − 1 photons (headroom of one).
fn fock_state() -> impl Strategy<Value = OccupationState> {
    prop::collection::vec((prop::collection::vec(0u8..=2, MODES), cplx()), 1..6).prop_map(|terms| {
        let terms = terms.into_iter().filter(|(o, _)| photons(o) < CUTOFF);
        OccupationState::from_terms(register(), CUTOFF, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_commutators(psi in fock_state(), i in 0..MODES, j in 0..MODES) {
        let (mi, mj) = (register().modes()[i], register().modes()[j]);
        let left = psi.apply_creation(mj).unwrap().apply_annihilation(mi).unwrap();
        let right = psi.apply_annihilation(mi).unwrap().apply_creation(mj).unwrap();
        let comm = left.add(&right.scaled(C64::new(-1.0, 0.0))).unwrap();
        let want = if i == j { psi.clone() } else { OccupationState::zero(register(), CUTOFF) };
        prop_assert!(comm.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn inner_product_is_hermitian(a in fock_state(), b in fock_state()) {
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
    }

    #[test]
    fn passive_unitaries_conserve_photons(psi in fock_state(), u in unitary(MODES)) {
        let out = psi.apply_passive_unitary(&u).unwrap();
        prop_assert!((out.norm_sqr() - psi.norm_sqr()).abs() < 1e-10 * psi.norm_sqr().max(1.0));
        let sectors = |s: &OccupationState| {
            let mut w = [0.0f64; CUTOFF as usize + 1];
            for (o, a) in s.iter() {
                w[photons(o) as usize] += a.norm_sqr();
            }
            w
        };
        for (x, y) in sectors(&psi).iter().zip(sectors(&out).iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_keeps_trace(psi in fock_state(), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3)) {
        prop_assume!(psi.norm_sqr() > 1e-6);
        let rho = DensityOperator::from_pure(&psi.normalized().unwrap());
        let modes: Vec<ModeLabel> = keep.iter().map(|&k| register().modes()[k]).collect();
        let red = rho.partial_trace(&modes).unwrap();
        prop_assert!((red.trace() - rho.trace()).norm() < 1e-12);
        prop_assert!(red.is_hermitian(1e-12));
        if keep.len() == MODES {
            prop_assert!(red.max_abs_diff(&rho) < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_involution(rho in density(6)) {
        let pt = partial_transpose(&rho, 2, 3).unwrap();
        let back = partial_transpose(&pt, 2, 3).unwrap();
        prop_assert!(max_abs(&(back - &rho)) < 1e-14);
        prop_assert!((pt.trace() - rho.trace()).norm() < 1e-12);
        prop_assert!(max_abs(&(&pt - pt.adjoint())) < 1e-12);
    }

    #[test]
    fn separable_mixtures_are_ppt(
        parts in prop::collection::vec((cvec(2), cvec(3), 0.01..1.0f64), 1..5)
    ) {
        let mut rho = CMatrix::zeros(6, 6);
        let mut total = 0.0;
        for (a, b, w) in &parts {
            let (na, nb) = (a.norm(), b.norm());
            let psi = CVector::from_fn(6, |k, _| a[k / 3] * b[k % 3] / (na * nb));
            rho += (&psi * psi.adjoint()) * C64::new(*w, 0.0);
            total += w;
        }
        rho /= C64::new(total, 0.0);
        prop_assert!(is_ppt(&rho, 2, 3, 1e-10).unwrap().ppt);
    }

    #[test]
    fn schmidt_invariant_under_local_unitaries(psi in cvec(9), u in unitary(3), v in unitary(3)) {
        let psi = &psi / C64::new(psi.norm(), 0.0);
        let rotated = kron(&u, &v) * &psi;
        let a = schmidt(&psi, 3, 3).unwrap().coefficients;
        let b = schmidt(&rotated, 3, 3).unwrap().coefficients;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn entanglement_is_symmetric(psi in cvec(6)) {
        let psi = &psi / C64::new(psi.norm(), 0.0);
        // reorder |i⟩|j⟩ (2×3) into |j⟩|i⟩ (3×2)
        let swapped = CVector::from_fn(6, |k, _| psi[(k % 2) * 3 + k / 2]);
        let e1 = metrology::entanglement_measure_dense(&psi, 2, 3).unwrap();
        let e2 = metrology::entanglement_measure_dense(&swapped, 3, 2).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-12);
    }

    #[test]
    fn measurement_entropy_bounds_von_neumann(rho in density(3), u in unitary(3)) {
        let basis = u.adjoint() * &rho * &u;
        let diag: Vec<f64> = (0..3).map(|k| basis[(k, k)].re.max(0.0)).collect();
        prop_assert!(metrology::shannon_entropy(&diag) >= metrology::von_neumann_entropy(&rho) - 1e-10);
    }

    #[test]
    fn statistical_distance_triangle(
        raw in prop::collection::vec(prop::collection::vec(0.01..1.0f64, 5), 3)
    ) {
        let d: Vec<Distribution> = raw
            .into_iter()
            .map(|v| {
                let s: f64 = v.iter().sum();
                Distribution::new(v.iter().map(|x| x / s).collect()).unwrap()
            })
            .collect();
        let s = |a: &Distribution, b: &Distribution| metrology::statistical_distance(a, b).unwrap();
        prop_assert!(s(&d[0], &d[2]) <= s(&d[0], &d[1]) + s(&d[1], &d[2]) + 1e-12);
    }

    #[test]
    fn cascade_statistics(n in 1usize..=4, eta2 in 0.0..=1.0f64, m in 0u32..=3) {
        let cfg = CascadeConfig::new(n, eta2).unwrap();
        let probs: Vec<f64> = (0..=m + 1).map(|k| cascade_probability(&cfg, k, m).unwrap()).collect();
        prop_assert!(probs[m as usize + 1].abs() < 1e-15);
        prop_assert!(probs.iter().all(|p| *p >= -1e-12 && *p <= 1.0 + 1e-12));
        if eta2 == 1.0 {
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hermite_odd_degree_vanishes_at_zero(b in cmat(3), n in prop::collection::vec(0u32..=3, 3)) {
        let sym = (&b + b.transpose()) * C64::new(0.5, 0.0);
        let dm = DefiningMatrix::new(sym).unwrap();
        let h = mdhp::evaluate_at_zero(&dm, &n).unwrap();
        if n.iter().sum::<u32>() % 2 == 1 {
            prop_assert_eq!(h, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn deposition_nonnegative_and_phase_invariant(
        amps in prop::collection::vec(cplx(), 1..5),
        phase in 0.0..std::f64::consts::TAU,
        phi in 0.0..std::f64::consts::TAU,
    ) {
        let terms: Vec<LithoTerm> = amps
            .iter()
            .enumerate()
            .map(|(k, a)| LithoTerm { m: k as u32, theta: 0.3 * k as f64, alpha: *a })
            .collect();
        let norm = terms.iter().map(|t| t.alpha.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let unit: Vec<LithoTerm> = terms.iter().map(|t| LithoTerm { alpha: t.alpha / norm, ..*t }).collect();
        let s = LithoState1D::new(8, unit.clone()).unwrap();
        let rot = C64::from_polar(1.0, phase);
        let r = LithoState1D::new(8, unit.iter().map(|t| LithoTerm { alpha: t.alpha * rot, ..*t }).collect()).unwrap();
        let d = litho::deposition_superposition(&s, phi);
        prop_assert!(d >= 0.0);
        prop_assert!((d - litho::deposition_superposition(&r, phi)).abs() < 1e-12);
        prop_assert!((d - litho::deposition_superposition_pairwise(&s, phi)).abs() < 1e-10);
    }

    #[test]
    fn pseudo_fourier_nonnegative(
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6),
        t in 0.0..2.0f64,
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = coeffs.into_iter().unzip();
        let phis = litho::grid(128);
        let p = litho::pseudo_fourier_pattern(&a, &b, t, &phis).unwrap();
        prop_assert!(p.samples.iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn gene_normalisation_is_idempotent(x in prop::collection::vec(-5.0..5.0f64, 2..8)) {
        let k = x.len() - 1;
        prop_assume!(x[..k].iter().any(|v| v.abs() > 1e-3));
        let once = normalize_genes(&x, 0..k).unwrap();
        let twice = normalize_genes(&once, 0..k).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        prop_assert_eq!(once[k], x[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn differential_evolution_is_deterministic(seed in any::<u64>(), n in 2usize..5) {
        let mut cfg = DeConfig::new(n, seed);
        cfg.gen_max = 30;
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64 * 0.1).powi(2)).sum::<f64>();
        let a = de_minimize(&cfg, f).unwrap();
        let b = de_minimize(&cfg, f).unwrap();
        prop_assert_eq!(&a, &b);
        let floor = a.population.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
        prop_assert!(a.best_cost <= floor);
        prop_assert_eq!(a.population.len(), cfg.np);
        prop_assert!(a.population.iter().all(|p| p.x.len() == n));
    }
}
