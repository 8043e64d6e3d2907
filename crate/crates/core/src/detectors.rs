//! Photodetector POVMs, cascades and conditional states.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{photons, DensityOperator, ModeLabel, Occupation, OccupationState, Register};
use crate::gaussian::cascade_unitary;
use crate::linalg::{self, r, C64};
use crate::mdhp::transition_amplitude;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorKind {
    /// Distinguishes zero from one-or-more photons.
    Sensitivity,
    /// Reports the number of detected photons.
    Resolution,
}

/// Dark-count background: effective temperature and a tabulated spectrum
/// f(ν) given as (ν, weight) pairs. ν and T share units with ħ = k_B = 1.
#[derive(Clone, Debug)]
pub struct ThermalNoise {
    pub t_eff: f64,
    pub spectrum: Vec<(f64, f64)>,
}

impl ThermalNoise {
    pub fn new(t_eff: f64, spectrum: Vec<(f64, f64)>) -> Result<Self> {
        if !(t_eff >= 0.0) {
            return Err(Error::Domain(format!("T_eff = {t_eff} is negative")));
        }
        let total: f64 = spectrum.iter().map(|p| p.1).sum();
        if spectrum.iter().any(|p| p.0 <= 0.0 || p.1 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("spectrum must be a normalised distribution over ν > 0".into()));
        }
        Ok(Self { t_eff, spectrum })
    }

    pub fn monochromatic(t_eff: f64, nu: f64) -> Result<Self> {
        Self::new(t_eff, vec![(nu, 1.0)])
    }
}

#[derive(Clone, Debug)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub eta2: f64,
    pub dark: Option<ThermalNoise>,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, eta2: f64) -> Result<Self> {
        check_eta2(eta2)?;
        Ok(Self { kind, eta2, dark: None })
    }
}

fn check_eta2(eta2: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta2) {
        Ok(())
    } else {
        Err(Error::Domain(format!("η² = {eta2} outside [0, 1]")))
    }
}

/// Diagonal weight as a function of the occupations of the detected modes.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// (1−η²)^n for n photons in total.
    NoClick {
        eta2: f64,
    },
    /// 1 − (1−η²)^n.
    Click {
        eta2: f64,
    },
    /// Exactly `k` of the n photons registered: C(n,k) η^{2k} (1−η²)^{n−k}.
    Count {
        eta2: f64,
        k: u32,
    },
    /// Exactly `k` of the listed modes fire, each an independent
    /// sensitivity detector of efficiency η².
    Clicks {
        eta2: f64,
        k: u32,
    },
    /// Ideal projector on one occupation pattern.
    Projector(Occupation),
    /// Arbitrary diagonal weights; absent patterns weigh zero.
    Table(BTreeMap<Occupation, f64>),
    Identity,
}

/// One outcome of a detector acting on a set of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    pub modes: Vec<ModeLabel>,
    pub weight: Weight,
    pub label: String,
}

impl PovmElement {
    pub fn new(modes: Vec<ModeLabel>, weight: Weight, label: impl Into<String>) -> Self {
        Self { modes, weight, label: label.into() }
    }

    pub fn weight_of(&self, occ: &[u8]) -> f64 {
        let n = photons(occ);
        match &self.weight {
            Weight::NoClick { eta2 } => (1.0 - eta2).powi(n as i32),
            Weight::Click { eta2 } => 1.0 - (1.0 - eta2).powi(n as i32),
            Weight::Count { eta2, k } => {
                if *k > n {
                    0.0
                } else {
                    linalg::binomial(n as u64, *k as u64) * eta2.powi(*k as i32) * (1.0 - eta2).powi((n - k) as i32)
                }
            }
            Weight::Clicks { eta2, k } => exactly_k_clicks(occ, *eta2, *k as usize),
            Weight::Projector(p) => f64::from(p.as_slice() == occ),
            Weight::Table(t) => t.get(occ).copied().unwrap_or(0.0),
            Weight::Identity => 1.0,
        }
    }
}

fn exactly_k_clicks(occ: &[u8], eta2: f64, k: usize) -> f64 {
    if k > occ.len() {
        return 0.0;
    }
    // dp[j]: probability that j of the modes seen so far fired
    let mut dp = vec![0.0; k + 1];
    dp[0] = 1.0;
    for &n in occ {
        let miss = (1.0 - eta2).powi(n as i32);
        for j in (0..=k).rev() {
            dp[j] = dp[j] * miss + if j > 0 { dp[j - 1] * (1.0 - miss) } else { 0.0 };
        }
    }
    dp[k]
}

/// No photon registered in `modes`.
pub fn povm_no_click(model: &DetectorModel, modes: &[ModeLabel]) -> PovmElement {
    PovmElement::new(modes.to_vec(), Weight::NoClick { eta2: model.eta2 }, "no-click")
}

/// At least one photon registered in `modes`.
pub fn povm_click(model: &DetectorModel, modes: &[ModeLabel]) -> PovmElement {
    PovmElement::new(modes.to_vec(), Weight::Click { eta2: model.eta2 }, "click")
}

/// Resolution detector reporting exactly `k` photons.
pub fn povm_count(model: &DetectorModel, modes: &[ModeLabel], k: u32) -> PovmElement {
    PovmElement::new(modes.to_vec(), Weight::Count { eta2: model.eta2, k }, format!("count-{k}"))
}

/// Max deviation of Σ elements from the identity over every pattern with ≤ `max_photons`.
pub fn completeness_defect(family: &[PovmElement], max_photons: u32) -> Result<f64> {
    let first = family.first().ok_or(Error::Dimension("empty POVM family".into()))?;
    if family.iter().any(|e| e.modes != first.modes) {
        return Err(Error::Dimension("POVM family acts on differing modes".into()));
    }
    let mut worst: f64 = 0.0;
    for occ in crate::fock::enumerate_occupations(first.modes.len(), max_photons) {
        let s: f64 = family.iter().map(|e| e.weight_of(&occ)).sum();
        worst = worst.max((s - 1.0).abs());
    }
    Ok(worst)
}

fn detected_layout(register: &Register, outcome: &[PovmElement]) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    let mut groups = Vec::with_capacity(outcome.len());
    let mut seen = vec![false; register.len()];
    for e in outcome {
        let idx = register.indices_of(&e.modes)?;
        for &i in &idx {
            if seen[i] {
                return Err(Error::DuplicateMode(register.modes()[i].to_string()));
            }
            seen[i] = true;
        }
        groups.push(idx);
    }
    let keep = (0..register.len()).filter(|&i| !seen[i]).collect::<Vec<_>>();
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    Ok((groups, keep))
}

fn joint_weight(outcome: &[PovmElement], groups: &[Vec<usize>], occ: &[u8]) -> f64 {
    let mut w = 1.0;
    for (e, g) in outcome.iter().zip(groups) {
        let sub: Vec<u8> = g.iter().map(|&i| occ[i]).collect();
        w *= e.weight_of(&sub);
        if w == 0.0 {
            break;
        }
    }
    w
}

/// Tr_detected[E ρ] without normalisation (its trace is the outcome probability).
pub fn apply_povm(rho: &DensityOperator, outcome: &[PovmElement]) -> Result<DensityOperator> {
    let (groups, keep) = detected_layout(rho.register(), outcome)?;
    let detected: Vec<usize> = groups.iter().flatten().copied().collect();
    let reg = Register::new(keep.iter().map(|&i| rho.register().modes()[i]).collect())?;
    let mut out = DensityOperator::zero(reg, rho.cutoff());
    for ((k, l), v) in rho.iter() {
        if detected.iter().any(|&i| k[i] != l[i]) {
            continue;
        }
        let w = joint_weight(outcome, &groups, k);
        if w == 0.0 {
            continue;
        }
        out.add_entry(keep.iter().map(|&i| k[i]).collect(), keep.iter().map(|&i| l[i]).collect(), v * w);
    }
    out.finish();
    Ok(out)
}

/// Tr_detected[E |ψ⟩⟨ψ|] without forming the full outer product.
pub fn apply_povm_pure(psi: &OccupationState, outcome: &[PovmElement]) -> Result<DensityOperator> {
    let (groups, keep) = detected_layout(psi.register(), outcome)?;
    let detected: Vec<usize> = groups.iter().flatten().copied().collect();
    let reg = Register::new(keep.iter().map(|&i| psi.register().modes()[i]).collect())?;
    let mut branches: BTreeMap<Occupation, (f64, Vec<(Occupation, C64)>)> = BTreeMap::new();
    for (k, a) in psi.iter() {
        let d: Occupation = detected.iter().map(|&i| k[i]).collect();
        let entry = branches.entry(d).or_insert_with(|| (joint_weight(outcome, &groups, k), Vec::new()));
        if entry.0 != 0.0 {
            entry.1.push((keep.iter().map(|&i| k[i]).collect(), *a));
        }
    }
    let mut out = DensityOperator::zero(reg, psi.cutoff());
    for (w, terms) in branches.values() {
        if *w == 0.0 {
            continue;
        }
        for (k, a) in terms {
            for (l, b) in terms {
                out.add_entry(k.clone(), l.clone(), a * b.conj() * *w);
            }
        }
    }
    out.finish();
    Ok(out)
}

/// ρ_out = Tr_detected[E ρ]/Tr[E ρ] and the outcome probability.
pub fn condition_state(rho: &DensityOperator, outcome: &[PovmElement]) -> Result<(DensityOperator, f64)> {
    let raw = apply_povm(rho, outcome)?;
    normalise_outcome(raw, rho.trace().re)
}

/// As [`condition_state`] for a pure input.
pub fn condition_pure(psi: &OccupationState, outcome: &[PovmElement]) -> Result<(DensityOperator, f64)> {
    let raw = apply_povm_pure(psi, outcome)?;
    normalise_outcome(raw, psi.norm_sqr())
}

fn normalise_outcome(raw: DensityOperator, input_trace: f64) -> Result<(DensityOperator, f64)> {
    let p = raw.trace().re;
    if !(p > 1e-300) || !(input_trace > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok((raw.scaled(1.0 / p), p / input_trace))
}

/// A cascade: an N-port feeding N detectors, each preceded by a loss beam splitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeConfig {
    pub n: usize,
    pub eta2: f64,
    pub polarization_sensitive: bool,
}

impl CascadeConfig {
    pub fn new(n: usize, eta2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("cascade needs N ≥ 1".into()));
        }
        check_eta2(eta2)?;
        Ok(Self { n, eta2, polarization_sensitive: false })
    }
}

/// p_N(k|m) from Hermite polynomials at zero: the probability that exactly k of the
/// N detectors fire when m photons enter one port.
pub fn cascade_probability(cfg: &CascadeConfig, k: u32, m: u32) -> Result<f64> {
    let n = cfg.n;
    let u = cascade_unitary(n, cfg.eta2.sqrt())?;
    let mut input = vec![0u32; 2 * n];
    input[0] = m;
    let mut p = 0.0;
    for out in crate::fock::occupations_with_total(2 * n, m) {
        if out[..n].iter().filter(|&&x| x > 0).count() as u32 != k {
            continue;
        }
        let o: Vec<u32> = out.iter().map(|&x| x as u32).collect();
        p += transition_amplitude(&u, &input, &o)?.norm_sqr();
    }
    Ok(p)
}

/// The same probability by propagating the Fock state through the cascade.
pub fn cascade_probability_fock(cfg: &CascadeConfig, k: u32, m: u32) -> Result<f64> {
    let n = cfg.n;
    let u = cascade_unitary(n, cfg.eta2.sqrt())?;
    let mut occ = vec![0u8; 2 * n];
    occ[0] = u8::try_from(m).map_err(|_| Error::Domain("photon number too large".into()))?;
    let out = OccupationState::basis(Register::scalar(2 * n), m, &occ)?.apply_passive_unitary(&u)?;
    Ok(out.iter().filter(|(o, _)| o[..n].iter().filter(|&&x| x > 0).count() as u32 == k).map(|(_, a)| a.norm_sqr()).sum())
}

/// Closed forms for m ≤ 2; `None` when no closed form is tabulated.
pub fn cascade_closed_form(cfg: &CascadeConfig, k: u32, m: u32) -> Option<f64> {
    let e = cfg.eta2;
    let nf = cfg.n as f64;
    let v = match (k, m) {
        (0, 0) => 1.0,
        (_, 0) => 0.0,
        (0, 1) => 1.0 - e,
        (1, 1) => e,
        (_, 1) => 0.0,
        (0, 2) => (1.0 - e).powi(2),
        (1, 2) => e * e / nf + 2.0 * e * (1.0 - e),
        (2, 2) => (nf - 1.0) * e * e / nf,
        (_, 2) => 0.0,
        _ => return None,
    };
    Some(v)
}

/// p_N(k|k) = η^{2k} N!/(N^k (N−k)!), zero when k > N.
pub fn cascade_kk_closed_form(cfg: &CascadeConfig, k: u32) -> f64 {
    let n = cfg.n as u32;
    if k > n {
        return 0.0;
    }
    let mut v = cfg.eta2.powi(k as i32);
    for j in 0..k {
        v *= (n - j) as f64 / n as f64;
    }
    v
}

/// Dark-count state Σ_n ∫f(ν)(1−e^{−ν/T}) e^{−nν/T} |n⟩⟨n| on one mode, renormalised
/// on the truncated space.
pub fn thermal_state(noise: &ThermalNoise, cutoff: u32) -> Result<DensityOperator> {
    let reg = Register::scalar(1);
    let mut weights = vec![0.0; cutoff as usize + 1];
    if noise.t_eff == 0.0 {
        weights[0] = 1.0;
    } else {
        for &(nu, f) in &noise.spectrum {
            let x = nu / noise.t_eff;
            for (n, w) in weights.iter_mut().enumerate() {
                *w += f * (1.0 - (-x).exp()) * (-(n as f64) * x).exp();
            }
        }
    }
    let total: f64 = weights.iter().sum();
    DensityOperator::from_entries(
        reg,
        cutoff,
        weights.iter().enumerate().map(|(n, w)| ((vec![n as u8], vec![n as u8]), r(w / total))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Polarization;
    use crate::gaussian::{expand_squeezed_vacuum, GaussianSource};
    use crate::linalg::CMatrix;

    fn m(i: u16) -> ModeLabel {
        ModeLabel::new(i, Polarization::None)
    }

    #[test]
    fn exactly_k_clicks_by_enumeration() {
        let eta2: f64 = 0.37;
        let occ = [2u8, 0, 1, 3];
        let miss: Vec<f64> = occ.iter().map(|&n| (1.0 - eta2).powi(n as i32)).collect();
        let mut want = [0.0; 5];
        for mask in 0u32..16 {
            let p: f64 = (0..4).map(|i| if mask >> i & 1 == 1 { 1.0 - miss[i] } else { miss[i] }).product();
            want[mask.count_ones() as usize] += p;
        }
        let modes: Vec<ModeLabel> = (0..4).map(m).collect();
        let mut total = 0.0;
        for k in 0..=4u32 {
            let e = PovmElement::new(modes.clone(), Weight::Clicks { eta2, k }, "k");
            let w = e.weight_of(&occ);
            assert!((w - want[k as usize]).abs() < 1e-15, "k = {k}");
            total += w;
        }
        assert!((total - 1.0).abs() < 1e-14);
        // the empty mode can never fire, so four clicks are impossible
        assert_eq!(PovmElement::new(modes, Weight::Clicks { eta2, k: 4 }, "k").weight_of(&occ), 0.0);
    }

    #[test]
    fn weights() {
        let d = DetectorModel::new(DetectorKind::Sensitivity, 0.1).unwrap();
        let nc = povm_no_click(&d, &[m(0)]);
        assert_eq!(nc.weight_of(&[0]), 1.0);
        assert!((nc.weight_of(&[1]) - 0.9).abs() < 1e-15);
        let d = DetectorModel::new(DetectorKind::Sensitivity, 0.88).unwrap();
        assert!((povm_no_click(&d, &[m(0)]).weight_of(&[2]) - 0.0144).abs() < 1e-15);
        let c = povm_click(&d, &[m(0), m(1)]);
        assert_eq!(c.weight_of(&[0, 0]), 0.0);
        assert!((c.weight_of(&[1, 2]) - (1.0 - 0.12f64.powi(3))).abs() < 1e-15);
        let ideal = DetectorModel::new(DetectorKind::Sensitivity, 1.0).unwrap();
        assert_eq!(povm_click(&ideal, &[m(0)]).weight_of(&[3]), 1.0);
        assert!(DetectorModel::new(DetectorKind::Resolution, 1.5).is_err());
    }

    #[test]
    fn completeness() {
        let d = DetectorModel::new(DetectorKind::Resolution, 0.7).unwrap();
        let modes = [m(0), m(1)];
        let fam = vec![povm_no_click(&d, &modes), povm_click(&d, &modes)];
        assert!(completeness_defect(&fam, 6).unwrap() < 1e-12);
        let counts: Vec<_> = (0..=6).map(|k| povm_count(&d, &modes, k)).collect();
        assert!(completeness_defect(&counts, 6).unwrap() < 1e-12);
    }

    #[test]
    fn identity_outcome_is_trivial() {
        let psi = OccupationState::from_terms(Register::scalar(2), 2, [(vec![1, 0], r(0.6)), (vec![0, 1], r(0.8))]).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        let (out, p) = condition_state(&rho, &[PovmElement::new(vec![m(1)], Weight::Identity, "id")]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!((out.entry(&[1], &[1]).re - 0.36).abs() < 1e-15);
        assert!((out.entry(&[0], &[0]).re - 0.64).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_is_an_error() {
        let psi = OccupationState::vacuum(Register::scalar(2), 2);
        let d = DetectorModel::new(DetectorKind::Sensitivity, 1.0).unwrap();
        assert!(matches!(condition_pure(&psi, &[povm_click(&d, &[m(0)])]), Err(Error::ZeroProbability)));
    }

    #[test]
    fn overlapping_elements_rejected() {
        let psi = OccupationState::vacuum(Register::scalar(3), 2);
        let d = DetectorModel::new(DetectorKind::Sensitivity, 1.0).unwrap();
        let out = condition_pure(&psi, &[povm_no_click(&d, &[m(0)]), povm_no_click(&d, &[m(0), m(1)])]);
        assert!(matches!(out, Err(Error::DuplicateMode(_))));
    }

    #[test]
    fn pure_and_mixed_paths_agree() {
        let psi = OccupationState::from_terms(
            Register::scalar(3),
            3,
            [(vec![1, 0, 1], r(0.5)), (vec![2, 1, 0], c64(0.1, 0.4)), (vec![0, 1, 1], r(-0.3)), (vec![1, 1, 1], r(0.2))],
        )
        .unwrap();
        let d = DetectorModel::new(DetectorKind::Sensitivity, 0.6).unwrap();
        let out = [povm_click(&d, &[m(0)]), povm_no_click(&d, &[m(2)])];
        let (a, pa) = condition_pure(&psi, &out).unwrap();
        let (b, pb) = condition_state(&DensityOperator::from_pure(&psi), &out).unwrap();
        assert!((pa - pb).abs() < 1e-14);
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    fn c64(a: f64, b: f64) -> C64 {
        C64::new(a, b)
    }

    #[test]
    fn heralded_single_photon() {
        let xi = 0.05;
        let mut b = CMatrix::zeros(2, 2);
        b[(0, 1)] = r(-xi);
        b[(1, 0)] = r(-xi);
        let psi = expand_squeezed_vacuum(&GaussianSource::new(b, 3).unwrap(), &Register::scalar(2), 6).unwrap();
        let proj = PovmElement::new(vec![m(0)], Weight::Projector(vec![1]), "one");
        let (out, _) = condition_pure(&psi, &[proj]).unwrap();
        assert!((out.entry(&[1], &[1]).re - 1.0).abs() < 1e-14);
        let d = DetectorModel::new(DetectorKind::Sensitivity, 1.0).unwrap();
        let (out, _) = condition_pure(&psi, &[povm_click(&d, &[m(0)])]).unwrap();
        let p1 = out.entry(&[1], &[1]).re;
        assert!((1.0 - p1) > 0.5 * xi * xi && (1.0 - p1) < 2.0 * xi * xi);
    }

    #[test]
    fn resolution_detector_benchmark() {
        // (|0⟩|φ0⟩ + a†|0⟩|φ1⟩ + a†²/√2|0⟩|φ2⟩)/√3 with mode 1 holding the label φ_k as k photons
        let s3 = 1.0 / 3f64.sqrt();
        let psi =
            OccupationState::from_terms(Register::scalar(2), 4, [(vec![0, 0], r(s3)), (vec![1, 1], r(s3)), (vec![2, 2], r(s3))])
                .unwrap();
        let e = 0.88;
        let d = DetectorModel::new(DetectorKind::Resolution, e).unwrap();
        let (out, _) = condition_pure(&psi, &[povm_count(&d, &[m(0)], 1)]).unwrap();
        let w1 = out.entry(&[1], &[1]).re;
        let w2 = out.entry(&[2], &[2]).re;
        assert!((w1 - 1.0 / (3.0 - 2.0 * e)).abs() < 1e-14);
        assert!((w2 - 2.0 * (1.0 - e) / (3.0 - 2.0 * e)).abs() < 1e-14);
    }

    #[test]
    fn cascade_tables_agree() {
        for n in 1..=4 {
            for &e in &[1.0, 0.5, 0.1] {
                let cfg = CascadeConfig::new(n, e).unwrap();
                for mm in 0..=3 {
                    let mut total = 0.0;
                    for k in 0..=mm {
                        let a = cascade_probability(&cfg, k, mm).unwrap();
                        let b = cascade_probability_fock(&cfg, k, mm).unwrap();
                        assert!((a - b).abs() < 1e-12, "N={n} η²={e} k={k} m={mm}");
                        if let Some(cf) = cascade_closed_form(&cfg, k, mm) {
                            assert!((a - cf).abs() < 1e-12);
                        }
                        if k == mm {
                            assert!((a - cascade_kk_closed_form(&cfg, k)).abs() < 1e-12);
                        }
                        total += a;
                    }
                    assert!((total - 1.0).abs() < 1e-12);
                    assert_eq!(cascade_probability(&cfg, mm + 1, mm).unwrap(), 0.0);
                }
            }
        }
        let cfg = CascadeConfig::new(4, 1.0).unwrap();
        assert!((cascade_kk_closed_form(&cfg, 2) - 0.75).abs() < 1e-15);
        assert_eq!(cascade_kk_closed_form(&cfg, 5), 0.0);
    }

    #[test]
    fn thermal() {
        let zero = thermal_state(&ThermalNoise::monochromatic(0.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(zero.entry(&[0], &[0]), r(1.0));
        let th = thermal_state(&ThermalNoise::monochromatic(1.0, 1.0).unwrap(), 30).unwrap();
        assert!((th.trace().re - 1.0).abs() < 1e-14);
        let ratio = th.entry(&[3], &[3]).re / th.entry(&[2], &[2]).re;
        assert!((ratio - (-1f64).exp()).abs() < 1e-14);
        assert!(ThermalNoise::new(-1.0, vec![(1.0, 1.0)]).is_err());
    }
}
