//! End-to-end conditional-preparation experiments: Innsbruck-type
//! teleportation with realistic detectors, entanglement swapping, GHZ
//! post-selection, the KLM nonlinear-sign gate and qudit teleportation.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use crate::detectors::{apply_povm_pure, PovmElement, Weight};
use crate::entanglement::bell;
use crate::entanglement::Bell;
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeLabel, OccupationState, Register};
use crate::gaussian::{apply_pair_creator, beam_splitter, pdc_pair_state, phase_shift, rotation, symmetric_nport};
use crate::linalg::{self, c, r, CMatrix, CVector, C64};
use crate::metrology::entanglement_measure;

// Mode layout shared by the teleportation and swapping set-ups.
const AX: ModeLabel = ModeLabel::x(0);
const AY: ModeLabel = ModeLabel::y(0);
const BX: ModeLabel = ModeLabel::x(1);
const BY: ModeLabel = ModeLabel::y(1);
const CX: ModeLabel = ModeLabel::x(2);
const CY: ModeLabel = ModeLabel::y(2);
const DX: ModeLabel = ModeLabel::x(3);
const DY: ModeLabel = ModeLabel::y(3);
const CASCADE_BASE: u16 = 16;

/// How the a_y output of the polarisation analyser is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AyDetection {
    /// A detector on a_y (same efficiency as the cascade) must stay silent.
    NoClick,
    /// a_y is traced out.
    Undetected,
}

/// Vacuum weight of the order-p² closed form with a detected a_y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VacuumWeightModel {
    /// 1 + (5N−3)(1−η_c²), as published.
    Published,
    /// 1 + (3N−1)(1−η_c²), which the Fock simulation reproduces.
    #[default]
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnsbruckConfig {
    pub p1: f64,
    pub p2: f64,
    pub theta: f64,
    pub phi: f64,
    pub n: usize,
    pub eta_u2: f64,
    pub eta_v2: f64,
    pub eta_c2: f64,
    pub order: u32,
    pub ay: AyDetection,
    pub model: VacuumWeightModel,
}

impl InnsbruckConfig {
    /// Equal sources, one detector efficiency everywhere, a_y detected.
    pub fn new(p: f64, theta: f64, n: usize, eta2: f64) -> Result<Self> {
        let cfg = Self {
            p1: p,
            p2: p,
            theta,
            phi: 0.0,
            n,
            eta_u2: eta2,
            eta_v2: eta2,
            eta_c2: eta2,
            order: 2,
            ay: AyDetection::NoClick,
            model: VacuumWeightModel::Derived,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} outside [0, 1)")));
            }
        }
        for (name, e) in [("eta_u2", self.eta_u2), ("eta_v2", self.eta_v2), ("eta_c2", self.eta_c2)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Domain(format!("{name} = {e} outside [0, 1]")));
            }
        }
        if self.n == 0 {
            return Err(Error::Domain("cascade needs N ≥ 1".into()));
        }
        if !(2..=3).contains(&self.order) {
            return Err(Error::Domain(format!("order {} not in {{2, 3}}", self.order)));
        }
        if !self.theta.is_finite() || !self.phi.is_finite() {
            return Err(Error::Domain("angles must be finite".into()));
        }
        Ok(())
    }

    /// Vacuum weight V in ρ ∝ (p₁/N)V|0⟩⟨0| + p₂|Ψ⟩⟨Ψ|.
    pub fn vacuum_weight(&self) -> f64 {
        let n = self.n as f64;
        let loss = 1.0 - self.eta_c2;
        match (self.ay, self.model) {
            (AyDetection::NoClick, VacuumWeightModel::Published) => 1.0 + (5.0 * n - 3.0) * loss,
            (AyDetection::NoClick, VacuumWeightModel::Derived) => 1.0 + (3.0 * n - 1.0) * loss,
            (AyDetection::Undetected, _) => (n + 1.0) + (2.0 * n - 1.0) * loss,
        }
    }
}

/// Density operator expanded in powers of (p₁, p₂): ρ = Σ p₁^i p₂^j ρ_ij.
#[derive(Clone, Debug)]
pub struct TaggedDensity {
    pub blocks: BTreeMap<(u32, u32), DensityOperator>,
    register: Register,
    cutoff: u32,
}

impl TaggedDensity {
    fn new(register: Register, cutoff: u32) -> Self {
        Self { blocks: BTreeMap::new(), register, cutoff }
    }

    fn accumulate(&mut self, tag: (u32, u32), rho: DensityOperator) -> Result<()> {
        let slot = self.blocks.entry(tag).or_insert_with(|| DensityOperator::zero(self.register.clone(), self.cutoff));
        *slot = slot.add(&rho)?;
        Ok(())
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn get(&self, i: u32, j: u32) -> Option<&DensityOperator> {
        self.blocks.get(&(i, j))
    }

    /// Sum of all blocks evaluated at (p₁, p₂).
    pub fn evaluate(&self, p1: f64, p2: f64) -> Result<DensityOperator> {
        let mut out = DensityOperator::zero(self.register.clone(), self.cutoff);
        for (&(i, j), rho) in &self.blocks {
            out = out.add(&rho.scaled(p1.powi(i as i32) * p2.powi(j as i32)))?;
        }
        Ok(out)
    }

    /// Blocks of total order i + j = `order` only.
    pub fn evaluate_order(&self, p1: f64, p2: f64, order: u32) -> Result<DensityOperator> {
        let mut out = DensityOperator::zero(self.register.clone(), self.cutoff);
        for (&(i, j), rho) in self.blocks.iter().filter(|(k, _)| k.0 + k.1 == order) {
            out = out.add(&rho.scaled(p1.powi(i as i32) * p2.powi(j as i32)))?;
        }
        Ok(out)
    }

    /// Largest relative entry difference over the blocks of both expansions.
    pub fn max_relative_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<_> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let zero = DensityOperator::zero(self.register.clone(), self.cutoff);
        keys.iter()
            .map(|k| {
                let a = self.blocks.get(k).unwrap_or(&zero);
                let b = other.blocks.get(k).unwrap_or(&zero);
                let scale = a.iter().chain(b.iter()).map(|(_, v)| v.norm()).fold(0.0, f64::max);
                if scale == 0.0 {
                    0.0
                } else {
                    a.max_abs_diff(b) / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub rho: TaggedDensity,
    /// Set when N exceeds the range the vacuum weight was checked against.
    pub extrapolated: bool,
}

/// Register of Bob's output modes d_x, d_y.
pub fn output_register() -> Register {
    Register::new(vec![DX, DY]).expect("distinct modes")
}

/// |Ψ⟩ = cosθ|0,1⟩ + e^{iφ} sinθ|1,0⟩ on (d_x, d_y).
pub fn teleported_state(theta: f64, phi: f64) -> OccupationState {
    let (s, co) = theta.sin_cos();
    OccupationState::from_terms(output_register(), 3, [(vec![0, 1], r(co)), (vec![1, 0], C64::from_polar(s, phi))])
        .expect("valid occupations")
}

/// |Ψ⊥⟩ = sinθ|0,1⟩ − e^{iφ} cosθ|1,0⟩.
pub fn teleported_state_orthogonal(theta: f64, phi: f64) -> OccupationState {
    let (s, co) = theta.sin_cos();
    OccupationState::from_terms(output_register(), 3, [(vec![0, 1], r(s)), (vec![1, 0], -C64::from_polar(co, phi))])
        .expect("valid occupations")
}

/// (ket on d_x, d_y), (bra on d_x, d_y), value.
type OutputEntry = ((u8, u8), (u8, u8), C64);

fn output_density(entries: &[OutputEntry]) -> DensityOperator {
    DensityOperator::from_entries(output_register(), 3, entries.iter().map(|&(k, l, v)| ((vec![k.0, k.1], vec![l.0, l.1]), v)))
        .expect("valid occupations")
}

fn outer(psi: &OccupationState, w: f64) -> DensityOperator {
    DensityOperator::from_pure(psi).scaled(w)
}

/// Closed-form unnormalised output state on (d_x, d_y), tagged by powers of p₁, p₂.
pub fn innsbruck_closed_form(cfg: &InnsbruckConfig) -> Result<ClosedForm> {
    cfg.validate()?;
    let g = cfg.eta_u2 * cfg.eta_v2 * cfg.eta_c2;
    let n = cfg.n as f64;
    let mut rho = TaggedDensity::new(output_register(), 3);
    let vac = output_density(&[((0, 0), (0, 0), r(1.0))]);
    let psi = teleported_state(cfg.theta, cfg.phi);
    rho.accumulate((2, 0), vac.scaled(g / 8.0 * cfg.vacuum_weight() / n))?;
    rho.accumulate((1, 1), outer(&psi, g / 8.0))?;
    if cfg.order == 3 {
        if cfg.n != 1 || cfg.ay != AyDetection::Undetected {
            return Err(Error::Unsupported("third-order closed form needs N = 1 with a_y undetected".into()));
        }
        let e = cfg.eta_c2;
        let pre = g / 8.0 * (4.0 - cfg.eta_u2 - cfg.eta_v2) / 16.0;
        let perp = teleported_state_orthogonal(cfg.theta, cfg.phi);
        let (s2, c2) = (2.0 * cfg.theta).sin_cos();
        let rho1 = output_density(&[((1, 0), (1, 0), r(0.5)), ((0, 1), (0, 1), r(0.5))]);
        let off = r(FRAC_1_SQRT_2 * s2);
        let rho2 = output_density(&[
            ((0, 2), (0, 2), r(2.0 + c2)),
            ((2, 0), (2, 0), r(2.0 - c2)),
            ((1, 1), (1, 1), r(2.0)),
            ((2, 0), (1, 1), off),
            ((1, 1), (2, 0), off),
            ((0, 2), (1, 1), off),
            ((1, 1), (0, 2), off),
        ])
        .scaled(1.0 / 6.0);
        let rho2 = rotate_output_phase(&rho2, cfg.phi);
        rho.accumulate((3, 0), vac.scaled(pre * 6.0 * (6.0 - 4.0 * e + e * e)))?;
        let mixed = outer(&psi, 1.0).add(&outer(&perp, -1.0))?;
        rho.accumulate((2, 1), mixed.scaled(pre * 2.0 * (2.0 - e)).add(&rho1.scaled(pre * 8.0 * (3.0 - e)))?)?;
        rho.accumulate((1, 2), rho2.scaled(pre * 12.0))?;
    }
    Ok(ClosedForm { rho, extrapolated: cfg.n > 4 && cfg.ay == AyDetection::NoClick })
}

/// D ρ D† with D = e^{iφ n_{d_x}}.
fn rotate_output_phase(rho: &DensityOperator, phi: f64) -> DensityOperator {
    DensityOperator::from_entries(
        rho.register().clone(),
        rho.cutoff(),
        rho.iter().map(|((k, l), v)| {
            let dn = f64::from(k[0]) - f64::from(l[0]);
            ((k.clone(), l.clone()), v * C64::from_polar(1.0, phi * dn))
        }),
    )
    .expect("same register")
}

fn innsbruck_register(n: usize) -> Register {
    let mut modes = vec![AX, AY, BX, BY, CX, CY, DX, DY];
    modes.extend((1..n).map(|k| ModeLabel::scalar(CASCADE_BASE + k as u16)));
    Register::new(modes).expect("distinct modes")
}

fn cascade_modes(n: usize) -> Vec<ModeLabel> {
    std::iter::once(AX).chain((1..n).map(|k| ModeLabel::scalar(CASCADE_BASE + k as u16))).collect()
}

/// L₁^{n₁} L₂^{n₂}|0⟩ / (n₁! n₂!) at unit coupling.
fn source_block(reg: &Register, n1: u32, n2: u32, cutoff: u32) -> OccupationState {
    let mut s = OccupationState::vacuum(reg.clone(), cutoff);
    for _ in 0..n1 {
        s = apply_pair_creator(&s, 0, 3, 1, 2);
    }
    for _ in 0..n2 {
        s = apply_pair_creator(&s, 4, 7, 5, 6);
    }
    s.scaled(r(1.0 / (linalg::factorial(n1) * linalg::factorial(n2))))
}

fn innsbruck_optics(cfg: &InnsbruckConfig, s: &OccupationState) -> Result<OccupationState> {
    let bs = beam_splitter(FRAC_PI_4);
    let mut s = s.apply_passive_unitary_on(&bs, &[BX, CX])?;
    s = s.apply_passive_unitary_on(&bs, &[BY, CY])?;
    s = s.apply_passive_unitary_on(&phase_shift(cfg.phi), &[AY])?;
    s = s.apply_passive_unitary_on(&rotation(cfg.theta), &[AX, AY])?;
    if cfg.n > 1 {
        s = s.apply_passive_unitary_on(&symmetric_nport(cfg.n)?, &cascade_modes(cfg.n))?;
    }
    Ok(s)
}

fn innsbruck_outcome(cfg: &InnsbruckConfig) -> Vec<PovmElement> {
    let mut out = vec![
        PovmElement::new(cascade_modes(cfg.n), Weight::Clicks { eta2: cfg.eta_c2, k: 1 }, "cascade"),
        PovmElement::new(vec![BX, BY], Weight::Click { eta2: cfg.eta_u2 }, "u"),
        PovmElement::new(vec![CX, CY], Weight::Click { eta2: cfg.eta_v2 }, "v"),
    ];
    out.push(match cfg.ay {
        AyDetection::NoClick => PovmElement::new(vec![AY], Weight::NoClick { eta2: cfg.eta_c2 }, "a_y"),
        AyDetection::Undetected => PovmElement::new(vec![AY], Weight::Identity, "a_y traced"),
    });
    out
}

fn simulated_block(cfg: &InnsbruckConfig, reg: &Register, n1: u32, n2: u32) -> Result<OccupationState> {
    innsbruck_optics(cfg, &source_block(reg, n1, n2, 2 * cfg.order))
}

/// Fock-space simulation: two pair sources, beam splitter on (b, c),
/// polarisation analysis and cascade on a, detector POVMs, trace to d.
/// Block (n₁, n₂) carries the weight (p₁/2)^{n₁}(p₂/2)^{n₂}.
pub fn innsbruck_simulate(cfg: &InnsbruckConfig) -> Result<TaggedDensity> {
    cfg.validate()?;
    let reg = innsbruck_register(cfg.n);
    let outcome = innsbruck_outcome(cfg);
    let mut out = TaggedDensity::new(output_register(), 3);
    for total in 2..=cfg.order {
        // n₁ = 0 leaves the cascade dark.
        for n1 in 1..=total {
            let n2 = total - n1;
            let s = simulated_block(cfg, &reg, n1, n2)?;
            let rho = apply_povm_pure(&s, &outcome)?;
            let rho = relabel_output(&rho)?;
            out.accumulate((n1, n2), rho.scaled(0.5f64.powi(total as i32)))?;
        }
    }
    Ok(out)
}

fn relabel_output(rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.register() != &output_register() {
        return Err(Error::RegisterMismatch);
    }
    DensityOperator::from_entries(output_register(), 3, rho.iter().map(|((k, l), v)| ((k.clone(), l.clone()), *v)))
}

/// Largest entry of the interference terms Tr_det[E|ψ_b⟩⟨ψ_b'|] between
/// distinct source blocks up to `cfg.order`. Zero when the blocks may be
/// treated as an incoherent mixture.
pub fn innsbruck_cross_term_residual(cfg: &InnsbruckConfig) -> Result<f64> {
    cfg.validate()?;
    let reg = innsbruck_register(cfg.n);
    let outcome = innsbruck_outcome(cfg);
    let mut blocks = Vec::new();
    for total in 2..=cfg.order {
        for n1 in 1..=total {
            blocks.push(simulated_block(cfg, &reg, n1, total - n1)?);
        }
    }
    let rhos = blocks.iter().map(|s| apply_povm_pure(s, &outcome)).collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            for phase in [r(1.0), c(0.0, 1.0)] {
                let sum = blocks[i].add(&blocks[j].scaled(phase))?;
                let joint = apply_povm_pure(&sum, &outcome)?;
                let cross = joint.add(&rhos[i].scaled(-1.0))?.add(&rhos[j].scaled(-1.0))?;
                worst = worst.max(cross.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max));
            }
        }
    }
    Ok(worst)
}

/// F = N p₂ / (p₁ V + N p₂) at order p², V from the configured model.
pub fn teleport_fidelity_2(cfg: &InnsbruckConfig) -> f64 {
    let n = cfg.n as f64;
    n * cfg.p2 / (cfg.p1 * cfg.vacuum_weight() + n * cfg.p2)
}

/// Cascade efficiency η_c² needed for F ≥ ¾ (a_y detected).
pub fn cascade_efficiency_bound(n: usize, p1: f64, p2: f64, model: VacuumWeightModel) -> f64 {
    let n = n as f64;
    match model {
        VacuumWeightModel::Published => ((15.0 * n - 6.0) * p1 - n * p2) / ((15.0 * n - 9.0) * p1),
        VacuumWeightModel::Derived => (9.0 * n * p1 - n * p2) / ((9.0 * n - 3.0) * p1),
    }
}

/// N → ∞ limit of [`cascade_efficiency_bound`] at p₁ = p₂.
pub fn cascade_efficiency_limit(model: VacuumWeightModel) -> f64 {
    match model {
        VacuumWeightModel::Published => 14.0 / 15.0,
        VacuumWeightModel::Derived => 8.0 / 9.0,
    }
}

/// Smallest cascade size reaching fidelity `target`, searched up to `n_max`.
pub fn minimal_cascade_size(template: &InnsbruckConfig, target: f64, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| teleport_fidelity_2(&InnsbruckConfig { n, ..*template }) >= target)
}

/// Third-order fidelity without cascade, as published.
pub fn teleport_fidelity_3(p: f64, eta2: f64) -> f64 {
    let e = eta2;
    (4.0 + p * (2.0 - e).powi(2)) / (4.0 * (4.0 - e) + p * (80.0 - 76.0 * e + 34.0 * e * e - 3.0 * e.powi(3)))
}

/// Third-order fidelity obtained from the third-order closed-form state.
pub fn teleport_fidelity_3_derived(p: f64, eta2: f64) -> f64 {
    let e = eta2;
    (4.0 + p * (2.0 - e) * (8.0 - 3.0 * e)) / (4.0 * (4.0 - e) + p * (2.0 - e) * (36.0 - 16.0 * e + 3.0 * e * e))
}

// ---------------------------------------------------------------- swapping

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pol {
    X,
    Y,
}

fn swap_register() -> Register {
    Register::polarized(4)
}

/// Output on (a, d) given photons of polarisation j in u and k in v, after
/// both sources emitted two pairs in total. Normalised.
pub fn swap_conditional(j: Pol, k: Pol) -> Result<(OccupationState, f64)> {
    let reg = swap_register();
    let vac = OccupationState::vacuum(reg.clone(), 4);
    let l =
        |s: &OccupationState| apply_pair_creator(s, 0, 3, 1, 2).add(&apply_pair_creator(s, 4, 7, 5, 6)).expect("same register");
    let s = l(&l(&vac)).scaled(r(0.5));
    let bs = beam_splitter(FRAC_PI_4);
    let s = s.apply_passive_unitary_on(&bs, &[BX, CX])?.apply_passive_unitary_on(&bs, &[BY, CY])?;
    let pick = |p: Pol| match p {
        Pol::X => [1u8, 0],
        Pol::Y => [0u8, 1],
    };
    let (u, v) = (pick(j), pick(k));
    let out = s.project(&[BX, BY, CX, CY], &[u[0], u[1], v[0], v[1]])?;
    let p = out.norm_sqr();
    Ok((out.normalized()?, p))
}

fn ad_register() -> Register {
    Register::new(vec![AX, AY, DX, DY]).expect("distinct modes")
}

fn ad_state(terms: &[([u8; 4], f64)]) -> OccupationState {
    OccupationState::from_terms(ad_register(), 4, terms.iter().map(|(o, a)| (o.to_vec(), r(*a)))).expect("valid occupations")
}

/// The four conditional states as published, on (a_x, a_y, d_x, d_y).
pub fn swap_published(j: Pol, k: Pol) -> OccupationState {
    let h = FRAC_1_SQRT_2;
    match (j, k) {
        (Pol::X, Pol::X) => ad_state(&[([0, 0, 0, 2], h), ([0, 2, 0, 0], -h)]),
        (Pol::X, Pol::Y) => ad_state(&[([1, 1, 0, 0], 0.5), ([1, 0, 0, 1], -0.5), ([0, 1, 1, 0], 0.5), ([0, 0, 1, 1], -0.5)]),
        (Pol::Y, Pol::X) => ad_state(&[([1, 1, 0, 0], 0.5), ([1, 0, 0, 1], 0.5), ([0, 1, 1, 0], -0.5), ([0, 0, 1, 1], -0.5)]),
        (Pol::Y, Pol::Y) => ad_state(&[([0, 0, 2, 0], h), ([2, 0, 0, 0], -h)]),
    }
}

/// ¼(Φ_xy + Φ_x² + Φ_y² + Ψ⁻) on (a, d).
pub fn swap_mixture() -> DensityOperator {
    let h = FRAC_1_SQRT_2;
    let states = [
        ad_state(&[([1, 1, 0, 0], h), ([0, 0, 1, 1], -h)]),
        ad_state(&[([2, 0, 0, 0], h), ([0, 0, 2, 0], -h)]),
        ad_state(&[([0, 2, 0, 0], h), ([0, 0, 0, 2], -h)]),
        ad_state(&[([1, 0, 0, 1], h), ([0, 1, 1, 0], -h)]),
    ];
    let mix: Vec<(f64, OccupationState)> = states.into_iter().map(|s| (0.25, s)).collect();
    DensityOperator::mixture(&mix).expect("same register")
}

/// Spectrum (ascending) of the partial transpose over d of [`swap_mixture`],
/// restricted to the span of the occupations it touches.
pub fn swap_mixture_pt_spectrum() -> Result<Vec<f64>> {
    Ok(swap_mixture().partial_transpose(&[DX, DY])?.eigenvalues())
}

// -------------------------------------------------------------------- GHZ

/// Branches after detecting the trigger photon, as published.
pub const GHZ_BRANCHES: [&str; 8] = ["xy,x,0", "x,x,y", "xy,0,x", "x,0,xy", "y,xy,0", "0,xy,y", "y,y,x", "0,y,xy"];

#[derive(Clone, Debug)]
pub struct GhzResult {
    /// Labelled amplitudes of the triggered state on D₁, D₂, D₃.
    pub branches: Vec<(String, C64)>,
    /// Three-fold coincidence component, normalised.
    pub state: OccupationState,
    /// Probability that a triggered event is a three-fold coincidence.
    pub threefold_fraction: f64,
}

fn ghz_detectors() -> Register {
    Register::polarized(4)
        .subset(&[ModeLabel::x(1), ModeLabel::y(1), ModeLabel::x(2), ModeLabel::y(2), ModeLabel::x(3), ModeLabel::y(3)])
        .expect("modes present")
        .0
}

fn branch_label(occ: &[u8]) -> String {
    occ.chunks(2)
        .map(|p| {
            let s = "x".repeat(p[0] as usize) + &"y".repeat(p[1] as usize);
            if s.is_empty() {
                "0".to_string()
            } else {
                s
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Double-pair emission routed to a trigger T and detectors D₁..D₃,
/// conditioned on one photon in T.
pub fn ghz_postselect() -> Result<GhzResult> {
    let pair = pdc_pair_state(2, 4)?;
    let trigger = ModeLabel::scalar(0);
    let mut modes = vec![trigger];
    modes.extend_from_slice(ghz_detectors().modes());
    let out = Register::new(modes)?;
    let h = FRAC_1_SQRT_2;
    // rows: a_x, a_y, b_x, b_y; columns: T, D1x, D1y, D2x, D2y, D3x, D3y
    let mut m = CMatrix::zeros(4, 7);
    m[(0, 0)] = r(1.0);
    m[(1, 1)] = r(h);
    m[(1, 4)] = r(h);
    m[(2, 3)] = r(h);
    m[(2, 5)] = r(h);
    m[(3, 2)] = r(h);
    m[(3, 6)] = r(h);
    let routed = pair.apply_mode_map(&m, out)?;
    let triggered = routed.project(&[trigger], &[1])?.normalized()?;
    let first = triggered.iter().next().map(|(_, a)| *a).ok_or(Error::ZeroNorm)?;
    let triggered = triggered.scaled(first.conj() / first.norm());
    let branches = triggered.iter().map(|(o, a)| (branch_label(o), *a)).collect();
    let three = OccupationState::from_terms(
        triggered.register().clone(),
        triggered.cutoff(),
        triggered.iter().filter(|(o, _)| o.chunks(2).all(|p| p[0] + p[1] > 0)).map(|(o, a)| (o.clone(), *a)),
    )?;
    let threefold_fraction = three.norm_sqr();
    Ok(GhzResult { branches, state: three.normalized()?, threefold_fraction })
}

/// Σ P(outcome)(−1)^{#y} after a 45° polarisation rotation on every detector.
pub fn ghz_parity(psi: &OccupationState) -> Result<f64> {
    let bs = beam_splitter(FRAC_PI_4);
    let mut s = psi.clone();
    for k in 1..=3 {
        s = s.apply_passive_unitary_on(&bs, &[ModeLabel::x(k), ModeLabel::y(k)])?;
    }
    let norm = s.norm_sqr();
    let ys = s.register().indices_of(&[ModeLabel::y(1), ModeLabel::y(2), ModeLabel::y(3)])?;
    let acc: f64 = s
        .iter()
        .map(|(o, a)| {
            let n: u32 = ys.iter().map(|&i| u32::from(o[i])).sum();
            a.norm_sqr() * if n.is_multiple_of(2) { 1.0 } else { -1.0 }
        })
        .sum();
    Ok(acc / norm)
}

/// Parity visibility of the incoherent mixture of the three-fold branches.
pub fn ghz_mixture_parity(psi: &OccupationState) -> Result<f64> {
    let total = psi.norm_sqr();
    let mut acc = 0.0;
    for (o, a) in psi.iter() {
        let branch = OccupationState::basis(psi.register().clone(), psi.cutoff(), o)?;
        acc += a.norm_sqr() / total * ghz_parity(&branch)?;
    }
    Ok(acc)
}

// -------------------------------------------------------------------- KLM

/// Three-mode unitary of the nonlinear-sign gate (signal first).
pub fn ns_unitary() -> Result<CMatrix> {
    let s2 = 2f64.sqrt();
    let q = 2f64.powf(-0.25);
    let w = (3.0 / s2 - 2.0).sqrt();
    let u = CMatrix::from_row_slice(
        3,
        3,
        &[r(1.0 - s2), r(q), r(w), r(q), r(0.5), r(0.5 - 1.0 / s2), r(w), r(0.5 - 1.0 / s2), r(s2 - 0.5)],
    );
    let d = linalg::unitarity_defect(&u);
    if d > 1e-10 {
        return Err(Error::NotUnitary(d));
    }
    Ok(u)
}

/// NS gate on `signal` with ancillas prepared in |1,0⟩ and post-selected on
/// |1,0⟩. Returns the unnormalised branch (ancillas removed).
fn apply_ns(s: &OccupationState, signal: ModeLabel, anc: [ModeLabel; 2]) -> Result<OccupationState> {
    let s = s.apply_creation(anc[0])?;
    let s = s.apply_passive_unitary_on(&ns_unitary()?, &[signal, anc[0], anc[1]])?;
    s.project(&anc, &[1, 0])
}

/// Output amplitudes (normalised) and success probability of the NS gate.
pub fn ns_gate(alpha: [C64; 3]) -> Result<([C64; 3], f64)> {
    let norm: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::ZeroNorm);
    }
    let reg = Register::scalar(3);
    let sig = ModeLabel::scalar(0);
    let input = OccupationState::from_terms(reg, 3, alpha.iter().enumerate().map(|(n, a)| (vec![n as u8, 0, 0], *a)))?;
    let out = apply_ns(&input, sig, [ModeLabel::scalar(1), ModeLabel::scalar(2)])?;
    let p = out.norm_sqr();
    let out = out.normalized()?;
    Ok(([0u8, 1, 2].map(|n| out.amplitude(&[n])), p))
}

#[derive(Clone, Debug)]
pub struct CsignResult {
    /// Normalised output on a₁..a₄.
    pub state: OccupationState,
    pub success: f64,
    /// Entanglement across {a₁, a₂} | {a₃, a₄}, in bits.
    pub entanglement: f64,
    /// Largest overlap with a standard Bell state in the dual-rail basis.
    pub bell_fidelity: f64,
    /// Input heralds, ancilla heralds and ancilla detections.
    pub detected_photons: u32,
}

/// |1,0,1,0⟩ → H ⊗ H → C-SIGN (B_{π/4}, NS ⊗ NS, B_{−π/4}) → H on (a₃, a₄).
pub fn csign_entangler() -> Result<CsignResult> {
    let a: Vec<ModeLabel> = (1..=4).map(ModeLabel::scalar).collect();
    let anc: Vec<ModeLabel> = (5..=8).map(ModeLabel::scalar).collect();
    let reg = Register::new(a.iter().chain(&anc).copied().collect())?;
    let mut s = OccupationState::basis(reg, 4, &[1, 0, 1, 0, 0, 0, 0, 0])?;
    let h = beam_splitter(FRAC_PI_4);
    s = s.apply_passive_unitary_on(&h, &[a[0], a[1]])?;
    s = s.apply_passive_unitary_on(&h, &[a[2], a[3]])?;
    // B_θ acts on annihilation operators; the creation-side map is its transpose.
    s = s.apply_passive_unitary_on(&rotation(FRAC_PI_4).transpose(), &[a[0], a[2]])?;
    s = apply_ns(&s, a[0], [anc[0], anc[1]])?;
    s = apply_ns(&s, a[2], [anc[2], anc[3]])?;
    s = s.apply_passive_unitary_on(&rotation(-FRAC_PI_4).transpose(), &[a[0], a[2]])?;
    s = s.apply_passive_unitary_on(&h, &[a[2], a[3]])?;
    let success = s.norm_sqr();
    let state = s.normalized()?;
    let entanglement = entanglement_measure(&state, &[a[0], a[1]])?;
    let rail = |o: &[u8]| -> Option<usize> {
        match o {
            [1, 0] => Some(0),
            [0, 1] => Some(1),
            _ => None,
        }
    };
    let mut q = CVector::zeros(4);
    for (o, amp) in state.iter() {
        if let (Some(i), Some(j)) = (rail(&o[0..2]), rail(&o[2..4])) {
            q[2 * i + j] += amp;
        }
    }
    let bell_fidelity = Bell::ALL.iter().map(|&b| bell(b).dotc(&q).norm_sqr()).fold(0.0, f64::max);
    Ok(CsignResult { state, success, entanglement, bell_fidelity, detected_photons: 6 })
}

// ------------------------------------------------------- qudit teleportation

/// |ψ_nm⟩ = d^{−½} Σ_j e^{2πi jn/d}|j, j⊕m⟩ (index j·d + k).
pub fn qudit_bell(d: usize, n: usize, m: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    for j in 0..d {
        v[j * d + (j + m) % d] = C64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * (j * n) as f64 / d as f64);
    }
    v
}

/// U_nm = Σ_k e^{2πi kn/d}|k⟩⟨k⊕m|.
pub fn qudit_correction(d: usize, n: usize, m: usize) -> CMatrix {
    let mut u = CMatrix::zeros(d, d);
    for k in 0..d {
        u[(k, (k + m) % d)] = C64::from_polar(1.0, 2.0 * PI * (k * n) as f64 / d as f64);
    }
    u
}

/// Teleports `input` through d^{−½}Σ|jj⟩ given Bell outcome (n, m).
/// Returns Bob's corrected normalised state and the outcome probability.
pub fn qudit_teleport(d: usize, input: &CVector, n: usize, m: usize) -> Result<(CVector, f64)> {
    if d < 2 || input.len() != d || n >= d || m >= d {
        return Err(Error::Dimension(format!("qudit teleport: d = {d}, |input| = {}, outcome ({n}, {m})", input.len())));
    }
    let input = input.normalize();
    let bm = qudit_bell(d, n, m);
    let amp = 1.0 / (d as f64).sqrt();
    // ⟨ψ_nm|₁₂ (|in⟩₁ ⊗ d^{−½}Σ_k|k⟩₂|k⟩₃)
    let mut bob = CVector::zeros(d);
    for i in 0..d {
        for k in 0..d {
            bob[k] += bm[i * d + k].conj() * input[i] * amp;
        }
    }
    let p = bob.norm_squared();
    if p <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok(((qudit_correction(d, n, m) * bob).unscale(p.sqrt()), p))
}
