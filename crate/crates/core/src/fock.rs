//! Truncated multi-mode Fock space: registers, sparse states and density operators.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Amplitudes with modulus below this are dropped.
pub const PRUNE: f64 = 1e-15;
/// Tolerance for unitarity and Hermiticity checks.
pub const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    X,
    Y,
    None,
}

/// A field mode: spatial index plus an optional polarisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub spatial: u16,
    pub pol: Polarization,
}

impl ModeLabel {
    pub const fn new(spatial: u16, pol: Polarization) -> Self {
        Self { spatial, pol }
    }
    pub const fn scalar(spatial: u16) -> Self {
        Self::new(spatial, Polarization::None)
    }
    pub const fn x(spatial: u16) -> Self {
        Self::new(spatial, Polarization::X)
    }
    pub const fn y(spatial: u16) -> Self {
        Self::new(spatial, Polarization::Y)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pol {
            Polarization::X => write!(f, "{}x", self.spatial),
            Polarization::Y => write!(f, "{}y", self.spatial),
            Polarization::None => write!(f, "{}", self.spatial),
        }
    }
}

/// Ordered list of distinct modes. The declaration order fixes the layout of
/// occupation vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    modes: Vec<ModeLabel>,
}

impl Register {
    pub fn new(modes: Vec<ModeLabel>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Domain("a register needs at least one mode".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &modes {
            if !seen.insert(*m) {
                return Err(Error::DuplicateMode(m.to_string()));
            }
        }
        Ok(Self { modes })
    }

    /// `n` unpolarised modes labelled 0..n.
    pub fn scalar(n: usize) -> Self {
        assert!(n > 0, "register needs at least one mode");
        Self { modes: (0..n as u16).map(ModeLabel::scalar).collect() }
    }

    /// `n` spatial modes, each split into x and y.
    pub fn polarized(n: usize) -> Self {
        assert!(n > 0, "register needs at least one mode");
        Self { modes: (0..n as u16).flat_map(|s| [ModeLabel::x(s), ModeLabel::y(s)]).collect() }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn index_of(&self, mode: ModeLabel) -> Result<usize> {
        self.modes.iter().position(|m| *m == mode).ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    pub fn indices_of(&self, modes: &[ModeLabel]) -> Result<Vec<usize>> {
        modes.iter().map(|m| self.index_of(*m)).collect()
    }

    /// Sub-register made of `keep` (reordered to declaration order) and the
    /// positions of those modes in `self`.
    pub fn subset(&self, keep: &[ModeLabel]) -> Result<(Register, Vec<usize>)> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut idx = self.indices_of(keep)?;
        idx.sort_unstable();
        idx.dedup();
        let modes = idx.iter().map(|&i| self.modes[i]).collect();
        Ok((Register { modes }, idx))
    }
}

pub type Occupation = Vec<u8>;

#[inline]
pub fn photons(occ: &[u8]) -> u32 {
    occ.iter().map(|&n| n as u32).sum()
}

fn sqrt_fact(occ: &[u8]) -> f64 {
    occ.iter().map(|&n| linalg::factorial(n as u32)).product::<f64>().sqrt()
}

/// Sparse superposition of occupation-number states with a total photon cutoff.
#[derive(Clone, Debug)]
pub struct OccupationState {
    register: Arc<Register>,
    cutoff: u32,
    amps: BTreeMap<Occupation, C64>,
    truncated: bool,
}

impl OccupationState {
    /// The zero vector.
    pub fn zero(register: Register, cutoff: u32) -> Self {
        Self::zero_on(Arc::new(register), cutoff)
    }

    fn zero_on(register: Arc<Register>, cutoff: u32) -> Self {
        Self { register, cutoff, amps: BTreeMap::new(), truncated: false }
    }

    pub fn vacuum(register: Register, cutoff: u32) -> Self {
        let n = register.len();
        let mut s = Self::zero(register, cutoff);
        s.amps.insert(vec![0; n], C64::new(1.0, 0.0));
        s
    }

    /// A single number state. Errors if it exceeds the cutoff or has the wrong length.
    pub fn basis(register: Register, cutoff: u32, occ: &[u8]) -> Result<Self> {
        Self::from_terms(register, cutoff, [(occ.to_vec(), C64::new(1.0, 0.0))])
    }

    pub fn from_terms<I>(register: Register, cutoff: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, C64)>,
    {
        let mut s = Self::zero(register, cutoff);
        for (occ, a) in terms {
            if occ.len() != s.register.len() {
                return Err(Error::Dimension(format!(
                    "occupation of length {} on a {}-mode register",
                    occ.len(),
                    s.register.len()
                )));
            }
            if photons(&occ) > cutoff {
                return Err(Error::Cutoff { cutoff, needed: photons(&occ) });
            }
            *s.amps.entry(occ).or_default() += a;
        }
        s.prune();
        Ok(s)
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// True when an operation dropped terms above the cutoff.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn amplitude(&self, occ: &[u8]) -> C64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    /// Same as [`Self::is_zero`].
    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, k: C64) -> Self {
        let mut s = self.clone();
        for a in s.amps.values_mut() {
            *a *= k;
        }
        s.prune();
        s
    }

    /// Same vector with a different cutoff. Terms above a lower cutoff are
    /// dropped and flagged.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut s = self.clone();
        s.cutoff = cutoff;
        let before = s.amps.len();
        s.amps.retain(|k, _| photons(k) <= cutoff);
        s.truncated |= s.amps.len() != before;
        s
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut s = self.clone();
        for (k, a) in &other.amps {
            *s.amps.entry(k.clone()).or_default() += a;
        }
        s.truncated |= other.truncated;
        s.prune();
        Ok(s)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if *self.register != *other.register || self.cutoff != other.cutoff {
            return Err(Error::RegisterMismatch);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE);
    }

    /// â†|n⟩ = √(n+1)|n+1⟩ on `mode`.
    pub fn apply_creation(&self, mode: ModeLabel) -> Result<Self> {
        let i = self.register.index_of(mode)?;
        Ok(self.create_at(i))
    }

    pub(crate) fn create_at(&self, i: usize) -> Self {
        let mut out = Self::zero_on(self.register.clone(), self.cutoff);
        out.truncated = self.truncated;
        for (k, a) in &self.amps {
            if photons(k) + 1 > self.cutoff {
                out.truncated = true;
                continue;
            }
            let mut k2 = k.clone();
            k2[i] += 1;
            let f = (k2[i] as f64).sqrt();
            *out.amps.entry(k2).or_default() += a * f;
        }
        out.prune();
        out
    }

    /// â|n⟩ = √n|n−1⟩ on `mode`.
    pub fn apply_annihilation(&self, mode: ModeLabel) -> Result<Self> {
        let i = self.register.index_of(mode)?;
        Ok(self.annihilate_at(i))
    }

    pub(crate) fn annihilate_at(&self, i: usize) -> Self {
        let mut out = Self::zero_on(self.register.clone(), self.cutoff);
        out.truncated = self.truncated;
        for (k, a) in &self.amps {
            if k[i] == 0 {
                continue;
            }
            let f = (k[i] as f64).sqrt();
            let mut k2 = k.clone();
            k2[i] -= 1;
            *out.amps.entry(k2).or_default() += a * f;
        }
        out.prune();
        out
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        if *self.register != *other.register {
            return Err(Error::RegisterMismatch);
        }
        let (small, large, flip) = if self.amps.len() <= other.amps.len() { (self, other, false) } else { (other, self, true) };
        let mut acc = C64::default();
        for (k, a) in &small.amps {
            if let Some(b) = large.amps.get(k) {
                acc += a.conj() * b;
            }
        }
        Ok(if flip { acc.conj() } else { acc })
    }

    /// Linear mode map a_i† → Σ_j m[(i,j)] b_j† onto `out` (which may differ
    /// in size from the input register, e.g. for isometries into detector
    /// modes). Photon number is conserved term by term.
    pub fn apply_mode_map(&self, m: &CMatrix, out: Register) -> Result<Self> {
        let (nin, nout) = (self.register.len(), out.len());
        if m.nrows() != nin || m.ncols() != nout {
            return Err(Error::Dimension(format!("mode map is {}x{}, expected {}x{}", m.nrows(), m.ncols(), nin, nout)));
        }
        let mut cache: HashMap<(usize, u8), Vec<(Occupation, C64)>> = HashMap::new();
        let mut acc: BTreeMap<Occupation, C64> = BTreeMap::new();
        for (k, a) in &self.amps {
            let mut poly: Vec<(Occupation, C64)> = vec![(vec![0; nout], *a / sqrt_fact(k))];
            for (i, &ni) in k.iter().enumerate() {
                if ni == 0 {
                    continue;
                }
                let pw = cache.entry((i, ni)).or_insert_with(|| linear_power(m, i, ni));
                let mut next: BTreeMap<Occupation, C64> = BTreeMap::new();
                for (e1, c1) in &poly {
                    for (e2, c2) in pw.iter() {
                        let e: Occupation = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                        *next.entry(e).or_default() += c1 * c2;
                    }
                }
                poly = next.into_iter().collect();
            }
            for (e, coef) in poly {
                let f = sqrt_fact(&e);
                *acc.entry(e).or_default() += coef * f;
            }
        }
        let mut s = Self::zero_on(Arc::new(out), self.cutoff);
        s.amps = acc;
        s.truncated = self.truncated;
        s.prune();
        Ok(s)
    }

    /// Passive linear-optics transform on the whole register.
    pub fn apply_passive_unitary(&self, u: &CMatrix) -> Result<Self> {
        let d = linalg::unitarity_defect(u);
        if !(d <= TOL) {
            return Err(Error::NotUnitary(d));
        }
        self.apply_mode_map(u, (*self.register).clone())
    }

    /// Passive transform acting on the listed modes only.
    pub fn apply_passive_unitary_on(&self, u: &CMatrix, modes: &[ModeLabel]) -> Result<Self> {
        if u.nrows() != modes.len() {
            return Err(Error::Dimension(format!("{}x{} unitary on {} modes", u.nrows(), u.ncols(), modes.len())));
        }
        let idx = self.register.indices_of(modes)?;
        let full = linalg::embed(u, &idx, self.register.len());
        self.apply_passive_unitary(&full)
    }

    /// Project `modes` onto the occupation `occ` and drop them from the register.
    pub fn project(&self, modes: &[ModeLabel], occ: &[u8]) -> Result<Self> {
        if modes.len() != occ.len() {
            return Err(Error::Dimension("projector occupation length".into()));
        }
        let idx = self.register.indices_of(modes)?;
        let keep: Vec<usize> = (0..self.register.len()).filter(|i| !idx.contains(i)).collect();
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let reg = Register::new(keep.iter().map(|&i| self.register.modes[i]).collect())?;
        let mut s = Self::zero(reg, self.cutoff);
        s.truncated = self.truncated;
        for (k, a) in &self.amps {
            if idx.iter().zip(occ).all(|(&i, &n)| k[i] == n) {
                let kk: Occupation = keep.iter().map(|&i| k[i]).collect();
                *s.amps.entry(kk).or_default() += a;
            }
        }
        s.prune();
        Ok(s)
    }

    /// Re-express the state on a larger register (new modes in vacuum).
    pub fn extend_to(&self, reg: Register) -> Result<Self> {
        let pos = reg.indices_of(self.register.modes())?;
        let mut s = Self::zero(reg, self.cutoff);
        s.truncated = self.truncated;
        let n = s.register.len();
        for (k, a) in &self.amps {
            let mut kk = vec![0u8; n];
            for (j, &p) in pos.iter().enumerate() {
                kk[p] = k[j];
            }
            s.amps.insert(kk, *a);
        }
        Ok(s)
    }

    /// Dense amplitude vector over `basis`.
    pub fn to_vector(&self, basis: &[Occupation]) -> linalg::CVector {
        linalg::CVector::from_iterator(basis.len(), basis.iter().map(|b| self.amplitude(b)))
    }

    /// Largest amplitude difference to another state on the same register.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&Occupation> = self.amps.keys().chain(other.amps.keys()).collect();
        keys.into_iter().map(|k| (self.amplitude(k) - other.amplitude(k)).norm()).fold(0.0, f64::max)
    }
}

/// Expansion of (Σ_j m[i,j] b_j†)^n as exponent vectors with multinomial weights.
fn linear_power(m: &CMatrix, i: usize, n: u8) -> Vec<(Occupation, C64)> {
    let nout = m.ncols();
    let support: Vec<usize> = (0..nout).filter(|&j| m[(i, j)] != C64::default()).collect();
    let mut out = Vec::new();
    let mut exps = vec![0u8; nout];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        m: &CMatrix,
        i: usize,
        support: &[usize],
        pos: usize,
        left: u8,
        total: u8,
        exps: &mut Vec<u8>,
        out: &mut Vec<(Occupation, C64)>,
    ) {
        if pos + 1 == support.len() || left == 0 {
            if left > 0 {
                exps[support[pos]] = left;
            }
            let mut coef = C64::new(linalg::factorial(total as u32), 0.0);
            for &j in support {
                let k = exps[j];
                if k > 0 {
                    coef *= m[(i, j)].powu(k as u32) / linalg::factorial(k as u32);
                }
            }
            out.push((exps.clone(), coef));
            if left > 0 {
                exps[support[pos]] = 0;
            }
            return;
        }
        for k in (0..=left).rev() {
            exps[support[pos]] = k;
            rec(m, i, support, pos + 1, left - k, total, exps, out);
        }
        exps[support[pos]] = 0;
    }
    if support.is_empty() {
        return out;
    }
    rec(m, i, &support, 0, n, n, &mut exps, &mut out);
    out
}

/// Operator on the truncated Fock space stored as (ket, bra) → amplitude.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    register: Arc<Register>,
    cutoff: u32,
    entries: BTreeMap<(Occupation, Occupation), C64>,
}

impl DensityOperator {
    pub fn zero(register: Register, cutoff: u32) -> Self {
        Self { register: Arc::new(register), cutoff, entries: BTreeMap::new() }
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &OccupationState) -> Self {
        let mut rho = Self { register: psi.register.clone(), cutoff: psi.cutoff, entries: BTreeMap::new() };
        rho.add_outer(psi, psi, 1.0).expect("same register");
        rho
    }

    /// Mixture Σ w_k |ψ_k⟩⟨ψ_k|.
    pub fn mixture(states: &[(f64, OccupationState)]) -> Result<Self> {
        let first = states.first().ok_or(Error::ZeroNorm)?;
        let mut rho = Self { register: first.1.register.clone(), cutoff: first.1.cutoff, entries: BTreeMap::new() };
        for (w, s) in states {
            rho.add_outer(s, s, *w)?;
        }
        Ok(rho)
    }

    pub fn from_entries<I>(register: Register, cutoff: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((Occupation, Occupation), C64)>,
    {
        let n = register.len();
        let mut rho = Self::zero(register, cutoff);
        for ((k, l), v) in entries {
            if k.len() != n || l.len() != n {
                return Err(Error::Dimension("occupation length".into()));
            }
            *rho.entries.entry((k, l)).or_default() += v;
        }
        rho.prune();
        Ok(rho)
    }

    /// Adds w·|ψ⟩⟨φ|.
    pub fn add_outer(&mut self, psi: &OccupationState, phi: &OccupationState, w: f64) -> Result<()> {
        if *psi.register != *self.register || *phi.register != *self.register {
            return Err(Error::RegisterMismatch);
        }
        for (k, a) in &psi.amps {
            for (l, b) in &phi.amps {
                *self.entries.entry((k.clone(), l.clone())).or_default() += a * b.conj() * w;
            }
        }
        self.prune();
        Ok(())
    }

    pub(crate) fn add_entry(&mut self, k: Occupation, l: Occupation, v: C64) {
        *self.entries.entry((k, l)).or_default() += v;
    }

    pub(crate) fn finish(&mut self) {
        self.prune();
    }

    fn prune(&mut self) {
        self.entries.retain(|_, v| v.norm() >= PRUNE);
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn entry(&self, ket: &[u8], bra: &[u8]) -> C64 {
        self.entries.get(&(ket.to_vec(), bra.to_vec())).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Occupation, Occupation), &C64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn trace(&self) -> C64 {
        self.entries.iter().filter(|((k, l), _)| k == l).map(|(_, v)| *v).sum()
    }

    pub fn scaled(&self, w: f64) -> Self {
        let mut r = self.clone();
        for v in r.entries.values_mut() {
            *v *= w;
        }
        r.prune();
        r
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if *self.register != *other.register {
            return Err(Error::RegisterMismatch);
        }
        let mut r = self.clone();
        for (k, v) in &other.entries {
            *r.entries.entry(k.clone()).or_default() += v;
        }
        r.prune();
        Ok(r)
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace().re;
        if !(t.abs() > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(1.0 / t))
    }

    /// max |ρ_kl − conj ρ_lk|.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries.iter().map(|((k, l), v)| (v - self.entry(l, k).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// ⟨φ|ρ|φ⟩.
    pub fn expectation(&self, phi: &OccupationState) -> Result<C64> {
        if *phi.register != *self.register {
            return Err(Error::RegisterMismatch);
        }
        let mut acc = C64::default();
        for ((k, l), v) in &self.entries {
            let a = phi.amplitude(k);
            if a == C64::default() {
                continue;
            }
            acc += a.conj() * v * phi.amplitude(l);
        }
        Ok(acc)
    }

    /// Trace over every mode not in `keep`.
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<Self> {
        let (reg, idx) = self.register.subset(keep)?;
        let traced: Vec<usize> = (0..self.register.len()).filter(|i| !idx.contains(i)).collect();
        let mut out = Self::zero(reg, self.cutoff);
        for ((k, l), v) in &self.entries {
            if traced.iter().all(|&i| k[i] == l[i]) {
                let kk = idx.iter().map(|&i| k[i]).collect();
                let ll = idx.iter().map(|&i| l[i]).collect();
                *out.entries.entry((kk, ll)).or_default() += v;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Transpose the occupation labels of `modes` between ket and bra.
    pub fn partial_transpose(&self, modes: &[ModeLabel]) -> Result<Self> {
        let idx = self.register.indices_of(modes)?;
        let mut out = Self { register: self.register.clone(), cutoff: self.cutoff, entries: BTreeMap::new() };
        for ((k, l), v) in &self.entries {
            let (mut k2, mut l2) = (k.clone(), l.clone());
            for &i in &idx {
                k2[i] = l[i];
                l2[i] = k[i];
            }
            out.entries.insert((k2, l2), *v);
        }
        Ok(out)
    }

    /// Occupations that appear as a row or column of a stored entry, sorted.
    pub fn support_basis(&self) -> Vec<Occupation> {
        let set: BTreeSet<Occupation> = self.entries.keys().flat_map(|(k, l)| [k.clone(), l.clone()]).collect();
        set.into_iter().collect()
    }

    /// All occupations up to the cutoff, in lexicographic order.
    pub fn full_basis(&self) -> Vec<Occupation> {
        enumerate_occupations(self.register.len(), self.cutoff)
    }

    pub fn to_dense(&self, basis: &[Occupation]) -> CMatrix {
        let pos: HashMap<&Occupation, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut m = CMatrix::zeros(basis.len(), basis.len());
        for ((k, l), v) in &self.entries {
            if let (Some(&i), Some(&j)) = (pos.get(k), pos.get(l)) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Eigenvalues restricted to the support basis, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.to_dense(&self.support_basis()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&(Occupation, Occupation)> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let a = self.entries.get(k).copied().unwrap_or_default();
                let b = other.entries.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Every occupation vector over `n` modes with total photons ≤ `cutoff`.
pub fn enumerate_occupations(n: usize, cutoff: u32) -> Vec<Occupation> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Occupation>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k as u8;
            rec(pos + 1, left - k, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, cutoff, &mut cur, &mut out);
    out.sort();
    out
}

/// Occupation vectors over `n` modes with exactly `total` photons.
pub fn occupations_with_total(n: usize, total: u32) -> Vec<Occupation> {
    enumerate_occupations(n, total).into_iter().filter(|o| photons(o) == total).collect()
}
