//! Complex multi-dimensional Hermite polynomials
//! H_n(α) = (−1)^{|n|} e^{½(α,Bα)} ∂ⁿ e^{−½(α,Bα)}.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::TOL;
use crate::linalg::{self, r, CMatrix, C64};

/// Default bound on the total degree accepted by [`evaluate`].
pub const MAX_DEGREE: u32 = 12;

/// Complex symmetric defining matrix.
#[derive(Clone, Debug)]
pub struct DefiningMatrix {
    b: CMatrix,
    max_degree: u32,
}

impl DefiningMatrix {
    pub fn new(b: CMatrix) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::Dimension(format!("defining matrix is {}x{}", b.nrows(), b.ncols())));
        }
        let d = linalg::symmetry_defect(&b);
        if !(d <= TOL) {
            return Err(Error::NotSymmetric(d));
        }
        Ok(Self { b, max_degree: MAX_DEGREE })
    }

    pub fn from_real(b: &DMatrix<f64>) -> Result<Self> {
        Self::new(b.map(r))
    }

    pub fn with_max_degree(mut self, max_degree: u32) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.b
    }

    fn check(&self, n: &[u32], alpha: Option<&[C64]>) -> Result<()> {
        let d = self.dim();
        if n.len() != d || alpha.is_some_and(|a| a.len() != d) {
            return Err(Error::Dimension(format!("index or argument length differs from dimension {d}")));
        }
        let total: u32 = n.iter().sum();
        if total > self.max_degree {
            return Err(Error::Domain(format!("total degree {total} exceeds limit {}", self.max_degree)));
        }
        Ok(())
    }
}

/// All H_m(α) for 0 ≤ m ≤ n componentwise, stored in mixed radix.
#[derive(Clone, Debug)]
pub struct HermiteTable {
    shape: Vec<usize>,
    values: Vec<C64>,
}

impl HermiteTable {
    fn linear(&self, m: &[u32]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (k, &mk) in m.iter().enumerate() {
            if mk as usize >= self.shape[k] {
                return None;
            }
            idx += mk as usize * stride;
            stride *= self.shape[k];
        }
        Some(idx)
    }

    /// H_m(α); `None` outside the tabulated box.
    pub fn get(&self, m: &[u32]) -> Option<C64> {
        self.linear(m).map(|i| self.values[i])
    }

    /// Iterate over (multi-index, value) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, C64)> + '_ {
        (0..self.values.len()).map(move |i| (self.unravel(i), self.values[i]))
    }

    fn unravel(&self, mut i: usize) -> Vec<u32> {
        self.shape
            .iter()
            .map(|&s| {
                let v = i % s;
                i /= s;
                v as u32
            })
            .collect()
    }
}

/// Tabulate H_m(α) for every m ≤ n via the three-term recursion, ascending in linear index.
pub fn evaluate_table(b: &DefiningMatrix, n: &[u32], alpha: &[C64]) -> Result<HermiteTable> {
    let d = b.dim();
    if n.len() != d || alpha.len() != d {
        return Err(Error::Dimension(format!("index or argument length differs from dimension {d}")));
    }
    let shape: Vec<usize> = n.iter().map(|&k| k as usize + 1).collect();
    let size: usize = shape.iter().product();
    let mut table = HermiteTable { shape, values: vec![C64::default(); size] };
    let bm = &b.b;
    let balpha: Vec<C64> = (0..d).map(|i| (0..d).map(|j| bm[(i, j)] * alpha[j]).sum()).collect();
    table.values[0] = r(1.0);
    for lin in 1..size {
        let m = table.unravel(lin);
        let i = m.iter().position(|&x| x > 0).expect("nonzero index");
        let mut p = m.clone();
        p[i] -= 1;
        let hp = table.get(&p).expect("in box");
        let mut v = balpha[i] * hp;
        for j in 0..d {
            if p[j] == 0 || bm[(i, j)] == C64::default() {
                continue;
            }
            let mut q = p.clone();
            q[j] -= 1;
            v -= bm[(i, j)] * p[j] as f64 * table.get(&q).expect("in box");
        }
        table.values[lin] = v;
    }
    Ok(table)
}

/// H_n(α).
pub fn evaluate(b: &DefiningMatrix, n: &[u32], alpha: &[C64]) -> Result<C64> {
    b.check(n, Some(alpha))?;
    Ok(evaluate_table(b, n, alpha)?.get(n).expect("target in box"))
}

/// H_n(0) as a sum over perfect matchings of the index multiset, each pair (i, j)
/// weighted by −B_ij.
pub fn evaluate_at_zero(b: &DefiningMatrix, n: &[u32]) -> Result<C64> {
    b.check(n, None)?;
    let mut slots: Vec<usize> = Vec::new();
    for (i, &k) in n.iter().enumerate() {
        slots.extend(std::iter::repeat_n(i, k as usize));
    }
    if slots.len() % 2 == 1 {
        return Ok(C64::default());
    }
    Ok(matchings(&b.b, &mut slots))
}

fn matchings(b: &CMatrix, rest: &mut Vec<usize>) -> C64 {
    if rest.is_empty() {
        return r(1.0);
    }
    let first = rest.remove(0);
    let mut acc = C64::default();
    for k in 0..rest.len() {
        let w = -b[(first, rest[k])];
        if w != C64::default() {
            let partner = rest.remove(k);
            acc += w * matchings(b, rest);
            rest.insert(k, partner);
        }
    }
    rest.insert(0, first);
    acc
}

/// H_{n+e_i}(α) from Σ_j B_ij α_j H_n − Σ_j B_ij n_j H_{n−e_j}.
pub fn recursion_step(b: &DefiningMatrix, n: &[u32], i: usize, alpha: &[C64]) -> Result<C64> {
    b.check(n, Some(alpha))?;
    if i >= b.dim() {
        return Err(Error::Dimension(format!("index {i} out of range")));
    }
    let table = evaluate_table(b, n, alpha)?;
    let bm = &b.b;
    let mut v = C64::default();
    for j in 0..b.dim() {
        v += bm[(i, j)] * alpha[j] * table.get(n).expect("in box");
        if n[j] > 0 {
            let mut q = n.to_vec();
            q[j] -= 1;
            v -= bm[(i, j)] * n[j] as f64 * table.get(&q).expect("in box");
        }
    }
    Ok(v)
}

/// Right side of ∂_{α_i} H_n = Σ_j B_ij n_j H_{n−e_j}.
pub fn derivative(b: &DefiningMatrix, n: &[u32], i: usize, alpha: &[C64]) -> Result<C64> {
    b.check(n, Some(alpha))?;
    if i >= b.dim() {
        return Err(Error::Dimension(format!("index {i} out of range")));
    }
    let table = evaluate_table(b, n, alpha)?;
    let mut v = C64::default();
    for j in 0..b.dim() {
        if n[j] > 0 {
            let mut q = n.to_vec();
            q[j] -= 1;
            v += b.b[(i, j)] * n[j] as f64 * table.get(&q).expect("in box");
        }
    }
    Ok(v)
}

/// Relative residual between [`derivative`] and a central-difference stencil that is
/// exact for polynomials of degree |n|.
pub fn recursion_differential(b: &DefiningMatrix, n: &[u32], i: usize, alpha: &[C64]) -> Result<f64> {
    let rhs = derivative(b, n, i, alpha)?;
    let half = (n.iter().sum::<u32>() as usize).div_ceil(2).max(1);
    let h = 0.25;
    let fk = |k: i64| -> Result<C64> {
        let mut a = alpha.to_vec();
        a[i] += h * k as f64;
        evaluate(b, n, &a)
    };
    let fact = |x: usize| linalg::factorial(x as u32);
    let mut lhs = C64::default();
    for k in 1..=half {
        let w = if k % 2 == 1 { 1.0 } else { -1.0 } * fact(half).powi(2) / (k as f64 * fact(half - k) * fact(half + k));
        lhs += (fk(k as i64)? - fk(-(k as i64))?) * w;
    }
    lhs /= h;
    let scale = rhs.norm().max(lhs.norm()).max(1.0);
    Ok((lhs - rhs).norm() / scale)
}

/// exp[(α,Bβ) − ½(β,Bβ)].
pub fn generating_function(b: &DefiningMatrix, alpha: &[C64], beta: &[C64]) -> Result<C64> {
    let d = b.dim();
    if alpha.len() != d || beta.len() != d {
        return Err(Error::Dimension("argument length".into()));
    }
    let mut e = C64::default();
    for i in 0..d {
        for j in 0..d {
            e += b.b[(i, j)] * beta[j] * (alpha[i] - 0.5 * beta[i]);
        }
    }
    Ok(e.exp())
}

/// Σ_{|n| ≤ max_total} βⁿ/n! H_n(α).
pub fn generating_series(b: &DefiningMatrix, alpha: &[C64], beta: &[C64], max_total: u32) -> Result<C64> {
    let d = b.dim();
    if beta.len() != d {
        return Err(Error::Dimension("argument length".into()));
    }
    let table = evaluate_table(b, &vec![max_total; d], alpha)?;
    let mut acc = C64::default();
    for (m, h) in table.iter() {
        if m.iter().sum::<u32>() > max_total {
            continue;
        }
        let mut w = r(1.0);
        for (k, &mk) in m.iter().enumerate() {
            w *= beta[k].powu(mk) / linalg::factorial(mk);
        }
        acc += w * h;
    }
    Ok(acc)
}

fn real_part(b: &DefiningMatrix) -> Result<DMatrix<f64>> {
    if b.b.iter().any(|z| z.im.abs() > TOL) {
        return Err(Error::Domain("orthogonality needs a real defining matrix".into()));
    }
    let re = b.b.map(|z| z.re);
    if re.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(re)
}

/// Normalisation in the published form 2^{|n|} Π B_ii^{n_i} n_i! |B/π|^{−½}.
pub fn orthogonality_norm(b: &DefiningMatrix, n: &[u32]) -> Result<f64> {
    let re = real_part(b)?;
    b.check(n, None)?;
    let d = re.nrows();
    let det = (re.clone() / PI).determinant();
    let total: u32 = n.iter().sum();
    let mut v = 2f64.powi(total as i32) / det.sqrt();
    for k in 0..d {
        v *= re[(k, k)].powi(n[k] as i32) * linalg::factorial(n[k]);
    }
    Ok(v)
}

/// Π B_ii^{n_i} n_i! |B/2π|^{−½}: the norm under the weight e^{−½(x,Bx)}, exact for diagonal B.
pub fn orthogonality_norm_weighted(b: &DefiningMatrix, n: &[u32]) -> Result<f64> {
    let re = real_part(b)?;
    b.check(n, None)?;
    let det = (re.clone() / (2.0 * PI)).determinant();
    let mut v = 1.0 / det.sqrt();
    for k in 0..re.nrows() {
        v *= re[(k, k)].powi(n[k] as i32) * linalg::factorial(n[k]);
    }
    Ok(v)
}

/// Gauss–Hermite nodes and weights for ∫e^{−y²}f(y)dy (Golub–Welsch).
pub fn gauss_hermite(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(count, count);
    for k in 1..count {
        let v = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = v;
        j[(k - 1, k)] = v;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..count).map(|k| (eig.eigenvalues[k], PI.sqrt() * eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// ∫ e^{−½(x,Bx)} H_n(x) H_m(x) dx over ℝ^d by tensor Gauss–Hermite quadrature (d ≤ 2).
pub fn orthogonality_quadrature(b: &DefiningMatrix, n: &[u32], m: &[u32], nodes: usize) -> Result<f64> {
    let re = real_part(b)?;
    let d = re.nrows();
    if d > 2 {
        return Err(Error::Unsupported("quadrature is limited to d ≤ 2".into()));
    }
    b.check(n, None)?;
    b.check(m, None)?;
    // x = √2 C y with Cᵀ B C = 1, C = L^{−T}.
    let l = re.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let cmat = l.transpose().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let jac = 2f64.powf(d as f64 / 2.0) * cmat.determinant().abs();
    let (y, w) = gauss_hermite(nodes);
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let yv = nalgebra::DVector::from_iterator(d, idx.iter().map(|&k| y[k]));
        let x = (&cmat * yv) * 2f64.sqrt();
        let xa: Vec<C64> = x.iter().map(|&v| r(v)).collect();
        let hn = evaluate(b, n, &xa)?;
        let hm = evaluate(b, m, &xa)?;
        let weight: f64 = idx.iter().map(|&k| w[k]).product();
        acc += weight * (hn * hm).re;
        let mut k = 0;
        loop {
            if k == d {
                return Ok(acc * jac);
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Principal-axis reduction of a real symmetric defining matrix.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Rows are eigenvectors, so Oᵀ diag(scales) O = B.
    pub o: DMatrix<f64>,
    pub scales: Vec<f64>,
    /// Number of non-vanishing one-dimensional factors.
    pub rank: usize,
}

pub fn reduce(b: &DMatrix<f64>) -> Result<Reduction> {
    if !b.is_square() {
        return Err(Error::Dimension("defining matrix must be square".into()));
    }
    let asym = (b - b.transpose()).amax();
    if asym > TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let d = b.nrows();
    let is_diag = (0..d).all(|i| (0..d).all(|j| i == j || b[(i, j)] == 0.0));
    let (o, scales) = if is_diag {
        (DMatrix::identity(d, d), (0..d).map(|i| b[(i, i)]).collect::<Vec<_>>())
    } else {
        let eig = SymmetricEigen::new(b.clone());
        (eig.eigenvectors.transpose(), eig.eigenvalues.iter().copied().collect())
    };
    let rank = scales.iter().filter(|s| s.abs() > 1e-10).count();
    Ok(Reduction { o, scales, rank })
}

/// ⟨n|Û|k⟩ for a passive map U as H^R_{(k,n)}(0)/√(k! n!), R = [[0, −U], [−Uᵀ, 0]].
pub fn transition_amplitude(u: &CMatrix, k: &[u32], n: &[u32]) -> Result<C64> {
    let d = u.nrows();
    if !u.is_square() || k.len() != d || n.len() != d {
        return Err(Error::Dimension("transition amplitude shapes".into()));
    }
    if k.iter().sum::<u32>() != n.iter().sum::<u32>() {
        return Ok(C64::default());
    }
    let mut rmat = CMatrix::zeros(2 * d, 2 * d);
    rmat.view_mut((0, d), (d, d)).copy_from(&(-u));
    rmat.view_mut((d, 0), (d, d)).copy_from(&(-u.transpose()));
    let def = DefiningMatrix::new(rmat)?.with_max_degree(u32::MAX);
    let idx: Vec<u32> = k.iter().chain(n.iter()).copied().collect();
    let norm: f64 = idx.iter().map(|&x| linalg::factorial(x)).product();
    Ok(evaluate_at_zero(&def, &idx)? / norm.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn sample() -> DefiningMatrix {
        DefiningMatrix::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.2, 0.1),
                c(0.3, -0.2),
                c(0.1, 0.0),
                c(0.3, -0.2),
                c(0.8, 0.0),
                c(-0.2, 0.4),
                c(0.1, 0.0),
                c(-0.2, 0.4),
                c(1.5, -0.3),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn low_orders() {
        let b = sample();
        let a = [c(0.3, 0.2), c(-0.4, 0.1), c(0.5, -0.6)];
        assert_eq!(evaluate(&b, &[0, 0, 0], &a).unwrap(), r(1.0));
        let h = evaluate(&b, &[1, 0, 0], &a).unwrap();
        let want: C64 = (0..3).map(|j| b.matrix()[(0, j)] * a[j]).sum();
        assert!((h - want).norm() < 1e-14);
        let z = [C64::default(); 3];
        assert!((evaluate(&b, &[1, 1, 0], &z).unwrap() + b.matrix()[(0, 1)]).norm() < 1e-15);
    }

    #[test]
    fn one_dimensional_matches_hermite() {
        // He_3(x) = x³ − 3x at B = 1
        let b = DefiningMatrix::new(CMatrix::from_element(1, 1, r(1.0))).unwrap();
        let x = 0.7;
        let h = evaluate(&b, &[3], &[r(x)]).unwrap();
        assert!((h.re - (x * x * x - 3.0 * x)).abs() < 1e-14);
    }

    #[test]
    fn finite_difference_definition() {
        // (−1)^{|n|} e^{½αBα} ∂ⁿ e^{−½αBα} for n = (2,1,0) by nested central differences
        let b = sample();
        let a = [c(0.2, 0.0), c(-0.1, 0.0), c(0.3, 0.0)];
        let g = |x: [C64; 3]| -> C64 {
            let mut q = C64::default();
            for i in 0..3 {
                for j in 0..3 {
                    q += x[i] * b.matrix()[(i, j)] * x[j];
                }
            }
            (-0.5 * q).exp()
        };
        let h = 1e-3;
        let d2 = |x: [C64; 3]| {
            let mut p = x;
            p[0] += h;
            let mut m = x;
            m[0] -= h;
            (g(p) - 2.0 * g(x) + g(m)) / (h * h)
        };
        let mut p = a;
        p[1] += h;
        let mut m = a;
        m[1] -= h;
        let deriv = (d2(p) - d2(m)) / (2.0 * h);
        let want = -deriv / g(a);
        let got = evaluate(&b, &[2, 1, 0], &a).unwrap();
        assert!((got - want).norm() / got.norm() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn zero_value_by_matchings() {
        let b = sample();
        let z = [C64::default(); 3];
        for n in [[1, 0, 0], [2, 0, 0], [1, 1, 0], [2, 1, 1], [2, 2, 2], [3, 1, 0], [1, 2, 1]] {
            let a = evaluate_at_zero(&b, &n).unwrap();
            let e = evaluate(&b, &n, &z).unwrap();
            assert!((a - e).norm() < 1e-12, "{n:?}");
        }
        assert_eq!(evaluate_at_zero(&b, &[1, 1, 1]).unwrap(), C64::default());
        assert!((evaluate_at_zero(&b, &[2, 0, 0]).unwrap() + b.matrix()[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn recursions() {
        let b = sample();
        let a = [c(0.3, -0.1), c(0.2, 0.5), c(-0.7, 0.2)];
        for n in [[0, 0, 0], [1, 2, 0], [2, 1, 2]] {
            for i in 0..3 {
                let mut up = n;
                up[i] += 1;
                let s = recursion_step(&b, &n, i, &a).unwrap();
                assert!((s - evaluate(&b, &up, &a).unwrap()).norm() < 1e-10);
                let rd = recursion_differential(&b, &n, i, &a).unwrap();
                assert!(rd < 1e-9, "{n:?} {i} {rd}");
            }
        }
    }

    #[test]
    fn generating_identity() {
        let b = sample();
        let a = [c(0.3, -0.1), c(0.2, 0.5), c(-0.7, 0.2)];
        let beta = [c(0.01, 0.02), c(-0.02, 0.0), c(0.015, -0.01)];
        let s = generating_series(&b, &a, &beta, 6).unwrap();
        let g = generating_function(&b, &a, &beta).unwrap();
        assert!((s - g).norm() < 1e-12);
    }

    #[test]
    fn weighted_norm_matches_quadrature_for_diagonal() {
        let b = DefiningMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.7])).unwrap();
        for n in [[0, 0], [1, 0], [2, 1], [3, 2]] {
            let q = orthogonality_quadrature(&b, &n, &n, 40).unwrap();
            let w = orthogonality_norm_weighted(&b, &n).unwrap();
            assert!((q - w).abs() / w < 1e-10, "{n:?}: {q} vs {w}");
        }
        let off = orthogonality_quadrature(&b, &[1, 0], &[0, 1], 40).unwrap();
        assert!(off.abs() < 1e-12);
    }

    #[test]
    fn published_norm_differs_by_factor() {
        let b = DefiningMatrix::from_real(&DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();
        let p = orthogonality_norm(&b, &[1]).unwrap();
        let w = orthogonality_norm_weighted(&b, &[1]).unwrap();
        // 2^{|n|} · 2^{−d/2} apart
        assert!((p / w - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn not_positive_definite() {
        let b = DefiningMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(matches!(orthogonality_norm(&b, &[1, 0]), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn reduction() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        assert_eq!(reduce(&d).unwrap().o, DMatrix::identity(2, 2));
        let r1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(reduce(&r1).unwrap().rank, 1);
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.0, 0.4, -0.1, 0.4, 1.5]);
        let red = reduce(&g).unwrap();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(red.scales.clone()));
        assert!((red.o.transpose() * lam * &red.o - &g).amax() < 1e-10);
    }

    #[test]
    fn transition_amplitudes_of_beam_splitter() {
        let h = 0.5f64.sqrt();
        let u = CMatrix::from_row_slice(2, 2, &[r(h), r(h), r(h), r(-h)]);
        let a = transition_amplitude(&u, &[1, 1], &[2, 0]).unwrap();
        assert!((a - r(h)).norm() < 1e-14);
        let hom = transition_amplitude(&u, &[1, 1], &[1, 1]).unwrap();
        assert!(hom.norm() < 1e-14);
        assert_eq!(transition_amplitude(&u, &[1, 0], &[1, 1]).unwrap(), C64::default());
    }

    #[test]
    fn dimension_and_degree_guards() {
        let b = sample();
        assert!(evaluate(&b, &[1, 0], &[r(0.0); 3]).is_err());
        assert!(evaluate(&b.clone().with_max_degree(2), &[2, 1, 0], &[r(0.0); 3]).is_err());
        assert!(DefiningMatrix::new(CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)])).is_err());
    }
}
