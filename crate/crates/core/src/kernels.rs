//! Complex Bergman kernels (closed form on disks, basis-truncated on any
//! planar domain) and the bicomplex kernels `K`, `K̃`, `K̂`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{BiComplex, Complex};
use crate::error::{Error, Result};
use crate::field::{FieldClass, ScalarField};
use crate::quadrature::{build_rule, PlanarDomain, ProductDomain, QuadratureRule};

/// Gram condition estimate above which a basis is refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Relative distance to the boundary below which closed-form disk kernels
/// refuse to evaluate.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// `1 / (π (1 − z w̄)²)`, the Bergman kernel of the unit disk.
pub fn disk_kernel(z: Complex, w: Complex) -> Result<Complex> {
    disk_kernel_at(Complex::new(0.0, 0.0), 1.0, z, w)
}

/// `R² / (π (R² − (z − c) conj(w − c))²)`, the Bergman kernel of the disk
/// of radius `R` about `c`.
pub fn disk_kernel_at(center: Complex, radius: f64, z: Complex, w: Complex) -> Result<Complex> {
    for p in [z, w] {
        if (p - center).norm() >= radius * (1.0 - BOUNDARY_GUARD) || !p.is_finite() {
            return Err(Error::OutsideDomain(format!(
                "{p} (disk about {center}, radius {radius})"
            )));
        }
    }
    let r2 = radius * radius;
    let d = Complex::new(r2, 0.0) - (z - center) * (w - center).conj();
    Ok(Complex::new(r2 / PI, 0.0) / (d * d))
}

/// Polynomials orthonormal for a discrete inner product `Σ w_i f(z_i) conj(g(z_i))`.
///
/// Built from the scaled monomials `t^j`, `t = (z − c)/s`, `j < N`, by a
/// Cholesky factorization of their Gram matrix with symmetric pivoting.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    center: Complex,
    scale: f64,
    /// Monomial exponent of each pivot position.
    perm: Vec<usize>,
    /// Row `k` holds the coefficients of `φ_k` against `t^{perm[j]}`, `j ≤ k`.
    coeffs: Vec<Vec<Complex>>,
    condition: f64,
}

impl OrthoBasis {
    /// Orthonormalizes the first `n` monomials against `rule`.
    pub fn on_rule(dom: &PlanarDomain, rule: &QuadratureRule, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "basis size must be at least 1".into(),
            ));
        }
        let center = dom.center();
        let scale = match *dom {
            PlanarDomain::Disk { radius, .. } => radius,
            PlanarDomain::Rectangle { lo, hi } => (hi - lo).norm() * 0.5,
        };
        let mut gram = vec![vec![Complex::new(0.0, 0.0); n]; n];
        let mut pows = vec![Complex::new(0.0, 0.0); n];
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            fill_powers((z - center) / scale, &mut pows);
            for m in 0..n {
                let pm = pows[m] * *w;
                for (k, g) in gram[m].iter_mut().enumerate().take(m + 1) {
                    *g += pm * pows[k].conj();
                }
            }
        }
        for m in 0..n {
            for k in m + 1..n {
                gram[m][k] = gram[k][m].conj();
            }
        }
        let (perm, l, condition) = factor(gram.clone());
        if !(condition <= MAX_GRAM_CONDITION) {
            let largest_stable_n = (1..n)
                .rev()
                .find(|&k| {
                    let lead = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
                    factor(lead).2 <= MAX_GRAM_CONDITION
                })
                .unwrap_or(0);
            return Err(Error::IllConditioned {
                condition,
                largest_stable_n,
            });
        }
        // coeffs = L⁻¹ by forward substitution on the identity.
        let mut inv = vec![vec![Complex::new(0.0, 0.0); n]; n];
        for col in 0..n {
            for row in col..n {
                let mut s = if row == col {
                    Complex::new(1.0, 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
                for k in col..row {
                    s -= l[row][k] * inv[k][col];
                }
                inv[row][col] = s / l[row][row];
            }
        }
        let coeffs = inv.into_iter().enumerate().map(|(k, mut r)| {
            r.truncate(k + 1);
            r
        });
        Ok(OrthoBasis {
            center,
            scale,
            perm,
            coeffs: coeffs.collect(),
            condition,
        })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Condition estimate `(max L_ii / min L_ii)²` of the monomial Gram matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Writes `φ_0(z) .. φ_{N−1}(z)` into `out`.
    pub fn eval_all(&self, z: Complex, out: &mut [Complex]) {
        let n = self.len();
        let mut pows = vec![Complex::new(0.0, 0.0); n];
        fill_powers((z - self.center) / self.scale, &mut pows);
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.coeffs[k];
            let mut s = Complex::new(0.0, 0.0);
            for (j, c) in row.iter().enumerate() {
                s += c * pows[self.perm[j]];
            }
            *o = s;
        }
    }

    pub fn values(&self, z: Complex) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); self.len()];
        self.eval_all(z, &mut out);
        out
    }
}

fn fill_powers(t: Complex, out: &mut [Complex]) {
    let mut p = Complex::new(1.0, 0.0);
    for o in out.iter_mut() {
        *o = p;
        p *= t;
    }
}

/// Pivoted Cholesky factor together with the condition estimate
/// `(max L_ii / min L_ii)²`.
fn factor(gram: Vec<Vec<Complex>>) -> (Vec<usize>, Vec<Vec<Complex>>, f64) {
    let n = gram.len();
    let (perm, l) = pivoted_cholesky(gram);
    let diag = (0..n).map(|i| l[i][i].re);
    let hi = diag.clone().fold(0.0, f64::max);
    let lo = diag.fold(f64::INFINITY, f64::min);
    let cond = if lo > 0.0 {
        (hi / lo).powi(2)
    } else {
        f64::INFINITY
    };
    (perm, l, cond)
}

/// Cholesky `P G Pᵀ = L L^H`, pivoting on the largest remaining diagonal.
/// Returns the pivot order and `L`. Non-positive pivots are left as zero.
fn pivoted_cholesky(mut g: Vec<Vec<Complex>>) -> (Vec<usize>, Vec<Vec<Complex>>) {
    let n = g.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![Complex::new(0.0, 0.0); n]; n];
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| g[a][a].re.total_cmp(&g[b][b].re))
            .unwrap();
        if p != k {
            g.swap(k, p);
            for row in g.iter_mut() {
                row.swap(k, p);
            }
            l.swap(k, p);
            perm.swap(k, p);
        }
        let d = g[k][k].re;
        if d <= 0.0 {
            break;
        }
        let lkk = d.sqrt();
        l[k][k] = Complex::new(lkk, 0.0);
        for i in k + 1..n {
            l[i][k] = g[i][k] / lkk;
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let v = l[i][k] * l[j][k].conj();
                g[i][j] -= v;
                if i != j {
                    g[j][i] = g[i][j].conj();
                }
            }
            g[i][i].im = 0.0;
        }
    }
    (perm, l)
}

/// Where a complex kernel comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    ClosedFormDisk,
    BasisTruncated(usize),
}

#[derive(Debug)]
enum KernelRepr {
    Disk { center: Complex, radius: f64 },
    Basis(OrthoBasis),
}

/// Reproducing kernel of the Bergman space of one planar domain.
#[derive(Clone, Debug)]
pub struct ComplexKernel {
    domain: PlanarDomain,
    repr: Arc<KernelRepr>,
}

impl ComplexKernel {
    /// Closed-form kernel of a disk.
    pub fn closed_form(dom: &PlanarDomain) -> Result<Self> {
        match *dom {
            PlanarDomain::Disk { center, radius } => Ok(ComplexKernel {
                domain: dom.clone(),
                repr: Arc::new(KernelRepr::Disk { center, radius }),
            }),
            PlanarDomain::Rectangle { .. } => Err(Error::InvalidDomain(
                "no closed-form Bergman kernel for rectangles".into(),
            )),
        }
    }

    /// `k_N(z, w) = Σ φ_n(z) conj(φ_n(w))` for an orthonormal basis.
    pub fn from_basis(dom: &PlanarDomain, basis: OrthoBasis) -> Self {
        ComplexKernel {
            domain: dom.clone(),
            repr: Arc::new(KernelRepr::Basis(basis)),
        }
    }

    /// The closed form on disks; a truncated basis expansion with `n` terms
    /// otherwise.
    pub fn for_domain(dom: &PlanarDomain, n: usize) -> Result<Self> {
        match dom {
            PlanarDomain::Disk { .. } => ComplexKernel::closed_form(dom),
            PlanarDomain::Rectangle { .. } => basis_kernel(dom, n),
        }
    }

    pub fn domain(&self) -> &PlanarDomain {
        &self.domain
    }

    pub fn source(&self) -> KernelSource {
        match &*self.repr {
            KernelRepr::Disk { .. } => KernelSource::ClosedFormDisk,
            KernelRepr::Basis(b) => KernelSource::BasisTruncated(b.len()),
        }
    }

    pub fn basis(&self) -> Option<&OrthoBasis> {
        match &*self.repr {
            KernelRepr::Basis(b) => Some(b),
            KernelRepr::Disk { .. } => None,
        }
    }

    pub fn eval(&self, z: Complex, w: Complex) -> Result<Complex> {
        match &*self.repr {
            KernelRepr::Disk { center, radius } => disk_kernel_at(*center, *radius, z, w),
            KernelRepr::Basis(b) => {
                let (pz, pw) = (b.values(z), b.values(w));
                Ok(pz.iter().zip(&pw).map(|(a, c)| a * c.conj()).sum())
            }
        }
    }
}

/// Basis-truncated Bergman kernel of `dom` with `n` orthonormal polynomials,
/// using a quadrature rule of order `2n`.
pub fn basis_kernel(dom: &PlanarDomain, n: usize) -> Result<ComplexKernel> {
    let rule = build_rule(dom, (2 * n).max(2))?;
    Ok(ComplexKernel::from_basis(
        dom,
        OrthoBasis::on_rule(dom, &rule, n)?,
    ))
}

/// Which bicomplex kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKernelKind {
    Bergman,
    Tilde,
    Hat,
}

impl std::str::FromStr for BcKernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bergman" => Ok(BcKernelKind::Bergman),
            "tilde" => Ok(BcKernelKind::Tilde),
            "hat" => Ok(BcKernelKind::Hat),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel kind `{other}`"
            ))),
        }
    }
}

/// One planar factor of an idempotent slot of a bicomplex kernel.
#[derive(Clone, Debug)]
pub enum PlaneFactor {
    /// A constant, independent of both arguments.
    Const(f64),
    /// `k(z, w)`, or `k(z̄, w̄)` when `conj_args` is set.
    Kernel { k: ComplexKernel, conj_args: bool },
}

impl PlaneFactor {
    pub fn eval(&self, z: Complex, w: Complex) -> Result<Complex> {
        match self {
            PlaneFactor::Const(c) => Ok(Complex::new(*c, 0.0)),
            PlaneFactor::Kernel {
                k,
                conj_args: false,
            } => k.eval(z, w),
            PlaneFactor::Kernel { k, conj_args: true } => {
                let (zc, wc) = (z.conj(), w.conj());
                for p in [zc, wc] {
                    if !k.domain().contains(p) {
                        return Err(Error::OutsideDomain(format!(
                            "conjugated argument {p} leaves the domain"
                        )));
                    }
                }
                k.eval(zc, wc)
            }
        }
    }
}

/// A bicomplex kernel whose idempotent slots are products of planar factors:
/// slot `s` is `factors[s][0](z1, w1) · factors[s][1](z2, w2)`.
#[derive(Clone, Debug)]
pub struct BcKernel {
    kind: BcKernelKind,
    domain: ProductDomain,
    factors: [[PlaneFactor; 2]; 2],
}

impl BcKernel {
    /// A kernel from explicit slot factors.
    pub fn from_factors(
        kind: BcKernelKind,
        domain: &ProductDomain,
        factors: [[PlaneFactor; 2]; 2],
    ) -> Self {
        BcKernel {
            kind,
            domain: domain.clone(),
            factors,
        }
    }

    pub fn kind(&self) -> BcKernelKind {
        self.kind
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn factors(&self) -> &[[PlaneFactor; 2]; 2] {
        &self.factors
    }

    pub fn try_eval(&self, z: BiComplex, w: BiComplex) -> Result<BiComplex> {
        let [s1, s2] = &self.factors;
        let b1 = s1[0].eval(z.b1, w.b1)? * s1[1].eval(z.b2, w.b2)?;
        let b2 = s2[0].eval(z.b1, w.b1)? * s2[1].eval(z.b2, w.b2)?;
        Ok(BiComplex::new(b1, b2))
    }

    /// `Z ↦ K(Z, W)`. Points where the kernel cannot be evaluated map to NaN,
    /// which integration reports as a non-finite sample.
    pub fn section(&self, w: BiComplex) -> ScalarField {
        let k = self.clone();
        let nan = BiComplex::new(Complex::new(f64::NAN, 0.0), Complex::new(f64::NAN, 0.0));
        ScalarField::new(
            &format!("{:?}(.,{w})", self.kind),
            FieldClass::Custom,
            move |z| k.try_eval(z, w).unwrap_or(nan),
        )
    }
}

/// `K(Z, W) = k1(z1, w1)/|Ω2| e + k2(z2, w2)/|Ω1| e†`, the kernel of the
/// bicomplex Bergman space.
pub fn bc_bergman_kernel(dom: &ProductDomain, k1: ComplexKernel, k2: ComplexKernel) -> BcKernel {
    let (a1, a2) = (dom.omega1.area(), dom.omega2.area());
    let f = |k: &ComplexKernel| PlaneFactor::Kernel {
        k: k.clone(),
        conj_args: false,
    };
    BcKernel {
        kind: BcKernelKind::Bergman,
        domain: dom.clone(),
        factors: [
            [f(&k1), PlaneFactor::Const(1.0 / a2)],
            [PlaneFactor::Const(1.0 / a1), f(&k2)],
        ],
    }
}

/// `K̃(Z, W) = k1(z1, w1) k2(z2, w2)` in both slots, the kernel of the space
/// annihilated by `∂/∂Z*` and `∂/∂Z̄`.
pub fn tilde_kernel(dom: &ProductDomain, k1: ComplexKernel, k2: ComplexKernel) -> BcKernel {
    let f = |k: &ComplexKernel| PlaneFactor::Kernel {
        k: k.clone(),
        conj_args: false,
    };
    BcKernel {
        kind: BcKernelKind::Tilde,
        domain: dom.clone(),
        factors: [[f(&k1), f(&k2)], [f(&k1), f(&k2)]],
    }
}

/// `K̂(Z, W) = k1(z1, w1) k2(z̄2, w̄2) e + k1(z̄1, w̄1) k2(z2, w2) e†`, the
/// kernel of the space annihilated by `∂/∂Z*` and `∂/∂Z†`.
///
/// Evaluation fails with `OutsideDomain` when a conjugated argument leaves
/// its planar domain.
pub fn hat_kernel(dom: &ProductDomain, k1: ComplexKernel, k2: ComplexKernel) -> BcKernel {
    let f = |k: &ComplexKernel, c: bool| PlaneFactor::Kernel {
        k: k.clone(),
        conj_args: c,
    };
    BcKernel {
        kind: BcKernelKind::Hat,
        domain: dom.clone(),
        factors: [[f(&k1, false), f(&k2, true)], [f(&k1, true), f(&k2, false)]],
    }
}

/// The requested kernel of `dom`, with closed-form planar kernels on disks
/// and `n`-term basis kernels on rectangles.
pub fn kernel_for(dom: &ProductDomain, kind: BcKernelKind, n: usize) -> Result<BcKernel> {
    let k1 = ComplexKernel::for_domain(&dom.omega1, n)?;
    let k2 = ComplexKernel::for_domain(&dom.omega2, n)?;
    Ok(match kind {
        BcKernelKind::Bergman => bc_bergman_kernel(dom, k1, k2),
        BcKernelKind::Tilde => tilde_kernel(dom, k1, k2),
        BcKernelKind::Hat => hat_kernel(dom, k1, k2),
    })
}
