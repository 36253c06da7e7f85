//! Orthogonal projections of `L²_k(Ω, BC)`: the product-type projection
//! `Π_PTF` and the projections onto the three reproducing-kernel spaces.
//!
//! Every projection here acts on the two idempotent components separately,
//! and on each component as a tensor product of planar operators: the
//! identity, or the orthogonal projection onto the span of finitely many
//! functions orthonormal for the planar quadrature rule. Averaging over a
//! planar domain is the projection onto constants, so `Π_PTF` fits the same
//! mould, and the kernel projections are the kernel-integral operators of
//! basis-truncated kernels:
//!
//! ```text
//! Π_PTF        e: Id ⊗ Avg2       e†: Avg1 ⊗ Id
//! Π_Hol        e: P1 ⊗ Avg2       e†: Avg1 ⊗ P2
//! Π_{*,−}      e: P1 ⊗ P2         e†: P1 ⊗ P2
//! Π_{*,†}      e: P1 ⊗ P̄2         e†: P̄1 ⊗ P2
//! ```
//!
//! with `P` the projection onto holomorphic polynomials of degree below `N`
//! and `P̄` the one onto antiholomorphic polynomials. Because the bases are
//! orthonormal for the same rule that defines the inner product, these
//! operators are exactly idempotent and self-adjoint up to rounding.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{BiComplex, Complex};
use crate::error::{Error, Result};
use crate::field::{FieldClass, FieldEval, ScalarField};
use crate::hilbert::InnerProductSpace;
use crate::kernels::{
    bc_bergman_kernel, tilde_kernel, BcKernel, BcKernelKind, ComplexKernel, OrthoBasis, PlaneFactor,
};
use crate::quadrature::{PlanarDomain, QuadratureRule, TensorGrid};
use crate::soa::{SplitMat, SplitVec};
use crate::verify::Case;

/// Default number of basis polynomials per plane.
pub const DEFAULT_BASIS: usize = 16;

const ROW_CHUNK: usize = 16;

/// Default basis size for a rule of the given order.
pub fn default_basis_size(order: usize) -> usize {
    DEFAULT_BASIS.min(order)
}

/// Which projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    /// Onto product-type functions.
    Ptf,
    /// Onto the bicomplex Bergman space `A²_Hol`.
    Hol,
    /// Onto `A²_{*,−}`, annihilated by `∂/∂Z*` and `∂/∂Z̄`.
    StarBar,
    /// Onto `A²_{*,†}`, annihilated by `∂/∂Z*` and `∂/∂Z†`.
    StarDagger,
}

impl ProjectionKind {
    pub const ALL: [ProjectionKind; 4] = [
        ProjectionKind::Ptf,
        ProjectionKind::Hol,
        ProjectionKind::StarBar,
        ProjectionKind::StarDagger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProjectionKind::Ptf => "ptf",
            ProjectionKind::Hol => "hol",
            ProjectionKind::StarBar => "star_bar",
            ProjectionKind::StarDagger => "star_dagger",
        }
    }
}

enum BasisFn {
    Constant(f64),
    Poly(OrthoBasis),
    /// `ψ_n(z) = φ_n(z̄)` with `φ` orthonormal on the conjugated rule.
    ConjPoly(OrthoBasis),
}

/// Functions orthonormal for one planar rule, with their values at the
/// rule's nodes.
struct PlaneBasis {
    f: BasisFn,
    /// `table[n]` holds `ψ_n` at every node.
    table: Vec<SplitVec>,
    /// The same values as one `len × nodes` matrix.
    mat: SplitMat,
}

impl PlaneBasis {
    fn constant(rule: &QuadratureRule) -> Self {
        let v = 1.0 / rule.weight_sum().sqrt();
        let table = vec![SplitVec::from_complex(
            rule.nodes.iter().map(|_| Complex::new(v, 0.0)),
        )];
        PlaneBasis::with_table(BasisFn::Constant(v), table)
    }

    fn poly(dom: &PlanarDomain, rule: &QuadratureRule, n: usize) -> Result<Self> {
        PlaneBasis::from_fn(BasisFn::Poly(OrthoBasis::on_rule(dom, rule, n)?), rule)
    }

    fn conj_poly(dom: &PlanarDomain, rule: &QuadratureRule, n: usize) -> Result<Self> {
        let conj_rule = QuadratureRule {
            nodes: rule.nodes.iter().map(|z| z.conj()).collect(),
            weights: rule.weights.clone(),
        };
        PlaneBasis::from_fn(
            BasisFn::ConjPoly(OrthoBasis::on_rule(&dom.conj(), &conj_rule, n)?),
            rule,
        )
    }

    fn from_fn(f: BasisFn, rule: &QuadratureRule) -> Result<Self> {
        let b = PlaneBasis {
            f,
            table: Vec::new(),
            mat: SplitMat::default(),
        };
        let vals: Vec<Vec<Complex>> = rule.nodes.iter().map(|z| b.values(*z)).collect();
        let table = (0..b.len())
            .map(|n| SplitVec::from_complex(vals.iter().map(|v| v[n])))
            .collect();
        Ok(PlaneBasis::with_table(b.f, table))
    }

    fn with_table(f: BasisFn, table: Vec<SplitVec>) -> Self {
        let mut mat = SplitMat::with_cols(table[0].len());
        for t in &table {
            mat.push_row(t);
        }
        PlaneBasis { f, table, mat }
    }

    fn len(&self) -> usize {
        match &self.f {
            BasisFn::Constant(_) => 1,
            BasisFn::Poly(b) | BasisFn::ConjPoly(b) => b.len(),
        }
    }

    fn values(&self, z: Complex) -> Vec<Complex> {
        match &self.f {
            BasisFn::Constant(v) => vec![Complex::new(*v, 0.0)],
            BasisFn::Poly(b) => b.values(z),
            BasisFn::ConjPoly(b) => b.values(z.conj()),
        }
    }

    fn at_node(&self, idx: usize) -> Vec<Complex> {
        self.table.iter().map(|t| t.get(idx)).collect()
    }

    /// `Σ_n c_n ψ_n` at every node.
    fn combine(&self, c: &[Complex]) -> SplitVec {
        let mut out = SplitVec::zeros(self.table[0].len());
        for (cn, t) in c.iter().zip(&self.table) {
            out.axpy(*cn, t);
        }
        out
    }

    /// `[Σ_j w_j v_j conj(ψ_n(z_j))]_n` for values `v` at the nodes,
    /// pre-multiplied by the weights.
    fn coefficients(&self, weighted: &SplitVec) -> Vec<Complex> {
        self.table.iter().map(|t| weighted.dot_conj(t)).collect()
    }

    fn kernel(&self, dom: &PlanarDomain) -> PlaneFactor {
        match &self.f {
            BasisFn::Constant(v) => PlaneFactor::Const(v * v),
            BasisFn::Poly(b) => PlaneFactor::Kernel {
                k: ComplexKernel::from_basis(dom, b.clone()),
                conj_args: false,
            },
            BasisFn::ConjPoly(b) => PlaneFactor::Kernel {
                k: ComplexKernel::from_basis(&dom.conj(), b.clone()),
                conj_args: true,
            },
        }
    }
}

#[derive(Clone)]
enum PlaneOp {
    Identity,
    Project(Arc<PlaneBasis>),
}

impl PlaneOp {
    fn basis(&self) -> Option<&PlaneBasis> {
        match self {
            PlaneOp::Identity => None,
            PlaneOp::Project(b) => Some(b),
        }
    }
}

struct Plan {
    grid: Arc<TensorGrid>,
    /// `slots[s] = [op on plane 1, op on plane 2]` for idempotent slot `s`.
    slots: [[PlaneOp; 2]; 2],
}

/// A structured orthogonal projection bound to one inner-product space.
#[derive(Clone)]
pub struct ProjectionOperator {
    kind: ProjectionKind,
    space: InnerProductSpace,
    plan: Arc<Plan>,
    kernel: Option<BcKernel>,
}

impl std::fmt::Debug for ProjectionOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectionOperator")
            .field("kind", &self.kind)
            .field("order", &self.space.order())
            .finish()
    }
}

impl ProjectionOperator {
    /// `Π_PTF`: averages the e-component over `Ω2` and the e†-component over `Ω1`.
    pub fn ptf(sp: &InnerProductSpace) -> Self {
        let g = sp.grid().clone();
        let avg1 = PlaneOp::Project(Arc::new(PlaneBasis::constant(&g.rule1)));
        let avg2 = PlaneOp::Project(Arc::new(PlaneBasis::constant(&g.rule2)));
        ProjectionOperator {
            kind: ProjectionKind::Ptf,
            space: sp.clone(),
            plan: Arc::new(Plan {
                grid: g,
                slots: [[PlaneOp::Identity, avg2], [avg1, PlaneOp::Identity]],
            }),
            kernel: None,
        }
    }

    /// The projection of the given kind, with `n` polynomials per plane.
    pub fn new(sp: &InnerProductSpace, kind: ProjectionKind, n: usize) -> Result<Self> {
        if kind == ProjectionKind::Ptf {
            return Ok(ProjectionOperator::ptf(sp));
        }
        let g = sp.grid().clone();
        let dom = sp.domain();
        let proj = |b: PlaneBasis| PlaneOp::Project(Arc::new(b));
        let p1 = Arc::new(PlaneBasis::poly(&dom.omega1, &g.rule1, n)?);
        let p2 = Arc::new(PlaneBasis::poly(&dom.omega2, &g.rule2, n)?);
        let (op1, op2) = (PlaneOp::Project(p1.clone()), PlaneOp::Project(p2.clone()));
        let k1 = p1.kernel(&dom.omega1);
        let k2 = p2.kernel(&dom.omega2);
        let complex = |f: PlaneFactor| match f {
            PlaneFactor::Kernel { k, .. } => k,
            PlaneFactor::Const(_) => unreachable!("polynomial bases give kernel factors"),
        };
        let (slots, kernel) = match kind {
            ProjectionKind::Hol => {
                let avg1 = proj(PlaneBasis::constant(&g.rule1));
                let avg2 = proj(PlaneBasis::constant(&g.rule2));
                (
                    [[op1, avg2], [avg1, op2]],
                    bc_bergman_kernel(dom, complex(k1), complex(k2)),
                )
            }
            ProjectionKind::StarBar => (
                [[op1.clone(), op2.clone()], [op1, op2]],
                tilde_kernel(dom, complex(k1), complex(k2)),
            ),
            ProjectionKind::StarDagger => {
                let c1 = PlaneBasis::conj_poly(&dom.omega1, &g.rule1, n)?;
                let c2 = PlaneBasis::conj_poly(&dom.omega2, &g.rule2, n)?;
                let factors = [[k1, c2.kernel(&dom.omega2)], [c1.kernel(&dom.omega1), k2]];
                (
                    [[op1, proj(c2)], [proj(c1), op2]],
                    BcKernel::from_factors(BcKernelKind::Hat, dom, factors),
                )
            }
            ProjectionKind::Ptf => unreachable!(),
        };
        Ok(ProjectionOperator {
            kind,
            space: sp.clone(),
            plan: Arc::new(Plan { grid: g, slots }),
            kernel: Some(kernel),
        })
    }

    /// The projection of the given kind with [`default_basis_size`] polynomials.
    pub fn with_default_basis(sp: &InnerProductSpace, kind: ProjectionKind) -> Result<Self> {
        ProjectionOperator::new(sp, kind, default_basis_size(sp.order()))
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    /// The basis-truncated reproducing kernel whose integral operator this
    /// projection is (`None` for `Π_PTF`).
    pub fn kernel(&self) -> Option<&BcKernel> {
        self.kernel.as_ref()
    }

    /// The projected field, evaluated lazily.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let label = format!("{}[{}]", self.kind.name(), f.label());
        let class = match self.kind {
            ProjectionKind::Ptf => FieldClass::ProductType,
            ProjectionKind::Hol => FieldClass::BcHolomorphic,
            _ => FieldClass::KerStar,
        };
        ScalarField::from_eval(
            &label,
            class,
            Projected {
                plan: self.plan.clone(),
                source: f.clone(),
                tables: OnceLock::new(),
            },
        )
    }
}

/// Per-slot coefficient tables of a projected field.
#[derive(Default)]
struct SlotTables {
    /// Plane-2 coefficients of every grid row: `d[a][n]`.
    rows: Vec<Vec<Complex>>,
    /// The same, one vector per `n` over the rows.
    row_cols: Vec<SplitVec>,
    /// Plane-1 coefficients along every plane-2 node, one vector per `m`.
    cols: Vec<SplitVec>,
    /// Full coefficients `c[m][n]` when both planes project.
    coeffs: Vec<Vec<Complex>>,
}

struct Projected {
    plan: Arc<Plan>,
    source: ScalarField,
    tables: OnceLock<Option<[SlotTables; 2]>>,
}

fn slot(v: &BiComplex, s: usize) -> Complex {
    if s == 0 {
        v.b1
    } else {
        v.b2
    }
}

fn nan_row(out: &mut [BiComplex]) {
    out.fill(BiComplex::new(
        Complex::new(f64::NAN, 0.0),
        Complex::new(f64::NAN, 0.0),
    ));
}

struct ChunkPart {
    rows: [Vec<Vec<Complex>>; 2],
    cols: [Option<SplitMat>; 2],
}

impl Projected {
    fn tables(&self) -> Option<&[SlotTables; 2]> {
        self.tables.get_or_init(|| self.build_tables()).as_ref()
    }

    /// One pass over the source on the grid.
    fn build_tables(&self) -> Option<[SlotTables; 2]> {
        let g = &self.plan.grid;
        let (n1, n2) = (g.rule1.len(), g.rule2.len());
        let slots = &self.plan.slots;
        let chunks: Vec<(usize, usize)> = (0..n1)
            .step_by(ROW_CHUNK)
            .map(|a0| (a0, (a0 + ROW_CHUNK).min(n1)))
            .collect();
        let parts: Vec<Option<ChunkPart>> = chunks
            .par_iter()
            .map(|&(a0, a1)| {
                let mut buf = vec![BiComplex::ZERO; n2];
                let mut weighted = [SplitMat::with_cols(n2), SplitMat::with_cols(n2)];
                let mut plain = [SplitMat::with_cols(n2), SplitMat::with_cols(n2)];
                let mut phi: [SplitMat; 2] = Default::default();
                for a in a0..a1 {
                    self.source.eval_grid_row(g, a, &mut buf);
                    if buf.iter().any(|v| !v.is_finite()) {
                        return None;
                    }
                    for s in 0..2 {
                        match (&slots[s][0], &slots[s][1]) {
                            (_, PlaneOp::Project(_)) => {
                                weighted[s].push_slot(&buf, s, Some(&g.rule2.weights))
                            }
                            (PlaneOp::Project(b1), PlaneOp::Identity) => {
                                plain[s].push_slot(&buf, s, None);
                                let wa = g.rule1.weights[a];
                                phi[s].cols = b1.len();
                                phi[s].push_row(&SplitVec::from_complex(
                                    b1.table.iter().map(|t| t.get(a) * wa),
                                ));
                            }
                            (PlaneOp::Identity, PlaneOp::Identity) => {}
                        }
                    }
                }
                let mut part = ChunkPart {
                    rows: [Vec::new(), Vec::new()],
                    cols: [None, None],
                };
                for s in 0..2 {
                    match (&slots[s][0], &slots[s][1]) {
                        (_, PlaneOp::Project(b2)) => {
                            let c = weighted[s].mul_conj_t(&b2.mat);
                            let e: Vec<Complex> = c.entries().collect();
                            part.rows[s] = e.chunks(b2.len()).map(|r| r.to_vec()).collect();
                        }
                        (PlaneOp::Project(_), PlaneOp::Identity) => {
                            part.cols[s] = Some(phi[s].conj_t_mul(&plain[s]))
                        }
                        (PlaneOp::Identity, PlaneOp::Identity) => {}
                    }
                }
                Some(part)
            })
            .collect();
        let parts: Vec<ChunkPart> = parts.into_iter().collect::<Option<_>>()?;
        let mut out: [SlotTables; 2] = Default::default();
        for s in 0..2 {
            let t = &mut out[s];
            t.rows = parts
                .iter()
                .flat_map(|p| p.rows[s].iter().cloned())
                .collect();
            if parts[0].cols[s].is_some() {
                let sum = pairwise_cols(parts.iter().filter_map(|p| p.cols[s].clone()).collect());
                t.cols = (0..sum.rows()).map(|m| sum.row(m)).collect();
            }
            if let Some(b2) = slots[s][1].basis() {
                t.row_cols = (0..b2.len())
                    .map(|n| SplitVec::from_complex(t.rows.iter().map(|r| r[n])))
                    .collect();
                if let Some(b1) = slots[s][0].basis() {
                    t.coeffs = (0..b1.len())
                        .map(|m| {
                            let mut w = SplitVec::zeros(n1);
                            for a in 0..n1 {
                                let c = b1.table[m].get(a) * g.rule1.weights[a];
                                w.re[a] = c.re;
                                w.im[a] = c.im;
                            }
                            t.row_cols.iter().map(|col| col.dot_conj(&w)).collect()
                        })
                        .collect();
                }
            }
        }
        Some(out)
    }

    /// Values of the source along `{z1} × rule2` when a slot needs them.
    fn source_line1(&self, z1: Complex) -> Vec<BiComplex> {
        let mut v = vec![BiComplex::ZERO; self.plan.grid.rule2.len()];
        self.source.eval_line1(&self.plan.grid, z1, &mut v);
        v
    }

    fn source_line2(&self, z2: Complex) -> Vec<BiComplex> {
        let mut v = vec![BiComplex::ZERO; self.plan.grid.rule1.len()];
        self.source.eval_line2(&self.plan.grid, z2, &mut v);
        v
    }

    fn needs_line(&self, which: usize) -> bool {
        self.plan
            .slots
            .iter()
            .any(|ops| matches!(ops[which], PlaneOp::Identity))
    }

    /// Plane-2 coefficients along `{z1} × Ω2` from source values on the line.
    fn line_coefficients(&self, line: &[BiComplex], s: usize, b2: &PlaneBasis) -> Vec<Complex> {
        b2.coefficients(&SplitVec::from_slot(
            line,
            s,
            Some(&self.plan.grid.rule2.weights),
        ))
    }

    fn line2_coefficients(&self, line: &[BiComplex], s: usize, b1: &PlaneBasis) -> Vec<Complex> {
        b1.coefficients(&SplitVec::from_slot(
            line,
            s,
            Some(&self.plan.grid.rule1.weights),
        ))
    }
}

fn pairwise_cols(mut parts: Vec<SplitMat>) -> SplitMat {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_assign(&b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_m c[m][n] φ_m` for a fixed plane-1 value vector `φ`.
fn contract_first(c: &[Vec<Complex>], phi: &[Complex]) -> Vec<Complex> {
    let n = c.first().map_or(0, |r| r.len());
    (0..n)
        .map(|k| c.iter().zip(phi).map(|(row, p)| row[k] * p).sum())
        .collect()
}

/// `Σ_n c[m][n] ψ_n` for a fixed plane-2 value vector `ψ`.
fn contract_second(c: &[Vec<Complex>], psi: &[Complex]) -> Vec<Complex> {
    c.iter().map(|row| dot(row, psi)).collect()
}

fn write_slot(out: &mut [BiComplex], s: usize, v: &SplitVec) {
    for (k, o) in out.iter_mut().enumerate() {
        let x = v.get(k);
        if s == 0 {
            o.b1 = x;
        } else {
            o.b2 = x;
        }
    }
}

impl FieldEval for Projected {
    fn eval(&self, z: BiComplex) -> BiComplex {
        let Some(t) = self.tables() else {
            return BiComplex::new(Complex::new(f64::NAN, 0.0), Complex::new(f64::NAN, 0.0));
        };
        let line1 = self.needs_line(0).then(|| self.source_line1(z.b1));
        let line2 = self.needs_line(1).then(|| self.source_line2(z.b2));
        let mut out = [Complex::new(0.0, 0.0); 2];
        for s in 0..2 {
            out[s] = match (&self.plan.slots[s][0], &self.plan.slots[s][1]) {
                (PlaneOp::Identity, PlaneOp::Identity) => slot(&self.source.eval(z), s),
                (PlaneOp::Identity, PlaneOp::Project(b2)) => dot(
                    &self.line_coefficients(line1.as_deref().unwrap(), s, b2),
                    &b2.values(z.b2),
                ),
                (PlaneOp::Project(b1), PlaneOp::Identity) => dot(
                    &self.line2_coefficients(line2.as_deref().unwrap(), s, b1),
                    &b1.values(z.b1),
                ),
                (PlaneOp::Project(b1), PlaneOp::Project(b2)) => dot(
                    &contract_first(&t[s].coeffs, &b1.values(z.b1)),
                    &b2.values(z.b2),
                ),
            };
        }
        BiComplex::new(out[0], out[1])
    }

    fn eval_grid_row(&self, grid: &TensorGrid, a: usize, out: &mut [BiComplex]) {
        if grid.id() != self.plan.grid.id() {
            return self.eval_line1(grid, grid.rule1.nodes[a], out);
        }
        let Some(t) = self.tables() else {
            return nan_row(out);
        };
        let mut line: Option<Vec<BiComplex>> = None;
        for s in 0..2 {
            let v = match (&self.plan.slots[s][0], &self.plan.slots[s][1]) {
                (PlaneOp::Identity, PlaneOp::Identity) => {
                    let l = line.get_or_insert_with(|| {
                        let mut v = vec![BiComplex::ZERO; out.len()];
                        self.source.eval_grid_row(grid, a, &mut v);
                        v
                    });
                    SplitVec::from_slot(l, s, None)
                }
                (_, PlaneOp::Project(b2)) if matches!(self.plan.slots[s][0], PlaneOp::Identity) => {
                    b2.combine(&t[s].rows[a])
                }
                (PlaneOp::Project(b1), PlaneOp::Identity) => {
                    let phi = b1.at_node(a);
                    let mut acc = SplitVec::zeros(out.len());
                    for (p, col) in phi.iter().zip(&t[s].cols) {
                        acc.axpy(*p, col);
                    }
                    acc
                }
                (PlaneOp::Project(b1), PlaneOp::Project(b2)) => {
                    b2.combine(&contract_first(&t[s].coeffs, &b1.at_node(a)))
                }
                _ => unreachable!(),
            };
            write_slot(out, s, &v);
        }
    }

    fn eval_line1(&self, grid: &TensorGrid, z1: Complex, out: &mut [BiComplex]) {
        if grid.id() != self.plan.grid.id() {
            for (o, b2) in out.iter_mut().zip(&grid.rule2.nodes) {
                *o = self.eval(BiComplex::new(z1, *b2));
            }
            return;
        }
        let Some(t) = self.tables() else {
            return nan_row(out);
        };
        let line = self.needs_line(0).then(|| self.source_line1(z1));
        for s in 0..2 {
            let v = match (&self.plan.slots[s][0], &self.plan.slots[s][1]) {
                (PlaneOp::Identity, PlaneOp::Identity) => {
                    SplitVec::from_slot(line.as_deref().unwrap(), s, None)
                }
                (PlaneOp::Identity, PlaneOp::Project(b2)) => {
                    b2.combine(&self.line_coefficients(line.as_deref().unwrap(), s, b2))
                }
                (PlaneOp::Project(b1), PlaneOp::Identity) => {
                    let phi = b1.values(z1);
                    let mut acc = SplitVec::zeros(out.len());
                    for (p, col) in phi.iter().zip(&t[s].cols) {
                        acc.axpy(*p, col);
                    }
                    acc
                }
                (PlaneOp::Project(b1), PlaneOp::Project(b2)) => {
                    b2.combine(&contract_first(&t[s].coeffs, &b1.values(z1)))
                }
            };
            write_slot(out, s, &v);
        }
    }

    fn eval_line2(&self, grid: &TensorGrid, z2: Complex, out: &mut [BiComplex]) {
        if grid.id() != self.plan.grid.id() {
            for (o, b1) in out.iter_mut().zip(&grid.rule1.nodes) {
                *o = self.eval(BiComplex::new(*b1, z2));
            }
            return;
        }
        let Some(t) = self.tables() else {
            return nan_row(out);
        };
        let line = self.needs_line(1).then(|| self.source_line2(z2));
        for s in 0..2 {
            let v = match (&self.plan.slots[s][0], &self.plan.slots[s][1]) {
                (PlaneOp::Identity, PlaneOp::Identity) => {
                    SplitVec::from_slot(line.as_deref().unwrap(), s, None)
                }
                (PlaneOp::Identity, PlaneOp::Project(b2)) => {
                    let psi = b2.values(z2);
                    let mut acc = SplitVec::zeros(out.len());
                    for (p, col) in psi.iter().zip(&t[s].row_cols) {
                        acc.axpy(*p, col);
                    }
                    acc
                }
                (PlaneOp::Project(b1), PlaneOp::Identity) => {
                    b1.combine(&self.line2_coefficients(line.as_deref().unwrap(), s, b1))
                }
                (PlaneOp::Project(b1), PlaneOp::Project(b2)) => {
                    b1.combine(&contract_second(&t[s].coeffs, &b2.values(z2)))
                }
            };
            write_slot(out, s, &v);
        }
    }
}

/// `Π_PTF F`: `g1(z1) = (1/|Ω2|) ∫_{Ω2} f1(z1, w2) dA(w2)` and
/// `g2(z2) = (1/|Ω1|) ∫_{Ω1} f2(w1, z2) dA(w1)`.
pub fn project_ptf(sp: &InnerProductSpace, f: &ScalarField) -> ScalarField {
    ProjectionOperator::ptf(sp).apply(f)
}

/// `[⟨F, K(·, W_p)⟩]_p` in one pass over the grid.
pub fn inner_kernel_sections(
    sp: &InnerProductSpace,
    f: &ScalarField,
    k: &BcKernel,
    ws: &[BiComplex],
) -> Result<Vec<BiComplex>> {
    if ws.is_empty() {
        return Ok(Vec::new());
    }
    let g = sp.grid();
    let n2 = g.rule2.len();
    let factors = k.factors();
    // Plane-2 factor of each slot at every node, for each W.
    let mut t2: [Vec<SplitVec>; 2] = [Vec::new(), Vec::new()];
    for s in 0..2 {
        for w in ws {
            let vals = g
                .rule2
                .nodes
                .iter()
                .map(|z| factors[s][1].eval(*z, w.b2))
                .collect::<Result<Vec<_>>>()?;
            t2[s].push(SplitVec::from_complex(vals.into_iter()));
        }
    }
    let p = ws.len();
    g.reduce_rows(
        |a| -> Result<Vec<BiComplex>> {
            let mut row = vec![BiComplex::ZERO; n2];
            f.eval_grid_row(g, a, &mut row);
            if let Some(b) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample(a * n2 + b));
            }
            let z1 = g.rule1.nodes[a];
            let wa = g.rule1.weights[a];
            let weighted = [
                SplitVec::from_slot(&row, 0, Some(&g.rule2.weights)),
                SplitVec::from_slot(&row, 1, Some(&g.rule2.weights)),
            ];
            let mut out = Vec::with_capacity(p);
            for (q, w) in ws.iter().enumerate() {
                let mut v = [Complex::new(0.0, 0.0); 2];
                for s in 0..2 {
                    let a1 = factors[s][0].eval(z1, w.b1)?;
                    v[s] = weighted[s].dot_conj(&t2[s][q]) * a1.conj() * wa;
                }
                out.push(BiComplex::new(v[0], v[1]));
            }
            Ok(out)
        },
        |x, y| {
            let (mut x, y) = (x?, y?);
            for (a, b) in x.iter_mut().zip(y) {
                *a += b;
            }
            Ok(x)
        },
    )
}

/// `W ↦ ⟨F, K(·, W)⟩`, integrating on demand at each evaluation.
pub fn project_kernel(sp: &InnerProductSpace, k: &BcKernel, f: &ScalarField) -> ScalarField {
    let (sp, k, src) = (sp.clone(), k.clone(), f.clone());
    let label = format!("{:?}-projection[{}]", k.kind(), f.label());
    ScalarField::new(
        &label,
        FieldClass::Custom,
        move |w| match inner_kernel_sections(&sp, &src, &k, &[w]) {
            Ok(v) => v[0],
            Err(_) => BiComplex::new(Complex::new(f64::NAN, 0.0), Complex::new(f64::NAN, 0.0)),
        },
    )
}

/// Compares `Π_PTF[K̃(·, W)]` and `Π_PTF[K̂(·, W)]` with `K(·, W)` at every
/// point of `points`, for every probe `W`. One case per probe.
pub fn verify_kernels_projected(
    sp: &InnerProductSpace,
    kber: &BcKernel,
    ktil: &BcKernel,
    khat: &BcKernel,
    probes_w: &[BiComplex],
    points: &[BiComplex],
    tol: f64,
) -> Result<Vec<Case>> {
    let ptf = ProjectionOperator::ptf(sp);
    probes_w
        .iter()
        .map(|w| {
            let pt = ptf.apply(&ktil.section(*w));
            let ph = ptf.apply(&khat.section(*w));
            let devs = points
                .par_iter()
                .map(|z| {
                    let k = kber.try_eval(*z, *w)?;
                    Ok(pt.eval(*z).dist(k).max(ph.eval(*z).dist(k)))
                })
                .collect::<Result<Vec<f64>>>()?;
            let max_dev = devs.into_iter().fold(0.0, nan_max);
            Ok(Case::new(format!("W={w}"), max_dev, tol))
        })
        .collect()
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// The four projections needed by [`verify_projection_factorization`].
pub struct ProjectionSet {
    pub ptf: ProjectionOperator,
    pub hol: ProjectionOperator,
    pub star_bar: ProjectionOperator,
    pub star_dagger: ProjectionOperator,
}

impl ProjectionSet {
    pub fn new(sp: &InnerProductSpace, n: usize) -> Result<Self> {
        Ok(ProjectionSet {
            ptf: ProjectionOperator::ptf(sp),
            hol: ProjectionOperator::new(sp, ProjectionKind::Hol, n)?,
            star_bar: ProjectionOperator::new(sp, ProjectionKind::StarBar, n)?,
            star_dagger: ProjectionOperator::new(sp, ProjectionKind::StarDagger, n)?,
        })
    }

    pub fn with_default_basis(sp: &InnerProductSpace) -> Result<Self> {
        ProjectionSet::new(sp, default_basis_size(sp.order()))
    }

    pub fn get(&self, kind: ProjectionKind) -> &ProjectionOperator {
        match kind {
            ProjectionKind::Ptf => &self.ptf,
            ProjectionKind::Hol => &self.hol,
            ProjectionKind::StarBar => &self.star_bar,
            ProjectionKind::StarDagger => &self.star_dagger,
        }
    }
}

/// The five expressions `Π_Hol F`, `Π_PTF Π_{*,−} F`, `Π_{*,−} Π_PTF F`,
/// `Π_PTF Π_{*,†} F`, `Π_{*,†} Π_PTF F`.
pub fn factorization_expressions(ops: &ProjectionSet, f: &ScalarField) -> [ScalarField; 5] {
    let ptf_f = ops.ptf.apply(f);
    [
        ops.hol.apply(f),
        ops.ptf.apply(&ops.star_bar.apply(f)),
        ops.star_bar.apply(&ptf_f),
        ops.ptf.apply(&ops.star_dagger.apply(f)),
        ops.star_dagger.apply(&ptf_f),
    ]
}

/// For each probe, the largest pairwise deviation among the five
/// factorization expressions over `points`.
pub fn verify_projection_factorization(
    ops: &ProjectionSet,
    probes: &[ScalarField],
    points: &[BiComplex],
    tol: f64,
) -> Vec<Case> {
    probes
        .iter()
        .map(|f| {
            let exprs = factorization_expressions(ops, f);
            let max_dev = points
                .iter()
                .map(|z| {
                    let v: Vec<BiComplex> = exprs.iter().map(|e| e.eval(*z)).collect();
                    let mut d: f64 = 0.0;
                    for i in 0..v.len() {
                        for j in i + 1..v.len() {
                            d = nan_max(d, v[i].dist(v[j]));
                        }
                    }
                    d
                })
                .fold(0.0, nan_max);
            Case::new(f.label().to_string(), max_dev, tol)
        })
        .collect()
}
