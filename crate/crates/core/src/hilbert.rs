//! The bicomplex inner product `⟨F, G⟩ = ∫_Ω F G* dμ`, hyperbolic norms,
//! and the contract check for bicomplex orthogonal projections.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{BiComplex, Hyperbolic};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::{ProductDomain, QuadratureRule, TensorGrid};
use crate::soa::SplitMat;

/// `⟨F, F⟩` coefficients at or above this value are clamped to zero before
/// taking square roots.
pub const NEGATIVE_FLOOR: f64 = -1e-10;

/// `L²_k(Ω, BC)` discretized by a tensor quadrature grid.
#[derive(Clone, Debug)]
pub struct InnerProductSpace {
    domain: ProductDomain,
    order: usize,
    grid: Arc<TensorGrid>,
}

impl InnerProductSpace {
    pub fn new(domain: ProductDomain, order: usize) -> Result<Self> {
        let grid = TensorGrid::build(&domain, order)?;
        Ok(InnerProductSpace {
            domain,
            order,
            grid,
        })
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn rule1(&self) -> &QuadratureRule {
        &self.grid.rule1
    }

    pub fn rule2(&self) -> &QuadratureRule {
        &self.grid.rule2
    }
}

fn check_finite(row: &[BiComplex], a: usize) -> Result<()> {
    match row.iter().position(|v| !v.is_finite()) {
        Some(b) => Err(Error::NonFiniteSample(a * row.len() + b)),
        None => Ok(()),
    }
}

/// Cross Gram matrix `X[p][q] = ⟨left_p, right_q⟩` in one pass over the grid.
pub fn gram(
    sp: &InnerProductSpace,
    left: &[ScalarField],
    right: &[ScalarField],
) -> Result<Vec<Vec<BiComplex>>> {
    let grid = sp.grid();
    let n2 = grid.rule2.len();
    let (pl, pr) = (left.len(), right.len());
    if pl == 0 || pr == 0 {
        return Ok(vec![vec![BiComplex::ZERO; pr]; pl]);
    }
    let w2 = &grid.rule2.weights;
    let flat = grid.reduce_rows(
        |a| -> Result<Vec<BiComplex>> {
            let mut buf = vec![BiComplex::ZERO; n2];
            let mut ls = [SplitMat::with_cols(n2), SplitMat::with_cols(n2)];
            let mut rs = [SplitMat::with_cols(n2), SplitMat::with_cols(n2)];
            for (fields, mats, w) in [(left, &mut ls, Some(&w2[..])), (right, &mut rs, None)] {
                for f in fields {
                    f.eval_grid_row(grid, a, &mut buf);
                    for (s, m) in mats.iter_mut().enumerate() {
                        m.push_slot(&buf, s, w);
                    }
                    if !mats.iter().all(|m| m.last_row_finite()) {
                        check_finite(&buf, a)?;
                    }
                }
            }
            let wa = grid.rule1.weights[a];
            let x1 = ls[0].mul_conj_t(&rs[0]);
            let x2 = ls[1].mul_conj_t(&rs[1]);
            Ok(x1
                .entries()
                .zip(x2.entries())
                .map(|(u, v)| BiComplex::new(u * wa, v * wa))
                .collect())
        },
        |x, y| {
            let (mut x, y) = (x?, y?);
            for (a, b) in x.iter_mut().zip(y) {
                *a += b;
            }
            Ok(x)
        },
    )?;
    Ok(flat.chunks(pr).map(|c| c.to_vec()).collect())
}

/// `⟨F, G⟩ = ∫_Ω F G* dμ`.
pub fn inner(sp: &InnerProductSpace, f: &ScalarField, g: &ScalarField) -> Result<BiComplex> {
    Ok(gram(sp, std::slice::from_ref(f), std::slice::from_ref(g))?[0][0])
}

/// Hyperbolic norm from a value of `⟨F, F⟩`, clamping quadrature noise.
pub fn norm_from_inner(v: BiComplex) -> Result<Hyperbolic> {
    let mut coef = [v.b1.re, v.b2.re];
    for c in coef.iter_mut() {
        if *c < NEGATIVE_FLOOR {
            return Err(Error::NegativeCoefficient(*c));
        }
        *c = c.max(0.0).sqrt();
    }
    Ok(Hyperbolic::new(coef[0], coef[1]))
}

/// `‖F‖ = sqrt(⟨F, F⟩)`, a hyperbolic number in `D⁺`.
pub fn norm_h(sp: &InnerProductSpace, f: &ScalarField) -> Result<Hyperbolic> {
    norm_from_inner(inner(sp, f, f)?)
}

/// Outcome of [`check_projection_contract`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractReport {
    pub operator: String,
    /// `max_F ‖T(TF) − TF‖`, as the larger hyperbolic coefficient.
    pub idempotency_violation: f64,
    /// `max_{F,G} |⟨TF, G⟩ − ⟨F, TG⟩|`, as the larger coefficient modulus.
    pub self_adjoint_violation: f64,
    pub pass: bool,
}

/// Checks that `op` is idempotent and bicomplex self-adjoint on `probes`.
pub fn check_projection_contract<T>(
    sp: &InnerProductSpace,
    name: &str,
    op: T,
    probes: &[ScalarField],
    tol: f64,
) -> Result<ContractReport>
where
    T: Fn(&ScalarField) -> Result<ScalarField>,
{
    let images: Vec<ScalarField> = probes.iter().map(&op).collect::<Result<_>>()?;
    let mut idem: f64 = 0.0;
    for tf in &images {
        let ttf = op(tf)?;
        let diff = ttf.plus(&tf.scaled(BiComplex::real(-1.0)));
        idem = idem.max(norm_h(sp, &diff)?.max_coeff());
    }
    // X[p][q] = ⟨TF_p, F_q⟩ and ⟨F_p, TF_q⟩ = X[q][p]*.
    let x = gram(sp, &images, probes)?;
    let mut sa: f64 = 0.0;
    for p in 0..probes.len() {
        for q in 0..probes.len() {
            sa = sa.max(x[p][q].dist(x[q][p].star()));
        }
    }
    Ok(ContractReport {
        operator: name.to_string(),
        idempotency_violation: idem,
        self_adjoint_violation: sa,
        pass: idem < tol && sa < tol,
    })
}
