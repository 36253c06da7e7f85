//! Bicomplex-valued fields, the four bicomplex differential operators, and
//! classification into operator-kernel spaces.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{BiComplex, Complex, Conjugation};
use crate::error::{Error, Result};
use crate::quadrature::{ProductDomain, TensorGrid};
use crate::sampling::interior_samples;

/// Smallest finite-difference step accepted by [`eval_operators`].
pub const MIN_STEP: f64 = 1e-10;
/// Default step for [`classify`].
pub const CLASSIFY_STEP: f64 = 1e-4;
/// Default residual tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-6;

/// Declared structure of a field. Informational only; nothing is inferred
/// from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    GenericC1,
    ProductType,
    BcHolomorphic,
    KerStar,
    KerDagger,
    KerBar,
    Custom,
}

/// Something that can be evaluated at bicomplex points.
///
/// Besides pointwise evaluation, fields can be evaluated along the lines of a
/// tensor grid: a row `{ β_a e + β_b e† : b }`, or a line with one idempotent
/// coefficient fixed at an arbitrary value and the other running over the
/// nodes of one planar rule. Implementors that cache tables against a grid
/// override these.
pub trait FieldEval: Send + Sync {
    fn eval(&self, z: BiComplex) -> BiComplex;

    fn eval_grid_row(&self, grid: &TensorGrid, a: usize, out: &mut [BiComplex]) {
        self.eval_line1(grid, grid.rule1.nodes[a], out)
    }

    /// Values at `β1 e + β_b e†` for every node `β_b` of `grid.rule2`.
    fn eval_line1(&self, grid: &TensorGrid, b1: Complex, out: &mut [BiComplex]) {
        for (o, b2) in out.iter_mut().zip(&grid.rule2.nodes) {
            *o = self.eval(BiComplex::new(b1, *b2));
        }
    }

    /// Values at `β_a e + β2 e†` for every node `β_a` of `grid.rule1`.
    fn eval_line2(&self, grid: &TensorGrid, b2: Complex, out: &mut [BiComplex]) {
        for (o, b1) in out.iter_mut().zip(&grid.rule1.nodes) {
            *o = self.eval(BiComplex::new(*b1, b2));
        }
    }
}

struct FnField<F>(F);

impl<F: Fn(BiComplex) -> BiComplex + Send + Sync> FieldEval for FnField<F> {
    fn eval(&self, z: BiComplex) -> BiComplex {
        (self.0)(z)
    }
}

/// A map `Ω → BC` with a label and a declared class.
#[derive(Clone)]
pub struct ScalarField {
    inner: Arc<dyn FieldEval>,
    class: FieldClass,
    label: Arc<str>,
}

impl ScalarField {
    pub fn new<F>(label: &str, class: FieldClass, f: F) -> Self
    where
        F: Fn(BiComplex) -> BiComplex + Send + Sync + 'static,
    {
        ScalarField::from_eval(label, class, FnField(f))
    }

    pub fn from_eval(label: &str, class: FieldClass, f: impl FieldEval + 'static) -> Self {
        ScalarField {
            inner: Arc::new(f),
            class,
            label: label.into(),
        }
    }

    pub fn eval(&self, z: BiComplex) -> BiComplex {
        self.inner.eval(z)
    }

    pub fn eval_grid_row(&self, grid: &TensorGrid, a: usize, out: &mut [BiComplex]) {
        self.inner.eval_grid_row(grid, a, out)
    }

    pub fn eval_line1(&self, grid: &TensorGrid, b1: Complex, out: &mut [BiComplex]) {
        self.inner.eval_line1(grid, b1, out)
    }

    pub fn eval_line2(&self, grid: &TensorGrid, b2: Complex, out: &mut [BiComplex]) {
        self.inner.eval_line2(grid, b2, out)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn class(&self) -> FieldClass {
        self.class
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    /// Pointwise product with a constant.
    pub fn scaled(&self, c: BiComplex) -> ScalarField {
        let label = format!("({c})*{}", self.label);
        ScalarField::from_eval(
            &label,
            FieldClass::Custom,
            Affine {
                terms: vec![(c, self.clone())],
            },
        )
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &ScalarField) -> ScalarField {
        let label = format!("{}+{}", self.label, other.label);
        let terms = vec![
            (BiComplex::ONE, self.clone()),
            (BiComplex::ONE, other.clone()),
        ];
        ScalarField::from_eval(&label, FieldClass::Custom, Affine { terms })
    }
}

/// `Σ c_i F_i`, forwarding line evaluations to the summands.
struct Affine {
    terms: Vec<(BiComplex, ScalarField)>,
}

impl Affine {
    fn combine(&self, out: &mut [BiComplex], fill: impl Fn(&ScalarField, &mut [BiComplex])) {
        let mut buf = vec![BiComplex::ZERO; out.len()];
        out.fill(BiComplex::ZERO);
        for (c, f) in &self.terms {
            fill(f, &mut buf);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o += *c * *v;
            }
        }
    }
}

impl FieldEval for Affine {
    fn eval(&self, z: BiComplex) -> BiComplex {
        self.terms.iter().map(|(c, f)| *c * f.eval(z)).sum()
    }

    fn eval_grid_row(&self, grid: &TensorGrid, a: usize, out: &mut [BiComplex]) {
        self.combine(out, |f, buf| f.eval_grid_row(grid, a, buf))
    }

    fn eval_line1(&self, grid: &TensorGrid, b1: Complex, out: &mut [BiComplex]) {
        self.combine(out, |f, buf| f.eval_line1(grid, b1, buf))
    }

    fn eval_line2(&self, grid: &TensorGrid, b2: Complex, out: &mut [BiComplex]) {
        self.combine(out, |f, buf| f.eval_line2(grid, b2, buf))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("class", &self.class)
            .finish()
    }
}

/// The four operators `∂/∂Z, ∂/∂Z*, ∂/∂Z†, ∂/∂Z̄` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorResidual {
    pub d_z: BiComplex,
    pub d_star: BiComplex,
    pub d_dagger: BiComplex,
    pub d_bar: BiComplex,
    pub step: f64,
}

impl OperatorResidual {
    /// The operator annihilating the functions that commute with `kind`:
    /// star ↦ `∂/∂Z*`, dagger ↦ `∂/∂Z†`, bar ↦ `∂/∂Z̄`.
    pub fn get(&self, kind: Conjugation) -> BiComplex {
        match kind {
            Conjugation::Star => self.d_star,
            Conjugation::Dagger => self.d_dagger,
            Conjugation::Bar => self.d_bar,
        }
    }
}

/// Default finite-difference step at `z`: `1e-5 · (1 + sup|β|)`.
pub fn default_step(z: BiComplex) -> f64 {
    1e-5 * (1.0 + z.sup_norm())
}

/// Central-difference evaluation of the four bicomplex operators.
///
/// With `D_u` the central difference in the real direction `u` of
/// `(x1, y1, x2, y2)` (units `1, i, j, k`):
///
/// ```text
/// ∂/∂Z  = ¼(D_x1 − i D_y1 − j D_x2 + k D_y2)
/// ∂/∂Z* = ¼(D_x1 + i D_y1 + j D_x2 + k D_y2)
/// ∂/∂Z† = ¼(D_x1 − i D_y1 + j D_x2 − k D_y2)
/// ∂/∂Z̄  = ¼(D_x1 + i D_y1 − j D_x2 − k D_y2)
/// ```
pub fn eval_operators(f: &ScalarField, z: BiComplex, h: f64) -> Result<OperatorResidual> {
    if !(h >= MIN_STEP) || !h.is_finite() {
        return Err(Error::StepTooSmall(h));
    }
    let (i, j, k) = (BiComplex::i(), BiComplex::j(), BiComplex::k());
    let diff = |u: BiComplex| (f.eval(z + u.scale(h)) - f.eval(z - u.scale(h))).scale(0.5 / h);
    let dx1 = diff(BiComplex::ONE);
    let dy1 = diff(i);
    let dx2 = diff(j);
    let dy2 = diff(k);
    let (idy1, jdx2, kdy2) = (i * dy1, j * dx2, k * dy2);
    Ok(OperatorResidual {
        d_z: (dx1 - idy1 - jdx2 + kdy2).scale(0.25),
        d_star: (dx1 + idy1 + jdx2 + kdy2).scale(0.25),
        d_dagger: (dx1 - idy1 + jdx2 - kdy2).scale(0.25),
        d_bar: (dx1 + idy1 - jdx2 - kdy2).scale(0.25),
        step: h,
    })
}

/// Membership of a field in the operator-kernel spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpaceMembership {
    /// `Ker ∂/∂Z*`
    pub star: bool,
    /// `Ker ∂/∂Z†`
    pub dagger: bool,
    /// `Ker ∂/∂Z̄`
    pub bar: bool,
    /// `Ker ∂/∂Z† ∩ Ker ∂/∂Z̄` (product-type functions)
    pub dagger_bar: bool,
    /// `Ker ∂/∂Z* ∩ Ker ∂/∂Z̄`
    pub star_bar: bool,
    /// `Ker ∂/∂Z* ∩ Ker ∂/∂Z†`
    pub star_dagger: bool,
    /// `Hol_BC`, the intersection of all three.
    pub hol: bool,
    /// Maximum residual sup-norm of `∂/∂Z*`, `∂/∂Z†`, `∂/∂Z̄` over the samples.
    pub max_residual: [f64; 3],
    pub samples: usize,
}

impl SpaceMembership {
    pub fn from_residuals(max_residual: [f64; 3], tol: f64, samples: usize) -> Self {
        let [s, d, b] = max_residual.map(|r| r < tol);
        SpaceMembership {
            star: s,
            dagger: d,
            bar: b,
            dagger_bar: d && b,
            star_bar: s && b,
            star_dagger: s && d,
            hol: s && d && b,
            max_residual,
            samples,
        }
    }

    /// `[star, dagger, bar, dagger∧bar, star∧bar, star∧dagger, hol]`.
    pub fn as_array(&self) -> [bool; 7] {
        [
            self.star,
            self.dagger,
            self.bar,
            self.dagger_bar,
            self.star_bar,
            self.star_dagger,
            self.hol,
        ]
    }

    pub fn kernels(&self) -> [bool; 3] {
        [self.star, self.dagger, self.bar]
    }
}

/// Classifies `f` on Halton samples of `dom` (plain sequence).
pub fn classify(
    f: &ScalarField,
    dom: &ProductDomain,
    sample_count: usize,
    h: f64,
    tol: f64,
) -> Result<SpaceMembership> {
    classify_seeded(f, dom, sample_count, h, tol, 0)
}

/// Like [`classify`], with a scrambling seed for the sample sequence.
pub fn classify_seeded(
    f: &ScalarField,
    dom: &ProductDomain,
    sample_count: usize,
    h: f64,
    tol: f64,
    seed: u64,
) -> Result<SpaceMembership> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument(
            "sample_count must be at least 1".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(h >= MIN_STEP) {
        return Err(Error::StepTooSmall(h));
    }
    let pts = interior_samples(dom, sample_count, 2.0 * h, seed)?;
    let maxes = pts
        .par_iter()
        .map(|&z| {
            let r = eval_operators(f, z, h)?;
            Ok([
                r.d_star.sup_norm(),
                r.d_dagger.sup_norm(),
                r.d_bar.sup_norm(),
            ])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?
        .into_iter()
        .fold([0.0f64; 3], |acc, r| {
            [acc[0].max(r[0]), acc[1].max(r[1]), acc[2].max(r[2])]
        });
    Ok(SpaceMembership::from_residuals(maxes, tol, pts.len()))
}

/// `Z ↦ F(conj(Z, kind))`.
pub fn precompose_conj(f: &ScalarField, kind: Conjugation) -> ScalarField {
    let g = f.clone();
    ScalarField::new(
        &format!("{}∘{}", f.label(), conj_name(kind)),
        FieldClass::Custom,
        move |z| g.eval(z.conj(kind)),
    )
}

/// `Z ↦ conj(F(Z), kind)`.
pub fn postcompose_conj(f: &ScalarField, kind: Conjugation) -> ScalarField {
    let g = f.clone();
    ScalarField::new(
        &format!("{}∘{}", conj_name(kind), f.label()),
        FieldClass::Custom,
        move |z| g.eval(z).conj(kind),
    )
}

fn conj_name(kind: Conjugation) -> &'static str {
    match kind {
        Conjugation::Star => "star",
        Conjugation::Dagger => "dagger",
        Conjugation::Bar => "bar",
    }
}

/// `β1 e + β2 e† ↦ h1(β1) e + h2(β2) e†`.
pub fn product_type<H1, H2>(h1: H1, h2: H2) -> ScalarField
where
    H1: Fn(Complex) -> Complex + Send + Sync + 'static,
    H2: Fn(Complex) -> Complex + Send + Sync + 'static,
{
    ScalarField::new(
        "product-type",
        FieldClass::ProductType,
        move |z: BiComplex| BiComplex::new(h1(z.b1), h2(z.b2)),
    )
}

/// `θ ∘ F ∘ θ`, the same field read through the `C(j)` lens.
pub fn theta_conjugate(f: &ScalarField) -> ScalarField {
    let g = f.clone();
    ScalarField::new(
        &format!("theta∘{}∘theta", f.label()),
        FieldClass::Custom,
        move |z: BiComplex| g.eval(z.theta()).theta(),
    )
}
