//! Planar and product-type domains, quadrature rules, and integration.
//!
//! Integrals over a product-type domain `Ω = Ω1 e + Ω2 e†` are taken with
//! respect to the product area measure in the idempotent coordinates,
//! `dμ = dA(β1) dA(β2)` on `Ω1 × Ω2`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BiComplex, Complex};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// A bounded open planar domain in `C(i)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanarDomain {
    Disk { center: Complex, radius: f64 },
    Rectangle { lo: Complex, hi: Complex },
}

impl PlanarDomain {
    pub fn disk(center: Complex, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(PlanarDomain::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        PlanarDomain::Disk {
            center: Complex::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn rectangle(lo: Complex, hi: Complex) -> Result<Self> {
        if !(hi.re > lo.re && hi.im > lo.im) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "rectangle corner {hi} must strictly dominate {lo}"
            )));
        }
        Ok(PlanarDomain::Rectangle { lo, hi })
    }

    pub fn area(&self) -> f64 {
        match *self {
            PlanarDomain::Disk { radius, .. } => PI * radius * radius,
            PlanarDomain::Rectangle { lo, hi } => (hi.re - lo.re) * (hi.im - lo.im),
        }
    }

    pub fn center(&self) -> Complex {
        match *self {
            PlanarDomain::Disk { center, .. } => center,
            PlanarDomain::Rectangle { lo, hi } => (lo + hi) * 0.5,
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn depth(&self, z: Complex) -> f64 {
        match *self {
            PlanarDomain::Disk { center, radius } => radius - (z - center).norm(),
            PlanarDomain::Rectangle { lo, hi } => (z.re - lo.re)
                .min(hi.re - z.re)
                .min(z.im - lo.im)
                .min(hi.im - z.im),
        }
    }

    pub fn contains(&self, z: Complex) -> bool {
        self.depth(z) > 0.0
    }

    pub fn bounding_box(&self) -> (Complex, Complex) {
        match *self {
            PlanarDomain::Disk { center, radius } => {
                let r = Complex::new(radius, radius);
                (center - r, center + r)
            }
            PlanarDomain::Rectangle { lo, hi } => (lo, hi),
        }
    }

    /// Image of the domain under complex conjugation.
    pub fn conj(&self) -> PlanarDomain {
        match *self {
            PlanarDomain::Disk { center, radius } => PlanarDomain::Disk {
                center: center.conj(),
                radius,
            },
            PlanarDomain::Rectangle { lo, hi } => PlanarDomain::Rectangle {
                lo: Complex::new(lo.re, -hi.im),
                hi: Complex::new(hi.re, -lo.im),
            },
        }
    }

    pub fn is_conj_symmetric(&self) -> bool {
        let c = self.conj();
        match (self, &c) {
            (PlanarDomain::Disk { center: a, .. }, PlanarDomain::Disk { center: b, .. }) => {
                (a - b).norm() <= 1e-14 * (1.0 + a.norm())
            }
            (
                PlanarDomain::Rectangle { lo: a, hi: b },
                PlanarDomain::Rectangle { lo: c, hi: d },
            ) => (a - c).norm() + (b - d).norm() <= 1e-14 * (1.0 + a.norm() + b.norm()),
            _ => false,
        }
    }

    /// The domain scaled by `factor` about its center.
    pub fn shrink(&self, factor: f64) -> PlanarDomain {
        match *self {
            PlanarDomain::Disk { center, radius } => PlanarDomain::Disk {
                center,
                radius: radius * factor,
            },
            PlanarDomain::Rectangle { lo, hi } => {
                let c = (lo + hi) * 0.5;
                PlanarDomain::Rectangle {
                    lo: c + (lo - c) * factor,
                    hi: c + (hi - c) * factor,
                }
            }
        }
    }
}

/// A bounded product-type domain `Ω1 e + Ω2 e†`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDomain {
    pub omega1: PlanarDomain,
    pub omega2: PlanarDomain,
}

impl ProductDomain {
    pub fn new(omega1: PlanarDomain, omega2: PlanarDomain) -> Self {
        ProductDomain { omega1, omega2 }
    }

    /// The bicomplex unit ball `B(0,1) e + B(0,1) e†`.
    pub fn bidisk() -> Self {
        ProductDomain::new(PlanarDomain::unit_disk(), PlanarDomain::unit_disk())
    }

    pub fn contains(&self, z: BiComplex) -> bool {
        self.omega1.contains(z.b1) && self.omega2.contains(z.b2)
    }

    /// Image of the domain under `theta`, which conjugates the first
    /// idempotent coefficient.
    pub fn theta_image(&self) -> ProductDomain {
        ProductDomain::new(self.omega1.conj(), self.omega2.clone())
    }

    pub fn is_conj_symmetric(&self) -> bool {
        self.omega1.is_conj_symmetric() && self.omega2.is_conj_symmetric()
    }

    pub fn shrink(&self, factor: f64) -> ProductDomain {
        ProductDomain::new(self.omega1.shrink(factor), self.omega2.shrink(factor))
    }

    pub fn planes(&self) -> [&PlanarDomain; 2] {
        [&self.omega1, &self.omega2]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum PlanarSpec {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
}

impl TryFrom<PlanarSpec> for PlanarDomain {
    type Error = Error;
    fn try_from(s: PlanarSpec) -> Result<Self> {
        match s {
            PlanarSpec::Disk { center, radius } => {
                PlanarDomain::disk(Complex::new(center[0], center[1]), radius)
            }
            PlanarSpec::Rectangle { lo, hi } => {
                PlanarDomain::rectangle(Complex::new(lo[0], lo[1]), Complex::new(hi[0], hi[1]))
            }
        }
    }
}

impl From<&PlanarDomain> for PlanarSpec {
    fn from(d: &PlanarDomain) -> Self {
        match *d {
            PlanarDomain::Disk { center, radius } => PlanarSpec::Disk {
                center: [center.re, center.im],
                radius,
            },
            PlanarDomain::Rectangle { lo, hi } => PlanarSpec::Rectangle {
                lo: [lo.re, lo.im],
                hi: [hi.re, hi.im],
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DomainFileRepr {
    omega1: PlanarSpec,
    omega2: PlanarSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
}

/// Contents of a domain spec file:
/// `{"omega1":{"disk":{"center":[0,0],"radius":1}},"omega2":{...},"order":40}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainFile {
    pub domain: ProductDomain,
    pub order: Option<usize>,
}

impl DomainFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: DomainFileRepr =
            serde_json::from_str(text).map_err(|e| Error::InvalidDomain(e.to_string()))?;
        Ok(DomainFile {
            domain: ProductDomain::new(repr.omega1.try_into()?, repr.omega2.try_into()?),
            order: repr.order,
        })
    }

    pub fn to_json(&self) -> String {
        let repr = DomainFileRepr {
            omega1: (&self.domain.omega1).into(),
            omega2: (&self.domain.omega2).into(),
            order: self.order,
        };
        serde_json::to_string(&repr).expect("domain serialization is infallible")
    }
}

/// Nodes and positive weights integrating over one planar domain.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<Complex>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Builds a quadrature rule of the given order on a planar domain.
///
/// Rectangles get a tensor Gauss–Legendre rule with `order²` nodes. Disks
/// get Gauss–Legendre in the radius (with the Jacobian `r`) times the
/// trapezoid rule on `2·order` equispaced angles.
pub fn build_rule(dom: &PlanarDomain, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "quadrature order must be at least 1".into(),
        ));
    }
    let (x, w) = gauss_legendre(order);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match *dom {
        PlanarDomain::Rectangle { lo, hi } => {
            let (hx, hy) = ((hi.re - lo.re) * 0.5, (hi.im - lo.im) * 0.5);
            let (cx, cy) = ((hi.re + lo.re) * 0.5, (hi.im + lo.im) * 0.5);
            nodes.reserve(order * order);
            for (xa, wa) in x.iter().zip(&w) {
                for (yb, wb) in x.iter().zip(&w) {
                    nodes.push(Complex::new(cx + hx * xa, cy + hy * yb));
                    weights.push(wa * wb * hx * hy);
                }
            }
        }
        PlanarDomain::Disk { center, radius } => {
            let m = 2 * order;
            let dtheta = 2.0 * PI / m as f64;
            nodes.reserve(order * m);
            for (xa, wa) in x.iter().zip(&w) {
                let r = radius * (1.0 + xa) * 0.5;
                let wr = wa * radius * 0.5 * r;
                for j in 0..m {
                    nodes.push(center + Complex::from_polar(r, dtheta * j as f64));
                    weights.push(wr * dtheta);
                }
            }
        }
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Closed-form area of a planar domain.
pub fn area(dom: &PlanarDomain) -> f64 {
    dom.area()
}

/// `Σ w_i f(node_i)`.
pub fn integrate_planar(rule: &QuadratureRule, f: impl Fn(Complex) -> Complex) -> Result<Complex> {
    let mut terms = Vec::with_capacity(rule.len());
    for (i, (z, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(*z);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample(i));
        }
        terms.push(v * *w);
    }
    Ok(pairwise_sum(&terms))
}

static GRID_IDS: AtomicU64 = AtomicU64::new(1);

/// The tensor product of two planar rules, i.e. the node set
/// `{ β_a e + β_b e† }` used for every integral over a product domain.
#[derive(Debug)]
pub struct TensorGrid {
    id: u64,
    pub rule1: QuadratureRule,
    pub rule2: QuadratureRule,
}

impl TensorGrid {
    pub fn new(rule1: QuadratureRule, rule2: QuadratureRule) -> Arc<Self> {
        Arc::new(TensorGrid {
            id: GRID_IDS.fetch_add(1, Ordering::Relaxed),
            rule1,
            rule2,
        })
    }

    pub fn build(dom: &ProductDomain, order: usize) -> Result<Arc<Self>> {
        Ok(TensorGrid::new(
            build_rule(&dom.omega1, order)?,
            build_rule(&dom.omega2, order)?,
        ))
    }

    /// Identity of this grid; tables cached against one grid are only reused
    /// on the same grid.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node(&self, a: usize, b: usize) -> BiComplex {
        BiComplex::new(self.rule1.nodes[a], self.rule2.nodes[b])
    }

    pub fn len(&self) -> usize {
        self.rule1.len() * self.rule2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Runs `row` for every first-plane node index (in parallel) and reduces
    /// the partial results pairwise in index order, so the result does not
    /// depend on the thread count.
    pub fn reduce_rows<T, R, C>(&self, row: R, combine: C) -> T
    where
        T: Send + Clone,
        R: Fn(usize) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        let parts: Vec<T> = (0..self.rule1.len()).into_par_iter().map(row).collect();
        pairwise_reduce(parts, &combine)
    }
}

fn pairwise_reduce<T: Clone, C: Fn(T, T) -> T>(mut items: Vec<T>, combine: &C) -> T {
    assert!(!items.is_empty(), "pairwise reduction of an empty sequence");
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + std::ops::Add<Output = T>,
{
    match xs.len() {
        0 => T::default(),
        1..=8 => xs.iter().fold(T::default(), |acc, &x| acc + x),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// `∫_Ω F dμ`, returned as `(∬ h1) e + (∬ h2) e†` over `Ω1 × Ω2`.
pub fn integrate_bc(
    _dom: &ProductDomain,
    r1: &QuadratureRule,
    r2: &QuadratureRule,
    f: &ScalarField,
) -> Result<BiComplex> {
    let grid = TensorGrid::new(r1.clone(), r2.clone());
    integrate_on_grid(&grid, f)
}

/// `∫_Ω F dμ` on a prebuilt grid.
pub fn integrate_on_grid(grid: &TensorGrid, f: &ScalarField) -> Result<BiComplex> {
    let n2 = grid.rule2.len();
    grid.reduce_rows(
        |a| {
            let mut row = vec![BiComplex::ZERO; n2];
            f.eval_grid_row(grid, a, &mut row);
            let mut terms = Vec::with_capacity(n2);
            for (b, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample(a * n2 + b));
                }
                terms.push(*v * grid.rule2.weights[b]);
            }
            Ok(pairwise_sum(&terms) * grid.rule1.weights[a])
        },
        |x, y| Ok(x? + y?),
    )
}
