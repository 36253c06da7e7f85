//! Verification suites: each checks one family of identities numerically and
//! reports the worst deviation per case.

use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{BiComplex, Complex};
use crate::builtins::{builtin, builtins, members_of};
use crate::error::{Error, Result};
use crate::field::{classify_seeded, ScalarField, CLASSIFY_STEP, CLASSIFY_TOL};
use crate::hilbert::{check_projection_contract, InnerProductSpace};
use crate::kernels::{kernel_for, BcKernelKind};
use crate::projections::{
    factorization_expressions, inner_kernel_sections, project_ptf, verify_kernels_projected,
    verify_projection_factorization, ProjectionKind, ProjectionSet,
};
use crate::quadrature::ProductDomain;
use crate::sampling::{interior_samples, random_points};

/// Basis size for kernels on non-disk planar domains.
pub const RECTANGLE_KERNEL_BASIS: usize = 25;
/// Number of evaluation points in verification grids.
pub const GRID_POINTS: usize = 25;
/// Number of random `W` per field in the reproducing suite.
pub const REPRODUCING_PROBES: usize = 20;
/// Kernel probes `W` are drawn from the domain shrunk by this factor about
/// its center.
pub const PROBE_SHRINK: f64 = 0.5;
/// Samples per field in the classify suite.
pub const CLASSIFY_SAMPLES: usize = 16;
/// Residual tolerance for range containment of `Π_PTF`.
pub const RANGE_TOL: f64 = 1e-5;

/// One checked identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub max_dev: f64,
    pub pass: bool,
}

impl Case {
    /// Passes iff `max_dev < tol` (NaN fails).
    pub fn new(name: impl Into<String>, max_dev: f64, tol: f64) -> Self {
        Case {
            name: name.into(),
            max_dev,
            pass: max_dev < tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<Case>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: Suite, cases: Vec<Case>) -> Self {
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        SuiteReport {
            suite: suite.name().to_string(),
            cases,
            pass,
        }
    }

    pub fn case(&self, name: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn max_dev(&self) -> f64 {
        self.cases.iter().map(|c| c.max_dev).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    KernelsProjected,
    Factorization,
    ProjectionContract,
    Reproducing,
    Classify,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::KernelsProjected,
        Suite::Factorization,
        Suite::ProjectionContract,
        Suite::Reproducing,
        Suite::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelsProjected => "kernels-projected",
            Suite::Factorization => "factorization",
            Suite::ProjectionContract => "projection-contract",
            Suite::Reproducing => "reproducing",
            Suite::Classify => "classify",
        }
    }

    /// Default pass tolerance.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::KernelsProjected => 1e-8,
            Suite::Factorization => 1e-6,
            Suite::ProjectionContract => 1e-7,
            Suite::Reproducing => 1e-7,
            Suite::Classify => CLASSIFY_TOL,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

/// Settings shared by all suites.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub order: usize,
    /// Overrides the suite's default tolerance.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            order: 40,
            tol: None,
            seed: 0,
        }
    }
}

pub fn run_suite(suite: Suite, dom: &ProductDomain, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let tol = cfg.tol.unwrap_or(suite.default_tol());
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let cases = match suite {
        Suite::Reproducing => reproducing(dom, cfg, tol)?,
        Suite::KernelsProjected => kernels_projected(dom, cfg, tol)?,
        Suite::Factorization => factorization(dom, cfg, tol, cfg.tol.unwrap_or(1e-7))?,
        Suite::ProjectionContract => projection_contract(dom, cfg, tol)?,
        Suite::Classify => classification(dom, cfg, tol, cfg.tol.unwrap_or(RANGE_TOL))?,
    };
    Ok(SuiteReport::new(suite, cases))
}

fn fields(labels: &[&str]) -> Vec<ScalarField> {
    labels
        .iter()
        .map(|l| builtin(l).expect("registry label"))
        .collect()
}

/// Random kernel probes away from the boundary.
pub fn kernel_probes(dom: &ProductDomain, count: usize, seed: u64) -> Result<Vec<BiComplex>> {
    random_points(&dom.shrink(PROBE_SHRINK), count, 0.0, seed)
}

/// Verification grid of interior points.
pub fn grid_points(dom: &ProductDomain, seed: u64) -> Result<Vec<BiComplex>> {
    interior_samples(&dom.shrink(PROBE_SHRINK), GRID_POINTS, 0.0, seed)
}

/// Registry members of each reproducing-kernel space.
pub fn space_members(kind: BcKernelKind) -> Vec<&'static str> {
    let pattern = match kind {
        BcKernelKind::Bergman => [true, true, true],
        BcKernelKind::Tilde => [true, false, true],
        BcKernelKind::Hat => [true, true, false],
    };
    members_of(pattern)
}

fn reproducing(dom: &ProductDomain, cfg: &VerifyConfig, tol: f64) -> Result<Vec<Case>> {
    let sp = InnerProductSpace::new(dom.clone(), cfg.order)?;
    let ws = kernel_probes(dom, REPRODUCING_PROBES, cfg.seed)?;
    let mut cases = Vec::new();
    for kind in [
        BcKernelKind::Bergman,
        BcKernelKind::Tilde,
        BcKernelKind::Hat,
    ] {
        let k = kernel_for(dom, kind, RECTANGLE_KERNEL_BASIS)?;
        for label in space_members(kind) {
            let f = builtin(label)?;
            let vals = inner_kernel_sections(&sp, &f, &k, &ws)?;
            let dev = vals
                .iter()
                .zip(&ws)
                .map(|(v, w)| v.dist(f.eval(*w)))
                .fold(0.0, f64::max);
            cases.push(Case::new(format!("{}/{label}", kind_name(kind)), dev, tol));
        }
    }
    Ok(cases)
}

fn kind_name(kind: BcKernelKind) -> &'static str {
    match kind {
        BcKernelKind::Bergman => "bergman",
        BcKernelKind::Tilde => "tilde",
        BcKernelKind::Hat => "hat",
    }
}

/// The domain center `C` and `C + 0.3e + 0.1e†` (`C` again when that falls
/// outside the probe region), followed by random probes.
pub fn projected_probes(dom: &ProductDomain, seed: u64) -> Result<Vec<BiComplex>> {
    let center = BiComplex::new(dom.omega1.center(), dom.omega2.center());
    let offset = center + BiComplex::new(Complex::new(0.3, 0.0), Complex::new(0.1, 0.0));
    let mut ws = vec![center];
    ws.push(if dom.shrink(PROBE_SHRINK).contains(offset) {
        offset
    } else {
        center
    });
    ws.extend(kernel_probes(dom, 3, seed)?);
    Ok(ws)
}

fn kernels_projected(dom: &ProductDomain, cfg: &VerifyConfig, tol: f64) -> Result<Vec<Case>> {
    let sp = InnerProductSpace::new(dom.clone(), cfg.order)?;
    let kb = kernel_for(dom, BcKernelKind::Bergman, RECTANGLE_KERNEL_BASIS)?;
    let kt = kernel_for(dom, BcKernelKind::Tilde, RECTANGLE_KERNEL_BASIS)?;
    let kh = kernel_for(dom, BcKernelKind::Hat, RECTANGLE_KERNEL_BASIS)?;
    let ws = projected_probes(dom, cfg.seed)?;
    let pts = grid_points(dom, cfg.seed)?;
    // Surface domain errors of the hat kernel before integrating.
    for w in &ws {
        for z in &pts {
            kh.try_eval(*z, *w)?;
        }
    }
    verify_kernels_projected(&sp, &kb, &kt, &kh, &ws, &pts, tol)
}

/// Probes for the factorization suite: fields outside `Hol_BC`, the first
/// five outside every operator kernel.
pub const FACTORIZATION_PROBES: [&str; 8] = [
    "generic",
    "generic-exp",
    "generic-poly",
    "generic-trig",
    "generic-mixed",
    "skew-c1",
    "mixed-star-bar",
    "star-dagger",
];

fn factorization(
    dom: &ProductDomain,
    cfg: &VerifyConfig,
    tol: f64,
    ptf_hol_tol: f64,
) -> Result<Vec<Case>> {
    let sp = InnerProductSpace::new(dom.clone(), cfg.order)?;
    let ops = ProjectionSet::with_default_basis(&sp)?;
    let pts = grid_points(dom, cfg.seed)?;
    let mut cases: Vec<Case> =
        verify_projection_factorization(&ops, &fields(&FACTORIZATION_PROBES), &pts, tol)
            .into_iter()
            .map(|c| Case {
                name: format!("five-way/{}", c.name),
                ..c
            })
            .collect();
    for label in members_of([true, false, false]) {
        let f = builtin(label)?;
        let (ptf, hol) = (ops.ptf.apply(&f), ops.hol.apply(&f));
        let dev = pts
            .iter()
            .map(|z| ptf.eval(*z).dist(hol.eval(*z)))
            .fold(0.0, f64::max);
        cases.push(Case::new(
            format!("ptf-equals-hol/{label}"),
            dev,
            ptf_hol_tol,
        ));
    }
    // Commutation of Π_PTF with Π_{*,−}: expressions 1 and 2.
    for label in ["generic", "generic-exp"] {
        let e = factorization_expressions(&ops, &builtin(label)?);
        let dev = pts
            .iter()
            .map(|z| e[1].eval(*z).dist(e[2].eval(*z)))
            .fold(0.0, f64::max);
        cases.push(Case::new(format!("commute-ptf-star-bar/{label}"), dev, tol));
    }
    Ok(cases)
}

/// Probes for the contract suite: one registry field per membership pattern
/// of `[Ker ∂/∂Z*, Ker ∂/∂Z†, Ker ∂/∂Z̄]`.
pub const CONTRACT_PROBES: [&str; 8] = [
    "exp",
    "antiholo-e",
    "mixed-star-bar",
    "star-dagger",
    "star-only",
    "dagger-only",
    "bar-only",
    "generic",
];

fn projection_contract(dom: &ProductDomain, cfg: &VerifyConfig, tol: f64) -> Result<Vec<Case>> {
    let sp = InnerProductSpace::new(dom.clone(), cfg.order)?;
    let ops = ProjectionSet::with_default_basis(&sp)?;
    let probes = fields(&CONTRACT_PROBES);
    let mut cases = Vec::new();
    for kind in ProjectionKind::ALL {
        let op = ops.get(kind);
        let r = check_projection_contract(&sp, kind.name(), |f| Ok(op.apply(f)), &probes, tol)?;
        cases.push(Case::new(
            format!("{}/idempotency", kind.name()),
            r.idempotency_violation,
            tol,
        ));
        cases.push(Case::new(
            format!("{}/self-adjoint", kind.name()),
            r.self_adjoint_violation,
            tol,
        ));
    }
    Ok(cases)
}

fn classification(
    dom: &ProductDomain,
    cfg: &VerifyConfig,
    tol: f64,
    range_tol: f64,
) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for b in builtins() {
        let m = classify_seeded(
            &b.field(),
            dom,
            CLASSIFY_SAMPLES,
            CLASSIFY_STEP,
            tol,
            cfg.seed,
        )?;
        // Worst residual among the operators that should annihilate the field;
        // a wrong membership pattern fails regardless.
        let dev = b
            .kernels
            .iter()
            .zip(m.max_residual)
            .filter(|(k, _)| **k)
            .map(|(_, r)| r)
            .fold(0.0, f64::max);
        let ok = m.as_array() == b.expected();
        cases.push(Case {
            name: format!("membership/{}", b.label),
            max_dev: dev,
            pass: ok && dev < tol,
        });
    }
    let sp = InnerProductSpace::new(dom.clone(), cfg.order)?;
    for label in ["generic", "generic-exp", "mixed-star-bar", "star-dagger"] {
        let p = project_ptf(&sp, &builtin(label)?);
        let m = classify_seeded(&p, dom, 8, CLASSIFY_STEP, range_tol, cfg.seed)?;
        let dev = m.max_residual[1].max(m.max_residual[2]);
        cases.push(Case::new(format!("ptf-range/{label}"), dev, range_tol));
    }
    Ok(cases)
}
