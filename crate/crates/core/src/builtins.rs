//! Named test fields with known operator-kernel memberships.
//!
//! Every field is written through its idempotent components
//! `F(β1 e + β2 e†) = f1(β1, β2) e + f2(β1, β2) e†`.

use crate::algebra::{BiComplex, Complex};
use crate::error::{Error, Result};
use crate::field::{FieldClass, ScalarField};

/// A registry entry.
pub struct Builtin {
    pub label: &'static str,
    pub class: FieldClass,
    /// Ground truth `[Ker ∂/∂Z*, Ker ∂/∂Z†, Ker ∂/∂Z̄]`.
    pub kernels: [bool; 3],
    pub formula: &'static str,
    build: fn(BiComplex) -> BiComplex,
}

impl Builtin {
    pub fn field(&self) -> ScalarField {
        ScalarField::new(self.label, self.class, self.build)
    }

    /// Ground truth in the order of [`crate::field::SpaceMembership::as_array`].
    pub fn expected(&self) -> [bool; 7] {
        let [s, d, b] = self.kernels;
        [s, d, b, d && b, s && b, s && d, s && d && b]
    }
}

fn slots(f1: Complex, f2: Complex) -> BiComplex {
    BiComplex::new(f1, f2)
}

const HOL: [bool; 3] = [true, true, true];

static REGISTRY: &[Builtin] = &[
    Builtin {
        label: "one",
        class: FieldClass::BcHolomorphic,
        kernels: HOL,
        formula: "1",
        build: |_| BiComplex::ONE,
    },
    Builtin {
        label: "identity",
        class: FieldClass::BcHolomorphic,
        kernels: HOL,
        formula: "Z",
        build: |z| z,
    },
    Builtin {
        label: "square",
        class: FieldClass::BcHolomorphic,
        kernels: HOL,
        formula: "Z^2",
        build: |z| z * z,
    },
    Builtin {
        label: "cube",
        class: FieldClass::BcHolomorphic,
        kernels: HOL,
        formula: "Z^3",
        build: |z| z * z * z,
    },
    Builtin {
        label: "exp",
        class: FieldClass::BcHolomorphic,
        kernels: HOL,
        formula: "exp(Z)",
        build: |z| z.exp(),
    },
    Builtin {
        label: "antiholo-e",
        class: FieldClass::ProductType,
        kernels: [false, true, true],
        formula: "conj(b1) e + b2 e†",
        build: |z| slots(z.b1.conj(), z.b2),
    },
    Builtin {
        label: "conj-star",
        class: FieldClass::ProductType,
        kernels: [false, true, true],
        formula: "Z*",
        build: |z| z.star(),
    },
    Builtin {
        label: "mixed-star-bar",
        class: FieldClass::KerStar,
        kernels: [true, false, true],
        formula: "b1 b2 e + b1 b2 e†",
        build: |z| slots(z.b1 * z.b2, z.b1 * z.b2),
    },
    Builtin {
        label: "tilde-member",
        class: FieldClass::KerStar,
        kernels: [true, false, true],
        formula: "b1 b2 e + b1^2 e†",
        build: |z| slots(z.b1 * z.b2, z.b1 * z.b1),
    },
    Builtin {
        label: "tilde-poly",
        class: FieldClass::KerStar,
        kernels: [true, false, true],
        formula: "(b2^2 + b1) e + b1 b2^2 e†",
        build: |z| slots(z.b2 * z.b2 + z.b1, z.b1 * z.b2 * z.b2),
    },
    Builtin {
        label: "star-dagger",
        class: FieldClass::KerStar,
        kernels: [true, true, false],
        formula: "b1 conj(b2) e + conj(b1) b2 e†",
        build: |z| slots(z.b1 * z.b2.conj(), z.b1.conj() * z.b2),
    },
    Builtin {
        label: "theta-tilde",
        class: FieldClass::KerStar,
        kernels: [true, true, false],
        formula: "b1 conj(b2) e + conj(b1)^2 e†",
        build: |z| slots(z.b1 * z.b2.conj(), z.b1.conj() * z.b1.conj()),
    },
    Builtin {
        label: "hat-poly",
        class: FieldClass::KerStar,
        kernels: [true, true, false],
        formula: "(b1^2 + conj(b2)) e + (conj(b1) b2 + b2^2) e†",
        build: |z| slots(z.b1 * z.b1 + z.b2.conj(), z.b1.conj() * z.b2 + z.b2 * z.b2),
    },
    Builtin {
        label: "star-only",
        class: FieldClass::KerStar,
        kernels: [true, false, false],
        formula: "b1 |b2|^2 e + b2 e†",
        build: |z| slots(z.b1 * z.b2.norm_sqr(), z.b2),
    },
    Builtin {
        label: "skew-c1",
        class: FieldClass::KerStar,
        kernels: [true, false, false],
        formula: "(b1 conj(b2) + b2) e + conj(b1) e†",
        build: |z| slots(z.b1 * z.b2.conj() + z.b2, z.b1.conj()),
    },
    Builtin {
        label: "dagger-only",
        class: FieldClass::KerDagger,
        kernels: [false, true, false],
        formula: "(conj(b1) + conj(b2)) e + conj(b2) e†",
        build: |z| slots(z.b1.conj() + z.b2.conj(), z.b2.conj()),
    },
    Builtin {
        label: "bar-only",
        class: FieldClass::KerBar,
        kernels: [false, false, true],
        formula: "(conj(b1) + b2) e + conj(b2) e†",
        build: |z| slots(z.b1.conj() + z.b2, z.b2.conj()),
    },
    Builtin {
        label: "generic",
        class: FieldClass::GenericC1,
        kernels: [false, false, false],
        formula: "(conj(b1) b2 + b1^2) e + (conj(b2) + |b1|^2) e†",
        build: |z| {
            slots(
                z.b1.conj() * z.b2 + z.b1 * z.b1,
                z.b2.conj() + z.b1.norm_sqr(),
            )
        },
    },
    Builtin {
        label: "generic-exp",
        class: FieldClass::GenericC1,
        kernels: [false, false, false],
        formula: "exp(conj(b1) b2) e + (conj(b1) conj(b2) + b2) e†",
        build: |z| slots((z.b1.conj() * z.b2).exp(), z.b1.conj() * z.b2.conj() + z.b2),
    },
    Builtin {
        label: "generic-poly",
        class: FieldClass::GenericC1,
        kernels: [false, false, false],
        formula: "(|b1|^2 b2 + conj(b2)) e + (conj(b1) b2^2 + b1 conj(b2)) e†",
        build: |z| {
            slots(
                z.b1.norm_sqr() * z.b2 + z.b2.conj(),
                z.b1.conj() * z.b2 * z.b2 + z.b1 * z.b2.conj(),
            )
        },
    },
    Builtin {
        label: "generic-trig",
        class: FieldClass::GenericC1,
        kernels: [false, false, false],
        formula: "(sin(conj(b1)) + b2 conj(b2)) e + cos(b1 conj(b2)) e†",
        build: |z| {
            slots(
                z.b1.conj().sin() + z.b2 * z.b2.conj(),
                (z.b1 * z.b2.conj()).cos(),
            )
        },
    },
    Builtin {
        label: "generic-mixed",
        class: FieldClass::GenericC1,
        kernels: [false, false, false],
        formula: "(exp(conj(b1)) b2 + conj(b2)^2) e + (|b1|^2 + conj(b2) b2^2) e†",
        build: |z| {
            slots(
                z.b1.conj().exp() * z.b2 + z.b2.conj() * z.b2.conj(),
                Complex::new(z.b1.norm_sqr(), 0.0) + z.b2.conj() * z.b2 * z.b2,
            )
        },
    },
];

pub fn builtins() -> &'static [Builtin] {
    REGISTRY
}

pub fn builtin_entry(label: &str) -> Option<&'static Builtin> {
    REGISTRY.iter().find(|b| b.label == label)
}

pub fn builtin(label: &str) -> Result<ScalarField> {
    builtin_entry(label)
        .map(Builtin::field)
        .ok_or_else(|| Error::UnknownField(label.to_string()))
}

/// Labels of the registry fields whose kernel pattern includes every `true`
/// entry of `required`.
pub fn members_of(required: [bool; 3]) -> Vec<&'static str> {
    REGISTRY
        .iter()
        .filter(|b| {
            b.kernels
                .iter()
                .zip(required)
                .all(|(has, need)| *has || !need)
        })
        .map(|b| b.label)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{classify, CLASSIFY_STEP, CLASSIFY_TOL};
    use crate::quadrature::ProductDomain;

    #[test]
    fn registry_ground_truth_matches_classification() {
        let dom = ProductDomain::bidisk();
        for b in builtins() {
            let m = classify(&b.field(), &dom, 24, CLASSIFY_STEP, CLASSIFY_TOL).unwrap();
            assert_eq!(
                m.as_array(),
                b.expected(),
                "{} residuals {:?}",
                b.label,
                m.max_residual
            );
        }
    }

    #[test]
    fn lookup() {
        assert!(builtin("square").is_ok());
        assert!(matches!(builtin("nope"), Err(Error::UnknownField(_))));
        let labels: std::collections::HashSet<_> = builtins().iter().map(|b| b.label).collect();
        assert_eq!(labels.len(), builtins().len());
        assert!(members_of([true, false, true]).contains(&"square"));
        assert!(!members_of([true, false, true]).contains(&"star-dagger"));
    }

    #[test]
    fn all_seven_classes_covered() {
        let patterns: std::collections::HashSet<[bool; 3]> =
            builtins().iter().map(|b| b.kernels).collect();
        assert_eq!(patterns.len(), 8);
    }
}
