use std::f64::consts::PI;

use bcb_core::builtins::builtins;
use bcb_core::field::{
    classify, eval_operators, product_type, theta_conjugate, CLASSIFY_STEP, CLASSIFY_TOL,
};
use bcb_core::kernels::{kernel_for, BcKernelKind};
use bcb_core::{BiComplex, Complex, ProductDomain};
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = Complex> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex::new(a, b))
}

fn point(r: f64) -> impl Strategy<Value = BiComplex> {
    (0.0..r, -PI..PI, 0.0..r, -PI..PI).prop_map(|(r1, t1, r2, t2)| {
        BiComplex::new(Complex::from_polar(r1, t1), Complex::from_polar(r2, t2))
    })
}

proptest! {
    // On h1(β1) e + h2(β2) e† the operators act slotwise, without a 1/2:
    // ∂/∂Z* ↦ (∂h1/∂β̄1, ∂h2/∂β̄2), ∂/∂Z ↦ (∂h1/∂β1, ∂h2/∂β2).
    #[test]
    fn operators_are_plain_wirtinger_derivatives_per_slot(
        a in complex(2.0), c in complex(2.0), z in point(0.9),
    ) {
        let f = product_type(
            move |b: Complex| a * b * b.conj() + c * b.conj() * b.conj(),
            move |b: Complex| c * b * b + a * b.conj(),
        );
        let r = eval_operators(&f, z, 1e-4).unwrap();
        let (b1, b2) = (z.b1, z.b2);
        let d_star = BiComplex::new(a * b1 + c * b1.conj() * 2.0, a);
        let d_z = BiComplex::new(a * b1.conj(), c * b2 * 2.0);
        prop_assert!(r.d_star.dist(d_star) < 1e-6, "{:?} vs {:?}", r.d_star, d_star);
        prop_assert!(r.d_z.dist(d_z) < 1e-6);
    }

    #[test]
    fn bidisk_bergman_kernel_closed_form(z in point(0.9), w in point(0.9)) {
        let k = kernel_for(&ProductDomain::bidisk(), BcKernelKind::Bergman, 10).unwrap();
        let got = k.try_eval(z, w).unwrap();
        let d = BiComplex::ONE - z * w.star();
        let expected = (d * d).inverse().unwrap().scale(1.0 / (PI * PI));
        prop_assert!(got.dist(expected) <= 1e-12 * (1.0 + expected.sup_norm()));
    }
}

// θ swaps the units i and j: it fixes `*` and exchanges `†` with `¯`.
#[test]
fn theta_exchanges_dagger_and_bar_kernels() {
    let dom = ProductDomain::bidisk();
    assert_eq!(dom.theta_image(), dom);
    for b in builtins() {
        let f = b.field();
        let m = classify(&f, &dom, 16, CLASSIFY_STEP, CLASSIFY_TOL).unwrap();
        let t = classify(&theta_conjugate(&f), &dom, 16, CLASSIFY_STEP, CLASSIFY_TOL).unwrap();
        assert_eq!(
            [t.star, t.dagger, t.bar],
            [m.star, m.bar, m.dagger],
            "{}",
            b.label
        );
    }
}
