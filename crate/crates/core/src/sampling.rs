//! Deterministic sample points in product domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BiComplex, Complex};
use crate::error::{Error, Result};
use crate::quadrature::{PlanarDomain, ProductDomain};

const BASES: [u64; 4] = [2, 3, 5, 7];
const MAX_ATTEMPTS_PER_POINT: usize = 1000;

/// Radical inverse of `n` in the given base.
pub fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while n > 0 {
        r += f * (n % base) as f64;
        n /= base;
        f *= inv;
    }
    r
}

/// The `n`-th point of the 4-dimensional Halton sequence, optionally shifted
/// modulo 1 (Cranley–Patterson rotation).
pub fn halton4(n: u64, shift: [f64; 4]) -> [f64; 4] {
    let mut p = [0.0; 4];
    for (d, base) in BASES.iter().enumerate() {
        p[d] = (radical_inverse(n, *base) + shift[d]).fract();
    }
    p
}

fn rotation(seed: u64) -> [f64; 4] {
    if seed == 0 {
        return [0.0; 4];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.gen(), rng.gen(), rng.gen(), rng.gen()]
}

fn map_to_box(dom: &PlanarDomain, u: f64, v: f64) -> Complex {
    let (lo, hi) = dom.bounding_box();
    Complex::new(lo.re + u * (hi.re - lo.re), lo.im + v * (hi.im - lo.im))
}

/// Up to `count` Halton points of `dom` whose idempotent coefficients lie at
/// depth greater than `margin` in their planar domains.
///
/// Points are drawn on the bounding boxes of the two planar domains and
/// rejected to the interior. `seed = 0` gives the plain sequence; other seeds
/// apply a Cranley–Patterson rotation. Fails with `EmptySampleSet` if no
/// point survives.
pub fn interior_samples(
    dom: &ProductDomain,
    count: usize,
    margin: f64,
    seed: u64,
) -> Result<Vec<BiComplex>> {
    let shift = rotation(seed);
    let mut out = Vec::with_capacity(count);
    let attempts = count.saturating_mul(MAX_ATTEMPTS_PER_POINT);
    for n in 1..=attempts as u64 {
        if out.len() == count {
            break;
        }
        let p = halton4(n, shift);
        let b1 = map_to_box(&dom.omega1, p[0], p[1]);
        let b2 = map_to_box(&dom.omega2, p[2], p[3]);
        if dom.omega1.depth(b1) > margin && dom.omega2.depth(b2) > margin {
            out.push(BiComplex::new(b1, b2));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    Ok(out)
}

/// Pseudo-random points of `dom` (uniform on the bounding boxes, rejected to
/// depth greater than `margin`), reproducible from `seed`.
pub fn random_points(
    dom: &ProductDomain,
    count: usize,
    margin: f64,
    seed: u64,
) -> Result<Vec<BiComplex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > count.saturating_mul(MAX_ATTEMPTS_PER_POINT) {
            break;
        }
        let b1 = map_to_box(&dom.omega1, rng.gen(), rng.gen());
        let b2 = map_to_box(&dom.omega2, rng.gen(), rng.gen());
        if dom.omega1.depth(b1) > margin && dom.omega2.depth(b2) > margin {
            out.push(BiComplex::new(b1, b2));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn samples_are_interior_and_reproducible() {
        let dom = ProductDomain::bidisk();
        let a = interior_samples(&dom, 50, 0.01, 7).unwrap();
        let b = interior_samples(&dom, 50, 0.01, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|z| z.b1.norm() < 0.99 && z.b2.norm() < 0.99));
        let c = interior_samples(&dom, 50, 0.01, 8).unwrap();
        assert_ne!(a, c);
        let r = random_points(&dom, 20, 0.0, 1).unwrap();
        assert!(r.iter().all(|z| dom.contains(*z)));
    }
}
