//! Split real/imaginary vectors for the inner loops of grid passes.

use crate::algebra::{BiComplex, Complex};

#[derive(Clone, Debug, Default)]
pub(crate) struct SplitVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

const LANES: usize = 4;
/// Outputs up to this many entries skip the blocked product.
const SMALL_PRODUCT: usize = 2;

impl SplitVec {
    pub fn zeros(n: usize) -> Self {
        SplitVec {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    pub fn from_complex(xs: impl Iterator<Item = Complex>) -> Self {
        let mut v = SplitVec::default();
        v.re.reserve(xs.size_hint().0);
        v.im.reserve(xs.size_hint().0);
        for x in xs {
            v.re.push(x.re);
            v.im.push(x.im);
        }
        v
    }

    /// One idempotent slot of a row, optionally multiplied by weights.
    pub fn from_slot(row: &[BiComplex], slot: usize, weights: Option<&[f64]>) -> Self {
        let n = row.len();
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        let pick = |v: &BiComplex| if slot == 0 { v.b1 } else { v.b2 };
        match weights {
            Some(w) => {
                for (((r, i), v), w) in re.iter_mut().zip(im.iter_mut()).zip(row).zip(w) {
                    let x = pick(v);
                    *r = x.re * w;
                    *i = x.im * w;
                }
            }
            None => {
                for ((r, i), v) in re.iter_mut().zip(im.iter_mut()).zip(row) {
                    let x = pick(v);
                    *r = x.re;
                    *i = x.im;
                }
            }
        }
        SplitVec { re, im }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn get(&self, i: usize) -> Complex {
        Complex::new(self.re[i], self.im[i])
    }

    /// `self += c · x`.
    pub fn axpy(&mut self, c: Complex, x: &SplitVec) {
        let (cr, ci) = (c.re, c.im);
        for ((yr, yi), (xr, xi)) in self
            .re
            .iter_mut()
            .zip(self.im.iter_mut())
            .zip(x.re.iter().zip(&x.im))
        {
            *yr += cr * xr - ci * xi;
            *yi += cr * xi + ci * xr;
        }
    }

    /// `Σ self_k conj(c_k)` with fixed-lane accumulation.
    pub fn dot_conj(&self, c: &SplitVec) -> Complex {
        let n = self.len().min(c.len());
        let (ar, ai, cr, ci) = (&self.re[..n], &self.im[..n], &c.re[..n], &c.im[..n]);
        let mut sr = [0.0f64; LANES];
        let mut si = [0.0f64; LANES];
        let chunks = ar
            .chunks_exact(LANES)
            .zip(ai.chunks_exact(LANES))
            .zip(cr.chunks_exact(LANES).zip(ci.chunks_exact(LANES)));
        for ((xr, xi), (yr, yi)) in chunks {
            for l in 0..LANES {
                sr[l] += xr[l] * yr[l] + xi[l] * yi[l];
                si[l] += xi[l] * yr[l] - xr[l] * yi[l];
            }
        }
        let mut re = (sr[0] + sr[1]) + (sr[2] + sr[3]);
        let mut im = (si[0] + si[1]) + (si[2] + si[3]);
        for k in n - n % LANES..n {
            re += ar[k] * cr[k] + ai[k] * ci[k];
            im += ai[k] * cr[k] - ar[k] * ci[k];
        }
        Complex::new(re, im)
    }
}

/// Row-major complex matrix with split real and imaginary parts.
#[derive(Clone, Debug, Default)]
pub(crate) struct SplitMat {
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl SplitMat {
    pub fn with_cols(cols: usize) -> Self {
        SplitMat {
            cols,
            re: Vec::new(),
            im: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.re.len() / self.cols
        }
    }

    pub fn push_row(&mut self, v: &SplitVec) {
        debug_assert_eq!(v.len(), self.cols);
        self.re.extend_from_slice(&v.re);
        self.im.extend_from_slice(&v.im);
    }

    /// One idempotent slot of a row, optionally multiplied by weights.
    pub fn push_slot(&mut self, row: &[BiComplex], slot: usize, weights: Option<&[f64]>) {
        debug_assert_eq!(row.len(), self.cols);
        let pick = |v: &BiComplex| if slot == 0 { v.b1 } else { v.b2 };
        match weights {
            Some(w) => {
                self.re
                    .extend(row.iter().zip(w).map(|(v, w)| pick(v).re * w));
                self.im
                    .extend(row.iter().zip(w).map(|(v, w)| pick(v).im * w));
            }
            None => {
                self.re.extend(row.iter().map(|v| pick(v).re));
                self.im.extend(row.iter().map(|v| pick(v).im));
            }
        }
    }

    /// Sum-based check of the most recent row: any NaN or infinity makes
    /// the sum non-finite.
    pub fn last_row_finite(&self) -> bool {
        let start = self.re.len().saturating_sub(self.cols);
        let mut acc = 0.0f64;
        for (r, i) in self.re[start..].iter().zip(&self.im[start..]) {
            acc += r * 0.0 + i * 0.0;
        }
        acc == 0.0
    }

    pub fn row(&self, i: usize) -> SplitVec {
        let r = i * self.cols..(i + 1) * self.cols;
        SplitVec {
            re: self.re[r.clone()].to_vec(),
            im: self.im[r].to_vec(),
        }
    }

    pub fn add_assign(&mut self, other: &SplitMat) {
        for (y, v) in self.re.iter_mut().zip(&other.re) {
            *y += v;
        }
        for (y, v) in self.im.iter_mut().zip(&other.im) {
            *y += v;
        }
    }

    /// `self · otherᴴ`, `rows × other.rows`.
    pub fn mul_conj_t(&self, other: &SplitMat) -> SplitMat {
        let k = self.cols;
        assert_eq!(k, other.cols);
        let a = Operand {
            re: &self.re,
            im: &self.im,
            rs: k as isize,
            cs: 1,
            conj: false,
        };
        let b = Operand {
            re: &other.re,
            im: &other.im,
            rs: 1,
            cs: k as isize,
            conj: true,
        };
        cgemm(self.rows(), k, other.rows(), a, b)
    }

    /// `selfᴴ · other`, `cols × other.cols`.
    pub fn conj_t_mul(&self, other: &SplitMat) -> SplitMat {
        let k = self.rows();
        assert_eq!(k, other.rows());
        let a = Operand {
            re: &self.re,
            im: &self.im,
            rs: 1,
            cs: self.cols as isize,
            conj: true,
        };
        let b = Operand {
            re: &other.re,
            im: &other.im,
            rs: other.cols as isize,
            cs: 1,
            conj: false,
        };
        cgemm(self.cols, k, other.cols, a, b)
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = Complex> + '_ {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| Complex::new(*r, *i))
    }
}

struct Operand<'a> {
    re: &'a [f64],
    im: &'a [f64],
    rs: isize,
    cs: isize,
    conj: bool,
}

/// `A · B` for `m × k` and `k × n` operands, either of which may be conjugated.
fn cgemm(m: usize, k: usize, n: usize, a: Operand, b: Operand) -> SplitMat {
    let mut c = SplitMat {
        cols: n,
        re: vec![0.0; m * n],
        im: vec![0.0; m * n],
    };
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let gemm = |alpha: f64, x: &[f64], y: &[f64], beta: f64, out: &mut [f64]| {
        assert!(x.len() as isize > (m as isize - 1) * a.rs + (k as isize - 1) * a.cs);
        assert!(y.len() as isize > (k as isize - 1) * b.rs + (n as isize - 1) * b.cs);
        // SAFETY: the asserts above keep every strided access in bounds and
        // `out` holds m × n row-major entries.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                alpha,
                x.as_ptr(),
                a.rs,
                a.cs,
                y.as_ptr(),
                b.rs,
                b.cs,
                beta,
                out.as_mut_ptr(),
                n as isize,
                1,
            )
        }
    };
    let sa = if a.conj { -1.0 } else { 1.0 };
    let sb = if b.conj { -1.0 } else { 1.0 };
    if m * n <= SMALL_PRODUCT {
        // Packing dominates for tiny outputs.
        let gather = |o: &Operand, fixed: isize, step: isize, s: f64| {
            let idx = |l: usize| (fixed + l as isize * step) as usize;
            SplitVec {
                re: (0..k).map(|l| o.re[idx(l)]).collect(),
                im: (0..k).map(|l| s * o.im[idx(l)]).collect(),
            }
        };
        for i in 0..m {
            let x = gather(&a, i as isize * a.rs, a.cs, sa);
            for j in 0..n {
                // x · y = Σ x conj(conj y).
                let y = gather(&b, j as isize * b.cs, b.rs, -sb);
                let v = x.dot_conj(&y);
                c.re[i * n + j] = v.re;
                c.im[i * n + j] = v.im;
            }
        }
        return c;
    }
    gemm(1.0, a.re, b.re, 0.0, &mut c.re);
    gemm(-sa * sb, a.im, b.im, 1.0, &mut c.re);
    gemm(sa, a.im, b.re, 0.0, &mut c.im);
    gemm(sb, a.re, b.im, 1.0, &mut c.im);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_and_axpy() {
        let a = SplitVec::from_complex((0..7).map(|k| Complex::new(k as f64, 1.0 - k as f64)));
        let c = SplitVec::from_complex((0..7).map(|k| Complex::new(0.5 * k as f64, 2.0)));
        let want: Complex = (0..7).map(|k| a.get(k) * c.get(k).conj()).sum();
        assert!((a.dot_conj(&c) - want).norm() < 1e-12);
        let mut ma = SplitMat::with_cols(7);
        ma.push_row(&a);
        ma.push_row(&c);
        let mut mc = SplitMat::with_cols(7);
        mc.push_row(&c);
        let p: Vec<Complex> = ma.mul_conj_t(&mc).entries().collect();
        assert_eq!(p.len(), 2);
        assert!((p[0] - want).norm() < 1e-12);
        assert!((p[1] - c.dot_conj(&c)).norm() < 1e-12);
        // aᴴ·[a c] over a single-column layout.
        let mut col = SplitMat::with_cols(1);
        for k in 0..7 {
            col.push_row(&SplitVec::from_complex(std::iter::once(a.get(k))));
        }
        let mut two = SplitMat::with_cols(2);
        for k in 0..7 {
            two.push_row(&SplitVec::from_complex([a.get(k), c.get(k)].into_iter()));
        }
        let q: Vec<Complex> = col.conj_t_mul(&two).entries().collect();
        assert!((q[0] - a.dot_conj(&a)).norm() < 1e-12);
        assert!((q[1] - want.conj()).norm() < 1e-12);
        let mut y = SplitVec::zeros(7);
        y.axpy(Complex::new(0.0, 2.0), &a);
        for k in 0..7 {
            assert!((y.get(k) - a.get(k) * Complex::new(0.0, 2.0)).norm() < 1e-15);
        }
    }
}
