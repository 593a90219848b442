//! Real solution bases of constant-coefficient linear ODEs.
//!
//! Given the roots of a characteristic polynomial, [`ExpBasis`] builds the
//! usual real basis: `tʲ·e^{λt}` for a real root of multiplicity > j, and
//! `tʲ·e^{αt}·cos βt`, `tʲ·e^{αt}·sin βt` for a complex pair `α ± iβ`.

use num_complex::Complex64;

/// Roots closer than this are treated as one repeated root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    root: Complex64,
    power: u32,
    part: Part,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpBasis {
    terms: Vec<Term>,
}

/// Roots of `r² + b·r + c = 0`.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

impl ExpBasis {
    /// Basis for the given roots (with multiplicity). Conjugate pairs must
    /// both be present; only the member with positive imaginary part is used.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut clusters: Vec<(Complex64, u32)> = Vec::new();
        for &r in roots {
            let r = if r.im.abs() <= ROOT_CLUSTER_TOL {
                Complex64::new(r.re, 0.0)
            } else {
                r
            };
            match clusters.iter_mut().find(|(c, _)| (c - r).norm() <= ROOT_CLUSTER_TOL) {
                Some((_, m)) => *m += 1,
                None => clusters.push((r, 1)),
            }
        }
        clusters.sort_by(|a, b| {
            b.0.re
                .total_cmp(&a.0.re)
                .then(b.0.im.total_cmp(&a.0.im))
        });
        let mut terms = Vec::new();
        for (root, mult) in clusters {
            if root.im < 0.0 {
                continue;
            }
            for power in 0..mult {
                terms.push(Term {
                    root,
                    power,
                    part: Part::Re,
                });
                if root.im > 0.0 {
                    terms.push(Term {
                        root,
                        power,
                        part: Part::Im,
                    });
                }
            }
        }
        ExpBasis { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `order`-th derivative of basis function `k` at `t`.
    pub fn basis_derivative(&self, k: usize, order: u32, t: f64) -> f64 {
        let term = self.terms[k];
        let z = term.root;
        let j = term.power;
        // d^m (t^j e^{zt}) = sum_i C(m,i) j!/(j-i)! t^{j-i} z^{m-i} e^{zt}
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        let mut falling = 1.0;
        for i in 0..=order.min(j) {
            if i > 0 {
                binom *= (order - i + 1) as f64 / i as f64;
                falling *= (j - i + 1) as f64;
            }
            acc += z.powu(order - i) * (binom * falling * t.powi((j - i) as i32));
        }
        let v = acc * (z * t).exp();
        match term.part {
            Part::Re => v.re,
            Part::Im => v.im,
        }
    }

    pub fn basis_value(&self, k: usize, t: f64) -> f64 {
        self.basis_derivative(k, 0, t)
    }

    /// `order`-th derivative of `Σ coeffs[k]·φ_k` at `t`.
    pub fn derivative(&self, coeffs: &[f64], order: u32, t: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.basis_derivative(k, order, t))
            .sum()
    }

    pub fn value(&self, coeffs: &[f64], t: f64) -> f64 {
        self.derivative(coeffs, 0, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn repeated_real_roots_give_polynomial_factors() {
        let b = ExpBasis::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(b.len(), 4);
        let t: f64 = 0.7;
        let e = t.exp();
        assert_abs_diff_eq!(b.basis_value(0, t), e, epsilon = 1e-14);
        assert_abs_diff_eq!(b.basis_value(1, t), t * e, epsilon = 1e-14);
        assert_abs_diff_eq!(b.basis_value(3, t), t / e, epsilon = 1e-14);
        // d/dt t e^t = (1 + t) e^t
        assert_abs_diff_eq!(b.basis_derivative(1, 1, t), (1.0 + t) * e, epsilon = 1e-14);
        // d²/dt² t e^t = (2 + t) e^t
        assert_abs_diff_eq!(b.basis_derivative(1, 2, t), (2.0 + t) * e, epsilon = 1e-13);
    }

    #[test]
    fn zero_root_of_multiplicity_four_is_cubic() {
        let b = ExpBasis::from_roots(&[c(0.0, 0.0); 4]);
        let coeffs = [1.0, 2.0, 3.0, 4.0];
        let t = 1.5;
        let want = 1.0 + 2.0 * t + 3.0 * t * t + 4.0 * t * t * t;
        assert_abs_diff_eq!(b.value(&coeffs, t), want, epsilon = 1e-12);
        assert_abs_diff_eq!(b.derivative(&coeffs, 3, t), 24.0, epsilon = 1e-12);
        assert_eq!(b.derivative(&coeffs, 4, t), 0.0);
    }

    #[test]
    fn complex_pair_gives_damped_trig() {
        let b = ExpBasis::from_roots(&[c(-0.5, 2.0), c(-0.5, -2.0)]);
        assert_eq!(b.len(), 2);
        let t: f64 = 0.3;
        let env = (-0.5 * t).exp();
        assert_abs_diff_eq!(b.basis_value(0, t), env * (2.0 * t).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(b.basis_value(1, t), env * (2.0 * t).sin(), epsilon = 1e-14);
        let d = -0.5 * env * (2.0 * t).cos() - 2.0 * env * (2.0 * t).sin();
        assert_abs_diff_eq!(b.basis_derivative(0, 1, t), d, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_roots_cover_all_discriminants() {
        let r = quadratic_roots(0.0, -1.0);
        assert_eq!((r[0].re, r[1].re), (1.0, -1.0));
        let r = quadratic_roots(0.0, 1.0);
        assert_eq!((r[0].im, r[1].im), (1.0, -1.0));
        let r = quadratic_roots(-2.0, 1.0);
        assert_eq!(r[0], r[1]);
    }
}
