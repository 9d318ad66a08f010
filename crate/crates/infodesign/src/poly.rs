//! Dense real polynomials in one variable, coefficients in ascending order.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `c0 + c1·t`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.0.get(k).unwrap_or(&0.0) + o.0.get(k).unwrap_or(&0.0)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    /// Coefficients padded or truncated to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| *self.0.get(k).unwrap_or(&0.0)).collect()
    }

    /// Real roots via companion-matrix eigenvalues, Newton-polished and sorted.
    pub fn real_roots(&self) -> Vec<f64> {
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Vec::new();
        }
        let mut c = self.0.clone();
        while c.len() > 1 && c.last().unwrap().abs() <= 1e-14 * scale {
            c.pop();
        }
        let deg = c.len() - 1;
        if deg == 0 {
            return Vec::new();
        }
        let lead = c[deg];
        let mut comp = DMatrix::zeros(deg, deg);
        for k in 0..deg {
            comp[(0, k)] = -c[deg - 1 - k] / lead;
            if k + 1 < deg {
                comp[(k + 1, k)] = 1.0;
            }
        }
        let eig = comp.complex_eigenvalues();
        let trimmed = Poly(c);
        let d = trimmed.derivative();
        let mut roots: Vec<f64> = Vec::new();
        for z in eig.iter() {
            if z.im.abs() > 1e-7 * (1.0 + z.re.abs()) {
                continue;
            }
            let mut t = z.re;
            for _ in 0..50 {
                let dv = d.eval(t);
                if dv == 0.0 {
                    break;
                }
                let step = trimmed.eval(t) / dv;
                t -= step;
                if step.abs() <= 1e-15 * (1.0 + t.abs()) {
                    break;
                }
            }
            if !t.is_finite() {
                continue;
            }
            // Near a double root f is flat; the derivative's simple root is sharper.
            let dd = d.derivative();
            let mut u = t;
            for _ in 0..50 {
                let ddv = dd.eval(u);
                if ddv == 0.0 {
                    break;
                }
                let step = d.eval(u) / ddv;
                u -= step;
                if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                    break;
                }
            }
            if u.is_finite() && (u - t).abs() <= 1e-6 * (1.0 + t.abs()) && trimmed.eval(u).abs() <= trimmed.eval(t).abs() {
                t = u;
            }
            roots.push(t);
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + a.abs()));
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = Poly::linear(1.0, 2.0).mul(&Poly::linear(-1.0, 1.0));
        assert_eq!(p.0, vec![-1.0, -1.0, 2.0]);
        assert_eq!(p.eval(2.0), 5.0);
        assert_eq!(p.derivative().0, vec![-1.0, 4.0]);
    }

    #[test]
    fn double_root_to_full_precision() {
        let p = Poly::linear(1.0 / 18.0, 1.0).mul(&Poly::linear(1.0 / 18.0, 1.0)).mul(&Poly::linear(-2.0, 1.0));
        let r = p.real_roots();
        assert!(r.iter().any(|t| (t + 1.0 / 18.0).abs() < 1e-13), "{r:?}");
    }

    #[test]
    fn roots_of_product() {
        let p = Poly::linear(-1.0, 1.0)
            .mul(&Poly::linear(2.0, 1.0))
            .mul(&Poly::linear(-0.5, 1.0))
            .mul(&Poly(vec![1.0, 0.0, 1.0]));
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
