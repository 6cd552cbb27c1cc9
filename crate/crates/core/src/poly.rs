//! Dense complex polynomials and simultaneous root finding (Aberth–Ehrlich).

use num_complex::Complex64;

/// Coefficients in ascending order: `c[0] + c[1] z + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<Complex64>);

impl Polynomial {
    pub fn from_real(c: &[f64]) -> Self {
        Self(c.iter().map(|&x| Complex64::new(x, 0.0)).collect()).trimmed()
    }

    /// `Π (z - r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self(vec![Complex64::new(1.0, 0.0)]), |p, &r| {
            p.mul(&Self(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(|c| c.norm() == 0.0) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Self(vec![Complex64::new(0.0, 0.0)]);
        }
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Self(
            (0..n)
                .map(|k| *self.0.get(k).unwrap_or(&zero) + *other.0.get(k).unwrap_or(&zero))
                .collect(),
        )
        .trimmed()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|&c| c * s).collect()).trimmed()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (k, &b) in other.0.iter().enumerate() {
                out[i + k] += a * b;
            }
        }
        Self(out).trimmed()
    }

    /// Quotient by `(z - s)`, discarding the remainder.
    pub fn deflate(&self, s: Complex64) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self(vec![Complex64::new(0.0, 0.0)]);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let mut carry = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            carry = self.0[k] + carry * s;
            out[k - 1] = carry;
        }
        Self(out)
    }

    /// All roots, by Aberth–Ehrlich iteration from points on a circle.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.clone().trimmed();
        let n = p.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = p.0[n];
        let monic: Vec<Complex64> = p.0.iter().map(|&c| c / lead).collect();
        // Cauchy bound on root moduli
        let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        let dp = p.derivative();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for k in 0..n {
                let pk = p.eval(z[k]);
                if pk.norm() == 0.0 {
                    continue;
                }
                let ratio = pk / dp.eval(z[k]);
                let repulsion: Complex64 = (0..n).filter(|&i| i != k).map(|i| 1.0 / (z[k] - z[i])).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                if step.is_finite() {
                    z[k] -= step;
                    moved = moved.max(step.norm() / z[k].norm().max(1.0));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        // polish each root with Newton on the original polynomial
        for r in &mut z {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = p.eval(*r) / d;
                if step.is_finite() {
                    *r -= step;
                }
            }
        }
        z
    }
}
