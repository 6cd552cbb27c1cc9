//! Bethe-ansatz equations for the eigenvalues of the Heun operator on a ball block.
//!
//! Two systems live here. [`PrintedBetheProblem`] is the BC-Gaudin form written
//! in terms of roots `z_k` and an angle `θ`. [`StieltjesProblem`] comes from
//! realizing the spin operators on polynomials (`|j,m⟩ ↔ v^(j-m)`, `s⁺ = d/dv`,
//! `s⁻ = 2jv - v² d/dv`): `T` becomes a second-order operator
//! `P(v)∂² + Q(v)∂ + R(v)` and the roots of an eigenpolynomial satisfy
//! `Σ_{p≠k} 1/(v_k-v_p) + Q(v_k)/(2P(v_k)) = 0`. Eigenpolynomials may carry a
//! root of fixed multiplicity at a singular point of `P`; those sectors are
//! enumerated separately.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heun::{ball_rows, restricted_heun, HeunParams};
use crate::model::GraphSpec;
use crate::poly::Polynomial;
use crate::terwilliger::IrreducibleModule;

/// Roots closer than this to a pole, or to each other, are rejected.
pub const POLE_MARGIN: f64 = 1e-8;
/// A configuration counts as solved below this max-norm residual.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Configurations equal up to permutation within this distance are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which root count to pair with a ball block of dimension `M_SV`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootCount {
    /// `N - d + j + n/2 = M_SV - 1`.
    BlockDimMinusOne,
    /// `M_SV`.
    BlockDim,
}

impl RootCount {
    pub const ALL: [RootCount; 2] = [RootCount::BlockDimMinusOne, RootCount::BlockDim];

    pub fn count(self, block_dim: usize) -> usize {
        match self {
            RootCount::BlockDimMinusOne => block_dim - 1,
            RootCount::BlockDim => block_dim,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RootCount::BlockDimMinusOne => "block-dim-minus-one",
            RootCount::BlockDim => "block-dim",
        }
    }
}

/// A system of Bethe equations in a fixed number of free roots.
pub trait BetheSystem {
    fn root_count(&self) -> usize;
    fn poles(&self) -> Vec<Complex64>;
    fn residuals(&self, z: &[Complex64]) -> Result<Vec<Complex64>>;
    fn jacobian(&self, z: &[Complex64]) -> DMatrix<Complex64>;
    /// Heun eigenvalue carried by a solved configuration.
    fn eigenvalue(&self, z: &[Complex64]) -> Result<f64>;
    /// Extra admissibility beyond pole and coincidence exclusion.
    fn admissible(&self, _z: &[Complex64]) -> bool {
        true
    }
    /// All solutions for a single root, when available in closed form.
    fn single_root_candidates(&self) -> Vec<Complex64> {
        Vec::new()
    }
}

fn check_poles(poles: &[Complex64], z: &[Complex64], margin: f64) -> Result<()> {
    for (index, &zk) in z.iter().enumerate() {
        for &p in poles {
            if (zk - p).norm() < margin {
                return Err(Error::PoleProximity {
                    index,
                    root: zk.to_string(),
                    pole: p.to_string(),
                    margin,
                });
            }
        }
    }
    Ok(())
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// The BC-Gaudin equations with the angle `θ = ½ arccot(√(q-1)/(q-2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedBetheProblem {
    pub theta: f64,
    pub twice_j: u32,
    pub mu: f64,
    pub nu: f64,
    pub m: usize,
    pub spec: GraphSpec,
    pub n: u32,
}

/// `½ arccot(√(q-1)/(q-2))` with arccot in `(0, π)`; zero for `q = 2`.
pub fn bethe_theta(q: u32) -> f64 {
    let q = f64::from(q);
    0.5 * (q - 2.0).atan2((q - 1.0).sqrt())
}

impl PrintedBetheProblem {
    pub fn new(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams, m: usize) -> Self {
        Self {
            theta: bethe_theta(spec.q),
            twice_j: module.twice_j,
            mu: params.mu as f64,
            nu: params.nu as f64,
            m,
            spec: *spec,
            n: module.n,
        }
    }

    fn j(&self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    fn w(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.theta)
    }

    fn field(&self, z: Complex64) -> Complex64 {
        let w = self.w();
        w * self.j() * (z * z - 1.0) / ((w * z - 1.0) * (w - z))
            + ((z * z + 1.0) * (1.0 - self.nu / 2.0) - self.mu * z) / (z * z - 1.0)
    }

    fn field_derivative(&self, z: Complex64) -> Complex64 {
        let w = self.w();
        let n1 = z * z - 1.0;
        let d1 = (w * z - 1.0) * (w - z);
        let d1p = -2.0 * w * z + w * w + 1.0;
        let g1 = w * self.j() * (2.0 * z * d1 - n1 * d1p) / (d1 * d1);
        let n2 = (z * z + 1.0) * (1.0 - self.nu / 2.0) - self.mu * z;
        let n2p = 2.0 * z * (1.0 - self.nu / 2.0) - self.mu;
        let d2 = z * z - 1.0;
        g1 + (n2p * d2 - n2 * 2.0 * z) / (d2 * d2)
    }

    /// Constant part `q(nq/2 - d)(nq - 2d + μ + ν)` of the eigenvalue.
    fn offset(&self) -> f64 {
        let (q, d, n) = (f64::from(self.spec.q), f64::from(self.spec.d), f64::from(self.n));
        q * (n * q / 2.0 - d) * (n * q - 2.0 * d + self.mu + self.nu)
    }
}

fn pair(x: Complex64, y: Complex64) -> Complex64 {
    y * (x * x - 1.0) / ((x - y) * (x * y - 1.0))
}

fn pair_dx(x: Complex64, y: Complex64) -> Complex64 {
    let dh = (x - y) * (x * y - 1.0);
    let dhx = 2.0 * x * y - 1.0 - y * y;
    y * (2.0 * x * dh - (x * x - 1.0) * dhx) / (dh * dh)
}

fn pair_dy(x: Complex64, y: Complex64) -> Complex64 {
    let dh = (x - y) * (x * y - 1.0);
    let dhy = x * x - 2.0 * x * y + 1.0;
    (x * x - 1.0) * (dh - y * dhy) / (dh * dh)
}

impl BetheSystem for PrintedBetheProblem {
    fn root_count(&self) -> usize {
        self.m
    }

    fn poles(&self) -> Vec<Complex64> {
        let w = self.w();
        vec![c(1.0), c(-1.0), w, w.conj()]
    }

    fn residuals(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_poles(&self.poles(), z, 1e-10)?;
        Ok((0..z.len())
            .map(|k| {
                self.field(z[k])
                    + (0..z.len())
                        .filter(|&p| p != k)
                        .map(|p| pair(z[k], z[p]))
                        .sum::<Complex64>()
            })
            .collect())
    }

    fn jacobian(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let m = z.len();
        DMatrix::from_fn(m, m, |k, p| {
            if k == p {
                self.field_derivative(z[k])
                    + (0..m).filter(|&i| i != k).map(|i| pair_dx(z[k], z[i])).sum::<Complex64>()
            } else {
                pair_dy(z[k], z[p])
            }
        })
    }

    fn eigenvalue(&self, z: &[Complex64]) -> Result<f64> {
        let q = f64::from(self.spec.q);
        let sum: Complex64 = z.iter().map(|&x| x + 1.0 / x).sum();
        let t = q * (c(self.j() * (2.0 * self.theta).cos() + self.mu / 2.0) - 0.5 * sum) + self.offset();
        real_part(t)
    }

    fn admissible(&self, z: &[Complex64]) -> bool {
        (0..z.len()).all(|k| (k + 1..z.len()).all(|p| (z[k] * z[p] - 1.0).norm() >= POLE_MARGIN))
    }

    fn single_root_candidates(&self) -> Vec<Complex64> {
        if self.m != 1 {
            return Vec::new();
        }
        // clear (wz-1)(w-z)(z²-1) from the one-root equation
        let w = self.w();
        let z2m1 = Polynomial(vec![c(-1.0), c(0.0), c(1.0)]);
        let d1 = Polynomial(vec![-w, w * w + 1.0, -w]);
        let n2 = Polynomial::from_real(&[1.0 - self.nu / 2.0, -self.mu, 1.0 - self.nu / 2.0]);
        let lhs = z2m1.mul(&z2m1).scale(w * self.j()).add(&n2.mul(&d1));
        lhs.roots()
    }
}

fn real_part(t: Complex64) -> Result<f64> {
    if t.im.abs() > 1e-8 * t.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "eigenvalue {t} is not real; configuration is not closed under conjugation"
        )));
    }
    Ok(t.re)
}

/// Coefficients of `T` on one module in the polynomial realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialHeun {
    pub j: f64,
    pub a: f64,
    pub b: f64,
    pub hx: f64,
    pub hz: f64,
    pub c0: f64,
}

impl PolynomialHeun {
    pub fn new(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams) -> Self {
        let q = f64::from(spec.q);
        let cc = f64::from(module.n) * q / 2.0 - f64::from(spec.d);
        let (mu, nu) = (params.mu as f64, params.nu as f64);
        Self {
            j: f64::from(module.twice_j) / 2.0,
            a: 2.0 * q * (q - 1.0).sqrt(),
            b: -2.0 * q * (q - 2.0),
            hx: 2.0 * (q - 1.0).sqrt() * (2.0 * cc + nu),
            hz: 4.0 * cc + mu * q - nu * (q - 2.0),
            c0: cc * (2.0 * cc + mu + nu),
        }
    }

    /// Coefficient of `v^(D+1)` in `T v^D`.
    pub fn raise(&self, deg: f64) -> f64 {
        0.5 * (2.0 * self.j - deg) * (self.a * (2.0 * self.j - 2.0 * deg - 1.0) + self.hx)
    }

    /// Coefficient of `v^D` in `T v^D`.
    pub fn diagonal(&self, deg: f64) -> f64 {
        let x = self.j - deg;
        self.b * x * x + self.hz * x + self.c0
    }

    /// Coefficient of `v^(D-1)` in `T v^D`.
    pub fn lower(&self, deg: f64) -> f64 {
        0.5 * deg * (self.a * (2.0 * self.j - 2.0 * deg + 1.0) + self.hx)
    }

    /// `P(v) = a v³ + b v² - a v`.
    pub fn p(&self) -> Polynomial {
        Polynomial::from_real(&[0.0, -self.a, self.b, self.a])
    }

    pub fn q(&self) -> Polynomial {
        let (a, b, j) = (self.a, self.b, self.j);
        Polynomial::from_real(&[
            j * a - a / 2.0 + self.hx / 2.0,
            b - 2.0 * b * j - self.hz,
            1.5 * a - 3.0 * a * j - self.hx / 2.0,
        ])
    }

    /// Real roots of `P`: `0` and `(-b ± √(b² + 4a²)) / 2a`.
    pub fn singular_points(&self) -> [f64; 3] {
        let disc = (self.b * self.b + 4.0 * self.a * self.a).sqrt();
        [0.0, (-self.b - disc) / (2.0 * self.a), (-self.b + disc) / (2.0 * self.a)]
    }

    /// Nonzero local exponent `1 - Q(s)/P'(s)` at a singular point.
    pub fn exponent(&self, s: f64) -> f64 {
        let qs = self.q().eval(c(s)).re;
        let dps = self.p().derivative().eval(c(s)).re;
        1.0 - qs / dps
    }

    /// Residue `Q(s)/(2P'(s)) = (1 - E_s)/2` of `Q/(2P)` at a singular point.
    pub fn charge(&self, s: f64) -> f64 {
        (1.0 - self.exponent(s)) / 2.0
    }

    /// `T` in the monomial basis `1, v, ..., v^deg` (column `D` holds `T v^D`).
    pub fn monomial_matrix(&self, deg: usize) -> DMatrix<f64> {
        DMatrix::from_fn(deg + 1, deg + 1, |row, col| {
            let dcol = col as f64;
            if row == col {
                self.diagonal(dcol)
            } else if row == col + 1 {
                self.raise(dcol)
            } else if row + 1 == col {
                self.lower(dcol)
            } else {
                0.0
            }
        })
    }
}

/// Residuals of `Σ_{p≠k} 1/(v_k-v_p) + Σ_s ρ_s/(v_k-s)` for point charges `ρ_s` at `s`.
fn charge_residuals(points: &[f64], charges: &[Complex64], z: &[Complex64]) -> Vec<Complex64> {
    (0..z.len())
        .map(|k| {
            let field: Complex64 = points.iter().zip(charges).map(|(&s, &r)| r / (z[k] - s)).sum();
            field
                + (0..z.len())
                    .filter(|&p| p != k)
                    .map(|p| 1.0 / (z[k] - z[p]))
                    .sum::<Complex64>()
        })
        .collect()
}

fn charge_jacobian(points: &[f64], charges: &[Complex64], z: &[Complex64]) -> DMatrix<Complex64> {
    let m = z.len();
    DMatrix::from_fn(m, m, |k, p| {
        if k == p {
            let field: Complex64 = points
                .iter()
                .zip(charges)
                .map(|(&s, &r)| -r / ((z[k] - s) * (z[k] - s)))
                .sum();
            field
                - (0..m)
                    .filter(|&i| i != k)
                    .map(|i| 1.0 / ((z[k] - z[i]) * (z[k] - z[i])))
                    .sum::<Complex64>()
        } else {
            1.0 / ((z[k] - z[p]) * (z[k] - z[p]))
        }
    })
}

/// Free roots of one sector of the polynomial Bethe system, with roots of fixed
/// multiplicity pinned at singular points.
///
/// Since `deg Q < deg P` and `P` has simple roots, `Q/(2P) = Σ_s ρ_s/(v-s)` with
/// `ρ_s = Q(s)/(2P'(s)) = (1 - E_s)/2`; a pinned root of multiplicity `e` adds `e`
/// to the charge at its point.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesProblem {
    pub heun: PolynomialHeun,
    /// Degree of the eigenpolynomial.
    pub degree: usize,
    /// `(singular point, multiplicity)`.
    pub pinned: Vec<(f64, usize)>,
    points: Vec<f64>,
    charges: Vec<Complex64>,
}

impl StieltjesProblem {
    pub fn new(heun: PolynomialHeun, degree: usize, pinned: Vec<(f64, usize)>) -> Self {
        let points = heun.singular_points().to_vec();
        let charges = points
            .iter()
            .map(|&s| {
                let extra: usize = pinned.iter().filter(|p| p.0 == s).map(|p| p.1).sum();
                c(heun.charge(s) + extra as f64)
            })
            .collect();
        Self {
            heun,
            degree,
            pinned,
            points,
            charges,
        }
    }

    /// Every sector for an eigenpolynomial of the given degree: each singular
    /// point whose nonzero exponent is a positive integer may hold that many roots.
    pub fn sectors(heun: PolynomialHeun, degree: usize) -> Vec<Self> {
        let options = pinning_options(&heun, degree);
        let mut out = Vec::new();
        for mask in 0..1usize << options.len() {
            let pinned: Vec<(f64, usize)> = options
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &o)| o)
                .collect();
            if pinned.iter().map(|p| p.1).sum::<usize>() <= degree {
                out.push(Self::new(heun, degree, pinned));
            }
        }
        out
    }

    fn pinned_count(&self) -> usize {
        self.pinned.iter().map(|p| p.1).sum()
    }
}

/// Singular points where an eigenpolynomial of the given degree may vanish, with
/// the forced multiplicity.
fn pinning_options(heun: &PolynomialHeun, degree: usize) -> Vec<(f64, usize)> {
    heun.singular_points()
        .into_iter()
        .filter_map(|s| {
            let e = heun.exponent(s);
            let r = e.round();
            ((e - r).abs() < 1e-9 && r >= 1.0 && r as usize <= degree).then_some((s, r as usize))
        })
        .collect()
}

impl BetheSystem for StieltjesProblem {
    fn root_count(&self) -> usize {
        self.degree - self.pinned_count()
    }

    fn poles(&self) -> Vec<Complex64> {
        self.points.iter().copied().map(c).collect()
    }

    fn residuals(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_poles(&self.poles(), z, 1e-10)?;
        Ok(charge_residuals(&self.points, &self.charges, z))
    }

    fn jacobian(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        charge_jacobian(&self.points, &self.charges, z)
    }

    fn eigenvalue(&self, z: &[Complex64]) -> Result<f64> {
        let deg = self.degree as f64;
        if self.degree == 0 {
            return Ok(self.heun.diagonal(0.0));
        }
        let sum: Complex64 = z.iter().sum::<Complex64>()
            + self.pinned.iter().map(|&(s, e)| s * e as f64).sum::<f64>();
        real_part(self.heun.diagonal(deg) - self.heun.raise(deg - 1.0) * sum)
    }

    /// Roots drifting to infinity make the residual small without solving anything.
    fn admissible(&self, z: &[Complex64]) -> bool {
        z.iter().all(|x| x.norm() < 1e6)
    }

    fn single_root_candidates(&self) -> Vec<Complex64> {
        if self.root_count() != 1 {
            return Vec::new();
        }
        // Σ_s ρ_s Π_{t≠s} (v - t) = 0
        let mut lhs = Polynomial(vec![c(0.0)]);
        for (i, &rho) in self.charges.iter().enumerate() {
            let others: Vec<Complex64> = self
                .points
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &t)| c(t))
                .collect();
            lhs = lhs.add(&Polynomial::from_roots(&others).scale(rho));
        }
        lhs.roots()
    }
}

/// Pinned roots `(point, multiplicity)` and free roots of one continuation endpoint.
pub type Endpoint = (Vec<(f64, usize)>, Vec<Complex64>);

/// Continuation from an electrostatic start system to the target sector.
///
/// With positive charges the system has exactly `M + 1` solutions, all real, one
/// for each split of the roots between the two finite intervals cut by the
/// singular points. The charges are then moved to their target values along a
/// complex path, `ρ(λ) = ((1-λ)γρ⁰ + λρ¹)/((1-λ)γ + λ)`, which avoids the
/// integer exponents where paths could meet. Paths whose roots collapse onto a
/// singular point end in the matching pinned sector.
pub fn homotopy_endpoints(heun: &PolynomialHeun, degree: usize) -> Vec<Endpoint> {
    let points = heun.singular_points().to_vec();
    let target: Vec<Complex64> = points.iter().map(|&s| c(heun.charge(s))).collect();
    let start: Vec<Complex64> = vec![c(1.0); points.len()];
    let gamma = Complex64::from_polar(1.0, 0.917);
    let charges_at = |lam: f64| -> (Vec<Complex64>, Vec<Complex64>) {
        let b = gamma * (1.0 - lam) + lam;
        let db = 1.0 - gamma;
        start
            .iter()
            .zip(&target)
            .map(|(&r0, &r1)| {
                let a = gamma * r0 * (1.0 - lam) + r1 * lam;
                let da = r1 - gamma * r0;
                (a / b, (da * b - a * db) / (b * b))
            })
            .unzip()
    };
    let mut sorted = points.clone();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for left in 0..=degree {
        let right = degree - left;
        let mut z: Vec<Complex64> = Vec::with_capacity(degree);
        for (count, lo, hi) in [(left, sorted[0], sorted[1]), (right, sorted[1], sorted[2])] {
            z.extend((0..count).map(|i| c(lo + (hi - lo) * (i + 1) as f64 / (count + 1) as f64)));
        }
        let (rho0, _) = charges_at(0.0);
        let Some(z0) = correct(&points, &rho0, z, 100) else { continue };
        if let Some(end) = track(&points, &charges_at, z0) {
            out.push(classify_endpoint(heun, degree, &points, end));
        }
    }
    out
}

/// Newton on the charge system, undamped; `None` unless it converges.
fn correct(points: &[f64], charges: &[Complex64], mut z: Vec<Complex64>, iters: usize) -> Option<Vec<Complex64>> {
    for _ in 0..iters {
        let f = charge_residuals(points, charges, &z);
        let norm = max_norm(&f);
        if !norm.is_finite() {
            return None;
        }
        if norm < 1e-12 {
            return Some(z);
        }
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|x| -x));
        let step = charge_jacobian(points, charges, &z).lu().solve(&rhs)?;
        let size = step.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for (zi, s) in z.iter_mut().zip(step.iter()) {
            *zi += s;
        }
        if size < 1e-14 * (1.0 + max_norm(&z)) {
            return Some(z);
        }
    }
    None
}

type ChargePath<'a> = dyn Fn(f64) -> (Vec<Complex64>, Vec<Complex64>) + 'a;

/// Predictor-corrector tracking from `λ = 0` towards `λ = 1`; returns the last
/// configuration reached (the path may stall where roots collapse).
fn track(points: &[f64], charges_at: &ChargePath<'_>, mut z: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let m = z.len();
    if m == 0 {
        return Some(z);
    }
    let mut lam = 0.0f64;
    let mut h = 0.01f64;
    while lam < 1.0 && h > 1e-13 {
        let step = h.min(1.0 - lam);
        let (rho, drho) = charges_at(lam);
        // dz/dλ = -J⁻¹ ∂F/∂λ
        let dfl = DVector::from_iterator(
            m,
            z.iter().map(|&zk| -points.iter().zip(&drho).map(|(&s, &d)| d / (zk - s)).sum::<Complex64>()),
        );
        let Some(dz) = charge_jacobian(points, &rho, &z).lu().solve(&dfl) else {
            h *= 0.5;
            continue;
        };
        let predicted: Vec<Complex64> = z.iter().zip(dz.iter()).map(|(a, b)| a + b * step).collect();
        let (rho_next, _) = charges_at(lam + step);
        match correct(points, &rho_next, predicted, 6) {
            Some(next) if max_norm(&next) < 1e6 && moved_less(&z, &next, 0.2) => {
                z = next;
                lam += step;
                h = (h * 1.5).min(0.05);
            }
            _ => h *= 0.5,
        }
    }
    Some(z)
}

fn moved_less(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol * (1.0 + x.norm()))
}

/// Roots that have collapsed onto a singular point with the right multiplicity are
/// pinned there; the rest seed the free part of that sector.
fn classify_endpoint(
    heun: &PolynomialHeun,
    degree: usize,
    points: &[f64],
    z: Vec<Complex64>,
) -> (Vec<(f64, usize)>, Vec<Complex64>) {
    let scale = points.iter().map(|s| s.abs()).fold(1.0, f64::max);
    let mut pinned = Vec::new();
    let mut free = z;
    for (s, e) in pinning_options(heun, degree) {
        let mut dist: Vec<(f64, usize)> = free.iter().enumerate().map(|(i, x)| ((x - s).norm(), i)).collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        if dist.len() < e || dist[e - 1].0 > 0.05 * scale {
            continue;
        }
        if dist.len() > e && dist[e].0 < 2.0 * dist[e - 1].0 {
            continue;
        }
        let drop: Vec<usize> = dist[..e].iter().map(|d| d.1).collect();
        free = free
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, x)| x)
            .collect();
        pinned.push((s, e));
    }
    (pinned, free)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheRoots {
    #[serde(serialize_with = "serialize_roots")]
    pub z: Vec<Complex64>,
    pub residual_norm: f64,
}

fn serialize_roots<S: serde::Serializer>(z: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(z.len()))?;
    for x in z {
        seq.serialize_element(&[x.re, x.im])?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: usize,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct BetheSolutions {
    pub converged: Vec<BetheRoots>,
    pub failures: Vec<SeedFailure>,
}

fn same_up_to_permutation(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let hit = (0..b.len()).find(|&i| !used[i] && (b[i] - x).norm() < tol);
        if let Some(i) = hit {
            used[i] = true;
        }
        hit.is_some()
    })
}

fn distinct(z: &[Complex64]) -> bool {
    (0..z.len()).all(|k| (k + 1..z.len()).all(|p| (z[k] - z[p]).norm() >= POLE_MARGIN))
}

/// Damped Newton from one starting configuration.
pub fn newton<S: BetheSystem + ?Sized>(sys: &S, seed: &[Complex64]) -> std::result::Result<BetheRoots, (f64, String)> {
    let mut z = seed.to_vec();
    let mut f = sys.residuals(&z).map_err(|e| (f64::INFINITY, e.to_string()))?;
    let mut norm = max_norm(&f);
    for _ in 0..200 {
        if norm < 1e-13 {
            break;
        }
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|x| -x));
        let Some(step) = sys.jacobian(&z).lu().solve(&rhs) else {
            return Err((norm, "singular Jacobian".into()));
        };
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<Complex64> = z.iter().zip(step.iter()).map(|(a, b)| a + b * damping).collect();
            if let Ok(ft) = sys.residuals(&trial) {
                let nt = max_norm(&ft);
                if nt.is_finite() && nt < norm {
                    z = trial;
                    f = ft;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm.is_nan() || norm >= ACCEPT_RESIDUAL {
        return Err((norm, "did not converge".into()));
    }
    if check_poles(&sys.poles(), &z, POLE_MARGIN).is_err() || !distinct(&z) || !sys.admissible(&z) {
        return Err((norm, "converged to an inadmissible configuration".into()));
    }
    Ok(BetheRoots { z, residual_norm: norm })
}

/// Runs Newton from every seed (and from the closed-form candidates when there is
/// a single root) and keeps the distinct admissible solutions.
pub fn solve_bethe<S: BetheSystem + ?Sized>(sys: &S, seeds: &[Vec<Complex64>]) -> BetheSolutions {
    let mut out = BetheSolutions::default();
    if sys.root_count() == 0 {
        out.converged.push(BetheRoots {
            z: Vec::new(),
            residual_norm: 0.0,
        });
        return out;
    }
    let closed: Vec<Vec<Complex64>> = sys.single_root_candidates().into_iter().map(|z| vec![z]).collect();
    for (i, seed) in closed.iter().chain(seeds).enumerate() {
        match newton(sys, seed) {
            Ok(sol) => {
                if !out
                    .converged
                    .iter()
                    .any(|s| same_up_to_permutation(&s.z, &sol.z, DEDUP_TOLERANCE))
                {
                    out.converged.push(sol);
                }
            }
            Err((residual, reason)) => out.failures.push(SeedFailure {
                seed: i,
                residual,
                reason,
            }),
        }
    }
    out
}

/// Seeds with all roots on one circle of radius `0.5, 0.9, 1.1, 2` (then `0.2, 5`),
/// at random phases.
pub fn default_seeds(m: usize, count: usize, rng_seed: u64) -> Vec<Vec<Complex64>> {
    const RADII: [f64; 6] = [0.5, 0.9, 1.1, 2.0, 0.2, 5.0];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|s| {
            let r = RADII[s % RADII.len()];
            (0..m)
                .map(|_| {
                    let jitter = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
                    Complex64::from_polar(r * jitter, rng.gen_range(0.0..std::f64::consts::TAU))
                })
                .collect()
        })
        .collect()
}

/// Random configurations closed under conjugation, drawn from a box around the
/// singular points.
pub fn symmetric_seeds(singular: &[f64], m: usize, count: usize, rng_seed: u64) -> Vec<Vec<Complex64>> {
    let lo = singular.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = singular.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.75 * (hi - lo).max(1.0);
    let centre = 0.5 * (lo + hi);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|_| {
            let pairs = rng.gen_range(0..=m / 2);
            let mut z = Vec::with_capacity(m);
            for _ in 0..pairs {
                let w = Complex64::new(centre + rng.gen_range(-half..half), rng.gen_range(0.05..half));
                z.push(w);
                z.push(w.conj());
            }
            while z.len() < m {
                z.push(c(centre + rng.gen_range(-half..half)));
            }
            z
        })
        .collect()
}

/// Real seeds for every way of distributing `m` roots over the intervals cut by
/// the singular points (roots of real eigenpolynomials sit between them).
pub fn interval_seeds(singular: &[f64], m: usize) -> Vec<Vec<Complex64>> {
    let mut pts = singular.to_vec();
    pts.sort_by(f64::total_cmp);
    let span = (pts[pts.len() - 1] - pts[0]).max(1.0);
    let mut bounds = vec![(pts[0] - span, pts[0])];
    bounds.extend(pts.windows(2).map(|w| (w[0], w[1])));
    bounds.push((pts[pts.len() - 1], pts[pts.len() - 1] + span));
    let mut out = Vec::new();
    let mut counts = vec![0usize; bounds.len()];
    fn fill(
        slot: usize,
        left: usize,
        counts: &mut Vec<usize>,
        bounds: &[(f64, f64)],
        out: &mut Vec<Vec<Complex64>>,
    ) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            // a real layout, and one with neighbouring roots split into conjugate pairs
            for paired in [false, true] {
                let seed: Vec<Complex64> = counts
                    .iter()
                    .zip(bounds)
                    .flat_map(|(&k, &(lo, hi))| {
                        let step = (hi - lo) / (k + 1) as f64;
                        (0..k).map(move |i| {
                            let x = lo + step * (i + 1) as f64;
                            if !paired || (k % 2 == 1 && i + 1 == k) {
                                c(x)
                            } else {
                                let centre = lo + step * (i - i % 2 + 1) as f64 + 0.5 * step;
                                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                                Complex64::new(centre, sign * 0.5 * step)
                            }
                        })
                    })
                    .collect();
                if paired && seed.iter().all(|z| z.im == 0.0) {
                    continue;
                }
                out.push(seed);
            }
            return;
        }
        for k in 0..=left {
            counts[slot] = k;
            fill(slot + 1, left - k, counts, bounds, out);
        }
    }
    fill(0, m, &mut counts, &bounds, &mut out);
    out
}

/// Outcome of matching Bethe eigenvalues against the spectrum of `T_SV`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockCheck {
    pub convention: RootCount,
    pub block_dim: usize,
    pub heun_spectrum: Vec<f64>,
    /// Distinct eigenvalues from converged configurations.
    pub bethe_values: Vec<f64>,
    /// Eigenvalues of `T_SV` with no Bethe value within tolerance.
    pub missing: usize,
    /// Bethe values not within tolerance of the spectrum.
    pub spurious: usize,
    pub max_error: f64,
    pub max_residual: f64,
    /// `max |t - nearest eigenvalue| / residual` over converged configurations.
    pub coupling: f64,
}

impl BlockCheck {
    pub fn reproduces(&self) -> bool {
        self.missing == 0 && self.spurious == 0
    }
}

fn nearest(values: &[f64], t: f64) -> f64 {
    values.iter().map(|v| (v - t).abs()).fold(f64::INFINITY, f64::min)
}

fn match_block(
    convention: RootCount,
    heun_spectrum: Vec<f64>,
    solutions: &[(f64, f64)],
    tol: f64,
) -> BlockCheck {
    let mut bethe_values: Vec<f64> = Vec::new();
    for &(t, _) in solutions {
        if !bethe_values.iter().any(|v| (v - t).abs() < tol) {
            bethe_values.push(t);
        }
    }
    bethe_values.sort_by(f64::total_cmp);
    let missing = heun_spectrum.iter().filter(|&&e| nearest(&bethe_values, e) >= tol).count();
    let spurious = bethe_values.iter().filter(|&&t| nearest(&heun_spectrum, t) >= tol).count();
    let max_error = bethe_values
        .iter()
        .map(|&t| nearest(&heun_spectrum, t))
        .fold(0.0, f64::max);
    let max_residual = solutions.iter().map(|s| s.1).fold(0.0, f64::max);
    let coupling = solutions
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|&(t, r)| nearest(&heun_spectrum, t) / r)
        .fold(0.0, f64::max);
    BlockCheck {
        convention,
        block_dim: heun_spectrum.len(),
        heun_spectrum,
        bethe_values,
        missing,
        spurious,
        max_error,
        max_residual,
        coupling,
    }
}

fn heun_block_spectrum(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams) -> Result<Option<Vec<f64>>> {
    let Some(rows) = ball_rows(spec, module, params.radius) else {
        return Ok(None);
    };
    let t = restricted_heun(spec, module, params).block(*rows.start(), *rows.end() + 1);
    t.eigenvalues().map(Some)
}

/// Cross-checks the polynomial Bethe system on the ball block of one module.
/// Seeds are tried in batches until every eigenvalue is found or `max_seeds` runs out.
pub fn check_block_stieltjes(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    convention: RootCount,
    max_seeds: usize,
) -> Result<Option<BlockCheck>> {
    let Some(spectrum) = heun_block_spectrum(spec, module, params)? else {
        return Ok(None);
    };
    let degree = convention.count(spectrum.len());
    let heun = PolynomialHeun::new(spec, module, params);
    let mut found: Vec<(f64, f64)> = Vec::new();
    let record = |sector: &StieltjesProblem, sols: BetheSolutions, found: &mut Vec<(f64, f64)>| {
        for sol in sols.converged {
            if let Ok(t) = sector.eigenvalue(&sol.z) {
                found.push((t, sol.residual_norm));
            }
        }
    };
    for (pinned, free) in homotopy_endpoints(&heun, degree) {
        let sector = StieltjesProblem::new(heun, degree, pinned);
        if sector.root_count() == free.len() {
            let sols = solve_bethe(&sector, &[free]);
            record(&sector, sols, &mut found);
        }
    }
    let covered = |found: &[(f64, f64)]| spectrum.iter().all(|&e| found.iter().any(|f| (f.0 - e).abs() < 1e-8));
    // random restarts for whatever continuation missed
    for (s, sector) in StieltjesProblem::sectors(heun, degree).iter().enumerate() {
        let m = sector.root_count();
        let mut done = 0;
        let batch = 8;
        while !covered(&found) && done < max_seeds {
            let seeds = match (m, done) {
                (0, _) => Vec::new(),
                (_, 0) => interval_seeds(&heun.singular_points(), m),
                _ if (done / batch) % 2 == 1 => {
                    symmetric_seeds(&heun.singular_points(), m, batch, (s * 1000 + done) as u64)
                }
                _ => default_seeds(m, batch, (s * 1000 + done) as u64),
            };
            record(sector, solve_bethe(sector, &seeds), &mut found);
            done += batch;
            if m <= 1 {
                break;
            }
        }
    }
    Ok(Some(match_block(convention, spectrum, &found, 1e-8)))
}

/// The same comparison for the printed BC-Gaudin system.
pub fn check_block_printed(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    convention: RootCount,
    seeds: usize,
) -> Result<Option<BlockCheck>> {
    let Some(spectrum) = heun_block_spectrum(spec, module, params)? else {
        return Ok(None);
    };
    let m = convention.count(spectrum.len());
    let problem = PrintedBetheProblem::new(spec, module, params, m);
    let found: Vec<(f64, f64)> = solve_bethe(&problem, &default_seeds(m, seeds, 7))
        .converged
        .iter()
        .filter_map(|sol| problem.eigenvalue(&sol.z).ok().map(|t| (t, sol.residual_norm)))
        .collect();
    Ok(Some(match_block(convention, spectrum, &found, 1e-8)))
}

/// Which Bethe system a grid run solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetheForm {
    Polynomial,
    Printed,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridBlock {
    pub d: u32,
    pub q: u32,
    pub n: u32,
    pub twice_j: u32,
    pub radius: u32,
    pub k0: u32,
    pub check: BlockCheck,
}

/// Summary of a cross-check over many ball blocks.
#[derive(Debug, Clone, Serialize)]
pub struct BetheGridReport {
    pub form: BetheForm,
    pub convention: RootCount,
    pub blocks: usize,
    pub reproduced: usize,
    pub max_residual: f64,
    pub max_error: f64,
    /// Blocks that were not reproduced (at most the first 20).
    pub failures: Vec<GridBlock>,
}

impl BetheGridReport {
    pub fn passed(&self) -> bool {
        self.blocks == self.reproduced
    }
}

/// Runs the Bethe cross-check on every module, radius and contiguous Fermi sea
/// of the given graphs whose ball block has dimension `1..=max_block_dim`.
pub fn bethe_grid(
    specs: &[GraphSpec],
    max_block_dim: usize,
    form: BetheForm,
    convention: RootCount,
    seeds: usize,
) -> Result<BetheGridReport> {
    let mut report = BetheGridReport {
        form,
        convention,
        blocks: 0,
        reproduced: 0,
        max_residual: 0.0,
        max_error: 0.0,
        failures: Vec::new(),
    };
    for spec in specs {
        for module in crate::terwilliger::enumerate_modules(spec) {
            for radius in 0..=spec.d {
                let Some(rows) = ball_rows(spec, &module, radius) else {
                    continue;
                };
                if rows.end() - rows.start() + 1 > max_block_dim {
                    continue;
                }
                for k0 in 0..=spec.d {
                    let params = crate::heun::heun_parameters(spec, radius, k0)?;
                    let check = match form {
                        BetheForm::Polynomial => check_block_stieltjes(spec, &module, &params, convention, seeds)?,
                        BetheForm::Printed => check_block_printed(spec, &module, &params, convention, seeds)?,
                    };
                    let Some(check) = check else { continue };
                    report.blocks += 1;
                    report.max_residual = report.max_residual.max(check.max_residual);
                    report.max_error = report.max_error.max(check.max_error);
                    if check.reproduces() {
                        report.reproduced += 1;
                    } else if report.failures.len() < 20 {
                        report.failures.push(GridBlock {
                            d: spec.d,
                            q: spec.q,
                            n: module.n,
                            twice_j: module.twice_j,
                            radius,
                            k0,
                            check,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun::heun_parameters;
    use crate::terwilliger::enumerate_modules;

    fn finite_difference_jacobian<S: BetheSystem>(sys: &S, z: &[Complex64]) -> DMatrix<Complex64> {
        let h = 1e-6;
        let m = z.len();
        let mut out = DMatrix::zeros(m, m);
        for p in 0..m {
            let mut up = z.to_vec();
            let mut dn = z.to_vec();
            up[p] += h;
            dn[p] -= h;
            let fu = sys.residuals(&up).unwrap();
            let fd = sys.residuals(&dn).unwrap();
            for k in 0..m {
                out[(k, p)] = (fu[k] - fd[k]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn theta_limits() {
        assert_eq!(bethe_theta(2), 0.0);
        // q = 3: arccot(√2) = atan(1/√2)
        assert!((bethe_theta(3) - 0.5 * (1.0 / 2f64.sqrt()).atan()).abs() < 1e-15);
        assert!(bethe_theta(50) < std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let s = GraphSpec::new(6, 3).unwrap();
        let module = enumerate_modules(&s).pop().unwrap();
        let params = heun_parameters(&s, 3, 2).unwrap();
        let z = vec![Complex64::new(0.3, 0.7), Complex64::new(-1.4, 0.2), Complex64::new(2.1, -0.9)];
        let printed = PrintedBetheProblem::new(&s, &module, &params, 3);
        let diff = (printed.jacobian(&z) - finite_difference_jacobian(&printed, &z)).camax();
        assert!(diff < 1e-6, "{diff}");
        let st = StieltjesProblem::new(PolynomialHeun::new(&s, &module, &params), 3, vec![]);
        let diff = (st.jacobian(&z) - finite_difference_jacobian(&st, &z)).camax();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn residuals_are_permutation_equivariant() {
        let s = GraphSpec::new(4, 2).unwrap();
        let module = enumerate_modules(&s).pop().unwrap();
        let params = heun_parameters(&s, 2, 2).unwrap();
        let p = PrintedBetheProblem::new(&s, &module, &params, 3);
        let z = [Complex64::new(0.3, 0.7), Complex64::new(-1.4, 0.2), Complex64::new(2.1, -0.9)];
        let zr = [z[2], z[0], z[1]];
        let a = p.residuals(&z).unwrap();
        let b = p.residuals(&zr).unwrap();
        assert!((a[0] - b[1]).norm() < 1e-14 && (a[2] - b[0]).norm() < 1e-14);
        assert!(p.residuals(&[]).unwrap().is_empty());
        assert!(matches!(
            p.residuals(&[Complex64::new(1.0, 0.0)]),
            Err(Error::PoleProximity { index: 0, .. })
        ));
    }

    #[test]
    fn printed_eigenvalue_forms() {
        let s = GraphSpec::new(3, 2).unwrap();
        let module = enumerate_modules(&s).pop().unwrap();
        let params = heun_parameters(&s, 1, 0).unwrap();
        let p = PrintedBetheProblem::new(&s, &module, &params, 0);
        // q(j + μ/2) + q(nq/2 - d)(nq - 2d + μ + ν) with j = 3/2, μ = 4, ν = 0, n = 3
        assert!((p.eigenvalue(&[]).unwrap() - 2.0 * 3.5).abs() < 1e-12);
        let z = [Complex64::new(0.4, 0.3), Complex64::new(0.4, -0.3)];
        let zi = [1.0 / z[0], 1.0 / z[1]];
        assert!((p.eigenvalue(&z).unwrap() - p.eigenvalue(&zi).unwrap()).abs() < 1e-12);
        assert!(p.eigenvalue(&[Complex64::new(0.4, 0.3)]).is_err());
    }

    #[test]
    fn polynomial_realization_matches_block() {
        for q in 2..=4 {
            for d in 1..=6 {
                let s = GraphSpec::new(d, q).unwrap();
                for module in enumerate_modules(&s) {
                    for n in 0..=d {
                        for k0 in 0..=d {
                            let params = heun_parameters(&s, n, k0).unwrap();
                            let Some(rows) = ball_rows(&s, &module, n) else { continue };
                            let h = PolynomialHeun::new(&s, &module, &params);
                            let t = restricted_heun(&s, &module, &params);
                            let tj = module.twice_j as usize;
                            let scale = t.max_abs().max(1.0);
                            // |j,m⟩ ↔ v^(j-m): degree D sits at r = 2j - D
                            for deg in 0..=tj {
                                let r = tj - deg;
                                assert!((h.diagonal(deg as f64) - t.diag[r]).abs() < 1e-9 * scale);
                                if deg < tj {
                                    let prod = h.raise(deg as f64) * h.lower(deg as f64 + 1.0);
                                    assert!((prod - t.offdiag[r - 1].powi(2)).abs() < 1e-9 * scale * scale);
                                }
                            }
                            // the ball block is invariant: degree M_SV - 1 does not raise
                            let top = rows.end() - rows.start();
                            assert!(h.raise(top as f64).abs() < 1e-9 * scale);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn charges_are_partial_fractions() {
        let s = GraphSpec::new(7, 3).unwrap();
        for module in enumerate_modules(&s) {
            let params = heun_parameters(&s, 4, 3).unwrap();
            let h = PolynomialHeun::new(&s, &module, &params);
            let (p, q) = (h.p(), h.q());
            for v in [Complex64::new(0.3, 0.2), Complex64::new(-2.0, 1.0), Complex64::new(5.0, -0.1)] {
                let direct = q.eval(v) / (2.0 * p.eval(v));
                let split: Complex64 = h.singular_points().iter().map(|&s| h.charge(s) / (v - s)).sum();
                assert!((direct - split).norm() < 1e-12 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn continuation_reaches_every_sector() {
        // q = 2, d = 6, top module, N = 3, k0 = 4: one eigenpolynomial has roots pinned at 1
        let s = GraphSpec::new(6, 2).unwrap();
        let module = enumerate_modules(&s).pop().unwrap();
        let params = heun_parameters(&s, 3, 4).unwrap();
        let h = PolynomialHeun::new(&s, &module, &params);
        let ends = homotopy_endpoints(&h, 3);
        assert_eq!(ends.len(), 4);
        let spectrum = heun_block_spectrum(&s, &module, &params).unwrap().unwrap();
        for (pinned, free) in ends {
            let sector = StieltjesProblem::new(h, 3, pinned);
            let sol = newton(&sector, &free).unwrap();
            let t = sector.eigenvalue(&sol.z).unwrap();
            assert!(nearest(&spectrum, t) < 1e-8);
        }
    }

    #[test]
    fn single_root_closed_form() {
        let s = GraphSpec::new(4, 3).unwrap();
        for module in enumerate_modules(&s) {
            for n in 0..=4 {
                let params = heun_parameters(&s, n, 2).unwrap();
                let check = check_block_stieltjes(&s, &module, &params, RootCount::BlockDimMinusOne, 0).unwrap();
                if let Some(c) = check.filter(|c| c.block_dim == 2) {
                    assert!(c.reproduces(), "{c:?}");
                }
            }
        }
    }

    #[test]
    fn q2_grid_converges() {
        let s = GraphSpec::new(6, 2).unwrap();
        let module = enumerate_modules(&s).pop().unwrap();
        assert_eq!(module.twice_j, 6);
        for n in 0..=6 {
            for k0 in 0..=6 {
                let params = heun_parameters(&s, n, k0).unwrap();
                let c = check_block_stieltjes(&s, &module, &params, RootCount::BlockDimMinusOne, 64)
                    .unwrap()
                    .unwrap();
                assert!(c.reproduces(), "N={n} k0={k0}: {c:?}");
                assert!(c.max_residual < ACCEPT_RESIDUAL);
                assert!(c.bethe_values.len() <= c.block_dim);
            }
        }
    }
}
