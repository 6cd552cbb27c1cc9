//! The algebraic Heun operator `T = {A, A*} + μA* + νA` on each module.
//!
//! With `ν` and `μ` tuned to the ball radius `N` and Fermi level `k0`, `T`
//! commutes with both the ball projector and the Fermi-sea projector, hence
//! with the chopped correlation matrix. `T` restricted to the ball part of a
//! module is tridiagonal with a well separated spectrum, so its eigenvectors
//! diagonalize the correlation block.

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, BigUint};
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::model::{GraphSpec, LevelSet};
use crate::special::{binomial_exact, krawtchouk_integer_column};
use crate::spectrum::{CorrelationSpectrum, MERGE_TOLERANCE};
use crate::terwilliger::{
    enumerate_modules, restricted_adjacency, restricted_dual, restricted_with_cache,
    symmetric_eigenvalues, IrreducibleModule, OverlapCache,
};
use crate::tridiag::TridiagonalOperator;
use crate::xfloat::XFloat;

/// Eigenvalues of `C` may leave `[0, 1]` by at most this much before clamping.
pub const HEUN_CLAMP_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue gap of `T` below which a block is diagonalized directly.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeunParams {
    /// Ball radius `N`.
    pub radius: u32,
    /// Fermi level: `SE = {0..k0}`.
    pub k0: u32,
    pub mu: i64,
    pub nu: i64,
}

/// `ν = -2q(d-N) + q + 2d` kills the band crossing the ball boundary and
/// `μ = 2d - q(2k0+1)` kills the band crossing the Fermi level.
pub fn heun_parameters(spec: &GraphSpec, radius: u32, k0: u32) -> Result<HeunParams> {
    spec.check_level("N", radius)?;
    spec.check_level("k0", k0)?;
    let (d, q) = (i64::from(spec.d), i64::from(spec.q));
    Ok(HeunParams {
        radius,
        k0,
        mu: 2 * d - q * (2 * i64::from(k0) + 1),
        nu: -2 * q * (d - i64::from(radius)) + q + 2 * d,
    })
}

impl HeunParams {
    /// `μ + ω_{k0} + ω_{k0+1}`, the energy-basis band factor at the Fermi level.
    pub fn fermi_cut_factor(&self, spec: &GraphSpec) -> i64 {
        self.mu + spec.omega(self.k0) + spec.omega(self.k0 + 1)
    }
}

/// Integer factor `ν + 2qm + nq + q - 2d` of the band between `r` and `r+1`.
fn band_factor(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams, r: usize) -> i128 {
    let (q, d, n) = (i128::from(spec.q), i128::from(spec.d), i128::from(module.n));
    i128::from(params.nu) + q * i128::from(module.twice_m(r)) + n * q + q - 2 * d
}

/// Twice the diagonal at `r`:
/// `(ν + 2qm + nq - 2d)(qn - 2d - (q-2)2m)/2·2 + μ(2qm + nq - 2d)`.
fn twice_diag(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams, r: usize) -> i128 {
    let (q, d, n) = (i128::from(spec.q), i128::from(spec.d), i128::from(module.n));
    let tm = i128::from(module.twice_m(r));
    (i128::from(params.nu) + q * tm + n * q - 2 * d) * (q * n - 2 * d - (q - 2) * tm)
        + i128::from(params.mu) * (q * tm + n * q - 2 * d)
}

fn hop_squared(spec: &GraphSpec, module: &IrreducibleModule, r: usize) -> i128 {
    i128::from(spec.q - 1) * (r as i128 + 1) * (i128::from(module.twice_j) - r as i128)
}

pub fn restricted_heun(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams) -> TridiagonalOperator {
    let dim = module.dim();
    let diag = (0..dim)
        .map(|r| twice_diag(spec, module, params, r) as f64 / 2.0)
        .collect();
    let off = (0..dim.saturating_sub(1))
        .map(|r| band_factor(spec, module, params, r) as f64 * (hop_squared(spec, module, r) as f64).sqrt())
        .collect();
    TridiagonalOperator::new(diag, off)
}

/// `{A, A*} + μA* + νA` assembled densely from the restricted generators.
pub fn heun_from_generators(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams) -> DMatrix<f64> {
    let a = restricted_adjacency(spec, module).to_dense();
    let dual = DMatrix::from_diagonal(&DVector::from_vec(restricted_dual(spec, module)));
    &a * &dual + &dual * &a + dual * params.mu as f64 + a * params.nu as f64
}

/// Basis indices `r0..=2j` of the module lying in the ball of radius `N`.
pub fn ball_rows(spec: &GraphSpec, module: &IrreducibleModule, radius: u32) -> Option<std::ops::RangeInclusive<usize>> {
    let r0 = (i64::from(spec.d) - i64::from(module.low()) - i64::from(radius)).max(0);
    (r0 <= i64::from(module.twice_j)).then_some(r0 as usize..=module.twice_j as usize)
}

/// `T` and `C` on the ball part of one module.
#[derive(Debug, Clone)]
pub struct BallBlock {
    pub heun: TridiagonalOperator,
    pub correlation: DMatrix<f64>,
}

fn ball_block(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    se: &LevelSet,
    cache: &mut OverlapCache,
) -> Option<BallBlock> {
    let rows = ball_rows(spec, module, params.radius)?;
    let heun = restricted_heun(spec, module, params).block(*rows.start(), *rows.end() + 1);
    let rc = restricted_with_cache(spec, module, &LevelSet::up_to(params.radius), se, cache);
    debug_assert_eq!(rc.rows.first().copied(), Some(*rows.start()));
    Some(BallBlock {
        heun,
        correlation: rc.matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commutator {
    /// `max |[T_SV, C_SV]|`.
    pub residual: f64,
    pub heun_norm: f64,
    pub correlation_norm: f64,
}

impl Commutator {
    pub fn scale(&self) -> f64 {
        self.heun_norm * self.correlation_norm
    }

    pub fn relative(&self) -> f64 {
        if self.residual == 0.0 {
            0.0
        } else {
            self.residual / self.scale()
        }
    }
}

/// Commutator of `T` and `C` on the ball block of a module (zero when the module
/// misses the ball).
pub fn commutation_residual(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    se: &LevelSet,
) -> Commutator {
    let mut cache = OverlapCache::new(spec);
    commutation_residual_cached(spec, module, params, se, &mut cache)
}

pub fn commutation_residual_cached(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    se: &LevelSet,
    cache: &mut OverlapCache,
) -> Commutator {
    let Some(block) = ball_block(spec, module, params, se, cache) else {
        return Commutator {
            residual: 0.0,
            heun_norm: 0.0,
            correlation_norm: 0.0,
        };
    };
    let tc = block.heun.mul_dense(&block.correlation);
    let residual = if block.heun.dim() == 1 {
        0.0
    } else {
        (&tc - tc.transpose()).amax()
    };
    Commutator {
        residual,
        heun_norm: block.heun.max_abs(),
        correlation_norm: block.correlation.amax(),
    }
}

#[derive(Debug, Clone)]
pub struct HeunBallSpectrum {
    pub spectrum: CorrelationSpectrum,
    /// Module blocks meeting the ball.
    pub blocks: usize,
    /// Blocks whose `T` spectrum was too degenerate and were diagonalized directly.
    pub fallback_blocks: usize,
}

/// Ball spectrum from the eigenvectors of `T` on every module block.
pub fn ball_spectrum_via_heun(spec: &GraphSpec, radius: u32, k0: u32) -> Result<HeunBallSpectrum> {
    let params = heun_parameters(spec, radius, k0)?;
    let se = LevelSet::up_to(k0);
    let mut cache = OverlapCache::new(spec);
    let mut raw = Vec::new();
    let (mut blocks, mut fallback_blocks) = (0, 0);
    for module in enumerate_modules(spec) {
        let Some(block) = ball_block(spec, &module, &params, &se, &mut cache) else {
            continue;
        };
        blocks += 1;
        let lambdas = match block_eigenvalues_via_heun(&block)? {
            Some(l) => l,
            None => {
                fallback_blocks += 1;
                symmetric_eigenvalues(&block.correlation)
            }
        };
        raw.extend(lambdas.into_iter().map(|l| (l, module.multiplicity.clone())));
    }
    Ok(HeunBallSpectrum {
        spectrum: CorrelationSpectrum::from_raw(raw, HEUN_CLAMP_TOLERANCE, MERGE_TOLERANCE)?,
        blocks,
        fallback_blocks,
    })
}

/// `v_r^T C v_r` for the eigenvectors of `T`, or `None` when two eigenvalues of
/// `T` are too close for the eigenvectors to be well defined.
fn block_eigenvalues_via_heun(block: &BallBlock) -> Result<Option<Vec<f64>>> {
    let t = &block.heun;
    if t.dim() == 1 {
        return Ok(Some(vec![block.correlation[(0, 0)]]));
    }
    let eig = t.eigen()?;
    let norm = t.max_abs().max(f64::MIN_POSITIVE);
    if eig.values.windows(2).any(|w| w[1] - w[0] < DEGENERACY_GAP * norm) {
        return Ok(None);
    }
    let cv = &block.correlation * &eig.vectors;
    Ok(Some(
        (0..t.dim())
            .map(|r| eig.vectors.column(r).dot(&cv.column(r)))
            .collect(),
    ))
}

/// `P` with `P(T_SV) = C_SV`, stored for the rescaled variable `T_SV / 2^scale_exp`.
#[derive(Debug, Clone)]
pub struct CommutingPolynomial {
    pub coefficients: Vec<XFloat>,
    pub scale_exp: i64,
    /// `max |P(T_SV) - C_SV| / max |C_SV|`.
    pub residual: f64,
    heun: XTridiagonal,
}

impl CommutingPolynomial {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `P(t)` for an unscaled eigenvalue `t` of `T_SV`.
    pub fn evaluate(&self, t: &XFloat) -> XFloat {
        let x = t.ldexp(-self.scale_exp);
        let mut acc = XFloat::zero();
        for a in self.coefficients.iter().rev() {
            acc = &(&acc * &x) + a;
        }
        acc
    }

    /// Eigenvalues of `T_SV` refined in extended precision, paired with `P` at them.
    pub fn transported_eigenvalues(&self) -> Result<Vec<(f64, f64)>> {
        let approx = self.heun.to_f64().eigenvalues()?;
        approx
            .iter()
            .enumerate()
            .map(|(r, &t)| {
                let refined = self.heun.refine_eigenvalue(r, t)?;
                Ok((refined.to_f64(), self.evaluate(&refined).to_f64()))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct XTridiagonal {
    diag: Vec<XFloat>,
    off: Vec<XFloat>,
}

impl XTridiagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn to_f64(&self) -> TridiagonalOperator {
        TridiagonalOperator::new(
            self.diag.iter().map(XFloat::to_f64).collect(),
            self.off.iter().map(XFloat::to_f64).collect(),
        )
    }

    fn scaled(&self, exp: i64) -> Self {
        Self {
            diag: self.diag.iter().map(|x| x.ldexp(-exp)).collect(),
            off: self.off.iter().map(|x| x.ldexp(-exp)).collect(),
        }
    }

    fn count_below(&self, x: &XFloat) -> usize {
        let mut count = 0;
        let mut pivot = XFloat::from_int(1);
        let tiny = XFloat::from_int(1).ldexp(-600);
        for i in 0..self.dim() {
            let mut p = &self.diag[i] - x;
            if i > 0 {
                let c = (&self.off[i - 1] * &self.off[i - 1]).div(&pivot);
                p = &p - &c;
            }
            if p.is_zero() {
                p = -&tiny;
            }
            if p.signum() < 0 {
                count += 1;
            }
            pivot = p;
        }
        count
    }

    /// Bisection on Sturm counts around the f64 estimate of eigenvalue `r`.
    fn refine_eigenvalue(&self, r: usize, approx: f64) -> Result<XFloat> {
        let norm = self
            .diag
            .iter()
            .chain(&self.off)
            .map(|x| x.to_f64().abs())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut width = 1e-10 * norm;
        let (mut lo, mut hi);
        loop {
            lo = XFloat::from_f64(approx - width);
            hi = XFloat::from_f64(approx + width);
            if self.count_below(&lo) <= r && self.count_below(&hi) > r {
                break;
            }
            width *= 16.0;
            if width > 4.0 * norm * self.dim() as f64 {
                return Err(Error::Numerical(format!("could not bracket eigenvalue {r}")));
            }
        }
        for _ in 0..160 {
            let mid = (&lo + &hi).ldexp(-1);
            if self.count_below(&mid) > r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((&lo + &hi).ldexp(-1))
    }

    /// `m · T` for a dense row-major matrix `m`.
    fn right_multiply(&self, m: &[Vec<XFloat>]) -> Vec<Vec<XFloat>> {
        let n = self.dim();
        m.iter()
            .map(|row| {
                (0..n)
                    .map(|s| {
                        let mut acc = &row[s] * &self.diag[s];
                        if s > 0 {
                            acc = &acc + &(&row[s - 1] * &self.off[s - 1]);
                        }
                        if s + 1 < n {
                            acc = &acc + &(&row[s + 1] * &self.off[s]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

/// Exact-rational overlap `Q_{a,x}` (`a = j - m`) rounded to extended precision.
fn overlap_x(q: u32, twice_j: u32, a: u32, x: u32, kh: &BigInt) -> XFloat {
    if kh.sign() == num_bigint::Sign::NoSign {
        return XFloat::zero();
    }
    let qm1 = BigUint::from(q - 1);
    let num = binomial_exact(i64::from(twice_j), i64::from(x))
        * num_traits::pow(qm1.clone(), x as usize)
        * kh.magnitude()
        * kh.magnitude();
    let den = binomial_exact(i64::from(twice_j), i64::from(a))
        * num_traits::pow(qm1, a as usize)
        * num_traits::pow(BigUint::from(q), twice_j as usize);
    let v = XFloat::from_ratio(&BigInt::from(num), &den).sqrt();
    if kh.is_negative() {
        -v
    } else {
        v
    }
}

/// Reconstructs `P` from the first row of `C_SV` through the triangular system
/// `C_{0,s} = Σ_{i≥s} a_i (e_0^T T^i)_s`, all in extended precision.
pub fn reconstruct_polynomial(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    params: &HeunParams,
    se: &LevelSet,
) -> Result<CommutingPolynomial> {
    let rows = ball_rows(spec, module, params.radius)
        .ok_or_else(|| Error::Domain("module does not meet the ball".into()))?;
    let r0 = *rows.start();
    let tj = module.twice_j;
    let m = tj as usize + 1 - r0;

    let half = XFloat::from_int(1).ldexp(-1);
    let diag: Vec<XFloat> = (r0..=tj as usize)
        .map(|r| &XFloat::from_int(twice_diag(spec, module, params, r)) * &half)
        .collect();
    let off: Vec<XFloat> = (r0..tj as usize)
        .map(|r| {
            &XFloat::from_int(band_factor(spec, module, params, r))
                * &XFloat::from_int(hop_squared(spec, module, r)).sqrt()
        })
        .collect();
    if off.iter().any(XFloat::is_zero) {
        return Err(Error::Numerical(
            "Heun block is reducible; no commuting polynomial is guaranteed".into(),
        ));
    }
    let heun = XTridiagonal { diag, off };

    // overlap rows for a = j - m = 2j - r, restricted to Fermi-sea columns
    let cols: Vec<usize> = se.iter().filter_map(|k| module.column_of_level(k)).collect();
    let amax = tj - r0 as u32;
    let mut qx = vec![vec![XFloat::zero(); cols.len()]; m];
    for (c, &x) in cols.iter().enumerate() {
        let col = krawtchouk_integer_column(tj, x as u32, spec.q, amax);
        for (i, row) in qx.iter_mut().enumerate() {
            let a = tj - (r0 + i) as u32;
            row[c] = overlap_x(spec.q, tj, a, x as u32, &col[a as usize]);
        }
    }
    let corr: Vec<Vec<XFloat>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    qx[i].iter().zip(&qx[k]).fold(XFloat::zero(), |acc, (u, v)| &acc + &(u * v))
                })
                .collect()
        })
        .collect();

    let max_t = XFloat::max_abs(heun.diag.iter().chain(&heun.off)).to_f64();
    let scale_exp = if max_t > 0.0 { max_t.log2().ceil() as i64 } else { 0 };
    let ts = heun.scaled(scale_exp);

    // beta[i] = e_0^T Ts^i, supported on 0..=i
    let mut beta: Vec<Vec<XFloat>> = Vec::with_capacity(m);
    let mut e0 = vec![XFloat::zero(); m];
    e0[0] = XFloat::from_int(1);
    beta.push(e0);
    for i in 1..m {
        let next = ts.right_multiply(std::slice::from_ref(&beta[i - 1])).remove(0);
        beta.push(next);
    }
    let mut coeffs = vec![XFloat::zero(); m];
    for i in (0..m).rev() {
        let mut rhs = corr[0][i].clone();
        for (k, coeff) in coeffs.iter().enumerate().skip(i + 1) {
            rhs = &rhs - &(coeff * &beta[k][i]);
        }
        coeffs[i] = rhs.div(&beta[i][i]);
    }

    // Horner: X = Σ a_i Ts^i
    let identity = |scale: &XFloat| -> Vec<Vec<XFloat>> {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| if i == k { scale.clone() } else { XFloat::zero() })
                    .collect()
            })
            .collect()
    };
    let mut x = identity(&coeffs[m - 1]);
    for i in (0..m - 1).rev() {
        x = ts.right_multiply(&x);
        for (r, row) in x.iter_mut().enumerate() {
            row[r] = &row[r] + &coeffs[i];
        }
    }
    let c_norm = XFloat::max_abs(corr.iter().flatten());
    let diff = XFloat::max_abs(
        x.iter()
            .flatten()
            .zip(corr.iter().flatten())
            .map(|(u, v)| u - v)
            .collect::<Vec<_>>()
            .iter(),
    );
    let residual = if c_norm.is_zero() {
        diff.to_f64()
    } else {
        diff.div(&c_norm).to_f64()
    };
    Ok(CommutingPolynomial {
        coefficients: coeffs,
        scale_exp,
        residual,
        heun,
    })
}

/// `Q^T T Q`: the Heun operator in the adjacency eigenbasis (tridiagonal in `k'`).
pub fn heun_in_energy_basis(spec: &GraphSpec, module: &IrreducibleModule, params: &HeunParams) -> DMatrix<f64> {
    let q = crate::terwilliger::overlap_matrix(spec, module).values;
    q.transpose() * restricted_heun(spec, module, params).to_dense() * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn spec(d: u32, q: u32) -> GraphSpec {
        GraphSpec::new(d, q).unwrap()
    }

    fn top(d: u32) -> IrreducibleModule {
        IrreducibleModule {
            n: d,
            twice_j: d,
            multiplicity: BigUint::from(1u32),
        }
    }

    #[test]
    fn parameter_examples() {
        let s = spec(3, 2);
        let p = heun_parameters(&s, 1, 0).unwrap();
        assert_eq!((p.nu, p.mu), (0, 4));
        let p = heun_parameters(&s, 3, 3).unwrap();
        assert_eq!((p.nu, p.mu), (8, -8));
        assert_eq!(p.fermi_cut_factor(&s), 0);
        assert!(heun_parameters(&s, 4, 0).is_err());
    }

    #[test]
    fn bands_match_generators() {
        for q in 2..=4 {
            for d in 1..=6 {
                let s = spec(d, q);
                for module in enumerate_modules(&s) {
                    for n in 0..=d {
                        for k0 in 0..=d {
                            let p = heun_parameters(&s, n, k0).unwrap();
                            let t = restricted_heun(&s, &module, &p).to_dense();
                            let g = heun_from_generators(&s, &module, &p);
                            assert!((t - g).amax() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cut_band_vanishes() {
        let s = spec(3, 2);
        let m = top(3);
        let p = heun_parameters(&s, 1, 0).unwrap();
        let t = restricted_heun(&s, &m, &p);
        let rows = ball_rows(&s, &m, 1).unwrap();
        assert_eq!(rows, 2..=3);
        assert_eq!(t.offdiag[1], 0.0);
    }

    #[test]
    fn single_site_ball() {
        let s = spec(3, 2);
        let b = ball_spectrum_via_heun(&s, 0, 0).unwrap();
        assert_eq!(b.spectrum.len(), 1);
        assert!((b.spectrum.entries()[0].lambda - 0.125).abs() < 1e-14);
        let e = crate::entropy::entropy_from_spectrum(&b.spectrum).unwrap();
        assert!((e - 0.376770).abs() < 1e-6);
        let full = ball_spectrum_via_heun(&s, 3, 1).unwrap();
        assert_eq!(crate::entropy::entropy_from_spectrum(&full.spectrum).unwrap(), 0.0);
    }

    #[test]
    fn commutator_and_polynomial() {
        let s = spec(3, 2);
        let m = top(3);
        let p = heun_parameters(&s, 1, 0).unwrap();
        let se = LevelSet::up_to(0);
        let c = commutation_residual(&s, &m, &p, &se);
        assert!(c.residual <= 1e-10 * c.scale());
        let poly = reconstruct_polynomial(&s, &m, &p, &se).unwrap();
        assert_eq!(poly.dim(), 2);
        assert!(poly.residual < 1e-10);
        let mut bad = p;
        bad.nu += 1;
        let c = commutation_residual(&s, &m, &bad, &se);
        assert!(c.residual > 1e-3 * c.scale());
    }
}
