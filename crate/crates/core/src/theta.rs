//! Riemann theta functions with half-integer characteristics.
//!
//! Convention used throughout the crate:
//!
//! ```text
//! theta[e;d](z, tau) = sum_{n in Z^g} exp( i*pi*(n+e/2)^T tau (n+e/2)
//!                                        + 2*i*pi*(n+e/2)^T (z+d/2) )
//! ```
//!
//! with `e, d in {0,1}^g` and `tau` in the Siegel upper half-space. The sum
//! is taken over the lattice points inside a Euclidean ball around the
//! minimum of the Gaussian weight; everything omitted is covered by an
//! explicit tail bound derived from the smallest eigenvalue of `Im tau`, and
//! that bound is reported with each value as `err`.
//!
//! Writing `v = n + e/2 + c` with `c = (Im tau)^{-1} Im z`, the magnitude of
//! a summand is `exp(pi c^T Im(tau) c) * exp(-pi v^T Im(tau) v)`, so the
//! evaluator accumulates the unit-scaled factors and applies the prefactor
//! once at the end.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Hard cap on the truncation radius; needing more signals an
/// ill-conditioned period matrix (or an absurd tolerance).
pub const RADIUS_CAP: f64 = 60.0;

/// Cap on enumerated lattice points per evaluation.
const LATTICE_CAP: u128 = 20_000_000;

/// A point of the Siegel upper half-space: a symmetric g x g complex matrix
/// with positive definite imaginary part. Derived real data used by the
/// series evaluator is cached at construction.
#[derive(Clone, Debug)]
pub struct RiemannMatrix<R: Real> {
    g: usize,
    entries: Vec<Complex<R>>,
    re: Vec<R>,
    im: Vec<R>,
    im_chol: Vec<R>,
    im_eig_min: R,
    im_eig_max: R,
}

impl<R: Real> RiemannMatrix<R> {
    /// Validate and build a period matrix from row-major entries.
    ///
    /// Symmetry is enforced up to `1e-12 * max|entry|`; positive
    /// definiteness of the imaginary part via a Cholesky factorization.
    pub fn new(g: usize, entries: Vec<Complex<R>>) -> Result<Self> {
        if g == 0 || g > 12 {
            return Err(Error::InvalidParameter(format!(
                "genus must be in 1..=12, got {g}"
            )));
        }
        if entries.len() != g * g {
            return Err(Error::DimensionMismatch {
                expected: g * g,
                got: entries.len(),
            });
        }
        let max_abs = entries
            .iter()
            .fold(R::zero(), |acc, e| acc.max(e.re.abs()).max(e.im.abs()));
        let sym_tol = max_abs * R::of(1e-12);
        for i in 0..g {
            for j in i + 1..g {
                let dev = (entries[i * g + j] - entries[j * g + i]).norm();
                if dev > sym_tol {
                    return Err(Error::NotSymmetric {
                        i,
                        j,
                        deviation: dev.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        let re: Vec<R> = entries.iter().map(|e| e.re).collect();
        let im: Vec<R> = entries.iter().map(|e| e.im).collect();
        let im_chol = linalg::cholesky(&im, g).ok_or(Error::NotPositiveDefinite)?;
        let eigs = linalg::symmetric_eigenvalues(&im, g);
        let im_eig_min = eigs[0];
        let im_eig_max = eigs[g - 1];
        if im_eig_min <= R::zero() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            g,
            entries,
            re,
            im,
            im_chol,
            im_eig_min,
            im_eig_max,
        })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn entries(&self) -> &[Complex<R>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<R> {
        self.entries[i * self.g + j]
    }

    /// Smallest eigenvalue of `Im tau`.
    pub fn im_eig_min(&self) -> R {
        self.im_eig_min
    }

    /// Largest eigenvalue of `Im tau`.
    pub fn im_eig_max(&self) -> R {
        self.im_eig_max
    }

    pub(crate) fn im(&self) -> &[R] {
        &self.im
    }

    pub(crate) fn re_part(&self) -> &[R] {
        &self.re
    }

    /// Solve `(Im tau) x = b`.
    pub fn solve_im(&self, b: &[R]) -> Vec<R> {
        linalg::cholesky_solve(&self.im_chol, self.g, b)
    }

    /// The matrix `2 tau` (used for second-order theta coordinates).
    /// Validity carries over, so the cached data is scaled directly.
    pub fn doubled(&self) -> Self {
        let two = R::of(2.0);
        let sqrt2 = two.sqrt();
        Self {
            g: self.g,
            entries: self.entries.iter().map(|e| e * two).collect(),
            re: self.re.iter().map(|&x| x * two).collect(),
            im: self.im.iter().map(|&x| x * two).collect(),
            im_chol: self.im_chol.iter().map(|&x| x * sqrt2).collect(),
            im_eig_min: self.im_eig_min * two,
            im_eig_max: self.im_eig_max * two,
        }
    }

    /// The half-period `(tau * eps + delta) / 2` named by a characteristic.
    pub fn half_period(&self, chr: &HalfCharacteristic) -> Result<Vec<Complex<R>>> {
        if chr.g() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                got: chr.g(),
            });
        }
        let half = R::of(0.5);
        let mut x = vec![Complex::new(R::zero(), R::zero()); self.g];
        for i in 0..self.g {
            let mut acc = Complex::new(R::zero(), R::zero());
            for j in 0..self.g {
                if chr.eps_bit(j) {
                    acc += self.entries[i * self.g + j];
                }
            }
            if chr.delta_bit(i) {
                acc += Complex::new(R::one(), R::zero());
            }
            x[i] = acc * half;
        }
        Ok(x)
    }
}

/// A half-integer characteristic `(eps, delta)` with components in {0,1}:
/// simultaneously the label of a 2-torsion point `(tau*eps + delta)/2` and a
/// theta characteristic. Component `i` is bit `i` of the mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct HalfCharacteristic {
    g: usize,
    eps: u32,
    delta: u32,
}

impl HalfCharacteristic {
    pub fn from_masks(g: usize, eps: u32, delta: u32) -> Result<Self> {
        if g == 0 || g > 12 {
            return Err(Error::InvalidParameter(format!(
                "genus must be in 1..=12, got {g}"
            )));
        }
        let limit = 1u32 << g;
        if eps >= limit || delta >= limit {
            return Err(Error::InvalidParameter(format!(
                "characteristic masks ({eps}, {delta}) out of range for g = {g}"
            )));
        }
        Ok(Self { g, eps, delta })
    }

    /// Decode from the canonical index: high g bits `eps`, low g bits `delta`.
    pub fn from_index(g: usize, index: usize) -> Result<Self> {
        if g == 0 || g > 12 || index >= 1usize << (2 * g) {
            return Err(Error::InvalidParameter(format!(
                "characteristic index {index} out of range for g = {g}"
            )));
        }
        let mask = (1u32 << g) - 1;
        Ok(Self {
            g,
            eps: (index >> g) as u32 & mask,
            delta: index as u32 & mask,
        })
    }

    pub fn zero(g: usize) -> Self {
        Self {
            g,
            eps: 0,
            delta: 0,
        }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn eps_mask(&self) -> u32 {
        self.eps
    }

    pub fn delta_mask(&self) -> u32 {
        self.delta
    }

    pub fn eps_bit(&self, i: usize) -> bool {
        (self.eps >> i) & 1 == 1
    }

    pub fn delta_bit(&self, i: usize) -> bool {
        (self.delta >> i) & 1 == 1
    }

    /// Canonical index: `eps` in the high g bits, `delta` in the low g bits.
    pub fn index(&self) -> usize {
        ((self.eps as usize) << self.g) | self.delta as usize
    }

    /// Parity `eps . delta mod 2`; odd characteristics have parity 1.
    pub fn parity(&self) -> u8 {
        ((self.eps & self.delta).count_ones() & 1) as u8
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }
}

impl std::fmt::Display for HalfCharacteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for i in 0..self.g {
            write!(f, "{}", (self.eps >> i) & 1)?;
        }
        write!(f, ";")?;
        for i in 0..self.g {
            write!(f, "{}", (self.delta >> i) & 1)?;
        }
        write!(f, "]")
    }
}

/// A computed theta value together with an absolute truncation-error bound:
/// re-evaluating with any larger truncation radius moves the value by at
/// most `err`. When the requested tolerance sits at the precision floor the
/// reported bound also absorbs the summation rounding slop, so `err` can
/// slightly exceed the request there.
#[derive(Clone, Copy, Debug)]
pub struct ThetaValue<R: Real> {
    pub value: Complex<R>,
    pub err: R,
}

/// Evaluation record with diagnostics.
#[derive(Clone, Debug)]
pub struct ThetaEval<R: Real> {
    pub value: ThetaValue<R>,
    /// One entry per coordinate when the gradient was requested, else empty.
    pub gradient: Vec<ThetaValue<R>>,
    /// Euclidean truncation radius actually used.
    pub radius: R,
    /// Number of lattice terms summed.
    pub terms: usize,
}

// ---------------------------------------------------------------------------
// Tail bound and truncation radius
// ---------------------------------------------------------------------------

/// Majorant for the omitted tail of the unit-scaled series when summation is
/// restricted to the Euclidean ball `|n + e/2 + c| <= rho`.
///
/// Every omitted point `v` in the shell `k <= |v| < k+1` satisfies
/// `v^T Y v >= lambda |v|^2`, and a shifted integer lattice has at most
/// `(2k+3)^g` points with `|v| <= k+1`. `order = 1` inserts the gradient
/// factor `2*pi*|m_j| <= 2*pi*(|v| + c_bound)`.
fn tail_majorant_f64(g: usize, lambda: f64, rho: f64, order: usize, c_bound: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let k0 = rho.floor().max(0.0) as i64;
    let mut total = 0.0f64;
    for k in k0..k0 + 400 {
        let radial = if k == k0 { rho } else { k as f64 };
        let decay = (-pi * lambda * radial * radial).exp();
        let count = (2 * k + 3) as f64;
        let count = count.powi(g as i32);
        let poly = match order {
            0 => 1.0,
            _ => 2.0 * pi * ((k + 1) as f64 + c_bound),
        };
        let term = count * decay * poly;
        total += term;
        if k > k0 && term <= total * 1e-20 {
            break;
        }
    }
    total
}

/// Smallest radius (searched in steps of 1/2) whose tail majorant meets
/// `target`, or an error when the cap is exceeded.
fn choose_radius(g: usize, lambda: f64, target: f64, order: usize, c_bound: f64) -> Result<f64> {
    // NaN targets must land here too, hence the negated comparison
    if !target.is_finite() || target <= 1e-300 {
        return Err(Error::TruncationCap {
            cap: RADIUS_CAP,
            target,
        });
    }
    let mut rho = 1.0f64;
    while rho <= RADIUS_CAP {
        if tail_majorant_f64(g, lambda, rho, order, c_bound) <= target {
            return Ok(rho);
        }
        rho += 0.5;
    }
    Err(Error::TruncationCap {
        cap: RADIUS_CAP,
        target,
    })
}

/// Truncation radius for evaluating theta at a point with `Im z = shift`,
/// such that the omitted tail (prefactor included) stays below `eps_req`.
pub fn truncation_radius<R: Real>(tau: &RiemannMatrix<R>, shift: &[R], eps_req: R) -> Result<R> {
    if shift.len() != tau.g() {
        return Err(Error::DimensionMismatch {
            expected: tau.g(),
            got: shift.len(),
        });
    }
    if eps_req <= R::zero() {
        return Err(Error::InvalidParameter("eps_req must be positive".into()));
    }
    let eps = eps_req.max(R::eps_floor()).to_f64().unwrap_or(f64::NAN);
    let c = tau.solve_im(shift);
    let mut pref_exp = 0.0f64;
    for i in 0..tau.g() {
        pref_exp += (c[i] * shift[i]).to_f64().unwrap_or(f64::NAN);
    }
    pref_exp *= std::f64::consts::PI;
    let lambda = tau.im_eig_min().to_f64().unwrap_or(f64::NAN);
    let rho = choose_radius(tau.g(), lambda, eps * (-pref_exp).exp(), 0, 0.0)?;
    Ok(R::of(rho))
}

// ---------------------------------------------------------------------------
// Series evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Kahan<R: Real> {
    s: Complex<R>,
    c: Complex<R>,
}

impl<R: Real> Kahan<R> {
    fn new() -> Self {
        let z = Complex::new(R::zero(), R::zero());
        Self { s: z, c: z }
    }

    #[inline]
    fn add(&mut self, x: Complex<R>) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }
}

struct SeriesSetup<R: Real> {
    shift: Vec<R>,
    w: Vec<R>,
    c: Vec<R>,
    pref_exp: R,
    c_bound: f64,
}

fn series_setup<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
) -> Result<SeriesSetup<R>> {
    let g = tau.g();
    if z.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: z.len(),
        });
    }
    if chr.g() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: chr.g(),
        });
    }
    let half = R::of(0.5);
    let shift: Vec<R> = (0..g)
        .map(|i| if chr.eps_bit(i) { half } else { R::zero() })
        .collect();
    let w: Vec<R> = (0..g)
        .map(|i| z[i].re + if chr.delta_bit(i) { half } else { R::zero() })
        .collect();
    let y: Vec<R> = z.iter().map(|zi| zi.im).collect();
    let c = tau.solve_im(&y);
    let mut dot = R::zero();
    for i in 0..g {
        dot += c[i] * y[i];
    }
    let pref_exp = R::PI() * dot.max(R::zero());
    let c_bound = c
        .iter()
        .zip(&shift)
        .map(|(&ci, &si)| (ci + si).abs().to_f64().unwrap_or(0.0))
        .fold(0.0f64, f64::max);
    Ok(SeriesSetup {
        shift,
        w,
        c,
        pref_exp,
        c_bound,
    })
}

fn eval_inner<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    eps_req: R,
    want_gradient: bool,
    fixed_radius: Option<R>,
) -> Result<ThetaEval<R>> {
    if eps_req <= R::zero() {
        return Err(Error::InvalidParameter("eps_req must be positive".into()));
    }
    let g = tau.g();
    let setup = series_setup(z, tau, chr)?;
    let eps_eff = eps_req.max(R::eps_floor()).to_f64().unwrap_or(f64::NAN);
    let lambda = tau.im_eig_min().to_f64().unwrap_or(f64::NAN);
    let pref_exp_f64 = setup.pref_exp.to_f64().unwrap_or(f64::NAN);
    let order = usize::from(want_gradient);
    let rho_f64 = match fixed_radius {
        Some(r) => r.to_f64().unwrap_or(f64::NAN),
        None => choose_radius(
            g,
            lambda,
            eps_eff * (-pref_exp_f64).exp(),
            order,
            setup.c_bound,
        )?,
    };
    let tail0 = tail_majorant_f64(g, lambda, rho_f64, 0, setup.c_bound);
    let tail1 = if want_gradient {
        tail_majorant_f64(g, lambda, rho_f64, 1, setup.c_bound)
    } else {
        0.0
    };
    let rho = R::of(rho_f64);

    // Bounding box of the ball |n + shift + c| <= rho.
    let mut lo = vec![0i64; g];
    let mut hi = vec![0i64; g];
    let mut volume: u128 = 1;
    for i in 0..g {
        let center = -(setup.c[i] + setup.shift[i]);
        let lo_i = (center - rho).ceil().to_f64().unwrap_or(f64::NAN);
        let hi_i = (center + rho).floor().to_f64().unwrap_or(f64::NAN);
        if !lo_i.is_finite() || !hi_i.is_finite() {
            return Err(Error::InvalidParameter(
                "non-finite evaluation point".into(),
            ));
        }
        lo[i] = lo_i as i64;
        hi[i] = hi_i as i64;
        volume = volume.saturating_mul((hi[i] - lo[i] + 1).max(0) as u128);
    }
    if volume > LATTICE_CAP {
        return Err(Error::TruncationCap {
            cap: RADIUS_CAP,
            target: eps_eff,
        });
    }

    let pi = R::PI();
    let two_pi = pi + pi;
    let rho_sq = rho * rho;
    let mut value = Kahan::new();
    let mut sum_abs = R::zero();
    let mut grad: Vec<Kahan<R>> = vec![Kahan::new(); if want_gradient { g } else { 0 }];
    let mut grad_abs: Vec<R> = vec![R::zero(); if want_gradient { g } else { 0 }];
    let mut terms = 0usize;

    let mut v = vec![R::zero(); g];
    let mut m = vec![R::zero(); g];
    let mut n = lo.clone();
    if (0..g).all(|i| lo[i] <= hi[i]) {
        'lattice: loop {
            let mut vsq = R::zero();
            for i in 0..g {
                let ni = R::of(n[i] as f64);
                let vi = ni + setup.shift[i] + setup.c[i];
                v[i] = vi;
                m[i] = ni + setup.shift[i];
                vsq += vi * vi;
            }
            if vsq <= rho_sq {
                // re_exp = -pi v^T Y v, im_exp = pi m^T X m + 2 pi m . w
                let mut qy = R::zero();
                let mut qx = R::zero();
                let mut lin = R::zero();
                for i in 0..g {
                    let mut rowy = R::zero();
                    let mut rowx = R::zero();
                    for j in 0..g {
                        rowy += tau.im()[i * g + j] * v[j];
                        rowx += tau.re_part()[i * g + j] * m[j];
                    }
                    qy += v[i] * rowy;
                    qx += m[i] * rowx;
                    lin += m[i] * setup.w[i];
                }
                let mag = (-pi * qy).exp();
                let u = Complex::from_polar(mag, pi * qx + two_pi * lin);
                value.add(u);
                sum_abs += mag;
                if want_gradient {
                    for j in 0..g {
                        grad[j].add(u * m[j]);
                        grad_abs[j] += mag * m[j].abs();
                    }
                }
                terms += 1;
            }
            // odometer increment
            let mut d = 0;
            loop {
                n[d] += 1;
                if n[d] <= hi[d] {
                    break;
                }
                n[d] = lo[d];
                d += 1;
                if d == g {
                    break 'lattice;
                }
            }
        }
    }

    let pref = setup.pref_exp.exp();
    let slop = R::epsilon() * R::of(4.0);
    let value_err = pref * (R::of(tail0) + slop * sum_abs);
    let theta_value = ThetaValue {
        value: value.s * pref,
        err: value_err,
    };
    let gradient: Vec<ThetaValue<R>> = if want_gradient {
        let i_two_pi = Complex::new(R::zero(), two_pi);
        (0..g)
            .map(|j| ThetaValue {
                value: grad[j].s * i_two_pi * pref,
                err: pref * (R::of(tail1) + slop * two_pi * grad_abs[j]),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(ThetaEval {
        value: theta_value,
        gradient,
        radius: rho,
        terms,
    })
}

/// Evaluate `theta[chr](z, tau)` with absolute error at most `eps_req`
/// (clamped at the scalar's precision floor).
pub fn theta<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    eps_req: R,
) -> Result<ThetaValue<R>> {
    Ok(eval_inner(z, tau, chr, eps_req, false, None)?.value)
}

/// Evaluate the z-gradient of `theta[chr]` by termwise differentiation
/// (factor `2*pi*i*(n+e/2)_j`), with the same per-component error contract.
pub fn theta_gradient<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    eps_req: R,
) -> Result<Vec<ThetaValue<R>>> {
    Ok(eval_inner(z, tau, chr, eps_req, true, None)?.gradient)
}

/// Value and gradient from a single lattice pass.
pub fn theta_with_gradient<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    eps_req: R,
) -> Result<(ThetaValue<R>, Vec<ThetaValue<R>>)> {
    let eval = eval_inner(z, tau, chr, eps_req, true, None)?;
    Ok((eval.value, eval.gradient))
}

/// Evaluate with an explicit truncation radius (diagnostics: used to check
/// the reported error bounds against a strictly larger summation region).
pub fn theta_with_radius<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    radius: R,
) -> Result<ThetaValue<R>> {
    Ok(eval_inner(z, tau, chr, R::of(1e-10), false, Some(radius))?.value)
}

/// Full evaluation record with radius and term-count diagnostics.
pub fn theta_eval<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    eps_req: R,
    want_gradient: bool,
) -> Result<ThetaEval<R>> {
    eval_inner(z, tau, chr, eps_req, want_gradient, None)
}

/// The `2^g` second-order theta coordinates of `z`: component `e` is
/// `theta[e;0](2z, 2tau)`. These are the homogeneous coordinates of the
/// morphism to `P^{2^g - 1}` attached to twice the theta divisor; they never
/// vanish simultaneously.
pub fn second_order_coords<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
    eps_req: R,
) -> Result<Vec<ThetaValue<R>>> {
    let g = tau.g();
    if z.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: z.len(),
        });
    }
    let tau2 = tau.doubled();
    let z2: Vec<Complex<R>> = z.iter().map(|&zi| zi + zi).collect();
    let mut out = Vec::with_capacity(1 << g);
    for eps_mask in 0..1u32 << g {
        let chr = HalfCharacteristic::from_masks(g, eps_mask, 0)?;
        out.push(theta(&z2, &tau2, &chr, eps_req)?);
    }
    Ok(out)
}

/// All `4^g` theta constants `theta[e;d](0, tau)`, indexed by the canonical
/// characteristic index.
pub fn theta_constants<R: Real>(tau: &RiemannMatrix<R>, eps_req: R) -> Result<Vec<ThetaValue<R>>> {
    let g = tau.g();
    let zero = vec![Complex::new(R::zero(), R::zero()); g];
    let mut out = Vec::with_capacity(1 << (2 * g));
    for index in 0..1usize << (2 * g) {
        let chr = HalfCharacteristic::from_index(g, index)?;
        out.push(theta(&zero, tau, &chr, eps_req)?);
    }
    Ok(out)
}

/// The normalization scale `S(tau)`: the largest theta-constant magnitude
/// over all characteristics. Residuals elsewhere in the crate are reported
/// relative to this.
pub fn theta_scale<R: Real>(tau: &RiemannMatrix<R>, eps_req: R) -> Result<R> {
    Ok(theta_constants(tau, eps_req)?
        .iter()
        .fold(R::zero(), |acc, t| acc.max(t.value.norm())))
}

/// Translate `z` by period-lattice vectors into the fundamental cell:
/// returns `z - tau p - q` with integer vectors `p, q` chosen by rounding.
///
/// Theta transforms under such shifts by a nonzero exponential factor, so
/// vanishing is preserved exactly while the evaluation at the reduced point
/// avoids the factor's growth, which in fixed precision would otherwise
/// drown the cancellation at zeros of the series.
pub fn lattice_reduce<R: Real>(
    z: &[Complex<R>],
    tau: &RiemannMatrix<R>,
) -> Result<Vec<Complex<R>>> {
    let g = tau.g();
    if z.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: z.len(),
        });
    }
    let im: Vec<R> = z.iter().map(|zi| zi.im).collect();
    let p = tau.solve_im(&im);
    let mut out = z.to_vec();
    for i in 0..g {
        let mut shift = Complex::new(R::zero(), R::zero());
        for j in 0..g {
            shift += tau.entry(i, j) * p[j].round();
        }
        out[i] -= shift;
    }
    for v in out.iter_mut() {
        *v -= Complex::new(v.re.round(), R::zero());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn tau_g1(re: f64, im: f64) -> RiemannMatrix<f64> {
        RiemannMatrix::new(1, vec![C::new(re, im)]).unwrap()
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let e = vec![
            C::new(0.0, 1.0),
            C::new(0.3, 0.0),
            C::new(0.1, 0.0),
            C::new(0.0, 1.0),
        ];
        assert!(matches!(
            RiemannMatrix::new(2, e),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn rejects_indefinite_imaginary_part() {
        let e = vec![C::new(0.0, -1.0)];
        assert!(matches!(
            RiemannMatrix::new(1, e),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn odd_characteristic_vanishes_at_origin() {
        let tau = tau_g1(0.0, 1.0);
        let chr = HalfCharacteristic::from_masks(1, 1, 1).unwrap();
        let t = theta(&[C::new(0.0, 0.0)], &tau, &chr, 1e-12).unwrap();
        assert!(t.value.norm() <= 1e-12, "odd constant {:?}", t.value);
    }

    #[test]
    fn even_function_in_z() {
        let tau = tau_g1(0.31, 1.27);
        let chr = HalfCharacteristic::zero(1);
        let z = [C::new(0.23, 0.11)];
        let zneg = [C::new(-0.23, -0.11)];
        let a = theta(&z, &tau, &chr, 1e-12).unwrap();
        let b = theta(&zneg, &tau, &chr, 1e-12).unwrap();
        assert!((a.value - b.value).norm() <= 2.0 * (a.err + b.err) + 1e-13);
    }

    #[test]
    fn gradient_vanishes_at_origin_for_even_characteristic() {
        let tau = tau_g1(0.0, 1.0);
        let chr = HalfCharacteristic::zero(1);
        let grad = theta_gradient(&[C::new(0.0, 0.0)], &tau, &chr, 1e-12).unwrap();
        assert!(grad[0].value.norm() <= 1e-12);
    }

    #[test]
    fn truncation_radius_examples() {
        let tau = tau_g1(0.0, 1.0);
        let r = truncation_radius(&tau, &[0.0], 1e-12).unwrap();
        assert!(r <= 8.0, "radius {r}");
        let r_loose = truncation_radius(&tau, &[0.0], 1e-3).unwrap();
        assert!(r_loose <= r);
        // scaling Im tau by 4 roughly halves the radius
        let tau4 = tau_g1(0.0, 4.0);
        let r4 = truncation_radius(&tau4, &[0.0], 1e-12).unwrap();
        assert!(r4 <= 0.75 * r, "r4 = {r4}, r = {r}");
    }

    #[test]
    fn characteristic_index_roundtrip() {
        for g in 1..=4usize {
            for index in 0..1usize << (2 * g) {
                let chr = HalfCharacteristic::from_index(g, index).unwrap();
                assert_eq!(chr.index(), index);
            }
        }
    }

    #[test]
    fn half_period_of_zero_characteristic_is_origin() {
        let tau = tau_g1(0.0, 1.0);
        let x = tau.half_period(&HalfCharacteristic::zero(1)).unwrap();
        assert_eq!(x[0], C::new(0.0, 0.0));
    }

    #[test]
    fn lattice_reduce_lands_in_the_cell_and_preserves_vanishing() {
        let tau = tau_g1(0.31, 1.27);
        let z = [C::new(3.85, 2.65)]; // 0.23 + 0.11i + tau*2 + 3
        let red = lattice_reduce(&z, &tau).unwrap();
        let c = red[0].im / 1.27;
        assert!(c.abs() <= 0.5 + 1e-12);
        assert!(red[0].re.abs() <= 0.75);
        // same point of the torus: theta values related by the transformation
        // factor exp(-i pi p^2 tau - 2 i pi p z_red) with p = 2, q = 3
        let chr = HalfCharacteristic::zero(1);
        let big = theta(&z, &tau, &chr, 1e-12).unwrap().value;
        let small = theta(&red, &tau, &chr, 1e-12).unwrap().value;
        let tau_c = C::new(0.31, 1.27);
        let factor = (-C::i() * std::f64::consts::PI * (tau_c * 4.0 + red[0] * 4.0)).exp();
        assert!(
            (big - factor * small).norm() <= 1e-9 * big.norm(),
            "big {big}, factor*small {}",
            factor * small
        );
    }

    #[test]
    fn ill_conditioned_tau_reports_truncation_cap() {
        // Im tau is positive definite but so thin that the Gaussian decay
        // cannot reach the tolerance within the radius cap
        let tau = RiemannMatrix::new(1, vec![C::new(0.0, 1e-5)]).unwrap();
        let chr = HalfCharacteristic::zero(1);
        let r = theta(&[C::new(0.0, 0.0)], &tau, &chr, 1e-12);
        assert!(matches!(r, Err(Error::TruncationCap { .. })), "{r:?}");
    }

    #[test]
    fn f32_instantiation_matches_low_precision() {
        let tau = RiemannMatrix::<f32>::new(1, vec![Complex::new(0.0f32, 1.0)]).unwrap();
        let chr = HalfCharacteristic::zero(1);
        let t = theta(&[Complex::new(0.0f32, 0.0)], &tau, &chr, 1e-4).unwrap();
        assert!((t.value.re - 1.086_434_8).abs() < 1e-3);
        assert!(t.value.im.abs() < 1e-4);
    }
}
