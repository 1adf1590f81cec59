//! Period-matrix families and translate construction.
//!
//! Three sources of experiments: seeded random points of the Siegel space,
//! block-diagonal products of elliptic period scalars (which carry an exact
//! combinatorial membership oracle), and translates built through a
//! prescribed point by locating a zero of theta along a random complex line.
//! Every random draw is derived from an explicit 64-bit seed.

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::theta::{self, HalfCharacteristic, RiemannMatrix};
use crate::torsion::{all_points, TorsionPoint};

/// How a period matrix is produced.
#[derive(Clone, Debug)]
pub enum FamilySpec<R: Real> {
    /// Seeded random sample with an eigenvalue floor on `Im tau`.
    Random { g: usize, seed: u64, min_eig: R },
    /// Block-diagonal product of elliptic period scalars.
    Product { taus: Vec<Complex<R>> },
}

impl<R: Real> FamilySpec<R> {
    pub fn realize(&self) -> Result<RiemannMatrix<R>> {
        match self {
            FamilySpec::Random { g, seed, min_eig } => random_siegel(*g, *seed, *min_eig),
            FamilySpec::Product { taus } => product_tau(taus),
        }
    }

    pub fn g(&self) -> usize {
        match self {
            FamilySpec::Random { g, .. } => *g,
            FamilySpec::Product { taus } => taus.len(),
        }
    }
}

/// Deterministic random point of the Siegel space: `tau = X + iY` with `X`
/// symmetric, entries uniform in `[-1/2, 1/2]`, and `Y = B B^T + I/4`
/// rescaled so its smallest eigenvalue reaches `min_eig`.
pub fn random_siegel<R: Real>(g: usize, seed: u64, min_eig: R) -> Result<RiemannMatrix<R>> {
    if g == 0 || g > 12 {
        return Err(Error::InvalidParameter(format!(
            "genus must be in 1..=12, got {g}"
        )));
    }
    if min_eig <= R::zero() {
        return Err(Error::InvalidParameter("min_eig must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw = || R::of(rng.random::<f64>() - 0.5);

    let mut x = vec![R::zero(); g * g];
    for i in 0..g {
        for j in i..g {
            let v = draw();
            x[i * g + j] = v;
            x[j * g + i] = v;
        }
    }
    let mut b = vec![R::zero(); g * g];
    for v in b.iter_mut() {
        *v = draw();
    }
    let quarter = R::of(0.25);
    let mut y = vec![R::zero(); g * g];
    for i in 0..g {
        for j in 0..g {
            let mut s = R::zero();
            for k in 0..g {
                s += b[i * g + k] * b[j * g + k];
            }
            y[i * g + j] = s;
        }
        y[i * g + i] += quarter;
    }
    let eig_min = crate::linalg::symmetric_eigenvalues(&y, g)[0];
    if eig_min < min_eig {
        let scale = min_eig / eig_min;
        for v in y.iter_mut() {
            *v *= scale;
        }
    }
    let entries: Vec<Complex<R>> = (0..g * g).map(|k| Complex::new(x[k], y[k])).collect();
    RiemannMatrix::new(g, entries)
}

/// Block-diagonal period matrix of a product of elliptic curves. Each
/// factor must have `Im tau_i >= 0.2` to keep the evaluator comfortable.
pub fn product_tau<R: Real>(taus: &[Complex<R>]) -> Result<RiemannMatrix<R>> {
    let g = taus.len();
    if g == 0 || g > 12 {
        return Err(Error::InvalidParameter(format!(
            "product needs 1..=12 factors, got {g}"
        )));
    }
    let floor = R::of(0.2);
    for (i, t) in taus.iter().enumerate() {
        if t.im < floor {
            return Err(Error::InvalidParameter(format!(
                "factor {i} has Im tau < 0.2"
            )));
        }
    }
    let mut entries = vec![Complex::new(R::zero(), R::zero()); g * g];
    for (i, &t) in taus.iter().enumerate() {
        entries[i * g + i] = t;
    }
    RiemannMatrix::new(g, entries)
}

/// Exact membership oracle on a product of elliptic curves: the point
/// `x(e, d)` lies on the product theta divisor iff some factor has
/// `e_i = d_i = 1` (the unique odd half-period of an elliptic curve is its
/// theta point). A torsion translate shifts characteristic-wise before the
/// test. At `a = 0` the count is `4^g - 3^g`.
pub fn product_oracle(
    g: usize,
    translate: Option<&HalfCharacteristic>,
) -> Result<Vec<TorsionPoint>> {
    if g == 0 || g > 12 {
        return Err(Error::InvalidParameter(format!(
            "genus must be in 1..=12, got {g}"
        )));
    }
    let (se, sd) = match translate {
        Some(t) => {
            if t.g() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    got: t.g(),
                });
            }
            (t.eps_mask(), t.delta_mask())
        }
        None => (0, 0),
    };
    Ok(all_points(g)
        .filter(|p| {
            let e = p.chr().eps_mask() ^ se;
            let d = p.chr().delta_mask() ^ sd;
            e & d != 0
        })
        .collect())
}

/// A located zero of theta, with the residual trail of the accepted Newton
/// steps from the successful restart.
#[derive(Clone, Debug)]
pub struct ThetaZero<R: Real> {
    /// The zero, reduced into the fundamental cell of the period lattice.
    pub point: Vec<Complex<R>>,
    /// Final `|theta(point)| / S(tau)`.
    pub residual: R,
    /// Accepted-step residuals (relative to `S(tau)`), ending at `residual`.
    pub residual_history: Vec<R>,
}

const ZERO_RESTARTS: usize = 20;
const ZERO_ITERATIONS: usize = 200;

/// Find a point `w` with `|theta(w, tau)| <= 1e-10 * S(tau)` by damped
/// Newton iteration along a random complex line from a random start, both
/// drawn from `seed`. Used to build translates `a = w - x` through a
/// prescribed torsion point `x`.
pub fn find_on_theta<R: Real>(
    tau: &RiemannMatrix<R>,
    seed: u64,
    eps_req: R,
) -> Result<ThetaZero<R>> {
    let g = tau.g();
    let chr = HalfCharacteristic::zero(g);
    let scale = theta::theta_scale(tau, eps_req)?;
    let target = R::of(1e-10) * scale;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    for _restart in 0..ZERO_RESTARTS {
        let z0: Vec<Complex<R>> = (0..g)
            .map(|_| {
                Complex::new(
                    R::of(rng.random::<f64>() - 0.5),
                    R::of(rng.random::<f64>() - 0.5),
                )
            })
            .collect();
        let mut dir: Vec<Complex<R>> = (0..g)
            .map(|_| {
                Complex::new(
                    R::of(2.0 * rng.random::<f64>() - 1.0),
                    R::of(2.0 * rng.random::<f64>() - 1.0),
                )
            })
            .collect();
        let norm = dir
            .iter()
            .map(|d| d.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt();
        if norm <= R::zero() {
            continue;
        }
        for d in dir.iter_mut() {
            *d /= norm;
        }
        if let Some(zero) = newton_along_line(tau, &chr, &z0, &dir, target, scale, eps_req)? {
            return Ok(zero);
        }
    }
    Err(Error::ZeroSearchFailed {
        restarts: ZERO_RESTARTS,
        iterations: ZERO_ITERATIONS,
    })
}

fn line_point<R: Real>(z0: &[Complex<R>], dir: &[Complex<R>], t: Complex<R>) -> Vec<Complex<R>> {
    z0.iter().zip(dir).map(|(&z, &d)| z + d * t).collect()
}

fn newton_along_line<R: Real>(
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    z0: &[Complex<R>],
    dir: &[Complex<R>],
    target: R,
    scale: R,
    eps_req: R,
) -> Result<Option<ThetaZero<R>>> {
    let mut t = Complex::new(R::zero(), R::zero());
    let mut history: Vec<R> = Vec::new();
    let mut value = theta::theta(&line_point(z0, dir, t), tau, chr, eps_req)?.value;
    history.push(value.norm() / scale);

    for _iter in 0..ZERO_ITERATIONS {
        if value.norm() <= target {
            return finish_zero(tau, chr, z0, dir, t, scale, eps_req, history);
        }
        let (_, grad) = theta::theta_with_gradient(&line_point(z0, dir, t), tau, chr, eps_req)?;
        let mut slope = Complex::new(R::zero(), R::zero());
        for (gv, d) in grad.iter().zip(dir) {
            slope += gv.value * d;
        }
        if slope.norm() <= R::of(1e-280) {
            return Ok(None);
        }
        let step = value / slope;
        let mut alpha = R::one();
        let mut accepted = false;
        for _damp in 0..40 {
            let t_try = t - step * alpha;
            let v_try = theta::theta(&line_point(z0, dir, t_try), tau, chr, eps_req)?.value;
            if v_try.norm() < value.norm() {
                t = t_try;
                value = v_try;
                history.push(value.norm() / scale);
                accepted = true;
                break;
            }
            alpha *= R::of(0.5);
        }
        if !accepted {
            return Ok(None);
        }
    }
    if value.norm() <= target {
        return finish_zero(tau, chr, z0, dir, t, scale, eps_req, history);
    }
    Ok(None)
}

/// Reduce the zero into the fundamental cell and polish it there; reduction
/// multiplies theta by a nonzero quasi-periodicity factor, so a couple of
/// extra Newton steps restore the residual target in the reduced frame.
#[allow(clippy::too_many_arguments)]
fn finish_zero<R: Real>(
    tau: &RiemannMatrix<R>,
    chr: &HalfCharacteristic,
    z0: &[Complex<R>],
    dir: &[Complex<R>],
    t: Complex<R>,
    scale: R,
    eps_req: R,
    mut history: Vec<R>,
) -> Result<Option<ThetaZero<R>>> {
    let target = R::of(1e-10) * scale;
    let w = line_point(z0, dir, t);
    let mut reduced = theta::lattice_reduce(&w, tau)?;

    let mut value = theta::theta(&reduced, tau, chr, eps_req)?.value;
    for _polish in 0..12 {
        if value.norm() <= target {
            break;
        }
        let (v, grad) = theta::theta_with_gradient(&reduced, tau, chr, eps_req)?;
        value = v.value;
        let mut slope = Complex::new(R::zero(), R::zero());
        for (gv, d) in grad.iter().zip(dir) {
            slope += gv.value * d;
        }
        if slope.norm() <= R::of(1e-280) {
            return Ok(None);
        }
        let step = value / slope;
        for (ri, d) in reduced.iter_mut().zip(dir) {
            *ri -= d * step;
        }
        value = theta::theta(&reduced, tau, chr, eps_req)?.value;
        history.push(value.norm() / scale);
    }
    let residual = value.norm() / scale;
    if residual <= R::of(1e-10) {
        history.push(residual);
        Ok(Some(ThetaZero {
            point: reduced,
            residual,
            residual_history: history,
        }))
    } else {
        Ok(None)
    }
}
