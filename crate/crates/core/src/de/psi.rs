//! The entropy functional of a symmetric Gaussian LLR and its inverse.
//!
//! `psi(m)` is the average binary entropy of a bit whose LLR is Gaussian
//! with mean `m` and variance `2m`; it decreases monotonically from
//! `psi(0) = 1` to 0. The inverse is defined on (0, 1] and clamped for
//! smaller entropies.

use std::sync::OnceLock;

use super::quad::{composite_gl16, GaussHermite};

/// Inverse clamp: entropies below this map to [`PSI_INV_M_MAX`].
pub const PSI_INV_H_MIN: f64 = 1e-12;
/// Mean returned for entropies below the clamp (large enough to exceed any
/// threshold-relevant LLR magnitude).
pub const PSI_INV_M_MAX: f64 = 400.0;

const LN2: f64 = std::f64::consts::LN_2;

/// Binary entropy of a bit described by LLR `l`, i.e. `S(sigmoid(l))`,
/// computed in a form stable for large magnitudes.
#[inline]
pub fn llr_entropy(l: f64) -> f64 {
    let a = l.abs();
    let em = (-a).exp();
    let p = 1.0 / (1.0 + em);
    (em.ln_1p() + (1.0 - p) * a) / LN2
}

#[inline]
fn gh64() -> &'static GaussHermite {
    static GH: OnceLock<GaussHermite> = OnceLock::new();
    GH.get_or_init(|| GaussHermite::new(64))
}

/// Entropy of a Gaussian LLR with mean `m` and variance `2m`.
///
/// A narrow Gaussian (small `m`) is handled with a Hermite rule; a wide one
/// with composite Gauss-Legendre panels, since the entropy integrand's
/// complex poles defeat a single Hermite rule there.
pub fn psi(m: f64) -> f64 {
    assert!(m >= 0.0 && m.is_finite(), "psi needs finite m >= 0, got {m}");
    if m == 0.0 {
        return 1.0;
    }
    if m < 1.0 {
        let q = gh64();
        let scale = 2.0 * m.sqrt();
        let mut acc = 0.0;
        for (x, w) in q.nodes.iter().zip(&q.weights) {
            acc += w * llr_entropy(m + scale * x);
        }
        acc / std::f64::consts::PI.sqrt()
    } else {
        let sigma = (2.0 * m).sqrt();
        let (a, b) = (m - 13.0 * sigma, m + 13.0 * sigma);
        let norm = 1.0 / (4.0 * std::f64::consts::PI * m).sqrt();
        composite_gl16(a, b, 3.0, |l| {
            let d = l - m;
            llr_entropy(l) * norm * (-d * d / (4.0 * m)).exp()
        })
    }
}

/// Derivative `d psi / dm`, from differentiating the Gaussian kernel.
pub fn psi_prime(m: f64) -> f64 {
    assert!(m > 0.0, "psi_prime needs m > 0");
    if m < 1.0 {
        // d/dm of E[S(m + 2 sqrt(m) x)] = E[S'(L) (1 + x/sqrt(m))]
        let q = gh64();
        let rm = m.sqrt();
        let scale = 2.0 * rm;
        let mut acc = 0.0;
        for (x, w) in q.nodes.iter().zip(&q.weights) {
            let l = m + scale * x;
            acc += w * llr_entropy_dl(l) * (1.0 + x / rm);
        }
        acc / std::f64::consts::PI.sqrt()
    } else {
        let sigma = (2.0 * m).sqrt();
        let (a, b) = (m - 13.0 * sigma, m + 13.0 * sigma);
        let norm = 1.0 / (4.0 * std::f64::consts::PI * m).sqrt();
        composite_gl16(a, b, 3.0, |l| {
            let d = l - m;
            let kernel = norm * (-d * d / (4.0 * m)).exp();
            let dlogp = d / (2.0 * m) + (d * d - 2.0 * m) / (4.0 * m * m);
            llr_entropy(l) * kernel * dlogp
        })
    }
}

/// `d/dl` of [`llr_entropy`]: `-l p (1-p) / ln 2`.
#[inline]
fn llr_entropy_dl(l: f64) -> f64 {
    let a = l.abs();
    let em = (-a).exp();
    let p = 1.0 / (1.0 + em);
    -l * p * (1.0 - p) / LN2
}

/// Inverse of [`psi`] by bracketed bisection; returns `(m, clamped)` where
/// `clamped` marks entropies below [`PSI_INV_H_MIN`] mapped to the clamp.
pub fn psi_inv(h: f64) -> (f64, bool) {
    assert!(h <= 1.0 + 1e-12, "entropy above 1: {h}");
    if h >= 1.0 {
        return (0.0, false);
    }
    if h < PSI_INV_H_MIN {
        return (PSI_INV_M_MAX, true);
    }
    let (mut lo, mut hi) = (0.0f64, PSI_INV_M_MAX);
    // psi is monotone decreasing: psi(lo)=1 > h >= psi(hi)
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Cubic-Hermite lookup table for [`psi`] on a sqrt(m) grid, with an exact
/// inverse by monotone segment search. Built once per process; matches the
/// quadrature path to well below 1e-10 (asserted in tests) and makes the
/// density-evolution recursions cheap.
#[derive(Debug)]
pub struct PsiTable {
    /// grid in u = sqrt(m), uniform spacing
    du: f64,
    values: Vec<f64>,
    /// df/du at the grid points
    slopes: Vec<f64>,
    /// d psi/dm at the grid points, for the Newton inverse
    dm: Vec<f64>,
}

const TABLE_U_MAX: f64 = 20.5; // m up to ~420, past the inverse clamp
const TABLE_POINTS: usize = 16_385;

impl PsiTable {
    fn build() -> PsiTable {
        let du = TABLE_U_MAX / (TABLE_POINTS - 1) as f64;
        let mut values = Vec::with_capacity(TABLE_POINTS);
        let mut slopes = Vec::with_capacity(TABLE_POINTS);
        let mut dm = Vec::with_capacity(TABLE_POINTS);
        for i in 0..TABLE_POINTS {
            let u = i as f64 * du;
            let m = u * u;
            if i == 0 {
                values.push(1.0);
                slopes.push(0.0);
                dm.push(-0.25 / LN2);
            } else {
                let d = psi_prime(m);
                values.push(psi(m));
                // f(u) = psi(u^2) => df/du = 2u psi'(m)
                slopes.push(2.0 * u * d);
                dm.push(d);
            }
        }
        PsiTable {
            du,
            values,
            slopes,
            dm,
        }
    }

    /// Shared process-wide table.
    pub fn get() -> &'static PsiTable {
        static TABLE: OnceLock<PsiTable> = OnceLock::new();
        TABLE.get_or_init(PsiTable::build)
    }

    /// Interpolated `psi(m)`; 0 beyond the tabulated range (where the true
    /// value is below 1e-40).
    pub fn eval(&self, m: f64) -> f64 {
        debug_assert!(m >= 0.0);
        let u = m.sqrt();
        if u >= TABLE_U_MAX {
            return 0.0;
        }
        let t = u / self.du;
        let i = (t as usize).min(TABLE_POINTS - 2);
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.du, self.slopes[i + 1] * self.du);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2);
        v.clamp(0.0, 1.0)
    }

    /// Table inverse with the same clamp convention as [`psi_inv`]:
    /// segment bracketing plus a safeguarded Newton polish in m.
    pub fn inv(&self, h: f64) -> f64 {
        if h >= 1.0 {
            return 0.0;
        }
        if h < PSI_INV_H_MIN {
            return PSI_INV_M_MAX;
        }
        // binary search the decreasing value grid for the bracketing segment
        let (mut lo, mut hi) = (0usize, TABLE_POINTS - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.values[mid] > h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (u_lo, u_hi) = (lo as f64 * self.du, hi as f64 * self.du);
        let (m_lo, m_hi) = (u_lo * u_lo, u_hi * u_hi);
        let span = self.values[lo] - self.values[hi];
        let frac = if span > 0.0 { (self.values[lo] - h) / span } else { 0.5 };
        let u0 = u_lo + frac * (u_hi - u_lo);
        let mut m = u0 * u0;
        let slope = 0.5 * (self.dm[lo] + self.dm[hi]);
        if slope == 0.0 {
            return m.clamp(m_lo, m_hi).min(PSI_INV_M_MAX);
        }
        for _ in 0..8 {
            let e = self.eval(m) - h;
            if e.abs() < 1e-15 {
                break;
            }
            let next = m - e / slope;
            if !(m_lo..=m_hi).contains(&next) {
                break;
            }
            m = next;
        }
        m.clamp(m_lo, m_hi).min(PSI_INV_M_MAX)
    }
}
