//! Radial profiles with access to two derivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::NumError;

/// Value and first two derivatives of a profile at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub fn constant(value: f64) -> Self {
        Self { value, d1: 0.0, d2: 0.0 }
    }
}

/// Closed radius interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumError> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(NumError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn slack(&self) -> f64 {
        1e-12 * self.lo.abs().max(self.hi.abs()).max(1.0)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo - self.slack() && r <= self.hi + self.slack()
    }
}

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

#[derive(Clone)]
enum Kind {
    Laurent(Vec<(i32, f64)>),
    Spline(CubicSpline),
    Hermite(HermiteTable),
    Closure(Arc<JetFn>),
}

/// A function of radius with value, first and second derivative.
///
/// Profiles are either analytic (Laurent polynomials or closures) or built
/// from samples (natural cubic spline, or cubic Hermite when derivatives are
/// known at the nodes).
#[derive(Clone)]
pub struct ScalarProfile {
    domain: Interval,
    kind: Kind,
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Laurent(t) => format!("laurent{t:?}"),
            Kind::Spline(s) => format!("spline[{} nodes]", s.x.len()),
            Kind::Hermite(h) => format!("hermite[{} nodes]", h.x.len()),
            Kind::Closure(_) => "closure".to_string(),
        };
        f.debug_struct("ScalarProfile")
            .field("domain", &self.domain)
            .field("kind", &kind)
            .finish()
    }
}

impl ScalarProfile {
    pub fn constant(value: f64, domain: Interval) -> Self {
        Self::laurent(vec![(0, value)], domain)
    }

    /// Finite sum of terms `c·r^p` with integer (possibly negative) powers.
    pub fn laurent(terms: Vec<(i32, f64)>, domain: Interval) -> Self {
        Self { domain, kind: Kind::Laurent(terms) }
    }

    pub fn from_fn<F>(domain: Interval, jet: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        Self { domain, kind: Kind::Closure(Arc::new(jet)) }
    }

    /// Natural cubic spline through `(x, y)`.
    pub fn from_samples(x: Vec<f64>, y: Vec<f64>) -> Result<Self, NumError> {
        let spline = CubicSpline::natural(x, y)?;
        let domain = Interval::new(spline.x[0], *spline.x.last().unwrap())?;
        Ok(Self { domain, kind: Kind::Spline(spline) })
    }

    /// Cubic Hermite interpolant through values and slopes.
    pub fn from_hermite(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self, NumError> {
        let table = HermiteTable::new(x, y, dy)?;
        let domain = Interval::new(table.x[0], *table.x.last().unwrap())?;
        Ok(Self { domain, kind: Kind::Hermite(table) })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Same profile restricted (or widened, for analytic kinds) to `domain`.
    pub fn with_domain(&self, domain: Interval) -> Self {
        Self { domain, kind: self.kind.clone() }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.kind, Kind::Spline(_) | Kind::Hermite(_))
    }

    pub fn eval(&self, r: f64) -> Result<Jet, NumError> {
        if !self.domain.contains(r) {
            return Err(NumError::OutOfDomain { r, lo: self.domain.lo, hi: self.domain.hi });
        }
        Ok(self.eval_extended(r))
    }

    pub fn value(&self, r: f64) -> Result<f64, NumError> {
        self.eval(r).map(|j| j.value)
    }

    /// Evaluation without the domain check; sampled kinds extrapolate with
    /// their end polynomials.
    pub fn eval_extended(&self, r: f64) -> Jet {
        match &self.kind {
            Kind::Laurent(terms) => laurent_jet(terms, r),
            Kind::Spline(s) => s.eval(r),
            Kind::Hermite(h) => h.eval(r),
            Kind::Closure(f) => f(r),
        }
    }
}

fn laurent_jet(terms: &[(i32, f64)], r: f64) -> Jet {
    let mut jet = Jet::default();
    for &(p, c) in terms {
        if c == 0.0 {
            continue;
        }
        let pf = p as f64;
        jet.value += c * r.powi(p);
        if p != 0 {
            jet.d1 += c * pf * r.powi(p - 1);
        }
        if p != 0 && p != 1 {
            jet.d2 += c * pf * (pf - 1.0) * r.powi(p - 2);
        }
    }
    jet
}

fn check_nodes(x: &[f64], y: &[f64]) -> Result<(), NumError> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(NumError::BadSamples("need at least two samples of equal length"));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NumError::BadSamples("sample abscissae must be strictly increasing"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(NumError::BadSamples("samples must be finite"));
    }
    Ok(())
}

fn locate(x: &[f64], r: f64) -> usize {
    let n = x.len();
    if r <= x[0] {
        return 0;
    }
    if r >= x[n - 1] {
        return n - 2;
    }
    x.partition_point(|&v| v <= r).saturating_sub(1).min(n - 2)
}

#[derive(Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self, NumError> {
        check_nodes(&x, &y)?;
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut lower = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                lower[i - 1] = h0;
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs);
            m[1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self { x, y, m })
    }

    fn eval(&self, r: f64) -> Jet {
        let i = locate(&self.x, r);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - r) / h;
        let b = (r - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        Jet { value, d1, d2 }
    }
}

#[derive(Clone)]
struct HermiteTable {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl HermiteTable {
    fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self, NumError> {
        check_nodes(&x, &y)?;
        if dy.len() != x.len() || dy.iter().any(|v| !v.is_finite()) {
            return Err(NumError::BadSamples("slopes must be finite and match the samples"));
        }
        Ok(Self { x, y, dy })
    }

    fn eval(&self, r: f64) -> Jet {
        let i = locate(&self.x, r);
        hermite_jet(
            self.x[i],
            self.x[i + 1],
            self.y[i],
            self.y[i + 1],
            self.dy[i],
            self.dy[i + 1],
            r,
        )
    }
}

/// Cubic Hermite interpolation on one interval.
pub fn hermite_jet(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, r: f64) -> Jet {
    let h = x1 - x0;
    let t = (r - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let slope = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    let ddh00 = 12.0 * t - 6.0;
    let ddh10 = 6.0 * t - 4.0;
    let ddh01 = -12.0 * t + 6.0;
    let ddh11 = 6.0 * t - 2.0;
    let curv = (ddh00 * y0 + ddh01 * y1) / (h * h) + (ddh10 * d0 + ddh11 * d1) / h;
    Jet { value, d1: slope, d2: curv }
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}
