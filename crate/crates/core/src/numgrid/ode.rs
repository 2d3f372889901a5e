//! Classical fourth-order Runge–Kutta integration with stored samples.

use super::{NumError, ScalarProfile};

/// Fixed step size for [`integrate_ode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Upper bound on the step; the interval is split into equal steps no
    /// longer than this.
    pub max_step: f64,
}

impl StepControl {
    pub fn new(max_step: f64) -> Self {
        Self { max_step }
    }
}

/// Samples of every state component and its derivative at the step nodes.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub x: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
}

impl OdeSolution {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[k]).collect()
    }

    pub fn slope(&self, k: usize) -> Vec<f64> {
        self.slopes.iter().map(|s| s[k]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("solution has at least one sample")
    }

    /// Dense output of component `k` as a cubic Hermite profile through the
    /// stored samples and slopes.
    pub fn profile(&self, k: usize) -> Result<ScalarProfile, NumError> {
        ScalarProfile::from_hermite(self.x.clone(), self.component(k), self.slope(k))
    }

    /// One profile per state component.
    pub fn profiles(&self) -> Result<Vec<ScalarProfile>, NumError> {
        (0..self.dim()).map(|k| self.profile(k)).collect()
    }
}

fn rk4_step<F>(rhs: &F, x: f64, y: &[f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64], out: &mut [f64])
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    rhs(x, y, &mut k[0]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k[0][i];
    }
    rhs(x + 0.5 * h, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k[1][i];
    }
    rhs(x + 0.5 * h, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + h * k[2][i];
    }
    rhs(x + h, tmp, &mut k[3]);
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// Integrates `y' = rhs(x, y)` from `interval.0` to `interval.1` with equal
/// RK4 steps.
///
/// A step producing a non-finite state is retried once as two half steps;
/// if that also fails the integration stops with
/// [`NumError::Diverged`] carrying the last good abscissa.
pub fn integrate_ode<F>(rhs: F, y0: &[f64], interval: (f64, f64), step: StepControl) -> Result<OdeSolution, NumError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (a, b) = interval;
    if !(step.max_step > 0.0) || !step.max_step.is_finite() {
        return Err(NumError::InvalidStep(step.max_step));
    }
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(NumError::InvalidInterval { lo: a, hi: b });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(NumError::Diverged { at: a });
    }
    let n = y0.len();
    let steps = (((b - a) / step.max_step).ceil() as usize).max(1);
    let h = (b - a) / steps as f64;
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut half = vec![0.0; n];

    let mut x_samples = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);
    let mut y = y0.to_vec();
    let mut dy = vec![0.0; n];
    rhs(a, &y, &mut dy);
    x_samples.push(a);
    states.push(y.clone());
    slopes.push(dy.clone());

    for s in 0..steps {
        let x = a + s as f64 * h;
        let x_next = if s + 1 == steps { b } else { a + (s + 1) as f64 * h };
        rk4_step(&rhs, x, &y, h, &mut k, &mut tmp, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            rk4_step(&rhs, x, &y, 0.5 * h, &mut k, &mut tmp, &mut half);
            let mid = half.clone();
            rk4_step(&rhs, x + 0.5 * h, &mid, 0.5 * h, &mut k, &mut tmp, &mut next);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(NumError::Diverged { at: x });
            }
        }
        std::mem::swap(&mut y, &mut next);
        rhs(x_next, &y, &mut dy);
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(NumError::Diverged { at: x });
        }
        x_samples.push(x_next);
        states.push(y.clone());
        slopes.push(dy.clone());
    }
    Ok(OdeSolution { x: x_samples, states, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution() {
        let sol = integrate_ode(|_, _, dy| dy[0] = 0.0, &[3.0], (1.0, 10.0), StepControl::new(0.1)).unwrap();
        assert!(sol.component(0).iter().all(|&v| v == 3.0));
    }

    #[test]
    fn exponential() {
        let sol = integrate_ode(|_, y, dy| dy[0] = y[0], &[1.0], (0.0, 1.0), StepControl::new(1e-3)).unwrap();
        assert!((sol.last()[0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn round_extension_equation() {
        let sol =
            integrate_ode(|r, y, dy| dy[0] = (1.0 - y[0]) / r, &[0.0], (1.0, 100.0), StepControl::new(1e-2)).unwrap();
        let err = sol
            .x
            .iter()
            .zip(sol.component(0))
            .map(|(r, y)| (y - (1.0 - 1.0 / r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn blow_up_is_reported() {
        let res = integrate_ode(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], (0.0, 2.0), StepControl::new(1e-2));
        match res {
            Err(NumError::Diverged { at }) => assert!(at > 0.9 && at < 2.0, "diverged at {at}"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
