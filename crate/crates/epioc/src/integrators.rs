//! Fixed-step Euler/RK2/RK4 and adaptive RK45 (Dormand-Prince) integration
//! of first-order ODE systems, forward or backward in time.
//!
//! Vector fields are plain closures `f(t, x, u, dx)`. Controls are supplied
//! per grid node; RK stages use endpoint averaging for the midpoint value,
//! and the adaptive integrator interpolates controls linearly in time.

use thiserror::Error;

use crate::scenario::TimeGrid;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("non-finite derivative at t = {t}; state = {state:?}")]
    NonFiniteDerivative { t: f64, state: Vec<f64> },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk2,
    Rk4,
    Rk45,
}

/// Time grid plus state (and optionally control/costate) values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Option<Vec<Vec<f64>>>,
    pub costates: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// Largest absolute state value, used as a scale for relative checks.
    pub fn max_abs_state(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

fn eval_checked<F>(f: &F, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<(), IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    f(t, x, u, out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::NonFiniteDerivative {
            t,
            state: x.to_vec(),
        });
    }
    Ok(())
}

/// Forward Euler update `x + h f(t, x, u)`. Negative `h` integrates
/// backward in time.
pub fn step_euler<F>(f: &F, t: f64, x: &[f64], u: &[f64], h: f64) -> Result<Vec<f64>, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    let mut dx = vec![0.0; x.len()];
    eval_checked(f, t, x, u, &mut dx)?;
    Ok(x.iter().zip(&dx).map(|(xi, di)| xi + h * di).collect())
}

/// Heun's second-order update with `u_start` at the predictor stage and
/// `u_end` at the corrector stage.
pub fn step_rk2<F>(
    f: &F,
    t: f64,
    x: &[f64],
    u_start: &[f64],
    u_end: &[f64],
    h: f64,
) -> Result<Vec<f64>, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    eval_checked(f, t, x, u_start, &mut k1)?;
    let pred: Vec<f64> = (0..n).map(|i| x[i] + h * k1[i]).collect();
    eval_checked(f, t + h, &pred, u_end, &mut k2)?;
    Ok((0..n).map(|i| x[i] + 0.5 * h * (k1[i] + k2[i])).collect())
}

/// Classical RK4 update with `u_start` at k1, `u_mid` at k2/k3 and `u_end`
/// at k4.
pub fn step_rk4<F>(
    f: &F,
    t: f64,
    x: &[f64],
    u_start: &[f64],
    u_mid: &[f64],
    u_end: &[f64],
    h: f64,
) -> Result<Vec<f64>, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    let n = x.len();
    let h2 = 0.5 * h;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    eval_checked(f, t, x, u_start, &mut k1)?;
    for i in 0..n {
        stage[i] = x[i] + h2 * k1[i];
    }
    eval_checked(f, t + h2, &stage, u_mid, &mut k2)?;
    for i in 0..n {
        stage[i] = x[i] + h2 * k2[i];
    }
    eval_checked(f, t + h2, &stage, u_mid, &mut k3)?;
    for i in 0..n {
        stage[i] = x[i] + h * k3[i];
    }
    eval_checked(f, t + h, &stage, u_end, &mut k4)?;

    Ok((0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Piecewise-linear control interpolation over a node grid. Works for
/// increasing and decreasing time sequences.
struct ControlSampler<'a> {
    times: &'a [f64],
    controls: &'a [Vec<f64>],
    dim: usize,
}

impl<'a> ControlSampler<'a> {
    fn new(times: &'a [f64], controls: &'a [Vec<f64>]) -> Self {
        let dim = controls.first().map_or(0, |c| c.len());
        ControlSampler {
            times,
            controls,
            dim,
        }
    }

    fn sample(&self, t: f64) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let n = self.times.len();
        let increasing = self.times[n - 1] >= self.times[0];
        // locate the bracketing segment
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let before = if increasing {
                self.times[mid] <= t
            } else {
                self.times[mid] >= t
            };
            if before {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let w = if t1 == t0 { 0.0 } else { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) };
        (0..self.dim)
            .map(|i| (1.0 - w) * self.controls[lo][i] + w * self.controls[hi][i])
            .collect()
    }
}

/// Integrates `f` over the node sequence `times` (strictly monotone,
/// increasing or decreasing) starting from `x0`, with one control row per
/// node. For `Rk45` the dense output of the adaptive integrator is
/// resampled onto the nodes.
pub fn integrate<F>(
    f: &F,
    times: &[f64],
    x0: &[f64],
    controls: &[Vec<f64>],
    method: Method,
) -> Result<Trajectory, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    if times.len() < 2 {
        return Err(IntegrateError::Dimension(
            "grid must have at least 2 nodes".into(),
        ));
    }
    if controls.len() != times.len() {
        return Err(IntegrateError::Dimension(format!(
            "expected {} control rows, got {}",
            times.len(),
            controls.len()
        )));
    }
    let increasing = times[1] > times[0];
    for w in times.windows(2) {
        if (increasing && w[1] <= w[0]) || (!increasing && w[1] >= w[0]) {
            return Err(IntegrateError::Dimension(
                "grid nodes must be strictly monotone".into(),
            ));
        }
    }

    match method {
        Method::Rk45 => integrate_rk45(f, times, x0, controls),
        _ => {
            let mut states = Vec::with_capacity(times.len());
            states.push(x0.to_vec());
            for k in 0..times.len() - 1 {
                let h = times[k + 1] - times[k];
                let x = states.last().unwrap();
                let next = match method {
                    Method::Euler => step_euler(f, times[k], x, &controls[k], h)?,
                    Method::Rk2 => step_rk2(f, times[k], x, &controls[k], &controls[k + 1], h)?,
                    Method::Rk4 => {
                        let mid = average(&controls[k], &controls[k + 1]);
                        step_rk4(f, times[k], x, &controls[k], &mid, &controls[k + 1], h)?
                    }
                    Method::Rk45 => unreachable!(),
                };
                if next.iter().any(|v| !v.is_finite()) {
                    return Err(IntegrateError::NonFiniteState { t: times[k + 1] });
                }
                states.push(next);
            }
            Ok(Trajectory {
                times: times.to_vec(),
                states,
                controls: Some(controls.to_vec()),
                costates: None,
            })
        }
    }
}

/// Convenience wrapper over a [`TimeGrid`].
pub fn integrate_grid<F>(
    f: &F,
    grid: &TimeGrid,
    x0: &[f64],
    controls: &[Vec<f64>],
    method: Method,
) -> Result<Trajectory, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    integrate(f, &grid.nodes(), x0, controls, method)
}

/// Constant control rows for an `n_nodes` grid.
pub fn constant_controls(levels: &[f64], n_nodes: usize) -> Vec<Vec<f64>> {
    vec![levels.to_vec(); n_nodes]
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output coefficients
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub const RK45_ABS_TOL: f64 = 1e-8;
pub const RK45_REL_TOL: f64 = 1e-8;

fn integrate_rk45<F>(
    f: &F,
    times: &[f64],
    x0: &[f64],
    controls: &[Vec<f64>],
) -> Result<Trajectory, IntegrateError>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]),
{
    let n = x0.len();
    let sampler = ControlSampler::new(times, controls);
    let t_start = times[0];
    let t_end = *times.last().unwrap();
    let span = t_end - t_start;
    let dir = span.signum();
    let h_min = 1e-12 * span.abs();
    // the step never exceeds the output spacing, keeping the dense-output
    // interpolation error at the level of the step error control
    let h_max = (span / (times.len() - 1) as f64).abs();

    let mut t = t_start;
    let mut y = x0.to_vec();
    let mut h = (span / 100.0).clamp(-h_max, h_max);
    if h == 0.0 {
        h = dir * h_max;
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    eval_checked(f, t, &y, &sampler.sample(t), &mut k[0])?;

    let mut out_states: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    out_states.push(x0.to_vec());
    let mut next_out = 1;

    let max_steps = 10_000_000;
    for _ in 0..max_steps {
        if next_out >= times.len() {
            break;
        }
        if (t_end - t) * dir <= 0.0 {
            break;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < h_min {
            return Err(IntegrateError::StepUnderflow { t, h });
        }

        // stages 2..7 (k1 carried over, FSAL)
        let mut stage = vec![0.0; n];
        for s in 0..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s + 1) {
                    acc += a * k[j][i];
                }
                stage[i] = y[i] + h * acc;
            }
            let ts = t + C[s] * h;
            let u = sampler.sample(ts);
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            eval_checked(f, ts, &stage, &u, &mut tail[0])?;
        }
        // 5th-order solution is stage 7's argument (k7 evaluated at it)
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[5].iter().enumerate() {
                acc += a * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }

        // error estimate
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, w) in E.iter().enumerate() {
                e += w * k[j][i];
            }
            e *= h;
            let sc = RK45_ABS_TOL + RK45_REL_TOL * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / n as f64).sqrt();

        if err <= 1.0 {
            // accept: dense output for every requested node inside (t, t+h]
            let t_new = t + h;
            while next_out < times.len() && (times[next_out] - t_new) * dir <= 1e-12 * span.abs() {
                let theta = ((times[next_out] - t) / h).clamp(0.0, 1.0);
                out_states.push(dense_eval(&y, &y_new, &k, h, theta));
                next_out += 1;
            }
            y = y_new;
            t = t_new;
            k[0] = k[6].clone(); // FSAL
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).clamp(-h_max, h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    if next_out < times.len() {
        // end point reached exactly; flush any remaining nodes at t_end
        while next_out < times.len() {
            out_states.push(y.clone());
            next_out += 1;
        }
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states: out_states,
        controls: Some(controls.to_vec()),
        costates: None,
    })
}

fn dense_eval(y0: &[f64], y1: &[f64], k: &[Vec<f64>], h: f64, theta: f64) -> Vec<f64> {
    let n = y0.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ydiff = y1[i] - y0[i];
        let bspl = h * k[0][i] - ydiff;
        let mut r5 = 0.0;
        for (j, d) in D.iter().enumerate() {
            r5 += d * k[j][i];
        }
        r5 *= h;
        let r4 = ydiff - h * k[6][i] - bspl;
        out[i] = y0[i] + theta * (ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)));
    }
    out
}
