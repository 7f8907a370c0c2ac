//! Rubella vaccination benchmark: four states (`x1` susceptible, `x2`
//! incubating, `x3` infected, `x4` population bookkeeping), one bounded
//! vaccination control, linear infection cost `A x3 + u^2`.
//!
//! This small problem is the standard workout for the forward-backward
//! sweep; the usual control bound is `u <= 0.9`.

#[derive(Debug, Clone, Copy)]
pub struct RubellaParams {
    pub b: f64,
    pub e: f64,
    pub g: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
}

pub fn rhs(p: &RubellaParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let v = u[0];
    dx[0] = p.b - p.b * (p.p * x[1] + p.q * x[2]) - p.b * x[0] - p.beta * x[0] * x[2] - v * x[0];
    dx[1] = p.b * p.p * x[1] + p.beta * x[0] * x[2] - (p.e + p.b) * x[1];
    dx[2] = p.e * x[1] - (p.g + p.b) * x[2];
    dx[3] = p.b - p.b * x[3];
}

pub fn running_cost(a: f64, x: &[f64], u: &[f64]) -> f64 {
    a * x[2] + u[0] * u[0]
}

pub fn adjoint_rhs(
    p: &RubellaParams,
    a: f64,
    x: &[f64],
    l: &[f64],
    u: &[f64],
    dl: &mut [f64],
) {
    let v = u[0];
    dl[0] = l[0] * (p.b + v + p.beta * x[2]) - l[1] * p.beta * x[2];
    dl[1] = l[0] * p.b * p.p + l[1] * (p.e + p.b - p.p * p.b) - l[2] * p.e;
    dl[2] = -a + l[0] * (p.b * p.q + p.beta * x[0]) - l[1] * p.beta * x[0] + l[2] * (p.g + p.b);
    dl[3] = l[3] * p.b;
}

pub fn control_law(x: &[f64], l: &[f64], bounds: &[(f64, f64)], u: &mut [f64]) {
    u[0] = (l[0] * x[0] / 2.0).clamp(bounds[0].0, bounds[0].1);
}

pub fn incidence(p: &RubellaParams, x: &[f64]) -> f64 {
    p.beta * x[0] * x[2]
}
