//! Dengue host-vector models: humans coupled to an aquatic/adult mosquito
//! population.
//!
//! Every model exists in two algebraically equivalent forms: absolute
//! counts, and the fractional form obtained by scaling humans with `N_h`,
//! the aquatic phase with `k N_h` and adult mosquitoes with `m N_h`. The
//! optimal-control layer (running cost, adjoint system, control law) is
//! defined on the fractional form, which is the one the solvers use.

/// Minimizer of `gamma u^2 - coefficient u` over `[lo, hi]`; the zero-cost
/// limit is the bang-bang law.
pub(crate) fn quadratic_law(coefficient: f64, gamma: f64, lo: f64, hi: f64) -> f64 {
    if gamma > 0.0 {
        (coefficient / (2.0 * gamma)).clamp(lo, hi)
    } else if coefficient > 0.0 {
        hi
    } else {
        lo
    }
}

/// Shared host-vector parameters.
#[derive(Debug, Clone, Copy)]
pub struct HostVectorParams {
    pub nh: f64,
    pub b: f64,
    pub beta_mh: f64,
    pub beta_hm: f64,
    pub mu_h: f64,
    pub eta_h: f64,
    pub mu_m: f64,
    pub varphi: f64,
    pub mu_a: f64,
    pub eta_a: f64,
    pub m: f64,
    pub k: f64,
}

// ---------------------------------------------------------------------------
// SEIR + ASEI with an adulticide control `c`

#[derive(Debug, Clone, Copy)]
pub struct AseiParams {
    pub hv: HostVectorParams,
    pub eta_m: f64,
    pub nu_h: f64,
}

pub fn asei_rhs_abs(p: &AseiParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let q = &p.hv;
    let c = u[0];
    let (sh, eh, ih, rh, am, sm, em, im) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let force_h = q.b * q.beta_mh * im / q.nh;
    let force_m = q.b * q.beta_hm * ih / q.nh;
    dx[0] = q.mu_h * q.nh - (force_h + q.mu_h) * sh;
    dx[1] = force_h * sh - (p.nu_h + q.mu_h) * eh;
    dx[2] = p.nu_h * eh - (q.eta_h + q.mu_h) * ih;
    dx[3] = q.eta_h * ih - q.mu_h * rh;
    dx[4] = q.varphi * (1.0 - am / (q.k * q.nh)) * (sm + em + im) - (q.eta_a + q.mu_a) * am;
    dx[5] = q.eta_a * am - (force_m + q.mu_m) * sm - c * sm;
    dx[6] = force_m * sm - (q.mu_m + p.eta_m) * em - c * em;
    dx[7] = p.eta_m * em - q.mu_m * im - c * im;
}

pub fn asei_rhs_norm(p: &AseiParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let q = &p.hv;
    let c = u[0];
    let (sh, eh, ih, rh, am, sm, em, im) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let force_h = q.b * q.beta_mh * q.m * im;
    let force_m = q.b * q.beta_hm * ih;
    dx[0] = q.mu_h - (force_h + q.mu_h) * sh;
    dx[1] = force_h * sh - (p.nu_h + q.mu_h) * eh;
    dx[2] = p.nu_h * eh - (q.eta_h + q.mu_h) * ih;
    dx[3] = q.eta_h * ih - q.mu_h * rh;
    dx[4] = q.varphi * q.m / q.k * (1.0 - am) * (sm + em + im) - (q.eta_a + q.mu_a) * am;
    dx[5] = q.eta_a * q.k / q.m * am - (force_m + q.mu_m) * sm - c * sm;
    dx[6] = force_m * sm - (q.mu_m + p.eta_m) * em - c * em;
    dx[7] = p.eta_m * em - q.mu_m * im - c * im;
}

pub fn asei_running_cost(gamma_d: f64, gamma_s: f64, x: &[f64], u: &[f64]) -> f64 {
    gamma_d * x[2] * x[2] + gamma_s * u[0] * u[0]
}

/// Adjoint of the fractional system.
pub fn asei_adjoint_norm(
    p: &AseiParams,
    gamma_d: f64,
    x: &[f64],
    l: &[f64],
    u: &[f64],
    dl: &mut [f64],
) {
    let q = &p.hv;
    let c = u[0];
    let (sh, ih, am, sm, em, im) = (x[0], x[2], x[4], x[5], x[6], x[7]);
    let breed = q.varphi * q.m / q.k;
    dl[0] = l[0] * (q.b * q.beta_mh * q.m * im + q.mu_h) - l[1] * q.b * q.beta_mh * q.m * im;
    dl[1] = l[1] * (p.nu_h + q.mu_h) - l[2] * p.nu_h;
    dl[2] = -2.0 * gamma_d * ih + l[2] * (q.eta_h + q.mu_h) - l[3] * q.eta_h
        + (l[5] - l[6]) * q.b * q.beta_hm * sm;
    dl[3] = l[3] * q.mu_h;
    dl[4] = l[4] * (breed * (sm + em + im) + q.eta_a + q.mu_a) - l[5] * q.eta_a * q.k / q.m;
    dl[5] = -l[4] * breed * (1.0 - am) + l[5] * (q.b * q.beta_hm * ih + q.mu_m + c)
        - l[6] * q.b * q.beta_hm * ih;
    dl[6] = -l[4] * breed * (1.0 - am) + l[6] * (q.mu_m + p.eta_m + c) - l[7] * p.eta_m;
    dl[7] = (l[0] - l[1]) * q.b * q.beta_mh * q.m * sh - l[4] * breed * (1.0 - am)
        + l[7] * (q.mu_m + c);
}

pub fn asei_control_law(
    gamma_s: f64,
    x: &[f64],
    l: &[f64],
    bounds: &[(f64, f64)],
    u: &mut [f64],
) {
    let coefficient = l[5] * x[5] + l[6] * x[6] + l[7] * x[7];
    u[0] = quadratic_law(coefficient, gamma_s, bounds[0].0, bounds[0].1);
}

// ---------------------------------------------------------------------------
// SIR + ASI with larvicide `c_A`, adulticide `c_m` and mechanical control
// `alpha` (controls ordered as the state: u = [c_A, c_m, alpha])

#[derive(Debug, Clone, Copy)]
pub struct AsiWeights {
    pub gamma_d: f64,
    pub gamma_s: f64,
    pub gamma_l: f64,
    pub gamma_e: f64,
}

pub fn asi_rhs_abs(q: &HostVectorParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let (ca, cm, alpha) = (u[0], u[1], u[2]);
    let (sh, ih, rh, am, sm, im) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let force_h = q.b * q.beta_mh * im / q.nh;
    let force_m = q.b * q.beta_hm * ih / q.nh;
    dx[0] = q.mu_h * q.nh - (force_h + q.mu_h) * sh;
    dx[1] = force_h * sh - (q.eta_h + q.mu_h) * ih;
    dx[2] = q.eta_h * ih - q.mu_h * rh;
    dx[3] = q.varphi * (1.0 - am / (alpha * q.k * q.nh)) * (sm + im)
        - (q.eta_a + q.mu_a + ca) * am;
    dx[4] = q.eta_a * am - (force_m + q.mu_m + cm) * sm;
    dx[5] = force_m * sm - (q.mu_m + cm) * im;
}

pub fn asi_rhs_norm(q: &HostVectorParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let (ca, cm, alpha) = (u[0], u[1], u[2]);
    let (sh, ih, rh, am, sm, im) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let force_h = q.b * q.beta_mh * q.m * im;
    let force_m = q.b * q.beta_hm * ih;
    dx[0] = q.mu_h - (force_h + q.mu_h) * sh;
    dx[1] = force_h * sh - (q.eta_h + q.mu_h) * ih;
    dx[2] = q.eta_h * ih - q.mu_h * rh;
    dx[3] = q.varphi * q.m / q.k * (1.0 - am / alpha) * (sm + im) - (q.eta_a + q.mu_a + ca) * am;
    dx[4] = q.eta_a * q.k / q.m * am - (force_m + q.mu_m + cm) * sm;
    dx[5] = force_m * sm - (q.mu_m + cm) * im;
}

pub fn asi_running_cost(w: &AsiWeights, x: &[f64], u: &[f64]) -> f64 {
    let one_minus_alpha = 1.0 - u[2];
    w.gamma_d * x[1] * x[1]
        + w.gamma_s * u[1] * u[1]
        + w.gamma_l * u[0] * u[0]
        + w.gamma_e * one_minus_alpha * one_minus_alpha
}

pub fn asi_adjoint_norm(
    q: &HostVectorParams,
    w: &AsiWeights,
    x: &[f64],
    l: &[f64],
    u: &[f64],
    dl: &mut [f64],
) {
    let (ca, cm, alpha) = (u[0], u[1], u[2]);
    let (sh, ih, am, sm, im) = (x[0], x[1], x[3], x[4], x[5]);
    let breed = q.varphi * q.m / q.k;
    dl[0] = l[0] * (q.b * q.beta_mh * q.m * im + q.mu_h) - l[1] * q.b * q.beta_mh * q.m * im;
    dl[1] = -2.0 * w.gamma_d * ih + l[1] * (q.eta_h + q.mu_h) - l[2] * q.eta_h
        + (l[4] - l[5]) * q.b * q.beta_hm * sm;
    dl[2] = l[2] * q.mu_h;
    dl[3] = l[3] * (breed * (sm + im) / alpha + q.eta_a + q.mu_a + ca)
        - l[4] * q.eta_a * q.k / q.m;
    dl[4] = -l[3] * breed * (1.0 - am / alpha) + l[4] * (q.b * q.beta_hm * ih + q.mu_m + cm)
        - l[5] * q.b * q.beta_hm * ih;
    dl[5] = (l[0] - l[1]) * q.b * q.beta_mh * q.m * sh - l[3] * breed * (1.0 - am / alpha)
        + l[5] * (q.mu_m + cm);
}

/// Pointwise Hamiltonian minimizer. The spray controls have quadratic
/// stationary points; the mechanical control enters through `a_m / alpha`,
/// so its Hamiltonian section is minimized numerically on its interval.
pub fn asi_control_law(
    q: &HostVectorParams,
    w: &AsiWeights,
    x: &[f64],
    l: &[f64],
    bounds: &[(f64, f64)],
    u: &mut [f64],
) {
    u[0] = quadratic_law(l[3] * x[3], w.gamma_l, bounds[0].0, bounds[0].1);
    u[1] = quadratic_law(l[4] * x[4] + l[5] * x[5], w.gamma_s, bounds[1].0, bounds[1].1);
    // alpha-dependent part of H: gamma_E (1-alpha)^2 - l4 * breed * a_m (s_m+i_m) / alpha
    let coeff = l[3] * q.varphi * q.m / q.k * x[3] * (x[4] + x[5]);
    let section = |alpha: f64| {
        let d = 1.0 - alpha;
        w.gamma_e * d * d - coeff / alpha
    };
    u[2] = minimize_scalar(&section, bounds[2].0, bounds[2].1);
}

/// Golden-section search; the sections being minimized are smooth with at
/// most one interior minimum on the control interval.
fn minimize_scalar<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    // endpoints can win when the section is monotone
    let candidates = [lo, mid, hi];
    let mut best = candidates[0];
    let mut best_val = f(best);
    for cand in &candidates[1..] {
        let v = f(*cand);
        if v < best_val {
            best_val = v;
            best = *cand;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// SVIR vaccination variants (no controls)

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvirKind {
    Pediatric,
    Mass,
    Imperfect,
    Waning,
}

#[derive(Debug, Clone, Copy)]
pub struct SvirParams {
    pub hv: HostVectorParams,
    pub kind: SvirKind,
    /// Newborn coverage (pediatric).
    pub p: f64,
    /// Susceptible vaccination rate (mass variants).
    pub psi: f64,
    /// Residual infection rate of vaccinated members (imperfect).
    pub sigma: f64,
    /// Waning rate of vaccine immunity (waning).
    pub theta: f64,
}

pub fn svir_rhs(p: &SvirParams, normalized: bool, x: &[f64], dx: &mut [f64]) {
    let q = &p.hv;
    let (sh, vh, ih, rh, am, sm, im) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
    let nh = if normalized { 1.0 } else { q.nh };
    let force_h = if normalized {
        q.b * q.beta_mh * q.m * im
    } else {
        q.b * q.beta_mh * im / q.nh
    };
    let force_m = if normalized {
        q.b * q.beta_hm * ih
    } else {
        q.b * q.beta_hm * ih / q.nh
    };

    match p.kind {
        SvirKind::Pediatric => {
            dx[0] = (1.0 - p.p) * q.mu_h * nh - (force_h + q.mu_h) * sh;
            dx[1] = p.p * q.mu_h * nh - q.mu_h * vh;
            dx[2] = force_h * sh - (q.eta_h + q.mu_h) * ih;
        }
        SvirKind::Mass => {
            dx[0] = q.mu_h * nh - (force_h + p.psi + q.mu_h) * sh;
            dx[1] = p.psi * sh - q.mu_h * vh;
            dx[2] = force_h * sh - (q.eta_h + q.mu_h) * ih;
        }
        SvirKind::Imperfect => {
            dx[0] = q.mu_h * nh - (force_h + p.psi + q.mu_h) * sh;
            dx[1] = p.psi * sh - (p.sigma * force_h + q.mu_h) * vh;
            dx[2] = force_h * (sh + p.sigma * vh) - (q.eta_h + q.mu_h) * ih;
        }
        SvirKind::Waning => {
            dx[0] = q.mu_h * nh + p.theta * vh - (force_h + p.psi + q.mu_h) * sh;
            dx[1] = p.psi * sh - (p.theta + q.mu_h) * vh;
            dx[2] = force_h * sh - (q.eta_h + q.mu_h) * ih;
        }
    }
    dx[3] = q.eta_h * ih - q.mu_h * rh;
    if normalized {
        dx[4] = q.varphi * q.m / q.k * (1.0 - am) * (sm + im) - (q.eta_a + q.mu_a) * am;
        dx[5] = q.eta_a * q.k / q.m * am - (force_m + q.mu_m) * sm;
    } else {
        dx[4] = q.varphi * (1.0 - am / (q.k * q.nh)) * (sm + im) - (q.eta_a + q.mu_a) * am;
        dx[5] = q.eta_a * am - (force_m + q.mu_m) * sm;
    }
    dx[6] = force_m * sm - q.mu_m * im;
}

// ---------------------------------------------------------------------------
// SIR + ASI with vaccination as the single control (waning immunity)

#[derive(Debug, Clone, Copy)]
pub struct VaccineParams {
    pub hv: HostVectorParams,
    /// Waning rate attached to the vaccination control.
    pub theta: f64,
}

pub fn vaccine_rhs_abs(p: &VaccineParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let q = &p.hv;
    let v = u[0];
    let (sh, ih, rh, am, sm, im) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let force_h = q.b * q.beta_mh * im / q.nh;
    let force_m = q.b * q.beta_hm * ih / q.nh;
    dx[0] = q.mu_h * q.nh - (force_h + q.mu_h + v) * sh + p.theta * v * rh;
    dx[1] = force_h * sh - (q.eta_h + q.mu_h) * ih;
    dx[2] = q.eta_h * ih + v * sh - (p.theta * v + q.mu_h) * rh;
    dx[3] = q.varphi * (1.0 - am / (q.k * q.nh)) * (sm + im) - (q.eta_a + q.mu_a) * am;
    dx[4] = q.eta_a * am - (force_m + q.mu_m) * sm;
    dx[5] = force_m * sm - q.mu_m * im;
}

pub fn vaccine_rhs_norm(p: &VaccineParams, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let q = &p.hv;
    let v = u[0];
    let (sh, ih, rh, am, sm, im) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let force_h = q.b * q.beta_mh * q.m * im;
    let force_m = q.b * q.beta_hm * ih;
    dx[0] = q.mu_h - (force_h + q.mu_h + v) * sh + p.theta * v * rh;
    dx[1] = force_h * sh - (q.eta_h + q.mu_h) * ih;
    dx[2] = q.eta_h * ih + v * sh - (p.theta * v + q.mu_h) * rh;
    dx[3] = q.varphi * q.m / q.k * (1.0 - am) * (sm + im) - (q.eta_a + q.mu_a) * am;
    dx[4] = q.eta_a * q.k / q.m * am - (force_m + q.mu_m) * sm;
    dx[5] = force_m * sm - q.mu_m * im;
}

pub fn vaccine_running_cost(gamma_d: f64, gamma_v: f64, x: &[f64], u: &[f64]) -> f64 {
    gamma_d * x[1] * x[1] + gamma_v * u[0] * u[0]
}

pub fn vaccine_adjoint_norm(
    p: &VaccineParams,
    gamma_d: f64,
    x: &[f64],
    l: &[f64],
    u: &[f64],
    dl: &mut [f64],
) {
    let q = &p.hv;
    let v = u[0];
    let (sh, ih, am, sm, im) = (x[0], x[1], x[3], x[4], x[5]);
    let breed = q.varphi * q.m / q.k;
    dl[0] = (l[0] - l[1]) * q.b * q.beta_mh * q.m * im + l[0] * q.mu_h + (l[0] - l[2]) * v;
    dl[1] = -2.0 * gamma_d * ih + l[1] * (q.eta_h + q.mu_h) - l[2] * q.eta_h
        + (l[4] - l[5]) * q.b * q.beta_hm * sm;
    dl[2] = -l[0] * p.theta * v + l[2] * (q.mu_h + p.theta * v);
    dl[3] = l[3] * (breed * (sm + im) + q.eta_a + q.mu_a) - l[4] * q.eta_a * q.k / q.m;
    dl[4] = -l[3] * breed * (1.0 - am) + (l[4] - l[5]) * q.b * q.beta_hm * ih + l[4] * q.mu_m;
    dl[5] = (l[0] - l[1]) * q.b * q.beta_mh * q.m * sh - l[3] * breed * (1.0 - am)
        + l[5] * q.mu_m;
}

pub fn vaccine_control_law(
    p: &VaccineParams,
    gamma_v: f64,
    x: &[f64],
    l: &[f64],
    bounds: &[(f64, f64)],
    u: &mut [f64],
) {
    let coefficient = (l[0] - l[2]) * (x[0] - p.theta * x[2]);
    u[0] = quadratic_law(coefficient, gamma_v, bounds[0].0, bounds[0].1);
}
