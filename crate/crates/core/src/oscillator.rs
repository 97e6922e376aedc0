//! Classical doubled damped oscillator.
//!
//! The damped oscillator `m ẍ + γ ẋ + k x = 0` and its time-reversed image
//! `m ÿ − γ ẏ + k y = 0` follow from the Lagrangian
//! `L = m ẋ ẏ + (γ/2)(x ẏ − y ẋ) − k x y`. The pair conserves
//! `h = m ẋ ẏ + k x y`, and `y ≡ 0` is an exact solution on which the system
//! reduces to the ordinary damped oscillator.

use crate::regression::{fit_line, LinearFit};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscParams {
    pub m: f64,
    /// Mechanical resistance `γ`.
    pub gamma: f64,
    /// Stiffness.
    pub k: f64,
}

impl OscParams {
    pub fn new(m: f64, gamma: f64, k: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParams("m"));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParams("k"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParams("gamma"));
        }
        Ok(Self { m, gamma, k })
    }

    pub fn is_underdamped(&self) -> bool {
        self.gamma * self.gamma < 4.0 * self.m * self.k
    }

    /// `γ / 2m`, the decay rate of `x` and growth rate of `y`.
    pub fn envelope_rate(&self) -> f64 {
        self.gamma / (2.0 * self.m)
    }

    /// Damped angular frequency `√(k/m − γ²/4m²)`.
    pub fn damped_frequency(&self) -> Option<f64> {
        let w2 = self.k / self.m - self.envelope_rate().powi(2);
        (w2 > 0.0).then(|| w2.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OscState {
    pub x: f64,
    pub vx: f64,
    pub y: f64,
    pub vy: f64,
}

impl OscState {
    pub fn new(x: f64, vx: f64, y: f64, vy: f64) -> Self {
        Self { x, vx, y, vy }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.vx.is_finite() && self.y.is_finite() && self.vy.is_finite()
    }

    fn derivative(&self, p: &OscParams) -> OscState {
        OscState {
            x: self.vx,
            vx: (-p.gamma * self.vx - p.k * self.x) / p.m,
            y: self.vy,
            vy: (p.gamma * self.vy - p.k * self.y) / p.m,
        }
    }

    fn axpy(&self, h: f64, d: &OscState) -> OscState {
        OscState {
            x: self.x + h * d.x,
            vx: self.vx + h * d.vx,
            y: self.y + h * d.y,
            vy: self.vy + h * d.vy,
        }
    }
}

/// `h = m ẋ ẏ + k x y`.
pub fn conserved_h(state: &OscState, params: &OscParams) -> f64 {
    params.m * state.vx * state.vy + params.k * state.x * state.y
}

/// Sampled path of the doubled oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorTrajectory {
    pub params: OscParams,
    pub times: Vec<f64>,
    pub states: Vec<OscState>,
    pub h: Vec<f64>,
}

impl OscillatorTrajectory {
    /// `max_t |h(t) − h(0)|`, divided by `|h(0)|` when that is nonzero.
    pub fn h_drift(&self) -> f64 {
        let h0 = self.h[0];
        let drift = self
            .h
            .iter()
            .fold(0.0_f64, |acc, h| acc.max((h - h0).abs()));
        if h0 != 0.0 {
            drift / h0.abs()
        } else {
            drift
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.y).collect()
    }
}

fn rk4_step(s: &OscState, p: &OscParams, dt: f64) -> OscState {
    let k1 = s.derivative(p);
    let k2 = s.axpy(0.5 * dt, &k1).derivative(p);
    let k3 = s.axpy(0.5 * dt, &k2).derivative(p);
    let k4 = s.axpy(dt, &k3).derivative(p);
    OscState {
        x: s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        vx: s.vx + dt / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx),
        y: s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
        vy: s.vy + dt / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy),
    }
}

/// Fixed-step classical Runge-Kutta integration up to `t_end`. The last step
/// is shortened to land on `t_end` exactly.
pub fn integrate(
    params: &OscParams,
    initial: OscState,
    t_end: f64,
    dt: f64,
) -> Result<OscillatorTrajectory> {
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= dt) {
        return Err(Error::InvalidStep);
    }
    if !initial.is_finite() {
        return Err(Error::NonFiniteState { time: 0.0 });
    }
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut h = Vec::with_capacity(steps + 1);
    let mut state = initial;
    times.push(0.0);
    states.push(state);
    h.push(conserved_h(&state, params));
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * dt;
        let t = if i == steps { t_end } else { i as f64 * dt };
        state = rk4_step(&state, params, t - t_prev);
        if !state.is_finite() {
            return Err(Error::NonFiniteState { time: t });
        }
        times.push(t);
        states.push(state);
        h.push(conserved_h(&state, params));
    }
    Ok(OscillatorTrajectory {
        params: *params,
        times,
        states,
        h,
    })
}

/// Closed-form underdamped `x(t)` from `x(0) = x0`, `ẋ(0) = v0`.
pub fn analytic_x(params: &OscParams, x0: f64, v0: f64, t: f64) -> Result<f64> {
    let w = params.damped_frequency().ok_or(Error::Overdamped)?;
    let a = params.envelope_rate();
    Ok((-a * t).exp() * (x0 * (w * t).cos() + (v0 + a * x0) / w * (w * t).sin()))
}

/// Log-linear fit through the local maxima of `|values|`. The slope is the
/// envelope rate: negative for decay, positive for growth.
pub fn envelope_fit(times: &[f64], values: &[f64]) -> Result<LinearFit> {
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (prev, cur, next) = (values[i - 1].abs(), values[i].abs(), values[i + 1].abs());
        if cur > prev && cur >= next && cur > 0.0 {
            ts.push(times[i]);
            logs.push(cur.ln());
        }
    }
    fit_line(&ts, &logs).ok_or(Error::InsufficientSamples {
        needed: 2,
        got: ts.len(),
    })
}
