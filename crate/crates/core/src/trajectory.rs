//! Trajectories in memory space.
//!
//! Two codes `θ` and `θ'` evolve side by side; their per-mode condensate
//! densities separate as `ΔN_κ(t) = sinh²(Γt − θ') − sinh²(Γt − θ)`, which
//! grows like `e^{2Γ_κ t}`. This module measures that divergence, fits its
//! exponent, locates the per-mode zero crossings and lifetimes, finds pairs of
//! codes whose states overlap above a threshold, and checks the balance
//! between divergence and entropy production.
//!
//! Sign conventions: `δθ_κ = θ_κ − θ'_κ`, `ΔN = N' − N`.

use crate::mode_space::MemoryCode;
use crate::regression::fit_line;
use crate::squeezed::{self, entropy_of_occupation, occupation_of, quasi_equilibrium_beta};
use crate::{Error, Result};

/// Fewest samples accepted by [`lyapunov_estimate`].
pub const MIN_FIT_SAMPLES: usize = 8;

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedTimes);
    }
    Ok(())
}

/// Exact `sinh²(Γt − θ') − sinh²(Γt − θ)`, evaluated as
/// `sinh(2Γt − θ − θ') · sinh(θ − θ')` to avoid cancellation.
pub fn delta_occupation(gamma: f64, theta: f64, theta_prime: f64, t: f64) -> f64 {
    (2.0 * gamma * t - theta - theta_prime).sinh() * (theta - theta_prime).sinh()
}

/// Divergence of one mode between two codes over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSeries {
    pub mode: usize,
    pub gamma: f64,
    pub theta: f64,
    /// `θ − θ'`.
    pub delta_theta: f64,
    pub times: Vec<f64>,
    /// Exact `ΔN_κ(t)`.
    pub delta_n: Vec<f64>,
    /// First-order `sinh(2(Γt − θ)) δθ`.
    pub linearized: Vec<f64>,
}

pub fn divergence_series(
    a: &MemoryCode,
    b: &MemoryCode,
    times: &[f64],
) -> Result<Vec<DivergenceSeries>> {
    a.check_same_grid(b)?;
    check_times(times)?;
    Ok(a.grid()
        .modes()
        .iter()
        .zip(a.thetas().iter().zip(b.thetas()))
        .map(|(mode, (&theta, &theta_prime))| {
            let delta_theta = theta - theta_prime;
            DivergenceSeries {
                mode: mode.index,
                gamma: mode.gamma,
                theta,
                delta_theta,
                times: times.to_vec(),
                delta_n: times
                    .iter()
                    .map(|&t| delta_occupation(mode.gamma, theta, theta_prime, t))
                    .collect(),
                linearized: times
                    .iter()
                    .map(|&t| (2.0 * (mode.gamma * t - theta)).sinh() * delta_theta)
                    .collect(),
            }
        })
        .collect())
}

/// Time derivative of `ΔN_κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRate {
    /// `2Γ cosh(2(Γt − θ)) δθ`.
    pub linearized: f64,
    /// `Γ[sinh(2(Γt − θ')) − sinh(2(Γt − θ))]`.
    pub exact: f64,
}

pub fn divergence_rate(
    a: &MemoryCode,
    b: &MemoryCode,
    t: f64,
    mode: usize,
) -> Result<DivergenceRate> {
    a.check_same_grid(b)?;
    let gamma = a.grid().mode(mode)?.gamma;
    let (theta, theta_prime) = (a.thetas()[mode], b.thetas()[mode]);
    let delta_theta = theta - theta_prime;
    Ok(DivergenceRate {
        linearized: 2.0 * gamma * (2.0 * (gamma * t - theta)).cosh() * delta_theta,
        exact: 2.0 * gamma * (2.0 * gamma * t - theta - theta_prime).cosh() * delta_theta.sinh(),
    })
}

/// Log-linear fit of `|ΔN_κ(t)|` inside a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovFit {
    pub mode: usize,
    /// Fitted slope of `ln|ΔN|` against `t`.
    pub exponent: f64,
    /// `2Γ_κ`.
    pub reference: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub residual: f64,
}

impl LyapunovFit {
    pub fn relative_error(&self) -> f64 {
        (self.exponent - self.reference).abs() / self.reference
    }
}

/// Fit the divergence exponent over samples with `t_lo ≤ t ≤ t_hi`.
///
/// The estimate approaches `2Γ_κ` once `Γt − θ ≳ 2`; windows containing the
/// zero of `ΔN` are refused.
pub fn lyapunov_estimate(series: &DivergenceSeries, window: (f64, f64)) -> Result<LyapunovFit> {
    let (lo, hi) = window;
    let (ts, dns): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.delta_n)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, d)| (*t, *d))
        .unzip();
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: ts.len(),
        });
    }
    let sign = dns[0].signum();
    if dns.iter().any(|&d| d == 0.0 || d.signum() != sign) {
        return Err(Error::WindowContainsZeroCrossing);
    }
    let logs: Vec<f64> = dns.iter().map(|d| d.abs().ln()).collect();
    let fit = fit_line(&ts, &logs).ok_or(Error::InsufficientSamples {
        needed: MIN_FIT_SAMPLES,
        got: ts.len(),
    })?;
    Ok(LyapunovFit {
        mode: series.mode,
        exponent: fit.slope,
        reference: 2.0 * series.gamma,
        window,
        samples: ts.len(),
        residual: fit.rms_residual,
    })
}

/// Per-mode forgetting times `t_κ = θ_κ / Γ_κ` of one code.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeReport {
    pub per_mode: Vec<f64>,
    /// Lifetime of the whole code, `max_κ t_κ`.
    pub tau_max: f64,
    pub tau_min: f64,
    /// Recognition window `τ_max − τ_min`.
    pub window: f64,
    /// Modes with `θ_κ < 0`, whose lifetime is negative.
    pub negative: Vec<usize>,
}

pub fn lifetimes(code: &MemoryCode) -> LifetimeReport {
    let per_mode: Vec<f64> = code
        .grid()
        .modes()
        .iter()
        .zip(code.thetas())
        .map(|(m, theta)| theta / m.gamma)
        .collect();
    let tau_max = per_mode.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tau_min = per_mode.iter().copied().fold(f64::INFINITY, f64::min);
    let negative = code
        .thetas()
        .iter()
        .enumerate()
        .filter(|(_, t)| **t < 0.0)
        .map(|(i, _)| i)
        .collect();
    LifetimeReport {
        per_mode,
        tau_max,
        tau_min,
        window: tau_max - tau_min,
        negative,
    }
}

/// Zero of `ΔN_κ(t)` for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub mode: usize,
    /// `(θ + θ') / 2Γ`, where the two `sinh²` arguments are opposite.
    pub exact: f64,
    /// First-order value `θ / Γ`.
    pub approx: f64,
}

pub fn crossing_times(a: &MemoryCode, b: &MemoryCode) -> Result<Vec<Crossing>> {
    a.check_same_grid(b)?;
    Ok(a.grid()
        .modes()
        .iter()
        .zip(a.thetas().iter().zip(b.thetas()))
        .map(|(m, (theta, theta_prime))| Crossing {
            mode: m.index,
            exact: (theta + theta_prime) / (2.0 * m.gamma),
            approx: theta / m.gamma,
        })
        .collect())
}

/// Two codes whose states overlap above threshold at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationEvent {
    pub first: usize,
    pub second: usize,
    pub t: f64,
    pub overlap: f64,
}

/// All `(i < j, t)` with `⟨i(t)|j(t)⟩ ≥ threshold`, highest overlap first.
/// Ties keep pair-major, time-minor order.
pub fn association_events(
    codes: &[MemoryCode],
    times: &[f64],
    threshold: f64,
) -> Result<Vec<AssociationEvent>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::BadThreshold(threshold));
    }
    check_times(times)?;
    if let Some(first) = codes.first() {
        for c in &codes[1..] {
            first.check_same_grid(c)?;
        }
    }
    let ln_threshold = threshold.ln();
    let mut events = Vec::new();
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            for &t in times {
                let ln_ov = squeezed::log_overlap(&codes[i].at(t)?, &codes[j].at(t)?)?;
                if ln_ov >= ln_threshold {
                    events.push(AssociationEvent {
                        first: i,
                        second: j,
                        t,
                        overlap: ln_ov.exp(),
                    });
                }
            }
        }
    }
    events.sort_by(|x, y| y.overlap.total_cmp(&x.overlap));
    Ok(events)
}

/// `|⟨0(t)|0⟩₀| · e^{tΣΓ}`: overlap of the evolved code with the empty
/// vacuum, with the exponential decay divided out. Tends to `2^M e^{Σθ}`.
pub fn attractor_escape(code: &MemoryCode, t: f64) -> Result<f64> {
    let vacuum = MemoryCode::vacuum(code.grid()).at(0.0)?;
    let ln_ov = squeezed::log_overlap(&code.at(t)?, &vacuum)?;
    Ok((ln_ov + t * code.grid().total_gamma()).exp())
}

/// How `β` is chosen in [`entropy_divergence_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaConvention {
    /// Per mode and per trajectory, from `tanh²r = e^{−βE}` at time `t`.
    QuasiEquilibrium,
    /// One inverse temperature for every mode.
    Fixed(f64),
}

/// Both sides of the divergence/entropy balance
/// `Δ Σ_κ E_κ Ṅ_κ dt = (1/β)(dS' − dS)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDivergence {
    /// Linearized divergence power `Σ 2EΓ cosh(2(Γt − θ̄)) δθ dt`, expanded
    /// about the midpoint code `θ̄ = (θ + θ')/2`.
    pub lhs: f64,
    /// Entropy side with `dS` taken as a centered difference of the
    /// closed-form entropy over `[t − dt/2, t + dt/2]`.
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`.
    pub gap: f64,
    /// The same linearization expanded about `θ` itself.
    pub lhs_one_sided: f64,
    pub gap_one_sided: f64,
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

pub fn entropy_divergence_check(
    a: &MemoryCode,
    b: &MemoryCode,
    beta: BetaConvention,
    t: f64,
    dt: f64,
) -> Result<EntropyDivergence> {
    a.check_same_grid(b)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    let entropy_step = |gamma: f64, theta: f64| {
        let s = |time: f64| entropy_of_occupation(occupation_of(gamma * time - theta));
        s(t + 0.5 * dt) - s(t - 0.5 * dt)
    };
    let (mut lhs, mut lhs_one_sided, mut rhs) = (0.0, 0.0, 0.0);
    for (mode, (&theta, &theta_prime)) in a
        .grid()
        .modes()
        .iter()
        .zip(a.thetas().iter().zip(b.thetas()))
    {
        let (e, g) = (mode.energy, mode.gamma);
        let delta_theta = theta - theta_prime;
        let mid = 0.5 * (theta + theta_prime);
        lhs += 2.0 * e * g * (2.0 * (g * t - mid)).cosh() * delta_theta * dt;
        lhs_one_sided += 2.0 * e * g * (2.0 * (g * t - theta)).cosh() * delta_theta * dt;

        let ds = entropy_step(g, theta);
        let ds_prime = entropy_step(g, theta_prime);
        rhs += match beta {
            BetaConvention::QuasiEquilibrium => {
                let b = quasi_equilibrium_beta(g * t - theta, e)?;
                let b_prime = quasi_equilibrium_beta(g * t - theta_prime, e)?;
                ds_prime / b_prime - ds / b
            }
            BetaConvention::Fixed(b) => (ds_prime - ds) / b,
        };
    }
    Ok(EntropyDivergence {
        lhs,
        rhs,
        gap: relative_gap(lhs, rhs),
        lhs_one_sided,
        gap_one_sided: relative_gap(lhs_one_sided, rhs),
    })
}
