//! One function per subcommand. Each returns the files it produced as
//! `(name, contents)` pairs in a fixed order; the caller writes them.

use dqb_core::fock_oracle::{
    apply_generator, build_squeezed, expectation, n_max_for, oracle_entropy, Observable,
    PairSectorState,
};
use dqb_core::oscillator::{envelope_fit, integrate, OscParams, OscState};
use dqb_core::squeezed::{
    decay_envelope, entanglement_entropy, log_overlap, mode_entropy, occupation_of, overlap,
    pair_amplitude_of, pair_overlap, quasi_equilibrium_beta, schmidt_distribution,
};
use dqb_core::trajectory::{
    association_events, crossing_times, divergence_series, lifetimes, lyapunov_estimate,
};
use dqb_core::{Error, MemoryCode};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, json_text, Table};

pub type Files = Vec<(String, String)>;

/// Everything a command produced, plus an error to report after the files
/// are on disk (used by `oracle-check`, whose report is useful on failure).
pub struct Outcome {
    pub files: Files,
    pub failure: Option<CliError>,
}

impl From<Files> for Outcome {
    fn from(files: Files) -> Self {
        Outcome {
            files,
            failure: None,
        }
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Outcome> {
    let opts = cfg
        .evolve
        .as_ref()
        .ok_or_else(|| CliError::config("evolve.code", "missing [evolve] section"))?;
    let times = cfg.time_grid()?.points();
    let code = cfg.code(&opts.code, &mut None)?;
    let initial = code.at(0.0)?;

    let mut header = vec!["t".to_string()];
    for k in 0..code.len() {
        header.push(format!("r_{k}"));
        header.push(format!("N_{k}"));
    }
    header.extend(["S", "overlap0", "envelope"].map(String::from));

    let rows: Vec<Vec<String>> = times
        .par_iter()
        .map(|&t| -> CliResult<Vec<String>> {
            let state = code.at(t)?;
            let mut row = vec![f(t)];
            for r in state.squeeze_parameters() {
                row.push(f(r));
                row.push(f(occupation_of(r)));
            }
            row.push(f(entanglement_entropy(&state)));
            row.push(f(overlap(&state, &initial)?));
            row.push(f(decay_envelope(&code, t)));
            Ok(row)
        })
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(&header);
    for row in &rows {
        table.row(row);
    }
    Ok(vec![("evolve.csv".to_string(), table.as_str().to_string())].into())
}

fn exactly_two(names: Vec<(String, MemoryCode)>) -> CliResult<[(String, MemoryCode); 2]> {
    <[_; 2]>::try_from(names).map_err(|_| CliError::NeedTwoCodes)
}

pub fn chaos(cfg: &RunConfig) -> CliResult<Outcome> {
    let tg = cfg.time_grid()?;
    let selection = cfg.chaos.as_ref().map(|c| c.codes.as_slice());
    let [(name_a, a), (name_b, b)] = exactly_two(cfg.codes(selection)?)?;
    let window = match cfg.chaos.as_ref().and_then(|c| c.window) {
        Some([lo, hi]) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CliError::config("chaos.window", "need finite lo < hi"));
            }
            (lo, hi)
        }
        None => (tg.t_start, tg.t_end),
    };
    let series = divergence_series(&a, &b, &tg.points())?;

    let mut div = Table::new(&["mode", "t", "delta_n", "linearized"]);
    for s in &series {
        for ((t, dn), lin) in s.times.iter().zip(&s.delta_n).zip(&s.linearized) {
            div.row(&[s.mode.to_string(), f(*t), f(*dn), f(*lin)]);
        }
    }

    let mut lyap = Table::new(&[
        "mode",
        "exponent",
        "reference",
        "relative_error",
        "window_start",
        "window_end",
        "samples",
        "residual",
        "status",
    ]);
    for s in &series {
        match lyapunov_estimate(s, window) {
            Ok(fit) => lyap.row(&[
                fit.mode.to_string(),
                f(fit.exponent),
                f(fit.reference),
                f(fit.relative_error()),
                f(fit.window.0),
                f(fit.window.1),
                fit.samples.to_string(),
                f(fit.residual),
                "ok".to_string(),
            ]),
            Err(e @ (Error::WindowContainsZeroCrossing | Error::InsufficientSamples { .. })) => {
                lyap.row(&[
                    s.mode.to_string(),
                    String::new(),
                    f(2.0 * s.gamma),
                    String::new(),
                    f(window.0),
                    f(window.1),
                    String::new(),
                    String::new(),
                    CliError::Core(e).kind().to_string(),
                ])
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut life = Table::new(&[
        "code", "mode", "tau", "negative", "tau_min", "tau_max", "window",
    ]);
    for (name, code) in [(&name_a, &a), (&name_b, &b)] {
        let rep = lifetimes(code);
        for (k, tau) in rep.per_mode.iter().enumerate() {
            life.row(&[
                name.clone(),
                k.to_string(),
                f(*tau),
                rep.negative.contains(&k).to_string(),
                f(rep.tau_min),
                f(rep.tau_max),
                f(rep.window),
            ]);
        }
    }

    let mut cross = Table::new(&["mode", "exact", "approx"]);
    for c in crossing_times(&a, &b)? {
        cross.row(&[c.mode.to_string(), f(c.exact), f(c.approx)]);
    }

    Ok(vec![
        ("divergence.csv".to_string(), div.as_str().to_string()),
        ("lyapunov.csv".to_string(), lyap.as_str().to_string()),
        ("lifetimes.csv".to_string(), life.as_str().to_string()),
        ("crossings.csv".to_string(), cross.as_str().to_string()),
    ]
    .into())
}

pub fn overlap_cmd(cfg: &RunConfig) -> CliResult<Outcome> {
    let times = cfg.time_grid()?.points();
    let selection = cfg.overlap.as_ref().and_then(|o| o.codes.as_deref());
    let codes = cfg.codes(selection)?;
    if codes.len() < 2 {
        return Err(CliError::NeedTwoCodes);
    }
    let mut pairs = Vec::new();
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            pairs.push((i, j));
        }
    }
    let blocks: Vec<Vec<Vec<String>>> = pairs
        .par_iter()
        .map(|&(i, j)| -> CliResult<Vec<Vec<String>>> {
            times
                .iter()
                .map(|&t| {
                    let lo = log_overlap(&codes[i].1.at(t)?, &codes[j].1.at(t)?)?;
                    Ok(vec![
                        f(t),
                        codes[i].0.clone(),
                        codes[j].0.clone(),
                        f(lo.exp()),
                        f(lo),
                    ])
                })
                .collect()
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&["t", "first", "second", "overlap", "log_overlap"]);
    for row in blocks.iter().flatten() {
        table.row(row);
    }
    Ok(vec![("overlap.csv".to_string(), table.as_str().to_string())].into())
}

pub fn entropy(cfg: &RunConfig) -> CliResult<Outcome> {
    let times = cfg.time_grid()?.points();
    let selection = cfg.entropy.as_ref().and_then(|o| o.codes.as_deref());
    let codes = cfg.codes(selection)?;
    if codes.is_empty() {
        return Err(CliError::config("codes", "no codes defined"));
    }
    let mut table = Table::new(&["code", "t", "mode", "r", "N", "entropy", "beta", "S_total"]);
    for (name, code) in &codes {
        let rows: Vec<Vec<Vec<String>>> = times
            .par_iter()
            .map(|&t| -> CliResult<Vec<Vec<String>>> {
                let state = code.at(t)?;
                let total = entanglement_entropy(&state);
                let rs = state.squeeze_parameters();
                rs.iter()
                    .zip(code.grid().modes())
                    .map(|(&r, m)| {
                        let beta = match quasi_equilibrium_beta(r, m.energy) {
                            Ok(b) => b,
                            Err(Error::ZeroSqueeze) => f64::INFINITY,
                            Err(e) => return Err(e.into()),
                        };
                        Ok(vec![
                            name.clone(),
                            f(t),
                            m.index.to_string(),
                            f(r),
                            f(occupation_of(r)),
                            f(mode_entropy(r)),
                            f(beta),
                            f(total),
                        ])
                    })
                    .collect()
            })
            .collect::<CliResult<_>>()?;
        for row in rows.iter().flatten() {
            table.row(row);
        }
    }
    Ok(vec![("entropy.csv".to_string(), table.as_str().to_string())].into())
}

pub fn associate(cfg: &RunConfig) -> CliResult<Outcome> {
    let opts = cfg
        .associate
        .as_ref()
        .ok_or_else(|| CliError::config("associate.threshold", "missing [associate] section"))?;
    let times = cfg.time_grid()?.points();
    let named = cfg.codes(opts.codes.as_deref())?;
    if named.len() < 2 {
        return Err(CliError::NeedTwoCodes);
    }
    let codes: Vec<MemoryCode> = named.iter().map(|(_, c)| c.clone()).collect();
    let events = association_events(&codes, &times, opts.threshold)?;
    let mut table = Table::new(&["first", "second", "t", "overlap"]);
    for e in events {
        table.row(&[
            named[e.first].0.clone(),
            named[e.second].0.clone(),
            f(e.t),
            f(e.overlap),
        ]);
    }
    Ok(vec![("associations.csv".to_string(), table.as_str().to_string())].into())
}

const ORACLE_LIMIT: f64 = 1e-8;

/// Keys of `oracle_check.json`.
pub const FORMULAS: [&str; 6] = [
    "entropy",
    "generator",
    "occupation",
    "overlap",
    "pair_amplitude",
    "schmidt_weights",
];

/// Deviations of every closed form at one squeeze parameter, in
/// `FORMULAS` order.
struct OracleSample {
    r: f64,
    n_max: usize,
    leakage: f64,
    devs: [f64; 6],
}

fn oracle_sample(r: f64, tolerance: f64, cap: usize) -> dqb_core::Result<OracleSample> {
    let n_max = n_max_for(r, tolerance, cap)?;
    let s = build_squeezed(r, n_max);
    let entropy = (oracle_entropy(&s, tolerance)? - mode_entropy(r)).abs();
    let generated = apply_generator(-r, n_max, tolerance)?;
    let generator = (1.0 - generated.fidelity(&s)).abs();
    let occupation = (expectation(&s, Observable::NumberA) - occupation_of(r)).abs();
    let vacuum = PairSectorState::vacuum(n_max);
    let ov = (s.inner(&vacuum) - pair_overlap(r, 0.0)).abs();
    let pair = (expectation(&s, Observable::CreatePair) - pair_amplitude_of(r)).abs();
    let (weights, _) = schmidt_distribution(r, n_max);
    let schmidt = weights
        .iter()
        .zip(&s.amps)
        .fold(0.0_f64, |acc, (w, c)| acc.max((w - c * c).abs()));
    Ok(OracleSample {
        r,
        n_max,
        leakage: s.leakage.max(0.0),
        devs: [entropy, generator, occupation, ov, pair, schmidt],
    })
}

pub fn oracle_check(cfg: &RunConfig) -> CliResult<Outcome> {
    let o = &cfg.oracle;
    if o.r_samples.is_empty() {
        return Err(CliError::config(
            "oracle.r_samples",
            "need at least one value",
        ));
    }
    let samples: Vec<dqb_core::Result<OracleSample>> = o
        .r_samples
        .par_iter()
        .map(|&r| oracle_sample(r, o.tolerance, o.n_max_cap))
        .collect();

    let mut report = Map::new();
    let mut failure = None;
    if let Some((r, err)) = o
        .r_samples
        .iter()
        .zip(&samples)
        .find_map(|(r, s)| s.as_ref().err().map(|e| (*r, e.clone())))
    {
        let detail = match &err {
            Error::TruncationTooSmall {
                n_max,
                leakage,
                tolerance,
            } => json!({
                "error": "truncation_too_small",
                "r": r,
                "n_max": n_max,
                "leakage": leakage,
                "tolerance": tolerance,
            }),
            other => json!({ "error": CliError::Core(other.clone()).kind(), "r": r }),
        };
        for name in FORMULAS {
            report.insert(name.to_string(), detail.clone());
        }
        failure = Some(CliError::Core(err));
    } else {
        let ok: Vec<&OracleSample> = samples.iter().map(|s| s.as_ref().unwrap()).collect();
        let n_max_used = ok.iter().map(|s| s.n_max).max().unwrap_or(0);
        let leakage = ok.iter().fold(0.0_f64, |acc, s| acc.max(s.leakage));
        let mut over = Vec::new();
        for (k, name) in FORMULAS.iter().enumerate() {
            // first sample attaining the maximum, for a stable `r_at_max`
            let worst = ok
                .iter()
                .fold(None::<&&OracleSample>, |best, s| match best {
                    Some(b) if b.devs[k] >= s.devs[k] => Some(b),
                    _ => Some(s),
                })
                .expect("at least one sample");
            let max_dev = worst.devs[k];
            if max_dev.is_nan() || max_dev >= ORACLE_LIMIT {
                over.push(name.to_string());
            }
            report.insert(
                name.to_string(),
                json!({
                    "max_dev": max_dev,
                    "r_at_max": worst.r,
                    "n_max_used": n_max_used,
                    "leakage": leakage,
                }),
            );
        }
        if !over.is_empty() {
            failure = Some(CliError::OracleDeviation(over));
        }
    }
    Ok(Outcome {
        files: vec![(
            "oracle_check.json".to_string(),
            json_text(&Value::Object(report)),
        )],
        failure,
    })
}

pub fn oscillator(cfg: &RunConfig) -> CliResult<Outcome> {
    let o = cfg
        .oscillator
        .ok_or_else(|| CliError::config("oscillator", "missing [oscillator] section"))?;
    if !(o.dt.is_finite() && o.dt > 0.0) {
        return Err(CliError::config(
            "oscillator.dt",
            "dt must be finite and > 0",
        ));
    }
    if !(o.t_end.is_finite() && o.t_end >= o.dt) {
        return Err(CliError::config(
            "oscillator.t_end",
            "t_end must be finite and >= dt",
        ));
    }
    for (name, v) in [("x0", o.x0), ("v0", o.v0), ("y0", o.y0), ("vy0", o.vy0)] {
        if !v.is_finite() {
            return Err(CliError::config(
                format!("oscillator.{name}"),
                "must be finite",
            ));
        }
    }
    let params = OscParams::new(o.m, o.gamma, o.k).map_err(|e| match e {
        Error::InvalidParams(field) => {
            CliError::config(format!("oscillator.{field}"), e.to_string())
        }
        other => other.into(),
    })?;
    let traj = integrate(
        &params,
        OscState::new(o.x0, o.v0, o.y0, o.vy0),
        o.t_end,
        o.dt,
    )?;

    let mut table = Table::new(&["t", "x", "v_x", "y", "v_y", "h"]);
    for ((t, s), h) in traj.times.iter().zip(&traj.states).zip(&traj.h) {
        table.row(&[f(*t), f(s.x), f(s.vx), f(s.y), f(s.vy), f(*h)]);
    }

    let expected = params.envelope_rate();
    let fit = |values: Vec<f64>| envelope_fit(&traj.times, &values).ok().map(|l| l.slope);
    let x_slope = fit(traj.xs());
    let y_slope = fit(traj.ys());
    let rel = |rate: Option<f64>| rate.map(|r| ((r - expected) / expected).abs());
    let x_rate = x_slope.map(|s| -s);
    let max_abs_y = traj.ys().iter().fold(0.0_f64, |acc, y| acc.max(y.abs()));
    let summary = json!({
        "steps": traj.times.len() - 1,
        "h_initial": traj.h[0],
        "h_drift": traj.h_drift(),
        "max_abs_y": max_abs_y,
        "expected_rate": expected,
        "x_decay_rate": x_rate,
        "x_rate_relative_error": if expected > 0.0 { rel(x_rate) } else { None },
        "y_growth_rate": y_slope,
        "y_rate_relative_error": if expected > 0.0 { rel(y_slope) } else { None },
    });
    Ok(vec![
        ("oscillator.csv".to_string(), table.as_str().to_string()),
        ("oscillator_summary.json".to_string(), json_text(&summary)),
    ]
    .into())
}
