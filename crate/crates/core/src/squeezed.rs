//! Closed-form evaluation of memory-state quantities.
//!
//! Every mode of a memory state is a two-mode squeezed vacuum over the pair
//! `|n, ñ = n⟩` with amplitudes `c_n = tanh(r)^n / cosh(r)`, where
//! `r = Γt − θ`. At `t = 0` this is `r = −θ`, matching the generator's
//! `−tanh θ` pair amplitude. All quantities below follow from `r` alone.

use crate::mode_space::{EvolvedState, MemoryCode, Mode};
use crate::{Error, Result};

/// `ln cosh x` without overflow for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `r_κ(t) = Γ_κ t − θ_κ`.
pub fn squeeze_parameter(state: &EvolvedState, mode: usize) -> Result<f64> {
    state.squeeze_at(mode)
}

/// Mean number of `A_κ` quanta (and of `Ã_κ` quanta), `sinh²r`.
pub fn occupation_of(r: f64) -> f64 {
    r.sinh().powi(2)
}

pub fn occupation(state: &EvolvedState, mode: usize) -> Result<f64> {
    Ok(occupation_of(state.squeeze_at(mode)?))
}

/// Pair creation amplitude `⟨A†Ã†⟩ = sinh r cosh r` (also `⟨AÃ⟩`).
pub fn pair_amplitude_of(r: f64) -> f64 {
    r.sinh() * r.cosh()
}

/// Single-mode overlap `⟨r₁|r₂⟩ = 1 / cosh(r₁ − r₂)`.
pub fn pair_overlap(r1: f64, r2: f64) -> f64 {
    1.0 / (r1 - r2).cosh()
}

/// `ln ⟨a|b⟩ = −Σ_κ ln cosh(r_κ^a − r_κ^b)`.
pub fn log_overlap(a: &EvolvedState, b: &EvolvedState) -> Result<f64> {
    a.code().check_same_grid(b.code())?;
    Ok(a.squeeze_parameters()
        .iter()
        .zip(b.squeeze_parameters())
        .map(|(ra, rb)| -ln_cosh(ra - rb))
        .sum())
}

/// Inner product of two memory states on the same grid. Summed in log space
/// and exponentiated once.
pub fn overlap(a: &EvolvedState, b: &EvolvedState) -> Result<f64> {
    Ok(log_overlap(a, b)?.exp())
}

/// `exp(−t Σ_κ Γ_κ)`, the asymptotic law of `⟨0(t)|0⟩` up to a constant.
pub fn decay_envelope(code: &MemoryCode, t: f64) -> f64 {
    (-t * code.grid().total_gamma()).exp()
}

/// Probabilities of the pair components `|n, ñ⟩` of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtWeights {
    pub mode: Mode,
    pub r: f64,
    pub n_max: usize,
    /// `W_n = tanh^{2n}(r) / cosh²(r)` for `n = 0..=n_max`.
    pub weights: Vec<f64>,
    /// Probability beyond `n_max`, `tanh^{2(n_max+1)}(r)`.
    pub tail: f64,
}

/// `(W_0..=W_{n_max}, tail)` for squeeze parameter `r`.
pub fn schmidt_distribution(r: f64, n_max: usize) -> (Vec<f64>, f64) {
    // keep w0 + ratio = 1 to one rounding in both regimes
    let (w0, ratio) = {
        let t2 = r.tanh().powi(2);
        if t2 < 0.5 {
            (1.0 - t2, t2)
        } else {
            let w0 = 1.0 / r.cosh().powi(2);
            (w0, 1.0 - w0)
        }
    };
    let weights: Vec<f64> = (0..=n_max).map(|n| w0 * ratio.powi(n as i32)).collect();
    let tail = ratio.powi(n_max as i32 + 1);
    (weights, tail)
}

pub fn schmidt_weights(state: &EvolvedState, mode: usize, n_max: usize) -> Result<SchmidtWeights> {
    let r = state.squeeze_at(mode)?;
    let (weights, tail) = schmidt_distribution(r, n_max);
    Ok(SchmidtWeights {
        mode: *state.grid().mode(mode)?,
        r,
        n_max,
        weights,
        tail,
    })
}

/// Entanglement entropy of one mode pair as a function of `N = sinh²r`:
/// `(1+N) ln(1+N) − N ln N`.
pub fn entropy_of_occupation(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    n.ln_1p() + n * n.recip().ln_1p()
}

/// `cosh²r ln cosh²r − sinh²r ln sinh²r`, i.e. `−Σ_n W_n ln W_n`.
pub fn mode_entropy(r: f64) -> f64 {
    entropy_of_occupation(occupation_of(r))
}

/// `dS/dN = ln((1+N)/N)` for one mode.
pub fn entropy_slope(n: f64) -> f64 {
    n.recip().ln_1p()
}

/// Von Neumann entropy of the non-tilde sector, summed over modes.
pub fn entanglement_entropy(state: &EvolvedState) -> f64 {
    state
        .squeeze_parameters()
        .into_iter()
        .map(mode_entropy)
        .sum()
}

/// Quasi-equilibrium inverse temperature from `tanh²r = e^{−βE}`.
pub fn quasi_equilibrium_beta(r: f64, energy: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::ZeroSqueeze);
    }
    Ok(-2.0 * r.tanh().abs().ln() / energy)
}

/// Thermal reading of one mode of a memory state.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalDiagnostics {
    pub mode: Mode,
    pub r: f64,
    pub beta: f64,
    /// `e^{−βE}`, equal to `tanh²r`.
    pub boltzmann: f64,
    /// `1 / (e^{βE} − 1)`.
    pub bose_occupation: f64,
    /// `sinh²r`.
    pub recall_lhs: f64,
    /// `e^{−βE} ⟨A†Ã†⟩ = e^{−βE} sinh r cosh r`. Reported next to
    /// `recall_lhs`, not asserted equal to it.
    pub recall_rhs: f64,
}

impl ThermalDiagnostics {
    pub fn from_squeeze(mode: Mode, r: f64) -> Result<Self> {
        let beta = quasi_equilibrium_beta(r, mode.energy)?;
        let boltzmann = (-beta * mode.energy).exp();
        Ok(Self {
            mode,
            r,
            beta,
            boltzmann,
            bose_occupation: 1.0 / (beta * mode.energy).exp_m1(),
            recall_lhs: occupation_of(r),
            recall_rhs: boltzmann * pair_amplitude_of(r),
        })
    }
}

pub fn thermal_diagnostics(state: &EvolvedState, mode: usize) -> Result<ThermalDiagnostics> {
    let r = state.squeeze_at(mode)?;
    ThermalDiagnostics::from_squeeze(*state.grid().mode(mode)?, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_space::{ModeGrid, ModeSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn single(theta: f64, gamma: f64, t: f64) -> EvolvedState {
        let g = Arc::new(ModeGrid::build(&[ModeSpec::new(1.0, gamma)]).unwrap());
        MemoryCode::new(&g, vec![theta]).unwrap().at(t).unwrap()
    }

    fn uniform_state(m: usize, theta: f64, t: f64) -> EvolvedState {
        let g = Arc::new(ModeGrid::uniform(m, 1.0, 0.5).unwrap());
        MemoryCode::new(&g, vec![theta; m]).unwrap().at(t).unwrap()
    }

    #[test]
    fn squeeze_parameter_examples() {
        assert_eq!(squeeze_parameter(&single(0.0, 0.5, 0.0), 0).unwrap(), 0.0);
        assert_eq!(squeeze_parameter(&single(1.0, 0.5, 2.0), 0).unwrap(), 0.0);
        assert_eq!(squeeze_parameter(&single(1.0, 0.5, 4.0), 0).unwrap(), 1.0);
        assert_eq!(squeeze_parameter(&single(1.0, 0.5, 0.0), 0).unwrap(), -1.0);
        assert_eq!(
            squeeze_parameter(&single(1.0, 0.5, 0.0), 3),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        );
    }

    #[test]
    fn occupation_examples() {
        assert_eq!(occupation(&single(1.0, 0.5, 2.0), 0).unwrap(), 0.0);
        assert_relative_eq!(
            occupation(&single(1.0, 0.5, 0.0), 0).unwrap(),
            1.381_097_845_541_815_7,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            occupation(&single(1.0, 0.5, 8.0), 0).unwrap(),
            100.357_818_061_227_95,
            max_relative = 1e-13
        );
    }

    #[test]
    fn overlap_examples() {
        let a = single(0.0, 0.5, 0.0);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        let b = single(1.0, 0.5, 0.0);
        assert_relative_eq!(
            overlap(&a, &b).unwrap(),
            0.648_054_273_663_885_4,
            max_relative = 1e-14
        );
        let a10 = uniform_state(10, 0.0, 0.0);
        let b10 = uniform_state(10, 1.0, 0.0);
        assert_relative_eq!(
            overlap(&a10, &b10).unwrap(),
            0.013_065_131_632_880_527,
            max_relative = 1e-13
        );
        assert_eq!(overlap(&a, &a10), Err(Error::GridMismatch));
    }

    #[test]
    fn overlap_does_not_underflow_for_many_modes() {
        let a = uniform_state(2000, 0.0, 0.0);
        let b = uniform_state(2000, 1.0, 0.0);
        let lo = log_overlap(&a, &b).unwrap();
        assert_relative_eq!(lo, -2000.0 * 1.0_f64.cosh().ln(), max_relative = 1e-13);
    }

    #[test]
    fn ln_cosh_large_arguments() {
        assert_relative_eq!(ln_cosh(800.0), 800.0 - std::f64::consts::LN_2);
        assert_eq!(ln_cosh(0.0), 0.0);
        assert_relative_eq!(ln_cosh(-1.5), 1.5_f64.cosh().ln(), max_relative = 1e-15);
    }

    #[test]
    fn decay_envelope_examples() {
        let g = Arc::new(
            ModeGrid::build(&[ModeSpec::new(1.0, 0.5), ModeSpec::new(2.0, 0.25)]).unwrap(),
        );
        let code = MemoryCode::vacuum(&g);
        assert_eq!(decay_envelope(&code, 0.0), 1.0);
        assert_relative_eq!(
            decay_envelope(&code, 2.0),
            0.223_130_160_148_429_83,
            max_relative = 1e-15
        );
    }

    #[test]
    fn envelope_over_self_overlap_tends_to_half() {
        // single mode, Γ = 0.5, Γt = 10
        let s0 = single(1.0, 0.5, 0.0);
        let st = single(1.0, 0.5, 20.0);
        let ratio = decay_envelope(st.code(), 20.0) / overlap(&st, &s0).unwrap();
        assert!((ratio / 0.5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn schmidt_examples() {
        let w = schmidt_weights(&single(0.0, 0.5, 0.0), 0, 5).unwrap();
        assert_eq!(w.weights, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(w.tail, 0.0);

        let w = schmidt_weights(&single(0.0, 0.5, 2.0), 0, 60).unwrap();
        assert_eq!(w.r, 1.0);
        assert_relative_eq!(w.weights[0], 0.419_974_341_614_026_1, max_relative = 1e-14);
        assert_relative_eq!(w.weights[1], 0.243_595_893_999_891_4, max_relative = 1e-14);
        assert!(w.tail < 1e-13);
        assert!(w.weights.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entanglement_entropy(&single(1.0, 0.5, 2.0)), 0.0);
        assert_relative_eq!(
            entanglement_entropy(&single(0.0, 0.5, 2.0)),
            1.619_822_092_897_702_3,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            entanglement_entropy(&uniform_state(2, 0.0, 2.0)),
            3.239_644_185_795_404_5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn entropy_matches_schmidt_sum() {
        for r in [-2.0, -0.3, 0.2, 1.0, 2.5] {
            let (w, tail) = schmidt_distribution(r, 1500);
            assert!(tail < 1e-15);
            let direct: f64 = w.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum();
            assert_relative_eq!(mode_entropy(r), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn thermal_examples() {
        let d = thermal_diagnostics(&single(0.0, 0.5, 2.0), 0).unwrap();
        assert_relative_eq!(d.beta, 0.544_682_937_823_663_1, max_relative = 1e-14);
        assert_relative_eq!(
            d.bose_occupation,
            1.381_097_845_541_815_7,
            max_relative = 1e-13
        );
        assert_relative_eq!(d.recall_lhs, 1.381_097_845_541_815_7, max_relative = 1e-14);
        assert_relative_eq!(d.recall_rhs, 1.051_836_047_967_744_5, max_relative = 1e-13);
        assert_eq!(
            thermal_diagnostics(&single(1.0, 0.5, 2.0), 0),
            Err(Error::ZeroSqueeze)
        );
    }

    #[test]
    fn entropy_slope_is_beta_times_energy() {
        for r in [0.3, 1.0, 2.0, -1.2] {
            let n = occupation_of(r);
            let h = 1e-6;
            let fd = (entropy_of_occupation(n + h) - entropy_of_occupation(n - h)) / (2.0 * h);
            assert!((fd / entropy_slope(n) - 1.0).abs() < 1e-6);
            let mode = Mode {
                index: 0,
                omega: 1.7,
                gamma: 0.5,
                energy: 1.7,
            };
            let d = ThermalDiagnostics::from_squeeze(mode, r).unwrap();
            assert_relative_eq!(d.beta * mode.energy, entropy_slope(n), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weights_and_tail_sum_to_one(r in -4.0f64..4.0, n_max in 0usize..200) {
            let (w, tail) = schmidt_distribution(r, n_max);
            // Neumaier summation so the check measures the weights, not the sum
            let (mut total, mut comp) = (0.0_f64, 0.0_f64);
            for x in w.iter().copied().chain(std::iter::once(tail)) {
                let t = total + x;
                comp += if total.abs() >= x.abs() { (total - t) + x } else { (x - t) + total };
                total = t;
            }
            let total = total + comp;
            prop_assert!((total - 1.0).abs() < 1e-14);
        }

        #[test]
        fn self_overlap_is_exactly_one(theta in -5.0f64..5.0, t in 0.0f64..30.0) {
            let s = single(theta, 0.5, t);
            prop_assert_eq!(overlap(&s, &s).unwrap(), 1.0);
        }

        #[test]
        fn overlap_is_bounded_and_symmetric(ta in -3.0f64..3.0, tb in -3.0f64..3.0, t in 0.0f64..10.0) {
            let a = single(ta, 0.5, t);
            let b = single(tb, 0.5, t);
            let ab = overlap(&a, &b).unwrap();
            prop_assert!(ab > 0.0 && ab <= 1.0);
            prop_assert_eq!(ab, overlap(&b, &a).unwrap());
        }

        #[test]
        fn entropy_is_additive(m in 1usize..40, theta in -3.0f64..3.0) {
            let s = uniform_state(m, theta, 0.0);
            let one = mode_entropy(-theta);
            let total = entanglement_entropy(&s);
            prop_assert!((total - m as f64 * one).abs() <= 1e-12 * total.abs().max(1e-300));
        }

        #[test]
        fn entropy_grows_with_squeezing(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(mode_entropy(hi) > mode_entropy(lo));
            prop_assert_eq!(mode_entropy(-hi), mode_entropy(hi));
        }

        #[test]
        fn bose_occupation_equals_sinh_squared(r in prop_oneof![-4.0f64..-1e-3, 1e-3f64..4.0]) {
            let mode = Mode { index: 0, omega: 1.0, gamma: 0.5, energy: 1.0 };
            let d = ThermalDiagnostics::from_squeeze(mode, r).unwrap();
            prop_assert!((d.bose_occupation / occupation_of(r) - 1.0).abs() < 1e-10);
        }
    }
}
