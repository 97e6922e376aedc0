//! Truncated Fock-space oracle.
//!
//! Builds memory states by brute force, one mode at a time: states reachable
//! from the vacuum live in the pair sector `|n, ñ = n⟩` (dimension
//! `n_max + 1`), and the charge probe uses the full `|n, m̃⟩` grid (dimension
//! `(n_max + 1)²`). Propagation exponentiates the real, antisymmetric
//! pair-creation generator `A†Ã† − AÃ` with a scaled Taylor series, so the
//! truncated evolution is orthogonal to machine precision.
//!
//! The free part `Ω(A†A − Ã†Ã)` vanishes on the pair sector and acts on the
//! full grid as a phase that is constant along each charge stripe `n − m`.
//! It commutes with the pair-creation term and with every observable reported
//! here, so amplitudes are kept real and the free part is not propagated.

use std::str::FromStr;

use crate::{Error, Result};

/// Terms of the Taylor series are dropped once their norm falls below this
/// fraction of the vector norm.
const TAYLOR_CUTOFF: f64 = 1e-18;
const MAX_TAYLOR_TERMS: usize = 80;

/// Apply `exp(K)` to `v`, where `apply(x, out)` writes `K x` into `out` and
/// `k_norm` bounds the induced ∞-norm of `K`.
fn expm_apply<F>(apply: F, k_norm: f64, v: &mut [f64])
where
    F: Fn(&[f64], &mut [f64]),
{
    let substeps = k_norm.ceil().max(1.0) as usize;
    let scale = 1.0 / substeps as f64;
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    for _ in 0..substeps {
        let v_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if v_norm == 0.0 {
            return;
        }
        term.copy_from_slice(v);
        for j in 1..=MAX_TAYLOR_TERMS {
            apply(&term, &mut next);
            let c = scale / j as f64;
            let mut t_norm = 0.0;
            for ((t, n), x) in term.iter_mut().zip(&next).zip(v.iter_mut()) {
                *t = n * c;
                *x += *t;
                t_norm += *t * *t;
            }
            if t_norm.sqrt() < TAYLOR_CUTOFF * v_norm {
                break;
            }
        }
    }
}

/// `out = coef · (A†Ã† − AÃ) v` on the pair sector.
fn pair_generator(coef: f64, v: &[f64], out: &mut [f64]) {
    let len = v.len();
    for n in 0..len {
        let up = if n > 0 { n as f64 * v[n - 1] } else { 0.0 };
        let down = if n + 1 < len {
            (n + 1) as f64 * v[n + 1]
        } else {
            0.0
        };
        out[n] = coef * (up - down);
    }
}

/// Geometric tail `tanh^{2(n_max+1)}(r)` of a squeezed state truncated at `n_max`.
pub fn tail_bound(r: f64, n_max: usize) -> f64 {
    r.tanh().powi(2).powi(n_max as i32 + 1)
}

/// Smallest `n_max ≤ cap` whose geometric tail is below `tolerance`.
pub fn n_max_for(r: f64, tolerance: f64, cap: usize) -> Result<usize> {
    let ratio = r.tanh().powi(2);
    if ratio == 0.0 {
        return Ok(0);
    }
    let needed = (tolerance.ln() / ratio.ln()).ceil() - 1.0;
    let n = needed.max(0.0) as usize;
    if n > cap {
        return Err(Error::TruncationTooSmall {
            n_max: cap,
            leakage: tail_bound(r, cap),
            tolerance,
        });
    }
    // ceil can land one short when the quotient is within rounding of an integer
    Ok((n..=cap)
        .find(|&k| tail_bound(r, k) < tolerance)
        .unwrap_or(cap))
}

/// Real amplitudes over `|n, ñ = n⟩`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSectorState {
    pub amps: Vec<f64>,
    /// Probability outside the truncated space, exact for closed-form
    /// constructions and estimated from the geometric tail otherwise.
    pub leakage: f64,
}

impl PairSectorState {
    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = vec![0.0; n_max + 1];
        amps[0] = 1.0;
        Self { amps, leakage: 0.0 }
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|c| c * c).sum()
    }

    /// `⟨self|other⟩` over the common truncation.
    pub fn inner(&self, other: &PairSectorState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a * b).sum()
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
    pub fn fidelity(&self, other: &PairSectorState) -> f64 {
        self.inner(other).powi(2) / (self.norm_sq() * other.norm_sq())
    }

    /// Extrapolate the weight beyond `n_max` from the ratio of the last two
    /// populations, assuming geometric decay. Without decay at the boundary
    /// the estimate falls back to `(n_max + 1)` times the last population.
    pub fn tail_estimate(&self) -> f64 {
        let n = self.n_max();
        if n == 0 {
            return 0.0;
        }
        let last = self.amps[n].powi(2);
        let prev = self.amps[n - 1].powi(2);
        let q = if prev > 0.0 {
            last / prev
        } else {
            f64::INFINITY
        };
        let estimate = if q < 1.0 {
            last * q / (1.0 - q)
        } else {
            last * (n + 1) as f64
        };
        estimate.min(1.0)
    }
}

/// Closed-form squeezed pair state, `c_n = tanh(r)^n / cosh(r)`.
pub fn build_squeezed(r: f64, n_max: usize) -> PairSectorState {
    let ratio = r.tanh();
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = 1.0 / r.cosh();
    for _ in 0..=n_max {
        amps.push(c);
        c *= ratio;
    }
    let leakage = (1.0 - amps.iter().map(|c| c * c).sum::<f64>()).max(0.0);
    PairSectorState { amps, leakage }
}

/// Exponentiate `−iG(θ) = −θ(A†Ã† − AÃ)` numerically on the vacuum.
///
/// Rejects truncations whose geometric tail `tanh^{2(n_max+1)}θ` exceeds
/// `tolerance`.
pub fn apply_generator(theta: f64, n_max: usize, tolerance: f64) -> Result<PairSectorState> {
    let leakage = tail_bound(theta, n_max);
    if leakage > tolerance {
        return Err(Error::TruncationTooSmall {
            n_max,
            leakage,
            tolerance,
        });
    }
    let mut state = PairSectorState::vacuum(n_max);
    state.leakage = leakage;
    apply_generator_to(&mut state, theta);
    Ok(state)
}

/// Apply `exp(−iG(θ))` to an arbitrary pair-sector state in place.
pub fn apply_generator_to(state: &mut PairSectorState, theta: f64) {
    let k_norm = theta.abs() * (2 * state.n_max() + 1) as f64;
    expm_apply(
        |x, out| pair_generator(-theta, x, out),
        k_norm,
        &mut state.amps,
    );
}

/// Propagate with `exp(−iH dt)` for `steps` steps, `H = H₀ + H_I`.
///
/// `−iH_I = Γ(A†Ã† − AÃ)`, and `H₀` annihilates the pair sector. Each step is
/// an exponential with truncation error below `1e-18` relative, well under a
/// local error of `1e-10`.
pub fn evolve(
    state: &PairSectorState,
    omega: f64,
    gamma: f64,
    dt: f64,
    steps: usize,
    tolerance: f64,
) -> Result<PairSectorState> {
    debug_assert!(omega.is_finite());
    let mut out = state.clone();
    let k_norm = (gamma * dt).abs() * (2 * out.n_max() + 1) as f64;
    for _ in 0..steps {
        expm_apply(
            |x, o| pair_generator(gamma * dt, x, o),
            k_norm,
            &mut out.amps,
        );
        if out.amps.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteAmplitude);
        }
    }
    let estimate = out.tail_estimate();
    if estimate > tolerance {
        return Err(Error::TruncationTooSmall {
            n_max: out.n_max(),
            leakage: estimate,
            tolerance,
        });
    }
    out.leakage = out.leakage.max(estimate);
    Ok(out)
}

/// Observables available to [`expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `A†A`
    NumberA,
    /// `Ã†Ã`
    NumberATilde,
    /// `A†Ã†`
    CreatePair,
    /// `AÃ`
    AnnihilatePair,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::NumberA,
        Observable::NumberATilde,
        Observable::CreatePair,
        Observable::AnnihilatePair,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Observable::NumberA => "N_A",
            Observable::NumberATilde => "N_Atilde",
            Observable::CreatePair => "A+Atilde+",
            Observable::AnnihilatePair => "AAtilde",
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.tag() == s)
            .ok_or_else(|| Error::UnknownObservable(s.to_string()))
    }
}

/// Expectation value in a pair-sector state.
pub fn expectation(state: &PairSectorState, observable: Observable) -> f64 {
    let c = &state.amps;
    match observable {
        Observable::NumberA | Observable::NumberATilde => {
            c.iter().enumerate().map(|(n, x)| n as f64 * x * x).sum()
        }
        // ⟨ψ|A†Ã†|ψ⟩ = Σ_n (n+1) c_{n+1} c_n
        Observable::CreatePair => c
            .windows(2)
            .enumerate()
            .map(|(n, w)| (n + 1) as f64 * w[0] * w[1])
            .sum(),
        // ⟨ψ|AÃ|ψ⟩ = Σ_n n c_{n−1} c_n
        Observable::AnnihilatePair => c
            .windows(2)
            .enumerate()
            .map(|(n, w)| (n + 1) as f64 * w[1] * w[0])
            .sum(),
    }
}

/// Entropy of the reduced density matrix of the non-tilde sector.
///
/// The reduced matrix is diagonal with `p_n = c_n² / Σ c_m²`.
pub fn oracle_entropy(state: &PairSectorState, tolerance: f64) -> Result<f64> {
    if state.leakage > tolerance {
        return Err(Error::TruncationTooSmall {
            n_max: state.n_max(),
            leakage: state.leakage,
            tolerance,
        });
    }
    let norm = state.norm_sq();
    Ok(state
        .amps
        .iter()
        .map(|c| c * c / norm)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Real amplitudes `c_{n,m}` over `|n, m̃⟩`, stored row-major by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullGridState {
    n_max: usize,
    amps: Vec<f64>,
}

impl FullGridState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            n_max,
            amps: vec![0.0; (n_max + 1) * (n_max + 1)],
        }
    }

    /// The product basis state `|n, m̃⟩`.
    pub fn basis(n_max: usize, n: usize, m: usize) -> Result<Self> {
        if n > n_max || m > n_max {
            return Err(Error::IndexOutOfRange {
                index: n.max(m),
                len: n_max + 1,
            });
        }
        let mut s = Self::zeros(n_max);
        s.set(n, m, 1.0);
        Ok(s)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.amps[n * (self.n_max + 1) + m]
    }

    pub fn set(&mut self, n: usize, m: usize, value: f64) {
        self.amps[n * (self.n_max + 1) + m] = value;
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|c| c * c).sum()
    }

    fn number_expectations(&self) -> (f64, f64) {
        let dim = self.n_max + 1;
        let (mut na, mut nt) = (0.0, 0.0);
        for n in 0..dim {
            for m in 0..dim {
                let p = self.get(n, m).powi(2);
                na += n as f64 * p;
                nt += m as f64 * p;
            }
        }
        (na, nt)
    }

    /// `⟨N_A − N_Ã⟩`.
    pub fn charge(&self) -> f64 {
        let (na, nt) = self.number_expectations();
        na - nt
    }

    /// Probability on the truncation boundary (`n = n_max` or `m = n_max`).
    pub fn boundary_population(&self) -> f64 {
        let dim = self.n_max + 1;
        let edge = self.n_max;
        let mut p = 0.0;
        for k in 0..dim {
            p += self.get(edge, k).powi(2);
            if k != edge {
                p += self.get(k, edge).powi(2);
            }
        }
        p
    }

    fn propagate(&mut self, gamma_dt: f64) {
        let dim = self.n_max + 1;
        let k_norm = gamma_dt.abs() * (2 * self.n_max + 1) as f64;
        expm_apply(
            |x, out| {
                for n in 0..dim {
                    for m in 0..dim {
                        let up = if n > 0 && m > 0 {
                            ((n * m) as f64).sqrt() * x[(n - 1) * dim + m - 1]
                        } else {
                            0.0
                        };
                        let down = if n + 1 < dim && m + 1 < dim {
                            (((n + 1) * (m + 1)) as f64).sqrt() * x[(n + 1) * dim + m + 1]
                        } else {
                            0.0
                        };
                        out[n * dim + m] = gamma_dt * (up - down);
                    }
                }
            },
            k_norm,
            &mut self.amps,
        );
    }
}

/// Result of [`charge_conservation_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeProbe {
    pub initial_charge: f64,
    /// `max_t |⟨N_A − N_Ã⟩(t) − ⟨N_A − N_Ã⟩(0)|` over the sampled times.
    pub max_drift: f64,
    /// Largest boundary population seen.
    pub leakage: f64,
    pub max_norm_error: f64,
}

/// Evolve `initial` on the full grid and track `⟨N_A − N_Ã⟩` at `samples`
/// equally spaced times in `(0, t_end]`.
pub fn charge_conservation_probe(
    initial: &FullGridState,
    omega: f64,
    gamma: f64,
    t_end: f64,
    samples: usize,
    tolerance: f64,
) -> Result<ChargeProbe> {
    debug_assert!(omega.is_finite());
    let samples = samples.max(1);
    let dt = t_end / samples as f64;
    let initial_charge = initial.charge();
    let norm0 = initial.norm_sq();
    let mut state = initial.clone();
    let mut probe = ChargeProbe {
        initial_charge,
        max_drift: 0.0,
        leakage: state.boundary_population(),
        max_norm_error: 0.0,
    };
    for _ in 0..samples {
        state.propagate(gamma * dt);
        if state.amps.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteAmplitude);
        }
        probe.max_drift = probe.max_drift.max((state.charge() - initial_charge).abs());
        probe.leakage = probe.leakage.max(state.boundary_population());
        probe.max_norm_error = probe.max_norm_error.max((state.norm_sq() - norm0).abs());
    }
    if probe.leakage > tolerance {
        return Err(Error::TruncationTooSmall {
            n_max: initial.n_max,
            leakage: probe.leakage,
            tolerance,
        });
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn squeezed_examples() {
        let v = build_squeezed(0.0, 4);
        assert_eq!(v.amps, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.leakage, 0.0);

        let s = build_squeezed(1.0, 60);
        assert_relative_eq!(s.amps[0], 0.648_054_273_663_885_4, max_relative = 1e-15);
        assert!(s.leakage < 1e-13);

        let n = build_squeezed(-1.0, 10);
        assert_relative_eq!(n.amps[1], -0.493_554_347_564_573_1, max_relative = 1e-14);
    }

    #[test]
    fn generator_identity_at_zero() {
        let s = apply_generator(0.0, 10, 1e-12).unwrap();
        assert_eq!(s.amps, PairSectorState::vacuum(10).amps);
    }

    #[test]
    fn generator_matches_closed_form() {
        let s = apply_generator(1.0, 80, 1e-12).unwrap();
        let reference = build_squeezed(-1.0, 80);
        for (a, b) in s.amps.iter().zip(&reference.amps) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn generator_rejects_small_truncation() {
        match apply_generator(3.0, 10, 1e-6) {
            Err(Error::TruncationTooSmall { leakage, .. }) => {
                // tanh(3)^22
                assert_relative_eq!(leakage, 0.896_671_845_745_063_9, max_relative = 1e-12);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn generator_inverse_returns_vacuum() {
        let mut s = apply_generator(1.5, 150, 1e-12).unwrap();
        apply_generator_to(&mut s, -1.5);
        assert!(s.fidelity(&PairSectorState::vacuum(150)) >= 1.0 - 1e-8);
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let s = build_squeezed(0.3, 40);
        let e = evolve(&s, 1.0, 0.5, 0.0, 10, 1e-12).unwrap();
        assert_eq!(e.amps, s.amps);
    }

    #[test]
    fn evolve_vacuum_reproduces_squeezing() {
        let v = PairSectorState::vacuum(120);
        let e = evolve(&v, 1.0, 0.5, 0.01, 200, 1e-12).unwrap();
        let occ = expectation(&e, Observable::NumberA);
        assert!((occ - 1.381_097_845_541_815_7).abs() < 1e-7);
        assert!(e.fidelity(&build_squeezed(1.0, 120)) >= 1.0 - 1e-7);
        assert!((e.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evolve_detects_truncation() {
        let v = PairSectorState::vacuum(8);
        assert!(matches!(
            evolve(&v, 1.0, 0.5, 0.1, 40, 1e-12),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let v = PairSectorState::vacuum(5);
        for o in Observable::ALL {
            assert_eq!(expectation(&v, o), 0.0);
        }
        let s = build_squeezed(1.0, 60);
        assert_relative_eq!(
            expectation(&s, Observable::NumberA),
            1.381_097_845_541_815_7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            expectation(&s, Observable::CreatePair),
            1.813_430_203_923_509_4,
            max_relative = 1e-12
        );
        assert_eq!(
            expectation(&s, Observable::AnnihilatePair),
            expectation(&s, Observable::CreatePair)
        );
    }

    #[test]
    fn observable_tags_parse() {
        for o in Observable::ALL {
            assert_eq!(o.tag().parse::<Observable>().unwrap(), o);
        }
        assert_eq!(
            "N_B".parse::<Observable>(),
            Err(Error::UnknownObservable("N_B".into()))
        );
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            oracle_entropy(&PairSectorState::vacuum(3), 1e-12).unwrap(),
            0.0
        );
        let s = build_squeezed(1.0, 60);
        assert!((oracle_entropy(&s, 1e-12).unwrap() - 1.619_822_092_897_702_3).abs() < 1e-8);
        let s = build_squeezed(0.2, 60);
        let c2 = 0.2_f64.cosh().powi(2);
        let s2 = 0.2_f64.sinh().powi(2);
        let analytic = c2 * c2.ln() - s2 * s2.ln();
        assert!((oracle_entropy(&s, 1e-12).unwrap() - analytic).abs() < 1e-10);
        assert!(matches!(
            oracle_entropy(&build_squeezed(2.0, 5), 1e-12),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn n_max_policy() {
        assert_eq!(n_max_for(0.0, 1e-12, 10).unwrap(), 0);
        let n = n_max_for(1.0, 1e-12, 1000).unwrap();
        assert!(tail_bound(1.0, n) < 1e-12);
        assert!(tail_bound(1.0, n - 1) >= 1e-12);
        assert!(matches!(
            n_max_for(2.0, 1e-15, 20),
            Err(Error::TruncationTooSmall { n_max: 20, .. })
        ));
    }

    #[test]
    fn charge_probe_examples() {
        let p = charge_conservation_probe(
            &FullGridState::basis(40, 1, 0).unwrap(),
            1.0,
            0.3,
            2.0,
            20,
            1e-12,
        )
        .unwrap();
        assert_eq!(p.initial_charge, 1.0);
        assert!(p.max_drift < 1e-9);

        let p = charge_conservation_probe(
            &FullGridState::basis(30, 0, 0).unwrap(),
            1.0,
            0.3,
            2.0,
            10,
            1e-12,
        )
        .unwrap();
        assert_eq!(p.initial_charge, 0.0);
        assert!(p.max_drift < 1e-12);

        let p = charge_conservation_probe(
            &FullGridState::basis(40, 2, 1).unwrap(),
            1.0,
            0.3,
            2.0,
            10,
            1e-12,
        )
        .unwrap();
        assert_eq!(p.initial_charge, 1.0);
        assert!(p.max_drift < 1e-9);
        assert!(p.max_norm_error < 1e-9);
    }

    #[test]
    fn charge_probe_detects_truncation() {
        assert!(matches!(
            charge_conservation_probe(
                &FullGridState::basis(6, 1, 0).unwrap(),
                1.0,
                1.0,
                3.0,
                10,
                1e-12
            ),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn basis_out_of_range() {
        assert!(FullGridState::basis(3, 4, 0).is_err());
    }

    proptest! {
        #[test]
        fn evolution_preserves_norm(r in -1.0f64..1.0, gt in 0.0f64..1.0) {
            let s = build_squeezed(r, 400);
            let e = evolve(&s, 1.0, 0.5, gt / 0.5 / 4.0, 4, 1e-6).unwrap();
            prop_assert!((e.norm_sq() - s.norm_sq()).abs() < 1e-9);
            // squeezing adds linearly along the trajectory
            prop_assert!(e.fidelity(&build_squeezed(r + gt, 400)) >= 1.0 - 1e-8);
        }
    }
}
