//! Mode grids, memory codes and evolved memory states.
//!
//! The field label `κ` is continuous in the model; here it is a finite,
//! ordered grid of modes. Limits in the number of modes are studied as trends
//! over growing grids.
//!
//! Units: `ħ = k_B = 1`, and a mode's energy defaults to its frequency.

use std::sync::Arc;

use crate::{Error, Result};

/// Construction input for one mode: frequency, damping and optional energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub omega: f64,
    pub gamma: f64,
    pub energy: Option<f64>,
}

impl ModeSpec {
    pub fn new(omega: f64, gamma: f64) -> Self {
        Self {
            omega,
            gamma,
            energy: None,
        }
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }
}

/// One field degree of freedom `κ` paired with its mirror mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Position on the grid.
    pub index: usize,
    /// Angular frequency `Ω_κ`.
    pub omega: f64,
    /// Damping constant `Γ_κ`, strictly positive.
    pub gamma: f64,
    /// Mode energy `E_κ`, strictly positive.
    pub energy: f64,
}

/// Validated, ordered set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    modes: Vec<Mode>,
}

impl ModeGrid {
    /// Validate `specs` and build a grid. Mode `i` of the result gets index `i`.
    pub fn build(specs: &[ModeSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let modes = specs
            .iter()
            .enumerate()
            .map(|(index, spec)| {
                let energy = spec.energy.unwrap_or(spec.omega);
                if !spec.omega.is_finite() || !spec.gamma.is_finite() || !energy.is_finite() {
                    return Err(Error::NonFinite(index));
                }
                if spec.gamma <= 0.0 {
                    return Err(Error::NonPositiveGamma(index));
                }
                if spec.omega < 0.0 {
                    return Err(Error::NegativeOmega(index));
                }
                if energy <= 0.0 {
                    return Err(Error::NonPositiveEnergy(index));
                }
                Ok(Mode {
                    index,
                    omega: spec.omega,
                    gamma: spec.gamma,
                    energy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { modes })
    }

    /// `count` copies of the same mode.
    pub fn uniform(count: usize, omega: f64, gamma: f64) -> Result<Self> {
        Self::build(&vec![ModeSpec::new(omega, gamma); count])
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, index: usize) -> Result<&Mode> {
        self.modes.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.modes.len(),
        })
    }

    /// `Σ_κ Γ_κ`, positive for every valid grid.
    pub fn total_gamma(&self) -> f64 {
        self.modes.iter().map(|m| m.gamma).sum()
    }
}

/// A memory code: one squeeze angle `θ_κ` per grid mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCode {
    grid: Arc<ModeGrid>,
    thetas: Vec<f64>,
}

impl MemoryCode {
    pub fn new(grid: &Arc<ModeGrid>, thetas: Vec<f64>) -> Result<Self> {
        if thetas.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: thetas.len(),
            });
        }
        if let Some(i) = thetas.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            thetas,
        })
    }

    /// The empty code `θ = 0` (the vacuum `|0⟩₀`).
    pub fn vacuum(grid: &Arc<ModeGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            thetas: vec![0.0; grid.len()],
        }
    }

    /// Invert `N_κ = sinh²θ_κ` with the non-negative branch `θ = asinh √N`.
    pub fn from_occupations(grid: &Arc<ModeGrid>, occupations: &[f64]) -> Result<Self> {
        if occupations.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: occupations.len(),
            });
        }
        let thetas = occupations
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                if !n.is_finite() {
                    Err(Error::NonFinite(i))
                } else if n < 0.0 {
                    Err(Error::NegativeOccupation(i))
                } else {
                    Ok(n.sqrt().asinh())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: Arc::clone(grid),
            thetas,
        })
    }

    pub fn grid(&self) -> &Arc<ModeGrid> {
        &self.grid
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Condensate densities `N_κ = sinh²θ_κ` at `t = 0`.
    pub fn occupations(&self) -> Vec<f64> {
        self.thetas.iter().map(|t| t.sinh().powi(2)).collect()
    }

    /// True when both codes live on the same grid (shared or equal by value).
    pub fn same_grid(&self, other: &MemoryCode) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &MemoryCode) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// The memory state of this code at time `t`.
    pub fn at(&self, t: f64) -> Result<EvolvedState> {
        EvolvedState::new(self.clone(), t)
    }
}

/// Per-mode `ΔN_κ = N'_κ − N_κ` between two codes at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeDistance {
    pub delta: Vec<f64>,
    pub max_abs: f64,
}

/// Difference of condensate densities, `b` minus `a`, at the recording time.
pub fn code_distance_at_zero(a: &MemoryCode, b: &MemoryCode) -> Result<CodeDistance> {
    a.check_same_grid(b)?;
    let delta: Vec<f64> = a
        .thetas
        .iter()
        .zip(&b.thetas)
        .map(|(ta, tb)| tb.sinh().powi(2) - ta.sinh().powi(2))
        .collect();
    let max_abs = delta.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    Ok(CodeDistance { delta, max_abs })
}

/// A memory code evolved for time `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    code: MemoryCode,
    time: f64,
}

impl EvolvedState {
    pub fn new(code: MemoryCode, time: f64) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidTime(time));
        }
        Ok(Self { code, time })
    }

    pub fn code(&self) -> &MemoryCode {
        &self.code
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<ModeGrid> {
        self.code.grid()
    }

    /// `r_κ(t) = Γ_κ t − θ_κ` for every mode.
    pub fn squeeze_parameters(&self) -> Vec<f64> {
        self.code
            .grid
            .modes()
            .iter()
            .zip(&self.code.thetas)
            .map(|(m, theta)| m.gamma * self.time - theta)
            .collect()
    }

    pub(crate) fn squeeze_at(&self, index: usize) -> Result<f64> {
        let mode = self.code.grid.mode(index)?;
        Ok(mode.gamma * self.time - self.code.thetas[index])
    }

    /// Reset the memory clock to zero, optionally with an updated code.
    pub fn refresh(self, code: Option<MemoryCode>) -> EvolvedState {
        EvolvedState {
            code: code.unwrap_or(self.code),
            time: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(specs: &[(f64, f64)]) -> Arc<ModeGrid> {
        let specs: Vec<_> = specs.iter().map(|&(w, g)| ModeSpec::new(w, g)).collect();
        Arc::new(ModeGrid::build(&specs).unwrap())
    }

    /// Bisection on `sinh²θ = n` over `θ ≥ 0`, independent of `asinh`.
    fn bisect_theta(n: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi.sinh().powi(2) < n {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.sinh().powi(2) < n {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn single_mode_defaults_energy_to_frequency() {
        let g = ModeGrid::build(&[ModeSpec::new(1.0, 0.5)]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.modes()[0].energy, 1.0);
    }

    #[test]
    fn total_gamma_sums_modes() {
        let g = grid(&[(1.0, 0.5), (2.0, 0.25)]);
        assert_eq!(g.len(), 2);
        assert_eq!(g.total_gamma(), 0.75);
        assert_eq!(g.modes()[1].index, 1);
        assert_eq!(g.modes()[1].energy, 2.0);
    }

    #[test]
    fn explicit_energy_is_kept() {
        let g = ModeGrid::build(&[ModeSpec::new(1.0, 0.5).with_energy(3.0)]).unwrap();
        assert_eq!(g.modes()[0].energy, 3.0);
    }

    #[test]
    fn grid_validation_errors() {
        assert_eq!(ModeGrid::build(&[]), Err(Error::EmptyGrid));
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(1.0, 0.0)]),
            Err(Error::NonPositiveGamma(0))
        );
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(1.0, 0.5), ModeSpec::new(1.0, -1.0)]),
            Err(Error::NonPositiveGamma(1))
        );
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(f64::NAN, 0.5)]),
            Err(Error::NonFinite(0))
        );
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(1.0, f64::INFINITY)]),
            Err(Error::NonFinite(0))
        );
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(-1.0, 0.5)]),
            Err(Error::NegativeOmega(0))
        );
        // zero frequency needs an explicit energy
        assert_eq!(
            ModeGrid::build(&[ModeSpec::new(0.0, 0.5)]),
            Err(Error::NonPositiveEnergy(0))
        );
        assert!(ModeGrid::build(&[ModeSpec::new(0.0, 0.5).with_energy(1.0)]).is_ok());
    }

    #[test]
    fn zero_occupation_is_zero_angle() {
        let g = grid(&[(1.0, 0.5)]);
        let c = MemoryCode::from_occupations(&g, &[0.0]).unwrap();
        assert_eq!(c.thetas(), &[0.0]);
    }

    #[test]
    fn occupation_inversion_matches_bisection() {
        let g = grid(&[(1.0, 0.5)]);
        let c = MemoryCode::from_occupations(&g, &[1.3811]).unwrap();
        let oracle = bisect_theta(1.3811);
        assert!((c.thetas()[0] - oracle).abs() < 1e-12);
        assert!((c.thetas()[0] - 1.0).abs() < 1e-4);
        let back = c.occupations()[0];
        assert!(((back - 1.3811) / 1.3811).abs() < 1e-12);
    }

    #[test]
    fn occupation_errors() {
        let g = grid(&[(1.0, 0.5)]);
        assert_eq!(
            MemoryCode::from_occupations(&g, &[-0.1]),
            Err(Error::NegativeOccupation(0))
        );
        assert_eq!(
            MemoryCode::from_occupations(&g, &[1.0, 2.0]),
            Err(Error::LengthMismatch {
                expected: 1,
                got: 2
            })
        );
        assert_eq!(
            MemoryCode::new(&g, vec![f64::NAN]),
            Err(Error::NonFinite(0))
        );
    }

    #[test]
    fn distance_examples() {
        let g1 = grid(&[(1.0, 0.5)]);
        let a = MemoryCode::new(&g1, vec![1.0]).unwrap();
        let same = code_distance_at_zero(&a, &a).unwrap();
        assert_eq!(same.delta, vec![0.0]);
        assert_eq!(same.max_abs, 0.0);

        let b = MemoryCode::new(&g1, vec![0.0]).unwrap();
        let d = code_distance_at_zero(&a, &b).unwrap();
        // sinh²(1)
        assert!((d.max_abs - 1.381_097_845_541_815_7).abs() < 1e-12);

        let g3 = grid(&[(1.0, 0.5), (1.0, 0.5), (1.0, 0.5)]);
        let z = MemoryCode::vacuum(&g3);
        assert_eq!(code_distance_at_zero(&z, &z).unwrap().max_abs, 0.0);

        assert_eq!(code_distance_at_zero(&a, &z), Err(Error::GridMismatch));
    }

    #[test]
    fn equal_grids_built_separately_are_compatible() {
        let a = MemoryCode::new(&grid(&[(1.0, 0.5)]), vec![1.0]).unwrap();
        let b = MemoryCode::new(&grid(&[(1.0, 0.5)]), vec![0.5]).unwrap();
        assert!(a.same_grid(&b));
    }

    #[test]
    fn evolved_state_rejects_bad_times() {
        let c = MemoryCode::vacuum(&grid(&[(1.0, 0.5)]));
        assert_eq!(c.at(-1.0), Err(Error::InvalidTime(-1.0)));
        assert!(c.at(f64::NAN).is_err());
        let s = c.at(4.0).unwrap();
        assert_eq!(s.squeeze_parameters(), vec![2.0]);
        let s = s.refresh(None);
        assert_eq!(s.time(), 0.0);
    }

    proptest! {
        #[test]
        fn occupation_round_trip(thetas in prop::collection::vec(0.0f64..5.0, 1..6)) {
            let g = Arc::new(ModeGrid::uniform(thetas.len(), 1.0, 0.5).unwrap());
            let code = MemoryCode::new(&g, thetas.clone()).unwrap();
            let back = MemoryCode::from_occupations(&g, &code.occupations()).unwrap();
            for (x, y) in thetas.iter().zip(back.thetas()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn distance_is_antisymmetric(
            a in prop::collection::vec(-3.0f64..3.0, 3),
            b in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            let g = Arc::new(ModeGrid::uniform(3, 1.0, 0.5).unwrap());
            let ca = MemoryCode::new(&g, a).unwrap();
            let cb = MemoryCode::new(&g, b).unwrap();
            let ab = code_distance_at_zero(&ca, &cb).unwrap();
            let ba = code_distance_at_zero(&cb, &ca).unwrap();
            prop_assert_eq!(ab.max_abs, ba.max_abs);
            for (x, y) in ab.delta.iter().zip(&ba.delta) {
                prop_assert_eq!(*x, -*y);
            }
        }
    }
}
