//! Correlators, the CHSH statistic, PPT separability and state comparison.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{spin_operator, DensityMatrix, Direction, Operator, PSD_FLOOR};
use crate::state::StateVector;

pub use crate::eigen::{hermitian_eigen, hermitian_eigenvalues, EigenDecomposition};

/// Tsirelson's bound, `2√2`.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Spin directions for particle 1 (`a`, `a′`) and particle 4 (`b`, `b′`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl Default for ChshSettings {
    /// x–z plane, polar angles 0°, 90°, 45°, 135°.
    fn default() -> Self {
        Self::in_xz_plane_degrees([0.0, 90.0, 45.0, 135.0])
    }
}

impl ChshSettings {
    /// Directions in the x–z plane from polar angles in degrees, ordered
    /// `a, a′, b, b′`.
    pub fn in_xz_plane_degrees(angles: [f64; 4]) -> Self {
        let d = |deg: f64| Direction::in_xz_plane(deg * PI / 180.0);
        Self {
            a: d(angles[0]),
            a_prime: d(angles[1]),
            b: d(angles[2]),
            b_prime: d(angles[3]),
        }
    }

    pub fn directions(&self, pair: SettingPair) -> (Direction, Direction) {
        match pair {
            SettingPair::AB => (self.a, self.b),
            SettingPair::ABPrime => (self.a, self.b_prime),
            SettingPair::APrimeB => (self.a_prime, self.b),
            SettingPair::APrimeBPrime => (self.a_prime, self.b_prime),
        }
    }
}

/// One of the four CHSH setting combinations, numbered 1 to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SettingPair {
    AB = 1,
    ABPrime = 2,
    APrimeB = 3,
    APrimeBPrime = 4,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [
        SettingPair::AB,
        SettingPair::ABPrime,
        SettingPair::APrimeB,
        SettingPair::APrimeBPrime,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get((id as usize).wrapping_sub(1)).copied()
    }

    /// Sign of this correlator in `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
    pub fn sign(self) -> f64 {
        if self == SettingPair::ABPrime {
            -1.0
        } else {
            1.0
        }
    }
}

impl TryFrom<u8> for SettingPair {
    type Error = String;

    fn try_from(id: u8) -> std::result::Result<Self, String> {
        SettingPair::from_id(id).ok_or_else(|| format!("setting pair {id} is not in 1..=4"))
    }
}

impl From<SettingPair> for u8 {
    fn from(p: SettingPair) -> u8 {
        p.id()
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SettingPair::AB => "(a,b)",
            SettingPair::ABPrime => "(a,b')",
            SettingPair::APrimeB => "(a',b)",
            SettingPair::APrimeBPrime => "(a',b')",
        };
        f.write_str(s)
    }
}

/// One coincidence: the setting pair used and both ±1 outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshSample {
    pub pair: SettingPair,
    pub outcome1: i8,
    pub outcome4: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    /// Indexed by `SettingPair::id() - 1`.
    pub correlators: [f64; 4],
    pub counts: [u64; 4],
    pub std_errors: [f64; 4],
    pub s_value: f64,
    pub s_std_error: f64,
}

impl ChshEstimate {
    /// How many standard errors `|S|` lies above `bound`. Infinite when the
    /// standard error is zero and `|S|` exceeds the bound.
    pub fn sigmas_above(&self, bound: f64) -> f64 {
        let excess = self.s_value.abs() - bound;
        if self.s_std_error > 0.0 {
            excess / self.s_std_error
        } else if excess > 0.0 {
            f64::INFINITY
        } else if excess < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() != 2 {
        return Err(Error::NotDensity {
            reason: format!(
                "expected a two-qubit state, got {} qubits",
                rho.num_qubits()
            ),
        });
    }
    Ok(())
}

/// `tr(ρ · (n₁·σ) ⊗ (n₂·σ))`.
pub fn correlator_exact(rho: &DensityMatrix, dir1: Direction, dir2: Direction) -> Result<f64> {
    require_two_qubits(rho)?;
    let obs = spin_operator(dir1).kron(&spin_operator(dir2));
    Ok(rho.expectation(&obs)?.re)
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh_exact(rho: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    SettingPair::ALL.iter().try_fold(0.0, |s, &pair| {
        let (d1, d2) = settings.directions(pair);
        Ok(s + pair.sign() * correlator_exact(rho, d1, d2)?)
    })
}

/// Empirical correlators and `S` with standard errors `sqrt((1 − E²)/n)`.
pub fn chsh_estimate(samples: &[ChshSample]) -> Result<ChshEstimate> {
    let mut sums = [0i64; 4];
    let mut counts = [0u64; 4];
    for s in samples {
        let k = s.pair.id() as usize - 1;
        sums[k] += (s.outcome1 * s.outcome4) as i64;
        counts[k] += 1;
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyBucket { pair: k as u8 + 1 });
    }
    let correlators: [f64; 4] = std::array::from_fn(|k| sums[k] as f64 / counts[k] as f64);
    let std_errors: [f64; 4] = std::array::from_fn(|k| {
        ((1.0 - correlators[k].powi(2)).max(0.0) / counts[k] as f64).sqrt()
    });
    let s_value = SettingPair::ALL
        .iter()
        .map(|p| p.sign() * correlators[p.id() as usize - 1])
        .sum();
    let s_std_error = std_errors.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(ChshEstimate {
        correlators,
        counts,
        std_errors,
        s_value,
        s_std_error,
    })
}

/// Which qubit of a pair the partial transpose acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransposedQubit {
    First,
    Second,
}

/// Partial transpose of a two-qubit operator.
pub fn partial_transpose(m: &Operator, which: TransposedQubit) -> Operator {
    assert_eq!(
        m.dim(),
        4,
        "partial transpose is defined here for two qubits"
    );
    let mut out = Operator::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    // source entry ⟨ij|m|kl⟩
                    let (r, c) = match which {
                        TransposedQubit::Second => (2 * i + l, 2 * k + j),
                        TransposedQubit::First => (2 * k + j, 2 * i + l),
                    };
                    out.set(2 * i + j, 2 * k + l, m.get(r, c));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptResult {
    pub min_eigenvalue: f64,
    pub separable: bool,
}

/// Peres–Horodecki test, exact for two qubits: separable iff the partial
/// transpose over the second qubit has no eigenvalue below `−1e-10`.
pub fn ppt_check(rho: &DensityMatrix) -> Result<PptResult> {
    require_two_qubits(rho)?;
    let pt = partial_transpose(rho.as_operator(), TransposedQubit::Second);
    let min_eigenvalue = hermitian_eigenvalues(&pt, 1e-10)?[0];
    Ok(PptResult {
        min_eigenvalue,
        separable: min_eigenvalue >= PSD_FLOOR,
    })
}

/// `|⟨s|t⟩|²`.
pub fn fidelity_pure(s: &StateVector, t: &StateVector) -> Result<f64> {
    Ok(s.inner(t)?.norm_sqr().min(1.0))
}

/// `½ Σ|λᵢ(ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = rho.as_operator() - sigma.as_operator();
    Ok(0.5
        * hermitian_eigenvalues(&diff, 1e-10)?
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Shannon entropy in bits of the empirical distribution given by `counts`.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::density_from_pure;
    use crate::state::{bell_state, singlet, BellOutcome};

    #[test]
    fn singlet_correlators() {
        let rho = density_from_pure(&singlet());
        assert!(
            (correlator_exact(&rho, Direction::z(), Direction::z()).unwrap() + 1.0).abs() < 1e-12
        );
        for theta in [0.0, PI / 4.0, PI / 2.0] {
            let e = correlator_exact(&rho, Direction::z(), Direction::in_xz_plane(theta)).unwrap();
            assert!((e + theta.cos()).abs() < 1e-12, "θ={theta}: {e}");
        }
    }

    #[test]
    fn maximally_mixed_has_no_correlation() {
        let rho = DensityMatrix::maximally_mixed(2);
        let e = correlator_exact(
            &rho,
            Direction::from_angles(0.3, 0.2),
            Direction::from_angles(1.9, -0.4),
        )
        .unwrap();
        assert!(e.abs() < 1e-15);
        assert!(chsh_exact(&rho, &ChshSettings::default()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn singlet_reaches_tsirelson_at_default_settings() {
        // Oracle: −cos 45° − (−cos 135°) + (−cos 45°) + (−cos 45°) = −2√2
        let oracle =
            -(PI / 4.0).cos() + (3.0 * PI / 4.0).cos() - (PI / 4.0).cos() - (PI / 4.0).cos();
        let s = chsh_exact(&density_from_pure(&singlet()), &ChshSettings::default()).unwrap();
        assert!((s - oracle).abs() < 1e-12);
        assert!((s.abs() - TSIRELSON).abs() < 1e-12);
    }

    #[test]
    fn correlator_rejects_wrong_size() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(correlator_exact(&rho, Direction::z(), Direction::z()).is_err());
        assert!(ppt_check(&rho).is_err());
    }

    #[test]
    fn estimate_of_perfect_correlation() {
        let samples: Vec<ChshSample> = SettingPair::ALL
            .iter()
            .flat_map(|&pair| {
                std::iter::repeat_n(
                    ChshSample {
                        pair,
                        outcome1: 1,
                        outcome4: 1,
                    },
                    5,
                )
            })
            .collect();
        let est = chsh_estimate(&samples).unwrap();
        assert_eq!(est.correlators, [1.0; 4]);
        assert_eq!(est.s_value, 2.0);
        assert_eq!(est.std_errors, [0.0; 4]);
        assert_eq!(est.counts, [5; 4]);
    }

    #[test]
    fn estimate_errors() {
        let samples = vec![
            ChshSample {
                pair: SettingPair::AB,
                outcome1: 1,
                outcome4: -1,
            },
            ChshSample {
                pair: SettingPair::AB,
                outcome1: 1,
                outcome4: 1,
            },
            ChshSample {
                pair: SettingPair::ABPrime,
                outcome1: 1,
                outcome4: 1,
            },
            ChshSample {
                pair: SettingPair::APrimeB,
                outcome1: -1,
                outcome4: 1,
            },
        ];
        assert!(matches!(
            chsh_estimate(&samples),
            Err(Error::EmptyBucket { pair: 4 })
        ));
        let mut samples = samples;
        samples.push(ChshSample {
            pair: SettingPair::APrimeBPrime,
            outcome1: -1,
            outcome4: -1,
        });
        let est = chsh_estimate(&samples).unwrap();
        assert_eq!(est.correlators, [0.0, 1.0, -1.0, 1.0]);
        assert_eq!(est.s_value, 0.0 - 1.0 - 1.0 + 1.0);
        assert!((est.std_errors[0] - (0.5f64).sqrt()).abs() < 1e-15);
        assert!((est.s_std_error - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn setting_pair_ids() {
        for p in SettingPair::ALL {
            assert_eq!(SettingPair::from_id(p.id()), Some(p));
        }
        assert_eq!(SettingPair::from_id(0), None);
        assert_eq!(SettingPair::from_id(5), None);
    }

    #[test]
    fn ppt_classifications() {
        let mixed = ppt_check(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((mixed.min_eigenvalue - 0.25).abs() < 1e-12 && mixed.separable);
        let singlet = ppt_check(&density_from_pure(&singlet())).unwrap();
        assert!((singlet.min_eigenvalue + 0.5).abs() < 1e-12 && !singlet.separable);
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        // Hand-computed: (|01><01| + |10><10| − |00><11| − |11><00|)/2 has spectrum {−½, ½, ½, ½}.
        let rho = density_from_pure(&singlet());
        let want = [-0.5, 0.5, 0.5, 0.5];
        for which in [TransposedQubit::First, TransposedQubit::Second] {
            let vals =
                hermitian_eigenvalues(&partial_transpose(rho.as_operator(), which), 1e-12).unwrap();
            for (v, w) in vals.iter().zip(want) {
                assert!((v - w).abs() < 1e-12, "{which:?}: {vals:?}");
            }
        }
    }

    #[test]
    fn bell_mixture_is_maximally_mixed_and_separable() {
        let terms: Vec<(f64, DensityMatrix)> = BellOutcome::ALL
            .iter()
            .map(|&b| (0.25, density_from_pure(&bell_state(b))))
            .collect();
        let mix = DensityMatrix::mixture(&terms).unwrap();
        assert!(mix.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-12);
        assert!(ppt_check(&mix).unwrap().separable);
    }

    #[test]
    fn fidelity_examples() {
        let s = singlet();
        assert!((fidelity_pure(&s, &s).unwrap() - 1.0).abs() < 1e-15);
        let neg = s.with_phase(num_complex::Complex64::new(-1.0, 0.0));
        assert!((fidelity_pure(&s, &neg).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_pure(&s, &bell_state(BellOutcome::PhiPlus)).unwrap() < 1e-15);
        assert!(fidelity_pure(&s, &crate::state::joint_state()).is_err());
    }

    #[test]
    fn trace_distance_and_tv() {
        let a = density_from_pure(&StateVector::from_bits("0").unwrap());
        let b = density_from_pure(&StateVector::from_bits("1").unwrap());
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
    }

    #[test]
    fn entropy_of_uniform_four() {
        assert!((entropy_bits(&[10, 10, 10, 10]) - 2.0).abs() < 1e-15);
        assert_eq!(entropy_bits(&[7, 0, 0, 0]), 0.0);
        assert_eq!(entropy_bits(&[]), 0.0);
    }
}
