//! Pure states over a register of qubits, and the fixed states of the
//! swapping experiment.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subsystem::{scatter, Subsystem};

/// Tolerance on Σ|aᵢ|² for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-12;

/// A normalized amplitude vector over `num_qubits` qubits, qubit 1 most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amps.len())?;
        check_finite(&amps)?;
        let norm_sq = norm_sqr(&amps);
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { num_qubits, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amps.len())?;
        check_finite(&amps)?;
        let norm_sq = norm_sqr(&amps);
        if norm_sq <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized { norm_sq });
        }
        let inv = norm_sq.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(
            num_qubits > 0 && index < 1 << num_qubits,
            "basis index out of range"
        );
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Computational basis state from a ket string such as `"0101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::InvalidBasis {
                reason: format!("`{bits}` is not a bitstring"),
            });
        }
        let index = usize::from_str_radix(bits, 2).expect("validated bitstring");
        Ok(Self::basis(bits.len(), index))
    }

    /// The full computational basis over `num_qubits` qubits, in index order.
    pub fn computational_basis(num_qubits: usize) -> Vec<Self> {
        (0..1 << num_qubits)
            .map(|i| Self::basis(num_qubits, i))
            .collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`; the qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    /// Multiplies every amplitude by `factor`. A unit-modulus factor keeps
    /// the state normalized; anything else is renormalized away.
    pub fn with_phase(&self, factor: C64) -> StateVector {
        let amps: Vec<C64> = self.amps.iter().map(|a| a * factor).collect();
        StateVector::normalized(amps).expect("nonzero factor")
    }

    /// Reorders the register so that original qubit `perm[k]` ends up at
    /// position `k + 1`.
    pub fn permute(&self, perm: &Subsystem) -> Result<StateVector> {
        perm.check_permutation(self.num_qubits)?;
        let n = self.num_qubits;
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (new_index, slot) in amps.iter_mut().enumerate() {
            *slot = self.amps[scatter(new_index, perm.labels(), n)];
        }
        Ok(StateVector {
            num_qubits: n,
            amps,
        })
    }

    /// Largest componentwise modulus difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() < 1e-15 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i)|{:0width$b}⟩",
                a.re,
                a.im,
                i,
                width = self.num_qubits
            )?;
        }
        Ok(())
    }
}

/// Free-function form of [`StateVector::tensor`].
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    a.tensor(b)
}

/// Free-function form of [`StateVector::permute`].
pub fn permute_qubits(s: &StateVector, perm: &Subsystem) -> Result<StateVector> {
    s.permute(perm)
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl BellOutcome {
    /// Measurement order used for the Bell basis everywhere in the crate.
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BellOutcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "psi+" | "psiplus" => Ok(BellOutcome::PsiPlus),
            "psi-" | "psiminus" => Ok(BellOutcome::PsiMinus),
            "phi+" | "phiplus" => Ok(BellOutcome::PhiPlus),
            "phi-" | "phiminus" => Ok(BellOutcome::PhiMinus),
            other => Err(format!(
                "unknown Bell label `{other}` (expected psi+, psi-, phi+, phi-)"
            )),
        }
    }
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> StateVector {
    bell_state(BellOutcome::PsiMinus)
}

/// `|Ψ±⟩ = (|01⟩ ± |10⟩)/√2`, `|Φ±⟩ = (|00⟩ ± |11⟩)/√2`.
pub fn bell_state(label: BellOutcome) -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = 0.0;
    let amps = match label {
        BellOutcome::PsiPlus => [z, h, h, z],
        BellOutcome::PsiMinus => [z, h, -h, z],
        BellOutcome::PhiPlus => [h, z, z, h],
        BellOutcome::PhiMinus => [h, z, z, -h],
    };
    StateVector {
        num_qubits: 2,
        amps: amps.iter().map(|&r| C64::new(r, 0.0)).collect(),
    }
}

/// The Bell basis in [`BellOutcome::ALL`] order.
pub fn bell_basis() -> Vec<StateVector> {
    BellOutcome::ALL.iter().map(|&b| bell_state(b)).collect()
}

/// Two singlets on pairs (1,2) and (3,4), register order (1,2,3,4).
pub fn joint_state() -> StateVector {
    singlet().tensor(&singlet())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::BadLength { len });
    }
    Ok(len.trailing_zeros() as usize)
}

fn check_finite(amps: &[C64]) -> Result<()> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "amplitudes" })
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}
