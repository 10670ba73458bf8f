//! Projective measurements on subsets of a register.
//!
//! A basis is a list of states over the measured qubits, read in the order
//! the [`Subsystem`] lists them. Outcome `k` projects onto basis element `k`
//! tensored with the identity on the rest of the register.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::Direction;
use crate::rng::RngStream;
use crate::state::{bell_basis, norm_sqr, BellOutcome, StateVector};
use crate::subsystem::{split_table, Subsystem};

/// Outcomes at or below this probability are treated as impossible.
pub const ZERO_PROB_TOL: f64 = 1e-12;
/// Gram-matrix tolerance for measurement bases.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult<L = usize> {
    pub outcome: L,
    /// Position of the outcome in the basis that was measured.
    pub index: usize,
    pub probability: f64,
    /// Normalized post-measurement state over the whole register.
    pub post_state: StateVector,
}

/// The register split into measured qubits and the rest.
struct Split {
    rest: Vec<usize>,
    table: Vec<Vec<usize>>,
}

impl Split {
    fn new(s: &StateVector, qubits: &Subsystem) -> Result<Self> {
        qubits.check(s.num_qubits())?;
        let rest = qubits.complement(s.num_qubits());
        let table = split_table(qubits.labels(), &rest, s.num_qubits());
        Ok(Self { rest, table })
    }

    /// `(⟨b| ⊗ I)|s⟩`, an unnormalized vector over the unmeasured qubits.
    fn conditional(&self, s: &StateVector, b: &StateVector) -> Vec<C64> {
        let amps = s.amplitudes();
        let rest_dim = self.table[0].len();
        (0..rest_dim)
            .map(|r| {
                b.amplitudes()
                    .iter()
                    .zip(&self.table)
                    .map(|(bk, row)| bk.conj() * amps[row[r]])
                    .sum()
            })
            .collect()
    }

    /// `|b⟩ ⊗ |φ⟩` laid back out over the full register.
    fn embed(&self, b: &StateVector, phi: &[C64], dim: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (bk, row) in b.amplitudes().iter().zip(&self.table) {
            for (r, &full) in row.iter().enumerate() {
                out[full] = bk * phi[r];
            }
        }
        out
    }
}

/// Checks that `basis` is an orthonormal basis of a `num_qubits`-qubit space.
pub fn check_basis(basis: &[StateVector], num_qubits: usize) -> Result<()> {
    let dim = 1usize << num_qubits;
    if basis.len() != dim {
        return Err(Error::InvalidBasis {
            reason: format!("{} elements for a space of dimension {dim}", basis.len()),
        });
    }
    if let Some(b) = basis.iter().find(|b| b.num_qubits() != num_qubits) {
        return Err(Error::InvalidBasis {
            reason: format!(
                "element over {} qubits, expected {num_qubits}",
                b.num_qubits()
            ),
        });
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().skip(i) {
            let g = u.inner(v)?;
            let want = if i == j { 1.0 } else { 0.0 };
            if (g - C64::new(want, 0.0)).norm() > BASIS_TOL {
                return Err(Error::InvalidBasis {
                    reason: format!("Gram entry ({i},{j}) = {g}"),
                });
            }
        }
    }
    Ok(())
}

/// Born probabilities `‖Pₖ|s⟩‖²` for each basis element.
pub fn born_probabilities(
    s: &StateVector,
    qubits: &Subsystem,
    basis: &[StateVector],
) -> Result<Vec<f64>> {
    let split = Split::new(s, qubits)?;
    check_basis(basis, qubits.len())?;
    Ok(basis
        .iter()
        .map(|b| norm_sqr(&split.conditional(s, b)))
        .collect())
}

/// Samples an outcome with the Born rule and collapses the state onto it.
pub fn measure(
    s: &StateVector,
    qubits: &Subsystem,
    basis: &[StateVector],
    rng: &mut RngStream,
) -> Result<MeasurementResult> {
    let split = Split::new(s, qubits)?;
    check_basis(basis, qubits.len())?;
    let conditionals: Vec<Vec<C64>> = basis.iter().map(|b| split.conditional(s, b)).collect();
    let probs: Vec<f64> = conditionals.iter().map(|c| norm_sqr(c)).collect();
    let index = sample_index(&probs, rng);
    let probability = probs[index];
    let post = split.embed(&basis[index], &conditionals[index], s.dim());
    Ok(MeasurementResult {
        outcome: index,
        index,
        probability,
        post_state: StateVector::normalized(post)?,
    })
}

/// Bell-basis measurement of a qubit pair.
pub fn measure_bell(
    s: &StateVector,
    pair: &Subsystem,
    rng: &mut RngStream,
) -> Result<MeasurementResult<BellOutcome>> {
    if pair.len() != 2 {
        return Err(Error::InvalidSubsystem {
            labels: pair.labels().to_vec(),
            num_qubits: s.num_qubits(),
        });
    }
    let r = measure(s, pair, &bell_basis(), rng)?;
    Ok(MeasurementResult {
        outcome: BellOutcome::ALL[r.index],
        index: r.index,
        probability: r.probability,
        post_state: r.post_state,
    })
}

/// Eigenbasis of `n·σ`: the `+1` eigenvector first, then `−1`.
pub fn spin_basis(direction: Direction) -> [StateVector; 2] {
    let (polar, azimuth) = direction.angles();
    let (c, s) = ((polar / 2.0).cos(), (polar / 2.0).sin());
    let phase = C64::from_polar(1.0, azimuth);
    let up = vec![C64::new(c, 0.0), phase * s];
    let down = vec![C64::new(s, 0.0), -phase * c];
    [
        StateVector::normalized(up).expect("unit spinor"),
        StateVector::normalized(down).expect("unit spinor"),
    ]
}

/// Measures `n·σ` on one qubit; the outcome is the eigenvalue `±1`.
pub fn measure_spin(
    s: &StateVector,
    qubit: usize,
    direction: Direction,
    rng: &mut RngStream,
) -> Result<MeasurementResult<i8>> {
    let target = Subsystem::new(vec![qubit])?;
    let r = measure(s, &target, &spin_basis(direction), rng)?;
    Ok(MeasurementResult {
        outcome: if r.index == 0 { 1 } else { -1 },
        index: r.index,
        probability: r.probability,
        post_state: r.post_state,
    })
}

/// Normalized state of the unmeasured qubits (ascending labels) given that
/// `measured` was found in `outcome`.
pub fn relative_state(
    s: &StateVector,
    measured: &Subsystem,
    outcome: &StateVector,
) -> Result<StateVector> {
    let split = Split::new(s, measured)?;
    if outcome.num_qubits() != measured.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << measured.len(),
            found: outcome.dim(),
        });
    }
    if split.rest.is_empty() {
        return Err(Error::InvalidSubsystem {
            labels: measured.labels().to_vec(),
            num_qubits: s.num_qubits(),
        });
    }
    let phi = split.conditional(s, outcome);
    let probability = norm_sqr(&phi);
    if probability <= ZERO_PROB_TOL {
        return Err(Error::ImpossibleOutcome { probability });
    }
    StateVector::normalized(phi)
}

/// Conditional probability of `outcome` on `measured`, without renormalizing.
pub fn outcome_probability(
    s: &StateVector,
    measured: &Subsystem,
    outcome: &StateVector,
) -> Result<f64> {
    let split = Split::new(s, measured)?;
    if outcome.num_qubits() != measured.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << measured.len(),
            found: outcome.dim(),
        });
    }
    Ok(norm_sqr(&split.conditional(s, outcome)))
}

/// Inverse-CDF sampling that never returns an outcome at or below
/// [`ZERO_PROB_TOL`].
pub(crate) fn sample_index(probs: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.next_unit();
    let mut cumulative = 0.0;
    let mut last_possible = None;
    for (k, &p) in probs.iter().enumerate() {
        if p <= ZERO_PROB_TOL {
            continue;
        }
        cumulative += p;
        last_possible = Some(k);
        if u < cumulative {
            return k;
        }
    }
    last_possible.expect("a normalized state has at least one possible outcome")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{density_from_pure, Operator};
    use crate::rng::rng_derive;
    use crate::state::{bell_state, joint_state, singlet};

    fn sub(labels: &[usize]) -> Subsystem {
        Subsystem::new(labels.to_vec()).unwrap()
    }

    fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).unwrap().norm_sqr()
    }

    #[test]
    fn bell_probabilities_on_joint_state() {
        let p = born_probabilities(&joint_state(), &sub(&[2, 3]), &bell_basis()).unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn computational_probabilities() {
        let zero = StateVector::from_bits("0").unwrap();
        let p =
            born_probabilities(&zero, &sub(&[1]), &StateVector::computational_basis(1)).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);

        // Oracle: sum |amplitude|² over indices with qubit 1 = 0 and = 1.
        let j = joint_state();
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, a) in j.amplitudes().iter().enumerate() {
            if i & 0b1000 == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        let p = born_probabilities(&j, &sub(&[1]), &StateVector::computational_basis(1)).unwrap();
        assert!((p[0] - p0).abs() < 1e-15 && (p[1] - p1).abs() < 1e-15);
        assert!((p0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_bases() {
        let j = joint_state();
        let incomplete = vec![bell_state(BellOutcome::PsiPlus)];
        assert!(matches!(
            born_probabilities(&j, &sub(&[2, 3]), &incomplete),
            Err(Error::InvalidBasis { .. })
        ));
        let mut repeated = bell_basis();
        repeated[1] = repeated[0].clone();
        assert!(born_probabilities(&j, &sub(&[2, 3]), &repeated).is_err());
        assert!(born_probabilities(&j, &sub(&[2, 5]), &bell_basis()).is_err());
    }

    #[test]
    fn zz_outcome_00_leaves_11_on_1_and_4() {
        let j = joint_state();
        let basis = StateVector::computational_basis(2);
        // find a seed producing outcome 00
        let r = (0..)
            .map(|id| measure(&j, &sub(&[2, 3]), &basis, &mut rng_derive(3, id)).unwrap())
            .find(|r| r.index == 0b00)
            .unwrap();
        let rel = density_from_pure(&r.post_state)
            .partial_trace(&sub(&[1, 4]))
            .unwrap();
        let want = density_from_pure(&StateVector::from_bits("11").unwrap());
        assert!(rel.max_abs_diff(&want) < 1e-12);
        assert!((r.probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn measuring_a_basis_state_is_certain() {
        let zero = StateVector::from_bits("0").unwrap();
        let mut rng = rng_derive(0, 0);
        for _ in 0..20 {
            let r = measure(
                &zero,
                &sub(&[1]),
                &StateVector::computational_basis(1),
                &mut rng,
            )
            .unwrap();
            assert_eq!(r.outcome, 0);
            assert_eq!(r.probability, 1.0);
            assert_eq!(r.post_state, zero);
        }
    }

    #[test]
    fn qubit_one_zero_conditions_rest() {
        let rel = relative_state(
            &joint_state(),
            &sub(&[1]),
            &StateVector::from_bits("0").unwrap(),
        )
        .unwrap();
        let p = born_probabilities(&rel, &sub(&[1, 2, 3]), &StateVector::computational_basis(3))
            .unwrap();
        for (i, x) in p.iter().enumerate() {
            let want = if i == 0b101 || i == 0b110 { 0.5 } else { 0.0 };
            assert!((x - want).abs() < 1e-12, "|{i:03b}>: {x}");
        }
    }

    #[test]
    fn impossible_conditioning_is_an_error() {
        let e = relative_state(
            &joint_state(),
            &sub(&[2, 3, 4]),
            &StateVector::from_bits("111").unwrap(),
        );
        assert!(matches!(e, Err(Error::ImpossibleOutcome { .. })));
    }

    #[test]
    fn bell_measurement_relative_states() {
        let j = joint_state();
        let mut rng = rng_derive(11, 0);
        let mut seen = [false; 4];
        while !seen.iter().all(|&s| s) {
            let r = measure_bell(&j, &sub(&[2, 3]), &mut rng).unwrap();
            seen[r.index] = true;
            let rho14 = density_from_pure(&r.post_state)
                .partial_trace(&sub(&[1, 4]))
                .unwrap();
            let want = density_from_pure(&bell_state(r.outcome));
            assert!(rho14.max_abs_diff(&want) < 1e-12, "{:?}", r.outcome);
        }
    }

    #[test]
    fn eigenstate_pair_gives_certain_outcome() {
        let mut rng = rng_derive(1, 2);
        let r = measure_bell(&bell_state(BellOutcome::PsiPlus), &sub(&[1, 2]), &mut rng).unwrap();
        assert_eq!(r.outcome, BellOutcome::PsiPlus);
        assert!((r.probability - 1.0).abs() < 1e-15);
        assert!(measure_bell(&joint_state(), &sub(&[1]), &mut rng).is_err());
    }

    #[test]
    fn spin_basis_diagonalizes_spin_operator() {
        for (p, a) in [
            (0.0, 0.0),
            (0.3, 1.1),
            (2.0, -2.5),
            (std::f64::consts::PI, 0.0),
        ] {
            let d = Direction::from_angles(p, a);
            let op = crate::operator::spin_operator(d);
            let [up, down] = spin_basis(d);
            assert!((op.expectation(&up).unwrap().re - 1.0).abs() < 1e-12);
            assert!((op.expectation(&down).unwrap().re + 1.0).abs() < 1e-12);
            assert!(up.inner(&down).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn singlet_spins_are_anticorrelated() {
        let mut rng = rng_derive(5, 0);
        for _ in 0..50 {
            let a = measure_spin(&singlet(), 1, Direction::z(), &mut rng).unwrap();
            let b = measure_spin(&a.post_state, 2, Direction::z(), &mut rng).unwrap();
            assert_eq!(a.outcome, -b.outcome);
            assert!((b.probability - 1.0).abs() < 1e-12);
        }
        let zero = StateVector::from_bits("0").unwrap();
        let r = measure_spin(&zero, 1, Direction::z(), &mut rng).unwrap();
        assert_eq!((r.outcome, r.probability), (1, 1.0));
    }

    #[test]
    fn singlet_plus_plus_probability() {
        // Oracle: (1/2)·sin²(θ/2) for spin-up on qubit 1 along z and qubit 2 along θ.
        for theta in [0.0, 0.4, 1.3, 2.9] {
            let [up1, _] = spin_basis(Direction::z());
            let [up2, _] = spin_basis(Direction::in_xz_plane(theta));
            let p_first = outcome_probability(&singlet(), &sub(&[1]), &up1).unwrap();
            let rel = relative_state(&singlet(), &sub(&[1]), &up1).unwrap();
            let p_second =
                born_probabilities(&rel, &sub(&[1]), &spin_basis(Direction::in_xz_plane(theta)))
                    .unwrap()[0];
            let joint = p_first * p_second;
            let want = 0.5 * (theta / 2.0).sin().powi(2);
            assert!((joint - want).abs() < 1e-12, "θ={theta}: {joint} vs {want}");
            let both = up1.tensor(&up2);
            let direct = outcome_probability(&singlet(), &sub(&[1, 2]), &both).unwrap();
            assert!((direct - want).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_state_of_product_is_first_factor() {
        let psi = StateVector::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let prod = psi.tensor(
            &StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap(),
        );
        for b in StateVector::computational_basis(1) {
            let rel = relative_state(&prod, &sub(&[2]), &b).unwrap();
            assert!((fidelity(&rel, &psi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_state_psi_minus() {
        let rel = relative_state(&joint_state(), &sub(&[2, 3]), &singlet()).unwrap();
        assert!((fidelity(&rel, &singlet()) - 1.0).abs() < 1e-12);
        let rel = relative_state(
            &joint_state(),
            &sub(&[2, 3]),
            &StateVector::from_bits("00").unwrap(),
        )
        .unwrap();
        assert!((fidelity(&rel, &StateVector::from_bits("11").unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_is_reproducible() {
        let j = joint_state();
        let a = measure_bell(&j, &sub(&[2, 3]), &mut rng_derive(8, 8)).unwrap();
        let b = measure_bell(&j, &sub(&[2, 3]), &mut rng_derive(8, 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn post_state_matches_projector() {
        // P = |b><b| ⊗ I applied directly as a 16x16 matrix after permuting (2,3) to the front.
        let j = joint_state();
        let front = j.permute(&sub(&[2, 3, 1, 4])).unwrap();
        let b = bell_state(BellOutcome::PhiMinus);
        let proj = Operator::outer(b.amplitudes(), b.amplitudes()).kron(&Operator::identity(4));
        let direct = StateVector::normalized(proj.mul_vec(front.amplitudes())).unwrap();
        let rel = relative_state(&j, &sub(&[2, 3]), &b).unwrap();
        let embedded = b.tensor(&rel);
        assert!((fidelity(&direct, &embedded) - 1.0).abs() < 1e-12);
    }
}
