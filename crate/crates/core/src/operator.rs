//! Dense square operators, density matrices and the spin observables.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;
use crate::subsystem::{split_table, Subsystem};

/// Tolerance for unit-norm direction inputs.
pub const UNIT_TOL: f64 = 1e-9;
/// Hermiticity and unit-trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A `dim × dim` complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        (0..dim).for_each(|i| m.data[i * dim + i] = ONE);
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let data: Vec<C64> = rows.into_iter().flatten().collect();
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "operator entries",
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = C64::new(v, 0.0);
        }
        m
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        let dim = u.len();
        let data = u
            .iter()
            .flat_map(|a| v.iter().map(move |b| a * b.conj()))
            .collect();
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    /// Kronecker product, consistent with [`StateVector::tensor`].
    pub fn kron(&self, other: &Operator) -> Operator {
        let dim = self.dim * other.dim;
        let mut out = Operator::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        out.data[(i * other.dim + k) * dim + j * other.dim + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[j * self.dim + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "operator/vector dimension mismatch");
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨s|A|s⟩`.
    pub fn expectation(&self, s: &StateVector) -> Result<C64> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: s.dim(),
            });
        }
        let av = self.mul_vec(s.amplitudes());
        Ok(s.amplitudes()
            .iter()
            .zip(&av)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Operator {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Operator {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Free-function form of [`Operator::kron`].
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// The Pauli matrix along `axis`.
pub fn pauli(axis: Axis) -> Operator {
    let (a, b, c, d) = match axis {
        Axis::X => (ZERO, ONE, ONE, ZERO),
        Axis::Y => (ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO),
        Axis::Z => (ONE, ZERO, ZERO, -ONE),
    };
    Operator {
        dim: 2,
        data: vec![a, b, c, d],
    }
}

/// A unit 3-vector giving a spin measurement direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitDirection { x, y, z });
        }
        Ok(Self { x, y, z })
    }

    /// Spherical angles in radians: `polar` from +z, `azimuth` from +x.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        Self {
            x: polar.sin() * azimuth.cos(),
            y: polar.sin() * azimuth.sin(),
            z: polar.cos(),
        }
    }

    /// Direction in the x–z plane at `polar` radians from +z toward +x.
    pub fn in_xz_plane(polar: f64) -> Self {
        Self::from_angles(polar, 0.0)
    }

    pub fn z() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            z: 1.0,
        }
    }

    pub fn components(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Polar and azimuthal angles, radians.
    pub fn angles(self) -> (f64, f64) {
        (self.z.clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    fn try_from([x, y, z]: [f64; 3]) -> Result<Self> {
        Direction::new(x, y, z)
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.components()
    }
}

/// `n·σ` for a unit direction `n`.
pub fn spin_operator(direction: Direction) -> Operator {
    let [x, y, z] = direction.components();
    let terms = [(x, Axis::X), (y, Axis::Y), (z, Axis::Z)];
    terms.iter().fold(Operator::zeros(2), |acc, &(w, axis)| {
        &acc + &pauli(axis).scale(C64::new(w, 0.0))
    })
}

/// Validated spin observable: rejects non-unit components.
pub fn spin_operator_checked(x: f64, y: f64, z: f64) -> Result<Operator> {
    Ok(spin_operator(Direction::new(x, y, z)?))
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    op: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(op: Operator) -> Result<Self> {
        if !op.dim.is_power_of_two() || op.dim < 2 {
            return Err(Error::NotDensity {
                reason: format!("dimension {} is not a power of two", op.dim),
            });
        }
        let dev = op.hermitian_deviation();
        if dev > DENSITY_TOL {
            return Err(Error::NotDensity {
                reason: format!("Hermitian deviation {dev:e}"),
            });
        }
        let tr = op.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(Error::NotDensity {
                reason: format!("trace {tr}"),
            });
        }
        let min = crate::eigen::hermitian_eigenvalues(&op, 1e-10)?[0];
        if min < PSD_FLOOR {
            return Err(Error::NotDensity {
                reason: format!("minimum eigenvalue {min:e}"),
            });
        }
        Ok(Self::from_valid(op))
    }

    pub(crate) fn from_valid(op: Operator) -> Self {
        Self {
            num_qubits: op.dim.trailing_zeros() as usize,
            op,
        }
    }

    /// `|s⟩⟨s|`.
    pub fn from_pure(s: &StateVector) -> Self {
        Self::from_valid(Operator::outer(s.amplitudes(), s.amplitudes()))
    }

    /// `I / 2ⁿ`.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self::from_valid(Operator::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    /// `Σ wₖ ρₖ` for nonnegative weights summing to one.
    pub fn mixture(terms: &[(f64, DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::NotDensity {
                reason: "empty mixture".into(),
            });
        };
        let dim = first.op.dim;
        let mut acc = Operator::zeros(dim);
        let mut total = 0.0;
        for (w, rho) in terms {
            if rho.op.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.op.dim,
                });
            }
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::NotDensity {
                    reason: format!("mixture weight {w}"),
                });
            }
            total += w;
            acc = &acc + &rho.op.scale(C64::new(*w, 0.0));
        }
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity {
                reason: format!("mixture weights sum to {total}"),
            });
        }
        Ok(Self::from_valid(acc))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.op.dim
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.op.get(row, col)
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        if a.dim != self.op.dim {
            return Err(Error::DimensionMismatch {
                expected: self.op.dim,
                found: a.dim,
            });
        }
        let n = a.dim;
        Ok((0..n)
            .flat_map(|i| (0..n).map(move |k| (i, k)))
            .map(|(i, k)| self.op.data[i * n + k] * a.data[k * n + i])
            .sum())
    }

    /// Reduced state over `keep`, with its qubits in the listed order.
    pub fn partial_trace(&self, keep: &Subsystem) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        keep.check(n)?;
        let traced = keep.complement(n);
        let table = split_table(keep.labels(), &traced, n);
        let kd = table.len();
        let mut out = Operator::zeros(kd);
        for i in 0..kd {
            for j in 0..kd {
                out.data[i * kd + j] = table[i]
                    .iter()
                    .zip(&table[j])
                    .map(|(&r, &c)| self.op.get(r, c))
                    .sum();
            }
        }
        Ok(Self::from_valid(out))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.op.max_abs_diff(&other.op)
    }
}

/// Free-function form of [`DensityMatrix::from_pure`].
pub fn density_from_pure(s: &StateVector) -> DensityMatrix {
    DensityMatrix::from_pure(s)
}

/// Reduced density matrix over `keep`; `total_qubits` must match `rho`.
pub fn partial_trace(
    rho: &DensityMatrix,
    keep: &Subsystem,
    total_qubits: usize,
) -> Result<DensityMatrix> {
    if rho.num_qubits != total_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << total_qubits,
            found: rho.dim(),
        });
    }
    rho.partial_trace(keep)
}
