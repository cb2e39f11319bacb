use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OptError;

/// Largest model [`brute_force`] will enumerate.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// `minimize offset + sum_{i<=j} Q_ij x_i x_j` over `x in {0,1}^n`.
///
/// Coefficients are stored upper-triangular; the diagonal holds the linear
/// terms since `x_i^2 = x_i`. `offset` carries constants produced by
/// encodings such as the TSP penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    n: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// A binary assignment with its energy under the model that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub bits: Vec<u8>,
    pub energy: f64,
}

impl Assignment {
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    /// `sum x_i 2^i`, the tie-break order used by [`brute_force`].
    pub fn value(&self) -> u64 {
        bits_value(&self.bits)
    }
}

fn bits_value(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| u64::from(b) << i)
        .sum()
}

#[derive(Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    terms: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "is_zero")]
    offset: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl QuboModel {
    pub fn new(n: usize) -> Self {
        QuboModel {
            n,
            coeffs: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    /// Accumulate `c` onto the `(i, j)` coefficient; order of `i, j` is free.
    pub fn add(&mut self, i: usize, j: usize, c: f64) -> Result<(), OptError> {
        let (i, j) = (i.min(j), i.max(j));
        if j >= self.n {
            return Err(OptError::IndexOutOfRange { index: j, n: self.n });
        }
        if !c.is_finite() {
            return Err(OptError::InvalidModel("non-finite coefficient".into()));
        }
        *self.coeffs.entry((i, j)).or_insert(0.0) += c;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Non-zero upper-triangular terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(&(i, j), &c)| (i, j, c))
    }

    /// `offset + sum_{i<=j} Q_ij x_i x_j`.
    pub fn evaluate(&self, bits: &[u8]) -> Result<f64, OptError> {
        if bits.len() != self.n {
            return Err(OptError::LengthMismatch {
                expected: self.n,
                got: bits.len(),
            });
        }
        Ok(self.offset
            + self
                .coeffs
                .iter()
                .filter(|(&(i, j), _)| bits[i] == 1 && bits[j] == 1)
                .map(|(_, &c)| c)
                .sum::<f64>())
    }

    pub fn assignment(&self, bits: Vec<u8>) -> Result<Assignment, OptError> {
        let energy = self.evaluate(&bits)?;
        Ok(Assignment { bits, energy })
    }

    pub(crate) fn dense(&self) -> DenseQubo {
        DenseQubo::new(self)
    }

    pub fn to_json(&self) -> String {
        let file = QuboFile {
            n: self.n,
            terms: self.terms().collect(),
            offset: self.offset,
        };
        serde_json::to_string(&file).expect("qubo serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, OptError> {
        let file: QuboFile =
            serde_json::from_str(text).map_err(|e| OptError::InvalidModel(e.to_string()))?;
        let mut model = QuboModel::new(file.n);
        for (i, j, c) in file.terms {
            model.add(i, j, c)?;
        }
        model.offset = file.offset;
        Ok(model)
    }
}

/// Row-major symmetric coupling matrix plus diagonal, for local-field
/// updates: flipping `x_i` changes the energy by `(1 - 2 x_i) * field_i`
/// with `field_i = Q_ii + sum_{j != i} Q_ij x_j`.
pub(crate) struct DenseQubo {
    pub n: usize,
    pub diag: Vec<f64>,
    pub coupling: Vec<f64>,
}

impl DenseQubo {
    fn new(model: &QuboModel) -> Self {
        let n = model.n;
        let mut diag = vec![0.0; n];
        let mut coupling = vec![0.0; n * n];
        for (&(i, j), &c) in &model.coeffs {
            if i == j {
                diag[i] += c;
            } else {
                coupling[i * n + j] += c;
                coupling[j * n + i] += c;
            }
        }
        DenseQubo { n, diag, coupling }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.n..(i + 1) * self.n]
    }

    pub fn fields(&self, bits: &[u8]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.diag[i]
                    + self
                        .row(i)
                        .iter()
                        .zip(bits)
                        .filter(|(_, &b)| b == 1)
                        .map(|(c, _)| c)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Flip bit `i`, updating the local fields; returns the energy change.
    pub fn flip(&self, bits: &mut [u8], fields: &mut [f64], i: usize) -> f64 {
        let delta = if bits[i] == 0 { fields[i] } else { -fields[i] };
        let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
        bits[i] ^= 1;
        for (f, c) in fields.iter_mut().zip(self.row(i)) {
            *f += sign * c;
        }
        delta
    }
}

/// Exhaustive minimization. Ties go to the lowest `sum x_i 2^i`.
///
/// Walks the hypercube in Gray-code order with local-field updates, so each
/// step costs `O(n)`.
pub fn brute_force(model: &QuboModel) -> Result<Assignment, OptError> {
    let n = model.n;
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(OptError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_VARS,
        });
    }
    let dense = model.dense();
    let scale: f64 = 1.0 + model.coeffs.values().map(|c| c.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    let mut bits = vec![0u8; n];
    let mut fields = dense.fields(&bits);
    let mut energy = model.offset;
    let mut best = (energy, 0u64);
    let mut value = 0u64;
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        energy += dense.flip(&mut bits, &mut fields, i);
        value ^= 1 << i;
        if energy < best.0 - tol || (energy <= best.0 + tol && value < best.1) {
            best = (energy, value);
        }
    }
    let bits: Vec<u8> = (0..n).map(|i| (best.1 >> i & 1) as u8).collect();
    model.assignment(bits)
}

/// Spin Hamiltonian `offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j`,
/// `s_i in {-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsingModel {
    n: usize,
    h: Vec<f64>,
    j: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        IsingModel {
            n,
            h: vec![0.0; n],
            j: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn add_field(&mut self, i: usize, value: f64) -> Result<(), OptError> {
        if i >= self.n {
            return Err(OptError::IndexOutOfRange { index: i, n: self.n });
        }
        self.h[i] += value;
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<(), OptError> {
        if i == j {
            return Err(OptError::InvalidModel(format!("self-coupling on spin {i}")));
        }
        let (i, j) = (i.min(j), i.max(j));
        if j >= self.n {
            return Err(OptError::IndexOutOfRange { index: j, n: self.n });
        }
        *self.j.entry((i, j)).or_insert(0.0) += value;
        Ok(())
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.j.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Non-zero couplings, `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.j
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64, OptError> {
        if spins.len() != self.n {
            return Err(OptError::LengthMismatch {
                expected: self.n,
                got: spins.len(),
            });
        }
        let s = |i: usize| f64::from(spins[i]);
        let linear: f64 = self.h.iter().enumerate().map(|(i, h)| h * s(i)).sum();
        let quadratic: f64 = self.j.iter().map(|(&(i, j), v)| v * s(i) * s(j)).sum();
        Ok(self.offset + linear + quadratic)
    }
}

/// `s = 2x - 1`.
pub fn spins_from_bits(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect()
}

/// `x = (1 + s) / 2`.
pub fn bits_from_spins(spins: &[i8]) -> Vec<u8> {
    spins.iter().map(|&s| u8::from(s > 0)).collect()
}

/// Substitute `x_i = (1 + s_i) / 2`; energies agree on corresponding
/// assignments, constants land in the offset.
pub fn qubo_to_ising(model: &QuboModel) -> IsingModel {
    let mut ising = IsingModel::new(model.n);
    ising.offset = model.offset;
    for (&(i, j), &c) in &model.coeffs {
        if i == j {
            ising.h[i] += c / 2.0;
            ising.offset += c / 2.0;
        } else {
            let q = c / 4.0;
            ising.offset += q;
            ising.h[i] += q;
            ising.h[j] += q;
            *ising.j.entry((i, j)).or_insert(0.0) += q;
        }
    }
    ising
}
