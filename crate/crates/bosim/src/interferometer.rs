//! Unitary transfer matrices for the photonic network: Haar-random draws,
//! the square mesh of 2x2 mixer cells, and its exact decomposition.
//!
//! Cell convention, fixed once and shared by compose and decompose: a cell
//! with angles (theta, phi) acting on the adjacent mode pair (p, p+1) applies
//!
//! ```text
//! T(theta, phi) = [ e^{i phi} cos(theta)   -sin(theta) ]
//!                 [ e^{i phi} sin(theta)    cos(theta) ]
//! ```
//!
//! The composed network is D * T_last * ... * T_first, cells ordered by layer
//! (input passes layer 0 first), with D the diagonal of output phases.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub const MIN_MODES: usize = 2;
pub const MAX_MODES: usize = 32;

/// Default bound on ||U^dag U - I||_max.
pub const DEFAULT_UNITARITY_TOLERANCE: f64 = 1e-9;

/// A validated unitary transfer matrix.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if !matrix.all_finite() {
            return Err(Error::NonFinite);
        }
        let residual = matrix.unitarity_residual();
        if residual > tolerance {
            return Err(Error::NotUnitary { residual, tolerance });
        }
        Ok(Self { matrix, tolerance })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, DEFAULT_UNITARITY_TOLERANCE)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }
}

/// One mixer cell of the square mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshCell {
    pub layer: usize,
    pub pos: usize,
    pub theta: f64,
    pub phi: f64,
}

/// Square mesh of m(m-1)/2 cells plus output phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub m: usize,
    pub cells: Vec<MeshCell>,
    pub output_phases: Vec<f64>,
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < MIN_MODES {
            return Err(Error::ModeCount {
                m: self.m,
                min: MIN_MODES,
                max: MAX_MODES,
            });
        }
        if self.output_phases.len() != self.m {
            return Err(Error::MalformedMesh(format!(
                "expected {} output phases, got {}",
                self.m,
                self.output_phases.len()
            )));
        }
        for c in &self.cells {
            if c.pos + 1 >= self.m {
                return Err(Error::MalformedMesh(format!(
                    "cell at layer {} addresses modes ({}, {}) beyond m={}",
                    c.layer,
                    c.pos,
                    c.pos + 1,
                    self.m
                )));
            }
        }
        // cells within one layer must touch disjoint mode pairs
        let mut by_layer: Vec<(usize, usize)> = self.cells.iter().map(|c| (c.layer, c.pos)).collect();
        by_layer.sort_unstable();
        for w in by_layer.windows(2) {
            if w[0].0 == w[1].0 && w[1].1 <= w[0].1 + 1 {
                return Err(Error::MalformedMesh(format!(
                    "overlapping cells in layer {}: positions {} and {}",
                    w[0].0, w[0].1, w[1].1
                )));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

fn complex_normal(rng: &mut ChaCha12Rng) -> Complex64 {
    // Box-Muller in polar form; 1 - u keeps the log argument in (0, 1].
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let r = (-(1.0 - u).ln()).sqrt();
    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * v)
}

/// Haar-distributed m x m unitary: complex Ginibre draw followed by
/// Gram-Schmidt QR with the R diagonal normalized real-positive.
pub fn haar_random(m: usize, seed: u64) -> Result<UnitaryMatrix> {
    if !(MIN_MODES..=MAX_MODES).contains(&m) {
        return Err(Error::ModeCount {
            m,
            min: MIN_MODES,
            max: MAX_MODES,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(m, m, |_, _| complex_normal(&mut rng));

    // Modified Gram-Schmidt on columns, with a second orthogonalization pass.
    let mut q: Vec<Vec<Complex64>> = (0..m)
        .map(|j| (0..m).map(|i| g.get(i, j)).collect())
        .collect();
    for j in 0..m {
        let (head, tail) = q.split_at_mut(j);
        let col = &mut tail[0];
        for _ in 0..2 {
            for prev in head.iter() {
                let proj: Complex64 = prev
                    .iter()
                    .zip(col.iter())
                    .map(|(p, c)| p.conj() * c)
                    .sum();
                for (c, p) in col.iter_mut().zip(prev.iter()) {
                    *c -= proj * p;
                }
            }
        }
        let norm: f64 = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in col.iter_mut() {
            *c /= norm;
        }
    }
    let u = ComplexMatrix::from_fn(m, m, |i, j| q[j][i]);
    UnitaryMatrix::from_matrix(u)
}

fn cell_matrix(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let c = theta.cos();
    let s = theta.sin();
    let e = Complex64::from_polar(1.0, phi);
    [
        [e * c, Complex64::new(-s, 0.0)],
        [e * s, Complex64::new(c, 0.0)],
    ]
}

/// Left-multiply `v` in place by the cell embedding on rows (p, p+1).
fn apply_cell_left(v: &mut ComplexMatrix, p: usize, theta: f64, phi: f64) {
    let t = cell_matrix(theta, phi);
    for j in 0..v.cols() {
        let a = v.get(p, j);
        let b = v.get(p + 1, j);
        v.set(p, j, t[0][0] * a + t[0][1] * b);
        v.set(p + 1, j, t[1][0] * a + t[1][1] * b);
    }
}

/// Right-multiply `v` in place by T^dag on columns (p, p+1).
fn apply_cell_dagger_right(v: &mut ComplexMatrix, p: usize, theta: f64, phi: f64) {
    let t = cell_matrix(theta, phi);
    // (V T^dag)[:, p]   = conj(t00) V[:, p] + conj(t01) V[:, p+1]
    // (V T^dag)[:, p+1] = conj(t10) V[:, p] + conj(t11) V[:, p+1]
    for i in 0..v.rows() {
        let a = v.get(i, p);
        let b = v.get(i, p + 1);
        v.set(i, p, t[0][0].conj() * a + t[0][1].conj() * b);
        v.set(i, p + 1, t[1][0].conj() * a + t[1][1].conj() * b);
    }
}

/// Multiply the cells (grouped by layer, ascending) and the output phase
/// diagonal into the full m x m transfer matrix.
pub fn compose_mesh(spec: &MeshSpec) -> Result<UnitaryMatrix> {
    spec.validate()?;
    let mut order: Vec<&MeshCell> = spec.cells.iter().collect();
    order.sort_by_key(|c| (c.layer, c.pos));
    let mut u = ComplexMatrix::identity(spec.m);
    for cell in order {
        apply_cell_left(&mut u, cell.pos, cell.theta, cell.phi);
    }
    for (i, &phase) in spec.output_phases.iter().enumerate() {
        let e = Complex64::from_polar(1.0, phase);
        for j in 0..spec.m {
            let v = u.get(i, j) * e;
            u.set(i, j, v);
        }
    }
    UnitaryMatrix::from_matrix(u)
}

/// Greedy earliest-layer scheduler: assigns each cell (in application order)
/// the first layer where both of its modes are free.
fn schedule_layers(m: usize, seq: &[(usize, f64, f64)]) -> Vec<MeshCell> {
    let mut busy = vec![0usize; m];
    let mut cells = Vec::with_capacity(seq.len());
    for &(p, theta, phi) in seq {
        let layer = busy[p].max(busy[p + 1]);
        busy[p] = layer + 1;
        busy[p + 1] = layer + 1;
        cells.push(MeshCell { layer, pos: p, theta, phi });
    }
    cells.sort_by_key(|c| (c.layer, c.pos));
    cells
}

/// Decompose a unitary into a square mesh such that
/// `compose_mesh(decompose_mesh(u))` reproduces it to high precision.
pub fn decompose_mesh(u: &UnitaryMatrix) -> Result<MeshSpec> {
    let m = u.dim();
    if m < MIN_MODES {
        return Err(Error::ModeCount {
            m,
            min: MIN_MODES,
            max: MAX_MODES,
        });
    }
    let mut v = u.matrix().clone();
    // Right ops in application order; left ops in nulling order.
    let mut right_ops: Vec<(usize, f64, f64)> = Vec::new();
    let mut left_ops: Vec<(usize, f64, f64)> = Vec::new();

    for d in 0..m - 1 {
        if d % 2 == 0 {
            // Null (m-1-j, d-j) with a right-side T^dag on columns (d-j, d-j+1).
            for j in 0..=d {
                let r = m - 1 - j;
                let p = d - j;
                let a = v.get(r, p);
                let b = v.get(r, p + 1);
                let theta = a.norm().atan2(b.norm());
                let phi = if a.norm() < f64::EPSILON || b.norm() < f64::EPSILON {
                    0.0
                } else {
                    a.arg() - b.arg()
                };
                apply_cell_dagger_right(&mut v, p, theta, phi);
                right_ops.push((p, theta, phi));
            }
        } else {
            // Null (m-1-d+j, j) with a left-side T on rows (m-2-d+j, m-1-d+j).
            for j in 0..=d {
                let r = m - 1 - d + j;
                let p = r - 1;
                let a = v.get(p, j);
                let b = v.get(r, j);
                let theta = b.norm().atan2(a.norm());
                let phi = if a.norm() < f64::EPSILON || b.norm() < f64::EPSILON {
                    0.0
                } else {
                    (-b).arg() - a.arg()
                };
                apply_cell_left(&mut v, p, theta, phi);
                left_ops.push((p, theta, phi));
            }
        }
    }

    // v is now diagonal: L_Q..L_1 U Tdag_1..Tdag_P = D, so
    // U = Tdag(L_1)..Tdag(L_Q) D T(R_P)..T(R_1). Commute D leftwards through
    // each Tdag(L): Tdag(theta, phi) D = D' T(theta, phi') with
    //   phi'      = arg(-d_p / d_{p+1})
    //   d'_p      = -e^{-i phi} d_{p+1}
    //   d'_{p+1}  = d_{p+1}
    let mut diag: Vec<Complex64> = (0..m).map(|i| v.get(i, i)).collect();
    let mut commuted: Vec<(usize, f64, f64)> = Vec::with_capacity(left_ops.len());
    for &(p, theta, phi) in left_ops.iter().rev() {
        let d1 = diag[p];
        let d2 = diag[p + 1];
        let phi_new = (-d1 / d2).arg();
        diag[p] = -Complex64::from_polar(1.0, -phi) * d2;
        commuted.push((p, theta, phi_new));
    }
    // Application order: right ops first, then the commuted left ops
    // (innermost first, i.e. the order they were produced above).
    let mut seq = right_ops;
    seq.extend(commuted);

    let spec = MeshSpec {
        m,
        cells: schedule_layers(m, &seq),
        output_phases: diag.iter().map(|d| d.arg()).collect(),
    };
    debug_assert_eq!(spec.cell_count(), m * (m - 1) / 2);
    Ok(spec)
}

pub fn write_mesh(path: &Path, spec: &MeshSpec) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(spec)?)?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<MeshSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec: MeshSpec = serde_json::from_str(&text)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary_and_deterministic() {
        let u = haar_random(16, 7).unwrap();
        assert!(u.residual() <= 1e-9);
        let v = haar_random(16, 7).unwrap();
        assert_eq!(u.matrix(), v.matrix());
        let w = haar_random(16, 8).unwrap();
        assert!(u.matrix().max_abs_diff(w.matrix()) > 1e-3);
    }

    #[test]
    fn haar_two_modes_det_modulus() {
        let u = haar_random(2, 123).unwrap();
        let det = u.matrix().get(0, 0) * u.matrix().get(1, 1)
            - u.matrix().get(0, 1) * u.matrix().get(1, 0);
        assert!((det.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn haar_rejects_out_of_range() {
        assert!(haar_random(1, 0).is_err());
        assert!(haar_random(33, 0).is_err());
    }

    #[test]
    fn haar_moment_matches_one_over_m() {
        // E |U_00|^2 = 1/m for Haar; Monte Carlo over 1000 draws at m = 3.
        let mean: f64 = (0..1000)
            .map(|seed| haar_random(3, seed).unwrap().matrix().get(0, 0).norm_sqr())
            .sum::<f64>()
            / 1000.0;
        assert!(
            (mean - 1.0 / 3.0).abs() < 0.02,
            "Haar moment off: {mean} vs 1/3"
        );
    }

    #[test]
    fn compose_identity_mesh() {
        let m = 4;
        let cells = decompose_mesh(&UnitaryMatrix::from_matrix(ComplexMatrix::identity(m)).unwrap())
            .unwrap();
        for c in &cells.cells {
            assert!(
                c.theta.sin().abs() < 1e-12,
                "identity decomposition should have theta = 0 mod pi, got {}",
                c.theta
            );
        }
        let back = compose_mesh(&cells).unwrap();
        assert!(back.matrix().max_abs_diff(&ComplexMatrix::identity(m)) < 1e-8);
    }

    #[test]
    fn balanced_beamsplitter_cell() {
        let spec = MeshSpec {
            m: 2,
            cells: vec![MeshCell {
                layer: 0,
                pos: 0,
                theta: std::f64::consts::FRAC_PI_4,
                phi: 0.0,
            }],
            output_phases: vec![0.0, 0.0],
        };
        let u = compose_mesh(&spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((u.matrix().get(i, j).norm_sqr() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mesh_roundtrip_small() {
        for m in 2..=8 {
            let u = haar_random(m, m as u64).unwrap();
            let spec = decompose_mesh(&u).unwrap();
            assert_eq!(spec.cell_count(), m * (m - 1) / 2);
            let back = compose_mesh(&spec).unwrap();
            let err = back.matrix().max_abs_diff(u.matrix());
            assert!(err <= 1e-8, "roundtrip error {err} at m={m}");
        }
    }

    #[test]
    fn mesh_cell_count_16() {
        let u = haar_random(16, 2).unwrap();
        let spec = decompose_mesh(&u).unwrap();
        assert_eq!(spec.cell_count(), 120);
    }

    #[test]
    fn decompose_rejects_nonunitary() {
        let mut m = ComplexMatrix::identity(3);
        m.set(0, 0, Complex64::new(1.5, 0.0));
        assert!(UnitaryMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn mesh_file_roundtrip() {
        let u = haar_random(5, 99).unwrap();
        let spec = decompose_mesh(&u).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.json");
        write_mesh(&path, &spec).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn malformed_mesh_rejected() {
        let spec = MeshSpec {
            m: 4,
            cells: vec![
                MeshCell { layer: 0, pos: 0, theta: 0.1, phi: 0.0 },
                MeshCell { layer: 0, pos: 1, theta: 0.1, phi: 0.0 },
            ],
            output_phases: vec![0.0; 4],
        };
        assert!(compose_mesh(&spec).is_err());
    }
}
