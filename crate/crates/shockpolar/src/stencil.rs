//! Vertex-centred finite volumes for `div(A grad p) = 0` on a rectangle.
//!
//! Nodes sit on a uniform `nx x ny` lattice, indexed `j * nx + i`. Boundary
//! nodes own half (or quarter) cells. Every side is zero-flux unless a node
//! carries a Dirichlet value. The diagonal entries of `A` enter a five-point
//! matrix; the mixed entry `a12` is lagged and only appears in the residual,
//! so the matrix stays symmetric and, for `a11, a22 > 0`, an M-matrix.
//!
//! Systems are assembled in correction form: given the current iterate `p`,
//! [`LinearSystem::solve`] returns `p + delta`. A field annihilated by the
//! full operator is reproduced exactly.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error("field has {got} entries, grid needs {expected}")]
    Shape { expected: usize, got: usize },
    #[error("row {row} violates the M-matrix sign pattern (diag {diag}, off-diagonal sum {off})")]
    NotMMatrix { row: usize, diag: f64, off: f64 },
    #[error("no Dirichlet node: the pure Neumann problem is singular")]
    NoDirichlet,
    #[error("Cholesky factorization failed: {0}")]
    Singular(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Spacing in the first coordinate.
    pub hs: f64,
    /// Spacing in the second coordinate.
    pub heta: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        Self {
            nx,
            ny,
            hs: lx / (nx - 1) as f64,
            heta: ly / (ny - 1) as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn cell_width(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx - 1 {
            0.5 * self.hs
        } else {
            self.hs
        }
    }

    fn cell_height(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny - 1 {
            0.5 * self.heta
        } else {
            self.heta
        }
    }

    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        self.cell_width(i) * self.cell_height(j)
    }

    /// Derivative along the first coordinate; second-order one-sided at the ends.
    pub fn d_s(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let at = |k: usize| f[self.idx(k, j)];
        let n = self.nx;
        if i == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * self.hs)
        } else if i == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * self.hs)
        } else {
            (at(i + 1) - at(i - 1)) / (2.0 * self.hs)
        }
    }

    /// Derivative along the second coordinate; second-order one-sided at the ends.
    pub fn d_eta(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let at = |k: usize| f[self.idx(i, k)];
        let n = self.ny;
        if j == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * self.heta)
        } else if j == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * self.heta)
        } else {
            (at(j + 1) - at(j - 1)) / (2.0 * self.heta)
        }
    }
}

/// Nodal values of the symmetric coefficient tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub a11: Vec<f64>,
    pub a12: Vec<f64>,
    pub a22: Vec<f64>,
}

impl CoefficientField {
    pub fn constant(grid: &Grid, a11: f64, a12: f64, a22: f64) -> Self {
        let n = grid.len();
        Self {
            a11: vec![a11; n],
            a12: vec![a12; n],
            a22: vec![a22; n],
        }
    }

    fn check(&self, grid: &Grid) -> Result<(), StencilError> {
        for v in [&self.a11, &self.a12, &self.a22] {
            if v.len() != grid.len() {
                return Err(StencilError::Shape {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

fn face(a: &[f64], k: usize, l: usize) -> f64 {
    0.5 * (a[k] + a[l])
}

/// Net outward flux of `A grad p` through each node's control volume.
///
/// Zero for every node when `p` is a discrete solution.
pub fn apply_operator(grid: &Grid, coeffs: &CoefficientField, p: &[f64]) -> Result<Vec<f64>, StencilError> {
    coeffs.check(grid)?;
    if p.len() != grid.len() {
        return Err(StencilError::Shape {
            expected: grid.len(),
            got: p.len(),
        });
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let idx = |i, j| grid.idx(i, j);

    // Flux across the face between (i, j) and (i + 1, j).
    let flux_s = |i: usize, j: usize| {
        let (k, l) = (idx(i, j), idx(i + 1, j));
        let p_eta = 0.5 * (grid.d_eta(p, i, j) + grid.d_eta(p, i + 1, j));
        face(&coeffs.a11, k, l) * (p[l] - p[k]) / grid.hs + face(&coeffs.a12, k, l) * p_eta
    };
    // Flux across the face between (i, j) and (i, j + 1).
    let flux_eta = |i: usize, j: usize| {
        let (k, l) = (idx(i, j), idx(i, j + 1));
        let p_s = 0.5 * (grid.d_s(p, i, j) + grid.d_s(p, i, j + 1));
        face(&coeffs.a22, k, l) * (p[l] - p[k]) / grid.heta + face(&coeffs.a12, k, l) * p_s
    };

    let mut out = vec![0.0; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let east = if i + 1 < nx { flux_s(i, j) } else { 0.0 };
            let west = if i > 0 { flux_s(i - 1, j) } else { 0.0 };
            let north = if j + 1 < ny { flux_eta(i, j) } else { 0.0 };
            let south = if j > 0 { flux_eta(i, j - 1) } else { 0.0 };
            out[idx(i, j)] = (east - west) * grid.cell_height(j) + (north - south) * grid.cell_width(i);
        }
    }
    Ok(out)
}

/// Symmetric positive definite correction system `K delta = rhs`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CscMatrix<f64>,
    pub rhs: Vec<f64>,
    /// Node index of each unknown.
    pub unknowns: Vec<usize>,
    /// Current iterate with the new Dirichlet values already in place.
    base: Vec<f64>,
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.unknowns.len()
    }

    /// Returns the new nodal field.
    pub fn solve(&self) -> Result<Vec<f64>, StencilError> {
        let mut out = self.base.clone();
        if self.unknowns.is_empty() {
            return Ok(out);
        }
        let chol = CscCholesky::factor(&self.matrix).map_err(|e| StencilError::Singular(format!("{e:?}")))?;
        let b = DMatrix::from_column_slice(self.rhs.len(), 1, &self.rhs);
        let delta = chol.solve(&b);
        for (k, &node) in self.unknowns.iter().enumerate() {
            out[node] += delta[(k, 0)];
        }
        Ok(out)
    }
}

/// Assembles the correction system about `p` with Dirichlet data `dirichlet`.
///
/// Every assembled row is checked for the M-matrix sign pattern and weak
/// diagonal dominance.
pub fn assemble_linear_system(
    grid: &Grid,
    coeffs: &CoefficientField,
    p: &[f64],
    dirichlet: &[Option<f64>],
) -> Result<LinearSystem, StencilError> {
    if dirichlet.len() != grid.len() {
        return Err(StencilError::Shape {
            expected: grid.len(),
            got: dirichlet.len(),
        });
    }
    if dirichlet.iter().all(Option::is_none) {
        return Err(StencilError::NoDirichlet);
    }
    let residual = apply_operator(grid, coeffs, p)?;

    let (nx, ny) = (grid.nx, grid.ny);
    let mut slot = vec![usize::MAX; grid.len()];
    let mut unknowns = Vec::new();
    for (node, bc) in dirichlet.iter().enumerate() {
        if bc.is_none() {
            slot[node] = unknowns.len();
            unknowns.push(node);
        }
    }
    let mut base = p.to_vec();
    for (node, bc) in dirichlet.iter().enumerate() {
        if let Some(v) = bc {
            base[node] = *v;
        }
    }

    let n = unknowns.len();
    let mut coo = CooMatrix::new(n, n);
    let mut rhs = vec![0.0; n];
    for (row, &node) in unknowns.iter().enumerate() {
        let (i, j) = (node % nx, node / nx);
        let mut neighbours: Vec<(usize, f64)> = Vec::with_capacity(4);
        if i + 1 < nx {
            let l = grid.idx(i + 1, j);
            neighbours.push((l, face(&coeffs.a11, node, l) * grid.cell_height(j) / grid.hs));
        }
        if i > 0 {
            let l = grid.idx(i - 1, j);
            neighbours.push((l, face(&coeffs.a11, node, l) * grid.cell_height(j) / grid.hs));
        }
        if j + 1 < ny {
            let l = grid.idx(i, j + 1);
            neighbours.push((l, face(&coeffs.a22, node, l) * grid.cell_width(i) / grid.heta));
        }
        if j > 0 {
            let l = grid.idx(i, j - 1);
            neighbours.push((l, face(&coeffs.a22, node, l) * grid.cell_width(i) / grid.heta));
        }

        let diag: f64 = neighbours.iter().map(|(_, c)| c).sum();
        let mut off_sum = 0.0;
        rhs[row] = residual[node];
        for &(l, c) in &neighbours {
            if !(c > 0.0) {
                return Err(StencilError::NotMMatrix { row, diag, off: -c });
            }
            off_sum += c;
            match dirichlet[l] {
                Some(v) => rhs[row] += c * (v - p[l]),
                None => coo.push(row, slot[l], -c),
            }
        }
        if !(diag > 0.0) || diag < off_sum * (1.0 - 1e-12) {
            return Err(StencilError::NotMMatrix {
                row,
                diag,
                off: off_sum,
            });
        }
        coo.push(row, row, diag);
    }

    Ok(LinearSystem {
        matrix: CscMatrix::from(&coo),
        rhs,
        unknowns,
        base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ends_dirichlet(grid: &Grid, left: f64, right: f64) -> Vec<Option<f64>> {
        (0..grid.len())
            .map(|k| match k % grid.nx {
                0 => Some(left),
                i if i == grid.nx - 1 => Some(right),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn single_dirichlet_node_gives_constant() {
        let grid = Grid::new(9, 7, 1.0, 2.0);
        let coeffs = CoefficientField::constant(&grid, 1.3, 0.0, 0.7);
        let mut bc = vec![None; grid.len()];
        bc[grid.idx(4, 3)] = Some(2.5);
        let p0: Vec<f64> = (0..grid.len()).map(|k| (k as f64).sin()).collect();
        let p = assemble_linear_system(&grid, &coeffs, &p0, &bc)
            .unwrap()
            .solve()
            .unwrap();
        assert!(p.iter().all(|x| (x - 2.5).abs() < 1e-12));
    }

    #[test]
    fn linear_profile_is_reproduced() {
        let grid = Grid::new(11, 9, 2.0, 1.0);
        let coeffs = CoefficientField::constant(&grid, 0.8, 0.0, 2.0);
        // p = x on [-1, 1]
        let bc = ends_dirichlet(&grid, -1.0, 1.0);
        let p = assemble_linear_system(&grid, &coeffs, &vec![0.0; grid.len()], &bc)
            .unwrap()
            .solve()
            .unwrap();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let x = -1.0 + i as f64 * grid.hs;
                assert!((p[grid.idx(i, j)] - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_field_is_annihilated() {
        let grid = Grid::new(8, 8, 1.0, 1.0);
        let n = grid.len();
        let coeffs = CoefficientField {
            a11: (0..n).map(|k| 1.0 + 0.1 * (k as f64).cos()).collect(),
            a12: (0..n).map(|k| 0.2 * (k as f64).sin()).collect(),
            a22: vec![0.9; n],
        };
        let p = vec![4.5; n];
        assert!(apply_operator(&grid, &coeffs, &p).unwrap().iter().all(|r| *r == 0.0));
        let bc = ends_dirichlet(&grid, 4.5, 4.5);
        let out = assemble_linear_system(&grid, &coeffs, &p, &bc)
            .unwrap()
            .solve()
            .unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn rejects_negative_coefficients_and_pure_neumann() {
        let grid = Grid::new(8, 8, 1.0, 1.0);
        let bad = CoefficientField::constant(&grid, -1.0, 0.0, 1.0);
        let bc = ends_dirichlet(&grid, 0.0, 1.0);
        let p = vec![0.0; grid.len()];
        assert!(matches!(
            assemble_linear_system(&grid, &bad, &p, &bc),
            Err(StencilError::NotMMatrix { .. })
        ));
        let good = CoefficientField::constant(&grid, 1.0, 0.0, 1.0);
        assert!(matches!(
            assemble_linear_system(&grid, &good, &p, &vec![None; grid.len()]),
            Err(StencilError::NoDirichlet)
        ));
    }

    #[test]
    fn one_sided_derivatives_are_exact_for_quadratics() {
        let grid = Grid::new(6, 5, 1.0, 1.0);
        let f: Vec<f64> = (0..grid.len())
            .map(|k| {
                let (i, j) = ((k % grid.nx) as f64 * grid.hs, (k / grid.nx) as f64 * grid.heta);
                i * i + 3.0 * j * j
            })
            .collect();
        for (i, j) in [(0, 0), (5, 4), (2, 2)] {
            let (x, y) = (i as f64 * grid.hs, j as f64 * grid.heta);
            assert!((grid.d_s(&f, i, j) - 2.0 * x).abs() < 1e-12);
            assert!((grid.d_eta(&f, i, j) - 6.0 * y).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn discrete_maximum_principle(
            left in -2.0f64..2.0, right in -2.0f64..2.0,
            a11 in 0.1f64..5.0, a22 in 0.1f64..5.0, wobble in 0.0f64..0.9,
        ) {
            let grid = Grid::new(10, 8, 1.0, 1.0);
            let n = grid.len();
            let coeffs = CoefficientField {
                a11: (0..n).map(|k| a11 * (1.0 + wobble * (k as f64 * 0.7).sin())).collect(),
                a12: vec![0.0; n],
                a22: (0..n).map(|k| a22 * (1.0 + wobble * (k as f64 * 1.3).cos())).collect(),
            };
            let bc = ends_dirichlet(&grid, left, right);
            let p = assemble_linear_system(&grid, &coeffs, &vec![0.0; n], &bc).unwrap().solve().unwrap();
            let (lo, hi) = (left.min(right), left.max(right));
            prop_assert!(p.iter().all(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12));
        }
    }
}
