//! Polyhedral preference cones and the dominance relations they induce.
//!
//! A preference cone is a closed, convex, pointed and solid polyhedral cone
//! `C = {x : Ax >= 0}` with a unit-norm, full-row-rank half-space matrix `A`.
//! Pointedness forces `ker A = {0}` and solidity admits an interior point, so
//! a valid `A` is square (`L x L`) and invertible: the cone is simplicial and
//! its extreme rays are the normalized columns of `A^-1`. Both representations
//! are stored and kept consistent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default membership tolerance for half-space slacks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Rank-detection cutoff: singular values below this fraction of the largest
/// are treated as zero.
const RANK_TOL: f64 = 1e-9;

/// Dominance flavour for the cone-induced order over arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceMode {
    /// `dominator - dominated` lies in the cone.
    Weak,
    /// Weak, and the two vectors differ.
    Strict,
    /// `dominator - dominated` lies in the interior of the cone.
    Strong,
}

/// Polyhedral preference cone in joint half-space and generator form.
#[derive(Debug, Clone)]
pub struct PreferenceCone {
    /// `L x L` half-space matrix with unit-norm rows; `C = {x : Ax >= 0}`.
    halfspaces: DMatrix<f64>,
    /// `L x L` matrix whose columns are the unit-norm extreme rays.
    generators: DMatrix<f64>,
    dimension: usize,
}

impl PreferenceCone {
    /// Builds a cone from half-space rows. Rows are normalized; the generator
    /// representation is synthesized by extreme-ray enumeration.
    pub fn from_halfspaces(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Construction("no half-space rows supplied".into()));
        }
        let dim = rows[0].len();
        check_dim_bounds(dim)?;
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        if rows.len() < dim {
            return Err(Error::Construction(format!(
                "cone is not pointed: {} half-spaces cannot pin {} dimensions",
                rows.len(),
                dim
            )));
        }
        if rows.len() > dim {
            return Err(Error::Construction(format!(
                "half-space matrix cannot have full row rank: {} rows in dimension {}",
                rows.len(),
                dim
            )));
        }
        let mut a = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        normalize_rows(&mut a)?;
        if matrix_rank(&a) < dim {
            return Err(Error::Construction(
                "half-space matrix is rank deficient".into(),
            ));
        }
        let generators = extreme_rays_from_halfspaces(&a)?;
        let cone = Self {
            halfspaces: a,
            generators,
            dimension: dim,
        };
        cone.validate()?;
        Ok(cone)
    }

    /// Builds a cone from generating rays. Redundant (non-extreme) rays are
    /// allowed; the stored generators are canonicalized to the extreme rays of
    /// the enumerated facet representation.
    pub fn from_generators(rays: &[Vec<f64>]) -> Result<Self> {
        if rays.is_empty() {
            return Err(Error::Construction("no generators supplied".into()));
        }
        let dim = rays[0].len();
        check_dim_bounds(dim)?;
        let mut cols = Vec::with_capacity(rays.len());
        for r in rays {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            let mut v = DVector::from_column_slice(r);
            let n = v.norm();
            if n < 1e-14 {
                return Err(Error::Construction("zero generator supplied".into()));
            }
            v /= n;
            cols.push(v);
        }
        // Pointedness screen: no opposite pair of rays.
        for i in 0..cols.len() {
            for j in (i + 1)..cols.len() {
                if (&cols[i] + &cols[j]).norm() < 1e-10 {
                    return Err(Error::Construction(
                        "cone is not pointed: generators contain an opposite pair".into(),
                    ));
                }
            }
        }
        let span = DMatrix::from_columns(&cols);
        if matrix_rank(&span) < dim {
            return Err(Error::Construction(
                "cone is not solid: generators do not span the space".into(),
            ));
        }
        let a = facets_from_rays(&cols, dim)?;
        let generators = extreme_rays_from_halfspaces(&a)?;
        let cone = Self {
            halfspaces: a,
            generators,
            dimension: dim,
        };
        cone.validate()?;
        Ok(cone)
    }

    /// The positive orthant in `R^dim`.
    pub fn orthant(dim: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_halfspaces(&rows).expect("orthant is a valid cone")
    }

    /// The planar sector `{(r cos t, r sin t) : r >= 0, t in [0, theta]}`.
    /// `theta` must lie in `(0, pi)` for the cone to be pointed and solid.
    pub fn sector(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::Construction(
                "sector angle must lie in (0, pi)".into(),
            ));
        }
        Self::from_halfspaces(&[vec![0.0, 1.0], vec![theta.sin(), -theta.cos()]])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn halfspace_matrix(&self) -> &DMatrix<f64> {
        &self.halfspaces
    }

    /// Extreme rays as matrix columns (unit norm).
    pub fn generator_matrix(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn generators(&self) -> Vec<DVector<f64>> {
        (0..self.dimension)
            .map(|j| self.generators.column(j).into_owned())
            .collect()
    }

    /// Membership test: `min_i (Ax)_i >= -tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        if tol < 0.0 {
            return Err(Error::RejectedInput("tolerance must be nonnegative".into()));
        }
        Ok(self.min_slack(x) >= -tol)
    }

    /// Smallest half-space slack of `x`; positive strictly inside the cone.
    pub fn min_slack(&self, x: &DVector<f64>) -> f64 {
        let s = &self.halfspaces * x;
        s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Whether `dominated` is dominated by `dominator` in the given mode,
    /// i.e. `dominator - dominated` lies in the cone (interior, for strong).
    pub fn dominates(
        &self,
        dominated: &DVector<f64>,
        dominator: &DVector<f64>,
        mode: DominanceMode,
    ) -> Result<bool> {
        self.check_dim(dominated)?;
        self.check_dim(dominator)?;
        let diff = dominator - dominated;
        let tol = MEMBERSHIP_TOL;
        Ok(match mode {
            DominanceMode::Weak => self.min_slack(&diff) >= -tol,
            DominanceMode::Strict => {
                self.min_slack(&diff) >= -tol && diff.amax() > tol
            }
            DominanceMode::Strong => self.min_slack(&diff) > tol,
        })
    }

    /// Euclidean projection of `d` onto the cone, by exhaustive active-set
    /// search over facet subsets (exact for the simplicial cones stored here).
    ///
    /// KKT system for `min ||x - d||^2 s.t. Ax >= 0`: `x = d + A_S^T nu` with
    /// `nu >= 0` supported on the active set `S` and `A_S x = 0`.
    pub fn project(&self, d: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(d)?;
        let dim = self.dimension;
        let feas_tol = 1e-10;
        let mut best_residual = f64::INFINITY;
        for mask in 0u32..(1 << dim) {
            let active: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
            let candidate = if active.is_empty() {
                d.clone()
            } else {
                let a_s = DMatrix::from_fn(active.len(), dim, |r, c| {
                    self.halfspaces[(active[r], c)]
                });
                let gram = &a_s * a_s.transpose();
                let rhs = &a_s * d;
                let nu = match gram.clone().lu().solve(&(-&rhs)) {
                    Some(v) => v,
                    None => continue,
                };
                if nu.iter().any(|&v| v < -feas_tol) {
                    continue;
                }
                d + a_s.transpose() * nu
            };
            let slack = self.min_slack(&candidate);
            if slack >= -feas_tol {
                return Ok(candidate);
            }
            best_residual = best_residual.min(-slack);
        }
        Err(Error::Numerical {
            message: "cone projection found no KKT-consistent active set".into(),
            residual: best_residual,
        })
    }

    /// `sup_{z in C, ||z|| <= 1} z^T d`, the norm of the cone projection of
    /// `d`. Zero exactly when `d` lies in the polar cone.
    pub fn polar_projection_norm(&self, d: &DVector<f64>) -> Result<f64> {
        let p = self.project(d)?;
        Ok(p.norm())
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Revalidates every stored invariant; used after construction.
    fn validate(&self) -> Result<()> {
        let dim = self.dimension;
        for i in 0..dim {
            let row_norm = self.halfspaces.row(i).norm();
            if (row_norm - 1.0).abs() > 1e-12 {
                return Err(Error::Construction(format!(
                    "half-space row {i} is not unit norm"
                )));
            }
        }
        if matrix_rank(&self.halfspaces) < dim {
            return Err(Error::Construction(
                "half-space matrix is rank deficient".into(),
            ));
        }
        let slacks = &self.halfspaces * &self.generators;
        if slacks.iter().any(|&s| s < -1e-12) {
            return Err(Error::Construction(
                "a generator violates a half-space".into(),
            ));
        }
        for j in 0..dim {
            let n = self.generators.column(j).norm();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Construction(format!(
                    "generator {j} is not unit norm"
                )));
            }
        }
        if matrix_rank(&self.generators) < dim {
            return Err(Error::Construction(
                "cone is not solid: generators do not span the space".into(),
            ));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let sum = self.generators.column(i) + self.generators.column(j);
                if sum.norm() < 1e-10 {
                    return Err(Error::Construction(
                        "cone is not pointed: opposite generators".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_dim_bounds(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Construction("dimension must be positive".into()));
    }
    if dim > 6 {
        return Err(Error::Construction(format!(
            "dimension {dim} exceeds the supported bound 6"
        )));
    }
    Ok(())
}

fn normalize_rows(a: &mut DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        let n = a.row(i).norm();
        if n < 1e-14 {
            return Err(Error::Construction(format!("half-space row {i} is zero")));
        }
        let scaled = a.row(i) / n;
        a.set_row(i, &scaled);
    }
    Ok(())
}

fn matrix_rank(a: &DMatrix<f64>) -> usize {
    let svd = a.clone().svd(false, false);
    let max_sv = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    if max_sv == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * max_sv)
        .count()
}

/// Extreme rays of `{x : Ax >= 0}` for invertible `A`: the normalized columns
/// of `A^-1` (preimages of the orthant's axes).
fn extreme_rays_from_halfspaces(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = a.nrows();
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Construction("half-space matrix is singular".into()))?;
    let mut gens = inv;
    for j in 0..dim {
        let n = gens.column(j).norm();
        if n < 1e-14 {
            return Err(Error::Construction("degenerate extreme ray".into()));
        }
        let scaled = gens.column(j) / n;
        gens.set_column(j, &scaled);
    }
    Ok(gens)
}

/// Facet enumeration for a cone given by (possibly redundant) unit rays:
/// every subset of `dim - 1` independent rays spans a candidate hyperplane;
/// its normal is a facet when all rays sit weakly on one side. A valid
/// preference cone must come out with exactly `dim` facets.
fn facets_from_rays(rays: &[DVector<f64>], dim: usize) -> Result<DMatrix<f64>> {
    let mut facets: Vec<DVector<f64>> = Vec::new();
    let mut push_unique = |normal: DVector<f64>| {
        if facets.iter().all(|f| (f - &normal).norm() > 1e-8) {
            facets.push(normal);
        }
    };
    if dim == 1 {
        // Single ray +-1; the facet normal equals it.
        push_unique(rays[0].clone());
    } else {
        let subsets = subsets_of_size(rays.len(), dim - 1);
        for subset in subsets {
            let basis = DMatrix::from_columns(
                &subset.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>(),
            );
            if matrix_rank(&basis) < dim - 1 {
                continue;
            }
            let normal = match hyperplane_normal(&basis, dim) {
                Some(n) => n,
                None => continue,
            };
            for candidate in [normal.clone(), -normal] {
                let min_side = rays
                    .iter()
                    .map(|r| candidate.dot(r))
                    .fold(f64::INFINITY, f64::min);
                if min_side >= -1e-10 {
                    push_unique(candidate);
                }
            }
        }
    }
    if facets.len() != dim {
        return Err(Error::Construction(format!(
            "facet enumeration produced {} facets; a valid preference cone in dimension {} has exactly {}",
            facets.len(),
            dim,
            dim
        )));
    }
    let mut a = DMatrix::zeros(dim, dim);
    for (i, f) in facets.iter().enumerate() {
        a.set_row(i, &f.transpose());
    }
    if matrix_rank(&a) < dim {
        return Err(Error::Construction(
            "half-space matrix is rank deficient".into(),
        ));
    }
    Ok(a)
}

/// Unit normal of the span of `dim - 1` independent columns, via the least
/// singular vector of the transposed basis.
fn hyperplane_normal(basis: &DMatrix<f64>, dim: usize) -> Option<DVector<f64>> {
    let svd = basis.transpose().svd(false, true);
    let v_t = svd.v_t?;
    let normal: DVector<f64> = v_t.row(dim - 1).transpose();
    let n = normal.norm();
    if n < 1e-14 {
        return None;
    }
    Some(normal / n)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, k, current, out);
            current.pop();
        }
    }
    recurse(0, n, k, &mut current, &mut out);
    out
}

/// A preference direction `z` in the cone together with its nonnegative
/// decomposition over the cone's generators.
#[derive(Debug, Clone)]
pub struct PreferenceVector {
    coords: DVector<f64>,
    cone_coefficients: DVector<f64>,
}

impl PreferenceVector {
    /// Wraps coordinates known to lie in the cone; the generator coefficients
    /// are recovered by solving against the generator matrix.
    pub fn from_coords(cone: &PreferenceCone, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != cone.dimension() {
            return Err(Error::DimensionMismatch {
                expected: cone.dimension(),
                found: coords.len(),
            });
        }
        if !cone.contains(&coords, 1e-10)? {
            return Err(Error::RejectedInput(
                "preference vector lies outside the cone".into(),
            ));
        }
        let alpha = cone
            .generator_matrix()
            .clone()
            .lu()
            .solve(&coords)
            .ok_or_else(|| Error::Numerical {
                message: "generator matrix is singular".into(),
                residual: f64::NAN,
            })?;
        let alpha = alpha.map(|a| a.max(0.0));
        let recon = cone.generator_matrix() * &alpha;
        let err = (&recon - &coords).norm();
        if err > 1e-9 {
            return Err(Error::Numerical {
                message: "cone-coefficient reconstruction exceeded tolerance".into(),
                residual: err,
            });
        }
        Ok(Self {
            coords,
            cone_coefficients: alpha,
        })
    }

    /// Builds `z = sum_i alpha_i v_i` from nonnegative generator coefficients.
    pub fn from_coefficients(cone: &PreferenceCone, alpha: DVector<f64>) -> Result<Self> {
        if alpha.len() != cone.dimension() {
            return Err(Error::DimensionMismatch {
                expected: cone.dimension(),
                found: alpha.len(),
            });
        }
        if alpha.iter().any(|&a| a < 0.0) {
            return Err(Error::RejectedInput(
                "cone coefficients must be nonnegative".into(),
            ));
        }
        let coords = cone.generator_matrix() * &alpha;
        Ok(Self {
            coords,
            cone_coefficients: alpha,
        })
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn cone_coefficients(&self) -> &DVector<f64> {
        &self.cone_coefficients
    }

    /// Rescales to unit Euclidean norm. Errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.coords.norm();
        if n < 1e-14 {
            return Err(Error::RejectedInput(
                "cannot normalize the zero preference vector".into(),
            ));
        }
        Ok(Self {
            coords: &self.coords / n,
            cone_coefficients: &self.cone_coefficients / n,
        })
    }
}

/// On-disk cone format: at least one of the two representations.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConeFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
}

impl ConeFile {
    pub fn into_cone(self) -> Result<PreferenceCone> {
        match (self.halfspaces, self.generators) {
            (Some(h), gens) => {
                let cone = PreferenceCone::from_halfspaces(&h)?;
                if let Some(gens) = gens {
                    for (i, g) in gens.iter().enumerate() {
                        let mut v = DVector::from_column_slice(g);
                        let n = v.norm();
                        if n < 1e-14 {
                            return Err(Error::Construction(format!("generator {i} is zero")));
                        }
                        v /= n;
                        if !cone.contains(&v, 1e-10)? {
                            return Err(Error::Construction(format!(
                                "declared generator {i} lies outside the half-space cone"
                            )));
                        }
                    }
                }
                Ok(cone)
            }
            (None, Some(g)) => PreferenceCone::from_generators(&g),
            (None, None) => Err(Error::Construction(
                "cone file must declare halfspaces or generators".into(),
            )),
        }
    }
}

/// Loads a cone from a JSON file with keys `halfspaces` and/or `generators`.
pub fn load_cone(path: &std::path::Path) -> Result<PreferenceCone> {
    let text = std::fs::read_to_string(path)?;
    let file: ConeFile = serde_json::from_str(&text)?;
    file.into_cone()
}
