//! Regular 3D scalar fields and the finite-difference operators on them.
//!
//! Values are stored in one flat buffer with z varying fastest:
//! `idx(x, y, z) = (x * ny + y) * nz + z`. Every flattened state vector in the
//! crate uses this order.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell counts and the (isotropic) spatial step of a regular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub d: f64,
}

impl GridDims {
    pub fn new(nx: usize, ny: usize, nz: usize, d: f64) -> Result<Self> {
        let dims = GridDims { nx, ny, nz, d };
        dims.validate()?;
        Ok(dims)
    }

    pub fn cube(n: usize, d: f64) -> Result<Self> {
        Self::new(n, n, n, d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 || self.nz < 3 {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 3 cells, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spatial step must be positive and finite, got {}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.ny + y) * self.nz + z
    }

    /// Inverse of [`GridDims::idx`].
    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        let z = i % self.nz;
        let y = (i / self.nz) % self.ny;
        let x = i / (self.nz * self.ny);
        (x, y, z)
    }

    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        x < self.nx && y < self.ny && z < self.nz
    }
}

/// One scalar field on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    dims: GridDims,
    values: Vec<f64>,
}

impl Field3 {
    pub fn zeros(dims: GridDims) -> Self {
        Self::constant(dims, 0.0)
    }

    pub fn constant(dims: GridDims, value: f64) -> Self {
        Field3 {
            dims,
            values: vec![value; dims.len()],
        }
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(dims.len());
        for x in 0..dims.nx {
            for y in 0..dims.ny {
                for z in 0..dims.nz {
                    values.push(f(x, y, z));
                }
            }
        }
        Field3 { dims, values }
    }

    /// Wraps a flat buffer, checking its length and that every value is finite.
    pub fn from_values(dims: GridDims, values: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if values.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "field buffer has {} values, grid {}x{}x{} needs {}",
                values.len(),
                dims.nx,
                dims.ny,
                dims.nz,
                dims.len()
            )));
        }
        check_finite("field", &values)?;
        Ok(Field3 { dims, values })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.dims.idx(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: f64) {
        let i = self.dims.idx(x, y, z);
        self.values[i] = v;
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite("field", &self.values)
    }
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// 7-point Laplacian with zero-flux (mirrored ghost cell) boundaries.
pub fn laplacian(f: &Field3) -> Result<Field3> {
    f.check_finite()?;
    let mut out = vec![0.0; f.values.len()];
    laplacian_into(f.dims, &f.values, &mut out);
    Ok(Field3 {
        dims: f.dims,
        values: out,
    })
}

/// Writes the Laplacian of `src` into `out`, with no finiteness checks.
///
/// An out-of-domain neighbour takes the value of the boundary cell itself, so
/// that term cancels against one of the six centre contributions. Per cell the
/// sum is always `-6c, +x, -x, +y, -y, +z, -z`, then divided by `d^2`; slabs of
/// constant x are independent, so the result does not depend on how rayon
/// partitions the work.
pub fn laplacian_into(dims: GridDims, src: &[f64], out: &mut [f64]) {
    let GridDims { nx, ny, nz, d } = dims;
    debug_assert_eq!(src.len(), dims.len());
    debug_assert_eq!(out.len(), dims.len());
    let inv_d2 = 1.0 / (d * d);
    let slab = ny * nz;

    out.par_chunks_mut(slab).enumerate().for_each(|(x, row)| {
        let base = x * slab;
        for y in 0..ny {
            for z in 0..nz {
                let i = base + y * nz + z;
                let c = src[i];
                let xp = if x + 1 < nx { src[i + slab] } else { c };
                let xm = if x > 0 { src[i - slab] } else { c };
                let yp = if y + 1 < ny { src[i + nz] } else { c };
                let ym = if y > 0 { src[i - nz] } else { c };
                let zp = if z + 1 < nz { src[i + 1] } else { c };
                let zm = if z > 0 { src[i - 1] } else { c };
                let s = -6.0 * c + xp + xm + yp + ym + zp + zm;
                row[y * nz + z] = s * inv_d2;
            }
        }
    });
}

/// Plane `out[[x, y]] = f(x, y, z)`.
pub fn slice_z(f: &Field3, z: usize) -> Result<Array2<f64>> {
    let dims = f.dims;
    if z >= dims.nz {
        return Err(Error::IndexOutOfRange(format!(
            "z = {z} but the grid has nz = {}",
            dims.nz
        )));
    }
    Ok(Array2::from_shape_fn((dims.nx, dims.ny), |(x, y)| {
        f.get(x, y, z)
    }))
}

/// Writes a plane back into `f` at height `z`; the inverse of [`slice_z`].
pub fn set_slice_z(f: &mut Field3, z: usize, plane: &Array2<f64>) -> Result<()> {
    let dims = f.dims;
    if z >= dims.nz {
        return Err(Error::IndexOutOfRange(format!(
            "z = {z} but the grid has nz = {}",
            dims.nz
        )));
    }
    if plane.dim() != (dims.nx, dims.ny) {
        return Err(Error::Dimension(format!(
            "plane is {:?}, grid cross-section is ({}, {})",
            plane.dim(),
            dims.nx,
            dims.ny
        )));
    }
    for ((x, y), &v) in plane.indexed_iter() {
        f.set(x, y, z, v);
    }
    Ok(())
}
