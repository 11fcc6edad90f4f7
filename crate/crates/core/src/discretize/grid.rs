use crate::error::{Error, Result};
use crate::media::Cell;

/// Default cap on the number of grid points.
pub const DEFAULT_BUDGET: usize = 1 << 22;

/// Uniform periodic grid on a cell, `x` index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cell: Cell,
    n: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    pub fn new(cell: &Cell, n: &[usize]) -> Result<Self> {
        Self::with_budget(cell, n, DEFAULT_BUDGET)
    }

    /// Same resolution `n` along every axis.
    pub fn uniform(cell: &Cell, n: usize) -> Result<Self> {
        Self::new(cell, &vec![n; cell.dim()])
    }

    pub fn with_budget(cell: &Cell, n: &[usize], budget: usize) -> Result<Self> {
        if n.len() != cell.dim() {
            return Err(Error::InvalidGrid(format!(
                "{} resolutions for a {}-d cell",
                n.len(),
                cell.dim()
            )));
        }
        if let Some(bad) = n.iter().find(|&&k| k < 8) {
            return Err(Error::InvalidGrid(format!("{bad} points per period, need at least 8")));
        }
        let total: usize = n.iter().product();
        if total > budget {
            return Err(Error::InvalidGrid(format!(
                "{total} points exceed the budget of {budget}"
            )));
        }
        let h = cell
            .periods()
            .iter()
            .zip(n)
            .map(|(l, &k)| l / k as f64)
            .collect();
        Ok(Self {
            cell: cell.clone(),
            n: n.to_vec(),
            h,
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same point count on the cell scaled by `l`.
    pub fn scaled(&self, l: f64) -> Self {
        Self {
            cell: self.cell.scaled(l),
            n: self.n.clone(),
            h: self.h.iter().map(|h| h * l).collect(),
        }
    }

    /// Node coordinates; the second entry is zero in one dimension.
    pub fn point(&self, k: usize) -> [f64; 2] {
        match self.dim() {
            1 => [k as f64 * self.h[0], 0.0],
            _ => {
                let (i, j) = (k % self.n[0], k / self.n[0]);
                [i as f64 * self.h[0], j as f64 * self.h[1]]
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Grid function sampled from `f`.
    pub fn sample(&self, f: impl Fn(&[f64; 2]) -> f64) -> Vec<f64> {
        self.points().map(|x| f(&x)).collect()
    }

    /// Cell average by the trapezoid rule (exact for trigonometric
    /// polynomials of degree below `n`).
    pub fn mean(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() / u.len() as f64
    }

    /// Discrete inner product weighted by the cell measure per node.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        let w: f64 = self.h.iter().product();
        w * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Index of the neighbour `shift` steps along `axis`, wrapping periodically.
    #[inline]
    pub fn neighbor(&self, k: usize, axis: usize, shift: isize) -> usize {
        let n0 = self.n[0];
        if axis == 0 {
            let i = (k % n0) as isize;
            let base = k - i as usize;
            base + (i + shift).rem_euclid(n0 as isize) as usize
        } else {
            let n1 = self.n[1] as isize;
            let (i, j) = (k % n0, (k / n0) as isize);
            i + n0 * (j + shift).rem_euclid(n1) as usize
        }
    }
}
