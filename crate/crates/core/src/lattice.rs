//! Finite-difference discretization of `K̂ = −∂²_t − Ω²(t)` with Dirichlet
//! rows, used as an independent check of the continuum machinery.
//!
//! Interior nodes are `t_i = t_a + i·h` for `i = 1..=N` with
//! `h = (t_b − t_a)/(N + 1)`. The matrix has `2/h² − Ω²(t_i)` on the diagonal
//! and `−1/h²` off it.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;

pub const MIN_NODES: usize = 2;
pub const PIVOT_TOL: f64 = 1e-12;
pub const MAX_MOMENT_INDICES: usize = 12;

#[derive(Debug, Clone)]
pub struct LatticeOperator {
    n: usize,
    h: f64,
    t_a: f64,
    diag: Vec<f64>,
    offdiag: f64,
}

/// `LDLᵀ` pivots of the dimensionless matrix `h²K`.
#[derive(Debug, Clone)]
struct Factorization {
    pivots: Vec<f64>,
}

impl LatticeOperator {
    pub fn new(profile: &FrequencyProfile, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "lattice needs at least {MIN_NODES} interior nodes, got {n}"
            )));
        }
        let h = profile.duration() / (n as f64 + 1.0);
        let diag = (1..=n)
            .map(|i| {
                let t = profile.t_a() + i as f64 * h;
                profile.omega_squared(t).map(|w2| 2.0 / (h * h) - w2)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            h,
            t_a: profile.t_a(),
            diag,
            offdiag: -1.0 / (h * h),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }

    /// Time of interior node `i` (1-based).
    pub fn node(&self, i: usize) -> f64 {
        self.t_a + i as f64 * self.h
    }

    /// Index of the interior node nearest to `t`.
    pub fn nearest_node(&self, t: f64) -> usize {
        (((t - self.t_a) / self.h).round() as usize).clamp(1, self.n)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::InvalidParameter(format!(
                "node {i} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    fn factorize(&self) -> Result<Factorization> {
        let h2 = self.h * self.h;
        let a: Vec<f64> = self.diag.iter().map(|d| d * h2).collect();
        let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut pivots = Vec::with_capacity(self.n);
        for (row, &ai) in a.iter().enumerate() {
            let p = match pivots.last() {
                None => ai,
                Some(&prev) => ai - 1.0 / prev,
            };
            if p.abs() < PIVOT_TOL * scale {
                return Err(Error::SingularLattice { row, pivot: p });
            }
            pivots.push(p);
        }
        Ok(Factorization { pivots })
    }

    /// `ln|det K|` and the sign of `det K`.
    pub fn log_det(&self) -> Result<(f64, f64)> {
        let f = self.factorize()?;
        let mut sign = 1.0;
        let mut log = 0.0;
        for p in &f.pivots {
            sign *= p.signum();
            log += p.abs().ln();
        }
        log -= 2.0 * self.n as f64 * self.h.ln();
        Ok((sign, log))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.factorize()
            .map(|f| f.pivots.iter().all(|&p| p > 0.0))
            .unwrap_or(false)
    }

    /// `h·det(h²K)` from the three-term recurrence, which tends to `D_a(t_b)`.
    pub fn gelfand_yaglom_limit(&self) -> f64 {
        let h2 = self.h * self.h;
        let (mut prev, mut cur) = (1.0, self.diag[0] * h2);
        for d in &self.diag[1..] {
            let next = d * h2 * cur - prev;
            prev = cur;
            cur = next;
        }
        self.h * cur
    }

    /// Column `j` of `K⁻¹` by the Thomas algorithm.
    pub fn inverse_column(&self, j: usize) -> Result<Vec<f64>> {
        self.check_index(j)?;
        let f = self.factorize()?;
        Ok(self.solve_unit(&f, j))
    }

    fn solve_unit(&self, f: &Factorization, j: usize) -> Vec<f64> {
        // h²K = L·diag(p)·Lᵀ with unit-lower L having −1/p_{k−1} below the diagonal.
        let n = self.n;
        let mut y = vec![0.0; n];
        y[j - 1] = 1.0;
        for k in j..n {
            y[k] = y[k - 1] / f.pivots[k - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = y[n - 1] / f.pivots[n - 1];
        for k in (0..n - 1).rev() {
            x[k] = y[k] / f.pivots[k] + x[k + 1] / f.pivots[k];
        }
        let h2 = self.h * self.h;
        x.iter_mut().for_each(|v| *v *= h2);
        x
    }

    /// Columns of `K⁻¹` for the requested nodes, solved in parallel.
    pub fn inverse_columns(&self, nodes: &[usize]) -> Result<BTreeMap<usize, Vec<f64>>> {
        for &j in nodes {
            self.check_index(j)?;
        }
        let f = self.factorize()?;
        Ok(nodes
            .par_iter()
            .map(|&j| (j, self.solve_unit(&f, j)))
            .collect())
    }
}

/// `(K⁻¹)_ij / h`, the lattice counterpart of the Dirichlet `G_jj(t_i, t_j)`.
pub fn lattice_green(opr: &LatticeOperator, i: usize, j: usize) -> Result<f64> {
    opr.check_index(i)?;
    let column = opr.inverse_column(j)?;
    Ok(column[i - 1] / opr.h)
}

/// `ln det K₁ − ln det K₂` for operators on the same grid.
pub fn lattice_log_det_ratio(opr1: &LatticeOperator, opr2: &LatticeOperator) -> Result<f64> {
    check_same_grid(opr1, opr2)?;
    let (_, l1) = opr1.log_det()?;
    let (_, l2) = opr2.log_det()?;
    Ok(l1 - l2)
}

/// Signed `det K₁ / det K₂`.
pub fn lattice_det_ratio(opr1: &LatticeOperator, opr2: &LatticeOperator) -> Result<f64> {
    check_same_grid(opr1, opr2)?;
    let (s1, l1) = opr1.log_det()?;
    let (s2, l2) = opr2.log_det()?;
    Ok(s1 * s2 * (l1 - l2).exp())
}

fn check_same_grid(a: &LatticeOperator, b: &LatticeOperator) -> Result<()> {
    if a.n != b.n || (a.h - b.h).abs() > 1e-15 * a.h || a.t_a != b.t_a {
        return Err(Error::InvalidParameter(
            "lattice operators live on different grids".into(),
        ));
    }
    Ok(())
}

/// `E[x_{i₁}⋯x_{iₙ}]` for the zero-mean Gaussian with covariance `K⁻¹/h`,
/// summed over all pairings of the index list.
pub fn lattice_gaussian_moments(opr: &LatticeOperator, indices: &[usize]) -> Result<f64> {
    if indices.len() > MAX_MOMENT_INDICES {
        return Err(Error::Size(format!(
            "{} indices exceed the cap of {MAX_MOMENT_INDICES}",
            indices.len()
        )));
    }
    if !opr.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(
            "lattice operator has a non-positive pivot".into(),
        ));
    }
    let mut distinct = indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let columns = opr.inverse_columns(&distinct)?;
    let cov = |i: usize, j: usize| columns[&j][i - 1] / opr.h;
    Ok(pairing_sum(indices, &cov))
}

fn pairing_sum(indices: &[usize], cov: &impl Fn(usize, usize) -> f64) -> f64 {
    match indices {
        [] => 1.0,
        [_] => 0.0,
        [first, rest @ ..] => {
            let mut total = 0.0;
            for k in 0..rest.len() {
                let mut remaining = rest.to_vec();
                let partner = remaining.remove(k);
                total += cov(*first, partner) * pairing_sum(&remaining, cov);
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(omega: f64, t_b: f64, n: usize) -> LatticeOperator {
        LatticeOperator::new(&FrequencyProfile::constant(omega, 0.0, t_b).unwrap(), n).unwrap()
    }

    #[test]
    fn free_particle_midpoint() {
        let op = LatticeOperator::new(&FrequencyProfile::free(0.0, 1.0).unwrap(), 999).unwrap();
        assert!((op.node(500) - 0.5).abs() < 1e-15);
        assert!((lattice_green(&op, 500, 500).unwrap() - 0.25).abs() < 1e-5);
    }

    #[test]
    fn oscillator_midpoint() {
        let op = lattice(1.0, 1.0, 1999);
        let g = lattice_green(&op, 1000, 1000).unwrap();
        let exact = 0.5f64.sin() * 0.5f64.sin() / 1.0f64.sin();
        assert!((g - exact).abs() < 5e-4);
    }

    #[test]
    fn boundary_row_vanishes() {
        let coarse = lattice_green(&lattice(1.0, 1.0, 99), 1, 1).unwrap();
        let fine = lattice_green(&lattice(1.0, 1.0, 999), 1, 1).unwrap();
        assert!(fine < coarse / 5.0);
        assert!(fine < 1e-3);
    }

    #[test]
    fn inverse_is_symmetric_and_exact() {
        let op = lattice(1.3, 1.0, 20);
        let cols = op.inverse_columns(&(1..=20).collect::<Vec<_>>()).unwrap();
        for i in 1..=20 {
            for j in 1..=20 {
                assert!((cols[&j][i - 1] - cols[&i][j - 1]).abs() < 1e-12);
                // (K·K⁻¹)_ij = δ_ij.
                let mut kx = op.diag[i - 1] * cols[&j][i - 1];
                if i > 1 {
                    kx += op.offdiag * cols[&j][i - 2];
                }
                if i < 20 {
                    kx += op.offdiag * cols[&j][i];
                }
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((kx - delta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn log_det_ratio_matches_gelfand_yaglom() {
        let free = LatticeOperator::new(&FrequencyProfile::free(0.0, 1.0).unwrap(), 3999).unwrap();
        let osc = lattice(1.0, 1.0, 3999);
        assert_eq!(lattice_log_det_ratio(&osc, &osc).unwrap(), 0.0);
        let r = lattice_log_det_ratio(&osc, &free).unwrap();
        assert!((r - 1.0f64.sin().ln()).abs() < 2e-3);
    }

    #[test]
    fn g_family_ratio() {
        let base = FrequencyProfile::constant(1.0, 0.0, 1.0).unwrap();
        let n = 3999;
        let a = LatticeOperator::new(&base.scaled(0.25).unwrap(), n).unwrap();
        let b = LatticeOperator::new(&base.scaled(0.0).unwrap(), n).unwrap();
        let r = lattice_log_det_ratio(&a, &b).unwrap();
        assert!((r - (0.5f64.sin() / 0.5).ln()).abs() < 2e-3);
    }

    #[test]
    fn recurrence_limit() {
        let op = lattice(1.0, 1.0, 3999);
        let limit = op.gelfand_yaglom_limit();
        assert!((limit - 1.0f64.sin()).abs() / 1.0f64.sin() < 1e-2);
        let (sign, log) = op.log_det().unwrap();
        let det_scaled = sign * (log + 2.0 * op.n as f64 * op.h.ln()).exp() * op.h;
        assert!((det_scaled - limit).abs() < 1e-8);
    }

    #[test]
    fn singular_lattice_detected() {
        // Two nodes with Ω²h² = 1 give h²K = [[1, −1], [−1, 1]].
        let h: f64 = 1.0 / 3.0;
        let op = lattice(1.0 / h, 1.0, 2);
        assert!(matches!(
            lattice_green(&op, 1, 1),
            Err(Error::SingularLattice { row: 1, .. })
        ));
    }

    #[test]
    fn moments() {
        let op = lattice(1.0, 1.0, 9);
        let g = |i, j| lattice_green(&op, i, j).unwrap();
        assert!((lattice_gaussian_moments(&op, &[4, 4]).unwrap() - g(4, 4)).abs() < 1e-14);
        let m4 = lattice_gaussian_moments(&op, &[4; 4]).unwrap();
        assert!((m4 - 3.0 * g(4, 4).powi(2)).abs() < 1e-14);
        let mixed = lattice_gaussian_moments(&op, &[2, 2, 7, 7]).unwrap();
        let expected = g(2, 2) * g(7, 7) + 2.0 * g(2, 7).powi(2);
        assert!((mixed - expected).abs() < 1e-14);
        assert_eq!(lattice_gaussian_moments(&op, &[1, 2, 3]).unwrap(), 0.0);
    }

    #[test]
    fn moments_need_positive_definite() {
        let op = lattice(4.0, 1.0, 50);
        assert!(!op.is_positive_definite());
        assert!(matches!(
            lattice_gaussian_moments(&op, &[3, 3]),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
