//! Second-order leapfrog for `u_tt = u_rr + ((n − 1)/r) u_r` on `[0, R]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::riemann::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdGrid {
    /// Outer radius, where `u = 0` is imposed.
    pub radius: f64,
    pub dr: f64,
    pub dt: f64,
    pub steps: usize,
}

impl FdGrid {
    /// Grid reaching `t_max` with `dt = cfl · dr` and a radius that keeps
    /// the outer boundary causally disconnected from `r ≤ r_max`.
    pub fn covering(dr: f64, cfl: f64, r_max: f64, t_max: f64) -> Result<Self> {
        let dt = cfl * dr;
        let steps = (t_max / dt).round() as usize;
        let cells = ((r_max + t_max) / dr).ceil() + 4.0;
        let grid = Self {
            radius: cells * dr,
            dr,
            dt,
            steps,
        };
        grid.validate(r_max)?;
        Ok(grid)
    }

    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn cells(&self) -> usize {
        (self.radius / self.dr).round() as usize
    }

    pub fn validate(&self, r_max: f64) -> Result<()> {
        if !(self.dr > 0.0 && self.dt > 0.0 && self.radius > 0.0) {
            return Err(Error::Grid("steps and radius must be positive".into()));
        }
        if self.dt > 0.9 * self.dr {
            return Err(Error::Grid(format!(
                "CFL violated: dt = {} > 0.9·dr = {}",
                self.dt,
                0.9 * self.dr
            )));
        }
        if self.radius < r_max + self.t_max() {
            return Err(Error::Grid(format!(
                "radius {} below r_max + t_max = {}",
                self.radius,
                r_max + self.t_max()
            )));
        }
        Ok(())
    }
}

/// Field snapshots at the recorded step indices.
#[derive(Debug, Clone)]
pub struct FdField {
    pub grid: FdGrid,
    pub n: u32,
    /// `(step, u at r_i = i·dr)`.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    /// `(step, ∫(u_t² + u_r²) r^{n−1} dr)`.
    pub energy: Vec<(usize, f64)>,
}

impl FdField {
    /// `u` at a recorded time and a grid radius.
    pub fn value(&self, r: f64, t: f64) -> Result<f64> {
        let g = &self.grid;
        let i = (r / g.dr).round();
        let k = (t / g.dt).round() as usize;
        if (i * g.dr - r).abs() > 1e-9 * g.dr.max(r) || (k as f64 * g.dt - t).abs() > 1e-9 * g.dt.max(t) {
            return Err(Error::Grid(format!("({r}, {t}) is not a grid point")));
        }
        let snap = self
            .snapshots
            .iter()
            .find(|(s, _)| *s == k)
            .ok_or_else(|| Error::Grid(format!("time {t} was not recorded")))?;
        snap.1
            .get(i as usize)
            .copied()
            .ok_or_else(|| Error::Grid(format!("r = {r} outside the grid")))
    }
}

fn sample(f: &RadialProfile, r: f64, dr: f64) -> Result<f64> {
    if r > 0.0 {
        return f.value(r);
    }
    // The origin is represented by its right limit, which must exist.
    let near = f.value(1e-6 * dr)?;
    let cell = f.value(dr)?;
    if !near.is_finite() || near.abs() > 1e3 * cell.abs().max(1.0) {
        return Err(Error::Profile(format!("{} is not bounded near r = 0", f.label())));
    }
    Ok(near)
}

fn laplacian(u: &[f64], n: u32, dr: f64, out: &mut [f64]) {
    let last = u.len() - 1;
    let inv = 1.0 / (dr * dr);
    // Even extension u_{-1} = u_1; (n − 1)/r ∂_r u → (n − 1) ∂²_r u at r = 0.
    out[0] = n as f64 * 2.0 * (u[1] - u[0]) * inv;
    for i in 1..last {
        let r = i as f64 * dr;
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv
            + (n - 1) as f64 / r * (u[i + 1] - u[i - 1]) / (2.0 * dr);
    }
    out[last] = 0.0;
}

fn energy(prev: &[f64], next: &[f64], cur: &[f64], n: u32, dr: f64, dt: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..cur.len() - 1 {
        let rm = (i as f64 + 0.5) * dr;
        let ut = 0.5 * ((next[i] - prev[i]) + (next[i + 1] - prev[i + 1])) / (2.0 * dt);
        let ur = (cur[i + 1] - cur[i]) / dr;
        e += (ut * ut + ur * ur) * rm.powi(n as i32 - 1) * dr;
    }
    e
}

/// Evolves `(φ, ψ)` and records the field at `record` (grid times).
pub fn fd_solve(
    phi: &RadialProfile,
    psi: &RadialProfile,
    grid: FdGrid,
    n: u32,
    record: &[f64],
) -> Result<FdField> {
    grid.validate(0.0)?;
    let cells = grid.cells();
    let (dr, dt) = (grid.dr, grid.dt);
    let mut wanted = Vec::with_capacity(record.len());
    for &t in record {
        let k = (t / dt).round();
        if (k * dt - t).abs() > 1e-9 * dt.max(t) || k as usize > grid.steps {
            return Err(Error::Grid(format!("record time {t} is not a step of the grid")));
        }
        wanted.push(k as usize);
    }
    wanted.sort_unstable();
    wanted.dedup();

    let mut cur = vec![0.0; cells + 1];
    let mut vel = vec![0.0; cells + 1];
    for i in 0..cells {
        let r = i as f64 * dr;
        cur[i] = sample(phi, r, dr)?;
        vel[i] = sample(psi, r, dr)?;
    }
    let mut lap = vec![0.0; cells + 1];
    laplacian(&cur, n, dr, &mut lap);
    let mut next: Vec<f64> = (0..=cells)
        .map(|i| cur[i] + dt * vel[i] + 0.5 * dt * dt * lap[i])
        .collect();
    next[cells] = 0.0;

    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut energies = Vec::with_capacity(wanted.len());
    if wanted.first() == Some(&0) {
        snapshots.push((0, cur.clone()));
    }
    let mut prev = cur;
    cur = next;
    let mut next = vec![0.0; cells + 1];
    for step in 1..=grid.steps {
        laplacian(&cur, n, dr, &mut lap);
        for i in 0..cells {
            next[i] = 2.0 * cur[i] - prev[i] + dt * dt * lap[i];
        }
        next[cells] = 0.0;
        if wanted.binary_search(&step).is_ok() {
            snapshots.push((step, cur.clone()));
            energies.push((step, energy(&prev, &next, &cur, n, dr, dt)));
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(FdField {
        grid,
        n,
        snapshots,
        energy: energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{descent_data, descent_solution, Generator};

    #[test]
    fn cfl_and_radius_checked() {
        let g = FdGrid {
            radius: 10.0,
            dr: 0.1,
            dt: 0.095,
            steps: 10,
        };
        assert!(g.validate(1.0).is_err());
        let g = FdGrid { dt: 0.05, ..g };
        assert!(g.validate(1.0).is_ok());
        assert!(g.validate(9.9).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = RadialProfile::zero();
        let grid = FdGrid::covering(0.1, 0.5, 2.0, 1.0).unwrap();
        let f = fd_solve(&z, &z, grid, 4, &[1.0]).unwrap();
        assert!(f.snapshots[0].1.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn singular_data_rejected() {
        let p = RadialProfile::power(1.0, -1.0, 0.0);
        let grid = FdGrid::covering(0.1, 0.5, 2.0, 1.0).unwrap();
        assert!(fd_solve(&p, &RadialProfile::zero(), grid, 4, &[1.0]).is_err());
    }

    #[test]
    fn second_order_against_descent() {
        // Focusing makes the origin pre-asymptotic; compare away from it.
        let g = Generator::bump(1.0, 5.0, 1.0).unwrap();
        let (phi, psi) = descent_data(&g, 1);
        let times = [1.0, 2.0];
        let err = |dr: f64| {
            let grid = FdGrid::covering(dr, 0.5, 6.0, 2.0).unwrap();
            let field = fd_solve(&phi, &psi, grid, 5, &times).unwrap();
            let mut worst = 0.0f64;
            for &t in &times {
                for i in 5..=30 {
                    let r = i as f64 * 0.2;
                    let e = (field.value(r, t).unwrap() - descent_solution(&g, 1, r, t).unwrap()).abs();
                    worst = worst.max(e);
                }
            }
            worst
        };
        let (e1, e2) = (err(0.02), err(0.01));
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.3, "order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn energy_conserved() {
        let psi = RadialProfile::bump(0.5, 1.5, 1.0).unwrap();
        let grid = FdGrid::covering(0.01, 0.5, 0.0, 3.0).unwrap();
        let field = fd_solve(&RadialProfile::zero(), &psi, grid, 4, &[0.5, 1.5, 3.0]).unwrap();
        let e0 = field.energy[0].1;
        for &(_, e) in &field.energy {
            assert!((e - e0).abs() < 1e-3 * e0, "{e} vs {e0}");
        }
    }
}
