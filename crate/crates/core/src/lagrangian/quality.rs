use std::f64::consts::PI;

use super::flow::{integrate_flow, torus_distance, wrap, Direction, FlowMap, FlowOptions};
use crate::dynamics::VelocitySource;
use crate::error::{Error, Result};

/// How particle positions are deposited into cells for the compressibility
/// estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Binning {
    /// Each particle counts once in the cell containing it.
    NearestCell,
    /// Bilinear (cloud-in-cell) deposition onto cell centres.
    #[default]
    CloudInCell,
}

/// Scale-limited certificate for a flow map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowQuality {
    /// Largest ratio, over recorded times and cells, of deposited mass to the
    /// mass expected under a measure-preserving map.
    pub compressibility: f64,
    /// `max_x |X_t^{-1}(X_t(x)) - x|` when a composed inverse is supplied.
    pub inverse_residual: f64,
}

/// Deposited particle counts per cell of an `m x m` partition.
pub fn cell_counts(points: &[[f64; 2]], m: usize, binning: Binning) -> Vec<f64> {
    let scale = m as f64 / (2.0 * PI);
    let mut counts = vec![0.0; m * m];
    for p in points {
        let (a, b) = (wrap(p[0]) * scale, wrap(p[1]) * scale);
        match binning {
            Binning::NearestCell => {
                let (i, j) = ((a.floor() as usize).min(m - 1), (b.floor() as usize).min(m - 1));
                counts[i * m + j] += 1.0;
            }
            Binning::CloudInCell => {
                // cell centres sit at (c + 1/2) h
                let (sa, sb) = (a - 0.5, b - 0.5);
                let (fa, fb) = (sa.floor(), sb.floor());
                let (wa, wb) = (sa - fa, sb - fb);
                let i0 = (fa as i64).rem_euclid(m as i64) as usize;
                let j0 = (fb as i64).rem_euclid(m as i64) as usize;
                let (i1, j1) = ((i0 + 1) % m, (j0 + 1) % m);
                counts[i0 * m + j0] += (1.0 - wa) * (1.0 - wb);
                counts[i1 * m + j0] += wa * (1.0 - wb);
                counts[i0 * m + j1] += (1.0 - wa) * wb;
                counts[i1 * m + j1] += wa * wb;
            }
        }
    }
    counts
}

/// Partition and deposition used by [`volume_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VolumeOptions {
    pub binning: Binning,
    /// Cells per side of the partition the particles are binned into,
    /// capped at the particle grid `M`. A fixed partition keeps many
    /// particles per cell as `M` grows, so the estimate converges to the
    /// true constant; at one particle per cell it measures lattice
    /// distortion instead of volume change.
    pub cells: usize,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self { binning: Binning::CloudInCell, cells: 16 }
    }
}

/// Compressibility estimate of a gridded flow and, if `composed` is given,
/// the inverse residual. `composed` must be the backward flow seeded at the
/// forward map's final positions.
pub fn volume_check(flow: &FlowMap, composed: Option<&FlowMap>, opts: VolumeOptions) -> Result<FlowQuality> {
    let m = flow
        .grid_m()
        .ok_or_else(|| Error::InvalidParameter("volume check needs seeds on an M x M grid".into()))?;
    if m < 16 {
        return Err(Error::InvalidParameter(format!("volume check needs M >= 16, got {m}")));
    }
    if opts.cells == 0 {
        return Err(Error::InvalidParameter("volume check needs at least one cell".into()));
    }
    let cells = opts.cells.min(m);
    let expected = flow.seeds().len() as f64 / (cells * cells) as f64;
    let compressibility = flow
        .positions()
        .iter()
        .map(|pos| cell_counts(pos, cells, opts.binning).into_iter().fold(0.0, f64::max) / expected)
        .fold(0.0, f64::max);
    let inverse_residual = match composed {
        None => 0.0,
        Some(c) => {
            if c.seeds().len() != flow.seeds().len() {
                return Err(Error::PathMismatch("composed flow has a different seed count".into()));
            }
            c.final_positions()
                .iter()
                .zip(flow.seeds())
                .map(|(a, b)| torus_distance(*a, *b))
                .fold(0.0, f64::max)
        }
    };
    Ok(FlowQuality { compressibility, inverse_residual })
}

/// Integrates `X_t^{-1}` starting from the forward endpoints `X_t(x)`.
pub fn compose_inverse(source: &dyn VelocitySource, forward: &FlowMap, opts: FlowOptions) -> Result<FlowMap> {
    if forward.direction() != Direction::Forward {
        return Err(Error::InvalidParameter("composition needs a forward flow".into()));
    }
    let t_end = *forward.times().last().unwrap();
    let steps = crate::dynamics::step_count(t_end, opts.dt)?;
    let reversed = crate::dynamics::Reversed::new(source, t_end);
    integrate_flow(
        &reversed,
        forward.final_positions(),
        t_end,
        FlowOptions { dt: opts.dt, record_every: steps.max(1) },
        Direction::Forward,
    )
    .map(|mut f| {
        // the reversed sweep is a backward map of the original field
        f.set_direction(Direction::Backward);
        f
    })
}

/// Forward flow, its composed inverse, and the resulting certificate.
pub fn certify(
    source: &dyn VelocitySource,
    m: usize,
    t_end: f64,
    opts: FlowOptions,
    volume: VolumeOptions,
) -> Result<(FlowMap, FlowQuality)> {
    let forward = integrate_flow(source, &super::flow::seed_grid(m), t_end, opts, Direction::Forward)?;
    let composed = compose_inverse(source, &forward, opts)?;
    let q = volume_check(&forward, Some(&composed), volume)?;
    Ok((forward, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FrozenVelocity;
    use crate::lagrangian::flow::seed_grid;
    use crate::spectral::{init, FourierGrid, SpectralVector};

    fn opts(binning: Binning, cells: usize) -> VolumeOptions {
        VolumeOptions { binning, cells }
    }

    #[test]
    fn identity_flow_is_volume_preserving() {
        let g = FourierGrid::new(16).unwrap();
        let src = FrozenVelocity::new(SpectralVector::zeros(&g));
        let flow = FlowOptions { dt: 0.1, record_every: 10 };
        for b in [Binning::NearestCell, Binning::CloudInCell] {
            for cells in [4, 16, 32] {
                let (_, q) = certify(&src, 32, 1.0, flow, opts(b, cells)).unwrap();
                assert!((q.compressibility - 1.0).abs() < 1e-12);
                assert_eq!(q.inverse_residual, 0.0);
            }
        }
    }

    #[test]
    fn shear_binning_noise_only() {
        let g = FourierGrid::new(16).unwrap();
        let src = FrozenVelocity::new(init::shear(&g));
        for m in [16, 32] {
            let f = integrate_flow(&src, &seed_grid(m), 1.0, FlowOptions { dt: 0.01, record_every: 100 }, Direction::Forward).unwrap();
            // direct count oracle: apply the analytic map and count
            let mapped: Vec<[f64; 2]> = seed_grid(m).iter().map(|x| [x[0] + x[1].sin(), x[1]]).collect();
            let oracle = cell_counts(&mapped, m, Binning::NearestCell).into_iter().fold(0.0, f64::max);
            assert!(oracle <= 1.0 + 4.0 / m as f64);
            for b in [Binning::NearestCell, Binning::CloudInCell] {
                for cells in [m, 16] {
                    let q = volume_check(&f, None, opts(b, cells)).unwrap();
                    assert!(q.compressibility <= 1.0 + 4.0 / m as f64, "{b:?} {}", q.compressibility);
                }
            }
        }
    }

    #[test]
    fn taylor_green_needs_coarse_cells() {
        let g = FourierGrid::new(16).unwrap();
        let src = FrozenVelocity::new(init::taylor_green(&g));
        let m = 64;
        let f = integrate_flow(&src, &seed_grid(m), 1.0, FlowOptions { dt: 1e-2, record_every: 20 }, Direction::Forward).unwrap();
        let q = volume_check(&f, None, VolumeOptions::default()).unwrap();
        assert!((q.compressibility - 1.0).abs() <= 8.0 / m as f64, "{}", q.compressibility);
        // one particle per cell sees the sheared lattice, not a volume change
        let fine = volume_check(&f, None, opts(Binning::NearestCell, m)).unwrap();
        assert!(fine.compressibility >= 2.0);
    }

    #[test]
    fn small_grids_rejected() {
        let g = FourierGrid::new(16).unwrap();
        let src = FrozenVelocity::new(init::shear(&g));
        let f = integrate_flow(&src, &seed_grid(8), 0.1, FlowOptions { dt: 0.1, record_every: 1 }, Direction::Forward).unwrap();
        assert!(volume_check(&f, None, VolumeOptions::default()).is_err());
        let f = integrate_flow(&src, &seed_grid(16), 0.1, FlowOptions { dt: 0.1, record_every: 1 }, Direction::Forward).unwrap();
        assert!(volume_check(&f, None, opts(Binning::CloudInCell, 0)).is_err());
    }
}
