use std::f64::consts::PI;

use crate::dynamics::{Reversed, VelocitySource};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{vector_norm, vector_norm_with, ModalField, NormKind, NormOptions};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `X_t`: solves `dX/dt = u_t(X)` from time 0.
    Forward,
    /// `X_t^{-1}`: for each recorded `t`, solves the time-reversed,
    /// sign-flipped system from `t` back to 0.
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// RK4 step.
    pub dt: f64,
    /// Record positions every this many steps (and always at the end).
    pub record_every: usize,
}

/// Particle trajectories of a velocity field.
///
/// `positions[i][s]` is the unwrapped position of seed `s` at `times[i]`.
#[derive(Clone, Debug)]
pub struct FlowMap {
    grid_m: Option<usize>,
    seeds: Vec<[f64; 2]>,
    times: Vec<f64>,
    positions: Vec<Vec<[f64; 2]>>,
    direction: Direction,
}

/// `m x m` seeds at the collocation points `2 pi (i, j) / m`, row-major.
pub fn seed_grid(m: usize) -> Vec<[f64; 2]> {
    let h = TWO_PI / m as f64;
    (0..m * m).map(|i| [(i / m) as f64 * h, (i % m) as f64 * h]).collect()
}

pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Distance on the torus with componentwise `min(|d|, 2 pi - |d|)`.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let c = |d: f64| {
        let r = d.rem_euclid(TWO_PI);
        r.min(TWO_PI - r)
    };
    c(a[0] - b[0]).hypot(c(a[1] - b[1]))
}

impl FlowMap {
    pub fn grid_m(&self) -> Option<usize> {
        self.grid_m
    }

    pub fn seeds(&self) -> &[[f64; 2]] {
        &self.seeds
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[Vec<[f64; 2]>] {
        &self.positions
    }

    /// The same flow restricted to its first and last record.
    pub fn endpoints(&self) -> FlowMap {
        let keep = if self.times.len() > 1 { vec![0, self.times.len() - 1] } else { vec![0] };
        FlowMap {
            grid_m: self.grid_m,
            seeds: self.seeds.clone(),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            positions: keep.iter().map(|&i| self.positions[i].clone()).collect(),
            direction: self.direction,
        }
    }

    pub(crate) fn set_direction(&mut self, d: Direction) {
        self.direction = d;
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn final_positions(&self) -> &[[f64; 2]] {
        self.positions.last().unwrap()
    }

    /// Final positions wrapped into `[0, 2 pi)^2`.
    pub fn wrapped_final(&self) -> Vec<[f64; 2]> {
        self.final_positions().iter().map(|p| [wrap(p[0]), wrap(p[1])]).collect()
    }

    /// The identity map on the given seeds.
    pub fn identity(seeds: Vec<[f64; 2]>, times: Vec<f64>, direction: Direction) -> Self {
        let positions = times.iter().map(|_| seeds.clone()).collect();
        Self { grid_m: None, seeds, times, positions, direction }
    }

    /// Flow snapshot rows `seed_i, seed_j, time, x1, x2`; `seed_i, seed_j` are
    /// grid indices for gridded seeds and the seed ordinal (with `seed_j = 0`) otherwise.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["seed_i", "seed_j", "time", "x1", "x2"])?;
        for (ti, t) in self.times.iter().enumerate() {
            for (s, p) in self.positions[ti].iter().enumerate() {
                let (i, j) = match self.grid_m {
                    Some(m) => (s / m, s % m),
                    None => (s, 0),
                };
                wr.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{t:.16e}"),
                    format!("{:.16e}", p[0]),
                    format!("{:.16e}", p[1]),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// JSON run manifest with `M`, `T`, `dt`, `direction`.
    pub fn manifest(&self, dt: f64) -> serde_json::Value {
        serde_json::json!({
            "M": self.grid_m,
            "seeds": self.seeds.len(),
            "T": self.times.last().copied().unwrap_or(0.0),
            "dt": dt,
            "records": self.times.len(),
            "direction": match self.direction { Direction::Forward => "forward", Direction::Backward => "backward" },
        })
    }
}

fn rk4_step(x: [f64; 2], h: f64, a: &ModalField, b: &ModalField, c: &ModalField) -> [f64; 2] {
    let k1 = a.eval2(x);
    let k2 = b.eval2([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
    let k3 = b.eval2([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
    let k4 = c.eval2([x[0] + h * k3[0], x[1] + h * k3[1]]);
    [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates all seeds over `[0, t_end]`, recording every `record_every` steps.
fn sweep(source: &dyn VelocitySource, seeds: &[[f64; 2]], steps: usize, opts: FlowOptions) -> (Vec<f64>, Vec<Vec<[f64; 2]>>) {
    let h = opts.dt;
    let mut times = vec![0.0];
    let mut records = vec![seeds.to_vec()];
    let mut x = seeds.to_vec();
    let autonomous = source.is_autonomous();
    let mut start = source.modal_at(0.0);
    for s in 0..steps {
        let t = s as f64 * h;
        let (mid, end) = if autonomous {
            (start.clone(), start.clone())
        } else {
            (source.modal_at(t + 0.5 * h), source.modal_at(t + h))
        };
        x = par::map_slice(&x, |&p| rk4_step(p, h, &start, &mid, &end));
        start = end;
        if (s + 1) % opts.record_every == 0 || s + 1 == steps {
            times.push((s + 1) as f64 * h);
            records.push(x.clone());
        }
    }
    (times, records)
}

fn warn_if_coarse(source: &dyn VelocitySource, dt: f64) {
    let umax = vector_norm(&source.velocity_at(0.0), NormKind::Sup).unwrap_or(0.0);
    let limit = 0.5 * source.grid().spacing();
    if dt * umax > limit {
        log::warn!("flow step dt * max|u| = {:.3e} exceeds {:.3e}; trajectories may be inaccurate", dt * umax, limit);
    }
}

/// Integrates particle trajectories of `source` over `[0, t_end]`.
pub fn integrate_flow(
    source: &dyn VelocitySource,
    seeds: &[[f64; 2]],
    t_end: f64,
    opts: FlowOptions,
    direction: Direction,
) -> Result<FlowMap> {
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be >= 1".into()));
    }
    if t_end > source.end_time() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "velocity is defined up to t = {}, requested {t_end}",
            source.end_time()
        )));
    }
    let steps = crate::dynamics::step_count(t_end, opts.dt)?;
    warn_if_coarse(source, opts.dt);
    let m = (seeds.len() as f64).sqrt().round() as usize;
    let grid_m = (m * m == seeds.len() && seeds == seed_grid(m).as_slice()).then_some(m);
    let (times, positions) = match direction {
        Direction::Forward => sweep(source, seeds, steps, opts),
        Direction::Backward if source.is_autonomous() => sweep(&Reversed::new(source, 0.0), seeds, steps, opts),
        Direction::Backward => {
            // X_t^{-1} needs its own integration from each recorded time back to 0.
            let mut times = vec![0.0];
            let mut positions = vec![seeds.to_vec()];
            let mut s = opts.record_every.min(steps);
            while s <= steps && steps > 0 {
                let t = s as f64 * opts.dt;
                let reversed = Reversed::new(source, t);
                let (_, recs) = sweep(&reversed, seeds, s, FlowOptions { dt: opts.dt, record_every: s });
                times.push(t);
                positions.push(recs.last().unwrap().clone());
                if s == steps {
                    break;
                }
                s = (s + opts.record_every).min(steps);
            }
            (times, positions)
        }
    };
    Ok(FlowMap { grid_m, seeds: seeds.to_vec(), times, positions, direction })
}

/// Discrete `L2(dx)` over seeds of the sup-over-time torus distance between
/// two flows. Each seed carries weight `(2 pi)^2 / seeds`, i.e. `(2 pi / M)^2`
/// on an `M x M` grid.
pub fn flow_distance(x: &FlowMap, y: &FlowMap) -> Result<f64> {
    if x.seeds.len() != y.seeds.len()
        || x.seeds.iter().zip(&y.seeds).any(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > 1e-12)
    {
        return Err(Error::PathMismatch("flows have different seeds".into()));
    }
    if x.times.len() != y.times.len() || x.times.iter().zip(&y.times).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(Error::PathMismatch("flows have different record times".into()));
    }
    let weight = TWO_PI * TWO_PI / x.seeds.len() as f64;
    let sum: f64 = (0..x.seeds.len())
        .map(|s| {
            let sup = (0..x.times.len())
                .map(|t| torus_distance(x.positions[t][s], y.positions[t][s]))
                .fold(0.0, f64::max);
            sup * sup
        })
        .sum();
    Ok((weight * sum).sqrt())
}

/// Right-hand side of the Grönwall comparison between the flows of `u` and
/// `v` on `[0, t_end]`:
/// `exp(int_0^T ||grad u||_inf dt) * T * sup_t ||u_t - v_t||_{L2}`,
/// with both factors sampled at `samples + 1` uniform times. The Frobenius
/// sup norm bounds the Lipschitz constant from above, so the bound stays valid.
pub fn gronwall_bound(u: &dyn VelocitySource, v: &dyn VelocitySource, t_end: f64, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample interval".into()));
    }
    let h = t_end / samples as f64;
    let opts = NormOptions { oversample: true };
    let vals = par::map_range(samples + 1, |i| -> Result<(f64, f64)> {
        let t = i as f64 * h;
        let ut = u.velocity_at(t);
        let mut vt = v.velocity_at(t);
        if vt.grid().n() != ut.grid().n() {
            vt = vt.resample(ut.grid());
        }
        let grad = vector_norm_with(&ut, NormKind::GradSup, opts)?;
        let diff = vector_norm(&ut.sub(&vt)?, NormKind::L2)?;
        Ok((grad, diff))
    });
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let grads: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let sup = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(crate::dynamics::trapezoid(&grads, h).exp() * t_end * sup)
}
