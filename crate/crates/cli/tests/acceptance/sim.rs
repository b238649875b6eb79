//! Random executions of a hybrid automaton: RK4 flow with exact event times
//! for constant-rate rows, eager nondeterministic jumps.

use rand::Rng;
use subspace_reach::{Condition, HybridAutomaton};

const EPS: f64 = 1e-9;
/// Zero-time jumps allowed in a row before an execution is abandoned.
const MAX_BURST: usize = 1000;

/// A state reached at time `step * delta`.
#[derive(Debug, Clone)]
pub struct Sample {
    pub location: usize,
    pub step: usize,
    pub x: Vec<f64>,
}

pub struct Simulator<'a> {
    h: &'a HybridAutomaton,
    delta: f64,
    horizon: f64,
    outgoing: Vec<Vec<usize>>,
    /// Per location, variables with `A` row zero.
    constant_rate: Vec<Vec<bool>>,
    /// Per location, `(row, column, value)` of the nonzero entries of `A`.
    sparse: Vec<Vec<(usize, usize, f64)>>,
}

impl<'a> Simulator<'a> {
    pub fn new(h: &'a HybridAutomaton, delta: f64, horizon: f64) -> Self {
        let constant_rate = h
            .locations
            .iter()
            .map(|l| {
                (0..h.dim())
                    .map(|i| l.flow.a.row(i).iter().all(|&a| a == 0.0))
                    .collect()
            })
            .collect();
        let n = h.dim();
        let sparse = h
            .locations
            .iter()
            .map(|l| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| l.flow.a.row(i)[j] != 0.0)
                    .map(|(i, j)| (i, j, l.flow.a.row(i)[j]))
                    .collect()
            })
            .collect();
        Simulator {
            h,
            delta,
            horizon,
            outgoing: h.outgoing(),
            constant_rate,
            sparse,
        }
    }

    /// A random point of a random initial condition.
    pub fn initial_state<R: Rng>(&self, rng: &mut R) -> Option<(usize, Vec<f64>)> {
        let (name, cond) = &self.h.init[rng.gen_range(0..self.h.init.len())];
        let loc = self.h.location_index(name)?;
        let n = self.h.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hi[i] = cond.support(&e);
            e[i] = -1.0;
            lo[i] = -cond.support(&e);
        }
        for _ in 0..1000 {
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| if b > a { rng.gen_range(a..=b) } else { a })
                .collect();
            if cond.contains(&x, EPS) && self.h.locations[loc].invariant.contains(&x, EPS) {
                return Some((loc, x));
            }
        }
        None
    }

    /// One execution; states are recorded at every multiple of `delta`,
    /// before and after the jumps taken there.
    pub fn execute<R: Rng>(&self, rng: &mut R, loc: usize, x: Vec<f64>) -> Vec<Sample> {
        let (mut loc, mut x, mut tau) = (loc, x, 0.0_f64);
        let mut out = Vec::new();
        let mut burst = 0;
        loop {
            self.record(&mut out, loc, &x, tau);
            let enabled = self.enabled(loc, &x);
            if !enabled.is_empty() {
                burst += 1;
                if burst > MAX_BURST {
                    return out;
                }
                let j = &self.h.jumps[enabled[rng.gen_range(0..enabled.len())]];
                x = j
                    .reset
                    .a
                    .mul_vec(&x)
                    .iter()
                    .zip(&j.reset.c)
                    .map(|(a, c)| a + c)
                    .collect();
                loc = self.h.location_index(&j.target).expect("resolved target");
                continue;
            }
            burst = 0;
            if tau >= self.horizon - EPS {
                return out;
            }
            let h = self.step_size(loc, &x, tau);
            if h <= EPS * 1e-3 {
                // Time-locked: no jump enabled and the invariant forbids flow.
                return out;
            }
            x = self.rk4(loc, &x, h);
            tau += h;
            let k = (tau / self.delta).round();
            if (tau - k * self.delta).abs() < EPS {
                tau = k * self.delta;
            }
            if !self.h.locations[loc].invariant.contains(&x, 1e-7) {
                return out;
            }
        }
    }

    fn record(&self, out: &mut Vec<Sample>, loc: usize, x: &[f64], tau: f64) {
        let k = (tau / self.delta).round();
        if (tau - k * self.delta).abs() < EPS && k >= 0.0 {
            out.push(Sample {
                location: loc,
                step: k as usize,
                x: x.to_vec(),
            });
        }
    }

    fn enabled(&self, loc: usize, x: &[f64]) -> Vec<usize> {
        self.outgoing[loc]
            .iter()
            .copied()
            .filter(|&k| {
                let j = &self.h.jumps[k];
                if !j.guard.contains(x, EPS) {
                    return false;
                }
                let y: Vec<f64> = j
                    .reset
                    .a
                    .mul_vec(x)
                    .iter()
                    .zip(&j.reset.c)
                    .map(|(a, c)| a + c)
                    .collect();
                let t = self.h.location_index(&j.target).expect("resolved target");
                self.h.locations[t].invariant.contains(&y, EPS)
            })
            .collect()
    }

    /// `(r·x − bound, r·b)` when every variable of the row has a constant rate.
    fn linear_row(&self, loc: usize, row: &[f64], bound: f64, x: &[f64]) -> Option<(f64, f64)> {
        let rate = &self.constant_rate[loc];
        let b = &self.h.locations[loc].flow.b;
        let mut c0 = -bound;
        let mut c1 = 0.0;
        for (i, &a) in row.iter().enumerate() {
            if a != 0.0 {
                if !rate[i] {
                    return None;
                }
                c0 += a * x[i];
                c1 += a * b[i];
            }
        }
        Some((c0, c1))
    }

    /// Earliest time at which all constant-rate rows of `g` hold.
    fn entry_time(&self, loc: usize, g: &Condition, x: &[f64]) -> Option<f64> {
        let mut t = 0.0_f64;
        for (r, b) in g.rows() {
            if let Some((c0, c1)) = self.linear_row(loc, r, b, x) {
                if c0 > EPS {
                    if c1 >= 0.0 {
                        return None;
                    }
                    t = t.max(-c0 / c1);
                }
            }
        }
        Some(t)
    }

    fn step_size(&self, loc: usize, x: &[f64], tau: f64) -> f64 {
        let mut h = (self.delta / 100.0).min(self.horizon - tau);
        let next_grid = ((tau / self.delta).floor() + 1.0) * self.delta - tau;
        if next_grid > EPS {
            h = h.min(next_grid);
        }
        for (r, b) in self.h.locations[loc].invariant.rows() {
            if let Some((c0, c1)) = self.linear_row(loc, r, b, x) {
                if c1 > 0.0 {
                    h = h.min((-c0 / c1).max(0.0));
                }
            }
        }
        for &k in &self.outgoing[loc] {
            if let Some(t) = self.entry_time(loc, &self.h.jumps[k].guard, x) {
                if t > EPS {
                    h = h.min(t);
                }
            }
        }
        h
    }

    fn rk4(&self, loc: usize, x: &[f64], h: f64) -> Vec<f64> {
        let f = &self.h.locations[loc].flow;
        let nz = &self.sparse[loc];
        let der = |y: &[f64]| -> Vec<f64> {
            let mut d = f.b.clone();
            for &(i, j, a) in nz {
                d[i] += a * y[j];
            }
            d
        };
        let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = der(x);
        let k2 = der(&axpy(x, &k1, h / 2.0));
        let k3 = der(&axpy(x, &k2, h / 2.0));
        let k4 = der(&axpy(x, &k3, h));
        let rate = &self.constant_rate[loc];
        (0..x.len())
            .map(|i| {
                if rate[i] {
                    x[i] + h * f.b[i]
                } else {
                    x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                }
            })
            .collect()
    }
}
