//! Coarse-to-fine grid maximisation over a coupling `g` and a time `t`.
//!
//! Objectives are evaluated a row at a time: one `g` with many `t`, because
//! every engine here diagonalizes once per coupling and then evolves cheaply.

use crate::error::Result;

/// Grid of `points` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), points).into_iter().map(f64::exp).collect()
}

/// Objective values on a `gs × ts` grid, `values[i][j] = f(gs[i], ts[j])`.
#[derive(Clone, Debug)]
pub struct GridScan {
    pub gs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GridScan {
    pub fn run<F>(f: &F, gs: &[f64], ts: &[f64]) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    {
        let values = gs.iter().map(|&g| f(g, ts)).collect::<Result<Vec<_>>>()?;
        Ok(GridScan {
            gs: gs.to_vec(),
            ts: ts.to_vec(),
            values,
        })
    }

    pub fn evaluations(&self) -> usize {
        self.gs.len() * self.ts.len()
    }

    /// `(g, t, value)` of the largest entry; ties go to the smallest indices.
    pub fn best(&self) -> (f64, f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        (self.gs[best.0], self.ts[best.1], best.2)
    }

    /// Up to `k` grid points that are no smaller than any of their (up to
    /// eight) neighbours, best first.
    pub fn local_maxima(&self, k: usize) -> Vec<(f64, f64, f64)> {
        let (ng, nt) = (self.gs.len(), self.ts.len());
        let mut found = Vec::new();
        for i in 0..ng {
            for j in 0..nt {
                let v = self.values[i][j];
                let mut peak = true;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) != (0, 0)
                            && (0..ng as i64).contains(&a)
                            && (0..nt as i64).contains(&b)
                            && self.values[a as usize][b as usize] > v
                        {
                            peak = false;
                        }
                    }
                }
                if peak {
                    found.push((self.gs[i], self.ts[j], v));
                }
            }
        }
        found.sort_by(|a, b| b.2.total_cmp(&a.2));
        found.truncate(k);
        found
    }
}

/// Result of a refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub g: f64,
    pub t: f64,
    pub value: f64,
    pub evaluations: usize,
    /// The last level improved by less than the tolerance and its best point
    /// was interior to the level's box.
    pub converged: bool,
    /// The optimum sits on the edge of the global search bounds.
    pub at_bounds: bool,
}

/// Search box shared by the refinement levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refinement {
    pub g_bounds: [f64; 2],
    pub t_bounds: [f64; 2],
    /// Points per axis at every level (made odd so the centre is sampled).
    pub points: [usize; 2],
    pub levels: usize,
    pub tol: f64,
}

/// Repeatedly grids a box around the incumbent. The half-widths shrink to
/// one grid spacing when the best point is interior; otherwise the box is
/// only recentred, so the search can follow a ridge.
pub fn refine<F>(f: &F, start: (f64, f64, f64), half: [f64; 2], r: &Refinement) -> Result<Optimum>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let odd = |p: usize| if p % 2 == 0 { p + 1 } else { p.max(3) };
    let (pg, pt) = (odd(r.points[0]), odd(r.points[1]));
    let (mut g, mut t, mut value) = start;
    let mut half = half;
    let mut evaluations = 0;
    let mut converged = false;
    for _ in 0..r.levels {
        let clip = |x: f64, b: [f64; 2]| x.clamp(b[0], b[1]);
        let gs = linspace(clip(g - half[0], r.g_bounds), clip(g + half[0], r.g_bounds), pg);
        let ts = linspace(clip(t - half[1], r.t_bounds), clip(t + half[1], r.t_bounds), pt);
        let scan = GridScan::run(f, &gs, &ts)?;
        evaluations += scan.evaluations();
        let (bg, bt, bv) = scan.best();
        let interior = bg > gs[0] && bg < gs[pg - 1] && bt > ts[0] && bt < ts[pt - 1];
        let gain = bv - value;
        if bv > value {
            (g, t, value) = (bg, bt, bv);
        }
        converged = interior && gain.abs() <= r.tol;
        if interior {
            half = [half[0] * 2.0 / (pg - 1) as f64, half[1] * 2.0 / (pt - 1) as f64];
        }
    }
    let edge = |x: f64, b: [f64; 2], h: f64| (x - b[0]).abs() <= h || (b[1] - x).abs() <= h;
    let at_bounds = edge(g, r.g_bounds, 1e-12 * r.g_bounds[1]) || edge(t, r.t_bounds, 1e-12 * r.t_bounds[1]);
    Ok(Optimum {
        g,
        t,
        value,
        evaluations,
        converged: converged && !at_bounds,
        at_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(g: f64, ts: &[f64]) -> Result<Vec<f64>> {
        Ok(ts.iter().map(|t| -(g - 0.4123).powi(2) - 0.1 * (t - 7.77).powi(2)).collect())
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1e-3, 1.0, 4);
        assert!((l[1] - 1e-2).abs() < 1e-15 && (l[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refine_finds_smooth_peak() {
        let scan = GridScan::run(&bowl, &linspace(0.0, 1.0, 11), &linspace(0.0, 20.0, 21)).unwrap();
        let start = scan.best();
        let r = Refinement {
            g_bounds: [0.0, 1.0],
            t_bounds: [0.0, 20.0],
            points: [11, 11],
            levels: 6,
            tol: 1e-9,
        };
        let o = refine(&bowl, start, [0.1, 1.0], &r).unwrap();
        assert!((o.g - 0.4123).abs() < 1e-5 && (o.t - 7.77).abs() < 1e-4);
        assert!(o.converged && !o.at_bounds);
    }

    #[test]
    fn optimum_on_bounds_is_flagged() {
        let edge = |g: f64, ts: &[f64]| -> Result<Vec<f64>> { Ok(ts.iter().map(|t| g - (t - 1.0).powi(2)).collect()) };
        let r = Refinement {
            g_bounds: [0.0, 1.0],
            t_bounds: [0.0, 2.0],
            points: [5, 5],
            levels: 3,
            tol: 1e-9,
        };
        let o = refine(&edge, (0.9, 1.0, 0.9), [0.2, 0.5], &r).unwrap();
        assert_eq!(o.g, 1.0);
        assert!(o.at_bounds && !o.converged);
    }

    #[test]
    fn local_maxima_sorted() {
        let f = |g: f64, ts: &[f64]| -> Result<Vec<f64>> { Ok(ts.iter().map(|t| (t * 3.0).sin() + 0.01 * t - (g - 0.5).powi(2)).collect()) };
        let scan = GridScan::run(&f, &linspace(0.0, 1.0, 11), &linspace(0.0, 10.0, 201)).unwrap();
        let peaks = scan.local_maxima(3);
        assert_eq!(peaks.len(), 3);
        assert!(peaks[0].2 >= peaks[1].2 && peaks[1].2 >= peaks[2].2);
        assert!(peaks.iter().all(|p| (p.0 - 0.5).abs() < 1e-12));
    }
}
