//! Nelder-Mead downhill simplex with per-axis convergence tolerances.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct NelderMead<T> {
    /// Reflection, expansion, contraction and shrink coefficients.
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    pub max_iterations: usize,
    /// Converged when every vertex is within `tolerance[i]` of the best along axis `i`.
    pub tolerance: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> NelderMead<T> {
    /// Standard coefficients (1, 2, 0.5, 0.5).
    pub fn new(tolerance: Vec<T>, max_iterations: usize) -> Self {
        Self {
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
            max_iterations,
            tolerance,
        }
    }

    /// Minimizes `f` from `start` with an axis-aligned initial simplex of
    /// edge lengths `steps`. Non-finite values are treated as +∞. The start
    /// point is a vertex, so the result is never worse than `f(start)`.
    pub fn minimize<F: FnMut(&[T]) -> T>(&self, mut f: F, start: &[T], steps: &[T]) -> SimplexResult<T> {
        let n = start.len();
        assert_eq!(steps.len(), n);
        assert_eq!(self.tolerance.len(), n);
        let mut eval = |x: &[T]| {
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                T::infinity()
            }
        };
        let mut pts: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        pts.push(start.to_vec());
        for i in 0..n {
            let mut p = start.to_vec();
            p[i] += steps[i];
            pts.push(p);
        }
        let mut vals: Vec<T> = pts.iter().map(|p| eval(p)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            // stable sort keeps the earlier vertex first on ties, so the start wins
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            if self.is_converged(&pts) {
                converged = true;
                break;
            }
            iterations += 1;

            let inv = T::one() / T::from_usize_lossy(n);
            let centroid: Vec<T> = (0..n)
                .map(|j| pts[..n].iter().fold(T::zero(), |a, p| a + p[j]) * inv)
                .collect();
            let along = |coef: T, worst: &[T]| -> Vec<T> { (0..n).map(|j| centroid[j] + coef * (worst[j] - centroid[j])).collect() };

            let xr = along(-self.reflection, &pts[n]);
            let fr = eval(&xr);
            if fr < vals[0] {
                let xe = along(-self.reflection * self.expansion, &pts[n]);
                let fe = eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-self.reflection * self.contraction, &pts[n]);
                let fc = eval(&xc);
                (xc, if fc <= fr { Some(fc) } else { None })
            } else {
                let xc = along(self.contraction, &pts[n]);
                let fc = eval(&xc);
                (xc, if fc < vals[n] { Some(fc) } else { None })
            };
            if let Some(fc) = fc {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            let best = pts[0].clone();
            for i in 1..=n {
                for j in 0..n {
                    pts[i][j] = best[j] + self.shrink * (pts[i][j] - best[j]);
                }
                vals[i] = eval(&pts[i]);
            }
        }
        let best = (0..=n)
            .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        SimplexResult {
            point: pts[best].clone(),
            value: vals[best],
            iterations,
            converged,
        }
    }

    fn is_converged(&self, pts: &[Vec<T>]) -> bool {
        pts[1..]
            .iter()
            .all(|p| p.iter().zip(&pts[0]).zip(&self.tolerance).all(|((a, b), t)| (*a - *b).abs() < *t))
    }
}
