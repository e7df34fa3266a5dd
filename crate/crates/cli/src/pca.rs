//! Two-component PCA of cloud points in H-weighted coordinates, for
//! plot-ready projections. Small symmetric eigenproblem via cyclic Jacobi.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaProjection {
    pub explained: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[r * n + c] * a[r * n + c];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (eigenvalues, v)
}

/// Project `points` (rows of equal length) onto their first two principal
/// components.
pub fn project_2d(points: &[Vec<f64>]) -> PcaProjection {
    if points.is_empty() {
        return PcaProjection {
            explained: [0.0, 0.0],
            points: Vec::new(),
        };
    }
    let dim = points[0].len();
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, &x) in mean.iter_mut().zip(p) {
            *m += x / n;
        }
    }
    let mut cov = vec![0.0; dim * dim];
    for p in points {
        for r in 0..dim {
            let dr = p[r] - mean[r];
            for c in r..dim {
                cov[r * dim + c] += dr * (p[c] - mean[c]) / n;
            }
        }
    }
    for r in 0..dim {
        for c in 0..r {
            cov[r * dim + c] = cov[c * dim + r];
        }
    }
    let (eigenvalues, vectors) = jacobi_eigen(cov, dim);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    let total: f64 = eigenvalues.iter().map(|e| e.max(0.0)).sum::<f64>().max(1e-300);
    let (i1, i2) = (order[0], *order.get(1).unwrap_or(&order[0]));
    let projected = points
        .iter()
        .map(|p| {
            let mut x = 0.0;
            let mut y = 0.0;
            for k in 0..dim {
                let d = p[k] - mean[k];
                x += d * vectors[k * dim + i1];
                y += d * vectors[k * dim + i2];
            }
            [x, y]
        })
        .collect();
    PcaProjection {
        explained: [
            eigenvalues[i1].max(0.0) / total,
            eigenvalues[i2].max(0.0) / total,
        ],
        points: projected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_dominant_direction() {
        // points spread along (1, 1, 0) with small noise in the others
        let mut points = Vec::new();
        for i in 0..50 {
            let t = i as f64 / 10.0 - 2.5;
            points.push(vec![t, t, 0.01 * ((i * 7 % 11) as f64 - 5.0)]);
        }
        let proj = project_2d(&points);
        assert!(proj.explained[0] > 0.95, "{:?}", proj.explained);
        // first components roughly sorted with t
        let xs: Vec<f64> = proj.points.iter().map(|p| p[0]).collect();
        let increasing = xs.windows(2).filter(|w| w[1] > w[0]).count();
        let decreasing = xs.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(increasing == 49 || decreasing == 49);
    }
}
