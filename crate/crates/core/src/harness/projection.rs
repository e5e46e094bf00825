//! Two-component principal-axis projection for plotting text runs.

const POWER_ITERS: usize = 200;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Leading eigenvector of `X^T X` for centered rows `x`, by power iteration
/// from a fixed start; the sign makes its largest component positive.
fn leading_axis(x: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|k| 1.0 + (k as f64 * 0.618_034).fract()).collect();
    for _ in 0..POWER_ITERS {
        let mut next = vec![0.0; dim];
        for row in x {
            let s = dot(row, &v);
            for (n, r) in next.iter_mut().zip(row) {
                *n += s * r;
            }
        }
        let norm = dot(&next, &next).sqrt();
        if norm == 0.0 {
            return vec![0.0; dim];
        }
        v = next.into_iter().map(|c| c / norm).collect();
    }
    let lead = v.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    v
}

/// Coordinates of each point on the first two principal axes.
pub fn project_2d(points: &[&[f64]]) -> Vec<(f64, f64)> {
    let Some(dim) = points.first().map(|p| p.len()) else {
        return Vec::new();
    };
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, c) in mean.iter_mut().zip(p.iter()) {
            *m += c / points.len() as f64;
        }
    }
    let mut x: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(c, m)| c - m).collect())
        .collect();
    let first = leading_axis(&x, dim);
    let xs: Vec<f64> = x.iter().map(|r| dot(r, &first)).collect();
    for (row, s) in x.iter_mut().zip(&xs) {
        for (r, f) in row.iter_mut().zip(&first) {
            *r -= s * f;
        }
    }
    let second = leading_axis(&x, dim);
    xs.into_iter().zip(x.iter().map(|r| dot(r, &second))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planar_layout() {
        // Points in a plane embedded in 4D; distances must be preserved.
        let raw = [[0.0, 0.0], [4.0, 0.0], [0.0, 1.0], [4.0, 1.0], [2.0, 0.5]];
        let lifted: Vec<Vec<f64>> = raw.iter().map(|p| vec![p[0], 0.0, p[1], 0.0]).collect();
        let refs: Vec<&[f64]> = lifted.iter().map(Vec::as_slice).collect();
        let out = project_2d(&refs);
        for a in 0..raw.len() {
            for b in 0..raw.len() {
                let d0 = ((raw[a][0] - raw[b][0]).powi(2) + (raw[a][1] - raw[b][1]).powi(2)).sqrt();
                let d1 = ((out[a].0 - out[b].0).powi(2) + (out[a].1 - out[b].1).powi(2)).sqrt();
                assert!((d0 - d1).abs() < 1e-6);
            }
        }
        let spread = |f: fn(&(f64, f64)) -> f64| out.iter().map(|q| f(q).powi(2)).sum::<f64>();
        assert!(spread(|q| q.0) > spread(|q| q.1));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(project_2d(&[]).is_empty());
        let p = [1.0, 2.0];
        assert_eq!(project_2d(&[&p, &p]), vec![(0.0, 0.0), (0.0, 0.0)]);
    }
}
