//! Exact star discrepancy in one and two dimensions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest point set accepted by the quadratic-time 2-d routine.
pub const MAX_POINTS_2D: usize = 1 << 14;

/// `N` points in `[0,1)^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Real> PointSet<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("point dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(bad) = coords
            .iter()
            .find(|&&c| !(c >= T::zero() && c < T::one()))
        {
            return Err(Error::Domain(format!("coordinate {bad} outside [0,1)")));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(points: &[Vec<T>]) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        Self::new(dim, points.concat())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }
    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

/// Cyclic overlapping pairs `(v_i, v_{(i+1) mod n})` of a full period.
pub fn overlapping_pairs<T: Real>(values: &[T]) -> Result<PointSet<T>> {
    let n = values.len();
    let coords = (0..n)
        .flat_map(|i| [values[i], values[(i + 1) % n]])
        .collect();
    PointSet::new(2, coords)
}

/// Dispatches on the dimension of the set.
pub fn star_discrepancy<T: Real>(points: &PointSet<T>) -> Result<T> {
    match points.dim() {
        1 => star_discrepancy_1d(points),
        2 => star_discrepancy_2d(points),
        d => Err(Error::Domain(format!(
            "exact star discrepancy is only available for d <= 2 (got {d})"
        ))),
    }
}

/// `max_i max(i/N - u_(i), u_(i) - (i-1)/N)` over the sorted sample.
pub fn star_discrepancy_1d<T: Real>(points: &PointSet<T>) -> Result<T> {
    if points.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: points.dim(),
        });
    }
    if points.is_empty() {
        return Err(Error::Domain("star discrepancy of an empty set".into()));
    }
    let mut u = points.coords().to_vec();
    u.sort_by(|a, b| a.partial_cmp(b).expect("coordinates are finite"));
    let n = T::from_usize(u.len()).unwrap();
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = T::from_usize(i).unwrap();
            ((i + T::one()) / n - x).max(x - i / n)
        })
        .fold(T::zero(), T::max);
    Ok(d)
}

/// Exact 2-d star discrepancy by sweeping the critical grid.
///
/// The supremum of `count/N - vol` is attained at closed boxes whose
/// corner coordinates are point coordinates; the supremum of
/// `vol - count/N` at half-open boxes whose corners are point coordinates
/// or 1. Both are evaluated on the union grid in `O(N^2)`.
pub fn star_discrepancy_2d<T: Real>(points: &PointSet<T>) -> Result<T> {
    if points.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: points.dim(),
        });
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::Domain("star discrepancy of an empty set".into()));
    }
    if n > MAX_POINTS_2D {
        return Err(Error::Size(format!(
            "{n} points exceeds the 2-d limit of {MAX_POINTS_2D}; subsample first"
        )));
    }
    let cmp = |a: &T, b: &T| a.partial_cmp(b).expect("coordinates are finite");
    let grid = |axis: usize| {
        let mut g: Vec<T> = points.points().map(|p| p[axis]).collect();
        g.push(T::one());
        g.sort_by(cmp);
        g.dedup();
        g
    };
    let xs = grid(0);
    let ys = grid(1);
    let y_rank = |y: T| ys.binary_search_by(|g| cmp(g, &y)).expect("y on grid");

    let mut by_x: Vec<(T, usize)> = points.points().map(|p| (p[0], y_rank(p[1]))).collect();
    by_x.sort_by(|a, b| cmp(&a.0, &b.0));

    let nf = T::from_usize(n).unwrap();
    // per y-rank counts of points with x < a_x (open) and x <= a_x (closed)
    let mut open = vec![0usize; ys.len()];
    let mut closed = vec![0usize; ys.len()];
    let (mut lt, mut le) = (0usize, 0usize);
    let mut worst = T::zero();
    for &ax in &xs {
        while lt < n && by_x[lt].0 < ax {
            open[by_x[lt].1] += 1;
            lt += 1;
        }
        while le < n && by_x[le].0 <= ax {
            closed[by_x[le].1] += 1;
            le += 1;
        }
        let (mut below, mut at_or_below) = (0usize, 0usize);
        for (r, &ay) in ys.iter().enumerate() {
            at_or_below += closed[r];
            let vol = ax * ay;
            let over = T::from_usize(at_or_below).unwrap() / nf - vol;
            let under = vol - T::from_usize(below).unwrap() / nf;
            worst = worst.max(over).max(under);
            below += open[r];
        }
    }
    Ok(worst.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps2(pts: &[(f64, f64)]) -> PointSet<f64> {
        PointSet::new(2, pts.iter().flat_map(|&(x, y)| [x, y]).collect()).unwrap()
    }

    #[test]
    fn one_d_examples() {
        let p = PointSet::new(1, vec![0.5]).unwrap();
        assert_eq!(star_discrepancy_1d(&p).unwrap(), 0.5);
        let p = PointSet::new(1, (1..=4).map(|i| (2 * i - 1) as f64 / 8.0).collect()).unwrap();
        assert!((star_discrepancy_1d(&p).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn single_centre_point_2d() {
        let d = star_discrepancy_2d(&ps2(&[(0.5, 0.5)])).unwrap();
        assert!((d - 0.75).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let e = PointSet::<f64>::new(1, vec![]).unwrap();
        assert!(matches!(star_discrepancy_1d(&e), Err(Error::Domain(_))));
        let e = PointSet::<f64>::new(2, vec![]).unwrap();
        assert!(matches!(star_discrepancy_2d(&e), Err(Error::Domain(_))));
        assert!(PointSet::new(1, vec![1.0f64]).is_err());
        let big = PointSet::new(2, vec![0.25f64; 2 * (MAX_POINTS_2D + 1)]).unwrap();
        assert!(matches!(star_discrepancy_2d(&big), Err(Error::Size(_))));
        let p3 = PointSet::new(3, vec![0.1f64; 3]).unwrap();
        assert!(star_discrepancy(&p3).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        let pts: Vec<f32> = vec![0.1, 0.7, 0.4, 0.2, 0.9, 0.55];
        let d32 = star_discrepancy_2d(&PointSet::new(2, pts.clone()).unwrap()).unwrap();
        let d64 = star_discrepancy_2d(
            &PointSet::new(2, pts.iter().map(|&x| x as f64).collect()).unwrap(),
        )
        .unwrap();
        assert!((d32 as f64 - d64).abs() < 1e-6);
    }
}
