//! Sup-norm estimation over subintervals of (0,1] by dense sampling with a
//! golden-section refinement pass around the sample argmax.
//!
//! Intervals with a singular left endpoint at 0 are sampled log-spaced down
//! to `SINGULAR_FLOOR`; suprema attained in the limit x -> 0 are then
//! recovered to ~1e-10 absolute for the coefficient quotients arising here.

/// Smallest abscissa used when an interval is open at the degenerate end 0.
pub const SINGULAR_FLOOR: f64 = 1e-20;

/// Base sampling resolution of the refinement algorithm.
pub const BASE_POINTS: usize = 10_000;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
pub struct SupResult {
    pub value: f64,
    pub location: f64,
}

/// Sample grid for an interval (lo, hi]: log-spaced toward 0 when lo == 0,
/// uniform otherwise. Both variants include the right endpoint.
pub fn sample_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    let lo = lo.max(SINGULAR_FLOOR);
    let mut grid = Vec::with_capacity(points);
    if lo <= SINGULAR_FLOOR {
        let (llo, lhi) = (lo.ln(), hi.ln());
        for i in 0..points {
            let t = i as f64 / (points - 1) as f64;
            grid.push((llo + t * (lhi - llo)).exp());
        }
        // exact right endpoint, exp/ln round trips are not
        *grid.last_mut().unwrap() = hi;
    } else {
        for i in 0..points {
            let t = i as f64 / (points - 1) as f64;
            grid.push(lo + t * (hi - lo));
        }
    }
    grid
}

/// sup |f| over (lo, hi] with `points` base samples plus golden-section
/// refinement in the bracket around the sample argmax.
pub fn sup_abs(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> SupResult {
    let grid = sample_grid(lo, hi, points);
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x).abs();
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    // Refine inside the bracket of neighbouring samples; stay on the sampled
    // domain so limits at the open endpoint are approached consistently.
    let bl = grid[best_idx.saturating_sub(1)];
    let br = grid[(best_idx + 1).min(grid.len() - 1)];
    let refined = golden_max(|x| f(x).abs(), bl, br);
    if refined.value > best {
        refined
    } else {
        SupResult { value: best, location: grid[best_idx] }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> SupResult {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..120 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        SupResult { value: f1, location: x1 }
    } else {
        SupResult { value: f2, location: x2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interior_maximum_is_refined() {
        // |sin(pi x)| on (0.2, 0.9] peaks at 0.5.
        let r = sup_abs(|x| (std::f64::consts::PI * x).sin(), 0.2, 0.9, 1000);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.location, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn endpoint_maximum_is_exact() {
        let r = sup_abs(|x| x * x, 0.1, 0.7, 1000);
        assert_relative_eq!(r.value, 0.49, max_relative = 1e-13);
    }

    #[test]
    fn limit_at_degenerate_endpoint_is_approached() {
        // 1/2 - sqrt(x)/2 has sup 1/2 in the limit x -> 0+.
        let r = sup_abs(|x| 0.5 - 0.5 * x.sqrt(), 0.0, 1.0, BASE_POINTS);
        assert!((r.value - 0.5).abs() < 1e-9);
    }
}
