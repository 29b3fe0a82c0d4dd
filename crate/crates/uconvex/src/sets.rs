//! Iterated-geodesic convex hull approximations, distance to a point cloud
//! and metric projection onto geodesic segments.
//!
//! The convex hull of a generator set is approached by the iteration
//! `G_n = ⋃_{x,y ∈ G_{n-1}} { γ_t | γ geodesic from x to y, t ∈ [0,1] }`.
//! `G_n` blows up doubly exponentially, so each stage samples a budgeted
//! number of pairs; the midpoint of every selected pair is always included
//! along with uniformly drawn interior points.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::golden_section_minimize;
use crate::rng::rng_from_seed;
use crate::spaces::{Point, Space};

/// Pairs examined per hull iteration before switching to random selection.
const PAIR_BUDGET: usize = 2048;

/// Finite point-cloud approximation of an iterated-geodesic convex hull.
#[derive(Clone, Debug, Serialize)]
pub struct HullApprox {
    pub generators: Vec<Point>,
    pub depth: usize,
    pub cloud: Vec<Point>,
    /// Pairs skipped because their geodesic is unsupported (cone apex).
    pub skipped_pairs: u64,
}

/// Build a depth-limited hull approximation.
///
/// Stage `k` selects pairs from the stage-`k-1` cloud (all pairs while the
/// cloud is small, a seeded random budget afterwards) and adds the midpoint
/// plus `per_pair_samples` uniform geodesic points per pair. The cloud is
/// cumulative, so `G_k ⊇ G_{k-1}` as point sets.
pub fn build_hull(
    space: &Space,
    generators: &[Point],
    depth: usize,
    per_pair_samples: usize,
    seed: u64,
) -> Result<HullApprox> {
    if generators.is_empty() {
        return Err(Error::InvalidParameter("hull needs at least one generator".into()));
    }
    for g in generators {
        space.validate_point(g)?;
    }
    let mut cloud: Vec<Point> = generators.to_vec();
    let mut skipped = 0u64;
    let mut rng = rng_from_seed(seed);
    for _ in 0..depth {
        let n = cloud.len();
        if n < 2 {
            break;
        }
        let all_pairs = n * (n - 1) / 2;
        let mut fresh: Vec<Point> = Vec::new();
        let pairs: Vec<(usize, usize)> = if all_pairs <= PAIR_BUDGET {
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect()
        } else {
            let mut v = Vec::with_capacity(PAIR_BUDGET);
            while v.len() < PAIR_BUDGET {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                if i != j {
                    v.push((i.min(j), i.max(j)));
                }
            }
            v
        };
        for (i, j) in pairs {
            let (a, b) = (&cloud[i], &cloud[j]);
            match space.midpoint(a, b) {
                Ok(m) => fresh.push(m),
                Err(Error::ApexGeodesic { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
            for _ in 0..per_pair_samples {
                let t: f64 = rng.random();
                fresh.push(space.geodesic_point_unchecked(a, b, t)?);
            }
        }
        cloud.extend(fresh);
    }
    Ok(HullApprox { generators: generators.to_vec(), depth, cloud, skipped_pairs: skipped })
}

/// Nearest cloud point to a query: `r_C(x) = inf_{c ∈ C} d(x, c)` over the
/// finite cloud, with the first index winning ties.
#[derive(Clone, Debug, Serialize)]
pub struct Nearest {
    pub dist: f64,
    pub index: usize,
    pub point: Point,
}

pub fn dist_to_set(space: &Space, q: &Point, cloud: &[Point]) -> Result<Nearest> {
    if cloud.is_empty() {
        return Err(Error::InvalidParameter("dist_to_set needs a nonempty cloud".into()));
    }
    space.validate_point(q)?;
    let mut best = (f64::INFINITY, 0usize);
    for (i, c) in cloud.iter().enumerate() {
        let d = space.distance_unchecked(q, c);
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(Nearest { dist: best.0, index: best.1, point: cloud[best.1].clone() })
}

/// Result of projecting onto a geodesic segment.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentProjection {
    pub point: Point,
    pub t: f64,
    pub dist: f64,
    /// True when the coarse profile failed the unimodality check and the
    /// result came from a fine grid scan instead of pure golden-section.
    pub grid_fallback: bool,
}

const COARSE_GRID: usize = 33;
const FINE_GRID: usize = 1025;

/// Metric projection of `q` onto the geodesic segment `[a, b]`.
///
/// `t ↦ d(q, γ(t))` is convex along geodesics in the p-convex model spaces,
/// so a coarse scan brackets the minimum and golden-section refines it. A
/// non-unimodal coarse profile triggers a fine grid scan and sets the flag.
pub fn project_to_segment(
    space: &Space,
    q: &Point,
    a: &Point,
    b: &Point,
    tol: f64,
) -> Result<SegmentProjection> {
    space.validate_point(q)?;
    // materialize once so unsupported segments surface before scanning
    space.geodesic_point(a, b, 0.5)?;
    let len = space.distance_unchecked(a, b);
    let profile = |t: f64| -> f64 {
        let g = space.geodesic_point_unchecked(a, b, t).expect("segment supported");
        space.distance_unchecked(q, &g)
    };
    let argmin = |v: &[f64]| {
        v.iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    };
    let values: Vec<f64> = (0..COARSE_GRID)
        .map(|i| profile(i as f64 / (COARSE_GRID - 1) as f64))
        .collect();
    let mut fallback = false;
    let mut best_t = argmin(&values) as f64 / (COARSE_GRID - 1) as f64;
    if !is_unimodal(&values, 1e-12 * (1.0 + len)) {
        fallback = true;
        let fine: Vec<f64> = (0..FINE_GRID)
            .map(|i| profile(i as f64 / (FINE_GRID - 1) as f64))
            .collect();
        best_t = argmin(&fine) as f64 / (FINE_GRID - 1) as f64;
    }
    let step = 1.0 / (COARSE_GRID - 1) as f64;
    let lo = (best_t - step).max(0.0);
    let hi = (best_t + step).min(1.0);
    let gtol = tol * (1.0 + len);
    let (t, dist) = golden_section_minimize(profile, lo, hi, gtol, 200);
    Ok(SegmentProjection {
        point: space.geodesic_point_unchecked(a, b, t)?,
        t,
        dist,
        grid_fallback: fallback,
    })
}

fn is_unimodal(values: &[f64], eps: f64) -> bool {
    let m = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    values[..=m].windows(2).all(|w| w[1] <= w[0] + eps)
        && values[m..].windows(2).all(|w| w[1] + eps >= w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::basis_vector;

    #[test]
    fn depth_zero_hull_is_the_generators() {
        let s = Space::euclidean(2);
        let gens = vec![Point::vector([0.0, 0.0]), Point::vector([1.0, 0.0])];
        let h = build_hull(&s, &gens, 0, 4, 1).unwrap();
        assert_eq!(h.cloud, gens);
    }

    #[test]
    fn singleton_hull_stays_singleton() {
        let s = Space::euclidean(2);
        let gens = vec![Point::vector([0.4, 0.6])];
        let h = build_hull(&s, &gens, 5, 4, 1).unwrap();
        assert_eq!(h.cloud, gens);
    }

    #[test]
    fn triangle_hull_fills_toward_the_centroid() {
        let s = Space::euclidean(2);
        let gens = vec![
            Point::vector([0.0, 0.0]),
            Point::vector([1.0, 0.0]),
            Point::vector([0.0, 1.0]),
        ];
        let centroid = Point::vector([1.0 / 3.0, 1.0 / 3.0]);
        let shallow = build_hull(&s, &gens, 1, 4, 9).unwrap();
        let deep = build_hull(&s, &gens, 6, 4, 9).unwrap();
        let d1 = dist_to_set(&s, &centroid, &shallow.cloud).unwrap().dist;
        let d6 = dist_to_set(&s, &centroid, &deep.cloud).unwrap().dist;
        assert!(d6 < d1);
        assert!(d6 < 0.02, "depth-6 cloud should reach the centroid, got {d6}");
    }

    #[test]
    fn hull_cloud_is_cumulative() {
        let s = Space::euclidean(2);
        let gens = vec![Point::vector([0.0, 0.0]), Point::vector([1.0, 1.0])];
        let h = build_hull(&s, &gens, 3, 2, 5).unwrap();
        assert_eq!(&h.cloud[..2], &gens[..]);
        assert!(h.cloud.len() > 2);
    }

    #[test]
    fn dist_to_set_basics() {
        let s = Space::euclidean(2);
        let cloud: Vec<Point> = (0..=100)
            .map(|i| Point::vector([i as f64 / 100.0, 0.0]))
            .collect();
        let q = Point::vector([2.0, 0.0]);
        let n = dist_to_set(&s, &q, &cloud).unwrap();
        assert!((n.dist - 1.0).abs() < 1e-12);
        assert_eq!(n.point, Point::vector([1.0, 0.0]));
        // member of the cloud: distance zero, first index on ties
        let n = dist_to_set(&s, &cloud[3], &cloud).unwrap();
        assert_eq!(n.dist, 0.0);
        assert_eq!(n.index, 3);
    }

    #[test]
    fn dist_to_set_cone_apex_cloud() {
        let cone = Space::cone_over(Space::euclidean(3));
        let q = cone.cone_point(basis_vector(3, 0), 1.0).unwrap();
        let n = dist_to_set(&cone, &q, &[cone.origin()]).unwrap();
        assert!((n.dist - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_agrees_with_closed_form_in_euclidean() {
        let s = Space::euclidean(2);
        let a = Point::vector([-1.0, 0.0]);
        let b = Point::vector([1.0, 0.0]);
        let q = Point::vector([0.0, 1.0]);
        let pr = project_to_segment(&s, &q, &a, &b, 1e-10).unwrap();
        assert!(s.points_eq(&pr.point, &Point::vector([0.0, 0.0]), 1e-6));
        assert!(!pr.grid_fallback);

        // randomized comparison against the clamped orthogonal projection
        let mut rng = rng_from_seed(17);
        for _ in 0..300 {
            let a = s.sample_point(&mut rng);
            let b = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            if s.distance(&a, &b).unwrap() < 1e-3 {
                continue;
            }
            let (va, vb, vq) = (
                a.as_vector().unwrap(),
                b.as_vector().unwrap(),
                q.as_vector().unwrap(),
            );
            let ab: Vec<f64> = vb.iter().zip(va).map(|(x, y)| x - y).collect();
            let aq: Vec<f64> = vq.iter().zip(va).map(|(x, y)| x - y).collect();
            let t = (ab.iter().zip(&aq).map(|(x, y)| x * y).sum::<f64>()
                / ab.iter().map(|x| x * x).sum::<f64>())
            .clamp(0.0, 1.0);
            let oracle = s.geodesic_point(&a, &b, t).unwrap();
            let pr = project_to_segment(&s, &q, &a, &b, 1e-10).unwrap();
            assert!(
                s.points_eq(&pr.point, &oracle, 1e-6),
                "projection mismatch vs closed form"
            );
        }
    }

    #[test]
    fn projection_of_point_on_segment_is_itself() {
        let s = Space::euclidean(3);
        let a = Point::vector([0.0, 0.0, 0.0]);
        let b = Point::vector([1.0, 2.0, -1.0]);
        let q = s.geodesic_point(&a, &b, 0.37).unwrap();
        let pr = project_to_segment(&s, &q, &a, &b, 1e-10).unwrap();
        assert!(s.points_eq(&pr.point, &q, 1e-7));
    }

    #[test]
    fn projection_onto_central_ray_matches_cone_formula() {
        let cone = Space::cone_over(Space::euclidean(4));
        let q = cone.cone_point(basis_vector(4, 2), 1.0).unwrap();
        let a = cone.origin();
        let b = cone.cone_point(Point::vector(vec![0.0; 4]), 2.0).unwrap();
        let pr = project_to_segment(&cone, &q, &a, &b, 1e-10).unwrap();
        let (_, r) = pr.point.as_cone().unwrap();
        assert!((r - 1f64.cos()).abs() < 1e-6, "ray foot radius {r}");
        let direct = cone.cone_ray_projection(&q).unwrap();
        assert!(cone.points_eq(&pr.point, &direct, 1e-6));
    }

    #[test]
    fn projection_is_distance_nonincreasing_to_segment_samples() {
        let s = Space::cone_over(Space::euclidean(2));
        let mut rng = rng_from_seed(23);
        for _ in 0..100 {
            let a = s.sample_point(&mut rng);
            let b = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            let pr = project_to_segment(&s, &q, &a, &b, 1e-9).unwrap();
            for i in 0..=20 {
                let c = s.geodesic_point(&a, &b, i as f64 / 20.0).unwrap();
                assert!(pr.dist <= s.distance(&q, &c).unwrap() + 1e-6);
            }
        }
    }

    #[test]
    fn projection_stable_under_orientation_flip() {
        // Chebyshev behavior: scanning the segment from either end returns
        // the same foot point.
        let s = Space::euclidean(2);
        let mut rng = rng_from_seed(29);
        for _ in 0..50 {
            let a = s.sample_point(&mut rng);
            let b = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            if s.distance(&a, &b).unwrap() < 1e-3 {
                continue;
            }
            let p1 = project_to_segment(&s, &q, &a, &b, 1e-9).unwrap();
            let p2 = project_to_segment(&s, &q, &b, &a, 1e-9).unwrap();
            assert!(s.points_eq(&p1.point, &p2.point, 1e-6));
        }
    }
}
