//! Randomized checkers and empirical modulus estimators for the convexity
//! inequalities satisfied by the model spaces.
//!
//! p-convexity asks `d(m(x,y), z) <= M^p(d(x,z), d(y,z))` for every triple;
//! the uniform version quantifies a deficit `(1 − ρ_p(ε))` on triples that
//! are ε-spread, where the trigger is `d(x,y) > ε·M^p` for `p > 1` and
//! `d(x,y) > |d(x,z) − d(y,z)| + ε·M^1` for `p = 1`. The estimator reports
//! the empirical infimum of the deficit over qualifying sampled triples,
//! which upper-bounds the true modulus.
//!
//! Sampling is split into a fixed number of seeded substreams and merged in
//! stream order, so reports are identical for a given `(seed, n_samples)`
//! whatever the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::means::{p_mean, Exponent};
use crate::rng::{chunk_sizes, stream_rng};
use crate::sets::{build_hull, dist_to_set};
use crate::spaces::{Point, Space};

/// Default pass tolerance for the exact inequalities.
pub const CHECK_TOL: f64 = 1e-9;

/// Scale guard: triples whose mean side is below this are treated as
/// degenerate and skipped (the deficit ratio is numerically meaningless).
const MIN_SCALE: f64 = 1e-6;

/// Attempt budget per epsilon when resampling for the trigger condition.
const ATTEMPT_CAP: u64 = 1_000_000;

/// Safety factor applied to empirically measured moduli before they are used
/// as bounds: the sampled infimum over finitely many triples overestimates
/// the true infimum.
const ESTIMATOR_DEFLATION: f64 = 0.9;

/// Outcome of a sampled property check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub p: Option<Exponent>,
    pub samples: u64,
    pub violations: u64,
    /// Largest signed violation observed (negative values are margins).
    pub worst: f64,
    pub witness: serde_json::Value,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone)]
struct Acc {
    samples: u64,
    violations: u64,
    worst: f64,
    witness: Option<serde_json::Value>,
}

impl Acc {
    fn new() -> Self {
        Acc { samples: 0, violations: 0, worst: f64::NEG_INFINITY, witness: None }
    }

    fn record(&mut self, violation: f64, tol: f64, witness: impl FnOnce() -> serde_json::Value) {
        self.samples += 1;
        if violation > tol {
            self.violations += 1;
        }
        if violation > self.worst {
            self.worst = violation;
            self.witness = Some(witness());
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.samples += other.samples;
        self.violations += other.violations;
        if other.worst > self.worst {
            self.worst = other.worst;
            self.witness = other.witness;
        }
        self
    }
}

/// Run `per_chunk` over deterministic substreams and merge in stream order.
fn sampled<F>(n_samples: u64, seed: u64, per_chunk: F) -> Acc
where
    F: Fn(u64, rand_chacha::ChaCha8Rng) -> Acc + Sync,
{
    chunk_sizes(n_samples)
        .into_par_iter()
        .enumerate()
        .map(|(i, count)| per_chunk(count, stream_rng(seed, i as u64)))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Acc::new(), Acc::merge)
}

fn report(property: &str, p: Option<Exponent>, acc: Acc) -> CheckReport {
    CheckReport {
        property: property.to_string(),
        p,
        samples: acc.samples,
        violations: acc.violations,
        worst: if acc.worst == f64::NEG_INFINITY { 0.0 } else { acc.worst },
        witness: acc.witness.unwrap_or(serde_json::Value::Null),
    }
}

/// Check `d(m(x,y), z) <= M^p(d(x,z), d(y,z))` on sampled triples.
pub fn check_p_convexity(
    space: &Space,
    p: Exponent,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    let acc = sampled(n_samples, seed, |count, mut rng| {
        let mut acc = Acc::new();
        for _ in 0..count {
            let x = space.sample_point(&mut rng);
            let y = space.sample_point(&mut rng);
            let z = space.sample_point(&mut rng);
            let m = match space.midpoint(&x, &y) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let lhs = space.distance_unchecked(&m, &z);
            let rhs =
                p_mean(p, space.distance_unchecked(&x, &z), space.distance_unchecked(&y, &z));
            acc.record(lhs - rhs, tol, || {
                json!({"points": [&x, &y, &z], "lhs": lhs, "rhs": rhs})
            });
        }
        acc
    });
    Ok(report("p-convexity", Some(p), acc))
}

/// Check the midpoint-contraction conditions on sampled configurations:
/// the quadruple form `d(m(x0,x1), m(y0,y1)) <= M^p(d(x0,y0), d(x1,y1))`
/// and, for finite p, the triple form `d(m1,m2)^p <= d(x,y)^p / 2` with
/// `m1 = m(x,z)`, `m2 = m(y,z)`.
pub fn check_busemann(
    space: &Space,
    p: Exponent,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    let quad = sampled(n_samples, seed, |count, mut rng| {
        let mut acc = Acc::new();
        for _ in 0..count {
            let x0 = space.sample_point(&mut rng);
            let x1 = space.sample_point(&mut rng);
            let y0 = space.sample_point(&mut rng);
            let y1 = space.sample_point(&mut rng);
            let (mx, my) = match (space.midpoint(&x0, &x1), space.midpoint(&y0, &y1)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let lhs = space.distance_unchecked(&mx, &my);
            let rhs = p_mean(
                p,
                space.distance_unchecked(&x0, &y0),
                space.distance_unchecked(&x1, &y1),
            );
            acc.record(lhs - rhs, tol, || {
                json!({"form": "quadruple", "points": [&x0, &x1, &y0, &y1], "lhs": lhs, "rhs": rhs})
            });
        }
        acc
    });
    let acc = if let Exponent::Finite(pv) = p {
        let triple = sampled(n_samples, seed ^ 0x7413, |count, mut rng| {
            let mut acc = Acc::new();
            for _ in 0..count {
                let x = space.sample_point(&mut rng);
                let y = space.sample_point(&mut rng);
                let z = space.sample_point(&mut rng);
                let (m1, m2) = match (space.midpoint(&x, &z), space.midpoint(&y, &z)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                let lhs = space.distance_unchecked(&m1, &m2).powf(pv);
                let rhs = 0.5 * space.distance_unchecked(&x, &y).powf(pv);
                acc.record(lhs - rhs, tol, || {
                    json!({"form": "triple", "points": [&x, &y, &z], "lhs": lhs, "rhs": rhs})
                });
            }
            acc
        });
        quad.merge(triple)
    } else {
        quad
    };
    Ok(report("p-busemann", Some(p), acc))
}

/// One row of an empirical modulus table.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusEntry {
    pub eps: f64,
    /// Empirical infimum of `1 − d(m,z)/M^p` over qualifying triples;
    /// `None` when no triple qualified within the attempt budget.
    pub rho_hat: Option<f64>,
    /// `1 − (1 − rho_hat)^p` for finite p (the p-th power form).
    pub rho_tilde: Option<f64>,
    pub samples: u64,
    pub attempts: u64,
    pub worst_witness: Option<Vec<Point>>,
}

/// Empirical modulus-of-convexity estimates over an epsilon grid.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusTable {
    pub p: Exponent,
    pub entries: Vec<ModulusEntry>,
}

impl ModulusTable {
    /// Enforce monotonicity of `ε ↦ rho_hat` by a running maximum (the
    /// qualifying set shrinks as ε grows, so the true modulus is monotone;
    /// sampling noise can break this and is smoothed away here).
    fn monotone_envelope(&mut self) {
        let mut floor = f64::NEG_INFINITY;
        let p = self.p;
        for e in &mut self.entries {
            if let Some(r) = e.rho_hat {
                let r = r.max(floor);
                floor = r;
                e.rho_hat = Some(r);
                e.rho_tilde = p.value().map(|pv| 1.0 - (1.0 - r).powf(pv));
            }
        }
    }
}

struct ModChunk {
    min_deficit: f64,
    witness: Option<Vec<Point>>,
    samples: u64,
    attempts: u64,
}

/// Estimate the modulus of uniform p-convexity on an epsilon grid.
///
/// For each ε, triples are resampled until the trigger condition holds
/// (capped attempts); the entry records the infimum of the deficit together
/// with the worst witness. Entries with no qualifying triples are marked as
/// no-data rather than zero.
pub fn estimate_modulus(
    space: &Space,
    p: Exponent,
    epsilon_grid: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<ModulusTable> {
    if epsilon_grid.is_empty() {
        return Err(Error::InvalidParameter("epsilon grid must be nonempty".into()));
    }
    if epsilon_grid[0] <= 0.0 || epsilon_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "epsilon grid must be strictly increasing and positive".into(),
        ));
    }
    let mut entries = Vec::with_capacity(epsilon_grid.len());
    for (k, &eps) in epsilon_grid.iter().enumerate() {
        let sizes = chunk_sizes(n_samples);
        let cap = (ATTEMPT_CAP / sizes.len() as u64).max(1);
        let chunks: Vec<ModChunk> = sizes
            .into_par_iter()
            .enumerate()
            .map(|(i, target)| {
                let mut rng = stream_rng(seed, ((k as u64) << 32) | i as u64);
                let mut c = ModChunk {
                    min_deficit: f64::INFINITY,
                    witness: None,
                    samples: 0,
                    attempts: 0,
                };
                while c.samples < target && c.attempts < cap {
                    c.attempts += 1;
                    let x = space.sample_point(&mut rng);
                    let y = space.sample_point(&mut rng);
                    let z = space.sample_point(&mut rng);
                    if let Some(deficit) = qualifying_deficit(space, p, eps, &x, &y, &z) {
                        c.samples += 1;
                        if deficit < c.min_deficit {
                            c.min_deficit = deficit;
                            c.witness = Some(vec![x, y, z]);
                        }
                    }
                }
                c
            })
            .collect();
        let mut samples = 0;
        let mut attempts = 0;
        let mut min_deficit = f64::INFINITY;
        let mut witness = None;
        for c in chunks {
            samples += c.samples;
            attempts += c.attempts;
            if c.min_deficit < min_deficit {
                min_deficit = c.min_deficit;
                witness = c.witness;
            }
        }
        let rho_hat = (samples > 0).then_some(min_deficit);
        entries.push(ModulusEntry {
            eps,
            rho_hat,
            rho_tilde: rho_hat.and_then(|r| p.value().map(|pv| 1.0 - (1.0 - r).powf(pv))),
            samples,
            attempts,
            worst_witness: witness,
        });
    }
    let mut table = ModulusTable { p, entries };
    table.monotone_envelope();
    Ok(table)
}

/// Deficit `1 − d(m,z)/M^p` if the triple meets the ε-trigger, else `None`.
fn qualifying_deficit(
    space: &Space,
    p: Exponent,
    eps: f64,
    x: &Point,
    y: &Point,
    z: &Point,
) -> Option<f64> {
    let a = space.distance_unchecked(x, z);
    let b = space.distance_unchecked(y, z);
    let c = space.distance_unchecked(x, y);
    let mean = p_mean(p, a, b);
    if mean < MIN_SCALE || c <= 0.0 {
        return None;
    }
    let triggered = match p {
        Exponent::Finite(pv) if pv == 1.0 => c > (a - b).abs() + eps * mean,
        _ => c > eps * mean,
    };
    if !triggered {
        return None;
    }
    let m = space.midpoint(x, y).ok()?;
    Some(1.0 - space.distance_unchecked(&m, z) / mean)
}

/// Clarkson constant used for exponents `p >= 2`.
pub fn clarkson_constant(p: f64) -> f64 {
    2f64.powf(-p)
}

/// Constant for the conjugate-exponent Clarkson form (`1 < p < 2`), found by
/// minimizing `(M^p(a,b)^q − ((a+b)/2)^q) / |a−b|^q` over `a + b = 1`.
pub fn clarkson_conjugate_constant(p: f64) -> f64 {
    let q = p / (p - 1.0);
    let h = |x: f64| {
        let (a, b) = (x, 1.0 - x);
        let mean_q = p_mean(Exponent::Finite(p), a, b).powf(q);
        (mean_q - 0.5f64.powf(q)) / (a - b).abs().powf(q)
    };
    let mut best = f64::INFINITY;
    let mut best_x = 0.0;
    let n = 4096;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        if (2.0 * x - 1.0).abs() < 1e-3 {
            continue;
        }
        let v = h(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let lo = (best_x - 1.0 / n as f64).max(0.0);
    let hi = (best_x + 1.0 / n as f64).min(1.0);
    let (_, refined) = crate::optim::golden_section_minimize(h, lo, hi, 1e-12, 200);
    best.min(refined)
}

/// Scalar Clarkson inequality check on sampled non-negative pairs.
///
/// For `p >= 2`: `((a+b)/2)^p + 2^{-p} |a−b|^p <= (a^p + b^p)/2`.
/// For `1 < p < 2` the conjugate-exponent form is checked with the
/// numerically minimized constant.
pub fn check_clarkson(p: f64, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    if p <= 1.0 {
        return Err(Error::InvalidParameter(format!("Clarkson check needs p > 1, got {p}")));
    }
    let conjugate = p < 2.0;
    let c = if conjugate { clarkson_conjugate_constant(p) } else { clarkson_constant(p) };
    let q = if conjugate { p / (p - 1.0) } else { p };
    let acc = sampled(n_samples, seed, |count, mut rng| {
        let mut acc = Acc::new();
        for _ in 0..count {
            let a: f64 = rng.random::<f64>() * 2.0;
            let b: f64 = rng.random::<f64>() * 2.0;
            let lhs = (0.5 * a + 0.5 * b).powf(q) + c * (a - b).abs().powf(q);
            let rhs = if conjugate {
                p_mean(Exponent::Finite(p), a, b).powf(q)
            } else {
                0.5 * a.powf(p) + 0.5 * b.powf(p)
            };
            acc.record(lhs - rhs, tol, || json!({"a": a, "b": b, "lhs": lhs, "rhs": rhs}));
        }
        acc
    });
    let mut rep = report("clarkson", Some(Exponent::Finite(p)), acc);
    rep.witness = json!({"constant": c, "conjugate_form": conjugate, "worst_case": rep.witness});
    Ok(rep)
}

/// Empirical check that uniform p-convexity transfers to `p' >= p`.
///
/// The modulus at level p is measured first, deflated by a safety factor,
/// and converted to a level-p' modulus: identical for `p > 1`, and via the
/// `ε/2` split plus the Clarkson term for `p = 1`. Sampled triples
/// qualifying at `(p', ε)` must then satisfy the transferred deficit bound.
/// On spaces that are not uniformly p-convex the measured modulus collapses
/// and the report flags the ε-levels where the transfer is vacuous.
pub fn check_p_implies_pprime(
    space: &Space,
    p: Exponent,
    p_prime: Exponent,
    epsilon_grid: &[f64],
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    let ordered = match (p, p_prime) {
        (_, Exponent::Infinity) => true,
        (Exponent::Infinity, Exponent::Finite(_)) => false,
        (Exponent::Finite(a), Exponent::Finite(b)) => a <= b,
    };
    if !ordered {
        return Err(Error::InvalidParameter(format!(
            "transfer needs p <= p', got {p} > {p_prime}"
        )));
    }
    let p_is_one = matches!(p, Exponent::Finite(v) if v == 1.0);
    if p_is_one && p_prime.is_infinite() {
        return Err(Error::InvalidParameter(
            "the 1 -> infinity transfer has no quantitative recipe here".into(),
        ));
    }
    let base_grid: Vec<f64> = if p_is_one {
        epsilon_grid.iter().map(|e| e / 2.0).collect()
    } else {
        epsilon_grid.to_vec()
    };
    let table = estimate_modulus(space, p, &base_grid, n_samples, seed ^ 0xbace)?;

    let mut total = Acc::new();
    let mut per_eps = Vec::new();
    for (idx, &eps) in epsilon_grid.iter().enumerate() {
        let rho_base = table.entries[idx].rho_hat;
        let derived = rho_base.map(|r| {
            let r = ESTIMATOR_DEFLATION * r.max(0.0);
            if !p_is_one {
                r
            } else {
                match p_prime {
                    Exponent::Finite(pp) if pp >= 2.0 => {
                        let cl = clarkson_constant(pp);
                        r.min(1.0 - (1.0 - cl * (eps / 2.0).powf(pp)).powf(1.0 / pp))
                    }
                    Exponent::Finite(pp) => {
                        let q = pp / (pp - 1.0);
                        let cl = clarkson_conjugate_constant(pp);
                        r.min(1.0 - (1.0 - cl * (eps / 2.0).powf(q / pp)).powf(1.0 / q))
                    }
                    Exponent::Infinity => unreachable!(),
                }
            }
        });
        let Some(rho) = derived else {
            per_eps.push(json!({"eps": eps, "no_data": true}));
            continue;
        };
        let acc = sampled(n_samples, seed ^ ((idx as u64 + 1) << 16), |count, mut rng| {
            let mut acc = Acc::new();
            let mut attempts = 0;
            while acc.samples < count && attempts < ATTEMPT_CAP / 64 {
                attempts += 1;
                let x = space.sample_point(&mut rng);
                let y = space.sample_point(&mut rng);
                let z = space.sample_point(&mut rng);
                let a = space.distance_unchecked(&x, &z);
                let b = space.distance_unchecked(&y, &z);
                let c = space.distance_unchecked(&x, &y);
                let mean = p_mean(p_prime, a, b);
                if mean < MIN_SCALE || c <= eps * mean {
                    continue;
                }
                let Ok(m) = space.midpoint(&x, &y) else { continue };
                let lhs = space.distance_unchecked(&m, &z);
                let rhs = (1.0 - rho) * mean;
                acc.record(lhs - rhs, tol, || {
                    json!({"eps": eps, "points": [&x, &y, &z], "lhs": lhs, "rhs": rhs})
                });
            }
            acc
        });
        per_eps.push(json!({
            "eps": eps,
            "rho_base": rho_base,
            "rho_derived": rho,
            "vacuous": rho <= tol,
            "samples": acc.samples,
            "violations": acc.violations,
        }));
        total = total.merge(acc);
    }
    let mut rep = report("p-implies-p'-convexity", Some(p_prime), total);
    rep.witness = json!({"base_p": p, "levels": per_eps, "worst_case": rep.witness});
    Ok(rep)
}

/// Empirical nearly-uniform-convexity probe for a finite ε-separated family
/// inside the ball of radius `r = max d(center, x_i)`: the depth-limited
/// hull must contain a point strictly inside, giving
/// `ρ_emp = 1 − d(center, hull)/r > 0`.
pub fn check_nearly_uniform(
    space: &Space,
    family: &[Point],
    center: &Point,
    epsilon: f64,
    hull_depth: usize,
    seed: u64,
) -> Result<CheckReport> {
    if family.len() < 2 {
        return Err(Error::InvalidParameter(
            "nearly-uniform check needs a family of at least two points".into(),
        ));
    }
    for (i, x) in family.iter().enumerate() {
        for (j, y) in family.iter().enumerate().skip(i + 1) {
            let d = space.distance(x, y)?;
            if d < epsilon {
                return Err(Error::NotSeparated { eps: epsilon, i, j, dist: d });
            }
        }
    }
    let r = family
        .iter()
        .map(|x| space.distance_unchecked(center, x))
        .fold(0.0, f64::max);
    let hull = build_hull(space, family, hull_depth, 4, seed)?;
    let nearest = dist_to_set(space, center, &hull.cloud)?;
    let rho_emp = 1.0 - nearest.dist / r;
    Ok(CheckReport {
        property: "nearly-uniform-convexity".to_string(),
        p: None,
        samples: hull.cloud.len() as u64,
        violations: u64::from(rho_emp <= 0.0),
        worst: -rho_emp,
        witness: json!({
            "rho_emp": rho_emp,
            "radius": r,
            "hull_distance": nearest.dist,
            "cloud_size": hull.cloud.len(),
            "epsilon": epsilon,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::basis_vector;

    fn fexp(p: f64) -> Exponent {
        Exponent::finite(p).unwrap()
    }

    #[test]
    fn euclidean_is_p_convex_for_all_p() {
        let s = Space::euclidean(2);
        for p in [fexp(1.0), fexp(2.0), fexp(4.0), Exponent::Infinity] {
            let rep = check_p_convexity(&s, p, 20_000, 42, CHECK_TOL).unwrap();
            assert!(rep.passed(), "p = {p}: worst {}", rep.worst);
            assert!(rep.worst <= CHECK_TOL);
        }
    }

    #[test]
    fn degenerate_triple_gives_equality() {
        let s = Space::euclidean(2);
        let x = Point::vector([0.3, 0.4]);
        let z = Point::vector([1.0, -1.0]);
        let m = s.midpoint(&x, &x).unwrap();
        let d = s.distance(&m, &z).unwrap();
        let mean =
            p_mean(fexp(2.0), s.distance(&x, &z).unwrap(), s.distance(&x, &z).unwrap());
        assert!((d - mean).abs() < 1e-12);
    }

    #[test]
    fn l1_hand_triple_value() {
        // x=(1,0), y=(-1,0), z=(0,1): the linear midpoint is the origin,
        // d(m,z) = 1 while M^inf = 2
        let s = Space::lp(2, fexp(1.0));
        let x = Point::vector([1.0, 0.0]);
        let y = Point::vector([-1.0, 0.0]);
        let z = Point::vector([0.0, 1.0]);
        let m = s.midpoint(&x, &y).unwrap();
        let lhs = s.distance(&m, &z).unwrap();
        let rhs = p_mean(
            Exponent::Infinity,
            s.distance(&x, &z).unwrap(),
            s.distance(&y, &z).unwrap(),
        );
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!((rhs - 2.0).abs() < 1e-12);
        assert!(lhs <= rhs);
    }

    #[test]
    fn cone_is_busemann_and_p_convex() {
        let cone = Space::cone_over(Space::euclidean(3));
        let rep = check_busemann(&cone, fexp(1.0), 10_000, 7, CHECK_TOL).unwrap();
        assert!(rep.passed(), "worst {}", rep.worst);
        let rep = check_p_convexity(&cone, fexp(2.0), 10_000, 7, CHECK_TOL).unwrap();
        assert!(rep.passed(), "worst {}", rep.worst);
    }

    #[test]
    fn euclidean_busemann_p1_is_exact() {
        let s = Space::euclidean(3);
        let rep = check_busemann(&s, fexp(1.0), 20_000, 13, CHECK_TOL).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn modulus_matches_euclidean_law() {
        // uniformly 2-convex with ρ̃(ε) = (ε/2)²
        let s = Space::euclidean(3);
        let table = estimate_modulus(&s, fexp(2.0), &[0.1, 0.5, 1.0], 100_000, 1234).unwrap();
        for e in &table.entries {
            let want = (e.eps / 2.0) * (e.eps / 2.0);
            let got = e.rho_tilde.expect("qualifying triples exist");
            let rel = (got - want).abs() / want;
            assert!(rel < 0.05, "eps {}: rho_tilde {} vs {} (rel {rel})", e.eps, got, want);
        }
        // spot value at eps = 1: rho_hat ≈ 1 − sqrt(3)/2 ≈ 0.1339746
        let rho1 = table.entries[2].rho_hat.unwrap();
        assert!((rho1 - (1.0 - 0.75f64.sqrt())).abs() < 0.01);
    }

    #[test]
    fn modulus_no_data_beyond_diameter() {
        // the sampled region has diameter ~2, so the trigger is unattainable
        // at eps = 50
        let s = Space::euclidean(2);
        let table = estimate_modulus(&s, fexp(2.0), &[50.0], 100, 3).unwrap();
        assert!(table.entries[0].rho_hat.is_none());
        assert_eq!(table.entries[0].samples, 0);
    }

    #[test]
    fn modulus_table_is_monotone() {
        let s = Space::euclidean(2);
        let grid = [0.1, 0.3, 0.5, 0.8, 1.0, 1.5];
        let table = estimate_modulus(&s, fexp(2.0), &grid, 20_000, 99).unwrap();
        let rhos: Vec<f64> = table.entries.iter().filter_map(|e| e.rho_hat).collect();
        assert!(rhos.windows(2).all(|w| w[1] >= w[0]));
        assert!(rhos.iter().all(|r| (0.0..1.0).contains(r)));
    }

    #[test]
    fn modulus_grid_must_increase() {
        let s = Space::euclidean(2);
        assert!(estimate_modulus(&s, fexp(2.0), &[0.5, 0.5], 10, 1).is_err());
        assert!(estimate_modulus(&s, fexp(2.0), &[], 10, 1).is_err());
    }

    #[test]
    fn clarkson_exact_identity_at_p2() {
        // (a+b)²/4 + (a−b)²/4 = (a²+b²)/2 exactly
        let rep = check_clarkson(2.0, 50_000, 5, CHECK_TOL).unwrap();
        assert!(rep.passed());
        assert!(rep.worst.abs() < 1e-12, "p=2 is an identity, worst {}", rep.worst);
    }

    #[test]
    fn clarkson_holds_for_p_three_four() {
        for p in [3.0, 4.0] {
            let rep = check_clarkson(p, 100_000, 5, CHECK_TOL).unwrap();
            assert!(rep.passed(), "p = {p}, worst {}", rep.worst);
        }
        // hand value: p=4, a=1, b=0: lhs = 1/16 + 1/16 = 1/8 <= 1/2
        let lhs = 0.5f64.powi(4) + clarkson_constant(4.0);
        assert!((lhs - 0.125).abs() < 1e-12);
    }

    #[test]
    fn clarkson_conjugate_form_for_small_p() {
        let c = clarkson_conjugate_constant(1.5);
        assert!(c > 0.0, "conjugate constant must be positive, got {c}");
        let rep = check_clarkson(1.5, 50_000, 5, CHECK_TOL).unwrap();
        assert!(rep.passed(), "worst {}", rep.worst);
        assert!(check_clarkson(1.0, 10, 1, CHECK_TOL).is_err());
    }

    #[test]
    fn transfer_two_to_four_passes_on_euclidean() {
        let s = Space::euclidean(2);
        let rep =
            check_p_implies_pprime(&s, fexp(2.0), fexp(4.0), &[0.5, 1.0], 20_000, 11, CHECK_TOL)
                .unwrap();
        assert!(rep.passed(), "worst {}", rep.worst);
    }

    #[test]
    fn transfer_identity_and_bad_orders() {
        let s = Space::euclidean(2);
        let rep = check_p_implies_pprime(&s, fexp(2.0), fexp(2.0), &[0.5], 10_000, 11, CHECK_TOL)
            .unwrap();
        assert!(rep.passed());
        assert!(
            check_p_implies_pprime(&s, fexp(4.0), fexp(2.0), &[0.5], 10, 1, CHECK_TOL).is_err()
        );
        assert!(check_p_implies_pprime(
            &s,
            fexp(1.0),
            Exponent::Infinity,
            &[0.5],
            10,
            1,
            CHECK_TOL
        )
        .is_err());
    }

    #[test]
    fn transfer_on_l1_does_not_certify_uniform_convexity() {
        // ℓ1 is 1-convex but not uniformly convex: the measured modulus must
        // collapse toward zero or the transferred bound must be violated.
        let s = Space::lp(2, fexp(1.0));
        let rep = check_p_implies_pprime(&s, fexp(1.0), fexp(2.0), &[0.5], 30_000, 17, CHECK_TOL)
            .unwrap();
        let rho = rep.witness["levels"][0]["rho_base"].as_f64().unwrap();
        assert!(
            rep.violations > 0 || rho < 0.02,
            "l1 must not look uniformly convex: violations {}, rho_base {rho}",
            rep.violations
        );
    }

    #[test]
    fn nearly_uniform_symmetric_pair_hits_center() {
        let s = Space::euclidean(2);
        let family = vec![Point::vector([1.0, 0.0]), Point::vector([-1.0, 0.0])];
        let rep = check_nearly_uniform(&s, &family, &s.origin(), 0.5, 2, 3).unwrap();
        assert!(rep.passed());
        let rho = rep.witness["rho_emp"].as_f64().unwrap();
        assert!((rho - 1.0).abs() < 1e-9, "midpoint reaches the center, rho {rho}");
    }

    #[test]
    fn nearly_uniform_orthonormal_family_value() {
        // hull minimum of {e_1..e_N} from the origin is the centroid at
        // distance 1/sqrt(N)
        let n = 4;
        let s = Space::euclidean(n);
        let family: Vec<Point> = (0..n).map(|i| basis_vector(n, i)).collect();
        let rep = check_nearly_uniform(&s, &family, &s.origin(), 1.0, 4, 7).unwrap();
        let rho = rep.witness["rho_emp"].as_f64().unwrap();
        let want = 1.0 - 1.0 / (n as f64).sqrt();
        assert!((rho - want).abs() < 1e-9, "rho {rho} vs {want}");
    }

    #[test]
    fn nearly_uniform_rejects_bad_families() {
        let s = Space::euclidean(2);
        let family = vec![Point::vector([1.0, 0.0])];
        assert!(check_nearly_uniform(&s, &family, &s.origin(), 0.5, 2, 3).is_err());
        let family = vec![Point::vector([1.0, 0.0]), Point::vector([1.0, 1e-4])];
        let err = check_nearly_uniform(&s, &family, &s.origin(), 0.5, 2, 3).unwrap_err();
        assert!(matches!(err, Error::NotSeparated { .. }));
    }

    #[test]
    fn reports_are_thread_count_independent() {
        let s = Space::euclidean(3);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| check_p_convexity(&s, fexp(2.0), 5_000, 123, CHECK_TOL).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
