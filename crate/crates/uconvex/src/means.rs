//! Scalar mean functions: p-means, L-means and Orlicz means.
//!
//! For `p ∈ [1, ∞)` the p-mean of two non-negative numbers is
//! `M^p(a,b) = (a^p/2 + b^p/2)^(1/p)`, and `M^∞(a,b) = max(a,b)`.
//! An Orlicz function `L` (strictly increasing, convex, `L(1) = 1`,
//! `L(r) → 0` as `r → 0`) generalizes the power family and yields two
//! means: the L-mean `L⁻¹(L(a)/2 + L(b)/2)` and the Orlicz mean
//! `inf { t > 0 | L(a/t)/2 + L(b/t)/2 ≤ 1 }`. For `L(r) = r^p` both
//! coincide with the p-mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{bisect_decreasing, bisect_increasing};

/// Exponent `p ∈ [1, ∞]`, with infinity as a distinguished value so the
/// `p = ∞` cases (max-mean, ball convexity) are exact rather than a large
/// float approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Validated finite exponent; rejects `p < 1`, NaN and infinities.
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "exponent must be a finite real >= 1, got {p}"
            )));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(*p),
            Exponent::Infinity => None,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse exponent {other:?}"))
                })?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => ser.serialize_f64(*p),
            Exponent::Infinity => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// p-mean of two non-negative numbers.
///
/// Computed in scaled form `m · ((a/m)^p/2 + (b/m)^p/2)^(1/p)` with
/// `m = max(a,b)` so large exponents neither overflow nor lose the max.
pub fn p_mean(p: Exponent, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    match p {
        Exponent::Infinity => a.max(b),
        Exponent::Finite(p) => {
            let m = a.max(b);
            if m == 0.0 {
                return 0.0;
            }
            let ra = (a / m).powf(p);
            let rb = (b / m).powf(p);
            m * (0.5 * ra + 0.5 * rb).powf(1.0 / p)
        }
    }
}

/// Orlicz function: strictly increasing, convex, `L(1) = 1`, `L(0+) = 0`.
/// Extended continuously by `L(0) := 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrliczFunction {
    /// `L(r) = r^p` with `p >= 1`.
    Power { p: f64 },
    /// `L(r) = (e^r - 1) / (e - 1)`.
    ExpMinusOne,
    /// Piecewise-linear interpolation of `(r, L(r))` knots, linearly
    /// extrapolated past the last knot with the final slope.
    Table { knots: Vec<(f64, f64)> },
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "power-family Orlicz function needs p >= 1, got {p}"
            )));
        }
        Ok(OrliczFunction::Power { p })
    }

    pub fn exp_minus_one() -> Self {
        OrliczFunction::ExpMinusOne
    }

    /// Table of `(r, L(r))` knots. Validates monotonicity, convexity of the
    /// secant slopes and `L(1) = 1` (1 must be covered by the knot range).
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter(
                "Orlicz table needs at least two knots".into(),
            ));
        }
        let mut prev_slope = f64::NEG_INFINITY;
        for w in knots.windows(2) {
            let ((r0, v0), (r1, v1)) = (w[0], w[1]);
            if !(r1 > r0 && v1 > v0) {
                return Err(Error::InvalidParameter(
                    "Orlicz table must be strictly increasing in r and L(r)".into(),
                ));
            }
            let slope = (v1 - v0) / (r1 - r0);
            if slope < prev_slope - 1e-12 {
                return Err(Error::InvalidParameter(
                    "Orlicz table secant slopes must be nondecreasing (convexity)".into(),
                ));
            }
            prev_slope = slope;
        }
        let f = OrliczFunction::Table { knots };
        let at_one = f.eval(1.0);
        if (at_one - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "Orlicz table must satisfy L(1) = 1, got {at_one}"
            )));
        }
        Ok(f)
    }

    /// Parse a CLI family descriptor: `pow:p` or `exp-minus-one`.
    pub fn parse(desc: &str) -> Result<Self> {
        if let Some(p) = desc.strip_prefix("pow:") {
            let p: f64 = p.parse().map_err(|_| {
                Error::InvalidParameter(format!("cannot parse power exponent in {desc:?}"))
            })?;
            return OrliczFunction::power(p);
        }
        match desc {
            "exp-minus-one" => Ok(OrliczFunction::ExpMinusOne),
            other => Err(Error::InvalidParameter(format!(
                "unknown Orlicz family {other:?} (expected pow:<p> or exp-minus-one)"
            ))),
        }
    }

    /// Evaluate `L(r)` for `r >= 0`, with the continuous extension `L(0) = 0`.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return 0.0;
        }
        match self {
            OrliczFunction::Power { p } => r.powf(*p),
            OrliczFunction::ExpMinusOne => (r.exp() - 1.0) / (std::f64::consts::E - 1.0),
            OrliczFunction::Table { knots } => {
                let first = knots[0];
                if r <= first.0 {
                    // below the first knot: interpolate toward L(0) = 0
                    return first.1 * r / first.0;
                }
                for w in knots.windows(2) {
                    let ((r0, v0), (r1, v1)) = (w[0], w[1]);
                    if r <= r1 {
                        return v0 + (v1 - v0) * (r - r0) / (r1 - r0);
                    }
                }
                let ((r0, v0), (r1, v1)) = (knots[knots.len() - 2], knots[knots.len() - 1]);
                v1 + (v1 - v0) / (r1 - r0) * (r - r1)
            }
        }
    }

    /// Inverse by bisection on `[0, hi]`, growing `hi` until it brackets.
    pub fn inverse(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        if y == 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.eval(hi) < y {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        bisect_increasing(|t| self.eval(t), y, 0.0, hi)
    }

    /// Sampled validity check: strict growth, secant convexity, `L(1) = 1`
    /// and decay at zero. Named families are valid by construction; this is
    /// the runtime check used for table data and in tests.
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        let n = n_samples.max(8);
        let grid: Vec<f64> = (1..=n).map(|i| 3.0 * i as f64 / n as f64).collect();
        for w in grid.windows(2) {
            if self.eval(w[1]) <= self.eval(w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "Orlicz function not strictly increasing near r = {}",
                    w[0]
                )));
            }
        }
        for w in grid.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let secant = |x: f64, y: f64| (self.eval(y) - self.eval(x)) / (y - x);
            if secant(a, b) > secant(b, c) + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "Orlicz function fails the secant convexity test near r = {b}"
                )));
            }
        }
        if (self.eval(1.0) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("L(1) must equal 1".into()));
        }
        if self.eval(1e-9) > 1e-6 {
            return Err(Error::InvalidParameter("L(r) must vanish as r -> 0".into()));
        }
        Ok(())
    }
}

/// L-mean `M^L(a,b) = L⁻¹(L(a)/2 + L(b)/2)`.
pub fn l_mean(l: &OrliczFunction, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    if a == b {
        return a;
    }
    let target = 0.5 * l.eval(a) + 0.5 * l.eval(b);
    // M^L lies between min and max of the inputs.
    bisect_increasing(|t| l.eval(t), target, a.min(b), a.max(b))
}

/// Orlicz mean `inf { t > 0 | L(a/t)/2 + L(b/t)/2 <= 1 }`.
///
/// The defining expression is strictly decreasing in `t`; at `t = max(a,b)`
/// it is `<= 1`, so the infimum is bracketed by `(0, max(a,b)]` and found by
/// bisection.
pub fn orlicz_mean(l: &OrliczFunction, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    if a == b {
        return a;
    }
    let g = |t: f64| 0.5 * l.eval(a / t) + 0.5 * l.eval(b / t);
    let lo = f64::EPSILON * m;
    if g(m) >= 1.0 - 1e-15 {
        return m;
    }
    bisect_decreasing(g, 1.0, lo, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pm(p: f64, a: f64, b: f64) -> f64 {
        p_mean(Exponent::finite(p).unwrap(), a, b)
    }

    #[test]
    fn p_mean_matches_direct_formula() {
        // (0.5*3^2 + 0.5*4^2)^(1/2) = sqrt(12.5)
        assert!((pm(2.0, 3.0, 4.0) - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((pm(1.0, 3.0, 5.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn p_mean_infinity_is_max() {
        assert_eq!(p_mean(Exponent::Infinity, 3.0, 4.0), 4.0);
        assert_eq!(p_mean(Exponent::Infinity, 4.0, 3.0), 4.0);
        assert_eq!(p_mean(Exponent::Infinity, 0.0, 0.0), 0.0);
    }

    #[test]
    fn p_mean_of_equal_values_is_identity() {
        for p in [1.0, 1.5, 2.0, 7.0, 64.0] {
            assert!((pm(p, 2.5, 2.5) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_rejects_below_one() {
        assert!(Exponent::finite(0.5).is_err());
        assert!(Exponent::finite(f64::NAN).is_err());
        assert!(Exponent::finite(1.0).is_ok());
    }

    #[test]
    fn large_p_is_within_two_percent_of_max() {
        let pairs = [(0.3, 1.7), (2.0, 5.0), (1e-3, 1.0), (10.0, 11.0)];
        for (a, b) in pairs {
            let m64 = pm(64.0, a, b);
            let max = f64::max(a, b);
            assert!(m64 <= max + 1e-12);
            assert!(m64 >= 0.98 * max, "M^64({a},{b}) = {m64} vs max {max}");
        }
    }

    #[test]
    fn l_mean_power_family_matches_p_mean() {
        let l = OrliczFunction::power(2.0).unwrap();
        assert!((l_mean(&l, 3.0, 4.0) - pm(2.0, 3.0, 4.0)).abs() < 1e-9);
        let l = OrliczFunction::power(3.5).unwrap();
        assert!((l_mean(&l, 0.2, 1.9) - pm(3.5, 0.2, 1.9)).abs() < 1e-9);
    }

    #[test]
    fn l_mean_cube_family_at_one_two() {
        // L(r) = r^3: L⁻¹(0.5*1 + 0.5*8) = 4.5^(1/3)
        let l = OrliczFunction::power(3.0).unwrap();
        let expected = 4.5f64.powf(1.0 / 3.0);
        assert!((l_mean(&l, 1.0, 2.0) - expected).abs() < 1e-9);
        assert!((expected - 1.650_963_6).abs() < 1e-6);
    }

    #[test]
    fn l_mean_fixed_point_and_zero_extension() {
        let l = OrliczFunction::exp_minus_one();
        assert!((l_mean(&l, 0.7, 0.7) - 0.7).abs() < 1e-12);
        // a = 0 uses the continuous extension L(0) = 0
        let v = l_mean(&l, 0.0, 1.0);
        assert!(v > 0.0 && v < 1.0);
        assert!((l.eval(v) - 0.5 * l.eval(1.0)).abs() < 1e-9);
    }

    #[test]
    fn orlicz_mean_power_family_matches_p_mean() {
        for p in [1.5, 2.0, 3.0] {
            let l = OrliczFunction::power(p).unwrap();
            for (a, b) in [(3.0, 4.0), (0.1, 2.2), (0.0, 1.0)] {
                let got = orlicz_mean(&l, a, b);
                let want = pm(p, a, b);
                assert!((got - want).abs() < 1e-9, "p={p} a={a} b={b}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn orlicz_mean_degenerate_and_fixed_point() {
        let l = OrliczFunction::exp_minus_one();
        assert_eq!(orlicz_mean(&l, 0.0, 0.0), 0.0);
        assert!((orlicz_mean(&l, 1.3, 1.3) - 1.3).abs() < 1e-12);
        // the defining equation holds at the returned value
        let t = orlicz_mean(&l, 0.4, 2.0);
        let g = 0.5 * l.eval(0.4 / t) + 0.5 * l.eval(2.0 / t);
        assert!((g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn named_families_pass_validation() {
        OrliczFunction::power(2.0).unwrap().validate(64).unwrap();
        OrliczFunction::exp_minus_one().validate(64).unwrap();
    }

    #[test]
    fn table_family_validates_and_evaluates() {
        let t = OrliczFunction::table(vec![(0.5, 0.25), (1.0, 1.0), (2.0, 4.0), (3.0, 9.5)])
            .unwrap();
        assert!((t.eval(1.0) - 1.0).abs() < 1e-12);
        assert!(t.eval(1.5) > t.eval(1.2));
        assert!(OrliczFunction::table(vec![(1.0, 1.0)]).is_err());
        // non-convex secants rejected
        assert!(OrliczFunction::table(vec![(0.5, 0.1), (1.0, 1.0), (2.0, 1.4)]).is_err());
    }

    #[test]
    fn parse_cli_descriptors() {
        assert_eq!(
            OrliczFunction::parse("pow:2.5").unwrap(),
            OrliczFunction::Power { p: 2.5 }
        );
        assert_eq!(
            OrliczFunction::parse("exp-minus-one").unwrap(),
            OrliczFunction::ExpMinusOne
        );
        assert!(OrliczFunction::parse("nope").is_err());
    }

    proptest! {
        #[test]
        fn p_mean_monotone_in_p(a in 0.0f64..10.0, b in 0.0f64..10.0,
                                p in 1.0f64..8.0, dp in 0.0f64..8.0) {
            let lo = pm(p, a, b);
            let hi = pm(p + dp, a, b);
            prop_assert!(lo <= hi + 1e-12);
            prop_assert!(hi <= a.max(b) + 1e-12);
            prop_assert!(lo + 1e-12 >= 0.5 * (a + b));
        }

        #[test]
        fn means_are_symmetric_and_homogeneous(a in 0.0f64..5.0, b in 0.0f64..5.0,
                                               s in 0.1f64..4.0, p in 1.0f64..6.0) {
            let l = OrliczFunction::power(p).unwrap();
            prop_assert!((l_mean(&l, a, b) - l_mean(&l, b, a)).abs() < 1e-9);
            prop_assert!((orlicz_mean(&l, a, b) - orlicz_mean(&l, b, a)).abs() < 1e-9);
            prop_assert!((orlicz_mean(&l, s * a, s * b) - s * orlicz_mean(&l, a, b)).abs() < 1e-8);
            prop_assert!((l_mean(&l, s * a, s * b) - s * l_mean(&l, a, b)).abs() < 1e-8);
        }
    }
}
