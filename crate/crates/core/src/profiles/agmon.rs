//! Agmon distances `∫|q|` and their floored variants `∫(q² - δ)₊^{1/2}`.

use super::DegeneracyProfile;
use crate::discretize::Grid1D;
use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// The Agmon metric of a profile, optionally floored at level `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgmonMetric {
    profile: DegeneracyProfile,
    delta: f64,
    resolution: usize,
}

impl AgmonMetric {
    pub const DEFAULT_RESOLUTION: usize = 4096;

    pub fn new(profile: DegeneracyProfile, delta: f64, resolution: usize) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
        }
        if resolution < 2 {
            return Err(Error::invalid("quadrature resolution must be at least 2"));
        }
        let resolution = resolution + resolution % 2;
        Ok(Self {
            profile,
            delta,
            resolution,
        })
    }

    /// Unfloored metric with the default resolution.
    pub fn plain(profile: DegeneracyProfile) -> Self {
        Self::new(profile, 0.0, Self::DEFAULT_RESOLUTION).expect("valid defaults")
    }

    pub fn profile(&self) -> &DegeneracyProfile {
        &self.profile
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn integrand(&self, x: f64) -> f64 {
        let q = self.profile.eval(x);
        if self.delta == 0.0 {
            q.abs()
        } else {
            (q * q - self.delta).max(0.0).sqrt()
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.profile.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        Ok(())
    }

    /// `∫_a^b` of the integrand for `a <= b`, both inside the domain.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        if b < a {
            return self.integral(b, a);
        }
        Ok(self.integral_with(a, b, self.resolution))
    }

    /// Integral together with the difference from a half-resolution pass.
    pub fn integral_with_error(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let fine = self.integral(a, b)?;
        let (a, b) = (a.min(b), a.max(b));
        let coarse = self.integral_with(a, b, (self.resolution / 2).max(2));
        Ok((fine, (fine - coarse).abs() / 15.0))
    }

    fn integral_with(&self, a: f64, b: f64, m: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut cuts = vec![a];
        if a < 0.0 && b > 0.0 {
            cuts.push(0.0);
        }
        cuts.extend(self.contact_points(a, b));
        cuts.push(b);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        cuts.windows(2)
            .map(|w| self.piece(w[0], w[1], m))
            .sum()
    }

    /// Points in `(a, b)` where `q² = δ` (or `q = 0` for the plain metric).
    fn contact_points(&self, a: f64, b: f64) -> Vec<f64> {
        let scans = 1024;
        let level = |x: f64| {
            let q = self.profile.eval(x);
            if self.delta == 0.0 {
                q
            } else {
                q * q - self.delta
            }
        };
        let mut out = Vec::new();
        let mut x0 = a;
        let mut f0 = level(a);
        for i in 1..=scans {
            let x1 = a + (b - a) * i as f64 / scans as f64;
            let f1 = level(x1);
            if f0 * f1 < 0.0 {
                let (mut lo, mut hi, mut flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = level(mid);
                    if fm * flo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        out
    }

    /// Composite Simpson after `x = c + (e - c)(3t² - 2t³)`, which smooths
    /// square-root behaviour at either end of `[c, e]`.
    fn piece(&self, c: f64, e: f64, m: usize) -> f64 {
        let len = e - c;
        let f = |t: f64| {
            let x = c + len * t * t * (3.0 - 2.0 * t);
            self.integrand(x) * 6.0 * t * (1.0 - t) * len
        };
        let h = 1.0 / m as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }
}

/// `d_agm(x)`: the integral of the metric between 0 and `x`.
pub fn agmon_distance(metric: &AgmonMetric, x: f64) -> Result<f64> {
    metric.check(x)?;
    metric.integral(x.min(0.0), x.max(0.0))
}

/// The sublevel set `{q² <= δ}` around 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDelta {
    pub interval: Interval,
    pub connected: bool,
    /// True when the set reaches the boundary of the grid.
    pub touches_boundary: bool,
}

/// Maximal interval around 0 on which `q² <= δ`, with endpoints refined by
/// bisection between grid nodes.
pub fn sublevel_set_fdelta(profile: &DegeneracyProfile, delta: f64, grid: &Grid1D) -> Result<FDelta> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let nodes = grid.nodes();
    let inside: Vec<bool> = nodes
        .iter()
        .map(|&x| {
            let q = profile.eval(x);
            q * q <= delta
        })
        .collect();
    let centre = nodes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::invalid("empty grid"))?;
    if !inside[centre] {
        return Err(Error::invalid("q^2 exceeds delta at the node closest to 0; grid too coarse"));
    }
    let mut lo = centre;
    while lo > 0 && inside[lo - 1] {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < nodes.len() && inside[hi + 1] {
        hi += 1;
    }
    let connected = !inside[..lo].iter().any(|&b| b) && !inside[hi + 1..].iter().any(|&b| b);
    if !connected {
        return Err(Error::DisconnectedSublevel { delta });
    }
    let g = |x: f64| {
        let q = profile.eval(x);
        q * q - delta
    };
    let refine = |inner: f64, outer: f64| {
        let (mut a, mut b) = (inner, outer);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if g(m) <= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let left = if lo > 0 { refine(nodes[lo], nodes[lo - 1]) } else { nodes[lo] };
    let right = if hi + 1 < nodes.len() { refine(nodes[hi], nodes[hi + 1]) } else { nodes[hi] };
    Ok(FDelta {
        interval: Interval { lo: left, hi: right },
        connected,
        touches_boundary: lo == 0 || hi + 1 == nodes.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetDistance {
    pub distance: f64,
    /// Set when the zone meets `F_δ`; the distance is then 0.
    pub overlap: bool,
}

/// Infimum over endpoint pairs of the floored Agmon integral between the
/// control zone and `F_δ`.
pub fn agmon_set_distance(metric: &AgmonMetric, zone: &[Interval], fdelta: &Interval) -> Result<SetDistance> {
    if zone.is_empty() {
        return Err(Error::invalid("control zone is empty"));
    }
    let mut best = f64::INFINITY;
    for z in zone {
        if z.overlaps(fdelta) {
            log::warn!("control zone [{}, {}] meets F_delta; distance is 0", z.lo, z.hi);
            return Ok(SetDistance {
                distance: 0.0,
                overlap: true,
            });
        }
        let d = if z.lo > fdelta.hi {
            metric.integral(fdelta.hi, z.lo)?
        } else {
            metric.integral(z.hi, fdelta.lo)?
        };
        best = best.min(d);
    }
    Ok(SetDistance {
        distance: best,
        overlap: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Antiderivative of `sqrt(s² - c²)`.
    fn floored_primitive(s: f64, c: f64) -> f64 {
        let r = (s * s - c * c).max(0.0).sqrt();
        0.5 * (s * r - c * c * (s + r).ln())
    }

    fn linear() -> DegeneracyProfile {
        DegeneracyProfile::monomial(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn plain_distances() {
        let m = AgmonMetric::plain(linear());
        assert!((agmon_distance(&m, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((agmon_distance(&m, -1.0).unwrap() - 0.5).abs() < 1e-12);
        let m = AgmonMetric::plain(DegeneracyProfile::monomial(2, 1.0, 1.0).unwrap());
        assert!((agmon_distance(&m, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(agmon_distance(&m, 1.5).is_err());
    }

    #[test]
    fn floored_integral_matches_primitive() {
        let c = 0.1;
        let oracle = floored_primitive(0.5, c) - floored_primitive(c, c);
        assert!((oracle - 0.111012).abs() < 1e-6);
        let m = AgmonMetric::new(linear(), 0.01, 4096).unwrap();
        let v = m.integral(0.1, 0.5).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        // contact point strictly inside the range of integration
        let v = m.integral(0.0, 0.5).unwrap();
        assert!((v - oracle).abs() < 1e-10);
    }

    #[test]
    fn fdelta_examples() {
        let grid = Grid1D::dirichlet(-1.0, 1.0, 2001).unwrap();
        let f = sublevel_set_fdelta(&linear(), 0.01, &grid).unwrap();
        assert!((f.interval.lo + 0.1).abs() < 1e-12 && (f.interval.hi - 0.1).abs() < 1e-12);
        let q2 = DegeneracyProfile::monomial(2, 1.0, 1.0).unwrap();
        let f = sublevel_set_fdelta(&q2, 1e-4, &grid).unwrap();
        assert!((f.interval.hi - 0.1).abs() < 1e-12);
        let t = DegeneracyProfile::tangent(1.0, 1.0).unwrap();
        let f = sublevel_set_fdelta(&t, 0.01, &grid).unwrap();
        // bracketing oracle on tan² - δ
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m.tan().powi(2) < 0.01 {
                a = m
            } else {
                b = m
            }
        }
        assert!((f.interval.hi - a).abs() < 1e-12);
        assert!((f.interval.lo + a).abs() < 1e-12);
        assert!((a - 0.0997).abs() < 1e-4);
    }

    #[test]
    fn fdelta_disconnected() {
        // q = x (x - 0.5)(x + 2): q² small near 0 and near 0.5
        let q = DegeneracyProfile::polynomial(vec![0.0, -1.0, 1.5, 1.0], 1, 1.0, 1.0).unwrap();
        let grid = Grid1D::dirichlet(-1.0, 1.0, 401).unwrap();
        assert!(matches!(
            sublevel_set_fdelta(&q, 0.01, &grid),
            Err(Error::DisconnectedSublevel { .. })
        ));
        assert!(sublevel_set_fdelta(&linear(), 0.0, &grid).is_err());
    }

    #[test]
    fn set_distances() {
        let m = AgmonMetric::plain(linear());
        let zone = [Interval::new(0.5, 1.0).unwrap()];
        let d = agmon_set_distance(&m, &zone, &Interval::point(0.0)).unwrap();
        assert!((d.distance - 0.125).abs() < 1e-12);
        let both = [Interval::new(-1.0, -0.5).unwrap(), Interval::new(0.5, 1.0).unwrap()];
        let d2 = agmon_set_distance(&m, &both, &Interval::point(0.0)).unwrap();
        assert!((d2.distance - 0.125).abs() < 1e-12);
        let m = AgmonMetric::new(linear(), 0.01, 4096).unwrap();
        let d = agmon_set_distance(&m, &zone, &Interval::new(-0.1, 0.1).unwrap()).unwrap();
        assert!((d.distance - 0.111012).abs() < 1e-4);
        let d = agmon_set_distance(&m, &[Interval::new(0.05, 1.0).unwrap()], &Interval::new(-0.1, 0.1).unwrap())
            .unwrap();
        assert!(d.overlap && d.distance == 0.0);
    }

    #[test]
    fn richardson_error_is_small() {
        let m = AgmonMetric::new(DegeneracyProfile::tangent(1.2, 1.2).unwrap(), 0.01, 4096).unwrap();
        let (_, err) = m.integral_with_error(0.0, 1.1).unwrap();
        assert!(err < 1e-10);
    }
}
