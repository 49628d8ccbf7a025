//! Point sets with exact distance evaluation.
//!
//! Every generator admits three exact primitives: membership of a point of
//! the set in a (half-open or closed) cube, the infimum of the distance
//! function over a closed cube, and the Euclidean distance from a rational
//! point. Values are [`Real`]s: square roots of rationals for lattices and
//! finite sets, differences against `m^γ` for power-gap sets.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::rational::{parse_rat, Rat};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointSet {
    /// A finite list of rational points.
    Finite { dim: usize, points: Vec<Vec<Rat>> },
    /// The integer lattice ℤⁿ.
    Lattice { dim: usize },
    /// A coordinate subspace `{x : x_{d+1} = … = x_n = 0}` of dimension `d < n`.
    Subspace { dim: usize, subspace_dim: usize },
    /// The 1D set `{±m^γ : 1 ≤ m ≤ bound}` for rational `γ ∈ (0,1)`,
    /// optionally including the origin.
    PowerGamma { gamma: Rat, bound: u64, include_zero: bool },
}

impl PointSet {
    pub fn finite(points: Vec<Vec<Rat>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or(Error::EmptyFamily)?;
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParams("inconsistent point dimensions".into()));
        }
        Ok(PointSet::Finite { dim, points })
    }

    pub fn single_point(point: Vec<Rat>) -> Result<Self> {
        PointSet::finite(vec![point])
    }

    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("lattice needs dimension ≥ 1".into()));
        }
        Ok(PointSet::Lattice { dim })
    }

    pub fn subspace(dim: usize, subspace_dim: usize) -> Result<Self> {
        if subspace_dim >= dim {
            return Err(Error::InvalidParams("subspace dimension must be below ambient".into()));
        }
        Ok(PointSet::Subspace { dim, subspace_dim })
    }

    pub fn power_gamma(gamma: Rat, bound: u64, include_zero: bool) -> Result<Self> {
        if !gamma.is_positive() || gamma >= Rat::one() {
            return Err(Error::InvalidParams(format!("need 0 < gamma < 1, got {gamma}")));
        }
        if bound < 2 {
            return Err(Error::InvalidParams("power-gap set needs bound ≥ 2".into()));
        }
        Ok(PointSet::PowerGamma { gamma, bound, include_zero })
    }

    /// Parses one point per line, whitespace-separated rational coordinates.
    pub fn from_point_lines(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords: Result<Vec<Rat>> = line.split_whitespace().map(parse_rat).collect();
            points.push(coords?);
        }
        PointSet::finite(points)
    }

    pub fn dim(&self) -> usize {
        match self {
            PointSet::Finite { dim, .. } => *dim,
            PointSet::Lattice { dim } => *dim,
            PointSet::Subspace { dim, .. } => *dim,
            PointSet::PowerGamma { .. } => 1,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PointSet::Finite { points, dim } => format!("finite[{} points, dim {dim}]", points.len()),
            PointSet::Lattice { dim } => format!("Z^{dim}"),
            PointSet::Subspace { dim, subspace_dim } => {
                format!("subspace[dim {subspace_dim} in R^{dim}]")
            }
            PointSet::PowerGamma { gamma, bound, include_zero } => format!(
                "powers[gamma {gamma}, bound {bound}{}]",
                if *include_zero { ", with 0" } else { "" }
            ),
        }
    }

    /// `m^γ` as an exact value.
    pub fn gamma_point(gamma: &Rat, m: u64) -> Real {
        Real::rational_pow(&Rat::from_integer(BigInt::from(m)), gamma)
            .expect("positive base, positive exponent")
    }

    /// All points of the set contained in the closed interval `[lo, hi]`
    /// (1D sets only), sorted ascending.
    pub fn points_in_closed_interval(&self, lo: &Real, hi: &Real) -> Result<Vec<Real>> {
        if self.dim() != 1 {
            return Err(Error::InvalidParams("interval point listing is 1D-only".into()));
        }
        if lo > hi {
            return Ok(Vec::new());
        }
        let mut out: Vec<Real> = Vec::new();
        match self {
            PointSet::Finite { points, .. } => {
                for p in points {
                    let v = Real::from_rat(p[0].clone());
                    if &v >= lo && &v <= hi {
                        out.push(v);
                    }
                }
                out.sort();
                out.dedup();
            }
            PointSet::Lattice { .. } => {
                let (llo, _) = lo.enclosure(32);
                let (_, hhi) = hi.enclosure(32);
                let mut k = llo.floor().to_integer() - BigInt::one();
                let end = hhi.ceil().to_integer() + BigInt::one();
                while k <= end {
                    let v = Real::from_rat(Rat::from_integer(k.clone()));
                    if &v >= lo && &v <= hi {
                        out.push(v);
                    }
                    k += BigInt::one();
                }
            }
            PointSet::Subspace { .. } => {
                let zero = Real::zero();
                if lo <= &zero && hi >= &zero {
                    out.push(zero);
                }
            }
            PointSet::PowerGamma { gamma, bound, include_zero } => {
                if *include_zero {
                    let zero = Real::zero();
                    if lo <= &zero && hi >= &zero {
                        out.push(zero);
                    }
                }
                // positive side: m^γ ∈ [max(lo,0), hi]
                let m_lo = self.first_gamma_index_at_or_above(gamma, *bound, lo);
                if let Some(mut m) = m_lo {
                    while m <= *bound {
                        let v = Self::gamma_point(gamma, m);
                        if &v > hi {
                            break;
                        }
                        out.push(v);
                        m += 1;
                    }
                }
                // negative side: -m^γ ∈ [lo, min(hi,0)]
                let neg_hi = -lo.clone();
                let neg_lo = -hi.clone();
                let m_lo = self.first_gamma_index_at_or_above(gamma, *bound, &neg_lo);
                if let Some(mut m) = m_lo {
                    while m <= *bound {
                        let v = Self::gamma_point(gamma, m);
                        if v > neg_hi {
                            break;
                        }
                        out.push(-v);
                        m += 1;
                    }
                }
                out.sort();
            }
        }
        Ok(out)
    }

    /// Smallest `m ≤ bound` with `m^γ ≥ x`, by binary search with exact
    /// comparisons.
    fn first_gamma_index_at_or_above(&self, gamma: &Rat, bound: u64, x: &Real) -> Option<u64> {
        if &Self::gamma_point(gamma, bound) < x {
            return None;
        }
        let (mut lo, mut hi) = (1u64, bound);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if &Self::gamma_point(gamma, mid) >= x {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// Largest `m ≤ bound` with `m^γ ≤ x`, if any.
    fn last_gamma_index_at_or_below(&self, gamma: &Rat, bound: u64, x: &Real) -> Option<u64> {
        if &Self::gamma_point(gamma, 1) > x {
            return None;
        }
        let (mut lo, mut hi) = (1u64, bound);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if &Self::gamma_point(gamma, mid) <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }

    /// Does the half-open cube contain a point of the set? Exact.
    pub fn meets_cube(&self, q: &Cube) -> bool {
        self.meets_box(q, false)
    }

    /// Does the closed cube contain a point of the set? Exact.
    pub fn meets_closed_cube(&self, q: &Cube) -> bool {
        self.meets_box(q, true)
    }

    fn meets_box(&self, q: &Cube, closed: bool) -> bool {
        debug_assert_eq!(self.dim(), q.dim());
        let inside_axis = |v: &Rat, lo: &Rat, hi: &Rat| -> bool {
            v >= lo && if closed { v <= hi } else { v < hi }
        };
        match self {
            PointSet::Finite { points, .. } => points.iter().any(|p| {
                p.iter().enumerate().all(|(i, v)| {
                    inside_axis(v, &q.corner()[i], &q.upper(i))
                })
            }),
            PointSet::Lattice { dim } => (0..*dim).all(|i| {
                let lo = q.corner()[i].ceil();
                let hi = if closed {
                    q.upper(i).floor()
                } else {
                    // largest integer strictly below the top
                    let u = q.upper(i);
                    if u.is_integer() {
                        u - Rat::one()
                    } else {
                        u.floor()
                    }
                };
                lo <= hi
            }),
            PointSet::Subspace { dim, subspace_dim } => (*subspace_dim..*dim).all(|i| {
                inside_axis(&Rat::zero(), &q.corner()[i], &q.upper(i))
            }),
            PointSet::PowerGamma { .. } => {
                let lo = Real::from_rat(q.corner()[0].clone());
                let hi_closed = Real::from_rat(q.upper(0));
                match self.points_in_closed_interval(&lo, &hi_closed) {
                    Ok(pts) => {
                        if closed {
                            !pts.is_empty()
                        } else {
                            let top = Real::from_rat(q.upper(0));
                            pts.iter().any(|p| p < &top)
                        }
                    }
                    Err(_) => false,
                }
            }
        }
    }

    /// Euclidean distance from a rational point, exactly.
    pub fn distance(&self, x: &[Rat]) -> Real {
        debug_assert_eq!(self.dim(), x.len());
        match self {
            PointSet::Finite { points, .. } => points
                .iter()
                .map(|p| {
                    let sq: Rat = p.iter().zip(x).map(|(pi, xi)| (pi - xi) * (pi - xi)).sum();
                    Real::sqrt_rat(&sq).expect("nonnegative square")
                })
                .min()
                .expect("finite set is nonempty"),
            PointSet::Lattice { .. } => {
                let sq: Rat = x
                    .iter()
                    .map(|xi| {
                        let f = xi.floor();
                        let d = (xi - &f).min(&f + Rat::one() - xi);
                        &d * &d
                    })
                    .sum();
                Real::sqrt_rat(&sq).expect("nonnegative square")
            }
            PointSet::Subspace { dim, subspace_dim } => {
                let sq: Rat = (*subspace_dim..*dim).map(|i| &x[i] * &x[i]).sum();
                Real::sqrt_rat(&sq).expect("nonnegative square")
            }
            PointSet::PowerGamma { gamma, bound, include_zero } => {
                let ax = crate::rational::abs(&x[0]);
                let av = Real::from_rat(ax.clone());
                let mut best: Option<Real> = None;
                let mut consider = |cand: Real| {
                    let d = (av.clone() - cand).abs();
                    if best.as_ref().map_or(true, |b| d < *b) {
                        best = Some(d);
                    }
                };
                if *include_zero {
                    consider(Real::zero());
                }
                match self.last_gamma_index_at_or_below(gamma, *bound, &av) {
                    Some(m) => {
                        consider(Self::gamma_point(gamma, m));
                        if m < *bound {
                            consider(Self::gamma_point(gamma, m + 1));
                        }
                    }
                    None => consider(Self::gamma_point(gamma, 1)),
                }
                best.expect("at least one candidate")
            }
        }
    }

    /// Infimum of the distance function over the closed cube, exactly.
    /// Zero when the closed cube meets the set.
    pub fn min_dist_to_cube(&self, q: &Cube) -> Real {
        debug_assert_eq!(self.dim(), q.dim());
        if self.meets_closed_cube(q) {
            return Real::zero();
        }
        match self {
            PointSet::Finite { points, .. } => points
                .iter()
                .map(|p| {
                    let sq: Rat = p
                        .iter()
                        .enumerate()
                        .map(|(i, pi)| {
                            let below = &q.corner()[i] - pi;
                            let above = pi - q.upper(i);
                            let d = below.max(above).max(Rat::zero());
                            &d * &d
                        })
                        .sum();
                    Real::sqrt_rat(&sq).expect("nonnegative square")
                })
                .min()
                .expect("finite set is nonempty"),
            PointSet::Lattice { dim } => {
                let sq: Rat = (0..*dim)
                    .map(|i| {
                        let lo = q.corner()[i].clone();
                        let hi = q.upper(i);
                        if lo.ceil() <= hi.floor() {
                            Rat::zero()
                        } else {
                            let k = lo.floor();
                            let d = (&lo - &k).min(&k + Rat::one() - &hi);
                            &d * &d
                        }
                    })
                    .sum();
                Real::sqrt_rat(&sq).expect("nonnegative square")
            }
            PointSet::Subspace { dim, subspace_dim } => {
                let sq: Rat = (*subspace_dim..*dim)
                    .map(|i| {
                        let d = q.corner()[i].clone().max(-q.upper(i)).max(Rat::zero());
                        &d * &d
                    })
                    .sum();
                Real::sqrt_rat(&sq).expect("nonnegative square")
            }
            PointSet::PowerGamma { gamma, bound, .. } => {
                let a = Real::from_rat(q.corner()[0].clone());
                let b = Real::from_rat(q.upper(0));
                let mut best: Option<Real> = None;
                let mut consider = |d: Real| {
                    if best.as_ref().map_or(true, |x| d < *x) {
                        best = Some(d);
                    }
                };
                // nearest set point left of a and right of b, both signs
                for (lo_end, hi_end) in [(a.clone(), b.clone()), (-b.clone(), -a.clone())] {
                    if let Some(m) = self.last_gamma_index_at_or_below(gamma, *bound, &lo_end) {
                        consider(lo_end.clone() - Self::gamma_point(gamma, m));
                    }
                    if let Some(m) = self.first_gamma_index_at_or_above(gamma, *bound, &hi_end) {
                        consider(Self::gamma_point(gamma, m) - hi_end.clone());
                    }
                }
                if self.includes_origin() {
                    consider(a.clone().abs().min(b.abs()));
                }
                best.expect("set nonempty")
            }
        }
    }

    fn includes_origin(&self) -> bool {
        matches!(self, PointSet::PowerGamma { include_zero: true, .. })
    }

    /// Bounds `(lower, upper)` on the supremum of the distance function over
    /// the closed cube. Exact (equal bounds) in 1D; corner-based in general.
    pub fn max_dist_over_cube(&self, q: &Cube) -> (Real, Real) {
        if self.dim() == 1 {
            let a = Real::from_rat(q.corner()[0].clone());
            let b = Real::from_rat(q.upper(0));
            let pts = self
                .points_in_closed_interval(&a, &b)
                .expect("1D listing");
            let mut candidates: Vec<Real> = vec![a.clone(), b.clone()];
            // interior peaks at midpoints of consecutive set points
            for w in pts.windows(2) {
                candidates.push((w[0].clone() + w[1].clone()).mul_rat(&crate::rational::rat(1, 2)));
            }
            let best = candidates
                .into_iter()
                .map(|c| self.distance_real_1d(&c))
                .max()
                .expect("nonempty candidates");
            (best.clone(), best)
        } else {
            // upper: distance from every corner to one witness point;
            // lower: distance at the center.
            let center = q.center();
            let lower = self.distance(&center);
            let mut upper = Real::zero();
            for mask in 0..(1u64 << q.dim()) {
                let corner: Vec<Rat> = q
                    .corner()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if (mask >> i) & 1 == 1 {
                            q.upper(i)
                        } else {
                            c.clone()
                        }
                    })
                    .collect();
                let d = self.distance(&corner);
                if d > upper {
                    upper = d;
                }
            }
            (lower, upper)
        }
    }

    /// 1D distance at a possibly irrational point (used for gap midpoints).
    fn distance_real_1d(&self, x: &Real) -> Real {
        debug_assert_eq!(self.dim(), 1);
        // Nearest points bracket x; list a small closed window around it.
        let window = Real::from_int(2);
        let lo = x.clone() - window.clone();
        let hi = x.clone() + window;
        let pts = self.points_in_closed_interval(&lo, &hi).expect("1D listing");
        let mut best: Option<Real> = None;
        for p in pts {
            let d = (x.clone() - p).abs();
            if best.as_ref().map_or(true, |b| d < *b) {
                best = Some(d);
            }
        }
        match best {
            Some(d) => d,
            None => {
                // No point within the window; fall back to rational probes.
                let (l, _) = x.enclosure(64);
                self.distance(&[l])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn distance_single_point() {
        let e = PointSet::single_point(vec![rat_int(0)]).unwrap();
        assert_eq!(e.distance(&[rat_int(-3)]), Real::from_int(3));
    }

    #[test]
    fn distance_lattice_1d() {
        let e = PointSet::lattice(1).unwrap();
        assert_eq!(e.distance(&[rat(9, 4)]), Real::from_rat(rat(1, 4)));
        assert_eq!(e.distance(&[rat_int(7)]), Real::zero());
    }

    #[test]
    fn distance_lattice_2d() {
        let e = PointSet::lattice(2).unwrap();
        let d = e.distance(&[rat(1, 2), rat(1, 2)]);
        // √2/2: compare squares
        assert_eq!(d.clone() * d, Real::from_rat(rat(1, 2)));
    }

    #[test]
    fn distance_power_gamma() {
        let e = PointSet::power_gamma(rat(1, 2), 100, false).unwrap();
        // dist(3, E) = min(3-√8, 3-... ) with 9^(1/2)=3 in the set → 0
        assert_eq!(e.distance(&[rat_int(3)]), Real::zero());
        // dist(5/2, E): between √6 ≈ 2.449 and √7 ≈ 2.6458
        let d = e.distance(&[rat(5, 2)]);
        let expect = (Real::from_rat(rat(5, 2)) - Real::sqrt_rat(&rat_int(6)).unwrap())
            .min(Real::sqrt_rat(&rat_int(7)).unwrap() - Real::from_rat(rat(5, 2)));
        assert_eq!(d, expect);
    }

    #[test]
    fn freeness_lattice() {
        let e = PointSet::lattice(1).unwrap();
        assert!(e.meets_cube(&Cube::interval(rat_int(0), rat(1, 2)).unwrap()));
        assert!(!e.meets_cube(&Cube::interval(rat(1, 2), rat(1, 2)).unwrap()));
        // half-open: [1,2) contains 1
        assert!(e.meets_cube(&Cube::interval(rat_int(1), rat_int(1)).unwrap()));
        // closed [1/2, 1] contains 1, half-open [1/2, 1) does not
        let q = Cube::interval(rat(1, 2), rat(1, 2)).unwrap();
        assert!(e.meets_closed_cube(&q));
        assert!(!e.meets_cube(&q));
    }

    #[test]
    fn freeness_power_gamma() {
        let e = PointSet::power_gamma(rat(1, 2), 10, false).unwrap();
        // (1, √2): free as open gap; [1, √2) as half-open contains 1
        assert!(e.meets_cube(&Cube::interval(rat_int(1), rat(2, 5)).unwrap()));
        // (1.05, 1.4): inside the gap (1, √2 ≈ 1.414)
        assert!(!e.meets_cube(&Cube::interval(rat(21, 20), rat(7, 20)).unwrap()));
        // [1.05, 1.45): contains √2
        assert!(e.meets_cube(&Cube::interval(rat(21, 20), rat(2, 5)).unwrap()));
    }

    #[test]
    fn min_dist_to_cube_examples() {
        let e = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat(1, 8), rat(1, 4)).unwrap(); // [1/8, 3/8]
        assert_eq!(e.min_dist_to_cube(&q), Real::from_rat(rat(1, 8)));
        let e0 = PointSet::single_point(vec![rat_int(0), rat_int(0)]).unwrap();
        let q = Cube::new(vec![rat_int(3), rat_int(4)], rat_int(1)).unwrap();
        assert_eq!(e0.min_dist_to_cube(&q), Real::from_int(5));
    }

    #[test]
    fn points_in_interval_gamma() {
        let e = PointSet::power_gamma(rat(1, 2), 4, false).unwrap();
        let pts = e
            .points_in_closed_interval(&Real::from_int(1), &Real::from_int(2))
            .unwrap();
        // {1, √2, √3, 2}
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0], Real::from_int(1));
        assert_eq!(pts[1], Real::sqrt_rat(&rat_int(2)).unwrap());
        assert_eq!(pts[2], Real::sqrt_rat(&rat_int(3)).unwrap());
        assert_eq!(pts[3], Real::from_int(2));
    }

    #[test]
    fn points_in_interval_negative_side() {
        let e = PointSet::power_gamma(rat(1, 2), 4, false).unwrap();
        let pts = e
            .points_in_closed_interval(&Real::from_int(-2), &Real::from_int(1))
            .unwrap();
        // {-2, -√3, -√2, -1, 1}
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], Real::from_int(-2));
        assert_eq!(pts[4], Real::from_int(1));
    }

    #[test]
    fn subspace_distance() {
        let e = PointSet::subspace(2, 1).unwrap(); // the x-axis
        let d = e.distance(&[rat_int(7), rat(3, 4)]);
        assert_eq!(d, Real::from_rat(rat(3, 4)));
    }

    #[test]
    fn max_dist_1d_exact() {
        let e = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat_int(0), rat_int(1)).unwrap();
        let (lo, hi) = e.max_dist_over_cube(&q);
        assert_eq!(lo, hi);
        assert_eq!(lo, Real::from_rat(rat(1, 2)));
    }

    #[test]
    fn point_file_parsing() {
        let e = PointSet::from_point_lines("0 0\n1/2 3\n# comment\n-1 0.25\n").unwrap();
        match &e {
            PointSet::Finite { dim, points } => {
                assert_eq!(*dim, 2);
                assert_eq!(points.len(), 3);
                assert_eq!(points[2], vec![rat_int(-1), rat(1, 4)]);
            }
            _ => panic!("expected finite set"),
        }
    }
}
