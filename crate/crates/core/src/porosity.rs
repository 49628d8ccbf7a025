//! Free-cube geometry of point sets: inventories of maximal free dyadic
//! cubes, the volume scales `V_s`, open-interval gap scales, and porosity
//! classification with exact median-distance sandwich diagnostics.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::cube::{CellBudget, Cube, DyadicCube};
use crate::error::{Error, Result};
use crate::median::{upper_median_of_sorted, MedianParams};
use crate::points::PointSet;
use crate::rational::{fmt_rat, rat_to_f64, Rat};
use crate::real::Real;

/// All maximal free dyadic cubes of `root` down to `max_depth`: every listed
/// cube misses the set, no listed cube contains another, and every free
/// dyadic cube of depth ≤ `max_depth` lies inside some listed cube.
#[derive(Debug, Clone)]
pub struct FreeCubeInventory {
    pub root: Cube,
    pub max_depth: u32,
    pub cubes: Vec<DyadicCube>,
    /// Measure of one cell at the truncation depth; answers that would need
    /// cubes smaller than this are flagged rather than guessed.
    pub resolution_floor: Rat,
}

/// Depth-first scan: emit free cubes, descend only into non-free ones.
pub fn free_cube_inventory(
    set: &PointSet,
    root: &Cube,
    max_depth: u32,
    budget: CellBudget,
) -> Result<FreeCubeInventory> {
    if set.dim() != root.dim() {
        return Err(Error::InvalidParams("set and cube dimensions differ".into()));
    }
    let mut cubes = Vec::new();
    let mut visited: u64 = 0;
    let mut stack = vec![DyadicCube::whole(root.clone())];
    while let Some(q) = stack.pop() {
        visited += 1;
        if visited > budget.0 {
            return Err(Error::CellBudget { required: visited as u128, budget: budget.0 });
        }
        if !set.meets_cube(&q.realize()) {
            cubes.push(q);
        } else if q.level() < max_depth {
            stack.extend(q.children());
        }
    }
    cubes.sort();
    let resolution_floor =
        root.measure() * crate::rational::pow2(-((max_depth * root.dim() as u32) as i32));
    Ok(FreeCubeInventory { root: root.clone(), max_depth, cubes, resolution_floor })
}

/// A truncation-aware volume value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VsValue {
    Exact(Rat),
    /// The inventory cannot certify the value at this depth: the answer is
    /// below the resolution floor (possibly zero).
    BelowResolution,
}

impl VsValue {
    pub fn exact(&self) -> Option<&Rat> {
        match self {
            VsValue::Exact(v) => Some(v),
            VsValue::BelowResolution => None,
        }
    }

    pub fn display(&self) -> String {
        match self {
            VsValue::Exact(v) => fmt_rat(v),
            VsValue::BelowResolution => "below-resolution".into(),
        }
    }
}

/// Largest `δ` such that the maximal free dyadic cubes of measure ≥ δ cover
/// at least a `(1-s)` fraction of the root; `s = 1` degenerates to the
/// largest free-cube measure.
pub fn vs_volume(inv: &FreeCubeInventory, s: &Rat) -> Result<VsValue> {
    if !s.is_positive() || s > &Rat::one() {
        return Err(Error::InvalidParams(format!("volume index must lie in (0,1], got {s}")));
    }
    let mut measures: Vec<Rat> = inv.cubes.iter().map(|c| c.measure()).collect();
    measures.sort();
    measures.reverse();
    if s.is_one() {
        return Ok(match measures.first() {
            Some(m) => VsValue::Exact(m.clone()),
            None => VsValue::BelowResolution,
        });
    }
    let target = (Rat::one() - s) * inv.root.measure();
    let mut total = Rat::zero();
    for m in &measures {
        total += m;
        if total >= target {
            return Ok(VsValue::Exact(m.clone()));
        }
    }
    Ok(VsValue::BelowResolution)
}

/// `V_s` together with the side scale `L_s = V_s^{1/n}`.
pub fn vs_volume_with_length(inv: &FreeCubeInventory, s: &Rat) -> Result<(VsValue, Option<Real>)> {
    let v = vs_volume(inv, s)?;
    let l = match &v {
        VsValue::Exact(m) => Some(Real::rational_pow(
            m,
            &Rat::new(BigInt::one(), BigInt::from(inv.root.dim() as i64)),
        )?),
        VsValue::BelowResolution => None,
    };
    Ok((v, l))
}

/// Gap scale of an open interval against a 1D point set: the largest `δ`
/// such that the free gaps of length ≥ δ cover a `(1-s)` fraction of the
/// interval. `s = 1` gives the longest gap.
pub fn gap_length_scale(set: &PointSet, lo: &Real, hi: &Real, s: &Rat) -> Result<Real> {
    if !s.is_positive() || s > &Rat::one() {
        return Err(Error::InvalidParams(format!("gap index must lie in (0,1], got {s}")));
    }
    let gaps = free_gaps(set, lo, hi)?;
    if s.is_one() {
        return gaps.into_iter().max().ok_or(Error::InsufficientCoverage);
    }
    let length = hi.clone() - lo.clone();
    let target = length.mul_rat(&(Rat::one() - s));
    let mut sorted = gaps;
    sorted.sort();
    sorted.reverse();
    let mut total = Real::zero();
    for g in &sorted {
        total += g.clone();
        if total >= target {
            return Ok(g.clone());
        }
    }
    Err(Error::InsufficientCoverage)
}

/// Lengths of the maximal open free subintervals of `(lo, hi)`.
pub fn free_gaps(set: &PointSet, lo: &Real, hi: &Real) -> Result<Vec<Real>> {
    if set.dim() != 1 {
        return Err(Error::InvalidParams("gap analysis is 1D-only".into()));
    }
    if lo >= hi {
        return Err(Error::InvalidParams("empty interval".into()));
    }
    let inside: Vec<Real> = set
        .points_in_closed_interval(lo, hi)?
        .into_iter()
        .filter(|p| p > lo && p < hi)
        .collect();
    let mut gaps = Vec::with_capacity(inside.len() + 1);
    let mut prev = lo.clone();
    for p in inside {
        let g = p.clone() - prev;
        if g.sign() > 0 {
            gaps.push(g);
        }
        prev = p;
    }
    let last = hi.clone() - prev;
    if last.sign() > 0 {
        gaps.push(last);
    }
    Ok(gaps)
}

#[derive(Debug, Clone)]
pub struct PorosityConfig {
    /// Density threshold: classification flags require the relevant volume
    /// ratio to stay within `1/delta` across the tested family.
    pub delta: Rat,
    /// Porosity flag threshold: `V_1 ≥ porous_fraction · |Q|` per cube.
    pub porous_fraction: Rat,
    pub depth: u32,
    pub budget: CellBudget,
}

impl PorosityConfig {
    pub fn new(depth: u32) -> Self {
        PorosityConfig {
            delta: crate::rational::rat(1, 16),
            porous_fraction: crate::rational::rat(1, 64),
            depth,
            budget: CellBudget::default(),
        }
    }
}

/// Per-cube diagnostics. Ratios are present only when both volumes resolved
/// above the truncation floor.
#[derive(Debug, Clone)]
pub struct PorosityCubeRow {
    pub cube: Cube,
    pub meets_set: bool,
    /// For cubes missing the set: whether the doubled cube meets it. Such
    /// cubes put no constraint on the classification.
    pub double_meets_set: Option<bool>,
    pub v_s: Option<VsValue>,
    pub v_t: Option<VsValue>,
    pub v_1: Option<VsValue>,
    pub ratio_weak: Option<Rat>,
    pub ratio_median: Option<Rat>,
    /// `M_s(dist)ⁿ`, `M_t(dist)ⁿ` of the cell-infimum discretization.
    pub median_low_pow: Option<Real>,
    pub median_high_pow: Option<Real>,
    /// `M_s(dist)ⁿ ≤ 2ⁿ V_s`, exact.
    pub sandwich_lower_ok: Option<bool>,
    /// `V_s ≤ (1-η)⁻¹ M_t(dist)ⁿ` with `ηⁿ = (1-t)/(1-s)`, exact.
    pub sandwich_upper_ok: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct PorosityReport {
    pub set: String,
    pub params: (Rat, Rat),
    pub depth: u32,
    pub delta: Rat,
    pub rows: Vec<PorosityCubeRow>,
    pub worst_ratio_weak: Option<Rat>,
    pub worst_ratio_median: Option<Rat>,
    /// Any cube whose volumes fell below the resolution floor.
    pub truncated: bool,
    pub flag_porous: bool,
    pub flag_weakly_porous: bool,
    pub flag_median_porous: bool,
}

/// Median values of the cell-infimum discretization of the distance
/// function on `D_depth(q)`, raised to the n-th power.
fn distance_median_powers(
    set: &PointSet,
    q: &Cube,
    p: &MedianParams,
    depth: u32,
    budget: CellBudget,
) -> Result<(Real, Real)> {
    let cells = crate::cube::cell_partition(q, depth, budget)?;
    let mass = cells[0].measure();
    let mut values: Vec<(Real, Rat)> = cells
        .iter()
        .map(|c| (set.min_dist_to_cube(&c.realize()), mass.clone()))
        .collect();
    values.sort_by(|a, b| a.0.cmp(&b.0));
    let m_low = upper_median_of_sorted(&values, p.s())?;
    let m_high = upper_median_of_sorted(&values, p.t())?;
    let n = q.dim() as u32;
    Ok((m_low.pow_int(n), m_high.pow_int(n)))
}

/// Volume, ratio, and sandwich diagnostics for a family of test cubes.
pub fn porosity_report(
    set: &PointSet,
    family: &[Cube],
    p: &MedianParams,
    cfg: &PorosityConfig,
) -> Result<PorosityReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if p.s().is_zero() {
        return Err(Error::InvalidParams("porosity diagnostics need s > 0".into()));
    }
    let n = set.dim() as u32;
    let two_pow_n = crate::rational::pow2(n as i32);
    // ηⁿ = (1-t)/(1-s)
    let eta = Real::rational_pow(
        &((Rat::one() - p.t()) / (Rat::one() - p.s())),
        &Rat::new(BigInt::one(), BigInt::from(n as i64)),
    )?;
    let mut rows = Vec::with_capacity(family.len());
    let mut truncated = false;
    let mut worst_weak: Option<Rat> = None;
    let mut worst_median: Option<Rat> = None;
    let mut porous = true;
    let mut weakly = true;
    let mut median = true;
    let inv_delta = Rat::one() / &cfg.delta;
    for q in family {
        if !set.meets_cube(q) {
            rows.push(PorosityCubeRow {
                cube: q.clone(),
                meets_set: false,
                double_meets_set: Some(set.meets_cube(&q.dilate(&Rat::from_integer(2.into())))),
                v_s: None,
                v_t: None,
                v_1: None,
                ratio_weak: None,
                ratio_median: None,
                median_low_pow: None,
                median_high_pow: None,
                sandwich_lower_ok: None,
                sandwich_upper_ok: None,
            });
            continue;
        }
        let inv = free_cube_inventory(set, q, cfg.depth, cfg.budget)?;
        let v_s = vs_volume(&inv, p.s())?;
        let v_t = vs_volume(&inv, p.t())?;
        let v_1 = vs_volume(&inv, &Rat::one())?;
        let (ratio_weak, ratio_median) = match (&v_s, &v_t, &v_1) {
            (VsValue::Exact(vs), VsValue::Exact(vt), VsValue::Exact(v1)) => {
                (Some(v1 / vs), Some(vt / vs))
            }
            _ => {
                truncated = true;
                (None, None)
            }
        };
        if let Some(r) = &ratio_weak {
            if worst_weak.as_ref().map_or(true, |w| r > w) {
                worst_weak = Some(r.clone());
            }
            if r > &inv_delta {
                weakly = false;
            }
        }
        if let Some(r) = &ratio_median {
            if worst_median.as_ref().map_or(true, |w| r > w) {
                worst_median = Some(r.clone());
            }
            if r > &inv_delta {
                median = false;
            }
        }
        if let VsValue::Exact(v1) = &v_1 {
            if v1 < &(&cfg.porous_fraction * q.measure()) {
                porous = false;
            }
        } else {
            porous = false;
        }
        let (m_low_pow, m_high_pow) =
            distance_median_powers(set, q, p, cfg.depth, cfg.budget)?;
        let (lower_ok, upper_ok) = match &v_s {
            VsValue::Exact(vs) => {
                let lower = m_low_pow <= Real::from_rat(&two_pow_n * vs);
                // V_s ≤ (1-η)⁻¹ M_tⁿ  ⇔  V_s - M_tⁿ ≤ V_s·η
                let upper = Real::from_rat(vs.clone()) - m_high_pow.clone()
                    <= Real::from_rat(vs.clone()) * eta.clone();
                (Some(lower), Some(upper))
            }
            VsValue::BelowResolution => (None, None),
        };
        rows.push(PorosityCubeRow {
            cube: q.clone(),
            meets_set: true,
            double_meets_set: None,
            v_s: Some(v_s),
            v_t: Some(v_t),
            v_1: Some(v_1),
            ratio_weak,
            ratio_median,
            median_low_pow: Some(m_low_pow),
            median_high_pow: Some(m_high_pow),
            sandwich_lower_ok: lower_ok,
            sandwich_upper_ok: upper_ok,
        });
    }
    Ok(PorosityReport {
        set: set.describe(),
        params: (p.s().clone(), p.t().clone()),
        depth: cfg.depth,
        delta: cfg.delta.clone(),
        rows,
        worst_ratio_weak: worst_weak,
        worst_ratio_median: worst_median,
        truncated,
        flag_porous: porous,
        flag_weakly_porous: weakly,
        flag_median_porous: median,
    })
}

impl PorosityReport {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let corner: Vec<String> = r.cube.corner().iter().map(fmt_rat).collect();
                json!({
                    "corner": corner,
                    "side": fmt_rat(r.cube.side()),
                    "meets_set": r.meets_set,
                    "double_meets_set": r.double_meets_set,
                    "v_s": r.v_s.as_ref().map(|v| v.display()),
                    "v_t": r.v_t.as_ref().map(|v| v.display()),
                    "v_1": r.v_1.as_ref().map(|v| v.display()),
                    "ratio_weak": r.ratio_weak.as_ref().map(fmt_rat),
                    "ratio_median": r.ratio_median.as_ref().map(fmt_rat),
                    "median_low_pow": r.median_low_pow.as_ref().map(|x| x.to_f64()),
                    "median_high_pow": r.median_high_pow.as_ref().map(|x| x.to_f64()),
                    "sandwich_lower_ok": r.sandwich_lower_ok,
                    "sandwich_upper_ok": r.sandwich_upper_ok,
                })
            })
            .collect();
        json!({
            "schema": 1,
            "set": self.set,
            "s": fmt_rat(&self.params.0),
            "t": fmt_rat(&self.params.1),
            "depth": self.depth,
            "delta": fmt_rat(&self.delta),
            "worst_ratio_weak": self.worst_ratio_weak.as_ref().map(fmt_rat),
            "worst_ratio_median": self.worst_ratio_median.as_ref().map(fmt_rat),
            "truncated": self.truncated,
            "flags": {
                "porous": self.flag_porous,
                "weakly_porous": self.flag_weakly_porous,
                "median_porous": self.flag_median_porous,
            },
            "cubes": rows,
        })
    }

    /// One CSV row per cube: corner, side, V_s, V_t, V_1, ratios.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corner,side,v_s,v_t,v_1,ratio_weak,ratio_median\n");
        for r in &self.rows {
            let corner: Vec<String> = r.cube.corner().iter().map(fmt_rat).collect();
            let field = |v: &Option<VsValue>| -> String {
                v.as_ref().map(|x| x.display()).unwrap_or_default()
            };
            let ratio = |v: &Option<Rat>| -> String {
                v.as_ref().map(|x| format!("{}", rat_to_f64(x))).unwrap_or_default()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                corner.join(";"),
                fmt_rat(r.cube.side()),
                field(&r.v_s),
                field(&r.v_t),
                field(&r.v_1),
                ratio(&r.ratio_weak),
                ratio(&r.ratio_median),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn budget() -> CellBudget {
        CellBudget::default()
    }

    #[test]
    fn inventory_lattice_interval() {
        // Maximal free cubes of [0,2) down to side 1/8: one run of halving
        // intervals right of each integer.
        let e = PointSet::lattice(1).unwrap();
        let root = Cube::interval(rat_int(0), rat_int(2)).unwrap();
        let inv = free_cube_inventory(&e, &root, 4, budget()).unwrap();
        let got: Vec<Cube> = inv.cubes.iter().map(|c| c.realize()).collect();
        let expect: Vec<Cube> = [
            (rat(1, 2), rat(1, 2)),
            (rat(3, 2), rat(1, 2)),
            (rat(1, 4), rat(1, 4)),
            (rat(5, 4), rat(1, 4)),
            (rat(1, 8), rat(1, 8)),
            (rat(9, 8), rat(1, 8)),
        ]
        .into_iter()
        .map(|(a, l)| Cube::interval(a, l).unwrap())
        .collect();
        assert_eq!(got, expect);
        // the cells left of each integer stay unresolved at this depth
        assert!(!got.iter().any(|c| c.corner()[0] == rat_int(0)));
    }

    #[test]
    fn inventory_dense_grid_is_empty() {
        // Points spaced at 2^{-J-1} leave no free cube above the floor.
        let pts: Vec<Vec<Rat>> = (0..=16).map(|k| vec![rat(k, 16)]).collect();
        let e = PointSet::finite(pts).unwrap();
        let inv = free_cube_inventory(&e, &Cube::unit(1), 3, budget()).unwrap();
        assert!(inv.cubes.is_empty());
    }

    #[test]
    fn inventory_single_point_origin() {
        let e = PointSet::single_point(vec![rat_int(0)]).unwrap();
        let inv = free_cube_inventory(&e, &Cube::unit(1), 2, budget()).unwrap();
        let got: Vec<Cube> = inv.cubes.iter().map(|c| c.realize()).collect();
        let expect = vec![
            Cube::interval(rat(1, 2), rat(1, 2)).unwrap(),
            Cube::interval(rat(1, 4), rat(1, 4)).unwrap(),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn vs_lattice_examples() {
        let e = PointSet::lattice(1).unwrap();
        let root = Cube::interval(rat_int(0), rat_int(2)).unwrap();
        let inv = free_cube_inventory(&e, &root, 4, budget()).unwrap();
        assert_eq!(vs_volume(&inv, &rat(1, 2)).unwrap(), VsValue::Exact(rat(1, 2)));
        assert_eq!(vs_volume(&inv, &rat(3, 8)).unwrap(), VsValue::Exact(rat(1, 4)));
    }

    #[test]
    fn vs_full_cover_single_cube() {
        // A set far away leaves the root itself free.
        let e = PointSet::single_point(vec![rat_int(100)]).unwrap();
        let inv = free_cube_inventory(&e, &Cube::unit(1), 3, budget()).unwrap();
        for s in [rat(1, 4), rat(1, 2), rat(9, 10), rat_int(1)] {
            assert_eq!(vs_volume(&inv, &s).unwrap(), VsValue::Exact(rat_int(1)));
        }
    }

    #[test]
    fn vs_synthetic_two_scale_inventory() {
        // Four cells of measure 1/16 and thirty-six of measure 1/64:
        // V_{3/4} = 1/16, V_{3/8} = 1/64.
        let root = Cube::unit(2);
        let mut cubes = Vec::new();
        let level2 = crate::cube::cell_partition(&root, 2, budget()).unwrap();
        cubes.extend_from_slice(&level2[0..4]);
        let level3: Vec<DyadicCube> = crate::cube::cell_partition(&root, 3, budget())
            .unwrap()
            .into_iter()
            .filter(|c| !cubes.iter().any(|big| big.contains(c)))
            .take(36)
            .collect();
        cubes.extend(level3);
        let inv = FreeCubeInventory {
            root: root.clone(),
            max_depth: 3,
            cubes,
            resolution_floor: rat(1, 64),
        };
        assert_eq!(vs_volume(&inv, &rat(3, 4)).unwrap(), VsValue::Exact(rat(1, 16)));
        assert_eq!(vs_volume(&inv, &rat(3, 8)).unwrap(), VsValue::Exact(rat(1, 64)));
    }

    #[test]
    fn vs_below_resolution() {
        let pts: Vec<Vec<Rat>> = (0..=16).map(|k| vec![rat(k, 16)]).collect();
        let e = PointSet::finite(pts).unwrap();
        let inv = free_cube_inventory(&e, &Cube::unit(1), 3, budget()).unwrap();
        assert_eq!(vs_volume(&inv, &rat(1, 2)).unwrap(), VsValue::BelowResolution);
    }

    #[test]
    fn vs_monotone_in_s() {
        let e = PointSet::lattice(1).unwrap();
        let root = Cube::interval(rat_int(0), rat_int(4)).unwrap();
        let inv = free_cube_inventory(&e, &root, 6, budget()).unwrap();
        let mut prev: Option<Rat> = None;
        for num in 1..=9 {
            let v = vs_volume(&inv, &rat(num, 10)).unwrap();
            let v = v.exact().cloned().unwrap();
            if let Some(p) = prev {
                assert!(v >= p);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn gap_scale_examples() {
        let e = PointSet::finite(vec![vec![rat_int(0)], vec![rat_int(1)], vec![rat_int(3)]])
            .unwrap();
        let lo = Real::zero();
        let hi = Real::from_int(3);
        assert_eq!(gap_length_scale(&e, &lo, &hi, &rat(1, 2)).unwrap(), Real::from_int(2));
        assert_eq!(gap_length_scale(&e, &lo, &hi, &rat(1, 6)).unwrap(), Real::from_int(1));
        assert_eq!(gap_length_scale(&e, &lo, &hi, &Rat::one()).unwrap(), Real::from_int(2));
    }

    #[test]
    fn gap_scale_whole_interval_free() {
        let e = PointSet::single_point(vec![rat_int(50)]).unwrap();
        let lo = Real::zero();
        let hi = Real::from_int(3);
        for s in [rat(1, 4), rat(1, 2), rat_int(1)] {
            assert_eq!(gap_length_scale(&e, &lo, &hi, &s).unwrap(), Real::from_int(3));
        }
    }

    #[test]
    fn gap_scale_power_gamma_interval() {
        // (1,3) against square-root points: scale at 1/2 is 2-√3.
        let e = PointSet::power_gamma(rat(1, 2), 100, false).unwrap();
        let l = gap_length_scale(&e, &Real::from_int(1), &Real::from_int(3), &rat(1, 2)).unwrap();
        assert_eq!(l, Real::from_int(2) - Real::sqrt_rat(&rat_int(3)).unwrap());
    }

    #[test]
    fn porosity_report_single_point() {
        let e = PointSet::single_point(vec![rat_int(0)]).unwrap();
        let p = MedianParams::new(rat(1, 2), rat(3, 4)).unwrap();
        let family = vec![
            Cube::interval(rat_int(-1), rat_int(2)).unwrap(),
            Cube::interval(rat(-1, 2), rat_int(1)).unwrap(),
        ];
        let report = porosity_report(&e, &family, &p, &PorosityConfig::new(6)).unwrap();
        assert!(report.flag_porous);
        for row in &report.rows {
            assert_eq!(row.sandwich_lower_ok, Some(true));
            assert_eq!(row.sandwich_upper_ok, Some(true));
        }
    }

    #[test]
    fn porosity_report_lattice_weakly_porous() {
        let e = PointSet::lattice(1).unwrap();
        let p = MedianParams::new(rat(1, 2), rat(3, 4)).unwrap();
        let family: Vec<Cube> = (1..=3)
            .map(|k| Cube::interval(rat_int(0), rat_int(1 << k)).unwrap())
            .collect();
        let report = porosity_report(&e, &family, &p, &PorosityConfig::new(8)).unwrap();
        assert!(report.flag_weakly_porous);
        assert!(report.flag_median_porous);
        for row in &report.rows {
            assert_eq!(row.sandwich_lower_ok, Some(true));
            assert_eq!(row.sandwich_upper_ok, Some(true));
        }
    }

    #[test]
    fn report_formats() {
        let e = PointSet::single_point(vec![rat_int(0)]).unwrap();
        let p = MedianParams::new(rat(1, 2), rat(3, 4)).unwrap();
        let family = vec![Cube::interval(rat_int(-1), rat_int(2)).unwrap()];
        let report = porosity_report(&e, &family, &p, &PorosityConfig::new(4)).unwrap();
        let j = report.to_json();
        assert_eq!(j["schema"], 1);
        let csv = report.to_csv();
        assert!(csv.starts_with("corner,side,"));
        assert_eq!(csv.lines().count(), 2);
    }
}
