//! Weight-side analytics for powers of distance functions.
//!
//! In one dimension, integrals of `dist(·,E)^p` split over the segments on
//! which the nearest set point is fixed, and each segment has the closed
//! form `[(x-e)^{p+1}/(p+1)]`; with rational segment endpoints those values
//! are exact radicals. Higher dimensions fall back to midpoint quadrature
//! with a reported mesh. Divergence through a set point is a signal, never a
//! number.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::cube::{CellBudget, Cube};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::porosity::{free_cube_inventory, vs_volume, VsValue};
use crate::rational::{fmt_rat, rat, rat_to_f64, Rat};
use crate::real::Real;

/// Exponent slot of the Muckenhoupt scale: `A_1`, finite `A_p`, or `A_∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum PIndex {
    One,
    Finite(Rat),
    Infinity,
}

impl PIndex {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "oo" => Ok(PIndex::Infinity),
            other => {
                let p = crate::rational::parse_rat(other)?;
                if p == Rat::one() {
                    Ok(PIndex::One)
                } else if p > Rat::one() {
                    Ok(PIndex::Finite(p))
                } else {
                    Err(Error::InvalidParams(format!("need p ≥ 1, got {p}")))
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PIndex::One => "1".into(),
            PIndex::Finite(p) => fmt_rat(p),
            PIndex::Infinity => "inf".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightParams {
    pub alpha: Rat,
    pub p: PIndex,
}

impl WeightParams {
    pub fn new(alpha: Rat, p: PIndex) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::InvalidParams("weight exponent must be nonzero".into()));
        }
        Ok(WeightParams { alpha, p })
    }
}

/// Integral value: exact when the closed form stays inside the radical ring,
/// numeric otherwise (log terms, irrational segment endpoints, quadrature).
#[derive(Debug, Clone)]
pub enum IntegralValue {
    Exact(Real),
    Numeric { value: f64, cells: u64 },
}

impl IntegralValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            IntegralValue::Exact(x) => x.to_f64(),
            IntegralValue::Numeric { value, .. } => *value,
        }
    }

    pub fn exact(&self) -> Option<&Real> {
        match self {
            IntegralValue::Exact(x) => Some(x),
            IntegralValue::Numeric { .. } => None,
        }
    }
}

/// Codimension of the generator: the local blowup order of `dist^{-c}`.
fn codimension(set: &PointSet) -> i64 {
    match set {
        PointSet::Subspace { dim, subspace_dim } => (*dim - *subspace_dim) as i64,
        other => other.dim() as i64,
    }
}

/// `∫_Q dist(x,E)^{p} dx`, exactly in 1D (closed forms per nearest-point
/// segment), by midpoint quadrature at `quad_depth` in higher dimensions.
pub fn distance_power_integral(
    set: &PointSet,
    q: &Cube,
    p_exp: &Rat,
    quad_depth: u32,
    budget: CellBudget,
) -> Result<IntegralValue> {
    if p_exp.is_zero() {
        return Ok(IntegralValue::Exact(Real::from_rat(q.measure())));
    }
    // Divergence: approaching the set from a positive-measure side with
    // exponent at or below the negative codimension.
    let neg_codim = Rat::from_integer(BigInt::from(-codimension(set)));
    if p_exp <= &neg_codim && set.meets_closed_cube(q) {
        return Err(Error::Divergence {
            cube: q.describe(),
            exponent: fmt_rat(p_exp),
        });
    }
    if set.dim() == 1 {
        integral_1d(set, q, p_exp)
    } else {
        let cells = crate::cube::cell_partition(q, quad_depth, budget)?;
        let mass = cells[0].measure();
        let mut total = 0.0f64;
        for c in cells.iter() {
            let d = set.distance(&c.realize().center()).to_f64();
            total += d.powf(rat_to_f64(p_exp)) * rat_to_f64(&mass);
        }
        Ok(IntegralValue::Numeric { value: total, cells: cells.len() as u64 })
    }
}

/// Nearest-point segments of `[a,b]`: consecutive breakpoints with the
/// anchoring set point for each piece.
fn nearest_point_segments(set: &PointSet, a: &Real, b: &Real) -> Result<Vec<(Real, Real, Real)>> {
    // Points inside plus the nearest on each side, if any.
    let margin = b.clone() - a.clone();
    let wide_lo = a.clone() - margin.clone();
    let wide_hi = b.clone() + margin;
    let mut pts = set.points_in_closed_interval(&wide_lo, &wide_hi)?;
    if pts.is_empty() {
        // fall back to the distance at the endpoints to locate one anchor
        let (alo, _) = a.enclosure(64);
        let d = set.distance(&[alo.clone()]);
        let left = Real::from_rat(alo.clone()) - d.clone();
        let right = Real::from_rat(alo) + d;
        pts = vec![if set.distance_is_zero_at(&left) { left } else { right }];
    }
    let half = rat(1, 2);
    let mut segments = Vec::new();
    let mut cursor = a.clone();
    let mut anchor_idx = 0usize;
    // advance the anchor until its nearest-point region covers `cursor`
    loop {
        let next_mid = if anchor_idx + 1 < pts.len() {
            Some((pts[anchor_idx].clone() + pts[anchor_idx + 1].clone()).mul_rat(&half))
        } else {
            None
        };
        match next_mid {
            Some(m) if m < cursor => anchor_idx += 1,
            _ => break,
        }
    }
    while cursor < *b {
        let region_end = if anchor_idx + 1 < pts.len() {
            (pts[anchor_idx].clone() + pts[anchor_idx + 1].clone()).mul_rat(&half)
        } else {
            b.clone()
        };
        let end = if region_end < *b { region_end.clone() } else { b.clone() };
        if end > cursor {
            let anchor = pts[anchor_idx].clone();
            // split at the anchor so |x - e| is monotone on each piece
            if anchor > cursor && anchor < end {
                segments.push((cursor.clone(), anchor.clone(), anchor.clone()));
                segments.push((anchor.clone(), end.clone(), anchor));
            } else {
                segments.push((cursor.clone(), end.clone(), anchor));
            }
            cursor = end;
        }
        if region_end < *b {
            anchor_idx += 1;
        } else {
            break;
        }
    }
    Ok(segments)
}

fn integral_1d(set: &PointSet, q: &Cube, p_exp: &Rat) -> Result<IntegralValue> {
    let a = Real::from_rat(q.corner()[0].clone());
    let b = Real::from_rat(q.upper(0));
    let segments = nearest_point_segments(set, &a, &b)?;
    let p_plus_one = p_exp + Rat::one();
    let mut exact_total = Real::zero();
    let mut numeric_total = 0.0f64;
    let mut exact_ok = true;
    for (u, v, e) in &segments {
        // |x - e| runs from d_u to d_v monotonically on the segment
        let du = (u.clone() - e.clone()).abs();
        let dv = (v.clone() - e.clone()).abs();
        let (lo_d, hi_d) = if du <= dv { (du, dv) } else { (dv, du) };
        if p_plus_one.is_zero() {
            // ∫ 1/x = log; numeric
            exact_ok = false;
            let lo = lo_d.to_f64().max(f64::MIN_POSITIVE);
            numeric_total += (hi_d.to_f64().ln() - lo.ln()).abs();
            continue;
        }
        match (lo_d.as_rational(), hi_d.as_rational()) {
            (Some(lo), Some(hi)) if exact_ok => {
                let hi_pow = Real::rational_pow(&hi, &p_plus_one)?;
                let lo_pow = if lo.is_zero() {
                    if p_plus_one.is_negative() {
                        return Err(Error::Divergence {
                            cube: q.describe(),
                            exponent: fmt_rat(p_exp),
                        });
                    }
                    Real::zero()
                } else {
                    Real::rational_pow(&lo, &p_plus_one)?
                };
                exact_total += (hi_pow - lo_pow).mul_rat(&(Rat::one() / &p_plus_one));
            }
            _ => {
                exact_ok = false;
                let pe = rat_to_f64(&p_plus_one);
                let lo = lo_d.to_f64();
                let hi = hi_d.to_f64();
                if lo <= 0.0 && pe < 0.0 {
                    return Err(Error::Divergence {
                        cube: q.describe(),
                        exponent: fmt_rat(p_exp),
                    });
                }
                numeric_total += (hi.powf(pe) - lo.powf(pe)) / pe;
            }
        }
    }
    if exact_ok {
        Ok(IntegralValue::Exact(exact_total))
    } else {
        Ok(IntegralValue::Numeric {
            value: numeric_total + exact_total.to_f64(),
            cells: segments.len() as u64,
        })
    }
}

/// `⨍_Q log dist(x,E) dx` in 1D via the closed form `u log u - u` per
/// segment; used by the `A_∞` ratio. Numeric by construction.
pub fn log_distance_average_1d(set: &PointSet, q: &Cube) -> Result<f64> {
    let a = Real::from_rat(q.corner()[0].clone());
    let b = Real::from_rat(q.upper(0));
    let segments = nearest_point_segments(set, &a, &b)?;
    let mut total = 0.0f64;
    for (u, v, e) in &segments {
        let du = (u.clone() - e.clone()).abs().to_f64();
        let dv = (v.clone() - e.clone()).abs().to_f64();
        let (lo, hi) = if du <= dv { (du, dv) } else { (dv, du) };
        let anti = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() - x };
        total += anti(hi) - anti(lo);
    }
    Ok(total / rat_to_f64(&q.measure()))
}

impl PointSet {
    fn distance_is_zero_at(&self, x: &Real) -> bool {
        if let Some(r) = x.as_rational() {
            if self.dim() == 1 {
                return self.distance(&[r]).is_zero();
            }
        }
        false
    }
}

/// `|E_r ∩ Q|` as `(lower, upper)` bounds; equal (exact) in 1D, cell-counting
/// bounds at `depth` otherwise.
pub fn neighborhood_measure(
    set: &PointSet,
    r: &Real,
    q: &Cube,
    depth: u32,
    budget: CellBudget,
) -> Result<(Real, Real)> {
    if r.sign() <= 0 {
        return Err(Error::InvalidParams("neighborhood radius must be positive".into()));
    }
    if set.dim() == 1 {
        let a = Real::from_rat(q.corner()[0].clone());
        let b = Real::from_rat(q.upper(0));
        let pts = set.points_in_closed_interval(
            &(a.clone() - r.clone()),
            &(b.clone() + r.clone()),
        )?;
        // merge the clipped intervals (e-r, e+r)
        let mut total = Real::zero();
        let mut cur: Option<(Real, Real)> = None;
        for e in pts {
            let lo = (e.clone() - r.clone()).max(a.clone());
            let hi = (e + r.clone()).min(b.clone());
            if hi <= lo {
                continue;
            }
            match cur.take() {
                None => cur = Some((lo, hi)),
                Some((clo, chi)) => {
                    if lo <= chi {
                        cur = Some((clo, chi.max(hi)));
                    } else {
                        total += chi - clo;
                        cur = Some((lo, hi));
                    }
                }
            }
        }
        if let Some((clo, chi)) = cur {
            total += chi - clo;
        }
        Ok((total.clone(), total))
    } else {
        let cells = crate::cube::cell_partition(q, depth, budget)?;
        let mass = cells[0].measure();
        let mut lower = Real::zero();
        let mut upper = Real::zero();
        for c in cells.iter() {
            let cube = c.realize();
            let inf = set.min_dist_to_cube(&cube);
            if &inf >= r {
                continue; // fully outside
            }
            upper += Real::from_rat(mass.clone());
            let (_, sup_hi) = set.max_dist_over_cube(&cube);
            if &sup_hi < r {
                lower += Real::from_rat(mass.clone());
            }
        }
        Ok((lower, upper))
    }
}

/// Per-cube Muckenhoupt product.
#[derive(Debug, Clone)]
pub struct ApRow {
    pub cube: Cube,
    /// `⨍_Q dist^{-α}`.
    pub average: f64,
    /// The companion factor: dual-power average (finite `p`), sup-based
    /// (`p = 1`), or exponential of the log-average (`p = ∞`).
    pub companion: f64,
    pub product: f64,
    /// Exact product when all factors stayed in the radical ring and the
    /// outer exponent is an integer.
    pub product_exact: Option<Real>,
}

#[derive(Debug, Clone)]
pub struct ApReport {
    pub rows: Vec<ApRow>,
    pub max_product: f64,
    pub quad_depth: u32,
}

/// The `A_p` product of `dist(·,E)^{-α}` on one cube.
pub fn ap_product(
    set: &PointSet,
    w: &WeightParams,
    q: &Cube,
    quad_depth: u32,
    budget: CellBudget,
) -> Result<ApRow> {
    let measure = q.measure();
    let avg_w = distance_power_integral(set, q, &-w.alpha.clone(), quad_depth, budget)?;
    let avg_w_f = avg_w.to_f64() / rat_to_f64(&measure);
    let avg_w_exact = avg_w.exact().map(|x| x.mul_rat(&(Rat::one() / &measure)));
    match &w.p {
        PIndex::Finite(p) => {
            let dual_exp = &w.alpha / (p - Rat::one());
            let avg_dual = distance_power_integral(set, q, &dual_exp, quad_depth, budget)?;
            let avg_dual_f = avg_dual.to_f64() / rat_to_f64(&measure);
            let product = avg_w_f * avg_dual_f.powf(rat_to_f64(p) - 1.0);
            let product_exact = match (&avg_w_exact, avg_dual.exact()) {
                (Some(aw), Some(ad)) if (p - Rat::one()).is_integer() => {
                    let e: i64 = (p - Rat::one()).to_integer().to_i64().unwrap_or(0);
                    if e >= 0 {
                        let ad_avg = ad.mul_rat(&(Rat::one() / &measure));
                        Some(aw.clone() * ad_avg.pow_int(e as u32))
                    } else {
                        None
                    }
                }
                _ => None,
            };
            Ok(ApRow { cube: q.clone(), average: avg_w_f, companion: avg_dual_f, product, product_exact })
        }
        PIndex::One => {
            // ‖w⁻¹‖_∞ = (sup d)^α for α > 0, (inf d)^α for α < 0.
            let companion = if w.alpha.is_positive() {
                let (_, sup) = set.max_dist_over_cube(q);
                sup.to_f64().powf(rat_to_f64(&w.alpha))
            } else {
                let inf = set.min_dist_to_cube(q);
                if inf.is_zero() {
                    return Err(Error::Divergence {
                        cube: q.describe(),
                        exponent: fmt_rat(&w.alpha),
                    });
                }
                inf.to_f64().powf(rat_to_f64(&w.alpha))
            };
            Ok(ApRow {
                cube: q.clone(),
                average: avg_w_f,
                companion,
                product: avg_w_f * companion,
                product_exact: None,
            })
        }
        PIndex::Infinity => {
            let log_avg = if set.dim() == 1 {
                log_distance_average_1d(set, q)?
            } else {
                let cells = crate::cube::cell_partition(q, quad_depth, budget)?;
                let mass = rat_to_f64(&cells[0].measure());
                let total: f64 = cells
                    .iter()
                    .map(|c| set.distance(&c.realize().center()).to_f64().max(f64::MIN_POSITIVE).ln() * mass)
                    .sum();
                total / rat_to_f64(&measure)
            };
            // (⨍ w) · exp(⨍ log w)⁻¹ with log w = -α log d
            let companion = (rat_to_f64(&w.alpha) * log_avg).exp();
            Ok(ApRow {
                cube: q.clone(),
                average: avg_w_f,
                companion,
                product: avg_w_f * companion,
                product_exact: None,
            })
        }
    }
}

/// Max of the per-cube products over a family; a divergent cube aborts with
/// the signal naming it.
pub fn muckenhoupt_constant(
    set: &PointSet,
    w: &WeightParams,
    family: &[Cube],
    quad_depth: u32,
    budget: CellBudget,
) -> Result<ApReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut rows = Vec::with_capacity(family.len());
    let mut max_product = f64::NEG_INFINITY;
    for q in family {
        let row = ap_product(set, w, q, quad_depth, budget)?;
        if row.product > max_product {
            max_product = row.product;
        }
        rows.push(row);
    }
    Ok(ApReport { rows, max_product, quad_depth })
}

impl ApReport {
    /// CSV: corner, side, average, companion, product, exact flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corner,side,average,companion,product,exact\n");
        for r in &self.rows {
            let corner: Vec<String> = r.cube.corner().iter().map(fmt_rat).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                corner.join(";"),
                fmt_rat(r.cube.side()),
                r.average,
                r.companion,
                r.product,
                r.product_exact.as_ref().map(|x| x.to_display_string()).unwrap_or_default(),
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let corner: Vec<String> = r.cube.corner().iter().map(fmt_rat).collect();
                json!({
                    "corner": corner,
                    "side": fmt_rat(r.cube.side()),
                    "average": r.average,
                    "companion": r.companion,
                    "product": r.product,
                    "product_exact": r.product_exact.as_ref().map(|x| x.to_display_string()),
                })
            })
            .collect();
        json!({
            "schema": 1,
            "max_product": self.max_product,
            "quad_depth": self.quad_depth,
            "cubes": rows,
        })
    }
}

/// Configuration of the two-sided decay estimator.
#[derive(Debug, Clone)]
pub struct MuConfig {
    /// Volume index used for the length scale (any value in (0,1) works for
    /// median porous sets).
    pub s: Rat,
    /// Cube scales `2^k` for `k` in this inclusive range.
    pub scale_min: i32,
    pub scale_max: i32,
    /// Radius grid depth: radii `L/2^i` (and `L·2^i` for the complement
    /// side), `i = 1..=depth`.
    pub r_grid_depth: u32,
    /// Multiplicative headroom when comparing ratios against the fitted
    /// constant; absorbs boundary-clipping noise.
    pub slack: f64,
    pub inventory_depth: u32,
    pub budget: CellBudget,
    /// Centers; when empty, defaults per generator.
    pub centers: Vec<Vec<Rat>>,
}

impl Default for MuConfig {
    fn default() -> Self {
        MuConfig {
            s: rat(1, 2),
            scale_min: -10,
            scale_max: 10,
            r_grid_depth: 10,
            slack: 1.05,
            inventory_depth: 26,
            budget: CellBudget(1 << 22),
            centers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MuEstimate {
    pub p: PIndex,
    pub lower: Rat,
    pub upper: Rat,
    pub s_used: Rat,
    pub cube_sample: String,
    pub r_sample: String,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl MuEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema": 1,
            "p": self.p.describe(),
            "lower": fmt_rat(&self.lower),
            "upper": fmt_rat(&self.upper),
            "lower_f64": rat_to_f64(&self.lower),
            "upper_f64": rat_to_f64(&self.upper),
            "s_used": fmt_rat(&self.s_used),
            "cube_sample": self.cube_sample,
            "r_sample": self.r_sample,
            "degenerate": self.degenerate,
            "warnings": self.warnings,
        })
    }
}

struct MuSampleCube {
    cube: Cube,
    length_scale: Rat,
}

/// Brackets the supremal decay exponent of the two-sided neighborhood
/// conditions over a sampled family of set-centered cubes.
///
/// The unknown constant is eliminated by fitting it at the coarsest radius
/// of each cube and requiring no growth beyond `slack` at finer radii; a
/// bisection over the exponent returns `(lower, upper)` around the
/// transition.
pub fn mu_exponent_estimate(
    set: &PointSet,
    p: &PIndex,
    cfg: &MuConfig,
) -> Result<MuEstimate> {
    let n = set.dim();
    let mut warnings = Vec::new();
    let centers: Vec<Vec<Rat>> = if !cfg.centers.is_empty() {
        cfg.centers.clone()
    } else {
        match set {
            PointSet::Finite { points, .. } => points.iter().take(4).cloned().collect(),
            PointSet::Lattice { dim } => vec![vec![Rat::zero(); *dim]],
            PointSet::Subspace { dim, .. } => vec![vec![Rat::zero(); *dim]],
            PointSet::PowerGamma { gamma, .. } => {
                // rational stand-ins for a few set points
                warnings.push("power-gap centers approximated rationally".into());
                [1u64, 4, 16]
                    .iter()
                    .map(|&m| {
                        let (lo, hi) = PointSet::gamma_point(gamma, m).enclosure(32);
                        vec![(lo + hi) / Rat::from_integer(2.into())]
                    })
                    .collect()
            }
        }
    };
    // length-scale index: p = 1 uses the largest-free-cube scale
    let s_used = match p {
        PIndex::One => Rat::one(),
        _ => cfg.s.clone(),
    };
    let mut sample: Vec<MuSampleCube> = Vec::new();
    let mut degenerate = false;
    for k in cfg.scale_min..=cfg.scale_max {
        let half = crate::rational::pow2(k);
        for c in &centers {
            let corner: Vec<Rat> = c.iter().map(|ci| ci - &half).collect();
            let side = &half * Rat::from_integer(2.into());
            let cube = Cube::new(corner, side)?;
            if !set.meets_cube(&cube) {
                continue;
            }
            let inv = free_cube_inventory(set, &cube, cfg.inventory_depth, cfg.budget)?;
            match vs_volume(&inv, &s_used)? {
                VsValue::Exact(v) => {
                    // L = V^{1/n}; rational in 1D, enclosure midpoint beyond.
                    let length_scale = if n == 1 {
                        v
                    } else {
                        let l = Real::rational_pow(
                            &v,
                            &Rat::new(BigInt::one(), BigInt::from(n as i64)),
                        )?;
                        let (lo, hi) = l.enclosure(64);
                        (lo + hi) / Rat::from_integer(2.into())
                    };
                    if length_scale.is_zero() {
                        degenerate = true;
                    }
                    sample.push(MuSampleCube { cube, length_scale });
                }
                VsValue::BelowResolution => {
                    degenerate = true;
                }
            }
        }
    }
    if sample.is_empty() {
        warnings.push("no admissible cubes in the sample".into());
        degenerate = true;
    }
    if degenerate {
        return Ok(MuEstimate {
            p: p.clone(),
            lower: Rat::zero(),
            upper: Rat::zero(),
            s_used,
            cube_sample: format!("{} cubes", sample.len()),
            r_sample: "degenerate".into(),
            degenerate: true,
            warnings,
        });
    }
    if sample.len() < 8 {
        warnings.push(format!("small sample: {} cubes", sample.len()));
    }
    // The neighborhood measures are exponent-independent; compute them once
    // and let the bisection re-evaluate only the power ratios.
    struct CubeGrid {
        /// (scale factor L/r, measure ratio |E_r ∩ Q|/|Q|) with r shrinking.
        shrink: Vec<(f64, f64)>,
        /// (scale factor r/L, complement ratio) with r growing; finite p only.
        grow: Vec<(f64, f64)>,
    }
    let mut grids: Vec<CubeGrid> = Vec::with_capacity(sample.len());
    for sc in &sample {
        let l = &sc.length_scale;
        let measure = rat_to_f64(&sc.cube.measure());
        let mut shrink = Vec::with_capacity(cfg.r_grid_depth as usize);
        for i in 1..=cfg.r_grid_depth {
            let r = l.clone() * crate::rational::pow2(-(i as i32));
            let (_, hi) =
                neighborhood_measure(set, &Real::from_rat(r.clone()), &sc.cube, 0, cfg.budget)?;
            shrink.push((rat_to_f64(l) / rat_to_f64(&r), hi.to_f64() / measure));
        }
        let mut grow = Vec::new();
        if matches!(p, PIndex::Finite(_)) {
            let mut i = 1u32;
            loop {
                let r = l.clone() * crate::rational::pow2(i as i32);
                if r >= *sc.cube.side() || i > cfg.r_grid_depth {
                    break;
                }
                let (_, hi) =
                    neighborhood_measure(set, &Real::from_rat(r.clone()), &sc.cube, 0, cfg.budget)?;
                grow.push((rat_to_f64(&r) / rat_to_f64(l), (measure - hi.to_f64()) / measure));
                i += 1;
            }
        }
        grids.push(CubeGrid { shrink, grow });
    }
    let dual_of = |alpha_f: f64| -> f64 {
        match p {
            PIndex::Finite(pv) => alpha_f / (rat_to_f64(pv) - 1.0),
            _ => 0.0,
        }
    };
    let passes = |alpha: &Rat| -> Result<bool> {
        let alpha_f = rat_to_f64(alpha);
        for grid in &grids {
            let mut fitted: Option<f64> = None;
            for (scale, ratio) in &grid.shrink {
                let v = ratio * scale.powf(alpha_f);
                match fitted {
                    None => fitted = Some(v.max(f64::MIN_POSITIVE)),
                    Some(c) => {
                        if v > c * cfg.slack {
                            return Ok(false);
                        }
                    }
                }
            }
            let dual = dual_of(alpha_f);
            let mut fitted: Option<f64> = None;
            for (scale, comp_ratio) in &grid.grow {
                let v = comp_ratio * scale.powf(dual);
                match fitted {
                    None => fitted = Some(v.max(f64::MIN_POSITIVE)),
                    Some(c) => {
                        if v > c * cfg.slack {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    };
    let mut lo = Rat::zero();
    let mut hi = Rat::from_integer(BigInt::from(n as i64 + 2));
    if !passes(&lo)? {
        warnings.push("even exponent 0 fails the decay test".into());
    }
    if passes(&hi)? {
        warnings.push("upper search bound passes; estimate truncated".into());
    } else {
        for _ in 0..32 {
            let mid = (&lo + &hi) / Rat::from_integer(2.into());
            if passes(&mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(MuEstimate {
        p: p.clone(),
        lower: lo,
        upper: hi,
        s_used,
        cube_sample: format!(
            "{} set-centered cubes, scales 2^{}..2^{}",
            sample.len(),
            cfg.scale_min,
            cfg.scale_max
        ),
        r_sample: format!("geometric radii, ratio 1/2, depth {}", cfg.r_grid_depth),
        degenerate: false,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn budget() -> CellBudget {
        CellBudget::default()
    }

    fn origin() -> PointSet {
        PointSet::single_point(vec![rat_int(0)]).unwrap()
    }

    #[test]
    fn integral_examples() {
        // ∫_0^1 x^{-1/2} = 2
        let v = distance_power_integral(&origin(), &Cube::unit(1), &rat(-1, 2), 0, budget())
            .unwrap();
        assert_eq!(v.exact().unwrap(), &Real::from_int(2));
        // p = 0 gives the measure
        let q = Cube::interval(rat(1, 3), rat(5, 7)).unwrap();
        let v = distance_power_integral(&origin(), &q, &Rat::zero(), 0, budget()).unwrap();
        assert_eq!(v.exact().unwrap(), &Real::from_rat(rat(5, 7)));
        // tent integral over one lattice gap
        let z = PointSet::lattice(1).unwrap();
        let v = distance_power_integral(&z, &Cube::unit(1), &Rat::one(), 0, budget()).unwrap();
        assert_eq!(v.exact().unwrap(), &Real::from_rat(rat(1, 4)));
    }

    #[test]
    fn integral_divergence() {
        let err = distance_power_integral(&origin(), &Cube::unit(1), &rat_int(-2), 0, budget())
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        let err = distance_power_integral(&origin(), &Cube::unit(1), &rat_int(-1), 0, budget())
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        // away from the set, negative powers are fine
        let q = Cube::interval(rat_int(2), rat_int(1)).unwrap();
        let v = distance_power_integral(&origin(), &q, &rat_int(-2), 0, budget()).unwrap();
        // ∫_2^3 x^{-2} = 1/2 - 1/3 = 1/6
        assert_eq!(v.exact().unwrap(), &Real::from_rat(rat(1, 6)));
    }

    #[test]
    fn neighborhood_examples() {
        let q = Cube::interval(rat_int(-1), rat_int(2)).unwrap();
        let (lo, hi) =
            neighborhood_measure(&origin(), &Real::from_rat(rat(1, 2)), &q, 0, budget()).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, Real::from_int(1));

        let z = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat_int(0), rat_int(4)).unwrap();
        let (lo, _) =
            neighborhood_measure(&z, &Real::from_rat(rat(1, 4)), &q, 0, budget()).unwrap();
        assert_eq!(lo, Real::from_int(2));

        // huge radius swallows the cube
        let (lo, _) =
            neighborhood_measure(&origin(), &Real::from_int(100), &q, 0, budget()).unwrap();
        assert_eq!(lo, Real::from_int(4));
    }

    #[test]
    fn a2_product_closed_form() {
        let q = Cube::interval(rat_int(-1), rat_int(2)).unwrap();
        let w = WeightParams::new(rat(1, 2), PIndex::Finite(rat_int(2))).unwrap();
        let row = ap_product(&origin(), &w, &q, 0, budget()).unwrap();
        let exact = row.product_exact.unwrap();
        assert_eq!(exact, Real::from_rat(rat(4, 3)));
        assert!((row.product - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_weight_gives_one() {
        // p_exp = 0 path: the product collapses to 1 for every p
        let z = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat_int(0), rat_int(2)).unwrap();
        for p in [PIndex::Finite(rat_int(2)), PIndex::Finite(rat_int(3))] {
            // alpha = 0 is rejected; emulate the constant weight by a direct
            // integral check instead
            let v = distance_power_integral(&z, &q, &Rat::zero(), 0, budget()).unwrap();
            assert_eq!(v.exact().unwrap(), &Real::from_int(2));
            let _ = p;
        }
    }

    #[test]
    fn divergence_signals_identify_cube() {
        let w = WeightParams::new(rat_int(2), PIndex::Finite(rat_int(2))).unwrap();
        let family = vec![
            Cube::interval(rat_int(2), rat_int(1)).unwrap(),
            Cube::interval(rat(-1, 2), rat_int(1)).unwrap(),
        ];
        let err = muckenhoupt_constant(&origin(), &w, &family, 0, budget()).unwrap_err();
        match err {
            Error::Divergence { cube, .. } => assert!(cube.contains("-1/2")),
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn jensen_chain_on_lattice_cube() {
        let z = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat_int(0), rat_int(1)).unwrap();
        let alpha = rat(1, 4);
        let a2 = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(rat_int(2))).unwrap(), &q, 0, budget()).unwrap();
        let a3 = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(rat_int(3))).unwrap(), &q, 0, budget()).unwrap();
        let ainf = ap_product(&z, &WeightParams::new(alpha, PIndex::Infinity).unwrap(), &q, 0, budget()).unwrap();
        assert!(ainf.product <= a3.product + 1e-9);
        assert!(a3.product <= a2.product + 1e-9);
        // exact comparison where both sides live in the ring
        let (e2, e3) = (a2.product_exact.unwrap(), a3.product_exact.unwrap());
        assert!(e3 <= e2);
    }

    #[test]
    fn ap_duality_two_routes() {
        // [w]_{A_p}^{1/(p-1)} equals the A_{p'} product of the dual weight
        // w^{-1/(p-1)}: both collapse to A^{1/(p-1)}·B for the two averages.
        // For p = 3, p' = 3/2 and the dual weight exponent is -α/2.
        let z = PointSet::lattice(1).unwrap();
        let q = Cube::interval(rat(1, 8), rat(3, 4)).unwrap();
        let alpha = rat(1, 3);
        let p = rat_int(3);
        let row = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(p.clone())).unwrap(), &q, 0, budget()).unwrap();
        let dual_alpha = -&alpha / (&p - Rat::one());
        let p_dual = rat(3, 2);
        let dual_row = ap_product(&z, &WeightParams::new(dual_alpha, PIndex::Finite(p_dual)).unwrap(), &q, 0, budget()).unwrap();
        let lhs = row.product.powf(1.0 / (rat_to_f64(&p) - 1.0));
        let rhs = dual_row.product;
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn mu_estimate_origin_infinity() {
        let cfg = MuConfig { scale_min: -6, scale_max: 6, ..MuConfig::default() };
        let est = mu_exponent_estimate(&origin(), &PIndex::Infinity, &cfg).unwrap();
        assert!(!est.degenerate);
        let lo = rat_to_f64(&est.lower);
        let hi = rat_to_f64(&est.upper);
        assert!(lo <= hi);
        assert!((lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1, "bracket ({lo}, {hi})");
    }

    #[test]
    fn mu_estimate_lattice_p1() {
        let z = PointSet::lattice(1).unwrap();
        let cfg = MuConfig { scale_min: -6, scale_max: 6, ..MuConfig::default() };
        let est = mu_exponent_estimate(&z, &PIndex::One, &cfg).unwrap();
        assert!(!est.degenerate);
        let lo = rat_to_f64(&est.lower);
        let hi = rat_to_f64(&est.upper);
        assert!((lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1, "bracket ({lo}, {hi})");
    }

    #[test]
    fn mu_estimate_degenerate_dense_set() {
        // a fine grid leaves no free cube at the tested depth
        let pts: Vec<Vec<Rat>> = (-64..=64).map(|k| vec![rat(k, 32)]).collect();
        let e = PointSet::finite(pts).unwrap();
        let cfg = MuConfig {
            scale_min: 0,
            scale_max: 1,
            inventory_depth: 4,
            ..MuConfig::default()
        };
        let est = mu_exponent_estimate(&e, &PIndex::Infinity, &cfg).unwrap();
        assert!(est.degenerate);
        assert!(est.lower.is_zero() && est.upper.is_zero());
    }
}
