//! Half-open axis-aligned cubes and dyadic lattices.
//!
//! A [`Cube`] is the product `∏ᵢ [cornerᵢ, cornerᵢ + side)` with exact
//! rational corner and side. Dyadic subcubes of a root cube are indexed by
//! `(level, offsets)`; level `j` splits each axis into `2^j` slots.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, pow2, Rat};

/// Guard against exponential cell blowups; operations that would enumerate
/// more cells than the budget fail loudly instead of subsampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBudget(pub u64);

impl Default for CellBudget {
    fn default() -> Self {
        CellBudget(1 << 20)
    }
}

impl CellBudget {
    pub fn check(&self, cells: u128) -> Result<()> {
        if cells > self.0 as u128 {
            Err(Error::CellBudget { required: cells, budget: self.0 })
        } else {
            Ok(())
        }
    }
}

/// Half-open cube `∏ᵢ [cornerᵢ, cornerᵢ + side)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    #[serde(with = "crate::rational::serde_rat_vec")]
    corner: Vec<Rat>,
    #[serde(with = "crate::rational::serde_rat")]
    side: Rat,
}

impl Cube {
    pub fn new(corner: Vec<Rat>, side: Rat) -> Result<Self> {
        if corner.is_empty() {
            return Err(Error::InvalidParams("cube needs at least one dimension".into()));
        }
        if !side.is_positive() {
            return Err(Error::InvalidParams(format!("cube side must be positive, got {side}")));
        }
        Ok(Cube { corner, side })
    }

    /// 1D convenience: the interval `[a, a+len)`.
    pub fn interval(a: Rat, len: Rat) -> Result<Self> {
        Cube::new(vec![a], len)
    }

    pub fn unit(dim: usize) -> Self {
        Cube {
            corner: vec![Rat::zero(); dim],
            side: Rat::one(),
        }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn corner(&self) -> &[Rat] {
        &self.corner
    }

    pub fn side(&self) -> &Rat {
        &self.side
    }

    pub fn measure(&self) -> Rat {
        self.side.pow(self.dim() as i32)
    }

    pub fn upper(&self, axis: usize) -> Rat {
        &self.corner[axis] + &self.side
    }

    pub fn center(&self) -> Vec<Rat> {
        let half = &self.side / Rat::from_integer(BigInt::from(2));
        self.corner.iter().map(|c| c + &half).collect()
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        self.corner
            .iter()
            .zip(x)
            .all(|(c, xi)| xi >= c && *xi < c + &self.side)
    }

    /// Set containment `self ⊆ other` (as half-open boxes).
    pub fn contained_in(&self, other: &Cube) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.corner.iter().zip(other.corner.iter()).all(|(a, b)| {
            a >= b && a + &self.side <= b + &other.side
        })
    }

    /// The concentric cube scaled by `r > 0`.
    pub fn dilate(&self, r: &Rat) -> Cube {
        let half_shift = (r - Rat::one()) * &self.side / Rat::from_integer(BigInt::from(2));
        Cube {
            corner: self.corner.iter().map(|c| c - &half_shift).collect(),
            side: r * &self.side,
        }
    }

    pub fn describe(&self) -> String {
        let coords: Vec<String> = self.corner.iter().map(fmt_rat).collect();
        format!("[{};{}]", coords.join(","), fmt_rat(&self.side))
    }
}

/// Exact overlap measure `|A ∩ B|`, the product of 1D interval overlaps.
pub fn cube_overlap_measure(a: &Cube, b: &Cube) -> Rat {
    debug_assert_eq!(a.dim(), b.dim());
    let mut m = Rat::one();
    for i in 0..a.dim() {
        let lo = (&a.corner[i]).max(&b.corner[i]).clone();
        let hi = a.upper(i).min(b.upper(i));
        if hi <= lo {
            return Rat::zero();
        }
        m *= hi - lo;
    }
    m
}

/// A member of `D_j(root)`: level `j ≥ 0` and one offset per axis in `[0, 2^j)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DyadicCube {
    root: Cube,
    level: u32,
    offsets: Vec<u64>,
}

impl DyadicCube {
    pub fn new(root: Cube, level: u32, offsets: Vec<u64>) -> Result<Self> {
        if offsets.len() != root.dim() {
            return Err(Error::InvalidParams("offset count must match dimension".into()));
        }
        if level >= 63 {
            return Err(Error::InvalidParams(format!("dyadic level {level} too deep")));
        }
        let slots = 1u64 << level;
        if offsets.iter().any(|&o| o >= slots) {
            return Err(Error::InvalidParams("dyadic offset out of range".into()));
        }
        Ok(DyadicCube { root, level, offsets })
    }

    pub fn whole(root: Cube) -> Self {
        let dim = root.dim();
        DyadicCube { root, level: 0, offsets: vec![0; dim] }
    }

    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn side(&self) -> Rat {
        self.root.side() * pow2(-(self.level as i32))
    }

    pub fn measure(&self) -> Rat {
        self.side().pow(self.dim() as i32)
    }

    /// The realized half-open cube.
    pub fn realize(&self) -> Cube {
        let h = self.side();
        let corner = self
            .root
            .corner()
            .iter()
            .zip(&self.offsets)
            .map(|(c, &o)| c + &h * Rat::from_integer(BigInt::from(o)))
            .collect();
        Cube { corner, side: h }
    }

    /// Dyadic parent; the root is its own parent by convention.
    pub fn parent(&self) -> DyadicCube {
        if self.level == 0 {
            return self.clone();
        }
        DyadicCube {
            root: self.root.clone(),
            level: self.level - 1,
            offsets: self.offsets.iter().map(|o| o / 2).collect(),
        }
    }

    pub fn is_root(&self) -> bool {
        self.level == 0
    }

    /// The 2^n children, in row-major order (last coordinate fastest).
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            let offsets = self
                .offsets
                .iter()
                .enumerate()
                .map(|(i, o)| 2 * o + ((mask >> (n - 1 - i)) & 1))
                .collect();
            out.push(DyadicCube {
                root: self.root.clone(),
                level: self.level + 1,
                offsets,
            });
        }
        out
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        if other.level < self.level || self.root != other.root {
            return false;
        }
        let shift = other.level - self.level;
        self.offsets
            .iter()
            .zip(&other.offsets)
            .all(|(a, b)| b >> shift == *a)
    }

    /// Locates a realized cube inside the lattice of `root`, if it is a member.
    pub fn locate(root: &Cube, cube: &Cube) -> Result<DyadicCube> {
        if cube.dim() != root.dim() {
            return Err(Error::LatticeMembership("dimension mismatch".into()));
        }
        // side ratio must be 2^-j
        let ratio = root.side() / cube.side();
        if !ratio.is_integer() {
            return Err(Error::LatticeMembership(format!(
                "side {} does not divide root side {}",
                fmt_rat(cube.side()),
                fmt_rat(root.side())
            )));
        }
        let k = ratio.to_integer();
        let mut level = 0u32;
        let mut v = BigInt::one();
        while v < k {
            v <<= 1;
            level += 1;
            if level >= 63 {
                return Err(Error::LatticeMembership("cube too small for lattice".into()));
            }
        }
        if v != k {
            return Err(Error::LatticeMembership("side ratio is not a power of two".into()));
        }
        let mut offsets = Vec::with_capacity(root.dim());
        for i in 0..root.dim() {
            let rel = (&cube.corner()[i] - &root.corner()[i]) / cube.side();
            if !rel.is_integer() || rel.is_negative() {
                return Err(Error::LatticeMembership(format!(
                    "corner {} not aligned",
                    fmt_rat(&cube.corner()[i])
                )));
            }
            let o = rel.to_integer();
            if o >= BigInt::from(1u64 << level) {
                return Err(Error::LatticeMembership("corner outside root".into()));
            }
            offsets.push(o.try_into().map_err(|_| {
                Error::LatticeMembership("offset overflow".into())
            })?);
        }
        DyadicCube::new(root.clone(), level, offsets)
    }

    /// Row-major cell index at resolution `res ≥ level` of the cell with these
    /// offsets scaled down; only meaningful when `self` is a resolution cell.
    pub fn row_major_index(&self, res: u32) -> usize {
        debug_assert_eq!(self.level, res);
        let mut idx: usize = 0;
        for &o in &self.offsets {
            idx = (idx << res) + o as usize;
        }
        idx
    }
}

/// All `2^{Jn}` cells of `D_J(root)` in row-major order (last coordinate
/// fastest), guarded by the cell budget.
pub fn cell_partition(root: &Cube, level: u32, budget: CellBudget) -> Result<Vec<DyadicCube>> {
    let n = root.dim() as u32;
    let total: u128 = 1u128
        .checked_shl(level * n)
        .ok_or(Error::CellBudget { required: u128::MAX, budget: budget.0 })?;
    budget.check(total)?;
    let slots = 1u64 << level;
    let mut out = Vec::with_capacity(total as usize);
    let mut offsets = vec![0u64; root.dim()];
    loop {
        out.push(DyadicCube {
            root: root.clone(),
            level,
            offsets: offsets.clone(),
        });
        // increment row-major counter, last axis fastest
        let mut axis = root.dim();
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            offsets[axis] += 1;
            if offsets[axis] < slots {
                break;
            }
            offsets[axis] = 0;
        }
    }
}

/// All dyadic subcubes of `root` through level `max_depth`, level by level.
pub fn dyadic_family(root: &Cube, max_depth: u32, budget: CellBudget) -> Result<Vec<Cube>> {
    let mut out = Vec::new();
    for level in 0..=max_depth {
        for cell in cell_partition(root, level, budget)? {
            out.push(cell.realize());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn unit1() -> Cube {
        Cube::unit(1)
    }

    #[test]
    fn partition_identity() {
        let cells = cell_partition(&unit1(), 0, CellBudget::default()).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].realize(), unit1());
    }

    #[test]
    fn partition_quarters_1d() {
        let cells = cell_partition(&unit1(), 2, CellBudget::default()).unwrap();
        assert_eq!(cells.len(), 4);
        let corners: Vec<Rat> = cells.iter().map(|c| c.realize().corner()[0].clone()).collect();
        assert_eq!(corners, vec![rat_int(0), rat(1, 4), rat(1, 2), rat(3, 4)]);
        for c in &cells {
            assert_eq!(c.side(), rat(1, 4));
        }
    }

    #[test]
    fn partition_2d() {
        let cells = cell_partition(&Cube::unit(2), 1, CellBudget::default()).unwrap();
        assert_eq!(cells.len(), 4);
        for c in &cells {
            assert_eq!(c.side(), rat(1, 2));
        }
        // row-major: last coordinate fastest
        assert_eq!(cells[0].offsets(), &[0, 0]);
        assert_eq!(cells[1].offsets(), &[0, 1]);
        assert_eq!(cells[2].offsets(), &[1, 0]);
        assert_eq!(cells[3].offsets(), &[1, 1]);
    }

    #[test]
    fn partition_measures_sum_to_root() {
        for (dim, level) in [(1usize, 3u32), (2, 2), (3, 1)] {
            let root = Cube::new(vec![rat(1, 3); dim], rat(5, 7)).unwrap();
            let cells = cell_partition(&root, level, CellBudget::default()).unwrap();
            let total: Rat = cells.iter().map(|c| c.measure()).sum();
            assert_eq!(total, root.measure());
        }
    }

    #[test]
    fn budget_enforced() {
        let err = cell_partition(&Cube::unit(2), 12, CellBudget(1000)).unwrap_err();
        assert!(matches!(err, Error::CellBudget { .. }));
    }

    #[test]
    fn overlap_examples() {
        let a = unit1();
        assert_eq!(cube_overlap_measure(&a, &a), rat_int(1));
        let far = Cube::interval(rat_int(2), rat_int(1)).unwrap();
        assert_eq!(cube_overlap_measure(&a, &far), rat_int(0));
        let half = Cube::interval(rat(1, 2), rat_int(1)).unwrap();
        assert_eq!(cube_overlap_measure(&a, &half), rat(1, 2));
        assert_eq!(cube_overlap_measure(&half, &a), rat(1, 2));
    }

    #[test]
    fn parent_contains_child() {
        let root = Cube::unit(2);
        for cell in cell_partition(&root, 3, CellBudget::default()).unwrap() {
            let parent = cell.parent();
            assert!(parent.contains(&cell));
            assert!(cell.realize().contained_in(&parent.realize()));
        }
    }

    #[test]
    fn locate_round_trip() {
        let root = Cube::interval(rat_int(0), rat_int(2)).unwrap();
        for cell in cell_partition(&root, 4, CellBudget::default()).unwrap() {
            let found = DyadicCube::locate(&root, &cell.realize()).unwrap();
            assert_eq!(found, cell);
        }
        let off = Cube::interval(rat(1, 3), rat(1, 2)).unwrap();
        assert!(DyadicCube::locate(&root, &off).is_err());
    }

    #[test]
    fn row_major_indexing() {
        let root = Cube::unit(2);
        let cells = cell_partition(&root, 2, CellBudget::default()).unwrap();
        for (i, c) in cells.iter().enumerate() {
            assert_eq!(c.row_major_index(2), i);
        }
    }
}
