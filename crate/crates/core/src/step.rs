//! Step functions on dyadic grids and their value distributions.
//!
//! A [`StepFunction`] is constant on each cell of `D_J(root)`; restricting it
//! to any overlapping cube yields a [`WeightedValueMultiset`], the exact
//! finite object on which medians are computed.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::cube::{cube_overlap_measure, CellBudget, Cube};
use crate::error::{Error, Result};
use crate::rational::{abs, Rat};

/// Finite list of `(value, mass)` pairs, consolidated and sorted by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedValueMultiset {
    entries: Vec<(Rat, Rat)>,
    total_mass: Rat,
}

impl WeightedValueMultiset {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Rat, Rat)>) -> Result<Self> {
        let mut map: BTreeMap<Rat, Rat> = BTreeMap::new();
        for (v, m) in pairs {
            if !m.is_positive() {
                return Err(Error::InvalidParams("masses must be positive".into()));
            }
            *map.entry(v).or_insert_with(Rat::zero) += m;
        }
        let entries: Vec<(Rat, Rat)> = map.into_iter().collect();
        let total_mass = entries.iter().map(|(_, m)| m.clone()).sum();
        Ok(WeightedValueMultiset { entries, total_mass })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Rat, Rat)] {
        &self.entries
    }

    pub fn total_mass(&self) -> &Rat {
        &self.total_mass
    }

    pub fn min_value(&self) -> Option<&Rat> {
        self.entries.first().map(|(v, _)| v)
    }

    pub fn max_value(&self) -> Option<&Rat> {
        self.entries.last().map(|(v, _)| v)
    }

    /// Mass of `{f < λ}`.
    pub fn mass_below(&self, lambda: &Rat) -> Rat {
        self.entries
            .iter()
            .take_while(|(v, _)| v < lambda)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass of `{f > λ}`.
    pub fn mass_above(&self, lambda: &Rat) -> Rat {
        self.entries
            .iter()
            .rev()
            .take_while(|(v, _)| v > lambda)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Exact average `Σ v·m / Σ m`.
    pub fn average(&self) -> Result<Rat> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let weighted: Rat = self.entries.iter().map(|(v, m)| v * m).sum();
        Ok(weighted / &self.total_mass)
    }

    /// Exact mean absolute deviation from `c`.
    pub fn mean_abs_dev(&self, c: &Rat) -> Result<Rat> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let dev: Rat = self.entries.iter().map(|(v, m)| abs(&(v - c)) * m).sum();
        Ok(dev / &self.total_mass)
    }

    /// The distribution of `v ↦ a·v + b`.
    pub fn map_affine(&self, a: &Rat, b: &Rat) -> Result<Self> {
        WeightedValueMultiset::from_pairs(
            self.entries.iter().map(|(v, m)| (a * v + b, m.clone())),
        )
    }

    /// The distribution of `|f - c|`.
    pub fn abs_deviation(&self, c: &Rat) -> Result<Self> {
        WeightedValueMultiset::from_pairs(
            self.entries.iter().map(|(v, m)| (abs(&(v - c)), m.clone())),
        )
    }

    /// The distribution of `|f|`.
    pub fn abs(&self) -> Result<Self> {
        self.abs_deviation(&Rat::zero())
    }
}

/// Piecewise-constant function on `D_J(root)`; `values` holds one rational
/// per cell in row-major order (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    root: Cube,
    resolution: u32,
    values: Vec<Rat>,
}

/// On-disk form: `{"dim": n, "corner": [...], "side": "p/q",
/// "resolution": J, "values": [...]}` with rationals as strings.
#[derive(Serialize, Deserialize)]
struct StepFunctionFile {
    dim: usize,
    #[serde(with = "crate::rational::serde_rat_vec")]
    corner: Vec<Rat>,
    #[serde(with = "crate::rational::serde_rat")]
    side: Rat,
    resolution: u32,
    #[serde(with = "crate::rational::serde_rat_vec")]
    values: Vec<Rat>,
}

impl StepFunction {
    pub fn new(root: Cube, resolution: u32, values: Vec<Rat>) -> Result<Self> {
        let n = root.dim() as u32;
        let expected = 1u128
            .checked_shl(resolution * n)
            .ok_or_else(|| Error::InvalidParams("resolution too deep".into()))?;
        if values.len() as u128 != expected {
            return Err(Error::InvalidParams(format!(
                "expected {expected} cell values, got {}",
                values.len()
            )));
        }
        Ok(StepFunction { root, resolution, values })
    }

    pub fn constant(root: Cube, value: Rat) -> Self {
        StepFunction { root, resolution: 0, values: vec![value] }
    }

    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    pub fn cell_side(&self) -> Rat {
        self.root.side() * crate::rational::pow2(-(self.resolution as i32))
    }

    pub fn cell_measure(&self) -> Rat {
        self.cell_side().pow(self.dim() as i32)
    }

    pub fn value_at_index(&self, idx: usize) -> &Rat {
        &self.values[idx]
    }

    /// Row-major index of the cell with the given per-axis offsets.
    pub fn index_of(&self, offsets: &[u64]) -> usize {
        let mut idx = 0usize;
        for &o in offsets {
            idx = (idx << self.resolution) + o as usize;
        }
        idx
    }

    /// Per-axis offsets of the cell with the given row-major index.
    pub fn offsets_of(&self, mut idx: usize) -> Vec<u64> {
        let n = self.dim();
        let mask = (1usize << self.resolution) - 1;
        let mut offs = vec![0u64; n];
        for axis in (0..n).rev() {
            offs[axis] = (idx & mask) as u64;
            idx >>= self.resolution;
        }
        offs
    }

    /// The realized cell cube for a row-major index.
    pub fn cell_cube(&self, idx: usize) -> Cube {
        let h = self.cell_side();
        let offs = self.offsets_of(idx);
        let corner = self
            .root
            .corner()
            .iter()
            .zip(&offs)
            .map(|(c, &o)| c + &h * Rat::from_integer(BigInt::from(o)))
            .collect();
        Cube::new(corner, h).expect("cell side positive")
    }

    pub fn value_at_point(&self, x: &[Rat]) -> Result<&Rat> {
        if !self.root.contains_point(x) {
            return Err(Error::EmptyOverlap);
        }
        let h = self.cell_side();
        let slots = 1u64 << self.resolution;
        let mut offs = Vec::with_capacity(self.dim());
        for (xi, c) in x.iter().zip(self.root.corner()) {
            let rel = (xi - c) / &h;
            let o: u64 = rel.floor().to_integer().try_into().unwrap_or(0);
            offs.push(o.min(slots - 1));
        }
        Ok(&self.values[self.index_of(&offs)])
    }

    /// Row-major indices of all cells whose overlap with `q` has positive
    /// measure, with the per-cell overlap.
    pub fn overlapping_cells(&self, q: &Cube) -> Vec<(usize, Rat)> {
        let n = self.dim();
        let h = self.cell_side();
        let slots = 1u64 << self.resolution;
        // Per axis, the half-open slot range meeting [q_lo, q_hi).
        let mut ranges: Vec<(u64, u64)> = Vec::with_capacity(n);
        for i in 0..n {
            let lo = (&q.corner()[i] - &self.root.corner()[i]) / &h;
            let hi = (q.upper(i) - &self.root.corner()[i]) / &h;
            let start = lo.floor().to_integer().max(BigInt::zero());
            let end = hi.ceil().to_integer().min(BigInt::from(slots));
            if start >= end {
                return Vec::new();
            }
            let s: u64 = start.try_into().unwrap_or(0);
            let e: u64 = end.try_into().unwrap_or(slots);
            ranges.push((s, e));
        }
        let mut out = Vec::new();
        let mut offs: Vec<u64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let idx = self.index_of(&offs);
            let overlap = cube_overlap_measure(&self.cell_cube(idx), q);
            if overlap.is_positive() {
                out.push((idx, overlap));
            }
            let mut axis = n;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                offs[axis] += 1;
                if offs[axis] < ranges[axis].1 {
                    break;
                }
                offs[axis] = ranges[axis].0;
            }
        }
        out
    }

    /// The value distribution of `f` on `Q`: entries `(cell value, |cell ∩ Q|)`
    /// consolidated by value. Errors when `|Q ∩ root| = 0`.
    pub fn restrict(&self, q: &Cube) -> Result<WeightedValueMultiset> {
        let cells = self.overlapping_cells(q);
        if cells.is_empty() {
            return Err(Error::EmptyOverlap);
        }
        let dist = WeightedValueMultiset::from_pairs(
            cells.into_iter().map(|(idx, m)| (self.values[idx].clone(), m)),
        )?;
        debug_assert_eq!(*dist.total_mass(), cube_overlap_measure(q, &self.root));
        Ok(dist)
    }

    /// Builds a new step function `v ↦ a·v + b` on the same grid.
    pub fn map_affine(&self, a: &Rat, b: &Rat) -> StepFunction {
        StepFunction {
            root: self.root.clone(),
            resolution: self.resolution,
            values: self.values.iter().map(|v| a * v + b).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = StepFunctionFile {
            dim: self.dim(),
            corner: self.root.corner().to_vec(),
            side: self.root.side().clone(),
            resolution: self.resolution,
            values: self.values.clone(),
        };
        serde_json::to_string_pretty(&file).expect("step function serializes")
    }

    pub fn from_json(text: &str, budget: CellBudget) -> Result<Self> {
        let file: StepFunctionFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("bad step function JSON: {e}")))?;
        if file.corner.len() != file.dim {
            return Err(Error::InvalidParams("corner length disagrees with dim".into()));
        }
        budget.check(
            1u128
                .checked_shl(file.resolution * file.dim as u32)
                .ok_or_else(|| Error::InvalidParams("resolution too deep".into()))?,
        )?;
        let root = Cube::new(file.corner, file.side)?;
        StepFunction::new(root, file.resolution, file.values)
    }
}
