//! Independent oracles used by the self-test suite and the acceptance
//! harness. These deliberately re-derive answers from definitions by
//! exhaustive enumeration, staying off the production code paths they
//! cross-check.

use num_traits::One;

use crate::cube::{cell_partition, CellBudget, Cube};
use crate::error::Result;
use crate::points::PointSet;
use crate::porosity::VsValue;
use crate::rational::Rat;
use crate::real::Real;

/// Volume scale by brute force: enumerate every free dyadic cube to `depth`,
/// and for each candidate threshold take the maximal-under-inclusion
/// subfamily of free cubes at or above it, summing their measures.
pub fn vs_volume_brute_force(
    set: &PointSet,
    root: &Cube,
    depth: u32,
    s: &Rat,
    budget: CellBudget,
) -> Result<VsValue> {
    let mut free: Vec<Cube> = Vec::new();
    for level in 0..=depth {
        for cell in cell_partition(root, level, budget)? {
            let c = cell.realize();
            if !set.meets_cube(&c) {
                free.push(c);
            }
        }
    }
    if s.is_one() {
        return Ok(match free.iter().map(|c| c.measure()).max() {
            Some(m) => VsValue::Exact(m),
            None => VsValue::BelowResolution,
        });
    }
    let target = (Rat::one() - s) * root.measure();
    let mut thresholds: Vec<Rat> = free.iter().map(|c| c.measure()).collect();
    thresholds.sort();
    thresholds.dedup();
    thresholds.reverse();
    for delta in thresholds {
        let eligible: Vec<&Cube> = free.iter().filter(|c| c.measure() >= delta).collect();
        let total: Rat = eligible
            .iter()
            .filter(|c| {
                // maximal under inclusion within the eligible family
                !eligible
                    .iter()
                    .any(|other| **other != ***c && c.contained_in(other))
            })
            .map(|c| c.measure())
            .sum();
        if total >= target {
            return Ok(VsValue::Exact(delta));
        }
    }
    Ok(VsValue::BelowResolution)
}

/// Gap scale by subset enumeration (small inputs only): the best threshold
/// over every subset of gaps whose total length meets the target.
pub fn gap_scale_brute_force(gaps: &[Real], target: &Real) -> Option<Real> {
    assert!(gaps.len() <= 20, "subset enumeration needs a small gap count");
    let mut best: Option<Real> = None;
    for mask in 1u32..(1u32 << gaps.len()) {
        let mut total = Real::zero();
        let mut min_len: Option<Real> = None;
        for (i, g) in gaps.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                total += g.clone();
                if min_len.as_ref().map_or(true, |m| g < m) {
                    min_len = Some(g.clone());
                }
            }
        }
        if &total >= target {
            let delta = min_len.expect("nonempty subset");
            if best.as_ref().map_or(true, |b| delta > *b) {
                best = Some(delta);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::porosity::{free_cube_inventory, free_gaps, gap_length_scale, vs_volume};
    use crate::rational::{rat, rat_int};

    #[test]
    fn brute_force_agrees_on_lattice() {
        let set = PointSet::lattice(1).unwrap();
        let root = Cube::interval(rat_int(0), rat_int(2)).unwrap();
        let inv = free_cube_inventory(&set, &root, 4, CellBudget::default()).unwrap();
        for num in 1..8 {
            let s = rat(num, 8);
            assert_eq!(
                vs_volume(&inv, &s).unwrap(),
                vs_volume_brute_force(&set, &root, 4, &s, CellBudget::default()).unwrap(),
                "s = {num}/8"
            );
        }
    }

    #[test]
    fn gap_subsets_agree_with_greedy() {
        let set = PointSet::finite(vec![
            vec![rat_int(0)],
            vec![rat(1, 3)],
            vec![rat_int(1)],
            vec![rat(9, 4)],
            vec![rat_int(3)],
        ])
        .unwrap();
        let lo = Real::zero();
        let hi = Real::from_int(3);
        let gaps = free_gaps(&set, &lo, &hi).unwrap();
        for num in 1..6 {
            let s = rat(num, 6);
            let length = Real::from_int(3);
            let target = length.mul_rat(&(Rat::one() - &s));
            let expect = gap_scale_brute_force(&gaps, &target);
            let got = gap_length_scale(&set, &lo, &hi, &s).ok();
            assert_eq!(got, expect, "s = {num}/6");
        }
    }
}
