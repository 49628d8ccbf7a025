//! Upper s-medians, median differences, local mean oscillation, and the
//! oscillation functionals driving the sparse decompositions.
//!
//! The upper s-median of a distribution is the largest value `λ` with
//! `mass{f < λ} ≤ s·W`; at `s = 0` it degenerates to the essential infimum.
//! For consolidated multisets it is always attained at a stored value, so
//! everything here is a finite exact scan.

use num_traits::{One, Signed, Zero};

use crate::cube::{Cube, DyadicCube};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::step::{StepFunction, WeightedValueMultiset};

/// The pair `0 ≤ s < t < 1`. `s = 0` is allowed and realizes the essential
/// infimum on the low side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianParams {
    s: Rat,
    t: Rat,
}

impl MedianParams {
    pub fn new(s: Rat, t: Rat) -> Result<Self> {
        if s.is_negative() || s >= t || t >= Rat::one() {
            return Err(Error::InvalidParams(format!(
                "need 0 <= s < t < 1, got s={s}, t={t}"
            )));
        }
        Ok(MedianParams { s, t })
    }

    pub fn s(&self) -> &Rat {
        &self.s
    }

    pub fn t(&self) -> &Rat {
        &self.t
    }

    /// `max((1-t)/(1-s), s/t)`, the contraction ratio of nested-cube chains.
    pub fn chain_ratio(&self) -> Rat {
        let a = (Rat::one() - &self.t) / (Rat::one() - &self.s);
        if self.s.is_zero() {
            return a;
        }
        let b = &self.s / &self.t;
        a.max(b)
    }

    /// Witness-density floor `(t-s)/(1-s)` of upward stopping families.
    pub fn eta_up(&self) -> Rat {
        (&self.t - &self.s) / (Rat::one() - &self.s)
    }

    /// Witness-density floor `(t-s)/t` of downward stopping families.
    pub fn eta_down(&self) -> Rat {
        (&self.t - &self.s) / &self.t
    }

    /// Certified density `(t-s)/(t-s+1)` of the combined two-sided family.
    pub fn eta_combined(&self) -> Rat {
        let d = &self.t - &self.s;
        d.clone() / (d + Rat::one())
    }

    /// Packing bound `(1-t)/(1-s)` for upward stopping children.
    pub fn packing_up(&self) -> Rat {
        (Rat::one() - &self.t) / (Rat::one() - &self.s)
    }

    /// Packing bound `s/t` for downward stopping children.
    pub fn packing_down(&self) -> Rat {
        &self.s / &self.t
    }
}

/// Oscillation functionals of a dyadic cube against its parent:
/// `σ⁺ = d + (M_s(Q) - M_s(Q̂))₊`, `σ⁻ = d + (M_t(Q̂) - M_t(Q))₊`,
/// `σ = σ⁺ + σ⁻`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillationTriple {
    pub sigma_plus: Rat,
    pub sigma_minus: Rat,
    pub sigma: Rat,
}

pub fn positive_part(x: Rat) -> Rat {
    if x.is_negative() {
        Rat::zero()
    } else {
        x
    }
}

/// Upper s-median of entries sorted ascending by value: the last value whose
/// strictly-below mass is at most `s` times the total. Generic so that both
/// rational and radical-valued distributions share one implementation.
pub fn upper_median_of_sorted<T: Clone>(entries: &[(T, Rat)], s: &Rat) -> Result<T> {
    if entries.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if s.is_negative() || *s >= Rat::one() {
        return Err(Error::InvalidParams(format!("median index must lie in [0,1), got {s}")));
    }
    let total: Rat = entries.iter().map(|(_, m)| m.clone()).sum();
    let threshold = s * total;
    let mut below = Rat::zero();
    let mut chosen = 0usize;
    for (i, (_, m)) in entries.iter().enumerate() {
        if below <= threshold {
            chosen = i;
        } else {
            break;
        }
        below += m;
    }
    Ok(entries[chosen].0.clone())
}

/// Upper s-median `M_s` of a value distribution.
pub fn upper_median(dist: &WeightedValueMultiset, s: &Rat) -> Result<Rat> {
    upper_median_of_sorted(dist.entries(), s)
}

/// Independent route to the same median via exceedance mass:
/// the least value `λ` with `mass{f > λ} < (1-s)·W`. Kept separate from
/// [`upper_median`] so the two can cross-check each other.
pub fn upper_median_by_exceedance(dist: &WeightedValueMultiset, s: &Rat) -> Result<Rat> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if s.is_negative() || *s >= Rat::one() {
        return Err(Error::InvalidParams(format!("median index must lie in [0,1), got {s}")));
    }
    let total = dist.total_mass().clone();
    let bound = (Rat::one() - s) * total;
    let entries = dist.entries();
    // mass{f > v_i} is the suffix sum strictly past i; the infimum lands on
    // the least value whose exceedance mass is already under the bound.
    let mut above = Rat::zero();
    let mut chosen = entries.len() - 1;
    for (i, (_, m)) in entries.iter().enumerate().rev() {
        if above < bound {
            chosen = i;
        } else {
            break;
        }
        above += m;
    }
    Ok(entries[chosen].0.clone())
}

pub fn essential_infimum(dist: &WeightedValueMultiset) -> Result<Rat> {
    upper_median(dist, &Rat::zero())
}

/// `(M_s, M_t)` of `f` on `Q`.
pub fn median_pair(f: &StepFunction, q: &Cube, p: &MedianParams) -> Result<(Rat, Rat)> {
    let dist = f.restrict(q)?;
    Ok((upper_median(&dist, p.s())?, upper_median(&dist, p.t())?))
}

/// Median difference `M_t(f,Q) - M_s(f,Q)`; nonnegative.
pub fn median_difference(f: &StepFunction, q: &Cube, p: &MedianParams) -> Result<Rat> {
    let (lo, hi) = median_pair(f, q, p)?;
    Ok(hi - lo)
}

/// Local mean oscillation `ω_a(f,Q) = min over centers c of M_{1-a}(|f-c|, Q)`.
///
/// For a step function the objective is piecewise linear in `c` with slope ±1
/// between breakpoints, so scanning the function values together with all
/// pairwise midpoints is exhaustive.
pub fn local_mean_oscillation(f: &StepFunction, q: &Cube, a: &Rat) -> Result<Rat> {
    if !a.is_positive() || *a >= Rat::one() {
        return Err(Error::InvalidParams(format!("oscillation index must lie in (0,1), got {a}")));
    }
    let dist = f.restrict(q)?;
    let order = Rat::one() - a;
    let values: Vec<Rat> = dist.entries().iter().map(|(v, _)| v.clone()).collect();
    let two = Rat::from_integer(2.into());
    let mut best: Option<Rat> = None;
    let mut try_center = |c: &Rat| -> Result<()> {
        let m = upper_median(&dist.abs_deviation(c)?, &order)?;
        if best.as_ref().map_or(true, |b| m < *b) {
            best = Some(m);
        }
        Ok(())
    };
    for (i, v) in values.iter().enumerate() {
        try_center(v)?;
        for w in values.iter().skip(i + 1) {
            try_center(&((v + w) / &two))?;
        }
    }
    best.ok_or(Error::EmptyDistribution)
}

/// σ-functionals of a dyadic cube; the root is compared against itself, so
/// both positive parts vanish there.
pub fn sigma_oscillations(
    f: &StepFunction,
    q: &DyadicCube,
    p: &MedianParams,
) -> Result<OscillationTriple> {
    if q.root() != f.root() {
        return Err(Error::LatticeMembership(
            "cube lattice root differs from the function domain".into(),
        ));
    }
    let here = q.realize();
    let parent = q.parent().realize();
    let (ms, mt) = median_pair(f, &here, p)?;
    let (ms_parent, mt_parent) = median_pair(f, &parent, p)?;
    let d = &mt - &ms;
    let sigma_plus = &d + positive_part(&ms - &ms_parent);
    let sigma_minus = &d + positive_part(&mt_parent - &mt);
    let sigma = &sigma_plus + &sigma_minus;
    Ok(OscillationTriple { sigma_plus, sigma_minus, sigma })
}

/// `max over the family of M_t - M_s`; the BMO-style seminorm on a finite
/// test family (`s = 0` gives the BLO-style quantity).
pub fn median_seminorm(f: &StepFunction, family: &[Cube], p: &MedianParams) -> Result<Rat> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best: Option<Rat> = None;
    for q in family {
        let d = median_difference(f, q, p)?;
        if best.as_ref().map_or(true, |b| d > *b) {
            best = Some(d);
        }
    }
    Ok(best.expect("nonempty family"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn quarters() -> StepFunction {
        StepFunction::new(
            Cube::unit(1),
            2,
            vec![rat_int(1), rat_int(2), rat_int(3), rat_int(4)],
        )
        .unwrap()
    }

    fn jump() -> StepFunction {
        // -1 on [0,1/2), +1 on [1/2,1)
        StepFunction::new(Cube::unit(1), 1, vec![rat_int(-1), rat_int(1)]).unwrap()
    }

    #[test]
    fn median_examples() {
        let d = quarters().restrict(&Cube::unit(1)).unwrap();
        assert_eq!(upper_median(&d, &Rat::zero()).unwrap(), rat_int(1));
        assert_eq!(upper_median(&d, &rat(1, 4)).unwrap(), rat_int(2));
        assert_eq!(upper_median(&d, &rat(1, 2)).unwrap(), rat_int(3));
        let j = jump().restrict(&Cube::unit(1)).unwrap();
        assert_eq!(upper_median(&j, &rat(1, 3)).unwrap(), rat_int(-1));
    }

    #[test]
    fn median_two_routes_agree() {
        let d = quarters().restrict(&Cube::unit(1)).unwrap();
        for num in 0..12 {
            let s = rat(num, 12);
            assert_eq!(
                upper_median(&d, &s).unwrap(),
                upper_median_by_exceedance(&d, &s).unwrap(),
                "s = {num}/12"
            );
        }
    }

    #[test]
    fn median_mass_inequalities() {
        // mass{f < λ} ≤ s·W and mass{f > λ} ≤ (1-s)·W at λ = M_s
        let d = quarters().restrict(&Cube::unit(1)).unwrap();
        for num in 0..8 {
            let s = rat(num, 8);
            let lambda = upper_median(&d, &s).unwrap();
            assert!(d.mass_below(&lambda) <= &s * d.total_mass());
            assert!(d.mass_above(&lambda) <= (Rat::one() - &s) * d.total_mass());
        }
    }

    #[test]
    fn difference_examples() {
        let p = MedianParams::new(rat(1, 4), rat(3, 4)).unwrap();
        assert_eq!(median_difference(&quarters(), &Cube::unit(1), &p).unwrap(), rat_int(2));
        let c = StepFunction::constant(Cube::unit(1), rat(7, 3));
        assert_eq!(median_difference(&c, &Cube::unit(1), &p).unwrap(), rat_int(0));
    }

    #[test]
    fn oscillation_examples() {
        let f = quarters();
        let q = Cube::unit(1);
        assert_eq!(local_mean_oscillation(&f, &q, &rat(1, 4)).unwrap(), rat(3, 2));
        assert_eq!(local_mean_oscillation(&jump(), &q, &rat(1, 2)).unwrap(), rat_int(1));
        let c = StepFunction::constant(Cube::unit(1), rat_int(9));
        for num in 1..=4 {
            assert_eq!(local_mean_oscillation(&c, &q, &rat(num, 8)).unwrap(), rat_int(0));
        }
    }

    #[test]
    fn oscillation_matches_fine_grid_scan() {
        // Brute force over a fine grid of centers can only do better or equal;
        // the candidate-set minimum must match its best value.
        let f = quarters();
        let q = Cube::unit(1);
        let a = rat(1, 4);
        let best = local_mean_oscillation(&f, &q, &a).unwrap();
        let dist = f.restrict(&q).unwrap();
        let order = Rat::one() - &a;
        let mut grid_best: Option<Rat> = None;
        let mut c = rat_int(-1);
        while c <= rat_int(6) {
            let m = upper_median(&dist.abs_deviation(&c).unwrap(), &order).unwrap();
            if grid_best.as_ref().map_or(true, |b| m < *b) {
                grid_best = Some(m);
            }
            c += rat(1, 16);
        }
        assert_eq!(grid_best.unwrap(), best);
    }

    #[test]
    fn sigma_examples() {
        let f = quarters();
        let p = MedianParams::new(rat(1, 4), rat(3, 4)).unwrap();
        let root = DyadicCube::whole(Cube::unit(1));
        let t = sigma_oscillations(&f, &root, &p).unwrap();
        let d_root = median_difference(&f, &Cube::unit(1), &p).unwrap();
        assert_eq!(t.sigma_plus, d_root);
        assert_eq!(t.sigma_minus, d_root);
        let left_half = &root.children()[0];
        let t = sigma_oscillations(&f, left_half, &p).unwrap();
        assert_eq!(t.sigma_plus, rat_int(1));
        assert_eq!(t.sigma_minus, rat_int(3));
        assert_eq!(t.sigma, rat_int(4));
    }

    #[test]
    fn sigma_rejects_foreign_lattice() {
        let f = quarters();
        let p = MedianParams::new(rat(1, 4), rat(3, 4)).unwrap();
        let other = DyadicCube::whole(Cube::interval(rat_int(3), rat_int(1)).unwrap());
        assert!(matches!(
            sigma_oscillations(&f, &other, &p),
            Err(Error::LatticeMembership(_))
        ));
    }

    #[test]
    fn seminorm_examples() {
        let c = StepFunction::constant(Cube::unit(1), rat_int(2));
        let p = MedianParams::new(rat(1, 4), rat(3, 4)).unwrap();
        let fam = vec![Cube::unit(1)];
        assert_eq!(median_seminorm(&c, &fam, &p).unwrap(), rat_int(0));
        assert!(matches!(median_seminorm(&c, &[], &p), Err(Error::EmptyFamily)));
    }

    #[test]
    fn params_validation() {
        assert!(MedianParams::new(rat(1, 2), rat(1, 2)).is_err());
        assert!(MedianParams::new(rat(-1, 4), rat(1, 2)).is_err());
        assert!(MedianParams::new(rat(1, 4), rat_int(1)).is_err());
        assert!(MedianParams::new(Rat::zero(), rat(1, 2)).is_ok());
    }
}
