//! Deterministic self-verification suite. Every section re-checks a family
//! of exact invariants on seeded random inputs and fixed examples; the
//! rendered report is byte-identical for identical seeds.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::{
    gamma_porosity_demo, gamma_set, good_interval_scan, haar_counterexample, GammaDemoConfig,
};
use crate::cube::{dyadic_family, CellBudget, Cube};
use crate::error::Result;
use crate::median::{
    local_mean_oscillation, median_difference, median_pair, median_seminorm, upper_median,
    upper_median_by_exceedance, MedianParams,
};
use crate::points::PointSet;
use crate::porosity::{porosity_report, PorosityConfig};
use crate::rational::{fmt_rat, rat, rat_to_f64, Rat};
use crate::real::Real;
use crate::samples::{
    random_finite_set, random_nested_pair, random_params, random_step_function, random_subcube,
};
use crate::sparse::{
    build_chain, build_directed_family, build_dyadic_decomposition, build_general_decomposition,
    carleson_diagnostics, Direction, SparseFamily,
};
use crate::step::StepFunction;
use crate::verify::vs_volume_brute_force;
use crate::weights::{
    ap_product, distance_power_integral, mu_exponent_estimate, MuConfig, PIndex, WeightParams,
};

#[derive(Debug, Clone)]
pub struct SectionResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub seed: u64,
    pub sections: Vec<SectionResult>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.sections.iter().all(|s| s.pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for s in &self.sections {
            out.push_str(&format!(
                "[{}] {}: {}\n",
                if s.pass { "PASS" } else { "FAIL" },
                s.name,
                s.detail
            ));
        }
        let failures = self.sections.iter().filter(|s| !s.pass).count();
        if failures == 0 {
            out.push_str("ALL PASS\n");
        } else {
            out.push_str(&format!("FAILURES: {failures}\n"));
        }
        out
    }
}

/// Size knobs; the defaults keep the suite interactive.
#[derive(Debug, Clone)]
pub struct SelftestScale {
    pub median_functions: usize,
    pub decomposition_functions: usize,
    pub point_sets: usize,
    pub gamma_samples: usize,
}

impl Default for SelftestScale {
    fn default() -> Self {
        SelftestScale {
            median_functions: 60,
            decomposition_functions: 12,
            point_sets: 12,
            gamma_samples: 40,
        }
    }
}

fn budget() -> CellBudget {
    CellBudget::default()
}

struct Check {
    violations: u64,
    checks: u64,
    first: Option<String>,
}

impl Check {
    fn new() -> Self {
        Check { violations: 0, checks: 0, first: None }
    }

    fn expect(&mut self, ok: bool, label: impl Fn() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(label());
            }
        }
    }

    fn finish(self, name: &'static str, extra: &str) -> SectionResult {
        let pass = self.violations == 0;
        let detail = if pass {
            format!("{} checks{}{}", self.checks, if extra.is_empty() { "" } else { "; " }, extra)
        } else {
            format!(
                "{} of {} checks failed; first: {}",
                self.violations,
                self.checks,
                self.first.unwrap_or_default()
            )
        };
        SectionResult { name, pass, detail }
    }
}

/// Median value identities and inequalities on random step functions.
pub fn section_median_properties(seed: u64, functions: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_6469);
    let mut c = Check::new();
    for i in 0..functions {
        let f = random_step_function(&mut rng, 5);
        let p = random_params(&mut rng);
        let (s, t) = (p.s().clone(), p.t().clone());
        let cubes = vec![
            f.root().clone(),
            random_subcube(&mut rng, f.root()),
            random_subcube(&mut rng, f.root()),
        ];
        for q in &cubes {
            let dist = match f.restrict(q) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let w = dist.total_mass().clone();
            for idx in [&s, &t] {
                let m = upper_median(&dist, idx).expect("nonempty");
                // two independent routes agree
                c.expect(
                    upper_median_by_exceedance(&dist, idx).expect("nonempty") == m,
                    || format!("fn {i}: median routes disagree"),
                );
                // mass inequalities at the median
                c.expect(dist.mass_below(&m) <= idx * &w, || format!("fn {i}: mass below"));
                c.expect(
                    dist.mass_above(&m) <= (Rat::one() - idx) * &w,
                    || format!("fn {i}: mass above"),
                );
            }
            let (m_s, m_t) = (
                upper_median(&dist, &s).expect("nonempty"),
                upper_median(&dist, &t).expect("nonempty"),
            );
            c.expect(m_s <= m_t, || format!("fn {i}: medians not monotone"));
            // translation equivariance
            let shift = rat(7, 3);
            let shifted = dist.map_affine(&Rat::one(), &shift).expect("affine");
            c.expect(
                upper_median(&shifted, &s).expect("nonempty") == &m_s + &shift,
                || format!("fn {i}: translation"),
            );
            // pointwise domination is respected
            let bump = dist.map_affine(&Rat::one(), &rat(1, 5)).expect("affine");
            c.expect(
                upper_median(&bump, &s).expect("nonempty") >= m_s,
                || format!("fn {i}: monotone under domination"),
            );
            // |M_s(f)| against medians of |f|
            let abs_dist = dist.abs().expect("abs");
            if m_s.is_negative() {
                let bound = upper_median(&abs_dist, &(Rat::one() - &s)).expect("nonempty");
                c.expect(crate::rational::abs(&m_s) <= bound, || format!("fn {i}: abs bound"));
            } else {
                let bound = upper_median(&abs_dist, &s).expect("nonempty");
                c.expect(crate::rational::abs(&m_s) <= bound, || format!("fn {i}: abs bound"));
            }
            // nonnegative functions sit below the scaled average
            let min_v = dist.entries().first().expect("nonempty").0.clone();
            let lift = if min_v.is_negative() { -min_v.clone() } else { Rat::zero() };
            let nonneg = dist.map_affine(&Rat::one(), &lift).expect("affine");
            let avg = nonneg.average().expect("nonempty");
            c.expect(
                upper_median(&nonneg, &s).expect("nonempty") <= avg / (Rat::one() - &s),
                || format!("fn {i}: average bound"),
            );
            // oscillation control of the difference
            let mad = dist.mean_abs_dev(&dist.average().expect("nonempty")).expect("nonempty");
            let constant =
                Rat::one() / (Rat::one() - &t) + Rat::one() / &s;
            c.expect(
                &m_t - &m_s <= constant * &mad,
                || format!("fn {i}: difference vs mean oscillation"),
            );
            // the low-end variant
            let blo_avg = nonneg.average().expect("nonempty");
            let m_t_shift = upper_median(&nonneg, &t).expect("nonempty");
            c.expect(
                m_t_shift <= blo_avg / (Rat::one() - &t)
                    + nonneg.entries().first().expect("nonempty").0.clone(),
                || format!("fn {i}: low-end control"),
            );
            // strictly increasing reparametrization commutes
            let (a, b) = (rat(3, 1), rat(5, 7));
            let mapped = dist.map_affine(&a, &b).expect("affine");
            c.expect(
                upper_median(&mapped, &s).expect("nonempty") == &a * &m_s + &b,
                || format!("fn {i}: increasing map"),
            );
            // strictly decreasing reparametrization flips the index
            let (a, b) = (rat(-2, 1), rat(1, 3));
            let flipped = dist.map_affine(&a, &b).expect("affine");
            let rhs = upper_median(&flipped, &(Rat::one() - &s)).expect("nonempty");
            c.expect(&a * &m_s + &b <= rhs, || format!("fn {i}: decreasing map"));
        }
        // cells at the function's own resolution reproduce the cell value
        if f.cell_count() > 1 {
            let idx = (i * 7) % f.cell_count();
            let cell = f.cell_cube(idx);
            let dist = f.restrict(&cell).expect("cell overlaps");
            for num in [0i64, 1, 3] {
                let sv = rat(num, 4);
                c.expect(
                    upper_median(&dist, &sv).expect("nonempty") == *f.value_at_index(idx),
                    || format!("fn {i}: cell median"),
                );
            }
        }
        // oscillation sandwich with explicit constants
        let q = f.root().clone();
        let d = median_difference(&f, &q, &p).expect("root overlaps");
        let a_low = Rat::one() - (&t - &s);
        let a_high = {
            let x = Rat::one() - &t;
            if x < s { x } else { s.clone() }
        };
        let low = local_mean_oscillation(&f, &q, &a_low).expect("root");
        let high = local_mean_oscillation(&f, &q, &a_high).expect("root");
        c.expect(low <= d.clone(), || format!("fn {i}: sandwich lower"));
        c.expect(d <= Rat::from_integer(BigInt::from(2)) * high, || {
            format!("fn {i}: sandwich upper")
        });
    }
    c.finish("median-properties", &format!("{functions} functions"))
}

/// Median comparison across nested cubes with controlled volume ratios.
pub fn section_nested_medians(seed: u64, functions: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e65_7374);
    let mut c = Check::new();
    let mut tested = 0usize;
    for _ in 0..functions {
        let f = random_step_function(&mut rng, 5);
        let p = random_params(&mut rng);
        let ratio = p.chain_ratio();
        // nudge above the ratio so both hypotheses apply strictly
        let min_ratio = &ratio * rat(101, 100);
        if min_ratio >= Rat::one() {
            continue;
        }
        let (inner, outer) = random_nested_pair(&mut rng, f.root(), &min_ratio);
        if inner.measure() <= &ratio * outer.measure() {
            continue;
        }
        tested += 1;
        let (inner_low, inner_high) = median_pair(&f, &inner, &p).expect("overlap");
        let (outer_low, outer_high) = median_pair(&f, &outer, &p).expect("overlap");
        c.expect(inner_low <= outer_high, || "inner low above outer high".into());
        c.expect(outer_low <= inner_high, || "outer low above inner high".into());
    }
    c.finish("nested-median-comparison", &format!("{tested} nested pairs"))
}

/// Stopping-time family structure: packing, witness density, monotonicity.
pub fn section_sparse_directed(seed: u64, functions: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7370_6472);
    let mut c = Check::new();
    for i in 0..functions {
        let f = random_step_function(&mut rng, 5);
        let p = random_params(&mut rng);
        let root = f.root().clone();
        for (dir, packing, eta_floor) in [
            (Direction::Up, p.packing_up(), p.eta_up()),
            (Direction::Down, p.packing_down(), p.eta_down()),
        ] {
            let fam = build_directed_family(&f, &root, &p, dir).expect("family");
            c.expect(fam.eta_witness >= eta_floor, || format!("fn {i}: eta floor"));
            let mut seen = std::collections::BTreeSet::new();
            for m in &fam.members {
                let kids = m.stopping_children_volume.clone().expect("directed");
                c.expect(
                    kids <= &packing * m.cube.measure(),
                    || format!("fn {i}: packing at {}", m.cube.describe()),
                );
                for cell in m.witness_cells.as_ref().expect("directed") {
                    c.expect(seen.insert(*cell), || format!("fn {i}: witness overlap"));
                }
                if m.cube != root {
                    let parent = crate::cube::DyadicCube::locate(f.root(), &m.cube)
                        .expect("dyadic member")
                        .parent()
                        .realize();
                    let (p_low, p_high) = median_pair(&f, &parent, &p).expect("overlap");
                    match dir {
                        Direction::Up => c.expect(
                            m.median_low >= p_low,
                            || format!("fn {i}: up-member drops below parent"),
                        ),
                        Direction::Down => c.expect(
                            m.median_high <= p_high,
                            || format!("fn {i}: down-member rises above parent"),
                        ),
                    }
                }
            }
        }
    }
    c.finish("sparse-directed", &format!("{functions} functions, both directions"))
}

/// Two-sided dyadic decomposition: pointwise bound, density bookkeeping,
/// and the integrated consequence.
pub fn section_sparse_dyadic(seed: u64, functions: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6479_6164);
    let mut c = Check::new();
    let mut cases: Vec<(StepFunction, MedianParams)> = Vec::new();
    for _ in 0..functions {
        let f = random_step_function(&mut rng, 5);
        let p = random_params(&mut rng);
        cases.push((f, p));
    }
    // fixed cases: the sign jump and the alternating profile
    cases.push((
        StepFunction::new(Cube::unit(1), 1, vec![rat(-1, 1), rat(1, 1)]).expect("jump"),
        MedianParams::new(rat(3, 10), rat(9, 20)).expect("params"),
    ));
    cases.push((
        haar_counterexample(2).expect("profile"),
        MedianParams::new(rat(3, 10), rat(9, 20)).expect("params"),
    ));
    for (i, (f, p)) in cases.iter().enumerate() {
        let root = f.root().clone();
        let (fam, report) = build_dyadic_decomposition(f, &root, p).expect("decomposition");
        c.expect(report.holds, || format!("case {i}: pointwise bound"));
        c.expect(
            fam.eta_witness == p.eta_combined(),
            || format!("case {i}: eta certificate"),
        );
        let sup = fam.carleson_sup.clone().expect("computed");
        c.expect(
            sup <= Rat::one() / p.eta_combined(),
            || format!("case {i}: subtree sums exceed certified packing"),
        );
        // integrated consequence of the cellwise bound
        let m_root = median_pair(f, &root, p).expect("root").0;
        let dist = f.restrict(&root).expect("root");
        let integral: Rat = dist
            .entries()
            .iter()
            .map(|(v, m)| crate::rational::abs(&(v - &m_root)) * m)
            .sum();
        let weighted: Rat = fam
            .members
            .iter()
            .map(|m| m.sigma.as_ref().expect("dyadic").sigma.clone() * m.cube.measure())
            .sum();
        c.expect(
            integral <= Rat::from_integer(BigInt::from(2)) * weighted,
            || format!("case {i}: integrated bound"),
        );
    }
    c.finish("sparse-dyadic-domination", &format!("{} cases", functions + 2))
}

/// Chain-extended decomposition: the difference-weighted bound, chain
/// geometry, and the layered volume bookkeeping.
pub fn section_sparse_general(seed: u64, functions: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_6169);
    let mut c = Check::new();
    let mut cases: Vec<(StepFunction, MedianParams)> = Vec::new();
    for _ in 0..functions {
        let f = random_step_function(&mut rng, 4);
        let p = random_params(&mut rng);
        cases.push((f, p));
    }
    cases.push((
        StepFunction::new(Cube::unit(1), 1, vec![rat(-1, 1), rat(1, 1)]).expect("jump"),
        MedianParams::new(rat(3, 10), rat(9, 20)).expect("params"),
    ));
    for (i, (f, p)) in cases.iter().enumerate() {
        let root = f.root().clone();
        let (fam, report) = build_general_decomposition(f, &root, p).expect("decomposition");
        c.expect(report.holds, || format!("case {i}: pointwise bound"));
        c.expect(report.chain_bound_ok, || format!("case {i}: chain jump control"));
        let r = p.chain_ratio();
        for m in &fam.members {
            if let crate::sparse::MemberKind::Chain { generator, step } = &m.kind {
                let gen_cube = &fam.members[*generator].cube;
                c.expect(
                    m.cube.measure() <= r.pow(-(*step as i32)) * gen_cube.measure(),
                    || format!("case {i}: layer volume"),
                );
            }
        }
        // chain members compare pairwise
        for m in &fam.members {
            if m.cube == root {
                continue;
            }
            if !matches!(m.kind, crate::sparse::MemberKind::Dyadic) {
                continue;
            }
            let parent = crate::cube::DyadicCube::locate(f.root(), &m.cube)
                .expect("dyadic")
                .parent()
                .realize();
            let chain = build_chain(&m.cube, &parent, p).expect("chain");
            for w in chain.windows(2) {
                let (lo_in, hi_in) = median_pair(f, &w[0], p).expect("overlap");
                let (lo_out, hi_out) = median_pair(f, &w[1], p).expect("overlap");
                c.expect(lo_in <= hi_out, || format!("case {i}: chain pair low/high"));
                c.expect(lo_out <= hi_in, || format!("case {i}: chain pair high/low"));
            }
        }
        // total volume against the layered certificate
        c.expect(
            fam.total_member_volume() <= (Rat::one() / &fam.eta_witness) * root.measure(),
            || format!("case {i}: total volume"),
        );
        // integrated consequence with the family seminorm
        let m_root = median_pair(f, &root, p).expect("root").0;
        let dist = f.restrict(&root).expect("root");
        let integral: Rat = dist
            .entries()
            .iter()
            .map(|(v, m)| crate::rational::abs(&(v - &m_root)) * m)
            .sum();
        let family_sup = fam
            .members
            .iter()
            .map(|m| m.difference.clone())
            .max()
            .unwrap_or_else(Rat::zero);
        let volume_sum = fam.total_member_volume();
        c.expect(
            integral <= report.constant_used.clone() * &family_sup * &volume_sum,
            || format!("case {i}: integrated seminorm bound"),
        );
    }
    c.finish("sparse-general-domination", &format!("{} cases", functions + 1))
}

/// Subtree-sum bookkeeping and the density combination rule.
pub fn section_carleson(seed: u64) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6361_726c);
    let mut c = Check::new();
    let root = Cube::unit(1);
    let fam = SparseFamily::from_cubes(root.clone(), vec![root.clone()]).expect("family");
    c.expect(
        carleson_diagnostics(&fam).expect("diag") == (Rat::one(), Rat::one()),
        || "singleton".into(),
    );
    let half = Cube::interval(Rat::zero(), rat(1, 2)).expect("half");
    let fam = SparseFamily::from_cubes(root.clone(), vec![root.clone(), half]).expect("family");
    c.expect(
        carleson_diagnostics(&fam).expect("diag") == (rat(3, 2), rat(2, 3)),
        || "nested pair".into(),
    );
    for depth in 1..=4u32 {
        let cubes = dyadic_family(&root, depth, budget()).expect("family");
        let fam = SparseFamily::from_cubes(root.clone(), cubes).expect("family");
        let (sup, eta) = carleson_diagnostics(&fam).expect("diag");
        c.expect(
            sup == Rat::from_integer(BigInt::from(depth as i64 + 1)),
            || format!("tree depth {depth}"),
        );
        c.expect(eta == rat(1, depth as i64 + 1), || format!("tree eta {depth}"));
    }
    // union of the two directed families obeys the combination rule
    for _ in 0..4 {
        let f = random_step_function(&mut rng, 4);
        let p = random_params(&mut rng);
        let up = build_directed_family(&f, f.root(), &p, Direction::Up).expect("up");
        let down = build_directed_family(&f, f.root(), &p, Direction::Down).expect("down");
        let mut cubes: Vec<Cube> = up.members.iter().map(|m| m.cube.clone()).collect();
        cubes.extend(down.members.iter().map(|m| m.cube.clone()));
        cubes.sort();
        cubes.dedup();
        let merged = SparseFamily::from_cubes(f.root().clone(), cubes).expect("merged");
        let (sup, _) = carleson_diagnostics(&merged).expect("diag");
        let bound = Rat::one() / &up.eta_witness + Rat::one() / &down.eta_witness;
        c.expect(sup <= bound, || "union exceeds combined packing".into());
        let combined = SparseFamily::merged_eta(&[up.eta_witness.clone(), down.eta_witness.clone()]);
        c.expect(
            combined <= up.eta_witness && combined <= down.eta_witness,
            || "combined density exceeds a part".into(),
        );
    }
    c.finish("carleson-bookkeeping", "examples and unions")
}

/// The alternating profile: dyadic blindness and growing pair differences.
pub fn section_alternating_profile() -> SectionResult {
    let mut c = Check::new();
    let k = 4u32;
    let f = haar_counterexample(k).expect("profile");
    let narrow = MedianParams::new(rat(3, 10), rat(9, 20)).expect("params");
    let family = dyadic_family(f.root(), k + 2, budget()).expect("family");
    c.expect(
        median_seminorm(&f, &family, &narrow).expect("family") == Rat::zero(),
        || "narrow-band seminorm nonzero".into(),
    );
    let wide = MedianParams::new(rat(1, 8), rat(7, 8)).expect("params");
    for m in 0..(1i64 << (k - 1)) {
        let q = Cube::interval(Rat::from_integer(BigInt::from(2 * m)), rat(2, 1)).expect("pair");
        c.expect(
            median_difference(&f, &q, &wide).expect("pair")
                == Rat::from_integer(BigInt::from(2 * (m + 1))),
            || format!("pair difference at m={m}"),
        );
        let dist = f.restrict(&q).expect("pair");
        c.expect(dist.average().expect("pair").is_zero(), || format!("pair average at m={m}"));
    }
    let pair_family: Vec<Cube> = (0..(1i64 << (k - 1)))
        .map(|m| Cube::interval(Rat::from_integer(BigInt::from(2 * m)), rat(2, 1)).expect("pair"))
        .collect();
    c.expect(
        median_seminorm(&f, &pair_family, &wide).expect("family")
            == Rat::from_integer(BigInt::from(1i64 << k)),
        || "pair seminorm".into(),
    );
    c.finish("alternating-profile", "exact dichotomy at K=4")
}

/// Volume scales match the subset-enumeration oracle.
pub fn section_volume_oracle(seed: u64, sets: usize) -> SectionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x766f_6c75);
    let mut c = Check::new();
    for i in 0..sets {
        let dim = if i % 2 == 0 { 1 } else { 2 };
        let root = if dim == 1 {
            Cube::interval(Rat::zero(), rat(2, 1)).expect("root")
        } else {
            Cube::unit(2)
        };
        let depth = if dim == 1 { 4 } else { 3 };
        let set = random_finite_set(&mut rng, dim, 3 + (i % 4), &root);
        if !set.meets_cube(&root) {
            continue;
        }
        let inv =
            crate::porosity::free_cube_inventory(&set, &root, depth, budget()).expect("inventory");
        for num in [1i64, 2, 3, 5, 7] {
            let s = rat(num, 8);
            let fast = crate::porosity::vs_volume(&inv, &s).expect("volume");
            let brute =
                vs_volume_brute_force(&set, &root, depth, &s, budget()).expect("oracle");
            c.expect(fast == brute, || format!("set {i}: s={num}/8"));
        }
    }
    // the lattice example
    let z = PointSet::lattice(1).expect("lattice");
    let root = Cube::interval(Rat::zero(), rat(2, 1)).expect("root");
    let inv = crate::porosity::free_cube_inventory(&z, &root, 4, budget()).expect("inventory");
    c.expect(
        crate::porosity::vs_volume(&inv, &rat(1, 2)).expect("volume")
            == crate::porosity::VsValue::Exact(rat(1, 2)),
        || "lattice half".into(),
    );
    c.expect(
        crate::porosity::vs_volume(&inv, &rat(3, 8)).expect("volume")
            == crate::porosity::VsValue::Exact(rat(1, 4)),
        || "lattice three-eighths".into(),
    );
    c.finish("volume-scale-oracle", &format!("{sets} random sets"))
}

/// Exact sandwich between distance medians and volume scales.
pub fn section_distance_sandwich() -> SectionResult {
    let mut c = Check::new();
    let p = MedianParams::new(rat(1, 2), rat(3, 4)).expect("params");
    let cfg = PorosityConfig::new(8);
    let z = PointSet::lattice(1).expect("lattice");
    let origin = PointSet::single_point(vec![Rat::zero()]).expect("point");
    let powers = gamma_set(rat(1, 2), 4096).expect("powers");
    let cases: Vec<(&PointSet, Vec<Cube>)> = vec![
        (
            &z,
            (0..4)
                .map(|k| Cube::interval(Rat::zero(), rat(2i64 << k, 1)).expect("cube"))
                .chain([Cube::interval(rat(-1, 1), rat(2, 1)).expect("cube")])
                .collect(),
        ),
        (
            &origin,
            vec![
                Cube::interval(rat(-1, 1), rat(2, 1)).expect("cube"),
                Cube::interval(rat(-2, 1), rat(4, 1)).expect("cube"),
                Cube::interval(rat(-1, 4), rat(1, 2)).expect("cube"),
            ],
        ),
        (
            &powers,
            vec![
                Cube::interval(rat(1, 1), rat(2, 1)).expect("cube"),
                Cube::interval(Rat::zero(), rat(4, 1)).expect("cube"),
                Cube::interval(rat(2, 1), rat(4, 1)).expect("cube"),
                Cube::interval(rat(1, 2), rat(1, 1)).expect("cube"),
            ],
        ),
    ];
    let mut cubes = 0usize;
    for (set, family) in &cases {
        let report = porosity_report(set, family, &p, &cfg).expect("report");
        for row in &report.rows {
            if !row.meets_set {
                continue;
            }
            cubes += 1;
            c.expect(
                row.sandwich_lower_ok == Some(true),
                || format!("{}: lower half at {}", set.describe(), row.cube.describe()),
            );
            c.expect(
                row.sandwich_upper_ok == Some(true),
                || format!("{}: upper half at {}", set.describe(), row.cube.describe()),
            );
        }
    }
    // scale-vs-integral consequence at two exponents
    for (set, q) in [
        (&z, Cube::interval(Rat::zero(), rat(2, 1)).expect("cube")),
        (&origin, Cube::interval(rat(-1, 1), rat(2, 1)).expect("cube")),
    ] {
        let inv = crate::porosity::free_cube_inventory(set, &q, 8, budget()).expect("inventory");
        let v = crate::porosity::vs_volume(&inv, p.s()).expect("volume");
        let l = v.exact().cloned().expect("resolved");
        for (p_exp, cap) in [(rat(1, 1), 8.0f64), (rat(-1, 2), 8.0f64)] {
            let integral = distance_power_integral(set, &q, &p_exp, 0, budget())
                .expect("integral")
                .to_f64()
                / rat_to_f64(&q.measure());
            let lhs = rat_to_f64(&l).powf(rat_to_f64(&p_exp));
            c.expect(
                lhs <= cap * integral,
                || format!("scale-integral ratio at exponent {}", fmt_rat(&p_exp)),
            );
        }
    }
    c.finish("distance-median-sandwich", &format!("{cubes} cubes across three sets"))
}

/// Closed-form weight products, the ordering chain, duality, and the
/// in-range/out-of-range scale behavior.
pub fn section_weights() -> SectionResult {
    let mut c = Check::new();
    let origin = PointSet::single_point(vec![Rat::zero()]).expect("point");
    // exact product at p = 2
    let q = Cube::interval(rat(-1, 1), rat(2, 1)).expect("cube");
    let w = WeightParams::new(rat(1, 2), PIndex::Finite(rat(2, 1))).expect("weight");
    let row = ap_product(&origin, &w, &q, 0, budget()).expect("row");
    c.expect(
        row.product_exact == Some(Real::from_rat(rat(4, 3))),
        || "closed-form product".into(),
    );
    // ordering chain on a lattice cube
    let z = PointSet::lattice(1).expect("lattice");
    let q = Cube::interval(Rat::zero(), Rat::one()).expect("cube");
    let alpha = rat(1, 4);
    let a2 = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(rat(2, 1))).expect("w"), &q, 0, budget()).expect("row");
    let a3 = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(rat(3, 1))).expect("w"), &q, 0, budget()).expect("row");
    let ainf = ap_product(&z, &WeightParams::new(alpha, PIndex::Infinity).expect("w"), &q, 0, budget()).expect("row");
    c.expect(ainf.product <= a3.product + 1e-9, || "chain at infinity".into());
    c.expect(a3.product <= a2.product + 1e-9, || "chain at finite orders".into());
    // duality identity
    let alpha = rat(1, 3);
    let p3 = rat(3, 1);
    let row = ap_product(&z, &WeightParams::new(alpha.clone(), PIndex::Finite(p3.clone())).expect("w"), &q, 0, budget()).expect("row");
    let dual_alpha = -&alpha / (&p3 - Rat::one());
    let dual = ap_product(&z, &WeightParams::new(dual_alpha, PIndex::Finite(rat(3, 2))).expect("w"), &q, 0, budget()).expect("row");
    c.expect(
        (row.product.powf(0.5) - dual.product).abs() < 1e-10,
        || "duality identity".into(),
    );
    // in-range exponents: centered products are exactly scale-flat
    for alpha in [rat(9, 10), rat(-9, 10)] {
        let w = WeightParams::new(alpha.clone(), PIndex::Finite(rat(2, 1))).expect("w");
        let mut first: Option<Real> = None;
        for k in [-8i32, -4, 0, 4, 8] {
            let h = crate::rational::pow2(k);
            let q = Cube::interval(-h.clone(), &h * rat(2, 1)).expect("cube");
            let row = ap_product(&origin, &w, &q, 0, budget()).expect("row");
            let exact = row.product_exact.expect("closed form");
            match &first {
                None => first = Some(exact),
                Some(f) => c.expect(
                    *f == exact,
                    || format!("centered product not flat at alpha={}", fmt_rat(&alpha)),
                ),
            }
        }
    }
    // out-of-range exponents: divergence on set-adjacent cubes, strict
    // growth along cubes pinching the singularity
    for alpha in [rat(11, 10), rat(-11, 10)] {
        let w = WeightParams::new(alpha.clone(), PIndex::Finite(rat(2, 1))).expect("w");
        let centered = Cube::interval(rat(-1, 1), rat(2, 1)).expect("cube");
        c.expect(
            matches!(
                ap_product(&origin, &w, &centered, 0, budget()),
                Err(crate::error::Error::Divergence { .. })
            ),
            || format!("no divergence at alpha={}", fmt_rat(&alpha)),
        );
        let mut prev: Option<Real> = None;
        for k in [6i32, 7, 8] {
            let lo = crate::rational::pow2(-k);
            let q = Cube::interval(lo.clone(), Rat::one() - &lo).expect("cube");
            let row = ap_product(&origin, &w, &q, 0, budget()).expect("row");
            let exact = row.product_exact.expect("closed form");
            if let Some(p) = prev {
                c.expect(
                    exact > p,
                    || format!("pinched products not growing at alpha={}", fmt_rat(&alpha)),
                );
            }
            prev = Some(exact);
        }
    }
    c.finish("weight-closed-forms", "products, chain, duality, scale scans")
}

/// The decay-exponent estimator brackets the model answers.
pub fn section_mu_estimates() -> SectionResult {
    let mut c = Check::new();
    let cfg = MuConfig { scale_min: -6, scale_max: 6, ..MuConfig::default() };
    let origin = PointSet::single_point(vec![Rat::zero()]).expect("point");
    let est = mu_exponent_estimate(&origin, &PIndex::Infinity, &cfg).expect("estimate");
    let (lo, hi) = (rat_to_f64(&est.lower), rat_to_f64(&est.upper));
    c.expect(
        !est.degenerate && (lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1,
        || format!("origin bracket ({lo}, {hi})"),
    );
    let z = PointSet::lattice(1).expect("lattice");
    let est = mu_exponent_estimate(&z, &PIndex::One, &cfg).expect("estimate");
    let (lo, hi) = (rat_to_f64(&est.lower), rat_to_f64(&est.upper));
    c.expect(
        !est.degenerate && (lo - 1.0).abs() <= 0.1 && (hi - 1.0).abs() <= 0.1,
        || format!("lattice bracket ({lo}, {hi})"),
    );
    c.finish("mu-brackets", "origin and lattice estimates")
}

/// Power-gap scans: good-interval scale law and prefix growth.
pub fn section_gamma(seed: u64, samples: usize) -> SectionResult {
    let mut c = Check::new();
    let gamma = rat(1, 2);
    let scan = good_interval_scan(&gamma, &rat(1, 2), 2000, 24).expect("scan");
    c.expect(
        scan.min_ratio > 0.2 && scan.max_ratio < 5.0,
        || format!("scale-law band ({}, {})", scan.min_ratio, scan.max_ratio),
    );
    let rec = scan
        .records
        .iter()
        .find(|r| r.index_left == 1 && r.index_scale == 4)
        .expect("ladder pair");
    c.expect(
        rec.scale == Real::from_int(2) - Real::sqrt_rat(&rat(3, 1)).expect("root"),
        || "anchored interval scale".into(),
    );
    let cfg = GammaDemoConfig {
        bound: 3000,
        sample_count: samples,
        seed,
        prefix_indices: vec![4, 16, 64, 256, 1024],
        ..GammaDemoConfig::default()
    };
    let demo = gamma_porosity_demo(&gamma, &cfg).expect("demo");
    let ratios: Vec<f64> = demo.prefix_rows.iter().map(|r| r.3).collect();
    c.expect(ratios[0] == 1.0 && ratios[1] == 1.0, || "prefix plateau".into());
    c.expect(
        ratios[2] > ratios[1] && ratios[3] > ratios[2] && ratios[4] > ratios[3],
        || "prefix growth".into(),
    );
    c.expect(
        (demo.prefix_slope - demo.predicted_slope).abs() <= 0.25 * demo.predicted_slope,
        || format!("slope {} vs predicted {}", demo.prefix_slope, demo.predicted_slope),
    );
    c.expect(
        demo.sup_ratio_78_34.is_finite() && demo.sup_ratio_78_34 < 16.0,
        || "sampled ratio unbounded".into(),
    );
    c.finish("gap-scale-demo", &format!("{samples} sampled intervals"))
}

/// Runs every section; `jobs > 1` fans sections across threads with a
/// deterministic merge by section index.
pub fn run_selftest(seed: u64, scale: &SelftestScale, jobs: usize) -> Result<SelftestReport> {
    let tasks: Vec<Box<dyn Fn() -> SectionResult + Send + Sync>> = vec![
        Box::new(move || section_median_properties(seed, scale_copy(scale).median_functions)),
        Box::new(move || section_nested_medians(seed, scale_copy(scale).median_functions)),
        Box::new(move || section_sparse_directed(seed, scale_copy(scale).decomposition_functions)),
        Box::new(move || section_sparse_dyadic(seed, scale_copy(scale).decomposition_functions)),
        Box::new(move || section_sparse_general(seed, scale_copy(scale).decomposition_functions)),
        Box::new(move || section_carleson(seed)),
        Box::new(|| section_alternating_profile()),
        Box::new(move || section_volume_oracle(seed, scale_copy(scale).point_sets)),
        Box::new(|| section_distance_sandwich()),
        Box::new(|| section_weights()),
        Box::new(|| section_mu_estimates()),
        Box::new(move || section_gamma(seed, scale_copy(scale).gamma_samples)),
    ];
    let jobs = jobs.max(1);
    let mut sections: Vec<Option<SectionResult>> = (0..tasks.len()).map(|_| None).collect();
    if jobs == 1 {
        for (i, t) in tasks.iter().enumerate() {
            sections[i] = Some(t());
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<SectionResult>>> =
            (0..tasks.len()).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= tasks.len() {
                        break;
                    }
                    *slots[i].lock().expect("slot") = Some(tasks[i]());
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            sections[i] = slot.into_inner().expect("slot");
        }
    }
    Ok(SelftestReport {
        seed,
        sections: sections.into_iter().map(|s| s.expect("section ran")).collect(),
    })
}

// scale is tiny; clone through a helper so the closures stay `Fn`
fn scale_copy(s: &SelftestScale) -> SelftestScale {
    s.clone()
}
