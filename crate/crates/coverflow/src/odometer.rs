//! The n-adic odometer and finite-group skew products over it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::{is_transitive, MonodromyRep};
use crate::perm::Permutation;

/// An eventually-zero point of the n-adic digit space: digits beyond the
/// stored window are all zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdometerPoint {
    pub base: u32,
    digits: Vec<u32>,
}

impl OdometerPoint {
    pub fn new(base: u32, mut digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::Invalid(format!("base must be ≥ 2, got {base}")));
        }
        if let Some(&bad) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::Invalid(format!(
                "digit {bad} out of range for base {base}"
            )));
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(OdometerPoint { base, digits })
    }

    pub fn zero(base: u32) -> Self {
        OdometerPoint { base, digits: vec![] }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Digit at 1-based position k (zero beyond the stored window).
    pub fn digit(&self, k: usize) -> u32 {
        self.digits.get(k - 1).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Smallest 1-based index k with x_k ≠ 0, or None at the zero point.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.digits.iter().position(|&d| d != 0).map(|i| i + 1)
    }
}

/// Addition by 1 with carry to the right: digits before the first non-(n−1)
/// position reset to 0 and that position increments.
pub fn odometer_step(x: &OdometerPoint) -> OdometerPoint {
    let n = x.base;
    let mut digits = x.digits.clone();
    match digits.iter().position(|&d| d != n - 1) {
        Some(kappa) => {
            for d in digits.iter_mut().take(kappa) {
                *d = 0;
            }
            digits[kappa] += 1;
        }
        None => {
            // every stored digit is n−1 (this includes the zero point)
            for d in digits.iter_mut() {
                *d = 0;
            }
            digits.push(1);
        }
    }
    OdometerPoint::new(n, digits).expect("digits stay in range")
}

/// Inverse of `odometer_step` on eventually-zero points. The zero point has
/// no eventually-zero predecessor (it would need an infinite tail of n−1).
pub fn odometer_step_back(x: &OdometerPoint) -> Option<OdometerPoint> {
    let n = x.base;
    let kappa = x.first_nonzero()?;
    let mut digits = x.digits.clone();
    digits[kappa - 1] -= 1;
    for d in digits.iter_mut().take(kappa - 1) {
        *d = n - 1;
    }
    Some(OdometerPoint::new(n, digits).expect("digits stay in range"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewState {
    pub point: OdometerPoint,
    /// Fiber coordinate in {1..d}.
    pub fiber: usize,
}

/// The cocycle data for E_ψ: permutation ψ(ℓ_k) applied when the carry depth
/// of the current point is k.
#[derive(Clone, Debug)]
pub struct SkewCocycle {
    pub base: u32,
    pub degree: usize,
    pub psi: MonodromyRep,
}

impl SkewCocycle {
    pub fn new(base: u32, degree: usize, psi: MonodromyRep) -> Result<Self> {
        if psi.degree != degree {
            return Err(Error::DegreeMismatch {
                expected: degree,
                got: psi.degree,
            });
        }
        if let Some(&k) = psi.assignments.keys().find(|&&k| k < 1) {
            return Err(Error::Invalid(format!(
                "skew cocycle index {k} must be positive"
            )));
        }
        Ok(SkewCocycle { base, degree, psi })
    }

    pub fn image(&self, k: usize) -> Permutation {
        self.psi.image(k as i64)
    }
}

/// One step of E_ψ(x,m) = (Ω_n(x), ψ(ℓ_{k_x})(m)), with k_x read off the
/// input point. At the all-zero point k_x does not exist and the fiber is
/// left unchanged.
pub fn skew_step(s: &SkewState, c: &SkewCocycle) -> SkewState {
    let fiber = match s.point.first_nonzero() {
        Some(k) => c.image(k).apply(s.fiber),
        None => s.fiber,
    };
    SkewState {
        point: odometer_step(&s.point),
        fiber,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitStatistics {
    pub iterations: u64,
    pub depth: usize,
    /// Visit counts keyed by "digits|fiber", e.g. "0110|2".
    pub counts: BTreeMap<String, u64>,
    /// Max |count − N/(n^depth · d)| over all cells.
    pub max_deviation: f64,
    /// Same deviation normalized by N.
    pub max_deviation_fraction: f64,
}

/// Runs N steps of the skew product and tabulates visits to each
/// (depth-prefix cylinder, fiber) cell.
pub fn orbit_statistics(
    c: &SkewCocycle,
    s0: &SkewState,
    iters: u64,
    depth: usize,
) -> Result<OrbitStatistics> {
    if iters < 1 || depth < 1 {
        return Err(Error::Invalid("iters and depth must be ≥ 1".into()));
    }
    let n = c.base as u64;
    let cells = n.pow(depth as u32) as usize * c.degree;
    let mut counts = vec![0u64; cells];

    // flat digit buffer so the hot loop avoids allocation
    let mut digits: Vec<u32> = s0.point.digits().to_vec();
    digits.resize(digits.len().max(depth) + 8, 0);
    let mut fiber = s0.fiber;
    // cache ψ images up to the current digit window; extend on demand
    let mut images: Vec<Permutation> = (1..=digits.len())
        .map(|k| c.image(k))
        .collect();

    for _ in 0..iters {
        // cell index: prefix digits as a base-n number, then the fiber
        let mut cyl = 0u64;
        for k in (0..depth).rev() {
            cyl = cyl * n + digits[k] as u64;
        }
        counts[cyl as usize * c.degree + (fiber - 1)] += 1;

        if let Some(kx) = digits.iter().position(|&d| d != 0) {
            fiber = images[kx].apply(fiber);
        }
        // odometer increment
        match digits.iter().position(|&d| d != c.base - 1) {
            Some(kappa) => {
                for d in digits.iter_mut().take(kappa) {
                    *d = 0;
                }
                digits[kappa] += 1;
            }
            None => {
                for d in digits.iter_mut() {
                    *d = 0;
                }
                digits.push(1);
                images.push(c.image(digits.len()));
            }
        }
        if digits.last() != Some(&0) && images.len() < digits.len() {
            images.push(c.image(digits.len()));
        }
    }

    let target = iters as f64 / cells as f64;
    let mut table = BTreeMap::new();
    let mut max_dev = 0.0f64;
    for cyl in 0..(cells / c.degree) {
        let mut pattern = String::with_capacity(depth);
        let mut v = cyl as u64;
        for _ in 0..depth {
            pattern.push(char::from_digit((v % n) as u32, 36).unwrap());
            v /= n;
        }
        for f in 1..=c.degree {
            let count = counts[cyl * c.degree + (f - 1)];
            max_dev = max_dev.max((count as f64 - target).abs());
            table.insert(format!("{pattern}|{f}"), count);
        }
    }
    Ok(OrbitStatistics {
        iterations: iters,
        depth,
        counts: table,
        max_deviation: max_dev,
        max_deviation_fraction: max_dev / iters as f64,
    })
}

/// Orbit partition of the fiber {1..d} under the permutations in the cocycle.
/// More than one block is a structural certificate of non-ergodicity.
pub fn fiber_invariant_sets(c: &SkewCocycle) -> Vec<Vec<usize>> {
    let gens: Vec<Permutation> = c
        .psi
        .assignments
        .values()
        .cloned()
        .chain(std::iter::once(Permutation::identity(c.degree)))
        .collect();
    is_transitive(&gens, c.degree)
        .expect("uniform degree by construction")
        .1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(base: u32, digits: &[u32]) -> OdometerPoint {
        OdometerPoint::new(base, digits.to_vec()).unwrap()
    }

    #[test]
    fn binary_increment() {
        assert_eq!(odometer_step(&pt(2, &[1, 1, 0])), pt(2, &[0, 0, 1]));
        assert_eq!(odometer_step(&pt(3, &[2, 2])), pt(3, &[0, 0, 1]));
        assert_eq!(odometer_step(&OdometerPoint::zero(2)), pt(2, &[1]));
    }

    #[test]
    fn step_back_inverts_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let base = rng.gen_range(2..=4);
            let len = rng.gen_range(0..6);
            let digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..base)).collect();
            let x = OdometerPoint::new(base, digits).unwrap();
            let y = odometer_step(&x);
            assert_eq!(odometer_step_back(&y).unwrap(), x);
        }
        assert!(odometer_step_back(&OdometerPoint::zero(2)).is_none());
    }

    #[test]
    fn each_cylinder_visited_once_per_cycle() {
        // brute force for n ≤ 3, L ≤ 6, from random starts
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(n, l) in &[(2u32, 6usize), (3, 4)] {
            let len = rng.gen_range(0..4);
            let digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            let mut x = OdometerPoint::new(n, digits).unwrap();
            let period = (n as u64).pow(l as u32);
            let mut seen = std::collections::HashSet::new();
            for _ in 0..period {
                let prefix: Vec<u32> = (1..=l).map(|k| x.digit(k)).collect();
                assert!(seen.insert(prefix), "cylinder revisited within one period");
                x = odometer_step(&x);
            }
            assert_eq!(seen.len(), period as usize);
        }
    }

    #[test]
    fn skew_step_basic() {
        let psi = MonodromyRep::new(
            2,
            BTreeMap::from([(1, Permutation::parse_cycles("(1 2)", 2).unwrap())]),
        )
        .unwrap();
        let c = SkewCocycle::new(2, 2, psi).unwrap();
        let s = SkewState { point: pt(2, &[1, 0]), fiber: 1 };
        let next = skew_step(&s, &c);
        assert_eq!(next.point, pt(2, &[0, 1]));
        assert_eq!(next.fiber, 2);
    }

    #[test]
    fn four_step_orbit_matches_hand_iteration() {
        // ψ(ℓ₁)=(1 2), ψ(ℓ₂)=id, start ((1),1):
        // (1),1 → k=1, fiber→2, point (0,1)
        // (0,1),2 → k=2, id, point (1,1)
        // (1,1),2 → k=1, fiber→1, point (0,0,1)
        // (0,0,1),1 → k=3, id, point (1,0,1)
        let psi = MonodromyRep::new(
            2,
            BTreeMap::from([(1, Permutation::parse_cycles("(1 2)", 2).unwrap())]),
        )
        .unwrap();
        let c = SkewCocycle::new(2, 2, psi).unwrap();
        let mut s = SkewState { point: pt(2, &[1]), fiber: 1 };
        let mut fibers = vec![s.fiber];
        for _ in 0..4 {
            s = skew_step(&s, &c);
            fibers.push(s.fiber);
        }
        assert_eq!(fibers, vec![1, 2, 2, 1, 1]);
        assert_eq!(s.point, pt(2, &[1, 0, 1]));
    }

    #[test]
    fn identity_cocycle_freezes_fiber() {
        let psi = MonodromyRep::new(2, BTreeMap::new()).unwrap();
        let c = SkewCocycle::new(2, 2, psi).unwrap();
        let mut s = SkewState { point: OdometerPoint::zero(2), fiber: 1 };
        for _ in 0..100 {
            s = skew_step(&s, &c);
            assert_eq!(s.fiber, 1);
        }
    }

    #[test]
    fn skew_projects_to_odometer() {
        let psi = MonodromyRep::new(
            3,
            BTreeMap::from([(2, Permutation::parse_cycles("(1 2 3)", 3).unwrap())]),
        )
        .unwrap();
        let c = SkewCocycle::new(2, 3, psi).unwrap();
        let mut s = SkewState { point: OdometerPoint::zero(2), fiber: 2 };
        let mut x = OdometerPoint::zero(2);
        for _ in 0..200 {
            s = skew_step(&s, &c);
            x = odometer_step(&x);
            assert_eq!(s.point, x);
        }
    }

    #[test]
    fn statistics_pure_odometer_exact() {
        let psi = MonodromyRep::new(1, BTreeMap::new()).unwrap();
        let c = SkewCocycle::new(2, 1, psi).unwrap();
        let s0 = SkewState { point: OdometerPoint::zero(2), fiber: 1 };
        let stats = orbit_statistics(&c, &s0, 8, 3).unwrap();
        assert_eq!(stats.max_deviation, 0.0);
        assert!(stats.counts.values().all(|&c| c == 1));
    }

    #[test]
    fn statistics_respect_invariant_fiber() {
        let psi = MonodromyRep::new(2, BTreeMap::new()).unwrap();
        let c = SkewCocycle::new(2, 2, psi).unwrap();
        let s0 = SkewState { point: OdometerPoint::zero(2), fiber: 1 };
        let stats = orbit_statistics(&c, &s0, 1000, 2).unwrap();
        for (cell, count) in &stats.counts {
            if cell.ends_with("|2") {
                assert_eq!(*count, 0);
            }
        }
    }

    #[test]
    fn statistics_never_leave_orbit_block() {
        // ψ images generate ⟨(1 2),(3 4)⟩: blocks {1,2},{3,4}
        let psi = MonodromyRep::new(
            4,
            BTreeMap::from([
                (1, Permutation::parse_cycles("(1 2)", 4).unwrap()),
                (2, Permutation::parse_cycles("(3 4)", 4).unwrap()),
            ]),
        )
        .unwrap();
        let c = SkewCocycle::new(2, 4, psi).unwrap();
        let blocks = fiber_invariant_sets(&c);
        assert_eq!(blocks, vec![vec![1, 2], vec![3, 4]]);
        let s0 = SkewState { point: OdometerPoint::zero(2), fiber: 3 };
        let stats = orbit_statistics(&c, &s0, 5000, 2).unwrap();
        for (cell, count) in &stats.counts {
            let fiber: usize = cell.rsplit('|').next().unwrap().parse().unwrap();
            if *count > 0 {
                assert!(blocks[1].contains(&fiber), "left the invariant block");
            }
        }
    }

    #[test]
    fn fiber_partition_examples() {
        let id3 = MonodromyRep::new(3, BTreeMap::new()).unwrap();
        let c = SkewCocycle::new(2, 3, id3).unwrap();
        assert_eq!(fiber_invariant_sets(&c), vec![vec![1], vec![2], vec![3]]);

        let psi = MonodromyRep::new(
            2,
            BTreeMap::from([(1, Permutation::parse_cycles("(1 2)", 2).unwrap())]),
        )
        .unwrap();
        let c = SkewCocycle::new(2, 2, psi).unwrap();
        assert_eq!(fiber_invariant_sets(&c), vec![vec![1, 2]]);
    }
}
