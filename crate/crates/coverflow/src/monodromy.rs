//! Monodromy data for finite covers: subgroup generation, transitivity,
//! cover isomorphism, and product-measure sampling.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// A subgroup of the symmetric group on `{1..d}`, given by generators.
#[derive(Clone, Debug)]
pub struct SubgroupSpec {
    pub degree: usize,
    pub generators: Vec<Permutation>,
}

impl SubgroupSpec {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: g.degree(),
                });
            }
        }
        Ok(SubgroupSpec { degree, generators })
    }

    /// Elements of the generated subgroup, sorted for determinism.
    pub fn elements(&self) -> Vec<Permutation> {
        let mut gens = self.generators.clone();
        if gens.is_empty() {
            gens.push(Permutation::identity(self.degree));
        }
        generated_subgroup(&gens).expect("degrees validated at construction")
    }
}

/// Closure of a generating set under composition and inverse. Sorted output.
pub fn generated_subgroup(gens: &[Permutation]) -> Result<Vec<Permutation>> {
    if gens.is_empty() {
        return Err(Error::Invalid("empty generating set".into()));
    }
    let d = gens[0].degree();
    for g in gens {
        if g.degree() != d {
            return Err(Error::DegreeMismatch {
                expected: d,
                got: g.degree(),
            });
        }
    }
    let mut seen: BTreeSet<Permutation> = BTreeSet::new();
    seen.insert(Permutation::identity(d));
    let mut frontier: Vec<Permutation> = vec![Permutation::identity(d)];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = g.compose(&p)?;
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    // closure under the generators from the identity already contains inverses
    // (finite group), but keep the invariant explicit
    debug_assert!(seen.iter().all(|p| seen.contains(&p.inverse())));
    Ok(seen.into_iter().collect())
}

/// Orbit partition of `{1..d}` under the group generated by `gens`.
/// Returns `(transitive, orbits)` with orbits sorted by smallest element.
pub fn is_transitive(gens: &[Permutation], d: usize) -> Result<(bool, Vec<Vec<usize>>)> {
    for g in gens {
        if g.degree() != d {
            return Err(Error::DegreeMismatch {
                expected: d,
                got: g.degree(),
            });
        }
    }
    let mut orbit_of = vec![usize::MAX; d + 1];
    let mut orbits = Vec::new();
    for start in 1..=d {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let idx = orbits.len();
        let mut orbit = vec![start];
        orbit_of[start] = idx;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for g in gens {
                for j in [g.apply(i), g.inverse().apply(i)] {
                    if orbit_of[j] == usize::MAX {
                        orbit_of[j] = idx;
                        orbit.push(j);
                        stack.push(j);
                    }
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    Ok((orbits.len() == 1, orbits))
}

/// A finitely supported assignment of fundamental-group generators to
/// permutations. Unlisted indices map to the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyRep {
    pub degree: usize,
    pub assignments: BTreeMap<i64, Permutation>,
}

impl MonodromyRep {
    pub fn new(degree: usize, assignments: BTreeMap<i64, Permutation>) -> Result<Self> {
        for p in assignments.values() {
            if p.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: p.degree(),
                });
            }
        }
        Ok(MonodromyRep {
            degree,
            assignments,
        })
    }

    pub fn image(&self, index: i64) -> Permutation {
        self.assignments
            .get(&index)
            .cloned()
            .unwrap_or_else(|| Permutation::identity(self.degree))
    }

    pub fn support(&self) -> Vec<i64> {
        self.assignments
            .iter()
            .filter(|(_, p)| !p.is_identity())
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let assignments: BTreeMap<String, String> = self
            .assignments
            .iter()
            .map(|(i, p)| (i.to_string(), p.to_string()))
            .collect();
        json!({ "d": self.degree, "assignments": assignments })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing field \"d\"".into()))? as usize;
        let mut assignments = BTreeMap::new();
        if let Some(map) = v.get("assignments") {
            let obj = map
                .as_object()
                .ok_or_else(|| Error::Parse("\"assignments\" must be an object".into()))?;
            for (key, val) in obj {
                let idx: i64 = key
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad generator index {key:?}")))?;
                let s = val
                    .as_str()
                    .ok_or_else(|| Error::Parse("assignment value must be a string".into()))?;
                assignments.insert(idx, Permutation::parse_cycles(s, d)?);
            }
        }
        MonodromyRep::new(d, assignments)
    }
}

/// Draws a monodromy representation from the product measure: each supported
/// index gets an independent uniform element of the subgroup generated by `G`.
pub fn sample_monodromy<R: Rng>(
    g_spec: &SubgroupSpec,
    support: &[i64],
    rng: &mut R,
) -> MonodromyRep {
    let elements = g_spec.elements();
    let mut assignments = BTreeMap::new();
    for &idx in support {
        let pick = elements[rng.gen_range(0..elements.len())].clone();
        assignments.insert(idx, pick);
    }
    MonodromyRep {
        degree: g_spec.degree,
        assignments,
    }
}

/// Two representations give isomorphic covers iff they differ by conjugation
/// by a single element of the full symmetric group.
pub fn covers_isomorphic(h1: &MonodromyRep, h2: &MonodromyRep) -> Result<bool> {
    if h1.degree != h2.degree {
        return Err(Error::DegreeMismatch {
            expected: h1.degree,
            got: h2.degree,
        });
    }
    let mut indices: BTreeSet<i64> = h1.assignments.keys().copied().collect();
    indices.extend(h2.assignments.keys().copied());
    // off-support both sides are the identity, which every conjugation fixes
    for sigma in Permutation::all(h1.degree) {
        let sigma_inv = sigma.inverse();
        let ok = indices.iter().all(|&i| {
            let conj = sigma
                .compose(&h1.image(i))
                .and_then(|p| p.compose(&sigma_inv))
                .expect("degrees equal");
            conj == h2.image(i)
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All subgroups of the group generated by `spec`, as sorted element lists.
/// Found by repeatedly extending known subgroups by one element and closing.
pub fn all_subgroups(spec: &SubgroupSpec) -> Vec<Vec<Permutation>> {
    let elements = spec.elements();
    let trivial = vec![Permutation::identity(spec.degree)];
    let mut known: BTreeSet<Vec<Permutation>> = BTreeSet::new();
    known.insert(trivial.clone());
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        for g in &elements {
            if h.contains(g) {
                continue;
            }
            let mut gens = h.clone();
            gens.push(g.clone());
            let closed = generated_subgroup(&gens).expect("uniform degree");
            if known.insert(closed.clone()) {
                frontier.push(closed);
            }
        }
    }
    known.into_iter().collect()
}

/// Maximal non-transitive subgroups of the group generated by `spec`:
/// non-transitive subgroups not strictly contained in a larger one.
pub fn maximal_nontransitive_subgroups(spec: &SubgroupSpec) -> Vec<Vec<Permutation>> {
    let subs = all_subgroups(spec);
    let nontrans: Vec<Vec<Permutation>> = subs
        .into_iter()
        .filter(|h| !is_transitive(h, spec.degree).expect("uniform degree").0)
        .collect();
    nontrans
        .iter()
        .filter(|h| {
            !nontrans.iter().any(|other| {
                other.len() > h.len() && h.iter().all(|p| other.contains(p))
            })
        })
        .cloned()
        .collect()
}

#[derive(Clone, Debug)]
pub struct DisconnectionReport {
    /// Exact probability that k uniform elements generate a non-transitive
    /// subgroup; None when the enumeration cap was exceeded.
    pub exact: Option<BigRational>,
    /// Upper bound Σ_H (|H|/|G|)^k over maximal non-transitive subgroups H.
    pub bound: BigRational,
    pub cap_exceeded: bool,
}

/// Probability that a random degree-d cover with k independent uniform
/// generator images in G is disconnected, with the union-bound estimate.
pub fn disconnected_probability(
    spec: &SubgroupSpec,
    k: u32,
    cap: u128,
) -> Result<DisconnectionReport> {
    let elements = spec.elements();
    let g_order = elements.len() as u128;
    let total = g_order.checked_pow(k).ok_or(Error::CapExceeded {
        size: u128::MAX,
        cap,
    })?;

    let bound = {
        let g_big = BigUint::from(elements.len());
        let mut acc = BigRational::zero();
        for h in maximal_nontransitive_subgroups(spec) {
            let ratio = BigRational::new(
                BigUint::from(h.len()).pow(k).into(),
                g_big.clone().pow(k).into(),
            );
            acc += ratio;
        }
        acc
    };

    if total > cap {
        return Ok(DisconnectionReport {
            exact: None,
            bound,
            cap_exceeded: true,
        });
    }

    // enumerate all |G|^k tuples by odometer counting over element indices
    let mut bad: u128 = 0;
    let mut tuple = vec![0usize; k as usize];
    loop {
        let gens: Vec<Permutation> = tuple.iter().map(|&i| elements[i].clone()).collect();
        let transitive = if gens.is_empty() {
            spec.degree == 1
        } else {
            is_transitive(&gens, spec.degree)?.0
        };
        if !transitive {
            bad += 1;
        }
        let mut pos = 0;
        loop {
            if pos == tuple.len() {
                break;
            }
            tuple[pos] += 1;
            if tuple[pos] < elements.len() {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
        if pos == tuple.len() {
            break;
        }
    }

    let exact = BigRational::new(BigUint::from(bad).into(), BigUint::from(total).into());
    Ok(DisconnectionReport {
        exact: Some(exact),
        bound,
        cap_exceeded: false,
    })
}

/// Parses a group description: "Sd" (full symmetric group), "Zd" (cyclic
/// generated by the d-cycle), or semicolon-separated cycle strings.
pub fn parse_group(s: &str, d: usize) -> Result<SubgroupSpec> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('S').or_else(|| s.strip_prefix('s')) {
        if let Ok(n) = rest.parse::<usize>() {
            if n != d {
                return Err(Error::Invalid(format!(
                    "group degree {n} does not match --d {d}"
                )));
            }
            let mut gens = vec![];
            if d >= 2 {
                gens.push(Permutation::parse_cycles("(1 2)", d)?);
            }
            if d >= 3 {
                let cyc: Vec<String> = (1..=d).map(|i| i.to_string()).collect();
                gens.push(Permutation::parse_cycles(&format!("({})", cyc.join(" ")), d)?);
            }
            if gens.is_empty() {
                gens.push(Permutation::identity(d));
            }
            return SubgroupSpec::new(d, gens);
        }
    }
    if let Some(rest) = s.strip_prefix('Z').or_else(|| s.strip_prefix('z')) {
        if let Ok(n) = rest.parse::<usize>() {
            if n != d {
                return Err(Error::Invalid(format!(
                    "group degree {n} does not match --d {d}"
                )));
            }
            let gen = if d >= 2 {
                let cyc: Vec<String> = (1..=d).map(|i| i.to_string()).collect();
                Permutation::parse_cycles(&format!("({})", cyc.join(" ")), d)?
            } else {
                Permutation::identity(d)
            };
            return SubgroupSpec::new(d, vec![gen]);
        }
    }
    let gens: Vec<Permutation> = s
        .split(';')
        .map(|part| Permutation::parse_cycles(part.trim(), d))
        .collect::<Result<_>>()?;
    SubgroupSpec::new(d, gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, d: usize) -> Permutation {
        Permutation::parse_cycles(s, d).unwrap()
    }

    #[test]
    fn closure_sizes() {
        assert_eq!(generated_subgroup(&[Permutation::identity(3)]).unwrap().len(), 1);
        assert_eq!(generated_subgroup(&[p("(1 2)", 2)]).unwrap().len(), 2);
        assert_eq!(generated_subgroup(&[p("(1 2 3)", 3)]).unwrap().len(), 3);
        assert_eq!(
            generated_subgroup(&[p("(1 2)", 3), p("(1 2 3)", 3)]).unwrap().len(),
            6
        );
    }

    #[test]
    fn transitivity_and_orbits() {
        let (t, orbits) = is_transitive(&[p("(1 2)", 2)], 2).unwrap();
        assert!(t);
        assert_eq!(orbits, vec![vec![1, 2]]);
        let (t, orbits) = is_transitive(&[Permutation::identity(2)], 2).unwrap();
        assert!(!t);
        assert_eq!(orbits, vec![vec![1], vec![2]]);
        let (t, orbits) = is_transitive(&[p("(1 2)", 4), p("(3 4)", 4)], 4).unwrap();
        assert!(!t);
        assert_eq!(orbits, vec![vec![1, 2], vec![3, 4]]);
    }

    // independent union-find oracle for the orbit partition
    fn union_find_transitive(gens: &[Permutation], d: usize) -> bool {
        let mut parent: Vec<usize> = (0..=d).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for g in gens {
            for i in 1..=d {
                let (a, b) = (find(&mut parent, i), find(&mut parent, g.apply(i)));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 1);
        (1..=d).all(|i| find(&mut parent, i) == root)
    }

    #[test]
    fn transitivity_matches_union_find_on_random_gens() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let d = rng.gen_range(2..=6);
            let all = Permutation::all(d);
            let gens: Vec<Permutation> = (0..rng.gen_range(1..=3))
                .map(|_| all[rng.gen_range(0..all.len())].clone())
                .collect();
            let (t, _) = is_transitive(&gens, d).unwrap();
            assert_eq!(t, union_find_transitive(&gens, d));
        }
    }

    #[test]
    fn sampling_is_seed_reproducible_and_roughly_uniform() {
        let g = SubgroupSpec::new(2, vec![p("(1 2)", 2)]).unwrap();
        let a = sample_monodromy(&g, &[1, 2, 3], &mut ChaCha8Rng::seed_from_u64(7));
        let b = sample_monodromy(&g, &[1, 2, 3], &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);

        // each of the 8 assignments for support size 3 should appear ~1/8
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = BTreeMap::new();
        let n = 20_000;
        for _ in 0..n {
            let rep = sample_monodromy(&g, &[1, 2, 3], &mut rng);
            let key: Vec<bool> = [1, 2, 3].iter().map(|&i| rep.image(i).is_identity()).collect();
            *counts.entry(key).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 8);
        // 3σ band around n/8 with σ = sqrt(n·p·(1−p))
        let sigma = ((n as f64) * 0.125 * 0.875).sqrt();
        for (_, c) in counts {
            assert!((c as f64 - n as f64 / 8.0).abs() < 3.5 * sigma);
        }
    }

    #[test]
    fn isomorphism_by_conjugation() {
        let h1 = MonodromyRep::new(3, BTreeMap::from([(1, p("(1 2)", 3))])).unwrap();
        let h2 = MonodromyRep::new(3, BTreeMap::from([(1, p("(2 3)", 3))])).unwrap();
        assert!(covers_isomorphic(&h1, &h2).unwrap());
        let h3 = MonodromyRep::new(3, BTreeMap::from([(1, p("(1 2 3)", 3))])).unwrap();
        assert!(!covers_isomorphic(&h1, &h3).unwrap());
        assert!(covers_isomorphic(&h1, &h1).unwrap());
    }

    #[test]
    fn isomorphism_is_equivalence_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = SubgroupSpec::new(3, vec![p("(1 2)", 3), p("(1 2 3)", 3)]).unwrap();
        for _ in 0..30 {
            let reps: Vec<MonodromyRep> = (0..3)
                .map(|_| sample_monodromy(&g, &[1, 2], &mut rng))
                .collect();
            for r in &reps {
                assert!(covers_isomorphic(r, r).unwrap());
            }
            for a in &reps {
                for b in &reps {
                    assert_eq!(
                        covers_isomorphic(a, b).unwrap(),
                        covers_isomorphic(b, a).unwrap()
                    );
                }
            }
            if covers_isomorphic(&reps[0], &reps[1]).unwrap()
                && covers_isomorphic(&reps[1], &reps[2]).unwrap()
            {
                assert!(covers_isomorphic(&reps[0], &reps[2]).unwrap());
            }
        }
    }

    #[test]
    fn degree_two_isomorphism_is_equality() {
        // Π₂ is abelian, so conjugation is trivial
        let h1 = MonodromyRep::new(2, BTreeMap::from([(1, p("(1 2)", 2))])).unwrap();
        let h2 = MonodromyRep::new(2, BTreeMap::new()).unwrap();
        assert!(!covers_isomorphic(&h1, &h2).unwrap());
    }

    #[test]
    fn subgroup_enumeration_s3() {
        let s3 = SubgroupSpec::new(3, vec![p("(1 2)", 3), p("(1 2 3)", 3)]).unwrap();
        // S3 has 6 subgroups: 1, three ⟨transposition⟩, A3, S3
        assert_eq!(all_subgroups(&s3).len(), 6);
        let maxi = maximal_nontransitive_subgroups(&s3);
        // the maximal non-transitive subgroups are the three ⟨(i j)⟩
        assert_eq!(maxi.len(), 3);
        assert!(maxi.iter().all(|h| h.len() == 2));
    }

    #[test]
    fn disconnection_probability_z2_k3() {
        let z2 = SubgroupSpec::new(2, vec![p("(1 2)", 2)]).unwrap();
        let rep = disconnected_probability(&z2, 3, 1 << 20).unwrap();
        let exact = rep.exact.unwrap();
        assert_eq!(exact, BigRational::new(1.into(), 8.into()));
        assert_eq!(rep.bound, BigRational::new(1.into(), 8.into()));
    }

    #[test]
    fn disconnection_probability_c3_k2() {
        let c3 = SubgroupSpec::new(3, vec![p("(1 2 3)", 3)]).unwrap();
        let rep = disconnected_probability(&c3, 2, 1 << 20).unwrap();
        assert_eq!(rep.exact.unwrap(), BigRational::new(1.into(), 9.into()));
    }

    #[test]
    fn exact_value_at_most_bound_and_decreasing_in_k() {
        let s3 = SubgroupSpec::new(3, vec![p("(1 2)", 3), p("(1 2 3)", 3)]).unwrap();
        let mut prev: Option<f64> = None;
        for k in 1..=4 {
            let rep = disconnected_probability(&s3, k, 1 << 22).unwrap();
            let exact = rep.exact.unwrap();
            assert!(exact <= rep.bound);
            let val = exact.to_f64().unwrap();
            if let Some(p) = prev {
                assert!(val <= p);
            }
            prev = Some(val);
        }
    }

    #[test]
    fn cap_exceeded_returns_bound_only() {
        let s3 = SubgroupSpec::new(3, vec![p("(1 2)", 3), p("(1 2 3)", 3)]).unwrap();
        let rep = disconnected_probability(&s3, 10, 100).unwrap();
        assert!(rep.cap_exceeded);
        assert!(rep.exact.is_none());
    }

    #[test]
    fn rep_json_round_trip() {
        let rep = MonodromyRep::new(
            3,
            BTreeMap::from([(1, p("(1 2)", 3)), (-3, Permutation::identity(3))]),
        )
        .unwrap();
        let v = rep.to_json();
        let back = MonodromyRep::from_json(&v).unwrap();
        assert_eq!(rep, back);
    }

    #[test]
    fn parse_group_aliases() {
        let z2 = parse_group("Z2", 2).unwrap();
        assert_eq!(z2.elements().len(), 2);
        let s3 = parse_group("S3", 3).unwrap();
        assert_eq!(s3.elements().len(), 6);
        let custom = parse_group("(1 2); (3 4)", 4).unwrap();
        assert_eq!(custom.elements().len(), 4);
        assert!(parse_group("S3", 4).is_err());
    }
}
