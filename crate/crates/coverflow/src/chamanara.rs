//! G-sequence calculus for covers of Chamanara's surface: the affine
//! automorphism's action on generators, devious-cover construction and
//! detection, p-ready sequences, and the bridge to odometer skew products.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::monodromy::{generated_subgroup, is_transitive, MonodromyRep, SubgroupSpec};
use crate::odometer::SkewCocycle;
use crate::perm::Permutation;

/// A reduced word in the free group on generators γ_n, n ∈ Z.
/// Letters are (index, exponent ±1).
pub type Word = Vec<(i64, i8)>;

pub fn reduce(mut w: Word) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for letter in w.drain(..) {
        match out.last() {
            Some(&(n, e)) if n == letter.0 && e == -letter.1 => {
                out.pop();
            }
            _ => out.push(letter),
        }
    }
    out
}

pub fn invert_word(w: &Word) -> Word {
    w.iter().rev().map(|&(n, e)| (n, -e)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// φ_δ⁻¹
    Inverse,
    /// φ_δ
    Forward,
}

/// The substitution replacing γ_n under one application of the automorphism.
pub fn phi_generator_action(direction: Direction, n: i64) -> Word {
    match direction {
        Direction::Inverse => {
            if n < 0 {
                vec![(n + 1, 1), (1, -1)]
            } else if n == 0 {
                vec![(1, 1)]
            } else {
                vec![(1, 1), (n + 1, 1)]
            }
        }
        Direction::Forward => {
            if n <= 0 {
                vec![(n - 1, 1), (0, 1)]
            } else if n == 1 {
                vec![(0, 1)]
            } else {
                vec![(0, -1), (n - 1, 1)]
            }
        }
    }
}

/// Applies the substitution to every letter of a word and reduces.
pub fn apply_phi(direction: Direction, w: &Word) -> Word {
    let mut out = Word::new();
    for &(n, e) in w {
        let sub = phi_generator_action(direction, n);
        let sub = if e == 1 { sub } else { invert_word(&sub) };
        out.extend(sub);
    }
    reduce(out)
}

/// Symbolic tail of a G-sequence beyond the finite window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailRule {
    /// All identity.
    Constant,
    /// Repeats the given nonempty word, phase anchored at the window edge.
    PeriodicWord(Vec<Permutation>),
    /// Periodically lists a fixed enumeration of a subgroup H, period |H|.
    HLister(Vec<Permutation>),
}

impl TailRule {
    fn word(&self, degree: usize) -> Vec<Permutation> {
        match self {
            TailRule::Constant => vec![Permutation::identity(degree)],
            TailRule::PeriodicWord(w) | TailRule::HLister(w) => w.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            TailRule::Constant => json!({ "kind": "constant" }),
            TailRule::PeriodicWord(w) => json!({
                "kind": "periodic",
                "word": w.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            }),
            TailRule::HLister(w) => json!({
                "kind": "hlister",
                "H": w.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            }),
        }
    }

    fn from_json(v: &Value, degree: usize) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("tail missing \"kind\"".into()))?;
        let parse_list = |key: &str| -> Result<Vec<Permutation>> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("tail missing \"{key}\"")))?;
            if arr.is_empty() {
                return Err(Error::Parse("tail word must be nonempty".into()));
            }
            arr.iter()
                .map(|s| {
                    s.as_str()
                        .ok_or_else(|| Error::Parse("tail entry must be a string".into()))
                        .and_then(|s| Permutation::parse_cycles(s, degree))
                })
                .collect()
        };
        match kind {
            "constant" => Ok(TailRule::Constant),
            "periodic" => Ok(TailRule::PeriodicWord(parse_list("word")?)),
            "hlister" => Ok(TailRule::HLister(parse_list("H")?)),
            other => Err(Error::Parse(format!("unknown tail kind {other:?}"))),
        }
    }
}

/// Construction metadata carried by sequences built from a p-word schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PReadyProvenance {
    pub h1: Vec<Permutation>,
    pub h2: Vec<Permutation>,
    /// True when the 0-block lengths are declared to tend to infinity.
    pub declared_divergent: bool,
}

/// A bi-infinite sequence of permutations: finite window plus symbolic tails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSequence {
    pub degree: usize,
    pub window_start: i64,
    pub window: Vec<Permutation>,
    pub left_tail: TailRule,
    pub right_tail: TailRule,
    pub provenance: Option<PReadyProvenance>,
}

impl GSequence {
    pub fn new(
        degree: usize,
        window_start: i64,
        window: Vec<Permutation>,
        left_tail: TailRule,
        right_tail: TailRule,
    ) -> Result<Self> {
        for p in window
            .iter()
            .chain(left_tail.word(degree).iter())
            .chain(right_tail.word(degree).iter())
        {
            if p.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: p.degree(),
                });
            }
        }
        Ok(GSequence {
            degree,
            window_start,
            window,
            left_tail,
            right_tail,
            provenance: None,
        })
    }

    pub fn window_end(&self) -> i64 {
        self.window_start + self.window.len() as i64 - 1
    }

    /// Value g_m.
    pub fn value(&self, m: i64) -> Permutation {
        if m < self.window_start {
            let word = self.left_tail.word(self.degree);
            let offset = (self.window_start - 1 - m) as usize % word.len();
            word[offset].clone()
        } else if m <= self.window_end() {
            self.window[(m - self.window_start) as usize].clone()
        } else {
            let word = self.right_tail.word(self.degree);
            let offset = (m - self.window_end() - 1) as usize % word.len();
            word[offset].clone()
        }
    }

    /// The sequence of h∘φ_δ^{-m} shifted by `m`: value(n) becomes g_{n+m}.
    pub fn shift(&self, m: i64) -> GSequence {
        let mut out = self.clone();
        out.window_start -= m;
        out
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "d": self.degree,
            "window_start": self.window_start,
            "window": self.window.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "left_tail": self.left_tail.to_json(),
            "right_tail": self.right_tail.to_json(),
        });
        if let Some(p) = &self.provenance {
            v["p_ready"] = json!({
                "H1": p.h1.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "H2": p.h2.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "declared_divergent": p.declared_divergent,
            });
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing field \"d\"".into()))? as usize;
        let window_start = v
            .get("window_start")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Parse("missing field \"window_start\"".into()))?;
        let window = v
            .get("window")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing field \"window\"".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .ok_or_else(|| Error::Parse("window entry must be a string".into()))
                    .and_then(|s| Permutation::parse_cycles(s, d))
            })
            .collect::<Result<Vec<_>>>()?;
        let left_tail = TailRule::from_json(
            v.get("left_tail")
                .ok_or_else(|| Error::Parse("missing field \"left_tail\"".into()))?,
            d,
        )?;
        let right_tail = TailRule::from_json(
            v.get("right_tail")
                .ok_or_else(|| Error::Parse("missing field \"right_tail\"".into()))?,
            d,
        )?;
        let mut g = GSequence::new(d, window_start, window, left_tail, right_tail)?;
        if let Some(p) = v.get("p_ready") {
            let parse_list = |key: &str| -> Result<Vec<Permutation>> {
                p.get(key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse(format!("p_ready missing \"{key}\"")))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .ok_or_else(|| Error::Parse("p_ready entry must be a string".into()))
                            .and_then(|s| Permutation::parse_cycles(s, d))
                    })
                    .collect()
            };
            g.provenance = Some(PReadyProvenance {
                h1: parse_list("H1")?,
                h2: parse_list("H2")?,
                declared_divergent: p
                    .get("declared_divergent")
                    .and_then(Value::as_bool)
                    .unwrap_or(false),
            });
        }
        Ok(g)
    }

    /// All distinct permutations appearing in the sequence (window and both
    /// tail words).
    pub fn value_set(&self) -> Vec<Permutation> {
        let mut set: Vec<Permutation> = Vec::new();
        for p in self
            .window
            .iter()
            .chain(self.left_tail.word(self.degree).iter())
            .chain(self.right_tail.word(self.degree).iter())
        {
            if !set.contains(p) {
                set.push(p.clone());
            }
        }
        set.sort();
        set
    }
}

/// The homomorphism value h∘φ_δ^{-k}(γ_n), computed from the closed form in
/// terms of the sequence entries. Products multiply left factor first:
/// `a · b` denotes a.compose(b) throughout.
pub fn eval_cover_hom(g: &GSequence, k: i64, n: i64) -> Permutation {
    let prod = |factors: Vec<Permutation>| {
        factors
            .into_iter()
            .reduce(|acc, p| acc.compose(&p).expect("uniform degree"))
            .unwrap_or_else(|| Permutation::identity(g.degree))
    };
    if n < 0 {
        // g_{k+n-1} · g_{k+n}^{-1} · g_{k+n+1}^{-1} · … · g_{k-1}^{-1}
        let mut factors = vec![g.value(k + n - 1)];
        for m in (k + n)..=(k - 1) {
            factors.push(g.value(m).inverse());
        }
        prod(factors)
    } else if n == 0 {
        g.value(k - 1)
    } else if n == 1 {
        g.value(k)
    } else {
        // g_k^{-1} · g_{k+1}^{-1} · … · g_{k+n-2}^{-1} · g_{k+n-1}
        let mut factors: Vec<Permutation> =
            (k..=(k + n - 2)).map(|m| g.value(m).inverse()).collect();
        factors.push(g.value(k + n - 1));
        prod(factors)
    }
}

#[derive(Clone, Debug)]
pub struct DeviousReport {
    /// First index from which every entry lies in H.
    pub tail_start: i64,
    /// The smallest subgroup containing all right-tail values (sorted).
    pub subgroup: Vec<Permutation>,
    /// Whether the full sequence generates a transitive group.
    pub connected: bool,
}

/// Detects a devious tail: all right-tail values confined to a non-transitive
/// subgroup. Returns the smallest such subgroup (the one they generate) and
/// the first index from which the sequence stays inside it.
pub fn is_devious(g: &GSequence) -> Option<DeviousReport> {
    let tail_values = g.right_tail.word(g.degree);
    let h = generated_subgroup(&tail_values).expect("uniform degree");
    let (h_transitive, _) = is_transitive(&h, g.degree).expect("uniform degree");
    if h_transitive {
        return None;
    }
    // scan the window backwards for the first index from which entries stay in H
    let mut tail_start = g.window_end() + 1;
    for m in (g.window_start..=g.window_end()).rev() {
        if h.contains(&g.value(m)) {
            tail_start = m;
        } else {
            break;
        }
    }
    let full = g.value_set();
    let full_group = generated_subgroup(&full).expect("uniform degree");
    let (connected, _) = is_transitive(&full_group, g.degree).expect("uniform degree");
    Some(DeviousReport {
        tail_start,
        subgroup: h,
        connected,
    })
}

/// Builds a sequence whose right tail periodically lists all of H (a
/// non-transitive subgroup), preceded by the given window prefix.
pub fn build_devious(
    g_spec: &SubgroupSpec,
    h_spec: &SubgroupSpec,
    prefix: &[Permutation],
    seed: u64,
) -> Result<GSequence> {
    let g_elems = g_spec.elements();
    let h_elems = h_spec.elements();
    if h_spec.degree != g_spec.degree {
        return Err(Error::DegreeMismatch {
            expected: g_spec.degree,
            got: h_spec.degree,
        });
    }
    for p in &h_elems {
        if !g_elems.contains(p) {
            return Err(Error::Invalid(format!("H element {p} not in ⟨G⟩")));
        }
    }
    let (h_transitive, _) = is_transitive(&h_elems, g_spec.degree)?;
    if h_transitive {
        return Err(Error::Infeasible(
            "H is transitive; its tail cannot make the limit covers disconnected".into(),
        ));
    }
    for p in prefix {
        if p.degree() != g_spec.degree {
            return Err(Error::DegreeMismatch {
                expected: g_spec.degree,
                got: p.degree(),
            });
        }
    }
    // the seed fixes which rotation of the sorted enumeration the tail uses
    let rot = (seed as usize) % h_elems.len();
    let mut enumeration = h_elems;
    enumeration.rotate_left(rot);
    GSequence::new(
        g_spec.degree,
        0,
        prefix.to_vec(),
        TailRule::Constant,
        TailRule::HLister(enumeration),
    )
}

/// A word over {0,1,2} scheduling which subgroup each block of a p-ready
/// sequence must generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PWord {
    pub start: i64,
    pub symbols: Vec<u8>,
}

impl PWord {
    pub fn new(start: i64, symbols: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| s > 2) {
            return Err(Error::Invalid(format!("p-word symbol {bad} not in {{0,1,2}}")));
        }
        for w in symbols.windows(2) {
            if w[0] + w[1] == 3 {
                return Err(Error::Invalid(
                    "adjacent 1 and 2 blocks: p(n)+p(n+1)=3 is forbidden".into(),
                ));
            }
        }
        Ok(PWord { start, symbols })
    }
}

/// The alternating schedule 1^{L1} 0^{ℓ1} 2^{L2} 0^{ℓ2} 1^{L1} …, closed by
/// one final alternating block after the last 0-run.
pub fn build_p_word(l1: usize, l2: usize, ells: &[usize]) -> Result<PWord> {
    if l1 < 1 || l2 < 1 {
        return Err(Error::Invalid("block lengths L1, L2 must be ≥ 1".into()));
    }
    if let Some(pos) = ells.iter().position(|&e| e == 0) {
        return Err(Error::Invalid(format!(
            "zero-length separator ℓ_{} would put a 1-block next to a 2-block",
            pos + 1
        )));
    }
    let mut symbols = Vec::new();
    let block = |i: usize| -> (u8, usize) {
        if i % 2 == 0 {
            (1, l1)
        } else {
            (2, l2)
        }
    };
    for (i, &ell) in ells.iter().enumerate() {
        let (sym, len) = block(i);
        symbols.extend(std::iter::repeat(sym).take(len));
        symbols.extend(std::iter::repeat(0).take(ell));
    }
    let (sym, len) = block(ells.len());
    symbols.extend(std::iter::repeat(sym).take(len));
    PWord::new(0, symbols)
}

/// Smallest generating subset of the subgroup with the given sorted element
/// list, searched in deterministic order by subset size.
fn minimal_generating_set(elements: &[Permutation], degree: usize) -> Vec<Permutation> {
    if elements.len() == 1 {
        return vec![Permutation::identity(degree)];
    }
    use itertools::Itertools;
    let candidates: Vec<Permutation> = elements
        .iter()
        .filter(|p| !p.is_identity())
        .cloned()
        .collect();
    for size in 1..=candidates.len() {
        for gens in candidates.iter().cloned().combinations(size) {
            let closed = generated_subgroup(&gens).expect("uniform degree");
            if closed.len() == elements.len() {
                return gens;
            }
        }
    }
    elements.to_vec()
}

/// Fills a p-word schedule with permutations: 0-blocks get the identity
/// (always in H₁∩H₂), i-blocks list a minimal generating set of H_i padded
/// with identities. Verifies both p-ready clauses before returning.
pub fn build_p_ready(
    p: &PWord,
    h1_spec: &SubgroupSpec,
    h2_spec: &SubgroupSpec,
    g_spec: &SubgroupSpec,
    declared_divergent: bool,
) -> Result<GSequence> {
    let d = g_spec.degree;
    if h1_spec.degree != d || h2_spec.degree != d {
        return Err(Error::DegreeMismatch {
            expected: d,
            got: h1_spec.degree.min(h2_spec.degree),
        });
    }
    let h1 = h1_spec.elements();
    let h2 = h2_spec.elements();
    let g_elems = g_spec.elements();
    for q in h1.iter().chain(h2.iter()) {
        if !g_elems.contains(q) {
            return Err(Error::Invalid(format!("subgroup element {q} not in ⟨G⟩")));
        }
    }
    let gens = [minimal_generating_set(&h1, d), minimal_generating_set(&h2, d)];

    let mut window = Vec::with_capacity(p.symbols.len());
    let mut i = 0usize;
    while i < p.symbols.len() {
        let sym = p.symbols[i];
        let mut j = i;
        while j < p.symbols.len() && p.symbols[j] == sym {
            j += 1;
        }
        let block_len = j - i;
        if sym == 0 {
            window.extend(std::iter::repeat(Permutation::identity(d)).take(block_len));
        } else {
            let needed = &gens[(sym - 1) as usize];
            if block_len < needed.len() {
                return Err(Error::Infeasible(format!(
                    "{sym}-block at offset {i} has length {block_len}, but H{sym} needs {} generators",
                    needed.len()
                )));
            }
            for t in 0..block_len {
                window.push(if t < needed.len() {
                    needed[t].clone()
                } else {
                    Permutation::identity(d)
                });
            }
        }
        i = j;
    }

    let mut g = GSequence::new(d, p.start, window, TailRule::Constant, TailRule::Constant)?;
    g.provenance = Some(PReadyProvenance {
        h1: h1.clone(),
        h2: h2.clone(),
        declared_divergent,
    });
    verify_p_ready(&g, p, &h1, &h2)?;
    Ok(g)
}

/// Independent check of the two p-ready clauses: 0-indices land in H₁∩H₂,
/// and each maximal 1/2-block generates the corresponding subgroup.
pub fn verify_p_ready(
    g: &GSequence,
    p: &PWord,
    h1: &[Permutation],
    h2: &[Permutation],
) -> Result<()> {
    if g.window.len() != p.symbols.len() || g.window_start != p.start {
        return Err(Error::Invalid("p-word and sequence windows disagree".into()));
    }
    let groups = [h1, h2];
    let mut i = 0usize;
    while i < p.symbols.len() {
        let sym = p.symbols[i];
        let mut j = i;
        while j < p.symbols.len() && p.symbols[j] == sym {
            j += 1;
        }
        if sym == 0 {
            for t in i..j {
                let v = &g.window[t];
                if !(h1.contains(v) && h2.contains(v)) {
                    return Err(Error::Invalid(format!(
                        "entry at offset {t} not in H₁ ∩ H₂"
                    )));
                }
            }
        } else {
            let h = groups[(sym - 1) as usize];
            let block: Vec<Permutation> = g.window[i..j].to_vec();
            for v in &block {
                if !h.contains(v) {
                    return Err(Error::Invalid(format!(
                        "{sym}-block at offset {i} has an entry outside H{sym}"
                    )));
                }
            }
            let closed = generated_subgroup(&block)?;
            if closed.len() != h.len() {
                return Err(Error::Invalid(format!(
                    "{sym}-block at offset {i} does not generate H{sym}"
                )));
            }
        }
        i = j;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccumulationClass {
    /// Every accumulation point of the forward shift orbit is a cover with
    /// monodromy confined to one of the listed non-transitive subgroups.
    AllDisconnected(Vec<Vec<Permutation>>),
    HasConnectedLimit,
    Undetermined,
}

/// Classifies the accumulation points of the sequence's forward shifts.
pub fn accumulation_class(g: &GSequence) -> AccumulationClass {
    if let Some(p) = &g.provenance {
        if p.declared_divergent {
            return AccumulationClass::AllDisconnected(vec![p.h1.clone(), p.h2.clone()]);
        }
    }
    match &g.right_tail {
        TailRule::Constant => AccumulationClass::AllDisconnected(vec![vec![
            Permutation::identity(g.degree),
        ]]),
        TailRule::PeriodicWord(w) | TailRule::HLister(w) => {
            let h = generated_subgroup(w).expect("uniform degree");
            let (transitive, _) = is_transitive(&h, g.degree).expect("uniform degree");
            if transitive {
                AccumulationClass::HasConnectedLimit
            } else {
                AccumulationClass::AllDisconnected(vec![h])
            }
        }
    }
}

/// The skew cocycle of the cover h∘φ_δ^{-k}: ψ(ℓ_j) = h∘φ_δ^{-k}(γ_j) for
/// positive j up to the horizon, identity beyond.
pub fn to_skew(g: &GSequence, k: i64, horizon: usize) -> SkewCocycle {
    let mut assignments = BTreeMap::new();
    for j in 1..=horizon as i64 {
        let p = eval_cover_hom(g, k, j);
        if !p.is_identity() {
            assignments.insert(j, p);
        }
    }
    let rep = MonodromyRep::new(g.degree, assignments).expect("uniform degree");
    SkewCocycle::new(2, g.degree, rep).expect("positive indices only")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, d: usize) -> Permutation {
        Permutation::parse_cycles(s, d).unwrap()
    }

    #[test]
    fn substitution_base_cases() {
        assert_eq!(phi_generator_action(Direction::Inverse, 0), vec![(1, 1)]);
        assert_eq!(phi_generator_action(Direction::Forward, 1), vec![(0, 1)]);
        assert_eq!(
            phi_generator_action(Direction::Inverse, -2),
            vec![(-1, 1), (1, -1)]
        );
        assert_eq!(
            phi_generator_action(Direction::Forward, 3),
            vec![(0, -1), (2, 1)]
        );
    }

    #[test]
    fn forward_inverts_inverse() {
        for n in -10..=10 {
            let w = vec![(n, 1i8)];
            let round = apply_phi(Direction::Forward, &apply_phi(Direction::Inverse, &w));
            assert_eq!(round, w, "γ_{n} did not come back");
            let round = apply_phi(Direction::Inverse, &apply_phi(Direction::Forward, &w));
            assert_eq!(round, w);
        }
    }

    #[test]
    fn reduction_cancels() {
        let w = vec![(1, 1), (2, 1), (2, -1), (1, -1), (3, 1)];
        assert_eq!(reduce(w), vec![(3, 1)]);
    }

    /// Oracle: pick a raw homomorphism on generators (free group: any
    /// assignment works), derive the sequence entries by symbolic expansion,
    /// and compare eval_cover_hom against direct expansion of γ_n.
    #[test]
    fn closed_form_matches_symbolic_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..30 {
            let d = if trial % 2 == 0 { 2 } else { 3 };
            let all = Permutation::all(d);
            let mut raw: BTreeMap<i64, Permutation> = BTreeMap::new();
            let h = |raw: &BTreeMap<i64, Permutation>, w: &Word| -> Permutation {
                w.iter().fold(Permutation::identity(d), |acc, &(n, e)| {
                    let img = raw.get(&n).cloned().unwrap_or_else(|| Permutation::identity(d));
                    let img = if e == 1 { img } else { img.inverse() };
                    acc.compose(&img).unwrap()
                })
            };
            for n in -20..=20 {
                raw.insert(n, all[rng.gen_range(0..all.len())].clone());
            }
            // g_m = h(φ_δ^{-m}(γ₁)); negative m uses the forward action
            let value_at = |m: i64| -> Permutation {
                let mut w: Word = vec![(1, 1)];
                let (dir, times) = if m >= 0 {
                    (Direction::Inverse, m)
                } else {
                    (Direction::Forward, -m)
                };
                for _ in 0..times {
                    w = apply_phi(dir, &w);
                }
                h(&raw, &w)
            };
            let window: Vec<Permutation> = (-9..=13).map(value_at).collect();
            let g = GSequence::new(d, -9, window, TailRule::Constant, TailRule::Constant)
                .unwrap();
            for k in 0..=6i64 {
                for n in -6..=6i64 {
                    let mut w: Word = vec![(n, 1)];
                    for _ in 0..k {
                        w = apply_phi(Direction::Inverse, &w);
                    }
                    assert_eq!(
                        eval_cover_hom(&g, k, n),
                        h(&raw, &w),
                        "mismatch at k={k}, n={n}, d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_base_cases() {
        let g = GSequence::new(
            2,
            -3,
            vec![
                p("(1 2)", 2),
                p("()", 2),
                p("(1 2)", 2),
                p("(1 2)", 2),
                p("()", 2),
                p("(1 2)", 2),
                p("()", 2),
            ],
            TailRule::Constant,
            TailRule::Constant,
        )
        .unwrap();
        assert_eq!(eval_cover_hom(&g, 0, 1), g.value(0));
        assert_eq!(eval_cover_hom(&g, 2, 0), g.value(1));
        // k=0, n=3 → g₀⁻¹ g₁⁻¹ g₂
        let expect = g
            .value(0)
            .inverse()
            .compose(&g.value(1).inverse())
            .unwrap()
            .compose(&g.value(2))
            .unwrap();
        assert_eq!(eval_cover_hom(&g, 0, 3), expect);
    }

    #[test]
    fn shift_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let all = Permutation::all(3);
        let window: Vec<Permutation> = (0..9)
            .map(|_| all[rng.gen_range(0..all.len())].clone())
            .collect();
        let g = GSequence::new(
            3,
            -4,
            window,
            TailRule::PeriodicWord(vec![p("(1 2)", 3), p("()", 3)]),
            TailRule::HLister(vec![p("()", 3), p("(1 2 3)", 3), p("(1 3 2)", 3)]),
        )
        .unwrap();
        for _ in 0..100 {
            let k = rng.gen_range(-8..=8i64);
            let n = rng.gen_range(-8..=8i64);
            assert_eq!(
                eval_cover_hom(&g.shift(1), k, n),
                eval_cover_hom(&g, k + 1, n)
            );
        }
        assert_eq!(g.shift(3).shift(-3), g);
        assert_eq!(g.shift(0), g);
        // HLister tail shifted by |H| agrees pointwise
        for m in -20..=20 {
            assert_eq!(g.shift(3).value(m), g.value(m + 3));
        }
    }

    #[test]
    fn devious_detection() {
        // constant-identity tail with a transposition in the window
        let g = GSequence::new(
            2,
            0,
            vec![p("(1 2)", 2)],
            TailRule::Constant,
            TailRule::Constant,
        )
        .unwrap();
        let rep = is_devious(&g).unwrap();
        assert_eq!(rep.subgroup.len(), 1);
        assert!(rep.connected);
        assert_eq!(rep.tail_start, 1);

        // full transitive tail → not devious
        let g = GSequence::new(
            2,
            0,
            vec![],
            TailRule::Constant,
            TailRule::HLister(vec![p("()", 2), p("(1 2)", 2)]),
        )
        .unwrap();
        assert!(is_devious(&g).is_none());

        // periodic tail of transpositions in Π₃ → devious with H = ⟨(1 2)⟩
        let g = GSequence::new(
            3,
            0,
            vec![],
            TailRule::Constant,
            TailRule::PeriodicWord(vec![p("(1 2)", 3), p("(1 2)", 3)]),
        )
        .unwrap();
        let rep = is_devious(&g).unwrap();
        assert_eq!(rep.subgroup.len(), 2);
        assert!(!rep.connected);
    }

    #[test]
    fn build_devious_round_trip() {
        let pi2 = SubgroupSpec::new(2, vec![p("(1 2)", 2)]).unwrap();
        let triv = SubgroupSpec::new(2, vec![]).unwrap();
        let g = build_devious(&pi2, &triv, &[p("(1 2)", 2)], 0).unwrap();
        let rep = is_devious(&g).unwrap();
        assert!(rep.connected);
        assert_eq!(rep.subgroup, vec![Permutation::identity(2)]);
        assert_eq!(rep.tail_start, 1); // end of the prefix window

        let disconnected = build_devious(&pi2, &triv, &[], 0).unwrap();
        assert!(!is_devious(&disconnected).unwrap().connected);

        // transitive H rejected
        assert!(build_devious(&pi2, &pi2, &[], 0).is_err());
    }

    #[test]
    fn p_word_construction() {
        let w = build_p_word(1, 1, &[2, 2]).unwrap();
        assert_eq!(w.symbols, vec![1, 0, 0, 2, 0, 0, 1]);
        assert!(build_p_word(1, 1, &[0]).is_err());
        let w = build_p_word(2, 3, &[1]).unwrap();
        assert_eq!(w.symbols, vec![1, 1, 0, 2, 2, 2]);
        // direct construction with adjacent 1,2 rejected
        assert!(PWord::new(0, vec![1, 2]).is_err());
        assert!(PWord::new(0, vec![1, 0, 2]).is_ok());
    }

    #[test]
    fn p_ready_build_and_verify() {
        let pi4 = SubgroupSpec::new(4, vec![p("(1 2)", 4), p("(1 2 3 4)", 4)]).unwrap();
        let h1 = SubgroupSpec::new(4, vec![p("(1 2)", 4)]).unwrap();
        let h2 = SubgroupSpec::new(4, vec![p("(3 4)", 4)]).unwrap();
        let word = build_p_word(1, 1, &[2, 2]).unwrap();
        let g = build_p_ready(&word, &h1, &h2, &pi4, false).unwrap();
        assert_eq!(g.window[0], p("(1 2)", 4));
        assert_eq!(g.window[3], p("(3 4)", 4));
        assert!(g.window[1].is_identity() && g.window[2].is_identity());
        verify_p_ready(&g, &word, &h1.elements(), &h2.elements()).unwrap();
        // value set generates ⟨H₁ ∪ H₂⟩
        let full = generated_subgroup(&g.value_set()).unwrap();
        assert_eq!(full.len(), 4);

        // block too short to generate a 2-generator subgroup
        let big = SubgroupSpec::new(4, vec![p("(1 2)", 4), p("(3 4)", 4)]).unwrap();
        let short = build_p_word(1, 1, &[1]).unwrap();
        assert!(build_p_ready(&short, &big, &h2, &pi4, false).is_err());
        // long enough works
        let long = build_p_word(2, 1, &[1]).unwrap();
        let g = build_p_ready(&long, &big, &h2, &pi4, false).unwrap();
        verify_p_ready(&g, &long, &big.elements(), &h2.elements()).unwrap();
    }

    #[test]
    fn all_zero_p_word_is_trivially_ready() {
        let pi2 = SubgroupSpec::new(2, vec![p("(1 2)", 2)]).unwrap();
        let triv = SubgroupSpec::new(2, vec![]).unwrap();
        let word = PWord::new(0, vec![0, 0, 0]).unwrap();
        let g = build_p_ready(&word, &triv, &triv, &pi2, false).unwrap();
        assert!(g.window.iter().all(|q| q.is_identity()));
    }

    #[test]
    fn accumulation_classification() {
        let g = GSequence::new(
            2,
            0,
            vec![p("(1 2)", 2)],
            TailRule::Constant,
            TailRule::Constant,
        )
        .unwrap();
        assert_eq!(
            accumulation_class(&g),
            AccumulationClass::AllDisconnected(vec![vec![Permutation::identity(2)]])
        );

        let g = GSequence::new(
            2,
            0,
            vec![],
            TailRule::Constant,
            TailRule::HLister(vec![p("()", 2), p("(1 2)", 2)]),
        )
        .unwrap();
        assert_eq!(accumulation_class(&g), AccumulationClass::HasConnectedLimit);

        let pi4 = SubgroupSpec::new(4, vec![p("(1 2)", 4), p("(1 2 3 4)", 4)]).unwrap();
        let h1 = SubgroupSpec::new(4, vec![p("(1 2)", 4)]).unwrap();
        let h2 = SubgroupSpec::new(4, vec![p("(3 4)", 4)]).unwrap();
        let word = build_p_word(1, 1, &[1, 2, 3]).unwrap();
        let g = build_p_ready(&word, &h1, &h2, &pi4, true).unwrap();
        match accumulation_class(&g) {
            AccumulationClass::AllDisconnected(hs) => {
                assert_eq!(hs.len(), 2);
                assert_eq!(hs[0], h1.elements());
            }
            other => panic!("expected AllDisconnected, got {other:?}"),
        }
    }

    #[test]
    fn skew_bridge() {
        let g = GSequence::new(
            2,
            0,
            vec![p("(1 2)", 2)],
            TailRule::Constant,
            TailRule::Constant,
        )
        .unwrap();
        // ψ(ℓ₁) at k=0 is g₀
        let c = to_skew(&g, 0, 8);
        assert_eq!(c.image(1), g.value(0));
        // beyond the prefix every image collapses into H = {id}
        let c = to_skew(&g, 1, 8);
        for j in 1..=8 {
            assert!(c.image(j).is_identity(), "ψ(ℓ_{j}) should be identity");
        }
        let blocks = crate::odometer::fiber_invariant_sets(&c);
        assert_eq!(blocks, vec![vec![1], vec![2]]);
    }

    #[test]
    fn gsequence_json_round_trip() {
        let mut g = GSequence::new(
            2,
            -1,
            vec![p("(1 2)", 2), p("()", 2)],
            TailRule::Constant,
            TailRule::HLister(vec![p("()", 2), p("(1 2)", 2)]),
        )
        .unwrap();
        let back = GSequence::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        g.provenance = Some(PReadyProvenance {
            h1: vec![Permutation::identity(2)],
            h2: vec![Permutation::identity(2)],
            declared_divergent: true,
        });
        let back = GSequence::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn minimal_generating_set_sizes() {
        let v4: Vec<Permutation> =
            generated_subgroup(&[p("(1 2)", 4), p("(3 4)", 4)]).unwrap();
        assert_eq!(minimal_generating_set(&v4, 4).len(), 2);
        let z2 = generated_subgroup(&[p("(1 2)", 2)]).unwrap();
        assert_eq!(minimal_generating_set(&z2, 2).len(), 1);
        let triv = vec![Permutation::identity(3)];
        assert_eq!(minimal_generating_set(&triv, 3).len(), 1);
    }
}
