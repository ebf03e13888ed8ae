//! Double covers of the ladder surface: the induced actions on
//! Hom(Γ, Z₂), proximity, cylinder sets, the limits-to-zero probe, and the
//! solver that builds homomorphisms climbing the cylinder tower.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// A finite-support function Z\{0} → Z₂, stored as the set of indices where
/// it equals 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Z2Hom {
    support: BTreeSet<i64>,
}

impl Z2Hom {
    pub fn zero() -> Self {
        Z2Hom::default()
    }

    pub fn from_support<I: IntoIterator<Item = i64>>(support: I) -> Result<Self> {
        let support: BTreeSet<i64> = support.into_iter().collect();
        if support.contains(&0) {
            return Err(Error::Invalid("index 0 is not a generator index".into()));
        }
        Ok(Z2Hom { support })
    }

    pub fn get(&self, i: i64) -> bool {
        debug_assert!(i != 0);
        self.support.contains(&i)
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.support.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Pointwise mod-2 sum.
    pub fn xor(&self, other: &Z2Hom) -> Z2Hom {
        Z2Hom {
            support: self
                .support
                .symmetric_difference(&other.support)
                .copied()
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "support": self.support.iter().collect::<Vec<_>>() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .get("support")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing field \"support\"".into()))?;
        let support: Vec<i64> = arr
            .iter()
            .map(|x| {
                x.as_i64()
                    .ok_or_else(|| Error::Parse("support entry must be an integer".into()))
            })
            .collect::<Result<_>>()?;
        Z2Hom::from_support(support)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Psi,
    Rho,
}

/// The action of the affine generators on double-cover data.
pub fn generator_action(h: &Z2Hom, gen: Generator) -> Z2Hom {
    let b = |flag: bool| flag as u8;
    let mut support = BTreeSet::new();
    // candidate output indices: anything whose formula can see the input support
    let mut candidates = BTreeSet::new();
    for i in h.support() {
        for j in [i, -i, -i - 1, -i + 1, i - 1, i + 1, 1, 2, -1, -2] {
            if j != 0 {
                candidates.insert(j);
            }
        }
    }
    for &i in &candidates {
        let val = match gen {
            Generator::Rho => b(h.get(-i)),
            Generator::Psi => {
                if i < 0 {
                    b(h.get(i))
                } else if i == 1 {
                    b(h.get(1)) ^ b(h.get(-2))
                } else if i == 2 {
                    b(h.get(2)) ^ b(h.get(-2)) ^ b(h.get(-3))
                } else {
                    b(h.get(i)) ^ b(h.get(-i - 1)) ^ b(h.get(-i)) ^ b(h.get(-i + 1))
                }
            }
        };
        if val == 1 {
            support.insert(i);
        }
    }
    Z2Hom { support }
}

/// One step of the translation-by-one action, in either direction.
fn tau_once(h: &Z2Hom, forward: bool) -> Z2Hom {
    let b = |flag: bool| flag as u8;
    let mut support = BTreeSet::new();
    let mut candidates = BTreeSet::new();
    for i in h.support() {
        for j in [i, -i, -i - 1, -i + 1, i - 1, i + 1, 1, 2, -1, -2, -3, 3] {
            if j != 0 {
                candidates.insert(j);
            }
        }
    }
    for &i in &candidates {
        let val = if forward {
            if i > 0 {
                b(h.get(-i))
            } else if i == -1 {
                b(h.get(1)) ^ b(h.get(-2))
            } else if i == -2 {
                b(h.get(2)) ^ b(h.get(-2)) ^ b(h.get(-3))
            } else {
                b(h.get(-i)) ^ b(h.get(i - 1)) ^ b(h.get(i)) ^ b(h.get(i + 1))
            }
        } else {
            if i < 0 {
                b(h.get(-i))
            } else if i == 1 {
                b(h.get(-1)) ^ b(h.get(2))
            } else if i == 2 {
                b(h.get(-2)) ^ b(h.get(2)) ^ b(h.get(3))
            } else {
                b(h.get(-i)) ^ b(h.get(i - 1)) ^ b(h.get(i)) ^ b(h.get(i + 1))
            }
        };
        if val == 1 {
            support.insert(i);
        }
    }
    Z2Hom { support }
}

/// m-fold translation action: positive m composes τ¹, negative m composes τ⁻¹.
pub fn tau_star(h: &Z2Hom, m: i64) -> Z2Hom {
    let mut out = h.clone();
    for _ in 0..m.unsigned_abs() {
        out = tau_once(&out, m > 0);
    }
    out
}

/// Proximity P(h) = min{|i| : h(i) ≠ 0}; None encodes ∞ (h = 0).
pub fn proximity(h: &Z2Hom) -> Option<i64> {
    h.support().map(|i| i.abs()).min()
}

/// Membership in the cylinder C_k: h(k) = h(−k−1) = 1 and h vanishes
/// strictly between −k−1 and k. For k = 0 the first condition degenerates to
/// h(−1) = 1 with empty interior, since 0 is not a generator index.
pub fn cylinder_member(h: &Z2Hom, k: i64) -> Result<bool> {
    if k < 0 {
        return Err(Error::Invalid(format!("cylinder index {k} must be ≥ 0")));
    }
    if k == 0 {
        return Ok(h.get(-1));
    }
    if !h.get(k) || !h.get(-k - 1) {
        return Ok(false);
    }
    for i in (-k)..k {
        if i != 0 && h.get(i) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct CylinderLemmaReport {
    pub proximity: i64,
    pub in_cylinder: bool,
    /// Which clause was exercised: 1 (inside C_k, τ¹ raises), 2 (inside C_k
    /// with k ≥ 3, τ⁻¹ descends), or 3 (outside C_k, τ¹ or τ² drops).
    pub clauses_checked: Vec<u8>,
    pub pass: bool,
    pub witness: String,
}

/// Evaluates whichever cylinder-lemma clauses apply to `h` and verifies their
/// conclusions by direct computation.
pub fn cylinder_lemma_check(h: &Z2Hom) -> Result<CylinderLemmaReport> {
    let k = proximity(h).ok_or_else(|| Error::Invalid("h must be nonzero".into()))?;
    if k < 2 {
        return Err(Error::Invalid(format!(
            "cylinder lemma applies to proximity ≥ 2, got {k}"
        )));
    }
    let in_cyl = cylinder_member(h, k)?;
    let mut clauses = Vec::new();
    let mut pass = true;
    let mut witness;
    if in_cyl {
        clauses.push(1);
        let up = tau_once(h, true);
        let p_up = proximity(&up);
        if p_up != Some(k + 1) {
            pass = false;
            witness = format!("P(τ¹h) = {p_up:?}, expected {}", k + 1);
        } else {
            witness = format!("P(τ¹h) = {}", k + 1);
        }
        if k >= 3 {
            clauses.push(2);
            let down = tau_once(h, false);
            if !cylinder_member(&down, k - 1)? {
                pass = false;
                witness.push_str(&format!("; τ⁻¹h ∉ C_{}", k - 1));
            } else {
                witness.push_str(&format!("; τ⁻¹h ∈ C_{}", k - 1));
            }
        }
    } else {
        clauses.push(3);
        let t1 = tau_once(h, true);
        let t2 = tau_once(&t1, true);
        let drop_outside = |g: &Z2Hom| -> Result<bool> {
            Ok(proximity(g) == Some(k - 1) && !cylinder_member(g, k - 1)?)
        };
        if drop_outside(&t1)? {
            witness = format!("τ¹h has proximity {} outside C_{}", k - 1, k - 1);
        } else if drop_outside(&t2)? {
            witness = format!("τ²h has proximity {} outside C_{}", k - 1, k - 1);
        } else {
            pass = false;
            witness = format!(
                "neither τ¹h (P={:?}) nor τ²h (P={:?}) drops to {} outside C_{}",
                proximity(&t1),
                proximity(&t2),
                k - 1,
                k - 1
            );
        }
    }
    Ok(CylinderLemmaReport {
        proximity: k,
        in_cylinder: in_cyl,
        clauses_checked: clauses,
        pass,
        witness,
    })
}

/// Solves for a finite-support h agreeing with `f` on {2..K} whose τ-orbit
/// climbs the cylinder tower: τ^m h ∈ C_{k+m} for 0 ≤ m ≤ M, where k is the
/// smallest index in f's support. Linear algebra over the two-element field.
pub fn z_solve(f: &BTreeMap<i64, bool>, horizon: usize) -> Result<Z2Hom> {
    for (&i, _) in f.iter() {
        if i < 2 {
            return Err(Error::Invalid(format!(
                "f is defined on indices ≥ 2, got {i}"
            )));
        }
    }
    let k = f
        .iter()
        .filter(|(_, &v)| v)
        .map(|(&i, _)| i)
        .min()
        .ok_or_else(|| Error::Invalid("f must not be identically zero".into()))?;
    let k_max = f.keys().copied().max().unwrap();
    let m = horizon as i64;
    let radius = k_max.max(k + m) + m + 4;

    // variable order: all nonzero indices in [-radius, radius]
    let vars: Vec<i64> = (-radius..=radius).filter(|&i| i != 0).collect();
    let nvars = vars.len();

    // basis images: tau_images[m][a] = τ^m(e_{vars[a]}), computed by exact
    // iteration so constraint rows are read off by linearity
    let mut tau_images: Vec<Vec<Z2Hom>> = Vec::with_capacity(horizon + 1);
    tau_images.push(
        vars.iter()
            .map(|&i| Z2Hom::from_support([i]).expect("nonzero index"))
            .collect(),
    );
    for step in 1..=horizon {
        let prev = &tau_images[step - 1];
        tau_images.push(prev.iter().map(|g| tau_once(g, true)).collect());
    }

    // rows: coefficient bitvector (as Vec<bool>) + rhs
    let mut rows: Vec<(Vec<bool>, bool)> = Vec::new();
    let push_eval_constraint = |step: usize, idx: i64, rhs: bool, rows: &mut Vec<(Vec<bool>, bool)>| {
        let mut coeffs = vec![false; nvars];
        for (a, img) in tau_images[step].iter().enumerate() {
            if img.get(idx) {
                coeffs[a] = true;
            }
        }
        rows.push((coeffs, rhs));
    };

    // pin h on {2..K} to f
    for (&i, &v) in f.iter() {
        push_eval_constraint(0, i, v, &mut rows);
    }
    // cylinder-tower constraints
    for step in 0..=horizon {
        let level = k + step as i64;
        push_eval_constraint(step, level, true, &mut rows);
        push_eval_constraint(step, -level - 1, true, &mut rows);
        for i in (-level)..level {
            if i != 0 {
                push_eval_constraint(step, i, false, &mut rows);
            }
        }
    }

    // Gaussian elimination over F₂
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nvars];
    let mut rank = 0usize;
    for col in 0..nvars {
        let Some(r) = (rank..rows.len()).find(|&r| rows[r].0[col]) else {
            continue;
        };
        rows.swap(rank, r);
        let (pivot_row, pivot_rhs) = (rows[rank].0.clone(), rows[rank].1);
        for (ri, row) in rows.iter_mut().enumerate() {
            if ri != rank && row.0[col] {
                for c in 0..nvars {
                    row.0[c] ^= pivot_row[c];
                }
                row.1 ^= pivot_rhs;
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    if rows[rank..].iter().any(|(coeffs, rhs)| *rhs && coeffs.iter().all(|&c| !c)) {
        return Err(Error::Infeasible(format!(
            "no finite-support solution within radius {radius} at horizon {horizon}"
        )));
    }

    // free variables take 0; pivots read off the rhs
    let mut support = Vec::new();
    for (col, &i) in vars.iter().enumerate() {
        if let Some(r) = pivot_of_col[col] {
            if rows[r].1 {
                support.push(i);
            }
        }
    }
    let h = Z2Hom::from_support(support)?;

    // re-verify with the iteration oracle before handing the result out
    let mut cur = h.clone();
    for step in 0..=horizon {
        if !cylinder_member(&cur, k + step as i64)? {
            return Err(Error::Infeasible(format!(
                "solver output failed cylinder re-check at step {step}"
            )));
        }
        cur = tau_once(&cur, true);
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitVerdict {
    /// From step m0 on, each τ-iterate sits in the next cylinder C_{k+…} up
    /// to the horizon: strong (but finite-horizon) evidence of convergence.
    ConvergesCertified { k: i64, m0: usize },
    /// Proximity fell back to 1; records the last step where it did.
    ProximityReturnedToOne { step: usize },
    Undetermined,
}

/// Iterates τ up to `horizon` steps and reports whether the orbit climbs the
/// cylinder tower (evidence that τ^m h → 0).
pub fn limits_to_zero(h: &Z2Hom, horizon: usize) -> LimitVerdict {
    if h.is_zero() {
        return LimitVerdict::ConvergesCertified { k: 0, m0: 0 };
    }
    let mut iterates = Vec::with_capacity(horizon + 1);
    let mut cur = h.clone();
    for _ in 0..=horizon {
        iterates.push(cur.clone());
        cur = tau_once(&cur, true);
    }
    'outer: for m0 in 0..=horizon {
        let Some(k) = proximity(&iterates[m0]) else {
            continue;
        };
        if k < 2 {
            continue;
        }
        for (offset, it) in iterates[m0..].iter().enumerate() {
            if !cylinder_member(it, k + offset as i64).expect("k ≥ 2") {
                continue 'outer;
            }
        }
        return LimitVerdict::ConvergesCertified { k, m0 };
    }
    if let Some(step) = (0..=horizon)
        .rev()
        .find(|&s| proximity(&iterates[s]) == Some(1))
    {
        return LimitVerdict::ProximityReturnedToOne { step };
    }
    LimitVerdict::Undetermined
}

/// The double cover determined by h is connected iff h is not the trivial
/// homomorphism.
pub fn is_connected_double(h: &Z2Hom) -> bool {
    !h.is_zero()
}
