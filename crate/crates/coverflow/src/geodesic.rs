//! Exact boundary expansion for the ladder Veech group ⟨D(ψ), D(ρ)⟩: coding
//! walks, visit-count summaries, the ergodicity classifier, and the series
//! diagnostics used in the non-ergodic regime.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::golden::GoldenScalar;
use crate::ladder::{
    generator_action, is_connected_double, limits_to_zero, Generator, LimitVerdict, Z2Hom,
};

/// An exact element a + b√d of a quadratic extension of Q(φ), d > 0.
/// Covers the axis endpoints of hyperbolic words, which live just outside the
/// golden field itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub a: GoldenScalar,
    pub b: GoldenScalar,
    pub d: GoldenScalar,
}

impl QuadExt {
    pub fn rational(a: GoldenScalar) -> Self {
        QuadExt {
            a,
            b: GoldenScalar::zero(),
            d: GoldenScalar::one(),
        }
    }

    pub fn new(a: GoldenScalar, b: GoldenScalar, d: GoldenScalar) -> Result<Self> {
        if d.sign() != Ordering::Greater {
            return Err(Error::Invalid("radicand must be positive".into()));
        }
        Ok(QuadExt { a, b, d })
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of a + b√d.
    pub fn sign(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = self.b.sign();
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            _ => {
                // mixed signs: |a| vs |b|√d decided by a² vs b²·d
                let a2 = &self.a * &self.a;
                let b2d = &(&self.b * &self.b) * &self.d;
                match a2.cmp(&b2d) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    /// Comparison with a golden-field constant.
    pub fn cmp_scalar(&self, c: &GoldenScalar) -> Ordering {
        QuadExt {
            a: &self.a - c,
            b: self.b.clone(),
            d: self.d.clone(),
        }
        .sign()
    }

    pub fn add_scalar(&self, c: &GoldenScalar) -> QuadExt {
        QuadExt {
            a: &self.a + c,
            b: self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// 1/(a + b√d) = (a − b√d)/(a² − b²d).
    pub fn invert(&self) -> Result<QuadExt> {
        let a2 = &self.a * &self.a;
        let b2d = &(&self.b * &self.b) * &self.d;
        let denom = &a2 - &b2d;
        if denom.is_zero() {
            return Err(Error::Invalid(
                "cannot invert: norm over Q(φ) vanishes".into(),
            ));
        }
        let denom_inv = denom.inverse()?;
        Ok(QuadExt {
            a: &self.a * &denom_inv,
            b: -(&self.b * &denom_inv),
            d: self.d.clone(),
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.d.to_f64().sqrt()
    }
}

/// A boundary slope: finite exact value or the vertical direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slope {
    Finite(QuadExt),
    Infinity,
}

impl Slope {
    pub fn golden(s: GoldenScalar) -> Self {
        Slope::Finite(QuadExt::rational(s))
    }

    /// Attracting endpoint of the commutator axis: φ + sign·√φ. The minus
    /// root drives the walk in the +1 direction, the plus root in the −1
    /// direction.
    pub fn commutator_axis(positive_root: bool) -> Self {
        let b = if positive_root {
            GoldenScalar::one()
        } else {
            GoldenScalar::from_int(-1)
        };
        Slope::Finite(
            QuadExt::new(GoldenScalar::phi(), b, GoldenScalar::phi())
                .expect("φ > 0"),
        )
    }
}

/// An isometry of Z: n ↦ trans + n or n ↦ trans − n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsomZ {
    pub trans: i64,
    pub flip: bool,
}

impl IsomZ {
    pub fn identity() -> Self {
        IsomZ { trans: 0, flip: false }
    }

    /// δ(ψ): n ↦ −n.
    pub fn delta_psi() -> Self {
        IsomZ { trans: 0, flip: true }
    }

    /// δ(ρ): n ↦ 1 − n.
    pub fn delta_rho() -> Self {
        IsomZ { trans: 1, flip: true }
    }

    pub fn apply(&self, n: i64) -> i64 {
        if self.flip {
            self.trans - n
        } else {
            self.trans + n
        }
    }

    /// self ∘ other: apply `other` first.
    pub fn compose(&self, other: &IsomZ) -> IsomZ {
        // (t_f ± (t_o ± n)): the composed translation is self applied to
        // other's translation part, and the flips multiply
        IsomZ {
            trans: self.apply(other.trans),
            flip: self.flip ^ other.flip,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    Psi,
    Rho,
}

/// δ-image of a word over {ψ, ρ}, rightmost letter applied first.
pub fn delta_image(word: &[Letter]) -> IsomZ {
    let mut out = IsomZ::identity();
    for letter in word {
        let g = match letter {
            Letter::Psi => IsomZ::delta_psi(),
            Letter::Rho => IsomZ::delta_rho(),
        };
        out = out.compose(&g);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Step budget exhausted with the expansion still running.
    MaxSteps,
    /// Endpoint fell in a free boundary arc: the geodesic exits the convex
    /// core.
    FreeArc,
    /// Endpoint on the parabolic orbit (slope 0 or ∞).
    Cusp,
    /// Endpoint fixed by a wall reflection (slope ±1 or ±φ).
    WallFixed,
}

/// The ±1 walk on region indices traced by the boundary expansion.
#[derive(Clone, Debug)]
pub struct CodingWalk {
    pub entries: Vec<i64>,
    pub termination: Termination,
    pub divergent_into_cusp: bool,
    pub letters: Vec<Letter>,
}

impl CodingWalk {
    /// Builds a walk from explicit entries, enforcing the ±1 step invariant.
    pub fn from_entries(entries: Vec<i64>, termination: Termination) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("walk must be nonempty".into()));
        }
        for w in entries.windows(2) {
            if (w[1] - w[0]).abs() != 1 {
                return Err(Error::Invalid(format!(
                    "walk step {} → {} is not ±1",
                    w[0], w[1]
                )));
            }
        }
        Ok(CodingWalk {
            entries,
            termination,
            divergent_into_cusp: termination == Termination::Cusp,
            letters: vec![],
        })
    }
}

/// Runs the boundary expansion of a geodesic endpoint in slope coordinate.
///
/// One generator is applied per step: translation by ∓2φ when the slope lies
/// beyond ±φ, inversion when it lies inside the unit interval. The region
/// index after the prefix w is δ(w)(0); ψ-letters fix it, ρ-letters move it
/// by exactly ±1, and consecutive equal indices are collapsed.
pub fn coding_walk(endpoint: &Slope, max_steps: usize) -> Result<CodingWalk> {
    let phi = GoldenScalar::phi();
    let two_phi = &phi + &phi;
    let one = GoldenScalar::one();
    let minus_one = GoldenScalar::from_int(-1);
    let minus_phi = -phi.clone();

    let mut entries = vec![0i64];
    let mut letters = Vec::new();
    let mut prefix = IsomZ::identity();
    let mut termination = Termination::MaxSteps;

    let mut s = match endpoint {
        Slope::Infinity => {
            return Ok(CodingWalk {
                entries,
                termination: Termination::Cusp,
                divergent_into_cusp: true,
                letters,
            });
        }
        Slope::Finite(q) => q.clone(),
    };

    for _ in 0..max_steps {
        if s.is_zero() {
            termination = Termination::Cusp;
            break;
        }
        let vs_one = s.cmp_scalar(&one);
        let vs_minus_one = s.cmp_scalar(&minus_one);
        let vs_phi = s.cmp_scalar(&phi);
        let vs_minus_phi = s.cmp_scalar(&minus_phi);
        let letter = if vs_phi == Ordering::Greater {
            s = s.add_scalar(&-two_phi.clone());
            Letter::Psi
        } else if vs_minus_phi == Ordering::Less {
            s = s.add_scalar(&two_phi);
            Letter::Psi
        } else if vs_one == Ordering::Less && vs_minus_one == Ordering::Greater {
            s = s.invert()?;
            Letter::Rho
        } else if vs_one == Ordering::Equal
            || vs_minus_one == Ordering::Equal
            || vs_phi == Ordering::Equal
            || vs_minus_phi == Ordering::Equal
        {
            termination = Termination::WallFixed;
            break;
        } else {
            // 1 < |s| < φ: free boundary arc
            termination = Termination::FreeArc;
            break;
        };
        letters.push(letter);
        let g = match letter {
            Letter::Psi => IsomZ::delta_psi(),
            Letter::Rho => IsomZ::delta_rho(),
        };
        prefix = prefix.compose(&g);
        let n = prefix.apply(0);
        let last = *entries.last().expect("nonempty");
        if n != last {
            if (n - last).abs() != 1 {
                return Err(Error::UndecidableStep {
                    step: letters.len(),
                    detail: format!("region jumped from {last} to {n}"),
                });
            }
            entries.push(n);
        }
    }

    Ok(CodingWalk {
        entries,
        termination,
        divergent_into_cusp: termination == Termination::Cusp,
        letters,
    })
}

#[derive(Clone, Debug)]
pub struct WalkSummary {
    pub visit_counts: BTreeMap<i64, u64>,
    pub recurrent_level: Option<i64>,
    /// +1 when the walk ends on the nonnegative side, −1 otherwise.
    pub sign: i8,
    pub v_estimate: f64,
    /// The |N| range the estimate was taken over.
    pub window: (i64, i64),
    /// Exact growth ratio when the counts follow a declared synthetic rule.
    pub certified_v: Option<BigRational>,
    /// True when the walk is strictly monotone (no level visited twice).
    pub strictly_monotone: bool,
}

/// Tabulates visit counts and estimates the growth exponent
/// v = limsup V_N^{1/|N|} over a trailing window of levels.
pub fn walk_summary(walk: &CodingWalk, recurrence_threshold: u64) -> Result<WalkSummary> {
    if walk.entries.is_empty() {
        return Err(Error::Invalid("walk must be nonempty".into()));
    }
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for &n in &walk.entries {
        *counts.entry(n).or_insert(0) += 1;
    }
    let recurrent_level = counts
        .iter()
        .find(|(_, &c)| c >= recurrence_threshold)
        .map(|(&n, _)| n);
    let sign = if *walk.entries.last().unwrap() >= 0 { 1 } else { -1 };
    let strictly_monotone = counts.values().all(|&c| c == 1) && counts.len() == walk.entries.len();

    let max_abs = counts.keys().map(|n| n.abs()).max().unwrap_or(0);
    // trailing window: the outer half of the visited levels, excluding the
    // outermost level (its count is clipped by the walk's end)
    let (lo, hi) = if max_abs >= 3 {
        (max_abs / 2, max_abs - 1)
    } else {
        (1, max_abs.max(1))
    };
    let mut v_estimate = 0.0f64;
    for (&n, &c) in &counts {
        let abs_n = n.abs();
        if abs_n >= lo && abs_n <= hi && abs_n > 0 {
            let root = (c as f64).powf(1.0 / abs_n as f64);
            v_estimate = v_estimate.max(root);
        }
    }
    Ok(WalkSummary {
        visit_counts: counts,
        recurrent_level,
        sign,
        v_estimate,
        window: (lo, hi),
        certified_v: None,
        strictly_monotone,
    })
}

/// Builds a synthetic nonnegative walk whose level-N visit count matches
/// `visit_counts[N]` for N below the top level (the topmost count is clipped
/// by the walk's end). Up-step budgets follow u_N = V_N + 1 − u_{N−1}.
pub fn excursion_walk(visit_counts: &[u64]) -> Result<CodingWalk> {
    if visit_counts.is_empty() {
        return Err(Error::Invalid("need at least one visit count".into()));
    }
    if visit_counts[0] != 1 {
        return Err(Error::Invalid(
            "the construction starts at level 0 and departs upward: V_0 must be 1".into(),
        ));
    }
    let top = visit_counts.len() as i64 - 1;
    let mut budgets: Vec<u64> = Vec::with_capacity(visit_counts.len());
    let mut prev = 0u64;
    for (n, &v) in visit_counts.iter().enumerate() {
        if (n as i64) == top {
            break;
        }
        // level 0 departs upward every visit (d_0 = 0): u_0 = V_0;
        // above that each up-step returns except the last: u_N = V_N + 1 − u_{N−1}
        let u = if n == 0 { v } else { (v + 1).checked_sub(prev).ok_or_else(|| {
            Error::Infeasible(format!(
                "visit profile infeasible at level {n}: V_{n} + 1 < u_{}",
                n as i64 - 1
            ))
        })? };
        if u == 0 {
            return Err(Error::Infeasible(format!(
                "visit profile infeasible at level {n}: no upward departures left"
            )));
        }
        budgets.push(u);
        prev = u;
    }
    // down-step budgets: every ascent into a level returns except the last
    let mut down: Vec<u64> = std::iter::once(0)
        .chain(budgets.iter().map(|&u| u - 1))
        .collect();
    let mut entries = vec![0i64];
    let mut pos = 0i64;
    loop {
        // take the pending down-excursions before the final ascent so lower
        // budgets are never stranded
        if down[pos as usize] > 0 {
            down[pos as usize] -= 1;
            pos -= 1;
        } else if pos < top && budgets[pos as usize] > 0 {
            budgets[pos as usize] -= 1;
            pos += 1;
        } else if pos == top && budgets.iter().all(|&u| u == 0) && down.iter().all(|&d| d == 0) {
            break;
        } else {
            return Err(Error::Infeasible(format!(
                "visit profile strands the walk at level {pos}"
            )));
        }
        entries.push(pos);
    }
    CodingWalk::from_entries(entries, Termination::MaxSteps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverVerdict {
    /// Walk recurs: the lifted flow is uniquely ergodic.
    UniquelyErgodicRecurrent,
    /// Growth exponent above φ²: uniquely ergodic.
    UniquelyErgodicFastGrowth,
    /// Growth below φ² and the τ-orbit climbs the cylinder tower.
    NonErgodicSlowGrowth,
    /// Growth below φ² but the τ-orbit keeps returning to proximity 1.
    ErgodicSlowGrowth,
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct ClassifyReport {
    pub verdict: CoverVerdict,
    pub branch: &'static str,
    pub v_estimate: f64,
    pub v_exact_side: Option<Ordering>,
    pub window: (i64, i64),
    pub tau_limit: Option<LimitVerdict>,
    pub flags: Vec<String>,
}

/// Decision tree for the lifted flow on the double cover: recurrence, the φ²
/// growth threshold, and in the slow-growth regime the τ-limit test on h
/// (reflected through ψ when the walk drifted to the negative side).
pub fn classify_cover(ws: &WalkSummary, h: &Z2Hom, horizon: usize) -> Result<ClassifyReport> {
    if !is_connected_double(h) {
        return Err(Error::DisconnectedCover);
    }
    let mut flags = Vec::new();
    if ws.recurrent_level.is_some() {
        return Ok(ClassifyReport {
            verdict: CoverVerdict::UniquelyErgodicRecurrent,
            branch: "a",
            v_estimate: ws.v_estimate,
            v_exact_side: None,
            window: ws.window,
            tau_limit: None,
            flags,
        });
    }
    let phi_sq = GoldenScalar::phi_squared();
    // side of the φ² threshold: exact when the growth ratio is certified,
    // otherwise a toleranced float comparison
    let side = if let Some(v) = &ws.certified_v {
        let v_scalar = GoldenScalar::from_rationals(v.clone(), BigRational::zero());
        Some(v_scalar.cmp(&phi_sq))
    } else {
        let tol = 1e-6;
        let phi_sq_f = phi_sq.to_f64();
        if ws.v_estimate > phi_sq_f + tol {
            Some(Ordering::Greater)
        } else if ws.v_estimate < phi_sq_f - tol {
            Some(Ordering::Less)
        } else {
            None
        }
    };
    match side {
        Some(Ordering::Greater) => Ok(ClassifyReport {
            verdict: CoverVerdict::UniquelyErgodicFastGrowth,
            branch: "b",
            v_estimate: ws.v_estimate,
            v_exact_side: side,
            window: ws.window,
            tau_limit: None,
            flags,
        }),
        Some(Ordering::Less) => {
            // the reflection reduction: a negative-side walk is mirrored by
            // applying ψ to the monodromy data
            let h_prime = if ws.sign < 0 {
                flags.push("reflected-through-psi".into());
                generator_action(h, Generator::Psi)
            } else {
                h.clone()
            };
            let tau_limit = limits_to_zero(&h_prime, horizon);
            let verdict = match &tau_limit {
                LimitVerdict::ConvergesCertified { .. } => CoverVerdict::NonErgodicSlowGrowth,
                LimitVerdict::ProximityReturnedToOne { .. } => {
                    if ws.strictly_monotone {
                        flags.push("boundary-geodesic-caveat".into());
                    }
                    CoverVerdict::ErgodicSlowGrowth
                }
                LimitVerdict::Undetermined => CoverVerdict::Undetermined,
            };
            Ok(ClassifyReport {
                verdict,
                branch: "c",
                v_estimate: ws.v_estimate,
                v_exact_side: side,
                window: ws.window,
                tau_limit: Some(tau_limit),
                flags,
            })
        }
        _ => Ok(ClassifyReport {
            verdict: CoverVerdict::Undetermined,
            branch: "c",
            v_estimate: ws.v_estimate,
            v_exact_side: side,
            window: ws.window,
            tau_limit: None,
            flags,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesTrend {
    ConvergentTrend,
    DivergentTrend,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SeriesReport {
    /// Exact partial sums of Σ V_N φ^{−2(N+j)}.
    pub partial_sums: Vec<GoldenScalar>,
    pub trend: SeriesTrend,
}

/// Exact golden-field partial sums of the level series, with a trend verdict
/// from exact comparisons of successive terms.
pub fn ms_series(
    visit_counts: &BTreeMap<i64, u64>,
    j: i64,
    n_max: i64,
) -> Result<SeriesReport> {
    if n_max < 0 {
        return Err(Error::Invalid("n_max must be ≥ 0".into()));
    }
    let phi_sq_inv = GoldenScalar::phi_squared()
        .inverse()
        .expect("φ² is nonzero");
    // φ^{−2j} start weight (j may be negative)
    let mut weight = GoldenScalar::one();
    if j >= 0 {
        for _ in 0..j {
            weight = &weight * &phi_sq_inv;
        }
    } else {
        let phi_sq = GoldenScalar::phi_squared();
        for _ in 0..(-j) {
            weight = &weight * &phi_sq;
        }
    }
    let mut partial_sums = Vec::with_capacity(n_max as usize + 1);
    let mut terms = Vec::with_capacity(n_max as usize + 1);
    let mut acc = GoldenScalar::zero();
    for n in 0..=n_max {
        let count = visit_counts.get(&n).copied().unwrap_or(0);
        let term = &GoldenScalar::from_int(count as i64) * &weight;
        acc = &acc + &term;
        partial_sums.push(acc.clone());
        terms.push(term);
        weight = &weight * &phi_sq_inv;
    }
    // compare successive nonzero terms exactly over the trailing half
    let tail_start = terms.len() / 2;
    let tail = &terms[tail_start..];
    let nonzero = tail.iter().filter(|t| !t.is_zero()).count();
    let trend = if nonzero == 0 {
        SeriesTrend::ConvergentTrend
    } else {
        let mut all_down = true;
        let mut all_up = true;
        let mut any_pair = false;
        for w in tail.windows(2) {
            if w[0].is_zero() || w[1].is_zero() {
                continue;
            }
            any_pair = true;
            match w[1].cmp(&w[0]) {
                Ordering::Less => all_up = false,
                Ordering::Greater => all_down = false,
                Ordering::Equal => {
                    all_up = false;
                    all_down = false;
                }
            }
        }
        if !any_pair {
            SeriesTrend::Inconclusive
        } else if all_down {
            SeriesTrend::ConvergentTrend
        } else if all_up {
            SeriesTrend::DivergentTrend
        } else {
            SeriesTrend::Inconclusive
        }
    };
    Ok(SeriesReport { partial_sums, trend })
}

#[derive(Clone, Debug)]
pub struct MsConditions {
    pub holonomy_shrinks: bool,
    pub areas_in_band: bool,
    pub symdiffs_summable: bool,
}

/// Horizon checks of the three non-ergodicity conditions on user-supplied
/// partition data: shrinking boundary holonomy, an area band, and summable
/// symmetric differences.
pub fn ms_conditions_check(
    holonomies: &[f64],
    areas: &[f64],
    symdiffs: &[f64],
    c: f64,
    c_prime: f64,
) -> Result<MsConditions> {
    if holonomies.is_empty() || areas.is_empty() || symdiffs.is_empty() {
        return Err(Error::Invalid("all three sequences must be nonempty".into()));
    }
    if !(0.0 < c && c < c_prime && c_prime < 1.0) {
        return Err(Error::Invalid(format!(
            "band must satisfy 0 < c < c′ < 1, got c={c}, c′={c_prime}"
        )));
    }
    let h_max = holonomies.iter().cloned().fold(0.0f64, f64::max);
    let h_last = *holonomies.last().unwrap();
    let holonomy_shrinks = h_max == 0.0 || h_last <= 0.05 * h_max;

    let areas_in_band = areas.iter().all(|&a| c < a && a < c_prime);

    let total: f64 = symdiffs.iter().sum();
    let tail_len = (symdiffs.len() / 4).max(1);
    let tail: f64 = symdiffs[symdiffs.len() - tail_len..].iter().sum();
    let symdiffs_summable = total == 0.0 || tail < 0.05 * total;

    Ok(MsConditions {
        holonomy_shrinks,
        areas_in_band,
        symdiffs_summable,
    })
}
