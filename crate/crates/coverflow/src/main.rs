use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use coverflow::chamanara::{
    accumulation_class, build_devious, build_p_ready, build_p_word, is_devious, to_skew,
    AccumulationClass, GSequence,
};
use coverflow::error::Error;
use coverflow::geodesic::{
    classify_cover, coding_walk, ms_series, walk_summary, CodingWalk, CoverVerdict, Slope,
    Termination, WalkSummary,
};
use coverflow::golden::{parse_golden, GoldenScalar};
use coverflow::ladder::{
    cylinder_member, generator_action, limits_to_zero, proximity, tau_star, z_solve, Generator,
    LimitVerdict, Z2Hom,
};
use coverflow::monodromy::{
    disconnected_probability, is_transitive, parse_group, sample_monodromy, MonodromyRep,
};
use coverflow::odometer::{fiber_invariant_sets, orbit_statistics, OdometerPoint, SkewCocycle, SkewState};
use coverflow::perm::Permutation;

#[derive(Parser)]
#[command(name = "coverflow", version, about = "Finite covers of infinite-type translation surfaces: sampling, skew products, and classification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample random covers from the product measure and report the
    /// disconnection probability.
    SampleCover {
        /// Group: "Sd", "Zd", or semicolon-separated cycles.
        #[arg(long = "G")]
        group: String,
        #[arg(long)]
        d: usize,
        /// Number of independent generator images.
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        /// Cap on |G|^k for the exact enumeration.
        #[arg(long, default_value_t = 1 << 22)]
        cap: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a skew product over the n-adic odometer and tabulate
    /// cylinder×fiber visits.
    SimulateSkew {
        #[arg(long)]
        base: u32,
        #[arg(long)]
        degree: usize,
        /// Cocycle as JSON (inline or a file path).
        #[arg(long)]
        psi: String,
        #[arg(long)]
        iters: u64,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a sequence whose tail periodically lists a non-transitive
    /// subgroup.
    DeviousBuild {
        #[arg(long)]
        d: usize,
        #[arg(long = "G")]
        group: String,
        #[arg(long = "H")]
        subgroup: String,
        /// Window prefix: semicolon-separated cycles, empty for none.
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a p-ready sequence from an alternating block schedule.
    PReadyBuild {
        #[arg(long)]
        d: usize,
        #[arg(long = "G")]
        group: String,
        #[arg(long = "H1")]
        h1: String,
        #[arg(long = "H2")]
        h2: String,
        #[arg(long, default_value_t = 1)]
        l1: usize,
        #[arg(long, default_value_t = 1)]
        l2: usize,
        /// Comma-separated 0-block lengths.
        #[arg(long)]
        ells: String,
        /// Declare that the 0-block lengths tend to infinity.
        #[arg(long)]
        declared_divergent: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a sequence: devious tail, accumulation class, and the skew
    /// cocycle it induces.
    ChamanaraClassify {
        /// Sequence as JSON (inline or a file path).
        #[arg(long)]
        gseq: String,
        /// Base index for the induced skew cocycle; defaults to just past the
        /// window.
        #[arg(long)]
        k: Option<i64>,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply ψ, ρ, or the translation τ to a double-cover homomorphism.
    LadderAct {
        /// Homomorphism as JSON (inline or a file path).
        #[arg(long)]
        hom: String,
        /// One of psi, rho, tau.
        #[arg(long)]
        gen: String,
        /// Iteration count; may be negative for tau.
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a homomorphism climbing the cylinder tower while matching a
    /// prescription on positive indices.
    ZSolve {
        /// Indices in {2..} where the prescription equals 1.
        #[arg(long)]
        f_support: String,
        /// Largest prescribed index (defaults to the largest support entry).
        #[arg(long)]
        k_max: Option<i64>,
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe whether the τ-orbit of a homomorphism climbs to zero.
    LadderLimit {
        #[arg(long)]
        hom: String,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary-expand a geodesic endpoint and emit the region walk as CSV.
    CodingWalk {
        /// "inf", a golden-field expression like "1+2*phi", or
        /// "commutator+"/"commutator-" for the hyperbolic axis endpoints.
        #[arg(long)]
        endpoint: String,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ergodicity decision tree on a walk and a homomorphism.
    Classify {
        /// Walk CSV produced by coding-walk (or any k,n_k file).
        #[arg(long)]
        walk: PathBuf,
        #[arg(long)]
        hom: String,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = 100)]
        recurrence_threshold: u64,
        /// Exact growth ratio when the walk follows a declared synthetic
        /// rule, e.g. "3" or "3/2".
        #[arg(long)]
        certified_v: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact partial sums of the level series Σ V_N φ^{−2(N+j)}.
    MsSeries {
        /// Walk CSV to take visit counts from.
        #[arg(long)]
        walk: Option<PathBuf>,
        /// Alternative: comma-separated counts for levels 0,1,2,…
        #[arg(long)]
        counts: Option<String>,
        #[arg(long, default_value_t = 0)]
        j: i64,
        #[arg(long)]
        n_max: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse(_) | Error::Invalid(_) | Error::NotABijection { .. } => 3,
                Error::Infeasible(_) | Error::CapExceeded { .. } => 4,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn meta(seed: u64, config: Value) -> Value {
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config,
    })
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<(), Error> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    emit(out, &s)
}

/// Accepts either inline JSON or a path to a JSON file.
fn load_json(arg: &str) -> Result<Value, Error> {
    let text = if Path::new(arg).exists() {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::Parse(format!("cannot read {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))
}

fn parse_perm_list(s: &str, d: usize) -> Result<Vec<Permutation>, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(';')
        .map(|part| Permutation::parse_cycles(part.trim(), d))
        .collect()
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
        })
        .collect()
}

fn parse_endpoint(s: &str) -> Result<Slope, Error> {
    match s.trim() {
        "inf" | "infinity" => Ok(Slope::Infinity),
        "commutator+" => Ok(Slope::commutator_axis(true)),
        "commutator-" => Ok(Slope::commutator_axis(false)),
        expr => Ok(Slope::golden(parse_golden(expr)?)),
    }
}

fn parse_rational_arg(s: &str) -> Result<BigRational, Error> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<num_bigint::BigInt>()
            .map_err(|_| Error::Parse(format!("bad number {t:?}")))
    };
    if let Some((n, d)) = s.split_once('/') {
        Ok(BigRational::new(parse_int(n)?, parse_int(d)?))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}

fn read_walk_csv(path: &Path) -> Result<CodingWalk, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("k,") {
            continue;
        }
        let (_, n) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad walk row {line:?}")))?;
        entries.push(
            n.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad region index {n:?}")))?,
        );
    }
    CodingWalk::from_entries(entries, Termination::MaxSteps)
}

fn limit_verdict_json(v: &LimitVerdict) -> Value {
    match v {
        LimitVerdict::ConvergesCertified { k, m0 } => json!({
            "kind": "converges-certified", "k": k, "m0": m0,
        }),
        LimitVerdict::ProximityReturnedToOne { step } => json!({
            "kind": "proximity-returned-to-one", "step": step,
        }),
        LimitVerdict::Undetermined => json!({ "kind": "undetermined" }),
    }
}

fn accumulation_json(c: &AccumulationClass) -> Value {
    match c {
        AccumulationClass::AllDisconnected(hs) => json!({
            "kind": "all-disconnected",
            "subgroups": hs
                .iter()
                .map(|h| h.iter().map(|p| p.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        AccumulationClass::HasConnectedLimit => json!({ "kind": "has-connected-limit" }),
        AccumulationClass::Undetermined => json!({ "kind": "undetermined" }),
    }
}

fn summary_json(ws: &WalkSummary) -> Value {
    json!({
        "visit_counts": ws
            .visit_counts
            .iter()
            .map(|(n, c)| (n.to_string(), *c))
            .collect::<BTreeMap<String, u64>>(),
        "recurrent_level": ws.recurrent_level,
        "sign": ws.sign,
        "v_estimate": ws.v_estimate,
        "window": { "lo_abs": ws.window.0, "hi_abs": ws.window.1 },
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::SampleCover { group, d, k, seed, samples, cap, out } => {
            let spec = parse_group(&group, d)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let support: Vec<i64> = (1..=k as i64).collect();
            let mut reps = Vec::new();
            for _ in 0..samples {
                let rep = sample_monodromy(&spec, &support, &mut rng);
                let gens: Vec<Permutation> =
                    support.iter().map(|&i| rep.image(i)).collect();
                let (transitive, orbits) = is_transitive(&gens, d)?;
                reps.push(json!({
                    "rep": rep.to_json(),
                    "connected": transitive,
                    "orbits": orbits,
                }));
            }
            let prob = disconnected_probability(&spec, k, cap)?;
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "sample-cover", "G": group, "d": d, "k": k,
                    "samples": samples, "cap": cap.to_string(),
                })),
                "group_order": spec.elements().len(),
                "samples": reps,
                "disconnected_probability": {
                    "exact": prob.exact.as_ref().map(|r| r.to_string()),
                    "bound": prob.bound.to_string(),
                    "cap_exceeded": prob.cap_exceeded,
                },
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::SimulateSkew { base, degree, psi, iters, depth, seed, tolerance, out } => {
            let rep = MonodromyRep::from_json(&load_json(&psi)?)?;
            let cocycle = SkewCocycle::new(base, degree, rep)?;
            let s0 = SkewState { point: OdometerPoint::zero(base), fiber: 1 };
            let stats = orbit_statistics(&cocycle, &s0, iters, depth)?;
            let blocks = fiber_invariant_sets(&cocycle);
            let structural = if blocks.len() > 1 {
                format!(
                    "NON-ERGODIC CERTIFICATE ({} invariant fiber blocks)",
                    blocks.len()
                )
            } else {
                "TRANSITIVE FIBER ACTION (no invariant split)".to_string()
            };
            let statistical = if stats.max_deviation_fraction < tolerance {
                format!(
                    "EVIDENCE: equidistributed within tolerance {tolerance} (max deviation fraction {:.6})",
                    stats.max_deviation_fraction
                )
            } else {
                format!(
                    "EVIDENCE: NOT equidistributed at tolerance {tolerance} (max deviation fraction {:.6})",
                    stats.max_deviation_fraction
                )
            };
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "simulate-skew", "base": base, "degree": degree,
                    "iters": iters, "depth": depth, "tolerance": tolerance,
                })),
                "frequency_table": stats.counts,
                "max_deviation": stats.max_deviation,
                "max_deviation_fraction": stats.max_deviation_fraction,
                "fiber_blocks": blocks,
                "verdict": { "structural": structural, "statistical": statistical },
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::DeviousBuild { d, group, subgroup, prefix, seed, out } => {
            let g_spec = parse_group(&group, d)?;
            let h_spec = parse_group(&subgroup, d)?;
            let prefix = parse_perm_list(&prefix, d)?;
            let g = build_devious(&g_spec, &h_spec, &prefix, seed)?;
            let report = is_devious(&g).expect("built with a non-transitive tail");
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "devious-build", "d": d, "G": group, "H": subgroup,
                    "prefix": prefix.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                })),
                "gsequence": g.to_json(),
                "devious": {
                    "tail_start": report.tail_start,
                    "H": report.subgroup.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "connected": report.connected,
                },
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::PReadyBuild { d, group, h1, h2, l1, l2, ells, declared_divergent, seed, out } => {
            let g_spec = parse_group(&group, d)?;
            let h1_spec = parse_group(&h1, d)?;
            let h2_spec = parse_group(&h2, d)?;
            let ells: Vec<usize> = parse_i64_list(&ells)?
                .into_iter()
                .map(|e| {
                    usize::try_from(e)
                        .map_err(|_| Error::Invalid(format!("negative block length {e}")))
                })
                .collect::<Result<_, _>>()?;
            let word = build_p_word(l1, l2, &ells)?;
            let g = build_p_ready(&word, &h1_spec, &h2_spec, &g_spec, declared_divergent)?;
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "p-ready-build", "d": d, "G": group, "H1": h1, "H2": h2,
                    "l1": l1, "l2": l2, "ells": ells, "declared_divergent": declared_divergent,
                })),
                "p_word": word.symbols,
                "gsequence": g.to_json(),
                "accumulation": accumulation_json(&accumulation_class(&g)),
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::ChamanaraClassify { gseq, k, horizon, seed, out } => {
            let g = GSequence::from_json(&load_json(&gseq)?)?;
            let k = k.unwrap_or_else(|| g.window_end() + 1);
            let devious = is_devious(&g).map(|r| {
                json!({
                    "tail_start": r.tail_start,
                    "H": r.subgroup.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "connected": r.connected,
                })
            });
            let cocycle = to_skew(&g, k, horizon);
            let blocks = fiber_invariant_sets(&cocycle);
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "chamanara-classify", "k": k, "horizon": horizon,
                })),
                "devious": devious,
                "accumulation": accumulation_json(&accumulation_class(&g)),
                "skew_cocycle": cocycle.psi.to_json(),
                "fiber_blocks": blocks,
                "skew_certificate": if blocks.len() > 1 {
                    "NON-ERGODIC CERTIFICATE"
                } else {
                    "NO STRUCTURAL OBSTRUCTION"
                },
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::LadderAct { hom, gen, m, seed, out } => {
            let h = Z2Hom::from_json(&load_json(&hom)?)?;
            let result_hom = match gen.as_str() {
                "psi" | "rho" => {
                    let g = if gen == "psi" { Generator::Psi } else { Generator::Rho };
                    if m < 0 {
                        return Err(Error::Invalid(
                            "psi and rho are involutions; use m ≥ 0".into(),
                        ));
                    }
                    let mut cur = h.clone();
                    for _ in 0..m {
                        cur = generator_action(&cur, g);
                    }
                    cur
                }
                "tau" => tau_star(&h, m),
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown generator {other:?}; expected psi, rho, or tau"
                    )))
                }
            };
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "ladder-act", "gen": gen, "m": m, "hom": h.to_json(),
                })),
                "result": result_hom.to_json(),
                "proximity": proximity(&result_hom),
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::ZSolve { f_support, k_max, horizon, seed, out } => {
            let support = parse_i64_list(&f_support)?;
            if support.is_empty() {
                return Err(Error::Invalid("f must not be identically zero".into()));
            }
            let k_hi = k_max.unwrap_or_else(|| *support.iter().max().unwrap());
            let mut f = BTreeMap::new();
            for i in 2..=k_hi {
                f.insert(i, support.contains(&i));
            }
            for &i in &support {
                if i < 2 || i > k_hi {
                    return Err(Error::Invalid(format!(
                        "prescribed index {i} outside 2..={k_hi}"
                    )));
                }
            }
            let h = z_solve(&f, horizon)?;
            // verification trace from the independent iteration path
            let mut trace = Vec::new();
            let mut cur = h.clone();
            let k0 = proximity(&h).expect("solution is nonzero");
            for m in 0..=horizon as i64 {
                trace.push(json!({
                    "step": m,
                    "proximity": proximity(&cur),
                    "in_cylinder": cylinder_member(&cur, k0 + m)?,
                }));
                cur = tau_star(&cur, 1);
            }
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "z-solve", "f_support": support, "k_max": k_hi,
                    "horizon": horizon,
                })),
                "hom": h.to_json(),
                "tower_trace": trace,
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::LadderLimit { hom, horizon, seed, out } => {
            let h = Z2Hom::from_json(&load_json(&hom)?)?;
            let verdict = limits_to_zero(&h, horizon);
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "ladder-limit", "horizon": horizon, "hom": h.to_json(),
                })),
                "verdict": limit_verdict_json(&verdict),
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::CodingWalk { endpoint, steps, seed, out } => {
            let slope = parse_endpoint(&endpoint)?;
            let walk = coding_walk(&slope, steps)?;
            let mut csv = String::new();
            csv.push_str(&format!(
                "# tool_version={}\n# seed={seed}\n# endpoint={}\n# steps={steps}\n# termination={:?}\n# divergent_into_cusp={}\n",
                env!("CARGO_PKG_VERSION"),
                endpoint.trim(),
                walk.termination,
                walk.divergent_into_cusp,
            ));
            csv.push_str("k,n_k\n");
            for (k, n) in walk.entries.iter().enumerate() {
                csv.push_str(&format!("{k},{n}\n"));
            }
            emit(out.as_deref(), &csv)
        }

        Cmd::Classify { walk, hom, horizon, recurrence_threshold, certified_v, seed, out } => {
            let w = read_walk_csv(&walk)?;
            let h = Z2Hom::from_json(&load_json(&hom)?)?;
            let mut ws = walk_summary(&w, recurrence_threshold)?;
            if let Some(v) = &certified_v {
                ws.certified_v = Some(parse_rational_arg(v)?);
            }
            let report = classify_cover(&ws, &h, horizon)?;
            let verdict_name = match report.verdict {
                CoverVerdict::UniquelyErgodicRecurrent => "uniquely-ergodic (recurrent walk)",
                CoverVerdict::UniquelyErgodicFastGrowth => "uniquely-ergodic (fast growth)",
                CoverVerdict::NonErgodicSlowGrowth => "non-ergodic (slow growth, tau-limit certified)",
                CoverVerdict::ErgodicSlowGrowth => "ergodic (slow growth, proximity returns)",
                CoverVerdict::Undetermined => "undetermined",
            };
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "classify", "walk": walk.display().to_string(),
                    "horizon": horizon, "recurrence_threshold": recurrence_threshold,
                    "certified_v": certified_v,
                })),
                "branch": report.branch,
                "verdict": verdict_name,
                "v_estimate": report.v_estimate,
                "window": { "lo_abs": report.window.0, "hi_abs": report.window.1 },
                "tau_limit_verdict": report.tau_limit.as_ref().map(limit_verdict_json),
                "flags": report.flags,
                "summary": summary_json(&ws),
            });
            emit_json(out.as_deref(), &result)
        }

        Cmd::MsSeries { walk, counts, j, n_max, seed, out } => {
            let visit_counts: BTreeMap<i64, u64> = match (&walk, &counts) {
                (Some(path), None) => {
                    let w = read_walk_csv(path)?;
                    let ws = walk_summary(&w, u64::MAX)?;
                    ws.visit_counts
                }
                (None, Some(list)) => parse_i64_list(list)?
                    .into_iter()
                    .enumerate()
                    .map(|(n, c)| {
                        u64::try_from(c)
                            .map(|c| (n as i64, c))
                            .map_err(|_| Error::Invalid(format!("negative count {c}")))
                    })
                    .collect::<Result<_, _>>()?,
                _ => {
                    return Err(Error::Invalid(
                        "provide exactly one of --walk and --counts".into(),
                    ))
                }
            };
            let top = visit_counts.keys().copied().max().unwrap_or(0).max(0);
            let n_max = n_max.unwrap_or(top);
            let report = ms_series(&visit_counts, j, n_max)?;
            let trend = match report.trend {
                coverflow::geodesic::SeriesTrend::ConvergentTrend => "CONVERGENT-TREND",
                coverflow::geodesic::SeriesTrend::DivergentTrend => "DIVERGENT-TREND",
                coverflow::geodesic::SeriesTrend::Inconclusive => "INCONCLUSIVE",
            };
            let result = json!({
                "meta": meta(seed, json!({
                    "command": "ms-series", "j": j, "n_max": n_max,
                    "counts_source": if walk.is_some() { "walk" } else { "inline" },
                })),
                "partial_sums": report
                    .partial_sums
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>(),
                "partial_sums_f64": report
                    .partial_sums
                    .iter()
                    .map(GoldenScalar::to_f64)
                    .collect::<Vec<_>>(),
                "trend": trend,
            });
            emit_json(out.as_deref(), &result)
        }
    }
}
