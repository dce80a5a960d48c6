//! Subcommand drivers. Each returns data; printing and exit codes live in `main`.

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};
use stratcomm::engine::{brute_force_min_error, type_level_best, CountEstimate, Engine, EngineRegistry, Game, RateEstimate, TypeEngine};
use stratcomm::model::{enumerate_types, type_class_size, Distribution, TypeVector, DEFAULT_CAP};
use stratcomm::rate::{classify_region, Endpoint, RegionReport, StrongConverse};
use stratcomm::rational::{format_rational, format_real, int, log2_biguint, rat, Rat};
use stratcomm::strategy::{neighbour_strategy, AnchorRule, FamilyRegistry, Image, ReceiverStrategy};
use stratcomm::utility::{gamma, gamma_sign, prop1_holds, UtilityMatrix, GAMMA_ENUMERATION_LIMIT};

use crate::config::{Experiment, ExperimentConfig, Ratio, StrategyConfig};
use crate::error::{CliError, CliResult};
use crate::report::{Check, Report, Row};

fn endpoint_json(e: &Option<Endpoint>) -> Value {
    match e {
        None => Value::Null,
        Some(e) => json!({ "bound": e.bound.to_string(), "clause": e.clause }),
    }
}

pub fn region_json(r: &RegionReport) -> Value {
    let converse = match &r.strong_converse {
        None => Value::Null,
        Some(StrongConverse::Unconditional) => json!({ "kind": "unconditional" }),
        Some(StrongConverse::AboveRate { rate, precondition_holds }) => {
            json!({ "kind": "above_rate", "rate": format_real(*rate), "precondition_holds": precondition_holds })
        }
    };
    json!({
        "emptiness": r.emptiness.label(),
        "gamma_sign": r.gamma_sign,
        "r_inf": endpoint_json(&r.r_inf),
        "r_sup": endpoint_json(&r.r_sup),
        "capacity": format_real(r.capacity),
        "strong_converse": converse,
        "relabelled": r.relabelled,
    })
}

/// Cycle analysis and region classification for the configured utility and source.
pub fn analyze_utility(exp: &Experiment) -> CliResult<Value> {
    let u = &exp.game.utility;
    let q = u.q();
    let gamma_json = if q <= GAMMA_ENUMERATION_LIMIT {
        let g = gamma(u)?;
        json!({ "value": format_rational(&g.value), "witness": g.witness, "cycles": g.cycles })
    } else {
        Value::Null
    };
    let sign = gamma_sign(u);
    let prop1 = prop1_holds(u);
    let region = classify_region(u, &exp.game.source, &exp.config.threshold.0)?;
    Ok(json!({
        "config": serde_json::to_value(&exp.config)?,
        "gamma": gamma_json,
        "gamma_sign": { "label": sign.label(), "cycle": sign.cycle() },
        "prop1": {
            "holds": prop1.holds(),
            "acyclic_clause": prop1.acyclic_clause(),
            "magnitude_clause": prop1.magnitude_clause,
            "nonnegative_cycle": prop1.nonnegative_cycle,
            "failed_clauses": prop1.failed_clauses(),
        },
        "binary_sum": (q == 2).then(|| format_rational(&(u.get(0, 1) + u.get(1, 0)))),
        "region": region_json(&region),
    }))
}

/// Evaluates the configured strategy family at every block length with every listed engine.
pub fn simulate(exp: &Experiment) -> CliResult<Vec<Row>> {
    let engines = EngineRegistry::default();
    let families = FamilyRegistry::default();
    let family = families.get(&exp.family)?;
    let q = exp.game.q();
    let mut rows = Vec::new();
    for n in exp.config.n_min..=exp.config.n_max {
        let g = ReceiverStrategy::new(n, q, family.image(&exp.input, n)?, exp.anchor.clone())?;
        for name in &exp.engines {
            let out = engines.get(name)?.evaluate(&exp.game, &g)?;
            rows.push(Row::new(exp.strategy_id(), &out));
        }
    }
    Ok(rows)
}

/// Minimum pessimistic error over all decoders, per block length.
pub fn brute_force(exp: &Experiment) -> CliResult<Value> {
    let mut results = Vec::new();
    for n in exp.config.n_min..=exp.config.n_max {
        let r = brute_force_min_error(n, &exp.game.source, &exp.game.utility, &exp.game.threshold)?;
        let members: Vec<String> = r.strategy.members(DEFAULT_CAP)?.iter().map(|s| s.to_string()).collect();
        results.push(json!({
            "n": n,
            "min_error": format_rational(&r.error),
            "min_error_real": format_real(stratcomm::rational::to_f64(&r.error)),
            "images_searched": r.images_searched,
            "image": members,
        }));
    }
    Ok(json!({ "config": serde_json::to_value(&exp.config)?, "results": results }))
}

pub const EXAMPLE2_N_MAX: usize = 10;
pub const EXAMPLE2_STRATEGIES: usize = 4;

/// The fixed parameters of the growing-image experiment, in configuration form.
pub fn example2_config(engines: &str) -> ExperimentConfig {
    let r = |a, b| Ratio::new(a, b);
    ExperimentConfig {
        alphabet: Some(2),
        source: vec![r(3, 10), r(7, 10)],
        utility: vec![vec![r(0, 1), r(1, 1)], vec![r(-2, 1), r(0, 1)]],
        normalize: false,
        threshold: r(0, 1),
        slack: r(1, 5),
        n_min: 1,
        n_max: EXAMPLE2_N_MAX,
        strategy: StrategyConfig { kind: "neighbour_classes".into(), ..Default::default() },
        tie: "worst_case".into(),
        engine: engines.into(),
        cap: stratcomm::engine::SEQUENCE_CAP,
        threads: None,
        out: None,
    }
}

/// Decoders keeping one to four neighbouring type classes, evaluated at `n = 1..=10`.
pub fn example2(engines: &str) -> CliResult<(ExperimentConfig, Vec<Row>)> {
    let cfg = example2_config(engines);
    let exp = cfg.clone().resolve()?;
    let registry = EngineRegistry::default();
    let mut rows = Vec::new();
    for n in 1..=EXAMPLE2_N_MAX {
        for i in 1..=EXAMPLE2_STRATEGIES {
            let g = neighbour_strategy(&rat(3, 10), n, i)?;
            for name in &exp.engines {
                rows.push(Row::new(format!("g{i}"), &registry.get(name)?.evaluate(&exp.game, &g)?));
            }
        }
    }
    Ok((cfg, rows))
}

/// The qualitative facts the growing-image experiment is meant to show.
pub fn example2_checks(rows: &[Row]) -> Report {
    let engines: Vec<&str> = {
        let mut e: Vec<&str> = rows.iter().map(|r| r.engine.as_str()).collect();
        e.dedup();
        e.sort();
        e.dedup();
        e
    };
    let first = engines.first().copied().unwrap_or("");
    let get = |n: usize, i: usize| rows.iter().find(|r| r.n == n && r.strategy_id == format!("g{i}") && r.engine == first);
    let mut checks = Vec::new();

    let unit = rows.iter().all(|r| {
        let ok = |p: &Rat| *p >= int(0) && *p <= int(1);
        ok(&r.strategic) && ok(&r.cooperative)
    });
    checks.push(Check::new("probabilities_in_unit_interval", unit, format!("{} rows", rows.len())));

    if engines.len() > 1 {
        let mut mismatches = Vec::new();
        for r in rows {
            for s in rows.iter().filter(|s| s.n == r.n && s.strategy_id == r.strategy_id && s.engine != r.engine) {
                if s.strategic != r.strategic || s.cooperative != r.cooperative {
                    mismatches.push(format!("n={} {}", r.n, r.strategy_id));
                }
            }
        }
        checks.push(Check::new(
            "engines_agree_exactly",
            mismatches.is_empty(),
            if mismatches.is_empty() { format!("engines {}", engines.join(",")) } else { mismatches.join("; ") },
        ));
    }

    if let (Some(a), Some(b)) = (get(4, 1), get(5, 1)) {
        checks.push(Check::new(
            "jump_from_n4_to_n5",
            b.strategic > a.strategic,
            format!("g1 strategic {} -> {}", format_real(stratcomm::rational::to_f64(&a.strategic)), format_real(stratcomm::rational::to_f64(&b.strategic))),
        ));
    }

    let same: Vec<usize> = (1..=EXAMPLE2_N_MAX).filter(|&n| get(n, 1).is_some_and(|r| r.strategic != r.cooperative)).collect();
    checks.push(Check::new("g1_strategic_equals_cooperative", same.is_empty(), format!("differs at n = {same:?}")));

    let mut coop = Vec::new();
    let mut strat = Vec::new();
    for n in 5..=EXAMPLE2_N_MAX {
        for i in 1..EXAMPLE2_STRATEGIES {
            let (Some(a), Some(b)) = (get(n, i), get(n, i + 1)) else { continue };
            if a.cooperative > b.cooperative {
                coop.push(format!("n={n}: g{i} > g{}", i + 1));
            }
            if a.strategic < b.strategic {
                strat.push(format!(
                    "n={n}: g{i} {} < g{} {}",
                    format_real(stratcomm::rational::to_f64(&a.strategic)),
                    i + 1,
                    format_real(stratcomm::rational::to_f64(&b.strategic))
                ));
            }
        }
    }
    let detail = |v: &[String]| if v.is_empty() { "holds for n >= 5".to_string() } else { v.join("; ") };
    checks.push(Check::new("cooperative_increasing_in_index", coop.is_empty(), detail(&coop)));
    checks.push(Check::new("strategic_decreasing_in_index", strat.is_empty(), detail(&strat)));
    Report::new("example2", checks)
}

pub const EXAMPLE3_N: usize = 36;

#[derive(Clone, Debug, Serialize)]
pub struct Example3Report {
    pub n: usize,
    pub delta: String,
    pub source: Vec<String>,
    pub image_classes: Vec<Vec<usize>>,
    pub types_checked: usize,
    pub recovered_types: Vec<Vec<usize>>,
    pub reconstructions: String,
    pub rate_bits: String,
    pub image_rate_bits: String,
    pub rate_bound_comparator_bits: String,
    pub gap_block_length: Option<usize>,
    pub report: Report,
}

pub fn example3_utility() -> UtilityMatrix {
    let rows = [[0, -2, -13, -18], [1, 0, -13, -18], [12, 1, 0, -18], [5, 5, 5, 0]];
    UtilityMatrix::new(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).expect("4x4 matrix")
}

/// Largest `K` tried when searching for `n = 12K` with `|U_(0,K/3,K/3,K/3)| > 2.73^n`.
pub const GAP_SEARCH_BLOCKS: usize = 20;

/// Smallest `n = 12K` whose thirds class strictly outnumbers `2.73^n`, compared in integers.
pub fn first_gap_block_length(max_blocks: usize) -> Option<usize> {
    (1..=max_blocks).map(|k| 12 * k).find(|&n| {
        let m = n / 3;
        let size = type_class_size(&tv(&[0, m, m, m]));
        size * BigUint::from(100u32).pow(n as u32) > BigUint::from(273u32).pow(n as u32)
    })
}

fn tv(c: &[usize]) -> TypeVector {
    TypeVector::new(c.to_vec()).expect("valid type")
}

/// The rate-gap construction at `n = 36` with recovery slack `delta`, checked claim by claim.
pub fn example3(delta: &Rat) -> CliResult<Example3Report> {
    let n = EXAMPLE3_N;
    let u = example3_utility();
    let p = Distribution::new(vec![rat(1, 36), rat(1, 36), rat(1, 36), rat(11, 12)])?;
    let typical = tv(&[1, 1, 1, 33]);
    let thirds = tv(&[0, 12, 12, 12]);
    let hat = tv(&[12, 12, 0, 12]);
    let game = Game::pessimistic(u.clone(), p.clone(), delta.clone())?;
    let g = ReceiverStrategy::new(n, 4, Image::type_classes(vec![typical.clone(), thirds.clone()]), AnchorRule::LexMin)?;
    let out = TypeEngine.evaluate(&game, &g)?;
    let recovered = out.recovered_types.clone().unwrap_or_default();
    let mut checks = Vec::new();

    let minority: Vec<TypeVector> = enumerate_types(n, 4, DEFAULT_CAP)?.into_iter().filter(|t| 3 * t.counts()[3] <= 2 * n).collect();
    let leaked: Vec<String> = minority.iter().filter(|t| recovered.contains(t)).map(|t| t.to_string()).collect();
    checks.push(Check::new(
        "minority_types_never_recovered",
        leaked.is_empty(),
        format!("{} types with P(3) <= 2/3 checked; recovered: {leaked:?}", minority.len()),
    ));

    let own = type_level_best(&typical, &typical, &u)?;
    let identity = own.unique && own.witness.is_diagonal() && own.utility == int(0) && recovered.contains(&typical);
    checks.push(Check::new(
        "identity_on_typical_class",
        identity,
        format!("unique={} diagonal={} utility={}", own.unique, own.witness.is_diagonal(), format_rational(&own.utility)),
    ));

    let to_thirds = type_level_best(&hat, &thirds, &u)?;
    let to_typical = type_level_best(&hat, &typical, &u)?;
    checks.push(Check::new(
        "hat_type_prefers_thirds_class",
        to_thirds.utility == int(4) && to_thirds.utility > to_typical.utility,
        format!(
            "best over thirds class {} (W(2,0) = {}), best over typical class {}",
            format_rational(&to_thirds.utility),
            to_thirds.witness.get(2, 0),
            format_rational(&to_typical.utility)
        ),
    ));

    let typical_size = type_class_size(&typical);
    let expected_rate = log2_biguint(&BigUint::from(42840u32)) / n as f64;
    let rate_ok = out.reconstructions == CountEstimate::Exact(typical_size.clone())
        && typical_size == BigUint::from(42840u32)
        && recovered == vec![typical.clone()]
        && matches!(out.rate(), RateEstimate::Exact(r) if (r - expected_rate).abs() <= 1e-9);
    checks.push(Check::new(
        "recovered_reconstructions_are_typical_class",
        rate_ok,
        format!("|A| = {}, rate {} bits (expected log2(42840)/36 = {})", out.reconstructions, out.rate(), format_real(expected_rate)),
    ));

    let thirds_size = type_class_size(&thirds);
    let comparator = 2.73f64.log2();
    let thirds_rate = log2_biguint(&thirds_size) / n as f64;
    let lo = match &out.responses {
        CountEstimate::Exact(c) => c.clone(),
        CountEstimate::Interval { lo, .. } => lo.clone(),
    };
    let image_ok = lo >= thirds_size && log2_biguint(&lo) / n as f64 >= thirds_rate && thirds_rate > comparator;
    let relation = if thirds_rate > comparator { ">" } else { "<=" };
    checks.push(Check::new(
        "reachable_image_rate_exceeds_bound",
        image_ok,
        format!(
            "image rate {}, log2|thirds class|/{n} = {} {relation} log2(2.73) = {}",
            out.image_rate(),
            format_real(thirds_rate),
            format_real(comparator)
        ),
    ));

    let gap_length = first_gap_block_length(GAP_SEARCH_BLOCKS);
    checks.push(Check::new(
        "image_exponent_gap_for_longer_blocks",
        gap_length.is_some() && 3f64.log2() > comparator,
        format!(
            "|thirds class| > 2.73^n first at n = {}; limiting exponent log2(3) = {}",
            gap_length.map_or("none".to_string(), |m| m.to_string()),
            format_real(3f64.log2())
        ),
    ));

    Ok(Example3Report {
        n,
        delta: format_rational(delta),
        source: p.probs().iter().map(format_rational).collect(),
        image_classes: vec![typical.counts().to_vec(), thirds.counts().to_vec()],
        types_checked: minority.len(),
        recovered_types: recovered.iter().map(|t| t.counts().to_vec()).collect(),
        reconstructions: out.reconstructions.to_string(),
        rate_bits: out.rate().to_string(),
        image_rate_bits: out.image_rate().to_string(),
        rate_bound_comparator_bits: format_real(comparator),
        gap_block_length: gap_length,
        report: Report::new("example3", checks),
    })
}

/// Turns failed checks into an error carrying exit code 1.
pub fn require(report: &Report) -> CliResult<()> {
    let failed: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("{}: {}", report.name, failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    #[test]
    fn analyze_known_matrices() {
        let text = r#"{"source": ["1/2", "1/3", "1/6"], "utility": [[0, 1, 1], [-4, 0, 1], [-4, -4, 0]]}"#;
        let v = analyze_utility(&parse(text).unwrap().resolve().unwrap()).unwrap();
        assert_eq!(v["gamma"]["value"], "-2");
        assert_eq!(v["prop1"]["holds"], true);
        assert_eq!(v["region"]["emptiness"], "nonempty");

        let text = r#"{"source": ["1/2", "1/2"], "utility": [[0, 0], [0, 0]]}"#;
        let v = analyze_utility(&parse(text).unwrap().resolve().unwrap()).unwrap();
        assert_eq!(v["gamma"]["value"], "0");
        assert_eq!(v["binary_sum"], "0");
        assert_eq!(v["region"]["emptiness"], "empty");

        let text = r#"{"source": ["1/3", "1/3", "1/3"], "utility": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]}"#;
        let v = analyze_utility(&parse(text).unwrap().resolve().unwrap()).unwrap();
        assert_eq!(v["region"]["emptiness"], "unknown_gamma_zero");
    }

    #[test]
    fn example3_utility_has_gamma_minus_one() {
        assert_eq!(gamma(&example3_utility()).unwrap().value, int(-1));
    }

    #[test]
    fn thirds_class_outgrows_bound_first_at_48() {
        assert_eq!(first_gap_block_length(3), None);
        assert_eq!(first_gap_block_length(GAP_SEARCH_BLOCKS), Some(48));
    }

    #[test]
    fn simulate_runs_every_engine() {
        let text = r#"{"source": ["3/10", "7/10"], "utility": [[0, 1], [-2, 0]], "slack": "1/5",
                       "n_max": 5, "engine": "sequence,type", "strategy": {"kind": "neighbour_classes", "index": 2}}"#;
        let rows = simulate(&parse(text).unwrap().resolve().unwrap()).unwrap();
        assert_eq!(rows.len(), 10);
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].strategic, pair[1].strategic);
            assert_eq!(pair[0].strategy_id, "g2");
        }
    }

    #[test]
    fn brute_force_reports_each_length() {
        let text = r#"{"source": ["1/2", "1/2"], "utility": [[0, 1], [-1, 0]], "n_max": 2}"#;
        let v = brute_force(&parse(text).unwrap().resolve().unwrap()).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), 2);
        assert_ne!(v["results"][1]["min_error"], "0");
    }
}
