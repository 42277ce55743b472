use std::path::Path;

use serde_json::{json, Value};

use super::config::RunConfig;
use super::format::{list, num, num_list, Report};
use super::sweep::{sweep_csv, Axis};
use super::{
    Command, GmodelArgs, LadderArgs, LimitArgs, RstarArgs, SimulateArgs, SpeedArgs, StationaryArgs, SweepArgs,
};
use crate::asymptotics::{g_limit_speed, limit_speed_multi_with, r_star, Alpha, GSpec, JBranch, LimitSpec};
use crate::chain::{level_weights, stationary_bruteforce, BruteForceOptions};
use crate::error::{Error, Result};
use crate::exact::{speed_g, speed_multi};
use crate::model::ThresholdLadder;
use crate::simulate::{estimate_speed, increment_census, run, RNG_ALGORITHM};

const DEFAULT_STEPS: u64 = 1_000_000;
const DEFAULT_REPLICAS: usize = 32;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_BURN_IN: u64 = 100_000;
const DEFAULT_CENSUS_WINDOW: u64 = 1_000;

pub(super) fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Speed(a) => speed(a),
        Command::Limit(a) => limit(a),
        Command::Rstar(a) => rstar(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Gmodel(a) => gmodel(a),
        Command::Stationary(a) => stationary(a),
    }
}

/// JSON number carrying the same 15 significant digits as the text output.
fn jnum(x: f64) -> Value {
    num(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

fn jnums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| jnum(x)).collect())
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn overlay_ladder(cfg: &mut RunConfig, a: LadderArgs) {
    if let Some(n) = a.window {
        cfg.window = Some(super::config::Sizes::One(n));
    }
    if a.thresholds.is_some() {
        cfg.thresholds = a.thresholds;
    }
    if a.probs.is_some() {
        cfg.probs = a.probs;
    }
    if a.relaxed {
        cfg.relaxed = Some(true);
    }
}

fn flag(cfg_value: Option<bool>, flag: bool) -> bool {
    flag || cfg_value.unwrap_or(false)
}

fn ladder_header(report: &mut Report, ladder: &ThresholdLadder) {
    report.kv("N", ladder.window.to_string()).kv("M", list(&ladder.thresholds)).kv("p", num_list(&ladder.probs));
}

fn speed(a: SpeedArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    overlay_ladder(&mut cfg, a.ladder);
    let ladder = cfg.ladder()?;
    let result = speed_multi(&ladder)?;
    let breakdown = flag(cfg.breakdown, a.breakdown);
    let weights = result.band_weights();
    if flag(cfg.json, a.json) {
        let mut v = json!({
            "N": ladder.window,
            "M": ladder.thresholds,
            "p": jnums(&ladder.probs),
            "speed": jnum(result.speed),
        });
        if breakdown {
            v["band_log_mass"] = jnums(&result.band_log_masses);
            v["band_weight"] = jnums(&weights);
            v["band_mean_fraction"] = jnums(&result.band_mean_fraction);
        }
        return Ok(to_json(&v));
    }
    let mut report = Report::default();
    ladder_header(&mut report, &ladder);
    report.kv("speed", num(result.speed));
    if breakdown {
        report.line("band,M_lo,M_hi,p,log_mass,weight,mean_fraction");
        let bands = result.band_log_masses.iter().zip(&weights).zip(&result.band_mean_fraction);
        for (i, ((log_mass, weight), mean)) in bands.enumerate() {
            let r = ladder.band_range(i);
            report.line(format!(
                "{i},{},{},{},{},{},{}",
                r.start,
                r.end - 1,
                num(ladder.probs[i]),
                num(*log_mass),
                num(*weight),
                num(*mean),
            ));
        }
    }
    Ok(report.finish())
}

fn branch_name(b: JBranch) -> &'static str {
    match b {
        JBranch::Interior => "interior",
        JBranch::LowerEdge => "lower_edge",
        JBranch::UpperEdge => "upper_edge",
    }
}

fn alpha_text(a: Alpha) -> String {
    match a {
        Alpha::Finite(x) => num(x),
        Alpha::Infinite => "inf".into(),
    }
}

fn limit(a: LimitArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    if a.probs.is_some() {
        cfg.probs = a.probs;
    }
    if a.fractions.is_some() {
        cfg.fractions = a.fractions;
    }
    if a.offsets.is_some() {
        cfg.offsets = a.offsets;
    }
    if let Some(alpha) = a.alpha {
        cfg.alpha = Some(alpha.into_iter().map(super::config::Scalar::Text).collect());
    }
    if a.relaxed {
        cfg.relaxed = Some(true);
    }
    let fractions = cfg.fractions.clone().ok_or_else(|| Error::Usage("missing --r".into()))?;
    let spec = LimitSpec { probs: cfg.probs()?, fractions, offsets: None, period: None, strictness: cfg.strictness() };
    spec.check()?;
    let spec = match cfg.offsets.clone() {
        Some(c) => spec.with_offsets(c)?,
        None => spec,
    };
    let alphas = cfg.alphas()?;
    let report = limit_speed_multi_with(&spec, alphas.as_deref())?;

    if flag(cfg.json, a.json) {
        let bands: Vec<Value> = report
            .j
            .iter()
            .enumerate()
            .map(|(i, j)| {
                json!({
                    "band": i,
                    "r_lo": jnum(spec.fraction(i)),
                    "r_hi": jnum(spec.fraction(i + 1)),
                    "p": jnum(spec.probs[i]),
                    "log_J": jnum(j.log_j),
                    "branch": branch_name(j.branch),
                    "admissible": j.admissible,
                })
            })
            .collect();
        let mut v = json!({
            "p": jnums(&spec.probs),
            "r": jnums(&spec.fractions),
            "bands": bands,
            "admissible": report.admissible,
            "argmax": report.argmax,
            "limit_speed": jnum(report.limit_speed),
        });
        if report.is_tie() {
            v["alpha"] = Value::Array(report.alphas.iter().map(|&a| Value::String(alpha_text(a))).collect());
        }
        return Ok(to_json(&v));
    }

    let mut out = Report::default();
    out.kv("p", num_list(&spec.probs)).kv("r", num_list(&spec.fractions));
    if let Some(c) = &spec.offsets {
        out.kv("offsets", list(c));
    }
    out.line("band,r_lo,r_hi,p,log_J,branch,admissible");
    for (i, j) in report.j.iter().enumerate() {
        out.line(format!(
            "{i},{},{},{},{},{},{}",
            num(spec.fraction(i)),
            num(spec.fraction(i + 1)),
            num(spec.probs[i]),
            num(j.log_j),
            branch_name(j.branch),
            j.admissible
        ));
    }
    out.kv("admissible", list(&report.admissible)).kv("argmax", list(&report.argmax));
    if report.is_tie() {
        out.kv("alpha", report.alphas.iter().map(|&a| alpha_text(a)).collect::<Vec<_>>().join(","));
    }
    out.kv("limit_speed", num(report.limit_speed));
    Ok(out.finish())
}

fn rstar(a: RstarArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    if a.probs.is_some() {
        cfg.probs = a.probs;
    }
    let p = cfg.probs()?;
    let [p0, p1] = p[..] else {
        return Err(Error::Usage(format!("rstar needs exactly two probabilities, got {}", p.len())));
    };
    let r = r_star(p0, p1)?;
    if flag(cfg.json, a.json) {
        return Ok(to_json(&json!({ "p": jnums(&p), "r_star": jnum(r) })));
    }
    let mut out = Report::default();
    out.kv("p", num_list(&p)).kv("r_star", num(r));
    Ok(out.finish())
}

fn sweep(a: SweepArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    overlay_ladder(&mut cfg, a.ladder);
    if a.fractions.is_some() {
        cfg.fractions = a.fractions;
    }
    if !a.axes.is_empty() {
        cfg.axes = Some(a.axes);
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    let axes = cfg.axes.clone().unwrap_or_default().iter().map(|s| s.parse()).collect::<Result<Vec<Axis>>>()?;
    let csv = sweep_csv(&cfg, &axes, flag(cfg.limit, a.limit))?;
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn simulate(a: SimulateArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    overlay_ladder(&mut cfg, a.ladder);
    use super::config::Count;
    if let Some(s) = a.steps {
        cfg.steps = Some(Count::Int(s));
    }
    if a.replicas.is_some() {
        cfg.replicas = a.replicas;
    }
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if let Some(t) = a.burn_in {
        cfg.burn_in = Some(Count::Int(t));
    }
    if let Some(m) = a.census_window {
        cfg.census_window = Some(Count::Int(m));
    }
    let ladder = cfg.ladder()?;
    let replicas = cfg.replicas.unwrap_or(DEFAULT_REPLICAS);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let json = flag(cfg.json, a.json);

    if flag(cfg.census, a.census) {
        let burn_in = RunConfig::count(cfg.burn_in, DEFAULT_BURN_IN)?;
        let window = RunConfig::count(cfg.census_window, DEFAULT_CENSUS_WINDOW)?;
        let c = increment_census(&ladder, burn_in, window, replicas, seed)?;
        let names: Vec<String> =
            (0..8).map(|idx| (0..3).rev().map(|b| if idx >> b & 1 == 1 { '+' } else { '-' }).collect()).collect();
        if json {
            let patterns: Vec<Value> = (0..8)
                .map(|i| {
                    json!({
                        "pattern": names[i],
                        "count": c.pattern_counts[i],
                        "expected": jnum(c.pattern_expected(i)),
                        "z": jnum(c.pattern_z(i)),
                    })
                })
                .collect();
            return Ok(to_json(&json!({
                "N": ladder.window, "M": ladder.thresholds, "p": jnums(&ladder.probs),
                "burn_in": burn_in, "window": window, "replicas": replicas, "seed": seed, "rng": RNG_ALGORITHM,
                "band": c.band, "expected": jnum(c.expected), "frequency_plus": jnum(c.frequency_plus),
                "z_score": jnum(c.z_score), "pattern_trials": c.pattern_trials, "patterns": patterns,
            })));
        }
        let mut out = Report::default();
        ladder_header(&mut out, &ladder);
        out.kv("burn_in", burn_in.to_string())
            .kv("window", window.to_string())
            .kv("replicas", replicas.to_string())
            .kv("seed", seed.to_string())
            .kv("rng", RNG_ALGORITHM)
            .kv("band", c.band.to_string())
            .kv("expected", num(c.expected))
            .kv("frequency_plus", num(c.frequency_plus))
            .kv("z_score", num(c.z_score))
            .kv("pattern_trials", c.pattern_trials.to_string())
            .line("pattern,count,frequency,expected,z");
        for (i, name) in names.iter().enumerate() {
            out.line(format!(
                "{name},{},{},{},{}",
                c.pattern_counts[i],
                num(c.pattern_counts[i] as f64 / c.pattern_trials as f64),
                num(c.pattern_expected(i)),
                num(c.pattern_z(i))
            ));
        }
        return Ok(out.finish());
    }

    let steps = RunConfig::count(cfg.steps, DEFAULT_STEPS)?;
    let result =
        if replicas == 1 { run(&ladder, steps, seed)? } else { estimate_speed(&ladder, steps, replicas, seed)? };
    let exact = speed_multi(&ladder)?.speed;
    let z = result.stderr.map(|se| (result.empirical_speed - exact) / se);
    if json {
        return Ok(to_json(&json!({
            "N": ladder.window, "M": ladder.thresholds, "p": jnums(&ladder.probs),
            "steps": steps, "replicas": replicas, "seed": seed, "rng": RNG_ALGORITHM,
            "empirical_speed": jnum(result.empirical_speed),
            "stderr": result.stderr.map_or(Value::Null, jnum),
            "exact_speed": jnum(exact),
            "z_score": z.map_or(Value::Null, jnum),
        })));
    }
    let mut out = Report::default();
    ladder_header(&mut out, &ladder);
    out.kv("steps", steps.to_string())
        .kv("replicas", replicas.to_string())
        .kv("seed", seed.to_string())
        .kv("rng", RNG_ALGORITHM)
        .kv("empirical_speed", num(result.empirical_speed));
    if let Some(se) = result.stderr {
        out.kv("stderr", num(se));
    }
    out.kv("exact_speed", num(exact));
    if let Some(z) = z {
        out.kv("z_score", num(z));
    }
    Ok(out.finish())
}

/// Reads a response table: header row, then `x,G` pairs.
pub fn read_g_table(path: &Path) -> Result<GSpec> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Usage(format!("{}: row {} needs two numeric columns", path.display(), line + 2)))
        };
        knots.push(field(0)?);
        values.push(field(1)?);
    }
    GSpec::table(knots, values)
}

fn gmodel(a: GmodelArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    if let Some(l) = a.linear {
        let [r0, r1] = l[..] else {
            return Err(Error::Usage("--linear takes rho0,rho1".into()));
        };
        cfg.linear = Some([r0, r1]);
        cfg.table = None;
    }
    if a.table.is_some() {
        cfg.table = a.table;
        cfg.linear = None;
    }
    if let Some(w) = a.windows {
        cfg.window = Some(super::config::Sizes::Many(w));
    }
    let (g, label) = match (&cfg.linear, &cfg.table) {
        (Some([r0, r1]), None) => (GSpec::linear(*r0, *r1)?, format!("linear {},{}", num(*r0), num(*r1))),
        (None, Some(path)) => (read_g_table(path)?, format!("table {}", path.display())),
        (Some(_), Some(_)) => return Err(Error::Usage("give either --linear or --table, not both".into())),
        (None, None) => return Err(Error::Usage("missing --linear or --table".into())),
    };
    let lim = g_limit_speed(&g)?;
    let windows = cfg.window_list();
    let speeds = windows.iter().map(|&n| speed_g(n, &g)).collect::<Result<Vec<_>>>()?;

    if flag(cfg.json, a.json) {
        let fixed: Vec<Value> = lim
            .fixed_points
            .iter()
            .map(|fp| json!({ "p": jnum(fp.p), "potential": jnum(fp.potential), "attracting": fp.attracting }))
            .collect();
        let finite: Vec<Value> =
            windows.iter().zip(&speeds).map(|(&n, &s)| json!({ "N": n, "speed": jnum(s) })).collect();
        return Ok(to_json(&json!({
            "G": label, "fixed_points": fixed, "p_star": jnum(lim.p_star),
            "limit_speed": jnum(lim.speed), "finite": finite,
        })));
    }
    let mut out = Report::default();
    out.kv("G", label).line("fixed_point,potential,attracting");
    for fp in &lim.fixed_points {
        out.line(format!("{},{},{}", num(fp.p), num(fp.potential), fp.attracting));
    }
    out.kv("p_star", num(lim.p_star)).kv("limit_speed", num(lim.speed));
    if !windows.is_empty() {
        out.line("N,speed,gap");
        for (n, s) in windows.iter().zip(&speeds) {
            out.line(format!("{n},{},{}", num(*s), num(s - lim.speed)));
        }
    }
    Ok(out.finish())
}

fn stationary(a: StationaryArgs) -> Result<String> {
    let mut cfg = RunConfig::load(a.config.config.as_deref())?;
    overlay_ladder(&mut cfg, a.ladder);
    let ladder = cfg.ladder()?;
    let levels = level_weights(&ladder)?;
    let mut out = Report::default();
    ladder_header(&mut out, &ladder);
    out.kv("log_C", num(levels.log_c)).line("k,log_alpha,state_probability,level_mass");
    for k in 0..=ladder.window {
        out.line(format!(
            "{k},{},{},{}",
            num(levels.log_alpha[k as usize]),
            num(levels.state_probability(k)),
            num(levels.level_mass(k))
        ));
    }
    if ladder.window <= BruteForceOptions::default().max_window {
        let full = levels.expand()?;
        let brute = stationary_bruteforce(&ladder)?;
        let gap = full.probs.iter().zip(&brute.measure.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.kv("formula_residual", num(crate::chain::stationarity_residual(&ladder, &full.probs)?))
            .kv("bruteforce_residual", num(brute.residual))
            .kv("max_abs_difference", num(gap));
    }
    Ok(out.finish())
}
