use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use stbc_core::decoder::{ColumnOrder, DecoderKind};
use stbc_core::dmt::{self, KktProblem};
use stbc_core::nvd::{self, Criterion};
use stbc_core::report::{self, csv_body, csv_document};
use stbc_core::simulator::{self, OutagePoint, RateSchedule, SimJob};
use stbc_core::stbc::{catalog_entries, code_by_name, Alphabet, CatalogEntry};
use stbc_core::{db_to_linear, tol, LinearStbc, SchemeConfig};

use crate::args::*;
use crate::config::{Config, DEFAULT_SEED};

const TOOL: &str = "stbc-lab";
const VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_WINDOW: f64 = 0.5;
const DEFAULT_RESTARTS: usize = 8;
const OFFSET_NOTE: &str = "o(log SNR) rate and diversity terms are taken as 0";

struct Ctx {
    seed: u64,
    config: Config,
}

pub fn run(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.seed()?.unwrap_or(DEFAULT_SEED),
    };
    if let Some(t) = cli.threads.or(config.threads()?) {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("starting the worker pool")?;
    }
    let ctx = Ctx { seed, config };
    match cli.cmd {
        Cmd::Codes(CodesCmd::List { json }) => codes_list(json),
        Cmd::Codes(CodesCmd::Info { name, json }) => codes_info(&name, json),
        Cmd::Mindet(a) => mindet(&ctx, ctx.config.merge(&["mindet"], a)?),
        Cmd::Criterion(a) => criterion(&ctx, ctx.config.merge(&["criterion"], a)?),
        Cmd::Simulate(SimulateCmd::Pe(a)) => simulate_pe(&ctx, ctx.config.merge(&["simulate", "pe"], a)?),
        Cmd::Simulate(SimulateCmd::Outage(a)) => simulate_outage(&ctx, ctx.config.merge(&["simulate", "outage"], a)?),
        Cmd::Dmt(DmtCmd::Estimate(a)) => dmt_estimate(&ctx, ctx.config.merge(&["dmt", "estimate"], a)?),
        Cmd::Dmt(DmtCmd::Optimal(a)) => dmt_optimal(&ctx, ctx.config.merge(&["dmt", "optimal"], a)?),
        Cmd::Dmt(DmtCmd::Kkt(a)) => dmt_kkt(&ctx, ctx.config.merge(&["dmt", "kkt"], a)?),
        Cmd::Dmt(DmtCmd::Exponent(a)) => dmt_exponent(&ctx, ctx.config.merge(&["dmt", "exponent"], a)?),
    }
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing {name} (give it on the command line or in the config file)"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => report::write_atomic(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope(seed: u64, config: &impl Serialize, results: Value) -> Result<String> {
    let v = json!({
        "tool": TOOL,
        "version": VERSION,
        "seed": seed,
        "config": config,
        "results": results,
    });
    Ok(report::to_json(&v)?)
}

fn csv_meta(seed: u64, config: &impl Serialize) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("tool", TOOL.to_string()),
        ("version", VERSION.to_string()),
        ("seed", seed.to_string()),
        ("config", serde_json::to_string(config)?),
    ])
}

/// `start:step:stop`, a comma-separated list, or a single value, in dB.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t.trim().parse().with_context(|| format!("bad number '{t}' in SNR grid '{s}'"))?;
        if !v.is_finite() {
            bail!("SNR grid '{s}' contains a non-finite value");
        }
        Ok(v)
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if h <= 0.0 || b < a {
                bail!("SNR grid '{s}' needs a positive step and stop >= start");
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => bail!("SNR grid '{s}' must be start:step:stop or a comma-separated list"),
    }
}

/// A catalog name, or a path to a JSON code record.
fn load_code(spec: &str) -> Result<LinearStbc> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let code: LinearStbc =
            serde_json::from_str(&text).with_context(|| format!("parsing code file {}", path.display()))?;
        return Ok(code);
    }
    Ok(code_by_name(spec)?)
}

fn code_details(code: &LinearStbc) -> Value {
    let g = code.generator_matrix();
    json!({
        "n_t": code.n_t(),
        "t": code.t(),
        "k": code.k(),
        "real_dim": code.dim(),
        "code_rate": code.code_rate().to_string(),
        "generator_rank": g.rank,
        "alphabet": match code.alphabet() {
            Alphabet::Pam => "pam",
            Alphabet::Explicit(_) => "explicit",
        },
    })
}

fn entry_json(e: &CatalogEntry) -> Value {
    json!({
        "name": e.name,
        "description": e.description,
        "n_t": e.n_t,
        "t": e.t,
        "code_rate": e.code_rate,
        "dmt_optimal_nr": e.dmt_optimal_nr,
        "constellation": e.constellation,
        "builtin": e.code().is_some(),
    })
}

fn codes_list(as_json: bool) -> Result<()> {
    let entries = catalog_entries();
    if as_json {
        let v: Vec<Value> = entries.iter().map(entry_json).collect();
        return emit(None, &report::to_json(&v)?);
    }
    let mut out = format!(
        "{:<20} {:<8} {:<8} {:<10} {:<12} {:<12} {}\n",
        "name", "n_t", "T", "rate", "optimal n_r", "signal set", "built-in"
    );
    for e in &entries {
        let n_t = e.n_t.replace(", ", ",");
        out.push_str(&format!(
            "{:<20} {:<8} {:<8} {:<10} {:<12} {:<12} {}\n",
            e.name,
            n_t,
            e.t,
            e.code_rate,
            e.dmt_optimal_nr,
            e.constellation,
            if e.code().is_some() { "yes" } else { "no" }
        ));
    }
    emit(None, &out)
}

fn codes_info(name: &str, as_json: bool) -> Result<()> {
    let entries = catalog_entries();
    let (mut info, code) = match entries.iter().find(|e| e.name == name) {
        Some(e) => (entry_json(e), e.code().cloned()),
        None => {
            let code = load_code(name)?;
            (json!({ "name": code.name(), "builtin": true }), Some(code))
        }
    };
    if let (Some(code), Value::Object(map)) = (code, &mut info) {
        if let Value::Object(d) = code_details(&code) {
            map.extend(d);
        }
    }
    if as_json {
        return emit(None, &report::to_json(&info)?);
    }
    let mut out = String::new();
    if let Value::Object(map) = &info {
        for (k, v) in map {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {v}\n"));
        }
    }
    emit(None, &out)
}

fn mindet(ctx: &Ctx, a: MindetArgs) -> Result<()> {
    let code = load_code(need(a.code.as_deref(), "the code name")?)?;
    let cap = a.cap.map(u128::from).unwrap_or(tol::ENUMERATION_CAP);
    let rep = match (a.m, a.integer) {
        (Some(m), None) => nvd::min_det_code_capped(&code, m, cap)?,
        (None, Some(b)) => match a.random {
            Some(n) => nvd::min_det_z_random(&code, b, n, ctx.seed)?,
            None => nvd::min_det_z_capped(&code, b, cap)?,
        },
        (Some(_), Some(_)) => bail!("--M and --integer are mutually exclusive"),
        (None, None) => bail!("give --M <M> for the finite code or --integer <B> for the integer design"),
    };
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, serde_json::to_value(&rep)?)?)
}

fn criterion(ctx: &Ctx, a: CriterionArgs) -> Result<()> {
    let code = load_code(need(a.code.as_deref(), "the code name")?)?;
    let n_r = need(a.nr, "--nr")?;
    let which: Vec<Criterion> = match a.which.as_deref().unwrap_or("enhanced") {
        "both" => vec![Criterion::Elia, Criterion::Enhanced],
        s => vec![s.parse()?],
    };
    let bound = a.bound.unwrap_or(nvd::DEFAULT_BOUND);
    let grid = match a.snr.as_deref() {
        Some(s) => parse_grid(s)?,
        None => nvd::criterion_grid_db(),
    };
    let rate = code.code_rate().as_f64();
    let rs: Vec<f64> = match a.r {
        Some(r) => vec![r],
        None => (0..).map(|i| i as f64 / 10.0).take_while(|r| *r <= rate + 1e-9).collect(),
    };
    let (c0, search) = nvd::pam_nvd_constant(&code, bound)?;
    let witness = search.is_zero().then(|| search.argmin.clone());
    let mut verdicts = Vec::new();
    for &r in &rs {
        let scheme = SchemeConfig::new(code.clone(), r, grid.clone())?;
        for &w in &which {
            verdicts.push(nvd::criterion_check(&scheme, n_r, w, c0, witness.clone())?);
        }
    }
    let results = json!({
        "nvd_constant": c0,
        "search": search,
        "verdicts": verdicts,
    });
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, results)?)
}

fn slope_json(fit: stbc_core::Result<stbc_core::stats::LineFit>) -> Value {
    match fit {
        Ok(f) => json!({ "value": f.slope, "stderr": f.slope_stderr, "intercept": f.intercept }),
        Err(e) => json!({ "value": null, "reason": e.to_string() }),
    }
}

fn optimal_at(n_t: usize, n_r: usize, r: f64) -> Value {
    match dmt::optimal_dmt(n_t, n_r).and_then(|c| c.eval(r)) {
        Ok(d) => json!(d),
        Err(_) => Value::Null,
    }
}

/// Writes the CSV and the JSON summary. Without `--summary` the summary goes
/// to stdout when the CSV has its own file.
fn write_sim(
    seed: u64,
    config: &impl Serialize,
    body: &str,
    out: Option<&PathBuf>,
    summary_path: Option<&PathBuf>,
    summary: Value,
) -> Result<()> {
    let doc = csv_document(&csv_meta(seed, config)?, body);
    emit(out.map(|p| p.as_path()), &doc)?;
    let text = envelope(seed, config, summary)?;
    match (summary_path, out) {
        (Some(p), _) => emit(Some(p), &text),
        (None, Some(_)) => emit(None, &text),
        (None, None) => Ok(()),
    }
}

fn simulate_pe(ctx: &Ctx, a: PeArgs) -> Result<()> {
    let code = load_code(need(a.code.as_deref(), "--code")?)?;
    let n_r = need(a.nr, "--nr")?;
    let grid = parse_grid(need(a.snr.as_deref(), "--snr")?)?;
    let r = a.r.unwrap_or(0.0);
    let n_t = code.n_t();
    let scheme = SchemeConfig::new(code, r, grid)?.with_even_only(a.even_only.unwrap_or(false));
    let mut job = SimJob::new(scheme, n_r, a.trials.unwrap_or(DEFAULT_TRIALS), ctx.seed);
    job.error_target = match a.errors {
        Some(0) => None,
        Some(e) => Some(e),
        None => Some(simulator::DEFAULT_ERROR_TARGET),
    };
    job.decoder = match a.decoder.as_deref() {
        Some(s) => s.parse::<DecoderKind>()?,
        None => DecoderKind::Sphere,
    };
    if a.sorted_qr.unwrap_or(false) {
        job.column_order = ColumnOrder::SortedByNorm;
    }
    let stats = simulator::error_probability(&job)?;
    let window = a.window.unwrap_or(DEFAULT_WINDOW);
    let summary = json!({
        "code": job.scheme.code.name(),
        "n_t": n_t,
        "n_r": n_r,
        "r": r,
        "slope": slope_json(stats.slope(window)),
        "optimal_diversity": optimal_at(n_t, n_r, r),
        "note": OFFSET_NOTE,
        "points": stats.points,
    });
    let body = report::error_csv_body(&stats.points);
    write_sim(ctx.seed, &a, &body, a.out.as_ref(), a.summary.as_ref(), summary)
}

fn simulate_outage(ctx: &Ctx, a: OutageArgs) -> Result<()> {
    let n_t = need(a.nt, "--nt")?;
    let n_r = need(a.nr, "--nr")?;
    let grid = parse_grid(need(a.snr.as_deref(), "--snr")?)?;
    let r = a.r.unwrap_or(0.0);
    let offset = a.offset.unwrap_or(if r == 0.0 { 1.0 } else { 0.0 });
    let rate = RateSchedule { r, offset_bits: offset };
    let trials = a.trials.unwrap_or(DEFAULT_TRIALS);
    let importance = match a.method.as_deref().unwrap_or("mc") {
        "mc" => false,
        "is" => true,
        m => bail!("unknown outage method '{m}'; expected mc or is"),
    };
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            if importance {
                simulator::outage_probability_is(n_t, n_r, rate, db, trials, ctx.seed, i as u64)
            } else {
                simulator::outage_probability(n_t, n_r, rate, db, trials, ctx.seed, i as u64)
            }
        })
        .collect::<stbc_core::Result<Vec<OutagePoint>>>()?;
    let snr: Vec<f64> = points.iter().map(|p| p.snr_db).collect();
    let p: Vec<f64> = points.iter().map(|p| p.p).collect();
    let window = a.window.unwrap_or(DEFAULT_WINDOW);
    let summary = json!({
        "n_t": n_t,
        "n_r": n_r,
        "r": r,
        "offset_bits": offset,
        "slope": slope_json(simulator::dmt_slope(&snr, &p, window)),
        "optimal_diversity": optimal_at(n_t, n_r, r),
        "note": OFFSET_NOTE,
        "points": points,
    });
    let body = report::outage_csv_body(&points);
    write_sim(ctx.seed, &a, &body, a.out.as_ref(), a.summary.as_ref(), summary)
}

fn read_curve(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body = csv_body(&text);
    let mut lines = body.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> =
        lines.next().ok_or_else(|| anyhow!("{} has no header row", path.display()))?.split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| h.trim() == name).ok_or_else(|| anyhow!("{} has no '{name}' column", path.display()))
    };
    let (ix, ip) = (col("snr_db")?, col("pe")?);
    let (mut xs, mut ps) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64> {
            f.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| anyhow!("{}: bad data row {}", path.display(), n + 1))
        };
        xs.push(get(ix)?);
        ps.push(get(ip)?);
    }
    Ok((xs, ps))
}

fn dmt_estimate(ctx: &Ctx, a: EstimateArgs) -> Result<()> {
    let input = need(a.input.as_deref(), "--input")?;
    let (snr, p) = read_curve(input)?;
    let window = a.window.unwrap_or(DEFAULT_WINDOW);
    let fit = simulator::dmt_slope(&snr, &p, window)?;
    let optimal = match (a.nt, a.nr) {
        (Some(nt), Some(nr)) => optimal_at(nt, nr, a.r.unwrap_or(0.0)),
        _ => Value::Null,
    };
    let results = json!({
        "points": snr.len(),
        "window": window,
        "slope": fit.slope,
        "stderr": fit.slope_stderr,
        "intercept": fit.intercept,
        "optimal_diversity": optimal,
        "note": OFFSET_NOTE,
    });
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, results)?)
}

fn dmt_optimal(ctx: &Ctx, a: OptimalArgs) -> Result<()> {
    let curve = dmt::optimal_dmt(need(a.nt, "--nt")?, need(a.nr, "--nr")?)?;
    let at = match a.r {
        Some(r) => json!({ "r": r, "diversity": curve.eval(r)? }),
        None => Value::Null,
    };
    let results = json!({
        "n_t": curve.n_t,
        "n_r": curve.n_r,
        "n_min": curve.n_min(),
        "vertices": curve.vertices,
        "at": at,
    });
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, results)?)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number '{t}' in '{s}'"))).collect()
}

fn dmt_kkt(ctx: &Ctx, a: KktArgs) -> Result<()> {
    let n_t = need(a.nt, "--nt")?;
    let n_r = need(a.nr, "--nr")?;
    let d_sq = parse_list(need(a.dsq.as_deref(), "--dsq")?)?;
    let snr = db_to_linear(need(a.snr_db, "--snr-db")?);
    let (r, delta) = match a.rdelta {
        Some(s) if a.r.is_some() || a.delta.is_some() => bail!("--rdelta {s} conflicts with --r/--delta"),
        Some(s) => (0.0, s),
        None => (a.r.unwrap_or(0.0), need(a.delta, "--delta (or --rdelta)")?),
    };
    let p = KktProblem::new(n_t, n_r, d_sq, snr, r, delta)?;
    let sol = dmt::kkt_waterfill(&p);
    let cross = if n_t * n_r <= 16 {
        serde_json::to_value(dmt::kkt_crosscheck(&p, a.restarts.unwrap_or(DEFAULT_RESTARTS), ctx.seed)?)?
    } else {
        json!({ "skipped": "projected-gradient cross-check runs only for n_t n_r <= 16" })
    };
    let results = json!({
        "problem": p,
        "solution": sol,
        "crosscheck": cross,
    });
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, results)?)
}

fn dmt_exponent(ctx: &Ctx, a: ExponentArgs) -> Result<()> {
    let res = dmt::outage_exponent_lp(need(a.nt, "--nt")?, need(a.nr, "--nr")?, need(a.r, "--r")?)?;
    emit(a.out.as_deref(), &envelope(ctx.seed, &a, serde_json::to_value(&res)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:5:20").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_grid("14:2:19").unwrap(), vec![14.0, 16.0, 18.0]);
        assert_eq!(parse_grid("12").unwrap(), vec![12.0]);
        assert_eq!(parse_grid("3, 9").unwrap(), vec![3.0, 9.0]);
        assert!(parse_grid("0:-1:5").is_err());
        assert!(parse_grid("a:b").is_err());
    }
}
