use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use mimo_cs::array_channel::{
    synthesize_channel, ArrayConfig, ChannelPair, GridMode, Path as ChannelPath, PathSet,
};
use mimo_cs::bounds::{
    asymptotic_ratio_audit, binomial_bounds_check, bound_report, fig1_csv, fig1_data, m_underbar,
    BoundInputs, Sweep,
};
use mimo_cs::code_matrices::{bch_parity_check, gf2_independence, shorten};
use mimo_cs::cs_analysis::{
    kronecker_lemma_batch, rip_constant, rotation_invariance_experiment, spark, spark_bounded,
    RotationExperiment,
};
use mimo_cs::json::MatrixJson;
use mimo_cs::recovery::{end_to_end, l0_exhaustive, omp, Algorithm, SUPPORT_TOL};
use mimo_cs::sensing::{gaussian_design, measure, vectorize_system, NoiseSpec, SensingDesign};
use mimo_cs::Budget;

use crate::args::*;
use crate::io::{
    decode, decode_matrix, decode_vector, load_matrix, lookup, payload, read_json, usage, CliResult,
};

pub enum Output {
    Json(Value),
    /// CSV text plus a summary that goes into the config echo.
    Csv {
        text: String,
        summary: Value,
    },
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("workbench types serialize")
}

pub fn execute(cmd: &Command, budget: &Budget) -> CliResult<Output> {
    Ok(match cmd {
        Command::Synth(a) => Output::Json(synth(a)?),
        Command::Measure(a) => Output::Json(measure_cmd(a, false)?),
        Command::Vectorize(a) => Output::Json(measure_cmd(a, true)?),
        Command::Spark(a) => {
            let g = load_matrix(&a.source.matrix, a.source.key.as_deref())?;
            let r = match a.max_size {
                Some(s) => spark_bounded(&g, s, a.tol, budget)?,
                None => spark(&g, a.tol, budget)?,
            };
            Output::Json(to_value(&r))
        }
        Command::Rip(a) => {
            let g = load_matrix(&a.source.matrix, a.source.key.as_deref())?;
            Output::Json(to_value(&rip_constant(&g, a.k, budget)?))
        }
        Command::VerifyLemmas(a) => Output::Json(to_value(&kronecker_lemma_batch(
            a.trials, a.seed, a.k, budget,
        )?)),
        Command::Rotation(a) => {
            let exp = RotationExperiment {
                m: a.m,
                n: a.n,
                k: a.k,
                trials: a.trials,
                seed: a.seed,
                rotation: a.rotation.into(),
            };
            Output::Json(to_value(&rotation_invariance_experiment(&exp, budget)?))
        }
        Command::Bch(a) => {
            let mut d = bch_parity_check(a.t, a.k)?;
            if let Some(n) = a.shorten_to {
                d = shorten(&d, n)?;
            }
            let check = gf2_independence(&d.h, d.k, budget, 0);
            Output::Json(json!({ "design": d, "gf2_independence": check }))
        }
        Command::Bounds(a) => {
            let inp = BoundInputs {
                n_t: a.nt,
                n_r: a.nr,
                k: a.k,
                delta: a.delta,
                epsilon: a.epsilon,
                log_base: a.log_base,
            };
            Output::Json(to_value(&bound_report(&inp)?))
        }
        Command::MUnderbar(a) => {
            let m = m_underbar(a.nt, a.nr, a.k)?;
            Output::Json(json!({ "n_t": a.nt, "n_r": a.nr, "k": a.k, "m_underbar": m }))
        }
        Command::BinomialBounds(a) => Output::Json(to_value(&binomial_bounds_check(a.n, a.k)?)),
        Command::Audit(a) => {
            let sweep = match a.mode {
                SweepMode::FixedK => Sweep::FixedK {
                    k: a.k.ok_or_else(|| usage("audit --mode fixed-k needs --k"))?,
                    grid: a.grid.clone(),
                },
                SweepMode::FixedN => Sweep::FixedN {
                    n: a.n.ok_or_else(|| usage("audit --mode fixed-n needs --n"))?,
                    grid: a.grid.clone(),
                },
            };
            let table = asymptotic_ratio_audit(&sweep, a.log_base)?;
            Output::Csv {
                text: table.to_csv(),
                summary: json!({
                    "log_base": table.log_base,
                    "ratio_underbar_range": table.ratio_underbar_range,
                    "ratio_bch_range": table.ratio_bch_range,
                }),
            }
        }
        Command::Fig1(a) => {
            let sweep = match a.mode {
                SweepMode::FixedK => Sweep::fixed_k(
                    a.k.ok_or_else(|| usage("fig1 --mode fixed-k needs --k"))?,
                    a.n_max
                        .ok_or_else(|| usage("fig1 --mode fixed-k needs --n-max"))?,
                ),
                SweepMode::FixedN => {
                    let n = a.n.ok_or_else(|| usage("fig1 --mode fixed-n needs --n"))?;
                    Sweep::fixed_n(n, a.k_max.unwrap_or(n))
                }
            };
            let rows = fig1_data(&sweep, a.log_base)?;
            Output::Csv {
                text: fig1_csv(&rows, a.log_base),
                summary: json!({ "log_base": a.log_base, "rows": rows.len() }),
            }
        }
        Command::Recover(a) => Output::Json(recover(a, budget)?),
        Command::E2e(a) => {
            let cfg = array_config(&a.array)?;
            let paths = PathSet::random_on_grid(cfg, a.k, a.mu, a.seed)?;
            let design = gaussian_design(a.array.nt, a.array.nr, a.mt, a.mr, a.design_seed)?;
            let noise = NoiseSpec {
                sigma: a.noise.sigma,
                seed: a.noise.noise_seed,
            };
            let rep = end_to_end(
                &paths,
                GridMode::Strict,
                &design,
                &noise,
                a.alg.into(),
                budget,
            )?;
            Output::Json(json!({ "path_set": paths, "report": rep }))
        }
        Command::Run(_) => {
            return Err(usage("a config file cannot itself contain a `run` command"))
        }
    })
}

fn array_config(a: &ArrayArgs) -> CliResult<ArrayConfig> {
    Ok(ArrayConfig::new(
        a.nt, a.nr, a.delta_t, a.delta_r, a.lambda_c,
    )?)
}

fn synth(a: &SynthArgs) -> CliResult<Value> {
    let cfg = array_config(&a.array)?;
    let set = match (&a.paths, a.k) {
        (Some(file), _) => {
            let v = read_json(file)?;
            let list = v.get("paths").unwrap_or(&v);
            let paths: Vec<ChannelPath> = decode(file, list)?;
            PathSet::new(cfg, paths, a.mu)?
        }
        (None, Some(k)) => PathSet::random_on_grid(cfg, k, a.mu, a.seed.unwrap_or(0))?,
        (None, None) => return Err(usage("synth needs --paths or --k")),
    };
    let mode: GridMode = a.grid_mode.into();
    let pair = synthesize_channel(&set, mode)?;
    Ok(json!({ "path_set": set, "grid_mode": mode, "channel": pair }))
}

fn load_design(file: &Path) -> CliResult<SensingDesign> {
    let v = read_json(file)?;
    let d = payload(&v).get("design").unwrap_or(payload(&v));
    let design: SensingDesign = decode(file, d)?;
    Ok(SensingDesign::new(design.f, design.w)?)
}

fn measure_cmd(a: &MeasureArgs, vectorize: bool) -> CliResult<Value> {
    let file = &a.channel;
    let v = read_json(file)?;
    let pair: ChannelPair = decode(file, lookup(&v, &["channel"]).unwrap_or(payload(&v)))?;
    let (n_r, n_t) = pair.q.shape();

    let design = match &a.design.design {
        Some(d) => load_design(d)?,
        None => {
            let (Some(mt), Some(mr)) = (a.design.mt, a.design.mr) else {
                return Err(usage("need --design FILE or both --mt and --mr"));
            };
            gaussian_design(n_t, n_r, mt, mr, a.design.design_seed.unwrap_or(0))?
        }
    };
    let noise = NoiseSpec {
        sigma: a.noise.sigma,
        seed: a.noise.noise_seed,
    };

    if !vectorize {
        let y = measure(&pair.q, &design, &noise)?;
        return Ok(json!({ "design": design, "Y": MatrixJson::from_complex(&y) }));
    }
    let set: PathSet = decode(
        file,
        lookup(&v, &["path_set"])
            .ok_or_else(|| usage("vectorize needs a `synth` output (with path_set)"))?,
    )?;
    let sys = vectorize_system(&pair, &design, &set.config, &noise)?;
    let mut out = to_value(&sys);
    let obj = out.as_object_mut().expect("struct serializes to an object");
    obj.insert("design".into(), to_value(&design));
    obj.insert("k".into(), json!(set.k()));
    obj.insert(
        "truth".into(),
        to_value(&mimo_cs::json::vector_to_json(&pair.q_angular_vec)),
    );
    Ok(out)
}

fn recover(a: &RecoverArgs, budget: &Budget) -> CliResult<Value> {
    let file = &a.system;
    let v = read_json(file)?;
    let missing = |what: &str| usage(format!("{}: no {what} in system file", file.display()));
    let g = decode_matrix(file, lookup(&v, &["G", "G_v"]).ok_or_else(|| missing("G"))?)?;
    let y = decode_vector(file, lookup(&v, &["y", "y_v"]).ok_or_else(|| missing("y"))?)?;
    let k = match a.k {
        Some(k) => k,
        None => decode(
            file,
            lookup(&v, &["k"]).ok_or_else(|| missing("k (pass --k)"))?,
        )?,
    };
    let alg: Algorithm = a.alg.into();
    let mut result = match alg {
        Algorithm::L0Exhaustive => l0_exhaustive(&g, &y, k, budget)?,
        Algorithm::Omp => omp(&g, &y, k, a.tol)?,
    };
    if let Some(t) = lookup(&v, &["truth"]) {
        result = result.compare(&decode_vector(file, t)?, SUPPORT_TOL.sqrt());
    }
    Ok(to_value(&result))
}
