//! The four experiment commands: train, baseline, bench, eval.
//!
//! Every command writes a `resolved-config.json` (defaults applied, flag
//! overrides folded in) next to its outputs, so one file fully determines
//! a rerun.

use std::path::{Path, PathBuf};
use std::time::Instant;

use eprune_core::bde::BdeParams;
use eprune_core::bench::{run_bde_benchmark, OneMax, PseudoBooleanObjective, RandomTable};
use eprune_core::nn::Network;
use eprune_core::rng;
use eprune_core::trainer::{
    self, evaluate, fine_tune, magnitude_prune_baseline, Phase, RunMetrics,
};

use crate::config::{BenchObjective, RunConfig};
use crate::dataset::{build_datasets, BuiltData};
use crate::error::CliError;
use crate::{checkpoint, maskfile, metrics, report};

/// Network weight-init sub-seed tag. The trainer owns tags 1 and
/// `(1<<32)+epoch`; this one lives outside both namespaces.
const TAG_NETWORK: u64 = 1 << 33;

fn prepare_out_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    let out = config.out_dir()?.to_path_buf();
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&format!("out dir {}", out.display()), e))?;
    let resolved = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Other(format!("serializing resolved config: {e}")))?;
    std::fs::write(out.join("resolved-config.json"), resolved + "\n")
        .map_err(|e| CliError::io("resolved-config.json", e))?;
    Ok(out)
}

fn build_network(config: &RunConfig, data: &BuiltData) -> Result<Network, CliError> {
    let spec = config.require_network()?;
    Network::new(
        data.train.dim(),
        &spec.hidden,
        data.train.class_count(),
        rng::derive_seed(config.train.seed, TAG_NETWORK),
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

fn write_run_outputs(
    out: &Path,
    net: &Network,
    mask: &eprune_core::nn::StateVector,
    metrics_data: &RunMetrics,
    data: &BuiltData,
) -> Result<Vec<report::ReportRow>, CliError> {
    metrics::write_metrics(&out.join("metrics.csv"), metrics_data)?;
    checkpoint::save_network(&out.join("checkpoint.bin"), net)?;
    maskfile::save_mask(&out.join("mask.txt"), mask, &net.unit_layout())?;
    let rows = report::f_p_rows(net, mask, &data.test)?;
    report::write_report(&out.join("report.csv"), &rows)?;
    Ok(rows)
}

fn write_summary(
    out: &Path,
    command: &str,
    config: &RunConfig,
    final_eval: serde_json::Value,
    extra: serde_json::Value,
    wall_time_s: f64,
) -> Result<(), CliError> {
    let mut summary = serde_json::json!({
        "command": command,
        "seed": config.train.seed,
        "final": final_eval,
        "wall_time_s": wall_time_s,
        "config": config,
    });
    if let (Some(obj), Some(extra_obj)) = (summary.as_object_mut(), extra.as_object()) {
        for (k, v) in extra_obj {
            obj.insert(k.clone(), v.clone());
        }
    }
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Other(format!("serializing summary: {e}")))?;
    std::fs::write(out.join("summary.json"), text + "\n")
        .map_err(|e| CliError::io("summary.json", e))
}

fn final_eval_json(
    net: &Network,
    mask: &eprune_core::nn::StateVector,
    data: &BuiltData,
    topk: &[usize],
) -> Result<serde_json::Value, CliError> {
    let row = evaluate(net, mask, &data.test, topk)?;
    Ok(serde_json::json!({
        "loss": row.loss,
        "kept": row.kept,
        "total": row.total,
        "r_pct": 100.0 * row.kept_ratio,
        "test_topk": row.topk.iter().map(|(k, acc)| {
            serde_json::json!({ "k": k, "pct": 100.0 * acc })
        }).collect::<Vec<_>>(),
    }))
}

pub fn train(config: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let data = build_datasets(config.require_dataset()?)?;
    let core_config = config.train.to_core();
    let mut net = build_network(config, &data)?;
    let (mask, run_metrics) = trainer::train_epruning(&core_config, &mut net, &data.train, &data.test)?;

    let out = prepare_out_dir(config)?;
    let rows = write_run_outputs(&out, &net, &mask, &run_metrics, &data)?;
    let final_eval = final_eval_json(&net, &mask, &data, &core_config.topk)?;
    let extra = serde_json::json!({ "label_map": data.label_map });
    write_summary(&out, "train", config, final_eval, extra, started.elapsed().as_secs_f64())?;

    print!("{}", report::render_table(&rows));
    println!("outputs written to {}", out.display());
    Ok(())
}

pub fn baseline(config: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let rate = config
        .baseline
        .as_ref()
        .map(|b| b.rate)
        .ok_or_else(|| CliError::Config("baseline needs a rate (config `baseline.rate` or --rate)".into()))?;
    let data = build_datasets(config.require_dataset()?)?;
    let core_config = config.train.to_core();
    let mut net = build_network(config, &data)?;

    // Dense pre-training, then unit-magnitude pruning at the requested
    // rate, then fine-tuning of the surviving sub-network.
    let mut dense_metrics = trainer::train_dense(&mut net, &core_config, &data.train, Some(&data.test))?;
    for row in &mut dense_metrics.rows {
        row.phase = Phase::Search;
    }
    let pruned = magnitude_prune_baseline(&net, rate)?;
    if !pruned.reached_target {
        eprintln!(
            "warning: target ratio {rate} is below the all-zeros floor; using the minimal mask"
        );
    }
    let mut ft_metrics = fine_tune(&mut net, &pruned.mask, &core_config, &data.train, Some(&data.test))?;
    for row in &mut ft_metrics.rows {
        row.epoch += core_config.epochs;
    }
    let mut combined = dense_metrics;
    combined.rows.extend(ft_metrics.rows);

    let out = prepare_out_dir(config)?;
    let rows = write_run_outputs(&out, &net, &pruned.mask, &combined, &data)?;
    let final_eval = final_eval_json(&net, &pruned.mask, &data, &core_config.topk)?;
    let extra = serde_json::json!({
        "label_map": data.label_map,
        "target_rate": rate,
        "reached_target": pruned.reached_target,
    });
    write_summary(&out, "baseline", config, final_eval, extra, started.elapsed().as_secs_f64())?;

    print!("{}", report::render_table(&rows));
    println!("outputs written to {}", out.display());
    Ok(())
}

pub fn bench(config: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let section = config.bench.clone().unwrap_or_default();
    let objective: Box<dyn PseudoBooleanObjective> = match section.objective {
        BenchObjective::Onemax => Box::new(OneMax {
            dimension: section.dim,
        }),
        BenchObjective::RandomTable => Box::new(
            RandomTable::new(section.dim, section.table_seed)
                .map_err(|e| CliError::Config(e.to_string()))?,
        ),
    };
    let params = BdeParams {
        mutation_factor: section.f_mut,
        crossover_rate: section.crossover_rate,
        seed: 0,
    };
    let seeds: Vec<u64> = (0..section.seeds as u64)
        .map(|i| section.base_seed + i)
        .collect();
    let result = run_bde_benchmark(
        &*objective,
        &params,
        section.population_size,
        section.steps,
        &seeds,
    )
    .map_err(|e| CliError::Other(e.to_string()))?;

    let out = prepare_out_dir(config)?;
    let mut csv = String::from("seed,step,best_energy\n");
    for run in &result.runs {
        for (step, best) in run.best_history.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", run.seed, step, best));
        }
    }
    std::fs::write(out.join("bench.csv"), csv).map_err(|e| CliError::io("bench.csv", e))?;

    let summary = serde_json::json!({
        "command": "bench",
        "objective": result.objective,
        "optimum_energy": result.optimum_energy,
        "success_rate": result.success_rate,
        "seeds": seeds.len(),
        "steps": section.steps,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "config": config,
    });
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary).unwrap() + "\n",
    )
    .map_err(|e| CliError::io("summary.json", e))?;

    println!(
        "{}: success rate {:.2} ({} seeds, {} steps, optimum {})",
        result.objective,
        result.success_rate,
        seeds.len(),
        section.steps,
        result.optimum_energy
    );
    println!("outputs written to {}", out.display());
    Ok(())
}

pub fn eval(config: &RunConfig, checkpoint_path: &Path, mask_path: &Path) -> Result<(), CliError> {
    let net = checkpoint::load_network(checkpoint_path)?;
    let (mask, _) = maskfile::load_mask(mask_path)?;
    if mask.len() != net.prunable_units() {
        return Err(CliError::Config(format!(
            "mask holds {} bits but the network has {} prunable units",
            mask.len(),
            net.prunable_units()
        )));
    }
    let data = build_datasets(config.require_dataset()?)?;
    let rows = report::f_p_rows(&net, &mask, &data.test)?;
    let out = prepare_out_dir(config)?;
    report::write_report(&out.join("report.csv"), &rows)?;
    print!("{}", report::render_table(&rows));
    println!("outputs written to {}", out.display());
    Ok(())
}
