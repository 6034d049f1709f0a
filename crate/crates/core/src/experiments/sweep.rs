use std::io::{self, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metro::{generate_metro_instance, MetroGenConfig};
use crate::error::ModelError;
use crate::lns::{lns_run_with, LnsParams};
use crate::model::Instance;
use crate::multigraph::Multigraph;

pub const SWEEP_HEADER: &str = "level,instance_seed,run_seed,cost_L,cost_inf,detour_pct,station_visits";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Levels are station counts.
    Density,
    /// Levels are battery capacities.
    Battery,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub levels: Vec<u32>,
    /// Instance seeds are `first_instance_seed ..`.
    pub first_instance_seed: u64,
    pub instances_per_level: usize,
    pub runs_per_instance: usize,
    /// Search parameters; the run seed is overwritten per run.
    pub params: LnsParams,
    /// Base generator settings; the varied field and the seed are overwritten.
    pub generator: MetroGenConfig,
    /// Worker threads, 0 for the rayon default.
    pub threads: usize,
}

/// One (level, instance, run) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub level: u32,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub cost_l: Option<i64>,
    pub cost_inf: Option<i64>,
    pub detour_pct: Option<f64>,
    pub station_visits: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub mean_detour_pct: f64,
    pub mean_station_visits: f64,
    pub records: usize,
    pub missing: usize,
    pub negative: usize,
}

pub fn detour_pct(cost_l: i64, cost_inf: i64) -> f64 {
    100.0 * (cost_l - cost_inf) as f64 / cost_inf as f64
}

fn instance_for(cfg: &SweepConfig, level: Option<u32>, seed: u64) -> Result<Instance, ModelError> {
    let mut g = cfg.generator.clone();
    g.seed = seed;
    match (cfg.mode, level) {
        (SweepMode::Density, Some(l)) => g.stations = l as usize,
        (SweepMode::Battery, Some(l)) => g.battery = Some(l),
        (_, None) => g.battery = None,
    }
    generate_metro_instance(&g)
}

fn solve(inst: &Instance, params: &LnsParams, run_seed: u64) -> (Option<i64>, Option<usize>) {
    let graph = Multigraph::new(inst);
    let p = LnsParams { seed: run_seed, ..params.clone() };
    let r = lns_run_with(inst, &graph, &p);
    match r.solution {
        Some(s) => (Some(s.total_cost()), Some(s.station_visits(inst))),
        None => (None, None),
    }
}

/// Best cost and station visits of one run.
type Solved = (Option<i64>, Option<usize>);

/// Solves every (level, instance, run) with the level's battery and the
/// matching unlimited-battery reference, in parallel. The reference does not
/// depend on the level, so it is solved once per (instance, run) and shared.
/// Records come back ordered by level, instance, run.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, ModelError> {
    let seeds: Vec<u64> = (0..cfg.instances_per_level as u64).map(|i| cfg.first_instance_seed + i).collect();
    let runs: Vec<u64> = (1..=cfg.runs_per_instance as u64).collect();
    let mut jobs: Vec<(Option<u32>, u64, u64)> = Vec::new();
    for &s in &seeds {
        for &r in &runs {
            jobs.push((None, s, r));
        }
    }
    for &l in &cfg.levels {
        for &s in &seeds {
            for &r in &runs {
                jobs.push((Some(l), s, r));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ModelError::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<Result<Solved, ModelError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(level, seed, run)| {
                let inst = instance_for(cfg, level, seed)?;
                Ok(solve(&inst, &cfg.params, run))
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let n_ref = seeds.len() * runs.len();
    let (refs, constrained) = results.split_at(n_ref);
    let mut out = Vec::with_capacity(constrained.len());
    for (&(level, seed, run), &(cost_l, visits)) in jobs[n_ref..].iter().zip(constrained) {
        let ri = (seed - cfg.first_instance_seed) as usize * runs.len() + (run - 1) as usize;
        let cost_inf = refs[ri].0;
        let detour = match (cost_l, cost_inf) {
            (Some(a), Some(b)) if b > 0 => Some(detour_pct(a, b)),
            _ => None,
        };
        out.push(SweepRecord {
            level: level.expect("constrained job"),
            instance_seed: seed,
            run_seed: run,
            cost_l,
            cost_inf,
            detour_pct: detour,
            station_visits: visits,
        });
    }
    Ok(out)
}

/// Means per level, in order of first appearance.
pub fn summarize(records: &[SweepRecord]) -> Vec<LevelSummary> {
    let mut levels: Vec<u32> = Vec::new();
    for r in records {
        if !levels.contains(&r.level) {
            levels.push(r.level);
        }
    }
    levels
        .into_iter()
        .map(|level| {
            let rs: Vec<&SweepRecord> = records.iter().filter(|r| r.level == level).collect();
            let detours: Vec<f64> = rs.iter().filter_map(|r| r.detour_pct).collect();
            let visits: Vec<f64> = rs.iter().filter_map(|r| r.station_visits).map(|v| v as f64).collect();
            let negative = detours.iter().filter(|&&d| d < 0.0).count();
            if negative > 0 {
                warn!("level {level}: {negative} negative detour(s), the reference run was beaten");
            }
            let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
            LevelSummary {
                level,
                mean_detour_pct: mean(&detours),
                mean_station_visits: mean(&visits),
                records: rs.len(),
                missing: rs.len() - detours.len(),
                negative,
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.level,
            r.instance_seed,
            r.run_seed,
            opt(r.cost_l.map(|c| c.to_string())),
            opt(r.cost_inf.map(|c| c.to_string())),
            opt(r.detour_pct.map(|d| format!("{d:.4}"))),
            opt(r.station_visits.map(|v| v.to_string())),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(mode: SweepMode, levels: Vec<u32>) -> SweepConfig {
        SweepConfig {
            mode,
            levels,
            first_instance_seed: 1,
            instances_per_level: 2,
            runs_per_instance: 1,
            params: LnsParams { max_iterations: Some(5), t_max: 1e6, ..LnsParams::default() },
            generator: MetroGenConfig { inner_customers: 8, outer_customers: 2, ..MetroGenConfig::default() },
            threads: 1,
        }
    }

    #[test]
    fn records_are_ordered_and_paired() {
        let cfg = tiny(SweepMode::Density, vec![2, 5]);
        let recs = sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(
            recs.iter().map(|r| (r.level, r.instance_seed)).collect::<Vec<_>>(),
            vec![(2, 1), (2, 2), (5, 1), (5, 2)]
        );
        // same reference for both levels
        assert_eq!(recs[0].cost_inf, recs[2].cost_inf);
        for r in &recs {
            if let (Some(a), Some(b)) = (r.cost_l, r.cost_inf) {
                assert_eq!(r.detour_pct, Some(detour_pct(a, b)));
            }
        }
        let s = summarize(&recs);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].records, 2);
    }

    #[test]
    fn unlimited_reference_has_no_visits() {
        let cfg = tiny(SweepMode::Battery, vec![1000]);
        let inst = instance_for(&cfg, None, 1).unwrap();
        let (cost, visits) = solve(&inst, &cfg.params, 1);
        assert_eq!(visits, Some(0));
        assert_eq!(detour_pct(cost.unwrap(), cost.unwrap()), 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let recs = vec![SweepRecord {
            level: 5,
            instance_seed: 1,
            run_seed: 2,
            cost_l: Some(110),
            cost_inf: Some(100),
            detour_pct: Some(10.0),
            station_visits: Some(3),
        }];
        let mut out = Vec::new();
        write_sweep_csv(&recs, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("level,instance_seed,run_seed,cost_L,cost_inf,detour_pct,station_visits"));
        assert_eq!(lines.next(), Some("5,1,2,110,100,10.0000,3"));
    }
}
