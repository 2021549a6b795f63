//! Mode drivers.

use rayon::prelude::*;
use serde::Serialize;

use xymagic::analysis::crossover::{crossover_map, CrossoverOptions};
use xymagic::analysis::finite_size::{fss_collapse, size_scan, CollapseOptions, CollapseResult, SizeScan};
use xymagic::analysis::fit::ScalingFit;
use xymagic::analysis::single_site::{mpp_locate, MppOptions};
use xymagic::analysis::symmetric::{kappa_fit, SuddenDeathOptions};
use xymagic::chain::{ground_state, FiniteChainSpec};
use xymagic::correlators::{correlator_set, two_site_from_set, ChainParams};
use xymagic::rom::{global_magic_parts, rom_lp};
use xymagic::stabilizer::StabilizerPolytope;
use xymagic::state::PauliVector;

use crate::config::{Mode, Resolved};
use crate::output::{write_json, write_sidecar, CsvSink, Row};
use crate::CliError;

/// Runs the configured mode and writes its outputs.
pub fn run(cfg: &Resolved) -> Result<(), CliError> {
    let out = cfg.config.output.as_deref();
    let rows = match cfg.mode {
        Mode::SingleSiteSweep => Some(csv(cfg, single_site_cells(cfg), single_site_rows)?),
        Mode::TwoSiteThermal => Some(csv(cfg, thermal_cells(cfg), thermal_rows)?),
        Mode::TwoSiteBrokenEd => Some(csv(cfg, broken_cells(cfg), broken_rows)?),
        Mode::Mpp => Some(mpp(cfg)?),
        Mode::SuddenDeath => Some(sudden_death(cfg)?),
        Mode::Fss => {
            write_json(out, &fss(cfg)?)?;
            None
        }
        Mode::CrossoverMap => {
            let map = crossover_map(
                cfg.gammas[0],
                cfg.distances[0],
                &cfg.lambdas,
                &cfg.temperatures,
                &CrossoverOptions::default(),
            )?;
            write_json(out, &map)?;
            None
        }
        Mode::PolytopeDump => {
            let p = StabilizerPolytope::cached(cfg.sizes[0])?;
            write_json(out, &p.states())?;
            Some(p.len())
        }
    };
    if let Some(path) = out {
        write_sidecar(path, &cfg.config, rows)?;
    }
    Ok(())
}

/// Evaluates `cells` in parallel, one batch at a time, writing rows in
/// cell order regardless of completion order.
fn csv<C, F>(cfg: &Resolved, cells: Vec<C>, eval: F) -> Result<usize, CliError>
where
    C: Sync,
    F: Fn(&Resolved, &C) -> xymagic::Result<Vec<Row>> + Sync,
{
    let mut sink = CsvSink::create(cfg.config.output.as_deref())?;
    let batch = 4 * rayon::current_num_threads();
    for chunk in cells.chunks(batch) {
        let rows = chunk
            .par_iter()
            .map(|c| eval(cfg, c))
            .collect::<xymagic::Result<Vec<_>>>()?;
        sink.write_batch(&rows.concat())?;
    }
    Ok(sink.finish()?)
}

fn product<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn single_site_cells(cfg: &Resolved) -> Vec<(f64, f64)> {
    product(&cfg.gammas, &cfg.lambdas)
}

fn single_site_rows(cfg: &Resolved, &(gamma, lambda): &(f64, f64)) -> xymagic::Result<Vec<Row>> {
    let params = ChainParams::new(lambda, gamma).with_distance(1).with_quad_tol(cfg.quad_tol);
    let set = correlator_set(&params)?;
    let rom = rom_lp(&PauliVector::bloch(set.sx, 0.0, set.sz)?, StabilizerPolytope::cached(1)?)?;
    let at = |row: Row| Row {
        lambda: Some(lambda),
        gamma: Some(gamma),
        temperature: Some(0.0),
        ..row
    };
    Ok(vec![
        at(Row::new("sx", set.sx)),
        at(Row::new("sz", set.sz).err(set.err_estimate)),
        at(Row::new("rom", rom.value).err(rom.objective_gap.abs())),
    ])
}

fn thermal_cells(cfg: &Resolved) -> Vec<(f64, f64, f64, usize)> {
    let mut cells = Vec::new();
    for &g in &cfg.gammas {
        for &r in &cfg.distances {
            for &t in &cfg.temperatures {
                for &l in &cfg.lambdas {
                    cells.push((g, l, t, r));
                }
            }
        }
    }
    cells
}

fn thermal_rows(cfg: &Resolved, &(gamma, lambda, t, r): &(f64, f64, f64, usize)) -> xymagic::Result<Vec<Row>> {
    let params = ChainParams::new(lambda, gamma)
        .with_temperature(t)
        .with_distance(r)
        .with_quad_tol(cfg.quad_tol);
    let set = correlator_set(&params)?;
    let rom = rom_lp(&two_site_from_set(&set)?, StabilizerPolytope::cached(2)?)?;
    let at = |row: Row| Row {
        lambda: Some(lambda),
        gamma: Some(gamma),
        temperature: Some(t),
        r: Some(r),
        ..row
    };
    let e = set.err_estimate;
    Ok(vec![
        at(Row::new("sz", set.sz).err(e)),
        at(Row::new("xx", set.xx).err(e)),
        at(Row::new("yy", set.yy).err(e)),
        at(Row::new("zz", set.zz).err(e)),
        at(Row::new("rom", rom.value).err(rom.objective_gap.abs())),
    ])
}

fn broken_cells(cfg: &Resolved) -> Vec<(usize, f64, usize, f64)> {
    let mut cells = Vec::new();
    for &n in &cfg.sizes {
        for &g in &cfg.gammas {
            for &r in &cfg.distances {
                for &l in &cfg.lambdas {
                    cells.push((n, g, r, l));
                }
            }
        }
    }
    cells
}

fn broken_rows(cfg: &Resolved, &(n, gamma, r, lambda): &(usize, f64, usize, f64)) -> xymagic::Result<Vec<Row>> {
    let spec = FiniteChainSpec::pinned(n, lambda, gamma).with_sb_field(cfg.sb_field);
    let (i, j) = spec.central_pair(r)?;
    let gs = ground_state(&spec)?;
    let rho = gs.reduced_density(&[i, j])?;
    let parts = global_magic_parts(&rho, StabilizerPolytope::cached(2)?)?;
    let at = |row: Row| Row {
        lambda: Some(lambda),
        gamma: Some(gamma),
        temperature: Some(0.0),
        r: Some(r),
        n: Some(n),
        ..row
    };
    let e = gs.residual;
    let get = |label: &str| rho.get(label).expect("two-qubit label");
    Ok(vec![
        at(Row::new("sx", get("XI")).err(e)),
        at(Row::new("sz", get("ZI")).err(e)),
        at(Row::new("xx", get("XX")).err(e)),
        at(Row::new("zz", get("ZZ")).err(e)),
        at(Row::new("xz", get("XZ")).err(e)),
        at(Row::new("joint_rom", parts.joint_rom)),
        at(Row::new("product_rom", parts.product_rom)),
        at(Row::new("global_magic", parts.global)),
    ])
}

fn mpp(cfg: &Resolved) -> Result<usize, CliError> {
    let opts = MppOptions {
        resolution: cfg.resolution,
        threshold: cfg.threshold,
        quad_tol: cfg.quad_tol,
        ..Default::default()
    };
    let results = cfg
        .gammas
        .par_iter()
        .map(|&g| mpp_locate(g, &opts))
        .collect::<xymagic::Result<Vec<_>>>()?;
    match cfg.config.output.as_deref() {
        Some(path) => {
            let mut sink = CsvSink::create(Some(path))?;
            let rows: Vec<Row> = results
                .iter()
                .map(|m| Row {
                    gamma: Some(m.gamma),
                    temperature: Some(0.0),
                    ..Row::new("mpp", m.lambda).err(m.above - m.below)
                })
                .collect();
            sink.write_batch(&rows)?;
            Ok(sink.finish()?)
        }
        None => {
            for m in &results {
                println!("gamma={} mpp={:.7}", m.gamma, m.lambda);
            }
            Ok(results.len())
        }
    }
}

fn sudden_death(cfg: &Resolved) -> Result<usize, CliError> {
    let opts = SuddenDeathOptions {
        threshold: cfg.threshold,
        ..Default::default()
    };
    let mut sink = CsvSink::create(cfg.config.output.as_deref())?;
    for &g in &cfg.gammas {
        let (samples, fit): (Vec<(f64, f64)>, ScalingFit) = kappa_fit(g, &cfg.distances, &opts)?;
        let mut rows: Vec<Row> = samples
            .iter()
            .map(|&(r, t)| Row {
                lambda: Some(1.0),
                gamma: Some(g),
                temperature: Some(t),
                r: Some(r as usize),
                ..Row::new("t_c", t).err(opts.rel_resolution * t)
            })
            .collect();
        rows.push(Row {
            lambda: Some(1.0),
            gamma: Some(g),
            ..Row::new("kappa", fit.exponent).err(1.0 - fit.r_squared)
        });
        sink.write_batch(&rows)?;
    }
    Ok(sink.finish()?)
}

#[derive(Serialize)]
struct FssOutput {
    gamma: f64,
    sb_field: f64,
    scans: Vec<SizeScan>,
    collapse: CollapseResult,
}

fn fss(cfg: &Resolved) -> Result<FssOutput, CliError> {
    let gamma = cfg.gammas[0];
    let scans = cfg
        .sizes
        .iter()
        .map(|&n| size_scan(&FiniteChainSpec::pinned(n, 1.0, gamma).with_sb_field(cfg.sb_field), &cfg.lambdas))
        .collect::<xymagic::Result<Vec<_>>>()?;
    let curves: Vec<_> = scans.iter().map(SizeScan::curve).collect();
    let collapse = fss_collapse(&curves, &CollapseOptions::default())?;
    Ok(FssOutput {
        gamma,
        sb_field: cfg.sb_field,
        scans,
        collapse,
    })
}
