use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use bfd_core::energy::{fmt17, EnergyReport};
use bfd_core::evolution::{default_dt, evolve, Control, SchemeConfig};
use bfd_core::harness::{run_study, write_csv, write_manifest, StudyKind};
use bfd_core::{FieldState, Grid, Model, Result, Snapshot};

use crate::config::{RunConfig, Start};

pub const SYMBOLS_HEADER: [&str; 7] = ["xi", "sigma", "A", "g", "omega1", "omega2", "im_lambda_plus"];

fn input_json(cfg: &RunConfig, config_path: &Path) -> serde_json::Value {
    serde_json::json!({
        "config_file": config_path.display().to_string(),
        "resolved": cfg,
    })
}

pub fn study(cfg: &RunConfig, kind: StudyKind, config_path: &Path) -> Result<String> {
    let sc = cfg.study(kind)?;
    let csv = run_study(&sc, &cfg.directory, input_json(cfg, config_path))?;
    Ok(format!("{} written", csv.display()))
}

pub fn symbols(cfg: &RunConfig, config_path: &Path) -> Result<String> {
    let model = Model::from_spec(cfg.params, cfg.grid.clone())?;
    let grid = model.grid();
    let sym = model.symbols();
    let mut rows: Vec<(i64, Vec<String>)> = (0..grid.len())
        .filter(|&i| grid.modes(0)[i] >= 0 && (grid.dim() == 1 || grid.modes(1)[i] == 0))
        .map(|i| {
            let vals = [
                grid.xi(0)[i],
                sym.sigma[i],
                sym.a[i],
                sym.g[i],
                sym.omega1[i],
                sym.omega2[i],
                sym.lambda_plus_im[i],
            ];
            (grid.modes(0)[i], vals.iter().map(|x| fmt17(*x)).collect())
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r.1).collect();
    fs::create_dir_all(&cfg.directory)?;
    write_csv(cfg.directory.join("symbols.csv"), &SYMBOLS_HEADER, &rows)?;
    write_manifest(
        &cfg.directory,
        cfg,
        &["symbols.csv".to_string()],
        serde_json::Value::Null,
        input_json(cfg, config_path),
    )?;
    Ok(format!("{} wavenumbers written", rows.len()))
}

pub fn simulate(cfg: &RunConfig, config_path: &Path) -> Result<String> {
    let model = Model::new(cfg.params, Grid::new(cfg.grid.clone())?)?;
    let state = match &cfg.start {
        Start::Profile(d) => d.build(&model)?,
        Start::Snapshot(path) => {
            let snap = Snapshot::read(BufReader::new(File::open(path)?))?;
            snap.into_state(model.grid())?
        }
    };
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&model, &state, cfg.scheme));
    let sc = SchemeConfig {
        scheme: cfg.scheme,
        dt,
        dealias: cfg.dealias,
        max_t: cfg.max_t,
        cadence: cfg.cadence,
    };
    sc.validate()?;
    let dir = &cfg.directory;
    fs::create_dir_all(dir)?;
    let snap_dir = dir.join("snapshots");
    if cfg.snapshots {
        fs::create_dir_all(&snap_dir)?;
    }
    let s = cfg.s.unwrap_or(0.0);
    let variant = cfg.case_override.unwrap_or(model.case.variant);
    let mut energy = Vec::new();
    let mut snaps = Vec::new();
    let mut monitor = |m: &Model, st: &FieldState, step: usize| -> Result<Control> {
        energy.push(EnergyReport::compute_with(m, st, s, variant)?.csv_record());
        if cfg.snapshots {
            let name = format!("snap_{step:08}.bfd");
            let mut w = BufWriter::new(File::create(snap_dir.join(&name))?);
            Snapshot::from_state(st).write(&mut w)?;
            w.flush()?;
            snaps.push(format!("snapshots/{name}"));
        }
        Ok(Control::Continue)
    };
    let traj = evolve(&model, &state, &sc, &mut [&mut monitor])?;

    write_csv(dir.join("energy.csv"), &EnergyReport::CSV_HEADER, &energy)?;
    let mut events = BufWriter::new(File::create(dir.join("events.jsonl"))?);
    for e in &traj.events {
        writeln!(events, "{}", e.json_line())?;
    }
    events.flush()?;
    let mut outputs = vec!["energy.csv".to_string(), "events.jsonl".to_string()];
    outputs.extend(snaps);
    let summary = serde_json::json!({
        "termination": traj.termination.as_str(),
        "steps": traj.steps,
        "t_final": traj.state.t,
        "dt": dt,
    });
    let run = serde_json::json!({ "scheme": sc, "s": s, "energy_variant": variant });
    write_manifest(dir, &run, &outputs, summary, input_json(cfg, config_path))?;
    Ok(format!(
        "{} steps, t = {}, termination {}",
        traj.steps,
        traj.state.t,
        traj.termination.as_str()
    ))
}
